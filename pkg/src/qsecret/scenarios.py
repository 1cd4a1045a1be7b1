"""State families and end-to-end pipelines linking entanglement and secrecy.

Two directions are exercised:

* entangled state -> witness -> local settings -> for every sampled Eve
  measurement the tripartite distribution keeps positive intrinsic
  information;
* separable decomposition -> purification with flag states held by Eve ->
  conditionally independent distribution that two parties can reproduce
  with public communication alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from ._backend import BACKEND
from .errors import InvariantError
from .infotheory import (
    ClassicalChannel,
    JointDistribution,
    SECRET_EPS,
    conditional_mutual_information,
    intrinsic_information,
    mutual_information,
)
from .measure import (
    Povm,
    coarse_grain_povm,
    conditional_states,
    measure_bipartite,
    measure_tripartite,
    random_rank1_povm,
)
from .qcore import DensityMatrix, PureTripartiteState, min_eig, partial_trace, partial_transpose, purify
from .witness import (
    Witness,
    check_product_positivity,
    expectation_from_data,
    min_product_overlap,
    npt_witness,
    upb_witness,
)

NO_SECRECY_TOL = 1e-10
SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=np.complex128) / np.sqrt(2.0)

VERDICT_SECRET = "secrecy detected"
VERDICT_PUBLIC = "no secrecy needed"
VERDICT_UNKNOWN = "inconclusive"


def derive_seeds(seed: int, n: int) -> list[int]:
    """``n`` independent 64-bit child seeds of ``seed``."""
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def verdict(values: Sequence[float], secret_eps: float = SECRET_EPS,
            public_tol: float = NO_SECRECY_TOL) -> str:
    """Classify a set of best-found intrinsic-information values."""
    values = list(values)
    if values and all(v > secret_eps for v in values):
        return VERDICT_SECRET
    if values and all(v <= public_tol for v in values):
        return VERDICT_PUBLIC
    return VERDICT_UNKNOWN


@dataclass(frozen=True)
class SeparableDecomposition:
    """Convex combination of product pure states ``sum_z p_z |a_z b_z><a_z b_z|``."""

    probs: tuple[float, ...]
    alice: tuple[np.ndarray, ...]
    bob: tuple[np.ndarray, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        alice = tuple(np.asarray(a, dtype=np.complex128).ravel() for a in self.alice)
        bob = tuple(np.asarray(b, dtype=np.complex128).ravel() for b in self.bob)
        if not probs or len(alice) != len(probs) or len(bob) != len(probs):
            raise InvariantError("decomposition needs matching, nonempty term lists")
        if min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-12:
            raise InvariantError("term probabilities must be nonnegative and sum to 1")
        for v in alice + bob:
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise InvariantError("decomposition vectors must be unit norm")
        if len({a.size for a in alice}) != 1 or len({b.size for b in bob}) != 1:
            raise InvariantError("decomposition vectors have inconsistent dimensions")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.alice[0].size, self.bob[0].size)

    @property
    def n_terms(self) -> int:
        return len(self.probs)

    def __eq__(self, other):
        if not isinstance(other, SeparableDecomposition):
            return NotImplemented
        return (
            self.probs == other.probs
            and all(np.array_equal(a, b) for a, b in zip(self.alice, other.alice))
            and all(np.array_equal(a, b) for a, b in zip(self.bob, other.bob))
        )

    @classmethod
    def random(cls, dims: Sequence[int], n_terms: int, seed: int) -> "SeparableDecomposition":
        rng = np.random.default_rng(seed)
        da, db = dims
        probs = rng.dirichlet(np.ones(n_terms))
        probs = probs / probs.sum()

        def unit(d):
            v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            return v / np.linalg.norm(v)

        return cls(tuple(probs), tuple(unit(da) for _ in range(n_terms)),
                   tuple(unit(db) for _ in range(n_terms)))


@dataclass
class ScenarioReport:
    state: dict
    ppt_min_eigenvalue: float | None
    witness_operator_value: float | None
    witness_data_value: float | None
    eve_results: list[dict]
    verdict: str
    parameters: dict
    checks: dict = field(default_factory=dict)
    tolerances: dict = field(
        default_factory=lambda: {"secret_eps": SECRET_EPS, "no_secrecy_tol": NO_SECRECY_TOL}
    )

    @property
    def intrinsic_values(self) -> list[float]:
        return [r["intrinsic"]["value"] for r in self.eve_results]

    @property
    def min_intrinsic(self) -> float:
        return min(self.intrinsic_values)

    @property
    def max_intrinsic(self) -> float:
        return max(self.intrinsic_values)

    def to_dict(self) -> dict:
        return {
            "type": "scenario_report",
            "state": self.state,
            "ppt_min_eigenvalue": self.ppt_min_eigenvalue,
            "witness_operator_value": self.witness_operator_value,
            "witness_data_value": self.witness_data_value,
            "eve_results": self.eve_results,
            "min_intrinsic": self.min_intrinsic,
            "max_intrinsic": self.max_intrinsic,
            "verdict": self.verdict,
            "checks": self.checks,
            "provenance": {
                "version": __version__,
                "parameters": self.parameters,
                "backend": BACKEND,
                "tolerances": self.tolerances,
            },
        }


def werner_state(p: float) -> DensityMatrix:
    """``p |psi-><psi-| + (1 - p) I / 4``."""
    if not 0.0 <= p <= 1.0:
        raise InvariantError(f"Werner parameter must lie in [0, 1], got {p!r}")
    return DensityMatrix((2, 2), p * np.outer(SINGLET, SINGLET.conj()) + (1 - p) * np.eye(4) / 4)


def singlet_state() -> DensityMatrix:
    return werner_state(1.0)


def tiles_upb() -> list[np.ndarray]:
    """The five product vectors of the 3x3 Tiles unextendible product basis."""
    e = np.eye(3, dtype=np.complex128)
    s2 = np.sqrt(2.0)
    pairs = [
        (e[0], (e[0] - e[1]) / s2),
        ((e[0] - e[1]) / s2, e[2]),
        (e[2], (e[1] - e[2]) / s2),
        ((e[1] - e[2]) / s2, e[0]),
        (np.ones(3) / np.sqrt(3), np.ones(3) / np.sqrt(3)),
    ]
    return [np.kron(a, b) for a, b in pairs]


def tiles_state() -> tuple[DensityMatrix, np.ndarray]:
    """Bound entangled state ``(I - P_UPB) / 4`` and the UPB projector."""
    proj = sum(np.outer(v, v.conj()) for v in tiles_upb())
    return DensityMatrix((3, 3), (np.eye(9) - proj) / 4), proj


def classically_correlated_state(decomp: SeparableDecomposition) -> DensityMatrix:
    m = sum(
        p * np.outer(np.kron(a, b), np.kron(a, b).conj())
        for p, a, b in zip(decomp.probs, decomp.alice, decomp.bob)
    )
    return DensityMatrix(decomp.dims, m)


def separable_attack(decomp: SeparableDecomposition) -> tuple[PureTripartiteState, Povm]:
    """Purification ``sum_z sqrt(p_z) |a_z b_z>|z>`` and Eve's flag-basis measurement."""
    da, db = decomp.dims
    n = decomp.n_terms
    amp = np.zeros((da * db, n), dtype=np.complex128)
    for z, (p, a, b) in enumerate(zip(decomp.probs, decomp.alice, decomp.bob)):
        amp[:, z] = np.sqrt(p) * np.kron(a, b)
    amp /= np.linalg.norm(amp)
    return PureTripartiteState(da, db, n, amp.ravel()), Povm.computational(n)


def lopc_exact(decomp: SeparableDecomposition, mx: Povm, my: Povm) -> np.ndarray:
    """``P(z) P(x|z) P(y|z)`` for the public-communication protocol."""
    px, py = _local_conditionals(decomp, mx, my)
    return np.einsum("z,zx,zy->xyz", np.array(decomp.probs), px, py)


def _local_conditionals(decomp, mx, my):
    px = np.array([[np.vdot(a, e @ a).real for e in mx.effects] for a in decomp.alice])
    py = np.array([[np.vdot(b, e @ b).real for e in my.effects] for b in decomp.bob])
    px = np.clip(px, 0.0, None)
    py = np.clip(py, 0.0, None)
    return px / px.sum(axis=1, keepdims=True), py / py.sum(axis=1, keepdims=True)


def lopc_samples(decomp: SeparableDecomposition, mx: Povm, my: Povm, n_samples: int,
                 seed: int) -> np.ndarray:
    """Draw ``(x, y, z)`` triples: ``z`` is broadcast, ``x`` and ``y`` are generated locally."""
    if n_samples < 1:
        raise InvariantError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    px, py = _local_conditionals(decomp, mx, my)
    probs = np.array(decomp.probs)
    z = rng.choice(len(probs), size=n_samples, p=probs / probs.sum())
    ux = rng.random(n_samples)
    uy = rng.random(n_samples)
    x = np.minimum((ux[:, None] >= np.cumsum(px, axis=1)[z]).sum(axis=1), px.shape[1] - 1)
    y = np.minimum((uy[:, None] >= np.cumsum(py, axis=1)[z]).sum(axis=1), py.shape[1] - 1)
    return np.stack([x, y, z], axis=1)


def sample_lopc_protocol(decomp: SeparableDecomposition, mx: Povm, my: Povm, n_samples: int,
                         seed: int) -> JointDistribution:
    """Empirical distribution of :func:`lopc_samples`."""
    s = lopc_samples(decomp, mx, my, n_samples, seed)
    counts = np.zeros((len(mx), len(my), decomp.n_terms))
    np.add.at(counts, (s[:, 0], s[:, 1], s[:, 2]), 1.0)
    return JointDistribution(counts / n_samples)


def total_variation(p, q) -> float:
    p = p.probs if isinstance(p, JointDistribution) else np.asarray(p)
    q = q.probs if isinstance(q, JointDistribution) else np.asarray(q)
    return 0.5 * float(np.abs(p - q).sum())


def build_surrogate(psi: PureTripartiteState, mz: Povm, ch: ClassicalChannel) -> DensityMatrix:
    """Separable state ``sum_zbar P(zbar) rho_A|zbar (x) rho_B|zbar`` after Eve's processing."""
    conds = conditional_states(psi, coarse_grain_povm(mz, ch))
    da, db = psi.d_a, psi.d_b
    m = np.zeros((da * db, da * db), dtype=np.complex128)
    for pz, rho in conds:
        if rho is None:
            continue
        m += pz * np.kron(partial_trace(rho, [0]).matrix, partial_trace(rho, [1]).matrix)
    return DensityMatrix((da, db), m / np.trace(m).real)


def eve_measurements(d_e: int, count: int, seed: int) -> list[tuple[str, int | None, Povm]]:
    """Canonical environment-eigenbasis measurement plus seeded random rank-one POVMs."""
    out: list[tuple[str, int | None, Povm]] = [("eigenbasis", None, Povm.computational(d_e))]
    for s in derive_seeds(seed, max(count - 1, 0)):
        out.append(("random_rank1", s, random_rank1_povm(d_e, d_e, s)))
    return out[: max(count, 1)]


def entanglement_witness_for(rho: DensityMatrix, upb_projector=None, epsilon: float | None = None,
                             seesaw_restarts: int = 256, seed: int = 0) -> tuple[Witness, dict]:
    """NPT witness when the partial transpose is negative, else the UPB witness."""
    lam = min_eig(partial_transpose(rho, 1))[0]
    if lam < -1e-10:
        return npt_witness(rho), {"kind": "npt"}
    if upb_projector is None:
        raise InvariantError("state is PPT and no UPB projector was supplied")
    if epsilon is None:
        epsilon = min_product_overlap(upb_projector, rho.dims, seesaw_restarts, seed)[0]
    return upb_witness(upb_projector, epsilon, rho.dims), {"kind": "upb", "epsilon": float(epsilon)}


def verify_entangled_implies_secrecy(rho: DensityMatrix, eve_povms: int = 20, restarts: int = 16,
                                     seed: int = 0, upb_projector=None, epsilon: float | None = None,
                                     zbar_size: int | None = None, seesaw_restarts: int = 256,
                                     product_samples: int = 10_000, secret_eps: float = SECRET_EPS,
                                     public_tol: float = NO_SECRECY_TOL) -> ScenarioReport:
    """Witness-to-secrecy pipeline for an entangled state.

    Builds a witness, measures its local settings on the canonical
    purification and bounds the intrinsic information for every sampled
    Eve measurement.
    """
    s_wit, s_eve, s_int, s_prod = derive_seeds(seed, 4)
    ppt = min_eig(partial_transpose(rho, 1))[0]
    wit, wit_info = entanglement_witness_for(rho, upb_projector, epsilon, seesaw_restarts, s_wit)
    product_min = check_product_positivity(wit, product_samples, s_prod)
    mx, my = wit.alice_povm(), wit.bob_povm()
    op_value = wit.expectation(rho)
    data_value = expectation_from_data(wit, measure_bipartite(rho, mx, my))

    psi = purify(rho)
    results = []
    for (kind, pseed, mz), iseed in zip(eve_measurements(psi.d_e, eve_povms, s_eve),
                                        derive_seeds(s_int, max(eve_povms, 1))):
        dist = measure_tripartite(psi, mx, my, mz)
        res = intrinsic_information(dist, zbar_size, restarts, iseed)
        results.append({
            "kind": kind,
            "povm_seed": pseed,
            "intrinsic_seed": iseed,
            "alphabet_sizes": list(dist.alphabet_sizes),
            "conditional_mutual_information": conditional_mutual_information(dist),
            "mutual_information": mutual_information(dist.marginal_xy()),
            "intrinsic": res.to_dict(),
        })
    params = {
        "seed": seed,
        "eve_povms": eve_povms,
        "restarts": restarts,
        "zbar_size": zbar_size,
        "seesaw_restarts": seesaw_restarts,
        "product_samples": product_samples,
    }
    return ScenarioReport(
        state={"dims": list(rho.dims), "environment_dim": psi.d_e},
        ppt_min_eigenvalue=ppt,
        witness_operator_value=op_value,
        witness_data_value=data_value,
        eve_results=results,
        verdict=verdict([r["intrinsic"]["value"] for r in results], secret_eps, public_tol),
        parameters=params,
        tolerances={"secret_eps": secret_eps, "no_secrecy_tol": public_tol},
        checks={
            "witness": wit_info,
            "witness_reconstruction_residual": wit.reconstruction_residual(),
            "witness_min_sampled_product_value": product_min,
        },
    )


def verify_separable_implies_no_secrecy(decomp: SeparableDecomposition, measurement_pairs: int = 10,
                                        seed: int = 0, restarts: int = 2,
                                        n_samples: int = 100_000, secret_eps: float = SECRET_EPS,
                                        public_tol: float = NO_SECRECY_TOL) -> ScenarioReport:
    """Flag-state attack on a separable decomposition.

    For seeded random local POVM pairs, Eve's flag measurement leaves Alice's
    and Bob's outcomes conditionally independent, and the public-communication
    sampler reproduces the distribution.
    """
    psi, mz = separable_attack(decomp)
    da, db = decomp.dims
    results = []
    tv = None
    for k, s in enumerate(derive_seeds(seed, max(measurement_pairs, 1))):
        sa, sb, si, sl = derive_seeds(s, 4)
        rng = np.random.default_rng(s)
        mx = random_rank1_povm(da, da + int(rng.integers(0, 2)), sa)
        my = random_rank1_povm(db, db + int(rng.integers(0, 2)), sb)
        dist = measure_tripartite(psi, mx, my, mz)
        res = intrinsic_information(dist, None, restarts, si)
        if k == 0:
            tv = total_variation(sample_lopc_protocol(decomp, mx, my, n_samples, sl), dist)
        results.append({
            "kind": "flag_basis",
            "pair_seed": s,
            "alphabet_sizes": list(dist.alphabet_sizes),
            "conditional_mutual_information": conditional_mutual_information(dist),
            "mutual_information": mutual_information(dist.marginal_xy()),
            "factorization_residual": factorization_residual(dist),
            "intrinsic": res.to_dict(),
        })
    values = [max(r["intrinsic"]["value"], r["conditional_mutual_information"]) for r in results]
    rho = classically_correlated_state(decomp)
    return ScenarioReport(
        state={"dims": list(decomp.dims), "n_terms": decomp.n_terms},
        ppt_min_eigenvalue=min_eig(partial_transpose(rho, 1))[0],
        witness_operator_value=None,
        witness_data_value=None,
        eve_results=results,
        verdict=verdict(values, secret_eps, public_tol),
        tolerances={"secret_eps": secret_eps, "no_secrecy_tol": public_tol},
        parameters={"seed": seed, "measurement_pairs": measurement_pairs, "restarts": restarts,
                    "n_samples": n_samples},
        checks={"lopc_total_variation": tv},
    )


def factorization_residual(p) -> float:
    """``max |P(x,y|z) - P(x|z) P(y|z)|`` over outcomes with ``P(z) > 0``."""
    q = p.probs if isinstance(p, JointDistribution) else np.asarray(p)
    pz = q.sum(axis=(0, 1))
    keep = pz > 1e-14
    cond = q[:, :, keep] / pz[keep]
    prod = cond.sum(axis=1)[:, None, :] * cond.sum(axis=0)[None, :, :]
    return float(np.max(np.abs(cond - prod))) if cond.size else 0.0
