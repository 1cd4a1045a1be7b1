"""POVMs, local measurement settings and the quantum-to-classical maps."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvariantError
from .infotheory import ClassicalChannel, JointDistribution, ZERO_PROB
from .qcore import (
    HERMITIAN_TOL,
    PSD_TOL,
    DensityMatrix,
    PureTripartiteState,
    hermiticity_residual,
)

COMPLETENESS_TOL = 1e-9
SPECTRAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Povm:
    """Finite list of PSD effects summing to the identity."""

    effects: tuple[np.ndarray, ...]
    labels: tuple = field(default=())

    def __post_init__(self):
        effects = tuple(np.array(e, dtype=np.complex128) for e in self.effects)
        if not effects:
            raise InvariantError("POVM needs at least one effect")
        dim = effects[0].shape[0]
        for e in effects:
            if e.shape != (dim, dim):
                raise DimensionError("POVM effects have inconsistent shapes")
            if hermiticity_residual(e) > HERMITIAN_TOL:
                raise InvariantError("POVM effect is not Hermitian")
            if np.linalg.eigvalsh(e)[0] < -PSD_TOL:
                raise InvariantError("POVM effect is not positive semidefinite")
            e.setflags(write=False)
        total = np.sum(effects, axis=0)
        if np.max(np.abs(total - np.eye(dim))) > COMPLETENESS_TOL:
            raise InvariantError("POVM effects do not sum to the identity")
        labels = tuple(self.labels) if self.labels else tuple(range(len(effects)))
        if len(labels) != len(effects):
            raise InvariantError("one label per effect required")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)

    def stack(self) -> np.ndarray:
        return np.stack(self.effects)

    def __eq__(self, other):
        if not isinstance(other, Povm):
            return NotImplemented
        return (
            len(self) == len(other)
            and self.labels == other.labels
            and all(np.array_equal(a, b) for a, b in zip(self.effects, other.effects))
        )

    @classmethod
    def computational(cls, dim: int) -> "Povm":
        return cls(tuple(np.diag(np.eye(dim)[k]).astype(complex) for k in range(dim)))

    @classmethod
    def from_basis(cls, basis) -> "Povm":
        """Projective measurement on the columns of a unitary."""
        u = np.asarray(basis, dtype=np.complex128)
        return cls(tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(u.shape[1])))


@dataclass(frozen=True, eq=False)
class MeasurementSetting:
    """A Hermitian observable together with its spectral decomposition."""

    observable: np.ndarray
    eigenvalues: np.ndarray
    projectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        obs = np.asarray(self.observable, dtype=np.complex128)
        eig = np.asarray(self.eigenvalues, dtype=np.float64)
        projs = tuple(np.asarray(p, dtype=np.complex128) for p in self.projectors)
        d = obs.shape[0]
        if len(projs) != eig.size:
            raise InvariantError("one eigenvalue per projector required")
        for i, p in enumerate(projs):
            if np.max(np.abs(p @ p - p)) > SPECTRAL_TOL:
                raise InvariantError("setting projector is not idempotent")
            for q in projs[i + 1 :]:
                if np.max(np.abs(p @ q)) > SPECTRAL_TOL:
                    raise InvariantError("setting projectors are not orthogonal")
        if np.max(np.abs(np.sum(projs, axis=0) - np.eye(d))) > SPECTRAL_TOL:
            raise InvariantError("setting projectors are not complete")
        recon = sum(l * p for l, p in zip(eig, projs))
        if np.max(np.abs(recon - obs)) > SPECTRAL_TOL:
            raise InvariantError("observable differs from its spectral sum")
        object.__setattr__(self, "observable", obs)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "projectors", projs)

    @property
    def dim(self) -> int:
        return self.observable.shape[0]

    @classmethod
    def from_observable(cls, obs, tol: float = 1e-9) -> "MeasurementSetting":
        """Spectral projectors of ``obs``, grouping eigenvalues closer than ``tol``."""
        obs = np.asarray(obs, dtype=np.complex128)
        if hermiticity_residual(obs) > HERMITIAN_TOL:
            raise InvariantError("observable is not Hermitian")
        w, v = np.linalg.eigh((obs + obs.conj().T) / 2)
        groups: list[list[int]] = []
        for k in range(len(w)):
            if groups and w[k] - w[groups[-1][0]] <= tol:
                groups[-1].append(k)
            else:
                groups.append([k])
        eig = np.array([w[g].mean() for g in groups])
        projs = tuple(v[:, g] @ v[:, g].conj().T for g in groups)
        return cls(obs, eig, projs)


def settings_to_povm(settings: Sequence[MeasurementSetting]) -> Povm:
    """Fold a uniformly random choice among settings into one POVM.

    Effects are ``P_{i,a} / S`` labeled ``(i, a)``.
    """
    settings = list(settings)
    if not settings:
        raise InvariantError("at least one setting required")
    dim = settings[0].dim
    if any(s.dim != dim for s in settings):
        raise DimensionError("settings act on different dimensions")
    n = len(settings)
    effects, labels = [], []
    for i, s in enumerate(settings):
        for a, proj in enumerate(s.projectors):
            effects.append(proj / n)
            labels.append((i, a))
    return Povm(tuple(effects), tuple(labels))


def _check_dims(psi_dims, povms):
    for d, m, name in zip(psi_dims, povms, "ABE"):
        if m.dim != d:
            raise DimensionError(f"POVM on {name} has dim {m.dim}, system has {d}")


def measure_tripartite(psi: PureTripartiteState, mx: Povm, my: Povm, mz: Povm) -> JointDistribution:
    """``P(x, y, z) = <psi| M_x (x) M_y (x) M_z |psi>``."""
    _check_dims(psi.dims, (mx, my, mz))
    t = psi.tensor()
    raw = np.einsum(
        "abe,xac,ybd,zef,cdf->xyz", t.conj(), mx.stack(), my.stack(), mz.stack(), t, optimize=True
    ).real
    return JointDistribution.clamped(raw)


def measure_bipartite(rho: DensityMatrix, mx: Povm, my: Povm) -> JointDistribution:
    """``P(x, y) = tr(M_x (x) M_y rho)``."""
    if len(rho.dims) != 2:
        raise DimensionError("measure_bipartite expects a bipartite state")
    _check_dims(rho.dims, (mx, my))
    da, db = rho.dims
    r = rho.matrix.reshape(da, db, da, db)
    raw = np.einsum("xca,ydb,abcd->xy", mx.stack(), my.stack(), r, optimize=True).real
    return JointDistribution.clamped(raw)


def conditional_states(psi: PureTripartiteState, mz: Povm) -> list[tuple[float, DensityMatrix | None]]:
    """Alice-Bob states conditioned on each outcome of Eve's measurement.

    Outcomes with probability below 1e-14 yield ``(0.0, None)``.
    """
    if mz.dim != psi.d_e:
        raise DimensionError(f"Eve POVM dim {mz.dim} != environment dim {psi.d_e}")
    m = psi.amplitudes.reshape(psi.d_a * psi.d_b, psi.d_e)
    out = []
    for eff in mz.effects:
        sigma = m @ eff.T @ m.conj().T
        sigma = (sigma + sigma.conj().T) / 2
        pz = float(np.trace(sigma).real)
        if pz < ZERO_PROB:
            out.append((0.0, None))
        else:
            out.append((pz, DensityMatrix((psi.d_a, psi.d_b), sigma / pz)))
    return out


def coarse_grain_povm(mz: Povm, channel: ClassicalChannel) -> Povm:
    """Effects ``sum_z P(zbar | z) M_z`` for each output symbol."""
    if channel.n_in != len(mz):
        raise DimensionError(f"channel input size {channel.n_in} != {len(mz)} effects")
    effects = np.einsum("zw,zij->wij", channel.matrix, mz.stack())
    return Povm(tuple(effects))


def random_rank1_povm(dim: int, n_outcomes: int, seed: int) -> Povm:
    """Rank-one POVM from the rows of a Haar-random ``n_outcomes x dim`` isometry."""
    if n_outcomes < dim:
        raise InvariantError(f"need n_outcomes >= dim, got {n_outcomes} < {dim}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_outcomes, dim)) + 1j * rng.standard_normal((n_outcomes, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))[None, :]
    # rows of q: sum_k q[k]^* q[k]^T = q^H q = I
    effects = tuple(np.outer(q[k].conj(), q[k]) for k in range(n_outcomes))
    return Povm(effects)
