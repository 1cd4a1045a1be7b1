"""Entanglement witnesses evaluated from local measurement data.

A witness is expanded in a product basis of Hermitian operators. Each basis
element is measured through its spectral decomposition, so the witness value
becomes a linear function ``sum_xy c_xy P(x, y)`` of the folded measurement
statistics.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvariantError, NumericalError
from .infotheory import JointDistribution
from .measure import MeasurementSetting, Povm, settings_to_povm
from .qcore import HERMITIAN_TOL, DensityMatrix, hermiticity_residual, min_eig, partial_transpose

RECON_TOL = 1e-8
PRODUCT_TOL = 1e-7
SEESAW_TOL = 1e-10
SEESAW_MAX_ITER = 500
SEESAW_RESTARTS = 256


@dataclass(frozen=True, eq=False)
class Witness:
    operator: np.ndarray
    dims: tuple[int, int]
    alice_settings: tuple[MeasurementSetting, ...]
    bob_settings: tuple[MeasurementSetting, ...]
    coeffs: np.ndarray

    def alice_povm(self) -> Povm:
        return settings_to_povm(self.alice_settings)

    def bob_povm(self) -> Povm:
        return settings_to_povm(self.bob_settings)

    def reconstruct(self) -> np.ndarray:
        """``sum_xy c_xy M_x (x) M_y`` over the folded POVMs."""
        ma, mb = self.alice_povm().stack(), self.bob_povm().stack()
        da, db = self.dims
        t = np.einsum("xy,xac,ybd->abcd", self.coeffs, ma, mb)
        return t.reshape(da * db, da * db)

    def reconstruction_residual(self) -> float:
        return float(np.max(np.abs(self.reconstruct() - self.operator)))

    def expectation(self, rho: DensityMatrix) -> float:
        return rho.expectation(self.operator)

    def __eq__(self, other):
        if not isinstance(other, Witness):
            return NotImplemented
        return (
            self.dims == other.dims
            and np.array_equal(self.operator, other.operator)
            and np.array_equal(self.coeffs, other.coeffs)
            and len(self.alice_settings) == len(other.alice_settings)
            and len(self.bob_settings) == len(other.bob_settings)
            and all(
                np.array_equal(s.observable, t.observable)
                and np.array_equal(s.eigenvalues, t.eigenvalues)
                and all(np.array_equal(p, q) for p, q in zip(s.projectors, t.projectors))
                for s, t in zip(
                    self.alice_settings + self.bob_settings, other.alice_settings + other.bob_settings
                )
            )
        )


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Identity followed by the generalized Gell-Mann matrices.

    Order: symmetric and antisymmetric pairs for each ``j < k``, then the
    diagonal family. Orthogonal under the trace inner product.
    """
    basis = [np.eye(d, dtype=np.complex128)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=np.complex128)
            s[j, k] = s[k, j] = 1.0
            a = np.zeros((d, d), dtype=np.complex128)
            a[j, k], a[k, j] = -1j, 1j
            basis += [s, a]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag * np.sqrt(2.0 / (l * (l + 1)))).astype(np.complex128))
    return basis


def decompose_local(w, dims: Sequence[int]) -> Witness:
    """Expand ``w`` over local Hermitian bases and fold into measurement data weights."""
    w = np.asarray(w, dtype=np.complex128)
    if hermiticity_residual(w) > HERMITIAN_TOL:
        raise InvariantError("witness operator must be Hermitian")
    da, db = (int(d) for d in dims)
    if w.shape != (da * db, da * db):
        raise DimensionError(f"operator shape {w.shape} does not match dims {dims}")
    ba, bb = hermitian_basis(da), hermitian_basis(db)
    t = w.reshape(da, db, da, db)
    # w_ij = tr(W A_i (x) B_j) / (tr A_i^2 tr B_j^2)
    na = np.array([np.trace(a @ a).real for a in ba])
    nb = np.array([np.trace(b @ b).real for b in bb])
    wij = np.einsum("abcd,ica,jdb->ij", t, np.stack(ba), np.stack(bb)).real / np.outer(na, nb)

    sa = tuple(MeasurementSetting.from_observable(a) for a in ba)
    sb = tuple(MeasurementSetting.from_observable(b) for b in bb)
    alpha = np.concatenate([s.eigenvalues for s in sa])
    beta = np.concatenate([s.eigenvalues for s in sb])
    ia = np.concatenate([[i] * len(s.eigenvalues) for i, s in enumerate(sa)])
    ib = np.concatenate([[j] * len(s.eigenvalues) for j, s in enumerate(sb)])
    coeffs = len(sa) * len(sb) * wij[np.ix_(ia, ib)] * np.outer(alpha, beta)
    wit = Witness(w, (da, db), sa, sb, coeffs)
    if wit.reconstruction_residual() > RECON_TOL:
        raise NumericalError(f"local decomposition residual {wit.reconstruction_residual():.3e}")
    return wit


def npt_witness(rho: DensityMatrix) -> Witness:
    """Witness ``(|eta><eta|)^{T_B}`` from the most negative eigenvector of ``rho^{T_B}``."""
    lam, eta = min_eig(partial_transpose(rho, 1))
    if lam >= -1e-10:
        raise InvariantError(f"state has positive partial transpose (min eigenvalue {lam:.3e})")
    op = partial_transpose(np.outer(eta, eta.conj()), 1, rho.dims)
    return decompose_local(op, rho.dims)


def upb_witness(upb_projector, epsilon: float, dims: Sequence[int] | None = None) -> Witness:
    """Witness ``P_UPB - epsilon * I``.

    ``epsilon`` must not exceed the minimum product-state overlap of the
    projector; :func:`min_product_overlap` provides it.
    """
    if not epsilon > 0:
        raise InvariantError(f"epsilon must be positive, got {epsilon!r}")
    p = np.asarray(upb_projector, dtype=np.complex128)
    if dims is None:
        d = int(round(np.sqrt(p.shape[0])))
        dims = (d, d)
    return decompose_local(p - epsilon * np.eye(p.shape[0]), dims)


def _unit(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def seesaw(h: np.ndarray, dims: tuple[int, int], a0: np.ndarray, max_iter: int = SEESAW_MAX_ITER,
           tol: float = SEESAW_TOL) -> tuple[float, np.ndarray, np.ndarray, list[float]]:
    """Alternating minimization of ``<ab|h|ab>`` from the start vector ``a0``.

    Returns the final value, the product vectors and the value history.
    """
    da, db = dims
    t = h.reshape(da, db, da, db)
    a = a0
    hb = np.einsum("i,ijkl,k->jl", a.conj(), t, a)
    w, v = np.linalg.eigh(hb)
    b = v[:, 0]
    history = [float(w[0])]
    for _ in range(max_iter):
        ha = np.einsum("j,ijkl,l->ik", b.conj(), t, b)
        w, v = np.linalg.eigh(ha)
        a = v[:, 0]
        hb = np.einsum("i,ijkl,k->jl", a.conj(), t, a)
        w, v = np.linalg.eigh(hb)
        b = v[:, 0]
        history.append(float(w[0]))
        if history[-2] - history[-1] < tol:
            break
    return history[-1], a, b, history


def min_product_overlap(h, dims: Sequence[int], restarts: int = SEESAW_RESTARTS,
                        seed: int = 0) -> tuple[float, np.ndarray, np.ndarray]:
    """Best-found ``min <ab|h|ab>`` over product vectors via multistart seesaw.

    The start set is fixed by ``seed``, so the result does not depend on the
    order in which starts are evaluated.
    """
    h = np.asarray(h, dtype=np.complex128)
    if hermiticity_residual(h) > HERMITIAN_TOL:
        raise InvariantError("operator must be Hermitian")
    da, db = (int(d) for d in dims)
    rng = np.random.default_rng(seed)
    starts = [_unit(rng, da) for _ in range(max(restarts, 1))]
    best = (np.inf, None, None)
    for a0 in starts:
        val, a, b, _ = seesaw(h, (da, db), a0)
        if val < best[0]:
            best = (val, a, b)
    return best


def random_product_states(dims: Sequence[int], n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    da, db = dims
    a = rng.standard_normal((n, da)) + 1j * rng.standard_normal((n, da))
    b = rng.standard_normal((n, db)) + 1j * rng.standard_normal((n, db))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return a, b


def product_expectations(op, dims: Sequence[int], a: np.ndarray, b: np.ndarray) -> np.ndarray:
    da, db = dims
    t = np.asarray(op).reshape(da, db, da, db)
    return np.einsum("ni,nj,ijkl,nk,nl->n", a.conj(), b.conj(), t, a, b, optimize=True).real


def check_product_positivity(w: Witness, n_samples: int = 10_000, seed: int = 0,
                             tol: float = PRODUCT_TOL) -> float:
    """Minimum of ``<ab|W|ab>`` over seeded random product states.

    Raises :class:`NumericalError` when a sample falls below ``-tol``.
    """
    a, b = random_product_states(w.dims, n_samples, seed)
    worst = float(product_expectations(w.operator, w.dims, a, b).min())
    if worst < -tol:
        raise NumericalError(f"witness negative on a product state: {worst:.3e}")
    return worst


def expectation_from_data(w: Witness, p) -> float:
    """``sum_xy c_xy P(x, y)``: the witness value read off measurement data."""
    q = p.probs if isinstance(p, JointDistribution) else np.asarray(p, dtype=np.float64)
    if q.ndim == 3:
        q = q.sum(axis=2)
    if q.shape != w.coeffs.shape:
        raise DimensionError(f"data alphabet {q.shape} != witness alphabet {w.coeffs.shape}")
    return float(np.sum(w.coeffs * q))
