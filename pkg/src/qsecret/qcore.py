"""Dense complex linear algebra on small composite Hilbert spaces."""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvariantError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12
RANK_TOL = 1e-12


def hermiticity_residual(h: np.ndarray) -> float:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return float("inf")
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def _as_matrix(m) -> np.ndarray:
    m = np.array(m, dtype=np.complex128)
    if m.ndim != 2:
        raise InvariantError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvariantError("matrix has non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace positive semidefinite operator on ``C^d1 (x) C^d2 (x) ...``."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        m = _as_matrix(self.matrix)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)
        if not dims or any(d < 1 for d in dims):
            raise InvariantError(f"invalid subsystem dimensions {dims}")
        n = prod(dims)
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        if hermiticity_residual(m) > HERMITIAN_TOL:
            raise InvariantError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantError(f"density matrix trace {tr!r} differs from 1")
        lam = np.linalg.eigvalsh(m)[0]
        if lam < -PSD_TOL:
            raise InvariantError(f"density matrix has negative eigenvalue {lam!r}")
        m.setflags(write=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, op) -> float:
        return float(np.trace(np.asarray(op) @ self.matrix).real)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.matrix, other.matrix)

    @classmethod
    def from_vector(cls, vec, dims: Sequence[int]) -> "DensityMatrix":
        v = np.asarray(vec, dtype=np.complex128).ravel()
        v = v / np.linalg.norm(v)
        return cls(tuple(dims), np.outer(v, v.conj()))


@dataclass(frozen=True, eq=False)
class PureTripartiteState:
    """Unit vector on ``C^d_a (x) C^d_b (x) C^d_e``, index order (a, b, e)."""

    d_a: int
    d_b: int
    d_e: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=np.complex128).ravel()
        if amp.size != self.d_a * self.d_b * self.d_e:
            raise DimensionError(
                f"{amp.size} amplitudes for dims ({self.d_a}, {self.d_b}, {self.d_e})"
            )
        if not np.all(np.isfinite(amp)):
            raise InvariantError("amplitudes have non-finite entries")
        if abs(np.vdot(amp, amp).real - 1.0) > NORM_TOL:
            raise InvariantError("tripartite state is not normalized")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.d_a, self.d_b, self.d_e)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to ``psi[a, b, e]``."""
        return self.amplitudes.reshape(self.d_a, self.d_b, self.d_e)

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def reduced_ab(self) -> DensityMatrix:
        m = self.amplitudes.reshape(self.d_a * self.d_b, self.d_e)
        return DensityMatrix((self.d_a, self.d_b), m @ m.conj().T)

    def __eq__(self, other):
        if not isinstance(other, PureTripartiteState):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.amplitudes, other.amplitudes)


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(np.asarray(a), np.asarray(b))


def _trace_out(m: np.ndarray, dims: tuple[int, ...], keep: list[int]) -> np.ndarray:
    n = len(dims)
    t = m.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    d = prod(dims[i] for i in keep)
    return np.einsum("".join(row) + "".join(col) + "->" + out, t).reshape(d, d)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduce ``rho`` to the subsystems listed in ``keep`` (original order kept)."""
    keep_set = sorted({int(k) for k in keep})
    if not keep_set or keep_set[0] < 0 or keep_set[-1] >= len(rho.dims):
        raise InvariantError(f"invalid subsystem index set {keep!r} for dims {rho.dims}")
    if len(keep_set) == len(rho.dims):
        return rho
    red = _trace_out(rho.matrix, rho.dims, keep_set)
    red = (red + red.conj().T) / 2
    return DensityMatrix(tuple(rho.dims[i] for i in keep_set), red)


def partial_transpose(rho, part: int = 1, dims: Sequence[int] | None = None) -> np.ndarray:
    """Transpose the ``part``-th factor of a bipartite operator.

    ``rho`` may be a :class:`DensityMatrix` or a plain matrix with ``dims``.
    """
    if isinstance(rho, DensityMatrix):
        m, dims = rho.matrix, rho.dims
    else:
        m = np.asarray(rho)
        if dims is None:
            raise InvariantError("dims required for a bare matrix")
    dims = tuple(dims)
    if len(dims) != 2:
        raise InvariantError(f"partial transpose needs a bipartite operator, got dims {dims}")
    if part not in (0, 1):
        raise InvariantError(f"invalid subsystem index {part}")
    da, db = dims
    t = m.reshape(da, db, da, db)
    t = t.transpose(2, 1, 0, 3) if part == 0 else t.transpose(0, 3, 2, 1)
    return t.reshape(da * db, da * db)


def min_eig(h) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of a Hermitian matrix and a unit eigenvector."""
    h = _as_matrix(h)
    if hermiticity_residual(h) > HERMITIAN_TOL:
        raise InvariantError("min_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    vec = v[:, 0]
    return float(w[0]), vec / np.linalg.norm(vec)


def fix_phase(v: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Rotate ``v`` so its first non-negligible component is real positive."""
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size == 0:
        return v
    c = v[idx[0]]
    return v * (abs(c) / c)


def canonical_eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs sorted by descending eigenvalue with phase-fixed vectors.

    Near-equal eigenvalues (within 1e-12) are ordered lexicographically on
    the phase-fixed eigenvector components.
    """
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    vecs = [fix_phase(v[:, k]) for k in range(len(w))]

    def key(k):
        comp = tuple(x for c in np.round(vecs[k], 12) for x in (-c.real, -c.imag))
        return (-round(w[k] / 1e-12) * 1e-12,) + comp

    order = sorted(range(len(w)), key=key)
    return w[order], np.stack([vecs[k] for k in order], axis=1)


def purify(rho: DensityMatrix) -> PureTripartiteState:
    """Canonical eigen-purification ``sum_k sqrt(l_k) |k>_AB |k>_E``.

    The environment dimension equals the number of eigenvalues above 1e-12.
    """
    if len(rho.dims) != 2:
        raise InvariantError(f"purify expects a bipartite state, got dims {rho.dims}")
    w, v = canonical_eigh(rho.matrix)
    keep = w > RANK_TOL
    lam, vecs = w[keep], v[:, keep]
    amp = vecs * np.sqrt(lam)[None, :]
    amp = amp / np.linalg.norm(amp)
    da, db = rho.dims
    return PureTripartiteState(da, db, int(keep.sum()), amp.ravel())


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v
