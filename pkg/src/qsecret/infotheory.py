"""Finite-alphabet information theory and the intrinsic-information search.

All logarithms are base 2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DimensionError, InvariantError

PROB_TOL = 1e-9
ROW_TOL = 1e-12
ZERO_PROB = 1e-14
SECRET_EPS = 1e-6
MAX_ENUM_ALPHABET = 8


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense probability array over two or three finite alphabets."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.ndim not in (2, 3):
            raise InvariantError(f"joint distribution must have 2 or 3 axes, got {p.ndim}")
        if not np.all(np.isfinite(p)) or p.size == 0:
            raise InvariantError("joint distribution has non-finite or no entries")
        if p.min() < 0:
            raise InvariantError(f"negative probability {p.min()!r}")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise InvariantError(f"probabilities sum to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return self.probs.shape

    def marginal_xy(self) -> "JointDistribution":
        if self.probs.ndim == 2:
            return self
        return JointDistribution(self.probs.sum(axis=2))

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    @classmethod
    def clamped(cls, raw, tol: float = 1e-12) -> "JointDistribution":
        """Build from a computed array, zeroing roundoff negatives above ``-tol``."""
        raw = np.asarray(raw, dtype=np.float64)
        if raw.min() < -tol:
            raise InvariantError(f"computed probability {raw.min()!r} below -{tol}")
        return cls(np.where(raw < 0, 0.0, raw))


@dataclass(frozen=True, eq=False)
class ClassicalChannel:
    """Row-stochastic matrix; ``matrix[z, zbar] = P(zbar | z)``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.size == 0:
            raise InvariantError(f"channel must be a nonempty matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or m.min() < 0:
            raise InvariantError("channel has negative or non-finite entries")
        if np.max(np.abs(m.sum(axis=1) - 1.0)) > ROW_TOL:
            raise InvariantError("channel rows do not sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_in(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_out(self) -> int:
        return self.matrix.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ClassicalChannel):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    @classmethod
    def identity(cls, n: int) -> "ClassicalChannel":
        return cls(np.eye(n))

    @classmethod
    def merge_all(cls, n: int) -> "ClassicalChannel":
        return cls(np.ones((n, 1)))

    @classmethod
    def deterministic(cls, labels, n_out: int | None = None) -> "ClassicalChannel":
        labels = np.asarray(labels, dtype=int)
        n_out = int(labels.max()) + 1 if n_out is None else n_out
        m = np.zeros((labels.size, n_out))
        m[np.arange(labels.size), labels] = 1.0
        return cls(m)

    @classmethod
    def random(cls, n_in: int, n_out: int, rng: np.random.Generator) -> "ClassicalChannel":
        return cls(normalize_rows(rng.dirichlet(np.ones(n_out), size=n_in)))


@dataclass
class IntrinsicResult:
    """Best-found upper bound on the intrinsic information, in bits."""

    value: float
    channel: ClassicalChannel
    n_evaluations: int
    converged: bool
    deterministic_value: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "deterministic_value": self.deterministic_value,
            "n_evaluations": self.n_evaluations,
            "converged": self.converged,
            "channel": self.channel.matrix.tolist(),
        }


def normalize_rows(m: np.ndarray) -> np.ndarray:
    m = np.maximum(m, 0.0)
    return m / m.sum(axis=1, keepdims=True)


def _probs(p) -> np.ndarray:
    return p.probs if isinstance(p, JointDistribution) else np.asarray(p, dtype=np.float64)


def mutual_information(p) -> float:
    """I(X;Y) in bits of a bipartite distribution."""
    q = _probs(p)
    if q.ndim != 2:
        raise DimensionError("mutual_information expects a bipartite distribution")
    return _backend.kernels.cmi_bits(q[:, :, None])


def conditional_mutual_information(p) -> float:
    """I(X;Y|Z) in bits; symbols of Z with negligible mass contribute nothing."""
    q = _probs(p)
    if q.ndim != 3:
        raise DimensionError("conditional_mutual_information expects a tripartite distribution")
    return _backend.kernels.cmi_bits(q)


def apply_channel(p, ch: ClassicalChannel) -> JointDistribution:
    """Process Eve's symbol: ``P(x, y, zbar) = sum_z P(x, y, z) P(zbar | z)``."""
    q = _probs(p)
    if q.ndim != 3 or q.shape[2] != ch.n_in:
        raise DimensionError(f"channel input size {ch.n_in} does not match distribution {q.shape}")
    return JointDistribution.clamped(np.tensordot(q, ch.matrix, axes=([2], [0])))


def set_partitions(n: int, max_blocks: int):
    """Restricted growth strings of length ``n`` with at most ``max_blocks`` blocks.

    Each string labels a deterministic map onto ``range(max_blocks)`` up to
    relabeling of the outputs.
    """
    if n == 0:
        yield ()
        return
    labels = [0] * n

    def rec(i, used):
        if i == n:
            yield tuple(labels)
            return
        for b in range(min(used + 1, max_blocks)):
            labels[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(1, 1)


def deterministic_channels(n_in: int, n_out: int) -> np.ndarray:
    """All deterministic channels ``n_in -> n_out`` up to output relabeling."""
    parts = np.array(list(set_partitions(n_in, n_out)), dtype=int).reshape(-1, n_in)
    chs = np.zeros((len(parts), n_in, n_out))
    rows = np.arange(n_in)
    for k, lab in enumerate(parts):
        chs[k, rows, lab] = 1.0
    return chs


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def refine_channel(p: np.ndarray, ch: np.ndarray, max_sweeps: int = 200, tol: float = 1e-9,
                   kernels=None) -> tuple[np.ndarray, float, int, bool]:
    """Projected coordinate descent over the rows of a channel matrix.

    Each row takes a projected gradient step with its own step size; steps
    that fail to decrease the objective are halved. Returns
    ``(channel, value, n_evaluations, converged)``.
    """
    k = kernels or _backend.kernels
    ch = np.array(ch, dtype=np.float64)
    value = k.channel_cmi(p, ch)
    n_eval = 1
    steps = np.full(ch.shape[0], 1.0)
    for _ in range(max_sweeps):
        start = value
        for z in range(ch.shape[0]):
            _, grad = k.channel_cmi_grad(p, ch)
            g = grad[z] - grad[z].mean()
            if not np.any(g):
                continue
            step = steps[z]
            while step > 1e-14:
                trial = ch.copy()
                trial[z] = project_simplex(ch[z] - step * g)
                tv = k.channel_cmi(p, trial)
                n_eval += 1
                if tv < value:
                    ch, value = trial, tv
                    steps[z] = min(step * 2.0, 1e3)
                    break
                step /= 2.0
            else:
                steps[z] = 1e-3
        if start - value < tol:
            return ch, value, n_eval, True
    return ch, value, n_eval, False


def intrinsic_information(p, zbar_size: int | None = None, restarts: int = 16,
                          seed: int = 0) -> IntrinsicResult:
    """Minimize I(X;Y|Zbar) over channels ``Z -> Zbar``.

    The candidate set is every deterministic channel (up to relabeling, for
    ``n_Z <= 8``) followed by ``restarts`` seeded random stochastic channels
    refined by :func:`refine_channel`. The result is an upper bound on the
    true minimum.
    """
    q = _probs(p)
    if q.ndim != 3:
        raise DimensionError("intrinsic_information expects a tripartite distribution")
    nz = q.shape[2]
    zbar_size = nz if zbar_size is None else int(zbar_size)
    if zbar_size < 1:
        raise InvariantError("zbar_size must be at least 1")
    if restarts < 0:
        raise InvariantError("restarts must be nonnegative")
    k = _backend.kernels

    best_ch = np.ones((nz, zbar_size)) / zbar_size
    best = k.channel_cmi(q, best_ch)
    n_eval = 1
    det_value = float("nan")
    if nz <= MAX_ENUM_ALPHABET:
        chs = deterministic_channels(nz, zbar_size)
        vals = k.channel_cmi_batch(q, chs)
        n_eval += len(vals)
        i = int(np.argmin(vals))
        det_value = float(vals[i])
        if vals[i] <= best:
            best, best_ch = float(vals[i]), chs[i]
    else:
        warnings.warn(
            f"Z alphabet of size {nz} exceeds {MAX_ENUM_ALPHABET}; "
            "skipping deterministic enumeration",
            stacklevel=2,
        )

    converged = True
    rng = np.random.default_rng(seed)
    starts = [rng.dirichlet(np.ones(zbar_size), size=nz) for _ in range(restarts)]
    for ch0 in starts:
        ch, val, ne, conv = refine_channel(q, ch0, kernels=k)
        n_eval += ne
        converged = converged and conv
        if val < best:
            best, best_ch = val, ch
    best_ch = normalize_rows(best_ch)
    value = k.channel_cmi(q, best_ch)
    return IntrinsicResult(
        value=float(value),
        channel=ClassicalChannel(best_ch),
        n_evaluations=n_eval + 1,
        converged=converged,
        deterministic_value=det_value,
    )


def is_secret_bit(p, tol: float = 1e-9) -> bool:
    """Uniform binary X = Y, jointly independent of Z."""
    q = _probs(p)
    if q.ndim == 2:
        q = q[:, :, None]
    if q.shape[:2] != (2, 2):
        return False
    pxy = q.sum(axis=2)
    pz = q.sum(axis=(0, 1))
    if np.max(np.abs(pxy.sum(axis=1) - 0.5)) > tol or np.max(np.abs(pxy.sum(axis=0) - 0.5)) > tol:
        return False
    if pxy[0, 1] + pxy[1, 0] > tol:
        return False
    return float(np.max(np.abs(q - pxy[:, :, None] * pz[None, None, :]))) <= tol
