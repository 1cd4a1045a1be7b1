"""Independent reference computations used only by the tests.

Nothing here imports the code paths under test.
"""
import itertools

import numpy as np
from scipy.optimize import minimize
from scipy.special import softmax


def entropy(p):
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def cmi(q):
    q = np.asarray(q, dtype=float)
    return (entropy(q.sum(axis=1)) + entropy(q.sum(axis=0))
            - entropy(q) - entropy(q.sum(axis=(0, 1))))


def mi(p):
    p = np.asarray(p, dtype=float)
    return entropy(p.sum(axis=1)) + entropy(p.sum(axis=0)) - entropy(p)


def cmi_after(p, ch):
    q = np.zeros(p.shape[:2] + (ch.shape[1],))
    for z in range(p.shape[2]):
        for w in range(ch.shape[1]):
            q[:, :, w] += p[:, :, z] * ch[z, w]
    return cmi(q)


def all_deterministic_min(p, n_out):
    """Minimum CMI over every map Z -> range(n_out) (no relabeling reduction)."""
    nz = p.shape[2]
    best = np.inf
    for labels in itertools.product(range(n_out), repeat=nz):
        ch = np.zeros((nz, n_out))
        ch[np.arange(nz), labels] = 1.0
        best = min(best, cmi_after(p, ch))
    return best


def partial_transpose_loops(m, da, db):
    out = np.zeros_like(m)
    for a in range(da):
        for b in range(db):
            for c in range(da):
                for d in range(db):
                    out[a * db + b, c * db + d] = m[a * db + d, c * db + b]
    return out


def partial_trace_loops(m, dims, keep):
    """Brute-force reduction by summing over traced indices."""
    n = len(dims)
    kept = [i for i in range(n) if i in keep]
    dk = int(np.prod([dims[i] for i in kept]))
    out = np.zeros((dk, dk), dtype=complex)
    for r in itertools.product(*[range(d) for d in dims]):
        for c in itertools.product(*[range(d) for d in dims]):
            if any(r[i] != c[i] for i in range(n) if i not in keep):
                continue
            ri = np.ravel_multi_index([r[i] for i in kept], [dims[i] for i in kept])
            ci = np.ravel_multi_index([c[i] for i in kept], [dims[i] for i in kept])
            out[ri, ci] += m[np.ravel_multi_index(r, dims), np.ravel_multi_index(c, dims)]
    return out


def tripartite_trace(psi_vec, mx, my, mz):
    """P(x,y,z) by forming the full Kronecker product per outcome triple."""
    proj = np.outer(psi_vec, psi_vec.conj())
    out = np.zeros((len(mx), len(my), len(mz)))
    for x, a in enumerate(mx):
        for y, b in enumerate(my):
            for z, c in enumerate(mz):
                out[x, y, z] = np.trace(np.kron(np.kron(a, b), c) @ proj).real
    return out


def bloch(theta, phi):
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def qubit_product_min_grid(h, n=41):
    """min <ab|h|ab> over a Bloch-angle grid for both qubits."""
    thetas = np.linspace(0, np.pi, n)
    phis = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
    vecs = np.array([bloch(t, f) for t in thetas for f in phis])
    t = np.asarray(h).reshape(2, 2, 2, 2)
    best = np.inf
    for a in vecs:
        hb = np.einsum("i,ijkl,k->jl", a.conj(), t, a)
        vals = np.einsum("nj,jl,nl->n", vecs.conj(), hb, vecs).real
        best = min(best, float(vals.min()))
    return best


def grid_channel_oracle(p, n_out, n_samples, seed, polish=8):
    """Random stochastic-channel grid; optionally polish the best points locally.

    Returns ``(raw_grid_min, polished_min)``. The polish works on softmax
    logits with Nelder-Mead followed by BFGS.
    """
    nz = p.shape[2]
    rng = np.random.default_rng(seed)
    chs = rng.dirichlet(np.ones(n_out), size=(n_samples, nz))
    q = np.einsum("xyz,kzw->kxyw", p, chs)

    def h(a, axes):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(a > 0, -a * np.log2(np.where(a > 0, a, 1)), 0.0)
        return t.sum(axis=axes)

    vals = h(q.sum(axis=2), (1, 2)) + h(q.sum(axis=1), (1, 2)) - h(q, (1, 2, 3)) - h(q.sum(axis=(1, 2)), 1)
    raw = float(vals.min())
    best = raw

    def f(t):
        return cmi_after(p, softmax(t.reshape(nz, n_out), axis=1))

    for i in np.argsort(vals)[:polish]:
        t0 = np.log(np.maximum(chs[i], 1e-12)).ravel()
        r = minimize(f, t0, method="Nelder-Mead",
                     options=dict(xatol=1e-10, fatol=1e-14, maxiter=40000, maxfev=40000))
        r = minimize(f, r.x, method="BFGS", options=dict(gtol=1e-12))
        best = min(best, float(r.fun))
    return raw, best
