"""Hot numeric kernels, JIT-compiled with numba when available.

Every kernel exists twice: a loop version (``*_loops``) that numba compiles,
and a vectorized numpy version (``*_numpy``).  The module-level names dispatch
to the JIT path unless the environment variable ``HOLORETRACT_NO_NUMBA`` is
set (or numba is missing), in which case the numpy path is used.  The
benchmark in ``benchmarks/bench_kernels.py`` times both paths side by side.
"""

import os

import numpy as np

try:
    if os.environ.get("HOLORETRACT_NO_NUMBA"):
        raise ImportError("numba disabled by HOLORETRACT_NO_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover - exercised via env flag
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


# ---------------------------------------------------------------------------
# sparse polynomial batch evaluation (complex)
# ---------------------------------------------------------------------------

def _poly_eval_batch_loops(coefs, exps, pts):
    out = np.zeros(pts.shape[0], dtype=np.complex128)
    for m in range(pts.shape[0]):
        acc = 0.0 + 0.0j
        for t in range(coefs.shape[0]):
            term = coefs[t]
            for k in range(exps.shape[1]):
                e = exps[t, k]
                zk = pts[m, k]
                for _ in range(e):
                    term = term * zk
            acc = acc + term
        out[m] = acc
    return out


def _poly_eval_batch_numpy(coefs, exps, pts):
    # pts: (M, nvars), exps: (T, nvars) -> (M, T) monomial matrix
    mono = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
    return mono @ coefs


# ---------------------------------------------------------------------------
# gauge of the quadratic polyhedron {|z^2-w^2| < 1, |zw| < 2}
# ---------------------------------------------------------------------------

def _dh_gauge_loops(z, w):
    out = np.empty(z.shape[0], dtype=np.float64)
    for m in range(z.shape[0]):
        a = abs(z[m] * z[m] - w[m] * w[m])
        b = abs(z[m] * w[m]) / 2.0
        h1 = np.sqrt(a)
        h2 = np.sqrt(b)
        out[m] = h1 if h1 > h2 else h2
    return out


def _dh_gauge_numpy(z, w):
    return np.maximum(np.sqrt(np.abs(z * z - w * w)),
                      np.sqrt(np.abs(z * w) / 2.0))


# ---------------------------------------------------------------------------
# gauge of the decoupled egg {sum |z_i|^{q_i} < 1} with mixed exponents
# ---------------------------------------------------------------------------

def _egg_gauge_loops(absz, q, tol):
    # per-point bisection on t: sum (|z_i|/t)^{q_i} = 1; valid by balancedness
    out = np.empty(absz.shape[0], dtype=np.float64)
    for m in range(absz.shape[0]):
        s = 0.0
        for k in range(q.shape[0]):
            s += absz[m, k] ** q[k]
        if s == 0.0:
            out[m] = 0.0
            continue
        lo = 0.0
        hi = 1.0
        # grow hi until point/hi is inside
        for _ in range(200):
            s = 0.0
            for k in range(q.shape[0]):
                s += (absz[m, k] / hi) ** q[k]
            if s < 1.0:
                break
            lo = hi
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            s = 0.0
            for k in range(q.shape[0]):
                s += (absz[m, k] / mid) ** q[k]
            if s >= 1.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= tol * max(1.0, hi):
                break
        out[m] = 0.5 * (lo + hi)
    return out


def _egg_gauge_numpy(absz, q, tol):
    s = np.sum(absz ** q[None, :], axis=1)
    out = np.zeros(absz.shape[0])
    live = s > 0.0
    lo = np.zeros(absz.shape[0])
    hi = np.ones(absz.shape[0])
    for _ in range(200):
        inside = np.sum((absz[live] / hi[live, None]) ** q[None, :], axis=1) < 1.0
        if inside.all():
            break
        grow = np.where(live)[0][~inside]
        lo[grow] = hi[grow]
        hi[grow] *= 2.0
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        ge = np.sum((absz[live] / mid[live, None]) ** q[None, :], axis=1) >= 1.0
        idx = np.where(live)[0]
        lo[idx[ge]] = mid[idx[ge]]
        hi[idx[~ge]] = mid[idx[~ge]]
        if np.max(hi[live] - lo[live]) <= tol:
            break
    out[live] = 0.5 * (lo[live] + hi[live])
    return out


# ---------------------------------------------------------------------------
# modular evaluation grid for exact idempotency certificates
# ---------------------------------------------------------------------------

def _eval_mod_py(exps, c, x, y, p, xpow, ypow):
    # xpow/ypow are scratch tables of length >= max exponent + 1
    dx = 0
    dy = 0
    for t in range(exps.shape[0]):
        if exps[t, 0] > dx:
            dx = exps[t, 0]
        if exps[t, 1] > dy:
            dy = exps[t, 1]
    xpow[0] = 1
    for a in range(1, dx + 1):
        xpow[a] = (xpow[a - 1] * x) % p
    ypow[0] = 1
    for b in range(1, dy + 1):
        ypow[b] = (ypow[b - 1] * y) % p
    acc = 0
    for t in range(exps.shape[0]):
        acc = (acc + c[t] * xpow[exps[t, 0]] % p * ypow[exps[t, 1]]) % p
    return acc


def _idem_residue_numpy(exps1, c1, exps2, c2, xs, ys, p):
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    X = X.ravel()
    Y = Y.ravel()

    def ev(exps, c, x, y):
        dx = int(exps[:, 0].max(initial=0))
        dy = int(exps[:, 1].max(initial=0))
        xp = np.ones((dx + 1, x.shape[0]), dtype=np.int64)
        for a in range(1, dx + 1):
            xp[a] = (xp[a - 1] * x) % p
        yp = np.ones((dy + 1, x.shape[0]), dtype=np.int64)
        for b in range(1, dy + 1):
            yp[b] = (yp[b - 1] * y) % p
        acc = np.zeros(x.shape[0], dtype=np.int64)
        for t in range(exps.shape[0]):
            acc = (acc + c[t] * xp[exps[t, 0]] % p * yp[exps[t, 1]]) % p
        return acc

    u = ev(exps1, c1, X, Y)
    v = ev(exps2, c2, X, Y)
    r1 = (ev(exps1, c1, u, v) - u) % p
    r2 = (ev(exps2, c2, u, v) - v) % p
    return 1 if (np.any(r1 != 0) or np.any(r2 != 0)) else 0


if NUMBA_ENABLED:
    _eval_mod = njit(cache=True)(_eval_mod_py)

    @njit(cache=True)
    def _idem_residue_jit(exps1, c1, exps2, c2, xs, ys, p):
        maxdeg = 1
        for t in range(exps1.shape[0]):
            maxdeg = max(maxdeg, exps1[t, 0], exps1[t, 1])
        for t in range(exps2.shape[0]):
            maxdeg = max(maxdeg, exps2[t, 0], exps2[t, 1])
        xpow = np.empty(maxdeg + 1, dtype=np.int64)
        ypow = np.empty(maxdeg + 1, dtype=np.int64)
        for ix in range(xs.shape[0]):
            for iy in range(ys.shape[0]):
                x = xs[ix]
                y = ys[iy]
                u = _eval_mod(exps1, c1, x, y, p, xpow, ypow)
                v = _eval_mod(exps2, c2, x, y, p, xpow, ypow)
                r1 = (_eval_mod(exps1, c1, u, v, p, xpow, ypow) - u) % p
                r2 = (_eval_mod(exps2, c2, u, v, p, xpow, ypow) - v) % p
                if r1 != 0 or r2 != 0:
                    return 1
        return 0

    poly_eval_batch = njit(cache=True)(_poly_eval_batch_loops)
    dh_gauge_batch = njit(cache=True)(_dh_gauge_loops)
    egg_gauge_batch = njit(cache=True)(_egg_gauge_loops)
    idem_residue_mod = _idem_residue_jit
else:
    _eval_mod = _eval_mod_py
    poly_eval_batch = _poly_eval_batch_numpy
    dh_gauge_batch = _dh_gauge_numpy
    egg_gauge_batch = _egg_gauge_numpy
    idem_residue_mod = _idem_residue_numpy

# explicit handles for the benchmark
NUMPY_IMPLS = {
    "poly_eval_batch": _poly_eval_batch_numpy,
    "dh_gauge_batch": _dh_gauge_numpy,
    "egg_gauge_batch": _egg_gauge_numpy,
    "idem_residue_mod": _idem_residue_numpy,
}
