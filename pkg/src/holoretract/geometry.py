"""Boundary geometry probes: convexity at a point, face probes, real Hessians,
and the orthogonality relations behind norm-one projections.

Probes return three-valued verdicts (yes / no / inconclusive) backed by sample
evidence; they never claim a universally quantified statement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .domains import (DecoupledEgg, DomainError, IntersectionDomain, LpBall,
                      PolyPolyhedron, ProductDomain, dim, minkowski,
                      minkowski_batch)
from .exactpoly import MultiPoly
from .sampling import rng_from, sample_unit_sphere

DEFAULT_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class ConvexityCertificate:
    """Supporting functional evidence: |L| <= h sampled, |L(p)| = 1."""
    functional: tuple          # complex covector L, acting as sum L_i z_i
    sampled_margin: float      # min over samples of h(z) - |L(z)|
    nsamples: int


@dataclass(frozen=True)
class ConvexityVerdict:
    decision: str  # "convex" | "non-convex" | "inconclusive"
    certificate: Optional[ConvexityCertificate] = None
    witness: Optional[tuple] = None  # point with |L(z)| > h(z) for the gradient covector


@dataclass(frozen=True)
class FaceProbeResult:
    point: tuple
    directions_in_face: tuple
    radius: float
    field: str  # "C" | "R"


def _as_vec(z):
    return np.asarray(z, dtype=np.complex128).reshape(-1)


def _require_boundary(domain, p, tol):
    h = minkowski(domain, p).value
    if abs(h - 1.0) > tol:
        raise DomainError(f"point is not on the boundary within tol (gauge {h})")


def _gauge_gradient(domain, p):
    """Holomorphic gradient of a defining function at a smooth-stratum point.

    Only the complex line of the covector matters; it is normalized later.
    Returns None when no closed form applies (caller falls back to a search).
    """
    p = _as_vec(p)
    if isinstance(domain, LpBall):
        if np.isinf(domain.p):
            j = int(np.argmax(np.abs(p)))
            g = np.zeros_like(p)
            g[j] = np.conj(p[j]) / abs(p[j])
            return g
        a = np.abs(p)
        if np.any(a == 0) and domain.p < 2:
            g = np.zeros_like(p)
            nz = a > 0
            g[nz] = np.conj(p[nz]) * a[nz] ** (domain.p - 2)
            return g
        return np.conj(p) * np.where(a > 0, a, 1.0) ** (domain.p - 2)
    if isinstance(domain, DecoupledEgg):
        a = np.abs(p)
        if np.any(a == 0):
            return None  # non-smooth stratum
        q = np.array(domain.q)
        return (q / 2.0) * a ** (q - 2.0) * np.conj(p)
    if isinstance(domain, PolyPolyhedron):
        vals = [abs(f.eval_float(p)) ** (1.0 / f.degree) for f in domain.defs]
        j = int(np.argmax(vals))
        f = domain.defs[j]
        fp = f.eval_float(p)
        grad = np.array([g.eval_float(p) for g in (f.partial(k) for k in range(f.nvars))])
        # gradient of |f|^{2/d} is parallel to conj(f) * grad f
        return np.conj(fp) * grad
    if isinstance(domain, IntersectionDomain):
        vals = [minkowski(m, p).value for m in domain.members]
        return _gauge_gradient(domain.members[int(np.argmax(vals))], p)
    if isinstance(domain, ProductDomain):
        vals = []
        k = 0
        slices = []
        for f in domain.factors:
            d = dim(f)
            vals.append(minkowski(f, p[k:k + d]).value)
            slices.append((f, k, d))
            k += d
        f, k, d = slices[int(np.argmax(vals))]
        g = np.zeros_like(p)
        sub = _gauge_gradient(f, p[k:k + d])
        if sub is None:
            return None
        g[k:k + d] = sub
        return g
    return None


def convexity_at(domain, p, nsamples=4096, tol=1e-9, seed=0) -> ConvexityVerdict:
    """Decide convexity of the domain at a boundary point.

    Smooth strata use the gradient-normal covector L with L(p) = 1 and test
    |L| <= h on a seeded sphere sample; at non-smooth points a grid search
    over covectors looks for a supporting functional.
    """
    p = _as_vec(p)
    _require_boundary(domain, p, max(tol, 1e-7))
    rng = rng_from(seed)
    samples = sample_unit_sphere(rng, dim(domain), nsamples)
    h = minkowski_batch(domain, samples)

    def margin(L):
        vals = np.abs(samples @ L)
        return float(np.min(h - vals)), samples[int(np.argmax(vals - h))]

    g = _gauge_gradient(domain, p)
    if g is not None and np.any(g):
        L = g / (p @ g)
        m, worst = margin(L)
        if m >= -tol:
            cert = ConvexityCertificate(tuple(L.tolist()), m, nsamples)
            return ConvexityVerdict("convex", certificate=cert)
        # gradient covector fails: at a smooth point it is the only candidate
        return ConvexityVerdict("non-convex", witness=tuple(worst.tolist()))

    # non-smooth point: search convex combinations of candidate normals
    best = None
    candidates = _covector_candidates(domain, p, rng)
    for L in candidates:
        d = p @ L
        if abs(d) < 1e-12:
            continue
        L = L / d
        m, _ = margin(L)
        if best is None or m > best[0]:
            best = (m, L)
    if best is not None and best[0] >= -tol:
        cert = ConvexityCertificate(tuple(best[1].tolist()), best[0], nsamples)
        return ConvexityVerdict("convex", certificate=cert)
    return ConvexityVerdict("inconclusive")


def _covector_candidates(domain, p, rng, ngrid=512):
    out = []
    if isinstance(domain, LpBall) and domain.p == 1:
        # subdifferential of the l1 norm at p
        sgn = np.where(np.abs(p) > 0, np.conj(p) / np.where(np.abs(p) > 0, np.abs(p), 1.0), 0.0)
        out.append(sgn)
        for t in (0.5, 1.0):
            extra = sgn.copy()
            extra[np.abs(p) == 0] = t
            out.append(extra)
    if isinstance(domain, (IntersectionDomain, PolyPolyhedron)):
        # one-sided normals of the active members / faces, plus convex mixes
        normals = []
        if isinstance(domain, IntersectionDomain):
            for m in domain.members:
                g = _gauge_gradient(m, p)
                if g is not None and np.any(g):
                    normals.append(g / (p @ g))
        else:
            for f in domain.defs:
                fp = f.eval_float(p)
                if abs(fp) ** (1.0 / f.degree) >= 1 - 1e-9:
                    grad = np.array([f.partial(k).eval_float(p) for k in range(f.nvars)])
                    g = np.conj(fp) * grad
                    if np.any(g):
                        normals.append(g / (p @ g))
        out.extend(normals)
        for _ in range(16):
            if len(normals) >= 2:
                w = rng.dirichlet(np.ones(len(normals)))
                out.append(sum(wi * ni for wi, ni in zip(w, normals)))
    for _ in range(ngrid):
        out.append(sample_unit_sphere(rng, len(p), 1)[0])
    return out


def c_extremality_probe(domain, p, nsamples=64, radius=0.25, tol=1e-9,
                        directions=None, field="C", seed=0) -> FaceProbeResult:
    """Probe for affine segments inside the boundary through p.

    Empty ``directions_in_face`` means C-extremal up to probe resolution;
    a non-empty result is a concrete witness segment family.  ``field`` "R"
    probes real segments instead of complex discs.
    """
    p = _as_vec(p)
    _require_boundary(domain, p, max(tol, 1e-7))
    rng = rng_from(seed)
    n = len(p)
    cands = []
    if directions is not None:
        cands.extend(_as_vec(d) for d in directions)
    axes = np.eye(n, dtype=np.complex128)
    for i in range(n):
        cands.append(axes[i])
        for j in range(i + 1, n):
            cands.append((axes[i] + axes[j]) / np.sqrt(2))
            cands.append((axes[i] - axes[j]) / np.sqrt(2))
    cands.extend(sample_unit_sphere(rng, n, max(0, nsamples - len(cands))))

    if field == "C":
        angles = np.exp(2j * np.pi * np.arange(16) / 16)
        ts = np.concatenate([radius * r * angles for r in (0.25, 0.5, 1.0)])
    else:
        ts = radius * np.linspace(-1.0, 1.0, 33)
        ts = ts[ts != 0].astype(np.complex128)

    found = []
    for u in cands:
        pts = p[None, :] + ts[:, None] * u[None, :]
        dev = np.max(np.abs(minkowski_batch(domain, pts) - 1.0))
        if dev <= tol:
            found.append(tuple(u.tolist()))
    return FaceProbeResult(tuple(p.tolist()), tuple(found), radius, field)


# ---------------------------------------------------------------------------
# real Hessian of a defining gauge
# ---------------------------------------------------------------------------

class GaugeFunction:
    """Real-analytic defining function r with exact second complex partials.

    ``egg_gauge(q)`` is r(z) = sum |z_k|^{q_k} - 1; ``abs2_gauge(f)`` is
    r = |f|^2 - 1 for a polynomial f.  ``value`` evaluates r in floating
    point; ``second_partials`` returns (H, Ht) with H[j,k] = d^2 r / dz_j dzbar_k
    and Ht[j,k] = d^2 r / dz_j dz_k.
    """

    def __init__(self, value, second_partials, smooth_at, nvars):
        self.value = value
        self.second_partials = second_partials
        self.smooth_at = smooth_at
        self.nvars = nvars


def egg_gauge(q: Sequence[float]) -> GaugeFunction:
    q = np.array([float(x) for x in q])

    def value(z):
        return float(np.sum(np.abs(_as_vec(z)) ** q) - 1.0)

    def second_partials(z):
        z = _as_vec(z)
        a = np.abs(z)
        if np.any(a == 0):
            raise DomainError("egg gauge is not smooth where a coordinate vanishes")
        # d^2/dz dzbar |z|^q = (q/2)^2 |z|^{q-2};  d^2/dz^2 = (q/2)(q/2-1)|z|^q z^{-2}
        H = np.diag((q / 2.0) ** 2 * a ** (q - 2.0)).astype(np.complex128)
        Ht = np.diag((q / 2.0) * (q / 2.0 - 1.0) * a ** q / z ** 2)
        return H, Ht

    def smooth_at(z):
        return bool(np.all(np.abs(_as_vec(z)) > 0))

    return GaugeFunction(value, second_partials, smooth_at, len(q))


def abs2_gauge(f: MultiPoly) -> GaugeFunction:
    grads = [f.partial(k) for k in range(f.nvars)]
    hess = [[grads[j].partial(k) for k in range(f.nvars)] for j in range(f.nvars)]

    def value(z):
        return float(abs(f.eval_float(_as_vec(z))) ** 2 - 1.0)

    def second_partials(z):
        z = _as_vec(z)
        g = np.array([gk.eval_float(z) for gk in grads])
        fv = f.eval_float(z)
        # r = f conj(f):  r_{z_j zbar_k} = f_j conj(f_k);  r_{z_j z_k} = conj(f) f_{jk}
        H = np.outer(g, np.conj(g))
        Ht = np.conj(fv) * np.array([[hess[j][k].eval_float(z) for k in range(f.nvars)]
                                     for j in range(f.nvars)])
        return H, Ht

    def smooth_at(z):
        z = _as_vec(z)
        return any(abs(gk.eval_float(z)) > 1e-12 for gk in grads)

    return GaugeFunction(value, second_partials, smooth_at, f.nvars)


def lp_gauge(p: float, n: int) -> GaugeFunction:
    return egg_gauge([p] * n)


def real_hessian(gauge: GaugeFunction, p, v) -> float:
    """Real Hessian of the gauge at p along the (complex) direction v.

    Normalized as the full second derivative of t -> r(p + t v) at t = 0,
    i.e. 2 [v H vbar^T + Re(v Ht v^T)].
    """
    p = _as_vec(p)
    v = _as_vec(v)
    if not gauge.smooth_at(p):
        raise DomainError("gauge is not smooth at this point")
    H, Ht = gauge.second_partials(p)
    return float(2.0 * np.real(v @ H @ np.conj(v)) + 2.0 * np.real(v @ Ht @ v))


def finite_difference_hessian(gauge: GaugeFunction, p, v, step=1e-4) -> float:
    """Second central difference of t -> r(p + t v) at 0 (oracle)."""
    if step <= 0:
        raise ValueError("step must be positive")
    p = _as_vec(p)
    v = _as_vec(v)
    return (gauge.value(p + step * v) - 2.0 * gauge.value(p)
            + gauge.value(p - step * v)) / step ** 2


# ---------------------------------------------------------------------------
# orthogonality relations
# ---------------------------------------------------------------------------

def support(v, tol=0.0) -> frozenset:
    v = _as_vec(v)
    return frozenset(int(i) for i in np.nonzero(np.abs(v) > tol)[0])


def disjoint_support(vectors) -> Optional[list]:
    """Coordinate supports if pairwise disjoint, else None."""
    sups = []
    for v in vectors:
        v = _as_vec(v)
        if not np.any(v):
            raise ValueError("zero vector has no support")
        sups.append(support(v))
    for i in range(len(sups)):
        for j in range(i + 1, len(sups)):
            if sups[i] & sups[j]:
                return None
    return sups


def _lambda_grid():
    angles = np.exp(2j * np.pi * np.arange(64) / 64)
    return np.concatenate([r * angles for r in (0.25, 0.5, 1.0, 2.0)])


def p_orthogonal(u, v, p, tol=1e-10) -> bool:
    """Pythagoras-type identity ||u + t v||_p^p = ||u||_p^p + |t|^p ||v||_p^p
    on a lambda grid (max form for p = inf)."""
    u = _as_vec(u)
    v = _as_vec(v)
    grid = _lambda_grid()
    pts = u[None, :] + grid[:, None] * v[None, :]
    if np.isinf(p):
        lhs = np.max(np.abs(pts), axis=1)
        rhs = np.maximum(np.max(np.abs(u)), np.abs(grid) * np.max(np.abs(v)))
    else:
        lhs = np.sum(np.abs(pts) ** p, axis=1)
        rhs = np.sum(np.abs(u) ** p) + np.abs(grid) ** p * np.sum(np.abs(v) ** p)
    return bool(np.max(np.abs(lhs - rhs)) <= tol * max(1.0, float(np.max(np.abs(rhs)))))


def _norm(v, norm_p):
    v = _as_vec(v)
    if np.isinf(norm_p):
        return float(np.max(np.abs(v)))
    return float(np.sum(np.abs(v) ** norm_p) ** (1.0 / norm_p))


def bj_orthogonal(u, v, norm_p, tol=1e-9) -> bool:
    """Birkhoff-James: ||u + t v|| >= ||u|| for all t, probed by a coarse
    lambda grid plus local refinement of the minimizer."""
    u = _as_vec(u)
    v = _as_vec(v)
    if not np.any(v):
        return True
    base = _norm(u, norm_p)

    def val(lam):
        return _norm(u + lam * v, norm_p)

    grid = np.concatenate([[0.0 + 0j], _lambda_grid(), 4.0 * _lambda_grid()])
    best = min(grid, key=val)
    scale = 0.5
    for _ in range(40):
        moves = best + scale * np.array([1, -1, 1j, -1j, 1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
        cand = min(moves, key=val)
        if val(cand) < val(best):
            best = cand
        else:
            scale *= 0.5
    return bool(val(best) >= base - tol)
