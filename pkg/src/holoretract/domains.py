"""Balanced-domain zoo: gauges, membership, boundary classification.

Families: ``LpBall``, ``DecoupledEgg`` (|z_1|^{q_1} + ... + |z_N|^{q_N} < 1),
``PolyPolyhedron`` (|f_j| < 1 with homogeneous defining polynomials),
``ProductDomain`` and ``IntersectionDomain``.  Every family has a closed-form
Minkowski gauge plus a generic radial-bisection fallback used as an
independent cross-check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .exactpoly import MultiPoly, format_poly, parse_poly
from .sampling import rng_from, sample_unit_sphere


class DomainError(ValueError):
    pass


class UnboundedDirectionError(DomainError):
    pass


@dataclass(frozen=True)
class LpBall:
    p: float  # extended positive real in (0, inf]
    dim: int

    def __post_init__(self):
        if not (self.p > 0):
            raise DomainError("p must be positive")
        if self.dim < 1:
            raise DomainError("dim must be at least 1")


@dataclass(frozen=True)
class DecoupledEgg:
    q: tuple  # one positive exponent per coordinate

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        if any(x <= 0 for x in self.q):
            raise DomainError("egg exponents must be positive")

    @property
    def dim(self):
        return len(self.q)


@dataclass(frozen=True)
class PolyPolyhedron:
    defs: tuple  # homogeneous nonconstant MultiPoly, |f_j| < 1
    bounded_probe: Optional[bool] = field(default=None, compare=False)

    def __post_init__(self):
        defs = tuple(self.defs)
        if not defs:
            raise DomainError("a polyhedron needs at least one defining polynomial")
        nv = defs[0].nvars
        for f in defs:
            if f.nvars != nv:
                raise DomainError("defining polynomials disagree on dimension")
            if not f.is_homogeneous() or f.degree is None or f.degree < 1:
                raise DomainError("defining polynomials must be homogeneous and nonconstant")
        object.__setattr__(self, "defs", defs)

    @property
    def dim(self):
        return self.defs[0].nvars

    @property
    def degrees(self):
        return tuple(f.degree for f in self.defs)


@dataclass(frozen=True)
class ProductDomain:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def dim(self):
        return sum(dim(f) for f in self.factors)


@dataclass(frozen=True)
class IntersectionDomain:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        dims = {dim(m) for m in members}
        if len(dims) != 1:
            raise DomainError("intersection members must share the ambient dimension")
        object.__setattr__(self, "members", members)

    @property
    def dim(self):
        return dim(self.members[0])


BalancedDomain = Union[LpBall, DecoupledEgg, PolyPolyhedron, ProductDomain,
                       IntersectionDomain]


def polydisc(n: int) -> LpBall:
    return LpBall(p=float("inf"), dim=n)


def dh_domain() -> PolyPolyhedron:
    """The quadratic polyhedron {|z^2 - w^2| < 1, |zw| < 2} (defs |f_j| < 1)."""
    return PolyPolyhedron(defs=(parse_poly("z^2-w^2"),
                                parse_poly("(1/2)*z*w")))


def dim(domain) -> int:
    return domain.dim


@dataclass(frozen=True)
class MinkowskiValue:
    value: float
    method: str  # "closed-form" | "radial-bisection"

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class BoundaryStratum:
    point: tuple
    active: frozenset  # face indices j with |f_j(point)|^{1/d_j} within tol of 1
    kind: str  # "open-face" | "rib"


def _check_dim(domain, z):
    z = np.asarray(z, dtype=np.complex128)
    if z.shape[-1] != dim(domain):
        raise DomainError(
            f"point has dimension {z.shape[-1]}, domain has dimension {dim(domain)}")
    return z


def minkowski_batch(domain, pts) -> np.ndarray:
    """Closed-form gauge values for an (M, dim) array of points."""
    pts = _check_dim(domain, np.atleast_2d(np.asarray(pts, dtype=np.complex128)))
    if isinstance(domain, LpBall):
        if np.isinf(domain.p):
            return np.max(np.abs(pts), axis=1)
        return np.sum(np.abs(pts) ** domain.p, axis=1) ** (1.0 / domain.p)
    if isinstance(domain, DecoupledEgg):
        q = np.array(domain.q)
        if np.all(q == q[0]):
            return np.sum(np.abs(pts) ** q[0], axis=1) ** (1.0 / q[0])
        return _kernels.egg_gauge_batch(np.ascontiguousarray(np.abs(pts)), q, 1e-14)
    if isinstance(domain, PolyPolyhedron):
        vals = [np.abs(f.eval_batch(pts)) ** (1.0 / f.degree) for f in domain.defs]
        return np.max(np.stack(vals, axis=1), axis=1)
    if isinstance(domain, ProductDomain):
        out = []
        k = 0
        for f in domain.factors:
            d = dim(f)
            out.append(minkowski_batch(f, pts[:, k:k + d]))
            k += d
        return np.max(np.stack(out, axis=1), axis=1)
    if isinstance(domain, IntersectionDomain):
        vals = [minkowski_batch(m, pts) for m in domain.members]
        return np.max(np.stack(vals, axis=1), axis=1)
    raise DomainError(f"unknown domain kind {type(domain).__name__}")


def minkowski(domain, z) -> MinkowskiValue:
    z = _check_dim(domain, z)
    return MinkowskiValue(float(minkowski_batch(domain, z.reshape(1, -1))[0]),
                          "closed-form")


def _member_raw(domain, z) -> bool:
    """Membership straight from the defining inequalities (no gauge)."""
    z = np.asarray(z, dtype=np.complex128)
    if isinstance(domain, LpBall):
        if np.isinf(domain.p):
            return bool(np.max(np.abs(z)) < 1.0)
        return bool(np.sum(np.abs(z) ** domain.p) < 1.0)
    if isinstance(domain, DecoupledEgg):
        return bool(np.sum(np.abs(z) ** np.array(domain.q)) < 1.0)
    if isinstance(domain, PolyPolyhedron):
        return all(abs(f.eval_float(z)) < 1.0 for f in domain.defs)
    if isinstance(domain, ProductDomain):
        k = 0
        for f in domain.factors:
            d = dim(f)
            if not _member_raw(f, z[k:k + d]):
                return False
            k += d
        return True
    if isinstance(domain, IntersectionDomain):
        return all(_member_raw(m, z) for m in domain.members)
    raise DomainError(f"unknown domain kind {type(domain).__name__}")


def minkowski_bisection(domain, z, tol=1e-12, max_iter=300) -> MinkowskiValue:
    """Gauge via bisection on t of membership of z/t along the ray.

    Valid for balanced domains: membership along a ray is an initial interval.
    """
    z = _check_dim(domain, z)
    if not np.any(z):
        return MinkowskiValue(0.0, "radial-bisection")
    # z/t is a member exactly for t > h(z); bracket h between lo and hi
    hi = 1.0
    for _ in range(max_iter):
        if _member_raw(domain, z / hi):
            break
        hi *= 2.0
    else:
        raise DomainError("radial bisection failed to enter the domain")
    lo = hi
    for _ in range(max_iter * 4):
        lo /= 2.0
        if not _member_raw(domain, z / lo):
            break
        if lo < 1e-300:
            return MinkowskiValue(0.0, "radial-bisection")  # unbounded direction
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if _member_raw(domain, z / mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return MinkowskiValue(0.5 * (lo + hi), "radial-bisection")


def contains(domain, z, tol_open: float = 0.0) -> bool:
    return minkowski(domain, z).value < 1.0 - tol_open


def radial_boundary(domain, z) -> np.ndarray:
    """z / h(z): the radial projection of z onto the boundary."""
    z = _check_dim(domain, z)
    if not np.any(z):
        raise DomainError("radial projection of the zero vector is undefined")
    h = minkowski(domain, z).value
    if h <= 0.0:
        raise UnboundedDirectionError(
            "domain is unbounded along this direction (gauge vanishes)")
    return z / h


def classify_boundary(domain: PolyPolyhedron, p, tol: float = 1e-9) -> BoundaryStratum:
    if not isinstance(domain, PolyPolyhedron):
        raise DomainError("boundary classification applies to polynomial polyhedra")
    p = _check_dim(domain, p)
    h = minkowski(domain, p).value
    if abs(h - 1.0) > tol:
        raise DomainError(f"point is not on the boundary within tol (gauge {h})")
    active = frozenset(
        j for j, f in enumerate(domain.defs)
        if abs(f.eval_float(p)) ** (1.0 / f.degree) >= 1.0 - tol)
    kind = "rib" if len(active) >= 2 else "open-face"
    return BoundaryStratum(tuple(p.tolist()), active, kind)


def boundedness_probe(domain: PolyPolyhedron, nsamples: int = 4096, seed: int = 0):
    """Advisory boundedness flag: min over sphere samples of the gauge > 0.

    Random samples are augmented with the coordinate axes, where common-zero
    directions of the defining polynomials tend to sit.
    """
    rng = rng_from(seed)
    n = domain.dim
    u = sample_unit_sphere(rng, n, nsamples)
    axes = np.eye(n, dtype=np.complex128)
    pairs = [(axes[i] + axes[j]) / np.sqrt(2)
             for i in range(n) for j in range(i + 1, n)]
    probe = np.vstack([u, axes] + ([np.stack(pairs)] if pairs else []))
    h = minkowski_batch(domain, probe)
    return bool(np.min(h) > 1e-6), float(np.min(h))


# ---------------------------------------------------------------------------
# JSON domain specs
# ---------------------------------------------------------------------------

def domain_from_json(spec) -> BalancedDomain:
    """{"kind":"lp","p":4,"dim":3} | {"kind":"egg","q":[...]} |
    {"kind":"polyhedron","defs":[...]} | {"kind":"product","factors":[...]} |
    {"kind":"intersection","members":[...]}"""
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("kind")
    if kind == "lp":
        p = spec["p"]
        p = float("inf") if p in ("inf", "infinity", None) else float(p)
        return LpBall(p=p, dim=int(spec["dim"]))
    if kind == "egg":
        return DecoupledEgg(q=tuple(spec["q"]))
    if kind == "polyhedron":
        defs = [parse_poly(s) for s in spec["defs"]]
        nv = max(f.nvars for f in defs)
        defs = [parse_poly(s, nv) for s in spec["defs"]]
        return PolyPolyhedron(defs=tuple(defs))
    if kind == "product":
        return ProductDomain(factors=tuple(domain_from_json(f) for f in spec["factors"]))
    if kind == "intersection":
        return IntersectionDomain(members=tuple(domain_from_json(m) for m in spec["members"]))
    raise DomainError(f"unknown domain kind {kind!r}")


def domain_to_json(domain) -> dict:
    if isinstance(domain, LpBall):
        p = "inf" if np.isinf(domain.p) else domain.p
        return {"kind": "lp", "p": p, "dim": domain.dim}
    if isinstance(domain, DecoupledEgg):
        return {"kind": "egg", "q": list(domain.q)}
    if isinstance(domain, PolyPolyhedron):
        return {"kind": "polyhedron", "defs": [format_poly(f) for f in domain.defs]}
    if isinstance(domain, ProductDomain):
        return {"kind": "product", "factors": [domain_to_json(f) for f in domain.factors]}
    if isinstance(domain, IntersectionDomain):
        return {"kind": "intersection", "members": [domain_to_json(m) for m in domain.members]}
    raise DomainError(f"unknown domain kind {type(domain).__name__}")
