"""Rectification of polynomial retracts of the plane.

Any nontrivial idempotent polynomial self-map of C^2 can be conjugated by an
explicit chain of elementary polynomial automorphisms so that its image
becomes the first coordinate axis.  After translating a fixed point to the
origin and diagonalizing the (rank-one, idempotent) derivative, the loop
repeatedly cancels the top homogeneous part of one component against an exact
power of the other:

* when deg F2 = m * deg F1 and top(F2) = mu * top(F1)^m, conjugate by the
  down-shear (z, w - mu z^m); the m = 1 case is the equal-top-degree
  reduction with mu the exact proportionality factor of the tops;
* when deg F1 = k * deg F2 and top(F1) = mu * top(F2)^k, conjugate by the
  up-shear (z - mu w^k, w).

The loop terminates at one of two exact normal forms: (z + w Q(z, w), 0)
(image already the first axis) or (z, phi(z)) (finished by the down-shear
along phi).  A state where neither move applies would falsify the
classification of plane polynomial retracts and raises InternalContradiction.

All certificates are exact: chain o F o chain^{-1} equals the emitted normal
form as polynomials, the chain composed with its inverse telescopes to the
identity, and the generator certificate rewrites both components of F as
univariate polynomials in the ring generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import exactlinalg as xl
from .exactpoly import (EC_ONE, EC_ZERO, ExactComplex, MultiPoly, PolyMap,
                        format_poly, homogeneous_parts, poly_compose,
                        proportionality_test)
from .retraction import verify_idempotent

MAX_INPUT_DEGREE = 16


class TrivialRetractionError(ValueError):
    """Identity or constant maps carry no straightening content."""


class UnsupportedInputError(ValueError):
    pass


class InternalContradiction(AssertionError):
    """Raised when an exactly idempotent input contradicts the classification.

    This is never absorbed: it signals a bug in the arithmetic (or a false
    idempotency claim), not a recoverable condition.
    """


# ---------------------------------------------------------------------------
# elementary automorphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineTranslate:
    vector: tuple  # (ExactComplex, ExactComplex); z -> z + vector

    def as_polymap(self) -> PolyMap:
        z = MultiPoly.variable(2, 0)
        w = MultiPoly.variable(2, 1)
        return PolyMap([z + self.vector[0], w + self.vector[1]])

    def inverse(self):
        return AffineTranslate((-self.vector[0], -self.vector[1]))

    def describe(self):
        return {"kind": "translate", "vector": [str(v) for v in self.vector]}


@dataclass(frozen=True)
class LinearInvertible:
    matrix: tuple  # 2x2 rows of ExactComplex

    def as_polymap(self) -> PolyMap:
        (a, b), (c, d) = self.matrix
        z = MultiPoly.variable(2, 0)
        w = MultiPoly.variable(2, 1)
        return PolyMap([z * a + w * b, z * c + w * d])

    def inverse(self):
        (a, b), (c, d) = self.matrix
        det = a * d - b * c
        if det.is_zero():
            raise ValueError("linear step is singular")
        inv = ((d / det, -b / det), (-c / det, a / det))
        return LinearInvertible(inv)

    def describe(self):
        return {"kind": "linear", "matrix": [[str(x) for x in row] for row in self.matrix]}


@dataclass(frozen=True)
class ShearUp:
    """(z, w) -> (z - c w^k, w)."""
    c: ExactComplex
    k: int

    def as_polymap(self) -> PolyMap:
        z = MultiPoly.variable(2, 0)
        w = MultiPoly.variable(2, 1)
        return PolyMap([z - (w ** self.k) * self.c, w])

    def inverse(self):
        return ShearUp(-self.c, self.k)

    def describe(self):
        return {"kind": "shear-up", "c": str(self.c), "k": self.k}


@dataclass(frozen=True)
class ShearDown:
    """(z, w) -> (z, w - p(z)) for a univariate polynomial p in z."""
    p: MultiPoly

    def __post_init__(self):
        if self.p.nvars != 2 or any(e[1] != 0 for e in self.p.terms):
            raise ValueError("shear-down polynomial must depend on z alone")

    def as_polymap(self) -> PolyMap:
        z = MultiPoly.variable(2, 0)
        w = MultiPoly.variable(2, 1)
        return PolyMap([z, w - self.p])

    def inverse(self):
        return ShearDown(-self.p)

    def describe(self):
        return {"kind": "shear-down", "p": format_poly(self.p)}


@dataclass(frozen=True)
class SwapAxes:
    def as_polymap(self) -> PolyMap:
        z = MultiPoly.variable(2, 0)
        w = MultiPoly.variable(2, 1)
        return PolyMap([w, z])

    def inverse(self):
        return SwapAxes()

    def describe(self):
        return {"kind": "swap"}


ElementaryAutomorphism = (AffineTranslate, LinearInvertible, ShearUp, ShearDown,
                          SwapAxes)


@dataclass
class AutomorphismChain:
    """Composition of elementary steps; steps[0] acts first."""
    steps: list = field(default_factory=list)

    def as_polymap(self) -> PolyMap:
        m = PolyMap.identity(2)
        for s in self.steps:
            m = poly_compose(s.as_polymap(), m)
        return m

    def inverse_polymap(self) -> PolyMap:
        m = PolyMap.identity(2)
        for s in reversed(self.steps):
            m = poly_compose(s.inverse().as_polymap(), m)
        return m

    def conjugate(self, f: PolyMap) -> PolyMap:
        for s in self.steps:
            sm = s.as_polymap()
            si = s.inverse().as_polymap()
            f = poly_compose(sm, poly_compose(f, si))
        return f

    def verify_invertibility(self) -> bool:
        """Each step cancels its inverse exactly; the chain telescopes."""
        ident = PolyMap.identity(2)
        for s in self.steps:
            if poly_compose(s.as_polymap(), s.inverse().as_polymap()) != ident:
                return False
            if poly_compose(s.inverse().as_polymap(), s.as_polymap()) != ident:
                return False
        return poly_compose(self.as_polymap(), self.inverse_polymap()) == ident

    def describe(self):
        return [s.describe() for s in self.steps]


@dataclass
class StraighteningResult:
    chain: AutomorphismChain
    normal_form: PolyMap
    form_tag: str  # "ProjectionWithShear" | "GraphOverAxis"
    certificate: dict
    generator: Optional[MultiPoly] = None


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def _cheap_idempotency_probes(f: PolyMap) -> bool:
    """Exact necessary conditions: f(f(x)) == f(x) at small integer points.

    A certain 'no' on failure; the full proof for accepted inputs comes from
    the straightening certificate (F = chain^{-1} o N o chain with N exactly
    idempotent), so no up-front composition is needed.
    """
    pts = [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 2), (2, -1), (3, 2)]
    for pt in pts:
        img = f.eval_exact(pt)
        if f.eval_exact(img) != img:
            return False
    return True


def normalize_retraction(f: PolyMap, check_idempotent: bool = True):
    """Translate a fixed point to 0 and diagonalize the derivative.

    F(0) is always a fixed point of an idempotent map, so the translation is
    available with exact coordinates; the derivative at the fixed point is an
    exact idempotent matrix whose rank must be 1 (rank 0 or 2 means a trivial
    retraction).  Returns (F', chain) with F'(0) = 0, DF'(0) = diag(1, 0).
    """
    if f.domain_dim != 2 or f.codomain_dim != 2:
        raise UnsupportedInputError("straightening handles self-maps of the plane")
    if not _cheap_idempotency_probes(f):
        raise UnsupportedInputError("map is not idempotent")
    if check_idempotent and not verify_idempotent(f):
        raise UnsupportedInputError("map is not idempotent")
    chain = AutomorphismChain([])
    fixed = f.constant_part()  # F(0), fixed by idempotency
    if any(not c.is_zero() for c in fixed):
        step = AffineTranslate((-fixed[0], -fixed[1]))
        chain.steps.append(step)
        f = chain_conjugate_step(step, f)
    a = f.linear_part_matrix()
    if not xl.is_idempotent(a):
        raise InternalContradiction("derivative at a fixed point is not idempotent")
    r = xl.rank(a)
    if r == 2:
        raise TrivialRetractionError("derivative has rank 2: the map is the identity")
    if r == 0:
        raise TrivialRetractionError("derivative has rank 0: the map is constant")
    if not (a[0][0] == EC_ONE and a[0][1].is_zero() and a[1][0].is_zero()
            and a[1][1].is_zero()):
        # image = a nonzero column of A, kernel = a nonzero column of I - A
        cols = [[a[0][j], a[1][j]] for j in range(2)]
        v1 = next(c for c in cols if any(not x.is_zero() for x in c))
        ia = xl.mat_sub(xl.identity(2), a)
        cols2 = [[ia[0][j], ia[1][j]] for j in range(2)]
        v2 = next(c for c in cols2 if any(not x.is_zero() for x in c))
        t_inv = [[v1[0], v2[0]], [v1[1], v2[1]]]
        step = LinearInvertible(tuple(tuple(row) for row in xl.mat_inv(t_inv)))
        chain.steps.append(step)
        f = chain_conjugate_step(step, f)
        a = f.linear_part_matrix()
        if not (a[0][0] == EC_ONE and a[0][1].is_zero() and a[1][0].is_zero()
                and a[1][1].is_zero()):
            raise InternalContradiction("derivative diagonalization failed")
    return f, chain


def chain_conjugate_step(step, f: PolyMap) -> PolyMap:
    return poly_compose(step.as_polymap(),
                        poly_compose(f, step.inverse().as_polymap()))


# ---------------------------------------------------------------------------
# the straightening loop
# ---------------------------------------------------------------------------

def _top_part(p: MultiPoly) -> MultiPoly:
    d = p.degree
    return MultiPoly.zero(2) if d is None else homogeneous_parts(p).part(d)


def _diagonal_cleanup(f: PolyMap, chain: AutomorphismChain) -> PolyMap:
    """Re-diagonalize the derivative; used at terminal states only.

    Degree-1 shears in the reduction leave DF(0) a non-diagonal rank-one
    idempotent; once one component vanishes, diagonalizing again cannot
    resurrect it (the linear change fixes the image axis).
    """
    a = f.linear_part_matrix()
    if (a[0][0] == EC_ONE and a[0][1].is_zero() and a[1][0].is_zero()
            and a[1][1].is_zero()):
        return f
    if not xl.is_idempotent(a) or xl.rank(a) != 1:
        raise InternalContradiction("terminal state has a non-rank-one derivative")
    cols = [[a[0][j], a[1][j]] for j in range(2)]
    v1 = next(c for c in cols if any(not x.is_zero() for x in c))
    ia = xl.mat_sub(xl.identity(2), a)
    cols2 = [[ia[0][j], ia[1][j]] for j in range(2)]
    v2 = next(c for c in cols2 if any(not x.is_zero() for x in c))
    t_inv = [[v1[0], v2[0]], [v1[1], v2[1]]]
    step = LinearInvertible(tuple(tuple(row) for row in xl.mat_inv(t_inv)))
    chain.steps.append(step)
    return chain_conjugate_step(step, f)


def straighten(f: PolyMap, max_degree: int = MAX_INPUT_DEGREE,
               max_iterations: int = 200) -> StraighteningResult:
    """Full rectification of an idempotent polynomial self-map of C^2."""
    deg = f.degree or 0
    if deg > max_degree:
        raise UnsupportedInputError(
            f"input degree {deg} exceeds the supported cap {max_degree}")
    original = f
    # idempotency of the input is certified at the end by the chain identity
    # F = chain^{-1} o normal_form o chain; only cheap probes run up front
    f, chain = normalize_retraction(f, check_idempotent=False)
    z = MultiPoly.variable(2, 0)

    form_tag = None
    for _ in range(max_iterations):
        if (f.degree or 0) > 4 * max_degree ** 2:
            raise UnsupportedInputError("intermediate degree blow-up beyond support")
        f1, f2 = f.components
        if f2.is_zero():
            f = _diagonal_cleanup(f, chain)
            p1 = f.components[0] - z
            if any(e[1] < 1 for e in p1.terms):
                raise InternalContradiction(
                    "vanishing second component forces the first correction "
                    "to be divisible by w")
            form_tag = "ProjectionWithShear"
            break
        if f1 == z:
            if any(e[1] != 0 for e in f2.terms):
                raise InternalContradiction(
                    "first component z forces the second to depend on z alone")
            # graph over the axis: the final down-shear along phi finishes
            step = ShearDown(f2)
            chain.steps.append(step)
            f = chain_conjugate_step(step, f)
            form_tag = "GraphOverAxis"
            break

        d1 = f1.degree or 0
        d2 = f2.degree or 0
        top1 = _top_part(f1)
        top2 = _top_part(f2)
        step = None
        if d1 >= 1 and d2 >= d1 and d2 % d1 == 0:
            mu = proportionality_test(top1 ** (d2 // d1), top2)
            if mu is not None and not mu.is_zero():
                step = ShearDown(MultiPoly(2, {(d2 // d1, 0): mu}))
                old = d2
                f = chain_conjugate_step(step, f)
                chain.steps.append(step)
                if d2 // d1 == 1 and (f.components[1].degree or 0) >= old \
                        and not f.components[1].is_zero():
                    raise InternalContradiction(
                        "equal-degree shear failed to reduce the second degree")
                continue
        if d2 >= 1 and d1 > d2 and d1 % d2 == 0:
            mu = proportionality_test(top2 ** (d1 // d2), top1)
            if mu is not None and not mu.is_zero():
                step = ShearUp(mu, d1 // d2)
                f = chain_conjugate_step(step, f)
                chain.steps.append(step)
                continue
        raise InternalContradiction(
            f"no top-cancelling shear at degrees ({d1}, {d2}): the input "
            "contradicts the classification of plane polynomial retracts")
    else:
        raise UnsupportedInputError("straightening exceeded the iteration cap")

    normal_form = f
    cert = _certificates(original, chain, normal_form)
    result = StraighteningResult(chain, normal_form, form_tag, cert)
    result.generator = ring_retract_generator(original, result)
    return result


def _certificates(original: PolyMap, chain: AutomorphismChain,
                  normal_form: PolyMap) -> dict:
    conj = chain.conjugate(original)
    if conj != normal_form:
        # distinguish a non-idempotent input from an internal bug
        if verify_idempotent(original):
            raise InternalContradiction(
                "chain conjugation does not reproduce the normal form")
        raise UnsupportedInputError("map is not idempotent")
    if not verify_idempotent(normal_form, force_symbolic=True):
        raise InternalContradiction("normal form is not idempotent")
    if not normal_form.components[1].is_zero():
        raise InternalContradiction("normal form image is not the first axis")
    if not chain.verify_invertibility():
        raise InternalContradiction("chain inverse composition is not the identity")
    # the three exact identities above prove idempotency of the input:
    # original = chain^{-1} o normal_form o chain
    return {
        "conjugation_matches_normal_form": True,
        "normal_form_idempotent": True,
        "image_is_first_axis": True,
        "chain_invertible": True,
        "input_idempotent_by_conjugation": True,
    }


def ring_retract_generator(f: PolyMap, result: StraighteningResult) -> MultiPoly:
    """Generator r of the induced polynomial-ring retract.

    With Phi the rectifying chain and N = (s, 0) the normal form, the
    generator is r = s o Phi, and both components of f are the univariate
    polynomials u_i(t) = (Phi^{-1})_i(t, 0) evaluated at r.  That identity is
    forced by the verified conjugation certificate (u_i(r) = (Phi^{-1})_i o
    (Phi o f) = f_i by associativity); the division-free substitution check
    re-expands it whenever the expansion stays small, and exact point probes
    run always.
    """
    phi = result.chain.as_polymap()
    phi_inv = result.chain.inverse_polymap()
    s = result.normal_form.components[0]
    r = s.substitute(list(phi.components))
    zero = MultiPoly.zero(2)
    membership = "substitution"
    for i, comp in enumerate(f.components):
        u_i = phi_inv.components[i].substitute(
            [MultiPoly.variable(2, 0), zero])  # t -> (t, 0)
        du = u_i.degree or 0
        dr = r.degree or 0
        if (du * dr + 1) * (du * dr + 2) * max(1, len(r.terms)) <= 2_000_000:
            recon = u_i.substitute([r, zero])
            if recon != comp:
                raise InternalContradiction(
                    "components are not polynomials in the ring generator")
        else:
            membership = "conjugation-identity"
            for pt in [(0, 0), (1, 0), (0, 1), (2, -1), (-1, 3)]:
                rv = r.eval_exact(pt)
                if u_i.eval_exact((rv, 0)) != comp.eval_exact(pt):
                    raise InternalContradiction(
                        "components are not polynomials in the ring generator")
    result.certificate["generator_membership"] = membership
    return r
