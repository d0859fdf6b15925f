"""Linear retracts of l^p balls and polydiscs.

Disjointly-supported basis search (sound and complete via coordinate-block
splitting of the reduced echelon form), Hoelder-dual norm-one projection
construction for finite p != 2, the polydisc acceptance test with its
retraction constructor, and a lower-bound operator-norm sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import exactlinalg as xl
from .exactpoly import EC_ONE, EC_ZERO, ExactComplex, MultiPoly, PolyMap, exact_sqrt
from .sampling import rng_from, sample_unit_p_sphere


class SubspaceError(ValueError):
    pass


class LinearSubspace:
    """A linear subspace of C^N, canonicalized by exact RREF of a basis."""

    def __init__(self, ambient_dim: int, basis: Sequence[Sequence]):
        self.ambient_dim = int(ambient_dim)
        rows = [[ExactComplex.of(x) for x in v] for v in basis]
        if not rows:
            raise SubspaceError("a subspace needs at least one basis vector")
        if any(len(r) != self.ambient_dim for r in rows):
            raise SubspaceError("basis vectors must have the ambient dimension")
        rref_rows, pivots = xl.rref(rows)
        if len(rref_rows) != len(rows):
            raise SubspaceError("basis vectors are linearly dependent")
        self.basis = rows
        self.rref = rref_rows
        self.pivots = pivots

    @property
    def dim(self) -> int:
        return len(self.rref)

    def basis_array(self) -> np.ndarray:
        return xl.to_complex_array(self.basis)

    @staticmethod
    def kernel_of_functional(coeffs) -> "LinearSubspace":
        """ker(sum c_k z_k) inside C^N."""
        c = [ExactComplex.of(x) for x in coeffs]
        n = len(c)
        j0 = next((j for j, x in enumerate(c) if not x.is_zero()), None)
        if j0 is None:
            raise SubspaceError("zero functional has no proper kernel")
        basis = []
        for j in range(n):
            if j == j0:
                continue
            v = [EC_ZERO] * n
            v[j] = EC_ONE
            v[j0] = -c[j] / c[j0]
            basis.append(v)
        return LinearSubspace(n, basis)


class LinearProjection:
    """An idempotent matrix; exact when built from exact data."""

    def __init__(self, matrix, exact=None):
        if exact is not None:
            self.exact = exact
            self.matrix = xl.to_complex_array(exact)
        else:
            self.exact = None
            self.matrix = np.asarray(matrix, dtype=np.complex128)
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("projection matrix must be square")

    @property
    def ambient_dim(self):
        return self.matrix.shape[0]

    def is_idempotent(self, tol=1e-12) -> bool:
        if self.exact is not None:
            return xl.is_idempotent(self.exact)
        m = self.matrix
        return bool(np.max(np.abs(m @ m - m)) <= tol)

    def idempotency_defect(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m @ m - m)))

    def apply(self, z):
        return self.matrix @ np.asarray(z, dtype=np.complex128)

    def as_polymap(self) -> PolyMap:
        if self.exact is None:
            raise ValueError("only exact projections convert to polynomial maps")
        n = self.ambient_dim
        comps = []
        for i in range(n):
            terms = {}
            for k in range(n):
                exp = tuple(1 if j == k else 0 for j in range(n))
                terms[exp] = self.exact[i][k]
            comps.append(MultiPoly(n, terms))
        return PolyMap(comps)


@dataclass
class DisjointBasis:
    """Disjointly supported basis; unit p-norm floats plus exact originals."""
    vectors: np.ndarray                 # (k, N), each row of p-norm 1 (floats)
    supports: tuple                     # tuple of frozensets
    p: float
    exact_vectors: Optional[list] = field(default=None, repr=False)  # unnormalized


def disjoint_basis_search(subspace: LinearSubspace) -> Optional[list]:
    """Basis of pairwise disjointly supported vectors for L, or None.

    The RREF rows split L across the connected components of their coordinate
    co-occurrence graph, and that partition is the finest one over which L
    splits; a disjoint basis therefore exists iff every component carries
    exactly one RREF row.  Returns the exact rows grouped per block.
    """
    rows = subspace.rref
    if not rows:
        raise SubspaceError("zero subspace")
    n = subspace.ambient_dim
    supports = [frozenset(j for j in range(n) if not r[j].is_zero()) for r in rows]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for sup in supports:
        sup = sorted(sup)
        for j in sup[1:]:
            union(sup[0], j)
    comp_of_row = [find(min(sup)) for sup in supports]
    if len(set(comp_of_row)) != len(rows):
        return None
    return [list(r) for r in rows]


def _exact_holder_dual(vec, p: int):
    """Exact functional coefficients conj(u_i)|u_i|^{p-2} when representable."""
    out = []
    for x in vec:
        a2 = x.abs2()
        if a2 == 0:
            out.append(EC_ZERO)
            continue
        k = p - 2
        if k % 2 == 0:
            mod = a2 ** (k // 2)
        else:
            r = exact_sqrt(a2)
            if r is None:
                return None
            mod = r ** k
        out.append(x.conj() * mod)
    return out


def lp_norm_one_projection(p: float, basis: "DisjointBasis | list",
                           ambient_dim: Optional[int] = None) -> LinearProjection:
    """Norm-one projection onto the span of a disjointly supported basis.

    P(z) = sum_j u_j^*(z) u_j with u_j^* the Hoelder-dual functional carried
    on supp(u_j).  P is invariant under rescaling each u_j, so the matrix is
    assembled from the unnormalized exact vectors whenever their entry moduli
    are rational, which makes idempotency exact.
    """
    if np.isinf(p) or p == 2 or p < 1:
        raise ValueError("construction covers finite p >= 1 with p != 2")
    if isinstance(basis, DisjointBasis):
        vecs_exact = basis.exact_vectors
        vec_f = basis.vectors
        n = vec_f.shape[1]
    else:
        vecs_exact = [[ExactComplex.of(x) for x in v] for v in basis]
        n = len(vecs_exact[0]) if ambient_dim is None else ambient_dim
        vec_f = np.array([[complex(x) for x in v] for v in vecs_exact])
    sups = [frozenset(int(j) for j in np.nonzero(np.abs(v) > 0)[0]) for v in vec_f]
    for a in range(len(sups)):
        for b in range(a + 1, len(sups)):
            if sups[a] & sups[b]:
                raise ValueError("basis vectors are not disjointly supported")

    exact_ok = vecs_exact is not None and float(p).is_integer()
    if exact_ok:
        pi = int(p)
        mat = [[EC_ZERO] * n for _ in range(n)]
        for u in vecs_exact:
            w = _exact_holder_dual(u, pi)
            if w is None:
                exact_ok = False
                break
            s = sum((wi * ui for wi, ui in zip(w, u)), EC_ZERO)
            for a in range(n):
                if u[a].is_zero():
                    continue
                for b in range(n):
                    if w[b].is_zero():
                        continue
                    mat[a][b] = mat[a][b] + u[a] * w[b] / s
        if exact_ok:
            return LinearProjection(None, exact=mat)

    matf = np.zeros((n, n), dtype=np.complex128)
    for u in vec_f:
        a = np.abs(u)
        w = np.where(a > 0, np.conj(u) * np.where(a > 0, a, 1.0) ** (p - 2), 0.0)
        s = w @ u
        matf += np.outer(u, w) / s
    return LinearProjection(matf)


def normalize_disjoint_basis(rows, p: float) -> DisjointBasis:
    vec_f = np.array([[complex(x) for x in r] for r in rows])
    if np.isinf(p):
        nrm = np.max(np.abs(vec_f), axis=1, keepdims=True)
    else:
        nrm = np.sum(np.abs(vec_f) ** p, axis=1, keepdims=True) ** (1.0 / p)
    sups = tuple(frozenset(int(j) for j in np.nonzero(np.abs(v) > 0)[0]) for v in vec_f)
    return DisjointBasis(vec_f / nrm, sups, p, exact_vectors=[list(r) for r in rows])


# ---------------------------------------------------------------------------
# polydisc acceptance
# ---------------------------------------------------------------------------

@dataclass
class PolydiscVerdict:
    accepted: bool
    index_set: Optional[tuple] = None
    coefficients: Optional[dict] = None        # (m, j_k) -> ExactComplex
    retraction: Optional[PolyMap] = None
    projection: Optional[LinearProjection] = None
    reason: Optional[str] = None


def _abs_row_sum_le_one(coeffs) -> Optional[bool]:
    """Exact comparison sum |c| <= 1 when each |c| is rational; None if not."""
    total = Fraction(0)
    for c in coeffs:
        r = exact_sqrt(c.abs2())
        if r is None:
            return None
        total += r
    return total <= 1


def polydisc_retract_test(subspace: LinearSubspace) -> PolydiscVerdict:
    """Acceptance test for L being a linear retract of the polydisc.

    Searches index sets J with |J| = dim L whose coordinate rows of the basis
    are invertible, normalizes to v_k = e_{j_k} + sum_{m not in J} c_{m,j_k} e_m,
    and accepts iff some J has all row sums sum_{j in J} |c_{m,j}| <= 1.  On
    acceptance the linear retraction with components z_j (j in J) and
    sum_k c_{m,j_k} z_{j_k} (m not in J) is returned.
    """
    from itertools import combinations

    n = subspace.ambient_dim
    r = subspace.dim
    if n > 12:
        raise SubspaceError("polydisc test enumerates index sets; ambient <= 12 supported")
    cols = [[subspace.basis[k][j] for k in range(r)] for j in range(n)]  # column view

    best_reason = "no index set J makes the row sums at most 1"
    for J in combinations(range(n), r):
        bj = [[subspace.basis[k][j] for j in J] for k in range(r)]  # r x r
        try:
            inv = xl.mat_inv(bj)
        except ValueError:
            continue
        # normalized basis: rows of inv @ basis give v_k = e_{j_k} + sum c_{m,j_k} e_m
        norm_rows = xl.mat_mul(inv, subspace.basis)
        ok = True
        coeffs = {}
        for m in range(n):
            if m in J:
                continue
            col = [norm_rows[k][m] for k in range(r)]
            for k, jk in enumerate(J):
                coeffs[(m, jk)] = col[k]
            exact = _abs_row_sum_le_one(col)
            if exact is None:
                s = sum(abs(complex(c)) for c in col)
                exact = s <= 1.0 + 1e-12
            if not exact:
                ok = False
                break
        if not ok:
            continue
        # build the retraction F_i = z_i for i in J, else the row combination
        mat = [[EC_ZERO] * n for _ in range(n)]
        for i in J:
            mat[i][i] = EC_ONE
        for m in range(n):
            if m in J:
                continue
            for k, jk in enumerate(J):
                mat[m][jk] = norm_rows[k][m]
        proj = LinearProjection(None, exact=mat)
        return PolydiscVerdict(True, index_set=J, coefficients=coeffs,
                               retraction=proj.as_polymap(), projection=proj)
    return PolydiscVerdict(False, reason=best_reason)


def linfty_isometry(subspace: LinearSubspace, verdict: PolydiscVerdict):
    """The J-coordinate restriction: an isometry of (L, max-norm) onto C^k.

    Returns a function mapping ambient vectors of L to their J-coordinates.
    """
    if not verdict.accepted:
        raise ValueError("polydisc test was not passed")
    J = list(verdict.index_set)

    def s(vec):
        vec = np.asarray(vec, dtype=np.complex128)
        return vec[..., J]

    return s


# ---------------------------------------------------------------------------
# operator norm estimation
# ---------------------------------------------------------------------------

def _dual_exponent(p):
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _sign(v):
    a = np.abs(v)
    return np.where(a > 0, v / np.where(a > 0, a, 1.0), 0.0)


def sampled_operator_norm(projection, p, nsamples=2048, seed=0, ascent_iters=40) -> float:
    """Lower bound for the p -> p operator norm.

    p = 1 and p = inf use the exact column/row absolute-sum formulas; other p
    combine seeded unit-sphere samples with the power-type ascent
    x <- J_q(A^H J_p(A x)), which never decreases the Rayleigh ratio.
    """
    A = projection.matrix if isinstance(projection, LinearProjection) else \
        np.asarray(projection, dtype=np.complex128)
    if p == 1:
        return float(np.max(np.sum(np.abs(A), axis=0)))
    if np.isinf(p):
        return float(np.max(np.sum(np.abs(A), axis=1)))
    rng = rng_from(seed)
    n = A.shape[1]
    x = sample_unit_p_sphere(rng, n, max(1, nsamples), p)
    x = np.vstack([x, np.eye(n, dtype=np.complex128)])

    def ratio(xs):
        num = np.sum(np.abs(xs @ A.T) ** p, axis=1) ** (1.0 / p)
        den = np.sum(np.abs(xs) ** p, axis=1) ** (1.0 / p)
        return num / np.where(den > 0, den, 1.0)

    best = float(np.max(ratio(x)))
    # refine the best few candidates by the p-norm power iteration
    idx = np.argsort(ratio(x))[-8:]
    q = _dual_exponent(p)
    for i in idx:
        xi = x[i].copy()
        for _ in range(ascent_iters):
            y = A @ xi
            if not np.any(y):
                break
            jp = _sign(y) * np.abs(y) ** (p - 1.0)
            g = A.conj().T @ jp
            if not np.any(g):
                break
            xi = _sign(g) * np.abs(g) ** (q - 1.0)
            nrm = np.sum(np.abs(xi) ** p) ** (1.0 / p)
            xi /= nrm
        best = max(best, float(ratio(xi[None, :])[0]))
    return best


def tangent_projection(f: PolyMap, domain=None, nsamples=2048, seed=0,
                       tol=1e-9) -> LinearProjection:
    """Degree-1 part of an idempotent map fixing 0, as an exact projection.

    The derivative of a retraction at a fixed point is itself a projection
    and maps the domain into itself; the latter is probed on samples when a
    domain is supplied.
    """
    from .retraction import verify_idempotent

    const = f.constant_part()
    if any(not c.is_zero() for c in const):
        raise ValueError("map must fix the origin")
    if not verify_idempotent(f):
        raise ValueError("map is not idempotent")
    a = f.linear_part_matrix()
    if not xl.is_idempotent(a):
        raise ValueError("derivative at 0 is not idempotent: not a retraction")
    proj = LinearProjection(None, exact=a)
    if domain is not None:
        from .domains import minkowski_batch
        from .sampling import sample_interior
        pts = sample_interior(domain, rng_from(seed), nsamples)
        imgs = pts @ proj.matrix.T
        h = minkowski_batch(domain, imgs)
        if np.max(h) > 1.0 + tol:
            raise ValueError("derivative fails to map the domain into itself")
    return proj
