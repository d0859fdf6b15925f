"""Exact multivariate polynomials over complex rationals.

Coefficients are pairs of ``fractions.Fraction`` (real and imaginary part),
so equality of polynomials and of polynomial maps is exact.  All symbolic
machinery downstream (idempotency certificates, straightening chains, ring
retract generators) rests on this module; floating shadows for the numeric
probes are produced on demand by :meth:`MultiPoly.float_data`.

Text grammar (``parse_poly`` / ``format_poly``, bit-exact round trip):
variables ``z1..zN`` with aliases ``z, w`` when N == 2, integer or rational
coefficients, ``i`` for the imaginary unit, ``^`` for powers, e.g.
``(1/2+3i)*z^2*w - w^3``.
"""

from __future__ import annotations

import re as _re
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from ._kernels import poly_eval_batch

_EXACT_KINDS = (int, Fraction)


class ExactComplex:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def of(value) -> "ExactComplex":
        if isinstance(value, ExactComplex):
            return value
        if isinstance(value, _EXACT_KINDS):
            return ExactComplex(value)
        if isinstance(value, float):
            return ExactComplex(Fraction(value))
        if isinstance(value, complex):
            # floats are dyadic rationals, so this is exact
            return ExactComplex(Fraction(value.real), Fraction(value.imag))
        raise TypeError(f"cannot convert {type(value).__name__} to ExactComplex")

    def __add__(self, other):
        other = ExactComplex.of(other)
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-ExactComplex.of(other))

    def __rsub__(self, other):
        return ExactComplex.of(other) + (-self)

    def __mul__(self, other):
        other = ExactComplex.of(other)
        return ExactComplex(self.re * other.re - self.im * other.im,
                            self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = ExactComplex.of(other)
        d = other.abs2()
        if d == 0:
            raise ZeroDivisionError("division by exact zero")
        return ExactComplex((self.re * other.re + self.im * other.im) / d,
                            (other.re * self.im - other.im * self.re) / d)

    def __rtruediv__(self, other):
        return ExactComplex.of(other) / self

    def conj(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            other = ExactComplex.of(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"ExactComplex({self.re!r}, {self.im!r})"

    def __str__(self):
        return _format_coeff(self, bare=True)


EC_ZERO = ExactComplex(0)
EC_ONE = ExactComplex(1)
EC_I = ExactComplex(0, 1)


def exact_sqrt(x: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn = _isqrt_exact(n)
    rd = _isqrt_exact(d)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


def _isqrt_exact(n: int) -> Optional[int]:
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


class MultiPoly:
    """Sparse polynomial: exponent tuple -> ExactComplex, no zero terms."""

    __slots__ = ("nvars", "terms", "_float_cache")

    def __init__(self, nvars: int, terms=None):
        self.nvars = int(nvars)
        clean = {}
        if terms:
            for exp, c in terms.items():
                c = ExactComplex.of(c)
                if c.is_zero():
                    continue
                exp = tuple(int(e) for e in exp)
                if len(exp) != self.nvars or any(e < 0 for e in exp):
                    raise ValueError(f"bad exponent vector {exp} for nvars={self.nvars}")
                clean[exp] = c
        self.terms = clean
        self._float_cache = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> "MultiPoly":
        return MultiPoly(nvars, {})

    @staticmethod
    def constant(nvars: int, c) -> "MultiPoly":
        return MultiPoly(nvars, {(0,) * nvars: ExactComplex.of(c)})

    @staticmethod
    def variable(nvars: int, k: int) -> "MultiPoly":
        exp = tuple(1 if j == k else 0 for j in range(nvars))
        return MultiPoly(nvars, {exp: EC_ONE})

    @staticmethod
    def monomial(nvars: int, exp: Sequence[int], c=1) -> "MultiPoly":
        return MultiPoly(nvars, {tuple(exp): ExactComplex.of(c)})

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            s = terms.get(exp, EC_ZERO) + c
            if s.is_zero():
                terms.pop(exp, None)
            else:
                terms[exp] = s
        return MultiPoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                p = c1 * c2
                s = terms.get(e)
                s = p if s is None else s + p
                if s.is_zero():
                    terms.pop(e, None)
                else:
                    terms[e] = s
        return MultiPoly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise ValueError("nvars mismatch")
            return other
        return MultiPoly.constant(self.nvars, other)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- structure -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> Optional[int]:
        """Total degree; None is the sentinel for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def var_degree(self, k: int) -> int:
        if not self.terms:
            return 0
        return max(e[k] for e in self.terms)

    def coeff(self, exp: Sequence[int]) -> ExactComplex:
        return self.terms.get(tuple(exp), EC_ZERO)

    def homogeneous_part(self, d: int) -> "MultiPoly":
        return MultiPoly(self.nvars,
                         {e: c for e, c in self.terms.items() if sum(e) == d})

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def partial(self, k: int) -> "MultiPoly":
        terms = {}
        for e, c in self.terms.items():
            if e[k] == 0:
                continue
            de = list(e)
            de[k] -= 1
            terms[tuple(de)] = c * e[k]
        return MultiPoly(self.nvars, terms)

    def conj_coeffs(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: c.conj() for e, c in self.terms.items()})

    def l1_coeff_bound(self) -> Fraction:
        s = Fraction(0)
        for c in self.terms.values():
            s += abs(c.re) + abs(c.im)
        return s

    # -- evaluation -----------------------------------------------------------

    def eval_exact(self, point: Sequence) -> ExactComplex:
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        pt = [ExactComplex.of(v) for v in point]
        acc = EC_ZERO
        for e, c in self.terms.items():
            term = c
            for k, ek in enumerate(e):
                for _ in range(ek):
                    term = term * pt[k]
            acc = acc + term
        return acc

    def float_data(self):
        if self._float_cache is None:
            if self.terms:
                items = sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]))
                exps = np.array([e for e, _ in items], dtype=np.int64)
                coefs = np.array([complex(c) for _, c in items], dtype=np.complex128)
            else:
                exps = np.zeros((0, self.nvars), dtype=np.int64)
                coefs = np.zeros(0, dtype=np.complex128)
            self._float_cache = (coefs, exps)
        return self._float_cache

    def eval_float(self, point) -> complex:
        coefs, exps = self.float_data()
        pts = np.asarray(point, dtype=np.complex128).reshape(1, self.nvars)
        return complex(poly_eval_batch(coefs, exps, pts)[0])

    def eval_batch(self, pts: np.ndarray) -> np.ndarray:
        """Floating evaluation on an (M, nvars) complex array."""
        coefs, exps = self.float_data()
        pts = np.ascontiguousarray(pts, dtype=np.complex128)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if coefs.shape[0] == 0:
            return np.zeros(pts.shape[0], dtype=np.complex128)
        return poly_eval_batch(coefs, exps, pts)

    def substitute(self, maps: Sequence["MultiPoly"]) -> "MultiPoly":
        """Exact substitution of one polynomial per variable."""
        if len(maps) != self.nvars:
            raise ValueError("substitution needs one polynomial per variable")
        if not maps:
            raise ValueError("empty substitution")
        nv = maps[0].nvars
        if any(m.nvars != nv for m in maps):
            raise ValueError("substitution polynomials disagree on nvars")
        powers = [{0: MultiPoly.constant(nv, 1)} for _ in range(self.nvars)]

        def power(k, n):
            cache = powers[k]
            if n not in cache:
                half = power(k, n // 2)
                p = half * half
                if n & 1:
                    p = p * maps[k]
                cache[n] = p
            return cache[n]

        acc = MultiPoly.zero(nv)
        for e, c in self.terms.items():
            term = MultiPoly.constant(nv, c)
            for k, ek in enumerate(e):
                if ek:
                    term = term * power(k, ek)
            acc = acc + term
        return acc

    def __repr__(self):
        return f"MultiPoly({self.nvars}, {format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def _grlex_key(exp):
    # graded lexicographic, descending in printing
    return (-sum(exp),) + tuple(-e for e in exp)


class HomogeneousDecomposition:
    """Homogeneous constituents of a polynomial, indexed by degree."""

    def __init__(self, poly: MultiPoly):
        self.nvars = poly.nvars
        parts = {}
        for e, c in poly.terms.items():
            parts.setdefault(sum(e), {})[e] = c
        self.parts = {d: MultiPoly(poly.nvars, t) for d, t in sorted(parts.items())}

    def part(self, d: int) -> MultiPoly:
        return self.parts.get(d, MultiPoly.zero(self.nvars))

    def degrees(self):
        return sorted(self.parts)

    def sum(self) -> MultiPoly:
        acc = MultiPoly.zero(self.nvars)
        for p in self.parts.values():
            acc = acc + p
        return acc


def homogeneous_parts(poly: MultiPoly) -> HomogeneousDecomposition:
    return HomogeneousDecomposition(poly)


def poly_gradient(poly: MultiPoly) -> list[MultiPoly]:
    return [poly.partial(k) for k in range(poly.nvars)]


def proportionality_test(p: MultiPoly, q: MultiPoly) -> Optional[ExactComplex]:
    """Exact scalar c with q == c*p, if one exists.

    Returns c (including 0 when q == 0, p != 0); None when no scalar works.
    Raises on the indeterminate case p == q == 0.
    """
    if p.nvars != q.nvars:
        raise ValueError("nvars mismatch")
    if p.is_zero() and q.is_zero():
        raise ValueError("proportionality of two zero polynomials is indeterminate")
    if p.is_zero():
        return None
    if q.is_zero():
        return EC_ZERO
    exp0, c0 = next(iter(p.terms.items()))
    lam = q.coeff(exp0) / c0
    return lam if (q - p * lam).is_zero() else None


class PolyMap:
    """Tuple of polynomials viewed as a map C^n -> C^m."""

    __slots__ = ("domain_dim", "components")

    def __init__(self, components: Iterable[MultiPoly]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a polynomial map needs at least one component")
        self.domain_dim = comps[0].nvars
        if any(c.nvars != self.domain_dim for c in comps):
            raise ValueError("all components must share nvars")
        self.components = comps

    @staticmethod
    def identity(n: int) -> "PolyMap":
        return PolyMap([MultiPoly.variable(n, k) for k in range(n)])

    @property
    def codomain_dim(self) -> int:
        return len(self.components)

    def is_square(self) -> bool:
        return self.codomain_dim == self.domain_dim

    @property
    def degree(self) -> Optional[int]:
        degs = [c.degree for c in self.components if c.degree is not None]
        return max(degs) if degs else None

    def eval_exact(self, point):
        return tuple(c.eval_exact(point) for c in self.components)

    def eval_batch(self, pts: np.ndarray) -> np.ndarray:
        cols = [c.eval_batch(pts) for c in self.components]
        return np.stack(cols, axis=1)

    def linear_part_matrix(self):
        """Degree-1 coefficients as a list of rows of ExactComplex."""
        rows = []
        for comp in self.components:
            row = []
            for k in range(self.domain_dim):
                exp = tuple(1 if j == k else 0 for j in range(self.domain_dim))
                row.append(comp.coeff(exp))
            rows.append(row)
        return rows

    def constant_part(self):
        zero = (0,) * self.domain_dim
        return tuple(c.coeff(zero) for c in self.components)

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return "PolyMap(" + ", ".join(format_poly(c) for c in self.components) + ")"


def poly_compose(f: PolyMap, g: PolyMap) -> PolyMap:
    """Exact composition f ∘ g."""
    if f.domain_dim != g.codomain_dim:
        raise ValueError(
            f"cannot compose: f takes {f.domain_dim} inputs, g produces {g.codomain_dim}")
    return PolyMap([c.substitute(list(g.components)) for c in f.components])


# ---------------------------------------------------------------------------
# text grammar
# ---------------------------------------------------------------------------

_TOKEN = _re.compile(r"\s*(?:(\d+)|(z\d*|w)|(\^)|(\*)|(\+)|(-)|(\()|(\))|(/)|(i))")


class PolyParseError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class _Parser:
    def __init__(self, text: str, nvars: Optional[int]):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._tokenize()
        self.idx = 0
        self.max_var = 0
        self.declared_nvars = nvars

    def _tokenize(self):
        pos = 0
        text = self.text
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == m.start():
                if text[pos:].strip() == "":
                    break
                raise PolyParseError(f"unexpected character {text[pos]!r}", pos)
            groups = m.groups()
            for kind, val in enumerate(groups):
                if val is not None:
                    self.tokens.append((kind, val, m.start()))
                    break
            pos = m.end()

    def peek(self):
        return self.tokens[self.idx] if self.idx < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise PolyParseError("unexpected end of input", len(self.text))
        self.idx += 1
        return tok

    # expression := term (('+'|'-') term)*
    def expression(self, nv):
        node = self.term(nv)
        while True:
            tok = self.peek()
            if tok and tok[1] in "+-":
                self.take()
                rhs = self.term(nv)
                node = node + rhs if tok[1] == "+" else node - rhs
            else:
                return node

    # term := factor ('*' factor)*
    def term(self, nv):
        node = self.factor(nv)
        while True:
            tok = self.peek()
            if tok and tok[1] == "*":
                self.take()
                node = node * self.factor(nv)
            else:
                return node

    # factor := ['-'] power
    def factor(self, nv):
        tok = self.peek()
        if tok and tok[1] == "-":
            self.take()
            return -self.factor(nv)
        if tok and tok[1] == "+":
            self.take()
            return self.factor(nv)
        return self.power(nv)

    # power := atom ['^' integer]
    def power(self, nv):
        node = self.atom(nv)
        tok = self.peek()
        if tok and tok[1] == "^":
            self.take()
            etok = self.take()
            if etok[0] != 0:
                raise PolyParseError("exponent must be a nonnegative integer", etok[2])
            node = node ** int(etok[1])
        return node

    # atom := number ['/' number] ['i'] | 'i' | variable | '(' expression ')'
    def atom(self, nv):
        tok = self.take()
        kind, val, at = tok
        if kind == 0:  # number
            num = Fraction(int(val))
            nxt = self.peek()
            if nxt and nxt[1] == "/":
                self.take()
                den = self.take()
                if den[0] != 0:
                    raise PolyParseError("denominator must be an integer", den[2])
                num /= int(den[1])
            nxt = self.peek()
            if nxt and nxt[1] == "i":
                self.take()
                return MultiPoly.constant(nv, ExactComplex(0, num))
            return MultiPoly.constant(nv, ExactComplex(num))
        if kind == 9:  # bare i
            return MultiPoly.constant(nv, EC_I)
        if kind == 1:  # variable
            k = self._var_index(val, at, nv)
            return MultiPoly.variable(nv, k)
        if kind == 6:  # '('
            node = self.expression(nv)
            closing = self.take()
            if closing[1] != ")":
                raise PolyParseError("expected ')'", closing[2])
            return node
        raise PolyParseError(f"unexpected token {val!r}", at)

    def _var_index(self, name, at, nv):
        if name == "z":
            k = 0
        elif name == "w":
            k = 1
        else:
            k = int(name[1:]) - 1
        if k < 0 or k >= nv:
            raise PolyParseError(f"variable {name!r} out of range for {nv} variables", at)
        return k


def _scan_nvars(text: str) -> int:
    nv = 1
    for m in _re.finditer(r"[zw]\d*", text):
        name = m.group(0)
        if name == "w":
            nv = max(nv, 2)
        elif name == "z":
            nv = max(nv, 1)
        else:
            nv = max(nv, int(name[1:]))
    return nv


def parse_poly(text: str, nvars: Optional[int] = None) -> MultiPoly:
    nv = nvars if nvars is not None else _scan_nvars(text)
    parser = _Parser(text, nvars)
    node = parser.expression(nv)
    if parser.peek() is not None:
        tok = parser.peek()
        raise PolyParseError(f"trailing input {tok[1]!r}", tok[2])
    return node


def parse_map(lines: Sequence[str] | str, nvars: Optional[int] = None) -> PolyMap:
    """One component per line (or an iterable of strings)."""
    if isinstance(lines, str):
        lines = [ln for ln in lines.splitlines() if ln.strip()]
    if nvars is None:
        # default to a self-map: at least as many variables as components
        nvars = max(max(_scan_nvars(ln) for ln in lines), len(lines))
    return PolyMap([parse_poly(ln, nvars) for ln in lines])


def _format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _format_coeff(c: ExactComplex, bare=False) -> str:
    re_, im = c.re, c.im
    if im == 0:
        return _format_fraction(re_)
    if re_ == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        return f"{_format_fraction(im)}i"
    im_str = f"{_format_fraction(abs(im))}i" if abs(im) != 1 else "i"
    sign = "+" if im > 0 else "-"
    body = f"{_format_fraction(re_)}{sign}{im_str}"
    return body if bare else f"({body})"


def _format_monomial(exp, nvars) -> str:
    names = ["z", "w"] if nvars == 2 else [f"z{k + 1}" for k in range(nvars)]
    if nvars == 1:
        names = ["z"]
    parts = []
    for k, e in enumerate(exp):
        if e == 0:
            continue
        parts.append(names[k] if e == 1 else f"{names[k]}^{e}")
    return "*".join(parts)


def format_poly(p: MultiPoly) -> str:
    """Canonical printing: graded-lex term order, round-trips exactly."""
    if not p.terms:
        return "0"
    items = sorted(p.terms.items(), key=lambda t: _grlex_key(t[0]))
    chunks = []
    for exp, c in items:
        mono = _format_monomial(exp, p.nvars)
        if not mono:
            chunks.append(_format_coeff(c))
            continue
        if c == EC_ONE:
            chunks.append(mono)
        elif c == -EC_ONE:
            chunks.append(f"-{mono}")
        else:
            chunks.append(f"{_format_coeff(c)}*{mono}")
    out = chunks[0]
    for chunk in chunks[1:]:
        if chunk.startswith("-") and not chunk.startswith("-("):
            out += " - " + chunk[1:]
        else:
            out += " + " + chunk
    return out


def format_map(f: PolyMap) -> str:
    return "\n".join(format_poly(c) for c in f.components)
