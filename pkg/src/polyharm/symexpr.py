"""Exact symbolic algebra for finite sums of ``c * x^beta * |x|^q * log^p(5/|x|)``.

This family is closed under partial differentiation, so it can represent
the polyharmonic kernels, all their derivatives, and every sign object the
verification harness manipulates.  Coefficients are exact rationals; the
transcendental normalization constant of a fundamental solution is kept
*outside* this algebra (see ``polyharm.fundsol``) so that identities like
"the m-th Laplacian iterate vanishes off the origin" are decidable exactly.

Canonical form
--------------
``|x|^2`` equals the polynomial ``sum x_i^2``, so raw term lists are not
unique.  ``canonicalize`` rewrites each log-power group as

    (A(x) + B(x) * |x|) * |x|^{q0},   q0 even, q0 <= 0,

where even powers of ``|x|`` are folded into the polynomials ``A`` and
``B``; when ``q0 < 0``, ``A`` and ``B`` are not both divisible by
``sum x_i^2``.  This representation is unique, which gives an exact zero
test: an expression vanishes on a punctured ball iff every ``A`` and ``B``
is the zero polynomial.

A one-dimensional companion algebra (``RadialLogExpr``, terms
``c * r^q * log^p``) handles purely radial gauges, including the exterior
gauge whose log factor is ``log(5r)`` rather than ``log(5/r)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "SymTerm",
    "SymExpr",
    "Sign",
    "ExactValue",
    "RadialTerm",
    "RadialLogExpr",
    "LOG_INV",
    "LOG_MUL",
    "differentiate",
    "multi_derivative",
    "laplacian",
    "laplacian_iter",
    "canonicalize",
    "is_zero",
    "exprs_equal",
    "evaluate",
    "evaluate_exact",
    "eval_batch",
    "radial_sign",
    "multiply",
    "render",
    "iter_multi_indices",
    "multi_index_order",
    "multi_index_factorial",
]

MIN_RADIUS = 1e-300  # below this, r**q / log(5/r) arithmetic is meaningless


# ---------------------------------------------------------------------------
# multi-index helpers

Mono = tuple  # tuple[int, ...] of length dim


def multi_index_order(beta: Sequence[int]) -> int:
    return int(sum(beta))


def multi_index_factorial(beta: Sequence[int]) -> int:
    out = 1
    for b in beta:
        out *= math.factorial(b)
    return out


def iter_multi_indices(dim: int, max_order: int) -> Iterator[tuple[int, ...]]:
    """Yield all multi-indices of length ``dim`` with order <= ``max_order``."""
    if max_order < 0:
        return
    if dim == 0:
        yield ()
        return

    def rec(prefix: tuple[int, ...], remaining: int, axes_left: int):
        if axes_left == 1:
            for v in range(remaining + 1):
                yield prefix + (v,)
            return
        for v in range(remaining + 1):
            yield from rec(prefix + (v,), remaining - v, axes_left - 1)

    # enumerate by total order so tables are built lowest order first
    for order in range(max_order + 1):
        for idx in rec((), order, dim):
            if sum(idx) == order:
                yield idx


# ---------------------------------------------------------------------------
# terms and expressions


@dataclass(frozen=True)
class SymTerm:
    """One term ``coeff * x^mono * |x|^radial_power * log(5/|x|)^log_power``."""

    coeff: Fraction
    mono: tuple
    radial_power: int
    log_power: int


class SymExpr:
    """Finite sum of :class:`SymTerm` in a fixed ambient dimension."""

    __slots__ = ("terms", "dim", "canonical", "_table")

    def __init__(self, terms: Iterable[SymTerm], dim: int, canonical: bool = False):
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        tl = []
        for t in terms:
            if len(t.mono) != dim:
                raise ValueError("multi-index length does not match dimension")
            if t.log_power < 0:
                raise ValueError("log power must be nonnegative")
            if t.coeff != 0:
                tl.append(t)
        self.terms = tuple(tl)
        self.dim = dim
        self.canonical = canonical
        self._table = None

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_terms(raw: Iterable[tuple], dim: int) -> "SymExpr":
        """Build from ``(coeff, mono, radial_power, log_power)`` tuples."""
        return SymExpr(
            (
                SymTerm(Fraction(c), tuple(mono), int(q), int(p))
                for c, mono, q, p in raw
            ),
            dim,
        )

    @staticmethod
    def zero(dim: int) -> "SymExpr":
        return SymExpr((), dim, canonical=True)

    @staticmethod
    def constant(c, dim: int) -> "SymExpr":
        return SymExpr.from_terms([(c, (0,) * dim, 0, 0)], dim)

    @staticmethod
    def monomial(c, mono: Sequence[int], dim: int) -> "SymExpr":
        return SymExpr.from_terms([(c, tuple(mono), 0, 0)], dim)

    @staticmethod
    def radial(c, q: int, p: int, dim: int) -> "SymExpr":
        """``c * |x|^q * log(5/|x|)^p``."""
        return SymExpr.from_terms([(c, (0,) * dim, q, p)], dim)

    # -- arithmetic ----------------------------------------------------

    def _check_dim(self, other: "SymExpr") -> None:
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")

    def __add__(self, other: "SymExpr") -> "SymExpr":
        self._check_dim(other)
        return SymExpr(_merge_terms(self.terms + other.terms), self.dim)

    def __sub__(self, other: "SymExpr") -> "SymExpr":
        return self + (-other)

    def __neg__(self) -> "SymExpr":
        return self.scale(-1)

    def scale(self, c) -> "SymExpr":
        c = Fraction(c)
        return SymExpr(
            (SymTerm(t.coeff * c, t.mono, t.radial_power, t.log_power) for t in self.terms),
            self.dim,
            canonical=self.canonical and c != 0,
        )

    def __mul__(self, other):
        if isinstance(other, SymExpr):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    # -- evaluation sugar ----------------------------------------------

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        return eval_batch(self, points)

    def as_batch_callable(self) -> Callable[[np.ndarray], np.ndarray]:
        return lambda pts: eval_batch(self, pts)

    # -- misc ------------------------------------------------------------

    def table(self):
        """Numeric term table ``(coeffs, monos, rpows, lpows)`` (cached)."""
        if self._table is None:
            k = len(self.terms)
            coeffs = np.empty(k, dtype=np.float64)
            monos = np.zeros((k, self.dim), dtype=np.int64)
            rpows = np.zeros(k, dtype=np.int64)
            lpows = np.zeros(k, dtype=np.int64)
            for i, t in enumerate(self.terms):
                coeffs[i] = float(t.coeff)
                monos[i, :] = t.mono
                rpows[i] = t.radial_power
                lpows[i] = t.log_power
            self._table = (coeffs, monos, rpows, lpows)
        return self._table

    def __eq__(self, other) -> bool:
        # structural equality; use exprs_equal for mathematical equality
        return (
            isinstance(other, SymExpr)
            and self.dim == other.dim
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.dim, self.terms))

    def __repr__(self) -> str:
        return f"SymExpr({render(self)!r}, dim={self.dim})"


def _merge_terms(terms: Iterable[SymTerm]) -> list[SymTerm]:
    acc: dict[tuple, Fraction] = {}
    for t in terms:
        key = (t.mono, t.radial_power, t.log_power)
        acc[key] = acc.get(key, Fraction(0)) + t.coeff
    return [
        SymTerm(c, mono, q, p)
        for (mono, q, p), c in sorted(acc.items())
        if c != 0
    ]


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e: SymExpr, axis: int) -> SymExpr:
    """Exact partial derivative along ``axis`` (1-based, 1 <= axis <= dim)."""
    if not 1 <= axis <= e.dim:
        raise ValueError(f"axis {axis} out of range for dimension {e.dim}")
    i = axis - 1
    out: list[SymTerm] = []
    for t in e.terms:
        c, mono, q, p = t.coeff, t.mono, t.radial_power, t.log_power
        if mono[i] > 0:
            lowered = mono[:i] + (mono[i] - 1,) + mono[i + 1 :]
            out.append(SymTerm(c * mono[i], lowered, q, p))
        raised = mono[:i] + (mono[i] + 1,) + mono[i + 1 :]
        if q != 0:
            out.append(SymTerm(c * q, raised, q - 2, p))
        if p > 0:
            out.append(SymTerm(-c * p, raised, q - 2, p - 1))
    return SymExpr(_merge_terms(out), e.dim)


def multi_derivative(e: SymExpr, beta: Sequence[int]) -> SymExpr:
    """Mixed partial ``D^beta e`` (result independent of axis order)."""
    if len(beta) != e.dim:
        raise ValueError("multi-index length does not match dimension")
    out = e
    for axis0, k in enumerate(beta):
        if k < 0:
            raise ValueError("multi-index entries must be nonnegative")
        for _ in range(k):
            out = differentiate(out, axis0 + 1)
    return out


def laplacian(e: SymExpr) -> SymExpr:
    acc = SymExpr.zero(e.dim)
    for axis in range(1, e.dim + 1):
        acc = acc + differentiate(differentiate(e, axis), axis)
    return canonicalize(acc)


def laplacian_iter(e: SymExpr, sigma: int) -> SymExpr:
    """Exact ``sigma``-fold Laplacian iterate; ``sigma = 0`` is the identity."""
    if sigma < 0:
        raise ValueError("iterate count must be nonnegative")
    out = e
    for _ in range(sigma):
        out = laplacian(out)
    return out


# ---------------------------------------------------------------------------
# canonical form

# polynomials are dicts mono -> Fraction


def _poly_add_term(poly: dict, mono: tuple, coeff: Fraction) -> None:
    c = poly.get(mono, Fraction(0)) + coeff
    if c:
        poly[mono] = c
    else:
        poly.pop(mono, None)


def _poly_mul_sumsq(poly: dict, dim: int) -> dict:
    out: dict[tuple, Fraction] = {}
    for mono, c in poly.items():
        for i in range(dim):
            raised = mono[:i] + (mono[i] + 2,) + mono[i + 1 :]
            _poly_add_term(out, raised, c)
    return out


def _poly_div_sumsq(poly: dict, dim: int) -> dict | None:
    """Exact quotient ``poly / sum x_i^2`` or None when not divisible."""
    rem = dict(poly)
    quot: dict[tuple, Fraction] = {}
    while rem:
        lead = max(rem)  # lex order; leading monomial of sum x_i^2 is x_1^2
        if lead[0] < 2:
            return None
        c = rem[lead]
        qmono = (lead[0] - 2,) + lead[1:]
        _poly_add_term(quot, qmono, c)
        for i in range(dim):
            raised = qmono[:i] + (qmono[i] + 2,) + qmono[i + 1 :]
            _poly_add_term(rem, raised, -c)
    return quot


def canonicalize(e: SymExpr) -> SymExpr:
    """Fold even radial powers into polynomials; unique form, idempotent."""
    if e.canonical:
        return e
    groups: dict[int, list[SymTerm]] = {}
    for t in _merge_terms(e.terms):
        groups.setdefault(t.log_power, []).append(t)

    out: list[SymTerm] = []
    for p, terms in groups.items():
        qmin = min(t.radial_power for t in terms)
        q0 = 0 if qmin >= 0 else 2 * (qmin // 2)
        poly_a: dict[tuple, Fraction] = {}
        poly_b: dict[tuple, Fraction] = {}
        for t in terms:
            diff = t.radial_power - q0
            half, odd = divmod(diff, 2)
            target = poly_b if odd else poly_a
            expanded = {t.mono: t.coeff}
            for _ in range(half):
                expanded = _poly_mul_sumsq(expanded, e.dim)
            for mono, c in expanded.items():
                _poly_add_term(target, mono, c)
        while q0 < 0 and (poly_a or poly_b):
            div_a = _poly_div_sumsq(poly_a, e.dim) if poly_a else {}
            if div_a is None:
                break
            div_b = _poly_div_sumsq(poly_b, e.dim) if poly_b else {}
            if div_b is None:
                break
            poly_a, poly_b = div_a, div_b
            q0 += 2
        for mono, c in poly_a.items():
            out.append(SymTerm(c, mono, q0, p))
        for mono, c in poly_b.items():
            out.append(SymTerm(c, mono, q0 + 1, p))

    out.sort(key=lambda t: (t.log_power, t.radial_power, t.mono))
    return SymExpr(out, e.dim, canonical=True)


def is_zero(e: SymExpr) -> bool:
    """Exact: true iff ``e`` vanishes identically on any punctured ball."""
    return not canonicalize(e).terms


def exprs_equal(e1: SymExpr, e2: SymExpr) -> bool:
    return is_zero(e1 - e2)


def multiply(e1: SymExpr, e2: SymExpr) -> SymExpr:
    e1._check_dim(e2)
    out = []
    for s in e1.terms:
        for t in e2.terms:
            mono = tuple(a + b for a, b in zip(s.mono, t.mono))
            out.append(
                SymTerm(
                    s.coeff * t.coeff,
                    mono,
                    s.radial_power + t.radial_power,
                    s.log_power + t.log_power,
                )
            )
    return SymExpr(_merge_terms(out), e1.dim)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: SymExpr, x) -> float:
    """Float evaluation at a single point ``x != 0``."""
    xv = [float(v) for v in x]
    if len(xv) != e.dim:
        raise ValueError("point length does not match dimension")
    r2 = math.fsum(v * v for v in xv)
    r = math.sqrt(r2)
    if r < MIN_RADIUS:
        raise ValueError("evaluation at the origin is undefined for this algebra")
    logl = math.log(5.0 / r)
    total = 0.0
    for t in e.terms:
        v = float(t.coeff)
        for xi, b in zip(xv, t.mono):
            for _ in range(b):
                v *= xi
        if t.radial_power:
            v *= r ** float(t.radial_power)
        for _ in range(t.log_power):
            v *= logl
        total += v
    return total


@dataclass(frozen=True)
class ExactValue:
    """Exact evaluation result: per log-power ``alpha + gamma * sqrt(s)``.

    ``s`` is the exact squared radius.  Only the final combination with the
    transcendental ``log(5/sqrt(s))`` rounds to float.
    """

    s: Fraction
    parts: tuple  # ((log_power, alpha, gamma), ...) sorted by log_power

    @staticmethod
    def _sqrt_if_perfect(s: Fraction) -> Fraction | None:
        num, den = s.numerator, s.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn == num and rd * rd == den:
            return Fraction(rn, rd)
        return None

    @staticmethod
    def build(s: Fraction, raw_parts: dict) -> "ExactValue":
        root = ExactValue._sqrt_if_perfect(s)
        cleaned = []
        for p in sorted(raw_parts):
            alpha, gamma = raw_parts[p]
            if root is not None:
                alpha, gamma = alpha + gamma * root, Fraction(0)
            if p >= 1 and root == 5:
                continue  # log(5/sqrt(s)) == 0 exactly
            if alpha == 0 and gamma == 0:
                continue
            cleaned.append((p, alpha, gamma))
        return ExactValue(s, tuple(cleaned))

    def to_float(self) -> float:
        rs = math.sqrt(self.s)
        logl = math.log(5.0 / rs)
        total = 0.0
        for p, alpha, gamma in self.parts:
            total += (float(alpha) + float(gamma) * rs) * logl**p
        return total


def evaluate_exact(e: SymExpr, x: Sequence) -> ExactValue:
    """Exact evaluation at a rational point (coordinates coerced to Fraction)."""
    xv = [Fraction(v) for v in x]
    if len(xv) != e.dim:
        raise ValueError("point length does not match dimension")
    s = sum(v * v for v in xv)
    if s == 0:
        raise ValueError("evaluation at the origin is undefined for this algebra")
    parts: dict[int, list[Fraction]] = {}
    for t in e.terms:
        v = t.coeff
        for xi, b in zip(xv, t.mono):
            v *= xi**b
        slot = parts.setdefault(t.log_power, [Fraction(0), Fraction(0)])
        half, odd = divmod(t.radial_power, 2)
        if odd:
            slot[1] += v * s**half
        else:
            slot[0] += v * s**half
    return ExactValue.build(s, parts)


def eval_batch(e: SymExpr, points: np.ndarray) -> np.ndarray:
    """Evaluate at an (N, dim) batch of nonzero points via the hot kernel."""
    from . import _kernels

    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != e.dim:
        raise ValueError("points must have shape (N, dim)")
    if not e.terms:
        return np.zeros(pts.shape[0])
    return _kernels.eval_term_table(pts, *e.table())


# ---------------------------------------------------------------------------
# sign classification


class Sign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    ZERO = "zero"
    MIXED = "mixed/unknown"


def radial_sign(e: SymExpr) -> Sign:
    """Sign of a single-term radial expression, else ``MIXED``.

    For ``c * |x|^q * log^p(5/|x|)`` with p >= 1 the sign is valid on
    0 < |x| < 1 (indeed < 5); with p = 0 it is valid on all x != 0.
    """
    ce = canonicalize(e)
    if not ce.terms:
        return Sign.ZERO
    if len(ce.terms) == 1:
        t = ce.terms[0]
        if all(b == 0 for b in t.mono):
            return Sign.POSITIVE if t.coeff > 0 else Sign.NEGATIVE
    return Sign.MIXED


# ---------------------------------------------------------------------------
# rendering


def _render_coeff(c: Fraction) -> str:
    return str(c)


def render(e: SymExpr) -> str:
    """Deterministic debug rendering (canonical term order, exact rationals)."""
    ce = canonicalize(e)
    if not ce.terms:
        return "0"
    pieces = []
    for t in ce.terms:
        factors = []
        for i, b in enumerate(t.mono):
            if b == 1:
                factors.append(f"x{i + 1}")
            elif b > 1:
                factors.append(f"x{i + 1}^{b}")
        if t.radial_power != 0:
            factors.append(f"|x|^{t.radial_power}")
        if t.log_power == 1:
            factors.append("log(5/|x|)")
        elif t.log_power > 1:
            factors.append(f"log(5/|x|)^{t.log_power}")
        body = "*".join(factors)
        coeff = _render_coeff(t.coeff)
        pieces.append(f"{coeff}*{body}" if body else coeff)
    return " + ".join(pieces).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# one-dimensional radial-log expressions (gauges)

LOG_INV = "inv"  # log factor log(5/r); derivative brings -1/r
LOG_MUL = "mul"  # log factor log(5r);  derivative brings +1/r


@dataclass(frozen=True)
class RadialTerm:
    coeff: Fraction
    power: int
    log_power: int


class RadialLogExpr:
    """Finite sum of ``c * r^q * log^p`` with a fixed log argument.

    The log factor is ``log(5/r)`` for ``log_arg == LOG_INV`` (interior
    gauges) and ``log(5r)`` for ``log_arg == LOG_MUL`` (exterior gauges).
    Exact under d/dr and under the radial Laplacian in dimension n.
    """

    __slots__ = ("terms", "log_arg")

    def __init__(self, terms: Iterable[RadialTerm], log_arg: str = LOG_INV):
        if log_arg not in (LOG_INV, LOG_MUL):
            raise ValueError("log_arg must be LOG_INV or LOG_MUL")
        acc: dict[tuple[int, int], Fraction] = {}
        for t in terms:
            if t.log_power < 0:
                raise ValueError("log power must be nonnegative")
            key = (t.log_power, t.power)
            acc[key] = acc.get(key, Fraction(0)) + t.coeff
        self.terms = tuple(
            RadialTerm(c, q, p) for (p, q), c in sorted(acc.items()) if c != 0
        )
        self.log_arg = log_arg

    @staticmethod
    def from_terms(raw: Iterable[tuple], log_arg: str = LOG_INV) -> "RadialLogExpr":
        return RadialLogExpr(
            (RadialTerm(Fraction(c), int(q), int(p)) for c, q, p in raw), log_arg
        )

    @staticmethod
    def power(c, q: int, log_arg: str = LOG_INV) -> "RadialLogExpr":
        return RadialLogExpr.from_terms([(c, q, 0)], log_arg)

    @staticmethod
    def log_term(c, q: int, p: int, log_arg: str = LOG_INV) -> "RadialLogExpr":
        return RadialLogExpr.from_terms([(c, q, p)], log_arg)

    def _check_arg(self, other: "RadialLogExpr") -> None:
        if self.log_arg != other.log_arg:
            raise ValueError("cannot combine expressions with different log arguments")

    def __add__(self, other: "RadialLogExpr") -> "RadialLogExpr":
        self._check_arg(other)
        return RadialLogExpr(self.terms + other.terms, self.log_arg)

    def scale(self, c) -> "RadialLogExpr":
        c = Fraction(c)
        return RadialLogExpr(
            (RadialTerm(t.coeff * c, t.power, t.log_power) for t in self.terms),
            self.log_arg,
        )

    def __neg__(self) -> "RadialLogExpr":
        return self.scale(-1)

    def __sub__(self, other: "RadialLogExpr") -> "RadialLogExpr":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.terms

    def derivative(self, order: int = 1) -> "RadialLogExpr":
        """Exact d^order/dr^order."""
        if order < 0:
            raise ValueError("derivative order must be nonnegative")
        sgn = -1 if self.log_arg == LOG_INV else 1
        expr = self
        for _ in range(order):
            out = []
            for t in expr.terms:
                if t.power != 0:
                    out.append(RadialTerm(t.coeff * t.power, t.power - 1, t.log_power))
                if t.log_power > 0:
                    out.append(
                        RadialTerm(t.coeff * t.log_power * sgn, t.power - 1, t.log_power - 1)
                    )
            expr = RadialLogExpr(out, self.log_arg)
        return expr

    def radial_laplacian(self, n: int, iterations: int = 1) -> "RadialLogExpr":
        """Exact radial Laplacian ``u'' + (n-1)/r u'`` applied ``iterations`` times."""
        expr = self
        for _ in range(iterations):
            d1 = expr.derivative()
            d2 = d1.derivative()
            shifted = RadialLogExpr(
                (RadialTerm(t.coeff * (n - 1), t.power - 1, t.log_power) for t in d1.terms),
                self.log_arg,
            )
            expr = d2 + shifted
        return expr

    def __call__(self, r):
        rr = np.asarray(r, dtype=np.float64)
        logl = np.log(5.0 / rr) if self.log_arg == LOG_INV else np.log(5.0 * rr)
        out = np.zeros_like(rr)
        for t in self.terms:
            v = float(t.coeff) * rr ** float(t.power)
            if t.log_power:
                v = v * logl ** t.log_power
            out = out + v
        if np.ndim(r) == 0:
            return float(out)
        return out

    def render(self) -> str:
        if not self.terms:
            return "0"
        logname = "log(5/r)" if self.log_arg == LOG_INV else "log(5r)"
        pieces = []
        for t in self.terms:
            factors = []
            if t.power == 1:
                factors.append("r")
            elif t.power != 0:
                factors.append(f"r^{t.power}")
            if t.log_power == 1:
                factors.append(logname)
            elif t.log_power > 1:
                factors.append(f"{logname}^{t.log_power}")
            body = "*".join(factors)
            pieces.append(f"{t.coeff}*{body}" if body else str(t.coeff))
        return " + ".join(pieces).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"RadialLogExpr({self.render()!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RadialLogExpr)
            and self.log_arg == other.log_arg
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.log_arg, self.terms))
