"""Fundamental solutions of the m-th Laplacian iterate and the bound gauges.

The kernel of ``Delta^m`` in dimension n splits into three closed-form
regimes depending on how ``2m`` compares with ``n`` and on the parity of
``n``; each carries a sign prefactor making the overall normalization
constant ``a(m, n)`` positive.  The constant itself is derived here by
symbolically reducing ``Delta^(m-1)`` of the unit-scale kernel to the
classical Laplacian kernel and matching its known coefficient; an
independent quadrature cross-check lives in the harness.

Also housed here: the interior/exterior growth gauges and the
bound-existence classification (a pointwise a priori bound exists iff
``m`` is even or ``n < 2m``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .symexpr import (
    LOG_MUL,
    RadialLogExpr,
    SymExpr,
    canonicalize,
    eval_batch,
    evaluate,
    laplacian_iter,
)

__all__ = [
    "ProblemParams",
    "Regime",
    "ScaleProvenance",
    "FundamentalSolution",
    "BoundClassification",
    "regime_of",
    "unit_kernel",
    "normalization_constant",
    "fundamental_solution",
    "classify",
    "interior_gauge",
    "interior_gauge_radial",
    "interior_gauge_derivative",
    "exterior_gauge",
    "exterior_gauge_derivative",
    "sphere_area_exact",
]


@dataclass(frozen=True)
class ProblemParams:
    """Operator half-order m >= 1 and ambient dimension n >= 2."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")


class Regime(enum.Enum):
    """Kernel shape selector."""

    R1 = "2m < n"
    R2 = "n < 2m, n odd"
    R3 = "n <= 2m, n even"


def regime_of(params: ProblemParams) -> Regime:
    m, n = params.m, params.n
    if 2 * m < n:
        return Regime.R1
    if n % 2 == 1:
        return Regime.R2
    return Regime.R3


def unit_kernel(params: ProblemParams) -> SymExpr:
    """Unit-scale kernel (the fundamental solution with a = 1)."""
    m, n = params.m, params.n
    regime = regime_of(params)
    if regime is Regime.R1:
        sign = (-1) ** m
        return SymExpr.radial(sign, 2 * m - n, 0, n)
    if regime is Regime.R2:
        sign = (-1) ** ((n - 1) // 2)
        return SymExpr.radial(sign, 2 * m - n, 0, n)
    sign = (-1) ** (n // 2)
    return SymExpr.radial(sign, 2 * m - n, 1, n)


@dataclass(frozen=True)
class ScaleProvenance:
    """Exact record ``rational * pi**pi_power`` for a normalization scale."""

    rational: Fraction
    pi_power: int

    @property
    def value(self) -> float:
        return float(self.rational) * math.pi**self.pi_power

    def render(self) -> str:
        if self.pi_power == 0:
            return str(self.rational)
        return f"{self.rational} * pi^{self.pi_power}"


def sphere_area_exact(n: int) -> ScaleProvenance:
    """Surface area of the unit sphere in R^n as ``rational * pi^k``."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if n % 2 == 0:
        half = n // 2
        return ScaleProvenance(Fraction(2, math.factorial(half - 1)), half)
    dfact = 1
    for k in range(n - 2, 0, -2):
        dfact *= k
    return ScaleProvenance(Fraction(2 ** ((n + 1) // 2), dfact), (n - 1) // 2)


class NormalizationError(RuntimeError):
    """Raised when the symbolic reduction does not match the expected shape."""


def _laplacian_kernel_target(n: int) -> ScaleProvenance:
    # Coefficient of |x|^(2-n) (n >= 3) or of log(5/|x|) (n = 2) in the
    # classical kernel F with Delta F = delta.
    area = sphere_area_exact(n)
    if n >= 3:
        return ScaleProvenance(Fraction(-1, (n - 2)) / area.rational, -area.pi_power)
    return ScaleProvenance(Fraction(-1, 2), -1)


def normalization_constant(params: ProblemParams) -> ScaleProvenance:
    """Positive scale a(m, n) with ``Delta^m (a * unit_kernel) = delta``.

    Derived by reducing ``Delta^(m-1)`` of the unit kernel to the classical
    Laplacian kernel shape and matching coefficients.  Fails loudly if the
    reduction produces anything else.
    """
    m, n = params.m, params.n
    reduced = canonicalize(laplacian_iter(unit_kernel(params), m - 1))
    zero_mono = (0,) * n
    if n >= 3:
        if len(reduced.terms) != 1:
            raise NormalizationError(
                f"reduction of the (m-1) iterate has {len(reduced.terms)} terms, expected 1"
            )
        t = reduced.terms[0]
        if t.mono != zero_mono or t.radial_power != 2 - n or t.log_power != 0:
            raise NormalizationError(
                f"reduction is not a multiple of |x|^{2 - n}: {reduced!r}"
            )
        coeff = t.coeff
    else:
        log_terms = [t for t in reduced.terms if t.log_power == 1]
        rest = [t for t in reduced.terms if t.log_power == 0]
        ok = (
            len(log_terms) == 1
            and log_terms[0].mono == zero_mono
            and log_terms[0].radial_power == 0
            and all(t.mono == zero_mono and t.radial_power == 0 for t in rest)
            and len(rest) <= 1
        )
        if not ok:
            raise NormalizationError(
                f"reduction is not c*log(5/|x|) + const: {reduced!r}"
            )
        coeff = log_terms[0].coeff  # additive constant is a harmless kernel shift
    target = _laplacian_kernel_target(n)
    scale = ScaleProvenance(target.rational / coeff, target.pi_power)
    if scale.value <= 0:
        raise NormalizationError(f"derived scale is not positive: {scale!r}")
    return scale


@dataclass(frozen=True)
class FundamentalSolution:
    """Kernel of ``Delta^m``: regime, unit-scale expression, positive scale."""

    params: ProblemParams
    regime: Regime
    unit_expr: SymExpr
    scale_provenance: ScaleProvenance

    @property
    def scale(self) -> float:
        return self.scale_provenance.value

    def value(self, x) -> float:
        return self.scale * evaluate(self.unit_expr, x)

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        return self.scale * eval_batch(self.unit_expr, points)

    def as_batch_callable(self) -> Callable[[np.ndarray], np.ndarray]:
        return lambda pts: self.eval_batch(pts)


def fundamental_solution(params: ProblemParams) -> FundamentalSolution:
    return FundamentalSolution(
        params=params,
        regime=regime_of(params),
        unit_expr=unit_kernel(params),
        scale_provenance=normalization_constant(params),
    )


# ---------------------------------------------------------------------------
# gauges and classification


def interior_gauge(n: int) -> SymExpr:
    """Optimal interior growth gauge: ``|x|^(2-n)``, or ``log(5/|x|)`` in n = 2."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if n == 2:
        return SymExpr.radial(1, 0, 1, 2)
    return SymExpr.radial(1, 2 - n, 0, n)


def interior_gauge_radial(n: int) -> RadialLogExpr:
    if n < 2:
        raise ValueError("n must be >= 2")
    if n == 2:
        return RadialLogExpr.log_term(1, 0, 1)
    return RadialLogExpr.power(1, 2 - n)


def interior_gauge_derivative(n: int, k: int) -> RadialLogExpr:
    """Exact radial derivative d^k/dr^k of the interior gauge."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    return interior_gauge_radial(n).derivative(k)


def exterior_gauge(params: ProblemParams) -> RadialLogExpr:
    """Optimal exterior gauge: ``r^(2m-2)``, times ``log(5r)`` in n = 2."""
    m, n = params.m, params.n
    if n == 2:
        return RadialLogExpr.log_term(1, 2 * m - 2, 1, LOG_MUL)
    return RadialLogExpr.power(1, 2 * m - 2, LOG_MUL)


def exterior_gauge_derivative(params: ProblemParams, k: int) -> RadialLogExpr:
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    return exterior_gauge(params).derivative(k)


@dataclass(frozen=True)
class BoundClassification:
    """Existence of a pointwise a priori bound, with the optimal gauges."""

    params: ProblemParams
    bound_exists: bool
    gamma0: SymExpr
    gamma_inf: RadialLogExpr


def classify(params: ProblemParams) -> BoundClassification:
    """A bound exists iff m is even or n < 2m."""
    m, n = params.m, params.n
    return BoundClassification(
        params=params,
        bound_exists=(m % 2 == 0) or (n < 2 * m),
        gamma0=interior_gauge(n),
        gamma_inf=exterior_gauge(params),
    )
