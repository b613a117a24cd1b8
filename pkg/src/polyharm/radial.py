"""Radial particular solutions of ``-Delta u = f`` and integral-average gauges.

Given a radial source ``f`` with ``int_0^R rho^{n-1} |f| drho`` finite, an
explicit particular solution of the radial Poisson equation is

    n >= 3:  u0(r) = 1/(n-2) [ r^{2-n} int_0^r rho^{n-1} f drho
                               + int_r^R rho f drho ]
    n  = 2:  u0(r) = log(2R/r) int_0^r rho f drho
                     + int_r^R rho log(2R/rho) f drho.

The profile is defined through quadrature and memoized per radius; the
verification harness checks ``-Delta u0 = f`` by radial finite differences.
Also here: the small-ball average ratio (how fast ``int_{|x|<r} |u|``
shrinks) and convergence/divergence verdicts for weighted source
integrability on a shrinking-cutoff ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numerics import QuadratureResult, integrate_interval, integrate_radial, unit_sphere_area

__all__ = [
    "RadialProfile",
    "particular_solution",
    "integral_average_ratio",
    "weighted_integrability",
    "IntegrabilityVerdict",
]


class RadialProfile:
    """Radial function on ``(0, r_max]`` with a per-radius evaluation memo."""

    def __init__(
        self,
        evaluator: Callable[[np.ndarray], np.ndarray],
        r_max: float,
        name: str = "",
        cache: bool = True,
    ):
        if r_max <= 0:
            raise ValueError("r_max must be positive")
        self._evaluator = evaluator
        self.r_max = r_max
        self.name = name
        self._cache: dict[float, float] | None = {} if cache else None

    def __call__(self, r):
        rr = np.asarray(r, dtype=np.float64)
        scalar = rr.ndim == 0
        flat = np.atleast_1d(rr).astype(np.float64)
        if np.any(flat <= 0) or np.any(flat > self.r_max * (1 + 1e-12)):
            raise ValueError(f"radius outside domain (0, {self.r_max}]")
        if self._cache is None:
            out = np.asarray(self._evaluator(flat), dtype=np.float64)
        else:
            out = np.empty_like(flat)
            missing = [i for i, v in enumerate(flat) if float(v) not in self._cache]
            if missing:
                vals = np.asarray(
                    self._evaluator(flat[missing]), dtype=np.float64
                )
                for i, v in zip(missing, vals):
                    self._cache.setdefault(float(flat[i]), float(v))
            for i, v in enumerate(flat):
                out[i] = self._cache[float(v)]
        return float(out[0]) if scalar else out

    def as_point_function(self, dim: int) -> Callable[[np.ndarray], np.ndarray]:
        """View as a function of n-dimensional points."""

        def f(pts: np.ndarray) -> np.ndarray:
            return self(np.linalg.norm(np.asarray(pts, dtype=np.float64), axis=1))

        return f


def _coerce_radial(f, r_max: float) -> RadialProfile:
    if isinstance(f, RadialProfile):
        return f
    return RadialProfile(lambda r: np.asarray(f(r), dtype=np.float64), r_max)


def particular_solution(
    f,
    n: int,
    r_max: float,
    *,
    rtol: float = 1e-12,
    verify_integrable: bool = True,
    name: str = "",
) -> RadialProfile:
    """Particular solution ``u0`` of ``-Delta u = f`` on ``(0, r_max]``.

    ``f`` is a radial function (batch over radii) or :class:`RadialProfile`.
    Raises when the weighted integrability precondition fails.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    src = _coerce_radial(f, r_max)

    if verify_integrable:
        check = integrate_radial(
            lambda r: np.abs(src(r)), n, r_max, rtol=1e-6, max_panels=800
        )
        if not check.converged:
            raise ValueError(
                "source fails the weighted integrability precondition "
                f"(int rho^{n - 1}|f| did not converge: {check.message})"
            )

    def inner(r: float) -> float:
        # int_0^r rho^{n-1} f drho
        return integrate_radial(src, n, r, rtol=rtol).require().value

    if n >= 3:

        def u0_scalar(r: float) -> float:
            outer = integrate_interval(
                lambda rho: rho * src(rho), r, r_max, rtol=rtol
            ).require()
            return (r ** (2 - n) * inner(r) + outer.value) / (n - 2)

    else:

        def u0_scalar(r: float) -> float:
            inner2 = integrate_radial(src, 2, r, rtol=rtol).require().value
            outer = integrate_interval(
                lambda rho: rho * np.log(2.0 * r_max / rho) * src(rho),
                r,
                r_max,
                rtol=rtol,
            ).require()
            return math.log(2.0 * r_max / r) * inner2 + outer.value

    def evaluator(radii: np.ndarray) -> np.ndarray:
        return np.array([u0_scalar(float(r)) for r in radii])

    label = name or (f"particular_solution({src.name})" if src.name else "particular_solution")
    return RadialProfile(evaluator, r_max, name=label)


def integral_average_ratio(
    u,
    r: float,
    n: int,
    *,
    rtol: float = 1e-8,
) -> float:
    """``int_{|x|<r} |u| dx`` divided by the dimension's small-ball gauge.

    The gauge is ``r^2`` for n >= 3 and ``r^2 log(1/r)`` for n = 2 (so the
    ratio needs ``r < 1`` there); ``u`` is radial (profile or batch
    function of the radius).
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    prof = _coerce_radial(u, r)
    mass = integrate_radial(
        lambda rho: np.abs(prof(rho)), n, r, rtol=rtol
    ).require()
    total = unit_sphere_area(n) * mass.value
    if n >= 3:
        gauge = r * r
    else:
        if r >= 1.0:
            raise ValueError("the n = 2 gauge r^2 log(1/r) needs r < 1")
        gauge = r * r * math.log(1.0 / r)
    return total / gauge


@dataclass(frozen=True)
class IntegrabilityVerdict:
    """Ladder-based convergence verdict for a weighted source integral."""

    converges: bool
    ladder: tuple[float, ...]  # partial integrals at shrinking inner cutoffs
    cutoffs: tuple[float, ...]
    value: float  # last partial integral

    def __bool__(self) -> bool:
        return self.converges


def weighted_integrability(
    f,
    m: int,
    n: int,
    r_max: float,
    *,
    levels: int = 18,
    stabilization: float = 0.01,
    rtol: float = 1e-9,
) -> IntegrabilityVerdict:
    """Verdict on ``int_{|x|<R} |x|^{2m-2} f dx < infinity`` for ``f >= 0``.

    Computes partial integrals with inner cutoff ``eps = R 2^{-k}`` and
    declares convergence when the last three ladder steps agree within
    ``stabilization`` relatively; divergence is a verdict, not an error.
    """
    prof = _coerce_radial(f, r_max)
    weight = 2 * m - 2

    ladder = []
    cutoffs = []
    for k in range(2, levels + 2):
        eps = r_max * 2.0**-k
        part = integrate_interval(
            lambda rho: prof(rho) * rho ** (weight + n - 1),
            eps,
            r_max,
            rtol=rtol,
            singular_left=False,
            max_panels=2000,
        ).require()
        ladder.append(unit_sphere_area(n) * part.value)
        cutoffs.append(eps)

    tail = ladder[-3:]
    scale = max(abs(v) for v in tail) or 1.0
    spread = (max(tail) - min(tail)) / scale
    return IntegrabilityVerdict(
        converges=spread <= stabilization,
        ladder=tuple(ladder),
        cutoffs=tuple(cutoffs),
        value=ladder[-1],
    )
