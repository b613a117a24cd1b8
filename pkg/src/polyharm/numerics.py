"""Adaptive quadrature on balls and intervals, and Richardson finite differences.

Integrands here are radially singular at known points (kernel singularities
at the origin or at an offset source point) and may carry log factors, so
the quadrature is built from geometrically graded radial panels times a
fixed product rule on the sphere.  Everything is deterministic: fixed
subdivision rules, fixed summation order, no randomness.

Finite differences use symmetric stencils with a step ladder
``h0 * 2^-k`` and Richardson extrapolation; a cross-level consistency gate
turns silent inaccuracy into an explicit failure.

All integrand/function arguments are *batch* callables mapping an (N, d)
float array to an (N,) float array.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .symexpr import iter_multi_indices, multi_index_factorial

__all__ = [
    "QuadratureResult",
    "QuadratureError",
    "FDConvergenceError",
    "GridSpec",
    "make_grid",
    "unit_sphere_area",
    "sphere_rule",
    "integrate_interval",
    "integrate_radial",
    "integrate_ball",
    "fd_derivative",
    "fd_gradient",
    "fd_laplacian_iter",
    "fd_weights",
    "radial_laplacian_coefficients",
    "mp_radial_laplacian_iter",
    "as_batch",
]


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True
    message: str = ""

    def require(self) -> "QuadratureResult":
        if not self.converged:
            raise QuadratureError(self)
        return self


class QuadratureError(RuntimeError):
    def __init__(self, result: QuadratureResult):
        self.result = result
        super().__init__(
            f"quadrature did not converge: value={result.value!r} "
            f"error_estimate={result.error_estimate!r} ({result.message})"
        )


class FDConvergenceError(RuntimeError):
    """Richardson levels disagree beyond the consistency gate."""


def as_batch(f: Callable, dim: int) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap a scalar-point function into the batch calling convention."""

    def batched(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        return np.array([float(f(p)) for p in pts])

    return batched


# ---------------------------------------------------------------------------
# sphere rules


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@lru_cache(maxsize=None)
def sphere_rule(n: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Product quadrature on S^{n-1}, exact for polynomials up to ``degree``.

    Built recursively: Gauss-Jacobi in the polar cosine (weight
    ``(1-t^2)^((n-3)/2)``) times a rule on S^{n-2}; the base circle rule is
    equally spaced.  Weights sum to the sphere area.  Supports 2 <= n <= 13.
    """
    if not 2 <= n <= 13:
        raise ValueError("sphere rules support 2 <= n <= 13")
    if degree < 1:
        degree = 1
    if n == 2:
        m = 2 * degree + 2
        angles = 2.0 * math.pi * np.arange(m) / m
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        weights = np.full(m, 2.0 * math.pi / m)
        return dirs, weights
    alpha = (n - 3) / 2.0
    k = max(2, (degree + 2) // 2)
    t, tw = roots_jacobi(k, alpha, alpha)
    sub_dirs, sub_w = sphere_rule(n - 1, degree)
    dirs = np.empty((k * len(sub_w), n))
    weights = np.empty(k * len(sub_w))
    idx = 0
    for i in range(k):
        s = math.sqrt(max(0.0, 1.0 - t[i] * t[i]))
        block = slice(idx, idx + len(sub_w))
        dirs[block, 0] = t[i]
        dirs[block, 1:] = s * sub_dirs
        weights[block] = tw[i] * sub_w
        idx += len(sub_w)
    return dirs, weights


# ---------------------------------------------------------------------------
# 1-D adaptive quadrature

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


_GEOMETRIC_LEVELS = 30  # initial dyadic grading toward a left-end singularity
_MAX_GRADING = 400  # absolute cap on grading depth (2^-400 is still > tiny)


def integrate_interval(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    rtol: float = 1e-9,
    atol: float = 0.0,
    singular_left: bool = False,
    max_panels: int = 4000,
    order: int = 15,
    grading_levels: int = _GEOMETRIC_LEVELS,
) -> QuadratureResult:
    """Adaptive Gauss-Legendre integration of ``g`` on [a, b].

    With ``singular_left`` the initial panels grade geometrically toward
    ``a`` (the left endpoint itself is never evaluated); the dropped sliver
    below the innermost panel is charged to the error estimate and the
    grading deepens adaptively while that tail dominates, so integrable
    endpoint singularities converge and divergent ones exhaust the budget
    and come back with ``converged=False`` -- never a silently wrong value.
    """
    if not b > a:
        raise ValueError("require b > a")
    lo_order = max(4, order // 2)
    xs_hi, ws_hi = _gl(order)
    xs_lo, ws_lo = _gl(lo_order)
    n_hi = len(xs_hi)
    length = b - a

    evaluations = 0

    def panel_values(bounds: list[tuple[float, float]]) -> list[tuple[float, float]]:
        nonlocal evaluations
        halves = [0.5 * (pb - pa) for pa, pb in bounds]
        mids = [0.5 * (pa + pb) for pa, pb in bounds]
        pts = np.concatenate(
            [
                np.concatenate([m + h * xs_hi, m + h * xs_lo])
                for m, h in zip(mids, halves)
            ]
        )
        vals = np.asarray(g(pts), dtype=np.float64)
        evaluations += len(pts)
        out = []
        stride = n_hi + len(xs_lo)
        for i, h in enumerate(halves):
            seg = vals[i * stride : (i + 1) * stride]
            hi = h * float(np.dot(ws_hi, seg[:n_hi]))
            lo = h * float(np.dot(ws_lo, seg[n_hi:]))
            out.append((hi, abs(hi - lo)))
        return out

    # panel records: (a, b) -> (value, err); heap keyed by (-err, a)
    panels: dict[tuple[float, float], tuple[float, float]] = {}
    heap: list[tuple[float, float, float]] = []
    run_value = 0.0
    run_err = 0.0

    def record(bounds: list[tuple[float, float]]) -> None:
        nonlocal run_value, run_err
        for (pa, pb), (v, e) in zip(bounds, panel_values(bounds)):
            panels[(pa, pb)] = (v, e)
            run_value += v
            run_err += e
            heapq.heappush(heap, (-e, pa, pb))

    if singular_left:
        depth = grading_levels
        edges = [a + length * 2.0**-k for k in range(depth, 0, -1)]
        edges.append(b)
        record([(edges[i], edges[i + 1]) for i in range(len(edges) - 1)])
        tail_error = abs(panels[min(panels)][0])
    else:
        depth = 0
        mids = np.linspace(a, b, 9)
        record([(float(mids[i]), float(mids[i + 1])) for i in range(8)])
        tail_error = 0.0

    def final() -> tuple[float, float]:
        keys = sorted(panels)
        value = math.fsum(panels[k][0] for k in keys)
        err = math.fsum(panels[k][1] for k in keys) + tail_error
        return value, err

    may_deepen = singular_left
    while len(panels) < max_panels:
        if not math.isfinite(run_value) or not math.isfinite(run_err + tail_error):
            value, err = final()
            return QuadratureResult(
                value, err, evaluations, False, "non-finite integrand values"
            )
        target = max(rtol * abs(run_value), atol)
        if run_err + tail_error <= target:
            value, err = final()
            return QuadratureResult(value, err, evaluations, True)
        if may_deepen and tail_error > 0.5 * target and depth < _MAX_GRADING:
            depth += 1
            lo_edge = a + length * 2.0**-depth
            hi_edge = a + length * 2.0 ** -(depth - 1)
            record([(lo_edge, hi_edge)])
            new_tail = abs(panels[min(panels)][0])
            if not new_tail < tail_error:
                may_deepen = False  # tail not shrinking: divergence suspected
            tail_error = new_tail
            continue
        if not heap:
            break
        _, pa, pb = heapq.heappop(heap)
        if (pa, pb) not in panels:
            continue
        v_old, e_old = panels.pop((pa, pb))
        run_value -= v_old
        run_err -= e_old
        mid = 0.5 * (pa + pb)
        record([(pa, mid), (mid, pb)])

    value, err = final()
    converged = err <= max(rtol * abs(value), atol)
    return QuadratureResult(
        value,
        err,
        evaluations,
        converged,
        "" if converged else "panel budget exhausted",
    )


def integrate_radial(
    g: Callable[[np.ndarray], np.ndarray],
    n: int,
    r_max: float,
    *,
    rtol: float = 1e-9,
    atol: float = 0.0,
    r_min: float = 0.0,
    max_panels: int = 4000,
) -> QuadratureResult:
    """``int_{r_min}^{r_max} g(rho) rho^{n-1} drho`` with singular grading at 0."""
    if n < 1:
        raise ValueError("dimension must be >= 1")

    def weighted(rho: np.ndarray) -> np.ndarray:
        return np.asarray(g(rho), dtype=np.float64) * rho ** (n - 1)

    return integrate_interval(
        weighted,
        r_min,
        r_max,
        rtol=rtol,
        atol=atol,
        singular_left=(r_min == 0.0),
        max_panels=max_panels,
    )


# ---------------------------------------------------------------------------
# ball quadrature


def integrate_ball(
    f: Callable[[np.ndarray], np.ndarray],
    center: Sequence[float],
    radius: float,
    *,
    rtol: float = 1e-6,
    atol: float = 0.0,
    singularities: Sequence[Sequence[float]] = (),
    angular_degree: int = 8,
    radial_order: int = 12,
    max_shells: int = 600,
    min_radius: float = 0.0,
) -> QuadratureResult:
    """Adaptive integration of ``f`` over the ball ``|x - center| < radius``.

    The ball is cut into spherical shells around ``center``; each shell uses
    Gauss-Legendre in the radius times a fixed product rule on the sphere.
    Shells grade geometrically toward the center (kernel singularities
    there are expected) and toward the radii of any declared off-center
    ``singularities``.  ``min_radius`` keeps evaluation points away from the
    center when the integrand refuses very small arguments.
    """
    center = np.asarray(center, dtype=np.float64)
    n = center.shape[0]
    if radius <= 0:
        raise ValueError("radius must be positive")
    dirs, ang_w = sphere_rule(n, angular_degree)
    xs_hi, ws_hi = _gl(radial_order)
    xs_lo, ws_lo = _gl(max(4, radial_order // 2))

    floor = max(min_radius, radius * 2.0**-_GEOMETRIC_LEVELS)
    edges = {floor, radius}
    k = 1
    while radius * 2.0**-k > floor:
        edges.add(radius * 2.0**-k)
        k += 1
    for s in singularities:
        d = float(np.linalg.norm(np.asarray(s, dtype=np.float64) - center))
        if d < 1e-12 or d >= radius:
            continue
        for j in range(1, 11):
            for cand in (d * (1.0 - 2.0**-j), d * (1.0 + 2.0**-j)):
                if floor < cand < radius:
                    edges.add(cand)
        if floor < d < radius:
            edges.add(d)
    sorted_edges = sorted(edges)

    evaluations = 0

    def shell_value(ra: float, rb: float) -> tuple[float, float]:
        nonlocal evaluations
        half = 0.5 * (rb - ra)
        mid = 0.5 * (ra + rb)
        radii = np.concatenate([mid + half * xs_hi, mid + half * xs_lo])
        pts = center[None, None, :] + radii[:, None, None] * dirs[None, :, :]
        vals = np.asarray(f(pts.reshape(-1, n)), dtype=np.float64).reshape(
            len(radii), len(ang_w)
        )
        evaluations += len(radii) * len(ang_w)
        ang = vals @ ang_w
        nh = len(xs_hi)
        hi = half * float(np.dot(ws_hi, ang[:nh] * radii[:nh] ** (n - 1)))
        lo = half * float(np.dot(ws_lo, ang[nh:] * radii[nh:] ** (n - 1)))
        return hi, abs(hi - lo)

    shells: dict[tuple[float, float], tuple[float, float]] = {}
    heap: list[tuple[float, float, float]] = []
    run_value = 0.0
    run_err = 0.0

    def add_shell(ra: float, rb: float) -> None:
        nonlocal run_value, run_err
        v, e = shell_value(ra, rb)
        shells[(ra, rb)] = (v, e)
        run_value += v
        run_err += e
        heapq.heappush(heap, (-e, ra, rb))

    for i in range(len(sorted_edges) - 1):
        add_shell(sorted_edges[i], sorted_edges[i + 1])

    innermost = min(shells)
    tail_error = abs(shells[innermost][0])

    def final() -> tuple[float, float]:
        keys = sorted(shells)
        value = math.fsum(shells[k][0] for k in keys)
        err = math.fsum(shells[k][1] for k in keys) + tail_error
        return value, err

    while len(shells) < max_shells:
        if run_err + tail_error <= max(rtol * abs(run_value), atol):
            value, err = final()
            return QuadratureResult(value, err, evaluations, True)
        if not heap:
            break
        _, ra, rb = heapq.heappop(heap)
        if (ra, rb) not in shells:
            continue
        v_old, e_old = shells.pop((ra, rb))
        run_value -= v_old
        run_err -= e_old
        mid = math.sqrt(ra * rb) if ra > 0 else 0.5 * (ra + rb)
        if not ra < mid < rb:
            mid = 0.5 * (ra + rb)
        add_shell(ra, mid)
        add_shell(mid, rb)

    value, err = final()
    converged = err <= max(rtol * abs(value), atol)
    return QuadratureResult(
        value,
        err,
        evaluations,
        converged,
        "" if converged else "shell budget exhausted",
    )


# ---------------------------------------------------------------------------
# finite differences


def fd_weights(order: int, offsets: Sequence[float]) -> np.ndarray:
    """Fornberg weights for d^order/dx^order at 0 from the given offsets."""
    a = np.asarray(offsets, dtype=np.float64)
    npts = len(a)
    if order >= npts:
        raise ValueError("need more stencil points than the derivative order")
    c = np.zeros((npts, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = a[0]
    for i in range(1, npts):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = a[i]
        for j in range(i):
            c3 = a[i] - a[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


@lru_cache(maxsize=None)
def _axis_stencil(order: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Symmetric integer-offset stencil and weights for d^order (unit step)."""
    if order == 0:
        return (0,), (1.0,)
    halfw = (order + 1) // 2 + 1
    offsets = tuple(range(-halfw, halfw + 1))
    weights = fd_weights(order, offsets)
    return offsets, tuple(float(w) for w in weights)


def _tensor_stencil(beta: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Integer offset grid and weights for the mixed derivative D^beta."""
    dim = len(beta)
    offs = np.zeros((1, dim))
    wts = np.ones(1)
    for axis, k in enumerate(beta):
        if k == 0:
            continue
        o, w = _axis_stencil(k)
        o = np.asarray(o, dtype=np.float64)
        w = np.asarray(w)
        new_offs = np.repeat(offs, len(o), axis=0)
        new_offs[:, axis] += np.tile(o, len(offs))
        wts = (wts[:, None] * w[None, :]).reshape(-1)
        offs = new_offs
    keep = wts != 0.0
    return offs[keep], wts[keep]


def _richardson(
    values: Sequence[float], rtol: float, noise_floor: float, gate_atol: float = 0.0
) -> float:
    # table[j][i] extrapolates step levels i..i+j; the consistency gate
    # compares the final diagonal entry against the finer-step entry it was
    # corrected from.  Disagreement within the roundoff noise floor of the
    # stencil (which extrapolation cannot remove) is not an inconsistency.
    levels = len(values)
    table = [list(values)]
    for j in range(1, levels):
        prev = table[j - 1]
        fac = 4.0**j
        table.append(
            [(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(len(prev) - 1)]
        )
    best = table[-1][0]
    basis = table[-2][1]
    gate = max(10.0 * rtol * abs(best), 100.0 * noise_floor, gate_atol)
    if abs(best - basis) > gate:
        raise FDConvergenceError(
            f"Richardson levels disagree: {best!r} vs {basis!r} (gate {gate!r})"
        )
    return best


def fd_derivative(
    f: Callable[[np.ndarray], np.ndarray],
    beta: Sequence[int],
    x: Sequence[float],
    h0: float | None = None,
    *,
    levels: int = 4,
    rtol: float = 1e-6,
    gate_atol: float = 0.0,
) -> float:
    """Mixed partial ``D^beta f(x)`` by Richardson-extrapolated central differences.

    ``gate_atol`` relaxes the consistency gate below that absolute size,
    for callers that only need the result resolved to a fixed tolerance.
    """
    x = np.asarray(x, dtype=np.float64)
    beta = tuple(int(b) for b in beta)
    order = sum(beta)
    if order == 0:
        return float(np.asarray(f(x[None, :]))[0])
    if h0 is None:
        h0 = 0.05 * max(1.0, float(np.linalg.norm(x)))
    offs, wts = _tensor_stencil(beta)
    wabs = float(np.sum(np.abs(wts)))
    values = []
    noise = 0.0
    for level in range(levels):
        h = h0 * 0.5**level
        pts = x[None, :] + h * offs
        vals = np.asarray(f(pts), dtype=np.float64)
        fscale = float(np.max(np.abs(vals)))
        noise = max(noise, np.finfo(float).eps * wabs * fscale / h**order)
        values.append(float(np.dot(wts, vals)) / h**order)
    return _richardson(values, rtol, noise, gate_atol)


def fd_gradient(
    f: Callable[[np.ndarray], np.ndarray],
    x: Sequence[float],
    h0: float | None = None,
    *,
    rtol: float = 1e-6,
) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for axis in range(x.shape[0]):
        beta = tuple(1 if i == axis else 0 for i in range(x.shape[0]))
        out[axis] = fd_derivative(f, beta, x, h0, rtol=rtol)
    return out


def fd_laplacian_iter(
    f: Callable[[np.ndarray], np.ndarray],
    sigma: int,
    x: Sequence[float],
    h0: float | None = None,
    *,
    levels: int = 4,
    rtol: float = 1e-5,
    gate_atol: float = 0.0,
) -> float:
    """``Delta^sigma f(x)`` via the multinomial expansion into mixed partials."""
    if sigma < 0:
        raise ValueError("iterate count must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    if sigma == 0:
        return float(np.asarray(f(x[None, :]))[0])
    dim = x.shape[0]
    if h0 is None:
        h0 = 0.05 * max(1.0, float(np.linalg.norm(x)))
    sig_fact = math.factorial(sigma)
    pieces: list[tuple[float, np.ndarray, np.ndarray]] = []
    for gamma in iter_multi_indices(dim, sigma):
        if sum(gamma) != sigma:
            continue
        coeff = sig_fact / multi_index_factorial(gamma)
        beta = tuple(2 * g for g in gamma)
        offs, wts = _tensor_stencil(beta)
        pieces.append((coeff, offs, wts))
    wabs = sum(coeff * float(np.sum(np.abs(wts))) for coeff, _, wts in pieces)
    values = []
    noise = 0.0
    for level in range(levels):
        h = h0 * 0.5**level
        pts = np.concatenate([x[None, :] + h * offs for _, offs, _ in pieces])
        vals = np.asarray(f(pts), dtype=np.float64)
        fscale = float(np.max(np.abs(vals)))
        noise = max(noise, np.finfo(float).eps * wabs * fscale / h ** (2 * sigma))
        total = 0.0
        pos = 0
        for coeff, offs, wts in pieces:
            seg = vals[pos : pos + len(wts)]
            pos += len(wts)
            total += coeff * float(np.dot(wts, seg))
        values.append(total / h ** (2 * sigma))
    return _richardson(values, rtol, noise, gate_atol)


# ---------------------------------------------------------------------------
# radial Laplacian iterates in high precision
#
# For radial g the n-dimensional Laplacian is g'' + (n-1)/r g'; iterating it
# sigma times gives a linear combination  sum c_{j,k} r^{-k} g^{(j)}(r)  with
# exact rational coefficients.  Evaluating the 1-D derivatives with mpmath
# sidesteps the double-precision noise floor of high-order stencils (a
# 2*sigma-th order difference is hopeless in float64 for sigma >= 3).


@lru_cache(maxsize=None)
def radial_laplacian_coefficients(n: int, sigma: int) -> tuple:
    """Exact coefficients ``c_{j,k}`` of ``Delta^sigma`` acting on radial g.

    Returns a tuple of ``((deriv_order, inverse_power), Fraction)`` pairs
    with ``Delta^sigma g(r) = sum c * r^{-inverse_power} * g^{(deriv_order)}(r)``.
    """
    op: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    for _ in range(sigma):
        new: dict[tuple[int, int], Fraction] = {}

        def bump(key, val):
            if val:
                new[key] = new.get(key, Fraction(0)) + val

        for (j, k), c in op.items():
            bump((j + 2, k), c)
            bump((j + 1, k + 1), c * (n - 1 - 2 * k))
            if k:
                bump((j, k + 2), c * k * (k + 2 - n))
        op = {key: val for key, val in new.items() if val}
    return tuple(sorted(op.items()))


def mp_radial_laplacian_iter(
    g: Callable, sigma: int, n: int, r: float, dps: int = 60
) -> float:
    """``Delta^sigma`` of the radial function ``g`` at radius ``r``.

    ``g`` must accept mpmath floats.  One-dimensional derivatives up to
    order ``2 sigma`` are computed by mpmath's numerical differentiation at
    ``dps`` digits, then combined with the exact operator coefficients.
    """
    import mpmath as mp

    if sigma == 0:
        return float(g(mp.mpf(r)))
    coeffs = radial_laplacian_coefficients(n, sigma)
    with mp.workdps(dps):
        rm = mp.mpf(r)
        derivs: dict[int, object] = {}
        total = mp.mpf(0)
        for (j, k), c in coeffs:
            if j not in derivs:
                derivs[j] = mp.diff(g, rm, j) if j else g(rm)
            frac = mp.mpf(c.numerator) / mp.mpf(c.denominator)
            total += frac * derivs[j] * rm ** (-k)
        return float(total)


# ---------------------------------------------------------------------------
# sample grids


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced radii times a fixed quasi-uniform direction set."""

    radii: tuple[float, ...]
    directions: np.ndarray = field(compare=False)
    seed: int = 0

    def __post_init__(self):
        norms = np.linalg.norm(self.directions, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("directions must be unit vectors")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    def points(self) -> np.ndarray:
        out = np.empty((len(self.radii) * len(self.directions), self.dim))
        idx = 0
        for r in self.radii:
            out[idx : idx + len(self.directions)] = r * self.directions
            idx += len(self.directions)
        return out

    def descriptor(self) -> dict:
        return {
            "num_radii": len(self.radii),
            "r_min": min(self.radii),
            "r_max": max(self.radii),
            "num_directions": len(self.directions),
            "dim": self.dim,
            "seed": self.seed,
        }

    def refined(self) -> "GridSpec":
        """One dyadic refinement: geometric midpoints plus doubled directions."""
        radii = sorted(self.radii)
        extra = [math.sqrt(radii[i] * radii[i + 1]) for i in range(len(radii) - 1)]
        new_radii = tuple(sorted(set(radii) | set(extra), reverse=True))
        dirs = _directions(self.dim, 2 * len(self.directions), self.seed)
        return GridSpec(new_radii, dirs, self.seed)


def _directions(n: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    dirs = [np.eye(n)[0]]
    while len(dirs) < count:
        v = rng.normal(size=n)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            dirs.append(v / norm)
    return np.asarray(dirs[:count])


def make_grid(
    n: int,
    *,
    r_min: float = 1e-3,
    r_max: float = 0.9,
    num_radii: int = 12,
    num_directions: int = 6,
    seed: int = 0,
) -> GridSpec:
    if not 0 < r_min < r_max:
        raise ValueError("require 0 < r_min < r_max")
    ratio = (r_min / r_max) ** (1.0 / (num_radii - 1)) if num_radii > 1 else 1.0
    radii = tuple(r_max * ratio**k for k in range(num_radii))
    return GridSpec(radii, _directions(n, num_directions, seed), seed)
