"""The C_p functional, its algebraic identities and the constant c1(p).

For complex ``xi``, ``eta`` and ``p > 1``::

    C_p(xi, eta) = |xi|^p - |xi - eta|^p - p |xi - eta|^(p-2) Re((xi - eta) conj(eta))

is the gap in the tangent-line inequality for ``z -> |z|^p`` and is never
negative.  Everything here accepts scalars or numpy arrays and broadcasts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DomainError, InvalidInputError

REL_TOL = 1e-10
ABS_TOL = 1e-13

# polar search window for c1(p); radii outside are covered by limit bounds
C1_RADIUS_RANGE = (1e-4, 1e3)


class Method(str, enum.Enum):
    GRID_REFINE = "grid_refine"
    GOLDEN_SECTION = "golden_section"
    BISECTION = "bisection"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class ConstantEstimate:
    """A numerically computed constant together with a bracketing interval."""

    value: float
    lower: float
    upper: float
    method: Method
    evaluations: int = 0

    def __post_init__(self):
        if not (self.lower <= self.value <= self.upper):
            raise ValueError(
                f"inconsistent bracket: {self.lower} <= {self.value} <= {self.upper}"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "method": self.method.value,
            "evaluations": self.evaluations,
        }


def check_exponent(p, minimum=1.0, strict=True):
    """Validate an exponent; returns it as float."""
    p = float(p)
    if not math.isfinite(p):
        raise InvalidInputError(f"exponent must be finite, got {p}")
    if (strict and p <= minimum) or (not strict and p < minimum):
        op = ">" if strict else ">="
        raise DomainError(f"exponent must satisfy p {op} {minimum}, got {p}")
    return p


def _finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("non-finite value passed to C_p operation")


def _unwrap(x):
    return x.item() if np.ndim(x) == 0 else x


def cp_value(xi, eta, p, *, clamp=True, abs_tol=ABS_TOL):
    """Evaluate ``C_p(xi, eta)``.

    When ``xi == eta`` the last term is taken as 0 (its limit; matters only
    for ``p < 2`` where the power factor is singular).  Slightly negative
    rounding noise, no larger than ``abs_tol`` times the magnitude of the
    terms, is clamped to 0 unless ``clamp=False``.
    """
    p = check_exponent(p)
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    _finite(xi, eta)
    return _unwrap(_cp(xi, eta, xi - eta, p, clamp, abs_tol))


def _cp(xi, eta, d, p, clamp=True, abs_tol=ABS_TOL):
    """C_p with the difference ``d = xi - eta`` supplied by the caller.

    Callers that know ``d`` in closed form avoid the cancellation of the
    subtraction, which matters for ``p < 2`` where the cross term is
    singular in ``d``.
    """
    ad = np.abs(d)
    nonzero = ad > 0
    safe = np.where(nonzero, ad, 1.0)
    # |d|^(p-2) Re(d conj eta) written as |d|^(p-1) Re(d/|d| conj eta) to avoid underflow
    unit_dot = (d.real / safe) * eta.real + (d.imag / safe) * eta.imag
    cross = np.where(nonzero, p * safe ** (p - 1) * unit_dot, 0.0)
    head = np.abs(xi) ** p
    tail = ad**p
    raw = head - tail - cross
    if clamp:
        scale = head + tail + np.abs(cross)
        raw = np.where((raw < 0) & (raw >= -abs_tol * scale), 0.0, raw)
    return raw


def _binom_tail(a, q, terms=24):
    """sum_{k>=2} binom(a, k) q^k, for |q| small."""
    out = np.zeros_like(q)
    coef = a * (a - 1) / 2.0
    qk = q * q
    for k in range(2, terms + 2):
        out = out + coef * qk
        coef *= (a - k) / (k + 1)
        qk = qk * q
    return out


def c1_objective(s, t, p):
    """The ratio whose infimum over ``(s, t) != 0`` defines c1(p).

    ``([t^2 + s^2 + 2s + 1]^(p/2) - 1 - p s) / (t^2 + s^2)^(p/2)``; depends on
    ``t`` only through ``t^2`` so it is exactly even in ``t``.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    r2 = s * s + t * t
    return _unwrap(_c1_ratio(r2, s, p))


def c1_polar(radius, angle, p):
    """c1 ratio at ``s = r cos(angle)``, ``t = r sin(angle)``."""
    radius = np.asarray(radius, dtype=float)
    angle = np.asarray(angle, dtype=float)
    s = radius * np.cos(angle)
    return _unwrap(_c1_ratio(radius * radius, s, p))


def _c1_ratio(r2, s, p):
    q = 2.0 * s + r2
    half = p / 2.0
    small = np.abs(q) < 0.125
    with np.errstate(divide="ignore", invalid="ignore"):
        # (1+q)^(p/2) - 1 - p s, written to avoid cancellation when q is small
        direct = np.expm1(half * np.log1p(q)) - p * s
        series = half * r2 + _binom_tail(half, np.where(small, q, 0.0))
        num = np.where(small, series, direct)
        return num / r2**half


def _c1_outer_bound(radius, p):
    """Lower bound of the c1 ratio over all points with radius >= ``radius``.

    From convexity |z+1|^p >= r^p + p r^(p-1) Re z, hence ratio >=
    1 - p (r^(p-2) - 1) / r^(p-1) - r^(-p), which is increasing to 1.
    """
    r = float(radius)
    return 1.0 - p * (r ** (p - 2) - 1.0) / r ** (p - 1) - r ** (-p)


def cp_lower_constant(p, tol=1e-8, *, method="auto", max_evaluations=5_000_000,
                      grid=(241, 241), candidates=6):
    """Bracket ``c1(p) = inf C_p(xi, eta) / |eta|^p`` for ``p >= 2``.

    At ``p = 2`` the ratio is identically 1 (``C_2(xi, eta) = |eta|^2``) and
    ``method="auto"`` returns that closed form; ``method="search"`` forces
    the numerical search for every ``p``.

    The ratio is searched in polar coordinates ``(log r, angle)`` with the
    angle restricted to ``[0, pi]`` (evenness in ``t``).  A coarse grid over
    ``C1_RADIUS_RANGE`` seeds several zooming grid refinements.  Radii
    beyond the window are covered by an explicit lower bound that tends to
    1 (the ratio's limit at infinity); below the window the ratio tends to 1
    for ``p = 2`` and to infinity for ``p > 2``.  The outer window edge is
    pushed out until that bound no longer widens the bracket past ``tol``.

    The upper end of the bracket is an attained value; the lower end
    subtracts the last refinement step, a curvature term for the final grid
    spacing and a rounding allowance.  Attainment of the infimum is not
    claimed.
    """
    p = check_exponent(p, 2.0, strict=False)
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if method not in ("auto", "search"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and p == 2.0:
        return ConstantEstimate(1.0, 1.0, 1.0, Method.CLOSED_FORM, 0)
    evals = 0
    r_lo, r_hi = C1_RADIUS_RANGE
    n_r, n_a = grid
    rho = np.linspace(math.log(r_lo), math.log(r_hi), n_r)
    ang = np.linspace(0.0, math.pi, n_a)
    R, A = np.meshgrid(rho, ang, indexing="ij")
    F = c1_polar(np.exp(R), A, p)
    evals += F.size

    def f(x):
        return c1_polar(math.exp(x[0]), x[1], p)

    order = np.argsort(F, axis=None)
    seeds = []
    for flat in order:
        i, j = np.unravel_index(flat, F.shape)
        if all(abs(i - a) > 2 or abs(j - b) > 2 for a, b in seeds):
            seeds.append((i, j))
        if len(seeds) >= candidates:
            break

    best = (math.inf, None, 0.0, 0.0)
    for i, j in seeds:
        val, x, step, curv, n = _zoom(f, p, rho[i], ang[j], rho[1] - rho[0],
                                      ang[1] - ang[0])
        evals += n
        if val < best[0]:
            best = (val, x, step, curv)
        if evals > max_evaluations:
            raise BudgetError("c1 search exceeded evaluation budget",
                              (best[0] - best[2] - best[3], best[0]), evals)
    val, _, step, curv = best

    limit = 1.0  # value approached as radius -> infinity (and radius -> 0 at p = 2)
    rounding = 64 * np.finfo(float).eps * max(1.0, abs(val))
    upper = min(val, limit) + rounding
    value = min(val, limit)
    lower = value - step - curv - rounding

    # radii outside the window
    outer = r_hi
    while _c1_outer_bound(outer, p) < value - tol / 2:
        outer *= 10.0
        if outer > 1e12:
            break
    if outer > r_hi:
        # grid-search the extension as well
        rho2 = np.linspace(math.log(r_hi), math.log(outer), 4 * int(math.log10(outer / r_hi)) * 16 + 1)
        R2, A2 = np.meshgrid(rho2, ang, indexing="ij")
        F2 = c1_polar(np.exp(R2), A2, p)
        evals += F2.size
        m2 = float(F2.min())
        if m2 < value:
            value = m2
            upper = m2 + rounding
            lower = min(lower, m2 - rounding)
    lower = min(lower, _c1_outer_bound(outer, p))
    lower = min(lower, value)
    if upper - lower > tol:
        raise BudgetError("c1 bracket wider than tolerance", (lower, upper), evals)
    return ConstantEstimate(float(value), float(lower), float(upper), Method.GRID_REFINE, evals)


def _zoom(f, p, rho0, ang0, h_rho, h_ang, points=21, shrink=4.0,
          min_step=1e-11, max_levels=60):
    """Repeated local grid zoom around ``(rho0, ang0)``.

    The box recentres on the best point each level and only shrinks when
    that point is interior.  Returns (best value, best point, gain over the
    last two levels, curvature allowance, evaluations).
    """
    x = np.array([rho0, ang0])
    fx = float(f(x))
    evals = 1
    w = np.array([h_rho, h_ang]) * 1.5
    gains = []
    for _ in range(max_levels):
        g_rho = np.linspace(x[0] - w[0], x[0] + w[0], points)
        g_ang = np.clip(np.linspace(x[1] - w[1], x[1] + w[1], points), 0.0, math.pi)
        R, A = np.meshgrid(g_rho, g_ang, indexing="ij")
        F = c1_polar(np.exp(R), A, p)
        evals += F.size
        k = np.unravel_index(np.argmin(F), F.shape)
        gain = max(fx - float(F[k]), 0.0)
        gains.append(gain)
        if F[k] < fx:
            fx = float(F[k])
            x = np.array([R[k], A[k]])
        on_edge = k[0] in (0, points - 1) or (
            k[1] in (0, points - 1) and 0.0 < A[k] < math.pi)
        if not on_edge:
            w = w / shrink
        if np.all(w < min_step):
            break
    spacing = 2 * w / (points - 1)
    # second differences bound the error of the final grid
    curv = 0.0
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = max(spacing[axis], 1e-5)
        lo = x - e
        lo[1] = max(lo[1], 0.0)
        hi = x + e
        hi[1] = min(hi[1], math.pi)
        second = (f(hi) - 2 * fx + f(lo)) / (e[axis] ** 2)
        evals += 2
        curv += 0.5 * abs(second) * spacing[axis] ** 2
    return fx, x, sum(gains[-2:]), curv, evals


def algebraic_identity_residual(a, t, p, *, extended=False):
    """LHS minus RHS of the C_p algebraic identity, for ``t`` in ``[0, 1]``::

        |a-t|^p - (1-t)^(p-1)(|a|^p - t) = C_p(a-t, t(a-1)) + t(1-t)^(p-1) C_p(1, 1-a)

    For ``p == 2`` any real ``t`` is admitted (see :func:`simplified_p2_residual`).
    With ``extended=True`` the result is ``(residual, scale)`` where scale is
    the largest magnitude among the four terms.
    """
    p = check_exponent(p)
    a = np.asarray(a, dtype=complex)
    t = np.asarray(t, dtype=float)
    _finite(a, t)
    if p != 2.0 and (np.any(t < 0) or np.any(t > 1)):
        raise DomainError("t must lie in [0, 1] unless p == 2")
    one_minus = 1.0 - t
    pw = np.sign(one_minus) * np.abs(one_minus) ** (p - 1)
    lhs1 = np.abs(a - t) ** p
    lhs2 = pw * (np.abs(a) ** p - t)
    # the differences a - t - t(a-1) = a(1-t) and 1 - (1-a) = a are passed exactly
    rhs1 = _cp(a - t, t * (a - 1), a * one_minus, p, clamp=False)
    rhs2 = t * pw * _cp(np.ones_like(a), 1.0 - a, a, p, clamp=False)
    res = lhs1 - lhs2 - rhs1 - rhs2
    if extended:
        scale = np.maximum.reduce([np.abs(lhs1), np.abs(lhs2), np.abs(rhs1), np.abs(rhs2)])
        return _unwrap(res), _unwrap(scale)
    return _unwrap(res)


def simplified_p2_residual(a, t, *, extended=False):
    """``|a-t|^2 - (1-t)(|a|^2 - t) - t|a-1|^2``, valid for every real ``t``."""
    a = np.asarray(a, dtype=complex)
    t = np.asarray(t, dtype=float)
    _finite(a, t)
    x = np.abs(a - t) ** 2
    y = (1.0 - t) * (np.abs(a) ** 2 - t)
    z = t * np.abs(a - 1.0) ** 2
    res = x - y - z
    if extended:
        return _unwrap(res), _unwrap(np.maximum.reduce([np.abs(x), np.abs(y), np.abs(z)]))
    return _unwrap(res)
