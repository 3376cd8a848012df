"""Hardy deficit, the optimal shift and the quantitative stability bound.

For ``p >= 2`` and finitely supported ``u`` with ``u(0) = 0``::

    deficit(u) >= c1(p) / 2^(p-1) ((p-1)/p)^p inf_c sum_{n>=2} |u(n) - c n^((p-1)/p)|^p / (n^p log^p n)

The infimum runs over an infinite series: past the support every summand
is ``|c|^p / (n log^p n)``, so the objective is a finite sum plus ``|c|^p``
times a tail coefficient bracketed in :mod:`hardy.series`.  The same
structure serves the critical (logarithmic) Hardy inequality.  The
Muckenhoupt-type constant behind that inequality is computed as an
interval by :func:`muckenhoupt_constant`.
"""

from __future__ import annotations

import math
import threading
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .cp_core import ConstantEstimate, Method, check_exponent, cp_lower_constant
from .errors import BudgetError, DomainError
from .sequence import FinSeq
from .series import DEFAULT_ORDER, Bracket, log_tail

SHIFT_TOL = 1e-12
MAX_BISECTIONS = 400


def hardy_deficit(u: FinSeq, p) -> float:
    """``sum |u(n)-u(n-1)|^p - ((p-1)/p)^p sum |u(n)|^p / n^p``."""
    p = check_exponent(p)
    if u.is_zero():
        return 0.0
    x = u.dense(u.horizon + 1)
    n = np.arange(1, u.horizon + 1, dtype=float)
    grad = np.sum(np.abs(x[1:] - x[:-1]) ** p)
    hardy = ((p - 1) / p) ** p * np.sum(np.abs(x[1:]) ** p / n**p)
    return float(grad - hardy)


class ShiftObjective:
    """``f(c) = sum_{n=2}^{M} a_n |x_n - c b_n|^p + |c|^p T`` for real ``c``.

    ``T`` is the bracketed tail coefficient ``sum_{n>M} 1/(n log^p n)``.
    Strictly convex and coercive whenever ``T > 0``, which always holds.
    """

    def __init__(self, x, b, a, p, tail: Bracket):
        self.x = np.asarray(x, dtype=complex)
        self.b = np.asarray(b, dtype=float)
        self.a = np.asarray(a, dtype=float)
        self.p = p
        self.tail = tail
        self.evaluations = 0

    def value(self, c, tail=None):
        t = self.tail.mid if tail is None else tail
        self.evaluations += 1
        d = np.abs(self.x - c * self.b)
        return float(np.sum(self.a * d**self.p) + abs(c) ** self.p * t)

    def interval(self, c) -> Bracket:
        return Bracket(self.value(c, self.tail.lower), self.value(c, self.tail.upper))

    def derivative(self, c, tail=None):
        t = self.tail.mid if tail is None else tail
        p = self.p
        self.evaluations += 1
        d = self.x - c * self.b
        ad = np.abs(d)
        nz = ad > 0
        safe = np.where(nz, ad, 1.0)
        inner = np.where(nz, safe ** (p - 2) * d.real, 0.0)
        head = -p * np.sum(self.a * self.b * inner)
        return float(head + p * math.copysign(abs(c) ** (p - 1), c) * t)

    def radius(self):
        """Every minimiser lies in ``[-R, R]``: beyond it ``|c|^p T > f(0)``."""
        f0 = float(np.sum(self.a * np.abs(self.x) ** self.p))
        if f0 == 0:
            return 0.0
        return (f0 / self.tail.lower) ** (1.0 / self.p) * (1 + 1e-9) + 1e-300


def _stability_objective(u: FinSeq, p) -> ShiftObjective:
    m = u.max_support
    n = np.arange(2, max(m, 1) + 1, dtype=float)
    x = u.dense(max(m, 1) + 1)[2:]
    beta = (p - 1) / p
    a = 1.0 / (n**p * np.log(n) ** p)
    return ShiftObjective(x, n**beta, a, p, log_tail(p, max(m, 1) + 1))


def _critical_objective(values: np.ndarray, p) -> ShiftObjective:
    m = values.size - 1
    n = np.arange(2, max(m, 1) + 1, dtype=float)
    x = values[2:] if m >= 2 else np.zeros(0)
    a = 1.0 / (n * np.log(n) ** p)
    return ShiftObjective(x, np.ones_like(n), a, p, log_tail(p, max(m, 1) + 1))


def minimize_shift(obj: ShiftObjective, tol=SHIFT_TOL) -> ConstantEstimate:
    """Derivative-sign bisection for the convex shift objective.

    Starts from ``[-R, R]`` with ``R`` from coercivity; the returned bracket
    has ``f' <= 0`` at its lower end and ``f' >= 0`` at its upper end.  Falls
    back to golden-section search if the derivative is not finite.
    """
    R = obj.radius()
    if R == 0:
        return ConstantEstimate(0.0, 0.0, 0.0, Method.BISECTION, obj.evaluations)
    lo, hi = -R, R
    dlo, dhi = obj.derivative(lo), obj.derivative(hi)
    if not (math.isfinite(dlo) and math.isfinite(dhi)):
        return golden_section(obj.value, lo, hi, tol, counter=obj)
    if dlo > 0 or dhi < 0:
        raise BudgetError("coercivity bracket does not enclose the minimiser", (lo, hi),
                          obj.evaluations)
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        dm = obj.derivative(mid)
        if not math.isfinite(dm):
            return golden_section(obj.value, lo, hi, tol, counter=obj)
        if dm > 0:
            hi = mid
        elif dm < 0:
            lo = mid
        else:
            lo = hi = mid
    else:
        raise BudgetError("bisection budget exhausted", (lo, hi), obj.evaluations)
    return ConstantEstimate(0.5 * (lo + hi), lo, hi, Method.BISECTION, obj.evaluations)


def golden_section(f, a, b, tol, counter=None, max_iter=500) -> ConstantEstimate:
    """Golden-section search for a unimodal ``f`` on ``[a, b]``."""
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a), abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        evals += 1
    else:
        raise BudgetError("golden-section budget exhausted", (a, b), evals)
    total = counter.evaluations if counter is not None else evals
    return ConstantEstimate(0.5 * (a + b), a, b, Method.GOLDEN_SECTION, total)


def optimal_shift(u: FinSeq, p, tol=SHIFT_TOL) -> ConstantEstimate:
    """Minimiser ``c*`` of ``sum_{n>=2} |u(n) - c n^((p-1)/p)|^p / (n^p log^p n)``."""
    p = check_exponent(p)
    return minimize_shift(_stability_objective(u, p), tol)


def shift_objective(u: FinSeq, p, c) -> Bracket:
    """The infinite-series objective at ``c`` as an interval (tail bracketed)."""
    p = check_exponent(p)
    return _stability_objective(u, p).interval(c)


_C1_CACHE: dict = {}
_C1_LOCK = threading.Lock()


def c1_lower(p) -> float:
    """Conservative (lower) end of the c1(p) bracket, computed once per ``p``."""
    p = float(p)
    with _C1_LOCK:
        if p not in _C1_CACHE:
            _C1_CACHE[p] = cp_lower_constant(p, 1e-9)
        return _C1_CACHE[p].lower


def stability_prefactor(p) -> float:
    """``c1(p) / 2^(p-1) ((p-1)/p)^p`` using the lower end of the c1 bracket."""
    p = check_exponent(p, 2.0, strict=False)
    return c1_lower(p) / 2 ** (p - 1) * ((p - 1) / p) ** p


@dataclass(frozen=True)
class StabilityReport:
    deficit: float
    c_star: float
    infimum_value: float
    infimum_upper: float
    prefactor: float
    bound: float
    margin: float
    truncation: int

    def holds(self, rel_tol=1e-10) -> bool:
        return self.margin >= -rel_tol * (abs(self.deficit) + 1.0)

    def as_dict(self) -> dict:
        return asdict(self)


def stability_report(u: FinSeq, p, tol=SHIFT_TOL) -> StabilityReport:
    """Both sides of the stability inequality for ``p >= 2``.

    ``infimum_value`` evaluates the objective at ``c*`` with the lower tail
    bracket, so ``bound`` never overstates the right-hand side through tail
    truncation; ``infimum_upper`` uses the upper bracket.
    """
    p = check_exponent(p, 2.0, strict=False)
    deficit = hardy_deficit(u, p)
    obj = _stability_objective(u, p)
    est = minimize_shift(obj, tol)
    inf = obj.interval(est.value)
    pref = stability_prefactor(p)
    bound = pref * inf.lower
    return StabilityReport(
        deficit=deficit,
        c_star=est.value,
        infimum_value=inf.lower,
        infimum_upper=inf.upper,
        prefactor=pref,
        bound=bound,
        margin=deficit - bound,
        truncation=u.horizon,
    )


class CriticalHardyResult(NamedTuple):
    lhs: float
    rhs: float
    slack: float
    rhs_at_first: float
    c_star: float


def _real_values(vseq) -> np.ndarray:
    if isinstance(vseq, FinSeq):
        if not vseq.is_real():
            raise DomainError("critical Hardy check needs a real sequence")
        return vseq.dense(vseq.horizon + 1).real
    arr = np.asarray(vseq, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise DomainError("sequence values must be finite")
    # arr[k] is v(k + 1); prepend the unused v(0) slot and a zero tail
    return np.concatenate(([0.0], arr, [0.0]))


def critical_hardy_check(vseq, p, tol=SHIFT_TOL) -> CriticalHardyResult:
    """Both sides of the logarithmic critical Hardy inequality::

        sum_{n>=2} |v(n) - v(n-1)|^p n^(p-1) >= ((p-1)/p)^p inf_c sum_{n>=2} |v(n) - c|^p / (n log^p n)

    ``vseq`` is a real :class:`FinSeq` or an array holding ``v(1), v(2), ...``.
    ``rhs_at_first`` is the right-hand side with ``c = v(1)`` instead of the
    infimum, which is never smaller.
    """
    p = check_exponent(p)
    vals = _real_values(vseq)
    n = np.arange(2, vals.size, dtype=float)
    lhs = float(np.sum(np.abs(vals[2:] - vals[1:-1]) ** p * n ** (p - 1)))
    k = ((p - 1) / p) ** p
    obj = _critical_objective(vals, p)
    est = minimize_shift(obj, tol)
    rhs = k * obj.value(est.value, obj.tail.lower)
    first = k * obj.value(vals[1] if vals.size > 1 else 0.0, obj.tail.lower)
    return CriticalHardyResult(lhs, rhs, lhs - rhs, first, est.value)


@dataclass(frozen=True)
class MuckenhouptEstimate:
    """Interval for ``sup_r tail_mu(r) (sum_{k<=r} 1/(k+1))^(p-1)`` over ``r <= r_max``.

    ``exceeding`` lists the ``r`` whose certified lower value is above
    ``bound = 1/(p-1)``.
    """

    sup_lower: float
    sup_upper: float
    r_at_sup: int
    bound: float
    r_max: int
    exceeding: tuple = ()

    def within_bound(self, tol=1e-6) -> bool:
        return self.sup_upper <= self.bound + tol

    def as_dict(self) -> dict:
        d = asdict(self)
        d["exceeding"] = list(self.exceeding)[:20]
        d["exceeding_count"] = len(self.exceeding)
        return d


def muckenhoupt_terms(p, r_max, tail_order=DEFAULT_ORDER):
    """Per-``r`` intervals ``(r, lower, upper)`` as numpy arrays."""
    p = check_exponent(p)
    if r_max < 1:
        raise DomainError("r_max must be >= 1")
    if 2**tail_order <= r_max:
        raise DomainError("tail_order must put 2**tail_order beyond r_max")
    r = np.arange(1, r_max + 1)
    harmonic = np.cumsum(1.0 / (r + 1.0))
    tail = log_tail(p, r + 1, tail_order)  # sum_{k>=r} mu(k) = sum_{m>=r+1} 1/(m log^p m)
    h = harmonic ** (p - 1)
    return r, tail.lower * h, tail.upper * h


def muckenhoupt_constant(p, r_max=10**4, tail_order=DEFAULT_ORDER) -> MuckenhouptEstimate:
    """Muckenhoupt quantity for ``mu(n) = 1/((n+1) log^p(n+1))``, ``nu(n) = (n+1)^(p-1)``.

    Tails are summed explicitly up to ``2**tail_order`` and closed with
    integral bounds; the running supremum is returned as an interval.
    """
    p = check_exponent(p)
    r, lo, hi = muckenhoupt_terms(p, r_max, tail_order)
    bound = 1.0 / (p - 1)
    k = int(np.argmax(hi))
    over = tuple(int(x) for x in r[lo > bound])
    return MuckenhouptEstimate(float(lo.max()), float(hi.max()), int(r[k]), bound,
                               int(r_max), over)
