"""Supersolution method: Hardy weights, sharp remainders and identity checks.

A supersolution pair ``(v, phi)`` with exponent ``p`` generates the weight

    w(n) = [v(n) dphi(n)^(p-1) - v(n+1) dphi(n+1)^(p-1)] / phi(n)^(p-1)

with ``dphi(n) = phi(n) - phi(n-1)``, and for every finitely supported ``u``
with ``u(0) = 0``::

    sum v(n)|u(n) - u(n-1)|^p = sum w(n)|u(n)|^p + sum_{n>=2} v(n) R_p(n)

where the remainder ``R_p(n)`` is a non-negative combination of two C_p
values.  Any smaller weight turns the identity into an inequality.

All infinite sums are truncated at ``u.horizon = max_support + 1``; beyond
that index every summand is exactly zero.  Sums are reduced with numpy's
pairwise summation over index-ordered arrays, so results do not depend on
evaluation order elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from .cp_core import ABS_TOL, _cp, check_exponent
from .errors import InvariantViolation, SumOverflowError
from .sequence import FinSeq

Profile = Union[Callable, np.ndarray]
UNDERFLOW = 1e-300


def _evaluate(fn, ns, dtype=float):
    """Evaluate a profile on the integer array ``ns`` (all >= 1).

    Callables receive an array of ``dtype``; with ``np.longdouble`` a
    vectorised profile is computed in extended precision where the
    platform has it.
    """
    if isinstance(fn, np.ndarray) or isinstance(fn, (list, tuple)):
        table = np.asarray(fn, dtype=float)
        if ns.size and ns.max() >= table.size:
            raise InvariantViolation(
                f"tabulated profile covers [0, {table.size - 1}], need index {ns.max()}"
            )
        return table[ns].astype(dtype)
    x = ns.astype(dtype)
    try:
        out = np.asarray(fn(x))
        if out.shape == x.shape:
            return out.astype(np.result_type(out.dtype, dtype))
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(int(k))) for k in ns], dtype=dtype)


@dataclass(frozen=True)
class WeightPair:
    """Supersolution data ``(v, phi)`` and the exponent ``p``.

    ``v`` and ``phi`` are callables accepting float arrays of indices (or a
    scalar index as fallback), or tables indexed from 0.  ``phi(0) = 0`` is
    part of the definition: callables are only ever evaluated at ``n >= 1``
    and tables must store 0 at index 0.  An optional ``dphi`` gives the
    differences ``phi(n) - phi(n-1)`` directly (more accurate than
    subtracting for slowly growing ``phi``).
    """

    v: Profile
    phi: Profile
    p: float
    dphi: Callable | None = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "p", check_exponent(self.p))
        if not callable(self.phi):
            table = np.asarray(self.phi, dtype=float)
            if table.size == 0 or table[0] != 0:
                raise InvariantViolation("tabulated phi must have phi(0) = 0")

    def tabulate(self, last: int, validate: bool = True, dtype=float):
        """Return ``(v, phi, dphi)`` arrays over indices ``0..last``.

        Entry 0 of ``v`` and ``dphi`` is unused and set to 0.  With
        ``validate`` the invariants are checked on ``1..last`` first.
        """
        ns = np.arange(1, last + 1)
        v = np.zeros(last + 1, dtype=dtype)
        phi = np.zeros(last + 1, dtype=dtype)
        dphi = np.zeros(last + 1, dtype=dtype)
        if last >= 1:
            v[1:] = _evaluate(self.v, ns, dtype)
            phi[1:] = _evaluate(self.phi, ns, dtype)
            if self.dphi is not None:
                dphi[1:] = _evaluate(self.dphi, ns, dtype)
            else:
                dphi[1:] = phi[1:] - phi[:-1]
        if validate:
            self._check(v, phi, dphi)
        return v, phi, dphi

    def _check(self, v, phi, dphi):
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(phi)) and np.all(np.isfinite(dphi))):
            raise InvariantViolation(f"{self.name}: non-finite profile values")
        if np.any(v[1:] < 0):
            n = int(np.argmax(v[1:] < 0)) + 1
            raise InvariantViolation(f"{self.name}: v({n}) = {v[n]} < 0")
        if np.any(phi[1:] <= 0):
            n = int(np.argmax(phi[1:] <= 0)) + 1
            raise InvariantViolation(f"{self.name}: phi({n}) = {phi[n]} is not positive")
        if np.any(dphi[1:] < 0):
            n = int(np.argmax(dphi[1:] < 0)) + 1
            raise InvariantViolation(f"{self.name}: phi decreases at n = {n}")

    def flux(self, v, dphi):
        """``v(n) dphi(n)^(p-1)``, the discrete ``v |phi'|^(p-2) phi'``."""
        return v * dphi ** (self.p - 1)


def _as_index_array(n):
    arr = np.asarray(n)
    if np.any(arr < 1):
        raise ValueError("indices must be >= 1")
    return arr.astype(np.int64)


def hardy_weight(wp: WeightPair, n):
    """Weight generated by ``wp`` with equality in the supersolution condition.

    May be negative for adversarial pairs; that is reported, not rejected.
    """
    ns = _as_index_array(n)
    top = int(ns.max()) if ns.size else 1
    # the flux difference cancels about log10(n) digits; extended precision absorbs that
    v, phi, dphi = wp.tabulate(top + 1, dtype=np.longdouble)
    w = _weights(wp, v, phi, dphi)
    out = w[ns].astype(float)
    return float(out) if out.ndim == 0 else out


def _weights(wp, v, phi, dphi):
    """Generated weights on ``0..len-2`` (entry 0 is meaningless, set to 0)."""
    q = wp.flux(v, dphi)
    w = np.zeros(v.size - 1, dtype=v.dtype)
    w[1:] = (q[1:-1] - q[2:]) / phi[1:-1] ** (wp.p - 1)
    return w


def check_condition(wp: WeightPair, w, last: int, abs_tol: float = ABS_TOL):
    """Slack of the supersolution condition for a candidate weight on ``1..last``.

    ``slack(n) = v(n) dphi(n)^(p-1) - v(n+1) dphi(n+1)^(p-1) - w(n) phi(n)^(p-1)``.
    ``w`` is a callable or a table indexed from 0.  Returns the list of
    ``(n, slack)``; the condition holds when every slack is at least
    ``-abs_tol`` times the size of the terms (see :func:`condition_holds`).
    """
    ns = np.arange(1, last + 1)
    v, phi, dphi = wp.tabulate(last + 1)
    slack, _ = _slacks(wp, v, phi, dphi, _evaluate(w, ns))
    return list(zip(ns.tolist(), slack.tolist()))


def _slacks(wp, v, phi, dphi, w):
    q = wp.flux(v, dphi)
    target = w * phi[1:-1] ** (wp.p - 1)
    slack = q[1:-1] - q[2:] - target
    scale = np.abs(q[1:-1]) + np.abs(q[2:]) + np.abs(target)
    return slack, scale


def condition_holds(wp: WeightPair, w, last: int, abs_tol: float = ABS_TOL) -> bool:
    ns = np.arange(1, last + 1)
    v, phi, dphi = wp.tabulate(last + 1)
    slack, scale = _slacks(wp, v, phi, dphi, _evaluate(w, ns))
    return bool(np.all(slack >= -abs_tol * scale))


def _remainder_terms(u, phi, dphi, p):
    """``R_p(n)`` for ``n = 1..len(u)-1``; ``R_p(1) = 0``.  Output index ``n - 1``."""
    out = np.zeros(u.size - 1)
    if u.size <= 2:
        return out
    un = u[2:]
    um = u[1:-1]
    ph = phi[2:u.size]
    pm = phi[1:u.size - 1]
    dp = dphi[2:u.size]
    # differences xi - eta are passed in closed form: un dphi/phi and un/phi
    psi_n = un / ph
    first = _cp(un - um, (pm / ph) * un - um, psi_n * dp, p)
    psi_m = um / pm
    second = pm * dp ** (p - 1) * _cp(psi_m, psi_m - psi_n, psi_n, p)
    out[1:] = first + second
    return out


def remainder(u: FinSeq, wp: WeightPair, n: int) -> float:
    """The sharp remainder ``R_p(u(n), phi(n))`` at a single index ``n >= 1``."""
    if n < 1:
        raise ValueError("remainder is defined for n >= 1")
    if n == 1:
        wp.tabulate(1)
        return 0.0
    _, phi, dphi = wp.tabulate(n)
    x = u.dense(n + 1)[n - 1:]
    ph = phi[n - 1:n + 1]
    dp = dphi[n - 1:n + 1]
    padded = np.concatenate(([0j], x))
    return float(_remainder_terms(padded, np.concatenate(([0.0], ph)),
                                  np.concatenate(([0.0], dp)), wp.p)[-1])


@dataclass(frozen=True)
class VerificationReport:
    """Per-index and aggregate breakdown of the weighted Hardy identity.

    ``residual = lhs - weight_sum - remainder_sum``.  In identity mode it is
    zero up to rounding; in inequality mode (weight below the generated
    one) it is the non-negative slack.
    """

    lhs: float
    weight_sum: float
    remainder_sum: float
    residual: float
    n: np.ndarray = field(repr=False)
    lhs_terms: np.ndarray = field(repr=False)
    weight_terms: np.ndarray = field(repr=False)
    remainder_terms: np.ndarray = field(repr=False)
    negative_weights: tuple = ()
    mode: str = "identity"
    min_condition_slack: float | None = None

    @property
    def scale(self) -> float:
        return abs(self.lhs) + abs(self.weight_sum) + abs(self.remainder_sum)

    @property
    def relative_residual(self) -> float:
        s = self.scale
        return abs(self.residual) / s if s > 0 else abs(self.residual)

    @property
    def slack(self) -> float:
        return self.residual

    @property
    def per_index(self):
        """List of ``(n, lhs_n, w_n |u(n)|^p, v(n) R_p(n))``."""
        return list(zip(self.n.tolist(), self.lhs_terms.tolist(),
                        self.weight_terms.tolist(), self.remainder_terms.tolist()))

    def identity_holds(self, rel_tol=1e-9) -> bool:
        # UNDERFLOW absorbs results that are subnormal, where relative error means nothing
        return abs(self.residual) <= rel_tol * self.scale + UNDERFLOW

    def inequality_holds(self, rel_tol=1e-9) -> bool:
        return self.residual >= -rel_tol * self.scale - UNDERFLOW

    def as_dict(self, per_index=False) -> dict:
        d = {
            "mode": self.mode,
            "lhs": self.lhs,
            "weight_sum": self.weight_sum,
            "remainder_sum": self.remainder_sum,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "negative_weight_indices": list(self.negative_weights),
        }
        if self.min_condition_slack is not None:
            d["min_condition_slack"] = self.min_condition_slack
        if per_index:
            d["per_index"] = [list(row) for row in self.per_index]
        return d


def _finalize(lhs_t, w_t, r_t, ns, **extra):
    lhs = float(np.sum(lhs_t))
    ws = float(np.sum(w_t))
    rs = float(np.sum(r_t))
    if not (np.isfinite(lhs) and np.isfinite(ws) and np.isfinite(rs)):
        raise SumOverflowError("series overflowed double precision")
    return VerificationReport(lhs, ws, rs, lhs - ws - rs, ns, lhs_t, w_t, r_t, **extra)


def _empty_report(mode):
    z = np.zeros(0)
    return VerificationReport(0.0, 0.0, 0.0, 0.0, np.zeros(0, np.int64), z, z, z, mode=mode)


def verify_identity(u: FinSeq, wp: WeightPair) -> VerificationReport:
    """Evaluate both sides of the weighted identity with the generated weight.

    The pair's invariants are validated on ``[0, horizon + 1]`` before any
    other arithmetic.  Indices in the support where the generated weight is
    negative are listed in ``negative_weights``.
    """
    top = u.horizon
    v, phi, dphi = wp.tabulate(top + 1)
    if u.is_zero():
        return _empty_report("identity")
    w = _weights(wp, v, phi, dphi)[:top + 1]
    return _assemble(u, wp, v, phi, dphi, w, "identity")


def verify_inequality(u: FinSeq, wp: WeightPair, w) -> VerificationReport:
    """Inequality reading with a caller-supplied weight ``w``.

    ``w`` is a callable or table indexed from 0.  The report's residual is
    the slack ``lhs - sum w|u|^p - remainder_sum``; ``min_condition_slack``
    is the smallest slack of the supersolution condition over the support.
    """
    top = u.horizon
    v, phi, dphi = wp.tabulate(top + 1)
    if u.is_zero():
        return _empty_report("inequality")
    ns = np.arange(1, top + 1)
    wt = np.zeros(top + 1)
    wt[1:] = _evaluate(w, ns)
    slack, _ = _slacks(wp, v, phi, dphi, wt[1:])
    rep = _assemble(u, wp, v, phi, dphi, wt, "inequality")
    return replace(rep, min_condition_slack=float(slack[:u.max_support].min()))


def _assemble(u, wp, v, phi, dphi, w, mode):
    p = wp.p
    top = u.horizon
    x = u.dense(top + 1)
    ns = np.arange(1, top + 1)
    lhs_t = v[1:top + 1] * np.abs(x[1:] - x[:-1]) ** p
    absu = np.abs(x[1:]) ** p
    w_t = w[1:top + 1] * absu
    r_t = v[1:top + 1] * _remainder_terms(x, phi, dphi, p)
    neg = tuple(int(k) for k in ns[(w[1:top + 1] < 0) & (absu > 0)])
    return _finalize(lhs_t, w_t, r_t, ns, negative_weights=neg, mode=mode)


def pointwise_identity_residual(u: FinSeq, wp: WeightPair, n: int) -> float:
    """Residual of the per-index identity behind the weighted Hardy identity.

    ``|u(n) - u(n-1)|^p - dphi(n)^(p-1) (phi(n)|psi(n)|^p - phi(n-1)|psi(n-1)|^p) - R_p(n)``
    with ``psi = u / phi`` and ``psi(0) = 0``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = wp.p
    _, phi, dphi = wp.tabulate(n)
    un, um = u[n], u[n - 1]
    psi_n = un / phi[n]
    psi_m = um / phi[n - 1] if n >= 2 else 0j
    mid = dphi[n] ** (p - 1) * (phi[n] * abs(psi_n) ** p - phi[n - 1] * abs(psi_m) ** p)
    return abs(un - um) ** p - mid - remainder(u, wp, n)
