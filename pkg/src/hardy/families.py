"""Closed-form Hardy weights and supersolution pairs.

Families:

* classical weight ``((p-1)/p)^p / n^p``;
* Fischer-Keller-Pogorzelski weight ``w_p`` (strictly above the classical one);
* power weights ``w_{p,alpha,beta}`` from ``v(n) = n^alpha``, ``phi(n) = n^beta``;
* Copson pair with a Gamma-ratio ``phi`` for ``alpha < 0``;
* the Huang-Ye ``p = 2`` identity for arbitrary positive ``phi``.

The power-weight bracket ``A^(p-1) - (1+1/n)^alpha B^(p-1)`` with
``A = 1 - (1-1/n)^beta`` and ``B = (1+1/n)^beta - 1`` loses roughly ``log10 n``
digits when evaluated directly.  Here ``A - B`` comes from its even Taylor
series for small ``1/n`` and the bracket is rewritten as
``(1+x)^alpha B^(p-1) expm1((p-1) log1p((A-B)/B) - alpha log1p(x))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .cp_core import check_exponent
from .engine import VerificationReport, WeightPair, _finalize, _remainder_terms
from .errors import DomainError, PreconditionError
from .sequence import FinSeq

# ratio of Bernoulli number B_2k to 2k(2k-1), k = 1..7
_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156)
_ASYMPTOTIC_FROM = 30.0
_L_SERIES_BELOW = 0.0625
_L_TERMS = 18


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the power family ``v = n^alpha``, ``phi = n^beta``.

    ``beta < 0`` is only admitted for ``p = 2``, where the identity no
    longer needs ``phi`` to be non-decreasing.
    """

    p: float
    alpha: float = 0.0
    beta: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "p", check_exponent(self.p))
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise DomainError("alpha and beta must be finite")
        if self.beta < 0 and self.p != 2.0:
            raise DomainError("beta < 0 is only supported for p = 2")


def _n(n):
    arr = np.asarray(n, dtype=float)
    if np.any(arr < 1):
        raise DomainError("weights are defined for n >= 1")
    return arr


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def classical_weight(p, n):
    """``((p-1)/p)^p / n^p``."""
    p = check_exponent(p)
    return _out(((p - 1) / p) ** p / _n(n) ** p)


def _log_series(f, terms):
    """Coefficients of ``log(f(x) / f(0))`` for a power series ``f``."""
    g = np.zeros(terms + 1)
    for k in range(1, terms + 1):
        acc = k * f[k] - sum(j * g[j] * f[k - j] for j in range(1, k))
        g[k] = acc / (k * f[0])
    return g


@lru_cache(maxsize=256)
def _exponent_series(p, alpha, beta, terms=_L_TERMS):
    """Taylor coefficients in ``x = 1/n`` of ``(p-1) log(A/B) - alpha log(1+x)``.

    ``A = 1 - (1-x)^beta`` and ``B = (1+x)^beta - 1``.  The linear
    coefficient is set in closed form: it vanishes exactly when
    ``alpha = (p-1)(1-beta)``, where the weight is one order smaller.
    """
    binom = np.ones(terms + 2)
    for k in range(1, terms + 2):
        binom[k] = binom[k - 1] * (beta - k + 1) / k
    ks = np.arange(terms + 1)
    a = -binom[1:] * (-1.0) ** (ks + 1)  # A / x
    b = binom[1:].copy()  # B / x
    log1p = np.zeros(terms + 1)
    log1p[1:] = (-1.0) ** (ks[1:] + 1) / ks[1:]
    ell = (p - 1) * (_log_series(a, terms) - _log_series(b, terms)) - alpha * log1p
    ell[1] = (p - 1) * (1 - beta) - alpha
    return ell


def _bracket(p, alpha, beta, n):
    """``A^(p-1) - (1 + 1/n)^alpha B^(p-1)`` with ``A = 1 - (1-1/n)^beta``, ``B = (1+1/n)^beta - 1``.

    Far from the origin both terms agree to leading order, so the bracket is
    written as ``(1+x)^alpha B^(p-1) expm1(L(x))`` with ``x = 1/n`` and ``L``
    summed from its Taylor series.  Close to the origin the direct formula
    is evaluated in extended precision.
    """
    n = _n(n)
    x = 1.0 / n
    far = x <= _L_SERIES_BELOW
    out = np.empty(np.shape(x))
    if np.any(far):
        xf = x[far] if np.ndim(x) else x
        B = np.expm1(beta * np.log1p(xf))
        expo = np.zeros_like(xf)
        if beta != 0:
            ell = _exponent_series(float(p), float(alpha), float(beta))
            expo = np.polynomial.polynomial.polyval(xf, ell)
        Bp = B if p == 2.0 else np.abs(B) ** (p - 1)  # B < 0 only when beta < 0, p = 2
        val = (1.0 + xf) ** alpha * Bp * np.expm1(expo)
        if np.ndim(x):
            out[far] = val
        else:
            out = np.asarray(val, dtype=float)
    near = ~far
    if np.any(near):
        xn = np.asarray(x[near] if np.ndim(x) else x, dtype=np.longdouble)
        first = xn == 1
        A = np.where(first, 1, -np.expm1(beta * np.log1p(-np.where(first, 0, xn))))
        B = np.expm1(beta * np.log1p(xn))
        grow = (1 + xn) ** alpha
        if p == 2.0:
            val = A - grow * B
        else:
            val = np.abs(A) ** (p - 1) - grow * np.abs(B) ** (p - 1)
        if np.ndim(x):
            out[near] = val.astype(float)
        else:
            out = np.asarray(val, dtype=float)
    return out


def fkp_weight(p, n):
    """``(1 - (1 - 1/n)^b)^(p-1) - ((1 + 1/n)^b - 1)^(p-1)`` with ``b = (p-1)/p``."""
    p = check_exponent(p)
    return _out(_bracket(p, 0.0, (p - 1) / p, n))


def power_weight(fp: FamilyParams, n):
    """``n^alpha [(1 - (1-1/n)^beta)^(p-1) - (1+1/n)^alpha ((1+1/n)^beta - 1)^(p-1)]``."""
    nn = _n(n)
    return _out(nn**fp.alpha * _bracket(fp.p, fp.alpha, fp.beta, nn))


def _float(n):
    """Float array keeping an extended-precision input dtype."""
    arr = np.asarray(n)
    return arr if arr.dtype.kind == "f" else arr.astype(float)


def power_pair(fp: FamilyParams) -> WeightPair:
    """Supersolution pair ``v(n) = n^alpha``, ``phi(n) = n^beta``."""
    alpha, beta = fp.alpha, fp.beta

    def dphi(n):
        n = _float(n)
        if beta == 0:
            return np.where(n == 1, 1.0, 0.0)
        with np.errstate(divide="ignore"):
            return -(n**beta) * np.expm1(beta * np.log1p(-1.0 / n))

    return WeightPair(
        v=lambda n: _float(n) ** alpha,
        phi=lambda n: _float(n) ** beta,
        p=fp.p,
        dphi=dphi,
        name=f"power(alpha={alpha:g}, beta={beta:g})",
    )


def fkp_pair(p) -> WeightPair:
    """``v = 1``, ``phi(n) = n^((p-1)/p)``: generates exactly :func:`fkp_weight`."""
    p = check_exponent(p)
    return power_pair(FamilyParams(p, 0.0, (p - 1) / p))


def log_gamma_ratio(z, a):
    """``log(Gamma(z + a) / Gamma(z))`` for ``z >= 1`` and ``z + a > 0``.

    Direct Gamma ratio below ``z = 30``, Stirling difference above it.
    """
    z = np.asarray(z, dtype=float)
    big = z >= _ASYMPTOTIC_FROM
    zs = np.where(big, 1.0, z)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = special.gammaln(zs + a) - special.gammaln(zs)
        if a + _ASYMPTOTIC_FROM < 150:
            exact = np.log(special.gamma(zs + a) / special.gamma(zs))
            direct = np.where(np.isfinite(exact), exact, direct)
    zb = np.where(big, z, _ASYMPTOTIC_FROM)
    za = zb + a
    asym = (zb - 0.5) * np.log1p(a / zb) + a * np.log(za) - a
    for k, c in enumerate(_STIRLING, start=1):
        asym = asym + c * (za ** (1 - 2 * k) - zb ** (1 - 2 * k))
    return np.where(big, asym, direct)


def _copson_shift(p, alpha):
    return 1.0 - (alpha + 1.0) / p


def copson_phi(p, alpha, n):
    """``Gamma(n + 1 - (alpha+1)/p) / Gamma(n)`` for ``n >= 1``; 0 at ``n = 0``.

    Raises :class:`DomainError` when the numerator hits a Gamma pole.
    """
    p = check_exponent(p)
    a = _copson_shift(p, alpha)
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise DomainError("copson_phi needs n >= 0")
    pos = n >= 1
    arg = np.where(pos, n + a, 1.0)
    if np.any((arg <= 0) & (arg == np.round(arg))):
        raise DomainError("Gamma pole: n + 1 - (alpha+1)/p is a non-positive integer")
    if np.any(arg <= 0):
        raise DomainError("copson_phi undefined (negative Gamma ratio) for these parameters")
    val = np.exp(log_gamma_ratio(np.where(pos, n, 1.0), a))
    return _out(np.where(pos, val, 0.0))


def copson_constant(p, alpha):
    """``((p - alpha - 1) / p)^p``."""
    p = check_exponent(p)
    return ((p - alpha - 1.0) / p) ** p


def copson_weight(p, alpha, n):
    """Closed-form Copson weight ``((p-alpha-1)/p)^p (n+1)^(alpha-p)``."""
    return _out(copson_constant(p, alpha) * (_n(n) + 1.0) ** (alpha - check_exponent(p)))


def copson_pair(p, alpha) -> WeightPair:
    """``v(1) = 0``, ``v(n) = (n-1)^alpha``; ``phi`` the Copson Gamma ratio."""
    p = check_exponent(p)
    if not alpha < 0:
        raise DomainError("the Copson pair needs alpha < 0")
    a = _copson_shift(p, alpha)

    def v(n):
        n = np.asarray(n, dtype=float)
        return np.where(n >= 2, np.maximum(n - 1.0, 1.0) ** alpha, 0.0)

    def dphi(n):
        # phi(n) - phi(n-1) = a Gamma(n-1+a)/Gamma(n) = a phi(n-1)/(n-1)
        n = np.asarray(n, dtype=float)
        m = np.maximum(n - 1.0, 1.0)
        return np.where(n >= 2, a * copson_phi(p, alpha, m) / m, copson_phi(p, alpha, 1.0))

    return WeightPair(v=v, phi=lambda n: copson_phi(p, alpha, n), p=p, dphi=dphi,
                      name=f"copson(alpha={alpha:g})")


def copson_verify(u: FinSeq, p, alpha) -> VerificationReport:
    """Check the Copson inequality with remainder as stated::

        sum n^alpha |u(n)-u(n-1)|^p
            >= ((p-alpha-1)/p)^p sum (n+1)^(alpha-p) |u(n)|^p
               + sum_{n>=2} n^alpha R_p(u(n), phi_Cop(n))

    for ``u(0) = u(1) = 0``.  The report's ``residual`` is the slack.
    """
    p = check_exponent(p)
    if not alpha < 0:
        raise DomainError("Copson inequality needs alpha < 0")
    if u[1] != 0:
        raise PreconditionError("Copson inequality needs u(1) = 0")
    pair = copson_pair(p, alpha)
    top = u.horizon
    _, phi, dphi = pair.tabulate(top + 1)
    x = u.dense(top + 1)
    ns = np.arange(1, top + 1)
    nf = ns.astype(float)
    lhs_t = nf**alpha * np.abs(x[1:] - x[:-1]) ** p
    w_t = copson_weight(p, alpha, nf) * np.abs(x[1:]) ** p
    r_t = nf**alpha * _remainder_terms(x, phi, dphi, p)
    return _finalize(lhs_t, w_t, r_t, ns, mode="copson")


def _profile(f, ns):
    if callable(f):
        return np.asarray(f(ns.astype(float)), dtype=float)
    table = np.asarray(f, dtype=float)
    return table[ns]


def huang_ye_rhs(u: FinSeq, v, phi) -> float:
    """``sum_{n>=1} v(n+1) |sqrt(phi(n)/phi(n+1)) u(n+1) - sqrt(phi(n+1)/phi(n)) u(n)|^2``."""
    m = u.max_support
    if m == 0:
        return 0.0
    x = u.dense(m + 2)
    ns = np.arange(1, m + 2)
    ph = _profile(phi, ns)
    vv = _profile(v, ns)
    a, b = ph[:-1], ph[1:]
    terms = vv[1:] * np.abs(np.sqrt(a / b) * x[2:] - np.sqrt(b / a) * x[1:-1]) ** 2
    return float(np.sum(terms))


def huang_ye_lhs(u: FinSeq, v, phi) -> float:
    """``sum v(n)|u(n)-u(n-1)|^2 + sum div(v grad phi)(n) / phi(n) |u(n)|^2``.

    ``phi(0) = 0`` is implied; ``phi`` need only be positive on ``n >= 1``.
    """
    m = u.max_support
    if m == 0:
        return 0.0
    x = u.dense(m + 2)
    ns = np.arange(1, m + 3)
    ph = np.concatenate(([0.0], _profile(phi, ns)))
    vv = np.concatenate(([0.0], _profile(v, ns)))
    flux = vv[1:] * (ph[1:] - ph[:-1])  # index k -> n = k + 1
    div = flux[1:m + 2] - flux[:m + 1]  # n = 1..m+1
    first = np.sum(vv[1:m + 2] * np.abs(x[1:] - x[:-1]) ** 2)
    second = np.sum(div / ph[1:m + 2] * np.abs(x[1:]) ** 2)
    return float(first + second)
