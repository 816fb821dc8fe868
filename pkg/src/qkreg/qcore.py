"""q-arithmetic primitives and q-special functions.

Everything here works for a deformation parameter ``0 < q < 1``, except the
Tsallis pair :func:`tsallis_ln` / :func:`tsallis_exp`, which also accept the
endpoints ``q = 0`` and ``q = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DivergentSeries, DomainError, TruncationIncomplete

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QParam:
    """Validated deformation parameter ``q`` in the open interval (0, 1).

    ``one_limit_epsilon`` is the distance to 1 below which the classical
    formulas (``n``, ``n!``, ``exp``) replace the q-analogs.
    """

    q: float
    one_limit_epsilon: float = 1e-8

    def __post_init__(self):
        q = float(self.q)
        if not (0.0 < q < 1.0) or not math.isfinite(q):
            raise DomainError(f"q must lie strictly inside (0, 1), got {self.q!r}")
        if self.one_limit_epsilon < 0:
            raise DomainError("one_limit_epsilon must be nonnegative")
        object.__setattr__(self, "q", q)

    @property
    def nu(self) -> float:
        """Half-width 1/sqrt(1-q) that replaces infinity in improper q-integrals."""
        return 1.0 / math.sqrt(1.0 - self.q)

    @property
    def classical(self) -> bool:
        return 1.0 - self.q < self.one_limit_epsilon

    def __float__(self):
        return self.q


QLike = Union[QParam, float]


def as_qparam(q: QLike) -> QParam:
    return q if isinstance(q, QParam) else QParam(float(q))


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation rule for infinite series and Jackson sums.

    A sum stops once a term falls below ``tol``; reaching ``max_terms`` first
    raises :class:`TruncationIncomplete` when ``strict`` is set, otherwise the
    partial result is returned with its completion flag cleared.
    """

    tol: float = 1e-14
    max_terms: int = 10_000
    strict: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if int(self.max_terms) < 1:
            raise DomainError("max_terms must be at least 1")


DEFAULT_POLICY = SeriesPolicy()


def q_number(n: int, q: QLike) -> float:
    """``[n]_q = (1 - q**n) / (1 - q)``; ``[0]_q = 0``."""
    qp = as_qparam(q)
    n = int(n)
    if n < 0:
        raise DomainError("q_number needs a nonnegative integer")
    if n == 0:
        return 0.0
    if qp.classical:
        return float(n)
    # expm1 keeps 1 - q**n accurate when q is close to 1
    return -math.expm1(n * math.log(qp.q)) / (1.0 - qp.q)


def q_factorial(n: int, q: QLike) -> float:
    """``[n]_q! = [n]_q [n-1]_q ... [1]_q`` with ``[0]_q! = 1``."""
    qp = as_qparam(q)
    n = int(n)
    if n < 0:
        raise DomainError("q_factorial needs a nonnegative integer")
    if qp.classical:
        return float(math.factorial(n))
    out = 1.0
    for j in range(1, n + 1):
        out *= q_number(j, qp)
    return out


def q_pochhammer(x: float, a: float, n: int, q: QLike) -> float:
    """q-analog of ``(x - a)**n``: ``(x - a)(x - q a) ... (x - q**(n-1) a)``."""
    qp = as_qparam(q)
    n = int(n)
    if n < 0:
        raise DomainError("q_pochhammer needs a nonnegative integer")
    out = 1.0
    qa = a
    for _ in range(n):
        out *= x - qa
        qa *= qp.q
    return out


def _sum_terms(first, ratio, policy, what):
    """Sum a series given its first term and a term-ratio callable.

    ``ratio(k)`` returns ``t_k / t_{k-1}``. Returns ``(value, terms_used,
    abs_sum)`` where ``abs_sum`` is the sum of term magnitudes (used to judge
    cancellation).
    """
    terms = [first]
    t = first
    k = 0
    while abs(t) >= policy.tol:
        k += 1
        if k >= policy.max_terms:
            value = math.fsum(terms)
            if policy.strict:
                raise TruncationIncomplete(
                    f"{what}: {policy.max_terms} terms did not reach tol={policy.tol:g}",
                    value=value,
                    terms_used=k,
                )
            break
        t = t * ratio(k)
        terms.append(t)
    return math.fsum(terms), len(terms), math.fsum(abs(v) for v in terms)


def _exp_product(z, q, policy, what):
    """``prod_{k>=0} (1 + z q^k)`` for ``z > -1``, with ``z = +-(1-q) x``."""
    out = 1.0
    t = z
    k = 0
    while abs(t) >= policy.tol:
        out *= 1.0 + t
        t *= q
        k += 1
        if k >= policy.max_terms:
            if policy.strict:
                raise TruncationIncomplete(f"{what} product truncated", value=out, terms_used=k)
            break
    return out


def q_exp_small(x: float, q: QLike, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Small q-exponential ``e_q^x = sum_k x**k / [k]_q!``.

    The series converges only for ``|x| < 1/(1-q)``. When rounding in the
    alternating sum (``x < 0``) could exceed ``policy.tol`` relative to the result, the equal product
    ``1 / prod_k (1 - (1-q) x q**k)`` is used.
    """
    qp = as_qparam(q)
    x = float(x)
    if qp.classical:
        return math.exp(x)
    if abs(x) * (1.0 - qp.q) >= 1.0:
        raise DivergentSeries(f"e_q^x diverges for |x| >= 1/(1-q) = {1 / (1 - qp.q):g}")
    try:
        value, _, abs_sum = _sum_terms(1.0, lambda k: x / q_number(k, qp), policy, "e_q")
    except (OverflowError, TruncationIncomplete):
        # slow convergence near |x| = 1/(1-q)
        value, abs_sum = 0.0, math.inf
    if _EPS * abs_sum > policy.tol * abs(value):
        return 1.0 / _exp_product(-(1.0 - qp.q) * x, qp.q, policy, "e_q")
    return value


def q_exp_big(x: float, q: QLike, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Big q-exponential ``E_q^x = sum_k q**(k(k-1)/2) x**k / [k]_q!`` (entire).

    For ``x < 0`` with relative cancellation error above ``policy.tol`` the equal product
    ``prod_k (1 + (1-q) x q**k)`` is used.
    """
    qp = as_qparam(q)
    x = float(x)
    if qp.classical:
        return math.exp(x)
    qq = qp.q
    try:
        value, _, abs_sum = _sum_terms(1.0, lambda k: qq ** (k - 1) * x / q_number(k, qp), policy, "E_q")
    except (OverflowError, TruncationIncomplete):
        value, abs_sum = 0.0, math.inf
    if _EPS * abs_sum > policy.tol * abs(value):
        return _exp_product((1.0 - qq) * x, qq, policy, "E_q")
    return value


def _gauss_series(x, qp, policy):
    q = qp.q
    q2 = QParam(q * q)
    z = (q - 1.0) * x * x
    terms = [1.0]
    k = 0
    while abs(terms[-1]) >= policy.tol or k == 0:
        k += 1
        if k >= policy.max_terms:
            if policy.strict:
                raise TruncationIncomplete("q-Gaussian series truncated", math.fsum(terms), k)
            break
        den = q_pochhammer(1.0, q * q, k, q2)
        terms.append(q ** (k * (k + 1)) * z**k / den)
    return math.fsum(terms), math.fsum(abs(t) for t in terms)


def q_gauss_product(u, q: QLike, policy: SeriesPolicy = DEFAULT_POLICY):
    """Product form of the q-analog of ``exp(-u**2 / 2)`` (vectorized).

    Uses ``E_{q^2}^{-q^2 u^2/[2]_q} = prod_{j>=0} (1 - (1-q) u**2 q**(2j+2))``,
    summed in log space as ``-sum_m a**m q**(2m) / (m (1 - q**(2m)))`` with
    ``a = (1-q) u**2``. Every log-term has the same sign, so there is no
    cancellation. Requires ``|u| <= nu(q)``.
    """
    qp = as_qparam(q)
    u = np.asarray(u, dtype=float)
    a = (1.0 - qp.q) * u * u
    if np.any(a > 1.0 + 1e-12):
        raise DomainError("q_gauss_product is only defined on |u| <= nu(q)")
    if qp.classical:
        return np.exp(-0.5 * u * u)
    q2 = qp.q * qp.q
    ratio = a * q2
    logv = np.zeros_like(a)
    power = np.ones_like(a)
    active = a > 0
    m = 0
    while np.any(active):
        m += 1
        if m >= policy.max_terms:
            if policy.strict:
                raise TruncationIncomplete("q-Gaussian product truncated", terms_used=m)
            break
        power = power * ratio
        term = power / (m * -math.expm1(m * math.log(q2)))
        logv = np.where(active, logv - term, logv)
        # stop once the log-sum is converged or exp() would underflow anyway
        active &= (term >= policy.tol * np.maximum(1.0, np.abs(logv))) & (logv > -750.0)
    out = np.exp(logv)
    return out.item() if out.ndim == 0 else out


def q_gauss_series(x: float, q: QLike, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """q-analog of ``exp(-x**2/2)``: ``E_{q^2}^{-q^2 x^2 / [2]_q}``.

    Evaluates ``sum_k q**(k(k+1)) (q-1)**k x**(2k) / (1-q^2)^k_{q^2}``. When the
    alternating terms are large enough that rounding in the sum would exceed
    ``policy.tol`` (``q`` near 1 with ``|x|`` near ``nu``), the equivalent
    product form :func:`q_gauss_product` is returned instead.
    """
    qp = as_qparam(q)
    x = float(x)
    if x * x * (1.0 - qp.q) > 1.0 + 1e-12:
        raise DomainError(f"q_gauss_series needs |x| <= nu(q) = {qp.nu:g}")
    if qp.classical:
        return math.exp(-0.5 * x * x)
    try:
        value, abs_sum = _gauss_series(x, qp, policy)
    except (OverflowError, TruncationIncomplete):
        abs_sum = math.inf
    if _EPS * abs_sum > policy.tol:
        return float(q_gauss_product(x, qp, policy))
    return value


def _check_tsallis_q(q):
    q = float(q)
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"Tsallis functions take q in [0, 1], got {q!r}")
    return q


def tsallis_ln(x, q: float, one_limit_epsilon: float = 1e-8):
    """Tsallis q-logarithm ``(x**(1-q) - 1) / (1 - q)``; ``ln`` at ``q = 1``."""
    q = _check_tsallis_q(q)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("tsallis_ln needs x > 0")
    if 1.0 - q < one_limit_epsilon:
        out = np.log(x)
    else:
        out = np.expm1((1.0 - q) * np.log(x)) / (1.0 - q)
    return out.item() if out.ndim == 0 else out


def tsallis_exp(x, q: float, one_limit_epsilon: float = 1e-8):
    """Tsallis q-exponential ``[1 + (1-q) x]**(1/(1-q))``; ``exp`` at ``q = 1``."""
    q = _check_tsallis_q(q)
    x = np.asarray(x, dtype=float)
    if 1.0 - q < one_limit_epsilon:
        out = np.exp(x)
    else:
        base = (1.0 - q) * x
        if np.any(base < -1.0):
            raise DomainError("tsallis_exp needs 1 + (1-q) x >= 0")
        with np.errstate(divide="ignore"):
            out = np.exp(np.log1p(base) / (1.0 - q))
    return out.item() if out.ndim == 0 else out


def sup_norm(values) -> float:
    """Grid proxy for the L_q^inf norm: ``max |values|``."""
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values))) if values.size else 0.0
