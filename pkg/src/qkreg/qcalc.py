"""Jackson integration, q-differentiation and q-Taylor expansion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .errors import DomainError, NonFiniteEvaluation, TruncationIncomplete
from .qcore import DEFAULT_POLICY, QLike, SeriesPolicy, as_qparam, q_factorial, q_pochhammer

_CHUNK = 512


@dataclass(frozen=True)
class JacksonIntegralResult:
    value: float
    terms_used: int
    truncation_complete: bool
    tail_bound_estimate: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class QTaylorExpansion:
    """Coefficients ``(D_q^k f)(a) / [k]_q!`` for ``k = 0..order``.

    ``remainder_estimate`` is filled by :func:`q_taylor` when a check point
    ``b`` is supplied, and is ``nan`` otherwise.
    """

    center: float
    order: int
    coefficients: List[float]
    remainder_estimate: float = float("nan")


def evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on an array, falling back to a Python loop for scalar-only callables."""
    try:
        out = np.asarray(f(x), dtype=float)
        if out.shape == x.shape:
            return out
        if out.ndim == 0:
            # a constant function written as ``lambda x: 3.0``
            return np.broadcast_to(out, x.shape).astype(float)
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(v))) for v in x.ravel()]).reshape(x.shape)


def jackson_integral(
    f: Callable,
    a: float,
    b: float,
    q: QLike,
    policy: SeriesPolicy = DEFAULT_POLICY,
) -> JacksonIntegralResult:
    """Jackson q-integral ``(1-q) sum_k q^k [b f(q^k b) - a f(q^k a)]``.

    ``f`` is called with numpy arrays of grid points, in chunks. Term ``k``
    has magnitude ``m_k = (1-q) q^k (|b f(q^k b)| + |a f(q^k a)|)``; what is left
    after it is the Jackson integral over ``[q^(k+1) a, q^(k+1) b]``, bounded by
    ``R_k = q^(k+1) (|a| + |b|) max(1, F_k)`` with ``F_k`` the largest ``|f|``
    seen so far. The floor of 1 keeps the sum going until the grid itself has
    contracted, so an integrand that is tiny near the endpoints (a kernel
    tail, or a density estimate on a wide window) is not cut off before its
    mass near the origin is reached. The sum stops at
    the first ``k`` with ``m_k / (1-q) < tol`` and ``R_k < tol``; that maximum
    is reported as ``tail_bound_estimate``.
    """
    qp = as_qparam(q)
    a = float(a)
    b = float(b)
    if a == b:
        return JacksonIntegralResult(0.0, 0, True, 0.0)
    q_ = qp.q
    one_minus_q = 1.0 - q_
    span = abs(a) + abs(b)
    max_terms = int(policy.max_terms)

    partial = []
    f_run = 0.0
    k0 = 0
    tail = math.inf
    while k0 < max_terms:
        ks = np.arange(k0, min(k0 + _CHUNK, max_terms))
        w = q_ ** ks.astype(float)
        fb = evaluate(f, w * b) if b != 0 else np.zeros_like(w)
        fa = evaluate(f, w * a) if a != 0 else np.zeros_like(w)
        if not (np.all(np.isfinite(fb)) and np.all(np.isfinite(fa))):
            raise NonFiniteEvaluation("integrand returned a non-finite value on the Jackson grid")
        terms = one_minus_q * w * (b * fb - a * fa)
        mags = w * (np.abs(b * fb) + np.abs(a * fa))
        f_seen = np.maximum.accumulate(np.maximum(np.abs(fa), np.abs(fb)))
        f_seen = np.maximum(f_seen, f_run)
        remainder = q_ * w * span * np.maximum(f_seen, 1.0)
        tails = np.maximum(mags, remainder)
        done = np.flatnonzero(tails < policy.tol)
        if done.size:
            stop = int(done[0]) + 1
            partial.append(math.fsum(terms[:stop]))
            return JacksonIntegralResult(
                math.fsum(partial), int(ks[0]) + stop, True, float(tails[stop - 1])
            )
        partial.append(math.fsum(terms))
        f_run = float(f_seen[-1])
        tail = float(tails[-1])
        k0 += len(ks)

    value = math.fsum(partial)
    if policy.strict:
        raise TruncationIncomplete(
            f"Jackson sum did not converge in {max_terms} terms", value=value, terms_used=max_terms
        )
    return JacksonIntegralResult(value, max_terms, False, tail)


def jackson_integral_improper(
    f: Callable, q: QLike, policy: SeriesPolicy = DEFAULT_POLICY
) -> JacksonIntegralResult:
    """q-analog of the integral over the real line: Jackson integral on ``[-nu, nu]``."""
    qp = as_qparam(q)
    return jackson_integral(f, -qp.nu, qp.nu, qp, policy)


LIMIT_STEP = 1e-6


def _classical_derivative(f, x, s):
    """Central finite-difference estimate of ``f^(s)(x)``; used only at ``x = 0``."""
    if s == 0:
        return float(f(x))
    # step grows with the order to keep the rounding error of the stencil bounded
    h = LIMIT_STEP if s == 1 else 10.0 ** (-16.0 / (s + 2))
    js = np.arange(s + 1)
    coeffs = np.array([(-1) ** (s - j) * math.comb(s, j) for j in js], dtype=float)
    pts = x + (js - s / 2.0) * h
    vals = evaluate(f, pts)
    return float(np.dot(coeffs, vals) / h**s)


def q_derivative(f: Callable, x: float, q: QLike) -> float:
    """``D_q f(x) = (f(qx) - f(x)) / ((q-1) x)``.

    The quotient is singular at ``x = 0``; there the classical limit ``f'(0)``
    is returned, estimated by a symmetric difference with step 1e-6.
    """
    qp = as_qparam(q)
    x = float(x)
    if x == 0.0:
        return _classical_derivative(f, 0.0, 1)
    pts = np.array([qp.q * x, x])
    fqx, fx = evaluate(f, pts)
    return float((fqx - fx) / ((qp.q - 1.0) * x))


def q_derivative_iter(f: Callable, x: float, q: QLike, s: int) -> float:
    """``D_q^s f(x)`` from the stencil ``f(q^j x), j = 0..s``.

    Built bottom-up: with ``F_0(j) = f(q^j x)``,
    ``F_m(j) = (F_{m-1}(j+1) - F_{m-1}(j)) / ((q-1) q^j x)`` and
    ``D_q^s f(x) = F_s(0)``. At ``x = 0`` the limit ``f^(s)(0) [s]_q! / s!`` is
    used, which is what the stencil tends to for smooth ``f``.
    """
    qp = as_qparam(q)
    s = int(s)
    if s < 0:
        raise DomainError("derivative order must be nonnegative")
    x = float(x)
    if s == 0:
        return float(evaluate(f, np.array([x]))[0])
    if x == 0.0:
        return _classical_derivative(f, 0.0, s) * q_factorial(s, qp) / math.factorial(s)
    grid = x * qp.q ** np.arange(s + 1, dtype=float)
    vals = evaluate(f, grid)
    for _ in range(s):
        vals = (vals[1:] - vals[:-1]) / ((qp.q - 1.0) * grid[: len(vals) - 1])
    return float(vals[0])


def q_taylor(f: Callable, a: float, s: int, q: QLike, b: float | None = None) -> QTaylorExpansion:
    """q-Taylor coefficients of ``f`` about ``a`` up to order ``s``.

    With ``b`` given, ``remainder_estimate = |f(b) - q_taylor_eval(exp, b)|``.
    """
    qp = as_qparam(q)
    s = int(s)
    if s < 0:
        raise DomainError("Taylor order must be nonnegative")
    coeffs = [q_derivative_iter(f, a, qp, k) / q_factorial(k, qp) for k in range(s + 1)]
    expansion = QTaylorExpansion(float(a), s, coeffs)
    if b is not None:
        resid = abs(float(evaluate(f, np.array([float(b)]))[0]) - q_taylor_eval(expansion, b, qp))
        expansion = QTaylorExpansion(float(a), s, coeffs, resid)
    return expansion


def q_taylor_eval(expansion: QTaylorExpansion, b: float, q: QLike) -> float:
    """``sum_k (b - a)^k_q / [k]_q! * (D_q^k f)(a)``."""
    qp = as_qparam(q)
    a = expansion.center
    return math.fsum(
        c * q_pochhammer(b, a, k, qp) for k, c in enumerate(expansion.coefficients)
    )
