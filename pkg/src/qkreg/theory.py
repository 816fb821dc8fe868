"""Leading-order predictions for the q-kernel estimators.

Every asymptotic remainder (``o(1)`` and ``O(.)`` terms) is set to zero, so
these are the quantities the Monte Carlo checks compare against.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import DegenerateVariance, DomainError, ParameterError
from .estim import EstimatorConfig, Sample, estimate_regression
from .kernels import QKernel
from .qcalc import evaluate, q_derivative_iter
from .qcore import QLike, as_qparam, q_factorial, q_number, tsallis_exp, tsallis_ln

DEFAULT_C0 = 1.0
DEFAULT_L = 2.0


@dataclass(frozen=True)
class TargetModel:
    """True design density ``f``, regression ``r`` and conditional variance of ``Y``.

    ``support`` is an interval containing the support of ``f``; it is used for
    sampling and for default evaluation grids.
    """

    f: Callable
    r: Callable
    noise_cond_var: Callable
    support: Tuple[float, float] = (-math.inf, math.inf)
    name: str = "custom"
    # optional hooks used by the samplers in qkreg.sim
    ppf: Optional[Callable] = field(default=None, repr=False, compare=False)
    noise: Optional[Callable] = field(default=None, repr=False, compare=False)

    def g(self, x):
        return evaluate(self.f, np.asarray(x, dtype=float)) * evaluate(self.r, np.asarray(x, dtype=float))

    def gamma(self, k: int, x):
        """``Gamma_k(x) = E(Y^k | X = x) f(x)`` for ``k`` in {0, 1, 2}."""
        x = np.asarray(x, dtype=float)
        fx = evaluate(self.f, x)
        if k == 0:
            return fx
        rx = evaluate(self.r, x)
        if k == 1:
            return rx * fx
        if k == 2:
            return (rx * rx + evaluate(self.noise_cond_var, x)) * fx
        raise DomainError("Gamma_k is available for k = 0, 1, 2 only")

    def d_f(self, k: int, x: float, q: QLike) -> float:
        if not 0 <= int(k) <= 3:
            raise DomainError("derivative order must be in 0..3")
        return q_derivative_iter(self.f, x, q, k)

    def d_g(self, k: int, x: float, q: QLike) -> float:
        if not 0 <= int(k) <= 3:
            raise DomainError("derivative order must be in 0..3")
        return q_derivative_iter(self.g, x, q, k)

    def _f_at(self, x):
        fx = float(evaluate(self.f, np.array([float(x)]))[0])
        if not fx > 0:
            raise DomainError(f"the design density must be positive at x = {x}, got {fx}")
        return fx


def _bias_factor(model: TargetModel, kernel: QKernel, x: float) -> float:
    """``q / ([2]_q f(x)) (D_q^2 g - r D_q^2 f)(x) int u^2 K``."""
    q = kernel.q
    fx = model._f_at(x)
    rx = float(evaluate(model.r, np.array([float(x)]))[0])
    curv = model.d_g(2, x, q) - rx * model.d_f(2, x, q)
    return q.q / (q_number(2, q) * fx) * curv * kernel.moment2


def bias_rn(model: TargetModel, kernel: QKernel, h: float, x: float) -> float:
    """Leading bias of ``r_hat(x)``: ``q h^2 / ([2]_q f(x)) (D_q^2 g - r D_q^2 f) int u^2 K``."""
    return _bias_factor(model, kernel, x) * float(h) ** 2


def clt_params(model: TargetModel, kernel: QKernel, q: QLike, c: float, x: float) -> Tuple[float, float]:
    """Asymptotic mean and variance of ``sqrt(n h) (r_hat(x) - r(x))`` when ``sqrt(n h^5) -> c``.

    ``q`` must be the kernel's own deformation parameter.
    """
    qp = as_qparam(q)
    if abs(qp.q - kernel.q.q) > 1e-15:
        raise ParameterError("clt_params: q differs from the kernel's q")
    fx = model._f_at(x)
    script_e = _bias_factor(model, kernel, x) * float(c)
    var = float(evaluate(model.noise_cond_var, np.array([float(x)]))[0])
    script_v = var * kernel.square_integral / fx
    return script_e, script_v


def sup_density(model: TargetModel, grid=None) -> float:
    """``sup |f|`` on ``grid`` (default: 2001 points across the model support)."""
    if grid is None:
        lo, hi = model.support
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("an unbounded support needs an explicit grid")
        grid = np.linspace(lo, hi, 2001)
    return float(np.max(np.abs(evaluate(model.f, np.asarray(grid, dtype=float)))))


def _check_L(L, q):
    floor = math.sqrt(2.0 * q_number(2, q))
    if not float(L) > floor:
        raise ParameterError(f"L must exceed sqrt(2 [2]_q) = {floor:.6g}, got {L}")


def v_nk(kernel: QKernel, n: int, h: float, k: int, sup_f: float, c0: float = DEFAULT_C0) -> float:
    """``(1/(n h)) (c0 ln_q n)^(k/2) sup|f| int K^2``."""
    if int(n) < 1 or not h > 0:
        raise DomainError("need n >= 1 and h > 0")
    lnq = tsallis_ln(float(n), kernel.q.q)
    growth = (c0 * lnq) ** (0.5 * k) if k else 1.0
    return growth * sup_f * kernel.square_integral / (n * h)


def rate_terms(
    model: TargetModel,
    kernel: QKernel,
    q: QLike,
    n: int,
    h: float,
    k: int,
    c0: float = DEFAULT_C0,
    L: float = DEFAULT_L,
    grid=None,
) -> Tuple[float, float, float]:
    """``(v_nk, w, q w h^2 + sqrt(v_nk ln_q n))`` for the uniform rate of ``Gamma_hat_k``."""
    qp = as_qparam(q)
    _check_L(L, qp)
    v = v_nk(kernel, n, h, k, sup_density(model, grid), c0)
    w = L / q_number(2, qp) * kernel.moment2
    rate = qp.q * w * h * h + math.sqrt(v * tsallis_ln(float(n), qp.q))
    return v, w, rate


def bernstein_c(kernel: QKernel, n: int, h: float, k: int, sup_f: float, c0: float = DEFAULT_C0) -> float:
    """Scale ``c = M (c0 ln_q n)^(k/2) sup|f| [2]_q / ([3]_q! n h)``."""
    q = kernel.q
    lnq = tsallis_ln(float(n), q.q)
    growth = (c0 * lnq) ** (0.5 * k) if k else 1.0
    return kernel.sup_bound * growth * sup_f * q_number(2, q) / (q_factorial(3, q) * n * h)


def bernstein_bound(t: float, v: float, c: float, q: QLike) -> float:
    """``exp_q(-t^2 / ([2]_q (v + c t)))`` with the Tsallis exponential."""
    qp = as_qparam(q)
    if not (t > 0 and v > 0 and c > 0):
        raise DomainError("bernstein_bound needs t, v, c > 0")
    arg = -t * t / (q_number(2, qp) * (v + c * t))
    return float(tsallis_exp(arg, qp.q))


def bernstein_t_max(v: float, c: float, q: QLike) -> float:
    """Largest ``t`` at which the Tsallis exponential in the bound is still defined."""
    qp = as_qparam(q)
    # t^2 = B (v + c t) with B = [2]_q / (1 - q)
    B = q_number(2, qp) / (1.0 - qp.q)
    return 0.5 * (B * c + math.sqrt((B * c) ** 2 + 4.0 * B * v))


def markov_check(samples, a: float) -> Tuple[float, float]:
    """Empirical ``P(X >= a)`` and the Markov bound ``mean(X) / a``."""
    xs = np.asarray(samples, dtype=float)
    if xs.size == 0 or np.any(xs < 0):
        raise DomainError("markov_check needs a nonempty nonnegative sample")
    if not a > 0:
        raise DomainError("markov_check needs a > 0")
    return float(np.mean(xs >= a)), float(np.mean(xs) / a)


def lyapunov_ratio(sample: Sample, cfg: EstimatorConfig, x: float, r_true: Optional[Callable] = None) -> float:
    """``sum |Z_i - mean Z|^3 / (sum (Z_i - mean Z)^2)^(3/2)`` at ``x``.

    ``Z_i = (Y_i - r(x)) K((x - X_i)/h) / (n h)`` with ``r`` replaced by
    ``r_hat(x)`` unless the true regression ``r_true`` is given.
    """
    x = float(x)
    if r_true is None:
        one = EstimatorConfig(cfg.kernel, cfg.h, cfg.b, np.array([x]))
        center = float(estimate_regression(sample, one).r_hat[0])
    else:
        center = float(evaluate(r_true, np.array([x]))[0])
    kv = np.asarray(cfg.kernel((x - sample.xs) / cfg.h), dtype=float)
    z = (sample.ys - center) * kv / (sample.n * cfg.h)
    d = z - z.mean()
    s2 = math.fsum(d * d)
    if not s2 > np.finfo(float).tiny:
        raise DegenerateVariance("Lyapunov ratio: the Z_i have zero spread")
    return math.fsum(np.abs(d) ** 3) / s2**1.5


@dataclass
class TheoryReport:
    bias_leading: List[float]
    script_E: List[float]
    script_V: List[float]
    v_nk: float
    w_term: float
    rate: float
    bernstein_curve: List[Tuple[float, float]]
    lyapunov_ratio: float = float("nan")
    grid: List[float] = field(default_factory=list)

    def to_json(self) -> str:
        d = asdict(self)
        d["bernstein_curve"] = [list(p) for p in self.bernstein_curve]
        for key in ("v_nk", "w_term", "rate", "lyapunov_ratio"):
            if not math.isfinite(d[key]):
                d[key] = None
        return json.dumps(d, indent=2, sort_keys=True)


def theory_report(
    model: TargetModel,
    kernel: QKernel,
    n: int,
    h: float,
    k: int,
    grid,
    c0: float = DEFAULT_C0,
    L: float = DEFAULT_L,
    t_points: int = 20,
    lyapunov: float = float("nan"),
) -> TheoryReport:
    """All leading-order predictions at sample size ``n`` and bandwidth ``h``.

    ``c`` in the asymptotic mean is taken as ``sqrt(n h^5)``.
    """
    grid = np.asarray(grid, dtype=float)
    q = kernel.q
    c = math.sqrt(n * h**5)
    bias, se, sv = [], [], []
    for x in grid:
        bias.append(bias_rn(model, kernel, h, x))
        e, v = clt_params(model, kernel, q, c, x)
        se.append(e)
        sv.append(v)
    vnk, w, rate = rate_terms(model, kernel, q, n, h, k, c0, L, grid)
    cc = bernstein_c(kernel, n, h, k, sup_density(model, grid), c0)
    ts = bernstein_t_grid(vnk, cc, q, t_points)
    curve = [(float(t), bernstein_bound(t, vnk, cc, q)) for t in ts]
    return TheoryReport(bias, se, sv, vnk, w, rate, curve, lyapunov, [float(x) for x in grid])


def bernstein_t_grid(v: float, c: float, q: QLike, count: int = 20, sd_span: float = 5.0) -> np.ndarray:
    """``count`` points up to ``min(0.95 t_max, sd_span sqrt(v))``."""
    top = min(0.95 * bernstein_t_max(v, c, q), sd_span * math.sqrt(v))
    return np.linspace(top / count, top, count)
