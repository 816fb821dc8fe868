"""q-kernels: the q-Gaussian and the polynomial family ``(1 - q^2 u^2)^p``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PositivityViolation
from .qcalc import jackson_integral
from .qcore import DEFAULT_POLICY, QLike, QParam, SeriesPolicy, as_qparam, q_gauss_product, q_number

VALIDATION_POINTS = 1001

GAUSSIAN = "gaussian"
POLY = "poly"

CLASSICAL_NAMES = {0: "uniform", 1: "epanechnikov", 2: "biweight", 3: "triweight"}


@dataclass(frozen=True)
class QKernel:
    """An immutable, normalized q-kernel with its cached Jackson moments.

    Call it on an array of points to evaluate it; it vanishes outside
    ``[-support_halfwidth, support_halfwidth]``.
    """

    kind: str
    q: QParam
    p: int | None
    support_halfwidth: float
    norm_const: float
    sup_bound: float
    moment2: float = field(default=float("nan"))
    square_integral: float = field(default=float("nan"))
    cube_integral: float = field(default=float("nan"))
    policy: SeriesPolicy = field(default=DEFAULT_POLICY, repr=False)

    @property
    def name(self) -> str:
        return "q-gaussian" if self.kind == GAUSSIAN else f"q-poly(p={self.p})"

    def shape(self, u):
        """Unnormalized profile (``gamma_{q,p}`` or the q-Gaussian series)."""
        u = np.asarray(u, dtype=float)
        s = self.support_halfwidth
        inside = np.abs(u) <= s
        if self.kind == GAUSSIAN:
            uc = np.where(inside, u, 0.0)
            vals = np.asarray(q_gauss_product(uc, self.q, self.policy), dtype=float)
        else:
            vals = (1.0 - self.q.q**2 * u * u) ** self.p
        return np.where(inside, vals, 0.0)

    def __call__(self, u):
        out = self.shape(u) / self.norm_const
        return out.item() if np.ndim(out) == 0 else out

    def validation_grid(self):
        s = self.support_halfwidth
        return np.linspace(-s, s, VALIDATION_POINTS)


def _with_moments(kernel: QKernel) -> QKernel:
    m2 = kernel_moment(kernel, 2, 1)
    sq = kernel_moment(kernel, 0, 2)
    cube = kernel_moment(kernel, 0, 3)
    for name, v in (("second moment", m2), ("square integral", sq), ("cube integral", cube)):
        if not math.isfinite(v):
            raise DomainError(f"kernel {name} is not finite")
    return QKernel(
        kernel.kind,
        kernel.q,
        kernel.p,
        kernel.support_halfwidth,
        kernel.norm_const,
        kernel.sup_bound,
        m2,
        sq,
        cube,
        kernel.policy,
    )


def q_gaussian_norm_const(q: QLike, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """``c(q) = 2 (1-q) nu sum_k q^k E_{q^2}^{-q^2 (q^k nu)^2/[2]_q}``, the q-analog of sqrt(2 pi)."""
    qp = as_qparam(q)
    half = jackson_integral(lambda u: q_gauss_product(u, qp, policy), 0.0, qp.nu, qp, policy)
    return 2.0 * half.value


def make_q_gaussian(q: QLike, policy: SeriesPolicy = DEFAULT_POLICY) -> QKernel:
    """q-Gaussian kernel ``E_{q^2}^{-q^2 u^2/[2]_q} / c(q)`` on ``[-nu, nu]``."""
    qp = as_qparam(q)
    c = q_gaussian_norm_const(qp, policy)
    if not c > 0:
        raise PositivityViolation(f"q-Gaussian normalizer is not positive: {c}")
    kernel = QKernel(GAUSSIAN, qp, None, qp.nu, c, 1.0 / c, policy=policy)
    vals = kernel.shape(kernel.validation_grid())
    if np.any(vals < 0):
        raise PositivityViolation("q-Gaussian series is negative on the validation grid")
    # the sup bound is taken at u = 0; make sure no grid point exceeds it
    if vals.max() > 1.0 + 1e-12:
        raise PositivityViolation("q-Gaussian series exceeds its value at 0")
    return _with_moments(kernel)


def poly_norm_const(p: int, q: QLike) -> float:
    """Closed form ``c_q = 2 sum_l (-1)^l C(p, l) q^(2l) / [2l+1]_q``."""
    qp = as_qparam(q)
    p = int(p)
    if p < 0:
        raise DomainError("polynomial kernel index p must be nonnegative")
    return 2.0 * math.fsum(
        (-1) ** l * math.comb(p, l) * qp.q ** (2 * l) / q_number(2 * l + 1, qp) for l in range(p + 1)
    )


def make_q_poly(p: int, q: QLike, policy: SeriesPolicy = DEFAULT_POLICY) -> QKernel:
    """``K_{q,p}(u) = (1 - q^2 u^2)^p / c_q`` on ``[-1, 1]``.

    ``p = 0, 1, 2, 3`` are the q-analogs of the uniform, Epanechnikov,
    biweight and triweight kernels.
    """
    qp = as_qparam(q)
    c = poly_norm_const(p, qp)
    return _with_moments(QKernel(POLY, qp, int(p), 1.0, c, 1.0 / c, policy=policy))


def make_kernel(kind: str, q: QLike, p: int = 1, policy: SeriesPolicy = DEFAULT_POLICY) -> QKernel:
    if kind == GAUSSIAN:
        return make_q_gaussian(q, policy)
    if kind == POLY:
        return make_q_poly(p, q, policy)
    raise DomainError(f"unknown kernel kind {kind!r}; expected 'gaussian' or 'poly'")


def kernel_moment(
    kernel: QKernel, u_power: int, k_power: int, policy: SeriesPolicy | None = None
) -> float:
    """Jackson integral of ``u**u_power * K(u)**k_power`` over the kernel support."""
    if int(u_power) < 0 or int(k_power) < 1:
        raise DomainError("need u_power >= 0 and k_power >= 1")
    s = kernel.support_halfwidth
    a, m = int(u_power), int(k_power)
    res = jackson_integral(
        lambda u: u**a * kernel(u) ** m, -s, s, kernel.q, policy or kernel.policy
    )
    return res.value


def classical_kernel(p: int):
    """The q = 1 member of the polynomial family, normalized by the Riemann integral."""
    p = int(p)
    # int_{-1}^{1} (1 - x^2)^p dx = 2^(2p+1) (p!)^2 / (2p+1)!
    c = 2 ** (2 * p + 1) * math.factorial(p) ** 2 / math.factorial(2 * p + 1)

    def k(u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= 1.0, (1.0 - u * u) ** p / c, 0.0)

    return k
