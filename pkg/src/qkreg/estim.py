"""q-kernel estimators of the density, of ``Gamma_k`` and of the regression function."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from .errors import DomainError
from .kernels import QKernel

MAX_GAMMA_POWER = 8
# number of kernel evaluations held in memory at once
_BLOCK = 1 << 21


class SampleFormatError(DomainError):
    """A sample file could not be parsed; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class Sample:
    """Paired observations ``(X_i, Y_i)``, ``i = 1..n``."""

    xs: np.ndarray
    ys: np.ndarray
    source: str = ""

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float).ravel()
        ys = np.asarray(self.ys, dtype=float).ravel()
        if xs.shape != ys.shape:
            raise DomainError(f"xs and ys differ in length: {xs.size} vs {ys.size}")
        if xs.size == 0:
            raise DomainError("a sample needs at least one observation")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise DomainError("sample entries must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    @classmethod
    def from_csv(cls, path) -> "Sample":
        """Read a UTF-8 CSV with header ``x,y``; any malformed row is an error."""
        xs, ys = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SampleFormatError("file is empty", 1) from None
            if [h.strip().lower() for h in header] != ["x", "y"]:
                raise SampleFormatError(f"expected header 'x,y', got {','.join(header)!r}", 1)
            for row in reader:
                line = reader.line_num
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise SampleFormatError(f"expected 2 fields, got {len(row)}", line)
                try:
                    x, y = float(row[0]), float(row[1])
                except ValueError:
                    raise SampleFormatError(f"not a number: {','.join(row)!r}", line) from None
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise SampleFormatError("non-finite value", line)
                xs.append(x)
                ys.append(y)
        if not xs:
            raise SampleFormatError("no observations after the header", 2)
        return cls(np.array(xs), np.array(ys), str(path))


@dataclass(frozen=True)
class EstimatorConfig:
    kernel: QKernel
    h: float
    b: float
    grid: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("bandwidth h must be positive")
        if not self.b > 0:
            raise DomainError("floor b must be positive")
        grid = np.atleast_1d(np.asarray(self.grid, dtype=float))
        if grid.size == 0:
            raise DomainError("evaluation grid is empty")
        if np.any(np.diff(grid) < 0):
            raise DomainError("evaluation grid must be sorted")
        object.__setattr__(self, "grid", grid)


@dataclass
class EstimateSet:
    grid: np.ndarray
    f_hat: np.ndarray
    g_hat: np.ndarray
    r_hat: np.ndarray
    floored_mask: np.ndarray
    gamma_hat: Dict[int, np.ndarray] = field(default_factory=dict)


def default_bandwidth(n: int, exponent: float = 0.2, scale: float = 1.0) -> float:
    """``h_n = scale * n^(-exponent)``; the default gives ``sqrt(n h^5) = 1``."""
    return scale * float(n) ** (-exponent)


def default_floor(n: int, exponent: float = 0.05, scale: float = 1.0, eps: float = 1e-3) -> float:
    """``b_n = max(eps, scale * n^(-exponent))``.

    With ``h_n = n^(-1/5)`` any exponent below 1/10 gives ``h_n / b_n^2 -> 0``
    and ``n b_n^2 h_n -> inf``.
    """
    return max(eps, scale * float(n) ** (-exponent))


def default_grid(xs, count: int = 512) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    lo, hi = float(xs.min()), float(xs.max())
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    return np.linspace(lo, hi, int(count))


def kernel_sums(xs, weights, grid, kernel: QKernel, h: float) -> np.ndarray:
    """``sum_i w_i K((x - X_i)/h)`` for each grid point and each weight column.

    ``weights`` has shape ``(n, m)``; the result has shape ``(len(grid), m)``.
    """
    xs = np.asarray(xs, dtype=float)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    weights = np.asarray(weights, dtype=float).reshape(xs.size, -1)
    out = np.empty((grid.size, weights.shape[1]))
    step = max(1, _BLOCK // max(xs.size, 1))
    for start in range(0, grid.size, step):
        g = grid[start : start + step]
        kmat = kernel((g[:, None] - xs[None, :]) / h)
        out[start : start + step] = kmat @ weights
    return out


def _check_power(k):
    k = int(k)
    if not 0 <= k <= MAX_GAMMA_POWER:
        raise DomainError(f"k must be in 0..{MAX_GAMMA_POWER}, got {k}")
    return k


def estimate_gamma(sample: Sample, cfg: EstimatorConfig, k: int) -> np.ndarray:
    """``Gamma_hat_{k,n}(x) = (1/(n h)) sum_i Y_i^k K((x - X_i)/h)`` on ``cfg.grid``.

    ``k = 0`` is the density estimate and ``k = 1`` the numerator of the
    regression estimate.
    """
    k = _check_power(k)
    w = sample.ys**k if k else np.ones(sample.n)
    return kernel_sums(sample.xs, w, cfg.grid, cfg.kernel, cfg.h)[:, 0] / (sample.n * cfg.h)


def regression_from_sums(f_hat, g_hat, b):
    """``r_hat = g_hat / max(f_hat, b/2)`` and the mask of floored points."""
    floor = 0.5 * b
    floored = f_hat < floor
    return g_hat / np.where(floored, floor, f_hat), floored


def estimate_regression(sample: Sample, cfg: EstimatorConfig, powers=(0, 1)) -> EstimateSet:
    """Density, numerator and floored ratio estimates on ``cfg.grid``.

    ``powers`` lists the ``Gamma_hat_k`` to keep in ``gamma_hat``; 0 and 1 are
    always computed.
    """
    ks = sorted({0, 1, *(_check_power(k) for k in powers)})
    w = np.column_stack([sample.ys**k if k else np.ones(sample.n) for k in ks])
    sums = kernel_sums(sample.xs, w, cfg.grid, cfg.kernel, cfg.h) / (sample.n * cfg.h)
    gamma = {k: sums[:, j] for j, k in enumerate(ks)}
    f_hat, g_hat = gamma[0], gamma[1]
    r_hat, floored = regression_from_sums(f_hat, g_hat, cfg.b)
    return EstimateSet(cfg.grid, f_hat, g_hat, r_hat, floored, gamma)


def sup_error(estimate, truth: Callable, grid) -> float:
    """Grid proxy for ``sup_x |estimate(x) - truth(x)|``."""
    estimate = np.asarray(estimate, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if estimate.shape != grid.shape:
        raise DomainError("estimate and grid must have the same length")
    return float(np.max(np.abs(estimate - np.asarray(truth(grid), dtype=float))))


def write_estimates_csv(path, est: EstimateSet) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["grid", "f_hat", "g_hat", "r_hat", "floored"])
        for row in zip(est.grid, est.f_hat, est.g_hat, est.r_hat, est.floored_mask):
            w.writerow([repr(float(v)) for v in row[:4]] + [int(row[4])])
