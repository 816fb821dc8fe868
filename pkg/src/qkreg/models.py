"""Named synthetic regression models used by the experiments and the CLI."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError
from .theory import TargetModel

TRUNC = 3.0
_LO = float(ndtr(-TRUNC))
_MASS = float(ndtr(TRUNC)) - _LO
_NORM = 1.0 / (math.sqrt(2.0 * math.pi) * _MASS)
NOISE_HALFWIDTH = 0.5


def bell_density(x):
    """Standard normal density truncated to ``[-3, 3]`` and renormalized."""
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) <= TRUNC, _NORM * np.exp(-0.5 * x * x), 0.0)
    return out.item() if out.ndim == 0 else out


def bell_ppf(u):
    return ndtri(_LO + np.asarray(u, dtype=float) * _MASS)


def uniform_noise(rng, size, halfwidth=NOISE_HALFWIDTH):
    return rng.uniform(-halfwidth, halfwidth, size)


def _const_var(v):
    return lambda x: np.full(np.shape(x), v, dtype=float) if np.ndim(x) else v


def default_model() -> TargetModel:
    """Bell design on [-3, 3], ``r(x) = 2x + sin x``, uniform noise on [-0.5, 0.5]."""
    return TargetModel(
        f=bell_density,
        r=lambda x: 2.0 * np.asarray(x, dtype=float) + np.sin(x),
        noise_cond_var=_const_var(NOISE_HALFWIDTH**2 / 3.0),
        support=(-TRUNC, TRUNC),
        name="default",
        ppf=bell_ppf,
        noise=uniform_noise,
    )


def linear_model(slope: float = 2.0) -> TargetModel:
    return TargetModel(
        f=bell_density,
        r=lambda x: slope * np.asarray(x, dtype=float),
        noise_cond_var=_const_var(NOISE_HALFWIDTH**2 / 3.0),
        support=(-TRUNC, TRUNC),
        name="linear",
        ppf=bell_ppf,
        noise=uniform_noise,
    )


def constant_model(value: float = 1.0) -> TargetModel:
    """Noiseless ``Y = value``."""
    return TargetModel(
        f=bell_density,
        r=lambda x: np.full(np.shape(x), value, dtype=float) if np.ndim(x) else value,
        noise_cond_var=_const_var(0.0),
        support=(-TRUNC, TRUNC),
        name="constant",
        ppf=bell_ppf,
        noise=lambda rng, size: np.zeros(size),
    )


MODELS = {"default": default_model, "linear": linear_model, "constant": constant_model}


def get_model(name: str) -> TargetModel:
    try:
        return MODELS[name]()
    except KeyError:
        raise DomainError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
