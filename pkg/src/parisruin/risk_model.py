"""Risk-process parameters and the analytic constants derived from them.

The surplus process is R_u(t) = u + c t^beta - X_H(t) for a centered
self-similar Gaussian X_H. Its standardized version
Z(t) = X_H(t) / (1 + c t^beta) has standard deviation
sigma_Z(t) = t^H / (1 + c t^beta), which attains a unique maximum at t0.
The peak height A, the curvature constant B of the quadratic expansion of
sigma_Z at t0, and the Pickands-scale constant D0 drive every tail
approximation in `asymptotics`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError
from .process_sim import CovarianceModel


@dataclass(frozen=True)
class RiskParams:
    """The tuple (u, c, beta, model) defining R_u(t) = u + c t^beta - X_H(t)."""

    u: float
    c: float
    beta: float
    model: CovarianceModel

    def __post_init__(self):
        if self.u < 0:
            raise ParameterError("initial reserve u must be nonnegative")
        if self.c <= 0:
            raise ParameterError("premium rate c must be positive")
        if self.beta <= 0:
            raise ParameterError("premium exponent beta must be positive")
        if self.beta <= self.model.hurst:
            raise ParameterError(
                f"beta must exceed the Hurst index (beta={self.beta}, H={self.model.hurst})"
            )

    @property
    def hurst(self) -> float:
        return self.model.hurst

    @classmethod
    def fbm(cls, u: float, c: float, beta: float, hurst: float) -> "RiskParams":
        return cls(u=u, c=c, beta=beta, model=CovarianceModel.fbm(hurst))


@dataclass(frozen=True)
class LocalStationarity:
    """Local structure of the standardized process near the critical time.

    K is regularly varying at 0 with index alpha/2 and K_inv is its asymptotic
    inverse: K(K_inv(t))/t -> 1 as t -> 0. Q is the limiting constant of the
    standardized increment variance. For custom covariance models all three
    are user-supplied; the fBm preset has K(t) = t^H, K_inv(x) = x^{1/H},
    alpha = 2H and Q = t0^{-2H}.
    """

    alpha: float
    Q: float
    K: Callable[[float], float]
    K_inv: Callable[[float], float]

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ParameterError(f"local index alpha must lie in (0, 2), got {self.alpha}")
        if self.Q <= 0:
            raise ParameterError("Q must be positive")


def fbm_local_stationarity(params: RiskParams) -> LocalStationarity:
    """The local-stationarity preset for the fBm model of `params`."""
    h = params.hurst
    t0 = critical_point(params)
    return LocalStationarity(
        alpha=2.0 * h,
        Q=t0 ** (-2.0 * h),
        K=lambda t: t**h,
        K_inv=lambda x: x ** (1.0 / h),
    )


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form constants of the variance peak, plus the scaling helpers."""

    t0: float
    A: float
    B: float
    alpha: float
    Q: float
    D0: float
    hurst: float
    beta: float
    K_inv: Callable[[float], float]

    def v(self, u: float) -> float:
        """Critical level v(u) = u^{1 - H/beta}."""
        return u ** (1.0 - self.hurst / self.beta)

    def q(self, v: float) -> float:
        """Critical time scale q(v) = K_inv(1/v)."""
        return self.K_inv(1.0 / v)

    def critical_time(self, u: float) -> float:
        """Where ruin concentrates: t0 * u^{1/beta}."""
        return self.t0 * u ** (1.0 / self.beta)

    def time_scale(self, u: float) -> float:
        """Width of the ruin-time distribution: sqrt(A/B) * u^{H/beta + 1/beta - 1}."""
        return math.sqrt(self.A / self.B) * u ** (self.hurst / self.beta + 1.0 / self.beta - 1.0)


def critical_point(params: RiskParams) -> float:
    """t0 = (H / (c (beta - H)))^{1/beta}, the unique maximizer of sigma_Z."""
    h, c, beta = params.hurst, params.c, params.beta
    return (h / (c * (beta - h))) ** (1.0 / beta)


def sigma_z(params: RiskParams, t):
    """Standard deviation of Z(t) = X_H(t)/(1 + c t^beta), i.e. t^H/(1 + c t^beta)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("time must be nonnegative")
    out = t**params.hurst / (1.0 + params.c * t**params.beta)
    return float(out) if out.ndim == 0 else out


def derived_constants(params: RiskParams, ls: LocalStationarity) -> DerivedConstants:
    """All peak constants of sigma_Z in closed form (no optimization involved)."""
    h, c, beta = params.hurst, params.c, params.beta
    r = h / (c * (beta - h))
    t0 = r ** (1.0 / beta)
    a = (beta - h) / beta * r ** (h / beta)
    b = r ** (-(h + 2.0) / beta) * h * beta
    d0 = 2.0 ** (-1.0 / ls.alpha) * a ** (-2.0 / ls.alpha) * ls.Q ** (1.0 / ls.alpha)
    return DerivedConstants(
        t0=t0, A=a, B=b, alpha=ls.alpha, Q=ls.Q, D0=d0,
        hurst=h, beta=beta, K_inv=ls.K_inv,
    )


def variance_expansion_error(params: RiskParams, ls: LocalStationarity, eps: float) -> float:
    """|sigma_Z(t0 + eps) - (A - A^2 B eps^2 / 2)|, the quadratic-expansion residual."""
    dc = derived_constants(params, ls)
    if abs(eps) >= dc.t0:
        raise ParameterError("offset must satisfy |eps| < t0")
    quad = dc.A - 0.5 * dc.B * dc.A**2 * eps * eps
    return abs(sigma_z(params, dc.t0 + eps) - quad)
