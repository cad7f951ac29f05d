"""Large-reserve tail approximations and ruin-time normalizers.

Everything here evaluates closed-form approximations; the Pickands-type
constants they contain are injected values, exact at alpha = 1 and Monte
Carlo estimates from `constants_mc` otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .closed_form import norm_cdf
from .errors import DependencyError, OrderingError, ParameterError
from .risk_model import DerivedConstants, LocalStationarity, RiskParams


@dataclass(frozen=True)
class WindowRegime:
    """A deterministic window policy u -> T_u together with its scaling limit T.

    T is the limit of T_u u^{-1/beta} / K_inv(u^{H/beta - 1}); it decides which
    generalized constant enters the Parisian approximation.
    """

    T: float
    tu_fn: Callable[[float], float]

    def __post_init__(self):
        if self.T < 0:
            raise ParameterError("window limit T must be nonnegative")

    def duration(self, u: float) -> float:
        value = self.tu_fn(u)
        if value < 0:
            raise ParameterError("window duration must be nonnegative")
        return value

    def scaled_duration(self, u: float, beta: float) -> float:
        """S_v = T_u * u^{-1/beta}, the window in standardized time."""
        return self.duration(u) * u ** (-1.0 / beta)


def fbm_constant_window_limit(params: RiskParams, duration: float) -> WindowRegime:
    """Regime for a constant window T_u = duration under the fBm preset.

    The scaling limit is finite only when beta <= 2H: it equals `duration`
    at beta = 2H and 0 when beta < 2H (the long-range dependent case).
    """
    if duration < 0:
        raise ParameterError("window duration must be nonnegative")
    h, beta = params.hurst, params.beta
    expo = (beta - 2.0 * h) / (h * beta)
    if expo > 0 and duration > 0:
        raise ParameterError(
            "a constant window has no finite scaling limit when beta > 2H"
        )
    limit = duration if expo == 0 else 0.0
    return WindowRegime(T=limit, tu_fn=lambda u: duration)


def window_limit_at(params: RiskParams, ls: LocalStationarity, tu_fn, u: float) -> float:
    """Finite-u value of the window scaling ratio (diagnostic for the limit)."""
    hb = params.hurst / params.beta
    return tu_fn(u) * u ** (-1.0 / params.beta) / ls.K_inv(u ** (hb - 1.0))


def classical_ruin_asymptotic(
    params: RiskParams,
    ls: LocalStationarity,
    constants: DerivedConstants,
    u: float,
    h_alpha: float,
) -> float:
    """Leading-order classical ruin probability for large reserve u."""
    if h_alpha is None:
        raise DependencyError("a value for the Pickands constant is required")
    if h_alpha <= 0:
        raise ParameterError("the Pickands constant must be positive")
    if u <= 0:
        raise ParameterError("reserve u must be positive")
    a, b, q, alpha = constants.A, constants.B, constants.Q, constants.alpha
    lead = a ** (1.5 - 2.0 / alpha) * q ** (1.0 / alpha) * h_alpha / (
        2.0 ** (1.0 / alpha) * math.sqrt(b)
    )
    hb = params.hurst / params.beta
    power = u ** (2.0 * hb - 2.0) / ls.K_inv(u ** (hb - 1.0))
    tail = math.exp(-(u ** (2.0 * (1.0 - hb))) / (2.0 * a * a))
    return lead * power * tail


def parisian_ruin_asymptotic(
    params: RiskParams,
    ls: LocalStationarity,
    constants: DerivedConstants,
    regime: WindowRegime,
    u: float,
    g_alpha: float,
    h_alpha: float,
) -> float:
    """Leading-order Parisian ruin probability: (g_alpha/h_alpha) times classical.

    g_alpha is the generalized constant evaluated at D0 * regime.T.
    """
    if g_alpha is None:
        raise DependencyError("a value for the generalized Pickands constant is required")
    if g_alpha <= 0:
        raise ParameterError("the generalized Pickands constant must be positive")
    del regime  # the regime enters through g_alpha = GH(D0 * T); kept for the record
    return (g_alpha / h_alpha) * classical_ruin_asymptotic(params, ls, constants, u, h_alpha)


def fbm_linear_trend_d0(hurst: float, c: float) -> float:
    """D0 for the fBm risk process with linear trend (beta = 1), in closed form."""
    if not 0.0 < hurst < 1.0:
        raise ParameterError("Hurst index must lie in (0, 1)")
    if c <= 0:
        raise ParameterError("premium rate c must be positive")
    return 2.0 ** (-1.0 / (2.0 * hurst)) * c * c * hurst ** (-2.0) * (1.0 - hurst) ** (
        2.0 - 1.0 / hurst
    )


def fbm_parisian_asymptotic(hurst: float, c: float, big_t: float, u: float, g2h: float) -> float:
    """Parisian ruin asymptotics for the fBm risk process with linear trend.

    Written directly from the linear-trend closed form (a second, independent
    code path from `parisian_ruin_asymptotic` under the fBm preset).
    big_t is the limit of T_u u^{1/H - 2}; g2h is the generalized constant at
    fbm_linear_trend_d0(hurst, c) * big_t.
    """
    if not 0.0 < hurst < 1.0:
        raise ParameterError("Hurst index must lie in (0, 1)")
    if c <= 0 or u <= 0:
        raise ParameterError("c and u must be positive")
    if big_t < 0:
        raise ParameterError("window limit must be nonnegative")
    if g2h <= 0:
        raise ParameterError("the generalized Pickands constant must be positive")
    h = hurst
    lead = g2h * 2.0 ** (-1.0 / (2.0 * h)) / math.sqrt(h * (1.0 - h))
    base = c**h * u ** (1.0 - h) / (h**h * (1.0 - h) ** (1.0 - h))
    power = base ** (1.0 / h - 2.0)
    tail = math.exp(
        -(c ** (2.0 * h) * u ** (2.0 * (1.0 - h)))
        / (2.0 * h ** (2.0 * h) * (1.0 - h) ** (2.0 * (1.0 - h)))
    )
    return lead * power * tail


def windowed_supinf_asymptotic(
    params: RiskParams,
    ls: LocalStationarity,
    constants: DerivedConstants,
    x1: float,
    x2: float,
    lam: float,
    v: float,
    g_alpha: float,
    h_alpha: float,
) -> float:
    """Tail of the sup-inf functional over a window of width ~x1+x2 around t0.

    x1 and x2 may be math.inf (the unbounded-window case, where the normal
    factor collapses to 1); lam is the limit of the inner-window scaling and
    g_alpha the generalized constant at D0 * lam.
    """
    if not x2 > -x1:
        raise ParameterError("window half-widths must satisfy x2 > -x1")
    if lam < 0:
        raise ParameterError("window limit must be nonnegative")
    if v <= 0:
        raise ParameterError("level v must be positive")
    if g_alpha is None or h_alpha is None:
        raise DependencyError("Pickands-type constants are required")
    u = v ** (params.beta / (params.beta - params.hurst))
    tail = classical_ruin_asymptotic(params, ls, constants, u, h_alpha)
    scale = math.sqrt(constants.B / constants.A)
    factor = norm_cdf(scale * x2) - norm_cdf(-scale * x1)
    return (g_alpha / h_alpha) * factor * tail


def parisian_time_normalizer(params: RiskParams, constants: DerivedConstants, u: float, tau_star):
    """Center and scale a Parisian ruin time: (tau* - t0 u^{1/beta}) / time_scale(u).

    The normalized value converges in law to a standard normal, conditionally
    on Parisian ruin, as u grows.
    """
    if u <= 0:
        raise ParameterError("reserve u must be positive")
    center = constants.critical_time(u)
    scale = constants.time_scale(u)
    out = (np.asarray(tau_star, dtype=float) - center) / scale
    return float(out) if out.ndim == 0 else out


def time_gap_normalizer(params: RiskParams, u: float, tau, tau_star):
    """Scaled gap (tau* - tau) / u^{H/beta + 1/beta - 1}; converges to 0 in probability."""
    if u <= 0:
        raise ParameterError("reserve u must be positive")
    tau = np.asarray(tau, dtype=float)
    tau_star = np.asarray(tau_star, dtype=float)
    if np.any(tau < 0):
        raise ParameterError("ruin times must be nonnegative")
    if np.any(tau_star < tau):
        raise OrderingError("Parisian ruin cannot precede classical ruin")
    denom = u ** (params.hurst / params.beta + 1.0 / params.beta - 1.0)
    out = (tau_star - tau) / denom
    return float(out) if out.ndim == 0 else out
