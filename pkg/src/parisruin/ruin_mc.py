"""Monte Carlo estimation of classical and Parisian ruin.

Each replication samples the claim process on a uniform grid, forms the
surplus R_u(t) = u + c t^beta - X_H(t), and scans once:

  * classical ruin is the first grid time with R_u < 0;
  * Parisian ruin uses a running sub-zero sojourn clock, reset whenever
    R_u >= 0, and fires when the clock reaches the window length. On the
    grid this is equivalent to the sup-inf functional over all window
    positions but costs O(n) per path instead of O(n^2).

Random windows draw their duration from a seed substream disjoint from the
path stream, so the duration is independent of the path by construction.
Because paths are a pure function of (model, grid, seed), two estimates that
share those inputs also share their noise: dominance and monotonicity
comparisons hold replication by replication, not just in expectation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .errors import OrderingError, ParameterError, PartialResultWarning, ResolutionError
from .process_sim import path_values_batch
from .risk_model import RiskParams, critical_point
from .seeds import SeedSpec, WINDOW_STREAM, as_seed
from .streaming import chunk_ranges, map_chunks

_CHUNK_BUDGET = 4_000_000
# Absorbs round-off in T/step when the window is an exact multiple of the step.
_STEP_RTOL = 1e-9


@dataclass(frozen=True)
class WindowSpec:
    """The Parisian window: deterministic, exponential, or custom random."""

    kind: str
    duration: float = 0.0
    rate: float = 0.0
    sampler: Callable | None = None

    def __post_init__(self):
        if self.kind == "deterministic":
            if self.duration < 0:
                raise ParameterError("window duration must be nonnegative")
        elif self.kind == "exponential":
            if self.rate <= 0:
                raise ParameterError("exponential window rate must be positive")
        elif self.kind == "custom":
            if self.sampler is None:
                raise ParameterError("a custom window needs a sampler")
        else:
            raise ParameterError(f"unknown window kind {self.kind!r}")

    @classmethod
    def deterministic(cls, duration: float) -> "WindowSpec":
        return cls(kind="deterministic", duration=duration)

    @classmethod
    def exponential(cls, rate: float) -> "WindowSpec":
        return cls(kind="exponential", rate=rate)

    @classmethod
    def custom(cls, sampler: Callable) -> "WindowSpec":
        return cls(kind="custom", sampler=sampler)

    @property
    def is_random(self) -> bool:
        return self.kind != "deterministic"

    def draw(self, rng) -> float:
        if self.kind == "deterministic":
            return self.duration
        if self.kind == "exponential":
            return rng.standard_exponential() / self.rate
        value = float(self.sampler(rng))
        if value <= 0:
            raise ParameterError("a random window duration must be positive")
        return value

    def describe(self) -> str:
        if self.kind == "deterministic":
            return f"T={self.duration:g}"
        if self.kind == "exponential":
            return f"exp:{self.rate:g}"
        return "custom"


@dataclass(frozen=True)
class RuinSample:
    """Outcome of one replication: ruin times and the sojourn diagnostic.

    kappa_clock is the longest sub-zero sojourn observed along the path
    (the running clock that defines Parisian ruin).
    """

    ruined: bool
    tau: float | None
    tau_star: float | None
    kappa_clock: float
    window_duration: float

    def __post_init__(self):
        if self.tau_star is not None:
            if self.tau is None:
                raise OrderingError("Parisian ruin requires classical ruin")
            if self.tau_star < self.tau:
                raise OrderingError("Parisian ruin cannot precede classical ruin")


@dataclass(frozen=True)
class MCEstimate:
    """A binomial Monte Carlo estimate with its full run configuration."""

    p_hat: float
    stderr: float
    n: int
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_hat <= 1.0:
            raise ParameterError("a probability estimate must lie in [0, 1]")


@dataclass(frozen=True)
class ConditionalRuinSamples:
    """Ruined replications collected until a target count (or a cap) was hit."""

    samples: list
    n_replications: int
    target: int
    complete: bool

    @property
    def taus(self) -> np.ndarray:
        return np.array([s.tau for s in self.samples])

    @property
    def tau_stars(self) -> np.ndarray:
        return np.array([s.tau_star for s in self.samples])


def default_horizon(params: RiskParams) -> float:
    """5 t0 u^{1/beta}: five times the time scale where ruin concentrates."""
    t0 = critical_point(params)
    u_eff = params.u if params.u > 0 else 1.0
    return 5.0 * t0 * u_eff ** (1.0 / params.beta)


# ---------------------------------------------------------------------------
# the grid scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _RunConfig:
    params: RiskParams
    window: WindowSpec
    n_steps: int
    step: float
    master_seed: int


def _window_steps(cfg: _RunConfig, reps: np.ndarray):
    """Window length in grid steps: an int, or one int per replication."""
    if not cfg.window.is_random:
        t = cfg.window.duration
        return int(math.ceil(t / cfg.step - _STEP_RTOL)) if t > 0 else 0
    master = cfg.master_seed
    durations = np.empty(reps.shape[0])
    for row, rep in enumerate(reps):
        rng = SeedSpec(master, int(rep)).rng(WINDOW_STREAM)
        durations[row] = cfg.window.draw(rng)
    return np.maximum(np.ceil(durations / cfg.step - _STEP_RTOL).astype(np.int64), 1), durations


def _scan(cfg: _RunConfig, bounds):
    """Scan one chunk; returns per-replication indices and times."""
    lo, hi = bounds
    reps = np.arange(lo, hi)
    t = np.arange(cfg.n_steps + 1) * cfg.step
    x = path_values_batch(cfg.params.model, cfg.n_steps, cfg.step, SeedSpec(cfg.master_seed), reps)
    below = x > cfg.params.u + cfg.params.c * t**cfg.params.beta  # R_u(t) < 0
    idx = np.arange(cfg.n_steps + 1, dtype=np.int32)
    last_nonneg = np.maximum.accumulate(np.where(below, np.int32(0), idx), axis=1)
    sojourn = idx - last_nonneg

    if cfg.window.is_random:
        m, durations = _window_steps(cfg, reps)
        fires = below & (sojourn >= m[:, None])
    else:
        m = _window_steps(cfg, reps)
        durations = np.full(reps.shape[0], cfg.window.duration)
        fires = below & (sojourn >= m)

    any_classical = below.any(axis=1)
    any_parisian = fires.any(axis=1)
    j_tau = np.argmax(below, axis=1)
    j_star = np.argmax(fires, axis=1)
    kappa = sojourn.max(axis=1) * cfg.step
    return reps, any_classical, j_tau * cfg.step, any_parisian, j_star * cfg.step, kappa, durations


def _count_chunk(cfg: _RunConfig, bounds):
    _, any_c, _, any_p, _, _, _ = _scan(cfg, bounds)
    return any_c.size, int(any_c.sum()), int(any_p.sum())


def _collect_chunk(cfg: _RunConfig, bounds):
    reps, any_c, tau, any_p, tau_star, kappa, durations = _scan(cfg, bounds)
    keep = any_p
    return (
        any_c.size,
        reps[keep],
        tau[keep],
        tau_star[keep],
        kappa[keep],
        durations[keep],
    )


def _build_config(params, window, horizon, step, seed, which, n):
    if horizon is None:
        horizon = default_horizon(params)
    if horizon <= 0 or step <= 0:
        raise ParameterError("horizon and step must be positive")
    if not window.is_random and 0.0 < window.duration < step:
        raise ResolutionError(
            f"step {step} cannot resolve a window of length {window.duration}"
        )
    n_steps = int(round(horizon / step))
    if n_steps < 2:
        raise ParameterError("the grid needs at least two steps")
    run = _RunConfig(
        params=params,
        window=window,
        n_steps=n_steps,
        step=float(step),
        master_seed=as_seed(seed).master_seed,
    )
    record = {
        "model": "fbm" if params.model.is_fbm else "custom",
        "hurst": params.hurst,
        "beta": params.beta,
        "c": params.c,
        "u": params.u,
        "window": window.describe(),
        "horizon": n_steps * float(step),
        "step": float(step),
        "n": n,
        "master_seed": run.master_seed,
        "which": which,
        "provenance": "monte_carlo",
    }
    return run, record


def simulate_ruin(params: RiskParams, window: WindowSpec, horizon: float, step: float, seed) -> RuinSample:
    """One replication: sample the path and scan for both ruin kinds.

    The replication is identified by `seed.replication_index` under
    `seed.master_seed`, so batch estimators reproduce it exactly.
    """
    seed = as_seed(seed)
    cfg, _ = _build_config(params, window, horizon, step, seed, "both", 1)
    rep = seed.replication_index
    _, any_c, tau, any_p, tau_star, kappa, durations = _scan(cfg, (rep, rep + 1))
    return RuinSample(
        ruined=bool(any_p[0]),
        tau=float(tau[0]) if any_c[0] else None,
        tau_star=float(tau_star[0]) if any_p[0] else None,
        kappa_clock=float(kappa[0]),
        window_duration=float(durations[0]),
    )


def estimate_ruin_prob(
    params: RiskParams,
    window: WindowSpec,
    horizon: float | None,
    step: float,
    n: int,
    seed,
    which: str = "parisian",
    jobs: int = 1,
):
    """Binomial estimate of the ruin probability over n independent replications.

    which is "classical", "parisian", or "both"; "both" scans each path once
    and returns a (classical, parisian) pair sharing identical noise.
    """
    if which not in ("classical", "parisian", "both"):
        raise ParameterError(f"unknown estimate kind {which!r}")
    if n < 100:
        raise ParameterError("need at least 100 replications")
    cfg, record = _build_config(params, window, horizon, step, seed, which, n)
    chunk = max(64, _CHUNK_BUDGET // (cfg.n_steps + 1))
    results = map_chunks(partial(_count_chunk, cfg), chunk_ranges(n, chunk), jobs=jobs)
    total = sum(r[0] for r in results)
    k_classical = sum(r[1] for r in results)
    k_parisian = sum(r[2] for r in results)

    def build(k, label):
        p = k / total
        return MCEstimate(
            p_hat=p,
            stderr=math.sqrt(p * (1.0 - p) / total),
            n=total,
            config={**record, "which": label},
        )

    if which == "classical":
        return build(k_classical, "classical")
    if which == "parisian":
        return build(k_parisian, "parisian")
    return build(k_classical, "classical"), build(k_parisian, "parisian")


def sample_conditional_ruin_times(
    params: RiskParams,
    window: WindowSpec,
    horizon: float | None,
    step: float,
    n_ruined_target: int,
    seed,
    max_replications: int = 20_000_000,
    jobs: int = 1,
) -> ConditionalRuinSamples:
    """Collect replications with Parisian ruin until a target count is reached.

    Simulation proceeds in deterministic chunks until n_ruined_target ruined
    paths are found or max_replications is hit; hitting the cap emits a
    PartialResultWarning carrying the achieved count. Restricting to ruin
    inside the horizon is how conditioning on eventual ruin is approximated;
    the horizon-doubling check in the tests bounds the difference.
    """
    if n_ruined_target < 50:
        raise ParameterError("need a target of at least 50 ruined paths")
    if max_replications < 1:
        raise ParameterError("the replication cap must be positive")
    cfg, _ = _build_config(params, window, horizon, step, seed, "conditional", n_ruined_target)
    chunk = max(64, _CHUNK_BUDGET // (cfg.n_steps + 1))
    ranges = chunk_ranges(max_replications, chunk)
    worker = partial(_collect_chunk, cfg)

    collected = []
    n_scanned = 0
    n_found = 0
    pos = 0
    wave = max(1, int(jobs))
    while pos < len(ranges) and n_found < n_ruined_target:
        batch = ranges[pos : pos + wave]
        pos += wave
        for total, reps, tau, tau_star, kappa, durations in map_chunks(worker, batch, jobs=jobs):
            n_scanned += total
            n_found += reps.size
            collected.append((reps, tau, tau_star, kappa, durations))

    samples = []
    for reps, tau, tau_star, kappa, durations in collected:
        for i in range(reps.size):
            samples.append(
                RuinSample(
                    ruined=True,
                    tau=float(tau[i]),
                    tau_star=float(tau_star[i]),
                    kappa_clock=float(kappa[i]),
                    window_duration=float(durations[i]),
                )
            )
    complete = len(samples) >= n_ruined_target
    if complete:
        samples = samples[:n_ruined_target]
    else:
        warnings.warn(
            f"replication cap {max_replications} reached with "
            f"{len(samples)} of {n_ruined_target} ruined paths",
            PartialResultWarning,
        )
    return ConditionalRuinSamples(
        samples=samples,
        n_replications=n_scanned,
        target=n_ruined_target,
        complete=complete,
    )
