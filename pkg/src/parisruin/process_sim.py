"""Exact sampling of centered self-similar Gaussian processes on uniform grids.

Fractional Brownian motion is generated by circulant embedding of the unit-step
increment autocovariance (Davies-Harte), which is exact in law and O(n log n);
the increments are then cumulated and rescaled by step**H. For H = 1/2 the
increments are i.i.d. Gaussian and are drawn directly, which gives the same law
at half the cost. Arbitrary covariance models go through a dense factorization
of their Gram matrix instead.

Samplers are pure functions of a SeedSpec: no shared mutable state, safe to
call from many workers at once. Spectral data for a fixed (H, n) is cached and
shared read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import CovarianceError, ParameterError
from .seeds import PATH_STREAM, SeedSpec

# Eigenvalues (of an embedding or a Gram matrix) more negative than this,
# relative to the largest one, mean the model is genuinely invalid; anything
# smaller is clipped to zero as floating-point noise.
PSD_RTOL = 1e-8

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class CovarianceModel:
    """Covariance of a centered self-similar Gaussian process.

    ``cov is None`` selects the built-in fBm covariance
    (1/2)(t^{2H} + s^{2H} - |t-s|^{2H}). A custom callable must be symmetric,
    satisfy cov(t, t) = t^{2H}, and be positive semidefinite on any finite
    grid; PSD is checked when the Gram matrix is factorized.
    """

    hurst: float
    cov: Callable | None = None

    def __post_init__(self):
        if not 0.0 < float(self.hurst) < 1.0:
            raise ParameterError(f"Hurst index must lie in (0, 1), got {self.hurst}")

    @classmethod
    def fbm(cls, hurst: float) -> "CovarianceModel":
        return cls(hurst=hurst)

    @classmethod
    def custom(cls, cov: Callable, hurst: float) -> "CovarianceModel":
        return cls(hurst=hurst, cov=cov)

    @property
    def is_fbm(self) -> bool:
        return self.cov is None

    def covariance(self, s, t):
        """Covariance evaluated elementwise (broadcasts for the fBm preset)."""
        if self.cov is None:
            h2 = 2.0 * self.hurst
            s = np.asarray(s, dtype=float)
            t = np.asarray(t, dtype=float)
            return 0.5 * (np.abs(t) ** h2 + np.abs(s) ** h2 - np.abs(t - s) ** h2)
        return self.cov(s, t)


@dataclass(frozen=True)
class PathGrid:
    """A sampled trajectory X(0), X(step), ..., X(n*step)."""

    step: float
    values: np.ndarray

    def __post_init__(self):
        if self.step <= 0:
            raise ParameterError("step must be positive")
        if self.values.ndim != 1 or self.values.shape[0] < 2:
            raise ParameterError("a path needs at least two grid values")
        if self.values[0] != 0.0:
            raise ParameterError("a centered path must start at X(0) = 0")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) * self.step


# ---------------------------------------------------------------------------
# fBm via circulant embedding
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _fgn_spectrum(hurst: float, n: int):
    """sqrt of the circulant-embedding eigenvalues for n unit-step fGn values.

    Returns the first n+1 entries (the rfft half; the row is symmetric), or
    None when the embedding has eigenvalues below -PSD_RTOL * max.
    """
    k = np.arange(n + 1, dtype=float)
    h2 = 2.0 * hurst
    gamma = 0.5 * ((k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)
    row = np.concatenate([gamma, gamma[-2:0:-1]])  # circulant first row, length 2n
    eigs = np.fft.rfft(row).real
    if eigs.min() < -PSD_RTOL * eigs.max():
        return None
    sq = np.sqrt(np.clip(eigs, 0.0, None))
    sq.setflags(write=False)
    return sq


def _unit_fgn(sq_half: np.ndarray, n: int, z: np.ndarray) -> np.ndarray:
    """Unit-step fGn of length n from 2n i.i.d. normals z (batched on axis 0)."""
    m = 2 * n
    w = np.zeros(z.shape[:-1] + (n + 1,), dtype=np.complex128)
    w[..., 0] = z[..., 0]
    w[..., n] = z[..., 1]
    if n > 1:
        re = z[..., 2 : n + 1]
        im = z[..., n + 1 :]
        w[..., 1:n] = (re + 1j * im) * np.sqrt(0.5)
    return np.fft.irfft(sq_half * w, n=m, axis=-1)[..., :n] * np.sqrt(m)


def _rep_normals(seed: SeedSpec, rep_indices, count: int, stream: int = PATH_STREAM) -> np.ndarray:
    """Standard normals, one row per replication, each from its own stream."""
    rep_indices = np.asarray(rep_indices, dtype=np.int64)
    out = np.empty((rep_indices.shape[0], count))
    master = seed.master_seed
    for row, rep in enumerate(rep_indices):
        out[row] = SeedSpec(master, int(rep)).rng(stream).standard_normal(count)
    return out


def fbm_values_batch(hurst: float, n: int, step: float, seed: SeedSpec, rep_indices) -> np.ndarray:
    """fBm values on {0, step, ..., n*step}, one row per replication index."""
    if not 0.0 < hurst < 1.0:
        raise ParameterError(f"Hurst index must lie in (0, 1), got {hurst}")
    if n < 1:
        raise ParameterError("need at least one increment")
    if step <= 0:
        raise ParameterError("step must be positive")
    if hurst == 0.5:
        fgn = _rep_normals(seed, rep_indices, n)
    else:
        sq = _fgn_spectrum(hurst, n)
        if sq is None:
            # Embedding not usable: draw through the Gram factorization instead.
            factor = _gram_factor(CovarianceModel.fbm(hurst), n, step)
            z = _rep_normals(seed, rep_indices, n)
            out = np.zeros((z.shape[0], n + 1))
            out[:, 1:] = z @ factor.T
            return out
        fgn = _unit_fgn(sq, n, _rep_normals(seed, rep_indices, 2 * n))
    values = np.zeros((fgn.shape[0], n + 1))
    np.cumsum(fgn, axis=-1, out=values[:, 1:])
    values *= step**hurst
    return values


def sample_fbm(hurst: float, n: int, step: float, seed: SeedSpec) -> PathGrid:
    """One exact fBm path on {0, step, ..., n*step}.

    Parameters
    ----------
    hurst : float
        Hurst index in (0, 1); 1/2 gives Brownian motion.
    n : int
        Number of increments (the path has n+1 values).
    step : float
        Grid spacing.
    seed : SeedSpec
        Fixes every random draw of this path.
    """
    if n < 2:
        raise ParameterError("grid size n must be at least 2")
    values = fbm_values_batch(hurst, n, step, seed, [seed.replication_index])[0]
    return PathGrid(step=step, values=values)


# ---------------------------------------------------------------------------
# generic covariance models
# ---------------------------------------------------------------------------

def _psd_factor(gram: np.ndarray) -> np.ndarray:
    """A factor F with F @ F.T = gram; raises CovarianceError when not PSD."""
    try:
        return np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        pass
    w, vec = np.linalg.eigh(gram)
    wmin = float(w.min())
    wmax = float(max(w.max(), 0.0))
    if wmin < -PSD_RTOL * wmax:
        raise CovarianceError(
            "covariance is not positive semidefinite on the sampling grid "
            f"(most negative eigenvalue {wmin:.6e})",
            min_eigenvalue=wmin,
        )
    return vec * np.sqrt(np.clip(w, 0.0, None))


@lru_cache(maxsize=16)
def _gram_factor(model: CovarianceModel, n: int, step: float) -> np.ndarray:
    """Factor of the model's Gram matrix on {step, ..., n*step} (t=0 excluded)."""
    t = np.arange(1, n + 1, dtype=float) * step
    try:
        gram = np.asarray(model.covariance(t[:, None], t[None, :]), dtype=float)
        if gram.shape != (n, n):
            raise ValueError
    except Exception:
        gram = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                gram[i, j] = model.covariance(t[i], t[j])
    factor = _psd_factor(gram)
    factor.setflags(write=False)
    return factor


def sample_custom(model: CovarianceModel, n: int, step: float, seed: SeedSpec) -> PathGrid:
    """One path of an arbitrary covariance model via Gram-matrix factorization.

    Slower than the spectral fBm path (O(n^3) factorization, cached per grid)
    but works for any PSD covariance; X(0) = 0 exactly.
    """
    if n < 2:
        raise ParameterError("grid size n must be at least 2")
    if step <= 0:
        raise ParameterError("step must be positive")
    factor = _gram_factor(model, n, step)
    z = seed.rng().standard_normal(n)
    values = np.zeros(n + 1)
    values[1:] = factor @ z
    return PathGrid(step=step, values=values)


def path_values_batch(model: CovarianceModel, n: int, step: float, seed: SeedSpec, rep_indices) -> np.ndarray:
    """Batched path values for either model kind, one row per replication."""
    if model.is_fbm:
        return fbm_values_batch(model.hurst, n, step, seed, rep_indices)
    factor = _gram_factor(model, n, step)
    z = _rep_normals(seed, rep_indices, n)
    out = np.zeros((z.shape[0], n + 1))
    out[:, 1:] = z @ factor.T
    return out


# ---------------------------------------------------------------------------
# drifted fields for the Pickands-type constants
# ---------------------------------------------------------------------------

def drifted_field_batch(alpha: float, n: int, step: float, seed: SeedSpec, rep_indices) -> np.ndarray:
    """sqrt(2) B_alpha(t) - t^alpha on {0, ..., n*step}, one row per replication.

    B_alpha is a standard fBm with Hurst index alpha/2. alpha = 2 is the
    degenerate perfectly-correlated case B_2(t) = t N.
    """
    if not 0.0 < alpha <= 2.0:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    t = np.arange(n + 1, dtype=float) * step
    if alpha == 2.0:
        path = _rep_normals(seed, rep_indices, 1) * t
    else:
        path = fbm_values_batch(alpha / 2.0, n, step, seed, rep_indices)
    return SQRT2 * path - t**alpha


def two_sided_drifted_field_batch(
    alpha: float, n_left: int, n_right: int, step: float, seed: SeedSpec, rep_indices
) -> np.ndarray:
    """sqrt(2) B_alpha(w) - |w|^alpha on w = -n_left*step .. n_right*step.

    The two-sided fBm is one stationary-increment sequence spanning the whole
    range, re-anchored so that B(0) = 0 at grid index n_left.
    """
    if not 0.0 < alpha <= 2.0:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    w = (np.arange(n_left + n_right + 1, dtype=float) - n_left) * step
    if alpha == 2.0:
        path = _rep_normals(seed, rep_indices, 1) * w
    else:
        path = fbm_values_batch(alpha / 2.0, n_left + n_right, step, seed, rep_indices)
        path = path - path[:, n_left : n_left + 1]
    return SQRT2 * path - np.abs(w) ** alpha


def sample_drifted_field(alpha: float, grid_end: float, step: float, seed: SeedSpec) -> PathGrid:
    """One path of the drifted field sqrt(2) B_alpha(t) - t^alpha on [0, grid_end]."""
    if step <= 0:
        raise ParameterError("step must be positive")
    n = int(round(grid_end / step))
    if n < 2:
        raise ParameterError("grid_end must cover at least two steps")
    values = drifted_field_batch(alpha, n, step, seed, [seed.replication_index])[0]
    values[0] = 0.0  # exactly, not just up to rounding of 0**alpha
    return PathGrid(step=step, values=values)
