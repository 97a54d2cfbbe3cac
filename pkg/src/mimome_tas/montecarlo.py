"""Exact finite-dimensional Monte Carlo oracle.

Each trial draws i.i.d. unit-variance complex Gaussian channels, keeps the
``L`` main-channel columns of largest norm, and evaluates the exact log-det
rates of both links on that selection. Trials are keyed by
``(seed, trial_index)`` so any subset can be run in any order and the result
stays bit-identical.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from ._jit import HAS_NUMBA
from .errors import DomainError

BLOCK_TRIALS = 2048
MC_METRICS = ("ergodic", "outage", "nzs", "cdf_at")


@dataclass(frozen=True)
class TrialResult:
    R_m: float
    R_e: float
    R_s: float


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_trials: int


@dataclass(frozen=True)
class TrialBatch:
    """Per-trial outputs of :func:`simulate_trials` (arrays of equal length)."""

    R_m: np.ndarray
    R_e: np.ndarray
    selected_gain: np.ndarray

    @property
    def R_s(self):
        return np.maximum(self.R_m - self.R_e, 0.0)

    def __len__(self):
        return len(self.R_m)


def default_backend():
    return "numba" if HAS_NUMBA else "numpy"


def sample_channel(seed, trial_index, rows, cols, stream=_kernels.MAIN_STREAM):
    """Deterministic ``rows x cols`` matrix of unit-variance complex Gaussians.

    Real and imaginary parts each have variance 1/2. ``stream`` separates
    independent matrices of the same trial (0: main, 1: eavesdropper).
    """
    if rows < 1 or cols < 1:
        raise DomainError(f"matrix dimensions must be positive, got {rows}x{cols}")
    key = _kernels.keys_numpy(_kernels.as_seed(seed), np.array([trial_index]), stream)
    idx = (np.arange(cols)[None, :] * rows + np.arange(rows)[:, None]).ravel()
    return _kernels.gaussian_entries_numpy(key, idx).reshape(rows, cols)


def tas_select(H_m, L):
    """Indices (0-based) of the ``L`` columns with largest squared norm.

    Ordered by decreasing norm; equal norms keep the smaller index first.
    """
    H_m = np.asarray(H_m)
    M = H_m.shape[1]
    if not 1 <= L <= M:
        raise DomainError(f"L must lie in [1, {M}], got {L}")
    norms = np.sum(np.abs(H_m) ** 2, axis=0)
    return np.argsort(-norms, kind="stable")[:L]


def log2_det_identity_plus(H, rho):
    """``log2 det(I + rho H^H H)`` through the smaller Gram matrix and Cholesky."""
    H = np.asarray(H, dtype=np.complex128)
    return float(_kernels._logdet2_batch(H[None], float(rho))[0])


def instantaneous_rates(H_m_sel, H_e_sel, rho_m, rho_e):
    H_m_sel = np.atleast_2d(H_m_sel)
    H_e_sel = np.atleast_2d(H_e_sel)
    if H_m_sel.shape[1] != H_e_sel.shape[1]:
        raise DomainError(
            f"selected channels disagree on L: {H_m_sel.shape[1]} vs {H_e_sel.shape[1]}")
    R_m = log2_det_identity_plus(H_m_sel, rho_m)
    R_e = log2_det_identity_plus(H_e_sel, rho_e)
    return TrialResult(R_m=R_m, R_e=R_e, R_s=max(R_m - R_e, 0.0))


def _run_block(backend, seed, first, n, cfg):
    run = _kernels.run_block_numba if backend == "numba" else _kernels.run_block_numpy
    return run(seed, first, n, cfg.M, cfg.L, cfg.N_r, cfg.N_e, cfg.rho_m, cfg.rho_e)


def simulate_trials(cfg, n_trials, seed, first_trial=0, backend=None, workers=1):
    """Run trials ``first_trial .. first_trial + n_trials - 1``.

    Blocks of trials may run on ``workers`` threads; the output does not
    depend on ``workers`` or on the back end beyond floating-point round-off.
    """
    backend = backend or default_backend()
    if backend not in ("numba", "numpy"):
        raise DomainError(f"unknown backend {backend!r}")
    if n_trials < 1:
        raise DomainError(f"n_trials must be positive, got {n_trials}")
    seed = _kernels.as_seed(seed)
    starts = range(first_trial, first_trial + n_trials, BLOCK_TRIALS)
    jobs = [(s, min(BLOCK_TRIALS, first_trial + n_trials - s)) for s in starts]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _run_block(backend, seed, *job, cfg), jobs))
    else:
        parts = [_run_block(backend, seed, s, n, cfg) for s, n in jobs]
    R_m, R_e, gain = (np.concatenate(col) for col in zip(*parts))
    return TrialBatch(R_m=R_m, R_e=R_e, selected_gain=gain)


def estimate_from_samples(samples):
    """Sample mean (exactly rounded sum) and its standard error."""
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    mean = math.fsum(samples) / n
    if n > 1:
        var = math.fsum((samples - mean) ** 2) / (n - 1)
    else:
        var = 0.0
    return Estimate(mean=mean, std_error=math.sqrt(var / n), n_trials=n)


def metric_samples(R_s, metric, threshold=None):
    """Per-trial values whose mean estimates ``metric``."""
    if metric == "ergodic":
        return R_s
    if metric in ("outage", "cdf_at"):
        if threshold is None:
            raise DomainError(f"metric {metric!r} needs a threshold")
        if metric == "outage":
            return (R_s < threshold).astype(float)
        return (R_s <= threshold).astype(float)
    if metric == "nzs":
        return (R_s > 0).astype(float)
    raise DomainError(f"unknown Monte Carlo metric {metric!r}; expected one of {MC_METRICS}")


def estimate_metric(cfg, metric, n_trials, seed, threshold=None, backend=None, workers=1):
    """Monte Carlo estimate of a secrecy metric.

    ``metric`` is ``"ergodic"`` (mean of ``R_s``), ``"outage"`` (fraction
    with ``R_s < threshold``), ``"nzs"`` (fraction with ``R_s > 0``) or
    ``"cdf_at"`` (fraction with ``R_s <= threshold``).
    """
    if n_trials < 100:
        raise DomainError(f"need at least 100 trials, got {n_trials}")
    batch = simulate_trials(cfg, n_trials, seed, backend=backend, workers=workers)
    return estimate_from_samples(metric_samples(batch.R_s, metric, threshold))


def empirical_epsilon_outage(R_s, eps):
    """Empirical ``eps``-quantile of ``R_s`` with an order-statistic std error."""
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    x = np.sort(np.asarray(R_s, dtype=float))
    n = len(x)
    value = float(np.quantile(x, eps, method="inverted_cdf"))
    half = math.sqrt(n * eps * (1 - eps))
    lo = int(max(0, math.floor(n * eps - half)))
    hi = int(min(n - 1, math.ceil(n * eps + half)))
    return Estimate(mean=value, std_error=0.5 * float(x[hi] - x[lo]), n_trials=n)
