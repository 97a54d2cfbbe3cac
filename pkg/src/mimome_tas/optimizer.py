"""Optimal number of active transmit antennas.

:func:`optimal_L_exhaustive` is the ground truth: it scores every integer
``L`` with the analytic metric. The three ``optimal_L_example*`` solvers are
fast closed-form routes for the single-antenna-receiver settings; each finds
a real stationary point ``ell_star`` and rounds it by comparing the analytic
metric at its floor and ceiling.
"""
from dataclasses import dataclass
import math

import numpy as np

from .analytic import PSI, SystemConfig, evaluate_metric, secrecy_distribution
from .errors import DomainError
from .special import (
    RootSolverSettings,
    find_root_bracketed,
    gaussian_pdf,
    gaussian_q,
    gaussian_q_inv,
)

MAX_EXHAUSTIVE_M = 4096
_STATIONARY = RootSolverSettings(abs_tolerance=1e-11, max_iterations=400)
_SINGLE_ANTENNA = RootSolverSettings(abs_tolerance=1e-13, max_iterations=400)


@dataclass(frozen=True)
class OptimalSelection:
    ell_star: float
    L_star: int
    metric_value: float
    metric_kind: str
    method: str = "exhaustive"
    saturated: bool = False


def _metric(M, L, N_r, N_e, rho_m, rho_e, kind, eps=None, R_o=None):
    dist = secrecy_distribution(SystemConfig(M, L, N_r, N_e, rho_m, rho_e))
    return evaluate_metric(dist, kind, R_o=R_o, eps=eps)


def metric_curve(M, N_r, N_e, rho_m, rho_e, metric_kind="ergodic", eps=None):
    """Analytic metric at every ``L`` in ``1..M`` (index ``L - 1``)."""
    return np.array([_metric(M, L, N_r, N_e, rho_m, rho_e, metric_kind, eps)
                     for L in range(1, M + 1)])


def optimal_L_exhaustive(M, N_r, N_e, rho_m, rho_e, metric_kind="ergodic", eps=None,
                         metric=None):
    """Argmax of the analytic metric over ``L = 1..M``; ties go to smaller ``L``.

    ``metric`` optionally replaces the scoring function; it receives a
    :class:`SystemConfig` and returns a float.
    """
    if M > MAX_EXHAUSTIVE_M:
        raise DomainError(f"exhaustive search limited to M <= {MAX_EXHAUSTIVE_M}, got {M}")
    if metric_kind not in ("ergodic", "eps_outage"):
        raise DomainError(f"cannot maximize metric {metric_kind!r}")
    if metric is None:
        values = metric_curve(M, N_r, N_e, rho_m, rho_e, metric_kind, eps)
    else:
        values = np.array([metric(SystemConfig(M, L, N_r, N_e, rho_m, rho_e))
                           for L in range(1, M + 1)])
    k = int(np.argmax(values))  # first maximum, i.e. smallest L on ties
    return OptimalSelection(ell_star=float(k + 1), L_star=k + 1,
                            metric_value=float(values[k]), metric_kind=metric_kind)


def _round_by_metric(ell, M, score):
    lo = max(1, min(M, math.floor(ell)))
    hi = max(1, min(M, math.ceil(ell)))
    s_lo = score(lo)
    if hi == lo:
        return lo, s_lo
    s_hi = score(hi)
    return (hi, s_hi) if s_hi > s_lo else (lo, s_lo)


def central_difference(fn, x, lo=None, hi=None):
    h = 1e-5 * max(1.0, abs(x))
    a = x - h if lo is None else max(lo, x - h)
    b = x + h if hi is None else min(hi, x + h)
    return (fn(b) - fn(a)) / (b - a)


# --- single-antenna terminals, ergodic rate ~ eta ------------------------------

def example1_equation(ell, rho_m, rho_e, M):
    """Stationarity residual ``rho_e*ell + ln(ell) + rho_e/rho_m - ln(M)``."""
    return rho_e * ell + math.log(ell) + rho_e / rho_m - math.log(M)


def optimal_L_example1(rho_m, rho_e, M):
    if not (rho_m > 0 and rho_e > 0):
        raise DomainError("example-1 solver needs positive SNRs")
    g = lambda ell: example1_equation(ell, rho_m, rho_e, M)  # noqa: E731
    saturated = False
    if g(M) <= 0:
        ell_star, saturated = float(M), g(M) < 0
    elif g(1.0) >= 0:
        ell_star, saturated = 1.0, g(1.0) > 0
    else:
        ell_star = find_root_bracketed(g, 1.0, float(M), _SINGLE_ANTENNA)
    L_star, value = _round_by_metric(
        ell_star, M, lambda L: _metric(M, L, 1, 1, rho_m, rho_e, "ergodic"))
    return OptimalSelection(ell_star=ell_star, L_star=L_star, metric_value=value,
                            metric_kind="ergodic", method="example1", saturated=saturated)


# --- single receive antenna, multi-antenna eavesdropper, ergodic envelope ------

def example2_mean(ell, rho_m, rho_e, N_e, M):
    """Envelope of ``eta`` for ``N_r = 1`` (bits)."""
    main = math.log2(1.0 + rho_m * ell * (1.0 + math.log(M / ell)))
    U_e, V_e = min(ell, N_e), max(ell, N_e)
    return main - U_e * math.log2(1.0 + rho_e * V_e)


def example2_std(ell, rho_m, rho_e, N_e, M):
    """Envelope of ``sigma`` for ``N_r = 1`` (bits).

    With one receive antenna the selected-gain variance is ``ell*(2 - ell/M)``
    and the main-channel SNR scale is ``1 + rho_m*ell*(1 + ln(M/ell))``.
    """
    K = 1.0 + rho_m * ell * (1.0 + math.log(M / ell))
    var = rho_m ** 2 * ell * (2.0 - ell / M) / K ** 2
    U_e, V_e = min(ell, N_e), max(ell, N_e)
    if N_e > ell:
        var += U_e / V_e
    elif N_e < ell:
        var += U_e * V_e * rho_e ** 2 / (1.0 + rho_e * V_e) ** 2
    return PSI * math.sqrt(var)


def example2_rate(ell, rho_m, rho_e, N_e, M):
    f = example2_mean(ell, rho_m, rho_e, N_e, M)
    s = example2_std(ell, rho_m, rho_e, N_e, M)
    h = f / s
    return s * gaussian_pdf(h) + f * gaussian_q(-h)


def _maximize_envelope(rate, M, kinks=()):
    """Stationary maximizer of a smooth envelope on ``[1, M]``.

    Scans integer points, brackets the sign change of the numerical
    derivative around the best one and refines it. Falls back to the best
    grid point when the maximum sits on a boundary or a kink.
    """
    grid = np.arange(1, M + 1, dtype=float)
    values = np.array([rate(x) for x in grid])
    k = int(np.argmax(values))
    deriv = lambda x: central_difference(rate, x, 1.0, float(M))  # noqa: E731
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, M - 1)]
    if any(lo < b < hi for b in kinks):
        return float(grid[k]), False
    d_lo, d_hi = deriv(lo), deriv(hi)
    if d_lo > 0 > d_hi:
        return find_root_bracketed(deriv, lo, hi, _STATIONARY), False
    if k == 0 and d_lo <= 0:
        return 1.0, True
    if k == M - 1 and d_hi >= 0:
        return float(M), True
    return float(grid[k]), False


def optimal_L_example2(rho_m, rho_e, N_e, M):
    if not (rho_m > 0 and rho_e > 0 and N_e >= 1):
        raise DomainError("example-2 solver needs positive SNRs and N_e >= 1")
    rate = lambda ell: example2_rate(ell, rho_m, rho_e, N_e, M)  # noqa: E731
    ell_star, saturated = _maximize_envelope(rate, M, kinks=(float(N_e),))
    L_star, value = _round_by_metric(
        ell_star, M, lambda L: _metric(M, L, 1, N_e, rho_m, rho_e, "ergodic"))
    return OptimalSelection(ell_star=ell_star, L_star=L_star, metric_value=value,
                            metric_kind="ergodic", method="example2", saturated=saturated)


# --- single-antenna terminals, equal SNRs, epsilon-outage rate -----------------

def example3_threshold(M, eps):
    """SNR above which the epsilon-outage rate decreases in ``L``."""
    a_eps = -3.0 * gaussian_q_inv(1.0 - eps) * PSI / math.sqrt(2.0)
    return (1.0 + a_eps) * math.log(M) + a_eps - 1.0


def example3_rate(ell, rho, M, eps):
    """Envelope of ``eta + sigma * Q^-1(1 - eps)`` with ``rho_m = rho_e = rho``."""
    q0 = gaussian_q_inv(1.0 - eps)
    f = example2_mean(ell, rho, rho, 1, M)
    s = example2_std(ell, rho, rho, 1, M)
    return f + q0 * s


def optimal_L_example3(rho, M, eps):
    if not (rho > 0 and 0 < eps < 1):
        raise DomainError("example-3 solver needs rho > 0 and eps in (0, 1)")
    score = lambda L: _metric(M, L, 1, 1, rho, rho, "eps_outage", eps)  # noqa: E731
    if rho > example3_threshold(M, eps):
        return OptimalSelection(ell_star=1.0, L_star=1, metric_value=score(1),
                                metric_kind="eps_outage", method="example3-threshold",
                                saturated=True)
    rate = lambda ell: example3_rate(ell, rho, M, eps)  # noqa: E731
    # ell = 1 is where N_e = ell and the eavesdropper variance branch switches
    ell_star, saturated = _maximize_envelope(rate, M, kinks=())
    L_star, value = _round_by_metric(ell_star, M, score)
    return OptimalSelection(ell_star=ell_star, L_star=L_star, metric_value=value,
                            metric_kind="eps_outage", method="example3", saturated=saturated)
