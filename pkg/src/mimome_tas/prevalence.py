"""Sufficient conditions for the legitimate receiver to prevail.

The receiver prevails when the secrecy metric keeps growing with the number
of active antennas, so selecting fewer than ``M`` antennas never helps. The
test below checks positivity of a fixed-point function ``f(ell | T)`` that
lower-bounds the growth of the main-channel rate against the growth of the
eavesdropper rate.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .analytic import PSI, solve_tail_threshold
from .errors import DomainError
from .special import chi_square_pdf


@dataclass(frozen=True)
class PrevalenceTuple:
    rho_m: float
    rho_e: float
    N_r: int
    N_e: int

    def __post_init__(self):
        for name in ("rho_m", "rho_e"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and non-negative, got {value!r}")
        for name in ("N_r", "N_e"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class FixedPointTerms:
    ell: float
    value: float
    F: float
    f_R: float
    f_E: float
    Lambda: float
    E: float
    at_boundary: bool


@dataclass(frozen=True)
class PrevalenceReport:
    receiver_prevailing_sufficient: bool
    min_f_value: float
    argmin_ell: float
    grid_step: float = 1.0
    boundary_points: tuple = field(default=())


def fixed_point_terms(ell, T, M):
    """All pieces of ``f(ell | T) = F + f_R - f_E`` at a real ``ell``.

    ``u`` and ``eta_t`` are re-solved at ``ell`` (continuous extension of the
    order-statistics moments). Indicator terms use strict inequalities, so at
    ``ell == N_r`` or ``ell == N_e`` the corresponding branch vanishes and
    ``at_boundary`` is set.
    """
    ell = float(ell)
    if not 1.0 <= ell <= M:
        raise DomainError(f"ell must lie in [1, M={M}], got {ell}")
    rho_m, rho_e, N_r, N_e = T.rho_m, T.rho_e, T.N_r, T.N_e

    u = solve_tail_threshold(M, ell, N_r)
    eta_t = N_r * (ell + M * chi_square_pdf(u, N_r + 1))
    U_m, V_m = min(ell, N_r), max(ell, N_r)
    gain = rho_m * eta_t
    K = U_m + gain

    Lam = 0.5 * PSI * (gain / K) ** 2
    if gain > 0:
        F = rho_m * u * U_m / K * (1.0 + 2.0 * Lam * U_m * (U_m - 1) / (gain * V_m))
    else:
        F = 0.0
    E = 1.0 - U_m / K * (1.0 - Lam * (U_m + (2 * U_m - 1) * gain) / (U_m * V_m))

    f_R = 0.0
    if ell < N_r:
        f_R = math.log2(1.0 + gain / ell) - E
    elif ell > N_r:
        f_R = N_r * (N_r - 1) * Lam / ell ** 2

    f_E = 0.0
    if ell < N_e:
        f_E = math.log2(1.0 + rho_e * N_e)
    elif ell > N_e:
        f_E = rho_e * N_e / (1.0 + rho_e * ell)

    return FixedPointTerms(ell=ell, value=F + f_R - f_E, F=F, f_R=f_R, f_E=f_E,
                           Lambda=Lam, E=E, at_boundary=ell in (float(N_r), float(N_e)))


def fixed_point_function(ell, T, M):
    return fixed_point_terms(ell, T, M).value


def prevalence_grid(M, grid_step):
    """``{1, 1 + step, ..., M}``; ``M`` itself is always included."""
    if not 0 < grid_step <= 1:
        raise DomainError(f"grid_step must lie in (0, 1], got {grid_step}")
    n = int(math.floor((M - 1) / grid_step + 1e-9))
    grid = 1.0 + grid_step * np.arange(n + 1)
    if grid[-1] < M:
        grid = np.append(grid, float(M))
    return grid


def receiver_prevailing(T, M, grid_step=0.25):
    """Grid check of ``f(ell | T) > 0`` over ``[1, M]``.

    A ``True`` verdict is sufficient (not necessary) for the ergodic and
    epsilon-outage secrecy rates to increase monotonically in ``L``.
    """
    grid = prevalence_grid(M, grid_step)
    values = np.array([fixed_point_function(ell, T, M) for ell in grid])
    k = int(np.argmin(values))
    boundaries = tuple(b for b in (float(T.N_r), float(T.N_e)) if 1.0 <= b <= M)
    return PrevalenceReport(
        receiver_prevailing_sufficient=bool(np.all(values > 0)),
        min_f_value=float(values[k]),
        argmin_ell=float(grid[k]),
        grid_step=grid_step,
        boundary_points=tuple(sorted(set(boundaries))),
    )


def single_antenna_eavesdropper_threshold(M):
    """Smallest integer ``N_r`` with ``N_r >= 1 + sqrt(2 M)``."""
    if int(M) != M or M < 1:
        raise DomainError(f"M must be a positive integer, got {M!r}")
    # (N_r - 1)^2 >= 2M in exact integer arithmetic
    return math.isqrt(2 * int(M) - 1) + 2


def leqn_sides(ell, N_r, rho_m, rho_e, M):
    """Left and right sides of the single-antenna-eavesdropper inequality.

    Returns ``(lhs, rhs, branch)`` where ``branch`` is ``"below"`` for
    ``ell < N_r`` and ``"above"`` for ``ell > N_r``.
    """
    ell = float(ell)
    if not 1.0 <= ell <= M:
        raise DomainError(f"ell must lie in [1, M={M}], got {ell}")
    if ell == N_r:
        raise DomainError(f"ell == N_r == {N_r}: neither branch applies")
    u = solve_tail_threshold(M, ell, N_r)
    tail = M * chi_square_pdf(u, N_r + 1)
    rhs_tail = rho_e / (1.0 + rho_e * ell)
    if ell < N_r:
        eta_t = N_r * (ell + tail)
        lhs = u * ell / (N_r * ell + N_r * tail) + math.log2(1.0 + rho_m * eta_t / ell)
        return lhs, 1.0 + rhs_tail, "below"
    lhs = u / (ell + tail) + N_r * (N_r - 1) * PSI / (2.0 * ell ** 2)
    return lhs, rhs_tail, "above"


def leqn_conditions(ell, N_r, rho_m, rho_e, M):
    lhs, rhs, _ = leqn_sides(ell, N_r, rho_m, rho_e, M)
    return lhs >= rhs
