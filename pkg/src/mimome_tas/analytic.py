"""Large-system Gaussian surrogate for the TAS secrecy rate.

Under norm-based transmit antenna selection the instantaneous secrecy rate
``[R_m - R_e]^+`` is approximated by ``[R*]^+`` with ``R*`` Gaussian. The mean
and variance come from order statistics of the chi-square column norms of the
main channel (:func:`channel_gain_moments`) combined with the hardening of
both log-det rates (:func:`secrecy_distribution`).

All rates are in bits per channel use.
"""
from dataclasses import dataclass, field
import math

from .errors import DomainError
from .special import (
    RootSolverSettings,
    chi_square_pdf,
    chi_square_upper_tail,
    find_root_bracketed,
    gaussian_pdf,
    gaussian_q,
    gaussian_q_inv,
)

PSI = math.log2(math.e)
SIGMA_FLOOR = 1e-12
REGIME_BAND = (0.5, 2.0)

_FIXED_POINT_SETTINGS = RootSolverSettings(abs_tolerance=1e-13, max_iterations=400)


@dataclass(frozen=True)
class SystemConfig:
    """Wiretap setting: ``M`` transmit antennas of which ``L`` are active,
    ``N_r`` legitimate and ``N_e`` eavesdropper receive antennas, and linear
    SNRs ``rho_m`` / ``rho_e``."""

    M: int
    L: int
    N_r: int
    N_e: int
    rho_m: float
    rho_e: float

    def __post_init__(self):
        for name in ("M", "L", "N_r", "N_e"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
        if self.L > self.M:
            raise DomainError(f"L={self.L} exceeds M={self.M}")
        for name in ("rho_m", "rho_e"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and non-negative, got {value!r}")

    @property
    def beta_e(self):
        """Eavesdropper antennas per active antenna."""
        return self.N_e / self.L

    @property
    def regime_warning(self):
        """True when ``beta_e`` is neither much smaller nor much larger than 1."""
        return REGIME_BAND[0] <= self.beta_e <= REGIME_BAND[1]

    def with_L(self, L):
        return SystemConfig(self.M, L, self.N_r, self.N_e, self.rho_m, self.rho_e)


@dataclass(frozen=True)
class ChannelGainMoments:
    """Statistics of ``tr(H~^H H~)`` for the selected main-channel columns.

    ``u`` is the tail threshold solving ``int_u^inf f_{N_r} = L/M``; ``eta_t``
    and ``sigma_t_sq`` are the mean and variance of the selected gain sum.
    """

    u: float
    eta_t: float
    sigma_t_sq: float
    xi_t: float


@dataclass(frozen=True)
class DistributionTerms:
    """Named intermediates of :func:`secrecy_distribution`, kept for inspection."""

    U_m: float
    V_m: float
    U_e: float
    V_e: float
    K_t: float
    C_t: float
    main_mean: float
    eaves_mean: float
    main_variance: float
    eaves_variance: float


@dataclass(frozen=True)
class SecrecyRateDistribution:
    eta: float
    sigma: float
    moments: ChannelGainMoments = field(default=None, compare=False, repr=False)
    terms: DistributionTerms = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.eta) and math.isfinite(self.sigma)):
            raise DomainError(f"non-finite distribution parameters ({self.eta}, {self.sigma})")
        if self.sigma < 0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma}")

    @property
    def xi(self):
        return self.eta / self.sigma if self.sigma > 0 else math.copysign(math.inf, self.eta)

    @property
    def degenerate(self):
        return self.sigma <= SIGMA_FLOOR


def solve_tail_threshold(M, ell, N_r):
    """Threshold ``u >= 0`` with ``chi_square_upper_tail(u, N_r) = ell / M``.

    ``ell`` may be real, which gives the continuous extension in the number of
    active antennas.
    """
    ratio = ell / M
    if not 0 < ratio <= 1:
        raise DomainError(f"need 0 < ell <= M, got ell={ell}, M={M}")
    if ratio == 1:
        return 0.0
    hi = N_r + 40.0 * math.sqrt(N_r)
    return find_root_bracketed(
        lambda u: chi_square_upper_tail(u, N_r) - ratio, 0.0, hi, _FIXED_POINT_SETTINGS)


def gain_moments_at(M, ell, N_r):
    """:func:`channel_gain_moments` for a real number of active antennas."""
    u = solve_tail_threshold(M, ell, N_r)
    f1 = M * chi_square_pdf(u, N_r + 1)
    f2 = M * chi_square_pdf(u, N_r + 2)
    eta_t = N_r * (ell + f1)
    xi_t = N_r * (N_r + 1) * (ell + f1 + f2)
    sigma_t_sq = (u * ell - eta_t) ** 2 * (1.0 / ell - 1.0 / M) - eta_t ** 2 / ell + xi_t
    # the closed form cancels large terms; allow round-off proportional to them
    slack = 1e-6 * max(1.0, xi_t * 1e-6)
    if sigma_t_sq < -slack:
        raise ArithmeticError(f"gain variance {sigma_t_sq} is negative beyond round-off")
    return ChannelGainMoments(u=u, eta_t=eta_t, sigma_t_sq=max(sigma_t_sq, 0.0), xi_t=xi_t)


def channel_gain_moments(cfg):
    return gain_moments_at(cfg.M, float(cfg.L), cfg.N_r)


def distribution_at(M, ell, N_r, N_e, rho_m, rho_e):
    """Gaussian surrogate at a real number ``ell`` of active antennas.

    Integer ``ell`` reproduces :func:`secrecy_distribution`; real values give
    the smooth envelope used by the optimizer and the prevalence test.
    """
    mom = gain_moments_at(M, ell, N_r)
    eta_t = mom.eta_t
    U_m, V_m = min(ell, N_r), max(ell, N_r)
    U_e, V_e = min(ell, N_e), max(ell, N_e)
    K_t = U_m + rho_m * eta_t
    C_t = rho_m * eta_t * U_m * (U_m - 1) / V_m

    main_mean = U_m * math.log2(K_t / U_m) - C_t * PSI * rho_m * eta_t / (2.0 * K_t ** 2)
    main_variance = ((1.0 - C_t / K_t ** 2) * U_m * rho_m * math.sqrt(mom.sigma_t_sq) / K_t) ** 2

    if rho_e == 0:
        # R_e is identically zero; the N_e > L variance term would not vanish
        eaves_mean = 0.0
        eaves_variance = 0.0
    else:
        eaves_mean = U_e * math.log2(1.0 + rho_e * V_e)
        eaves_variance = 0.0
        if N_e > ell:
            eaves_variance = U_e / V_e
        elif N_e < ell:
            eaves_variance = U_e * V_e * rho_e ** 2 / (1.0 + rho_e * V_e) ** 2

    eta = main_mean - eaves_mean
    sigma = PSI * math.sqrt(main_variance + eaves_variance)
    terms = DistributionTerms(U_m, V_m, U_e, V_e, K_t, C_t,
                              main_mean, eaves_mean, main_variance, eaves_variance)
    return SecrecyRateDistribution(eta=eta, sigma=sigma, moments=mom, terms=terms)


def secrecy_distribution(cfg):
    return distribution_at(cfg.M, float(cfg.L), cfg.N_r, cfg.N_e, cfg.rho_m, cfg.rho_e)


def ergodic_secrecy_rate(dist):
    """Mean of ``[R*]^+``: ``sigma*phi(xi) + eta*Q(-xi)``."""
    if dist.degenerate:
        return max(dist.eta, 0.0)
    xi = dist.eta / dist.sigma
    return max(dist.sigma * gaussian_pdf(xi) + dist.eta * gaussian_q(-xi), 0.0)


def outage_probability(dist, R_o):
    """``Pr{R* <= R_o}`` for a target secrecy rate ``R_o >= 0``."""
    if not R_o >= 0:
        raise DomainError(f"target rate must be non-negative, got {R_o}")
    if dist.degenerate:
        return 1.0 if dist.eta <= R_o else 0.0
    # 1 - Q(z) == Q(-z), without cancellation in the lower tail
    return gaussian_q((dist.eta - R_o) / dist.sigma)


def epsilon_outage_rate(dist, eps):
    """Largest rate whose outage probability does not exceed ``eps``."""
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    # sigma * Q^-1(1 - eps) + eta, written via Q^-1(eps) to keep small eps exact
    return dist.eta - dist.sigma * gaussian_q_inv(eps)


def prob_nonzero_secrecy(dist):
    if dist.degenerate:
        return 1.0 if dist.eta > 0 else 0.0
    return gaussian_q(-dist.eta / dist.sigma)


METRICS = ("ergodic", "outage", "eps_outage", "nzs")


def evaluate_metric(dist, kind, R_o=None, eps=None):
    """Dispatch on a metric name used by the optimizer and the CLI."""
    if kind == "ergodic":
        return ergodic_secrecy_rate(dist)
    if kind == "outage":
        if R_o is None:
            raise DomainError("outage metric needs R_o")
        return outage_probability(dist, R_o)
    if kind == "eps_outage":
        if eps is None:
            raise DomainError("eps_outage metric needs eps")
        return epsilon_outage_rate(dist, eps)
    if kind == "nzs":
        return prob_nonzero_secrecy(dist)
    raise DomainError(f"unknown metric {kind!r}; expected one of {METRICS}")
