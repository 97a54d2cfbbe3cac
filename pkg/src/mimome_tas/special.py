"""Scalar special functions and a bracketed root finder.

Everything here works on plain Python floats; these functions sit on the
slow path (fixed-point solves, closed-form metrics), not inside the Monte
Carlo kernels.
"""
from dataclasses import dataclass
import math

from .errors import BracketError, ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Acklam's rational approximation of the normal quantile (|rel err| < 1.2e-9),
# polished below with Halley steps.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


@dataclass(frozen=True)
class RootSolverSettings:
    abs_tolerance: float = 1e-12
    max_iterations: int = 200

    def __post_init__(self):
        if not self.abs_tolerance > 0:
            raise DomainError(f"abs_tolerance must be positive, got {self.abs_tolerance}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")


DEFAULT_SETTINGS = RootSolverSettings()


def _check_order(n):
    if int(n) != n or n < 1:
        raise DomainError(f"order must be a positive integer, got {n!r}")
    return int(n)


def chi_square_pdf(x, n):
    """Density ``x**(n-1) * exp(-x) / (n-1)!`` on ``x >= 0``, zero elsewhere.

    This is the chi-square law with ``2n`` degrees of freedom scaled to mean
    ``n``, i.e. the squared norm of an ``n``-vector of unit-variance complex
    Gaussians. Evaluated in log space so large ``n`` does not overflow.
    """
    n = _check_order(n)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    if x < 0.0:
        return 0.0
    if x == 0.0:
        return 1.0 if n == 1 else 0.0
    return math.exp((n - 1) * math.log(x) - x - math.lgamma(n))


def _lower_series(n, u):
    # P(n, u) by the power series; converges fast for u < n + 1
    log_pref = n * math.log(u) - u - math.lgamma(n + 1)
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= u / (n + k)
        total += term
        if term < total * 1e-17 or k > 10_000:
            break
    return math.exp(log_pref + math.log(total))


def _upper_continued_fraction(n, u):
    # Q(n, u) by the modified Lentz continued fraction; for u >= n + 1
    tiny = 1e-300
    b = u + 1.0 - n
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - n)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(n * math.log(u) - u - math.lgamma(n) + math.log(h))


def chi_square_upper_tail(u, n):
    """Tail mass ``int_u^inf chi_square_pdf(x, n) dx``.

    Regularized upper incomplete gamma function of integer order ``n``.
    """
    n = _check_order(n)
    u = float(u)
    if not u >= 0.0:
        raise DomainError(f"tail threshold must be non-negative, got {u}")
    if u == 0.0:
        return 1.0
    if math.isinf(u):
        return 0.0
    if u < n + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_series(n, u)))
    return min(1.0, max(0.0, _upper_continued_fraction(n, u)))


def gaussian_pdf(x):
    return math.exp(-0.5 * x * x - LOG_SQRT_2PI)


def gaussian_q(x):
    """Standard normal tail probability ``Pr{Z > x}``."""
    return 0.5 * math.erfc(x / SQRT2)


def _normal_quantile_guess(p):
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    q = p - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def gaussian_q_inv(p):
    """Inverse of :func:`gaussian_q` on ``(0, 1)``."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # 1 - p is exact here, and the lower tail keeps full relative precision
        return -gaussian_q_inv(1.0 - p)
    x = -_normal_quantile_guess(p)
    for _ in range(3):
        pdf = gaussian_pdf(x)
        if pdf == 0.0:
            break
        step = -(gaussian_q(x) - p) / pdf
        x -= step / (1.0 + 0.5 * x * step)
    return x


def find_root_bracketed(fn, lo, hi, settings=DEFAULT_SETTINGS):
    """Root of ``fn`` inside ``[lo, hi]``.

    Bisection safeguarded by a secant (false-position) step that is only
    accepted when it lands strictly inside the current bracket. A bisection
    step is forced whenever the previous step failed to halve the bracket, so
    convergence is never slower than about twice plain bisection.

    Raises
    ------
    BracketError
        ``fn(lo)`` and ``fn(hi)`` share a sign.
    ConvergenceError
        Neither the residual nor the bracket width reached the tolerance.
    """
    tol = settings.abs_tolerance
    a, b = float(lo), float(hi)
    if a > b:
        a, b = b, a
    fa, fb = fn(a), fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.isnan(fa) or math.isnan(fb) or (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a}, {b}]: f={fa}, {fb}")

    width = b - a
    for _ in range(settings.max_iterations):
        x = None
        if fb != fa:
            s = b - fb * (b - a) / (fb - fa)
            if a < s < b:
                x = s
        previous_width = width
        if x is None:
            x = 0.5 * (a + b)
        fx = fn(x)
        if abs(fx) <= tol:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
        width = b - a
        if width > 0.5 * previous_width:
            m = 0.5 * (a + b)
            fm = fn(m)
            if abs(fm) <= tol:
                return m
            if (fm > 0) == (fa > 0):
                a, fa = m, fm
            else:
                b, fb = m, fm
            width = b - a
        if width < tol:
            return a if abs(fa) < abs(fb) else b
    raise ConvergenceError(
        f"root not found in {settings.max_iterations} iterations; bracket [{a}, {b}]")
