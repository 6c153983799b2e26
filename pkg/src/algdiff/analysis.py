"""Closed-form error calculus for the derivative estimators.

Covers the deterministic side (delay and bias bounds from the Taylor
remainder) and the stochastic side (noise-error means, variances, Chebyshev
bands) in both the continuous-integral and sampled regimes, plus the
parameter-sweep surfaces used to choose exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .kernel import DiscreteKernel
from .specfun import JacobiIndex, _jacobi_coeffs, _moment_rational_sum, beta_fn, smallest_root
from .stochastic import NoiseModel

__all__ = [
    "BiasBounds",
    "NoiseMomentReport",
    "theoretical_delay",
    "affine_delay",
    "bias_bounds",
    "i_integral",
    "variance_minimal",
    "variance_affine_n1",
    "poisson_mean",
    "discrete_moments",
    "discrete_covariance",
    "chebyshev_band",
    "sweep_surface",
]


def _check_exponents(kappa: float, mu: float) -> None:
    if not kappa > -1:
        raise ValueError(f"kappa must exceed -1, got {kappa!r}")
    if not mu > -1:
        raise ValueError(f"mu must exceed -1, got {mu!r}")


def _check_order(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")


def theoretical_delay(n: int, kappa: float, mu: float, T: float) -> float:
    """Delay of the single-term causal estimator: T*(kappa+n+1)/(mu+kappa+2n+2)."""
    _check_order(n)
    _check_exponents(kappa, mu)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    return T * (kappa + n + 1) / (mu + kappa + 2 * n + 2)


def affine_delay(n: int, kappa: float, mu: float, T: float, xi: float) -> float:
    """Delay of the series estimator evaluated at abscissa xi: simply T*xi."""
    _check_order(n)
    _check_exponents(kappa, mu)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi!r}")
    return T * xi


@dataclass(frozen=True)
class BiasBounds:
    """Range of the truncation bias, units of the estimated derivative."""

    lower: float
    upper: float
    c_factor: float  # signed delay coefficient, seconds


def bias_bounds(
    n: int, kappa: float, mu: float, T: float, beta: int, inf_d: float, sup_d: float
) -> BiasBounds:
    """Bias range when the (n+1)-th derivative stays within [inf_d, sup_d].

    The bias is the signed delay coefficient C = beta*T*(kappa+n+1)/(mu+kappa+2n+2)
    times a value in the derivative's range, so the bounds are C*inf_d and
    C*sup_d, ordered ascending (beta = -1 flips the interval).
    """
    if beta not in (-1, 1):
        raise ValueError(f"beta must be -1 or +1, got {beta!r}")
    if inf_d > sup_d:
        raise ValueError("inf_d must not exceed sup_d")
    c = beta * theoretical_delay(n, kappa, mu, T)
    lo, hi = sorted((c * inf_d, c * sup_d))
    return BiasBounds(lo, hi, c)


def _i_integral_expansion(mu: float, kappa: float, n: int) -> float:
    # integral of (1-t)^(2mu+1) t^(2kappa+2) P_n^{mu,kappa} P_{n-1}^{mu+1,kappa+1};
    # exact polynomial product, then termwise Beta expansion with the rational
    # part carried exactly.
    mu_f, kappa_f = Fraction(mu), Fraction(kappa)
    p1 = _jacobi_coeffs(n, mu_f, kappa_f)
    p2 = _jacobi_coeffs(n - 1, mu_f + 1, kappa_f + 1)
    product = [Fraction(0)] * (2 * n)
    for i, a in enumerate(p1):
        for j, b in enumerate(p2):
            product[i + j] += a * b
    base_first = 2 * kappa_f + 3
    base_second = 2 * mu_f + 2
    rational = _moment_rational_sum(tuple(product), base_first, base_second)
    return float(rational) * beta_fn(float(base_first), float(base_second))


def _i_integral_closed(mu: float, kappa: float, n: int) -> float:
    if n == 1:
        return (mu + 1) * beta_fn(2 * mu + 2, 2 * kappa + 3) / (2 * mu + 2 * kappa + 5)
    if n == 2:
        k, m = kappa, mu
        total = (
            -((k + 2) ** 2) * (k + 1) * beta_fn(2 * m + 5, 2 * k + 3)
            + (k + 2) * (m + 2) * (3 * k + 5) * beta_fn(2 * m + 4, 2 * k + 4)
            - (k + 2) * (m + 2) * (3 * m + 5) * beta_fn(2 * m + 3, 2 * k + 5)
            + (m + 2) ** 2 * (m + 1) * beta_fn(2 * m + 2, 2 * k + 6)
        )
        return 0.5 * total
    raise ValueError(f"no closed form for n = {n}; use the expansion route")


def i_integral(mu: float, kappa: float, n: int, method: str = "auto") -> float:
    """Variance kernel integral: weight (1-t)^(2mu+1) t^(2kappa+2) against the
    product of the order-n and raised order-(n-1) polynomials.

    ``method`` selects the closed form (n <= 2), the exact termwise Beta
    expansion (any n), or "auto" (closed where available).
    """
    _check_order(n)
    _check_exponents(kappa, mu)
    if method == "auto":
        method = "closed" if n <= 2 else "expansion"
    if method == "closed":
        return _i_integral_closed(mu, kappa, n)
    if method == "expansion":
        return _i_integral_expansion(mu, kappa, n)
    raise ValueError(f"unknown method {method!r}")


def variance_minimal(n: int, kappa: float, mu: float, T: float, eta: float) -> float:
    """Noise-error variance of the single-term estimator.

    ``eta`` is the process intensity: sigma^2 for a Wiener process, nu for a
    Poisson process.  Scales as 1/T^(2n-1).
    """
    _check_order(n)
    _check_exponents(kappa, mu)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta!r}")
    norm = beta_fn(kappa + n + 1, mu + n + 1)
    scale = 2.0 * eta * math.factorial(n) * math.factorial(n - 1) / (T ** (2 * n - 1) * norm**2)
    return scale * i_integral(mu, kappa, n)


def variance_affine_n1(kappa: float, mu: float, xi: float, T: float, eta: float) -> float:
    """Noise-error variance of the two-term first-derivative estimator at xi.

    Expands the kernel as lambda1 * (mu+1-kernel) + lambda0 * (kappa+1-kernel)
    with lambda1 = (kappa+3) - (mu+kappa+5)*xi and lambda0 = 1 - lambda1; the
    three quadratic-form terms each reduce to Beta-function ratios.
    """
    _check_exponents(kappa, mu)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta!r}")
    lam1 = (kappa + 3) - (mu + kappa + 5) * xi
    lam0 = 1.0 - lam1
    common = 2.0 * eta / T
    term1 = (
        lam1**2
        * common
        * (mu + 2)
        / (2 * mu + 2 * kappa + 7)
        * beta_fn(2 * mu + 4, 2 * kappa + 3)
        / beta_fn(kappa + 2, mu + 3) ** 2
    )
    term0 = (
        lam0**2
        * common
        * (mu + 1)
        / (2 * mu + 2 * kappa + 7)
        * beta_fn(2 * mu + 2, 2 * kappa + 5)
        / beta_fn(kappa + 3, mu + 2) ** 2
    )
    cross = (
        lam0
        * lam1
        * common
        * beta_fn(2 * mu + 4, 2 * kappa + 4)
        / (beta_fn(kappa + 2, mu + 3) * beta_fn(kappa + 3, mu + 2))
    )
    return term1 + term0 + cross


def poisson_mean(n: int, nu: float) -> float:
    """Mean noise error under a rate-nu counting process: nu for n=1, else 0."""
    _check_order(n)
    if nu < 0:
        raise ValueError(f"nu must be nonnegative, got {nu!r}")
    return float(nu) if n == 1 else 0.0


@dataclass(frozen=True)
class NoiseMomentReport:
    """First two moments of the noise error plus its Chebyshev band."""

    mean: float
    variance: float
    cheb_low: float
    cheb_high: float
    gamma: float
    regime: str  # "continuous" | "discrete"


def _tap_times(k: DiscreteKernel, t0: float) -> np.ndarray:
    cfg = k.config
    return t0 + cfg.beta * cfg.T * np.arange(cfg.m + 1) / cfg.m


def _check_process_times(noise: NoiseModel, times: np.ndarray) -> None:
    if noise.needs_nonneg_time and float(np.min(times)) < -1e-12:
        raise ValueError(
            "window reaches negative times but the noise process starts at t = 0; "
            "use t0 >= T for causal windows"
        )


def discrete_moments(
    k: DiscreteKernel, noise: NoiseModel, t0: float, gamma: float = 2.0
) -> NoiseMomentReport:
    """Exact sampled-case mean and variance of the noise error at ``t0``.

    The mean is the tap sum against the model's mean function; the variance is
    the tap quadratic form against its covariance (for white noise, the
    diagonal sum sigma^2 * sum taps_i^2).
    """
    times = _tap_times(k, t0)
    _check_process_times(noise, times)
    taps = k.taps
    mean = float(np.dot(taps, noise.mean_at(times)))
    white = noise.white_part()
    if white is not None:
        variance = white * float(np.dot(taps, taps))
    else:
        variance = float(taps @ noise.cov_matrix(times, times) @ taps)
    variance = max(variance, 0.0)
    low, high = chebyshev_band(mean, variance, gamma)
    return NoiseMomentReport(mean, variance, low, high, gamma, "discrete")


def discrete_covariance(
    k1: DiscreteKernel, k2: DiscreteKernel, noise: NoiseModel, t0: float | tuple[float, float]
) -> float:
    """Covariance of the two kernels' noise errors.

    Both kernels must share the window direction and the per-tap step; ``t0``
    may be a single anchor or one per kernel.
    """
    cfg1, cfg2 = k1.config, k2.config
    if cfg1.beta != cfg2.beta:
        raise ValueError("misaligned kernels: window directions differ")
    step1, step2 = cfg1.T / cfg1.m, cfg2.T / cfg2.m
    if abs(step1 - step2) > 1e-9 * max(step1, step2):
        raise ValueError("misaligned kernels: per-tap steps differ")
    t01, t02 = t0 if isinstance(t0, tuple) else (t0, t0)
    times1 = _tap_times(k1, t01)
    times2 = _tap_times(k2, t02)
    _check_process_times(noise, times1)
    _check_process_times(noise, times2)
    white = noise.white_part()
    if white is not None:
        # only coincident sample times contribute
        shift = (t02 - t01) / (cfg1.beta * step1)
        r = round(shift)
        if abs(shift - r) > 1e-9:
            return 0.0
        total = 0.0
        for i in range(cfg1.m + 1):
            j = i - r
            if 0 <= j <= cfg2.m:
                total += k1.taps[i] * k2.taps[j]
        return white * total
    cross = noise.cov_matrix(times1, times2)
    return float(k1.taps @ cross @ k2.taps)


def chebyshev_band(mean: float, variance: float, gamma: float) -> tuple[float, float]:
    """Band mean -/+ gamma*sqrt(variance); coverage exceeds 1 - 1/gamma^2."""
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance!r}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    half = gamma * math.sqrt(variance)
    return mean - half, mean + half


def sweep_surface(
    quantity: str,
    kappa_grid,
    mu_grid,
    *,
    n: int = 1,
    q: int = 1,
    T: float = 1.0,
    eta: float = 1.0,
) -> np.ndarray:
    """Grid of a design quantity over exponent pairs; rows follow kappa_grid.

    quantity: "delay" (single-term delay factor times T), "xi" (smallest root
    of the degree-(q+1) raised-exponent polynomial), "variance_minimal", or
    "variance_affine" (n = 1, q = 1 only; xi recomputed per cell).
    """
    kappa_grid = np.asarray(kappa_grid, dtype=float)
    mu_grid = np.asarray(mu_grid, dtype=float)
    out = np.empty((len(kappa_grid), len(mu_grid)))
    if quantity == "variance_affine" and (n != 1 or q != 1):
        raise ValueError("variance_affine surface requires n = 1, q = 1")
    for i, kappa in enumerate(kappa_grid):
        for j, mu in enumerate(mu_grid):
            if quantity == "delay":
                out[i, j] = theoretical_delay(n, kappa, mu, T)
            elif quantity == "xi":
                out[i, j] = smallest_root(JacobiIndex(q + 1, mu + n, kappa + n))
            elif quantity == "variance_minimal":
                out[i, j] = variance_minimal(n, kappa, mu, T, eta)
            elif quantity == "variance_affine":
                xi = smallest_root(JacobiIndex(2, mu + 1, kappa + 1))
                out[i, j] = variance_affine_n1(kappa, mu, xi, T, eta)
            else:
                raise ValueError(f"unknown quantity {quantity!r}")
    return out
