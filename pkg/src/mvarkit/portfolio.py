"""Portfolio construction from predictive mixtures.

A linear combination of a multivariate Gaussian mixture is a univariate
Gaussian mixture with the same weights, so portfolio-return distributions are
exact projections of the predictive law. Minimum-variance and efficient
weights come from the classical two-fund frontier applied to the conditional
moments, with short selling allowed. All covariance inverses are applied via
Cholesky solves; explicit matrix inverses appear only in test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import DegenerateFrontierError, DimensionError, NotPositiveDefiniteError
from .forecasting import (
    MixtureNormalMV,
    mixture_moments,
    predictive_one_step,
    predictive_two_step,
)
from .model import ForecastOrigin, MvarParameters

DEGENERATE_FRONTIER_TOL = 1e-12
BUDGET_TOL = 1e-10


@dataclass(frozen=True)
class MixtureNormal1D:
    """Weighted univariate Gaussian mixture: the predictive law of a portfolio return."""

    weights: np.ndarray
    means: np.ndarray
    sds: np.ndarray
    horizon: int
    origin_time: int

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        means = np.array(self.means, dtype=float)
        sds = np.array(self.sds, dtype=float)
        if not (weights.shape == means.shape == sds.shape) or weights.ndim != 1:
            raise DimensionError("weights, means and sds must be equal-length vectors")
        if np.any(weights <= 0.0):
            raise ValueError("mixture weights must be strictly positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1 within 1e-12, got {weights.sum()!r}")
        if np.any(sds <= 0.0):
            raise ValueError("component standard deviations must be strictly positive")
        for a in (weights, means, sds):
            a.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class MarkowitzCoefficients:
    """Frontier scalars from the conditional moments (mu, Omega):

    a = 1' Omega^-1 mu,  b = mu' Omega^-1 mu,  c = 1' Omega^-1 1,  d = c*b - a^2.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.c <= 0.0:
            raise NotPositiveDefiniteError("c = 1'Omega^-1 1 must be positive for SPD Omega")


@dataclass(frozen=True)
class PortfolioSolution:
    """Budget-constrained weights plus their conditional return and risk."""

    weights: np.ndarray
    expected_return: float
    sd: float
    kind: str        # "mvp" or "efficient"
    horizon: int

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        if abs(weights.sum() - 1.0) > BUDGET_TOL:
            raise ValueError(f"portfolio weights must sum to 1 within {BUDGET_TOL}")
        if self.kind not in ("mvp", "efficient"):
            raise ValueError(f"kind must be 'mvp' or 'efficient', got {self.kind!r}")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)


def project(mix: MixtureNormalMV, w) -> MixtureNormal1D:
    """Return distribution of the portfolio w applied to a multivariate mixture.

    Component j keeps its weight and maps to mean ``w @ mu_j`` and standard
    deviation ``sqrt(w @ cov_j @ w)``.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (mix.m,):
        raise DimensionError(f"weight vector must have length {mix.m}, got shape {w.shape}")
    means = mix.means @ w
    variances = np.einsum("a,jab,b->j", w, mix.covs, w)
    if np.any(variances <= 0.0):
        raise NotPositiveDefiniteError(
            "projected component variance <= 0: a component covariance is not positive definite"
        )
    return MixtureNormal1D(
        weights=mix.weights, means=means, sds=np.sqrt(variances),
        horizon=mix.horizon, origin_time=mix.origin_time,
    )


def scalar_mixture_moments(mix: MixtureNormal1D) -> tuple[float, float]:
    """Mean and variance of a univariate mixture:
    mean = sum w mu, var = sum w sd^2 + sum w mu^2 - mean^2."""
    w = mix.weights
    mean = float(w @ mix.means)
    var = float(w @ (mix.sds ** 2) + w @ (mix.means ** 2) - mean ** 2)
    return mean, var


def _spd_solve(cov: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        factor = scipy.linalg.cho_factor(cov, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"covariance is not positive definite: {exc}") from exc
    return scipy.linalg.cho_solve(factor, rhs)


def markowitz_coefficients(mean, cov) -> MarkowitzCoefficients:
    """Frontier scalars for conditional moments, via Cholesky solves."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    m = mean.shape[0]
    if cov.shape != (m, m):
        raise DimensionError(f"cov must be ({m},{m}), got {cov.shape}")
    ones = np.ones(m)
    sol = _spd_solve(cov, np.column_stack([ones, mean]))
    x, y = sol[:, 0], sol[:, 1]          # Omega^-1 1, Omega^-1 mu
    a = float(ones @ y)
    b = float(mean @ y)
    c = float(ones @ x)
    return MarkowitzCoefficients(a=a, b=b, c=c, d=c * b - a * a)


def mvp_weights(mean, cov, horizon: int = 1) -> PortfolioSolution:
    """Minimum variance portfolio: w = Omega^-1 1 / c, return a/c, sd sqrt(1/c)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    coeffs = markowitz_coefficients(mean, cov)
    x = _spd_solve(cov, np.ones(mean.shape[0]))
    w = x / coeffs.c
    return PortfolioSolution(
        weights=w,
        expected_return=float(w @ mean),
        sd=float(np.sqrt(w @ cov @ w)),
        kind="mvp",
        horizon=horizon,
    )


def efficient_weights(mean, cov, target: float, horizon: int = 1) -> PortfolioSolution:
    """Efficient portfolio for a target expected return (short selling allowed).

    w = (1/d) [b Omega^-1 1 - a Omega^-1 mu + target (c Omega^-1 mu - a Omega^-1 1)]

    Raises :class:`DegenerateFrontierError` when d <= 1e-12, i.e. the mean
    vector is proportional to ones and the target cannot pin down a portfolio.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    coeffs = markowitz_coefficients(mean, cov)
    if coeffs.d <= DEGENERATE_FRONTIER_TOL:
        raise DegenerateFrontierError(
            f"degenerate frontier: mean vector proportional to ones (d={coeffs.d:.3e})"
        )
    ones = np.ones(mean.shape[0])
    sol = _spd_solve(cov, np.column_stack([ones, mean]))
    x, y = sol[:, 0], sol[:, 1]
    w = (coeffs.b * x - coeffs.a * y + target * (coeffs.c * y - coeffs.a * x)) / coeffs.d
    return PortfolioSolution(
        weights=w,
        expected_return=float(w @ mean),
        sd=float(np.sqrt(w @ cov @ w)),
        kind="efficient",
        horizon=horizon,
    )


def variance_identity_check(
    params: MvarParameters, origin: ForecastOrigin, w
) -> tuple[float, float, float]:
    """Both routes to the one-step portfolio variance and their gap.

    lhs: quadratic form of w in the one-step conditional covariance.
    rhs: variance of the projected one-step return mixture.
    The two are algebraically identical; the gap is rounding only.
    """
    w = np.asarray(w, dtype=float)
    mix = predictive_one_step(params, origin)
    cond = mixture_moments(mix)
    lhs = float(w @ cond.cov @ w)
    _, rhs = scalar_mixture_moments(project(mix, w))
    return lhs, rhs, abs(lhs - rhs)


def two_step_portfolio(
    params: MvarParameters,
    origin: ForecastOrigin,
    target: float | None = None,
) -> tuple[PortfolioSolution, MixtureNormal1D]:
    """Markowitz solution against the two-step conditional moments.

    Computes (mu_{t+2}, Omega_{t+2}) from the g^2-component predictive
    mixture, solves the minimum-variance portfolio (``target=None``) or the
    efficient portfolio for ``target``, and projects the mixture onto the
    solved weights to get the return distribution at horizon 2.
    """
    mix = predictive_two_step(params, origin)
    mom = mixture_moments(mix)
    if target is None:
        sol = mvp_weights(mom.mean, mom.cov, horizon=2)
    else:
        sol = efficient_weights(mom.mean, mom.cov, target, horizon=2)
    return sol, project(mix, sol.weights)
