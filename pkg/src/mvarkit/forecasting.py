"""Conditional predictive distributions: analytic mixtures at horizons 1-2, Monte Carlo beyond.

One step ahead the predictive law is a g-component Gaussian mixture whose
component means shift with the recent history. Two steps ahead it is a
g^2-component mixture indexed by the component pair (k, l) drawn at t+2 and
t+1; the pair's covariance picks up the first-lag propagation of the
intermediate innovation. Larger horizons multiply the component count by g
per step, so they are handled by simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import DimensionError, NotPositiveDefiniteError
from .model import ForecastOrigin, MvarParameters
from .simulation import simulate_forward

MOMENT_PSD_TOL = 1e-10


@dataclass(frozen=True)
class MixtureNormalMV:
    """Weighted multivariate Gaussian mixture: the predictive law of Y_{t+h}."""

    weights: np.ndarray   # (c,)
    means: np.ndarray     # (c, m)
    covs: np.ndarray      # (c, m, m)
    horizon: int
    origin_time: int

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        means = np.array(self.means, dtype=float)
        covs = np.array(self.covs, dtype=float)
        c = weights.shape[0]
        if means.shape[0] != c or covs.shape[0] != c:
            raise DimensionError(
                f"component count mismatch: {c} weights, {means.shape[0]} means, "
                f"{covs.shape[0]} covariances"
            )
        if np.any(weights <= 0.0):
            raise ValueError("mixture weights must be strictly positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1 within 1e-12, got {weights.sum()!r}")
        for j in range(c):
            try:
                scipy.linalg.cholesky(covs[j], lower=True)
            except scipy.linalg.LinAlgError as exc:
                raise NotPositiveDefiniteError(
                    f"mixture component {j} covariance is not positive definite"
                ) from exc
        for a in (weights, means, covs):
            a.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class MomentPair:
    """Mean vector and covariance matrix of a predictive distribution."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        scale = max(1.0, float(np.max(np.abs(cov))) if cov.size else 1.0)
        if np.max(np.abs(cov - cov.T)) > MOMENT_PSD_TOL * scale:
            raise NotPositiveDefiniteError("moment covariance is not symmetric within 1e-10")
        if float(np.min(scipy.linalg.eigvalsh(cov))) < -MOMENT_PSD_TOL * scale:
            raise NotPositiveDefiniteError("moment covariance is not positive semidefinite")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def _theta_lag(params: MvarParameters, k: int, i: int) -> np.ndarray:
    """AR matrix of component k at lag i, a zero block beyond the stored depth."""
    if 1 <= i <= params.spec.p:
        return params.theta[k, i - 1]
    return np.zeros((params.spec.m, params.spec.m))


def predictive_one_step(params: MvarParameters, origin: ForecastOrigin) -> MixtureNormalMV:
    """One-step predictive mixture: g components with the model's own weights.

    Component k has mean ``theta0[k] + sum_i theta[k,i-1] @ Y_{t+1-i}`` and
    covariance ``omega[k]``.
    """
    origin.check_dimensions(params.spec)
    g, m, p = params.spec.g, params.spec.m, params.spec.p
    hist = origin.history
    means = np.empty((g, m))
    for k in range(g):
        mean = params.theta0[k].copy()
        for i in range(1, params.spec.orders[k] + 1):
            mean += params.theta[k, i - 1] @ hist[p - i]
        means[k] = mean
    return MixtureNormalMV(
        weights=params.pi, means=means, covs=params.omega,
        horizon=1, origin_time=origin.t,
    )


def predictive_two_step(params: MvarParameters, origin: ForecastOrigin) -> MixtureNormalMV:
    """Two-step predictive mixture: g^2 components indexed by the pair (k, l).

    The pair (k, l) means component k generates Y_{t+2} and component l
    generates Y_{t+1}. Its weight is ``pi[k]*pi[l]``, its covariance
    ``omega[k] + theta[k,0] @ omega[l] @ theta[k,0].T``, and its mean

        theta0[k] + theta[k,0] @ theta0[l]
        + sum_{i=1..p-1} (theta[k,i] + theta[k,0] @ theta[l,i-1]) @ Y_{t+1-i}
        + theta[k,0] @ theta[l,p-1] @ Y_{t+1-p}.

    The ordering matters: in general the (k, l) and (l, k) components differ.
    """
    origin.check_dimensions(params.spec)
    spec = params.spec
    g, m, p = spec.g, spec.m, spec.p
    hist = origin.history
    weights = np.empty(g * g)
    means = np.empty((g * g, m))
    covs = np.empty((g * g, m, m))
    for k in range(g):
        th_k1 = _theta_lag(params, k, 1)
        for l in range(g):
            j = k * g + l
            weights[j] = params.pi[k] * params.pi[l]
            covs[j] = params.omega[k] + th_k1 @ params.omega[l] @ th_k1.T
            mean = params.theta0[k] + th_k1 @ params.theta0[l]
            for i in range(1, p):
                block = _theta_lag(params, k, i + 1) + th_k1 @ _theta_lag(params, l, i)
                mean = mean + block @ hist[p - i]
            if p >= 1:
                mean = mean + th_k1 @ _theta_lag(params, l, p) @ hist[0]
            means[j] = mean
    return MixtureNormalMV(weights=weights, means=means, covs=covs,
                           horizon=2, origin_time=origin.t)


def mixture_moments(mix: MixtureNormalMV) -> MomentPair:
    """Overall mean and covariance of a Gaussian mixture.

    cov = sum_j w_j (cov_j + mu_j mu_j') - mu mu', symmetrized.
    """
    w = mix.weights
    mean = w @ mix.means
    cov = np.einsum("j,jab->ab", w, mix.covs)
    cov += np.einsum("j,ja,jb->ab", w, mix.means, mix.means)
    cov -= np.outer(mean, mean)
    cov = 0.5 * (cov + cov.T)
    return MomentPair(mean=mean, cov=cov)


def predictive_h_step_mc(
    params: MvarParameters,
    origin: ForecastOrigin,
    horizon: int,
    n_paths: int,
    seed: int = 0,
) -> tuple[np.ndarray, MomentPair]:
    """Monte Carlo predictive sample at any horizon: endpoint draws and their moments.

    Simulates ``n_paths`` trajectories of length ``horizon`` from the origin
    (no burn-in) and returns the horizon-``h`` endpoints, shape (n_paths, m),
    with their empirical mean and covariance. Deterministic given the seed.
    """
    origin.check_dimensions(params.spec)
    rng = np.random.default_rng(seed)
    paths = simulate_forward(params, origin.history, horizon, n_paths, rng)
    endpoints = paths[:, -1, :]
    mean = endpoints.mean(axis=0)
    if n_paths > 1:
        cov = np.cov(endpoints.T, ddof=1).reshape(params.spec.m, params.spec.m)
    else:
        cov = np.zeros((params.spec.m, params.spec.m))
    return endpoints, MomentPair(mean=mean, cov=cov)
