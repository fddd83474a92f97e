"""EM estimation: responsibilities, weighted least squares updates, multi-start fitting.

The E-step computes posterior component probabilities in log space; the
M-step solves one weighted least-squares problem per component and re-weights
the innovation covariances. Starts are initialized by drawing responsibility
rows from a symmetric Dirichlet(1) and running one M-step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from .exceptions import (
    ComponentCollapseError,
    DensityUnderflowError,
    DimensionError,
    MvarError,
    SingularComponentError,
)
from .model import (
    ModelSpec,
    MvarParameters,
    SeriesMatrix,
    component_log_densities,
)

ROW_SUM_TOL = 1e-10
COLLAPSE_EIGENVALUE = 1e-12


@dataclass(frozen=True)
class Responsibilities:
    """Posterior component probabilities tau[t-p, k] for the scored times t=p..n-1."""

    tau: np.ndarray   # (n-p, g)

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float)
        if tau.ndim != 2:
            raise DimensionError(f"tau must be 2-d, got shape {tau.shape}")
        if np.any(tau < 0.0):
            raise ValueError("responsibilities must be nonnegative")
        if np.max(np.abs(tau.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError(f"responsibility rows must sum to 1 within {ROW_SUM_TOL}")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)


def regressor_matrix(series: SeriesMatrix, order: int, max_order: int) -> np.ndarray:
    """Stacked regressors (1, Y_{t-1}', ..., Y_{t-order}') for t = max_order..n-1.

    Rows align with the scored observations of a model with maximal lag
    ``max_order``, so components of different orders share row indexing.
    """
    if order > max_order:
        raise DimensionError(f"order {order} exceeds max_order {max_order}")
    y = series.values
    n, m = y.shape
    rows = n - max_order
    x = np.empty((rows, 1 + m * order))
    x[:, 0] = 1.0
    for i in range(1, order + 1):
        x[:, 1 + m * (i - 1): 1 + m * i] = y[max_order - i: n - i]
    return x


def _log_joint(params: MvarParameters, series: SeriesMatrix) -> np.ndarray:
    return component_log_densities(params, series) + np.log(params.pi)[None, :]


def _responsibilities_from_log_joint(log_joint: np.ndarray, p: int) -> Responsibilities:
    row_max = np.max(log_joint, axis=1)
    bad = ~np.isfinite(row_max)
    if np.any(bad):
        raise DensityUnderflowError(int(np.flatnonzero(bad)[0]) + p)
    shifted = np.exp(log_joint - row_max[:, None])
    tau = shifted / shifted.sum(axis=1, keepdims=True)
    return Responsibilities(tau=tau)


def e_step(params: MvarParameters, series: SeriesMatrix) -> Responsibilities:
    """Posterior component probabilities, computed with log-sum-exp for underflow safety."""
    return _responsibilities_from_log_joint(_log_joint(params, series), params.spec.p)


def m_step(series: SeriesMatrix, tau: Responsibilities, spec: ModelSpec) -> MvarParameters:
    """Weighted-least-squares parameter update given responsibilities.

    Raises :class:`SingularComponentError` when a component's weighted normal
    equations are singular and :class:`ComponentCollapseError` when an updated
    covariance has an eigenvalue below 1e-12 (degenerate component).
    """
    if series.m != spec.m:
        raise DimensionError(
            f"series dimension {series.m} does not match spec dimension {spec.m}"
        )
    p = spec.p
    t_mat = tau.tau
    if t_mat.shape != (series.n - p, spec.g):
        raise DimensionError(
            f"tau has shape {t_mat.shape}, expected ({series.n - p},{spec.g})"
        )
    y_scored = series.values[p:]
    m = spec.m
    pi_hat = t_mat.mean(axis=0)
    theta0 = np.zeros((spec.g, m))
    theta = np.zeros((spec.g, p, m, m))
    omega = np.zeros((spec.g, m, m))
    for k in range(spec.g):
        order = spec.orders[k]
        x = regressor_matrix(series, order, p)
        w = t_mat[:, k]
        wx = x * w[:, None]
        gram = x.T @ wx
        rhs = wx.T @ y_scored
        try:
            coef = scipy.linalg.solve(gram, rhs, assume_a="pos")
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise SingularComponentError(k, str(exc)) from exc
        stacked = coef.T                              # (m, 1 + m*order)
        theta0[k] = stacked[:, 0]
        for i in range(1, order + 1):
            theta[k, i - 1] = stacked[:, 1 + m * (i - 1): 1 + m * i]
        resid = y_scored - x @ coef
        om = (resid * w[:, None]).T @ resid / w.sum()
        om = 0.5 * (om + om.T)
        min_eig = float(np.min(scipy.linalg.eigvalsh(om)))
        if min_eig < COLLAPSE_EIGENVALUE:
            raise ComponentCollapseError(k, min_eig)
        omega[k] = om
    # Re-normalize against accumulated rounding so the invariant checks pass.
    pi_hat = pi_hat / pi_hat.sum()
    return MvarParameters(spec=spec, pi=pi_hat, theta0=theta0, theta=theta, omega=omega)


@dataclass(frozen=True)
class InitStrategy:
    """Random multi-start initialization: Dirichlet(1) responsibility draws."""

    n_starts: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")


@dataclass
class FitReport:
    """Outcome of one EM fit (the best start when several were run)."""

    params: MvarParameters
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    responsibilities: Responsibilities
    aic: float
    bic: float

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])


def _canonical_permutation(pi: np.ndarray, theta0: np.ndarray) -> np.ndarray:
    """Order components by descending weight, ties broken lexicographically on theta0."""
    keys = tuple(theta0[:, j] for j in range(theta0.shape[1] - 1, -1, -1)) + (-pi,)
    return np.lexsort(keys)


def _canonicalize(params: MvarParameters, tau: np.ndarray) -> tuple[MvarParameters, np.ndarray]:
    order = _canonical_permutation(params.pi, params.theta0)
    if np.array_equal(order, np.arange(params.spec.g)):
        return params, tau
    return params.permuted(order), tau[:, order]


def _em_single_start(
    series: SeriesMatrix,
    spec: ModelSpec,
    rng: np.random.Generator,
    max_iter: int,
    tol: float,
) -> tuple[MvarParameters, np.ndarray, list[float], bool, int]:
    n_scored = series.n - spec.p
    tau0 = Responsibilities(rng.dirichlet(np.ones(spec.g), size=n_scored))
    params = m_step(series, tau0, spec)
    log_joint = _log_joint(params, series)
    trace = [float(logsumexp(log_joint, axis=1).sum())]
    converged = False
    iterations = 0
    for _ in range(max_iter):
        tau = _responsibilities_from_log_joint(log_joint, spec.p)
        params = m_step(series, tau, spec)
        log_joint = _log_joint(params, series)
        trace.append(float(logsumexp(log_joint, axis=1).sum()))
        iterations += 1
        if abs(trace[-1] - trace[-2]) < tol:
            converged = True
            break
    tau = _responsibilities_from_log_joint(log_joint, spec.p)
    return params, tau.tau, trace, converged, iterations


def em_fit(
    series: SeriesMatrix,
    spec: ModelSpec,
    init: InitStrategy | None = None,
    max_iter: int = 500,
    tol: float = 1e-8,
) -> FitReport:
    """Fit by EM with random multi-start, keeping the best final log-likelihood.

    The trace is non-decreasing (EM ascent); convergence means the absolute
    log-likelihood change fell below ``tol``. Non-convergence is reported via
    ``converged=False``, not an error. Starts whose components collapse are
    discarded; if every start collapses the last error is raised. Components
    of the returned fit are ordered by descending mixing weight (ties broken
    lexicographically on the intercepts) to fix label switching.
    """
    if init is None:
        init = InitStrategy()
    if series.n < spec.p + 1:
        raise ValueError(f"need at least p+1={spec.p + 1} observations, got {series.n}")
    n_starts = 1 if spec.g == 1 else init.n_starts
    streams = np.random.SeedSequence(init.seed).spawn(n_starts)
    best = None
    last_error: MvarError | None = None
    for ss in streams:
        rng = np.random.default_rng(ss)
        try:
            result = _em_single_start(series, spec, rng, max_iter, tol)
        except (ComponentCollapseError, SingularComponentError, DensityUnderflowError) as exc:
            last_error = exc
            continue
        if best is None or result[2][-1] > best[2][-1]:
            best = result
    if best is None:
        assert last_error is not None
        raise last_error
    params, tau, trace, converged, iterations = best
    params, tau = _canonicalize(params, tau)
    loglik = trace[-1]
    d = spec.n_free_parameters
    n_scored = series.n - spec.p
    return FitReport(
        params=params,
        loglik_trace=np.asarray(trace),
        iterations=iterations,
        converged=converged,
        responsibilities=Responsibilities(tau),
        aic=-2.0 * loglik + 2.0 * d,
        bic=-2.0 * loglik + d * math.log(n_scored),
    )


@dataclass
class CandidateResult:
    """One order-selection candidate: its spec, fit (if any), score, and failure note."""

    spec: ModelSpec
    report: FitReport | None
    score: float
    error: str | None = None


def select_order(
    series: SeriesMatrix,
    g_values,
    p_values,
    criterion: str = "bic",
    n_starts: int = 10,
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-8,
) -> list[CandidateResult]:
    """Fit every (g, p) candidate and rank ascending by AIC or BIC.

    Per-candidate failures are annotated (score = +inf), never abort the sweep.
    The per-candidate seed is derived from (seed, g, p), so listing the same
    candidate twice yields identical scores.
    """
    if criterion not in ("aic", "bic"):
        raise ValueError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    g_values = list(g_values)
    p_values = list(p_values)
    if not g_values or not p_values:
        raise ValueError("g_values and p_values must be nonempty")
    results: list[CandidateResult] = []
    for g in g_values:
        for p in p_values:
            spec = ModelSpec(g=g, m=series.m, orders=(p,) * g)
            cand_seed = int(np.random.SeedSequence([seed, g, p]).generate_state(1)[0])
            try:
                report = em_fit(
                    series, spec,
                    init=InitStrategy(n_starts=n_starts, seed=cand_seed),
                    max_iter=max_iter, tol=tol,
                )
                score = report.bic if criterion == "bic" else report.aic
                results.append(CandidateResult(spec=spec, report=report, score=score))
            except (MvarError, ValueError) as exc:
                results.append(CandidateResult(spec=spec, report=None,
                                               score=float("inf"), error=str(exc)))
    results.sort(key=lambda r: r.score)
    return results
