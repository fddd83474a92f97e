"""Sample-path generation for mixture VAR processes.

Each step draws a component label from the mixing weights, then applies that
component's autoregression plus a Gaussian innovation through the lower
Cholesky factor of its covariance. Paths are bit-reproducible given the seed;
the generator algorithm is a package constant (``RNG_ALGORITHM``) recorded in
simulation metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError
from .model import MvarParameters, SeriesMatrix

#: numpy's default bit generator; per-start/per-chunk substreams are spawned
#: from a SeedSequence, which is the documented splittable-stream mechanism.
RNG_ALGORITHM = "pcg64"


@dataclass(frozen=True)
class SimulationConfig:
    """Experiment design for one simulated path."""

    params: MvarParameters
    n: int
    burn_in: int = 200
    seed: int = 0
    initial: np.ndarray | None = None   # (p, m) starting values, oldest first

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.initial is not None:
            init = np.array(self.initial, dtype=float)
            p, m = self.params.spec.p, self.params.spec.m
            if init.shape != (p, m):
                raise DimensionError(
                    f"initial must have shape ({p},{m}), got {init.shape}"
                )
            init.setflags(write=False)
            object.__setattr__(self, "initial", init)


@dataclass(frozen=True)
class SimulationResult:
    """A simulated path together with the component labels actually drawn."""

    series: SeriesMatrix
    labels: np.ndarray          # (n,) 0-based component indices, post burn-in
    config: SimulationConfig
    rng_algorithm: str = RNG_ALGORITHM


def simulate(config: SimulationConfig) -> SimulationResult:
    """Generate a path of length ``config.n`` after discarding ``config.burn_in`` steps.

    Draw order is fixed (all labels first, then all innovations) so outputs are
    reproducible bit-for-bit across runs with the same config.
    """
    params = config.params
    spec = params.spec
    g, m, p = spec.g, spec.m, spec.p
    rng = np.random.default_rng(config.seed)
    total = config.burn_in + config.n
    labels = rng.choice(g, size=total, p=params.pi)
    eps = rng.standard_normal((total, m))
    chol = params.cholesky_factors()
    ys = np.zeros((p + total, m))
    if config.initial is not None:
        ys[:p] = config.initial
    for t in range(total):
        k = labels[t]
        mean = params.theta0[k].copy()
        for i in range(1, spec.orders[k] + 1):
            mean += params.theta[k, i - 1] @ ys[p + t - i]
        ys[p + t] = mean + chol[k] @ eps[t]
    return SimulationResult(
        series=SeriesMatrix(ys[p + config.burn_in:]),
        labels=labels[config.burn_in:].copy(),
        config=config,
    )


def simulate_forward(
    params: MvarParameters,
    history: np.ndarray,
    horizon: int,
    n_paths: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized forward simulation from a fixed history, no burn-in.

    ``history`` is (p, m), oldest first. Returns all simulated steps with
    shape (n_paths, horizon, m). Used by Monte Carlo forecasting.
    """
    spec = params.spec
    g, m, p = spec.g, spec.m, spec.p
    history = np.asarray(history, dtype=float)
    if history.shape != (p, m):
        raise DimensionError(f"history must have shape ({p},{m}), got {history.shape}")
    if horizon < 1 or n_paths < 1:
        raise ValueError("horizon and n_paths must be >= 1")
    chol = params.cholesky_factors()
    state = np.broadcast_to(history, (n_paths, p, m)).copy()
    out = np.empty((n_paths, horizon, m))
    for step in range(horizon):
        labels = rng.choice(g, size=n_paths, p=params.pi)
        eps = rng.standard_normal((n_paths, m))
        y = np.empty((n_paths, m))
        for k in range(g):
            idx = labels == k
            if not np.any(idx):
                continue
            mean = np.broadcast_to(params.theta0[k], (int(idx.sum()), m)).copy()
            for i in range(1, spec.orders[k] + 1):
                mean += state[idx, p - i] @ params.theta[k, i - 1].T
            y[idx] = mean + eps[idx] @ chol[k].T
        if p > 0:
            state[:, :-1] = state[:, 1:]
            state[:, -1] = y
        out[:, step] = y
    return out
