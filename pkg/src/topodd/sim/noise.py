"""Ornstein-Uhlenbeck noise with exact discretisation."""

from __future__ import annotations

import numpy as np


def trajectory_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent per-trajectory generators derived from one master seed.

    Trajectory ``k`` always gets the same stream, however the trajectories
    are later split across workers.
    """
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def ou_step(c: np.ndarray, h: float, gamma: float, sigma: float, eta: np.ndarray) -> np.ndarray:
    """Exact update ``c(t+h) = c e^{-gamma h} + sigma sqrt(1 - e^{-2 gamma h}) eta``."""
    decay = np.exp(-gamma * h)
    return c * decay + sigma * np.sqrt(1.0 - decay * decay) * eta


def ou_paths(n_traj: int, n_steps: int, h: float, *, strength: float, gamma: float = 1.0,
             seed: int = 0, width: int = 1) -> np.ndarray:
    """Stationary OU samples, shape ``(n_traj, n_steps + 1, width)``, spacing ``h``.

    Variance is ``strength * gamma / 2``.
    """
    sigma = np.sqrt(strength * gamma / 2)
    rngs = trajectory_rngs(seed, n_traj)
    eta = np.stack([r.standard_normal((n_steps + 1, width)) for r in rngs])
    out = np.empty_like(eta)
    out[:, 0] = sigma * eta[:, 0]
    for s in range(n_steps):
        out[:, s + 1] = ou_step(out[:, s], h, gamma, sigma, eta[:, s + 1])
    return out


def correlation(strength: float, gamma: float, lag: float) -> float:
    return strength * gamma / 2 * np.exp(-gamma * abs(lag))


def empirical_autocorrelation(paths: np.ndarray, lag_steps: int) -> float:
    """Ensemble estimate of ``<c(t) c(t + lag)>`` averaged over start times."""
    a = paths[:, : paths.shape[1] - lag_steps]
    b = paths[:, lag_steps:]
    return float(np.mean(a * b))
