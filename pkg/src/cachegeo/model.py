"""Domain types shared by every module: content library, network
parameters, and caching policies, plus their constructors and validators.

Content index 0 is the most popular content; popularity vectors are kept
nonincreasing so index doubles as popularity rank.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ContentLibrary",
    "NetworkParams",
    "CachingPolicy",
    "zipf_popularity",
    "uniform_rates",
    "validate_policy",
    "budget_violation",
    "BUDGET_TOL",
]

# Slack on the cache budget so bisection output within eps of the budget
# is not rejected as infeasible.
BUDGET_TOL = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ContentLibrary:
    """A catalog of contents with request probabilities and target rates.

    popularity must sum to one, be strictly positive, and be nonincreasing
    in the content index; rates are per-content target bit rates in
    bits/s/Hz, strictly positive.
    """

    count: int
    popularity: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("library must contain at least one content")
        pop = _frozen_array(self.popularity)
        rates = _frozen_array(self.rates)
        if pop.shape != (self.count,) or rates.shape != (self.count,):
            raise ValueError("popularity and rates must have length count")
        if not np.all(pop > 0):
            raise ValueError("popularity entries must be > 0")
        if abs(pop.sum() - 1.0) > 1e-12:
            raise ValueError("popularity must sum to 1 within 1e-12")
        if np.any(np.diff(pop) > 0):
            raise ValueError("popularity must be nonincreasing in index")
        if not np.all(np.isfinite(rates)) or not np.all(rates > 0):
            raise ValueError("rates must be strictly positive and finite")
        object.__setattr__(self, "popularity", pop)
        object.__setattr__(self, "rates", rates)


@dataclass(frozen=True)
class NetworkParams:
    """Physical layer and geometry parameters.

    Densities are per square meter, powers linear watts.  The path loss
    exponent must exceed 2 so that delta = 2/alpha lies in (0, 1); fading
    shapes are Nakagami-m parameters for the desired and interfering links.
    """

    helper_density: float
    user_density: float
    tx_power: float
    noise_power: float
    pathloss_exp: float
    fading_desired: float = 1.0
    fading_interf: float = 1.0

    def __post_init__(self):
        if self.pathloss_exp <= 2:
            raise ValueError("pathloss_exp must be > 2")
        for name in ("helper_density", "user_density", "tx_power", "noise_power"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.fading_desired < 0.5 or self.fading_interf < 0.5:
            raise ValueError("Nakagami fading parameters must be >= 1/2")

    @property
    def delta(self) -> float:
        return 2.0 / self.pathloss_exp

    @property
    def snr(self) -> float:
        """tx_power / noise_power; +inf when the noise power is zero."""
        if self.noise_power == 0:
            return np.inf
        return self.tx_power / self.noise_power


@dataclass(frozen=True)
class CachingPolicy:
    """Per-content caching probabilities under a cache of `memory` slots.

    Construction only checks shape; feasibility (probabilities in [0, 1],
    budget, memory smaller than the library) is reported by
    :func:`validate_policy` so infeasible candidates can be inspected.
    """

    probs: np.ndarray
    memory: int

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a nonempty 1-D vector")
        if int(self.memory) != self.memory or self.memory < 1:
            raise ValueError("memory must be a positive integer")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "memory", int(self.memory))

    @property
    def count(self) -> int:
        return self.probs.size


def zipf_popularity(count: int, gamma: float) -> np.ndarray:
    """Zipf request probabilities f_i = (1/i^gamma) / sum_j (1/j^gamma).

    gamma = 0 gives the uniform distribution; larger gamma skews requests
    toward low-index contents.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    ranks = np.arange(1, count + 1, dtype=float)
    weights = ranks ** (-gamma)
    return weights / weights.sum()


def uniform_rates(rho_max: float, count: int, seed: int) -> np.ndarray:
    """Draw per-content target rates independently uniform on (0, rho_max].

    Deterministic for a given seed.
    """
    if rho_max <= 0:
        raise ValueError("rho_max must be > 0")
    rng = np.random.default_rng(seed)
    # 1 - U maps [0, 1) onto (0, 1], keeping every rate strictly positive.
    return rho_max * (1.0 - rng.random(count))


def budget_violation(policy: CachingPolicy) -> str | None:
    """First violated bound/budget constraint, or None.

    Checks only what placement and simulation mechanically require:
    0 <= p_i <= 1 and sum(p) <= memory (with a small numerical slack).
    """
    p = policy.probs
    if np.any(p < 0):
        i = int(np.argmax(p < 0))
        return f"p[{i}]={p[i]} is negative"
    if np.any(p > 1):
        i = int(np.argmax(p > 1))
        return f"p[{i}]={p[i]} exceeds 1"
    total = float(p.sum())
    if total > policy.memory + BUDGET_TOL:
        return f"sum(p)={total} exceeds the memory budget M={policy.memory}"
    return None


def validate_policy(policy: CachingPolicy) -> str | None:
    """Return None when the policy is feasible, else the first violation.

    Feasible means 0 <= p_i <= 1 for all i, sum(p) <= memory (with a small
    numerical slack), and memory strictly smaller than the library size,
    the regime the placement optimizers are posed in.
    """
    if policy.memory >= policy.probs.size:
        return f"memory M={policy.memory} must be smaller than the library size F={policy.probs.size}"
    return budget_violation(policy)
