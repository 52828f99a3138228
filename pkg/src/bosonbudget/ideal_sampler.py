"""Ideal device: exact output distribution, exact sampling, distance utilities.

For an input occupation vector n and output s, the transition probability is
|per(U[n|s])|^2 / (mu(n) mu(s)), zero when the photon totals differ. At desk
scale the full table is cheap enough to materialise, which gives tests an
unimpeachable sampling oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError
from .fock import enumerate_outputs, mu, total_photons
from .permanent import permanent_repeated
from .random_ensembles import as_matrix

Outcome = tuple[int, ...]


@dataclass(frozen=True)
class DistributionTable:
    """Explicit finite distribution over occupation vectors or click patterns."""

    outcomes: tuple[Outcome, ...]
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.ndim != 1 or len(p) != len(self.outcomes):
            raise DimensionError("probs must be a vector matching outcomes")
        if p.size and p.min() < -1e-12:
            raise ValueError(f"negative probability {p.min()}")
        np.clip(p, 0.0, None, out=p)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("outcomes must be unique")

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.probs))

    def is_complete(self, tol: float = 1e-8) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def as_dict(self) -> dict[Outcome, float]:
        return {o: float(p) for o, p in zip(self.outcomes, self.probs)}


def prob_ideal(u, n: Sequence[int], s: Sequence[int]) -> float:
    """Exact transition probability of the noiseless device.

    Returns 0.0 (without raising) when the photon totals differ, since the
    network conserves photon number.
    """
    m = as_matrix(u)
    if len(n) != m.shape[0] or len(s) != m.shape[0]:
        raise DimensionError("occupation vectors must have one entry per mode")
    if total_photons(n) != total_photons(s):
        return 0.0
    amp = permanent_repeated(m, n, s)
    return float(abs(amp) ** 2 / (mu(n) * mu(s)))


def full_distribution(u, n: Sequence[int], *, max_outcomes: int = 2_000_000) -> DistributionTable:
    """Exact table over every output with the same photon total as ``n``.

    Outcomes follow the deterministic descending-lexicographic enumeration
    order; the total mass is 1 up to floating-point roundoff.
    """
    m = as_matrix(u)
    modes = m.shape[0]
    photons = total_photons(n)
    outcomes = []
    probs = []
    for s in enumerate_outputs(modes, photons, max_outcomes=max_outcomes):
        outcomes.append(s)
        probs.append(prob_ideal(m, n, s))
    return DistributionTable(tuple(outcomes), np.array(probs))


def sample_ideal(dist: DistributionTable, count: int, rng: np.random.Generator) -> list[Outcome]:
    """i.i.d. draws by inverse CDF over the materialised table.

    Zero-probability outcomes are never drawn. Requires a complete table
    (total mass 1 within 1e-8).
    """
    if not dist.is_complete():
        raise ValueError(f"distribution is incomplete: total mass {dist.total_mass}")
    cum = np.cumsum(dist.probs)
    u = rng.random(count)
    idx = np.searchsorted(cum, u, side="right")
    # u >= cum[-1] can only happen through roundoff; fall back to the last
    # outcome that carries mass.
    if idx.size and idx.max() >= len(cum):
        last = int(np.flatnonzero(dist.probs > 0)[-1])
        idx = np.where(idx >= len(cum), last, idx)
    return [dist.outcomes[i] for i in idx]


def _prob_map(d) -> Mapping[Outcome, float]:
    if isinstance(d, DistributionTable):
        return d.as_dict()
    return dict(d)


def variational_distance(p, q) -> float:
    """Sum of |p_i - q_i| over the union of supports; ranges over [0, 2].

    This is the convention without the factor 1/2. Outcomes missing from one
    table are treated as probability zero, so tables over different supports
    (e.g. realistic vs ideal devices) compare directly.
    """
    pm = _prob_map(p)
    qm = _prob_map(q)
    keys = set(pm) | set(qm)
    return math.fsum(abs(pm.get(k, 0.0) - qm.get(k, 0.0)) for k in keys)
