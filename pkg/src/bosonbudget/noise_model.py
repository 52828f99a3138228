"""Realistic device: imperfect sources, lossy dark-counting bucket detectors.

The output of a run is a click pattern m (one bit per detector). Its exact
probability chains the source distribution, the network transition
probabilities, and the per-detector response:

    P_out(m) = sum_s P_D(m|s) sum_n P_U(s|n) P_I(n).

Two independent evaluation routes are provided. ``output_click_distribution``
performs the literal triple sum (desk scale only). ``click_pattern_prob`` and
``distance_parts`` instead fold the detector weights into small permanents:
for factorised per-mode weights x_l the network satisfies

    sum_s P_U(s|n) prod_l x_l^(s_l) = per(W(x)) / mu(n),
    W(x)[a, b] = sum_l x_l conj(U[k_a, l]) U[k_b, l],

so a pattern's probability needs only 2^(clicks) permanents of K x K Gram
matrices (K = photon total), independent of the mode count. That is what
makes exact evaluation possible at hundreds of modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, ResourceLimitError
from .fock import count_outputs, enumerate_outputs, mode_indices, mu, total_photons
from .ideal_sampler import DistributionTable, prob_ideal
from .permanent import _permanent_batch
from .random_ensembles import as_matrix

MAX_PATTERNS = 4_000_000
MAX_CLICK_TABLE_MODES = 16


@dataclass(frozen=True)
class SourceModel:
    """Photon-number distribution of one source; all sources are replicas.

    ``photon_probs[k]`` is the chance of emitting k photons. The tuple may
    sum to less than 1; the remainder is truncated mass, reported but never
    silently renormalised.
    """

    photon_probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.photon_probs)
        if not probs:
            raise ValueError("photon_probs must be non-empty")
        if any(p < 0 for p in probs):
            raise ValueError("photon probabilities must be non-negative")
        if math.fsum(probs) > 1.0 + 1e-12:
            raise ValueError(f"photon probabilities sum to {math.fsum(probs)} > 1")
        object.__setattr__(self, "photon_probs", probs)

    @property
    def kmax(self) -> int:
        return len(self.photon_probs) - 1

    @property
    def truncated_mass(self) -> float:
        return max(0.0, 1.0 - math.fsum(self.photon_probs))

    def p(self, k: int) -> float:
        if k < 0:
            return 0.0
        return self.photon_probs[k] if k <= self.kmax else 0.0

    @classmethod
    def ideal(cls) -> "SourceModel":
        return cls((0.0, 1.0))

    @classmethod
    def single_photon(cls, p1: float, p2: float = 0.0) -> "SourceModel":
        """Mostly-single-photon source; the rest of the mass sits in vacuum."""
        p0 = 1.0 - p1 - p2
        if p0 < -1e-12:
            raise ValueError("p1 + p2 exceeds 1")
        probs = (max(p0, 0.0), p1) if p2 == 0.0 else (max(p0, 0.0), p1, p2)
        return cls(probs)


@dataclass(frozen=True)
class DetectorModel:
    """Bucket detector: click/no-click only.

    ``loss_prob`` is the chance a single photon fails to register (losses are
    modelled here, at the detection stage, not inside the network), and
    ``dark_rate`` the integral dark-count exponent: exp(-dark_rate) is the
    per-run zero-dark-count probability.
    """

    loss_prob: float = 0.0
    dark_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must be in [0, 1]")
        if self.dark_rate < 0.0:
            raise ValueError("dark_rate must be non-negative")

    def no_click_prob(self, photons: int) -> float:
        return math.exp(-self.dark_rate) * self.loss_prob ** photons

    def click_prob(self, photons: int) -> float:
        return 1.0 - self.no_click_prob(photons)

    @classmethod
    def ideal(cls) -> "DetectorModel":
        return cls(0.0, 0.0)


@dataclass(frozen=True)
class DeviceConfig:
    """Network plus source/detector models; sources feed modes 1..N."""

    unitary: object
    n_sources: int
    source: SourceModel
    detector: DetectorModel

    def __post_init__(self):
        m = as_matrix(self.unitary)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"network matrix must be square, got {m.shape}")
        if not 1 <= self.n_sources <= m.shape[0]:
            raise DimensionError(
                f"n_sources must be in [1, modes], got {self.n_sources} with {m.shape[0]} modes"
            )

    @property
    def matrix(self) -> np.ndarray:
        return as_matrix(self.unitary)

    @property
    def modes(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def ideal(cls, unitary, n_sources: int) -> "DeviceConfig":
        return cls(unitary, n_sources, SourceModel.ideal(), DetectorModel.ideal())


def input_prob(cfg: DeviceConfig, n: Sequence[int]) -> float:
    """Probability of the input occupation ``n``: product of source weights.

    Zero whenever a mode beyond the sources is occupied or an occupation
    exceeds the source truncation.
    """
    if len(n) != cfg.modes:
        raise DimensionError("occupation vector must have one entry per mode")
    if any(int(k) > 0 for k in n[cfg.n_sources:]):
        return 0.0
    out = 1.0
    for k in n[: cfg.n_sources]:
        out *= cfg.source.p(int(k))
        if out == 0.0:
            return 0.0
    return out


def detector_prob(det: DetectorModel, m: Sequence[int], s: Sequence[int]) -> float:
    """Joint click-pattern probability given the photon arrivals ``s``."""
    if len(m) != len(s):
        raise DimensionError("click pattern and occupation must have equal length")
    out = 1.0
    for click, photons in zip(m, s):
        p0 = det.no_click_prob(int(photons))
        out *= 1.0 - p0 if click else p0
    return out


def _input_support(source: SourceModel, n_sources: int):
    """Yield (occupation-over-sources, probability) for the truncated sources."""
    for occ in product(range(source.kmax + 1), repeat=n_sources):
        p = 1.0
        for k in occ:
            p *= source.photon_probs[k]
        if p > 0.0:
            yield occ, p


def output_click_distribution(
    cfg: DeviceConfig, *, max_terms: int = 5_000_000
) -> DistributionTable:
    """Exact distribution over all 2^M click patterns by the literal triple sum.

    Desk scale only (the table itself has 2^M entries); serves as the slow
    oracle for the permanent-based pattern probabilities.
    """
    u = cfg.matrix
    modes = cfg.modes
    if modes > MAX_CLICK_TABLE_MODES:
        raise ResourceLimitError(
            f"click table has 2^{modes} entries; capped at 2^{MAX_CLICK_TABLE_MODES} patterns"
        )
    totals = {total_photons(occ) for occ, _ in _input_support(cfg.source, cfg.n_sources)}
    n_terms = sum(count_outputs(modes, k) for k in totals) * (1 << modes)
    if n_terms > max_terms:
        raise ResourceLimitError(f"triple sum needs about {n_terms} terms, over the {max_terms} cap")

    det = cfg.detector
    pvec = np.zeros(1 << modes)
    for occ, p_in in _input_support(cfg.source, cfg.n_sources):
        n_full = tuple(occ) + (0,) * (modes - cfg.n_sources)
        for s in enumerate_outputs(modes, total_photons(occ)):
            p_us = prob_ideal(u, n_full, s)
            if p_us == 0.0:
                continue
            w = np.array([1.0])
            for s_l in s:
                p0 = det.no_click_prob(int(s_l))
                w = np.kron(w, np.array([p0, 1.0 - p0]))
            pvec += (p_in * p_us) * w

    outcomes = tuple(
        tuple((i >> (modes - 1 - j)) & 1 for j in range(modes)) for i in range(1 << modes)
    )
    return DistributionTable(outcomes, pvec)


def _subset_coeffs(n_clicked: int, dark_rate: float):
    """Inclusion-exclusion coefficients over kept-click subsets T.

    Expanding prod_{clicked}(1 - e^-nu r^s) gives, for each subset T of
    clicked modes kept un-expanded, the sign (-1)^(clicked-|T|) and dark
    factor e^(-(clicked-|T|) nu).
    """
    for bits in range(1 << n_clicked):
        kept = [j for j in range(n_clicked) if bits >> j & 1]
        dropped = n_clicked - len(kept)
        yield kept, (-1.0) ** dropped * math.exp(-dropped * dark_rate)


def _gray_subset_walk(n_clicked: int, dark_rate: float):
    """Subsets T in Gray order as (flip_bit, add, coeff) steps.

    The first step has flip_bit None (the empty subset); each later step
    flips exactly one member in or out, so a running sum over T costs one
    array update per subset.
    """
    coeffs = [
        (-1.0) ** (n_clicked - k) * math.exp(-(n_clicked - k) * dark_rate)
        for k in range(n_clicked + 1)
    ]
    prev = 0
    for k in range(1 << n_clicked):
        gray = k ^ (k >> 1)
        diff = gray ^ prev
        flip = None if k == 0 else diff.bit_length() - 1
        add = bool(gray & diff)
        yield flip, add, coeffs[gray.bit_count()]
        prev = gray


def click_pattern_prob(cfg: DeviceConfig, pattern: Sequence[int]) -> float:
    """Exact probability of one click pattern, any mode count.

    Cost is 2^(clicks) permanents of K x K matrices per input occupation
    (K = photon total), so it stays cheap even for very wide networks.
    Requires the network matrix to be numerically unitary.
    """
    u = cfg.matrix
    modes = cfg.modes
    if len(pattern) != modes:
        raise DimensionError("pattern must have one bit per mode")
    if any(b not in (0, 1) for b in pattern):
        raise ValueError("pattern entries must be 0 or 1")
    clicked = [l for l, b in enumerate(pattern) if b]
    n_clicked = len(clicked)
    support = list(_input_support(cfg.source, cfg.n_sources))
    if (1 << n_clicked) * len(support) > 5_000_000:
        raise ResourceLimitError(
            f"pattern with {n_clicked} clicks and {len(support)} inputs is over the term cap"
        )

    r = cfg.detector.loss_prob
    nu = cfg.detector.dark_rate
    terms = []
    for occ, p_in in support:
        k_rows = mode_indices(occ)
        k = len(k_rows)
        if k == 0:
            # vacuum input: the permanents are all 1 by the empty convention
            for kept, coeff in _subset_coeffs(n_clicked, nu):
                terms.append(p_in * coeff)
            continue
        delta = (np.asarray(k_rows)[:, None] == np.asarray(k_rows)[None, :]).astype(float)
        cols = u[np.ix_(k_rows, clicked)]  # (K, clicks)
        projs = [np.outer(cols[:, j].conj(), cols[:, j]) for j in range(n_clicked)]
        weight = p_in / mu(occ)
        for kept, coeff in _subset_coeffs(n_clicked, nu):
            g = sum((projs[j] for j in kept), start=np.zeros((k, k), dtype=complex))
            w = r * delta + (1.0 - r) * g
            terms.append(weight * coeff * _permanent_batch(w[None])[0].real)
    total = math.exp(-(modes - n_clicked) * nu) * math.fsum(terms)
    return max(total, 0.0)


class DistanceParts(NamedTuple):
    v1: float  # probability mass on patterns with a click count other than N
    v2: float  # L1 gap to the ideal device on the N-click patterns
    vb: float  # bunched-output mass of the ideal device


def _chunk_pattern_probs(u, n_sources, source, detector, cols):
    """P_out and ideal probabilities for a chunk of N-click patterns.

    ``cols`` is a (batch, N) array of clicked mode indices. When the sources
    carry at most one photon the sum over inputs collapses into a diagonal
    shift of a single N x N permanent per subset; otherwise every input
    occupation is summed explicitly.
    """
    n = n_sources
    r = detector.loss_prob
    nu = detector.dark_rate
    batch = cols.shape[0]

    vid = np.moveaxis(u[:n][:, cols], 0, 1)  # (batch, N, N): [b, i, j] = U[i, cols[b, j]]
    p_ideal = np.abs(_permanent_batch(vid)) ** 2

    pout = np.zeros(batch)
    if source.kmax <= 1:
        p0, p1 = source.p(0), source.p(1)
        scale = p1 * (1.0 - r)
        projs = [scale * (vid[:, :, j].conj()[:, :, None] * vid[:, None, :, j]) for j in range(n)]
        g = np.zeros((batch, n, n), dtype=complex)
        g[:, np.arange(n), np.arange(n)] = p0 + p1 * r
        for flip, add, coeff in _gray_subset_walk(n, nu):
            if flip is not None:
                if add:
                    g += projs[flip]
                else:
                    g -= projs[flip]
            pout += coeff * _permanent_batch(g).real
    else:
        for occ, p_in in _input_support(source, n_sources):
            k_rows = mode_indices(occ)
            k = len(k_rows)
            weight = p_in / mu(occ)
            if k == 0:
                pout += weight * sum(c for _, c in _subset_coeffs(n, nu))
                continue
            vn = np.moveaxis(u[k_rows][:, cols], 0, 1)  # (batch, K, N)
            delta = (np.asarray(k_rows)[:, None] == np.asarray(k_rows)[None, :]).astype(float)
            projs = [(1.0 - r) * (vn[:, :, j].conj()[:, :, None] * vn[:, None, :, j]) for j in range(n)]
            g = np.zeros((batch, k, k), dtype=complex)
            g += (r * delta)[None]
            for flip, add, coeff in _gray_subset_walk(n, nu):
                if flip is not None:
                    if add:
                        g += projs[flip]
                    else:
                        g -= projs[flip]
                pout += (weight * coeff) * _permanent_batch(g).real
    pout *= math.exp(-(u.shape[0] - n) * nu)
    return pout, p_ideal


def collision_free_patterns(modes: int, n_clicks: int, *, max_patterns: int = MAX_PATTERNS) -> np.ndarray:
    """Index array (count, n_clicks) of every pattern with exactly n_clicks clicks."""
    n_pat = math.comb(modes, n_clicks)
    if n_pat > max_patterns:
        raise ResourceLimitError(f"{n_pat} patterns exceed the cap of {max_patterns}")
    return np.array(list(combinations(range(modes), n_clicks)), dtype=np.intp)


def distance_parts(
    cfg: DeviceConfig,
    *,
    patterns: np.ndarray | None = None,
    chunk: int = 1 << 17,
) -> DistanceParts:
    """Exact decomposition of the distance between the device and its ideal twin.

    v1 collects the output mass that lands on patterns with the wrong click
    count, v2 the pointwise L1 gap on patterns with exactly N clicks, and vb
    the bunched-output mass of the ideal device. All three are computed
    exactly; pass a precomputed ``patterns`` array when sweeping many
    networks of the same shape. Truncated source mass, if any, is unmodelled
    output and is excluded from v1.
    """
    u = cfg.matrix
    n = cfg.n_sources
    if patterns is None:
        patterns = collision_free_patterns(cfg.modes, n)
    if patterns.ndim != 2 or patterns.shape[1] != n:
        raise DimensionError(f"patterns must be (count, {n}) mode indices")
    if (cfg.source.kmax + 1) ** n > 100_000 or n > 10:
        raise ResourceLimitError("input support too large for the pattern sweep")

    sum_out = 0.0
    sum_gap = 0.0
    sum_ideal = 0.0
    for lo in range(0, patterns.shape[0], chunk):
        cols = patterns[lo : lo + chunk]
        pout, pideal = _chunk_pattern_probs(u, n, cfg.source, cfg.detector, cols)
        sum_out += float(pout.sum())
        sum_gap += float(np.abs(pout - pideal).sum())
        sum_ideal += float(pideal.sum())
    modelled = (1.0 - cfg.source.truncated_mass) ** n
    return DistanceParts(
        v1=max(modelled - sum_out, 0.0),
        v2=sum_gap,
        vb=max(1.0 - sum_ideal, 0.0),
    )


class NoiseBound(NamedTuple):
    value: float  # bound on the ensemble-mean total distance (raw, may exceed 2)
    click_prob: float  # chance of the fully ideal event: N clicks, no dark counts, ideal input
    bad_input_prob: float  # chance the input is not exactly one photon per source


def noise_bound(
    n_sources: int, modes: int, source: SourceModel, detector: DetectorModel
) -> NoiseBound:
    """Mean-distance bound from source, loss, and dark-count imperfections.

    With Q the all-ideal event probability and Q' the bad-input probability,

        value = N^2/(2M) + 2 (1 - Q (1 - N^2/(2M))) + (1 - Q) + Q'.

    The value is a bound, not a probability: it can exceed the distance
    range [0, 2] for poor hardware, and is reported raw.
    """
    if not 1 <= n_sources <= modes:
        raise ValueError("need 1 <= n_sources <= modes")
    p1 = source.p(1)
    r = detector.loss_prob
    nu = detector.dark_rate
    geom = n_sources**2 / (2.0 * modes)
    q = math.exp(-(modes - n_sources) * nu) * (1.0 - math.exp(-nu) * r) ** n_sources * p1**n_sources
    q_prime = 1.0 - p1**n_sources
    value = geom + 2.0 * (1.0 - q * (1.0 - geom)) + (1.0 - q) + q_prime
    return NoiseBound(value, q, q_prime)


def noise_bound_additive(
    n_sources: int, modes: int, source: SourceModel, detector: DetectorModel
) -> float:
    """Additive relaxation of :func:`noise_bound`, linear in each error rate.

        3N^2/(2M) + 3[(M - N) nu + N r] + 4N (1 - p1)

    Dominates the exact bound whenever both are meaningful, and is the form
    the budget inverter solves in closed form.
    """
    if not 1 <= n_sources <= modes:
        raise ValueError("need 1 <= n_sources <= modes")
    n, m = n_sources, modes
    return (
        3.0 * n**2 / (2.0 * m)
        + 3.0 * ((m - n) * detector.dark_rate + n * detector.loss_prob)
        + 4.0 * n * (1.0 - source.p(1))
    )
