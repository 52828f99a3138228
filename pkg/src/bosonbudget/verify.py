"""Operational tests that an alleged sampler behaves like the real device.

Three tests with very different costs and assumptions: a cheap witness that
separates the device's output from uniform noise, an in-situ round trip
through the network and its inverse, and the multi-photon suppression test on
the Fourier network, whose forbidden outputs are verified against brute-force
permanents before being relied on.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .distinguishability import Indistinguishability, prob_mismatch
from .errors import DimensionError, ResourceLimitError
from .fock import enumerate_outputs, mode_indices
from .ideal_sampler import full_distribution, prob_ideal
from .noise_model import DeviceConfig, click_pattern_prob
from .random_ensembles import as_matrix, fourier_matrix

SUPPRESSION_TOL = 1e-10
MAX_WITNESS_PATTERNS = 2_000_000


@dataclass(frozen=True)
class WitnessResult:
    """Decision of the row-norm witness with its calibration references."""

    sample_mean: float
    sample_se: float
    reference_uniform: float
    reference_device: float
    midpoint: float
    decision: str  # "bs-like" | "uniform-like" | "inconclusive"
    n_used: int
    n_rejected: int


def _witness_values(col_mass: np.ndarray, clicked: np.ndarray, modes: int, n: int) -> np.ndarray:
    # W = prod over clicked columns of (M/N) * (mass of the column over source rows)
    return np.prod((modes / n) * col_mass[clicked], axis=-1)


def row_norm_witness(u, n0: Sequence[int], samples: Sequence[Sequence[int]]) -> WitnessResult:
    """Classify samples as device output vs uniform noise.

    Each N-click sample m scores W(m) = prod_alpha (M/N) sum_{i<=N} |U_{i,l_alpha}|^2
    over its clicked columns; real device output is biased toward columns the
    source rows weight heavily, so E[W] sits above the uniform reference.
    Both reference means are calibrated by exact enumeration at desk scale.
    Samples whose click count differs from N are rejected and counted.

    The call is inconclusive when the sample mean lies within two standard
    errors of the midpoint between the references.
    """
    m = as_matrix(u)
    modes = m.shape[0]
    if len(n0) != modes:
        raise DimensionError("n0 must have one entry per mode")
    if any(int(k) not in (0, 1) for k in n0):
        raise ValueError("witness expects one photon per source mode (0/1 input)")
    rows = mode_indices(n0)
    n = len(rows)
    if n == 0:
        raise ValueError("n0 must contain at least one photon")
    if math.comb(modes, n) > MAX_WITNESS_PATTERNS:
        raise ResourceLimitError("reference calibration needs too many patterns")

    col_mass = np.abs(m[rows, :]) ** 2
    col_mass = col_mass.sum(axis=0)  # (modes,)

    used = []
    n_rejected = 0
    for s in samples:
        if len(s) != modes:
            raise DimensionError("sample pattern length must equal the mode count")
        if sum(int(b) for b in s) == n:
            used.append([l for l, b in enumerate(s) if b])
        else:
            n_rejected += 1
    n_used = len(used)

    all_patterns = np.array(list(combinations(range(modes), n)), dtype=np.intp)
    w_all = _witness_values(col_mass, all_patterns, modes, n)
    ref_uniform = float(w_all.mean())

    dist = full_distribution(m, list(n0))
    p_cf = []
    w_cf = []
    for outcome, p in zip(dist.outcomes, dist.probs):
        if max(outcome) <= 1:
            p_cf.append(p)
            w_cf.append(
                float(_witness_values(col_mass, np.array(mode_indices(outcome)), modes, n))
            )
    cf_mass = math.fsum(p_cf)
    ref_device = math.fsum(p * w for p, w in zip(p_cf, w_cf)) / cf_mass
    midpoint = 0.5 * (ref_uniform + ref_device)

    if n_used == 0:
        return WitnessResult(math.nan, math.inf, ref_uniform, ref_device, midpoint,
                             "inconclusive", 0, n_rejected)
    w_samples = _witness_values(col_mass, np.array(used, dtype=np.intp), modes, n)
    mean = float(w_samples.mean())
    se = float(w_samples.std(ddof=1) / math.sqrt(n_used)) if n_used > 1 else math.inf

    if abs(mean - midpoint) <= 2.0 * se:
        decision = "inconclusive"
    elif (mean > midpoint) == (ref_device > midpoint):
        decision = "bs-like"
    else:
        decision = "uniform-like"
    return WitnessResult(mean, se, ref_uniform, ref_device, midpoint, decision,
                         n_used, n_rejected)


def unitarity_roundtrip(cfg: DeviceConfig) -> float:
    """Send the device input through the network and its inverse; score the return.

    The compound network is the exact matrix product U^dag U (numerically
    almost the identity, so floating-point defects of the supplied matrix
    propagate realistically). Returns the probability that the run produces
    exactly one click on each source mode and none elsewhere; 1 for a
    noise-free device, strictly below 1 with any dark counts.
    """
    u = cfg.matrix
    roundtrip = u.conj().T @ u
    cfg_back = dataclasses.replace(cfg, unitary=roundtrip)
    pattern = (1,) * cfg.n_sources + (0,) * (cfg.modes - cfg.n_sources)
    return click_pattern_prob(cfg_back, pattern)


@dataclass(frozen=True)
class SuppressionResult:
    """Outcome of the forbidden-output test on the Fourier network."""

    suppressed_mass: float
    law_violations: int
    n_suppressed: int
    law_valid: bool


def suppression_test(n: int, indist: Indistinguishability) -> SuppressionResult:
    """Total probability leaking into the forbidden outputs of the Fourier network.

    With one photon in each of the N modes of the N-mode Fourier network, the
    cyclic symmetry forces zero probability on every output s whose weighted
    mode sum fails sum_l (l-1) s_l = 0 (mod N). The candidate law is not
    assumed: each flagged output is first checked to have (numerically) zero
    ideal probability, and any violation invalidates the law for this
    instance instead of proceeding. With imperfect indistinguishability the
    flagged outputs leak mass, which is what is returned.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > 7:
        raise ResourceLimitError("suppression test capped at 7 photons")
    u = fourier_matrix(n)
    n0 = (1,) * n

    flagged = []
    for s in enumerate_outputs(n, n):
        weighted = sum(l * occ for l, occ in enumerate(s))
        if weighted % n != 0:
            flagged.append(s)

    violations = 0
    for s in flagged:
        if prob_ideal(u, n0, s) > SUPPRESSION_TOL:
            violations += 1
    if violations:
        return SuppressionResult(math.nan, violations, len(flagged), False)

    mass = math.fsum(prob_mismatch(u, n0, s, indist) for s in flagged)
    return SuppressionResult(mass, 0, len(flagged), True)
