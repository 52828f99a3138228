import math
from itertools import product

import numpy as np
import pytest

from bosonbudget import (
    DetectorModel,
    DeviceConfig,
    ResourceLimitError,
    SourceModel,
    click_pattern_prob,
    detector_prob,
    distance_parts,
    full_distribution,
    input_prob,
    noise_bound,
    noise_bound_additive,
    output_click_distribution,
    prob_ideal,
)

from conftest import make_haar


# ----------------------------------------------------------------- models


def test_source_validation():
    with pytest.raises(ValueError):
        SourceModel((0.5, 0.6))
    with pytest.raises(ValueError):
        SourceModel((-0.1, 1.0))
    src = SourceModel((0.1, 0.8, 0.05))
    assert src.kmax == 2
    assert src.truncated_mass == pytest.approx(0.05)
    assert src.p(3) == 0.0


def test_detector_validation():
    with pytest.raises(ValueError):
        DetectorModel(loss_prob=1.5)
    with pytest.raises(ValueError):
        DetectorModel(dark_rate=-1.0)


def test_device_config_validation():
    u = make_haar(3, 0)
    with pytest.raises(Exception):
        DeviceConfig(u, 4, SourceModel.ideal(), DetectorModel.ideal())


# ------------------------------------------------------------ input model


def test_input_prob_ideal_source():
    cfg = DeviceConfig.ideal(make_haar(5, 1), 3)
    assert input_prob(cfg, (1, 1, 1, 0, 0)) == 1.0
    assert input_prob(cfg, (1, 1, 0, 0, 0)) == 0.0


def test_input_prob_product_formula():
    cfg = DeviceConfig(make_haar(4, 2), 2, SourceModel((0.1, 0.9)), DetectorModel.ideal())
    assert input_prob(cfg, (1, 0, 0, 0)) == pytest.approx(0.09)
    assert input_prob(cfg, (1, 1, 0, 0)) == pytest.approx(0.81)


def test_input_prob_vacuum_modes_enforced():
    cfg = DeviceConfig(make_haar(4, 3), 2, SourceModel((0.1, 0.9)), DetectorModel.ideal())
    assert input_prob(cfg, (1, 0, 1, 0)) == 0.0


def test_input_prob_sums_to_one_minus_truncation():
    src = SourceModel((0.07, 0.88, 0.04))
    cfg = DeviceConfig(make_haar(3, 4), 2, src, DetectorModel.ideal())
    total = sum(
        input_prob(cfg, occ + (0,)) for occ in product(range(3), repeat=2)
    )
    assert total == pytest.approx((1.0 - src.truncated_mass) ** 2, rel=1e-12)


# --------------------------------------------------------------- detectors


def test_detector_perfect():
    det = DetectorModel.ideal()
    assert detector_prob(det, (1, 0), (3, 0)) == 1.0
    assert detector_prob(det, (0, 0), (0, 0)) == 1.0
    assert detector_prob(det, (0, 1), (1, 0)) == 0.0


def test_detector_single_value():
    det = DetectorModel(loss_prob=0.1, dark_rate=0.01)
    expected = math.exp(-0.01) * 0.1  # no-click weight for one arriving photon
    assert detector_prob(det, (0,), (1,)) == pytest.approx(expected, rel=1e-12)
    assert detector_prob(det, (1,), (1,)) == pytest.approx(1.0 - expected, rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_detector_normalisation(seed):
    rng = np.random.default_rng(seed)
    det = DetectorModel(loss_prob=float(rng.uniform(0, 1)), dark_rate=float(rng.uniform(0, 0.5)))
    m = 5
    s = tuple(int(x) for x in rng.integers(0, 3, m))
    total = sum(detector_prob(det, pattern, s) for pattern in product((0, 1), repeat=m))
    assert total == pytest.approx(1.0, abs=1e-10)


# ------------------------------------------------- exact output distribution


def _noisy_cfg(seed=42, modes=5, sources=2):
    u = make_haar(modes, seed)
    src = SourceModel((0.08, 0.87, 0.05))
    det = DetectorModel(loss_prob=0.07, dark_rate=0.03)
    return DeviceConfig(u, sources, src, det)


def test_output_distribution_normalised():
    table = output_click_distribution(_noisy_cfg())
    assert abs(table.total_mass - 1.0) <= 1e-9


def test_output_distribution_vacuum_source():
    cfg = DeviceConfig(make_haar(4, 5), 2, SourceModel((1.0,)), DetectorModel.ideal())
    table = output_click_distribution(cfg).as_dict()
    assert table[(0, 0, 0, 0)] == pytest.approx(1.0)


def test_output_distribution_ideal_matches_collapsed_ideal_table():
    # perfect hardware: click patterns are the occupied-mode maps of the exact table
    u = make_haar(6, 6)
    cfg = DeviceConfig.ideal(u, 2)
    clicks = output_click_distribution(cfg).as_dict()
    ideal = full_distribution(u, (1, 1, 0, 0, 0, 0))
    collapsed = {}
    for outcome, p in zip(ideal.outcomes, ideal.probs):
        key = tuple(1 if x else 0 for x in outcome)
        collapsed[key] = collapsed.get(key, 0.0) + p
    for pattern, p in collapsed.items():
        assert clicks[pattern] == pytest.approx(p, abs=1e-10)


def test_output_distribution_resource_guard():
    cfg = DeviceConfig.ideal(make_haar(3, 7), 2)
    with pytest.raises(ResourceLimitError):
        output_click_distribution(cfg, max_terms=10)


def test_click_pattern_prob_matches_table():
    cfg = _noisy_cfg()
    table = output_click_distribution(cfg).as_dict()
    for pattern, p_slow in table.items():
        assert click_pattern_prob(cfg, pattern) == pytest.approx(p_slow, abs=1e-12)


def test_click_pattern_prob_brute_force():
    # third route: literal sum of P_I * P_U * P_D straight from the definitions
    from bosonbudget.fock import enumerate_outputs
    from bosonbudget.noise_model import _input_support

    cfg = _noisy_cfg(seed=9, modes=4)
    pattern = (1, 0, 1, 0)
    total = 0.0
    for occ, p_in in _input_support(cfg.source, cfg.n_sources):
        n_full = tuple(occ) + (0,) * (cfg.modes - cfg.n_sources)
        for s in enumerate_outputs(cfg.modes, sum(occ)):
            total += p_in * prob_ideal(cfg.matrix, n_full, s) * detector_prob(
                cfg.detector, pattern, s
            )
    assert click_pattern_prob(cfg, pattern) == pytest.approx(total, rel=1e-12)


# ------------------------------------------------------------ distance parts


def test_distance_parts_matches_slow_route():
    cfg = _noisy_cfg()
    parts = distance_parts(cfg)
    table = output_click_distribution(cfg).as_dict()
    n = cfg.n_sources
    v1_slow = sum(p for m, p in table.items() if sum(m) != n)
    ideal = full_distribution(cfg.matrix, (1, 1, 0, 0, 0))
    collapsed = {
        tuple(1 if x else 0 for x in o): p
        for o, p in zip(ideal.outcomes, ideal.probs)
        if max(o) <= 1
    }
    v2_slow = sum(abs(table[m] - collapsed.get(m, 0.0)) for m in table if sum(m) == n)
    vb_slow = 1.0 - sum(collapsed.values())
    assert parts.v1 == pytest.approx(v1_slow, abs=1e-12)
    assert parts.v2 == pytest.approx(v2_slow, abs=1e-12)
    assert parts.vb == pytest.approx(vb_slow, abs=1e-12)


def test_distance_parts_single_photon_support_path():
    # the collapsed evaluation (sources limited to 0/1 photons) agrees too
    u = make_haar(5, 21)
    cfg = DeviceConfig(u, 2, SourceModel.single_photon(0.9), DetectorModel(0.07, 0.03))
    parts = distance_parts(cfg)
    table = output_click_distribution(cfg).as_dict()
    v1_slow = sum(p for m, p in table.items() if sum(m) != 2)
    assert parts.v1 == pytest.approx(v1_slow, abs=1e-12)


def test_distance_parts_ideal_device():
    cfg = DeviceConfig.ideal(make_haar(12, 8), 2)
    parts = distance_parts(cfg)
    assert parts.v2 <= 1e-12
    assert parts.v1 == pytest.approx(parts.vb, abs=1e-12)


def test_distance_parts_vacuum_source():
    u = make_haar(6, 9)
    cfg = DeviceConfig(u, 2, SourceModel((1.0,)), DetectorModel.ideal())
    parts = distance_parts(cfg)
    assert parts.v1 == pytest.approx(1.0, abs=1e-12)
    # no output at all: the gap on N-click patterns is the whole ideal click mass
    assert parts.v2 == pytest.approx(1.0 - parts.vb, abs=1e-12)


def test_distance_parts_single_photon_device():
    u = make_haar(2, 10)
    cfg = DeviceConfig.ideal(u, 1)
    parts = distance_parts(cfg)
    assert parts.vb <= 1e-12
    assert parts.v2 <= 1e-12
    assert parts.v1 <= 1e-12


# ------------------------------------------------------------------- bounds


def test_noise_bound_ideal_closed_form():
    for n in range(1, 21):
        m = 20 * n * n
        value = noise_bound(n, m, SourceModel.ideal(), DetectorModel.ideal()).value
        assert abs(value - 3.0 * n * n / (2.0 * m)) <= 1e-14


def test_noise_bound_dead_source():
    nb = noise_bound(3, 100, SourceModel((1.0, 0.0)), DetectorModel.ideal())
    assert nb.click_prob == 0.0
    assert nb.bad_input_prob == 1.0
    assert nb.value == pytest.approx(9.0 / 200.0 + 4.0)


def test_additive_bound_worked_example():
    src = SourceModel.single_photon(0.999)
    det = DetectorModel(loss_prob=1e-3, dark_rate=1e-6)
    val = noise_bound_additive(20, 8000, src, det)
    expected = 0.075 + 3.0 * (7980e-6 + 0.02) + 4.0 * 20.0 * 0.001
    assert val == pytest.approx(expected, rel=1e-12)
    assert val == pytest.approx(0.23894, rel=1e-9)


def test_additive_dominates_exact_on_grid():
    rng = np.random.default_rng(14)
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(1, 21))
        m = int(n * n * rng.uniform(2.0, 100.0)) + n
        src = SourceModel.single_photon(float(rng.uniform(0.97, 1.0)))
        det = DetectorModel(
            loss_prob=float(rng.uniform(0, 0.01)), dark_rate=float(rng.uniform(0, 2e-6))
        )
        exact = noise_bound(n, m, src, det).value
        simple = noise_bound_additive(n, m, src, det)
        assert simple >= exact - 1e-12  # dominance holds everywhere
        if exact <= 1.0 and simple <= 1.0:
            checked += 1
    assert checked > 400
