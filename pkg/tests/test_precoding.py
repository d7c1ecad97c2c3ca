import itertools
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_gara.channel import assemble_channel, steering_vector
from mimo_gara.errors import InvalidConfigError, InvalidInputError
from mimo_gara.precoding import (
    build_rf_beamformer,
    effective_channel,
    fdp_precoder,
    quantized_grid,
    rzf_precoder,
    select_all_beams,
    select_group_beams,
    subcarrier_precoder,
)
from mimo_gara.scenario import ArrayGeometry, GroupSpec, draw_realization


def _random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_grid_endpoints():
    grid = quantized_grid(ArrayGeometry(16, 2))
    assert grid.lambda_x[0] == pytest.approx(-0.9375)
    assert grid.lambda_x[-1] == pytest.approx(0.9375)
    np.testing.assert_allclose(grid.lambda_y, [-0.5, 0.5])
    assert grid.size == 32
    assert np.all(np.diff(grid.lambda_x) > 0) and np.all(np.abs(grid.lambda_x) < 1)


def test_grid_steering_vectors_orthonormal():
    geom = ArrayGeometry(4, 4, 0.5)
    grid = quantized_grid(geom)
    vecs = [steering_vector(x, y, geom) for x, y in itertools.product(grid.lambda_x, grid.lambda_y)]
    for p, q in itertools.combinations(range(len(vecs)), 2):
        assert abs(np.vdot(vecs[p], vecs[q])) < 1e-10
    for v in vecs:
        assert abs(np.vdot(v, v) - 1) < 1e-12


def test_zero_spread_group_on_grid_point():
    geom = ArrayGeometry(2, 2)
    grid = quantized_grid(geom)
    # sin(45) cos(45) = sin(45) sin(45) = 0.5 -> grid pair (1, 1)
    group = GroupSpec(45.0, 45.0, 0.0, 0.0, 1)
    assert select_group_beams(group, grid, 1) == [(1, 1)]


def test_table_selection_counts_and_disjointness(table_config):
    grid = quantized_grid(table_config.geometry)
    independent = [set(select_group_beams(g, grid, 12)) for g in table_config.groups]
    assert all(len(s) == 12 for s in independent)
    for a, b in itertools.combinations(independent, 2):
        assert not a & b
    joint = select_all_beams(table_config.groups, grid, 12)
    assert [set(s) for s in joint] == independent
    assert sum(len(s) for s in joint) == 36


def test_contested_pair_goes_to_higher_score():
    geom = ArrayGeometry(4, 4)
    grid = quantized_grid(geom)
    wide = GroupSpec(45.0, 45.0, 10.0, 10.0, 1)
    point = GroupSpec(45.0, 45.0, 0.0, 0.0, 1)
    sel = select_all_beams([wide, point], grid, 2)
    flat = [p for s in sel for p in s]
    assert len(set(flat)) == 4
    # the zero-spread group scores its beam at 1.0, higher than the wide group
    assert sel[1][0] == select_group_beams(point, grid, 1)[0]


def test_selection_rejects_oversized_request():
    grid = quantized_grid(ArrayGeometry(2, 2))
    with pytest.raises(InvalidConfigError):
        select_group_beams(GroupSpec(60, 0, 1, 1, 1), grid, 5)


def test_table_beamformer_invariants(table_config):
    grid = quantized_grid(table_config.geometry)
    rf = build_rf_beamformer(table_config.groups, grid, table_config.geometry, 12)
    f = rf.matrix_f
    assert f.shape == (256, 36)
    np.testing.assert_allclose(np.abs(f), 1 / 16, atol=1e-12)
    assert np.abs(f.conj().T @ f - np.eye(36)).max() < 1e-10
    assert rf.group_blocks == [slice(0, 12), slice(12, 24), slice(24, 36)]
    assert len(set(rf.selected_pairs)) == 36


def test_single_beam_beamformer():
    geom = ArrayGeometry(4, 4)
    rf = build_rf_beamformer([GroupSpec(60, 30, 5, 5, 1)], quantized_grid(geom), geom, 1)
    assert rf.matrix_f.shape == (16, 1)
    assert np.linalg.norm(rf.matrix_f) == pytest.approx(1.0)


def test_duplicate_selection_rejected():
    geom = ArrayGeometry(4, 4)
    groups = [GroupSpec(60, 30, 5, 5, 1), GroupSpec(60, 210, 5, 5, 1)]
    with pytest.raises(InvalidConfigError):
        build_rf_beamformer(groups, quantized_grid(geom), geom, 1, selections=[[(0, 0)], [(0, 0)]])


def test_unitary_f_preserves_norms(table_config, rng):
    grid = quantized_grid(table_config.geometry)
    f = build_rf_beamformer(table_config.groups, grid, table_config.geometry, 12).matrix_f
    b = _random_complex(rng, 36, 15)
    np.testing.assert_allclose(np.linalg.norm(f @ b, axis=0), np.linalg.norm(b, axis=0), rtol=1e-10)


def test_effective_channel_basic(rng):
    e = steering_vector(0.2, -0.4, ArrayGeometry(3, 3))[:, None]
    h = _random_complex(rng, 1, 9)
    np.testing.assert_allclose(effective_channel(h, e), h @ e)
    np.testing.assert_array_equal(effective_channel(np.zeros((2, 9)), e), 0)
    with pytest.raises(InvalidInputError):
        effective_channel(np.zeros((2, 8)), e)


def test_group_energy_concentrates_in_own_block(table_config):
    cfg = replace(table_config, subcarriers=2)
    grid = quantized_grid(cfg.geometry)
    rf = build_rf_beamformer(cfg.groups, grid, cfg.geometry, 12)
    for r in range(100):
        users = draw_realization(cfg, np.random.default_rng([17, r]))
        eff = effective_channel(assemble_channel(users, cfg).per_subcarrier, rf)
        for k, user in enumerate(users):
            energy = [np.sum(np.abs(eff[:, k, blk]) ** 2, axis=-1) for blk in rf.group_blocks]
            own = energy[user.group_index]
            for g, other in enumerate(energy):
                if g != user.group_index:
                    assert np.all(own >= other)


def test_rzf_identity_closed_form():
    np.testing.assert_allclose(rzf_precoder(np.eye(3), 1 / 3, 3), 0.5 * np.eye(3), atol=1e-15)


def test_rzf_single_user():
    eff = np.zeros((1, 4))
    eff[0, 0] = 1
    b = rzf_precoder(eff, 0.1, 1)
    expected = np.zeros((4, 1))
    expected[0, 0] = 1 / 1.1
    np.testing.assert_allclose(b, expected, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 4), st.floats(1e-4, 10.0), st.integers(0, 2**32 - 1))
def test_rzf_defining_system_residual(k, extra, alpha, seed):
    rng = np.random.default_rng(seed)
    eff = _random_complex(rng, k, k + extra)
    b = rzf_precoder(eff, alpha, k)
    lhs = (eff.conj().T @ eff + k * alpha * np.eye(k + extra)) @ b
    rhs = eff.conj().T
    assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(rhs).max())


def test_rzf_batched_matches_loop(rng):
    eff = _random_complex(rng, 5, 3, 6)
    batched = rzf_precoder(eff, 0.01, 3)
    for i in range(5):
        np.testing.assert_allclose(batched[i], rzf_precoder(eff[i], 0.01, 3), rtol=1e-12)


def test_rzf_rejects_bad_alpha():
    with pytest.raises(InvalidConfigError):
        rzf_precoder(np.eye(2), 0.0, 2)


def test_fdp_closed_form_and_identity(rng):
    np.testing.assert_allclose(fdp_precoder(np.eye(4), 0.25, 4), 0.5 * np.eye(4), atol=1e-15)
    h = _random_complex(rng, 3, 8)
    np.testing.assert_allclose(fdp_precoder(h, 0.05, 3), rzf_precoder(h @ np.eye(8), 0.05, 3))


def test_subcarrier_precoder_bundle(small_config):
    users = draw_realization(small_config, np.random.default_rng(2))
    h = assemble_channel(users, small_config).per_subcarrier[0]
    rf = build_rf_beamformer(small_config.groups, quantized_grid(small_config.geometry),
                             small_config.geometry, 2)
    alpha = small_config.sigma2 / small_config.total_power_w
    sp = subcarrier_precoder(h, rf, alpha)
    scale = np.abs(sp.effective_channel).max()
    np.testing.assert_allclose(sp.effective_channel, h @ rf.matrix_f, atol=1e-12 * scale)
    assert sp.precoder_b.shape == (4, 4)
    assert math.isclose(sp.regularization_alpha, alpha)
