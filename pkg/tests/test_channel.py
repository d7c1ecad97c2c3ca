import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_gara.channel import (
    assemble_channel,
    dump_channel,
    load_channel,
    phase_response,
    steering_vector,
    user_channel,
    user_channel_factored,
)
from mimo_gara.errors import InvalidInputError
from mimo_gara.scenario import ArrayGeometry, ScenarioConfig, UserPathSet, draw_realization

unit = st.floats(-1, 1, allow_nan=False)


def _oracle_phase(gx, gy, geom):
    # explicit Kronecker product of the two axis vectors
    ax = np.array([np.exp(-2j * math.pi * geom.spacing_d * m * gx) for m in range(geom.m_x)])
    ay = np.array([np.exp(-2j * math.pi * geom.spacing_d * m * gy) for m in range(geom.m_y)])
    return np.kron(ax, ay)


def test_phase_response_broadside_is_all_ones():
    geom = ArrayGeometry(3, 5)
    np.testing.assert_array_equal(phase_response(0.0, 0.0, geom), np.ones(15))


def test_phase_response_two_element():
    np.testing.assert_allclose(phase_response(1.0, 0.0, ArrayGeometry(2, 1, 0.5)), [1, -1], atol=1e-15)


def test_phase_response_single_element():
    np.testing.assert_array_equal(phase_response(0.3, -0.7, ArrayGeometry(1, 1)), [1])


@given(unit, unit)
def test_phase_response_matches_kron_and_unit_modulus(gx, gy):
    geom = ArrayGeometry(4, 3, 0.5)
    out = phase_response(gx, gy, geom)
    np.testing.assert_allclose(out, _oracle_phase(gx, gy, geom), atol=1e-13)
    np.testing.assert_allclose(np.abs(out), 1.0, atol=1e-14)


def test_steering_vector_broadside():
    e = steering_vector(0.0, 0.0, ArrayGeometry(2, 2))
    np.testing.assert_allclose(e, 0.5)
    assert np.linalg.norm(e) == pytest.approx(1.0)


@given(unit, unit)
def test_steering_vector_unit_norm_and_definition(gx, gy):
    geom = ArrayGeometry(5, 4, 0.5)
    e = steering_vector(gx, gy, geom)
    assert abs(np.linalg.norm(e) - 1) < 1e-12
    np.testing.assert_allclose(np.conj(e) * math.sqrt(20), phase_response(gx, gy, geom), atol=1e-13)


def _single_path(distance=1.0, gain=1.0, eaod=0.0):
    return UserPathSet(0, np.array([eaod]), np.array([0.0]), np.array([gain], dtype=complex),
                       np.array([distance]))


def test_user_channel_single_broadside_path(small_config):
    C = small_config.subcarriers
    for i in range(1, C + 1):
        h = user_channel(_single_path(), i, small_config)
        np.testing.assert_allclose(h, np.exp(-2j * math.pi * i / C), atol=1e-14)


def test_user_channel_path_loss_scaling(small_config):
    cfg = replace(small_config, path_loss_exponent=3.76)
    near = user_channel(_single_path(1.0, eaod=20.0), 2, cfg)
    far = user_channel(_single_path(2.0, eaod=20.0), 2, cfg)
    np.testing.assert_allclose(far, near * 2 ** -3.76, rtol=1e-13)


def test_user_channel_rejects_bad_subcarrier(small_config):
    with pytest.raises(InvalidInputError):
        user_channel(_single_path(), 0, small_config)


def test_sum_and_factored_forms_agree(small_config):
    rng = np.random.default_rng(8)
    for user in draw_realization(small_config, rng):
        for i in range(1, small_config.subcarriers + 1):
            # independent path sum built from the explicit Kronecker oracle
            amp = user.distances_m ** -small_config.path_loss_exponent * user.gains
            oracle = sum(
                amp[l] * _oracle_phase(user.gamma_x[l], user.gamma_y[l], small_config.geometry)
                * np.exp(-2j * math.pi * (l + 1) * i / small_config.subcarriers)
                for l in range(len(amp))
            )
            scale = np.abs(oracle).max()
            np.testing.assert_allclose(user_channel(user, i, small_config), oracle, atol=1e-12 * scale)
            np.testing.assert_allclose(user_channel_factored(user, i, small_config), oracle,
                                       atol=1e-12 * scale)


def test_assemble_rows_match_user_channel(small_config):
    users = draw_realization(small_config, np.random.default_rng(11))
    real = assemble_channel(users, small_config)
    assert real.shape == (4, 4, 16)
    for i in range(4):
        for k, u in enumerate(users):
            ref = user_channel(u, i + 1, small_config)
            np.testing.assert_allclose(real.per_subcarrier[i, k], ref, atol=1e-12 * np.abs(ref).max())
    assert real.group_rows() == [slice(0, 2), slice(2, 4)]


def test_assemble_single_user():
    cfg = ScenarioConfig(geometry=ArrayGeometry(2, 2), subcarriers=1, rf_chains_per_group=1)
    cfg = cfg.with_users(3)
    users = draw_realization(cfg, np.random.default_rng(0))[:1]
    h = assemble_channel(users, cfg).per_subcarrier
    assert h.shape == (1, 1, 4)
    np.testing.assert_allclose(h[0, 0], user_channel(users[0], 1, cfg), rtol=1e-12)


def test_assemble_table_shape(table_config):
    real = assemble_channel(draw_realization(table_config, np.random.default_rng(2)), table_config)
    assert real.shape == (16, 15, 256)
    assert np.all(np.isfinite(real.per_subcarrier))


def test_assemble_rejects_unordered_groups(small_config):
    users = draw_realization(small_config, np.random.default_rng(1))
    with pytest.raises(InvalidInputError):
        assemble_channel(users[::-1], small_config)


def test_channel_is_linear_in_gains(small_config):
    users = draw_realization(small_config, np.random.default_rng(4))
    c = 0.3 - 1.7j
    scaled = [replace(u, gains=u.gains * c) for u in users]
    h = assemble_channel(users, small_config).per_subcarrier
    hs = assemble_channel(scaled, small_config).per_subcarrier
    np.testing.assert_allclose(hs, c * h, rtol=1e-12, atol=1e-12 * np.abs(h).max())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_factorization_identity_random(seed):
    cfg = ScenarioConfig(geometry=ArrayGeometry(3, 2), subcarriers=5, paths=4, rf_chains_per_group=1)
    user = draw_realization(cfg, np.random.default_rng(seed))[0]
    for i in (1, 3, 5):
        a = user_channel(user, i, cfg)
        b = user_channel_factored(user, i, cfg)
        np.testing.assert_allclose(a, b, atol=1e-12 * np.abs(a).max())


@pytest.mark.parametrize("fmt,name", [("binary", "h.bin"), ("json", "h.json")])
def test_channel_dump_round_trip(tmp_path, small_config, fmt, name):
    real = assemble_channel(draw_realization(small_config, np.random.default_rng(6)), small_config)
    path = tmp_path / name
    dump_channel(real, path, fmt)
    back = load_channel(path, real.shape)
    np.testing.assert_array_equal(back, real.per_subcarrier)


def test_binary_dump_layout(tmp_path, small_config):
    real = assemble_channel(draw_realization(small_config, np.random.default_rng(6)), small_config)
    path = tmp_path / "h.bin"
    dump_channel(real, path)
    raw = np.fromfile(path, dtype="<f8")
    assert raw.size == 2 * real.per_subcarrier.size
    first = real.per_subcarrier[0, 0, 0]
    assert (raw[0], raw[1]) == (first.real, first.imag)
