import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tofcodes.errors import NonIntegerCodeLength
from tofcodes.model import (
    BinaryCodeMatrix,
    CameraConfig,
    SceneResponse,
    ShiftVector,
    derive_grid,
    validate_config,
)


def test_prototype_grid():
    g = derive_grid(CameraConfig(f_m=448, f_r=3.5, n_steps=8, fwhm=0.4, m=14, n_deg=3))
    assert g.n == 128
    assert g.n_samples == 1024
    assert g.chip_duration == pytest.approx(2.232142857, abs=1e-9)
    assert g.gamma_sr == 8
    assert g.n_samples * g.dt == pytest.approx(g.period, rel=1e-9)


def test_identity_grid():
    g = derive_grid(CameraConfig(f_m=1, f_r=1, n_steps=1, fwhm=0.4, m=2, n_deg=1))
    assert (g.n, g.n_samples, g.gamma_sr) == (1, 1, 1)


def test_sigma_from_fwhm():
    # independent evaluation: FWHM = 2 sqrt(2 ln 2) sigma
    expected = 0.4 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    assert expected == pytest.approx(0.169864, abs=1e-6)
    assert derive_grid(CameraConfig()).sigma == pytest.approx(expected, rel=1e-15)


def test_non_integer_code_length():
    with pytest.raises(NonIntegerCodeLength):
        derive_grid(CameraConfig(f_m=448, f_r=3.3))


def test_float_noise_in_ratio_is_accepted():
    g = derive_grid(CameraConfig(f_m=448.0, f_r=448.0 / 128 * (1 + 1e-12)))
    assert g.n == 128


@pytest.mark.parametrize(
    "cfg, expected",
    [
        (CameraConfig.prototype(), []),
        (CameraConfig(n_deg=15, m=14), ["n_deg exceeds m"]),
        (CameraConfig(f_m=448, f_r=3.3), ["f_m/f_r not integer"]),
    ],
)
def test_validate_config(cfg, expected):
    assert validate_config(cfg) == expected


def test_validate_config_lists_every_violation():
    v = validate_config(CameraConfig(f_m=-1, n_steps=0, fwhm=0, m=1, n_deg=0))
    assert len(v) == 5


@given(
    n=st.integers(1, 300),
    n_steps=st.integers(1, 32),
    f_m=st.floats(1.0, 2000.0),
)
def test_gamma_sr_identity(n, n_steps, f_m):
    cfg = CameraConfig(f_m=f_m, f_r=f_m / n, n_steps=n_steps)
    g = derive_grid(cfg)
    assert g.gamma_sr == n_steps
    assert g.gamma_sr * g.n == g.n_samples
    assert g.n_samples * g.dt == pytest.approx(g.period, rel=1e-9)
    assert derive_grid(cfg) == g


def test_sigma_monotone_in_fwhm():
    sigmas = [derive_grid(CameraConfig(fwhm=f)).sigma for f in (0.05, 0.1, 0.4, 1.0, 3.0)]
    assert all(a < b for a, b in zip(sigmas, sigmas[1:]))


def test_code_matrix_rejects_non_binary():
    with pytest.raises(ValueError):
        BinaryCodeMatrix([[0, 2]])


def test_code_matrix_is_immutable():
    c = BinaryCodeMatrix([[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        c.entries[0, 0] = 0


def test_column_support_roundtrip():
    supports = [(0, 2), (1, 2), (0, 1)]
    c = BinaryCodeMatrix.from_supports(3, supports)
    assert c.column_support() == supports
    assert list(c.column_degrees()) == [2, 2, 2]


def test_scene_response_validation():
    x = SceneResponse(5, (1, 3), (2.0, 0.5))
    assert list(x.dense()) == [0, 2.0, 0, 0.5, 0]
    with pytest.raises(ValueError):
        SceneResponse(5, (1, 1), (1.0, 1.0))
    with pytest.raises(ValueError):
        SceneResponse(5, (5,), (1.0,))
    with pytest.raises(ValueError):
        SceneResponse(5, (0,), (0.0,))


def test_shift_vector_range():
    assert ShiftVector([0, 3], 4).offsets == (0, 3)
    with pytest.raises(ValueError):
        ShiftVector([4], 4)
