import math

import numpy as np
import pytest

from freqspiral.imaging import (ColorMapConfig, Representation, emit_field_image, hue_to_rgb,
                                phase_colors, read_ppm, signed_colors, write_ppm)
from freqspiral.lattice import GridSpec, PhaseField, RateField, Vortex, init_phase_spiral
from freqspiral.observables import AverageFrequencyField


def test_zero_field_is_white(tmp_path):
    spec = GridSpec(3, 4)
    emit_field_image(RateField(spec, np.zeros(spec.shape)), "instfreq", ColorMapConfig(),
                     tmp_path / "z.ppm")
    assert np.all(read_ppm(tmp_path / "z.ppm") == 255)


def test_signed_colour_endpoints():
    rgb = signed_colors(np.array([[1e-2, -1e-2, 1e-4, -5e-5]]), 1e-4, 1e-2)
    assert rgb[0, 0].tolist() == [0, 0, 255]
    assert rgb[0, 1].tolist() == [255, 0, 0]
    assert rgb[0, 2].tolist() == [255, 255, 255]
    assert rgb[0, 3].tolist() == [255, 255, 255]


def test_signed_colour_log_scale():
    # |v| = 10^-3 sits 40% of the way up a 10^-4 .. 10^-1.5 log scale
    v = np.array([[1e-3, -1e-3, 1.0]])
    rgb = signed_colors(v, 1e-4, 10 ** -1.5)
    shade = round(255 * (1 - 0.4))
    assert rgb[0, 0].tolist() == [shade, shade, 255]
    assert rgb[0, 1].tolist() == [255, shade, shade]
    assert rgb[0, 2].tolist() == [0, 0, 255]  # clamped above v_max


def test_phase_wheel():
    theta = np.array([[0.0, 2 * math.pi / 3, 4 * math.pi / 3, 2 * math.pi, -2 * math.pi / 3]])
    rgb = phase_colors(theta)
    assert rgb[0].tolist() == [[255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 0, 0], [0, 0, 255]]
    np.testing.assert_allclose(hue_to_rgb(np.array([1 / 12])), [[1.0, 0.5, 0.0]])


def test_constant_phase_image(tmp_path):
    spec = GridSpec(2, 3)
    emit_field_image(PhaseField(spec, np.zeros(spec.shape)), Representation.PHASE,
                     ColorMapConfig(), tmp_path / "p.ppm")
    data = (tmp_path / "p.ppm").read_bytes()
    assert data == b"P6\n3 2\n255\n" + bytes([255, 0, 0]) * 6


def test_vortex_overlay(tmp_path):
    spec = GridSpec(5, 5)
    theta = init_phase_spiral(spec)
    marks = (Vortex(1, 1, 1), Vortex(3, 2, -1))
    emit_field_image(theta, "phase", ColorMapConfig(), tmp_path / "v.ppm", marks)
    rgb = read_ppm(tmp_path / "v.ppm")
    assert rgb[1, 1].tolist() == [0, 255, 0]
    assert rgb[3, 2].tolist() == [255, 165, 0]
    np.testing.assert_array_equal(rgb[0], phase_colors(theta.theta)[0])


def test_default_ceiling():
    cfg = ColorMapConfig()
    values = np.linspace(0, 1, 101)
    assert cfg.resolve(values) == (1e-4, pytest.approx(0.99))
    assert cfg.resolve(np.zeros(10)) == (1e-4, pytest.approx(1e-3))
    assert ColorMapConfig(1e-3, 0.5).resolve(values) == (1e-3, 0.5)
    with pytest.raises(ValueError):
        ColorMapConfig(v_floor=0.0)
    with pytest.raises(ValueError):
        ColorMapConfig(v_floor=1e-2, v_max=1e-3)


def test_average_field_image(tmp_path):
    spec = GridSpec(2, 2)
    avg = AverageFrequencyField(spec, np.array([[0.1, -0.1], [0.0, 0.1]]), 0.0, 10.0)
    emit_field_image(avg, "avgfreq", ColorMapConfig(v_max=0.1), tmp_path / "a.ppm")
    rgb = read_ppm(tmp_path / "a.ppm")
    assert rgb.reshape(-1, 3).tolist() == [[0, 0, 255], [255, 0, 0], [255, 255, 255], [0, 0, 255]]


def test_write_errors_name_the_path(tmp_path):
    target = tmp_path / "missing" / "x.ppm"
    with pytest.raises(OSError, match="missing"):
        write_ppm(target, np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        write_ppm(tmp_path / "bad.ppm", np.zeros((2, 2)))


def test_no_temp_files_left(tmp_path):
    write_ppm(tmp_path / "ok.ppm", np.zeros((2, 2, 3), dtype=np.uint8))
    assert [p.name for p in tmp_path.iterdir()] == ["ok.ppm"]
