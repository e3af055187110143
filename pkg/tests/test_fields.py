import math

import numpy as np
import pytest

from gazelab.fields import (
    FieldSet,
    build_fieldset,
    field_gradient,
    gaussian_blur,
    load_topdown_map,
    sample_bilinear,
    squared_gradient_magnitude,
    to_brightness,
)
from gazelab.imageio import Image, ImageFormatError, resize_bicubic, write_pgm16

from conftest import blob_image, make_image


class TestToBrightness:
    def test_all_white_rgb(self):
        img = Image(16, 16, 3, np.ones((16, 16, 3)))
        assert np.allclose(to_brightness(img), 1.0)

    def test_all_zero(self):
        img = Image(16, 16, 3, np.zeros((16, 16, 3)))
        assert np.all(to_brightness(img) == 0.0)

    def test_pure_red_uses_luma_weight(self):
        data = np.zeros((16, 16, 3))
        data[..., 0] = 1.0
        img = Image(16, 16, 3, data)
        assert np.allclose(to_brightness(img), 0.299)

    def test_single_channel_identity(self):
        img = make_image(kind="noise")
        assert np.array_equal(to_brightness(img), img.data)


class TestGaussianBlur:
    def test_constant_invariant(self):
        f = np.full((32, 32), 0.37)
        assert np.allclose(gaussian_blur(f, 3.0), 0.37)

    def test_impulse_center_matches_kernel_normalization(self):
        # independent oracle: discrete separable kernel at radius ceil(3*sigma)
        sigma = 2.0
        f = np.zeros((41, 41))
        f[20, 20] = 1.0
        out = gaussian_blur(f, sigma)
        r = math.ceil(3 * sigma)
        taps = np.exp(-np.arange(-r, r + 1) ** 2 / (2 * sigma**2))
        k0 = (taps / taps.sum())[r]
        assert out[20, 20] == pytest.approx(k0 * k0, rel=1e-12)
        assert out[20, 20] == pytest.approx(1.0 / (2 * math.pi * sigma**2), rel=0.02)

    def test_large_sigma_reduces_total_variation(self):
        img = make_image(kind="noise", width=96, height=72, seed=3)
        def tv(f):
            return np.abs(np.diff(f, axis=0)).sum() + np.abs(np.diff(f, axis=1)).sum()
        blurred = gaussian_blur(img.data, 20.0)
        assert tv(blurred) < tv(img.data)

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            gaussian_blur(np.zeros((8, 8)), 0.0)


class TestGradients:
    def test_constant_field_zero(self):
        g = squared_gradient_magnitude(np.full((20, 30), 0.8))
        assert np.all(g == 0.0)
        assert np.all(field_gradient(np.full((20, 30), 0.8)) == 0.0)

    def test_ramp_energy_is_slope_squared(self):
        xs = np.arange(40)
        f = np.tile(0.01 * xs, (30, 1))
        g = squared_gradient_magnitude(f)
        assert np.allclose(g[1:-1, 1:-1], 1e-4)

    def test_ramp_gradient_vector(self):
        xs = np.arange(40)
        f = np.tile(0.01 * xs, (30, 1))
        grad = field_gradient(f)
        assert np.allclose(grad[1:-1, 1:-1, 0], 0.01)
        assert np.allclose(grad[1:-1, 1:-1, 1], 0.0)

    def test_step_edge_peak_value(self):
        f = np.zeros((20, 40))
        f[:, 20:] = 1.0
        g = squared_gradient_magnitude(f)
        assert g.max() == pytest.approx(0.25)
        assert g[5, 19] == pytest.approx(0.25)
        assert g[5, 20] == pytest.approx(0.25)

    def test_gaussian_bump_gradient_odd_symmetry(self):
        f = blob_image(41, 41, (20.0, 20.0), sigma=6.0)
        grad = field_gradient(f)
        for d in [(3, 0), (0, 4), (5, 2)]:
            plus = grad[20 + d[1], 20 + d[0]]
            minus = grad[20 - d[1], 20 - d[0]]
            assert np.allclose(plus, -minus, atol=1e-12)

    def test_smooth_field_matches_analytic_gradient(self):
        h, w = 60, 80
        ys, xs = np.mgrid[0:h, 0:w].astype(float)
        f = np.sin(xs / 10.0) * np.cos(ys / 10.0)
        grad = field_gradient(f)
        gx_true = np.cos(xs / 10.0) * np.cos(ys / 10.0) / 10.0
        gy_true = -np.sin(xs / 10.0) * np.sin(ys / 10.0) / 10.0
        err_x = np.abs(grad[1:-1, 1:-1, 0] - gx_true[1:-1, 1:-1]).max()
        err_y = np.abs(grad[1:-1, 1:-1, 1] - gy_true[1:-1, 1:-1]).max()
        assert err_x <= 1e-3
        assert err_y <= 1e-3


class TestBilinearSampling:
    def test_pixel_center_exact(self):
        f = np.arange(12.0).reshape(3, 4)
        assert sample_bilinear(f, (2, 1)) == f[1, 2]

    def test_midpoint_of_two_pixels(self):
        f = np.zeros((3, 4))
        f[1, 2] = 1.0
        assert sample_bilinear(f, (1.5, 1)) == pytest.approx(0.5)

    def test_outside_clamps_to_border(self):
        f = np.arange(12.0).reshape(3, 4)
        assert sample_bilinear(f, (-10, -10)) == f[0, 0]
        assert sample_bilinear(f, (100, 100)) == f[2, 3]

    def test_vector_field_sampling(self):
        vf = np.zeros((3, 4, 2))
        vf[1, 2] = (1.0, -2.0)
        out = sample_bilinear(vf, (1.5, 1))
        assert np.allclose(out, (0.5, -1.0))

    def test_local_lipschitz_continuity(self):
        rng = np.random.default_rng(11)
        f = rng.uniform(size=(25, 35))
        lip = max(np.abs(np.diff(f, axis=0)).max(), np.abs(np.diff(f, axis=1)).max())
        for _ in range(200):
            x = rng.uniform(-2, 36), rng.uniform(-2, 26)
            delta = rng.uniform(-1e-6, 1e-6, size=2)
            a = sample_bilinear(f, x)
            b = sample_bilinear(f, (x[0] + delta[0], x[1] + delta[1]))
            assert abs(a - b) <= lip * (abs(delta[0]) + abs(delta[1])) + 1e-15


class TestTopdownMap:
    def test_binary_values_preserved_at_target_size(self, tmp_path):
        values = np.array([[0, 65535], [65535, 0]] * 4, dtype=np.uint16)
        values = np.tile(values, (1, 4))
        path = tmp_path / "m.pgm"
        write_pgm16(path, values)
        out = load_topdown_map(path, (8, 8))
        assert set(np.unique(out)) == {0.0, 1.0}
        assert np.array_equal(out, values / 65535.0)

    def test_upsample_preserves_corners(self):
        src = np.array([[0.1, 0.9], [0.4, 0.6]])
        out = resize_bicubic(src, 4, 4)
        assert out[0, 0] == pytest.approx(0.1)
        assert out[0, 3] == pytest.approx(0.9)
        assert out[3, 0] == pytest.approx(0.4)
        assert out[3, 3] == pytest.approx(0.6)

    def test_constant_map_becomes_all_zero(self, tmp_path):
        path = tmp_path / "const.pgm"
        write_pgm16(path, np.full((10, 10), 30000, dtype=np.uint16))
        out = load_topdown_map(path, (16, 12))
        assert out.shape == (12, 16)
        assert np.all(out == 0.0)
        assert np.isfinite(out).all()

    def test_sixteen_bit_png_maps_load(self, tmp_path):
        from PIL import Image as PILImage

        rng = np.random.default_rng(2)
        values = (rng.uniform(size=(12, 16)) * 65535).astype(np.uint16)
        path = tmp_path / "m.png"
        PILImage.fromarray(values).save(path)
        out = load_topdown_map(path, (16, 12))
        ref = (values / 65535.0 - (values / 65535.0).min()) / np.ptp(values / 65535.0)
        assert np.allclose(out, ref, atol=1e-12)

    def test_unreadable_file_raises(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_topdown_map(tmp_path / "missing.pgm", (8, 8))

    def test_zero_area_map_raises(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n0 0\n65535\n")
        with pytest.raises(ImageFormatError):
            load_topdown_map(path, (8, 8))


class TestBuildFieldset:
    def test_uniform_image_gives_zero_energies(self):
        fs = build_fieldset(make_image(kind="uniform"))
        assert np.all(fs.edge_energy == 0.0)
        assert np.all(fs.periph_energy == 0.0)
        assert np.all(fs.grad_edge_energy == 0.0)
        assert np.all(fs.grad_periph_energy == 0.0)

    def test_compositional_identity(self, noise_fields):
        expected = field_gradient(noise_fields.edge_energy)
        assert np.array_equal(noise_fields.grad_edge_energy, expected)

    def test_topdown_loaded_and_bounded(self, tmp_path):
        rng = np.random.default_rng(5)
        values = (rng.uniform(size=(12, 16)) * 65535).astype(np.uint16)
        path = tmp_path / "map.pgm"
        write_pgm16(path, values)
        fs = build_fieldset(make_image(), m_path=path)
        assert fs.has_topdown
        assert fs.topdown.min() >= 0.0
        assert fs.topdown.max() <= 1.0
        assert np.array_equal(fs.topdown, load_topdown_map(path, (64, 48)))

    def test_all_fields_finite(self, noise_fields):
        for arr in (
            noise_fields.brightness,
            noise_fields.periphery,
            noise_fields.edge_energy,
            noise_fields.periph_energy,
            noise_fields.grad_edge_energy,
            noise_fields.grad_periph_energy,
        ):
            assert np.isfinite(arr).all()

    def test_deterministic_rebuild(self):
        img = make_image(kind="noise", seed=9)
        a = build_fieldset(img)
        b = build_fieldset(img)
        assert np.array_equal(a.edge_energy, b.edge_energy)
        assert np.array_equal(a.grad_periph_energy, b.grad_periph_energy)
        assert np.array_equal(a.periphery, b.periphery)

    def test_fields_are_immutable(self, gradient_fields):
        with pytest.raises(ValueError):
            gradient_fields.edge_energy[0, 0] = 1.0

    def test_gradient_consistency_requires_both_topdown_parts(self):
        img = make_image(kind="uniform")
        fs = build_fieldset(img)
        with pytest.raises(ValueError):
            FieldSet(
                brightness=fs.brightness,
                periphery=fs.periphery,
                edge_energy=fs.edge_energy,
                periph_energy=fs.periph_energy,
                grad_edge_energy=fs.grad_edge_energy,
                grad_periph_energy=fs.grad_periph_energy,
                retina=fs.retina,
                topdown=np.zeros((48, 64)),
                grad_topdown=None,
            )


class TestImageValidation:
    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            Image(4, 4, 1, np.zeros((4, 4)))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            Image(8, 8, 1, np.full((8, 8), 1.5))
