import math

import numpy as np
import pytest

from rdc_reid.descriptor import (
    FEATURE_DIM,
    CovarianceDescriptor,
    ForegroundMask,
    Image,
    covariance,
    describe,
    describe_file,
    extract_features,
    gradients,
    histogram_equalize_v,
    rgb_to_cielab,
    rgb_to_hsv,
)
from rdc_reid.divergence import stein
from rdc_reid.errors import DimensionMismatch, NotPositiveDefinite, TooFewForegroundPixels, TooFewSamples
from rdc_reid.pnm import encode_pgm, encode_ppm

import oracles


def random_image(rng, h=8, w=16):
    return Image(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


def random_mask(rng, h=8, w=16, minimum=20):
    while True:
        m = rng.random((h, w)) < rng.uniform(0.2, 0.9)
        if m.sum() >= minimum:
            return ForegroundMask(m)


class TestHsv:
    def test_white(self):
        np.testing.assert_allclose(rgb_to_hsv((255, 255, 255)), (0, 0, 1))

    def test_red(self):
        np.testing.assert_allclose(rgb_to_hsv((255, 0, 0)), (0, 1, 1))

    def test_green(self):
        np.testing.assert_allclose(rgb_to_hsv((0, 255, 0)), (1 / 3, 1, 1), atol=1e-15)

    def test_black(self):
        np.testing.assert_allclose(rgb_to_hsv((0, 0, 0)), (0, 0, 0))

    def test_matches_colorsys(self, rng):
        import colorsys

        rgb = rng.integers(0, 256, size=(2000, 3))
        got = rgb_to_hsv(rgb)
        ref = np.array([colorsys.rgb_to_hsv(*(c / 255 for c in px)) for px in rgb])
        np.testing.assert_allclose(got, ref, atol=1e-14)
        assert np.all(got[:, 0] < 1)


class TestLab:
    def test_white(self):
        L, a, b = rgb_to_cielab((255, 255, 255))
        assert L == pytest.approx(100, abs=0.01)
        assert abs(a) < 0.5 and abs(b) < 0.5

    def test_black(self):
        np.testing.assert_allclose(rgb_to_cielab((0, 0, 0)), (0, 0, 0), atol=1e-12)

    def test_gray_axis(self):
        lo, hi = rgb_to_cielab((119, 119, 119)), rgb_to_cielab((120, 120, 120))
        for v in (lo, hi):
            assert abs(v[1]) < 0.01 and abs(v[2]) < 0.01
        assert hi[0] > lo[0]

    def test_matches_skimage(self, rng):
        from skimage.color import rgb2lab

        # skimage rounds the CIE linear-segment constants (0.008856, 7.787)
        rgb = rng.integers(0, 256, size=(40, 50, 3), dtype=np.uint8)
        np.testing.assert_allclose(rgb_to_cielab(rgb), rgb2lab(rgb), atol=1e-3)

    def test_matches_scalar_oracle(self, rng):
        rgb = rng.integers(0, 256, size=(500, 3))
        ref = np.array([oracles.srgb_to_lab(*map(int, px)) for px in rgb])
        np.testing.assert_allclose(rgb_to_cielab(rgb), ref, atol=1e-10)


class TestEqualize:
    def test_constant(self):
        img = Image(np.full((4, 5, 3), 77, dtype=np.uint8))
        out = histogram_equalize_v(img)
        assert np.all(out == out[0, 0])

    def test_two_level(self):
        px = np.zeros((4, 6, 3), dtype=np.uint8)
        px[:, 3:] = 255
        out = histogram_equalize_v(Image(px))
        assert set(np.unique(out)) == {0.5, 1.0}
        assert np.all(out[:, :3] == 0.5)

    def test_uniform_is_near_identity(self):
        v = np.arange(256, dtype=np.uint8).reshape(16, 16)
        img = Image(np.stack([v, v, v], axis=-1))
        out = histogram_equalize_v(img)
        assert np.max(np.abs(out - v / 255)) <= 1 / 255

    def test_monotone(self, rng):
        img = random_image(rng, 20, 20)
        v = np.max(img.pixels, axis=-1).ravel()
        out = histogram_equalize_v(img).ravel()
        order = np.argsort(v, kind="stable")
        assert np.all(np.diff(out[order]) >= 0)
        assert out.min() > 0 and out.max() == 1.0

    def test_mask_restricts_histogram(self):
        px = np.zeros((2, 4, 3), dtype=np.uint8)
        px[:, 2:] = 200
        mask = ForegroundMask(np.array([[1, 1, 1, 0], [1, 1, 1, 0]]))
        out = histogram_equalize_v(Image(px), mask)
        # foreground: four zeros, two 200s
        assert out[0, 0] == pytest.approx(4 / 6)
        assert out[0, 2] == 1.0


class TestGradients:
    def test_constant(self):
        mag, ang = gradients(Image(np.full((5, 5, 3), 40, dtype=np.uint8)))
        assert np.all(mag == 0) and np.all(ang == 0)

    def test_vertical_step(self):
        px = np.zeros((6, 8, 3), dtype=np.uint8)
        px[:, 4:, 0] = 255
        mag, ang = gradients(Image(px))
        np.testing.assert_array_equal(mag[1:5, 3:5, 0], 1020)
        np.testing.assert_array_equal(ang[1:5, 3:5, 0], 0)
        assert np.all(mag[..., 1:] == 0)
        assert np.all(mag[:, :3, 0] == 0) and np.all(mag[:, 5:, 0] == 0)

    def test_horizontal_step(self):
        px = np.zeros((8, 6, 3), dtype=np.uint8)
        px[4:] = 255
        mag, ang = gradients(Image(px))
        np.testing.assert_array_equal(mag[3:5, 1:5], 1020)
        np.testing.assert_allclose(ang[3:5, 1:5], math.pi / 2)

    def test_angle_range(self, rng):
        _, ang = gradients(random_image(rng, 30, 30))
        assert np.all(ang > -math.pi) and np.all(ang <= math.pi)

    def test_negative_x_axis_is_pi(self):
        px = np.zeros((5, 6, 3), dtype=np.uint8)
        px[:, :3] = 255
        _, ang = gradients(Image(px))
        assert ang[2, 2, 0] == math.pi


class TestExtract:
    def test_full_mask(self, rng):
        img = random_image(rng, 5, 7)
        assert extract_features(img).shape == (35, FEATURE_DIM)

    def test_count(self, rng):
        img = random_image(rng)
        flags = np.zeros((8, 16), dtype=bool)
        flags.flat[rng.choice(128, 20, replace=False)] = True
        assert extract_features(img, ForegroundMask(flags)).shape == (20, FEATURE_DIM)

    def test_too_few(self, rng):
        flags = np.zeros((8, 16), dtype=bool)
        flags.flat[:14] = True
        with pytest.raises(TooFewForegroundPixels):
            extract_features(random_image(rng), ForegroundMask(flags))

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            extract_features(random_image(rng), ForegroundMask(np.ones((4, 4))))

    def test_row_major_coordinates(self, rng):
        img = random_image(rng, 4, 5)
        f = extract_features(img)
        np.testing.assert_array_equal(f[:, 0], np.tile(np.arange(5), 4))
        np.testing.assert_array_equal(f[:, 1], np.repeat(np.arange(4), 5))

    def test_field_ranges(self, rng):
        for _ in range(20):
            f = extract_features(random_image(rng, 12, 12), random_mask(rng, 12, 12))
            assert np.all(np.isfinite(f))
            assert np.all((f[:, 2:5] >= 0) & (f[:, 2:5] <= 1))
            assert np.all(f[:, 2] < 1)
            assert np.all((f[:, 5] >= 0) & (f[:, 5] <= 100 + 1e-9))
            assert np.all(f[:, 8:11] >= 0)
            assert np.all((f[:, 11:] > -math.pi) & (f[:, 11:] <= math.pi))


class TestCovariance:
    def test_rank_deficient_toy(self):
        with pytest.raises(NotPositiveDefinite):
            covariance([[0, 0], [2, 0]], eps=0)
        c = covariance([[0, 0], [2, 0]], eps=1e-5)
        np.testing.assert_allclose(c.matrix.values, np.diag([2 + 1e-5, 1e-5]), rtol=0, atol=1e-15)
        assert c.pixel_count == 2

    def test_zero_mean_cross(self):
        c = covariance([[1, 0], [-1, 0], [0, 1], [0, -1]], eps=0)
        np.testing.assert_allclose(c.matrix.values, 2 / 3 * np.eye(2), atol=1e-15)

    def test_repeated(self):
        c = covariance([[3.0, -1.0, 2.0]] * 5, eps=1e-5)
        np.testing.assert_array_equal(c.matrix.values, 1e-5 * np.eye(3))

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            covariance([[1.0, 2.0]])


class TestDescribe:
    def test_4x4_against_oracle(self):
        px = np.array([
            [[10, 20, 30], [200, 10, 10], [0, 0, 0], [255, 255, 255]],
            [[90, 90, 0], [12, 250, 34], [128, 128, 128], [60, 10, 200]],
            [[1, 2, 3], [250, 128, 0], [77, 77, 200], [33, 99, 165]],
            [[240, 240, 10], [5, 5, 250], [180, 60, 120], [100, 200, 50]],
        ], dtype=np.uint8)
        mask = np.ones((4, 4), dtype=bool)
        expected = oracles.covariance(oracles.features(px, mask), 1e-5)
        got = describe(Image(px)).matrix.values
        assert got.shape == (14, 14)
        np.testing.assert_allclose(got, expected, rtol=0, atol=1e-10)

    def test_random_against_oracle(self, rng):
        for _ in range(10):
            img, mask = random_image(rng), random_mask(rng)
            expected = oracles.covariance(oracles.features(img.pixels, mask.flags), 1e-5)
            got = describe(img, mask).matrix.values
            np.testing.assert_allclose(got, expected, rtol=0, atol=1e-10)

    def test_background_far_from_foreground_is_ignored(self, rng):
        for _ in range(20):
            px = rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8)
            flags = np.zeros((12, 12), dtype=bool)
            flags[2:8, 3:9] = rng.random((6, 6)) < 0.8
            flags[2, 3] = flags[7, 8] = True
            if flags.sum() < 15:
                continue
            near = np.zeros_like(flags)
            for r, c in zip(*np.nonzero(flags)):
                near[max(r - 1, 0) : r + 2, max(c - 1, 0) : c + 2] = True
            px2 = px.copy()
            px2[~near] = rng.integers(0, 256, size=(int((~near).sum()), 3))
            a = describe(Image(px), ForegroundMask(flags)).matrix.values
            b = describe(Image(px2), ForegroundMask(flags)).matrix.values
            assert a.tobytes() == b.tobytes()

    def test_deterministic(self, rng):
        img, mask = random_image(rng), random_mask(rng)
        copy = Image(img.pixels.copy())
        a, b = describe(img, mask), describe(copy, ForegroundMask(mask.flags.copy()))
        assert a.matrix.values.tobytes() == b.matrix.values.tobytes()
        assert stein(a.matrix, b.matrix) == 0.0

    def test_text_round_trip(self, rng, tmp_path):
        d = describe(random_image(rng), random_mask(rng))
        d.save(tmp_path / "x.cov")
        text = (tmp_path / "x.cov").read_text()
        assert text.startswith(f"# pixels={d.pixel_count}\n14\n")
        back = CovarianceDescriptor.load(tmp_path / "x.cov")
        assert back.pixel_count == d.pixel_count
        np.testing.assert_array_equal(back.matrix.values, d.matrix.values)

    def test_describe_file(self, rng, tmp_path):
        img, mask = random_image(rng), random_mask(rng)
        (tmp_path / "a.ppm").write_bytes(encode_ppm(img.pixels))
        (tmp_path / "a.mask.pgm").write_bytes(encode_pgm(mask.flags.astype(np.uint8) * 255))
        got = describe_file(tmp_path / "a.ppm", tmp_path / "a.mask.pgm")
        np.testing.assert_array_equal(got.matrix.values, describe(img, mask).matrix.values)
        full = describe_file(tmp_path / "a.ppm")
        assert full.pixel_count == 128
