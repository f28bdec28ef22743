import math

import numpy as np
import pytest

from weldvision.core import (
    Annotation,
    BBox,
    CLASS_LABELS,
    DimensionError,
    GeometryError,
    GrayImage,
    Kernel,
    KernelError,
    LABEL_TO_ID,
    NUM_CLASSES,
    convolve,
    frequency_transform,
    inverse_frequency_transform,
    psnr,
    quantize_u8,
)


class TestQuantize:
    def test_round_half_up(self):
        out = quantize_u8(np.array([0.4, 0.5, 1.5, 2.49, -3.0, 300.0]))
        assert out.tolist() == [0, 1, 2, 2, 0, 255]
        assert out.dtype == np.uint8

    def test_integers_pass_through(self):
        vals = np.arange(256, dtype=np.float64)
        assert np.array_equal(quantize_u8(vals), np.arange(256, dtype=np.uint8))


class TestGrayImage:
    def test_basic_properties(self):
        img = GrayImage(np.zeros((3, 5), dtype=np.uint8))
        assert img.width == 5 and img.height == 3

    def test_rejects_wrong_dtype(self):
        with pytest.raises(DimensionError):
            GrayImage(np.zeros((3, 5), dtype=np.float64))

    def test_rejects_wrong_ndim(self):
        with pytest.raises(DimensionError):
            GrayImage(np.zeros((3, 5, 1), dtype=np.uint8))

    def test_rejects_empty(self):
        with pytest.raises(DimensionError):
            GrayImage(np.zeros((0, 5), dtype=np.uint8))

    def test_pixels_read_only(self):
        img = GrayImage(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1

    def test_float_round_trip(self):
        rng = np.random.default_rng(0)
        px = rng.integers(0, 256, (7, 9), dtype=np.uint8)
        img = GrayImage(px)
        assert GrayImage.from_float(img.to_float()).same_pixels(img)


class TestBBox:
    def test_degenerate_rejected(self):
        with pytest.raises(GeometryError):
            BBox(5, 5, 5, 10)
        with pytest.raises(GeometryError):
            BBox(0, 0, 10, 0)

    def test_non_finite_rejected(self):
        with pytest.raises(GeometryError):
            BBox(0, 0, math.nan, 10)

    def test_geometry(self):
        b = BBox(1, 2, 4, 8)
        assert b.width == 3 and b.height == 6 and b.area == 18
        assert b.center == (2.5, 5.0)

    def test_clip(self):
        assert BBox(-5, -5, 5, 5).clip_to(10, 10) == BBox(0, 0, 5, 5)
        assert BBox(-5, -5, -1, -1).clip_to(10, 10) is None


class TestAnnotation:
    def test_class_table(self):
        assert len(CLASS_LABELS) == NUM_CLASSES == 8
        assert CLASS_LABELS[0] == "blow-hole"
        assert CLASS_LABELS[3] == "crack"
        assert CLASS_LABELS[7] == "hollow-bead"
        assert LABEL_TO_ID["slag-inclusion"] == 5

    def test_from_label(self):
        a = Annotation.from_label(BBox(0, 0, 1, 1), "undercut")
        assert a.class_id == 1 and a.class_label == "undercut"

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="unknown label: porosity"):
            Annotation.from_label(BBox(0, 0, 1, 1), "porosity")

    def test_class_id_range(self):
        with pytest.raises(ValueError):
            Annotation(BBox(0, 0, 1, 1), 8)


class TestKernel:
    def test_even_dims_rejected(self):
        with pytest.raises(KernelError):
            Kernel(np.full((2, 3), 1 / 6))

    def test_negative_rejected(self):
        with pytest.raises(KernelError):
            Kernel(np.array([[2.0, -1.0, 0.0]]))

    def test_sum_enforced(self):
        with pytest.raises(KernelError):
            Kernel(np.full((3, 3), 0.2))


class TestConvolve:
    def test_identity_kernel(self):
        rng = np.random.default_rng(1)
        img = GrayImage(rng.integers(0, 256, (6, 6), dtype=np.uint8))
        out = convolve(img, Kernel(np.array([[1.0]])))
        assert out.same_pixels(img)

    def test_constant_preserved(self):
        img = GrayImage(np.full((5, 5), 128, dtype=np.uint8))
        k = Kernel(np.full((3, 3), 1 / 9))
        assert convolve(img, k).same_pixels(img)

    def test_edge_replicate_arithmetic(self):
        img = GrayImage(np.array([[0, 255, 0]], dtype=np.uint8))
        k = Kernel(np.full((1, 3), 1 / 3))
        assert convolve(img, k).pixels.tolist() == [[85, 85, 85]]

    def test_kernel_larger_than_image(self):
        img = GrayImage(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(DimensionError):
            convolve(img, Kernel(np.full((3, 3), 1 / 9)))


class TestPsnr:
    def test_identical_images(self):
        img = GrayImage(np.full((4, 4), 7, dtype=np.uint8))
        assert psnr(img, img) == math.inf

    def test_unit_difference(self):
        a = GrayImage(np.full((4, 4), 100, dtype=np.uint8))
        b = GrayImage(np.full((4, 4), 101, dtype=np.uint8))
        assert psnr(a, b) == pytest.approx(10 * math.log10(255 ** 2), abs=1e-9)

    def test_matches_direct_mse(self):
        rng = np.random.default_rng(2)
        ref = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        noisy = quantize_u8(ref + rng.normal(0, 5, ref.shape))
        mse = float(np.mean((ref.astype(float) - noisy.astype(float)) ** 2))
        expect = 10 * math.log10(255 ** 2 / mse)
        assert psnr(GrayImage(ref), GrayImage(noisy)) == pytest.approx(expect, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            psnr(
                GrayImage(np.zeros((2, 2), dtype=np.uint8)),
                GrayImage(np.zeros((2, 3), dtype=np.uint8)),
            )


class TestFrequencyTransform:
    def test_impulse_flat_spectrum(self):
        field = np.zeros((8, 8))
        field[0, 0] = 1.0
        spec = frequency_transform(field)
        assert np.allclose(np.abs(spec), 1.0)

    def test_constant_dc_only(self):
        spec = frequency_transform(np.full((8, 8), 3.0))
        assert spec[0, 0] == pytest.approx(3.0 * 64)
        assert np.allclose(np.delete(spec.ravel(), 0), 0.0, atol=1e-9)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        field = rng.normal(0, 50, (17, 23))
        back = inverse_frequency_transform(frequency_transform(field))
        assert np.max(np.abs(field - back)) < 1e-6
