import numpy as np
import pytest

from weldvision.core import BBox, GeometryError, GrayImage
from weldvision.ingest import (
    DecodeError,
    LetterboxTransform,
    RawSpec,
    SpecError,
    crop,
    decode_raw,
    letterbox,
    to_grayscale,
)


class TestRawSpec:
    def test_bad_depth(self):
        with pytest.raises(SpecError):
            RawSpec(4, 4, bit_depth=12)

    def test_bad_window(self):
        with pytest.raises(SpecError):
            RawSpec(4, 4, bit_depth=16, window=(100, 100))

    def test_byte_length(self):
        assert RawSpec(10, 4, bit_depth=16).byte_length == 80


class TestDecodeRaw:
    def test_8bit_identity(self):
        img = decode_raw(bytes([0, 255]), RawSpec(2, 1))
        assert img.pixels.tolist() == [[0, 255]]

    def test_16bit_windowed(self):
        data = (512).to_bytes(2, "little")
        spec = RawSpec(1, 1, bit_depth=16, window=(0, 1024))
        assert decode_raw(data, spec).pixels.tolist() == [[128]]

    def test_16bit_big_endian(self):
        data = (512).to_bytes(2, "big")
        spec = RawSpec(1, 1, bit_depth=16, endianness="big", window=(0, 1024))
        assert decode_raw(data, spec).pixels.tolist() == [[128]]

    def test_length_mismatch(self):
        with pytest.raises(DecodeError):
            decode_raw(b"\x00\x01\x02", RawSpec(2, 1, bit_depth=16))


class TestToGrayscale:
    def test_gray_fixed_point(self):
        for v in (0, 17, 128, 255):
            arr = np.full((2, 2, 3), v, dtype=np.uint8)
            assert np.all(to_grayscale(arr).pixels == v)

    def test_red_weight(self):
        arr = np.zeros((1, 1, 3), dtype=np.uint8)
        arr[..., 0] = 255
        assert to_grayscale(arr).pixels.tolist() == [[76]]

    def test_byte_compression_ratio(self):
        rng = np.random.default_rng(0)
        arr = rng.integers(0, 256, (12, 10, 3), dtype=np.uint8)
        out = to_grayscale(arr)
        assert out.pixels.nbytes * 3 == arr.nbytes

    def test_bad_shape(self):
        with pytest.raises(DecodeError):
            to_grayscale(np.zeros((4, 4), dtype=np.uint8))


class TestCrop:
    @pytest.fixture
    def image(self):
        rng = np.random.default_rng(1)
        return GrayImage(rng.integers(0, 256, (12, 16), dtype=np.uint8))

    def test_full_extent_identity(self, image):
        assert crop(image, BBox(0, 0, 16, 12)).same_pixels(image)

    def test_single_pixel(self, image):
        out = crop(image, BBox(3, 5, 4, 6))
        assert out.pixels.tolist() == [[int(image.pixels[5, 3])]]

    def test_reassembly(self, image):
        left = crop(image, BBox(0, 0, 7, 12))
        right = crop(image, BBox(7, 0, 16, 12))
        joined = np.concatenate([left.pixels, right.pixels], axis=1)
        assert np.array_equal(joined, image.pixels)

    def test_non_integer_rect(self, image):
        with pytest.raises(GeometryError):
            crop(image, BBox(0.5, 0, 4, 4))

    def test_out_of_bounds(self, image):
        with pytest.raises(GeometryError):
            crop(image, BBox(0, 0, 17, 4))


class TestLetterbox:
    def test_already_conformant(self):
        img = GrayImage(np.zeros((640, 640), dtype=np.uint8))
        out, t = letterbox(img, 640)
        assert out.same_pixels(img)
        assert t.scale == 1.0 and t.pad_left == 0 and t.pad_top == 0

    def test_wide_frame(self):
        img = GrayImage(np.zeros((720, 1280), dtype=np.uint8))
        out, t = letterbox(img, 640)
        assert (out.width, out.height) == (640, 384)
        assert t.pad_top == 12
        assert t.scale == pytest.approx(0.5)

    def test_fill_value(self):
        img = GrayImage(np.zeros((720, 1280), dtype=np.uint8))
        out, _ = letterbox(img, 640, fill=114)
        assert int(out.pixels[0, 0]) == 114

    def test_box_round_trip(self):
        img = GrayImage(np.zeros((720, 1280), dtype=np.uint8))
        _, t = letterbox(img, 640)
        rng = np.random.default_rng(2)
        for _ in range(50):
            x0, y0 = rng.uniform(0, 600, 2)
            box = BBox(x0, y0, x0 + rng.uniform(1, 100), y0 + rng.uniform(1, 100))
            back = t.invert_box(t.apply_box(box))
            for a, b in zip(
                (box.xmin, box.ymin, box.xmax, box.ymax),
                (back.xmin, back.ymin, back.xmax, back.ymax),
            ):
                assert a == pytest.approx(b, abs=1e-6)

    def test_bad_target(self):
        img = GrayImage(np.zeros((64, 64), dtype=np.uint8))
        with pytest.raises(SpecError):
            letterbox(img, 100, stride=32)
