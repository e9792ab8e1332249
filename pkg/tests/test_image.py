import io

import numpy as np
import pytest
from hypothesis import given, settings
from PIL import Image

from layout_codec.errors import InvalidImage, MalformedPng, NotGrayscale8, QuantizationViolation
from layout_codec.image import (IDENTITY, SHIFT3, LayoutImage, PngRowWriter, QuantizationPolicy,
                                load_png_gray, raw_size_bytes, read_raw, store_png_gray, write_raw)

from strategies import layout_images


def png_bytes(samples, mode="L"):
    buf = io.BytesIO()
    Image.fromarray(np.asarray(samples, dtype=np.uint8), mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def test_load_shift3_endpoints():
    img = load_png_gray(png_bytes([[0, 248]]), SHIFT3)
    assert img.width == 2 and img.height == 1
    assert img.pixels.tolist() == [[0, 31]]


def test_load_identity():
    assert load_png_gray(png_bytes([[7]]), IDENTITY).pixels.tolist() == [[7]]


def test_load_shift3_truncates():
    assert load_png_gray(png_bytes([[8, 15, 16]]), SHIFT3).pixels.tolist() == [[1, 1, 2]]


def test_identity_rejects_8bit_values():
    with pytest.raises(QuantizationViolation):
        load_png_gray(png_bytes([[0, 32]]), IDENTITY)


def test_rejects_colour_png():
    rgb = np.zeros((2, 2, 3), dtype=np.uint8)
    with pytest.raises(NotGrayscale8):
        load_png_gray(png_bytes(rgb, mode="RGB"))


def test_rejects_garbage():
    with pytest.raises(MalformedPng):
        load_png_gray(b"definitely not a png")
    with pytest.raises(MalformedPng):
        load_png_gray(png_bytes([[1, 2]])[:30])


def test_store_shift3_and_identity():
    stored = store_png_gray(LayoutImage([[0, 31]]), SHIFT3)
    assert np.asarray(Image.open(io.BytesIO(stored))).tolist() == [[0, 248]]
    stored = store_png_gray(LayoutImage([[7]]), IDENTITY)
    assert np.asarray(Image.open(io.BytesIO(stored))).tolist() == [[7]]


@settings(max_examples=100)
@given(layout_images())
def test_png_round_trip(img):
    assert load_png_gray(store_png_gray(img, SHIFT3), SHIFT3) == img
    assert load_png_gray(store_png_gray(img, IDENTITY), IDENTITY) == img


def test_shift3_is_monotone_and_onto():
    q = SHIFT3.quantize(np.arange(256, dtype=np.uint8))
    assert set(q.tolist()) == set(range(32))
    assert np.all(np.diff(q.astype(int)) >= 0)


def test_level_table_policy():
    table = tuple(min(31, v // 5) for v in range(256))
    policy = QuantizationPolicy("table", table)
    img = load_png_gray(png_bytes([[0, 5, 255]]), policy)
    assert img.pixels.tolist() == [[0, 1, 31]]
    assert load_png_gray(store_png_gray(img, policy), policy) == img
    with pytest.raises(ValueError):
        QuantizationPolicy("table", (40,) * 256)


@pytest.mark.parametrize("shape, expected", [
    ((30324, 30403), 921_940_572),
    ((1, 1), 1),
    ((79050, 79050), 6_248_902_500),
])
def test_raw_size_bytes(shape, expected):
    # a geometry stand-in avoids allocating full-size rasters
    class Geometry:
        height, width = shape

    assert raw_size_bytes(Geometry) == expected
    if shape == (1, 1):
        assert raw_size_bytes(LayoutImage([[3]])) == 1


def test_layout_image_validation():
    with pytest.raises(InvalidImage):
        LayoutImage([[32]])
    with pytest.raises(InvalidImage):
        LayoutImage([[-1]])
    with pytest.raises(InvalidImage):
        LayoutImage(np.zeros((0, 3)))
    img = LayoutImage([[1, 2], [3, 4]])
    assert not img.pixels.flags.writeable


def test_raw_format_round_trip(rng):
    img = LayoutImage(rng.integers(0, 32, (5, 9)))
    data = write_raw(img)
    assert data[:4] == b"LIMG"
    assert int.from_bytes(data[4:8], "little") == 9
    assert int.from_bytes(data[8:12], "little") == 5
    assert len(data) == 12 + 45
    assert read_raw(data) == img
    with pytest.raises(InvalidImage):
        read_raw(data[:-1])


def test_png_row_writer_matches_whole_image(rng):
    img = LayoutImage(rng.integers(0, 32, (300, 257)))
    fh = io.BytesIO()
    w = PngRowWriter(fh, img.width, img.height)
    for row in img.pixels:
        w(row)
    w.close()
    assert load_png_gray(fh.getvalue()) == img
    with pytest.raises(InvalidImage):
        PngRowWriter(io.BytesIO(), 3, 2).close()
