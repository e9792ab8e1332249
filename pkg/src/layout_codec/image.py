"""Raster image types, PNG / raw I/O and 8-bit to 32-level quantization."""

from __future__ import annotations

import io
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import InvalidImage, MalformedPng, NotGrayscale8, QuantizationViolation

DOSE_LEVELS = 32
MAX_DOSE = DOSE_LEVELS - 1
CORNER2_MIN, CORNER2_MAX = -62, 62

RAW_MAGIC = b"LIMG"
_RAW_HEADER = struct.Struct("<4sII")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LayoutImage:
    """C x R raster of dose levels in 0..31, stored row-major as ``pixels[y, x]``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidImage(f"expected a non-empty 2-D raster, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > MAX_DOSE):
                raise InvalidImage("dose levels must lie in 0..31")
            px = px.astype(np.uint8)
        elif px.size and px.max() > MAX_DOSE:
            raise InvalidImage("dose levels must lie in 0..31")
        if not px.flags.c_contiguous or px.flags.writeable:
            px = np.array(px, dtype=np.uint8, order="C")
        object.__setattr__(self, "pixels", _frozen(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LayoutImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None

    @classmethod
    def from_rows(cls, rows) -> "LayoutImage":
        return cls(np.array(rows, dtype=np.int64))


@dataclass(frozen=True)
class TransformedImage:
    """Corner2-EPC output: same geometry as the source, values in -62..62."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidImage(f"expected a non-empty 2-D raster, got shape {v.shape}")
        if v.size and (v.min() < CORNER2_MIN or v.max() > CORNER2_MAX):
            raise InvalidImage("transformed values must lie in -62..62")
        v = np.array(v, dtype=np.int8, order="C")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TransformedImage):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(np.array_equal(self.values, other.values))

    __hash__ = None


@dataclass(frozen=True)
class QuantizationPolicy:
    """How 8-bit PNG samples map onto the 32 dose levels.

    ``identity`` accepts samples already in 0..31, ``shift3`` keeps the top
    five bits, ``table`` applies an explicit 256-entry map.
    """

    mode: str = "shift3"
    level_table: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        if self.mode not in ("identity", "shift3", "table"):
            raise ValueError(f"unknown quantization mode {self.mode!r}")
        if self.mode == "table":
            if self.level_table is None or len(self.level_table) != 256:
                raise ValueError("table mode needs a 256-entry level_table")
            if any(not 0 <= int(v) <= MAX_DOSE for v in self.level_table):
                raise ValueError("level_table entries must lie in 0..31")
            object.__setattr__(self, "level_table", tuple(int(v) for v in self.level_table))

    def quantize(self, samples: np.ndarray) -> np.ndarray:
        samples = np.asarray(samples, dtype=np.uint8)
        if self.mode == "identity":
            if samples.size and samples.max() > MAX_DOSE:
                raise QuantizationViolation(
                    f"identity policy saw sample {int(samples.max())} > {MAX_DOSE}"
                )
            return samples.copy()
        if self.mode == "shift3":
            return samples >> 3
        return np.asarray(self.level_table, dtype=np.uint8)[samples]

    def dequantize(self, doses: np.ndarray) -> np.ndarray:
        doses = np.asarray(doses, dtype=np.uint8)
        if self.mode == "identity":
            return doses.copy()
        if self.mode == "shift3":
            return doses << 3
        # first sample mapping to each level; levels absent from the table cannot be stored
        inverse = np.full(DOSE_LEVELS, -1, dtype=np.int16)
        for sample in range(255, -1, -1):
            inverse[self.level_table[sample]] = sample
        out = inverse[doses]
        if out.size and out.min() < 0:
            raise QuantizationViolation("level_table does not cover every dose in the image")
        return out.astype(np.uint8)


SHIFT3 = QuantizationPolicy("shift3")
IDENTITY = QuantizationPolicy("identity")


def load_png_gray(data: bytes, policy: QuantizationPolicy = SHIFT3) -> LayoutImage:
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.format != "PNG":
                raise MalformedPng(f"not a PNG stream (detected {im.format})")
            if im.mode != "L":
                raise NotGrayscale8(f"expected 8-bit grayscale PNG, got mode {im.mode}")
            samples = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MalformedPng(str(exc)) from exc
    return LayoutImage(policy.quantize(samples))


def store_png_gray(img: LayoutImage, policy: QuantizationPolicy = SHIFT3) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(policy.dequantize(img.pixels), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def raw_size_bytes(img: LayoutImage) -> int:
    """Uncompressed size at one byte per pixel."""
    return img.width * img.height


def write_raw(img: LayoutImage) -> bytes:
    return _RAW_HEADER.pack(RAW_MAGIC, img.width, img.height) + img.pixels.tobytes()


def read_raw(data: bytes) -> LayoutImage:
    if len(data) < _RAW_HEADER.size:
        raise InvalidImage("raw image shorter than its header")
    magic, width, height = _RAW_HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        raise InvalidImage(f"bad raw magic {magic!r}")
    body = memoryview(data)[_RAW_HEADER.size:]
    if len(body) != width * height:
        raise InvalidImage(f"raw body has {len(body)} bytes, expected {width * height}")
    return LayoutImage(np.frombuffer(body, dtype=np.uint8).reshape(height, width))


class PngRowWriter:
    """Write an 8-bit grayscale PNG one row at a time.

    Rows are deflated as they arrive and flushed as IDAT chunks, so only
    the compressor window and one row are held in memory.
    """

    _IDAT_TARGET = 1 << 16

    def __init__(self, fh, width: int, height: int, policy: QuantizationPolicy = SHIFT3):
        self._fh = fh
        self.width = width
        self.height = height
        self.policy = policy
        self.rows_written = 0
        self._z = zlib.compressobj(6)
        self._pending = bytearray()
        fh.write(b"\x89PNG\r\n\x1a\n")
        self._chunk(b"IHDR", struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0))

    def _chunk(self, tag: bytes, body: bytes):
        self._fh.write(struct.pack(">I", len(body)) + tag + body
                       + struct.pack(">I", zlib.crc32(tag + body) & 0xFFFFFFFF))

    def __call__(self, doses: np.ndarray):
        self.write_row(doses)

    def write_row(self, doses: np.ndarray):
        if self.rows_written >= self.height:
            raise InvalidImage("more rows than the declared height")
        samples = self.policy.dequantize(np.asarray(doses))
        if samples.shape != (self.width,):
            raise InvalidImage(f"row has shape {samples.shape}, expected ({self.width},)")
        self._pending += self._z.compress(b"\x00" + samples.tobytes())
        if len(self._pending) >= self._IDAT_TARGET:
            self._chunk(b"IDAT", bytes(self._pending))
            self._pending.clear()
        self.rows_written += 1

    def close(self):
        if self.rows_written != self.height:
            raise InvalidImage(f"wrote {self.rows_written} of {self.height} rows")
        self._pending += self._z.flush()
        self._chunk(b"IDAT", bytes(self._pending))
        self._pending.clear()
        self._chunk(b"IEND", b"")
