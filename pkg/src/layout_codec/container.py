"""The ``.c2ep`` file format and whole-image encoding.

Header (20 bytes, little-endian)::

    0  4s  magic "C2EP"
    4  u8  version (1)
    5  u8  variant = transform << 4 | backend
    6  u8  log2(M)
    7  u8  log2(N)
    8  u32 width
    12 u32 height
    16 u32 symbol stream length in bytes (before the entropy backend)
    20 ..  payload
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .entropy import BackendId, encode_backend
from .errors import BadMagic, BlockMisalignment, HeaderError, InvalidConfig, UnsupportedVersion
from .image import LayoutImage, raw_size_bytes
from .symbolizer import LITERAL_COUNT, RleConfig, SymbolStream, rle_feed, rle_finish
from .transform import Transform, corner2_forward_row_into, paeth_forward_row_into

MAGIC = b"C2EP"
VERSION = 1
HEADER = struct.Struct("<4sBBBBIII")
HEADER_SIZE = HEADER.size
MAX_ALPHABET = 255
PARITY_OVERHEAD = 12  # width, height and stream length, four bytes each

TRANSFORM_NAMES = {"corner2": Transform.CORNER2, "paeth": Transform.PAETH}
BACKEND_NAMES = {"plain": BackendId.PLAIN, "arith": BackendId.ARITH, "deflate": BackendId.DEFLATE}


@dataclass(frozen=True)
class CodecVariant:
    transform: Transform = Transform.CORNER2
    backend: BackendId = BackendId.PLAIN

    def __post_init__(self):
        object.__setattr__(self, "transform", Transform(self.transform))
        object.__setattr__(self, "backend", BackendId(self.backend))

    @property
    def byte(self) -> int:
        return (int(self.transform) << 4) | int(self.backend)

    @classmethod
    def from_byte(cls, b: int) -> "CodecVariant":
        try:
            return cls(Transform(b >> 4), BackendId(b & 0x0F))
        except ValueError as exc:
            raise HeaderError(f"unknown codec variant byte 0x{b:02x}") from exc

    @classmethod
    def parse(cls, transform: str, backend: str) -> "CodecVariant":
        return cls(TRANSFORM_NAMES[transform], BACKEND_NAMES[backend])

    @property
    def name(self) -> str:
        t = {v: k for k, v in TRANSFORM_NAMES.items()}[self.transform]
        b = {v: k for k, v in BACKEND_NAMES.items()}[self.backend]
        return f"{t}-{b}"

    def alphabet_size(self, cfg: RleConfig) -> int:
        return cfg.alphabet_size(self.transform)


ALL_VARIANTS = tuple(CodecVariant(t, b) for t in Transform for b in BackendId)


@dataclass(frozen=True)
class CompressedBlob:
    variant: CodecVariant
    m_exp: int
    n_exp: int
    width: int
    height: int
    rle_length: int
    payload: bytes

    @property
    def M(self) -> int:
        return 1 << self.m_exp

    @property
    def N(self) -> int:
        return 1 << self.n_exp

    @property
    def rle_config(self) -> RleConfig:
        return RleConfig(self.width, self.M, self.N)

    @property
    def size(self) -> int:
        return HEADER_SIZE + len(self.payload)

    def header_bytes(self) -> bytes:
        return HEADER.pack(MAGIC, VERSION, self.variant.byte, self.m_exp, self.n_exp,
                           self.width, self.height, self.rle_length)

    def to_bytes(self) -> bytes:
        return self.header_bytes() + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "CompressedBlob":
        data = bytes(data)
        if len(data) < HEADER_SIZE:
            raise HeaderError(f"file has {len(data)} bytes, header needs {HEADER_SIZE}")
        magic, version, variant, m_exp, n_exp, width, height, rle_length = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise BadMagic(f"bad magic {magic!r}")
        if version != VERSION:
            raise UnsupportedVersion(f"unsupported format version {version}")
        if not (1 <= m_exp <= 16 and 1 <= n_exp <= 16):
            raise HeaderError(f"digit base exponents out of range: {m_exp}, {n_exp}")
        if width < 1 or height < 1:
            raise HeaderError(f"empty image geometry {width}x{height}")
        return cls(CodecVariant.from_byte(variant), m_exp, n_exp, width, height, rle_length,
                   data[HEADER_SIZE:])


@numba.njit(cache=True)
def _fused_encode(px, transform, L, lits, M, N, max_x):
    rows, cols = px.shape
    out = np.empty(rows * cols + 8, dtype=np.uint16)
    st = np.zeros(4, dtype=np.int64)
    tr_row = np.empty(cols, dtype=np.int32)
    is_corner2 = transform == 0
    for y in range(rows):
        prev = px[y - 1] if y > 0 else px[0]
        if is_corner2:
            corner2_forward_row_into(px[y], prev, y > 0, tr_row)
        else:
            paeth_forward_row_into(px[y], prev, y > 0, tr_row)
        rle_feed(st, tr_row, out, L, lits, is_corner2, M, N, max_x)
    rle_finish(st, out, lits, M, N, max_x)
    return out[:st[3]].copy()


def symbolize_image(img: LayoutImage, transform: Transform, cfg: RleConfig) -> SymbolStream:
    """Transform and symbolize in a single pass over the rows."""
    transform = Transform(transform)
    cfg = cfg.with_width(img.width)
    codes = _fused_encode(img.pixels, int(transform), cfg.L, LITERAL_COUNT[transform],
                          cfg.M, cfg.N, cfg.max_x_run or 0)
    return SymbolStream(codes, img.width * img.height, transform, cfg.M, cfg.N)


def encode(img: LayoutImage, variant: CodecVariant = CodecVariant(), cfg: RleConfig = RleConfig()) -> CompressedBlob:
    cfg = cfg.with_width(img.width)
    if cfg.L != img.width:
        raise BlockMisalignment(f"the container needs L == image width ({cfg.L} != {img.width})")
    if cfg.max_x_run is not None:
        raise InvalidConfig("the container format has no field for max_x_run")
    alphabet = variant.alphabet_size(cfg)
    if alphabet > MAX_ALPHABET:
        raise InvalidConfig(f"alphabet of {alphabet} symbols exceeds the {MAX_ALPHABET} allowed for byte backends")
    stream = symbolize_image(img, variant.transform, cfg)
    data = stream.to_bytes()
    payload = encode_backend(variant.backend, data, alphabet)
    return CompressedBlob(variant, cfg.M.bit_length() - 1, cfg.N.bit_length() - 1,
                          img.width, img.height, len(data), payload)


def compression_ratio(blob: CompressedBlob, img: LayoutImage | int, parity: bool = False) -> Fraction:
    """Raw size over compressed size; ``parity`` counts only the 12 header bytes
    (width, height, stream length) instead of the full 20-byte header."""
    raw = img if isinstance(img, int) else raw_size_bytes(img)
    overhead = PARITY_OVERHEAD if parity else HEADER_SIZE
    return Fraction(raw, len(blob.payload) + overhead)


def compressed_size(blob: CompressedBlob, parity: bool = False) -> int:
    return len(blob.payload) + (PARITY_OVERHEAD if parity else HEADER_SIZE)


def aggregate_ratio(raw_sizes, compressed_sizes) -> Fraction:
    """Total raw over total compressed, never a mean of per-layer ratios."""
    return Fraction(sum(raw_sizes), sum(compressed_sizes))
