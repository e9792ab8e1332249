"""Run-length / End-of-Block symbolization of transformed values.

Values are cut into blocks of ``L``.  Inside a block, nonzero values become
literals and interior zero runs become base-``M`` digit groups; the trailing
zeros of a block collapse into an End-of-Block mark, and each maximal run of
End-of-Block marks becomes a base-``N`` digit group.  Digit groups are written
most significant digit first without leading zeros.

Symbols travel as integer codes (the byte mapping documented in FORMAT.md)::

    literal            -> 0 .. literals-1
    zero-run digit d   -> literals + d
    end-of-block digit -> literals + M + d

with ``literals`` = 124 for Corner2-EPC (-62..-1 -> 0..61, 1..62 -> 62..123)
and 31 for Paeth-EPC (1..31 -> 0..30).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Union

import numba
import numpy as np

from .errors import (
    BlockMisalignment,
    CountMismatch,
    InvalidConfig,
    MalformedDigits,
    TruncatedStream,
    ValueOutOfRange,
)
from .transform import Transform

LITERAL_COUNT = {Transform.CORNER2: 124, Transform.PAETH: 31}
VALUE_RANGE = {Transform.CORNER2: (-62, 62), Transform.PAETH: (0, 31)}

END_OF_BLOCK = "X"


def _is_pow2(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


@dataclass(frozen=True)
class RleConfig:
    """Block length ``L``, zero-run digit base ``M`` and End-of-Block digit base ``N``.

    ``L=None`` means "one block per image row" and is resolved by the codec.
    ``max_x_run`` caps how many End-of-Block marks one digit group may cover.
    """

    L: int | None = None
    M: int = 64
    N: int = 64
    max_x_run: int | None = None

    def __post_init__(self):
        if not _is_pow2(self.M) or not _is_pow2(self.N):
            raise InvalidConfig(f"M and N must be powers of two >= 2, got M={self.M} N={self.N}")
        if self.L is not None and self.L < 1:
            raise InvalidConfig(f"block length L must be positive, got {self.L}")
        if self.max_x_run is not None and self.max_x_run < 1:
            raise InvalidConfig("max_x_run must be positive")

    def alphabet_size(self, transform: Transform = Transform.CORNER2) -> int:
        return LITERAL_COUNT[Transform(transform)] + self.M + self.N

    def with_width(self, width: int) -> "RleConfig":
        if self.L is not None:
            return self
        return RleConfig(width, self.M, self.N, self.max_x_run)


class Literal(NamedTuple):
    value: int


class ZeroRunDigit(NamedTuple):
    digit: int


class EobRunDigit(NamedTuple):
    digit: int


Symbol = Union[Literal, ZeroRunDigit, EobRunDigit]


def digits_msd_first(n: int, base: int) -> list[int]:
    """Base-``base`` digits of ``n >= 1``, most significant first."""
    if n < 1:
        raise ValueError("run lengths start at 1")
    out = []
    while n:
        n, d = divmod(n, base)
        out.append(d)
    return out[::-1]


def literal_code(value: int, transform: Transform) -> int:
    if transform == Transform.CORNER2:
        return value + 62 if value < 0 else value + 61
    return value - 1


def literal_value(code: int, transform: Transform) -> int:
    if transform == Transform.CORNER2:
        return code - 62 if code < 62 else code - 61
    return code + 1


@dataclass(frozen=True)
class SymbolStream:
    """Integer-coded symbol sequence plus the number of values it represents."""

    codes: np.ndarray
    value_count: int
    transform: Transform = Transform.CORNER2
    M: int = 64
    N: int = 64

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def alphabet_size(self) -> int:
        return LITERAL_COUNT[self.transform] + self.M + self.N

    def symbols(self) -> list[Symbol]:
        lits = LITERAL_COUNT[self.transform]
        out: list[Symbol] = []
        for c in self.codes.tolist():
            if c < lits:
                out.append(Literal(literal_value(c, self.transform)))
            elif c < lits + self.M:
                out.append(ZeroRunDigit(c - lits))
            else:
                out.append(EobRunDigit(c - lits - self.M))
        return out

    def to_bytes(self) -> bytes:
        if self.alphabet_size > 256:
            raise InvalidConfig(f"alphabet of {self.alphabet_size} symbols does not fit in a byte")
        return self.codes.astype(np.uint8).tobytes()

    @classmethod
    def from_symbols(cls, symbols: Iterable[Symbol], value_count: int,
                     transform: Transform = Transform.CORNER2, M: int = 64, N: int = 64) -> "SymbolStream":
        lits = LITERAL_COUNT[Transform(transform)]
        codes = []
        for s in symbols:
            if isinstance(s, Literal):
                codes.append(literal_code(s.value, Transform(transform)))
            elif isinstance(s, ZeroRunDigit):
                codes.append(lits + s.digit)
            else:
                codes.append(lits + M + s.digit)
        return cls(np.asarray(codes, dtype=np.uint16), value_count, Transform(transform), M, N)


def mark_end_of_blocks(values: Iterable[int], L: int) -> list[list]:
    """Intermediate form: each block with its trailing zeros replaced by ``"X"``."""
    values = list(values)
    if len(values) % L:
        raise BlockMisalignment(f"{len(values)} values do not split into blocks of {L}")
    blocks = []
    for start in range(0, len(values), L):
        block = values[start:start + L]
        end = len(block)
        while end and block[end - 1] == 0:
            end -= 1
        blocks.append(block[:end] + ([END_OF_BLOCK] if end < len(block) else []))
    return blocks


# -- encoder state machine -------------------------------------------------
#
# state[0]: position inside the current block
# state[1]: pending zero run inside the block
# state[2]: pending End-of-Block run
# state[3]: number of codes written so far

_ST_POS, _ST_ZEROS, _ST_XRUN, _ST_OUT = 0, 1, 2, 3


@numba.njit(cache=True)
def _emit_number(out, n_out, n, base, offset):
    if n < base:
        out[n_out] = offset + n
        return n_out + 1
    p = 1
    while p * base <= n:
        p *= base
    while p > 0:
        out[n_out] = offset + (n // p) % base
        n_out += 1
        p //= base
    return n_out


@numba.njit(cache=True)
def _flush_xrun(st, out, zero_base, eob_off, max_x):
    n_out = st[_ST_OUT]
    k = st[_ST_XRUN]
    if k > 0:
        if max_x > 0:
            while k > max_x:
                n_out = _emit_number(out, n_out, max_x, zero_base, eob_off)
                k -= max_x
        n_out = _emit_number(out, n_out, k, zero_base, eob_off)
        st[_ST_XRUN] = 0
    st[_ST_OUT] = n_out


@numba.njit(cache=True)
def rle_feed(st, values, out, L, lits, is_corner2, M, N, max_x):
    """Push a run of transformed values through the encoder state ``st``."""
    pos = st[_ST_POS]
    zeros = st[_ST_ZEROS]
    n_out = st[_ST_OUT]
    eob_off = lits + M
    for i in range(values.shape[0]):
        v = np.int64(values[i])
        if v != 0:
            if st[_ST_XRUN] > 0:
                st[_ST_OUT] = n_out
                _flush_xrun(st, out, N, eob_off, max_x)
                n_out = st[_ST_OUT]
            if zeros > 0:
                n_out = _emit_number(out, n_out, zeros, M, lits)
                zeros = 0
            if is_corner2:
                out[n_out] = v + 62 if v < 0 else v + 61
            else:
                out[n_out] = v - 1
            n_out += 1
        else:
            zeros += 1
        pos += 1
        if pos == L:
            pos = 0
            if zeros > 0:
                zeros = 0
                st[_ST_XRUN] += 1
                if max_x > 0 and st[_ST_XRUN] == max_x:
                    st[_ST_OUT] = n_out
                    _flush_xrun(st, out, N, eob_off, max_x)
                    n_out = st[_ST_OUT]
    st[_ST_POS] = pos
    st[_ST_ZEROS] = zeros
    st[_ST_OUT] = n_out


@numba.njit(cache=True)
def rle_finish(st, out, lits, M, N, max_x):
    _flush_xrun(st, out, N, lits + M, max_x)


@numba.njit(cache=True)
def _symbolize_kernel(values, L, lits, is_corner2, M, N, max_x):
    out = np.empty(values.shape[0] + 8, dtype=np.uint16)
    st = np.zeros(4, dtype=np.int64)
    rle_feed(st, values, out, L, lits, is_corner2, M, N, max_x)
    rle_finish(st, out, lits, M, N, max_x)
    return out[:st[_ST_OUT]].copy()


def symbolize(values, cfg: RleConfig, transform: Transform = Transform.CORNER2) -> SymbolStream:
    """Turn a flat sequence of transformed values into a symbol stream."""
    transform = Transform(transform)
    vals = np.asarray(values, dtype=np.int64).ravel()
    if cfg.L is None:
        raise InvalidConfig("symbolize needs an explicit block length L")
    if vals.size % cfg.L:
        raise BlockMisalignment(f"{vals.size} values do not split into blocks of {cfg.L}")
    lo, hi = VALUE_RANGE[transform]
    if vals.size and (vals.min() < lo or vals.max() > hi):
        raise ValueOutOfRange(f"values must lie in {lo}..{hi} for {transform.name}")
    codes = _symbolize_kernel(vals, cfg.L, LITERAL_COUNT[transform], transform == Transform.CORNER2,
                              cfg.M, cfg.N, cfg.max_x_run or 0)
    return SymbolStream(codes, int(vals.size), transform, cfg.M, cfg.N)


# -- decoder state machine -------------------------------------------------
#
# Resumable: it fills out[o:o_end] from codes[pos:end] and reports why it
# stopped.  Digit groups end when a symbol of another kind arrives (or, with
# a max_x cap, when the next digit would exceed it), so the symbol after a
# group is peeked, not consumed.
#
# dst[0]: position in block   dst[1]: open group kind (0 none, 1 zero, 2 eob)
# dst[2]: open group value    dst[3]: zeros owed to the output

OK, NEED_MORE, TRUNCATED, MALFORMED, BAD_CODE = 0, 1, 2, 3, 4

_GROUP_LIMIT = 1 << 40


@numba.njit(cache=True)
def rle_decode_into(codes, pos, end, final, dst, out, o, o_end, L, lits, is_corner2, M, N, max_x):
    eob_off = lits + M
    alphabet = lits + M + N
    while True:
        owed = dst[3]
        if owed > 0:
            n = min(owed, o_end - o)
            for i in range(n):
                out[o + i] = 0
            o += n
            dst[3] = owed - n
        if o == o_end:
            return pos, o, OK
        if pos == end:
            if not final:
                return pos, o, NEED_MORE
            if dst[1] == 2:
                dst[3] += (L - dst[0]) + (dst[2] - 1) * L
                dst[0] = 0
                dst[1] = 0
                continue
            if dst[1] == 1:
                return pos, o, MALFORMED
            return pos, o, TRUNCATED
        c = np.int64(codes[pos])
        if c >= alphabet:
            return pos, o, BAD_CODE
        if c < lits:
            kind = 0
            d = 0
        elif c < eob_off:
            kind = 1
            d = c - lits
        else:
            kind = 2
            d = c - eob_off
        g = dst[1]
        if g != 0 and (kind != g or (g == 2 and max_x > 0 and dst[2] * N + d > max_x)):
            if g == 1:
                run = dst[2]
                if dst[0] + run >= L:
                    return pos, o, MALFORMED
                dst[0] += run
                dst[3] += run
            else:
                dst[3] += (L - dst[0]) + (dst[2] - 1) * L
                dst[0] = 0
            dst[1] = 0
            continue
        pos += 1
        if kind == 0:
            if is_corner2:
                out[o] = c - 62 if c < 62 else c - 61
            else:
                out[o] = c + 1
            o += 1
            dst[0] += 1
            if dst[0] == L:
                dst[0] = 0
        elif g == 0:
            if d == 0:
                return pos - 1, o, MALFORMED
            dst[1] = kind
            dst[2] = d
        else:
            base = M if kind == 1 else N
            dst[2] = dst[2] * base + d
            if dst[2] > _GROUP_LIMIT:
                return pos - 1, o, MALFORMED


def _raise_status(status: int, where: str):
    if status == TRUNCATED:
        raise TruncatedStream(f"symbol stream ended early ({where})")
    if status == MALFORMED:
        raise MalformedDigits(f"malformed digit group ({where})")
    if status == BAD_CODE:
        raise MalformedDigits(f"symbol code outside the alphabet ({where})")
    raise AssertionError(status)


def _check_exhausted(dst: np.ndarray, pos: int, end: int):
    if pos != end or dst[1] != 0 or dst[3] != 0:
        raise CountMismatch("symbol stream describes more values than expected")


def desymbolize(stream: SymbolStream | Iterable[Symbol], cfg: RleConfig, expected_count: int,
                transform: Transform | None = None) -> np.ndarray:
    """Invert :func:`symbolize`, returning exactly ``expected_count`` values."""
    if not isinstance(stream, SymbolStream):
        stream = SymbolStream.from_symbols(stream, expected_count, transform or Transform.CORNER2, cfg.M, cfg.N)
    if cfg.L is None:
        raise InvalidConfig("desymbolize needs an explicit block length L")
    if expected_count % cfg.L:
        raise BlockMisalignment(f"{expected_count} values do not split into blocks of {cfg.L}")
    if (stream.M, stream.N) != (cfg.M, cfg.N):
        raise InvalidConfig("stream and config disagree on M/N")
    codes = np.ascontiguousarray(stream.codes)
    out = np.empty(expected_count, dtype=np.int16)
    dst = np.zeros(4, dtype=np.int64)
    tr = stream.transform
    pos, _, status = rle_decode_into(codes, 0, len(codes), True, dst, out, 0, expected_count, cfg.L,
                                     LITERAL_COUNT[tr], tr == Transform.CORNER2, cfg.M, cfg.N,
                                     cfg.max_x_run or 0)
    if status == TRUNCATED:
        raise CountMismatch(f"symbol stream describes fewer than {expected_count} values")
    if status != OK:
        _raise_status(status, f"symbol {pos}")
    _check_exhausted(dst, pos, len(codes))
    return out


class RowCursor:
    """Row-at-a-time decoder over a chunked code source (blocks are rows).

    ``chunks`` yields contiguous code arrays; only the current chunk is held.
    Pending End-of-Block balance carries across rows in the cursor state.
    """

    def __init__(self, chunks: Iterable[np.ndarray], width: int, cfg: RleConfig,
                 transform: Transform = Transform.CORNER2):
        cfg = cfg.with_width(width)
        if cfg.L != width:
            raise BlockMisalignment(f"row decoding needs L == width ({cfg.L} != {width})")
        self.width = width
        self.cfg = cfg
        self.transform = Transform(transform)
        self._lits = LITERAL_COUNT[self.transform]
        self._is_corner2 = self.transform == Transform.CORNER2
        self._chunks: Iterator[np.ndarray] = iter(chunks)
        self._buf = np.empty(0, dtype=np.uint8)
        self._pos = 0
        self._final = False
        self._dst = np.zeros(4, dtype=np.int64)
        self._max_x = cfg.max_x_run or 0
        self.consumed = 0

    @property
    def pending_zero_rows(self) -> int:
        return int(self._dst[3]) // self.width

    def _refill(self):
        self.consumed += self._pos
        try:
            chunk = next(self._chunks)
        except StopIteration:
            self._buf = self._buf[:0]
            self._final = True
        else:
            self._buf = chunk
        self._pos = 0

    def next_row_into(self, out: np.ndarray) -> np.ndarray:
        o = 0
        while True:
            pos, o, status = rle_decode_into(self._buf, self._pos, len(self._buf), self._final, self._dst,
                                             out, o, self.width, self.width, self._lits,
                                             self._is_corner2, self.cfg.M, self.cfg.N, self._max_x)
            self._pos = pos
            if status == OK:
                return out
            if status == NEED_MORE:
                self._refill()
                continue
            _raise_status(status, f"symbol {self.consumed + pos}")

    def next_row(self) -> np.ndarray:
        return self.next_row_into(np.empty(self.width, dtype=np.int16))

    def finish(self):
        """Raise unless every symbol has been consumed."""
        while not self._final and self._pos == len(self._buf):
            self._refill()
        if self._final and self._dst[1] == 2:
            self._dst[3] += (self.width - self._dst[0]) + (self._dst[2] - 1) * self.width
            self._dst[1] = 0
        _check_exhausted(self._dst, self._pos, len(self._buf))
        if not self._final:
            raise CountMismatch("symbol stream describes more values than expected")


def desymbolize_row(cursor: RowCursor) -> np.ndarray:
    return cursor.next_row()
