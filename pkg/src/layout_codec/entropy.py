"""Entropy backends for the byte-mapped symbol stream.

* plain   - one byte per symbol, no further coding
* arith   - carry-less 32-bit range coder over an adaptive order-0 model
* deflate - zlib-framed DEFLATE (RFC 1950 / RFC 1951)

Arith payload layout: u32 little-endian symbol count, then the coder bytes.
"""

from __future__ import annotations

import enum
import struct
import zlib
from dataclasses import dataclass
from typing import Iterator

import numba
import numpy as np

from .errors import CorruptStream, SymbolOutOfAlphabet


class BackendId(enum.IntEnum):
    PLAIN = 0
    ARITH = 1
    DEFLATE = 2


# -- plain -----------------------------------------------------------------


def plain_encode(data: bytes) -> bytes:
    return bytes(data)


def plain_decode(data: bytes) -> bytes:
    return bytes(data)


# -- deflate ---------------------------------------------------------------

DEFLATE_LEVEL = 9


def deflate_encode(data: bytes) -> bytes:
    return zlib.compress(bytes(data), DEFLATE_LEVEL)


def deflate_decode(data: bytes) -> bytes:
    try:
        d = zlib.decompressobj()
        out = d.decompress(bytes(data))
        if not d.eof or d.unused_data:
            raise CorruptStream("deflate stream is truncated or followed by garbage")
        return out
    except zlib.error as exc:
        raise CorruptStream(f"deflate: {exc}") from exc


def deflate_decode_exact(data: bytes, length: int, chunk: int = 1 << 16) -> np.ndarray:
    """Inflate a stream that must produce exactly ``length`` bytes.

    Output goes straight into one preallocated array, so the peak footprint
    is the decoded size plus one ``chunk`` rather than zlib's growing buffer.
    """
    out = np.empty(length, dtype=np.uint8)
    o = 0
    d = zlib.decompressobj()
    src = memoryview(data)
    # input goes in small slices too: unconsumed_tail is a copy of whatever was not consumed
    step = 1 << 12
    i = 0
    try:
        tail = src[:0]
        while not d.eof:
            if not tail:
                if i >= len(src):
                    piece = d.decompress(b"", chunk)
                    if not piece:
                        break
                else:
                    tail = src[i:i + step]
                    i += step
                    continue
            else:
                piece = d.decompress(tail, chunk)
                tail = d.unconsumed_tail
            if o + len(piece) > length:
                raise CorruptStream(f"deflate stream inflates past the expected {length} bytes")
            out[o:o + len(piece)] = np.frombuffer(piece, dtype=np.uint8)
            o += len(piece)
    except zlib.error as exc:
        raise CorruptStream(f"deflate: {exc}") from exc
    if not d.eof or d.unused_data:
        raise CorruptStream("deflate stream is truncated or followed by garbage")
    if o != length:
        raise CorruptStream(f"deflate stream inflates to {o} bytes, expected {length}")
    return out


# -- arithmetic (range) coding -------------------------------------------

_TOP = 1 << 24
_BOT = 1 << 16
_MASK = (1 << 32) - 1
_COUNT = struct.Struct("<I")


@dataclass(frozen=True)
class ArithModel:
    """Adaptive order-0 frequency model parameters.

    Every symbol starts at frequency 1; coding a symbol adds ``increment``;
    when the total passes ``rescale_limit`` all counts are halved (rounding
    up, so none reaches zero).
    """

    alphabet_size: int = 256
    increment: int = 32
    rescale_limit: int = 1 << 15

    def __post_init__(self):
        if not 1 <= self.alphabet_size <= 256:
            raise ValueError("alphabet_size must lie in 1..256")
        if self.rescale_limit + self.increment > _BOT:
            raise ValueError("model total could exceed the coder's 2**16 precision bound")
        if self.alphabet_size > self.rescale_limit:
            raise ValueError("alphabet larger than the rescale limit")

    def initial_table(self) -> np.ndarray:
        return np.ones(self.alphabet_size, dtype=np.int64)


@numba.njit(cache=True)
def _model_update(freq, st, s, inc, limit):
    freq[s] += inc
    st[2] += inc
    if st[2] > limit:
        total = 0
        for i in range(freq.shape[0]):
            freq[i] = (freq[i] + 1) >> 1
            total += freq[i]
        st[2] = total


@numba.njit(cache=True)
def _arith_encode_chunk(symbols, freq, st, out, inc, limit):
    # st: [low, range, total]
    n_out = 0
    low = st[0]
    rng = st[1]
    for k in range(symbols.shape[0]):
        s = symbols[k]
        cum = 0
        for i in range(s):
            cum += freq[i]
        rng //= st[2]
        low += cum * rng
        rng *= freq[s]
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = (-low) & (_BOT - 1)
            else:
                break
            out[n_out] = (low >> 24) & 0xFF
            n_out += 1
            rng = (rng << 8) & _MASK
            low = (low << 8) & _MASK
        _model_update(freq, st, s, inc, limit)
    st[0] = low
    st[1] = rng
    return n_out


@numba.njit(cache=True)
def _arith_decode_chunk(data, freq, st, out, n, inc, limit):
    # st: [low, range, total, code, read position]; returns symbols decoded,
    # or -1 on a corrupt/truncated stream
    low = st[0]
    rng = st[1]
    code = st[3]
    rp = st[4]
    size = data.shape[0]
    for k in range(n):
        total = st[2]
        rng //= total
        value = (code - low) // rng
        if value < 0 or value >= total:
            return -1
        cum = 0
        s = 0
        while cum + freq[s] <= value:
            cum += freq[s]
            s += 1
        low += cum * rng
        rng *= freq[s]
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = (-low) & (_BOT - 1)
            else:
                break
            if rp >= size:
                return -1
            code = ((code << 8) | data[rp]) & _MASK
            rp += 1
            rng = (rng << 8) & _MASK
            low = (low << 8) & _MASK
        out[k] = s
        _model_update(freq, st, s, inc, limit)
        st[0] = low
        st[1] = rng
        st[3] = code
        st[4] = rp
    return n


class ArithEncoder:
    """Incremental encoder; call :meth:`push` any number of times, then :meth:`finish`."""

    def __init__(self, model: ArithModel):
        self.model = model
        self.freq = model.initial_table()
        self._st = np.array([0, _MASK, model.alphabet_size], dtype=np.int64)
        self._out = bytearray()
        self.count = 0

    def push(self, symbols) -> None:
        sym = np.ascontiguousarray(np.frombuffer(bytes(symbols), dtype=np.uint8)
                                   if isinstance(symbols, (bytes, bytearray, memoryview))
                                   else np.asarray(symbols), dtype=np.int64)
        if sym.size == 0:
            return
        if sym.min() < 0 or sym.max() >= self.model.alphabet_size:
            raise SymbolOutOfAlphabet(
                f"symbol {int(sym.max())} outside alphabet of {self.model.alphabet_size}")
        buf = np.empty(4 * sym.size + 16, dtype=np.uint8)
        n = _arith_encode_chunk(sym, self.freq, self._st, buf, self.model.increment, self.model.rescale_limit)
        self._out += buf[:n].tobytes()
        self.count += int(sym.size)

    def finish(self) -> bytes:
        if self.count == 0:
            return _COUNT.pack(0)
        low = int(self._st[0])
        tail = bytes(((low >> s) & 0xFF) for s in (24, 16, 8, 0))
        return _COUNT.pack(self.count) + bytes(self._out) + tail


class ArithDecoder:
    """Pull-based decoder: symbols come out one at a time or in small chunks."""

    def __init__(self, data: bytes, model: ArithModel):
        data = bytes(data)
        if len(data) < _COUNT.size:
            raise CorruptStream("arith payload shorter than its symbol count")
        (self.count,) = _COUNT.unpack_from(data)
        self.model = model
        self.freq = model.initial_table()
        self._data = np.frombuffer(data, dtype=np.uint8)
        self.remaining = self.count
        self._st = np.array([0, _MASK, model.alphabet_size, 0, _COUNT.size], dtype=np.int64)
        self._primed = False

    def _prime(self):
        if len(self._data) < _COUNT.size + 4:
            raise CorruptStream("arith payload truncated")
        code = 0
        for i in range(4):
            code = (code << 8) | int(self._data[_COUNT.size + i])
        self._st[3] = code
        self._st[4] = _COUNT.size + 4
        self._primed = True

    def read(self, n: int) -> np.ndarray:
        """Decode up to ``n`` more symbols."""
        n = min(n, self.remaining)
        out = np.empty(n, dtype=np.uint8)
        if n == 0:
            return out
        if not self._primed:
            self._prime()
        got = _arith_decode_chunk(self._data, self.freq, self._st, out, n,
                                  self.model.increment, self.model.rescale_limit)
        if got != n:
            raise CorruptStream("arith payload is truncated or corrupt")
        self.remaining -= n
        return out

    def pull(self) -> int:
        if self.remaining == 0:
            raise CorruptStream("no symbols left in arith payload")
        return int(self.read(1)[0])

    def chunks(self, size: int = 4096) -> Iterator[np.ndarray]:
        while self.remaining:
            yield self.read(size)

    def check_exhausted(self):
        if self.remaining:
            raise CorruptStream(f"{self.remaining} arith symbols left undecoded")
        if self.count and int(self._st[4]) != len(self._data):
            raise CorruptStream("trailing bytes after arith payload")


def arith_encode(data, model: ArithModel | None = None) -> bytes:
    enc = ArithEncoder(model or ArithModel())
    enc.push(data)
    return enc.finish()


def arith_decode(data: bytes, model: ArithModel | None = None) -> bytes:
    dec = ArithDecoder(data, model or ArithModel())
    out = dec.read(dec.count).tobytes()
    dec.check_exhausted()
    return out


def encode_backend(backend: BackendId, data: bytes, alphabet_size: int = 256) -> bytes:
    backend = BackendId(backend)
    if backend == BackendId.PLAIN:
        return plain_encode(data)
    if backend == BackendId.ARITH:
        return arith_encode(data, ArithModel(alphabet_size))
    return deflate_encode(data)


def decode_backend(backend: BackendId, data: bytes, alphabet_size: int = 256) -> bytes:
    backend = BackendId(backend)
    if backend == BackendId.PLAIN:
        return plain_decode(data)
    if backend == BackendId.ARITH:
        return arith_decode(data, ArithModel(alphabet_size))
    return deflate_decode(data)
