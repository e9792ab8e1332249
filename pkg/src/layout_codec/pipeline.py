"""Row-by-row decoding with bounded working memory.

The decoder keeps one row of transformed values, the previous output row and
the entropy coder state.  Arith payloads are decoded a chunk of symbols at a
time as the run-length decoder asks for them; plain and deflate payloads are
turned into the full symbol byte stream when the decoder is opened.
"""

from __future__ import annotations

from typing import Callable, Iterator

import numpy as np

from .container import CompressedBlob
from .entropy import ArithDecoder, ArithModel, BackendId, arith_decode, deflate_decode_exact
from .errors import CorruptStream, RangeViolation
from .image import LayoutImage
from .symbolizer import RowCursor, SymbolStream, desymbolize
from .transform import Transform, corner2_inverse_array, corner2_inverse_row_into, paeth_inverse_array, paeth_inverse_row_into

ARITH_CHUNK = 4096


def _symbol_bytes(blob: CompressedBlob) -> np.ndarray:
    """Full symbol byte stream of a plain or deflate blob, checked against the header length."""
    if blob.variant.backend == BackendId.DEFLATE:
        return deflate_decode_exact(blob.payload, blob.rle_length)
    if len(blob.payload) != blob.rle_length:
        raise CorruptStream(f"symbol stream has {len(blob.payload)} bytes, header says {blob.rle_length}")
    return np.frombuffer(blob.payload, dtype=np.uint8)


class RowDecoder:
    """Pull rows of a compressed image one at a time.

    Not shareable between threads mid-decode; independent decoders are.
    """

    def __init__(self, blob: CompressedBlob | bytes, chunk_size: int = ARITH_CHUNK):
        if not isinstance(blob, CompressedBlob):
            blob = CompressedBlob.from_bytes(blob)
        self.blob = blob
        self.width = blob.width
        self.height = blob.height
        self.variant = blob.variant
        self.rows_emitted = 0
        cfg = blob.rle_config
        alphabet = self.variant.alphabet_size(cfg)

        self._arith: ArithDecoder | None = None
        if self.variant.backend == BackendId.ARITH:
            self._arith = ArithDecoder(blob.payload, ArithModel(alphabet))
            if self._arith.count != blob.rle_length:
                raise CorruptStream(
                    f"arith symbol count {self._arith.count} != header stream length {blob.rle_length}")
            chunks = self._arith.chunks(chunk_size)
        else:
            codes = _symbol_bytes(blob)
            chunks = iter([codes]) if len(codes) else iter(())

        self._cursor = RowCursor(chunks, self.width, cfg, self.variant.transform)
        self._values = np.empty(self.width, dtype=np.int16)
        self._prev: np.ndarray | None = None
        self._paeth = self.variant.transform == Transform.PAETH

    @property
    def prev_row(self) -> np.ndarray | None:
        return self._prev

    def next_row(self) -> np.ndarray:
        if self.rows_emitted >= self.height:
            raise StopIteration
        vals = self._cursor.next_row_into(self._values)
        row = np.empty(self.width, dtype=np.uint8)
        prev = self._prev if self._prev is not None else row
        if self._paeth:
            paeth_inverse_row_into(vals, prev, self._prev is not None, row)
        elif not corner2_inverse_row_into(vals, prev, self._prev is not None, row):
            raise RangeViolation(f"row {self.rows_emitted + 1}: reconstructed pixel outside 0..31")
        self._prev = row
        self.rows_emitted += 1
        if self.rows_emitted == self.height:
            self._cursor.finish()
            if self._arith is not None:
                self._arith.check_exhausted()
        return row

    def __iter__(self) -> Iterator[np.ndarray]:
        while self.rows_emitted < self.height:
            yield self.next_row()

    def write_to(self, sink: Callable[[np.ndarray], object]) -> int:
        """Push every remaining row to ``sink``; returns the number of rows written."""
        n = 0
        for row in self:
            sink(row)
            n += 1
        return n


def open_blob(blob: CompressedBlob | bytes, chunk_size: int = ARITH_CHUNK) -> RowDecoder:
    return RowDecoder(blob, chunk_size)


def decode_streaming(blob: CompressedBlob | bytes) -> LayoutImage:
    dec = RowDecoder(blob)
    out = np.empty((dec.height, dec.width), dtype=np.uint8)
    for y, row in enumerate(dec):
        out[y] = row
    return LayoutImage(out)


def decode(blob: CompressedBlob | bytes) -> LayoutImage:
    """Whole-image decode: full symbol stream, full transformed image, then invert."""
    if not isinstance(blob, CompressedBlob):
        blob = CompressedBlob.from_bytes(blob)
    cfg = blob.rle_config
    if blob.variant.backend == BackendId.ARITH:
        data = np.frombuffer(arith_decode(blob.payload, ArithModel(blob.variant.alphabet_size(cfg))), dtype=np.uint8)
        if len(data) != blob.rle_length:
            raise CorruptStream(f"symbol stream has {len(data)} bytes, header says {blob.rle_length}")
    else:
        data = _symbol_bytes(blob)
    stream = SymbolStream(data, blob.width * blob.height,
                          blob.variant.transform, blob.M, blob.N)
    values = desymbolize(stream, cfg, blob.width * blob.height).reshape(blob.height, blob.width)
    if blob.variant.transform == Transform.CORNER2:
        return LayoutImage(corner2_inverse_array(values))
    return LayoutImage(paeth_inverse_array(values))
