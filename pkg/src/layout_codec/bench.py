"""Benchmark harness: per-layer compression ratios and encode/decode timings.

Every (layer, variant) pair is round-tripped and verified before any number
is recorded.  Aggregate ratios are total raw bytes over total compressed
bytes.  Times are the median of ``repeats`` runs, in milliseconds.
"""

from __future__ import annotations

import csv
import io
import os
import statistics
import tempfile
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numba
import numpy as np

from .container import ALL_VARIANTS, CodecVariant, compressed_size, encode
from .errors import CodecError, VerificationFailure
from .image import LayoutImage, QuantizationPolicy, SHIFT3, load_png_gray, raw_size_bytes, read_raw
from .pipeline import RowDecoder
from .transform import _paeth_prediction_array

PNG_LIKE = "png-like"
CSV_COLUMNS = ["layer", "variant", "raw_bytes", "comp_bytes", "ratio", "enc_ms", "dec_ms"]


# -- png-like baseline -------------------------------------------------------
# Paeth-filtered rows (PNG filter type 4, one byte per pixel) through zlib.
# Not libpng output: no chunk framing, no adaptive filter choice.


def png_like_encode(img: LayoutImage) -> bytes:
    px = img.pixels
    res = ((px.astype(np.int16) - _paeth_prediction_array(px)) & 0xFF).astype(np.uint8)
    filtered = np.empty((img.height, img.width + 1), dtype=np.uint8)
    filtered[:, 0] = 4
    filtered[:, 1:] = res
    return zlib.compress(filtered.tobytes(), 9)


@numba.njit(cache=True)
def _png_unfilter(filtered, out):
    rows, cols = out.shape
    for y in range(rows):
        for x in range(cols):
            a = np.int32(out[y, x - 1]) if x > 0 else 0
            b = np.int32(out[y - 1, x]) if y > 0 else 0
            c = np.int32(out[y - 1, x - 1]) if x > 0 and y > 0 else 0
            if y == 0 and x == 0:
                pred = 0
            elif y == 0:
                pred = a
            elif x == 0:
                pred = b
            else:
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                pred = a if pa <= pb and pa <= pc else (b if pb <= pc else c)
            out[y, x] = (np.int32(filtered[y, x + 1]) + pred) & 0xFF


def png_like_decode(data: bytes, width: int, height: int) -> LayoutImage:
    filtered = np.frombuffer(zlib.decompress(data), dtype=np.uint8).reshape(height, width + 1)
    out = np.empty((height, width), dtype=np.uint8)
    _png_unfilter(filtered, out)
    return LayoutImage(out)


# -- report ------------------------------------------------------------------


@dataclass
class BenchRow:
    layer: str
    variant: str
    raw_bytes: int
    comp_bytes: int
    enc_ms: float | None = None
    dec_ms: float | None = None

    @property
    def ratio(self) -> float:
        return self.raw_bytes / self.comp_bytes


@dataclass
class VariantSummary:
    variant: str
    raw_bytes: int
    comp_bytes: int
    enc_ms: tuple[float, float, float] | None  # best, worst, average
    dec_ms: tuple[float, float, float] | None

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.raw_bytes, self.comp_bytes)


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    variants: list[str] = field(default_factory=list)
    parity: bool = False
    failures: list[tuple[str, str, str]] = field(default_factory=list)  # layer, variant, reason

    @property
    def layers(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.layer)
        return list(seen)

    def rows_for(self, variant: str) -> list[BenchRow]:
        return [r for r in self.rows if r.variant == variant]

    def summary(self, variant: str) -> VariantSummary:
        rows = self.rows_for(variant)
        raw = sum(r.raw_bytes for r in rows)
        comp = sum(r.comp_bytes for r in rows)

        def stats(xs):
            xs = [x for x in xs if x is not None]
            return (min(xs), max(xs), sum(xs) / len(xs)) if xs else None

        return VariantSummary(variant, raw, comp, stats(r.enc_ms for r in rows), stats(r.dec_ms for r in rows))

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)

        def ms(x):
            return "" if x is None or not timing else f"{x:.3f}"

        for r in self.rows:
            w.writerow([r.layer, r.variant, r.raw_bytes, r.comp_bytes, f"{r.ratio:.4f}", ms(r.enc_ms), ms(r.dec_ms)])
        for v in self.variants:
            s = self.summary(v)
            w.writerow(["TOTAL", v, s.raw_bytes, s.comp_bytes, f"{float(s.ratio):.4f}",
                        ms(s.enc_ms[2] if s.enc_ms else None), ms(s.dec_ms[2] if s.dec_ms else None)])
        return buf.getvalue()

    def to_markdown(self, timing: bool = True) -> str:
        lines = ["| Layer | " + " | ".join(self.variants) + " |",
                 "|---" * (len(self.variants) + 1) + "|"]
        by_key = {(r.layer, r.variant): r for r in self.rows}
        for layer in self.layers:
            cells = [f"{by_key[layer, v].ratio:.2f}" if (layer, v) in by_key else "-" for v in self.variants]
            lines.append(f"| {layer} | " + " | ".join(cells) + " |")
        lines.append("| Total | " + " | ".join(f"{float(self.summary(v).ratio):.2f}" for v in self.variants) + " |")
        if timing and any(r.enc_ms is not None for r in self.rows):
            lines += ["", "| Algorithm | Enc best (ms) | Enc worst (ms) | Enc average (ms) "
                          "| Dec best (ms) | Dec worst (ms) | Dec average (ms) |",
                      "|---|---|---|---|---|---|---|"]
            for v in self.variants:
                s = self.summary(v)
                e, d = s.enc_ms, s.dec_ms
                lines.append(f"| {v} | {e[0]:.1f} | {e[1]:.1f} | {e[2]:.1f} | {d[0]:.1f} | {d[1]:.1f} | {d[2]:.1f} |")
        return "\n".join(lines) + "\n"


# -- running -----------------------------------------------------------------


def _decode_verify(data: bytes, img: LayoutImage) -> None:
    dec = RowDecoder(data)
    for y, row in enumerate(dec):
        if not np.array_equal(row, img.pixels[y]):
            raise VerificationFailure(f"row {y} differs after decode")


def _decode_only(data: bytes) -> None:
    dec = RowDecoder(data)
    for _ in dec:
        pass


def _median_ms(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times)


def bench_layer(layer: str, img: LayoutImage, variants: Sequence[CodecVariant | str], *,
                parity: bool = False, timing: bool = True, io_inclusive: bool = False,
                repeats: int = 3, workdir: str | None = None,
                failures: list | None = None) -> list[BenchRow]:
    """Rows for one layer.  A variant that fails verification gets no row;
    it is appended to ``failures`` when given, otherwise the error propagates."""
    rows = []
    for v in variants:
        try:
            row = _bench_one(layer, img, v, parity=parity, timing=timing, io_inclusive=io_inclusive,
                             repeats=repeats, workdir=workdir)
        except VerificationFailure as exc:
            if failures is None:
                raise
            failures.append((layer, v if v == PNG_LIKE else v.name, str(exc)))
        else:
            rows.append(row)
    return rows


def _bench_one(layer, img, v, *, parity, timing, io_inclusive, repeats, workdir) -> BenchRow:
    raw = raw_size_bytes(img)
    if v == PNG_LIKE:
        data = png_like_encode(img)
        if png_like_decode(data, img.width, img.height) != img:
            raise VerificationFailure(f"{layer}/{PNG_LIKE}: round trip mismatch")
        row = BenchRow(layer, PNG_LIKE, raw, len(data))
        if timing:
            row.enc_ms = _median_ms(lambda: png_like_encode(img), repeats)
            row.dec_ms = _median_ms(lambda: png_like_decode(data, img.width, img.height), repeats)
        return row

    blob = encode(img, v)
    data = blob.to_bytes()
    try:
        _decode_verify(data, img)
    except VerificationFailure as exc:
        raise VerificationFailure(f"{layer}/{v.name}: {exc}") from exc
    except CodecError as exc:
        raise VerificationFailure(f"{layer}/{v.name}: decode failed: {exc}") from exc
    row = BenchRow(layer, v.name, raw, compressed_size(blob, parity))
    if not timing:
        return row
    if not io_inclusive:
        row.enc_ms = _median_ms(lambda: encode(img, v), repeats)
        row.dec_ms = _median_ms(lambda: _decode_only(data), repeats)
        return row

    fd, path = tempfile.mkstemp(suffix=".c2ep", dir=workdir)
    os.close(fd)

    def enc():
        with open(path, "wb") as f:
            f.write(encode(img, v).to_bytes())
            f.flush()
            os.fsync(f.fileno())

    def dec():
        with open(path, "rb") as f:
            _decode_only(f.read())

    try:
        row.enc_ms = _median_ms(enc, repeats)
        row.dec_ms = _median_ms(dec, repeats)
    finally:
        os.unlink(path)
    return row


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("LAYOUT_CODEC_THREADS", "1")))
    except ValueError:
        return 1


def run_bench(corpus: Iterable[tuple[str, LayoutImage]], variants: Sequence[CodecVariant | str] = ALL_VARIANTS,
              *, parity: bool = False, timing: bool = True, io_inclusive: bool = False,
              repeats: int = 3, threads: int | None = None) -> BenchReport:
    corpus = list(corpus)
    if not corpus:
        raise ValueError("empty corpus")
    variants = [v if isinstance(v, CodecVariant) or v == PNG_LIKE else CodecVariant.parse(*v.split("-"))
                for v in variants]
    names = [v if v == PNG_LIKE else v.name for v in variants]
    threads = threads or worker_count()

    failures: list[tuple[str, str, str]] = []

    def one(item):
        layer, img = item
        return bench_layer(layer, img, variants, parity=parity, timing=timing,
                           io_inclusive=io_inclusive, repeats=repeats, failures=failures)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            per_layer = list(pool.map(one, corpus))
    else:
        per_layer = [one(item) for item in corpus]
    return BenchReport([r for rows in per_layer for r in rows], names, parity, failures)


def load_corpus(directory: str | Path, policy: QuantizationPolicy = SHIFT3) -> list[tuple[str, LayoutImage]]:
    """Layer images (``*.png`` or raw ``*.limg``) in name order."""
    out = []
    for path in sorted(Path(directory).iterdir()):
        if path.suffix.lower() == ".png":
            out.append((path.stem, load_png_gray(path.read_bytes(), policy)))
        elif path.suffix.lower() == ".limg":
            out.append((path.stem, read_raw(path.read_bytes())))
    return out
