"""Command-line interface: ``layout-codec {encode,decode,inspect,bench,synth}``.

Errors go to stderr as ``error[CODE]: message`` and the process exits with the
error class's status (see ``errors.py``); usage errors exit with 2.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .container import BACKEND_NAMES, TRANSFORM_NAMES, CodecVariant, CompressedBlob, compression_ratio, encode
from .errors import CodecError
from .image import (RAW_MAGIC, LayoutImage, PngRowWriter, QuantizationPolicy, load_png_gray, read_raw,
                    store_png_gray, write_raw)
from .pipeline import RowDecoder
from .synth import SynthLayoutSpec, synth_layout


def _load_image(path: Path, policy: QuantizationPolicy):
    data = path.read_bytes()
    if data[:4] == RAW_MAGIC:
        return read_raw(data)
    return load_png_gray(data, policy)


def cmd_encode(args) -> int:
    policy = QuantizationPolicy(args.quant)
    img = _load_image(Path(args.input), policy)
    blob = encode(img, CodecVariant.parse(args.variant, args.backend))
    Path(args.output).write_bytes(blob.to_bytes())
    ratio = compression_ratio(blob, img, parity=args.parity_ratio)
    print(f"{args.input}: {img.width}x{img.height} -> {blob.size} bytes, "
          f"ratio {float(ratio):.3f}{' (parity)' if args.parity_ratio else ''}")
    return 0


def cmd_decode(args) -> int:
    dec = RowDecoder(Path(args.input).read_bytes())
    out = Path(args.output)
    if args.raw or out.suffix.lower() == ".limg":
        # raw output is a single buffer; only PNG output streams
        pixels = np.empty((dec.height, dec.width), dtype=np.uint8)
        for y, row in enumerate(dec):
            pixels[y] = row
        out.write_bytes(write_raw(LayoutImage(pixels)))
        return 0
    with open(out, "wb") as fh:
        writer = PngRowWriter(fh, dec.width, dec.height, QuantizationPolicy(args.quant))
        dec.write_to(writer)
        writer.close()
    return 0


def cmd_inspect(args) -> int:
    blob = CompressedBlob.from_bytes(Path(args.input).read_bytes())
    raw = blob.width * blob.height
    print(f"variant:          {blob.variant.name}")
    print(f"M, N:             {blob.M}, {blob.N}")
    print(f"width x height:   {blob.width} x {blob.height}")
    print(f"rleStreamLength:  {blob.rle_length}")
    print(f"payload bytes:    {len(blob.payload)}")
    print(f"file bytes:       {blob.size}")
    print(f"ratio:            {float(compression_ratio(blob, raw)):.3f}")
    print(f"ratio (parity):   {float(compression_ratio(blob, raw, parity=True)):.3f}")
    return 0


def cmd_bench(args) -> int:
    corpus = bench_mod.load_corpus(args.dir, QuantizationPolicy(args.quant))
    if not corpus:
        raise CodecError(f"no .png or .limg layers in {args.dir}")
    variants = list(args.variants or [v.name for v in bench_mod.ALL_VARIANTS])
    if args.png_like:
        variants.append(bench_mod.PNG_LIKE)
    report = bench_mod.run_bench(corpus, variants, parity=args.parity_ratio, timing=not args.no_timing,
                                 io_inclusive=args.io_inclusive, repeats=args.repeats)
    csv_text = report.to_csv(timing=not args.no_timing)
    md_text = report.to_markdown(timing=not args.no_timing)
    if args.csv:
        Path(args.csv).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.markdown:
        Path(args.markdown).write_text(md_text)
    else:
        sys.stdout.write("\n" + md_text)
    for layer, variant, reason in report.failures:
        print(f"error[VERIFICATION_FAILURE]: {layer}/{variant}: {reason}", file=sys.stderr)
    return 60 if report.failures else 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.layers):
        spec = SynthLayoutSpec(width=args.size, height=args.size, seed=args.seed * 1000 + i)
        img = synth_layout(spec)
        path = out / f"layer{i:02d}.png"
        path.write_bytes(store_png_gray(img, QuantizationPolicy(args.quant)))
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="layout-codec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def quant(sp):
        sp.add_argument("--quant", choices=["shift3", "identity"], default="shift3",
                        help="8-bit PNG sample <-> dose mapping (default: shift3)")

    e = sub.add_parser("encode", help="compress a layer image (PNG or raw .limg)")
    e.add_argument("input")
    e.add_argument("output")
    e.add_argument("--variant", choices=sorted(TRANSFORM_NAMES), default="corner2")
    e.add_argument("--backend", choices=list(BACKEND_NAMES), default="plain")
    e.add_argument("--parity-ratio", action="store_true",
                   help="report the ratio with a 12-byte overhead instead of the real 20-byte header")
    quant(e)
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="decompress row by row to PNG (or raw with --raw / .limg)")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--raw", action="store_true")
    quant(d)
    d.set_defaults(func=cmd_decode)

    i = sub.add_parser("inspect", help="print the header of a .c2ep file")
    i.add_argument("input")
    i.set_defaults(func=cmd_inspect)

    b = sub.add_parser("bench", help="benchmark every variant over a directory of layers")
    b.add_argument("--dir", required=True)
    b.add_argument("--variants", nargs="+", metavar="T-B",
                   choices=[v.name for v in bench_mod.ALL_VARIANTS])
    b.add_argument("--png-like", action="store_true", help="add the zlib-over-Paeth-filter baseline")
    b.add_argument("--io-inclusive", action="store_true",
                   help="time the compressed file write (encode) and read (decode)")
    b.add_argument("--parity-ratio", action="store_true")
    b.add_argument("--no-timing", action="store_true")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--csv")
    b.add_argument("--markdown")
    quant(b)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("synth", help="write a seed-deterministic synthetic corpus")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--size", type=int, default=2048)
    s.add_argument("--layers", type=int, default=1)
    s.add_argument("--out", default="corpus")
    quant(s)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CodecError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_status
    except OSError as exc:
        print(f"error[IO_ERROR]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
