"""Lossless Corner2-EPC and Paeth-EPC compression of 32-level layout images."""

from .container import (ALL_VARIANTS, CodecVariant, CompressedBlob, aggregate_ratio, compression_ratio,
                        encode)
from .entropy import ArithModel, BackendId
from .image import (IDENTITY, SHIFT3, LayoutImage, QuantizationPolicy, TransformedImage, load_png_gray,
                    raw_size_bytes, store_png_gray)
from .pipeline import RowDecoder, decode, decode_streaming, open_blob
from .symbolizer import RleConfig, SymbolStream, desymbolize, symbolize
from .transform import Transform

__all__ = [
    "ALL_VARIANTS", "ArithModel", "BackendId", "CodecVariant", "CompressedBlob", "IDENTITY",
    "LayoutImage", "QuantizationPolicy", "RleConfig", "RowDecoder", "SHIFT3", "SymbolStream",
    "Transform", "TransformedImage", "aggregate_ratio", "compression_ratio", "decode",
    "decode_streaming", "desymbolize", "encode", "load_png_gray", "open_blob", "raw_size_bytes",
    "store_png_gray", "symbolize",
]
