"""Corner2-EPC and Paeth-EPC image transforms.

Whole-image functions are vectorized with numpy and accept arrays with any
number of leading batch dimensions (``*_array`` variants).  Row functions
need only the current and previous row and back the streaming codec.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidImage, RangeViolation
from .image import MAX_DOSE, LayoutImage, TransformedImage


class Transform(enum.IntEnum):
    CORNER2 = 0
    PAETH = 1


# -- Corner2-EPC -----------------------------------------------------------


def corner2_forward_array(pixels: np.ndarray) -> np.ndarray:
    """Second difference over the last two axes (row, column)."""
    px = np.asarray(pixels, dtype=np.int16)
    out = px.copy()
    out[..., :, 1:] -= px[..., :, :-1]
    out[..., 1:, :] -= px[..., :-1, :]
    out[..., 1:, 1:] += px[..., :-1, :-1]
    return out.astype(np.int8)


def corner2_inverse_array(values: np.ndarray) -> np.ndarray:
    """Undo :func:`corner2_forward_array`; raises if a pixel leaves 0..31."""
    v = np.asarray(values, dtype=np.int32)
    out = np.cumsum(np.cumsum(v, axis=-1), axis=-2)
    if out.size and (out.min() < 0 or out.max() > MAX_DOSE):
        raise RangeViolation("reconstructed pixel outside 0..31; transformed data is corrupt")
    return out.astype(np.uint8)


def corner2_forward(img: LayoutImage) -> TransformedImage:
    return TransformedImage(corner2_forward_array(img.pixels))


def corner2_inverse(t: TransformedImage) -> LayoutImage:
    return LayoutImage(corner2_inverse_array(t.values))


def corner2_forward_row(row: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    row = np.asarray(row, dtype=np.int16)
    out = row.copy()
    out[1:] -= row[:-1]
    if prev is not None:
        prev = np.asarray(prev, dtype=np.int16)
        out[0] -= prev[0]
        out[1:] -= prev[1:] - prev[:-1]
    return out.astype(np.int8)


def corner2_inverse_row(values: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    # OUT(x,y) - OUT(x-1,y) = IN(x,y) + OUT(x,y-1) - OUT(x-1,y-1), so a row is
    # the previous row plus the running sum of its transformed values.
    out = np.cumsum(np.asarray(values, dtype=np.int32))
    if prev is not None:
        out += prev
    if out.min() < 0 or out.max() > MAX_DOSE:
        raise RangeViolation("reconstructed pixel outside 0..31; transformed data is corrupt")
    return out.astype(np.uint8)


@numba.njit(cache=True)
def corner2_forward_row_into(row, prev, has_prev, out):
    c = row.shape[0]
    for x in range(c):
        v = np.int32(row[x])
        if x > 0:
            v -= np.int32(row[x - 1])
        if has_prev:
            v -= np.int32(prev[x])
            if x > 0:
                v += np.int32(prev[x - 1])
        out[x] = v


@numba.njit(cache=True)
def corner2_inverse_row_into(values, prev, has_prev, out):
    """Returns False if a reconstructed pixel leaves 0..31."""
    acc = 0
    for x in range(values.shape[0]):
        acc += np.int32(values[x])
        v = acc + np.int32(prev[x]) if has_prev else acc
        if v < 0 or v > 31:
            return False
        out[x] = v
    return True


# -- Paeth-EPC -------------------------------------------------------------


@numba.njit(cache=True, inline="always")
def _paeth(left, up, upleft):
    p = left + up - upleft
    pa = abs(p - left)
    pb = abs(p - up)
    pc = abs(p - upleft)
    if pa <= pb and pa <= pc:
        return left
    if pb <= pc:
        return up
    return upleft


def paeth_predict(left: int, up: int, upleft: int) -> int:
    """Neighbour closest to ``left + up - upleft``; ties go left, then up."""
    p = left + up - upleft
    pa, pb, pc = abs(p - left), abs(p - up), abs(p - upleft)
    if pa <= pb and pa <= pc:
        return left
    if pb <= pc:
        return up
    return upleft


def _paeth_prediction_array(px: np.ndarray) -> np.ndarray:
    px = px.astype(np.int16)
    pred = np.zeros_like(px)
    pred[..., 0, 1:] = px[..., 0, :-1]
    pred[..., 1:, 0] = px[..., :-1, 0]
    left = px[..., 1:, :-1]
    up = px[..., :-1, 1:]
    upleft = px[..., :-1, :-1]
    p = left + up - upleft
    pa, pb, pc = np.abs(p - left), np.abs(p - up), np.abs(p - upleft)
    pred[..., 1:, 1:] = np.where((pa <= pb) & (pa <= pc), left, np.where(pb <= pc, up, upleft))
    return pred


def paeth_forward_array(pixels: np.ndarray) -> np.ndarray:
    px = np.asarray(pixels)
    return ((px.astype(np.int16) - _paeth_prediction_array(px)) % 32).astype(np.uint8)


@numba.njit(cache=True)
def paeth_forward_row_into(row, prev, has_prev, out):
    c = row.shape[0]
    for x in range(c):
        if has_prev:
            if x == 0:
                pred = np.int32(prev[0])
            else:
                pred = _paeth(np.int32(row[x - 1]), np.int32(prev[x]), np.int32(prev[x - 1]))
        else:
            pred = np.int32(row[x - 1]) if x > 0 else np.int32(0)
        out[x] = (np.int32(row[x]) - pred) & 31


@numba.njit(cache=True)
def paeth_inverse_row_into(res, prev, has_prev, out):
    c = res.shape[0]
    for x in range(c):
        if has_prev:
            if x == 0:
                pred = np.int32(prev[0])
            else:
                pred = _paeth(np.int32(out[x - 1]), np.int32(prev[x]), np.int32(prev[x - 1]))
        else:
            pred = np.int32(out[x - 1]) if x > 0 else np.int32(0)
        out[x] = (np.int32(res[x]) + pred) & 31


@numba.njit(cache=True)
def _paeth_inverse_2d(res, out):
    rows = res.shape[0]
    for y in range(rows):
        if y == 0:
            paeth_inverse_row_into(res[0], out[0], False, out[0])
        else:
            paeth_inverse_row_into(res[y], out[y - 1], True, out[y])


def paeth_inverse_array(residuals: np.ndarray) -> np.ndarray:
    res = np.asarray(residuals, dtype=np.uint8)
    flat = np.ascontiguousarray(res.reshape((-1,) + res.shape[-2:]))
    out = np.empty_like(flat)
    for i in range(flat.shape[0]):
        _paeth_inverse_2d(flat[i], out[i])
    return out.reshape(res.shape)


@dataclass(frozen=True)
class PaethResidualImage:
    """Paeth-EPC output: mod-32 prediction residuals, values in 0..31."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidImage(f"expected a non-empty 2-D raster, got shape {v.shape}")
        if v.size and (v.min() < 0 or v.max() > MAX_DOSE):
            raise InvalidImage("Paeth residuals must lie in 0..31")
        v = np.array(v, dtype=np.uint8, order="C")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PaethResidualImage):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(np.array_equal(self.values, other.values))

    __hash__ = None


def paeth_forward(img: LayoutImage) -> PaethResidualImage:
    return PaethResidualImage(paeth_forward_array(img.pixels))


def paeth_inverse(res: PaethResidualImage) -> LayoutImage:
    return LayoutImage(paeth_inverse_array(res.values))


def paeth_forward_row(row: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    row = np.ascontiguousarray(row, dtype=np.uint8)
    out = np.empty_like(row)
    paeth_forward_row_into(row, row if prev is None else np.ascontiguousarray(prev, dtype=np.uint8),
                           prev is not None, out)
    return out


def paeth_inverse_row(res: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    res = np.ascontiguousarray(res, dtype=np.uint8)
    out = np.empty_like(res)
    paeth_inverse_row_into(res, res if prev is None else np.ascontiguousarray(prev, dtype=np.uint8),
                           prev is not None, out)
    return out
