"""Seeded synthetic gray-level layout layers.

Stand-ins for proximity-corrected layout rasters: a library of cells built
from rectangles and L-shapes, each with a flat interior dose and a one-pixel
edge band at an intermediate dose, placed in standard-cell rows where cells
repeat, plus routing wires and occasional one-pixel correction primitives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import MAX_DOSE, LayoutImage


@dataclass(frozen=True)
class SynthLayoutSpec:
    width: int = 1024
    height: int = 1024
    seed: int = 0
    library_size: int = 12
    cell_min: int = 12
    cell_max: int = 40
    shapes_per_cell: tuple[int, int] = (1, 4)
    row_gap: int = 6
    repeat_prob: float = 0.7
    fill_prob: float = 0.85
    wire_count: int = 24
    speck_prob: float = 0.02
    interior_doses: tuple[int, int] = (12, 31)
    edge_drop: tuple[int, int] = (2, 9)


def _shape_mask(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    mask = np.zeros((h, w), dtype=bool)
    y0 = int(rng.integers(0, max(1, h - 4)))
    x0 = int(rng.integers(0, max(1, w - 4)))
    sh = int(rng.integers(3, max(4, h - y0 + 1)))
    sw = int(rng.integers(3, max(4, w - x0 + 1)))
    mask[y0:y0 + sh, x0:x0 + sw] = True
    if rng.random() < 0.4 and sh > 6 and sw > 6:
        # notch one corner out to make an L-shape
        ny, nx = sh // 2, sw // 2
        if rng.random() < 0.5:
            mask[y0:y0 + ny, x0 + sw - nx:x0 + sw] = False
        else:
            mask[y0 + sh - ny:y0 + sh, x0:x0 + nx] = False
    return mask


def _edge_band(mask: np.ndarray) -> np.ndarray:
    inner = mask.copy()
    inner[1:, :] &= mask[:-1, :]
    inner[:-1, :] &= mask[1:, :]
    inner[:, 1:] &= mask[:, :-1]
    inner[:, :-1] &= mask[:, 1:]
    inner[0, :] = inner[-1, :] = False
    inner[:, 0] = inner[:, -1] = False
    return mask & ~inner


def _make_cell(rng: np.random.Generator, spec: SynthLayoutSpec, height: int) -> np.ndarray:
    w = int(rng.integers(spec.cell_min, spec.cell_max + 1))
    cell = np.zeros((height, w), dtype=np.uint8)
    for _ in range(int(rng.integers(spec.shapes_per_cell[0], spec.shapes_per_cell[1] + 1))):
        mask = _shape_mask(rng, height, w)
        # larger shapes receive lower corrected doses
        area_frac = mask.sum() / mask.size
        lo, hi = spec.interior_doses
        dose = int(np.clip(hi - round(area_frac * (hi - lo)) + rng.integers(-2, 3), lo, MAX_DOSE))
        edge = max(1, dose - int(rng.integers(spec.edge_drop[0], spec.edge_drop[1] + 1)))
        cell[mask] = dose
        cell[_edge_band(mask)] = edge
    return cell


def synth_layout(spec: SynthLayoutSpec) -> LayoutImage:
    rng = np.random.default_rng(spec.seed)
    img = np.zeros((spec.height, spec.width), dtype=np.uint8)
    row_h = min(spec.cell_max, spec.height)
    library = [_make_cell(rng, spec, row_h) for _ in range(spec.library_size)]

    y = 0
    while y + row_h <= spec.height:
        x = int(rng.integers(0, 8))
        prev = int(rng.integers(len(library)))
        while x < spec.width:
            idx = prev if rng.random() < spec.repeat_prob else int(rng.integers(len(library)))
            cell = library[idx]
            w = min(cell.shape[1], spec.width - x)
            if rng.random() < spec.fill_prob:
                img[y:y + row_h, x:x + w] = cell[:, :w]
            x += cell.shape[1] + int(rng.integers(1, 4))
            prev = idx
        y += row_h + spec.row_gap

    for _ in range(spec.wire_count):
        dose = int(rng.integers(spec.interior_doses[0], MAX_DOSE + 1))
        thick = int(rng.integers(2, 5))
        if rng.random() < 0.5:
            yy = int(rng.integers(0, max(1, spec.height - thick)))
            x0 = int(rng.integers(0, spec.width))
            x1 = int(min(spec.width, x0 + rng.integers(spec.width // 8 + 1, spec.width + 1)))
            img[yy:yy + thick, x0:x1] = dose
        else:
            xx = int(rng.integers(0, max(1, spec.width - thick)))
            y0 = int(rng.integers(0, spec.height))
            y1 = int(min(spec.height, y0 + rng.integers(spec.height // 8 + 1, spec.height + 1)))
            img[y0:y1, xx:xx + thick] = dose

    # one-pixel primitives left behind by grid snapping after correction
    n_specks = int(spec.speck_prob * spec.width * spec.height / 64)
    if n_specks:
        ys = rng.integers(0, spec.height, n_specks)
        xs = rng.integers(0, spec.width, n_specks)
        lit = img[ys, xs] > 0
        img[ys[lit], xs[lit]] = np.maximum(img[ys[lit], xs[lit]].astype(np.int16) - rng.integers(1, 4, lit.sum()), 1)
    return LayoutImage(img)


def constant_layout(width: int, height: int, dose: int) -> LayoutImage:
    return LayoutImage(np.full((height, width), dose, dtype=np.uint8))


def synth_corpus(count: int, size: int, seed: int = 0, **overrides) -> list[tuple[str, LayoutImage]]:
    """``count`` seed-deterministic layers named ``layer00``, ``layer01``, ..."""
    return [
        (f"layer{i:02d}", synth_layout(SynthLayoutSpec(width=size, height=size, seed=seed * 1000 + i, **overrides)))
        for i in range(count)
    ]
