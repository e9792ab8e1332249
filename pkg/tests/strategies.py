import numpy as np
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from layout_codec.image import LayoutImage


def dose_arrays(max_side=24):
    shapes = st.tuples(st.integers(1, max_side), st.integers(1, max_side))
    return shapes.flatmap(lambda s: hnp.arrays(np.uint8, s, elements=st.integers(0, 31)))


def sparse_dose_arrays(max_side=48):
    """Mostly-flat images: blocks of constant dose, which is where run coding matters."""

    @st.composite
    def build(draw):
        h = draw(st.integers(1, max_side))
        w = draw(st.integers(1, max_side))
        img = np.zeros((h, w), dtype=np.uint8)
        for _ in range(draw(st.integers(0, 6))):
            y0, x0 = draw(st.integers(0, h - 1)), draw(st.integers(0, w - 1))
            y1, x1 = draw(st.integers(y0 + 1, h)), draw(st.integers(x0 + 1, w))
            img[y0:y1, x0:x1] = draw(st.integers(0, 31))
        return img

    return build()


def layout_images(max_side=24):
    return st.one_of(dose_arrays(max_side), sparse_dose_arrays(max_side * 2)).map(LayoutImage)
