import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layout_codec.errors import (BlockMisalignment, CountMismatch, InvalidConfig, MalformedDigits,
                                 TruncatedStream, ValueOutOfRange)
from layout_codec.symbolizer import (END_OF_BLOCK, EobRunDigit, Literal, RleConfig, RowCursor, SymbolStream,
                                     ZeroRunDigit, desymbolize, desymbolize_row, digits_msd_first,
                                     literal_code, literal_value, mark_end_of_blocks, symbolize)
from layout_codec.transform import Transform

from oracles.reference import rle_tokens, rle_untokens

WORKED_SYMBOLS = [Literal(20), EobRunDigit(1), ZeroRunDigit(4), Literal(16), EobRunDigit(2),
                 Literal(-15), EobRunDigit(2)]

_KIND = {"L": Literal, "Z": ZeroRunDigit, "E": EobRunDigit}


def as_symbols(tokens):
    return [_KIND[k](v) for k, v in tokens]


def cursor_over(stream, width, cfg, chunk=3):
    codes = stream.codes
    chunks = (codes[i:i + chunk] for i in range(0, len(codes), chunk))
    return RowCursor(chunks, width, cfg, stream.transform)


@st.composite
def value_sequences(draw, transform=Transform.CORNER2, max_blocks=12):
    L = draw(st.integers(4, 64))
    M = draw(st.sampled_from([16, 64]))
    N = draw(st.sampled_from([16, 64]))
    blocks = draw(st.integers(1, max_blocks))
    lo, hi = (-62, 62) if transform == Transform.CORNER2 else (0, 31)
    nonzero = draw(st.floats(0.0, 0.6))
    n = L * blocks
    mask = draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    vals = draw(st.lists(st.integers(lo, hi), min_size=n, max_size=n))
    values = [v if m < nonzero else 0 for v, m in zip(vals, mask)]
    return values, RleConfig(L, M, N)


# -- worked example --------------------------------------------------------


def test_intermediate_form_of_worked_example(worked_values):
    blocks = mark_end_of_blocks(worked_values, 7)
    flat = " ".join(" ".join(str(t) for t in b) for b in blocks)
    assert flat == "20 X 0 0 0 0 16 X X -15 X X"
    assert blocks == [[20, "X"], [0, 0, 0, 0, 16, "X"], ["X"], [-15, "X"], ["X"]]


def test_worked_example_final_stream(worked_values):
    stream = symbolize(worked_values, RleConfig(7))
    assert stream.symbols() == WORKED_SYMBOLS
    assert len(stream) == 7
    assert stream.value_count == 35


def test_worked_example_inverse(worked_values):
    assert desymbolize(WORKED_SYMBOLS, RleConfig(7), 35).tolist() == worked_values


def test_worked_example_first_row():
    cursor = RowCursor([SymbolStream.from_symbols(WORKED_SYMBOLS, 35).codes], 7, RleConfig(7))
    assert desymbolize_row(cursor).tolist() == [20, 0, 0, 0, 0, 0, 0]


def test_all_zero_blocks_make_one_symbol():
    stream = symbolize([0] * 21, RleConfig(7))
    assert stream.symbols() == [EobRunDigit(3)]
    assert desymbolize(stream, RleConfig(7), 21).tolist() == [0] * 21
    cursor = cursor_over(stream, 7, RleConfig(7))
    for _ in range(3):
        assert cursor.next_row().tolist() == [0] * 7
    cursor.finish()


def test_digits_msd_first():
    assert digits_msd_first(1024, 64) == [16, 0]
    assert digits_msd_first(1, 64) == [1]
    assert digits_msd_first(64, 64) == [1, 0]
    assert digits_msd_first(4096, 64) == [1, 0, 0]
    with pytest.raises(ValueError):
        digits_msd_first(0, 64)


def test_long_run_digit_groups():
    stream = symbolize([7] + [0] * (1024 * 1024 - 1), RleConfig(1024))
    assert stream.symbols() == [Literal(7), EobRunDigit(16), EobRunDigit(0)]
    zeros = [5] + [0] * 70 + [5]
    assert symbolize(zeros, RleConfig(72)).symbols() == [Literal(5), ZeroRunDigit(1), ZeroRunDigit(6),
                                                          Literal(5)]


def test_trailing_single_zero_becomes_eob():
    assert symbolize([3, 0], RleConfig(2)).symbols() == [Literal(3), EobRunDigit(1)]


def test_initial_zero_joins_run():
    assert symbolize([0, 0, 5, 0], RleConfig(4)).symbols() == [ZeroRunDigit(2), Literal(5), EobRunDigit(1)]


# -- byte mapping ----------------------------------------------------------


def test_literal_byte_mapping_corner2():
    codes = [literal_code(v, Transform.CORNER2) for v in range(-62, 63) if v]
    assert codes == list(range(124))
    assert literal_code(-62, Transform.CORNER2) == 0
    assert literal_code(-1, Transform.CORNER2) == 61
    assert literal_code(1, Transform.CORNER2) == 62
    assert literal_code(62, Transform.CORNER2) == 123
    assert all(literal_value(literal_code(v, Transform.CORNER2), Transform.CORNER2) == v
               for v in range(-62, 63) if v)


def test_literal_byte_mapping_paeth():
    assert [literal_code(v, Transform.PAETH) for v in range(1, 32)] == list(range(31))


def test_digit_byte_mapping():
    stream = SymbolStream.from_symbols([ZeroRunDigit(0), ZeroRunDigit(63), EobRunDigit(0), EobRunDigit(63)], 0)
    assert stream.codes.tolist() == [124, 187, 188, 251]
    stream = SymbolStream.from_symbols([ZeroRunDigit(5), EobRunDigit(5)], 0, Transform.PAETH)
    assert stream.codes.tolist() == [36, 100]


def test_worked_example_bytes(worked_values):
    data = symbolize(worked_values, RleConfig(7)).to_bytes()
    assert list(data) == [81, 189, 128, 77, 190, 47, 190]


def test_alphabet_sizes():
    cfg = RleConfig()
    assert cfg.alphabet_size(Transform.CORNER2) == 252
    assert cfg.alphabet_size(Transform.PAETH) == 159
    assert RleConfig(M=128, N=128).alphabet_size(Transform.CORNER2) == 380


def test_wide_alphabet_refuses_byte_mapping():
    stream = symbolize([1, 0], RleConfig(2, 128, 128))
    with pytest.raises(InvalidConfig):
        stream.to_bytes()


# -- properties ------------------------------------------------------------


@settings(max_examples=400)
@given(value_sequences())
def test_matches_token_oracle_corner2(case):
    values, cfg = case
    stream = symbolize(values, cfg, Transform.CORNER2)
    assert stream.symbols() == as_symbols(rle_tokens(values, cfg.L, cfg.M, cfg.N))


@settings(max_examples=200)
@given(value_sequences(Transform.PAETH))
def test_matches_token_oracle_paeth(case):
    values, cfg = case
    stream = symbolize(values, cfg, Transform.PAETH)
    assert stream.symbols() == as_symbols(rle_tokens(values, cfg.L, cfg.M, cfg.N))


@settings(max_examples=400)
@given(value_sequences())
def test_round_trip(case):
    values, cfg = case
    stream = symbolize(values, cfg)
    assert desymbolize(stream, cfg, len(values)).tolist() == values
    tokens = rle_tokens(values, cfg.L, cfg.M, cfg.N)
    assert rle_untokens(tokens, cfg.L, cfg.M, cfg.N, len(values)) == values


def test_round_trip_bulk(rng):
    # 10^4 random sequences, L in 4..64, M, N in {16, 64}
    for _ in range(10_000):
        L = int(rng.integers(4, 65))
        cfg = RleConfig(L, int(rng.choice([16, 64])), int(rng.choice([16, 64])))
        n = L * int(rng.integers(1, 9))
        vals = rng.integers(-62, 63, n)
        vals[rng.random(n) > rng.random()] = 0
        out = desymbolize(symbolize(vals, cfg), cfg, n)
        assert np.array_equal(out, vals)


def test_exhaustive_short_sequences():
    # every sequence over {-1, 0, 1} of length 8, with L in {2, 4, 8} and tiny bases
    for L, M, N in itertools.product((2, 4, 8), (2, 4), (2, 4)):
        cfg = RleConfig(L, M, N)
        for seq in itertools.product((-1, 0, 1), repeat=8):
            stream = symbolize(seq, cfg)
            assert stream.symbols() == as_symbols(rle_tokens(seq, L, M, N))
            assert desymbolize(stream, cfg, 8).tolist() == list(seq)


@settings(max_examples=200)
@given(value_sequences(), st.integers(1, 5))
def test_rows_concatenate_to_whole(case, chunk):
    values, cfg = case
    stream = symbolize(values, cfg)
    cursor = cursor_over(stream, cfg.L, cfg, chunk)
    rows = [cursor.next_row().tolist() for _ in range(len(values) // cfg.L)]
    cursor.finish()
    assert sum(rows, []) == values


@settings(max_examples=200)
@given(value_sequences())
def test_runs_are_maximal_and_digits_canonical(case):
    values, cfg = case
    syms = symbolize(values, cfg).symbols()
    for group_kind in (ZeroRunDigit, EobRunDigit):
        prev = None
        for s in syms:
            starts = isinstance(s, group_kind) and not isinstance(prev, group_kind)
            if starts:
                assert s.digit != 0
            prev = s
    assert all(s.value != 0 for s in syms if isinstance(s, Literal))
    assert all(0 <= s.digit < cfg.M for s in syms if isinstance(s, ZeroRunDigit))
    assert all(0 <= s.digit < cfg.N for s in syms if isinstance(s, EobRunDigit))


@pytest.mark.parametrize("blocks", [1, 2, 63, 64, 65, 4097])
def test_all_zero_is_one_digit_group(blocks):
    syms = symbolize(np.zeros(blocks * 3, dtype=np.int16), RleConfig(3)).symbols()
    assert all(isinstance(s, EobRunDigit) for s in syms)
    assert syms == [EobRunDigit(d) for d in digits_msd_first(blocks, 64)]


# -- capped End-of-Block runs ----------------------------------------------


@pytest.mark.parametrize("cap", [1, 3, 64, 100])
@pytest.mark.parametrize("blocks", [1, 5, 64, 65, 200, 4100])
def test_max_x_run_splits_and_round_trips(cap, blocks):
    cfg = RleConfig(2, max_x_run=cap)
    values = [0] * (2 * blocks)
    stream = symbolize(values, cfg)
    # each emitted group covers at most `cap` blocks
    groups, n = [], None
    for s in stream.symbols():
        if n is not None and n * cfg.N + s.digit <= cap:
            n = n * cfg.N + s.digit
        else:
            if n is not None:
                groups.append(n)
            n = s.digit
    groups.append(n)
    assert sum(groups) == blocks and max(groups) <= cap
    assert desymbolize(stream, cfg, len(values)).tolist() == values


@settings(max_examples=200)
@given(value_sequences(), st.integers(1, 200))
def test_max_x_run_round_trip(case, cap):
    values, cfg = case
    cfg = RleConfig(cfg.L, cfg.M, cfg.N, max_x_run=cap)
    stream = symbolize(values, cfg)
    assert desymbolize(stream, cfg, len(values)).tolist() == values
    cursor = cursor_over(stream, cfg.L, cfg)
    rows = [cursor.next_row().tolist() for _ in range(len(values) // cfg.L)]
    cursor.finish()
    assert sum(rows, []) == values


# -- errors ----------------------------------------------------------------


def test_misaligned_input():
    with pytest.raises(BlockMisalignment):
        symbolize([1, 2, 3], RleConfig(2))
    with pytest.raises(BlockMisalignment):
        mark_end_of_blocks([1, 2, 3], 2)


def test_out_of_range_values():
    with pytest.raises(ValueOutOfRange):
        symbolize([63, 0], RleConfig(2))
    with pytest.raises(ValueOutOfRange):
        symbolize([-1, 0], RleConfig(2), Transform.PAETH)
    with pytest.raises(ValueOutOfRange):
        symbolize([32, 0], RleConfig(2), Transform.PAETH)


def test_bad_configs():
    for kwargs in ({"M": 48}, {"N": 1}, {"L": 0}, {"max_x_run": 0}):
        with pytest.raises(InvalidConfig):
            RleConfig(**kwargs)


def test_stream_too_short():
    with pytest.raises(CountMismatch):
        desymbolize([Literal(1), EobRunDigit(1)], RleConfig(2), 4)
    cursor = RowCursor([SymbolStream.from_symbols([Literal(1)], 2).codes], 2, RleConfig(2))
    with pytest.raises(TruncatedStream):
        cursor.next_row()


def test_stream_too_long():
    with pytest.raises(CountMismatch):
        desymbolize([EobRunDigit(3)], RleConfig(2), 4)
    with pytest.raises(CountMismatch):
        desymbolize([EobRunDigit(2), Literal(4)], RleConfig(2), 4)


def test_leading_zero_digit_group_rejected():
    with pytest.raises(MalformedDigits):
        desymbolize([EobRunDigit(0), EobRunDigit(1)], RleConfig(2), 2)
    with pytest.raises(MalformedDigits):
        desymbolize([ZeroRunDigit(0), Literal(1), EobRunDigit(1)], RleConfig(4), 4)


def test_zero_run_may_not_fill_block():
    # an interior zero run that reaches the end of a block should have been an End-of-Block mark
    with pytest.raises(MalformedDigits):
        desymbolize([Literal(1), ZeroRunDigit(1)], RleConfig(2), 2)


def test_end_of_block_marker_constant():
    assert END_OF_BLOCK == "X"
