import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grigsolve.equations import words_equal
from grigsolve.quotient import ELEMENTS, q_commutator, q_product
from grigsolve.stabilizer import (
    apply_move_batch, generator_moves, is_reduced, reduce_batch, reduce_commutator_constraint,
    rn_variables, rn_word, window_of,
)
from grigsolve.standard import apply, transport


@pytest.mark.parametrize("n", [2, 3, 4])
def test_moves_fix_product_of_commutators(n):
    r = rn_word(n)
    for move in generator_moves(n):
        assert words_equal(apply(move, r), r)


def test_moves_count():
    assert len(generator_moves(1)) == 4
    assert len(generator_moves(3)) == 12 + 8


def _gamma(n, rng):
    return {v: rng.choice(ELEMENTS) for v in rn_variables(n)}


def _value(gamma, n):
    vs = rn_variables(n)
    return q_product(q_commutator(gamma[vs[2 * i]], gamma[vs[2 * i + 1]]) for i in range(n))


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 6), st.integers(0, 10**6))
def test_reduction_is_reduced_and_replayable(n, seed):
    gamma = _gamma(n, random.Random(seed))
    out, phi = reduce_commutator_constraint(n, gamma)
    assert is_reduced(out, n)
    assert transport(gamma, phi, rn_variables(n)) == out
    # the moves fix R_n, so the value in the quotient is unchanged
    assert _value(out, n) == _value(gamma, n)


def test_batch_matches_single_transport():
    rng = random.Random(3)
    n = 4
    vs = rn_variables(n)
    rows = [_gamma(n, rng) for _ in range(50)]
    state = np.array([[g[v].index for v in vs] for g in rows], dtype=np.uint8)
    for move in generator_moves(n):
        moved = state.copy()
        apply_move_batch(moved, move)
        for k, g in enumerate(rows):
            t = transport(g, move, vs)
            assert [t[v].index for v in vs] == list(moved[k])


def test_reduce_batch_leaves_window_only():
    rng = np.random.default_rng(5)
    state = rng.integers(0, 16, size=(2000, 10), dtype=np.uint8)
    reduce_batch(state)
    assert not state[:, 5:].any()
    assert window_of(state).shape == (2000, 5)


def test_reduction_needs_three_blocks():
    with pytest.raises(ValueError):
        reduce_commutator_constraint(2, {})
