import random

import pytest
from hypothesis import given, settings, strategies as st

from grigsolve.group import (
    A, B, C, D, IDENTITY, GroupElement, GroupError, a_parity, act, ball, bar,
    canonical_key, commutator, equal, in_commutator_subgroup, in_st1, is_trivial,
    order, product, psi, reduce_word, reduced_words,
)
from grigsolve.oracles import portrait_equal, portrait_order

words = st.text(alphabet="abcd", max_size=24)


def test_generators_are_involutions():
    for g in (A, B, C, D):
        assert is_trivial(g * g)
        assert order(g) == 2


def test_klein_relations():
    assert equal(B * C, D)
    assert equal(C * D, B)
    assert is_trivial(B * C * D)


def test_reduction_merges_klein_letters():
    assert reduce_word("bc") == "d"
    assert reduce_word("aa") == ""
    assert reduce_word("abba") == ""
    assert GroupElement.parse("abc").word == "ad"


def test_parse_rejects_other_letters():
    with pytest.raises(GroupError):
        GroupElement.parse("abx")


def test_psi_on_generators():
    assert psi(B) == (A, C)
    assert psi(C) == (A, D)
    assert psi(D) == (IDENTITY, B)


def test_psi_of_abab():
    g0, g1 = psi(GroupElement("abab"))
    assert equal(g0, GroupElement("ca"))
    assert equal(g1, GroupElement("ac"))


def test_psi_needs_stabilizer():
    with pytest.raises(GroupError):
        psi(A)


def test_known_orders():
    assert order(GroupElement("ab")) == 16
    assert order(GroupElement("ac")) == 8
    assert order(GroupElement("ad")) == 4
    assert order(IDENTITY) == 1


@pytest.mark.parametrize("w", ["ab", "ac", "ad", "abac", "abcdab", "adacab"])
def test_order_matches_portrait(w):
    assert order(GroupElement(w)) == portrait_order(GroupElement(w), level=10)


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_equal_agrees_with_portrait(u, v):
    g, h = GroupElement.parse(u), GroupElement.parse(v)
    assert equal(g, h) == portrait_equal(g, h, level=10)


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_canonical_key_agrees_with_equal(u, v):
    g, h = GroupElement.parse(u), GroupElement.parse(v)
    assert (canonical_key(g) == canonical_key(h)) == equal(g, h)


@settings(max_examples=100, deadline=None)
@given(words)
def test_inverse(u):
    g = GroupElement.parse(u)
    assert is_trivial(g * g.inverse())


@settings(max_examples=100, deadline=None)
@given(words, words)
def test_psi_is_multiplicative_on_stabilizer(u, v):
    g, h = bar(GroupElement.parse(u)), bar(GroupElement.parse(v))
    p, q = psi(g), psi(h)
    r = psi(g * h)
    assert equal(r[0], p[0] * q[0]) and equal(r[1], p[1] * q[1])


@settings(max_examples=100, deadline=None)
@given(words)
def test_bar_lands_in_stabilizer(u):
    g = GroupElement.parse(u)
    assert in_st1(bar(g))
    assert a_parity(bar(g)) == 0


@settings(max_examples=100, deadline=None)
@given(words, st.text(alphabet="01", min_size=1, max_size=8))
def test_action_is_left(u, v):
    g = GroupElement.parse(u)
    h = GroupElement("ab")
    assert act(g * h, v) == act(g, act(h, v))


def test_random_orders_are_powers_of_two():
    rng = random.Random(7)
    for _ in range(30):
        g = GroupElement.parse("".join(rng.choice("abcd") for _ in range(rng.randint(0, 20))))
        n = order(g)
        assert n & (n - 1) == 0


def test_ball_sizes():
    assert len(ball(0)) == 1
    assert len(ball(1)) == 5
    assert len(ball(3)) == 23
    assert len({canonical_key(g) for g in ball(3)}) == len(ball(3))


def test_reduced_words_shortlex():
    ws = list(reduced_words(3))
    assert ws[0] == ""
    assert ws == sorted(ws, key=lambda w: (len(w), w))


def test_commutator_subgroup_membership():
    assert in_commutator_subgroup(commutator(A, B))
    assert not in_commutator_subgroup(A)
    assert not in_commutator_subgroup(B)
    assert in_commutator_subgroup(product([B, C, D]))
