import pytest
from hypothesis import given, settings, strategies as st

from grigsolve.equations import (
    EquationError, Letter, MixedWord, Variable, commutator_word, eval_word, free_reduce,
    gamma_eval, is_orientable, is_quadratic, join, join_constrained, orientability,
    parse_constraint_lines, parse_equation, parse_equation_file, parse_word, sigma, words_equal,
)
from grigsolve.group import GroupElement, commutator, equal, is_trivial
from grigsolve.quotient import ELEMENTS, pi_k

x, y, z = Variable("x"), Variable("y"), Variable("z")


def test_parse_commutator_expands():
    assert parse_word("[x,y]") == commutator_word(x, y)
    assert str(parse_word("[x,y]")) == "x^-1 y^-1 x y"


def test_parse_powers_and_constants():
    w = parse_word("x^2 ab y^-1 1")
    assert str(w) == "x x ab y^-1"
    assert w.coefficients() == [GroupElement("ab")]


def test_parse_descendant_names():
    w = parse_word("x_01 y_1^-1")
    assert w.vars() == {Variable("x", "01"), Variable("y", "1")}


def test_letters_abcd_are_constants():
    assert not parse_word("bad").has_variables()
    assert parse_word("bad").coefficients()[0].word == "bad"


def test_parse_equation_moves_right_side():
    w = parse_equation("[x,y] = [a,b]")
    assert str(w) == "x^-1 y^-1 x y baba"


def test_parse_errors():
    with pytest.raises(EquationError):
        parse_word("x^")
    with pytest.raises(EquationError):
        parse_constraint_lines(["x ab"])


def test_equation_file_with_constraints():
    w, gamma = parse_equation_file("# comment\n[x,y] = ab\nx = a\ny = 1  # trivial\n")
    assert w.vars() == {x, y}
    assert gamma == {x: pi_k(GroupElement("a")), y: ELEMENTS[0]}


def test_equation_file_rejects_unknown_variable():
    with pytest.raises(EquationError):
        parse_equation_file("x^2\nq = a\n")


def test_quadratic_classification():
    assert is_quadratic(parse_word("[x,y] z^-1 ab z"))
    assert not is_quadratic(parse_word("x y x"))
    assert is_orientable(parse_word("x a x^-1"))
    assert not is_orientable(parse_word("x a x"))
    assert orientability(parse_word("x^2 y^2")) == "non-orientable"


def test_free_reduce_cancels_and_merges():
    w = MixedWord([Letter(x), Letter(x, -1), GroupElement("a"), GroupElement("a"), Letter(y)])
    assert free_reduce(w) == MixedWord([Letter(y)])


def test_eval_word():
    w = parse_word("[x,y]")
    val = eval_word(w, {x: GroupElement("a"), y: GroupElement("b")})
    assert equal(val, commutator(GroupElement("a"), GroupElement("b")))


def test_words_equal_uses_group_equality():
    assert words_equal(parse_word("x adad"), parse_word("x dada"))
    assert not words_equal(parse_word("x ab"), parse_word("x ba"))


def test_sigma_and_gamma_eval():
    gamma = {x: pi_k(GroupElement("a")), y: ELEMENTS[0]}
    w = parse_word("x y")
    assert sigma(w, gamma) == 1
    assert gamma_eval(parse_word("x^2"), gamma).is_identity()


def test_join_eliminates_shared_variable():
    w1 = parse_word("x ab y")
    w2 = parse_word("z x^-1 ba")
    j = join(w1, w2, x)
    assert x not in j.vars()
    # solutions of the system give solutions of the join
    alpha = {y: GroupElement("a"), z: GroupElement("b")}
    alpha[x] = (GroupElement("ab") * alpha[y]).inverse()
    assert is_trivial(eval_word(w1, alpha))
    alpha[z] = (alpha[x].inverse() * GroupElement("ba")).inverse()
    assert is_trivial(eval_word(w2, alpha))
    assert is_trivial(eval_word(j, alpha))


def test_join_requires_single_occurrences():
    with pytest.raises(EquationError):
        join(parse_word("x x"), parse_word("x"), x)


def test_join_constrained_checks_quotient():
    gamma = {x: ELEMENTS[0], y: pi_k(GroupElement("a"))}
    with pytest.raises(EquationError):
        join_constrained(parse_word("x y"), parse_word("x^-1"), x, gamma)


atoms = st.one_of(
    st.sampled_from(["a", "b", "c", "d", "ab", "ada"]).map(GroupElement),
    st.builds(Letter, st.sampled_from([x, y, z]), st.sampled_from([1, -1])),
)


@settings(max_examples=100, deadline=None)
@given(st.lists(atoms, max_size=10), st.sampled_from(["", "a", "ab", "cad"]), st.sampled_from(["", "d", "ba"]))
def test_free_reduce_preserves_value(items, gx, gy):
    w = MixedWord(items)
    alpha = {x: GroupElement(gx), y: GroupElement(gy), z: GroupElement("ac")}
    assert equal(eval_word(w, alpha), eval_word(free_reduce(w), alpha))


@settings(max_examples=100, deadline=None)
@given(st.lists(atoms, max_size=10))
def test_inverse_word(items):
    w = MixedWord(items)
    alpha = {x: GroupElement("ab"), y: GroupElement("d"), z: GroupElement("ac")}
    assert is_trivial(eval_word(w * w.inverse(), alpha))
