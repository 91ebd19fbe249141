"""Arithmetic in the Grigorchuk group.

Elements are stored as reduced words over ``a, b, c, d``: no two equal
letters are adjacent and no two letters of ``{b, c, d}`` are adjacent, so
every word alternates as ``[a] x1 a x2 a ... a xn [a]``.  A reduced word is
a canonical *representative*, not a canonical *element*: ``(ad)^4`` is
reduced and trivial.  Use :func:`equal` (or :func:`canonical_key`) to
compare elements.

The action on the binary tree is a left action, ``act(g*h, v) ==
act(g, act(h, v))``, which makes ``psi`` a homomorphism.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Iterator

GENERATORS = "abcd"
_KLEIN = "bcd"

# product of two distinct letters of the Klein four-group {1, b, c, d}
_KLEIN_PRODUCT = {
    ("b", "c"): "d", ("c", "b"): "d",
    ("b", "d"): "c", ("d", "b"): "c",
    ("c", "d"): "b", ("d", "c"): "b",
}

# psi on the generators b, c, d of St(1); a-conjugates swap the pair
_PSI_LETTER = {"b": ("a", "c"), "c": ("a", "d"), "d": ("", "b")}


class GroupError(ValueError):
    pass


def reduce_word(raw: Iterable[str]) -> str:
    """Return the reduced form of a word over ``abcd``.

    Single left-to-right pass with a stack; every rewrite shortens the word.
    """
    stack: list[str] = []
    for letter in raw:
        if letter not in GENERATORS:
            raise GroupError(f"not a generator: {letter!r}")
        if not stack:
            stack.append(letter)
            continue
        top = stack[-1]
        if top == letter:
            stack.pop()
        elif top in _KLEIN and letter in _KLEIN:
            # the product is a third Klein letter; the letter below is 'a'
            stack[-1] = _KLEIN_PRODUCT[top, letter]
        else:
            stack.append(letter)
    return "".join(stack)


@dataclass(frozen=True, order=True)
class GroupElement:
    """An element of the Grigorchuk group given by a reduced word."""

    word: str = ""

    def __post_init__(self):
        reduced = reduce_word(self.word)
        if reduced != self.word:
            object.__setattr__(self, "word", reduced)

    @classmethod
    def parse(cls, text: str) -> "GroupElement":
        text = text.strip()
        if text in ("", "1"):
            return IDENTITY
        bad = set(text) - set(GENERATORS)
        if bad:
            raise GroupError(f"invalid characters {sorted(bad)} in element {text!r}")
        return cls(text)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement):
            return NotImplemented
        return GroupElement(self.word + other.word)

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        result, base = IDENTITY, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "GroupElement":
        # every generator is an involution
        return GroupElement(self.word[::-1])

    def __len__(self) -> int:
        return len(self.word)

    def is_identity_word(self) -> bool:
        return not self.word

    def __str__(self) -> str:
        return self.word or "1"

    def __repr__(self) -> str:
        return f"GroupElement({str(self)!r})"


IDENTITY = GroupElement("")
A, B, C, D = (GroupElement(x) for x in GENERATORS)


def reduce(raw: Iterable[str]) -> GroupElement:
    return GroupElement(reduce_word(raw))


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    return g * h


def product(elements: Iterable[GroupElement]) -> GroupElement:
    return GroupElement("".join(g.word for g in elements))


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    """``[g, h] = g^-1 h^-1 g h``."""
    return g.inverse() * h.inverse() * g * h


def length(g: GroupElement) -> int:
    return len(g.word)


def a_parity(g: GroupElement) -> int:
    return g.word.count("a") % 2


def in_st1(g: GroupElement) -> bool:
    return a_parity(g) == 0


def bar(g: GroupElement) -> GroupElement:
    """The closest element of St(1): ``g`` itself or ``g*a``."""
    return g if in_st1(g) else g * A


# -- tree action ------------------------------------------------------------

def _act_letter(letter: str, v: str) -> str:
    out = []
    i = 0
    while i < len(v) and letter:
        bit = v[i]
        if letter == "a":
            out.append("1" if bit == "0" else "0")
            out.append(v[i + 1:])
            return "".join(out)
        out.append(bit)
        letter = _PSI_LETTER[letter][int(bit)]
        i += 1
    out.append(v[i:])
    return "".join(out)


def act(g: GroupElement, v: str) -> str:
    """Image of the vertex ``v`` (a binary string) under ``g``."""
    if set(v) - {"0", "1"}:
        raise GroupError(f"not a vertex: {v!r}")
    for letter in reversed(g.word):
        v = _act_letter(letter, v)
    return v


# -- splitting homomorphism ---------------------------------------------------

def psi(g: GroupElement) -> tuple[GroupElement, GroupElement]:
    """Restrictions of ``g`` in St(1) to the two subtrees."""
    if not in_st1(g):
        raise GroupError(f"{g} is not in St(1)")
    left: list[str] = []
    right: list[str] = []
    swapped = False
    for letter in g.word:
        if letter == "a":
            swapped = not swapped
            continue
        p0, p1 = _PSI_LETTER[letter]
        if swapped:
            p0, p1 = p1, p0
        left.append(p0)
        right.append(p1)
    return GroupElement(reduce_word("".join(left))), GroupElement(reduce_word("".join(right)))


def psi_i(g: GroupElement, i: int) -> GroupElement:
    return psi(g)[i]


# -- word problem ---------------------------------------------------------------

_cache_size: int | None = None


def _make_trivial_cache(maxsize):
    @functools.lru_cache(maxsize=maxsize)
    def trivial(word: str) -> bool:
        if not word:
            return True
        if len(word) == 1 or word.count("a") % 2:
            return False
        g0, g1 = psi(GroupElement(word))
        return trivial(g0.word) and trivial(g1.word)

    return trivial


_is_trivial_word = _make_trivial_cache(None)


def configure_cache(maxsize: int | None = None) -> None:
    """Rebuild the word-problem memo with a new bound (``None`` = unbounded)."""
    global _is_trivial_word, _cache_size
    _cache_size = maxsize
    _is_trivial_word = _make_trivial_cache(maxsize)
    _canonical_key.cache_clear()


def is_trivial(g: GroupElement) -> bool:
    return _is_trivial_word(g.word)


def equal(g: GroupElement, h: GroupElement) -> bool:
    if g.word == h.word:
        return True
    return is_trivial(g * h.inverse())


def order(g: GroupElement, max_doublings: int = 64) -> int:
    """Order of ``g``; the group is a 2-group so repeated squaring suffices."""
    n, power = 1, g
    for _ in range(max_doublings + 1):
        if is_trivial(power):
            return n
        power = power * power
        n *= 2
    raise RuntimeError(f"order of {g} exceeds 2^{max_doublings}")


# -- canonical keys -------------------------------------------------------------
#
# An element is determined by its a-parity and the two psi-components of
# bar(g).  Interning these triples gives an exact canonical id; the
# self-similar generators b, c, d are seeded so the recursion bottoms out.

_INTERN: dict[tuple[int, int, int], int] = {}
_BASE = {"": 0, "a": 1, "b": 2, "c": 3, "d": 4}
_INTERN.update({
    (0, 0, 0): 0,
    (1, 0, 0): 1,
    (0, 1, 3): 2,
    (0, 1, 4): 3,
    (0, 0, 2): 4,
})


@functools.lru_cache(maxsize=None)
def _canonical_key(word: str) -> int:
    if len(word) <= 1:
        return _BASE[word]
    parity = word.count("a") % 2
    g = GroupElement(word)
    g0, g1 = psi(g * A if parity else g)
    triple = (parity, _canonical_key(g0.word), _canonical_key(g1.word))
    key = _INTERN.get(triple)
    if key is None:
        key = _INTERN[triple] = len(_INTERN)
    return key


def canonical_key(g: GroupElement) -> int:
    """Integer id with ``canonical_key(g) == canonical_key(h)`` iff ``g == h`` in the group."""
    return _canonical_key(g.word)


# -- enumeration ------------------------------------------------------------------

def reduced_words(max_len: int) -> Iterator[str]:
    """All reduced words of length ``<= max_len`` in shortlex order."""
    layer = [""]
    yield ""
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for x in GENERATORS:
                if w and (w[-1] == x or (w[-1] in _KLEIN and x in _KLEIN)):
                    continue
                nxt.append(w + x)
        nxt.sort()
        yield from nxt
        layer = nxt


@functools.lru_cache(maxsize=None)
def ball(max_len: int) -> tuple[GroupElement, ...]:
    """Distinct elements represented by reduced words of length ``<= max_len``."""
    seen: set[int] = set()
    out = []
    for w in reduced_words(max_len):
        g = GroupElement(w)
        k = canonical_key(g)
        if k not in seen:
            seen.add(k)
            out.append(g)
    return tuple(out)


def abelian_parities(g: GroupElement) -> tuple[int, int, int]:
    """Image in the abelianization ``(Z/2)^3`` on ``a, b, d`` (``c = bd``)."""
    w = g.word
    return (w.count("a") % 2, (w.count("b") + w.count("c")) % 2, (w.count("c") + w.count("d")) % 2)


def in_commutator_subgroup(g: GroupElement) -> bool:
    return abelian_parities(g) == (0, 0, 0)
