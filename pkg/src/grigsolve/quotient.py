"""The order-16 quotient by K = <<abab>> and the psi-image data (F, omega).

The quotient is ``Z/2 x D8``: ``b`` generates the central ``Z/2`` and the
images of ``a`` and ``d`` generate the dihedral group.  A dihedral element
is ``r^rot s^ref`` with ``a -> s`` and ``d -> r s``.  Elements are
displayed by the shortlex-least word mapping onto them.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable

from .group import GroupElement, psi, reduced_words


@dataclass(frozen=True)
class QElement:
    b_part: int = 0
    rotation: int = 0
    reflection: int = 0

    @property
    def index(self) -> int:
        return self.b_part * 8 + self.rotation * 2 + self.reflection

    @classmethod
    def from_index(cls, i: int) -> "QElement":
        return ELEMENTS[i]

    def __mul__(self, other: "QElement") -> "QElement":
        rot = other.rotation if self.reflection == 0 else -other.rotation
        return QElement(
            (self.b_part + other.b_part) % 2,
            (self.rotation + rot) % 4,
            (self.reflection + other.reflection) % 2,
        )

    def inverse(self) -> "QElement":
        if self.reflection:
            return self  # reflections are involutions
        return QElement(self.b_part, (-self.rotation) % 4, 0)

    def __pow__(self, n: int) -> "QElement":
        out = Q_IDENTITY
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            out = out * base
        return out

    def is_identity(self) -> bool:
        return self == Q_IDENTITY

    @property
    def name(self) -> str:
        return NAMES[self.index]

    def __lt__(self, other: "QElement") -> bool:
        return ORDER_RANK[self.index] < ORDER_RANK[other.index]

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Q({self.name})"


Q_IDENTITY = QElement()
ELEMENTS = tuple(QElement(b, r, s) for b in range(2) for r in range(4) for s in range(2))

_LETTER_IMAGE = {
    "a": QElement(0, 0, 1),
    "b": QElement(1, 0, 0),
    "d": QElement(0, 1, 1),
}
_LETTER_IMAGE["c"] = _LETTER_IMAGE["b"] * _LETTER_IMAGE["d"]


def pi_k(g: GroupElement) -> QElement:
    out = Q_IDENTITY
    for letter in g.word:
        out = out * _LETTER_IMAGE[letter]
    return out


def q_product(items: Iterable[QElement]) -> QElement:
    out = Q_IDENTITY
    for q in items:
        out = out * q
    return out


def q_commutator(g: QElement, h: QElement) -> QElement:
    return g.inverse() * h.inverse() * g * h


def st_coset(q: QElement) -> int:
    """Image in Gamma/St(1): 1 iff preimages have odd a-count."""
    return (q.rotation + q.reflection) % 2


def bar_q(q: QElement) -> QElement:
    return q if st_coset(q) == 0 else q * _LETTER_IMAGE["a"]


def _witness_names() -> list[str]:
    names: list[str | None] = [None] * 16
    for w in reduced_words(6):
        i = pi_k(GroupElement(w)).index
        if names[i] is None:
            names[i] = w or "1"
    assert all(names), "pi_K is not onto"
    return names  # type: ignore[return-value]


NAMES: list[str] = _witness_names()
# total order on the quotient: lexicographic on the witness names ("1" first)
ORDER_RANK = {i: rank for rank, i in enumerate(sorted(range(16), key=lambda i: NAMES[i]))}
SORTED_ELEMENTS = tuple(sorted(ELEMENTS, key=lambda q: ORDER_RANK[q.index]))
_BY_NAME = {name: ELEMENTS[i] for i, name in enumerate(NAMES)}


def witness(q: QElement) -> GroupElement:
    """Fixed transversal representative of ``q``."""
    return GroupElement.parse(q.name)


def parse_q(text: str) -> QElement:
    """Parse a quotient element given as any word in ``abcd`` (canonical names included)."""
    text = text.strip()
    if text in _BY_NAME:
        return _BY_NAME[text]
    return pi_k(GroupElement.parse(text))


# -- psi-image table ------------------------------------------------------------

class PsiImageTable:
    """The pair set F and the map omega on it."""

    def __init__(self, omega: dict[tuple[QElement, QElement], QElement]):
        self.omega = dict(omega)
        fibers: list[list[tuple[QElement, QElement]]] = [[] for _ in range(16)]
        for pair in sorted(self.omega, key=lambda p: (ORDER_RANK[p[0].index], ORDER_RANK[p[1].index])):
            fibers[self.omega[pair].index].append(pair)
        self._fibers = tuple(tuple(f) for f in fibers)

    @property
    def pairs(self) -> frozenset[tuple[QElement, QElement]]:
        return frozenset(self.omega)

    def fiber(self, target: QElement) -> tuple[tuple[QElement, QElement], ...]:
        """All pairs in F that omega sends to ``target``."""
        return self._fibers[target.index]


class WellDefinednessError(RuntimeError):
    pass


@functools.lru_cache(maxsize=1)
def compute_psi_image_table(max_len: int = 12) -> PsiImageTable:
    """Project psi(St(1)) to the quotient pair-wise.

    Enumerates St(1) elements by reduced word length until the pair set is
    stable for two further lengths; checks that omega is a function.
    """
    omega: dict[tuple[QElement, QElement], QElement] = {}
    stable_for = 0
    last_size = -1
    current_len = -1
    for w in reduced_words(max_len):
        if len(w) != current_len:
            if len(omega) == last_size:
                stable_for += 1
                if stable_for >= 2 and current_len >= 6:
                    break
            else:
                stable_for = 0
            last_size = len(omega)
            current_len = len(w)
        if w.count("a") % 2:
            continue
        g = GroupElement(w)
        g0, g1 = psi(g)
        pair = (pi_k(g0), pi_k(g1))
        image = pi_k(g)
        old = omega.setdefault(pair, image)
        if old != image:
            raise WellDefinednessError(f"omega{pair} is both {old} and {image} (word {w})")
    return PsiImageTable(omega)


def in_psi_image(q0: QElement, q1: QElement) -> bool:
    return (q0, q1) in compute_psi_image_table().omega


def omega(q0: QElement, q1: QElement) -> QElement:
    return compute_psi_image_table().omega[q0, q1]


# -- text dumps -------------------------------------------------------------------

def multiplication_table_text() -> str:
    width = max(len(n) for n in NAMES) + 1
    head = " " * width + "".join(q.name.rjust(width) for q in SORTED_ELEMENTS)
    rows = [head]
    for g in SORTED_ELEMENTS:
        rows.append(g.name.rjust(width) + "".join((g * h).name.rjust(width) for h in SORTED_ELEMENTS))
    return "\n".join(rows)


def quotient_listing_text() -> str:
    """One row per quotient element: name, (b, rotation, reflection), St coset."""
    lines = ["name\tb\trot\tref\tst_coset"]
    for q in SORTED_ELEMENTS:
        lines.append(f"{q.name}\t{q.b_part}\t{q.rotation}\t{q.reflection}\t{st_coset(q)}")
    return "\n".join(lines)


def psi_table_text() -> str:
    table = compute_psi_image_table()
    lines = ["pi(psi_0)\tpi(psi_1)\tomega"]
    for (q0, q1), w in sorted(table.omega.items(), key=lambda kv: (ORDER_RANK[kv[1].index], ORDER_RANK[kv[0][0].index], ORDER_RANK[kv[0][1].index])):
        lines.append(f"{q0.name}\t{q1.name}\t{w.name}")
    return "\n".join(lines)


def all_pairs() -> Iterable[tuple[QElement, QElement]]:
    return itertools.product(ELEMENTS, repeat=2)
