"""Automorphisms fixing a product of commutators and their action on constraints.

``R_n = [x1,y1] ... [xn,yn]``.  The moves below all fix ``R_n`` (swaps up
to a renaming of the two blocks).  Constraints are rows of quotient
indices, one column per variable in the order ``x1, y1, x2, y2, ...``, so
a whole batch of constraints can be pushed through a move with numpy.

Reduction walks down the series ``Q > G1 > G2 > 1`` of the quotient
(``G1`` = no reflection, ``G2`` = rotations): at each level a cyclic
image is cleared from all blocks past the current one by Euclid's
algorithm, using transvections inside a block, a three-step chain
between neighbouring blocks, and block swaps.
"""

from __future__ import annotations

import functools

import numpy as np

from .equations import Letter, MixedWord, Variable, commutator_word
from .group import GroupElement
from .quotient import ELEMENTS, Q_IDENTITY, QElement, pi_k
from .batch import INV, MUL, apply_step_batch, word_values
from .standard import Renaming, Substitution, SubstitutionAutomorphism, Step


# cyclic images for the three levels, and their orders
LEVEL_MAPS = (
    np.array([q.reflection for q in ELEMENTS], dtype=np.int8),
    np.array([q.b_part for q in ELEMENTS], dtype=np.int8),
    np.array([q.rotation for q in ELEMENTS], dtype=np.int8),
)
LEVEL_ORDERS = (2, 2, 4)
WINDOW = 5


def xv(i: int) -> Variable:
    return Variable(f"x{i}")


def yv(i: int) -> Variable:
    return Variable(f"y{i}")


def rn_variables(n: int) -> list[Variable]:
    out = []
    for i in range(1, n + 1):
        out += [xv(i), yv(i)]
    return out


def rn_word(n: int) -> MixedWord:
    w = MixedWord()
    for i in range(1, n + 1):
        w = w * commutator_word(xv(i), yv(i))
    return w


def _l(v: Variable, e: int = 1) -> MixedWord:
    return MixedWord((Letter(v, e),))


# -- moves --------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def transvection(i: int, target: str, sign: int) -> SubstitutionAutomorphism:
    """``x_i -> y_i^-sign x_i`` (image of x_i shifts by ``sign * y_i``) or the same on ``y_i``."""
    x, y = xv(i), yv(i)
    if target == "x":
        return SubstitutionAutomorphism([Substitution(x, _l(y, -sign) * _l(x))])
    return SubstitutionAutomorphism([Substitution(y, _l(x, -sign) * _l(y))])


@functools.lru_cache(maxsize=None)
def block_swap(i: int) -> SubstitutionAutomorphism:
    """Exchange blocks ``i`` and ``i+1``: conjugate block ``i+1`` by ``[x_i,y_i]``, then rename."""
    c = commutator_word(xv(i), yv(i))
    steps: list[Step] = [
        Substitution(xv(i + 1), c.inverse() * _l(xv(i + 1)) * c),
        Substitution(yv(i + 1), c.inverse() * _l(yv(i + 1)) * c),
        Renaming.swap_pairs([(xv(i), xv(i + 1)), (yv(i), yv(i + 1))]),
    ]
    return SubstitutionAutomorphism(steps)


@functools.lru_cache(maxsize=None)
def chain(p: int) -> SubstitutionAutomorphism:
    """Three-step chain on blocks ``p, p+1``; adds the image of ``x_{p+1}`` to ``x_p`` when ``y_p`` is trivial."""
    x1, y1, x2, y2 = xv(p), yv(p), xv(p + 1), yv(p + 1)
    return SubstitutionAutomorphism([
        Substitution(x1, _l(x2, -1) * _l(x1) * _l(x2)),
        Substitution(y1, _l(x2, -1) * _l(y1) * _l(x2)),
        Substitution(x1, _l(x1) * _l(x2, -1)),
        Substitution(y2, _l(y2) * _l(y1)),
        Substitution(x2, _l(y1) * _l(x2) * _l(y1, -1)),
        Substitution(y2, _l(y1) * _l(y2) * _l(y1, -1)),
    ])


@functools.lru_cache(maxsize=None)
def chain_inverse(p: int) -> SubstitutionAutomorphism:
    return chain(p).inverse()


def generator_moves(n: int) -> list[SubstitutionAutomorphism]:
    """The generating moves for ``R_n`` together with their inverses."""
    moves = []
    for i in range(1, n + 1):
        for target in "xy":
            for sign in (1, -1):
                moves.append(transvection(i, target, sign))
    for i in range(1, n):
        moves += [block_swap(i), block_swap(i).inverse(), chain(i), chain_inverse(i)]
    return moves


# -- batch action on constraints ---------------------------------------------------------

class _RnColumns:
    """Column lookup for the ``x1, y1, x2, y2, ...`` layout."""

    def __getitem__(self, v: Variable) -> int:
        return column_of(v)


def column_of(v: Variable) -> int:
    k = int(v.name[1:])
    return 2 * (k - 1) + (0 if v.name[0] == "x" else 1)


RN_COLUMNS = _RnColumns()


def apply_move_batch(
    state: np.ndarray,
    move: SubstitutionAutomorphism,
    mask: np.ndarray | None = None,
    record: SubstitutionAutomorphism | None = None,
) -> None:
    if mask is not None and not mask.any():
        return
    for step in move.steps:
        apply_step_batch(state, step, RN_COLUMNS, mask)
    if record is not None:
        record.extend(move)


class _Reducer:
    def __init__(self, state: np.ndarray, record: SubstitutionAutomorphism | None):
        self.state = state
        self.n = state.shape[1] // 2
        self.record = record
        if record is not None and state.shape[0] != 1:
            raise ValueError("moves can only be recorded for a single constraint")

    def image(self, level: int, col: int) -> np.ndarray:
        return LEVEL_MAPS[level][self.state[:, col]].astype(np.int16) % LEVEL_ORDERS[level]

    def move(self, mv: SubstitutionAutomorphism, mask: np.ndarray) -> None:
        apply_move_batch(self.state, mv, mask, self.record if (self.record is not None and mask[0]) else None)

    def clear_y(self, level: int, i: int) -> None:
        cx, cy = 2 * (i - 1), 2 * (i - 1) + 1
        while True:
            u, v = self.image(level, cx), self.image(level, cy)
            active = v != 0
            if not active.any():
                return
            self.move(transvection(i, "x", 1), active & (u == 0))                 # u += v
            self.move(transvection(i, "x", -1), active & (u != 0) & (u > v))      # u -= v
            self.move(transvection(i, "y", -1), active & (u != 0) & (u <= v))     # v -= u

    def clear_x(self, level: int, i: int) -> None:
        """Make the image of ``x_i`` trivial using block ``i-1`` (both ``y`` images already trivial)."""
        ca, cb = 2 * (i - 2), 2 * (i - 1)
        while True:
            u, v = self.image(level, ca), self.image(level, cb)
            active = v != 0
            if not active.any():
                return
            self.move(chain_inverse(i - 1), active & (u >= v))  # u -= v
            self.move(block_swap(i - 1), active & (u < v))

    def run(self) -> None:
        for level in range(3):
            k = level + 1
            if k > self.n:
                break
            for i in range(k, self.n + 1):
                self.clear_y(level, i)
            for i in range(self.n, k, -1):
                self.clear_x(level, i)


def reduce_batch(state: np.ndarray, record: SubstitutionAutomorphism | None = None) -> np.ndarray:
    """Reduce every row in place; afterwards only ``x1, y1, x2, y2, x3`` may be non-trivial."""
    _Reducer(state, record).run()
    return state


def window_of(state: np.ndarray) -> np.ndarray:
    """Columns ``x1, x2, x3, y1, y2`` (the reduced 5-tuple)."""
    cols = [0, 2, 4, 1, 3]
    cols = [c for c in cols if c < state.shape[1]]
    return state[:, cols]


def reduce_commutator_constraint(
    n: int, gamma: dict[Variable, QElement]
) -> tuple[dict[Variable, QElement], SubstitutionAutomorphism]:
    """Equivalent constraint on ``R_n`` trivial outside ``x1, x2, x3, y1, y2``, with the automorphism used."""
    if n < 3:
        raise ValueError("reduction needs n >= 3")
    variables = rn_variables(n)
    state = np.array([[gamma.get(v, Q_IDENTITY).index for v in variables]], dtype=np.uint8)
    phi = SubstitutionAutomorphism()
    reduce_batch(state, phi)
    return {v: ELEMENTS[int(state[0, column_of(v)])] for v in variables}, phi


def is_reduced(gamma: dict[Variable, QElement], n: int) -> bool:
    keep = {xv(1), xv(2), xv(3), yv(1), yv(2)}
    return all(q.is_identity() for v, q in gamma.items() if v not in keep and column_of(v) < 2 * n)
