"""Splitting words and constrained quadratic equations along the first level of the tree.

``split_word`` simulates ``psi_0`` and ``psi_1`` on a word with variables,
given the St(1)-cosets of the variables (read off the constraint).  Each
variable ``x`` gets two descendants ``x_0, x_1`` standing for the two
restrictions of ``bar(x)``.
"""

from __future__ import annotations

import itertools

import numpy as np
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .equations import (
    EquationError,
    Letter,
    MixedWord,
    Variable,
    free_reduce,
    freeze,
    gamma_eval,
    join,
    sigma,
)
from .group import A, GroupElement, bar, in_st1, psi
from .quotient import Q_IDENTITY, QElement, bar_q, compute_psi_image_table, st_coset
from .batch import rows_to_constraints, transport_batch, word_values
from .standard import StandardQuadratic, is_standard_word, to_standard


def _psi_pair(g: GroupElement, parity: int) -> tuple[GroupElement, GroupElement]:
    p0, p1 = psi(bar(g))
    # psi(a u a) swaps the components
    return (p0, p1) if parity == 0 else (p1, p0)


def split_word(w: MixedWord, gamma: Mapping[Variable, QElement]) -> tuple[MixedWord, MixedWord]:
    """The pair ``(Psi_0(w), Psi_1(w))`` (not freely reduced)."""
    out0: list = []
    out1: list = []
    parity = 0
    for atom in w.atoms:
        if isinstance(atom, GroupElement):
            c0, c1 = _psi_pair(atom, parity)
            out0.append(c0)
            out1.append(c1)
            parity ^= in_st1(atom) ^ 1
            continue
        try:
            s = st_coset(gamma[atom.var])
        except KeyError:
            raise EquationError(f"no constraint for {atom.var}") from None
        if atom.sign == -1:
            parity ^= s  # inverse letters use the parity including themselves
            d = parity
        else:
            d = parity
            parity ^= s
        out0.append(Letter(atom.var.descendant(d), atom.sign))
        out1.append(Letter(atom.var.descendant(1 - d), atom.sign))
    return MixedWord(out0), MixedWord(out1)


def induced_solution(alpha: Mapping[Variable, GroupElement]) -> dict[Variable, GroupElement]:
    out = {}
    for x, g in alpha.items():
        p0, p1 = psi(bar(g))
        out[x.descendant(0)] = p0
        out[x.descendant(1)] = p1
    return out


def constraint_family(
    w: MixedWord, gamma: Mapping[Variable, QElement], variables=None
) -> Iterator[dict[Variable, QElement]]:
    """All descendant constraints ``zeta`` with ``omega(zeta(x_0), zeta(x_1)) = bar(gamma(x))`` (lazy)."""
    table = compute_psi_image_table()
    xs = sorted(w.vars() if variables is None else variables)
    fibers = [table.fiber(bar_q(gamma[x])) for x in xs]
    for choice in itertools.product(*fibers):
        zeta = {}
        for x, (q0, q1) in zip(xs, choice):
            zeta[x.descendant(0)] = q0
            zeta[x.descendant(1)] = q1
        yield zeta


def family_size(w: MixedWord, gamma: Mapping[Variable, QElement]) -> int:
    table = compute_psi_image_table()
    n = 1
    for x in w.vars():
        n *= len(table.fiber(bar_q(gamma[x])))
    return n


def family_array(
    w: MixedWord, gamma: Mapping[Variable, QElement]
) -> tuple[np.ndarray, list[Variable]]:
    """The whole family as rows of quotient indices over the descendant columns."""
    table = compute_psi_image_table()
    xs = sorted(w.vars())
    columns = [d for x in xs for d in (x.descendant(0), x.descendant(1))]
    fibers = [np.array([(p.index, q.index) for p, q in table.fiber(bar_q(gamma[x]))], dtype=np.uint8) for x in xs]
    if any(len(f) == 0 for f in fibers):
        return np.zeros((0, len(columns)), dtype=np.uint8), columns
    grids = np.meshgrid(*[np.arange(len(f)) for f in fibers], indexing="ij")
    picks = [g.reshape(-1) for g in grids]
    state = np.empty((len(picks[0]) if picks else 1, len(columns)), dtype=np.uint8)
    for k, (f, pick) in enumerate(zip(fibers, picks)):
        state[:, 2 * k:2 * k + 2] = f[pick]
    return state, columns


def _admissible(
    w: MixedWord, gamma: Mapping[Variable, QElement], w0: MixedWord, w1: MixedWord
) -> tuple[np.ndarray, dict[Variable, int], list[Variable]]:
    """Family rows with ``zeta(Psi_0) = zeta(Psi_1) = 1``."""
    state, variables = family_array(w, gamma)
    columns = {v: i for i, v in enumerate(variables)}
    keep = (word_values(state, w0, columns) == 0) & (word_values(state, w1, columns) == 0)
    return state[keep], columns, variables


def _restrict(zeta: Mapping[Variable, QElement], w: MixedWord) -> dict[Variable, QElement]:
    return {v: zeta[v] for v in sorted(w.vars())}


@dataclass
class SplitSystem:
    """The system ``{Psi_0(W) = 1, Psi_1(W) = 1}`` with one descendant constraint."""

    words: tuple[MixedWord, MixedWord]
    constraint: dict[Variable, QElement]


def split_reduction(w: MixedWord, gamma: Mapping[Variable, QElement]) -> list[SplitSystem]:
    """Disjunction equivalent to ``(w = 1, gamma)``; empty means definitely unsolvable.

    Branches whose words fail the quotient test ``zeta(Psi_i) = 1`` are dropped
    since they cannot be solvable.
    """
    if sigma(w, gamma) != 0 or not gamma_eval(w, gamma).is_identity():
        return []
    w0, w1 = (free_reduce(x) for x in split_word(w, gamma))
    rows, _, variables = _admissible(w, gamma, w0, w1)
    return [SplitSystem((w0, w1), zeta) for zeta in rows_to_constraints(rows, variables)]


# -- standard equations ----------------------------------------------------------------

@dataclass(frozen=True)
class ConstrainedStandard:
    word: StandardQuadratic
    constraint: tuple  # frozen constraint, see equations.freeze

    @classmethod
    def make(cls, q: StandardQuadratic, zeta: Mapping[Variable, QElement]) -> "ConstrainedStandard":
        return cls(q, freeze({v: zeta.get(v, Q_IDENTITY) for v in q.variables()}))

    @classmethod
    def from_row(cls, q: StandardQuadratic, row) -> "ConstrainedStandard":
        return cls(q, tuple(sorted(zip(q.variables(), (int(i) for i in row)))))

    def gamma(self) -> dict[Variable, QElement]:
        from .quotient import ELEMENTS

        return {v: ELEMENTS[i] for v, i in self.constraint}


@dataclass
class StandardSplit:
    case: str  # "disjoint" or "joint"
    branches: list[tuple[ConstrainedStandard, ...]]
    trace: list[str] = field(default_factory=list)
    joined_on: Variable | None = None


def delta(q: StandardQuadratic) -> int:
    """Number of coefficients outside St(1)."""
    return sum(1 for _, c in q.coefficients if not in_st1(c))


def expected_genus(q: StandardQuadratic) -> int:
    d = delta(q)
    if q.orientable:
        return 2 * q.genus + d // 2 - 1
    return 2 * q.genus + d - 2


def coefficient_options(q: StandardQuadratic) -> list[tuple[GroupElement, ...]]:
    """Per coefficient, the candidate images in the joined standard form."""
    out = []
    for _, c in q.coefficients:
        if in_st1(c):
            out.append(psi(c))
        else:
            p0, p1 = psi(c * A)
            out.append((p0 * p1, p1 * p0))
    return out


def _block_trace(q: StandardQuadratic, gamma: Mapping[Variable, QElement]) -> list[str]:
    lines = []
    for x, y in q.commutator_vars:
        lines.append(f"block [{x},{y}] sigma=({st_coset(gamma[x])},{st_coset(gamma[y])})")
    for x in q.square_vars:
        lines.append(f"block {x}^2 sigma={st_coset(gamma[x])}")
    for z, c in q.coefficients:
        lines.append(f"block {z}^-1 {c} {z} sigma={st_coset(gamma[z])} c_in_St={int(in_st1(c))}")
    return lines


def split_standard(q: StandardQuadratic, gamma: Mapping[Variable, QElement]) -> StandardSplit:
    """Split a constrained standard equation into a disjunction of standard ones.

    Disjoint case: each branch is a pair of independent equations.  Joint
    case: each branch is a single equation, the standard form of
    ``Psi_0 # Psi_1`` joined on the smallest shared variable.
    """
    gamma = {v: gamma[v] for v in q.variables()}
    w = q.word()
    if sigma(w, gamma) != 0:
        raise EquationError("split_standard needs an equation inside St(1)")
    trace = _block_trace(q, gamma)
    w0, w1 = (free_reduce(x) for x in split_word(w, gamma))
    shared = sorted(w0.vars() & w1.vars())
    branches: list[tuple[ConstrainedStandard, ...]] = []

    rows, columns, variables = _admissible(w, gamma, w0, w1)
    if not shared:
        s0, s1 = is_standard_word(w0), is_standard_word(w1)
        if s0 is None or s1 is None:
            raise AssertionError(f"disjoint split is not standard: {w0} / {w1}")
        trace.append(f"disjoint: genus {s0.genus} and {s1.genus}")
        v0, v1 = s0.variables(), s1.variables()
        c0 = [columns[v] for v in v0]
        c1 = [columns[v] for v in v1]
        pairs = np.unique(np.concatenate([rows[:, c0], rows[:, c1]], axis=1), axis=0)
        for row in pairs:
            branches.append((
                ConstrainedStandard.from_row(s0, row[:len(c0)]),
                ConstrainedStandard.from_row(s1, row[len(c0):]),
            ))
        return StandardSplit("disjoint", branches, trace)

    x = shared[0]
    joined = join(w0, w1, x)
    r, phi, _ = to_standard(joined)
    trace.append(f"joint on {x}: genus {r.genus} (expected {expected_genus(q)}), {r.m} coefficients")
    extra = set(r.variables())
    for step in phi.steps:
        extra |= step.replacement.vars() if hasattr(step, "replacement") else {b for _, b in step.mapping}
    extra -= set(columns)
    wide = np.zeros((rows.shape[0], len(columns) + len(extra)), dtype=np.uint8)
    wide[:, :rows.shape[1]] = rows
    cols = dict(columns)
    for v in sorted(extra):
        cols[v] = len(cols)
    transport_batch(wide, phi, cols)
    out = np.unique(wide[:, [cols[v] for v in r.variables()]], axis=0)
    for row in out:
        branches.append((ConstrainedStandard.from_row(r, row),))
    return StandardSplit("joint", branches, trace, joined_on=x)
