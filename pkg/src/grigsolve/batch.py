"""Constraints in bulk: rows of quotient indices, one column per variable.

The same transport rule as :func:`grigsolve.standard.transport_step`,
applied to many constraints at once with table lookups.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .equations import MixedWord, Variable
from .group import GroupElement
from .quotient import ELEMENTS, QElement, pi_k
from .standard import Renaming, Step, SubstitutionAutomorphism

MUL = np.array([[(p * q).index for q in ELEMENTS] for p in ELEMENTS], dtype=np.uint8)
INV = np.array([p.inverse().index for p in ELEMENTS], dtype=np.uint8)


def word_values(state: np.ndarray, w: MixedWord, columns: Mapping[Variable, int]) -> np.ndarray:
    """Quotient value of ``w`` under every row of ``state``."""
    out = np.zeros(state.shape[0], dtype=np.uint8)
    for atom in w.atoms:
        if isinstance(atom, GroupElement):
            val = np.full(state.shape[0], pi_k(atom).index, dtype=np.uint8)
        else:
            val = state[:, columns[atom.var]]
            if atom.sign == -1:
                val = INV[val]
        out = MUL[out, val]
    return out


def apply_step_batch(
    state: np.ndarray,
    step: Step,
    columns: Mapping[Variable, int],
    mask: np.ndarray | None = None,
) -> None:
    """In-place: every row ``gamma`` becomes the transported constraint (same rule as ``transport_step``)."""
    column = columns.__getitem__
    if isinstance(step, Renaming):
        src = [column(a) for a, _ in step.mapping]
        dst = [column(b) for _, b in step.mapping]
        moved = state[:, src].copy()
        if mask is None:
            state[:, dst] = moved
        else:
            rows = np.nonzero(mask)[0]
            state[np.ix_(rows, dst)] = moved[rows]
        return
    u, e, v = step.parts
    col = column(step.var)
    q = MUL[MUL[INV[word_values(state, u, columns)], state[:, col]], INV[word_values(state, v, columns)]]
    if e == -1:
        q = INV[q]
    if mask is None:
        state[:, col] = q
    else:
        state[:, col] = np.where(mask, q, state[:, col])



def transport_batch(state: np.ndarray, phi: SubstitutionAutomorphism, columns: Mapping[Variable, int]) -> None:
    for step in phi.steps:
        apply_step_batch(state, step, columns)


def rows_to_constraints(state: np.ndarray, variables: list[Variable]) -> list[dict[Variable, QElement]]:
    return [{v: ELEMENTS[int(i)] for v, i in zip(variables, row)} for row in state]
