"""Experiments on products of commutators.

``theta_orbits`` partitions the reduced constraint windows
``(x1, x2, x3, y1, y2)`` on ``[x1,y1]...[xn,yn]`` into classes joined by
the generating moves followed by reduction.  Edges found for smaller ``n``
stay valid for larger ``n`` (a move on the first blocks extends by the
identity), so the edge set is cumulative and class counts can only drop.

``width_probe`` looks for the least number of commutators that multiply
to a given element.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .equations import MixedWord, Variable
from .group import GroupElement, in_commutator_subgroup, is_trivial
from .pipeline import SOLVABLE, UNKNOWN, UNSOLVABLE, SearchBudget, SolvabilityLedger, brute_force, decide
from .stabilizer import apply_move_batch, generator_moves, reduce_batch, rn_word

WINDOW_COLUMNS = (0, 2, 4, 1, 3)  # x1, x2, x3, y1, y2
N_WINDOWS = 16 ** 5


def window_states(n: int) -> np.ndarray:
    """Every window tuple embedded as a constraint on ``R_n`` (other columns trivial)."""
    idx = np.arange(N_WINDOWS, dtype=np.int64)
    state = np.zeros((N_WINDOWS, 2 * n), dtype=np.uint8)
    for k, col in enumerate(WINDOW_COLUMNS):
        state[:, col] = (idx >> (4 * k)) & 15
    return state


def window_ids(state: np.ndarray) -> np.ndarray:
    out = np.zeros(state.shape[0], dtype=np.int64)
    for k, col in enumerate(WINDOW_COLUMNS):
        out |= state[:, col].astype(np.int64) << (4 * k)
    return out


def _digest(ids: np.ndarray, rows: np.ndarray) -> bytes:
    h = hashlib.blake2b(digest_size=32)
    h.update(ids.tobytes())
    h.update(np.ascontiguousarray(rows).tobytes())
    return h.digest()


def _trimmed_width(state: np.ndarray) -> int:
    """Columns up to the last non-trivial block."""
    nonzero = np.flatnonzero(state.any(axis=0))
    blocks = (int(nonzero[-1]) // 2 + 1) if len(nonzero) else 0
    return 2 * blocks


class _EdgeCache:
    """Edges already found for a smaller ``n``.

    Reduction ignores trailing trivial blocks, so a move that produces the
    same rows as before (up to such blocks) produces the same edges; those
    are skipped instead of being reduced again.
    """

    def __init__(self):
        self.seen: set[bytes] = set()

    def new_edges(self, ids: np.ndarray, moved: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
        key = _digest(ids, moved[:, :_trimmed_width(moved)])
        if key in self.seen:
            return None
        self.seen.add(key)
        return ids, window_ids(reduce_batch(moved))


def _edges_for(n: int, cache: _EdgeCache | None = None) -> list[tuple[np.ndarray, np.ndarray]]:
    """Edges contributed by ``R_n`` (only those not already in ``cache``)."""
    cache = cache if cache is not None else _EdgeCache()
    base = window_states(n)
    ids = np.arange(N_WINDOWS, dtype=np.int64)
    found = [cache.new_edges(ids, base.copy())]
    for move in generator_moves(n):
        state = base.copy()
        apply_move_batch(state, move)
        changed = (state != base).any(axis=1)
        if changed.any():
            found.append(cache.new_edges(ids[changed], state[changed]))
    return [e for e in found if e is not None]


@dataclass
class ThetaReport:
    counts: dict[int, int]  # n -> number of classes
    labels: dict[int, np.ndarray] = field(repr=False, default_factory=dict)

    @property
    def stabilized_at(self) -> int | None:
        """First ``n`` whose partition equals the next one, if observed."""
        ns = sorted(self.counts)
        for a, b in zip(ns, ns[1:]):
            if self.counts[a] == self.counts[b] and _same_partition(self.labels[a], self.labels[b]):
                return a
        return None

    def csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "classes"])
        for n in sorted(self.counts):
            writer.writerow([n, self.counts[n]])
        return buf.getvalue()


def _same_partition(a: np.ndarray, b: np.ndarray) -> bool:
    pairs = np.unique(np.stack([a, b], axis=1), axis=0)
    return len(pairs) == len(np.unique(a)) == len(np.unique(b))


def theta_orbits(n_values, keep_labels: bool = True) -> ThetaReport:
    """Class counts of the window tuples for each ``n`` (all ``n >= 3``)."""
    n_values = sorted(n_values)
    if not n_values or n_values[0] < 3:
        raise ValueError("theta orbits need n >= 3")
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    report = ThetaReport({})
    cache = _EdgeCache()
    for n in range(3, n_values[-1] + 1):
        for a, b in _edges_for(n, cache):
            rows.append(a)
            cols.append(b)
        if n not in n_values:
            continue
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(N_WINDOWS, N_WINDOWS))
        count, labels = connected_components(graph, directed=True, connection="weak")
        report.counts[n] = int(count)
        if keep_labels:
            report.labels[n] = labels
    return report


# -- width probes -----------------------------------------------------------------------

class NotInCommutatorSubgroup(ValueError):
    pass


@dataclass
class WidthResult:
    n: int | None  # least n found solvable, None if none up to n_max
    exact: bool  # every smaller n was shown unsolvable
    witness: dict[Variable, GroupElement] | None = None
    statuses: dict[int, str] = field(default_factory=dict)


def commutator_equation(n: int, g: GroupElement) -> MixedWord:
    """``[x1,y1]...[xn,yn] g^-1``."""
    w = rn_word(n)
    if not is_trivial(g):
        w = w * MixedWord((g.inverse(),))
    return w


def width_probe(
    g: GroupElement,
    n_max: int = 3,
    budget: SearchBudget | None = None,
    ledger: SolvabilityLedger | None = None,
) -> WidthResult:
    """Least ``n <= n_max`` such that ``g`` is a product of ``n`` commutators."""
    if not in_commutator_subgroup(g):
        raise NotInCommutatorSubgroup(f"{g} is not in the commutator subgroup")
    budget = budget or SearchBudget(max_len=2)
    ledger = ledger if ledger is not None else SolvabilityLedger()
    statuses: dict[int, str] = {}
    exact = True
    for n in range(n_max + 1):
        w = commutator_equation(n, g)
        if n == 0:
            status = SOLVABLE if is_trivial(g) else UNSOLVABLE
            if status == SOLVABLE:
                statuses[0] = status
                return WidthResult(0, True, {}, statuses)
            statuses[0] = status
            continue
        res = brute_force(w, None, budget.max_len, budget.evaluations)
        if res.witness is not None:
            statuses[n] = SOLVABLE
            return WidthResult(n, exact, res.witness, statuses)
        try:
            d = decide(w, None, budget, ledger)
            status = d.status
        except OverflowError:
            status = UNKNOWN
        statuses[n] = status
        if status == SOLVABLE:
            return WidthResult(n, exact, d.witness, statuses)
        if status == UNKNOWN:
            exact = False
    return WidthResult(None, exact, None, statuses)


def pad_witness(witness: dict[Variable, GroupElement], n: int) -> dict[Variable, GroupElement]:
    """A solution for ``n + 1`` commutators from one for ``n`` (the new block is trivial)."""
    out = dict(witness)
    out[Variable(f"x{n + 1}")] = GroupElement("")
    out[Variable(f"y{n + 1}")] = GroupElement("")
    return out
