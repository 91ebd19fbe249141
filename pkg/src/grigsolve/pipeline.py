"""Deciding constrained quadratic equations.

The procedure: bring the equation to standard form, enumerate the
constraints it can carry, split until every coefficient is short (length
at most 3), order the blocks, and encode each leaf as a vector of block
counts.  Leaves are looked up in a ledger of known solvable codes, where
adding full-order padding blocks keeps an equation solvable; otherwise a
bounded search over a ball is run.  Verdicts are sound but may be UNKNOWN.
"""

from __future__ import annotations

import fcntl
import functools
import itertools
import os
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .batch import word_values
from .equations import (
    EquationError,
    Letter,
    MixedWord,
    Variable,
    eval_word,
    gamma_eval,
    is_quadratic,
    satisfies,
)
from .group import GroupElement, ball, canonical_key, commutator, in_st1, is_trivial, order, psi
from .group import A
from .quotient import ELEMENTS, ORDER_RANK, Q_IDENTITY, QElement, parse_q, pi_k, witness
from .splitting import family_size, split_standard
from .standard import (
    StandardQuadratic,
    SubstitutionAutomorphism,
    apply,
    coefficient_rank,
    ordered_form,
    to_standard,
    transport,
)

SHORT_LENGTH = 3
SOLVABLE, UNSOLVABLE, UNKNOWN = "SOLVABLE", "UNSOLVABLE", "UNKNOWN"
EXIT_CODES = {SOLVABLE: 0, UNKNOWN: 2, UNSOLVABLE: 3}


# -- short coefficients ---------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def short_set() -> tuple[GroupElement, ...]:
    """Distinct elements of length at most 3, shortlex-least representatives."""
    return ball(SHORT_LENGTH)


@functools.lru_cache(maxsize=None)
def _short_index() -> dict[int, int]:
    return {canonical_key(g): i for i, g in enumerate(short_set())}


def short_index(c: GroupElement) -> int | None:
    return _short_index().get(canonical_key(c))


def is_short(c: GroupElement) -> bool:
    return short_index(c) is not None


# -- coefficient contraction ----------------------------------------------------------

def contraction_bound(g: GroupElement) -> int:
    """``200 + ceil(log_1.22 max(1, |g| - 200))``, computed exactly in integers."""
    excess = max(1, len(g) - 200)
    k = 0
    while 61 ** k < excess * 50 ** k:  # 1.22 = 61/50
        k += 1
    return 200 + k


def coefficient_successors(g: GroupElement) -> tuple[GroupElement, GroupElement]:
    """The two possible next coefficients after one splitting round."""
    if in_st1(g):
        return psi(g)
    p0, p1 = psi(g * A)
    return p0 * p1, p1 * p0


def contraction_depth(g: GroupElement, limit: int | None = None) -> int:
    """Least ``n`` such that every branch of the coefficient map has length <= 3 from step ``n`` on.

    All branches are followed at once (deduplicated); ``limit`` defaults to
    the analytic bound, and ``RuntimeError`` is raised if it is exceeded.
    """
    limit = contraction_bound(g) if limit is None else limit
    level = {canonical_key(g): g}
    for n in range(limit + 1):
        if all(is_short(h) for h in level.values()):
            return n
        nxt = {}
        for h in level.values():
            for s in coefficient_successors(h):
                nxt.setdefault(canonical_key(s), s)
        level = nxt
    raise RuntimeError(f"coefficient {g} not short after {limit} rounds")


# -- codes ------------------------------------------------------------------------------

N_Q = len(ELEMENTS)


def n_coordinates() -> int:
    return N_Q * N_Q + N_Q * len(short_set())


def pair_coordinate(g: QElement, h: QElement) -> int:
    return g.index * N_Q + h.index


def coefficient_coordinate(g: QElement, c_index: int) -> int:
    return N_Q * N_Q + g.index * len(short_set()) + c_index


def describe_coordinate(i: int) -> str:
    if i < N_Q * N_Q:
        return f"({ELEMENTS[i // N_Q].name},{ELEMENTS[i % N_Q].name})"
    j = i - N_Q * N_Q
    g, c = divmod(j, len(short_set()))
    return f"({ELEMENTS[g].name},{short_set()[c]})"


@dataclass(frozen=True)
class EquationCode:
    """Block counts of an ordered short equation.

    Commutators ``[x,y]`` count at ``(gamma(x), gamma(y))``, conjugated
    coefficients ``z^-1 c z`` at ``(gamma(z), c)``.  For non-orientable
    equations the squares ``x^2`` count on the diagonal ``(gamma(x), gamma(x))``.
    """

    orientable: bool
    counts: tuple[int, ...]

    @classmethod
    def zero(cls, orientable: bool = True) -> "EquationCode":
        return cls(orientable, (0,) * n_coordinates())

    @classmethod
    def from_sparse(cls, orientable: bool, items: Mapping[int, int]) -> "EquationCode":
        counts = [0] * n_coordinates()
        for i, k in items.items():
            counts[i] = k
        return cls(orientable, tuple(counts))

    def array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)

    def sparse(self) -> dict[int, int]:
        return {i: k for i, k in enumerate(self.counts) if k}

    def __add__(self, other: "EquationCode") -> "EquationCode":
        if self.orientable != other.orientable:
            raise ValueError("codes of different orientability")
        return EquationCode(self.orientable, tuple(a + b for a, b in zip(self.counts, other.counts)))

    def text(self) -> str:
        kind = "O" if self.orientable else "N"
        body = ",".join(f"{i}:{k}" for i, k in self.sparse().items())
        return f"{kind} {body or '-'}"

    @classmethod
    def parse(cls, text: str) -> "EquationCode":
        kind, body = text.split()
        items = {} if body == "-" else {int(i): int(k) for i, k in (p.split(":") for p in body.split(","))}
        return cls.from_sparse(kind == "O", items)

    def __str__(self) -> str:
        parts = [f"{describe_coordinate(i)}x{k}" for i, k in self.sparse().items()]
        return ("orientable " if self.orientable else "non-orientable ") + (" ".join(parts) or "0")


def normalize_coefficients(q: StandardQuadratic) -> StandardQuadratic:
    """Replace short coefficients by their fixed representatives."""
    coeffs = []
    for z, c in q.coefficients:
        i = short_index(c)
        coeffs.append((z, c if i is None else short_set()[i]))
    return StandardQuadratic(q.orientable, q.commutator_vars, q.square_vars, tuple(coeffs))


def encode(q: StandardQuadratic, gamma: Mapping[Variable, QElement]) -> EquationCode:
    """Code of an ordered equation whose coefficients are all short."""
    counts = [0] * n_coordinates()
    prev = None
    for x, y in q.commutator_vars:
        key = (ORDER_RANK[gamma[x].index], ORDER_RANK[gamma[y].index])
        if prev is not None and key < prev:
            raise EquationError("encode needs an ordered equation")
        prev = key
        counts[pair_coordinate(gamma[x], gamma[y])] += 1
    prev = None
    for x in q.square_vars:
        key = ORDER_RANK[gamma[x].index]
        if prev is not None and key < prev:
            raise EquationError("encode needs an ordered equation")
        prev = key
        counts[pair_coordinate(gamma[x], gamma[x])] += 1
    prev = None
    for z, c in q.coefficients:
        i = short_index(c)
        if i is None:
            raise EquationError(f"coefficient {c} is not short")
        key = (coefficient_rank(short_set()[i]), ORDER_RANK[gamma[z].index])
        if prev is not None and key < prev:
            raise EquationError("encode needs an ordered equation")
        prev = key
        counts[coefficient_coordinate(gamma[z], i)] += 1
    return EquationCode(q.orientable, tuple(counts))


def equation_from_code(code: EquationCode) -> tuple[StandardQuadratic, dict[Variable, QElement]]:
    """The ordered equation with fixed variable names that has this code."""
    gamma: dict[Variable, QElement] = {}
    comms, squares, coeffs = [], [], []
    pairs = []
    for i in range(N_Q * N_Q):
        g, h = ELEMENTS[i // N_Q], ELEMENTS[i % N_Q]
        pairs += [(g, h)] * code.counts[i]
    pairs.sort(key=lambda p: (ORDER_RANK[p[0].index], ORDER_RANK[p[1].index]))
    for k, (g, h) in enumerate(pairs, 1):
        if code.orientable:
            x, y = Variable(f"x{k}"), Variable(f"y{k}")
            comms.append((x, y))
            gamma[x], gamma[y] = g, h
        else:
            if g != h:
                raise ValueError("non-orientable code off the diagonal")
            x = Variable(f"s{k}")
            squares.append(x)
            gamma[x] = g
    blocks = []
    for j in range(N_Q * len(short_set())):
        g, c = divmod(j, len(short_set()))
        blocks += [(short_set()[c], ELEMENTS[g])] * code.counts[N_Q * N_Q + j]
    blocks.sort(key=lambda b: (coefficient_rank(b[0]), ORDER_RANK[b[1].index]))
    for k, (c, g) in enumerate(blocks, 1):
        z = Variable(f"z{k}")
        coeffs.append((z, c))
        gamma[z] = g
    if not code.orientable and not squares:
        if coeffs:
            raise ValueError("non-orientable code without squares")
        return StandardQuadratic(True), gamma
    return StandardQuadratic(code.orientable, tuple(comms), tuple(squares), tuple(coeffs)), gamma


# -- the cone of padding moves ---------------------------------------------------------

@functools.lru_cache(maxsize=None)
def cone_weights(orientable: bool = True) -> np.ndarray:
    """Generator weight per coordinate; 0 where there is no generator.

    A commutator coordinate ``(g,h)`` has weight ``order([g^, h^])`` for the
    fixed transversal representatives; a square coordinate ``(g,g)`` has
    weight ``order(g^2)``; a coefficient coordinate ``(g,c)`` has weight ``order(c)``.
    """
    w = np.zeros(n_coordinates(), dtype=np.int64)
    reps = [witness(q) for q in ELEMENTS]
    for g in ELEMENTS:
        for h in ELEMENTS:
            if orientable:
                w[pair_coordinate(g, h)] = order(commutator(reps[g.index], reps[h.index]))
            elif g == h:
                w[pair_coordinate(g, h)] = order(reps[g.index] * reps[g.index])
        for i, c in enumerate(short_set()):
            w[coefficient_coordinate(g, i)] = order(c)
    return w


def generator(i: int, orientable: bool = True) -> EquationCode:
    """The cone generator at coordinate ``i`` (weight times the unit vector)."""
    w = int(cone_weights(orientable)[i])
    if w == 0:
        raise ValueError(f"no generator at coordinate {i}")
    return EquationCode.from_sparse(orientable, {i: w})


def cone_multiples(code: EquationCode, base: EquationCode) -> dict[int, int] | None:
    """Multiples ``t_i`` with ``code = base + sum t_i * generator_i``, or ``None``."""
    if code.orientable != base.orientable:
        return None
    diff = code.array() - base.array()
    if (diff < 0).any():
        return None
    w = cone_weights(code.orientable)
    nz = diff != 0
    if (nz & (w == 0)).any():
        return None
    if (diff[nz] % w[nz]).any():
        return None
    return {int(i): int(diff[i] // w[i]) for i in np.flatnonzero(nz)}


def minimal_elements(samples: Iterable[Iterable[int]]) -> list[tuple[int, ...]]:
    """Minimal vectors of a finite set; their upward closures cover its upward closure."""
    vecs = sorted({tuple(int(x) for x in v) for v in samples}, key=sum)
    out: list[tuple[int, ...]] = []
    for v in vecs:
        if not any(all(a <= b for a, b in zip(m, v)) for m in out):
            out.append(v)
    return out


def in_upward_closure(v: Iterable[int], basis: Iterable[Iterable[int]]) -> bool:
    v = tuple(v)
    return any(all(a <= b for a, b in zip(m, v)) for m in basis)


# -- brute force ------------------------------------------------------------------------

@dataclass
class SearchResult:
    witness: dict[Variable, GroupElement] | None
    complete: bool  # False if the evaluation budget ran out
    evaluations: int


def candidates(gamma: QElement | None, max_len: int) -> list[GroupElement]:
    pool = ball(max_len)
    if gamma is None:
        return list(pool)
    return [g for g in pool if pi_k(g) == gamma]


def brute_force(
    w: MixedWord,
    gamma: Mapping[Variable, QElement] | None = None,
    max_len: int = 3,
    budget: int | None = None,
) -> SearchResult:
    """Search assignments from the ball of radius ``max_len`` (respecting ``gamma``) for a solution."""
    xs = sorted(w.vars())
    pools = [candidates(None if gamma is None else gamma.get(x, Q_IDENTITY), max_len) for x in xs]
    count = 0
    for values in itertools.product(*pools):
        if budget is not None and count >= budget:
            return SearchResult(None, False, count)
        count += 1
        alpha = dict(zip(xs, values))
        if is_trivial(eval_word(w, alpha)):
            return SearchResult(alpha, True, count)
    return SearchResult(None, True, count)


# -- ledger ------------------------------------------------------------------------------

@dataclass(frozen=True)
class LedgerEntry:
    status: str
    witness: tuple[tuple[str, str], ...] = ()  # variable name -> word, for the equation of the code
    ancestor: EquationCode | None = None  # set for verdicts derived by padding
    multiples: tuple[tuple[int, int], ...] = ()
    bound: int = -1  # search radius behind an UNKNOWN

    def line(self, code: EquationCode) -> str:
        if self.status == SOLVABLE:
            extra = " ".join(f"{v}={g or '1'}" for v, g in self.witness) or "-"
        else:
            extra = f"max_len={self.bound}"
        return f"{self.status}\t{code.text()}\t{extra}\n"

    @classmethod
    def parse_line(cls, line: str) -> tuple[EquationCode, "LedgerEntry"]:
        status, code_text, extra = line.rstrip("\n").split("\t")
        code = EquationCode.parse(code_text)
        if status == SOLVABLE:
            pairs = () if extra == "-" else tuple(
                (v, "" if g == "1" else g) for v, g in (p.split("=") for p in extra.split())
            )
            return code, cls(SOLVABLE, witness=pairs)
        return code, cls(UNKNOWN, bound=int(extra.split("=")[1]))


class SolvabilityLedger:
    """Known verdicts by code, optionally persisted as a line-oriented text file.

    Solvable entries carry a witness for the equation rebuilt from the code;
    lookups also answer every code reachable from a solvable one by padding.
    Safe to share between threads; file updates take an exclusive lock.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = path
        self.entries: dict[EquationCode, LedgerEntry] = {}
        self._lock = threading.Lock()
        for orientable in (True, False):
            self.entries[EquationCode.zero(orientable)] = LedgerEntry(SOLVABLE)
        if path is not None and os.path.exists(path):
            with open(path) as fh:
                self._merge(fh.read())

    def _merge(self, text: str) -> None:
        for line in text.splitlines():
            if line.strip() and not line.startswith("#"):
                code, entry = LedgerEntry.parse_line(line)
                self._put(code, entry)

    def _put(self, code: EquationCode, entry: LedgerEntry) -> bool:
        old = self.entries.get(code)
        if old is not None and (old.status == SOLVABLE or (entry.status == UNKNOWN and old.bound >= entry.bound)):
            return False
        self.entries[code] = entry
        return True

    def solvable_codes(self, orientable: bool) -> list[EquationCode]:
        return [c for c, e in self.entries.items() if e.status == SOLVABLE and c.orientable == orientable]

    def lookup(self, code: EquationCode) -> LedgerEntry | None:
        with self._lock:
            entry = self.entries.get(code)
            if entry is not None and entry.status == SOLVABLE:
                return entry
            bases = self.solvable_codes(code.orientable)
        if bases:
            m = np.array([b.counts for b in bases], dtype=np.int64)
            diff = code.array()[None, :] - m
            w = cone_weights(code.orientable)
            safe = np.where(w == 0, 1, w)
            ok = (diff >= 0).all(axis=1)
            ok &= ~((diff != 0) & (w == 0)).any(axis=1)
            ok &= ~(diff % safe).any(axis=1)
            hits = np.flatnonzero(ok)
            if len(hits):
                # prefer the ancestor closest to the query
                base = bases[min(hits, key=lambda k: int(diff[k].sum()))]
                mult = cone_multiples(code, base)
                return LedgerEntry(SOLVABLE, ancestor=base, multiples=tuple(sorted(mult.items())))
        return entry

    def record(self, code: EquationCode, entry: LedgerEntry) -> None:
        if entry.ancestor is not None:
            return  # padding verdicts are recomputed on lookup
        with self._lock:
            if self.path is None:
                self._put(code, entry)
            else:
                with open(self.path, "a+") as fh:
                    fcntl.flock(fh, fcntl.LOCK_EX)
                    try:
                        # pick up entries written by other processes first
                        fh.seek(0)
                        self._merge(fh.read())
                        if self._put(code, entry):
                            fh.write(entry.line(code))
                            fh.flush()
                    finally:
                        fcntl.flock(fh, fcntl.LOCK_UN)
        if entry.status == SOLVABLE:
            self.check_upward_closed(code)

    def check_upward_closed(self, code: EquationCode) -> None:
        w = cone_weights(code.orientable)
        for i in np.flatnonzero(w):
            up = code + generator(int(i), code.orientable)
            hit = self.lookup(up)
            assert hit is not None and hit.status == SOLVABLE, f"ledger not upward closed at {describe_coordinate(int(i))}"


def _blocks_by_coordinate(q: StandardQuadratic, gamma: Mapping[Variable, QElement]) -> list[tuple[int, tuple[Variable, ...]]]:
    out = []
    for x, y in q.commutator_vars:
        out.append((pair_coordinate(gamma[x], gamma[y]), (x, y)))
    for x in q.square_vars:
        out.append((pair_coordinate(gamma[x], gamma[x]), (x,)))
    for z, c in q.coefficients:
        out.append((coefficient_coordinate(gamma[z], short_index(c)), (z,)))
    return out


def expand_witness(code: EquationCode, entry: LedgerEntry, ledger: SolvabilityLedger) -> dict[Variable, GroupElement]:
    """Explicit solution for the equation of ``code``; padding blocks get transversal values."""
    if entry.status != SOLVABLE:
        raise ValueError("no witness for an unsolved code")
    if entry.ancestor is None:
        return {Variable(v): GroupElement(g) for v, g in entry.witness}
    base_entry = ledger.entries[entry.ancestor]
    base_witness = expand_witness(entry.ancestor, base_entry, ledger)
    bq, bg = equation_from_code(entry.ancestor)
    q, gamma = equation_from_code(code)
    from_base: dict[int, list[tuple[Variable, ...]]] = {}
    for coord, vs in _blocks_by_coordinate(bq, bg):
        from_base.setdefault(coord, []).append(vs)
    out = {}
    for coord, vs in _blocks_by_coordinate(q, gamma):
        queue = from_base.get(coord)
        if queue:
            for v, old in zip(vs, queue.pop(0)):
                out[v] = base_witness[old]
        else:
            for v in vs:
                out[v] = witness(gamma[v])
    return out


def replay(code: EquationCode, entry: LedgerEntry, ledger: SolvabilityLedger) -> bool:
    """Check a solvable entry by rebuilding its equation and evaluating the witness."""
    q, gamma = equation_from_code(code)
    alpha = expand_witness(code, entry, ledger)
    return is_trivial(eval_word(q.word(), alpha)) and satisfies(alpha, gamma)


# -- splitting until short -----------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    """An ordered constrained equation with short coefficients, and its code."""

    equation: StandardQuadratic
    constraint: tuple  # frozen, see equations.freeze
    code: EquationCode


def _frozen(gamma: Mapping[Variable, QElement]) -> tuple:
    return tuple(sorted((v, q.index) for v, q in gamma.items()))


def simplify(q: StandardQuadratic, gamma: Mapping[Variable, QElement]) -> tuple[StandardQuadratic, dict]:
    """Drop coefficient blocks with trivial coefficient and normalise short ones."""
    coeffs = tuple((z, c) for z, c in q.coefficients if not is_trivial(c))
    squares = q.square_vars
    out = normalize_coefficients(StandardQuadratic(q.orientable, q.commutator_vars, squares, coeffs))
    return out, {v: gamma[v] for v in out.variables()}


def is_trivial_equation(q: StandardQuadratic) -> bool:
    return not q.variables()


def obviously_unsolvable(q: StandardQuadratic) -> bool:
    """``z^-1 c z = 1`` with ``c`` nontrivial."""
    return q.orientable and not q.commutator_vars and len(q.coefficients) == 1 and not is_trivial(q.coefficients[0][1])


def make_leaf(q: StandardQuadratic, gamma: Mapping[Variable, QElement], trail=None) -> Leaf:
    oq, zeta = ordered_form(q, gamma, trail)
    return Leaf(oq, _frozen(zeta), encode(oq, zeta))


def _long(q: StandardQuadratic) -> bool:
    return any(not is_short(c) for _, c in q.coefficients)


def _equation_key(q: StandardQuadratic, gamma: Mapping[Variable, QElement]) -> tuple:
    oq, zeta = ordered_form(q, gamma)
    comms = tuple((zeta[x].index, zeta[y].index) for x, y in oq.commutator_vars)
    squares = tuple(zeta[x].index for x in oq.square_vars)
    coeffs = tuple((canonical_key(c), zeta[z].index) for z, c in oq.coefficients)
    return (oq.orientable, comms, squares, coeffs)


@dataclass
class SplitOutcome:
    """Disjunction of systems; each system is a conjunction of leaves."""

    systems: list[tuple[Leaf, ...]]
    rounds: int
    abandoned: int = 0  # systems given up on (round or size limit)
    trace: list[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.abandoned == 0


def split_until_short(
    q: StandardQuadratic,
    gamma: Mapping[Variable, QElement],
    max_rounds: int = 12,
    max_systems: int = 2000,
    max_family: int = 1 << 18,
) -> SplitOutcome:
    """Split repeatedly until every coefficient is short.

    Systems containing an equation that fails the quotient test are dropped
    (they cannot be solved); equations without variables are dropped from
    their system (they hold trivially).
    """
    trace: list[str] = []
    start = simplify(q, gamma)
    if gamma_eval(start[0].word(), start[1]) != Q_IDENTITY or obviously_unsolvable(start[0]):
        return SplitOutcome([], 0, trace=["input fails the quotient test"])
    pending: dict[tuple, tuple] = {(_equation_key(*start),): (start,)}
    done: dict[tuple, tuple[Leaf, ...]] = {}
    cache: dict[tuple, object] = {}
    abandoned = 0
    rounds = 0
    while pending:
        nxt: dict[tuple, tuple] = {}
        for system in pending.values():
            if not any(_long(eq) for eq, _ in system):
                leaves = tuple(sorted((make_leaf(eq, g) for eq, g in system), key=lambda l: l.code.counts))
                done.setdefault(tuple(l.code for l in leaves), leaves)
                continue
            if rounds >= max_rounds or len(nxt) >= max_systems:
                abandoned += 1
                continue
            if any(_long(eq) and family_size(eq.word(), g) > max_family for eq, g in system):
                abandoned += 1
                trace.append(f"round {rounds + 1}: constraint family too large, system abandoned")
                continue
            options = []
            for eq, g in system:
                if not _long(eq):
                    options.append([((eq, g),)])
                    continue
                key = _equation_key(eq, g)
                res = cache.get(key)
                if res is None:
                    res = cache[key] = split_standard(eq, g)
                trace.append(f"round {rounds + 1}: {eq} -> {res.case}, {len(res.branches)} branches")
                branches = []
                for branch in res.branches:
                    parts = [simplify(cs.word, cs.gamma()) for cs in branch]
                    if any(obviously_unsolvable(p) for p, _ in parts):
                        continue
                    branches.append(tuple(p for p in parts if not is_trivial_equation(p[0])))
                options.append(branches)
            for combo in itertools.product(*options):
                new = tuple(p for branch in combo for p in branch)
                key = tuple(sorted(_equation_key(*p) for p in new))
                if key not in nxt:
                    if len(nxt) >= max_systems:
                        abandoned += 1  # the rest of this product is dropped
                        break
                    nxt[key] = new
        pending = nxt
        if pending:
            rounds += 1
    trace.append(f"{len(done)} short systems after {rounds} rounds, {abandoned} abandoned")
    return SplitOutcome(list(done.values()), rounds, abandoned, trace)


# -- deciding -------------------------------------------------------------------------------

@dataclass
class SearchBudget:
    max_len: int = 3
    max_rounds: int = 12
    max_systems: int = 2000
    max_family: int = 1 << 18  # descendant constraints materialised per split
    evaluations: int = 200_000  # per brute-force search
    max_constraints: int = 1 << 20


@dataclass
class LeafVerdict:
    leaf: Leaf
    status: str
    entry: LedgerEntry | None = None
    how: str = ""  # "trivial", "ledger", "cone", "search", "exhausted", "budget"


@dataclass
class Decision:
    status: str
    witness: dict[Variable, GroupElement] | None = None  # for the input equation
    leaves: list[LeafVerdict] = field(default_factory=list)
    how: str = ""
    constraint: dict[Variable, QElement] | None = None  # on the standard form
    trace: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]


def decide_leaf(leaf: Leaf, ledger: SolvabilityLedger, budget: SearchBudget) -> LeafVerdict:
    code = leaf.code
    if not any(code.counts):
        return LeafVerdict(leaf, SOLVABLE, ledger.entries[code], "trivial")
    entry = ledger.lookup(code)
    if entry is not None and entry.status == SOLVABLE:
        return LeafVerdict(leaf, SOLVABLE, entry, "ledger" if entry.ancestor is None else "cone")
    if entry is not None and entry.bound >= budget.max_len:
        return LeafVerdict(leaf, UNKNOWN, entry, "ledger")
    q, gamma = equation_from_code(code)
    res = brute_force(q.word(), gamma, budget.max_len, budget.evaluations)
    if res.witness is not None:
        pairs = tuple((v.name if not v.path else str(v), g.word) for v, g in sorted(res.witness.items()))
        entry = LedgerEntry(SOLVABLE, witness=pairs)
        ledger.record(code, entry)
        return LeafVerdict(leaf, SOLVABLE, entry, "search")
    if res.complete:
        entry = LedgerEntry(UNKNOWN, bound=budget.max_len)
        ledger.record(code, entry)
        return LeafVerdict(leaf, UNKNOWN, entry, "exhausted")
    return LeafVerdict(leaf, UNKNOWN, None, "budget")


def admissible_constraints(q: StandardQuadratic, budget: SearchBudget) -> Iterator[dict[Variable, QElement]]:
    """All constraints on the variables of ``q`` passing the quotient test, in chunks."""
    xs = q.variables()
    total = N_Q ** len(xs)
    if total > budget.max_constraints:
        raise OverflowError(f"{total} constraints exceed the enumeration limit")
    columns = {v: i for i, v in enumerate(xs)}
    w = q.word()
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        state = np.empty((len(idx), len(xs)), dtype=np.uint8)
        for k in range(len(xs) - 1, -1, -1):
            state[:, k] = idx % N_Q
            idx //= N_Q
        keep = word_values(state, w, columns) == 0
        for row in state[keep]:
            yield {v: ELEMENTS[int(row[i])] for v, i in columns.items()}


def _lift_witness(
    w: MixedWord, phi: SubstitutionAutomorphism, beta: Mapping[Variable, GroupElement]
) -> dict[Variable, GroupElement]:
    """Solution of ``w`` from a solution of its transformed standard form."""
    images = {x: apply(phi, MixedWord((Letter(x, 1),))) for x in sorted(w.vars())}
    # variables that cancelled out of the standard form are free
    full = dict(beta)
    for img in images.values():
        for v in img.vars():
            full.setdefault(v, GroupElement(""))
    return {x: eval_word(img, full) for x, img in images.items()}


class _AndOrSearch:
    """Lazy search of the splitting tree: an equation is solvable iff some branch has all parts solvable."""

    def __init__(self, ledger: SolvabilityLedger, budget: SearchBudget, trace: list[str]):
        self.ledger = ledger
        self.budget = budget
        self.trace = trace
        self.memo: dict[tuple, tuple[str, list[LeafVerdict]]] = {}
        self.splits = 0

    def solve(self, q: StandardQuadratic, gamma: Mapping[Variable, QElement], depth: int = 0) -> tuple[str, list[LeafVerdict]]:
        q, gamma = simplify(q, gamma)
        if is_trivial_equation(q):
            return SOLVABLE, []
        if gamma_eval(q.word(), gamma) != Q_IDENTITY or obviously_unsolvable(q):
            return UNSOLVABLE, []
        key = _equation_key(q, gamma)
        if key in self.memo:
            return self.memo[key]
        if not _long(q):
            leaf = make_leaf(q, gamma)
            v = decide_leaf(leaf, self.ledger, self.budget)
            self.trace.append(f"{'  ' * depth}leaf {leaf.code}: {v.status} ({v.how})")
            result = (v.status, [v])
        elif depth >= self.budget.max_rounds or self.splits >= self.budget.max_systems:
            result = (UNKNOWN, [])
        elif family_size(q.word(), gamma) > self.budget.max_family:
            self.trace.append(f"{'  ' * depth}{q}: constraint family too large")
            result = (UNKNOWN, [])
        else:
            self.splits += 1
            res = split_standard(q, gamma)
            self.trace.append(f"{'  ' * depth}{q}: {res.case} split, {len(res.branches)} branches")
            result = (UNSOLVABLE, [])
            for branch in res.branches:
                status, verdicts = self._conjunction(branch, depth + 1)
                if status == SOLVABLE:
                    result = (SOLVABLE, verdicts)
                    break
                if status == UNKNOWN:
                    result = (UNKNOWN, [])
        self.memo[key] = result
        return result

    def _conjunction(self, branch, depth: int) -> tuple[str, list[LeafVerdict]]:
        status, verdicts = SOLVABLE, []
        for part in branch:
            s, v = self.solve(part.word, part.gamma(), depth)
            if s == UNSOLVABLE:
                return UNSOLVABLE, []
            if s == UNKNOWN:
                status = UNKNOWN
            verdicts += v
        return status, (verdicts if status == SOLVABLE else [])


def _solve_constrained(
    r: StandardQuadratic,
    zeta: Mapping[Variable, QElement],
    ledger: SolvabilityLedger,
    budget: SearchBudget,
    trace: list[str],
) -> tuple[str, list[LeafVerdict], str]:
    search = _AndOrSearch(ledger, budget, trace)
    status, verdicts = search.solve(r, zeta)
    how = {SOLVABLE: "leaves", UNSOLVABLE: "pruned", UNKNOWN: "search"}[status]
    return status, verdicts, how


def decide(
    w: MixedWord,
    gamma: Mapping[Variable, QElement] | None = None,
    budget: SearchBudget | None = None,
    ledger: SolvabilityLedger | None = None,
) -> Decision:
    """Decide ``w = 1``, optionally under the constraint ``gamma`` on its variables."""
    budget = budget or SearchBudget()
    ledger = ledger if ledger is not None else SolvabilityLedger()
    trace: list[str] = []
    if not is_quadratic(w):
        raise EquationError(f"not quadratic: {w}")
    if gamma is not None:
        missing = w.vars() - set(gamma)
        if missing:
            raise EquationError(f"no constraint for {', '.join(map(str, sorted(missing)))}")
    if not w.has_variables():
        ok = is_trivial(eval_word(w, {}))
        return Decision(SOLVABLE if ok else UNSOLVABLE, {} if ok else None, how="constant")

    r, phi, _ = to_standard(w)
    trace.append(f"standard form: {r}")
    if gamma is not None:
        zetas: Iterable = [transport(gamma, phi, r.variables())]
    else:
        zetas = admissible_constraints(r, budget)
    any_unknown = False
    seen: set = set()
    for zeta in zetas:
        key = _equation_key(*simplify(r, zeta))
        if key in seen:
            continue
        seen.add(key)
        status, verdicts, how = _solve_constrained(r, zeta, ledger, budget, trace)
        if status == SOLVABLE:
            decision = Decision(SOLVABLE, leaves=verdicts, how=how, constraint=dict(zeta), trace=trace)
            decision.witness = _direct_witness(w, r, phi, zeta, verdicts, ledger, gamma)
            if decision.witness is None:
                # leaf witnesses are not lifted through the splitting; look for a small direct one
                res = brute_force(w, gamma, budget.max_len, budget.evaluations)
                decision.witness = res.witness
            return decision
        any_unknown |= status == UNKNOWN
    if not any_unknown:
        trace.append("every constraint branch pruned")
        return Decision(UNSOLVABLE, how="pruned", trace=trace)
    res = brute_force(w, gamma, budget.max_len, budget.evaluations)
    if res.witness is not None:
        return Decision(SOLVABLE, res.witness, how="search", trace=trace)
    return Decision(UNKNOWN, how="search" if res.complete else "budget", trace=trace)


def _direct_witness(w, r, phi, zeta, verdicts, ledger, gamma=None) -> dict[Variable, GroupElement] | None:
    """Witness for ``w`` when no splitting happened (the single leaf is the standard form itself)."""
    if len(verdicts) != 1:
        return None
    q, g = simplify(r, zeta)
    if _long(q):
        return None
    trail = SubstitutionAutomorphism()
    oq, oz = ordered_form(q, g, trail)
    if encode(oq, oz) != verdicts[0].leaf.code:
        return None
    canon, _ = equation_from_code(verdicts[0].leaf.code)
    values = expand_witness(verdicts[0].leaf.code, verdicts[0].entry, ledger)
    beta = {v: values[c] for v, c in zip(oq.variables(), canon.variables())}
    # blocks dropped as trivial take any value of the right class
    for z, c in r.coefficients:
        beta.setdefault(z, witness(zeta[z]))
    alpha = _lift_witness(w, _compose(phi, trail), beta)
    if not is_trivial(eval_word(w, alpha)):
        raise AssertionError("lifted witness does not solve the input")
    if gamma is not None and not satisfies(alpha, gamma):
        return None
    return alpha


def _compose(first: SubstitutionAutomorphism, then: SubstitutionAutomorphism) -> SubstitutionAutomorphism:
    return SubstitutionAutomorphism(list(first.steps) + list(then.steps))
