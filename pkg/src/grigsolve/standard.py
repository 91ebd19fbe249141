"""Standard forms of quadratic words, tracked automorphisms and constraint transport.

An automorphism is stored as a list of steps applied left to right.  A
step is either an elementary substitution ``x -> U x^e V`` (``x`` not in
``U``, ``V``) or a renaming of variables.  Constraints are carried along by
:func:`transport`, which maps a constraint for the source word to the
constraint that makes solutions correspond under the automorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .equations import (
    EquationError,
    Letter,
    MixedWord,
    Variable,
    commutator_word,
    conjugate_word,
    free_reduce,
    gamma_eval,
    is_orientable,
    is_quadratic,
    words_equal,
)
from .group import GroupElement, equal
from .quotient import Q_IDENTITY, ORDER_RANK, QElement, pi_k


# -- automorphisms --------------------------------------------------------------------

@dataclass(frozen=True)
class Substitution:
    """``var -> replacement`` where ``var`` occurs exactly once in ``replacement``."""

    var: Variable
    replacement: MixedWord

    def __post_init__(self):
        occ = self.replacement.occurrences(self.var)
        if len(occ) != 1:
            raise EquationError(f"{self.var} must occur once in its replacement {self.replacement}")

    @property
    def parts(self) -> tuple[MixedWord, int, MixedWord]:
        i = self.replacement.occurrences(self.var)[0]
        return self.replacement[:i], self.replacement.atoms[i].sign, self.replacement[i + 1:]

    def inverse(self) -> "Substitution":
        u, e, v = self.parts
        x = MixedWord((Letter(self.var, 1),))
        if e == 1:
            return Substitution(self.var, u.inverse() * x * v.inverse())
        return Substitution(self.var, v * x.inverse() * u)

    def image(self, var: Variable) -> MixedWord:
        return self.replacement if var == self.var else MixedWord((Letter(var, 1),))

    def __str__(self) -> str:
        return f"{self.var} -> {self.replacement}"


@dataclass(frozen=True)
class Renaming:
    """Simultaneous renaming of variables (a permutation of its keys)."""

    mapping: tuple[tuple[Variable, Variable], ...]

    def __post_init__(self):
        src = [a for a, _ in self.mapping]
        dst = [b for _, b in self.mapping]
        if sorted(src) != sorted(dst) or len(set(src)) != len(src):
            raise EquationError("renaming must permute its variables")

    @classmethod
    def swap_pairs(cls, pairs: Iterable[tuple[Variable, Variable]]) -> "Renaming":
        items = []
        for a, b in pairs:
            items += [(a, b), (b, a)]
        return cls(tuple(items))

    def inverse(self) -> "Renaming":
        return Renaming(tuple((b, a) for a, b in self.mapping))

    def image(self, var: Variable) -> MixedWord:
        return MixedWord((Letter(dict(self.mapping).get(var, var), 1),))

    def __str__(self) -> str:
        return "rename " + ", ".join(f"{a} -> {b}" for a, b in self.mapping)


Step = Substitution | Renaming


def apply_step(step: Step, w: MixedWord) -> MixedWord:
    atoms = []
    for atom in w.atoms:
        if isinstance(atom, Letter):
            img = step.image(atom.var)
            atoms.extend((img if atom.sign == 1 else img.inverse()).atoms)
        else:
            atoms.append(atom)
    return free_reduce(MixedWord(atoms))


@dataclass
class SubstitutionAutomorphism:
    steps: list[Step] = field(default_factory=list)

    def then(self, step: Step) -> "SubstitutionAutomorphism":
        self.steps.append(step)
        return self

    def extend(self, other: "SubstitutionAutomorphism") -> "SubstitutionAutomorphism":
        self.steps.extend(other.steps)
        return self

    def inverse(self) -> "SubstitutionAutomorphism":
        return SubstitutionAutomorphism([s.inverse() for s in reversed(self.steps)])

    def __len__(self) -> int:
        return len(self.steps)

    def trace_lines(self) -> list[str]:
        return [str(s) for s in self.steps]


def apply(phi: SubstitutionAutomorphism, w: MixedWord) -> MixedWord:
    w = free_reduce(w)
    for step in phi.steps:
        w = apply_step(step, w)
    return w


def transport_step(gamma: Mapping[Variable, QElement], step: Step) -> dict[Variable, QElement]:
    """Constraint after one step, so that ``beta`` satisfies it iff ``beta o step`` satisfies ``gamma``."""
    out = dict(gamma)
    if isinstance(step, Renaming):
        for a, b in step.mapping:
            out[b] = gamma.get(a, Q_IDENTITY)
        return out
    u, e, v = step.parts
    full = {x: gamma.get(x, Q_IDENTITY) for x in step.replacement.vars()}
    q = gamma_eval(u, full).inverse() * full[step.var] * gamma_eval(v, full).inverse()
    out[step.var] = q if e == 1 else q.inverse()
    return out


def transport(
    gamma: Mapping[Variable, QElement],
    phi: SubstitutionAutomorphism,
    target_vars: Iterable[Variable] | None = None,
) -> dict[Variable, QElement]:
    """Push ``gamma`` through ``phi`` (missing variables are extended by the identity)."""
    out = dict(gamma)
    for step in phi.steps:
        out = transport_step(out, step)
    if target_vars is None:
        return out
    return {x: out.get(x, Q_IDENTITY) for x in target_vars}


# -- standard words ---------------------------------------------------------------------

@dataclass(frozen=True)
class StandardQuadratic:
    orientable: bool
    commutator_vars: tuple[tuple[Variable, Variable], ...] = ()
    square_vars: tuple[Variable, ...] = ()
    coefficients: tuple[tuple[Variable, GroupElement], ...] = ()

    def __post_init__(self):
        if self.orientable and self.square_vars:
            raise EquationError("orientable standard word with squares")
        if not self.orientable and (self.commutator_vars or not self.square_vars):
            raise EquationError("non-orientable standard word needs squares only and genus > 0")
        names = [v for p in self.commutator_vars for v in p] + list(self.square_vars)
        names += [z for z, _ in self.coefficients]
        if len(set(names)) != len(names):
            raise EquationError("variables of a standard word must be distinct")

    @property
    def genus(self) -> int:
        return len(self.commutator_vars) if self.orientable else len(self.square_vars)

    @property
    def m(self) -> int:
        return len(self.coefficients)

    def variables(self) -> list[Variable]:
        out = [v for p in self.commutator_vars for v in p] + list(self.square_vars)
        return out + [z for z, _ in self.coefficients]

    def word(self) -> MixedWord:
        w = MixedWord()
        for x, y in self.commutator_vars:
            w = w * commutator_word(x, y)
        for x in self.square_vars:
            w = w * MixedWord((Letter(x, 1), Letter(x, 1)))
        for z, c in self.coefficients:
            w = w * conjugate_word(z, c)
        return w

    def __str__(self) -> str:
        parts = [f"[{x},{y}]" for x, y in self.commutator_vars]
        parts += [f"{x}^2" for x in self.square_vars]
        parts += [f"{z}^-1 {c} {z}" for z, c in self.coefficients]
        return " ".join(parts) or "1"


def is_standard_word(w: MixedWord) -> StandardQuadratic | None:
    """Recognise the exact shape of a standard word; ``None`` if it is not standard."""
    atoms = list(free_reduce(w).atoms)
    comms, squares, coeffs = [], [], []
    i = 0
    while i + 3 < len(atoms) + 0 and not squares and not coeffs:
        blk = atoms[i:i + 4]
        if (all(isinstance(a, Letter) for a in blk)
                and blk[0].sign == blk[1].sign == -1 and blk[2].sign == blk[3].sign == 1
                and blk[0].var == blk[2].var and blk[1].var == blk[3].var and blk[0].var != blk[1].var):
            comms.append((blk[0].var, blk[1].var))
            i += 4
        else:
            break
    while not comms and i + 1 < len(atoms):
        p, q = atoms[i], atoms[i + 1]
        if isinstance(p, Letter) and p == q and p.sign == 1:
            squares.append(p.var)
            i += 2
        else:
            break
    while i + 2 < len(atoms):
        p, c, q = atoms[i:i + 3]
        if (isinstance(p, Letter) and isinstance(q, Letter) and isinstance(c, GroupElement)
                and p.var == q.var and p.sign == -1 and q.sign == 1):
            coeffs.append((p.var, c))
            i += 3
        else:
            break
    if i != len(atoms):
        return None
    try:
        return StandardQuadratic(not squares, tuple(comms), tuple(squares), tuple(coeffs))
    except EquationError:
        return None


# -- reduction to standard form ---------------------------------------------------------

def _letter(x: Variable, e: int = 1) -> MixedWord:
    return MixedWord((Letter(x, e),))


class _Block:
    __slots__ = ("kind", "vars", "coeff")

    def __init__(self, kind: str, vars_: tuple[Variable, ...], coeff: GroupElement | None = None):
        self.kind = kind  # "comm", "square", "coeff"
        self.vars = vars_
        self.coeff = coeff

    def word(self) -> MixedWord:
        if self.kind == "comm":
            return commutator_word(*self.vars)
        if self.kind == "square":
            return _letter(self.vars[0]) * _letter(self.vars[0])
        return conjugate_word(self.vars[0], self.coeff)


class _Standardizer:
    """Work state: current word ``blocks . rest`` with ``phi(Q) = C (blocks . rest) C^-1``."""

    def __init__(self, q: MixedWord):
        self.phi = SubstitutionAutomorphism()
        self.conj = MixedWord()
        self.blocks: list[_Block] = []
        self.rest = free_reduce(q)
        self.used = {v.name for v in q.vars()}

    def word(self) -> MixedWord:
        w = MixedWord()
        for b in self.blocks:
            w = w * b.word()
        return w * self.rest

    def sub(self, var: Variable, replacement: MixedWord) -> None:
        if replacement == _letter(var):
            return
        step = Substitution(var, replacement)
        self.phi.then(step)
        self.rest = apply_step(step, self.rest)
        self.conj = apply_step(step, self.conj)

    # blocks keep their shape under substitutions that only touch other variables,
    # and a block-wise conjugation B -> U B U^-1 is realised per block kind
    def conjugate_block(self, b: _Block, u: MixedWord) -> None:
        if not u.atoms:
            return
        if b.kind == "coeff":
            self.sub(b.vars[0], _letter(b.vars[0]) * u.inverse())
        else:
            for v in b.vars:
                self.sub(v, u * _letter(v) * u.inverse())

    def rotate_rest(self, k: int) -> None:
        """Move the first ``k`` atoms of ``rest`` to its end (the whole word is conjugated)."""
        u = self.rest[:k]
        if not u.atoms:
            return
        for b in self.blocks:
            self.conjugate_block(b, u)
        # blocks . rest is now u . blocks . rest[k:]; conjugate by u
        self.rest = free_reduce(self.rest[k:] * u)
        self.conj = free_reduce(self.conj * u)

    def swap_blocks(self, i: int) -> None:
        """``B_i B_{i+1} -> B_{i+1} B_i`` by conjugating ``B_i`` with ``B_{i+1}``."""
        self.conjugate_block(self.blocks[i], self.blocks[i + 1].word())
        self.blocks[i], self.blocks[i + 1] = self.blocks[i + 1], self.blocks[i]

    def fresh(self, stem: str = "z") -> Variable:
        for k in itertools.count():
            name = stem if k == 0 else f"{stem}{k}"
            if name not in self.used:
                self.used.add(name)
                return Variable(name)
        raise AssertionError

    def _first_occurrence(self, x: Variable) -> int:
        return self.rest.occurrences(x)[0]

    def extract_square(self, x: Variable) -> None:
        i = self._first_occurrence(x)
        self.rotate_rest(i)
        if self.rest.atoms[0].sign == -1:
            self.sub(x, _letter(x, -1))
        j = self.rest.occurrences(x)[1]
        a = self.rest[1:j]
        self.sub(x, _letter(x) * a.inverse())
        # rest is now x x B
        assert self.rest.atoms[0] == self.rest.atoms[1] == Letter(x, 1)
        self.blocks.append(_Block("square", (x,)))
        self.rest = self.rest[2:]

    def extract_pair(self, x: Variable) -> None:
        """Opposite-sign pair of minimal span: a coefficient block or a commutator."""
        self.rotate_rest(self._first_occurrence(x))
        if self.rest.atoms[0].sign == -1:
            self.sub(x, _letter(x, -1))
        j = self.rest.occurrences(x)[1]
        inner = self.rest[1:j]
        if not inner.has_variables():
            # x c x^-1 B  ->  x^-1 c x B
            self.sub(x, _letter(x, -1))
            c = inner.atoms[0] if inner.atoms else GroupElement()
            self.blocks.append(_Block("coeff", (x,), c))
            self.rest = self.rest[3 if inner.atoms else 2:]
            return
        k = next(i for i, a in enumerate(inner.atoms) if isinstance(a, Letter))
        y = inner.atoms[k].var
        if inner.atoms[k].sign == -1:
            self.sub(y, _letter(y, -1))
        # rest = x A1 y A2 x^-1 B1 y^-1 B2
        a1 = self.rest[1:1 + k]
        self.sub(x, _letter(x) * a1.inverse())
        # rest = x y A2 A1 x^-1 B1 y^-1 B2
        jx = self.rest.occurrences(x)[1]
        a2a1 = self.rest[2:jx]
        self.sub(y, _letter(y) * a2a1.inverse())
        # rest = x y x^-1 E y^-1 B2
        jy = self.rest.occurrences(y)[1]
        e = self.rest[3:jy]
        self.sub(x, e * _letter(x))
        # rest = E x y x^-1 y^-1 B2
        self.rotate_rest(len(e))
        self.sub(x, _letter(x, -1))
        self.sub(y, _letter(y, -1))
        assert words_equal(self.rest[:4], commutator_word(x, y)), self.rest
        self.blocks.append(_Block("comm", (x, y)))
        self.rest = self.rest[4:]

    def span(self, x: Variable) -> int:
        i, j = self.rest.occurrences(x)
        return min(j - i, len(self.rest) - (j - i))

    def collect(self) -> None:
        while self.rest.has_variables():
            same = [v for v in self.rest.var_order()
                    if sum(a.sign for a in self.rest.atoms if isinstance(a, Letter) and a.var == v) != 0]
            if same:
                self.extract_square(same[0])
                continue
            x = min(self.rest.var_order(), key=self.span)
            i, j = self.rest.occurrences(x)
            if j - i > len(self.rest) - (j - i):
                # the short side wraps around: start from the second occurrence
                # rotation may cancel the pair outright; re-examine
                self.rotate_rest(j)
                continue
            self.extract_pair(x)

    def coefficients_last(self) -> None:
        changed = True
        while changed:
            changed = False
            for i in range(len(self.blocks) - 1):
                if self.blocks[i].kind == "coeff" and self.blocks[i + 1].kind != "coeff":
                    self.swap_blocks(i)
                    changed = True

    def squares_only(self) -> None:
        """Turn ``x^2 [y,z]`` into three squares while any square and commutator coexist."""
        while True:
            kinds = [b.kind for b in self.blocks]
            if "square" not in kinds or "comm" not in kinds:
                return
            i = kinds.index("comm")
            while i > 0 and self.blocks[i - 1].kind != "square":
                self.swap_blocks(i - 1)
                i -= 1
            if i == 0:
                j = kinds.index("square")
                while j > 1:
                    self.swap_blocks(j - 1)
                    j -= 1
                self.swap_blocks(0)
                i = 1
            (x,), (y, z) = self.blocks[i - 1].vars, self.blocks[i].vars
            for var, rep in (
                (x, _letter(x) * _letter(y)),
                (y, _letter(y) * _letter(z) * _letter(x, -1)),
                (y, _letter(x, -1) * _letter(y) * _letter(x)),
                (z, _letter(z) * _letter(x)),
                (z, _letter(x, -1) * _letter(z) * _letter(x)),
            ):
                self.phi.then(Substitution(var, rep))
                self.conj = apply_step(self.phi.steps[-1], self.conj)
            self.blocks[i - 1:i + 1] = [_Block("square", (y,)), _Block("square", (z,)), _Block("square", (x,))]

    def absorb_constant(self) -> None:
        c0 = self.rest
        if not c0.atoms:
            return
        z = self.fresh()
        for b in self.blocks:
            self.conjugate_block(b, _letter(z))
        # z (blocks) z^-1 c0  ~  blocks z^-1 c0 z
        self.conj = free_reduce(self.conj * _letter(z))
        self.blocks.append(_Block("coeff", (z,), c0.atoms[0]))
        self.rest = MixedWord()

    def result(self) -> StandardQuadratic:
        comms = tuple(b.vars for b in self.blocks if b.kind == "comm")
        squares = tuple(b.vars[0] for b in self.blocks if b.kind == "square")
        coeffs = tuple((b.vars[0], b.coeff) for b in self.blocks if b.kind == "coeff")
        return StandardQuadratic(not squares, comms, squares, coeffs)


def to_standard(q: MixedWord) -> tuple[StandardQuadratic, SubstitutionAutomorphism, MixedWord]:
    """Standard form ``R`` with ``apply(phi, q) == C R C^-1`` (free reduction)."""
    if not is_quadratic(q):
        raise EquationError(f"not quadratic: {q}")
    ready = is_standard_word(free_reduce(q))
    if ready is not None:
        return ready, SubstitutionAutomorphism(), MixedWord()
    st = _Standardizer(q)
    st.collect()
    st.coefficients_last()
    st.squares_only()
    st.absorb_constant()
    return st.result(), st.phi, st.conj


def standardize_constrained(
    q: MixedWord, gamma: Mapping[Variable, QElement]
) -> tuple[StandardQuadratic, dict[Variable, QElement], SubstitutionAutomorphism]:
    r, phi, _ = to_standard(q)
    return r, transport(gamma, phi, r.variables()), phi


# -- ordering ----------------------------------------------------------------------

def coefficient_rank(c: GroupElement) -> tuple[int, str]:
    return (len(c.word), c.word)


def ordered_form(
    q: StandardQuadratic,
    gamma: Mapping[Variable, QElement],
    trail: SubstitutionAutomorphism | None = None,
) -> tuple[StandardQuadratic, dict[Variable, QElement]]:
    """Bubble the blocks into non-decreasing order of their constraint data.

    Each swap is an automorphism of the whole word; the moved block keeps its
    variables and only its constraint changes.
    """
    zeta = {v: gamma.get(v, Q_IDENTITY) for v in q.variables()}
    steps = trail if trail is not None else SubstitutionAutomorphism()

    def run(step: Step) -> None:
        nonlocal zeta
        steps.then(step)
        zeta = transport_step(zeta, step)

    comms = list(q.commutator_vars)
    key_c = lambda p: (ORDER_RANK[zeta[p[0]].index], ORDER_RANK[zeta[p[1]].index])
    # each swap makes the key sequence lexicographically smaller, so this terminates;
    # keys of moved blocks change, hence passes repeat until nothing moves
    swapped = True
    while swapped:
        swapped = False
        for i in range(len(comms) - 1):
            if key_c(comms[i + 1]) < key_c(comms[i]):
                swapped = True
                (x, y), (u, v) = comms[i], comms[i + 1]
                c = commutator_word(u, v)
                run(Substitution(x, c * _letter(x) * c.inverse()))
                run(Substitution(y, c * _letter(y) * c.inverse()))
                comms[i], comms[i + 1] = comms[i + 1], comms[i]

    squares = list(q.square_vars)
    swapped = True
    while swapped:
        swapped = False
        for i in range(len(squares) - 1):
            x, u = squares[i], squares[i + 1]
            if ORDER_RANK[zeta[u].index] < ORDER_RANK[zeta[x].index]:
                swapped = True
                s = _letter(u) * _letter(u)
                run(Substitution(x, s * _letter(x) * s.inverse()))
                squares[i], squares[i + 1] = u, x

    coeffs = list(q.coefficients)
    key_z = lambda p: (coefficient_rank(p[1]), ORDER_RANK[zeta[p[0]].index])
    swapped = True
    while swapped:
        swapped = False
        for i in range(len(coeffs) - 1):
            if key_z(coeffs[i + 1]) < key_z(coeffs[i]):
                swapped = True
                (z, _), (w, c) = coeffs[i], coeffs[i + 1]
                run(Substitution(z, _letter(z) * conjugate_word(w, c).inverse()))
                coeffs[i], coeffs[i + 1] = coeffs[i + 1], coeffs[i]

    out = StandardQuadratic(q.orientable, tuple(comms), tuple(squares), tuple(coeffs))
    return out, zeta


def is_ordered(q: StandardQuadratic, gamma: Mapping[Variable, QElement]) -> bool:
    pairs = [(ORDER_RANK[gamma[x].index], ORDER_RANK[gamma[y].index]) for x, y in q.commutator_vars]
    coeffs = [(coefficient_rank(c), ORDER_RANK[gamma[z].index]) for z, c in q.coefficients]
    return pairs == sorted(pairs) and coeffs == sorted(coeffs)
