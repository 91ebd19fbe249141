"""Words in the free product of the group with a free group on variables.

A :class:`MixedWord` is a tuple of atoms, each a :class:`GroupElement`
(a coefficient) or a :class:`Letter` (a variable with sign +-1).  Adjacent
coefficients are merged and identity coefficients dropped on construction;
free cancellation ``x x^-1`` is *not* automatic (see :func:`free_reduce`).

Constraints are plain ``dict``\\ s mapping :class:`Variable` to
:class:`~grigsolve.quotient.QElement`.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .group import IDENTITY, GroupElement, a_parity, equal, is_trivial, product
from .quotient import Q_IDENTITY, QElement, parse_q, pi_k, st_coset


class EquationError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Variable:
    name: str
    path: str = ""

    def descendant(self, i: int) -> "Variable":
        return Variable(self.name, self.path + str(i))

    def __str__(self) -> str:
        return f"{self.name}_{self.path}" if self.path else self.name


@dataclass(frozen=True)
class Letter:
    var: Variable
    sign: int = 1

    def inverse(self) -> "Letter":
        return Letter(self.var, -self.sign)

    def __str__(self) -> str:
        return str(self.var) if self.sign == 1 else f"{self.var}^-1"


Atom = Union[GroupElement, Letter]
Constraint = dict  # Variable -> QElement


def _normalize(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    out: list[Atom] = []
    for atom in atoms:
        if isinstance(atom, GroupElement):
            if out and isinstance(out[-1], GroupElement):
                atom = out.pop() * atom
            if atom.word:
                out.append(atom)
        elif isinstance(atom, Letter):
            if atom.sign not in (1, -1):
                raise EquationError(f"bad sign {atom.sign}")
            out.append(atom)
        else:
            raise TypeError(f"not an atom: {atom!r}")
    return tuple(out)


class MixedWord:
    __slots__ = ("atoms", "_hash")

    def __init__(self, atoms: Iterable[Atom] = ()):
        self.atoms = _normalize(atoms)
        self._hash = None

    @classmethod
    def of(cls, *items: "Atom | Variable | MixedWord | str") -> "MixedWord":
        """Build a word from atoms, variables (sign +1), words or coefficient strings."""
        atoms: list[Atom] = []
        for item in items:
            if isinstance(item, MixedWord):
                atoms.extend(item.atoms)
            elif isinstance(item, Variable):
                atoms.append(Letter(item, 1))
            elif isinstance(item, str):
                atoms.append(GroupElement.parse(item))
            else:
                atoms.append(item)
        return cls(atoms)

    def __mul__(self, other: "MixedWord") -> "MixedWord":
        return MixedWord(self.atoms + other.atoms)

    def inverse(self) -> "MixedWord":
        return MixedWord(a.inverse() for a in reversed(self.atoms))

    def __pow__(self, n: int) -> "MixedWord":
        base = self if n >= 0 else self.inverse()
        return MixedWord(base.atoms * abs(n))

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return MixedWord(self.atoms[item])
        return self.atoms[item]

    def __eq__(self, other) -> bool:
        return isinstance(other, MixedWord) and self.atoms == other.atoms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.atoms)
        return self._hash

    def __str__(self) -> str:
        return " ".join(str(a) for a in self.atoms) or "1"

    def __repr__(self) -> str:
        return f"MixedWord({str(self)!r})"

    def vars(self) -> set[Variable]:
        return {a.var for a in self.atoms if isinstance(a, Letter)}

    def var_order(self) -> list[Variable]:
        """Variables in order of first occurrence."""
        seen: dict[Variable, None] = {}
        for a in self.atoms:
            if isinstance(a, Letter):
                seen.setdefault(a.var)
        return list(seen)

    def occurrences(self, var: Variable) -> list[int]:
        return [i for i, a in enumerate(self.atoms) if isinstance(a, Letter) and a.var == var]

    def coefficients(self) -> list[GroupElement]:
        return [a for a in self.atoms if isinstance(a, GroupElement)]

    def has_variables(self) -> bool:
        return any(isinstance(a, Letter) for a in self.atoms)


def vars_of(w: MixedWord) -> set[Variable]:
    return w.vars()


def is_quadratic(w: MixedWord) -> bool:
    counts = Counter(a.var for a in w.atoms if isinstance(a, Letter))
    return all(n == 2 for n in counts.values())


def is_orientable(w: MixedWord) -> bool:
    """For a quadratic word: every variable occurs once with each sign."""
    if not is_quadratic(w):
        raise EquationError(f"not quadratic: {w}")
    signs: dict[Variable, int] = {}
    for a in w.atoms:
        if isinstance(a, Letter):
            signs[a.var] = signs.get(a.var, 0) + a.sign
    return all(s == 0 for s in signs.values())


def orientability(w: MixedWord) -> str:
    return "orientable" if is_orientable(w) else "non-orientable"


def free_reduce(w: MixedWord) -> MixedWord:
    """Freely reduce in the free product (cancel ``x x^-1``, merge coefficients)."""
    stack: list[Atom] = []
    for atom in w.atoms:
        if isinstance(atom, GroupElement):
            if stack and isinstance(stack[-1], GroupElement):
                atom = stack.pop() * atom
            if atom.word and not is_trivial(atom):
                stack.append(atom)
        else:
            top = stack[-1] if stack else None
            if isinstance(top, Letter) and top.var == atom.var and top.sign == -atom.sign:
                stack.pop()
            else:
                stack.append(atom)
    return MixedWord(stack)


def words_equal(v: MixedWord, w: MixedWord) -> bool:
    """Equality in the free product (coefficients compared as group elements)."""
    v, w = free_reduce(v), free_reduce(w)
    if len(v) != len(w):
        return False
    for p, q in zip(v.atoms, w.atoms):
        if isinstance(p, Letter) or isinstance(q, Letter):
            if p != q:
                return False
        elif not equal(p, q):
            return False
    return True


def commutator_word(x: Variable, y: Variable) -> MixedWord:
    """``[x, y] = x^-1 y^-1 x y``."""
    return MixedWord((Letter(x, -1), Letter(y, -1), Letter(x, 1), Letter(y, 1)))


def conjugate_word(z: Variable, c: GroupElement) -> MixedWord:
    """``z^-1 c z``."""
    return MixedWord((Letter(z, -1), c, Letter(z, 1)))


# -- evaluation ---------------------------------------------------------------------

def eval_word(w: MixedWord, alpha: Mapping[Variable, GroupElement]) -> GroupElement:
    parts: list[GroupElement] = []
    for atom in w.atoms:
        if isinstance(atom, GroupElement):
            parts.append(atom)
        else:
            try:
                value = alpha[atom.var]
            except KeyError:
                raise EquationError(f"no value for {atom.var}") from None
            parts.append(value if atom.sign == 1 else value.inverse())
    return product(parts)


def gamma_eval(w: MixedWord, gamma: Mapping[Variable, QElement]) -> QElement:
    out = Q_IDENTITY
    for atom in w.atoms:
        if isinstance(atom, GroupElement):
            out = out * pi_k(atom)
        else:
            try:
                q = gamma[atom.var]
            except KeyError:
                raise EquationError(f"no constraint for {atom.var}") from None
            out = out * (q if atom.sign == 1 else q.inverse())
    return out


def atom_parity(atom: Atom, gamma: Mapping[Variable, QElement]) -> int:
    if isinstance(atom, GroupElement):
        return a_parity(atom)
    try:
        return st_coset(gamma[atom.var])
    except KeyError:
        raise EquationError(f"no constraint for {atom.var}") from None


def sigma(w: MixedWord, gamma: Mapping[Variable, QElement]) -> int:
    """St(1)-coset of ``w`` under any assignment satisfying ``gamma`` (0 = inside)."""
    return sum(atom_parity(a, gamma) for a in w.atoms) % 2


def satisfies(alpha: Mapping[Variable, GroupElement], gamma: Mapping[Variable, QElement]) -> bool:
    return all(pi_k(alpha[v]) == q for v, q in gamma.items())


def restrict(gamma: Mapping[Variable, QElement], variables: Iterable[Variable]) -> Constraint:
    return {v: gamma[v] for v in variables}


def freeze(gamma: Mapping[Variable, QElement]) -> tuple:
    return tuple(sorted((v, q.index) for v, q in gamma.items()))


# -- join -------------------------------------------------------------------------

def join(w1: MixedWord, w2: MixedWord, x: Variable) -> MixedWord:
    """Eliminate ``x`` (once in each word): ``U1 (V2 U2)^(-e1 e2) V1``."""
    occ1, occ2 = w1.occurrences(x), w2.occurrences(x)
    if len(occ1) != 1 or len(occ2) != 1:
        raise EquationError(f"{x} must occur exactly once in each word ({len(occ1)}, {len(occ2)})")
    i, j = occ1[0], occ2[0]
    e1, e2 = w1.atoms[i].sign, w2.atoms[j].sign
    u1, v1 = w1[:i], w1[i + 1:]
    u2, v2 = w2[:j], w2[j + 1:]
    return u1 * (v2 * u2) ** (-e1 * e2) * v1


def join_constrained(
    w1: MixedWord, w2: MixedWord, x: Variable, gamma: Mapping[Variable, QElement]
) -> tuple[MixedWord, Constraint]:
    if not gamma_eval(w1, gamma).is_identity() or not gamma_eval(w2, gamma).is_identity():
        raise EquationError("join_constrained requires gamma(W1) = gamma(W2) = 1")
    joined = join(w1, w2, x)
    return joined, restrict(gamma, sorted(joined.vars()))


# -- text syntax ----------------------------------------------------------------------

_TOKEN = re.compile(r"\[\s*([^\],]+?)\s*,\s*([^\]]+?)\s*\]|([A-Za-z0-9_]+)(\^-?\d+)?")
_COEFF = re.compile(r"^(1|[abcd]+)$")
_IDENT = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


def _parse_factor(token: str) -> MixedWord:
    if _COEFF.match(token):
        return MixedWord((GroupElement.parse(token),))
    if not _IDENT.match(token):
        raise EquationError(f"bad factor {token!r}")
    m = re.match(r"^(.*)_([01]+)$", token)
    var = Variable(m.group(1), m.group(2)) if m else Variable(token)
    return MixedWord((Letter(var, 1),))


def _parse_powered(text: str) -> MixedWord:
    m = re.fullmatch(r"([A-Za-z0-9_]+)(?:\^(-?\d+))?", text.strip())
    if not m:
        raise EquationError(f"bad factor {text!r}")
    base = _parse_factor(m.group(1))
    return base ** int(m.group(2) or 1)


def parse_word(text: str) -> MixedWord:
    """Parse whitespace-separated factors: ``x``, ``x^-1``, ``x^2``, ``[x,y]``, ``ab``, ``1``."""
    pos = 0
    text = text.strip()
    out = MixedWord()
    while pos < len(text):
        if text[pos].isspace() or text[pos] == "*":
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise EquationError(f"cannot parse {text[pos:]!r}")
        if m.group(1) is not None:
            left, right = _parse_powered(m.group(1)), _parse_powered(m.group(2))
            out = out * left.inverse() * right.inverse() * left * right
        else:
            out = out * _parse_powered(m.group(0))
        pos = m.end()
    return out


def parse_equation(text: str) -> MixedWord:
    """``W`` or ``W = V`` (meaning ``W V^-1 = 1``)."""
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        return parse_word(lhs) * parse_word(rhs).inverse()
    return parse_word(text)


def parse_constraint_lines(lines: Iterable[str]) -> Constraint:
    gamma: Constraint = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise EquationError(f"constraint line needs '=': {raw!r}")
        name, value = (s.strip() for s in line.split("=", 1))
        var = _parse_factor(name)
        if not var.has_variables():
            raise EquationError(f"not a variable: {name!r}")
        try:
            gamma[var.atoms[0].var] = parse_q(value)
        except ValueError as exc:
            raise EquationError(f"bad quotient element {value!r}: {exc}") from None
    return gamma


def parse_equation_file(text: str) -> tuple[MixedWord, Constraint]:
    """First meaningful line is the equation, later lines are ``var = <element>`` constraints."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise EquationError("empty equation file")
    word = parse_equation(lines[0])
    gamma = parse_constraint_lines(lines[1:])
    extra = set(gamma) - word.vars()
    if extra:
        raise EquationError(f"constraint on unknown variables {sorted(map(str, extra))}")
    return word, gamma


def format_constraint(gamma: Mapping[Variable, QElement]) -> str:
    return ", ".join(f"{v}={q}" for v, q in sorted(gamma.items())) or "{}"


__all__ = [
    "Variable", "Letter", "MixedWord", "Constraint", "EquationError",
    "vars_of", "is_quadratic", "is_orientable", "orientability", "free_reduce",
    "words_equal", "commutator_word", "conjugate_word", "eval_word", "gamma_eval", "sigma",
    "satisfies", "restrict", "freeze", "join", "join_constrained",
    "parse_word", "parse_equation", "parse_constraint_lines", "parse_equation_file",
    "format_constraint", "IDENTITY",
]
