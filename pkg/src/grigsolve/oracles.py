"""Independent brute-force oracles.

These never touch ``psi`` or the word-problem recursion: an element is
compared through its permutation ("portrait") on a finite tree level,
computed by composing per-generator permutation arrays.
"""

from __future__ import annotations

import functools

import numpy as np

from .group import GroupElement


@functools.lru_cache(maxsize=None)
def _generator_perms(level: int) -> dict[str, np.ndarray]:
    """Permutation of ``{0,1}^level`` for each generator, vertices as ints (first bit = MSB)."""
    size = 1 << level
    perms = {}
    for letter in "abcd":
        perm = np.empty(size, dtype=np.int64)
        for v in range(size):
            bits = [(v >> (level - 1 - i)) & 1 for i in range(level)]
            state = letter
            for i in range(level):
                if state == "":
                    break
                if state == "a":
                    bits[i] ^= 1
                    break
                b = bits[i]
                # b(0w)=0a(w) b(1w)=1c(w); c(0w)=0a(w) c(1w)=1d(w); d(0w)=0w d(1w)=1b(w)
                state = {"b": ("a", "c"), "c": ("a", "d"), "d": ("", "b")}[state][b]
            perm[v] = int("".join(map(str, bits)), 2) if level else 0
        perms[letter] = perm
    return perms


def portrait(g: GroupElement, level: int) -> np.ndarray:
    """The permutation induced by ``g`` on level ``level`` as an index array."""
    perms = _generator_perms(level)
    result = np.arange(1 << level)
    # left action: rightmost letter acts first
    for letter in reversed(g.word):
        result = perms[letter][result]
    return result


def portrait_equal(g: GroupElement, h: GroupElement, level: int = 10) -> bool:
    return bool(np.array_equal(portrait(g, level), portrait(h, level)))


def portrait_order(g: GroupElement, level: int = 10, cap: int = 1 << 12) -> int:
    """Order of the permutation induced on ``level`` (a lower bound for the true order)."""
    perm = portrait(g, level)
    ident = np.arange(perm.size)
    power = perm.copy()
    n = 1
    while not np.array_equal(power, ident):
        power = perm[power]
        n += 1
        if n > cap:
            raise RuntimeError("portrait order cap exceeded")
    return n
