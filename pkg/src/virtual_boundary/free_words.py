"""Reduced words in a free group with generators x1, x2, ...

A letter is a nonzero int: ``k`` stands for ``x_k`` and ``-k`` for its inverse.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


def _free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for a in letters:
        if a == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class FreeWord:
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    @classmethod
    def parse(cls, text: str) -> "FreeWord":
        """Parse ``"x1 x2^-1 x1^3"`` style text (spaces or dots between factors)."""
        text = text.replace(".", " ").replace("*", " ").strip()
        if text in ("", "1", "e"):
            return cls(())
        letters: list[int] = []
        for tok in text.split():
            base, _, exp = tok.partition("^")
            if not base.startswith("x"):
                raise ValueError(f"bad generator {tok!r}")
            k = int(base[1:])
            e = int(exp) if exp else 1
            letters.extend([k if e > 0 else -k] * abs(e))
        return cls(tuple(letters))

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(self.letters + other.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple(-a for a in reversed(self.letters)))

    def __pow__(self, n: int) -> "FreeWord":
        if n < 0:
            return self.inverse() ** (-n)
        return FreeWord(self.letters * n)

    def conjugate_by(self, g: "FreeWord") -> "FreeWord":
        """``g w g^-1``."""
        return g * self * g.inverse()

    def max_generator(self) -> int:
        return max((abs(a) for a in self.letters), default=0)

    def exponent_sum(self, k: int) -> int:
        return sum((a > 0) - (a < 0) for a in self.letters if abs(a) == k)

    def cyclic_core(self) -> tuple["FreeWord", "FreeWord"]:
        """Split ``w = u c u^-1`` with ``c`` cyclically reduced; returns (u, c)."""
        w = self.letters
        i, j = 0, len(w) - 1
        while i < j and w[i] == -w[j]:
            i += 1
            j -= 1
        return FreeWord(w[:i]), FreeWord(w[i : j + 1])

    def cyclic_reduce(self) -> "FreeWord":
        """Rotation-minimal representative of the conjugacy class."""
        _, c = self.cyclic_core()
        if not c:
            return c
        n = len(c.letters)
        rots = [c.letters[k:] + c.letters[:k] for k in range(n)]
        return FreeWord(min(rots, key=_letter_key))

    def primitive_root(self) -> "FreeWord":
        """The unique primitive ``r`` with ``w = r^k`` for some ``k >= 1``."""
        if not self.letters:
            raise ValueError("trivial word has no root")
        u, c = self.cyclic_core()
        p = _smallest_period(c.letters)
        return FreeWord(u.letters + c.letters[:p] + u.inverse().letters)

    def is_primitive_power(self) -> bool:
        """True when the word is not a proper power."""
        return self.primitive_root() == self

    def __str__(self):
        if not self.letters:
            return "1"
        parts = []
        for a in self.letters:
            parts.append(f"x{a}" if a > 0 else f"x{-a}^-1")
        return " ".join(parts)

    def to_json(self) -> list[int]:
        return list(self.letters)

    @classmethod
    def from_json(cls, data) -> "FreeWord":
        return cls(tuple(int(a) for a in data))


def _letter_key(rot: tuple[int, ...]):
    # x1 < x1^-1 < x2 < x2^-1 < ...
    return tuple(2 * abs(a) - (a > 0) for a in rot)


def _smallest_period(s: tuple[int, ...]) -> int:
    n = len(s)
    # prefix function
    pi = [0] * n
    for i in range(1, n):
        k = pi[i - 1]
        while k and s[i] != s[k]:
            k = pi[k - 1]
        if s[i] == s[k]:
            k += 1
        pi[i] = k
    p = n - pi[-1]
    return p if n % p == 0 else n


def gen(k: int) -> FreeWord:
    return FreeWord((k,))


def conjugate_commensurable_cyclic(w1: FreeWord, w2: FreeWord) -> bool:
    """Whether some conjugate of <w1> meets <w2> nontrivially."""
    if not w1 or not w2:
        raise ValueError("conjugate commensurability needs nontrivial words")
    r1 = w1.primitive_root().cyclic_reduce()
    r2 = w2.primitive_root().cyclic_reduce()
    return r1 == r2 or r1 == r2.inverse().cyclic_reduce()
