"""Exact word arithmetic in free groups and closed surface groups.

Letters are nonzero integers: ``+i`` is the i-th generator and ``-i`` its
inverse.  In a surface group of genus g the generators are ordered
``a1, b1, a2, b2, ...`` so ``a_k = 2k - 1`` and ``b_k = 2k``.

String grammar (used by configs, the CLI and reports)::

    word    := "e" | token*          (tokens may be separated by spaces or dots)
    token   := gen digits
    gen     := "a" | "b" | "x"       lower case = generator
             | "A" | "B" | "X"       upper case = inverse

``a``/``b`` tokens belong to surface presentations, ``x`` tokens to free
presentations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Presentation",
    "Word",
    "EMPTY",
    "WordError",
    "reduce",
    "concat",
    "invert",
    "power",
    "cyclic_reduce",
    "dehn_reduce",
    "count_subword",
    "handlebody_retract",
    "surface_relator",
    "parse_word",
    "format_word",
    "equal_in_group",
]


class WordError(ValueError):
    """Malformed word input (bad token, letter out of rank, empty pattern)."""


@dataclass(frozen=True)
class Presentation:
    """A free group of a given rank or the closed surface group of genus >= 2."""

    kind: str
    rank: int

    def __post_init__(self):
        if self.kind not in ("free", "surface"):
            raise WordError(f"unknown presentation kind {self.kind!r}")
        if self.kind == "surface" and (self.rank % 2 or self.rank < 4):
            raise WordError("surface presentations need genus >= 2")
        if self.rank < 1:
            raise WordError("rank must be positive")

    @classmethod
    def free(cls, rank: int) -> "Presentation":
        return cls("free", rank)

    @classmethod
    def surface(cls, genus: int) -> "Presentation":
        if genus < 2:
            raise WordError("torus classes live in Z^2; Dehn reduction needs genus >= 2")
        return cls("surface", 2 * genus)

    @property
    def genus(self) -> int:
        if self.kind != "surface":
            raise WordError("free presentation has no genus")
        return self.rank // 2

    @property
    def relator(self) -> "Word":
        return surface_relator(self.genus)


@dataclass(frozen=True)
class Word:
    """A freely reduced word.  Construct through :func:`reduce`."""

    letters: tuple[int, ...] = ()

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        return self.letters[item]

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __pow__(self, k: int) -> "Word":
        return power(self, k)

    def inverse(self) -> "Word":
        return invert(self)

    def __str__(self):
        return format_word(self)


EMPTY = Word(())


def _check_rank(letters: Iterable[int], rank: int | None) -> None:
    for x in letters:
        if x == 0 or (rank is not None and abs(x) > rank):
            raise WordError(f"letter {x} outside rank {rank}")


def reduce(raw: Sequence[int] | Word, rank: int | None = None) -> Word:
    """Freely reduce a letter sequence."""
    letters = raw.letters if isinstance(raw, Word) else tuple(raw)
    _check_rank(letters, rank)
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return Word(tuple(stack))


def concat(w1: Word, w2: Word) -> Word:
    a, b = w1.letters, w2.letters
    # cancellation only happens at the junction
    i = 0
    n = min(len(a), len(b))
    while i < n and a[len(a) - 1 - i] == -b[i]:
        i += 1
    return Word(a[: len(a) - i] + b[i:])


def invert(w: Word) -> Word:
    return Word(tuple(-x for x in reversed(w.letters)))


def power(w: Word, k: int) -> Word:
    if k < 0:
        return power(invert(w), -k)
    if k == 0 or not w:
        return EMPTY
    conj, core = cyclic_reduce(w)
    # core^k is already reduced because core is cyclically reduced
    return concat(concat(conj, Word(core.letters * k)), invert(conj))


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Split ``w = conj * core * conj^-1`` with ``core`` cyclically reduced."""
    letters = w.letters
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    return Word(letters[:i]), Word(letters[i : j + 1])


def surface_relator(genus: int) -> Word:
    """``a1 b1 A1 B1 ... ag bg Ag Bg``."""
    out: list[int] = []
    for k in range(1, genus + 1):
        a, b = 2 * k - 1, 2 * k
        out += [a, b, -a, -b]
    return Word(tuple(out))


_DEHN_TABLES: dict[int, dict[int, list[tuple[tuple[int, ...], int]]]] = {}


def _dehn_table(genus: int) -> dict[int, list[tuple[tuple[int, ...], int]]]:
    table = _DEHN_TABLES.get(genus)
    if table is None:
        r = surface_relator(genus).letters
        table = {}
        for cyc in (r, invert(Word(r)).letters):
            for k, x in enumerate(cyc):
                table.setdefault(x, []).append((cyc, k))
        _DEHN_TABLES[genus] = table
    return table


def dehn_reduce(w: Word, p: Presentation | int) -> Word:
    """Dehn's algorithm for the surface group of genus >= 2.

    Repeatedly replaces any subword that is more than half of a cyclic
    rotation of the relator (or its inverse) by the inverse of the
    complementary piece.  The result is the empty word iff ``w`` is trivial.
    """
    genus = p.genus if isinstance(p, Presentation) else int(p)
    if genus < 2:
        raise WordError("Dehn reduction needs genus >= 2")
    n = 4 * genus
    half = 2 * genus
    table = _dehn_table(genus)
    _check_rank(w.letters, 2 * genus)
    letters = list(reduce(w).letters)
    i = 0
    while i < len(letters):
        replaced = False
        for cyc, k in table.get(letters[i], ()):
            m = 0
            while m < n and i + m < len(letters) and letters[i + m] == cyc[(k + m) % n]:
                m += 1
            if m > half:
                rest = [cyc[(k + m + t) % n] for t in range(n - m)]
                repl = [-x for x in reversed(rest)]
                letters = list(reduce(letters[:i] + repl + letters[i + m :]).letters)
                i = max(0, i - n)
                replaced = True
                break
        if not replaced:
            i += 1
    return Word(tuple(letters))


def equal_in_group(u: Word, v: Word, p: Presentation) -> bool:
    """Group equality; surface words are compared via triviality of ``u v^-1``."""
    if p.kind == "free":
        return reduce(u) == reduce(v)
    return not dehn_reduce(concat(u, invert(v)), p)


def count_subword(w: Word, pattern: Word, cyclic: bool = False) -> int:
    """Number of (possibly overlapping) occurrences of ``pattern`` in ``w``.

    With ``cyclic`` the count runs over starting positions of the cyclically
    reduced core of ``w`` read as a cyclic word; patterns longer than the core
    wrap around it repeatedly.
    """
    p = pattern.letters
    if not p:
        raise WordError("empty pattern")
    if cyclic:
        core = cyclic_reduce(w)[1].letters
        n = len(core)
        if n == 0:
            return 0
        m = len(p)
        return sum(
            1 for i in range(n) if all(core[(i + j) % n] == p[j] for j in range(m))
        )
    s = w.letters
    m = len(p)
    return sum(1 for i in range(len(s) - m + 1) if s[i : i + m] == p)


def handlebody_retract(w: Word, genus: int) -> Word:
    """Homomorphism ``a_i -> x_i``, ``b_i -> e`` from the surface group to F_g."""
    _check_rank(w.letters, 2 * genus)
    out = []
    for x in w.letters:
        g = abs(x)
        if g % 2:
            out.append((g + 1) // 2 * (1 if x > 0 else -1))
    return reduce(out)


_TOKEN = re.compile(r"([abxABX])(\d+)")


def parse_word(text: str, p: Presentation | None = None) -> Word:
    """Parse the string grammar documented in the module docstring."""
    s = text.replace(" ", "").replace(".", "").replace("*", "")
    if s in ("", "e", "1"):
        return EMPTY
    letters: list[int] = []
    pos = 0
    kinds = set()
    for m in _TOKEN.finditer(s):
        if m.start() != pos:
            raise WordError(f"cannot parse {text!r} at position {pos}")
        pos = m.end()
        gen, idx = m.group(1), int(m.group(2))
        if idx < 1:
            raise WordError(f"generator index must be >= 1 in {text!r}")
        low = gen.lower()
        kinds.add("free" if low == "x" else "surface")
        if low == "x":
            g = idx
        else:
            g = 2 * idx - 1 if low == "a" else 2 * idx
        letters.append(g if gen.islower() else -g)
    if pos != len(s):
        raise WordError(f"cannot parse {text!r} at position {pos}")
    if len(kinds) > 1:
        raise WordError(f"mixed surface and free letters in {text!r}")
    if p is not None:
        if kinds and p.kind not in kinds:
            raise WordError(f"{text!r} does not use the {p.kind} alphabet")
        return reduce(letters, p.rank)
    return reduce(letters)


def format_word(w: Word, p: Presentation | str | None = None) -> str:
    """Inverse of :func:`parse_word`.  Free alphabet unless ``p`` is a surface."""
    kind = p.kind if isinstance(p, Presentation) else (p or "free")
    if not w:
        return "e"
    out = []
    for x in w.letters:
        g = abs(x)
        if kind == "surface":
            tok = ("a" if g % 2 else "b") + str((g + 1) // 2)
        else:
            tok = "x" + str(g)
        out.append(tok if x > 0 else tok.upper())
    return " ".join(out)
