"""Homogeneous Brooks quasimorphisms and their compositions with projections.

A :class:`QuasimorphismSpec` evaluates elements of its *source* group:

* ``pre_map="identity"``: reduced words in the free group ``base``;
* ``pre_map="handlebody_retract"``: surface-group words, pushed to F_g by
  ``a_i -> x_i, b_i -> e`` (so ``base`` must be F_g);
* ``pre_map="torus_relative"``: :class:`~ggqm.cocycle.TorusBraid` values,
  read through their F_2 coordinate (the central Z^2 part is ignored).

Torus classes in Z^2 (one strand on the torus) are accepted by identity
specs whose patterns are single letters, i.e. homomorphisms.

Homogenized values are exact: the homogenization of a Brooks count is the
cyclic count on the cyclically reduced core.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .sampling import chunk_rng, chunk_sizes, run_chunks, random_word
from .words import (
    Presentation,
    Word,
    WordError,
    concat,
    count_subword,
    handlebody_retract,
    invert,
    parse_word,
    format_word,
    reduce,
)

PRE_MAPS = ("identity", "handlebody_retract", "torus_relative")


@dataclass(frozen=True)
class BrooksPattern:
    pattern: Word
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.pattern:
            raise WordError("Brooks pattern must be nonempty")


@dataclass(frozen=True)
class QuasimorphismSpec:
    base: Presentation
    terms: tuple[BrooksPattern, ...] = ()
    symmetrized: bool = False
    pre_map: str = "identity"
    source_genus: int | None = None

    def __post_init__(self):
        if self.base.kind != "free":
            raise WordError("Brooks quasimorphisms live on free groups")
        if self.pre_map not in PRE_MAPS:
            raise WordError(f"pre_map must be one of {PRE_MAPS}")
        if self.symmetrized and self.base.rank != 2:
            raise WordError("symmetrization is defined on F_2 only")
        if self.pre_map == "handlebody_retract":
            g = self.source_genus if self.source_genus is not None else self.base.rank
            if g != self.base.rank:
                raise WordError("retract target must be F_g")
            object.__setattr__(self, "source_genus", g)
        if self.pre_map == "torus_relative" and self.base.rank != 2:
            raise WordError("torus relative coordinate lives in F_2")
        for t in self.terms:
            reduce(t.pattern, self.base.rank)

    @classmethod
    def brooks(cls, pattern: str, coefficient: float = 1.0, rank: int = 2, **kw) -> "QuasimorphismSpec":
        base = Presentation.free(rank)
        return cls(base, (BrooksPattern(parse_word(pattern, base), coefficient),), **kw)

    def project(self, g) -> Word:
        """Image of a source element in the free group ``base``."""
        if self.pre_map == "handlebody_retract":
            return handlebody_retract(g, self.source_genus)
        if self.pre_map == "torus_relative":
            return g.rel
        if hasattr(g, "abelian_word"):
            # Z^2 classes: only homomorphisms (single-letter patterns) are well defined
            if any(len(t.pattern) != 1 for t in self.terms):
                raise WordError("torus classes admit single-letter patterns only")
            return g.abelian_word
        return g

    def raw(self, g) -> float:
        """Plain (non-homogenized) Brooks value."""
        w = self.project(g)
        return sum(brooks_eval(t, w) for t in self.terms)

    def __call__(self, g) -> float:
        """Homogenized value, symmetrized when requested."""
        w = self.project(g)
        if self.symmetrized:
            return _symmetrized(self.terms, w)
        return _homogeneous(self.terms, w)

    def describe(self) -> dict:
        return {
            "base_rank": self.base.rank,
            "terms": [[format_word(t.pattern), t.coefficient] for t in self.terms],
            "symmetrized": self.symmetrized,
            "pre_map": self.pre_map,
        }


@dataclass(frozen=True)
class DefectEstimate:
    max_observed: float
    trials: int
    seed: int
    witness: tuple[str, str] | None = None


def brooks_eval(p: BrooksPattern, g: Word) -> float:
    """Signed count ``#p(g) - #p^-1(g)`` scaled by the coefficient."""
    return p.coefficient * (count_subword(g, p.pattern) - count_subword(g, invert(p.pattern)))


def _homogeneous(terms: Iterable[BrooksPattern], w: Word) -> float:
    total = 0.0
    for t in terms:
        c = count_subword(w, t.pattern, cyclic=True) - count_subword(w, invert(t.pattern), cyclic=True)
        total += t.coefficient * c
    return total


def inversion_automorphisms() -> list[Callable[[Word], Word]]:
    """The four maps of F_2 generated by ``a -> a^-1`` and ``b -> b^-1``."""
    maps = []
    for sa in (1, -1):
        for sb in (1, -1):
            def sigma(w: Word, sa=sa, sb=sb) -> Word:
                return Word(tuple(x * (sa if abs(x) == 1 else sb) for x in w.letters))
            maps.append(sigma)
    return maps


def _symmetrized(terms, w: Word) -> float:
    return sum(_homogeneous(terms, s(w)) for s in inversion_automorphisms()) / 4.0


def homogenize(spec: QuasimorphismSpec | BrooksPattern, g) -> float:
    """Exact homogenization via cyclic counting (no symmetrization)."""
    if isinstance(spec, BrooksPattern):
        return _homogeneous((spec,), g)
    return _homogeneous(spec.terms, spec.project(g))


def symmetrize_eval(spec: QuasimorphismSpec, g) -> float:
    if spec.base.rank != 2:
        raise WordError("symmetrization needs base F_2")
    return _symmetrized(spec.terms, spec.project(g))


def random_source_element(spec: QuasimorphismSpec, rng: np.random.Generator, max_len: int):
    n = int(rng.integers(0, max_len + 1))
    if spec.pre_map == "handlebody_retract":
        return random_word(rng, 2 * spec.source_genus, n)
    w = random_word(rng, spec.base.rank, n)
    if spec.pre_map == "torus_relative":
        from .cocycle import TorusBraid

        return TorusBraid((int(rng.integers(-5, 6)), int(rng.integers(-5, 6))), w)
    return w


def _product(spec: QuasimorphismSpec, g, h):
    if spec.pre_map == "torus_relative":
        return g * h
    return concat(g, h)


def _defect_chunk(spec, seed, chunk, n, max_len, homogeneous):
    rng = chunk_rng(seed, chunk)
    phi = spec if homogeneous else spec.raw
    best, wit = 0.0, None
    for _ in range(n):
        g = random_source_element(spec, rng, max_len)
        h = random_source_element(spec, rng, max_len)
        d = abs(phi(h) - phi(_product(spec, g, h)) + phi(g))
        if d > best:
            best, wit = d, (g, h)
    return best, wit


def defect_estimate(
    spec: QuasimorphismSpec,
    trials: int,
    max_len: int = 8,
    seed: int = 0,
    homogeneous: bool = True,
    workers: int = 1,
) -> DefectEstimate:
    """Empirical lower bound for the defect ``sup |phi(h) - phi(gh) + phi(g)|``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not spec.terms:
        return DefectEstimate(0.0, trials, seed)
    args = [(spec, seed, c, n, max_len, homogeneous) for c, n in enumerate(chunk_sizes(trials))]
    best, wit = 0.0, None
    for b, w in run_chunks(_defect_chunk, args, workers):
        if b > best:
            best, wit = b, w
    witness = None
    if wit is not None:
        witness = tuple(_fmt_source(spec, x) for x in wit)
    return DefectEstimate(best, trials, seed, witness)


def _fmt_source(spec: QuasimorphismSpec, g) -> str:
    if spec.pre_map == "handlebody_retract":
        return format_word(g, "surface")
    if spec.pre_map == "torus_relative":
        return str(g)
    return format_word(g)


@dataclass
class NormalVanishingReport:
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def normal_vanishing_check(spec: QuasimorphismSpec, pairs) -> NormalVanishingReport:
    """Check ``phi(g c) == phi(g)`` exactly for (g, c) pairs with c central."""
    rep = NormalVanishingReport()
    for g, c in pairs:
        rep.checked += 1
        lhs, rhs = spec(_product(spec, g, c)), spec(g)
        if lhs != rhs:
            rep.violations.append((str(g), str(c), lhs, rhs))
    return rep
