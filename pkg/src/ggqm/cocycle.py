"""The cocycle ``gamma(f, x) = [l_{z,f(x)} * {f_t(x)} * l_{x,z}]``.

For one strand the value is the crossing word of the closed-up trajectory:
a surface-group word (Dehn-reduced) for genus >= 2 and a Z^2 class on the
torus.  For two strands on the torus we use the splitting

    C_2(T) -> T x (T - {0}),   (p1, p2) -> (p1, p2 - p1),

so ``P_2(T) = Z^2 x F_2``.  The central coordinate is the lift displacement
of strand 1 (simultaneous translations) and the relative coordinate is the
crossing word of the relative path ``d(t) = p2(t) - p1(t)`` against the
integer grid, read in the punctured torus with the puncture at the lattice.
Connectors move both strands along straight segments proportionally in time,
so ``d`` is piecewise linear and its grid crossings are exact.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

from .dynamics import Homeo, Motion, apply, compose, run_motion
from .surface import (
    DegenerateError,
    GeometryError,
    Point,
    PolygonModel,
    sides_to_word,
    torus_class,
)
from .words import Word, concat, equal_in_group, format_word, invert, parse_word, reduce

# strands (or the relative path and the lattice) closer than this collide
COLLISION_TOL = 1e-9


@dataclass(frozen=True)
class TorusClass:
    """Element of pi_1(T) = Z^2."""

    m: int = 0
    n: int = 0

    def __mul__(self, other: "TorusClass") -> "TorusClass":
        return TorusClass(self.m + other.m, self.n + other.n)

    def inverse(self) -> "TorusClass":
        return TorusClass(-self.m, -self.n)

    @property
    def abelian_word(self) -> Word:
        a = (1 if self.m > 0 else -1,) * abs(self.m)
        b = (2 if self.n > 0 else -2,) * abs(self.n)
        return Word(a + b)

    def __str__(self):
        return f"({self.m},{self.n})"


@dataclass(frozen=True)
class TorusBraid:
    """Element of P_2(T) in split coordinates (central Z^2, relative F_2)."""

    central: tuple[int, int] = (0, 0)
    rel: Word = Word(())

    def __mul__(self, other: "TorusBraid") -> "TorusBraid":
        c = (self.central[0] + other.central[0], self.central[1] + other.central[1])
        return TorusBraid(c, concat(self.rel, other.rel))

    def inverse(self) -> "TorusBraid":
        return TorusBraid((-self.central[0], -self.central[1]), invert(self.rel))

    def __str__(self):
        return f"({self.central[0]},{self.central[1]}|{format_word(self.rel)})"

    @classmethod
    def parse(cls, text: str) -> "TorusBraid":
        s = text.strip().strip("()")
        cen, _, rel = s.partition("|")
        m, n = (int(v) for v in cen.split(","))
        return cls((m, n), parse_word(rel))


@dataclass(frozen=True)
class Basepoint:
    n: int
    z: tuple[Point, ...]

    def __post_init__(self):
        if self.n not in (1, 2) or len(self.z) != self.n:
            raise GeometryError("basepoint must have n = 1 or 2 points")
        if self.n == 2 and self.z[0] == self.z[1]:
            raise GeometryError("basepoint strands must be distinct")

    def validate(self, model: PolygonModel) -> None:
        if self.n == 2 and not model.is_torus:
            raise GeometryError("two strands are supported on the torus only")
        for p in self.z:
            try:
                model.check_interior(p)
            except DegenerateError as exc:
                raise GeometryError(f"basepoint {p}: {exc}") from None


GammaValue = Word | TorusClass | TorusBraid


# -- one strand ----------------------------------------------------------------

def gamma_n1(f: Homeo, x: Point, bp: Basepoint, resolution: int = 8) -> Word | TorusClass:
    model = f.model
    z = bp.z[0]
    model.check_interior(x)
    model._check_segment(z, x)
    sides: list[int] = []
    p = x
    for m, e in f.steps():
        t = run_motion(model, m.motion(p, e, resolution))
        sides += t.sides
        p = t.points[-1]
    model.check_interior(p)
    model._check_segment(p, z)
    if model.is_torus:
        return TorusClass(*torus_class(sides, model))
    return sides_to_word(sides, model)


# -- two strands on the torus ------------------------------------------------------

def _near_int(v: float) -> float:
    return abs(v - round(v))


def _rel_segment(a: Point, b: Point, out: list[int]) -> None:
    """Append the grid-crossing letters of the segment a -> b (time order)."""
    events = []
    for axis, letter in ((0, 1), (1, 2)):
        fa, fb = math.floor(a[axis]), math.floor(b[axis])
        if fa == fb:
            continue
        span = b[axis] - a[axis]
        if fb > fa:
            ks, sgn = range(fa + 1, fb + 1), 1
        else:
            ks, sgn = range(fa, fb, -1), -1
        for k in ks:
            t = (k - a[axis]) / span
            other = a[1 - axis] + t * (b[1 - axis] - a[1 - axis])
            if _near_int(other) < COLLISION_TOL:
                raise DegenerateError("relative path meets the puncture (strand collision)")
            events.append((t, sgn * letter))
    events.sort()
    out.extend(l for _, l in events)


def _interp(mo: Motion, taus: Sequence[float]) -> list[Point]:
    if mo.stationary:
        return [mo.dev[0]] * len(taus)
    out = []
    for t in taus:
        i = min(bisect.bisect_right(mo.taus, t) - 1, len(mo.taus) - 2)
        t0, t1 = mo.taus[i], mo.taus[i + 1]
        a, b = mo.dev[i], mo.dev[i + 1]
        w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        out.append((a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])))
    return out


def _check_rel(d: Point) -> None:
    if math.hypot(_near_int(d[0]), _near_int(d[1])) < COLLISION_TOL:
        raise DegenerateError("strands collide")


def gamma_torus_n2(f: Homeo, xs: Sequence[Point], bp: Basepoint, resolution: int = 8) -> TorusBraid:
    model = f.model
    if not model.is_torus or bp.n != 2:
        raise GeometryError("two-strand gamma is defined on the torus with n = 2")
    (z1, z2), (x1, x2) = bp.z, tuple(xs)
    for p in (x1, x2):
        model.check_interior(p)
    letters: list[int] = []
    zd = (z2[0] - z1[0], z2[1] - z1[1])
    d = (x2[0] - x1[0], x2[1] - x1[1])
    _check_rel(zd)
    _check_rel(d)
    _rel_segment(zd, d, letters)
    sides1: list[int] = []
    p1, p2 = x1, x2
    for m, e in f.steps():
        mo1, mo2 = m.motion(p1, e, resolution), m.motion(p2, e, resolution)
        t1, t2 = run_motion(model, mo1), run_motion(model, mo2)
        sides1 += t1.sides
        taus = sorted(set(mo1.taus) | set(mo2.taus) | {0.0, 1.0})
        q1, q2 = _interp(mo1, taus), _interp(mo2, taus)
        base = d
        prev = d
        for k in range(1, len(taus)):
            nd = (
                base[0] + (q2[k][0] - q2[0][0]) - (q1[k][0] - q1[0][0]),
                base[1] + (q2[k][1] - q2[0][1]) - (q1[k][1] - q1[0][1]),
            )
            _check_rel(nd)
            _rel_segment(prev, nd, letters)
            prev = nd
        d = prev
        p1, p2 = t1.points[-1], t2.points[-1]
    end = (d[0] + zd[0] - (p2[0] - p1[0]), d[1] + zd[1] - (p2[1] - p1[1]))
    _rel_segment(d, end, letters)
    return TorusBraid(torus_class(sides1, model), reduce(list(reversed(letters))))


# -- dispatch and checks -------------------------------------------------------------

def gamma(f: Homeo, x, bp: Basepoint, resolution: int = 8) -> GammaValue:
    if bp.n == 1:
        return gamma_n1(f, x, bp, resolution)
    return gamma_torus_n2(f, x, bp, resolution)


def apply_config(f: Homeo, x, bp: Basepoint):
    if bp.n == 1:
        return apply(f, x)
    return tuple(apply(f, p) for p in x)


def gamma_product(a: GammaValue, b: GammaValue) -> GammaValue:
    if isinstance(a, Word):
        return concat(a, b)
    return a * b


def gamma_equal(a: GammaValue, b: GammaValue, model: PolygonModel) -> bool:
    if isinstance(a, Word):
        return equal_in_group(a, b, model.presentation)
    if isinstance(a, TorusBraid):
        return a.central == b.central and reduce(a.rel) == reduce(b.rel)
    return a == b


def format_gamma(v: GammaValue, model: PolygonModel) -> str:
    if isinstance(v, Word):
        return format_word(v, "surface")
    return str(v)


@dataclass
class CocycleResult:
    ok: bool
    lhs: GammaValue
    rhs: GammaValue


def cocycle_check(f: Homeo, g: Homeo, x, bp: Basepoint, resolution: int = 8) -> CocycleResult:
    """Compare ``gamma(fg, x)`` with ``gamma(f, g(x)) gamma(g, x)``."""
    model = f.model
    lhs = gamma(compose(f, g), x, bp, resolution)
    gx = apply_config(g, x, bp)
    rhs = gamma_product(gamma(f, gx, bp, resolution), gamma(g, x, bp, resolution))
    return CocycleResult(gamma_equal(lhs, rhs, model), lhs, rhs)


def sample_config(model: PolygonModel, rng, bp: Basepoint):
    """Uniform sample of C_n(Delta) (n = 1 or 2)."""
    if bp.n == 1:
        return model.sample_point(rng)
    while True:
        a, b = model.sample_point(rng), model.sample_point(rng)
        if math.dist(a, b) > COLLISION_TOL:
            return (a, b)
