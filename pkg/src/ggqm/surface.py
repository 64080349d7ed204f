"""Polygon models of closed surfaces and crossing-sequence reading of paths.

The torus is the unit square with opposite sides glued by translations.  A
surface of genus g >= 2 is the regular 4g-gon inscribed in the unit circle,
with side ``j`` running from vertex ``V_j`` to ``V_{j+1}`` counterclockwise and
the standard gluing ``a1 b1 a1^-1 b1^-1 ...``: side ``4k`` is glued to side
``4k+2`` and side ``4k+1`` to side ``4k+3``, each by the orientation
preserving isometry that reverses the counterclockwise direction.  The
interior of the polygon is the cell Delta; the flat metric on it is the
Euclidean one and the measure is normalized area.

Crossing table (one letter per *outward* crossing of a side):

* torus: right side -> ``a`` (x1), top -> ``b`` (x2), left -> ``A``,
  bottom -> ``B``;
* genus >= 2: side ``4k+2`` -> ``a_{k+1}``, side ``4k`` -> ``A_{k+1}``,
  side ``4k+1`` -> ``b_{k+1}``, side ``4k+3`` -> ``B_{k+1}``.

Paths are read right to left: the letter of the first crossing is the
rightmost letter, so the word of "t1 after t2" is ``word(t1) * word(t2)``.
With this table the small loop around the (single) polygon vertex reads the
standard relator, so crossing words are words in the standard presentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .words import Presentation, Word, dehn_reduce, reduce

Point = tuple[float, float]
Rot = tuple[float, float]

ROT_ID: Rot = (1.0, 0.0)

# distance below which a point counts as lying on the polygon boundary
BOUNDARY_TOL = 1e-12


class GeometryError(ValueError):
    """Invalid geometric configuration (config-level problem)."""


class DegenerateError(ArithmeticError):
    """A traced object met a corner, a boundary or another strand.

    These events have measure zero; samplers catch this and resample.
    """


class BoundaryError(DegenerateError):
    pass


# -- small planar helpers ----------------------------------------------------

def rot_apply(r: Rot, v: Point) -> Point:
    c, s = r
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def rot_mul(r1: Rot, r2: Rot) -> Rot:
    c1, s1 = r1
    c2, s2 = r2
    return (c1 * c2 - s1 * s2, s1 * c2 + c1 * s2)


def rot_inv(r: Rot) -> Rot:
    return (r[0], -r[1])


def rot_angle(theta: float) -> Rot:
    return (math.cos(theta), math.sin(theta))


def seg_point_dist(a: Point, b: Point, p: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    px, py = p[0] - a[0], p[1] - a[1]
    L2 = dx * dx + dy * dy
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, (px * dx + py * dy) / L2))
    return math.hypot(px - t * dx, py - t * dy)


@dataclass(frozen=True)
class Iso:
    """Orientation preserving planar isometry ``x -> R x + t``."""

    c: float = 1.0
    s: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    def __call__(self, p: Point) -> Point:
        return (self.c * p[0] - self.s * p[1] + self.tx, self.s * p[0] + self.c * p[1] + self.ty)

    def vec(self, v: Point) -> Point:
        return (self.c * v[0] - self.s * v[1], self.s * v[0] + self.c * v[1])

    @property
    def rot(self) -> Rot:
        return (self.c, self.s)

    @property
    def angle(self) -> float:
        return math.atan2(self.s, self.c)

    def compose(self, other: "Iso") -> "Iso":
        """``self o other``."""
        c = self.c * other.c - self.s * other.s
        s = self.s * other.c + self.c * other.s
        tx, ty = self((other.tx, other.ty))
        return Iso(c, s, tx, ty)

    def inverse(self) -> "Iso":
        c, s = self.c, -self.s
        return Iso(c, s, -(c * self.tx - s * self.ty), -(s * self.tx + c * self.ty))

    def power(self, k: int) -> "Iso":
        out = Iso()
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = base.compose(out)
        return out

    @classmethod
    def mapping(cls, a: Point, b: Point, a2: Point, b2: Point) -> "Iso":
        """The isometry sending segment ``a b`` onto ``a2 b2``."""
        ux, uy = b[0] - a[0], b[1] - a[1]
        vx, vy = b2[0] - a2[0], b2[1] - a2[1]
        nu, nv = math.hypot(ux, uy), math.hypot(vx, vy)
        if abs(nu - nv) > 1e-9 * max(nu, 1.0):
            raise GeometryError("segments have different lengths")
        ux, uy, vx, vy = ux / nu, uy / nu, vx / nv, vy / nv
        c, s = ux * vx + uy * vy, ux * vy - uy * vx
        r = Iso(c, s)
        px, py = r(a)
        return Iso(c, s, a2[0] - px, a2[1] - py)

    def close_to(self, other: "Iso", tol: float = 1e-9) -> bool:
        return (
            abs(self.c - other.c) < tol
            and abs(self.s - other.s) < tol
            and abs(self.tx - other.tx) < tol
            and abs(self.ty - other.ty) < tol
        )


# -- surface data -------------------------------------------------------------

@dataclass(frozen=True)
class SurfacePoint:
    coords: Point
    lift_offset: tuple[int, int] = (0, 0)


@dataclass
class PathTrace:
    """Sampled positions (polygon coordinates) plus directed side crossings.

    ``crossings`` holds ``(segment_index, side)`` pairs in time order; segment
    ``i`` runs from ``points[i]`` to ``points[i + 1]`` on the surface.
    """

    points: list[Point] = field(default_factory=list)
    crossings: list[tuple[int, int]] = field(default_factory=list)

    def then(self, other: "PathTrace") -> "PathTrace":
        """This path followed by ``other`` (time order)."""
        if not self.points:
            return PathTrace(list(other.points), list(other.crossings))
        if not other.points:
            return PathTrace(list(self.points), list(self.crossings))
        off = len(self.points) - 1
        pts = self.points + other.points[1:]
        return PathTrace(pts, self.crossings + [(i + off, s) for i, s in other.crossings])

    @property
    def sides(self) -> list[int]:
        return [s for _, s in self.crossings]


@dataclass
class TraceResult:
    """End point, sides crossed and carried frame of a traced segment.

    ``pieces[k]`` is the k-th straight piece in polygon coordinates and
    ``isos[k]`` maps coordinates continued from the start copy onto the copy
    holding that piece (``isos[0]`` is the identity).
    """

    end: Point
    sides: list[int]
    frame: Rot
    pieces: list[tuple[Point, Point]] = field(default_factory=list)
    isos: list[Iso] = field(default_factory=list)


class PolygonModel:
    """Fundamental polygon with side pairings, crossing letters and measure."""

    def __init__(
        self,
        genus: int,
        vertices: Sequence[Point],
        letters: Sequence[int],
        corner_exclusion: float,
    ):
        self.genus = int(genus)
        self.vertices: tuple[Point, ...] = tuple((float(x), float(y)) for x, y in vertices)
        n = len(self.vertices)
        if n != 4 * self.genus:
            raise GeometryError("polygon must have 4g sides")
        self.n_sides = n
        self.letters = tuple(letters)
        self.corner_exclusion = float(corner_exclusion)
        normals, offsets, lengths = [], [], []
        for j in range(n):
            a, b = self.vertices[j], self.vertices[(j + 1) % n]
            dx, dy = b[0] - a[0], b[1] - a[1]
            L = math.hypot(dx, dy)
            nx, ny = dy / L, -dx / L  # outward for counterclockwise order
            normals.append((nx, ny))
            offsets.append(nx * a[0] + ny * a[1])
            lengths.append(L)
        self.normals = tuple(normals)
        self.offsets = tuple(offsets)
        self.side_lengths = tuple(lengths)
        self.partner = tuple(self._partner(j) for j in range(n))
        self.pair_maps = tuple(self._pair_map(j) for j in range(n))
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        self.bbox = (min(xs), min(ys), max(xs), max(ys))
        self.area = 0.5 * abs(
            sum(
                self.vertices[j][0] * self.vertices[(j + 1) % n][1]
                - self.vertices[(j + 1) % n][0] * self.vertices[j][1]
                for j in range(n)
            )
        )
        self.center = (sum(xs) / n, sum(ys) / n)
        self.circumradius = max(math.hypot(x - self.center[0], y - self.center[1]) for x, y in self.vertices)
        self.diameter = max(
            math.dist(p, q) for p in self.vertices for q in self.vertices
        )

    # gluing ------------------------------------------------------------------
    def _partner(self, j: int) -> int:
        k, r = divmod(j, 4)
        return 4 * k + (r + 2) % 4

    def _pair_map(self, j: int) -> Iso:
        """Map used when a path leaves through side ``j``: side ``j`` onto its
        partner, outside of ``j`` onto the inside of the partner."""
        n = self.n_sides
        V = self.vertices
        p = self.partner[j]
        # start of side j goes to the end of the partner and vice versa
        return Iso.mapping(V[j], V[(j + 1) % n], V[(p + 1) % n], V[p])

    @property
    def is_torus(self) -> bool:
        return self.genus == 1

    @property
    def presentation(self) -> Presentation:
        if self.is_torus:
            return Presentation.free(2)
        return Presentation.surface(self.genus)

    def describe(self) -> str:
        return "torus" if self.is_torus else f"genus({self.genus})"

    # point queries -----------------------------------------------------------
    def boundary_distance(self, p: Point) -> float:
        """Signed distance to the boundary (positive inside)."""
        return min(c - (n[0] * p[0] + n[1] * p[1]) for n, c in zip(self.normals, self.offsets))

    def contains(self, p: Point, margin: float = 0.0) -> bool:
        return self.boundary_distance(p) > margin

    def corner_distance(self, p: Point) -> float:
        return min(math.hypot(p[0] - v[0], p[1] - v[1]) for v in self.vertices)

    def check_interior(self, p: Point) -> None:
        if self.boundary_distance(p) <= BOUNDARY_TOL:
            raise BoundaryError(f"point {p} on or outside the polygon boundary")
        if not self.is_torus and self.corner_distance(p) <= self.corner_exclusion:
            raise DegenerateError(f"point {p} inside a corner exclusion disk")

    def canonicalize(self, p: Sequence[float]) -> SurfacePoint:
        """Representative inside the polygon.

        Torus: integer translation, recorded in ``lift_offset``.  Higher
        genus: the end of the straight path from the polygon centre.
        """
        x, y = float(p[0]), float(p[1])
        if self.is_torus:
            fx, fy = math.floor(x), math.floor(y)
            q = (x - fx, y - fy)
            self.check_interior(q)
            return SurfacePoint(q, (int(fx), int(fy)))
        if self.contains((x, y)):
            self.check_interior((x, y))
            return SurfacePoint((x, y))
        res = self.trace(self.center, (x - self.center[0], y - self.center[1]))
        return SurfacePoint(res.end)

    # tracing -----------------------------------------------------------------
    def _check_segment(self, a: Point, b: Point) -> None:
        ex = self.corner_exclusion
        for v in self.vertices:
            if seg_point_dist(a, b, v) <= ex:
                raise DegenerateError("path enters a corner exclusion disk")

    def trace(self, p: Point, d: Point, frame: Rot = ROT_ID) -> TraceResult:
        """Follow the straight displacement ``d`` from ``p`` across glued sides.

        ``frame`` is any rotation carried along; it is left-multiplied by the
        rotation of every pairing crossed, so a displacement given in a
        developed frame can be converted with ``rot_apply(frame, .)``.
        """
        px, py = p
        dx, dy = d
        sides: list[int] = []
        pieces: list[tuple[Point, Point]] = []
        isos: list[Iso] = [Iso()]
        skip = -1
        for _ in range(100000):
            t_exit, side = math.inf, -1
            for j, ((nx, ny), c) in enumerate(zip(self.normals, self.offsets)):
                if j == skip:
                    continue
                nd = nx * dx + ny * dy
                if nd > 0.0:
                    t = (c - (nx * px + ny * py)) / nd
                    if t < t_exit:
                        t_exit, side = t, j
            if t_exit >= 1.0:
                end = (px + dx, py + dy)
                self._check_segment((px, py), end)
                if self.boundary_distance(end) <= BOUNDARY_TOL:
                    raise BoundaryError("path ends on the polygon boundary")
                pieces.append(((px, py), end))
                return TraceResult(end, sides, frame, pieces, isos)
            t_exit = max(t_exit, 0.0)
            q = (px + t_exit * dx, py + t_exit * dy)
            self._check_segment((px, py), q)
            pieces.append(((px, py), q))
            sides.append(side)
            m = self.pair_maps[side]
            isos.append(m.compose(isos[-1]))
            px, py = m(q)
            rem = 1.0 - t_exit
            dx, dy = m.vec((dx * rem, dy * rem))
            frame = rot_mul(m.rot, frame)
            skip = self.partner[side]
        raise DegenerateError("trace did not terminate")

    # metric ------------------------------------------------------------------
    def distance(self, p: Point, q: Point) -> float:
        """Model distance: exact on the torus; on higher genus the shortest of
        the straight chart distance and the one-side-crossing distances."""
        if self.is_torus:
            dx = abs(p[0] - q[0]) % 1.0
            dy = abs(p[1] - q[1]) % 1.0
            return math.hypot(min(dx, 1 - dx), min(dy, 1 - dy))
        best = math.dist(p, q)
        for m in self.pair_maps:
            best = min(best, math.dist(p, m.inverse()(q)))
        return best

    def systole_threshold(self, n: int = 1) -> float:
        """``sys / (2n)`` for a documented lower bound ``sys`` of the systole.

        Torus: 1 (unit square).  Genus >= 2: the smaller of the shortest side
        length and the shortest distance between paired sides.
        """
        if self.is_torus:
            sys = 1.0
        else:
            V = self.vertices
            N = self.n_sides
            sys = min(self.side_lengths)
            for j in range(N):
                p = self.partner[j]
                a, b = V[j], V[(j + 1) % N]
                c, d = V[p], V[(p + 1) % N]
                dist = min(
                    seg_point_dist(a, b, c), seg_point_dist(a, b, d),
                    seg_point_dist(c, d, a), seg_point_dist(c, d, b),
                )
                sys = min(sys, dist)
        return sys / (2 * n)

    def sample_point(self, rng: np.random.Generator, margin: float = 0.0) -> Point:
        x0, y0, x1, y1 = self.bbox
        while True:
            p = (x0 + (x1 - x0) * float(rng.random()), y0 + (y1 - y0) * float(rng.random()))
            if self.boundary_distance(p) > max(margin, BOUNDARY_TOL) and (
                self.is_torus or self.corner_distance(p) > self.corner_exclusion
            ):
                return p

    def grid(self, density: int, margin: float = 0.0) -> list[Point]:
        """Cell-centred grid of ``density x density`` over the bounding box,
        restricted to the interior."""
        x0, y0, x1, y1 = self.bbox
        pts = []
        for i in range(density):
            for j in range(density):
                p = (x0 + (x1 - x0) * (i + 0.5) / density, y0 + (y1 - y0) * (j + 0.5) / density)
                if self.boundary_distance(p) > max(margin, BOUNDARY_TOL) and (
                    self.is_torus or self.corner_distance(p) > self.corner_exclusion
                ):
                    pts.append(p)
        return pts

    # vertex cycle --------------------------------------------------------------
    def vertex_cycle(self) -> list[int]:
        """Sides crossed (outward, time order) by a small counterclockwise loop
        around the polygon vertex."""
        n = self.n_sides
        seq, j = [], 0
        while True:
            side = (j - 1) % n
            seq.append(side)
            # the end vertex of ``side`` goes to the start vertex of its partner
            j = self.partner[side]
            if j == 0:
                return seq


def torus(corner_exclusion: float = 1e-9) -> PolygonModel:
    return PolygonModel(1, [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], [-2, 1, 2, -1], corner_exclusion)


def genus_surface(genus: int, corner_exclusion: float | None = None) -> PolygonModel:
    if genus < 2:
        raise GeometryError("use torus() for genus 1")
    N = 4 * genus
    verts = [
        (math.cos(-math.pi / 2 - math.pi / N + 2 * math.pi * j / N),
         math.sin(-math.pi / 2 - math.pi / N + 2 * math.pi * j / N))
        for j in range(N)
    ]
    letters = []
    for j in range(N):
        k, r = divmod(j, 4)
        a, b = 2 * k + 1, 2 * k + 2
        letters.append({0: -a, 1: b, 2: a, 3: -b}[r])
    excl = 1e-3 if corner_exclusion is None else corner_exclusion
    return PolygonModel(genus, verts, letters, excl)


def model_from_spec(spec: str | int) -> PolygonModel:
    """``"torus"``, ``"genus(g)"`` or an integer genus."""
    if isinstance(spec, int):
        return torus() if spec == 1 else genus_surface(spec)
    s = str(spec).strip().lower().replace(" ", "")
    if s == "torus":
        return torus()
    if s.startswith("genus(") and s.endswith(")"):
        return model_from_spec(int(s[6:-1]))
    raise GeometryError(f"unknown surface {spec!r}")


# -- connectors and words -------------------------------------------------------

def connector(x: Point, y: Point, m: PolygonModel) -> PathTrace:
    """Straight segment inside Delta (the polygon is convex: no crossings)."""
    m.check_interior(x)
    m.check_interior(y)
    if x == y:
        return PathTrace([x], [])
    m._check_segment(x, y)
    return PathTrace([x, y], [])


def reverse_trace(t: PathTrace, m: PolygonModel) -> PathTrace:
    n = len(t.points)
    cr = [(n - 2 - i, m.partner[s]) for i, s in reversed(t.crossings)]
    return PathTrace(list(reversed(t.points)), cr)


def sides_to_word(sides: Sequence[int], m: PolygonModel) -> Word:
    """Right-to-left reading of a time-ordered crossing sequence."""
    w = reduce([m.letters[s] for s in reversed(sides)])
    if not m.is_torus:
        w = dehn_reduce(w, m.genus)
    return w


def trace_to_word(t: PathTrace, m: PolygonModel) -> Word:
    """Class of a closed-up trace: a surface word (Dehn-reduced) for genus
    >= 2, the punctured-torus F_2 crossing word for the torus."""
    return sides_to_word(t.sides, m)


def torus_class(sides: Sequence[int], m: PolygonModel) -> tuple[int, int]:
    """Z^2 class of a torus crossing sequence (integer lift displacement)."""
    if not m.is_torus:
        raise GeometryError("Z^2 classes exist on the torus only")
    a = b = 0
    for s in sides:
        x = m.letters[s]
        if abs(x) == 1:
            a += 1 if x > 0 else -1
        else:
            b += 1 if x > 0 else -1
    return (a, b)
