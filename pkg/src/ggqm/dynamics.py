"""Explicit area-preserving homeomorphisms with canonical isotopies.

Elementary maps (each a one-parameter flow, so integer exponents are
natural):

* :class:`AnnulusTwist` -- shear ``(s, u) -> (s + e h(u), u)`` in flat tube
  coordinates around a closed polyline core.  ``u`` is the signed distance to
  the core (positive on the left) and ``s`` is arclength along the level
  curve ``{dist = u}``, which consists of offset segments, trimmed on the
  inner side of each bend and joined by circular arcs on the outer side.  The
  area element is exactly ``ds du``, so the shear is exactly area
  preserving.  A profile with ``h(0) = L`` (one full turn) is a point push
  along the core.
* :class:`DiskMap` -- rotation by ``e theta(rho)`` about a centre inside Delta.
* :class:`Translation` -- translation of the torus.

The canonical isotopy of a factor moves the flow parameter linearly from 0
to ``e``.  Each point follows a polyline in the developed plane (exact on
straight pieces, arcs cut into chords of at most ``pi/16``), and the
polyline is traced through the side pairings, which gives exact crossing
records.  A :class:`Homeo` stores its factors in composition order, so the
rightmost factor acts first, and its isotopy runs the factors right to left.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .sampling import chunk_rng
from .surface import (
    ROT_ID,
    DegenerateError,
    GeometryError,
    Iso,
    PathTrace,
    Point,
    PolygonModel,
    Rot,
    rot_apply,
    seg_point_dist,
)

ARC_STEP = math.pi / 16
DEFAULT_RESOLUTION = 8
# |u| below this counts as lying on the core
CORE_TOL = 1e-12
# relative tolerance for "an integer number of turns"
TURN_TOL = 1e-12


def _is_integer(x: float, tol: float = TURN_TOL) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


class PiecewiseLinear:
    """Piecewise-linear function given by breakpoints with increasing abscissae."""

    def __init__(self, points: Sequence[Sequence[float]]):
        pts = [(float(a), float(b)) for a, b in points]
        if len(pts) < 2:
            raise GeometryError("a profile needs at least two breakpoints")
        for (a0, _), (a1, _) in zip(pts, pts[1:]):
            if not a1 > a0:
                raise GeometryError("profile abscissae must be strictly increasing")
        self.points = tuple(pts)
        self._xs = [a for a, _ in pts]

    def __call__(self, x: float) -> float:
        xs, pts = self._xs, self.points
        if x <= xs[0]:
            return pts[0][1] if x == xs[0] else 0.0
        if x >= xs[-1]:
            return pts[-1][1] if x == xs[-1] else 0.0
        i = bisect.bisect_right(xs, x) - 1
        (a0, b0), (a1, b1) = pts[i], pts[i + 1]
        return b0 + (b1 - b0) * (x - a0) / (a1 - a0)

    def integral(self) -> float:
        return sum(0.5 * (b0 + b1) * (a1 - a0) for (a0, b0), (a1, b1) in zip(self.points, self.points[1:]))

    @property
    def max_abs(self) -> float:
        return max(abs(b) for _, b in self.points)

    def scaled(self, k: float) -> "PiecewiseLinear":
        return PiecewiseLinear([(a, k * b) for a, b in self.points])


@dataclass
class Motion:
    """Developed polyline of one point under one factor's isotopy.

    ``dev[k]`` is the developed position at time ``taus[k]``; ``frame`` turns
    developed displacements into polygon displacements at ``start``.
    """

    start: Point
    frame: Rot
    taus: list[float]
    dev: list[Point]
    fixed: bool = False

    @property
    def stationary(self) -> bool:
        return len(self.dev) < 2

    @classmethod
    def still(cls, x: Point) -> "Motion":
        return cls(x, ROT_ID, [0.0], [x], True)


def run_motion(model: PolygonModel, mo: Motion) -> PathTrace:
    """Trace a motion through the side pairings."""
    if mo.stationary:
        return PathTrace([mo.start], [])
    pts = [mo.start]
    crossings: list[tuple[int, int]] = []
    p, frame = mo.start, mo.frame
    for k in range(1, len(mo.dev)):
        a, b = mo.dev[k - 1], mo.dev[k]
        d = rot_apply(frame, (b[0] - a[0], b[1] - a[1]))
        res = model.trace(p, d, frame)
        for s in res.sides:
            crossings.append((k - 1, s))
        p, frame = res.end, res.frame
        pts.append(p)
    if mo.fixed:
        pts[-1] = mo.start
    return PathTrace(pts, crossings)


class ElementaryMap:
    """Base class: a one-parameter family ``F^e`` with a canonical isotopy."""

    kind = "map"

    def __init__(self, model: PolygonModel):
        self.model = model

    def motion(self, x: Point, e: float, resolution: int = DEFAULT_RESOLUTION) -> Motion:
        raise NotImplementedError

    def fixes(self, x: Point, e: float) -> bool:
        """Closed-form test that ``F^e(x) = x`` exactly."""
        raise NotImplementedError

    def max_displacement(self, e: float = 1.0) -> float:
        """Bound on the path length of any point under ``F^e``'s isotopy."""
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


# -- annulus twists -------------------------------------------------------------

@dataclass
class _Piece:
    a: Point
    b: Point
    edge: int
    chart_inv: Iso  # polygon coordinates of this copy -> developed plane
    chart: Iso
    near_sides: tuple[int, ...]
    bbox: tuple[float, float, float, float]


@dataclass(frozen=True)
class TubeCoords:
    s: float
    u: float
    y: Point  # developed position
    frame: Rot  # developed -> polygon rotation at the point


class AnnulusTwist(ElementaryMap):
    """Shear in a flat tube around a polyline core.

    ``core`` lists polygon points ``p_0 .. p_{m-1}``; ``via[i]`` lists the
    sides crossed (in order) by the straight edge from ``p_i`` to
    ``p_{i+1}`` (indices mod m).  ``profile`` gives ``h`` at breakpoints in
    ``[-radius, radius]`` with ``h(+-radius) = 0``; with ``units="turns"`` the
    shear at level ``u`` is ``h(u) * L(u)`` (so ``h(0) = 1`` is an exact point
    push), otherwise it is ``h(u)`` in length units.
    """

    kind = "twist"

    def __init__(
        self,
        model: PolygonModel,
        core: Sequence[Sequence[float]],
        via: Sequence[Sequence[int]],
        radius: float,
        profile: Sequence[Sequence[float]] | PiecewiseLinear,
        units: str = "length",
        check_embedding: bool = True,
    ):
        super().__init__(model)
        self.core = tuple((float(x), float(y)) for x, y in core)
        self.via = tuple(tuple(int(j) for j in v) for v in via)
        self.radius = float(radius)
        self.profile = profile if isinstance(profile, PiecewiseLinear) else PiecewiseLinear(profile)
        if units not in ("length", "turns"):
            raise GeometryError("profile units must be 'length' or 'turns'")
        self.units = units
        m = len(self.core)
        if m < 1 or len(self.via) != m:
            raise GeometryError("core needs at least one point and one via list per edge")
        if not self.radius > 0:
            raise GeometryError("tube radius must be positive")
        r = self.radius
        pts = self.profile.points
        if abs(pts[0][0] + r) > 1e-12 or abs(pts[-1][0] - r) > 1e-12:
            raise GeometryError("profile must span [-radius, radius]")
        if pts[0][1] != 0.0 or pts[-1][1] != 0.0:
            raise GeometryError("profile must vanish at +-radius")
        self.m = m
        self._build()
        self._validate(check_embedding)

    # construction ------------------------------------------------------------
    def _build(self) -> None:
        model, m = self.model, self.m
        for p in self.core:
            if not model.contains(p):
                raise GeometryError(f"core point {p} is not inside the polygon")
        charts = [Iso()]
        D = [self.core[0]]
        edge_traces = []
        for i in range(m):
            A = Iso()
            for j in reversed(self.via[i]):
                if not 0 <= j < model.n_sides:
                    raise GeometryError(f"side {j} does not exist")
                A = model.pair_maps[j].inverse().compose(A)
            target = A(self.core[(i + 1) % m])
            Ci = charts[i]
            D.append(Ci.inverse()(target))
            charts.append(A.inverse().compose(Ci))
            p = self.core[i]
            try:
                res = model.trace(p, (target[0] - p[0], target[1] - p[1]))
            except DegenerateError as exc:
                raise GeometryError(f"core edge {i} meets a corner: {exc}") from None
            if tuple(res.sides) != self.via[i]:
                raise GeometryError(
                    f"core edge {i} crosses sides {res.sides}, not the declared via {list(self.via[i])}"
                )
            q = self.core[(i + 1) % m]
            if math.dist(res.end, q) > 1e-9:
                raise GeometryError(f"core edge {i} does not close up at the next core point")
            edge_traces.append(res)
        self.charts = charts[:m]
        self.holonomy = charts[m].inverse()  # developed period map
        T, Ti = self.holonomy, self.holonomy.inverse()
        # developed vertices for indices -1 .. m+1
        dev = [Ti(D[m - 1])] + D + [T(D[1])]
        self._dev = dev
        self.dirs, self.lens, self.normals = [], [], []
        for i in range(-1, m + 1):
            a, b = self.D(i), self.D(i + 1)
            L = math.dist(a, b)
            if L <= 0:
                raise GeometryError("core edges must have positive length")
            d = ((b[0] - a[0]) / L, (b[1] - a[1]) / L)
            self.dirs.append(d)
            self.lens.append(L)
            self.normals.append((-d[1], d[0]))
        self.bends = []
        for v in range(m):
            din, dout = self.dir(v - 1), self.dir(v)
            self.bends.append(math.atan2(din[0] * dout[1] - din[1] * dout[0], din[0] * dout[0] + din[1] * dout[1]))
        self.L0 = sum(self.lens[1 : m + 1])
        r = self.radius
        pieces = []
        for i, res in enumerate(edge_traces):
            for (a, b), iso in zip(res.pieces, res.isos):
                chart = iso.compose(self.charts[i])
                near = tuple(
                    j
                    for j in range(model.n_sides)
                    if _seg_seg_dist(a, b, model.vertices[j], model.vertices[(j + 1) % model.n_sides]) < r
                )
                bbox = (min(a[0], b[0]) - r, min(a[1], b[1]) - r, max(a[0], b[0]) + r, max(a[1], b[1]) + r)
                pieces.append(_Piece(a, b, i, chart.inverse(), chart, near, bbox))
        self.pieces = pieces

    def D(self, i: int) -> Point:
        return self._dev[i + 1]

    def dir(self, i: int) -> Point:
        return self.dirs[i + 1]

    def seg_len(self, i: int) -> float:
        return self.lens[i + 1]

    def normal(self, i: int) -> Point:
        return self.normals[i + 1]

    def bend(self, v: int) -> float:
        return self.bends[v % self.m]

    def _validate(self, check_embedding: bool) -> None:
        model, r = self.model, self.radius
        for v in range(self.m):
            if abs(self.bends[v]) >= 0.9 * math.pi:
                raise GeometryError(f"core bend at vertex {v} is too sharp")
        for i in range(self.m):
            if self._seg_length(i, r) <= 0 or self._seg_length(i, -r) <= 0:
                raise GeometryError(f"tube radius too large for core edge {i}")
        clearance = r + model.corner_exclusion
        for pc in self.pieces:
            for v in model.vertices:
                if seg_point_dist(pc.a, pc.b, v) <= clearance:
                    raise GeometryError("tube comes within the corner exclusion radius of a polygon corner")
        if check_embedding:
            self._check_embedding()

    def _check_embedding(self) -> None:
        r = self.radius
        n_u = 5
        for iu in range(n_u):
            u = r * (2 * (iu + 0.5) / n_u - 1) * 0.98
            L = self.level_length(u)
            n_s = int(min(400, max(24, math.ceil(3 * L / r))))
            for k in range(n_s):
                s = L * (k + 0.37) / n_s
                try:
                    x = self.to_surface(s, u)
                    sols = self.locate_all(x)
                except DegenerateError:
                    raise GeometryError("tube meets a corner") from None
                distinct = []
                for tc in sols:
                    if not any(_same_level_point(tc, o, self.level_length(tc.u)) for o in distinct):
                        distinct.append(tc)
                ok = len(distinct) == 1 and abs(distinct[0].u - u) < 1e-7
                if ok:
                    Lu = self.level_length(u)
                    ds = (distinct[0].s - s) % Lu
                    ok = min(ds, Lu - ds) < 1e-7
                if not ok:
                    raise GeometryError("tube is not embedded at this radius")

    # level curves --------------------------------------------------------------
    def _trim(self, v: int, u: float) -> float:
        th = self.bend(v)
        if u * th > 0:
            return abs(u) * math.tan(abs(th) / 2)
        return 0.0

    def _arc(self, v: int, u: float) -> float:
        th = self.bend(v)
        if u * th < 0:
            return abs(u) * abs(th)
        return 0.0

    def _seg_length(self, i: int, u: float) -> float:
        return self.seg_len(i) - self._trim(i, u) - self._trim(i + 1, u)

    def _features(self, u: float) -> list[tuple[str, int, float, float]]:
        out, s = [], 0.0
        for v in range(self.m):
            a = self._arc(v, u)
            if a > 0:
                out.append(("arc", v, s, a))
                s += a
            sl = self._seg_length(v, u)
            out.append(("seg", v, s, sl))
            s += sl
        return out

    def level_length(self, u: float) -> float:
        return sum(self._arc(v, u) + self._seg_length(v, u) for v in range(self.m))

    def _starts(self, u: float) -> tuple[list[float], list[float]]:
        arc_s, seg_s, s = [], [], 0.0
        for v in range(self.m):
            arc_s.append(s)
            s += self._arc(v, u)
            seg_s.append(s)
            s += self._seg_length(v, u)
        return arc_s, seg_s

    def developed(self, s: float, u: float) -> Point:
        """Developed position of tube coordinates (any real ``s``)."""
        L = self.level_length(u)
        k = math.floor(s / L)
        rem = s - k * L
        p = self._dev_in_period(rem, u)
        if k:
            p = self.holonomy.power(k)(p)
        return p

    def _dev_in_period(self, s: float, u: float) -> Point:
        return self._feature_point(s, u)[2]

    def _feature_point(self, s: float, u: float) -> tuple[str, int, Point, float]:
        """Feature kind, vertex index, developed point and offset along the core."""
        feats = self._features(u)
        for kind, v, s0, length in feats:
            if s <= s0 + length or (kind, v) == feats[-1][:2]:
                t = s - s0
                D = self.D(v)
                if kind == "seg":
                    d, n = self.dir(v), self.normal(v)
                    w = self._trim(v, u) + t
                    return kind, v, (D[0] + d[0] * w + u * n[0], D[1] + d[1] * w + u * n[1]), w
                th = self.bend(v)
                n0 = self.normal(v - 1)
                ang = math.copysign(t / abs(u), th)
                c, sn = math.cos(ang), math.sin(ang)
                wx, wy = u * n0[0], u * n0[1]
                return kind, v, (D[0] + c * wx - sn * wy, D[1] + sn * wx + c * wy), 0.0
        raise AssertionError("unreachable")

    def _tube_coords(self, y: Point, edge: int) -> tuple[float, float] | None:
        """(s, u) of a developed point near developed edge ``edge``."""
        best = None
        for i in (edge - 1, edge, edge + 1):
            a, d, L = self.D(i), self.dir(i), self.seg_len(i)
            px, py = y[0] - a[0], y[1] - a[1]
            lam = px * d[0] + py * d[1]
            lc = min(max(lam, 0.0), L)
            dist = math.hypot(px - lc * d[0], py - lc * d[1])
            if best is None or dist < best[0] - 1e-15:
                best = (dist, i, lam, lc)
        dist, i, lam, lc = best
        if dist >= self.radius:
            return None
        m = self.m
        if 0.0 < lam < self.seg_len(i) or dist == 0.0:
            d = self.dir(i)
            a = self.D(i)
            u = d[0] * (y[1] - a[1]) - d[1] * (y[0] - a[0])
            if abs(u) <= CORE_TOL:
                u = 0.0
            k, v = divmod(i, m)
            _, seg_s = self._starts(u)
            s = seg_s[v] + max(0.0, lam - self._trim(i, u)) + k * self.level_length(u)
            return s, u
        # outer arc region around a vertex
        vi = i if lc == 0.0 else i + 1
        th = self.bend(vi)
        D = self.D(vi)
        w = (y[0] - D[0], y[1] - D[1])
        if th == 0.0:
            d = self.dir(vi)
            u = d[0] * w[1] - d[1] * w[0]
            k, v = divmod(vi, m)
            _, seg_s = self._starts(u)
            return seg_s[v] + k * self.level_length(u), u
        u = -math.copysign(dist, th)
        n0 = self.normal(vi - 1)
        ref = (u * n0[0], u * n0[1])
        ang = abs(math.atan2(ref[0] * w[1] - ref[1] * w[0], ref[0] * w[0] + ref[1] * w[1]))
        ang = min(ang, abs(th))
        k, v = divmod(vi, m)
        arc_s, _ = self._starts(u)
        return arc_s[v] + abs(u) * ang + k * self.level_length(u), u

    # locating polygon points ----------------------------------------------------
    def locate_all(self, x: Point, first: bool = False) -> list[TubeCoords]:
        """All tube coordinate solutions of a polygon point (one if embedded)."""
        model, r = self.model, self.radius
        out: list[TubeCoords] = []
        for pc in self.pieces:
            x0, y0, x1, y1 = pc.bbox
            if x0 <= x[0] <= x1 and y0 <= x[1] <= y1 and seg_point_dist(pc.a, pc.b, x) < r:
                y = pc.chart_inv(x)
                tc = self._tube_coords(y, pc.edge)
                if tc is not None:
                    out.append(TubeCoords(tc[0], tc[1], y, pc.chart.rot))
                    if first:
                        return out
            for j in pc.near_sides:
                nj = model.normals[j]
                cj = model.offsets[j]
                # copies across side j only matter for points close to side j'
                jp = model.partner[j]
                if model.offsets[jp] - (model.normals[jp][0] * x[0] + model.normals[jp][1] * x[1]) >= r:
                    continue
                pm = model.pair_maps[j]
                c = pm.inverse()(x)
                if nj[0] * c[0] + nj[1] * c[1] <= cj:
                    continue
                if seg_point_dist(pc.a, pc.b, c) >= r:
                    continue
                y = pc.chart_inv(c)
                tc = self._tube_coords(y, pc.edge)
                if tc is None:
                    continue
                # confirm by following the straight segment from the core
                foot = _foot(pc.a, pc.b, c)
                try:
                    res = model.trace(foot, (c[0] - foot[0], c[1] - foot[1]))
                except DegenerateError:
                    continue
                if math.dist(res.end, x) > 1e-9:
                    continue
                out.append(TubeCoords(tc[0], tc[1], y, pm.compose(pc.chart).rot))
                if first:
                    return out
        return out

    def locate(self, x: Point) -> TubeCoords | None:
        sols = self.locate_all(x, first=True)
        return sols[0] if sols else None

    def to_surface(self, s: float, u: float) -> Point:
        """Polygon point with tube coordinates (s, u)."""
        kind, v, y, w = self._feature_point(s % self.level_length(u), u)
        C, D, p = self.charts[v], self.D(v), self.core[v]
        if kind == "arc":
            return self.model.trace(p, C.vec((y[0] - D[0], y[1] - D[1])), C.rot).end
        d = self.dir(v)
        res = self.model.trace(p, C.vec((d[0] * w, d[1] * w)), C.rot)
        if u == 0.0:
            return res.end
        n = self.normal(v)
        return self.model.trace(res.end, rot_apply(res.frame, (u * n[0], u * n[1])), res.frame).end

    # flow --------------------------------------------------------------------------
    def shift(self, u: float, e: float) -> float:
        h = self.profile(u)
        if self.units == "turns":
            return e * h * self.level_length(u)
        return e * h

    def _is_fixed(self, tc: TubeCoords, e: float) -> bool:
        h = self.profile(tc.u)
        if h == 0.0 or e == 0:
            return True
        if tc.u != 0.0:
            return False
        turns = e * h if self.units == "turns" else e * h / self.level_length(0.0)
        return _is_integer(turns)

    def fixes(self, x: Point, e: float) -> bool:
        tc = self.locate(x)
        return tc is None or self._is_fixed(tc, e)

    def motion(self, x: Point, e: float, resolution: int = DEFAULT_RESOLUTION) -> Motion:
        tc = self.locate(x)
        if tc is None:
            return Motion.still(x)
        delta = self.shift(tc.u, e)
        if delta == 0.0:
            return Motion.still(x)
        s0, u = tc.s, tc.u
        L = self.level_length(u)
        # breakpoints: feature boundaries and arc subdivisions in every period touched
        marks = []
        for kind, v, fs, length in self._features(u):
            if kind == "arc":
                n = max(1, math.ceil(abs(self.bend(v)) / ARC_STEP))
                marks += [fs + length * q / n for q in range(n)]
            else:
                marks.append(fs)
        lo, hi = min(s0, s0 + delta), max(s0, s0 + delta)
        ss = set()
        k0, k1 = math.floor(lo / L), math.floor(hi / L)
        for k in range(k0, k1 + 1):
            for mk in marks:
                s = mk + k * L
                if lo < s < hi:
                    ss.add(s)
        res = max(1, int(resolution))
        for q in range(1, res):
            ss.add(s0 + delta * q / res)
        pts = sorted(ss, reverse=delta < 0)
        svals = [s0] + pts + [s0 + delta]
        taus = [0.0] + [(s - s0) / delta for s in pts] + [1.0]
        dev = [self.developed(s, u) for s in svals]
        return Motion(x, tc.frame, taus, dev, self._is_fixed(tc, e))

    def max_displacement(self, e: float = 1.0) -> float:
        if self.units == "turns":
            return abs(e) * self.profile.max_abs * max(self.level_length(self.radius), self.level_length(-self.radius), self.L0)
        return abs(e) * self.profile.max_abs

    def describe(self) -> dict:
        return {
            "kind": "twist",
            "core": [list(p) for p in self.core],
            "via": [list(v) for v in self.via],
            "radius": self.radius,
            "profile": [list(p) for p in self.profile.points],
            "profile_units": self.units,
        }

    @property
    def core_trace(self) -> PathTrace:
        """One circuit of the core from ``core[0]`` (closed loop)."""
        pts, cr = [self.core[0]], []
        for i in range(self.m):
            p = self.core[i]
            q = self.core[(i + 1) % self.m]
            A = Iso()
            for j in reversed(self.via[i]):
                A = self.model.pair_maps[j].inverse().compose(A)
            t = A(q)
            res = self.model.trace(p, (t[0] - p[0], t[1] - p[1]))
            cr += [(i, s) for s in res.sides]
            pts.append(q)
        return PathTrace(pts, cr)


def _foot(a: Point, b: Point, p: Point) -> Point:
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2))
    return (a[0] + t * dx, a[1] + t * dy)


def _seg_seg_dist(a: Point, b: Point, c: Point, d: Point) -> float:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return 0.0
    return min(seg_point_dist(a, b, c), seg_point_dist(a, b, d), seg_point_dist(c, d, a), seg_point_dist(c, d, b))


def _same_level_point(t1: TubeCoords, t2: TubeCoords, L: float) -> bool:
    if abs(t1.u - t2.u) > 1e-7:
        return False
    ds = (t1.s - t2.s) % L
    return min(ds, L - ds) < 1e-7


# -- disk maps and translations ----------------------------------------------------

class DiskMap(ElementaryMap):
    """Rotation by ``e * theta(rho)`` about ``center``; ``theta(radius) = 0``.

    A scalar ``angle`` means a rigid rotation by that angle on the inner half
    of the disk, tapering linearly to zero at the rim.
    """

    kind = "disk"

    def __init__(self, model: PolygonModel, center: Sequence[float], radius: float, angle):
        super().__init__(model)
        self.center = (float(center[0]), float(center[1]))
        self.radius = float(radius)
        R = self.radius
        if not R > 0:
            raise GeometryError("disk radius must be positive")
        if isinstance(angle, (int, float)):
            self.profile = PiecewiseLinear([(0.0, float(angle)), (R / 2, float(angle)), (R, 0.0)])
        else:
            self.profile = angle if isinstance(angle, PiecewiseLinear) else PiecewiseLinear(angle)
        pts = self.profile.points
        if pts[0][0] != 0.0 or abs(pts[-1][0] - R) > 1e-12 or pts[-1][1] != 0.0:
            raise GeometryError("disk angle profile must run over [0, radius] and vanish at the rim")
        if model.boundary_distance(self.center) <= R:
            raise GeometryError("disk must lie inside the polygon interior")
        if not model.is_torus and model.corner_distance(self.center) <= R + model.corner_exclusion:
            raise GeometryError("disk meets a corner exclusion disk")

    def _angle(self, x: Point, e: float) -> float:
        rho = math.dist(x, self.center)
        if rho >= self.radius:
            return 0.0
        return e * self.profile(rho)

    def fixes(self, x: Point, e: float) -> bool:
        th = self._angle(x, e)
        return th == 0.0 or x == self.center or _is_integer(th / (2 * math.pi))

    def motion(self, x: Point, e: float, resolution: int = DEFAULT_RESOLUTION) -> Motion:
        th = self._angle(x, e)
        if th == 0.0 or x == self.center:
            return Motion.still(x)
        n = max(int(resolution), math.ceil(abs(th) / ARC_STEP))
        cx, cy = self.center
        wx, wy = x[0] - cx, x[1] - cy
        taus, dev = [], []
        for q in range(n + 1):
            t = q / n
            c, s = math.cos(t * th), math.sin(t * th)
            taus.append(t)
            dev.append((cx + c * wx - s * wy, cy + s * wx + c * wy))
        return Motion(x, ROT_ID, taus, dev, _is_integer(th / (2 * math.pi)))

    def max_displacement(self, e: float = 1.0) -> float:
        return abs(e) * max(abs(t) * rho for rho, t in self.profile.points)

    def describe(self) -> dict:
        return {
            "kind": "disk",
            "center": list(self.center),
            "radius": self.radius,
            "angle": [list(p) for p in self.profile.points],
        }


class Translation(ElementaryMap):
    """Translation of the torus by ``e * vector`` (straight-line isotopy)."""

    kind = "translate"

    def __init__(self, model: PolygonModel, vector: Sequence[float]):
        super().__init__(model)
        if not model.is_torus:
            raise GeometryError("translations are only defined on the torus")
        self.vector = (float(vector[0]), float(vector[1]))

    def fixes(self, x: Point, e: float) -> bool:
        return _is_integer(e * self.vector[0], 0.0) and _is_integer(e * self.vector[1], 0.0)

    def motion(self, x: Point, e: float, resolution: int = DEFAULT_RESOLUTION) -> Motion:
        vx, vy = e * self.vector[0], e * self.vector[1]
        if vx == 0.0 and vy == 0.0:
            return Motion.still(x)
        n = max(1, int(resolution))
        taus = [q / n for q in range(n + 1)]
        dev = [(x[0] + t * vx, x[1] + t * vy) for t in taus]
        return Motion(x, ROT_ID, taus, dev, self.fixes(x, e))

    def max_displacement(self, e: float = 1.0) -> float:
        return abs(e) * math.hypot(*self.vector)

    def describe(self) -> dict:
        return {"kind": "translate", "vector": list(self.vector)}


# -- homeomorphisms -------------------------------------------------------------

@dataclass
class IsotopyTrace:
    """Per-factor traces of one point, in time order."""

    pieces: list[PathTrace] = field(default_factory=list)

    @property
    def combined(self) -> PathTrace:
        out = PathTrace()
        for p in self.pieces:
            out = out.then(p)
        return out

    @property
    def end(self) -> Point:
        return self.pieces[-1].points[-1]


@dataclass(frozen=True)
class Homeo:
    """A composition ``F_1^{e_1} o F_2^{e_2} o ... o F_k^{e_k}``."""

    model: PolygonModel
    factors: tuple[tuple[ElementaryMap, int], ...] = ()
    name: str = ""

    @classmethod
    def identity(cls, model: PolygonModel) -> "Homeo":
        return cls(model, (), "id")

    @classmethod
    def of(cls, m: ElementaryMap, e: int = 1, name: str = "") -> "Homeo":
        return cls(m.model, ((m, int(e)),), name)

    def __matmul__(self, other: "Homeo") -> "Homeo":
        return compose(self, other)

    def steps(self):
        """Factors in the order they act."""
        return reversed(self.factors)

    def apply(self, x: Point, resolution: int = DEFAULT_RESOLUTION) -> Point:
        return apply(self, x, resolution)

    def max_displacement(self) -> float:
        return sum(m.max_displacement(e) for m, e in self.factors)

    def describe(self) -> list:
        return [dict(m.describe(), exponent=e) for m, e in self.factors]


def compose(f: Homeo, g: Homeo) -> Homeo:
    """``f o g`` (g acts first)."""
    if f.model is not g.model:
        raise GeometryError("maps live on different surfaces")
    name = f"({f.name})*({g.name})" if f.name or g.name else ""
    return Homeo(f.model, f.factors + g.factors, name)


def inverse(f: Homeo) -> Homeo:
    return Homeo(f.model, tuple((m, -e) for m, e in reversed(f.factors)), f"inv({f.name})" if f.name else "")


def power(f: Homeo, k: int) -> Homeo:
    k = int(k)
    base = f if k >= 0 else inverse(f)
    return Homeo(f.model, base.factors * abs(k), f"pow({f.name},{k})" if f.name else "")


def step(m: ElementaryMap, e: int, x: Point, resolution: int = DEFAULT_RESOLUTION) -> tuple[Point, PathTrace]:
    mo = m.motion(x, e, resolution)
    t = run_motion(m.model, mo)
    return t.points[-1], t


def apply(f: Homeo, x: Point, resolution: int = DEFAULT_RESOLUTION) -> Point:
    """Image of a polygon point (the end of the traced isotopy)."""
    f.model.check_interior(x)
    for m, e in f.steps():
        x, _ = step(m, e, x, resolution)
    return x


def trajectory(f: Homeo, x: Point, resolution: int = DEFAULT_RESOLUTION) -> IsotopyTrace:
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    f.model.check_interior(x)
    out = IsotopyTrace()
    for m, e in f.steps():
        x, t = step(m, e, x, resolution)
        out.pieces.append(t)
    if not out.pieces:
        out.pieces.append(PathTrace([x], []))
    return out


def fixes(f: Homeo, x: Point) -> bool:
    """Exact fixed-point test by factor arithmetic: every factor must fix the
    point it receives, with the point carried forward exactly."""
    for m, e in f.steps():
        if not m.fixes(x, e):
            return False
    return True


def d0_distance(f: Homeo, g: Homeo, grid: int = 16) -> float:
    """Grid lower bound for ``sup_x d(f(x), g(x))`` (``grid x grid`` cells)."""
    best = 0.0
    for x in f.model.grid(grid):
        try:
            best = max(best, f.model.distance(apply(f, x), apply(g, x)))
        except DegenerateError:
            continue
    return best


@dataclass
class MeasureReport:
    mu_ball: float
    fraction: float
    std_error: float
    samples: int
    rejected: int
    center: Point
    radius: float

    @property
    def ok(self) -> bool:
        return abs(self.fraction - self.mu_ball) <= 3 * self.std_error

    def as_dict(self) -> dict:
        return {
            "mu_ball": self.mu_ball,
            "fraction": self.fraction,
            "std_error": self.std_error,
            "samples": self.samples,
            "rejected": self.rejected,
            "center": list(self.center),
            "radius": self.radius,
            "pass": self.ok,
        }


def measure_check(f: Homeo, trials: int, seed: int = 0, radius: float | None = None) -> MeasureReport:
    """Monte Carlo check of ``mu(f(B)) = mu(B)`` for a random disk ``B``.

    ``x`` lies in ``f(B)`` iff ``f^-1(x)`` lies in ``B``, so the fraction of
    uniform samples whose preimage falls in ``B`` estimates ``mu(f(B))``.
    """
    model = f.model
    rng = chunk_rng(seed, 0, stream=7)
    rad = radius if radius is not None else 0.15 * model.circumradius
    c = model.sample_point(rng, margin=rad + (0 if model.is_torus else model.corner_exclusion))
    while not model.is_torus and model.corner_distance(c) <= rad + model.corner_exclusion:
        c = model.sample_point(rng, margin=rad)
    mu = math.pi * rad * rad / model.area
    finv = inverse(f)
    hits = n = rej = 0
    while n < trials:
        x = model.sample_point(rng)
        try:
            y = apply(finv, x)
        except DegenerateError:
            rej += 1
            continue
        n += 1
        hits += math.dist(y, c) < rad
    se = math.sqrt(mu * (1 - mu) / n)
    return MeasureReport(mu, hits / n, se, n, rej, c, rad)


def recurrence_probe(f: Homeo, k_max: int, grid: int = 8) -> tuple[int, float]:
    """``argmin_{1<=k<=k_max} d0(f^k, id)`` on a grid (first minimum wins)."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    pts = f.model.grid(grid)
    cur = list(pts)
    alive = [True] * len(pts)
    best_k, best_d = 1, math.inf
    for k in range(1, k_max + 1):
        dk = 0.0
        for i, x in enumerate(cur):
            if not alive[i]:
                continue
            try:
                cur[i] = apply(f, x)
            except DegenerateError:
                alive[i] = False
                continue
            dk = max(dk, f.model.distance(cur[i], pts[i]))
        if dk < best_d:
            best_k, best_d = k, dk
    return best_k, best_d


# -- random maps -------------------------------------------------------------------

def tent(radius: float, peak: float, at: float = 0.0) -> PiecewiseLinear:
    return PiecewiseLinear([(-radius, 0.0), (at, peak), (radius, 0.0)])


def random_twist(
    model: PolygonModel,
    rng: np.random.Generator,
    max_shift: float = 1.0,
    radius: float | None = None,
    tries: int = 200,
) -> AnnulusTwist:
    """Single-vertex twist through a random side with a random tent profile."""
    for _ in range(tries):
        j = int(rng.integers(model.n_sides))
        r = radius if radius is not None else float(rng.uniform(0.02, 0.08)) * (2 * model.circumradius)
        p = model.sample_point(rng, margin=r)
        peak = float(rng.uniform(-max_shift, max_shift))
        at = float(rng.uniform(-0.5, 0.5)) * r
        try:
            return AnnulusTwist(model, [p], [[j]], r, tent(r, peak, at))
        except (GeometryError, DegenerateError):
            continue
    raise GeometryError("could not place a random twist")


def random_disk(model: PolygonModel, rng: np.random.Generator, max_angle: float = 2 * math.pi) -> DiskMap:
    for _ in range(1000):
        R = float(rng.uniform(0.05, 0.3)) * model.circumradius
        c = model.sample_point(rng, margin=R)
        try:
            return DiskMap(model, c, R, float(rng.uniform(-max_angle, max_angle)))
        except GeometryError:
            continue
    raise GeometryError("could not place a random disk")


def random_homeo(
    model: PolygonModel,
    rng: np.random.Generator,
    pool: Sequence[ElementaryMap],
    n_factors: int = 3,
    max_exp: int = 2,
) -> Homeo:
    """Random composition of maps drawn from ``pool`` with nonzero exponents."""
    factors = []
    for _ in range(n_factors):
        m = pool[int(rng.integers(len(pool)))]
        e = int(rng.integers(1, max_exp + 1)) * (1 if rng.random() < 0.5 else -1)
        factors.append((m, e))
    return Homeo(model, tuple(factors))


def random_pool(model: PolygonModel, seed: int, n_twists: int = 6, n_disks: int = 3, max_shift: float = 1.0) -> list[ElementaryMap]:
    rng = chunk_rng(seed, 0, stream=11)
    pool: list[ElementaryMap] = [random_twist(model, rng, max_shift) for _ in range(n_twists)]
    pool += [random_disk(model, rng) for _ in range(n_disks)]
    if model.is_torus:
        pool.append(Translation(model, (float(rng.uniform(-0.7, 0.7)), float(rng.uniform(-0.7, 0.7)))))
    return pool


@dataclass(frozen=True)
class HomeoSampler:
    """Picklable ``rng -> Homeo`` sampler over a fixed pool of maps."""

    model: PolygonModel
    pool: tuple
    n_factors: int = 3
    max_exp: int = 2

    def __call__(self, rng: np.random.Generator) -> Homeo:
        return random_homeo(self.model, rng, self.pool, self.n_factors, self.max_exp)
