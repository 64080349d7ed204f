"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""

import cmath
import io
import itertools
import math
import time
from contextlib import redirect_stdout

import numpy as np

from conftest import record
from ggqm import cli
from ggqm.cocycle import Basepoint, TorusBraid, cocycle_check, format_gamma, gamma, sample_config
from ggqm.dynamics import DiskMap, Homeo, HomeoSampler, power, random_homeo, random_pool, random_twist
from ggqm.gg import certify_undistorted, gamma_at_basepoint, phi_of, psi_mc, psi_z, semibound_scan, smallness_check
from ggqm.qm import BrooksPattern, QuasimorphismSpec, defect_estimate, normal_vanishing_check
from ggqm.sampling import random_word
from ggqm.scene import load_scene
from ggqm.surface import DegenerateError, genus_surface
from ggqm.words import EMPTY, Presentation, Word, equal_in_group, format_word, parse_word, power as wpower

PUSH_SCENES = ["genus2_push_a1", "genus2_push_a2", "genus2_push_a1b1", "genus2_push_a1a2", "torus_push"]


# 1 ---------------------------------------------------------------------------------

def _cocycle_run(model, bp, trials, seed, scenes):
    # random twists and disks plus the bundled point pushes, so that long
    # crossing words occur
    extra = [m for name in scenes for h in load_scene(name).maps.values() for m, _ in h.factors]
    pool = tuple(random_pool(model, seed)) + tuple(extra)
    rng = np.random.default_rng([seed, 99])
    ok = fail = degen = nontrivial = 0
    while ok + fail + degen < trials:
        f = random_homeo(model, rng, pool)
        g = random_homeo(model, rng, pool)
        x = sample_config(model, rng, bp)
        try:
            res = cocycle_check(f, g, x, bp)
        except DegenerateError:
            degen += 1
            continue
        if res.ok:
            ok += 1
        else:
            fail += 1
        nontrivial += format_gamma(res.lhs, model) not in ("e", "(0,0)", "(0,0|e)")
    return ok, fail, degen, nontrivial


def test_criterion_1_cocycle_identity():
    t0 = time.perf_counter()
    cases = {
        "torus n=1": ("torus_push", ["torus_push"]),
        "torus n=2": ("torus_n2", ["torus_push", "torus_n2"]),
        "genus2 n=1": ("genus2_push_a1", [n for n in PUSH_SCENES if n.startswith("genus2")]),
    }
    details, good = [], True
    for i, (name, (base, scenes)) in enumerate(cases.items()):
        sc = load_scene(base)
        ok, fail, degen, nontriv = _cocycle_run(sc.model, sc.basepoint, 1000, 100 + i, scenes)
        good &= fail == 0 and degen / 1000 < 0.01
        details.append(f"{name}: {ok} exact ({nontriv} nontrivial), {fail} failed, {degen} degenerate")
    elapsed = time.perf_counter() - t0
    good &= elapsed < 120
    record(1, "cocycle identity", good, "; ".join(details) + f"; {elapsed:.1f}s")
    assert good


# 2 ---------------------------------------------------------------------------------

def test_criterion_2_fixed_point_linearity():
    bad = []
    for name in PUSH_SCENES:
        s = load_scene(name)
        f, phi, bp = s.map(), s.phi, s.basepoint
        g1 = gamma_at_basepoint(f, bp)
        v1 = psi_z(f, phi, bp)
        for k in range(1, 21):
            fk = power(f, k)
            if psi_z(fk, phi, bp) != k * v1:
                bad.append((name, k))
            gk = gamma_at_basepoint(fk, bp)
            if isinstance(g1, Word) and not equal_in_group(gk, wpower(g1, k), s.model.presentation):
                bad.append((name, k, "word"))
    record(2, "fixed-point linearity", not bad, f"{len(PUSH_SCENES)} scenes, k = 1..20, {len(bad)} mismatches")
    assert not bad


# 3 ---------------------------------------------------------------------------------

def _crossing_count_oracle(z):
    """Independent count: regular octagon built from complex numbers, the
    copy of z across side 2, and direct segment/side intersection."""
    N = 8
    V = [cmath.exp(1j * (-math.pi / 2 - math.pi / N + 2 * math.pi * j / N)) for j in range(N)]
    # side 2 is glued to side 0 reversing orientation: V2 -> V1, V3 -> V0
    rot = (V[0] - V[1]) / (V[3] - V[2])
    M = lambda p: V[1] + rot * (p - V[2])  # noqa: E731
    Minv = lambda p: V[2] + (p - V[1]) / rot  # noqa: E731
    zc = complex(*z)
    zd = Minv(zc)
    assert abs(M(zd) - zc) < 1e-12

    def cross(a, b, c, d):
        def orient(p, q, r):
            return ((q - p).conjugate() * (r - p)).imag

        return orient(a, b, c) * orient(a, b, d) < 0 and orient(c, d, a) * orient(c, d, b) < 0

    hits = [j for j in range(N) if cross(zc, zd, V[j], V[(j + 1) % N])]
    # side 4k+2 carries a_{k+1}; the retract sends a1 -> x1, so Brooks_x1 counts 1
    letters = {2: +1, 0: -1}
    return sum(letters.get(j, 0) for j in hits), hits


def test_criterion_3_certificate():
    s = load_scene("genus2_push_a1")
    oracle, hits = _crossing_count_oracle(s.basepoint.z[0])
    cert = certify_undistorted(s.map(), s.phi, s.basepoint)
    ok = oracle == 1 and hits == [2] and cert.phi_value == 1.0 and cert.verdict == "undistorted" and cert.gamma == "a1"
    record(3, "undistortedness certificate", ok, f"gamma = {cert.gamma}, phi = {cert.phi_value}, oracle = {oracle}, verdict {cert.verdict}")
    assert ok


# 4 ---------------------------------------------------------------------------------

def test_criterion_4_semibound():
    details, ok = [], True
    for name, grid in (("genus2_push_a1", 16), ("genus2_push_a1a2", 16), ("torus_n2", 8)):
        s = load_scene(name)
        sampler = HomeoSampler(s.model, tuple(random_pool(s.model, 7)))
        rep = semibound_scan(s.map(), s.phi, s.basepoint, sampler, mode="z", trials=1000, seed=7, grid=grid)
        ok &= rep.ok and rep.g_samples == 1000
        details.append(f"{name}: max {rep.max_delta:g} <= {rep.bound:g}")
    record(4, "semi-boundedness", ok, "; ".join(details))
    assert ok


# 5 ---------------------------------------------------------------------------------

def _free_words(max_len):
    for n in range(1, max_len + 1):
        for w in itertools.product((1, -1, 2, -2), repeat=n):
            if all(w[i] != -w[i + 1] for i in range(n - 1)):
                yield Word(w)


def test_criterion_5_torus_remark():
    patterns = list(_free_words(4))
    comm = parse_word("x1 x2 X1 X2")
    vanish = all(
        QuasimorphismSpec.brooks(format_word(p), symmetrized=True)(wpower(comm, k)) == 0.0
        for p in patterns
        for k in range(-10, 11)
    )
    t0 = time.perf_counter()
    found = None
    elements = list(_free_words(6))
    for p in patterns:
        spec = QuasimorphismSpec.brooks(format_word(p), symmetrized=True)
        for g in elements:
            if spec(g) != 0.0:
                found = (format_word(p), format_word(g), spec(g))
                break
        if found:
            break
    search_s = time.perf_counter() - t0
    phi = load_scene("torus_n2").phi
    rng = np.random.default_rng(5)
    pairs = [
        (
            TorusBraid(tuple(int(v) for v in rng.integers(-9, 10, 2)), random_word(rng, 2, int(rng.integers(0, 13)))),
            TorusBraid(tuple(int(v) for v in rng.integers(-9, 10, 2)), EMPTY),
        )
        for _ in range(1000)
    ]
    central = normal_vanishing_check(phi, pairs)
    ok = vanish and found is not None and search_s < 60 and central.ok and central.checked == 1000
    record(
        5,
        "torus remark",
        ok,
        f"commutator powers vanish: {vanish}; nonzero pair {found} in {search_s:.1f}s; central invariance {central.checked - len(central.violations)}/1000",
    )
    assert ok


# 6 ---------------------------------------------------------------------------------

def test_criterion_6_point_push_psi():
    s = load_scene("genus2_push_a1")
    f, phi, bp, model = s.map(), s.phi, s.basepoint, s.model
    tw = f.factors[0][0]
    r = tw.radius
    # tent profile in turns: shift(u) = (1 - |u|/r) L(u) with L(u) = L0 + (pi/2) u
    # on the outer side and L0 - 2|u| on the inner side of the pi/2 bend
    L0 = math.dist(bp.z[0], model.pair_maps[2].inverse()(bp.z[0]))
    phi_loop = phi(parse_word("a1", model.presentation))
    exact = phi_loop * (L0 * r + (math.pi / 2 - 2) * r * r / 6) / model.area
    t0 = time.perf_counter()
    est = psi_mc(f, phi, bp, 100_000, seed=0)
    elapsed = time.perf_counter() - t0
    z = abs(est.mean - exact) / est.std_error
    # second route: midpoint quadrature on a fine grid (points off the tube
    # never move, so their gamma is trivial)
    n = 300
    x0, y0, x1, y1 = model.bbox
    cell = (x1 - x0) * (y1 - y0) / (n * n)
    quad = 0.0
    for x in model.grid(n):
        if tw.locate(x) is not None:
            quad += phi_of(phi, gamma(f, x, bp))
    quad *= cell / model.area
    ok = z <= 3 and elapsed < 60 and abs(quad - exact) < 0.01 * exact and est.rejected == 0
    record(
        6,
        "point-push Psi",
        ok,
        f"MC {est.mean:.5f} +- {est.std_error:.5f}, closed form {exact:.5f} ({z:.2f} SE), quadrature {quad:.5f}, {elapsed:.1f}s",
    )
    assert ok


# 7 ---------------------------------------------------------------------------------

def test_criterion_7_smallness():
    model = genus_surface(2)
    bp = Basepoint(1, ((0.013, -0.021),))
    # Brooks x1 + Brooks x2 after the retract: nonzero on short loops through
    # the a-sides, so the bound is tested with equality possible
    phi = QuasimorphismSpec(
        Presentation.free(2), (BrooksPattern(Word((1,))), BrooksPattern(Word((2,)))), pre_map="handlebody_retract"
    )
    defect = defect_estimate(phi, 10000, seed=0).max_observed
    rng = np.random.default_rng(77)
    thr = model.systole_threshold(1)
    reps = []
    while len(reps) < 10:
        tw = random_twist(model, rng, max_shift=0.95 * thr)
        if tw.max_displacement() >= thr:
            continue
        reps.append(smallness_check(tw, phi, bp, grid=24, family_samples=5000, defect=defect, seed=len(reps)))
    disk = Homeo.of(DiskMap(model, (0.1, 0.2), 0.3, 5.0))
    dpsi = psi_mc(disk, phi, bp, 2000, seed=1)
    passed = sum(r.ok for r in reps)
    ok = passed == 10 and dpsi.mean == 0.0
    nontrivial = sum(r.grid_max > 0 for r in reps)
    record(
        7,
        "C0-smallness boundedness",
        ok,
        f"{passed}/10 twists pass, {nontrivial} with nonzero grid max, D = {defect:g}; DiskMap Psi = {dpsi.mean}",
    )
    assert ok


# 8 ---------------------------------------------------------------------------------

def test_criterion_8_homogenization_rate():
    rows, ok = [], True
    for pat in ("x1 x2", "x1 x1 x2", "x1 x2 X1 X2"):
        spec = QuasimorphismSpec.brooks(pat)
        D = defect_estimate(spec, 20000, seed=0, homogeneous=False).max_observed
        rng = np.random.default_rng(8)
        bad = 0
        for _ in range(100):
            g = random_word(rng, 2, int(rng.integers(1, 13)))
            for N in (8, 16, 32, 64):
                if abs(spec.raw(wpower(g, N)) / N - spec(g)) > D / N + 1e-12:
                    bad += 1
        ok &= bad == 0
        rows.append(f"{pat}: D = {D:g}, {400 - bad}/400")
    record(8, "homogenization rate", ok, "; ".join(rows))
    assert ok


# 9 ---------------------------------------------------------------------------------

DETERMINISM_RUNS = [
    ["gamma", "torus_n2"],
    ["eval-qm", "genus2_push_a1a2", "--word", "a1 a2 B1", "--samples", "2500"],
    ["psi", "genus2_push_a1", "--samples", "2500"],
    ["psi-bar", "torus_push", "--samples", "1500", "--k-max", "3"],
    ["psi-z", "genus2_push_a1b1", "--k-max", "4"],
    ["check-cocycle", "torus_n2", "--samples", "250"],
    ["check-semibound", "genus2_push_a1", "--samples", "250", "--grid", "4"],
    ["norm-est", "torus_push", "--samples", "40"],
    ["certify", "genus2_push_a2"],
    ["recurrence", "torus_push", "--k-max", "3", "--grid", "5"],
    ["selftest", "torus_push"],
]


def _run_cli(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(argv)
    return code, buf.getvalue().encode()


def test_criterion_9_determinism():
    same = 0
    mismatched = []
    for argv in DETERMINISM_RUNS:
        outs = [_run_cli(argv + ["--seed", "3", "--workers", w]) for w in ("1", "2")]
        outs.append(_run_cli(argv + ["--seed", "3", "--workers", "1"]))
        if outs[0] == outs[1] == outs[2] and outs[0][0] == 0:
            same += 1
        else:
            mismatched.append(argv[0])
    ok = same == len(DETERMINISM_RUNS)
    record(9, "determinism", ok, f"{same}/{len(DETERMINISM_RUNS)} subcommands byte-identical across 1 and 2 workers; mismatched {mismatched}")
    assert ok
