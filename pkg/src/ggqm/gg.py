"""Gambaudo-Ghys quantities: Psi, its homogenization, Psi_z, semi-bound
scans, the |f|_psi pseudo-norm estimator, growth and distortion certificates.

All sup-type quantities (B_f, D_phi, |f|_psi, d_0) are monotone lower-bound
estimators over declared sample families; inequalities are checked in the
direction in which such estimators are sound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .cocycle import (
    Basepoint,
    TorusClass,
    apply_config,
    format_gamma,
    gamma,
    sample_config,
)
from .dynamics import AnnulusTwist, Homeo, compose, fixes, power
from .qm import QuasimorphismSpec, defect_estimate
from .sampling import chunk_rng, chunk_sizes, run_chunks
from .surface import DegenerateError, PolygonModel, rot_apply, sides_to_word, torus_class
from .words import Word

REJECTION_WARN = 0.01


def phi_of(phi: QuasimorphismSpec, v) -> float:
    return float(phi(v))


# -- Psi -----------------------------------------------------------------------

@dataclass
class PsiEstimate:
    mean: float
    std_error: float
    samples: int
    rejected: int
    seed: int
    warning: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _psi_chunk(f: Homeo, phi, bp: Basepoint, seed: int, chunk: int, n: int, stream: int):
    rng = chunk_rng(seed, chunk, stream)
    model = f.model
    vals, rej = [], 0
    while len(vals) < n:
        x = sample_config(model, rng, bp)
        try:
            vals.append(phi_of(phi, gamma(f, x, bp)))
        except DegenerateError:
            rej += 1
    return vals, rej


def _summarize(vals: Sequence[float]) -> tuple[float, float]:
    n = len(vals)
    mean = math.fsum(vals) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var / n)


def psi_mc(
    f: Homeo,
    phi: QuasimorphismSpec,
    bp: Basepoint,
    samples: int,
    seed: int = 0,
    workers: int = 1,
    stream: int = 1,
) -> PsiEstimate:
    """Monte Carlo estimate of ``Psi(f) = int phi(gamma(f, x)) dx``.

    Degenerate samples (corner, boundary or collision events) are redrawn and
    counted.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    bp.validate(f.model)
    args = [(f, phi, bp, seed, c, n, stream) for c, n in enumerate(chunk_sizes(samples))]
    vals: list[float] = []
    rej = 0
    for v, r in run_chunks(_psi_chunk, args, workers):
        vals += v
        rej += r
    mean, se = _summarize(vals)
    warn = None
    if rej > REJECTION_WARN * (rej + samples):
        warn = f"rejection rate {rej / (rej + samples):.3%} exceeds 1%"
        warnings.warn(warn, RuntimeWarning, stacklevel=2)
    return PsiEstimate(mean, se, samples, rej, seed, warn)


@dataclass
class PsiBarReport:
    ks: list[int]
    values: list[float]  # Psi(f^k) / k
    std_errors: list[float]
    spread: float  # max - min over the second half of the sequence
    samples: int
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)


def psi_bar(
    f: Homeo,
    phi: QuasimorphismSpec,
    bp: Basepoint,
    k_max: int = 16,
    samples: int = 2000,
    seed: int = 0,
    workers: int = 1,
) -> PsiBarReport:
    """``Psi(f^k)/k`` for k = 1..k_max with common random numbers."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    ks, vals, ses = [], [], []
    for k in range(1, k_max + 1):
        est = psi_mc(power(f, k), phi, bp, samples, seed, workers)
        ks.append(k)
        vals.append(est.mean / k)
        ses.append(est.std_error / k)
    tail = vals[len(vals) // 2 :]
    return PsiBarReport(ks, vals, ses, max(tail) - min(tail), samples, seed)


# -- Psi_z -----------------------------------------------------------------------

def psi_z(f: Homeo, phi: QuasimorphismSpec, bp: Basepoint) -> float:
    """``Psi_z(f) = phi(gamma(f, z))``; degeneracies raise (z is pinned)."""
    z = bp.z[0] if bp.n == 1 else bp.z
    return phi_of(phi, gamma(f, z, bp))


def gamma_at_basepoint(f: Homeo, bp: Basepoint):
    z = bp.z[0] if bp.n == 1 else bp.z
    return gamma(f, z, bp)


@dataclass
class GrowthReport:
    ks: list[int]
    values: list[float]  # |Psi_z(f^k)| / k
    limsup_proxy: float

    def as_dict(self) -> dict:
        return asdict(self)


def growth_estimate(f: Homeo, phi: QuasimorphismSpec, bp: Basepoint, k_max: int = 16) -> GrowthReport:
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    ks = list(range(1, k_max + 1))
    vals = [abs(psi_z(power(f, k), phi, bp)) / k for k in ks]
    return GrowthReport(ks, vals, max(vals[len(vals) // 2 :]))


@dataclass
class DistortionCertificate:
    f: list
    z: list
    gamma: str | None
    phi_value: float | None
    fixed: bool
    verdict: str
    reason: str

    def as_dict(self) -> dict:
        return asdict(self)


def certify_undistorted(f: Homeo, phi: QuasimorphismSpec, bp: Basepoint) -> DistortionCertificate:
    """Undistorted if ``f(z) = z`` exactly and ``phi(gamma(f, z)) > 0``."""
    if bp.n != 1:
        z = [list(p) for p in bp.z]
        fixed = all(fixes(f, p) for p in bp.z)
    else:
        z = list(bp.z[0])
        fixed = fixes(f, bp.z[0])
    desc = f.describe()
    if not fixed:
        return DistortionCertificate(desc, z, None, None, False, "inconclusive", "z is not an exact fixed point of f")
    try:
        g = gamma_at_basepoint(f, bp)
    except DegenerateError as exc:
        return DistortionCertificate(desc, z, None, None, True, "inconclusive", f"degenerate trace at z: {exc}")
    val = phi_of(phi, g)
    word = format_gamma(g, f.model)
    if val > 0:
        return DistortionCertificate(desc, z, word, val, True, "undistorted", "f(z) = z and phi(gamma(f, z)) > 0")
    return DistortionCertificate(desc, z, word, val, True, "inconclusive", "phi(gamma(f, z)) <= 0")


# -- semi-boundedness ---------------------------------------------------------------

@dataclass
class SemiBoundReport:
    f: list
    mode: str
    max_delta: float
    bound: float
    B_f: float
    B_f_grid: float
    D_phi: float
    D_phi_sampled: float
    g_samples: int
    rejected: int
    grid: int

    @property
    def ok(self) -> bool:
        return self.max_delta <= self.bound + 1e-9

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.ok
        return d


def grid_max_abs(f: Homeo, phi: QuasimorphismSpec, bp: Basepoint, density: int) -> float:
    """``max |phi(gamma(f, x))|`` over a ``density x density`` grid (n = 1), or
    over pairs of grid points of a ``density x density`` grid (n = 2)."""
    model = f.model
    pts = model.grid(density)
    best = 0.0
    if bp.n == 1:
        configs = pts
    else:
        configs = [(a, b) for i, a in enumerate(pts) for b in pts[i + 1 :: max(1, len(pts) // density)]]
    for x in configs:
        try:
            best = max(best, abs(phi_of(phi, gamma(f, x, bp))))
        except DegenerateError:
            continue
    return best


def _semibound_chunk(f, phi, bp, sampler, mode, seed, chunk, n, x_samples):
    rng = chunk_rng(seed, chunk, stream=3)
    model = f.model
    out = []  # (delta, |phi(gamma(f, .))| at visited points, local defect)
    rej = 0
    pf_z = psi_z(f, phi, bp) if mode == "z" else None
    while len(out) < n:
        g = sampler(rng)
        fg = compose(f, g)
        try:
            if mode == "z":
                z = bp.z[0] if bp.n == 1 else bp.z
                gz = apply_config(g, z, bp)
                a = gamma(f, gz, bp)
                b = gamma(g, z, bp)
                pa, pb = phi_of(phi, a), phi_of(phi, b)
                pfg = phi_of(phi, gamma(fg, z, bp))
                delta = abs(pb - pfg + pf_z)
                out.append((delta, max(abs(pa), abs(pf_z)), abs(pfg - pa - pb)))
            else:
                xs = [sample_config(model, rng, bp) for _ in range(x_samples)]
                tot, bmax, dmax = [], 0.0, 0.0
                for x in xs:
                    gx = apply_config(g, x, bp)
                    a = gamma(f, gx, bp)
                    b = gamma(g, x, bp)
                    pa, pb = phi_of(phi, a), phi_of(phi, b)
                    pfx = phi_of(phi, gamma(f, x, bp))
                    pfg = phi_of(phi, gamma(fg, x, bp))
                    tot.append(pb - pfg + pfx)
                    bmax = max(bmax, abs(pa), abs(pfx))
                    dmax = max(dmax, abs(pfg - pa - pb))
                out.append((abs(math.fsum(tot) / len(tot)), bmax, dmax))
        except DegenerateError:
            rej += 1
    return out, rej


def semibound_scan(
    f: Homeo,
    phi: QuasimorphismSpec,
    bp: Basepoint,
    sampler: Callable[[np.random.Generator], Homeo],
    mode: str = "z",
    trials: int = 1000,
    seed: int = 0,
    grid: int = 16,
    defect_trials: int = 10000,
    x_samples: int = 64,
    workers: int = 1,
) -> SemiBoundReport:
    """Check ``|dPsi(f, g)| <= 2 B_f + D_phi`` over sampled ``g``.

    ``mode="z"`` uses ``Psi_z``; ``mode="integral"`` uses Monte Carlo ``Psi``
    with common random numbers per ``g``.  ``B_f`` is the max of
    ``|phi(gamma(f, x))|`` over a grid 4x denser than ``grid`` together with
    every point visited by the scan, and ``D_phi`` is the sampled defect
    together with every defect instance met; both stay lower bounds of the
    true suprema.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode not in ("z", "integral"):
        raise ValueError("mode must be 'z' or 'integral'")
    bf_grid = grid_max_abs(f, phi, bp, 4 * grid)
    d_sampled = defect_estimate(phi, defect_trials, seed=seed).max_observed
    args = [(f, phi, bp, sampler, mode, seed, c, n, x_samples) for c, n in enumerate(chunk_sizes(trials, 100))]
    rows, rej = [], 0
    for r, j in run_chunks(_semibound_chunk, args, workers):
        rows += r
        rej += j
    max_delta = max(r[0] for r in rows)
    bf = max([bf_grid] + [r[1] for r in rows])
    dphi = max([d_sampled] + [r[2] for r in rows])
    return SemiBoundReport(
        f.describe(), mode, max_delta, 2 * bf + dphi, bf, bf_grid, dphi, d_sampled, trials, rej, 4 * grid
    )


# -- pseudo-norm -------------------------------------------------------------------

@dataclass
class NormEstimate:
    value: float
    witness: int | None
    family_size: int
    skipped: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def norm_estimate(f: Homeo, psi: Callable[[Homeo], float], S: Sequence[Homeo]) -> NormEstimate:
    """``max_{g in S} |psi(g) - psi(f g)|``, a lower bound of ``|f|_psi``.

    Family members on which ``psi`` is degenerate are skipped and counted.
    """
    best, wit, skipped = 0.0, None, 0
    for i, g in enumerate(S):
        try:
            d = abs(psi(g) - psi(compose(f, g)))
        except DegenerateError:
            skipped += 1
            continue
        if d > best:
            best, wit = d, i
    return NormEstimate(best, wit, len(S), skipped)


def psi_functional(phi: QuasimorphismSpec, bp: Basepoint, kind: str = "z", samples: int = 2000, seed: int = 0):
    """A deterministic real functional on maps: ``Psi_z`` or Monte Carlo ``Psi``."""
    if kind == "z":
        return lambda h: psi_z(h, phi, bp)
    return lambda h: psi_mc(h, phi, bp, samples, seed).mean


# -- C^0-small boundedness ---------------------------------------------------------------

@dataclass
class SmallnessReport:
    threshold: float
    max_shift: float
    grid_max: float
    family_max: float
    defect: float
    family_size: int

    @property
    def ok(self) -> bool:
        return self.max_shift < self.threshold and self.grid_max <= self.family_max + self.defect + 1e-12

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.ok
        return d


def short_path_family(model: PolygonModel, length: float, samples: int, seed: int = 0) -> set[Word]:
    """Classes of straight paths shorter than ``length`` closed up through Delta.

    For one strand these are the braids ``alpha`` of the boundedness argument
    (with ``y = x``): straight connectors to ``x``, a short geodesic, and a
    straight connector back.
    """
    rng = chunk_rng(seed, 0, stream=5)
    fam: set = set()
    for _ in range(samples):
        x = model.sample_point(rng)
        rho = length * math.sqrt(float(rng.random()))
        ang = 2 * math.pi * float(rng.random())
        try:
            res = model.trace(x, (rho * math.cos(ang), rho * math.sin(ang)))
        except DegenerateError:
            continue
        fam.add(_closed_word(res.sides, model))
    return fam


def _closed_word(sides, model: PolygonModel):
    if model.is_torus:
        return TorusClass(*torus_class(sides, model))
    return sides_to_word(sides, model)


def smallness_check(
    tw: AnnulusTwist,
    phi: QuasimorphismSpec,
    bp: Basepoint,
    grid: int = 32,
    family_samples: int = 20000,
    defect: float | None = None,
    seed: int = 0,
) -> SmallnessReport:
    """``max_x |phi(gamma(f, x))| <= max_alpha |phi(alpha)| + D_phi`` for a
    twist whose shift stays below the systole threshold (one strand).

    The family holds sampled short straight paths plus, for every grid point,
    the straight chord from ``x`` to ``f(x)`` in the developed plane.
    """
    model = tw.model
    f = Homeo.of(tw)
    thr = model.systole_threshold(1)
    shift = tw.max_displacement()
    fam = short_path_family(model, thr, family_samples, seed)
    gmax = 0.0
    for x in model.grid(grid):
        try:
            v = gamma(f, x, bp)
            mo = tw.motion(x, 1)
            if not mo.stationary:
                a, b = mo.dev[0], mo.dev[-1]
                res = model.trace(x, rot_apply(mo.frame, (b[0] - a[0], b[1] - a[1])), mo.frame)
                fam.add(_closed_word(res.sides, model))
        except DegenerateError:
            continue
        gmax = max(gmax, abs(phi_of(phi, v)))
    fmax = max((abs(phi_of(phi, w)) for w in fam), default=0.0)
    if defect is None:
        defect = defect_estimate(phi, 10000, seed=seed).max_observed
    return SmallnessReport(thr, shift, gmax, fmax, defect, len(fam))
