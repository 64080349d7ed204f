"""Command line interface: ``ggqm <subcommand> <scene> [flags]``.

``<scene>`` is a YAML scene file or the name of a bundled scene (see
``ggqm list``).  Every subcommand prints one JSON record per line on stdout
(and to ``--out`` when given) and exits 0 on pass, 2 on a property
violation and 1 on a configuration error.  Records carry no timestamp
unless ``--timestamp`` is passed, so repeated runs are byte-identical.

Settings are resolved as: flag, then environment variable (``GGQM_SEED``,
``GGQM_SAMPLES``, ``GGQM_WORKERS``, ``GGQM_OUT``, ``GGQM_K_MAX``,
``GGQM_GRID``), then the scene's ``experiment`` section, then the default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Any, Callable

from .cocycle import (
    TorusBraid,
    TorusClass,
    apply_config,
    cocycle_check,
    format_gamma,
    gamma,
    sample_config,
)
from .dynamics import (
    HomeoSampler,
    apply,
    compose,
    d0_distance,
    fixes,
    inverse,
    measure_check,
    power,
    random_homeo,
    random_pool,
    recurrence_probe,
)
from .gg import (
    certify_undistorted,
    gamma_at_basepoint,
    growth_estimate,
    norm_estimate,
    psi_bar,
    psi_functional,
    psi_mc,
    psi_z,
    semibound_scan,
)
from .qm import defect_estimate
from .sampling import chunk_rng, chunk_sizes, run_chunks
from .scene import ConfigError, Scene, bundled_scenes, load_scene
from .surface import DegenerateError, GeometryError
from .words import Presentation, WordError, parse_word, power as word_power

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2

SETTINGS = {
    # name: (type, default)
    "seed": (int, 0),
    "samples": (int, 1000),
    "workers": (int, 1),
    "out": (str, None),
    "k_max": (int, 16),
    "grid": (int, 16),
}


class Violation(Exception):
    """A checked property failed; carries the report record."""

    def __init__(self, record: dict):
        super().__init__(record.get("command", ""))
        self.record = record


def resolve(args: argparse.Namespace, scene: Scene | None, name: str):
    typ, default = SETTINGS[name]
    v = getattr(args, name, None)
    if v is not None:
        return v
    env = os.environ.get("GGQM_" + name.upper())
    if env is not None and env != "":
        try:
            return typ(env)
        except ValueError:
            raise ConfigError(f"environment variable GGQM_{name.upper()}={env!r} is not a valid {typ.__name__}") from None
    if scene is not None and name in scene.experiment:
        return typ(scene.experiment[name])
    return default


def _point_arg(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y got {text!r}") from None
    return (x, y)


# -- source elements -----------------------------------------------------------------

def _parse_element(scene: Scene, text: str):
    phi = scene.require_phi()
    if phi.pre_map == "torus_relative":
        return TorusBraid.parse(text)
    if phi.pre_map == "handlebody_retract":
        return parse_word(text, Presentation.surface(phi.source_genus))
    if scene.model.is_torus and text.strip().startswith("("):
        m, n = (int(v) for v in text.strip().strip("()").split(","))
        return TorusClass(m, n)
    return parse_word(text, phi.base)


def _element_power(g, k: int):
    if isinstance(g, TorusClass):
        return TorusClass(k * g.m, k * g.n)
    if isinstance(g, TorusBraid):
        return TorusBraid((k * g.central[0], k * g.central[1]), word_power(g.rel, k))
    return word_power(g, k)


# -- subcommands -----------------------------------------------------------------------

def _base(cmd: str, scene: Scene, args) -> dict:
    rec = {"command": cmd, "scene": scene.name, "surface": scene.model.describe()}
    if getattr(args, "map", None) or scene.maps:
        try:
            rec["map"] = args.map or scene.experiment.get("f") or next(iter(scene.maps))
        except StopIteration:
            pass
    return rec


def _z(scene: Scene):
    bp = scene.basepoint
    return bp.z[0] if bp.n == 1 else bp.z


def cmd_gamma(scene: Scene, args) -> dict:
    f = scene.map(args.map)
    bp = scene.basepoint
    if args.point:
        if len(args.point) != bp.n:
            raise ConfigError(f"--point must be given {bp.n} time(s) for n = {bp.n}")
        x = args.point[0] if bp.n == 1 else tuple(args.point)
    else:
        x = _z(scene)
    try:
        g = gamma(f, x, bp)
    except (DegenerateError, GeometryError) as exc:
        raise ConfigError(f"gamma undefined at {x}: {exc}") from None
    rec = _base("gamma", scene, args)
    rec.update(x=_jsonable(x), gamma=format_gamma(g, scene.model), image=_jsonable(apply_config(f, x, bp)))
    if scene.phi is not None:
        rec["phi"] = scene.phi(g)
    return rec


def cmd_eval_qm(scene: Scene, args) -> dict:
    phi = scene.require_phi()
    texts = args.word or scene.experiment.get("words") or []
    if not texts:
        raise ConfigError("eval-qm needs --word or experiment.words")
    seed, samples = resolve(args, scene, "seed"), resolve(args, scene, "samples")
    rows, ok = [], True
    for t in texts:
        try:
            g = _parse_element(scene, str(t))
        except (WordError, ValueError) as exc:
            raise ConfigError(f"cannot parse element {t!r}: {exc}") from None
        v = phi(g)
        homog = all(phi(_element_power(g, k)) == k * v for k in (2, 3, -1))
        ok &= homog
        rows.append({"element": str(t), "value": v, "raw": phi.raw(g), "homogeneous": homog})
    d = defect_estimate(phi, samples, seed=seed, workers=resolve(args, scene, "workers"))
    rec = _base("eval-qm", scene, args)
    rec.update(phi=phi.describe(), values=rows, defect=d.max_observed, defect_trials=d.trials, seed=seed, **{"pass": ok})
    if not ok:
        raise Violation(rec)
    return rec


def cmd_psi(scene: Scene, args) -> dict:
    est = psi_mc(
        scene.map(args.map),
        scene.require_phi(),
        scene.basepoint,
        resolve(args, scene, "samples"),
        resolve(args, scene, "seed"),
        resolve(args, scene, "workers"),
    )
    rec = _base("psi", scene, args)
    rec.update(est.as_dict())
    return rec


def cmd_psi_bar(scene: Scene, args) -> dict:
    rep = psi_bar(
        scene.map(args.map),
        scene.require_phi(),
        scene.basepoint,
        resolve(args, scene, "k_max"),
        resolve(args, scene, "samples"),
        resolve(args, scene, "seed"),
        resolve(args, scene, "workers"),
    )
    rec = _base("psi-bar", scene, args)
    rec.update(rep.as_dict())
    return rec


def cmd_psi_z(scene: Scene, args) -> dict:
    f, phi, bp = scene.map(args.map), scene.require_phi(), scene.basepoint
    k_max = resolve(args, scene, "k_max")
    try:
        v = psi_z(f, phi, bp)
        g = gamma_at_basepoint(f, bp)
        growth = growth_estimate(f, phi, bp, max(2, k_max))
    except DegenerateError as exc:
        raise ConfigError(f"Psi_z undefined: {exc}") from None
    z = bp.z if bp.n == 2 else bp.z[:1]
    fixed = all(fixes(f, p) for p in z)
    rec = _base("psi-z", scene, args)
    rec.update(value=v, gamma=format_gamma(g, scene.model), fixed=fixed, growth=growth.as_dict())
    if fixed:
        # gamma(f^k, z) = gamma(f, z)^k at a fixed point, so Psi_z is linear in k
        linear = all(val == abs(v) for val in growth.values)
        rec["linear"] = linear
        rec["pass"] = linear
        if not linear:
            raise Violation(rec)
    return rec


def _pool(scene: Scene, seed: int) -> tuple:
    own = []
    for h in scene.maps.values():
        for m, _ in h.factors:
            if all(m is not o for o in own):
                own.append(m)
    return tuple(own) + tuple(random_pool(scene.model, seed))


def _cocycle_chunk(scene_pool, model, bp, seed, chunk, n):
    rng = chunk_rng(seed, chunk, stream=21)
    fails, degen, first = 0, 0, None
    for _ in range(n):
        f = random_homeo(model, rng, scene_pool)
        g = random_homeo(model, rng, scene_pool)
        x = sample_config(model, rng, bp)
        try:
            res = cocycle_check(f, g, x, bp)
        except DegenerateError:
            degen += 1
            continue
        if not res.ok:
            fails += 1
            if first is None:
                first = {"lhs": format_gamma(res.lhs, model), "rhs": format_gamma(res.rhs, model)}
    return fails, degen, first


def cmd_check_cocycle(scene: Scene, args) -> dict:
    seed, trials = resolve(args, scene, "seed"), resolve(args, scene, "samples")
    pool = _pool(scene, seed)
    chunks = [(pool, scene.model, scene.basepoint, seed, c, n) for c, n in enumerate(chunk_sizes(trials, 100))]
    fails = degen = 0
    first = None
    for fl, dg, fi in run_chunks(_cocycle_chunk, chunks, resolve(args, scene, "workers")):
        fails += fl
        degen += dg
        first = first or fi
    rate = degen / trials
    ok = fails == 0 and rate < 0.01
    rec = _base("check-cocycle", scene, args)
    rec.update(trials=trials, failures=fails, degenerate=degen, degenerate_rate=rate, first_failure=first, seed=seed, **{"pass": ok})
    if not ok:
        raise Violation(rec)
    return rec


def cmd_check_semibound(scene: Scene, args) -> dict:
    seed = resolve(args, scene, "seed")
    sampler = HomeoSampler(scene.model, _pool(scene, seed))
    mode = scene.experiment.get("semibound_mode", "z")
    rep = semibound_scan(
        scene.map(args.map),
        scene.require_phi(),
        scene.basepoint,
        sampler,
        mode=mode,
        trials=resolve(args, scene, "samples"),
        seed=seed,
        grid=resolve(args, scene, "grid"),
        workers=resolve(args, scene, "workers"),
    )
    rec = _base("check-semibound", scene, args)
    rec.update(rep.as_dict())
    if not rep.ok:
        raise Violation(rec)
    return rec


def cmd_norm_est(scene: Scene, args) -> dict:
    seed, n = resolve(args, scene, "seed"), resolve(args, scene, "samples")
    f, phi, bp = scene.map(args.map), scene.require_phi(), scene.basepoint
    pool = _pool(scene, seed)
    rng = chunk_rng(seed, 0, stream=31)
    S = [random_homeo(scene.model, rng, pool) for _ in range(n)]
    est = norm_estimate(f, psi_functional(phi, bp, "z"), S)
    rec = _base("norm-est", scene, args)
    rec.update(est.as_dict(), functional="psi_z", seed=seed)
    return rec


def cmd_certify(scene: Scene, args) -> dict:
    cert = certify_undistorted(scene.map(args.map), scene.require_phi(), scene.basepoint)
    rec = _base("certify", scene, args)
    rec.update(cert.as_dict())
    return rec


def cmd_recurrence(scene: Scene, args) -> dict:
    k, d = recurrence_probe(scene.map(args.map), resolve(args, scene, "k_max"), resolve(args, scene, "grid"))
    rec = _base("recurrence", scene, args)
    rec.update(best_k=k, d0=d)
    return rec


def cmd_selftest(scene: Scene, args) -> dict:
    seed = resolve(args, scene, "seed")
    checks: dict[str, Any] = {}
    model, bp = scene.model, scene.basepoint
    pool = _pool(scene, seed)
    fl, dg, _ = _cocycle_chunk(pool, model, bp, seed, 0, 100)
    checks["cocycle"] = {"trials": 100, "failures": fl, "degenerate": dg, "pass": fl == 0 and dg <= 1}
    for name, f in scene.maps.items():
        m = measure_check(f, 2000, seed)
        back = compose(inverse(f), f)
        err = max(model.distance(apply(back, x), x) for x in model.grid(6))
        c: dict[str, Any] = {"measure": m.as_dict(), "inverse_error": err, "d0_self": d0_distance(f, f, 6)}
        ok = m.ok and err < 1e-7 and c["d0_self"] == 0.0
        z = bp.z if bp.n == 2 else bp.z[:1]
        if scene.phi is not None and all(fixes(f, p) for p in z):
            v = psi_z(f, scene.phi, bp)
            lin = all(psi_z(power(f, k), scene.phi, bp) == k * v for k in (2, 3, 5))
            c["fixed_point_linearity"] = lin
            ok &= lin
        c["pass"] = ok
        checks["map:" + name] = c
    ok = all(c["pass"] for c in checks.values())
    rec = _base("selftest", scene, args)
    rec.update(checks=checks, seed=seed, **{"pass": ok})
    if not ok:
        raise Violation(rec)
    return rec


COMMANDS: dict[str, tuple[Callable, str]] = {
    "gamma": (cmd_gamma, "braid gamma(f, x) at --point (default: the basepoint)"),
    "eval-qm": (cmd_eval_qm, "evaluate the quasimorphism on --word elements"),
    "psi": (cmd_psi, "Monte Carlo Psi(f)"),
    "psi-bar": (cmd_psi_bar, "Psi(f^k)/k for k = 1..k_max"),
    "psi-z": (cmd_psi_z, "Psi_z(f) and the growth of Psi_z(f^k)"),
    "check-cocycle": (cmd_check_cocycle, "cocycle identity on random triples"),
    "check-semibound": (cmd_check_semibound, "semi-boundedness scan over random g"),
    "norm-est": (cmd_norm_est, "lower bound of |f|_psi over random g"),
    "certify": (cmd_certify, "undistortedness certificate at the basepoint"),
    "recurrence": (cmd_recurrence, "argmin_k d0(f^k, id) on a grid"),
    "selftest": (cmd_selftest, "quick consistency checks of a scene"),
}


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ggqm", description="Gambaudo-Ghys quasimorphisms on simulated surface maps.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list bundled scenes")
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("scene", help="scene YAML file or bundled scene name")
        s.add_argument("--map", help="map name (default: experiment.f)")
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--workers", type=int)
        s.add_argument("--out")
        s.add_argument("--k-max", dest="k_max", type=int)
        s.add_argument("--grid", type=int)
        s.add_argument("--timestamp", action="store_true", help="add a timestamp field")
        if name == "gamma":
            s.add_argument("--point", type=_point_arg, action="append", help="x,y (repeat for two strands)")
        if name == "eval-qm":
            s.add_argument("--word", action="append", help="source element, e.g. 'a1 b1' or '(0,0|x1 x2)'")
    return p


def _emit(rec: dict, out: str | None, timestamp: bool) -> None:
    if timestamp:
        rec = dict(rec, timestamp=time.time())
    line = json.dumps(rec, sort_keys=True, allow_nan=True)
    print(line)
    if out:
        with open(out, "a") as fh:
            fh.write(line + "\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for n in bundled_scenes():
            print(n)
        return EXIT_OK
    fn = COMMANDS[args.command][0]
    out = None
    try:
        scene = load_scene(args.scene)
        out = resolve(args, scene, "out")
        rec = fn(scene, args)
        code = EXIT_OK
    except Violation as v:
        rec, code = v.record, EXIT_VIOLATION
    except (ConfigError, GeometryError, WordError) as exc:
        rec, code = {"command": args.command, "error": str(exc)}, EXIT_CONFIG
        print(f"ggqm: config error: {exc}", file=sys.stderr)
    _emit(rec, out, args.timestamp)
    return code


if __name__ == "__main__":
    sys.exit(main())
