"""Scene configuration files (YAML, ``schema_version: 1``).

Example::

    schema_version: 1
    surface: genus(2)              # or: torus
    basepoint: {n: 1, z: [[-0.12, -0.17]]}
    maps:
      push:
        twist:
          core: [[-0.12, -0.17]]   # polygon points p_0 .. p_{m-1}
          via: [[2]]               # sides crossed by each core edge
          radius: 0.15
          profile: [[-0.15, 0], [0, 1], [0.15, 0]]
          profile_units: turns     # or: length
      spin: {disk: {center: [0, 0], radius: 0.2, angle: 3.0}}
      shift: {translate: [0.25, 0]}          # torus only
      both: {compose: [push, spin]}          # push o spin (spin acts first)
      cube: {pow: [push, 3]}
      back: {inverse: push}
    quasimorphism:
      base_rank: 2
      terms: [[x1, 1.0]]                     # Brooks pattern, coefficient
      symmetrized: false
      pre_map: handlebody_retract            # identity | torus_relative
    experiment:
      f: push                                # map used by most subcommands
      samples: 10000
      seed: 0

Map names are resolved in any order; cycles are rejected.  Every geometric
constraint (tube embedded, corners avoided, disks inside Delta) is checked
on load.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .cocycle import Basepoint
from .dynamics import AnnulusTwist, DiskMap, Homeo, Translation, compose, inverse, power
from .qm import PRE_MAPS, BrooksPattern, QuasimorphismSpec
from .surface import DegenerateError, GeometryError, PolygonModel, model_from_spec
from .words import Presentation, WordError, parse_word

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid scene configuration."""


@dataclass
class Scene:
    model: PolygonModel
    basepoint: Basepoint
    maps: dict[str, Homeo]
    phi: QuasimorphismSpec | None
    experiment: dict[str, Any] = field(default_factory=dict)
    name: str = ""

    def map(self, name: str | None = None) -> Homeo:
        key = name or self.experiment.get("f")
        if key is None:
            if len(self.maps) == 1:
                return next(iter(self.maps.values()))
            raise ConfigError("no map selected: set experiment.f or pass --map")
        if key not in self.maps:
            raise ConfigError(f"unknown map {key!r}; defined: {sorted(self.maps)}")
        return self.maps[key]

    def require_phi(self) -> QuasimorphismSpec:
        if self.phi is None:
            raise ConfigError("scene has no quasimorphism section")
        return self.phi


def bundled_scenes() -> list[str]:
    root = resources.files("ggqm") / "scenes"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_path(name: str):
    return resources.files("ggqm") / "scenes" / f"{name}.yaml"


def load_scene(path: str | Path) -> Scene:
    """Load a scene from a file path or a bundled scene name."""
    p = Path(path)
    if p.is_file():
        text, name = p.read_text(), p.stem
    elif str(path) in bundled_scenes():
        text, name = bundled_path(str(path)).read_text(), str(path)
    else:
        raise ConfigError(f"no scene file or bundled scene named {str(path)!r}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return parse_scene(data, name)


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}: missing key {key!r}")
    return d[key]


def _point(v, where: str) -> tuple[float, float]:
    try:
        x, y = v
        return (float(x), float(y))
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a coordinate pair, got {v!r}") from None


def parse_scene(data: dict, name: str = "") -> Scene:
    if not isinstance(data, dict):
        raise ConfigError("scene must be a mapping")
    ver = data.get("schema_version")
    if ver != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {ver!r}")
    try:
        model = model_from_spec(_need(data, "surface", "scene"))
    except (GeometryError, ValueError) as exc:
        raise ConfigError(f"surface: {exc}") from None
    bpd = _need(data, "basepoint", "scene")
    zs = tuple(_point(p, "basepoint.z") for p in _need(bpd, "z", "basepoint"))
    try:
        bp = Basepoint(int(bpd.get("n", len(zs))), zs)
        bp.validate(model)
    except GeometryError as exc:
        raise ConfigError(f"basepoint: {exc}") from None
    maps = _parse_maps(model, data.get("maps") or {})
    phi = _parse_phi(data["quasimorphism"], model, bp) if data.get("quasimorphism") else None
    exp = dict(data.get("experiment") or {})
    return Scene(model, bp, maps, phi, exp, name)


def _parse_maps(model: PolygonModel, defs: dict) -> dict[str, Homeo]:
    if not isinstance(defs, dict):
        raise ConfigError("maps must be a mapping of names to definitions")
    built: dict[str, Homeo] = {}
    visiting: set[str] = set()

    def get(n: str, where: str) -> Homeo:
        if n == "id":
            return Homeo.identity(model)
        if n in built:
            return built[n]
        if n not in defs:
            raise ConfigError(f"{where}: unknown map {n!r}")
        if n in visiting:
            raise ConfigError(f"maps: cyclic definition through {n!r}")
        visiting.add(n)
        built[n] = build(n, defs[n])
        visiting.discard(n)
        return built[n]

    def build(n: str, d) -> Homeo:
        where = f"maps.{n}"
        if not isinstance(d, dict) or len(d) != 1:
            raise ConfigError(f"{where}: expected exactly one of twist/disk/translate/compose/pow/inverse")
        (kind, spec), = d.items()
        try:
            if kind == "twist":
                tw = AnnulusTwist(
                    model,
                    [_point(p, where + ".core") for p in _need(spec, "core", where)],
                    _need(spec, "via", where),
                    float(_need(spec, "radius", where)),
                    [_point(p, where + ".profile") for p in _need(spec, "profile", where)],
                    spec.get("profile_units", "length"),
                )
                return Homeo.of(tw, 1, n)
            if kind == "disk":
                ang = _need(spec, "angle", where)
                if not isinstance(ang, (int, float)):
                    ang = [_point(p, where + ".angle") for p in ang]
                dm = DiskMap(model, _point(_need(spec, "center", where), where), float(_need(spec, "radius", where)), ang)
                return Homeo.of(dm, 1, n)
            if kind == "translate":
                return Homeo.of(Translation(model, _point(spec, where)), 1, n)
            if kind == "compose":
                if not isinstance(spec, list) or not spec:
                    raise ConfigError(f"{where}: compose needs a nonempty list of map names")
                out = get(spec[-1], where)
                for m in reversed(spec[:-1]):
                    out = compose(get(m, where), out)
                return Homeo(model, out.factors, n)
            if kind == "pow":
                m, k = spec
                h = power(get(m, where), int(k))
                return Homeo(model, h.factors, n)
            if kind == "inverse":
                return Homeo(model, inverse(get(spec, where)).factors, n)
        except (GeometryError, DegenerateError) as exc:
            raise ConfigError(f"{where}: {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{where}: {exc}") from None
        raise ConfigError(f"{where}: unknown map kind {kind!r}")

    for n in defs:
        get(n, "maps")
    return built


def _parse_phi(d: dict, model: PolygonModel, bp: Basepoint) -> QuasimorphismSpec:
    where = "quasimorphism"
    rank = int(d.get("base_rank", 2))
    pre = d.get("pre_map", "identity")
    if pre not in PRE_MAPS:
        raise ConfigError(f"{where}.pre_map must be one of {PRE_MAPS}")
    try:
        base = Presentation.free(rank)
        terms = tuple(BrooksPattern(parse_word(str(p), base), float(c)) for p, c in _need(d, "terms", where))
        spec = QuasimorphismSpec(base, terms, bool(d.get("symmetrized", False)), pre, d.get("source_genus"))
    except (WordError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    # source group must match the gamma values of this scene
    if bp.n == 2 and pre != "torus_relative":
        raise ConfigError(f"{where}: two strands on the torus need pre_map torus_relative")
    if bp.n == 1 and model.is_torus:
        if pre != "identity" or any(len(t.pattern) != 1 for t in terms):
            raise ConfigError(f"{where}: one strand on the torus needs single-letter patterns and pre_map identity")
    if bp.n == 1 and not model.is_torus:
        if pre != "handlebody_retract" or spec.source_genus != model.genus:
            raise ConfigError(f"{where}: genus {model.genus} needs pre_map handlebody_retract with base_rank {model.genus}")
    return spec
