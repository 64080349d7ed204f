import copy

import pytest
import yaml

from ggqm.scene import ConfigError, bundled_path, bundled_scenes, load_scene, parse_scene

BASE = yaml.safe_load(bundled_path("genus2_push_a1").read_text())


def variant(**changes):
    d = copy.deepcopy(BASE)
    for path, value in changes.items():
        node = d
        keys = path.split("__")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    return d


def test_bundled_scenes_load():
    names = bundled_scenes()
    assert {"genus2_push_a1", "genus2_push_a2", "genus2_push_a1b1", "genus2_push_a1a2", "torus_push", "torus_n2"} <= set(names)
    for n in names:
        s = load_scene(n)
        assert s.maps
        assert s.phi is not None


def test_map_dsl():
    d = variant()
    d["maps"].update(
        {
            "spin": {"disk": {"center": [0.2, 0.3], "radius": 0.2, "angle": 1.0}},
            "both": {"compose": ["push", "spin"]},
            "cube": {"pow": ["both", 3]},
            "back": {"inverse": "cube"},
            "prof": {"disk": {"center": [0.2, 0.3], "radius": 0.2, "angle": [[0, 1.0], [0.2, 0.0]]}},
        }
    )
    s = parse_scene(d, "dsl")
    assert len(s.maps["both"].factors) == 2
    assert len(s.maps["cube"].factors) == 6
    assert [e for _, e in s.maps["back"].factors] == [-1] * 6
    # compose lists act right to left
    assert s.maps["both"].factors[0][0] is s.maps["push"].factors[0][0]


@pytest.mark.parametrize(
    "changes,match",
    [
        ({"schema_version": 2}, "schema_version"),
        ({"surface": "sphere"}, "surface"),
        ({"basepoint__z": [[5.0, 5.0]]}, "basepoint"),
        ({"maps__push__twist__radius": 0.7}, "maps.push"),
        ({"maps__push__twist__via": [[5, 1]]}, "maps.push"),
        ({"maps__push": {"warp": {}}}, "unknown map kind"),
        ({"maps__push": {"compose": ["push"]}}, "cyclic"),
        ({"maps__push": {"compose": ["nothing"]}}, "unknown map"),
        ({"quasimorphism__pre_map": "identity"}, "handlebody_retract"),
        ({"quasimorphism__terms": [["q9", 1.0]]}, "quasimorphism"),
    ],
)
def test_actionable_errors(changes, match):
    with pytest.raises(ConfigError, match=match):
        parse_scene(variant(**changes))


def test_selection_errors():
    s = parse_scene(variant(experiment={}))
    assert s.map() is s.maps["push"]
    with pytest.raises(ConfigError):
        s.map("nope")
    d = variant()
    del d["quasimorphism"]
    with pytest.raises(ConfigError):
        parse_scene(d).require_phi()
    with pytest.raises(ConfigError):
        load_scene("no_such_scene")


def test_two_strand_scene_requires_relative_pre_map():
    d = yaml.safe_load(bundled_path("torus_n2").read_text())
    d["quasimorphism"]["pre_map"] = "identity"
    with pytest.raises(ConfigError, match="torus_relative"):
        parse_scene(d)
