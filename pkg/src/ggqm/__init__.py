"""Gambaudo-Ghys quasimorphisms on groups of area-preserving surface maps.

Modules: ``words`` (free and surface group words), ``qm`` (Brooks
quasimorphisms), ``surface`` (flat polygon models), ``dynamics`` (twists,
disk maps, translations and their isotopies), ``cocycle`` (the braid cocycle
gamma), ``gg`` (Psi and the experiments built on it), ``scene`` (YAML scene
files) and ``cli``.
"""

from .cocycle import Basepoint, TorusBraid, TorusClass, cocycle_check, gamma
from .dynamics import AnnulusTwist, DiskMap, Homeo, Translation, apply, compose, inverse, power
from .gg import certify_undistorted, psi_bar, psi_mc, psi_z, semibound_scan
from .qm import BrooksPattern, QuasimorphismSpec
from .scene import ConfigError, Scene, load_scene
from .surface import genus_surface, model_from_spec, torus
from .words import Presentation, Word, parse_word, format_word

__version__ = "0.1.0"

__all__ = [
    "AnnulusTwist",
    "Basepoint",
    "BrooksPattern",
    "ConfigError",
    "DiskMap",
    "Homeo",
    "Presentation",
    "QuasimorphismSpec",
    "Scene",
    "TorusBraid",
    "TorusClass",
    "Translation",
    "Word",
    "apply",
    "certify_undistorted",
    "cocycle_check",
    "compose",
    "format_word",
    "gamma",
    "genus_surface",
    "inverse",
    "load_scene",
    "model_from_spec",
    "parse_word",
    "power",
    "psi_bar",
    "psi_mc",
    "psi_z",
    "semibound_scan",
    "torus",
]
