"""Named presets that reproduce each published figure as CSV tables.

Every recipe is a list of ``(suffix, ExperimentConfig)`` steps; the runner
writes each step's tables as ``<recipe><suffix>_<table>.csv``.  All runs use
N = 21, v = 1, omega = Omega = 20 and the start state |-1, up> unless noted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import ExperimentConfig
from .errors import InvalidArgumentError
from .lattice import LatticeParams

# first collapse points quoted for the two hopping regimes
COLLAPSE = {"conserving": 2.405, "flipping": 3.8317}
ALPHA = {"conserving": 0.0, "flipping": math.pi / 2}
OFF_COLLAPSE = 1.5
RESONANT, OFF_RESONANT = 1.0, 1.2
ALL_SITES_NEAR = ((-1, "up"), (0, "up"), (1, "up"), (-1, "down"), (0, "down"), (1, "down"))


@dataclass(frozen=True)
class Recipe:
    name: str
    description: str
    steps: tuple  # ((suffix, ExperimentConfig), ...)


def _params(regime, drive_ratio, impurity_ratio) -> LatticeParams:
    return LatticeParams.from_ratios(drive_ratio, impurity_ratio, omega=20.0,
                                     soc_angle=ALPHA[regime], n_sites=21, hopping=1.0)


def _cfg(regime, drive_ratio, impurity_ratio, **kw) -> ExperimentConfig:
    return ExperimentConfig(params=_params(regime, drive_ratio, impurity_ratio), **kw)


def _figure1(regime, impurity_ratio):
    return ((("", _cfg(regime, 0.0, impurity_ratio, run="spectrum", sweep_axis="drive_ratio",
                       sweep_lo=0.0, sweep_hi=8.0, sweep_points=161)),))


def _figure2(regime, drive_ratio):
    return ((("", _cfg(regime, drive_ratio, 1.0, run="spectrum", sweep_axis="impurity_ratio",
                       sweep_lo=0.5, sweep_hi=3.5, sweep_points=121)),))


def _figure3(regime, impurity_ratio):
    return tuple(
        (suffix, _cfg(regime, x, impurity_ratio, run="evolve", t_max=50.0))
        for suffix, x in (("_collapse", COLLAPSE[regime]), ("_off", OFF_COLLAPSE))
    )


def _dynamics(regime, impurity_ratio):
    return ((("", _cfg(regime, COLLAPSE[regime], impurity_ratio, run="effective", t_max=100.0,
                       sites=ALL_SITES_NEAR)),))


def _figure6(regime):
    x = COLLAPSE[regime]
    return ((("", _cfg(regime, x, OFF_RESONANT, run="spectrum", sweep_axis="drive_ratio",
                       sweep_lo=x - 0.2, sweep_hi=x + 0.2, sweep_points=41)),))


def _figure7(regime):
    return ((("", _cfg(regime, COLLAPSE[regime], OFF_RESONANT, run="validity", delta_t=200.0,
                       omega_lo=2.0, omega_hi=30.0, omega_points=15)),))


_BUILDERS = {
    "figure1a": ("Quasienergies vs F/omega, sin(alpha)=0, eps0/omega=1", lambda: _figure1("conserving", RESONANT)),
    "figure1b": ("Quasienergies vs F/omega, sin(alpha)=0, eps0/omega=1.2", lambda: _figure1("conserving", OFF_RESONANT)),
    "figure1c": ("Quasienergies vs F/omega, cos(alpha)=0, eps0/omega=1", lambda: _figure1("flipping", RESONANT)),
    "figure1d": ("Quasienergies vs F/omega, cos(alpha)=0, eps0/omega=1.2", lambda: _figure1("flipping", OFF_RESONANT)),
    "figure2a": ("Quasienergies vs eps0/omega, sin(alpha)=0, F/omega=2.4045", lambda: _figure2("conserving", 2.4045)),
    "figure2b": ("Quasienergies vs eps0/omega, cos(alpha)=0, F/omega=3.8317", lambda: _figure2("flipping", 3.8317)),
    "figure3a": ("<n^2>(t), sin(alpha)=0, eps0/omega=1, on and off collapse", lambda: _figure3("conserving", RESONANT)),
    "figure3b": ("<n^2>(t), sin(alpha)=0, eps0/omega=1.2, on and off collapse", lambda: _figure3("conserving", OFF_RESONANT)),
    "figure3c": ("<n^2>(t), cos(alpha)=0, eps0/omega=1, on and off collapse", lambda: _figure3("flipping", RESONANT)),
    "figure3d": ("<n^2>(t), cos(alpha)=0, eps0/omega=1.2, on and off collapse", lambda: _figure3("flipping", OFF_RESONANT)),
    "figure4a": ("Resonant oscillation vs three-site model, sin(alpha)=0", lambda: _dynamics("conserving", RESONANT)),
    "figure4b": ("Resonant oscillation vs three-site model, cos(alpha)=0", lambda: _dynamics("flipping", RESONANT)),
    "figure5a": ("Second-order Rabi transfer vs slow-amplitude model, sin(alpha)=0", lambda: _dynamics("conserving", OFF_RESONANT)),
    "figure5b": ("Second-order Rabi transfer vs slow-amplitude model, cos(alpha)=0", lambda: _dynamics("flipping", OFF_RESONANT)),
    "figure6a": ("Analytic vs numerical outlier levels near collapse, sin(alpha)=0", lambda: _figure6("conserving")),
    "figure6b": ("Analytic vs numerical outlier levels near collapse, cos(alpha)=0", lambda: _figure6("flipping")),
    "figure7a": ("S1, S2 vs omega, sin(alpha)=0", lambda: _figure7("conserving")),
    "figure7b": ("S1, S2 vs omega, cos(alpha)=0", lambda: _figure7("flipping")),
}

FIGURES = tuple(_BUILDERS)


def get_recipe(name: str) -> Recipe:
    try:
        description, build = _BUILDERS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown figure {name!r}; available: {', '.join(FIGURES)}") from None
    return Recipe(name, description, build())


def with_overrides(recipe: Recipe, **changes) -> Recipe:
    """Apply run-level field changes (e.g. ``workers``, ``integrator``) to every step."""
    return replace(recipe, steps=tuple((s, replace(c, **changes)) for s, c in recipe.steps))


def run_recipe(recipe: Recipe) -> dict:
    """Execute every step; returns ``{suffix: RunResult}`` in step order."""
    from .runner import run

    return {suffix: run(cfg) for suffix, cfg in recipe.steps}


def write_recipe(recipe: Recipe, out_dir) -> list[str]:
    from .runner import write_csv

    paths = []
    for suffix, result in run_recipe(recipe).items():
        for t in result.tables:
            paths.append(write_csv(replace(t, name=f"{recipe.name}{suffix}_{t.name}"), out_dir))
    return paths
