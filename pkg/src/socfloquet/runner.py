"""Experiment orchestration and deterministic CSV output."""
from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import effective as eff
from .config import ExperimentConfig
from .errors import EffectiveModelInapplicableError, InvalidArgumentError
from .floquet import AXES, diagnostics, params_at, quasienergies, spectrum_sweep
from .lattice import parse_spin
from .observables import mean_square_displacement, validity_averages
from .propagator import _worker_count, evolve, monodromy

log = logging.getLogger(__name__)

FLOAT_FORMAT = ".12g"


@dataclass
class Table:
    name: str
    header: list
    rows: list

    def column(self, key) -> np.ndarray:
        k = self.header.index(key)
        return np.array([r[k] for r in self.rows], dtype=float)


@dataclass
class RunResult:
    tables: list = field(default_factory=list)
    data: dict = field(default_factory=dict)  # in-memory objects for library callers

    def table(self, name) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


def format_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), FLOAT_FORMAT)
    return str(x)


def write_csv(table: Table, out_dir) -> str:
    """Write ``<out_dir>/<name>.csv`` with a header row and LF line endings."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{table.name}.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([format_cell(x) for x in row])
    return path


def _label(n, spin) -> str:
    return f"{n}_{'up' if parse_spin(spin) == 0 else 'down'}"


def trajectory_table(traj, sites, name="trajectory") -> Table:
    P = traj.probabilities()
    cols = [traj.params.index(n, s) for n, s in sites]
    msd = mean_square_displacement(traj).values
    header = ["t"] + [f"P_{_label(n, s)}" for n, s in sites] + ["msd"]
    rows = [[t, *P[i, cols], msd[i]] for i, t in enumerate(traj.times)]
    return Table(name, header, rows)


def run_evolve(cfg: ExperimentConfig) -> RunResult:
    traj = evolve(cfg.initial_vector(), 0.0, cfg.t_max, cfg.integrator, cfg.params)
    return RunResult([trajectory_table(traj, cfg.sites)], {"trajectory": traj})


def _levels_table(cfg: ExperimentConfig, sweep) -> Table | None:
    """Analytic second-order levels beside the numerical outliers, when the model applies."""
    rows, header = [], None
    for x, spec in zip(sweep.grid, sweep.spectra):
        p = params_at(cfg.params, sweep.axis, float(x))
        try:
            levels = eff.analytic_quasienergies(p)
        except EffectiveModelInapplicableError:
            return None
        d = diagnostics(spec, cfg.delta_deg, exclude=levels.values[levels.impurity])
        if header is None:
            header = ([AXES[sweep.axis]] + [f"analytic_{k}" for k in levels.labels]
                      + [f"numeric_edge_{k}" for k in range(1, 5)] + ["max_deviation"])
        dev = float(np.max(np.abs(np.sort(d.outlier_values) - levels.edge_values())))
        rows.append([x, *levels.values, *d.outlier_values, dev])
    return Table("levels", header, rows)


def run_spectrum(cfg: ExperimentConfig) -> RunResult:
    sweep = spectrum_sweep(cfg.params, cfg.sweep_axis, cfg.sweep_lo, cfg.sweep_hi, cfg.sweep_points,
                           cfg.integrator, workers=cfg.workers, delta_deg=cfg.delta_deg)
    tables = [Table("spectrum", sweep.header(), list(sweep.rows()))]
    levels = _levels_table(cfg, sweep)
    if levels is not None:
        tables.append(levels)
    return RunResult(tables, {"sweep": sweep})


def run_chi(cfg: ExperimentConfig) -> RunResult:
    """chi_1 ... chi_6 over the F/omega grid ``sweep_lo .. sweep_hi``."""
    dec = eff.decompose_resonance(cfg.params)
    grid = np.linspace(cfg.sweep_lo, cfg.sweep_hi, cfg.sweep_points)
    rows = []
    for x in grid:
        c = eff.chi_coefficients(float(x), dec)
        rows.append([x, *c.values, c.truncation, c.last_term_magnitude])
    header = ["F_over_omega"] + [f"chi{k}" for k in range(1, 7)] + ["P", "certificate"]
    return RunResult([Table("chi", header, rows)], {"decomposition": dec})


def _effective_model(cfg: ExperimentConfig):
    """Pick the resonant chain or the second-order model and the block holding the start state."""
    if not isinstance(cfg.initial_state, tuple):
        raise EffectiveModelInapplicableError("effective comparison needs a basis initial state")
    p = cfg.params
    dec = eff.decompose_resonance(p)
    n0, s0 = cfg.initial_state
    s0 = parse_spin(s0)
    if abs(n0) > 1:
        raise EffectiveModelInapplicableError("initial site must be -1, 0 or 1")
    edge = s0
    if n0 == 0 and p.spin_flipping_only:
        edge = 1 - s0
    edge = "up" if edge == 0 else "down"
    if abs(dec.u) <= 1e-9 * p.drive_frequency:
        model = eff.resonant_three_site(p, dec, edge)
        return "three_site", model, model.basis, dec, edge
    model = eff.second_order_model(p, dec)
    return "second_order", model, model.basis(edge), dec, edge


def run_effective(cfg: ExperimentConfig) -> RunResult:
    """Exact trajectory beside the effective-model prediction on the same time grid."""
    kind, model, basis, dec, edge = _effective_model(cfg)
    traj = evolve(cfg.initial_vector(), 0.0, cfg.t_max, cfg.integrator, cfg.params)
    t = traj.times
    init = basis.index((cfg.initial_state[0], "up" if parse_spin(cfg.initial_state[1]) == 0 else "down"))
    if kind == "three_site":
        P_eff = eff.three_site_evolve(model, init, t)
    else:
        P_eff = model.probabilities(init, t, edge)
    P = traj.probabilities()
    idx = [cfg.params.index(n, s) for n, s in basis]
    names = [_label(n, s) for n, s in basis]
    header = ["t"] + [f"P_exact_{k}" for k in names] + [f"P_model_{k}" for k in names]
    extra = []
    if kind == "second_order":
        rate = model.edge_rate(edge)
        header.append("rabi_transfer")
        extra = [np.sin(rate * t) ** 2]
    rows = [[ti, *P[i, idx], *P_eff[i], *(e[i] for e in extra)] for i, ti in enumerate(t)]
    tables = [trajectory_table(traj, cfg.sites), Table("effective", header, rows)]
    return RunResult(tables, {"trajectory": traj, "model": model, "kind": kind,
                              "basis": basis, "decomposition": dec, "model_probabilities": P_eff})


def _validity_point(cfg: ExperimentConfig, omega: float):
    p0 = cfg.params
    p = p0.with_(drive_frequency=omega, drive_amplitude=p0.drive_ratio * omega,
                 impurity=p0.impurity / p0.drive_frequency * omega,
                 zeeman=p0.zeeman / p0.drive_frequency * omega)
    traj = evolve(cfg.initial_vector(), 0.0, cfg.delta_t, cfg.integrator, p)
    v = validity_averages(traj, cfg.delta_t)
    return v.s1, v.s2


def run_validity(cfg: ExperimentConfig) -> RunResult:
    """S1, S2 on an omega grid with F/omega, eps0/omega and Omega/omega held fixed."""
    grid = np.linspace(cfg.omega_lo, cfg.omega_hi, cfg.omega_points)
    workers = min(_worker_count(cfg.workers), grid.size)
    if workers == 1:
        res = [_validity_point(cfg, float(w)) for w in grid]
    else:
        with ThreadPoolExecutor(workers) as pool:
            res = list(pool.map(lambda w: _validity_point(cfg, float(w)), grid))
    rows = [[w, s1, s2] for w, (s1, s2) in zip(grid, res)]
    return RunResult([Table("validity", ["omega", "S1", "S2"], rows)], {"grid": grid})


RUNNERS = {
    "evolve": run_evolve,
    "spectrum": run_spectrum,
    "chi": run_chi,
    "effective": run_effective,
    "validity": run_validity,
}


def run(cfg: ExperimentConfig) -> RunResult:
    try:
        fn = RUNNERS[cfg.run]
    except KeyError:
        raise InvalidArgumentError(f"unknown run kind {cfg.run!r}") from None
    log.info("running %s", cfg.run)
    return fn(cfg)


def run_and_write(cfg: ExperimentConfig, out_dir, prefix: str = "") -> list[str]:
    result = run(cfg)
    paths = []
    for t in result.tables:
        paths.append(write_csv(replace(t, name=prefix + t.name), out_dir))
    return paths


def quasienergy_snapshot(cfg: ExperimentConfig):
    """Spectrum and diagnostics at the configured parameters (no sweep)."""
    spec = quasienergies(monodromy(cfg.params, cfg.integrator, workers=cfg.workers),
                         cfg.params.drive_frequency)
    return spec, diagnostics(spec, cfg.delta_deg)


def revival(times, values, low: float = 0.1, high: float = 0.9):
    """Time and height of the first return peak of a decaying-then-reviving signal.

    Hysteresis keeps micromotion from faking crossings: the signal must first
    fall below ``low``; the peak is taken over the first following stretch
    that stays above ``high``.  Returns (nan, nan) when there is no revival.
    """
    values = np.asarray(values)
    down = np.flatnonzero(values < low)
    if down.size == 0:
        return math.nan, math.nan
    up = np.flatnonzero(values[down[0]:] >= high)
    if up.size == 0:
        return math.nan, math.nan
    start = down[0] + up[0]
    fall = np.flatnonzero(values[start:] < high)
    stop = start + fall[0] if fall.size else values.size
    k = start + int(np.argmax(values[start:stop]))
    return float(times[k]), float(values[k])
