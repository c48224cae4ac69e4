"""Line-oriented ``key = value`` experiment configuration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigParseError, SimulationError
from .lattice import LatticeParams, parse_spin
from .propagator import IntegratorConfig

RUNS = ("evolve", "spectrum", "chi", "effective", "validity")
NORM_TOLERANCE = 1e-6

# absolute lattice keys and the LatticeParams field they set
LATTICE_KEYS = {
    "n_sites": "n_sites",
    "hopping": "hopping",
    "alpha": "soc_angle",
    "zeeman": "zeeman",
    "impurity": "impurity",
    "drive_amplitude": "drive_amplitude",
    "drive_frequency": "drive_frequency",
}
# ratio keys: value times drive_frequency sets the absolute field
RATIO_KEYS = {"drive_ratio": "drive_amplitude", "impurity_ratio": "impurity", "zeeman_ratio": "zeeman"}
INTEGRATOR_KEYS = ("steps_per_period", "samples_per_period", "frame")


@dataclass
class ExperimentConfig:
    params: LatticeParams = field(default_factory=LatticeParams)
    initial_state: object = (-1, "up")  # (site, spin) or amplitude array
    run: str = "evolve"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    t_max: float = 100.0
    sites: tuple = ((-1, "up"), (0, "up"), (1, "up"), (-1, "down"), (0, "down"), (1, "down"))
    sweep_axis: str = "drive_ratio"
    sweep_lo: float = 0.0
    sweep_hi: float = 8.0
    sweep_points: int = 161
    delta_t: float = 200.0
    omega_lo: float = 2.0
    omega_hi: float = 30.0
    omega_points: int = 15
    delta_deg: float | None = None
    edge_spin: str = "up"
    workers: int | None = None  # None: SIM_THREADS or the CPU count

    def initial_vector(self) -> np.ndarray:
        if isinstance(self.initial_state, tuple):
            n, spin = self.initial_state
            psi = np.zeros(self.params.dim, dtype=complex)
            psi[self.params.index(n, spin)] = 1.0
            return psi
        return np.asarray(self.initial_state, dtype=complex)


# run-level keys with their converters
def _int(s):
    return int(s)


def _float(s):
    x = float(s)
    if not math.isfinite(x):
        raise ValueError("non-finite value")
    return x


def _optional_float(s):
    return None if s.lower() in ("none", "default") else _float(s)


def _optional_int(s):
    return None if s.lower() in ("none", "default") else int(s)


def _site_label(s):
    parts = s.replace(",", " ").split()
    if len(parts) != 2:
        raise ValueError(f"expected '<site> <spin>', got {s!r}")
    spin = parse_spin(parts[1])
    return (int(parts[0]), "up" if spin == 0 else "down")


def _site_list(s):
    return tuple(_site_label(item) for item in s.split(";") if item.strip())


def _run(s):
    if s not in RUNS:
        raise ValueError(f"run must be one of {RUNS}")
    return s


RUN_KEYS = {
    "run": _run,
    "t_max": _float,
    "sites": _site_list,
    "sweep_axis": str,
    "sweep_lo": _float,
    "sweep_hi": _float,
    "sweep_points": _int,
    "delta_t": _float,
    "omega_lo": _float,
    "omega_hi": _float,
    "omega_points": _int,
    "delta_deg": _optional_float,
    "edge_spin": lambda s: "up" if parse_spin(s) == 0 else "down",
    "workers": _optional_int,
}
KNOWN_KEYS = (set(LATTICE_KEYS) | set(RATIO_KEYS) | set(INTEGRATOR_KEYS) | set(RUN_KEYS)
              | {"initial_state", "initial_amplitudes"})


def _amplitudes(s):
    return np.array([complex(tok.strip().replace(" ", "")) for tok in s.split(",") if tok.strip()])


def _split_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        yield lineno, key, value


def parse_config(text: str, overrides=(), base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse configuration text, then apply ``overrides`` (key, value) pairs.

    Unknown keys, unparsable values and violated invariants raise
    :class:`ConfigParseError` carrying the offending line number (override
    errors carry no line).  Empty text gives the defaults: N = 21, v = 1,
    omega = Omega = 20, 4096 steps per period, initial state |-1, up>.
    """
    return build_config(parse_entries(text, overrides), base)


def parse_entries(text: str, overrides=()) -> dict:
    """``{key: (value_text, line)}`` from the file, then the overrides (line None)."""
    entries = {}
    for lineno, key, value in _split_lines(text):
        entries[key] = (value, lineno)
    for key, value in overrides:
        entries[key] = (str(value), None)
    return entries


def build_config(entries: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Assemble a config from ``{key: (value_text, line)}`` over ``base``."""
    base = base or ExperimentConfig()
    for key, (_, line) in entries.items():
        if key not in KNOWN_KEYS:
            raise ConfigParseError(f"unknown key {key!r}", line)

    def convert(key, fn):
        value, line = entries[key]
        try:
            return fn(value)
        except (ValueError, SimulationError) as exc:
            raise ConfigParseError(f"bad value for {key!r}: {exc}", line) from None

    lattice = {f.name: getattr(base.params, f.name) for f in fields(LatticeParams)}
    for key, name in LATTICE_KEYS.items():
        if key in entries:
            lattice[name] = convert(key, _int if key == "n_sites" else _float)
    for key, name in RATIO_KEYS.items():
        if key in entries:
            absolute = [k for k, v in LATTICE_KEYS.items() if v == name][0]
            if absolute in entries:
                raise ConfigParseError(f"give either {key!r} or {absolute!r}, not both", entries[key][1])
            lattice[name] = convert(key, _float) * lattice["drive_frequency"]
    try:
        params = LatticeParams(**lattice)
    except SimulationError as exc:
        line = next((entries[k][1] for k in list(LATTICE_KEYS) + list(RATIO_KEYS) if k in entries), None)
        raise ConfigParseError(str(exc), line) from None

    integ = {f.name: getattr(base.integrator, f.name) for f in fields(IntegratorConfig)}
    for key in INTEGRATOR_KEYS:
        if key in entries:
            integ[key] = convert(key, str if key == "frame" else _int)
    try:
        integrator = IntegratorConfig(**integ)
    except SimulationError as exc:
        line = next((entries[k][1] for k in INTEGRATOR_KEYS if k in entries), None)
        raise ConfigParseError(str(exc), line) from None

    run = {f.name: getattr(base, f.name) for f in fields(ExperimentConfig)
           if f.name not in ("params", "integrator")}
    for key, fn in RUN_KEYS.items():
        if key in entries:
            run[key] = convert(key, fn)

    if "initial_state" in entries and "initial_amplitudes" in entries:
        raise ConfigParseError("give either initial_state or initial_amplitudes", entries["initial_amplitudes"][1])
    if "initial_state" in entries:
        run["initial_state"] = convert("initial_state", _site_label)
    if "initial_amplitudes" in entries:
        run["initial_state"] = convert("initial_amplitudes", _amplitudes)

    cfg = ExperimentConfig(params=params, integrator=integrator, **run)
    _validate(cfg, entries)
    return cfg


def _validate(cfg: ExperimentConfig, entries: dict):
    def fail(msg, *keys):
        line = next((entries[k][1] for k in keys if k in entries), None)
        raise ConfigParseError(msg, line)

    if isinstance(cfg.initial_state, tuple):
        n, _ = cfg.initial_state
        if abs(n) > cfg.params.half_width:
            fail(f"initial site {n} outside the lattice", "initial_state", "n_sites")
    else:
        psi = np.asarray(cfg.initial_state)
        if psi.shape != (cfg.params.dim,):
            fail(f"initial_amplitudes needs {cfg.params.dim} entries, got {psi.size}", "initial_amplitudes")
        if abs(np.vdot(psi, psi).real - 1.0) > NORM_TOLERANCE:
            fail("initial_amplitudes must be normalised to 1", "initial_amplitudes")
    for n, _ in cfg.sites:
        if abs(n) > cfg.params.half_width:
            fail(f"site {n} outside the lattice", "sites", "n_sites")
    if not cfg.t_max > 0:
        fail("t_max must be positive", "t_max")
    if not cfg.delta_t > 0:
        fail("delta_t must be positive", "delta_t")
    if cfg.sweep_axis not in ("drive_ratio", "impurity_ratio"):
        fail("sweep_axis must be drive_ratio or impurity_ratio", "sweep_axis")
    if cfg.sweep_points < 2 or not cfg.sweep_hi > cfg.sweep_lo:
        fail("sweep needs sweep_points >= 2 and sweep_hi > sweep_lo", "sweep_points", "sweep_hi", "sweep_lo")
    if cfg.omega_points < 1 or cfg.omega_lo <= 0 or cfg.omega_hi < cfg.omega_lo:
        fail("omega grid needs omega_points >= 1 and 0 < omega_lo <= omega_hi", "omega_points", "omega_lo", "omega_hi")
    if cfg.delta_deg is not None and cfg.delta_deg <= 0:
        fail("delta_deg must be positive", "delta_deg")


def load_config(path, overrides=()) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)
