"""Occupations, mean-square displacement and time-averaged validity measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .lattice import parse_spin
from .propagator import Trajectory

KINDS = ("occupation", "msd", "s1_running", "s2_running")


@dataclass
class ObservableSeries:
    times: np.ndarray
    values: np.ndarray
    kind: str
    label: str = ""

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise InvalidArgumentError("times and values must have equal length")
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown observable kind {self.kind!r}")


def occupation(traj: Trajectory, n: int, spin) -> ObservableSeries:
    """P_{n,s}(t) = |a_{n,s}(t)|^2 on the trajectory grid."""
    k = traj.params.index(n, spin)
    s = "up" if parse_spin(spin) == 0 else "down"
    return ObservableSeries(traj.times, np.abs(traj.states[:, k]) ** 2, "occupation", f"P_{n}_{s}")


def mean_square_displacement(traj: Trajectory) -> ObservableSeries:
    """<n^2>(t) = sum over sites and spins of n^2 P_{n,s}."""
    n2 = traj.params.site_of_index().astype(float) ** 2
    return ObservableSeries(traj.times, traj.probabilities() @ n2, "msd", "msd")


def _cumulative_trapezoid(y, t):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


@dataclass
class ValidityAverages:
    s1: float
    s2: float
    s1_running: ObservableSeries
    s2_running: ObservableSeries


def validity_averages(traj: Trajectory, delta_t: float, spins=None) -> ValidityAverages:
    """Time averages over [t0, t0 + delta_t] of the weight on sites {-1, 0, 1} and {-1, 1}.

    ``spins`` restricts the spin sum (default: both).  Running averages
    (1/t') times the integral up to t' are returned alongside, so a single
    trajectory serves every shorter window.
    """
    t = traj.times
    if delta_t <= 0 or t[-1] - t[0] < delta_t * (1 - 1e-12):
        raise InvalidArgumentError(
            f"trajectory spans {t[-1] - t[0]:.6g}, shorter than delta_t = {delta_t:.6g}"
        )
    params = traj.params
    n = params.site_of_index()
    spin_mask = np.ones(params.dim, dtype=bool)
    if spins is not None:
        allowed = {parse_spin(s) for s in spins}
        spin_mask = np.isin(params.spin_of_index(), list(allowed))
    P = traj.probabilities()
    near = P[:, (np.abs(n) <= 1) & spin_mask].sum(axis=1)
    edges = P[:, (np.abs(n) == 1) & spin_mask].sum(axis=1)
    end = int(np.searchsorted(t, t[0] + delta_t * (1 - 1e-12)))
    tt = t[: end + 1]
    elapsed = tt - tt[0]
    runs = []
    for y in (near[: end + 1], edges[: end + 1]):
        acc = _cumulative_trapezoid(y, tt)
        avg = np.empty_like(acc)
        avg[0] = y[0]
        avg[1:] = acc[1:] / elapsed[1:]
        runs.append(avg)
    return ValidityAverages(
        float(runs[0][-1]), float(runs[1][-1]),
        ObservableSeries(tt, runs[0], "s1_running", "S1"),
        ObservableSeries(tt, runs[1], "s2_running", "S2"),
    )
