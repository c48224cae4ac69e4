"""Quasienergies from the monodromy matrix, parameter sweeps and diagnostics."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgumentError, SpectralAccuracyError
from .lattice import LatticeParams
from .propagator import IntegratorConfig, MonodromyMatrix, _worker_count, monodromy, propagate

MODULUS_TOLERANCE = 1e-6
AXES = {"drive_ratio": "F_over_omega", "impurity_ratio": "eps0_over_omega"}


def fold(values, omega: float) -> np.ndarray:
    """Map energies into the zone [0, omega)."""
    out = np.mod(np.asarray(values, dtype=float), omega)
    return np.where(out >= omega, 0.0, out)


def circular_distance(a, b, omega: float):
    d = np.mod(np.asarray(a) - np.asarray(b), omega)
    return np.minimum(d, omega - d)


@dataclass
class QuasienergySpectrum:
    quasienergies: np.ndarray  # sorted, in [0, omega)
    floquet_modes: np.ndarray  # columns match quasienergies
    eigenvalue_moduli: np.ndarray
    omega: float

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    @property
    def multipliers(self) -> np.ndarray:
        return np.exp(-1j * self.quasienergies * self.period)


def quasienergies(U, omega: float) -> QuasienergySpectrum:
    """Diagonalise U(T, 0) and fold eps = -arg(lambda)/T into [0, omega).

    Eigenvalues are projected onto the unit circle before the phase is
    taken; the raw moduli are kept for diagnostics.
    """
    mat = U.matrix if isinstance(U, MonodromyMatrix) else np.asarray(U)
    w, vecs = np.linalg.eig(mat)
    moduli = np.abs(w)
    worst = float(np.max(np.abs(moduli - 1.0)))
    if worst > MODULUS_TOLERANCE:
        raise SpectralAccuracyError(f"eigenvalue modulus off unity by {worst:.2e}")
    period = 2.0 * np.pi / omega
    eps = fold(-np.angle(w / moduli) / period, omega)
    order = np.argsort(eps, kind="stable")
    vecs = vecs[:, order]
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    return QuasienergySpectrum(eps[order], vecs, moduli[order], float(omega))


def _unwrap(levels: np.ndarray, omega: float) -> np.ndarray:
    """Shift levels so the widest circular gap sits at the zone boundary."""
    x = np.sort(levels)
    gaps = np.diff(np.concatenate([x, [x[0] + omega]]))
    k = int(np.argmax(gaps))
    start = x[(k + 1) % x.size]
    return start + np.mod(levels - start, omega)


def _group_sizes(sorted_values: np.ndarray, tol: float) -> list[int]:
    if sorted_values.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(sorted_values) > tol)
    edges = np.concatenate([[-1], breaks, [sorted_values.size - 1]])
    return [int(n) for n in np.diff(edges)]


@dataclass
class SpectralDiagnostics:
    miniband_width: float
    outlier_indices: np.ndarray
    outlier_values: np.ndarray
    min_gap: float
    degeneracy_multiplicities: tuple
    level_multiplicities: tuple
    valid: bool


def diagnostics(spec: QuasienergySpectrum, delta_deg: float | None = None,
                n_outliers: int = 4, exclude=()) -> SpectralDiagnostics:
    """Separate the miniband from the levels farthest from its median.

    ``exclude`` lists energies whose nearest level is removed before the
    outliers are chosen (e.g. the impurity-bound levels).  Distances are
    measured on the quasienergy circle, so a miniband straddling the zone
    boundary is handled.
    """
    omega = spec.omega
    tol = 1e-6 * omega if delta_deg is None else float(delta_deg)
    levels = np.asarray(spec.quasienergies, dtype=float)
    keep = np.ones(levels.size, dtype=bool)
    for e in exclude:
        d = np.where(keep, circular_distance(levels, e, omega), np.inf)
        keep[int(np.argmin(d))] = False
    idx = np.flatnonzero(keep)
    if idx.size < n_outliers + 1:
        raise InvalidArgumentError(f"need more than {n_outliers} levels, got {idx.size}")
    u = _unwrap(levels[idx], omega)
    dist = np.abs(u - np.median(u))
    order = np.argsort(-dist, kind="stable")
    out, rest = order[:n_outliers], order[n_outliers:]
    valid = bool(dist[out[-1]] - dist[rest[0]] > tol)
    out_u = np.sort(u[out])
    out_idx = idx[out][np.argsort(u[out], kind="stable")]
    all_u = np.sort(_unwrap(levels, omega))
    return SpectralDiagnostics(
        miniband_width=float(u[rest].max() - u[rest].min()),
        outlier_indices=out_idx,
        outlier_values=fold(out_u, omega),
        min_gap=float(np.min(np.diff(out_u))) if n_outliers > 1 else float("nan"),
        degeneracy_multiplicities=tuple(_group_sizes(out_u, tol)),
        level_multiplicities=tuple(_group_sizes(all_u, tol)),
        valid=valid,
    )


def floquet_mode_check(U: MonodromyMatrix, spec: QuasienergySpectrum, params: LatticeParams,
                       cfg: IntegratorConfig | None = None) -> float:
    """Max norm of ``U_cfg(T) v_j - lambda_j v_j`` with the modes re-propagated by ``cfg``."""
    cfg = cfg or U.cfg
    _, out = propagate(spec.floquet_modes, 0.0, params.period, cfg, params, sample=False)
    resid = out[-1] - spec.floquet_modes * spec.multipliers[None, :]
    return float(np.max(np.linalg.norm(resid, axis=0)))


def params_at(params: LatticeParams, axis: str, value: float) -> LatticeParams:
    if axis == "drive_ratio":
        return params.with_(drive_amplitude=value * params.drive_frequency)
    if axis == "impurity_ratio":
        return params.with_(impurity=value * params.drive_frequency)
    raise InvalidArgumentError(f"unknown sweep axis {axis!r}; choose from {sorted(AXES)}")


@dataclass
class SpectrumSweep:
    axis: str
    grid: np.ndarray
    spectra: list
    diagnostics: list = field(default_factory=list)

    @property
    def levels(self) -> np.ndarray:
        return np.array([s.quasienergies for s in self.spectra])

    @property
    def miniband_width(self) -> np.ndarray:
        return np.array([d.miniband_width for d in self.diagnostics])

    def header(self) -> list[str]:
        dim = self.spectra[0].quasienergies.size
        return [AXES[self.axis]] + [f"eps_{k}" for k in range(1, dim + 1)] + ["miniband_width", "min_gap"]

    def rows(self):
        for x, s, d in zip(self.grid, self.spectra, self.diagnostics):
            yield [x, *s.quasienergies, d.miniband_width, d.min_gap]


def spectrum_sweep(params: LatticeParams, axis: str, lo: float, hi: float, n_points: int,
                   cfg: IntegratorConfig | None = None, workers: int | None = 1,
                   delta_deg: float | None = None) -> SpectrumSweep:
    """Quasienergy spectrum on a uniform grid of F/omega or eps0/omega."""
    if n_points < 2 or not hi > lo:
        raise InvalidArgumentError("sweep needs n_points >= 2 and hi > lo")
    params_at(params, axis, lo)  # validates the axis name
    cfg = cfg or IntegratorConfig()
    grid = np.linspace(lo, hi, n_points)

    def task(x):
        p = params_at(params, axis, float(x))
        spec = quasienergies(monodromy(p, cfg), p.drive_frequency)
        return spec, diagnostics(spec, delta_deg)

    workers = _worker_count(workers)
    if workers == 1:
        results = [task(x) for x in grid]
    else:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(task, grid))
    return SpectrumSweep(axis, grid, [r[0] for r in results], [r[1] for r in results])


def track_levels(spectra) -> np.ndarray:
    """Reorder levels along a sweep by maximal eigenvector overlap between neighbours.

    Returns an array ``(n_points, dim)`` where column ``k`` follows one
    adiabatically connected Floquet state.
    """
    first = spectra[0]
    tracked = [first.quasienergies.copy()]
    prev = first.floquet_modes
    for s in spectra[1:]:
        overlap = np.abs(prev.conj().T @ s.floquet_modes) ** 2
        _, col = linear_sum_assignment(-overlap)
        tracked.append(s.quasienergies[col])
        prev = s.floquet_modes[:, col]
    return np.array(tracked)
