"""Fixed-step RK4 time evolution and the one-period monodromy operator.

By default the integrator advances the rotating-frame amplitudes
``b = exp(i theta(t)) a``.  The on-site part of H(t) (tilt, Zeeman,
impurity) is then carried exactly by the phases and RK4 only sees the
hopping, which keeps the step error independent of the drive amplitude and
of the distance from the chain centre.  ``frame="lab"`` integrates the
amplitude equations as written and serves as the independent cross-check.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import IntegrationAccuracyError, InvalidArgumentError
from .lattice import LatticeParams, frame_phases, hopping_matrix

NORM_TOLERANCE = 1e-6
FRAMES = ("rotating", "lab")


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    Production runs should keep ``steps_per_period >= 256``; the
    acceptance tolerances assume the default 4096.
    """

    steps_per_period: int = 4096
    samples_per_period: int = 64
    frame: str = "rotating"

    def __post_init__(self):
        if self.steps_per_period < 1 or self.samples_per_period < 1:
            raise InvalidArgumentError("steps and samples per period must be positive")
        if self.steps_per_period % self.samples_per_period:
            raise InvalidArgumentError("steps_per_period must be a multiple of samples_per_period")
        if self.frame not in FRAMES:
            raise InvalidArgumentError(f"frame must be one of {FRAMES}")

    @property
    def stride(self) -> int:
        return self.steps_per_period // self.samples_per_period

    def refined(self, factor: int = 2) -> "IntegratorConfig":
        return IntegratorConfig(self.steps_per_period * factor, self.samples_per_period, self.frame)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, 2N), lab-frame amplitudes
    params: LatticeParams

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.states) ** 2


@dataclass
class MonodromyMatrix:
    matrix: np.ndarray
    params: LatticeParams
    cfg: IntegratorConfig

    def unitarity_error(self) -> float:
        U = self.matrix
        return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def _generator_terms(params: LatticeParams, frame: str):
    V = hopping_matrix(params)
    rows, cols = np.nonzero(V)
    vals = V[rows, cols].astype(np.complex128)
    n = params.site_of_index()
    diag = params.static_diagonal()
    if frame == "rotating":
        dn = (n[rows] - n[cols]).astype(np.int64)
        dc = diag[rows] - diag[cols]
        dcv, dci = np.unique(dc, return_inverse=True)
        ds = np.zeros(params.dim)
        dd = np.zeros(params.dim)
    else:
        dn = np.zeros(rows.size, dtype=np.int64)
        dcv = np.zeros(1)
        dci = np.zeros(rows.size, dtype=np.int64)
        ds = diag.astype(float)
        dd = n.astype(float)
    return (rows.astype(np.int64), cols.astype(np.int64), vals, dn,
            dci.astype(np.int64), dcv.astype(float), ds, dd)


def _grid(t0: float, t1: float, cfg: IntegratorConfig, params: LatticeParams, sample: bool):
    n_samples = max(1, math.ceil((t1 - t0) / params.period * cfg.samples_per_period - 1e-9))
    nsteps = n_samples * cfg.stride
    stride = cfg.stride if sample else nsteps
    return nsteps, stride


def propagate(Y0: np.ndarray, t0: float, t1: float, cfg: IntegratorConfig,
              params: LatticeParams, sample: bool = True):
    """Propagate a block of lab-frame column states; returns (times, samples)."""
    Y0 = np.asarray(Y0, dtype=np.complex128)
    if Y0.ndim != 2 or Y0.shape[0] != params.dim:
        raise InvalidArgumentError(f"expected a ({params.dim}, k) block of states")
    if not t1 > t0:
        raise InvalidArgumentError("t1 must exceed t0")
    nsteps, stride = _grid(t0, t1, cfg, params, sample)
    h = (t1 - t0) / nsteps
    terms = _generator_terms(params, cfg.frame)
    rotating = cfg.frame == "rotating"
    y0 = Y0 * np.exp(1j * frame_phases(t0, params))[:, None] if rotating else Y0.copy()
    out = _kernels.rk4_run(
        np.ascontiguousarray(y0), float(t0), float(h), int(nsteps), int(stride), *terms,
        float(params.drive_amplitude), float(params.drive_ratio), float(params.drive_frequency),
    )
    times = t0 + h * stride * np.arange(out.shape[0])
    times[-1] = t1
    if rotating:
        out = out * np.exp(-1j * frame_phases(times, params))[:, :, None]
    return times, out


def evolve(psi0: np.ndarray, t0: float, t1: float, cfg: IntegratorConfig | None = None,
           params: LatticeParams | None = None) -> Trajectory:
    """Integrate the amplitude equations from ``t0`` to ``t1``.

    Samples are returned on a uniform grid of ``cfg.samples_per_period``
    points per drive period, ending exactly at ``t1``.
    """
    cfg = cfg or IntegratorConfig()
    params = params or LatticeParams()
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (params.dim,):
        raise InvalidArgumentError(f"state has shape {psi0.shape}, expected ({params.dim},)")
    times, out = propagate(psi0[:, None], t0, t1, cfg, params)
    traj = Trajectory(times, out[:, :, 0], params)
    n0 = float(np.vdot(psi0, psi0).real)
    drift = abs(traj.norms()[-1] - n0)
    if drift > NORM_TOLERANCE:
        raise IntegrationAccuracyError(
            f"norm drifted by {drift:.2e}; increase steps_per_period (now {cfg.steps_per_period})"
        )
    return traj


def _worker_count(workers):
    if workers is None:
        env = os.environ.get("SIM_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def monodromy(params: LatticeParams, cfg: IntegratorConfig | None = None,
              workers: int | None = 1) -> MonodromyMatrix:
    """One-period evolution operator U(T, 0), built column by column.

    Columns are split into contiguous chunks that run on separate threads
    (the compiled kernel releases the GIL); results are placed by basis
    index so the matrix does not depend on scheduling.
    """
    cfg = cfg or IntegratorConfig()
    dim = params.dim
    workers = min(_worker_count(workers), dim)
    chunks = np.array_split(np.arange(dim), workers)
    eye = np.eye(dim, dtype=np.complex128)

    def run(idx):
        _, out = propagate(eye[:, idx], 0.0, params.period, cfg, params, sample=False)
        return out[-1]

    U = np.empty((dim, dim), dtype=np.complex128)
    if workers == 1:
        U[:, :] = run(chunks[0])
    else:
        with ThreadPoolExecutor(workers) as pool:
            for idx, block in zip(chunks, pool.map(run, chunks)):
                U[:, idx] = block
    M = MonodromyMatrix(U, params, cfg)
    err = M.unitarity_error()
    if err > NORM_TOLERANCE:
        raise IntegrationAccuracyError(
            f"monodromy unitarity error {err:.2e}; increase steps_per_period"
        )
    return M
