"""Acceptance criteria, each checked at its stated tolerance.

Every test records one pass/fail line (printed in the terminal summary)
before asserting, so a failing criterion still reports its numbers.
"""
import filecmp
import math
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.special import jv

from conftest import random_state, record
from test_lattice import dense_hamiltonian
from socfloquet import effective as eff
from socfloquet.floquet import diagnostics, floquet_mode_check, quasienergies
from socfloquet.lattice import LatticeParams, apply_hamiltonian, basis_state
from socfloquet.observables import mean_square_displacement
from socfloquet.propagator import IntegratorConfig, evolve, monodromy
from socfloquet.recipes import get_recipe, run_recipe, with_overrides, write_recipe
from socfloquet.runner import revival

J0_ZEROS = (2.404825557695773, 5.520078110286311)
J1_ZEROS = (3.8317059702075125, 7.015586669815619)
GRID_STEP = 0.05


def _local_minima(y):
    y = np.asarray(y)
    return np.flatnonzero((y[1:-1] <= y[:-2]) & (y[1:-1] <= y[2:])) + 1


# --- 1 ---------------------------------------------------------------------

@pytest.mark.parametrize("name,targets", [("figure1a", (2.405, 5.5201)), ("figure1c", (3.8317, 7.0156))])
def test_criterion_1_collapse_points(name, targets):
    start = time.perf_counter()
    sweep = run_recipe(get_recipe(name))[""].data["sweep"]
    elapsed = time.perf_counter() - start
    x = sweep.grid[_local_minima(sweep.miniband_width)]
    found = [float(x[np.argmin(np.abs(x - t))]) for t in targets]
    ok = all(abs(f - t) <= GRID_STEP + 1e-12 for f, t in zip(found, targets)) and elapsed <= 300
    record(1, ok, f"{name} minima near {targets} at {found}, {elapsed:.0f}s")
    assert ok


# --- 2 ---------------------------------------------------------------------

@pytest.mark.parametrize("x,alpha,expected", [(J0_ZEROS[0], 0.0, (2, 2)), (J1_ZEROS[0], math.pi / 2, (1, 1, 1, 1))])
def test_criterion_2_outlier_degeneracy(x, alpha, expected):
    p = LatticeParams.from_ratios(x, 1.0, soc_angle=alpha)
    d = diagnostics(quasienergies(monodromy(p), p.drive_frequency), 1e-6 * p.drive_frequency)
    ok = d.degeneracy_multiplicities == expected and d.valid
    record(2, ok, f"F/omega={x:.4f}: multiplicities {d.degeneracy_multiplicities}")
    assert ok


# --- 3 ---------------------------------------------------------------------

def test_criterion_3_resonant_oscillation():
    res = run_recipe(get_recipe("figure4a"))[""]
    table = res.table("trajectory")
    t = table.column("t")
    p0 = table.column("P_0_up")
    pm1 = table.column("P_-1_up")
    when, height = revival(t, pm1)
    predicted = 2 * math.pi / (math.sqrt(2) * abs(jv(1, 2.405)))
    ok = abs(p0.max() - 0.5) <= 0.05 and height >= 0.95 and abs(when / predicted - 1) <= 0.05
    record(3, ok, f"max P0={p0.max():.3f}, revival {height:.3f} at t={when:.3f} vs {predicted:.3f}")
    assert ok


# --- 4 ---------------------------------------------------------------------

@pytest.mark.parametrize("name", ["figure5a", "figure5b"])
def test_criterion_4_second_order_rabi(name):
    res = run_recipe(get_recipe(name))[""]
    model = res.data["model"]
    table = res.table("effective")
    t = table.column("t")
    p1 = table.column("P_exact_1_up")
    centre = [h for h in table.header if h.startswith("P_exact_0_")][0]
    p0 = table.column(centre)
    rabi = table.column("rabi_transfer")
    period = math.pi / model.edge_rate("up")
    window = t <= period
    dev = float(np.max(np.abs(p1[window] - rabi[window])))
    ok = p1.max() >= 0.9 and dev <= 0.05 and p0.max() <= 0.1
    record(4, ok, f"{name}: max P1={p1.max():.3f}, deviation {dev:.3f} over period {period:.2f}, "
                  f"max P0={p0.max():.3f}")
    assert ok


# --- 5 ---------------------------------------------------------------------

@pytest.mark.parametrize("name,expected", [("figure6a", (2, 2)), ("figure6b", (1, 1, 1, 1))])
def test_criterion_5_analytic_levels(name, expected):
    res = run_recipe(get_recipe(name))[""]
    sweep = res.data["sweep"]
    row = int(np.argmin(np.abs(sweep.grid - np.mean(sweep.grid))))
    levels = res.table("levels")
    dev = levels.column("max_deviation")[row]
    p = get_recipe(name).steps[0][1].params.with_(drive_amplitude=sweep.grid[row] * 20.0)
    an = eff.analytic_quasienergies(p)
    d = diagnostics(sweep.spectra[row], exclude=an.values[an.impurity])
    ok = dev <= 2e-2 and d.degeneracy_multiplicities == expected
    record(5, ok, f"{name}: max |analytic - numeric| = {dev:.4f}, multiplicities {d.degeneracy_multiplicities}")
    assert ok


# --- 6 ---------------------------------------------------------------------

@pytest.mark.parametrize("name", ["figure3a", "figure3b", "figure3c", "figure3d"])
def test_criterion_6_localization(name):
    res = run_recipe(get_recipe(name))
    on = res["_collapse"].table("trajectory").column("msd").max()
    off = res["_off"].table("trajectory").column("msd").max()
    ok = on <= 1.2 and off >= 5
    record(6, ok, f"{name}: max <n^2> {on:.3f} at collapse, {off:.1f} at F/omega=1.5")
    assert ok


# --- 7 ---------------------------------------------------------------------

@pytest.mark.parametrize("name", ["figure7a", "figure7b"])
def test_criterion_7_validity_map(name):
    table = run_recipe(get_recipe(name))[""].table("validity")
    omega = table.column("omega")
    s1, s2 = table.column("S1"), table.column("S2")
    hi = int(np.flatnonzero(np.isclose(omega, 20.0))[0])
    lo = int(np.flatnonzero(np.isclose(omega, 4.0))[0])
    ok = s1[hi] >= 0.95 and s2[hi] >= 0.95 and min(s1[lo], s2[lo]) < 0.9
    record(7, ok, f"{name}: omega=20 S1={s1[hi]:.3f} S2={s2[hi]:.3f}; omega=4 S1={s1[lo]:.3f} S2={s2[lo]:.3f}")
    assert ok


# --- 8 ---------------------------------------------------------------------

def test_criterion_8a_norm(conserving, flipping):
    rng = np.random.default_rng(8)
    worst = 0.0
    for p in (conserving, flipping):
        traj = evolve(random_state(p.dim, rng), 0.0, 200.0, params=p)
        worst = max(worst, float(np.max(np.abs(traj.norms() - 1))))
    record(8, worst <= 1e-8, f"(a) norm drift {worst:.1e}")
    assert worst <= 1e-8


def test_criterion_8b_unitarity(conserving, flipping):
    worst = max(monodromy(p).unitarity_error() for p in (conserving, flipping))
    record(8, worst <= 1e-8, f"(b) unitarity {worst:.1e}")
    assert worst <= 1e-8


def test_criterion_8c_spin_closure(conserving):
    traj = evolve(basis_state(conserving, -1, "up"), 0.0, 100.0, params=conserving)
    down = conserving.spin_of_index() == 1
    leak = float(traj.probabilities()[:, down].sum(axis=1).max())
    record(8, leak <= 1e-10, f"(c) P_down {leak:.1e}")
    assert leak <= 1e-10


def test_criterion_8d_parity(flipping):
    traj = evolve(basis_state(flipping, -1, "up"), 0.0, 100.0, params=flipping)
    parity = (flipping.site_of_index() + flipping.spin_of_index()) % 2
    wrong = float(traj.probabilities()[:, parity == 0].sum(axis=1).max())
    record(8, wrong <= 1e-10, f"(d) off-parity weight {wrong:.1e}")
    assert wrong <= 1e-10


def test_criterion_8e_dense_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for alpha in (0.0, 0.7, math.pi / 2):
        p = LatticeParams.from_ratios(2.1, 1.3, soc_angle=alpha, hopping=0.8)
        for t in rng.uniform(0, 1, 4):
            psi = random_state(p.dim, rng)
            worst = max(worst, float(np.max(np.abs(1j * apply_hamiltonian(t, psi, p) - dense_hamiltonian(p, t) @ psi))))
    record(8, worst <= 1e-13, f"(e) dense oracle {worst:.1e}")
    assert worst <= 1e-13


def test_criterion_8f_chi_certificates():
    worst = 0.0
    for up in (0.02, 0.2, 0.5):
        dec = eff.ResonanceDecomposition(1, 1, up * 20, up, 0.05)
        for x in np.linspace(0, 8, 33):
            worst = max(worst, eff.chi_coefficients(float(x), dec).last_term_magnitude)
    record(8, worst < 1e-12, f"(f) chi certificate {worst:.1e}")
    assert worst < 1e-12


def test_criterion_8g_rk4_order(conserving):
    psi = basis_state(conserving, -1, "up")
    ref = evolve(psi, 0.0, 5.0, IntegratorConfig(4096, 1), conserving).final
    errs = [np.linalg.norm(evolve(psi, 0.0, 5.0, IntegratorConfig(s, 1), conserving).final - ref)
            for s in (128, 256)]
    ratio = errs[0] / errs[1]
    ok = 12 <= ratio <= 20
    record(8, ok, f"(g) RK4 error ratio {ratio:.1f}")
    assert ok


def test_criterion_8h_floquet_residual(conserving, flipping):
    worst = 0.0
    for p in (conserving, flipping):
        U = monodromy(p)
        worst = max(worst, floquet_mode_check(U, quasienergies(U, p.drive_frequency), p))
    record(8, worst < 1e-7, f"(h) Floquet residual {worst:.1e}")
    assert worst < 1e-7


def test_criterion_8i_csv_determinism(tmp_path):
    recipe = with_overrides(get_recipe("figure3c"), t_max=2.0)
    a = write_recipe(recipe, tmp_path / "a")
    b = write_recipe(with_overrides(recipe, workers=1), tmp_path / "b")
    same = all(filecmp.cmp(x, y, shallow=False) for x, y in zip(a, b)) and len(a) == len(b) > 0
    record(8, same, f"(i) {len(a)} CSV files byte-identical")
    assert same


# --- 9 ---------------------------------------------------------------------

@pytest.mark.parametrize("name", ["figure5a", "figure5b"])
def test_criterion_9_impurity_capture(name):
    cfg = replace(get_recipe(name).steps[0][1], run="evolve", initial_state=(0, "up"))
    traj = evolve(cfg.initial_vector(), 0.0, 100.0, cfg.integrator, cfg.params)
    p0 = traj.probabilities()[:, cfg.params.index(0, "up")]
    ok = p0.min() >= 0.95
    record(9, ok, f"{name} start |0,up>: min P0 = {p0.min():.3f} for t <= 100")
    assert ok
