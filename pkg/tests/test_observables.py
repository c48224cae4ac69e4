import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from socfloquet.errors import InvalidArgumentError
from socfloquet.lattice import LatticeParams, basis_state
from socfloquet.observables import (ObservableSeries, mean_square_displacement, occupation,
                                    validity_averages)
from socfloquet.propagator import Trajectory, evolve

INERT = 1e-300


def frozen(p, states, t_end=10.0, samples=101):
    t = np.linspace(0.0, t_end, samples)
    return Trajectory(t, np.repeat(np.asarray(states, dtype=complex)[None, :], samples, axis=0), p)


def test_occupation_of_basis_state():
    p = LatticeParams()
    traj = frozen(p, basis_state(p, -1, "up"))
    occ = occupation(traj, -1, "up")
    assert occ.kind == "occupation" and occ.label == "P_-1_up"
    assert np.all(occ.values == 1.0)
    assert np.all(occupation(traj, -1, "down").values == 0.0)


def test_uniform_msd():
    p = LatticeParams()
    psi = np.ones(p.dim) / np.sqrt(p.dim)
    # sum_{n=-10}^{10} n^2 / 21 = 770 / 21
    assert mean_square_displacement(frozen(p, psi)).values == pytest.approx(770 / 21, abs=1e-12)


def test_inert_impurity_start_gives_unit_s1_zero_s2():
    p = LatticeParams(hopping=INERT)
    traj = evolve(basis_state(p, 0, "up"), 0.0, 20.0, params=p)
    v = validity_averages(traj, 20.0)
    assert v.s1 == pytest.approx(1.0, abs=1e-12)
    assert v.s2 == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(v.s1_running.values, 1.0)


def test_edge_start_half_weight():
    p = LatticeParams()
    psi = np.zeros(p.dim, dtype=complex)
    psi[p.index(1, "up")] = psi[p.index(5, "down")] = 1 / np.sqrt(2)
    v = validity_averages(frozen(p, psi), 10.0)
    assert v.s1 == pytest.approx(0.5) and v.s2 == pytest.approx(0.5)
    assert validity_averages(frozen(p, psi), 10.0, spins=["up"]).s2 == pytest.approx(0.5)
    assert validity_averages(frozen(p, psi), 10.0, spins=["down"]).s2 == pytest.approx(0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_s2_never_exceeds_s1(seed):
    rng = np.random.default_rng(seed)
    p = LatticeParams(n_sites=7)
    t = np.linspace(0.0, 5.0, 41)
    states = rng.normal(size=(t.size, p.dim)) + 1j * rng.normal(size=(t.size, p.dim))
    states /= np.linalg.norm(states, axis=1)[:, None]
    v = validity_averages(Trajectory(t, states, p), 5.0)
    assert 0.0 <= v.s2 <= v.s1 <= 1.0 + 1e-12
    assert np.all(v.s2_running.values <= v.s1_running.values + 1e-12)


def test_running_average_uses_only_the_window():
    p = LatticeParams()
    traj = frozen(p, basis_state(p, 0, "up"), t_end=10.0)
    v = validity_averages(traj, 4.0)
    assert v.s1_running.times[-1] == pytest.approx(4.0)


def test_errors():
    p = LatticeParams()
    traj = frozen(p, basis_state(p, 0, "up"), t_end=10.0)
    with pytest.raises(InvalidArgumentError):
        validity_averages(traj, 20.0)
    with pytest.raises(InvalidArgumentError):
        validity_averages(traj, 0.0)
    with pytest.raises(InvalidArgumentError):
        ObservableSeries(np.zeros(3), np.zeros(4), "msd")
    with pytest.raises(InvalidArgumentError):
        ObservableSeries(np.zeros(3), np.zeros(3), "bogus")
