"""Effective models for the impurity neighbourhood at the collapse points.

Two regimes are covered, each for purely spin-conserving (sin alpha = 0)
or purely spin-flipping (cos alpha = 0) hopping:

* resonant, eps0 = m' omega: first-order three-site chains whose couplings
  are Bessel-renormalised hoppings;
* off-resonant, eps0 = m' omega + u with moderate u: second-order slow
  dynamics in which sites -1 and +1 couple through the impurity with rates
  v**2 chi / omega.

Amplitudes here live in the rotating frame; probabilities equal the
lab-frame ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (EffectiveModelInapplicableError, OutOfRegimeError,
                     ResonanceSingularityError)
from .floquet import fold
from .lattice import DOWN, UP, LatticeParams, drive_phase, parse_spin
from .specfun import bessel_j, bessel_j_orders

MIN_REDUCED_DETUNING = 0.02
MAX_REDUCED_DETUNING = 0.5
CHI_TOLERANCE = 1e-12
CHI_START = 40
CHI_GROWTH = 10
CHI_MAX = 400
SINGULAR_DENOMINATOR = 1e-6


@dataclass(frozen=True)
class ResonanceDecomposition:
    m: int
    m_prime: int
    u: float
    u_prime: float
    epsilon: float  # v / omega


def decompose_resonance(params: LatticeParams) -> ResonanceDecomposition:
    """Write Omega = m omega and eps0 = m' omega + u with |u| <= omega/2."""
    w = params.drive_frequency
    ratio = params.zeeman / w
    m = round(ratio)
    if abs(ratio - m) > 1e-9 or m < 1:
        raise EffectiveModelInapplicableError(
            f"Omega/omega = {ratio:.12g} is not a positive integer"
        )
    m_prime = math.floor(params.impurity / w + 0.5)
    if m_prime < 1:
        raise OutOfRegimeError(f"eps0/omega = {params.impurity / w:.6g} rounds to m' = {m_prime}")
    u = params.impurity - m_prime * w
    return ResonanceDecomposition(int(m), int(m_prime), u, u / w, params.hopping / w)


@dataclass(frozen=True)
class ChiCoefficients:
    chi1: float
    chi2: float
    chi3: float
    chi4: float
    chi5: float
    chi6: float
    truncation: int
    last_term_magnitude: float

    @property
    def values(self) -> tuple:
        return (self.chi1, self.chi2, self.chi3, self.chi4, self.chi5, self.chi6)


def _chi_layout(dec: ResonanceDecomposition):
    """(sign of p in the denominator, constant shift, uses J_p J_-p) per series."""
    m, mp, up = dec.m, dec.m_prime, dec.u_prime
    return (
        (-1, mp + up, True),
        (+1, mp + up, False),
        (+1, -m + mp + up, True),
        (-1, -m + mp + up, False),
        (-1, m + mp + up, True),
        (+1, m + mp + up, False),
    )


def _chi_terms(x: float, dec: ResonanceDecomposition, P: int):
    p = np.arange(-P, P + 1)
    jpos = bessel_j_orders(P, x)
    j = np.concatenate([(jpos[:0:-1] * np.where(np.arange(P, 0, -1) % 2, -1.0, 1.0)), jpos])
    jm = j[::-1]
    terms = []
    for k, (sign, shift, mixed) in enumerate(_chi_layout(dec), start=1):
        den = sign * p + shift
        bad = np.flatnonzero(np.abs(den) < SINGULAR_DENOMINATOR)
        if bad.size:
            i = int(bad[0])
            raise ResonanceSingularityError(f"chi{k}", int(p[i]), float(den[i]))
        num = j * jm if mixed else j * j
        terms.append(num / den)
    return p, terms


def chi_coefficients(drive_ratio: float, dec: ResonanceDecomposition,
                     truncation: int | None = None) -> ChiCoefficients:
    """Sum the six Bessel series over p in [-P, P].

    P starts at 40 and grows by 10 until every series' next term has
    magnitude below 1e-12; pass ``truncation`` to force a fixed window.
    """
    P = CHI_START if truncation is None else int(truncation)
    while True:
        p, terms = _chi_terms(drive_ratio, dec, P + 1)
        edge = np.abs(p) == P + 1
        last = max(float(np.max(np.abs(t[edge]))) for t in terms)
        if truncation is not None or last < CHI_TOLERANCE or P >= CHI_MAX:
            break
        P += CHI_GROWTH
    sums = [float(np.sum(t[~edge])) for t in terms]
    return ChiCoefficients(*sums, truncation=P, last_term_magnitude=last)


def _regime(params: LatticeParams) -> str:
    if params.spin_conserving_only:
        return "conserving"
    if params.spin_flipping_only:
        return "flipping"
    raise EffectiveModelInapplicableError(
        "effective models need either sin(alpha) = 0 or cos(alpha) = 0"
    )


def _label(n, spin):
    return (n, "up" if spin == UP else "down")


@dataclass(frozen=True)
class ThreeSiteModel:
    """Chain |L> - |C> - |R> with real couplings g_L, g_R."""

    basis: tuple
    g_left: float
    g_right: float
    offsets: tuple = (0.0, 0.0, 0.0)

    def hamiltonian(self) -> np.ndarray:
        H = np.diag(np.asarray(self.offsets, dtype=float))
        H[0, 1] = H[1, 0] = self.g_left
        H[1, 2] = H[2, 1] = self.g_right
        return H

    def index(self, label) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        n, spin = label
        key = _label(n, parse_spin(spin))
        return self.basis.index(key)


def resonant_three_site(params: LatticeParams, dec: ResonanceDecomposition | None = None,
                        edge_spin="up") -> ThreeSiteModel:
    """First-order chain for eps0 = m' omega at a collapse point.

    For sin alpha = 0 the chain is {|-1,s>, |0,s>, |1,s>} with couplings
    -v cos(alpha) J_{-m'} and -v cos(alpha) J_{m'}.  For cos alpha = 0 the
    impurity carries the opposite spin: couplings v sin(alpha) J_{m-m'} and
    -v sin(alpha) J_{-m+m'} when the edges are spin up, -v sin(alpha)
    J_{-m-m'} and v sin(alpha) J_{m+m'} when they are spin down.
    """
    dec = dec or decompose_resonance(params)
    if abs(dec.u) > 1e-9 * params.drive_frequency:
        raise EffectiveModelInapplicableError("resonant three-site model needs u = 0")
    regime = _regime(params)
    x, v = params.drive_ratio, params.hopping
    m, mp = dec.m, dec.m_prime
    s_edge = parse_spin(edge_spin)
    if regime == "conserving":
        c = v * math.cos(params.soc_angle)
        basis = (_label(-1, s_edge), _label(0, s_edge), _label(1, s_edge))
        return ThreeSiteModel(basis, -c * bessel_j(-mp, x), -c * bessel_j(mp, x))
    s = v * math.sin(params.soc_angle)
    s_mid = DOWN if s_edge == UP else UP
    basis = (_label(-1, s_edge), _label(0, s_mid), _label(1, s_edge))
    if s_edge == UP:
        return ThreeSiteModel(basis, s * bessel_j(m - mp, x), -s * bessel_j(-m + mp, x))
    return ThreeSiteModel(basis, -s * bessel_j(-m - mp, x), s * bessel_j(m + mp, x))


def three_site_evolve(model: ThreeSiteModel, init, t) -> np.ndarray:
    """Occupation probabilities of the chain, shape ``t.shape + (3,)``.

    With common on-site offsets the propagator is
    P_dark + cos(G t) (1 - P_dark) - i sin(G t) K / G, G = sqrt(g_L^2 + g_R^2).
    """
    t = np.asarray(t, dtype=float)
    k0 = model.index(init)
    gl, gr = model.g_left, model.g_right
    offsets = np.asarray(model.offsets, dtype=float)
    if np.ptp(offsets) > 0:
        w, vecs = np.linalg.eigh(model.hamiltonian())
        amp = np.einsum("ij,...j,j->...i", vecs, np.exp(-1j * np.multiply.outer(t, w)), vecs[k0])
        return np.abs(amp) ** 2
    G = math.hypot(gl, gr)
    e0 = np.zeros(3)
    e0[k0] = 1.0
    if G == 0.0:
        return np.broadcast_to(e0, t.shape + (3,)).copy()
    K = model.hamiltonian() - np.diag(offsets)
    dark = np.array([gr, 0.0, -gl]) / G
    p_dark = dark * dark[k0]
    col = e0 - p_dark
    kcol = K[:, k0] / G
    amp = (p_dark + np.multiply.outer(np.cos(G * t), col)
           - 1j * np.multiply.outer(np.sin(G * t), kcol))
    return np.abs(amp) ** 2


@dataclass
class SlowAmplitudes:
    amplitudes: np.ndarray  # (len(tau), 3)
    tau: np.ndarray
    basis: tuple


@dataclass
class SecondOrderModel:
    """Slow dynamics i dA/dtau = eps^2 M A on the impurity neighbourhood.

    ``blocks`` maps the edge spin ("up"/"down") to ``(basis, M)`` with M the
    dimensionless 3x3 matrix in the basis (|-1>, |0>, |+1>).
    """

    blocks: dict
    epsilon: float
    omega: float

    def generator(self, edge_spin="up") -> np.ndarray:
        return self.epsilon**2 * self.blocks[SPIN_KEYS[parse_spin(edge_spin)]][1]

    def hamiltonian(self, edge_spin="up") -> np.ndarray:
        """Generator in real time, i.e. (v**2 / omega) M."""
        return self.omega * self.generator(edge_spin)

    def basis(self, edge_spin="up") -> tuple:
        return self.blocks[SPIN_KEYS[parse_spin(edge_spin)]][0]

    def edge_rate(self, edge_spin="up") -> float:
        """Effective -1 <-> +1 tunnelling rate v**2 |chi| / omega."""
        return abs(self.hamiltonian(edge_spin)[0, 2])

    def evolve(self, A0, tau, edge_spin="up") -> SlowAmplitudes:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        w, vecs = np.linalg.eigh(self.generator(edge_spin))
        coeff = vecs.T @ np.asarray(A0, dtype=complex)
        amps = (np.exp(-1j * np.multiply.outer(tau, w)) * coeff) @ vecs.T
        return SlowAmplitudes(amps, tau, self.basis(edge_spin))

    def probabilities(self, init, t, edge_spin="up") -> np.ndarray:
        """Probabilities over the block basis in real time ``t`` from a basis state."""
        basis = self.basis(edge_spin)
        if isinstance(init, (int, np.integer)):
            k = int(init)
        else:
            k = basis.index(_label(init[0], parse_spin(init[1])))
        A0 = np.zeros(3, dtype=complex)
        A0[k] = 1.0
        return np.abs(self.evolve(A0, self.omega * np.asarray(t, dtype=float), edge_spin).amplitudes) ** 2


SPIN_KEYS = ("up", "down")


def _edge_block(diag, coupling, impurity_diag):
    return np.array([[diag, 0.0, coupling], [0.0, impurity_diag, 0.0], [coupling, 0.0, diag]])


def _check_moderate(dec: ResonanceDecomposition):
    if abs(dec.u_prime) < MIN_REDUCED_DETUNING:
        raise EffectiveModelInapplicableError(
            f"|u/omega| = {abs(dec.u_prime):.3g} is too close to resonance; use the resonant three-site model"
        )
    if abs(dec.u_prime) > MAX_REDUCED_DETUNING:
        raise EffectiveModelInapplicableError("|u/omega| exceeds 1/2")


def second_order_model(params: LatticeParams, dec: ResonanceDecomposition | None = None,
                       chi: ChiCoefficients | None = None) -> SecondOrderModel:
    """Second-order slow-amplitude model for the off-resonant impurity."""
    dec = dec or decompose_resonance(params)
    regime = _regime(params)
    _check_moderate(dec)
    chi = chi or chi_coefficients(params.drive_ratio, dec)
    if regime == "conserving":
        M = _edge_block(-chi.chi2, -chi.chi1, 2.0 * chi.chi2)
        blocks = {
            key: ((_label(-1, s), _label(0, s), _label(1, s)), M)
            for key, s in zip(SPIN_KEYS, (UP, DOWN))
        }
    else:
        blocks = {
            "up": ((_label(-1, UP), _label(0, DOWN), _label(1, UP)),
                   _edge_block(-chi.chi4, chi.chi3, 2.0 * chi.chi4)),
            "down": ((_label(-1, DOWN), _label(0, UP), _label(1, DOWN)),
                     _edge_block(-chi.chi6, chi.chi5, 2.0 * chi.chi6)),
        }
    return SecondOrderModel(blocks, dec.epsilon, params.drive_frequency)


@dataclass
class AnalyticLevels:
    values: np.ndarray  # folded into [0, omega)
    unfolded: np.ndarray
    labels: tuple
    impurity: np.ndarray  # True for the impurity-bound levels

    def edge_values(self) -> np.ndarray:
        return np.sort(self.values[~self.impurity])


def analytic_quasienergies(params: LatticeParams, dec: ResonanceDecomposition | None = None,
                           chi: ChiCoefficients | None = None) -> AnalyticLevels:
    """Six second-order quasienergies of the impurity neighbourhood.

    Each block eigenvalue E (real time) is shifted by the Zeeman phase of
    the spin on the occupied sites, plus eps0 for the impurity level, then
    folded into [0, omega).  With Omega = omega this reproduces the
    omega/2-offset closed forms.
    """
    dec = dec or decompose_resonance(params)
    _check_moderate(dec)
    _regime(params)
    chi = chi or chi_coefficients(params.drive_ratio, dec)
    model = second_order_model(params, dec, chi)
    half = 0.5 * params.zeeman
    scale = model.omega * model.epsilon**2
    # (coupling series, diagonal series) of each block
    if _regime(params) == "conserving":
        pairs = ((chi.chi1, chi.chi2), (chi.chi1, chi.chi2))
        labels = ("eps1_up", "eps2_up", "eps3_up", "eps1_down", "eps2_down", "eps3_down")
    else:
        pairs = ((chi.chi3, chi.chi4), (chi.chi5, chi.chi6))
        labels = tuple(f"eps{k}" for k in range(1, 7))
    unfolded = []
    for key, (xc, xd) in zip(SPIN_KEYS, pairs):
        basis = model.blocks[key][0]
        s_edge = 1.0 if basis[0][1] == "up" else -1.0
        s_mid = 1.0 if basis[1][1] == "up" else -1.0
        unfolded += [
            scale * (xc - xd) + s_edge * half,
            scale * 2.0 * xd + params.impurity + s_mid * half,
            scale * (-xd - xc) + s_edge * half,
        ]
    imp = [False, True, False] * 2
    unfolded = np.array(unfolded)
    return AnalyticLevels(fold(unfolded, params.drive_frequency), unfolded, labels, np.array(imp))


def analytic_floquet_modes(params: LatticeParams, t: float, spin="up",
                           dec: ResonanceDecomposition | None = None,
                           chi: ChiCoefficients | None = None) -> np.ndarray:
    """Periodic parts (a~_{-1}, a~_0, a~_1) of the three second-order Floquet states.

    Rows follow the analytic level ordering: antisymmetric edge state,
    impurity state, symmetric edge state.  Each row carries the factor
    exp(-i k omega t) that matches the zone representative chosen by
    :func:`analytic_quasienergies`, so ``mode(t) * exp(-i eps t)`` with the
    folded eps is the full solution.
    """
    params_regime = _regime(params)
    if params_regime != "conserving":
        raise EffectiveModelInapplicableError("analytic Floquet modes are given for sin(alpha) = 0")
    levels = analytic_quasienergies(params, dec, chi)
    offset = 0 if parse_spin(spin) == UP else 3
    shift = np.round((levels.unfolded - levels.values) / params.drive_frequency)[offset:offset + 3]
    phi = float(drive_phase(t, params))
    r = 1.0 / math.sqrt(2.0)
    modes = np.array([
        [r * np.exp(1j * phi), 0.0, -r * np.exp(-1j * phi)],
        [0.0, 1.0, 0.0],
        [r * np.exp(1j * phi), 0.0, r * np.exp(-1j * phi)],
    ], dtype=complex)
    return modes * np.exp(-1j * shift * params.drive_frequency * t)[:, None]
