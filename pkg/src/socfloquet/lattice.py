"""Driven spin-orbit-coupled tight-binding chain with a single impurity.

States are complex vectors of length ``2N`` stored site-major with the spin
interleaved: index ``2*i + s`` where ``i = n + (N-1)/2`` and ``s = 0`` (up)
or ``1`` (down).  Units are hbar = 1 with the bare hopping ``v`` as the
energy scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, OutOfRangeError

UP, DOWN = 0, 1
SPIN_NAMES = {"up": UP, "down": DOWN, "u": UP, "d": DOWN, "↑": UP, "↓": DOWN}
SPIN_LABELS = ("up", "down")

# below this |sin| or |cos| the coupling is treated as absent when routing
# to effective models; exact dynamics never uses it
SPECIAL_ANGLE_TOL = 1e-12


def parse_spin(spin) -> int:
    if isinstance(spin, (int, np.integer)) and spin in (UP, DOWN):
        return int(spin)
    try:
        return SPIN_NAMES[str(spin).strip().lower()]
    except KeyError:
        raise InvalidArgumentError(f"unknown spin label {spin!r}") from None


@dataclass(frozen=True)
class LatticeParams:
    """Physical constants of the driven chain.

    Attributes
    ----------
    n_sites : odd number of sites N, labelled n = -(N-1)/2 ... (N-1)/2
    hopping : bare hopping v
    soc_angle : spin-orbit angle alpha (radians)
    zeeman : Zeeman splitting Omega
    impurity : on-site energy eps0 of site n = 0
    drive_amplitude : F in eps'(t) = F cos(omega t)
    drive_frequency : omega
    """

    n_sites: int = 21
    hopping: float = 1.0
    soc_angle: float = 0.0
    zeeman: float = 20.0
    impurity: float = 20.0
    drive_amplitude: float = 0.0
    drive_frequency: float = 20.0

    def __post_init__(self):
        values = (self.hopping, self.soc_angle, self.zeeman, self.impurity,
                  self.drive_amplitude, self.drive_frequency)
        if not all(math.isfinite(float(x)) for x in values):
            raise InvalidArgumentError("all lattice parameters must be finite")
        if int(self.n_sites) != self.n_sites or self.n_sites < 3 or self.n_sites % 2 == 0:
            raise InvalidArgumentError(f"n_sites must be an odd integer >= 3, got {self.n_sites}")
        if self.hopping <= 0:
            raise InvalidArgumentError("hopping must be positive")
        if self.drive_frequency <= 0:
            raise InvalidArgumentError("drive_frequency must be positive")

    @classmethod
    def from_ratios(cls, drive_ratio: float, impurity_ratio: float, omega: float = 20.0,
                    zeeman_ratio: float = 1.0, **kwargs) -> "LatticeParams":
        """Build parameters from F/omega, eps0/omega and Omega/omega."""
        return cls(drive_amplitude=drive_ratio * omega, impurity=impurity_ratio * omega,
                   zeeman=zeeman_ratio * omega, drive_frequency=omega, **kwargs)

    def with_(self, **changes) -> "LatticeParams":
        return replace(self, **changes)

    @property
    def dim(self) -> int:
        return 2 * self.n_sites

    @property
    def half_width(self) -> int:
        return (self.n_sites - 1) // 2

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.drive_frequency

    @property
    def drive_ratio(self) -> float:
        return self.drive_amplitude / self.drive_frequency

    @property
    def spin_conserving_only(self) -> bool:
        return abs(math.sin(self.soc_angle)) < SPECIAL_ANGLE_TOL

    @property
    def spin_flipping_only(self) -> bool:
        return abs(math.cos(self.soc_angle)) < SPECIAL_ANGLE_TOL

    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def index(self, n: int, spin) -> int:
        if abs(n) > self.half_width:
            raise OutOfRangeError(f"site {n} outside lattice of {self.n_sites} sites")
        return 2 * (n + self.half_width) + parse_spin(spin)

    def site_of_index(self) -> np.ndarray:
        """Site label n of every state-vector component."""
        return np.repeat(self.sites(), 2)

    def spin_of_index(self) -> np.ndarray:
        return np.tile([UP, DOWN], self.n_sites)

    def static_diagonal(self) -> np.ndarray:
        """Time-independent on-site energies: eps0*delta_n0 +/- Omega/2."""
        n = self.site_of_index()
        zeeman = np.where(self.spin_of_index() == UP, 0.5, -0.5) * self.zeeman
        return zeeman + np.where(n == 0, self.impurity, 0.0)


def basis_state(params: LatticeParams, n: int, spin) -> np.ndarray:
    psi = np.zeros(params.dim, dtype=complex)
    psi[params.index(n, spin)] = 1.0
    return psi


def drive_field(t, params: LatticeParams):
    """Site-energy slope eps'(t) = F cos(omega t)."""
    return params.drive_amplitude * np.cos(params.drive_frequency * t)


def drive_phase(t, params: LatticeParams):
    """Integrated drive Phi(t) = (F/omega) sin(omega t)."""
    return params.drive_ratio * np.sin(params.drive_frequency * t)


def hopping_matrix(params: LatticeParams) -> np.ndarray:
    """Real symmetric nearest-neighbour part of H in the interleaved basis.

    Sign conventions: the up-row couples to (n+1, down) with +v sin(alpha)
    and to (n-1, down) with -v sin(alpha); the down-row the reverse.
    """
    N, h = params.n_sites, params.half_width
    c = params.hopping * math.cos(params.soc_angle)
    s = params.hopping * math.sin(params.soc_angle)
    V = np.zeros((params.dim, params.dim))
    for i in range(N - 1):
        n = i - h
        up, dn = params.index(n, UP), params.index(n, DOWN)
        up1, dn1 = params.index(n + 1, UP), params.index(n + 1, DOWN)
        V[up, up1] = V[up1, up] = -c
        V[dn, dn1] = V[dn1, dn] = -c
        # i da_{n,up}/dt contains +v sin(a) a_{n+1,down}; i da_{n+1,down}/dt the same
        V[up, dn1] = V[dn1, up] = s
        # i da_{n,down}/dt contains -v sin(a) a_{n+1,up}
        V[dn, up1] = V[up1, dn] = -s
    return V


def apply_hamiltonian(t: float, psi: np.ndarray, params: LatticeParams) -> np.ndarray:
    """Return d(psi)/dt = -i H(t) psi using the nearest-neighbour stencil.

    Sites outside the chain are dropped (open boundaries).
    """
    psi = np.asarray(psi)
    if psi.shape[0] != params.dim:
        raise InvalidArgumentError(f"state has length {psi.shape[0]}, expected {params.dim}")
    a = psi.reshape((params.n_sites, 2) + psi.shape[1:])
    up, dn = a[:, UP], a[:, DOWN]
    c = params.hopping * math.cos(params.soc_angle)
    s = params.hopping * math.sin(params.soc_angle)

    def fwd(x):  # x_{n+1}
        out = np.zeros_like(x)
        out[:-1] = x[1:]
        return out

    def bwd(x):  # x_{n-1}
        out = np.zeros_like(x)
        out[1:] = x[:-1]
        return out

    n = params.sites().reshape((-1,) + (1,) * (psi.ndim - 1)).astype(float)
    onsite = drive_field(t, params) * n + np.where(n == 0, params.impurity, 0.0)
    h_up = -(c * (fwd(up) + bwd(up)) + s * (-fwd(dn) + bwd(dn))) + (onsite + 0.5 * params.zeeman) * up
    h_dn = -(c * (fwd(dn) + bwd(dn)) + s * (fwd(up) - bwd(up))) + (onsite - 0.5 * params.zeeman) * dn
    out = np.empty_like(a, dtype=complex)
    out[:, UP] = -1j * h_up
    out[:, DOWN] = -1j * h_dn
    return out.reshape(psi.shape)


def frame_phases(t, params: LatticeParams) -> np.ndarray:
    """Phases theta_j(t) = n Phi(t) +/- Omega t/2 + eps0 delta_n0 t of the rotating frame."""
    t = np.asarray(t, dtype=float)
    n = params.site_of_index()
    return np.multiply.outer(drive_phase(t, params), n) + np.multiply.outer(t, params.static_diagonal())


@dataclass
class RotatingFrameState:
    amplitudes: np.ndarray
    t: float


def to_rotating_frame(psi: np.ndarray, t: float, params: LatticeParams) -> RotatingFrameState:
    return RotatingFrameState(np.asarray(psi) * np.exp(1j * frame_phases(t, params)), float(t))


def from_rotating_frame(b: RotatingFrameState, params: LatticeParams) -> np.ndarray:
    return b.amplitudes * np.exp(-1j * frame_phases(b.t, params))


def apply_rotating_generator(t: float, b: np.ndarray, params: LatticeParams) -> np.ndarray:
    """d(b)/dt in the rotating frame: -i e^{i theta} V e^{-i theta} b."""
    ph = np.exp(1j * frame_phases(t, params))
    if np.ndim(b) == 2:
        ph = ph[:, None]
    return -1j * ph * (hopping_matrix(params) @ (np.conj(ph) * b))
