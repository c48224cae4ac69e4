"""Compiled fixed-step RK4 loop shared by both integration frames."""
import numba
import numpy as np


@numba.njit(cache=True, nogil=True, fastmath=True)
def _derivative(t, y, out, rows, cols, vals, dn, dci, dcv, ds, dd, f_amp, f_ratio, omega, ph):
    phi = f_ratio * np.sin(omega * t)
    ep = np.exp(1j * phi)
    for k in range(dcv.shape[0]):
        ph[k] = np.exp(1j * dcv[k] * t)
    field = f_amp * np.cos(omega * t)
    dim, ncol = y.shape
    for j in range(dim):
        g = -1j * (ds[j] + field * dd[j])
        for c in range(ncol):
            out[j, c] = g * y[j, c]
    for e in range(rows.shape[0]):
        fac = vals[e] * ph[dci[e]]
        if dn[e] == 1:
            fac *= ep
        elif dn[e] == -1:
            fac *= np.conj(ep)
        fac *= -1j
        r = rows[e]
        s = cols[e]
        for c in range(ncol):
            out[r, c] += fac * y[s, c]


@numba.njit(cache=True, nogil=True, fastmath=True)
def rk4_run(y0, t0, h, nsteps, stride, rows, cols, vals, dn, dci, dcv, ds, dd,
            f_amp, f_ratio, omega):
    """Integrate dy/dt = -i G(t) y for ``nsteps`` steps, sampling every ``stride``.

    ``G`` has diagonal ``ds + F cos(omega t) dd`` and off-diagonal entries
    ``vals[e] * exp(i (dn[e] Phi(t) + dcv[dci[e]] t))`` at ``(rows[e], cols[e])``.
    """
    dim, ncol = y0.shape
    nsamp = nsteps // stride + 1
    samples = np.empty((nsamp, dim, ncol), dtype=np.complex128)
    y = y0.copy()
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)
    tmp = np.empty_like(y)
    ph = np.empty(dcv.shape[0], dtype=np.complex128)
    samples[0] = y
    s = 1
    for step in range(nsteps):
        t = t0 + step * h
        _derivative(t, y, k1, rows, cols, vals, dn, dci, dcv, ds, dd, f_amp, f_ratio, omega, ph)
        for j in range(dim):
            for c in range(ncol):
                tmp[j, c] = y[j, c] + 0.5 * h * k1[j, c]
        _derivative(t + 0.5 * h, tmp, k2, rows, cols, vals, dn, dci, dcv, ds, dd, f_amp, f_ratio, omega, ph)
        for j in range(dim):
            for c in range(ncol):
                tmp[j, c] = y[j, c] + 0.5 * h * k2[j, c]
        _derivative(t + 0.5 * h, tmp, k3, rows, cols, vals, dn, dci, dcv, ds, dd, f_amp, f_ratio, omega, ph)
        for j in range(dim):
            for c in range(ncol):
                tmp[j, c] = y[j, c] + h * k3[j, c]
        _derivative(t + h, tmp, k4, rows, cols, vals, dn, dci, dcv, ds, dd, f_amp, f_ratio, omega, ph)
        for j in range(dim):
            for c in range(ncol):
                y[j, c] += (h / 6.0) * (k1[j, c] + 2.0 * k2[j, c] + 2.0 * k3[j, c] + k4[j, c])
        if (step + 1) % stride == 0:
            samples[s] = y
            s += 1
    return samples
