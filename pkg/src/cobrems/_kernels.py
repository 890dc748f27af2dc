"""Per-node tree-level amplitudes for quadrature sweeps.

The second diagram ``g0 (p/ - k/ + m) eps/ u_s(p) / (2 p.k)`` does not depend on
the final electron, so callers precompute it once per photon (``tail``). Per
node only the first diagram and the final spinor bilinear remain. Slashed
products use the 2x2 block form of the Dirac representation:

    a/ psi = (a0 psi_u - (sigma.a) psi_l,  (sigma.a) psi_u - a0 psi_l)

Both backends return identical layouts:

    amp[node, branch, s_final, s_initial, pol]  complex
    q2[node, branch]                            |q|^2 in keV^2

Nodes with ``q2 <= q_min_sq`` get zero amplitude; callers count them.
"""

from __future__ import annotations

import numpy as np

from ._backend import HAVE_NUMBA


def _sigma_dot_np(a, chi):
    # a: (..., 3) real, chi: (..., 2) complex
    c0 = a[..., 2] * chi[..., 0] + (a[..., 0] - 1j * a[..., 1]) * chi[..., 1]
    c1 = (a[..., 0] + 1j * a[..., 1]) * chi[..., 0] - a[..., 2] * chi[..., 1]
    return np.stack((c0, c1), axis=-1)


def slash_apply_np(a, psi):
    """``a/ psi`` for real four-vectors ``a`` (..., 4) and spinors ``psi`` (..., 4)."""
    up = psi[..., :2]
    lo = psi[..., 2:]
    a0 = a[..., :1]
    return np.concatenate(
        (a0 * up - _sigma_dot_np(a[..., 1:], lo), _sigma_dot_np(a[..., 1:], up) - a0 * lo),
        axis=-1,
    )


def final_spinors_np(r_dirs, E_r, r_mag, m):
    """``u_s(r)`` for both spins at every node: (n, 2, 4) complex."""
    n = r_dirs.shape[0]
    norm = np.sqrt(E_r + m)
    r3 = (r_mag / norm) * r_dirs
    out = np.zeros((n, 2, 4), dtype=np.complex128)
    out[:, 0, 0] = norm
    out[:, 1, 1] = norm
    out[:, 0, 2] = r3[:, 2]
    out[:, 0, 3] = r3[:, 0] + 1j * r3[:, 1]
    out[:, 1, 2] = r3[:, 0] - 1j * r3[:, 1]
    out[:, 1, 3] = -r3[:, 2]
    return out


def branch_amplitudes_np(g0u, tail, eps, k, pvecs, r_dirs, E_r, r_mag, m, coupling, q_min_sq):
    n = r_dirs.shape[0]
    nb, npol = tail.shape[0], tail.shape[1]
    r3 = r_mag * r_dirs
    rk = E_r * k[0] - r3 @ k[1:]
    a = np.empty((n, 4))
    a[:, 0] = E_r + k[0]
    a[:, 1:] = r3 + k[1:]
    ur = final_spinors_np(r_dirs, E_r, r_mag, m)
    # ubar.w = conj(u_up).w_up - conj(u_lo).w_lo
    ubar = np.conj(ur)
    ubar[:, :, 2:] *= -1.0

    amp = np.empty((n, nb, 2, 2, npol), dtype=np.complex128)
    q2 = np.empty((n, nb))
    for b in range(nb):
        qv = pvecs[b] - r3 - k[1:]
        q2[:, b] = np.einsum("ij,ij->i", qv, qv)
        safe = q2[:, b] > q_min_sq
        pref = np.where(safe, -1j * coupling / np.where(safe, q2[:, b], 1.0), 0.0)
        for s in range(2):
            x = slash_apply_np(a, np.broadcast_to(g0u[b, s], (n, 4))) + m * g0u[b, s]
            for pol in range(npol):
                y = slash_apply_np(np.broadcast_to(eps[pol], (n, 4)), x) / (2.0 * rk)[:, None]
                w = y - tail[b, pol, s]
                amp[:, b, :, s, pol] = pref[:, None] * np.einsum("nsi,ni->ns", ubar, w)
    return amp, q2


if HAVE_NUMBA:
    import numba

    @numba.njit(cache=True, inline="always")
    def _slash_nb(a0, a1, a2, a3, p, out):
        # sigma.a acting on lower and upper halves
        sl0 = a3 * p[2] + complex(a1, -a2) * p[3]
        sl1 = complex(a1, a2) * p[2] - a3 * p[3]
        su0 = a3 * p[0] + complex(a1, -a2) * p[1]
        su1 = complex(a1, a2) * p[0] - a3 * p[1]
        out[0] = a0 * p[0] - sl0
        out[1] = a0 * p[1] - sl1
        out[2] = su0 - a0 * p[2]
        out[3] = su1 - a0 * p[3]

    @numba.njit(cache=True, parallel=True)
    def _branch_amplitudes_nb(g0u, tail, eps, k, pvecs, r_dirs, E_r, r_mag, m, coupling, q_min_sq):
        n = r_dirs.shape[0]
        nb = tail.shape[0]
        npol = tail.shape[1]
        amp = np.zeros((n, nb, 2, 2, npol), dtype=np.complex128)
        q2 = np.empty((n, nb))
        norm = np.sqrt(E_r + m)
        for i in numba.prange(n):
            x = np.empty(4, dtype=np.complex128)
            y = np.empty(4, dtype=np.complex128)
            ubar = np.empty((2, 4), dtype=np.complex128)
            r1 = r_mag * r_dirs[i, 0]
            r2 = r_mag * r_dirs[i, 1]
            r3 = r_mag * r_dirs[i, 2]
            rk = E_r * k[0] - r1 * k[1] - r2 * k[2] - r3 * k[3]
            inv2rk = 1.0 / (2.0 * rk)
            a0 = E_r + k[0]
            a1 = r1 + k[1]
            a2 = r2 + k[2]
            a3 = r3 + k[3]
            c1 = r1 / norm
            c2 = r2 / norm
            c3 = r3 / norm
            ubar[0, 0] = norm
            ubar[0, 1] = 0.0
            ubar[0, 2] = -c3
            ubar[0, 3] = -complex(c1, -c2)
            ubar[1, 0] = 0.0
            ubar[1, 1] = norm
            ubar[1, 2] = -complex(c1, c2)
            ubar[1, 3] = c3
            for b in range(nb):
                qx = pvecs[b, 0] - r1 - k[1]
                qy = pvecs[b, 1] - r2 - k[2]
                qz = pvecs[b, 2] - r3 - k[3]
                qq = qx * qx + qy * qy + qz * qz
                q2[i, b] = qq
                if qq <= q_min_sq:
                    continue
                pref = complex(0.0, -coupling / qq)
                for s in range(2):
                    _slash_nb(a0, a1, a2, a3, g0u[b, s], x)
                    for j in range(4):
                        x[j] += m * g0u[b, s, j]
                    for pol in range(npol):
                        _slash_nb(eps[pol, 0], eps[pol, 1], eps[pol, 2], eps[pol, 3], x, y)
                        for sf in range(2):
                            acc = 0.0j
                            for j in range(4):
                                acc += ubar[sf, j] * (y[j] * inv2rk - tail[b, pol, s, j])
                            amp[i, b, sf, s, pol] = pref * acc
        return amp, q2

    def branch_amplitudes(g0u, tail, eps, k, pvecs, r_dirs, E_r, r_mag, m, coupling, q_min_sq):
        return _branch_amplitudes_nb(
            np.ascontiguousarray(g0u, dtype=np.complex128),
            np.ascontiguousarray(tail, dtype=np.complex128),
            np.ascontiguousarray(eps, dtype=np.float64),
            np.ascontiguousarray(k, dtype=np.float64),
            np.ascontiguousarray(pvecs, dtype=np.float64),
            np.ascontiguousarray(r_dirs, dtype=np.float64),
            float(E_r), float(r_mag), float(m), float(coupling), float(q_min_sq),
        )

else:
    branch_amplitudes = branch_amplitudes_np
