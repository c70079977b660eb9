"""Hot loops with a numba path and a pure-numpy fallback.

Set ``FLUXCANTILEVER_DISABLE_NUMBA=1`` to force the numpy path. Both paths
implement the same arithmetic; they agree to rounding, not bitwise.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("FLUXCANTILEVER_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

CONVERGED, STALLED, FAILED = 0, 1, 2

TWO_PI = 2.0 * np.pi


# --- numpy implementations ------------------------------------------------

def _potential_grid_np(phi, theta, ba, L, ej, phi0, k_theta, theta0):
    P = phi[:, None]
    T = theta[None, :]
    r = P - ba * np.cos(T)
    return (r * r / (2.0 * L) + ej * (1.0 - np.cos(TWO_PI * P / phi0))
            + 0.5 * k_theta * (T - theta0) ** 2)


def _newton_np(phi, theta, ba, L, ej, phi0, k_theta, theta0, max_iter,
               gtol, max_step_phi, max_step_theta):
    phi = phi.astype(np.float64).copy()
    theta = theta.astype(np.float64).copy()
    n = phi.size
    status = np.full(n, FAILED, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    eps = np.finfo(float).eps
    q = TWO_PI / phi0
    fscale = ej / phi0
    for it in range(max_iter + 1):
        if not active.any():
            break
        P = phi[active]
        T = theta[active]
        s, c = np.sin(T), np.cos(T)
        r = (P - ba * c) / L
        g1 = r + ej * q * np.sin(q * P)
        g2 = r * ba * s + k_theta * (T - theta0)
        done = (np.abs(g1) < gtol * fscale) & (np.abs(g2) < gtol * ej)
        # below the rounding noise of the gradient evaluation itself
        mag = (np.abs(P) + np.abs(ba * c) + np.abs(ba * s * T)) / L
        f1 = 8 * eps * (mag + ej * q * q * np.abs(P))
        f2 = 8 * eps * (mag * np.abs(ba * s) + k_theta * (np.abs(T) + abs(theta0)))
        stalled = ~done & (np.abs(g1) <= np.maximum(gtol * fscale, f1)) & (np.abs(g2) <= np.maximum(gtol * ej, f2))
        idx = np.flatnonzero(active)
        status[idx[done]] = CONVERGED
        status[idx[stalled]] = STALLED
        iters[idx[done | stalled]] = it
        done = done | stalled
        if it == max_iter:
            break
        h11 = 1.0 / L + ej * q * q * np.cos(q * P)
        h12 = ba * s / L
        h22 = (ba * s) ** 2 / L + r * ba * c + k_theta
        det = h11 * h22 - h12 * h12
        with np.errstate(divide="ignore", invalid="ignore"):
            dP = -(h22 * g1 - h12 * g2) / det
            dT = -(h11 * g2 - h12 * g1) / det
        scale = np.maximum(1.0, np.maximum(np.abs(dP) / max_step_phi, np.abs(dT) / max_step_theta))
        dP = dP / scale
        dT = dT / scale
        bad = ~(np.isfinite(dP) & np.isfinite(dT))
        keep = ~(done | bad)
        Pn = P + dP
        Tn = T + dT
        out = keep & (np.abs(Tn) > np.pi)
        keep &= ~out
        phi[idx[keep]] = Pn[keep]
        theta[idx[keep]] = Tn[keep]
        iters[idx[keep]] = it + 1
        active[idx[~keep]] = False
    return phi, theta, status, iters


def _stencil_np(nx, ny, cx, cy, vdiag):
    # index = i * ny + j, i along x (phi), j along y (theta)
    n = nx * ny
    idx = np.arange(n).reshape(nx, ny)
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [vdiag.ravel() + 2.0 * cx + 2.0 * cy]
    for a, b, w in ((idx[1:, :], idx[:-1, :], -cx), (idx[:, 1:], idx[:, :-1], -cy)):
        a = a.ravel()
        b = b.ravel()
        rows += [a, b]
        cols += [b, a]
        vals += [np.full(a.size, w), np.full(a.size, w)]
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


# --- numba implementations ------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _potential_grid_nb(phi, theta, ba, L, ej, phi0, k_theta, theta0):
        out = np.empty((phi.size, theta.size))
        q = TWO_PI / phi0
        for j in range(theta.size):
            c = ba * np.cos(theta[j])
            mech = 0.5 * k_theta * (theta[j] - theta0) ** 2
            for i in range(phi.size):
                r = phi[i] - c
                out[i, j] = r * r / (2.0 * L) + ej * (1.0 - np.cos(q * phi[i])) + mech
        return out

    @njit(cache=True)
    def _newton_nb(phi, theta, ba, L, ej, phi0, k_theta, theta0, max_iter,
                   gtol, max_step_phi, max_step_theta):
        n = phi.size
        phi_out = phi.astype(np.float64).copy()
        theta_out = theta.astype(np.float64).copy()
        status = np.full(n, FAILED, dtype=np.int64)
        iters = np.zeros(n, dtype=np.int64)
        eps = np.finfo(np.float64).eps
        q = TWO_PI / phi0
        fscale = ej / phi0
        for k in range(n):
            P = phi_out[k]
            T = theta_out[k]
            for it in range(max_iter + 1):
                s = np.sin(T)
                c = np.cos(T)
                r = (P - ba * c) / L
                g1 = r + ej * q * np.sin(q * P)
                g2 = r * ba * s + k_theta * (T - theta0)
                iters[k] = it
                if abs(g1) < gtol * fscale and abs(g2) < gtol * ej:
                    status[k] = CONVERGED
                    break
                mag = (abs(P) + abs(ba * c) + abs(ba * s * T)) / L
                f1 = 8 * eps * (mag + ej * q * q * abs(P))
                f2 = 8 * eps * (mag * abs(ba * s) + k_theta * (abs(T) + abs(theta0)))
                if abs(g1) <= max(gtol * fscale, f1) and abs(g2) <= max(gtol * ej, f2):
                    status[k] = STALLED
                    break
                if it == max_iter:
                    break
                h11 = 1.0 / L + ej * q * q * np.cos(q * P)
                h12 = ba * s / L
                h22 = (ba * s) ** 2 / L + r * ba * c + k_theta
                det = h11 * h22 - h12 * h12
                if det == 0.0:
                    break
                dP = -(h22 * g1 - h12 * g2) / det
                dT = -(h11 * g2 - h12 * g1) / det
                if not (np.isfinite(dP) and np.isfinite(dT)):
                    break
                scale = max(1.0, abs(dP) / max_step_phi, abs(dT) / max_step_theta)
                dP /= scale
                dT /= scale
                if abs(T + dT) > np.pi:
                    break
                P += dP
                T += dT
            phi_out[k] = P
            theta_out[k] = T
        return phi_out, theta_out, status, iters

    @njit(cache=True)
    def _stencil_nb(nx, ny, cx, cy, vdiag):
        n = nx * ny
        nnz = n + 2 * ((nx - 1) * ny + nx * (ny - 1))
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz)
        for p in range(n):
            rows[p] = p
            cols[p] = p
            vals[p] = vdiag.ravel()[p] + 2.0 * cx + 2.0 * cy
        p = n
        for i in range(1, nx):
            for j in range(ny):
                a = i * ny + j
                b = (i - 1) * ny + j
                rows[p] = a; cols[p] = b; vals[p] = -cx; p += 1
                rows[p] = b; cols[p] = a; vals[p] = -cx; p += 1
        for i in range(nx):
            for j in range(1, ny):
                a = i * ny + j
                b = a - 1
                rows[p] = a; cols[p] = b; vals[p] = -cy; p += 1
                rows[p] = b; cols[p] = a; vals[p] = -cy; p += 1
        return rows, cols, vals


def use_numba(flag: bool | None = None) -> bool:
    return HAVE_NUMBA if flag is None else (flag and HAVE_NUMBA)


def potential_grid(phi, theta, ba, L, ej, phi0, k_theta, theta0, numba=None):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    fn = _potential_grid_nb if use_numba(numba) else _potential_grid_np
    return fn(phi, theta, float(ba), float(L), float(ej), float(phi0), float(k_theta), float(theta0))


def newton_refine(phi, theta, ba, L, ej, phi0, k_theta, theta0, max_iter=100, gtol=1e-12,
                  max_step_phi=np.inf, max_step_theta=np.inf, numba=None):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    fn = _newton_nb if use_numba(numba) else _newton_np
    return fn(phi, theta, float(ba), float(L), float(ej), float(phi0), float(k_theta),
              float(theta0), int(max_iter), float(gtol), float(max_step_phi), float(max_step_theta))


def stencil(nx, ny, cx, cy, vdiag, numba=None):
    vdiag = np.ascontiguousarray(vdiag, dtype=np.float64)
    fn = _stencil_nb if use_numba(numba) else _stencil_np
    return fn(int(nx), int(ny), float(cx), float(cy), vdiag)
