"""Hot time-stepping loop.

The IMEX update (Crank-Nicolson diffusion, explicit memory flux and
reaction, exact integer-step delay lookup) is compiled with numba when
available; a vectorized numpy fallback with identical semantics is kept
for environments without a JIT. Both paths produce bitwise-stable,
deterministic trajectories for a fixed configuration.
"""

from __future__ import annotations

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def thomas_factor(n: int, diag: float, off: float):
    """Pre-factorization of the constant symmetric tridiagonal solve."""
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = off / diag
    dp[0] = diag
    for i in range(1, n):
        denom = diag - off * cp[i - 1]
        cp[i] = off / denom
        dp[i] = denom
    return cp, dp


def _step_chunk_py(
    u,
    v,
    bufu,
    bufv,
    ptr,
    m,
    nsteps,
    dt,
    h,
    d1,
    d2,
    l1,
    l2,
    a11,
    a12,
    a21,
    a22,
    r1,
    r2,
    cp,
    dp,
    series,
    series_stride,
    u_ref,
    v_ref,
    snaps_u,
    snaps_v,
    snap_stride,
):
    """Numpy reference implementation of the step loop."""
    n = u.shape[0]
    h2 = h * h
    off = -0.5 * dt / h2
    ns_count = 0
    snap_count = 0
    blow_step = -1
    for k in range(nsteps):
        lag = (ptr + 1) % (m + 1)
        ulag = bufu[lag]
        vlag = bufv[lag]
        ue = np.concatenate(([0.0], u, [0.0]))
        we = np.concatenate(([0.0], ulag, [0.0]))
        flux_u = np.diff(0.5 * (ue[:-1] + ue[1:]) * np.diff(we)) / h2
        ve = np.concatenate(([0.0], v, [0.0]))
        qe = np.concatenate(([0.0], vlag, [0.0]))
        flux_v = np.diff(0.5 * (ve[:-1] + ve[1:]) * np.diff(qe)) / h2
        eu = d1 * flux_u + l1 * u * (r1 - a11 * u - a12 * v)
        ev = d2 * flux_v + l2 * v * (r2 - a21 * u - a22 * v)
        lap_u = (ue[:-2] - 2.0 * u + ue[2:]) / h2
        lap_v = (ve[:-2] - 2.0 * v + ve[2:]) / h2
        rhs_u = u + 0.5 * dt * lap_u + dt * eu
        rhs_v = v + 0.5 * dt * lap_v + dt * ev
        # forward sweep / back substitution of the constant tridiagonal
        for rhs, out in ((rhs_u, u), (rhs_v, v)):
            rhs[0] = rhs[0] / dp[0]
            for j in range(1, n):
                rhs[j] = (rhs[j] - off * rhs[j - 1]) / dp[j]
            out[n - 1] = rhs[n - 1]
            for j in range(n - 2, -1, -1):
                out[j] = rhs[j] - cp[j] * out[j + 1]
        ptr = (ptr + 1) % (m + 1)
        bufu[ptr] = u
        bufv[ptr] = v
        if (k + 1) % series_stride == 0:
            du = u - u_ref
            dv = v - v_ref
            series[ns_count, 0] = (k + 1) * dt
            series[ns_count, 1] = np.sqrt(h * np.dot(u, u))
            series[ns_count, 2] = np.sqrt(h * np.dot(v, v))
            series[ns_count, 3] = u.max()
            series[ns_count, 4] = v.max()
            series[ns_count, 5] = np.sqrt(h * np.dot(du, du))
            series[ns_count, 6] = np.sqrt(h * np.dot(dv, dv))
            series[ns_count, 7] = min(u.min(), v.min())
            ns_count += 1
            if not np.all(np.isfinite(u)) or not np.all(np.isfinite(v)):
                blow_step = k + 1
                return ptr, ns_count, snap_count, blow_step
        if snap_stride > 0 and (k + 1) % snap_stride == 0:
            snaps_u[snap_count] = u
            snaps_v[snap_count] = v
            snap_count += 1
    return ptr, ns_count, snap_count, blow_step


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _step_chunk_nb(
        u,
        v,
        bufu,
        bufv,
        ptr,
        m,
        nsteps,
        dt,
        h,
        d1,
        d2,
        l1,
        l2,
        a11,
        a12,
        a21,
        a22,
        r1,
        r2,
        cp,
        dp,
        series,
        series_stride,
        u_ref,
        v_ref,
        snaps_u,
        snaps_v,
        snap_stride,
    ):
        n = u.shape[0]
        h2 = h * h
        half = 0.5 * dt / h2
        off = -half
        eu = np.empty(n)
        ev = np.empty(n)
        ns_count = 0
        snap_count = 0
        for k in range(nsteps):
            lag = (ptr + 1) % (m + 1)
            for j in range(n):
                um1 = u[j - 1] if j > 0 else 0.0
                up1 = u[j + 1] if j < n - 1 else 0.0
                wm1 = bufu[lag, j - 1] if j > 0 else 0.0
                wp1 = bufu[lag, j + 1] if j < n - 1 else 0.0
                wj = bufu[lag, j]
                flux = (
                    0.5 * (u[j] + up1) * (wp1 - wj) - 0.5 * (um1 + u[j]) * (wj - wm1)
                ) / h2
                reac = l1 * u[j] * (r1[j] - a11 * u[j] - a12 * v[j])
                lap = (um1 - 2.0 * u[j] + up1) / h2
                eu[j] = u[j] + 0.5 * dt * lap + dt * (d1 * flux + reac)
                vm1 = v[j - 1] if j > 0 else 0.0
                vp1 = v[j + 1] if j < n - 1 else 0.0
                qm1 = bufv[lag, j - 1] if j > 0 else 0.0
                qp1 = bufv[lag, j + 1] if j < n - 1 else 0.0
                qj = bufv[lag, j]
                fluxv = (
                    0.5 * (v[j] + vp1) * (qp1 - qj) - 0.5 * (vm1 + v[j]) * (qj - qm1)
                ) / h2
                reacv = l2 * v[j] * (r2[j] - a21 * u[j] - a22 * v[j])
                lapv = (vm1 - 2.0 * v[j] + vp1) / h2
                ev[j] = v[j] + 0.5 * dt * lapv + dt * (d2 * fluxv + reacv)
            eu[0] = eu[0] / dp[0]
            ev[0] = ev[0] / dp[0]
            for j in range(1, n):
                eu[j] = (eu[j] - off * eu[j - 1]) / dp[j]
                ev[j] = (ev[j] - off * ev[j - 1]) / dp[j]
            u[n - 1] = eu[n - 1]
            v[n - 1] = ev[n - 1]
            for j in range(n - 2, -1, -1):
                u[j] = eu[j] - cp[j] * u[j + 1]
                v[j] = ev[j] - cp[j] * v[j + 1]
            ptr = (ptr + 1) % (m + 1)
            for j in range(n):
                bufu[ptr, j] = u[j]
                bufv[ptr, j] = v[j]
            if (k + 1) % series_stride == 0:
                s_u = 0.0
                s_v = 0.0
                s_du = 0.0
                s_dv = 0.0
                mx_u = -1e300
                mx_v = -1e300
                mn = 1e300
                finite = True
                for j in range(n):
                    s_u += u[j] * u[j]
                    s_v += v[j] * v[j]
                    du_ = u[j] - u_ref[j]
                    dv_ = v[j] - v_ref[j]
                    s_du += du_ * du_
                    s_dv += dv_ * dv_
                    if u[j] > mx_u:
                        mx_u = u[j]
                    if v[j] > mx_v:
                        mx_v = v[j]
                    if u[j] < mn:
                        mn = u[j]
                    if v[j] < mn:
                        mn = v[j]
                    if not (np.isfinite(u[j]) and np.isfinite(v[j])):
                        finite = False
                series[ns_count, 0] = (k + 1) * dt
                series[ns_count, 1] = np.sqrt(h * s_u)
                series[ns_count, 2] = np.sqrt(h * s_v)
                series[ns_count, 3] = mx_u
                series[ns_count, 4] = mx_v
                series[ns_count, 5] = np.sqrt(h * s_du)
                series[ns_count, 6] = np.sqrt(h * s_dv)
                series[ns_count, 7] = mn
                ns_count += 1
                if not finite:
                    return ptr, ns_count, snap_count, k + 1
            if snap_stride > 0 and (k + 1) % snap_stride == 0:
                for j in range(n):
                    snaps_u[snap_count, j] = u[j]
                    snaps_v[snap_count, j] = v[j]
                snap_count += 1
        return ptr, ns_count, snap_count, -1

    step_chunk = _step_chunk_nb
else:  # pragma: no cover
    step_chunk = _step_chunk_py
