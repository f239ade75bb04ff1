"""Hot loops of the finite-volume solver.

Every kernel exists twice: a vectorized numpy version and an explicit loop
compiled with numba (serial and ``parallel=True`` builds of the same source).
Set ``NSTRAFFIC_DISABLE_NUMBA=1`` to force the numpy path, e.g. when numba is
broken on a platform or to compare results.

All arrays describe a periodic ring; interface ``i`` sits between cell ``i``
and cell ``(i + 1) % n``. Model parameters travel as the flat tuple
``(alpha, tau, w_c, rho_c, rho_0, v_0, a)`` so the compiled code stays
free of Python objects.
"""
from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

_FLAG = os.environ.get("NSTRAFFIC_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if NUMBA_DISABLED:
        raise ImportError("disabled by NSTRAFFIC_DISABLE_NUMBA")
    import numba
    from numba import prange

    HAS_NUMBA = True
except ImportError:
    numba = None
    prange = range
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# numpy reference path


def _interface_flux_numpy(rho, q, alpha):
    rr = np.roll(rho, -1)
    qr = np.roll(q, -1)
    vl = q / rho
    vr = qr / rr
    sl = np.sqrt(rho)
    sr = np.sqrt(rr)
    vb = (sl * vl + sr * vr) / (sl + sr)
    r = math.sqrt(alpha + 1.0)
    k = (alpha + 1.0) / alpha
    lam1 = (alpha + 1.0 - r) / alpha * vb
    lam2 = (alpha + 1.0 + r) / alpha * vb
    fl2 = k * q * vl
    fr2 = k * qr * vr
    moving = vb != 0.0
    vb_safe = np.where(moving, vb, 1.0)
    dr = rr - rho
    dq = qr - q
    sig1 = np.where(moving, -alpha / (2.0 * r) * (dq / vb_safe - (alpha + 1.0 + r) / alpha * dr), 0.0)
    sig2 = np.where(moving, alpha / (2.0 * r) * (dq / vb_safe - (alpha + 1.0 - r) / alpha * dr), 0.0)
    a1 = sig1 * np.abs(lam1)
    a2 = sig2 * np.abs(lam2)
    f1 = 0.5 * (q + qr) - 0.5 * (a1 + a2)
    f2 = 0.5 * (fl2 + fr2) - 0.5 * (a1 * lam1 + a2 * lam2)
    return f1, f2


def _cell_viscosity_numpy(rho, v, prm):
    alpha, tau, w_c, rho_c, rho_0 = prm[:5]
    base = np.maximum(rho_0 - rho, 0.0) / (rho_0 - rho_c)
    w = 1.0 + (w_c - 1.0) * (rho / rho_c) * base ** ((rho_0 - rho_c) / rho_c)
    excess = w - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        tau0 = tau / (2.0 * excess)
        mu = 2.0 * (rho * v * v / alpha) * tau0 * ((alpha + 1.0) / alpha)
    mu = np.where(excess > 0.0, mu, np.inf)
    return np.where(v == 0.0, 0.0, mu)


def _momentum_source_numpy(rho, q, dx, prm, cap_scale):
    alpha, tau, _, _, rho_0, v_0, a = prm
    v = q / rho
    vp = np.roll(v, -1)
    vm = np.roll(v, 1)
    mu = _cell_viscosity_numpy(rho, v, prm)
    mu_face = 0.5 * (mu + np.roll(mu, -1))
    cap = cap_scale * np.minimum(rho, np.roll(rho, -1))
    limited = mu_face > cap
    mu_face = np.where(limited, cap, mu_face)
    mu_face_m = np.roll(mu_face, 1)
    ve = 0.5 * v_0 * (np.tanh(rho_0 / rho - a) + np.tanh(a))
    b = -(alpha - 1.0) * rho * v / alpha
    with np.errstate(invalid="ignore"):
        s2 = (
            rho * (ve - v) / tau
            - 0.5 * b * (vp - vm) / dx
            + (mu_face * (vp - v) - mu_face_m * (v - vm)) / (dx * dx)
        )
    return s2, int(np.count_nonzero(limited))


def _max_wave_speed_numpy(rho, q, alpha):
    if rho.size == 0:
        return 0.0
    r = math.sqrt(alpha + 1.0)
    return float(np.max(np.abs(q / rho)) * (alpha + 1.0 + r) / alpha)


# ---------------------------------------------------------------------------
# loop path (compiled by numba; plain Python otherwise)


def _interface_flux_loop(rho, q, alpha, f1, f2):
    n = rho.size
    r = math.sqrt(alpha + 1.0)
    k = (alpha + 1.0) / alpha
    c1 = (alpha + 1.0 - r) / alpha
    c2 = (alpha + 1.0 + r) / alpha
    for i in prange(n):
        j = i + 1 if i + 1 < n else 0
        rl = rho[i]
        ql = q[i]
        rr = rho[j]
        qr = q[j]
        vl = ql / rl
        vr = qr / rr
        sl = math.sqrt(rl)
        sr = math.sqrt(rr)
        vb = (sl * vl + sr * vr) / (sl + sr)
        lam1 = c1 * vb
        lam2 = c2 * vb
        if vb != 0.0:
            dr = rr - rl
            dq = qr - ql
            sig1 = -alpha / (2.0 * r) * (dq / vb - c2 * dr)
            sig2 = alpha / (2.0 * r) * (dq / vb - c1 * dr)
        else:
            sig1 = 0.0
            sig2 = 0.0
        a1 = sig1 * abs(lam1)
        a2 = sig2 * abs(lam2)
        f1[i] = 0.5 * (ql + qr) - 0.5 * (a1 + a2)
        f2[i] = 0.5 * (k * ql * vl + k * qr * vr) - 0.5 * (a1 * lam1 + a2 * lam2)


def _momentum_source_loop(rho, q, dx, prm, cap_scale, s2, mu_face, limited):
    alpha, tau, w_c, rho_c, rho_0, v_0, a = prm
    n = rho.size
    expo = (rho_0 - rho_c) / rho_c
    ka = (alpha + 1.0) / alpha
    # pass 1: cell viscosities, stored temporarily in s2
    for i in prange(n):
        rh = rho[i]
        v = q[i] / rh
        base = max(rho_0 - rh, 0.0) / (rho_0 - rho_c)
        w = 1.0 + (w_c - 1.0) * (rh / rho_c) * base**expo
        excess = w - 1.0
        if v == 0.0:
            s2[i] = 0.0
        elif excess > 0.0:
            tau0 = tau / (2.0 * excess)
            s2[i] = 2.0 * (rh * v * v / alpha) * tau0 * ka
        else:
            s2[i] = np.inf
    # pass 2: face viscosities with the stability cap
    for i in prange(n):
        j = i + 1 if i + 1 < n else 0
        m = 0.5 * (s2[i] + s2[j])
        cap = cap_scale * min(rho[i], rho[j])
        if m > cap:
            mu_face[i] = cap
            limited[i] = True
        else:
            mu_face[i] = m
            limited[i] = False
    # pass 3: source
    tanh_a = math.tanh(a)
    for i in prange(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i > 0 else n - 1
        rh = rho[i]
        v = q[i] / rh
        vp = q[ip] / rho[ip]
        vm = q[im] / rho[im]
        ve = 0.5 * v_0 * (math.tanh(rho_0 / rh - a) + tanh_a)
        b = -(alpha - 1.0) * rh * v / alpha
        s2[i] = (
            rh * (ve - v) / tau
            - 0.5 * b * (vp - vm) / dx
            + (mu_face[i] * (vp - v) - mu_face[im] * (v - vm)) / (dx * dx)
        )


def _max_wave_speed_loop(rho, q, alpha):
    n = rho.size
    vmax = 0.0
    for i in prange(n):
        vmax = max(vmax, abs(q[i] / rho[i]))
    r = math.sqrt(alpha + 1.0)
    return vmax * (alpha + 1.0 + r) / alpha


def _wrap_loops(flux_loop, source_loop, speed_loop, name):
    def interface_flux(rho, q, alpha):
        f1 = np.empty_like(rho)
        f2 = np.empty_like(rho)
        flux_loop(rho, q, float(alpha), f1, f2)
        return f1, f2

    def momentum_source(rho, q, dx, prm, cap_scale):
        s2 = np.empty_like(rho)
        mu_face = np.empty_like(rho)
        limited = np.empty(rho.shape, dtype=np.bool_)
        source_loop(rho, q, float(dx), tuple(float(x) for x in prm), float(cap_scale), s2, mu_face, limited)
        return s2, int(np.count_nonzero(limited))

    def max_wave_speed(rho, q, alpha):
        if rho.size == 0:
            return 0.0
        return float(speed_loop(rho, q, float(alpha)))

    return SimpleNamespace(
        name=name,
        interface_flux=interface_flux,
        momentum_source=momentum_source,
        max_wave_speed=max_wave_speed,
    )


_BACKENDS = {
    "numpy": SimpleNamespace(
        name="numpy",
        interface_flux=_interface_flux_numpy,
        momentum_source=_momentum_source_numpy,
        max_wave_speed=_max_wave_speed_numpy,
    ),
}

if HAS_NUMBA:
    _BACKENDS["numba"] = _wrap_loops(
        numba.njit(cache=True)(_interface_flux_loop),
        numba.njit(cache=True)(_momentum_source_loop),
        numba.njit(cache=True)(_max_wave_speed_loop),
        "numba",
    )
    _BACKENDS["numba-parallel"] = _wrap_loops(
        numba.njit(parallel=True, cache=True)(_interface_flux_loop),
        numba.njit(parallel=True, cache=True)(_momentum_source_loop),
        numba.njit(parallel=True, cache=True)(_max_wave_speed_loop),
        "numba-parallel",
    )

BACKENDS = tuple(_BACKENDS)


def get_backend(name: str | None = None, parallel: bool = False) -> SimpleNamespace:
    """Return the kernel set ``name`` (default: numba if available, else numpy).

    ``parallel`` selects the ``numba-parallel`` build when no name is given.
    Without numba, every request silently resolves to numpy except an
    explicit numba name, which raises.
    """
    if name is None:
        if not HAS_NUMBA:
            return _BACKENDS["numpy"]
        name = "numba-parallel" if parallel else "numba"
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {BACKENDS}") from None
