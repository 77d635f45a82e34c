"""Numba kernels for the DTWA and classical trajectory loops.

These are the only hot loops in the package (hundreds of trajectories times
thousands of periods times RK4 substeps); everything else stays numpy.
fastmath is off everywhere: bit-stable IEEE ordering is part of the
reproducibility contract.

Rotation angles are reduced modulo pi before calling sin/cos (q = theta/pi,
f = q - rint(q), sign from the parity of rint(q)).  The reduction is exact
in floating point, so theta = pi yields (cos, sin) = (-1, 0) exactly and
the trivial-flip invariant holds to the bit.

The DTWA free flow is site-local and the kick couples sites only through
the global sum of s^x, so spins that start equal within a site stay equal,
and sites with equal up-spin counts stay equal.  The reduced kernel
propagates one (up, down) spin pair per up-count class k = 0..2l, which is
algebraically exact, not an approximation; the full per-spin kernel is kept
as a cross-check.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KERNEL_OPTS = dict(cache=True, fastmath=False, nogil=True)


@njit(**KERNEL_OPTS)
def rot_x_pi_aware(y: float, z: float, theta: float):
    """Rotate (y, z) actively about +x by theta, exact at multiples of pi."""
    q = theta / np.pi
    r = np.rint(q)
    f = q - r
    c = np.cos(np.pi * f)
    s = np.sin(np.pi * f)
    if (np.int64(r) & 1) != 0:
        c = -c
        s = -s
    return c * y - s * z, s * y + c * z


@njit(**KERNEL_OPTS)
def _class_deriv(s, out, two_l, h, gz, include_self):
    # s, out: (two_l+1, 2, 3); row k = up-count class, slot 0/1 = up/down rep
    for k in range(two_l + 1):
        suz = s[k, 0, 2]
        sdz = s[k, 1, 2]
        if include_self:
            bu = gz * (k * suz + (two_l - k) * sdz)
            bd = bu
        else:
            bu = gz * ((k - 1) * suz + (two_l - k) * sdz)
            bd = gz * (k * suz + (two_l - k - 1) * sdz)
        for t in range(2):
            b = bu if t == 0 else bd
            sx = s[k, t, 0]
            sy = s[k, t, 1]
            sz = s[k, t, 2]
            out[k, t, 0] = 2.0 * sy * b
            out[k, t, 1] = 2.0 * (sz * h - sx * b)
            out[k, t, 2] = -2.0 * sy * h

@njit(**KERNEL_OPTS)
def _rk4_classes(s, two_l, h, gz, include_self, dt, k1, k2, k3, k4, tmp):
    _class_deriv(s, k1, two_l, h, gz, include_self)
    for i in range(s.shape[0]):
        for t in range(2):
            for a in range(3):
                tmp[i, t, a] = s[i, t, a] + 0.5 * dt * k1[i, t, a]
    _class_deriv(tmp, k2, two_l, h, gz, include_self)
    for i in range(s.shape[0]):
        for t in range(2):
            for a in range(3):
                tmp[i, t, a] = s[i, t, a] + 0.5 * dt * k2[i, t, a]
    _class_deriv(tmp, k3, two_l, h, gz, include_self)
    for i in range(s.shape[0]):
        for t in range(2):
            for a in range(3):
                tmp[i, t, a] = s[i, t, a] + dt * k3[i, t, a]
    _class_deriv(tmp, k4, two_l, h, gz, include_self)
    for i in range(s.shape[0]):
        for t in range(2):
            for a in range(3):
                s[i, t, a] += (dt / 6.0) * (
                    k1[i, t, a] + 2.0 * k2[i, t, a]
                    + 2.0 * k3[i, t, a] + k4[i, t, a])


@njit(**KERNEL_OPTS)
def dtwa_reduced_run(counts, counts_a, counts_b, two_l, N, h, J, K, phi,
                     tau, steps, n_max, include_self):
    """One DTWA trajectory in the up-count class representation.

    counts[k] = number of sites whose up-count is k; counts_a/counts_b the
    same restricted to two disjoint site subsets (pass zeros to skip).
    Returns (o, o_a, o_b, ok) where o[n] = (-1)^n sum s^z / (2 N l), i.e.
    the per-trajectory order parameter already normalized by l.
    """
    q = two_l + 1
    s = np.empty((q, 2, 3))
    for k in range(q):
        s[k, 0, 0] = 1.0
        s[k, 0, 1] = 1.0
        s[k, 0, 2] = 1.0
        s[k, 1, 0] = -1.0
        s[k, 1, 1] = -1.0
        s[k, 1, 2] = 1.0
    k1 = np.empty((q, 2, 3))
    k2 = np.empty((q, 2, 3))
    k3 = np.empty((q, 2, 3))
    k4 = np.empty((q, 2, 3))
    tmp = np.empty((q, 2, 3))

    n_a = 0
    n_b = 0
    for k in range(q):
        n_a += counts_a[k]
        n_b += counts_b[k]

    gz = J / two_l            # J/(2l)
    ck = K / (2.0 * N * two_l)  # K/(4Nl)
    dt = tau / steps
    norm = 1.0 / (N * two_l)   # 1/(2Nl)

    o = np.empty(n_max + 1)
    o_a = np.zeros(n_max + 1)
    o_b = np.zeros(n_max + 1)
    sign = 1.0
    for n in range(n_max + 1):
        tot = 0.0
        tot_a = 0.0
        tot_b = 0.0
        for k in range(q):
            wk = k * s[k, 0, 2] + (two_l - k) * s[k, 1, 2]
            tot += counts[k] * wk
            tot_a += counts_a[k] * wk
            tot_b += counts_b[k] * wk
        o[n] = sign * tot * norm
        if n_a > 0:
            o_a[n] = sign * tot_a / (n_a * two_l)
        if n_b > 0:
            o_b[n] = sign * tot_b / (n_b * two_l)
        sign = -sign
        if not np.isfinite(tot):
            return o, o_a, o_b, False
        if n == n_max:
            break

        # kick: theta_k = phi - K/(4Nl) (X_tot - X_k), X from site sums of s^x
        x_tot = 0.0
        for k in range(q):
            x_tot += counts[k] * (k * s[k, 0, 0] + (two_l - k) * s[k, 1, 0])
        for k in range(q):
            x_k = k * s[k, 0, 0] + (two_l - k) * s[k, 1, 0]
            theta = phi - ck * (x_tot - x_k)
            for t in range(2):
                y, z = rot_x_pi_aware(s[k, t, 1], s[k, t, 2], theta)
                s[k, t, 1] = y
                s[k, t, 2] = z

        for _ in range(steps):
            _rk4_classes(s, two_l, h, gz, include_self, dt, k1, k2, k3, k4, tmp)
    return o, o_a, o_b, True


@njit(**KERNEL_OPTS)
def _full_deriv(s, out, site_z, two_l, h, gz, include_self):
    n_sites = s.shape[0]
    for j in range(n_sites):
        z = 0.0
        for m in range(two_l):
            z += s[j, m, 2]
        site_z[j] = z
    for j in range(n_sites):
        for m in range(two_l):
            if include_self:
                b = gz * site_z[j]
            else:
                b = gz * (site_z[j] - s[j, m, 2])
            sx = s[j, m, 0]
            sy = s[j, m, 1]
            sz = s[j, m, 2]
            out[j, m, 0] = 2.0 * sy * b
            out[j, m, 1] = 2.0 * (sz * h - sx * b)
            out[j, m, 2] = -2.0 * sy * h


@njit(**KERNEL_OPTS)
def dtwa_full_run(spins, two_l, N, h, J, K, phi, tau, steps, n_max,
                  include_self, split):
    """One DTWA trajectory on the full (N, 2l, 3) spin array.

    Cross-check twin of dtwa_reduced_run; same observables, with subset
    estimators over sites [0, split) and [split, N).
    """
    s = spins.copy()
    k1 = np.empty_like(s)
    k2 = np.empty_like(s)
    k3 = np.empty_like(s)
    k4 = np.empty_like(s)
    tmp = np.empty_like(s)
    site_z = np.empty(N)

    gz = J / two_l
    ck = K / (2.0 * N * two_l)
    dt = tau / steps
    norm = 1.0 / (N * two_l)

    o = np.empty(n_max + 1)
    o_a = np.zeros(n_max + 1)
    o_b = np.zeros(n_max + 1)
    sign = 1.0
    for n in range(n_max + 1):
        tot = 0.0
        for j in range(N):
            for m in range(two_l):
                tot += s[j, m, 2]
        o[n] = sign * tot * norm
        if split > 0:
            ta = 0.0
            for j in range(split):
                for m in range(two_l):
                    ta += s[j, m, 2]
            o_a[n] = sign * ta / (split * two_l)
            tb = 0.0
            for j in range(split, N):
                for m in range(two_l):
                    tb += s[j, m, 2]
            o_b[n] = sign * tb / ((N - split) * two_l)
        sign = -sign
        if not np.isfinite(tot):
            return o, o_a, o_b, False
        if n == n_max:
            break

        x_tot = 0.0
        for j in range(N):
            for m in range(two_l):
                x_tot += s[j, m, 0]
        for j in range(N):
            x_j = 0.0
            for m in range(two_l):
                x_j += s[j, m, 0]
            theta = phi - ck * (x_tot - x_j)
            for m in range(two_l):
                y, z = rot_x_pi_aware(s[j, m, 1], s[j, m, 2], theta)
                s[j, m, 1] = y
                s[j, m, 2] = z

        for _ in range(steps):
            _full_deriv(s, k1, site_z, two_l, h, gz, include_self)
            for j in range(N):
                for m in range(two_l):
                    for a in range(3):
                        tmp[j, m, a] = s[j, m, a] + 0.5 * dt * k1[j, m, a]
            _full_deriv(tmp, k2, site_z, two_l, h, gz, include_self)
            for j in range(N):
                for m in range(two_l):
                    for a in range(3):
                        tmp[j, m, a] = s[j, m, a] + 0.5 * dt * k2[j, m, a]
            _full_deriv(tmp, k3, site_z, two_l, h, gz, include_self)
            for j in range(N):
                for m in range(two_l):
                    for a in range(3):
                        tmp[j, m, a] = s[j, m, a] + dt * k3[j, m, a]
            _full_deriv(tmp, k4, site_z, two_l, h, gz, include_self)
            for j in range(N):
                for m in range(two_l):
                    for a in range(3):
                        s[j, m, a] += (dt / 6.0) * (
                            k1[j, m, a] + 2.0 * k2[j, m, a]
                            + 2.0 * k3[j, m, a] + k4[j, m, a])
    return o, o_a, o_b, True


@njit(**KERNEL_OPTS)
def classical_run(N, h, J, K, phi, tau, steps, n_max):
    """Classical kicked-top chain from the synchronized (0, 0, 1/2) start.

    Returns (o, ok) with o[n] = (-1)^n 2 <m^z> (the 1/2 spin length divides
    out so o starts at 1) and ok=False on non-finite blowup.
    """
    m = np.zeros((N, 3))
    for j in range(N):
        m[j, 2] = 0.5
    k1 = np.empty_like(m)
    k2 = np.empty_like(m)
    k3 = np.empty_like(m)
    k4 = np.empty_like(m)
    tmp = np.empty_like(m)
    dt = tau / steps

    o = np.empty(n_max + 1)
    sign = 1.0
    for n in range(n_max + 1):
        tot = 0.0
        for j in range(N):
            tot += m[j, 2]
        o[n] = sign * 2.0 * tot / N
        sign = -sign
        if not np.isfinite(tot):
            return o, False
        if n == n_max:
            break

        mx_tot = 0.0
        for j in range(N):
            mx_tot += m[j, 0]
        for j in range(N):
            theta = phi - (K / N) * (mx_tot - m[j, 0])
            y, z = rot_x_pi_aware(m[j, 1], m[j, 2], theta)
            m[j, 1] = y
            m[j, 2] = z

        for _ in range(steps):
            _classical_deriv(m, k1, h, J)
            for j in range(N):
                for a in range(3):
                    tmp[j, a] = m[j, a] + 0.5 * dt * k1[j, a]
            _classical_deriv(tmp, k2, h, J)
            for j in range(N):
                for a in range(3):
                    tmp[j, a] = m[j, a] + 0.5 * dt * k2[j, a]
            _classical_deriv(tmp, k3, h, J)
            for j in range(N):
                for a in range(3):
                    tmp[j, a] = m[j, a] + dt * k3[j, a]
            _classical_deriv(tmp, k4, h, J)
            for j in range(N):
                for a in range(3):
                    m[j, a] += (dt / 6.0) * (k1[j, a] + 2.0 * k2[j, a]
                                             + 2.0 * k3[j, a] + k4[j, a])
    return o, True


@njit(**KERNEL_OPTS)
def _classical_deriv(m, out, h, J):
    # dm/dt = m x B with B = (2h, 0, 4 J m^z)
    for j in range(m.shape[0]):
        bx = 2.0 * h
        bz = 4.0 * J * m[j, 2]
        out[j, 0] = m[j, 1] * bz
        out[j, 1] = m[j, 2] * bx - m[j, 0] * bz
        out[j, 2] = -m[j, 1] * bx
