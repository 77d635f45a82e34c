"""Brute-force Floquet evolution on the full product space.

Independent cross-check for the symmetric-sector engine: builds the N-site
Hamiltonians by explicit Kronecker products and evolves the full state, with
no shared operator-construction code.  Two microscopic models are supported:

* model 1: N spins of magnitude l with single-site anisotropy
  -(J/l)(s^z)^2, transverse field, and a kicked all-to-all (S^x)^2 coupling
  that includes the i = j term,
* model 2: each magnitude-l spin replaced by 2l spin-1/2s coupled pairwise
  within a site, with the i = j term excluded from the kick.

Dimensions grow as (2l+1)^N and 2^(2lN), so this is only usable for small
systems; the cap is explicit.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .params import ModelParams, TrajectoryRecord, order_parameter

MAX_FULL_DIM = 4096


def local_spin_matrices(two_l: int) -> tuple[np.ndarray, np.ndarray]:
    """(s^x, s^z) for a single spin of magnitude l = two_l / 2.

    Basis ordered m = +l, +l-1, ..., -l so the fully-up state is index 0.
    """
    d = two_l + 1
    l = two_l / 2.0
    m = l - np.arange(d)
    sz = np.diag(m)
    sp = np.zeros((d, d))
    for i in range(1, d):
        # <m+1| s+ |m> with m = m[i]
        sp[i - 1, i] = np.sqrt(l * (l + 1.0) - m[i] * (m[i] + 1.0))
    sx = 0.5 * (sp + sp.T)
    return sx, sz


def _embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    d = op.shape[0]
    left = np.eye(d ** site)
    right = np.eye(d ** (n_sites - site - 1))
    return np.kron(np.kron(left, op), right)


def _check_dim(dim: int) -> None:
    if dim > MAX_FULL_DIM:
        raise ValueError(f"full product dimension {dim} exceeds cap {MAX_FULL_DIM}")


def _model1_operators(params: ModelParams):
    """(H_free, G_kick, Sz_total) for model 1 on the full space."""
    sx, sz = local_spin_matrices(params.two_l)
    d = params.two_l + 1
    _check_dim(d ** params.N)
    dim = d ** params.N
    h_free = np.zeros((dim, dim))
    sx_tot = np.zeros((dim, dim))
    sz_tot = np.zeros((dim, dim))
    for j in range(params.N):
        h_free += _embed(-(params.J / params.l) * sz @ sz - 2.0 * params.h * sx,
                         j, params.N)
        sx_tot += _embed(sx, j, params.N)
        sz_tot += _embed(sz, j, params.N)
    # kick: phi * Sx_tot - K/(2Nl) * Sx_tot^2, the double sum unrestricted
    g = params.phi * sx_tot - params.K / (2.0 * params.N * params.l) * sx_tot @ sx_tot
    return h_free, g, sz_tot


def _model2_operators(params: ModelParams):
    """(H_free, G_kick, Sz_total) for model 2: 2l spin-1/2s per site."""
    n_half = params.N * params.two_l
    _check_dim(2 ** n_half)
    sx = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = 0.5 * np.array([[1.0, 0.0], [0.0, -1.0]])
    dim = 2 ** n_half
    x_site = []  # sum of sigma^x (Pauli, = 2 s^x) within each site
    z_site = []
    for i in range(params.N):
        xs = np.zeros((dim, dim))
        zs = np.zeros((dim, dim))
        for m in range(params.two_l):
            xs += 2.0 * _embed(sx, i * params.two_l + m, n_half)
            zs += 2.0 * _embed(sz, i * params.two_l + m, n_half)
        x_site.append(xs)
        z_site.append(zs)
    h_free = np.zeros((dim, dim))
    sz_tot = np.zeros((dim, dim))
    x_tot = np.zeros((dim, dim))
    for i in range(params.N):
        # -(J/4l) sum_{m,m'} sigma^z sigma^z = -(J/4l) (sum_m sigma^z)^2
        h_free += -(params.J / (4.0 * params.l)) * z_site[i] @ z_site[i]
        h_free += -params.h * x_site[i]  # -h sum_m sigma^x
        sz_tot += 0.5 * z_site[i]
        x_tot += x_site[i]
    g = (params.phi / 2.0) * x_tot
    g -= params.K / (16.0 * params.N * params.l) * (x_tot @ x_tot)
    for i in range(params.N):
        # the site double sum excludes i = j
        g += params.K / (16.0 * params.N * params.l) * x_site[i] @ x_site[i]
    return h_free, g, sz_tot


def full_floquet_evolve(params: ModelParams, n_max: int,
                        model: int = 1) -> TrajectoryRecord:
    """Stroboscopic order parameter from the full product-space evolution.

    One cycle applies the kick unitary first (kick at t = 0), then the free
    propagator; samples are taken just before each kick.
    """
    if model == 1:
        h_free, g, sz_tot = _model1_operators(params)
        dim = (params.two_l + 1) ** params.N
    elif model == 2:
        h_free, g, sz_tot = _model2_operators(params)
        dim = 2 ** (params.N * params.two_l)
    else:
        raise ValueError(f"model must be 1 or 2, got {model}")

    wf, vf = np.linalg.eigh(h_free)
    wg, vg = np.linalg.eigh(g)
    u_free = (vf * np.exp(-1j * wf * params.tau)) @ vf.T
    u_kick = (vg * np.exp(-1j * wg)) @ vg.T
    u = u_free @ u_kick

    psi = np.zeros(dim, dtype=np.complex128)
    psi[0] = 1.0  # all spins fully up; index 0 in every local ordering used here
    values = np.empty(n_max + 1)
    for n in range(n_max + 1):
        sz = float(np.real(psi.conj() @ (sz_tot @ psi)))
        values[n] = order_parameter(n, sz, params.N)
        if n < n_max:
            psi = u @ psi
    times = params.tau * np.arange(n_max + 1)
    return TrajectoryRecord(times=times, values=values,
                            meta={"engine": f"bruteforce_model{model}",
                                  "params": params.as_dict()})


def symmetric_projector(N: int, d: int) -> np.ndarray:
    """Projector onto the permutation-symmetric subspace of (C^d)^N.

    Average of all N! site-permutation operators; exponential cost, intended
    for N <= 4 in tests.
    """
    dim = d ** N
    _check_dim(dim)
    # digits[i] = tuple of local indices of basis state i, site 0 slowest
    shape = (d,) * N
    proj = np.zeros((dim, dim))
    idx = np.arange(dim).reshape(shape)
    count = 0
    for perm in permutations(range(N)):
        permuted = np.transpose(idx, axes=perm).reshape(-1)
        proj[permuted, np.arange(dim)] += 1.0
        count += 1
    return proj / count
