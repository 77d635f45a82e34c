"""Permutation-symmetric sector of N spins of magnitude l as N bosons.

N all-to-all coupled spins of magnitude l, started from a permutation
symmetric state, never leave the symmetric subspace.  That subspace maps to
N bosons hopping on a chain of 2l + 1 modes labeled by the magnetization
m = -l ... l, with dimension binomial(N + 2l, 2l) instead of (2l + 1)^N.
This module enumerates that basis and builds the dense sector operators:

* the hopping operator Sigma = sum_m c_m (b_m^dag b_{m+1} + h.c.) with
  c_m = sqrt(l(l+1) - m(m+1)), which equals twice the collective S^x,
* the free Hamiltonian -(J/l) sum_m m^2 n_m - h * Sigma,
* the diagonal collective S^z = sum_m m n_m,
* the mirror parity (m -> -m mode reversal) and its even-sector basis.

Occupation vectors are ordered lexicographically with the mode index
ascending from m = -l to m = +l, so operator matrices are reproducible
across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Dict, Tuple

import numpy as np

from .params import ModelParams

# Dimension guard for enumerate_basis; sector dimensions grow like N^(2l).
DEFAULT_MAX_DIM = 200_000


def hop_amplitudes(two_l: int) -> np.ndarray:
    """Bond amplitudes c_m = sqrt(l(l+1) - m(m+1)) for m = -l ... l-1.

    These are the single-spin ladder matrix elements; entry k couples modes
    k and k+1 (m = k - l).
    """
    l = two_l / 2.0
    m = np.arange(two_l, dtype=np.float64) - l
    return np.sqrt(l * (l + 1.0) - m * (m + 1.0))


@dataclass
class FockBasis:
    """Enumerated occupation basis of N bosons in 2l + 1 modes."""

    N: int
    two_l: int
    occupations: np.ndarray
    index: Dict[Tuple[int, ...], int] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.occupations.shape[0]

    @property
    def n_modes(self) -> int:
        return self.two_l + 1

    def mode_values(self) -> np.ndarray:
        return np.arange(self.n_modes, dtype=np.float64) - self.two_l / 2.0


def enumerate_basis(N: int, two_l: int, max_dim: int = DEFAULT_MAX_DIM) -> FockBasis:
    """All compositions of N into 2l + 1 parts, lexicographically ascending.

    Rejects sector dimensions above max_dim before allocating anything.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if two_l < 1:
        raise ValueError(f"two_l must be >= 1, got {two_l}")
    q = two_l + 1
    dim = comb(N + two_l, two_l)
    if dim > max_dim:
        raise ValueError(
            f"sector dimension {dim} for N={N}, two_l={two_l} exceeds the "
            f"cap {max_dim}"
        )
    occ = np.zeros((dim, q), dtype=np.int64)
    row = 0

    def fill(prefix_len: int, remaining: int) -> None:
        nonlocal row
        if prefix_len == q - 1:
            occ[row, prefix_len] = remaining
            row += 1
            return
        base = occ[row, :prefix_len].copy()
        for n in range(remaining + 1):
            occ[row, :prefix_len] = base
            occ[row, prefix_len] = n
            fill(prefix_len + 1, remaining - n)

    fill(0, N)
    assert row == dim
    index = {tuple(v): i for i, v in enumerate(occ.tolist())}
    return FockBasis(N=N, two_l=two_l, occupations=occ, index=index)


@dataclass
class SectorOperator:
    """Dense operator over a FockBasis, Hermiticity-checked at construction."""

    matrix: np.ndarray
    label: str

    def __post_init__(self) -> None:
        defect = np.abs(self.matrix - self.matrix.conj().T).max()
        if defect > 1e-12:
            raise ValueError(
                f"{self.label}: matrix is not Hermitian (defect {defect:.3e})"
            )


def build_hopping(basis: FockBasis) -> SectorOperator:
    """Sigma = sum_m c_m (b_m^dag b_{m+1} + h.c.) as a dense real matrix.

    The b_m^dag b_{m+1} piece moves one boson from mode m+1 down to mode m
    with amplitude c_m * sqrt(n_m + 1) * sqrt(n_{m+1}); summing over source
    states fills one triangle and the transpose supplies the h.c. piece.
    """
    c = hop_amplitudes(basis.two_l)
    a = np.zeros((basis.dim, basis.dim))
    occ = basis.occupations
    for i in range(basis.dim):
        v = occ[i]
        for k in range(basis.two_l):
            if v[k + 1] > 0:
                w = v.copy()
                w[k] += 1
                w[k + 1] -= 1
                j = basis.index[tuple(w.tolist())]
                a[j, i] += c[k] * np.sqrt((v[k] + 1.0) * v[k + 1])
    a += a.T
    return SectorOperator(matrix=a, label="hopping")


def sz_diagonal(basis: FockBasis) -> np.ndarray:
    """Diagonal of the collective S^z = sum_m m n_m, as a vector."""
    return basis.occupations @ basis.mode_values()


def build_sz(basis: FockBasis) -> SectorOperator:
    return SectorOperator(matrix=np.diag(sz_diagonal(basis)), label="sz")


def build_free_hamiltonian(basis: FockBasis, params: ModelParams) -> SectorOperator:
    """H_free = -(J/l) sum_m m^2 n_m - h * Sigma over the sector."""
    if params.two_l != basis.two_l or params.N != basis.N:
        raise ValueError("params and basis disagree on N or two_l")
    m2 = basis.mode_values() ** 2
    diag = basis.occupations @ m2
    h = -params.h * build_hopping(basis).matrix
    idx = np.arange(basis.dim)
    h[idx, idx] += -(params.J / params.l) * diag
    return SectorOperator(matrix=h, label="free_hamiltonian")


def parity_permutation(basis: FockBasis) -> np.ndarray:
    """perm[i] = index of the mode-reversed occupation vector of state i."""
    perm = np.empty(basis.dim, dtype=np.int64)
    for i in range(basis.dim):
        rev = tuple(basis.occupations[i, ::-1].tolist())
        perm[i] = basis.index[rev]
    return perm


def build_parity(basis: FockBasis) -> SectorOperator:
    """Mirror parity P: (n_{-l}, ..., n_l) -> reversed; P^2 = identity."""
    perm = parity_permutation(basis)
    p = np.zeros((basis.dim, basis.dim))
    p[perm, np.arange(basis.dim)] = 1.0
    return SectorOperator(matrix=p, label="parity")


def even_sector_basis(basis: FockBasis) -> np.ndarray:
    """Orthonormal basis Q (dim x d_even) of the mirror-even subspace.

    Palindromic occupation vectors contribute themselves; each reversal pair
    (v, rev v) contributes (e_v + e_rev)/sqrt(2).  Columns are ordered by the
    smaller member's basis position, so the block is deterministic.
    """
    perm = parity_permutation(basis)
    cols = []
    for i in range(basis.dim):
        j = perm[i]
        if j == i:
            col = np.zeros(basis.dim)
            col[i] = 1.0
            cols.append(col)
        elif i < j:
            col = np.zeros(basis.dim)
            col[i] = col[j] = 1.0 / np.sqrt(2.0)
            cols.append(col)
    return np.column_stack(cols)


def fully_up_state(basis: FockBasis) -> np.ndarray:
    """The fully polarized initial state: all N bosons in the m = +l mode."""
    psi = np.zeros(basis.dim, dtype=np.complex128)
    target = tuple([0] * basis.two_l + [basis.N])
    psi[basis.index[target]] = 1.0
    return psi
