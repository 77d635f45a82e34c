"""Floquet operator on the symmetric sector and its level statistics.

One driving cycle is U = exp(-i H_free tau) * exp(-i G_kick) with the kick
applied first (kicks fire at t = 0, tau, 2tau, ...) and

    G_kick = (phi/2) Sigma - K/(8Nl) Sigma^2,

where Sigma is the sector hopping operator (= 2 S^x).  Since both factors
are functions of one real symmetric matrix each, U is kept in factored
spectral form and applied as four dense real mat-vecs per cycle; the dense
complex matrix is only materialized on demand (level statistics needs it,
long evolutions must not).

Quasi-energy statistics: eigenphases of U restricted to the mirror-even
sector, summarized by the consecutive-gap ratio r.  Reference values come
from synthetic Poisson and COE ensembles generated here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fock import (FockBasis, SectorOperator, build_free_hamiltonian,
                   build_hopping, build_parity, even_sector_basis,
                   fully_up_state, sz_diagonal)
from .linalg import checked_eigh, unitarity_defect
from .params import ModelParams, NumericalAbort, TrajectoryRecord, order_parameter

UNITARITY_TOL = 1e-10
NORM_TOL = 1e-8


def _real_apply(mat: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """mat @ psi for real mat and complex psi without promoting mat.

    Viewing the complex vector as a (dim, 2) real array turns the product
    into a single dgemm; at dim ~ 5000 the complex upcast copy would
    otherwise dominate the cycle cost.
    """
    out = mat @ psi.view(np.float64).reshape(-1, 2)
    return out.view(np.complex128).reshape(-1)


@dataclass
class FloquetOperator:
    """Factored one-cycle propagator over a FockBasis."""

    params: ModelParams
    basis: FockBasis
    free_w: np.ndarray
    free_v: np.ndarray
    hop_w: np.ndarray
    hop_v: np.ndarray
    sz_diag: np.ndarray
    _free_phase: np.ndarray = field(init=False, repr=False)
    _kick_phase: np.ndarray = field(init=False, repr=False)
    _matrix: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        p = self.params
        self._free_phase = np.exp(-1j * self.free_w * p.tau)
        kick_gen = 0.5 * p.phi * self.hop_w \
            - p.K / (8.0 * p.N * p.l) * self.hop_w ** 2
        self._kick_phase = np.exp(-1j * kick_gen)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def cycle(self, psi: np.ndarray) -> np.ndarray:
        """Apply one period: kick, then free evolution."""
        y = self._kick_phase * _real_apply(self.hop_v.T, psi)
        y = _real_apply(self.hop_v, y)
        y = self._free_phase * _real_apply(self.free_v.T, y)
        return _real_apply(self.free_v, y)

    def matrix(self) -> np.ndarray:
        """Materialize the dense one-cycle unitary (cached)."""
        if self._matrix is None:
            u_kick = (self.hop_v * self._kick_phase) @ self.hop_v.T
            u_free = (self.free_v * self._free_phase) @ self.free_v.T
            u = u_free @ u_kick
            defect = unitarity_defect(u)
            if defect > UNITARITY_TOL:
                raise NumericalAbort(
                    f"floquet matrix unitarity defect {defect:.3e} exceeds "
                    f"{UNITARITY_TOL}"
                )
            self._matrix = u
        return self._matrix


def build_floquet(basis: FockBasis, params: ModelParams) -> FloquetOperator:
    h_free = build_free_hamiltonian(basis, params)
    hop = build_hopping(basis)
    free_w, free_v = checked_eigh(h_free.matrix, label="free Hamiltonian")
    hop_w, hop_v = checked_eigh(hop.matrix, label="hopping operator")
    return FloquetOperator(params=params, basis=basis,
                           free_w=free_w, free_v=free_v,
                           hop_w=hop_w, hop_v=hop_v,
                           sz_diag=sz_diagonal(basis))


def evolve_stroboscopic(op: FloquetOperator, psi0: Optional[np.ndarray],
                        n_max: int) -> TrajectoryRecord:
    """Order parameter (-1)^n <S^z>/N sampled just before each kick.

    psi0 = None starts from the fully polarized state.  Aborts if the state
    norm drifts by more than 1e-8.
    """
    if psi0 is None:
        psi = fully_up_state(op.basis)
    else:
        psi = np.asarray(psi0, dtype=np.complex128).copy()
    if psi.shape != (op.dim,):
        raise ValueError(f"psi0 must have shape ({op.dim},)")
    values = np.empty(n_max + 1)
    for n in range(n_max + 1):
        norm2 = float(np.real(psi.conj() @ psi))
        if abs(np.sqrt(norm2) - 1.0) > NORM_TOL:
            raise NumericalAbort(
                f"state norm drifted to {np.sqrt(norm2):.12f} at cycle {n}"
            )
        sz = float(np.real(psi.conj() @ (op.sz_diag * psi)))
        values[n] = order_parameter(n, sz, op.params.N)
        if n < n_max:
            psi = op.cycle(psi)
    times = op.params.tau * np.arange(n_max + 1)
    return TrajectoryRecord(times=times, values=values,
                            meta={"engine": "sector_floquet",
                                  "params": op.params.as_dict()})


def first_zero(record: TrajectoryRecord) -> Optional[int]:
    """Index of the first sign change or zero of the order parameter.

    Returns the first n with values[n] <= 0 when values[0] > 0 (and the
    mirrored condition when values[0] < 0); None if no crossing occurs.
    """
    v = record.values
    if v[0] == 0.0:
        return 0
    sign = 1.0 if v[0] > 0 else -1.0
    hits = np.nonzero(sign * v <= 0.0)[0]
    return int(hits[0]) if hits.size else None


def spacing_ratio(phases: np.ndarray, min_levels: int = 10,
                  degeneracy_tol: float = 1e-12) -> float:
    """Mean consecutive-gap ratio r of a set of eigenphases.

    Phases are sorted increasing; gaps below degeneracy_tol are dropped; no
    wrap-around gap is added.  r = <min(g_a, g_{a+1}) / max(g_a, g_{a+1})>.
    """
    phases = np.sort(np.asarray(phases, dtype=np.float64))
    if phases.size < min_levels:
        raise ValueError(f"need at least {min_levels} levels, got {phases.size}")
    gaps = np.diff(phases)
    gaps = gaps[gaps >= degeneracy_tol]
    if gaps.size < 2:
        raise ValueError("fewer than two usable gaps after degeneracy filtering")
    ratios = np.minimum(gaps[:-1], gaps[1:]) / np.maximum(gaps[:-1], gaps[1:])
    return float(ratios.mean())


def level_spacing_ratio(op: FloquetOperator, use_parity: bool = True) -> float:
    """r statistic of the Floquet eigenphases in the mirror-even sector.

    Verifies [U, P] = 0 before projecting; set use_parity=False to use the
    full sector spectrum (mixed symmetry, only meaningful for checks).
    """
    import scipy.linalg

    u = op.matrix()
    if use_parity:
        p = build_parity(op.basis).matrix
        defect = np.abs(u @ p - p @ u).max()
        if defect > 1e-8:
            raise NumericalAbort(
                f"[U, parity] defect {defect:.3e}; symmetry projection invalid"
            )
        q = even_sector_basis(op.basis)
        u = q.T @ u @ q
    ev = scipy.linalg.eigvals(u)
    return spacing_ratio(np.angle(ev))


def sample_poisson_ratio(n_levels: int, rng: np.random.Generator) -> float:
    """r of one synthetic Poisson spectrum (iid exponential gaps)."""
    levels = np.cumsum(rng.exponential(size=n_levels))
    return spacing_ratio(levels)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The R-diagonal phase fix makes the distribution exactly Haar rather
    than QR-convention dependent.
    """
    z = (rng.standard_normal((dim, dim))
         + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_coe_ratio(dim: int, rng: np.random.Generator) -> float:
    """r of one COE matrix U = W^T W with W Haar."""
    import scipy.linalg

    w = haar_unitary(dim, rng)
    u = w.T @ w
    ev = scipy.linalg.eigvals(u)
    return spacing_ratio(np.angle(ev))
