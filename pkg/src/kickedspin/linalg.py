"""Dense Hermitian eigendecomposition with an accuracy contract.

All operator exponentials in this package go through spectral calculus, so a
broken eigensolve would corrupt every engine silently.  checked_eigh wraps
the LAPACK solver and verifies the reconstruction A = V diag(w) V^H before
returning.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .params import NumericalAbort

# Entrywise reconstruction defect allowed, relative to max|A_ij|.
RECONSTRUCTION_RTOL = 1e-9

# Above this dimension the full dim^2 reconstruction is replaced by a
# randomized probe (8 sign vectors); the probe estimates row norms of the
# defect matrix, which dominate its entrywise maximum with high probability.
_FULL_CHECK_MAX_DIM = 2048


def checked_eigh(a: np.ndarray, label: str = "operator"):
    """Eigendecomposition of a Hermitian matrix with reconstruction check.

    Returns (eigenvalues ascending, eigenvectors as columns).  Raises
    NumericalAbort if ||A - V diag(w) V^H||_max exceeds 1e-9 * ||A||_max.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"{label}: expected a square matrix, got {a.shape}")
    w, v = scipy.linalg.eigh(a, driver="evd" if n > 64 else None)
    scale = np.abs(a).max() or 1.0
    tol = RECONSTRUCTION_RTOL * scale
    if n <= _FULL_CHECK_MAX_DIM:
        defect = np.abs(a - (v * w) @ v.conj().T).max()
    else:
        rng = np.random.default_rng(0)
        defect = 0.0
        for _ in range(8):
            x = rng.choice([-1.0, 1.0], size=n)
            resid = a @ x - v @ (w * (v.conj().T @ x))
            defect = max(defect, np.abs(resid).max() / n**0.5)
    if defect > tol:
        raise NumericalAbort(
            f"eigendecomposition of {label} (dim {n}) violated the accuracy "
            f"contract: defect {defect:.3e} > {tol:.3e}"
        )
    return w, v


def unitarity_defect(u: np.ndarray) -> float:
    """max|U^H U - I|, the unitarity defect used by Floquet-build checks."""
    n = u.shape[0]
    return float(np.abs(u.conj().T @ u - np.eye(n)).max())
