"""Model parameters and shared conventions for the kicked all-to-all spin lab.

Every engine in this package simulates the same periodically kicked model:
free evolution generated by -(J/l)(s^z)^2 - 2h s^x per site (or its bosonic /
mean-field / phase-space image) interrupted by instantaneous kicks at
t = 0, tau, 2*tau, ...  The kick rotates every spin about x by roughly phi,
weakened by an all-to-all x-x coupling of strength K.

Conventions fixed here and shared by all engines:

* Kicks fire at t = n*tau starting from n = 0.  The stroboscopic state at
  index n is the state at n*tau^-, immediately BEFORE the n-th kick, so one
  driving cycle is (free evolution over tau) applied after (kick), and the
  n = 0 sample is the bare initial state.
* The spin magnitude l is a half-integer stored exactly as the integer 2l.
* The period-doubling order parameter is (-1)^n <S^z>/N; for the fully
  polarized initial state it starts at l.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Physical and driving parameters.

    J sets the energy unit (default 1.0).  h is the transverse field, K the
    dimensionless kick-coupling strength (normalized per site pair, K/2N),
    tau the driving period, phi the kick rotation angle in radians.  two_l
    is twice the spin magnitude (integer >= 1), N the number of sites.
    """

    h: float
    K: float
    tau: float
    phi: float
    two_l: int
    N: int
    J: float = 1.0

    def __post_init__(self) -> None:
        if int(self.two_l) != self.two_l or self.two_l < 1:
            raise ValueError(f"two_l must be an integer >= 1, got {self.two_l!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        # normalize integer-valued floats so two_l/N are usable as ints
        object.__setattr__(self, "two_l", int(self.two_l))
        object.__setattr__(self, "N", int(self.N))

    @property
    def l(self) -> float:
        """Spin magnitude l = two_l / 2 (exact: a half-integer)."""
        return self.two_l / 2.0

    @property
    def n_modes(self) -> int:
        """Number of magnetization modes m = -l ... l, i.e. 2l + 1."""
        return self.two_l + 1

    def mode_values(self) -> np.ndarray:
        """The m values -l, -l+1, ..., l as exact floats."""
        return np.arange(self.n_modes, dtype=np.float64) - self.two_l / 2.0

    def as_dict(self) -> dict[str, Any]:
        return {
            "J": self.J,
            "h": self.h,
            "K": self.K,
            "tau": self.tau,
            "phi": self.phi,
            "two_l": self.two_l,
            "N": self.N,
        }


def order_parameter(n, sz_expectation, N):
    """Period-doubling order parameter (-1)^n * sz_expectation / N.

    The alternating sign folds the expected per-period flip of <S^z> away, so
    persistent period doubling shows up as a non-vanishing plateau.  Accepts
    scalars or arrays (broadcast); n must be integer-valued.
    """
    if np.any(np.asarray(N) < 1):
        raise ValueError("N must be >= 1")
    n = np.asarray(n)
    sign = 1.0 - 2.0 * (np.mod(n, 2) != 0)
    out = sign * np.asarray(sz_expectation, dtype=np.float64) / N
    return out if out.ndim else float(out)


@dataclass
class TrajectoryRecord:
    """Stroboscopic series of the order parameter with optional error bars.

    times are stroboscopic indices n (strictly increasing integers), values
    the corresponding order-parameter samples, errors the one-sigma
    statistical errors where the engine is Monte Carlo.  meta carries the run
    manifest (engine id, parameters, seed) and must include "tau" for
    analysis routines that need real time.
    """

    times: np.ndarray
    values: np.ndarray
    errors: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have the same length")
        if len(self.times) and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.errors is not None:
            self.errors = np.asarray(self.errors, dtype=np.float64)
            if self.errors.shape != self.values.shape:
                raise ValueError("errors must have the same length as values")

    def __len__(self) -> int:
        return len(self.times)


class NumericalAbort(RuntimeError):
    """Raised when an engine detects numerical breakdown (norm drift,
    eigendecomposition contract violation, integrator divergence).  Mapped to
    exit code 3 by the CLI."""
