"""Kicked all-to-all spin simulation lab.

Cross-validated engines for the same periodically kicked spin model:

* exact Floquet dynamics in the permutation-symmetric (bosonic) sector,
* a brute-force full tensor-product oracle for tiny systems,
* the N -> infinity mean-field (Gross-Pitaevskii) limit with Rabi and
  Lyapunov diagnostics,
* discrete truncated Wigner Monte Carlo for the constituent-spin model,
* the classical angular-momentum reference (the l -> infinity limit),

plus shared analysis (periodograms, decay fits, crossing detection) and a
config-driven CLI emitting CSV tables with JSON manifests.
"""

__version__ = "0.1.0"

from .params import ModelParams, NumericalAbort, TrajectoryRecord, order_parameter

__all__ = [
    "ModelParams",
    "TrajectoryRecord",
    "NumericalAbort",
    "order_parameter",
    "__version__",
]
