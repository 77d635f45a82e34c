"""Classical kicked angular-momentum chain (the l -> infinity reference).

N unit-spin-1/2-length classical vectors m_j (|m| = 1/2), all starting at
(0, 0, 1/2), precess between kicks as dm/dt = m x B with
B = (2h, 0, 4J m^z) and receive exact kick rotations about +x by
theta_j = phi - (K/N) sum_{i != j} m^x_i.  The reported order parameter
(-1)^n (1/N) sum m^z is normalized by the spin length 1/2 so it starts at
1 and is directly comparable to O/l from the quantum engines.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .params import ModelParams, NumericalAbort, TrajectoryRecord

DEFAULT_STEPS_PER_PERIOD = 1000


def classical_trajectory(params: ModelParams, n_max: int,
                         steps_per_period: int = DEFAULT_STEPS_PER_PERIOD
                         ) -> TrajectoryRecord:
    """Stroboscopic normalized order parameter of the classical chain."""
    o, ok = _kernels.classical_run(params.N, params.h, params.J, params.K,
                                   params.phi, params.tau,
                                   steps_per_period, n_max)
    if not ok:
        raise NumericalAbort("classical trajectory became non-finite")
    return TrajectoryRecord(times=params.tau * np.arange(n_max + 1),
                            values=o,
                            meta={"engine": "classical",
                                  "params": params.as_dict(),
                                  "steps_per_period": steps_per_period})
