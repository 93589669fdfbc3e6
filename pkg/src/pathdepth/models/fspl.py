"""Free space path loss, the no-obstruction baseline."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonPositiveInput

C_LIGHT_M_S = 299_792_458.0

#: 20*log10(4*pi*1e6 / c): the dB constant for f in MHz and d in meters.
FSPL_CONSTANT_DB = 20.0 * math.log10(4.0 * math.pi * 1.0e6 / C_LIGHT_M_S)


def fspl_db(f_mhz, d_m):
    """Free space path loss in dB for frequency in MHz and distance in meters.

    Vectorized over numpy inputs; scalars in, scalar out. Raises
    NonPositiveInput when any frequency or distance is <= 0.
    """
    f = np.asarray(f_mhz, dtype=float)
    d = np.asarray(d_m, dtype=float)
    if not (f > 0).all() or not (d > 0).all():
        raise NonPositiveInput("frequency and distance must be > 0")
    loss = 20.0 * np.log10(d) + 20.0 * np.log10(f) + FSPL_CONSTANT_DB
    if np.isscalar(f_mhz) and np.isscalar(d_m):
        return float(loss)
    return loss
