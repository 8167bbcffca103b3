import numpy as np
import pytest
from scipy import optimize

import excursia as ex

VALID_MODELS = [
    ex.Diffusion(d=1),
    ex.Diffusion(d=2),
    ex.Diffusion(d=5),
    ex.RandomAcceleration(),
    ex.ShiftedGaussian(alpha=0.0),
    ex.MaternHalfInteger(nu=2.5),
    ex.MaternHalfInteger(nu=3.5),
    ex.MaternHalfInteger(nu=4.5),
    ex.GeneralizedLaplace(alpha=1.0),
]

ALL_MODELS = VALID_MODELS + [ex.ShiftedGaussian(alpha=2.0)]


def survival_inverse_oracle(model, u, hi0=1.0):
    """Independent root-bracketing inverse of the survival, via brentq."""
    hi = hi0
    while float(np.asarray(ex.e0(model, hi))) >= u:
        hi *= 2.0
    return optimize.brentq(lambda t: float(np.asarray(ex.e0(model, t))) - u, 0.0, hi, xtol=1e-14)


@pytest.fixture
def rng():
    return ex.RngStream(20240042, 0)
