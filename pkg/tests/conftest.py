import math

import numpy as np
import pytest
from hypothesis import strategies as st

from omnoise.model import SystemParams, hz


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def systems(min_eta=0.01, max_eta=0.999):
    """Physically sensible random systems, rates spanning several decades."""

    @st.composite
    def build(draw):
        eta = draw(st.floats(min_eta, max_eta))
        omb = 10 ** draw(st.floats(-2, 2))
        omega_m = hz(10 ** draw(st.floats(5, 9)))
        kappa = omega_m / omb
        return SystemParams(
            omega_m=omega_m,
            gamma_m=omega_m / 10 ** draw(st.floats(1, 5)),
            kappa_c=(1 - eta) * kappa,
            kappa_ex=eta * kappa,
            g0=hz(10 ** draw(st.floats(1, 4))),
            omega_cav=hz(1.94e14),
            epsilon=draw(st.sampled_from([1, -1])),
        )

    return build()


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


TAU = 2 * math.pi
