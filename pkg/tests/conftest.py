import numpy as np
import pytest
from hypothesis import strategies as st

from ncsep import NCParams, OscillatorPoint


def random_point(rng, hbar=1.0):
    theta, eta = rng.uniform(0, 1, 2) * hbar
    m1, m2, w1, w2 = rng.uniform(0.5, 2.0, 4)
    return OscillatorPoint(m1, m2, w1, w2, nc=NCParams(theta, eta, hbar))


@st.composite
def points(draw, hbar=st.sampled_from([1.0, 0.5, 2.0])):
    hb = draw(hbar)
    frac = st.floats(0.0, 1.0)
    pos = st.floats(0.5, 2.0)
    return OscillatorPoint(draw(pos), draw(pos), draw(pos), draw(pos),
                           nc=NCParams(draw(frac) * hb, draw(frac) * hb, hb))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
