import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

SENN_TREATED = (23, 15, 48, 67, 121, 177)
SENN_CONTROL = (42, 40, 62, 103, 184, 11)
KAROLINSKA_TREATED = (51, 18, 10)
KAROLINSKA_CONTROL = (50, 21, 8)


def _normalize(weights):
    w = np.asarray(weights, dtype=float)
    if w.sum() == 0:
        w[0] = 1.0
    return w / w.sum()


@st.composite
def marginal(draw, J):
    # Integer weights produce exact zeros often, which hits the empty-category
    # paths of the closed forms.
    w = draw(st.lists(st.integers(0, 20), min_size=J, max_size=J))
    return _normalize(w)


@st.composite
def marginal_pair(draw, min_J=2, max_J=8):
    J = draw(st.integers(min_J, max_J))
    return draw(marginal(J)), draw(marginal(J))


@pytest.fixture
def senn_marginals():
    t = np.array(SENN_TREATED, float)
    c = np.array(SENN_CONTROL, float)
    return t / t.sum(), c / c.sum()


@pytest.fixture
def example_pair():
    return np.array([0.2, 0.3, 0.5]), np.array([0.5, 0.3, 0.2])
