"""Shared strategies and assertions for the test suite."""

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from kprsim.core import ProbabilityVector


@st.composite
def rational_vectors(draw, n=None, min_n=2, max_n=4, max_weight=6):
    """Probability vectors with small rational entries (some zeros, possibly one-hot)."""
    if n is None:
        n = draw(st.integers(min_n, max_n))
    w = draw(st.lists(st.integers(0, max_weight), min_size=n, max_size=n).filter(lambda xs: sum(xs) > 0))
    total = sum(w)
    return [Fraction(x, total) for x in w]


@st.composite
def float_vectors(draw, n=None, min_n=2, max_n=40):
    if n is None:
        n = draw(st.integers(min_n, max_n))
    raw = draw(st.lists(
        st.one_of(st.just(0.0), st.floats(1e-6, 1.0, allow_nan=False)),
        min_size=n, max_size=n,
    ).filter(lambda xs: sum(xs) > 0))
    arr = np.asarray(raw)
    return arr / arr.sum()


def pv(entries):
    return ProbabilityVector([float(x) for x in entries])


def assert_vector(v, expected, atol=1e-12):
    got = v.entries if isinstance(v, ProbabilityVector) else np.asarray(v)
    np.testing.assert_allclose(got, [float(x) for x in expected], rtol=0, atol=atol)


def assert_distribution(v, tol=1e-9):
    arr = v.entries if isinstance(v, ProbabilityVector) else np.asarray(v)
    assert np.all(arr >= 0)
    assert abs(arr.sum() - 1.0) <= tol
