import os
import sys

import numpy as np
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from shflab.forms import KForm  # noqa: E402
from shflab._kernels import SIZES  # noqa: E402

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


@st.composite
def kforms(draw, degree=None):
    k = draw(st.integers(0, 6)) if degree is None else degree
    return KForm(k, draw(st.lists(finite, min_size=SIZES[k], max_size=SIZES[k])))


@st.composite
def vectors(draw):
    return np.array(draw(st.lists(finite, min_size=6, max_size=6)))


@st.composite
def matrices(draw):
    return np.array(draw(st.lists(finite, min_size=36, max_size=36))).reshape(6, 6)


@st.composite
def metrics(draw):
    """Random positive definite metric: A A^T + I."""
    A = draw(matrices())
    return A @ A.T / 3.0 + np.eye(6)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
