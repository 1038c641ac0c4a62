import numpy as np
import pytest
from hypothesis import strategies as st

from detmath.geometry import BBox

coord = st.floats(min_value=-500.0, max_value=500.0, allow_nan=False, allow_infinity=False)
extent = st.floats(min_value=0.5, max_value=300.0, allow_nan=False, allow_infinity=False)


@st.composite
def boxes(draw):
    x, y = draw(coord), draw(coord)
    w, h = draw(extent), draw(extent)
    return BBox(x, y, x + w, y + h)


@st.composite
def int_boxes(draw, field=64):
    x1 = draw(st.integers(0, field - 1))
    y1 = draw(st.integers(0, field - 1))
    x2 = draw(st.integers(x1 + 1, field))
    y2 = draw(st.integers(y1 + 1, field))
    return BBox(x1, y1, x2, y2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_int_boxes(rng, n, field=64):
    a = rng.integers(0, field, size=(n, 2))
    b = rng.integers(0, field, size=(n, 2))
    lo = np.minimum(a, b)
    hi = np.maximum(a, b) + 1
    hi = np.minimum(hi, field)
    lo = np.minimum(lo, hi - 1)
    return np.column_stack([lo[:, 0], lo[:, 1], hi[:, 0], hi[:, 1]])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
