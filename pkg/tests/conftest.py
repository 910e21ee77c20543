import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_chart_points(rng, n, box=5.0, min_axis=0.05, min_ring=0.05):
    """Random Cartesian points staying clear of the z-axis and core ring."""
    pts = []
    while len(pts) < n:
        p = rng.uniform(-box, box, 3)
        rho = np.hypot(p[0], p[1])
        if rho < min_axis:
            continue
        if (rho - 1.0) ** 2 + p[2] ** 2 < min_ring ** 2:
            continue
        pts.append(p)
    return np.array(pts)
