import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hpolytope(rng, d, n_points=12):
    """Hull of random points around the origin (origin strictly inside)."""
    from revolve_john.geometry import hull_to_hpolytope

    pts = rng.normal(size=(n_points, d))
    pts = np.vstack([pts, 0.3 * np.eye(d), -0.3 * np.eye(d)])
    return hull_to_hpolytope(pts)


# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
