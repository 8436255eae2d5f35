import time

import pytest

from beckerqc import analytic, construction

# Declared q for the quadratic acceptance runs: the Schwarzian certificate
# gives q_hat ~ 0.04356, but the origin-preimage bound |z0| <= sqrt(3q)
# requires q >= |G^{-1}(0)|/3 ~ 0.0602, so the runs declare 0.07.
QUAD_Q = 0.07


@pytest.fixture(scope="session")
def quad_function():
    return analytic.catalog("quadratic", 0.2)


@pytest.fixture(scope="session")
def quad_state(quad_function):
    return construction.build_state(quad_function, QUAD_Q)


@pytest.fixture(scope="session")
def quad_run(quad_function):
    """Full acceptance-grade construction run: n=512, 8 + 24 times, span 5."""
    started = time.perf_counter()
    report = construction.run_construction(
        quad_function, QUAD_Q, n=512, n_pre=8, n_post=24, t_span=5.0,
        fit_tol=1e-8, subh_n=200)
    elapsed = time.perf_counter() - started
    return report, elapsed


@pytest.fixture(scope="session")
def identity_state():
    return construction.build_state(analytic.catalog("identity"), 0.05)
