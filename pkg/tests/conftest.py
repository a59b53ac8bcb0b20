import numpy as np
import pytest

import conelab.association as assoc
from conelab import make_kernel_net, make_polynomial_profile


@pytest.fixture(scope="session")
def profile_q2():
    return make_polynomial_profile(2, 2)


@pytest.fixture(scope="session")
def profile_q4():
    return make_polynomial_profile(2, 4)


@pytest.fixture(scope="session")
def profile_1d():
    return make_polynomial_profile(1, 2)


@pytest.fixture(scope="session")
def kernel_q2(profile_q2):
    return make_kernel_net(profile_q2)


@pytest.fixture(scope="session")
def kernel_q4(profile_q4):
    return make_kernel_net(profile_q4)


@pytest.fixture(scope="session")
def kernel_shifted(profile_q2):
    return make_kernel_net(profile_q2, shift=[0.5, 0.0])


@pytest.fixture(scope="session")
def studies():
    """Convergence studies, cached per (alpha, kernel, transport) for the session."""
    cache = {}

    def run(alpha, kernel="model-q2", transport="identity"):
        key = (alpha, kernel, transport)
        if key not in cache:
            cfg = assoc.default_config(alpha, kernel=kernel, transport=transport)
            cache[key] = assoc.convergence_study(cfg)
        return cache[key]

    return run


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_spd_jet_arrays(rng, n):
    """Random well-conditioned symmetric jets (g, dg, ddg) for identity tests."""
    a = rng.normal(size=(n, 2, 2)) * 0.3
    g = np.eye(2) + 0.5 * (a + np.swapaxes(a, -1, -2))
    # push eigenvalues safely above zero
    w, v = np.linalg.eigh(g)
    w = np.clip(w, 0.4, None)
    g = np.einsum('nij,nj,nkj->nik', v, w, v)
    dg = rng.normal(size=(n, 2, 2, 2))
    dg = 0.5 * (dg + np.swapaxes(dg, -1, -2))
    ddg = rng.normal(size=(n, 2, 2, 2, 2))
    ddg = 0.5 * (ddg + np.swapaxes(ddg, -1, -2))
    ddg = 0.5 * (ddg + np.swapaxes(ddg, 1, 2))
    return g, dg, ddg
