import numpy as np
import pytest

from dmfkit import BasisSpec, build_even_tempered


@pytest.fixture(scope="session")
def helium8():
    """n=8 helium set (q=2) used by the sandwich checks."""
    return build_even_tempered(BasisSpec(count=8, alpha0=0.05, beta=2.2, Z=2.0, q=2))


@pytest.fixture(scope="session")
def helium10():
    """n=10 helium set (q=2) used by the minimization checks."""
    return build_even_tempered(BasisSpec(count=10, alpha0=0.05, beta=2.2, Z=2.0, q=2))


@pytest.fixture(scope="session")
def hydrogen10():
    """Diffuse n=10 hydrogen set reaching -0.49997 Ha."""
    return build_even_tempered(BasisSpec(count=10, alpha0=0.02, beta=2.5, Z=1.0, q=1))


@pytest.fixture(scope="session")
def small6():
    """n=6 q=2 set for gradient checks."""
    return build_even_tempered(BasisSpec(count=6, alpha0=0.05, beta=2.2, Z=2.0, q=2))


@pytest.fixture(scope="session")
def small6_q1():
    """n=6 q=1 set for single-spin identities."""
    return build_even_tempered(BasisSpec(count=6, alpha0=0.05, beta=2.2, Z=2.0, q=1))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
