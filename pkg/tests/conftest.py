import numpy as np
import pytest

from coupled_hover.certificate import DomainBounds, GainSet
from coupled_hover.controller import HoverController, Reference
from coupled_hover.platform import Platform


def make_platform(coupling=0.05, inertia=(0.01, 0.01, 0.02), mass=1.0, gravity=9.81):
    """Single-thrust-column platform; `coupling` is the B[0, 2] entry."""
    B = np.zeros((3, 3))
    B[0, 2] = coupling
    return Platform(
        mass=mass,
        gravity=gravity,
        inertia=np.diag(inertia),
        force_alloc=np.array([[0.0], [0.0], [1.0]]),
        spurious_alloc=B,
        moment_alloc=np.diag([0.02, 0.02, 0.04]),
    )


@pytest.fixture
def reference_platform():
    return make_platform(coupling=0.05)


@pytest.fixture
def gamma0_platform():
    return make_platform(coupling=0.0)


@pytest.fixture
def reference_gains():
    return GainSet(k_p=6.0, k_v=4.0, k_R=8.0, k_Omega=0.8, c1=1.2, c2=0.2)


@pytest.fixture
def reference_domain():
    return DomainBounds(psi=0.02, delta=0.4, e_p_max=0.12, v_max=0.12, Omega_max=0.5)


@pytest.fixture
def hover_reference():
    return Reference(p_r=np.array([0.0, 0.0, 1.0]), R_r=np.eye(3))


@pytest.fixture
def reference_controller(reference_gains, reference_platform, hover_reference, reference_domain):
    return HoverController(reference_gains, reference_platform, hover_reference, reference_domain)
