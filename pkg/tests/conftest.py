import numpy as np
import pytest

from eebeam import Scenario, dbm_to_watts, make_channels
from eebeam.sca import ScaOptions


def paper_scenario(gamma=1.0, theta=0.0, nt=4, pdyn_dbm=30.0, pt_dbm=40.0, psta_dbm=30.0, eta=0.35):
    """Desk-scale instance with the reference experiment's parameter style."""
    return Scenario(
        nt=nt,
        channels=make_channels(gamma, theta, nt),
        p_t=dbm_to_watts(pt_dbm),
        eta=eta,
        p_dyn=dbm_to_watts(pdyn_dbm),
        p_sta=dbm_to_watts(psta_dbm),
    )


@pytest.fixture
def scenario_aligned():
    # h2 = 0.3 * h1, strongly aligned users
    return paper_scenario(gamma=0.3, theta=0.0)


@pytest.fixture
def scenario_orthogonal():
    # theta = pi/2 makes the two channels orthogonal at nt=4
    return paper_scenario(gamma=1.0, theta=np.pi / 2)


@pytest.fixture
def fast_options():
    return ScaOptions(extra_starts=0)
