import numpy as np
import pytest

from p2tet.analysis import StudyOptions, convergence_study


@pytest.fixture(scope="session")
def study_reports():
    """Desk-scale studies shared by the acceptance and anchor tests.

    poly1 includes level 1 so its level-2 rate has a predecessor; trig and
    poly2 start at level 2 and report 0.00 there.
    """
    opts = StudyOptions()
    return {
        "poly1": convergence_study("poly1", [1, 2, 3, 4, 5], opts),
        "trig": convergence_study("trig", [2, 3, 4, 5], opts),
        "poly2": convergence_study("poly2", [2, 3, 4, 5], opts),
    }


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
