import math

import pytest

from beamcap import AntennaModel, RadioParams


@pytest.fixture()
def baseline_radio() -> RadioParams:
    """Baseline 60 GHz link budget used throughout the numeric examples."""
    return RadioParams(p_tx_dbm=10.0, n_thr_dbm=-78.0, theta=math.radians(52.0),
                       kappa=2.0, c_const=6.3e6)


@pytest.fixture()
def analytic_antenna() -> AntennaModel:
    return AntennaModel.analytic()
