from importlib import resources

import numpy as np
import pytest

from gatekeeper import files, model, spectral

W0 = 1.3
BETA = 0.05


def fixture_path(name):
    return resources.files("gatekeeper") / "fixtures" / name


def load_fixture(name):
    return files.load_config(fixture_path(name))[0]


def coherent_config(x0=3.0, p0=0.0, omega0=W0, beta=BETA, delta_phi=0.1, times=None, **grid):
    times = np.linspace(0, 60 / omega0, 601) if times is None else times
    return model.validate(model.OscillatorParams(omega0, beta),
                          model.CondensateParams(delta_phi=delta_phi),
                          model.Coherent(x0, p0), model.SimulationGrid(times, **grid))


@pytest.fixture(scope="session")
def fig3():
    return load_fixture("fig3.json")


@pytest.fixture(scope="session")
def fig4():
    return load_fixture("fig4.json")


@pytest.fixture(scope="session")
def fig3_spectral(fig3):
    return spectral.mean_position(fig3)


@pytest.fixture(scope="session")
def fig4_spectral(fig4):
    return spectral.mean_position(fig4)


@pytest.fixture(scope="session")
def fig4_stationary(fig4):
    return spectral.stationary_value(fig4)
