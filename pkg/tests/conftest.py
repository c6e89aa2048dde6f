import numpy as np
import pytest
from hypothesis import settings

from u2gchan.config import default_config
from u2gchan.scenario import AntennaArray

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def base_cfg():
    """Default scenario shortened to 3 s and without large-scale scaling."""
    return default_config(duration=3.0, large_scale_in_cir=False)


@pytest.fixture(scope="session")
def iso_cfg(base_cfg):
    """Isotropic single-element terminals, static posture."""
    from u2gchan.scenario import PostureTrack

    one = AntennaArray(np.zeros((1, 3)), "isotropic")
    return base_cfg.with_updates(tx_array=one, rx_array=one, posture=PostureTrack())


@pytest.fixture(scope="session")
def plane_model():
    """Network trained on the synthetic plane PL = 0.1 d + 2 a + 3 b + 40."""
    from u2gchan.largescale import plane_corpus
    from u2gchan.mlp import MlpHyperparams, train_mlp

    return train_mlp(*plane_corpus(np.random.default_rng(0)), MlpHyperparams(seed=0))


@pytest.fixture(scope="session")
def ngs_model():
    from u2gchan.channel import ngs_model_for
    from u2gchan.config import default_config

    return ngs_model_for(default_config())


# one PASS/FAIL line per acceptance criterion, shown after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
