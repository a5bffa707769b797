import os

import numpy as np
import pytest

from gzfdp import gen_iid_gaussian, load_channel_fixture

HERE = os.path.dirname(os.path.abspath(__file__))
REPO = os.path.dirname(HERE)
SPECS_DIR = os.path.join(REPO, "specs")
EXAMPLE1_PATH = os.path.join(SPECS_DIR, "example1.txt")


@pytest.fixture(scope="session")
def example1():
    """The 4x4 reference channel used throughout the docs."""
    return load_channel_fixture(EXAMPLE1_PATH)


@pytest.fixture(scope="session")
def example1_path():
    return EXAMPLE1_PATH


@pytest.fixture(scope="session")
def specs_dir():
    return SPECS_DIR


def random_channels(count, n_users, n_antennas, seed):
    """Yield `count` IID channel draws with per-trial derived seeds."""
    seeds = np.random.SeedSequence(seed).generate_state(count)
    for s in seeds:
        yield gen_iid_gaussian(n_users, n_antennas, int(s))
