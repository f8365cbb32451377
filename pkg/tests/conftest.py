"""Shared spaces and measures for the mmclt tests."""

from pathlib import Path

import pytest

from mmclt.analyzer.measure import uniform_measure
from mmclt.analyzer.metric_core import euclidean_space, make_space, random_euclidean_space

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "sample_data"
CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


@pytest.fixture
def sample_dir():
    return SAMPLE_DIR


@pytest.fixture
def two_point():
    """Two points at distance 1."""
    return make_space([[0.0, 1.0], [1.0, 0.0]], labels=["a", "b"])


@pytest.fixture
def collinear():
    """Points 0, 1, 2 on a line."""
    return euclidean_space([0.0, 1.0, 2.0])


@pytest.fixture
def equilateral():
    return make_space([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])


@pytest.fixture
def cloud20():
    """20 random points in the unit square."""
    return random_euclidean_space(20, dim=2, seed=11)


@pytest.fixture
def uniform20(cloud20):
    return uniform_measure(cloud20)


@pytest.fixture
def defaults_yaml():
    return CONFIG_DIR / "defaults.yaml"
