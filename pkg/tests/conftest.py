import numpy as np
import pytest

from rydphon import ChainSpec, Topology


def paper_spec(d=2.0, topology=Topology.TRIVIAL, n_cells=7, **kwargs):
    """Chain with the parameter set used throughout the figures:
    14 atoms, delta = 1, a = 2d, magic dipole angle, phi = 0."""
    return ChainSpec(n_cells=n_cells, d=d, topology=topology, **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240812)
