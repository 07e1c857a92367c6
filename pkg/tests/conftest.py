import numpy as np
import pytest

from kieferlab import DyadicGrid, ProcessSpec, Trajectory, ecdf, generate_trajectory


@pytest.fixture(scope="session")
def uniform_ecdf():
    # Dense uniform calibration; F(s) ~= s to ~1e-3.
    spec = ProcessSpec(kind="iid", seed=123456)
    return ecdf(generate_trajectory(spec, 2**19))


@pytest.fixture(scope="session")
def iid_traj():
    return generate_trajectory(ProcessSpec(kind="iid", seed=2024), 2**16)


@pytest.fixture(scope="session")
def lsv_traj():
    return generate_trajectory(
        ProcessSpec(kind="lsv", gamma=0.3, seed=2024), 2**18
    )


@pytest.fixture()
def grid3():
    return DyadicGrid(3)


def make_traj(values, kind="iid", **kw):
    return Trajectory(values=np.asarray(values, dtype=float), spec=ProcessSpec(kind=kind, **kw))
