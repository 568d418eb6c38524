import math

import numpy as np
import pytest

from swsim import (
    ControllerParams,
    ExcitationProfile,
    GraphFamily,
    WeightedGraph,
    dwell_free_schedule,
)

T_PRIME = math.pi


@pytest.fixture(scope="session")
def chain_family():
    """Three single-edge graphs whose union is the path on four agents."""
    return GraphFamily(
        {m: WeightedGraph.from_edges(4, [(m - 1, m, 1.0)]) for m in (1, 2, 3)}
    )


@pytest.fixture(scope="session")
def benchmark_profile():
    return ExcitationProfile.constant(t_small=T_PRIME, t_big=3.0 * T_PRIME, value=5.0)


@pytest.fixture(scope="session")
def unit_gains():
    return ControllerParams(kv=1.0, kw=1.0)


@pytest.fixture()
def benchmark_schedule():
    # fresh per test: the schedule caches events as they are pulled
    return dwell_free_schedule(T_PRIME)


def base_config_doc():
    """A small, fast scenario document tests can mutate freely."""
    return {
        "n": 4,
        "graphs": {
            "1": [{"i": 1, "j": 2, "w": 1.0}],
            "2": [{"i": 2, "j": 3, "w": 1.0}],
            "3": [{"i": 3, "j": 4, "w": 1.0}],
        },
        "schedule": {"kind": "section4d", "t_prime": T_PRIME},
        "controller": {"kv": 1.0, "kw": 1.0},
        "excitation": {"T": T_PRIME, "T0": 3.0 * T_PRIME, "c": {"kind": "constant", "value": 5.0}},
        "integrator": {"step": 0.002, "t0": 0.0, "tf": 4.0},
        "init": {"kind": "random", "bound": 10.0, "seed": 0},
    }
