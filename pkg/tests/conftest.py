import pytest

from whitney_sfc.analysis import sample_e_points, vanish_probe
from whitney_sfc.whitney import WhitneyMap, build_E

PROBE_SEED = 20240611


@pytest.fixture(scope="session")
def deep_map_21():
    return WhitneyMap(2, 1, depth=40)


@pytest.fixture(scope="session")
def e_points_21(deep_map_21):
    E = build_E(deep_map_21, 4)
    return E, sample_e_points(E, 100, PROBE_SEED)


@pytest.fixture(scope="session")
def vanish_report_21(deep_map_21, e_points_21):
    return vanish_probe(deep_map_21, e_points_21[1], 1.5)
