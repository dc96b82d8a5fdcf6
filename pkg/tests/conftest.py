import os

import pytest
from hypothesis import HealthCheck, settings

from demachar.rootsys import RankedType, build_root_system

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def rs(series: str, n: int):
    return build_root_system(RankedType(series, n))


@pytest.fixture(scope="session")
def D4():
    return rs("D", 4)


@pytest.fixture(scope="session")
def D5():
    return rs("D", 5)


@pytest.fixture(scope="session")
def D7():
    return rs("D", 7)


@pytest.fixture(scope="session")
def A1():
    return rs("A", 1)


@pytest.fixture(autouse=True)
def _private_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("DEMACHAR_CACHE", str(tmp_path / "cache"))
