"""Pytest configuration and fixtures.

Geometries are immutable and relatively costly to build, so each q is built once per
session and shared.
"""

import os
from functools import lru_cache

import pytest

os.environ.setdefault("CL_ENVIRONMENT", "ci")


@lru_cache(maxsize=None)
def _geometry(q: int):
    from cameron_liebler.core.field import build_field_of_order
    from cameron_liebler.core.geometry import build_geometry

    return build_geometry(build_field_of_order(q))


@lru_cache(maxsize=None)
def _decomposition(q: int):
    from cameron_liebler.core.classes import decompose

    return decompose(_geometry(q))


@pytest.fixture(scope="session")
def geometry_of():
    """Factory: q -> shared Geometry."""
    return _geometry


@pytest.fixture(scope="session")
def decomposition_of():
    """Factory: q -> shared OrbitDecomposition."""
    return _decomposition


@pytest.fixture(scope="session")
def geom3():
    return _geometry(3)


@pytest.fixture(scope="session")
def geom5():
    return _geometry(5)


@pytest.fixture(scope="session")
def geom7():
    return _geometry(7)


@pytest.fixture(scope="session")
def dec3():
    return _decomposition(3)


@pytest.fixture(scope="session")
def dec5():
    return _decomposition(5)


@pytest.fixture(scope="session")
def dec7():
    return _decomposition(7)


@pytest.fixture(autouse=True)
def clear_settings_cache():
    """Settings are cached; drop the cache so env patches take effect per test."""
    from cameron_liebler.config import get_settings

    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
