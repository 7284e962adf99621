from __future__ import annotations

import numpy as np
import pytest

from paralex.frame import FrameProvider, catalog_lookup, sample_points
from paralex.tensor import Box


def identity_provider(n: int = 3) -> FrameProvider:
    return FrameProvider(f"identity{n}", Box((-1.0,) * n, (1.0,) * n), lambda x: np.eye(n))


@pytest.fixture
def heis():
    return catalog_lookup("heisenberg3")


@pytest.fixture
def affine():
    return catalog_lookup("affine2")


@pytest.fixture
def quat():
    return catalog_lookup("quaternion3")


@pytest.fixture
def rotor():
    return catalog_lookup("rotor2")


@pytest.fixture
def ident():
    return identity_provider(3)


CATALOG = ["euclidean-3", "heisenberg3", "affine2", "quaternion3", "rotor2"]
FLAT = ["euclidean-3", "heisenberg3", "affine2", "quaternion3"]


def points(name: str, count: int = 20, seed: int = 42):
    return sample_points(catalog_lookup(name), count, seed)
