"""Shared fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from sosage.hyperstruct import Universe


@pytest.fixture
def universe() -> Universe:
    return Universe(max_order=8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
