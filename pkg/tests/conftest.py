from __future__ import annotations

import numpy as np
import pytest

from biflat.models import EpsilonModel, epsilon_fields

P3 = np.array([1.0, 2.0, 4.0])


@pytest.fixture
def p3() -> np.ndarray:
    return P3.copy()


@pytest.fixture
def eps_half():
    model = EpsilonModel(3, 0.5)
    beta, H = epsilon_fields(model)
    return model, beta, H
