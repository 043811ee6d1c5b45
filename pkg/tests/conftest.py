from __future__ import annotations

import numpy as np
import pytest

from double_aztec.airy import AiryContext
from double_aztec.symbols import KernelContext, build_context


@pytest.fixture(scope="session")
def ctx_small() -> KernelContext:
    return build_context(0.5, 2, 0)


@pytest.fixture(scope="session")
def ctx_mid() -> KernelContext:
    return build_context(0.5, 4, 1)


@pytest.fixture(scope="session")
def ctx_large() -> KernelContext:
    return build_context(0.5, 8, 2)


@pytest.fixture(scope="session")
def airy_ctx() -> AiryContext:
    return AiryContext(1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
