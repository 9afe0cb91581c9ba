import time

import numpy as np
import pytest

from tofcodes.codegen import gen_gcomb
from tofcodes.model import CameraConfig, derive_grid
from tofcodes.shifts import apply_shifts, greedy_shift_search
from tofcodes.synthesis import build_kernel, synthesize


@pytest.fixture(scope="session")
def prototype():
    cfg = CameraConfig.prototype()
    grid = derive_grid(cfg)
    return cfg, grid, build_kernel(grid)


@pytest.fixture(scope="session")
def prototype_gcomb(prototype):
    cfg, grid, kernel = prototype
    t0 = time.perf_counter()
    code, trace = gen_gcomb(cfg.m, grid.n, cfg.n_deg, grid, kernel)
    elapsed = time.perf_counter() - t0
    return code, trace, synthesize(code, kernel, grid), elapsed


@pytest.fixture(scope="session")
def prototype_greedy(prototype_gcomb):
    _, _, a, _ = prototype_gcomb
    t0 = time.perf_counter()
    res = greedy_shift_search(a)
    elapsed = time.perf_counter() - t0
    return res, apply_shifts(a, res.shifts), elapsed


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
