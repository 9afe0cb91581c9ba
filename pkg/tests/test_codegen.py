import itertools
import math

import networkx as nx
import numpy as np
import pytest

from tofcodes.analysis import coherence
from tofcodes.codegen import (
    dif_matrix,
    gen_gcomb,
    gen_peg,
    gen_random,
    gen_she,
    she_from_selection,
    sylvester_entries,
    tanner_girth,
)
from tofcodes.errors import PoolExhausted, SizeUnsupported
from tofcodes.model import BinaryCodeMatrix, CameraConfig, derive_grid
from tofcodes.synthesis import build_kernel, synthesize


def grid_for(n, n_steps=4, fwhm=0.6, m=4):
    g = derive_grid(CameraConfig(f_m=448.0, f_r=448.0 / n, n_steps=n_steps, fwhm=fwhm, m=m))
    return g, build_kernel(g)


# -- random / SHE -----------------------------------------------------------


def test_random_deterministic():
    a = gen_random(2, 2, 0.5, seed=99)
    b = gen_random(2, 2, 0.5, seed=99)
    assert np.array_equal(a.entries, b.entries)


def test_random_seeds_differ():
    assert not np.array_equal(gen_random(14, 128, 0.5, 1).entries,
                              gen_random(14, 128, 0.5, 2).entries)


def test_random_density():
    c = gen_random(14, 128, 0.5, seed=1)
    assert 0.4 <= c.entries.mean() <= 0.6


def test_random_degenerate_size():
    assert gen_random(1, 1, 1 - 1e-12, seed=3).entries[0, 0] == 1


def test_she_small_example():
    # rows {0, 1} of [[1, 1], [1, -1]] with identity column permutation
    assert she_from_selection([0, 1], [0, 1]).entries.tolist() == [[1, 1], [1, 0]]


def test_sylvester_matches_recursive_construction():
    h = np.array([[1]])
    for _ in range(4):
        h = np.block([[h, h], [h, -h]])
    assert np.array_equal(sylvester_entries(range(16), range(16)), h)


def test_she_properties():
    c = gen_she(14, 16, seed=4)
    assert set(np.unique(c.entries)) <= {0, 1}
    assert np.array_equal(c.entries, gen_she(14, 16, seed=4).entries)
    # full-width rows are distinct Hadamard rows: mutually orthogonal in the +-1 domain
    pm = 2 * c.entries.astype(int) - 1
    g = pm @ pm.T
    assert np.array_equal(g, 16 * np.eye(14, dtype=int))


def test_she_size_limit():
    with pytest.raises(SizeUnsupported):
        gen_she(4, 300, seed=0, max_order=256)


# -- PEG and girth ----------------------------------------------------------


def test_peg_6_15_2():
    c = gen_peg(6, 15, 2)
    cols = c.column_support()
    assert all(len(s) == 2 for s in cols)
    assert len(set(cols)) == 15
    assert set(cols) == set(itertools.combinations(range(6), 2))
    assert tanner_girth(c) >= 6


def test_peg_single_column():
    assert gen_peg(2, 1, 2).entries.tolist() == [[1], [1]]


def test_peg_balanced_permutation():
    c = gen_peg(4, 4, 1)
    assert list(c.row_weights()) == [1, 1, 1, 1]
    assert list(c.column_degrees()) == [1, 1, 1, 1]


def test_peg_check_degrees_balanced():
    c = gen_peg(6, 12, 3)
    w = c.row_weights()
    assert w.max() - w.min() <= 1
    assert (c.column_degrees() == 3).all()


def test_girth_forest():
    assert tanner_girth(BinaryCodeMatrix(np.eye(4, dtype=np.uint8))) == math.inf


def test_girth_duplicate_pair():
    c = BinaryCodeMatrix.from_supports(4, [(0, 1), (0, 1), (2, 3)])
    assert tanner_girth(c) == 4


def _nx_girth(code):
    g = nx.Graph()
    for v, rows in enumerate(code.column_support()):
        for r in rows:
            g.add_edge(("v", v), ("c", r))
    return nx.girth(g)


@pytest.mark.parametrize("seed", range(15))
def test_girth_matches_networkx(seed):
    c = gen_random(5, 7, 0.35, seed=seed)
    assert tanner_girth(c) == _nx_girth(c)


# -- GComb ------------------------------------------------------------------


def test_gcomb_uses_all_pairs_of_three():
    g, k = grid_for(3, m=3)
    code, trace = gen_gcomb(3, 3, 2, g, k)
    assert sorted(code.column_support()) == [(0, 1), (0, 2), (1, 2)]
    assert len(trace.steps) == 3


def test_dif_example_is_not_rejected():
    c = BinaryCodeMatrix(np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=np.uint8))
    d = dif_matrix(c)
    assert d.T.tolist() == [[0, -1, 1], [-1, 1, 0]]
    rho = abs(d[:, 0] @ d[:, 1]) / (np.linalg.norm(d[:, 0]) * np.linalg.norm(d[:, 1]))
    assert rho == pytest.approx(0.5, abs=1e-15)
    assert coherence(d) == pytest.approx(0.5, abs=1e-15)


def test_gcomb_prototype(prototype_gcomb):
    code, trace, _, _ = prototype_gcomb
    assert code.entries.shape == (14, 128)
    assert (code.column_degrees() == 3).all()
    cols = code.column_support()
    assert len(set(cols)) == 128
    assert coherence(code.entries) < 1 - 1e-12
    assert coherence(dif_matrix(code)) < 1 - 1e-9
    assert len(trace.steps) == 128
    assert sum(trace.row_weights) == 3 * 128


def test_gcomb_is_pure(prototype, prototype_gcomb):
    cfg, grid, k = prototype
    code, trace, _, _ = prototype_gcomb
    again, trace2 = gen_gcomb(cfg.m, grid.n, cfg.n_deg, grid, k)
    assert np.array_equal(code.entries, again.entries)
    assert trace.steps == trace2.steps


def test_gcomb_pool_exhausted_upfront():
    g, k = grid_for(7, m=4)
    with pytest.raises(PoolExhausted) as e:
        gen_gcomb(4, 7, 2, g, k)
    assert e.value.placed == 6


def test_gcomb_pool_exhausted_by_dif_rejection():
    g, k = grid_for(6, n_steps=2, fwhm=0.6, m=4)
    with pytest.raises(PoolExhausted) as e:
        gen_gcomb(4, 6, 2, g, k)
    assert e.value.placed == 5
    assert len(e.value.trace.steps) == 5
    assert "pool exhausted at column 5" in str(e.value)


def test_gcomb_without_dif_check_fills_pool():
    g, k = grid_for(6, n_steps=2, fwhm=0.6, m=4)
    code, _ = gen_gcomb(4, 6, 2, g, k, dif_check=False)
    assert len(set(code.column_support())) == 6


# -- brute-force oracle for the greedy step ---------------------------------


def _oracle_dif_rejected(prev, cand, diffs):
    if prev is None:
        return False
    d = cand - prev
    for old in diffs:
        r = abs(float(d @ old)) / (np.linalg.norm(d) * np.linalg.norm(old))
        if r >= 1 - 1e-9:
            return True
    return False


def _oracle_objective(partial, chip, cand, kernel, grid):
    """Objective recomputed from full synthesis with explicit pair loops."""
    m, n = partial.shape
    with_cand = partial.copy()
    with_cand[:, chip] = cand
    lit = partial.copy()
    lit[:, chip] = 1
    dark = partial.copy()
    dark[:, chip] = 0
    a = synthesize(BinaryCodeMatrix(with_cand), kernel, grid).data
    on = synthesize(BinaryCodeMatrix(lit), kernel, grid).data
    off = synthesize(BinaryCodeMatrix(dark), kernel, grid).data
    limit = (chip + 1) * grid.n_steps
    touched = [j for j in range(limit) if not np.array_equal(on[:, j], off[:, j])]
    placed = [j for j in range(limit) if j not in touched]
    best = 0.0
    for t in touched:
        for p in placed:
            r = abs(float(a[:, t] @ a[:, p])) / (np.linalg.norm(a[:, t]) * np.linalg.norm(a[:, p]))
            best = max(best, r)
    return best


CASES = [
    (m, n_deg, n_steps, fwhm)
    for m in (3, 4, 5)
    for n_deg in (1, 2)
    for n_steps, fwhm in ((1, 1.8), (3, 0.6), (4, 1.5))
]


@pytest.mark.parametrize("m, n_deg, n_steps, fwhm", CASES)
def test_gcomb_step_local_optimality(m, n_deg, n_steps, fwhm):
    n = math.comb(m, n_deg)
    g, k = grid_for(n, n_steps=n_steps, fwhm=fwhm, m=m)
    try:
        steps = gen_gcomb(m, n, n_deg, g, k)[1].steps
    except PoolExhausted as e:
        steps = e.trace.steps
    pool = list(itertools.combinations(range(m), n_deg))
    partial = np.zeros((m, n))
    used, diffs, prev = set(), [], None
    for c, step in enumerate(steps):
        scored = []
        for comb in pool:
            if comb in used:
                continue
            v = np.zeros(m)
            v[list(comb)] = 1
            if _oracle_dif_rejected(prev, v, diffs):
                continue
            scored.append((comb, _oracle_objective(partial, c, v, k, g)))
        best = min(s for _, s in scored)
        assert step.objective == pytest.approx(best, abs=1e-12)
        first = next(comb for comb, s in scored if s <= best + 1e-12)
        assert step.combination == first
        v = np.zeros(m)
        v[list(step.combination)] = 1
        partial[:, c] = v
        used.add(step.combination)
        if prev is not None:
            diffs.append(v - prev)
        prev = v
