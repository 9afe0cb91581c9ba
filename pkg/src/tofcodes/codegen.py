"""(0,1)-binary code generators: random, scrambled Hadamard, PEG and GComb."""
import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import PoolExhausted, SizeUnsupported
from .model import BinaryCodeMatrix
from .synthesis import circular_convolve

DIF_PARALLEL_TOL = 1e-9
TIE_TOL = 1e-12
MAX_HADAMARD_ORDER = 2 ** 16


def gen_random(m, n, p=0.5, seed=rng.DEFAULT_SEED):
    """I.i.d. Bernoulli(p) code entries drawn from the keyed stream ``codegen.random``."""
    if not 0 < p < 1:
        raise ValueError("density p must lie in (0, 1)")
    g = rng.stream(seed, "codegen.random", m, n)
    return BinaryCodeMatrix((g.random((m, n)) < p).astype(np.uint8))


def sylvester_entries(rows, cols):
    """Entries ``H[r, c] = (-1)**popcount(r & c)`` of a Sylvester-Hadamard matrix."""
    r = np.asarray(rows, dtype=np.uint64)[:, None]
    c = np.asarray(cols, dtype=np.uint64)[None, :]
    parity = np.bitwise_count(r & c) & 1
    return 1 - 2 * parity.astype(np.int8)


def she_from_selection(rows, cols):
    """(0,1)-rescaled Hadamard rows ``rows`` restricted to (permuted) columns ``cols``."""
    h = sylvester_entries(rows, cols)
    return BinaryCodeMatrix(((h + 1) // 2).astype(np.uint8))


def gen_she(m, n, seed=rng.DEFAULT_SEED, max_order=MAX_HADAMARD_ORDER):
    """Scrambled Hadamard Ensemble rescaled to {0,1}.

    The order-N Sylvester matrix (N the smallest power of two >= max(m, n)) has
    its columns randomly permuted; m distinct rows are drawn at random and the
    first n permuted columns are kept. Only the selected entries are evaluated.
    """
    order = 1 << max(0, (max(m, n) - 1).bit_length())
    if order > max_order:
        raise SizeUnsupported(f"Hadamard order {order} exceeds maximum {max_order}")
    g = rng.stream(seed, "codegen.she", m, n)
    perm = g.permutation(order)
    rows = np.sort(g.choice(order, size=m, replace=False))
    return she_from_selection(rows, perm[:n])


# -- PEG --------------------------------------------------------------------


@dataclass
class TannerGraph:
    """Bipartite graph: variable nodes are code columns, check nodes are rows."""

    m: int
    n: int
    var_adj: list = field(default_factory=list)
    check_adj: list = field(default_factory=list)

    @classmethod
    def empty(cls, m, n):
        return cls(m, n, [[] for _ in range(n)], [[] for _ in range(m)])

    @classmethod
    def from_code(cls, code):
        g = cls.empty(code.m, code.n)
        for v, rows in enumerate(code.column_support()):
            for c in rows:
                g.add_edge(v, c)
        return g

    def add_edge(self, v, c):
        self.var_adj[v].append(c)
        self.check_adj[c].append(v)

    def check_degree(self, c):
        return len(self.check_adj[c])

    def to_code(self):
        return BinaryCodeMatrix.from_supports(self.m, [sorted(a) for a in self.var_adj])


def _pick_check(graph, candidates):
    return min(candidates, key=lambda c: (graph.check_degree(c), c))


def _peg_next_check(graph, v):
    """Check node farthest from ``v``; unreachable nodes count as infinitely far."""
    reached = set(graph.var_adj[v])
    frontier = list(reached)
    seen_vars = {v}
    while True:
        new_checks = set()
        for c in frontier:
            for u in graph.check_adj[c]:
                if u in seen_vars:
                    continue
                seen_vars.add(u)
                for c2 in graph.var_adj[u]:
                    if c2 not in reached:
                        new_checks.add(c2)
        if not new_checks:
            # the tree stopped growing: pick among checks it never reached
            unreached = [c for c in range(graph.m) if c not in reached]
            return _pick_check(graph, unreached) if unreached else None
        if len(reached) + len(new_checks) == graph.m:
            # every check is now reached: the last level holds the farthest ones
            return _pick_check(graph, new_checks)
        reached |= new_checks
        frontier = sorted(new_checks)


def gen_peg(m, n, n_deg, seed=rng.DEFAULT_SEED):
    """Progressive Edge Growth with regular variable degree ``n_deg``.

    Fully deterministic: check nodes are chosen by (current degree, index).
    ``seed`` is accepted for interface uniformity and does not affect the output.
    """
    if not 1 <= n_deg <= m:
        raise ValueError("n_deg must lie in [1, m]")
    g = TannerGraph.empty(m, n)
    for v in range(n):
        g.add_edge(v, _pick_check(g, range(m)))
        for _ in range(1, n_deg):
            c = _peg_next_check(g, v)
            if c is None:
                c = _pick_check(g, [c for c in range(m) if c not in g.var_adj[v]])
            g.add_edge(v, c)
    return g.to_code()


def tanner_girth(code):
    """Length of the shortest cycle of the Tanner graph (``math.inf`` for a forest)."""
    g = TannerGraph.from_code(code)
    n = code.n
    # node ids: variables 0..n-1, checks n..n+m-1
    adj = [[n + c for c in g.var_adj[v]] for v in range(n)]
    adj += [list(g.check_adj[c]) for c in range(code.m)]
    best = math.inf
    for s in range(n):
        dist = {s: 0}
        parent = {s: -1}
        q = deque([s])
        while q:
            u = q.popleft()
            if 2 * dist[u] >= best:
                break
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    q.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


# -- GComb ------------------------------------------------------------------


@dataclass(frozen=True)
class GCombStep:
    column: int
    combination: tuple
    rejected: int
    objective: float


@dataclass
class GCombTrace:
    steps: list = field(default_factory=list)
    row_weights: tuple = ()

    def csv_rows(self):
        return [
            (s.column, "-".join(str(i) for i in s.combination), s.rejected, repr(s.objective))
            for s in self.steps
        ]


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def dif_rejections(candidates, previous, diffs):
    """Mask of candidates whose difference with ``previous`` is parallel (up to
    sign) to an already present adjacent-difference column."""
    if previous is None or not diffs:
        return np.zeros(len(candidates), dtype=bool)
    d_new = _unit(candidates - previous[None, :])
    d_old = _unit(np.array(diffs))
    return (np.abs(d_new @ d_old.T) >= 1.0 - DIF_PARALLEL_TOL).any(axis=1)


def _fine_columns(partial, kernel, n_steps):
    u = np.repeat(partial, n_steps, axis=1)
    return circular_convolve(u, kernel)


def gcomb_objectives(partial, chip, candidates, kernel, n_steps):
    """Greedy objective of every candidate for chip ``chip`` of ``partial``.

    The objective is the largest normalized correlation magnitude between a fine
    column touched by the candidate chip and any already placed fine column
    untouched by it, on the matrix synthesized from ``partial`` (later chips
    zero) with the candidate inserted. Returns ``(objectives, touched, placed)``.
    """
    n_fine = kernel.n_samples
    limit = (chip + 1) * n_steps
    w = np.zeros(n_fine)
    for lag, k in kernel.taps():
        idx = (np.arange(chip * n_steps, limit) + lag) % n_fine
        np.add.at(w, idx, k)
    pos = np.arange(limit)
    touched = pos[w[:limit] > 0]
    placed = pos[w[:limit] == 0]
    if placed.size == 0:
        return np.zeros(len(candidates)), touched, placed
    base_code = partial.copy()
    base_code[:, chip] = 0.0
    base = _fine_columns(base_code, kernel, n_steps)
    prev = _unit(base[:, placed].T)
    tmpl = base[:, touched].T[None, :, :] + w[touched][None, :, None] * candidates[:, None, :]
    tmpl = _unit(tmpl)
    rho = np.abs(tmpl @ prev.T)
    return rho.reshape(len(candidates), -1).max(axis=1), touched, placed


def gen_gcomb(m, n, n_deg, grid, kernel, dif_check=True):
    """Deterministic gradient-Combinatorial code construction.

    Columns are placed left to right from the pool of all ``C(m, n_deg)``
    row combinations, each used at most once. A candidate is dropped when its
    difference with the previous column is parallel (up to sign) to an earlier
    adjacent difference. Among the rest the candidate with the smallest greedy
    objective (see :func:`gcomb_objectives`) wins; near-ties within 1e-12 go
    to the lexicographically smallest combination.

    Returns the code matrix and a :class:`GCombTrace`.
    """
    if not 1 <= n_deg <= m:
        raise ValueError("n_deg must lie in [1, m]")
    if n != grid.n:
        raise ValueError(f"code length {n} does not match grid ({grid.n} chips)")
    pool_size = math.comb(m, n_deg)
    if n > pool_size:
        raise PoolExhausted(0, n) if pool_size == 0 else PoolExhausted(pool_size, n)
    pool = list(itertools.combinations(range(m), n_deg))
    pool_vecs = np.zeros((len(pool), m))
    for i, comb in enumerate(pool):
        pool_vecs[i, list(comb)] = 1.0
    available = np.ones(len(pool), dtype=bool)

    partial = np.zeros((m, n))
    diffs = []
    trace = GCombTrace()
    previous = None
    for c in range(n):
        idx = np.flatnonzero(available)
        cand = pool_vecs[idx]
        rejected = dif_rejections(cand, previous, diffs) if dif_check else np.zeros(len(idx), bool)
        keep = idx[~rejected]
        if keep.size == 0:
            err = PoolExhausted(c, n)
            err.trace = trace
            raise err
        obj, _, _ = gcomb_objectives(partial, c, pool_vecs[keep], kernel, grid.n_steps)
        best = int(np.flatnonzero(obj <= obj.min() + TIE_TOL)[0])
        pick = keep[best]
        available[pick] = False
        partial[:, c] = pool_vecs[pick]
        if previous is not None:
            diffs.append(pool_vecs[pick] - previous)
        previous = pool_vecs[pick]
        trace.steps.append(GCombStep(c, pool[pick], int(rejected.sum()), float(obj[best])))
    code = BinaryCodeMatrix(partial.astype(np.uint8))
    trace.row_weights = tuple(int(x) for x in code.row_weights())
    return code, trace


def dif_matrix(code):
    """Adjacent-difference columns ``c[k+1] - c[k]`` (no wrap-around), as floats."""
    a = code.entries.astype(float)
    return a[:, 1:] - a[:, :-1]
