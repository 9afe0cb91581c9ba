"""Per-row cyclic offsets of a sensing matrix and their greedy selection."""
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .analysis import chordal_from_rho, column_norms, gram_normalized
from .errors import DimensionMismatch, ZeroColumn
from .model import SensingMatrix, ShiftVector

TIE_TOL = 1e-12
STRATEGIES = ("none", "uniform", "random", "greedy")


def _data(a):
    return np.asarray(getattr(a, "data", a), dtype=float)


def apply_shifts(a, shifts):
    """Delay row i by ``shifts[i]`` samples: out[i, j] = a[i, (j - shifts[i]) mod N]."""
    data = _data(a)
    s = list(shifts)
    if len(s) != data.shape[0]:
        raise DimensionMismatch(f"{len(s)} shifts for {data.shape[0]} rows")
    n = data.shape[1]
    if any(not 0 <= k < n for k in s):
        raise ValueError(f"shift out of range [0, {n})")
    out = np.empty_like(data)
    for i, k in enumerate(s):
        out[i] = np.roll(data[i], k)
    return SensingMatrix(out, getattr(a, "dt", 1.0))


def max_correlation(a):
    """Largest off-diagonal |rho| (no clamp), or 0 for a single column."""
    g = gram_normalized(a)
    if g.shape[0] < 2:
        return 0.0
    np.fill_diagonal(g, 0.0)
    return float(np.abs(g).max())


def min_chordal_distance(a):
    """Smallest sqrt(1 - rho**2) over all unordered column pairs."""
    column_norms(a)
    return chordal_from_rho(max_correlation(a))


def shift_objective(a):
    """min_chordal_distance, scoring a matrix with a vanishing column as 0.

    A zero column hides every target at that delay, so it is treated as the
    worst attainable distance when comparing shift strategies.
    """
    try:
        return min_chordal_distance(a)
    except ZeroColumn:
        return 0.0


def uniform_shifts(m, n_samples):
    return ShiftVector([i * n_samples // m for i in range(m)], n_samples)


def random_shifts(m, n_samples, seed=rng.DEFAULT_SEED):
    g = rng.stream(seed, "shifts.random", m, n_samples)
    return ShiftVector(g.integers(0, n_samples, size=m), n_samples)


@dataclass
class ShiftResult:
    shifts: ShiftVector
    objective_before: float
    objective_after: float
    # (pass, row, offset, objective after committing the row)
    trajectory: list = field(default_factory=list)

    def csv_rows(self):
        return [(row, off, repr(obj)) for _, row, off, obj in self.trajectory]


class _IncrementalGram:
    """Gram matrix of the shifted matrix under one-row replacement.

    Replacing row i by ``r`` changes G by ``outer(r, r) - outer(old, old)``, so
    each candidate offset costs one N x N update instead of a full product.
    """

    def __init__(self, data, shifts):
        self.base = data
        self.shifts = list(shifts)
        cur = np.stack([np.roll(row, k) for row, k in zip(data, self.shifts)])
        g = cur.T @ cur
        self.g = 0.5 * (g + g.T)
        n = data.shape[1]
        self._buf = np.empty((n, n))
        self._scale = np.empty((n, n))

    def row(self, i, offset):
        return np.roll(self.base[i], offset)

    def without_row(self, i):
        r = self.row(i, self.shifts[i])
        return self.g - np.outer(r, r)

    def score(self, g_rest, r):
        """(max |rho|, number of pairs within TIE_TOL of it); None if a column vanishes."""
        d = np.diagonal(g_rest) + r * r
        if np.any(d <= 0.0):
            return None
        s = 1.0 / np.sqrt(d)
        buf = self._buf
        np.outer(r, r, out=buf)
        buf += g_rest
        np.abs(buf, out=buf)
        np.outer(s, s, out=self._scale)
        buf *= self._scale
        np.fill_diagonal(buf, -1.0)
        mx = float(buf.max())
        count = int(np.count_nonzero(buf >= mx - TIE_TOL)) // 2
        return mx, count

    def commit(self, i, offset, g_rest):
        r = self.row(i, offset)
        self.g = g_rest + np.outer(r, r)
        self.shifts[i] = offset


def _better(key, best):
    """Lexicographic preference: lower max |rho|, then fewer pairs attaining it."""
    if best is None:
        return True
    if key[0] < best[0] - TIE_TOL:
        return True
    return abs(key[0] - best[0]) <= TIE_TOL and key[1] < best[1]


def best_row_offset(state, i):
    """Offset for row ``i`` with all other rows held at their current offsets.

    Offsets are scanned in ascending order so ties resolve to the smallest one.
    Returns ``(offset, (max_rho, count), g_rest)``.
    """
    g_rest = state.without_row(i)
    n = state.base.shape[1]
    best, best_off = None, None
    for off in range(n):
        key = state.score(g_rest, state.row(i, off))
        if key is not None and _better(key, best):
            best, best_off = key, off
    return best_off, best, g_rest


def greedy_shift_search(a, passes=1, initial=None):
    """Near-to-optimal on-grid offsets, one row at a time.

    Rows are visited in index order; for each, every offset in [0, N) is tried
    with the other rows fixed, and the offset maximizing the minimum chordal
    distance between columns is kept (equivalently minimizing the largest
    column correlation). When several offsets give the same distance (common
    while parallel column pairs remain) the one leaving fewer pairs at that
    distance wins, then the smallest offset. ``passes > 1`` repeats the sweep
    and stops early once a pass changes nothing.
    """
    data = _data(a)
    column_norms(data)
    m, n = data.shape
    shifts = [0] * m if initial is None else list(initial)
    state = _IncrementalGram(data, shifts)
    before = chordal_from_rho(max_correlation(apply_shifts(data, shifts)))
    trajectory = []
    objective = before
    for p in range(passes):
        changed = False
        for i in range(m):
            off, key, g_rest = best_row_offset(state, i)
            changed |= off != state.shifts[i]
            state.commit(i, off, g_rest)
            objective = chordal_from_rho(key[0])
            trajectory.append((p, i, off, objective))
        if not changed:
            break
    after = chordal_from_rho(max_correlation(apply_shifts(data, state.shifts)))
    return ShiftResult(ShiftVector(state.shifts, n), before, after, trajectory)


def select_shifts(a, strategy, seed=rng.DEFAULT_SEED, passes=1):
    """ShiftResult for any strategy in ``STRATEGIES``."""
    data = _data(a)
    m, n = data.shape
    if strategy == "greedy":
        return greedy_shift_search(a, passes=passes)
    if strategy == "none":
        sv = ShiftVector([0] * m, n)
    elif strategy == "uniform":
        sv = uniform_shifts(m, n)
    elif strategy == "random":
        sv = random_shifts(m, n, seed)
    else:
        raise ValueError(f"unknown shift strategy {strategy!r}")
    before = shift_objective(data)
    after = shift_objective(apply_shifts(data, sv))
    return ShiftResult(sv, before, after, [(0, i, s, after) for i, s in enumerate(sv)])
