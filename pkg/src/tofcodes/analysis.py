"""Coherence, normalized Gram matrices, correlation histograms and coherence sweeps."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .codegen import gen_gcomb, gen_peg, gen_random, gen_she
from .errors import ZeroColumn
from .model import derive_grid
from .synthesis import build_kernel, synthesize

DEFAULT_BINS = 100
DEFAULT_THRESHOLDS = (0.9, 0.99, 0.999)
UNIT_COHERENCE_TOL = 1e-9
CHORDAL_SNAP = 1e-12


def _data(a):
    return np.asarray(getattr(a, "data", a), dtype=float)


def column_norms(a):
    """Column 2-norms; raises :class:`ZeroColumn` for the first zero column."""
    a = _data(a)
    norms = np.linalg.norm(a, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroColumn(zero[0])
    return norms


def gram_normalized(a):
    """Signed normalized Gram matrix with exactly unit diagonal."""
    a = _data(a)
    u = a / column_norms(a)
    g = u.T @ u
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, 1.0)
    return g


def _offdiag_abs(g):
    iu = np.triu_indices(g.shape[0], k=1)
    return np.minimum(np.abs(g[iu]), 1.0)


def coherence(a):
    """Largest normalized inner-product magnitude over distinct column pairs."""
    g = gram_normalized(a)
    if g.shape[0] < 2:
        return 0.0
    return float(_offdiag_abs(g).max())


def chordal_from_rho(rho):
    """sqrt(1 - rho**2); correlations within 1e-12 of one map to exactly zero."""
    rho = min(abs(float(rho)), 1.0)
    if rho >= 1.0 - CHORDAL_SNAP:
        return 0.0
    return math.sqrt((1.0 - rho) * (1.0 + rho))


def corr_histogram(a, n_bins=DEFAULT_BINS):
    """Histogram of off-diagonal |rho| over [0, 1]; the last bin is right-closed."""
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    vals = _offdiag_abs(gram_normalized(a))
    counts, edges = np.histogram(vals, bins=n_bins, range=(0.0, 1.0))
    return edges, counts


def high_corr_pairs(a, theta):
    """Number of unordered column pairs with |rho| > theta."""
    return int(np.count_nonzero(_offdiag_abs(gram_normalized(a)) > theta))


@dataclass
class AnalysisReport:
    mu: float
    gram: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    high_corr: dict
    min_chordal: float

    def summary(self):
        return {
            "mu": self.mu,
            "min_chordal": self.min_chordal,
            "n_cols": int(self.gram.shape[0]),
            "n_pairs": int(self.counts.sum()),
            "high_corr_pairs": {repr(float(t)): int(c) for t, c in self.high_corr.items()},
        }

    def histogram_rows(self):
        return [(float(lo), float(hi), int(c))
                for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts)]


def analyze(a, thresholds=DEFAULT_THRESHOLDS, n_bins=DEFAULT_BINS):
    g = gram_normalized(a)
    vals = _offdiag_abs(g)
    mu = float(vals.max()) if vals.size else 0.0
    counts, edges = np.histogram(vals, bins=n_bins, range=(0.0, 1.0))
    return AnalysisReport(
        mu=mu,
        gram=g,
        bin_edges=edges,
        counts=counts,
        high_corr={float(t): int(np.count_nonzero(vals > t)) for t in thresholds},
        min_chordal=chordal_from_rho(mu) if vals.size else 1.0,
    )


# -- sweep ------------------------------------------------------------------

DETERMINISTIC = ("gcomb", "peg")
RANDOMIZED = ("random", "she")


@dataclass
class SweepResult:
    method: str
    m: int
    n_real: int
    records: list = field(default_factory=list)  # (eta, n, realization, mu, zero_column)

    def aggregates(self):
        """Per code length: eta, count, mean, max and fraction with mu >= 1 - 1e-9."""
        out = []
        for n in sorted({r[1] for r in self.records}):
            mus = [r[3] for r in self.records if r[1] == n]
            at_one = sum(mu >= 1.0 - UNIT_COHERENCE_TOL for mu in mus)
            out.append({
                "eta": self.m / n,
                "n": n,
                "count": len(mus),
                "mean": math.fsum(mus) / len(mus),
                "max": max(mus),
                "frac_unit": at_one / len(mus),
            })
        return out


def _code_for(method, m, n, n_deg, seed, p, grid, kernel):
    if method == "random":
        return gen_random(m, n, p, seed)
    if method == "she":
        return gen_she(m, n, seed)
    if method == "peg":
        return gen_peg(m, n, n_deg)
    if method == "gcomb":
        return gen_gcomb(m, n, n_deg, grid, kernel)[0]
    raise ValueError(f"unknown generator {method!r}")


def realization_mu(method, config, n, seed, p=0.5):
    """Coherence of one synthesized matrix; a zero column counts as mu = 1."""
    grid = derive_grid(config.with_code_length(n))
    kernel = build_kernel(grid)
    code = _code_for(method, config.m, n, config.n_deg, seed, p, grid, kernel)
    a = synthesize(code, kernel, grid)
    try:
        return coherence(a), False
    except ZeroColumn:
        return 1.0, True


def sweep_coherence(method, config, n_values, n_real=100, seed=rng.DEFAULT_SEED, p=0.5,
                    threads=1):
    """Coherence versus aspect ratio m/n at the fixed ``config.m``.

    Randomized generators are drawn ``n_real`` times per code length with
    seeds derived from ``(seed, n, realization)``; deterministic ones run once.
    The kernel width and sub-steps come from ``config``; only f_r changes with n.
    """
    jobs = []
    for n in n_values:
        reps = 1 if method in DETERMINISTIC else n_real
        for r in range(reps):
            jobs.append((n, r, rng.derive_seed(seed, "sweep." + method, n, r)))

    def run(job):
        n, r, s = job
        mu, zero = realization_mu(method, config, n, s, p)
        return (config.m / n, n, r, mu, zero)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        records = list(ex.map(run, jobs))
    return SweepResult(method, config.m, 1 if method in DETERMINISTIC else n_real, records)
