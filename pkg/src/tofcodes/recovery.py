"""Measurement simulation, sparse recovery and delay-to-depth conversion."""
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .analysis import column_norms
from .errors import DimensionMismatch, IllConditionedSubproblem

SPEED_OF_LIGHT = 0.299792458  # m/ns
RANK_TOL = 1e-10


def _data(a):
    return np.asarray(getattr(a, "data", a), dtype=float)


def delay_to_depth(index, dt):
    """Target depth in metres for fine-grid delay ``index`` (round trip halved)."""
    return SPEED_OF_LIGHT * (index * dt) / 2.0


@dataclass
class Measurement:
    y: np.ndarray
    snr_db: float = None  # None: noiseless
    seed: int = None


@dataclass
class RecoveryResult:
    support: list
    amplitudes: list
    residual_norm: float
    delays_ns: list = field(default_factory=list)
    depths_m: list = field(default_factory=list)
    degenerate: bool = False
    ill_conditioned: bool = False
    residual_history: list = field(default_factory=list)

    def with_depths(self, dt):
        self.delays_ns = [j * dt for j in self.support]
        self.depths_m = [delay_to_depth(j, dt) for j in self.support]
        return self


def measure(a, x, snr_db=None, seed=rng.DEFAULT_SEED):
    """y = A x, plus white Gaussian noise at ``snr_db`` if given.

    The noise variance satisfies 10 log10(||Ax||^2 / (m sigma^2)) = snr_db.
    ``snr_db = -inf`` returns noise alone, at the variance of 0 dB.
    """
    data = _data(a)
    xv = x.dense() if hasattr(x, "dense") else np.asarray(x, dtype=float)
    if xv.shape != (data.shape[1],):
        raise DimensionMismatch(f"scene length {xv.shape} != {data.shape[1]} columns")
    clean = data @ xv
    if snr_db is None:
        return Measurement(clean, None, seed)
    m = data.shape[0]
    power = float(clean @ clean) / m
    noise = rng.stream(seed, "recovery.noise").standard_normal(m)
    if math.isinf(snr_db) and snr_db < 0:
        return Measurement(math.sqrt(power) * noise, snr_db, seed)
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
    return Measurement(clean + sigma * noise, snr_db, seed)


def matched_filter(a, y):
    """Single-target recovery: the column of maximal normalized correlation with y."""
    data = _data(a)
    y = np.asarray(y, dtype=float)
    norms = column_norms(data)
    score = np.abs(data.T @ y) / norms
    j = int(np.argmax(score))
    amp = float(data[:, j] @ y) / norms[j] ** 2
    res = float(np.linalg.norm(y - amp * data[:, j]))
    return RecoveryResult([j], [amp], res, degenerate=not np.any(y), residual_history=[res])


def _lstsq(sub, y):
    s = np.linalg.svd(sub, compute_uv=False)
    ill = s.size == 0 or s[-1] <= RANK_TOL * s[0]
    coef = np.linalg.lstsq(sub, y, rcond=None)[0]
    return coef, ill


def omp(a, y, k, residual_tol=0.0):
    """Orthogonal matching pursuit with least-squares refit of the whole support.

    Stops after ``k`` atoms or once the residual norm is at most
    ``residual_tol``. A rank-deficient refit is flagged and warned about, not
    raised.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    data = _data(a)
    y = np.asarray(y, dtype=float)
    norms = column_norms(data)
    support, coef = [], np.zeros(0)
    residual = y.copy()
    history = [float(np.linalg.norm(residual))]
    ill_any = False
    for _ in range(min(k, data.shape[1])):
        if history[-1] <= residual_tol:
            break
        score = np.abs(data.T @ residual) / norms
        score[support] = -1.0
        support.append(int(np.argmax(score)))
        coef, ill = _lstsq(data[:, support], y)
        if ill:
            ill_any = True
            warnings.warn(f"rank-deficient refit on support {support}", IllConditionedSubproblem)
        residual = y - data[:, support] @ coef
        history.append(float(np.linalg.norm(residual)))
    if not support:
        # y already within tolerance: report the matched-filter index with zero amplitude
        mf = matched_filter(data, y)
        return RecoveryResult(mf.support, [0.0], history[0], degenerate=True,
                              residual_history=history)
    return RecoveryResult(support, [float(c) for c in coef], history[-1],
                          degenerate=not np.any(y), ill_conditioned=ill_any,
                          residual_history=history)


def l0_bruteforce(a, y, k, residual_tol=1e-9):
    """Smallest support (size <= k) whose least-squares fit leaves a residual norm
    within ``residual_tol * max(1, ||y||)``; ties between supports of equal size go
    to the smallest residual. Exhaustive, meant for at most a dozen columns.
    """
    data = _data(a)
    y = np.asarray(y, dtype=float)
    tol = residual_tol * max(1.0, float(np.linalg.norm(y)))
    for size in range(1, k + 1):
        best = None
        for supp in itertools.combinations(range(data.shape[1]), size):
            coef = np.linalg.lstsq(data[:, supp], y, rcond=None)[0]
            r = float(np.linalg.norm(y - data[:, supp] @ coef))
            if r <= tol and (best is None or r < best[2]):
                best = (list(supp), coef, r)
        if best is not None:
            return RecoveryResult(best[0], [float(c) for c in best[1]], best[2])
    return None


def _circular_gap(a, b, n):
    d = abs(a - b) % n
    return min(d, n - d)


def _trial(data, dt, k, snr_db, seed):
    m, n = data.shape
    g = rng.stream(seed, "recovery.scene")
    idx = np.sort(g.choice(n, size=k, replace=False))
    amp = g.uniform(0.5, 1.5, size=k)
    x = np.zeros(n)
    x[idx] = amp
    meas = measure(data, x, snr_db, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedSubproblem)
        res = omp(data, meas.y, k)
    est = sorted(res.support)
    exact = est == [int(i) for i in idx]
    gaps = [_circular_gap(t, e, n) for t, e in zip(idx.tolist(), est)]
    delay_err = math.fsum(gap * dt for gap in gaps) / len(gaps)
    return exact, delay_err, delay_err * SPEED_OF_LIGHT / 2.0


def recovery_trial_batch(a, k, snr_list, n_trials, seed=rng.DEFAULT_SEED, dt=None, threads=1):
    """Monte Carlo recovery statistics.

    Each trial draws ``k`` distinct delays uniformly and amplitudes in
    [0.5, 1.5], measures at the given SNR (``None`` for noiseless) and recovers
    with OMP. Trial seeds derive from ``(seed, snr index, trial)`` so the table is
    independent of scheduling. Returned rows are
    ``(snr_db, trial, k, exact_support, delay_err_ns, depth_err_m)``; delay
    errors pair sorted true and recovered delays using circular distance.
    """
    data = _data(a)
    column_norms(data)
    dt = getattr(a, "dt", 1.0) if dt is None else dt
    jobs = [(si, snr, t) for si, snr in enumerate(snr_list) for t in range(n_trials)]

    def run(job):
        si, snr, t = job
        s = rng.derive_seed(seed, "recovery.trial", si, t)
        exact, de, dd = _trial(data, dt, k, snr, s)
        return (snr, t, k, bool(exact), de, dd)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        return list(ex.map(run, jobs))


def summarize_trials(rows):
    """Per-SNR exact-support rate and mean errors."""
    out = []
    snrs = []
    for r in rows:
        if r[0] not in snrs:
            snrs.append(r[0])
    for snr in snrs:
        sel = [r for r in rows if r[0] == snr]
        out.append({
            "snr_db": snr,
            "trials": len(sel),
            "exact_support_rate": sum(r[3] for r in sel) / len(sel),
            "mean_delay_err_ns": math.fsum(r[4] for r in sel) / len(sel),
            "mean_depth_err_m": math.fsum(r[5] for r in sel) / len(sel),
        })
    return out


def exhaustive_single_target(a):
    """Noiseless matched-filter recovery of a unit spike at every column.

    Returns the list of indices that were recovered exactly.
    """
    data = _data(a)
    norms = column_norms(data)
    # column j of the score matrix is the matched-filter response to y = a_j
    scores = np.abs(data.T @ data) / norms[:, None]
    hits = np.argmax(scores, axis=0)
    return [j for j in range(data.shape[1]) if hits[j] == j]
