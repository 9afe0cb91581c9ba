"""Gaussian cross-correlation kernel and sensing-matrix synthesis."""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, KernelTooWide
from .model import SensingMatrix

TRUNCATION_SIGMAS = 4.0


@dataclass(frozen=True)
class Kernel:
    """Periodic, unit-peak kernel sampled on the fine grid.

    ``samples[k]`` is the kernel at circular lag ``k`` (lag ``-k`` lives at
    ``n_samples - k``). Only lags ``-radius..radius`` are non-zero.
    """

    samples: np.ndarray
    dt: float
    sigma: float
    radius: int

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n_samples(self):
        return self.samples.shape[0]

    def taps(self):
        """(lag, weight) pairs of the non-zero support, lags ascending from -radius."""
        n = self.n_samples
        return [(k, float(self.samples[k % n])) for k in range(-self.radius, self.radius + 1)
                if self.samples[k % n] != 0.0]

    def scaled(self, factor):
        return Kernel(self.samples * factor, self.dt, self.sigma, self.radius)


def build_kernel(grid, sigma=None):
    """Unit-peak Gaussian on the wrapped fine grid, hard-zero beyond 4 sigma.

    ``sigma`` defaults to the grid's FWHM-derived value; passing it explicitly
    allows near-delta or measured-width kernels.
    """
    sigma = grid.sigma if sigma is None else float(sigma)
    if not sigma > 0:
        raise KernelTooWide("sigma must be positive")
    if not TRUNCATION_SIGMAS * sigma < grid.period / 2:
        raise KernelTooWide(
            f"4*sigma = {TRUNCATION_SIGMAS * sigma:g} ns does not fit in half a period "
            f"({grid.period / 2:g} ns)"
        )
    n = grid.n_samples
    k = np.arange(n)
    t = np.minimum(k, n - k) * grid.dt
    samples = np.exp(-(t ** 2) / (2.0 * sigma ** 2))
    samples[t > TRUNCATION_SIGMAS * sigma] = 0.0
    samples[0] = 1.0
    nz = np.flatnonzero(samples)
    radius = int(np.max(np.minimum(nz, n - nz)))
    return Kernel(samples, grid.dt, sigma, radius)


def upsample_code_row(row, n_steps):
    """Zero-order hold: chip ``c`` fills fine indices ``[c*n_steps, (c+1)*n_steps)``."""
    return np.repeat(np.asarray(row, dtype=float), int(n_steps))


def circular_convolve(u, kernel):
    """Circularly convolve the rows of ``u`` with ``kernel`` in the time domain.

    Summation runs over lags in ascending order, so the result is bit-reproducible.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[1] != kernel.n_samples:
        raise DimensionMismatch(
            f"signal length {u.shape[1]} != kernel length {kernel.n_samples}"
        )
    out = np.zeros_like(u)
    for lag, w in kernel.taps():
        out += w * np.roll(u, lag, axis=1)
    return out


def synthesize(code, kernel, grid):
    """Sensing matrix whose row i is upsampled code row i convolved with the kernel."""
    if code.n * grid.n_steps != grid.n_samples or code.n != grid.n:
        raise DimensionMismatch(
            f"code has {code.n} chips but grid expects {grid.n} (n_samples={grid.n_samples})"
        )
    if kernel.n_samples != grid.n_samples:
        raise DimensionMismatch(
            f"kernel length {kernel.n_samples} != n_samples {grid.n_samples}"
        )
    u = np.repeat(code.entries.astype(float), grid.n_steps, axis=1)
    return SensingMatrix(circular_convolve(u, kernel), grid.dt)


def chip_weights(chip, kernel, n_steps):
    """Weight of chip ``chip`` in every fine column: w[j] = sum_p K[(j - p) mod N].

    A column's synthesized value is ``sum_c w_c[j] * code[:, c]``.
    """
    n = kernel.n_samples
    w = np.zeros(n)
    for lag, k in kernel.taps():
        idx = (np.arange(chip * n_steps, (chip + 1) * n_steps) + lag) % n
        np.add.at(w, idx, k)
    return w


def column_template(code, combination, chip, kernel, grid, j):
    """Column ``j`` of the matrix synthesized from ``code`` with chip ``chip``
    replaced by the candidate ``combination`` (a tuple of row indices).

    ``code`` is the partially filled code matrix; unplaced chips are zero.
    """
    if not 0 <= j < grid.n_samples:
        raise IndexError(f"fine index {j} out of range")
    s = grid.n_steps
    n = grid.n_samples
    col = np.zeros(code.m)
    for lag, w in kernel.taps():
        c = ((j - lag) % n) // s
        if c == chip:
            v = np.zeros(code.m)
            v[list(combination)] = 1.0
        else:
            v = code.entries[:, c].astype(float)
        col += w * v
    return col


def kernel_rows(kernel):
    """CSV-ready ``(index, t_ns, value)`` rows of the wrapped kernel."""
    n = kernel.n_samples
    return [(k, min(k, n - k) * kernel.dt * (1 if k <= n - k else -1), float(v))
            for k, v in enumerate(kernel.samples)]


__all__ = [
    "Kernel",
    "build_kernel",
    "upsample_code_row",
    "circular_convolve",
    "synthesize",
    "chip_weights",
    "column_template",
    "kernel_rows",
]
