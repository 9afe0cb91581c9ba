"""Camera configuration, derived sampling grid and the shared matrix types.

Times are in nanoseconds and frequencies in MHz, so a period is ``1000 / f``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionMismatch, NonIntegerCodeLength

INTEGER_RTOL = 1e-9
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def _frozen(arr, dtype):
    a = np.array(arr, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CameraConfig:
    f_m: float = 448.0
    f_r: float = 3.5
    n_steps: int = 8
    fwhm: float = 0.4
    m: int = 14
    n_deg: int = 3

    @classmethod
    def prototype(cls):
        """Design parameters of the reference pulse-based ToF camera."""
        return cls()

    def with_code_length(self, n):
        """Same camera with the repetition frequency changed so that f_m/f_r = n."""
        return CameraConfig(self.f_m, self.f_m / n, self.n_steps, self.fwhm, self.m, self.n_deg)


@dataclass(frozen=True)
class DerivedGrid:
    n: int
    n_samples: int
    chip_duration: float
    dt: float
    period: float
    gamma_sr: float
    sigma: float

    @property
    def n_steps(self):
        return self.n_samples // self.n


def _ratio_is_integer(f_m, f_r):
    q = f_m / f_r
    k = round(q)
    return k >= 1 and abs(q - k) <= INTEGER_RTOL * max(abs(q), 1.0), k


def validate_config(config):
    """List the invariant violations of ``config`` (empty when valid)."""
    v = []
    if not config.f_m > 0:
        v.append("f_m must be positive")
    if not config.f_r > 0:
        v.append("f_r must be positive")
    if config.f_m > 0 and config.f_r > 0 and not _ratio_is_integer(config.f_m, config.f_r)[0]:
        v.append("f_m/f_r not integer")
    if int(config.n_steps) != config.n_steps or config.n_steps < 1:
        v.append("n_steps must be an integer >= 1")
    if not config.fwhm > 0:
        v.append("fwhm must be positive")
    if int(config.m) != config.m or config.m < 2:
        v.append("m must be an integer >= 2")
    if int(config.n_deg) != config.n_deg or config.n_deg < 1:
        v.append("n_deg must be an integer >= 1")
    elif config.n_deg > config.m:
        v.append("n_deg exceeds m")
    return v


def derive_grid(config):
    """Compute code length, fine grid and kernel width for ``config``."""
    ok, n = _ratio_is_integer(config.f_m, config.f_r)
    if not ok:
        raise NonIntegerCodeLength(
            f"f_m/f_r = {config.f_m / config.f_r!r} is not an integer code length"
        )
    n_steps = int(config.n_steps)
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    if not config.fwhm > 0:
        raise ConfigError("fwhm must be positive")
    chip = 1000.0 / config.f_m
    return DerivedGrid(
        n=n,
        n_samples=n * n_steps,
        chip_duration=chip,
        dt=chip / n_steps,
        period=1000.0 / config.f_r,
        gamma_sr=float(n_steps),
        sigma=config.fwhm * FWHM_TO_SIGMA,
    )


@dataclass(frozen=True)
class BinaryCodeMatrix:
    """m x n matrix over {0, 1}; row i is the demodulation code of measurement i."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2:
            raise DimensionMismatch("code matrix must be 2-D")
        if a.size and not np.isin(a, (0, 1)).all():
            raise ValueError("code entries must be 0 or 1")
        object.__setattr__(self, "entries", _frozen(a, np.uint8))

    @property
    def m(self):
        return self.entries.shape[0]

    @property
    def n(self):
        return self.entries.shape[1]

    def column_support(self):
        """Row indices of the ones, per column."""
        return [tuple(int(i) for i in np.flatnonzero(col)) for col in self.entries.T]

    def column_degrees(self):
        return self.entries.sum(axis=0).astype(int)

    def row_weights(self):
        return self.entries.sum(axis=1).astype(int)

    @classmethod
    def from_supports(cls, m, supports):
        a = np.zeros((m, len(supports)), dtype=np.uint8)
        for j, rows in enumerate(supports):
            a[list(rows), j] = 1
        return cls(a)


@dataclass(frozen=True)
class SensingMatrix:
    """m x n_samples matrix of sampled demodulation functions; column j is delay j*dt."""

    data: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatch("sensing matrix must be 2-D")
        object.__setattr__(self, "data", _frozen(a, float))

    @property
    def m(self):
        return self.data.shape[0]

    @property
    def n_samples(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class SceneResponse:
    """Sparse scene response on the fine delay grid."""

    n_samples: int
    indices: tuple = ()
    amplitudes: tuple = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        amp = tuple(float(a) for a in self.amplitudes)
        if len(idx) != len(amp):
            raise ValueError("indices and amplitudes differ in length")
        if len(set(idx)) != len(idx):
            raise ValueError("scene indices must be distinct")
        if any(i < 0 or i >= self.n_samples for i in idx):
            raise ValueError("scene index out of range")
        if any(not a > 0 for a in amp):
            raise ValueError("scene amplitudes must be positive")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "amplitudes", amp)

    def dense(self):
        x = np.zeros(self.n_samples)
        x[list(self.indices)] = self.amplitudes
        return x


@dataclass(frozen=True)
class ShiftVector:
    """Per-row cyclic offsets (in fine-grid samples)."""

    offsets: tuple
    n_samples: int = field(default=None)

    def __post_init__(self):
        off = tuple(int(s) for s in self.offsets)
        if self.n_samples is not None and any(s < 0 or s >= self.n_samples for s in off):
            raise ValueError(f"shift out of range [0, {self.n_samples})")
        object.__setattr__(self, "offsets", off)

    def __len__(self):
        return len(self.offsets)

    def __iter__(self):
        return iter(self.offsets)

    def as_array(self):
        return np.array(self.offsets, dtype=np.int64)
