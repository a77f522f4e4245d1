"""Parameter vectors and series containers for threshold Poisson autoregressions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RegimeParams",
    "SetparParams",
    "MultiRegimeParams",
    "CountSeries",
    "IntensityPath",
]


@dataclass(frozen=True)
class RegimeParams:
    """Coefficients of one affine intensity regime.

    Parameters
    ----------
    d : float
        Intercept, strictly positive (a zero-mean Poisson step is not allowed).
    a : float
        Feedback coefficient on the previous intensity, nonnegative.
    b : float
        Feedback coefficient on the previous observation, nonnegative.

    Notes
    -----
    The asymptotic theory assumes ``a > 0`` and ``b > 0``; the boundary values
    are accepted here so that degenerate configurations (frozen intensity with
    ``a = b = 0``, or the reduced upper-regime model with ``b = 0``) remain
    representable.
    """

    d: float
    a: float
    b: float

    def __post_init__(self) -> None:
        for name in ("d", "a", "b"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"regime coefficient {name!r} must be finite, got {v!r}")
        if self.d <= 0.0:
            raise ValueError(f"regime intercept d must be > 0, got {self.d!r}")
        if self.a < 0.0 or self.b < 0.0:
            raise ValueError(
                f"regime coefficients a, b must be >= 0, got a={self.a!r}, b={self.b!r}"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.d, self.a, self.b], dtype=np.float64)


@dataclass(frozen=True)
class SetparParams:
    """Full parameter vector of the two-regime model.

    The lower regime applies when the previous count is ``<= r``, the upper
    regime when it exceeds ``r``.  Regime membership is exhaustive and
    exclusive for every nonnegative count.
    """

    r: int
    lower: RegimeParams
    upper: RegimeParams

    def __post_init__(self) -> None:
        if not isinstance(self.r, (int, np.integer)) or isinstance(self.r, bool):
            raise TypeError(f"threshold r must be an integer, got {self.r!r}")
        if self.r < 0:
            raise ValueError(f"threshold r must be >= 0, got {self.r}")
        object.__setattr__(self, "r", int(self.r))

    @property
    def theta(self) -> np.ndarray:
        """Continuous parameters as ``(d1, a1, b1, d2, a2, b2)``."""
        return np.concatenate([self.lower.as_array(), self.upper.as_array()])

    @property
    def is_stable(self) -> bool:
        """Whether the drift condition ``a1 < 1`` and ``a2 + b2 < 1`` holds."""
        return self.lower.a < 1.0 and self.upper.a + self.upper.b < 1.0

    @classmethod
    def from_theta(cls, r: int, theta) -> "SetparParams":
        t = np.asarray(theta, dtype=np.float64)
        if t.shape != (6,):
            raise ValueError(f"theta must have 6 components, got shape {t.shape}")
        return cls(
            r=int(r),
            lower=RegimeParams(d=float(t[0]), a=float(t[1]), b=float(t[2])),
            upper=RegimeParams(d=float(t[3]), a=float(t[4]), b=float(t[5])),
        )


@dataclass(frozen=True)
class MultiRegimeParams:
    """Coefficients of a model with several threshold-separated regimes.

    ``thresholds`` are the finite cut points ``r_1 < ... < r_{m-1}``; regime
    ``i`` applies when the previous count falls in the half-open bin
    ``[r_{i-1}, r_i)`` with the implicit ``r_0 = 0`` and ``r_m = inf``.  Note
    this differs from the two-regime convention above, which uses ``<= r``;
    a two-regime instance of this type with cut point ``r + 1`` matches a
    :class:`SetparParams` with threshold ``r``.
    """

    thresholds: tuple[int, ...]
    regimes: tuple[RegimeParams, ...]

    def __post_init__(self) -> None:
        thresholds = tuple(int(t) for t in self.thresholds)
        regimes = tuple(self.regimes)
        if len(regimes) != len(thresholds) + 1:
            raise ValueError(
                f"expected {len(thresholds) + 1} regimes for {len(thresholds)} "
                f"thresholds, got {len(regimes)}"
            )
        if any(t <= 0 for t in thresholds):
            raise ValueError(f"thresholds must be positive integers, got {thresholds}")
        if any(hi <= lo for lo, hi in zip(thresholds, thresholds[1:])):
            raise ValueError(f"thresholds must be strictly increasing, got {thresholds}")
        if not all(isinstance(p, RegimeParams) for p in regimes):
            raise TypeError("regimes must be RegimeParams instances")
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "regimes", regimes)

    @property
    def n_regimes(self) -> int:
        return len(self.regimes)

    def regime_index(self, y: int) -> int:
        """Index of the regime whose bin ``[r_{i-1}, r_i)`` contains ``y``."""
        if y < 0:
            raise ValueError(f"count must be >= 0, got {y}")
        for i, cut in enumerate(self.thresholds):
            if y < cut:
                return i
        return len(self.thresholds)


def _as_count_array(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"count series must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("count series must contain at least one observation")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(np.asarray(arr, dtype=np.float64))
        if not np.all(np.isfinite(rounded)) or np.any(rounded != np.asarray(arr, dtype=np.float64)):
            bad = int(np.argmax(rounded != np.asarray(arr, dtype=np.float64)))
            raise ValueError(f"count series contains a non-integer value at index {bad}")
        arr = rounded
    out = arr.astype(np.int64)
    if np.any(out < 0):
        bad = int(np.argmax(out < 0))
        raise ValueError(f"count series contains a negative value at index {bad}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CountSeries:
    """An observed series of nonnegative integer counts."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_count_array(self.values))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True)
class IntensityPath:
    """A latent intensity sequence aligned index-for-index with a count series."""

    values: np.ndarray
    initial_value: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("intensity path must be a nonempty one-dimensional sequence")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("intensity path values must be finite and > 0")
        if not (math.isfinite(self.initial_value) and self.initial_value > 0.0):
            raise ValueError(f"initial intensity must be > 0, got {self.initial_value!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "initial_value", float(self.initial_value))

    def __len__(self) -> int:
        return int(self.values.shape[0])
