"""One-sided t-test on profile residuals, per rescaled-radius interval."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..model import PROFILE_COEFF

DEFAULT_INTERVALS = tuple((float(k), float(k + 1)) for k in range(6))


def t_sf(t: float, df: float) -> float:
    """Upper-tail probability of Student's t."""
    return float(special.stdtr(df, -t))


def t_quantile(p: float, df: float) -> float:
    """Inverse CDF of Student's t."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    return float(special.stdtrit(df, p))


@dataclass(frozen=True)
class ResidualTest:
    """H0: mean residual = 0 against H1: mean residual > 0."""

    xi_interval: tuple[float, float]
    n: int
    mean_residual: float
    std_residual: float
    t_statistic: float
    critical_value: float
    p_value: float
    reject_h0: bool
    testable: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        def num(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        return {
            "xi_interval": list(self.xi_interval),
            "n": self.n,
            "mean_residual": num(self.mean_residual),
            "std_residual": num(self.std_residual),
            "t_statistic": num(self.t_statistic),
            "critical_value": num(self.critical_value),
            "p_value": num(self.p_value),
            "reject_h0": self.reject_h0,
            "testable": self.testable,
            "note": self.note,
        }


def one_sided_t_test(eps, interval=(math.nan, math.nan), alpha: float = 0.05) -> ResidualTest:
    eps = np.asarray(eps, dtype=float)
    n = len(eps)
    nan = math.nan
    if n < 2:
        return ResidualTest(tuple(interval), n, float(np.mean(eps)) if n else nan, nan, nan, nan, nan,
                            False, False, "fewer than 2 samples")
    mean = float(np.mean(eps))
    sd = float(np.std(eps, ddof=1))
    crit = t_quantile(1.0 - alpha, n - 1)
    if np.all(eps == eps[0]) or sd <= 1e-14 * float(np.max(np.abs(eps))):
        return ResidualTest(tuple(interval), n, mean, sd, nan, crit, nan, False, False, "zero variance")
    t = mean / (sd / math.sqrt(n))
    return ResidualTest(tuple(interval), n, mean, sd, t, crit, t_sf(t, n - 1), bool(t > crit))


def residual_test(xi, ratio, intervals=DEFAULT_INTERVALS, alpha: float = 0.05) -> list[ResidualTest]:
    """Test whether the similarity profile overpredicts the measurements.

    Parameters
    ----------
    xi : array_like
        Rescaled radius of each sample.
    ratio : array_like
        Measured speed divided by the centerline speed at the sample's depth.
    intervals : sequence of (lo, hi)
        Half-open ``xi`` intervals tested separately.

    Residuals are ``profile(xi) - ratio``; an interval rejects when the
    t-statistic exceeds the ``1 - alpha`` quantile.
    """
    xi = np.asarray(xi, dtype=float)
    ratio = np.asarray(ratio, dtype=float)
    eps = 1.0 / (1.0 + PROFILE_COEFF * xi**2) ** 2 - ratio
    out = []
    for lo, hi in intervals:
        if not lo < hi:
            raise ValueError(f"empty interval [{lo}, {hi})")
        sel = (xi >= lo) & (xi < hi)
        out.append(one_sided_t_test(eps[sel], (lo, hi), alpha))
    return out
