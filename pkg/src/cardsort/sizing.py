"""Growth-curve fits over bootstrap curves and sample-size estimates.

Every family is fitted in scaled-CDF form ``c * F(n; theta)`` where ``c`` is
the asymptote of the agreement metric (bounded to ``(0, 1.05]``).  Fits are
least-squares from a fixed grid of 16 starting points per family, so they
are deterministic.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats as sps
from scipy.optimize import least_squares

from .errors import FitDivergedWarning, InvalidRatio, TooFewPoints

__all__ = [
    "FAMILIES",
    "FitResult",
    "family_value",
    "fit_growth",
    "required_n",
    "formula_sample_size",
    "formula_sample_size_exact",
]

C_MAX = 1.05
_TINY = 1e-6


def _normal(n, mu, sigma):
    return sps.norm.cdf(n, loc=mu, scale=sigma)


def _exponential(n, scale):
    return sps.expon.cdf(n, scale=scale)


def _weibull(n, scale, shape):
    return sps.weibull_min.cdf(n, shape, scale=scale)


def _logistic(n, mu, s):
    return sps.logistic.cdf(n, loc=mu, scale=s)


def _gompertz(n, eta, scale):
    return sps.gompertz.cdf(n, eta, scale=scale)


def _gamma(n, shape, scale):
    return sps.gamma.cdf(n, shape, scale=scale)


def _beta(n, a, b, upper):
    return sps.beta.cdf(n, a, b, scale=upper)


def _rayleigh(n, sigma):
    return sps.rayleigh.cdf(n, scale=sigma)


def _lognormal(n, s, scale):
    return sps.lognorm.cdf(n, s, scale=scale)


def _pareto(n, alpha, xm):
    return sps.pareto.cdf(n, alpha, scale=xm)


# name -> (cdf, parameter names)
FAMILIES = {
    "normal_cdf": (_normal, ("mu", "sigma")),
    "exponential": (_exponential, ("scale",)),
    "weibull_cdf": (_weibull, ("scale", "shape")),
    "logistic": (_logistic, ("mu", "s")),
    "gompertz": (_gompertz, ("eta", "scale")),
    "gamma_cdf": (_gamma, ("shape", "scale")),
    "beta_cdf": (_beta, ("a", "b", "upper")),
    "rayleigh_cdf": (_rayleigh, ("sigma",)),
    "lognormal_cdf": (_lognormal, ("s", "scale")),
    "pareto_cdf": (_pareto, ("alpha", "xm")),
}


def _bounds_and_grid(family: str, ns: np.ndarray):
    """Box constraints and starting values for the non-asymptote parameters."""
    lo_n, hi_n = float(ns.min()), float(ns.max())
    mid = float(np.median(ns))
    big = 100.0 * hi_n
    scales = [lo_n / 2, mid, hi_n, 2 * hi_n]
    shapes = [0.5, 1.0, 2.0, 4.0]
    if family in ("normal_cdf", "logistic"):
        return ([-big, _TINY], [big, big]), list(product([0.0, lo_n, mid, hi_n], [hi_n / 4, hi_n]))
    if family == "exponential":
        return ([_TINY], [big]), [(s,) for s in scales + [hi_n / 8, hi_n / 4, 4 * hi_n, 8 * hi_n]]
    if family == "weibull_cdf":
        return ([_TINY, _TINY], [big, 50.0]), list(product(scales, [0.5, 1.0]))
    if family == "gompertz":
        return ([_TINY, _TINY], [1e4, big]), list(product([0.01, 0.1, 1.0, 10.0], [mid, hi_n]))
    if family == "gamma_cdf":
        return ([_TINY, _TINY], [200.0, big]), list(product(shapes, [lo_n / 2, hi_n / 2]))
    if family == "beta_cdf":
        return ([_TINY, _TINY, hi_n + _TINY], [200.0, 200.0, 1e3 * hi_n]), \
            list(product([0.5, 1.0, 2.0, 4.0], [2.0, 8.0], [2 * hi_n]))
    if family == "rayleigh_cdf":
        return ([_TINY], [big]), [(s,) for s in scales + [hi_n / 8, hi_n / 4, 4 * hi_n, 8 * hi_n]]
    if family == "lognormal_cdf":
        return ([_TINY, _TINY], [50.0, big]), list(product(shapes, [mid, hi_n]))
    if family == "pareto_cdf":
        return ([_TINY, _TINY], [200.0, lo_n]), list(product(shapes, [lo_n / 2, lo_n]))
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class FitResult:
    """A fitted scaled CDF ``c * F(n; theta)``; ``params`` starts with ``c``."""

    family: str
    params: tuple[float, ...]
    param_names: tuple[str, ...]
    r_squared: float
    n_points: int

    @property
    def asymptote(self) -> float:
        return self.params[0]

    def value(self, n):
        return family_value(self.family, self.params, n)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(zip(self.param_names, self.params)),
                "r_squared": self.r_squared, "n_points": self.n_points}


def family_value(family: str, params: Sequence[float], n):
    cdf, _ = FAMILIES[family]
    return params[0] * cdf(np.asarray(n, dtype=float), *params[1:])


def _fit_one(family, ns, ys):
    cdf, names = FAMILIES[family]
    (lo, hi), grid = _bounds_and_grid(family, ns)
    lo = np.array([_TINY] + lo)
    hi = np.array([C_MAX] + hi)
    c_starts = (min(C_MAX - 1e-3, max(float(ys.max()) * 1.02, 0.05)), 1.0)

    def resid(p):
        r = p[0] * cdf(ns, *p[1:]) - ys
        return np.nan_to_num(r, nan=1e6, posinf=1e6, neginf=-1e6)

    best = None
    starts = [(c,) + tuple(t) for t, c in product(grid, c_starts)][:16]
    for start in starts:
        x0 = np.clip(np.array(start, dtype=float), lo + 1e-9, hi - 1e-9)
        try:
            sol = least_squares(resid, x0, bounds=(lo, hi), method="trf",
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
        except (ValueError, FloatingPointError):
            continue
        ss = float(np.sum(resid(sol.x) ** 2))
        if np.isfinite(ss) and (best is None or ss < best[0] - 1e-10 * max(best[0], 1e-300)):
            best = (ss, sol.x)
    if best is None:
        return None
    ss_res, x = best
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res < 1e-20 else 0.0)
    return FitResult(family, tuple(float(v) for v in x), ("c",) + names, r2, int(ns.size))


def fit_growth(points: Iterable[tuple[float, float]], families: Optional[Iterable[str]] = None,
               min_n: float = 10, threads: int = 1) -> list[FitResult]:
    """Fit each growth family to ``(n, mean)`` points with ``n > min_n``.

    Parameters
    ----------
    points : iterable of (n, mean)
        A bootstrap curve; NaN means are ignored.
    families : iterable of str, optional
        Subset of :data:`FAMILIES`; all ten by default.
    min_n : float
        Only points strictly above this sample size are used.
    threads : int
        Families are fitted concurrently when above 1; output is unchanged.

    Returns
    -------
    list of FitResult
        Ordered by R-squared (descending), then family name.  Families that
        fail to converge, or lack enough points for their parameter count,
        are left out with a :class:`FitDivergedWarning`.

    Raises
    ------
    TooFewPoints
        Fewer than four usable points.
    """
    fams = sorted(FAMILIES) if families is None else list(families)
    for f in fams:
        if f not in FAMILIES:
            raise ValueError(f"unknown family {f!r}")
    pts = [(float(n), float(y)) for n, y in points if n > min_n and np.isfinite(y)]
    if len(pts) < 4:
        raise TooFewPoints(f"need at least 4 points above n={min_n}, got {len(pts)}")
    ns = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])

    usable = []
    for f in fams:
        n_params = 1 + len(FAMILIES[f][1])
        if len(pts) < n_params + 1:
            warnings.warn(f"{f}: {len(pts)} points cannot determine {n_params} parameters",
                          FitDivergedWarning, stacklevel=2)
        else:
            usable.append(f)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fitted = list(pool.map(lambda f: _fit_one(f, ns, ys), usable))
    else:
        fitted = [_fit_one(f, ns, ys) for f in usable]

    results = []
    for f, res in zip(usable, fitted):
        if res is None or not np.isfinite(res.r_squared):
            warnings.warn(f"{f}: fit did not converge", FitDivergedWarning, stacklevel=2)
            continue
        results.append(res)
    results.sort(key=lambda r: (-r.r_squared, r.family))
    return results


def required_n(fit: FitResult, target: float, n_max: int = 1_000_000) -> Optional[int]:
    """Smallest integer n >= 1 whose fitted value reaches ``target``.

    None when the target is above the asymptote or not reached by ``n_max``.
    """
    if target > fit.asymptote:
        return None
    f = lambda n: float(fit.value(n))  # noqa: E731
    if f(1) >= target:
        return 1
    if not f(n_max) >= target:
        return None
    lo, hi = 1, n_max  # f(lo) < target <= f(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def formula_sample_size_exact(full_count: int, subset_count: int) -> float:
    """``15 - 90 * log10(subset_count / full_count)`` before rounding."""
    if full_count < 1 or not 1 <= subset_count <= full_count:
        raise InvalidRatio(f"need 1 <= subset ({subset_count}) <= full ({full_count})")
    return 15.0 - 90.0 * math.log10(subset_count / full_count)


def formula_sample_size(full_count: int, subset_count: int) -> int:
    """Recommended participant count for a randomised-subset card sort (rounded half up).

    >>> formula_sample_size(50, 30)
    35
    """
    return int(math.floor(formula_sample_size_exact(full_count, subset_count) + 0.5))
