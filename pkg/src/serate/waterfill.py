"""Water-filling solvers.

Three allocations appear in the estimation-rate analysis:

* direct water-filling, ``p_i = (mu - f_i)^+`` with ``sum p_i = P``, which
  maximizes ``sum log(1 + p_i / f_i)`` (and, in the linear Gaussian model,
  also minimizes the MMSE);
* weighted water-filling, ``p_i = (a_i mu - f_i)^+``, the minimizer of the
  MMSE lower bound ``sum s_i / (p_i / f_i + 1)`` with ``a_i = sqrt(s_i f_i)``;
* reverse (inverse) water-filling, ``D_i = min(xi, s_i)`` with
  ``sum D_i = D``, which attains the Gaussian rate-distortion function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, Tolerances
from .errors import AllModesDisabled, DimensionMismatch, DistortionOutOfRange, NegativeBudget

__all__ = [
    "WaterfillAllocation",
    "waterfill_direct",
    "waterfill_weighted",
    "waterfill_inverse",
    "rate_from_allocation",
]


@dataclass(frozen=True)
class WaterfillAllocation:
    """Per-mode levels and the water level that produced them.

    For the direct and weighted solvers ``levels`` are powers and
    ``budget_used`` their sum; for the inverse solver ``levels`` are per-mode
    distortions and ``water_level`` is the inverse level ``xi``.
    """

    levels: np.ndarray
    water_level: float
    budget_used: float

    @property
    def active(self) -> np.ndarray:
        return self.levels > 0


def _check_budget(budget: float) -> float:
    budget = float(budget)
    if not np.isfinite(budget):
        raise NegativeBudget(f"budget must be finite, got {budget!r}")
    if budget < 0:
        raise NegativeBudget(f"budget must be non-negative, got {budget!r}")
    return budget


def waterfill_direct(noise_floors, budget: float, tol: Tolerances = DEFAULT_TOL) -> WaterfillAllocation:
    """Classic water-filling over parallel channels.

    Parameters
    ----------
    noise_floors : array_like, shape (n,)
        Non-negative floors ``f_i`` (inverse channel gains). Infinite floors
        mark modes that can never be active.
    budget : float
        Total power to distribute.

    Returns
    -------
    WaterfillAllocation
        ``levels[i] = (mu - f_i)^+`` where the water level ``mu`` is solved
        exactly on the sorted floors.
    """
    floors = np.asarray(noise_floors, dtype=float)
    budget = _check_budget(budget)
    if floors.ndim != 1:
        raise DimensionMismatch("noise_floors must be a vector")
    if np.any(np.isnan(floors)) or np.any(floors < 0):
        raise ValueError("noise floors must be non-negative")
    levels = np.zeros_like(floors)
    finite = np.isfinite(floors)
    if not np.any(finite):
        return WaterfillAllocation(levels, np.inf, 0.0)

    f = floors[finite]
    order = np.argsort(f, kind="stable")
    fs = f[order]
    csum = np.cumsum(fs)
    k = np.arange(1, fs.size + 1)
    # power needed to raise the water to the k-th floor; non-decreasing in k
    needed = k * fs - csum
    n_active = int(np.count_nonzero(needed <= budget))
    mu = (budget + csum[n_active - 1]) / n_active

    active_levels = np.maximum(mu - f, 0.0)
    levels[finite] = active_levels
    return WaterfillAllocation(levels, float(mu), float(np.sum(levels)))


def waterfill_weighted(
    floors,
    weights,
    budget: float,
    tol: Tolerances = DEFAULT_TOL,
) -> WaterfillAllocation:
    """Water-filling with per-mode weights, ``levels_i = (a_i mu - f_i)^+``.

    The water level is bracketed and bisected on the monotone budget function
    ``g(mu) = sum (a_i mu - f_i)^+``; once the active set is stable the level
    is re-solved in closed form on that set so the budget closes to rounding.
    Modes with zero weight are disabled.
    """
    f = np.asarray(floors, dtype=float)
    a = np.asarray(weights, dtype=float)
    budget = _check_budget(budget)
    if f.shape != a.shape or f.ndim != 1:
        raise DimensionMismatch(f"floors {f.shape} and weights {a.shape} disagree")
    if np.any(a < 0) or np.any(np.isnan(a)):
        raise ValueError("weights must be non-negative")
    if np.any(np.isnan(f)) or np.any(f < 0):
        raise ValueError("floors must be non-negative")

    enabled = (a > 0) & np.isfinite(f)
    if not np.any(enabled):
        raise AllModesDisabled("every mode has zero weight or infinite floor")
    levels = np.zeros_like(f)
    fa, aa = f[enabled], a[enabled]
    breakpoints = fa / aa

    def used(mu):
        return float(np.sum(np.maximum(aa * mu - fa, 0.0)))

    lo = float(np.min(breakpoints))
    if budget == 0:
        return WaterfillAllocation(levels, lo, 0.0)
    hi = float(np.max(breakpoints)) + budget / float(np.sum(aa))

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if used(mid) < budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol.tol_bisect * max(1.0, abs(hi)):
            break

    # closed-form level on the active set found by bisection
    mu = 0.5 * (lo + hi)
    for _ in range(fa.size + 1):
        act = aa * mu > fa
        if not np.any(act):
            act = breakpoints <= np.min(breakpoints)
        mu_exact = (budget + np.sum(fa[act])) / np.sum(aa[act])
        if np.array_equal(aa * mu_exact > fa, act) or mu_exact == mu:
            mu = mu_exact
            break
        mu = mu_exact

    levels[enabled] = np.maximum(aa * mu - fa, 0.0)
    return WaterfillAllocation(levels, float(mu), float(np.sum(levels)))


def waterfill_inverse(variances, target_distortion: float, tol: Tolerances = DEFAULT_TOL) -> WaterfillAllocation:
    """Reverse water-filling ``D_i = min(xi, s_i)`` with ``sum D_i = D``.

    Zero-variance modes are carried along with ``D_i = 0``. A target within
    ``tol_rel`` above the total variance is treated as the zero-rate point.

    Raises
    ------
    DistortionOutOfRange
        If ``target_distortion <= 0`` or it exceeds the total variance.
    """
    s = np.asarray(variances, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise DimensionMismatch("variances must be a non-empty vector")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ValueError("variances must be finite and non-negative")
    target = float(target_distortion)
    total = float(np.sum(s))
    if not np.isfinite(target) or target <= 0 or target > total * (1 + tol.tol_rel):
        raise DistortionOutOfRange(f"target distortion {target!r} outside (0, {total!r}]")

    if target >= total:
        return WaterfillAllocation(s.copy(), float(np.max(s)), total)

    order = np.argsort(s, kind="stable")
    ss = s[order]
    n = ss.size
    below = np.concatenate(([0.0], np.cumsum(ss)))
    # with the k smallest variances saturated: D(xi) = below[k] + (n - k) xi
    k = 0
    while k < n and below[k] + (n - k) * ss[k] < target:
        k += 1
    xi = (target - below[k]) / (n - k)
    distortion = np.minimum(xi, s)
    return WaterfillAllocation(distortion, float(xi), float(np.sum(distortion)))


def rate_from_allocation(variances, alloc: WaterfillAllocation) -> float:
    """Rate ``sum_i ln(s_i / D_i)`` of a reverse water-filling allocation, in nats."""
    s = np.asarray(variances, dtype=float)
    d = np.asarray(alloc.levels, dtype=float)
    if s.shape != d.shape:
        raise DimensionMismatch(f"variances {s.shape} and allocation {d.shape} disagree")
    live = (s > 0) & (d > 0)
    terms = np.log(s[live] / d[live])
    return float(np.sum(np.maximum(terms, 0.0)))
