"""Fit metric-vs-size series against the candidate grid.

Every candidate is fitted with the two-parameter model ``r * g(n) + X`` by
closed-form least squares.  Candidates whose slope is not significantly
positive are discarded; among the rest the lowest residual criterion wins
and near-ties go to the simpler candidate.

Two weightings are supported.  ``"relative"`` (the default) weights each
point by ``1 / value**2`` so residuals are measured as fractions of the
reading, which suits counters whose noise grows with their magnitude.
``"none"`` is plain ordinary least squares.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy import stats

from rtheta.complexity_model import (
    CONSTANT,
    CandidateBasis,
    FamilyKind,
    candidate_grid,
    evaluate_many,
    simplicity_key,
)
from rtheta.errors import BasisOverflowError, DomainError, InsufficientData

MIN_POINTS = 3
TIE_TOLERANCE = 1e-9
# family-wise false-positive rate for accepting a growth term on a flat series
SIGNIFICANCE = 0.05
WEIGHTINGS = ("relative", "none")
# smallest magnitude used in relative weights, as a fraction of the largest reading
_REL_FLOOR = 1e-6


class Sample(NamedTuple):
    n: int
    value: float


@dataclass(frozen=True)
class FitQuadruple:
    feature_type: FamilyKind
    feature_config: float
    intercept: float
    r_val: float

    @property
    def basis(self) -> CandidateBasis:
        return CandidateBasis(self.feature_type, self.feature_config)

    def as_tuple(self) -> tuple[int, float, float, float]:
        return (int(self.feature_type), self.feature_config, self.intercept, self.r_val)


@dataclass(frozen=True)
class FitScore:
    """Goodness of fit of one candidate.

    ``nrmse`` is the RMS residual over the mean absolute reading and is
    reported for every fit.  ``criterion`` is what selection minimises: the
    weighted RMS residual, equal to ``nrmse`` under ``weighting="none"``.
    """

    nrmse: float
    n_points: int
    criterion: float = 0.0
    slope_t: float = math.inf


class CandidateFit(NamedTuple):
    basis: CandidateBasis
    r: float
    intercept: float
    score: FitScore


class Rejected(Exception):
    """A candidate cannot describe the series; the message says why."""


def _weights(y: np.ndarray, weighting: str) -> np.ndarray:
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}, expected one of {WEIGHTINGS}")
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    if scale == 0:
        return np.ones_like(y)
    if weighting == "none":
        return np.full_like(y, 1.0 / float(np.mean(np.abs(y))) ** 2)
    return 1.0 / np.maximum(np.abs(y), _REL_FLOOR * scale) ** 2


def least_squares(g, y, w=None) -> tuple[float, float]:
    """Closed-form (weighted) least-squares slope and intercept of y on g.

    ``g`` is divided by its largest magnitude first so that exponential and
    gamma bases keep finite squares.
    """
    g = np.asarray(g, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=float)
    scale = float(np.max(np.abs(g)))
    if scale == 0 or not math.isfinite(scale):
        raise Rejected("basis has no usable spread")
    gs = g / scale
    wsum = float(w.sum())
    g_mean = float(np.dot(w, gs)) / wsum
    y_mean = float(np.dot(w, y)) / wsum
    gc = gs - g_mean
    var = float(np.dot(w, gc * gc))
    if var == 0:
        raise Rejected("basis is constant over the sampled sizes")
    slope = float(np.dot(w, gc * (y - y_mean))) / var
    return slope / scale, y_mean - slope * g_mean


def nrmse(residuals: np.ndarray, y: np.ndarray) -> float:
    rmse = math.sqrt(float(np.mean(residuals**2)))
    denom = float(np.mean(np.abs(y)))
    if denom == 0:
        return 0.0 if rmse == 0 else math.inf
    return rmse / denom


@functools.lru_cache(maxsize=256)
def critical_t(dof: int, n_candidates: int) -> float:
    """One-sided Bonferroni-corrected critical t value."""
    return float(stats.t.ppf(1.0 - SIGNIFICANCE / n_candidates, dof))


def _as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    # canonical order makes the floating-point sums independent of input order
    samples = sorted((float(a), float(b)) for a, b in samples)
    n = np.array([s[0] for s in samples], dtype=float)
    y = np.array([s[1] for s in samples], dtype=float)
    return n, y


def _fit(n, y, w, basis: CandidateBasis, t_crit: float) -> CandidateFit:
    if len(np.unique(n)) < MIN_POINTS:
        raise Rejected(f"fewer than {MIN_POINTS} distinct sizes")
    if basis.is_constant:
        level = float(np.dot(w, y) / w.sum())
        resid = y - level
        criterion = math.sqrt(float(np.dot(w, resid * resid)) / len(y))
        return CandidateFit(basis, level, 0.0, FitScore(nrmse(resid, y), len(y), criterion))
    try:
        g = evaluate_many(basis, n)
    except (DomainError, BasisOverflowError) as exc:
        raise Rejected(str(exc)) from exc
    r, intercept = least_squares(g, y, w)
    if not r > 0:
        raise Rejected(f"non-positive slope {r:g}")
    resid = y - (r * g + intercept)
    wsse = float(np.dot(w, resid * resid))
    criterion = math.sqrt(wsse / len(y))
    slope_t = math.inf
    dof = len(y) - 2
    if dof > 0 and wsse > 0:
        gs = g / np.max(np.abs(g))
        gc = gs - np.dot(w, gs) / w.sum()
        se = math.sqrt(wsse / dof / float(np.dot(w, gc * gc))) / float(np.max(np.abs(g)))
        slope_t = r / se if se > 0 else math.inf
        if slope_t < t_crit:
            raise Rejected(f"slope not significant (t={slope_t:.2f} < {t_crit:.2f})")
    return CandidateFit(basis, r, intercept, FitScore(nrmse(resid, y), len(y), criterion, slope_t))


def fit_candidate(samples: Iterable[Sample], basis: CandidateBasis, weighting: str = "relative"):
    """Fit ``r * g(n) + X`` for one candidate.

    Returns ``(r, X, FitScore)`` or raises :class:`Rejected`.  Every sample
    must lie inside the basis domain; a series reaching below it rejects the
    candidate instead of silently dropping points.  The constant candidate
    returns the (weighted) mean as ``r`` and ``X = 0``.
    """
    n, y = _as_arrays(samples)
    t_crit = critical_t(max(len(y) - 2, 1), len(candidate_grid()))
    fit = _fit(n, y, _weights(y, weighting), basis, t_crit)
    return fit.r, fit.intercept, fit.score


def fit_all(samples: Iterable[Sample], weighting: str = "relative") -> list[CandidateFit]:
    """Fit every grid candidate, dropping rejects."""
    n, y = _as_arrays(samples)
    w = _weights(y, weighting)
    grid = candidate_grid()
    t_crit = critical_t(max(len(y) - 2, 1), len(grid))
    fits = []
    for basis in grid:
        try:
            fits.append(_fit(n, y, w, basis, t_crit))
        except Rejected:
            continue
    return fits


def choose(fits: list[CandidateFit]) -> CandidateFit:
    """Lowest criterion; candidates within TIE_TOLERANCE go to the simplest."""
    best = min(f.score.criterion for f in fits)
    near = [f for f in fits if f.score.criterion <= best + TIE_TOLERANCE]
    return min(near, key=lambda f: simplicity_key(f.basis))


def select_best(samples: Iterable[Sample], weighting: str = "relative") -> tuple[FitQuadruple, FitScore]:
    samples = list(samples)
    n, y = _as_arrays(samples)
    distinct = len(np.unique(n))
    if distinct < MIN_POINTS:
        raise InsufficientData(f"need {MIN_POINTS} distinct sizes, got {distinct}")
    fits = fit_all(samples, weighting)
    if not fits:
        mean = float(y.mean())
        return (
            FitQuadruple(CONSTANT.kind, CONSTANT.param, 0.0, mean),
            FitScore(nrmse(y - mean, y), len(y), nrmse(y - mean, y)),
        )
    best = choose(fits)
    basis = best.basis.canonical()
    return FitQuadruple(basis.kind, basis.param, best.intercept, best.r), best.score


def aggregate_repeats(records: Iterable[Sample]) -> list[Sample]:
    """Collapse samples sharing a size to their median, sorted by size."""
    by_n: dict[int, list[float]] = {}
    for n, value in records:
        by_n.setdefault(n, []).append(float(value))
    return [Sample(n, float(np.median(v))) for n, v in sorted(by_n.items())]
