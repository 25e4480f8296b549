"""Discrete family of candidate complexity functions g(n).

Each candidate is a (kind, param) pair.  The grid covers log-log powers,
log powers, decaying exponentials, polynomials, growing exponentials and
the gamma function, 50 members in total.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from rtheta.errors import BasisOverflowError, DomainError

# log of the largest finite double
_LOG_MAX = math.log(np.finfo(float).max)


class FamilyKind(enum.IntEnum):
    LOGLOG_POLYNOMIAL = 0
    LOG_POLYNOMIAL = 1
    FRACTIONAL_POWER = 2
    POLYNOMIAL = 3
    POWER = 4
    FACTORIAL = 5


@dataclass(frozen=True)
class CandidateBasis:
    kind: FamilyKind
    param: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        object.__setattr__(self, "param", float(self.param))
        if self.kind == FamilyKind.FRACTIONAL_POWER and not 0 < self.param < 1:
            raise ValueError(f"FRACTIONAL_POWER needs 0 < p < 1, got {self.param}")
        if self.kind == FamilyKind.POWER and not self.param > 1:
            raise ValueError(f"POWER needs p > 1, got {self.param}")
        if self.param < 0:
            raise ValueError(f"negative parameter {self.param}")

    @property
    def is_constant(self) -> bool:
        return (
            self.kind in (FamilyKind.LOGLOG_POLYNOMIAL, FamilyKind.LOG_POLYNOMIAL)
            and self.param == 0
        )

    @property
    def min_n(self) -> int:
        return 2 if self.kind == FamilyKind.LOGLOG_POLYNOMIAL else 1

    def canonical(self) -> "CandidateBasis":
        return CONSTANT if self.is_constant else self

    def __str__(self):
        if self.kind == FamilyKind.FACTORIAL:
            return "FACTORIAL"
        return f"{self.kind.name}({self.param:g})"


CONSTANT = CandidateBasis(FamilyKind.LOG_POLYNOMIAL, 0.0)

_GRID_PARAMS = {
    FamilyKind.LOGLOG_POLYNOMIAL: [0, 1, 2, 3],
    FamilyKind.LOG_POLYNOMIAL: list(range(11)),
    FamilyKind.FRACTIONAL_POWER: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    FamilyKind.POLYNOMIAL: [1, 1.3, 1.5, 1.7, 2, 2.5, 2.7, 3, 3.5, 4, 4.5, 5, 5.5, 6, 7, 8, 9, 10],
    FamilyKind.POWER: [1.5, 2, 2.5, 3, 3.5, 4, 5],
    FamilyKind.FACTORIAL: [1.0],
}


@functools.lru_cache(maxsize=None)
def _grid():
    return tuple(
        CandidateBasis(kind, p) for kind in FamilyKind for p in _GRID_PARAMS[kind]
    )


def candidate_grid() -> list[CandidateBasis]:
    """All 50 candidates in canonical order (by kind, then parameter)."""
    return list(_grid())


def grid_params(kind: FamilyKind) -> list[float]:
    return [float(p) for p in _GRID_PARAMS[FamilyKind(kind)]]


def encode_feature_type(kind: FamilyKind) -> int:
    return int(FamilyKind(kind))


def decode_feature_type(code: int) -> FamilyKind:
    return FamilyKind(int(code))


def evaluate_basis(basis: CandidateBasis, n: int) -> float:
    """Return g(n) for a single input size.

    Raises DomainError when ``n`` is below the basis's minimum size and
    BasisOverflowError when the value exceeds the double range.
    """
    return float(evaluate_many(basis, np.asarray([n]))[0])


def evaluate_many(basis: CandidateBasis, n) -> np.ndarray:
    """Vectorised :func:`evaluate_basis` over an array of sizes."""
    n = np.asarray(n, dtype=float)
    if n.size and n.min() < basis.min_n:
        raise DomainError(f"{basis} is undefined for n < {basis.min_n}")
    kind, p = basis.kind, basis.param
    if kind == FamilyKind.LOGLOG_POLYNOMIAL:
        return np.log2(np.log2(n)) ** p if p else np.ones_like(n)
    if kind == FamilyKind.LOG_POLYNOMIAL:
        return np.log2(n) ** p if p else np.ones_like(n)
    if kind == FamilyKind.POLYNOMIAL:
        return n ** p
    if kind == FamilyKind.FRACTIONAL_POWER:
        return np.power(p, n)
    # growth is checked in log space before anything is exponentiated
    if kind == FamilyKind.POWER:
        log_g = n * math.log(p)
    else:
        log_g = np.array([math.lgamma(v) for v in n.ravel()]).reshape(n.shape)
    if n.size and log_g.max() >= _LOG_MAX:
        raise BasisOverflowError(f"{basis} overflows a double at n={n.max():g}")
    if kind == FamilyKind.POWER:
        return np.power(p, n)
    return np.array([math.gamma(v) for v in n.ravel()]).reshape(n.shape)


def simplicity_key(basis: CandidateBasis) -> tuple[int, float]:
    b = basis.canonical()
    return (int(b.kind), b.param)


def compare_simplicity(a: CandidateBasis, b: CandidateBasis) -> int:
    """-1 if ``a`` is simpler, 1 if ``b`` is, 0 when they are equivalent."""
    ka, kb = simplicity_key(a), simplicity_key(b)
    return (ka > kb) - (ka < kb)
