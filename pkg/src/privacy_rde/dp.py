"""Laplace mechanism baseline for epsilon-differential privacy."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class QuerySpec:
    """A count query (``predicate``) or a sum of values clipped to [lo, hi]."""

    kind: str
    clip_lo: Optional[float] = None
    clip_hi: Optional[float] = None
    predicate: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("count", "sum"):
            raise ValidationError(f"query kind must be 'count' or 'sum', got {self.kind!r}")
        if self.kind == "sum":
            if self.clip_lo is None or self.clip_hi is None:
                raise ValidationError("sum queries need clipping bounds to have finite sensitivity")
            if not (np.isfinite(self.clip_lo) and np.isfinite(self.clip_hi)):
                raise ValidationError("clipping bounds must be finite")
            if not self.clip_lo < self.clip_hi:
                raise ValidationError("clip_lo must be < clip_hi")

    @classmethod
    def count(cls, predicate: Callable | None = None) -> "QuerySpec":
        return cls("count", predicate=predicate)

    @classmethod
    def clipped_sum(cls, lo: float, hi: float) -> "QuerySpec":
        return cls("sum", float(lo), float(hi))

    def evaluate(self, rows: Iterable) -> float:
        """Exact (noise-free) answer on a list of rows."""
        if self.kind == "count":
            pred = self.predicate or (lambda r: True)
            return float(sum(1 for r in rows if pred(r)))
        vals = np.asarray(list(rows), dtype=float)
        return float(np.clip(vals, self.clip_lo, self.clip_hi).sum())


def sensitivity(q: QuerySpec) -> float:
    """Largest change in the answer when one row is added or removed."""
    if q.kind == "count":
        return 1.0
    return float(max(abs(q.clip_lo), abs(q.clip_hi)))


@dataclass(frozen=True)
class Mechanism:
    epsilon: float
    delta_f: float

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if not (self.delta_f >= 0) or not np.isfinite(self.delta_f):
            raise ValidationError(f"sensitivity must be finite and >= 0, got {self.delta_f}")

    @property
    def b(self) -> float:
        """Laplace scale."""
        return self.delta_f / self.epsilon

    @classmethod
    def for_query(cls, q: QuerySpec, epsilon: float) -> "Mechanism":
        return cls(float(epsilon), sensitivity(q))


def laplace_noise(b: float, size, seed=None) -> np.ndarray:
    """Laplace(0, b) samples by inverse CDF of a uniform on (-1/2, 1/2)."""
    rng = np.random.default_rng(seed)
    u = rng.random(size) - 0.5
    # sign(u) * log(1 - 2|u|) never hits log(0) since |u| < 1/2
    return -b * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def laplace_mechanism(values: Sequence[float], q: QuerySpec, epsilon: float,
                      seed=None) -> np.ndarray:
    """Add independent Laplace(sensitivity / epsilon) noise to each value."""
    if np.isposinf(epsilon):
        return np.asarray(values, dtype=float).copy()
    mech = Mechanism.for_query(q, epsilon)
    vals = np.asarray(values, dtype=float)
    return vals + laplace_noise(mech.b, vals.shape, seed)


def laplace_density(z, b: float, mu: float = 0.0):
    z = np.asarray(z, dtype=float)
    return np.exp(-np.abs(z - mu) / b) / (2.0 * b)


@dataclass(frozen=True)
class RatioReport:
    epsilon: float
    delta_f: float
    b: float
    bound: float              # exp(delta_f / b), the worst-case density ratio
    analytic_ok: bool
    empirical_max_ratio: float
    empirical_ok: bool

    @property
    def ok(self) -> bool:
        return self.analytic_ok and self.empirical_ok

    def to_dict(self) -> dict:
        return dict(self.__dict__, ok=self.ok)


def ratio_bound(b: float, shift: float) -> float:
    """sup_z p(z) / p(z + shift) for Laplace(b): exp(|shift| / b)."""
    return float(np.exp(abs(shift) / b))


def dp_ratio_check(b: float, epsilon: float, delta_f: float, samples: int = 200_000,
                   bins: int = 40, seed=0, rtol: float = 0.15) -> RatioReport:
    """Check the epsilon-DP density ratio of Laplace(b) at shift ``delta_f``.

    The analytic part uses |z - mu| - |z - mu'| <= |mu - mu'| so the ratio
    is at most ``exp(delta_f / b)``. The empirical part histograms two
    shifted sample streams over the central mass and compares bin ratios
    against ``exp(epsilon)`` with relative slack ``rtol``.
    """
    if not (b > 0 and epsilon > 0 and delta_f >= 0):
        raise ValidationError("need b > 0, epsilon > 0 and delta_f >= 0")
    bound = ratio_bound(b, delta_f)
    analytic_ok = bound <= np.exp(epsilon) * (1 + 1e-12)
    a = laplace_noise(b, samples, seed)
    c = delta_f + laplace_noise(b, samples, None if seed is None else seed + 1)
    lo, hi = -2 * b, delta_f + 2 * b
    ha, edges = np.histogram(a, bins=bins, range=(lo, hi))
    hc, _ = np.histogram(c, bins=edges)
    keep = (ha >= 1000) & (hc >= 1000)
    if keep.any():
        r = np.maximum(ha[keep] / hc[keep], hc[keep] / ha[keep])
        emp = float(r.max())
    else:
        emp = 1.0
    empirical_ok = emp <= np.exp(epsilon) * (1 + rtol)
    return RatioReport(float(epsilon), float(delta_f), float(b), bound, bool(analytic_ok),
                       emp, bool(empirical_ok))


def accuracy_curve(epsilon_grid: Iterable[float], q: QuerySpec) -> list[tuple[float, float]]:
    """(epsilon, E|noise|) pairs; E|Laplace(b)| = b."""
    out = []
    for eps in epsilon_grid:
        out.append((float(eps), Mechanism.for_query(q, eps).b))
    return out
