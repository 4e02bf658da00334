"""Rate-distortion function of a discrete memoryless source (Blahut-Arimoto).

The slope parameter ``s`` is the magnitude of dR/dD in bits per unit of
distortion, so the channel update is ``W(xh|x) ~ q(xh) 2^(-s d(x, xh))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, InfeasibleError, ValidationError
from .prob import Alphabet, Channel, DistortionSpec, Pmf

DEFAULT_SLOPES = tuple(np.round(np.geomspace(0.01, 40.0, 60), 10))


@dataclass(frozen=True)
class BAConfig:
    tolerance: float = 1e-7
    max_iters: int = 100_000
    slope_grid: tuple[float, ...] = DEFAULT_SLOPES

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        grid = tuple(float(s) for s in self.slope_grid)
        if not grid:
            raise ValidationError("slope_grid must be non-empty")
        if any(s < 0 for s in grid) or list(grid) != sorted(grid):
            raise ValidationError("slope_grid must be sorted and non-negative")
        object.__setattr__(self, "slope_grid", grid)


@dataclass(frozen=True, eq=False)
class RDPoint:
    rate: float
    distortion: float
    channel: Channel
    slope: float
    iterations: int = 0

    def to_dict(self) -> dict:
        return {"rate": self.rate, "distortion": self.distortion, "slope": self.slope,
                "channel": self.channel.to_dict()}


def _check(p: Pmf, d: DistortionSpec) -> None:
    if d.shape[0] != p.size:
        raise ValidationError(f"distortion matrix has {d.shape[0]} rows for a source of size {p.size}")


def _recon_alphabet(d: DistortionSpec) -> Alphabet:
    return d.recon_alphabet or Alphabet.range(d.shape[1])


def d_max(p: Pmf, d: DistortionSpec) -> float:
    """Smallest distortion reachable at zero rate (best constant reconstruction)."""
    _check(p, d)
    return float((p.probs @ d.matrix).min())


def d_min(p: Pmf, d: DistortionSpec) -> float:
    """Smallest distortion reachable at any rate."""
    _check(p, d)
    return float(p.probs @ d.matrix.min(axis=1))


def _rate(p, W, q) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        # q can underflow to 0 under a subnormal W entry; such terms are 0
        terms = np.where((W > 0) & (q[None, :] > 0), W * np.log2(W / q[None, :]), 0.0)
    return max(float(p @ terms.sum(axis=1)), 0.0)


def _ba(p, dm, slope, cfg, q0=None):
    """Core iteration on the active (p > 0) rows. Returns (W, q, iters).

    Stops on the Blahut bound: with c(xh) = sum_x p(x) K(x, xh) / (K q)(x),
    the functional is within max log2 c - sum q log2 c of its optimum.
    """
    n_out = dm.shape[1]
    q = np.full(n_out, 1.0 / n_out)
    if q0 is not None:
        # a warm start with near-zero mass on a symbol the new slope needs
        # takes thousands of multiplicative steps to recover; keep it alive
        q = 0.9 * np.asarray(q0, dtype=float) + 0.1 * q
    # shifting each row by its minimum leaves the normalized update unchanged
    kernel = np.exp2(-slope * (dm - dm.min(axis=1, keepdims=True)))
    gap = np.inf
    for it in range(1, cfg.max_iters + 1):
        c = (p / (kernel @ q)) @ kernel
        pos = q > 0
        gap = float(np.log2(c.max()) - q[pos] @ np.log2(c[pos]))
        q = q * c
        q /= q.sum()
        if gap < cfg.tolerance:
            A = kernel * q[None, :]
            return A / A.sum(axis=1, keepdims=True), q, it
    A = kernel * q[None, :]
    raise ConvergenceError(
        f"Blahut-Arimoto did not converge in {cfg.max_iters} iterations at slope {slope}",
        last_iterate=A / A.sum(axis=1, keepdims=True), residual=gap)


def _point(p: Pmf, d: DistortionSpec, W_active, active, slope, iters) -> RDPoint:
    q = p.probs[active] @ W_active
    W = np.tile(q, (p.size, 1))
    W[active] = W_active
    W /= W.sum(axis=1, keepdims=True)
    rate = _rate(p.probs, W, p.probs @ W)
    dist = float(p.probs @ (W * d.matrix).sum(axis=1))
    ch = Channel(p.alphabet, _recon_alphabet(d), W, input_name="X", output_name="Xhat")
    return RDPoint(rate, dist, ch, float(slope), iters)


def blahut_arimoto(p: Pmf, d: DistortionSpec, slope: float,
                   cfg: BAConfig | None = None, _q0=None) -> RDPoint:
    """One point of the lower convex envelope of the R(D) region.

    ``slope = 0`` returns the zero-rate endpoint at ``d_max``.  Symbols with
    zero probability are dropped before iterating.
    """
    cfg = cfg or BAConfig()
    _check(p, d)
    if not slope >= 0 or not np.isfinite(slope):
        raise ValidationError(f"slope must be finite and >= 0, got {slope}")
    active = p.probs > 0
    pa, dm = p.probs[active], d.matrix[active]
    if slope == 0:
        W = np.zeros_like(dm)
        W[:, int(np.argmin(pa @ dm))] = 1.0
        return _point(p, d, W, active, 0.0, 0)
    W, _, iters = _ba(pa, dm, float(slope), cfg, _q0)
    return _point(p, d, W, active, slope, iters)


def rd_curve(p: Pmf, d: DistortionSpec, cfg: BAConfig | None = None) -> list[RDPoint]:
    """Sweep ``cfg.slope_grid``; points sorted by increasing distortion."""
    cfg = cfg or BAConfig()
    pts = [blahut_arimoto(p, d, s, cfg) for s in cfg.slope_grid]
    return sorted(pts, key=lambda pt: (pt.distortion, -pt.rate))


def rate_distortion(p: Pmf, d: DistortionSpec, D: float, cfg: BAConfig | None = None,
                    d_tol: float = 1e-6) -> RDPoint:
    """R(D) at a target distortion by bisection over the slope.

    The two bracketing BA channels are mixed so the returned channel meets
    ``D`` exactly; by convexity of mutual information its rate is at most
    the chord between them.
    """
    cfg = cfg or BAConfig()
    _check(p, d)
    lo_d = d_min(p, d)
    if D < lo_d - 1e-12:
        raise InfeasibleError(f"D={D} is below the minimum achievable distortion {lo_d}",
                              estimate=lo_d)
    zero = blahut_arimoto(p, d, 0.0, cfg)
    if D >= zero.distortion:
        return zero
    active = p.probs > 0
    pa, dm = p.probs[active], d.matrix[active]

    def run(s, q0):
        W, q, it = _ba(pa, dm, s, cfg, q0)
        return W, q, float(pa @ (W * dm).sum(axis=1))

    s_lo, lo = 0.0, (zero.channel.matrix[active], None, zero.distortion)
    s_hi = 1.0
    hi = run(s_hi, None)
    while hi[2] > D + d_tol and s_hi < 4096:
        s_lo, lo = s_hi, hi
        s_hi *= 2.0
        hi = run(s_hi, hi[1])
    if hi[2] > D + d_tol:
        return _point(p, d, hi[0], active, s_hi, 0)
    while s_hi - s_lo > 1e-9 * max(1.0, s_hi) and lo[2] - hi[2] > d_tol:
        s_mid = 0.5 * (s_lo + s_hi)
        mid = run(s_mid, hi[1])
        if mid[2] > D:
            s_lo, lo = s_mid, mid
        else:
            s_hi, hi = s_mid, mid
    span = lo[2] - hi[2]
    t = 0.0 if span <= 0 else min(max((D - hi[2]) / span, 0.0), 1.0)
    W = (1 - t) * hi[0] + t * lo[0]
    return _point(p, d, W, active, s_hi, 0)
