"""Closed-form tradeoff curves.

Categorical source under Hamming distortion (reverse waterfilling on the
reconstruction marginal) and a bivariate Gaussian pair where only X is
revealed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InfeasibleError, ValidationError
from .prob import Alphabet, Channel, Pmf, entropy, plogp_sum

_D_TOL = 1e-12


def _xlog2x(v: float) -> float:
    return float(v * np.log2(v)) if v > 0 else 0.0


@dataclass(frozen=True, eq=False)
class WaterfillSolution:
    """Optimal Hamming test channel for a categorical source.

    Attributes
    ----------
    lam : float
        Water level. Symbols with ``p(x) > lam`` form the support.
    d_bar : float
        ``1 - D``, the probability of an exact reconstruction.
    support : tuple of int
        Indices of reconstruction symbols with positive probability.
    p_xhat : Pmf
        Reconstruction marginal.
    test_channel : Channel
        Reverse channel p(x | xhat); row ``xhat`` is a distribution over x.
    gamma_exact : float
        H(X | Xhat) in bits, evaluated from the test channel.
    gamma_formula : float
        The textbook expression that counts ``|support|`` water-level terms.
    """

    source: Pmf
    distortion: float
    lam: float
    d_bar: float
    support: tuple[int, ...]
    p_xhat: Pmf
    test_channel: Channel
    gamma_exact: float
    gamma_formula: float

    @property
    def rate(self) -> float:
        """I(X; Xhat) = H(X) - H(X | Xhat)."""
        return max(entropy(self.source) - self.gamma_exact, 0.0)

    def forward_channel(self) -> Channel:
        """p(xhat | x), the sanitizing channel applied to each record."""
        p = self.source.probs
        joint = self.p_xhat.probs[:, None] * self.test_channel.matrix   # xhat, x
        W = np.empty((p.size, p.size))
        pos = p > 0
        W[pos] = (joint[:, pos] / p[pos]).T
        W[~pos] = self.p_xhat.probs
        W /= W.sum(axis=1, keepdims=True)
        a = self.source.alphabet
        return Channel(a, a, W, input_name="X", output_name="Xhat")

    def marginal_residual(self) -> float:
        """max_x |sum_xhat p(xhat) p(x|xhat) - p(x)|."""
        implied = self.p_xhat.probs @ self.test_channel.matrix
        return float(np.abs(implied - self.source.probs).max())

    def to_dict(self) -> dict:
        return {"distortion": self.distortion, "lambda": self.lam, "d_bar": self.d_bar,
                "support": list(self.support), "p_xhat": self.p_xhat.probs.tolist(),
                "test_channel": self.test_channel.to_dict(),
                "gamma_exact": self.gamma_exact,
                "gamma_formula": self.gamma_formula}


def hamming_dmax(p: Pmf) -> float:
    return float(1.0 - p.probs.max())


def _waterfill_distortion(p: np.ndarray, lam: float) -> float:
    inside = p > lam
    return float((inside.sum() - 1) * lam + p[~inside].sum())


def _solve_level(p: np.ndarray, D: float, iters: int = 200) -> float:
    # D(lam) is continuous and increasing on [0, p_max]
    lo, hi = 0.0, float(p.max())
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _waterfill_distortion(p, mid) < D:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16:
            break
    lam = 0.5 * (lo + hi)
    # exact level inside the bracketed support
    inside = p > lam
    k = int(inside.sum())
    if k >= 2:
        exact = (D - p[~inside].sum()) / (k - 1)
        if np.all(p[inside] > exact) and np.all(p[~inside] <= exact):
            lam = float(exact)
    return lam


def hamming_waterfill(p: Pmf, D: float) -> WaterfillSolution:
    """Reverse waterfilling for a categorical source at Hamming distortion D.

    The water level is found by bisection on the distortion it induces and
    then solved exactly within the bracketed support.
    """
    probs = p.probs
    dmax = hamming_dmax(p)
    D = float(D)
    if not (-_D_TOL <= D <= dmax + _D_TOL):
        raise InfeasibleError(f"D={D} outside [0, {dmax}] for Hamming distortion",
                              estimate=dmax)
    D = min(max(D, 0.0), dmax)
    M = probs.size
    if D >= dmax - _D_TOL:
        # zero-rate endpoint: reconstruct the most likely symbol
        top = int(np.argmax(probs))
        lam, support = float(probs[top]), (top,)
        p_xhat = np.zeros(M)
        p_xhat[top] = 1.0
        D = dmax
    else:
        lam = _solve_level(probs, D)
        inside = probs > lam
        support = tuple(int(i) for i in np.flatnonzero(inside))
        p_xhat = np.zeros(M)
        p_xhat[inside] = (probs[inside] - lam) / (1.0 - D - lam)
        p_xhat /= p_xhat.sum()
    d_bar = 1.0 - D
    inside = np.zeros(M, dtype=bool)
    inside[list(support)] = True
    T = np.tile(np.where(inside, lam, probs), (M, 1))
    for x in support:
        T[x, x] = d_bar
    for x in range(M):
        if x not in support:
            T[x] = probs
    T /= T.sum(axis=1, keepdims=True)
    a = p.alphabet
    test = Channel(a, a, T, input_name="Xhat", output_name="X")
    gamma_exact = float(p_xhat @ np.array([entropy(row) for row in T]))
    outside = probs[~inside]
    literal = -_xlog2x(d_bar) - len(support) * _xlog2x(lam) + plogp_sum(outside)
    return WaterfillSolution(p, D, lam, d_bar, support, Pmf(a, p_xhat), test,
                             gamma_exact, float(literal))


class HammingCurvePoint(NamedTuple):
    D: float
    gamma_exact: float
    gamma_formula: float


def hamming_gamma_curve(p: Pmf, D_grid: Iterable[float]) -> list[HammingCurvePoint]:
    out = []
    for D in D_grid:
        s = hamming_waterfill(p, D)
        out.append(HammingCurvePoint(s.distortion, s.gamma_exact, s.gamma_formula))
    return out


# --- bivariate Gaussian ---------------------------------------------------

@dataclass(frozen=True)
class GaussianModel:
    sigma_x2: float
    sigma_y2: float
    rho: float

    def __post_init__(self):
        if not (self.sigma_x2 > 0 and self.sigma_y2 > 0):
            raise ValidationError("variances must be positive")
        if not abs(self.rho) <= 1:
            raise ValidationError(f"|rho| must be <= 1, got {self.rho}")


@dataclass(frozen=True)
class GaussianGamma:
    """Gaussian tradeoff value in two readings.

    ``variance_form`` is the conditional variance of Y given the revealed
    reconstruction (units: variance). ``entropy_form`` is the differential
    entropy of a Gaussian with that variance (units: bits).
    """

    D: float
    variance_form: float
    entropy_form: float
    variance_units: str = "variance"
    entropy_units: str = "bits"

    def to_dict(self) -> dict:
        return {"D": self.D, "gamma_variance": self.variance_form,
                "gamma_entropy_bits": self.entropy_form,
                "units": {"gamma_variance": self.variance_units,
                          "gamma_entropy_bits": self.entropy_units}}


def gaussian_gamma(m: GaussianModel, D: float) -> GaussianGamma:
    """Equivocation of Y when X is revealed through an AWGN test channel.

    Reconstructing X at mean squared error D uses the reverse channel
    ``X = Xhat + N`` with ``N ~ N(0, D)``; the residual variance of Y is
    ``sigma_y2 * ((1 - rho^2) + rho^2 D / sigma_x2)``.
    """
    D = float(D)
    if not (0.0 <= D <= m.sigma_x2):
        raise InfeasibleError(f"D={D} outside [0, {m.sigma_x2}]", estimate=m.sigma_x2)
    r2 = m.rho * m.rho
    var = m.sigma_y2 * ((1.0 - r2) + r2 * D / m.sigma_x2)
    with np.errstate(divide="ignore"):
        ent = 0.5 * float(np.log2(2 * np.pi * np.e * var))
    return GaussianGamma(D, float(var), ent)


def gaussian_region(m: GaussianModel, D_grid: Iterable[float]) -> list[GaussianGamma]:
    """``gaussian_gamma`` over a grid; the region is everything below the curve."""
    return [gaussian_gamma(m, D) for D in D_grid]
