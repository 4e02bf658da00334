"""Brute-force ground truth over quantized channels.

Every row-stochastic matrix whose entries are multiples of ``q`` is
visited.  Rate, equivocation and decoded distortion are all sums of a
per-column quantity, so each column value is tabulated once and a channel
is scored by table lookups.  For the privacy oracles the columns of U are
exchangeable (the decoder is re-optimized per column), so only channels
whose column indices are non-decreasing are scored; the optimum over that
subset equals the optimum over all channels.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, log2
from typing import Iterator

import numba
import numpy as np

from .errors import InfeasibleError, ValidationError
from .prob import Alphabet, Channel, DistortionSpec, JointPmf, Pmf, Role

MAX_TABLE = 20_000_000


class OracleBudgetError(ValidationError):
    def __init__(self, count: int, budget: int):
        super().__init__(f"oracle would enumerate {count} channels, budget is {budget}")
        self.count = count
        self.budget = budget


@dataclass(frozen=True)
class OracleConfig:
    quantization_step: float = 0.05
    max_enumerations: int = 10_000_000

    def __post_init__(self):
        q = float(self.quantization_step)
        if not 0 < q <= 1:
            raise ValidationError("quantization_step must lie in (0, 1]")
        if abs(1 / q - round(1 / q)) > 1e-9:
            raise ValidationError(f"1/quantization_step must be an integer, got {1 / q}")
        if self.max_enumerations <= 0:
            raise ValidationError("max_enumerations must be positive")

    @property
    def levels(self) -> int:
        return int(round(1 / self.quantization_step))


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    channel: Channel
    quantization_step: float
    enumeration_count: int
    evaluated: int
    continuity_gap: float  # entropy-continuity allowance for the grid; ignores constraint effects
    distortion: float
    equivocation: float | None = None
    rate: float | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "channel": self.channel.to_dict(),
                "quantization_step": self.quantization_step,
                "enumeration_count": self.enumeration_count,
                "evaluated": self.evaluated, "continuity_gap": self.continuity_gap,
                "distortion": self.distortion, "equivocation": self.equivocation,
                "rate": self.rate}


def channel_count(n_in: int, n_out: int, levels: int) -> int:
    return comb(levels + n_out - 1, n_out - 1) ** n_in


def _check_budget(n_in, n_out, cfg):
    count = channel_count(n_in, n_out, cfg.levels)
    if count > cfg.max_enumerations:
        raise OracleBudgetError(count, cfg.max_enumerations)
    return count


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ``parts``-tuples of non-negative ints summing to ``total``."""
    for bars in combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


def enumerate_channels(n_in: int, n_out: int, cfg: OracleConfig | None = None) -> Iterator[Channel]:
    """Yield every n_in x n_out row-stochastic matrix on the q-grid."""
    cfg = cfg or OracleConfig()
    _check_budget(n_in, n_out, cfg)
    N = cfg.levels
    rows = [np.array(c, dtype=float) / N for c in compositions(N, n_out)]

    def rec(prefix):
        if len(prefix) == n_in:
            yield Channel.from_matrix(np.array(prefix))
            return
        for r in rows:
            yield from rec(prefix + [r])

    yield from rec([])


# --- column tables ------------------------------------------------------------

def _grid_columns(n_in: int, N: int) -> np.ndarray:
    """(T, n_in) integer digits of every column on the grid, digit 0 least significant."""
    T = (N + 1) ** n_in
    if T > MAX_TABLE:
        raise ValidationError(f"column table of size {T} too large for the oracle")
    digits = np.indices((N + 1,) * n_in).reshape(n_in, -1)[::-1].T
    return np.ascontiguousarray(digits)


def _xlogx(a):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a > 0, a * np.log2(np.where(a > 0, a, 1.0)), 0.0)


def _omega(delta: float, n: int) -> float:
    """Fannes-Audenaert bound on |H(P) - H(Q)| for TV distance delta, n outcomes."""
    if n <= 1 or delta <= 0:
        return 0.0
    delta = min(delta, 1 - 1 / n)
    h = -delta * log2(delta) - (1 - delta) * log2(1 - delta) if 0 < delta < 1 else 0.0
    return delta * log2(n - 1) + h


@numba.njit(cache=True)
def _advance(cur, rem, j, n_in):
    """Odometer step of column j within its box; False (and reset) when exhausted."""
    for i in range(n_in):
        if cur[j, i] < rem[j, i]:
            cur[j, i] += 1
            return True
        cur[j, i] = 0
    return False


@numba.njit(cache=True)
def _scan(obj, cons, bounds, n_in, k, N, maximize, symmetric):
    """Search over k columns summing to N * ones; returns (best, column indices, scored).

    Leading columns are enumerated depth-first; the last two are scanned
    together, the final one being the digit-wise remainder whose index is
    ``idx(rem) - idx(col)``.
    """
    m = cons.shape[0]
    pw = np.empty(n_in, np.int64)
    acc = 1
    for i in range(n_in):
        pw[i] = acc
        acc *= N + 1
    best_val = -np.inf if maximize else np.inf
    best = -np.ones(k, np.int64)
    evaluated = 0
    if k == 1:
        full = acc - 1
        ok = True
        for c in range(m):
            if cons[c, 0, full] > bounds[c]:
                ok = False
        if ok:
            best_val = obj[0, full]
            best[0] = full
        return best_val, best, 1
    depth = k - 2
    rem = np.empty((k, n_in), np.int64)
    cur = np.zeros((k, n_in), np.int64)
    idx = np.zeros(k, np.int64)
    acc_obj = np.zeros(k + 1)
    acc_con = np.zeros((k + 1, m))
    lim = np.empty(m)
    dig = np.zeros(n_in, np.int64)
    for i in range(n_in):
        rem[0, i] = N
    j = 0
    while True:
        if j < depth:
            col = 0
            for i in range(n_in):
                col += cur[j, i] * pw[i]
            if symmetric and j > 0 and col < idx[j - 1]:
                if not _advance(cur, rem, j, n_in):
                    j -= 1
                    while j >= 0 and not _advance(cur, rem, j, n_in):
                        j -= 1
                    if j < 0:
                        break
                continue
            idx[j] = col
            acc_obj[j + 1] = acc_obj[j] + obj[j, col]
            for c in range(m):
                acc_con[j + 1, c] = acc_con[j, c] + cons[c, j, col]
            for i in range(n_in):
                rem[j + 1, i] = rem[j, i] - cur[j, i]
            j += 1
            for i in range(n_in):
                cur[j, i] = 0
            continue
        # pair scan over the box below rem[j]
        R = 0
        for i in range(n_in):
            R += rem[j, i] * pw[i]
        lo = idx[j - 1] if (symmetric and j > 0) else 0
        for c in range(m):
            lim[c] = bounds[c] - acc_con[j, c]
        base_obj = acc_obj[j]
        oa = obj[j]
        ob = obj[j + 1]
        for i in range(n_in):
            dig[i] = 0
        while True:
            base = 0
            for i in range(1, n_in):
                base += dig[i] * pw[i]
            if symmetric and 2 * base > R:
                break
            if base + rem[j, 0] >= lo:
                start = lo - base if lo > base else 0
                for c0 in range(start, rem[j, 0] + 1):
                    col = base + c0
                    last = R - col
                    if symmetric and last < col:
                        break
                    evaluated += 1
                    ok = True
                    for c in range(m):
                        if cons[c, j, col] + cons[c, j + 1, last] > lim[c]:
                            ok = False
                            break
                    if ok:
                        v = base_obj + oa[col] + ob[last]
                        if (v > best_val) if maximize else (v < best_val):
                            best_val = v
                            for t in range(j):
                                best[t] = idx[t]
                            best[j] = col
                            best[j + 1] = last
            moved = False
            for i in range(1, n_in):
                if dig[i] < rem[j, i]:
                    dig[i] += 1
                    moved = True
                    break
                dig[i] = 0
            if not moved:
                break
        j -= 1
        while j >= 0 and not _advance(cur, rem, j, n_in):
            j -= 1
        if j < 0:
            break
    return best_val, best, evaluated


def _columns_to_channel(best, digits, N, in_alphabet, out_alphabet, **kw) -> Channel:
    W = digits[best].T.astype(float) / N
    return Channel(in_alphabet, out_alphabet, W, **kw)


# --- rate-distortion oracle ----------------------------------------------------

def oracle_rd(p: Pmf, d: DistortionSpec, D: float, cfg: OracleConfig | None = None) -> OracleResult:
    """Exact minimum of I(X; Xhat) over the quantized channels with E d <= D."""
    cfg = cfg or OracleConfig()
    n_in, k = p.size, d.shape[1]
    if d.shape[0] != n_in:
        raise ValidationError("distortion rows do not match the source alphabet")
    count = _check_budget(n_in, k, cfg)
    N = cfg.levels
    digits = _grid_columns(n_in, N)
    C = digits / N                                          # (T, n_in) values W(xhat|x)
    B = C @ p.probs                                         # output probability per column
    info = _xlogx(C) @ p.probs - _xlogx(B)                  # per-column share of I(X;Xhat)
    dist = (C * p.probs) @ d.matrix                         # (T, k): column j cost
    obj = np.ascontiguousarray(np.tile(info, (k, 1)))
    cons = np.ascontiguousarray(dist.T[None])
    val, best, evaluated = _scan(obj, cons, np.array([D + 1e-12]), n_in, k, N, False, False)
    if best[0] < 0:
        raise InfeasibleError(f"no quantized channel reaches distortion {D}")
    ch = _columns_to_channel(best, digits, N, p.alphabet,
                             d.recon_alphabet or Alphabet.range(k), input_name="X",
                             output_name="Xhat")
    delta = min(1.0, (k - 1) * cfg.quantization_step)
    gap = _omega(delta, k) + _omega(delta, k * n_in)
    W = ch.matrix
    distortion = float(p.probs @ (W * d.matrix).sum(axis=1))
    return OracleResult(max(float(val), 0.0), ch, cfg.quantization_step, count, int(evaluated),
                        gap, distortion, rate=max(float(val), 0.0))


# --- privacy oracles ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _PrivacyTables:
    digits: np.ndarray
    equiv: np.ndarray
    rate: np.ndarray
    dist: np.ndarray
    rate_const: float
    n_in: int
    in_alphabet: Alphabet
    n_h: int
    n_z: int
    n_x: int


def _privacy_tables(joint: JointPmf, d: DistortionSpec, N: int, markov: bool) -> _PrivacyTables:
    enc = [a.name for a in joint.axes if a.role is not Role.SIDE]
    side = [a.name for a in joint.axes if a.role is Role.SIDE]
    priv = [a.name for a in joint.axes if a.role.is_private]
    pub = [a.name for a in joint.axes if a.role.is_public]
    if not priv or not pub:
        raise ValidationError("oracle needs at least one private and one public axis")
    size = lambda names: int(np.prod([joint.axis(n).size for n in names])) if names else 1
    n_x, n_z, n_h, n_r = size(enc), size(side), size(priv), size(pub)
    if d.shape[0] != n_r:
        raise ValidationError("distortion rows do not match the public alphabet")
    p_xz = joint.marginal(enc + side).reshape(n_x, n_z)
    shape = [joint.axis(n).size for n in enc]
    dig = np.unravel_index(np.arange(n_x), shape)
    sub = lambda names: np.ravel_multi_index([dig[enc.index(n)] for n in names],
                                             [shape[enc.index(n)] for n in names])
    h_of, r_of = sub(priv), sub(pub)
    n_in = n_r if markov else n_x
    row_of = r_of if markov else np.arange(n_x)
    in_alphabet = Alphabet.product(*(joint.axis(n).alphabet for n in (pub if markov else enc)))
    digits = _grid_columns(n_in, N)
    C = (digits / N)[:, row_of]                             # (T, n_x) values W(u|x)
    PX = C[:, :, None] * p_xz[None]                         # (T, x, z)
    A = np.zeros((C.shape[0], n_h, n_z))
    Rz = np.zeros((C.shape[0], n_r, n_z))
    for x in range(n_x):
        A[:, h_of[x]] += PX[:, x]
        Rz[:, r_of[x]] += PX[:, x]
    Bz = A.sum(axis=1)                                      # P(u, z)
    equiv = _xlogx(Bz).sum(axis=1) - _xlogx(A).sum(axis=(1, 2))
    p_x, p_z = p_xz.sum(axis=1), p_xz.sum(axis=0)
    rate = -_xlogx(Bz).sum(axis=1) + _xlogx(C) @ p_x
    rate_const = float(_xlogx(p_z).sum())                   # -H(Z)
    cost = np.einsum("trz,rk->tkz", Rz, d.matrix)
    dist = cost.min(axis=1).sum(axis=1)
    return _PrivacyTables(digits, equiv, rate, dist, rate_const, n_in, in_alphabet, n_h, n_z, n_x)


def _privacy_scan(tabs, k, N, maximize, obj, cons, bounds):
    obj = np.ascontiguousarray(np.tile(obj, (k, 1)))
    cons = np.ascontiguousarray(np.stack([np.tile(c, (k, 1)) for c in cons]))
    return _scan(obj, cons, np.asarray(bounds, dtype=float), tabs.n_in, k, N, maximize, True)


def _result(tabs, best, val, N, k, cfg, count, evaluated, gap):
    ch = _columns_to_channel(best, tabs.digits, N, tabs.in_alphabet, Alphabet.range(k, "u"),
                             input_name="X", output_name="U")
    rate = float(tabs.rate[best].sum() + tabs.rate_const)
    return OracleResult(float(val), ch, cfg.quantization_step, count, int(evaluated), gap,
                        float(tabs.dist[best].sum()), float(tabs.equiv[best].sum()),
                        max(rate, 0.0))


def _gap_equiv(tabs, k, q):
    delta = min(1.0, (k - 1) * q)
    return _omega(delta, tabs.n_h * k * tabs.n_z) + _omega(delta, k * tabs.n_z)


def _gap_rate(tabs, k, q):
    delta = min(1.0, (k - 1) * q)
    return _omega(delta, k * tabs.n_z) + _omega(delta, k * tabs.n_x)


def oracle_gamma(joint: JointPmf, d: DistortionSpec, D: float, u_card: int,
                 cfg: OracleConfig | None = None, markov: bool = False) -> OracleResult:
    """Quantized maximum of H(X_h | U, Z) subject to decoded distortion <= D."""
    cfg = cfg or OracleConfig()
    N = cfg.levels
    tabs = _privacy_tables(joint, d, N, markov)
    count = _check_budget(tabs.n_in, u_card, cfg)
    val, best, evaluated = _privacy_scan(tabs, u_card, N, True, tabs.equiv, [tabs.dist],
                                         [D + 1e-12])
    if best[0] < 0:
        raise InfeasibleError(f"no quantized channel reaches distortion {D}")
    return _result(tabs, best, max(val, 0.0), N, u_card, cfg, count, evaluated,
                   _gap_equiv(tabs, u_card, cfg.quantization_step))


def oracle_rate(joint: JointPmf, d: DistortionSpec, D: float, E: float, u_card: int,
                cfg: OracleConfig | None = None, markov: bool = False) -> OracleResult:
    """Quantized minimum of I(X;U) - I(Z;U) with distortion <= D, equivocation >= E."""
    cfg = cfg or OracleConfig()
    N = cfg.levels
    tabs = _privacy_tables(joint, d, N, markov)
    count = _check_budget(tabs.n_in, u_card, cfg)
    val, best, evaluated = _privacy_scan(tabs, u_card, N, False, tabs.rate,
                                         [tabs.dist, -tabs.equiv], [D + 1e-12, -E + 1e-12])
    if best[0] < 0:
        raise InfeasibleError(f"no quantized channel meets D={D}, E={E}")
    return _result(tabs, best, max(val + tabs.rate_const, 0.0), N, u_card, cfg, count,
                   evaluated, _gap_rate(tabs, u_card, cfg.quantization_step))
