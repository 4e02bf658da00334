"""Equivocation-distortion frontier Gamma(D) and rate surface R(D, E).

The encoder sees the public and private attributes X = (X_r, X_h) and emits
U through a channel p(u|x); the user decodes Xhat_r = g(U, Z) with side
information Z.  Privacy is H(X_h | U, Z), rate is I(X; U) - I(Z; U).

Without side information the problem is solved over U = Xhat_r with the
identity decoder: collapsing U to g(U) never lowers the equivocation and
never raises the rate, and with the decoder fixed both programs are convex.
With side information the decoder is re-optimized between projected
gradient steps and the search is restarted from several random channels.

Every reported value is the exact metric of the returned channel, i.e. an
achievable (inner) bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InfeasibleError, ValidationError
from .prob import Alphabet, Channel, DistortionSpec, JointPmf, Pmf, Role, plogp_sum

_TINY = 1e-300
_COL_MIN = 1e-9
_FEAS_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    multistarts: int = 32
    inner_tolerance: float = 1e-9
    max_iters: int = 4000
    rng_seed: int = 0
    penalty_weight_schedule: tuple[float, ...] = (10.0, 100.0, 1e3, 1e4, 1e5)

    def __post_init__(self):
        if self.multistarts < 1:
            raise ValidationError("multistarts must be >= 1")
        if not self.inner_tolerance > 0:
            raise ValidationError("inner_tolerance must be positive")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        sched = tuple(float(w) for w in self.penalty_weight_schedule)
        if not sched or any(w <= 0 for w in sched):
            raise ValidationError("penalty_weight_schedule must hold positive weights")
        object.__setattr__(self, "penalty_weight_schedule", sched)


@dataclass(frozen=True, eq=False)
class PrivacyProblem:
    """Source joint over (X_h, X_r, Z), a distortion on X_r and |U|.

    Axes tagged ``both`` count as public and private (census case).  All
    non-side axes feed the encoder; side axes are seen only by the user.
    """

    joint: JointPmf
    distortion: DistortionSpec
    u_cardinality: int | None = None

    def __post_init__(self):
        j = self.joint
        bad = j.names_where(lambda r: r in (Role.AUX, Role.RECON))
        if bad:
            raise ValidationError(f"problem joint may only hold source axes, found {bad}")
        if not self.public_names:
            raise ValidationError("problem needs at least one public axis")
        if not self.private_names:
            raise ValidationError("problem needs at least one private axis")
        n_r = self.n_public
        if self.distortion.shape[0] != n_r:
            raise ValidationError(
                f"distortion has {self.distortion.shape[0]} rows, public alphabet has {n_r}")
        if self.u_cardinality is None:
            object.__setattr__(self, "u_cardinality", n_r * self.n_private + 2)
        if self.u_cardinality < 1:
            raise ValidationError("u_cardinality must be >= 1")

    @classmethod
    def census(cls, p: Pmf, distortion: DistortionSpec | None = None,
               u_cardinality: int | None = None) -> "PrivacyProblem":
        return cls(p.to_joint("X", Role.BOTH), distortion or DistortionSpec.hamming(p.size),
                   u_cardinality)

    @property
    def public_names(self):
        return self.joint.names_where(lambda r: r.is_public)

    @property
    def private_names(self):
        return self.joint.names_where(lambda r: r.is_private)

    @property
    def side_names(self):
        return self.joint.names_where(lambda r: r is Role.SIDE)

    @property
    def encoder_names(self):
        return self.joint.names_where(lambda r: r is not Role.SIDE)

    @property
    def has_side_info(self) -> bool:
        return bool(self.side_names)

    def _size(self, names) -> int:
        return int(np.prod([self.joint.axis(n).size for n in names])) if names else 1

    @property
    def n_public(self) -> int:
        return self._size(self.public_names)

    @property
    def n_private(self) -> int:
        return self._size(self.private_names)

    @property
    def encoder_alphabet(self) -> Alphabet:
        return Alphabet.product(*(self.joint.axis(n).alphabet for n in self.encoder_names))

    @property
    def recon_alphabet(self) -> Alphabet:
        if self.distortion.recon_alphabet is not None:
            return self.distortion.recon_alphabet
        if self.distortion.shape[1] == self.n_public:
            return Alphabet.product(*(self.joint.axis(n).alphabet for n in self.public_names))
        return Alphabet.range(self.distortion.shape[1])

    @cached_property
    def model(self) -> "_Model":
        return _Model.build(self)


@dataclass(frozen=True, eq=False)
class RegionPoint:
    rate: float
    distortion: float
    equivocation: float
    channel: Channel
    decoder: np.ndarray  # (|U|, |Z|) reconstruction indices
    bound_type: str = "achievable"
    target_distortion: float | None = None
    target_equivocation: float | None = None

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "distortion": self.distortion,
            "equivocation": self.equivocation,
            "bound_type": self.bound_type,
            "channel": self.channel.to_dict(),
            "decoder": np.asarray(self.decoder).tolist(),
            "target_distortion": self.target_distortion,
            "target_equivocation": self.target_equivocation,
        }


@dataclass
class RegionCurve:
    boundary: list[RegionPoint] = field(default_factory=list)  # Gamma(D) per D
    points: list[RegionPoint] = field(default_factory=list)    # R(D, E) surface
    errors: list[dict] = field(default_factory=list)


# --- compiled numerics ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Model:
    p_xz: np.ndarray      # (n_x, n_z) encoder input x side info
    p_x: np.ndarray
    p_z: np.ndarray
    h_idx: np.ndarray     # private index of each x
    r_idx: np.ndarray     # public index of each x
    H1: np.ndarray        # (n_x, n_h) one-hot of h_idx
    R1: np.ndarray        # (n_x, n_r) one-hot of r_idx
    dm: np.ndarray        # (n_r, n_xhat)

    @classmethod
    def build(cls, prob: PrivacyProblem) -> "_Model":
        j = prob.joint
        enc, side = list(prob.encoder_names), list(prob.side_names)
        p_xz = j.marginal(enc + side).reshape(prob._size(enc), prob._size(side))
        enc_shape = [j.axis(n).size for n in enc]
        digits = np.unravel_index(np.arange(p_xz.shape[0]), enc_shape)

        def sub_index(names):
            pos = [enc.index(n) for n in names]
            return np.ravel_multi_index([digits[i] for i in pos], [enc_shape[i] for i in pos])

        h_idx = sub_index(prob.private_names)
        r_idx = sub_index(prob.public_names)
        return cls(p_xz, p_xz.sum(1), p_xz.sum(0), h_idx, r_idx,
                   np.eye(prob.n_private)[h_idx], np.eye(prob.n_public)[r_idx],
                   prob.distortion.matrix)

    @property
    def n_x(self):
        return self.p_xz.shape[0]

    @property
    def n_z(self):
        return self.p_xz.shape[1]

    def joints(self, W):
        P = self.p_xz[:, None, :] * W[:, :, None]            # x u z
        P_huz = np.tensordot(self.H1, P, axes=(0, 0))
        P_ruz = np.tensordot(self.R1, P, axes=(0, 0))
        return P_huz, P_ruz, P_huz.sum(axis=0)

    def decoder(self, P_ruz):
        cost = np.tensordot(self.dm, P_ruz, axes=(0, 0))     # xhat u z
        g = np.argmin(cost, axis=0)                          # lowest index on ties
        return g, float(np.take_along_axis(cost, g[None], 0).sum())

    def equivocation(self, P_huz, P_uz):
        return max(plogp_sum(P_huz) - plogp_sum(P_uz), 0.0)

    def rate(self, W, P_uz):
        h_u_given_z = plogp_sum(P_uz) - plogp_sum(self.p_z)
        h_u_given_x = float(self.p_x @ np.array([plogp_sum(row) for row in W]))
        return max(h_u_given_z - h_u_given_x, 0.0)

    def cost_matrix(self, g):
        """c[x, u] = E[d(x_r, g(u, Z)) | x] p(x); distortion is <W, c>."""
        d_xuz = self.dm[self.r_idx][:, g]                    # x u z
        return np.einsum("xz,xuz->xu", self.p_xz, d_xuz)

    def grad_equivocation(self, P_huz, P_uz):
        # Each (u, z) column enters through a degree-1 homogeneous term whose
        # gradient blows up as the column empties; near-empty columns get
        # the gradient of an empty one so they do not swamp the step.
        live = P_uz >= _COL_MIN
        L_cond = np.log2(np.maximum(P_huz, _TINY)) - np.log2(np.maximum(P_uz, _TINY))[None]
        L_cond = np.where(live[None], L_cond, 0.0)
        return -np.einsum("xz,xuz->xu", self.p_xz, L_cond[self.h_idx])

    def grad_rate(self, W, P_uz):
        L_uz = np.log2(np.maximum(P_uz, _TINY))
        return -(self.p_xz @ L_uz.T) + self.p_x[:, None] * np.log2(np.maximum(W, _TINY))

    def evaluate(self, W, g=None):
        """Exact (rate, distortion, equivocation, decoder) of channel W."""
        P_huz, P_ruz, P_uz = self.joints(W)
        if g is None:
            g, dist = self.decoder(P_ruz)
        else:
            dist = float((W * self.cost_matrix(g)).sum())
        return self.rate(W, P_uz), dist, self.equivocation(P_huz, P_uz), g

    def h_private_given(self, with_public: bool) -> float:
        """H(X_h | Z) or H(X_h | X_r, Z)."""
        n_h, n_r = self.H1.shape[1], self.R1.shape[1]
        P = np.zeros((n_h, n_r if with_public else 1, self.n_z))
        cols = self.r_idx if with_public else np.zeros(self.n_x, dtype=int)
        np.add.at(P, (self.h_idx, cols), self.p_xz)
        return max(plogp_sum(P) - plogp_sum(P.sum(axis=0)), 0.0)

    def side_dmax(self) -> tuple[float, np.ndarray]:
        """Best distortion with U constant (decoder uses Z only)."""
        P_rz = self.R1.T @ self.p_xz
        cost = self.dm.T @ P_rz                              # xhat z
        g = np.argmin(cost, axis=0)
        return float(cost[g, np.arange(self.n_z)].sum()), g

    def dmin(self) -> float:
        return float(self.p_x @ self.dm[self.r_idx].min(axis=1))


def project_rows_to_simplex(V: np.ndarray) -> np.ndarray:
    """Euclidean projection of every row onto the probability simplex."""
    n = V.shape[1]
    srt = -np.sort(-V, axis=1)
    css = np.cumsum(srt, axis=1) - 1.0
    k = np.arange(1, n + 1)
    cond = srt - css / k > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(V.shape[0]), rho] / (rho + 1)
    return np.maximum(V - theta[:, None], 0.0)


# --- augmented-Lagrangian projected gradient ------------------------------

class _Search:
    """One constrained search over p(u|x), optionally tied to p(u|x_r).

    mode "gamma": maximize equivocation s.t. distortion <= D.
    mode "rate":  minimize rate s.t. distortion <= D, equivocation >= E.
    """

    def __init__(self, m: _Model, n_u, mode, D, E, cfg, tie=None, fixed_decoder=None):
        self.m, self.n_u, self.mode, self.D, self.E, self.cfg = m, n_u, mode, D, E, cfg
        self.tie = np.arange(m.n_x) if tie is None else tie
        self.n_g = int(self.tie.max()) + 1
        self.G1 = np.eye(self.n_g)[self.tie]
        self.fixed = fixed_decoder
        self.shift = np.zeros(2)  # internal tightening of (D, E), see polish

    def expand(self, V):
        return V[self.tie]

    def _terms(self, V, g, lam, mu, need_grad=True):
        m = self.m
        W = V[self.tie]
        P_huz, P_ruz, P_uz = m.joints(W)
        c = m.cost_matrix(g)
        dist = float((W * c).sum())
        eq = m.equivocation(P_huz, P_uz)
        if self.mode == "gamma":
            f = -eq
            cons = [dist - self.D + self.shift[0]]
        else:
            f = m.rate(W, P_uz)
            cons = [dist - self.D + self.shift[0], self.E + self.shift[1] - eq]
        L = f
        mult = []
        for gi, li in zip(cons, lam):
            t = max(0.0, li + mu * gi)
            L += (t * t - li * li) / (2 * mu)
            mult.append(t)
        if not need_grad:
            return L, None, cons
        g_eq = m.grad_equivocation(P_huz, P_uz)
        if self.mode == "gamma":
            grad = -g_eq + mult[0] * c
        else:
            grad = m.grad_rate(W, P_uz) + mult[0] * c - mult[1] * g_eq
        return L, self.G1.T @ grad, cons

    def decoder_for(self, V):
        if self.fixed is not None:
            return self.fixed
        _, P_ruz, _ = self.m.joints(V[self.tie])
        return self.m.decoder(P_ruz)[0]

    def minimize(self, V, lam, mu):
        """Spectral projected gradient with a nonmonotone Armijo search."""
        tol = self.cfg.inner_tolerance
        g = self.decoder_for(V)
        L, grad, _ = self._terms(V, g, lam, mu)
        alpha = 1.0
        hist = [L]
        for _ in range(self.cfg.max_iters):
            if np.abs(project_rows_to_simplex(V - grad) - V).max() < tol:
                break
            d = project_rows_to_simplex(V - alpha * grad) - V
            slope = float((grad * d).sum())
            if slope >= 0:
                break
            L_ref = max(hist[-10:])
            t = 1.0
            while True:
                Vn = V + t * d
                Ln, grad_n, _ = self._terms(Vn, g, lam, mu)
                if Ln <= L_ref + 1e-4 * t * slope:
                    break
                t *= 0.5
                if t < 1e-12:
                    return V
            s, y = Vn - V, grad_n - grad
            sy = float((s * y).sum())
            alpha = min(max(float((s * s).sum()) / sy, 1e-10), 1e10) if sy > 0 else 1e10
            V, L, grad = Vn, Ln, grad_n
            g_new = self.decoder_for(V)
            if g_new is not g and not np.array_equal(g_new, g):
                g = g_new
                L, grad, _ = self._terms(V, g, lam, mu)
                hist = [L]
            else:
                hist.append(L)
        return V

    def run(self, V, schedule=None):
        lam = np.zeros(1 if self.mode == "gamma" else 2)
        for mu in schedule or self.cfg.penalty_weight_schedule:
            V = self.minimize(V, lam, mu)
            cons = self._terms(V, self.decoder_for(V), lam, mu, need_grad=False)[2]
            lam = np.maximum(0.0, lam + mu * np.asarray(cons))
        return V

    def polish(self, V, rounds=6):
        """Re-solve with targets tightened by the residual violation.

        Mixing toward a feasible channel cannot undo a small violation when
        that channel is itself tight, because decoded distortion is concave.
        """
        sched = self.cfg.penalty_weight_schedule[-2:]
        for _ in range(rounds):
            met = self.metrics(V)
            if self.feasible(met):
                break
            self.shift += 2.0 * np.array([max(0.0, met[1] - self.D),
                                          max(0.0, self.E - met[2]) if self.mode == "rate" else 0.0])
            V = self.run(V, sched)
        self.shift[:] = 0.0
        return V

    def metrics(self, V):
        return self.m.evaluate(V[self.tie], self.fixed)

    def feasible(self, met) -> bool:
        _, dist, eq, _ = met
        ok = dist <= self.D + _FEAS_TOL
        if self.mode == "rate":
            ok = ok and eq >= self.E - _FEAS_TOL
        return ok

    def repair_gamma(self, V):
        """Mix toward the lowest-distortion channel for the current decoder."""
        met = self.metrics(V)
        if met[1] <= self.D:
            return V
        g = met[3]
        c = self.G1.T @ self.m.cost_matrix(g)
        V_min = np.eye(self.n_u)[np.argmin(c, axis=1)]
        d_min = float((self.expand(V_min) * self.m.cost_matrix(g)).sum())
        if d_min >= met[1] or d_min > self.D:
            return None
        t = (met[1] - self.D) / (met[1] - d_min)
        for _ in range(60):
            Vt = (1 - t) * V + t * V_min
            if self.metrics(Vt)[1] <= self.D:
                return Vt
            t = min(1.0, t * (1 + 1e-9) + 1e-15)
        return None

    def repair_toward(self, V, V_ref):
        """Smallest mix toward a feasible reference that is feasible."""
        if self.feasible(self.metrics(V)):
            return V
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self.feasible(self.metrics((1 - mid) * V + mid * V_ref)):
                hi = mid
            else:
                lo = mid
        return (1 - hi) * V + hi * V_ref


def _start(rng, n_g, n_u):
    return rng.dirichlet(np.ones(n_u), size=n_g)


def _to_point(prob, search, V, D, E) -> RegionPoint:
    W = search.expand(V)
    rate, dist, eq, g = search.metrics(V)
    n_u = W.shape[1]
    out = prob.recon_alphabet if search.fixed is not None else Alphabet.range(n_u, "u")
    ch = Channel(prob.encoder_alphabet, out, W / W.sum(axis=1, keepdims=True),
                 input_name="X", output_name="U")
    return RegionPoint(rate, dist, eq, ch, np.asarray(g), target_distortion=D,
                       target_equivocation=E)


def _constant_point(prob, D, E) -> RegionPoint:
    m = prob.model
    dist, gz = m.side_dmax()
    W = np.ones((m.n_x, 1))
    ch = Channel(prob.encoder_alphabet, Alphabet(("u0",)), W, input_name="X", output_name="U")
    return RegionPoint(0.0, dist, m.h_private_given(False), ch, gz[None, :],
                       target_distortion=D, target_equivocation=E)


def _check_D(prob, D):
    if not D >= 0:
        raise InfeasibleError(f"distortion target must be >= 0, got {D}")
    lo = prob.model.dmin()
    if D < lo - _FEAS_TOL:
        raise InfeasibleError(f"D={D} is below the minimum achievable distortion {lo}",
                              estimate=lo)


def _search_for(prob, mode, D, E, cfg, markov):
    m = prob.model
    tie = m.r_idx if markov else None
    if prob.has_side_info:
        return _Search(m, prob.u_cardinality, mode, D, E, cfg, tie)
    n_xhat = prob.distortion.shape[1]
    fixed = np.arange(n_xhat)[:, None]
    return _Search(m, n_xhat, mode, D, E, cfg, tie, fixed_decoder=fixed)


def _n_starts(prob, cfg):
    # the side-info-free programs are convex; one start reaches the optimum
    return cfg.multistarts if prob.has_side_info else 1


def _gamma(prob, D, cfg, markov, inits=()):
    cfg = cfg or SolverConfig()
    _check_D(prob, D)
    m = prob.model
    if D >= m.side_dmax()[0] - _FEAS_TOL:
        return _constant_point(prob, D, None), None
    search = _search_for(prob, "gamma", D, None, cfg, markov)
    candidates = []
    for k in range(_n_starts(prob, cfg)):
        rng = np.random.default_rng(cfg.rng_seed + k)
        V = search.repair_gamma(search.run(_start(rng, search.n_g, search.n_u)))
        if V is not None:
            candidates.append(V)
    candidates += [V for V in inits if V.shape == (search.n_g, search.n_u)]
    best, best_eq = None, -np.inf
    for V in candidates:
        met = search.metrics(V)
        if met[1] <= D + _FEAS_TOL and met[2] > best_eq:
            best, best_eq = V, met[2]
    if best is None:
        raise InfeasibleError(f"no feasible channel found for D={D}")
    return _to_point(prob, search, best, D, None), best


def gamma_of_D(prob: PrivacyProblem, D: float, cfg: SolverConfig | None = None) -> RegionPoint:
    """Largest equivocation H(X_h|U,Z) over channels whose decoded distortion is <= D."""
    return _gamma(prob, D, cfg, markov=False)[0]


def _rate(prob, D, E, cfg, markov, inits=()):
    cfg = cfg or SolverConfig()
    _check_D(prob, D)
    m = prob.model
    lo_E, hi_E = m.h_private_given(True), m.h_private_given(False)
    if E > hi_E + _FEAS_TOL:
        raise InfeasibleError(f"E={E} exceeds H(X_h|Z)={hi_E}", estimate=hi_E)
    if D >= m.side_dmax()[0] - _FEAS_TOL:
        return _constant_point(prob, D, E), None
    gpt, V_ref = _gamma(prob, D, cfg, markov)
    if E > gpt.equivocation + _FEAS_TOL:
        raise InfeasibleError(
            f"(D={D}, E={E}) infeasible: Gamma(D) estimate is {gpt.equivocation}",
            estimate=gpt.equivocation)
    # optimal rates are flat for E below the H(X_h|X_r,Z) window
    E_eff = min(max(E, lo_E), gpt.equivocation)
    search = _search_for(prob, "rate", D, E_eff, cfg, markov)
    # Cold starts collapse onto the zero-rate constant channel: once all
    # columns share a decoder the distortion gradient is flat across U.
    # Start instead from the feasible Gamma channel and perturbations of it,
    # with the soft early weights dropped so the iterate stays near feasible.
    sched = cfg.penalty_weight_schedule
    warm = tuple(w for w in sched if w >= 100.0) or sched[-1:]
    candidates = [V_ref]
    for k in range(_n_starts(prob, cfg)):
        rng = np.random.default_rng(cfg.rng_seed + k)
        V0 = V_ref if k == 0 else 0.7 * V_ref + 0.3 * _start(rng, search.n_g, search.n_u)
        V = search.polish(search.run(V0, warm))
        candidates.append(search.repair_toward(V, V_ref))
    candidates += [V for V in inits if V.shape == V_ref.shape]
    best, best_rate = None, np.inf
    for V in candidates:
        met = search.metrics(V)
        if search.feasible(met) and met[0] < best_rate:
            best, best_rate = V, met[0]
    return _to_point(prob, search, best, D, E), best


def r_of_DE(prob: PrivacyProblem, D: float, E: float,
            cfg: SolverConfig | None = None) -> RegionPoint:
    """Smallest rate I(X;U) - I(Z;U) with distortion <= D and equivocation >= E."""
    return _rate(prob, D, E, cfg, markov=False)[0]


def markov_restricted_solver(prob: PrivacyProblem, D: float, E: float,
                             cfg: SolverConfig | None = None) -> RegionPoint:
    """``r_of_DE`` with the encoder restricted to p(u|x_r), i.e. X_h - X_r - U."""
    return _rate(prob, D, E, cfg, markov=True)[0]


def markov_gamma_of_D(prob: PrivacyProblem, D: float, cfg: SolverConfig | None = None) -> RegionPoint:
    return _gamma(prob, D, cfg, markov=True)[0]


# --- channel-level evaluation ---------------------------------------------

def _channel_W(prob: PrivacyProblem, c: Channel) -> np.ndarray:
    m = prob.model
    if c.input_alphabet.size != m.n_x:
        raise ValidationError(
            f"channel input size {c.input_alphabet.size} does not match the encoder "
            f"alphabet size {m.n_x} (axes {prob.encoder_names})")
    return np.asarray(c.matrix)


def equivocation(prob: PrivacyProblem, c: Channel) -> float:
    """H(X_h | U, Z) in bits for the channel p(u | x_r, x_h)."""
    m = prob.model
    P_huz, _, P_uz = m.joints(_channel_W(prob, c))
    return m.equivocation(P_huz, P_uz)


def rate_objective(prob: PrivacyProblem, c: Channel) -> float:
    """I(X_h X_r; U) - I(Z; U) in bits."""
    m = prob.model
    W = _channel_W(prob, c)
    return m.rate(W, m.joints(W)[2])


def optimal_decoder(prob: PrivacyProblem, c: Channel) -> np.ndarray:
    """argmin_xhat E[d(X_r, xhat) | u, z] as a (|U|, |Z|) index array.

    Ties and zero-probability (u, z) pairs resolve to the lowest index, so
    an unreachable pair decodes to reconstruction 0.
    """
    m = prob.model
    return m.decoder(m.joints(_channel_W(prob, c))[1])[0]


def decoded_distortion(prob: PrivacyProblem, c: Channel) -> float:
    m = prob.model
    return m.decoder(m.joints(_channel_W(prob, c))[1])[1]


def feasibility_window(prob: PrivacyProblem) -> tuple[float, float]:
    """(H(X_h | X_r, Z), H(X_h | Z))."""
    m = prob.model
    return m.h_private_given(True), m.h_private_given(False)


# --- grids ------------------------------------------------------------------

def _check_sorted(grid, name):
    grid = [float(x) for x in grid]
    if grid != sorted(grid):
        raise ValidationError(f"{name} must be sorted")
    return grid


def gamma_curve(prob: PrivacyProblem, D_grid: Sequence[float],
                cfg: SolverConfig | None = None, markov: bool = False) -> RegionCurve:
    """Gamma(D) along an increasing grid, warm-started so it is non-decreasing."""
    out = RegionCurve()
    prev = ()
    for D in _check_sorted(D_grid, "D_grid"):
        try:
            pt, V = _gamma(prob, D, cfg, markov, prev)
        except (InfeasibleError, ValidationError) as exc:
            out.errors.append({"D": D, "error": str(exc)})
            continue
        out.boundary.append(pt)
        prev = (V,) if isinstance(V, np.ndarray) else ()
    return out


def region_curve(prob: PrivacyProblem, D_grid: Sequence[float], E_grid: Sequence[float],
                 cfg: SolverConfig | None = None, markov: bool = False) -> RegionCurve:
    """Gamma(D) boundary plus R(D, E) for every grid E up to Gamma(D).

    Points are visited with D ascending and E descending; each solve is
    offered its neighbours' channels (feasible there by monotonicity of the
    constraint sets), which keeps the reported surface monotone.
    """
    D_grid = _check_sorted(D_grid, "D_grid")
    E_grid = _check_sorted(E_grid, "E_grid")
    out = gamma_curve(prob, D_grid, cfg, markov)
    gammas = {pt.target_distortion: pt for pt in out.boundary}
    prev_col: dict[float, np.ndarray] = {}
    for D in D_grid:
        if D not in gammas:
            continue
        col: dict[float, np.ndarray] = {}
        above = None
        for E in reversed(E_grid):
            if E > gammas[D].equivocation + _FEAS_TOL:
                continue
            inits = tuple(V for V in (prev_col.get(E), above) if isinstance(V, np.ndarray))
            try:
                pt, V = _rate(prob, D, E, cfg, markov, inits)
            except (InfeasibleError, ValidationError) as exc:
                out.errors.append({"D": D, "E": E, "error": str(exc)})
                continue
            out.points.append(pt)
            if V is not None:
                col[E], above = V, V
        prev_col = col
    out.points.sort(key=lambda pt: (pt.target_distortion, pt.target_equivocation))
    return out
