"""Finite-alphabet probability primitives.

Distributions, channels and distortion matrices are immutable containers
around dense float64 arrays.  All information measures are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import product as _iproduct
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

NORM_TOL = 1e-12


class Role(str, Enum):
    PRIVATE = "private"
    PUBLIC = "public"
    BOTH = "both"  # census-style attribute: revealed and protected at once
    SIDE = "side-info"
    AUX = "auxiliary"
    RECON = "reconstruction"

    @property
    def is_public(self) -> bool:
        return self in (Role.PUBLIC, Role.BOTH)

    @property
    def is_private(self) -> bool:
        return self in (Role.PRIVATE, Role.BOTH)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_probs(probs: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(probs)):
        raise ValidationError(f"{what}: non-finite probability")
    if np.any(probs < 0):
        raise ValidationError(f"{what}: negative probability {probs.min()!r}")
    total = probs.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValidationError(f"{what}: probabilities sum to {total!r}, not 1")


@dataclass(frozen=True)
class Alphabet:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if not labels:
            raise ValidationError("alphabet must have at least one symbol")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"alphabet labels not distinct: {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise ValidationError(f"symbol {label!r} not in alphabet") from None

    @classmethod
    def range(cls, n: int, prefix: str = "") -> "Alphabet":
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    @classmethod
    def product(cls, *alphabets: "Alphabet") -> "Alphabet":
        """Row-major product alphabet; labels joined with ``|``."""
        if len(alphabets) == 1:
            return alphabets[0]
        return cls(tuple("|".join(t) for t in _iproduct(*(a.labels for a in alphabets))))


@dataclass(frozen=True)
class Axis:
    name: str
    alphabet: Alphabet
    role: Role = Role.PUBLIC

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))

    @property
    def size(self) -> int:
        return self.alphabet.size

    def to_dict(self) -> dict:
        return {"name": self.name, "role": self.role.value, "labels": list(self.alphabet.labels)}

    @classmethod
    def from_dict(cls, d: dict) -> "Axis":
        try:
            return cls(d["name"], Alphabet(tuple(d["labels"])), Role(d.get("role", "public")))
        except KeyError as exc:
            raise ValidationError(f"axis entry missing field {exc}") from None
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(str(exc)) from None


@dataclass(frozen=True, eq=False)
class Pmf:
    alphabet: Alphabet
    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size != self.alphabet.size:
            raise ValidationError(
                f"pmf has {probs.size} entries for an alphabet of size {self.alphabet.size}")
        _check_probs(probs, "pmf")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_probs(cls, probs: Sequence[float], labels: Sequence[str] | None = None,
                   normalize: bool = False) -> "Pmf":
        probs = np.asarray(probs, dtype=float)
        if normalize:
            probs = probs / probs.sum()
        alphabet = Alphabet(tuple(labels)) if labels is not None else Alphabet.range(len(probs))
        return cls(alphabet, probs)

    @classmethod
    def uniform(cls, n: int) -> "Pmf":
        return cls(Alphabet.range(n), np.full(n, 1.0 / n))

    @property
    def size(self) -> int:
        return self.alphabet.size

    def to_joint(self, name: str = "X", role: Role = Role.BOTH) -> "JointPmf":
        return JointPmf((Axis(name, self.alphabet, role),), self.probs)


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Dense joint distribution; one tensor dimension per axis."""

    axes: tuple[Axis, ...]
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise ValidationError("joint pmf needs at least one axis")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate axis names: {names}")
        shape = tuple(a.size for a in axes)
        probs = np.asarray(self.probs, dtype=float)
        if probs.size != int(np.prod(shape)):
            raise ValidationError(f"probs has {probs.size} entries, axes need {shape}")
        probs = _frozen(probs.reshape(shape))
        _check_probs(probs, "joint pmf")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", probs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probs.shape

    def axis(self, name: str) -> Axis:
        return self.axes[self.axis_index(name)]

    def axis_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"no axis named {name!r}; have {self.names}") from None

    def names_where(self, pred) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes if pred(a.role))

    def marginal(self, names: Iterable[str]) -> np.ndarray:
        """Marginal tensor over ``names``, dimensions in the order given."""
        names = list(_as_names(names))
        idx = [self.axis_index(n) for n in names]
        if len(set(idx)) != len(idx):
            raise ValidationError(f"repeated axis in {names}")
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        m = self.probs.sum(axis=drop) if drop else self.probs
        kept = [i for i in range(len(self.axes)) if i in idx]
        return np.transpose(m, [kept.index(i) for i in idx])

    def marginal_pmf(self, names: Iterable[str]) -> "JointPmf":
        names = list(_as_names(names))
        return JointPmf(tuple(self.axis(n) for n in names), self.marginal(names))

    def with_roles(self, roles: dict) -> "JointPmf":
        axes = tuple(Axis(a.name, a.alphabet, roles.get(a.name, a.role)) for a in self.axes)
        return JointPmf(axes, self.probs)

    def to_dict(self) -> dict:
        return {"kind": "joint", "axes": [a.to_dict() for a in self.axes],
                "probs": self.probs.ravel().tolist()}

    @classmethod
    def from_dict(cls, d: dict, normalize: bool = False) -> "JointPmf":
        if "axes" not in d or "probs" not in d:
            raise ValidationError("joint pmf JSON needs 'axes' and 'probs'")
        axes = tuple(Axis.from_dict(a) for a in d["axes"])
        probs = np.asarray(d["probs"], dtype=float)
        if normalize and probs.sum() > 0:
            probs = probs / probs.sum()
        return cls(axes, probs)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix: rows index inputs, columns outputs."""

    input_alphabet: Alphabet
    output_alphabet: Alphabet
    matrix: np.ndarray
    input_name: str = "X"
    output_name: str = "U"

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (self.input_alphabet.size, self.output_alphabet.size):
            raise ValidationError(
                f"channel matrix shape {m.shape} does not match alphabets "
                f"({self.input_alphabet.size}, {self.output_alphabet.size})")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValidationError("channel has negative or non-finite entries")
        bad = np.abs(m.sum(axis=1) - 1.0) > NORM_TOL
        if np.any(bad):
            raise ValidationError(f"channel rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix, input_alphabet: Alphabet | None = None,
                    output_alphabet: Alphabet | None = None, **kw) -> "Channel":
        m = np.asarray(matrix, dtype=float)
        return cls(input_alphabet or Alphabet.range(m.shape[0]),
                   output_alphabet or Alphabet.range(m.shape[1]), m, **kw)

    @classmethod
    def identity(cls, alphabet: Alphabet, **kw) -> "Channel":
        return cls(alphabet, alphabet, np.eye(alphabet.size), **kw)

    @classmethod
    def constant(cls, input_alphabet: Alphabet, q, output_alphabet: Alphabet | None = None,
                 **kw) -> "Channel":
        q = np.asarray(q, dtype=float)
        out = output_alphabet or Alphabet.range(q.size)
        return cls(input_alphabet, out, np.tile(q, (input_alphabet.size, 1)), **kw)

    @classmethod
    def bsc(cls, crossover: float, **kw) -> "Channel":
        e = float(crossover)
        return cls.from_matrix([[1 - e, e], [e, 1 - e]], **kw)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def to_dict(self) -> dict:
        return {
            "kind": "channel",
            "axes": [Axis(self.input_name, self.input_alphabet, Role.PUBLIC).to_dict(),
                     Axis(self.output_name, self.output_alphabet, Role.AUX).to_dict()],
            "probs": self.matrix.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Channel":
        if len(d.get("axes", ())) != 2 or "probs" not in d:
            raise ValidationError("channel JSON needs two axes and 'probs'")
        a_in, a_out = (Axis.from_dict(a) for a in d["axes"])
        m = np.asarray(d["probs"], dtype=float)
        if m.size != a_in.size * a_out.size:
            raise ValidationError("channel 'probs' length does not match axes")
        return cls(a_in.alphabet, a_out.alphabet, m.reshape(a_in.size, a_out.size),
                   input_name=a_in.name, output_name=a_out.name)


@dataclass(frozen=True, eq=False)
class DistortionSpec:
    """Per-symbol cost g(x_r, xhat_r); rows public symbols, columns reconstructions."""

    matrix: np.ndarray
    name: str = "custom"
    recon_alphabet: Alphabet | None = field(default=None)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2:
            raise ValidationError("distortion matrix must be 2-D")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValidationError("distortion entries must be finite and non-negative")
        if self.recon_alphabet is not None and self.recon_alphabet.size != m.shape[1]:
            raise ValidationError("reconstruction alphabet size does not match matrix")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def hamming(cls, n: int | Alphabet) -> "DistortionSpec":
        alphabet = n if isinstance(n, Alphabet) else None
        size = n.size if alphabet else int(n)
        return cls(1.0 - np.eye(size), "hamming", alphabet)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def to_dict(self) -> dict:
        return {"name": self.name, "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DistortionSpec":
        if "matrix" not in d:
            raise ValidationError("distortion JSON needs 'matrix'")
        return cls(np.asarray(d["matrix"], dtype=float), d.get("name", "custom"))


# --- information measures -------------------------------------------------

def _as_names(names) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    return tuple(names)


def plogp_sum(p: np.ndarray) -> float:
    """-sum p log2 p with 0 log 0 = 0, on an already validated array."""
    p = np.asarray(p, dtype=float).ravel()
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def entropy(p) -> float:
    """Shannon entropy in bits of a Pmf, JointPmf (joint entropy) or raw vector."""
    if isinstance(p, (Pmf, JointPmf)):
        probs = p.probs
    else:
        probs = np.asarray(p, dtype=float)
        _check_probs(probs, "entropy argument")
    return max(plogp_sum(probs), 0.0)


def _disjoint(a, b) -> tuple[tuple[str, ...], tuple[str, ...]]:
    a, b = _as_names(a), _as_names(b)
    if not a:
        raise ValidationError("empty axis set")
    overlap = set(a) & set(b)
    if overlap:
        raise ValidationError(f"axis sets overlap on {sorted(overlap)}")
    return a, b


def conditional_entropy(j: JointPmf, target, given=()) -> float:
    """H(target | given) in bits."""
    target, given = _disjoint(target, given)
    h = plogp_sum(j.marginal(target + given))
    if given:
        h -= plogp_sum(j.marginal(given))
    return max(h, 0.0)


def mutual_information(j: JointPmf, a, b) -> float:
    """I(a; b) in bits, clamped at zero against round-off."""
    a, b = _disjoint(a, b)
    if not b:
        raise ValidationError("empty axis set")
    val = plogp_sum(j.marginal(a)) + plogp_sum(j.marginal(b)) - plogp_sum(j.marginal(a + b))
    return max(val, 0.0)


def kl_divergence(p, q) -> float:
    """D(p || q) in bits; +inf when p puts mass where q has none."""
    p = np.asarray(getattr(p, "probs", p), dtype=float).ravel()
    q = np.asarray(getattr(q, "probs", q), dtype=float).ravel()
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float((p[mask] * np.log2(p[mask] / q[mask])).sum())


def push_forward(p, c: Channel, input_axes=None, output_name: str | None = None,
                 output_role: Role = Role.AUX) -> JointPmf:
    """Joint of ``p`` and the channel output, p(x) c(u|x).

    ``input_axes`` names the axes of ``p`` that feed the channel (their
    row-major product must match the channel input size); defaults to all
    axes.  The output axis is appended after the existing ones.
    """
    if isinstance(p, Pmf):
        p = p.to_joint(c.input_name, Role.BOTH)
    in_names = _as_names(input_axes) if input_axes is not None else p.names
    in_idx = [p.axis_index(n) for n in in_names]
    rest = [i for i in range(len(p.axes)) if i not in in_idx]
    n_in = int(np.prod([p.axes[i].size for i in in_idx]))
    if n_in != c.input_alphabet.size:
        raise ValidationError(
            f"channel input size {c.input_alphabet.size} does not match axes "
            f"{list(in_names)} of total size {n_in}")
    name = output_name or c.output_name
    if name in p.names:
        raise ValidationError(f"output axis name {name!r} already used")
    perm = in_idx + rest
    flat = np.transpose(p.probs, perm).reshape(n_in, -1)
    out = flat[:, :, None] * c.matrix[:, None, :]
    out = out.reshape([p.axes[i].size for i in perm] + [c.output_alphabet.size])
    inv = np.argsort(perm).tolist()
    out = np.transpose(out, inv + [len(perm)])
    axes = p.axes + (Axis(name, c.output_alphabet, output_role),)
    return JointPmf(axes, out)


def expected_distortion(j: JointPmf, d: DistortionSpec, public=None, recon=None) -> float:
    """E[g(X_r, Xhat_r)] over the (public, reconstruction) marginal of ``j``."""
    public = _as_names(public) if public is not None else j.names_where(lambda r: r.is_public)
    if recon is None:
        recon = j.names_where(lambda r: r is Role.RECON)
        if len(recon) != 1:
            raise ValidationError("joint must have exactly one reconstruction axis")
    recon = _as_names(recon)
    if not public:
        raise ValidationError("joint has no public axes")
    m = j.marginal(public + recon)
    n_r = int(np.prod(m.shape[:len(public)]))
    m = m.reshape(n_r, -1)
    if m.shape != d.shape:
        raise ValidationError(f"distortion matrix {d.shape} does not match joint {m.shape}")
    return float((m * d.matrix).sum())
