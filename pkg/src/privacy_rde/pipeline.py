"""Tables of categorical records, memoryless sanitization and file I/O.

Sanitization applies a channel independently to every record. That realizes
the single-letter operating point in expectation; it is not a block code.
Equivocation on data is the plug-in estimate from empirical frequencies,
which is biased low by roughly O(alphabet size / n).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import PrivacyRDEError, ValidationError
from .prob import (Alphabet, Axis, Channel, DistortionSpec, JointPmf, Pmf, Role,
                   conditional_entropy)

SIG_DIGITS = 12
TABLE_ROLES = (Role.PUBLIC, Role.PRIVATE, Role.BOTH, Role.SIDE)


# --- tables ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Table:
    schema: tuple[Axis, ...]
    rows: np.ndarray                   # (n, n_columns) symbol indices

    def __post_init__(self):
        schema = tuple(self.schema)
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != len(schema):
            raise ValidationError(f"rows must have shape (n, {len(schema)})")
        if rows.shape[0] < 1:
            raise ValidationError("table has no data rows")
        sizes = np.array([a.size for a in schema])
        if np.any(rows < 0) or np.any(rows >= sizes):
            raise ValidationError("table cell outside its attribute alphabet")
        rows.setflags(write=False)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema)

    def axis(self, name: str) -> Axis:
        return self.schema[self.names.index(name)]

    def names_where(self, pred) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema if pred(a.role))

    def codes(self, names: Sequence[str]) -> np.ndarray:
        """Row-major product index of the named columns (0 if none)."""
        names = list(names)
        if not names:
            return np.zeros(self.n, dtype=np.int64)
        missing = [n for n in names if n not in self.names]
        if missing:
            raise ValidationError(f"unknown columns {missing}")
        cols = [self.rows[:, self.names.index(n)] for n in names]
        return np.ravel_multi_index(cols, [self.axis(n).size for n in names])

    def alphabet_of(self, names: Sequence[str]) -> Alphabet:
        return Alphabet.product(*(self.axis(n).alphabet for n in names))

    def labels(self) -> list[list[str]]:
        return [[a.alphabet.labels[v] for a, v in zip(self.schema, row)] for row in self.rows]


def load_schema(path) -> tuple[Axis, ...]:
    """Schema JSON: ``{"columns": [{"name", "labels", "role"}, ...]}`` or a bare list."""
    data = read_json(path)
    cols = data.get("columns", data.get("axes")) if isinstance(data, dict) else data
    if not isinstance(cols, list) or not cols:
        raise ValidationError(f"{path}: schema needs a non-empty 'columns' list")
    axes = tuple(Axis.from_dict(c) for c in cols)
    for a in axes:
        if a.role not in TABLE_ROLES:
            raise ValidationError(f"{path}: column {a.name!r} has role {a.role.value!r}; "
                                  f"tables accept {[r.value for r in TABLE_ROLES]}")
    return axes


def ingest_csv(path, schema: Sequence[Axis]) -> Table:
    """Read a header-first CSV and map every cell to its alphabet index.

    Columns are reordered to the schema order. Row numbers in error
    messages count data rows from 1.
    """
    schema = tuple(schema)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"{path}: file is empty")
        header = [h.strip() for h in header]
        want = [a.name for a in schema]
        if sorted(header) != sorted(want) or len(set(header)) != len(header):
            raise ValidationError(f"{path}: header {header} does not match schema columns {want}")
        pos = [header.index(n) for n in want]
        lookup = [{lab: i for i, lab in enumerate(a.alphabet.labels)} for a in schema]
        out = []
        for r, rec in enumerate(reader, start=1):
            if not rec:
                continue
            if len(rec) != len(header):
                raise ValidationError(
                    f"{path}: row {r} has {len(rec)} fields, expected {len(header)}")
            codes = []
            for a, p, lk in zip(schema, pos, lookup):
                v = rec[p].strip()
                if v not in lk:
                    raise ValidationError(
                        f"{path}: row {r}, column {a.name!r}: value {v!r} not in alphabet")
                codes.append(lk[v])
            out.append(codes)
    if not out:
        raise ValidationError(f"{path}: no data rows")
    return Table(schema, np.array(out, dtype=np.int64))


def write_table_csv(t: Table, path) -> None:
    _write_csv(path, t.names, t.labels(), format_cells=False)


def empirical_joint(t: Table) -> JointPmf:
    """Relative frequencies of the full records, as counts / n."""
    shape = [a.size for a in t.schema]
    counts = np.bincount(np.ravel_multi_index(t.rows.T, shape), minlength=math.prod(shape))
    return JointPmf(t.schema, counts.reshape(shape) / t.n)


def quantile_bins(values: Sequence[float], n_bins: int, prefix: str = "q"):
    """Bin numeric values into ``n_bins`` quantile classes.

    Returns ``(alphabet, labels, edges)`` where ``labels[i]`` is the class
    label of ``values[i]``.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0 or n_bins < 1:
        raise ValidationError("need at least one value and one bin")
    edges = np.quantile(v, np.linspace(0, 1, n_bins + 1))
    idx = np.clip(np.searchsorted(edges[1:-1], v, side="right"), 0, n_bins - 1)
    alphabet = Alphabet.range(n_bins, prefix)
    return alphabet, [alphabet.labels[i] for i in idx], edges


# --- sanitization ---------------------------------------------------------

def row_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniform draws for rows ``start..stop-1``; draw i depends only on (seed, i).

    Any contiguous block can be produced independently by advancing the
    PCG64 stream, so chunked or parallel runs give identical output.
    """
    bg = np.random.PCG64(seed)
    bg.advance(start)
    return np.random.Generator(bg).random(stop - start)


def _split_output(c: Channel, t: Table, public: Sequence[str]):
    """Output columns: the public attributes when the channel output is their product."""
    if public and c.output_alphabet.size == math.prod(t.axis(n).size for n in public):
        prod = t.alphabet_of(public)
        if c.output_alphabet.labels == prod.labels or len(public) == 1:
            if len(public) == 1:
                return [Axis(public[0], c.output_alphabet, Role.RECON)]
            return [Axis(n, t.axis(n).alphabet, Role.RECON) for n in public]
    return [Axis(c.output_name, c.output_alphabet, Role.RECON)]


def sanitize(t: Table, c: Channel, seed: int = 0, decoder=None) -> Table:
    """Draw one channel output per record.

    The channel input is the product of the non-side-information columns
    in schema order. With ``decoder`` (indexed ``[u, z]``) the channel
    output is treated as U and mapped to a reconstruction using the
    side-information columns.
    """
    enc = t.names_where(lambda r: r is not Role.SIDE)
    side = t.names_where(lambda r: r is Role.SIDE)
    n_in = math.prod(t.axis(n).size for n in enc)
    if c.input_alphabet.size != n_in:
        raise ValidationError(
            f"channel input size {c.input_alphabet.size} does not match the encoder "
            f"columns {list(enc)} (size {n_in})")
    x = t.codes(enc)
    cdf = np.cumsum(c.matrix, axis=1)
    u = row_uniforms(int(seed), 0, t.n)
    out = np.minimum((cdf[x] <= u[:, None]).sum(axis=1), c.shape[1] - 1)
    public = t.names_where(lambda r: r.is_public)
    if decoder is None:
        axes = _split_output(c, t, public)
    else:
        g = np.asarray(decoder, dtype=np.int64)
        if g.shape[0] != c.shape[1]:
            raise ValidationError("decoder rows must match the channel output size")
        out = g[out, t.codes(side)]
        prod = t.alphabet_of(public)
        if g.max() >= prod.size:
            raise ValidationError("decoder outputs exceed the public alphabet")
        axes = (_split_output(Channel.identity(prod, output_name="Xhat"), t, public))
    if len(axes) == 1:
        rows = out[:, None]
    else:
        rows = np.stack(np.unravel_index(out, [a.size for a in axes]), axis=1)
    return Table(tuple(axes), rows)


@dataclass(eq=False)
class SanitizationRun:
    input: Table
    channel: Channel
    seed: int
    output: Table
    decoder: np.ndarray | None = None
    metrics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "n": self.input.n, "channel": self.channel.to_dict(),
                "metrics": dict(self.metrics)}


def run_sanitization(t: Table, c: Channel, seed: int = 0, d: DistortionSpec | None = None,
                     decoder=None) -> SanitizationRun:
    run = SanitizationRun(t, c, int(seed), sanitize(t, c, seed, decoder),
                          None if decoder is None else np.asarray(decoder))
    if d is not None:
        run.metrics = measure(run, d)
    return run


def measure(run: SanitizationRun, d: DistortionSpec) -> dict:
    """Empirical and theoretical distortion and equivocation of a run.

    Theoretical values average the generating channel over the empirical
    input distribution.
    """
    t, o = run.input, run.output
    if o.n != t.n:
        raise ValidationError("input and output tables differ in length")
    public = t.names_where(lambda r: r.is_public)
    private = t.names_where(lambda r: r.is_private)
    enc = t.names_where(lambda r: r is not Role.SIDE)
    side = t.names_where(lambda r: r is Role.SIDE)
    xr, xhat = t.codes(public), o.codes(o.names)
    n_r = math.prod(t.axis(n).size for n in public)
    n_hat = math.prod(a.size for a in o.schema)
    if d.shape != (n_r, n_hat):
        raise ValidationError(f"distortion shape {d.shape} does not match ({n_r}, {n_hat})")
    emp_dist = float(d.matrix[xr, xhat].mean())

    # plug-in H(X_h | Xhat, Z) from the empirical (private, output, side) joint
    xh, z = t.codes(private), t.codes(side)
    n_h, n_z = math.prod(t.axis(n).size for n in private), math.prod(t.axis(n).size for n in side)
    counts = np.zeros((n_h, n_hat, n_z))
    np.add.at(counts, (xh, xhat, z), 1.0)
    ax = (Axis("h", Alphabet.range(n_h), Role.PRIVATE), Axis("o", Alphabet.range(n_hat), Role.RECON),
          Axis("z", Alphabet.range(n_z), Role.SIDE))
    plug_in = conditional_entropy(JointPmf(ax, counts / t.n), "h", ("o", "z"))

    # same quantities under the channel, averaged over the empirical inputs
    x = t.codes(enc)
    n_x = run.channel.shape[0]
    W = run.channel.matrix
    p_xz = np.zeros((n_x, n_z))
    np.add.at(p_xz, (x, z), 1.0 / t.n)
    # map encoder index to public / private sub-indices
    enc_shape = [t.axis(n).size for n in enc]
    digits = np.unravel_index(np.arange(n_x), enc_shape)
    sub = lambda names: (np.ravel_multi_index([digits[enc.index(n)] for n in names],
                                              [t.axis(n).size for n in names])
                         if names else np.zeros(n_x, dtype=np.int64))
    r_of, h_of = sub(public), sub(private)
    P = p_xz[:, :, None] * W[:, None, :]                  # x z u
    if run.decoder is None:
        P_out = P                                        # u is the reconstruction
    else:
        P_out = np.zeros((n_x, n_z, n_hat))
        for zz in range(n_z):
            np.add.at(P_out[:, zz, :], (slice(None), run.decoder[:, zz]), P[:, zz, :])
    theo_dist = float((P_out.sum(axis=1) * d.matrix[r_of]).sum())
    P_hoz = np.zeros((n_h, n_hat, n_z))
    np.add.at(P_hoz, h_of, P_out.transpose(0, 2, 1))
    theo_eq = conditional_entropy(JointPmf(ax, P_hoz / P_hoz.sum()), "h", ("o", "z"))
    return {"empirical_distortion": emp_dist, "plug_in_equivocation": float(plug_in),
            "theoretical_distortion": theo_dist, "theoretical_equivocation": float(theo_eq)}


# --- serialization --------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), f".{SIG_DIGITS}g")
    return str(v)


def _write_csv(path, header, rows, format_cells=True) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(v) for v in r] if format_cells else r)
    except OSError as exc:
        raise PrivacyRDEError(f"cannot write {path}: {exc.strerror}") from None


def _blank(v):
    return "" if v is None else v


def curve_columns(obj) -> tuple[list[str], list[list]]:
    """Fixed CSV layout for every curve-like result."""
    from .closed_forms import GaussianGamma, HammingCurvePoint
    from .rd import RDPoint
    from .region import RegionPoint

    items = [obj] if isinstance(obj, SanitizationRun) else list(obj)
    first = items[0]
    if isinstance(first, RegionPoint):
        return (["rate", "distortion", "equivocation", "bound_type",
                 "target_distortion", "target_equivocation"],
                [[p.rate, p.distortion, p.equivocation, p.bound_type,
                  _blank(p.target_distortion), _blank(p.target_equivocation)] for p in items])
    if isinstance(first, RDPoint):
        return ["distortion", "rate", "slope"], [[p.distortion, p.rate, p.slope] for p in items]
    if isinstance(first, HammingCurvePoint):
        return (["D", "gamma_exact_bits", "gamma_formula_bits"],
                [list(p) for p in items])
    if isinstance(first, GaussianGamma):
        return (["D", "gamma_variance", "gamma_entropy_bits"],
                [[p.D, p.variance_form, p.entropy_form] for p in items])
    if isinstance(first, SanitizationRun):
        keys = ["empirical_distortion", "plug_in_equivocation",
                "theoretical_distortion", "theoretical_equivocation"]
        return ["n", "seed"] + keys, [[r.input.n, r.seed] + [r.metrics.get(k) for k in keys]
                                      for r in items]
    if isinstance(first, tuple) and len(first) == 2:
        return ["epsilon", "expected_abs_error"], [list(p) for p in items]
    raise ValidationError(f"no CSV layout for {type(first).__name__}")


def export_csv(obj, path, header: Sequence[str] | None = None) -> None:
    """Write a curve with 12 significant digits. An empty curve needs ``header``."""
    if not isinstance(obj, SanitizationRun) and not list(obj):
        _write_csv(path, list(header or ["distortion", "value"]), [])
        return
    cols, rows = curve_columns(obj)
    _write_csv(path, cols, rows)


def read_csv(path) -> tuple[list[str], list[list]]:
    """Header and rows; numeric cells become floats, others stay strings."""
    def conv(s):
        try:
            return float(s)
        except ValueError:
            return s
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise ValidationError(f"{path}: empty CSV")
    return rows[0], [[conv(c) for c in r] for r in rows[1:] if r]


def to_jsonable(obj):
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, (list, tuple)) and not hasattr(obj, "_fields"):
        return [to_jsonable(o) for o in obj]
    if hasattr(obj, "_asdict"):
        return {k: to_jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def export_json(obj, path) -> None:
    """JSON with shortest round-trip float repr, so values reload bit-exactly."""
    try:
        Path(path).write_text(json.dumps(to_jsonable(obj), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise PrivacyRDEError(f"cannot write {path}: {exc.strerror}") from None


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_channel(path) -> Channel:
    return Channel.from_dict(read_json(path))


def load_joint(path, normalize: bool = False) -> JointPmf:
    """A joint JSON, or ``{"probs": [...], "labels": [...]}`` for a single source."""
    d = read_json(path)
    if not isinstance(d, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    if "axes" in d:
        return JointPmf.from_dict(d, normalize=normalize)
    if "probs" in d:
        return Pmf.from_probs(d["probs"], d.get("labels"), normalize).to_joint(
            d.get("name", "X"), Role(d.get("role", "both")))
    raise ValidationError(f"{path}: needs 'axes' or 'probs'")


def load_distortion(path) -> DistortionSpec:
    d = read_json(path)
    if isinstance(d, list):
        return DistortionSpec(np.asarray(d, dtype=float))
    return DistortionSpec.from_dict(d)
