import json

import numpy as np
import pytest

from privacy_rde.closed_forms import hamming_waterfill
from privacy_rde.errors import ValidationError
from privacy_rde.pipeline import (Table, empirical_joint, export_csv, export_json, ingest_csv,
                                  load_channel, load_joint, load_schema, quantile_bins,
                                  read_csv, read_json, row_uniforms, run_sanitization, sanitize)
from privacy_rde.prob import Alphabet, Axis, Channel, DistortionSpec, Pmf, Role
from privacy_rde.rd import rate_distortion

SCHEMA = (Axis("zip", Alphabet(("a", "b", "c")), Role.PUBLIC),
          Axis("age", Alphabet(("u", "v")), Role.PRIVATE))


def write(path, text):
    path.write_text(text)
    return path


def test_ingest_reorders_columns(tmp_path):
    t = ingest_csv(write(tmp_path / "d.csv", "age,zip\nu,b\nv,a\n"), SCHEMA)
    assert t.names == ("zip", "age")
    assert t.rows.tolist() == [[1, 0], [0, 1]]


def test_ingest_error_names_row_and_column(tmp_path):
    with pytest.raises(ValidationError, match=r"row 2, column 'zip'"):
        ingest_csv(write(tmp_path / "d.csv", "zip,age\na,u\nq,v\n"), SCHEMA)


@pytest.mark.parametrize("text,msg", [("", "empty"), ("zip,age\n", "no data rows"),
                                      ("zip,age\na,u,x\n", "row 1 has 3 fields"),
                                      ("zip,sex\na,u\n", "does not match")])
def test_ingest_malformed(tmp_path, text, msg):
    with pytest.raises(ValidationError, match=msg):
        ingest_csv(write(tmp_path / "d.csv", text), SCHEMA)


def test_missing_file():
    with pytest.raises(ValidationError, match="cannot read"):
        ingest_csv("/nonexistent/x.csv", SCHEMA)


def test_schema_loading(tmp_path):
    p = write(tmp_path / "s.json", json.dumps({"columns": [a.to_dict() for a in SCHEMA]}))
    assert load_schema(p) == SCHEMA
    bad = write(tmp_path / "b.json", json.dumps([{"name": "x", "labels": ["0"],
                                                   "role": "reconstruction"}]))
    with pytest.raises(ValidationError, match="role"):
        load_schema(bad)


def test_empirical_joint():
    t = Table(SCHEMA, np.array([[0, 0], [0, 0], [2, 1], [1, 0]]))
    j = empirical_joint(t)
    assert j.probs[0, 0] == 0.5 and j.probs[2, 1] == 0.25 and j.probs.sum() == 1.0


def test_row_uniforms_are_block_independent():
    full = row_uniforms(7, 0, 1000)
    assert np.array_equal(np.concatenate([row_uniforms(7, 0, 400), row_uniforms(7, 400, 1000)]),
                          full)
    assert not np.array_equal(full, row_uniforms(8, 0, 1000))


def census_table(n, seed=0):
    a = Axis("X", Alphabet(("a", "b", "c")), Role.BOTH)
    rows = np.random.default_rng(seed).choice(3, size=n, p=[0.5, 0.25, 0.25])[:, None]
    return Table((a,), rows)


def test_identity_and_constant_channels():
    t = census_table(500)
    a = t.axis("X").alphabet
    out = sanitize(t, Channel.identity(a), seed=1)
    assert np.array_equal(out.rows, t.rows) and out.schema[0].role is Role.RECON
    const = sanitize(t, Channel.constant(a, [0, 1, 0], a), seed=1)
    assert np.all(const.rows == 1)


def test_channel_size_mismatch():
    t = census_table(10)
    with pytest.raises(ValidationError, match="channel input size"):
        sanitize(t, Channel.identity(Alphabet.range(2)))


def test_sanitization_is_seed_reproducible():
    t = census_table(2000)
    c = hamming_waterfill(Pmf.from_probs([0.5, 0.25, 0.25]), 0.2).forward_channel()
    a = sanitize(t, c, seed=3)
    assert np.array_equal(a.rows, sanitize(t, c, seed=3).rows)
    assert not np.array_equal(a.rows, sanitize(t, c, seed=4).rows)


def test_measured_metrics_track_channel():
    t = census_table(50_000, seed=2)
    c = hamming_waterfill(Pmf.from_probs([0.5, 0.25, 0.25]), 0.2).forward_channel()
    m = run_sanitization(t, c, 0, DistortionSpec.hamming(3)).metrics
    assert m["empirical_distortion"] == pytest.approx(m["theoretical_distortion"], abs=0.01)
    assert m["plug_in_equivocation"] == pytest.approx(m["theoretical_equivocation"], abs=0.02)


def test_decoder_with_side_info():
    schema = (Axis("r", Alphabet.range(2), Role.PUBLIC), Axis("h", Alphabet.range(2), Role.PRIVATE),
              Axis("z", Alphabet.range(2), Role.SIDE))
    rows = np.array([[0, 0, 0], [1, 1, 1], [0, 1, 1], [1, 0, 0]])
    t = Table(schema, rows)
    c = Channel.constant(Alphabet.range(4), [1.0])
    out = sanitize(t, c, decoder=np.array([[0, 1]]))
    assert out.names == ("r",) and out.rows[:, 0].tolist() == [0, 1, 1, 0]


def test_csv_export_roundtrip(tmp_path):
    pts = [rate_distortion(Pmf.from_probs([0.5, 0.25, 0.25]), DistortionSpec.hamming(3), D)
           for D in (0.1, 0.2)]
    export_csv(pts, tmp_path / "rd.csv")
    header, rows = read_csv(tmp_path / "rd.csv")
    assert header == ["distortion", "rate", "slope"]
    assert rows[1][1] == pytest.approx(pts[1].rate, rel=1e-11)


def test_empty_export_writes_header(tmp_path):
    export_csv([], tmp_path / "e.csv", header=["distortion", "rate"])
    assert (tmp_path / "e.csv").read_text().strip() == "distortion,rate"


def test_channel_json_roundtrip_is_bitwise(tmp_path):
    c = hamming_waterfill(Pmf.from_probs([0.6, 0.3, 0.1]), 0.17).forward_channel()
    export_json(c, tmp_path / "c.json")
    back = load_channel(tmp_path / "c.json")
    assert back.matrix.tobytes() == c.matrix.tobytes()


def test_load_joint_from_probs(tmp_path):
    j = load_joint(write(tmp_path / "p.json", '{"probs": [0.5, 0.5], "labels": ["x", "y"]}'))
    assert j.axis("X").role is Role.BOTH


def test_invalid_json_message(tmp_path):
    with pytest.raises(ValidationError, match="invalid JSON"):
        read_json(write(tmp_path / "x.json", "{oops"))


def test_quantile_bins():
    alpha, labels, edges = quantile_bins(np.arange(100.0), 4)
    assert alpha.size == 4
    assert [labels.count(l) for l in alpha.labels] == [25, 25, 25, 25]
    assert edges[0] == 0.0 and edges[-1] == 99.0
    with pytest.raises(ValidationError):
        quantile_bins([], 3)
