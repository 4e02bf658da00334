import json

import pytest

from privacy_rde.cli import main, parse_grid
from privacy_rde.errors import ValidationError
from privacy_rde.pipeline import read_csv

CENSUS = '{"probs": [0.5, 0.25, 0.25], "labels": ["a", "b", "c"]}'
JOINT = ('{"axes": [{"name": "h", "labels": ["0", "1"], "role": "private"},'
         ' {"name": "r", "labels": ["0", "1", "2"], "role": "public"}],'
         ' "probs": [0.2, 0.1, 0.05, 0.15, 0.3, 0.2]}')


@pytest.fixture
def files(tmp_path):
    (tmp_path / "p.json").write_text(CENSUS)
    (tmp_path / "j.json").write_text(JOINT)
    (tmp_path / "s.json").write_text(
        '{"columns": [{"name": "X", "labels": ["a", "b", "c"], "role": "both"}]}')
    (tmp_path / "db.csv").write_text("X\n" + "a\nb\na\nc\n" * 50)
    return tmp_path


def test_parse_grid():
    assert parse_grid("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert parse_grid("0.5,1") == [0.5, 1.0]
    with pytest.raises(ValidationError):
        parse_grid("1:0:0.1")


def test_curve_rd_csv(files):
    out = files / "rd.csv"
    assert main(["curve", "rd", "--pmf", str(files / "p.json"), "--d-grid", "0:0.2:0.1",
                 "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[:2] == ["distortion", "rate"] and len(rows) == 3
    assert rows[0][1] == pytest.approx(1.5, abs=1e-6)


def test_curve_gamma(files, capsys):
    assert main(["curve", "gamma", "--pmf", str(files / "j.json"), "--d-grid", "0.1,0.3",
                 "--multistarts", "2"]) == 0
    pts = json.loads(capsys.readouterr().out)
    assert len(pts) == 2 and pts[1]["equivocation"] >= pts[0]["equivocation"] - 1e-9


def test_waterfill(files, capsys):
    assert main(["waterfill", "--pmf", str(files / "p.json"), "--d", "0.2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lambda"] == pytest.approx(0.1)


def test_gaussian_csv(files):
    out = files / "g.csv"
    assert main(["gaussian", "--sx2", "1", "--sy2", "1", "--rho", "0.5", "--d-grid", "0:1:0.5",
                 "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["D", "gamma_variance", "gamma_entropy_bits"]
    assert [r[1] for r in rows] == pytest.approx([0.75, 0.875, 1.0])


def test_sanitize(files, capsys):
    out = files / "o.csv"
    assert main(["sanitize", "--in", str(files / "db.csv"), "--schema", str(files / "s.json"),
                 "--d", "0.2", "--out", str(out), "--seed", "5"]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert set(metrics) >= {"empirical_distortion", "plug_in_equivocation"}
    first = out.read_text()
    main(["sanitize", "--in", str(files / "db.csv"), "--schema", str(files / "s.json"),
          "--d", "0.2", "--out", str(out), "--seed", "5"])
    assert out.read_text() == first


def test_dp(capsys):
    assert main(["dp", "--epsilon", "0.5", "--sensitivity", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["b"] == 4.0 and rep["noise_variance"] == 32.0 and rep["ratio_check"]["ok"]


def test_dp_sum_requires_clip(capsys):
    assert main(["dp", "--query", "sum"]) == 1


def test_oracle_check(files, capsys):
    prob = {"joint": json.loads(JOINT), "D": 0.2, "kind": "rd"}
    (files / "q.json").write_text(json.dumps(prob))
    assert main(["oracle-check", "--problem", str(files / "q.json"), "--q", "0.1"]) == 0
    assert json.loads(capsys.readouterr().out)["consistent"]


def test_exit_codes(files, capsys):
    assert main(["waterfill", "--pmf", str(files / "p.json"), "--d", "0.9"]) == 2
    assert main(["waterfill", "--pmf", str(files / "missing.json"), "--d", "0.1"]) == 1
    with pytest.raises(SystemExit) as ei:
        main(["curve", "nope"])
    assert ei.value.code == 1
