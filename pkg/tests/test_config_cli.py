import csv
import json
import subprocess
import sys

import pytest

from bakerdyn.cli import main
from bakerdyn.config import ConfigError, config_hash, load, parse_text, validate


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_key_value_and_json_agree(tmp_path):
    kv = tmp_path / "a.conf"
    kv.write_text("# comment\nexperiment = dimension\nb1 = 0.5  # trailing\nb2=0.25\n")
    js = tmp_path / "a.json"
    js.write_text(json.dumps({"experiment": "dimension", "b1": 0.5, "b2": 0.25}))
    a, b = load(kv), load(js)
    assert a == b
    assert config_hash(a) == config_hash(b)


def test_hash_ignores_threads_and_paths():
    a = validate({"experiment": "dimension", "b1": 0.5, "b2": 0.25})
    b = validate({"experiment": "dimension", "b1": 0.5, "b2": 0.25, "threads": 3,
                  "out_dir": "/elsewhere"})
    c = validate({"experiment": "dimension", "b1": 0.5, "b2": 0.3})
    assert config_hash(a) == config_hash(b) != config_hash(c)


@pytest.mark.parametrize("text, message", [
    ("experiment = render\nfoo = 1\n", "foo"),
    ("experiment = render\nmap = fatou\nmap = bargmann\n", "duplicate"),
    ("experiment = nonsense\n", "unknown experiment"),
    ("map = fatou\n", "missing key"),
    ("experiment = render\nresolution = 10\n", "resolution"),
    ("experiment = render\nn_max = 2.5\n", "n_max"),
    ("experiment = render\nthreads = -1\n", "threads"),
    ("{not json", "invalid JSON"),
    ("experiment render\n", "expected key = value"),
])
def test_schema_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        validate(parse_text(text))


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("experiment = render\nmap = fatou\nfoo = 1\n")
    assert main(["run", str(cfg), "--out-dir", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "foo" in err and "unknown key" in err
    assert not list(tmp_path.glob("*.ppm"))


def test_bad_parameter_values_exit_2(tmp_path):
    assert main(["dimension", "--b1", "0.5", "--b2", "1.5", "--out-dir", str(tmp_path)]) == 2
    assert main(["circle-stats", "--inner", "moebius_hyperbolic", "--lam", "1",
                 "--out-dir", str(tmp_path)]) == 2
    assert main(["render", "--map", "nosuchmap", "--out-dir", str(tmp_path)]) == 2


def test_numerical_failure_exits_3(tmp_path, capsys):
    # the same branch twice gives identical, hence overlapping, images
    rc = main(["dimension", "--map", "bargmann", "--base", "1.21658+2.4894j",
               "--base-radius", "3", "--chains", "0.7920599684,0.7920599684",
               "--out-dir", str(tmp_path)])
    assert rc == 3
    assert "overlap" in capsys.readouterr().err


def test_not_found_is_empty_data(tmp_path):
    rc = main(["periodic", "--map", "baker_abel", "--region", "0,2,-1,1", "--grid", "1,1",
               "--out-dir", str(tmp_path), "--name", "none"])
    assert rc == 0
    rows = read_csv(tmp_path / "none.csv")
    assert rows == [["re", "im", "period", "mult_re", "mult_im", "residual", "witness"]]


def test_manifest(tmp_path):
    assert main(["dimension", "--b1", "0.5", "--b2", "0.25", "--seed", "9",
                 "--out-dir", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "dimension.manifest.json").read_text())
    assert m["seed"] == 9 and len(m["config_hash"]) == 64
    assert {"bakerdyn", "python", "numpy", "scipy"} <= set(m["versions"])
    assert m["wall_time_s"] >= 0
    rows = read_csv(tmp_path / "dimension.csv")
    assert rows[0] == ["s", "b1", "b2"]
    assert abs(float(rows[1][0]) - 0.6942419136306174) < 1e-12


def test_catalog_table(tmp_path, capsys):
    assert main(["catalog", "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].split() == ["id", "formula", "type", "univalent"]
    assert any(l.startswith("bergweiler") and "hyperbolic" in l for l in lines)
    rows = read_csv(tmp_path / "catalog.csv")
    assert len(rows) == 1 + 5 + 4


def test_circle_stats_columns_and_repeatability(tmp_path):
    args = ["circle-stats", "--inner", "blaschke_baker", "--samples", "2000", "--n", "200",
            "--arc", "0.30,0.35", "--seed", "42"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b"), "--threads", "4"]) == 0
    a = (tmp_path / "a" / "circle-stats.csv").read_bytes()
    assert a == (tmp_path / "b" / "circle-stats.csv").read_bytes()
    rows = read_csv(tmp_path / "a" / "circle-stats.csv")
    assert rows[0][:7] == ["inner_id", "statistic", "value", "stderr", "samples", "iterations",
                           "seed"]
    assert rows[1][0] == "blaschke_baker" and rows[1][6] == "42"


def test_classify_prints_decision(tmp_path, capsys):
    assert main(["classify", "--map", "fatou", "--starts", "20,50,100", "--depth", "16",
                 "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "fatou" in out and "doubly_parabolic" in out
    rows = read_csv(tmp_path / "classify.csv")
    assert len(rows) == 1 + 3 * 15


def test_probe_rows(tmp_path):
    assert main(["probe", "--inner", "fatou_inner", "--depth", "1", "--budget", "200",
                 "--out-dir", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "probe.csv")
    kinds = {r[0] for r in rows[1:]}
    assert {"julia_point", "max_gap_turns", "preimage"} <= kinds
    assert sum(r[0] == "preimage" for r in rows) == 3


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "bakerdyn.cli", "dimension", "--b1", "0.5",
                        "--b2", "0.5", "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert read_csv(tmp_path / "dimension.csv")[1][0] == "1.0"
