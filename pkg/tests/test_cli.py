import json
import math

import pytest

from reinforced_walks import cli


def run(tmp_path, command, config, *extra, name="cfg.json"):
    cfg = tmp_path / name
    cfg.write_text(json.dumps(config))
    out = tmp_path / f"{command}.csv"
    code = cli.main([command, "--config", str(cfg), "--out", str(out), *extra])
    text = out.read_text() if out.exists() else ""
    return code, text


def body(text):
    lines = text.split("\n")
    assert lines[0].startswith("# reinforced-walks")
    return [ln.split(",") for ln in lines[1:] if ln]


def test_constants(tmp_path):
    code, text = run(tmp_path, "constants", {"p": "0.5", "distribution": "rademacher"})
    assert code == 0 and "\r" not in text
    rows = {r[0]: float(r[1]) for r in body(text)[1:]}
    assert rows["checkb"] == 0 and rows["checksigmasq"] == 0.5
    assert rows["sigma1sq"] == pytest.approx(5 / 18, abs=1e-15)
    assert rows["sigma3sq"] == pytest.approx(1 / 252, abs=1e-15)
    assert rows["sigma4sq"] == pytest.approx(23 / 84, abs=1e-15)
    assert abs(rows["negative_identity_residual"]) < 1e-12 and abs(rows["tree_identity_residual"]) < 1e-12


def test_moments_ratio(tmp_path):
    code, text = run(tmp_path, "moments", {"p": "0.75", "n": "10000"})
    rows = body(text)
    assert code == 0 and rows[0] == ["n", "ez2", "ez2_closed", "bn", "ratio", "varz2", "b4"]
    assert rows[-1][0] == "10000" and 0.99 <= float(rows[-1][4]) <= 1.01


def test_moments_small_p_has_no_normalizer(tmp_path):
    code, text = run(tmp_path, "moments", {"p": "0.3", "n_grid": ["10", "100"]})
    assert code == 0 and all(r[3] == "" for r in body(text)[1:])


def test_enumerate(tmp_path):
    code, text = run(tmp_path, "enumerate", {"p": "0.5", "n": "3"})
    rows = {(r[0], r[1]): r[2:] for r in body(text)[1:]}
    assert code == 0
    assert float(rows[("Z", "2")][0]) == 5.5 and float(rows[("Z", "2")][1]) == 4.75


def test_enumerate_with_walk(tmp_path):
    cfg = {"p": "0.5", "n": "2", "distribution": "rademacher", "mode": "negative"}
    code, text = run(tmp_path, "enumerate", cfg)
    atoms = {float(r[1]): float(r[2]) for r in body(text) if r[0] == "walk_atom"}
    assert code == 0 and atoms == {-2.0: 0.125, 0.0: 0.75, 2.0: 0.125}


def test_enumerate_too_large(tmp_path):
    code, _ = run(tmp_path, "enumerate", {"p": "0.5", "n": "12"})
    assert code == 2


def test_simulate_and_threads(tmp_path):
    cfg = {"p": "0.5", "n": "500", "mode": "negative", "replicates": "4", "seed": "7",
           "distribution": {"kind": "custom-discrete", "support": {"0": "0.5", "2": "0.5"}}}
    code, a = run(tmp_path, "simulate", cfg)
    assert code == 0 and all(r[-1] == "true" for r in body(a)[1:])
    _, b = run(tmp_path, "simulate", cfg, "--threads", "2")
    assert body(a) == body(b)


def test_rate_csv_layout(tmp_path, monkeypatch):
    monkeypatch.setenv("REINFORCED_WALKS_THREADS", "2")
    cfg = {"target": "nu1", "p": "0.5", "n_grid": ["100", "200", "400"], "replicates": "2000", "seed": "1"}
    with pytest.warns(UserWarning):
        code, text = run(tmp_path, "rate", cfg)
    rows = body(text)
    assert code == 0 and rows[0] == ["n", "N", "dk", "dkw", "delta", "ratio"]
    assert [r[0] for r in rows[1:4]] == ["100", "200", "400"]
    assert rows[-1][0] == "slope" and rows[-1][3] == "inconclusive"
    for r in rows[1:4]:
        assert float(r[5]) == pytest.approx(float(r[2]) / float(r[4]))
        assert float(r[4]) == pytest.approx(int(r[0]) ** -0.5)


def test_percolation_command(tmp_path):
    edges = tmp_path / "path.txt"
    edges.write_text("3 2\n1 2\n2 3\n")
    cfg = {"graph": str(edges), "ptilde": "0.5", "sigma2": "1", "replicates": "2000", "seed": "3"}
    code, text = run(tmp_path, "percolation", cfg)
    rows = body(text)[1:]
    assert code == 0 and [r[0] for r in rows] == ["0", "1", "2"]
    assert float(rows[0][1]) == 1.25
    assert float(rows[0][5]) == pytest.approx(math.sqrt(0.65625)) and rows[0][6] == "true"


def test_reruns_are_byte_identical(tmp_path):
    cfg = {"p": "0.75", "n": "1000", "replicates": "3", "seed": "11"}
    _, a = run(tmp_path, "simulate", cfg)
    _, b = run(tmp_path, "simulate", cfg)
    assert a.split("\n", 1)[1] == b.split("\n", 1)[1]


def test_seventeen_significant_digits():
    assert cli.fmt(1 / 3) == "0.33333333333333331"
    assert cli.fmt(True) == "true" and cli.fmt(None) == "" and cli.fmt(3) == "3"


@pytest.mark.parametrize(
    "config,key",
    [
        ({"p": "1.5"}, "'p'"),
        ({"p": "abc"}, "'p'"),
        ({}, "'p'"),
        ({"p": "0.5", "distribution": {"kind": "nope"}}, "'distribution'"),
    ],
)
def test_config_errors_name_the_key(tmp_path, capsys, config, key):
    code, _ = run(tmp_path, "constants", config)
    assert code == 2 and key in capsys.readouterr().err


def test_bad_json_and_usage(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["constants", "--config", str(bad)]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("REINFORCED_WALKS_THREADS", "many")
    code, _ = run(tmp_path, "constants", {"p": "0.5"})
    assert code == 2


def test_verify_passes(tmp_path):
    out = tmp_path / "verify.csv"
    assert cli.main(["verify", "--out", str(out)]) == 0
    rows = body(out.read_text())[1:]
    assert rows and all(r[1] == "pass" for r in rows)
