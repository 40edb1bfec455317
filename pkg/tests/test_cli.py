import json

import pytest
from click.testing import CliRunner

from fractal_riesz.cli import main

CORPUS = ["cantor3", "lebesgue2", "twodim"]


def _runner():
    # click < 8.2 mixes stderr into stdout unless told otherwise
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()


@pytest.fixture(scope="module")
def runner():
    return _runner()


@pytest.fixture(scope="module")
def built(tmp_path_factory, data_dir):
    out = {}
    runner = _runner()
    for name in CORPUS:
        d = tmp_path_factory.mktemp(name)
        res = runner.invoke(main, ["build", str(data_dir / f"{name}.json"), "--out", str(d)])
        out[name] = (res, d)
    return out


def _json(res):
    return json.loads(res.stdout)


def test_analyze(runner, data_dir):
    res = runner.invoke(main, ["analyze", str(data_dir / "cantor3.json")])
    assert res.exit_code == 0
    out = _json(res)
    assert out["c"] == pytest.approx(1 / 3) and out["L"] == pytest.approx(6.283185307179586)
    res = runner.invoke(main, ["analyze", str(data_dir / "lebesgue2.json")])
    assert _json(res)["c"] == pytest.approx(0.5)


def test_analyze_invalid(runner, data_dir, tmp_path):
    assert runner.invoke(main, ["analyze", str(data_dir / "nonexpansive.json")]).exit_code == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 1, "R": [[2]], "B": [[1], [2]]}')
    assert runner.invoke(main, ["analyze", str(bad)]).exit_code == 2


@pytest.mark.parametrize("name", CORPUS)
def test_build_then_verify(runner, built, data_dir, name):
    res, d = built[name]
    assert res.exit_code == 0, res.output
    report = json.loads((d / "report.json").read_text())
    assert report["gram"]["riesz_ok"] is True
    v = runner.invoke(main, ["verify", str(data_dir / f"{name}.json"), str(d / "spectrum.json")])
    assert v.exit_code == 0, v.output
    assert _json(v)["failed"] == []


def test_build_deterministic(runner, built, data_dir, tmp_path):
    res = runner.invoke(main, ["build", str(data_dir / "cantor3.json"), "--out", str(tmp_path), "--seed", "3"])
    assert res.exit_code == 0
    assert (tmp_path / "spectrum.json").read_bytes() == (built["cantor3"][1] / "spectrum.json").read_bytes()


def test_build_rejects_rho_target(runner, data_dir, tmp_path):
    res = runner.invoke(main, ["build", str(data_dir / "cantor3.json"), "--rho-target", "0.3", "--out", str(tmp_path)])
    assert res.exit_code == 2
    assert not (tmp_path / "spectrum.json").exists()


def test_build_levels_one(runner, data_dir, tmp_path):
    res = runner.invoke(main, ["build", str(data_dir / "cantor3.json"), "--levels", "1", "--out", str(tmp_path)])
    assert res.exit_code == 0
    assert _json(res)["points"] == 4 and _json(res)["gram"]["riesz_ok"]


def test_config_precedence(runner, data_dir, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"levels": 1, "k": 6}))
    res = runner.invoke(main, ["build", str(data_dir / "cantor3.json"), "--config", str(cfg), "--k", "5",
                               "--out", str(tmp_path)])
    out = _json(res)
    assert out["config"]["levels"] == 1 and out["config"]["k"] == 5


def test_build_search_exhausted(runner, data_dir, tmp_path, monkeypatch):
    from fractal_riesz import cli
    from fractal_riesz.errors import SearchExhausted

    def boom(*a, **k):
        raise SearchExhausted("no certified digit system within the search budget")

    monkeypatch.setattr(cli, "find_digit_system", boom)
    res = runner.invoke(main, ["build", str(data_dir / "cantor3.json"), "--out", str(tmp_path)])
    assert res.exit_code == 3


def test_verify_tampered(runner, built, data_dir, tmp_path):
    raw = json.loads((built["cantor3"][1] / "spectrum.json").read_text())
    raw["points"][5]["freq"][0] = str(int(raw["points"][5]["freq"][0]) + 1)
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(raw))
    res = runner.invoke(main, ["verify", str(data_dir / "cantor3.json"), str(path)])
    assert res.exit_code == 5
    assert "radix_identity" in _json(res)["failed"]


def test_verify_hash_mismatch(runner, built, data_dir):
    res = runner.invoke(main, ["verify", str(data_dir / "lebesgue2.json"),
                               str(built["cantor3"][1] / "spectrum.json")])
    assert res.exit_code == 5
    assert _json(res)["failed"] == ["spec_hash"]


def test_demo(runner):
    res = runner.invoke(main, ["demo", "cantor-3n", "--n", "6"])
    assert res.exit_code == 0
    seq = _json(res)["top_eigenvalues"]
    assert all(b > a for a, b in zip(seq, seq[1:]))
    res = runner.invoke(main, ["demo", "lebesgue-identity"])
    assert res.exit_code == 0 and _json(res)["max_deviation_from_identity"] <= 3e-10
    assert runner.invoke(main, ["demo", "bogus"]).exit_code != 0


def test_beurling(runner, built):
    res = runner.invoke(main, ["beurling", str(built["cantor3"][1] / "spectrum.json"), "--r", "0.5"])
    assert res.exit_code == 0
    out = _json(res)
    assert out["r"] == 0.5 and out["dim_lower_theoretical"] > 0
