from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from fracmatder import _backend
from fracmatder.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    OUTPUT_ENV,
    RunConfig,
    build_parser,
    config_from_args,
    main,
    parse_step,
)
from fracmatder.errors import ConfigError

GOLDEN = Path(__file__).parent / "golden"


def _run(args, tmp_path, name="out"):
    out = tmp_path / name
    rc = main([*args, "-o", str(out)])
    return rc, out


def test_parse_step():
    assert parse_step("2^-10") == 2.0**-10
    assert parse_step("2**-3") == 0.125
    assert parse_step("0.5") == 0.5


@pytest.mark.parametrize("backend", _backend.available())
def test_solve_golden(tmp_path, backend):
    rc, out = _run(["solve", "--h", "2^-3", "--backend", backend], tmp_path)
    assert rc == EXIT_OK
    assert (out / "solution.csv").read_bytes() == (GOLDEN / "solve_wait_first_h3.csv").read_bytes()
    meta = json.loads((out / "solution.json").read_text())
    assert set(meta) == {"config", "mesh", "mass", "columns"}
    assert meta["mesh"] == {"h": 0.125, "i_min": -1, "i_max": 8, "n_steps": 8}
    assert len(meta["mass"]) == 9 and meta["mass"][0] == 1.0


@pytest.mark.parametrize("backend", _backend.available())
def test_mc_golden(tmp_path, backend):
    args = ["mc", "--h", "2^-3", "--n-traj", "2000", "--seed", "5", "--workers", "1", "--backend", backend]
    rc, out = _run(args, tmp_path)
    assert rc == EXIT_OK
    assert (out / "mc.csv").read_bytes() == (GOLDEN / "mc_wait_first_h3.csv").read_bytes()
    meta = json.loads((out / "mc.json").read_text())
    assert meta["n_traj"] == 2000 and meta["overflow"] == 0
    assert {"l1_error", "mean_steps", "mesh", "config"} <= set(meta)


def test_reruns_byte_identical(tmp_path):
    for cmd in (["solve", "--h", "2^-5", "--all-frames"], ["mc", "--h", "2^-5", "--n-traj", "30000", "--seed", "2"]):
        _, a = _run(cmd + ["--workers", "1"] if cmd[0] == "mc" else cmd, tmp_path, "a")
        _, b = _run(cmd + ["--workers", "3"] if cmd[0] == "mc" else cmd, tmp_path, "b")
        for f in a.glob("*.csv"):
            assert f.read_bytes() == (b / f.name).read_bytes()


def test_converge_outputs(tmp_path):
    rc, out = _run(["converge", "--source", "power", "--mu", "1", "--h", "2^-3", "2^-4", "2^-5"], tmp_path)
    assert rc == EXIT_OK
    rows = list(csv.reader((out / "converge.csv").open()))
    assert rows[0] == ["alpha", "h", "l2", "linf"] and len(rows) == 4
    fits = json.loads((out / "converge.json").read_text())["fits"]
    assert fits[0]["fitted_norm"] == "linf" and "rate" in fits[0] and "residual" in fits[0]


def test_compare_outputs(tmp_path):
    rc, out = _run(["compare", "--h", "2^-4", "--n-traj", "500", "1000"], tmp_path)
    assert rc == EXIT_OK
    header = (out / "compare.csv").read_text().splitlines()[0]
    assert header == "i,x,analytic,fv,mc_500,mc_1000"
    timing = json.loads((out / "compare.json").read_text())["timing"]
    assert timing["fv"]["repeats"] == 3
    assert [m["n_traj"] for m in timing["mc"]] == [500, 1000]


def test_minus_direction(tmp_path):
    rc, out = _run(["solve", "--h", "2^-4", "--direction", "minus"], tmp_path)
    assert rc == EXIT_OK
    rows = list(csv.reader((out / "solution.csv").open()))[1:]
    assert all(float(r[1]) <= 0.0625 for r in rows)


@pytest.mark.parametrize(
    "args",
    [
        ["solve", "--alpha", "1.0"],
        ["solve", "--alpha", "0"],
        ["mc", "--source", "jump-first", "--h", "2^-3"],
        ["solve", "--source", "power", "--mu", "1", "--h", "2^-3"],
        ["converge", "--source", "power", "--mu", "1", "--h", "2^-3", "2^-4"],
        ["solve", "--h", "0.3"],
        ["mc", "--n-traj", "0", "--h", "2^-3"],
    ],
)
def test_config_errors(tmp_path, args, capsys):
    rc, _ = _run(args, tmp_path)
    assert rc == EXIT_CONFIG
    assert "error" in capsys.readouterr().err.lower()


def test_argparse_error_exit(tmp_path):
    assert main(["solve", "--scheme", "bogus"]) == EXIT_CONFIG


def test_env_output_and_missing_dir(tmp_path, monkeypatch):
    target = tmp_path / "deep" / "nested"
    monkeypatch.setenv(OUTPUT_ENV, str(target))
    assert main(["solve", "--h", "2^-3"]) == EXIT_OK
    assert (target / "solution.csv").exists()


def test_config_roundtrip():
    ns = build_parser().parse_args(["compare", "--h", "2^-6", "--n-traj", "10", "20", "--alpha", "0.3"])
    cfg = config_from_args(ns)
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**cfg.to_dict(), "command": "nope"})
