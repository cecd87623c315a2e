# -*- coding: utf-8 -*-
"""
Test the :mod:`mobius_flock.cli` module
"""
import os
import json

import pytest

from mobius_flock import cli
from mobius_flock import export


def test_cli_no_command(capsys):
    assert cli.main([]) == cli.EXIT_ERROR
    assert "usage" in capsys.readouterr().out


def test_cli_info(capsys):
    assert cli.main(["info", "paths"]) == 0
    assert "sample" in capsys.readouterr().out.lower()


def test_cli_geometry(capsys):
    assert cli.main(["geometry"]) == 0
    out = capsys.readouterr().out
    assert "roots: 0.5 2\n" in out
    assert "chosen root: 0.5 (smaller)" in out
    assert "delta_T: 0.13245" in out
    assert "user frame" not in out

    assert cli.main(["geometry", "--root", "larger"]) == 0
    assert "chosen root: 2 (larger)" in capsys.readouterr().out


def test_cli_geometry_errors(capsys):
    status = cli.main(["geometry", "--set", "geometry.boundary_center=0,0"])
    assert status == cli.EXIT_ERROR
    assert "ConcentricCirclesError" in capsys.readouterr().err
    assert cli.main(["geometry", "--config", "no_such_configuration.cfg"]) == cli.EXIT_ERROR


def test_cli_run(tmp_path, capsys):
    outdir = str(tmp_path / "out")
    status = cli.main(["run", "--out", outdir, "--t-final", "2", "--plane", "crosscheck"])
    out = capsys.readouterr().out
    assert status == cli.EXIT_FAILED
    assert "converged: FAILED" in out
    assert "barrier_ok: ok" in out
    assert "cross_plane_ok: ok" in out
    assert "cross plane divergence" in out

    paths = export.get_output_paths(outdir)
    for key in ("csv", "report", "plot"):
        assert os.path.exists(paths[key])
    assert not os.path.exists(paths["netcdf"])
    df = export.read_trajectory_csv(paths["csv"])
    assert df.t.max() == pytest.approx(2.0)
    report = export.read_report(paths["report"])
    assert report["config"] == "paper_sync"
    assert report["plane"] == "original"
    assert report["cross_divergence"] < 1e-6

    with open(os.path.join(outdir, "manifest.json")) as f:
        manifest = json.load(f)
    assert manifest["exit_status"] == cli.EXIT_FAILED
    assert manifest["output_dir"] == outdir
    assert paths["csv"] in manifest["artifacts"]


def test_cli_run_netcdf(tmp_path):
    pytest.importorskip("netCDF4")
    outdir = str(tmp_path)
    cli.main(["run", "--out", outdir, "--t-final", "1", "--pattern", "balance", "--netcdf"])
    assert os.path.exists(export.get_output_paths(outdir)["netcdf"])
    report = export.read_report(export.get_output_paths(outdir)["report"])
    assert report["K"] == 0.04
    assert report["pattern"] == "balance"


def test_cli_run_errors(tmp_path, capsys):
    status = cli.main(["run", "--out", str(tmp_path), "--dt", "0.1"])
    assert status == cli.EXIT_ERROR
    assert "FlockValidateError" in capsys.readouterr().err
    assert not os.path.exists(os.path.join(str(tmp_path), "manifest.json"))


def test_cli_verify(capsys):
    assert cli.main(["verify", "--checks", "geometry", "initial_errors"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out

    status = cli.main(
        ["verify", "--checks", "initial_errors", "--set", "control.kappa1=-1"]
    )
    assert status == cli.EXIT_FAILED
    assert "WrongGainSignError" in capsys.readouterr().out
    assert cli.main(["verify", "--checks", "xxx"]) == cli.EXIT_ERROR
