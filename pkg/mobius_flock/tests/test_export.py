# -*- coding: utf-8 -*-
"""
Test the :mod:`mobius_flock.export` module
"""
import os
import math
import functools

import pytest
import numpy as np
import pandas as pd
import xarray as xr

from mobius_flock import FlockError
from mobius_flock import config as mconfig
from mobius_flock import geometry
from mobius_flock import sim
from mobius_flock import export


@functools.lru_cache()
def get_log():
    config = mconfig.load_sim_config("paper_sync", ["sim.t_final=2"])
    return config, sim.integrate(config)


def test_export_log_to_dataframe():
    config, log = get_log()
    df = export.log_to_dataframe(log)
    assert list(df.columns) == list(export.CSV_COLUMNS)
    assert len(df) == log.sizes["time"] * log.sizes["agent"]
    np.testing.assert_array_equal(df.agent_id[:5], [1, 2, 3, 4, 5])
    assert (df.t.diff().dropna() >= 0).all()
    assert df["re(r)"][0] == config.initial_states.r[0].real
    assert df["im(rho)"][7] == log.rho_im.isel(time=1, agent=2).item()
    np.testing.assert_array_equal(df.V[:5], log.V[0].item())


def test_export_trajectory_csv(tmp_path):
    config, log = get_log()
    path = str(tmp_path / "trajectory.csv")
    assert export.write_trajectory_csv(log, path) == path
    df = export.read_trajectory_csv(path)
    pd.testing.assert_frame_equal(df, export.log_to_dataframe(log))

    bad = str(tmp_path / "bad.csv")
    df[["t", "agent_id", "v"]].to_csv(bad, index=False)
    with pytest.raises(FlockError, match="Missing columns"):
        export.read_trajectory_csv(bad)


def test_export_report(tmp_path):
    config, log = get_log()
    report = sim.evaluate_monitors(config, log)
    path = str(tmp_path / "report.json")
    export.write_report(report, path, config="paper_sync", scale=np.float64(1.5), gap=math.inf)
    content = export.read_report(path)
    assert content["config"] == "paper_sync"
    assert content["scale"] == 1.5
    assert content["gap"] == "inf"
    assert content["passed"] is report.passed
    assert content["converged_at"] is None
    assert content["envelope_failures"] == report.envelope_failures


def test_export_netcdf(tmp_path):
    pytest.importorskip("netCDF4")
    config, log = get_log()
    path = export.write_netcdf(log, str(tmp_path / "trajectory.nc"))
    with xr.open_dataset(path) as ds:
        xr.testing.assert_allclose(ds.load(), log)
        assert ds.attrs["pattern"] == "sync"


def test_export_get_output_paths():
    paths = export.get_output_paths("out")
    assert paths["csv"] == os.path.join("out", "trajectory.csv")
    assert paths["report"] == os.path.join("out", "monitor_report.json")
    assert paths["plot"] == os.path.join("out", "plot_trajectory.py")
    assert paths["netcdf"] == os.path.join("out", "trajectory.nc")


def test_export_user_frame_columns(tmp_path):
    config, log = get_log()
    assert list(export.log_to_dataframe(log).columns) == list(export.CSV_COLUMNS)

    frame = geometry.FrameTransform(-1j, 0.5 * np.pi, 2.0)
    flog = sim.integrate(config.replace(t_final=0.1, frame=frame))
    df = export.log_to_dataframe(flog)
    assert list(df.columns) == list(export.CSV_COLUMNS) + list(export.USER_CSV_COLUMNS)
    r_user = df["re(r_user)"] + 1j * df["im(r_user)"]
    r = df["re(r)"] + 1j * df["im(r)"]
    np.testing.assert_allclose(frame.to_canonical_point(r_user.values), r.values, atol=1e-14)
    np.testing.assert_allclose(df.v_user, df.v / 2.0)

    path = export.write_trajectory_csv(flog, str(tmp_path / "user.csv"))
    pd.testing.assert_frame_equal(export.read_trajectory_csv(path), df)
