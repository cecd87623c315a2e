# -*- coding: utf-8 -*-
"""
Test the :mod:`mobius_flock.plot` module
"""
import os

import pytest

from mobius_flock import FlockWarning
from mobius_flock import config as mconfig
from mobius_flock import geometry
from mobius_flock import plot


def test_plot_render_plot_script():
    source = plot.render_plot_script(os.path.join("out", "trajectory.csv"))
    compile(source, "plot_trajectory.py", "exec")
    assert "'trajectory.csv'" in source
    assert "PREFIX = 'trajectory'" in source
    assert "BOUNDARY_CENTER = complex((0.5+0j))" in source
    assert "plot_trajectory.py" in source


def test_plot_render_plot_script_config():
    with pytest.warns(FlockWarning):
        config = mconfig.load_sim_config("paper_sync", ["geometry.root=larger"])
    source = plot.render_plot_script("run.csv", config, prefix="larger")
    compile(source, "plot_larger.py", "exec")
    assert f"SIGMA = {float(config.ctx.sigma)!r}" in source
    assert config.ctx.sigma < 0
    assert "PREFIX = 'larger'" in source


def test_plot_write_plot_script(tmp_path):
    path = str(tmp_path / "plot_trajectory.py")
    assert plot.write_plot_script(path, "trajectory.csv") == path
    with open(path) as f:
        compile(f.read(), path, "exec")


def test_plot_render_plot_script_user_frame():
    config = mconfig.load_sim_config("paper_sync")
    source = plot.render_plot_script("run.csv", config)
    assert "USER_BOUNDARY_CENTER = complex((0.5+0j))" in source
    assert "S_D = 0.06" in source
    assert "DELTA_S = 0.06" in source
    assert 'save(fig, "speeds")' in source
    assert "re(r_user)" in source

    frame = geometry.FrameTransform(1 + 2j, 0.0, 0.5)
    source = plot.render_plot_script("run.csv", config.replace(frame=frame))
    compile(source, "plot_run.py", "exec")
    assert "USER_DESIRED_CENTER = complex((-1-2j))" in source
    assert "USER_DESIRED_RADIUS = 2.0" in source
    assert "BOUNDARY_CENTER = complex((0.5+0j))" in source
