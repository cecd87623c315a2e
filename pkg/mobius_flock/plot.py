#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Generation of plot scripts

Plots are not made by the library: a standalone script that only needs
:mod:`pandas` and :mod:`matplotlib` is written next to the trajectory CSV
file and renders the trajectories, errors, controls and group signals.
"""
# Copyright 2021 mobius_flock developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import os
import logging

from .geometry import FrameTransform

logger = logging.getLogger(__name__)

PLOT_SCRIPT_TEMPLATE = '''#!/usr/bin/env python3
"""Plot the trajectories of {csv_name}

Usage: python {script_name} [--show]
"""
import os
import sys

import numpy as np
import pandas as pd
import matplotlib

if "--show" not in sys.argv:
    matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
DESIRED_CENTER = complex({desired_center!r})
DESIRED_RADIUS = {desired_radius!r}
BOUNDARY_CENTER = complex({boundary_center!r})
BOUNDARY_RADIUS = {boundary_radius!r}
SIGMA = {sigma!r}
S_D = {s_d!r}
DELTA_S = {delta_s!r}
USER_DESIRED_CENTER = complex({user_desired_center!r})
USER_DESIRED_RADIUS = {user_desired_radius!r}
USER_BOUNDARY_CENTER = complex({user_boundary_center!r})
USER_BOUNDARY_RADIUS = {user_boundary_radius!r}
PREFIX = {prefix!r}

df = pd.read_csv(os.path.join(HERE, {csv_name!r}), float_precision="round_trip")
agents = sorted(df.agent_id.unique())
group = df[df.agent_id == agents[0]]


def circle(ax, center, radius, **kwargs):
    angles = np.linspace(0, 2 * np.pi, 361)
    points = center + radius * np.exp(1j * angles)
    ax.plot(points.real, points.imag, **kwargs)


def save(fig, name):
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, PREFIX + "_" + name + ".png"), dpi=120)


# Trajectories in both planes
fig, (axo, axt) = plt.subplots(ncols=2, figsize=(11, 5.5))
circle(axo, DESIRED_CENTER, DESIRED_RADIUS, color="k", ls="--", lw=1, label="desired")
circle(axo, BOUNDARY_CENTER, BOUNDARY_RADIUS, color="r", lw=1, label="boundary")
circle(axt, 0, abs(SIGMA), color="k", ls="--", lw=1)
for agent in agents:
    sub = df[df.agent_id == agent]
    axo.plot(sub["re(r)"], sub["im(r)"], lw=0.8, label=f"agent {{agent}}")
    axo.plot(sub["re(r)"].iloc[0], sub["im(r)"].iloc[0], "o", ms=3, color="k")
    axt.plot(sub["re(rho)"], sub["im(rho)"], lw=0.8)
axo.set_title("Original plane")
axt.set_title("Transformed plane")
for ax in axo, axt:
    ax.set_aspect("equal")
    ax.grid(alpha=0.3)
axo.legend(fontsize="small", loc="upper left")
save(fig, "trajectories")

# Trajectories in the user frame
if "re(r_user)" in df.columns:
    fig, axu = plt.subplots(figsize=(6, 6))
    circle(axu, USER_DESIRED_CENTER, USER_DESIRED_RADIUS, color="k", ls="--", lw=1)
    circle(axu, USER_BOUNDARY_CENTER, USER_BOUNDARY_RADIUS, color="r", lw=1)
    for agent in agents:
        sub = df[df.agent_id == agent]
        axu.plot(sub["re(r_user)"], sub["im(r_user)"], lw=0.8, label=f"agent {{agent}}")
    axu.set_title("User frame")
    axu.set_aspect("equal")
    axu.grid(alpha=0.3)
    axu.legend(fontsize="small", loc="upper left")
    save(fig, "user_trajectories")

# Errors
fig, (axe, axE) = plt.subplots(nrows=2, sharex=True, figsize=(8, 6))
for agent in agents:
    sub = df[df.agent_id == agent]
    axe.semilogy(sub.t, sub.abs_e, lw=0.8, label=f"agent {{agent}}")
    axE.semilogy(sub.t, sub.abs_E, lw=0.8)
axe.set_ylabel("|e|")
axE.set_ylabel("|E|")
axE.set_xlabel("time [s]")
axe.legend(fontsize="small")
save(fig, "errors")

# Speeds
fig, (axv, axs) = plt.subplots(nrows=2, sharex=True, figsize=(8, 6))
for agent in agents:
    sub = df[df.agent_id == agent]
    axv.plot(sub.t, sub.v, lw=0.8, label=f"agent {{agent}}")
    axs.plot(sub.t, sub.s, lw=0.8)
axs.axhline(S_D, color="k", ls="--", lw=1)
axs.axhspan(S_D - DELTA_S, S_D + DELTA_S, color="0.9", zorder=0)
axv.set_ylabel("v")
axs.set_ylabel("s")
axs.set_xlabel("time [s]")
axv.legend(fontsize="small")
save(fig, "speeds")

# Controls
fig, axes = plt.subplots(nrows=2, ncols=2, sharex=True, figsize=(10, 6))
for name, ax in zip(("u", "omega", "nu", "Omega"), axes.flat):
    for agent in agents:
        sub = df[df.agent_id == agent]
        ax.plot(sub.t, sub[name], lw=0.8)
    ax.set_ylabel(name)
    ax.grid(alpha=0.3)
for ax in axes[-1]:
    ax.set_xlabel("time [s]")
save(fig, "controls")

# Group signals
fig, (axv, axq) = plt.subplots(nrows=2, sharex=True, figsize=(8, 5))
axv.plot(group.t, group.V, color="k")
axv.set_ylabel("V")
axq.plot(group.t, group.abs_q, color="k")
axq.set_ylabel("|q|")
axq.set_ylim(-0.05, 1.05)
axq.set_xlabel("time [s]")
save(fig, "group")

if "--show" in sys.argv:
    plt.show()
'''


def render_plot_script(csv_name, config=None, prefix=None):
    """Render the source of a plot script

    Parameters
    ----------
    csv_name: str
        Name of the CSV file, relative to the script
    config: None, SimConfig
        Source of the circles, of sigma and of the speed barrier, in the
        canonical frame of the logged positions and in its user frame.
        Defaults to the bundled configuration.
    prefix: None, str
        Prefix of figure files, defaulting to the CSV file stem

    Return
    ------
    str
    """
    if prefix is None:
        prefix = os.path.splitext(os.path.basename(csv_name))[0]
    if config is None:
        lam, mu, sigma = 0.5, 2.5 ** 0.5, 0.5
        s_d = delta_s = 0.06
        frame = None
    else:
        lam, mu, sigma = config.ctx.pair.lam, config.ctx.pair.mu, config.ctx.sigma
        s_d, delta_s = config.gains.s_d, config.gains.delta_s
        frame = config.frame
    if frame is None:
        frame = FrameTransform()
    return PLOT_SCRIPT_TEMPLATE.format(
        csv_name=os.path.basename(csv_name),
        script_name="plot_" + prefix + ".py",
        desired_center=0j,
        desired_radius=1.0,
        boundary_center=complex(lam),
        boundary_radius=float(mu),
        sigma=float(sigma),
        s_d=float(s_d),
        delta_s=float(delta_s),
        user_desired_center=complex(frame.from_canonical_point(0j)),
        user_desired_radius=float(1 / frame.scale),
        user_boundary_center=complex(frame.from_canonical_point(complex(lam))),
        user_boundary_radius=float(mu / frame.scale),
        prefix=prefix,
    )


def write_plot_script(path, csv_name, config=None):
    """Write a standalone plot script that reads `csv_name`

    Return
    ------
    str
        The path
    """
    with open(path, "w") as f:
        f.write(render_plot_script(csv_name, config))
    logger.info("Plot script written to: %s", path)
    return path
