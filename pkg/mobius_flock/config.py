#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Simulation configuration files

A configuration file is a :mod:`configobj` file validated against
:data:`RUN_CONFIG_SPECS`. Positions, speeds and headings are given in the
user frame and converted to the canonical frame of the circle pair.

.. code-block:: ini

    [geometry]
    desired_center = 0, 0
    desired_radius = 1
    boundary_center = 0.5, 0
    boundary_radius = 1.5811388300841898

    [control]
    K = -0.04

    [agents]
    number = 5
    seed = 0
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

import numpy as np
from configobj import ConfigObj, ConfigObjError, flatten_errors

try:
    from configobj import validate
except ImportError:
    import validate

from . import FlockConfigError, get_data_sample, get_option
from . import geometry as mgeo
from . import graph as mgraph
from . import dynamics as mdyn
from . import control as mctl
from . import sim as msim

logger = logging.getLogger(__name__)

#: Specifications of simulation configuration files
RUN_CONFIG_SPECS = """
[geometry] # circles in the user frame
desired_center = float_list(min=2, max=2, default=list(0., 0.)) # center of the desired circle
desired_radius = float(min=0, default=1.) # radius of the desired circle
boundary_center = float_list(min=2, max=2, default=list(0.5, 0.)) # center of the boundary circle
boundary_radius = float(min=0, default=1.5811388300841898) # radius of the boundary circle
root = option("smaller", "larger", default="smaller") # root of the Möbius map

[graph] # interaction graph
preset = option("cycle", "path", "complete", "star", default="cycle") # named topology
edges = string_list(default=list()) # explicit 1-based edges like "1-2", that supersede the preset

[control] # controller gains
kappa1 = float(default=0.004) # gain of the radial barrier term
kappa2 = float(default=10.) # gain of the speed error
K = float(default=-0.04) # coupling gain, negative to synchronize, positive to balance
s_d = float(default=0.06) # desired speed in the transformed plane
delta_s = float(default=0.06) # half-width of the speed barrier

[agents] # initial conditions in the user frame
x = float_list(default=list()) # abscissas
y = float_list(default=list()) # ordinates
radius = float_list(default=list()) # distances to the user frame origin, if no x/y
phase = float_list(default=list()) # polar angles in degrees, if no x/y
speed = float_list(default=list()) # speeds
heading = float_list(default=list()) # headings in degrees
number = integer(min=1, default=None) # number of random agents when no position is given
seed = integer(default=None) # seed of random agents
margin = float(min=0, max=1, default=0.8) # fraction of the barriers spanned by random agents

[sim] # integration
plane = option("original", "transformed", "crosscheck", default="original") # plane of integration
pattern = option("auto", "sync", "balance", default="auto") # pattern, auto for the sign of K
dt = float(min=0, max=0.01, default=None) # time step, defaults to the sim.dt option
t_final = float(min=0, default=None) # horizon, defaults to the sim.t_final option
log_stride = integer(min=1, default=None) # log stride, defaults to the sim.log_stride option
max_halvings = integer(min=0, max=40, default=None) # defaults to the sim.max_halvings option
"""


class FlockValidateError(validate.ValidateError, FlockConfigError):
    pass


def get_config_specs():
    """Get the :class:`~configobj.ConfigObj` specifications of configurations"""
    return ConfigObj(RUN_CONFIG_SPECS.split("\n"), list_values=False, interpolation=False)


def parse_overrides(overrides):
    """Convert flat ``section.option=value`` strings to a nested dict

    Comma separated values are converted to lists.

    Example
    -------
    .. ipython:: python

        @suppress
        from mobius_flock.config import parse_overrides
        parse_overrides(["control.kappa1=0.01", "agents.speed=0.1,0.2"])
    """
    patch = {}
    for override in overrides or []:
        key, sep, value = override.partition("=")
        section, dot, option = key.strip().partition(".")
        if not sep or not dot or not option:
            raise FlockConfigError(f"Invalid override, expecting section.option=value: {override}")
        value = value.strip()
        if "," in value:
            value = [item.strip() for item in value.split(",") if item.strip()]
        patch.setdefault(section, {})[option] = value
    return patch


def _resolve_path_(cfgfile):
    if isinstance(cfgfile, str) and not os.path.exists(cfgfile):
        try:
            return get_data_sample(cfgfile)
        except Exception:
            raise FlockConfigError(f"Configuration file not found: {cfgfile}")
    return cfgfile


def load_run_config(cfgfile=None, patch=None):
    """Load and validate a simulation configuration

    Parameters
    ----------
    cfgfile: None, str, list(str), dict
        A path, the name of a bundled sample like ``"paper_sync"``,
        config lines or a dict. ``None`` gives the defaults.
    patch: None, dict, list(str)
        Nested dict or list of ``section.option=value`` strings that
        override `cfgfile`

    Return
    ------
    configobj.ConfigObj
    """
    try:
        cfg = ConfigObj(
            _resolve_path_(cfgfile),
            configspec=get_config_specs(),
            interpolation=False,
            file_error=True,
        )
    except (ConfigObjError, IOError) as e:
        raise FlockConfigError(f"Cannot read configuration {cfgfile}: {e}")
    if patch:
        if not isinstance(patch, dict):
            patch = parse_overrides(patch)
        cfg.merge(patch)

    err = cfg.validate(validate.Validator(), preserve_errors=True)
    if isinstance(err, dict):
        for sections, key, error in flatten_errors(cfg, err):
            section = ("[" + "][".join(sections) + "] ") if sections else ""
            raise FlockValidateError(
                "Config value error: {}{}: {}".format(
                    section, key, error if isinstance(error, Exception) else "missing value"
                )
            )
    return cfg


def _get_initial_states_(cfg, ctx, gains, frame):
    agents = cfg["agents"]
    if agents["x"] or agents["y"]:
        if len(agents["x"]) != len(agents["y"]):
            raise FlockConfigError("[agents] x and y must have the same length")
        r = np.array(agents["x"]) + 1j * np.array(agents["y"])
    elif agents["radius"]:
        if len(agents["radius"]) != len(agents["phase"]):
            raise FlockConfigError("[agents] radius and phase must have the same length")
        r = np.array(agents["radius"]) * np.exp(1j * np.deg2rad(agents["phase"]))
    else:
        if agents["number"] is None:
            raise FlockConfigError("[agents] positions or a number of random agents is needed")
        return msim.random_initial_states(
            ctx, gains, agents["number"], agents["seed"], agents["margin"]
        )
    if len(agents["speed"]) != r.size or len(agents["heading"]) != r.size:
        raise FlockConfigError("[agents] speed and heading must have one value per agent")
    return mdyn.OriginalState(
        *frame.to_canonical(r, np.array(agents["speed"]), np.deg2rad(agents["heading"]))
    )


def _get_graph_(cfg, n):
    if n == 1:
        return None
    if cfg["graph"]["edges"]:
        edges = []
        for edge in cfg["graph"]["edges"]:
            try:
                edges.append(tuple(int(k) for k in edge.split("-")))
            except ValueError:
                raise FlockConfigError(f"Invalid edge: {edge}")
        return mgraph.build_graph(n, edges)
    return mgraph.get_preset_graph(cfg["graph"]["preset"], n)


def build_geometry(cfg):
    """Get the canonical circle pair, the user frame and the Möbius context of a configuration

    Return
    ------
    CanonicalCirclePair
    FrameTransform
    MobiusContext
    """
    geo = cfg["geometry"]
    pair, frame = mgeo.normalize_circles(
        complex(*geo["desired_center"]),
        geo["desired_radius"],
        complex(*geo["boundary_center"]),
        geo["boundary_radius"],
    )
    return pair, frame, mgeo.get_mobius_context(pair, geo["root"])


def build_sim_config(cfg):
    """Convert a validated configuration into a :class:`~mobius_flock.sim.SimConfig`

    Parameters
    ----------
    cfg: configobj.ConfigObj
        As returned by :func:`load_run_config`

    Return
    ------
    SimConfig
    """
    _, frame, ctx = build_geometry(cfg)

    control = dict(cfg["control"])
    pattern = cfg["sim"]["pattern"]
    if pattern != "auto":
        sign = -1 if mctl.patterns(pattern) == mctl.patterns.sync else 1
        if control["K"] * sign < 0:
            logger.info("Coupling gain sign changed to match the %s pattern", pattern)
        control["K"] = sign * abs(control["K"])
    gains = mctl.ControllerGains(**control)

    states = _get_initial_states_(cfg, ctx, gains, frame)
    sim = cfg["sim"]
    return msim.SimConfig(
        ctx=ctx,
        gains=gains,
        graph=_get_graph_(cfg, len(states)),
        initial_states=states,
        dt=sim["dt"] if sim["dt"] is not None else get_option("sim.dt"),
        t_final=sim["t_final"] if sim["t_final"] is not None else get_option("sim.t_final"),
        plane=sim["plane"],
        log_stride=(
            sim["log_stride"] if sim["log_stride"] is not None else get_option("sim.log_stride")
        ),
        seed=cfg["agents"]["seed"],
        frame=frame,
        max_halvings=sim["max_halvings"],
    )


def load_sim_config(cfgfile=None, patch=None):
    """Shortcut to :func:`load_run_config` followed by :func:`build_sim_config`"""
    return build_sim_config(load_run_config(cfgfile, patch))
