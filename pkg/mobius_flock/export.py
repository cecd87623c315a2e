#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Export of trajectory logs and monitor reports
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
import json
import logging

import numpy as np
import pandas as pd

from . import FlockError

logger = logging.getLogger(__name__)

#: CSV columns and the log variables they come from
CSV_COLUMNS = {
    "t": "time",
    "agent_id": "agent",
    "re(r)": "r_re",
    "im(r)": "r_im",
    "v": "v",
    "theta": "theta",
    "re(rho)": "rho_re",
    "im(rho)": "rho_im",
    "s": "s",
    "gamma": "gamma",
    "abs_e": "abs_e",
    "abs_E": "abs_E",
    "u": "u",
    "omega": "omega",
    "nu": "nu",
    "Omega": "Omega",
    "V": "V",
    "abs_q": "abs_q",
}

#: Extra CSV columns of logs with a user frame
USER_CSV_COLUMNS = {
    "re(r_user)": "r_user_re",
    "im(r_user)": "r_user_im",
    "v_user": "v_user",
    "theta_user": "theta_user",
}

#: Format that round trips double precision floats
FLOAT_FORMAT = "%.17g"


def log_to_dataframe(log):
    """Convert a trajectory log to a long :class:`pandas.DataFrame`

    There is one row per logged sample and agent, sorted by time then
    agent. Group variables are repeated for all agents. Positions, speeds
    and headings in the user frame are appended when the log has them.

    Parameters
    ----------
    log: xarray.Dataset

    Return
    ------
    pandas.DataFrame
        With the :data:`CSV_COLUMNS` columns, then the
        :data:`USER_CSV_COLUMNS` ones if any
    """
    columns = dict(CSV_COLUMNS)
    if set(USER_CSV_COLUMNS.values()) <= set(log.data_vars):
        columns.update(USER_CSV_COLUMNS)
    names = [name for name in columns.values() if name not in ("time", "agent")]
    df = log[names].to_dataframe().reset_index()
    df = df.rename(columns={value: key for key, value in columns.items()})
    df["agent_id"] = df["agent_id"].astype("int64")
    return df[list(columns)].sort_values(["t", "agent_id"], kind="stable").reset_index(
        drop=True
    )


def write_trajectory_csv(log, path):
    """Write a trajectory log to a CSV file with full precision

    Return
    ------
    str
        The path
    """
    log_to_dataframe(log).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("Trajectory written to: %s", path)
    return path


def read_trajectory_csv(path):
    """Read a CSV file written by :func:`write_trajectory_csv`

    Return
    ------
    pandas.DataFrame
    """
    df = pd.read_csv(path, float_precision="round_trip")
    missing = set(CSV_COLUMNS) - set(df.columns)
    if missing:
        raise FlockError(f"Missing columns in {path}: {', '.join(sorted(missing))}")
    return df


def _jsonify_(value):
    if isinstance(value, dict):
        return {str(key): _jsonify_(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify_(item) for item in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def write_report(report, path, **extra):
    """Write a monitor report to a JSON file

    Parameters
    ----------
    report: MonitorReport, dict
    path: str
    extra:
        Other items added to the file

    Return
    ------
    str
        The path
    """
    content = report.to_dict() if hasattr(report, "to_dict") else dict(report)
    content.update(extra)
    with open(path, "w") as f:
        json.dump(_jsonify_(content), f, indent=2, sort_keys=True)
    logger.info("Monitor report written to: %s", path)
    return path


def read_report(path):
    """Read a JSON monitor report"""
    with open(path) as f:
        return json.load(f)


def write_netcdf(log, path):
    """Write a trajectory log to a netcdf file"""
    log.to_netcdf(path)
    logger.info("Trajectory written to: %s", path)
    return path


def get_output_paths(outdir, prefix="trajectory"):
    """Paths of the files written by a run in `outdir`"""
    return {
        "csv": os.path.join(outdir, prefix + ".csv"),
        "report": os.path.join(outdir, "monitor_report.json"),
        "plot": os.path.join(outdir, "plot_" + prefix + ".py"),
        "netcdf": os.path.join(outdir, prefix + ".nc"),
    }
