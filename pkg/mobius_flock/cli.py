#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Commandline interface for mobius_flock
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
import sys
import json
import logging
import argparse
import dataclasses

from . import (
    FlockError,
    get_output_dir,
    show_info,
    show_versions,
    show_paths,
    show_options,
)

#: Exit status of failed monitors or checks
EXIT_FAILED = 1

#: Exit status of errors
EXIT_ERROR = 2

DEFAULT_CONFIG = "paper_sync"


@dataclasses.dataclass
class RunManifest:
    """Summary of a run and of the files it emitted"""

    config: str
    output_dir: str
    artifacts: list = dataclasses.field(default_factory=list)
    exit_status: int = 0

    def to_dict(self):
        return dataclasses.asdict(self)


def get_parser(formatter_class=argparse.ArgumentDefaultsHelpFormatter):

    parser = argparse.ArgumentParser(
        description="mobius_flock interface", formatter_class=formatter_class
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="increase the verbosity"
    )
    subparsers = parser.add_subparsers(help="sub-command help")

    parser_info = subparsers.add_parser("info", help="info about mobius_flock")
    parser_info.add_argument(
        "category",
        help="info category",
        nargs="?",
        choices=("all", "paths", "versions", "options"),
        default="all",
    )
    parser_info.set_defaults(func=main_info)

    def add_config_arguments(subparser):
        subparser.add_argument(
            "--config",
            default=DEFAULT_CONFIG,
            help="configuration file or name of a bundled sample",
        )
        subparser.add_argument(
            "--root", choices=("smaller", "larger"), help="root of the Möbius map"
        )
        subparser.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.OPTION=VALUE",
            help="override a configuration value",
        )

    parser_geometry = subparsers.add_parser(
        "geometry", help="show the Möbius map of the circles of a configuration"
    )
    add_config_arguments(parser_geometry)
    parser_geometry.set_defaults(func=main_geometry)

    parser_run = subparsers.add_parser("run", help="run a simulation")
    add_config_arguments(parser_run)
    parser_run.add_argument("--out", help="output directory")
    parser_run.add_argument(
        "--plane", choices=("original", "transformed", "crosscheck"), help="plane of integration"
    )
    parser_run.add_argument("--pattern", choices=("sync", "balance"), help="collective pattern")
    parser_run.add_argument("--dt", type=float, help="time step in seconds")
    parser_run.add_argument("--t-final", type=float, help="horizon in seconds")
    parser_run.add_argument("--log-stride", type=int, help="number of steps between samples")
    parser_run.add_argument(
        "--netcdf", action="store_true", help="also write the trajectory to a netcdf file"
    )
    parser_run.set_defaults(func=main_run)

    parser_verify = subparsers.add_parser("verify", help="run the acceptance suite")
    parser_verify.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.OPTION=VALUE",
        help="override a value of the reference configurations",
    )
    parser_verify.add_argument("--dt", type=float, help="time step in seconds")
    parser_verify.add_argument("--jobs", type=int, default=1, help="number of processes")
    parser_verify.add_argument("--checks", nargs="+", help="subset of checks")
    parser_verify.set_defaults(func=main_verify)

    return parser


def main(argv=None, formatter_class=argparse.ArgumentDefaultsHelpFormatter):

    parser = get_parser(formatter_class=formatter_class)
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(
            level=logging.DEBUG if args.verbose > 1 else logging.INFO,
            format="%(asctime)s %(name)s %(levelname)s: %(message)s",
        )
    if not hasattr(args, "func"):
        parser.print_help()
        return EXIT_ERROR
    return args.func(parser, args)


def _error_(exc):
    print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
    return EXIT_ERROR


def _get_patch_(args):
    patch = []
    if args.root:
        patch.append(f"geometry.root={args.root}")
    for option in ("plane", "pattern", "dt", "t_final", "log_stride"):
        value = getattr(args, option, None)
        if value is not None:
            patch.append(f"sim.{option}={value}")
    return patch + args.overrides


def main_info(parser, args):
    if args.category == "all":
        show_info()
    elif args.category == "versions":
        show_versions()
    elif args.category == "paths":
        show_paths()
    elif args.category == "options":
        show_options()
    return 0


def main_geometry(parser, args):
    from . import config as mconfig
    from . import geometry as mgeo

    try:
        cfg = mconfig.load_run_config(args.config, _get_patch_(args))
        pair, frame, ctx = mconfig.build_geometry(cfg)
        small, large = mgeo.solve_alpha(pair)
    except FlockError as e:
        return _error_(e)
    print(f"lambda: {pair.lam:.12g}")
    print(f"mu: {pair.mu:.12g}")
    print(f"roots: {small:.12g} {large:.12g}")
    print(f"chosen root: {ctx.alpha:.12g} ({ctx.root_kind.name})")
    print(f"sigma: {ctx.sigma:.12g}")
    print(f"image radius of the desired circle: {ctx.radius_inner:.12g}")
    print(f"image radius of the boundary circle: {ctx.radius_outer:.12g}")
    print(f"delta_T: {ctx.delta_t:.12g}")
    if not frame.is_identity:
        print(
            f"user frame: translation={frame.translation:.12g} "
            f"rotation={frame.rotation:.12g} scale={frame.scale:.12g}"
        )
    return 0


def main_run(parser, args):
    from . import config as mconfig
    from . import sim as msim
    from . import export as mexport
    from . import plot as mplot

    outdir = get_output_dir(args.out)
    manifest = RunManifest(config=args.config, output_dir=outdir)
    try:
        config = mconfig.load_sim_config(args.config, _get_patch_(args))
        log, report = msim.run(config)
    except FlockError as e:
        return _error_(e)

    os.makedirs(outdir, exist_ok=True)
    paths = mexport.get_output_paths(outdir)
    manifest.artifacts.append(mexport.write_trajectory_csv(log, paths["csv"]))
    manifest.artifacts.append(
        mexport.write_report(report, paths["report"], config=args.config, **log.attrs)
    )
    manifest.artifacts.append(mplot.write_plot_script(paths["plot"], paths["csv"], config))
    if args.netcdf:
        manifest.artifacts.append(mexport.write_netcdf(log, paths["netcdf"]))
    manifest.exit_status = 0 if report.passed else EXIT_FAILED

    with open(os.path.join(outdir, "manifest.json"), "w") as f:
        json.dump(manifest.to_dict(), f, indent=2)
    for name, ok in report.flags.items():
        print(f"{name}: {'ok' if ok else 'FAILED'}")
    if report.cross_divergence is not None:
        print(f"cross plane divergence: {report.cross_divergence:.3e}")
    print("files:", " ".join(manifest.artifacts))
    return manifest.exit_status


def main_verify(parser, args):
    from . import verify as mverify

    try:
        results = mverify.run_verify(
            checks=args.checks, patch=args.overrides, dt=args.dt, jobs=args.jobs
        )
    except FlockError as e:
        return _error_(e)
    print(mverify.format_results(results))
    return 0 if all(res.passed for res in results) else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
