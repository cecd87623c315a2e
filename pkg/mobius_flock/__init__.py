#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Collective circular motion of unicycle agents under nonconcentric circular boundaries

Agents are steered onto a desired circle while staying inside an offset boundary
circle, by designing barrier-Lyapunov controllers in a Möbius-transformed plane
where both circles become concentric.
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
import re
import warnings
import platform
from importlib import metadata

import appdirs
import configobj

try:
    from configobj import validate
except ImportError:
    import validate


try:
    __version__ = metadata.version("mobius_flock")
except Exception:
    # Local copy or not installed
    __version__ = "999"

_RE_OPTION_MATCH = re.compile(r"^(\w+)\W(\w+)$").match

#: Specifications of configuration options
CONFIG_SPECS = """
[sim] # default integration parameters
dt = float(min=0, max=0.01, default=0.001) # time step in seconds
t_final = float(min=0, default=500.) # simulation horizon in seconds
log_stride = integer(min=1, default=10) # log every n steps
max_halvings = integer(min=0, max=40, default=20) # halvings of a step that leaves the barriers

[monitor] # convergence and monitor thresholds
error_threshold = float(min=0, default=0.01) # maximal |e_k| of a converged agent
sync_threshold = float(min=0, max=1, default=0.99) # |q| above which agents are synchronized
balance_threshold = float(min=0, max=1, default=0.01) # |q| below which agents are balanced
sustain = float(min=0, default=10.) # dwell time in seconds of the convergence criteria
lyapunov_rtol = float(min=0, default=1e-9) # tolerated increment of the Lyapunov function
envelope_slack = float(min=0, default=1e-9) # slack of the a posteriori bound checks
cross_tolerance = float(min=0, default=1e-6) # maximal distance between both planes integrations

[output] # output files
directory = string(default="mobius_flock_output") # default output directory
"""

#: Default user configuration file
DEFAULT_USER_CONFIG_FILE = os.path.join(
    appdirs.user_config_dir("mobius_flock"), "mobius_flock.cfg"
)

#: Environment variable that overrides the default output directory
OUTPUT_DIR_ENV_VAR = "MOBIUS_FLOCK_OUT"

# Directory of sample files
_SAMPLE_DIR = os.path.join(os.path.dirname(__file__), '_samples')

_PACKAGES = [
    "appdirs",
    "configobj",
    "netCDF4",
    "numba",
    "numpy",
    "pandas",
    "scipy",
    "xarray",
]


class FlockError(Exception):
    pass


class FlockConfigError(FlockError):
    pass


class FlockWarning(UserWarning):
    pass


def flock_warn(message, stacklevel=2):
    """Issue a :class:`FlockWarning` warning

    Example
    -------
    .. ipython:: python
        :okwarning:

        @suppress
        from mobius_flock import flock_warn
        flock_warn('Be careful!')
    """
    warnings.warn(message, FlockWarning, stacklevel=stacklevel)


_FLOCK_CACHE = {}


def _get_cache_():
    return _FLOCK_CACHE


def load_options(cfgfile=None):
    """Load specified options

    Parameters
    ----------
    cfgfile: file, list(str), dict

    Example
    -------
    .. ipython:: python

        @suppress
        from mobius_flock import load_options
        # Dict
        load_options({'sim': {'dt': 0.002}})

        # Lines
        optlines = "[sim]\\n dt=0.002".split('\\n')
        load_options(optlines)
    """
    cache = _get_cache_()

    if "cfgspecs" not in cache:
        cache["cfgspecs"] = configobj.ConfigObj(
            CONFIG_SPECS.split("\n"),
            list_values=False,
            interpolation=False,
            raise_errors=True,
            file_error=True,
        )
    if "options" not in cache:
        cache["options"] = configobj.ConfigObj(
            (DEFAULT_USER_CONFIG_FILE if os.path.exists(DEFAULT_USER_CONFIG_FILE) else None),
            configspec=cache["cfgspecs"],
            file_error=False,
            raise_errors=True,
            list_values=True,
        )
    if cfgfile:
        cache["options"].merge(
            configobj.ConfigObj(cfgfile, file_error=True, raise_errors=True, list_values=True)
        )
    if cache["options"].validate(validate.Validator(), copy=True) is not True:
        raise FlockConfigError("Invalid options: " + str(cfgfile))


def _get_options_():
    cache = _get_cache_()
    if "options" not in cache:
        load_options()
    return cache["options"]


def get_option(section, option=None):
    """Get a config option

    Example
    -------
    .. ipython:: python

        @suppress
        from mobius_flock import get_option
        print(get_option('sim', 'dt'))
        print(get_option('sim.dt'))
    """
    options = _get_options_()
    if option is None:
        m = _RE_OPTION_MATCH(section)
        if m:
            section, option = m.groups()
        else:
            raise FlockConfigError("You must provide an option name to get_option")
    try:
        value = options[section][option]
    except Exception:
        raise FlockConfigError(f"Invalid section/option: {section}/{option}")
    return value


class set_options(object):
    """Set configuration options

    Parameters
    ----------
    section: str, None
    **options: dict
        If a key is in the format "<section>.<option>", then the section
        is overwritten.

    Example
    -------
    .. ipython:: python

        @suppress
        from mobius_flock import set_options, get_option

        # Classic: for the session
        set_options('monitor', sustain=5.0)

        # Context: temporary
        with set_options('sim', dt=0.005):
            print('within context:', get_option('sim.dt'))
        print('after context:', get_option('sim.dt'))
    """

    def __init__(self, section=None, **options):
        self.cache = _get_cache_()
        self.old_options = self.cache.get("options")
        if "options" in self.cache:
            del self.cache["options"]
        opts = {}
        for option, value in options.items():
            m = _RE_OPTION_MATCH(option)
            if m:
                sec, option = m.groups()
            else:
                if section is None:
                    raise FlockConfigError(
                        "You must specify the section explicitly or through the option name"
                    )
                sec = section
            opts.setdefault(sec, {})[option] = value

        # Start from the current state of the session
        if self.old_options is not None:
            current = self.old_options.dict()
            for sec, values in opts.items():
                current.setdefault(sec, {}).update(values)
            opts = current

        load_options(opts)

    def __enter__(self):
        return self.cache["options"]

    def __exit__(self, type, value, traceback):
        if self.old_options:
            self.cache["options"] = self.old_options
        else:
            del self.cache["options"]


def set_option(option, value):
    """Set a single option using the flat format, i.e ``section.option``

    Example
    -------
    .. ipython:: python

        @suppress
        from mobius_flock import set_option
        set_option('monitor.sustain', 10.0);
    """
    return set_options(None, **{option: value})


def reset_options():
    """Restore options to their default values in the current session"""
    cache = _get_cache_()
    cache.pop('options', None)


def show_options(specs=False):
    """Print current configuration

    Parameters
    ----------
    specs: bool
        Print option specifications instead
    """
    if specs:
        print(CONFIG_SPECS.strip("\n"))
    else:
        print("\n".join(_get_options_().write()).strip("\n").replace('#', ' #'))


def get_output_dir(out=None):
    """Get the output directory

    The precedence is: `out`, then the :envvar:`MOBIUS_FLOCK_OUT` environment variable,
    then the ``output.directory`` option.
    """
    if out:
        return out
    if os.environ.get(OUTPUT_DIR_ENV_VAR):
        return os.environ[OUTPUT_DIR_ENV_VAR]
    return get_option("output.directory")


def show_versions():
    """Print the versions of mobius_flock and of some dependencies"""
    print("- python:", platform.python_version())
    print("- mobius_flock:", __version__)
    for package in _PACKAGES:
        try:
            version = metadata.version(package)
        except metadata.PackageNotFoundError:
            version = "NOT INSTALLED or UKNOWN"
        print(f"- {package}: {version}")


def show_paths():
    """Print some mobius_flock paths"""
    print("- mobius_flock library dir:", os.path.dirname(__file__))
    path = DEFAULT_USER_CONFIG_FILE
    asterix = not os.path.exists(path)
    print("- user config file:", path + (" [*]" if asterix else ""))
    print("- data samples:", " ".join(get_data_sample()))
    if asterix:
        print("*: file not present")


def show_info(opt_specs=True):
    """Print mobius_flock related info"""
    print("# VERSIONS")
    show_versions()
    print("\n# FILES AND DIRECTORIES")
    show_paths()
    print("\n# OPTIONS")
    show_options(specs=opt_specs)


def get_data_sample(filename=None):
    """Get the absolute path to a sample file

    Parameters
    ----------
    filename: str, None
        Name of the sample. If ommited, a list of available samples
        name is returned. The ``.cfg`` extension may be omitted.

    Returns
    -------
    str OR list(str)

    Example
    -------
    .. ipython:: python

        @suppress
        from mobius_flock import get_data_sample
        get_data_sample("paper_sync.cfg")
        get_data_sample()
    """
    if not os.path.exists(_SAMPLE_DIR):
        filenames = []
    else:
        filenames = sorted(os.listdir(_SAMPLE_DIR))
    if filename is None:
        return filenames
    if filename not in filenames and filename + ".cfg" in filenames:
        filename += ".cfg"
    if filename not in filenames:
        raise FlockError('Invalid data sample: "{}"'.format(filename))
    return os.path.join(_SAMPLE_DIR, filename)
