"""Plain-text scenario files.

Format: one ``key = value`` per line, ``#`` starts a comment, sections in
brackets. Units are SI throughout, except that a flux key may carry the
suffix ``_mg_per_m2_yr`` instead of being given in kg/m^2/s.

::

    name = my-case              # optional, before any section
    [fluid]                     # optional overrides of the fluid defaults
    D = 3e-9
    [mesh]
    length = 200
    n_cells = 200
    cross_section = 1           # optional
    gravity = 0                 # optional, m/s^2 along +x
    [rock.argillite]            # one or more; zone bounds optional
    k = 5e-20
    phi = 0.15
    P_r = 2e6
    n = 1.49
    S_lr = 0.4
    S_gr = 0                    # optional
    x_min = 0                   # optional, default -inf
    x_max = 200                 # optional, default +inf
    [bc.left]
    kind = neumann
    water_flux = 0
    hydrogen_flux_mg_per_m2_yr = 9.28
    [bc.right]
    kind = dirichlet
    p_l = 1e6
    rho_l_h = 0                 # or p_g = ..., meaning rho_l_h = C_h p_g
    [ic.all]                    # one or more; same keys as a Dirichlet bc
    p_l = 1e6
    rho_l_h = 0
    [time]
    t_end = 3.1536e13
    dt_init = 3.1536e9
    dt_min = 3.1536e6
    dt_max = 1.5768e12
    snapshots = 3.78432e10, 1.26144e12
    time_unit = 3.1536e7        # optional, only affects reporting

Rock and initial-condition zones are matched to cells by centre, first
section wins.
"""
from __future__ import annotations

import dataclasses
import math
import re
from pathlib import Path

from .constitutive import RockParams
from .fluid import FluidParams
from .scenarios import (BoundaryCondition, InitialZone, Mesh1D, Scenario, Zone,
                        mg_per_m2_yr)

_FLUX_SUFFIX = "_mg_per_m2_yr"
_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)(?:\.([A-Za-z0-9_\-]+))?\s*\]$")

_FLUID_KEYS = {f.name for f in dataclasses.fields(FluidParams) if f.init}
_ROCK_KEYS = {"k", "phi", "P_r", "n", "S_lr", "S_gr", "x_min", "x_max"}
_MESH_KEYS = {"length", "n_cells", "cross_section", "gravity"}
_BC_KEYS = {"kind", "water_flux", "hydrogen_flux", "p_l", "rho_l_h", "p_g"}
_IC_KEYS = {"p_l", "rho_l_h", "p_g", "x_min", "x_max"}
_TIME_KEYS = {"t_end", "dt_init", "dt_min", "dt_max", "snapshots", "time_unit"}


class ConfigError(ValueError):
    """Malformed or physically invalid scenario file."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}:" + (f"{line}:" if line is not None else "") + " "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.line = line


class _Section:
    def __init__(self, kind, name, line):
        self.kind = kind
        self.name = name
        self.line = line
        self.values: dict[str, tuple[str, int]] = {}

    @property
    def label(self):
        return f"[{self.kind}.{self.name}]" if self.name else f"[{self.kind}]"


def _parse(text, path):
    top = _Section("", None, 0)
    sections = []
    current = top
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = _SECTION.match(line)
            if not m:
                raise ConfigError(f"malformed section header {line!r}", path, lineno)
            kind, name = m.group(1), m.group(2)
            if kind in ("rock", "ic", "bc") and not name:
                raise ConfigError(f"[{kind}] needs a name, e.g. [{kind}.left]", path, lineno)
            if kind in ("fluid", "mesh", "time") and name:
                raise ConfigError(f"[{kind}] takes no name", path, lineno)
            if kind not in ("fluid", "mesh", "time", "rock", "ic", "bc"):
                raise ConfigError(f"unknown section [{kind}]", path, lineno)
            current = _Section(kind, name, lineno)
            if any(s.kind == kind and s.name == name for s in sections):
                raise ConfigError(f"duplicate section {current.label}", path, lineno)
            sections.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", path, lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"expected 'key = value', got {line!r}", path, lineno)
        if key in current.values:
            raise ConfigError(f"duplicate key {key!r}", path, lineno)
        current.values[key] = (value, lineno)
    return top, sections


def _number(sec, key, path, required=True, default=None, integer=False):
    if key not in sec.values:
        if required:
            raise ConfigError(f"missing required key {key!r} in {sec.label}", path, sec.line)
        return default
    text, lineno = sec.values[key]
    try:
        v = int(text) if integer else float(text)
    except ValueError:
        kind = "an integer" if integer else "a number"
        raise ConfigError(f"{key} must be {kind}, got {text!r}", path, lineno) from None
    if not integer and math.isnan(v):
        raise ConfigError(f"{key} is NaN", path, lineno)
    return v


def _flux(sec, base, path):
    """Flux in kg/m^2/s from ``base`` or ``base_mg_per_m2_yr``; default 0."""
    plain = base in sec.values
    mg = base + _FLUX_SUFFIX in sec.values
    if plain and mg:
        raise ConfigError(f"give either {base} or {base + _FLUX_SUFFIX}, not both",
                          path, sec.values[base][1])
    if mg:
        return mg_per_m2_yr(_number(sec, base + _FLUX_SUFFIX, path))
    return _number(sec, base, path, required=False, default=0.0)


def _check_keys(sec, allowed, path):
    for key, (_, lineno) in sec.values.items():
        base = key[: -len(_FLUX_SUFFIX)] if key.endswith(_FLUX_SUFFIX) else key
        ok = key in allowed or (base != key and base in allowed and base.endswith("flux"))
        if not ok:
            raise ConfigError(f"unknown key {key!r} in {sec.label}", path, lineno)


def _concentration(sec, fluid, path):
    has_r, has_pg = "rho_l_h" in sec.values, "p_g" in sec.values
    if has_r and has_pg:
        raise ConfigError("give either rho_l_h or p_g, not both", path, sec.values["p_g"][1])
    if has_pg:
        return fluid.C_h * _number(sec, "p_g", path)
    return _number(sec, "rho_l_h", path)


def _wrap(exc, sec, path):
    return ConfigError(f"{sec.label}: {exc}", path, sec.line)


def parse_config(text: str, path=None) -> Scenario:
    """Build a validated :class:`Scenario` from config text."""
    top, sections = _parse(text, path)
    _check_keys(top, {"name"}, path)
    name = top.values.get("name", ("config", 0))[0]

    def single(kind):
        found = [s for s in sections if s.kind == kind]
        return found[0] if found else None

    fluid_sec = single("fluid")
    fluid = FluidParams()
    if fluid_sec is not None:
        _check_keys(fluid_sec, _FLUID_KEYS, path)
        kw = {k: _number(fluid_sec, k, path) for k in fluid_sec.values}
        try:
            fluid = FluidParams(**kw)
        except ValueError as exc:
            raise _wrap(exc, fluid_sec, path) from None

    mesh_sec = single("mesh")
    if mesh_sec is None:
        raise ConfigError("missing section [mesh]", path)
    _check_keys(mesh_sec, _MESH_KEYS, path)
    try:
        mesh = Mesh1D(_number(mesh_sec, "length", path),
                      _number(mesh_sec, "n_cells", path, integer=True),
                      _number(mesh_sec, "cross_section", path, required=False, default=1.0))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise _wrap(exc, mesh_sec, path) from None
    gravity = _number(mesh_sec, "gravity", path, required=False, default=0.0)

    rocks, zones = [], []
    for sec in (s for s in sections if s.kind == "rock"):
        _check_keys(sec, _ROCK_KEYS, path)
        vals = {k: _number(sec, k, path) for k in ("k", "phi", "P_r", "n", "S_lr")}
        vals["S_gr"] = _number(sec, "S_gr", path, required=False, default=0.0)
        try:
            rocks.append(RockParams(name=sec.name, **vals))
        except ValueError as exc:
            raise _wrap(exc, sec, path) from None
        zones.append(Zone(_number(sec, "x_min", path, required=False, default=-math.inf),
                          _number(sec, "x_max", path, required=False, default=math.inf)))
    if not rocks:
        raise ConfigError("at least one [rock.<name>] section is required", path)

    bcs = {}
    for side in ("left", "right"):
        sec = next((s for s in sections if s.kind == "bc" and s.name == side), None)
        if sec is None:
            raise ConfigError(f"missing section [bc.{side}]", path)
        _check_keys(sec, _BC_KEYS, path)
        if "kind" not in sec.values:
            raise ConfigError(f"missing required key 'kind' in {sec.label}", path, sec.line)
        kind, lineno = sec.values["kind"]
        kind = kind.lower()
        if kind == "neumann":
            extra = {"p_l", "rho_l_h", "p_g"} & set(sec.values)
            if extra:
                k = sorted(extra)[0]
                raise ConfigError(f"{k} is not used by a neumann condition", path,
                                  sec.values[k][1])
            bcs[side] = BoundaryCondition.neumann(
                side, _flux(sec, "water_flux", path), _flux(sec, "hydrogen_flux", path))
        elif kind == "dirichlet":
            extra = [k for k in sec.values if "flux" in k]
            if extra:
                raise ConfigError(f"{extra[0]} is not used by a dirichlet condition", path,
                                  sec.values[extra[0]][1])
            try:
                bcs[side] = BoundaryCondition.dirichlet(
                    side, _number(sec, "p_l", path), _concentration(sec, fluid, path))
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise _wrap(exc, sec, path) from None
        else:
            raise ConfigError(f"kind must be 'neumann' or 'dirichlet', got {kind!r}",
                              path, lineno)
    for sec in (s for s in sections if s.kind == "bc" and s.name not in ("left", "right")):
        raise ConfigError(f"unknown boundary {sec.label}; use [bc.left] or [bc.right]",
                          path, sec.line)

    initial = []
    for sec in (s for s in sections if s.kind == "ic"):
        _check_keys(sec, _IC_KEYS, path)
        initial.append(InitialZone(
            _number(sec, "x_min", path, required=False, default=-math.inf),
            _number(sec, "x_max", path, required=False, default=math.inf),
            p_l=_number(sec, "p_l", path),
            rho_l_h=_concentration(sec, fluid, path),
        ))
        if initial[-1].rho_l_h < 0:
            raise ConfigError("rho_l_h must be nonnegative", path, sec.line)
    if not initial:
        raise ConfigError("at least one [ic.<zone>] section is required", path)

    time_sec = single("time")
    if time_sec is None:
        raise ConfigError("missing section [time]", path)
    _check_keys(time_sec, _TIME_KEYS, path)
    times = {k: _number(time_sec, k, path) for k in ("t_end", "dt_init", "dt_min", "dt_max")}
    snaps = ()
    if "snapshots" in time_sec.values:
        text, lineno = time_sec.values["snapshots"]
        try:
            snaps = tuple(float(s) for s in text.split(",") if s.strip())
        except ValueError:
            raise ConfigError(f"snapshots must be comma-separated numbers, got {text!r}",
                              path, lineno) from None
    time_unit = _number(time_sec, "time_unit", path, required=False, default=1.0)

    try:
        return Scenario(
            name=name, mesh=mesh, rocks=tuple(rocks), rock_zones=tuple(zones), fluid=fluid,
            bc_left=bcs["left"], bc_right=bcs["right"], initial=tuple(initial),
            snapshot_times=snaps, gravity=gravity, time_unit=time_unit, **times,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None


def load_config(path) -> Scenario:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    return parse_config(text, path)
