"""Quasi-1D meshes, boundary conditions and the four benchmark scenarios."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .constitutive import RockParams
from .fluid import FluidParams

YEAR = 3.1536e7  # s, 365-day year
MG_PER_M2_YR = 1e-6 / YEAR  # kg/m^2/s per mg/m^2/yr


def mg_per_m2_yr(value: float) -> float:
    """Convert a flux in mg/m^2/yr to kg/m^2/s."""
    return value * MG_PER_M2_YR


@dataclass(frozen=True)
class Mesh1D:
    """Uniform cell-centred mesh on [0, length]."""

    length: float
    n_cells: int
    cross_section: float = 1.0

    def __post_init__(self):
        if self.n_cells < 1 or not self.length > 0 or not self.cross_section > 0:
            raise ValueError("mesh needs n_cells >= 1, length > 0, cross_section > 0")

    @cached_property
    def widths(self) -> np.ndarray:
        w = np.full(self.n_cells, self.length / self.n_cells)
        # last cell absorbs the rounding so the widths sum to length
        w[-1] = self.length - math.fsum(w[:-1])
        return w

    @cached_property
    def faces(self) -> np.ndarray:
        x = np.empty(self.n_cells + 1)
        x[0] = 0.0
        x[1:] = np.cumsum(self.widths)
        x[-1] = self.length
        return x

    @cached_property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.faces[:-1] + self.faces[1:])

    @property
    def volumes(self) -> np.ndarray:
        return self.widths * self.cross_section


@dataclass(frozen=True)
class BoundaryCondition:
    """Condition on one end of the column.

    Neumann fluxes are component mass fluxes *into* the domain [kg/m^2/s];
    Dirichlet data are (p_l [Pa], rho_l_h [kg/m^3]).
    """

    side: str
    kind: str
    water_flux: float = 0.0
    hydrogen_flux: float = 0.0
    p_l: float = 0.0
    rho_l_h: float = 0.0

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if self.kind not in ("neumann", "dirichlet"):
            raise ValueError(f"kind must be 'neumann' or 'dirichlet', got {self.kind!r}")
        if self.kind == "dirichlet" and self.rho_l_h < 0:
            raise ValueError("Dirichlet rho_l_h must be nonnegative")

    @classmethod
    def neumann(cls, side, water_flux=0.0, hydrogen_flux=0.0):
        return cls(side, "neumann", water_flux=water_flux, hydrogen_flux=hydrogen_flux)

    @classmethod
    def dirichlet(cls, side, p_l, rho_l_h):
        return cls(side, "dirichlet", p_l=p_l, rho_l_h=rho_l_h)


@dataclass(frozen=True)
class Zone:
    """Interval [x_min, x_max) of the column; cells are assigned by center."""

    x_min: float
    x_max: float

    def contains(self, x):
        return (x >= self.x_min) & (x < self.x_max)


@dataclass(frozen=True)
class InitialZone(Zone):
    p_l: float = 0.0
    rho_l_h: float = 0.0


@dataclass(frozen=True)
class Scenario:
    name: str
    mesh: Mesh1D
    rocks: tuple[RockParams, ...]
    rock_zones: tuple[Zone, ...]
    fluid: FluidParams
    bc_left: BoundaryCondition
    bc_right: BoundaryCondition
    initial: tuple[InitialZone, ...]
    t_end: float
    dt_init: float
    dt_min: float
    dt_max: float
    snapshot_times: tuple[float, ...] = ()
    gravity: float = 0.0
    time_unit: float = field(default=1.0, compare=False)

    def __post_init__(self):
        if len(self.rocks) != len(self.rock_zones) or not self.rocks:
            raise ValueError("need one zone per rock and at least one rock")
        if self.bc_left.side != "left" or self.bc_right.side != "right":
            raise ValueError("boundary conditions attached to the wrong side")
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        snaps = tuple(self.snapshot_times)
        if list(snaps) != sorted(snaps) or any(t <= 0 or t > self.t_end for t in snaps):
            raise ValueError("snapshot times must be sorted and lie in (0, t_end]")
        rock_of_cell = self.rock_of_cell  # validates coverage
        if np.any(rock_of_cell < 0):
            raise ValueError("some cells are not covered by a rock zone")
        p, r = self.initial_state()
        if np.any(np.isnan(p)):
            raise ValueError("some cells are not covered by an initial-condition zone")

    @cached_property
    def rock_of_cell(self) -> np.ndarray:
        idx = np.full(self.mesh.n_cells, -1, dtype=int)
        for i, zone in enumerate(self.rock_zones):
            idx[zone.contains(self.mesh.centers) & (idx < 0)] = i
        return idx

    def cell_rocks(self) -> list[RockParams]:
        return [self.rocks[i] for i in self.rock_of_cell]

    def initial_state(self):
        """Initial (p_l, rho_l_h) arrays."""
        x = self.mesh.centers
        p = np.full(x.size, np.nan)
        r = np.full(x.size, np.nan)
        for zone in self.initial:
            sel = zone.contains(x) & np.isnan(p)
            p[sel] = zone.p_l
            r[sel] = zone.rho_l_h
        return p, r


DEFAULT_CELLS = {1: 200, 2: 200, 3: 200, 4: 500}


def _argillite():
    return RockParams(k=5e-20, phi=0.15, P_r=2e6, n=1.49, S_lr=0.4, S_gr=0.0, name="argillite")


def _concrete():
    return RockParams(k=1e-18, phi=0.3, P_r=2e6, n=1.54, S_lr=0.01, S_gr=0.0, name="concrete")


def build_case(case_id: int, n_cells: int | None = None, fluid: FluidParams | None = None,
               gravity: float = 0.0) -> Scenario:
    """Scenario for benchmark ``case_id`` (1-4) on ``n_cells`` uniform cells."""
    if case_id not in (1, 2, 3, 4):
        raise ValueError(f"unknown case id {case_id!r}; expected 1, 2, 3 or 4")
    n_cells = DEFAULT_CELLS[case_id] if n_cells is None else int(n_cells)
    if n_cells < 10:
        raise ValueError("n_cells must be at least 10")
    fluid = fluid or FluidParams()
    C_h = fluid.C_h
    p_out = 1e6

    if case_id == 4:
        L = 1.0
        rock = _concrete()
        return Scenario(
            name="case4",
            mesh=Mesh1D(L, n_cells),
            rocks=(rock,),
            rock_zones=(Zone(-math.inf, math.inf),),
            fluid=fluid,
            bc_left=BoundaryCondition.neumann("left"),
            bc_right=BoundaryCondition.neumann("right"),
            initial=(
                InitialZone(-math.inf, 0.5, p_l=1e6, rho_l_h=C_h * 1e6),
                InitialZone(0.5, math.inf, p_l=1e6, rho_l_h=C_h * 2.5e6),
            ),
            t_end=1e6,
            dt_init=0.33,
            dt_min=0.33e-3,
            dt_max=16.7e3,
            snapshot_times=(1e2, 1e3, 1e4, 5e4, 1.3e5, 1.92e5, 5e5, 1e6),
            gravity=gravity,
            time_unit=1.0,
        )

    L = 200.0
    everywhere = Zone(-math.inf, math.inf)
    if case_id == 1:
        rocks, zones = (_argillite(),), (everywhere,)
        q_h = mg_per_m2_yr(9.28)
        rho_out = 0.0
        dt_max = 5e4
        snaps = (1200.0, 4e4, 2e5, 1e6)
    elif case_id == 2:
        rocks, zones = (_argillite(),), (everywhere,)
        q_h = mg_per_m2_yr(55.7)
        rho_out = C_h * 1.1e6
        dt_max = 5e3
        snaps = (500.0, 1500.0, 5e3, 1.7e4, 2e4, 1e5, 1e6)
    else:
        omega1 = RockParams(k=1e-18, phi=0.3, P_r=2e6, n=1.54, S_lr=0.01, name="omega1")
        omega2 = RockParams(k=5e-20, phi=0.15, P_r=15e6, n=1.49, S_lr=0.4, name="omega2")
        rocks = (omega1, omega2)
        zones = (Zone(-math.inf, 20.0), Zone(20.0, math.inf))
        q_h = mg_per_m2_yr(5.57)
        rho_out = 0.0
        dt_max = 2e4
        snaps = (2e4, 3.8e4, 5.4e4, 1.3e5, 5e5, 1e6)

    return Scenario(
        name=f"case{case_id}",
        mesh=Mesh1D(L, n_cells),
        rocks=rocks,
        rock_zones=zones,
        fluid=fluid,
        bc_left=BoundaryCondition.neumann("left", 0.0, q_h),
        bc_right=BoundaryCondition.dirichlet("right", p_out, rho_out),
        initial=(InitialZone(-math.inf, math.inf, p_l=p_out, rho_l_h=rho_out),),
        t_end=1e6 * YEAR,
        dt_init=1e2 * YEAR,
        dt_min=1e-1 * YEAR,
        dt_max=dt_max * YEAR,
        snapshot_times=tuple(t * YEAR for t in snaps),
        gravity=gravity,
        time_unit=YEAR,
    )


def benchmark_rocks() -> tuple[RockParams, ...]:
    """Distinct rock types of the four cases."""
    seen = []
    for case_id in (1, 2, 3, 4):
        for rock in build_case(case_id, n_cells=10).rocks:
            if rock not in seen:
                seen.append(rock)
    return tuple(seen)
