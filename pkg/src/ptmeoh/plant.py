"""Plant topology, hourly state propagation and operating-constraint checks.

:func:`step` advances battery and vessel by one hour for a given decision and
returns an :class:`HourRecord` carrying every flow plus the list of violated
operating limits. :func:`simulate` folds it over a schedule and adds the
cross-hour checks (ramp limit, fixed nominal operation). Nothing is clamped:
an infeasible decision still produces a record, with the violations attached.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .scenario import Mode, Scenario
from .units import (
    PlantParams,
    _compressor_factor,
    efficiency_poly,
    max_h2_production,
)


class Topology(str, Enum):
    NONE = "none"
    BATTERY = "battery"
    VESSEL = "vessel"
    BOTH = "both"

    @property
    def has_battery(self) -> bool:
        return self in (Topology.BATTERY, Topology.BOTH)

    @property
    def has_vessel(self) -> bool:
        return self in (Topology.VESSEL, Topology.BOTH)

    @classmethod
    def parse(cls, text: "str | Topology") -> "Topology":
        if isinstance(text, Topology):
            return text
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "none": cls.NONE, "nostorage": cls.NONE,
            "battery": cls.BATTERY, "batteryonly": cls.BATTERY,
            "vessel": cls.VESSEL, "vesselonly": cls.VESSEL,
            "both": cls.BOTH, "batteryvessel": cls.BOTH,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown topology {text!r}") from None


ALL_TOPOLOGIES = (Topology.NONE, Topology.BATTERY, Topology.VESSEL, Topology.BOTH)


class DesignError(ValueError):
    pass


class DecisionError(ValueError):
    """A decision does not fit the plant it is applied to."""


@dataclass(frozen=True)
class DesignBounds:
    e_batt_nom: tuple[float, float] = (5.0, 400.0)
    n_mod: tuple[int, int] = (10, 40)
    p_pem: tuple[float, float] = (20.0, 40.0)
    beta_max: tuple[float, float] = (1.88, 3.5)
    volume: tuple[float, float] = (25.0, 5000.0)
    h2_meoh_nom: tuple[float, float] = (0.4, 2.0)

    def __post_init__(self):
        for f in fields(self):
            lo, hi = getattr(self, f.name)
            if lo > hi:
                raise ValueError(f"bound {f.name}: lower {lo} exceeds upper {hi}")

    def within(self, other: "DesignBounds") -> bool:
        """True if every box of ``self`` lies inside the matching box of ``other``."""
        for f in fields(self):
            lo, hi = getattr(self, f.name)
            olo, ohi = getattr(other, f.name)
            if lo < olo - 1e-12 or hi > ohi + 1e-12:
                return False
        return True


TABLE_BOUNDS = DesignBounds()


@dataclass(frozen=True)
class PlantDesign:
    """Sizing of the plant; ``e_batt_nom`` and ``volume`` are None when the unit is absent."""

    topology: Topology
    n_mod: int
    p_pem: float  # bar
    beta_max: float
    h2_meoh_nom: float  # t/h
    e_batt_nom: float | None = None  # MWh
    volume: float | None = None  # m3

    @classmethod
    def create(
        cls,
        topology: Topology | str,
        n_mod: int,
        p_pem: float,
        beta_max: float | None = None,
        h2_meoh_nom: float | None = None,
        e_batt_nom: float | None = None,
        volume: float | None = None,
        params: PlantParams | None = None,
        bounds: DesignBounds = TABLE_BOUNDS,
    ) -> "PlantDesign":
        """Build a design, deriving what the topology fixes.

        Without a vessel the methanol plant is sized to the electrolyzer's
        maximum output and the compressor ratio defaults to the smallest one
        reaching synthesis pressure.
        """
        params = params or PlantParams()
        topology = Topology.parse(topology)
        n_mod = int(n_mod)
        if not topology.has_vessel:
            h2_meoh_nom = max_h2_production(n_mod, p_pem, params.electrolyzer)
            if beta_max is None:
                beta_max = max(bounds.beta_max[0], params.vessel.p_floor / p_pem)
            volume = None
        elif beta_max is None or h2_meoh_nom is None or volume is None:
            raise DesignError("vessel topologies need beta_max, h2_meoh_nom and volume")
        if not topology.has_battery:
            e_batt_nom = None
        elif e_batt_nom is None:
            raise DesignError("battery topologies need e_batt_nom")
        return cls(topology, n_mod, float(p_pem), float(beta_max), float(h2_meoh_nom),
                   None if e_batt_nom is None else float(e_batt_nom),
                   None if volume is None else float(volume))

    @property
    def has_battery(self) -> bool:
        return self.topology.has_battery

    @property
    def has_vessel(self) -> bool:
        return self.topology.has_vessel

    @property
    def p_max_storage(self) -> float:
        return self.beta_max * self.p_pem

    def issues(
        self,
        params: PlantParams | None = None,
        bounds: DesignBounds = TABLE_BOUNDS,
        vessel_margin: float = 0.0,
    ) -> list[str]:
        """Every violated design invariant, as readable messages (empty when valid)."""
        params = params or PlantParams()
        out = []

        def check(name, value, box):
            lo, hi = box
            if not lo - 1e-9 <= value <= hi + 1e-9:
                out.append(f"{name}={value:g} outside [{lo:g}, {hi:g}]")

        check("n_mod", self.n_mod, bounds.n_mod)
        check("p_pem", self.p_pem, bounds.p_pem)
        check("beta_max", self.beta_max, bounds.beta_max)
        check("h2_meoh_nom", self.h2_meoh_nom, bounds.h2_meoh_nom)
        if self.has_battery:
            if self.e_batt_nom is None:
                out.append("battery topology without e_batt_nom")
            else:
                check("e_batt_nom", self.e_batt_nom, bounds.e_batt_nom)
        elif self.e_batt_nom is not None:
            out.append("e_batt_nom given for a topology without battery")
        p_floor = params.vessel.p_floor
        if self.has_vessel:
            if self.volume is None:
                out.append("vessel topology without volume")
            else:
                check("volume", self.volume, bounds.volume)
            if self.p_max_storage <= p_floor + vessel_margin:
                out.append(
                    f"vessel unusable: beta_max*p_pem = {self.p_max_storage:.3f} bar "
                    f"does not exceed {p_floor + vessel_margin:g} bar"
                )
        else:
            if self.volume is not None:
                out.append("volume given for a topology without vessel")
            if self.p_max_storage < p_floor - 1e-9:
                out.append(
                    f"compressor cannot reach synthesis pressure: beta_max*p_pem = "
                    f"{self.p_max_storage:.3f} < {p_floor:g} bar"
                )
            h2_max = max_h2_production(self.n_mod, self.p_pem, params.electrolyzer)
            if not math.isclose(self.h2_meoh_nom, h2_max, rel_tol=1e-9):
                out.append(
                    f"h2_meoh_nom={self.h2_meoh_nom:g} must equal the electrolyzer maximum "
                    f"{h2_max:g} t/h without a vessel"
                )
        return out

    def validate(self, params: PlantParams | None = None, bounds: DesignBounds = TABLE_BOUNDS) -> None:
        problems = self.issues(params, bounds)
        if problems:
            raise DesignError("; ".join(problems))

    def as_dict(self) -> dict:
        return {
            "topology": self.topology.value,
            "n_mod": self.n_mod,
            "p_pem": self.p_pem,
            "beta_max": self.beta_max,
            "h2_meoh_nom": self.h2_meoh_nom,
            "e_batt_nom": self.e_batt_nom,
            "volume": self.volume,
        }


def write_design(design: PlantDesign, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in design.as_dict().items():
            writer.writerow([key, "" if value is None else (value if isinstance(value, str) else repr(value))])


def read_design(path: str | Path) -> PlantDesign:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = {row["key"]: row["value"] for row in csv.DictReader(fh)}

    def opt(key):
        return float(rows[key]) if rows.get(key) else None

    return PlantDesign(
        Topology.parse(rows["topology"]), int(rows["n_mod"]), float(rows["p_pem"]),
        float(rows["beta_max"]), float(rows["h2_meoh_nom"]), opt("e_batt_nom"), opt("volume"),
    )


# --- schedule ----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ScheduleDecision:
    """Control decisions for one hour."""

    p_grid_to_pem: float = 0.0  # MW from grid / renewable bus
    x_pem_on: bool = False
    p_batt_in: float = 0.0  # MW charged
    x_batt_in: bool = False
    p_batt_to_pem: float = 0.0  # MW DC to electrolyzer
    p_batt_to_grid: float = 0.0  # MW AC out of the inverter
    x_batt_out: bool = False
    h2_to_meoh: float = 0.0  # t/h

    @property
    def pem_power(self) -> float:
        return self.p_grid_to_pem + self.p_batt_to_pem


DECISION_FIELDS = tuple(f.name for f in fields(ScheduleDecision))
_BOOL_FIELDS = {"x_pem_on", "x_batt_in", "x_batt_out"}

Schedule = list  # sequence of ScheduleDecision, one per hour


def write_schedule(schedule: Sequence[ScheduleDecision], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["hour", *DECISION_FIELDS])
        for hour, d in enumerate(schedule):
            row = [hour]
            for name in DECISION_FIELDS:
                value = getattr(d, name)
                row.append(int(value) if name in _BOOL_FIELDS else repr(float(value)))
            writer.writerow(row)


def read_schedule(path: str | Path) -> list[ScheduleDecision]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(DECISION_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing schedule columns {sorted(missing)}")
        for i, row in enumerate(reader):
            if int(row.get("hour", i)) != i:
                raise ValueError(f"{path}: non-contiguous hours at row {i}")
            kwargs = {}
            for name in DECISION_FIELDS:
                raw = row[name].strip()
                if name in _BOOL_FIELDS:
                    kwargs[name] = raw.lower() in ("1", "true", "yes")
                else:
                    kwargs[name] = float(raw)
            out.append(ScheduleDecision(**kwargs))
    return out


# --- flexibility -------------------------------------------------------------


@dataclass(frozen=True)
class FlexPolicy:
    """Ramp limit of the methanol plant's hydrogen feed, as a fraction of nominal per hour.

    ``rl is None`` means no flexibility: the feed is pinned at nominal.
    """

    rl: float | None = None

    def __post_init__(self):
        if self.rl is not None and self.rl < 0:
            raise ValueError("ramp limit must be non-negative")

    @classmethod
    def none(cls) -> "FlexPolicy":
        return cls(None)

    @classmethod
    def ramp(cls, rl: float) -> "FlexPolicy":
        return cls(float(rl))

    @classmethod
    def from_percent(cls, percent: float) -> "FlexPolicy":
        """0 %/h is read as no flexibility (steady nominal operation)."""
        return cls.none() if percent == 0 else cls.ramp(percent / 100.0)

    @property
    def flexible(self) -> bool:
        return self.rl is not None

    @property
    def percent(self) -> float:
        return 0.0 if self.rl is None else self.rl * 100.0

    def label(self) -> str:
        return "noflex" if self.rl is None else f"rl{self.percent:g}"


NO_FLEXIBILITY = FlexPolicy(None)


# --- state, records, trajectory ---------------------------------------------


class ViolationKind(str, Enum):
    PEM_WINDOW = "pem_window"
    BATTERY_FLOW = "battery_flow"
    BATTERY_EXCLUSIVE = "battery_exclusive"
    SOC_LOW = "soc_low"
    SOC_HIGH = "soc_high"
    VESSEL_LOW = "vessel_low"
    VESSEL_HIGH = "vessel_high"
    COMPRESSOR_LOAD = "compressor_load"
    MEOH_WINDOW = "meoh_window"
    H2_BALANCE = "h2_balance"
    POWER_BALANCE = "power_balance"
    RAMP = "ramp"
    NOMINAL_PIN = "nominal_pin"


@dataclass(frozen=True, slots=True)
class Violation:
    hour: int
    kind: ViolationKind
    detail: str = ""


@dataclass(frozen=True, slots=True)
class PlantState:
    battery_energy: float = 0.0  # MWh
    vessel_mass: float = 0.0  # kg above the floor pressure


@dataclass(slots=True)
class HourRecord:
    hour: int
    battery_energy: float
    vessel_mass: float
    vessel_pressure: float
    pem_power: float
    pem_efficiency: float
    h2_produced: float
    compressor_beta: float
    compressor_power: float
    h2_to_meoh: float
    meoh: float
    co2: float
    electricity_drawn: float  # MW bought (grid) or taken from the renewable bus
    electricity_sold: float
    curtailed: float
    pem_cooling: float
    compressor_cooling: float
    meoh_cooling: float
    pem_aux: float
    meoh_power: float
    battery_in: float
    battery_to_pem: float
    battery_to_grid: float
    violations: tuple[Violation, ...] = ()

    @property
    def cooling(self) -> float:
        return self.pem_cooling + self.compressor_cooling + self.meoh_cooling

    @property
    def balance_of_plant_power(self) -> float:
        return self.pem_aux + self.compressor_power + self.meoh_power


TRAJECTORY_COLUMNS = tuple(f.name for f in fields(HourRecord))


def _tol(x: float) -> float:
    return 1e-9 * max(1.0, abs(x))


class PlantModel:
    """A design bound to its parameters, with derived limits cached for fast stepping."""

    def __init__(self, design: PlantDesign, mode: Mode, params: PlantParams | None = None):
        self.design = design
        self.mode = Mode.parse(mode)
        self.params = params = params or PlantParams()
        el = params.electrolyzer
        n = design.n_mod
        self.pem_min = el.p_module_min * n
        self.pem_max = el.p_module_max * n
        self.h2_max = max_h2_production(n, design.p_pem, el)
        self.compressor_flow_min = params.compressor.load_min_frac * self.h2_max
        self.h2_meoh_min = params.meoh.load_min_frac * design.h2_meoh_nom
        self.has_battery = design.has_battery
        self.has_vessel = design.has_vessel
        self.p_floor = params.vessel.p_floor
        if design.has_battery:
            self.e_nom = design.e_batt_nom
            self.batt_cap = params.battery.flow_cap(design.e_batt_nom)
            self.soc_floor = params.battery.soc_min_frac * design.e_batt_nom
        else:
            self.e_nom = self.batt_cap = self.soc_floor = 0.0
        if design.has_vessel:
            self.vessel_slope_v = params.vessel.slope * design.volume
            self.p_storage_max = design.p_max_storage
            self.vessel_capacity = self.vessel_slope_v * (self.p_storage_max - self.p_floor)
        else:
            self.vessel_slope_v = 0.0
            self.p_storage_max = self.p_floor
            self.vessel_capacity = 0.0
        self.beta_direct = self.p_floor / design.p_pem

    def initial_state(self) -> PlantState:
        """Battery at its minimum state of charge, vessel at floor pressure."""
        return PlantState(self.soc_floor, 0.0)

    def h2_from_power(self, power: float) -> float:
        if power <= 0:
            return 0.0
        el = self.params.electrolyzer
        return efficiency_poly(power / self.design.n_mod, self.design.p_pem, el) * power / el.lhv_h2

    def compressor_power(self, h2: float, beta: float) -> float:
        if h2 <= 0 or beta <= 1.0:
            return 0.0
        return h2 / 3600.0 * _compressor_factor(beta, self.params.compressor)

    def step(self, state: PlantState, d: ScheduleDecision, value: float, hour: int = 0):
        design = self.design
        params = self.params
        bp = params.battery
        for name in DECISION_FIELDS:
            v = getattr(d, name)
            if name not in _BOOL_FIELDS and (not math.isfinite(v) or v < 0):
                raise DecisionError(f"hour {hour}: {name}={v} must be finite and non-negative")
        if not self.has_battery and (
            d.p_batt_in or d.p_batt_to_pem or d.p_batt_to_grid or d.x_batt_in or d.x_batt_out
        ):
            raise DecisionError(f"hour {hour}: battery flows in a topology without battery")

        viol = []

        def flag(kind, detail):
            viol.append(Violation(hour, kind, detail))

        # electrolyzer
        pem = d.p_grid_to_pem + d.p_batt_to_pem
        if d.x_pem_on:
            if pem < self.pem_min - _tol(self.pem_min) or pem > self.pem_max + _tol(self.pem_max):
                flag(ViolationKind.PEM_WINDOW, f"{pem:.4f} MW outside [{self.pem_min:g}, {self.pem_max:g}]")
        elif pem > 0:
            flag(ViolationKind.PEM_WINDOW, f"{pem:.4f} MW while switched off")
        el = params.electrolyzer
        if pem > 0:
            eta = efficiency_poly(pem / design.n_mod, design.p_pem, el)
            h2 = eta * pem / el.lhv_h2
            pem_cooling = (1.0 - eta) * pem
            pem_aux = el.aux_frac * pem
        else:
            eta = h2 = pem_cooling = pem_aux = 0.0

        # hydrogen path
        draw = d.h2_to_meoh
        if self.has_vessel:
            mass = state.vessel_mass + (h2 - draw) * 1000.0
            pressure = self.p_floor + mass / self.vessel_slope_v
            if pressure < self.p_floor - _tol(self.p_floor):
                flag(ViolationKind.VESSEL_LOW, f"{mass:.3f} kg below floor")
            elif pressure > self.p_storage_max + _tol(self.p_storage_max):
                flag(ViolationKind.VESSEL_HIGH, f"{pressure:.3f} bar above {self.p_storage_max:.3f}")
            beta = max(pressure / design.p_pem, 1.0)
        else:
            mass = 0.0
            pressure = self.p_floor
            beta = self.beta_direct
            if abs(draw - h2) > _tol(h2):
                flag(ViolationKind.H2_BALANCE, f"feed {draw:.6f} != produced {h2:.6f} t/h")
        comp = self.compressor_power(h2, beta)
        if h2 > 0 and (
            h2 < self.compressor_flow_min - _tol(self.compressor_flow_min) or h2 > self.h2_max + _tol(self.h2_max)
        ):
            flag(ViolationKind.COMPRESSOR_LOAD, f"{h2 / self.h2_max:.4f} of design flow")

        # methanol plant (always running)
        nom = design.h2_meoh_nom
        if draw < self.h2_meoh_min - _tol(self.h2_meoh_min) or draw > nom + _tol(nom):
            flag(ViolationKind.MEOH_WINDOW, f"feed {draw:.6f} t/h outside [{self.h2_meoh_min:.6f}, {nom:.6f}]")
        mp = params.meoh
        load = draw / mp.ref_h2
        meoh = mp.ref_meoh * load

        # battery
        energy = state.battery_energy
        if self.has_battery:
            cap = self.batt_cap
            lo = bp.min_flow
            if d.x_batt_in:
                if not lo - _tol(lo) <= d.p_batt_in <= cap + _tol(cap):
                    flag(ViolationKind.BATTERY_FLOW, f"charge {d.p_batt_in:.4f} outside [{lo:g}, {cap:g}]")
            elif d.p_batt_in > 0:
                flag(ViolationKind.BATTERY_FLOW, "charging while x_batt_in is off")
            outs = (d.p_batt_to_pem, d.p_batt_to_grid)
            if d.x_batt_out:
                if max(outs) <= 0:
                    flag(ViolationKind.BATTERY_FLOW, "x_batt_out set without any output")
                for o in outs:
                    if o > 0 and not lo - _tol(lo) <= o <= cap + _tol(cap):
                        flag(ViolationKind.BATTERY_FLOW, f"output {o:.4f} outside [{lo:g}, {cap:g}]")
            elif max(outs) > 0:
                flag(ViolationKind.BATTERY_FLOW, "discharging while x_batt_out is off")
            if d.x_batt_in and d.x_batt_out:
                flag(ViolationKind.BATTERY_EXCLUSIVE, "charge and discharge in the same hour")
            out_total = d.p_batt_to_grid / bp.eta_dc_ac + d.p_batt_to_pem
            energy = (
                energy * (1.0 - bp.r_self_disch_hourly)
                + d.p_batt_in * bp.eta_ch
                - out_total / bp.eta_disch
            )
            if energy > self.e_nom + _tol(self.e_nom):
                flag(ViolationKind.SOC_HIGH, f"{energy:.4f} MWh above {self.e_nom:g}")
            # idle self-discharge below the floor is tolerated; discharging into it is not
            if out_total > 0 and energy < self.soc_floor - _tol(self.soc_floor):
                flag(ViolationKind.SOC_LOW, f"{energy:.4f} MWh below {self.soc_floor:g}")

        # electricity
        meoh_power = mp.ref_elec * load
        loads = d.p_grid_to_pem + d.p_batt_in + pem_aux + comp + meoh_power
        if self.mode is Mode.GRID:
            drawn, sold, curtailed = loads, d.p_batt_to_grid, 0.0
        else:
            supply = value + d.p_batt_to_grid
            if loads > supply + _tol(supply):
                flag(ViolationKind.POWER_BALANCE, f"demand {loads:.4f} MW exceeds supply {supply:.4f} MW")
            drawn = min(value, max(0.0, loads - d.p_batt_to_grid))
            sold = 0.0
            curtailed = max(0.0, value - drawn)

        record = HourRecord(
            hour=hour,
            battery_energy=energy,
            vessel_mass=mass,
            vessel_pressure=pressure,
            pem_power=pem,
            pem_efficiency=eta,
            h2_produced=h2,
            compressor_beta=beta,
            compressor_power=comp,
            h2_to_meoh=draw,
            meoh=meoh,
            co2=mp.ref_co2 * load,
            electricity_drawn=drawn,
            electricity_sold=sold,
            curtailed=curtailed,
            pem_cooling=pem_cooling,
            compressor_cooling=comp,
            meoh_cooling=mp.ref_cooling * load,
            pem_aux=pem_aux,
            meoh_power=meoh_power,
            battery_in=d.p_batt_in,
            battery_to_pem=d.p_batt_to_pem,
            battery_to_grid=d.p_batt_to_grid,
            violations=tuple(viol),
        )
        return PlantState(energy, mass), record

    def cross_hour_violations(self, hour: int, draw: float, prev_draw: float | None, flex: FlexPolicy):
        nom = self.design.h2_meoh_nom
        if flex.rl is None:
            if abs(draw - nom) > _tol(nom):
                return (Violation(hour, ViolationKind.NOMINAL_PIN, f"feed {draw:.6f} != nominal {nom:.6f}"),)
        elif prev_draw is not None:
            limit = flex.rl * nom
            if abs(draw - prev_draw) > limit + _tol(nom):
                return (Violation(hour, ViolationKind.RAMP, f"change {draw - prev_draw:+.6f} exceeds {limit:.6f} t/h"),)
        return ()

    def simulate(
        self,
        scenario: Scenario,
        schedule: Sequence[ScheduleDecision],
        flex: FlexPolicy = NO_FLEXIBILITY,
        initial_state: PlantState | None = None,
    ) -> "Trajectory":
        if len(schedule) != scenario.steps:
            raise ValueError(f"schedule has {len(schedule)} hours, scenario has {scenario.steps}")
        if scenario.mode is not self.mode:
            raise ValueError("scenario mode does not match the plant model")
        state = initial_state or self.initial_state()
        start = state
        records = []
        prev = None
        for t, (d, value) in enumerate(zip(schedule, scenario.values)):
            state, rec = self.step(state, d, value, t)
            extra = self.cross_hour_violations(t, d.h2_to_meoh, prev, flex)
            if extra:
                rec.violations = rec.violations + extra
            prev = d.h2_to_meoh
            records.append(rec)
        return Trajectory(self.design, self.mode, flex, start, state, records)


@dataclass
class Trajectory:
    design: PlantDesign
    mode: Mode
    flex: FlexPolicy
    initial_state: PlantState
    final_state: PlantState
    records: list[HourRecord]

    @property
    def steps(self) -> int:
        return len(self.records)

    @property
    def violations(self) -> list[Violation]:
        return [v for r in self.records for v in r.violations]

    @property
    def feasible(self) -> bool:
        return all(not r.violations for r in self.records)

    def column(self, name: str) -> np.ndarray:
        if name not in TRAJECTORY_COLUMNS or name == "violations":
            raise KeyError(name)
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRAJECTORY_COLUMNS)
            for r in self.records:
                row = []
                for name in TRAJECTORY_COLUMNS:
                    value = getattr(r, name)
                    if name == "violations":
                        row.append(";".join(v.kind.value for v in value))
                    elif name == "hour":
                        row.append(value)
                    else:
                        row.append(f"{value:.9g}")
                writer.writerow(row)


def feasible(trajectory: Trajectory) -> bool:
    return trajectory.feasible


def step(
    design: PlantDesign,
    state: PlantState,
    decision: ScheduleDecision,
    scenario_value: float,
    mode: Mode | str,
    params: PlantParams | None = None,
    hour: int = 0,
):
    """Advance the plant by one hour. Returns ``(new_state, HourRecord)``."""
    return PlantModel(design, mode, params).step(state, decision, scenario_value, hour)


def simulate(
    design: PlantDesign,
    scenario: Scenario,
    schedule: Sequence[ScheduleDecision],
    flex: FlexPolicy = NO_FLEXIBILITY,
    params: PlantParams | None = None,
    initial_state: PlantState | None = None,
) -> Trajectory:
    """Replay ``schedule`` hour by hour; all violations are collected, none abort."""
    return PlantModel(design, scenario.mode, params).simulate(scenario, schedule, flex, initial_state)


def initial_state(design: PlantDesign, params: PlantParams | None = None) -> PlantState:
    return PlantModel(design, Mode.GRID, params).initial_state()


def decision(
    pem_power: float = 0.0,
    h2_to_meoh: float = 0.0,
    batt_in: float = 0.0,
    batt_to_pem: float = 0.0,
    batt_to_grid: float = 0.0,
) -> ScheduleDecision:
    """Decision with on/off flags inferred from the flows; battery DC feed counts toward ``pem_power``."""
    return ScheduleDecision(
        p_grid_to_pem=max(pem_power - batt_to_pem, 0.0),
        x_pem_on=pem_power > 0,
        p_batt_in=batt_in,
        x_batt_in=batt_in > 0,
        p_batt_to_pem=batt_to_pem,
        p_batt_to_grid=batt_to_grid,
        x_batt_out=(batt_to_pem + batt_to_grid) > 0,
        h2_to_meoh=h2_to_meoh,
    )


def replace_decision(d: ScheduleDecision, **changes) -> ScheduleDecision:
    return replace(d, **changes)
