"""Run configuration: one INI file with sections.

Recognized sections and keys::

    [scenario]      file = prices.csv      (path relative to the config file)
                    synth = square | renewable
                    mode = grid | standalone
                    steps = 48             (truncate or length of synthetic data)
                    low, high, period, jitter, seed          (square)
                    pv_peak, wind_base, seed                 (renewable)
    [run]           topology = all | none | battery | vessel | both
                    rl = 0, 5, 10, 25      (%/h; 0 means no flexibility)
                    seed = 0
                    output = results       (relative to the config file)
    [search]        multistart_count, pattern_step_init, shrink, min_step,
                    max_evals, polish_iters, dinkelbach_iters,
                    improvement_iters, startup_cost, meoh_credit
    [bounds]        n_mod = 10, 40  (any design variable: lower, upper)
    [design]        topology, n_mod, p_pem, beta_max, h2_meoh_nom,
                    e_batt_nom, volume   (used by ``simulate``)
    [econ]          any EconParams field
    [battery] [electrolyzer] [compressor] [vessel] [meoh]
                    any field of the matching unit parameter class

Parsing collects every problem it finds instead of stopping at the first one.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .economics import EconParams
from .plant import (
    ALL_TOPOLOGIES,
    TABLE_BOUNDS,
    DesignBounds,
    FlexPolicy,
    PlantDesign,
    Topology,
)
from .scenario import Mode, Scenario, load_scenario, synth_price_scenario, synth_renewable_scenario
from .units import (
    BatteryParams,
    CompressorParams,
    ElectrolyzerParams,
    MeohPlantParams,
    PlantParams,
    VesselParams,
)
from .optimize import DesignSearchOptions, ScheduleOptions

OUTPUT_ROOT_ENV = "PTMEOH_OUTPUT_ROOT"

_UNIT_SECTIONS = {
    "battery": BatteryParams,
    "electrolyzer": ElectrolyzerParams,
    "compressor": CompressorParams,
    "vessel": VesselParams,
    "meoh": MeohPlantParams,
}
_KNOWN_SECTIONS = {"scenario", "run", "search", "bounds", "design", "econ", *_UNIT_SECTIONS}
_SCENARIO_KEYS = {"file", "synth", "mode", "steps", "low", "high", "period", "jitter", "seed", "pv_peak", "wind_base"}
_RUN_KEYS = {"topology", "rl", "seed", "output"}
_SEARCH_KEYS = {
    "multistart_count", "pattern_step_init", "shrink", "min_step", "max_evals",
    "polish_iters", "dinkelbach_iters", "improvement_iters", "startup_cost", "meoh_credit",
}
_DESIGN_KEYS = {"topology", "n_mod", "p_pem", "beta_max", "h2_meoh_nom", "e_batt_nom", "volume"}


class ConfigError(ValueError):
    """Raised with every diagnostic found in a configuration."""

    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass
class RunConfig:
    path: Path
    scenario: Scenario
    topologies: tuple[Topology, ...]
    rl_percent: tuple[float, ...]
    seed: int
    output: Path
    search: DesignSearchOptions
    econ: EconParams = EconParams()
    params: PlantParams = PlantParams()
    design: PlantDesign | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def flex_policies(self) -> list[FlexPolicy]:
        return [FlexPolicy.from_percent(p) for p in self.rl_percent]


class _Collector:
    def __init__(self):
        self.issues: list[str] = []

    def add(self, msg: str) -> None:
        self.issues.append(msg)

    def number(self, section, key, raw, kind=float):
        try:
            if kind is int:
                value = float(raw)
                if not value.is_integer():
                    raise ValueError
                return int(value)
            return kind(raw)
        except (TypeError, ValueError):
            self.add(f"[{section}] {key}: expected {kind.__name__}, got {raw!r}")
            return None


def _unknown(col: _Collector, cp: configparser.ConfigParser, section: str, allowed) -> None:
    if cp.has_section(section):
        for key in cp[section]:
            if key not in allowed:
                col.add(f"[{section}] unknown key {key!r}")


def _override(col: _Collector, cp, section: str, base):
    """Apply a section's keys to a frozen dataclass instance, converting by field type."""
    if not cp.has_section(section):
        return base
    types = {f.name: f.type for f in dataclasses.fields(base)}
    changes = {}
    for key, raw in cp[section].items():
        if key not in types:
            col.add(f"[{section}] unknown key {key!r}")
            continue
        kind = int if "int" in str(types[key]) else float
        value = col.number(section, key, raw, kind)
        if value is not None:
            changes[key] = value
    try:
        return replace(base, **changes)
    except ValueError as exc:
        col.add(f"[{section}] {exc}")
        return base


def _resolve(base_dir: Path, raw: str) -> Path:
    p = Path(raw).expanduser()
    return p if p.is_absolute() else base_dir / p


def _scenario(col: _Collector, cp, base_dir: Path) -> Scenario | None:
    if not cp.has_section("scenario"):
        col.add("missing [scenario] section")
        return None
    sec = cp["scenario"]
    _unknown(col, cp, "scenario", _SCENARIO_KEYS)
    try:
        mode = Mode.parse(sec.get("mode", "grid"))
    except ValueError as exc:
        col.add(f"[scenario] mode: {exc}")
        return None
    has_file, has_synth = "file" in sec, "synth" in sec
    if has_file == has_synth:
        col.add("[scenario] give exactly one of 'file' or 'synth'")
        return None
    steps = col.number("scenario", "steps", sec["steps"], int) if "steps" in sec else None
    if steps is not None and steps < 1:
        col.add("[scenario] steps must be >= 1")
        return None
    try:
        if has_file:
            path = _resolve(base_dir, sec["file"])
            if not path.is_file():
                col.add(f"[scenario] file not found: {path}")
                return None
            scen = load_scenario(path, mode)
            if steps is not None:
                if steps > scen.steps:
                    col.add(f"[scenario] steps={steps} exceeds the {scen.steps} hours in {path.name}")
                    return None
                scen = scen.truncated(steps)
            return scen
        kind = sec["synth"].strip().lower()
        seed = col.number("scenario", "seed", sec.get("seed", "0"), int)
        if steps is None:
            col.add("[scenario] synthetic scenarios need 'steps'")
            return None
        if kind == "square":
            if mode is not Mode.GRID:
                col.add("[scenario] square price scenarios are grid-connected")
                return None
            vals = [col.number("scenario", k, sec.get(k, d)) for k, d in
                    (("low", "0"), ("high", "300"), ("jitter", "0"))]
            period = col.number("scenario", "period", sec.get("period", "24"), int)
            if None in vals or period is None or seed is None:
                return None
            return synth_price_scenario(steps, vals[0], vals[1], period, seed=seed, jitter=vals[2])
        if kind == "renewable":
            if mode is not Mode.STANDALONE:
                col.add("[scenario] renewable scenarios are stand-alone")
                return None
            pv = col.number("scenario", "pv_peak", sec.get("pv_peak", "110"))
            wind = col.number("scenario", "wind_base", sec.get("wind_base", "126"))
            if None in (pv, wind, seed):
                return None
            return synth_renewable_scenario(steps, pv, wind, seed=seed)
        col.add(f"[scenario] synth must be 'square' or 'renewable', got {kind!r}")
    except (ValueError, OSError) as exc:
        col.add(f"[scenario] {exc}")
    return None


def _topologies(col: _Collector, raw: str, mode: Mode | None) -> tuple[Topology, ...]:
    raw = raw.strip().lower()
    if raw in ("all", "enumerate", "enumerate_all"):
        topos = ALL_TOPOLOGIES
        if mode is Mode.STANDALONE:
            topos = (Topology.BOTH,)
        return topos
    topos = []
    for item in raw.split(","):
        try:
            topos.append(Topology.parse(item.strip()))
        except ValueError as exc:
            col.add(f"[run] topology: {exc}")
    if mode is Mode.STANDALONE and any(t is not Topology.BOTH for t in topos):
        col.add("[run] stand-alone mode only supports topology 'both'")
    return tuple(topos)


def _bounds(col: _Collector, cp) -> DesignBounds:
    if not cp.has_section("bounds"):
        return TABLE_BOUNDS
    names = {f.name for f in dataclasses.fields(DesignBounds)}
    changes = {}
    for key, raw in cp["bounds"].items():
        if key not in names:
            col.add(f"[bounds] unknown key {key!r}")
            continue
        parts = [p.strip() for p in raw.split(",")]
        kind = int if key == "n_mod" else float
        nums = [col.number("bounds", key, p, kind) for p in parts]
        if len(nums) != 2:
            col.add(f"[bounds] {key}: expected 'lower, upper'")
        elif None not in nums:
            changes[key] = tuple(nums)
    try:
        bounds = replace(TABLE_BOUNDS, **changes)
    except ValueError as exc:
        col.add(f"[bounds] {exc}")
        return TABLE_BOUNDS
    if not bounds.within(TABLE_BOUNDS):
        col.add("[bounds] search bounds must lie within the design table bounds")
        return TABLE_BOUNDS
    return bounds


def _search(col: _Collector, cp, bounds: DesignBounds, seed: int) -> DesignSearchOptions:
    sched = ScheduleOptions(improvement_iters=25, seed=seed)
    kw: dict = {}
    if cp.has_section("search"):
        _unknown(col, cp, "search", _SEARCH_KEYS)
        sec = cp["search"]
        ints = ("multistart_count", "max_evals", "polish_iters", "dinkelbach_iters", "improvement_iters")
        for key in _SEARCH_KEYS & set(sec):
            value = col.number("search", key, sec[key], int if key in ints else float)
            if value is None:
                continue
            if key in ("improvement_iters", "startup_cost", "meoh_credit"):
                if value < 0:
                    col.add(f"[search] {key} must be non-negative")
                    continue
                sched = replace(sched, **{key: value})
            else:
                kw[key] = value
    try:
        return DesignSearchOptions(bounds=bounds, seed=seed, schedule=sched, **kw)
    except ValueError as exc:
        col.add(f"[search] {exc}")
        return DesignSearchOptions(bounds=bounds, seed=seed, schedule=sched)


def _design(col: _Collector, cp, params: PlantParams, bounds: DesignBounds) -> PlantDesign | None:
    if not cp.has_section("design"):
        return None
    _unknown(col, cp, "design", _DESIGN_KEYS)
    sec = cp["design"]
    if "topology" not in sec or "n_mod" not in sec or "p_pem" not in sec:
        col.add("[design] needs at least topology, n_mod and p_pem")
        return None
    try:
        topo = Topology.parse(sec["topology"])
    except ValueError as exc:
        col.add(f"[design] topology: {exc}")
        return None
    kw = {}
    for key in ("n_mod", "p_pem", "beta_max", "h2_meoh_nom", "e_batt_nom", "volume"):
        if key in sec:
            value = col.number("design", key, sec[key], int if key == "n_mod" else float)
            if value is None:
                return None
            kw[key] = value
    try:
        design = PlantDesign.create(topo, params=params, bounds=bounds, **kw)
    except ValueError as exc:
        col.add(f"[design] {exc}")
        return None
    for problem in design.issues(params, TABLE_BOUNDS):
        col.add(f"[design] {problem}")
    return design


def default_output(config_path: Path) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV)
    base = Path(root) if root else Path.cwd() / "results"
    return base / config_path.stem


def parse_config(path: str | Path) -> RunConfig:
    """Read and check a configuration; raises ConfigError listing every problem found."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"config file not found: {path}"])
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError([f"unreadable config: {exc}"]) from None
    col = _Collector()
    for section in cp.sections():
        if section not in _KNOWN_SECTIONS:
            col.add(f"unknown section [{section}]")
    base_dir = path.parent
    scenario = _scenario(col, cp, base_dir)
    mode = scenario.mode if scenario is not None else None

    run = cp["run"] if cp.has_section("run") else {}
    _unknown(col, cp, "run", _RUN_KEYS)
    topologies = _topologies(col, run.get("topology", "all"), mode)
    rl = []
    for item in run.get("rl", "0").split(","):
        value = col.number("run", "rl", item.strip())
        if value is None:
            continue
        if value < 0:
            col.add(f"[run] rl: ramp limit must be >= 0, got {value:g}")
            continue
        rl.append(value)
    if not rl and not any("rl" in i for i in col.issues):
        col.add("[run] rl: at least one ramp limit is required")
    seed = col.number("run", "seed", run.get("seed", "0"), int)
    seed = 0 if seed is None else seed
    output = _resolve(base_dir, run["output"]) if "output" in run else default_output(path)

    econ = _override(col, cp, "econ", EconParams())
    units = {name: _override(col, cp, name, cls()) for name, cls in _UNIT_SECTIONS.items()}
    params = PlantParams(units["battery"], units["electrolyzer"], units["compressor"], units["vessel"], units["meoh"])
    bounds = _bounds(col, cp)
    search = _search(col, cp, bounds, seed)
    design = _design(col, cp, params, TABLE_BOUNDS)
    if design is not None and mode is Mode.STANDALONE and design.topology is not Topology.BOTH:
        col.add("[design] stand-alone mode only supports topology 'both'")

    if col.issues or scenario is None:
        raise ConfigError(col.issues or ["scenario could not be built"])
    return RunConfig(path, scenario, topologies, tuple(rl), seed, output, search, econ, params, design)
