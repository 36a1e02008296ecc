"""Capital and operating costs and the annualized specific cost of methanol.

Money is in M€ unless a name says otherwise; OPEX over a simulated horizon is
returned in €, then annualized to M€/y.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .plant import PlantDesign, Trajectory
from .scenario import Mode, Scenario
from .units import PlantParams, compressor_power, max_h2_production

HOURS_PER_WEEK = 7 * 24


class EconomicsError(ValueError):
    pass


@dataclass(frozen=True)
class EconParams:
    lifetime_years: int = 20
    discount_rate: float = 0.05
    om_frac: float = 0.05
    usd_to_eur: float = 0.85
    cooling_cost: float = 1.0  # €/MWh
    co2_cost: float = 50.0  # €/t
    operating_weeks: float = 48.0
    battery_cost_usd_per_kwh: float = 310.0
    battery_update_factor: float = 1.0
    vessel_cost_usd_per_m3: float = 7800.0
    pem_install_factor: float = 1.75
    # installation factor applied to the year-10 stack purchase
    pem_replacement_install_factor: float = 1.0
    pem_replacement_year: int = 10
    # specific cost c(P) = ref·(P/P_ref)^exp in €/kW of nominal power; exp 0 is a constant
    pem_cost_ref_eur_per_kw: float = 725.0
    pem_cost_ref_mw: float = 80.0
    pem_cost_scale_exp: float = 0.0
    capex_meoh_ref: float = 27.8  # M€
    meoh_ref_capacity_t: float = 80_000.0  # t/y
    sixtenths_b: float = 0.6
    # compressor + aftercooler: c0·(P_max/P_ref)^c1
    compressor_c0: float = 5.0  # M€
    compressor_p_ref_mw: float = 1.0
    compressor_c1: float = 0.7
    sell_price_factor: float = 1.0

    def __post_init__(self):
        if self.lifetime_years < 1:
            raise EconomicsError("lifetime_years must be >= 1")
        if not 0 < self.operating_weeks <= 52:
            raise EconomicsError("operating_weeks must lie in (0, 52]")
        if self.discount_rate < 0:
            raise EconomicsError("discount_rate must be non-negative")
        for name in ("usd_to_eur", "meoh_ref_capacity_t", "compressor_p_ref_mw", "pem_cost_ref_mw"):
            if getattr(self, name) <= 0:
                raise EconomicsError(f"{name} must be positive")
        for name in ("om_frac", "cooling_cost", "co2_cost", "battery_cost_usd_per_kwh",
                     "battery_update_factor", "vessel_cost_usd_per_m3", "pem_install_factor",
                     "pem_replacement_install_factor", "pem_cost_ref_eur_per_kw",
                     "capex_meoh_ref", "compressor_c0", "sell_price_factor"):
            if getattr(self, name) < 0:
                raise EconomicsError(f"{name} must be non-negative")

    @property
    def hours_per_year(self) -> float:
        return self.operating_weeks * HOURS_PER_WEEK

    def pem_specific_cost(self, p_nom_mw: float) -> float:
        """€/kW for an electrolyzer of nominal power ``p_nom_mw``."""
        if p_nom_mw <= 0:
            return 0.0
        return self.pem_cost_ref_eur_per_kw * (p_nom_mw / self.pem_cost_ref_mw) ** self.pem_cost_scale_exp


# --- CAPEX -------------------------------------------------------------------


def capex_battery(e_nom: float | None, econ: EconParams = EconParams()) -> float:
    if not e_nom:
        return 0.0
    if e_nom < 0:
        raise EconomicsError("battery capacity must be non-negative")
    return e_nom * 1000.0 * econ.battery_cost_usd_per_kwh * econ.usd_to_eur * econ.battery_update_factor / 1e6


@dataclass(frozen=True)
class ElectrolyzerCapex:
    initial: float
    replacement: float


def capex_electrolyzer(
    n_mod: int,
    econ: EconParams = EconParams(),
    specific_cost: Callable[[float], float] | None = None,
    p_module_nom: float = 2.0,
) -> ElectrolyzerCapex:
    """Initial cost includes the installation factor; the replacement stack uses its own factor."""
    if n_mod < 1:
        raise EconomicsError("n_mod must be >= 1")
    p_nom = p_module_nom * n_mod
    cost_fn = specific_cost or econ.pem_specific_cost
    stack = p_nom * 1000.0 * cost_fn(p_nom) / 1e6
    return ElectrolyzerCapex(stack * econ.pem_install_factor, stack * econ.pem_replacement_install_factor)


def capex_vessel(volume: float | None, econ: EconParams = EconParams()) -> float:
    if not volume:
        return 0.0
    if volume < 0:
        raise EconomicsError("volume must be non-negative")
    return volume * econ.vessel_cost_usd_per_m3 * econ.usd_to_eur / 1e6


def capex_meoh(meoh_nom: float, econ: EconParams = EconParams()) -> float:
    """Six-tenths scaling from the reference plant, on an annual-capacity basis (t/h × operating hours)."""
    if meoh_nom <= 0:
        raise EconomicsError("methanol capacity must be positive")
    capacity = meoh_nom * econ.hours_per_year
    return capex_meoh_annual(capacity, econ)


def capex_meoh_annual(capacity_t_per_year: float, econ: EconParams = EconParams()) -> float:
    if capacity_t_per_year <= 0:
        raise EconomicsError("methanol capacity must be positive")
    return econ.capex_meoh_ref * (capacity_t_per_year / econ.meoh_ref_capacity_t) ** econ.sixtenths_b


def compressor_max_power(max_flow: float, beta_max: float, params: PlantParams | None = None) -> float:
    params = params or PlantParams()
    if max_flow <= 0:
        return 0.0
    return compressor_power(max_flow, max(beta_max, 1.0), params.compressor).power


def capex_compressor(
    max_flow: float,
    beta_max: float,
    p_pem: float | None = None,
    econ: EconParams = EconParams(),
    params: PlantParams | None = None,
) -> float:
    """Power-law cost on the compression power at maximum flow and ``beta_max``.

    ``p_pem`` is accepted for interface symmetry; the ratio already carries the pressure.
    """
    if max_flow < 0:
        raise EconomicsError("flow must be non-negative")
    power = compressor_max_power(max_flow, beta_max, params)
    if power <= 0:
        return 0.0
    return econ.compressor_c0 * (power / econ.compressor_p_ref_mw) ** econ.compressor_c1


def capex_breakdown(
    design: PlantDesign, econ: EconParams = EconParams(), params: PlantParams | None = None
) -> tuple[dict[str, float], float]:
    """CAPEX_0 by unit (M€) and the replacement stack cost."""
    params = params or PlantParams()
    pem = capex_electrolyzer(design.n_mod, econ, p_module_nom=params.electrolyzer.p_module_nom)
    h2_max = max_h2_production(design.n_mod, design.p_pem, params.electrolyzer)
    meoh_nom = design.h2_meoh_nom * params.meoh.meoh_per_h2
    capex = {
        "battery": capex_battery(design.e_batt_nom, econ),
        "electrolyzer": pem.initial,
        "compressor": capex_compressor(h2_max, design.beta_max, design.p_pem, econ, params),
        "vessel": capex_vessel(design.volume, econ),
        "meoh_plant": capex_meoh(meoh_nom, econ),
    }
    return capex, pem.replacement


# --- OPEX --------------------------------------------------------------------


@dataclass(frozen=True)
class OpexBreakdown:
    """Operating cost over a horizon, in €. ``electricity_sell`` is revenue (positive)."""

    electricity_buy: float
    electricity_sell: float
    cooling: float
    co2: float

    @property
    def total(self) -> float:
        return self.electricity_buy - self.electricity_sell + self.cooling + self.co2

    def scaled(self, factor: float) -> "OpexBreakdown":
        return OpexBreakdown(
            self.electricity_buy * factor, self.electricity_sell * factor, self.cooling * factor, self.co2 * factor
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "electricity_buy": self.electricity_buy,
            "electricity_sell": self.electricity_sell,
            "cooling": self.cooling,
            "co2": self.co2,
        }


def hour_cost(record, value: float, mode: Mode, econ: EconParams = EconParams()) -> OpexBreakdown:
    """Costs of one simulated hour (€)."""
    if mode is Mode.GRID:
        buy = value * record.electricity_drawn
        sell = value * econ.sell_price_factor * record.electricity_sold
    else:
        buy = sell = 0.0
    return OpexBreakdown(buy, sell, econ.cooling_cost * record.cooling, econ.co2_cost * record.co2)


def opex_period(trajectory: Trajectory, scenario: Scenario, econ: EconParams = EconParams(), check: bool = True) -> OpexBreakdown:
    if check and not trajectory.feasible:
        first = trajectory.violations[0]
        raise EconomicsError(f"trajectory is infeasible (hour {first.hour}: {first.kind.value})")
    if trajectory.steps != scenario.steps:
        raise EconomicsError("trajectory and scenario lengths differ")
    buy = sell = cooling = co2 = 0.0
    grid = scenario.mode is Mode.GRID
    for rec, value in zip(trajectory.records, scenario.values):
        if grid:
            buy += value * rec.electricity_drawn
            sell += value * econ.sell_price_factor * rec.electricity_sold
        cooling += rec.cooling
        co2 += rec.co2
    return OpexBreakdown(buy, sell, econ.cooling_cost * cooling, econ.co2_cost * co2)


def annualization_factor(horizon_h: float, econ: EconParams = EconParams()) -> float:
    if horizon_h <= 0:
        raise EconomicsError("horizon must be positive")
    return econ.hours_per_year / horizon_h


def annualize(period_opex, period_meoh: float, horizon_h: float, econ: EconParams = EconParams()):
    """Scale horizon totals to a year of operation. ``period_opex`` may be a number or an :class:`OpexBreakdown`."""
    f = annualization_factor(horizon_h, econ)
    opex = period_opex.scaled(f) if isinstance(period_opex, OpexBreakdown) else period_opex * f
    return opex, period_meoh * f


def annuity_factor(rate: float, years: int) -> float:
    return sum((1.0 + rate) ** -j for j in range(1, years + 1))


def c_meoh(
    capex0: float,
    pem_replacement: float,
    om_y: float,
    opex_y: float,
    meoh_y: float,
    econ: EconParams = EconParams(),
) -> float:
    """Specific methanol cost in €/kg from M€, M€/y and kt/y inputs."""
    if meoh_y <= 0:
        raise EconomicsError("methanol production must be positive")
    i = econ.discount_rate
    af = annuity_factor(i, econ.lifetime_years)
    repl = pem_replacement * (1.0 + i) ** -econ.pem_replacement_year if econ.pem_replacement_year <= econ.lifetime_years else 0.0
    num = capex0 + repl + (om_y + opex_y) * af  # M€
    den = meoh_y * af  # kt, i.e. Mkg
    return num / den


@dataclass
class CostReport:
    capex: dict[str, float]
    pem_replacement: float
    opex_year: dict[str, float]
    om_year: float
    meoh_year: float  # kt/y
    c_meoh: float  # €/kg
    extras: dict[str, float] = field(default_factory=dict)

    @property
    def capex0(self) -> float:
        return sum(self.capex.values())

    @property
    def opex_year_total(self) -> float:
        o = self.opex_year
        return o["electricity_buy"] - o["electricity_sell"] + o["cooling"] + o["co2"]

    def rows(self) -> list[tuple[str, str, float]]:
        out = [("capex", k, v) for k, v in self.capex.items()]
        out.append(("capex", "total", self.capex0))
        out.append(("capex", "pem_replacement", self.pem_replacement))
        out += [("opex_year", k, v) for k, v in self.opex_year.items()]
        out.append(("opex_year", "total", self.opex_year_total))
        out.append(("om_year", "total", self.om_year))
        out.append(("production", "meoh_kt_per_year", self.meoh_year))
        out.append(("result", "c_meoh_eur_per_kg", self.c_meoh))
        return out

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["group", "item", "value"])
            for group, item, value in self.rows():
                writer.writerow([group, item, f"{value:.3f}" if group != "result" else f"{value:.6f}"])

    def table(self) -> str:
        width = max(len(f"{g}.{i}") for g, i, _ in self.rows())
        lines = []
        for group, item, value in self.rows():
            unit = {"capex": "M€", "opex_year": "M€/y", "om_year": "M€/y", "production": "kt/y", "result": "€/kg"}[group]
            lines.append(f"{group + '.' + item:<{width}}  {value:12.3f} {unit}")
        return "\n".join(lines)


def cost_report(
    design: PlantDesign,
    trajectory: Trajectory,
    scenario: Scenario,
    econ: EconParams = EconParams(),
    params: PlantParams | None = None,
    check: bool = True,
) -> CostReport:
    capex, repl = capex_breakdown(design, econ, params)
    period = opex_period(trajectory, scenario, econ, check=check)
    meoh_t = float(sum(r.meoh for r in trajectory.records))
    opex_y, meoh_y_t = annualize(period, meoh_t, scenario.steps, econ)
    opex_m = {k: v / 1e6 for k, v in opex_y.as_dict().items()}
    capex0 = sum(capex.values())
    om = econ.om_frac * capex0
    meoh_kt = meoh_y_t / 1000.0
    opex_total = opex_y.total / 1e6
    cost = c_meoh(capex0, repl, om, opex_total, meoh_kt, econ) if meoh_kt > 0 else float("inf")
    return CostReport(capex, repl, opex_m, om, meoh_kt, cost)
