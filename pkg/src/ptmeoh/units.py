"""Steady-state models of the plant units.

Battery, PEM electrolyzer fleet, hydrogen compressor with aftercooler,
pressurised hydrogen vessel and the (linearised) methanol synthesis plant.
Every function here is pure: states go in, new states come out, nothing is
clamped. Bound checking is the job of :mod:`ptmeoh.plant`.

Units used throughout: power in MW, energy in MWh, hydrogen/methanol flows
in t/h, vessel inventory in kg, pressures in bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

HOURS_PER_DAY = 24

# (pressure ratio, kW) for 1.9 t/h of H2 entering at 40 bar: reference model
# output and the process-simulator benchmark it was validated against.
COMPRESSOR_VALIDATION_MODEL = ((2.0, 710.0), (2.5, 970.0), (3.0, 1196.0), (3.5, 1397.0))
COMPRESSOR_VALIDATION_BENCHMARK = ((2.0, 710.0), (2.5, 973.0), (3.0, 1202.0), (3.5, 1406.0))
COMPRESSOR_VALIDATION_FLOW = 1.9  # t/h

_EPS = 1e-9


def hourly_rate_from_daily(daily_loss: float) -> float:
    """Convert a per-day fractional loss into the compounding hourly rate."""
    return 1.0 - (1.0 - daily_loss) ** (1.0 / HOURS_PER_DAY)


@dataclass(frozen=True)
class BatteryParams:
    eta_ch: float = 0.975
    eta_disch: float = 0.975
    eta_dc_ac: float = 0.95
    r_self_disch_hourly: float = hourly_rate_from_daily(0.002)
    soc_min_frac: float = 0.10
    min_flow: float = 0.5  # MW, smallest non-zero flow
    max_flow: float = 100.0  # MW, absolute cap on any battery flow
    flow_cap_frac: float = 0.9  # per-hour cap as a fraction of capacity

    def __post_init__(self):
        for name in ("eta_ch", "eta_disch", "eta_dc_ac"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")
        if not 0.0 <= self.r_self_disch_hourly < 1.0:
            raise ValueError("r_self_disch_hourly must lie in [0, 1)")
        if not 0.0 <= self.soc_min_frac < 1.0:
            raise ValueError("soc_min_frac must lie in [0, 1)")
        if self.min_flow < 0 or self.max_flow <= 0 or self.flow_cap_frac <= 0:
            raise ValueError("battery flow limits must be positive")

    def flow_cap(self, e_nom: float) -> float:
        """Largest admissible charge or discharge flow for a battery of ``e_nom`` MWh."""
        return min(self.max_flow, self.flow_cap_frac * e_nom)


@dataclass(frozen=True)
class BatteryState:
    energy: float  # MWh


@dataclass(frozen=True)
class ElectrolyzerParams:
    a00: float = 0.813
    a10: float = -1.010e-1  # 1/MW
    a20: float = 1.397e-2  # 1/MW^2
    a01: float = -3.118e-4  # 1/bar
    p_module_nom: float = 2.0  # MW
    p_module_max: float = 2.5  # MW
    load_min_frac: float = 0.25  # of nominal module power
    aux_frac: float = 0.05
    lhv_h2: float = 33.33  # MWh/t
    fit_p_min: float = 0.2  # MW per module, lower edge of the fitted data
    p_pem_min: float = 20.0  # bar
    p_pem_max: float = 40.0  # bar

    @property
    def p_module_min(self) -> float:
        return self.load_min_frac * self.p_module_nom


@dataclass(frozen=True)
class CompressorParams:
    cp_h2: float = 14.31  # kJ/(kg K)
    k_h2: float = 1.405
    eta_is: float = 0.8
    eta_mec: float = 0.8762  # least-squares fit to COMPRESSOR_VALIDATION_MODEL
    t_in: float = 298.0  # K
    load_min_frac: float = 0.25

    def __post_init__(self):
        if not (0.0 < self.eta_is <= 1.0 and 0.0 < self.eta_mec <= 1.0):
            raise ValueError("compressor efficiencies must lie in (0, 1]")
        if self.k_h2 <= 1.0:
            raise ValueError("heat capacity ratio must exceed 1")


@dataclass(frozen=True)
class VesselParams:
    slope: float = 0.073  # kg/(m3 bar), linearised density
    p_floor: float = 75.0  # bar, methanol synthesis pressure

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError("density slope must be positive")


@dataclass(frozen=True)
class MeohPlantParams:
    """Linear methanol plant anchored at its reference operating point."""

    ref_h2: float = 1.9  # t/h
    ref_meoh: float = 9.9  # t/h
    ref_co2: float = 15.4  # t/h
    ref_elec: float = 1.8  # MW
    ref_cooling: float = 13.8  # MW
    load_min_frac: float = 0.20

    def __post_init__(self):
        if min(self.ref_h2, self.ref_meoh, self.ref_co2, self.ref_elec, self.ref_cooling) <= 0:
            raise ValueError("methanol plant reference data must be positive")

    @property
    def meoh_per_h2(self) -> float:
        return self.ref_meoh / self.ref_h2

    @property
    def co2_per_meoh(self) -> float:
        return self.ref_co2 / self.ref_meoh

    @property
    def elec_per_meoh(self) -> float:
        return self.ref_elec / self.ref_meoh

    @property
    def cooling_per_meoh(self) -> float:
        return self.ref_cooling / self.ref_meoh


class ElectrolyzerOutput(NamedTuple):
    h2_rate: float  # t/h
    cooling: float  # MW
    aux_power: float  # MW
    efficiency: float


class CompressorOutput(NamedTuple):
    power: float  # MW
    cooling: float  # MW


class MeohRates(NamedTuple):
    meoh: float  # t/h
    co2_in: float  # t/h
    elec: float  # MW
    cooling: float  # MW


# --- battery -----------------------------------------------------------------


def battery_step(
    state: BatteryState, p_in: float, p_out_total: float, params: BatteryParams, dt: float = 1.0
) -> BatteryState:
    """Advance the stored energy by one step. Bounds are not enforced here."""
    if p_in < 0 or p_out_total < 0:
        raise ValueError("battery flows must be non-negative")
    if dt <= 0:
        raise ValueError("dt must be positive")
    energy = (
        state.energy * (1.0 - params.r_self_disch_hourly)
        + p_in * params.eta_ch * dt
        - p_out_total / params.eta_disch * dt
    )
    return BatteryState(energy)


def battery_output_split(p_to_grid: float, p_to_pem: float, params: BatteryParams) -> float:
    """DC power leaving the battery for an AC export and a DC feed to the electrolyzer."""
    if p_to_grid < 0 or p_to_pem < 0:
        raise ValueError("battery flows must be non-negative")
    return p_to_grid / params.eta_dc_ac + p_to_pem


# --- electrolyzer ------------------------------------------------------------


def efficiency_poly(p_mod: float, p_pem: float, params: ElectrolyzerParams) -> float:
    """LHV efficiency fit without any domain check (used for extrapolated, flagged hours)."""
    return params.a00 + params.a10 * p_mod + params.a20 * p_mod * p_mod + params.a01 * p_pem


def electrolyzer_efficiency(p_mod: float, p_pem: float, params: ElectrolyzerParams | None = None) -> float:
    params = params or ElectrolyzerParams()
    if not params.fit_p_min - _EPS <= p_mod <= params.p_module_max + _EPS:
        raise ValueError(
            f"module power {p_mod} MW outside fitted range "
            f"[{params.fit_p_min}, {params.p_module_max}] MW"
        )
    if not params.p_pem_min - _EPS <= p_pem <= params.p_pem_max + _EPS:
        raise ValueError(
            f"pressure {p_pem} bar outside fitted range [{params.p_pem_min}, {params.p_pem_max}] bar"
        )
    return efficiency_poly(p_mod, p_pem, params)


def electrolyzer_output(
    p_total: float, n_mod: int, p_pem: float, params: ElectrolyzerParams | None = None
) -> ElectrolyzerOutput:
    """Hydrogen, cooling and auxiliary demand of a fleet sharing load equally.

    ``p_total == 0`` means the fleet is off. Otherwise the per-module load must lie
    in the operating window, else ``ValueError``.
    """
    params = params or ElectrolyzerParams()
    if n_mod < 1:
        raise ValueError("n_mod must be at least 1")
    if p_total == 0:
        return ElectrolyzerOutput(0.0, 0.0, 0.0, 0.0)
    p_mod = p_total / n_mod
    if not params.p_module_min - _EPS <= p_mod <= params.p_module_max + _EPS:
        raise ValueError(
            f"module load {p_mod:.4f} MW outside operating window "
            f"[{params.p_module_min}, {params.p_module_max}] MW"
        )
    return _electrolyzer_raw(p_total, n_mod, p_pem, params)


def _electrolyzer_raw(p_total: float, n_mod: int, p_pem: float, params: ElectrolyzerParams) -> ElectrolyzerOutput:
    if p_total <= 0:
        return ElectrolyzerOutput(0.0, 0.0, 0.0, 0.0)
    eta = efficiency_poly(p_total / n_mod, p_pem, params)
    return ElectrolyzerOutput(
        h2_rate=eta * p_total / params.lhv_h2,
        cooling=(1.0 - eta) * p_total,
        aux_power=params.aux_frac * p_total,
        efficiency=eta,
    )


def max_h2_production(n_mod: int, p_pem: float, params: ElectrolyzerParams | None = None) -> float:
    params = params or ElectrolyzerParams()
    return _electrolyzer_raw(params.p_module_max * n_mod, n_mod, p_pem, params).h2_rate


def power_for_h2(h2_rate: float, n_mod: int, p_pem: float, params: ElectrolyzerParams | None = None) -> float:
    """Fleet power that produces ``h2_rate`` t/h (inverse of the hydrogen yield).

    Hydrogen yield is increasing in load over the fitted range, so Newton on
    the per-module cubic converges from the top of the window; bisection
    guards the few cases Newton overshoots.
    """
    params = params or ElectrolyzerParams()
    if h2_rate <= 0:
        return 0.0
    c0 = params.a00 + params.a01 * p_pem
    target = h2_rate * params.lhv_h2 / n_mod  # per-module eta*P

    def f(p):
        return p * (c0 + params.a10 * p + params.a20 * p * p) - target

    def df(p):
        return c0 + 2.0 * params.a10 * p + 3.0 * params.a20 * p * p

    lo, hi = 0.0, params.p_module_max * 1.2
    p = params.p_module_max
    for _ in range(60):
        fp = f(p)
        if fp > 0:
            hi = min(hi, p)
        else:
            lo = max(lo, p)
        step = fp / df(p)
        p_new = p - step
        if not lo <= p_new <= hi:
            p_new = 0.5 * (lo + hi)
        if abs(p_new - p) <= 1e-15 * max(1.0, p):
            p = p_new
            break
        p = p_new
    return p * n_mod


# --- compressor --------------------------------------------------------------


def _compressor_factor(beta: float, params: CompressorParams) -> float:
    """kW per kg/s of hydrogen at pressure ratio ``beta``."""
    exponent = (params.k_h2 - 1.0) / params.k_h2
    return params.cp_h2 * params.t_in / (params.eta_is * params.eta_mec) * (beta**exponent - 1.0)


def compressor_power(m_dot: float, beta: float, params: CompressorParams | None = None) -> CompressorOutput:
    """Adiabatic compression power for ``m_dot`` t/h at ratio ``beta``; cooling equals power."""
    params = params or CompressorParams()
    if beta < 1.0:
        raise ValueError(f"pressure ratio must be >= 1, got {beta}")
    if m_dot < 0:
        raise ValueError("mass flow must be non-negative")
    if m_dot == 0 or beta == 1.0:
        return CompressorOutput(0.0, 0.0)
    power_kw = m_dot * 1000.0 / 3600.0 * _compressor_factor(beta, params)
    return CompressorOutput(power_kw / 1000.0, power_kw / 1000.0)


def calibrate_mechanical_efficiency(
    points: Sequence[tuple[float, float]] = COMPRESSOR_VALIDATION_MODEL,
    m_dot: float = COMPRESSOR_VALIDATION_FLOW,
    params: CompressorParams | None = None,
) -> float:
    """Least-squares mechanical efficiency from (pressure ratio, power kW) pairs.

    Power is proportional to 1/eta_mec, so the fit is linear in that reciprocal
    and has a closed form.
    """
    params = params or CompressorParams()
    unit = CompressorParams(
        cp_h2=params.cp_h2, k_h2=params.k_h2, eta_is=params.eta_is, eta_mec=1.0, t_in=params.t_in
    )
    betas = np.array([b for b, _ in points], dtype=float)
    target = np.array([p for _, p in points], dtype=float)
    base = np.array([compressor_power(m_dot, b, unit).power * 1000.0 for b in betas])
    inv_eta = float(base @ target / (base @ base))
    return 1.0 / inv_eta


# --- vessel ------------------------------------------------------------------


def vessel_pressure(mass: float, volume: float, params: VesselParams | None = None) -> float:
    """Pressure (bar) for ``mass`` kg stored above the floor pressure."""
    params = params or VesselParams()
    if volume <= 0:
        raise ValueError("vessel volume must be positive")
    return params.p_floor + mass / (params.slope * volume)


def vessel_mass(pressure: float, volume: float, params: VesselParams | None = None) -> float:
    params = params or VesselParams()
    return params.slope * volume * (pressure - params.p_floor)


def vessel_step(mass: float, h2_in: float, h2_out: float, dt: float = 1.0) -> float:
    if h2_in < 0 or h2_out < 0:
        raise ValueError("vessel flows must be non-negative")
    return mass + (h2_in - h2_out) * dt * 1000.0


# --- methanol plant ----------------------------------------------------------


def meoh_rates(h2_in: float, params: MeohPlantParams | None = None) -> MeohRates:
    params = params or MeohPlantParams()
    if h2_in < 0:
        raise ValueError("hydrogen feed must be non-negative")
    # scaling the reference point keeps it exact at load 1
    load = h2_in / params.ref_h2
    return MeohRates(
        meoh=params.ref_meoh * load,
        co2_in=params.ref_co2 * load,
        elec=params.ref_elec * load,
        cooling=params.ref_cooling * load,
    )


@dataclass(frozen=True)
class PlantParams:
    """All unit parameters bundled for the plant model."""

    battery: BatteryParams = BatteryParams()
    electrolyzer: ElectrolyzerParams = ElectrolyzerParams()
    compressor: CompressorParams = CompressorParams()
    vessel: VesselParams = VesselParams()
    meoh: MeohPlantParams = MeohPlantParams()


def is_close(a: float, b: float, rel: float = 1e-9) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=rel)
