//! Kerosene-to-battery conversion, weight-limit exceedance and the analyses built on it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParameters;
use crate::registry::AircraftModel;

/// Energy chain from mission fuel to battery mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatteryRequirement {
    pub fuel_energy_mj: f64,
    pub propulsive_energy_mj: f64,
    /// Electric-side energy expressed in MJ before unit conversion.
    pub electric_energy_mj: f64,
    pub battery_energy_wh: f64,
    pub battery_mass_kg: f64,
}

pub fn battery_requirement(fuel_kg: f64, params: &ModelParameters) -> Result<BatteryRequirement> {
    if fuel_kg < 0.0 || fuel_kg.is_nan() {
        return Err(Error::Negative("fuel mass", fuel_kg));
    }
    let fuel_energy_mj = fuel_kg * params.lhv_mj_per_kg;
    let propulsive_energy_mj = fuel_energy_mj * params.eta_fossil;
    let electric_energy_mj = propulsive_energy_mj / params.eta_electric;
    let battery_energy_wh = electric_energy_mj * params.wh_per_mj;
    Ok(BatteryRequirement {
        fuel_energy_mj,
        propulsive_energy_mj,
        electric_energy_mj,
        battery_energy_wh,
        battery_mass_kg: battery_energy_wh / params.battery_density_wh_per_kg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LimitKind {
    /// Maximum landing weight.
    #[default]
    Mlw,
    /// Maximum takeoff weight.
    Mtow,
}

impl LimitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LimitKind::Mlw => "mlw",
            LimitKind::Mtow => "mtow",
        }
    }

    pub fn limit_kg(self, model: &AircraftModel) -> f64 {
        match self {
            LimitKind::Mlw => model.mlw_kg,
            LimitKind::Mtow => model.mtow_kg,
        }
    }
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LimitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mlw" => Ok(LimitKind::Mlw),
            "mtow" => Ok(LimitKind::Mtow),
            other => Err(format!("unknown limit `{other}` (expected mlw or mtow)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceedanceResult {
    pub battery_mass_kg: f64,
    pub landing_mass_kg: f64,
    pub limit_kind: LimitKind,
    pub limit_kg: f64,
    /// landing mass / limit; above 1.0 the mission is infeasible.
    pub ratio: f64,
    pub battery_share: f64,
}

fn passenger_mass(model: &AircraftModel, params: &ModelParameters) -> f64 {
    f64::from(model.seats) * params.pax_mass_kg
}

fn exceedance_with_energy(
    model: &AircraftModel,
    params: &ModelParameters,
    limit_kind: LimitKind,
    battery_energy_wh: f64,
) -> Result<ExceedanceResult> {
    let limit_kg = limit_kind.limit_kg(model);
    if !(limit_kg > 0.0) {
        return Err(Error::NonPositive {
            line: 0,
            code: model.code.clone(),
            field: "weight limit",
            value: limit_kg,
        });
    }
    let battery_mass_kg = battery_energy_wh / params.battery_density_wh_per_kg;
    let landing_mass_kg = model.empty_kg + passenger_mass(model, params) + battery_mass_kg;
    Ok(ExceedanceResult {
        battery_mass_kg,
        landing_mass_kg,
        limit_kind,
        limit_kg,
        ratio: landing_mass_kg / limit_kg,
        battery_share: battery_mass_kg / limit_kg,
    })
}

/// Full-load battery-electric mass of `model` on the 200 nm mission relative to a weight limit.
pub fn exceedance(
    model: &AircraftModel,
    params: &ModelParameters,
    limit_kind: LimitKind,
) -> Result<ExceedanceResult> {
    let req = battery_requirement(model.fuel_200nm_kg, params)?;
    exceedance_with_energy(model, params, limit_kind, req.battery_energy_wh)
}

/// Battery density (Wh/kg) at which the exceedance ratio is exactly 1.
pub fn requisite_density(
    model: &AircraftModel,
    params: &ModelParameters,
    limit_kind: LimitKind,
) -> Result<f64> {
    let allowance = limit_kind.limit_kg(model) - model.empty_kg - passenger_mass(model, params);
    if !(allowance > 0.0) {
        return Err(Error::NoBatteryAllowance {
            code: model.code.clone(),
            limit: limit_kind.as_str(),
            allowance,
        });
    }
    let req = battery_requirement(model.fuel_200nm_kg, params)?;
    Ok(req.battery_energy_wh / allowance)
}

/// Exceedance against MLW with mission energy inflated by `reserve_factor` (0.33 = +33%).
pub fn reserve_stress(
    model: &AircraftModel,
    params: &ModelParameters,
    reserve_factor: f64,
) -> Result<ExceedanceResult> {
    if reserve_factor < 0.0 || reserve_factor.is_nan() {
        return Err(Error::Negative("reserve factor", reserve_factor));
    }
    let req = battery_requirement(model.fuel_200nm_kg, params)?;
    exceedance_with_energy(
        model,
        params,
        LimitKind::Mlw,
        req.battery_energy_wh * (1.0 + reserve_factor),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityParameter {
    PaxMassMinus5,
    EtaFossilMinus5,
    EtaElectricPlus5,
    DensityPlus5,
    MlwPlus5,
}

impl SensitivityParameter {
    pub const ALL: [SensitivityParameter; 5] = [
        SensitivityParameter::PaxMassMinus5,
        SensitivityParameter::EtaFossilMinus5,
        SensitivityParameter::EtaElectricPlus5,
        SensitivityParameter::DensityPlus5,
        SensitivityParameter::MlwPlus5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SensitivityParameter::PaxMassMinus5 => "pax_mass_minus_5pct",
            SensitivityParameter::EtaFossilMinus5 => "eta_fossil_minus_5pct",
            SensitivityParameter::EtaElectricPlus5 => "eta_electric_plus_5pct",
            SensitivityParameter::DensityPlus5 => "density_plus_5pct",
            SensitivityParameter::MlwPlus5 => "mlw_plus_5pct",
        }
    }

    fn perturb(self, model: &AircraftModel, params: &ModelParameters) -> (AircraftModel, ModelParameters) {
        let mut m = model.clone();
        let mut p = *params;
        match self {
            SensitivityParameter::PaxMassMinus5 => p.pax_mass_kg *= 0.95,
            SensitivityParameter::EtaFossilMinus5 => p.eta_fossil *= 0.95,
            SensitivityParameter::EtaElectricPlus5 => p.eta_electric *= 1.05,
            SensitivityParameter::DensityPlus5 => p.battery_density_wh_per_kg *= 1.05,
            SensitivityParameter::MlwPlus5 => m.mlw_kg *= 1.05,
        }
        (m, p)
    }
}

impl fmt::Display for SensitivityParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub code: String,
    pub parameter: SensitivityParameter,
    pub base_ratio: f64,
    pub new_ratio: f64,
    pub relative_change_pct: f64,
}

/// MLW exceedance with each parameter perturbed by 5% on its own.
pub fn sensitivity_table(model: &AircraftModel, params: &ModelParameters) -> Result<Vec<SensitivityRow>> {
    let base_ratio = exceedance(model, params, LimitKind::Mlw)?.ratio;
    SensitivityParameter::ALL
        .into_iter()
        .map(|parameter| {
            let (m, p) = parameter.perturb(model, params);
            // eta_electric may be pushed past 1 for high baselines; the physics still holds.
            let new_ratio = exceedance(&m, &p, LimitKind::Mlw)?.ratio;
            Ok(SensitivityRow {
                code: model.code.clone(),
                parameter,
                base_ratio,
                new_ratio,
                relative_change_pct: 100.0 * (new_ratio / base_ratio - 1.0),
            })
        })
        .collect()
}
