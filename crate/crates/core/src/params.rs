//! Global physical and policy constants shared by every computation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Watt-hours per megajoule (exact).
pub const WH_PER_MJ: f64 = 1000.0 / 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParameters {
    /// Lower heating value of kerosene, MJ/kg.
    pub lhv_mj_per_kg: f64,
    /// Combustion powertrain efficiency.
    pub eta_fossil: f64,
    /// Electric powertrain efficiency.
    pub eta_electric: f64,
    pub wh_per_mj: f64,
    /// Battery gravimetric energy density, Wh/kg.
    pub battery_density_wh_per_kg: f64,
    /// Mass per passenger including baggage, kg.
    pub pax_mass_kg: f64,
    /// kg CO2e emitted per kg of kerosene burned.
    pub ci_fuel_kg_per_kg: f64,
    /// Flights strictly below this distance are short haul.
    pub short_haul_nm: f64,
    /// Grids above this intensity are classified dirty.
    pub dirty_grid_g_per_kwh: f64,
}

impl Default for ModelParameters {
    fn default() -> Self {
        Self {
            lhv_mj_per_kg: 43.1,
            eta_fossil: 0.40,
            eta_electric: 0.80,
            wh_per_mj: WH_PER_MJ,
            battery_density_wh_per_kg: 300.0,
            pax_mass_kg: 95.0,
            ci_fuel_kg_per_kg: 3.16,
            short_haul_nm: 200.0,
            dirty_grid_g_per_kwh: 530.0,
        }
    }
}

impl ModelParameters {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lhv_mj_per_kg", self.lhv_mj_per_kg),
            ("wh_per_mj", self.wh_per_mj),
            ("battery_density_wh_per_kg", self.battery_density_wh_per_kg),
            ("pax_mass_kg", self.pax_mass_kg),
            ("ci_fuel_kg_per_kg", self.ci_fuel_kg_per_kg),
            ("short_haul_nm", self.short_haul_nm),
            ("dirty_grid_g_per_kwh", self.dirty_grid_g_per_kwh),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    rule: "must be finite and strictly positive",
                });
            }
        }
        if !(self.eta_fossil > 0.0 && self.eta_fossil < 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta_fossil",
                value: self.eta_fossil,
                rule: "must lie in (0, 1)",
            });
        }
        if !(self.eta_electric > 0.0 && self.eta_electric <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta_electric",
                value: self.eta_electric,
                rule: "must lie in (0, 1]",
            });
        }
        Ok(())
    }

    /// Battery-side Wh needed per kg of kerosene the mission would have burned.
    pub fn wh_per_kg_fuel(&self) -> f64 {
        self.lhv_mj_per_kg * (self.eta_fossil / self.eta_electric) * self.wh_per_mj
    }

    /// Grid intensity (g/kWh) at which electric and kerosene emissions are equal
    /// when electric energy is an exact rescaling of fuel burn.
    pub fn closed_form_tipping_g_per_kwh(&self) -> f64 {
        self.ci_fuel_kg_per_kg * 1.0e6 / self.wh_per_kg_fuel()
    }

    pub fn with_overrides(mut self, o: &ParamOverrides) -> Self {
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field { self.$field = v; })*
            };
        }
        apply!(
            lhv_mj_per_kg,
            eta_fossil,
            eta_electric,
            wh_per_mj,
            battery_density_wh_per_kg,
            pax_mass_kg,
            ci_fuel_kg_per_kg,
            short_haul_nm,
            dirty_grid_g_per_kwh
        );
        self
    }
}

/// Partial parameter set, as read from a config file or command-line flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub lhv_mj_per_kg: Option<f64>,
    pub eta_fossil: Option<f64>,
    pub eta_electric: Option<f64>,
    pub wh_per_mj: Option<f64>,
    pub battery_density_wh_per_kg: Option<f64>,
    pub pax_mass_kg: Option<f64>,
    pub ci_fuel_kg_per_kg: Option<f64>,
    pub short_haul_nm: Option<f64>,
    pub dirty_grid_g_per_kwh: Option<f64>,
}

impl ParamOverrides {
    /// Fields set in `self` win over those in `lower`.
    pub fn layered_over(self, lower: ParamOverrides) -> ParamOverrides {
        macro_rules! pick {
            ($($field:ident),*) => {
                ParamOverrides { $($field: self.$field.or(lower.$field)),* }
            };
        }
        pick!(
            lhv_mj_per_kg,
            eta_fossil,
            eta_electric,
            wh_per_mj,
            battery_density_wh_per_kg,
            pax_mass_kg,
            ci_fuel_kg_per_kg,
            short_haul_nm,
            dirty_grid_g_per_kwh
        )
    }
}
