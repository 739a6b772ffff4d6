//! Tabular outputs: CSV with six decimals and a provenance header, or JSON at full precision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::curves::CurveSet;
use crate::emissions::{
    Classification, ContinentSummary, DecompositionResult, Fig3aRow, Fig3bRow, LedgerRow, ScenarioResult, Summary,
    SummaryRow,
};
use crate::error::{Error, Result};
use crate::params::ModelParameters;
use crate::propulsion::{ExceedanceResult, SensitivityRow};
use crate::registry::AircraftModel;
use crate::schedule::DeploymentStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) if v.is_finite() => format!("{v:.6}"),
            Cell::Num(_) | Cell::Missing => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Missing => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Provenance written at the top of every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: ModelParameters,
}

impl RunMeta {
    pub fn new(command: impl Into<String>, params: ModelParameters) -> Self {
        RunMeta {
            tool: "shorthaul",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self, format: Format) -> String {
        format!("{}.{}", self.name, format.extension())
    }

    pub fn to_csv(&self, meta: &RunMeta) -> Result<String> {
        let mut out = format!(
            "# {} {} {}\n# params {}\n",
            meta.tool,
            meta.version,
            meta.command,
            serde_json::to_string(&meta.params)?
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invariant(e.to_string()))?;
        out.push_str(std::str::from_utf8(&bytes).map_err(|e| Error::Invariant(e.to_string()))?);
        Ok(out)
    }

    pub fn to_json_value(&self, meta: &RunMeta) -> Result<Value> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| ((*c).to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Ok(json!({ "meta": serde_json::to_value(meta)?, "table": self.name, "rows": rows }))
    }

    pub fn render(&self, format: Format, meta: &RunMeta) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(meta),
            Format::Json => Ok(serde_json::to_string_pretty(&self.to_json_value(meta)?)? + "\n"),
        }
    }
}

pub fn exceedance_table(rows: &[(&AircraftModel, ExceedanceResult, Option<f64>)]) -> Table {
    let mut t = Table::new(
        "exceedance",
        &[
            "code",
            "category",
            "battery_mass_kg",
            "landing_mass_kg",
            "limit_kind",
            "ratio",
            "battery_share",
            "requisite_density_wh_kg",
        ],
    );
    for (m, e, density) in rows {
        t.push(vec![
            m.code.as_str().into(),
            m.category.as_str().into(),
            e.battery_mass_kg.into(),
            e.landing_mass_kg.into(),
            e.limit_kind.as_str().into(),
            e.ratio.into(),
            e.battery_share.into(),
            (*density).into(),
        ]);
    }
    t
}

pub struct DensityRow<'a> {
    pub model: &'a AircraftModel,
    pub exceedance_mlw: f64,
    pub density_mlw: Option<f64>,
    pub density_mtow: Option<f64>,
}

pub fn density_table(rows: &[DensityRow<'_>]) -> Table {
    let mut t = Table::new(
        "density",
        &[
            "code",
            "category",
            "exceedance_mlw",
            "requisite_density_mlw_wh_kg",
            "requisite_density_mtow_wh_kg",
        ],
    );
    for r in rows {
        t.push(vec![
            r.model.code.as_str().into(),
            r.model.category.as_str().into(),
            r.exceedance_mlw.into(),
            r.density_mlw.into(),
            r.density_mtow.into(),
        ]);
    }
    t
}

/// `(group, count, mean exceedance, mean MLW density, mean MTOW density)`
pub fn density_summary_table(rows: &[(String, usize, f64, f64, f64)]) -> Table {
    let mut t = Table::new(
        "density_summary",
        &[
            "group",
            "models",
            "mean_exceedance_mlw",
            "mean_requisite_density_mlw_wh_kg",
            "mean_requisite_density_mtow_wh_kg",
        ],
    );
    for (g, n, e, mlw, mtow) in rows {
        t.push(vec![g.as_str().into(), (*n).into(), (*e).into(), (*mlw).into(), (*mtow).into()]);
    }
    t
}

pub fn sensitivity_table(rows: &[SensitivityRow]) -> Table {
    let mut t = Table::new(
        "sensitivity",
        &["code", "parameter", "base_ratio", "new_ratio", "relative_change_pct"],
    );
    for r in rows {
        t.push(vec![
            r.code.as_str().into(),
            r.parameter.as_str().into(),
            r.base_ratio.into(),
            r.new_ratio.into(),
            r.relative_change_pct.into(),
        ]);
    }
    t
}

pub fn curves_table(curves: &CurveSet) -> Table {
    let mut t = Table::new(
        "curves",
        &[
            "code",
            "slope_kg_per_nm",
            "intercept_kg",
            "slope_wh_per_nm",
            "intercept_wh",
            "fit_points",
            "rmse_kg",
        ],
    );
    for c in curves.iter() {
        t.push(vec![
            c.fuel.code.as_str().into(),
            c.fuel.slope_kg_per_nm.into(),
            c.fuel.intercept_kg.into(),
            c.electric.slope_wh_per_nm.into(),
            c.electric.intercept_wh.into(),
            c.fuel.fit_points.into(),
            c.fuel.rmse_kg.into(),
        ]);
    }
    t
}

pub fn deployment_table(stats: &DeploymentStats) -> Table {
    let mut t = Table::new("deployment", &["model", "country", "miles_nm"]);
    for (k, miles) in &stats.miles {
        t.push(vec![k.model.as_str().into(), k.country.as_str().into(), (*miles).into()]);
    }
    t
}

pub fn country_emissions_table(rows: &[LedgerRow]) -> Table {
    let mut t = Table::new(
        "country_emissions",
        &[
            "country",
            "continent",
            "intensity_g_per_kwh",
            "tipping_g_per_kwh",
            "classification",
            "flights",
            "miles_nm",
            "fuel_emissions_kg",
            "electric_energy_wh",
            "electric_emissions_kg",
            "savings_kg",
            "savings_per_mile_kg",
            "recovered",
        ],
    );
    for r in rows {
        t.push(vec![
            r.country.as_str().into(),
            r.continent.as_str().into(),
            r.intensity_g_per_kwh.into(),
            r.tipping_g_per_kwh.into(),
            r.classification.as_str().into(),
            r.flights.map_or(Cell::Missing, Cell::from),
            r.miles_nm.into(),
            r.fuel_emissions_kg.into(),
            r.electric_energy_wh.into(),
            r.electric_emissions_kg.into(),
            r.savings_kg.into(),
            (r.miles_nm > 0.0).then(|| r.savings_kg / r.miles_nm).into(),
            r.recovered.into(),
        ]);
    }
    t
}

fn summary_cells(region: &str, group: &str, s: &SummaryRow) -> Vec<Cell> {
    vec![
        region.into(),
        group.into(),
        s.countries.into(),
        s.miles_nm.into(),
        s.mean_intensity_g_per_kwh.into(),
        s.savings_kg.into(),
        s.savings_per_mile_kg.into(),
        s.electric_energy_wh.into(),
    ]
}

pub fn continent_summary_table(summary: &Summary) -> Table {
    let mut t = Table::new(
        "continent_summary",
        &[
            "region",
            "group",
            "countries",
            "miles_nm",
            "mean_intensity_g_per_kwh",
            "savings_kg",
            "savings_per_mile_kg",
            "electric_energy_wh",
        ],
    );
    for ContinentSummary {
        continent,
        aggregate,
        clean,
        dirty,
    } in &summary.continents
    {
        let name = continent.as_str();
        t.push(summary_cells(name, "aggregate", aggregate));
        t.push(summary_cells(name, Classification::Clean.as_str(), clean));
        t.push(summary_cells(name, Classification::Dirty.as_str(), dirty));
    }
    t.push(summary_cells("Global", "aggregate", &summary.global));
    t
}

pub struct TippingRow {
    pub country: String,
    pub flights: u64,
    pub miles_nm: f64,
    pub fuel_emissions_kg: f64,
    pub electric_energy_wh: f64,
    pub tipping_g_per_kwh: f64,
}

pub fn tipping_table(rows: &[TippingRow]) -> Table {
    let mut t = Table::new(
        "tipping",
        &[
            "country",
            "flights",
            "miles_nm",
            "fuel_emissions_kg",
            "electric_energy_wh",
            "tipping_g_per_kwh",
        ],
    );
    for r in rows {
        t.push(vec![
            r.country.as_str().into(),
            r.flights.into(),
            r.miles_nm.into(),
            r.fuel_emissions_kg.into(),
            r.electric_energy_wh.into(),
            r.tipping_g_per_kwh.into(),
        ]);
    }
    t
}

/// Scenario rows with their rank by absolute and by relative change (1 = largest).
pub fn scenario_table(rows: &[(&ScenarioResult, usize, usize)]) -> Table {
    let mut t = Table::new(
        "scenario",
        &[
            "country",
            "improvement_fraction",
            "absolute_delta_kg",
            "relative_delta_pct",
            "rank_absolute",
            "rank_relative",
        ],
    );
    for (s, ra, rr) in rows {
        t.push(vec![
            s.country.as_str().into(),
            s.improvement_fraction.into(),
            s.absolute_delta_kg.into(),
            s.relative_delta_pct.into(),
            (*ra).into(),
            (*rr).into(),
        ]);
    }
    t
}

pub fn rank_table(key: &'static str, rows: &[&LedgerRow], value: impl Fn(&LedgerRow) -> Option<f64>) -> Table {
    let mut t = Table::new("rank", &["rank", "country", "continent", key]);
    for (i, r) in rows.iter().enumerate() {
        t.push(vec![
            (i + 1).into(),
            r.country.as_str().into(),
            r.continent.as_str().into(),
            value(r).into(),
        ]);
    }
    t
}

pub fn decomposition_table(d: &DecompositionResult) -> Table {
    let mut t = Table::new(
        "decomposition",
        &["step", "factor", "savings_after_kg", "contribution_kg", "share_pct"],
    );
    let c = &d.contributions;
    let steps = [
        ("grid", Some(d.savings_after_kg[0]), c.grid),
        ("flight_count", Some(d.savings_after_kg[1]), c.flight_count),
        ("distance", Some(d.savings_after_kg[2]), c.distance),
        ("composition", None, c.composition),
    ];
    for (i, (factor, after, contrib)) in steps.into_iter().enumerate() {
        t.push(vec![
            (i + 1).into(),
            factor.into(),
            after.into(),
            contrib.kg.into(),
            contrib.pct.into(),
        ]);
    }
    t
}

pub fn fig3b_table(rows: &[Fig3bRow]) -> Table {
    let mut t = Table::new(
        "fig3b",
        &["country", "intensity_g_per_kwh", "ln_miles", "savings_kg", "classification"],
    );
    for r in rows {
        t.push(vec![
            r.country.as_str().into(),
            r.intensity_g_per_kwh.into(),
            r.ln_miles.into(),
            r.savings_kg.into(),
            r.classification.as_str().into(),
        ]);
    }
    t
}

pub fn fig3a_table(rows: &[Fig3aRow]) -> Table {
    let mut t = Table::new(
        "fig3a",
        &[
            "continent",
            "countries",
            "mean_intensity_g_per_kwh",
            "mean_miles_nm",
            "savings_kg",
        ],
    );
    for r in rows {
        t.push(vec![
            r.continent.as_str().into(),
            r.countries.into(),
            r.mean_intensity_g_per_kwh.into(),
            r.mean_miles_nm.into(),
            r.savings_kg.into(),
        ]);
    }
    t
}
