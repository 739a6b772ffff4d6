//! Affine fuel-burn curves per aircraft and the electric-energy curves derived from them.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::data;
use crate::error::{Error, Result};
use crate::params::ModelParameters;

pub const FUEL_POINTS_HEADER: [&str; 3] = ["code", "distance_nm", "fuel_kg"];

/// fuel_kg = slope_kg_per_nm * distance_nm + intercept_kg
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuelBurnCurve {
    pub code: String,
    pub slope_kg_per_nm: f64,
    pub intercept_kg: f64,
    pub fit_points: usize,
    pub rmse_kg: f64,
    /// Set when the intercept was forced to zero on request.
    pub through_origin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectricEnergyCurve {
    pub code: String,
    pub slope_wh_per_nm: f64,
    pub intercept_wh: f64,
}

fn check_distance(distance_nm: f64) -> Result<()> {
    if distance_nm < 0.0 || distance_nm.is_nan() {
        return Err(Error::Negative("distance", distance_nm));
    }
    Ok(())
}

impl FuelBurnCurve {
    pub fn predict(&self, distance_nm: f64) -> Result<f64> {
        check_distance(distance_nm)?;
        Ok(self.slope_kg_per_nm * distance_nm + self.intercept_kg)
    }
}

impl ElectricEnergyCurve {
    pub fn predict(&self, distance_nm: f64) -> Result<f64> {
        check_distance(distance_nm)?;
        Ok(self.slope_wh_per_nm * distance_nm + self.intercept_wh)
    }
}

/// Unconstrained least-squares line `(slope, intercept, rmse)`; `None` when all x coincide.
pub fn ols(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    Some((slope, intercept, rmse(points, slope, intercept)))
}

fn rmse(points: &[(f64, f64)], slope: f64, intercept: f64) -> f64 {
    let sse: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    (sse / points.len() as f64).sqrt()
}

fn check_points(code: &str, points: &[(f64, f64)]) -> Result<()> {
    for &(d, f) in points {
        if !(d > 0.0 && d.is_finite() && f > 0.0 && f.is_finite()) {
            return Err(Error::Fit {
                code: code.to_string(),
                message: format!("observation ({d} nm, {f} kg) must be finite and positive"),
            });
        }
    }
    Ok(())
}

/// Ordinary least-squares affine fit. Needs two distinct distances and must come out
/// with a positive slope and a non-negative intercept.
pub fn fit_fuel_curve(code: &str, points: &[(f64, f64)]) -> Result<FuelBurnCurve> {
    check_points(code, points)?;
    let fit_err = |message: String| Error::Fit {
        code: code.to_string(),
        message,
    };
    let (slope, mut intercept, rmse_kg) = ols(points)
        .ok_or_else(|| fit_err("need at least 2 distinct distances".to_string()))?;
    if !(slope > 0.0) {
        return Err(fit_err(format!("fitted slope {slope} kg/nm is not positive")));
    }
    // Exactly proportional data can land a few ulps below zero.
    let scale = points.iter().map(|p| p.1).fold(0.0, f64::max);
    if intercept < 0.0 && intercept > -1e-9 * scale {
        intercept = 0.0;
    }
    if intercept < 0.0 {
        return Err(fit_err(format!("fitted intercept {intercept} kg is negative")));
    }
    Ok(FuelBurnCurve {
        code: code.to_string(),
        slope_kg_per_nm: slope,
        intercept_kg: intercept,
        fit_points: points.len(),
        rmse_kg,
        through_origin: false,
    })
}

/// Least-squares line forced through the origin. Accepts a single observation.
pub fn fit_through_origin(code: &str, points: &[(f64, f64)]) -> Result<FuelBurnCurve> {
    check_points(code, points)?;
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    if sxx == 0.0 {
        return Err(Error::Fit {
            code: code.to_string(),
            message: "no observations".to_string(),
        });
    }
    let slope = points.iter().map(|p| p.0 * p.1).sum::<f64>() / sxx;
    Ok(FuelBurnCurve {
        code: code.to_string(),
        slope_kg_per_nm: slope,
        intercept_kg: 0.0,
        fit_points: points.len(),
        rmse_kg: rmse(points, slope, 0.0),
        through_origin: true,
    })
}

/// Exact rescaling of a fuel curve by the Wh-per-kg-fuel factor.
pub fn electric_curve(curve: &FuelBurnCurve, params: &ModelParameters) -> ElectricEnergyCurve {
    let k = params.wh_per_kg_fuel();
    ElectricEnergyCurve {
        code: curve.code.clone(),
        slope_wh_per_nm: curve.slope_kg_per_nm * k,
        intercept_wh: curve.intercept_kg * k,
    }
}

/// `(distance_nm, fuel_kg)` observations for one aircraft code.
pub type PointSet = (String, Vec<(f64, f64)>);

/// Observations grouped by aircraft code in first-appearance order.
pub fn load_fuel_points<R: Read>(source: R) -> Result<Vec<PointSet>> {
    #[derive(Deserialize)]
    struct Row {
        code: String,
        distance_nm: f64,
        fuel_kg: f64,
    }

    let mut rdr = csvio::reader(source);
    let header = rdr.headers()?.clone();
    csvio::require_header(&header, &FUEL_POINTS_HEADER)?;
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut slot: BTreeMap<String, usize> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = csvio::line_of(&record);
        let row: Row = record.deserialize(Some(&header)).map_err(|e| Error::Row {
            line,
            message: e.to_string(),
        })?;
        let i = *slot.entry(row.code.clone()).or_insert_with(|| {
            groups.push((row.code.clone(), Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push((row.distance_nm, row.fuel_kg));
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePair {
    pub fuel: FuelBurnCurve,
    pub electric: ElectricEnergyCurve,
}

/// Fitted curves keyed by aircraft code.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveSet {
    curves: BTreeMap<String, CurvePair>,
}

impl CurveSet {
    pub fn fit(points: &[(String, Vec<(f64, f64)>)], params: &ModelParameters) -> Result<CurveSet> {
        let mut set = CurveSet::default();
        for (code, pts) in points {
            set.insert(fit_fuel_curve(code, pts)?, params);
        }
        Ok(set)
    }

    pub fn bundled(params: &ModelParameters) -> CurveSet {
        let points = load_fuel_points(data::FUEL_POINTS_CSV.as_bytes()).expect("bundled fuel points parse");
        CurveSet::fit(&points, params).expect("bundled fuel points fit")
    }

    pub fn from_path(path: &Path, params: &ModelParameters) -> Result<CurveSet> {
        CurveSet::fit(&load_fuel_points(csvio::open(path)?)?, params)
    }

    pub fn insert(&mut self, fuel: FuelBurnCurve, params: &ModelParameters) {
        let electric = electric_curve(&fuel, params);
        self.curves.insert(fuel.code.clone(), CurvePair { fuel, electric });
    }

    pub fn get(&self, code: &str) -> Option<&CurvePair> {
        self.curves.get(code)
    }

    pub fn require(&self, code: &str) -> Result<&CurvePair> {
        self.get(code).ok_or_else(|| Error::MissingCurve(code.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &CurvePair> {
        self.curves.values()
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}
