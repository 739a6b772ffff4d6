//! The aircraft performance dataset and its category mapping.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::data;
use crate::error::{Error, Result};

pub const AIRCRAFT_HEADER: [&str; 8] = [
    "code",
    "category",
    "seats",
    "empty_kg",
    "pax_kg",
    "fuel_200nm_kg",
    "mtow_kg",
    "mlw_kg",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AircraftCategory {
    Turboprop,
    RegionalJet,
    Narrowbody,
    Widebody,
}

impl AircraftCategory {
    pub const ALL: [AircraftCategory; 4] = [
        AircraftCategory::Turboprop,
        AircraftCategory::RegionalJet,
        AircraftCategory::Narrowbody,
        AircraftCategory::Widebody,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AircraftCategory::Turboprop => "turboprop",
            AircraftCategory::RegionalJet => "regional_jet",
            AircraftCategory::Narrowbody => "narrowbody",
            AircraftCategory::Widebody => "widebody",
        }
    }
}

impl fmt::Display for AircraftCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AircraftCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AircraftCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown aircraft category `{s}`"))
    }
}

/// One aircraft type with its certified weights and 200 nm mission fuel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftModel {
    pub code: String,
    pub category: AircraftCategory,
    pub seats: u32,
    pub empty_kg: f64,
    /// seats x per-passenger mass, as published; kept for cross-checking.
    pub pax_kg: f64,
    pub fuel_200nm_kg: f64,
    pub mtow_kg: f64,
    pub mlw_kg: f64,
}

impl AircraftModel {
    fn validate(&self, line: u64) -> Result<()> {
        let masses = [
            ("seats", f64::from(self.seats)),
            ("empty_kg", self.empty_kg),
            ("pax_kg", self.pax_kg),
            ("fuel_200nm_kg", self.fuel_200nm_kg),
            ("mtow_kg", self.mtow_kg),
            ("mlw_kg", self.mlw_kg),
        ];
        for (field, value) in masses {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive {
                    line,
                    code: self.code.clone(),
                    field,
                    value,
                });
            }
        }
        if self.mlw_kg > self.mtow_kg {
            return Err(Error::MlwExceedsMtow {
                line,
                code: self.code.clone(),
                mlw: self.mlw_kg,
                mtow: self.mtow_kg,
            });
        }
        let payload = self.empty_kg + self.pax_kg;
        if payload >= self.mtow_kg {
            return Err(Error::PayloadExceedsMtow {
                line,
                code: self.code.clone(),
                payload,
                mtow: self.mtow_kg,
            });
        }
        Ok(())
    }
}

/// Immutable, validated set of aircraft in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    models: Vec<AircraftModel>,
    index: HashMap<String, usize>,
}

pub fn load_registry<R: Read>(source: R) -> Result<Registry> {
    let mut rdr = csvio::reader(source);
    let header = rdr.headers()?.clone();
    csvio::require_header(&header, &AIRCRAFT_HEADER)?;

    let mut models = Vec::new();
    let mut index = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = csvio::line_of(&record);
        let model: AircraftModel = record
            .deserialize(Some(&header))
            .map_err(|e| Error::Row {
                line,
                message: e.to_string(),
            })?;
        model.validate(line)?;
        if index.contains_key(&model.code) {
            return Err(Error::DuplicateCode {
                line,
                code: model.code,
            });
        }
        index.insert(model.code.clone(), models.len());
        models.push(model);
    }
    if models.is_empty() {
        return Err(Error::NoAircraftRows);
    }
    Ok(Registry { models, index })
}

impl Registry {
    pub fn bundled() -> Registry {
        load_registry(data::AIRCRAFT_CSV.as_bytes()).expect("bundled aircraft table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Registry> {
        load_registry(csvio::open(path)?)
    }

    pub fn models(&self) -> &[AircraftModel] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn get(&self, code: &str) -> Option<&AircraftModel> {
        self.index.get(code).map(|&i| &self.models[i])
    }

    pub fn require(&self, code: &str) -> Result<&AircraftModel> {
        self.get(code)
            .ok_or_else(|| Error::UnknownAircraft(code.to_string()))
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    pub fn category_of(&self, code: &str) -> Result<AircraftCategory> {
        self.require(code).map(|m| m.category)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for m in &self.models {
            w.serialize(m)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invariant(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.models)?)
    }

    pub fn from_json(json: &str) -> Result<Registry> {
        let models: Vec<AircraftModel> = serde_json::from_str(json)?;
        let mut index = HashMap::new();
        for (i, m) in models.iter().enumerate() {
            let line = i as u64 + 1;
            m.validate(line)?;
            if index.insert(m.code.clone(), i).is_some() {
                return Err(Error::DuplicateCode {
                    line,
                    code: m.code.clone(),
                });
            }
        }
        if models.is_empty() {
            return Err(Error::NoAircraftRows);
        }
        Ok(Registry { models, index })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryMean {
    pub category: AircraftCategory,
    pub count: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySummary {
    pub categories: Vec<CategoryMean>,
    pub overall: f64,
}

impl CategorySummary {
    pub fn mean_of(&self, category: AircraftCategory) -> Option<f64> {
        self.categories
            .iter()
            .find(|c| c.category == category)
            .map(|c| c.mean)
    }
}

/// Arithmetic mean of `metric` per category and across the whole registry.
pub fn category_summary<F>(registry: &Registry, metric: F) -> CategorySummary
where
    F: Fn(&AircraftModel) -> f64,
{
    let mut acc: BTreeMap<AircraftCategory, (usize, f64)> = BTreeMap::new();
    let mut total = 0.0;
    for m in registry.models() {
        let v = metric(m);
        let slot = acc.entry(m.category).or_default();
        slot.0 += 1;
        slot.1 += v;
        total += v;
    }
    CategorySummary {
        categories: acc
            .into_iter()
            .map(|(category, (count, sum))| CategoryMean {
                category,
                count,
                mean: sum / count as f64,
            })
            .collect(),
        overall: total / registry.len() as f64,
    }
}
