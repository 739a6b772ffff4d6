//! Seeded synthetic schedule corpus with a manifest of exactly what was planted.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::CANDIDATE_MODELS;
use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::schedule::{DenyList, DenyReason, Exclusions, FilterStats, ModelCountry, SCHEDULE_HEADER};

/// Countries that have no grid profile in the bundled table.
pub const UNKNOWN_COUNTRIES: [&str; 5] = ["Greenland", "Faroe Islands", "Bermuda", "Fiji", "Mongolia"];

/// Labels with no fuel data and no deny-list entry.
pub const NO_FUEL_LABELS: [&str; 4] = ["Saab 340", "Beech 1900", "Let 410", "BAe 146"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plant {
    Limo,
    Bus,
    Train,
    Helicopter,
    RoadFeeder,
    Freighter,
    UncommonModel,
    NoFuelData,
    AmbiguousLabel,
    NoGridData,
    Malformed,
    Kept,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub rows: u64,
    pub seed: u64,
    /// Share of kept rows planted strictly below the short-haul threshold.
    pub short_haul_share: f64,
    pub short_haul_nm: f64,
    pub max_departures: u64,
    /// Row fractions per excluded category; kept rows take the remainder.
    pub fractions: BTreeMap<Plant, f64>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        let fractions = [
            (Plant::Limo, 0.001),
            (Plant::Bus, 0.01),
            (Plant::Train, 0.02),
            (Plant::Helicopter, 0.004),
            (Plant::RoadFeeder, 0.005),
            (Plant::Freighter, 0.08),
            (Plant::UncommonModel, 0.05),
            (Plant::NoFuelData, 0.01),
            (Plant::AmbiguousLabel, 0.04),
            (Plant::NoGridData, 0.01),
            (Plant::Malformed, 0.0),
        ]
        .into_iter()
        .collect();
        CorpusConfig {
            rows: 10_000,
            seed: 1,
            short_haul_share: 0.13,
            short_haul_nm: 200.0,
            max_departures: 9,
            fractions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilesEntry {
    pub model: String,
    pub country: String,
    pub miles_nm: f64,
}

/// What the generator wrote, computed independently of the filter code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub config: CorpusConfig,
    pub rows_written: u64,
    pub records: u64,
    pub malformed_rows: u64,
    pub planted_rows: BTreeMap<Plant, u64>,
    pub stats: FilterStats,
    pub kept_rows: u64,
    pub short_haul_rows: u64,
    pub short_haul_row_share: f64,
    pub unknown_country_rows: u64,
    /// Short-haul miles of the candidate models by departure country, summed in record order.
    pub candidate_miles: Vec<MilesEntry>,
}

impl CorpusManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<CorpusManifest> {
        Ok(serde_json::from_str(s)?)
    }
}

fn quotas(config: &CorpusConfig) -> Result<Vec<(Plant, u64)>> {
    let mut out = Vec::new();
    let mut used = 0u64;
    for (&plant, &f) in &config.fractions {
        if plant == Plant::Kept {
            continue;
        }
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Config(format!("corpus fraction for {plant:?} must lie in [0, 1], got {f}")));
        }
        let n = (f * config.rows as f64).floor() as u64;
        used += n;
        out.push((plant, n));
    }
    if used > config.rows {
        return Err(Error::Config("corpus fractions sum above 1".to_string()));
    }
    out.push((Plant::Kept, config.rows - used));
    Ok(out)
}

/// Writes `config.rows` schedule rows to `out` and returns the manifest.
pub fn generate<W: Write>(
    config: &CorpusConfig,
    registry: &Registry,
    grid_countries: &[String],
    deny: &DenyList,
    out: W,
) -> Result<CorpusManifest> {
    if !(0.0..=1.0).contains(&config.short_haul_share) {
        return Err(Error::Config("short_haul_share must lie in [0, 1]".to_string()));
    }
    if config.max_departures == 0 || grid_countries.is_empty() {
        return Err(Error::Config("max_departures and grid countries must be non-empty".to_string()));
    }
    if !(config.short_haul_nm > 10.0) {
        return Err(Error::Config("short_haul_nm must exceed 10".to_string()));
    }
    let uncommon = deny.labels(DenyReason::Uncommon);
    let ambiguous = deny.labels(DenyReason::Ambiguous);
    let codes: Vec<&str> = registry.models().iter().map(|m| m.code.as_str()).collect();
    for label in NO_FUEL_LABELS {
        if registry.contains(label) || deny.reason(label).is_some() {
            return Err(Error::Invariant(format!("no-fuel label `{label}` is known")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let quotas = quotas(config)?;
    let mut plan: Vec<Plant> = Vec::with_capacity(config.rows as usize);
    let mut planted_rows = BTreeMap::new();
    let mut kept_rows = 0;
    for &(plant, n) in &quotas {
        plan.extend(std::iter::repeat_n(plant, n as usize));
        planted_rows.insert(plant, n);
        if plant == Plant::Kept {
            kept_rows = n;
        }
    }
    plan.shuffle(&mut rng);
    let short_haul_rows = (config.short_haul_share * kept_rows as f64).round() as u64;
    let mut short_flags: Vec<bool> = (0..kept_rows).map(|i| i < short_haul_rows).collect();
    short_flags.shuffle(&mut rng);
    let mut short_flags = short_flags.into_iter();

    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(SCHEDULE_HEADER)?;

    let mut stats = FilterStats::default();
    let mut ex = Exclusions::default();
    let mut miles: BTreeMap<ModelCountry, f64> = BTreeMap::new();
    let mut malformed_rows = 0;
    let mut unknown_country_rows = 0;
    let threshold = config.short_haul_nm;
    // Long-haul draws include the threshold itself to exercise the boundary.
    let long_distance = |rng: &mut ChaCha8Rng| -> f64 {
        if rng.gen_bool(0.05) {
            threshold
        } else {
            f64::from(rng.gen_range((threshold * 10.0) as u32..=(threshold * 10.0) as u32 + 30_000)) / 10.0
        }
    };
    let short_distance =
        |rng: &mut ChaCha8Rng| -> f64 { f64::from(rng.gen_range(100..(threshold * 10.0).ceil() as u32)) / 10.0 };

    for (i, plant) in plan.into_iter().enumerate() {
        let record_id = i as u64 + 1;
        let departures = rng.gen_range(1..=config.max_departures);
        let country = grid_countries.choose(&mut rng).expect("non-empty").as_str();
        let (class, code, country, distance) = match plant {
            Plant::Limo => ("limo", "LMO", country, short_distance(&mut rng)),
            Plant::Bus => ("bus", "BUS", country, short_distance(&mut rng)),
            Plant::Train => ("train", "TRN", country, long_distance(&mut rng)),
            Plant::Helicopter => ("helicopter", "AW139", country, short_distance(&mut rng)),
            Plant::RoadFeeder => ("road_feeder", "RFS", country, short_distance(&mut rng)),
            Plant::Freighter => (
                "freighter",
                *codes.choose(&mut rng).expect("registry"),
                country,
                long_distance(&mut rng),
            ),
            Plant::UncommonModel => (
                "passenger_flight",
                *uncommon.choose(&mut rng).unwrap_or(&"TU-154"),
                country,
                long_distance(&mut rng),
            ),
            Plant::NoFuelData => (
                "passenger_flight",
                *NO_FUEL_LABELS.choose(&mut rng).expect("labels"),
                country,
                short_distance(&mut rng),
            ),
            Plant::AmbiguousLabel => (
                "passenger_flight",
                *ambiguous.choose(&mut rng).unwrap_or(&"A320 family"),
                country,
                long_distance(&mut rng),
            ),
            Plant::NoGridData => (
                "passenger_flight",
                *codes.choose(&mut rng).expect("registry"),
                *UNKNOWN_COUNTRIES.choose(&mut rng).expect("countries"),
                short_distance(&mut rng),
            ),
            Plant::Malformed | Plant::Kept => {
                let code = if rng.gen_bool(0.3) {
                    *CANDIDATE_MODELS.choose(&mut rng).expect("candidates")
                } else {
                    *codes.choose(&mut rng).expect("registry")
                };
                let d = if plant == Plant::Kept && short_flags.next().expect("one flag per kept row") {
                    short_distance(&mut rng)
                } else {
                    long_distance(&mut rng)
                };
                ("passenger_flight", code, country, d)
            }
        };

        if plant == Plant::Malformed {
            malformed_rows += 1;
            let id = record_id.to_string();
            let dep = departures.to_string();
            w.write_record([id.as_str(), class, code, "XXX", country, "YYY", "n/a", dep.as_str()])?;
            continue;
        }

        stats.total_in += departures;
        match plant {
            Plant::Limo => ex.limo += departures,
            Plant::Bus => ex.bus += departures,
            Plant::Train => ex.train += departures,
            Plant::Helicopter => ex.helicopter += departures,
            Plant::RoadFeeder => ex.road_feeder += departures,
            Plant::Freighter => ex.freighter += departures,
            Plant::UncommonModel => ex.uncommon_model += departures,
            Plant::NoFuelData => ex.no_fuel_data += departures,
            Plant::AmbiguousLabel => ex.ambiguous_label += departures,
            Plant::NoGridData => {
                ex.no_grid_data += departures;
                unknown_country_rows += 1;
            }
            Plant::Kept => {
                stats.kept += departures;
                if distance < threshold {
                    stats.kept_short_haul += departures;
                    if CANDIDATE_MODELS.contains(&code) {
                        *miles
                            .entry(ModelCountry {
                                model: code.to_string(),
                                country: country.to_string(),
                            })
                            .or_insert(0.0) += distance * departures as f64;
                    }
                }
            }
            Plant::Malformed => unreachable!(),
        }
        w.write_record([
            record_id.to_string().as_str(),
            class,
            code,
            "XXX",
            country,
            "YYY",
            format!("{distance:.1}").as_str(),
            departures.to_string().as_str(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("corpus output", e))?;
    stats.excluded = ex;

    Ok(CorpusManifest {
        config: config.clone(),
        rows_written: config.rows,
        records: config.rows - malformed_rows,
        malformed_rows,
        planted_rows,
        stats,
        kept_rows,
        short_haul_rows,
        short_haul_row_share: if kept_rows == 0 {
            0.0
        } else {
            short_haul_rows as f64 / kept_rows as f64
        },
        unknown_country_rows,
        candidate_miles: miles
            .into_iter()
            .map(|(k, miles_nm)| MilesEntry {
                model: k.model,
                country: k.country,
                miles_nm,
            })
            .collect(),
    })
}
