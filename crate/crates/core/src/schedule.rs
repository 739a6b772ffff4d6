//! Schedule ingestion, the commercial-passenger filter funnel and deployment statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::data;
use crate::error::{Error, Result};
use crate::registry::Registry;

pub const SCHEDULE_HEADER: [&str; 8] = [
    "record_id",
    "service_class",
    "aircraft_code",
    "origin_airport",
    "origin_country",
    "destination_airport",
    "distance_nm",
    "departures",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceClass {
    PassengerFlight,
    Limo,
    Bus,
    Train,
    Helicopter,
    RoadFeeder,
    Freighter,
}

impl ServiceClass {
    pub const ALL: [ServiceClass; 7] = [
        ServiceClass::PassengerFlight,
        ServiceClass::Limo,
        ServiceClass::Bus,
        ServiceClass::Train,
        ServiceClass::Helicopter,
        ServiceClass::RoadFeeder,
        ServiceClass::Freighter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ServiceClass::PassengerFlight => "passenger_flight",
            ServiceClass::Limo => "limo",
            ServiceClass::Bus => "bus",
            ServiceClass::Train => "train",
            ServiceClass::Helicopter => "helicopter",
            ServiceClass::RoadFeeder => "road_feeder",
            ServiceClass::Freighter => "freighter",
        }
    }
}

impl fmt::Display for ServiceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of a schedule feed. `departures` is the number of flights the row stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub record_id: u64,
    pub service_class: ServiceClass,
    pub aircraft_code: String,
    pub origin_airport: String,
    pub origin_country: String,
    pub destination_airport: String,
    pub distance_nm: f64,
    pub departures: u64,
}

impl RawRecord {
    fn check(&self) -> std::result::Result<(), String> {
        if self.departures == 0 {
            return Err("departures must be at least 1".to_string());
        }
        if !self.distance_nm.is_finite() || self.distance_nm < 0.0 {
            return Err(format!("distance_nm {} is not a finite non-negative number", self.distance_nm));
        }
        if self.service_class == ServiceClass::PassengerFlight && self.distance_nm == 0.0 {
            return Err("distance_nm must be positive for passenger flights".to_string());
        }
        Ok(())
    }
}

/// A row that could not be turned into a [`RawRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Streams rows into `sink`; malformed rows become diagnostics and are skipped.
pub fn ingest_with<R, F>(source: R, mut sink: F) -> Result<Vec<Diagnostic>>
where
    R: Read,
    F: FnMut(RawRecord),
{
    let mut rdr = csvio::reader(source);
    let header = rdr.headers()?.clone();
    csvio::require_header(&header, &SCHEDULE_HEADER)?;
    let mut diagnostics = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = csvio::line_of(&record);
                match record.deserialize::<RawRecord>(Some(&header)) {
                    Ok(raw) => match raw.check() {
                        Ok(()) => sink(raw),
                        Err(message) => diagnostics.push(Diagnostic { line, message }),
                    },
                    Err(e) => diagnostics.push(Diagnostic {
                        line,
                        message: e.to_string(),
                    }),
                }
            }
            // Field-count and encoding faults are per-row; I/O faults end the stream.
            Err(e) if !matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                let line = e.position().map_or(0, |p| p.line());
                diagnostics.push(Diagnostic {
                    line,
                    message: e.to_string(),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(diagnostics)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub records: Vec<RawRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn ingest<R: Read>(source: R) -> Result<Ingested> {
    let mut records = Vec::new();
    let diagnostics = ingest_with(source, |r| records.push(r))?;
    Ok(Ingested {
        records,
        diagnostics,
    })
}

pub fn ingest_path(path: &Path) -> Result<Ingested> {
    ingest(csvio::open(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenyReason {
    /// The label names a family rather than one model.
    Ambiguous,
    /// Not a common commercial passenger type.
    Uncommon,
}

impl FromStr for DenyReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ambiguous" => Ok(DenyReason::Ambiguous),
            "uncommon" => Ok(DenyReason::Uncommon),
            other => Err(format!("unknown deny reason `{other}` (expected ambiguous or uncommon)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DenyList {
    entries: HashMap<String, DenyReason>,
}

pub const DENY_LIST_HEADER: [&str; 2] = ["label", "reason"];

impl DenyList {
    pub fn load<R: Read>(source: R) -> Result<DenyList> {
        let mut rdr = csvio::reader(source);
        let header = rdr.headers()?.clone();
        csvio::require_header(&header, &DENY_LIST_HEADER)?;
        let label_at = header.iter().position(|h| h == "label").expect("checked");
        let reason_at = header.iter().position(|h| h == "reason").expect("checked");
        let mut entries = HashMap::new();
        for record in rdr.records() {
            let record = record?;
            let line = csvio::line_of(&record);
            let reason = record[reason_at]
                .parse()
                .map_err(|message| Error::Row { line, message })?;
            entries.insert(record[label_at].to_string(), reason);
        }
        Ok(DenyList { entries })
    }

    pub fn bundled() -> DenyList {
        DenyList::load(data::DENY_LIST_CSV.as_bytes()).expect("bundled deny list is valid")
    }

    pub fn from_path(path: &Path) -> Result<DenyList> {
        DenyList::load(csvio::open(path)?)
    }

    pub fn insert(&mut self, label: impl Into<String>, reason: DenyReason) {
        self.entries.insert(label.into(), reason);
    }

    pub fn reason(&self, label: &str) -> Option<DenyReason> {
        self.entries.get(label).copied()
    }

    pub fn labels(&self, reason: DenyReason) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .entries
            .iter()
            .filter(|(_, r)| **r == reason)
            .map(|(l, _)| l.as_str())
            .collect();
        out.sort_unstable();
        out
    }
}

/// A passenger flight on a known aircraft model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub record_id: u64,
    pub aircraft_code: String,
    pub origin_country: String,
    pub distance_nm: f64,
    pub departures: u64,
}

/// Flights removed at each stage of the funnel. All counts are departure-weighted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusions {
    pub limo: u64,
    pub bus: u64,
    pub train: u64,
    pub helicopter: u64,
    pub road_feeder: u64,
    pub freighter: u64,
    pub uncommon_model: u64,
    pub no_fuel_data: u64,
    pub ambiguous_label: u64,
    pub no_grid_data: u64,
}

impl Exclusions {
    pub fn total(&self) -> u64 {
        self.limo
            + self.bus
            + self.train
            + self.helicopter
            + self.road_feeder
            + self.freighter
            + self.uncommon_model
            + self.no_fuel_data
            + self.ambiguous_label
            + self.no_grid_data
    }

    fn add(&mut self, reason: ExclusionReason, n: u64) {
        let slot = match reason {
            ExclusionReason::Limo => &mut self.limo,
            ExclusionReason::Bus => &mut self.bus,
            ExclusionReason::Train => &mut self.train,
            ExclusionReason::Helicopter => &mut self.helicopter,
            ExclusionReason::RoadFeeder => &mut self.road_feeder,
            ExclusionReason::Freighter => &mut self.freighter,
            ExclusionReason::UncommonModel => &mut self.uncommon_model,
            ExclusionReason::NoFuelData => &mut self.no_fuel_data,
            ExclusionReason::AmbiguousLabel => &mut self.ambiguous_label,
            ExclusionReason::NoGridData => &mut self.no_grid_data,
        };
        *slot += n;
    }

    fn merge(&mut self, o: &Exclusions) {
        self.limo += o.limo;
        self.bus += o.bus;
        self.train += o.train;
        self.helicopter += o.helicopter;
        self.road_feeder += o.road_feeder;
        self.freighter += o.freighter;
        self.uncommon_model += o.uncommon_model;
        self.no_fuel_data += o.no_fuel_data;
        self.ambiguous_label += o.ambiguous_label;
        self.no_grid_data += o.no_grid_data;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
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
}

/// Funnel bookkeeping: `kept + excluded.total() == total_in` always holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub total_in: u64,
    pub excluded: Exclusions,
    pub kept: u64,
    /// Kept flights strictly below the short-haul threshold.
    pub kept_short_haul: u64,
}

impl FilterStats {
    pub fn merge(mut self, other: &FilterStats) -> FilterStats {
        self.total_in += other.total_in;
        self.excluded.merge(&other.excluded);
        self.kept += other.kept;
        self.kept_short_haul += other.kept_short_haul;
        self
    }

    pub fn is_balanced(&self) -> bool {
        self.kept + self.excluded.total() == self.total_in && self.kept_short_haul <= self.kept
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Stateless per-record classifier behind [`filter_commercial`].
pub struct Filter<'a> {
    registry: &'a Registry,
    deny: &'a DenyList,
    grid_countries: Option<&'a HashSet<String>>,
    short_haul_nm: f64,
}

impl<'a> Filter<'a> {
    pub fn new(registry: &'a Registry, deny: &'a DenyList) -> Self {
        Filter {
            registry,
            deny,
            grid_countries: None,
            short_haul_nm: 200.0,
        }
    }

    /// Rows departing from countries outside `countries` are tallied as no_grid_data.
    pub fn with_grid(mut self, countries: &'a HashSet<String>) -> Self {
        self.grid_countries = Some(countries);
        self
    }

    pub fn with_short_haul(mut self, threshold_nm: f64) -> Self {
        self.short_haul_nm = threshold_nm;
        self
    }

    pub fn classify(&self, r: &RawRecord) -> Option<ExclusionReason> {
        let class_reason = match r.service_class {
            ServiceClass::PassengerFlight => None,
            ServiceClass::Limo => Some(ExclusionReason::Limo),
            ServiceClass::Bus => Some(ExclusionReason::Bus),
            ServiceClass::Train => Some(ExclusionReason::Train),
            ServiceClass::Helicopter => Some(ExclusionReason::Helicopter),
            ServiceClass::RoadFeeder => Some(ExclusionReason::RoadFeeder),
            ServiceClass::Freighter => Some(ExclusionReason::Freighter),
        };
        if class_reason.is_some() {
            return class_reason;
        }
        let deny = self.deny.reason(&r.aircraft_code);
        if deny == Some(DenyReason::Uncommon) {
            return Some(ExclusionReason::UncommonModel);
        }
        if !self.registry.contains(&r.aircraft_code) && deny != Some(DenyReason::Ambiguous) {
            return Some(ExclusionReason::NoFuelData);
        }
        if deny == Some(DenyReason::Ambiguous) {
            return Some(ExclusionReason::AmbiguousLabel);
        }
        match self.grid_countries {
            Some(c) if !c.contains(&r.origin_country) => Some(ExclusionReason::NoGridData),
            _ => None,
        }
    }

    /// Single-threaded pass over a slice, preserving input order.
    pub fn run(&self, records: &[RawRecord]) -> (Vec<FlightRecord>, FilterStats) {
        let mut stats = FilterStats::default();
        let mut kept = Vec::new();
        for r in records {
            self.push(r, &mut kept, &mut stats);
        }
        (kept, stats)
    }

    /// Chunked rayon pass; the result is identical to [`Filter::run`].
    pub fn run_parallel(&self, records: &[RawRecord], chunk: usize) -> (Vec<FlightRecord>, FilterStats) {
        let parts: Vec<(Vec<FlightRecord>, FilterStats)> = records
            .par_chunks(chunk.max(1))
            .map(|c| self.run(c))
            .collect();
        let mut stats = FilterStats::default();
        let mut kept = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
        for (k, s) in parts {
            kept.extend(k);
            stats = stats.merge(&s);
        }
        (kept, stats)
    }

    pub fn push(&self, r: &RawRecord, kept: &mut Vec<FlightRecord>, stats: &mut FilterStats) {
        stats.total_in += r.departures;
        match self.classify(r) {
            Some(reason) => stats.excluded.add(reason, r.departures),
            None => {
                stats.kept += r.departures;
                if r.distance_nm < self.short_haul_nm {
                    stats.kept_short_haul += r.departures;
                }
                kept.push(FlightRecord {
                    record_id: r.record_id,
                    aircraft_code: r.aircraft_code.clone(),
                    origin_country: r.origin_country.clone(),
                    distance_nm: r.distance_nm,
                    departures: r.departures,
                });
            }
        }
    }
}

/// Service class, then uncommon models, then models without fuel data, then ambiguous labels.
pub fn filter_commercial(
    records: &[RawRecord],
    registry: &Registry,
    deny: &DenyList,
) -> (Vec<FlightRecord>, FilterStats) {
    Filter::new(registry, deny).run(records)
}

/// Flights strictly below `threshold_nm`.
pub fn short_haul(records: &[FlightRecord], threshold_nm: f64) -> Vec<FlightRecord> {
    records
        .iter()
        .filter(|r| r.distance_nm < threshold_nm)
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModelCountry {
    pub model: String,
    pub country: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DeploymentStats {
    pub total_flights: u64,
    pub flights_by_model: BTreeMap<String, u64>,
    pub set_flights: u64,
    /// Share of all flights flown by the model set; 0 for empty input.
    pub set_share: f64,
    /// Nautical miles flown (distance x departures) by set models, per departure country.
    pub miles: BTreeMap<ModelCountry, f64>,
}

impl DeploymentStats {
    pub fn share_of(&self, model: &str) -> f64 {
        if self.total_flights == 0 {
            return 0.0;
        }
        self.flights_by_model.get(model).copied().unwrap_or(0) as f64 / self.total_flights as f64
    }
}

/// Sums `(record_id, value)` pairs in ascending id order, so the result is independent of input order.
fn ordered_sum(mut terms: Vec<(u64, f64)>) -> f64 {
    terms.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    terms.into_iter().map(|t| t.1).sum()
}

pub fn deployment_stats(records: &[FlightRecord], model_set: &[&str]) -> DeploymentStats {
    let mut stats = DeploymentStats::default();
    let mut terms: BTreeMap<ModelCountry, Vec<(u64, f64)>> = BTreeMap::new();
    for r in records {
        stats.total_flights += r.departures;
        *stats.flights_by_model.entry(r.aircraft_code.clone()).or_default() += r.departures;
        if model_set.contains(&r.aircraft_code.as_str()) {
            stats.set_flights += r.departures;
            terms
                .entry(ModelCountry {
                    model: r.aircraft_code.clone(),
                    country: r.origin_country.clone(),
                })
                .or_default()
                .push((r.record_id, r.distance_nm * r.departures as f64));
        }
    }
    if stats.total_flights > 0 {
        stats.set_share = stats.set_flights as f64 / stats.total_flights as f64;
    }
    stats.miles = terms.into_iter().map(|(k, v)| (k, ordered_sum(v))).collect();
    stats
}

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const KM_PER_NM: f64 = 1.852;

/// Haversine distance on a spherical Earth, in nautical miles.
pub fn great_circle_nm(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Result<f64> {
    for (what, v, bound) in [
        ("latitude", lat1, 90.0),
        ("longitude", lon1, 180.0),
        ("latitude", lat2, 90.0),
        ("longitude", lon2, 180.0),
    ] {
        if !(v.abs() <= bound) {
            return Err(Error::Coordinate(format!("{what} {v} outside [-{bound}, {bound}]")));
        }
    }
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    let c = 2.0 * h.sqrt().min(1.0).asin();
    Ok(EARTH_RADIUS_KM * c / KM_PER_NM)
}

/// Published funnel of the proprietary worldwide schedule feed. Reference only.
pub mod reference_funnel {
    pub const TOTAL_FLIGHTS: u64 = 48_203_125;
    pub const LIMO: u64 = 1_926;
    pub const BUS: u64 = 485_770;
    pub const NON_PASSENGER_EXCLUDED: u64 = 9_783_847;
    pub const UNCOMMON_MODELS: u64 = 2_436_131;
    pub const NO_FUEL_DATA: u64 = 453_600;
    pub const AMBIGUOUS_LABEL: u64 = 2_028_052;
    pub const MODEL_FILTER_EXCLUDED: u64 = 4_917_783;
    pub const COMMERCIAL_PASSENGER: u64 = 33_501_495;
    pub const SHORT_HAUL: u64 = 4_364_491;
    pub const CANDIDATE_SHORT_HAUL: u64 = 885_894;
    pub const CANDIDATE_WITH_GRID: u64 = 879_530;
}
