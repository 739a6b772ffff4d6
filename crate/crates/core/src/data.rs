//! Datasets compiled into the binary.

/// 47 aircraft with weights, seating and 200 nm fuel burn.
pub const AIRCRAFT_CSV: &str = include_str!("../data/aircraft.csv");

/// Grid carbon intensity for 105 countries.
pub const GRID_CSV: &str = include_str!("../data/grid.csv");

/// Published per-country electrification miles, tipping points and savings.
pub const COUNTRY_LEDGER_CSV: &str = include_str!("../data/country_ledger.csv");

/// Fuel-vs-distance observations used to fit the affine burn curves.
pub const FUEL_POINTS_CSV: &str = include_str!("../data/fuel_points.csv");

/// Per-aircraft short-haul flight/mile totals for a handful of countries.
pub const COUNTRY_MIX_CSV: &str = include_str!("../data/country_mix.csv");

/// Example deny-list of ambiguous and uncommon schedule labels.
pub const DENY_LIST_CSV: &str = include_str!("../data/deny_list.csv");

/// The three narrowbody models targeted for electrification.
pub const CANDIDATE_MODELS: [&str; 3] = ["A319-100", "A320-200", "A321-200"];
