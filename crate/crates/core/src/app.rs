//! Command-line front end. `main` only maps the result of [`run`] to an exit code.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::{self, CorpusConfig, Plant};
use crate::csvio::AtomicBatch;
use crate::curves::CurveSet;
use crate::data::CANDIDATE_MODELS;
use crate::emissions::{
    self, bundled_country_mix, country_flights, load_country_mix, load_country_rows, CountryFlights, EmissionsLedger,
    GridTable, LedgerRow, RankKey,
};
use crate::error::{Error, Result};
use crate::params::{ModelParameters, ParamOverrides};
use crate::propulsion::{self, LimitKind};
use crate::registry::{category_summary, Registry};
use crate::report::{self, DensityRow, Format, RunMeta, Table, TippingRow};
use crate::schedule::{self, deployment_stats, short_haul, DenyList, Filter};

#[derive(Debug, Parser)]
#[command(name = "shorthaul", version, about = "Battery-electric short-haul feasibility and emissions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML file with `out_dir`, `format`, `threads`, `[inputs]` and `[params]`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration before running.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse()
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputArgs {
    #[arg(long, global = true)]
    pub aircraft: Option<PathBuf>,
    #[arg(long, global = true)]
    pub fuel_points: Option<PathBuf>,
    #[arg(long, global = true)]
    pub grid: Option<PathBuf>,
    /// Published per-country ledger (country, intensity, tipping, miles, savings).
    #[arg(long, global = true)]
    pub ledger: Option<PathBuf>,
    #[arg(long, global = true)]
    pub deny_list: Option<PathBuf>,
    /// Per-country, per-aircraft flight and mile totals.
    #[arg(long, global = true)]
    pub country_mix: Option<PathBuf>,
    #[arg(long, global = true)]
    pub schedule: Option<PathBuf>,
}

impl InputArgs {
    fn layered_over(self, lower: InputArgs) -> InputArgs {
        InputArgs {
            aircraft: self.aircraft.or(lower.aircraft),
            fuel_points: self.fuel_points.or(lower.fuel_points),
            grid: self.grid.or(lower.grid),
            ledger: self.ledger.or(lower.ledger),
            deny_list: self.deny_list.or(lower.deny_list),
            country_mix: self.country_mix.or(lower.country_mix),
            schedule: self.schedule.or(lower.schedule),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long, global = true)]
    pub lhv: Option<f64>,
    #[arg(long, global = true)]
    pub eta_fossil: Option<f64>,
    #[arg(long, global = true)]
    pub eta_electric: Option<f64>,
    #[arg(long, global = true)]
    pub wh_per_mj: Option<f64>,
    /// Battery energy density, Wh/kg.
    #[arg(long, global = true)]
    pub density: Option<f64>,
    #[arg(long, global = true)]
    pub pax_mass: Option<f64>,
    #[arg(long, global = true)]
    pub ci_fuel: Option<f64>,
    #[arg(long, global = true)]
    pub short_haul_nm: Option<f64>,
    #[arg(long, global = true)]
    pub dirty_threshold: Option<f64>,
}

impl ParamArgs {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            lhv_mj_per_kg: self.lhv,
            eta_fossil: self.eta_fossil,
            eta_electric: self.eta_electric,
            wh_per_mj: self.wh_per_mj,
            battery_density_wh_per_kg: self.density,
            pax_mass_kg: self.pax_mass,
            ci_fuel_kg_per_kg: self.ci_fuel,
            short_haul_nm: self.short_haul_nm,
            dirty_grid_g_per_kwh: self.dirty_threshold,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Battery mass and weight-limit exceedance for every aircraft.
    Exceedance {
        #[arg(long, default_value = "mlw")]
        limit: LimitKind,
        /// Extra mission energy as a fraction (0.33 = +33%); MLW only.
        #[arg(long)]
        reserve: Option<f64>,
    },
    /// Requisite battery density per aircraft and category means.
    Density,
    /// One-at-a-time 5% parameter perturbations of MLW exceedance.
    Sensitivity {
        #[arg(long)]
        code: Option<String>,
    },
    /// Parse and filter a schedule feed.
    Ingest,
    /// Country ledger, continent summary and figure data.
    Emissions,
    /// Tipping points from per-aircraft flight mixes.
    Tipping,
    /// Grid-improvement scenario for every country.
    Scenarios {
        #[arg(long, default_value_t = 0.05)]
        fraction: f64,
    },
    /// Countries ordered by a ledger column.
    Rank {
        #[arg(long, default_value = "savings")]
        key: RankKey,
        #[arg(long)]
        continent: Option<String>,
    },
    /// Attribute the savings gap between two countries.
    Decompose {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Plot-ready tables and fitted fuel curves.
    Figdata,
    /// Write a seeded synthetic schedule and its manifest.
    GenCorpus {
        #[arg(long, default_value_t = 10_000)]
        rows: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.13)]
        short_haul_share: f64,
        /// Fraction of rows written unparseable.
        #[arg(long, default_value_t = 0.0)]
        malformed: f64,
        /// Corpus path; defaults to `<out-dir>/schedule.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exceedance { .. } => "exceedance",
            Command::Density => "density",
            Command::Sensitivity { .. } => "sensitivity",
            Command::Ingest => "ingest",
            Command::Emissions => "emissions",
            Command::Tipping => "tipping",
            Command::Scenarios { .. } => "scenarios",
            Command::Rank { .. } => "rank",
            Command::Decompose { .. } => "decompose",
            Command::Figdata => "figdata",
            Command::GenCorpus { .. } => "gen-corpus",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    out_dir: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
    #[serde(default)]
    inputs: InputArgs,
    #[serde(default)]
    params: ParamOverrides,
}

/// Fully resolved settings: flag over config file over built-in default.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
    pub inputs: InputArgs,
    pub params: ModelParameters,
}

impl RunConfig {
    pub fn resolve(global: &GlobalArgs) -> Result<RunConfig> {
        let file = match &global.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                toml::from_str::<ConfigFile>(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let params = ModelParameters::default().with_overrides(&global.params.overrides().layered_over(file.params));
        params.validate()?;
        Ok(RunConfig {
            out_dir: global.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from("out")),
            format: global.format.or(file.format).unwrap_or_default(),
            threads: global.threads.or(file.threads),
            inputs: global.inputs.clone().layered_over(file.inputs),
            params,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn registry(&self) -> Result<Registry> {
        match &self.inputs.aircraft {
            Some(p) => Registry::from_path(p),
            None => Ok(Registry::bundled()),
        }
    }

    fn curves(&self) -> Result<CurveSet> {
        match &self.inputs.fuel_points {
            Some(p) => CurveSet::from_path(p, &self.params),
            None => Ok(CurveSet::bundled(&self.params)),
        }
    }

    fn grid(&self) -> Result<GridTable> {
        match &self.inputs.grid {
            Some(p) => GridTable::from_path(p),
            None => Ok(GridTable::bundled()),
        }
    }

    fn deny_list(&self) -> Result<DenyList> {
        match &self.inputs.deny_list {
            Some(p) => DenyList::from_path(p),
            None => Ok(DenyList::bundled()),
        }
    }

    fn country_mix(&self) -> Result<Vec<CountryFlights>> {
        match &self.inputs.country_mix {
            Some(p) => load_country_mix(crate::csvio::open(p)?),
            None => Ok(bundled_country_mix()),
        }
    }

    fn published_ledger(&self) -> Result<EmissionsLedger> {
        let rows = match &self.inputs.ledger {
            Some(p) => load_country_rows(crate::csvio::open(p)?)?,
            None => emissions::bundled_country_rows(),
        };
        Ok(EmissionsLedger::from_published(&rows, &self.params))
    }

    fn schedule(&self) -> Result<&Path> {
        self.inputs
            .schedule
            .as_deref()
            .ok_or_else(|| Error::Config("--schedule is required for this command".to_string()))
    }
}

/// Output collector: everything is staged and only renamed into place once the command succeeds.
struct Outputs<'a> {
    config: &'a RunConfig,
    meta: RunMeta,
    batch: AtomicBatch,
    log: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn new(config: &'a RunConfig, command: &str) -> Self {
        Outputs {
            config,
            meta: RunMeta::new(command, config.params),
            batch: AtomicBatch::new(),
            log: Vec::new(),
        }
    }

    fn table(&mut self, t: &Table) -> Result<()> {
        let path = self.config.out_dir.join(t.file_name(self.config.format));
        self.batch.stage(&path, t.render(self.config.format, &self.meta)?.as_bytes())?;
        self.log.push(format!("wrote {} ({} rows)", path.display(), t.rows.len()));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.config.out_dir.join(name);
        let body = serde_json::json!({ "meta": self.meta, "data": value });
        self.batch.stage(&path, (serde_json::to_string_pretty(&body)? + "\n").as_bytes())?;
        self.log.push(format!("wrote {}", path.display()));
        Ok(())
    }

    fn note(&mut self, line: String) {
        self.log.push(line);
    }

    fn commit(self, out: &mut dyn Write) -> Result<()> {
        self.batch.commit()?;
        for line in self.log {
            writeln!(out, "{line}").map_err(|e| Error::io("stdout", e))?;
        }
        Ok(())
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let config = RunConfig::resolve(&cli.global)?;
    if cli.global.print_config {
        write!(out, "{}", config.to_toml()?).map_err(|e| Error::io("stdout", e))?;
    }
    let Some(command) = cli.command else {
        if cli.global.print_config {
            return Ok(());
        }
        return Err(Error::Config("no subcommand given (see --help)".to_string()));
    };
    if let Some(n) = config.threads {
        // A second call in the same process keeps the first pool, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let mut o = Outputs::new(&config, command.name());
    match command {
        Command::Exceedance { limit, reserve } => run_exceedance(&config, &mut o, limit, reserve)?,
        Command::Density => run_density(&config, &mut o)?,
        Command::Sensitivity { code } => run_sensitivity(&config, &mut o, code.as_deref())?,
        Command::Ingest => run_ingest(&config, &mut o)?,
        Command::Emissions => run_emissions(&config, &mut o)?,
        Command::Tipping => run_tipping(&config, &mut o)?,
        Command::Scenarios { fraction } => run_scenarios(&config, &mut o, fraction)?,
        Command::Rank { key, continent } => run_rank(&config, &mut o, key, continent.as_deref())?,
        Command::Decompose { a, b } => run_decompose(&config, &mut o, &a, &b)?,
        Command::Figdata => run_figdata(&config, &mut o)?,
        Command::GenCorpus {
            rows,
            seed,
            short_haul_share,
            malformed,
            out: path,
        } => run_gen_corpus(&config, &mut o, rows, seed, short_haul_share, malformed, path)?,
    }
    o.commit(out)
}

fn run_exceedance(c: &RunConfig, o: &mut Outputs, limit: LimitKind, reserve: Option<f64>) -> Result<()> {
    let registry = c.registry()?;
    if reserve.is_some() && limit != LimitKind::Mlw {
        return Err(Error::Config("--reserve applies to the MLW limit only".to_string()));
    }
    let mut rows = Vec::with_capacity(registry.len());
    for m in registry.models() {
        let e = match reserve {
            Some(f) => propulsion::reserve_stress(m, &c.params, f)?,
            None => propulsion::exceedance(m, &c.params, limit)?,
        };
        let density = propulsion::requisite_density(m, &c.params, limit).ok();
        rows.push((m, e, density));
    }
    let above = rows.iter().filter(|r| r.1.ratio > 1.0).count();
    o.table(&report::exceedance_table(&rows))?;
    o.note(format!("{above} of {} models exceed {}", rows.len(), limit));
    Ok(())
}

fn run_density(c: &RunConfig, o: &mut Outputs) -> Result<()> {
    let registry = c.registry()?;
    let p = &c.params;
    let mut rows = Vec::with_capacity(registry.len());
    for m in registry.models() {
        rows.push(DensityRow {
            model: m,
            exceedance_mlw: propulsion::exceedance(m, p, LimitKind::Mlw)?.ratio,
            density_mlw: propulsion::requisite_density(m, p, LimitKind::Mlw).ok(),
            density_mtow: propulsion::requisite_density(m, p, LimitKind::Mtow).ok(),
        });
    }
    let exc = category_summary(&registry, |m| {
        propulsion::exceedance(m, p, LimitKind::Mlw).map_or(f64::NAN, |e| e.ratio)
    });
    let mlw = category_summary(&registry, |m| {
        propulsion::requisite_density(m, p, LimitKind::Mlw).unwrap_or(f64::NAN)
    });
    let mtow = category_summary(&registry, |m| {
        propulsion::requisite_density(m, p, LimitKind::Mtow).unwrap_or(f64::NAN)
    });
    let mut summary: Vec<(String, usize, f64, f64, f64)> = exc
        .categories
        .iter()
        .map(|cm| {
            (
                cm.category.as_str().to_string(),
                cm.count,
                cm.mean,
                mlw.mean_of(cm.category).unwrap_or(f64::NAN),
                mtow.mean_of(cm.category).unwrap_or(f64::NAN),
            )
        })
        .collect();
    summary.push(("all".to_string(), registry.len(), exc.overall, mlw.overall, mtow.overall));
    o.table(&report::density_table(&rows))?;
    o.table(&report::density_summary_table(&summary))?;
    o.note(format!(
        "fleet mean requisite density: {:.2} Wh/kg (MLW), {:.2} Wh/kg (MTOW)",
        mlw.overall, mtow.overall
    ));
    Ok(())
}

fn run_sensitivity(c: &RunConfig, o: &mut Outputs, code: Option<&str>) -> Result<()> {
    let registry = c.registry()?;
    let models: Vec<_> = match code {
        Some(code) => vec![registry.require(code)?],
        None => registry.models().iter().collect(),
    };
    let mut rows = Vec::with_capacity(models.len() * 5);
    for m in models {
        rows.extend(propulsion::sensitivity_table(m, &c.params)?);
    }
    o.table(&report::sensitivity_table(&rows))
}

struct Pipeline {
    stats: schedule::FilterStats,
    diagnostics: Vec<schedule::Diagnostic>,
    deployment: schedule::DeploymentStats,
    flights: Vec<CountryFlights>,
}

fn run_pipeline(c: &RunConfig, registry: &Registry, grid: &GridTable) -> Result<Pipeline> {
    let deny = c.deny_list()?;
    let ingested = schedule::ingest_path(c.schedule()?)?;
    let countries: HashSet<String> = grid.country_set();
    let filter = Filter::new(registry, &deny)
        .with_grid(&countries)
        .with_short_haul(c.params.short_haul_nm);
    let (kept, stats) = filter.run_parallel(&ingested.records, 1 << 16);
    if !stats.is_balanced() {
        return Err(Error::Invariant(format!("filter stats do not balance: {stats:?}")));
    }
    let short = short_haul(&kept, c.params.short_haul_nm);
    Ok(Pipeline {
        stats,
        diagnostics: ingested.diagnostics,
        deployment: deployment_stats(&short, &CANDIDATE_MODELS),
        flights: country_flights(&short, &CANDIDATE_MODELS),
    })
}

fn diagnostics_table(diags: &[schedule::Diagnostic]) -> Table {
    let mut t = Table::new("diagnostics", &["line", "message"]);
    for d in diags {
        t.push(vec![d.line.into(), d.message.as_str().into()]);
    }
    t
}

fn run_ingest(c: &RunConfig, o: &mut Outputs) -> Result<()> {
    let p = run_pipeline(c, &c.registry()?, &c.grid()?)?;
    o.json("filter_stats.json", &p.stats)?;
    o.table(&diagnostics_table(&p.diagnostics))?;
    o.table(&report::deployment_table(&p.deployment))?;
    o.note(format!(
        "{} flights in, {} kept, {} short haul; {} malformed rows",
        p.stats.total_in,
        p.stats.kept,
        p.stats.kept_short_haul,
        p.diagnostics.len()
    ));
    o.note(format!(
        "candidate share of short-haul flights: {:.4}",
        p.deployment.set_share
    ));
    Ok(())
}

fn ledger_outputs(o: &mut Outputs, ledger: &EmissionsLedger) -> Result<()> {
    let summary = emissions::aggregate(&ledger.rows);
    o.table(&report::country_emissions_table(&ledger.rows))?;
    o.table(&report::continent_summary_table(&summary))?;
    o.table(&report::fig3b_table(&emissions::fig3b_rows(&ledger.rows)))?;
    o.note(format!("global net savings: {:.0} kg CO2e", summary.global.savings_kg));
    Ok(())
}

fn run_emissions(c: &RunConfig, o: &mut Outputs) -> Result<()> {
    if c.inputs.schedule.is_none() {
        return ledger_outputs(o, &c.published_ledger()?);
    }
    let registry = c.registry()?;
    let grid = c.grid()?;
    let p = run_pipeline(c, &registry, &grid)?;
    let ledger = EmissionsLedger::from_flights(&p.flights, &grid, &c.curves()?, &c.params)?;
    o.json("filter_stats.json", &p.stats)?;
    if !p.diagnostics.is_empty() {
        o.table(&diagnostics_table(&p.diagnostics))?;
    }
    ledger_outputs(o, &ledger)
}

fn run_tipping(c: &RunConfig, o: &mut Outputs) -> Result<()> {
    let curves = c.curves()?;
    let flights = match &c.inputs.schedule {
        Some(_) => run_pipeline(c, &c.registry()?, &c.grid()?)?.flights,
        None => c.country_mix()?,
    };
    let mut rows = Vec::with_capacity(flights.len());
    for cf in &flights {
        rows.push(TippingRow {
            country: cf.country.clone(),
            flights: cf.flights(),
            miles_nm: cf.miles_nm(),
            fuel_emissions_kg: emissions::fuel_emissions(cf, &curves, &c.params)?,
            electric_energy_wh: emissions::electric_energy_wh(cf, &curves)?,
            tipping_g_per_kwh: emissions::tipping_point(cf, &curves, &c.params)?,
        });
    }
    o.table(&report::tipping_table(&rows))?;
    o.note(format!(
        "closed-form tipping point: {:.4} g/kWh",
        c.params.closed_form_tipping_g_per_kwh()
    ));
    Ok(())
}

fn run_scenarios(c: &RunConfig, o: &mut Outputs, fraction: f64) -> Result<()> {
    let ledger = c.published_ledger()?;
    let results = emissions::scenarios(&ledger, fraction)?;
    let by_abs = emissions::rank_by(&results, |s| s.absolute_delta_kg, |s| s.country.as_str());
    let by_rel = emissions::rank_by(
        &results,
        |s| s.relative_delta_pct.unwrap_or(f64::NEG_INFINITY),
        |s| s.country.as_str(),
    );
    let position = |list: &[&emissions::ScenarioResult], name: &str| {
        list.iter().position(|s| s.country == name).map_or(0, |i| i + 1)
    };
    let rows: Vec<_> = by_abs
        .iter()
        .map(|s| (*s, position(&by_abs, &s.country), position(&by_rel, &s.country)))
        .collect();
    o.table(&report::scenario_table(&rows))
}

fn run_rank(c: &RunConfig, o: &mut Outputs, key: RankKey, continent: Option<&str>) -> Result<()> {
    let ledger = c.published_ledger()?;
    let rows: Vec<LedgerRow> = match continent {
        Some(name) => {
            let want: emissions::Continent = name.parse().map_err(Error::Config)?;
            ledger.rows.into_iter().filter(|r| r.continent == want).collect()
        }
        None => ledger.rows,
    };
    let ranked = emissions::rank(&rows, key);
    let (column, value): (&'static str, fn(&LedgerRow) -> Option<f64>) = match key {
        RankKey::Savings => ("savings_kg", |r| Some(r.savings_kg)),
        RankKey::Miles => ("miles_nm", |r| Some(r.miles_nm)),
        RankKey::Intensity => ("intensity_g_per_kwh", |r| Some(r.intensity_g_per_kwh)),
        RankKey::Tipping => ("tipping_g_per_kwh", |r| Some(r.tipping_g_per_kwh)),
        RankKey::FuelEmissions => ("fuel_emissions_kg", |r| r.fuel_emissions_kg),
        RankKey::ElectricEmissions => ("electric_emissions_kg", |r| r.electric_emissions_kg),
    };
    o.table(&report::rank_table(column, &ranked, value))
}

fn run_decompose(c: &RunConfig, o: &mut Outputs, a: &str, b: &str) -> Result<()> {
    let mix = c.country_mix()?;
    let grid = c.grid()?;
    let find = |name: &str| {
        mix.iter()
            .find(|cf| cf.country == name)
            .ok_or_else(|| Error::UnknownCountry(format!("{name} (not in the country mix)")))
    };
    let (fa, fb) = (find(a)?, find(b)?);
    let d = emissions::decompose_pair(fa, grid.require(a)?, fb, grid.require(b)?, &c.curves()?, &c.params)?;
    o.json("decomposition.json", &d)?;
    if c.format == Format::Csv {
        o.table(&report::decomposition_table(&d))?;
    }
    let closure = d.contributions.total_kg() - d.gap_kg;
    o.note(format!("gap {:.0} kg; contributions sum to gap within {:.3e} kg", d.gap_kg, closure.abs()));
    Ok(())
}

fn run_figdata(c: &RunConfig, o: &mut Outputs) -> Result<()> {
    let ledger = c.published_ledger()?;
    o.table(&report::fig3b_table(&emissions::fig3b_rows(&ledger.rows)))?;
    o.table(&report::fig3a_table(&emissions::fig3a_rows(&ledger.rows)))?;
    o.table(&report::curves_table(&c.curves()?))
}

fn run_gen_corpus(
    c: &RunConfig,
    o: &mut Outputs,
    rows: u64,
    seed: u64,
    short_haul_share: f64,
    malformed: f64,
    path: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = CorpusConfig {
        rows,
        seed,
        short_haul_share,
        short_haul_nm: c.params.short_haul_nm,
        ..Default::default()
    };
    cfg.fractions.insert(Plant::Malformed, malformed);
    let registry = c.registry()?;
    let countries: Vec<String> = c.grid()?.countries().map(str::to_string).collect();
    let deny = c.deny_list()?;
    let path = path.unwrap_or_else(|| c.out_dir.join("schedule.csv"));
    let manifest = o
        .batch
        .stage_with(&path, |w| corpus::generate(&cfg, &registry, &countries, &deny, w))?;
    let manifest_path = path.with_file_name(format!(
        "{}.manifest.json",
        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    ));
    o.batch.stage(&manifest_path, (manifest.to_json()? + "\n").as_bytes())?;
    o.note(format!("wrote {} ({} rows)", path.display(), manifest.rows_written));
    o.note(format!("wrote {}", manifest_path.display()));
    Ok(())
}
