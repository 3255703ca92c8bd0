//! Command-line front end for the sampling-design pipeline.
//!
//! Five subcommands expose the library as plot-ready artifacts:
//!
//! * `plan` — active slots, `q`, and rate arithmetic for one `(bands, L)`.
//! * `sweep` — minimal sampling ratio per `L` over a range (CSV).
//! * `search` — pattern optimization: exhaustive, greedy, or random (JSON).
//! * `hist` — condition-number distributions over random draws.
//! * `simulate` — synthesize, sample, add noise, reconstruct, report (JSON).
//!
//! Global flags: `--json` (JSON instead of text/CSV where both exist),
//! `--out PATH` (write to a file instead of stdout), `--seed INT` (master
//! seed, default 0), and `--config PATH` (a JSON object whose keys mirror the
//! long flag names; explicit flags always win). Every JSON document carries a
//! top-level `"format_version": 1` and validates against the schemas shipped
//! in `schemas/`. Runs with the same seed produce byte-identical output.
//!
//! Exit codes: `0` success, `1` I/O failure, `2` parse or validation error,
//! `3` infeasible parameters (`p < q` or `p > L`), `4` rank-deficient
//! pattern, `5` evaluation cap exceeded.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::modulation::{build_modulation_matrix, SamplePattern};
use crate::reconstruction::{evaluate_reconstruction, solve_bins, stack_observations};
use crate::rng::derive_seed;
use crate::search::{
    exhaustive_search_capped, random_pattern_trials, random_search, sfs_over_random_supports,
    sfs_search, HistogramSpec, PRule, SearchResult, DEFAULT_EXHAUSTIVE_CAP,
};
use crate::signal::{add_noise, coset_sample, synthesize_multiband, GridSpec};
use crate::spectrum::{compute_spectral_index_set, make_rate_plan, sweep_rates, BandSet, SpectralIndexSet};

/// Version stamped into every JSON document this binary emits.
pub const FORMAT_VERSION: u32 = 1;

const DEFAULT_TRIALS: u64 = 1000;
const DEFAULT_BINS: usize = 30;
const DEFAULT_THRESHOLDS: &[f64] = &[5.5];

#[derive(Parser, Debug)]
#[command(name = "multicoset", version, about = "Sub-Nyquist periodic nonuniform sampling design toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Emit JSON instead of text/CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Write output to this path instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed for every randomized step (default 0).
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// JSON file supplying defaults for any long flag; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the active slots and rate arithmetic for one (bands, L).
    Plan(PlanArgs),
    /// Tabulate the minimal sampling ratio for each L in a range.
    Sweep(SweepArgs),
    /// Find a sampling pattern by exhaustive, greedy, or random search.
    Search(SearchArgs),
    /// Histogram condition numbers over random patterns or random supports.
    Hist(HistArgs),
    /// Run one sample-and-reconstruct experiment and report its quality.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Band set as `a1:b1,a2:b2,...` in Hz (paired with --fmax).
    #[arg(long, value_name = "SPEC")]
    bands: Option<String>,
    /// Highest signal frequency in Hz.
    #[arg(long, value_name = "HZ")]
    fmax: Option<f64>,
    /// Slots per sampling period.
    #[arg(long = "L", value_name = "INT")]
    l: Option<usize>,
    /// Cosets kept per period; defaults to the minimum, p = q.
    #[arg(long, value_name = "INT")]
    p: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Band set as `a1:b1,a2:b2,...` in Hz (paired with --fmax).
    #[arg(long, value_name = "SPEC")]
    bands: Option<String>,
    /// Highest signal frequency in Hz.
    #[arg(long, value_name = "HZ")]
    fmax: Option<f64>,
    /// Smallest L to tabulate.
    #[arg(long = "L-min", value_name = "INT")]
    l_min: Option<usize>,
    /// Largest L to tabulate.
    #[arg(long = "L-max", value_name = "INT")]
    l_max: Option<usize>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Slots per sampling period.
    #[arg(long = "L", value_name = "INT")]
    l: Option<usize>,
    /// Pattern size (cosets kept per period).
    #[arg(long, value_name = "INT")]
    p: Option<usize>,
    /// Active slots as `2,3,8,9`; alternative to --bands/--fmax.
    #[arg(long, value_name = "LIST", conflicts_with_all = ["bands", "fmax"])]
    k: Option<String>,
    /// Band set from which the active slots are derived.
    #[arg(long, value_name = "SPEC")]
    bands: Option<String>,
    /// Highest signal frequency in Hz.
    #[arg(long, value_name = "HZ")]
    fmax: Option<f64>,
    /// Search method: exhaustive (default), sfs, or random.
    #[arg(long, value_name = "NAME")]
    method: Option<String>,
    /// Trial count for the random method.
    #[arg(long, value_name = "INT")]
    trials: Option<u64>,
    /// Evaluation cap for the exhaustive method.
    #[arg(long, value_name = "INT")]
    cap: Option<u64>,
}

#[derive(Args, Debug)]
struct HistArgs {
    /// Slots per sampling period.
    #[arg(long = "L", value_name = "INT")]
    l: Option<usize>,
    /// Pattern size; required in random mode, optional in sfs-supports mode.
    #[arg(long, value_name = "INT")]
    p: Option<usize>,
    /// Active slots as `2,3,8,9` (random mode only).
    #[arg(long, value_name = "LIST")]
    k: Option<String>,
    /// Sampling mode: random (default) or sfs-supports.
    #[arg(long, value_name = "NAME")]
    mode: Option<String>,
    /// Number of random draws.
    #[arg(long, value_name = "INT")]
    trials: Option<u64>,
    /// Number of equal-width histogram bins.
    #[arg(long, value_name = "INT")]
    bins: Option<usize>,
    /// Comma-separated condition-number thresholds for fraction-below stats.
    #[arg(long, value_name = "LIST")]
    thresholds: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Band set as `a1:b1,a2:b2,...` in Hz (paired with --fmax).
    #[arg(long, value_name = "SPEC")]
    bands: Option<String>,
    /// Highest signal frequency in Hz.
    #[arg(long, value_name = "HZ")]
    fmax: Option<f64>,
    /// Slots per sampling period.
    #[arg(long = "L", value_name = "INT")]
    l: Option<usize>,
    /// Explicit coset offsets as `1,2,6,7`; alternative to --method.
    #[arg(long, value_name = "LIST", conflicts_with_all = ["method", "p", "trials", "cap"])]
    pattern: Option<String>,
    /// Pick the pattern by search: exhaustive, sfs, or random.
    #[arg(long, value_name = "NAME")]
    method: Option<String>,
    /// Pattern size for --method; defaults to the minimum, p = q.
    #[arg(long, value_name = "INT")]
    p: Option<usize>,
    /// Trial count when --method random picks the pattern.
    #[arg(long, value_name = "INT")]
    trials: Option<u64>,
    /// Evaluation cap when --method exhaustive picks the pattern.
    #[arg(long, value_name = "INT")]
    cap: Option<u64>,
    /// Grid length; defaults to 64·L.
    #[arg(long = "N", value_name = "INT")]
    n: Option<usize>,
    /// Measurement SNR in dB; omit for a noiseless run.
    #[arg(long = "snr-db", value_name = "DB")]
    snr_db: Option<f64>,
}

/// Parses arguments, runs the selected command, and returns the process exit
/// code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Json(_) => 2,
        Error::Infeasible(_) => 3,
        Error::RankDeficient { .. } => 4,
        Error::CapExceeded { .. } => 5,
        Error::Io(_) => 1,
    }
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = ConfigDoc::load(cli.global.config.as_deref())?;
    let json = cli.global.json || cfg.get_bool("json")?.unwrap_or(false);
    let out = match cli.global.out {
        Some(path) => Some(path),
        None => cfg.get_string("out")?.map(PathBuf::from),
    };
    let seed = resolve(cli.global.seed, &cfg, "seed")?.unwrap_or(0);
    let out = out.as_deref();
    match cli.command {
        Command::Plan(args) => cmd_plan(args, &cfg, json, out),
        Command::Sweep(args) => cmd_sweep(args, &cfg, json, out),
        Command::Search(args) => cmd_search(args, &cfg, seed, out),
        Command::Hist(args) => cmd_hist(args, &cfg, json, seed, out),
        Command::Simulate(args) => cmd_simulate(args, &cfg, seed, out),
    }
}

/// Flag defaults loaded from `--config`: a single JSON object keyed by the
/// long flag names.
struct ConfigDoc {
    map: Map<String, Value>,
}

impl ConfigDoc {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(ConfigDoc { map: Map::new() });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config file {}: {e}", path.display())))?;
        match serde_json::from_str(&text)? {
            Value::Object(map) => Ok(ConfigDoc { map }),
            other => Err(Error::invalid(format!(
                "config file {} must hold a JSON object, found {other}",
                path.display()
            ))),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.map.get(key).is_some_and(|v| !v.is_null())
    }

    /// The value under `key` rendered as flag text: strings verbatim,
    /// numbers and booleans via their display form, arrays comma-joined.
    fn get_string(&self, key: &str) -> Result<Option<String>> {
        fn scalar(key: &str, value: &Value) -> Result<String> {
            match value {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                Value::Bool(b) => Ok(b.to_string()),
                _ => Err(Error::invalid(format!("config field '{key}' must be a scalar or array of scalars"))),
            }
        }
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Array(items)) => {
                let parts: Vec<String> = items.iter().map(|v| scalar(key, v)).collect::<Result<_>>()?;
                Ok(Some(parts.join(",")))
            }
            Some(value) => scalar(key, value).map(Some),
        }
    }

    fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(_) => Err(Error::invalid(format!("config field '{key}' must be a boolean"))),
        }
    }
}

/// A flag value if given, otherwise the config value parsed exactly as the
/// flag would be.
fn resolve<T: FromStr>(flag: Option<T>, cfg: &ConfigDoc, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get_string(key)? {
        Some(text) => text
            .parse::<T>()
            .map(Some)
            .map_err(|e| Error::invalid(format!("config field '{key}': {e}"))),
        None => Ok(None),
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::invalid(format!("missing required parameter: {what}")))
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|item| {
            item.trim()
                .parse::<usize>()
                .map_err(|e| Error::invalid(format!("invalid {what} entry '{}': {e}", item.trim())))
        })
        .collect()
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|item| {
            item.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("invalid {what} entry '{}': {e}", item.trim())))
        })
        .collect()
}

fn parse_bands(spec: &str, fmax: Option<f64>) -> Result<BandSet> {
    let fmax = require(fmax, "--fmax (required with --bands)")?;
    BandSet::from_text(&format!("{spec}@{fmax}"))
}

fn resolve_bands(bands: Option<String>, fmax: Option<f64>, cfg: &ConfigDoc) -> Result<BandSet> {
    let spec = require(resolve(bands, cfg, "bands")?, "--bands")?;
    parse_bands(&spec, resolve(fmax, cfg, "fmax")?)
}

/// Prepends `"format_version": 1` to a JSON object.
fn versioned(value: Value) -> Value {
    let mut map = Map::new();
    map.insert("format_version".into(), json!(FORMAT_VERSION));
    if let Value::Object(fields) = value {
        map.extend(fields);
    }
    Value::Object(map)
}

fn render_json(value: &Value) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn cmd_plan(args: PlanArgs, cfg: &ConfigDoc, json: bool, out: Option<&Path>) -> Result<()> {
    let bands = resolve_bands(args.bands, args.fmax, cfg)?;
    let l = require(resolve(args.l, cfg, "L")?, "--L")?;
    let k = compute_spectral_index_set(&bands, l)?;
    let p = resolve(args.p, cfg, "p")?.unwrap_or_else(|| k.q());
    let plan = make_rate_plan(&bands, l, p)?;
    let t = 1.0 / bands.f_max();
    let landau_ratio = plan.landau_rate / plan.nyquist_rate;
    let content = if json {
        render_json(&versioned(json!({
            "bands": bands,
            "L": plan.l,
            "p": plan.p,
            "q": plan.q,
            "k": k.indices(),
            "T": t,
            "average_rate": plan.average_rate,
            "landau_rate": plan.landau_rate,
            "nyquist_rate": plan.nyquist_rate,
            "ratio": plan.ratio,
            "landau_ratio": landau_ratio,
        })))?
    } else {
        format!(
            "bands = {bands}\nk = {k}\nq = {q}\np = {p}\nL = {l}\nT = {t} s\n\
             average rate = {avg} Hz\nlandau rate = {lan} Hz\nnyquist rate = {nyq} Hz\n\
             ratio = {ratio}\nlandau ratio = {landau_ratio}\n",
            q = plan.q,
            p = plan.p,
            l = plan.l,
            avg = plan.average_rate,
            lan = plan.landau_rate,
            nyq = plan.nyquist_rate,
            ratio = plan.ratio,
        )
    };
    emit(out, &content)
}

fn cmd_sweep(args: SweepArgs, cfg: &ConfigDoc, json: bool, out: Option<&Path>) -> Result<()> {
    let bands = resolve_bands(args.bands, args.fmax, cfg)?;
    let l_min = require(resolve(args.l_min, cfg, "L-min")?, "--L-min")?;
    let l_max = require(resolve(args.l_max, cfg, "L-max")?, "--L-max")?;
    let plans = sweep_rates(&bands, l_min, l_max)?;
    let content = if json {
        let rows: Vec<Value> = plans
            .iter()
            .map(|plan| json!({"L": plan.l, "q": plan.q, "ratio": plan.ratio}))
            .collect();
        render_json(&versioned(json!({"bands": bands, "rows": rows})))?
    } else {
        let mut csv = String::from("L,q,ratio\n");
        for plan in &plans {
            csv.push_str(&format!("{},{},{}\n", plan.l, plan.q, plan.ratio));
        }
        csv
    };
    emit(out, &content)
}

enum MethodChoice {
    Exhaustive,
    Sfs,
    Random,
}

impl MethodChoice {
    fn parse(name: &str) -> Result<Self> {
        match name {
            "exhaustive" => Ok(MethodChoice::Exhaustive),
            "sfs" => Ok(MethodChoice::Sfs),
            "random" => Ok(MethodChoice::Random),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected exhaustive, sfs, or random)"
            ))),
        }
    }
}

/// The active slots for `search`: `--k` and `--bands` are mutually
/// exclusive, a present flag suppresses the other's config entry, and a
/// config supplying both is rejected.
fn resolve_slots(
    k: Option<String>,
    bands: Option<String>,
    fmax: Option<f64>,
    cfg: &ConfigDoc,
    l: usize,
) -> Result<SpectralIndexSet> {
    let from_list = |text: &str| SpectralIndexSet::new(l, &parse_usize_list(text, "--k")?);
    let from_bands = |spec: &str, fmax: Option<f64>| -> Result<SpectralIndexSet> {
        compute_spectral_index_set(&parse_bands(spec, fmax)?, l)
    };
    if let Some(text) = k {
        return from_list(&text);
    }
    if let Some(spec) = bands {
        return from_bands(&spec, resolve(fmax, cfg, "fmax")?);
    }
    match (cfg.get_string("k")?, cfg.get_string("bands")?) {
        (Some(_), Some(_)) => Err(Error::invalid("config supplies both 'k' and 'bands'; keep one")),
        (Some(text), None) => from_list(&text),
        (None, Some(spec)) => from_bands(&spec, resolve(fmax, cfg, "fmax")?),
        (None, None) => Err(Error::invalid("missing required parameter: --k, or --bands with --fmax")),
    }
}

fn run_search(
    method: &MethodChoice,
    l: usize,
    p: usize,
    k: &SpectralIndexSet,
    trials: u64,
    cap: u64,
    seed: u64,
) -> Result<SearchResult> {
    match method {
        MethodChoice::Exhaustive => exhaustive_search_capped(l, p, k, cap),
        MethodChoice::Sfs => sfs_search(l, p, k),
        MethodChoice::Random => random_search(l, p, k, trials, seed),
    }
}

fn cmd_search(args: SearchArgs, cfg: &ConfigDoc, seed: u64, out: Option<&Path>) -> Result<()> {
    let l = require(resolve(args.l, cfg, "L")?, "--L")?;
    let p = require(resolve(args.p, cfg, "p")?, "--p")?;
    let k = resolve_slots(args.k, args.bands, args.fmax, cfg, l)?;
    let method_name = resolve(args.method, cfg, "method")?.unwrap_or_else(|| "exhaustive".into());
    let method = MethodChoice::parse(&method_name)?;
    let trials = resolve(args.trials, cfg, "trials")?.unwrap_or(DEFAULT_TRIALS);
    let cap = resolve(args.cap, cfg, "cap")?.unwrap_or(DEFAULT_EXHAUSTIVE_CAP);
    let result = run_search(&method, l, p, &k, trials, cap, seed)?;
    let content = render_json(&versioned(serde_json::to_value(&result)?))?;
    emit(out, &content)
}

fn cmd_hist(args: HistArgs, cfg: &ConfigDoc, json: bool, seed: u64, out: Option<&Path>) -> Result<()> {
    let l = require(resolve(args.l, cfg, "L")?, "--L")?;
    let mode = resolve(args.mode, cfg, "mode")?.unwrap_or_else(|| "random".into());
    let trials = resolve(args.trials, cfg, "trials")?.unwrap_or(DEFAULT_TRIALS);
    let bins = resolve(args.bins, cfg, "bins")?.unwrap_or(DEFAULT_BINS);
    let thresholds = match resolve(args.thresholds, cfg, "thresholds")? {
        Some(text) => parse_f64_list(&text, "--thresholds")?,
        None => DEFAULT_THRESHOLDS.to_vec(),
    };
    let spec = HistogramSpec { bins, thresholds, ..HistogramSpec::default() };

    let k_flag = args.k;
    let p = resolve(args.p, cfg, "p")?;
    let (hist, p_used, k_used) = match mode.as_str() {
        "random" => {
            let k = match k_flag {
                Some(text) => SpectralIndexSet::new(l, &parse_usize_list(&text, "--k")?)?,
                None => {
                    let text = require(cfg.get_string("k")?, "--k")?;
                    SpectralIndexSet::new(l, &parse_usize_list(&text, "--k")?)?
                }
            };
            let p = require(p, "--p")?;
            let hist = random_pattern_trials(l, p, &k, trials, seed, &spec)?;
            (hist, Some(p), Some(k))
        }
        "sfs-supports" => {
            if k_flag.is_some() {
                return Err(Error::invalid("--k does not apply to sfs-supports mode (supports are drawn at random)"));
            }
            let rule = match p {
                Some(p) => PRule::Fixed(p),
                None => PRule::PEqualsQ,
            };
            let hist = sfs_over_random_supports(l, rule, trials, seed, &spec)?;
            (hist, p, None)
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown mode '{other}' (expected random or sfs-supports)"
            )));
        }
    };

    let mut doc = Map::new();
    doc.insert("mode".into(), json!(mode));
    doc.insert("L".into(), json!(l));
    doc.insert("p".into(), json!(p_used));
    doc.insert("k".into(), json!(k_used.as_ref().map(|k| k.indices())));
    doc.insert("seed".into(), json!(seed));
    if let Value::Object(fields) = hist.to_json() {
        doc.extend(fields);
    }
    let json_text = render_json(&versioned(Value::Object(doc)))?;
    let csv_text = hist.to_csv();

    match out {
        Some(path) => {
            std::fs::write(path, csv_text)?;
            let mut sidecar = path.as_os_str().to_os_string();
            sidecar.push(".json");
            std::fs::write(sidecar, json_text)?;
            Ok(())
        }
        None => emit(None, if json { &json_text } else { &csv_text }),
    }
}

fn cmd_simulate(args: SimulateArgs, cfg: &ConfigDoc, seed: u64, out: Option<&Path>) -> Result<()> {
    let bands = resolve_bands(args.bands, args.fmax, cfg)?;
    let l = require(resolve(args.l, cfg, "L")?, "--L")?;
    let k = compute_spectral_index_set(&bands, l)?;
    let t = 1.0 / bands.f_max();
    let n = resolve(args.n, cfg, "N")?.unwrap_or(64 * l);
    let snr_db = resolve(args.snr_db, cfg, "snr-db")?;

    // --pattern and --method are mutually exclusive; a present flag
    // suppresses the other's config entry.
    let pattern_text = match (&args.pattern, &args.method) {
        (Some(text), _) => Some(text.clone()),
        (None, Some(_)) => None,
        (None, None) => {
            if cfg.has("pattern") && cfg.has("method") {
                return Err(Error::invalid("config supplies both 'pattern' and 'method'; keep one"));
            }
            cfg.get_string("pattern")?
        }
    };
    let (pattern, method_used) = match pattern_text {
        Some(text) => (SamplePattern::new(l, &parse_usize_list(&text, "--pattern")?)?, None),
        None => {
            let name = require(resolve(args.method, cfg, "method")?, "--pattern or --method")?;
            let method = MethodChoice::parse(&name)?;
            let p = resolve(args.p, cfg, "p")?.unwrap_or_else(|| k.q());
            let trials = resolve(args.trials, cfg, "trials")?.unwrap_or(DEFAULT_TRIALS);
            let cap = resolve(args.cap, cfg, "cap")?.unwrap_or(DEFAULT_EXHAUSTIVE_CAP);
            let result = run_search(&method, l, p, &k, trials, cap, derive_seed(seed, 2))?;
            (result.pattern, Some(name))
        }
    };

    let a = build_modulation_matrix(&pattern, &k, t)?;
    let grid = GridSpec::new(n, l, t)?;
    let signal = synthesize_multiband(&bands, &grid, derive_seed(seed, 0))?;
    let clean = coset_sample(&signal, &pattern)?;
    let clean_obs = stack_observations(&clean);
    let noisy = match snr_db {
        Some(snr) => add_noise(&clean, snr, derive_seed(seed, 1))?,
        None => clean.clone(),
    };
    let noisy_obs = stack_observations(&noisy);
    let reconstructed = solve_bins(&noisy_obs, &a)?;
    let report = evaluate_reconstruction(&signal, &reconstructed, &clean_obs, &noisy_obs, &a, snr_db)?;

    let mut doc = Map::new();
    doc.insert("bands".into(), serde_json::to_value(&bands)?);
    doc.insert("N".into(), json!(n));
    doc.insert("T".into(), json!(t));
    doc.insert("k".into(), json!(k.indices()));
    doc.insert("seed".into(), json!(seed));
    doc.insert("method".into(), json!(method_used));
    if let Value::Object(fields) = serde_json::to_value(&report)? {
        doc.extend(fields);
    }
    let content = render_json(&versioned(Value::Object(doc)))?;
    emit(out, &content)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_from(value: Value) -> ConfigDoc {
        match value {
            Value::Object(map) => ConfigDoc { map },
            _ => unreachable!(),
        }
    }

    #[test]
    fn config_values_render_as_flag_text() {
        let cfg = config_from(json!({
            "bands": "1.2:1.8,4.1:4.8",
            "L": 10,
            "json": true,
            "k": [2, 3, 8, 9],
            "thresholds": [5.5, 2.0],
            "out": null,
        }));
        assert_eq!(cfg.get_string("bands").unwrap().unwrap(), "1.2:1.8,4.1:4.8");
        assert_eq!(cfg.get_string("L").unwrap().unwrap(), "10");
        assert_eq!(cfg.get_string("k").unwrap().unwrap(), "2,3,8,9");
        assert_eq!(cfg.get_string("thresholds").unwrap().unwrap(), "5.5,2.0");
        assert_eq!(cfg.get_string("out").unwrap(), None);
        assert_eq!(cfg.get_bool("json").unwrap(), Some(true));
        assert!(cfg.get_bool("L").is_err());
        assert!(!cfg.has("out"));
        assert!(cfg.has("L"));
    }

    #[test]
    fn flags_win_over_config() {
        let cfg = config_from(json!({"L": 12}));
        assert_eq!(resolve(Some(10usize), &cfg, "L").unwrap(), Some(10));
        assert_eq!(resolve(None::<usize>, &cfg, "L").unwrap(), Some(12));
        assert_eq!(resolve(None::<usize>, &cfg, "p").unwrap(), None);
        assert!(resolve::<usize>(None, &config_from(json!({"L": "ten"})), "L").is_err());
    }

    #[test]
    fn list_parsers_reject_garbage() {
        assert_eq!(parse_usize_list("2, 3,8,9", "--k").unwrap(), vec![2, 3, 8, 9]);
        assert!(parse_usize_list("2,x", "--k").is_err());
        assert_eq!(parse_f64_list("5.5,2", "--thresholds").unwrap(), vec![5.5, 2.0]);
        assert!(parse_f64_list("", "--thresholds").is_err());
    }

    #[test]
    fn versioned_puts_the_format_stamp_first() {
        let doc = versioned(json!({"a": 1}));
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.starts_with(r#"{"format_version":1,"a":1"#), "{text}");
    }

    #[test]
    fn exit_codes_follow_the_error_taxonomy() {
        assert_eq!(exit_code_for(&Error::invalid("x")), 2);
        assert_eq!(exit_code_for(&Error::infeasible("x")), 3);
        assert_eq!(exit_code_for(&Error::RankDeficient { pattern: vec![0], raw_ratio: 1e12 }), 4);
        assert_eq!(exit_code_for(&Error::CapExceeded { required: 10, cap: 5 }), 5);
        assert_eq!(exit_code_for(&Error::Io(std::io::Error::other("x"))), 1);
    }

    #[test]
    fn slot_resolution_prefers_flags_and_rejects_double_config() {
        let cfg = config_from(json!({"k": [2, 3], "bands": "0:1", "fmax": 5.0}));
        assert!(resolve_slots(None, None, None, &cfg, 10).is_err());
        let k = resolve_slots(Some("2,3,8,9".into()), None, None, &cfg, 10).unwrap();
        assert_eq!(k.indices(), &[2, 3, 8, 9]);
        let from_bands = resolve_slots(None, Some("1.2:1.8".into()), Some(5.0), &cfg, 10).unwrap();
        assert_eq!(from_bands.indices(), &[2, 3]);
        let only_k = config_from(json!({"k": [1, 4]}));
        assert_eq!(resolve_slots(None, None, None, &only_k, 10).unwrap().indices(), &[1, 4]);
    }

    #[test]
    fn method_names_parse() {
        assert!(MethodChoice::parse("exhaustive").is_ok());
        assert!(MethodChoice::parse("sfs").is_ok());
        assert!(MethodChoice::parse("random").is_ok());
        assert!(MethodChoice::parse("greedy").is_err());
    }
}
