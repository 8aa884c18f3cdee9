use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use outerplanar::crt::{crt_tail, CrtReference};
use outerplanar::experiments::{
    constants_json, enumeration_csv, run_enumeration_check, run_scaling_experiment, run_tail_experiment, sig12, ExperimentConfig,
};
use outerplanar::metrics::WeightModel;
use outerplanar::num_bigint::BigUint;
use outerplanar::sampler::{stream, MapSampler, Mode};
use outerplanar::series::{read_table, write_table};
use outerplanar::{decompose, ClassSpec, ClassTables, Error, TruncatedSeries};

/// Environment variable naming the coefficient-table cache directory.
const CACHE_ENV: &str = "OUTERPLANAR_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "outerplanar", version, about = "Counting, sampling and metric experiments for rooted simple outerplanar maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact number of rooted maps with n vertices.
    Count {
        #[arg(long, default_value = "out")]
        class: String,
        /// A single size.
        #[arg(long, conflicts_with = "n_range")]
        n: Option<usize>,
        /// Inclusive range `A..B`.
        #[arg(long)]
        n_range: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Critical constants of a class.
    Constants {
        #[arg(long, default_value = "out")]
        class: String,
        /// Edge weights used for the stretch factor.
        #[arg(long, default_value = "unit")]
        weights: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// A uniform random map with n vertices.
    Sample {
        #[arg(long, default_value = "out")]
        class: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SampleMode::Auto)]
        mode: SampleMode,
        /// `text` writes the map, `json` also its decorated tree.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reproduction experiments; CSV by default.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[arg(long, default_value = "out")]
        class: String,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "unit")]
        weights: String,
        /// Stretch factor override for κ.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Per-sample CSV of the scaling experiment.
        #[arg(long)]
        samples_output: Option<PathBuf>,
    },
    /// Tail and moment tables of the CRT diameter.
    Crt {
        #[arg(long, value_enum, default_value_t = CrtTable::Tail)]
        table: CrtTable,
        #[arg(long, default_value_t = 0.2)]
        x_min: f64,
        #[arg(long, default_value_t = 5.0)]
        x_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Highest moment order.
        #[arg(long, default_value_t = 4)]
        moments: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SampleMode {
    Auto,
    Exact,
    Fast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExperimentKind {
    Enumeration,
    Scaling,
    Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CrtTable {
    Tail,
    Moments,
}

/// Exit codes: 0 success, 2 usage (from clap), 3 invalid input, 4 class not
/// supercritical, 1 anything else.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidClass(_) | Error::Infeasible { .. } | Error::InvalidWeights(_) | Error::Parse(_) | Error::Domain(_) => 3,
        Error::Subcritical(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn parse_range(s: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Parse(format!("expected a range `A..B`, got `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a, b))
}

fn cache_file(dir: &Path, spec: &ClassSpec, order: usize) -> PathBuf {
    let id: String = spec.id().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    dir.join(format!("{id}-maps-{order}.txt"))
}

/// `m_0..m_order`, reusing a checksummed cache file when one is configured.
/// A cached table of at least the requested order is accepted; a corrupt one
/// is rebuilt.
fn map_counts(spec: &ClassSpec, order: usize) -> Result<Vec<BigUint>, Error> {
    let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    if let Some(dir) = &dir {
        if let Ok(entries) = std::fs::read_dir(dir) {
            let prefix = cache_file(dir, spec, 0).file_name().map(|f| f.to_string_lossy().trim_end_matches("0.txt").to_string()).unwrap_or_default();
            for entry in entries.flatten() {
                let name = entry.file_name().to_string_lossy().to_string();
                let have = name.strip_prefix(&prefix).and_then(|r| r.strip_suffix(".txt")).and_then(|r| r.parse::<usize>().ok());
                if have.is_some_and(|h| h >= order) {
                    if let Ok(text) = std::fs::read_to_string(entry.path()) {
                        if let Ok((header, series)) = read_table(&text) {
                            if header.class_id == spec.id() && header.series_id == "maps" {
                                let mut m = series.to_biguints()?;
                                m.truncate(order + 1);
                                return Ok(m);
                            }
                        }
                    }
                }
            }
        }
    }
    let m = ClassTables::build(spec, order)?.m;
    if let Some(dir) = &dir {
        std::fs::create_dir_all(dir)?;
        let text = write_table(&spec.id(), "maps", &TruncatedSeries::from_biguints(&m));
        std::fs::write(cache_file(dir, spec, order), text)?;
    }
    Ok(m)
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Count { class, n, n_range, format, output } => {
            let spec: ClassSpec = class.parse()?;
            let (lo, hi) = match (n, n_range) {
                (Some(n), _) => (n, n),
                (None, Some(r)) => parse_range(&r)?,
                (None, None) => return Err(Error::Parse("give --n or --n-range".into())),
            };
            if lo == 0 {
                return Err(Error::Infeasible { n: 0, reason: "maps have at least one vertex".into() });
            }
            let m = map_counts(&spec, hi)?;
            let text = match format {
                Format::Text if lo == hi => format!("{}\n", m[lo]),
                Format::Text => (lo..=hi).map(|n| format!("{n} {}\n", m[n])).collect(),
                Format::Csv => std::iter::once("n,count\n".to_string()).chain((lo..=hi).map(|n| format!("{n},{}\n", m[n]))).collect(),
                Format::Json => {
                    let counts: Map<String, Value> = (lo..=hi).map(|n| (n.to_string(), json!(m[n].to_string()))).collect();
                    json_text(&json!({ "class": spec.id(), "counts": counts }))
                }
            };
            emit(&output, &text)
        }
        Command::Constants { class, weights, format, output } => {
            let spec: ClassSpec = class.parse()?;
            let weights: WeightModel = weights.parse()?;
            let tables = ClassTables::build(&spec, 32.min(spec.max_order()))?;
            let v = constants_json(&tables, &weights)?;
            let text = match format {
                Format::Json => json_text(&v),
                Format::Text | Format::Csv => {
                    let obj = v.as_object().expect("constants form an object");
                    let sep = if format == Format::Csv { "," } else { " " };
                    let mut s = if format == Format::Csv { "key,value\n".to_string() } else { String::new() };
                    for (k, val) in obj {
                        let val = val.as_str().map(str::to_owned).unwrap_or_else(|| val.to_string());
                        s.push_str(&format!("{k}{sep}{val}\n"));
                    }
                    s
                }
            };
            emit(&output, &text)
        }
        Command::Sample { class, n, seed, mode, format, output } => {
            let spec: ClassSpec = class.parse()?;
            let order = match mode {
                SampleMode::Exact => n.max(2),
                SampleMode::Auto if n <= outerplanar::sampler::EXACT_LIMIT => n.max(2),
                _ => 8,
            };
            let tables = ClassTables::build(&spec, order.min(spec.max_order()))?;
            tables.check_feasible(n)?;
            let mode = if order >= n { Mode::Exact } else { Mode::Fast };
            let sampler = MapSampler::new(&tables, n.min(tables.order), mode)?;
            let mut rng = stream(seed, 0, 0, 0);
            let map = sampler.map(n, &mut rng)?;
            let text = match format {
                Format::Text | Format::Csv => map.to_text(),
                Format::Json => {
                    let tree = decompose(&map)?;
                    json_text(&json!({ "class": spec.id(), "n": n, "seed": seed, "tree": tree.to_text(), "map": map.to_text() }))
                }
            };
            emit(&output, &text)
        }
        Command::Experiment { kind, class, n, samples, seed, weights, mu, format, output, samples_output } => {
            let spec: ClassSpec = class.parse()?;
            let weights: WeightModel = weights.parse()?;
            match kind {
                ExperimentKind::Enumeration => {
                    let order = n.iter().copied().max().unwrap_or(1);
                    let tables = ClassTables::build(&spec, order)?;
                    let rows = run_enumeration_check(&tables, &n)?;
                    let text = match format {
                        Format::Json => json_text(&Value::Array(
                            rows.iter().map(|r| json!({ "n": r.n, "exact": r.exact.to_string(), "ratio": sig12(r.ratio) })).collect(),
                        )),
                        _ => enumeration_csv(&rows),
                    };
                    emit(&output, &text)
                }
                ExperimentKind::Scaling => {
                    let cfg = ExperimentConfig { mu, ..ExperimentConfig::new(spec, weights, n, samples, seed) };
                    let report = run_scaling_experiment(&cfg)?;
                    if let Some(p) = &samples_output {
                        std::fs::write(p, report.samples_csv())?;
                    }
                    let text = match format {
                        Format::Json => json_text(&json!({
                            "class": report.class,
                            "weights": report.weights.to_string(),
                            "mu": sig12(report.mu),
                            "mu_source": report.mu_source.label(),
                            "rows": report.rows.iter().map(|r| json!({
                                "n": r.n,
                                "samples": r.samples,
                                "kappa": sig12(r.kappa),
                                "mean_diameter": sig12(r.diameter.mean),
                                "m2_diameter": sig12(r.diameter.second),
                                "mean_height": sig12(r.height.mean),
                                "ratio_m1": sig12(r.ratio_m1()),
                                "ratio_m2": sig12(r.ratio_m2()),
                            })).collect::<Vec<_>>(),
                        })),
                        _ => report.summary_csv(),
                    };
                    emit(&output, &text)
                }
                ExperimentKind::Tail => {
                    let cfg = ExperimentConfig::new(spec, weights, n, samples, seed);
                    let report = run_tail_experiment(&cfg)?;
                    eprint!("{}", report.fit_report());
                    let text = match format {
                        Format::Json => json_text(&json!({
                            "n": report.n,
                            "samples": report.diameters.len(),
                            "median": sig12(report.median),
                            "slope": sig12(report.slope),
                            "intercept": sig12(report.intercept),
                            "r2": sig12(report.r2),
                        })),
                        _ => report.csv(),
                    };
                    emit(&output, &text)
                }
            }
        }
        Command::Crt { table, x_min, x_max, step, moments, output } => {
            let text = match table {
                CrtTable::Tail => {
                    if !(step > 0.0) || x_min < 0.0 || x_max < x_min {
                        return Err(Error::Domain("need 0 <= x-min <= x-max and step > 0".into()));
                    }
                    let count = ((x_max - x_min) / step + 1e-9).floor() as usize;
                    let mut s = String::from("x,tail\n");
                    for i in 0..=count {
                        let x = x_min + i as f64 * step;
                        s.push_str(&format!("{},{}\n", sig12(x), sig12(crt_tail(x)?)));
                    }
                    s
                }
                CrtTable::Moments => {
                    let c = CrtReference::default();
                    let mut s = String::from("r,moment,integrated\n");
                    for r in 1..=moments.max(1) {
                        s.push_str(&format!("{r},{},{}\n", sig12(c.moment(r)?), sig12(c.moment_by_integration(r, 4000)?)));
                    }
                    s
                }
            };
            emit(&output, &text)
        }
    }
}
