//! Reproduction harness: enumeration against asymptotics, diameter scaling
//! against the CRT moments, and the diameter tail fit.
//!
//! CSV schemas (header rows are written verbatim):
//! - enumeration: `n,exact,asymptotic,ratio`
//! - scaling summary: `class,weights,n,samples,kappa,mean_diameter,var_diameter,m2_diameter,mean_height,var_height,m2_height,crt_m1,crt_m2,ratio_m1,ratio_m2`
//! - scaling samples: `n,index,vertices,diameter,height`
//! - tail: `x,x2_over_n,survival,log_survival,in_fit`

use std::fmt::Write as _;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::classes::{BlockLaw, ClassSpec, ClassTables};
use crate::crt::crt_moment;
use crate::error::{Error, Result};
use crate::metrics::{assign_weights, estimate_mu, fpp, kappa, mu_bipartite, mu_bipartite_normalized, mu_formula_unrestricted, WeightModel};
use crate::real::Real;
use crate::sampler::{stream, MapSampler, Mode, EXACT_LIMIT};
use crate::stats::{quantile, Summary};

/// Decimal string with 12 significant digits, trailing zeros trimmed.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-6..=15).contains(&exp) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationRow {
    pub n: usize,
    pub exact: BigUint,
    /// `log10` of the asymptotic estimate; the value itself overflows doubles.
    pub asymptotic_log10: f64,
    pub ratio: f64,
}

/// Exact `m_n` against `s (φ/(2πφ''))^{1/2} (φ/τ)^n n^{-3/2}` for each feasible `n`.
pub fn run_enumeration_check(tables: &ClassTables, ns: &[usize]) -> Result<Vec<EnumerationRow>> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        tables.check_feasible(n)?;
        let exact = tables.map_count(n)?.clone();
        let asym = tables.asymptotic_count(n)?;
        let ratio = (Real::from_biguint(&exact) / &asym).to_f64();
        let asymptotic_log10 = asym.ln().to_f64() / std::f64::consts::LN_10;
        rows.push(EnumerationRow { n, exact, asymptotic_log10, ratio });
    }
    Ok(rows)
}

pub fn enumeration_csv(rows: &[EnumerationRow]) -> String {
    let mut out = String::from("n,exact,asymptotic,ratio\n");
    for r in rows {
        let mantissa = 10f64.powf(r.asymptotic_log10.fract());
        let asym = format!("{}e{}", sig12(mantissa), r.asymptotic_log10.floor() as i64);
        writeln!(out, "{},{},{},{}", r.n, r.exact, asym, sig12(r.ratio)).expect("string write");
    }
    out
}

/// Where a class's stretch factor comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MuSource {
    /// Closed formula for the unrestricted class.
    Formula,
    /// Linear system with the marked-edge probability as stated for the even-face class.
    BipartiteSystem,
    /// Monte-Carlo estimate from pointed Boltzmann samples.
    MonteCarlo { samples: usize, std_error: f64 },
}

impl MuSource {
    pub fn label(&self) -> &'static str {
        match self {
            MuSource::Formula => "formula",
            MuSource::BipartiteSystem => "linear-system",
            MuSource::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

const OUT_LAW: BlockLaw = BlockLaw::Progression { first: 2, step: 1 };
const BIP_LAW: BlockLaw = BlockLaw::Progression { first: 3, step: 2 };

/// Samples used when a class has no closed-form stretch factor.
pub const MU_FALLBACK_SAMPLES: usize = 200_000;
pub const MU_FALLBACK_SEED: u64 = 0x5eed;

/// Stretch factor under unit weights. Other weight laws always use Monte Carlo.
pub fn stretch_factor(tables: &ClassTables, weights: &WeightModel) -> Result<(f64, MuSource)> {
    let law = tables.spec.block_law();
    if weights.is_unit() {
        if law == Some(OUT_LAW) {
            let w = tables.analytic()?.w.to_f64();
            return Ok((mu_formula_unrestricted(w)?, MuSource::Formula));
        }
        if law == Some(BIP_LAW) {
            return Ok((mu_bipartite().e_l, MuSource::BipartiteSystem));
        }
    }
    let est = estimate_mu(tables, weights, MU_FALLBACK_SAMPLES, MU_FALLBACK_SEED)?;
    Ok((est.mean, MuSource::MonteCarlo { samples: est.samples, std_error: est.std_error }))
}

/// All constants of a class as a JSON object of 12-digit decimal strings.
pub fn constants_json(tables: &ClassTables, weights: &WeightModel) -> Result<Value> {
    let a = tables.analytic()?;
    let sigma2 = a.sigma2.to_f64();
    let (mu, source) = stretch_factor(tables, weights)?;
    let mut obj = Map::new();
    let mut put = |k: &str, v: f64| {
        obj.insert(k.into(), Value::String(sig12(v)));
    };
    put("tau", a.tau.to_f64());
    put("c_tau", a.w.to_f64());
    put("phi_tau", a.phi.to_f64());
    put("growth", a.growth().to_f64());
    put("sigma2", sigma2);
    put("prefactor", tables.prefactor()?.to_f64());
    put("mu", mu);
    put("kappa", kappa(sigma2, mu));
    if let MuSource::MonteCarlo { std_error, .. } = source {
        put("mu_std_error", std_error);
    }
    if source == MuSource::BipartiteSystem {
        let norm = mu_bipartite_normalized();
        put("mu_normalized", norm.e_l);
        put("kappa_normalized", kappa(sigma2, norm.e_l));
    }
    obj.insert("class".into(), json!(tables.spec.id()));
    obj.insert("span".into(), json!(tables.span));
    obj.insert("weights".into(), json!(weights.to_string()));
    obj.insert("mu_source".into(), json!(source.label()));
    Ok(Value::Object(obj))
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub spec: ClassSpec,
    pub weights: WeightModel,
    pub ns: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Overrides the stretch factor used for κ; `None` takes [`stretch_factor`].
    pub mu: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(spec: ClassSpec, weights: WeightModel, ns: Vec<usize>, samples: usize, seed: u64) -> Self {
        ExperimentConfig { spec, weights, ns, samples, seed, mu: None }
    }

    pub fn validate(&self, tables: &ClassTables) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Domain("at least one sample is needed".into()));
        }
        if self.ns.is_empty() {
            return Err(Error::Domain("no sizes given".into()));
        }
        self.weights.validate()?;
        for &n in &self.ns {
            tables.check_feasible(n)?;
        }
        Ok(())
    }
}

/// Table order used by the harness: exact sampling below this size.
pub const HARNESS_ORDER: usize = EXACT_LIMIT;

pub fn harness_tables(spec: &ClassSpec) -> Result<ClassTables> {
    let t = ClassTables::build(spec, HARNESS_ORDER.min(spec.max_order()))?;
    if !t.nu_exceeds_one {
        return Err(Error::Subcritical(format!("class {} has no critical point", spec.id())));
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRecord {
    pub n: usize,
    pub index: usize,
    pub diameter: f64,
    pub height: f64,
}

const SCALING_EXPERIMENT: u64 = 1;
const TAIL_EXPERIMENT: u64 = 2;

fn experiment_id(kind: u64, n: usize) -> u64 {
    (kind << 40) | n as u64
}

/// Diameters and heights of `samples` uniform maps of size `n`; sample `i`
/// draws from its own stream, so results are independent of scheduling.
pub fn sample_metrics(tables: &ClassTables, weights: &WeightModel, n: usize, samples: usize, seed: u64, kind: u64) -> Result<Vec<SampleRecord>> {
    tables.check_feasible(n)?;
    let mode = if n <= tables.order { Mode::Exact } else { Mode::Fast };
    let sampler = MapSampler::new(tables, n.min(tables.order), mode)?;
    (0..samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream(seed, experiment_id(kind, n), index as u64, 0);
            let map = sampler.map(n, &mut rng)?;
            let w = assign_weights(&map, weights, &mut rng);
            let r = fpp(&map, &w);
            Ok(SampleRecord { n, index, diameter: r.diameter, height: r.height })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub samples: usize,
    pub kappa: f64,
    /// Of `κ n^{-1/2} D`.
    pub diameter: Moments,
    /// Of `κ n^{-1/2} H`, with `H` the distance profile maximum from the root.
    pub height: Moments,
    pub crt_m1: f64,
    pub crt_m2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub second: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Moments {
        let s = Summary::of(xs);
        let second = xs.iter().map(|x| x * x).sum::<f64>() / xs.len().max(1) as f64;
        Moments { mean: s.mean, variance: s.variance, second }
    }
}

impl ScalingRow {
    pub fn ratio_m1(&self) -> f64 {
        self.diameter.mean / self.crt_m1
    }

    pub fn ratio_m2(&self) -> f64 {
        self.diameter.second / self.crt_m2
    }
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub class: String,
    pub weights: WeightModel,
    pub mu: f64,
    pub mu_source: MuSource,
    pub rows: Vec<ScalingRow>,
    pub records: Vec<SampleRecord>,
}

pub fn run_scaling_experiment(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    let tables = harness_tables(&cfg.spec)?;
    cfg.validate(&tables)?;
    let sigma2 = tables.analytic()?.sigma2.to_f64();
    let (mu, mu_source) = match cfg.mu {
        Some(mu) => (mu, MuSource::Formula),
        None => stretch_factor(&tables, &cfg.weights)?,
    };
    let k = kappa(sigma2, mu);
    let (crt_m1, crt_m2) = (crt_moment(1)?, crt_moment(2)?);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &n in &cfg.ns {
        let recs = sample_metrics(&tables, &cfg.weights, n, cfg.samples, cfg.seed, SCALING_EXPERIMENT)?;
        let scale = k / (n as f64).sqrt();
        let d: Vec<f64> = recs.iter().map(|r| r.diameter * scale).collect();
        let h: Vec<f64> = recs.iter().map(|r| r.height * scale).collect();
        rows.push(ScalingRow { n, samples: recs.len(), kappa: k, diameter: Moments::of(&d), height: Moments::of(&h), crt_m1, crt_m2 });
        records.extend(recs);
    }
    Ok(ScalingReport { class: cfg.spec.id(), weights: cfg.weights, mu, mu_source, rows, records })
}

impl ScalingReport {
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "class,weights,n,samples,kappa,mean_diameter,var_diameter,m2_diameter,mean_height,var_height,m2_height,crt_m1,crt_m2,ratio_m1,ratio_m2\n",
        );
        for r in &self.rows {
            let cells = [
                r.kappa,
                r.diameter.mean,
                r.diameter.variance,
                r.diameter.second,
                r.height.mean,
                r.height.variance,
                r.height.second,
                r.crt_m1,
                r.crt_m2,
                r.ratio_m1(),
                r.ratio_m2(),
            ];
            let cells: Vec<String> = cells.iter().map(|&x| sig12(x)).collect();
            writeln!(out, "{},{},{},{},{}", self.class, self.weights, r.n, r.samples, cells.join(",")).expect("string write");
        }
        out
    }

    pub fn samples_csv(&self) -> String {
        let mut out = String::from("n,index,vertices,diameter,height\n");
        for r in &self.records {
            writeln!(out, "{},{},{},{},{}", r.n, r.index, r.n, sig12(r.diameter), sig12(r.height)).expect("string write");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailPoint {
    pub x: f64,
    pub survival: f64,
    pub in_fit: bool,
}

#[derive(Clone, Debug)]
pub struct TailReport {
    pub n: usize,
    pub diameters: Vec<f64>,
    pub points: Vec<TailPoint>,
    /// Least-squares `log P(D > x) ≈ slope · x²/n + intercept` over the upper quartile.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub median: f64,
}

/// Empirical survival `P(D > x)`.
pub fn survival(sorted: &[f64], x: f64) -> f64 {
    let above = sorted.len() - sorted.partition_point(|&d| d <= x);
    above as f64 / sorted.len() as f64
}

pub fn run_tail_experiment(cfg: &ExperimentConfig) -> Result<TailReport> {
    if let WeightModel::Exponential { .. } | WeightModel::Geometric { .. } = cfg.weights {
        return Err(Error::InvalidWeights("the tail fit needs unit or bounded weights".into()));
    }
    let tables = harness_tables(&cfg.spec)?;
    cfg.validate(&tables)?;
    let n = *cfg.ns.last().expect("validated nonempty");
    let mut diameters: Vec<f64> = sample_metrics(&tables, &cfg.weights, n, cfg.samples, cfg.seed, TAIL_EXPERIMENT)?.iter().map(|r| r.diameter).collect();
    let ordered = diameters.clone();
    diameters.sort_by(f64::total_cmp);
    let median = quantile(&diameters, 0.5);
    let q3 = quantile(&diameters, 0.75);
    let mut xs: Vec<f64> = diameters.clone();
    xs.dedup();
    let points: Vec<TailPoint> = xs
        .iter()
        .map(|&x| {
            let s = survival(&diameters, x);
            TailPoint { x, survival: s, in_fit: x >= q3 && s > 0.0 }
        })
        .collect();
    let fit: Vec<(f64, f64)> = points.iter().filter(|p| p.in_fit).map(|p| (p.x * p.x / n as f64, p.survival.ln())).collect();
    let (slope, intercept, r2) = if fit.len() >= 3 {
        let (fx, fy): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        crate::classes::linear_fit(&fx, &fy)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(TailReport { n, diameters: ordered, points, slope, intercept, r2, median })
}

impl TailReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("x,x2_over_n,survival,log_survival,in_fit\n");
        for p in &self.points {
            let ls = if p.survival > 0.0 { sig12(p.survival.ln()) } else { String::new() };
            writeln!(out, "{},{},{},{},{}", sig12(p.x), sig12(p.x * p.x / self.n as f64), sig12(p.survival), ls, p.in_fit as u8).expect("string write");
        }
        out
    }

    pub fn fit_report(&self) -> String {
        format!("n={} samples={} median={} slope={} intercept={} r2={}\n", self.n, self.diameters.len(), sig12(self.median), sig12(self.slope), sig12(self.intercept), sig12(self.r2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digit_strings() {
        assert_eq!(sig12(1.0 / 6.0), "0.166666666667");
        assert_eq!(sig12(18.0), "18");
        assert_eq!(sig12(8.0), "8");
        assert_eq!(sig12(-2.5), "-2.5");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(6.588457268119896), "6.58845726812");
        assert_eq!(sig12(1e-9), "1.00000000000e-9");
    }

    #[test]
    fn enumeration_rows() {
        let t = ClassTables::build(&ClassSpec::out(), 200).unwrap();
        let rows = run_enumeration_check(&t, &[5, 50, 200]).unwrap();
        assert_eq!(rows[0].exact, BigUint::from(67u32));
        let dist: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
        assert!(dist.windows(2).all(|w| w[1] < w[0]), "{rows:?}");
        let csv = enumeration_csv(&rows);
        assert!(csv.starts_with("n,exact,asymptotic,ratio\n5,67,"));
        assert!(run_enumeration_check(&ClassTables::build(&ClassSpec::bip(), 20).unwrap(), &[0]).is_err());
    }

    #[test]
    fn constants_for_the_two_classes() {
        let out = constants_json(&harness_tables(&ClassSpec::out()).unwrap(), &WeightModel::Unit).unwrap();
        assert_eq!(out["tau"], "0.166666666667");
        assert_eq!(out["mu"], "2.33333333333");
        assert_eq!(out["mu_source"], "formula");
        let bip = constants_json(&harness_tables(&ClassSpec::bip()).unwrap(), &WeightModel::Unit).unwrap();
        assert_eq!(bip["mu"], "2.36981851446");
        assert_eq!(bip["kappa"].as_str().unwrap()[..7].to_string(), "0.54156");
    }

    #[test]
    fn scaling_runs_are_reproducible() {
        let cfg = ExperimentConfig::new(ClassSpec::out(), WeightModel::Exponential { rate: 1.0 }, vec![30, 300], 40, 11);
        let cfg = ExperimentConfig { mu: Some(7.0 / 3.0), ..cfg };
        let a = run_scaling_experiment(&cfg).unwrap();
        let b = run_scaling_experiment(&cfg).unwrap();
        assert_eq!(a.summary_csv(), b.summary_csv());
        assert_eq!(a.samples_csv(), b.samples_csv());
        assert_eq!(a.rows.len(), 2);
        for r in &a.rows {
            let ratio = r.height.mean / r.diameter.mean;
            assert!((0.5..=1.0).contains(&ratio), "{ratio}");
        }
        let bad = ExperimentConfig::new(ClassSpec::bip(), WeightModel::Unit, vec![0], 1, 0);
        assert!(run_scaling_experiment(&bad).is_err());
    }

    #[test]
    fn unit_diameters_respect_the_path_bound() {
        let cfg = ExperimentConfig::new(ClassSpec::out(), WeightModel::Unit, vec![200], 200, 3);
        let r = run_tail_experiment(&cfg).unwrap();
        assert!(r.diameters.iter().all(|&d| d <= 199.0));
        let mut s = r.diameters.clone();
        s.sort_by(f64::total_cmp);
        assert!(survival(&s, 4.0 * r.median) < survival(&s, r.median));
        assert!(r.slope < 0.0);
        assert!(r.csv().starts_with("x,x2_over_n,survival,log_survival,in_fit\n"));
        let exp = ExperimentConfig::new(ClassSpec::out(), WeightModel::Exponential { rate: 1.0 }, vec![200], 5, 3);
        assert!(run_tail_experiment(&exp).is_err());
    }
}
