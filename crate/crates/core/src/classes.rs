//! Subclasses of outerplanar maps given by a face-degree set or a raw table
//! of block counts, and the analytic constants derived from them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::series::{self, eval_at, TruncatedSeries};

/// Allowed inner-face degrees of the blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FaceSet {
    /// Every degree `>= 3`.
    All,
    /// Every even degree `>= 4`.
    Even,
    /// An explicit finite set, sorted and deduplicated.
    Finite(Vec<u32>),
    /// `{first, first + step, first + 2 step, ...}`.
    Progression { first: u32, step: u32 },
}

/// The same set seen through polygon arities: a polygon with `L` children has
/// an inner face of degree `L + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockLaw {
    Finite(Vec<u32>),
    Progression { first: u32, step: u32 },
}

impl FaceSet {
    /// Folds `All`/`Even`-shaped progressions and sorts finite sets.
    pub fn normalized(&self) -> FaceSet {
        match self {
            FaceSet::Progression { first: 3, step: 1 } => FaceSet::All,
            FaceSet::Progression { first: 4, step: 2 } => FaceSet::Even,
            FaceSet::Finite(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                FaceSet::Finite(v)
            }
            other => other.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FaceSet::All | FaceSet::Even => Ok(()),
            FaceSet::Finite(v) if v.is_empty() => Err(Error::InvalidClass("empty face-degree set".into())),
            FaceSet::Finite(v) => match v.iter().find(|&&d| d < 3) {
                Some(d) => Err(Error::InvalidClass(format!("face degree {d} is below 3"))),
                None => Ok(()),
            },
            FaceSet::Progression { first, step } => {
                if *first < 3 {
                    Err(Error::InvalidClass(format!("face degree {first} is below 3")))
                } else if *step == 0 {
                    Err(Error::InvalidClass("progression step must be positive".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn contains(&self, degree: u32) -> bool {
        match self {
            FaceSet::All => degree >= 3,
            FaceSet::Even => degree >= 4 && degree % 2 == 0,
            FaceSet::Finite(v) => v.contains(&degree),
            FaceSet::Progression { first, step } => degree >= *first && (degree - first) % step == 0,
        }
    }

    pub fn block_law(&self) -> BlockLaw {
        match self.normalized() {
            FaceSet::All => BlockLaw::Progression { first: 2, step: 1 },
            FaceSet::Even => BlockLaw::Progression { first: 3, step: 2 },
            FaceSet::Finite(v) => BlockLaw::Finite(v.iter().map(|d| d - 1).collect()),
            FaceSet::Progression { first, step } => BlockLaw::Progression { first: first - 1, step },
        }
    }

    pub fn id(&self) -> String {
        match self.normalized() {
            FaceSet::All => "out".into(),
            FaceSet::Even => "bip".into(),
            FaceSet::Finite(v) if v == [3] => "tri".into(),
            FaceSet::Finite(v) => {
                let parts: Vec<String> = v.iter().map(u32::to_string).collect();
                format!("faces:{{{}}}", parts.join(","))
            }
            FaceSet::Progression { first, step } => format!("faces:{{{},{},...}}", first, first + step),
        }
    }
}

impl BlockLaw {
    pub fn allows(&self, arity: u32) -> bool {
        match self {
            BlockLaw::Finite(v) => v.contains(&arity),
            BlockLaw::Progression { first, step } => arity >= *first && (arity - first) % step == 0,
        }
    }

    /// Highest power of the block variable the online solvers keep.
    pub fn max_tracked_power(&self) -> usize {
        match self {
            BlockLaw::Finite(v) => *v.iter().max().expect("nonempty") as usize,
            BlockLaw::Progression { first, step } => (*first).max(if *step == 1 { 2 } else { *step }) as usize,
        }
    }

    /// `(B, B', B'')` at `u`, or `None` outside the domain of convergence.
    pub fn eval(&self, u: &Real) -> Option<(Real, Real, Real)> {
        match self {
            BlockLaw::Finite(v) => {
                let (mut b, mut b1, mut b2) = (Real::zero(), Real::zero(), Real::zero());
                for &l in v {
                    let l = l as usize;
                    let lr = Real::from_u64(l as u64);
                    b = b + u.powi(l);
                    b1 = b1 + &lr * u.powi(l - 1);
                    if l >= 2 {
                        b2 = b2 + &lr * Real::from_u64(l as u64 - 1) * u.powi(l - 2);
                    }
                }
                Some((b, b1, b2))
            }
            BlockLaw::Progression { first, step } => {
                let (a, p) = (*first as usize, *step as usize);
                let up = u.powi(p);
                let d = Real::one() - &up;
                if !d.is_positive() {
                    return None;
                }
                let d1 = Real::one() / &d;
                let d2 = &d1 * &d1;
                let d3 = &d2 * &d1;
                let (ar, pr) = (Real::from_u64(a as u64), Real::from_u64(p as u64));
                let b = u.powi(a) * &d1;
                let b1 = &ar * u.powi(a - 1) * &d1 + &pr * u.powi(a + p - 1) * &d2;
                let mut b2 = &ar * &pr * u.powi(a + p - 2) * &d2
                    + &pr * Real::from_u64((a + p - 1) as u64) * u.powi(a + p - 2) * &d2
                    + Real::from_u64(2 * (p * p) as u64) * u.powi(a + 2 * p - 2) * &d3;
                if a >= 2 {
                    b2 = b2 + &ar * Real::from_u64(a as u64 - 1) * u.powi(a - 2) * &d1;
                }
                Some((b, b1, b2))
            }
        }
    }

    /// `B(u)` and `B'(u)` in double precision; infinite outside the domain.
    pub fn eval_f64(&self, u: f64) -> (f64, f64) {
        match self {
            BlockLaw::Finite(v) => v.iter().fold((0.0, 0.0), |(b, b1), &l| {
                (b + u.powi(l as i32), b1 + l as f64 * u.powi(l as i32 - 1))
            }),
            BlockLaw::Progression { first, step } => {
                let (a, p) = (*first as i32, *step as i32);
                let d = 1.0 - u.powi(p);
                if d <= 0.0 {
                    return (f64::INFINITY, f64::INFINITY);
                }
                (u.powi(a) / d, a as f64 * u.powi(a - 1) / d + p as f64 * u.powi(a + p - 1) / (d * d))
            }
        }
    }
}

/// A class of outerplanar maps, named by its allowed blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassSpec {
    Faces(FaceSet),
    /// Block counts `c_0 = 0, c_1, c_2, ...` read from a file.
    Table { path: String, counts: Vec<BigUint> },
}

impl ClassSpec {
    pub fn out() -> Self {
        ClassSpec::Faces(FaceSet::All)
    }

    pub fn bip() -> Self {
        ClassSpec::Faces(FaceSet::Even)
    }

    pub fn tri() -> Self {
        ClassSpec::Faces(FaceSet::Finite(vec![3]))
    }

    pub fn faces(set: FaceSet) -> Result<Self> {
        set.validate()?;
        Ok(ClassSpec::Faces(set.normalized()))
    }

    /// Raw block counts starting at `c_1`.
    pub fn from_counts(path: impl Into<String>, c_from_one: Vec<BigUint>) -> Result<Self> {
        if c_from_one.first().map_or(true, Zero::is_zero) {
            return Err(Error::InvalidClass("raw table must start with c_1 >= 1".into()));
        }
        let mut counts = vec![BigUint::zero()];
        counts.extend(c_from_one);
        Ok(ClassSpec::Table { path: path.into(), counts })
    }

    pub fn id(&self) -> String {
        match self {
            ClassSpec::Faces(f) => f.id(),
            ClassSpec::Table { path, .. } => format!("table:{path}"),
        }
    }

    pub fn face_set(&self) -> Option<&FaceSet> {
        match self {
            ClassSpec::Faces(f) => Some(f),
            ClassSpec::Table { .. } => None,
        }
    }

    pub fn block_law(&self) -> Option<BlockLaw> {
        self.face_set().map(FaceSet::block_law)
    }

    /// Largest order the class can be tabulated to.
    pub fn max_order(&self) -> usize {
        match self {
            ClassSpec::Faces(_) => usize::MAX,
            ClassSpec::Table { counts, .. } => counts.len() - 1,
        }
    }

    pub fn dissection_counts(&self, order: usize) -> Result<Vec<BigUint>> {
        match self {
            ClassSpec::Faces(f) => Ok(series::dissection_counts(&f.block_law(), order)),
            ClassSpec::Table { counts, .. } => {
                if counts.len() <= order {
                    return Err(Error::OrderTooSmall { have: counts.len() - 1, need: order });
                }
                Ok(counts[..=order].to_vec())
            }
        }
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for ClassSpec {
    type Err = Error;

    /// `out | bip | tri | faces:{3,5} | faces:{4,7,...} | table:<path>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "out" => return Ok(ClassSpec::out()),
            "bip" => return Ok(ClassSpec::bip()),
            "tri" => return Ok(ClassSpec::tri()),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("table:") {
            let text = std::fs::read_to_string(path)?;
            return ClassSpec::from_counts(path, parse_count_file(&text)?);
        }
        let body = s
            .strip_prefix("faces:")
            .and_then(|b| b.strip_prefix('{'))
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| Error::InvalidClass(format!("unknown class `{s}`")))?;
        let mut items: Vec<&str> = body.split(',').map(str::trim).collect();
        let open = items.last() == Some(&"...");
        if open {
            items.pop();
        }
        let degrees: Vec<u32> = items
            .iter()
            .map(|d| d.parse().map_err(|_| Error::InvalidClass(format!("bad face degree `{d}`"))))
            .collect::<Result<_>>()?;
        let set = if open {
            match degrees.as_slice() {
                [first] => FaceSet::Progression { first: *first, step: 1 },
                [first, second] if second > first => FaceSet::Progression { first: *first, step: second - first },
                _ => return Err(Error::InvalidClass("an open set needs one or two increasing leading degrees".into())),
            }
        } else {
            FaceSet::Finite(degrees)
        };
        ClassSpec::faces(set)
    }
}

/// Either a versioned series table (its `z^0` entry is dropped) or bare
/// integers `c_1, c_2, ...` one per line; `#` starts a comment.
pub fn parse_count_file(text: &str) -> Result<Vec<BigUint>> {
    if text.starts_with("# outerplanar-series") {
        let (_, f) = series::read_table(text)?;
        return Ok(f.to_biguints()?.into_iter().skip(1).collect());
    }
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<BigUint>().map_err(|e| Error::Parse(format!("bad count `{l}`: {e}"))))
        .collect()
}

/// Value and first two derivatives of the block series at a point.
#[derive(Clone, Debug)]
pub struct CPoint {
    pub c: Real,
    pub c1: Real,
    pub c2: Real,
}

/// Constants at the critical point `ψ(τ) = 1`.
#[derive(Clone, Debug)]
pub struct Analytic {
    pub tau: Real,
    /// `C*(τ)`.
    pub w: Real,
    /// `C*'(τ)`.
    pub c1: Real,
    pub phi: Real,
    pub phi2: Real,
    pub sigma2: Real,
}

impl Analytic {
    /// `φ(τ)/τ`, the exponential growth of the map counts.
    pub fn growth(&self) -> Real {
        &self.phi / &self.tau
    }
}

/// Evaluates `C*`, `φ` and `ψ` for a class.
enum Evaluator {
    Closed(BlockLaw),
    Series { c: TruncatedSeries, dc: TruncatedSeries, limit: Real },
}

impl Evaluator {
    fn c_at(&self, t: &Real) -> Option<CPoint> {
        match self {
            Evaluator::Closed(law) => newton_c(law, t),
            Evaluator::Series { c, dc, limit } => {
                if t >= limit {
                    return None;
                }
                let e = eval_at(c, t).ok()?;
                let d = eval_at(dc, t).ok()?;
                let vc = e.value.to_f64();
                if e.tail_bound > 1e-14 * vc || d.tail_bound > 1e-14 * d.value.to_f64() || vc >= 1.0 {
                    return None;
                }
                // Curvature is not needed on this route: second derivatives use differences.
                Some(CPoint { c: e.value, c1: d.value, c2: Real::zero() })
            }
        }
    }

    fn psi(&self, t: &Real) -> Option<Real> {
        let p = self.c_at(t)?;
        Some(t * &p.c1 / (Real::one() - &p.c))
    }

    fn phi(&self, t: &Real) -> Option<Real> {
        let p = self.c_at(t)?;
        Some(Real::one() / (Real::one() - &p.c))
    }
}

/// Solves `C = t + B(C)` by Newton's method from 0. The iteration increases
/// monotonically to the smallest root; it fails once `B'(C) >= 1`.
fn newton_c(law: &BlockLaw, t: &Real) -> Option<CPoint> {
    let eps = Real::from_f64(1e-72);
    let mut c = Real::zero();
    for _ in 0..4000 {
        let (b, b1, _) = law.eval(&c)?;
        let slope = Real::one() - &b1;
        if !slope.is_positive() {
            return None;
        }
        let g = &c - t - &b;
        let step = &g / &slope;
        let next = &c - &step;
        let done = step.abs() <= &eps * &next.abs() || next <= c;
        c = next;
        if done {
            let (_, b1, b2) = law.eval(&c)?;
            let slope = Real::one() - &b1;
            if !slope.is_positive() {
                return None;
            }
            let c1 = Real::one() / &slope;
            let c2 = &b2 * &c1 * &c1 * &c1;
            return Some(CPoint { c, c1, c2 });
        }
    }
    None
}

/// Central difference with one Richardson step.
fn richardson(f: &dyn Fn(&Real) -> Option<Real>, x: &Real, h: &Real, second: bool) -> Option<Real> {
    let diff = |h: &Real| -> Option<Real> {
        let up = f(&(x + h))?;
        let down = f(&(x - h))?;
        if second {
            let mid = f(x)?;
            Some((up - Real::from_u64(2) * mid + down) / (h * h))
        } else {
            Some((up - down) / (Real::from_u64(2) * h))
        }
    };
    let d1 = diff(h)?;
    let d2 = diff(&(h / Real::from_u64(2)))?;
    Some((Real::from_u64(4) * d2 - d1) / Real::from_u64(3))
}

/// Domb-Sykes estimate of the radius of convergence from the tail ratios.
pub fn ratio_radius(c: &[BigUint]) -> Option<f64> {
    let n = c.len() - 1;
    let logs: Vec<Option<f64>> = c.iter().map(|x| if x.is_zero() { None } else { Some(Real::from_biguint(x).ln().to_f64()) }).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in (n / 2).max(2)..=n {
        if let (Some(a), Some(b)) = (logs[k - 1], logs[k]) {
            xs.push(1.0 / k as f64);
            ys.push((b - a).exp());
        }
    }
    if xs.len() < 4 {
        return None;
    }
    let (_, intercept, _) = linear_fit(&xs, &ys);
    (intercept > 0.0).then(|| 1.0 / intercept)
}

/// Least squares `y = a x + b`; returns `(a, b, R²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (a, b, r2)
}

/// Counting tables and derived constants of a class.
#[derive(Clone, Debug)]
pub struct ClassTables {
    pub spec: ClassSpec,
    pub order: usize,
    /// Block counts `c_k`.
    pub c: Vec<BigUint>,
    /// R-structure counts `ω_k`.
    pub r: Vec<BigUint>,
    /// Map counts `m_n`.
    pub m: Vec<BigUint>,
    pub span: usize,
    pub nu_exceeds_one: bool,
    analytic: Option<Analytic>,
    subcritical: Option<String>,
    /// `P(ξ = k)` for `k < xi.len()`.
    pub xi: Vec<f64>,
    /// Estimated mass of `ξ` beyond the table.
    pub xi_tail: f64,
    /// `c_k τ^k`, at least as long as `xi`.
    pub c_scaled: Vec<f64>,
}

const XI_TAIL: f64 = 1e-15;

impl ClassTables {
    pub fn build(spec: &ClassSpec, order: usize) -> Result<Self> {
        if let Some(f) = spec.face_set() {
            f.validate()?;
        }
        if order < 1 {
            return Err(Error::Domain("table order must be at least 1".into()));
        }
        if order > spec.max_order() {
            return Err(Error::OrderTooSmall { have: spec.max_order(), need: order });
        }
        let c = spec.dissection_counts(order)?;
        let r = quasi_inverse_u(&c);
        let m = match spec.block_law() {
            Some(law) => series::map_counts(&law, order),
            None => series::solve_map_counts(&TruncatedSeries::from_biguints(&r), order)?.to_biguints()?,
        };
        let span = r.iter().enumerate().skip(1).filter(|(_, x)| !x.is_zero()).fold(0usize, |g, (k, _)| g.gcd(&k));

        // Raw tables are evaluated with every count they carry, not just `order`.
        let full = match spec {
            ClassSpec::Table { counts, .. } => counts.clone(),
            ClassSpec::Faces(_) => Vec::new(),
        };
        let evaluator = match spec.block_law() {
            Some(law) => Evaluator::Closed(law),
            None => {
                let rho = ratio_radius(&full).ok_or_else(|| Error::InvalidClass("raw table too short to estimate its radius".into()))?;
                let cs = TruncatedSeries::from_biguints(&full);
                let dc = derivative(&cs);
                Evaluator::Series { c: cs, dc, limit: Real::from_f64(rho * (1.0 - 1e-3)) }
            }
        };
        let mut tables = ClassTables {
            spec: spec.clone(),
            order,
            c,
            r,
            m,
            span: span.max(1),
            nu_exceeds_one: false,
            analytic: None,
            subcritical: None,
            xi: Vec::new(),
            xi_tail: 1.0,
            c_scaled: Vec::new(),
        };
        match solve_tau(&evaluator) {
            Ok(tau) => {
                let analytic = finish_analytic(&evaluator, tau)?;
                tables.nu_exceeds_one = true;
                tables.fill_xi(&analytic, &full)?;
                tables.analytic = Some(analytic);
            }
            Err(Error::Subcritical(why)) => tables.subcritical = Some(why),
            Err(e) => return Err(e),
        }
        Ok(tables)
    }

    pub fn analytic(&self) -> Result<&Analytic> {
        self.analytic.as_ref().ok_or_else(|| {
            Error::Subcritical(self.subcritical.clone().unwrap_or_else(|| "no critical point".into()))
        })
    }

    pub fn tau(&self) -> Result<f64> {
        Ok(self.analytic()?.tau.to_f64())
    }

    /// `σ² = τ ψ'(τ)`.
    pub fn sigma_squared(&self) -> Result<Real> {
        Ok(self.analytic()?.sigma2.clone())
    }

    /// `ω_k τ^k / φ(τ)`, exact counts when `k` is tabulated.
    pub fn offspring_pmf(&self, k: usize) -> Result<Real> {
        let a = self.analytic()?;
        if k <= self.order {
            Ok(Real::from_biguint(&self.r[k]) * a.tau.powi(k) / &a.phi)
        } else {
            Ok(Real::from_f64(self.xi.get(k).copied().unwrap_or(0.0)))
        }
    }

    /// `s (φ/(2π φ''))^{1/2} (τ/φ)^{-n} n^{-3/2}`.
    pub fn asymptotic_count(&self, n: usize) -> Result<Real> {
        let a = self.analytic()?;
        if n == 0 || (n - 1) % self.span != 0 {
            return Err(Error::Infeasible { n, reason: format!("sizes must be 1 mod span {}", self.span) });
        }
        let two_pi = Real::from_u64(2) * Real::pi();
        let pre = Real::from_u64(self.span as u64) * (&a.phi / (two_pi * &a.phi2)).sqrt();
        let nn = Real::from_u64(n as u64);
        let decay = Real::one() / (&nn * nn.sqrt());
        Ok(pre * a.growth().powi(n) * decay)
    }

    /// Prefactor of the asymptotic count.
    pub fn prefactor(&self) -> Result<Real> {
        let a = self.analytic()?;
        let two_pi = Real::from_u64(2) * Real::pi();
        Ok(Real::from_u64(self.span as u64) * (&a.phi / (two_pi * &a.phi2)).sqrt())
    }

    /// `m_n` as an exact integer.
    pub fn map_count(&self, n: usize) -> Result<&BigUint> {
        self.m.get(n).ok_or(Error::OrderTooSmall { have: self.order, need: n })
    }

    /// Rejects sizes without objects.
    pub fn check_feasible(&self, n: usize) -> Result<()> {
        if n == 0 || (n - 1) % self.span != 0 {
            return Err(Error::Infeasible { n, reason: format!("sizes must be 1 mod span {}", self.span) });
        }
        if n <= self.order && self.m[n].is_zero() {
            return Err(Error::Infeasible { n, reason: "the class has no map of this size".into() });
        }
        Ok(())
    }

    fn fill_xi(&mut self, a: &Analytic, full: &[BigUint]) -> Result<()> {
        let tau = a.tau.to_f64();
        let phi = a.phi.to_f64();
        match self.spec.block_law() {
            Some(law) => {
                let mut k = 256;
                loop {
                    let c = series::scaled_dissection_counts(&law, k, tau);
                    let r = quasi_inverse_f(&c);
                    let xi: Vec<f64> = r.iter().map(|x| x / phi).collect();
                    let tail = geometric_tail(&xi);
                    if tail < XI_TAIL || k >= 1 << 16 {
                        self.xi = trim_tail(xi);
                        self.xi_tail = tail;
                        self.c_scaled = c;
                        return Ok(());
                    }
                    k *= 2;
                }
            }
            None => {
                let t = &a.tau;
                let r = quasi_inverse_u(full);
                let mut power = Real::one();
                let mut c = Vec::with_capacity(full.len());
                let mut xi = Vec::with_capacity(full.len());
                for k in 0..full.len() {
                    c.push((Real::from_biguint(&full[k]) * &power).to_f64());
                    xi.push((Real::from_biguint(&r[k]) * &power / &a.phi).to_f64());
                    power = &power * t;
                }
                self.xi_tail = geometric_tail(&xi);
                self.xi = trim_tail(xi);
                self.c_scaled = c;
                Ok(())
            }
        }
    }

    /// `Σ k P(ξ=k)` and `Σ k² P(ξ=k) - 1` over the table.
    pub fn xi_moments(&self) -> (f64, f64) {
        let mean: f64 = self.xi.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let second: f64 = self.xi.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
        (mean, second - mean * mean)
    }
}

fn trim_tail(mut xi: Vec<f64>) -> Vec<f64> {
    while xi.len() > 1 && xi.last() == Some(&0.0) {
        xi.pop();
    }
    xi
}

/// Tail mass past the end of a decaying table from its last few ratios.
fn geometric_tail(p: &[f64]) -> f64 {
    let nz: Vec<(usize, f64)> = p.iter().copied().enumerate().filter(|(_, x)| *x > 0.0).collect();
    if nz.len() < 8 {
        return 0.0;
    }
    let (k2, a2) = nz[nz.len() - 1];
    let (k1, a1) = nz[nz.len() - 8];
    let q = ((a2 / a1).ln() / (k2 - k1) as f64).exp();
    if q >= 1.0 {
        return 1.0;
    }
    a2 * q / (1.0 - q)
}

fn quasi_inverse_u(c: &[BigUint]) -> Vec<BigUint> {
    let mut g = vec![BigUint::zero(); c.len()];
    g[0] = BigUint::from(1u32);
    for k in 1..c.len() {
        let mut acc = BigUint::zero();
        for i in 1..=k {
            if !c[i].is_zero() && !g[k - i].is_zero() {
                acc += &c[i] * &g[k - i];
            }
        }
        g[k] = acc;
    }
    g
}

/// `1/(1 - f)` in floating point.
pub fn quasi_inverse_f(c: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; c.len()];
    g[0] = 1.0;
    for k in 1..c.len() {
        g[k] = (1..=k).map(|i| c[i] * g[k - i]).sum();
    }
    g
}

fn derivative(f: &TruncatedSeries) -> TruncatedSeries {
    let n = f.order();
    let mut out: Vec<_> = (1..=n).map(|k| f.coeff(k) * k).collect();
    if out.is_empty() {
        out.push(Default::default());
    }
    TruncatedSeries::from_coeffs(out)
}

/// Finds `τ` with `ψ(τ) = 1` by doubling then bisection on `ψ(t) < 1`.
fn solve_tau(ev: &Evaluator) -> Result<Real> {
    let below = |t: &Real| ev.psi(t).is_some_and(|p| p < Real::one());
    let mut lo = Real::zero();
    let mut hi = Real::ratio(1, 64);
    while below(&hi) {
        lo = hi.clone();
        hi = &hi * Real::from_u64(2);
        if hi > Real::from_u64(64) {
            return Err(Error::Subcritical("ψ stays below 1".into()));
        }
    }
    if ev.c_at(&hi).is_none() {
        // Past the domain: check that ψ reaches 1 before the singularity.
        let mut a = lo.clone();
        let mut b = hi.clone();
        for _ in 0..200 {
            let mid = (&a + &b) / Real::from_u64(2);
            if ev.c_at(&mid).is_some() {
                a = mid;
            } else {
                b = mid;
            }
        }
        if ev.psi(&a).is_some_and(|p| p < Real::one()) {
            return Err(Error::Subcritical(format!(
                "ψ stays below 1 up to t = {:.9} (ψ = {:.6})",
                a.to_f64(),
                ev.psi(&a).map(|p| p.to_f64()).unwrap_or(f64::NAN)
            )));
        }
        hi = a;
    }
    for _ in 0..140 {
        let mid = (&lo + &hi) / Real::from_u64(2);
        if below(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = (&lo + &hi) / Real::from_u64(2);
    let mut prev = Real::zero();
    for i in 1..=32u64 {
        let t = &tau * Real::ratio(i as i64, 32);
        let p = ev.psi(&t).ok_or_else(|| Error::Domain("ψ undefined below τ".into()))?;
        if p <= prev {
            return Err(Error::Domain("ψ is not increasing below τ".into()));
        }
        prev = p;
    }
    Ok(tau)
}

fn finish_analytic(ev: &Evaluator, tau: Real) -> Result<Analytic> {
    let p = ev.c_at(&tau).ok_or_else(|| Error::Domain("series undefined at τ".into()))?;
    let one = Real::one();
    let om = &one - &p.c;
    let phi = &one / &om;
    let (phi2, sigma2) = match ev {
        Evaluator::Closed(_) => {
            let phi1 = &p.c1 / (&om * &om);
            let phi2 = &p.c2 / (&om * &om) + Real::from_u64(2) * &p.c1 * &p.c1 / (&om * &om * &om);
            let psi1 = &phi1 / &phi + &tau * &phi2 / &phi - &tau * &phi1 * &phi1 / (&phi * &phi);
            (phi2, &tau * psi1)
        }
        Evaluator::Series { .. } => {
            let h = &tau * Real::from_f64(1e-6);
            let psi1 = richardson(&|t| ev.psi(t), &tau, &h, false).ok_or_else(|| Error::Domain("ψ' undefined near τ".into()))?;
            let phi2 = richardson(&|t| ev.phi(t), &tau, &h, true).ok_or_else(|| Error::Domain("φ'' undefined near τ".into()))?;
            (phi2, &tau * psi1)
        }
    };
    Ok(Analytic { tau, w: p.c, c1: p.c1, phi, phi2, sigma2 })
}

/// Exact integer `m_n` as a double, for small tables in tests and reports.
pub fn to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn parses_class_names() {
        assert_eq!("out".parse::<ClassSpec>().unwrap(), ClassSpec::out());
        assert_eq!("bip".parse::<ClassSpec>().unwrap(), ClassSpec::bip());
        assert_eq!("faces:{3}".parse::<ClassSpec>().unwrap(), ClassSpec::tri());
        assert_eq!("faces:{5,3}".parse::<ClassSpec>().unwrap().id(), "faces:{3,5}");
        assert_eq!("faces:{4,6,...}".parse::<ClassSpec>().unwrap(), ClassSpec::bip());
        assert_eq!("faces:{3,...}".parse::<ClassSpec>().unwrap(), ClassSpec::out());
        assert_eq!("faces:{4,7,...}".parse::<ClassSpec>().unwrap().id(), "faces:{4,7,...}");
        assert!("faces:{2,5}".parse::<ClassSpec>().is_err());
        assert!("faces:{}".parse::<ClassSpec>().is_err());
        assert!("cubic".parse::<ClassSpec>().is_err());
    }

    #[test]
    fn block_law_matches_face_membership() {
        for set in [FaceSet::All, FaceSet::Even, FaceSet::Finite(vec![3, 6]), FaceSet::Progression { first: 5, step: 3 }] {
            let law = set.block_law();
            for d in 3..40 {
                assert_eq!(law.allows(d - 1), set.contains(d), "{set:?} d={d}");
            }
        }
    }

    #[test]
    fn unrestricted_constants() {
        let t = ClassTables::build(&ClassSpec::out(), 64).unwrap();
        let a = t.analytic().unwrap();
        assert!(close(a.tau.to_f64(), 1.0 / 6.0, 1e-15));
        assert!((&a.tau - Real::ratio(1, 6)).abs() < Real::from_f64(1e-30));
        assert!(close(a.w.to_f64(), 0.25, 1e-15));
        assert!(close(a.phi.to_f64(), 4.0 / 3.0, 1e-15));
        assert!(close(a.growth().to_f64(), 8.0, 1e-13));
        assert!(close(a.sigma2.to_f64(), 18.0, 1e-12));
        assert_eq!(t.span, 1);
        assert!(t.nu_exceeds_one);
    }

    #[test]
    fn bipartite_constants() {
        let t = ClassTables::build(&ClassSpec::bip(), 64).unwrap();
        let a = t.analytic().unwrap();
        let s3 = 3f64.sqrt();
        assert!(close(a.tau.to_f64(), -2.0 + 4.0 * s3 / 3.0, 1e-14));
        assert!(close(a.w.to_f64(), (s3 - 1.0) / 2.0, 1e-14));
        assert!(close(a.sigma2.to_f64(), 9.0 * (s3 - 1.0), 1e-12));
        assert!(close(a.growth().to_f64(), 1.0 / (3.0 * s3 - 5.0), 1e-12));
    }

    #[test]
    fn triangulation_constants() {
        let t = ClassTables::build(&ClassSpec::tri(), 64).unwrap();
        let a = t.analytic().unwrap();
        assert!(close(a.w.to_f64(), 1.0 / 3.0, 1e-14));
        assert!(close(a.tau.to_f64(), 2.0 / 9.0, 1e-14));
        assert!(close(a.growth().to_f64(), 27.0 / 4.0, 1e-12));
    }

    #[test]
    fn offspring_law_unrestricted() {
        let t = ClassTables::build(&ClassSpec::out(), 64).unwrap();
        assert!(close(t.offspring_pmf(0).unwrap().to_f64(), 0.75, 1e-15));
        assert!(close(t.offspring_pmf(1).unwrap().to_f64(), 1.0 / 8.0, 1e-15));
        assert!(close(t.offspring_pmf(2).unwrap().to_f64(), 1.0 / 24.0, 1e-15));
        let (mean, var) = t.xi_moments();
        assert!(close(mean, 1.0, 1e-9), "mean {mean}");
        assert!(close(var, 18.0, 1e-6), "var {var}");
        assert!(t.xi_tail < 1e-15);
        let total: f64 = t.xi.iter().sum();
        assert!(close(total, 1.0, 1e-12));
        for k in 0..=64 {
            let exact = t.offspring_pmf(k).unwrap().to_f64();
            assert!((t.xi[k] - exact).abs() <= 1e-12 * exact, "k={k}");
        }
    }

    #[test]
    fn offspring_law_other_classes() {
        for spec in [ClassSpec::bip(), ClassSpec::tri(), "faces:{4,7,...}".parse().unwrap(), "faces:{3,5}".parse().unwrap()] {
            let t = ClassTables::build(&spec, 32).unwrap();
            let (mean, var) = t.xi_moments();
            let s2 = t.sigma_squared().unwrap().to_f64();
            assert!(close(mean, 1.0, 1e-9), "{spec} mean {mean}");
            assert!(close(var, s2, 1e-6 * s2.max(1.0)), "{spec} var {var} vs {s2}");
        }
    }

    #[test]
    fn span_and_support() {
        for spec in [ClassSpec::out(), ClassSpec::bip(), ClassSpec::tri()] {
            let t = ClassTables::build(&spec, 200).unwrap();
            assert_eq!(t.span, 1);
            for n in 1..=200 {
                assert!(!t.m[n].is_zero(), "{spec} n={n}");
            }
            assert!(t.check_feasible(0).is_err());
        }
    }

    #[test]
    fn prefactors() {
        let out = ClassTables::build(&ClassSpec::out(), 16).unwrap();
        let want = 1.0 / (36.0 * std::f64::consts::PI.sqrt());
        assert!(close(out.prefactor().unwrap().to_f64(), want, 1e-13));
        let bip = ClassTables::build(&ClassSpec::bip(), 16).unwrap();
        let s3 = 3f64.sqrt();
        let want = (2.0 * s3 - 3.0) * 2f64.sqrt() / (9.0 * (std::f64::consts::PI * (s3 - 1.0)).sqrt());
        assert!(close(bip.prefactor().unwrap().to_f64(), want, 1e-13));
    }

    #[test]
    fn raw_table_reproduces_face_class() {
        let c = series::dissection_counts(&FaceSet::All.block_law(), 1200);
        let spec = ClassSpec::from_counts("unrestricted", c[1..].to_vec()).unwrap();
        let t = ClassTables::build(&spec, 120).unwrap();
        let a = t.analytic().unwrap();
        assert!(close(a.tau.to_f64(), 1.0 / 6.0, 1e-9));
        assert!(close(a.sigma2.to_f64(), 18.0, 1e-6));
        assert!(close(a.phi2.to_f64(), ClassTables::build(&ClassSpec::out(), 8).unwrap().analytic().unwrap().phi2.to_f64(), 1e-6));
        let face = ClassTables::build(&ClassSpec::out(), 120).unwrap();
        assert_eq!(t.m, face.m);
    }

    #[test]
    fn raw_table_subcritical() {
        let mut c = vec![BigUint::from(1u32)];
        for k in 2..=400u32 {
            let v = (3f64.powi(k as i32) / (k as f64).powi(4)).round();
            c.push(big_from_f64(v));
        }
        let spec = ClassSpec::from_counts("steep", c).unwrap();
        let t = ClassTables::build(&spec, 400).unwrap();
        assert!(!t.nu_exceeds_one);
        assert!(matches!(t.analytic(), Err(Error::Subcritical(_))));
        assert!(matches!(t.asymptotic_count(5), Err(Error::Subcritical(_))));
        assert_eq!(to_f64(&t.m[2]), 1.0);
    }

    fn big_from_f64(v: f64) -> BigUint {
        use num_traits::FromPrimitive;
        BigUint::from_f64(v).unwrap()
    }
}
