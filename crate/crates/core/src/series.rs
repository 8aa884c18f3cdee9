//! Truncated power series with exact integer coefficients, and the online
//! solvers for the dissection and map counting series.
//!
//! Block sums are never expanded term by term over the face-degree set. A
//! progression law uses `B(u) = u^a / (1 - u^p)` through the linear
//! recursion `W = Y^a + Y^p W`, which keeps every coefficient nonnegative.

use std::fmt::Write as _;
use std::ops::{AddAssign, Mul};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::classes::BlockLaw;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    coeffs: Vec<BigInt>,
}

impl TruncatedSeries {
    /// Coefficients of `z^0 ..= z^N`; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        TruncatedSeries { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn from_biguints(coeffs: &[BigUint]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|c| BigInt::from(c.clone())).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::from_coeffs(vec![BigInt::zero(); order + 1])
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// The series `z`; at order 0 this is the zero series.
    pub fn z(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = BigInt::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &BigInt {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Fails on a negative coefficient.
    pub fn to_biguints(&self) -> Result<Vec<BigUint>> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                c.to_biguint()
                    .ok_or_else(|| Error::Domain(format!("coefficient {k} is negative")))
            })
            .collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order());
        Self::from_coeffs(self.coeffs[..=order].to_vec())
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self::from_coeffs(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self::from_coeffs(
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn neg(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| -a).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.order();
        let mut out = vec![BigInt::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(Self::from_coeffs(out))
    }

    /// `1 / (1 - f)` for `f` with zero constant term.
    pub fn quasi_inverse(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstant);
        }
        let n = self.order();
        let mut g = vec![BigInt::zero(); n + 1];
        g[0] = BigInt::one();
        for k in 1..=n {
            let mut acc = BigInt::zero();
            for i in 1..=k {
                if !self.coeffs[i].is_zero() {
                    acc += &self.coeffs[i] * &g[k - i];
                }
            }
            g[k] = acc;
        }
        Ok(Self::from_coeffs(g))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| c.sign() != Sign::Minus)
    }
}

/// Value of a truncated series together with an estimate of the omitted tail.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Real,
    /// Geometric bound on the omitted tail relative to the last nonzero term.
    pub tail_bound: f64,
}

/// `Σ f_k t^k` at high precision.
///
/// The tail is bounded by fitting a geometric ratio to the last nonzero
/// terms. A ratio at or above one is reported as divergence.
pub fn eval_at(f: &TruncatedSeries, t: &Real) -> Result<Evaluation> {
    if t < &Real::zero() {
        return Err(Error::Domain("evaluation point must be nonnegative".into()));
    }
    let n = f.order();
    let mut value = Real::zero();
    let mut power = Real::one();
    let mut last: Vec<(usize, Real)> = Vec::new();
    for k in 0..=n {
        let c = &f.coeffs[k];
        if !c.is_zero() {
            let mag = Real::from_biguint(c.magnitude());
            let term = &mag * &power;
            if c.sign() == Sign::Minus {
                value = value - &term;
            } else {
                value = value + &term;
            }
            last.push((k, term.abs()));
            if last.len() > 16 {
                last.remove(0);
            }
        }
        power = &power * t;
    }
    let tail_bound = tail_estimate(&last, t.to_f64())?;
    Ok(Evaluation { value, tail_bound })
}

fn tail_estimate(last: &[(usize, Real)], t: f64) -> Result<f64> {
    if last.len() < 2 {
        return Ok(0.0);
    }
    let (k1, a1) = &last[0];
    let (k2, a2) = &last[last.len() - 1];
    let a1 = a1.ln().to_f64();
    let a2 = a2.ln().to_f64();
    if !a1.is_finite() || !a2.is_finite() {
        return Ok(0.0);
    }
    let log_q = (a2 - a1) / (*k2 - *k1) as f64;
    if log_q >= 0.0 {
        return Err(Error::Divergent(t));
    }
    let q = log_q.exp();
    Ok((a2 + log_q).exp() / (1.0 - q))
}

/// Counts `c_k` of edge-rooted class dissections by non-root vertices, solving
/// `C = z + B(C)` order by order.
pub fn solve_dissection_counts(law: &BlockLaw, order: usize) -> TruncatedSeries {
    TruncatedSeries::from_biguints(&dissection_counts(law, order))
}

pub fn dissection_counts(law: &BlockLaw, order: usize) -> Vec<BigUint> {
    solve_online(law, order, BigUint::one(), false).0
}

/// `c_k t^k` computed in floating point by the same positive recursion.
pub fn scaled_dissection_counts(law: &BlockLaw, order: usize, t: f64) -> Vec<f64> {
    solve_online(law, order, t, false).0
}

/// Map counts `m_n` through `M = z + M A`, `A = M + B(A)` where `A = C(M)`.
/// Each round uses only lower-order coefficients, so the cost is quadratic
/// in the order times the number of tracked powers.
pub fn map_counts(law: &BlockLaw, order: usize) -> Vec<BigUint> {
    solve_online(law, order, BigUint::one(), true).1
}

/// Generic route for `M = z R(M)` by order-by-order substitution, cubic in
/// the order. Serves raw count tables and cross-checks the fast solver.
pub fn solve_map_counts(r: &TruncatedSeries, order: usize) -> Result<TruncatedSeries> {
    if !r.coeffs[0].is_one() {
        return Err(Error::Domain("R-series must have constant term 1".into()));
    }
    if r.order() + 1 < order {
        return Err(Error::OrderTooSmall { have: r.order(), need: order - 1 });
    }
    let mut m = vec![BigInt::zero(); order + 1];
    if order == 0 {
        return Ok(TruncatedSeries::from_coeffs(m));
    }
    // pows[j][s] = [z^s] M^j, filled for s < k before round k.
    let mut pows: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); order + 1]; order + 1];
    pows[0][0] = BigInt::one();
    for k in 1..=order {
        let s = k - 1;
        for j in 1..=s {
            let mut acc = BigInt::zero();
            for i in 1..=s + 1 - j {
                if pows[j - 1][s - i].is_zero() {
                    continue;
                }
                acc += &m[i] * &pows[j - 1][s - i];
            }
            pows[j][s] = acc;
        }
        let mut acc = BigInt::zero();
        for j in 0..=s {
            if !pows[j][s].is_zero() {
                acc += &r.coeffs[j] * &pows[j][s];
            }
        }
        m[k] = acc;
    }
    Ok(TruncatedSeries::from_coeffs(m))
}

/// Arithmetic shared by the exact and the scaled floating solvers.
pub trait Coeff: Clone + Zero {}
impl<T: Clone + Zero> Coeff for T {}

fn conv_at<T>(x: &[T], y: &[T], k: usize) -> T
where
    T: Coeff + for<'a> AddAssign<&'a T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let mut acc = T::zero();
    for i in 1..k {
        if x[i].is_zero() || y[k - i].is_zero() {
            continue;
        }
        acc += &(&x[i] * &y[k - i]);
    }
    acc
}

fn square_at<T>(x: &[T], k: usize) -> T
where
    T: Coeff + for<'a> AddAssign<&'a T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let mut half = T::zero();
    for i in 1..k.div_ceil(2) {
        if x[i].is_zero() || x[k - i].is_zero() {
            continue;
        }
        half += &(&x[i] * &x[k - i]);
    }
    let mut acc = half.clone();
    acc += &half;
    if k % 2 == 0 && k >= 2 {
        acc += &(&x[k / 2] * &x[k / 2]);
    }
    acc
}

/// Solves `Y = X + W(Y)` online, where `X` is `x1 z` or, with `maps`, the map
/// series `M = z + M Y` driven by the solution itself. Returns `(Y, M)`.
fn solve_online<T>(law: &BlockLaw, order: usize, x1: T, maps: bool) -> (Vec<T>, Vec<T>)
where
    T: Coeff + for<'a> AddAssign<&'a T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let top = law.max_tracked_power();
    let mut y = vec![T::zero(); order + 1];
    let mut w = vec![T::zero(); order + 1];
    let mut m = vec![T::zero(); order + 1];
    // pows[j] holds Y^j for 2 <= j <= top; slots 0 and 1 stay unused.
    let mut pows: Vec<Vec<T>> = vec![Vec::new(); top + 1];
    for p in pows.iter_mut().skip(2) {
        *p = vec![T::zero(); order + 1];
    }
    for k in 1..=order {
        for j in 2..=top {
            let v = if j == 2 { square_at(&y, k) } else { conv_at(&y, &pows[j - 1], k) };
            pows[j][k] = v;
        }
        let xk = if maps {
            let mut v = conv_at(&m, &y, k);
            if k == 1 {
                v += &x1;
            }
            m[k] = v.clone();
            v
        } else if k == 1 {
            x1.clone()
        } else {
            T::zero()
        };
        let wk = match law {
            BlockLaw::Progression { first, step } => {
                let mut v = pows[*first as usize][k].clone();
                let tail = if *step == 1 {
                    conv_at(&y, &w, k)
                } else {
                    conv_at(&pows[*step as usize], &w, k)
                };
                v += &tail;
                v
            }
            BlockLaw::Finite(arities) => {
                let mut v = T::zero();
                for &l in arities {
                    v += &pows[l as usize][k];
                }
                v
            }
        };
        w[k] = wk;
        let mut yk = xk;
        yk += &w[k];
        y[k] = yk;
    }
    (y, m)
}

/// Reads an integer that fits in `u64`, for tests and small tables.
pub fn small(c: &BigInt) -> u64 {
    c.to_u64().expect("coefficient fits in u64")
}

/// Header of a serialized coefficient table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableHeader {
    pub class_id: String,
    pub series_id: String,
    pub order: usize,
}

const TABLE_MAGIC: &str = "# outerplanar-series v1";

fn body_digest(coeffs: &[BigInt]) -> String {
    let mut h = Sha256::new();
    for c in coeffs {
        h.update(c.to_string().as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Versioned text form: magic line, `class`, `series`, `order` and `sha256`
/// header lines, then one decimal coefficient per line from `z^0`.
pub fn write_table(class_id: &str, series_id: &str, f: &TruncatedSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TABLE_MAGIC}");
    let _ = writeln!(out, "class {class_id}");
    let _ = writeln!(out, "series {series_id}");
    let _ = writeln!(out, "order {}", f.order());
    let _ = writeln!(out, "sha256 {}", body_digest(&f.coeffs));
    for c in &f.coeffs {
        let _ = writeln!(out, "{c}");
    }
    out
}

pub fn read_table(text: &str) -> Result<(TableHeader, TruncatedSeries)> {
    let mut lines = text.lines();
    if lines.next() != Some(TABLE_MAGIC) {
        return Err(Error::Parse("missing series table header".into()));
    }
    let mut field = |name: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing `{name}` line")))?;
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(str::to_owned)
            .ok_or_else(|| Error::Parse(format!("expected `{name}` line, got `{line}`")))
    };
    let class_id = field("class")?;
    let series_id = field("series")?;
    let order: usize = field("order")?
        .parse()
        .map_err(|e| Error::Parse(format!("bad order: {e}")))?;
    let digest = field("sha256")?;
    let coeffs: Vec<BigInt> = lines
        .map(|l| l.trim().parse::<BigInt>().map_err(|e| Error::Parse(format!("bad coefficient `{l}`: {e}"))))
        .collect::<Result<_>>()?;
    if coeffs.len() != order + 1 {
        return Err(Error::Parse(format!("expected {} coefficients, found {}", order + 1, coeffs.len())));
    }
    if body_digest(&coeffs) != digest {
        return Err(Error::Checksum(format!("table {class_id}/{series_id}")));
    }
    Ok((TableHeader { class_id, series_id, order }, TruncatedSeries::from_coeffs(coeffs)))
}

/// Whether any coefficient is negative.
pub fn has_negative(f: &TruncatedSeries) -> bool {
    f.coeffs.iter().any(|c| c.is_negative())
}
