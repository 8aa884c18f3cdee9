//! Random generation: uniform dissections, R-structures, trees and maps
//! driven by exact counts, and Boltzmann samplers for dissections.
//!
//! Every recursive method runs on the same count-driven sequence sampler,
//! generic over the count type: `BigUint` tables give exactly uniform
//! draws, `f64` tables of `c_k τ^k` give the fast near-exact variant used at
//! large sizes.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Binomial, Distribution};

use crate::bijection::{compose, DecoratedTree};
use crate::classes::{BlockLaw, ClassTables};
use crate::error::{Error, Result};
use crate::maps::{Dissection, PlanarMap};
use crate::stats::ln_binomial_pmf;

/// Deterministic generator for the stream `(seed, experiment, index, tag)`.
pub fn stream(seed: u64, experiment: u64, index: u64, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for (i, part) in [experiment, index, tag, 0x6f75_7465_7270_6c61].into_iter().enumerate() {
        state = splitmix64(state ^ splitmix64(part.wrapping_add(i as u64)));
        key[8 * i..8 * i + 8].copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform integer in `[0, n)` by rejection on the bit length of `n`.
pub fn uniform_below<R: RngCore + ?Sized>(n: &BigUint, rng: &mut R) -> BigUint {
    assert!(!Zero::is_zero(n), "empty range");
    let bits = n.bits();
    let words = bits.div_ceil(32) as usize;
    let top_bits = bits - 32 * (words as u64 - 1);
    let mask = if top_bits == 32 { u32::MAX } else { (1u32 << top_bits) - 1 };
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        digits[words - 1] &= mask;
        let x = BigUint::new(digits);
        if &x < n {
            return x;
        }
    }
}

/// Count type driving the recursive samplers.
pub trait Mass: Clone + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    /// Uniform point in `[0, total)`.
    fn draw_below<R: RngCore + ?Sized>(total: &Self, rng: &mut R) -> Self;
}

impl Mass for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        if Zero::is_zero(self) || Zero::is_zero(other) {
            return Zero::zero();
        }
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn draw_below<R: RngCore + ?Sized>(total: &Self, rng: &mut R) -> Self {
        uniform_below(total, rng)
    }
}

impl Mass for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn draw_below<R: RngCore + ?Sized>(total: &Self, rng: &mut R) -> Self {
        rng.random::<f64>() * total
    }
}

/// Index `i` drawn with probability `(cum[i] - cum[i-1]) / cum.last()`.
fn pick_cumulative<W: Mass, R: RngCore + ?Sized>(cum: &[W], rng: &mut R) -> usize {
    let total = cum.last().expect("nonempty choice");
    let u = W::draw_below(total, rng);
    let i = cum.partition_point(|c| c <= &u);
    if i < cum.len() {
        return i;
    }
    // Float rounding put `u` on the total: fall back to the last positive entry.
    (0..cum.len()).rev().find(|&i| i == 0 || cum[i] > cum[i - 1]).unwrap_or(0)
}

/// Index drawn from weights computed on the fly, exact for integer masses.
fn pick_linear<W: Mass, R: RngCore + ?Sized>(total: &W, weights: impl Iterator<Item = W>, rng: &mut R) -> usize {
    let u = W::draw_below(total, rng);
    let mut acc = W::zero();
    let mut last_positive = 0;
    for (i, w) in weights.enumerate() {
        if w.is_zero() {
            continue;
        }
        acc = acc.plus(&w);
        last_positive = i;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Finite automaton on sequence lengths: accepting states are the allowed lengths.
#[derive(Clone, Debug)]
struct Automaton {
    start: usize,
    accept: Vec<bool>,
    next: Vec<Option<usize>>,
}

impl Automaton {
    /// Children of a polygon: the allowed arities.
    fn polygon(law: &BlockLaw) -> Automaton {
        match law {
            BlockLaw::Progression { first, step } => {
                // State = items still missing before the next allowed length.
                let (a, p) = (*first as usize, *step as usize);
                let states = a.max(p - 1) + 1;
                Automaton {
                    start: a,
                    accept: (0..states).map(|e| e == 0).collect(),
                    next: (0..states).map(|e| Some(if e > 0 { e - 1 } else { p - 1 })).collect(),
                }
            }
            BlockLaw::Finite(arities) => {
                let max = *arities.iter().max().expect("nonempty") as usize;
                Automaton {
                    start: 0,
                    accept: (0..=max).map(|t| arities.contains(&(t as u32))).collect(),
                    next: (0..=max).map(|t| (t < max).then_some(t + 1)).collect(),
                }
            }
        }
    }

    /// Any number of items.
    fn sequence() -> Automaton {
        Automaton { start: 0, accept: vec![true], next: vec![Some(0)] }
    }
}

/// Weighted counts of item sequences by total size, with one cumulative
/// choice table per (state, remaining size).
#[derive(Clone, Debug)]
struct SeqTable<W> {
    automaton: Automaton,
    /// `g[e][s]`: weighted sequences of total size `s` from state `e`.
    g: Vec<Vec<W>>,
    /// `cum[e][s][j-1]`: mass of first items of size at most `j`.
    cum: Vec<Vec<Vec<W>>>,
}

impl<W: Mass> SeqTable<W> {
    fn new(automaton: Automaton, c: &[W], k_max: usize) -> Self {
        let states = automaton.accept.len();
        let mut g = vec![vec![W::zero(); k_max + 1]; states];
        let mut cum = vec![vec![Vec::new(); k_max + 1]; states];
        for (e, row) in g.iter_mut().enumerate() {
            row[0] = if automaton.accept[e] { W::one() } else { W::zero() };
        }
        for s in 1..=k_max {
            for e in 0..states {
                let Some(nx) = automaton.next[e] else {
                    continue;
                };
                let mut acc = W::zero();
                let mut list = Vec::with_capacity(s);
                for j in 1..=s {
                    acc = acc.plus(&c[j].times(&g[nx][s - j]));
                    list.push(acc.clone());
                }
                g[e][s] = acc;
                cum[e][s] = list;
            }
        }
        SeqTable { automaton, g, cum }
    }

    fn total(&self, s: usize) -> &W {
        &self.g[self.automaton.start][s]
    }

    /// Sizes of the items of a sequence of total size `s`, in order.
    fn sample_sizes<R: RngCore + ?Sized>(&self, mut s: usize, rng: &mut R) -> Vec<usize> {
        let mut e = self.automaton.start;
        let mut out = Vec::new();
        while s > 0 {
            let j = pick_cumulative(&self.cum[e][s], rng) + 1;
            out.push(j);
            s -= j;
            e = self.automaton.next[e].expect("positive mass implies a successor");
        }
        out
    }
}

/// Uniform dissections and R-structures of bounded size.
#[derive(Clone, Debug)]
pub struct BlockSampler<W> {
    k_max: usize,
    c: Vec<W>,
    polygon: SeqTable<W>,
    rstructure: SeqTable<W>,
}

impl<W: Mass> BlockSampler<W> {
    /// `c[k]` are the (possibly scaled) block counts for `k <= k_max`, `c[0] = 0`.
    pub fn new(law: &BlockLaw, c: Vec<W>, k_max: usize) -> Result<Self> {
        if c.len() <= k_max {
            return Err(Error::OrderTooSmall { have: c.len().saturating_sub(1), need: k_max });
        }
        let polygon = SeqTable::new(Automaton::polygon(law), &c, k_max);
        let rstructure = SeqTable::new(Automaton::sequence(), &c, k_max);
        Ok(BlockSampler { k_max, c, polygon, rstructure })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Block count implied by the polygon table (equals `c_k` for `k >= 2`).
    pub fn polygon_mass(&self, k: usize) -> &W {
        self.polygon.total(k)
    }

    pub fn rstructure_mass(&self, k: usize) -> &W {
        self.rstructure.total(k)
    }

    fn check(&self, k: usize, what: &str) -> Result<()> {
        if k > self.k_max {
            return Err(Error::OrderTooSmall { have: self.k_max, need: k });
        }
        let empty = match what {
            "dissection" => k == 0 || self.c[k].is_zero(),
            _ => self.rstructure.total(k).is_zero(),
        };
        if empty {
            return Err(Error::Infeasible { n: k, reason: format!("the class has no {what} of this size") });
        }
        Ok(())
    }

    /// Uniform over the class's dissections with `k` non-`*` vertices.
    pub fn dissection<R: RngCore + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Dissection> {
        self.check(k, "dissection")?;
        Ok(self.dissection_unchecked(k, rng))
    }

    fn dissection_unchecked<R: RngCore + ?Sized>(&self, k: usize, rng: &mut R) -> Dissection {
        let mut code = Vec::with_capacity(2 * k);
        let mut stack = vec![k];
        while let Some(s) = stack.pop() {
            if s == 1 {
                code.push(0);
                continue;
            }
            let sizes = self.polygon.sample_sizes(s, rng);
            code.push(sizes.len() as u32);
            stack.extend(sizes.iter().rev());
        }
        Dissection::from_code_unchecked(code)
    }

    /// Uniform over sequences of dissections of total size `k`.
    pub fn rstructure<R: RngCore + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<Dissection>> {
        self.check(k, "R-structure")?;
        Ok(self.rstructure.sample_sizes(k, rng).into_iter().map(|j| self.dissection_unchecked(j, rng)).collect())
    }
}

/// Exact recursive sampler of trees with `P(T) ∝ Π ω_{outdeg}`, using
/// weighted forest counts `F[j][s]` (ordered forests of `j` trees, `s` vertices).
#[derive(Clone, Debug)]
pub struct ExactTreeSampler {
    omega: Vec<BigUint>,
    m: Vec<BigUint>,
    forest: Vec<Vec<BigUint>>,
    n_max: usize,
}

impl ExactTreeSampler {
    pub fn new(omega: &[BigUint], m: &[BigUint], n_max: usize) -> Result<Self> {
        if m.len() <= n_max || omega.len() < n_max {
            return Err(Error::OrderTooSmall { have: m.len().saturating_sub(1), need: n_max });
        }
        let top = n_max.max(1) - 1;
        let mut forest = vec![vec![<BigUint as Zero>::zero(); top + 1]; top + 1];
        forest[0][0] = <BigUint as One>::one();
        for j in 1..=top {
            for s in j..=top {
                let mut acc = <BigUint as Zero>::zero();
                for s1 in 1..=s - (j - 1) {
                    acc += Mass::times(&m[s1], &forest[j - 1][s - s1]);
                }
                forest[j][s] = acc;
            }
        }
        Ok(ExactTreeSampler { omega: omega[..=top].to_vec(), m: m[..=n_max].to_vec(), forest, n_max })
    }

    /// Outdegrees in breadth-first order.
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<u32>> {
        if n == 0 || n > self.n_max {
            return Err(Error::OrderTooSmall { have: self.n_max, need: n });
        }
        if Zero::is_zero(&self.m[n]) {
            return Err(Error::Infeasible { n, reason: "no tree of this size".into() });
        }
        enum Task {
            Tree(usize),
            Forest(usize, usize),
        }
        let mut pre = Vec::with_capacity(n);
        let mut stack = vec![Task::Tree(n)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Tree(s) => {
                    let weights = (0..s).map(|k| Mass::times(&self.omega[k], &self.forest[k][s - 1]));
                    let k = pick_linear(&self.m[s], weights, rng);
                    pre.push(k as u32);
                    stack.push(Task::Forest(k, s - 1));
                }
                Task::Forest(0, _) => {}
                Task::Forest(1, s) => stack.push(Task::Tree(s)),
                Task::Forest(j, s) => {
                    let weights = (1..=s - (j - 1)).map(|s1| Mass::times(&self.m[s1], &self.forest[j - 1][s - s1]));
                    let s1 = pick_linear(&self.forest[j][s], weights, rng) + 1;
                    stack.push(Task::Forest(j - 1, s - s1));
                    stack.push(Task::Tree(s1));
                }
            }
        }
        Ok(preorder_to_bfs(&pre))
    }

    /// Exact probability of each breadth-first degree sequence is proportional
    /// to the product of its weights; this returns `m_n`, the normalizer.
    pub fn normalizer(&self, n: usize) -> &BigUint {
        &self.m[n]
    }
}

/// Breadth-first outdegrees of the tree with the given preorder outdegrees.
pub fn preorder_to_bfs(pre: &[u32]) -> Vec<u32> {
    let n = pre.len();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut open: Vec<(usize, u32)> = Vec::new();
    for (v, &d) in pre.iter().enumerate() {
        if let Some(top) = open.last_mut() {
            children[top.0].push(v as u32);
            top.1 -= 1;
            if top.1 == 0 {
                open.pop();
            }
        }
        if d > 0 {
            open.push((v, d));
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::from([0u32]);
    while let Some(v) = queue.pop_front() {
        out.push(pre[v as usize]);
        queue.extend(children[v as usize].iter().copied());
    }
    out
}

/// Rotation of a word with `Σ (d - 1) = -1` that is a valid breadth-first
/// (Łukasiewicz) code.
pub fn cycle_lemma_rotate(word: &mut [u32]) {
    let mut s = 0i64;
    let mut best = (i64::MAX, 0usize);
    for (i, &d) in word.iter().enumerate() {
        s += d as i64 - 1;
        if s < best.0 {
            best = (s, i + 1);
        }
    }
    let n = word.len();
    word.rotate_left(best.1 % n);
}

/// Galton-Watson tree conditioned on its size: the i.i.d. offspring word is
/// drawn conditioned on its sum, then rotated by the cycle lemma.
///
/// Degrees 0 and 1 are handled in aggregate: the number `S` of degrees
/// `>= 2` is binomial, those degrees are drawn from `ξ | ξ >= 2`, and the
/// draw is accepted with probability proportional to the binomial mass of
/// the number of ones it forces. The bound `M0` used for that acceptance is
/// the binomial mode at an 8σ upper quantile of `S`, so the sampler is
/// exact unless `S` leaves that range.
#[derive(Clone, Debug)]
pub struct GwTreeSampler {
    p_big: f64,
    q1: f64,
    big: Option<WeightedAliasIndex<f64>>,
    span: usize,
}

impl GwTreeSampler {
    pub fn new(xi: &[f64], span: usize) -> Result<Self> {
        let p0 = xi.first().copied().unwrap_or(0.0);
        let p1 = xi.get(1).copied().unwrap_or(0.0);
        if p0 <= 0.0 {
            return Err(Error::Domain("offspring law has no leaves".into()));
        }
        let tail: Vec<f64> = xi.iter().skip(2).copied().collect();
        let p_big: f64 = tail.iter().sum();
        let big = if p_big > 0.0 { Some(WeightedAliasIndex::new(tail).map_err(|e| Error::Domain(e.to_string()))?) } else { None };
        Ok(GwTreeSampler { p_big: p_big / (p0 + p1 + p_big), q1: p1 / (p0 + p1), big, span })
    }

    /// Outdegrees in breadth-first order.
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<u32>> {
        if n == 0 || (n - 1) % self.span != 0 {
            return Err(Error::Infeasible { n, reason: format!("sizes must be 1 mod span {}", self.span) });
        }
        if n == 1 {
            return Ok(vec![0]);
        }
        let nf = n as f64;
        let s_hi = (nf * self.p_big + 8.0 * (nf * self.p_big * (1.0 - self.p_big)).sqrt() + 8.0).min(nf - 1.0);
        let rest_min = (nf - s_hi).max(1.0) as u64;
        let mode = ((rest_min + 1) as f64 * self.q1).floor() as u64;
        let ln_m0 = ln_binomial_pmf(rest_min, self.q1, mode.min(rest_min));
        let binomial = Binomial::new(n as u64, self.p_big).map_err(|e| Error::Domain(e.to_string()))?;
        let mut bigs: Vec<u32> = Vec::new();
        loop {
            let s = binomial.sample(rng) as usize;
            bigs.clear();
            let mut total = 0usize;
            if let Some(big) = &self.big {
                for _ in 0..s {
                    let d = big.sample(rng) as u32 + 2;
                    total += d as usize;
                    bigs.push(d);
                }
            }
            if total > n - 1 {
                continue;
            }
            let ones = (n - 1 - total) as u64;
            let rest = (n - s) as u64;
            if ones > rest {
                continue;
            }
            let ln_acc = ln_binomial_pmf(rest, self.q1, ones) - ln_m0;
            if ln_acc >= 0.0 || rng.random::<f64>() < ln_acc.exp() {
                let mut word = Vec::with_capacity(n);
                word.extend_from_slice(&bigs);
                word.extend(std::iter::repeat_n(1u32, ones as usize));
                word.resize(n, 0);
                word.shuffle(rng);
                cycle_lemma_rotate(&mut word);
                return Ok(word);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exact integer tables: exactly uniform, for small sizes.
    Exact,
    /// Scaled float tables and the conditioned Galton-Watson tree sampler.
    Fast,
}

#[derive(Clone, Debug)]
enum Blocks {
    Exact(BlockSampler<BigUint>),
    Fast(BlockSampler<f64>),
}

#[derive(Clone, Debug)]
enum Trees {
    Exact(ExactTreeSampler),
    Gw(GwTreeSampler),
}

/// Uniform maps of a class: tree, then independent uniform R-structures
/// with sizes equal to the outdegrees, then composition.
#[derive(Clone, Debug)]
pub struct MapSampler {
    mode: Mode,
    n_max: usize,
    span: usize,
    blocks: Blocks,
    trees: Trees,
}

impl MapSampler {
    /// `n_max` bounds the sizes in exact mode; fast mode has no bound.
    pub fn new(tables: &ClassTables, n_max: usize, mode: Mode) -> Result<Self> {
        let law = tables
            .spec
            .block_law()
            .ok_or_else(|| Error::InvalidClass("sampling needs a face-degree class, not a raw count table".into()))?;
        match mode {
            Mode::Exact => {
                let k = n_max.max(2) - 1;
                let c = tables.c.get(..=k).ok_or(Error::OrderTooSmall { have: tables.order, need: k })?.to_vec();
                Ok(MapSampler {
                    mode,
                    n_max,
                    span: tables.span,
                    blocks: Blocks::Exact(BlockSampler::new(&law, c, k)?),
                    trees: Trees::Exact(ExactTreeSampler::new(&tables.r, &tables.m, n_max)?),
                })
            }
            Mode::Fast => {
                tables.analytic()?;
                // Degrees beyond the cut carry less than 1e-17 of the mass.
                let mut tail = tables.xi_tail;
                let mut cut = tables.xi.len();
                while cut > 3 && tail + tables.xi[cut - 1] < 1e-17 {
                    cut -= 1;
                    tail += tables.xi[cut];
                }
                let xi = &tables.xi[..cut];
                let k = cut.max(2).min(tables.c_scaled.len() - 1);
                let c = tables.c_scaled.get(..=k).ok_or(Error::OrderTooSmall { have: tables.c_scaled.len(), need: k })?.to_vec();
                Ok(MapSampler {
                    mode,
                    n_max: usize::MAX,
                    span: tables.span,
                    blocks: Blocks::Fast(BlockSampler::new(&law, c, k)?),
                    trees: Trees::Gw(GwTreeSampler::new(xi, tables.span)?),
                })
            }
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 || (n - 1) % self.span != 0 {
            return Err(Error::Infeasible { n, reason: format!("sizes must be 1 mod span {}", self.span) });
        }
        if n > self.n_max {
            return Err(Error::OrderTooSmall { have: self.n_max, need: n });
        }
        Ok(())
    }

    /// Breadth-first outdegrees of a tree with `P(T) ∝ Π ω_{outdeg}`.
    pub fn tree<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<u32>> {
        self.check(n)?;
        match &self.trees {
            Trees::Exact(t) => t.sample(n, rng),
            Trees::Gw(t) => t.sample(n, rng),
        }
    }

    pub fn dissection<R: RngCore + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Dissection> {
        match &self.blocks {
            Blocks::Exact(b) => b.dissection(k, rng),
            Blocks::Fast(b) => b.dissection(k, rng),
        }
    }

    pub fn rstructure<R: RngCore + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<Dissection>> {
        match &self.blocks {
            Blocks::Exact(b) => b.rstructure(k, rng),
            Blocks::Fast(b) => b.rstructure(k, rng),
        }
    }

    pub fn decorated_tree<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DecoratedTree> {
        let degrees = self.tree(n, rng)?;
        let structures = degrees.iter().map(|&d| self.rstructure(d as usize, rng)).collect::<Result<Vec<_>>>()?;
        DecoratedTree::from_structures(structures)
    }

    pub fn map<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PlanarMap> {
        compose(&self.decorated_tree(n, rng)?)
    }
}

pub fn sample_dissection_uniform<R: RngCore + ?Sized>(tables: &ClassTables, k: usize, rng: &mut R) -> Result<Dissection> {
    MapSampler::new(tables, k + 1, Mode::Exact)?.dissection(k, rng)
}

pub fn sample_rstructure_uniform<R: RngCore + ?Sized>(tables: &ClassTables, k: usize, rng: &mut R) -> Result<Vec<Dissection>> {
    MapSampler::new(tables, k + 1, Mode::Exact)?.rstructure(k, rng)
}

/// Exact method when the size is tabulated, conditioned Galton-Watson otherwise.
pub fn sample_tree<R: RngCore + ?Sized>(tables: &ClassTables, n: usize, rng: &mut R) -> Result<Vec<u32>> {
    tables.check_feasible(n)?;
    if n <= tables.order.min(EXACT_LIMIT) {
        ExactTreeSampler::new(&tables.r, &tables.m, n)?.sample(n, rng)
    } else {
        GwTreeSampler::new(&tables.xi, tables.span)?.sample(n, rng)
    }
}

/// One-shot uniform map; use [`MapSampler`] for repeated draws.
pub fn sample_map_uniform<R: RngCore + ?Sized>(tables: &ClassTables, n: usize, rng: &mut R) -> Result<PlanarMap> {
    tables.check_feasible(n)?;
    let mode = if n <= tables.order.min(EXACT_LIMIT) { Mode::Exact } else { Mode::Fast };
    MapSampler::new(tables, n, mode)?.map(n, rng)
}

/// Largest size the one-shot helpers sample with exact tables.
pub const EXACT_LIMIT: usize = 128;

/// `C(t)` in double precision by Newton iteration from 0.
pub fn c_at(law: &BlockLaw, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Boltzmann parameter must be positive, got {t}")));
    }
    let mut u = 0.0f64;
    for _ in 0..200 {
        let (b, b1) = law.eval_f64(u);
        if !(b1 < 1.0) {
            return Err(Error::Divergent(t));
        }
        let step = (u - t - b) / (1.0 - b1);
        u -= step;
        if step.abs() <= 4.0 * f64::EPSILON * u {
            return Ok(u);
        }
    }
    Err(Error::Divergent(t))
}

/// Boltzmann samplers of dissections at parameter `t`, plain and pointed.
///
/// Plain: an edge with probability `t / C(t)`, otherwise a polygon of arity
/// `L` with probability `C(t)^{L-1}` and independent children. Pointed
/// (the class `z C'(z)`): a marked edge with probability `1 - B'(C(t))`,
/// otherwise arity `L` with probability `L C(t)^{L-1}`, the pointed child at
/// a uniform position and plain siblings.
#[derive(Clone, Debug)]
pub struct BoltzmannSampler {
    t: f64,
    w: f64,
    b1: f64,
    /// Index 0 is the edge; index `i > 0` is arity `arities[i - 1]`.
    arities: Vec<u32>,
    plain: WeightedAliasIndex<f64>,
    pointed: WeightedAliasIndex<f64>,
}

impl BoltzmannSampler {
    pub fn new(law: &BlockLaw, t: f64) -> Result<Self> {
        let w = c_at(law, t)?;
        let (_, b1) = law.eval_f64(w);
        let mut arities = Vec::new();
        let mut plain = vec![t / w];
        let mut pointed = vec![1.0 - b1];
        let mut push = |l: u32| -> f64 {
            let p = w.powi(l as i32 - 1);
            arities.push(l);
            plain.push(p);
            pointed.push(l as f64 * p);
            l as f64 * p
        };
        match law {
            BlockLaw::Finite(v) => {
                for &l in v {
                    push(l);
                }
            }
            BlockLaw::Progression { first, step } => {
                let mut l = *first;
                let mut mass = 0.0;
                loop {
                    let term = push(l);
                    mass += term;
                    if term < 1e-18 * mass || l > 1 << 20 {
                        break;
                    }
                    l += step;
                }
            }
        }
        let plain = WeightedAliasIndex::new(plain).map_err(|e| Error::Domain(e.to_string()))?;
        let pointed = WeightedAliasIndex::new(pointed).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(BoltzmannSampler { t, w, b1, arities, plain, pointed })
    }

    /// Sampler at the critical parameter of a class.
    pub fn critical(tables: &ClassTables) -> Result<Self> {
        let law = tables.spec.block_law().ok_or_else(|| Error::InvalidClass("Boltzmann sampling needs a face-degree class".into()))?;
        BoltzmannSampler::new(&law, tables.tau()?)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `C(t)`.
    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn edge_probability(&self) -> f64 {
        self.t / self.w
    }

    /// `1 - B'(C(t))`.
    pub fn pointed_edge_probability(&self) -> f64 {
        1.0 - self.b1
    }

    /// `t C'(t) / C(t)`.
    pub fn expected_size(&self) -> f64 {
        self.t / (self.w * (1.0 - self.b1))
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Dissection {
        let mut code = Vec::new();
        self.append_plain(&mut code, 1, rng);
        Dissection::from_code_unchecked(code)
    }

    /// Appends `count` independent plain objects in preorder; returns their total size.
    fn append_plain<R: RngCore + ?Sized>(&self, code: &mut Vec<u32>, count: usize, rng: &mut R) -> usize {
        let mut pending = count;
        let mut size = 0;
        while pending > 0 {
            pending -= 1;
            let i = self.plain.sample(rng);
            if i == 0 {
                code.push(0);
                size += 1;
            } else {
                let l = self.arities[i - 1];
                code.push(l);
                pending += l as usize;
            }
        }
        size
    }

    /// Pointed object and the Hamilton position (in `1..=size`) of its marked vertex.
    pub fn sample_pointed<R: RngCore + ?Sized>(&self, rng: &mut R) -> (Dissection, u32) {
        // Spine of pointed polygons; siblings before the pointed child precede it in preorder.
        let mut code = Vec::new();
        let mut trailing: Vec<usize> = Vec::new();
        let mut marked = 1usize;
        loop {
            let i = self.pointed.sample(rng);
            if i == 0 {
                code.push(0);
                break;
            }
            let l = self.arities[i - 1];
            let at = rng.random_range(0..l as usize);
            code.push(l);
            marked += self.append_plain(&mut code, at, rng);
            trailing.push(l as usize - 1 - at);
        }
        // Trailing siblings close innermost first.
        for &count in trailing.iter().rev() {
            self.append_plain(&mut code, count, rng);
        }
        (Dissection::from_code_unchecked(code), marked as u32)
    }
}

/// `P(ξ* = k) = k P(ξ = k)`.
pub fn size_biased_law(tables: &ClassTables) -> Vec<f64> {
    tables.xi.iter().enumerate().map(|(k, p)| k as f64 * p).collect()
}

pub fn sample_boltzmann_dissection<R: RngCore + ?Sized>(tables: &ClassTables, t: f64, rng: &mut R) -> Result<Dissection> {
    Ok(boltzmann_at(tables, t)?.sample(rng))
}

pub fn sample_boltzmann_pointed<R: RngCore + ?Sized>(tables: &ClassTables, t: f64, rng: &mut R) -> Result<(Dissection, u32)> {
    Ok(boltzmann_at(tables, t)?.sample_pointed(rng))
}

fn boltzmann_at(tables: &ClassTables, t: f64) -> Result<BoltzmannSampler> {
    let tau = tables.tau()?;
    if t > tau * (1.0 + 1e-12) {
        return Err(Error::Divergent(t));
    }
    let law = tables.spec.block_law().ok_or_else(|| Error::InvalidClass("Boltzmann sampling needs a face-degree class".into()))?;
    BoltzmannSampler::new(&law, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bijection::{enumerate_dissections, enumerate_rstructures};
    use crate::classes::{ClassSpec, FaceSet};
    use crate::stats::chi_square;
    use std::collections::HashMap;

    fn out_tables() -> ClassTables {
        ClassTables::build(&ClassSpec::out(), 40).unwrap()
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream(7, 1, 2, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut x = stream(7, 1, 2, 3);
        let mut y = stream(7, 1, 2, 4);
        let mut z = stream(7, 2, 1, 3);
        let (vx, vy, vz) = (x.next_u64(), y.next_u64(), z.next_u64());
        assert!(vx != vy && vx != vz && vy != vz);
    }

    #[test]
    fn uniform_below_is_uniform() {
        let n = BigUint::from(6u32);
        let mut rng = stream(1, 0, 0, 0);
        let mut counts = [0u64; 6];
        for _ in 0..60_000 {
            counts[uniform_below(&n, &mut rng).to_u32_digits().first().copied().unwrap_or(0) as usize] += 1;
        }
        let (_, p) = chi_square(&counts, &[1.0 / 6.0; 6]);
        assert!(p > 1e-3, "{counts:?}");
    }

    #[test]
    fn polygon_tables_reproduce_block_counts() {
        for set in [FaceSet::All, FaceSet::Even, FaceSet::Finite(vec![3]), FaceSet::Finite(vec![4, 6]), FaceSet::Progression { first: 5, step: 3 }] {
            let spec = ClassSpec::faces(set).unwrap();
            let c = spec.dissection_counts(30).unwrap();
            let law = spec.block_law().unwrap();
            let s = BlockSampler::new(&law, c.clone(), 30).unwrap();
            for k in 2..=30 {
                assert_eq!(s.polygon_mass(k), &c[k], "{} k={k}", spec.id());
            }
        }
    }

    #[test]
    fn square_has_probability_one_third() {
        let t = out_tables();
        let s = MapSampler::new(&t, 6, Mode::Exact).unwrap();
        let mut rng = stream(11, 0, 0, 0);
        let draws = 100_000;
        let hits = (0..draws).filter(|_| s.dissection(3, &mut rng).unwrap().code() == [3, 0, 0, 0]).count();
        let p = hits as f64 / draws as f64;
        let sd = (1.0 / 3.0 * 2.0 / 3.0 / draws as f64).sqrt();
        assert!((p - 1.0 / 3.0).abs() < 3.5 * sd, "{p}");
        assert_eq!(s.dissection(1, &mut rng).unwrap(), Dissection::edge());
    }

    fn uniformity<T: std::hash::Hash + Eq + Clone>(all: &[T], mut draw: impl FnMut() -> T, draws: usize) -> f64 {
        let index: HashMap<T, usize> = all.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        let mut counts = vec![0u64; all.len()];
        for _ in 0..draws {
            counts[*index.get(&draw()).expect("drawn object is in the enumeration")] += 1;
        }
        chi_square(&counts, &vec![1.0 / all.len() as f64; all.len()]).1
    }

    #[test]
    fn dissections_and_rstructures_uniform() {
        let t = out_tables();
        let s = MapSampler::new(&t, 8, Mode::Exact).unwrap();
        let law = FaceSet::All.block_law();
        let mut rng = stream(12, 0, 0, 0);
        let all = enumerate_dissections(&law, 4);
        assert!(uniformity(&all, || s.dissection(4, &mut rng).unwrap(), 50_000) > 1e-3);
        let all = enumerate_rstructures(&law, 3);
        assert_eq!(all.len(), 6);
        assert!(uniformity(&all, || s.rstructure(3, &mut rng).unwrap(), 50_000) > 1e-3);
        assert!(s.rstructure(0, &mut rng).unwrap().is_empty());

        let bip = ClassTables::build(&ClassSpec::bip(), 20).unwrap();
        let s = MapSampler::new(&bip, 8, Mode::Exact).unwrap();
        let all = enumerate_dissections(&FaceSet::Even.block_law(), 5);
        assert_eq!(all.len(), 4);
        assert!(uniformity(&all, || s.dissection(5, &mut rng).unwrap(), 40_000) > 1e-3);
        assert!(s.dissection(2, &mut rng).is_err());
    }

    #[test]
    fn cycle_lemma_gives_valid_codes() {
        let mut rng = stream(3, 0, 0, 0);
        for _ in 0..200 {
            let mut w = vec![0u32; 9];
            w[..3].copy_from_slice(&[3, 2, 3]);
            w.shuffle(&mut rng);
            cycle_lemma_rotate(&mut w);
            let mut open = 1i64;
            for (i, &d) in w.iter().enumerate() {
                open += d as i64 - 1;
                assert!(open > 0 || i == w.len() - 1);
            }
            assert_eq!(open, 0);
        }
    }

    #[test]
    fn preorder_conversion() {
        // Root with children a (one child) and b: preorder 2,1,0,0 -> BFS 2,1,0,0.
        assert_eq!(preorder_to_bfs(&[2, 1, 0, 0]), vec![2, 1, 0, 0]);
        // Root with children a, b where b has one child: preorder 2,0,1,0 -> BFS 2,0,1,0.
        assert_eq!(preorder_to_bfs(&[2, 0, 1, 0]), vec![2, 0, 1, 0]);
        // Path below the first child: preorder 2,1,1,0,0 -> BFS 2,1,0,1,0.
        assert_eq!(preorder_to_bfs(&[2, 1, 1, 0, 0]), vec![2, 1, 0, 1, 0]);
    }

    #[test]
    fn exact_tree_probabilities_at_three() {
        // Trees on 3 vertices: path (ω_1² = 1) and cherry (ω_2 = 2), m_3 = 3.
        let t = out_tables();
        let s = ExactTreeSampler::new(&t.r, &t.m, 3).unwrap();
        let mut rng = stream(4, 0, 0, 0);
        let draws = 100_000;
        let cherries = (0..draws).filter(|_| s.sample(3, &mut rng).unwrap() == vec![2, 0, 0]).count();
        let p = cherries as f64 / draws as f64;
        assert!((p - 2.0 / 3.0).abs() < 3.5 * (2.0 / 9.0 / draws as f64).sqrt(), "{p}");
    }

    #[test]
    fn exact_and_gw_trees_agree() {
        let t = out_tables();
        let exact = ExactTreeSampler::new(&t.r, &t.m, 8).unwrap();
        let gw = GwTreeSampler::new(&t.xi, t.span).unwrap();
        let mut rng = stream(5, 0, 0, 0);
        let mut ha = vec![0u64; 8];
        let mut hb = vec![0u64; 8];
        for _ in 0..50_000 {
            for d in exact.sample(8, &mut rng).unwrap() {
                ha[d as usize] += 1;
            }
            for d in gw.sample(8, &mut rng).unwrap() {
                hb[d as usize] += 1;
            }
        }
        let (_, p) = crate::stats::chi_square_two_sample(&ha, &hb);
        assert!(p > 1e-3, "{ha:?} {hb:?}");
    }

    #[test]
    fn sampled_maps_are_valid() {
        let t = ClassTables::build(&ClassSpec::out(), 64).unwrap();
        let fast = MapSampler::new(&t, 0, Mode::Fast).unwrap();
        let exact = MapSampler::new(&t, 40, Mode::Exact).unwrap();
        let mut rng = stream(6, 0, 0, 0);
        for n in [1, 2, 5, 40] {
            for s in [&fast, &exact] {
                let m = s.map(n, &mut rng).unwrap();
                assert!(m.validate().is_valid());
                assert_eq!(m.n_vertices(), n);
            }
        }
        let big = fast.map(3000, &mut rng).unwrap();
        assert!(big.validate().is_valid());
    }

    #[test]
    fn boltzmann_edge_probability_at_criticality() {
        let t = out_tables();
        let b = BoltzmannSampler::critical(&t).unwrap();
        assert!((b.w() - 0.25).abs() < 1e-14);
        assert!((b.edge_probability() - 2.0 / 3.0).abs() < 1e-13);
        // B(u) = u^2/(1-u) has B'(1/4) = 7/9, so the expected size is (1/6)/((1/4)(2/9)) = 3.
        assert!((b.pointed_edge_probability() - 2.0 / 9.0).abs() < 1e-13);
        assert!((b.expected_size() - 3.0).abs() < 1e-12);
        let mut rng = stream(8, 0, 0, 0);
        let draws = 200_000;
        let sizes: Vec<f64> = (0..draws).map(|_| b.sample(&mut rng).size() as f64).collect();
        let mean = sizes.iter().sum::<f64>() / draws as f64;
        assert!((mean / b.expected_size() - 1.0).abs() < 0.01, "{mean}");
        let small = BoltzmannSampler::new(&FaceSet::All.block_law(), 1e-6).unwrap();
        assert!(small.edge_probability() > 0.999_99);
    }

    #[test]
    fn pointed_size_law_is_size_biased() {
        // Marked-object sizes follow k c_k t^k / (t C'(t)).
        let t = out_tables();
        let b = BoltzmannSampler::critical(&t).unwrap();
        let mut rng = stream(9, 0, 0, 0);
        let draws = 100_000;
        let cells = 8;
        let mut counts = vec![0u64; cells + 1];
        for _ in 0..draws {
            let (d, marked) = b.sample_pointed(&mut rng);
            assert!(marked >= 1 && marked as usize <= d.size());
            counts[d.size().min(cells + 1) - 1] += 1;
        }
        let tc1 = b.t() / b.pointed_edge_probability();
        let mut probs: Vec<f64> = (1..=cells).map(|k| k as f64 * t.c_scaled[k] / tc1).collect();
        probs.push(1.0 - probs.iter().sum::<f64>());
        let (_, p) = chi_square(&counts, &probs);
        assert!(p > 1e-3, "{counts:?} {probs:?}");
    }
}
