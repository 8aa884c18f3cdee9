//! First-passage percolation on maps: edge weights, distances, height and
//! diameter, and the stretch factor μ with the scaling constant κ.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::classes::{BlockLaw, ClassTables};
use crate::error::{Error, Result};
use crate::maps::{Graph, PlanarMap};
use crate::sampler::{stream, BoltzmannSampler};
use crate::stats::Summary;

/// Positive edge-weight laws with finite exponential moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightModel {
    Unit,
    Exponential { rate: f64 },
    Uniform { a: f64, b: f64 },
    /// Number of trials up to the first success, on `{1, 2, ...}`.
    Geometric { p: f64 },
}

impl WeightModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightModel::Unit => true,
            WeightModel::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            WeightModel::Uniform { a, b } => a > 0.0 && b > a && b.is_finite(),
            WeightModel::Geometric { p } => p > 0.0 && p <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidWeights(format!("parameters out of range in {self}")))
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, WeightModel::Unit)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            WeightModel::Unit => 1.0,
            WeightModel::Exponential { rate } => 1.0 / rate,
            WeightModel::Uniform { a, b } => (a + b) / 2.0,
            WeightModel::Geometric { p } => 1.0 / p,
        }
    }

    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightModel::Unit => 1.0,
            WeightModel::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            WeightModel::Uniform { a, b } => rng.random_range(a..b),
            WeightModel::Geometric { p } => {
                if p >= 1.0 {
                    1.0
                } else {
                    // Inversion; 1 - u lies in (0, 1].
                    let u: f64 = rng.random();
                    ((1.0 - u).ln() / (1.0 - p).ln()).floor().max(0.0) + 1.0
                }
            }
        }
    }
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WeightModel::Unit => write!(f, "unit"),
            WeightModel::Exponential { rate } => write!(f, "exp:{rate}"),
            WeightModel::Uniform { a, b } => write!(f, "uniform:{a}:{b}"),
            WeightModel::Geometric { p } => write!(f, "geom:{p}"),
        }
    }
}

impl FromStr for WeightModel {
    type Err = Error;

    /// `unit`, `exp:RATE`, `uniform:A:B`, `geom:P`; parentheses also accepted,
    /// e.g. `exponential(1)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidWeights(m);
        let norm = s.trim().to_ascii_lowercase().replace(['(', ','], ":").replace(')', "");
        let mut parts = norm.split(':').map(str::trim);
        let name = parts.next().unwrap_or_default();
        let args: Vec<f64> = parts.map(|p| p.parse::<f64>().map_err(|_| bad(format!("bad number `{p}` in `{s}`")))).collect::<Result<_>>()?;
        let model = match (name, args.as_slice()) {
            ("unit", []) => WeightModel::Unit,
            ("exp" | "exponential", []) => WeightModel::Exponential { rate: 1.0 },
            ("exp" | "exponential", [r]) => WeightModel::Exponential { rate: *r },
            ("uniform", [a, b]) => WeightModel::Uniform { a: *a, b: *b },
            ("geom" | "geometric", [p]) => WeightModel::Geometric { p: *p },
            ("pareto" | "cauchy" | "lognormal" | "levy" | "student", _) => {
                return Err(bad(format!("`{name}` lacks finite exponential moments")));
            }
            _ => return Err(bad(format!("unknown weight model `{s}`"))),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Weights indexed by [`PlanarMap::edge_index`], drawn in canonical edge order
/// so that the map and the stream determine them.
pub fn assign_weights<R: RngCore + ?Sized>(map: &PlanarMap, model: &WeightModel, rng: &mut R) -> Vec<f64> {
    let mut w = vec![1.0; map.n_edges()];
    if model.is_unit() || map.n_edges() == 0 {
        return w;
    }
    let order = map.canonical_edge_order().expect("maps with edges have a canonical order");
    for e in order {
        w[e as usize] = model.draw(rng);
    }
    w
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, u32);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths; breadth-first search when every weight is 1.
pub fn graph_distances(g: &Graph, weights: &[f64], source: usize) -> Vec<f64> {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    if weights.iter().all(|&w| w == 1.0) {
        let mut queue = VecDeque::from([source as u32]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            for (w, _) in g.neighbours(v as usize) {
                if dist[w as usize].is_infinite() {
                    dist[w as usize] = dv + 1.0;
                    queue.push_back(w);
                }
            }
        }
        return dist;
    }
    let mut heap = BinaryHeap::from([Item(0.0, source as u32)]);
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        for (w, e) in g.neighbours(v as usize) {
            let nd = d + weights[e as usize];
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                heap.push(Item(nd, w));
            }
        }
    }
    dist
}

pub fn fpp_distances(map: &PlanarMap, weights: &[f64], source: u32) -> Vec<f64> {
    graph_distances(&map.graph(), weights, source as usize)
}

/// Exact diameter by bounding eccentricities: every search from `v` gives
/// `max(d(v,w), ecc(v) - d(v,w)) <= ecc(w) <= ecc(v) + d(v,w)`, and vertices
/// whose upper bound cannot beat the best lower bound are dropped.
pub fn graph_diameter(g: &Graph, weights: &[f64], start: usize) -> f64 {
    let n = g.n();
    if n <= 1 {
        return 0.0;
    }
    let mut lower = vec![0.0f64; n];
    let mut upper = vec![f64::INFINITY; n];
    let mut live: Vec<u32> = (0..n as u32).collect();
    let mut best = 0.0f64;
    let mut v = start;
    let mut pick_upper = true;
    // Guards against float round-off in the bound sums.
    let slack = 1.0 + 1e-12;
    loop {
        let dist = graph_distances(g, weights, v);
        let ecc = dist.iter().copied().fold(0.0, f64::max);
        best = best.max(ecc);
        lower[v] = ecc;
        upper[v] = ecc;
        for &w in &live {
            let d = dist[w as usize];
            let w = w as usize;
            lower[w] = lower[w].max(d).max(ecc - d);
            upper[w] = upper[w].min(ecc + d);
        }
        live.retain(|&w| w as usize != v && upper[w as usize] > best * slack);
        if live.is_empty() {
            return best;
        }
        // Alternate between the largest upper bound and the smallest lower bound.
        let key = |&&w: &&u32| (upper[w as usize], lower[w as usize]);
        v = if pick_upper {
            *live.iter().max_by(|a, b| key(a).0.total_cmp(&key(b).0).then(key(b).1.total_cmp(&key(a).1))).expect("nonempty") as usize
        } else {
            *live.iter().min_by(|a, b| key(a).1.total_cmp(&key(b).1)).expect("nonempty") as usize
        };
        pick_upper = !pick_upper;
    }
}

pub fn diameter_fpp(map: &PlanarMap, weights: &[f64]) -> f64 {
    graph_diameter(&map.graph(), weights, map.root_vertex() as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FppResult {
    /// Distance of every vertex from the root vertex.
    pub distances: Vec<f64>,
    pub height: f64,
    pub diameter: f64,
}

pub fn fpp(map: &PlanarMap, weights: &[f64]) -> FppResult {
    let g = map.graph();
    let root = map.root_vertex() as usize;
    let distances = graph_distances(&g, weights, root);
    let height = distances.iter().copied().fold(0.0, f64::max);
    let diameter = graph_diameter(&g, weights, root);
    FppResult { distances, height, diameter }
}

/// Stretch factor of the unrestricted class as a function of `w = C(y)`:
/// `(8w⁴-16w³+4w-1) / ((4w³-6w²-2w+1)(2w-1))`.
pub fn mu_formula_unrestricted(w: f64) -> Result<f64> {
    let num = 8.0 * w.powi(4) - 16.0 * w.powi(3) + 4.0 * w - 1.0;
    let den = (4.0 * w.powi(3) - 6.0 * w * w - 2.0 * w + 1.0) * (2.0 * w - 1.0);
    if den.abs() < 1e-14 {
        return Err(Error::Domain(format!("stretch formula is singular at w = {w}")));
    }
    Ok(num / den)
}

/// The same formula in exact rational arithmetic.
pub fn mu_formula_unrestricted_exact(w: &BigRational) -> Result<BigRational> {
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let p = |k: i32| {
        let mut x = BigRational::one();
        for _ in 0..k {
            x *= w;
        }
        x
    };
    let num = int(8) * p(4) - int(16) * p(3) + int(4) * w - int(1);
    let den = (int(4) * p(3) - int(6) * p(2) - int(2) * w + int(1)) * (int(2) * w - int(1));
    if den.is_zero() {
        return Err(Error::Domain("stretch formula is singular".into()));
    }
    Ok(num / den)
}

/// Solution of the two-variable linear system for the bipartite stretch factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BipartiteMu {
    pub w: f64,
    /// Probability given to the marked edge.
    pub p_edge: f64,
    pub e_l: f64,
    pub e_r: f64,
}

/// `E[L] = Σ w^{ℓ+r} (1{ℓ≤r}(ℓ+E[L]) + 1{ℓ≥r+2}(r+1+E[R])) + p_edge` and
/// `E[R] = Σ w^{ℓ+r} (1{ℓ≤r-2}(ℓ+1+E[L]) + 1{ℓ≥r}(r+E[R]))`, summed over
/// `ℓ + r` even and positive, truncated once `w^{ℓ+r} < 1e-16`.
pub fn mu_bipartite_system(w: f64, p_edge: f64) -> BipartiteMu {
    // E[L] = a0 + a1 E[L] + a2 E[R];  E[R] = b0 + b1 E[L] + b2 E[R].
    let (mut a0, mut a1, mut a2, mut b0, mut b1, mut b2) = (p_edge, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut s = 2usize;
    loop {
        let ws = w.powi(s as i32);
        if ws < 1e-16 {
            break;
        }
        for l in 0..=s {
            let r = s - l;
            let (lf, rf) = (l as f64, r as f64);
            if l <= r {
                a0 += ws * lf;
                a1 += ws;
            } else if l >= r + 2 {
                a0 += ws * (rf + 1.0);
                a2 += ws;
            }
            if l + 2 <= r {
                b0 += ws * (lf + 1.0);
                b1 += ws;
            } else if l >= r {
                b0 += ws * rf;
                b2 += ws;
            }
        }
        s += 2;
    }
    // (1-a1) L - a2 R = a0;  -b1 L + (1-b2) R = b0.
    let det = (1.0 - a1) * (1.0 - b2) - a2 * b1;
    let e_l = (a0 * (1.0 - b2) + a2 * b0) / det;
    let e_r = ((1.0 - a1) * b0 + b1 * a0) / det;
    BipartiteMu { w, p_edge, e_l, e_r }
}

/// `w = C(τ)` of the even-face class, `(√3 - 1)/2`.
pub fn bipartite_w() -> f64 {
    (3f64.sqrt() - 1.0) / 2.0
}

/// The system with the marked-edge probability `(1-w²-w³)/(1-w²)` as stated
/// for the bipartite sampler.
pub fn mu_bipartite() -> BipartiteMu {
    let w = bipartite_w();
    mu_bipartite_system(w, (1.0 - w * w - w.powi(3)) / (1.0 - w * w))
}

/// The system with the marked-edge probability `1 - B'(w)` that makes the
/// pointed sampler's law sum to one.
pub fn mu_bipartite_normalized() -> BipartiteMu {
    let w = bipartite_w();
    let (_, b1) = BlockLaw::Progression { first: 3, step: 2 }.eval_f64(w);
    mu_bipartite_system(w, 1.0 - b1)
}

/// Rational function of `w` given for the bipartite stretch factor.
pub fn mu_bipartite_rational(w: f64) -> f64 {
    let num = 2.0 * w.powi(9) + 2.0 * w.powi(8) - 6.0 * w.powi(7) - 8.0 * w.powi(6) + 5.0 * w.powi(5) + 7.0 * w.powi(4)
        - w.powi(3)
        - 4.0 * w * w
        + 1.0;
    let den = 4.0 * w.powi(8) - 16.0 * w.powi(6) + 19.0 * w.powi(4) - 8.0 * w * w + 1.0;
    num / den
}

/// Total mass of the pointed law: marked-edge probability plus `B'(w)`.
pub fn pointed_law_mass(law: &BlockLaw, w: f64, p_edge: f64) -> f64 {
    p_edge + law.eval_f64(w).1
}

/// `κ = σ / (2μ)`.
pub fn kappa(sigma2: f64, mu: f64) -> f64 {
    sigma2.sqrt() / (2.0 * mu)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Stream tag reserved for stretch-factor estimation.
pub const MU_EXPERIMENT: u64 = 0x6d75;
const MU_CHUNK: usize = 4096;

/// Monte-Carlo mean of the distance between the `*` vertex and the marked
/// vertex of critical pointed Boltzmann dissections. Chunks of samples use
/// their own streams, so the result does not depend on the thread count.
pub fn estimate_mu(tables: &ClassTables, model: &WeightModel, n_samples: usize, seed: u64) -> Result<MuEstimate> {
    model.validate()?;
    let sampler = BoltzmannSampler::critical(tables)?;
    let chunks = n_samples.div_ceil(MU_CHUNK);
    let values: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, MU_EXPERIMENT, c as u64, 0);
            let count = MU_CHUNK.min(n_samples - c * MU_CHUNK);
            (0..count).map(|_| pointed_distance(&sampler, model, &mut rng)).collect()
        })
        .collect();
    let flat: Vec<f64> = values.into_iter().flatten().collect();
    let s = Summary::of(&flat);
    Ok(MuEstimate { mean: s.mean, std_error: s.std_error(), samples: s.count })
}

/// One pointed sample: weights are i.i.d. per edge in preorder of the code.
pub fn pointed_distance<R: RngCore + ?Sized>(sampler: &BoltzmannSampler, model: &WeightModel, rng: &mut R) -> f64 {
    let (d, marked) = sampler.sample_pointed(rng);
    let edges = d.positional_edges();
    let n = d.size() + 1;
    let mut deg = vec![0u32; n + 1];
    for &(a, b) in &edges {
        deg[a as usize + 1] += 1;
        deg[b as usize + 1] += 1;
    }
    for i in 1..=n {
        deg[i] += deg[i - 1];
    }
    let offsets = deg.clone();
    let mut fill = deg;
    let mut targets = vec![0u32; 2 * edges.len()];
    let mut ids = vec![0u32; 2 * edges.len()];
    for (e, &(a, b)) in edges.iter().enumerate() {
        for (x, y) in [(a, b), (b, a)] {
            let slot = fill[x as usize] as usize;
            targets[slot] = y;
            ids[slot] = e as u32;
            fill[x as usize] += 1;
        }
    }
    let weights: Vec<f64> = (0..edges.len()).map(|_| model.draw(rng)).collect();
    let g = Graph { offsets, targets, edges: ids };
    graph_distances(&g, &weights, 0)[marked as usize]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{ClassSpec, FaceSet};
    use crate::sampler::{MapSampler, Mode};

    fn brute_distances(g: &Graph, weights: &[f64], s: usize) -> Vec<f64> {
        // Relax every edge n times (Bellman-Ford) as an independent oracle.
        let n = g.n();
        let mut d = vec![f64::INFINITY; n];
        d[s] = 0.0;
        for _ in 0..n {
            for v in 0..n {
                for (w, e) in g.neighbours(v) {
                    d[w as usize] = d[w as usize].min(d[v] + weights[e as usize]);
                }
            }
        }
        d
    }

    #[test]
    fn parses_weight_models() {
        assert_eq!("unit".parse::<WeightModel>().unwrap(), WeightModel::Unit);
        assert_eq!("exponential(1)".parse::<WeightModel>().unwrap(), WeightModel::Exponential { rate: 1.0 });
        assert_eq!("exp:2".parse::<WeightModel>().unwrap(), WeightModel::Exponential { rate: 2.0 });
        assert_eq!("uniform(0.5,2)".parse::<WeightModel>().unwrap(), WeightModel::Uniform { a: 0.5, b: 2.0 });
        assert_eq!("geom:0.5".parse::<WeightModel>().unwrap(), WeightModel::Geometric { p: 0.5 });
        for bad in ["pareto:1", "uniform:0:1", "exp:-1", "geom:0", "cauchy", "what"] {
            assert!(bad.parse::<WeightModel>().is_err(), "{bad}");
        }
        for m in ["unit", "exp:1.5", "uniform:1:3", "geom:0.25"] {
            assert_eq!(m.parse::<WeightModel>().unwrap().to_string(), m);
        }
    }

    #[test]
    fn weight_means() {
        let mut rng = stream(1, 0, 0, 0);
        for m in [WeightModel::Exponential { rate: 1.0 }, WeightModel::Uniform { a: 1.0, b: 3.0 }, WeightModel::Geometric { p: 0.4 }] {
            let n = 1_000_000;
            let mean = (0..n).map(|_| m.draw(&mut rng)).sum::<f64>() / n as f64;
            assert!((mean / m.mean() - 1.0).abs() < 0.005, "{m} {mean}");
        }
    }

    #[test]
    fn weights_follow_canonical_order() {
        let tri: crate::maps::Dissection = "P(E,E)".parse().unwrap();
        let m = tri.to_map();
        let model = WeightModel::Exponential { rate: 1.0 };
        let a = assign_weights(&m, &model, &mut stream(3, 0, 0, 0));
        let b = assign_weights(&m, &model, &mut stream(3, 0, 0, 0));
        assert_eq!(a, b);
        let mut rng = stream(3, 0, 0, 0);
        let direct: Vec<f64> = (0..3).map(|_| model.draw(&mut rng)).collect();
        // Canonical maps number edges in canonical order.
        assert_eq!(a, direct);
        assert_eq!(assign_weights(&m, &WeightModel::Unit, &mut rng), vec![1.0; 3]);
    }

    #[test]
    fn triangle_shortcut() {
        // Triangle u, v, x with weights uv = 10, ux = 1, vx = 1.
        let m = PlanarMap::from_neighbour_rotations(&[vec![1, 2], vec![2, 0], vec![0, 1]], Some((0, 1))).unwrap();
        let g = m.graph();
        let e = m.edge_index();
        let mut w = vec![0.0; 3];
        for h in 0..6u32 {
            let pair = (m.vertex_of(h).min(m.head(h)), m.vertex_of(h).max(m.head(h)));
            w[e[h as usize] as usize] = if pair == (0, 1) { 10.0 } else { 1.0 };
        }
        assert_eq!(graph_distances(&g, &w, 0)[1], 2.0);
        assert_eq!(diameter_fpp(&m, &w), 2.0);
    }

    #[test]
    fn diameters_on_small_cases() {
        assert_eq!(diameter_fpp(&PlanarMap::single_vertex(), &[]), 0.0);
        let path = PlanarMap::from_neighbour_rotations(&[vec![1], vec![0, 2], vec![1]], Some((0, 1))).unwrap();
        assert_eq!(diameter_fpp(&path, &[1.0, 1.0]), 2.0);
        let r = fpp(&path, &[1.0, 1.0]);
        assert_eq!((r.height, r.diameter), (2.0, 2.0));
    }

    #[test]
    fn distances_and_diameters_match_oracles() {
        let t = ClassTables::build(&ClassSpec::out(), 60).unwrap();
        let s = MapSampler::new(&t, 60, Mode::Exact).unwrap();
        let mut rng = stream(4, 0, 0, 0);
        for i in 0..300 {
            let n = 1 + i % 60;
            let m = s.map(n, &mut rng).unwrap();
            let model = if i % 2 == 0 { WeightModel::Unit } else { WeightModel::Exponential { rate: 1.0 } };
            let w = assign_weights(&m, &model, &mut rng);
            let g = m.graph();
            let mut brute_diam = 0.0f64;
            for v in 0..n {
                let fast = graph_distances(&g, &w, v);
                let slow = brute_distances(&g, &w, v);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-12);
                }
                brute_diam = brute_diam.max(slow.iter().copied().fold(0.0, f64::max));
            }
            let r = fpp(&m, &w);
            assert!((r.diameter - brute_diam).abs() < 1e-12, "n={n}");
            assert!(r.height <= r.diameter + 1e-12 && r.diameter <= 2.0 * r.height + 1e-12);
        }
    }

    #[test]
    fn unrestricted_mu_formula() {
        assert!((mu_formula_unrestricted(0.25).unwrap() - 7.0 / 3.0).abs() < 1e-15);
        let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
        assert_eq!(mu_formula_unrestricted_exact(&quarter).unwrap(), BigRational::new(BigInt::from(7), BigInt::from(3)));
        assert!(mu_formula_unrestricted(0.5).is_err());
    }

    #[test]
    fn bipartite_systems() {
        let w = bipartite_w();
        let lit = mu_bipartite();
        let target = 23.0 / 8.0 - 7.0 / 24.0 * 3f64.sqrt();
        assert!((lit.e_l - target).abs() < 1e-9, "{lit:?}");
        assert!((mu_bipartite_rational(w) - target).abs() < 1e-12);
        assert!(lit.e_r < lit.e_l);
        let norm = mu_bipartite_normalized();
        assert!((norm.e_l - (5.0 - 3f64.sqrt()) / 2.0).abs() < 1e-9, "{norm:?}");
        let law = FaceSet::Even.block_law();
        assert!((pointed_law_mass(&law, w, norm.p_edge) - 1.0).abs() < 1e-14);
        assert!((pointed_law_mass(&law, w, lit.p_edge) - 1.0).abs() > 0.4);
    }

    #[test]
    fn kappa_values() {
        assert!((kappa(18.0, 7.0 / 3.0) - 9.0 / (7.0 * 2f64.sqrt())).abs() < 1e-15);
        let s3 = 3f64.sqrt();
        let k = kappa(9.0 * (s3 - 1.0), 23.0 / 8.0 - 7.0 / 24.0 * s3);
        assert!((k - 36.0 * (s3 - 1.0).sqrt() / (69.0 - 7.0 * s3)).abs() < 1e-12);
        assert!((kappa(18.0, 14.0 / 3.0) - kappa(18.0, 7.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn small_mu_estimates_are_reproducible() {
        let t = ClassTables::build(&ClassSpec::out(), 20).unwrap();
        let a = estimate_mu(&t, &WeightModel::Unit, 20_000, 5).unwrap();
        let b = estimate_mu(&t, &WeightModel::Unit, 20_000, 5).unwrap();
        assert_eq!(a, b);
        assert!((a.mean - 7.0 / 3.0).abs() < 5.0 * a.std_error, "{a:?}");
    }
}
