//! Decorated trees and their bijection with rooted simple outerplanar maps.
//!
//! A decorated tree gives every vertex an R-structure: an ordered sequence
//! of dissections whose non-`*` vertices are that vertex's children. The
//! children are matched in (block index, Hamilton position) order, and trees
//! are stored breadth-first so that the children of `v` are the contiguous
//! range starting at `1 + sum of the degrees of earlier vertices`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::classes::{BlockLaw, ClassTables};
use crate::error::{Error, Result};
use crate::maps::{blocks, Dissection, PlanarMap};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecoratedTree {
    structures: Vec<Vec<Dissection>>,
}

impl DecoratedTree {
    /// Checks that the degrees form a breadth-first tree on all vertices.
    pub fn from_structures(structures: Vec<Vec<Dissection>>) -> Result<Self> {
        if structures.is_empty() {
            return Err(Error::InvalidTree("a tree needs a root".into()));
        }
        let n = structures.len();
        let mut produced = 1usize;
        for (v, s) in structures.iter().enumerate() {
            if produced <= v {
                return Err(Error::InvalidTree(format!("vertex {v} has no parent")));
            }
            produced += s.iter().map(Dissection::size).sum::<usize>();
        }
        if produced != n {
            return Err(Error::InvalidTree(format!("degrees account for {produced} vertices, tree has {n}")));
        }
        Ok(DecoratedTree { structures })
    }

    pub fn single_vertex() -> Self {
        DecoratedTree { structures: vec![Vec::new()] }
    }

    pub fn n(&self) -> usize {
        self.structures.len()
    }

    pub fn structure(&self, v: usize) -> &[Dissection] {
        &self.structures[v]
    }

    pub fn structures(&self) -> &[Vec<Dissection>] {
        &self.structures
    }

    pub fn degree(&self, v: usize) -> usize {
        self.structures[v].iter().map(Dissection::size).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    /// Parent of every vertex; the root maps to itself.
    pub fn parents(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.n()];
        let mut c = 1;
        for v in 0..self.n() {
            for _ in 0..self.degree(v) {
                out[c] = v as u32;
                c += 1;
            }
        }
        out
    }

    pub fn height(&self) -> usize {
        let p = self.parents();
        let mut depth = vec![0usize; self.n()];
        for v in 1..self.n() {
            depth[v] = depth[p[v] as usize] + 1;
        }
        depth.into_iter().max().unwrap_or(0)
    }

    pub fn conforms(&self, law: &BlockLaw) -> bool {
        self.structures.iter().flatten().all(|d| d.conforms(law))
    }

    /// Nested text: `{D D ...|child child ...}` with dissections in `P(E,E)` notation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let parents_first = first_children(&self.structures);
        // (vertex, next child offset)
        let mut stack = vec![(0usize, 0usize)];
        open_vertex(&mut out, &self.structures[0]);
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            if i < self.degree(v) {
                top.1 += 1;
                let c = parents_first[v] + i;
                open_vertex(&mut out, &self.structures[c]);
                stack.push((c, 0));
            } else {
                out.push('}');
                stack.pop();
            }
        }
        out
    }

    pub fn compose(&self) -> Result<PlanarMap> {
        compose(self)
    }
}

fn open_vertex(out: &mut String, s: &[Dissection]) {
    out.push('{');
    for (i, d) in s.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&d.to_string());
    }
    out.push('|');
}

fn first_children(structures: &[Vec<Dissection>]) -> Vec<usize> {
    let mut next = 1;
    structures
        .iter()
        .map(|s| {
            let f = next;
            next += s.iter().map(Dissection::size).sum::<usize>();
            f
        })
        .collect()
}

impl fmt::Display for DecoratedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for DecoratedTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("decorated tree: {m}"));
        // Depth-first nodes: structure and child node ids.
        let mut nodes: Vec<(Vec<Dissection>, Vec<usize>)> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut rest = s.trim();
        let mut done = false;
        while !rest.is_empty() {
            if done {
                return Err(bad("trailing input"));
            }
            let Some(body) = rest.strip_prefix('{') else {
                if let Some(r) = rest.strip_prefix('}') {
                    stack.pop().ok_or_else(|| bad("unbalanced `}`"))?;
                    done = stack.is_empty();
                    rest = r.trim_start();
                    continue;
                }
                return Err(bad("expected `{` or `}`"));
            };
            let bar = body.find('|').ok_or_else(|| bad("missing `|`"))?;
            let structure = body[..bar].split_whitespace().map(str::parse).collect::<Result<Vec<Dissection>>>()?;
            let id = nodes.len();
            nodes.push((structure, Vec::new()));
            if let Some(&p) = stack.last() {
                nodes[p].1.push(id);
            } else if id > 0 {
                return Err(bad("several roots"));
            }
            stack.push(id);
            rest = body[bar + 1..].trim_start();
        }
        if !done {
            return Err(bad("incomplete"));
        }
        // Breadth-first renumbering.
        let mut order = vec![0usize];
        let mut i = 0;
        while i < order.len() {
            order.extend_from_slice(&nodes[order[i]].1);
            i += 1;
        }
        let mut structures = Vec::with_capacity(nodes.len());
        for &v in &order {
            let deg: usize = nodes[v].0.iter().map(Dissection::size).sum();
            if deg != nodes[v].1.len() {
                return Err(bad(&format!("a vertex has {} children but its R-structure has {deg} vertices", nodes[v].1.len())));
            }
            structures.push(std::mem::take(&mut nodes[v].0));
        }
        DecoratedTree::from_structures(structures)
    }
}

/// Glues every R-structure at its `*` vertices into the tree vertex and
/// matches the remaining vertices with the children. The result is in
/// canonical form, rooted at the first edge of the root's first block.
pub fn compose(t: &DecoratedTree) -> Result<PlanarMap> {
    let n = t.n();
    if n == 1 {
        return Ok(PlanarMap::single_vertex());
    }
    let mut rot: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut next_child = 1u32;
    for (v, s) in t.structures.iter().enumerate() {
        for d in s {
            let label = |p: u32| if p == 0 { v as u32 } else { next_child + p - 1 };
            // A child's parent interval is written before its own blocks because children come later.
            for (p, r) in d.positional_rotations().into_iter().enumerate() {
                let x = label(p as u32) as usize;
                rot[x].extend(r.into_iter().map(label));
            }
            next_child += d.size() as u32;
        }
    }
    PlanarMap::from_neighbour_rotations(&rot, Some((0, 1)))?.canonical()
}

/// Composition that also rejects dissections outside the class.
pub fn compose_in_class(t: &DecoratedTree, law: &BlockLaw) -> Result<PlanarMap> {
    if !t.conforms(law) {
        return Err(Error::InvalidTree("a dissection has a face degree outside the class".into()));
    }
    compose(t)
}

/// Inverse of [`compose`]: the root's blocks in rotation order from the root
/// edge, each re-rooted at its first half-edge and read along its Hamilton
/// cycle, then the same at every other vertex starting after the block it
/// was reached through.
pub fn decompose(m: &PlanarMap) -> Result<DecoratedTree> {
    m.check()?;
    let dec = blocks(m)?;
    let n = m.n_vertices();
    let mut pos = vec![0u32; n];
    let mut structures = Vec::with_capacity(n);
    for &v in &dec.order {
        let mut s = Vec::with_capacity(dec.child_blocks[v as usize].len());
        for &b in &dec.child_blocks[v as usize] {
            let blk = &dec.blocks[b as usize];
            for (i, &g) in blk.hamilton.iter().enumerate() {
                pos[m.vertex_of(g) as usize] = i as u32;
            }
            let adjacency: Vec<Vec<u32>> = blk
                .hamilton
                .iter()
                .map(|&g| {
                    let mut out = Vec::new();
                    let mut x = g;
                    loop {
                        out.push(pos[m.head(x) as usize]);
                        x = dec.next_in_block[x as usize];
                        if x == g {
                            break;
                        }
                    }
                    out
                })
                .collect();
            s.push(Dissection::from_positional(&adjacency)?);
        }
        structures.push(s);
    }
    DecoratedTree::from_structures(structures)
}

/// All dissections of the class with `k` non-`*` vertices.
pub fn enumerate_dissections(law: &BlockLaw, k: usize) -> Vec<Dissection> {
    let mut table: Vec<Vec<Dissection>> = vec![Vec::new(), vec![Dissection::edge()]];
    for size in 2..=k {
        let mut here = Vec::new();
        for arity in 2..=size as u32 {
            if !law.allows(arity) {
                continue;
            }
            for parts in compositions(size, arity as usize) {
                let mut partial: Vec<Vec<u32>> = vec![vec![arity]];
                for &p in &parts {
                    partial = partial
                        .iter()
                        .flat_map(|pre| {
                            table[p].iter().map(move |d| {
                                let mut c = pre.clone();
                                c.extend_from_slice(d.code());
                                c
                            })
                        })
                        .collect();
                }
                here.extend(partial.into_iter().map(Dissection::from_code_unchecked));
            }
        }
        table.push(here);
    }
    table.get(k).cloned().unwrap_or_default()
}

/// Ordered sequences of dissections with `k` non-`*` vertices in total.
pub fn enumerate_rstructures(law: &BlockLaw, k: usize) -> Vec<Vec<Dissection>> {
    let by_size: Vec<Vec<Dissection>> = (0..=k).map(|s| enumerate_dissections(law, s)).collect();
    let mut table: Vec<Vec<Vec<Dissection>>> = vec![vec![Vec::new()]];
    for total in 1..=k {
        let mut here = Vec::new();
        for first in 1..=total {
            for d in &by_size[first] {
                for rest in &table[total - first] {
                    let mut s = vec![d.clone()];
                    s.extend(rest.iter().cloned());
                    here.push(s);
                }
            }
        }
        table.push(here);
    }
    table.swap_remove(k)
}

/// All decorated trees of the class with `n` vertices.
pub fn enumerate_trees(law: &BlockLaw, n: usize) -> Vec<DecoratedTree> {
    if n == 0 {
        return Vec::new();
    }
    let rs: Vec<Vec<Vec<Dissection>>> = (0..n).map(|k| enumerate_rstructures(law, k)).collect();
    let mut out = Vec::new();
    let mut current: Vec<Vec<Dissection>> = Vec::with_capacity(n);
    extend_trees(&rs, n, 1, &mut current, &mut out);
    out
}

/// `produced` counts vertices created so far, decorated or not.
fn extend_trees(rs: &[Vec<Vec<Dissection>>], n: usize, produced: usize, current: &mut Vec<Vec<Dissection>>, out: &mut Vec<DecoratedTree>) {
    let v = current.len();
    if v == n {
        out.push(DecoratedTree { structures: current.clone() });
        return;
    }
    for deg in 0..=(n - produced) {
        // Vertex v must not close the tree early unless it is the last one.
        let closes = produced + deg == v + 1;
        if closes != (v + 1 == n) {
            continue;
        }
        for s in &rs[deg] {
            current.push(s.clone());
            extend_trees(rs, n, produced + deg, current, out);
            current.pop();
        }
    }
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (1..=total.saturating_sub(parts - 1))
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountCheck {
    pub n: usize,
    pub generated: usize,
    pub distinct: usize,
    pub expected: u128,
    /// Every composed map passed validation and every decomposition returned its tree.
    pub consistent: bool,
}

impl CountCheck {
    pub fn passed(&self) -> bool {
        self.consistent && self.generated == self.distinct && self.distinct as u128 == self.expected
    }
}

/// Composes every decorated tree with `n` vertices and compares the number
/// of distinct maps with the tabulated count.
pub fn count_check(tables: &ClassTables, n: usize) -> Result<CountCheck> {
    let law = tables
        .spec
        .block_law()
        .ok_or_else(|| Error::InvalidClass("exhaustive generation needs a face-degree class".into()))?;
    let expected: u128 = tables.map_count(n)?.try_into().map_err(|_| Error::Domain("count too large for exhaustive check".into()))?;
    let trees = enumerate_trees(&law, n);
    let mut seen = HashSet::with_capacity(trees.len());
    let mut consistent = true;
    for t in &trees {
        let m = compose(t)?;
        consistent &= m.validate().is_valid() && m.n_vertices() == n && decompose(&m).is_ok_and(|back| &back == t);
        seen.insert(m);
    }
    Ok(CountCheck { n, generated: trees.len(), distinct: seen.len(), expected, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{ClassSpec, ClassTables, FaceSet};

    fn t(s: &str) -> DecoratedTree {
        s.parse().unwrap()
    }

    #[test]
    fn small_compositions() {
        let m = compose(&DecoratedTree::single_vertex()).unwrap();
        assert_eq!(m, PlanarMap::single_vertex());
        let edge = compose(&t("{E|{|}}")).unwrap();
        assert_eq!((edge.n_vertices(), edge.n_edges()), (2, 1));
        let tri = compose(&t("{P(E,E)|{|}{|}}")).unwrap();
        assert!(tri.validate().is_valid());
        assert_eq!(tri.inner_face_degrees(), vec![3]);
        assert_eq!(tri, "P(E,E)".parse::<Dissection>().unwrap().to_map());
    }

    #[test]
    fn small_decompositions() {
        assert_eq!(decompose(&PlanarMap::single_vertex()).unwrap(), DecoratedTree::single_vertex());
        assert_eq!(decompose(&Dissection::edge().to_map()).unwrap(), t("{E|{|}}"));
        let tri: Dissection = "P(E,E)".parse().unwrap();
        assert_eq!(decompose(&tri.to_map()).unwrap(), t("{P(E,E)|{|}{|}}"));
        let path = PlanarMap::from_neighbour_rotations(&[vec![1], vec![0, 2], vec![1]], Some((0, 1))).unwrap();
        assert_eq!(decompose(&path).unwrap(), t("{E|{E|{|}}}"));
    }

    #[test]
    fn text_round_trip() {
        for s in ["{|}", "{E|{|}}", "{P(E,E)|{|}{|}}", "{E P(E,E,E)|{E|{|}}{|}{|}{|}}"] {
            let tree = t(s);
            assert_eq!(tree.to_text(), s);
        }
        assert!("{E|}".parse::<DecoratedTree>().is_err());
        assert!("{|}{|}".parse::<DecoratedTree>().is_err());
        assert!("{E|{|}".parse::<DecoratedTree>().is_err());
    }

    #[test]
    fn breadth_first_layout() {
        let tree = t("{E P(E,E)|{E|{|}}{|}{|}}");
        assert_eq!(tree.degrees(), vec![3, 1, 0, 0, 0]);
        assert_eq!(tree.parents(), vec![0, 0, 0, 0, 1]);
        assert!(DecoratedTree::from_structures(vec![vec![], vec![Dissection::edge()]]).is_err());
    }

    #[test]
    fn round_trips_on_all_small_trees() {
        let law = FaceSet::All.block_law();
        for n in 1..=5 {
            for tree in enumerate_trees(&law, n) {
                let m = compose(&tree).unwrap();
                assert!(m.validate().is_valid());
                assert_eq!(decompose(&m).unwrap(), tree);
                assert_eq!(compose(&decompose(&m).unwrap()).unwrap(), m);
            }
        }
    }

    #[test]
    fn enumeration_matches_counts() {
        let out = ClassSpec::out();
        let tables = ClassTables::build(&out, 12).unwrap();
        let law = FaceSet::All.block_law();
        let want_c = out.dissection_counts(8).unwrap();
        for k in 1..8 {
            assert_eq!(enumerate_dissections(&law, k).len(), crate::classes::to_f64(&want_c[k]) as usize, "c_{k}");
            assert_eq!(enumerate_rstructures(&law, k).len(), crate::classes::to_f64(&tables.r[k]) as usize, "r_{k}");
        }
        let bip = FaceSet::Even.block_law();
        assert_eq!(enumerate_dissections(&bip, 5).len(), 4);
    }

    #[test]
    fn count_checks() {
        let out = ClassTables::build(&ClassSpec::out(), 12).unwrap();
        for (n, want) in [(3, 3u128), (4, 13), (5, 67)] {
            let c = count_check(&out, n).unwrap();
            assert!(c.passed(), "{c:?}");
            assert_eq!(c.expected, want);
        }
        let bip = ClassTables::build(&ClassSpec::bip(), 12).unwrap();
        let c = count_check(&bip, 4).unwrap();
        assert!(c.passed() && c.expected == 6, "{c:?}");
        for tree in enumerate_trees(&FaceSet::Even.block_law(), 5) {
            assert!(compose(&tree).unwrap().is_bipartite());
        }
    }

    #[test]
    fn bipartite_maps_decompose_into_even_faces() {
        let law = FaceSet::Even.block_law();
        for tree in enumerate_trees(&law, 6) {
            let back = decompose(&compose(&tree).unwrap()).unwrap();
            assert!(back.conforms(&law));
        }
        let tri: Dissection = "P(E,E)".parse().unwrap();
        let bad = DecoratedTree::from_structures(vec![vec![tri], vec![], vec![]]).unwrap();
        assert!(compose_in_class(&bad, &law).is_err());
    }
}
