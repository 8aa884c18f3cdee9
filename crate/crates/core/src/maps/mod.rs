//! Rooted planar maps as rotation systems on half-edges.
//!
//! `next` turns counterclockwise around a vertex and `opposite` flips a
//! half-edge. The face to the right of `h` is traced by `h -> next[opposite[h]]`,
//! so the outer face is the orbit of the root under that permutation.

mod blocks;
mod dissection;

use std::collections::VecDeque;
use std::fmt::Write as _;

pub use blocks::{blocks, Block, BlockDecomposition};
pub use dissection::{dissection_to_map, Dissection};

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlanarMap {
    opposite: Vec<u32>,
    next: Vec<u32>,
    vertex_of: Vec<u32>,
    n_vertices: usize,
    root: Option<u32>,
}

/// Outcome of each structural check in [`PlanarMap::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics {
    pub permutations: bool,
    pub connected: bool,
    pub genus_zero: bool,
    pub simple: bool,
    pub outerplanar: bool,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
}

impl Diagnostics {
    pub fn is_valid(&self) -> bool {
        self.permutations && self.connected && self.genus_zero && self.simple && self.outerplanar
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let checks = [
            (self.permutations, "permutations"),
            (self.connected, "connected"),
            (self.genus_zero, "genus_zero"),
            (self.simple, "simple"),
            (self.outerplanar, "outerplanar"),
        ];
        checks.iter().filter(|(ok, _)| !ok).map(|(_, n)| *n).collect()
    }
}

/// Compressed adjacency: the neighbours of `v` are `targets[offsets[v]..offsets[v+1]]`
/// in rotation order, with the edge index of each.
#[derive(Clone, Debug)]
pub struct Graph {
    pub offsets: Vec<u32>,
    pub targets: Vec<u32>,
    pub edges: Vec<u32>,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let (a, b) = (self.offsets[v] as usize, self.offsets[v + 1] as usize);
        self.targets[a..b].iter().copied().zip(self.edges[a..b].iter().copied())
    }
}

impl PlanarMap {
    /// The map with one vertex and no edges.
    pub fn single_vertex() -> Self {
        PlanarMap { opposite: Vec::new(), next: Vec::new(), vertex_of: Vec::new(), n_vertices: 1, root: None }
    }

    /// Checks only array shapes and index ranges; [`validate`](Self::validate)
    /// reports the combinatorial invariants.
    pub fn from_parts(opposite: Vec<u32>, next: Vec<u32>, vertex_of: Vec<u32>, n_vertices: usize, root: Option<u32>) -> Result<Self> {
        let h = opposite.len();
        if next.len() != h || vertex_of.len() != h {
            return Err(Error::InvalidMap("half-edge arrays differ in length".into()));
        }
        if h % 2 != 0 {
            return Err(Error::InvalidMap("odd number of half-edges".into()));
        }
        if opposite.iter().chain(&next).any(|&x| x as usize >= h) {
            return Err(Error::InvalidMap("half-edge index out of range".into()));
        }
        if vertex_of.iter().any(|&v| v as usize >= n_vertices) {
            return Err(Error::InvalidMap("vertex index out of range".into()));
        }
        if n_vertices == 0 {
            return Err(Error::InvalidMap("a map needs at least one vertex".into()));
        }
        match root {
            None if h > 0 => return Err(Error::InvalidMap("a map with edges needs a root".into())),
            Some(r) if r as usize >= h => return Err(Error::InvalidMap("root out of range".into())),
            _ => {}
        }
        Ok(PlanarMap { opposite, next, vertex_of, n_vertices, root })
    }

    /// Simple map from counterclockwise neighbour lists; `root` is `(tail, head)`.
    pub fn from_neighbour_rotations(rotations: &[Vec<u32>], root: Option<(u32, u32)>) -> Result<Self> {
        let mut start = Vec::with_capacity(rotations.len() + 1);
        let mut total = 0u32;
        for r in rotations {
            start.push(total);
            total += r.len() as u32;
        }
        start.push(total);
        let h = total as usize;
        let mut next = vec![0u32; h];
        let mut vertex_of = vec![0u32; h];
        let mut head = vec![0u32; h];
        for (v, r) in rotations.iter().enumerate() {
            let s = start[v];
            for (i, &w) in r.iter().enumerate() {
                let id = s + i as u32;
                next[id as usize] = s + ((i + 1) % r.len()) as u32;
                vertex_of[id as usize] = v as u32;
                head[id as usize] = w;
            }
        }
        let find = |u: u32, w: u32| -> Result<u32> {
            let r = rotations.get(u as usize).ok_or_else(|| Error::InvalidMap(format!("no vertex {u}")))?;
            let mut hits = r.iter().enumerate().filter(|(_, &x)| x == w);
            let (i, _) = hits.next().ok_or_else(|| Error::InvalidMap(format!("{u} lists {w} but not conversely")))?;
            if hits.next().is_some() {
                return Err(Error::InvalidMap(format!("parallel edges between {u} and {w}")));
            }
            Ok(start[u as usize] + i as u32)
        };
        let mut opposite = vec![0u32; h];
        for id in 0..h {
            opposite[id] = find(head[id], vertex_of[id])?;
        }
        let root = root.map(|(u, w)| find(u, w)).transpose()?;
        PlanarMap::from_parts(opposite, next, vertex_of, rotations.len().max(1), root)
    }

    /// Map from counterclockwise lists of edge indices at each vertex; allows
    /// parallel edges. `root` is `(edge, tail vertex)`.
    pub fn from_edge_rotations(edges: &[(u32, u32)], rotations: &[Vec<u32>], root: Option<(u32, u32)>) -> Result<Self> {
        let mut ends: Vec<[u32; 2]> = vec![[NONE; 2]; edges.len()];
        let mut next = Vec::new();
        let mut vertex_of = Vec::new();
        for (v, r) in rotations.iter().enumerate() {
            let s = next.len() as u32;
            for (i, &e) in r.iter().enumerate() {
                let id = s + i as u32;
                next.push(s + ((i + 1) % r.len()) as u32);
                vertex_of.push(v as u32);
                let (a, b) = *edges.get(e as usize).ok_or_else(|| Error::InvalidMap(format!("no edge {e}")))?;
                let side = if a == v as u32 && ends[e as usize][0] == NONE {
                    0
                } else if b == v as u32 {
                    1
                } else {
                    return Err(Error::InvalidMap(format!("edge {e} listed at non-incident vertex {v}")));
                };
                ends[e as usize][side] = id;
            }
        }
        let mut opposite = vec![NONE; next.len()];
        for (e, [x, y]) in ends.iter().enumerate() {
            if *x == NONE || *y == NONE {
                return Err(Error::InvalidMap(format!("edge {e} is missing an end")));
            }
            opposite[*x as usize] = *y;
            opposite[*y as usize] = *x;
        }
        let root = match root {
            Some((e, tail)) => {
                let [x, y] = ends[e as usize];
                Some(if vertex_of[x as usize] == tail { x } else { y })
            }
            None => None,
        };
        PlanarMap::from_parts(opposite, next, vertex_of, rotations.len().max(1), root)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_half_edges(&self) -> usize {
        self.opposite.len()
    }

    pub fn n_edges(&self) -> usize {
        self.opposite.len() / 2
    }

    pub fn root(&self) -> Option<u32> {
        self.root
    }

    pub fn opposite(&self, h: u32) -> u32 {
        self.opposite[h as usize]
    }

    pub fn next(&self, h: u32) -> u32 {
        self.next[h as usize]
    }

    pub fn vertex_of(&self, h: u32) -> u32 {
        self.vertex_of[h as usize]
    }

    /// Head of `h`.
    pub fn head(&self, h: u32) -> u32 {
        self.vertex_of[self.opposite[h as usize] as usize]
    }

    /// Root vertex; vertex 0 for the single-vertex map.
    pub fn root_vertex(&self) -> u32 {
        self.root.map_or(0, |r| self.vertex_of(r))
    }

    /// Face to the right of `h` continues with this half-edge.
    pub fn face_step(&self, h: u32) -> u32 {
        self.next[self.opposite[h as usize] as usize]
    }

    /// One half-edge leaving each vertex (`NONE` for isolated vertices).
    pub fn corner_of_vertex(&self) -> Vec<u32> {
        let mut out = vec![NONE; self.n_vertices];
        for (h, &v) in self.vertex_of.iter().enumerate() {
            if out[v as usize] == NONE {
                out[v as usize] = h as u32;
            }
        }
        out
    }

    /// Edge index of each half-edge: edges numbered by their smaller half-edge.
    pub fn edge_index(&self) -> Vec<u32> {
        let mut idx = vec![NONE; self.opposite.len()];
        let mut e = 0;
        for h in 0..self.opposite.len() {
            if idx[h] == NONE {
                idx[h] = e;
                idx[self.opposite[h] as usize] = e;
                e += 1;
            }
        }
        idx
    }

    /// Whether half-edges `2i, 2i+1` form edge `i` (true for canonical maps).
    pub fn has_paired_labels(&self) -> bool {
        self.opposite.iter().enumerate().all(|(h, &o)| o as usize == h ^ 1)
    }

    pub fn graph(&self) -> Graph {
        let corners = self.corner_of_vertex();
        let edge = self.edge_index();
        let mut offsets = Vec::with_capacity(self.n_vertices + 1);
        let mut targets = Vec::with_capacity(self.opposite.len());
        let mut edges = Vec::with_capacity(self.opposite.len());
        offsets.push(0);
        for &c in &corners {
            if c != NONE {
                let mut h = c;
                loop {
                    targets.push(self.head(h));
                    edges.push(edge[h as usize]);
                    h = self.next(h);
                    if h == c {
                        break;
                    }
                }
            }
            offsets.push(targets.len() as u32);
        }
        Graph { offsets, targets, edges }
    }

    /// Face cycles as lists of half-edges, each face to the right of its members.
    pub fn faces(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.opposite.len()];
        let mut out = Vec::new();
        for s in 0..self.opposite.len() as u32 {
            if seen[s as usize] {
                continue;
            }
            let mut face = Vec::new();
            let mut h = s;
            while !seen[h as usize] {
                seen[h as usize] = true;
                face.push(h);
                h = self.face_step(h);
            }
            out.push(face);
        }
        out
    }

    /// Half-edges of the outer face, starting at the root.
    pub fn outer_face(&self) -> Vec<u32> {
        let Some(r) = self.root else { return Vec::new() };
        let mut out = vec![r];
        let mut h = self.face_step(r);
        while h != r {
            out.push(h);
            h = self.face_step(h);
        }
        out
    }

    /// Degrees of the faces other than the outer face.
    pub fn inner_face_degrees(&self) -> Vec<usize> {
        let Some(r) = self.root else { return Vec::new() };
        self.faces().into_iter().filter(|f| !f.contains(&r)).map(|f| f.len()).collect()
    }

    pub fn validate(&self) -> Diagnostics {
        let h = self.opposite.len();
        let mut d = Diagnostics {
            permutations: true,
            connected: true,
            genus_zero: true,
            simple: true,
            outerplanar: true,
            vertices: self.n_vertices,
            edges: h / 2,
            faces: 0,
        };
        if h == 0 {
            d.faces = 1;
            d.connected = self.n_vertices == 1;
            d.genus_zero = self.n_vertices == 1;
            return d;
        }
        // Involution without fixed points, and `next` a permutation whose cycles are the vertices.
        let mut hit = vec![false; h];
        for x in 0..h {
            let o = self.opposite[x] as usize;
            if o == x || self.opposite[o] as usize != x {
                d.permutations = false;
            }
            let n = self.next[x] as usize;
            if hit[n] {
                d.permutations = false;
            }
            hit[n] = true;
            if self.vertex_of[n] != self.vertex_of[x] {
                d.permutations = false;
            }
        }
        if d.permutations {
            let mut cycles = vec![0u32; self.n_vertices];
            let mut seen = vec![false; h];
            for s in 0..h {
                if !seen[s] {
                    cycles[self.vertex_of[s] as usize] += 1;
                    let mut x = s;
                    while !seen[x] {
                        seen[x] = true;
                        x = self.next[x] as usize;
                    }
                }
            }
            if cycles.iter().any(|&c| c != 1) {
                d.permutations = false;
            }
        }
        if !d.permutations {
            d.connected = false;
            d.genus_zero = false;
            d.simple = false;
            d.outerplanar = false;
            return d;
        }
        // Connectivity over half-edges.
        let mut seen = vec![false; h];
        let mut stack = vec![self.root.unwrap_or(0)];
        seen[stack[0] as usize] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for y in [self.opposite[x as usize], self.next[x as usize]] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        d.connected = count == h;
        d.faces = self.faces().len();
        d.genus_zero = d.connected && self.n_vertices as i64 - (h / 2) as i64 + d.faces as i64 == 2;
        // Simplicity: no loops, no repeated endpoint pairs.
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(h / 2);
        for x in 0..h as u32 {
            let (a, b) = (self.vertex_of(x), self.head(x));
            if a == b {
                d.simple = false;
            }
            if x < self.opposite(x) {
                pairs.push((a.min(b), a.max(b)));
            }
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            d.simple = false;
        }
        let mut on_outer = vec![false; self.n_vertices];
        for x in self.outer_face() {
            on_outer[self.vertex_of(x) as usize] = true;
        }
        d.outerplanar = on_outer.iter().all(|&b| b);
        d
    }

    /// Errors unless every invariant holds.
    pub fn check(&self) -> Result<()> {
        let d = self.validate();
        if d.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidMap(format!("failed checks: {}", d.failures().join(", "))))
        }
    }

    /// Edge order: root edge, the rest of the root rotation counterclockwise,
    /// then breadth-first by discovery, each new vertex scanned
    /// counterclockwise from its entry half-edge. Returns edge indices as in
    /// [`edge_index`](Self::edge_index).
    pub fn canonical_edge_order(&self) -> Result<Vec<u32>> {
        let (order, _, _) = self.bfs_labels()?;
        let edge = self.edge_index();
        Ok(order.iter().map(|&h| edge[h as usize]).collect())
    }

    /// Discovery half-edge of each edge in canonical order, the new label of
    /// every vertex, and the new label of every half-edge.
    fn bfs_labels(&self) -> Result<(Vec<u32>, Vec<u32>, Vec<u32>)> {
        let Some(root) = self.root else {
            return Err(Error::InvalidMap("the single-vertex map has no edges".into()));
        };
        let h = self.opposite.len();
        let mut half_label = vec![NONE; h];
        let mut vertex_label = vec![NONE; self.n_vertices];
        let mut order = Vec::with_capacity(h / 2);
        let mut queue = VecDeque::new();
        vertex_label[self.vertex_of(root) as usize] = 0;
        let mut nv = 1;
        queue.push_back(root);
        while let Some(start) = queue.pop_front() {
            let mut x = start;
            loop {
                if half_label[x as usize] == NONE {
                    let e = order.len() as u32;
                    half_label[x as usize] = 2 * e;
                    half_label[self.opposite(x) as usize] = 2 * e + 1;
                    order.push(x);
                    let u = self.head(x);
                    if vertex_label[u as usize] == NONE {
                        vertex_label[u as usize] = nv;
                        nv += 1;
                        queue.push_back(self.opposite(x));
                    }
                }
                x = self.next(x);
                if x == start {
                    break;
                }
            }
        }
        if order.len() * 2 != h || nv as usize != self.n_vertices {
            return Err(Error::InvalidMap("map is not connected".into()));
        }
        Ok((order, vertex_label, half_label))
    }

    /// Relabeling that depends only on the rooted map: edge `i` of the
    /// canonical order gets half-edges `2i` (discovery direction) and `2i+1`,
    /// vertices are numbered by discovery, and the root is half-edge 0.
    pub fn canonical(&self) -> Result<PlanarMap> {
        if self.root.is_none() {
            return if self.n_vertices == 1 { Ok(self.clone()) } else { Err(Error::InvalidMap("edgeless map with several vertices".into())) };
        }
        let (_, vl, hl) = self.bfs_labels()?;
        let h = self.opposite.len();
        let mut next = vec![0u32; h];
        let mut vertex_of = vec![0u32; h];
        let opposite: Vec<u32> = (0..h as u32).map(|x| x ^ 1).collect();
        for x in 0..h {
            next[hl[x] as usize] = hl[self.next[x] as usize];
            vertex_of[hl[x] as usize] = vl[self.vertex_of[x] as usize];
        }
        Ok(PlanarMap { opposite, next, vertex_of, n_vertices: self.n_vertices, root: Some(0) })
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical().is_ok_and(|c| &c == self)
    }

    /// Two-colouring of the vertices, if one exists.
    pub fn is_bipartite(&self) -> bool {
        let g = self.graph();
        let mut colour = vec![u8::MAX; self.n_vertices];
        for s in 0..self.n_vertices {
            if colour[s] != u8::MAX {
                continue;
            }
            colour[s] = 0;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for (w, _) in g.neighbours(v) {
                    let w = w as usize;
                    if colour[w] == u8::MAX {
                        colour[w] = 1 - colour[v];
                        stack.push(w);
                    } else if colour[w] == colour[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Text form: header, vertex count, root, one `e a b` line per opposite
    /// pair and one `v` line per vertex listing its rotation from the
    /// smallest half-edge.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "outerplanar-map v1");
        let _ = writeln!(out, "vertices {}", self.n_vertices);
        let _ = writeln!(out, "halfedges {}", self.opposite.len());
        match self.root {
            Some(r) => {
                let _ = writeln!(out, "root {r}");
            }
            None => {
                let _ = writeln!(out, "root none");
            }
        }
        for (x, &o) in self.opposite.iter().enumerate() {
            if (x as u32) < o {
                let _ = writeln!(out, "e {x} {o}");
            }
        }
        let corners = self.corner_of_vertex();
        for (v, &c) in corners.iter().enumerate() {
            let _ = write!(out, "v {v}");
            if c != NONE {
                let mut x = c;
                loop {
                    let _ = write!(out, " {x}");
                    x = self.next(x);
                    if x == c {
                        break;
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PlanarMap> {
        let bad = |m: &str| Error::Parse(format!("map text: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("outerplanar-map v1") {
            return Err(bad("missing header"));
        }
        let mut value = |key: &str| -> Result<String> {
            let l = lines.next().ok_or_else(|| bad(&format!("missing {key}")))?;
            l.trim().strip_prefix(key).map(|s| s.trim().to_owned()).ok_or_else(|| bad(&format!("expected {key}")))
        };
        let n: usize = value("vertices")?.parse().map_err(|_| bad("vertex count"))?;
        let h: usize = value("halfedges")?.parse().map_err(|_| bad("half-edge count"))?;
        let root = match value("root")?.as_str() {
            "none" => None,
            r => Some(r.parse::<u32>().map_err(|_| bad("root"))?),
        };
        let mut opposite = vec![NONE; h];
        let mut next = vec![NONE; h];
        let mut vertex_of = vec![NONE; h];
        for l in lines {
            let mut it = l.split_whitespace();
            let tag = it.next();
            let nums: Vec<u32> = it.map(|x| x.parse().map_err(|_| bad("number"))).collect::<Result<_>>()?;
            if nums.iter().skip(usize::from(tag == Some("v"))).any(|&x| x as usize >= h) {
                return Err(bad("half-edge out of range"));
            }
            match (tag, nums.as_slice()) {
                (Some("e"), [a, b]) => {
                    opposite[*a as usize] = *b;
                    opposite[*b as usize] = *a;
                }
                (Some("v"), [v, cycle @ ..]) => {
                    for (i, &x) in cycle.iter().enumerate() {
                        next[x as usize] = cycle[(i + 1) % cycle.len()];
                        vertex_of[x as usize] = *v;
                    }
                }
                _ => return Err(bad(&format!("unexpected line `{l}`"))),
            }
        }
        if opposite.iter().chain(&next).chain(&vertex_of).any(|&x| x == NONE) {
            return Err(bad("incomplete rotation system"));
        }
        PlanarMap::from_parts(opposite, next, vertex_of, n, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle() -> PlanarMap {
        PlanarMap::from_neighbour_rotations(&[vec![1, 2], vec![2, 0], vec![0, 1]], Some((0, 1))).unwrap()
    }

    #[test]
    fn single_vertex_is_valid() {
        let m = PlanarMap::single_vertex();
        let d = m.validate();
        assert!(d.is_valid());
        assert_eq!((d.vertices, d.edges, d.faces), (1, 0, 1));
        assert!(m.canonical_edge_order().is_err());
    }

    #[test]
    fn triangle_is_valid() {
        let d = triangle().validate();
        assert!(d.is_valid(), "{:?}", d.failures());
        assert_eq!((d.vertices, d.edges, d.faces), (3, 3, 2));
    }

    #[test]
    fn doubled_edge_is_not_simple() {
        // Triangle 0-1-2 with a second copy of edge {0,1} drawn outside.
        let edges = [(0, 1), (1, 2), (2, 0), (0, 1)];
        let rot = [vec![0, 2, 3], vec![1, 0, 3], vec![2, 1]];
        let m = PlanarMap::from_edge_rotations(&edges, &rot, Some((0, 0))).unwrap();
        let d = m.validate();
        assert!(!d.simple);
        assert!(d.permutations && d.connected);
    }

    #[test]
    fn inner_vertex_is_not_outerplanar() {
        // Wheel with three spokes: the hub is not on the outer face.
        let rot = [vec![1, 3, 2], vec![2, 3, 0], vec![0, 3, 1], vec![0, 1, 2]];
        let m = PlanarMap::from_neighbour_rotations(&rot, Some((0, 1))).unwrap();
        let d = m.validate();
        assert!(d.genus_zero && d.simple, "{d:?}");
        assert!(!d.outerplanar);
    }

    #[test]
    fn edge_order_on_triangle() {
        let m = triangle();
        let e = m.edge_index();
        let order = m.canonical_edge_order().unwrap();
        let find = |u: u32, w: u32| (0..6u32).find(|&h| m.vertex_of(h) == u && m.head(h) == w).unwrap();
        assert_eq!(order, vec![e[find(0, 1) as usize], e[find(0, 2) as usize], e[find(1, 2) as usize]]);
    }

    #[test]
    fn edge_order_on_star() {
        let rot = [vec![1, 2, 3], vec![0], vec![0], vec![0]];
        let m = PlanarMap::from_neighbour_rotations(&rot, Some((0, 2))).unwrap();
        let e = m.edge_index();
        let h = |w: u32| (0..6u32).find(|&h| m.vertex_of(h) == 0 && m.head(h) == w).unwrap();
        let order = m.canonical_edge_order().unwrap();
        assert_eq!(order, vec![e[h(2) as usize], e[h(3) as usize], e[h(1) as usize]]);
    }

    #[test]
    fn canonical_form_ignores_labels() {
        let m = triangle();
        let c = m.canonical().unwrap();
        assert!(c.is_canonical());
        assert_eq!(c.root(), Some(0));
        // Relabel half-edges by a fixed permutation and recanonicalize.
        let perm = [3u32, 5, 0, 4, 1, 2];
        let inv = {
            let mut inv = [0u32; 6];
            for (i, &p) in perm.iter().enumerate() {
                inv[p as usize] = i as u32;
            }
            inv
        };
        let opp: Vec<u32> = (0..6).map(|x| perm[m.opposite(inv[x]) as usize]).collect();
        let nxt: Vec<u32> = (0..6).map(|x| perm[m.next(inv[x]) as usize]).collect();
        let vof: Vec<u32> = (0..6).map(|x| m.vertex_of(inv[x])).collect();
        let relabeled = PlanarMap::from_parts(opp, nxt, vof, 3, Some(perm[m.root().unwrap() as usize])).unwrap();
        assert_eq!(relabeled.canonical().unwrap(), c);
    }

    #[test]
    fn text_round_trip() {
        for m in [PlanarMap::single_vertex(), triangle(), triangle().canonical().unwrap()] {
            let t = m.to_text();
            let back = PlanarMap::from_text(&t).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_text(), t);
        }
        assert!(PlanarMap::from_text("outerplanar-map v1\nvertices 2\nhalfedges 2\nroot 0\ne 0 1\nv 0 0\n").is_err());
    }

    #[test]
    fn bipartite_check() {
        assert!(!triangle().is_bipartite());
        let square = PlanarMap::from_neighbour_rotations(&[vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]], Some((0, 1))).unwrap();
        assert!(square.is_bipartite());
        assert!(square.validate().is_valid());
    }
}
