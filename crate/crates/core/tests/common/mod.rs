//! Brute-force oracle: every labeled rooted simple outerplanar map on a few
//! vertices, built from raw graphs and rotation systems with no library code.

#![allow(dead_code)]

use outerplanar::PlanarMap;

/// A labeled map: edges `(u, v)`, per-vertex cyclic lists of edge indices,
/// and the root as `(edge, tail)`.
#[derive(Clone, Debug)]
pub struct LabeledMap {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    pub rotations: Vec<Vec<u32>>,
    pub root: Option<(u32, u32)>,
}

impl LabeledMap {
    pub fn to_planar_map(&self) -> PlanarMap {
        PlanarMap::from_edge_rotations(&self.edges, &self.rotations, self.root).expect("oracle maps are well formed")
    }
}

fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Cyclic orders of `items`, the first element held fixed.
fn cyclic_orders(items: &[u32]) -> Vec<Vec<u32>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    permutations(&items[1..])
        .into_iter()
        .map(|mut p| {
            p.insert(0, items[0]);
            p
        })
        .collect()
}

fn connected(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
        parent[ra] = rb;
    }
    let r = find(&mut parent, 0);
    (0..n).all(|v| find(&mut parent, v) == r)
}

fn two_colourable(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut colour = vec![u8::MAX; n];
    colour[0] = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            let (a, b) = (a as usize, b as usize);
            for (x, y) in [(a, b), (b, a)] {
                if colour[x] != u8::MAX {
                    if colour[y] == u8::MAX {
                        colour[y] = 1 - colour[x];
                        changed = true;
                    } else if colour[y] == colour[x] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// All labeled rooted maps on `n` vertices whose root face visits every vertex.
pub fn labeled_rooted_maps(n: usize, bipartite_only: bool) -> Vec<LabeledMap> {
    if n == 1 {
        return vec![LabeledMap { n: 1, edges: Vec::new(), rotations: vec![Vec::new()], root: None }];
    }
    let pairs: Vec<(u32, u32)> = (0..n as u32).flat_map(|a| (a + 1..n as u32).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<(u32, u32)> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
        if edges.len() + 1 < n || !connected(n, &edges) || (bipartite_only && !two_colourable(n, &edges)) {
            continue;
        }
        let incident: Vec<Vec<u32>> =
            (0..n as u32).map(|v| edges.iter().enumerate().filter(|(_, &(a, b))| a == v || b == v).map(|(e, _)| e as u32).collect()).collect();
        let choices: Vec<Vec<Vec<u32>>> = incident.iter().map(|inc| cyclic_orders(inc)).collect();
        let mut idx = vec![0usize; n];
        loop {
            let rotations: Vec<Vec<u32>> = (0..n).map(|v| choices[v][idx[v]].clone()).collect();
            collect_roots(n, &edges, &rotations, &mut out);
            // Odometer over the per-vertex choices.
            let mut v = 0;
            while v < n {
                idx[v] += 1;
                if idx[v] < choices[v].len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
            if v == n {
                break;
            }
        }
    }
    out
}

/// Half-edge `2e` runs from the smaller end of edge `e`, `2e + 1` back.
fn collect_roots(n: usize, edges: &[(u32, u32)], rotations: &[Vec<u32>], out: &mut Vec<LabeledMap>) {
    let h = 2 * edges.len();
    let tail = |x: usize| if x % 2 == 0 { edges[x / 2].0 } else { edges[x / 2].1 };
    let mut next = vec![0usize; h];
    for (v, rot) in rotations.iter().enumerate() {
        let half = |e: u32| if edges[e as usize].0 as usize == v { 2 * e as usize } else { 2 * e as usize + 1 };
        for i in 0..rot.len() {
            next[half(rot[i])] = half(rot[(i + 1) % rot.len()]);
        }
    }
    // Faces are orbits of x -> next(opposite(x)).
    let step = |x: usize| next[x ^ 1];
    let mut face_of = vec![usize::MAX; h];
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for s in 0..h {
        if face_of[s] != usize::MAX {
            continue;
        }
        let mut orbit = Vec::new();
        let mut x = s;
        while face_of[x] == usize::MAX {
            face_of[x] = faces.len();
            orbit.push(x);
            x = step(x);
        }
        faces.push(orbit);
    }
    if n as i64 - edges.len() as i64 + faces.len() as i64 != 2 {
        return;
    }
    for r in 0..h {
        let mut seen = vec![false; n];
        for &x in &faces[face_of[r]] {
            seen[tail(x) as usize] = true;
        }
        if seen.iter().all(|&s| s) {
            out.push(LabeledMap { n, edges: edges.to_vec(), rotations: rotations.to_vec(), root: Some(((r / 2) as u32, tail(r))) });
        }
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Unlabeled rooted count: rooted maps have no nontrivial automorphisms, so
/// every one appears `n!` times among the labeled ones.
pub fn brute_force_count(n: usize, bipartite_only: bool) -> usize {
    let all = labeled_rooted_maps(n, bipartite_only);
    assert_eq!(all.len() % factorial(n), 0, "labeled count not divisible by n!");
    all.len() / factorial(n)
}
