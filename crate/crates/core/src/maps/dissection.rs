//! Non-separable rooted outerplanar maps, stored as preorder arity codes.
//!
//! Code entry 0 is an edge block; entry `L >= 2` is a polygon whose root face
//! has degree `L + 1`, followed by the codes of its `L` children. In the
//! positional picture the `*` vertex sits at 0 and the other vertices at
//! `1..=k` along the Hamilton cycle.

use std::fmt;
use std::str::FromStr;

use super::PlanarMap;
use crate::classes::BlockLaw;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dissection {
    code: Vec<u32>,
    size: usize,
}

impl Dissection {
    pub fn edge() -> Self {
        Dissection { code: vec![0], size: 1 }
    }

    pub fn polygon(children: Vec<Dissection>) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::Parse("a polygon block needs at least two children".into()));
        }
        let mut code = vec![children.len() as u32];
        let mut size = 0;
        for c in children {
            code.extend_from_slice(&c.code);
            size += c.size;
        }
        Ok(Dissection { code, size })
    }

    /// Validates a preorder arity code.
    pub fn from_code(code: Vec<u32>) -> Result<Self> {
        let mut open = 1usize;
        let mut size = 0;
        for (i, &x) in code.iter().enumerate() {
            if open == 0 {
                return Err(Error::Parse(format!("trailing entries after position {i}")));
            }
            if x == 1 {
                return Err(Error::Parse("arity 1 is not a polygon".into()));
            }
            open = open - 1 + x as usize;
            size += usize::from(x == 0);
        }
        if open != 0 || code.is_empty() {
            return Err(Error::Parse("incomplete dissection code".into()));
        }
        Ok(Dissection { code, size })
    }

    pub(crate) fn from_code_unchecked(code: Vec<u32>) -> Self {
        let size = code.iter().filter(|&&x| x == 0).count();
        Dissection { code, size }
    }

    pub fn code(&self) -> &[u32] {
        &self.code
    }

    /// Number of non-`*` vertices, equal to the number of edge leaves.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_edges(&self) -> usize {
        self.code.len()
    }

    pub fn inner_faces(&self) -> usize {
        self.code.len() - self.size
    }

    pub fn is_edge(&self) -> bool {
        self.code[0] == 0
    }

    pub fn children(&self) -> Vec<Dissection> {
        let mut out = Vec::with_capacity(self.code[0] as usize);
        let mut i = 1;
        while i < self.code.len() {
            let mut open = 1usize;
            let start = i;
            while open > 0 {
                open = open - 1 + self.code[i] as usize;
                i += 1;
            }
            out.push(Dissection::from_code_unchecked(self.code[start..i].to_vec()));
        }
        out
    }

    /// Degrees of the inner faces in preorder.
    pub fn face_degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.code.iter().filter(|&&x| x > 0).map(|&x| x + 1)
    }

    pub fn conforms(&self, law: &BlockLaw) -> bool {
        self.code.iter().all(|&x| x == 0 || law.allows(x))
    }

    /// Leaf count and code length of the subtree starting at each code index.
    fn subtree_sizes(&self) -> (Vec<u32>, Vec<u32>) {
        let n = self.code.len();
        let mut leaves = vec![0u32; n];
        let mut lens = vec![0u32; n];
        let mut stack: Vec<(u32, u32)> = Vec::new();
        for i in (0..n).rev() {
            let (mut l, mut s) = (0u32, 1u32);
            if self.code[i] == 0 {
                l = 1;
            } else {
                for _ in 0..self.code[i] {
                    let (cl, cs) = stack.pop().expect("validated code");
                    l += cl;
                    s += cs;
                }
            }
            leaves[i] = l;
            lens[i] = s;
            stack.push((l, s));
        }
        (leaves, lens)
    }

    /// Edges as position pairs `(star, first)`, one per code entry in preorder.
    /// The `*` vertex is position 0.
    pub fn positional_edges(&self) -> Vec<(u32, u32)> {
        let (leaves, lens) = self.subtree_sizes();
        let mut out = vec![(0, 0); self.code.len()];
        // (code index, star position, first position)
        let mut stack = vec![(0usize, 0u32, 1u32)];
        while let Some((i, star, first)) = stack.pop() {
            out[i] = (star, first);
            let arity = self.code[i];
            let mut a = first;
            let mut j = i + 1;
            for c in 0..arity {
                let child_star = if c + 1 == arity { star } else { a + leaves[j] };
                stack.push((j, child_star, a));
                a += leaves[j];
                j += lens[j] as usize;
            }
        }
        out
    }

    /// Neighbour lists by position, each in counterclockwise order: at
    /// position `p` neighbours are sorted by `(q - p) mod (k + 1)`.
    pub fn positional_rotations(&self) -> Vec<Vec<u32>> {
        let k1 = self.size as u32 + 1;
        let mut rot = vec![Vec::new(); k1 as usize];
        for (a, b) in self.positional_edges() {
            rot[a as usize].push(b);
            rot[b as usize].push(a);
        }
        for (p, r) in rot.iter_mut().enumerate() {
            let p = p as u32;
            r.sort_unstable_by_key(|&q| (q + k1 - p) % k1);
        }
        rot
    }

    /// Inverse of [`positional_edges`](Self::positional_edges): rebuilds the
    /// dissection from neighbour lists by position (any order within a list).
    pub fn from_positional(adjacency: &[Vec<u32>]) -> Result<Self> {
        let bad = || Error::InvalidMap("block is not a dissection of its Hamilton cycle".into());
        let k = adjacency.len().checked_sub(1).filter(|&k| k > 0).ok_or_else(bad)? as u32;
        // The `*` vertex is read as position k + 1 so that every segment's star lies just past it.
        let lift = |q: u32| if q == 0 { k + 1 } else { q };
        let max_in = |p: u32, lo: u32, hi: u32| -> Option<u32> {
            adjacency[if p == k + 1 { 0 } else { p as usize }].iter().map(|&q| lift(q)).filter(|&q| q > lo && q <= hi).max()
        };
        let mut code = Vec::with_capacity(2 * k as usize);
        let mut stack = vec![(1u32, k)];
        while let Some((f, e)) = stack.pop() {
            if f == e {
                code.push(0);
                continue;
            }
            let mut corners = vec![f];
            let mut a = max_in(f, f, e).ok_or_else(bad)?;
            while a != e + 1 {
                corners.push(a);
                a = max_in(a, a, e + 1).ok_or_else(bad)?;
            }
            corners.push(e + 1);
            let arity = corners.len() as u32 - 1;
            if arity < 2 {
                return Err(bad());
            }
            code.push(arity);
            for w in corners.windows(2).rev() {
                stack.push((w[0], w[1] - 1));
            }
        }
        let d = Dissection::from_code(code).map_err(|_| bad())?;
        // Reject inputs with extra or missing edges.
        let mut want: Vec<(u32, u32)> = d.positional_edges().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        let mut have: Vec<(u32, u32)> = Vec::with_capacity(want.len());
        for (p, r) in adjacency.iter().enumerate() {
            for &q in r {
                if (p as u32) < q {
                    have.push((p as u32, q));
                }
            }
        }
        want.sort_unstable();
        have.sort_unstable();
        if want != have {
            return Err(bad());
        }
        Ok(d)
    }

    pub fn to_map(&self) -> PlanarMap {
        dissection_to_map(self)
    }
}

/// The rooted map of a dissection: root vertex `*`, root edge from `*` to the
/// first Hamilton vertex, outer face the Hamilton cycle.
pub fn dissection_to_map(d: &Dissection) -> PlanarMap {
    PlanarMap::from_neighbour_rotations(&d.positional_rotations(), Some((0, 1)))
        .and_then(|m| m.canonical())
        .expect("dissection codes always give simple connected maps")
}

impl fmt::Display for Dissection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::with_capacity(self.code.len() * 3);
        // (children still to close, whether a child has been written)
        let mut stack: Vec<(u32, bool)> = Vec::new();
        for &x in &self.code {
            if let Some(top) = stack.last_mut() {
                if top.1 {
                    out.push(',');
                }
                top.1 = true;
            }
            if x > 0 {
                out.push_str("P(");
                stack.push((x, false));
                continue;
            }
            out.push('E');
            while let Some(top) = stack.last_mut() {
                top.0 -= 1;
                if top.0 > 0 {
                    break;
                }
                out.push(')');
                stack.pop();
            }
        }
        f.write_str(&out)
    }
}

impl FromStr for Dissection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("dissection `{s}`: {m}"));
        let mut code = Vec::new();
        // (code index of the polygon, children seen)
        let mut stack: Vec<(usize, u32)> = Vec::new();
        let mut chars = s.chars().filter(|c| !c.is_whitespace()).peekable();
        let mut expect_item = true;
        while let Some(c) = chars.next() {
            match (c, expect_item) {
                ('E', true) => {
                    code.push(0);
                    if let Some(t) = stack.last_mut() {
                        t.1 += 1;
                    }
                    expect_item = false;
                }
                ('P', true) => {
                    if chars.next() != Some('(') {
                        return Err(bad("expected `(` after P"));
                    }
                    if let Some(t) = stack.last_mut() {
                        t.1 += 1;
                    }
                    stack.push((code.len(), 0));
                    code.push(0);
                }
                (',', false) if !stack.is_empty() => expect_item = true,
                (')', false) => {
                    let (i, n) = stack.pop().ok_or_else(|| bad("unbalanced `)`"))?;
                    code[i] = n;
                }
                _ => return Err(bad(&format!("unexpected `{c}`"))),
            }
            if stack.is_empty() && !expect_item && chars.peek().is_some() {
                return Err(bad("trailing input"));
            }
        }
        if !stack.is_empty() || expect_item {
            return Err(bad("incomplete"));
        }
        Dissection::from_code(code).map_err(|e| bad(&e.to_string()))
    }
}
