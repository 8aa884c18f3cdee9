//! Maximal non-separable submaps, attached at articulation vertices.
//!
//! In an outerplanar embedding the half-edges of one block form a contiguous
//! interval of the rotation at each of its vertices, so the rotation inside a
//! block (`next_in_block`) wraps within that interval.

use std::collections::VecDeque;

use super::{PlanarMap, NONE};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    /// Articulation vertex through which the block was reached from the root.
    pub star: u32,
    /// Hamilton cycle of the block as half-edges `g_0, ..., g_k`: `g_0` leaves
    /// the star and is the block's root, `g_i` leaves the `i`-th non-star
    /// vertex, `g_k` returns to the star.
    pub hamilton: Vec<u32>,
    pub edges: Vec<u32>,
}

impl Block {
    pub fn root(&self) -> u32 {
        self.hamilton[0]
    }

    /// Number of non-star vertices.
    pub fn size(&self) -> usize {
        self.hamilton.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub edge_index: Vec<u32>,
    pub block_of_edge: Vec<u32>,
    /// Blocks in discovery order from the root.
    pub blocks: Vec<Block>,
    pub next_in_block: Vec<u32>,
    /// Vertices in discovery order; the root vertex first.
    pub order: Vec<u32>,
    /// Block through which each vertex was reached (`u32::MAX` at the root).
    pub parent_block: Vec<u32>,
    /// Blocks hanging below each vertex, in rotation order after the parent block.
    pub child_blocks: Vec<Vec<u32>>,
    vertex_of_cache: Vec<u32>,
    opposite_cache: Vec<u32>,
    halves_of_edge: Vec<[u32; 2]>,
}

impl BlockDecomposition {
    pub fn block_of_half_edge(&self, h: u32) -> u32 {
        self.block_of_edge[self.edge_index[h as usize] as usize]
    }

    /// Incident blocks of `v` in rotation order, starting from the half-edge
    /// by which the search from the root entered `v`.
    pub fn attachments(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.child_blocks[v as usize].len() + 1);
        if self.parent_block[v as usize] != NONE {
            out.push(self.parent_block[v as usize]);
        }
        out.extend_from_slice(&self.child_blocks[v as usize]);
        out
    }

    /// Half-edge of block `b` where its rotation interval at `v` begins.
    fn interval_start(&self, b: u32, v: u32) -> u32 {
        let blk = &self.blocks[b as usize];
        if blk.star == v {
            return blk.root();
        }
        // Non-star vertex: the interval runs from the forward Hamilton edge round to the backward one.
        blk.hamilton[1..].iter().copied().find(|&h| self.vertex_of_cache[h as usize] == v).expect("vertex lies on its parent block")
    }

    /// The block as a rooted map of its own, in canonical form.
    pub fn submap(&self, b: u32) -> PlanarMap {
        let blk = &self.blocks[b as usize];
        let mut halves: Vec<u32> = blk.edges.iter().flat_map(|&e| self.halves_of_edge[e as usize]).collect();
        halves.sort_unstable();
        let local = |h: u32| halves.binary_search(&h).expect("half-edge of block") as u32;
        let mut verts: Vec<u32> = halves.iter().map(|&h| self.vertex_of_cache[h as usize]).collect();
        verts.sort_unstable();
        verts.dedup();
        let lv = |v: u32| verts.binary_search(&v).expect("vertex of block") as u32;
        let opposite = halves.iter().map(|&h| local(self.opposite_cache[h as usize])).collect();
        let next = halves.iter().map(|&h| local(self.next_in_block[h as usize])).collect();
        let vertex_of = halves.iter().map(|&h| lv(self.vertex_of_cache[h as usize])).collect();
        PlanarMap::from_parts(opposite, next, vertex_of, verts.len(), Some(local(blk.root())))
            .and_then(|m| m.canonical())
            .expect("blocks are connected")
    }

    /// Rebuilds the full rotation system from the block rotations alone by
    /// concatenating block intervals at each vertex in attachment order.
    pub fn recombine(&self, n_vertices: usize) -> Result<PlanarMap> {
        let h = self.next_in_block.len();
        if h == 0 {
            return Ok(PlanarMap::single_vertex());
        }
        let mut next = vec![NONE; h];
        for v in 0..n_vertices as u32 {
            let intervals: Vec<(u32, u32)> = self
                .attachments(v)
                .into_iter()
                .map(|b| {
                    let first = self.interval_start(b, v);
                    let mut last = first;
                    while self.next_in_block[last as usize] != first {
                        last = self.next_in_block[last as usize];
                    }
                    (first, last)
                })
                .collect();
            for (i, &(first, last)) in intervals.iter().enumerate() {
                let mut x = first;
                while x != last {
                    next[x as usize] = self.next_in_block[x as usize];
                    x = next[x as usize];
                }
                next[last as usize] = intervals[(i + 1) % intervals.len()].0;
            }
        }
        PlanarMap::from_parts(
            self.opposite_cache.clone(),
            next,
            self.vertex_of_cache.clone(),
            n_vertices,
            self.blocks.first().map(|b| b.root()),
        )
    }
}

/// Biconnected components of the underlying graph (iterative Hopcroft-Tarjan),
/// then the embedded structure: rotation intervals, block roots and Hamilton
/// cycles, discovered breadth-first from the root.
pub fn blocks(map: &PlanarMap) -> Result<BlockDecomposition> {
    let edge_index = map.edge_index();
    let n_e = map.n_edges();
    let n = map.n_vertices();
    let mut halves_of_edge = vec![[NONE; 2]; n_e];
    for h in 0..map.n_half_edges() as u32 {
        let e = edge_index[h as usize] as usize;
        let slot = usize::from(halves_of_edge[e][0] != NONE);
        halves_of_edge[e][slot] = h;
    }
    let mut dec = BlockDecomposition {
        edge_index,
        block_of_edge: vec![NONE; n_e],
        blocks: Vec::new(),
        next_in_block: vec![NONE; map.n_half_edges()],
        order: Vec::with_capacity(n),
        parent_block: vec![NONE; n],
        child_blocks: vec![Vec::new(); n],
        vertex_of_cache: (0..map.n_half_edges() as u32).map(|h| map.vertex_of(h)).collect(),
        opposite_cache: (0..map.n_half_edges() as u32).map(|h| map.opposite(h)).collect(),
        halves_of_edge,
    };
    let Some(root) = map.root() else {
        dec.order.push(0);
        return Ok(dec);
    };
    let raw = biconnected(map, &dec.edge_index)?;

    // Rotation intervals: each block must occupy one contiguous run at every vertex.
    let corners = map.corner_of_vertex();
    let mut rot = Vec::new();
    for &c in &corners {
        rot.clear();
        let mut x = c;
        loop {
            rot.push(x);
            x = map.next(x);
            if x == c {
                break;
            }
        }
        let blk = |x: u32| raw[dec.edge_index[x as usize] as usize];
        let len = rot.len();
        let shift = (0..len).find(|&i| blk(rot[i]) != blk(rot[(i + len - 1) % len])).unwrap_or(0);
        rot.rotate_left(shift);
        let mut seen_runs: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < len {
            let b = blk(rot[i]);
            if seen_runs.contains(&b) {
                return Err(Error::InvalidMap("a block is split in the rotation at a vertex".into()));
            }
            seen_runs.push(b);
            let mut j = i;
            while j + 1 < len && blk(rot[j + 1]) == b {
                j += 1;
            }
            for t in i..j {
                dec.next_in_block[rot[t] as usize] = rot[t + 1];
            }
            dec.next_in_block[rot[j] as usize] = rot[i];
            i = j + 1;
        }
    }

    // Breadth-first discovery of blocks; `raw` ids are replaced by discovery order.
    let mut renumber = vec![NONE; raw.iter().map(|&b| b as usize + 1).max().unwrap_or(0)];
    let mut queue = VecDeque::new();
    let mut discovered = vec![false; n];
    discovered[map.vertex_of(root) as usize] = true;
    queue.push_back((map.vertex_of(root), root));
    while let Some((v, start)) = queue.pop_front() {
        dec.order.push(v);
        // At the root scan from the root half-edge; elsewhere from just after the parent interval.
        let first = if v == map.vertex_of(root) {
            start
        } else {
            let mut x = start;
            while dec.next_in_block[x as usize] != start {
                x = dec.next_in_block[x as usize];
            }
            map.next(x)
        };
        let mut x = first;
        loop {
            let rb = raw[dec.edge_index[x as usize] as usize];
            if renumber[rb as usize] == NONE {
                let id = dec.blocks.len() as u32;
                renumber[rb as usize] = id;
                let hamilton = trace_hamilton(map, &dec.next_in_block, x)?;
                for &g in &hamilton[1..] {
                    let u = map.vertex_of(g);
                    if discovered[u as usize] {
                        return Err(Error::InvalidMap("block cycle revisits a vertex".into()));
                    }
                    discovered[u as usize] = true;
                    dec.parent_block[u as usize] = id;
                    queue.push_back((u, g));
                }
                dec.child_blocks[v as usize].push(id);
                dec.blocks.push(Block { star: v, hamilton, edges: Vec::new() });
            }
            x = map.next(x);
            if x == first {
                break;
            }
        }
    }
    for (e, &rb) in raw.iter().enumerate() {
        let b = renumber[rb as usize];
        dec.block_of_edge[e] = b;
        dec.blocks[b as usize].edges.push(e as u32);
    }
    if dec.order.len() != n {
        return Err(Error::InvalidMap("map is not connected".into()));
    }
    for b in &dec.blocks {
        // A non-separable outerplanar block with k + 1 vertices has at most 2k - 1 edges.
        let k = b.size();
        if b.edges.len() > (2 * k).saturating_sub(1).max(1) {
            return Err(Error::InvalidMap("block is not outerplanar".into()));
        }
    }
    Ok(dec)
}

/// Follows `g -> next_in_block(opposite g)` from `g0` until it returns to the start vertex.
fn trace_hamilton(map: &PlanarMap, next_in_block: &[u32], g0: u32) -> Result<Vec<u32>> {
    let star = map.vertex_of(g0);
    let mut out = vec![g0];
    let mut g = g0;
    while map.head(g) != star {
        g = next_in_block[map.opposite(g) as usize];
        out.push(g);
        if out.len() > next_in_block.len() {
            return Err(Error::InvalidMap("block boundary does not close".into()));
        }
    }
    Ok(out)
}

/// Raw component id for every edge.
fn biconnected(map: &PlanarMap, edge_index: &[u32]) -> Result<Vec<u32>> {
    let g = map.graph();
    let n = g.n();
    let mut disc = vec![NONE; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![NONE; edge_index.len() / 2];
    let mut edge_stack: Vec<u32> = Vec::new();
    // (vertex, edge used to enter, next adjacency slot)
    let mut stack: Vec<(u32, u32, u32)> = Vec::new();
    let mut time = 0u32;
    let mut n_comp = 0u32;
    let r = map.root_vertex();
    disc[r as usize] = 0;
    low[r as usize] = 0;
    time += 1;
    stack.push((r, NONE, g.offsets[r as usize]));
    while let Some(&mut (v, pe, ref mut slot)) = stack.last_mut() {
        if *slot < g.offsets[v as usize + 1] {
            let w = g.targets[*slot as usize];
            let e = g.edges[*slot as usize];
            *slot += 1;
            if e == pe {
                continue;
            }
            if disc[w as usize] == NONE {
                disc[w as usize] = time;
                low[w as usize] = time;
                time += 1;
                edge_stack.push(e);
                stack.push((w, e, g.offsets[w as usize]));
            } else if disc[w as usize] < disc[v as usize] {
                edge_stack.push(e);
                low[v as usize] = low[v as usize].min(disc[w as usize]);
            }
        } else {
            stack.pop();
            if let Some(&(u, _, _)) = stack.last() {
                low[u as usize] = low[u as usize].min(low[v as usize]);
                if low[v as usize] >= disc[u as usize] {
                    loop {
                        let e = edge_stack.pop().expect("edge stack holds the tree edge");
                        comp[e as usize] = n_comp;
                        if e == pe {
                            break;
                        }
                    }
                    n_comp += 1;
                }
            }
        }
    }
    if comp.iter().any(|&c| c == NONE) {
        return Err(Error::InvalidMap("map is not connected".into()));
    }
    Ok(comp)
}
