//! Proximity graph construction and the in-memory reference traversal.
//!
//! The graph is built Vamana-style: nodes are inserted in a seeded random
//! order, each one wired to a pruned subset of the nodes visited by a greedy
//! search from the medoid, with reverse edges pruned on overflow. Two passes
//! run, the first with alpha 1.0 and the second with the configured alpha.
//! After the passes, any node unreachable from the entry is patched in by
//! linking it from its nearest reachable node so that cache planning and IO
//! statistics are defined for every node.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distance::cmp_dist_id;
use crate::error::{Error, Result};
use crate::vecio::VectorDataset;

/// Capped-degree adjacency lists plus the entry (medoid) node.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityGraph {
    r_deg: u16,
    entry: u32,
    adjacency: Vec<Vec<u32>>,
}

impl ProximityGraph {
    pub fn new(r_deg: u16, entry: u32, adjacency: Vec<Vec<u32>>) -> Self {
        ProximityGraph { r_deg, entry, adjacency }
    }

    pub fn count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn r_deg(&self) -> u16 {
        self.r_deg
    }

    pub fn entry(&self) -> u32 {
        self.entry
    }

    #[inline]
    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.adjacency[id as usize]
    }

    pub fn degree(&self, id: u32) -> usize {
        self.adjacency[id as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).max().unwrap_or(0)
    }

    pub fn avg_degree(&self) -> f64 {
        if self.adjacency.is_empty() {
            return 0.0;
        }
        self.adjacency.iter().map(|a| a.len()).sum::<usize>() as f64 / self.count() as f64
    }

    /// Serialized adjacency size for one node: degree field plus 4 bytes per id.
    pub fn adjacency_bytes(&self, id: u32) -> u64 {
        2 + 4 * self.degree(id) as u64
    }

    pub fn total_adjacency_bytes(&self) -> u64 {
        (0..self.count() as u32).map(|id| self.adjacency_bytes(id)).sum()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.count() as u32).to_le_bytes());
        out.extend_from_slice(&self.r_deg.to_le_bytes());
        out.extend_from_slice(&self.entry.to_le_bytes());
        for list in &self.adjacency {
            out.extend_from_slice(&(list.len() as u16).to_le_bytes());
            for &id in list {
                out.extend_from_slice(&id.to_le_bytes());
            }
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 10 {
            return Err(Error::malformed("graph file shorter than its header"));
        }
        let count = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let r_deg = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
        let entry = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
        let mut off = 10;
        let mut adjacency = Vec::with_capacity(count);
        for _ in 0..count {
            if off + 2 > bytes.len() {
                return Err(Error::malformed("graph file truncated"));
            }
            let deg = u16::from_le_bytes(bytes[off..off + 2].try_into().unwrap()) as usize;
            off += 2;
            if off + deg * 4 > bytes.len() {
                return Err(Error::malformed("graph file truncated in adjacency list"));
            }
            let mut list = Vec::with_capacity(deg);
            for i in 0..deg {
                let id = u32::from_le_bytes(bytes[off + i * 4..off + i * 4 + 4].try_into().unwrap());
                if id as usize >= count {
                    return Err(Error::malformed("graph neighbor id out of range"));
                }
                list.push(id);
            }
            off += deg * 4;
            adjacency.push(list);
        }
        if off != bytes.len() {
            return Err(Error::malformed("graph file has trailing bytes"));
        }
        if entry as usize >= count {
            return Err(Error::malformed("graph entry id out of range"));
        }
        Ok(ProximityGraph { r_deg, entry, adjacency })
    }
}

/// An entry in the bounded candidate list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ListEntry {
    pub id: u32,
    pub dist: f32,
    pub visited: bool,
}

/// Bounded candidate list, sorted ascending by (distance, id).
#[derive(Debug, Clone)]
pub struct NearestList {
    cap: usize,
    entries: Vec<ListEntry>,
}

impl NearestList {
    pub fn new(cap: usize) -> Self {
        assert!(cap >= 1, "queue size must be at least 1");
        NearestList { cap, entries: Vec::with_capacity(cap + 1) }
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ListEntry] {
        &self.entries
    }

    /// Insert a candidate; returns false if it fell off the end of a full list.
    /// Callers are responsible for not inserting the same id twice.
    pub fn insert(&mut self, id: u32, dist: f32) -> bool {
        debug_assert!(self.entries.iter().all(|e| e.id != id), "duplicate insert of id {id}");
        if self.entries.len() == self.cap {
            let last = self.entries[self.cap - 1];
            if cmp_dist_id(dist, id, last.dist, last.id).is_ge() {
                return false;
            }
        }
        let pos = self
            .entries
            .binary_search_by(|e| cmp_dist_id(e.dist, e.id, dist, id))
            .unwrap_or_else(|p| p);
        self.entries.insert(pos, ListEntry { id, dist, visited: false });
        self.entries.truncate(self.cap);
        true
    }

    /// Index of the nearest unvisited entry, if any.
    pub fn nearest_unvisited(&self) -> Option<usize> {
        self.entries.iter().position(|e| !e.visited)
    }

    pub fn has_unvisited(&self) -> bool {
        self.entries.iter().any(|e| !e.visited)
    }

    pub fn mark_visited(&mut self, idx: usize) {
        self.entries[idx].visited = true;
    }

    pub fn find(&self, id: u32) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id)
    }

    pub fn ids(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.id).collect()
    }
}

/// Reusable marker for "seen" ids across repeated searches.
pub(crate) struct VisitMarks {
    stamp: Vec<u32>,
    epoch: u32,
}

impl VisitMarks {
    pub fn new(n: usize) -> Self {
        VisitMarks { stamp: vec![0; n], epoch: 0 }
    }

    pub fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    /// Mark `id`; returns true the first time it is seen this epoch.
    #[inline]
    pub fn mark(&mut self, id: u32) -> bool {
        let s = &mut self.stamp[id as usize];
        if *s == self.epoch {
            false
        } else {
            *s = self.epoch;
            true
        }
    }
}

/// Id of the vector nearest to the coordinate-wise mean; ties to smaller id.
pub fn medoid(ds: &VectorDataset) -> u32 {
    let mean = ds.mean();
    let mut best = (0u32, ds.dist_to(&mean, 0));
    for id in 1..ds.count() as u32 {
        let d = ds.dist_to(&mean, id);
        if cmp_dist_id(d, id, best.1, best.0).is_lt() {
            best = (id, d);
        }
    }
    best.0
}

/// Greedy traversal with exact distances: repeatedly expand the nearest
/// unvisited candidate until none remain. Returns the final list and the
/// visited ids in visit order.
pub fn greedy_search(
    g: &ProximityGraph,
    ds: &VectorDataset,
    query: &[f32],
    queue: usize,
) -> (NearestList, Vec<u32>) {
    let mut marks = VisitMarks::new(g.count());
    marks.next_epoch();
    greedy_search_scratch(g, ds, query, queue, &mut marks)
}

fn greedy_search_scratch(
    g: &ProximityGraph,
    ds: &VectorDataset,
    query: &[f32],
    queue: usize,
    marks: &mut VisitMarks,
) -> (NearestList, Vec<u32>) {
    let mut list = NearestList::new(queue);
    let entry = g.entry();
    marks.mark(entry);
    list.insert(entry, ds.dist_to(query, entry));
    let mut visited = Vec::new();
    while let Some(idx) = list.nearest_unvisited() {
        let u = list.entries()[idx].id;
        list.mark_visited(idx);
        visited.push(u);
        for &v in g.neighbors(u) {
            if marks.mark(v) {
                list.insert(v, ds.dist_to(query, v));
            }
        }
    }
    (list, visited)
}

/// Alpha-pruning of a candidate set down to at most `r_deg` neighbors:
/// repeatedly keep the closest remaining candidate p and discard every
/// remaining q with alpha * dist(p, q) <= dist(node, q).
pub fn robust_prune(
    ds: &VectorDataset,
    node: u32,
    candidates: &[(u32, f32)],
    alpha: f32,
    r_deg: usize,
) -> Vec<u32> {
    let mut pool: Vec<(u32, f32)> =
        candidates.iter().copied().filter(|&(id, _)| id != node).collect();
    pool.sort_unstable_by(|a, b| cmp_dist_id(a.1, a.0, b.1, b.0));
    pool.dedup_by_key(|c| c.0);
    let mut result = Vec::with_capacity(r_deg);
    while let Some(&(p, _)) = pool.first() {
        result.push(p);
        if result.len() == r_deg {
            break;
        }
        pool.retain(|&(q, dq)| q != p && alpha * ds.dist_between(p, q) > dq);
    }
    result
}

#[derive(Debug, Clone)]
pub struct BuildParams {
    pub r_deg: u16,
    pub l_build: usize,
    pub alpha: f32,
    pub seed: u64,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams { r_deg: 32, l_build: 128, alpha: 1.2, seed: 0 }
    }
}

/// Build the proximity graph. Deterministic under a fixed seed; single
/// threaded because insertion order feeds back into the adjacency state.
pub fn build_graph(ds: &VectorDataset, params: &BuildParams) -> Result<ProximityGraph> {
    let n = ds.count();
    if params.r_deg < 2 {
        return Err(Error::invalid("r_deg must be >= 2"));
    }
    if params.l_build < params.r_deg as usize {
        return Err(Error::invalid("l_build must be >= r_deg"));
    }
    if !(params.alpha >= 1.0) {
        return Err(Error::invalid("alpha must be >= 1.0"));
    }
    let entry = medoid(ds);
    let r_deg = params.r_deg as usize;
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut marks = VisitMarks::new(n);
    let mut query = vec![0.0f32; ds.dims()];

    for (pass, pass_alpha) in [(0u64, 1.0f32), (1, params.alpha)] {
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(pass));
        order.shuffle(&mut rng);
        for &u in &order {
            ds.row_f32_into(u, &mut query);
            marks.next_epoch();
            let g = ProximityGraph { r_deg: params.r_deg, entry, adjacency };
            let (_, visited) = greedy_search_scratch(&g, ds, &query, params.l_build, &mut marks);
            adjacency = g.adjacency;

            let mut candidates: Vec<(u32, f32)> = Vec::with_capacity(visited.len() + r_deg);
            for &v in visited.iter().chain(adjacency[u as usize].iter()) {
                if v != u {
                    candidates.push((v, ds.dist_between(u, v)));
                }
            }
            let pruned = robust_prune(ds, u, &candidates, pass_alpha, r_deg);
            adjacency[u as usize] = pruned.clone();
            for v in pruned {
                let list = &mut adjacency[v as usize];
                if !list.contains(&u) {
                    list.push(u);
                    if list.len() > r_deg {
                        let cands: Vec<(u32, f32)> =
                            list.iter().map(|&w| (w, ds.dist_between(v, w))).collect();
                        adjacency[v as usize] = robust_prune(ds, v, &cands, pass_alpha, r_deg);
                    }
                }
            }
        }
    }

    patch_connectivity(ds, entry, &mut adjacency, r_deg)?;
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(ProximityGraph { r_deg: params.r_deg, entry, adjacency })
}

/// Link every node unreachable from `entry` from its nearest reachable node,
/// evicting the farthest neighbor when the source list is full.
fn patch_connectivity(
    ds: &VectorDataset,
    entry: u32,
    adjacency: &mut Vec<Vec<u32>>,
    r_deg: usize,
) -> Result<()> {
    let n = adjacency.len();
    for _round in 0..16 {
        let reachable = reachable_from(entry, adjacency);
        let unreachable: Vec<u32> =
            (0..n as u32).filter(|&id| !reachable[id as usize]).collect();
        if unreachable.is_empty() {
            return Ok(());
        }
        for &x in &unreachable {
            let mut best: Option<(u32, f32)> = None;
            for id in 0..n as u32 {
                if !reachable[id as usize] {
                    continue;
                }
                let d = ds.dist_between(id, x);
                match best {
                    Some((bid, bd)) if cmp_dist_id(d, id, bd, bid).is_ge() => {}
                    _ => best = Some((id, d)),
                }
            }
            let (u, _) = best.expect("entry node is always reachable");
            let list = &mut adjacency[u as usize];
            if list.contains(&x) {
                continue;
            }
            if list.len() < r_deg {
                list.push(x);
            } else {
                // Evict the farthest neighbor (ties to the larger id).
                let mut worst = 0usize;
                for i in 1..list.len() {
                    let (di, dw) =
                        (ds.dist_between(u, list[i]), ds.dist_between(u, list[worst]));
                    if cmp_dist_id(di, list[i], dw, list[worst]).is_gt() {
                        worst = i;
                    }
                }
                list[worst] = x;
            }
        }
    }
    let reachable = reachable_from(entry, adjacency);
    if reachable.iter().all(|&r| r) {
        Ok(())
    } else {
        Err(Error::inconsistent("connectivity patching did not converge"))
    }
}

fn reachable_from(entry: u32, adjacency: &[Vec<u32>]) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    let mut stack = vec![entry];
    seen[entry as usize] = true;
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Graph invariants checked after builds in tests: degree cap, no self loops,
/// no duplicate neighbors, ids in range, full reachability.
pub fn check_invariants(g: &ProximityGraph) -> Result<()> {
    let n = g.count();
    for id in 0..n as u32 {
        let list = g.neighbors(id);
        if list.len() > g.r_deg() as usize {
            return Err(Error::inconsistent(format!("node {id} exceeds degree cap")));
        }
        let mut set = HashSet::with_capacity(list.len());
        for &v in list {
            if v == id {
                return Err(Error::inconsistent(format!("node {id} has a self loop")));
            }
            if v as usize >= n {
                return Err(Error::inconsistent(format!("node {id} links out of range")));
            }
            if !set.insert(v) {
                return Err(Error::inconsistent(format!("node {id} has duplicate neighbors")));
            }
        }
    }
    let reach = reachable_from(g.entry(), &g.adjacency);
    if let Some(bad) = reach.iter().position(|&r| !r) {
        return Err(Error::inconsistent(format!("node {bad} unreachable from entry")));
    }
    Ok(())
}
