//! QUBO minimization backends.
//!
//! A backend takes one [`QuboModel`] and returns a [`SampleSet`]: distinct
//! bitstrings sorted by energy. Two are bundled: [`ExactSolver`], which
//! enumerates, and [`AnnealingSolver`], single-flip Metropolis annealing.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::qubo_encode::{BitRole, QuboModel};

/// Largest number of bits the exact backend will enumerate.
pub const ENUMERATION_CAP: usize = 24;
/// Largest slack block the exact backend eliminates analytically.
const BLOCK_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("exact enumeration needs {bits} free bits, above the cap of {cap}")]
    TooManyBits { bits: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub bits: Vec<u8>,
    pub energy: f64,
}

/// Order of bitstrings when energies tie: the one whose integer value
/// (bit `i` has weight `2^i`) is smaller comes first.
pub fn enumeration_order(a: &[u8], b: &[u8]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

/// Distinct bitstrings in ascending energy order. Energies are always
/// recomputed from the model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    samples: Vec<Sample>,
}

impl SampleSet {
    pub fn from_states<I>(model: &QuboModel, states: I) -> Self
    where
        I: IntoIterator<Item = Vec<u8>>,
    {
        let mut samples: Vec<Sample> = states
            .into_iter()
            .map(|bits| Sample {
                energy: model.energy(&bits),
                bits,
            })
            .collect();
        samples.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| enumeration_order(&a.bits, &b.bits))
        });
        samples.dedup_by(|a, b| a.bits == b.bits);
        // dedup only removes neighbours; equal bitstrings always share an
        // energy, so they are adjacent after sorting.
        SampleSet { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Keep the lowest-energy bitstring of each distinct energy, at most
    /// `levels` of them.
    fn keep_levels(mut self, levels: usize) -> Self {
        self.samples.dedup_by(|a, b| a.energy == b.energy);
        self.samples.truncate(levels);
        self
    }
}

/// The contract every backend implements: one model in, one sample set out.
pub trait QuboSampler {
    fn sample(&self, model: &QuboModel) -> Result<SampleSet, SampleError>;
}

/// Exhaustive minimization.
///
/// Bits tagged as slack bits are grouped per constraint. When such a group
/// interacts with the remaining bits only through a single linear form (as
/// every squared-penalty slack does), its best completion for a given
/// assignment of the other bits is read off a precomputed lower envelope,
/// so only the remaining bits are enumerated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolver {
    /// How many samples to keep.
    pub retention: usize,
    /// Keep the best bitstring per distinct x-bit assignment instead of one
    /// per energy level.
    pub distinct_x: bool,
}

impl Default for ExactSolver {
    fn default() -> Self {
        ExactSolver {
            retention: 32,
            distinct_x: false,
        }
    }
}

pub fn solve_exact(model: &QuboModel) -> Result<SampleSet, SampleError> {
    ExactSolver::default().sample(model)
}

impl QuboSampler for ExactSolver {
    fn sample(&self, model: &QuboModel) -> Result<SampleSet, SampleError> {
        if model.num_bits == 0 {
            return Ok(SampleSet::from_states(model, [Vec::new()]));
        }
        let plan = Plan::new(model);
        if plan.outer.len() > ENUMERATION_CAP {
            return Err(SampleError::TooManyBits {
                bits: plan.outer.len(),
                cap: ENUMERATION_CAP,
            });
        }
        let x_positions: Vec<Option<usize>> = plan
            .outer
            .iter()
            .map(|&b| match model.registry[b] {
                BitRole::XBit(j) => Some(j),
                _ => None,
            })
            .collect();
        let n_x = x_positions.iter().flatten().count();
        let by_x = self.distinct_x && n_x <= ENUMERATION_CAP;
        let mut collector = if by_x {
            Collector::ByX {
                best: vec![None; 1usize << n_x],
            }
        } else {
            Collector::Levels {
                heap: BinaryHeap::new(),
                cap: self.retention.saturating_mul(8).max(64),
            }
        };

        plan.enumerate(|energy, code| match &mut collector {
            Collector::ByX { best } => {
                let mut key = 0usize;
                for (k, xj) in x_positions.iter().enumerate() {
                    if let Some(j) = xj {
                        if code >> k & 1 == 1 {
                            key |= 1 << j;
                        }
                    }
                }
                let slot = &mut best[key];
                let better = match slot {
                    None => true,
                    Some((e, c)) => energy < *e || energy == *e && code < *c,
                };
                if better {
                    *slot = Some((energy, code));
                }
            }
            Collector::Levels { heap, cap } => {
                let item = Candidate { energy, code };
                if heap.len() < *cap {
                    heap.push(item);
                } else if item < *heap.peek().expect("heap is full") {
                    heap.pop();
                    heap.push(item);
                }
            }
        });

        let codes: Vec<u64> = match collector {
            Collector::ByX { best } => best.into_iter().flatten().map(|(_, c)| c).collect(),
            Collector::Levels { heap, .. } => heap.into_iter().map(|c| c.code).collect(),
        };
        let states = codes.into_iter().map(|c| plan.complete(model, c));
        let set = SampleSet::from_states(model, states);
        Ok(if by_x {
            let mut set = set;
            set.samples.truncate(self.retention);
            set
        } else {
            set.keep_levels(self.retention)
        })
    }
}

enum Collector {
    ByX {
        best: Vec<Option<(f64, u64)>>,
    },
    Levels {
        heap: BinaryHeap<Candidate>,
        cap: usize,
    },
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    energy: f64,
    code: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then(self.code.cmp(&other.code))
    }
}

/// Lower envelope of `intercept + t * slope` over all assignments of a
/// slack block.
struct Envelope {
    /// `(slope, intercept, local assignment)`, slopes strictly decreasing.
    lines: Vec<(f64, f64, u32)>,
    /// `breaks[k]`: the `t` where `lines[k + 1]` starts to win.
    breaks: Vec<f64>,
}

impl Envelope {
    fn build(mut lines: Vec<(f64, f64, u32)>) -> Self {
        lines.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        lines.dedup_by(|later, earlier| later.0 == earlier.0);
        let cross = |l1: &(f64, f64, u32), l2: &(f64, f64, u32)| (l2.1 - l1.1) / (l1.0 - l2.0);
        let mut hull: Vec<(f64, f64, u32)> = Vec::with_capacity(lines.len());
        for line in lines {
            while hull.len() >= 2 {
                let l1 = &hull[hull.len() - 2];
                let l2 = &hull[hull.len() - 1];
                if cross(l1, &line) <= cross(l1, l2) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(line);
        }
        let breaks = hull.windows(2).map(|w| cross(&w[0], &w[1])).collect();
        Envelope {
            lines: hull,
            breaks,
        }
    }

    fn query(&self, t: f64) -> (f64, u32) {
        let k = self.breaks.partition_point(|&b| b < t);
        let (slope, intercept, idx) = self.lines[k];
        (intercept + slope * t, idx)
    }
}

struct Block {
    bits: Vec<usize>,
    /// Coefficient of each outer bit in the block's driving parameter.
    drive: Vec<(usize, f64)>,
    envelope: Envelope,
}

/// Split of a model into enumerated ("outer") bits and eliminable blocks.
struct Plan {
    outer: Vec<usize>,
    blocks: Vec<Block>,
    /// Outer-only terms in outer-index space.
    diag: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
    offset: f64,
}

impl Plan {
    fn new(model: &QuboModel) -> Self {
        let nb = model.num_bits;
        let mut group: Vec<Option<usize>> = vec![None; nb];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for s in &model.slacks {
            let bits: Vec<usize> = (s.first_bit..s.first_bit + s.weights.len()).collect();
            let tagged = bits
                .iter()
                .all(|&b| b < nb && matches!(model.registry[b], BitRole::SlackBit { .. }));
            if !bits.is_empty() && bits.len() <= BLOCK_CAP && tagged {
                for &b in &bits {
                    group[b] = Some(groups.len());
                }
                groups.push(bits);
            }
        }
        // Blocks coupled to each other are not separable.
        let mut ok = vec![true; groups.len()];
        for &(i, j) in model.quadratic.keys() {
            if let (Some(gi), Some(gj)) = (group[i], group[j]) {
                if gi != gj {
                    ok[gi] = false;
                    ok[gj] = false;
                }
            }
        }

        let mut blocks_raw: Vec<(Vec<usize>, Vec<(usize, usize, f64)>)> = Vec::new();
        let mut block_of = vec![None; nb];
        for (g, bits) in groups.into_iter().enumerate() {
            if !ok[g] {
                continue;
            }
            // coupling entries (local block bit, outer bit, q)
            let local: BTreeMap<usize, usize> =
                bits.iter().enumerate().map(|(k, &b)| (b, k)).collect();
            let mut coupling = Vec::new();
            for (&(i, j), &q) in &model.quadratic {
                match (local.get(&i), local.get(&j)) {
                    (Some(&li), None) if group[j].is_none() || group[j] != Some(g) => {
                        coupling.push((li, j, q))
                    }
                    (None, Some(&lj)) => coupling.push((lj, i, q)),
                    _ => {}
                }
            }
            if rank_one(&coupling, bits.len()).is_some() {
                for &b in &bits {
                    block_of[b] = Some(blocks_raw.len());
                }
                blocks_raw.push((bits, coupling));
            }
        }

        let outer: Vec<usize> = (0..nb).filter(|&b| block_of[b].is_none()).collect();
        let mut outer_index = vec![usize::MAX; nb];
        for (k, &b) in outer.iter().enumerate() {
            outer_index[b] = k;
        }

        let mut blocks = Vec::with_capacity(blocks_raw.len());
        for (bits, coupling) in &blocks_raw {
            let (v, a) = rank_one(coupling, bits.len()).expect("checked above");
            let local: BTreeMap<usize, usize> =
                bits.iter().enumerate().map(|(k, &b)| (b, k)).collect();
            let mut internal: Vec<(usize, usize, f64)> = Vec::new();
            for (&(i, j), &q) in &model.quadratic {
                if let (Some(&li), Some(&lj)) = (local.get(&i), local.get(&j)) {
                    internal.push((li, lj, q));
                }
            }
            let m = bits.len();
            let lines = (0..1u32 << m)
                .map(|s| {
                    let on = |k: usize| s >> k & 1 == 1;
                    let intercept: f64 = internal
                        .iter()
                        .filter(|(i, j, _)| on(*i) && on(*j))
                        .map(|(_, _, q)| q)
                        .sum();
                    let slope: f64 = (0..m).filter(|&k| on(k)).map(|k| v[k]).sum();
                    (slope, intercept, s)
                })
                .collect();
            let drive = a
                .into_iter()
                .map(|(bit, coef)| (outer_index[bit], coef))
                .collect();
            blocks.push(Block {
                bits: bits.clone(),
                drive,
                envelope: Envelope::build(lines),
            });
        }

        let k = outer.len();
        let mut diag = vec![0.0; k];
        let mut neighbors = vec![Vec::new(); k];
        for (&(i, j), &q) in &model.quadratic {
            let (oi, oj) = (outer_index[i], outer_index[j]);
            if oi == usize::MAX || oj == usize::MAX {
                continue;
            }
            if oi == oj {
                diag[oi] += q;
            } else {
                neighbors[oi].push((oj, q));
                neighbors[oj].push((oi, q));
            }
        }
        Plan {
            outer,
            blocks,
            diag,
            neighbors,
            offset: model.offset,
        }
    }

    /// Visit every outer assignment (as a bit code over outer indices) with
    /// the energy of its best completion, in Gray-code order.
    fn enumerate(&self, mut visit: impl FnMut(f64, u64)) {
        let k = self.outer.len();
        let mut z = vec![0u8; k];
        let mut field = vec![0.0; k];
        let mut t = vec![0.0; self.blocks.len()];
        let mut drive_of: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
        for (bi, block) in self.blocks.iter().enumerate() {
            for &(o, a) in &block.drive {
                drive_of[o].push((bi, a));
            }
        }
        let mut e_outer = self.offset;
        let mut code = 0u64;
        let total = |e_outer: f64, t: &[f64]| -> f64 {
            e_outer
                + self
                    .blocks
                    .iter()
                    .zip(t)
                    .map(|(b, &ti)| b.envelope.query(ti).0)
                    .sum::<f64>()
        };
        visit(total(e_outer, &t), code);
        for step in 1u64..(1u64 << k) {
            let bit = step.trailing_zeros() as usize;
            let sign = if z[bit] == 0 { 1.0 } else { -1.0 };
            e_outer += sign * (self.diag[bit] + field[bit]);
            z[bit] ^= 1;
            code ^= 1 << bit;
            for &(nb, q) in &self.neighbors[bit] {
                field[nb] += sign * q;
            }
            for &(bi, a) in &drive_of[bit] {
                t[bi] += sign * a;
            }
            visit(total(e_outer, &t), code);
        }
    }

    /// Full bitstring for an outer code, with each block at its best
    /// completion.
    fn complete(&self, model: &QuboModel, code: u64) -> Vec<u8> {
        let mut bits = vec![0u8; model.num_bits];
        for (k, &b) in self.outer.iter().enumerate() {
            bits[b] = (code >> k & 1) as u8;
        }
        for block in &self.blocks {
            let t: f64 = block
                .drive
                .iter()
                .filter(|(o, _)| code >> o & 1 == 1)
                .map(|(_, a)| a)
                .sum();
            let (_, s) = block.envelope.query(t);
            for (k, &b) in block.bits.iter().enumerate() {
                bits[b] = (s >> k & 1) as u8;
            }
        }
        bits
    }
}

/// Factor a coupling matrix given as `(row, column, value)` entries as
/// `v ⊗ a`. Returns `v` (per row) and `a` (per column) when the matrix has
/// rank at most one.
#[allow(clippy::type_complexity)]
fn rank_one(entries: &[(usize, usize, f64)], rows: usize) -> Option<(Vec<f64>, Vec<(usize, f64)>)> {
    let mut cols: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(r, c, q) in entries {
        cols.entry(c).or_insert_with(|| vec![0.0; rows])[r] += q;
    }
    let scale = cols.values().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Some((vec![0.0; rows], Vec::new()));
    }
    let (pivot_col, pivot_row) = cols
        .iter()
        .flat_map(|(c, col)| col.iter().enumerate().map(move |(r, v)| (*c, r, v.abs())))
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .map(|(c, r, _)| (c, r))
        .expect("nonzero scale");
    let v = cols[&pivot_col].clone();
    let pivot = v[pivot_row];
    let a: Vec<(usize, f64)> = cols
        .iter()
        .map(|(&c, col)| (c, col[pivot_row] / pivot))
        .collect();
    let tol = 1e-9 * scale;
    for (c, coef) in &a {
        let col = &cols[c];
        if (0..rows).any(|r| (col[r] - v[r] * coef).abs() > tol) {
            return None;
        }
    }
    Some((v, a))
}

/// Simulated annealing with a geometric temperature schedule from the
/// largest coefficient magnitude down to a thousandth of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnealingSolver {
    pub seed: u64,
    pub sweeps: usize,
    pub restarts: usize,
}

impl Default for AnnealingSolver {
    fn default() -> Self {
        AnnealingSolver {
            seed: 0,
            sweeps: 2000,
            restarts: 8,
        }
    }
}

pub fn solve_sa(model: &QuboModel, seed: u64, sweeps: usize, restarts: usize) -> SampleSet {
    AnnealingSolver {
        seed,
        sweeps,
        restarts,
    }
    .run(model)
}

impl QuboSampler for AnnealingSolver {
    fn sample(&self, model: &QuboModel) -> Result<SampleSet, SampleError> {
        Ok(self.run(model))
    }
}

struct Adjacency {
    diag: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    fn new(model: &QuboModel) -> Self {
        let n = model.num_bits;
        let mut diag = vec![0.0; n];
        let mut neighbors = vec![Vec::new(); n];
        for (&(i, j), &q) in &model.quadratic {
            if i == j {
                diag[i] += q;
            } else {
                neighbors[i].push((j, q));
                neighbors[j].push((i, q));
            }
        }
        Adjacency { diag, neighbors }
    }
}

struct Walker<'a> {
    adj: &'a Adjacency,
    state: Vec<u8>,
    field: Vec<f64>,
    energy: f64,
}

impl<'a> Walker<'a> {
    fn new(adj: &'a Adjacency, model: &QuboModel, state: Vec<u8>) -> Self {
        let n = state.len();
        let mut field = vec![0.0; n];
        for i in 0..n {
            field[i] = adj.neighbors[i]
                .iter()
                .filter(|(j, _)| state[*j] != 0)
                .map(|(_, q)| q)
                .sum();
        }
        let energy = model.energy(&state);
        Walker {
            adj,
            state,
            field,
            energy,
        }
    }

    fn delta(&self, i: usize) -> f64 {
        let d = self.adj.diag[i] + self.field[i];
        if self.state[i] == 0 {
            d
        } else {
            -d
        }
    }

    fn flip(&mut self, i: usize, delta: f64) {
        let sign = if self.state[i] == 0 { 1.0 } else { -1.0 };
        self.state[i] ^= 1;
        self.energy += delta;
        for &(j, q) in &self.adj.neighbors[i] {
            self.field[j] += sign * q;
        }
    }
}

impl AnnealingSolver {
    fn run(&self, model: &QuboModel) -> SampleSet {
        let n = model.num_bits;
        if n == 0 {
            return SampleSet::from_states(model, [Vec::new()]);
        }
        let adj = Adjacency::new(model);
        let t0 = match model.max_abs_coefficient() {
            m if m > 0.0 => m,
            _ => 1.0,
        };
        let t_end = 1e-3 * t0;
        let sweeps = self.sweeps;
        let temperature = |k: usize| {
            if sweeps <= 1 {
                t0
            } else {
                t0 * (t_end / t0).powf(k as f64 / (sweeps - 1) as f64)
            }
        };

        let per_restart: Vec<Vec<Vec<u8>>> = (0..self.restarts.max(1) as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(r));
                let init: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
                let mut w = Walker::new(&adj, model, init);
                if sweeps == 0 {
                    return vec![w.state];
                }
                let mut best = (w.energy, w.state.clone());
                for k in 0..sweeps {
                    let temp = temperature(k);
                    for i in 0..n {
                        let d = w.delta(i);
                        if d <= 0.0 || rng.gen::<f64>() < (-d / temp).exp() {
                            w.flip(i, d);
                            if w.energy < best.0 {
                                best = (w.energy, w.state.clone());
                            }
                        }
                    }
                }
                // Greedy descent from the final state.
                loop {
                    let improving = (0..n).find(|&i| w.delta(i) < 0.0);
                    match improving {
                        Some(i) => {
                            let d = w.delta(i);
                            w.flip(i, d);
                        }
                        None => break,
                    }
                }
                vec![best.1, w.state]
            })
            .collect();
        SampleSet::from_states(model, per_restart.into_iter().flatten())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;
    use crate::model::{BendersCut, Conversion, CutKind, PenaltyMode};
    use crate::qubo_encode::{
        build_phi_encoding, compute_penalties, encode_master, tighten_phi_bounds, MasterProblem,
    };

    fn naive_min(model: &QuboModel) -> (f64, Vec<u8>) {
        let n = model.num_bits;
        let mut best = (f64::INFINITY, Vec::new());
        for mask in 0u64..1 << n {
            let bits: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
            let mut e = model.offset;
            for i in 0..n {
                for j in i..n {
                    if let Some(q) = model.quadratic.get(&(i, j)) {
                        e += q * f64::from(bits[i] * bits[j]);
                    }
                }
            }
            if e < best.0 {
                best = (e, bits);
            }
        }
        best
    }

    #[test]
    fn two_bit_tie_goes_to_lower_enumeration_index() {
        let m = QuboModel::from_terms(2, &[(0, 0, -1.0), (1, 1, -1.0), (0, 1, 2.0)], 0.0);
        let s = solve_exact(&m).unwrap();
        assert_eq!(s.best().unwrap().bits, vec![1, 0]);
        assert_eq!(s.best().unwrap().energy, -1.0);
        // levels: -1 (10), 0 (00)
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn empty_and_nonnegative_models() {
        let empty = QuboModel::from_terms(0, &[], 3.5);
        let s = solve_exact(&empty).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.best().unwrap().energy, 3.5);
        let pos = QuboModel::from_terms(3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 0.5)], 0.0);
        let s = solve_exact(&pos).unwrap();
        assert_eq!(s.best().unwrap().bits, vec![0, 0, 0]);
        assert_eq!(s.best().unwrap().energy, 0.0);
    }

    #[test]
    fn too_many_free_bits() {
        let terms: Vec<_> = (0..25).map(|i| (i, i, -1.0)).collect();
        let m = QuboModel::from_terms(25, &terms, 0.0);
        assert_eq!(
            solve_exact(&m),
            Err(SampleError::TooManyBits { bits: 25, cap: 24 })
        );
    }

    #[test]
    fn block_elimination_matches_naive_enumeration() {
        let inst = t1();
        let (lb, ub) = tighten_phi_bounds(&inst).unwrap();
        let phi = build_phi_encoding(lb, ub, 0.5);
        let pen = compute_penalties(&inst, ub, PenaltyMode::Constructive);
        let cut = BendersCut {
            kind: CutKind::Optimality,
            coeffs: vec![-3.0],
            constant: 12.0,
            mu: vec![3.0],
            iteration_created: 1,
        };
        let model = encode_master(
            &MasterProblem {
                inst: &inst,
                cuts: std::slice::from_ref(&cut),
                phi: &phi,
                penalties: &pen,
            },
            Conversion::Slack,
        )
        .unwrap();
        assert!(model.num_bits <= 20);
        let plan = Plan::new(&model);
        assert_eq!(plan.blocks.len(), 2);
        let (e, _) = naive_min(&model);
        let got = solve_exact(&model).unwrap();
        assert!((got.best().unwrap().energy - e).abs() <= 1e-9 * (1.0 + e.abs()));
    }

    #[test]
    fn envelope_picks_minimum_line() {
        let env = Envelope::build(vec![
            (1.0, 0.0, 0),
            (0.0, -0.5, 1),
            (-1.0, 0.0, 2),
            (0.0, 2.0, 3),
        ]);
        assert_eq!(env.query(-5.0).1, 0);
        assert_eq!(env.query(0.0).1, 1);
        assert_eq!(env.query(5.0).1, 2);
        assert_eq!(env.lines.len(), 3);
    }

    #[test]
    fn annealing_is_deterministic_and_finds_easy_minimum() {
        let m = QuboModel::from_terms(
            4,
            &[
                (0, 0, -1.0),
                (1, 1, -1.0),
                (0, 1, 2.0),
                (2, 2, -3.0),
                (3, 3, 1.0),
            ],
            0.0,
        );
        let a = solve_sa(&m, 11, 200, 4);
        let b = solve_sa(&m, 11, 200, 4);
        assert_eq!(a, b);
        assert_eq!(a.best().unwrap().energy, -4.0);
    }

    #[test]
    fn zero_sweeps_reports_initial_states() {
        let m = QuboModel::from_terms(6, &[(0, 0, -1.0), (2, 5, 1.0)], 0.0);
        let s = solve_sa(&m, 3, 0, 5);
        assert!(s.len() <= 5);
        let mut expected = Vec::new();
        for r in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(3 + r);
            expected.push((0..6).map(|_| rng.gen_range(0..=1u8)).collect::<Vec<u8>>());
        }
        let want = SampleSet::from_states(&m, expected);
        assert_eq!(s, want);
    }

    #[test]
    fn sample_set_is_sorted_and_deduplicated() {
        let m = QuboModel::from_terms(2, &[(0, 0, 1.0), (1, 1, -1.0)], 0.0);
        let s = SampleSet::from_states(&m, vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 0]]);
        let energies: Vec<f64> = s.samples().iter().map(|x| x.energy).collect();
        assert_eq!(energies, vec![-1.0, 0.0, 1.0]);
    }
}
