//! Subproblem solves, Benders cuts, and multi-cut selection.

use thiserror::Error;

use crate::lp_simplex::{solve_lp, LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::model::{dot, to_f64, BendersCut, CutKind, MilpInstance};

/// Coefficients at or below this magnitude do not count as "touching" a
/// master variable.
pub const DENSITY_THRESHOLD: f64 = 1e-9;
/// Largest number of subsets the exact coverage search will enumerate.
pub const EXACT_SUBSET_LIMIT: u128 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("subproblem is unbounded: the instance has no finite optimum")]
    Unbounded,
    #[error(
        "feasibility dual optimum {value} is not positive although the subproblem is infeasible"
    )]
    Inconsistent { value: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubproblemOutcome {
    Feasible {
        mu: Vec<f64>,
        objective: f64,
        y: Vec<f64>,
    },
    Infeasible,
}

/// max h·y s.t. G y <= b - A x, y >= 0.
pub fn solve_subproblem(inst: &MilpInstance, x: &[u8]) -> Result<SubproblemOutcome, CutError> {
    let rhs = inst.residual_rhs(&to_f64(x));
    let mut lp = LinearProgram::new(Sense::Max, inst.h.clone());
    for (row, r) in inst.g.iter().zip(rhs) {
        lp.push_row(row.clone(), Relation::Le, r);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(SubproblemOutcome::Feasible {
            mu: sol.dual,
            objective: sol.objective,
            y: sol.primal,
        }),
        LpStatus::Infeasible => Ok(SubproblemOutcome::Infeasible),
        LpStatus::Unbounded => Err(CutError::Unbounded),
    }
}

/// `phi <= b·mu - (A^T mu)·x`
pub fn make_optimality_cut(inst: &MilpInstance, mu: &[f64], iteration: usize) -> BendersCut {
    let (constant, coeffs) = dual_affine(inst, mu);
    BendersCut {
        kind: CutKind::Optimality,
        coeffs,
        constant,
        mu: mu.to_vec(),
        iteration_created: iteration,
    }
}

fn dual_affine(inst: &MilpInstance, mu: &[f64]) -> (f64, Vec<f64>) {
    let constant = dot(&inst.b, mu);
    let coeffs = (0..inst.n)
        .map(|j| {
            let s: f64 = inst.a.iter().zip(mu).map(|(row, m)| row[j] * m).sum();
            -s
        })
        .collect();
    (constant, coeffs)
}

/// Solve max (b - A x)·mu s.t. G^T mu <= 0, -1 <= mu <= 0 and return its
/// optimal value and vertex.
pub fn solve_feasibility_dual(inst: &MilpInstance, x: &[u8]) -> Result<(f64, Vec<f64>), CutError> {
    let r = inst.residual_rhs(&to_f64(x));
    let mut lp = LinearProgram::new(Sense::Max, r);
    lp.bounds = vec![(-1.0, 0.0); inst.m1];
    for k in 0..inst.p {
        let col: Vec<f64> = inst.g.iter().map(|row| row[k]).collect();
        lp.push_row(col, Relation::Le, 0.0);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.primal)),
        // mu = 0 is always feasible and the box keeps it bounded.
        other => Err(LpError::Malformed(format!("feasibility dual reported {other:?}")).into()),
    }
}

/// The smallest total constraint violation: min Σ s s.t. G y - s <= b - A x,
/// y, s >= 0.
pub fn infeasibility_measure(inst: &MilpInstance, x: &[u8]) -> Result<f64, CutError> {
    let r = inst.residual_rhs(&to_f64(x));
    let (p, m) = (inst.p, inst.m1);
    let mut obj = vec![0.0; p + m];
    obj[p..].iter_mut().for_each(|v| *v = 1.0);
    let mut lp = LinearProgram::new(Sense::Min, obj);
    for (i, (row, ri)) in inst.g.iter().zip(r).enumerate() {
        let mut coeffs = vec![0.0; p + m];
        coeffs[..p].copy_from_slice(row);
        coeffs[p + i] = -1.0;
        lp.push_row(coeffs, Relation::Le, ri);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        other => Err(LpError::Malformed(format!("violation LP reported {other:?}")).into()),
    }
}

/// `(b - A x)·mu <= 0` from the feasibility dual at `x`; `x` itself
/// violates it.
pub fn make_feasibility_cut(
    inst: &MilpInstance,
    x: &[u8],
    iteration: usize,
    tol: f64,
) -> Result<BendersCut, CutError> {
    let (value, mu) = solve_feasibility_dual(inst, x)?;
    if value <= tol {
        return Err(CutError::Inconsistent { value });
    }
    let (constant, coeffs) = dual_affine(inst, &mu);
    Ok(BendersCut {
        kind: CutKind::Feasibility,
        coeffs,
        constant,
        mu,
        iteration_created: iteration,
    })
}

/// Which master variables each candidate cut touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityMatrix {
    cols: usize,
    rows: Vec<Vec<bool>>,
}

impl DensityMatrix {
    pub fn from_cuts(cuts: &[BendersCut], n: usize) -> Self {
        let rows = cuts
            .iter()
            .map(|c| {
                (0..n)
                    .map(|j| c.coeffs.get(j).is_some_and(|v| v.abs() > DENSITY_THRESHOLD))
                    .collect()
            })
            .collect();
        DensityMatrix { cols: n, rows }
    }

    /// Panics if the rows have different lengths.
    pub fn from_rows(rows: Vec<Vec<bool>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == cols),
            "ragged density matrix"
        );
        DensityMatrix { cols, rows }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, k: usize) -> &[bool] {
        &self.rows[k]
    }

    /// Number of columns covered by the given rows.
    pub fn coverage(&self, subset: &[usize]) -> usize {
        (0..self.cols)
            .filter(|&j| subset.iter().any(|&k| self.rows[k][j]))
            .count()
    }

    fn masks(&self) -> Vec<Vec<u64>> {
        let words = self.cols.div_ceil(64).max(1);
        self.rows
            .iter()
            .map(|r| {
                let mut m = vec![0u64; words];
                for (j, &on) in r.iter().enumerate() {
                    if on {
                        m[j / 64] |= 1 << (j % 64);
                    }
                }
                m
            })
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn union_count(masks: &[Vec<u64>], subset: &[usize], scratch: &mut [u64]) -> usize {
    scratch.iter_mut().for_each(|w| *w = 0);
    for &k in subset {
        for (s, w) in scratch.iter_mut().zip(&masks[k]) {
            *s |= w;
        }
    }
    scratch.iter().map(|w| w.count_ones() as usize).sum()
}

/// Best subset of at most `m` rows by brute force. Among equal coverage the
/// smaller subset wins, then the lexicographically smaller index list.
pub fn max_coverage_exact(d: &DensityMatrix, m: usize) -> (Vec<usize>, usize) {
    let k = d.num_rows();
    let masks = d.masks();
    let mut scratch = vec![0u64; masks.first().map_or(1, Vec::len)];
    let mut best: (Vec<usize>, usize) = (Vec::new(), 0);
    let mut found = false;
    for size in 1..=m.min(k) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let cov = union_count(&masks, &idx, &mut scratch);
            if !found || cov > best.1 {
                best = (idx.clone(), cov);
                found = true;
            }
            // next combination in lexicographic order
            let mut i = size;
            while i > 0 && idx[i - 1] == k - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for t in i..size {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }
    best
}

/// Classic greedy: repeatedly take the row adding the most new columns
/// (lowest index on ties), stopping early once nothing new is covered.
pub fn max_coverage_greedy(d: &DensityMatrix, m: usize) -> (Vec<usize>, usize) {
    let masks = d.masks();
    let words = masks.first().map_or(1, Vec::len);
    let mut covered = vec![0u64; words];
    let mut chosen: Vec<usize> = Vec::new();
    let mut total = 0;
    while chosen.len() < m.min(d.num_rows()) {
        let mut best: Option<(usize, usize)> = None;
        for (k, mask) in masks.iter().enumerate() {
            if chosen.contains(&k) {
                continue;
            }
            let gain: usize = mask
                .iter()
                .zip(&covered)
                .map(|(a, c)| (a & !c).count_ones() as usize)
                .sum();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((k, gain));
            }
        }
        let Some((k, gain)) = best else { break };
        if gain == 0 && !chosen.is_empty() {
            break;
        }
        chosen.push(k);
        total += gain;
        for (c, w) in covered.iter_mut().zip(&masks[k]) {
            *c |= w;
        }
    }
    chosen.sort_unstable();
    (chosen, total)
}

/// Pick at most `m` of the candidate cuts so that together they involve as
/// many master variables as possible. Returns sorted candidate indices.
pub fn select_multicuts(candidates: &[BendersCut], m: usize) -> Vec<usize> {
    if candidates.is_empty() || m == 0 {
        return Vec::new();
    }
    let n = candidates.iter().map(|c| c.coeffs.len()).max().unwrap_or(0);
    let d = DensityMatrix::from_cuts(candidates, n);
    select_rows(&d, m).0
}

/// Exact when `C(k, m)` is small enough, greedy otherwise.
pub fn select_rows(d: &DensityMatrix, m: usize) -> (Vec<usize>, usize) {
    if binomial(d.num_rows(), m.min(d.num_rows())) <= EXACT_SUBSET_LIMIT {
        max_coverage_exact(d, m)
    } else {
        max_coverage_greedy(d, m)
    }
}

/// Like [`select_rows`], restricted to subsets that contain row `forced`.
pub fn select_rows_including(d: &DensityMatrix, m: usize, forced: usize) -> (Vec<usize>, usize) {
    let k = d.num_rows();
    let others: Vec<usize> = (0..k).filter(|&r| r != forced).collect();
    let extra = m.saturating_sub(1).min(others.len());
    let masks = d.masks();
    let mut scratch = vec![0u64; masks.first().map_or(1, Vec::len)];
    if binomial(others.len(), extra) > EXACT_SUBSET_LIMIT {
        let mut chosen = vec![forced];
        let mut cov = union_count(&masks, &chosen, &mut scratch);
        while chosen.len() < m.min(k) {
            let mut best: Option<(usize, usize)> = None;
            for &r in &others {
                if chosen.contains(&r) {
                    continue;
                }
                chosen.push(r);
                let c = union_count(&masks, &chosen, &mut scratch);
                chosen.pop();
                if best.is_none_or(|(_, bc)| c > bc) {
                    best = Some((r, c));
                }
            }
            match best {
                Some((r, c)) if c > cov => {
                    chosen.push(r);
                    cov = c;
                }
                _ => break,
            }
        }
        chosen.sort_unstable();
        return (chosen, cov);
    }
    let mut best = (vec![forced], union_count(&masks, &[forced], &mut scratch));
    for size in 1..=extra {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let mut subset: Vec<usize> = idx.iter().map(|&i| others[i]).collect();
            subset.push(forced);
            subset.sort_unstable();
            let cov = union_count(&masks, &subset, &mut scratch);
            if cov > best.1 {
                best = (subset, cov);
            }
            let mut i = size;
            while i > 0 && idx[i - 1] == others.len() - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for t in i..size {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }
    best
}
