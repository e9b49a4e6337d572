//! Dense two-phase primal simplex with Bland's rule.
//!
//! Every LP in the decomposition is tiny (tens of columns), so the solver
//! keeps a full tableau in `f64`. Duals are read from the final basis,
//! which makes them basic solutions (vertices) of the dual polyhedron.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BendersCut, CutKind, MilpInstance};

pub const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex exceeded {cap} pivots (numerical instability)")]
    IterationLimit { cap: usize },
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Row {
            coeffs,
            relation,
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub rows: Vec<Row>,
    /// `(lower, upper)` per variable; infinities allowed.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// An LP over `num_vars` nonnegative variables with no rows yet.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let num_vars = objective.len();
        LinearProgram {
            num_vars,
            objective,
            sense,
            rows: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(Row::new(coeffs, relation, rhs));
    }

    fn check(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars || self.bounds.len() != self.num_vars {
            return Err(LpError::Malformed(
                "objective and bounds must have num_vars entries".into(),
            ));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != self.num_vars {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients, expected {}",
                    row.coeffs.len(),
                    self.num_vars
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} is not finite")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("variable {j} has empty bounds")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One multiplier per row. In a Max problem a `<=` row has a
    /// nonnegative dual; in a Min problem a `>=` row does.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LpSolution {
    fn empty(status: LpStatus, pivots: usize) -> Self {
        LpSolution {
            status,
            primal: Vec::new(),
            dual: Vec::new(),
            objective: f64::NAN,
            pivots,
        }
    }
}

/// How a user variable maps to standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + sign * col
    Single { col: usize, sign: f64, offset: f64 },
    /// x = col_pos - col_neg
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// rows × (cols + 1); the last entry of each row is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for k in 0..width {
                    row[k] -= f * pivot_row[k];
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let z: f64 = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, &b)| cost[b] * self.t[i][j])
            .sum();
        cost[j] - z
    }

    /// Maximize `cost` from the current basis. Returns false if unbounded.
    fn optimize(
        &mut self,
        cost: &[f64],
        allowed: &[bool],
        pivots: &mut usize,
        cap: usize,
    ) -> Result<bool, LpError> {
        loop {
            // Bland: lowest-index improving column enters.
            let entering = (0..self.cols)
                .filter(|&j| allowed[j] && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j) > COST_TOL);
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            *pivots += 1;
            if *pivots > cap {
                return Err(LpError::IterationLimit { cap });
            }
            self.pivot(r, c);
        }
    }
}

/// Solve a linear program.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;

    // Standard form: every column nonnegative.
    let mut maps = Vec::with_capacity(lp.num_vars);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Single {
                col: ncols,
                sign: 1.0,
                offset: lo,
            });
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Single {
                col: ncols,
                sign: -1.0,
                offset: hi,
            });
            ncols += 1;
        } else {
            maps.push(VarMap::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }

    // Internal rows: user rows, then upper-bound rows.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for row in &lp.rows {
        let mut coeffs = vec![0.0; ncols];
        let mut rhs = row.rhs;
        for (j, &a) in row.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Single { col, sign, offset } => {
                    coeffs[col] += sign * a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, row.relation, rhs));
    }
    for &(col, ub) in &bound_rows {
        let mut coeffs = vec![0.0; ncols];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, ub));
    }

    // Max-form costs.
    let sense_sign = match lp.sense {
        Sense::Max => 1.0,
        Sense::Min => -1.0,
    };
    let mut struct_cost = vec![0.0; ncols];
    for (j, &cj) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Single { col, sign, .. } => struct_cost[col] += sense_sign * sign * cj,
            VarMap::Split { pos, neg } => {
                struct_cost[pos] += sense_sign * cj;
                struct_cost[neg] -= sense_sign * cj;
            }
        }
    }

    // Nonnegative right-hand sides.
    let m = rows.len();
    let mut flip = vec![1.0; m];
    for (i, (coeffs, rel, rhs)) in rows.iter_mut().enumerate() {
        if *rhs < 0.0 {
            flip[i] = -1.0;
            *rhs = -*rhs;
            coeffs.iter_mut().for_each(|v| *v = -*v);
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Column layout: structural | slack/surplus | artificial.
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = ncols + n_slack + n_art;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut identity_col = vec![0usize; m];
    let mut is_art = vec![false; cols];
    let (mut s_next, mut a_next) = (ncols, ncols + n_slack);
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        t[i][..ncols].copy_from_slice(coeffs);
        t[i][cols] = *rhs;
        match rel {
            Relation::Le => {
                t[i][s_next] = 1.0;
                identity_col[i] = s_next;
                s_next += 1;
            }
            Relation::Ge => {
                t[i][s_next] = -1.0;
                s_next += 1;
                t[i][a_next] = 1.0;
                identity_col[i] = a_next;
                is_art[a_next] = true;
                a_next += 1;
            }
            Relation::Eq => {
                t[i][a_next] = 1.0;
                identity_col[i] = a_next;
                is_art[a_next] = true;
                a_next += 1;
            }
        }
    }
    let mut tab = Tableau {
        t,
        basis: identity_col.clone(),
        cols,
    };
    let cap = 50 * (cols + m).max(1);
    let mut pivots = 0usize;

    if n_art > 0 {
        let cost1: Vec<f64> = is_art.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        let allowed = vec![true; cols];
        tab.optimize(&cost1, &allowed, &mut pivots, cap)?;
        let infeas: f64 = (0..m)
            .filter(|&i| is_art[tab.basis[i]])
            .map(|i| tab.rhs(i))
            .sum();
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeas > 1e-8 * scale {
            return Ok(LpSolution::empty(LpStatus::Infeasible, pivots));
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if is_art[tab.basis[i]] {
                if let Some(c) = (0..cols).find(|&j| !is_art[j] && tab.t[i][j].abs() > PIVOT_TOL) {
                    tab.pivot(i, c);
                }
            }
        }
    }

    let mut cost2 = vec![0.0; cols];
    cost2[..ncols].copy_from_slice(&struct_cost);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    let bounded = tab.optimize(&cost2, &allowed, &mut pivots, cap)?;

    let mut col_val = vec![0.0; cols];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_val[b] = tab.rhs(i);
    }
    let primal: Vec<f64> = maps
        .iter()
        .map(|mp| match *mp {
            VarMap::Single { col, sign, offset } => offset + sign * col_val[col],
            VarMap::Split { pos, neg } => col_val[pos] - col_val[neg],
        })
        .collect();
    let objective: f64 = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();

    if !bounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal,
            dual: Vec::new(),
            objective: match lp.sense {
                Sense::Max => f64::INFINITY,
                Sense::Min => f64::NEG_INFINITY,
            },
            pivots,
        });
    }

    let dual = (0..lp.rows.len())
        .map(|i| {
            let col = identity_col[i];
            let y: f64 = tab
                .basis
                .iter()
                .enumerate()
                .map(|(r, &b)| cost2[b] * tab.t[r][col])
                .sum();
            sense_sign * flip[i] * y
        })
        .collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        dual,
        objective,
        pivots,
    })
}

/// Which objective to optimize over the LP relaxation of the instance
/// (`x in [0,1]^n`, `y >= 0`, `A x + G y <= b`, `B x <= b'`).
#[derive(Debug, Clone, Copy)]
pub enum RelaxationObjective<'a> {
    /// min h·y
    PhiLower,
    /// max h·y
    PhiUpper,
    /// Largest slack an existing cut can need: for an optimality cut
    /// max `constant + coeffs·x - phi` with phi boxed to `phi_range`; for a
    /// feasibility cut max `-(constant + coeffs·x)`.
    CutSlack {
        cut: &'a BendersCut,
        phi_range: (f64, f64),
    },
}

/// Solve an LP over the continuous relaxation of the instance.
///
/// Column order is `x (n)`, `y (p)` and, for optimality-cut slack bounds,
/// a trailing `phi`. The returned objective includes any cut constant.
pub fn solve_binary_relaxation(
    inst: &MilpInstance,
    objective: RelaxationObjective<'_>,
) -> Result<LpSolution, LpError> {
    let (n, p) = (inst.n, inst.p);
    let with_phi = matches!(
        objective,
        RelaxationObjective::CutSlack { cut, .. } if cut.kind == CutKind::Optimality
    );
    let nv = n + p + usize::from(with_phi);
    let mut obj = vec![0.0; nv];
    let mut constant = 0.0;
    let sense = match objective {
        RelaxationObjective::PhiLower | RelaxationObjective::PhiUpper => {
            obj[n..n + p].copy_from_slice(&inst.h);
            if matches!(objective, RelaxationObjective::PhiLower) {
                Sense::Min
            } else {
                Sense::Max
            }
        }
        RelaxationObjective::CutSlack { cut, .. } => {
            match cut.kind {
                CutKind::Optimality => {
                    obj[..n].copy_from_slice(&cut.coeffs);
                    obj[n + p] = -1.0;
                    constant = cut.constant;
                }
                CutKind::Feasibility => {
                    for (o, c) in obj[..n].iter_mut().zip(&cut.coeffs) {
                        *o = -c;
                    }
                    constant = -cut.constant;
                }
            }
            Sense::Max
        }
    };
    let mut lp = LinearProgram::new(sense, obj);
    for j in 0..n {
        lp.bounds[j] = (0.0, 1.0);
    }
    if let RelaxationObjective::CutSlack { phi_range, .. } = objective {
        if with_phi {
            lp.bounds[n + p] = phi_range;
        }
    }
    for i in 0..inst.m1 {
        let mut row = vec![0.0; nv];
        row[..n].copy_from_slice(&inst.a[i]);
        row[n..n + p].copy_from_slice(&inst.g[i]);
        lp.push_row(row, Relation::Le, inst.b[i]);
    }
    for k in 0..inst.m2 {
        let mut row = vec![0.0; nv];
        row[..n].copy_from_slice(&inst.bmat[k]);
        lp.push_row(row, Relation::Le, inst.bprime[k]);
    }
    let mut sol = solve_lp(&lp)?;
    if sol.status == LpStatus::Optimal {
        sol.objective += constant;
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{t1, t2};

    fn lp1(sense: Sense, c: Vec<f64>, rows: Vec<(Vec<f64>, Relation, f64)>) -> LinearProgram {
        let mut lp = LinearProgram::new(sense, c);
        for (a, r, b) in rows {
            lp.push_row(a, r, b);
        }
        lp
    }

    #[test]
    fn single_bounded_variable() {
        let lp = lp1(Sense::Max, vec![3.0], vec![(vec![1.0], Relation::Le, 4.0)]);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.primal[0] - 4.0).abs() < 1e-12);
        assert!((s.objective - 12.0).abs() < 1e-12);
        assert!((s.dual[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let lp = lp1(Sense::Max, vec![1.0], vec![(vec![-1.0], Relation::Le, 0.0)]);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn contradictory_rows() {
        let lp = lp1(
            Sense::Min,
            vec![1.0],
            vec![
                (vec![1.0], Relation::Le, 1.0),
                (vec![1.0], Relation::Ge, 2.0),
            ],
        );
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn min_problem_duals_follow_sign_convention() {
        // min 2a + 3b s.t. a + b >= 4, a <= 3
        let lp = lp1(
            Sense::Min,
            vec![2.0, 3.0],
            vec![
                (vec![1.0, 1.0], Relation::Ge, 4.0),
                (vec![1.0, 0.0], Relation::Le, 3.0),
            ],
        );
        let s = solve_lp(&lp).unwrap();
        assert!((s.objective - 9.0).abs() < 1e-9);
        assert!((s.dual[0] - 3.0).abs() < 1e-9);
        assert!((s.dual[1] + 1.0).abs() < 1e-9);
        let dual_obj = 4.0 * s.dual[0] + 3.0 * s.dual[1];
        assert!((dual_obj - s.objective).abs() < 1e-9);
    }

    #[test]
    fn boxed_and_free_variables() {
        // max x - y, x in [-2, 5], y free, y >= -3 via row, x + y <= 10
        let mut lp = lp1(
            Sense::Max,
            vec![1.0, -1.0],
            vec![
                (vec![0.0, 1.0], Relation::Ge, -3.0),
                (vec![1.0, 1.0], Relation::Le, 10.0),
            ],
        );
        lp.bounds = vec![(-2.0, 5.0), (f64::NEG_INFINITY, f64::INFINITY)];
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.primal[0] - 5.0).abs() < 1e-9);
        assert!((s.primal[1] + 3.0).abs() < 1e-9);
        assert!((s.objective - 8.0).abs() < 1e-9);
    }

    #[test]
    fn upper_bounded_only_variable() {
        // max -x with x <= -1 (bounds (-inf, -1]) and x >= -4 via row
        let mut lp = lp1(
            Sense::Max,
            vec![-1.0],
            vec![(vec![1.0], Relation::Ge, -4.0)],
        );
        lp.bounds = vec![(f64::NEG_INFINITY, -1.0)];
        let s = solve_lp(&lp).unwrap();
        assert!((s.primal[0] + 4.0).abs() < 1e-9);
    }

    #[test]
    fn equality_rows_and_redundancy() {
        // x + y = 2 twice (redundant), max x + 2y, x,y >= 0
        let lp = lp1(
            Sense::Max,
            vec![1.0, 2.0],
            vec![
                (vec![1.0, 1.0], Relation::Eq, 2.0),
                (vec![2.0, 2.0], Relation::Eq, 4.0),
            ],
        );
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let lp = lp1(
            Sense::Max,
            vec![1.0],
            vec![(vec![1.0, 2.0], Relation::Le, 1.0)],
        );
        assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));
        let mut lp = lp1(Sense::Max, vec![1.0], vec![]);
        lp.bounds[0] = (2.0, 1.0);
        assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));
    }

    #[test]
    fn relaxation_bounds_for_t1() {
        let lo = solve_binary_relaxation(&t1(), RelaxationObjective::PhiLower).unwrap();
        let hi = solve_binary_relaxation(&t1(), RelaxationObjective::PhiUpper).unwrap();
        assert!(lo.objective.abs() < 1e-12);
        assert!((hi.objective - 12.0).abs() < 1e-12);
        assert!(hi.primal[0].abs() < 1e-12 && (hi.primal[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn relaxation_bound_for_t2_and_zero_objective() {
        let lo = solve_binary_relaxation(&t2(), RelaxationObjective::PhiLower).unwrap();
        assert!((lo.objective - 2.0).abs() < 1e-9);
        let mut inst = t1();
        inst.h = vec![0.0];
        let hi = solve_binary_relaxation(&inst, RelaxationObjective::PhiUpper).unwrap();
        assert_eq!(hi.objective, 0.0);
    }
}
