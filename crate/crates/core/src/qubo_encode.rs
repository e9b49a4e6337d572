//! Master problem to QUBO conversion.
//!
//! The master maximizes `c·x + phi` subject to `B x <= b'` and the
//! accumulated Benders cuts. The QUBO built here is a minimization: the
//! objective enters negated, constraints enter as penalties. `phi` is a
//! fixed-point binary number; constraints are either turned into
//! equalities with a binary-encoded slack (squared penalty) or penalized
//! directly with the truncated exponential `pi * (g + g^2 / 2)` for
//! `g = lhs - rhs`, which needs no extra bits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp_simplex::{solve_binary_relaxation, LpError, LpStatus, RelaxationObjective};
use crate::model::{BendersCut, Conversion, CutKind, MilpInstance, PenaltyMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("phi cannot be encoded: the relaxation bound is unbounded")]
    Unbounded,
    #[error("the LP relaxation of the instance is infeasible")]
    RelaxationInfeasible,
    #[error("master constraint {0:?} cannot be satisfied by any x")]
    MasterInfeasible(ConstraintId),
    #[error(transparent)]
    Lp(#[from] LpError),
}

const INTEGRAL_TOL: f64 = 1e-9;

/// Bounds on the master variable `phi` from the LP relaxation: the least
/// and the greatest value `h·y` can take.
pub fn tighten_phi_bounds(inst: &MilpInstance) -> Result<(f64, f64), EncodeError> {
    let upper = solve_binary_relaxation(inst, RelaxationObjective::PhiUpper)?;
    match upper.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return Err(EncodeError::Unbounded),
        LpStatus::Infeasible => return Err(EncodeError::RelaxationInfeasible),
    }
    let lower = solve_binary_relaxation(inst, RelaxationObjective::PhiLower)?;
    match lower.status {
        LpStatus::Optimal => Ok((lower.objective, upper.objective)),
        LpStatus::Unbounded => Err(EncodeError::Unbounded),
        LpStatus::Infeasible => Err(EncodeError::RelaxationInfeasible),
    }
}

/// Bit length of `floor(v)` for `v >= 1`.
fn int_bit_len(v: f64) -> usize {
    let f = v.floor();
    if f >= u64::MAX as f64 {
        return 64;
    }
    (64 - (f as u64).leading_zeros()) as usize
}

/// Fixed-point layout of `phi`: `P` integer bits of weight `2^i`, `D`
/// fractional bits of weight `2^-j` and `N` negative bits of weight
/// `-2^(k-1)`, optionally followed by one negative fractional bit of weight
/// `-(1 - 2^-D)` when `-1 < lb < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiEncoding {
    pub int_bits: usize,
    pub frac_bits: usize,
    pub neg_bits: usize,
    pub fallback: bool,
    pub bit_weights: Vec<f64>,
}

impl PhiEncoding {
    pub fn num_bits(&self) -> usize {
        self.bit_weights.len()
    }

    pub fn min_value(&self) -> f64 {
        self.bit_weights.iter().filter(|w| **w < 0.0).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.bit_weights.iter().filter(|w| **w > 0.0).sum()
    }

    /// Spacing of the representable grid.
    pub fn resolution(&self) -> f64 {
        (0.5f64).powi(self.frac_bits as i32)
    }

    pub fn value(&self, bits: &[u8]) -> f64 {
        self.bit_weights
            .iter()
            .zip(bits)
            .filter(|(_, b)| **b != 0)
            .map(|(w, _)| w)
            .sum()
    }

    /// Whether `v` lies on the grid and inside the representable range.
    pub fn represents(&self, v: f64) -> bool {
        let r = self.resolution();
        let on_grid = ((v / r) - (v / r).round()).abs() <= 1e-9;
        on_grid && v >= self.min_value() - 1e-9 && v <= self.max_value() + 1e-9
    }
}

pub fn build_phi_encoding(lb: f64, ub: f64, epsilon: f64) -> PhiEncoding {
    let int_bits = if ub >= 1.0 { int_bit_len(ub) } else { 0 };
    let frac_bits = (1.0 / epsilon).log2().floor() as usize + 1;
    let neg_bits = if lb <= -1.0 { int_bit_len(lb.abs()) } else { 0 };
    let fallback = lb < 0.0 && lb > -1.0;

    let mut bit_weights = Vec::with_capacity(int_bits + frac_bits + neg_bits + 1);
    bit_weights.extend((0..int_bits).map(|i| 2f64.powi(i as i32)));
    bit_weights.extend((1..=frac_bits).map(|j| 0.5f64.powi(j as i32)));
    bit_weights.extend((1..=neg_bits).map(|k| -(2f64.powi(k as i32 - 1))));
    if fallback {
        bit_weights.push(-(1.0 - 0.5f64.powi(frac_bits as i32)));
    }
    PhiEncoding {
        int_bits,
        frac_bits,
        neg_bits,
        fallback,
        bit_weights,
    }
}

/// Penalty weights of the master QUBO. `ub` is the bound the constructive
/// rule derives every weight from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySet {
    pub ub: f64,
    pub obj_x: f64,
    pub obj_phi: f64,
    pub obj_cut: f64,
    pub cons_mp: f64,
}

pub fn compute_penalties(inst: &MilpInstance, phi_max: f64, mode: PenaltyMode) -> PenaltySet {
    let ub = inst.c.iter().sum::<f64>().abs() + phi_max.abs() + 1.0;
    match mode {
        PenaltyMode::Constructive => PenaltySet {
            ub,
            obj_x: 3.0 * ub,
            obj_phi: ub,
            obj_cut: ub,
            cons_mp: ub * ub,
        },
        PenaltyMode::Manual(m) => PenaltySet {
            ub,
            obj_x: m.obj_x,
            obj_phi: m.obj_phi,
            obj_cut: m.obj_cut,
            cons_mp: m.cons_mp,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintId {
    /// Row `k` of `B x <= b'`.
    Master(usize),
    /// Index into the master's cut list.
    Cut(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitRole {
    XBit(usize),
    PhiBit(usize),
    SlackBit {
        constraint: ConstraintId,
        position: usize,
    },
}

/// Binary expansion of one constraint's slack variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackEncoding {
    pub constraint: ConstraintId,
    pub first_bit: usize,
    pub weights: Vec<f64>,
    /// Largest slack the constraint can need over the relaxation.
    pub bound: f64,
}

/// Upper-triangular QUBO: `energy = offset + sum_{i<=j} q[i,j] b_i b_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboModel {
    pub num_bits: usize,
    #[serde(with = "terms_format", rename = "terms")]
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub registry: Vec<BitRole>,
    #[serde(default)]
    pub phi_weights: Vec<f64>,
    #[serde(default)]
    pub slacks: Vec<SlackEncoding>,
}

mod terms_format {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), f64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let list: Vec<(usize, usize, f64)> = map.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        let list = Vec::<(usize, usize, f64)>::deserialize(d)?;
        let mut map = BTreeMap::new();
        for (i, j, v) in list {
            *map.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
        Ok(map)
    }
}

impl QuboModel {
    /// A model with no roles attached; all bits are tagged as x bits.
    pub fn from_terms(num_bits: usize, terms: &[(usize, usize, f64)], offset: f64) -> Self {
        let mut b = QuboBuilder::new();
        for &(i, j, v) in terms {
            b.add(i, j, v);
        }
        QuboModel {
            num_bits,
            quadratic: b.terms,
            offset,
            registry: (0..num_bits).map(BitRole::XBit).collect(),
            phi_weights: Vec::new(),
            slacks: Vec::new(),
        }
    }

    pub fn energy(&self, bits: &[u8]) -> f64 {
        let mut e = self.offset;
        for (&(i, j), &q) in &self.quadratic {
            if bits[i] != 0 && bits[j] != 0 {
                e += q;
            }
        }
        e
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.quadratic.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn count_role(&self, pred: impl Fn(&BitRole) -> bool) -> usize {
        self.registry.iter().filter(|r| pred(r)).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("models always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Default)]
struct QuboBuilder {
    terms: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboBuilder {
    fn new() -> Self {
        Self::default()
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let key = (i.min(j), i.max(j));
        *self.terms.entry(key).or_insert(0.0) += v;
    }

    /// `weight * (sum a_i z_i + constant)^2` over binary z.
    fn add_squared(&mut self, lin: &[(usize, f64)], constant: f64, weight: f64) {
        let lin = merge(lin);
        self.offset += weight * constant * constant;
        for (k, &(i, a)) in lin.iter().enumerate() {
            // z^2 = z for binary z
            self.add(i, i, weight * (a * a + 2.0 * constant * a));
            for &(j, b) in &lin[k + 1..] {
                self.add(i, j, weight * 2.0 * a * b);
            }
        }
    }

    /// `weight * (g + g^2 / 2)` with `g = sum a_i z_i + constant`.
    fn add_exponential(&mut self, lin: &[(usize, f64)], constant: f64, weight: f64) {
        let lin = merge(lin);
        self.offset += weight * (constant + 0.5 * constant * constant);
        for (k, &(i, a)) in lin.iter().enumerate() {
            self.add(i, i, weight * (a + constant * a + 0.5 * a * a));
            for &(j, b) in &lin[k + 1..] {
                self.add(i, j, weight * a * b);
            }
        }
    }

    fn finish(mut self) -> (BTreeMap<(usize, usize), f64>, f64) {
        self.terms.retain(|_, v| *v != 0.0);
        (self.terms, self.offset)
    }
}

fn merge(lin: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut m: BTreeMap<usize, f64> = BTreeMap::new();
    for &(i, a) in lin {
        *m.entry(i).or_insert(0.0) += a;
    }
    m.into_iter().filter(|(_, a)| *a != 0.0).collect()
}

/// Everything the encoder needs to know about the current master problem.
#[derive(Debug, Clone, Copy)]
pub struct MasterProblem<'a> {
    pub inst: &'a MilpInstance,
    pub cuts: &'a [BendersCut],
    pub phi: &'a PhiEncoding,
    pub penalties: &'a PenaltySet,
}

fn is_integral(v: f64) -> bool {
    (v - v.round()).abs() <= INTEGRAL_TOL
}

fn slack_weights(bound: f64, frac_bits: usize) -> Vec<f64> {
    let int_bits = if bound >= 1.0 { int_bit_len(bound) } else { 0 };
    (0..int_bits)
        .map(|i| 2f64.powi(i as i32))
        .chain((1..=frac_bits).map(|j| 0.5f64.powi(j as i32)))
        .collect()
}

/// Largest slack of master row `k`: `b'_k - min_x B_k x`.
fn master_slack_bound(inst: &MilpInstance, k: usize) -> f64 {
    let min_lhs: f64 = inst.bmat[k].iter().map(|v| v.min(0.0)).sum();
    inst.bprime[k] - min_lhs
}

fn cut_slack_bound(
    inst: &MilpInstance,
    cut: &BendersCut,
    phi: &PhiEncoding,
) -> Result<Option<f64>, EncodeError> {
    let sol = solve_binary_relaxation(
        inst,
        RelaxationObjective::CutSlack {
            cut,
            phi_range: (phi.min_value(), phi.max_value()),
        },
    )?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(sol.objective)),
        LpStatus::Infeasible => Err(EncodeError::RelaxationInfeasible),
        LpStatus::Unbounded => Ok(None),
    }
}

/// Build the minimization QUBO of the master problem.
pub fn encode_master(
    master: &MasterProblem<'_>,
    method: Conversion,
) -> Result<QuboModel, EncodeError> {
    let MasterProblem {
        inst,
        cuts,
        phi,
        penalties,
    } = *master;
    let n = inst.n;
    let mut registry: Vec<BitRole> = (0..n).map(BitRole::XBit).collect();
    registry.extend((0..phi.num_bits()).map(BitRole::PhiBit));
    let phi_bit = |i: usize| n + i;

    let mut qb = QuboBuilder::new();
    for (j, &cj) in inst.c.iter().enumerate() {
        qb.add(j, j, -penalties.obj_x * cj);
    }
    for (i, &w) in phi.bit_weights.iter().enumerate() {
        qb.add(phi_bit(i), phi_bit(i), -penalties.obj_phi * w);
    }

    // Each constraint as `lin·z + constant <= 0`, plus its penalty weight,
    // the fractional bits its slack needs and an upper bound on that slack.
    struct Ineq {
        id: ConstraintId,
        lin: Vec<(usize, f64)>,
        constant: f64,
        weight: f64,
        integral: bool,
    }
    let mut ineqs = Vec::with_capacity(inst.m2 + cuts.len());
    for k in 0..inst.m2 {
        let lin: Vec<(usize, f64)> = inst.bmat[k].iter().copied().enumerate().collect();
        let integral = inst.bmat[k].iter().all(|v| is_integral(*v)) && is_integral(inst.bprime[k]);
        ineqs.push(Ineq {
            id: ConstraintId::Master(k),
            lin,
            constant: -inst.bprime[k],
            weight: penalties.cons_mp,
            integral,
        });
    }
    for (ci, cut) in cuts.iter().enumerate() {
        let (lin, constant, integral) = match cut.kind {
            // phi - constant - coeffs·x <= 0
            CutKind::Optimality => {
                let mut lin: Vec<(usize, f64)> = cut
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, a)| (j, -a))
                    .collect();
                lin.extend(
                    phi.bit_weights
                        .iter()
                        .enumerate()
                        .map(|(i, w)| (phi_bit(i), *w)),
                );
                (lin, -cut.constant, false)
            }
            // constant + coeffs·x <= 0
            CutKind::Feasibility => {
                let lin: Vec<(usize, f64)> = cut.coeffs.iter().copied().enumerate().collect();
                let integral =
                    is_integral(cut.constant) && cut.coeffs.iter().all(|v| is_integral(*v));
                (lin, cut.constant, integral)
            }
        };
        ineqs.push(Ineq {
            id: ConstraintId::Cut(ci),
            lin,
            constant,
            weight: penalties.obj_cut,
            integral,
        });
    }

    let mut slacks = Vec::new();
    let mut next_bit = n + phi.num_bits();
    for ineq in &ineqs {
        match method {
            Conversion::Exponential => {
                qb.add_exponential(&ineq.lin, ineq.constant, ineq.weight);
            }
            Conversion::Slack => {
                let bound = match ineq.id {
                    ConstraintId::Master(k) => master_slack_bound(inst, k),
                    ConstraintId::Cut(ci) => match cut_slack_bound(inst, &cuts[ci], phi)? {
                        Some(b) => b,
                        None => return Err(EncodeError::Unbounded),
                    },
                };
                if bound < -1e-9 {
                    return Err(EncodeError::MasterInfeasible(ineq.id));
                }
                let frac = if ineq.integral { 0 } else { phi.frac_bits };
                let weights = slack_weights(bound.max(0.0), frac);
                let mut lin = ineq.lin.clone();
                for (pos, &w) in weights.iter().enumerate() {
                    registry.push(BitRole::SlackBit {
                        constraint: ineq.id,
                        position: pos,
                    });
                    lin.push((next_bit + pos, w));
                }
                qb.add_squared(&lin, ineq.constant, ineq.weight);
                slacks.push(SlackEncoding {
                    constraint: ineq.id,
                    first_bit: next_bit,
                    weights,
                    bound,
                });
                next_bit = registry.len();
            }
        }
    }

    let (quadratic, offset) = qb.finish();
    Ok(QuboModel {
        num_bits: registry.len(),
        quadratic,
        offset,
        registry,
        phi_weights: phi.bit_weights.clone(),
        slacks,
    })
}

/// A bitstring read back through the model's registry.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub x: Vec<u8>,
    pub phi: f64,
    pub slacks: BTreeMap<ConstraintId, f64>,
}

pub fn decode(model: &QuboModel, bits: &[u8]) -> Decoded {
    let n = model.count_role(|r| matches!(r, BitRole::XBit(_)));
    let mut x = vec![0u8; n];
    let mut phi = 0.0;
    for (idx, role) in model.registry.iter().enumerate() {
        match *role {
            BitRole::XBit(j) => x[j] = bits[idx],
            BitRole::PhiBit(pos) if bits[idx] != 0 => phi += model.phi_weights[pos],
            _ => {}
        }
    }
    let slacks = model
        .slacks
        .iter()
        .map(|s| {
            let v = s
                .weights
                .iter()
                .enumerate()
                .filter(|(pos, _)| bits[s.first_bit + pos] != 0)
                .map(|(_, w)| w)
                .sum();
            (s.constraint, v)
        })
        .collect();
    Decoded { x, phi, slacks }
}
