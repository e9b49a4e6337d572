//! Problem data, cuts, solver configuration and reports.
//!
//! The instance shape is fixed:
//!
//! ```text
//! maximize   c·x + h·y
//! subject to A x + G y <= b
//!            B x       <= b'
//!            x in {0,1}^n, y >= 0
//! ```

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::lp_simplex::{solve_binary_relaxation, LpStatus, RelaxationObjective};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("dimension mismatch in `{field}`: expected {expected}, found {found}")]
    DimensionMismatch {
        field: &'static str,
        expected: String,
        found: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("generator rejected {0} consecutive draws")]
    GeneratorExhausted(usize),
}

/// A binary/continuous MILP with coupling rows `A x + G y <= b` and
/// x-only rows `B x <= b'`.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpInstance {
    pub n: usize,
    pub p: usize,
    pub m1: usize,
    pub m2: usize,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub bmat: Vec<Vec<f64>>,
    pub bprime: Vec<f64>,
}

fn check_len(field: &'static str, v: &[f64], expected: usize) -> Result<(), ModelError> {
    if v.len() != expected {
        return Err(ModelError::DimensionMismatch {
            field,
            expected: expected.to_string(),
            found: v.len().to_string(),
        });
    }
    Ok(())
}

fn check_matrix(
    field: &'static str,
    m: &[Vec<f64>],
    rows: usize,
    cols: usize,
) -> Result<(), ModelError> {
    let bad = m.len() != rows || m.iter().any(|r| r.len() != cols);
    if bad {
        let found_cols = m.first().map(|r| r.len()).unwrap_or(0);
        return Err(ModelError::DimensionMismatch {
            field,
            expected: format!("{rows}x{cols}"),
            found: format!("{}x{}", m.len(), found_cols),
        });
    }
    Ok(())
}

impl MilpInstance {
    /// Checks every shape invariant.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 || self.p == 0 || self.m1 == 0 {
            return Err(ModelError::Invalid(format!(
                "need n >= 1, p >= 1, m1 >= 1 (got n={}, p={}, m1={})",
                self.n, self.p, self.m1
            )));
        }
        check_len("c", &self.c, self.n)?;
        check_len("h", &self.h, self.p)?;
        check_len("b", &self.b, self.m1)?;
        check_len("bprime", &self.bprime, self.m2)?;
        check_matrix("A", &self.a, self.m1, self.n)?;
        check_matrix("G", &self.g, self.m1, self.p)?;
        check_matrix("B", &self.bmat, self.m2, self.n)?;
        let finite = self
            .c
            .iter()
            .chain(&self.h)
            .chain(&self.b)
            .chain(&self.bprime)
            .chain(self.a.iter().flatten())
            .chain(self.g.iter().flatten())
            .chain(self.bmat.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(ModelError::Invalid("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// `b - A x` for a (possibly fractional) x.
    pub fn residual_rhs(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| bi - dot(row, x))
            .collect()
    }

    pub fn x_objective(&self, x: &[u8]) -> f64 {
        self.c
            .iter()
            .zip(x)
            .map(|(c, &xi)| if xi != 0 { *c } else { 0.0 })
            .sum()
    }

    /// Whether `(x, y)` satisfies every constraint of the full problem.
    pub fn is_feasible(&self, x: &[u8], y: &[f64], tol: f64) -> bool {
        if x.len() != self.n || y.len() != self.p || y.iter().any(|v| *v < -tol) {
            return false;
        }
        let xf = to_f64(x);
        let coupling = self
            .a
            .iter()
            .zip(&self.g)
            .zip(&self.b)
            .all(|((arow, grow), bi)| dot(arow, &xf) + dot(grow, y) <= bi + tol);
        coupling && self.master_rows_ok(x, tol)
    }

    pub(crate) fn master_rows_ok(&self, x: &[u8], tol: f64) -> bool {
        let xf = to_f64(x);
        self.bmat
            .iter()
            .zip(&self.bprime)
            .all(|(row, bk)| dot(row, &xf) <= bk + tol)
    }

    pub fn is_integral(&self) -> bool {
        let int = |v: &f64| (v - v.round()).abs() <= 1e-9;
        self.a.iter().flatten().all(int) && self.b.iter().all(int)
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc::from(self);
        serde_json::to_string_pretty(&doc).expect("instance documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
        let inst = MilpInstance {
            n: doc.n,
            p: doc.p,
            m1: doc.m1,
            m2: doc.m2,
            c: unwrap_vec(doc.c),
            h: unwrap_vec(doc.h),
            a: unwrap_mat(doc.a),
            g: unwrap_mat(doc.g),
            b: unwrap_vec(doc.b),
            bmat: unwrap_mat(doc.bmat),
            bprime: unwrap_vec(doc.bprime),
        };
        inst.validate()?;
        Ok(inst)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn to_f64(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&v| f64::from(v)).collect()
}

/// Serialize an instance to its JSON document.
pub fn save_instance(inst: &MilpInstance) -> String {
    inst.to_json()
}

/// Parse and validate an instance JSON document.
pub fn load_instance(text: &str) -> Result<MilpInstance, ModelError> {
    MilpInstance::from_json(text)
}

/// A float written as a decimal string (shortest round-trip form). Numbers
/// are accepted on input as well.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Real(f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:?}", self.0))
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                f64::from_str(v.trim())
                    .map(Real)
                    .map_err(|_| E::custom(format!("`{v}` is not a decimal number")))
            }
        }
        d.deserialize_any(RealVisitor)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n: usize,
    p: usize,
    m1: usize,
    m2: usize,
    c: Vec<Real>,
    h: Vec<Real>,
    b: Vec<Real>,
    bprime: Vec<Real>,
    #[serde(rename = "A")]
    a: Vec<Vec<Real>>,
    #[serde(rename = "G")]
    g: Vec<Vec<Real>>,
    #[serde(rename = "B")]
    bmat: Vec<Vec<Real>>,
}

impl From<&MilpInstance> for InstanceDoc {
    fn from(i: &MilpInstance) -> Self {
        let v = |x: &[f64]| x.iter().copied().map(Real).collect::<Vec<_>>();
        let m = |x: &[Vec<f64>]| x.iter().map(|r| v(r)).collect::<Vec<_>>();
        InstanceDoc {
            n: i.n,
            p: i.p,
            m1: i.m1,
            m2: i.m2,
            c: v(&i.c),
            h: v(&i.h),
            b: v(&i.b),
            bprime: v(&i.bprime),
            a: m(&i.a),
            g: m(&i.g),
            bmat: m(&i.bmat),
        }
    }
}

fn unwrap_vec(v: Vec<Real>) -> Vec<f64> {
    v.into_iter().map(|r| r.0).collect()
}

fn unwrap_mat(m: Vec<Vec<Real>>) -> Vec<Vec<f64>> {
    m.into_iter().map(unwrap_vec).collect()
}

/// Ranges for random instance generation. Bounds are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n: (usize, usize),
    pub p: (usize, usize),
    pub m1: (usize, usize),
    pub bprime: (i64, i64),
    /// Keep only instances where some master-feasible x has an infeasible
    /// subproblem, i.e. at least one feasibility cut can arise.
    pub require_feasibility_cut: bool,
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n: (2, 5),
            p: (2, 10),
            m1: (5, 14),
            bprime: (1, 4),
            require_feasibility_cut: false,
            max_attempts: 1000,
        }
    }
}

impl GeneratorConfig {
    pub fn with_max_n(mut self, max_n: usize) -> Self {
        self.n.1 = max_n.max(self.n.0);
        self
    }
}

/// Draw a generic instance with the default ranges.
pub fn generate_generic_instance(seed: u64) -> Result<MilpInstance, ModelError> {
    generate_instance(seed, &GeneratorConfig::default())
}

pub fn generate_instance(seed: u64, cfg: &GeneratorConfig) -> Result<MilpInstance, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.max_attempts {
        let inst = draw(&mut rng, cfg);
        if accept(&inst, cfg) {
            return Ok(inst);
        }
    }
    Err(ModelError::GeneratorExhausted(cfg.max_attempts))
}

fn draw(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> MilpInstance {
    let n = rng.gen_range(cfg.n.0..=cfg.n.1);
    let p = rng.gen_range(cfg.p.0..=cfg.p.1);
    let m1 = rng.gen_range(cfg.m1.0..=cfg.m1.1);
    let mut int = |lo: i64, hi: i64| rng.gen_range(lo..=hi) as f64;
    let a = (0..m1)
        .map(|_| (0..n).map(|_| int(0, 10)).collect())
        .collect();
    let b = (0..m1).map(|_| int(0, 10)).collect();
    let g = (0..m1)
        .map(|_| (0..p).map(|_| int(-5, 5)).collect())
        .collect();
    let bprime = vec![int(cfg.bprime.0, cfg.bprime.1)];
    let c = (0..n).map(|_| int(0, 10)).collect();
    let h = (0..p).map(|_| int(0, 10)).collect();
    MilpInstance {
        n,
        p,
        m1,
        m2: 1,
        c,
        h,
        a,
        g,
        b,
        bmat: vec![vec![1.0; n]],
        bprime,
    }
}

fn accept(inst: &MilpInstance, cfg: &GeneratorConfig) -> bool {
    match solve_binary_relaxation(inst, RelaxationObjective::PhiUpper) {
        Ok(sol) if sol.status == LpStatus::Optimal => {}
        _ => return false,
    }
    !cfg.require_feasibility_cut || has_infeasible_subproblem(inst)
}

fn has_infeasible_subproblem(inst: &MilpInstance) -> bool {
    (0..1u64 << inst.n).any(|mask| {
        let x: Vec<u8> = (0..inst.n).map(|j| ((mask >> j) & 1) as u8).collect();
        inst.master_rows_ok(&x, 1e-9)
            && matches!(
                crate::cuts::solve_subproblem(inst, &x),
                Ok(crate::cuts::SubproblemOutcome::Infeasible)
            )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    Optimality,
    Feasibility,
}

/// A Benders cut over the master variables.
///
/// Optimality: `constant + coeffs·x - phi >= 0`.
/// Feasibility: `constant + coeffs·x <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendersCut {
    pub kind: CutKind,
    pub coeffs: Vec<f64>,
    pub constant: f64,
    pub mu: Vec<f64>,
    pub iteration_created: usize,
}

impl BendersCut {
    /// `constant + coeffs·x`
    pub fn affine_value(&self, x: &[f64]) -> f64 {
        self.constant + dot(&self.coeffs, x)
    }

    pub fn affine_value_bin(&self, x: &[u8]) -> f64 {
        self.affine_value(&to_f64(x))
    }

    /// True when the cut holds at `(x, phi)` within `tol`.
    pub fn is_satisfied(&self, x: &[u8], phi: f64, tol: f64) -> bool {
        let v = self.affine_value_bin(x);
        match self.kind {
            CutKind::Optimality => v - phi >= -tol,
            CutKind::Feasibility => v <= tol,
        }
    }

    /// Same kind and coefficients within `tol`.
    pub fn same_content(&self, other: &BendersCut, tol: f64) -> bool {
        self.kind == other.kind
            && (self.constant - other.constant).abs() <= tol
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conversion {
    Slack,
    Exponential,
}

impl Conversion {
    pub fn tag(self) -> &'static str {
        match self {
            Conversion::Slack => "S",
            Conversion::Exponential => "E",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManualPenalties {
    pub obj_x: f64,
    pub obj_phi: f64,
    pub obj_cut: f64,
    pub cons_mp: f64,
}

impl ManualPenalties {
    pub fn unit() -> Self {
        ManualPenalties {
            obj_x: 1.0,
            obj_phi: 1.0,
            obj_cut: 1.0,
            cons_mp: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PenaltyMode {
    Constructive,
    Manual(ManualPenalties),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MulticutConfig {
    /// Candidate solutions kept from the sample set.
    pub k: usize,
    /// Maximum number of cuts added per iteration.
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Exact,
    Annealing,
}

impl Backend {
    pub fn id(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Annealing => "sa",
        }
    }
}

impl FromStr for Backend {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Backend::Exact),
            "sa" => Ok(Backend::Annealing),
            other => Err(ModelError::Invalid(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendersConfig {
    pub conversion: Conversion,
    pub penalties: PenaltyMode,
    pub multicut: Option<MulticutConfig>,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub backend: Backend,
    pub rng_seed: u64,
    pub sa_sweeps: usize,
    pub sa_restarts: usize,
}

impl Default for BendersConfig {
    fn default() -> Self {
        BendersConfig {
            conversion: Conversion::Slack,
            penalties: PenaltyMode::Constructive,
            multicut: None,
            epsilon: 0.25,
            max_iterations: 30,
            convergence_tol: 1e-6,
            backend: Backend::Exact,
            rng_seed: 0,
            sa_sweeps: 2000,
            sa_restarts: 8,
        }
    }
}

impl BendersConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(ModelError::Invalid(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(ModelError::Invalid("max_iterations must be >= 1".into()));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(ModelError::Invalid("convergence_tol must be >= 0".into()));
        }
        if let Some(mc) = self.multicut {
            if mc.m == 0 || mc.m > mc.k {
                return Err(ModelError::Invalid(format!(
                    "multicut needs 1 <= M <= k (got k={}, M={})",
                    mc.k, mc.m
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Feasible => "Feasible",
            SolveStatus::Infeasible => "Infeasible",
            SolveStatus::IterationLimit => "IterationLimit",
        }
    }
}

impl FromStr for SolveStatus {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Optimal" => Ok(SolveStatus::Optimal),
            "Feasible" => Ok(SolveStatus::Feasible),
            "Infeasible" => Ok(SolveStatus::Infeasible),
            "IterationLimit" => Ok(SolveStatus::IterationLimit),
            other => Err(ModelError::Invalid(format!("unknown status `{other}`"))),
        }
    }
}

/// Why the decomposition loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    /// An iteration produced no cut that was not already in the master.
    Stalled,
    IterationLimit,
    MasterInfeasible,
}

/// Wall-clock time spent per phase, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub bounds_ms: f64,
    pub encode_ms: f64,
    pub qubo_ms: f64,
    pub subproblem_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub num_bits: usize,
    /// Decoded master point, when a master-feasible sample existed.
    pub x_hat: Option<Vec<u8>>,
    pub phi_hat: Option<f64>,
    pub subproblem_value: Option<f64>,
    /// The lowest-energy sample violated `B x <= b'`.
    pub best_sample_master_infeasible: bool,
    pub cuts_added: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub termination: Termination,
    pub x_best: Vec<u8>,
    pub y_best: Vec<f64>,
    pub objective: Option<f64>,
    pub iterations: usize,
    pub cuts: Vec<BendersCut>,
    pub qubit_counts: Vec<usize>,
    pub phi_bounds: (f64, f64),
    pub trace: Vec<IterationTrace>,
    /// Iterations in which the lowest-energy sample decoded to an x
    /// violating `B x <= b'`.
    pub penalty_failures: usize,
    pub wall_time_ms: PhaseTimes,
}

impl SolveReport {
    /// True when the report carries a solution of the full problem.
    pub fn has_solution(&self) -> bool {
        self.objective.is_some()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;

    #[test]
    fn t1_round_trips() {
        let inst = t1();
        let back = load_instance(&save_instance(&inst)).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn awkward_floats_round_trip_bitwise() {
        let mut inst = t1();
        inst.c[0] = 0.1 + 0.2;
        inst.h[0] = -1.0e-310;
        inst.b[0] = f64::MAX;
        let back = load_instance(&save_instance(&inst)).unwrap();
        assert_eq!(inst.c[0].to_bits(), back.c[0].to_bits());
        assert_eq!(inst.h[0].to_bits(), back.h[0].to_bits());
        assert_eq!(inst.b[0].to_bits(), back.b[0].to_bits());
    }

    #[test]
    fn plain_numbers_are_accepted() {
        let doc = r#"{"n":1,"p":1,"m1":1,"m2":1,"c":[2],"h":[3.0],"b":["4"],
            "bprime":[1],"A":[[1]],"G":[[1]],"B":[[1]]}"#;
        assert_eq!(load_instance(doc).unwrap(), t1());
    }

    #[test]
    fn shape_mismatch_is_reported_as_dimension_error() {
        let doc = r#"{"n":2,"p":1,"m1":2,"m2":0,"c":[1,1],"h":[1],"b":[1,1],
            "bprime":[],"A":[[1,2,3],[4,5,6]],"G":[[1],[1]],"B":[]}"#;
        match load_instance(doc) {
            Err(ModelError::DimensionMismatch { field, .. }) => assert_eq!(field, "A"),
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_a_schema_error() {
        let doc = r#"{"n":1,"p":1,"m1":1,"m2":0,"c":[1],"h":[1],"b":[1],
            "bprime":[],"A":[[1]],"G":[[1]]}"#;
        assert!(matches!(load_instance(doc), Err(ModelError::Schema(_))));
        let bad_number = r#"{"n":1,"p":1,"m1":1,"m2":0,"c":["one"],"h":[1],"b":[1],
            "bprime":[],"A":[[1]],"G":[[1]],"B":[]}"#;
        assert!(matches!(
            load_instance(bad_number),
            Err(ModelError::Schema(_))
        ));
    }

    #[test]
    fn zero_sized_instances_are_rejected() {
        let mut inst = t1();
        inst.p = 0;
        inst.h.clear();
        inst.g = vec![vec![]];
        assert!(matches!(inst.validate(), Err(ModelError::Invalid(_))));
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_generic_instance(7).unwrap();
        let b = generate_generic_instance(7).unwrap();
        assert_eq!(save_instance(&a), save_instance(&b));
        assert_ne!(
            save_instance(&a),
            save_instance(&generate_generic_instance(8).unwrap())
        );
    }

    #[test]
    fn feasibility_cut_filter_keeps_only_cut_producing_instances() {
        let cfg = GeneratorConfig {
            require_feasibility_cut: true,
            ..GeneratorConfig::default()
        };
        for seed in 0..5 {
            let inst = generate_instance(seed, &cfg).unwrap();
            assert!(has_infeasible_subproblem(&inst));
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = BendersConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.multicut = Some(MulticutConfig { k: 2, m: 3 });
        assert!(cfg.validate().is_err());
        cfg.multicut = None;
        cfg.epsilon = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn cut_satisfaction_follows_canonical_forms() {
        let opt = BendersCut {
            kind: CutKind::Optimality,
            coeffs: vec![-3.0],
            constant: 12.0,
            mu: vec![3.0],
            iteration_created: 1,
        };
        assert!(opt.is_satisfied(&[1], 9.0, 0.0));
        assert!(!opt.is_satisfied(&[1], 9.5, 0.0));
        let feas = BendersCut {
            kind: CutKind::Feasibility,
            coeffs: vec![-1.0],
            constant: 1.0,
            mu: vec![-1.0, -1.0],
            iteration_created: 1,
        };
        assert!(feas.is_satisfied(&[1], 0.0, 0.0));
        assert!(!feas.is_satisfied(&[0], 0.0, 0.0));
    }
}
