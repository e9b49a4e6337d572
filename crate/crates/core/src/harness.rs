//! Brute-force oracle, benchmark sweeps and the metrics computed from them.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benders::hbd_solve;
use crate::cuts::{solve_subproblem, CutError, SubproblemOutcome};
use crate::model::{
    dot, Backend, BendersConfig, Conversion, ManualPenalties, MilpInstance, ModelError,
    MulticutConfig, PenaltyMode, SolveReport,
};
use crate::qubo_encode::{build_phi_encoding, tighten_phi_bounds};

/// Largest n the oracle will enumerate.
pub const ORACLE_MAX_N: usize = 20;
/// Relative tolerance for "matches the oracle".
pub const OPTIMALITY_TOL: f64 = 1e-6;

pub const CSV_HEADER: [&str; 9] = [
    "instance_seed",
    "variant",
    "status",
    "objective",
    "opt",
    "gap",
    "iterations",
    "qubit_max",
    "wall_time_ms",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("oracle needs n <= {ORACLE_MAX_N}, got {0}")]
    TooLarge(usize),
    #[error(transparent)]
    Subproblem(#[from] CutError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleResult {
    Optimal {
        optimum: f64,
        x: Vec<u8>,
        y: Vec<f64>,
    },
    Infeasible,
}

impl OracleResult {
    pub fn optimum(&self) -> Option<f64> {
        match self {
            OracleResult::Optimal { optimum, .. } => Some(*optimum),
            OracleResult::Infeasible => None,
        }
    }
}

/// Enumerate every x with `B x <= b'` and solve its subproblem. On ties the
/// first x in enumeration order (x_0 least significant) wins.
pub fn oracle_solve(inst: &MilpInstance) -> Result<OracleResult, HarnessError> {
    if inst.n > ORACLE_MAX_N {
        return Err(HarnessError::TooLarge(inst.n));
    }
    let mut best = OracleResult::Infeasible;
    for mask in 0u64..1 << inst.n {
        let x: Vec<u8> = (0..inst.n).map(|j| ((mask >> j) & 1) as u8).collect();
        if !inst.master_rows_ok(&x, 1e-9) {
            continue;
        }
        if let SubproblemOutcome::Feasible { objective, y, .. } = solve_subproblem(inst, &x)? {
            let total = inst.x_objective(&x) + objective;
            if best.optimum().is_none_or(|o| total > o) {
                best = OracleResult::Optimal {
                    optimum: total,
                    x,
                    y,
                };
            }
        }
    }
    Ok(best)
}

/// A named solver configuration in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub config: BendersConfig,
}

impl Variant {
    pub const STANDARD: [&'static str; 7] = [
        "HBD_S_C",
        "HBD_E_C",
        "HBD_S_M",
        "HBD_E_M",
        "HBD_S_C_MC",
        "HBD_E_C_MC",
        "SA",
    ];

    /// Build a variant from its label. `HBD_<S|E>_<C|M>[_MC]` selects
    /// conversion, penalties and multicut (k=5, M=3) on the exact backend;
    /// `SA` is the same loop with annealing and unit manual penalties.
    pub fn from_label(label: &str, base: &BendersConfig) -> Result<Self, HarnessError> {
        let unknown = || HarnessError::UnknownVariant(label.to_string());
        let mut config = base.clone();
        if label == "SA" {
            config.backend = Backend::Annealing;
            config.conversion = Conversion::Slack;
            config.penalties = PenaltyMode::Manual(ManualPenalties::unit());
            config.multicut = None;
        } else {
            let parts: Vec<&str> = label.split('_').collect();
            if !(parts.len() == 3 || parts.len() == 4 && parts[3] == "MC") || parts[0] != "HBD" {
                return Err(unknown());
            }
            config.backend = Backend::Exact;
            config.conversion = match parts[1] {
                "S" => Conversion::Slack,
                "E" => Conversion::Exponential,
                _ => return Err(unknown()),
            };
            config.penalties = match parts[2] {
                "C" => PenaltyMode::Constructive,
                "M" => PenaltyMode::Manual(ManualPenalties::unit()),
                _ => return Err(unknown()),
            };
            config.multicut = (parts.len() == 4).then_some(MulticutConfig { k: 5, m: 3 });
        }
        Ok(Variant {
            label: label.to_string(),
            config,
        })
    }

    pub fn parse_list(list: &str, base: &BendersConfig) -> Result<Vec<Self>, HarnessError> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Variant::from_label(s, base))
            .collect()
    }
}

/// One CSV row. Columns after `wall_time_ms` are not part of the CSV and
/// only travel in the JSON record dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance_seed: u64,
    pub variant: String,
    /// A solve status, or `Error`.
    pub status: String,
    pub objective: Option<f64>,
    pub opt: Option<f64>,
    pub gap: Option<f64>,
    pub iterations: usize,
    pub qubit_max: usize,
    pub wall_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extra: Option<RecordExtra>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordExtra {
    /// The oracle optimum is (near) zero, so `gap` is an absolute difference.
    pub gap_absolute: bool,
    /// The optimal subproblem value is not on the encoded phi grid.
    pub phi_grid_miss: bool,
    pub termination: Option<String>,
    pub penalty_failures: usize,
    pub error: Option<String>,
}

impl BenchmarkRecord {
    pub fn has_solution(&self) -> bool {
        self.objective.is_some()
    }

    pub fn is_optimal(&self) -> bool {
        match (self.objective, self.opt) {
            (Some(obj), Some(opt)) => matches_optimum(obj, opt),
            _ => false,
        }
    }
}

pub fn matches_optimum(obj: f64, opt: f64) -> bool {
    (obj - opt).abs() <= OPTIMALITY_TOL * (1.0 + opt.abs())
}

/// `(opt - obj) / |opt|`, or `opt - obj` when `opt` is zero. The flag says
/// which one was used.
pub fn optimality_gap(obj: f64, opt: f64) -> (f64, bool) {
    if opt.abs() <= 1e-9 {
        (opt - obj, true)
    } else {
        ((opt - obj) / opt.abs(), false)
    }
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    Some(Quartiles {
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantMetrics {
    pub records: usize,
    /// Records whose oracle found an optimum; the rates use this base.
    pub solvable: usize,
    pub feasible: usize,
    pub optimal: usize,
    pub errors: usize,
    pub feasibility_rate: f64,
    pub optimality_rate: f64,
    pub gap: Option<Quartiles>,
    pub iterations: Option<Quartiles>,
    pub qubit_max: Option<Quartiles>,
}

pub fn compute_metrics(records: &[BenchmarkRecord]) -> BTreeMap<String, VariantMetrics> {
    let mut by_variant: BTreeMap<String, Vec<&BenchmarkRecord>> = BTreeMap::new();
    for r in records {
        by_variant.entry(r.variant.clone()).or_default().push(r);
    }
    by_variant
        .into_iter()
        .map(|(label, rs)| {
            let solvable: Vec<_> = rs.iter().filter(|r| r.opt.is_some()).collect();
            let feasible = solvable.iter().filter(|r| r.has_solution()).count();
            let optimal = solvable.iter().filter(|r| r.is_optimal()).count();
            let rate = |k: usize| {
                if solvable.is_empty() {
                    0.0
                } else {
                    k as f64 / solvable.len() as f64
                }
            };
            let gaps: Vec<f64> = rs.iter().filter_map(|r| r.gap).collect();
            let iters: Vec<f64> = rs.iter().map(|r| r.iterations as f64).collect();
            let qubits: Vec<f64> = rs.iter().map(|r| r.qubit_max as f64).collect();
            let m = VariantMetrics {
                records: rs.len(),
                solvable: solvable.len(),
                feasible,
                optimal,
                errors: rs.iter().filter(|r| r.status == "Error").count(),
                feasibility_rate: rate(feasible),
                optimality_rate: rate(optimal),
                gap: quartiles(&gaps),
                iterations: quartiles(&iters),
                qubit_max: quartiles(&qubits),
            };
            (label, m)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BenchOptions {
    /// Fill `wall_time_ms`. Off by default so reruns are byte-identical.
    pub timings: bool,
}

/// Was the optimal subproblem value representable on the phi grid?
fn phi_grid_miss(inst: &MilpInstance, oracle: &OracleResult, epsilon: f64) -> bool {
    let OracleResult::Optimal { y, .. } = oracle else {
        return false;
    };
    match tighten_phi_bounds(inst) {
        Ok((lb, ub)) => !build_phi_encoding(lb, ub, epsilon).represents(dot(&inst.h, y)),
        Err(_) => false,
    }
}

/// Turn a report (or solver error) into a record.
pub fn make_record(
    seed: u64,
    variant: &Variant,
    inst: &MilpInstance,
    oracle: &OracleResult,
    outcome: Result<SolveReport, String>,
    timings: bool,
) -> BenchmarkRecord {
    let opt = oracle.optimum();
    let grid_miss = phi_grid_miss(inst, oracle, variant.config.epsilon);
    match outcome {
        Ok(report) => {
            let (gap, gap_absolute) = match (report.objective, opt) {
                (Some(obj), Some(o)) => {
                    let (g, abs) = optimality_gap(obj, o);
                    (Some(g), abs)
                }
                _ => (None, false),
            };
            BenchmarkRecord {
                instance_seed: seed,
                variant: variant.label.clone(),
                status: report.status.as_str().to_string(),
                objective: report.objective,
                opt,
                gap,
                iterations: report.iterations,
                qubit_max: report.qubit_counts.iter().copied().max().unwrap_or(0),
                wall_time_ms: timings.then_some(report.wall_time_ms.total_ms),
                extra: Some(RecordExtra {
                    gap_absolute,
                    phi_grid_miss: grid_miss,
                    termination: Some(format!("{:?}", report.termination)),
                    penalty_failures: report.penalty_failures,
                    error: None,
                }),
            }
        }
        Err(e) => BenchmarkRecord {
            instance_seed: seed,
            variant: variant.label.clone(),
            status: "Error".to_string(),
            objective: None,
            opt,
            gap: None,
            iterations: 0,
            qubit_max: 0,
            wall_time_ms: None,
            extra: Some(RecordExtra {
                gap_absolute: false,
                phi_grid_miss: grid_miss,
                termination: None,
                penalty_failures: 0,
                error: Some(e),
            }),
        },
    }
}

/// Solve every instance with every variant. Records come back in
/// (instance, variant) order however the work was scheduled.
pub fn run_benchmark(
    instances: &[(u64, MilpInstance)],
    variants: &[Variant],
    opts: BenchOptions,
) -> Result<Vec<BenchmarkRecord>, HarnessError> {
    let oracles: Vec<OracleResult> = instances
        .par_iter()
        .map(|(_, inst)| oracle_solve(inst))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..variants.len()).map(move |v| (i, v)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(i, v)| {
            let (seed, inst) = &instances[i];
            let variant = &variants[v];
            let outcome = hbd_solve(inst, &variant.config).map_err(|e| e.to_string());
            make_record(*seed, variant, inst, &oracles[i], outcome, opts.timings)
        })
        .collect())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[BenchmarkRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.instance_seed.to_string(),
            r.variant.clone(),
            r.status.clone(),
            fmt_opt(r.objective),
            fmt_opt(r.opt),
            fmt_opt(r.gap),
            r.iterations.to_string(),
            r.qubit_max.to_string(),
            fmt_opt(r.wall_time_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchmarkRecord>, HarnessError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(ModelError::Schema(format!("unexpected CSV header {header:?}")).into());
    }
    let num = |s: &str| -> Result<Option<f64>, HarnessError> {
        if s.is_empty() {
            Ok(None)
        } else {
            f64::from_str(s)
                .map(Some)
                .map_err(|_| ModelError::Schema(format!("`{s}` is not a number")).into())
        }
    };
    let int = |s: &str| -> Result<u64, HarnessError> {
        u64::from_str(s).map_err(|_| ModelError::Schema(format!("`{s}` is not an integer")).into())
    };
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        out.push(BenchmarkRecord {
            instance_seed: int(&row[0])?,
            variant: row[1].to_string(),
            status: row[2].to_string(),
            objective: num(&row[3])?,
            opt: num(&row[4])?,
            gap: num(&row[5])?,
            iterations: int(&row[6])? as usize,
            qubit_max: int(&row[7])? as usize,
            wall_time_ms: num(&row[8])?,
            extra: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{binary_infeasible, t1, t2};

    fn rec(obj: Option<f64>, opt: Option<f64>) -> BenchmarkRecord {
        BenchmarkRecord {
            instance_seed: 1,
            variant: "V".into(),
            status: "Optimal".into(),
            objective: obj,
            opt,
            gap: match (obj, opt) {
                (Some(a), Some(b)) => Some(optimality_gap(a, b).0),
                _ => None,
            },
            iterations: 2,
            qubit_max: 9,
            wall_time_ms: None,
            extra: None,
        }
    }

    #[test]
    fn oracle_examples() {
        match oracle_solve(&t1()).unwrap() {
            OracleResult::Optimal { optimum, x, y } => {
                assert_eq!(optimum, 12.0);
                assert_eq!(x, vec![0]);
                assert_eq!(y, vec![4.0]);
            }
            other => panic!("{other:?}"),
        }
        match oracle_solve(&t2()).unwrap() {
            OracleResult::Optimal { optimum, x, y } => {
                assert_eq!(optimum, 3.0);
                assert_eq!(x, vec![1]);
                assert_eq!(y, vec![2.0]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            oracle_solve(&binary_infeasible()).unwrap(),
            OracleResult::Infeasible
        );
    }

    #[test]
    fn metric_examples() {
        let m = compute_metrics(&[rec(Some(12.0), Some(12.0)), rec(Some(3.0), Some(3.0))]);
        let v = &m["V"];
        assert_eq!((v.feasibility_rate, v.optimality_rate), (1.0, 1.0));
        assert_eq!(v.gap.unwrap().median, 0.0);
        assert_eq!(optimality_gap(6.0, 12.0), (0.5, false));
        assert_eq!(optimality_gap(-1.0, 0.0), (1.0, true));
        assert!(compute_metrics(&[]).is_empty());
    }

    #[test]
    fn quartiles_interpolate() {
        let q = quartiles(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.75, 2.5, 3.25));
        assert!(quartiles(&[]).is_none());
    }

    #[test]
    fn variant_labels() {
        let base = BendersConfig::default();
        for label in Variant::STANDARD {
            assert_eq!(Variant::from_label(label, &base).unwrap().label, label);
        }
        let mc = Variant::from_label("HBD_E_C_MC", &base).unwrap();
        assert_eq!(mc.config.conversion, Conversion::Exponential);
        assert_eq!(mc.config.multicut, Some(MulticutConfig { k: 5, m: 3 }));
        assert!(Variant::from_label("HBD_X_C", &base).is_err());
        assert!(Variant::from_label("SA_MC", &base).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            rec(Some(12.0), Some(12.0)),
            rec(None, Some(0.1)),
            rec(None, None),
        ];
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "instance_seed,variant,status,objective,opt,gap,iterations,qubit_max,wall_time_ms\n"
        ));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back, records);
        assert_eq!(compute_metrics(&back), compute_metrics(&records));
    }
}
