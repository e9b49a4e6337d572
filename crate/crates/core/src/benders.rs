//! The decomposition loop: encode the master as a QUBO, sample it, check
//! the decoded x against the subproblem, add cuts, repeat.

use std::time::Instant;

use thiserror::Error;

use crate::cuts::{
    make_feasibility_cut, make_optimality_cut, select_rows_including, solve_subproblem, CutError,
    DensityMatrix, SubproblemOutcome,
};
use crate::model::{
    Backend, BendersConfig, BendersCut, CutKind, IterationTrace, MilpInstance, ModelError,
    PhaseTimes, SolveReport, SolveStatus, Termination,
};
use crate::qubo_encode::{
    build_phi_encoding, compute_penalties, decode, encode_master, tighten_phi_bounds, EncodeError,
    MasterProblem, PenaltySet, PhiEncoding, QuboModel,
};
use crate::qubo_solve::{AnnealingSolver, ExactSolver, QuboSampler, SampleError, SampleSet};

/// Tolerance for `B x <= b'` and for checking an incumbent.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Two cuts whose data differ by less than this are the same cut.
const CUT_IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BendersError {
    #[error(transparent)]
    Input(#[from] ModelError),
    #[error("master encoding failed: {0}")]
    Encode(#[from] EncodeError),
    #[error("subproblem failed: {0}")]
    Subproblem(#[from] CutError),
    #[error("QUBO backend failed: {0}")]
    Backend(#[from] SampleError),
}

/// `B x <= b'` within [`FEASIBILITY_TOL`].
pub fn check_master_feasible(x: &[u8], inst: &MilpInstance) -> bool {
    inst.master_rows_ok(x, FEASIBILITY_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub x: Vec<u8>,
    pub y: Vec<f64>,
    pub objective: f64,
}

/// Everything the loop carries from one iteration to the next.
#[derive(Debug, Clone)]
pub struct MasterState {
    pub inst: MilpInstance,
    pub cuts: Vec<BendersCut>,
    pub phi_encoding: PhiEncoding,
    pub penalties: PenaltySet,
    pub best_incumbent: Option<Incumbent>,
    pub iteration: usize,
}

impl MasterState {
    pub fn new(inst: &MilpInstance, config: &BendersConfig) -> Result<Self, BendersError> {
        let (lb, ub) = tighten_phi_bounds(inst)?;
        let phi_encoding = build_phi_encoding(lb, ub, config.epsilon);
        let penalties = compute_penalties(inst, ub, config.penalties);
        Ok(MasterState {
            inst: inst.clone(),
            cuts: Vec::new(),
            phi_encoding,
            penalties,
            best_incumbent: None,
            iteration: 0,
        })
    }

    pub fn encode(&self, config: &BendersConfig) -> Result<QuboModel, EncodeError> {
        encode_master(
            &MasterProblem {
                inst: &self.inst,
                cuts: &self.cuts,
                phi: &self.phi_encoding,
                penalties: &self.penalties,
            },
            config.conversion,
        )
    }

    /// Record `(x, y)` if it is feasible and beats the incumbent. Returns
    /// whether it was taken.
    pub fn offer(&mut self, x: &[u8], y: &[f64]) -> bool {
        if !self.inst.is_feasible(x, y, FEASIBILITY_TOL) {
            return false;
        }
        let objective = self.inst.x_objective(x) + crate::model::dot(&self.inst.h, y);
        let better = self
            .best_incumbent
            .as_ref()
            .is_none_or(|inc| objective > inc.objective);
        if better {
            self.best_incumbent = Some(Incumbent {
                x: x.to_vec(),
                y: y.to_vec(),
                objective,
            });
        }
        better
    }

    /// Add cuts not already present; returns how many were new.
    fn add_cuts(&mut self, cuts: Vec<BendersCut>) -> usize {
        let mut added = 0;
        for cut in cuts {
            if !self
                .cuts
                .iter()
                .any(|c| c.same_content(&cut, CUT_IDENTITY_TOL))
            {
                self.cuts.push(cut);
                added += 1;
            }
        }
        added
    }

    /// x satisfies the master rows and every feasibility cut so far.
    fn admissible(&self, x: &[u8]) -> bool {
        check_master_feasible(x, &self.inst)
            && self
                .cuts
                .iter()
                .filter(|c| c.kind == CutKind::Feasibility)
                .all(|c| c.is_satisfied(x, 0.0, 1e-7))
    }
}

fn sample(
    model: &QuboModel,
    config: &BendersConfig,
    iteration: usize,
) -> Result<SampleSet, SampleError> {
    let keep = config.multicut.map_or(0, |mc| mc.k);
    match config.backend {
        Backend::Exact => ExactSolver {
            retention: keep.max(32),
            distinct_x: true,
        }
        .sample(model),
        Backend::Annealing => AnnealingSolver {
            seed: config.rng_seed.wrapping_add((iteration as u64) << 32),
            sweeps: config.sa_sweeps,
            restarts: config.sa_restarts,
        }
        .sample(model),
    }
}

/// The cut that `x` calls for, with the subproblem outcome.
fn cut_at(
    state: &MasterState,
    x: &[u8],
    iteration: usize,
    tol: f64,
) -> Result<(SubproblemOutcome, Option<BendersCut>), CutError> {
    let sp = solve_subproblem(&state.inst, x)?;
    let cut = match &sp {
        SubproblemOutcome::Infeasible => {
            Some(make_feasibility_cut(&state.inst, x, iteration, tol)?)
        }
        SubproblemOutcome::Feasible { mu, .. } => {
            Some(make_optimality_cut(&state.inst, mu, iteration))
        }
    };
    Ok((sp, cut))
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Run the hybrid decomposition on `inst`.
pub fn hbd_solve(inst: &MilpInstance, config: &BendersConfig) -> Result<SolveReport, BendersError> {
    inst.validate()?;
    config.validate()?;
    let start = Instant::now();
    let mut times = PhaseTimes::default();

    let t = Instant::now();
    let mut state = MasterState::new(inst, config)?;
    times.bounds_ms = elapsed_ms(t);
    let phi_bounds = (
        state.phi_encoding.min_value(),
        state.phi_encoding.max_value(),
    );

    let mut trace = Vec::new();
    let mut qubit_counts = Vec::new();
    let mut penalty_failures = 0;
    let mut termination = Termination::IterationLimit;
    let mut converged: Option<Incumbent> = None;

    while state.iteration < config.max_iterations {
        state.iteration += 1;
        let it = state.iteration;

        let t = Instant::now();
        let encoded = state.encode(config);
        times.encode_ms += elapsed_ms(t);
        let model = match encoded {
            Ok(m) => m,
            // Some constraint cannot be met by any x in the relaxation.
            Err(EncodeError::MasterInfeasible(_)) => {
                termination = Termination::MasterInfeasible;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        qubit_counts.push(model.num_bits);

        let t = Instant::now();
        let samples = sample(&model, config, it)?;
        times.qubo_ms += elapsed_ms(t);

        let decoded: Vec<_> = samples
            .samples()
            .iter()
            .map(|s| decode(&model, &s.bits))
            .collect();
        let best_infeasible = decoded
            .first()
            .is_some_and(|d| !check_master_feasible(&d.x, &state.inst));
        if best_infeasible {
            penalty_failures += 1;
        }
        let mut record = IterationTrace {
            iteration: it,
            num_bits: model.num_bits,
            x_hat: None,
            phi_hat: None,
            subproblem_value: None,
            best_sample_master_infeasible: best_infeasible,
            cuts_added: 0,
        };

        // Distinct admissible decodes in sample order; the first is x̂.
        let mut candidates: Vec<(Vec<u8>, f64)> = Vec::new();
        for d in &decoded {
            if state.admissible(&d.x) && !candidates.iter().any(|(x, _)| *x == d.x) {
                candidates.push((d.x.clone(), d.phi));
            }
        }
        let Some((x_hat, phi_hat)) = candidates.first().cloned() else {
            trace.push(record);
            match config.backend {
                // The exact sampler lists every admissible x it can, so
                // none means the master is empty.
                Backend::Exact => {
                    termination = Termination::MasterInfeasible;
                    break;
                }
                Backend::Annealing => continue,
            }
        };
        record.x_hat = Some(x_hat.clone());
        record.phi_hat = Some(phi_hat);

        let t = Instant::now();
        let (sp, primary_cut) = cut_at(&state, &x_hat, it, config.convergence_tol)?;
        times.subproblem_ms += elapsed_ms(t);
        if let SubproblemOutcome::Feasible { objective, y, .. } = &sp {
            record.subproblem_value = Some(*objective);
            state.offer(&x_hat, y);
            if *objective >= phi_hat - config.convergence_tol {
                converged = Some(Incumbent {
                    x: x_hat.clone(),
                    y: y.clone(),
                    objective: state.inst.x_objective(&x_hat) + objective,
                });
                trace.push(record);
                termination = Termination::Converged;
                break;
            }
        }

        let mut new_cuts: Vec<BendersCut> = primary_cut.into_iter().collect();
        if let Some(mc) = config.multicut {
            let t = Instant::now();
            for (x, _) in candidates.iter().skip(1).take(mc.k.saturating_sub(1)) {
                let (sp, cut) = cut_at(&state, x, it, config.convergence_tol)?;
                if let SubproblemOutcome::Feasible { y, .. } = &sp {
                    state.offer(x, y);
                }
                new_cuts.extend(cut);
            }
            times.subproblem_ms += elapsed_ms(t);
            if new_cuts.len() > 1 {
                let d = DensityMatrix::from_cuts(&new_cuts, state.inst.n);
                let (chosen, _) = select_rows_including(&d, mc.m, 0);
                new_cuts = chosen.into_iter().map(|i| new_cuts[i].clone()).collect();
            }
        }
        record.cuts_added = state.add_cuts(new_cuts);
        // With nothing new the exact master repeats itself; annealing gets
        // another draw unless it just returned the same point.
        let repeated = trace.last().is_some_and(|prev: &IterationTrace| {
            prev.x_hat == record.x_hat && prev.phi_hat == record.phi_hat
        });
        let stalled = record.cuts_added == 0 && (config.backend == Backend::Exact || repeated);
        trace.push(record);
        if stalled {
            termination = Termination::Stalled;
            break;
        }
    }

    times.total_ms = elapsed_ms(start);
    let (status, solution) = match (termination, converged) {
        (Termination::Converged, Some(found)) => match &state.best_incumbent {
            Some(inc) if inc.objective > found.objective + config.convergence_tol => {
                (SolveStatus::Feasible, Some(inc.clone()))
            }
            _ => (SolveStatus::Optimal, Some(found)),
        },
        (Termination::MasterInfeasible, _) => match &state.best_incumbent {
            Some(inc) => (SolveStatus::Feasible, Some(inc.clone())),
            None => (SolveStatus::Infeasible, None),
        },
        _ => (SolveStatus::IterationLimit, state.best_incumbent.clone()),
    };
    let (x_best, y_best, objective) = match solution {
        Some(s) => (s.x, s.y, Some(s.objective)),
        None => (Vec::new(), Vec::new(), None),
    };
    Ok(SolveReport {
        status,
        termination,
        x_best,
        y_best,
        objective,
        iterations: state.iteration,
        cuts: state.cuts,
        qubit_counts,
        phi_bounds,
        trace,
        penalty_failures,
        wall_time_ms: times,
    })
}
