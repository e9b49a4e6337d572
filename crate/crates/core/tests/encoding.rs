use std::collections::HashSet;

use proptest::prelude::*;

use hbd_core::model::{
    generate_instance, BendersCut, Conversion, CutKind, GeneratorConfig, PenaltyMode,
};
use hbd_core::qubo_encode::{
    build_phi_encoding, compute_penalties, decode, encode_master, tighten_phi_bounds, BitRole,
    MasterProblem,
};

proptest! {
    #[test]
    fn every_grid_point_is_representable(
        lb_units in -12i32..=-2,
        ub_units in 2i32..=30,
        d_exp in 0u32..=3,
    ) {
        let lb = f64::from(lb_units) / 2.0;
        let ub = f64::from(ub_units) / 2.0;
        let eps = 0.5f64.powi(d_exp as i32);
        let enc = build_phi_encoding(lb, ub, eps);
        let scale = 2f64.powi(enc.frac_bits as i32);
        let bits = enc.bit_weights.len();
        prop_assume!(bits <= 16);
        let sums: HashSet<i64> = (0u32..1 << bits)
            .map(|m| {
                let v: f64 = (0..bits).filter(|i| m >> i & 1 == 1).map(|i| enc.bit_weights[i]).sum();
                (v * scale).round() as i64
            })
            .collect();
        let lo = -((1i64 << enc.neg_bits) - 1) * scale as i64;
        let hi = ((1i64 << enc.int_bits) - 1) * scale as i64;
        for k in lo..=hi {
            prop_assert!(sums.contains(&k), "{} missing", k as f64 / scale);
        }
        prop_assert!(enc.max_value() >= ub.floor());
        prop_assert!(enc.min_value() <= -(lb.abs().floor()));
    }
}

fn sample_cut(n: usize, seed: u64) -> BendersCut {
    let coeffs = (0..n)
        .map(|j| -(((seed as usize + j) % 5) as f64))
        .collect();
    BendersCut {
        kind: CutKind::Optimality,
        coeffs,
        constant: 20.0,
        mu: vec![],
        iteration_created: 1,
    }
}

#[test]
fn slack_and_exponential_share_x_and_phi_bits() {
    let cfg = GeneratorConfig::default().with_max_n(4);
    for seed in 0..40 {
        let inst = generate_instance(seed, &cfg).unwrap();
        let (lb, ub) = tighten_phi_bounds(&inst).unwrap();
        let phi = build_phi_encoding(lb, ub, 0.25);
        let pen = compute_penalties(&inst, ub, PenaltyMode::Constructive);
        let cuts = vec![sample_cut(inst.n, seed)];
        let mp = MasterProblem {
            inst: &inst,
            cuts: &cuts,
            phi: &phi,
            penalties: &pen,
        };
        let s = encode_master(&mp, Conversion::Slack).unwrap();
        let e = encode_master(&mp, Conversion::Exponential).unwrap();
        let core = |r: &[BitRole]| -> Vec<BitRole> {
            r.iter()
                .filter(|b| !matches!(b, BitRole::SlackBit { .. }))
                .cloned()
                .collect()
        };
        assert_eq!(core(&s.registry), core(&e.registry));
        assert_eq!(e.num_bits, inst.n + phi.num_bits());
        assert!(s.num_bits > e.num_bits);
    }
}

#[test]
fn slack_energy_vanishes_penalties_on_satisfied_assignments() {
    // With the slack set to the exact residual, the energy is the
    // weighted objective alone.
    let cfg = GeneratorConfig::default().with_max_n(3);
    for seed in 0..20 {
        let inst = generate_instance(seed, &cfg).unwrap();
        let (lb, ub) = tighten_phi_bounds(&inst).unwrap();
        let phi = build_phi_encoding(lb, ub, 0.25);
        let pen = compute_penalties(&inst, ub, PenaltyMode::Constructive);
        let model = encode_master(
            &MasterProblem {
                inst: &inst,
                cuts: &[],
                phi: &phi,
                penalties: &pen,
            },
            Conversion::Slack,
        )
        .unwrap();
        let slack = &model.slacks[0];
        for mask in 0u32..1 << inst.n {
            let x: Vec<u8> = (0..inst.n).map(|j| (mask >> j & 1) as u8).collect();
            let lhs: f64 = inst.bmat[0]
                .iter()
                .zip(&x)
                .map(|(b, &v)| b * f64::from(v))
                .sum();
            let residual = inst.bprime[0] - lhs;
            if residual < 0.0 {
                continue;
            }
            let mut bits = vec![0u8; model.num_bits];
            bits[..inst.n].copy_from_slice(&x);
            // integer residual: write it in the slack's binary weights
            let mut r = residual.round() as u64;
            for (k, w) in slack.weights.iter().enumerate().rev() {
                if (*w as u64) <= r && *w >= 1.0 {
                    bits[slack.first_bit + k] = 1;
                    r -= *w as u64;
                }
            }
            assert_eq!(r, 0);
            let objective: f64 = inst.c.iter().zip(&x).map(|(c, &v)| c * f64::from(v)).sum();
            let e = model.energy(&bits);
            assert!(
                (e + pen.obj_x * objective).abs() < 1e-9,
                "seed {seed} x {x:?}"
            );
            assert_eq!(decode(&model, &bits).x, x);
        }
    }
}
