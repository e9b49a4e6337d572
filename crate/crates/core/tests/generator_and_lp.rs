use proptest::prelude::*;

use hbd_core::lp_simplex::{
    solve_binary_relaxation, solve_lp, LinearProgram, LpStatus, Relation, RelaxationObjective,
    Sense,
};
use hbd_core::model::{generate_generic_instance, generate_instance, GeneratorConfig};

#[test]
fn generated_instances_satisfy_their_contract() {
    let cfg = GeneratorConfig::default();
    for seed in 0..1000 {
        let inst = generate_instance(seed, &cfg).unwrap();
        inst.validate().unwrap();
        assert!((2..=5).contains(&inst.n), "seed {seed}");
        assert!((2..=10).contains(&inst.p), "seed {seed}");
        assert!((5..=14).contains(&inst.m1), "seed {seed}");
        assert_eq!(inst.m2, 1);
        assert!(inst.is_integral(), "seed {seed}");
        assert!((1.0..=4.0).contains(&inst.bprime[0]));
        let ub = solve_binary_relaxation(&inst, RelaxationObjective::PhiUpper).unwrap();
        assert_eq!(ub.status, LpStatus::Optimal, "seed {seed}");
    }
}

#[test]
fn generation_is_reproducible() {
    for seed in [0, 1, 42, u64::MAX] {
        assert_eq!(
            generate_generic_instance(seed).unwrap(),
            generate_generic_instance(seed).unwrap()
        );
    }
    assert_ne!(
        generate_generic_instance(1).unwrap(),
        generate_generic_instance(2).unwrap()
    );
}

#[derive(Debug, Clone)]
struct RandomLp {
    lp: LinearProgram,
}

fn random_lp() -> impl Strategy<Value = RandomLp> {
    (1usize..7, 1usize..7, any::<bool>())
        .prop_flat_map(|(nv, nr, max)| {
            (
                prop::collection::vec(-10i32..10, nv),
                prop::collection::vec(prop::collection::vec(-6i32..6, nv), nr),
                prop::collection::vec(0i32..20, nr),
                1i32..40,
                Just(max),
            )
        })
        .prop_map(|(c, rows, rhs, cap, max)| {
            let nv = c.len();
            let sense = if max { Sense::Max } else { Sense::Min };
            let mut lp = LinearProgram::new(sense, c.iter().map(|&v| f64::from(v)).collect());
            for (a, b) in rows.iter().zip(rhs) {
                lp.push_row(
                    a.iter().map(|&v| f64::from(v) / 2.0).collect(),
                    Relation::Le,
                    f64::from(b),
                );
            }
            // bounded (the box row) and feasible (x = 0)
            lp.push_row(vec![1.0; nv], Relation::Le, f64::from(cap));
            RandomLp { lp }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn strong_duality_on_bounded_feasible_lps(case in random_lp()) {
        let lp = &case.lp;
        let sol = solve_lp(lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let dual_obj: f64 = lp.rows.iter().zip(&sol.dual).map(|(r, y)| r.rhs * y).sum();
        prop_assert!((sol.objective - dual_obj).abs() <= 1e-6 * (1.0 + sol.objective.abs()));
        // primal feasibility
        for r in &lp.rows {
            let lhs: f64 = r.coeffs.iter().zip(&sol.primal).map(|(a, x)| a * x).sum();
            prop_assert!(lhs <= r.rhs + 1e-7);
        }
        prop_assert!(sol.primal.iter().all(|&x| x >= -1e-9));
    }
}
