//! Small hand-checkable instances used across tests and docs.

use crate::model::MilpInstance;

/// max 2x + 3y s.t. x + y <= 4, x <= 1. Optimum 12 at x = 0, y = 4.
pub fn t1() -> MilpInstance {
    MilpInstance {
        n: 1,
        p: 1,
        m1: 1,
        m2: 1,
        c: vec![2.0],
        h: vec![3.0],
        a: vec![vec![1.0]],
        g: vec![vec![1.0]],
        b: vec![4.0],
        bmat: vec![vec![1.0]],
        bprime: vec![1.0],
    }
}

/// max x + y s.t. -x + y <= 1, y >= 2, x <= 1. The subproblem at x = 0 is
/// infeasible; the optimum is 3 at x = 1, y = 2.
pub fn t2() -> MilpInstance {
    MilpInstance {
        n: 1,
        p: 1,
        m1: 2,
        m2: 1,
        c: vec![1.0],
        h: vec![1.0],
        a: vec![vec![-1.0], vec![0.0]],
        g: vec![vec![1.0], vec![-1.0]],
        b: vec![1.0, -2.0],
        bmat: vec![vec![1.0]],
        bprime: vec![1.0],
    }
}

/// Every x admits no y: `y <= -1` can never hold with `y >= 0`, so even the
/// LP relaxation is empty.
pub fn relaxation_infeasible() -> MilpInstance {
    MilpInstance {
        n: 2,
        p: 1,
        m1: 1,
        m2: 1,
        c: vec![1.0, 1.0],
        h: vec![1.0],
        a: vec![vec![1.0, 1.0]],
        g: vec![vec![1.0]],
        b: vec![-1.0],
        bmat: vec![vec![1.0, 1.0]],
        bprime: vec![1.0],
    }
}

/// `y <= 2x - 0.5` and `y <= 1.5 - 2x`: the relaxation is feasible for
/// x in [0.25, 0.75] but neither binary x admits a y.
pub fn binary_infeasible() -> MilpInstance {
    MilpInstance {
        n: 1,
        p: 1,
        m1: 2,
        m2: 1,
        c: vec![1.0],
        h: vec![1.0],
        a: vec![vec![-2.0], vec![2.0]],
        g: vec![vec![1.0], vec![1.0]],
        b: vec![-0.5, 1.5],
        bmat: vec![vec![1.0]],
        bprime: vec![1.0],
    }
}
