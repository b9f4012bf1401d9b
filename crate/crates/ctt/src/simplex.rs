//! Primal simplex over a dense tableau, with Bland's anti-cycling rule.
//!
//! Solves `maximize c·x subject to A·x ≤ b, x ≥ 0` for `b ≥ 0`, which is
//! all the capacity subproblems upstairs ever need: the all-slack basis is
//! feasible from the start, so no phase-one. Bland's smallest-index rule
//! for both the entering column and ratio-test ties makes the walk finite
//! even on degenerate tableaus.

/// Result of a simplex run.
#[derive(Debug, Clone, PartialEq)]
pub enum SimplexOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        /// One shadow price per input row.
        duals: Vec<f64>,
    },
    Unbounded,
}

/// Pivoting tolerance: entries this close to zero are treated as zero.
const EPS: f64 = 1e-9;

/// Maximizes `c·x` over `rows` of the form `(coefficients, rhs)` with
/// `x ≥ 0`. Every rhs must be non-negative (the caller puts the problem in
/// that position); panics otherwise because it is a programming error here,
/// not bad user data.
pub fn maximize(c: &[f64], rows: &[(Vec<f64>, f64)]) -> SimplexOutcome {
    let n = c.len();
    let m = rows.len();
    for (i, (coeffs, rhs)) in rows.iter().enumerate() {
        assert_eq!(coeffs.len(), n, "row {i} width");
        assert!(*rhs >= 0.0, "row {i} has negative rhs {rhs}");
    }

    // Tableau: m rows of n structural + m slack columns + rhs.
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, (coeffs, rhs))| {
            let mut row = vec![0.0; width];
            row[..n].copy_from_slice(coeffs);
            row[n + i] = 1.0;
            row[width - 1] = *rhs;
            row
        })
        .collect();
    // Reduced-cost row: z_j − c_j, starting from the all-slack basis.
    let mut cost = vec![0.0; width];
    for j in 0..n {
        cost[j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland: entering column is the smallest index that improves.
        let Some(enter) = (0..n + m).find(|&j| cost[j] < -EPS) else {
            break;
        };
        // Ratio test; ties go to the row whose basic variable has the
        // smallest index (the other half of Bland's rule).
        let mut pivot: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i][enter];
            if a > EPS {
                let ratio = t[i][width - 1] / a;
                pivot = match pivot {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - EPS || (ratio < br + EPS && basis[i] < basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        let Some((leave, _)) = pivot else {
            return SimplexOutcome::Unbounded;
        };

        let inv = 1.0 / t[leave][enter];
        for v in t[leave].iter_mut() {
            *v *= inv;
        }
        for i in 0..m {
            if i != leave {
                let f = t[i][enter];
                if f != 0.0 {
                    for j in 0..width {
                        t[i][j] -= f * t[leave][j];
                    }
                }
            }
        }
        let f = cost[enter];
        if f != 0.0 {
            for j in 0..width {
                cost[j] -= f * t[leave][j];
            }
        }
        basis[leave] = enter;
    }

    let mut x = vec![0.0; n];
    let mut objective = 0.0;
    for i in 0..m {
        let value = t[i][width - 1];
        if basis[i] < n {
            x[basis[i]] = value;
            objective += c[basis[i]] * value;
        }
    }
    let duals = (0..m).map(|i| cost[n + i]).collect();
    SimplexOutcome::Optimal { x, objective, duals }
}
