//! Phase-1 simplex over exact rationals with Bland's rule.
//!
//! Solves feasibility of `A x = b, x >= 0`. On infeasibility the final dual
//! vector `y` satisfies `y^T A <= 0` and `y^T b > 0` (a Farkas witness).

use num_traits::{One, Signed, Zero};

use crate::exact::Ratio;

#[derive(Debug, Clone, PartialEq)]
pub enum Phase1 {
    Feasible { x: Vec<Ratio> },
    Infeasible { y: Vec<Ratio> },
}

/// `rows` is `A` in row-major order; every row has the same length.
pub fn phase1(rows: &[Vec<Ratio>], b: &[Ratio]) -> Phase1 {
    let m = rows.len();
    assert_eq!(m, b.len(), "row count mismatch");
    let n = rows.first().map_or(0, |r| r.len());
    let width = n + m;

    // Rows with negative right-hand side are negated; their dual sign flips back
    // at the end.
    let mut flipped = vec![false; m];
    let mut tab: Vec<Vec<Ratio>> = Vec::with_capacity(m);
    let mut rhs: Vec<Ratio> = Vec::with_capacity(m);
    for (i, (row, bi)) in rows.iter().zip(b).enumerate() {
        assert_eq!(row.len(), n, "ragged constraint matrix");
        let neg = bi.is_negative();
        flipped[i] = neg;
        let mut t: Vec<Ratio> = row.iter().map(|v| if neg { -v.clone() } else { v.clone() }).collect();
        t.extend((0..m).map(|j| if j == i { Ratio::one() } else { Ratio::zero() }));
        tab.push(t);
        rhs.push(if neg { -bi.clone() } else { bi.clone() });
    }
    let mut basis: Vec<usize> = (n..width).collect();

    // Reduced costs for minimizing the sum of artificials.
    let mut cost = vec![Ratio::zero(); width];
    for row in &tab {
        for (c, v) in cost.iter_mut().zip(row).take(n) {
            *c -= v;
        }
    }

    while let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<usize> = None;
        let mut best: Option<Ratio> = None;
        for i in 0..m {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &tab[i][enter];
            let better = match &best {
                None => true,
                Some(b) => ratio < *b || (ratio == *b && basis[i] < basis[leave.expect("set with best")]),
            };
            if better {
                best = Some(ratio);
                leave = Some(i);
            }
        }
        // Phase 1 is bounded below by zero, so a pivot row always exists.
        let r = leave.expect("phase-1 objective is bounded");
        pivot(&mut tab, &mut rhs, &mut cost, r, enter);
        basis[r] = enter;
    }

    let objective: Ratio = basis.iter().zip(&rhs).filter(|(&j, _)| j >= n).map(|(_, v)| v.clone()).sum();
    if objective.is_zero() {
        let mut x = vec![Ratio::zero(); n];
        for (&j, v) in basis.iter().zip(&rhs) {
            if j < n {
                x[j] = v.clone();
            }
        }
        Phase1::Feasible { x }
    } else {
        // Artificial column i has cost 1, so its reduced cost is 1 - y_i.
        let y = (0..m)
            .map(|i| {
                let yi = Ratio::one() - &cost[n + i];
                if flipped[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        Phase1::Infeasible { y }
    }
}

fn pivot(tab: &mut [Vec<Ratio>], rhs: &mut [Ratio], cost: &mut [Ratio], r: usize, c: usize) {
    let p = tab[r][c].clone();
    if !p.is_one() {
        for v in tab[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        rhs[r] /= &p;
    }
    let pivot_row = tab[r].clone();
    let pivot_rhs = rhs[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, pv) in row.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
        rhs[i] -= &f * &pivot_rhs;
    }
    if !cost[c].is_zero() {
        let f = cost[c].clone();
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
}
