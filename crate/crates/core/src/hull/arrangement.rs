//! Brute-force extremal U-counts by enumerating every face of the arrangement
//! of `k`-set hyperplanes inside the zero-sum space.
//!
//! By symmetry only nonincreasing `x` are needed. Writing `x = sum_j y_j z_j`
//! with `z_j = (n-j, ..., n-j, -j, ..., -j)` (`j` leading entries) turns the
//! sorted cone into `y >= 0`, and a `k`-set `e` of positions evaluates to
//! `sum_j y_j (n |e ∩ [j]| - j k)`. Cells are refined first by which `y_j` vanish
//! (a face of the cone), then by one hyperplane at a time. Each cell carries a
//! witness point that satisfies its sign vector exactly, so one LP per
//! (cell, hyperplane) decides whether the hyperplane cuts it.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{ratio, Ratio};

use super::hypergraph::{ksubsets, WeightVector};
use super::simplex::{phase1, Phase1};
use super::HullError;

pub const DEFAULT_N_CAP: u64 = 8;

/// Writes a nonincreasing zero-sum `omega` in the `z_j` basis.
pub fn decompose_monotone(omega: &[Ratio]) -> Result<Vec<Ratio>, HullError> {
    if omega.len() < 2 {
        return Err(HullError::InvalidWeights("need at least two coordinates"));
    }
    if !omega.iter().sum::<Ratio>().is_zero() {
        return Err(HullError::InvalidWeights("weights must sum to zero"));
    }
    if omega.windows(2).any(|w| w[0] < w[1]) {
        return Err(HullError::NotMonotone);
    }
    let n = Ratio::from_integer(BigInt::from(omega.len()));
    Ok(omega.windows(2).map(|w| (&w[0] - &w[1]) / &n).collect())
}

/// Inverse of [`decompose_monotone`].
pub fn compose(y: &[Ratio]) -> Vec<Ratio> {
    let n = y.len() + 1;
    (1..=n)
        .map(|i| {
            y.iter()
                .enumerate()
                .map(|(jm, yj)| {
                    let j = jm + 1;
                    let z = if i <= j { (n - j) as i64 } else { -(j as i64) };
                    yj * ratio(z, 1)
                })
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BruteForce {
    pub value: u64,
    pub witness: WeightVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaceSummary {
    pub n: u64,
    pub k: u64,
    pub faces: u64,
    /// Minimum of the weak count (ties included).
    pub q: BruteForce,
    /// Maximum of the strict count (ties excluded).
    pub p: BruteForce,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Sign {
    Neg,
    Zero,
    Pos,
}

fn sign_of(v: &Ratio) -> Sign {
    if v.is_positive() {
        Sign::Pos
    } else if v.is_negative() {
        Sign::Neg
    } else {
        Sign::Zero
    }
}

struct Cell {
    signs: Vec<Sign>,
    point: Vec<Ratio>,
}

struct Problem {
    support: Vec<usize>,
    /// Hyperplane coefficients restricted to `support`.
    planes: Vec<Vec<i64>>,
    /// For each plane, earlier planes that dominate it coefficientwise
    /// (hence pointwise on the cone) and earlier planes it dominates.
    above: Vec<Vec<usize>>,
    below: Vec<Vec<usize>>,
}

fn dot(c: &[i64], p: &[Ratio]) -> Ratio {
    c.iter().zip(p).filter(|(c, _)| **c != 0).map(|(c, v)| v * ratio(*c, 1)).sum()
}

impl Problem {
    /// Finds a point of the cell with the new plane `h` at sign `want`
    /// (`Pos` or `Neg`), if one exists.
    fn probe(&self, cell: &Cell, h: usize, want: Sign) -> Option<Vec<Ratio>> {
        let d = self.support.len();
        // Substitute y = 1 + u with u >= 0, so strict positivity becomes y >= 1.
        let mut rows: Vec<(Vec<i64>, Sign)> = cell.signs.iter().enumerate().map(|(i, s)| (self.planes[i].clone(), *s)).collect();
        rows.push((self.planes[h].clone(), want));
        let slacks = rows.iter().filter(|(_, s)| *s != Sign::Zero).count();
        let width = d + slacks;
        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        let mut slack = d;
        for (c, s) in &rows {
            let mut row: Vec<Ratio> = c.iter().map(|&v| ratio(v, 1)).collect();
            row.resize(width, Ratio::zero());
            let base: i64 = c.iter().sum();
            match s {
                Sign::Pos => {
                    row[slack] = -Ratio::one();
                    slack += 1;
                    b.push(ratio(1 - base, 1));
                }
                Sign::Neg => {
                    row[slack] = Ratio::one();
                    slack += 1;
                    b.push(ratio(-1 - base, 1));
                }
                Sign::Zero => b.push(ratio(-base, 1)),
            }
            a.push(row);
        }
        match phase1(&a, &b) {
            Phase1::Feasible { x } => Some(x[..d].iter().map(|u| u + Ratio::one()).collect()),
            Phase1::Infeasible { .. } => None,
        }
    }

    /// A sign for `h` implied by dominance, if any.
    fn forced(&self, cell: &Cell, h: usize) -> Option<Sign> {
        let le_zero = self.above[h].iter().map(|&g| cell.signs[g]).fold(None, |acc, s| match s {
            Sign::Neg => Some(Sign::Neg),
            Sign::Zero => acc.or(Some(Sign::Zero)),
            Sign::Pos => acc,
        });
        let ge_zero = self.below[h].iter().map(|&g| cell.signs[g]).fold(None, |acc, s| match s {
            Sign::Pos => Some(Sign::Pos),
            Sign::Zero => acc.or(Some(Sign::Zero)),
            Sign::Neg => acc,
        });
        match (le_zero, ge_zero) {
            (Some(Sign::Neg), _) => Some(Sign::Neg),
            (_, Some(Sign::Pos)) => Some(Sign::Pos),
            (Some(Sign::Zero), Some(Sign::Zero)) => Some(Sign::Zero),
            _ => None,
        }
    }

    /// Splits `cell` by plane `h`, pushing the resulting cells.
    fn split(&self, mut cell: Cell, h: usize, out: &mut Vec<Cell>) {
        let v = dot(&self.planes[h], &cell.point);
        let here = sign_of(&v);
        if let Some(s) = self.forced(&cell, h) {
            debug_assert_eq!(s, here);
            cell.signs.push(s);
            out.push(cell);
            return;
        }
        let other = if here == Sign::Neg { Sign::Pos } else { Sign::Neg };
        let Some(q) = self.probe(&cell, h, if here == Sign::Zero { Sign::Pos } else { other }) else {
            let mut c = cell;
            c.signs.push(here);
            out.push(c);
            return;
        };
        let mid = if here == Sign::Zero {
            // Step from q through p and slightly beyond, staying inside the cell.
            let t = self.extension_step(&cell, &q);
            cell.point.iter().zip(&q).map(|(p, qv)| p + &t * (p - qv)).collect()
        } else {
            let vq = dot(&self.planes[h], &q);
            let t = &v / (&v - &vq);
            cell.point.iter().zip(&q).map(|(p, qv)| p + &t * (qv - p)).collect::<Vec<_>>()
        };
        let (zero_pt, pos_pt, neg_pt) = match here {
            Sign::Zero => (cell.point, q, mid),
            Sign::Pos => (mid, cell.point, q),
            Sign::Neg => (mid, q, cell.point),
        };
        for (s, pt) in [(Sign::Neg, neg_pt), (Sign::Zero, zero_pt), (Sign::Pos, pos_pt)] {
            let mut signs = cell.signs.clone();
            signs.push(s);
            out.push(Cell { signs, point: pt });
        }
    }

    /// Largest-safe half step `t` with `p + t (p - q)` keeping every strict sign
    /// of the cell (including `y > 0` on the support).
    fn extension_step(&self, cell: &Cell, q: &[Ratio]) -> Ratio {
        let mut limit: Option<Ratio> = None;
        let mut consider = |gp: Ratio, gq: Ratio| {
            // g(p) + t (g(p) - g(q)) must keep the sign of g(p).
            let drift = &gp - &gq;
            if gp.is_positive() && drift.is_negative() || gp.is_negative() && drift.is_positive() {
                let t = (&gp / &drift).abs();
                if limit.as_ref().is_none_or(|l| t < *l) {
                    limit = Some(t);
                }
            }
        };
        for (i, s) in cell.signs.iter().enumerate() {
            if *s != Sign::Zero {
                consider(dot(&self.planes[i], &cell.point), dot(&self.planes[i], q));
            }
        }
        for (p, qv) in cell.point.iter().zip(q) {
            consider(p.clone(), qv.clone());
        }
        match limit {
            Some(l) => (l / ratio(2, 1)).min(Ratio::one()),
            None => Ratio::one(),
        }
    }
}

fn coefficients(n: u64, k: u64, e: u64) -> Vec<i64> {
    (0..n - 1)
        .map(|j| {
            let prefix = (e & ((1u64 << (j + 1)) - 1)).count_ones() as i64;
            n as i64 * prefix - (j as i64 + 1) * k as i64
        })
        .collect()
}

/// Enumerates all faces inside one face of the sorted cone.
fn cells_on_support(n: u64, support: Vec<usize>, planes_full: &[Vec<i64>]) -> Vec<Cell> {
    let planes: Vec<Vec<i64>> = planes_full.iter().map(|c| support.iter().map(|&j| c[j]).collect()).collect();
    let d = support.len();
    let dominates = |a: &[i64], b: &[i64]| a.iter().zip(b).all(|(x, y)| x >= y);
    let above = (0..planes.len())
        .map(|h| (0..h).filter(|&g| dominates(&planes[g], &planes[h])).collect())
        .collect();
    let below = (0..planes.len())
        .map(|h| (0..h).filter(|&g| dominates(&planes[h], &planes[g])).collect())
        .collect();
    let problem = Problem {
        support,
        planes,
        above,
        below,
    };
    let mut cells = vec![Cell {
        signs: Vec::new(),
        point: vec![Ratio::one(); d],
    }];
    for h in 0..problem.planes.len() {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for c in cells {
            problem.split(c, h, &mut next);
        }
        cells = next;
    }
    cells
        .into_iter()
        .map(|c| {
            let mut full = vec![Ratio::zero(); n as usize - 1];
            for (&j, v) in problem.support.iter().zip(c.point) {
                full[j] = v;
            }
            Cell {
                signs: c.signs,
                point: full,
            }
        })
        .collect()
}

fn integer_witness(y: &[Ratio]) -> WeightVector {
    let x = compose(y);
    let lcm = x.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = x.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    WeightVector::new(ints.into_iter().map(|v| Ratio::from_integer(v / &g)).collect()).expect("nonzero zero-sum witness")
}

pub fn enumerate_faces(n: u64, k: u64) -> Result<FaceSummary, HullError> {
    enumerate_faces_capped(n, k, DEFAULT_N_CAP)
}

pub fn enumerate_faces_capped(n: u64, k: u64, n_cap: u64) -> Result<FaceSummary, HullError> {
    if n > n_cap {
        return Err(HullError::CapExceeded {
            what: "n",
            limit: n_cap,
            got: n,
        });
    }
    if n < 2 || k == 0 || k >= n {
        return Err(HullError::InvalidShape { n, k });
    }
    let planes: Vec<Vec<i64>> = ksubsets(n, k).map(|e| coefficients(n, k, e)).collect();
    let dims = (n - 1) as usize;
    let supports: Vec<Vec<usize>> = (1u64..1 << dims).map(|m| (0..dims).filter(|j| m >> j & 1 == 1).collect()).collect();

    // Per support: (faces, best weak count, its point, best strict count, its point).
    type Best = (u64, u64, Vec<Ratio>, u64, Vec<Ratio>);
    let per_support: Vec<Best> = supports
        .into_par_iter()
        .map(|s| {
            let cells = cells_on_support(n, s, &planes);
            let mut best: Option<Best> = None;
            for c in &cells {
                let weak = c.signs.iter().filter(|s| **s != Sign::Neg).count() as u64;
                let strict = c.signs.iter().filter(|s| **s == Sign::Pos).count() as u64;
                match &mut best {
                    None => best = Some((0, weak, c.point.clone(), strict, c.point.clone())),
                    Some(b) => {
                        if weak < b.1 {
                            b.1 = weak;
                            b.2 = c.point.clone();
                        }
                        if strict > b.3 {
                            b.3 = strict;
                            b.4 = c.point.clone();
                        }
                    }
                }
            }
            let mut b = best.expect("every cone face has a cell");
            b.0 = cells.len() as u64;
            b
        })
        .collect();

    let mut faces = 0;
    let mut q: Option<(u64, &Vec<Ratio>)> = None;
    let mut p: Option<(u64, &Vec<Ratio>)> = None;
    for b in &per_support {
        faces += b.0;
        if q.is_none_or(|(v, _)| b.1.cmp(&v) == Ordering::Less) {
            q = Some((b.1, &b.2));
        }
        if p.is_none_or(|(v, _)| b.3.cmp(&v) == Ordering::Greater) {
            p = Some((b.3, &b.4));
        }
    }
    let (qv, qy) = q.expect("at least one face");
    let (pv, py) = p.expect("at least one face");
    Ok(FaceSummary {
        n,
        k,
        faces,
        q: BruteForce {
            value: qv,
            witness: integer_witness(qy),
        },
        p: BruteForce {
            value: pv,
            witness: integer_witness(py),
        },
    })
}

pub fn brute_force_q(n: u64, k: u64) -> Result<BruteForce, HullError> {
    enumerate_faces(n, k).map(|s| s.q)
}

pub fn brute_force_p(n: u64, k: u64) -> Result<BruteForce, HullError> {
    enumerate_faces(n, k).map(|s| s.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::hypergraph::{count_strict, count_u};

    fn ints(v: &[i64]) -> Vec<Ratio> {
        v.iter().map(|&x| ratio(x, 1)).collect()
    }

    fn check_identity(omega: &[Ratio], k: u64) {
        let n = omega.len() as u64;
        let y = decompose_monotone(omega).unwrap();
        assert!(y.iter().all(|v| !v.is_negative()));
        assert_eq!(compose(&y), omega);
        for e in ksubsets(n, k) {
            let direct: Ratio = (0..n).filter(|j| e >> j & 1 == 1).map(|j| omega[j as usize].clone()).sum();
            let mut via = Ratio::zero();
            for (jm, yj) in y.iter().enumerate() {
                let j = jm as u64 + 1;
                let s = (e & ((1 << j) - 1)).count_ones() as i64;
                via += yj * ratio(n as i64 * s - (j * k) as i64, 1);
            }
            assert_eq!(direct, via);
        }
    }

    #[test]
    fn decomposition_examples() {
        let n = 5;
        let z1: Vec<i64> = (0..n).map(|i| if i == 0 { n - 1 } else { -1 }).collect();
        assert_eq!(decompose_monotone(&ints(&z1)).unwrap(), ints(&[1, 0, 0, 0]));
        let y = decompose_monotone(&ints(&[3, -1, -1, -1])).unwrap();
        assert_eq!(y, ints(&[1, 0, 0]));
        check_identity(&ints(&[3, -1, -1, -1]), 2);
        let y = decompose_monotone(&ints(&[1, 1, -1, -1])).unwrap();
        assert_eq!(y, vec![Ratio::zero(), ratio(1, 2), Ratio::zero()]);
        check_identity(&ints(&[1, 1, -1, -1]), 2);
        check_identity(&ints(&[5, 2, 0, -3, -4]), 3);
    }

    #[test]
    fn decomposition_rejects() {
        assert!(matches!(decompose_monotone(&ints(&[-1, 1])), Err(HullError::NotMonotone)));
        assert!(decompose_monotone(&ints(&[2, 1])).is_err());
    }

    #[test]
    fn small_extrema() {
        let s = enumerate_faces(4, 2).unwrap();
        assert_eq!(s.q.value, 3);
        assert_eq!(s.p.value, 3);
        assert_eq!(count_u(&s.q.witness, 2).count, 3);
        assert_eq!(count_strict(&s.p.witness, 2), 3);
        assert_eq!(brute_force_q(6, 2).unwrap().value, 5);
    }

    #[test]
    fn over_cap_refused() {
        assert!(matches!(brute_force_p(10, 3), Err(HullError::CapExceeded { .. })));
        assert!(matches!(enumerate_faces(5, 5), Err(HullError::InvalidShape { .. })));
    }

    #[test]
    fn face_counts_agree_with_sampling() {
        // Every sign vector reached by random integer points must be a face.
        use rand::{Rng, SeedableRng};
        let (n, k) = (5u64, 2u64);
        let s = enumerate_faces(n, k).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let mut b: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..=4)).collect();
            let sum: i64 = b.iter().sum();
            b[0] -= sum;
            if b.iter().all(|v| *v == 0) {
                continue;
            }
            let w = WeightVector::from_ints(&b).unwrap();
            assert!(count_u(&w, k).count >= s.q.value);
            assert!(count_strict(&w, k) <= s.p.value);
        }
    }
}
