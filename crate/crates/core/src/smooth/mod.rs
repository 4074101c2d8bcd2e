//! Threshold counts over the simplex and their Gaussian-smoothed surrogate.
//!
//! A weight vector `gamma` has `n - 1` coordinates; vertex `n` always carries
//! weight zero. Every quantity depends on a `k`-set `x` only through how many
//! members it takes from each class of equal weights, so evaluation runs over
//! compositions of `k` rather than over all `k`-sets.

pub mod anneal;

use std::f64::consts::{PI, SQRT_2};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact::{binomial, ratio, BigCount, Ratio};

pub use anneal::{analyze_step, anneal_all_supports, anneal_optimize, project_simplex, AnnealResult, SmoothConfig, StepProfile, TwoLevel};

/// Real comparisons closer than this to the threshold are refused.
pub const INDETERMINATE_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SmoothError {
    #[error("need 1 <= k < n, got n={n} k={k}")]
    InvalidShape { n: u64, k: u64 },
    #[error("gamma must have n-1 = {expected} coordinates, got {got}")]
    Length { expected: usize, got: usize },
    #[error("invalid gamma: {0}")]
    InvalidGamma(&'static str),
    #[error("support a={a} outside 1..={max}")]
    InvalidSupport { a: u64, max: u64 },
    #[error("a k-set lies within {distance:e} of the threshold; the count is indeterminate in floating point")]
    Indeterminate { distance: f64 },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}

/// A point of the simplex with its support `[a]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaVector {
    #[serde(serialize_with = "crate::exact::ser::ratios")]
    gamma: Vec<Ratio>,
    support: u64,
}

impl GammaVector {
    pub fn new(gamma: Vec<Ratio>) -> Result<Self, SmoothError> {
        if gamma.is_empty() {
            return Err(SmoothError::InvalidGamma("empty"));
        }
        if gamma.iter().any(Signed::is_negative) {
            return Err(SmoothError::InvalidGamma("negative coordinate"));
        }
        if !gamma.iter().sum::<Ratio>().is_one() {
            return Err(SmoothError::InvalidGamma("coordinates must sum to one"));
        }
        let support = gamma.iter().rposition(|g| !g.is_zero()).expect("sums to one") as u64 + 1;
        Ok(GammaVector { gamma, support })
    }

    /// `1/a` on the first `a` of `n - 1` coordinates.
    pub fn uniform_step(n: u64, a: u64) -> Result<Self, SmoothError> {
        if a == 0 || a >= n {
            return Err(SmoothError::InvalidSupport {
                a,
                max: n.saturating_sub(1),
            });
        }
        let g = (0..n - 1).map(|j| if j < a { ratio(1, a as i64) } else { Ratio::zero() }).collect();
        Self::new(g)
    }

    /// Rationalizes a floating point vector exactly, then rescales to sum one.
    pub fn from_f64(gamma: &[f64]) -> Result<Self, SmoothError> {
        if gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(SmoothError::InvalidGamma("coordinates must be finite and nonnegative"));
        }
        let exact: Vec<Ratio> = gamma.iter().map(|&g| crate::exact::interval::exact(g)).collect();
        let total: Ratio = exact.iter().sum();
        if total.is_zero() {
            return Err(SmoothError::InvalidGamma("all coordinates vanish"));
        }
        Self::new(exact.into_iter().map(|g| g / &total).collect())
    }

    pub fn gamma(&self) -> &[Ratio] {
        &self.gamma
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.gamma.iter().map(ratio_to_f64).collect()
    }
}

pub(crate) fn ratio_to_f64(r: &Ratio) -> f64 {
    crate::exact::DirectedBound::from_ratio(r).mid()
}

fn check_shape(n: u64, k: u64, len: usize) -> Result<(), SmoothError> {
    if n < 2 || k == 0 || k >= n {
        return Err(SmoothError::InvalidShape { n, k });
    }
    if len as u64 != n - 1 {
        return Err(SmoothError::Length {
            expected: n as usize - 1,
            got: len,
        });
    }
    Ok(())
}

/// Classes of equal weight: (value, member coordinates). Vertex `n` is folded
/// into the zero class, whose member list records only real coordinates.
struct Classes<T> {
    values: Vec<T>,
    members: Vec<Vec<usize>>,
    sizes: Vec<u64>,
}

fn classes<T: PartialEq + Clone>(gamma: &[T], zero: T) -> Classes<T> {
    let mut values: Vec<T> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (j, g) in gamma.iter().enumerate() {
        match values.iter().position(|v| v == g) {
            Some(i) => members[i].push(j),
            None => {
                values.push(g.clone());
                members.push(vec![j]);
            }
        }
    }
    let mut sizes: Vec<u64> = members.iter().map(|m| m.len() as u64).collect();
    match values.iter().position(|v| *v == zero) {
        Some(i) => sizes[i] += 1,
        None => {
            values.push(zero);
            members.push(Vec::new());
            sizes.push(1);
        }
    }
    Classes { values, members, sizes }
}

/// Calls `f` with every vector `c` of per-class counts summing to `k`.
fn for_each_composition(sizes: &[u64], k: u64, f: &mut impl FnMut(&[u64])) {
    fn rec(sizes: &[u64], left: u64, room: u64, c: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        let i = c.len();
        if i == sizes.len() {
            if left == 0 {
                f(c);
            }
            return;
        }
        let rest = room - sizes[i];
        let lo = left.saturating_sub(rest);
        for take in lo..=left.min(sizes[i]) {
            c.push(take);
            rec(sizes, left - take, rest, c, f);
            c.pop();
        }
    }
    let room = sizes.iter().sum();
    if room >= k {
        rec(sizes, k, room, &mut Vec::with_capacity(sizes.len()), f);
    }
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `N(gamma)`: the number of `k`-sets whose weight strictly exceeds `k/n`.
pub fn count_n(gamma: &GammaVector, n: u64, k: u64) -> Result<BigCount, SmoothError> {
    check_shape(n, k, gamma.gamma.len())?;
    let cl = classes(&gamma.gamma, Ratio::zero());
    let threshold = ratio(k as i64, n as i64);
    let mut total = BigCount::zero();
    for_each_composition(&cl.sizes, k, &mut |c| {
        let s: Ratio = c
            .iter()
            .zip(&cl.values)
            .map(|(&ci, v)| v * Ratio::from_integer(BigInt::from(ci)))
            .sum();
        if s > threshold {
            total += c.iter().zip(&cl.sizes).map(|(&ci, &m)| binomial(m, ci)).product::<BigCount>();
        }
    });
    Ok(total)
}

/// Floating point `N(gamma)`, refusing any `k`-set too close to the threshold.
pub fn count_n_real(gamma: &[f64], n: u64, k: u64) -> Result<u64, SmoothError> {
    check_shape(n, k, gamma.len())?;
    let cl = classes(gamma, 0.0);
    let threshold = k as f64 / n as f64;
    let mut total = 0u64;
    let mut closest = f64::INFINITY;
    for_each_composition(&cl.sizes, k, &mut |c| {
        let s: f64 = c.iter().zip(&cl.values).map(|(&ci, v)| ci as f64 * v).sum();
        closest = closest.min((s - threshold).abs());
        if s > threshold {
            total += c
                .iter()
                .zip(&cl.sizes)
                .map(|(&ci, &m)| binomial_f64(m, ci))
                .product::<f64>()
                .round() as u64;
        }
    });
    if closest <= INDETERMINATE_TOL {
        return Err(SmoothError::Indeterminate { distance: closest });
    }
    Ok(total)
}

/// Distance from the threshold to the nearest `k`-set weight.
pub fn margin(gamma: &GammaVector, n: u64, k: u64) -> Result<Ratio, SmoothError> {
    check_shape(n, k, gamma.gamma.len())?;
    let cl = classes(&gamma.gamma, Ratio::zero());
    let threshold = ratio(k as i64, n as i64);
    let mut best: Option<Ratio> = None;
    for_each_composition(&cl.sizes, k, &mut |c| {
        let s: Ratio = c
            .iter()
            .zip(&cl.values)
            .map(|(&ci, v)| v * Ratio::from_integer(BigInt::from(ci)))
            .sum();
        let d = (s - &threshold).abs();
        if best.as_ref().is_none_or(|b| d < *b) {
            best = Some(d);
        }
    });
    Ok(best.expect("at least one k-set"))
}

/// Standard normal CDF.
pub fn phi_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

fn phi_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `sum_x Phi((gamma . x - k/n) / sigma)` over all `k`-sets.
pub fn smoothed_f(gamma: &[f64], sigma: f64, n: u64, k: u64) -> Result<f64, SmoothError> {
    check_shape(n, k, gamma.len())?;
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(SmoothError::Config("sigma must be positive"));
    }
    let cl = classes(gamma, 0.0);
    let threshold = k as f64 / n as f64;
    let mut total = 0.0;
    for_each_composition(&cl.sizes, k, &mut |c| {
        let s: f64 = c.iter().zip(&cl.values).map(|(&ci, v)| ci as f64 * v).sum();
        let w: f64 = c.iter().zip(&cl.sizes).map(|(&ci, &m)| binomial_f64(m, ci)).product();
        total += w * phi_cdf((s - threshold) / sigma);
    });
    Ok(total)
}

/// Gradient of the smoothed count in the reduced coordinates `gamma_1..gamma_{a-1}`,
/// with `gamma_a = 1 - sum_{j<a} gamma_j` and `gamma_j = 0` beyond `a`.
pub fn smoothed_grad(gamma: &[f64], sigma: f64, n: u64, k: u64, a: u64) -> Result<Vec<f64>, SmoothError> {
    check_shape(n, k, gamma.len())?;
    if a == 0 || a >= n {
        return Err(SmoothError::InvalidSupport { a, max: n - 1 });
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(SmoothError::Config("sigma must be positive"));
    }
    let a = a as usize;
    let cl = classes(gamma, 0.0);
    let mut class_of = vec![0usize; gamma.len()];
    for (i, m) in cl.members.iter().enumerate() {
        for &j in m {
            class_of[j] = i;
        }
    }
    let threshold = k as f64 / n as f64;
    // Expected membership of each class, weighted by the Gaussian density.
    let mut mass = vec![0.0; cl.values.len()];
    for_each_composition(&cl.sizes, k, &mut |c| {
        let s: f64 = c.iter().zip(&cl.values).map(|(&ci, v)| ci as f64 * v).sum();
        let w: f64 = c.iter().zip(&cl.sizes).map(|(&ci, &m)| binomial_f64(m, ci)).product();
        let d = w * phi_density((s - threshold) / sigma) / sigma;
        for (i, (&ci, &m)) in c.iter().zip(&cl.sizes).enumerate() {
            mass[i] += d * ci as f64 / m as f64;
        }
    });
    let last = mass[class_of[a - 1]];
    Ok((0..a - 1).map(|j| mass[class_of[j]] - last).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::tail_sum_strict;
    use crate::hull::ksubsets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_count(gamma: &[Ratio], n: u64, k: u64) -> u64 {
        let t = ratio(k as i64, n as i64);
        ksubsets(n, k)
            .filter(|&x| {
                let s: Ratio = (0..n - 1).filter(|j| x >> j & 1 == 1).map(|j| gamma[j as usize].clone()).sum();
                s > t
            })
            .count() as u64
    }

    fn random_gamma(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(1..1000) as f64).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    }

    #[test]
    fn count_examples() {
        let g = GammaVector::uniform_step(4, 2).unwrap();
        assert_eq!(count_n(&g, 4, 2).unwrap(), BigCount::from(1u32));
        let g = GammaVector::uniform_step(10, 3).unwrap();
        assert_eq!(count_n(&g, 10, 3).unwrap(), BigCount::from(85u32));
        for (n, k) in [(5u64, 2u64), (9, 4), (12, 11)] {
            let g = GammaVector::uniform_step(n, 1).unwrap();
            assert_eq!(count_n(&g, n, k).unwrap(), binomial(n - 1, k - 1));
        }
    }

    #[test]
    fn step_identity_to_forty() {
        for n in 2..=40u64 {
            for k in 1..n {
                for a in 1..n {
                    let g = GammaVector::uniform_step(n, a).unwrap();
                    assert_eq!(count_n(&g, n, k).unwrap(), tail_sum_strict(n, k, a).unwrap(), "n={n} k={k} a={a}");
                }
            }
        }
    }

    #[test]
    fn grouped_count_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(3..=10u64);
            let k = rng.gen_range(1..n);
            // Small integer weights force many ties and threshold hits.
            let raw: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(0..4)).collect();
            let s: i64 = raw.iter().sum();
            if s == 0 {
                continue;
            }
            let g: Vec<Ratio> = raw.iter().map(|&v| ratio(v, s)).collect();
            let gv = GammaVector::new(g.clone()).unwrap();
            assert_eq!(count_n(&gv, n, k).unwrap(), BigCount::from(brute_count(&g, n, k)));
        }
    }

    #[test]
    fn real_count_refuses_threshold_ties() {
        // (1/2, 1/2, 0) with n=4, k=2: the set {1,3} sits exactly at 1/2.
        assert!(matches!(
            count_n_real(&[0.5, 0.5, 0.0], 4, 2),
            Err(SmoothError::Indeterminate { .. })
        ));
        let third = 1.0 / 3.0;
        assert_eq!(
            count_n_real(&[third, third, third, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 10, 3).unwrap(),
            85
        );
    }

    #[test]
    fn margin_examples() {
        let g = GammaVector::uniform_step(10, 3).unwrap();
        assert_eq!(margin(&g, 10, 3).unwrap(), ratio(1, 30));
        let g = GammaVector::uniform_step(4, 2).unwrap();
        assert!(margin(&g, 4, 2).unwrap().is_zero());
        for (n, k) in [(7u64, 2u64), (11, 5)] {
            let g = GammaVector::uniform_step(n, n - 1).unwrap();
            let mut best: Option<Ratio> = None;
            for i in 0..=k {
                let d = (ratio(i as i64, n as i64 - 1) - ratio(k as i64, n as i64)).abs();
                if best.as_ref().is_none_or(|b| d < *b) {
                    best = Some(d);
                }
            }
            assert_eq!(margin(&g, n, k).unwrap(), best.unwrap());
        }
    }

    #[test]
    fn smoothed_limits() {
        let third = 1.0 / 3.0;
        let g = [third, third, third, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let f = smoothed_f(&g, 1e-4, 10, 3).unwrap();
        assert!(f > 84.999 && f < 85.001, "{f}");
        let f = smoothed_f(&g, 1e3, 10, 3).unwrap();
        assert!((f - 60.0).abs() < 0.6, "{f}");
    }

    #[test]
    fn smoothing_error_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (n, k) = (9u64, 3u64);
        for _ in 0..100 {
            let raw: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(0..50)).collect();
            let s: i64 = raw.iter().sum();
            let g = GammaVector::new(raw.iter().map(|&v| ratio(v, s)).collect()).unwrap();
            let delta = ratio_to_f64(&margin(&g, n, k).unwrap());
            let exact = count_n(&g, n, k).unwrap();
            let exact = exact.to_string().parse::<f64>().unwrap();
            for sigma in [0.1, 0.01, 0.001] {
                let f = smoothed_f(&g.to_f64(), sigma, n, k).unwrap();
                let bound = binomial_f64(n, k) * phi_cdf(-delta / sigma);
                // Allow for rounding in the f64 evaluation itself.
                assert!((exact - f).abs() <= bound + 1e-9, "sigma={sigma} |{exact}-{f}| > {bound}");
            }
        }
    }

    #[test]
    fn gradient_vanishes_on_uniform_step() {
        let third = 1.0 / 3.0;
        let g = [third, third, third, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for sigma in [0.5, 0.05, 0.005] {
            assert_eq!(smoothed_grad(&g, sigma, 10, 3, 3).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (n, k, a) = (8u64, 2u64, 4usize);
        let sigma = 0.1;
        for _ in 0..100 {
            let head = random_gamma(&mut rng, a);
            let mut g = vec![0.0; n as usize - 1];
            g[..a].copy_from_slice(&head);
            let grad = smoothed_grad(&g, sigma, n, k, a as u64).unwrap();
            // Richardson-extrapolated central differences, error O(h^4).
            let central = |j: usize, h: f64| {
                let mut plus = g.clone();
                let mut minus = g.clone();
                plus[j] += h;
                plus[a - 1] -= h;
                minus[j] -= h;
                minus[a - 1] += h;
                (smoothed_f(&plus, sigma, n, k).unwrap() - smoothed_f(&minus, sigma, n, k).unwrap()) / (2.0 * h)
            };
            for (j, gj) in grad.iter().enumerate() {
                let h = 1e-4;
                let fd = (4.0 * central(j, h / 2.0) - central(j, h)) / 3.0;
                let scale = gj.abs().max(1e-3);
                assert!((fd - gj).abs() / scale < 1e-6, "j={j}: fd {fd} vs {gj}");
            }
        }
    }

    #[test]
    fn gradient_pushes_back_toward_step() {
        // Moving mass from coordinate 3 to coordinate 1 should be undone.
        let eps = 0.01;
        let third = 1.0 / 3.0;
        let g = [third + eps, third, third - eps, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let grad = smoothed_grad(&g, 0.05, 10, 3, 3).unwrap();
        assert!(grad[0] < 0.0, "{grad:?}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(count_n_real(&[1.0], 4, 2), Err(SmoothError::Length { .. })));
        assert!(GammaVector::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(GammaVector::uniform_step(4, 4).is_err());
        assert!(smoothed_f(&[1.0, 0.0, 0.0], 0.0, 4, 2).is_err());
    }
}
