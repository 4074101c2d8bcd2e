use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::{ser, BigCount};

use super::{count_n, smoothed_grad, GammaVector, SmoothError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothConfig {
    pub sigma_schedule: Vec<f64>,
    /// Step length as a multiple of the current sigma.
    pub step_size: f64,
    /// Iterations per sigma stage.
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SmoothConfig {
    fn default() -> Self {
        SmoothConfig {
            sigma_schedule: geometric_schedule(0.5, 1e-4, 20),
            step_size: 0.5,
            max_iters: 200,
            restarts: 8,
            seed: 0,
        }
    }
}

pub fn geometric_schedule(from: f64, to: f64, stages: usize) -> Vec<f64> {
    if stages <= 1 {
        return vec![to];
    }
    let ratio = (to / from).powf(1.0 / (stages - 1) as f64);
    (0..stages)
        .map(|i| if i == stages - 1 { to } else { from * ratio.powi(i as i32) })
        .collect()
}

impl SmoothConfig {
    pub fn validate(&self) -> Result<(), SmoothError> {
        let s = &self.sigma_schedule;
        if s.is_empty() || s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SmoothError::Config("sigma schedule must be nonempty and positive"));
        }
        if s.windows(2).any(|w| w[1] >= w[0]) {
            return Err(SmoothError::Config("sigma schedule must strictly decrease"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(SmoothError::Config("step size must be positive"));
        }
        if self.restarts == 0 {
            return Err(SmoothError::Config("need at least one restart"));
        }
        Ok(())
    }
}

/// Euclidean projection onto `{v >= 0, sum v = 1}` (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoLevel {
    pub b: u64,
    pub lambda: f64,
    pub gamma_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepProfile {
    pub support: u64,
    pub is_uniform_step: bool,
    pub two_level: Option<TwoLevel>,
    /// The value of `k/n` a two-level optimum would require, else `k/n` itself.
    pub mu: f64,
    /// Pair sum `lambda` forced when `mu = k/n`; absent when `n = 2k`.
    pub predicted_lambda: Option<f64>,
}

fn lambda_for(mu: f64, n: u64, k: u64) -> Option<f64> {
    let c = (k as f64 - 1.0) / (n as f64 - 2.0);
    let den = 1.0 - 2.0 * c;
    (n > 2 && den.abs() > 1e-15).then(|| 2.0 * (mu - c) / den)
}

/// Classifies `gamma` as a uniform step, a two-level vector, or neither.
pub fn analyze_step(gamma: &[f64], n: u64, k: u64, tol: f64) -> StepProfile {
    let mut g: Vec<f64> = gamma.to_vec();
    g.sort_by(|a, b| b.total_cmp(a));
    let a = g.iter().rposition(|v| *v > tol).map_or(0, |i| i + 1);
    let kn = k as f64 / n as f64;
    let mut profile = StepProfile {
        support: a as u64,
        is_uniform_step: false,
        two_level: None,
        mu: kn,
        predicted_lambda: lambda_for(kn, n, k),
    };
    if a == 0 {
        return profile;
    }
    let head = &g[..a];
    let level = 1.0 / a as f64;
    if head.iter().all(|v| (v - level).abs() <= tol) {
        profile.is_uniform_step = true;
        return profile;
    }
    let (hi, lo) = (head[0], head[a - 1]);
    let b = head.iter().take_while(|v| (*v - hi).abs() <= tol).count();
    if head[b..].iter().all(|v| (v - lo).abs() <= tol) && b < a {
        let lambda = hi + lo;
        let balance = b as f64 * lambda + (a as f64 - 2.0 * b as f64) * lo;
        if (balance - 1.0).abs() <= tol * a as f64 {
            profile.two_level = Some(TwoLevel {
                b: b as u64,
                lambda,
                gamma_a: lo,
            });
            let c = (k as f64 - 1.0) / (n as f64 - 2.0);
            if n > 2 {
                profile.mu = c + lambda * (1.0 - 2.0 * c) / 2.0;
            }
        }
    }
    profile
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealResult {
    pub n: u64,
    pub k: u64,
    pub a: u64,
    pub gamma_star: Vec<f64>,
    #[serde(serialize_with = "ser::count")]
    pub n_star: BigCount,
    pub profile: StepProfile,
    /// Best exact count reached by each restart.
    #[serde(serialize_with = "ser::counts")]
    pub per_restart: Vec<BigCount>,
}

struct Candidate {
    n_value: BigCount,
    gamma: Vec<f64>,
}

impl Candidate {
    fn key(&self) -> Vec<i64> {
        self.gamma.iter().map(|g| (g * 1e9).round() as i64).collect()
    }

    /// Higher count wins; ties go to the lexicographically smaller rounded vector.
    fn better_than(&self, other: &Candidate) -> bool {
        self.n_value > other.n_value || (self.n_value == other.n_value && self.key() < other.key())
    }
}

fn evaluate(head: &[f64], n: u64, k: u64) -> Result<Candidate, SmoothError> {
    let mut full = vec![0.0; n as usize - 1];
    full[..head.len()].copy_from_slice(head);
    full.sort_by(|a, b| b.total_cmp(a));
    let exact = GammaVector::from_f64(&full)?;
    let n_value = count_n(&exact, n, k)?;
    Ok(Candidate {
        n_value,
        gamma: exact.to_f64(),
    })
}

fn start_point(restart: usize, a: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Half the restarts begin at uniform steps on [a], [a-1], ...; the rest
    // are flat Dirichlet draws.
    if restart.is_multiple_of(2) {
        let width = a.saturating_sub(restart / 2).max(1);
        (0..a).map(|j| if j < width { 1.0 / width as f64 } else { 0.0 }).collect()
    } else {
        let raw: Vec<f64> = (0..a).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    }
}

fn run_restart(n: u64, k: u64, a: usize, restart: usize, config: &SmoothConfig) -> Result<Candidate, SmoothError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(restart as u64));
    let mut head = start_point(restart, a, &mut rng);
    let mut best = evaluate(&head, n, k)?;
    if a == 1 {
        return Ok(best);
    }
    let mut full = vec![0.0; n as usize - 1];
    for &sigma in &config.sigma_schedule {
        let step = config.step_size * sigma;
        for _ in 0..config.max_iters {
            full[..a].copy_from_slice(&head);
            let r = smoothed_grad(&full, sigma, n, k, a as u64)?;
            // Ascent direction in full coordinates along the simplex.
            let mut d = r.clone();
            d.push(-r.iter().sum::<f64>());
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-300 {
                break;
            }
            let moved: Vec<f64> = head.iter().zip(&d).map(|(h, di)| h + step * di / norm).collect();
            head = project_simplex(&moved);
        }
        let cand = evaluate(&head, n, k)?;
        if cand.better_than(&best) {
            best = cand;
        }
    }
    Ok(best)
}

/// Annealed projected ascent on the smoothed count over the simplex on `[a]`.
pub fn anneal_optimize(n: u64, k: u64, a: u64, config: &SmoothConfig) -> Result<AnnealResult, SmoothError> {
    if n < 2 || k == 0 || k >= n {
        return Err(SmoothError::InvalidShape { n, k });
    }
    if a == 0 || a >= n {
        return Err(SmoothError::InvalidSupport { a, max: n - 1 });
    }
    config.validate()?;
    let results: Vec<Candidate> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(n, k, a as usize, r, config))
        .collect::<Result<_, _>>()?;
    let per_restart = results.iter().map(|c| c.n_value.clone()).collect();
    let mut iter = results.into_iter();
    let mut best = iter.next().expect("at least one restart");
    for c in iter {
        if c.better_than(&best) {
            best = c;
        }
    }
    let profile = analyze_step(&best.gamma, n, k, 1e-6);
    Ok(AnnealResult {
        n,
        k,
        a,
        gamma_star: best.gamma,
        n_star: best.n_value,
        profile,
        per_restart,
    })
}

/// Runs [`anneal_optimize`] for every support width and keeps the largest
/// count, preferring the narrowest support on ties.
pub fn anneal_all_supports(n: u64, k: u64, config: &SmoothConfig) -> Result<AnnealResult, SmoothError> {
    if n < 2 || k == 0 || k >= n {
        return Err(SmoothError::InvalidShape { n, k });
    }
    let mut best: Option<AnnealResult> = None;
    for a in 1..n {
        let r = anneal_optimize(n, k, a, config)?;
        if best.as_ref().is_none_or(|b| r.n_star > b.n_star) {
            best = Some(r);
        }
    }
    Ok(best.expect("n >= 2"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{p_conjectured, tail_sum_strict};

    #[test]
    fn all_supports_reach_p() {
        let r = anneal_all_supports(10, 3, &SmoothConfig::default()).unwrap();
        assert_eq!(r.n_star, p_conjectured(10, 3).unwrap().value);
        assert_eq!(r.a, 3);
        assert!(r.profile.is_uniform_step);
    }

    #[test]
    fn schedule_shape() {
        let s = geometric_schedule(0.5, 1e-4, 20);
        assert_eq!(s.len(), 20);
        assert_eq!(s[0], 0.5);
        assert_eq!(s[19], 1e-4);
        assert!(SmoothConfig::default().validate().is_ok());
        let bad = SmoothConfig {
            sigma_schedule: vec![0.1, 0.2],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn projection_lands_on_simplex() {
        for v in [
            vec![0.2, 0.3, 0.5],
            vec![2.0, -1.0, 0.0],
            vec![-5.0, -5.0],
            vec![0.9, 0.9, 0.9, 0.9],
        ] {
            let p = project_simplex(&v);
            assert!(p.iter().all(|x| *x >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{p:?}");
        }
        assert_eq!(project_simplex(&[2.0, -1.0, 0.0]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn classify_profiles() {
        let g = [0.2; 5];
        assert!(analyze_step(&g, 10, 3, 1e-9).is_uniform_step);
        let (b, a, gmin) = (1u64, 4u64, 0.2);
        let lambda = (1.0 - (a as f64 - 2.0 * b as f64) * gmin) / b as f64;
        let g = [lambda - gmin, gmin, gmin, gmin, 0.0];
        let p = analyze_step(&g, 6, 2, 1e-9);
        let t = p.two_level.expect("two-level");
        assert_eq!(t.b, 1);
        assert!((t.lambda - lambda).abs() < 1e-12);
        let p = analyze_step(&[0.5, 0.3, 0.2], 4, 2, 1e-6);
        assert!(!p.is_uniform_step && p.two_level.is_none());
    }

    fn quick() -> SmoothConfig {
        SmoothConfig {
            sigma_schedule: geometric_schedule(0.5, 1e-3, 8),
            max_iters: 60,
            restarts: 4,
            ..Default::default()
        }
    }

    #[test]
    fn anneal_examples() {
        let r = anneal_optimize(10, 3, 3, &SmoothConfig::default()).unwrap();
        assert_eq!(r.n_star, p_conjectured(10, 3).unwrap().value);
        assert_eq!(r.n_star, BigCount::from(85u32));
        assert!(r.profile.is_uniform_step);
        let r = anneal_optimize(4, 2, 1, &quick()).unwrap();
        assert_eq!(r.n_star, BigCount::from(3u32));
        assert_eq!(r.gamma_star, vec![1.0, 0.0, 0.0]);
        let r = anneal_optimize(13, 3, 12, &quick()).unwrap();
        assert_eq!(r.n_star, tail_sum_strict(13, 3, 12).unwrap());
    }

    #[test]
    fn deterministic_for_seed() {
        let c = quick();
        assert_eq!(anneal_optimize(8, 2, 5, &c).unwrap(), anneal_optimize(8, 2, 5, &c).unwrap());
    }
}
