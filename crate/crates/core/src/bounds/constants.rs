//! The explicit constants of the normal-approximation chain, evaluated with
//! outward rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::exact::{ratio, ser, DirectedBound, Ratio};

pub(crate) fn q(num: i64, den: i64) -> DirectedBound {
    DirectedBound::from_ratio(&ratio(num, den))
}

fn r_int(v: u64) -> Ratio {
    Ratio::from_integer(BigInt::from(v))
}

fn sqrt_two_pi() -> DirectedBound {
    (crate::exact::interval::pi() * 2.0).sqrt()
}

/// Variance of `|x ∩ [a]|` for a uniform random `k`-set `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperSigma {
    #[serde(serialize_with = "ser::ratio")]
    pub sigma2: Ratio,
    pub sigma2_enclosure: DirectedBound,
    pub sigma: DirectedBound,
}

pub fn hyper_sigma(n: u64, k: u64, a: u64) -> HyperSigma {
    assert!(k >= 1 && k < n && a >= 1 && a < n, "need 1 <= k < n and 1 <= a < n");
    let (n_r, k_r, a_r) = (r_int(n), r_int(k), r_int(a));
    let one = Ratio::from_integer(1.into());
    let sigma2 = (&k_r * &a_r / &n_r) * (&one - &a_r / &n_r) * (&one - &k_r / &n_r);
    let enc = DirectedBound::from_ratio(&sigma2);
    HyperSigma {
        sigma: enc.sqrt(),
        sigma2_enclosure: enc,
        sigma2,
    }
}

/// Smallest `sigma` over the corners of `a in [n/5, n - n/5]`, `k in (n/5, n/4)`.
pub fn sigma_regime_min(n: u64) -> DirectedBound {
    let a_lo = n.div_ceil(5);
    let a_hi = n - a_lo;
    let k_lo = n / 5 + 1;
    let k_hi = n.div_ceil(4) - 1;
    let mut best: Option<DirectedBound> = None;
    for a in [a_lo, a_hi] {
        for k in [k_lo, k_hi] {
            let s = hyper_sigma(n, k, a).sigma;
            best = Some(match best {
                None => s,
                Some(b) => b.min(s),
            });
        }
    }
    best.expect("four corners")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KIndices {
    pub k0: u64,
    pub k1: u64,
    pub k2: u64,
}

fn floor_ratio(r: &Ratio) -> BigInt {
    r.numer().div_floor(r.denom())
}

fn ceil_ratio(r: &Ratio) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

fn clamp_nonneg(v: BigInt) -> u64 {
    if v.is_negative() {
        0
    } else {
        v.to_u64().expect("index fits in u64")
    }
}

/// Index cut-offs for the standardized lattice `(i - ka/n) / sigma`. `K2` follows
/// `K2 - 1 < ka/n - delta sigma^2 <= K2`.
pub fn k_indices(n: u64, k: u64, a: u64, delta: &Ratio) -> KIndices {
    let hs = hyper_sigma(n, k, a);
    let mean = r_int(k) * r_int(a) / r_int(n);
    let k0 = clamp_nonneg(floor_ratio(&mean));
    let k2 = clamp_nonneg(ceil_ratio(&(&mean - delta * &hs.sigma2)));
    // K1 = min { i >= 0 : mean - i <= sigma }, decided by squaring.
    let within = |i: u64| {
        let gap = &mean - r_int(i);
        !gap.is_positive() || &gap * &gap <= hs.sigma2
    };
    let guess = (mean.to_f64().unwrap_or(0.0) - hs.sigma.mid()).ceil().max(0.0) as u64;
    let mut k1 = guess;
    while k1 > 0 && within(k1 - 1) {
        k1 -= 1;
    }
    while !within(k1) {
        k1 += 1;
    }
    KIndices { k0, k1, k2 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeConstants {
    pub i1: DirectedBound,
    pub i2: DirectedBound,
    pub i3: DirectedBound,
    pub total: DirectedBound,
}

/// The three error terms and their sum at a given `sigma`, `n` and `delta`.
pub fn be_constant_bounds(sigma: DirectedBound, n: u64, delta: &Ratio) -> BeConstants {
    let s2 = sigma.square();
    let d = DirectedBound::from_ratio(delta);
    let nn = DirectedBound::from_ratio(&(r_int(n) / r_int(n - 1)));
    let one = DirectedBound::point(1.0);

    let i1 = nn / (d.square() * s2);

    let i2 = (one / s2).exp() * 60.0 / s2 + (one / sigma).exp() * 3.0 / sigma;

    let bracket = crate::exact::interval::pi().sqrt().recip() + 1.0 + (one / (s2 * 8.0) * -1.0).exp() * 10.0 / sqrt_two_pi();
    let shift = d * sigma - one / (sigma * 2.0);
    let i3 = bracket / (s2 * 12.0) + one / (sqrt_two_pi() * sigma) + (shift.square() * -0.5).exp() / (sqrt_two_pi() * shift);

    BeConstants {
        i1,
        i2,
        i3,
        total: i1 + i2 + i3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct X3Integral {
    /// `int |x|^3 exp(-0.07 x^2) dx` over the whole line, equal to `1/0.07^2`.
    pub integral: DirectedBound,
    /// `4 (3/0.14)^{3/2} exp(-3/2) / sigma`.
    pub correction: DirectedBound,
}

pub fn x3_integral(sigma: DirectedBound) -> X3Integral {
    let integral = q(10_000, 49);
    let correction = q(300, 14).powi(3).sqrt() * 4.0 * DirectedBound::point(-1.5).exp() / sigma;
    X3Integral { integral, correction }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StirlingConstant {
    /// `(1 - a/n)^{-1/2} e^{1/1000}` at the largest admitted `a/n`.
    pub lumped: DirectedBound,
    /// Upper bound on `1/(12n) + 1/(12(k-i)) + 1/(12(n-a-k+i))` over the regime.
    #[serde(serialize_with = "ser::ratio")]
    pub exponent_bound: Ratio,
    pub exponent_within_lump: bool,
}

/// `a_frac` is the largest admitted `a/n`; `k/n` is taken in `(1/5, 1/4)`.
pub fn stirling_constant(n_min: u64, a_frac: &Ratio) -> StirlingConstant {
    let one = Ratio::from_integer(1.into());
    let lumped = DirectedBound::from_ratio(&(&one / (&one - a_frac))).sqrt() * q(1, 1000).exp();
    // k - i >= k (1 - a/n) > (1/5)(1 - a_frac) n and
    // n - a - k + i >= n - a - k > (1 - a_frac - 1/4) n.
    let n_r = r_int(n_min);
    let twelve = r_int(12);
    let k_part = &one / (&twelve * ratio(1, 5) * (&one - a_frac) * &n_r);
    let rest_part = &one / (&twelve * (&one - a_frac - ratio(1, 4)) * &n_r);
    let exponent_bound = &one / (&twelve * &n_r) + k_part + rest_part;
    StirlingConstant {
        lumped,
        exponent_within_lump: exponent_bound <= ratio(1, 1000),
        exponent_bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyVerdict {
    Holds,
    /// The enclosure of the slack contains zero.
    Tight,
    Violated,
}

fn entropy_term(count: u64, total: u64) -> DirectedBound {
    // total * H(count/total) with natural logarithms, 0 ln 0 = 0.
    let mut acc = DirectedBound::point(0.0);
    let t = DirectedBound::from_u64(total);
    for c in [count, total - count] {
        if c > 0 {
            let cb = DirectedBound::from_u64(c);
            acc = acc - cb * (cb / t).ln();
        }
    }
    acc
}

/// `(n-a) H((k-i)/(n-a)) - n H(k/n) <= i ln(k/n) + (a-i) ln(1-k/n)`, with the
/// slack `lhs - rhs` enclosed.
pub fn entropy_inequality(n: u64, k: u64, a: u64, i: u64) -> (EntropyVerdict, DirectedBound) {
    assert!(i <= k && i <= a && a < n && k < n && k - i <= n - a);
    let lhs = entropy_term(k - i, n - a) - entropy_term(k, n);
    let p = q(k as i64, n as i64);
    let rhs = DirectedBound::from_u64(i) * p.ln() + DirectedBound::from_u64(a - i) * (DirectedBound::point(1.0) - p).ln();
    let slack = lhs - rhs;
    let verdict = if slack.hi() <= 0.0 {
        EntropyVerdict::Holds
    } else if slack.lo() > 0.0 {
        EntropyVerdict::Violated
    } else {
        EntropyVerdict::Tight
    };
    (verdict, slack)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntropyGrid {
    pub checked: u64,
    pub holds: u64,
    pub tight: u64,
    pub violated: Vec<(u64, u64, u64, u64)>,
}

/// Checks the entropy inequality for `k` across the band, `a <= n/5`, and
/// `i <= ka/n`, on a coarse grid.
pub fn entropy_grid(ns: &[u64]) -> EntropyGrid {
    let mut g = EntropyGrid {
        checked: 0,
        holds: 0,
        tight: 0,
        violated: Vec::new(),
    };
    for &n in ns {
        let ks = [n / 5 + 1, (n / 5 + n / 4) / 2, n.div_ceil(4) - 1];
        let a_top = n / 5;
        let as_ = [1, 2, 15, a_top / 3, a_top];
        for &k in &ks {
            for &a in &as_ {
                if a == 0 {
                    continue;
                }
                let top = k * a / n;
                let is = [0, top / 2, top.saturating_sub(1), top];
                for &i in &is {
                    if k - i > n - a {
                        continue;
                    }
                    g.checked += 1;
                    match entropy_inequality(n, k, a, i).0 {
                        EntropyVerdict::Holds => g.holds += 1,
                        EntropyVerdict::Tight => g.tight += 1,
                        EntropyVerdict::Violated => g.violated.push((n, k, a, i)),
                    }
                }
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernoulliConstant {
    /// Exact value at `p = 1/5`, the supremum over the open band.
    #[serde(serialize_with = "ser::ratio")]
    pub boundary_value: Ratio,
    pub at_quarter: DirectedBound,
    /// Hull of enclosures on a grid strictly inside the band.
    pub interior_hull: DirectedBound,
}

/// `(rho + 0.43 s^3) / (3 s^3)` with `s^2 = p(1-p)` and `rho = s^2 (1 - 2 s^2)`.
pub fn bernoulli_constant_at(p: &Ratio) -> DirectedBound {
    let one = Ratio::from_integer(1.into());
    let s2 = p * (&one - p);
    let rho = DirectedBound::from_ratio(&(&s2 * (&one - ratio(2, 1) * &s2)));
    let s3 = DirectedBound::from_ratio(&s2).sqrt().powi(3);
    (rho + s3 * q(43, 100)) / (s3 * 3.0)
}

/// The expression equals `(1 - 2s^2)/(3s) + 0.43/3`, decreasing in `s^2`, and
/// `s^2 = p(1-p)` increases on the band, so the supremum sits at `p = 1/5`,
/// where `s = 2/5` is rational.
pub fn bernoulli_constant_sup(band: (Ratio, Ratio)) -> BernoulliConstant {
    let (lo, hi) = band;
    let one = Ratio::from_integer(1.into());
    let s2 = &lo * (&one - &lo);
    // Exact only when s is rational; at p = 1/5 it is 2/5.
    let s = ratio(2, 5);
    assert_eq!(&s * &s, s2, "closed form needs p = 1/5 at the lower end");
    let boundary_value = (&s2 * (&one - ratio(2, 1) * &s2) + ratio(43, 100) * &s * &s2) / (ratio(3, 1) * &s * &s2);
    let steps = 200;
    let mut hull: Option<DirectedBound> = None;
    for t in 1..steps {
        let p = &lo + (&hi - &lo) * ratio(t, steps);
        let v = bernoulli_constant_at(&p);
        hull = Some(hull.map_or(v, |h| h.hull(&v)));
    }
    BernoulliConstant {
        boundary_value,
        at_quarter: bernoulli_constant_at(&ratio(1, 4)),
        interior_hull: hull.expect("grid is nonempty"),
    }
}
