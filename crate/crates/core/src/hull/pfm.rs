//! Perfect fractional matching feasibility with exact certificates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact::{ratio, ser, Ratio};

use super::hypergraph::Hypergraph;
use super::simplex::{phase1, Phase1};
use super::HullError;

pub const DEFAULT_EDGE_CAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PfmCertificate {
    pub support: Vec<u64>,
    #[serde(serialize_with = "ser::ratios")]
    pub alpha: Vec<Ratio>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationCertificate {
    #[serde(serialize_with = "ser::ratios")]
    pub omega: Vec<Ratio>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Pfm(PfmCertificate),
    Separation(SeparationCertificate),
}

/// Decides whether the uniform point `(k/n, ..., k/n)` lies in the convex hull
/// of the edge indicators.
pub fn has_pfm(h: &Hypergraph) -> Result<Certificate, HullError> {
    has_pfm_capped(h, DEFAULT_EDGE_CAP)
}

pub fn has_pfm_capped(h: &Hypergraph, edge_cap: usize) -> Result<Certificate, HullError> {
    if h.edge_count() == 0 {
        return Err(HullError::EmptyInstance);
    }
    if h.edge_count() > edge_cap {
        return Err(HullError::CapExceeded {
            what: "edges",
            limit: edge_cap as u64,
            got: h.edge_count() as u64,
        });
    }
    let n = h.n() as usize;
    let edges: Vec<u64> = h.edges().collect();
    // Rows: one per vertex, then the normalization row.
    let mut rows = vec![vec![Ratio::zero(); edges.len()]; n + 1];
    for (c, &e) in edges.iter().enumerate() {
        for (j, row) in rows.iter_mut().enumerate().take(n) {
            if e >> j & 1 == 1 {
                row[c] = Ratio::one();
            }
        }
        rows[n][c] = Ratio::one();
    }
    let share = ratio(h.k() as i64, h.n() as i64);
    let mut b = vec![share; n];
    b.push(Ratio::one());

    match phase1(&rows, &b) {
        Phase1::Feasible { x } => {
            let (support, alpha) = edges.into_iter().zip(x).filter(|(_, a)| !a.is_zero()).unzip();
            Ok(Certificate::Pfm(PfmCertificate { support, alpha }))
        }
        Phase1::Infeasible { y } => {
            let mean: Ratio = y[..n].iter().sum::<Ratio>() / Ratio::from_integer(BigInt::from(n));
            let omega: Vec<Ratio> = y[..n].iter().map(|v| v - &mean).collect();
            Ok(Certificate::Separation(SeparationCertificate { omega: primitive(&omega) }))
        }
    }
}

/// Scales a rational vector to coprime integers, preserving direction.
fn primitive(v: &[Ratio]) -> Vec<Ratio> {
    let lcm = v.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = v.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Ratio::from_integer(x / &g)).collect()
}

/// Re-checks a certificate against `h` with exact arithmetic only.
pub fn verify_certificate(h: &Hypergraph, cert: &Certificate) -> bool {
    let n = h.n() as usize;
    match cert {
        Certificate::Pfm(c) => {
            if c.support.len() != c.alpha.len() || c.support.is_empty() {
                return false;
            }
            if c.support.iter().any(|e| !h.contains(*e)) || c.alpha.iter().any(Signed::is_negative) {
                return false;
            }
            if c.alpha.iter().sum::<Ratio>() != Ratio::one() {
                return false;
            }
            let share = ratio(h.k() as i64, h.n() as i64);
            (0..n).all(|j| {
                let cover: Ratio = c
                    .support
                    .iter()
                    .zip(&c.alpha)
                    .filter(|(e, _)| *e >> j & 1 == 1)
                    .map(|(_, a)| a.clone())
                    .sum();
                cover == share
            })
        }
        Certificate::Separation(c) => {
            if c.omega.len() != n || !c.omega.iter().sum::<Ratio>().is_zero() {
                return false;
            }
            h.edges().all(|e| {
                let s: Ratio = (0..n).filter(|j| e >> j & 1 == 1).map(|j| c.omega[j].clone()).sum();
                s.is_negative()
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Ratio> {
        v.iter().map(|&x| ratio(x, 1)).collect()
    }

    #[test]
    fn complete_graph_is_uniform() {
        let h = Hypergraph::complete(4, 2).unwrap();
        let cert = has_pfm(&h).unwrap();
        assert!(verify_certificate(&h, &cert));
        let uniform = Certificate::Pfm(PfmCertificate {
            support: h.edges().collect(),
            alpha: vec![ratio(1, 6); 6],
        });
        assert!(verify_certificate(&h, &uniform));
    }

    #[test]
    fn star_separates() {
        let h = Hypergraph::from_lists(4, 2, &[vec![1, 2], vec![1, 3], vec![1, 4]]).unwrap();
        let cert = has_pfm(&h).unwrap();
        assert!(matches!(cert, Certificate::Separation(_)));
        assert!(verify_certificate(&h, &cert));
        let good = Certificate::Separation(SeparationCertificate {
            omega: ints(&[-3, 1, 1, 1]),
        });
        let bad = Certificate::Separation(SeparationCertificate {
            omega: ints(&[3, -1, -1, -1]),
        });
        assert!(verify_certificate(&h, &good));
        assert!(!verify_certificate(&h, &bad));
    }

    #[test]
    fn empty_and_capped() {
        let h = Hypergraph::new(5, 2, []).unwrap();
        assert!(matches!(has_pfm(&h), Err(HullError::EmptyInstance)));
        let h = Hypergraph::complete(5, 2).unwrap();
        assert!(matches!(has_pfm_capped(&h, 3), Err(HullError::CapExceeded { .. })));
    }

    #[test]
    fn tampered_pfm_fails() {
        let h = Hypergraph::complete(4, 2).unwrap();
        let mut alpha = vec![ratio(1, 6); 6];
        alpha[0] = ratio(1, 3);
        alpha[1] = ratio(0, 1);
        let c = Certificate::Pfm(PfmCertificate {
            support: h.edges().collect(),
            alpha,
        });
        assert!(!verify_certificate(&h, &c));
    }

    #[test]
    fn primitive_scaling() {
        assert_eq!(primitive(&[ratio(-3, 4), ratio(1, 4), ratio(1, 2)]), ints(&[-3, 1, 2]));
    }
}
