use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::exact::{ser, Ratio};

use super::HullError;

/// Largest vertex count representable in the bitmask encoding.
pub const MAX_VERTICES: u64 = 64;

/// Iterates all `k`-subsets of `{0..n}` as bitmasks in increasing numeric order.
pub fn ksubsets(n: u64, k: u64) -> impl Iterator<Item = u64> {
    assert!(n <= MAX_VERTICES && k <= n);
    let limit: u128 = 1u128 << n;
    let mut cur: Option<u128> = Some((1u128 << k) - 1);
    std::iter::from_fn(move || {
        let c = cur?;
        if c >= limit {
            cur = None;
            return None;
        }
        cur = if c == 0 {
            None
        } else {
            // Gosper's hack.
            let low = c & c.wrapping_neg();
            let ripple = c + low;
            Some(ripple | (((c ^ ripple) >> 2) / low))
        };
        Some(c as u64)
    })
}

/// 1-based vertex list of a bitmask edge.
pub fn vertices(edge: u64) -> Vec<u64> {
    (0..64).filter(|b| edge >> b & 1 == 1).map(|b| b + 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: u64,
    k: u64,
    edges: BTreeSet<u64>,
}

impl Hypergraph {
    pub fn new(n: u64, k: u64, edges: impl IntoIterator<Item = u64>) -> Result<Self, HullError> {
        if n == 0 || n > MAX_VERTICES || k == 0 || k >= n {
            return Err(HullError::InvalidShape { n, k });
        }
        let mut set = BTreeSet::new();
        for e in edges {
            if e.count_ones() as u64 != k || (n < 64 && e >> n != 0) {
                return Err(HullError::InvalidEdge(vertices(e)));
            }
            if !set.insert(e) {
                return Err(HullError::DuplicateEdge(vertices(e)));
            }
        }
        Ok(Hypergraph { n, k, edges: set })
    }

    /// Builds from 1-based vertex lists.
    pub fn from_lists(n: u64, k: u64, lists: &[Vec<u64>]) -> Result<Self, HullError> {
        let mut masks = Vec::with_capacity(lists.len());
        for l in lists {
            let mut m = 0u64;
            for &v in l {
                if v == 0 || v > n || m >> (v - 1) & 1 == 1 {
                    return Err(HullError::InvalidEdge(l.clone()));
                }
                m |= 1 << (v - 1);
            }
            masks.push(m);
        }
        Self::new(n, k, masks)
    }

    pub fn complete(n: u64, k: u64) -> Result<Self, HullError> {
        if n == 0 || n > MAX_VERTICES || k == 0 || k >= n {
            return Err(HullError::InvalidShape { n, k });
        }
        Self::new(n, k, ksubsets(n, k))
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn edges(&self) -> impl Iterator<Item = u64> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, edge: u64) -> bool {
        self.edges.contains(&edge)
    }

    /// Parses the edge-list format: a header line `n k`, then one edge per
    /// line as 1-based vertices. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, HullError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(HullError::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        let nums = parse_numbers(hline, header)?;
        let [n, k] = nums[..] else {
            return Err(HullError::Parse {
                line: hline,
                msg: "header must be `n k`".into(),
            });
        };
        let mut lists = Vec::new();
        for (line, l) in lines {
            let vs = parse_numbers(line, l)?;
            if vs.len() as u64 != k {
                return Err(HullError::Parse {
                    line,
                    msg: format!("expected {k} vertices, found {}", vs.len()),
                });
            }
            lists.push(vs);
        }
        Self::from_lists(n, k, &lists)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.k);
        for &e in &self.edges {
            let vs: Vec<String> = vertices(e).iter().map(u64::to_string).collect();
            let _ = writeln!(s, "{}", vs.join(" "));
        }
        s
    }
}

fn parse_numbers(line: usize, text: &str) -> Result<Vec<u64>, HullError> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<u64>().map_err(|_| HullError::Parse {
                line,
                msg: format!("not a nonnegative integer: {t:?}"),
            })
        })
        .collect()
}

/// Nonzero weights summing to zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightVector {
    #[serde(serialize_with = "ser::ratios")]
    beta: Vec<Ratio>,
}

impl WeightVector {
    pub fn new(beta: Vec<Ratio>) -> Result<Self, HullError> {
        if beta.is_empty() || beta.len() as u64 > MAX_VERTICES {
            return Err(HullError::InvalidWeights("length must be in 1..=64"));
        }
        if !beta.iter().sum::<Ratio>().is_zero() {
            return Err(HullError::InvalidWeights("weights must sum to zero"));
        }
        if beta.iter().all(Zero::is_zero) {
            return Err(HullError::InvalidWeights("weights must not all vanish"));
        }
        Ok(WeightVector { beta })
    }

    pub fn from_ints(beta: &[i64]) -> Result<Self, HullError> {
        Self::new(beta.iter().map(|&b| crate::exact::ratio(b, 1)).collect())
    }

    pub fn beta(&self) -> &[Ratio] {
        &self.beta
    }

    pub fn n(&self) -> u64 {
        self.beta.len() as u64
    }

    pub fn edge_sum(&self, edge: u64) -> Ratio {
        self.beta
            .iter()
            .enumerate()
            .filter(|(j, _)| edge >> j & 1 == 1)
            .map(|(_, b)| b.clone())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UCount {
    pub count: u64,
    /// Members as bitmasks, in increasing order.
    pub family: Vec<u64>,
}

/// The `k`-sets whose weight is nonnegative (zero included).
pub fn count_u(beta: &WeightVector, k: u64) -> UCount {
    let family: Vec<u64> = ksubsets(beta.n(), k).filter(|&e| !beta.edge_sum(e).is_negative()).collect();
    UCount {
        count: family.len() as u64,
        family,
    }
}

/// The `k`-sets with strictly positive weight.
pub fn count_strict(beta: &WeightVector, k: u64) -> u64 {
    ksubsets(beta.n(), k).filter(|&e| beta.edge_sum(e).is_positive()).count() as u64
}
