//! Desk-scale ground truth: fractional matching feasibility with
//! certificates, U-counts, and brute-force extremal counts.

pub mod arrangement;
pub mod hypergraph;
pub mod pfm;
pub mod simplex;

pub use arrangement::{
    brute_force_p, brute_force_q, compose, decompose_monotone, enumerate_faces, enumerate_faces_capped, BruteForce, FaceSummary,
    DEFAULT_N_CAP,
};
pub use hypergraph::{count_strict, count_u, ksubsets, Hypergraph, UCount, WeightVector};
pub use pfm::{has_pfm, has_pfm_capped, verify_certificate, Certificate, PfmCertificate, SeparationCertificate, DEFAULT_EDGE_CAP};

#[derive(Debug, thiserror::Error)]
pub enum HullError {
    #[error("need 1 <= k < n <= 64, got n={n} k={k}")]
    InvalidShape { n: u64, k: u64 },
    #[error("invalid edge {0:?}")]
    InvalidEdge(Vec<u64>),
    #[error("duplicate edge {0:?}")]
    DuplicateEdge(Vec<u64>),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid weights: {0}")]
    InvalidWeights(&'static str),
    #[error("weights are not sorted nonincreasing")]
    NotMonotone,
    #[error("instance has no edges")]
    EmptyInstance,
    #[error("{what} cap exceeded: {got} > {limit}")]
    CapExceeded { what: &'static str, limit: u64, got: u64 },
}
