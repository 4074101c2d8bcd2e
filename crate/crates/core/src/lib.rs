//! Exact verification suite for the extremal formulas governing perfect
//! fractional matchings in uniform hypergraphs and the
//! Manickam-Miklós-Singhi bound.

pub mod bounds;
pub mod exact;
pub mod formula;
pub mod hull;
pub mod selftest;
pub mod smooth;
pub mod sweep;
