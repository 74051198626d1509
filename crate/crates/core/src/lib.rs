//! Word-association networks, spreading activation and implicit-bias measurement.
//!
//! This crate holds the algorithmic core: building an undirected weighted
//! network from free-association norms, diffusing activation from prime
//! words over it, and measuring implicit bias from the resulting activation
//! levels (stereotype differences, valence regressions and emotion
//! differences). It also extracts minimum-cost prime-to-target paths for
//! qualitative inspection.
//!
//! The crate is `no_std` and only needs `alloc`. Enabling the `std` feature
//! evaluates activation columns in parallel.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(rust_2018_idioms)]

extern crate alloc;

pub mod activation;
pub mod bias;
pub mod error;
pub mod graph;
pub mod lexicon;
mod linalg;
pub mod stats;
pub mod stream;

pub use activation::{
    normalize_matrix, spread, spread_batch, ActivationMatrix, Norm, Normalization, SpreadParams,
};
pub use bias::{
    emotion_bias, stereotype_bias, valence_bias, Approach, BiasReport, HeatmapCell, LabeledResult,
    PairedDifferenceSet, PrimeCoefficient, PrimeSpec, Primes, TargetSet,
};
pub use error::{Error, Result};
pub use graph::{
    build_network, diameter, network_stats, AssociationNetwork, DiameterMethod, NetworkStats,
    NormRecord,
};
pub use lexicon::{Emotion, Lexicon};
pub use stats::{ols_fit, wald_equal_coefficients, wilcoxon_signed_rank, GlmFit, TestResult};
pub use stream::{extract_stream, render_dot, CostMode, MindsetStream, ValenceClass};
