//! Achievable rates for state-dependent discrete memoryless channels with a
//! rate-limited cribbing helper.
//!
//! * [`prob`]: exact entropies and mutual informations on dense tables.
//! * [`channel`]: channel instances, auxiliary systems and the rate bound
//!   `min{I(UV;Y), I(U;X|VT)}`.
//! * [`search`]: numerical lower bounds by searching over auxiliary systems.
//! * [`example`]: the two-bit example channel and its α-family of schemes.
//! * [`sim`]: Monte Carlo simulation of the block-Markov scheme with a
//!   cribbing helper and backward decoding.

pub mod channel;
pub mod error;
pub mod example;
pub mod prob;
pub mod search;
pub mod seed;
pub mod sim;

pub use channel::{
    build_joint, help_rate, rate_bound, rate_pair, AuxiliarySystem, ChannelSpec, Mapping, RatePair,
};
pub use error::{Error, Result};
pub use prob::{
    check_markov, entropy, marginalize, mutual_information, Alphabet, CondPmf, JointTable, Pmf,
};
pub use search::{
    capacity_lower_bound, cardinality_bounds, CardinalityBounds, SearchBudget, SearchResult,
};
