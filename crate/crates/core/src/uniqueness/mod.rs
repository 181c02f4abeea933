//! Whether marginals pin down a pure state.
//!
//! [`uda_test`] decides it numerically, [`env_rank_certificate`] checks the
//! rank condition behind the half-plus-one result, [`count_params`] gives
//! the counting bound, and [`diosi_reconstruct`] rebuilds a three-party pure
//! state from two overlapping marginals.

mod counts;
mod diosi;
mod env;
mod uda;

pub use counts::{count_params, count_table, format_table, ParamCount};
pub use diosi::{diosi_reconstruct, DIOSI_TOL};
pub use env::{
    env_block, env_rank_certificate, env_rank_certificate_seeded, BlockRank, EnvSystemCertificate,
    ENV_FULL_ENUMERATION_MAX_N, ENV_RANK_RTOL, ENV_SAMPLE_BLOCKS,
};
pub use uda::{find_alternative, marginal_residual, uda_test, UdaOptions, UdaReport, UdaVerdict};
