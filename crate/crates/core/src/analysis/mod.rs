//! Closed-form quantities: wideband rate bounds, regime classification and
//! codebook planning, Chernoff error bounds, and the exact error oracle.

mod chernoff;
mod exact;
mod rates;
pub mod special;

pub use chernoff::{chernoff_error_bounds, chernoff_exponent, g_function, ChernoffBounds, StageBound};
pub use exact::{exact_end_to_end, exact_tails, ExactErrorReport, ExactTails};
pub use rates::{
    bandwidths, block_markov_lower, chernoff_rate_limit, classify_regime, cutset_upper, hyperedge_flows, hyperedges,
    min_cut_rate, plan_codebook, rate_report, reference_rate, CodebookPlan, Hyperedges, RateReference,
    RateReport, Regime, RegimeKind, DEFAULT_MAX_CODEBOOK,
};
