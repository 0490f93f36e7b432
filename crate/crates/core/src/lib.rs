//! Exact-arithmetic toolkit for coopetitive single-slot ad auctions, where
//! one ad can benefit several advertisers at once.
//!
//! The crate covers winner determination, coopetitive VCG, first-price
//! clearing with cooperative envy-free equilibria, the egalitarian
//! equilibrium, revenue benchmarks, an external-contracts position auction,
//! and brute-force oracles to cross-check all of it. Every quantity is a
//! [`Scalar`], an exact rational.

pub mod contracts;
pub mod egalitarian;
pub mod error;
pub mod format;
pub mod lp;
pub mod mechanisms;
pub mod model;
pub mod oracle;
pub mod polytope;
pub mod random;
pub mod scalar;

pub use contracts::{
    best_response_contract, evaluate_contracts, position_vcg, BestResponse, Contract, ContractProfile, OwnedAuction,
    Placement, PositionOutcome,
};
pub use egalitarian::{egalitarian_solve, verify_egalitarian, EgalitarianSolution, LoweringEvent, LoweringTrace};
pub use error::{Error, Result};
pub use format::{parse_bids, parse_instance, parse_shorthand, serialize_bids, serialize_instance};
pub use mechanisms::{
    efficient_ties, efficient_winner, first_price_clear, revenue_lower_bound, settle_first_price, vcg,
    VcgResult,
};
pub use model::{Ad, AdId, AdvertiserId, AuctionInstance, BidProfile, Outcome};
pub use oracle::{enumerate_equilibria_grid, lexmax_surplus_grid, vcg_bruteforce, GridSpec};
pub use polytope::{
    build_polytope, is_cef, is_equilibrium, is_ir, revenue_range, sample_pareto_equilibrium, CefPolytope,
    EquilibriumCertificate, Verdict, Witness,
};
pub use scalar::Scalar;
