//! Practical transactions: who shows up, who steps aside, what is left over,
//! and the spot market that sells the leftovers.

mod residual;
mod spot;

pub use residual::{
    residual_supply, sample_realization, select_volunteers, select_volunteers_with, ResidualSupply, VolunteerDecision,
};
pub use spot::{online_market, run_onebw2m, OnlineConfig, OnlineMarket, OnlineOutcome};
