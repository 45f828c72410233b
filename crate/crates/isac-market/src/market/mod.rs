//! Market entities, contracts and the utilities and risks they induce.

mod contract;
mod entities;
mod expectation;
mod feasibility;
mod risk;
mod utility;
mod volunteer;

pub use contract::{Contract, PenaltyTerms, Realization, TempContract};
pub use entities::{
    form_coalitions, BaseStation, BsId, ClientId, Coalition, CoalitionId, CoalitionMode, Market, MobileUser, MuId,
    SensingTarget, TargetId,
};
pub use expectation::{
    conditional_volunteer, expect_beta, expect_vmax, expect_volunteer, ExpectationMode, EXACT_ENUMERATION_LIMIT,
};
pub use feasibility::{
    check_feasibility, check_individual_rationality, Constraint, ContractBounds, FeasibilityContext, Violation,
};
pub use risk::{bs_risk, client_risk, client_risk_at, client_risk_bound, BsRisk, RiskBound, RiskThresholds};
pub use utility::{
    bs_contract_utility, bs_utility, client_utility, coalition_sensing_utility, expected_bs_contract_utility,
    expected_client_utility, expected_coalition_utility, expected_contract_welfare, expected_mu_comm_utility,
    mu_comm_utility, online_utilities, OnlineUtilities,
};
pub use volunteer::{CheapestCompensation, Demand, VolunteerPolicy};
