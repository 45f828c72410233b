//! Scenarios, trading strategies, Monte Carlo runs and the reported metrics.

mod metrics;
mod monte_carlo;
mod scenario;
mod transaction;

pub use metrics::{
    compute_metrics, read_results, report_from_rows, write_results, MetricsReport, ResultRow, StrategyReport, Summary,
    TrialMetrics, RESULT_COLUMNS,
};
pub use monte_carlo::{
    cost_rng, prepare_all, realization_rng, rows_of, run_monte_carlo, run_trials, MonteCarloConfig, MonteCarloRun,
    OfflineStats,
};
pub use scenario::{
    gen_synthetic, load_eua, CrlbSettings, InteractionModel, KappaSource, Scenario, ScenarioConfig, TradingConfig,
};
pub use transaction::{
    greedy_accept, greedy_offers, interaction_cost, offline_config, prepare, run_transaction, scenario_bid_step,
    ContractStatus, ExecutedContract, OfflineSummary, PreparedStrategy, ServedTemp, Strategy, StrategyShape,
    TrialOutcome,
};
