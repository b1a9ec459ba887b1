//! Fixtures, formulation comparison, size measurement and the
//! rolling-horizon driver.

mod equivalence;
mod fixtures;
mod growth;
mod oracle;
mod rolling;

pub use equivalence::{check_equivalence, check_suite, EquivalenceRecord, EquivalenceReport, SolveSummary, MATCH_TOL};
pub use fixtures::{equivalence_instance, equivalence_suite, fixture_ex1, windows_instance, windows_suite};
pub use growth::{
    closed_forms, log_log_slope, measure_growth, ClosedForms, GrowthGrid, GrowthPoint, GrowthReport, Slope,
};
pub use oracle::{semantic_x_oracle, OracleReport};
pub use rolling::{
    horizon_instance, plan_horizons, run_rolling, synthetic_month, Budgets, DueDemand, HorizonOutcome, HorizonPlan,
    HorizonSlot, MonthPlan, PlanError, RollingResult,
};

use crate::compile::CompileError;
use crate::generate::GenerateError;
use crate::solver::{DecodeError, LpError};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Solve(#[from] LpError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("{context}: {error}")]
    Verification { context: String, error: DecodeError },
}
