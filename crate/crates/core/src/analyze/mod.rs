//! Decision procedures: verdicts, predicted limit tables and witnesses.

mod direct;
mod missing;
mod naturals;
mod report;

pub use direct::{analyze_sft, chain_direct, LIFTED_PERIOD_CAP};
pub use missing::{analyze_general_pair, analyze_missing_digits, coset_contains, length_supports, WITNESS_STATE_CAP};
pub use naturals::analyze_naturals;
pub use report::{
    ratio, rational_f64, rational_string, AnalysisReport, ClosureCertificate, Coset, LimitTable, LimitValue, Method,
    ReportInputs, Subgroup, Verdict, Witness, SCHEMA_VERSION,
};
