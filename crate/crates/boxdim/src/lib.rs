//! Box-counting dimension estimation for graphs of Weierstrass-type
//! functions, with a consolidated report comparing the measured slope to the
//! closed-form prediction and to the entropy-based consistency value.

pub mod count;
pub mod regression;
pub mod report;

pub use count::{box_count, box_count_flattened, count_boxes_fn, sample_count};
pub use regression::{estimate_box_dimension, BoxFit};
pub use report::{full_report, DimensionReport, EntropyOptions, ReportOptions};

use std::fmt;

#[derive(Debug)]
pub enum BoxdimError {
    /// The requested level would exceed memory or key-packing limits.
    ResourceGuard(String),
    /// Fewer than three levels available for the regression.
    FitRange(String),
    BadArg(String),
    Core(weier_core::CoreError),
    Criterion(hstar_criterion::CriterionError),
    Measure(entropy_measures::MeasureError),
}

impl fmt::Display for BoxdimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoxdimError::ResourceGuard(msg) => write!(f, "resource guard: {msg}"),
            BoxdimError::FitRange(msg) => write!(f, "fit range: {msg}"),
            BoxdimError::BadArg(msg) => write!(f, "{msg}"),
            BoxdimError::Core(e) => write!(f, "{e}"),
            BoxdimError::Criterion(e) => write!(f, "{e}"),
            BoxdimError::Measure(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BoxdimError {}

impl From<weier_core::CoreError> for BoxdimError {
    fn from(e: weier_core::CoreError) -> Self {
        BoxdimError::Core(e)
    }
}

impl From<hstar_criterion::CriterionError> for BoxdimError {
    fn from(e: hstar_criterion::CriterionError) -> Self {
        BoxdimError::Criterion(e)
    }
}

impl From<entropy_measures::MeasureError> for BoxdimError {
    fn from(e: entropy_measures::MeasureError) -> Self {
        BoxdimError::Measure(e)
    }
}
