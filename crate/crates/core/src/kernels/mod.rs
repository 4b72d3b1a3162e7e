//! Distance kernels shared by the measures: 1-D transport, edit distance and
//! optimal assignment. All functions are pure.

mod assignment;
mod edit_distance;
mod transport;

pub use assignment::{optimal_assignment, Assignment, CostMatrix};
pub use edit_distance::{dl_distance, dl_distance_normalized};
pub use transport::{emd_1d, surplus_penalty, wasserstein_1, Histogram1D, MASS_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Transport kernel used by the histogram-based measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Unbalanced EMD on raw counts, divided by the reference observation count.
    #[default]
    Emd,
    /// 1st Wasserstein distance on unit-normalized histograms.
    #[serde(rename = "1wd")]
    Wasserstein,
}

impl Kernel {
    /// Average number of bins each reference observation moves.
    ///
    /// For [`Kernel::Emd`] the raw EMD is divided by `reference_count`; the
    /// Wasserstein variant is already a per-unit-mass quantity.
    pub fn scaled_distance(
        self,
        reference: &Histogram1D,
        other: &Histogram1D,
        reference_count: f64,
    ) -> Result<f64> {
        match self {
            Kernel::Emd => Ok(emd_1d(reference, other) / reference_count),
            Kernel::Wasserstein => wasserstein_1(reference, other),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Emd => "emd",
            Kernel::Wasserstein => "1wd",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "emd" => Ok(Kernel::Emd),
            "1wd" | "w1" | "wasserstein" => Ok(Kernel::Wasserstein),
            other => Err(crate::error::Error::Parameter(format!(
                "unknown kernel `{other}`"
            ))),
        }
    }
}
