//! Fitting the two-parameter discrete generalized beta (DGB) rank-order law
//! to stratified rank-size data.
//!
//! The pipeline is: load unit-level records ([`data`]), derive an indicator and
//! rank it per stratum ([`RankSizeSeries`]), fit `(a, b)` by size-weighted maximum
//! likelihood ([`estimation`]), score the fit with a cumulative KS gap ([`gof`]) and
//! summarise spread with the entropy-based uncertainty percentage ([`uncertainty`]).
//! Cross-stratum relationships between fitted parameters are handled by
//! [`analysis`]; [`report`] owns the on-disk table schemas.

pub mod analysis;
pub mod data;
pub mod dgb;
mod error;
pub mod estimation;
pub mod gof;
mod numeric;
pub mod report;
mod series;
mod simplex;
pub mod synth;
pub mod uncertainty;

pub use dgb::{log_normalizer, DgbParams};
pub use error::{Error, Result};
pub use estimation::{fit_mle, FitConfig, FitResult};
pub use series::{Indicator, RankEntry, RankSizeSeries};
pub use uncertainty::UpConvention;
