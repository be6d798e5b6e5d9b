//! Multivariate extreme-value models built as positive-stable mixtures of
//! Gumbel and generalized extreme value distributions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod diagnostics;
pub mod evd;
pub mod likelihood;
pub mod mixture;
pub mod numeric;
pub mod risk;
pub mod rng;
pub mod stable;

pub use error::{Error, Result};
pub use evd::{GevParams, GumbelParams};
pub use mixture::{ExtremeModel, MixtureSpec};
pub use stable::{ExpSParams, StableLaw};
