//! Extension of set-valued maps over finite metric spaces.
//!
//! A map `f : A → 2^X` defined on a closed subset `A` of a finite metric space `X`
//! extends to all of `X` by composing with the nearest-point relation onto `A`
//! ([`tietze::extend_usc`]). Around that construction the crate provides:
//!
//! - [`metric`]: validated finite metric spaces and sampled intervals, circles and tori;
//! - [`relation`]: set-valued maps as total relations, preimages, composition and a
//!   quantitative upper-semicontinuity check;
//! - [`tietze`]: the nearest-point and retraction extensions and normality witnesses;
//! - [`dynamics`]: closed-relation dynamics, reachability and infinite trajectories;
//! - [`obstruction`]: winding numbers of circle-valued loops and an exhaustive search
//!   showing that such a loop need not extend single-valuedly;
//! - [`io`] and [`cli`]: JSON file formats and the `relext` binary.
//!
//! Per-point loops run on rayon when the default `parallel` feature is on.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod metric;
pub mod obstruction;
pub mod par;
pub mod random;
pub mod relation;
pub mod set;
pub mod tietze;

pub use error::{Error, Result};
pub use metric::{ClosedSubset, FiniteMetricSpace};
pub use relation::SetValuedMap;
pub use set::IndexSet;
