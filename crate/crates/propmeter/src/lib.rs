//! Tabulation of multiwinner ranked-ballot elections and quantitative
//! proportionality measures for the committees they produce.
//!
//! The crate is organised around a small immutable [`model::Election`]:
//!
//! * [`model`] — ballot data model, BLT/JSON/CSV ingestion, shared primitives;
//! * [`coalitions`] — maximal solid coalitions and the threshold-constraint set;
//! * [`rules`] — Scottish STV, Meek STV, EAR, SNTV, IRV and sequential RCV;
//! * [`measures`] — per-committee alpha values for PSC, EJR+, local stability
//!   and priceability, plus the whole-committee census;
//! * [`optimizer`] — instance-optimal alpha values, the exact feasibility
//!   kernel, the hardness-instance generator and apportionment over
//!   non-disjoint coalitions;
//! * [`completion`] — frequency-proportional completion of truncated ballots;
//! * [`harness`] — corpus management, batch experiments and figure emission.

pub mod coalitions;
pub mod completion;
pub mod formats;
pub mod harness;
pub mod lp;
pub mod measures;
pub mod model;
pub mod optimizer;
pub mod rules;

pub use model::{Committee, Election};
