//! Proactive eavesdropping through an active reconfigurable intelligent
//! surface: channel scenarios, SINR evaluation, and the SCA, element-wise
//! and passive reflecting-coefficient optimizers.

mod error;
pub mod scenario;
pub mod sinr;
pub mod subproblem;
pub mod sca;
pub mod geometry;
pub mod passive;
pub mod experiment;

pub use error::{Result, SurveilError};
