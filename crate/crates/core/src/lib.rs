//! Jungle-economy simulator: power-ordered appropriation equilibria, AI
//! technology and power investment, control-problem predicates and the
//! recursive AI-activation game.

pub mod control;
pub mod corpus;
pub mod equilibrium;
pub mod error;
pub mod io;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod run;

pub use error::{IoError, ModelError, SolveError};
