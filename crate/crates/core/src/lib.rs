//! Generalized Choquet games on effectively presented spaces.
//!
//! The crate is organised as the game is: [`topology`] supplies spaces and
//! basic codes, [`game`] the engine and payoffs, [`strategy`] the strategy
//! representations and their transformations, [`bases`] the basis classes and
//! constructions, [`solver`] the exhaustive finite-space oracle, and
//! [`instances`] the concrete spaces and built-in strategies.

pub mod error;
pub mod rational;
pub mod game;
pub mod topology;
pub mod strategy;
pub mod bases;
pub mod instances;
pub mod solver;

pub use error::{Error, Result, Side};
