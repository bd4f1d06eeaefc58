//! Duration-constrained assemblage of ad video segments.
//!
//! Segments carry importance labels and pairwise PPL scores. A selection is
//! scored on importance and on the coherence of adjacent pairs, and must fit
//! a duration window around a target length. The crate provides exact and
//! random baselines, a pointer-network policy trained with REINFORCE on a
//! small reverse-mode autodiff tape, a synthetic data generator and a CLI.

pub mod autodiff;
pub mod cli;
pub mod data;
pub mod error;
pub mod model;
pub mod policy;
pub mod scoring;
pub mod seeding;
pub mod solvers;
pub mod training;

pub use error::{Error, Result};
