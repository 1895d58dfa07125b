//! Induced Hausdorff metrics on quotients `G/H_X` of Lie groups acting by
//! isometries, the intrinsic metrics they generate, and the Finsler norms on
//! the quotient's tangent space.

pub mod error;
pub mod geometry;
pub mod group;

pub use error::{Error, Result};
pub mod hausdorff;
pub mod scenario;
pub mod finsler;
pub mod catalog;
pub mod paths;
pub mod table;
pub mod runner;
