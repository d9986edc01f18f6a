//! Floquet–Bloch analysis of the periodic wave equation
//! `(μ₁u′)′ − k²μ₂u = −ω²ρu` on a unit period.

pub mod asymptotics;
pub mod error;
pub mod greenfn;
pub mod isofreq;
pub mod linalg;
pub mod lyapunov;
pub mod matricant;
pub mod profile;
pub mod quad;
pub mod roots;
pub mod scan;
pub mod spectrum;

pub use error::{Error, Result};
pub use linalg::Mat2;
pub use num_complex::Complex64;
