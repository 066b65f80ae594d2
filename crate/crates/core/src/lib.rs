//! Bergman kernels of small bounded domains in ℂ and ℂ², and the geometry
//! built from them.
//!
//! The crate covers a catalog of test domains, the integer arithmetic of
//! quasi-circular weights, truncated Bergman kernels (exact Gram matrices on
//! Reinhardt domains, quasi-Monte Carlo elsewhere), the matrix
//! `T(z, w) = ∂²_{conj w, z} log K(z, w)`, Bergman mappings and the unitary
//! matrices `L(φ, p)`, and verification reports for minimality,
//! representativity and linearity of origin-preserving maps.
//!
//! ```
//! use bergman_lab::domain::DomainSpec;
//! use bergman_lab::geometry::t_matrix;
//! use bergman_lab::kernel::{build_model, BergmanKernel, ModelConfig};
//! use num_complex::Complex64;
//!
//! let disk = DomainSpec::by_id("disk")?;
//! let model = build_model(&disk, &ModelConfig::default_for(&disk))?;
//! let z = [Complex64::new(0.3, 0.1)];
//! let origin = [Complex64::new(0.0, 0.0)];
//! assert!((model.eval(&z, &origin)?.re - std::f64::consts::FRAC_1_PI).abs() < 1e-12);
//! assert!((t_matrix(&model, &z, &origin)?.entries[(0, 0)].re - 2.0).abs() < 1e-10);
//! # Ok::<(), bergman_lab::Error>(())
//! ```

pub mod domain;
pub mod error;
pub mod geometry;
pub mod holomap;
pub mod kernel;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod sampling;
pub mod weight;

pub use domain::{catalog, ComplexPoint, DomainKind, DomainSpec};
pub use error::{Error, Result};
pub use kernel::{BergmanKernel, ClosedForm, KernelModel, ModelConfig};
pub use report::{ReportKind, Tier, VerificationReport};
pub use weight::{MultiIndex, Weight};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/domains.md")]
    mod domains {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/maps.md")]
    mod maps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
