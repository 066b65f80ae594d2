//! Truncated and closed-form Bergman kernels.
//!
//! A truncated kernel is built in three steps: pick a monomial basis, compute
//! its Gram matrix (exactly on Reinhardt domains, by quasi-Monte Carlo
//! otherwise), and orthonormalize. The kernel is then stored as a Hermitian
//! coefficient matrix `C` with `K_N(z, w) = Σ C[a][b] z^a conj(w)^b`, so
//! every derivative needed downstream is an exact polynomial operation.

mod basis;
mod closed;
mod gram;
mod model;

pub use basis::{monomial_basis, Cutoff, MonomialBasis};
pub use closed::{eval_kernel_closed, ClosedForm};
pub use gram::{gram_exact_reinhardt, gram_qmc, orthonormalize, GramMatrix, GramSource, Orthonormalization, DEFAULT_FLOOR_RATIO};
pub use model::{build_model, kernel_model, model_from_cloud, reproducing_residual, GramChoice, KernelModel, ModelConfig, Provenance};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{CMat, C64};

/// Where a kernel's values come from; decides which tolerance tier applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSource {
    ClosedForm,
    ExactGram,
    Qmc,
}

/// Value and first/mixed derivatives of `K(z, w)` at one pair.
///
/// `mixed[(i, j)] = ∂²K / ∂conj(w_i) ∂z_j`.
#[derive(Debug, Clone)]
pub struct KernelJet {
    pub value: C64,
    pub dz: Vec<C64>,
    pub dwbar: Vec<C64>,
    pub mixed: CMat,
}

/// Anything that can evaluate a Bergman kernel together with its derivatives.
pub trait BergmanKernel: Sync {
    fn dimension(&self) -> usize;

    /// Volume of the domain (exact or estimated).
    fn volume(&self) -> f64;

    fn source(&self) -> KernelSource;

    /// Short label, normally the domain id.
    fn label(&self) -> String;

    fn jet(&self, z: &[C64], w: &[C64]) -> Result<KernelJet>;

    fn eval(&self, z: &[C64], w: &[C64]) -> Result<C64> {
        Ok(self.jet(z, w)?.value)
    }

    /// Summary embedded in verification reports.
    fn info(&self) -> KernelInfo {
        KernelInfo {
            label: self.label(),
            source: self.source(),
            volume: self.volume(),
            cutoff: None,
            effective_rank: None,
            gram: None,
            floor_ratio: None,
        }
    }
}

/// Where a kernel came from, as recorded in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelInfo {
    pub label: String,
    pub source: KernelSource,
    pub volume: f64,
    pub cutoff: Option<Cutoff>,
    pub effective_rank: Option<usize>,
    pub gram: Option<GramSource>,
    pub floor_ratio: Option<f64>,
}
