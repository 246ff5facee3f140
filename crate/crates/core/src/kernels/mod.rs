//! Matrix primitives used by the decompositions.

mod householder;
mod pinv;
mod pqr;
mod rng;
mod svd;

pub use pinv::{orthonormal_pinv_factor, CONDITION_LIMIT};
pub use pqr::{truncated_pivoted_qr, truncated_pivoted_qr_transposed, PivotedQR};
pub use rng::{gaussian_matrix, SeededRng, SAMPLER_VERSION};
pub use svd::{leading_left_singular_vectors, thin_svd, ThinSVD, MAX_SWEEPS};

pub(crate) use householder::HouseholderQR;
