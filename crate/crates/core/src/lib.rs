//! Weighted-inequality diagnostics for Hardy-kernel integral operators
//! K_alpha(z, lambda) = (1 - z conj(lambda))^(-alpha) on the unit disk.
//!
//! The crate discretizes weights and functions on a boundary-refined polar grid,
//! computes the Carleson-box characteristic [w]_{p,alpha}, applies the continuous,
//! dyadic-model and maximal operators, and turns each step of the underlying
//! sufficiency/necessity argument (two-grid kernel domination, test-function
//! geometry, Carleson embedding, Hölder chain) into an executable check.
//!
//! Area normalization: dA = dx dy / pi (the whole disk has area 1) and arc lengths
//! are measured as |I| = len_rad / pi, so the circle has |T| = 2 and a Carleson box
//! has area |I|^2 - |I|^3/2 for |I| <= 1 and |I|/2 for 1 < |I| <= 2.

pub mod characteristic;
pub mod cli;
pub mod domination;
pub mod dyadic;
pub mod embedding;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod kernel;
pub mod necessity;
pub mod norms;
pub mod operators;
pub mod report;
pub mod verify;
pub mod weights;

pub use characteristic::{box_ratio, characteristic, guo_wang, CharFlag, CharacteristicReport};
pub use domination::{domination_check, domination_ratio, DominationReport};
pub use dyadic::{ancestor_chain, cover, DyadicInterval, GridShift};
pub use embedding::{carleson_embedding_ratio, holder_chain_check, HolderReport};
pub use error::HardyError;
pub use geometry::{box_area, in_box, ArcInterval, BoxPart, CarlesonBox, DiskPoint};
pub use grid::{GridFunction, GridSignature, PolarGrid};
pub use kernel::{dyadic_kernel, dyadic_kernel_pair, kernel, kernel_checked};
pub use necessity::{choose_d, necessity_constants, necessity_geometry, GeometryReport};
pub use norms::{
    norm_estimate_l2, norm_estimate_l2_with_start, norm_lower_bound, weak_type_check, NormMethod,
    OperatorNormReport,
};
pub use operators::{
    apply_k, apply_k_sigma, apply_m, apply_t, apply_t_sigma, weight_values, weighted_lp_norm,
    DyadicTree,
};
pub use verify::{run_lemma_suite, run_theorem_correlation, LemmaConfig, SweepSpec};
pub use weights::{box_mass, parse_weight, WeightSpec};

/// Crate version string used in reproducibility headers and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
