//! Moment triangles of discrete gray-scale images.
//!
//! An image is a finite set of weighted points `(z_k, rho_k)` in the complex
//! plane. Its complex moments `mu_(j,l) = sum_k z_k^j conj(z_k)^l rho_k`
//! arrange into a triangle whose row `n` holds `C(n,l) mu_(l,n-l)`; that row
//! is simultaneously the Fourier coefficient vector of the `n`-th order
//! moment of the image's Radon transform. This crate computes the triangle,
//! reconstructs images from it (and from Radon projection moments),
//! invariantizes it under translation, scaling and rotation via moving
//! frames, and reads shape information (elongation, rotational folds,
//! reflection axes) out of the entries.

pub mod cloud;
pub mod error;
pub mod invariants;
pub mod json;
pub mod matching;
pub mod moments;
pub mod radon;
pub mod reconstruct;
pub mod roots;
pub mod symmetry;
pub mod triangle;

pub use cloud::{AffineRecord, Pixel, PixelCloud};
pub use error::{Error, Result};
pub use invariants::{
    angle_between, anisotropic_moment, anisotropic_scaled, invariant_triangle, orbits_equivalent,
    rotation_branch_distance, rotation_frame_angle, wrap_angle, GroupWitness, MovingFrame,
    OrbitVerdict,
};
pub use json::{
    report_to_json, table_from_json, table_to_json, triangle_from_json, triangle_to_json,
    triangle_to_json_with,
};
pub use moments::{binomial, compute_moment, MomentTable, DEFAULT_MAX_ORDER};
pub use radon::{
    check_generic_angles, generic_angle_schedule, image_from_radon,
    image_from_radon_unknown_locations, project, radon_moment_direct, radon_moment_fourier,
    row_from_samples, MomentSample, RadonProjection, RowSolve,
};
pub use reconstruct::{
    effective_support, intensities_from_column, intensities_real_least_squares, reconstruct_image,
    reconstruct_image_with, recover_locations, IntensitySolve, LeastSquaresSolve, PronySolution,
    ReconstructionParams, SupportEstimate,
};
pub use roots::{coefficients_from_roots, polynomial_roots};
pub use symmetry::{
    axis_symmetry_classify, classification_metrics, covariance, detect_frs, eigen_elongation,
    elongation, horizontal_symmetry_score, is_line, reflection_axis, reflection_axis_with,
    AxisClassification, AxisVerdict, ClassificationMetrics, FoldSymmetry, SymmetryOptions,
    SymmetryReport,
};
pub use triangle::{FrameTag, PascalTriangle};
