//! Numerical thresholds shared by every suite.

/// Structure matrix validation (F² = I, FᵀF = I).
pub const STRUCTURE: f64 = 1e-12;

/// Gram condition number above which a chart point is singular.
pub const GRAM_CONDITION: f64 = 1e10;

/// Orthonormality of the frame and `Jᵀ·normal = 0`.
pub const FRAME: f64 = 1e-12;

/// Exact-endpoint snapping for slant angles, relative to `‖x‖_g`.
pub const ANGLE_SNAP: f64 = 1e-9;

/// Direction spread (radians) below which a distribution is pointwise slant,
/// and the distance to 0 or π/2 that counts as invariant / anti-invariant.
pub const SLANT_SPREAD: f64 = 1e-6;

/// Variation of the slant function over the samples below which it is
/// reported as constant.
pub const SLANT_CONSTANT: f64 = 1e-6;

/// Structure-operator identities (reconstruction, g-symmetry, F² split).
pub const STRUCT_IDENTITY: f64 = 1e-10;

/// Slant identities (T² = cos²θ I and the induced metric relations).
pub const SLANT_IDENTITY: f64 = 1e-8;

/// Claimed slant function vs computed, compared on cos²θ.
pub const SLANT_CLAIM: f64 = 1e-9;

/// Gauss reconstruction of the second derivatives.
pub const GAUSS: f64 = 1e-9;

/// Shape operator vs second fundamental form.
pub const SHAPE_OPERATOR: f64 = 1e-10;

/// Anything that involves one layer of central differencing.
pub const DIFFERENCED: f64 = 1e-5;

/// Central difference step.
pub const FD_STEP: f64 = 1e-5;

/// Distribution orthogonality and F-mixing (axiom (b)), invariance T(D) ⊂ D.
pub const AXIOM: f64 = 1e-8;

/// Projector identities.
pub const PROJECTOR: f64 = 1e-10;

/// Normal-field check in the Weingarten split.
pub const NORMAL_FIELD: f64 = 1e-8;

/// Bracket residual for integrability.
pub const INTEGRABILITY: f64 = 1e-8;

/// Lemma-level identities that mix connections with exact quantities.
pub const LEMMA: f64 = 1e-6;

/// `|sin²θ₂ - sin²θ₁|` below which the mixed-angle identity degenerates.
pub const ANGLE_GAP: f64 = 1e-6;

/// Distance of θ from 0 or π/2 below which sin 2θ / tan θ checks are skipped.
pub const ANGLE_DEGENERATE: f64 = 1e-6;

/// Internal consistency between two evaluations of the same quantity.
pub const CONSISTENCY: f64 = 1e-8;

/// `W(μ) = 0` for fiber directions.
pub const FIBER_CONSTANT: f64 = 1e-8;

/// Base-fiber block of the metric.
pub const WARP_CROSS: f64 = 1e-9;

/// Base block must not vary along fiber coordinates (differenced).
pub const WARP_BASE_DEPENDENCE: f64 = 1e-6;

/// Agreement of the warping function recovered from different fiber fields,
/// and conformality of the fiber block.
pub const WARP_CONSISTENCY: f64 = 1e-8;

/// Normalised variance of f_claim² / f_recovered².
pub const WARP_CLAIM: f64 = 1e-10;

/// Relative variation of f below which the warped product is trivial.
pub const WARP_TRIVIAL: f64 = 1e-9;
