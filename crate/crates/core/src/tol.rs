//! Centralized numerical tolerances.
//!
//! Every geometric and verification routine takes its thresholds from a
//! [`Tolerances`] record so that the property suites have a single knob.
//! The defaults are the values the verification reports are calibrated
//! against; tightening them is safe for well-conditioned inputs,
//! loosening them weakens the certificates.

/// Tolerance configuration shared by all modules.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Orthonormality defect allowed in a subspace basis (Kronecker-delta check).
    pub orthonormality: f64,
    /// Residual norm below which a vector is dropped as linearly dependent
    /// during orthonormalization.
    pub rank_drop: f64,
    /// Slack for projector identities (idempotence, Pythagoras).
    pub projection: f64,
    /// Smallest admissible value of `inf d(v, F_perp)` in the angle
    /// intersection inequality; below this the hypothesis `T ∩ F⊥ = {0}`
    /// is considered violated.
    pub angle_hypothesis: f64,
    /// Slack added to the right-hand side when checking inequalities
    /// that hold exactly in real arithmetic.
    pub inequality_slack: f64,
    /// Minimum simplex height; flatter simplices are rejected as degenerate.
    pub simplex_height: f64,
    /// Membership tolerance for "point lies on the complex" queries.
    pub on_complex: f64,
    /// Tangent-plane mismatch allowed across interior ridges of a
    /// multi-simplex stratum.
    pub ridge_tangent: f64,
    /// Barycentric coordinate slack for open-simplex membership.
    pub barycentric: f64,
    /// Distance below which a point counts as lying on a stratum
    /// (distance gradient undefined there).
    pub on_stratum: f64,
    /// Partition-of-unity sum defect allowed at sampled points.
    pub partition_sum: f64,
    /// Expression-map continuity defect allowed at sampled interface points.
    pub map_continuity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orthonormality: 1e-12,
            rank_drop: 1e-10,
            projection: 1e-10,
            angle_hypothesis: 1e-8,
            inequality_slack: 1e-9,
            simplex_height: 1e-10,
            on_complex: 1e-9,
            ridge_tangent: 1e-9,
            barycentric: 1e-10,
            on_stratum: 1e-12,
            partition_sum: 1e-9,
            map_continuity: 1e-9,
        }
    }
}

impl Tolerances {
    pub const fn default_const() -> Self {
        Self {
            orthonormality: 1e-12,
            rank_drop: 1e-10,
            projection: 1e-10,
            angle_hypothesis: 1e-8,
            inequality_slack: 1e-9,
            simplex_height: 1e-10,
            on_complex: 1e-9,
            ridge_tangent: 1e-9,
            barycentric: 1e-10,
            on_stratum: 1e-12,
            partition_sum: 1e-9,
            map_continuity: 1e-9,
        }
    }
}

/// The default record used when callers do not supply their own.
pub const DEFAULT: Tolerances = Tolerances::default_const();
