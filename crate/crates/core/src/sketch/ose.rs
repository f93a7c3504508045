use super::SketchKind;

/// Failure probability used when none is given.
pub const DEFAULT_DELTA: f64 = 1e-10;
/// Distortion used when none is given.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Smallest sketch dimension `k` for which the oblivious subspace embedding
/// bound of the given family holds with distortion `epsilon` and failure
/// probability `delta` on a `d`-dimensional subspace of `ℝᵐ`; capped at `m`.
///
/// * Gaussian: `k ≥ 7.87 ε⁻² (6.9 d + ln(1/δ))`
/// * SRHT: `k ≥ 2 (ε² − ε³/3)⁻¹ (√d + √(8 ln(6m/δ)))² ln(3d/δ)`
/// * leverage sampling: `k > 144 d ε⁻² ln(2d/δ)`
pub fn ose_dim(kind: SketchKind, epsilon: f64, delta: f64, d: usize, m: usize) -> usize {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    assert!(d >= 1, "subspace dimension must be positive");
    let df = d as f64;
    let bound = match kind {
        SketchKind::Gaussian | SketchKind::Explicit => {
            (7.87 / (epsilon * epsilon) * (6.9 * df + (1.0 / delta).ln())).ceil()
        }
        SketchKind::Srht => {
            let e = epsilon;
            let lead = 2.0 / (e * e - e * e * e / 3.0);
            let root = df.sqrt() + (8.0 * (6.0 * m as f64 / delta).ln()).sqrt();
            (lead * root * root * (3.0 * df / delta).ln()).ceil()
        }
        SketchKind::LeverageScore => {
            (144.0 * df / (epsilon * epsilon) * (2.0 * df / delta).ln()).floor() + 1.0
        }
    };
    (bound as usize).min(m)
}
