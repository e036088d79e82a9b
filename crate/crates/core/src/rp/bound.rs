/// Lower bound on `P(L(θ) ≤ c + ε)` for the sample-mean gap with `N`
/// samples per strategy, `T` periods, `M` agents and budget range `G`:
/// `Π_t Π_i (max{1 − 2·exp(−2ε²N/G²), 0})^T`.
///
/// The bound does not depend on `c`; it is accepted for signature fidelity.
pub fn hoeffding_confidence(eps: f64, n: usize, t: usize, m: usize, g: f64, _c: f64) -> f64 {
    assert!(eps >= 0.0 && n >= 1 && g > 0.0, "need eps ≥ 0, N ≥ 1, G > 0");
    let inner = (1.0 - 2.0 * (-2.0 * eps * eps * n as f64 / (g * g)).exp()).max(0.0);
    let exponent = (t * t * m) as i32;
    inner.powi(exponent).clamp(0.0, 1.0)
}
