pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `σf²·exp(−‖a−b‖²/(2ℓ²))`.
pub fn rbf_kernel(a: &[f64], b: &[f64], length_scale: f64, signal_var: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    signal_var * (-squared_distance(a, b) / (2.0 * length_scale * length_scale)).exp()
}

/// `exp(−γ‖a−b‖²)`, the SVM parameterisation.
pub fn rbf_gamma(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}
