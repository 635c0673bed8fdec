//! Coherent-state amplitudes in the Fock and quadrature representations.
//!
//! Quadratures follow `X_θ = a e^{-iθ} + a† e^{iθ}`, so the vacuum has unit
//! variance in every direction.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::special::ln_factorial;

/// Above this mean photon number e^{-|γ|²/2} is too close to underflow for the
/// plain recurrence, and amplitudes are built in log space instead.
const LOG_SPACE_THRESHOLD: f64 = 700.0;

/// Complex amplitude of a single-mode coherent state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentLabel(pub Complex64);

impl CoherentLabel {
    pub const VACUUM: CoherentLabel = CoherentLabel(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Self {
        CoherentLabel(Complex64::new(re, im))
    }

    pub fn from_polar(r: f64, phase: f64) -> Self {
        CoherentLabel(Complex64::from_polar(r, phase))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// |γ|², the mean photon number.
    pub fn mean_photon_number(self) -> f64 {
        self.0.norm_sqr()
    }
}

impl From<Complex64> for CoherentLabel {
    fn from(value: Complex64) -> Self {
        CoherentLabel(value)
    }
}

/// The fixed quadrature convention: `X_θ = a e^{-iθ} + a† e^{iθ}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QuadratureConvention;

impl QuadratureConvention {
    pub const VACUUM_VARIANCE: f64 = 1.0;

    /// Mean of `X_θ` in the coherent state `|γ⟩`.
    pub fn mean(gamma: CoherentLabel, theta: f64) -> f64 {
        2.0 * (gamma.0 * Complex64::from_polar(1.0, -theta)).re
    }

    /// Probability density of `X_θ` at `x` for the coherent state `|γ⟩`.
    pub fn density(gamma: CoherentLabel, theta: f64, x: f64) -> f64 {
        let d = x - Self::mean(gamma, theta);
        (-0.5 * d * d / Self::VACUUM_VARIANCE).exp() / (2.0 * PI * Self::VACUUM_VARIANCE).sqrt()
    }
}

/// Fock amplitude ⟨n|γ⟩ = e^{-|γ|²/2} γⁿ / √(n!).
pub fn coherent_fock_amplitude(gamma: CoherentLabel, n: usize) -> Complex64 {
    let g = gamma.0;
    let mean = g.norm_sqr();
    if mean == 0.0 {
        return if n == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    if mean > LOG_SPACE_THRESHOLD {
        return log_space_amplitude(g, n);
    }
    let mut amp = Complex64::new((-0.5 * mean).exp(), 0.0);
    for k in 0..n {
        amp *= g / ((k + 1) as f64).sqrt();
    }
    amp
}

/// All amplitudes ⟨n|γ⟩ for `n = 0..=cutoff`.
pub fn coherent_fock_amplitudes(gamma: CoherentLabel, cutoff: usize) -> Vec<Complex64> {
    let g = gamma.0;
    let mean = g.norm_sqr();
    if mean > LOG_SPACE_THRESHOLD {
        return (0..=cutoff).map(|n| log_space_amplitude(g, n)).collect();
    }
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut amp = Complex64::new((-0.5 * mean).exp(), 0.0);
    out.push(amp);
    for k in 0..cutoff {
        amp *= g / ((k + 1) as f64).sqrt();
        out.push(amp);
    }
    out
}

fn log_space_amplitude(g: Complex64, n: usize) -> Complex64 {
    let mean = g.norm_sqr();
    let log_mag = -0.5 * mean + 0.5 * n as f64 * mean.ln() - 0.5 * ln_factorial(n as u64);
    Complex64::from_polar(log_mag.exp(), n as f64 * g.arg())
}

/// Overlap ⟨γ₁|γ₂⟩ = exp(-|γ₁|²/2 - |γ₂|²/2 + γ₁* γ₂).
pub fn coherent_overlap(g1: CoherentLabel, g2: CoherentLabel) -> Complex64 {
    let (a, b) = (g1.0, g2.0);
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp()
}

/// Quadrature wavefunction ⟨x_θ|γ⟩.
///
/// With `β = γ e^{-iθ}` this is
/// `(2π)^{-1/4} exp(-(x - 2Re β)²/4 + i Im β x - i Re β Im β)`, the phase
/// that matches the Fock expansion over real Hermite functions.
pub fn quadrature_wavefunction(gamma: CoherentLabel, theta: f64, x: f64) -> Complex64 {
    let b = gamma.0 * Complex64::from_polar(1.0, -theta);
    let d = x - 2.0 * b.re;
    let envelope = (2.0 * PI).powf(-0.25) * (-0.25 * d * d).exp();
    Complex64::from_polar(envelope, b.im * x - b.re * b.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn fock_amplitude_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(coherent_fock_amplitude(CoherentLabel::VACUUM, 0), one);
        assert_eq!(coherent_fock_amplitude(CoherentLabel::VACUUM, 3).norm(), 0.0);
        let a = coherent_fock_amplitude(CoherentLabel::new(1.0, 0.0), 1);
        assert!((a.re - (-0.5f64).exp()).abs() < 1e-15 && a.im == 0.0);
        assert!((a.re - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn fock_amplitude_squares_to_poisson_mass() {
        let g = CoherentLabel::from_polar(3.0, 0.7);
        let mu: f64 = 9.0;
        for n in [0usize, 1, 4, 9, 20, 40] {
            let p = coherent_fock_amplitude(g, n).norm_sqr();
            let poisson = (-mu + n as f64 * mu.ln() - ln_factorial(n as u64)).exp();
            assert!((p - poisson).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn log_space_branch_agrees_with_recurrence_near_threshold() {
        // Just below the threshold the recurrence is used; compare against the log form.
        let g = Complex64::from_polar(699.0f64.sqrt(), -1.3);
        for n in [650usize, 699, 750] {
            let rec = coherent_fock_amplitude(CoherentLabel(g), n);
            let log = log_space_amplitude(g, n);
            assert!((rec - log).norm() < 1e-10 * log.norm().max(1e-300), "n={n}");
        }
    }

    #[test]
    fn huge_amplitude_stays_finite() {
        let g = CoherentLabel::new(100.0, 0.0); // mean 10^4
        let a = coherent_fock_amplitudes(g, 10_000);
        let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!(a.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        // mean 10^4, cutoff at the mean captures about half the mass
        assert!(total > 0.45 && total < 0.56, "{total}");
        assert_eq!(a.len(), 10_001);
        assert!(close(a[10], coherent_fock_amplitude(g, 10), 1e-300));
    }

    #[test]
    fn batch_matches_single() {
        let g = CoherentLabel::new(1.3, -0.4);
        let batch = coherent_fock_amplitudes(g, 25);
        for (n, z) in batch.iter().enumerate() {
            assert!(close(*z, coherent_fock_amplitude(g, n), 1e-15));
        }
    }

    #[test]
    fn overlap_examples() {
        let g = CoherentLabel::new(0.3, 1.7);
        assert!(close(coherent_overlap(g, g), Complex64::new(1.0, 0.0), 1e-15));
        let v = coherent_overlap(CoherentLabel::VACUUM, g);
        assert!(close(v, Complex64::new((-0.5 * g.mean_photon_number()).exp(), 0.0), 1e-15));
        let o = coherent_overlap(CoherentLabel::new(1.0, 0.0), CoherentLabel::new(0.0, 1.0));
        assert!((o.norm_sqr() - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn vacuum_quadrature_density_at_origin() {
        for theta in [0.0, 0.4, 2.0] {
            let p = quadrature_wavefunction(CoherentLabel::VACUUM, theta, 0.0).norm_sqr();
            assert!((p - 0.398_942_280_401_432_7).abs() < 1e-15);
        }
    }

    fn moments(g: CoherentLabel, theta: f64) -> (f64, f64, f64) {
        let h = 0.005;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        let centre = QuadratureConvention::mean(g, theta);
        let n = (16.0 / h) as i64;
        for i in -n..=n {
            let x = centre + i as f64 * h;
            let w = if i.abs() == n { 0.5 * h } else { h };
            let p = quadrature_wavefunction(g, theta, x).norm_sqr() * w;
            m0 += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        let mean = m1 / m0;
        (m0, mean, m2 / m0 - mean * mean)
    }

    #[test]
    fn coherent_quadrature_mean_and_variance() {
        let (norm, mean, var) = moments(CoherentLabel::new(1.0, 0.0), 0.0);
        assert!((norm - 1.0).abs() < 1e-10);
        assert!((mean - 2.0).abs() < 1e-10);
        assert!((var - 1.0).abs() < 1e-10);

        let (_, mean, var) = moments(CoherentLabel::new(1.0, 1.0), std::f64::consts::FRAC_PI_2);
        assert!((mean - 2.0).abs() < 1e-10);
        assert!((var - 1.0).abs() < 1e-10);
    }

    /// Normalized Hermite functions for the unit-vacuum-variance convention,
    /// ⟨x|n⟩ = (2π)^{-1/4} 2^{-n/2} (n!)^{-1/2} H_n(x/√2) e^{-x²/4}.
    fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
        // Stable recurrence on the normalized functions.
        let mut out = Vec::with_capacity(count);
        let base = (2.0 * PI).powf(-0.25) * (-0.25 * x * x).exp();
        out.push(base);
        if count > 1 {
            out.push(x * base);
        }
        for n in 2..count {
            let nf = n as f64;
            let next = (x * out[n - 1] - (nf - 1.0).sqrt() * out[n - 2]) / nf.sqrt();
            out.push(next);
        }
        out
    }

    #[test]
    fn quadrature_wavefunction_matches_hermite_series() {
        // Oracle: Σ_n ⟨x|n⟩ ⟨n|γ⟩ e^{-inθ} with real Hermite functions.
        let g = CoherentLabel::new(1.0, 1.0);
        let theta = std::f64::consts::FRAC_PI_2;
        let amps = coherent_fock_amplitudes(g, 80);
        for x in [-2.0, -0.5, 0.0, 1.0, 2.0, 3.3, 5.0] {
            let h = hermite_functions(x, 81);
            let series: Complex64 = amps
                .iter()
                .enumerate()
                .map(|(n, a)| a * h[n] * Complex64::from_polar(1.0, -(n as f64) * theta))
                .sum();
            let direct = quadrature_wavefunction(g, theta, x);
            assert!(close(series, direct, 1e-12), "x={x}: {series} vs {direct}");
        }
    }

    proptest! {
        #[test]
        fn fock_mass_is_captured_by_cutoff_rule(re in -7.0f64..7.0, im in -7.0f64..7.0) {
            let g = CoherentLabel::new(re, im);
            let mu = g.mean_photon_number();
            prop_assume!(mu <= 50.0);
            let cutoff = (mu + 10.0 * mu.sqrt() + 20.0).ceil() as usize;
            let total: f64 = coherent_fock_amplitudes(g, cutoff).iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }

        #[test]
        fn overlap_modulus_is_gaussian_in_distance(
            a in 0.0f64..5.0, pa in 0.0f64..6.3, b in 0.0f64..5.0, pb in 0.0f64..6.3,
        ) {
            let g1 = CoherentLabel::from_polar(a, pa);
            let g2 = CoherentLabel::from_polar(b, pb);
            let lhs = coherent_overlap(g1, g2).norm_sqr();
            let rhs = (-(g1.0 - g2.0).norm_sqr()).exp();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn fock_inner_product_reproduces_overlap(
            a in 0.0f64..3.0, pa in 0.0f64..6.3, b in 0.0f64..3.0, pb in 0.0f64..6.3,
        ) {
            let g1 = CoherentLabel::from_polar(a, pa);
            let g2 = CoherentLabel::from_polar(b, pb);
            let a1 = coherent_fock_amplitudes(g1, 80);
            let a2 = coherent_fock_amplitudes(g2, 80);
            let inner: Complex64 = a1.iter().zip(&a2).map(|(x, y)| x.conj() * y).sum();
            prop_assert!((inner - coherent_overlap(g1, g2)).norm() < 1e-8);
        }

        #[test]
        fn quadrature_density_normalized(re in -2.0f64..2.0, im in -2.0f64..2.0, theta in 0.0f64..6.3) {
            let g = CoherentLabel::new(re, im);
            let centre = QuadratureConvention::mean(g, theta);
            let h = 0.01;
            let n = 800i64; // ±8 standard deviations
            let total: f64 = (-n..=n)
                .map(|i| {
                    let w = if i.abs() == n { 0.5 * h } else { h };
                    quadrature_wavefunction(g, theta, centre + i as f64 * h).norm_sqr() * w
                })
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-8);
        }
    }
}
