//! Independent oracles shared by the integration tests.
//!
//! None of these go through the coherent-branch kernels: they build states
//! directly in the Fock basis, convolve Poisson laws, or expand in Hermite
//! functions.
#![allow(dead_code)]

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

fn ln_fact(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn binom(n: usize, k: usize) -> f64 {
    (ln_fact(n) - ln_fact(k) - ln_fact(n - k)).exp()
}

/// e^{-|γ|²/2} γⁿ / √(n!) by direct evaluation.
pub fn fock(gamma: Complex64, n: usize) -> Complex64 {
    let mag = if gamma.norm() == 0.0 {
        if n == 0 { 1.0 } else { 0.0 }
    } else {
        (-0.5 * gamma.norm_sqr() + n as f64 * gamma.norm().ln() - 0.5 * ln_fact(n)).exp()
    };
    Complex64::from_polar(mag, n as f64 * gamma.arg())
}

pub fn poisson(k: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-mu + k as f64 * mu.ln() - ln_fact(k)).exp()
}

/// Distribution of the difference of two independent Poisson counts.
pub fn skellam(m: i64, mu1: f64, mu2: f64) -> f64 {
    (0..200usize)
        .map(|k| {
            let j = k as i64 + m;
            if j < 0 { 0.0 } else { poisson(j as usize, mu1) * poisson(k, mu2) }
        })
        .sum()
}

/// Output amplitudes of a two-port network for input Fock state |p, q⟩,
/// obtained by expanding (a₁†)^p (a₂†)^q in the output creation operators.
///
/// `a₁† = x₁ c₊† + y₁ c₋†`, `a₂† = x₂ c₊† + y₂ c₋†`.
fn fock_transfer(p: usize, q: usize, x1: Complex64, y1: Complex64, x2: Complex64, y2: Complex64) -> Vec<(usize, usize, Complex64)> {
    let norm = (ln_fact(p) + ln_fact(q)).exp().sqrt();
    let mut out = BTreeMap::<(usize, usize), Complex64>::new();
    for s in 0..=p {
        for t in 0..=q {
            let coeff = x1.powu(s as u32) * y1.powu((p - s) as u32) * x2.powu(t as u32) * y2.powu((q - t) as u32)
                * binom(p, s)
                * binom(q, t);
            let (j, l) = (s + t, p + q - s - t);
            let creation_norm = (ln_fact(j) + ln_fact(l)).exp().sqrt();
            *out.entry((j, l)).or_default() += coeff * creation_norm / norm;
        }
    }
    out.into_iter().map(|((j, l), a)| (j, l, a)).collect()
}

/// Creation-operator coefficients for the polariser at `angle`:
/// `a₁† = (i e^{-iθ/2} c₊† - e^{-iθ/2} c₋†)/√2`, `a₂† = (i e^{iθ/2} c₊† + e^{iθ/2} c₋†)/√2`.
fn network_coefficients(angle: f64) -> (Complex64, Complex64, Complex64, Complex64) {
    let em = Complex64::from_polar(FRAC_1_SQRT_2, -angle / 2.0);
    let ep = Complex64::from_polar(FRAC_1_SQRT_2, angle / 2.0);
    (Complex64::i() * em, -em, Complex64::i() * ep, ep)
}

/// One party's map from the state-mode Fock index p to output amplitudes
/// `(n₊, n₋)`, with the drive mode already in |drive⟩.
fn party_map(angle: f64, drive: f64, cutoff: usize) -> Vec<BTreeMap<(usize, usize), Complex64>> {
    let (x1, y1, x2, y2) = network_coefficients(angle);
    (0..=cutoff)
        .map(|p| {
            let mut acc = BTreeMap::new();
            for q in 0..=cutoff {
                let c = fock(Complex64::new(drive, 0.0), q);
                for (j, l, a) in fock_transfer(p, q, x1, y1, x2, y2) {
                    *acc.entry((j, l)).or_insert(Complex64::new(0.0, 0.0)) += c * a;
                }
            }
            acc
        })
        .collect()
}

/// P(m,n) from the full four-mode state vector: the circular state is
/// built in the Fock basis of the two state modes by the same phase
/// quadrature and normalized as a vector, then both networks are applied
/// as Fock-space transfers and the number differences read off.
pub fn dense_pmn(r0: f64, alpha: f64, beta: f64, theta: f64, phi: f64, nodes: usize, cutoff: usize) -> BTreeMap<(i64, i64), f64> {
    let mut psi = vec![vec![Complex64::new(0.0, 0.0); cutoff + 1]; cutoff + 1];
    for k in 0..nodes {
        let s = TAU * k as f64 / nodes as f64;
        let a = Complex64::from_polar(r0, s);
        let b = Complex64::from_polar(r0, -s);
        for (p, row) in psi.iter_mut().enumerate() {
            for (q, z) in row.iter_mut().enumerate() {
                *z += fock(a, p) * fock(b, q);
            }
        }
    }
    let norm: f64 = psi.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in psi.iter_mut().flatten() {
        *z /= norm;
    }

    let map_a = party_map(theta, alpha, cutoff);
    let map_b = party_map(phi, beta, cutoff);
    let mut out_amp = BTreeMap::<(usize, usize, usize, usize), Complex64>::new();
    for (p, row) in psi.iter().enumerate() {
        for (q, &c) in row.iter().enumerate() {
            if c.norm() < 1e-300 {
                continue;
            }
            for (&(j, l), &u) in &map_a[p] {
                for (&(j2, l2), &v) in &map_b[q] {
                    *out_amp.entry((j, l, j2, l2)).or_insert(Complex64::new(0.0, 0.0)) += c * u * v;
                }
            }
        }
    }
    let mut pmn = BTreeMap::new();
    for ((j, l, j2, l2), a) in out_amp {
        *pmn.entry((j as i64 - l as i64, j2 as i64 - l2 as i64)).or_insert(0.0) += a.norm_sqr();
    }
    pmn
}

/// Normalized Hermite functions ⟨x|n⟩ for unit vacuum variance.
pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![(2.0 * PI).powf(-0.25) * (-0.25 * x * x).exp()];
    if count > 1 {
        out.push(x * out[0]);
    }
    for n in 2..count {
        let nf = n as f64;
        out.push((x * out[n - 1] - (nf - 1.0).sqrt() * out[n - 2]) / nf.sqrt());
    }
    out.truncate(count);
    out
}

/// Quadrature density of one mode of the circular state. Integrating the
/// phase picks out the diagonal Σ_p c_p |p,p⟩ with c_p ∝ r₀^{2p}/p!, so the
/// reduced state is diagonal in the Fock basis.
pub fn reduced_quadrature_density(r0: f64, x: f64) -> f64 {
    let terms = 60;
    let weights: Vec<f64> = (0..terms)
        .map(|p| (4.0 * p as f64 * r0.ln() - 2.0 * ln_fact(p)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let h = hermite_functions(x, terms);
    weights.iter().zip(&h).map(|(w, v)| w * v * v).sum::<f64>() / total
}

/// P(X > 0, Y > 0) for a standard bivariate normal with correlation ρ.
pub fn orthant_probability(rho: f64) -> f64 {
    0.25 + rho.asin() / TAU
}
