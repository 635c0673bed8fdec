//! Small special-function helpers used by the kernels.

/// ln(n!) exact-summed for small n, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Upper tail P(N > cutoff) of a Poisson distribution with the given mean.
pub fn poisson_upper_tail(cutoff: usize, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let mut n = cutoff as u64 + 1;
    let mut term = (-mean + n as f64 * mean.ln() - ln_factorial(n)).exp();
    let mut sum = 0.0;
    loop {
        sum += term;
        n += 1;
        term *= mean / n as f64;
        if (n as f64) > mean && term <= sum * 1e-17 {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    sum.min(1.0)
}

/// Modified Bessel function I₀ by its power series Σ (x/2)^{2k} / (k!)².
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}
