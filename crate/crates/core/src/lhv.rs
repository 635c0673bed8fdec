//! Deterministic hidden-variable assignments and their mixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};

/// Predetermined ±1 results for both settings of both parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HiddenAssignment {
    pub lambda_blue_a: i8,
    pub lambda_green_a: i8,
    pub lambda_blue_b: i8,
    pub lambda_green_b: i8,
}

impl HiddenAssignment {
    pub fn new(blue_a: i8, green_a: i8, blue_b: i8, green_b: i8) -> Result<Self> {
        if [blue_a, green_a, blue_b, green_b].iter().any(|v| v.abs() != 1) {
            return Err(Error::InvalidParameter("hidden variables take values +1 or -1".into()));
        }
        Ok(HiddenAssignment {
            lambda_blue_a: blue_a,
            lambda_green_a: green_a,
            lambda_blue_b: blue_b,
            lambda_green_b: green_b,
        })
    }

    /// All 16 assignments; bit i of the index set means −1 for variable i.
    pub fn all() -> [HiddenAssignment; 16] {
        std::array::from_fn(|i| {
            let v = |bit: usize| if i >> bit & 1 == 1 { -1 } else { 1 };
            HiddenAssignment {
                lambda_blue_a: v(3),
                lambda_green_a: v(2),
                lambda_blue_b: v(1),
                lambda_green_b: v(0),
            }
        })
    }
}

/// λ^A_b λ^B_b − λ^A_b λ^B_g + λ^A_g λ^B_b + λ^A_g λ^B_g.
pub fn chsh_of_assignment(a: &HiddenAssignment) -> i32 {
    let (ba, ga) = (i32::from(a.lambda_blue_a), i32::from(a.lambda_green_a));
    let (bb, gb) = (i32::from(a.lambda_blue_b), i32::from(a.lambda_green_b));
    ba * bb - ba * gb + ga * bb + ga * gb
}

/// CHSH combination of a probability mixture over [`HiddenAssignment::all`].
pub fn mixture_value(weights: &[f64; 16]) -> f64 {
    HiddenAssignment::all()
        .iter()
        .zip(weights)
        .map(|(a, w)| w * f64::from(chsh_of_assignment(a)))
        .sum()
}

/// Extremes of the CHSH combination over random mixtures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureBound {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Uniformly distributed point on the probability simplex for sample `index`.
///
/// Every sample draws from its own ChaCha stream, so the result does not
/// depend on evaluation order.
fn random_mixture(seed: u64, index: u64) -> [f64; 16] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut w: [f64; 16] = std::array::from_fn(|_| -(1.0 - rng.gen::<f64>()).ln());
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

/// Sample `samples` random mixtures; `None` when no samples are requested.
pub fn mixture_bound(samples: usize, seed: u64, exec: Execution) -> Option<MixtureBound> {
    if samples == 0 {
        return None;
    }
    let values = map_indexed(exec, samples, |i| mixture_value(&random_mixture(seed, i as u64)));
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(MixtureBound { min, max, samples, seed })
}

/// The 16-row assignment table.
pub fn write_assignment_csv<W: Write>(mut out: W) -> io::Result<()> {
    writeln!(out, "lambda_blue_a,lambda_green_a,lambda_blue_b,lambda_green_b,chsh")?;
    for a in HiddenAssignment::all() {
        writeln!(
            out,
            "{},{},{},{},{}",
            a.lambda_blue_a,
            a.lambda_green_a,
            a.lambda_blue_b,
            a.lambda_green_b,
            chsh_of_assignment(&a)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_examples() {
        assert_eq!(chsh_of_assignment(&HiddenAssignment::new(1, 1, 1, 1).unwrap()), 2);
        assert_eq!(chsh_of_assignment(&HiddenAssignment::new(1, 1, -1, -1).unwrap()), -2);
        assert!(HiddenAssignment::new(1, 0, 1, 1).is_err());
    }

    #[test]
    fn all_sixteen_take_only_extreme_values() {
        let all = HiddenAssignment::all();
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 16);
        let values: Vec<i32> = all.iter().map(chsh_of_assignment).collect();
        assert!(values.iter().all(|v| *v == 2 || *v == -2));
        assert_eq!(values.iter().max(), Some(&2));
        assert_eq!(values.iter().min(), Some(&-2));
    }

    #[test]
    fn point_and_uniform_mixtures() {
        let mut point = [0.0; 16];
        point[0] = 1.0; // index 0 is all +1
        assert_eq!(mixture_value(&point), 2.0);
        assert_eq!(mixture_value(&[1.0 / 16.0; 16]), 0.0);
    }

    #[test]
    fn random_mixtures_stay_in_bound_and_are_reproducible() {
        let a = mixture_bound(100_000, 7, Execution::Parallel).unwrap();
        assert!(a.max <= 2.0 + 1e-12 && a.min >= -2.0 - 1e-12);
        let b = mixture_bound(100_000, 7, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(mixture_bound(0, 7, Execution::Parallel).is_none());
    }

    #[test]
    fn random_mixture_is_on_simplex() {
        let w = random_mixture(3, 11);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w.iter().all(|x| *x >= 0.0));
        assert_ne!(random_mixture(3, 11), random_mixture(3, 12));
    }

    #[test]
    fn table_csv() {
        let mut buf = Vec::new();
        write_assignment_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert_eq!(text.lines().nth(1), Some("1,1,1,1,2"));
    }
}
