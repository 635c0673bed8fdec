//! The circular coherent-state superposition and the linear-optics network
//! that turns each of its branches into four measured coherent modes.
//!
//! The state is `N ∫₀^{2π} |r₀e^{iς}⟩ |r₀e^{-iς}⟩ dς`, discretized with the
//! uniform trapezoid rule on the periodic phase domain.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use crate::error::{Error, Result};
use crate::quantum::CoherentLabel;
use crate::special::bessel_i0;

/// Relative change in the norm allowed when the node count is doubled.
pub const NORM_CONVERGENCE_TOL: f64 = 1e-8;

/// Radius used throughout the headline results.
pub const DEFAULT_R0: f64 = 1.1;
/// Default number of phase nodes.
pub const DEFAULT_NODES: usize = 64;
const MIN_NODES: usize = 16;

/// One coherent branch `weight · |a⟩|b⟩` of a two-mode state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch {
    /// Amplitude of the input mode feeding party A.
    pub a: Complex64,
    /// Amplitude of the input mode feeding party B.
    pub b: Complex64,
    pub weight: Complex64,
}

/// A two-mode state written as a finite sum of product coherent states.
///
/// Downstream modules only see the branches, so any entangled state of this
/// form can be measured by the same pipeline.
pub trait BranchState: Sync {
    /// Branches whose weights already include the state normalization.
    fn branches(&self) -> Result<Vec<Branch>>;

    /// The same state at twice the discretization resolution.
    fn refined(&self) -> Self
    where
        Self: Sized;

    /// Number of branches in the current discretization.
    fn node_count(&self) -> usize;

    /// Text identifying the state and its discretization.
    fn fingerprint(&self) -> String;
}

/// Discretized circular cat state.
#[derive(Clone, Debug, PartialEq)]
pub struct CatStateSpec {
    r0: f64,
    node_angles: Vec<f64>,
    node_weights: Vec<f64>,
}

impl CatStateSpec {
    /// Uniform trapezoid discretization with `nodes` phase points.
    pub fn new(r0: f64, nodes: usize) -> Result<Self> {
        if !r0.is_finite() || r0 < 0.0 {
            return Err(Error::InvalidParameter(format!("r0 must be finite and >= 0, got {r0}")));
        }
        if nodes < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_NODES} phase nodes, got {nodes}"
            )));
        }
        let step = TAU / nodes as f64;
        Ok(CatStateSpec {
            r0,
            node_angles: (0..nodes).map(|k| k as f64 * step).collect(),
            node_weights: vec![step; nodes],
        })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn nodes(&self) -> usize {
        self.node_angles.len()
    }

    pub fn node_angles(&self) -> &[f64] {
        &self.node_angles
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// Σ_{k,l} w_k w_l ⟨r₀e^{iς_l}|r₀e^{iς_k}⟩⟨r₀e^{-iς_l}|r₀e^{-iς_k}⟩ at this resolution.
    fn overlap_double_sum(&self) -> f64 {
        // The product of the two overlaps is exp(2r₀²(cos(ς_k - ς_l) - 1)), real.
        let two_r2 = 2.0 * self.r0 * self.r0;
        let mut total = 0.0;
        for (sk, wk) in self.node_angles.iter().zip(&self.node_weights) {
            let mut row = 0.0;
            for (sl, wl) in self.node_angles.iter().zip(&self.node_weights) {
                row += wl * (two_r2 * ((sk - sl).cos() - 1.0)).exp();
            }
            total += wk * row;
        }
        total
    }

    /// Squared normalization N², from the numeric double phase integral of
    /// the overlap kernel.
    pub fn norm_constant(&self) -> Result<f64> {
        let coarse = 1.0 / self.overlap_double_sum();
        let fine = 1.0 / self.refined().overlap_double_sum();
        let change = ((fine - coarse) / coarse).abs();
        if change > NORM_CONVERGENCE_TOL {
            return Err(Error::NonConvergence {
                quantity: "state norm",
                nodes: 2 * self.nodes(),
                change,
                limit: NORM_CONVERGENCE_TOL,
            });
        }
        Ok(coarse)
    }
}

/// N² = e^{2r₀²} / (4π² I₀(2r₀²)).
pub fn norm_constant_closed_form(r0: f64) -> f64 {
    let x = 2.0 * r0 * r0;
    // e^{x}/I₀(x) overflows for very large x, keep it as a ratio of scaled terms.
    1.0 / (4.0 * PI * PI * bessel_i0(x) * (-x).exp())
}

impl BranchState for CatStateSpec {
    fn branches(&self) -> Result<Vec<Branch>> {
        let n = self.norm_constant()?.sqrt();
        Ok(self
            .node_angles
            .iter()
            .zip(&self.node_weights)
            .map(|(&s, &w)| Branch {
                a: Complex64::from_polar(self.r0, s),
                b: Complex64::from_polar(self.r0, -s),
                weight: Complex64::new(n * w, 0.0),
            })
            .collect())
    }

    fn refined(&self) -> Self {
        CatStateSpec::new(self.r0, 2 * self.nodes()).expect("doubling keeps a valid spec")
    }

    fn node_count(&self) -> usize {
        self.nodes()
    }

    fn fingerprint(&self) -> String {
        format!("circular-cat r0={:e} nodes={}", self.r0, self.nodes())
    }
}

/// The half of the network in front of one party: a real coherent drive
/// mixed with the state mode, then a polariser at half the measurement angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartyNetwork {
    pub drive: f64,
    pub angle: f64,
}

impl PartyNetwork {
    /// Output labels `(c₊, c₋)` when the state mode carries amplitude `input`.
    ///
    /// `c₊ = i(u e^{-iθ/2} + α e^{iθ/2})/√2`, `c₋ = (-u e^{-iθ/2} + α e^{iθ/2})/√2`.
    pub fn output_labels(&self, input: Complex64) -> (CoherentLabel, CoherentLabel) {
        let u = input * Complex64::from_polar(1.0, -0.5 * self.angle);
        let v = Complex64::from_polar(self.drive, 0.5 * self.angle);
        let plus = Complex64::i() * (u + v) * FRAC_1_SQRT_2;
        let minus = (v - u) * FRAC_1_SQRT_2;
        (CoherentLabel(plus), CoherentLabel(minus))
    }
}

/// Drive amplitudes and measurement angles for both parties.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkConfig {
    alpha: f64,
    beta: f64,
    theta: f64,
    phi: f64,
}

impl NetworkConfig {
    /// Angles are reduced into `[0, 2π)`.
    pub fn new(alpha: f64, beta: f64, theta: f64, phi: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("theta", theta), ("phi", phi)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(NetworkConfig {
            alpha,
            beta,
            theta: theta.rem_euclid(TAU),
            phi: phi.rem_euclid(TAU),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn party_a(&self) -> PartyNetwork {
        PartyNetwork { drive: self.alpha, angle: self.theta }
    }

    pub fn party_b(&self) -> PartyNetwork {
        PartyNetwork { drive: self.beta, angle: self.phi }
    }
}

/// The four measured-mode amplitudes produced by one branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchLabels {
    pub c_plus: CoherentLabel,
    pub c_minus: CoherentLabel,
    pub d_plus: CoherentLabel,
    pub d_minus: CoherentLabel,
}

impl BranchLabels {
    pub fn for_branch(branch: &Branch, net: &NetworkConfig) -> Self {
        let (c_plus, c_minus) = net.party_a().output_labels(branch.a);
        let (d_plus, d_minus) = net.party_b().output_labels(branch.b);
        BranchLabels { c_plus, c_minus, d_plus, d_minus }
    }
}

/// Measured-mode labels of the cat-state branch at phase `varsigma`.
pub fn branch_labels(varsigma: f64, spec: &CatStateSpec, net: &NetworkConfig) -> BranchLabels {
    let branch = Branch {
        a: Complex64::from_polar(spec.r0(), varsigma),
        b: Complex64::from_polar(spec.r0(), -varsigma),
        weight: Complex64::new(1.0, 0.0),
    };
    BranchLabels::for_branch(&branch, net)
}
