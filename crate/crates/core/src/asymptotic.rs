//! The α, β → ∞ limit, where the scaled number difference m/α becomes the
//! quadrature X_θ of the state mode.
//!
//! Integrals over the grid use the piecewise-linear interpolant of the
//! sampled density, so region boundaries (the dead zone, the cells of the
//! rescaled photon-number lattice) need not fall on grid nodes.

use num_complex::Complex64;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::joint::{
    complex_dot, AmplitudeMode, DistributionConfig, FockCutoff, JointNumberDistribution,
};
use crate::measurement::{BinThreshold, BinnedStatistics, ChshResult, Outcome, SettingAngles};
use crate::quantum::{quadrature_wavefunction, CoherentLabel};
use crate::state::BranchState;

/// Sup-norm change allowed when the node count is doubled.
pub const DENSITY_CONVERGENCE_TOL: f64 = 1e-8;

/// Uniform grid `min, min + step, …, max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid { min: -8.0, max: 8.0, step: 0.02 }
    }
}

impl QuadratureGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min < max && step > 0.0 && step.is_finite() && min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad grid [{min}, {max}] step {step}")));
        }
        let grid = QuadratureGrid { min, max, step };
        let span = (grid.len() - 1) as f64 * step;
        if (span - (max - min)).abs() > 1e-9 * (max - min) {
            return Err(Error::InvalidParameter(format!(
                "step {step} does not divide [{min}, {max}]"
            )));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// min(|min|, |max|).
    pub fn half_width(&self) -> f64 {
        self.min.abs().min(self.max.abs())
    }

    /// Trapezoid weights over the whole grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        self.interval_weights(self.min, self.max)
    }

    /// Weights `w` such that `Σ wᵢ f(xᵢ)` is the integral over `[a, b]` of
    /// the piecewise-linear interpolant of `f`. Parts of `[a, b]` outside
    /// the grid contribute nothing.
    pub fn interval_weights(&self, a: f64, b: f64) -> Vec<f64> {
        let n = self.len();
        let mut w = vec![0.0; n];
        let (a, b) = (a.max(self.min), b.min(self.max));
        if b <= a {
            return w;
        }
        let h = self.step;
        let first = (((a - self.min) / h).floor() as usize).min(n - 2);
        let last = (((b - self.min) / h).ceil() as usize).min(n - 1);
        for i in first..last {
            let x0 = self.point(i);
            let lo = a.max(x0);
            let hi = b.min(x0 + h);
            if hi <= lo {
                continue;
            }
            let right = ((hi - x0).powi(2) - (lo - x0).powi(2)) / (2.0 * h);
            w[i] += (hi - lo) - right;
            w[i + 1] += right;
        }
        w
    }

    /// Outcome-region weights `[minus, zero, plus]` for a dead zone of half-width `delta0`.
    fn outcome_weights(&self, delta0: f64) -> [Vec<f64>; 3] {
        [
            self.interval_weights(f64::NEG_INFINITY, -delta0),
            self.interval_weights(-delta0, delta0),
            self.interval_weights(delta0, f64::INFINITY),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DensityOptions {
    pub check_convergence: bool,
    pub execution: Execution,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { check_convergence: true, execution: Execution::default() }
    }
}

/// Joint density P_a(x, y) of the two quadratures, sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureDensity {
    pub grid_x: QuadratureGrid,
    pub grid_y: QuadratureGrid,
    /// Row-major, `values[i * ny + j] = P_a(x_i, y_j)`.
    pub values: Vec<f64>,
    pub theta: f64,
    pub phi: f64,
}

impl QuadratureDensity {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid_y.len() + j]
    }

    /// Trapezoid integral over the grid.
    pub fn total(&self) -> f64 {
        self.marginal_y().iter().zip(&self.grid_y.trapezoid_weights()).map(|(p, w)| p * w).sum()
    }

    /// Density of x, integrating out y.
    pub fn marginal_x(&self) -> Vec<f64> {
        let wy = self.grid_y.trapezoid_weights();
        let ny = wy.len();
        self.values.chunks(ny).map(|row| row.iter().zip(&wy).map(|(p, w)| p * w).sum()).collect()
    }

    /// Density of y, integrating out x.
    pub fn marginal_y(&self) -> Vec<f64> {
        let wx = self.grid_x.trapezoid_weights();
        let ny = self.grid_y.len();
        let mut out = vec![0.0; ny];
        for (row, w) in self.values.chunks(ny).zip(&wx) {
            for (o, p) in out.iter_mut().zip(row) {
                *o += w * p;
            }
        }
        out
    }

    /// `Σ_ij wx[i] P_ij wy[j]`.
    fn weighted_sum(&self, wx: &[f64], wy: &[f64]) -> f64 {
        self.values
            .chunks(wy.len())
            .zip(wx)
            .filter(|(_, w)| **w != 0.0)
            .map(|(row, w)| w * row.iter().zip(wy).map(|(p, v)| p * v).sum::<f64>())
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,p")?;
        let ny = self.grid_y.len();
        for (idx, p) in self.values.iter().enumerate() {
            let (x, y) = (self.grid_x.point(idx / ny), self.grid_y.point(idx % ny));
            writeln!(out, "{x:.6},{y:.6},{p:.17e}")?;
        }
        Ok(())
    }

    pub fn write_marginal_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,p")?;
        for (i, p) in self.marginal_x().iter().enumerate() {
            writeln!(out, "{:.6},{p:.17e}", self.grid_x.point(i))?;
        }
        Ok(())
    }
}

/// Quadrature amplitudes for every branch, stored per grid point as K-long
/// real/imaginary rows.
struct BranchWaves {
    nodes: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl BranchWaves {
    fn build(amplitudes: &[(Complex64, Complex64)], angle: f64, grid: &QuadratureGrid) -> Self {
        let nodes = amplitudes.len();
        let mut re = Vec::with_capacity(nodes * grid.len());
        let mut im = Vec::with_capacity(nodes * grid.len());
        for x in grid.points() {
            for (gamma, weight) in amplitudes {
                let z = weight * quadrature_wavefunction(CoherentLabel(*gamma), angle, x);
                re.push(z.re);
                im.push(z.im);
            }
        }
        BranchWaves { nodes, re, im }
    }

    fn row(&self, i: usize) -> (&[f64], &[f64]) {
        let r = i * self.nodes..(i + 1) * self.nodes;
        (&self.re[r.clone()], &self.im[r])
    }
}

/// P_a(x,y) = |Σ_k w_k ψ(x | a_k, θ) ψ(y | b_k, φ)|².
pub fn quadrature_joint_density<S: BranchState>(
    state: &S,
    theta: f64,
    phi: f64,
    grid: &QuadratureGrid,
    opts: &DensityOptions,
) -> Result<QuadratureDensity> {
    let density = density_unchecked(state, theta, phi, grid, opts.execution)?;
    if opts.check_convergence {
        let refined = density_unchecked(&state.refined(), theta, phi, grid, opts.execution)?;
        let change = density
            .values
            .iter()
            .zip(&refined.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change > DENSITY_CONVERGENCE_TOL {
            return Err(Error::NonConvergence {
                quantity: "quadrature density",
                nodes: 2 * state.node_count(),
                change,
                limit: DENSITY_CONVERGENCE_TOL,
            });
        }
    }
    Ok(density)
}

fn density_unchecked<S: BranchState>(
    state: &S,
    theta: f64,
    phi: f64,
    grid: &QuadratureGrid,
    exec: Execution,
) -> Result<QuadratureDensity> {
    let branches = state.branches()?;
    let side_a: Vec<_> = branches.iter().map(|b| (b.a, b.weight)).collect();
    let side_b: Vec<_> = branches.iter().map(|b| (b.b, Complex64::new(1.0, 0.0))).collect();
    let waves_a = BranchWaves::build(&side_a, theta, grid);
    let waves_b = BranchWaves::build(&side_b, phi, grid);
    let n = grid.len();
    let rows = map_indexed(exec, n, |i| {
        let (ar, ai) = waves_a.row(i);
        (0..n)
            .map(|j| {
                let (br, bi) = waves_b.row(j);
                let (re, im) = complex_dot(ar, ai, br, bi);
                re * re + im * im
            })
            .collect::<Vec<f64>>()
    });
    Ok(QuadratureDensity { grid_x: *grid, grid_y: *grid, values: rows.concat(), theta, phi })
}

/// Half-width δ₀ of the quadrature interval binned as outcome 0, and the
/// zero-outcome probability it was solved for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeadZone {
    pub delta0: f64,
    pub epsilon: f64,
}

impl DeadZone {
    pub const NONE: DeadZone = DeadZone { delta0: 0.0, epsilon: 0.0 };
}

/// Probability that |x| < δ under the x-marginal.
pub fn central_probability(density: &QuadratureDensity, delta: f64) -> f64 {
    let mx = density.marginal_x();
    density
        .grid_x
        .interval_weights(-delta, delta)
        .iter()
        .zip(&mx)
        .map(|(w, p)| w * p)
        .sum()
}

/// Largest grid multiple δ₀ with P(|x| < δ₀) ≤ ε.
pub fn solve_delta0(density: &QuadratureDensity, epsilon: f64) -> Result<DeadZone> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    let grid = density.grid_x;
    let steps = (grid.half_width() / grid.step + 1e-9).floor() as usize;
    if epsilon >= 1.0 {
        return Ok(DeadZone { delta0: steps as f64 * grid.step, epsilon });
    }
    let mx = density.marginal_x();
    let mut best = 0.0;
    for s in 1..=steps {
        let delta = s as f64 * grid.step;
        let p: f64 = grid.interval_weights(-delta, delta).iter().zip(&mx).map(|(w, p)| w * p).sum();
        if p > epsilon {
            break;
        }
        best = delta;
    }
    Ok(DeadZone { delta0: best, epsilon })
}

/// Smallest drive for which the photon threshold N₀ sits inside the dead zone: N₀/δ₀.
pub fn required_alpha(n0: BinThreshold, dead_zone: &DeadZone) -> Result<f64> {
    if n0.0 == 0 {
        return Ok(0.0);
    }
    if dead_zone.delta0 <= 0.0 {
        return Err(Error::DegenerateDeadZone { n0: n0.0 });
    }
    Ok(f64::from(n0.0) / dead_zone.delta0)
}

/// Bin both quadratures by sign with dead zones of half-width `delta_a`, `delta_b`.
pub fn bin_density(density: &QuadratureDensity, delta_a: f64, delta_b: f64) -> BinnedStatistics {
    let wa = density.grid_x.outcome_weights(delta_a);
    let wb = density.grid_y.outcome_weights(delta_b);
    let mut table = [[0.0; 3]; 3];
    for a in Outcome::ALL {
        for b in Outcome::ALL {
            table[a.index()][b.index()] = density.weighted_sum(&wa[a.index()], &wb[b.index()]);
        }
    }
    BinnedStatistics::from_table(table)
}

/// Densities for the four settings, in `bb, bg, gb, gg` order.
pub fn setting_densities<S: BranchState>(
    state: &S,
    angles: &SettingAngles,
    grid: &QuadratureGrid,
    opts: &DensityOptions,
) -> Result<[QuadratureDensity; 4]> {
    let [s0, s1, s2, s3] = angles.settings();
    Ok([
        quadrature_joint_density(state, s0.0, s0.1, grid, opts)?,
        quadrature_joint_density(state, s1.0, s1.1, grid, opts)?,
        quadrature_joint_density(state, s2.0, s2.1, grid, opts)?,
        quadrature_joint_density(state, s3.0, s3.1, grid, opts)?,
    ])
}

/// Bin four setting densities with the same dead zone for both parties.
pub fn chsh_from_densities(
    densities: &[QuadratureDensity; 4],
    dead_zone: &DeadZone,
) -> (ChshResult, [BinnedStatistics; 4]) {
    let stats = [0, 1, 2, 3].map(|i| bin_density(&densities[i], dead_zone.delta0, dead_zone.delta0));
    (ChshResult::from_binned(&stats), stats)
}

/// Limiting CHSH value: sign binning of the quadratures with dead zone δ₀.
pub fn asymptotic_chsh<S: BranchState>(
    state: &S,
    angles: &SettingAngles,
    dead_zone: &DeadZone,
    grid: &QuadratureGrid,
    opts: &DensityOptions,
) -> Result<ChshResult> {
    let densities = setting_densities(state, angles, grid, opts)?;
    Ok(chsh_from_densities(&densities, dead_zone).0)
}

/// Sparse weights of the x-interval `[(m-½)/scale, (m+½)/scale)` for every
/// lattice index `|m| <= range`.
fn cell_weights(grid: &QuadratureGrid, scale: f64, range: usize) -> Vec<(usize, Vec<f64>)> {
    (-(range as i64)..=range as i64)
        .map(|m| {
            let w = grid.interval_weights((m as f64 - 0.5) / scale, (m as f64 + 0.5) / scale);
            match w.iter().position(|v| *v != 0.0) {
                Some(start) => {
                    let end = w.iter().rposition(|v| *v != 0.0).unwrap_or(start) + 1;
                    (start, w[start..end].to_vec())
                }
                None => (0, Vec::new()),
            }
        })
        .collect()
}

/// Integrate the density over every lattice cell; row-major in `(m, n)`.
fn cell_masses(density: &QuadratureDensity, alpha: f64, beta: f64, range_a: usize, range_b: usize) -> Vec<f64> {
    let cx = cell_weights(&density.grid_x, alpha, range_a);
    let cy = cell_weights(&density.grid_y, beta, range_b);
    let ny = density.grid_y.len();
    let mut out = Vec::with_capacity(cx.len() * cy.len());
    for (sx, wx) in &cx {
        // Reduce the rows of this x-cell first.
        let mut reduced = vec![0.0; ny];
        for (off, w) in wx.iter().enumerate() {
            let row = &density.values[(sx + off) * ny..(sx + off + 1) * ny];
            for (r, p) in reduced.iter_mut().zip(row) {
                *r += w * p;
            }
        }
        for (sy, wy) in &cy {
            out.push(wy.iter().enumerate().map(|(off, w)| w * reduced[sy + off]).sum());
        }
    }
    out
}

fn check_drives(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rescaling needs positive drives, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

/// Total-variation distance between P(m,n) and the density integrated over
/// the cells `x ∈ [(m-½)/α, (m+½)/α)`, `y ∈ [(n-½)/β, (n+½)/β)`.
pub fn convergence_to_asymptote(finite: &JointNumberDistribution, density: &QuadratureDensity) -> Result<f64> {
    let (alpha, beta) = (finite.config().alpha, finite.config().beta);
    check_drives(alpha, beta)?;
    let (ra, rb) = (finite.range_a(), finite.range_b());
    let masses = cell_masses(density, alpha, beta, ra, rb);
    let mut diff = 0.0;
    let mut covered = 0.0;
    for ((_, _, p), q) in finite.iter().zip(&masses) {
        diff += (p - q).abs();
        covered += q;
    }
    // Density mass outside the finite lattice counts as pure mismatch.
    let uncovered = (density.total() - covered).max(0.0);
    Ok(0.5 * (diff + uncovered))
}

/// Discretize a density onto the photon-number lattice of drives `(alpha, beta)`.
pub fn discretize_density(density: &QuadratureDensity, alpha: f64, beta: f64) -> Result<JointNumberDistribution> {
    check_drives(alpha, beta)?;
    let reach = |g: &QuadratureGrid, s: f64| (g.min.abs().max(g.max.abs()) * s + 0.5).ceil() as usize;
    let (ra, rb) = (reach(&density.grid_x, alpha), reach(&density.grid_y, beta));
    let values = cell_masses(density, alpha, beta, ra, rb);
    let config = DistributionConfig {
        state: "discretized quadrature density".into(),
        alpha,
        beta,
        theta: density.theta,
        phi: density.phi,
        cutoff: FockCutoff::fixed(ra.max(rb)),
        mode: AmplitudeMode::Coherent,
    };
    JointNumberDistribution::from_table(ra, rb, values, 0.0, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::CatStateSpec;

    fn small_grid() -> QuadratureGrid {
        QuadratureGrid::new(-8.0, 8.0, 0.05).unwrap()
    }

    #[test]
    fn interval_weights_integrate_linear_functions_exactly() {
        let g = QuadratureGrid::new(-1.0, 1.0, 0.1).unwrap();
        let xs = g.points();
        for (a, b) in [(-0.33, 0.71), (-2.0, 0.05), (0.0, 0.0), (0.4, 5.0)] {
            let w = g.interval_weights(a, b);
            let got: f64 = w.iter().zip(&xs).map(|(w, x)| w * (2.0 * x + 1.0)).sum();
            let (lo, hi) = (a.max(-1.0), b.min(1.0));
            let want = if hi > lo { (hi * hi + hi) - (lo * lo + lo) } else { 0.0 };
            assert!((got - want).abs() < 1e-12, "[{a}, {b}]: {got} vs {want}");
        }
    }

    #[test]
    fn grid_validation() {
        assert!(QuadratureGrid::new(1.0, -1.0, 0.1).is_err());
        assert!(QuadratureGrid::new(-1.0, 1.0, 0.3).is_err());
        assert_eq!(QuadratureGrid::default().len(), 801);
    }

    #[test]
    fn vacuum_density_is_standard_bivariate_normal() {
        let spec = CatStateSpec::new(0.0, 16).unwrap();
        let d = quadrature_joint_density(&spec, 0.3, 1.0, &small_grid(), &DensityOptions::default()).unwrap();
        let g = d.grid_x;
        for (i, j) in [(160, 160), (100, 200), (10, 300)] {
            let (x, y) = (g.point(i), g.point(j));
            let want = (-(x * x + y * y) / 2.0).exp() / (2.0 * std::f64::consts::PI);
            assert!((d.at(i, j) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn dead_zone_edge_cases() {
        let spec = CatStateSpec::new(1.1, 64).unwrap();
        let grid = QuadratureGrid::default();
        let d = quadrature_joint_density(&spec, 0.0, 0.0, &grid, &DensityOptions::default()).unwrap();
        assert_eq!(solve_delta0(&d, 0.0).unwrap().delta0, 0.0);
        assert!(solve_delta0(&d, 1.0).unwrap().delta0 >= 8.0 - 1e-12);
        assert!(solve_delta0(&d, 1.5).is_err());
        let dz = solve_delta0(&d, 0.01).unwrap();
        assert!(dz.delta0 > 0.0);
        assert!(central_probability(&d, dz.delta0) <= 0.01);
        assert!(central_probability(&d, dz.delta0 + d.grid_x.step) > 0.01);
    }

    #[test]
    fn required_alpha_arithmetic() {
        let dz = |d| DeadZone { delta0: d, epsilon: 0.01 };
        assert!((required_alpha(BinThreshold(10), &dz(0.1)).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(required_alpha(BinThreshold(0), &dz(0.0)).unwrap(), 0.0);
        assert!((required_alpha(BinThreshold(5), &dz(0.05)).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(
            required_alpha(BinThreshold(3), &DeadZone::NONE).unwrap_err(),
            Error::DegenerateDeadZone { n0: 3 }
        );
    }

    #[test]
    fn huge_dead_zone_dilutes_everything() {
        let spec = CatStateSpec::new(1.1, 64).unwrap();
        let grid = small_grid();
        let dz = DeadZone { delta0: 100.0, epsilon: 1.0 };
        let r = asymptotic_chsh(&spec, &SettingAngles::default(), &dz, &grid, &DensityOptions::default()).unwrap();
        assert_eq!(r.e_value, 0.0);
        assert!((r.p_zero_max - 1.0).abs() < 1e-6);
    }

    #[test]
    fn self_discretization_has_zero_distance() {
        let spec = CatStateSpec::new(1.1, 64).unwrap();
        let d = quadrature_joint_density(&spec, 0.0, -0.7, &small_grid(), &DensityOptions::default()).unwrap();
        let lattice = discretize_density(&d, 3.0, 3.0).unwrap();
        assert!(convergence_to_asymptote(&lattice, &d).unwrap() < 1e-6);
        assert!((lattice.total() - d.total()).abs() < 1e-12);
    }
}
