//! Exact joint distribution of the two photon-number differences.
//!
//! Each branch of the state maps to a product of four coherent output
//! modes. The amplitude of a Fock tuple `(n_{c+}, n_{c-}, n_{d+}, n_{d-})` is
//! the weighted sum over branches of the product of the four Fock
//! amplitudes. Its squared modulus is accumulated into the bucket
//! `(m, n) = (n_{c+} - n_{c-}, n_{d+} - n_{d-})`. Distinct tuples with the
//! same differences are orthogonal pointer states, so summing their
//! probabilities realizes the sum over the total photon numbers.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::quantum::{coherent_fock_amplitudes, CoherentLabel};
use crate::special::poisson_upper_tail;
use crate::state::{BranchLabels, BranchState, NetworkConfig};

/// Discarded probability above which a distribution is refused.
pub const MAX_TRUNCATION_LOSS: f64 = 1e-4;
/// Largest change in any P(m,n) tolerated when the node count is doubled.
pub const PMN_CONVERGENCE_TOL: f64 = 1e-6;

/// Per-mode Fock cutoff: `ceil(mean + sigma_factor·√mean + floor)`, where
/// `mean` is the largest mean photon number of any output mode of the party,
/// unless a fixed cutoff is given.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockCutoff {
    pub sigma_factor: f64,
    pub floor: f64,
    pub fixed: Option<usize>,
}

impl Default for FockCutoff {
    fn default() -> Self {
        FockCutoff { sigma_factor: 8.0, floor: 15.0, fixed: None }
    }
}

impl FockCutoff {
    pub fn with_sigma_factor(sigma_factor: f64) -> Self {
        FockCutoff { sigma_factor, ..Default::default() }
    }

    pub fn fixed(per_mode_max: usize) -> Self {
        FockCutoff { fixed: Some(per_mode_max), ..Default::default() }
    }

    pub fn resolve(&self, max_mean: f64) -> usize {
        match self.fixed {
            Some(n) => n,
            None => (max_mean + self.sigma_factor * max_mean.sqrt() + self.floor).ceil() as usize,
        }
    }
}

/// How branch amplitudes are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AmplitudeMode {
    /// Sum branch amplitudes, then square: the actual superposition.
    #[default]
    Coherent,
    /// Square each branch, then sum: the classical mixture of the branches.
    /// Diagnostic only, it can never exceed the local bound.
    ClassicalMixture,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PmnOptions {
    pub mode: AmplitudeMode,
    /// Recompute with doubled phase resolution and compare.
    pub check_convergence: bool,
    pub execution: Execution,
}

impl Default for PmnOptions {
    fn default() -> Self {
        PmnOptions {
            mode: AmplitudeMode::Coherent,
            check_convergence: true,
            execution: Execution::default(),
        }
    }
}

/// Parameters a distribution was computed with.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionConfig {
    pub state: String,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub phi: f64,
    pub cutoff: FockCutoff,
    pub mode: AmplitudeMode,
}

impl DistributionConfig {
    /// Describe the first non-angle parameter on which two configs differ.
    pub fn mismatch(&self, other: &DistributionConfig) -> Option<String> {
        if self.state != other.state {
            return Some(format!("state '{}' vs '{}'", self.state, other.state));
        }
        if self.alpha != other.alpha || self.beta != other.beta {
            return Some(format!(
                "drives ({}, {}) vs ({}, {})",
                self.alpha, self.beta, other.alpha, other.beta
            ));
        }
        if self.cutoff != other.cutoff {
            return Some(format!("cutoff {:?} vs {:?}", self.cutoff, other.cutoff));
        }
        if self.mode != other.mode {
            return Some(format!("mode {:?} vs {:?}", self.mode, other.mode));
        }
        None
    }
}

/// Joint probabilities P(m,n) on `|m| <= range_a`, `|n| <= range_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointNumberDistribution {
    range_a: usize,
    range_b: usize,
    values: Vec<f64>,
    truncation_loss: f64,
    config: DistributionConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    A,
    B,
}

impl JointNumberDistribution {
    /// Build from a dense row-major table, row index `m + range_a`.
    pub fn from_table(
        range_a: usize,
        range_b: usize,
        values: Vec<f64>,
        truncation_loss: f64,
        config: DistributionConfig,
    ) -> Result<Self> {
        if values.len() != (2 * range_a + 1) * (2 * range_b + 1) {
            return Err(Error::InvalidParameter(format!(
                "table of {} entries does not match ranges ({range_a}, {range_b})",
                values.len()
            )));
        }
        if values.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::InvalidParameter("probabilities must be >= 0".into()));
        }
        Ok(JointNumberDistribution { range_a, range_b, values, truncation_loss, config })
    }

    /// Largest |m| represented.
    pub fn range_a(&self) -> usize {
        self.range_a
    }

    /// Largest |n| represented.
    pub fn range_b(&self) -> usize {
        self.range_b
    }

    /// Upper bound on the probability discarded by the Fock truncation.
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    pub fn config(&self) -> &DistributionConfig {
        &self.config
    }

    fn width_b(&self) -> usize {
        2 * self.range_b + 1
    }

    /// P(m,n), zero outside the represented range.
    pub fn get(&self, m: i64, n: i64) -> f64 {
        if m.unsigned_abs() as usize > self.range_a || n.unsigned_abs() as usize > self.range_b {
            return 0.0;
        }
        let row = (m + self.range_a as i64) as usize;
        let col = (n + self.range_b as i64) as usize;
        self.values[row * self.width_b() + col]
    }

    /// `(m, n, p)` in ascending `(m, n)` order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let w = self.width_b();
        let (ra, rb) = (self.range_a as i64, self.range_b as i64);
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &p)| ((i / w) as i64 - ra, (i % w) as i64 - rb, p))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Write `m,n,p` rows sorted by `(m, n)`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "m,n,p")?;
        for (m, n, p) in self.iter() {
            writeln!(out, "{m},{n},{p:.17e}")?;
        }
        Ok(())
    }
}

/// Marginal distribution of one party's photon-number difference.
pub fn party_marginal(dist: &JointNumberDistribution, party: Party) -> BTreeMap<i64, f64> {
    let mut out = BTreeMap::new();
    for (m, n, p) in dist.iter() {
        let key = match party {
            Party::A => m,
            Party::B => n,
        };
        *out.entry(key).or_insert(0.0) += p;
    }
    out
}

/// Fock amplitudes of both output modes of one party, for every branch.
struct PartyTables {
    cutoff: usize,
    /// `plus[k][n]`, `minus[k][n]`.
    plus: Vec<Vec<Complex64>>,
    minus: Vec<Vec<Complex64>>,
}

impl PartyTables {
    fn build(labels: &[(CoherentLabel, CoherentLabel)], cutoff: usize) -> Self {
        PartyTables {
            cutoff,
            plus: labels.iter().map(|(p, _)| coherent_fock_amplitudes(*p, cutoff)).collect(),
            minus: labels.iter().map(|(_, m)| coherent_fock_amplitudes(*m, cutoff)).collect(),
        }
    }

    /// Probability of each difference `n₊ - n₋` for branch `k`, offset by the cutoff.
    fn branch_difference_distribution(&self, k: usize) -> Vec<f64> {
        let c = self.cutoff;
        let mut out = vec![0.0; 2 * c + 1];
        for (n1, a) in self.plus[k].iter().enumerate() {
            let pa = a.norm_sqr();
            for (n2, b) in self.minus[k].iter().enumerate() {
                out[n1 + c - n2] += pa * b.norm_sqr();
            }
        }
        out
    }
}

fn max_mean(labels: &[(CoherentLabel, CoherentLabel)]) -> f64 {
    labels
        .iter()
        .map(|(p, m)| p.mean_photon_number().max(m.mean_photon_number()))
        .fold(0.0, f64::max)
}

/// Bound on the discarded probability: ‖(1-Π)ψ‖ ≤ Σ_k |w_k| √(tail_k), where
/// `tail_k` is the union bound of the four Poisson tails of branch `k`.
fn truncation_bound(
    weights: &[Complex64],
    labels: &[BranchLabels],
    cutoff_a: usize,
    cutoff_b: usize,
) -> f64 {
    let amplitude: f64 = weights
        .iter()
        .zip(labels)
        .map(|(w, l)| {
            let tail = poisson_upper_tail(cutoff_a, l.c_plus.mean_photon_number())
                + poisson_upper_tail(cutoff_a, l.c_minus.mean_photon_number())
                + poisson_upper_tail(cutoff_b, l.d_plus.mean_photon_number())
                + poisson_upper_tail(cutoff_b, l.d_minus.mean_photon_number());
            w.norm() * tail.min(1.0).sqrt()
        })
        .sum();
    (amplitude * amplitude).min(1.0)
}

/// Exact joint distribution P(m,n) for the state measured through `net`.
pub fn joint_pmn<S: BranchState>(
    state: &S,
    net: &NetworkConfig,
    cutoff: &FockCutoff,
    opts: &PmnOptions,
) -> Result<JointNumberDistribution> {
    let dist = joint_pmn_unchecked(state, net, cutoff, opts)?;
    if !opts.check_convergence {
        return Ok(dist);
    }
    let refined = joint_pmn_unchecked(&state.refined(), net, cutoff, opts)?;
    let ra = dist.range_a.max(refined.range_a) as i64;
    let rb = dist.range_b.max(refined.range_b) as i64;
    let mut change = 0.0f64;
    for m in -ra..=ra {
        for n in -rb..=rb {
            change = change.max((dist.get(m, n) - refined.get(m, n)).abs());
        }
    }
    if change > PMN_CONVERGENCE_TOL {
        return Err(Error::NonConvergence {
            quantity: "P(m,n)",
            nodes: 2 * state.node_count(),
            change,
            limit: PMN_CONVERGENCE_TOL,
        });
    }
    Ok(dist)
}

fn joint_pmn_unchecked<S: BranchState>(
    state: &S,
    net: &NetworkConfig,
    cutoff: &FockCutoff,
    opts: &PmnOptions,
) -> Result<JointNumberDistribution> {
    let branches = state.branches()?;
    let labels: Vec<BranchLabels> =
        branches.iter().map(|b| BranchLabels::for_branch(b, net)).collect();
    let weights: Vec<Complex64> = branches.iter().map(|b| b.weight).collect();
    let side_a: Vec<_> = labels.iter().map(|l| (l.c_plus, l.c_minus)).collect();
    let side_b: Vec<_> = labels.iter().map(|l| (l.d_plus, l.d_minus)).collect();

    let cutoff_a = cutoff.resolve(max_mean(&side_a));
    let cutoff_b = cutoff.resolve(max_mean(&side_b));
    let loss = truncation_bound(&weights, &labels, cutoff_a, cutoff_b);
    if loss > MAX_TRUNCATION_LOSS {
        return Err(Error::TruncationTooLossy { loss, limit: MAX_TRUNCATION_LOSS });
    }

    let a = PartyTables::build(&side_a, cutoff_a);
    let b = PartyTables::build(&side_b, cutoff_b);
    let values = match opts.mode {
        AmplitudeMode::Coherent => coherent_table(&a, &b, &weights, opts.execution),
        AmplitudeMode::ClassicalMixture => mixture_table(&a, &b, &weights, opts.execution),
    };

    let config = DistributionConfig {
        state: state.fingerprint(),
        alpha: net.alpha(),
        beta: net.beta(),
        theta: net.theta(),
        phi: net.phi(),
        cutoff: *cutoff,
        mode: opts.mode,
    };
    JointNumberDistribution::from_table(cutoff_a, cutoff_b, values, loss, config)
}

/// B-side products `d₊[k][n₃]·d₋[k][n₄]`, one K-long row per pair, split
/// into real and imaginary parts for the inner dot product.
struct PairRows {
    nodes: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    /// `n₃ - n₄ + cutoff` for each pair row.
    bucket: Vec<usize>,
}

impl PairRows {
    fn build(side: &PartyTables) -> Self {
        let k_count = side.plus.len();
        let c = side.cutoff;
        let pairs = (c + 1) * (c + 1);
        let mut re = Vec::with_capacity(pairs * k_count);
        let mut im = Vec::with_capacity(pairs * k_count);
        let mut bucket = Vec::with_capacity(pairs);
        for n3 in 0..=c {
            for n4 in 0..=c {
                for k in 0..k_count {
                    let z = side.plus[k][n3] * side.minus[k][n4];
                    re.push(z.re);
                    im.push(z.im);
                }
                bucket.push(n3 + c - n4);
            }
        }
        PairRows { nodes: k_count, re, im, bucket }
    }
}

fn coherent_table(
    a: &PartyTables,
    b: &PartyTables,
    weights: &[Complex64],
    exec: Execution,
) -> Vec<f64> {
    let rows_b = PairRows::build(b);
    let (ca, cb) = (a.cutoff, b.cutoff);
    let k_count = weights.len();
    let width = 2 * cb + 1;

    // One task per m: each output row is produced by exactly one task in a
    // fixed order, so the table does not depend on scheduling.
    let rows = map_indexed(exec, 2 * ca + 1, |row| {
        let m = row as i64 - ca as i64;
        let mut acc = vec![0.0; width];
        let mut ur = vec![0.0; k_count];
        let mut ui = vec![0.0; k_count];
        let n1_start = m.max(0) as usize;
        let n1_end = (ca as i64 + m.min(0)) as usize;
        for n1 in n1_start..=n1_end {
            let n2 = (n1 as i64 - m) as usize;
            for k in 0..k_count {
                let z = weights[k] * a.plus[k][n1] * a.minus[k][n2];
                ur[k] = z.re;
                ui[k] = z.im;
            }
            for (j, &bucket) in rows_b.bucket.iter().enumerate() {
                let vr = &rows_b.re[j * rows_b.nodes..(j + 1) * rows_b.nodes];
                let vi = &rows_b.im[j * rows_b.nodes..(j + 1) * rows_b.nodes];
                let (re, im) = complex_dot(&ur, &ui, vr, vi);
                acc[bucket] += re * re + im * im;
            }
        }
        acc
    });
    rows.concat()
}

#[inline]
pub(crate) fn complex_dot(ur: &[f64], ui: &[f64], vr: &[f64], vi: &[f64]) -> (f64, f64) {
    // Four independent lanes so the loop vectorizes.
    let mut re = [0.0; 4];
    let mut im = [0.0; 4];
    let chunks = ur.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let i = 4 * c + l;
            re[l] += ur[i] * vr[i] - ui[i] * vi[i];
            im[l] += ur[i] * vi[i] + ui[i] * vr[i];
        }
    }
    let mut sr = (re[0] + re[1]) + (re[2] + re[3]);
    let mut si = (im[0] + im[1]) + (im[2] + im[3]);
    for i in 4 * chunks..ur.len() {
        sr += ur[i] * vr[i] - ui[i] * vi[i];
        si += ur[i] * vi[i] + ui[i] * vr[i];
    }
    (sr, si)
}

fn mixture_table(
    a: &PartyTables,
    b: &PartyTables,
    weights: &[Complex64],
    exec: Execution,
) -> Vec<f64> {
    let total: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
    let probs: Vec<f64> = weights.iter().map(|w| w.norm_sqr() / total).collect();
    let marg_a = map_indexed(exec, probs.len(), |k| a.branch_difference_distribution(k));
    let marg_b = map_indexed(exec, probs.len(), |k| b.branch_difference_distribution(k));
    let width = 2 * b.cutoff + 1;
    let rows = map_indexed(exec, 2 * a.cutoff + 1, |row| {
        let mut acc = vec![0.0; width];
        for (k, p) in probs.iter().enumerate() {
            let pa = p * marg_a[k][row];
            if pa == 0.0 {
                continue;
            }
            for (slot, pb) in acc.iter_mut().zip(&marg_b[k]) {
                *slot += pa * pb;
            }
        }
        acc
    });
    rows.concat()
}
