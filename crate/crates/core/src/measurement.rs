//! Three-region binning of photon-number differences and the CHSH combination.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::joint::JointNumberDistribution;

/// Photon-number threshold N₀ separating the macroscopic outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinThreshold(pub u32);

/// Outcome of one party's binned measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Minus,
    Zero,
    Plus,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Minus, Outcome::Zero, Outcome::Plus];

    /// +1 for m > N₀, −1 for m < −N₀, 0 otherwise.
    pub fn classify(m: i64, threshold: BinThreshold) -> Self {
        let n0 = i64::from(threshold.0);
        if m > n0 {
            Outcome::Plus
        } else if m < -n0 {
            Outcome::Minus
        } else {
            Outcome::Zero
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Outcome::Minus => -1,
            Outcome::Zero => 0,
            Outcome::Plus => 1,
        }
    }

    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }
}

/// 3×3 outcome table for one pair of settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinnedStatistics {
    /// `table[a][b]` with indices from [`Outcome::index`].
    pub table: [[f64; 3]; 3],
    pub p_zero_a: f64,
    pub p_zero_b: f64,
    /// Σ ij·table[i][j]; the zero outcome counts as value 0.
    pub correlation: f64,
}

impl BinnedStatistics {
    pub fn from_table(table: [[f64; 3]; 3]) -> Self {
        let mut correlation = 0.0;
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                correlation += f64::from(a.value() * b.value()) * table[a.index()][b.index()];
            }
        }
        let z = Outcome::Zero.index();
        BinnedStatistics {
            table,
            p_zero_a: table[z].iter().sum(),
            p_zero_b: table.iter().map(|row| row[z]).sum(),
            correlation,
        }
    }

    pub fn total(&self) -> f64 {
        self.table.iter().flatten().sum()
    }

    /// Correlation conditioned on both parties giving ±1.
    ///
    /// Returns 0 when that sector has no probability.
    pub fn correlation_renormalized(&self) -> f64 {
        let (m, p) = (Outcome::Minus.index(), Outcome::Plus.index());
        let sector = self.table[m][m] + self.table[m][p] + self.table[p][m] + self.table[p][p];
        if sector == 0.0 {
            0.0
        } else {
            self.correlation / sector
        }
    }

    /// Probability of each outcome for party A, in [`Outcome::ALL`] order.
    pub fn outcome_probabilities_a(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.table[i].iter().sum())
    }

    pub fn outcome_probabilities_b(&self) -> [f64; 3] {
        [0, 1, 2].map(|j| self.table.iter().map(|row| row[j]).sum())
    }

    /// Write `outcome_a,outcome_b,p` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "outcome_a,outcome_b,p")?;
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                writeln!(out, "{},{},{:.17e}", a.value(), b.value(), self.table[a.index()][b.index()])?;
            }
        }
        Ok(())
    }
}

/// Aggregate P(m,n) into the three macroscopic outcome regions of each party.
pub fn bin_distribution(dist: &JointNumberDistribution, threshold: BinThreshold) -> BinnedStatistics {
    let mut table = [[0.0; 3]; 3];
    for (m, n, p) in dist.iter() {
        let a = Outcome::classify(m, threshold).index();
        let b = Outcome::classify(n, threshold).index();
        table[a][b] += p;
    }
    BinnedStatistics::from_table(table)
}

/// The four measurement angles: θ, θ′ for A and φ, φ′ for B.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingAngles {
    pub theta: f64,
    pub phi: f64,
    pub theta_prime: f64,
    pub phi_prime: f64,
}

impl Default for SettingAngles {
    fn default() -> Self {
        SettingAngles {
            theta: 0.0,
            phi: -FRAC_PI_4,
            theta_prime: FRAC_PI_2,
            phi_prime: -3.0 * FRAC_PI_4,
        }
    }
}

impl SettingAngles {
    pub const LABELS: [&'static str; 4] = ["bb", "bg", "gb", "gg"];

    /// `(θ,φ), (θ,φ′), (θ′,φ), (θ′,φ′)`.
    pub fn settings(&self) -> [(f64, f64); 4] {
        [
            (self.theta, self.phi),
            (self.theta, self.phi_prime),
            (self.theta_prime, self.phi),
            (self.theta_prime, self.phi_prime),
        ]
    }
}

/// Correlations for the four settings and their CHSH combination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshResult {
    pub e_bb: f64,
    pub e_bg: f64,
    pub e_gb: f64,
    pub e_gg: f64,
    pub e_value: f64,
    /// Largest zero-outcome probability over both parties and all settings.
    pub p_zero_max: f64,
}

impl ChshResult {
    pub fn from_correlations(e_bb: f64, e_bg: f64, e_gb: f64, e_gg: f64, p_zero_max: f64) -> Self {
        ChshResult {
            e_bb,
            e_bg,
            e_gb,
            e_gg,
            e_value: e_bb - e_bg + e_gb + e_gg,
            p_zero_max,
        }
    }

    /// Combine binned statistics in `bb, bg, gb, gg` order.
    pub fn from_binned(stats: &[BinnedStatistics; 4]) -> Self {
        let p_zero_max = stats
            .iter()
            .flat_map(|s| [s.p_zero_a, s.p_zero_b])
            .fold(0.0, f64::max);
        Self::from_correlations(
            stats[0].correlation,
            stats[1].correlation,
            stats[2].correlation,
            stats[3].correlation,
            p_zero_max,
        )
    }

    /// Same combination using the ±1-sector renormalized correlations.
    pub fn renormalized(stats: &[BinnedStatistics; 4]) -> Self {
        let mut r = Self::from_binned(stats);
        let [bb, bg, gb, gg] = stats.map(|s| s.correlation_renormalized());
        r.e_bb = bb;
        r.e_bg = bg;
        r.e_gb = gb;
        r.e_gg = gg;
        r.e_value = bb - bg + gb + gg;
        r
    }

    pub fn correlations(&self) -> [f64; 4] {
        [self.e_bb, self.e_bg, self.e_gb, self.e_gg]
    }

    /// Write `setting,e` rows followed by the `chsh` summary row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "setting,e")?;
        for (label, e) in SettingAngles::LABELS.iter().zip(self.correlations()) {
            writeln!(out, "{label},{e:.17e}")?;
        }
        writeln!(out, "chsh,{:.17e}", self.e_value)
    }
}

/// CHSH value from the four distributions, given in `bb, bg, gb, gg` order.
pub fn chsh(dists: [&JointNumberDistribution; 4], threshold: BinThreshold) -> Result<ChshResult> {
    let first = dists[0].config();
    for d in &dists[1..] {
        if let Some(why) = first.mismatch(d.config()) {
            return Err(Error::InconsistentConfigs(why));
        }
    }
    Ok(ChshResult::from_binned(&dists.map(|d| bin_distribution(d, threshold))))
}
