//! The subcommands. Each writes its CSV files into `config.output_dir`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use catbell_core::asymptotic::{
    chsh_from_densities, convergence_to_asymptote, discretize_density, quadrature_joint_density,
    setting_densities, solve_delta0, DeadZone, DensityOptions, QuadratureDensity, QuadratureGrid,
};
use catbell_core::exec::with_workers;
use catbell_core::lhv::{mixture_bound, write_assignment_csv};
use catbell_core::measurement::Outcome;
use catbell_core::{
    chsh, joint_pmn, BinThreshold, BinnedStatistics, CatStateSpec, Error, Execution, FockCutoff,
    JointNumberDistribution, NetworkConfig, PmnOptions, SettingAngles,
};

use crate::{CliError, RunConfig};

/// Self-test threshold for the asymptote compared with its own discretization.
pub const SELF_TEST_LIMIT: f64 = 1e-6;

type CmdResult = Result<Vec<PathBuf>, CliError>;

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    let path = dir.join(name);
    Ok((path.clone(), BufWriter::new(File::create(&path)?)))
}

fn prepare(config: &RunConfig) -> Result<CatStateSpec, CliError> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    Ok(CatStateSpec::new(config.r0, config.k_points)?)
}

fn cutoff(config: &RunConfig) -> FockCutoff {
    FockCutoff::with_sigma_factor(config.sigma_factor)
}

fn four_distributions(
    spec: &CatStateSpec,
    config: &RunConfig,
    alpha: f64,
) -> Result<[JointNumberDistribution; 4], Error> {
    let [s0, s1, s2, s3] = config.angles.settings();
    let one = |(theta, phi): (f64, f64)| {
        let net = NetworkConfig::new(alpha, alpha, theta, phi)?;
        joint_pmn(spec, &net, &cutoff(config), &PmnOptions::default())
    };
    Ok([one(s0)?, one(s1)?, one(s2)?, one(s3)?])
}

fn densities(spec: &CatStateSpec, angles: &SettingAngles) -> Result<[QuadratureDensity; 4], Error> {
    setting_densities(spec, angles, &QuadratureGrid::default(), &DensityOptions::default())
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::NonConvergence { .. } => "non_convergence",
        Error::TruncationTooLossy { .. } => "truncation_too_lossy",
        _ => "error",
    }
}

/// CHSH value against α for every threshold in `n0_list`, written to `scan.csv`.
///
/// A numerical failure writes a row carrying its status, flushes the rows
/// computed so far and returns the error.
pub fn scan_alpha(config: &RunConfig) -> CmdResult {
    let spec = prepare(config)?;
    let (path, mut out) = create(&config.output_dir, "scan.csv")?;
    writeln!(out, "alpha,n0,e_bb,e_bg,e_gb,e_gg,e,p_zero_max,truncation_loss,status")?;
    let run = with_workers(config.workers, || -> Result<(), CliError> {
        for &alpha in &config.alphas {
            let dists = match four_distributions(&spec, config, alpha) {
                Ok(d) => d,
                Err(e) => {
                    for n0 in &config.n0_list {
                        writeln!(out, "{alpha},{n0},NaN,NaN,NaN,NaN,NaN,NaN,NaN,{}", status_of(&e))?;
                    }
                    out.flush()?;
                    return Err(e.into());
                }
            };
            let loss = dists.iter().map(|d| d.truncation_loss()).fold(0.0, f64::max);
            let [a, b, c, d] = &dists;
            for &n0 in &config.n0_list {
                let r = chsh([a, b, c, d], BinThreshold(n0))?;
                writeln!(
                    out,
                    "{alpha},{n0},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},ok",
                    r.e_bb, r.e_bg, r.e_gb, r.e_gg, r.e_value, r.p_zero_max, loss
                )?;
            }
            out.flush()?;
        }
        Ok(())
    });
    out.flush()?;
    run.map(|()| vec![path])
}

fn write_outcomes(out: &mut impl Write, stats: &[BinnedStatistics; 4]) -> std::io::Result<()> {
    writeln!(out, "setting,party,outcome,p")?;
    for (label, s) in SettingAngles::LABELS.iter().zip(stats) {
        for (party, probs) in [("a", s.outcome_probabilities_a()), ("b", s.outcome_probabilities_b())] {
            for o in Outcome::ALL {
                writeln!(out, "{label},{party},{},{:.17e}", o.value(), probs[o.index()])?;
            }
        }
    }
    Ok(())
}

/// Limiting CHSH value of the quadrature sign binning, with and without the
/// dead zone solved for `epsilon`.
///
/// Writes `asymptotic_chsh.csv`, `asymptotic_deadzone_chsh.csv`,
/// `dead_zone.csv`, `outcomes.csv` (dead-zone binning), `marginal_a.csv`,
/// `marginal_b.csv` and, with `export_density`, one `density_<setting>.csv`
/// per setting.
pub fn asymptotic(config: &RunConfig, export_density: bool) -> CmdResult {
    let spec = prepare(config)?;
    let dir = &config.output_dir;
    let dens = with_workers(config.workers, || densities(&spec, &config.angles))?;
    let mut written = Vec::new();

    let (sign, _) = chsh_from_densities(&dens, &DeadZone::NONE);
    let (path, mut out) = create(dir, "asymptotic_chsh.csv")?;
    sign.write_csv(&mut out)?;
    out.flush()?;
    written.push(path);

    let dz = solve_delta0(&dens[0], config.epsilon)?;
    let (zoned, stats) = chsh_from_densities(&dens, &dz);
    let (path, mut out) = create(dir, "asymptotic_deadzone_chsh.csv")?;
    zoned.write_csv(&mut out)?;
    out.flush()?;
    written.push(path);

    let (path, mut out) = create(dir, "dead_zone.csv")?;
    writeln!(out, "epsilon,delta0,p_zero_max")?;
    writeln!(out, "{},{:.17e},{:.17e}", dz.epsilon, dz.delta0, zoned.p_zero_max)?;
    out.flush()?;
    written.push(path);

    let (path, mut out) = create(dir, "outcomes.csv")?;
    write_outcomes(&mut out, &stats)?;
    out.flush()?;
    written.push(path);

    for (name, values) in [("marginal_a.csv", dens[0].marginal_x()), ("marginal_b.csv", dens[0].marginal_y())] {
        let (path, mut out) = create(dir, name)?;
        writeln!(out, "x,p")?;
        for (i, p) in values.iter().enumerate() {
            writeln!(out, "{},{p:.17e}", dens[0].grid_x.point(i))?;
        }
        out.flush()?;
        written.push(path);
    }

    if export_density {
        for (label, d) in SettingAngles::LABELS.iter().zip(&dens) {
            let (path, mut out) = create(dir, &format!("density_{label}.csv"))?;
            d.write_csv(&mut out)?;
            out.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

/// The 16 deterministic assignments and, unless `samples` is zero, the
/// extremes over random mixtures of them.
pub fn lhv(config: &RunConfig) -> CmdResult {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let (table, mut out) = create(&config.output_dir, "lhv_assignments.csv")?;
    write_assignment_csv(&mut out)?;
    out.flush()?;

    let bound = with_workers(config.workers, || mixture_bound(config.samples, config.seed, Execution::default()));
    let (extremes, mut out) = create(&config.output_dir, "lhv_mixtures.csv")?;
    writeln!(out, "samples,seed,min,max")?;
    if let Some(b) = bound {
        writeln!(out, "{},{},{:.17e},{:.17e}", b.samples, b.seed, b.min, b.max)?;
    }
    out.flush()?;
    Ok(vec![table, extremes])
}

fn write_rescaled(dir: &Path, name: &str, dist: &JointNumberDistribution) -> Result<PathBuf, CliError> {
    let (alpha, beta) = (dist.config().alpha, dist.config().beta);
    let (path, mut out) = create(dir, name)?;
    writeln!(out, "x,y,p")?;
    for (m, n, p) in dist.iter() {
        writeln!(out, "{},{},{:.17e}", m as f64 / alpha, n as f64 / beta, p * alpha * beta)?;
    }
    out.flush()?;
    Ok(path)
}

/// Total-variation distance between P(m,n) at the first setting and the
/// cell-integrated asymptote, per α, in `convergence.csv`, plus one
/// `rescaled_alpha<α>.csv` per α with coordinates m/α, n/α and density αβ·P.
///
/// With `self_test` the asymptote's own discretization replaces P(m,n); any
/// distance above [`SELF_TEST_LIMIT`] is reported as a numerical failure.
pub fn convergence(config: &RunConfig, self_test: bool) -> CmdResult {
    let spec = prepare(config)?;
    let dir = &config.output_dir;
    let (theta, phi) = config.angles.settings()[0];
    let opts = DensityOptions::default();
    let name = if self_test { "convergence_self_test.csv" } else { "convergence.csv" };
    let (path, mut out) = create(dir, name)?;
    writeln!(out, "alpha,tv")?;
    let mut written = vec![path];
    let run = with_workers(config.workers, || -> Result<(), CliError> {
        let density =
            quadrature_joint_density(&spec, theta, phi, &QuadratureGrid::default(), &opts)?;
        for &alpha in &config.alphas {
            let dist = if self_test {
                discretize_density(&density, alpha, alpha)?
            } else {
                let net = NetworkConfig::new(alpha, alpha, theta, phi)?;
                joint_pmn(&spec, &net, &cutoff(config), &PmnOptions::default())?
            };
            let tv = convergence_to_asymptote(&dist, &density)?;
            writeln!(out, "{alpha},{tv:.17e}")?;
            out.flush()?;
            if self_test && tv > SELF_TEST_LIMIT {
                return Err(CliError::Numerical(Error::NonConvergence {
                    quantity: "self-test distance",
                    nodes: spec.nodes(),
                    change: tv,
                    limit: SELF_TEST_LIMIT,
                }));
            }
            if !self_test {
                written.push(write_rescaled(dir, &format!("rescaled_alpha{alpha}.csv"), &dist)?);
            }
        }
        Ok(())
    });
    out.flush()?;
    run.map(|()| written)
}

/// One P(m,n) per α at the chosen setting, as `pmn_alpha<α>_<setting>.csv`.
pub fn pmn(config: &RunConfig, setting: usize) -> CmdResult {
    let spec = prepare(config)?;
    let label = SettingAngles::LABELS[setting];
    let (theta, phi) = config.angles.settings()[setting];
    let mut written = Vec::new();
    with_workers(config.workers, || -> Result<(), CliError> {
        for &alpha in &config.alphas {
            let net = NetworkConfig::new(alpha, alpha, theta, phi)?;
            let dist = joint_pmn(&spec, &net, &cutoff(config), &PmnOptions::default())?;
            let (path, mut out) = create(&config.output_dir, &format!("pmn_alpha{alpha}_{label}.csv"))?;
            dist.write_csv(&mut out)?;
            out.flush()?;
            written.push(path);
        }
        Ok(())
    })?;
    Ok(written)
}
