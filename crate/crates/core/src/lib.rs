//! Exact numerical simulation of a macroscopic Bell test.
//!
//! A circular superposition of two-mode coherent states is mixed with strong
//! coherent drives and measured through polarisers. Each party records the
//! photon-number difference of its two outputs, bins it into three
//! macroscopically separated regions, and the four setting correlations are
//! combined into the CHSH quantity. The [`asymptotic`] module computes the
//! infinite-drive limit, where the scaled number difference becomes a
//! field quadrature.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`exec::Execution`].

pub mod asymptotic;
pub mod error;
pub mod exec;
pub mod joint;
pub mod lhv;
pub mod measurement;
pub mod quantum;
pub mod special;
pub mod state;

pub use error::{Error, Result};
pub use exec::Execution;
pub use joint::{joint_pmn, party_marginal, AmplitudeMode, FockCutoff, JointNumberDistribution, Party, PmnOptions};
pub use measurement::{bin_distribution, chsh, BinThreshold, BinnedStatistics, ChshResult, SettingAngles};
pub use quantum::CoherentLabel;
pub use state::{BranchState, CatStateSpec, NetworkConfig};
