use std::path::{Path, PathBuf};

use clap::{Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sphere_nodal::geometry::MAX_SUBDIVISIONS;
use sphere_nodal::moments::{KernelEstimator, QuadratureSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Moments of Q_n^m and their scaled ratios.
    MomentsTable,
    /// Leray variance by quadrature against its asymptotic.
    LerayVariance,
    /// Nodal volume variance with the singular-interval budget.
    VolumeVariance,
    /// Monte Carlo nodal length and Leray statistics on S^2.
    McVerify,
    /// Determinant identity, finite-difference oracle and degeneracy scan.
    CovarianceCheck,
    /// Kac-Rice kernel against separation angle.
    KernelProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    #[default]
    Quadrature,
    ControlVariate,
    Plain,
}

impl From<KernelChoice> for KernelEstimator {
    fn from(k: KernelChoice) -> Self {
        match k {
            KernelChoice::Quadrature => KernelEstimator::Quadrature,
            KernelChoice::ControlVariate => KernelEstimator::ControlVariate,
            KernelChoice::Plain => KernelEstimator::Plain,
        }
    }
}

/// Everything a run depends on. It is written into every artifact, so a
/// file can be reproduced from its own header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandKind>,
    pub m: u32,
    /// Degree sweep; empty selects the command's default sweep.
    pub n: Vec<u32>,
    pub mesh_level: u32,
    pub samples: u64,
    pub seed: u64,
    pub mc_paths: u32,
    pub eps0: f64,
    pub kernel: KernelChoice,
    /// Angles in the kernel profile and the covariance grid.
    pub points: u32,
    pub panels_per_oscillation: u32,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            m: 2,
            n: Vec::new(),
            mesh_level: 5,
            samples: 2000,
            seed: 0,
            mc_paths: 20_000,
            eps0: 0.9,
            kernel: KernelChoice::Quadrature,
            points: 50,
            panels_per_oscillation: 16,
            output_path: None,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Fills in the default sweep and checks every field against the
    /// library guards.
    pub fn resolved(mut self) -> Result<Self, CliError> {
        let command = self.command.ok_or_else(|| CliError::Usage("no command given".into()))?;
        if self.n.is_empty() {
            self.n = match command {
                CommandKind::MomentsTable | CommandKind::LerayVariance => vec![10, 20, 40, 80],
                CommandKind::VolumeVariance => vec![10, 20, 40],
                CommandKind::McVerify => vec![20],
                CommandKind::CovarianceCheck => vec![3, 10, 25],
                CommandKind::KernelProfile => vec![10],
            };
        }
        let usage = |msg: String| Err(CliError::Usage(msg));
        if !(2..=64).contains(&self.m) {
            return usage(format!("m = {} must be in 2..=64", self.m));
        }
        if command == CommandKind::McVerify && self.m != 2 {
            return usage(format!("mc-verify supports m = 2 only, got m = {}", self.m));
        }
        let needs_positive = !matches!(command, CommandKind::MomentsTable);
        if needs_positive && self.n.contains(&0) {
            return usage("n = 0 is only meaningful for moments-table".into());
        }
        if self.mesh_level > MAX_SUBDIVISIONS {
            return usage(format!("mesh_level = {} exceeds {MAX_SUBDIVISIONS}", self.mesh_level));
        }
        if self.samples == 0 {
            return usage("samples must be positive".into());
        }
        if self.mc_paths < 2 {
            return usage(format!("mc_paths = {} < 2", self.mc_paths));
        }
        if self.points < 2 {
            return usage(format!("points = {} < 2", self.points));
        }
        self.quadrature().validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(self)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            panels_per_oscillation: self.panels_per_oscillation,
            singular_split_eps0: self.eps0,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_the_sweep() {
        let c = RunConfig { command: Some(CommandKind::VolumeVariance), ..Default::default() }.resolved().unwrap();
        assert_eq!(c.n, vec![10, 20, 40]);
        assert_eq!(c.kernel, KernelChoice::Quadrature);
        assert!(RunConfig::default().resolved().is_err());
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"command": "mc-verify", "seed": 7}"#).unwrap();
        assert_eq!((c.seed, c.mesh_level, c.samples), (7, 5, 2000));
        assert!(serde_json::from_str::<RunConfig>(r#"{"sead": 7}"#).is_err());
    }
}
