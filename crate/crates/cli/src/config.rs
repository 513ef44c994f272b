//! Command-line grammar and the optional JSON config file. Flags win over file values.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "hilbert", version, about = "Hilbert geometry experiments: distances, volumes, flags, entropy")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Body file: JSON body spec or whitespace-separated vertex list.
    #[arg(long, global = true)]
    pub body: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub kind: Option<Kind>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Quadrature directions.
    #[arg(long, global = true)]
    pub directions: Option<usize>,
    /// Quadrature radial nodes per direction.
    #[arg(long, global = true)]
    pub radial: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Busemann,
    HolmesThompson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ball {
    Metric,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Picker {
    Barycenter,
    Random,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Ladder {
    /// Radii, increasing.
    #[arg(long = "R", num_args = 1..)]
    pub radii: Option<Vec<f64>>,
    /// Ladder `step, 2 step, …, r_max` when no explicit radii are given.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EpsLadder {
    /// Hausdorff tolerances, decreasing.
    #[arg(long, num_args = 1..)]
    pub eps: Option<Vec<f64>>,
    /// Ladder `2^-from … 2^-to` when no explicit list is given.
    #[arg(long)]
    pub eps_from: Option<i32>,
    #[arg(long)]
    pub eps_to: Option<i32>,
}

#[derive(Debug, Subcommand)]
#[command(rename_all = "kebab-case")]
pub enum Command {
    /// Hilbert distance between two interior points.
    #[command(allow_negative_numbers = true)]
    Distance {
        #[arg(long, num_args = 1..)]
        p: Option<Vec<f64>>,
        #[arg(long, num_args = 1..)]
        q: Option<Vec<f64>>,
        /// Also print both Funk distances.
        #[arg(long)]
        funk: bool,
    },
    /// Volume density at a point, or a CSV grid over a planar body.
    #[command(allow_negative_numbers = true)]
    Density {
        #[arg(long, num_args = 1..)]
        p: Option<Vec<f64>>,
        #[arg(long)]
        grid: Option<usize>,
        /// Directions of the tangent-ball net for smooth bodies.
        #[arg(long)]
        dirs: Option<usize>,
    },
    /// Volume growth of metric or asymptotic balls, as CSV.
    #[command(allow_negative_numbers = true)]
    BallVolume {
        #[arg(long, num_args = 1..)]
        p: Option<Vec<f64>>,
        #[command(flatten)]
        ladder: Ladder,
        #[arg(long, value_enum)]
        ball: Option<Ball>,
        /// Monte Carlo samples for a cross-check column.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Number of maximal flags of a polytope.
    Flags {
        /// Print face counts by rank as well.
        #[arg(long)]
        lattice: bool,
    },
    /// Flag decomposition of a polytope, as CSV.
    Decompose {
        #[arg(long, value_enum)]
        picker: Option<Picker>,
    },
    /// Asymptotic volume of a polytope (JSON report).
    Asvol {
        #[command(flatten)]
        ladder: Ladder,
    },
    /// Volume entropy (JSON report).
    Entropy {
        #[command(flatten)]
        ladder: Ladder,
        #[arg(long, num_args = 2)]
        window: Option<Vec<f64>>,
    },
    /// Inscribed polytope within Hausdorff distance eps, as a body spec.
    Approximate {
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Flag approximability exponent (JSON report).
    FlagApprox {
        #[command(flatten)]
        ladder: EpsLadder,
    },
    /// Asvol(P)/Asvol(simplex) against |Flags(P)|/(d+1)! (JSON report).
    VerifyRatio {
        #[arg(long = "R")]
        r_max: Option<f64>,
    },
    /// Entropy against twice the flag approximability (JSON report).
    VerifyIdentity {
        #[command(flatten)]
        ladder: Ladder,
        #[arg(long, num_args = 2)]
        window: Option<Vec<f64>>,
        #[command(flatten)]
        eps: EpsLadder,
    },
}

/// Values accepted in a config file. Relative body and output paths resolve against the
/// file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub body: Option<PathBuf>,
    pub kind: Option<Kind>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub directions: Option<usize>,
    pub radial: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    #[serde(rename = "R")]
    pub radii: Option<Vec<f64>>,
    pub r_max: Option<f64>,
    pub r_step: Option<f64>,
    pub window: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub eps_from: Option<i32>,
    pub eps_to: Option<i32>,
    pub ball: Option<Ball>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub dirs: Option<usize>,
    pub picker: Option<Picker>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.body, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Fills every value the command line left unset.
    pub fn merge(self, cli: &mut Cli) {
        let c = &mut cli.common;
        c.body = c.body.take().or(self.body);
        c.kind = c.kind.or(self.kind);
        c.out = c.out.take().or(self.out);
        c.seed = c.seed.or(self.seed);
        c.directions = c.directions.or(self.directions);
        c.radial = c.radial.or(self.radial);
        let fill_ladder = |l: &mut Ladder| {
            l.radii = l.radii.take().or(self.radii.clone());
            l.r_max = l.r_max.or(self.r_max);
            l.r_step = l.r_step.or(self.r_step);
        };
        let fill_eps = |l: &mut EpsLadder| {
            l.eps = l.eps.take().or(self.eps.clone());
            l.eps_from = l.eps_from.or(self.eps_from);
            l.eps_to = l.eps_to.or(self.eps_to);
        };
        match &mut cli.command {
            Command::Distance { p, q, .. } => {
                *p = p.take().or(self.p.clone());
                *q = q.take().or(self.q.clone());
            }
            Command::Density { p, grid, dirs } => {
                *p = p.take().or(self.p.clone());
                *grid = grid.or(self.grid);
                *dirs = dirs.or(self.dirs);
            }
            Command::BallVolume { p, ladder, ball, samples } => {
                *p = p.take().or(self.p.clone());
                fill_ladder(ladder);
                *ball = ball.or(self.ball);
                *samples = samples.or(self.samples);
            }
            Command::Flags { .. } => {}
            Command::Decompose { picker } => *picker = picker.or(self.picker),
            Command::Asvol { ladder } => fill_ladder(ladder),
            Command::Entropy { ladder, window } => {
                fill_ladder(ladder);
                *window = window.take().or(self.window.clone());
            }
            Command::Approximate { eps } => *eps = eps.or(self.eps.as_ref().and_then(|e| e.first().copied())),
            Command::FlagApprox { ladder } => fill_eps(ladder),
            Command::VerifyRatio { r_max } => *r_max = r_max.or(self.r_max),
            Command::VerifyIdentity { ladder, window, eps } => {
                fill_ladder(ladder);
                *window = window.take().or(self.window.clone());
                fill_eps(eps);
            }
        }
    }
}
