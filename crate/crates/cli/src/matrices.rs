//! Named test-matrix generators and sketch settings shared by the subcommands.

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use cqrrpt::cqrrpt::CqrrptConfig;
use cqrrpt::sketching::SketchFamily;
use cqrrpt::testmat::{
    gen_exact_rank, gen_gaussian, gen_high_coherence, gen_kahan, gen_spectral,
    high_coherence_spectrum, SpectrumSpec, HIGH_COHERENCE_SCALE,
};
use cqrrpt::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    Gaussian,
    ExactRank,
    /// Flat leading tenth, then polynomial decay to `1/cond`.
    Decay,
    Staircase,
    HighCoherence,
    Kahan,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Gaussian => "gaussian",
            MatrixKind::ExactRank => "exact-rank",
            MatrixKind::Decay => "decay",
            MatrixKind::Staircase => "staircase",
            MatrixKind::HighCoherence => "high-coherence",
            MatrixKind::Kahan => "kahan",
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct MatrixArgs {
    #[arg(long, value_enum, default_value = "staircase")]
    pub matrix: MatrixKind,
    /// Rows (ignored for kahan, which is square).
    #[arg(long, default_value_t = 2048)]
    pub m: usize,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Rank of exact-rank matrices.
    #[arg(long, default_value_t = 10)]
    pub rank: usize,
    /// Condition number of decay matrices.
    #[arg(long, default_value_t = 1e10)]
    pub cond: f64,
    /// Row scaling of high-coherence matrices.
    #[arg(long, default_value_t = HIGH_COHERENCE_SCALE)]
    pub scale: f64,
    /// Kahan angle.
    #[arg(long, default_value_t = 0.285)]
    pub theta: f64,
}

impl MatrixArgs {
    pub fn build(&self, seed: u64) -> Result<DenseMatrix> {
        let (m, n) = (self.m, self.n);
        Ok(match self.matrix {
            MatrixKind::Gaussian => gen_gaussian(m, n, seed),
            MatrixKind::ExactRank => {
                if self.rank > n.min(m) {
                    bail!("rank {} exceeds min(m, n)", self.rank);
                }
                gen_exact_rank(m, n, self.rank, seed)
            }
            MatrixKind::Decay => {
                gen_spectral(m, n, &SpectrumSpec::PolynomialDecay { cond: self.cond }, seed)?
            }
            MatrixKind::Staircase => gen_spectral(m, n, &SpectrumSpec::staircase(), seed)?,
            MatrixKind::HighCoherence => gen_high_coherence(m, n, self.scale, seed)?,
            MatrixKind::Kahan => gen_kahan(n, self.theta)?,
        })
    }

    /// Singular values when the generator fixes them exactly.
    pub fn known_spectrum(&self, seed: u64) -> Result<Option<Vec<f64>>> {
        Ok(match self.matrix {
            MatrixKind::Decay => {
                Some(SpectrumSpec::PolynomialDecay { cond: self.cond }.values(self.n)?)
            }
            MatrixKind::Staircase => Some(SpectrumSpec::staircase().values(self.n)?),
            MatrixKind::HighCoherence => {
                Some(high_coherence_spectrum(self.m, self.n, self.scale, seed)?)
            }
            _ => None,
        })
    }

    /// Short comma-free label, e.g. `staircase-16384x500`.
    pub fn descriptor(&self) -> String {
        let m = if self.matrix == MatrixKind::Kahan { self.n } else { self.m };
        format!("{}-{}x{}", self.matrix.name(), m, self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Gaussian,
    Saso,
    Srft,
}

#[derive(Clone, Debug, Args)]
pub struct SketchArgs {
    #[arg(long, value_enum, default_value = "saso")]
    pub family: FamilyKind,
    /// Sketch size ratio, d = ceil(gamma * n).
    #[arg(long, default_value_t = 1.25)]
    pub gamma: f64,
    /// Nonzeros per SASO column.
    #[arg(long, default_value_t = 4)]
    pub nnz: usize,
}

impl SketchArgs {
    pub fn family(&self) -> SketchFamily {
        match self.family {
            FamilyKind::Gaussian => SketchFamily::Gaussian,
            FamilyKind::Saso => SketchFamily::Saso { nnz_per_col: self.nnz },
            FamilyKind::Srft => SketchFamily::Srft,
        }
    }

    /// The `nnz` column of the output table; 0 for dense families.
    pub fn nnz_label(&self) -> usize {
        match self.family {
            FamilyKind::Saso => self.nnz,
            _ => 0,
        }
    }

    pub fn config(&self, seed: u64) -> Result<CqrrptConfig> {
        let cfg = CqrrptConfig {
            gamma: self.gamma,
            family: self.family(),
            seed,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
