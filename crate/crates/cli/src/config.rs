use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use quadvar::generators::GeneratorSpec;
use quadvar::recovery::RecoveryConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Layer,
    Sidon,
    Pullback,
    Random,
}

/// Every tunable of every command. Fields left unset fall back to the config
/// file and then to the command default.
#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    /// Codimension of the variety, or of the pullback subspace.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub lambda_dim: Option<usize>,
    #[arg(long)]
    pub t_dim: Option<usize>,
    /// Codomain dimension of the pullback quadratic map.
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    /// Fraction of elements whose membership is flipped.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub tau_scale: Option<f64>,
    #[arg(long)]
    pub k_cap: Option<f64>,
    #[arg(long)]
    pub span_support: Option<f64>,
    #[arg(long)]
    pub c0_min: Option<f64>,
    #[arg(long)]
    pub d_out: Option<usize>,
    #[arg(long)]
    pub max_elements: Option<usize>,

    /// Compare against the direct enumeration oracles.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub oracle: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub config10: Option<bool>,
    /// Monte Carlo samples for `prob`; 0 skips the estimate.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub m_max: Option<u32>,
    #[arg(long)]
    pub n_max: Option<u32>,

    #[arg(long)]
    pub out: Option<String>,
    /// Where `recover` writes the variety as a set file.
    #[arg(long)]
    pub variety_out: Option<String>,
}

macro_rules! take_missing {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    /// Fills fields missing here from `file`; flags win.
    pub fn merge_file(mut self, file: &ExperimentConfig) -> Self {
        take_missing!(self, file; kind, p, n, d, lambda_dim, t_dim, h, density, noise, seed,
            eta, xi, tau_scale, k_cap, span_support, c0_min, d_out, max_elements,
            oracle, config10, samples, m_max, n_max, out, variety_out);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn generator(&self) -> GeneratorSpec {
        let p = self.p.unwrap_or(3);
        let n = self.n.unwrap_or(6);
        let seed = self.seed();
        let base = match self.kind.unwrap_or(Kind::Layer) {
            Kind::Layer => GeneratorSpec::LayerVariety {
                p,
                n,
                d: self.d.unwrap_or(1),
                lambda_dim: self.lambda_dim.unwrap_or(0),
                seed,
            },
            Kind::Sidon => GeneratorSpec::SidonSum { p, n, t_dim: self.t_dim.unwrap_or(2) },
            Kind::Pullback => GeneratorSpec::PolynomialPullback {
                p,
                n,
                h: self.h.unwrap_or(3),
                d: self.d.unwrap_or(1),
                density_a: self.density.unwrap_or(0.9),
                seed,
            },
            Kind::Random => GeneratorSpec::Random { p, n, density: self.density.unwrap_or(1.0 / 3.0), seed },
        };
        match self.noise {
            Some(noise) if noise > 0.0 => {
                GeneratorSpec::Perturbed { base: Box::new(base), noise, seed: seed.wrapping_add(1) }
            }
            _ => base,
        }
    }

    pub fn recovery(&self) -> RecoveryConfig {
        let mut c = RecoveryConfig { seed: self.seed(), d_out: self.d_out, ..Default::default() };
        if let Some(x) = self.eta {
            c.eta = x;
        }
        if let Some(x) = self.xi {
            c.xi = x;
        }
        if let Some(x) = self.tau_scale {
            c.tau_scale = x;
        }
        if let Some(x) = self.k_cap {
            c.k_cap = x;
        }
        if let Some(x) = self.span_support {
            c.span_support = x;
        }
        if let Some(x) = self.c0_min {
            c.c0_min = x;
        }
        if let Some(x) = self.max_elements {
            c.max_elements = x;
        }
        c
    }
}
