//! Generators for the stationary process families: linear filters of iid
//! innovations, functions of linear processes, autoregressive Lipschitz
//! models, intermittent-map Markov chains and independent
//! Metropolis–Hastings chains, plus an iid baseline.
//!
//! Every generator is a pure function of `(spec, seed, n)`: identical
//! inputs produce bit-identical windows, and replicates draw from
//! independent derived streams so they can be generated in any order.

mod arl;
mod intermittent;
mod linear;
mod metropolis;

pub use arl::{canonical_drift, gen_arl, ArlSpec};
pub use intermittent::{gen_intermittent, intermittent_map, IntermittentSpec};
pub use linear::{
    gen_function_of_linear, gen_linear, holder_spot_check, reconstruct_linear,
    FunctionOfLinearSpec, LinearSpec, Truncation,
};
pub use metropolis::{gen_metropolis, AcceptFn, BaseDist, MetropolisSpec};

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};

use crate::core::{SeedSpec, StreamRole};
use crate::error::{Error, Result};

/// Centered iid innovation distribution driving the linear and iterated
/// models.
///
/// All variants have mean zero. `StudentT` with `nu <= 2` has no finite
/// variance and is only intended for moment-condition stress tests; it is
/// flagged by [`InnovationDist::is_heavy_tailed`]. `Constant` is a
/// degenerate test-only stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InnovationDist {
    Gaussian { sigma: f64 },
    Rademacher,
    /// Uniform on `[a, b]` shifted by its midpoint so the mean is zero.
    Uniform { a: f64, b: f64 },
    StudentT { nu: f64 },
    /// Degenerate constant stream (test-only; not centered unless c = 0).
    Constant { c: f64 },
}

impl InnovationDist {
    pub fn standard_gaussian() -> Self {
        InnovationDist::Gaussian { sigma: 1.0 }
    }

    /// Variance, `None` when it does not exist (`StudentT` with `nu <= 2`).
    pub fn variance(&self) -> Option<f64> {
        match *self {
            InnovationDist::Gaussian { sigma } => Some(sigma * sigma),
            InnovationDist::Rademacher => Some(1.0),
            InnovationDist::Uniform { a, b } => Some((b - a) * (b - a) / 12.0),
            InnovationDist::StudentT { nu } => {
                (nu > 2.0).then(|| nu / (nu - 2.0))
            }
            InnovationDist::Constant { .. } => Some(0.0),
        }
    }

    pub fn is_heavy_tailed(&self) -> bool {
        matches!(*self, InnovationDist::StudentT { nu } if nu <= 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationDist::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::Argument(format!("gaussian sigma must be positive, got {sigma}")),
            ),
            InnovationDist::Uniform { a, b } if !(a < b && a.is_finite() && b.is_finite()) => Err(
                Error::Argument(format!("uniform bounds must satisfy a < b, got [{a}, {b}]")),
            ),
            InnovationDist::StudentT { nu } if !(nu > 0.0 && nu.is_finite()) => Err(
                Error::Argument(format!("student t degrees of freedom must be positive, got {nu}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha12Rng) -> f64 {
        match *self {
            InnovationDist::Gaussian { sigma } => {
                Normal::new(0.0, sigma).expect("validated").sample(rng)
            }
            InnovationDist::Rademacher => {
                if rng.random::<f64>() < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            InnovationDist::Uniform { a, b } => {
                a + (b - a) * rng.random::<f64>() - 0.5 * (a + b)
            }
            InnovationDist::StudentT { nu } => {
                StudentT::new(nu).expect("validated").sample(rng)
            }
            InnovationDist::Constant { c } => c,
        }
    }
}

/// A named scalar observable with exact evaluation; kept as data so process
/// specs round-trip through the config format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarFn {
    Identity,
    Square,
    Abs,
    Cos,
    Sin,
}

impl ScalarFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Identity => x,
            ScalarFn::Square => x * x,
            ScalarFn::Abs => x.abs(),
            ScalarFn::Cos => x.cos(),
            ScalarFn::Sin => x.sin(),
        }
    }

    /// Declared modulus-of-continuity data `w_h(u, M) <= C u^gamma M^alpha`.
    pub fn holder(&self) -> HolderData {
        match self {
            // |x^2 - y^2| <= 2M |x - y| on [-M, M].
            ScalarFn::Square => HolderData {
                gamma: 1.0,
                alpha: 1.0,
                c: 2.0,
            },
            // 1-Lipschitz functions.
            _ => HolderData {
                gamma: 1.0,
                alpha: 0.0,
                c: 1.0,
            },
        }
    }
}

/// Hölder modulus data: `w_h(u, M) <= C u^gamma M^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderData {
    pub gamma: f64,
    pub alpha: f64,
    pub c: f64,
}

/// Tagged description of one generator family with all parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProcessSpec {
    Iid { innovation: InnovationDist },
    Linear(LinearSpec),
    FunctionOfLinear(FunctionOfLinearSpec),
    Arl(ArlSpec),
    Intermittent(IntermittentSpec),
    Metropolis(MetropolisSpec),
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Iid { innovation } => innovation.validate(),
            ProcessSpec::Linear(s) => s.validate(),
            ProcessSpec::FunctionOfLinear(s) => s.validate(),
            ProcessSpec::Arl(s) => s.validate(),
            ProcessSpec::Intermittent(s) => s.validate(),
            ProcessSpec::Metropolis(s) => s.validate(),
        }
    }
}

/// The innovation window `eps_{1-J} .. eps_n` backing a linear window.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationWindow {
    /// Index of `values[0]`, i.e. `1 - J`.
    pub first_index: i64,
    pub values: Vec<f64>,
}

impl InnovationWindow {
    /// `eps_k`; panics if `k` is outside the stored range.
    pub fn at(&self, k: i64) -> f64 {
        self.values[usize::try_from(k - self.first_index).expect("index in range")]
    }
}

/// A finite centered sample path together with the innovation window that
/// produced it (for linear families) and its generating seed.
#[derive(Debug, Clone)]
pub struct TimeSeriesWindow {
    /// `X_1 .. X_n`.
    pub values: Vec<f64>,
    pub innovations: Option<InnovationWindow>,
    pub spec: ProcessSpec,
    pub seed: SeedSpec,
    /// Model-level centering constant subtracted from the raw observable.
    pub centering: f64,
    /// Coefficient truncation metadata, for truncated linear families.
    pub truncation: Option<Truncation>,
}

impl TimeSeriesWindow {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Length of the independent pre-pass used to estimate centering constants.
pub(crate) fn centering_prepass_len(n: usize) -> usize {
    (1usize << 16).max(16 * n)
}

/// Generate a window of length `n` for replicate `replicate` of
/// `master_seed`.
pub fn generate(
    spec: &ProcessSpec,
    master_seed: u64,
    replicate: u64,
    n: usize,
) -> Result<TimeSeriesWindow> {
    if n == 0 {
        return Err(Error::Argument("window length must be >= 1".into()));
    }
    spec.validate()?;
    let seed = SeedSpec::new(master_seed, replicate, StreamRole::Innovations);
    match spec {
        ProcessSpec::Iid { innovation } => {
            let id = LinearSpec::new(vec![1.0], *innovation)?;
            let mut w = linear::gen_linear(&id, seed, n)?;
            w.spec = spec.clone();
            Ok(w)
        }
        ProcessSpec::Linear(s) => linear::gen_linear(s, seed, n),
        ProcessSpec::FunctionOfLinear(s) => linear::gen_function_of_linear(s, seed, n),
        ProcessSpec::Arl(s) => arl::gen_arl(s, seed, n),
        ProcessSpec::Intermittent(s) => intermittent::gen_intermittent(s, seed, n),
        ProcessSpec::Metropolis(s) => metropolis::gen_metropolis(s, seed, n),
    }
}
