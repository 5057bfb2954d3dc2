//! Independent Metropolis–Hastings chain with kernel
//! `T(x, A) = p(x) delta_x(A) + (1 - p(x)) nu(A)`; its invariant law is
//! `mu(dx) = nu(dx) / (theta (1 - p(x)))` with `theta = int 1/(1-p) dnu`,
//! and the chain is reversible.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{centering_prepass_len, ProcessSpec, ScalarFn, TimeSeriesWindow};
use crate::core::{SeedSpec, StreamRole};
use crate::error::{Error, Result};

/// Holding probability `p : S -> [0, 1]`, kept as data for config
/// round-trips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AcceptFn {
    Const { p: f64 },
    /// `p(x) = |x| / (1 + |x|)`.
    AbsRatio,
}

impl AcceptFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            AcceptFn::Const { p } => p,
            AcceptFn::AbsRatio => x.abs() / (1.0 + x.abs()),
        }
    }
}

/// The base (proposal) measure `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BaseDist {
    Uniform { a: f64, b: f64 },
    Gaussian { sigma: f64 },
}

impl BaseDist {
    pub fn sample(&self, rng: &mut ChaCha12Rng) -> f64 {
        match *self {
            BaseDist::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            BaseDist::Gaussian { sigma } => Normal::new(0.0, sigma).expect("validated").sample(rng),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseDist::Uniform { a, b } if !(a < b) => Err(Error::Argument(format!(
                "uniform base measure needs a < b, got [{a}, {b}]"
            ))),
            BaseDist::Gaussian { sigma } if !(sigma > 0.0) => Err(Error::Argument(format!(
                "gaussian base measure needs sigma > 0, got {sigma}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Parameters of the independent Metropolis–Hastings chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetropolisSpec {
    pub p: AcceptFn,
    pub nu: BaseDist,
    pub observable: ScalarFn,
    pub burn_in: usize,
}

impl MetropolisSpec {
    pub fn validate(&self) -> Result<()> {
        self.nu.validate()?;
        if let AcceptFn::Const { p } = self.p {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Argument(format!(
                    "constant holding probability must lie in [0, 1), got {p}"
                )));
            }
        }
        Ok(())
    }
}

fn check_p(p: f64, step: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Generation(format!(
            "holding probability {p} outside [0, 1] at step {step}"
        )));
    }
    // theta = int 1/(1-p) dnu must be finite; a p this close to 1 makes the
    // Monte Carlo estimate of theta blow up.
    if p >= 1.0 - 1e-12 {
        return Err(Error::Generation(format!(
            "holding probability {p} at step {step}: theta estimate unbounded"
        )));
    }
    Ok(p)
}

fn run_chain(spec: &MetropolisSpec, seed: SeedSpec, n: usize, skip: usize) -> Result<Vec<f64>> {
    let mut rng = seed.rng();
    let mut x = spec.nu.sample(&mut rng);
    let mut out = Vec::with_capacity(n);
    for step in 0..skip + n {
        let p = check_p(spec.p.eval(x), step)?;
        let u: f64 = rng.random();
        if u >= p {
            x = spec.nu.sample(&mut rng);
        }
        if step >= skip {
            out.push(x);
        }
    }
    Ok(out)
}

/// Run the chain from a `nu` draw with burn-in and return the centered
/// observable window.
pub fn gen_metropolis(
    spec: &MetropolisSpec,
    seed: SeedSpec,
    n: usize,
) -> Result<TimeSeriesWindow> {
    spec.validate()?;
    let prepass = centering_prepass_len(n);
    let pre = run_chain(spec, seed.with_role(StreamRole::Centering), prepass, spec.burn_in)?;
    let mean = pre
        .iter()
        .map(|&x| spec.observable.eval(x))
        .sum::<f64>()
        / prepass as f64;

    let states = run_chain(spec, seed, n, spec.burn_in)?;
    Ok(TimeSeriesWindow {
        values: states
            .iter()
            .map(|&x| spec.observable.eval(x) - mean)
            .collect(),
        innovations: None,
        spec: ProcessSpec::Metropolis(*spec),
        seed,
        centering: mean,
        truncation: None,
    })
}

/// Raw chain states (uncentered), for kernel diagnostics.
pub(crate) fn chain_states(
    spec: &MetropolisSpec,
    seed: SeedSpec,
    n: usize,
) -> Result<Vec<f64>> {
    run_chain(spec, seed, n, spec.burn_in)
}
