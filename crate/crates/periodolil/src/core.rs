//! Shared numeric primitives: frequencies, checkpoint schedules, the LIL
//! normalizer `sqrt(2 n ln ln n)` and seeded stream derivation.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A frequency `t` in radians, restricted to `[0, 2pi)`.
///
/// Frequencies constructed as rational multiples of pi or as Fourier-grid
/// indices remember their exact form, so `is_zero` / `is_pi` are exact
/// integer comparisons rather than floating-point ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Frequency {
    /// An arbitrary radian value in `[0, 2pi)`.
    Radians(f64),
    /// `t = num * pi / den`.
    RationalPi { num: u64, den: u64 },
    /// The Fourier frequency `t = 2 pi j / n`.
    Grid { j: u64, n: u64 },
}

impl Frequency {
    pub fn radians(t: f64) -> Result<Self> {
        if !t.is_finite() || !(0.0..2.0 * PI).contains(&t) {
            return Err(Error::Argument(format!(
                "frequency must lie in [0, 2pi), got {t}"
            )));
        }
        Ok(Frequency::Radians(t))
    }

    /// `t = num * pi / den`, e.g. `rational_pi(2, 3)` for `2pi/3`.
    pub fn rational_pi(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num >= 2 * den {
            return Err(Error::Argument(format!(
                "rational multiple {num}/{den} pi outside [0, 2pi)"
            )));
        }
        Ok(Frequency::RationalPi { num, den })
    }

    /// The `j`-th Fourier frequency of a length-`n` grid.
    pub fn grid(j: u64, n: u64) -> Result<Self> {
        if n == 0 || j >= n {
            return Err(Error::Argument(format!(
                "grid index {j}/{n} outside [0, n)"
            )));
        }
        Ok(Frequency::Grid { j, n })
    }

    /// The radian value of the frequency.
    pub fn value(&self) -> f64 {
        match *self {
            Frequency::Radians(t) => t,
            Frequency::RationalPi { num, den } => num as f64 * PI / den as f64,
            Frequency::Grid { j, n } => 2.0 * PI * j as f64 / n as f64,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Frequency::Radians(t) => t == 0.0,
            Frequency::RationalPi { num, .. } => num == 0,
            Frequency::Grid { j, .. } => j == 0,
        }
    }

    pub fn is_pi(&self) -> bool {
        match *self {
            Frequency::Radians(t) => t == PI,
            Frequency::RationalPi { num, den } => num == den,
            Frequency::Grid { j, n } => 2 * j == n,
        }
    }
}

/// Strictly increasing sample sizes at which the LIL statistic is recorded.
///
/// Every point must satisfy `n >= 3` so that `ln ln n` is positive; the
/// default schedule is dyadic, `{2^4, ..., 2^K}`, because below `n = 16`
/// the ratio `I_n / ln ln n` is numerically explosive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointSchedule {
    points: Vec<u64>,
}

impl CheckpointSchedule {
    pub fn new(points: Vec<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("empty checkpoint schedule".into()));
        }
        for w in points.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Argument(
                    "checkpoint schedule must be strictly increasing".into(),
                ));
            }
        }
        if points[0] < 3 {
            return Err(Error::Argument(
                "checkpoint sample sizes must satisfy n >= 3".into(),
            ));
        }
        Ok(CheckpointSchedule { points })
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn contains(&self, n: u64) -> bool {
        self.points.binary_search(&n).is_ok()
    }

    /// Largest sample size in the schedule.
    pub fn max_n(&self) -> u64 {
        *self.points.last().expect("schedule is nonempty")
    }
}

/// The dyadic schedule `{2^k : k_min <= k <= k_max}`.
///
/// `k_min >= 4` is required; see [`CheckpointSchedule`].
pub fn dyadic_checkpoints(k_min: u32, k_max: u32) -> Result<CheckpointSchedule> {
    if k_min < 4 {
        return Err(Error::Argument(format!(
            "dyadic schedule starts at 2^4 at the earliest, got k_min = {k_min}"
        )));
    }
    if k_min > k_max {
        return Err(Error::Argument(format!(
            "need k_min <= k_max, got {k_min} > {k_max}"
        )));
    }
    CheckpointSchedule::new((k_min..=k_max).map(|k| 1u64 << k).collect())
}

/// The LIL normalizer `sqrt(2 n ln ln n)`, natural logarithms throughout.
///
/// Defined for `n >= 3` only; `ln ln n <= 0` below that.
pub fn loglog_norm(n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "loglog_norm requires n >= 3, got {n}"
        )));
    }
    let ll = (n as f64).ln().ln();
    Ok((2.0 * n as f64 * ll).sqrt())
}

/// `ln ln n` itself, the LIL denominator.
pub fn loglog(n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("ln ln n requires n >= 3, got {n}")));
    }
    Ok((n as f64).ln().ln())
}

/// Role tag distinguishing the independent sub-streams a single experiment
/// replicate draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamRole {
    /// The innovation / driving-noise stream of a generator.
    Innovations,
    /// Whitening draws used to forget the initial condition.
    BurnIn,
    /// The independent pre-pass used to estimate centering constants.
    Centering,
    /// Monte Carlo futures in nested conditional-expectation estimators.
    Futures(u32),
    /// Anything else; callers pick distinct codes.
    Aux(u32),
}

impl StreamRole {
    fn code(self) -> u64 {
        match self {
            StreamRole::Innovations => 1,
            StreamRole::BurnIn => 2,
            StreamRole::Centering => 3,
            StreamRole::Futures(k) => 0x1_0000_0000 | k as u64,
            StreamRole::Aux(k) => 0x2_0000_0000 | k as u64,
        }
    }
}

/// Identifies one pseudo-random stream: a master seed plus a
/// `(replicate, role)` stream id.
///
/// Derivation is a pure function, so replicates can be generated in any
/// order and in parallel; distinct `(master_seed, replicate, role)` triples
/// yield statistically independent ChaCha streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replicate: u64,
    pub role: StreamRole,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replicate: u64, role: StreamRole) -> Self {
        SeedSpec {
            master_seed,
            replicate,
            role,
        }
    }

    pub fn with_role(&self, role: StreamRole) -> Self {
        SeedSpec { role, ..*self }
    }

    pub fn with_replicate(&self, replicate: u64) -> Self {
        SeedSpec { replicate, ..*self }
    }

    /// Derives the RNG for this stream (counter-based splitting).
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rep = self.replicate ^ 0xA076_1D64_78BD_642F;
        let mut role = self.role.code() ^ 0xE703_7ED1_A0B4_28DB;
        let mut state = self.master_seed ^ splitmix64(&mut rep);
        state = state.wrapping_add(splitmix64(&mut role));
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}

/// SplitMix64 step; the standard 64-bit finalizer used for stream splitting.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
