//! Finite Fourier transform, periodogram and the LIL running statistic.
//!
//! The transform convention is `S_n(t) = sum_{k=1}^n e^{ikt} X_k` (phase
//! index starting at `k = 1`) and the periodogram is normalized as
//! `I_n(t) = |S_n(t)|^2 / (2 pi n)`, so that `limsup I_n(t) / ln ln n`
//! compares directly against the spectral density `f(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::core::{loglog, CheckpointSchedule, Frequency};
use crate::error::{Error, Result};

/// Kahan-compensated accumulator for one f64 stream.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Batch finite Fourier transform `S_n(t)` with compensated summation.
///
/// Phases are evaluated directly per term (no recurrence), which makes this
/// the slow-but-accurate reference path; the streaming path below uses a
/// phase recurrence instead.
pub fn dft(window: &[f64], t: Frequency) -> Result<Complex64> {
    if window.is_empty() {
        return Err(Error::Argument("dft of an empty window".into()));
    }
    let tv = t.value();
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    for (k, &x) in window.iter().enumerate() {
        let phase = (k as f64 + 1.0) * tv;
        let (s, c) = phase.sin_cos();
        re.add(c * x);
        im.add(s * x);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// `S_n(t_j)` at every Fourier frequency `t_j = 2 pi j / n`, `j = 0..n-1`,
/// computed with an O(n log n) fast transform.
///
/// Index `j` carries the `k = 1` phase convention, i.e. the result equals
/// `dft(window, Frequency::grid(j, n))`.
pub fn dft_grid(window: &[f64]) -> Result<Vec<Complex64>> {
    let n = window.len();
    if n == 0 {
        return Err(Error::Argument("dft_grid of an empty window".into()));
    }
    let mut buf: Vec<Complex64> = window
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    // The unnormalized inverse FFT is sum_{m=0}^{n-1} e^{+2pi i j m / n} x_m;
    // shifting the window start from k=0 to k=1 contributes e^{i t_j}.
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    for (j, v) in buf.iter_mut().enumerate() {
        let t = 2.0 * PI * j as f64 / n as f64;
        let (s, c) = t.sin_cos();
        *v *= Complex64::new(c, s);
    }
    Ok(buf)
}

/// Streaming accumulator for `S_n(t)` at one frequency.
///
/// Each update multiplies a unit phasor by `e^{it}`; the phasor is
/// re-synchronized against direct evaluation every `RESYNC_PERIOD` steps to
/// keep the drift of a `2^20`-step run below `1e-8`.
#[derive(Debug, Clone)]
pub struct DftState {
    t: Frequency,
    n: u64,
    re: KahanSum,
    im: KahanSum,
    rot: Complex64,
    phase: Complex64,
}

const RESYNC_PERIOD: u64 = 1 << 12;

impl DftState {
    pub fn new(t: Frequency) -> Self {
        let tv = t.value();
        let (s, c) = tv.sin_cos();
        DftState {
            t,
            n: 0,
            re: KahanSum::default(),
            im: KahanSum::default(),
            rot: Complex64::new(c, s),
            // phase carries e^{i n t}; the first update multiplies by rot.
            phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn frequency(&self) -> Frequency {
        self.t
    }

    /// Number of samples absorbed so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Current accumulator value `S_n(t)`.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    /// Absorb the next sample: `n -> n+1`, `s -> s + e^{i(n+1)t} x`.
    pub fn update(&mut self, x: f64) {
        self.n += 1;
        if self.n % RESYNC_PERIOD == 0 {
            let phase = (self.n as f64 * self.t.value()) % (2.0 * PI);
            let (s, c) = phase.sin_cos();
            self.phase = Complex64::new(c, s);
        } else {
            self.phase *= self.rot;
        }
        self.re.add(self.phase.re * x);
        self.im.add(self.phase.im * x);
    }

    pub fn update_many(&mut self, xs: &[f64]) {
        for &x in xs {
            self.update(x);
        }
    }
}

/// The periodogram `I_n(t) = |s|^2 / (2 pi n)` for `s = S_n(t)`.
pub fn periodogram(s: Complex64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("periodogram needs n >= 1".into()));
    }
    Ok(s.norm_sqr() / (2.0 * PI * n as f64))
}

/// One recorded LIL checkpoint.
#[derive(Debug, Clone, Copy)]
pub struct LilCheckpoint {
    pub n: u64,
    pub s: Complex64,
    /// `I_n(t)`.
    pub periodogram: f64,
    /// `I_n(t) / ln ln n`, the quantity whose limsup identifies `f(t)`.
    pub loglog_ratio: f64,
    /// `sum Y_k(t) / sqrt(2 n ln ln n)` where `Y_k = (cos(kt) X_k, sin(kt) X_k)'`.
    pub vector: [f64; 2],
    /// Running maximum of `loglog_ratio` up to this checkpoint.
    pub running_max: f64,
}

/// Per-frequency running state of the LIL experiment: checkpoint history of
/// `I_n(t) / ln ln n` and its running maximum.
#[derive(Debug, Clone)]
pub struct LilTracker {
    t: Frequency,
    schedule: CheckpointSchedule,
    checkpoints: Vec<LilCheckpoint>,
    running_max: f64,
}

impl LilTracker {
    pub fn new(t: Frequency, schedule: CheckpointSchedule) -> Self {
        LilTracker {
            t,
            schedule,
            checkpoints: Vec::new(),
            running_max: f64::NEG_INFINITY,
        }
    }

    pub fn frequency(&self) -> Frequency {
        self.t
    }

    pub fn checkpoints(&self) -> &[LilCheckpoint] {
        &self.checkpoints
    }

    /// Running maximum of the recorded ratios, `NEG_INFINITY` before the
    /// first checkpoint.
    pub fn running_max(&self) -> f64 {
        self.running_max
    }

    /// Record a checkpoint from the streaming state.
    ///
    /// Returns `false` (checkpoint skipped) when `state.n` is below the
    /// schedule start or not a schedule point. Since
    /// `(sum cos(kt) X_k)^2 + (sum sin(kt) X_k)^2 = |S_n(t)|^2`, the stored
    /// 2-D vector is just `(Re S_n, Im S_n)` rescaled, and its squared norm
    /// equals `pi I_n(t) / ln ln n` identically.
    pub fn checkpoint(&mut self, state: &DftState) -> Result<bool> {
        if state.n() < 16 || !self.schedule.contains(state.n()) {
            return Ok(false);
        }
        let n = state.n();
        let s = state.value();
        let i_n = periodogram(s, n)?;
        let ll = loglog(n)?;
        let norm = (2.0 * n as f64 * ll).sqrt();
        let cp = LilCheckpoint {
            n,
            s,
            periodogram: i_n,
            loglog_ratio: i_n / ll,
            vector: [s.re / norm, s.im / norm],
            running_max: (i_n / ll).max(self.running_max),
        };
        self.running_max = cp.running_max;
        self.checkpoints.push(cp);
        Ok(true)
    }
}
