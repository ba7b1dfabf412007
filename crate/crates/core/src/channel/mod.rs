//! PLC channel models.
//!
//! Two complementary routes to an end-to-end response:
//!
//! - the multipath echo model: a sum of delayed, attenuated paths giving
//!   `H(f) = Σ g_i(f)·e^{−α(f)·v_p·θ_i}·e^{−j2πf·θ_i}` and its
//!   time-domain synthesis;
//! - the deterministic two-port route: ABCD transmission matrices of line
//!   sections cascaded by matrix product, with grounding represented as a
//!   bridged-tap companion section at the main panel.
//!
//! Per-km path-loss bands and log-normal gain statistics round out the
//! planning side.

mod io;
mod pathloss;
mod stochastic;
mod twoport;

pub use io::{parse_chain_file, parse_channel_file, write_impulse_response, write_transfer_function};
pub use pathloss::{PathLossTable, RangeSelector, SegmentClass};
pub use stochastic::{
    cascade_gain_monte_carlo, ks_critical_value, ks_normality_statistic, sample_lognormal_gains,
    CascadeGainSample, FactorDistribution, LogNormalChannelModel,
};
pub use twoport::{
    attach_companion, cascade, endtoend_gain, line_section, line_section_with, CompanionTap,
    PropagationModel, Termination, TwoPortNetwork,
};

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("duration {duration_s} s is shorter than the maximum path delay {max_delay_s} s")]
    DurationTooShort { duration_s: f64, max_delay_s: f64 },
    #[error("frequency grids do not match")]
    FrequencyGridMismatch,
    #[error("characteristic impedance must be nonzero")]
    ZeroCharacteristicImpedance,
    #[error("companion tap input impedance is zero (short at panel) at {freq_hz} Hz")]
    ShortAtPanel { freq_hz: f64 },
    #[error("degenerate transfer denominator at {freq_hz} Hz")]
    DegenerateDenominator { freq_hz: f64 },
    #[error("unknown path-loss segment class {0:?}")]
    UnknownClass(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Attenuation coefficient `α(f) = a0 + a1·f^k` in nepers per meter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attenuation {
    pub a0: f64,
    pub a1: f64,
    pub k: f64,
}

impl Attenuation {
    pub const NONE: Attenuation = Attenuation {
        a0: 0.0,
        a1: 0.0,
        k: 1.0,
    };

    pub fn new(a0: f64, a1: f64, k: f64) -> Result<Self, ChannelError> {
        if !(a0 >= 0.0) || !(a1 >= 0.0) {
            return Err(ChannelError::InvalidParameter(
                "attenuation coefficients must be non-negative".into(),
            ));
        }
        Ok(Attenuation { a0, a1, k })
    }

    /// Nepers per meter at frequency `f`.
    pub fn at(&self, f_hz: f64) -> f64 {
        self.a0 + self.a1 * f_hz.powf(self.k)
    }
}

/// Per-path complex gain: a constant or a table interpolated linearly in
/// frequency (clamped outside the tabulated band).
#[derive(Debug, Clone, PartialEq)]
pub enum PathGain {
    Constant(Complex64),
    Tabulated(Vec<(f64, Complex64)>),
}

impl PathGain {
    pub fn at(&self, f_hz: f64) -> Complex64 {
        match self {
            PathGain::Constant(g) => *g,
            PathGain::Tabulated(points) => {
                if points.is_empty() {
                    return Complex64::new(0.0, 0.0);
                }
                if f_hz <= points[0].0 {
                    return points[0].1;
                }
                if f_hz >= points[points.len() - 1].0 {
                    return points[points.len() - 1].1;
                }
                let idx = points.partition_point(|(f, _)| *f <= f_hz);
                let (f0, g0) = points[idx - 1];
                let (f1, g1) = points[idx];
                let t = (f_hz - f0) / (f1 - f0);
                g0 + (g1 - g0) * t
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoPath {
    pub gain: PathGain,
    /// θ_i in seconds.
    pub delay_s: f64,
}

/// The multipath echo channel of the statistical PLC model.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    paths: Vec<EchoPath>,
    pub attenuation: Attenuation,
    /// Propagation velocity v_p in m/s; `v_p·θ_i` is the path length.
    pub velocity_m_per_s: f64,
}

impl MultipathChannel {
    pub fn new(
        paths: Vec<EchoPath>,
        attenuation: Attenuation,
        velocity_m_per_s: f64,
    ) -> Result<Self, ChannelError> {
        if paths.is_empty() {
            return Err(ChannelError::InvalidChannel("at least one path required".into()));
        }
        for (i, p) in paths.iter().enumerate() {
            if !(p.delay_s >= 0.0) || !p.delay_s.is_finite() {
                return Err(ChannelError::InvalidChannel(format!(
                    "path {i} delay must be finite and >= 0, got {}",
                    p.delay_s
                )));
            }
        }
        if !(velocity_m_per_s > 0.0) {
            return Err(ChannelError::InvalidChannel(
                "propagation velocity must be positive".into(),
            ));
        }
        Ok(MultipathChannel {
            paths,
            attenuation,
            velocity_m_per_s,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[EchoPath] {
        &self.paths
    }

    pub fn max_delay_s(&self) -> f64 {
        self.paths.iter().map(|p| p.delay_s).fold(0.0, f64::max)
    }
}

/// `H(f) = Σ_i g_i(f)·e^{−α(f)·v_p·θ_i}·e^{−j2πf·θ_i}` at each requested
/// frequency.
pub fn transfer_function(ch: &MultipathChannel, freqs: &[f64]) -> Vec<Complex64> {
    freqs
        .iter()
        .map(|&f| {
            let alpha = ch.attenuation.at(f);
            ch.paths
                .iter()
                .map(|p| {
                    let amp = (-alpha * ch.velocity_m_per_s * p.delay_s).exp();
                    let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * p.delay_s);
                    p.gain.at(f) * amp * phase
                })
                .sum()
        })
        .collect()
}

/// Band-edge window applied to the spectrum before time-domain synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    None,
    /// Flat up to `(1−rolloff)·f_nyquist`, raised-cosine taper to zero at
    /// the Nyquist edge.
    RaisedCosine { rolloff: f64 },
}

impl Window {
    fn gain(&self, f: f64, f_nyquist: f64) -> f64 {
        match *self {
            Window::None => 1.0,
            Window::RaisedCosine { rolloff } => {
                let edge = (1.0 - rolloff) * f_nyquist;
                if f <= edge {
                    1.0
                } else if f >= f_nyquist {
                    0.0
                } else {
                    let t = (f - edge) / (f_nyquist - edge);
                    0.5 * (1.0 + (std::f64::consts::PI * t).cos())
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Window::None => "none".into(),
            Window::RaisedCosine { rolloff } => format!("raised_cosine(rolloff={rolloff})"),
        }
    }
}

/// Sampled impulse response together with the spectrum that was inverted,
/// so that the discrete Parseval identity is checkable as-is.
#[derive(Debug, Clone)]
pub struct ImpulseResponse {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    /// Windowed single-sided spectrum extended to the full conjugate-
    /// symmetric DFT grid.
    pub spectrum: Vec<Complex64>,
    pub window: Window,
}

impl ImpulseResponse {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// `Σ h² − (1/n)·Σ|H|²`, relative to the signal energy.
    pub fn parseval_residual(&self) -> f64 {
        let energy_t: f64 = self.samples.iter().map(|h| h * h).sum();
        let energy_f: f64 =
            self.spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.spectrum.len() as f64;
        (energy_t - energy_f).abs() / energy_t.max(f64::MIN_POSITIVE)
    }
}

/// Synthesizes `h(t)` by inverse DFT of the transfer function evaluated
/// on the conjugate-symmetric grid, with the default raised-cosine
/// band-edge window (roll-off 0.1).
pub fn impulse_response(
    ch: &MultipathChannel,
    sample_rate_hz: f64,
    duration_s: f64,
) -> Result<ImpulseResponse, ChannelError> {
    impulse_response_with(ch, sample_rate_hz, duration_s, Window::RaisedCosine { rolloff: 0.1 })
}

pub fn impulse_response_with(
    ch: &MultipathChannel,
    sample_rate_hz: f64,
    duration_s: f64,
    window: Window,
) -> Result<ImpulseResponse, ChannelError> {
    if !(sample_rate_hz > 0.0) || !(duration_s > 0.0) {
        return Err(ChannelError::InvalidParameter(
            "sample rate and duration must be positive".into(),
        ));
    }
    let max_delay = ch.max_delay_s();
    if duration_s < max_delay {
        return Err(ChannelError::DurationTooShort {
            duration_s,
            max_delay_s: max_delay,
        });
    }
    let n = (sample_rate_hz * duration_s).round() as usize;
    if n < 2 {
        return Err(ChannelError::InvalidParameter(
            "duration × sample rate must give at least 2 samples".into(),
        ));
    }
    let df = sample_rate_hz / n as f64;
    let f_nyq = sample_rate_hz / 2.0;
    let half: Vec<f64> = (0..=n / 2).map(|k| k as f64 * df).collect();
    let mut h_half = transfer_function(ch, &half);
    for (k, h) in h_half.iter_mut().enumerate() {
        *h *= window.gain(half[k], f_nyq);
    }
    synthesize_from_half_spectrum(h_half, n, sample_rate_hz, window)
}

/// Shared inverse-DFT synthesis used by both the multipath and the
/// two-port routes.
pub(crate) fn synthesize_from_half_spectrum(
    mut h_half: Vec<Complex64>,
    n: usize,
    sample_rate_hz: f64,
    window: Window,
) -> Result<ImpulseResponse, ChannelError> {
    // real output needs conjugate symmetry; Nyquist and DC bins real
    if n % 2 == 0 {
        let last = h_half.len() - 1;
        h_half[last] = Complex64::new(h_half[last].re, 0.0);
    }
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    for (k, h) in h_half.iter().enumerate() {
        spectrum[k] = *h;
        if k > 0 && k < n - k {
            spectrum[n - k] = h.conj();
        }
    }
    let mut buf = spectrum.clone();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let samples: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();
    Ok(ImpulseResponse {
        samples,
        sample_rate_hz,
        spectrum,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn const_path(g: f64, delay_s: f64) -> EchoPath {
        EchoPath {
            gain: PathGain::Constant(Complex64::new(g, 0.0)),
            delay_s,
        }
    }

    #[test]
    fn single_unit_path_gives_flat_response() {
        let ch = MultipathChannel::new(vec![const_path(1.0, 0.0)], Attenuation::NONE, 2.0e8)
            .unwrap();
        let freqs = [0.0, 1e5, 1e6, 3e7];
        for h in transfer_function(&ch, &freqs) {
            assert!((h - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn two_path_null_and_peak() {
        // equal half-gains, 1 µs differential delay: null at 500 kHz,
        // full recombination at 1 MHz
        let ch = MultipathChannel::new(
            vec![const_path(0.5, 0.0), const_path(0.5, 1e-6)],
            Attenuation::NONE,
            2.0e8,
        )
        .unwrap();
        let h = transfer_function(&ch, &[5e5, 1e6]);
        assert!(h[0].norm() < 1e-12, "|H(500 kHz)| = {}", h[0].norm());
        assert!((h[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_naive_summation_oracle() {
        let ch = MultipathChannel::new(
            vec![
                EchoPath { gain: PathGain::Constant(Complex64::new(0.6, 0.1)), delay_s: 0.3e-6 },
                EchoPath { gain: PathGain::Constant(Complex64::new(-0.25, 0.02)), delay_s: 1.1e-6 },
                EchoPath { gain: PathGain::Constant(Complex64::new(0.1, -0.3)), delay_s: 2.7e-6 },
            ],
            Attenuation::new(1e-5, 3e-12, 0.9).unwrap(),
            1.8e8,
        )
        .unwrap();
        let freqs: Vec<f64> = (0..40).map(|i| 1e4 + i as f64 * 7.3e5).collect();
        let h = transfer_function(&ch, &freqs);
        for (idx, &f) in freqs.iter().enumerate() {
            // independently coded summation
            let mut acc = Complex64::new(0.0, 0.0);
            for p in ch.paths() {
                let g = match &p.gain {
                    PathGain::Constant(c) => *c,
                    _ => unreachable!(),
                };
                let alpha = 1e-5 + 3e-12 * f.powf(0.9);
                let e = (-alpha * 1.8e8 * p.delay_s).exp();
                let ph = -2.0 * std::f64::consts::PI * f * p.delay_s;
                acc += g * e * Complex64::new(ph.cos(), ph.sin());
            }
            assert!((h[idx] - acc).norm() < 1e-12);
        }
    }

    #[test]
    fn linear_in_path_gains() {
        let mk = |scale: f64| {
            MultipathChannel::new(
                vec![const_path(0.4 * scale, 0.2e-6), const_path(0.3 * scale, 0.9e-6)],
                Attenuation::new(0.0, 1e-11, 1.0).unwrap(),
                2.0e8,
            )
            .unwrap()
        };
        let freqs: Vec<f64> = (1..20).map(|i| i as f64 * 1e6).collect();
        let h1 = transfer_function(&mk(1.0), &freqs);
        let h2 = transfer_function(&mk(2.0), &freqs);
        for (a, b) in h1.iter().zip(&h2) {
            assert!((b - a * 2.0).norm() < 1e-12);
        }
    }

    #[test]
    fn tabulated_gain_interpolates_and_clamps() {
        let gain = PathGain::Tabulated(vec![
            (1e6, Complex64::new(1.0, 0.0)),
            (2e6, Complex64::new(0.0, 1.0)),
        ]);
        assert!((gain.at(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((gain.at(3e6) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let mid = gain.at(1.5e6);
        assert!((mid - Complex64::new(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn impulse_at_sample_three_without_window() {
        let fs = 1e6;
        let ch = MultipathChannel::new(
            vec![const_path(1.0, 3.0 / fs)],
            Attenuation::NONE,
            2.0e8,
        )
        .unwrap();
        let ir = impulse_response_with(&ch, fs, 64.0 / fs, Window::None).unwrap();
        for (t, &h) in ir.samples.iter().enumerate() {
            if t == 3 {
                assert!((h - 1.0).abs() < 1e-9, "h[3] = {h}");
            } else {
                assert!(h.abs() < 1e-9, "h[{t}] = {h}");
            }
        }
    }

    #[test]
    fn windowed_peaks_at_path_delays() {
        let fs = 4e6;
        let ch = MultipathChannel::new(
            vec![const_path(1.0, 8.0 / fs), const_path(0.5, 33.0 / fs)],
            Attenuation::NONE,
            2.0e8,
        )
        .unwrap();
        let ir = impulse_response(&ch, fs, 128.0 / fs).unwrap();
        // direct peak search oracle
        let argmax = ir
            .samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 8);
        let second = ir.samples[30..37]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0
            + 30;
        assert_eq!(second, 33);
    }

    #[test]
    fn parseval_on_random_channels() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..5 {
            let n_paths = rng.random_range(1..6);
            let fs = 2e6;
            let paths = (0..n_paths)
                .map(|_| EchoPath {
                    gain: PathGain::Constant(Complex64::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    )),
                    delay_s: rng.random_range(0.0..20.0) / fs,
                })
                .collect();
            let ch = MultipathChannel::new(
                paths,
                Attenuation::new(0.0, 1e-12, 1.0).unwrap(),
                2.0e8,
            )
            .unwrap();
            let ir = impulse_response(&ch, fs, 256.0 / fs).unwrap();
            assert!(ir.parseval_residual() < 1e-9, "residual {}", ir.parseval_residual());
        }
    }

    #[test]
    fn duration_shorter_than_delay_rejected() {
        let ch = MultipathChannel::new(vec![const_path(1.0, 1e-3)], Attenuation::NONE, 2.0e8)
            .unwrap();
        assert!(matches!(
            impulse_response(&ch, 1e6, 1e-4),
            Err(ChannelError::DurationTooShort { .. })
        ));
    }
}
