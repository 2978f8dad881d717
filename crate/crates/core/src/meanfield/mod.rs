//! Mean-field transfer function of the excitatory population.
//!
//! For an input rate `f_in` the mean synaptic conductance, effective membrane
//! time constant, steady-state voltage and voltage fluctuation are computed
//! and fed to the first-passage rate integral
//!
//! ```text
//! 1/f_out = T_refrac + tau_eff * sqrt(pi) * Int_{(v_low - v_ss)/sigma}^{(v_thresh - v_ss)/sigma} exp(x^2)(1 + erf x) dx
//! ```
//!
//! Two fluctuation models are provided: shot noise of the synaptic charge
//! ([`VarianceModel::Standard`]) and the jump noise of the switched-capacitor
//! membrane ([`VarianceModel::Hardware`]).

mod fixed_points;

pub use fixed_points::{find_fixed_points, FixedPoint, FixedPointSet, Stability};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{HardwareConfig, NetworkConfig, NeuronParams};
use crate::special::ln_first_passage_rate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceModel {
    Standard,
    Hardware,
}

/// Average membrane voltage used in the charge-per-spike estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanVoltage {
    /// `(v_thresh + v_reset) / 2`
    Midpoint,
    /// `(v_thresh - v_reset) / 2`, kept for reproducing the literal formula.
    HalfDifference,
}

/// Lower bound of the rate integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBound {
    Rest,
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanFieldOptions {
    pub mean_voltage: MeanVoltage,
    pub lower_bound: LowerBound,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        MeanFieldOptions { mean_voltage: MeanVoltage::Midpoint, lower_bound: LowerBound::Reset }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SfaMode {
    Off,
    /// Adds the adaptation conductance `g_SFA * tau_sfa * f_out` and solves
    /// for the self-consistent output rate at every grid point.
    SteadyState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyStateStats {
    /// Mean excitatory synaptic conductance (nS).
    pub g_syn_total: f64,
    /// Mean adaptation conductance (nS); zero unless adaptation is modelled.
    pub g_sfa_total: f64,
    /// ms
    pub tilde_tau_mem: f64,
    /// mV
    pub v_ss: f64,
    pub sigma_v_standard: f64,
    pub sigma_v_hardware: f64,
    /// Current variance (A^2 s).
    pub sigma_i_sq: f64,
    /// Charge per spike (pC).
    pub q_rec: f64,
    pub q_bg: f64,
    pub v_bar: f64,
    /// Switching frequencies (Hz).
    pub f_syn: f64,
    pub f_mem: f64,
}

impl SteadyStateStats {
    pub fn sigma_v(&self, variance: VarianceModel) -> f64 {
        match variance {
            VarianceModel::Standard => self.sigma_v_standard,
            VarianceModel::Hardware => self.sigma_v_hardware,
        }
    }
}

/// Population parameters entering the mean-field rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanField {
    pub neuron: NeuronParams,
    /// Conductance amplitudes (nS).
    pub g_rec: f64,
    pub g_bg: f64,
    pub g_sfa: f64,
    pub f_bg: f64,
    /// Mean in-degrees.
    pub k_rec: f64,
    pub k_bg: f64,
    pub alpha: f64,
    pub options: MeanFieldOptions,
}

impl MeanField {
    pub fn new(p: &NeuronParams, net: &NetworkConfig, h: &HardwareConfig) -> Self {
        MeanField {
            neuron: *p,
            g_rec: net.g_rec,
            g_bg: net.g_bg,
            g_sfa: net.g_sfa,
            f_bg: net.f_bg,
            k_rec: net.rec_in_degree(),
            k_bg: net.bg_in_degree(),
            alpha: h.alpha,
            options: MeanFieldOptions::default(),
        }
    }

    pub fn with_in_degrees(mut self, k_rec: f64, k_bg: f64) -> Self {
        self.k_rec = k_rec;
        self.k_bg = k_bg;
        self
    }

    pub fn with_options(mut self, options: MeanFieldOptions) -> Self {
        self.options = options;
        self
    }

    pub fn v_bar(&self) -> f64 {
        let p = &self.neuron;
        match self.options.mean_voltage {
            MeanVoltage::Midpoint => 0.5 * (p.v_thresh + p.v_reset),
            MeanVoltage::HalfDifference => 0.5 * (p.v_thresh - p.v_reset),
        }
    }

    pub fn steady_state_stats(&self, f_in: f64) -> SteadyStateStats {
        self.stats_with_adaptation(f_in, 0.0)
    }

    /// Statistics with an additional mean adaptation conductance driven by
    /// output rate `f_out` (Hz).
    pub fn stats_with_adaptation(&self, f_in: f64, f_out: f64) -> SteadyStateStats {
        let p = &self.neuron;
        // SI units inside
        let c = p.c_mem * 1e-9;
        let g_mem = c / (p.tau_mem * 1e-3);
        let (tau_rec, tau_bg) = (p.tau_syn_rec * 1e-3, p.tau_syn_bg * 1e-3);
        let (g_rec, g_bg) = (self.g_rec * 1e-9, self.g_bg * 1e-9);
        let rate_rec = f_in * self.k_rec;
        let rate_bg = self.f_bg * self.k_bg;
        let g_rec_total = tau_rec * g_rec * rate_rec;
        let g_bg_total = tau_bg * g_bg * rate_bg;
        let g_syn = g_rec_total + g_bg_total;
        let g_sfa = self.g_sfa * 1e-9 * p.tau_sfa * 1e-3 * f_out;
        let g_all = g_mem + g_syn + g_sfa;
        let tilde_tau = c / g_all;
        let (e_rec, e_bg, e_sfa) = (p.e_syn_rec * 1e-3, p.e_syn_bg * 1e-3, p.e_sfa * 1e-3);
        let v_rest = p.v_rest * 1e-3;
        let v_ss = (v_rest * g_mem + e_rec * g_rec_total + e_bg * g_bg_total + e_sfa * g_sfa) / g_all;
        let v_bar = self.v_bar() * 1e-3;

        let q_rec = g_rec * tau_rec * (e_rec - v_bar);
        let q_bg = g_bg * tau_bg * (e_bg - v_bar);
        let sigma_i_sq = rate_rec * q_rec * q_rec + rate_bg * q_bg * q_bg;
        let sigma_standard = (sigma_i_sq * tilde_tau / (c * c)).sqrt();

        let f_mem = 1.0 / (self.alpha * p.tau_mem * 1e-3);
        let f_syn_rec = g_rec_total / g_mem * f_mem;
        let f_syn_bg = g_bg_total / g_mem * f_mem;
        let jump = |e: f64| (self.alpha * (e - v_bar)).powi(2);
        let sigma_hw_sq = (f_syn_rec * jump(e_rec) + f_syn_bg * jump(e_bg) + f_mem * jump(v_rest)) * tilde_tau;

        SteadyStateStats {
            g_syn_total: g_syn * 1e9,
            g_sfa_total: g_sfa * 1e9,
            tilde_tau_mem: tilde_tau * 1e3,
            v_ss: v_ss * 1e3,
            sigma_v_standard: sigma_standard * 1e3,
            sigma_v_hardware: sigma_hw_sq.sqrt() * 1e3,
            sigma_i_sq,
            q_rec: q_rec * 1e12,
            q_bg: q_bg * 1e12,
            v_bar: v_bar * 1e3,
            f_syn: f_syn_rec + f_syn_bg,
            f_mem,
        }
    }

    /// Output rate (Hz) at input rate `f_in`, without adaptation.
    pub fn rate(&self, f_in: f64, variance: VarianceModel) -> f64 {
        siegert_rate(&self.steady_state_stats(f_in), &self.neuron, variance, self.options.lower_bound)
    }

    /// Output rate with adaptation held at the conductance of rate `f_sfa`.
    pub fn rate_with_adaptation(&self, f_in: f64, f_sfa: f64, variance: VarianceModel) -> f64 {
        let stats = self.stats_with_adaptation(f_in, f_sfa);
        siegert_rate(&stats, &self.neuron, variance, self.options.lower_bound)
    }

    /// Self-consistent output rate when the adaptation conductance follows
    /// the neuron's own rate. Safeguarded damped fixed-point iteration to
    /// 1e-3 Hz.
    pub fn adapted_rate(&self, f_in: f64, variance: VarianceModel) -> Result<f64> {
        const MAX_ITER: usize = 1000;
        if self.g_sfa == 0.0 {
            return Ok(self.rate(f_in, variance));
        }
        let map = |f: f64| self.rate_with_adaptation(f_in, f, variance);
        // the map is non-increasing in f, so the root of map(f) - f is bracketed
        let (mut lo, mut hi) = (0.0, map(0.0));
        let mut f = hi;
        let mut damping = 0.5;
        let mut last_sign = 0.0;
        for _ in 0..MAX_ITER {
            let residual = map(f) - f;
            if residual.abs() < 1e-3 {
                return Ok(f);
            }
            if residual > 0.0 {
                lo = f;
            } else {
                hi = f;
            }
            let sign = residual.signum();
            if sign == -last_sign {
                damping *= 0.5;
            }
            last_sign = sign;
            let mut next = f + damping * residual;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            f = next;
        }
        Err(Error::NoConvergence { f_in, iterations: MAX_ITER })
    }

    pub fn transfer_curve(&self, grid: &[f64], variance: VarianceModel, sfa: SfaMode) -> Result<TransferCurve> {
        check_grid(grid)?;
        let f_out = grid
            .iter()
            .map(|&f| match sfa {
                SfaMode::Off => Ok(self.rate(f, variance)),
                SfaMode::SteadyState => self.adapted_rate(f, variance),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TransferCurve {
            f_in: grid.to_vec(),
            f_out,
            variant: match variance {
                VarianceModel::Standard => CurveVariant::MeanfieldStandard,
                VarianceModel::Hardware => CurveVariant::MeanfieldHardware,
            },
            g_rec: self.g_rec,
            g_sfa: if sfa == SfaMode::Off { 0.0 } else { self.g_sfa },
            f_bg: self.f_bg,
            sfa_reconstruction: sfa == SfaMode::SteadyState && self.g_sfa > 0.0,
        })
    }
}

/// Shorthand for [`MeanField::steady_state_stats`] with default options.
pub fn steady_state_stats(p: &NeuronParams, net: &NetworkConfig, f_in: f64) -> SteadyStateStats {
    MeanField::new(p, net, &HardwareConfig::default()).steady_state_stats(f_in)
}

/// First-passage rate (Hz) for the given membrane statistics.
///
/// With zero fluctuation the deterministic limit is used: no firing while
/// `v_ss` stays below threshold, otherwise one spike per refractory period
/// plus charging time from the lower bound.
pub fn siegert_rate(stats: &SteadyStateStats, p: &NeuronParams, variance: VarianceModel, lower: LowerBound) -> f64 {
    let sigma = stats.sigma_v(variance);
    let v_low = match lower {
        LowerBound::Rest => p.v_rest,
        LowerBound::Reset => p.v_reset,
    };
    let tau = stats.tilde_tau_mem * 1e-3;
    let t_ref = p.t_refrac * 1e-3;
    if sigma <= 0.0 {
        if stats.v_ss <= p.v_thresh {
            return 0.0;
        }
        let charge = tau * ((stats.v_ss - v_low) / (stats.v_ss - p.v_thresh)).ln();
        return 1.0 / (t_ref + charge.max(0.0));
    }
    let a = (v_low - stats.v_ss) / sigma;
    let b = (p.v_thresh - stats.v_ss) / sigma;
    ln_first_passage_rate(tau, t_ref, a, b).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveVariant {
    Measured,
    MeanfieldStandard,
    MeanfieldHardware,
}

impl CurveVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveVariant::Measured => "measured",
            CurveVariant::MeanfieldStandard => "meanfield_standard",
            CurveVariant::MeanfieldHardware => "meanfield_hardware",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferCurve {
    pub f_in: Vec<f64>,
    pub f_out: Vec<f64>,
    pub variant: CurveVariant,
    pub g_rec: f64,
    pub g_sfa: f64,
    pub f_bg: f64,
    /// True when the curve includes the steady-state adaptation extension,
    /// which is a reconstruction rather than a closed-form result.
    pub sfa_reconstruction: bool,
}

impl TransferCurve {
    pub fn measured(f_in: Vec<f64>, f_out: Vec<f64>, g_rec: f64, g_sfa: f64, f_bg: f64) -> Result<Self> {
        if f_in.len() != f_out.len() {
            return Err(Error::GridMismatch("f_in and f_out lengths differ".into()));
        }
        check_grid(&f_in)?;
        Ok(TransferCurve {
            f_in,
            f_out,
            variant: CurveVariant::Measured,
            g_rec,
            g_sfa,
            f_bg,
            sfa_reconstruction: false,
        })
    }

    /// Piecewise-linear interpolation, clamped at the ends.
    pub fn interpolate(&self, f: f64) -> f64 {
        let x = &self.f_in;
        let y = &self.f_out;
        if f <= x[0] {
            return y[0];
        }
        if f >= x[x.len() - 1] {
            return y[y.len() - 1];
        }
        let i = x.partition_point(|&v| v <= f) - 1;
        let t = (f - x[i]) / (x[i + 1] - x[i]);
        y[i] + t * (y[i + 1] - y[i])
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty rate grid".into()));
    }
    if grid.iter().any(|&f| !(f >= 0.0) || !f.is_finite()) {
        return Err(Error::InvalidArgument("rate grid must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("rate grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `start, start+step, ..., <= stop` (inclusive within rounding).
pub fn rate_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Tidy CSV with columns `f_in,f_out,variant,g_rec,g_sfa`.
pub fn write_curves_csv<W: std::io::Write>(out: W, curves: &[TransferCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["f_in", "f_out", "variant", "g_rec", "g_sfa"])?;
    for c in curves {
        for (x, y) in c.f_in.iter().zip(&c.f_out) {
            w.write_record([
                x.to_string(),
                y.to_string(),
                c.variant.as_str().to_string(),
                c.g_rec.to_string(),
                c.g_sfa.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct FixedPointReport<'a> {
    variant: CurveVariant,
    g_rec: f64,
    g_sfa: f64,
    f_bg: f64,
    sfa_reconstruction: bool,
    fixed_points: &'a FixedPointSet,
}

/// JSON document listing the fixed points of `curve` with stability tags.
pub fn fixed_points_json(curve: &TransferCurve, set: &FixedPointSet) -> Result<String> {
    let report = FixedPointReport {
        variant: curve.variant,
        g_rec: curve.g_rec,
        g_sfa: curve.g_sfa,
        f_bg: curve.f_bg,
        sfa_reconstruction: curve.sfa_reconstruction,
        fixed_points: set,
    };
    Ok(serde_json::to_string_pretty(&report)?)
}
