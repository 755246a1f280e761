//! Superimposed-pilot (SP) uplink: each UE sends pilot and data in the same
//! `τ` symbols, the BS de-spreads with the orthogonal pilots, forms LMMSE
//! channel estimates, cancels the pilot part and detects data by MRC.
//!
//! SNRs are normalised so the receiver AWGN has unit variance: `q_k` and
//! `p_k` are the pilot and data powers divided by `N₀ B n_f`.

mod closed_form;
mod moments;
mod montecarlo;

pub use closed_form::{
    closed_form, lmmse_scalars, rate_from_sinr, weighted_sum_rate, PiTerms, UeBound,
};
pub use moments::{moments, Moments};
pub use montecarlo::{
    despread_and_estimate, empirical_rate, generate_block, mrc_detect, Block, Detection, McRate,
    McStats,
};

use nalgebra::DMatrix;

use crate::channel::{LosModel, PhaseProfile, SceneConfig};
use crate::{Error, Result, C64};

/// Reported SINRs are capped here; anything larger is treated as infinite.
pub const SINR_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpConfig {
    /// Symbols per coherence block (pilot length).
    pub tau: usize,
    /// Normalised pilot SNR per UE.
    pub q: Vec<f64>,
    /// Normalised data SNR per UE.
    pub p: Vec<f64>,
    /// Sum-rate weights.
    pub weights: Vec<f64>,
}

impl SpConfig {
    /// Every UE splits the budget `P_U/(N₀ B n_f)` with data fraction `eta`.
    pub fn uniform(scene: &SceneConfig, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!(
                "power split must lie in [0, 1], got {eta}"
            )));
        }
        let budget = snr_budget(scene);
        let k = scene.num_ues();
        let sp = Self {
            tau: scene.block_symbols(),
            q: vec![(1.0 - eta) * budget; k],
            p: vec![eta * budget; k],
            weights: vec![1.0; k],
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn num_ues(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.q.len();
        if self.p.len() != k || self.weights.len() != k {
            return Err(Error::Dimension(format!(
                "{} pilot SNRs, {} data SNRs, {} weights",
                k,
                self.p.len(),
                self.weights.len()
            )));
        }
        if self.tau < k {
            return Err(Error::InvalidParameter(format!(
                "pilot length {} shorter than UE count {k}",
                self.tau
            )));
        }
        if self.q.iter().chain(&self.p).any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter("SNRs must be non-negative".into()));
        }
        Ok(())
    }
}

/// Total normalised UE SNR `P_U / (N₀ B n_f)`.
pub fn snr_budget(scene: &SceneConfig) -> f64 {
    scene.ue_power / scene.noise_power()
}

/// First `k` columns of the `τ x τ` DFT matrix: `φ_kᴴ φ_j = τ δ_kj`.
pub fn pilots(tau: usize, k: usize) -> DMatrix<C64> {
    DMatrix::from_fn(tau, k, |t, j| {
        C64::from_polar(
            1.0,
            std::f64::consts::TAU * (t * j % tau) as f64 / tau as f64,
        )
    })
}

/// Closed-form and (optionally) Monte-Carlo rates for one phase profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub moments: Moments,
    pub bounds: Vec<UeBound>,
    pub weighted_sum_rate: f64,
    pub monte_carlo: Option<McRate>,
}

pub fn closed_form_rate(
    los: &LosModel,
    profile: &PhaseProfile,
    sp: &SpConfig,
) -> Result<RateReport> {
    let mo = moments(los, profile);
    let bounds = closed_form(&mo, sp)?;
    let weighted_sum_rate = bounds
        .iter()
        .zip(&sp.weights)
        .map(|(b, w)| w * b.rate)
        .sum();
    Ok(RateReport {
        moments: mo,
        bounds,
        weighted_sum_rate,
        monte_carlo: None,
    })
}
