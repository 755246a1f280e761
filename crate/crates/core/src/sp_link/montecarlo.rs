//! Block-level simulation of the SP uplink and the Monte-Carlo estimate of
//! the use-and-then-forget SINR
//! `γ_k = E‖z₁‖² / (E‖z₂‖² + E‖z₃‖² − ‖E z₃‖²)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use super::closed_form::{lmmse_scalars, rate_from_sinr};
use super::{pilots, SpConfig, SINR_CAP};
use crate::channel::{LosModel, PhaseProfile};
use crate::rng::{complex_normal, substream};
use crate::C64;

/// One coherence block.
#[derive(Debug, Clone)]
pub struct Block {
    /// Received `M_B x τ` signal.
    pub y: DMatrix<C64>,
    pub g: Vec<DVector<C64>>,
    /// Data symbols, `τ` per UE.
    pub nu: Vec<DVector<C64>>,
    pub noise: DMatrix<C64>,
}

/// `Y = Σ_k g_k (√q_k φ_kᴴ + √p_k ν_kᴴ) + Γ` with fresh channels, data and
/// noise.
pub fn generate_block<R: Rng + ?Sized>(
    los: &LosModel,
    profile: &PhaseProfile,
    sp: &SpConfig,
    phi: &DMatrix<C64>,
    rng: &mut R,
) -> Block {
    let tau = sp.tau;
    let g = los.sample(profile, rng).cascaded;
    let nu: Vec<DVector<C64>> = (0..g.len())
        .map(|_| DVector::from_fn(tau, |_, _| complex_normal(rng, 1.0)))
        .collect();
    let noise = DMatrix::from_fn(los.m_b, tau, |_, _| complex_normal(rng, 1.0));
    let mut y = noise.clone();
    for (k, gk) in g.iter().enumerate() {
        let (sq, sp_) = (sp.q[k].sqrt(), sp.p[k].sqrt());
        let row = DVector::from_fn(tau, |t, _| (phi[(t, k)] * sq + nu[k][t] * sp_).conj());
        y += gk * row.transpose();
    }
    Block { y, g, nu, noise }
}

/// `ĝ_k = c_k Y φ_k / √τ`.
pub fn despread_and_estimate(y: &DMatrix<C64>, phi: &DMatrix<C64>, c: &[f64]) -> Vec<DVector<C64>> {
    let scale = 1.0 / (phi.nrows() as f64).sqrt();
    c.iter()
        .enumerate()
        .map(|(k, ck)| (y * phi.column(k)) * C64::new(ck * scale, 0.0))
        .collect()
}

/// MRC output of one UE split into its use-and-then-forget terms.
#[derive(Debug, Clone)]
pub struct Detection {
    /// `ν̂_kᴴ = ĝ_kᴴ (Y − Σ_i √q_i ĝ_i φ_iᴴ)`, length `τ`.
    pub nu_hat: Vec<C64>,
    /// `√p_k (λ_k/χ_k) E{‖g_k‖²} ν_kᴴ`.
    pub z1: Vec<C64>,
    /// `√p_k (λ_k/χ_k)(‖g_k‖² − E{‖g_k‖²}) ν_kᴴ`.
    pub z2: Vec<C64>,
    /// Estimation-error self term, cross-UE data, pilot residue, noise.
    pub z3: [Vec<C64>; 4],
}

/// Detect every UE's data and decompose the detector output.
pub fn mrc_detect(
    block: &Block,
    g_hat: &[DVector<C64>],
    phi: &DMatrix<C64>,
    sp: &SpConfig,
    chi: &[f64],
    m_b: usize,
) -> Vec<Detection> {
    let k_count = g_hat.len();
    let tau = sp.tau as f64;
    let c = lmmse_scalars(chi, sp);
    let mut cleaned = block.y.clone();
    for (i, gi) in g_hat.iter().enumerate() {
        cleaned -= gi * phi.column(i).adjoint() * C64::new(sp.q[i].sqrt(), 0.0);
    }
    let row = |v: DVector<C64>| -> Vec<C64> { v.iter().copied().collect() };
    (0..k_count)
        .map(|k| {
            let gh = &g_hat[k];
            let nu_hat = row((cleaned.adjoint() * gh).map(|v| v.conj()));
            let lam = (sp.q[k] * tau).sqrt() * chi[k] * c[k];
            let gain = sp.p[k].sqrt() * lam / chi[k];
            let mean = m_b as f64 * chi[k];
            let g2 = block.g[k].norm_squared();
            let nu_h = block.nu[k].map(|v| v.conj());
            let z1 = row(&nu_h * C64::new(gain * mean, 0.0));
            let z2 = row(&nu_h * C64::new(gain * (g2 - mean), 0.0));
            // ḡ_k = ĝ_k − c_k √(q_k τ) g_k
            let gbar = gh - &block.g[k] * C64::new(c[k] * (sp.q[k] * tau).sqrt(), 0.0);
            let z31 = row(&nu_h * (gbar.dotc(&block.g[k]) * sp.p[k].sqrt()));
            let mut z32 = DVector::zeros(sp.tau);
            let mut z33 = DVector::zeros(sp.tau);
            for i in 0..k_count {
                let err = &block.g[i] - &g_hat[i];
                z33 += phi.column(i).map(|v| v.conj()) * (gh.dotc(&err) * sp.q[i].sqrt());
                if i != k {
                    z32 += block.nu[i].map(|v| v.conj()) * (gh.dotc(&block.g[i]) * sp.p[i].sqrt());
                }
            }
            let z34 = row((block.noise.adjoint() * gh).map(|v| v.conj()));
            Detection {
                nu_hat,
                z1,
                z2,
                z3: [z31, row(z32), row(z33), z34],
            }
        })
        .collect()
}

/// Sums of the per-block quantities behind the SINR estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct McStats {
    pub blocks: usize,
    /// Per UE: `Σ‖z₁‖²`, `Σ‖z₂‖²`, `Σ‖z₃‖²`.
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    pub z3: Vec<f64>,
    /// Per UE: `Σ z₃` (length `τ`).
    pub z3_sum: Vec<Vec<C64>>,
}

impl McStats {
    fn zeros(k: usize, tau: usize) -> Self {
        Self {
            blocks: 0,
            z1: vec![0.0; k],
            z2: vec![0.0; k],
            z3: vec![0.0; k],
            z3_sum: vec![vec![C64::new(0.0, 0.0); tau]; k],
        }
    }

    fn add(&mut self, o: &McStats) {
        self.blocks += o.blocks;
        for k in 0..self.z1.len() {
            self.z1[k] += o.z1[k];
            self.z2[k] += o.z2[k];
            self.z3[k] += o.z3[k];
            for (a, b) in self.z3_sum[k].iter_mut().zip(&o.z3_sum[k]) {
                *a += b;
            }
        }
    }

    fn sub(&self, o: &McStats) -> McStats {
        let mut r = self.clone();
        r.blocks -= o.blocks;
        for k in 0..r.z1.len() {
            r.z1[k] -= o.z1[k];
            r.z2[k] -= o.z2[k];
            r.z3[k] -= o.z3[k];
            for (a, b) in r.z3_sum[k].iter_mut().zip(&o.z3_sum[k]) {
                *a -= b;
            }
        }
        r
    }

    pub fn sinr(&self, k: usize) -> f64 {
        let n = self.blocks as f64;
        let mean_sq: f64 = self.z3_sum[k].iter().map(|v| (v / n).norm_sqr()).sum();
        let den = self.z2[k] / n + self.z3[k] / n - mean_sq;
        let num = self.z1[k] / n;
        if !(den > 0.0) || num / den > SINR_CAP {
            SINR_CAP
        } else {
            num / den
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRate {
    pub sinr: Vec<f64>,
    pub sinr_se: Vec<f64>,
    pub rate: Vec<f64>,
    pub rate_se: Vec<f64>,
    pub stats: McStats,
}

const GROUPS: usize = 20;

fn simulate_range(
    los: &LosModel,
    profile: &PhaseProfile,
    sp: &SpConfig,
    phi: &DMatrix<C64>,
    chi: &[f64],
    seed: u64,
    range: std::ops::Range<usize>,
) -> McStats {
    let k_count = sp.num_ues();
    let c = lmmse_scalars(chi, sp);
    let tau = sp.tau as f64;
    let mut st = McStats::zeros(k_count, sp.tau);
    for b in range {
        let mut rng = substream(seed, &[b as u64]);
        let block = generate_block(los, profile, sp, phi, &mut rng);
        let g_hat = despread_and_estimate(&block.y, phi, &c);
        // ν̂_kᴴ = ĝ_kᴴ Y − Σ_i √q_i (ĝ_kᴴ ĝ_i) φ_iᴴ
        for k in 0..k_count {
            let gh = &g_hat[k];
            let mut out: Vec<C64> = (0..sp.tau)
                .map(|t| block.y.column(t).dot(&gh.conjugate()))
                .collect();
            for (i, gi) in g_hat.iter().enumerate() {
                let w = gh.dotc(gi) * sp.q[i].sqrt();
                for (t, o) in out.iter_mut().enumerate() {
                    *o -= w * phi[(t, i)].conj();
                }
            }
            let lam = (sp.q[k] * tau).sqrt() * chi[k] * c[k];
            let gain = sp.p[k].sqrt() * lam / chi[k];
            let mean = los.m_b as f64 * chi[k];
            let g2 = block.g[k].norm_squared();
            let nu2 = block.nu[k].norm_squared();
            st.z1[k] += gain * gain * mean * mean * nu2;
            st.z2[k] += gain * gain * (g2 - mean) * (g2 - mean) * nu2;
            let scale = gain * g2;
            let mut z3 = 0.0;
            for (t, o) in out.iter().enumerate() {
                let v = o - block.nu[k][t].conj() * scale;
                z3 += v.norm_sqr();
                st.z3_sum[k][t] += v;
            }
            st.z3[k] += z3;
        }
        st.blocks += 1;
    }
    st
}

/// Monte-Carlo SINR and rate per UE over `n_blocks` independent blocks.
///
/// Block `b` always draws from substream `(seed, b)` and blocks are summed in
/// fixed groups, so the result does not depend on the thread count. Standard
/// errors use the delete-a-group jackknife over 20 groups.
pub fn empirical_rate(
    los: &LosModel,
    profile: &PhaseProfile,
    sp: &SpConfig,
    n_blocks: usize,
    seed: u64,
) -> McRate {
    let n_blocks = n_blocks.max(1);
    let chi: Vec<f64> = (0..los.num_ues()).map(|k| los.chi(k, profile)).collect();
    let phi = pilots(sp.tau, sp.num_ues());
    let groups = GROUPS.min(n_blocks);
    let bounds: Vec<_> = (0..groups)
        .map(|g| (g * n_blocks / groups)..((g + 1) * n_blocks / groups))
        .collect();
    let parts: Vec<McStats> = bounds
        .into_par_iter()
        .map(|r| simulate_range(los, profile, sp, &phi, &chi, seed, r))
        .collect();
    let mut total = McStats::zeros(sp.num_ues(), sp.tau);
    for p in &parts {
        total.add(p);
    }
    let k_count = sp.num_ues();
    let sinr: Vec<f64> = (0..k_count).map(|k| total.sinr(k)).collect();
    let rate: Vec<f64> = sinr.iter().map(|&s| rate_from_sinr(s)).collect();
    let (mut sinr_se, mut rate_se) = (vec![0.0; k_count], vec![0.0; k_count]);
    if groups > 1 {
        let gf = groups as f64;
        let loo: Vec<McStats> = parts.iter().map(|p| total.sub(p)).collect();
        for k in 0..k_count {
            let s: Vec<f64> = loo.iter().map(|st| st.sinr(k)).collect();
            let r: Vec<f64> = s.iter().map(|&v| rate_from_sinr(v)).collect();
            let spread = |v: &[f64]| {
                let m = v.iter().sum::<f64>() / gf;
                ((gf - 1.0) / gf * v.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sqrt()
            };
            sinr_se[k] = spread(&s);
            rate_se[k] = spread(&r);
        }
    }
    McRate {
        sinr,
        sinr_se,
        rate,
        rate_se,
        stats: total,
    }
}
