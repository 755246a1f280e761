//! Downlink location sensing: signal model, Fisher information and the
//! 2D-IFFT angle estimator.
//!
//! During the sensing slot the BS repeats one pilot vector `s` for `T`
//! snapshots while the RIS cycles through known phase profiles `Λ_t`. The
//! noise-free sample at UE `k` is `ȳ_t = ϱ_k φ_t(ψ_k)` with
//! `φ_t(ψ) = a(ψ)ᵀ diag(vec Λ_t) a(ψ_R)` and `ϱ_k = β₀ β_k a(ψ_B)ᵀ s`.

pub mod bfgs;
mod estimator;
mod fim;

pub use estimator::{
    estimate, grid_search, interpolate_peak, locate, mle_baseline, refine, EstimateOptions,
    EstimateResult, GridSearch, IfftDictionary,
};
pub use fim::{crb, fim_channel, jacobian_location, FimResult};

use rand::Rng;

use crate::channel::{LosModel, PhaseProfile, SceneConfig};
use crate::geometry::{Angle, Frame, Upa, Vec3};
use crate::rng::complex_normal;
use crate::{Error, Result, C64};

/// Pilot, RIS phase sequence and AWGN power of a sensing slot.
#[derive(Debug, Clone)]
pub struct SensingSetup {
    pub pilot: Vec<C64>,
    pub phases: Vec<PhaseProfile>,
    /// AWGN power `σ²_N` (W).
    pub awgn: f64,
}

impl SensingSetup {
    /// Conjugate-beamformed pilot toward the RIS and `τ_P B` iid
    /// uniform-phase RIS profiles drawn from `rng`.
    pub fn random<R: Rng + ?Sized>(scene: &SceneConfig, los: &LosModel, rng: &mut R) -> Self {
        let (mx, mz) = scene.ris_dims;
        let phases = (0..scene.sensing_snapshots())
            .map(|_| PhaseProfile::random(mx, mz, rng))
            .collect();
        Self {
            pilot: beamformed_pilot(scene.bs_power, &los.a_b),
            phases,
            awgn: scene.noise_power(),
        }
    }

    pub fn snapshots(&self) -> usize {
        self.phases.len()
    }
}

/// `s = √(P_B/M_B) conj(a(ψ_B))`, so `‖s‖² = P_B` and `a(ψ_B)ᵀ s = √(P_B M_B)`.
pub fn beamformed_pilot(power: f64, a_b: &[C64]) -> Vec<C64> {
    let amp = (power / a_b.len() as f64).sqrt();
    a_b.iter().map(|a| a.conj() * amp).collect()
}

/// Split of the total per-snapshot noise power at one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBreakdown {
    pub awgn: f64,
    /// BS–RIS NLOS through the RIS–UE LOS path.
    pub nlos_bs_ris: f64,
    /// BS–RIS LOS through the RIS–UE NLOS path.
    pub nlos_ris_ue: f64,
    /// NLOS on both hops.
    pub nlos_both: f64,
}

impl NoiseBreakdown {
    pub fn total(&self) -> f64 {
        self.awgn + self.nlos_bs_ris + self.nlos_ris_ue + self.nlos_both
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// `y = ȳ + w` with white Gaussian `w` of the total noise power.
    GaussianApprox,
    /// Fresh NLOS components per snapshot pushed through the physical cascade.
    FullChannel,
}

/// Everything the sensing model needs about one scene and sensing slot.
#[derive(Debug, Clone)]
pub struct SensingContext {
    pub los: LosModel,
    pub setup: SensingSetup,
    pub ris_upa: Upa,
    pub ris: Frame,
    /// True UE positions; estimators only read their heights.
    pub ues: Vec<Vec3>,
    /// `vec(Λ_t) ⊙ a(ψ_R)` for every snapshot, flattened `[t][i]`.
    masked: Vec<C64>,
    /// `a(ψ_B)ᵀ s`.
    array_gain: C64,
}

impl SensingContext {
    pub fn new(scene: &SceneConfig, setup: SensingSetup) -> Result<Self> {
        let los = LosModel::new(scene)?;
        let ris_upa = scene.ris_upa()?;
        if setup.pilot.len() != los.m_b {
            return Err(Error::Dimension(format!(
                "pilot has {} entries for {} BS antennas",
                setup.pilot.len(),
                los.m_b
            )));
        }
        if setup.phases.is_empty() {
            return Err(Error::InvalidParameter(
                "sensing needs at least one snapshot".into(),
            ));
        }
        let mut masked = Vec::with_capacity(setup.phases.len() * los.m_r);
        for p in &setup.phases {
            if p.dims() != scene.ris_dims {
                return Err(Error::Dimension(format!(
                    "phase profile {:?} does not match RIS {:?}",
                    p.dims(),
                    scene.ris_dims
                )));
            }
            masked.extend(p.values().iter().zip(&los.a_r).map(|(l, a)| l * a));
        }
        let array_gain = los.a_b.iter().zip(&setup.pilot).map(|(a, s)| a * s).sum();
        Ok(Self {
            los,
            setup,
            ris_upa,
            ris: scene.ris,
            ues: scene.ues.clone(),
            masked,
            array_gain,
        })
    }

    pub fn snapshots(&self) -> usize {
        self.setup.phases.len()
    }

    pub fn m_r(&self) -> usize {
        self.los.m_r
    }

    pub fn wavelength(&self) -> f64 {
        self.los.wavelength
    }

    /// `vec(Λ_t) ⊙ a(ψ_R)`.
    pub fn masked(&self, t: usize) -> &[C64] {
        let m = self.los.m_r;
        &self.masked[t * m..(t + 1) * m]
    }

    /// `ϱ_k = β₀ β_k a(ψ_B)ᵀ s`.
    pub fn rho(&self, k: usize) -> C64 {
        self.los.gains.beta0 * self.los.gains.beta[k] * self.array_gain
    }

    /// `φ(ψ)` for any response vector `a(ψ)`.
    pub fn phi_from_response(&self, a: &[C64]) -> Vec<C64> {
        (0..self.snapshots())
            .map(|t| dot(a, self.masked(t)))
            .collect()
    }

    pub fn phi(&self, psi: Angle) -> Vec<C64> {
        self.phi_from_response(&self.ris_upa.response(psi, self.wavelength()))
    }

    pub fn noise(&self, k: usize) -> NoiseBreakdown {
        let g = &self.los.gains;
        let s2: f64 = self.setup.pilot.iter().map(|s| s.norm_sqr()).sum();
        let b0 = g.beta0.norm_sqr();
        let bk = g.beta[k].norm_sqr();
        NoiseBreakdown {
            awgn: self.setup.awgn,
            nlos_bs_ris: s2 * g.nlos0 * bk,
            nlos_ris_ue: self.m_r() as f64 * self.array_gain.norm_sqr() * b0 * g.nlos[k],
            nlos_both: s2 * g.nlos0 * g.nlos[k],
        }
    }
}

/// Unconjugated inner product `Σ a_i b_i`.
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Total noise power `σ²_{B,k}` and its components.
pub fn noise_variance(ctx: &SensingContext, k: usize) -> NoiseBreakdown {
    ctx.noise(k)
}

/// `ȳ_k = ϱ φ(ψ)` for an arbitrary angle and complex gain.
pub fn noiseless_rx(ctx: &SensingContext, psi: Angle, rho: C64) -> Vec<C64> {
    ctx.phi(psi).into_iter().map(|v| v * rho).collect()
}

/// Noise-free observation of UE `k` at its true angle.
pub fn noiseless_ue(ctx: &SensingContext, k: usize) -> Vec<C64> {
    noiseless_rx(ctx, ctx.los.psi_ue[k], ctx.rho(k))
}

pub fn simulate_sensing<R: Rng + ?Sized>(
    ctx: &SensingContext,
    k: usize,
    rng: &mut R,
    mode: NoiseMode,
) -> Vec<C64> {
    match mode {
        NoiseMode::GaussianApprox => {
            let var = ctx.noise(k).total();
            noiseless_ue(ctx, k)
                .into_iter()
                .map(|v| v + complex_normal(rng, var))
                .collect()
        }
        NoiseMode::FullChannel => {
            let los = &ctx.los;
            let g = &los.gains;
            let s2: f64 = ctx.setup.pilot.iter().map(|s| s.norm_sqr()).sum();
            let mut y = Vec::with_capacity(ctx.snapshots());
            for p in &ctx.setup.phases {
                // H₀ s = β₀ a_R (a_Bᵀ s) + H̃₀ s, where H̃₀ s has iid
                // CN(0, σ₀² ‖s‖²) entries.
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..los.m_r {
                    let h0s =
                        g.beta0 * los.a_r[i] * ctx.array_gain + complex_normal(rng, g.nlos0 * s2);
                    let hk = g.beta[k] * los.a_ue[k][i] + complex_normal(rng, g.nlos[k]);
                    acc += hk * p.values()[i] * h0s;
                }
                y.push(acc + complex_normal(rng, ctx.setup.awgn));
            }
            y
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Rician;
    use crate::rng;

    pub(crate) fn small_scene() -> SceneConfig {
        SceneConfig {
            ris_dims: (4, 4),
            bs_dims: (4, 4),
            ues: vec![Vec3::new(-6.0, 7.0, 0.0)],
            tau_p: 2e-4,
            tau_l: 1.0002,
            ..SceneConfig::table_one()
        }
    }

    fn ctx(scene: &SceneConfig, seed: u64) -> SensingContext {
        let los = LosModel::new(scene).unwrap();
        let setup = SensingSetup::random(scene, &los, &mut rng::root(seed));
        SensingContext::new(scene, setup).unwrap()
    }

    #[test]
    fn table_one_awgn_power() {
        let scene = SceneConfig::table_one();
        let expect = 10f64.powf((-174.0 + 10.0 * 1e5f64.log10() + 8.0 - 30.0) / 10.0);
        assert!((scene.noise_power() - expect).abs() < 1e-12 * expect);
        assert!((scene.noise_power() - 2.512e-15).abs() < 1e-18);
    }

    #[test]
    fn pilot_power_and_coherent_gain() {
        let scene = small_scene();
        let c = ctx(&scene, 1);
        let p: f64 = c.setup.pilot.iter().map(|s| s.norm_sqr()).sum();
        assert!((p - scene.bs_power).abs() < 1e-15);
        let expect = scene.bs_power * 16.0;
        assert!((c.array_gain.norm_sqr() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn zero_rician_factor_leaves_only_the_double_nlos_term() {
        let mut scene = small_scene();
        scene.rice_bs_ris = Rician::Factor(0.0);
        scene.rice_ris_ue = Rician::Factor(0.0);
        let c = ctx(&scene, 1);
        let n = c.noise(0);
        assert_eq!(n.nlos_bs_ris, 0.0);
        assert_eq!(n.nlos_ris_ue, 0.0);
        let expect = scene.bs_power * c.los.gains.rho[0];
        assert!((n.nlos_both - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn bilinear_form_equals_vec_diag_form() {
        let scene = small_scene();
        let c = ctx(&scene, 2);
        let psi = Angle::new(1.1, 2.0);
        let st = c.ris_upa.steering(psi, c.wavelength());
        let sr = c.ris_upa.steering(c.los.psi_r, c.wavelength());
        let phi = c.phi(psi);
        for (t, p) in c.setup.phases.iter().enumerate() {
            let mut v = C64::new(0.0, 0.0);
            for mx in 0..4 {
                for mz in 0..4 {
                    v += st.x[mx] * p.get(mx, mz) * sr.x[mx] * sr.z[mz] * st.z[mz];
                }
            }
            assert!((v - phi[t]).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_profile_gives_constant_rx() {
        let scene = small_scene();
        let los = LosModel::new(&scene).unwrap();
        let mut setup = SensingSetup::random(&scene, &los, &mut rng::root(3));
        let fixed = setup.phases[0].clone();
        setup.phases.iter_mut().for_each(|p| *p = fixed.clone());
        let c = SensingContext::new(&scene, setup).unwrap();
        let y = noiseless_ue(&c, 0);
        assert!(y.iter().all(|v| (v - y[0]).norm() == 0.0));
    }

    #[test]
    fn single_element_ris() {
        let mut scene = small_scene();
        scene.ris_dims = (1, 1);
        let c = ctx(&scene, 4);
        let phi = c.phi(Angle::new(0.4, 1.9));
        for (t, p) in c.setup.phases.iter().enumerate() {
            assert!((phi[t] - p.values()[0]).norm() < 1e-15);
        }
    }

    #[test]
    fn gaussian_noise_variance() {
        let scene = small_scene();
        let c = ctx(&scene, 5);
        let ybar = noiseless_ue(&c, 0);
        let var = c.noise(0).total();
        let mut r = rng::root(6);
        let mut acc = 0.0;
        let mut n = 0usize;
        for _ in 0..5000 {
            let y = simulate_sensing(&c, 0, &mut r, NoiseMode::GaussianApprox);
            for (a, b) in y.iter().zip(&ybar) {
                acc += (a - b).norm_sqr();
                n += 1;
            }
        }
        let est = acc / n as f64;
        assert!((est / var - 1.0).abs() < 0.02, "{est} vs {var}");
    }

    #[test]
    fn zero_noise_returns_mean() {
        let mut scene = small_scene();
        scene.rice_bs_ris = Rician::PureLos;
        scene.rice_ris_ue = Rician::PureLos;
        let mut c = ctx(&scene, 5);
        c.setup.awgn = 0.0;
        let y = simulate_sensing(&c, 0, &mut rng::root(1), NoiseMode::GaussianApprox);
        assert_eq!(y, noiseless_ue(&c, 0));
    }
}
