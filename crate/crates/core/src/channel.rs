//! Rician BS–RIS and RIS–UE links, cascaded channel synthesis and the
//! deterministic statistics (`f_k`, `χ_k`, `ρ_{B,k}`) shared by the sensing and
//! rate modules.
//!
//! Link powers are kept in the `(|β|², σ²)` parametrisation, where `β` is the
//! LOS gain and `σ²` the per-entry NLOS variance. With a finite Rician factor
//! `ε` this is `|β|² = |α|² ε/(ε+1)` and `σ² = |α|²/(ε+1)`, so for example
//! `ρ_{B,k} ε₀ ε_k = |β₀ β_k|²`. The pure-LOS limit is the exact case `σ² = 0`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::geometry::{cart_to_local_spherical, Angle, Frame, Upa, Vec3};
use crate::rng::{complex_normal, uniform_phase};
use crate::{Error, Result, C64, SPEED_OF_LIGHT};

/// Rician factor of a link, or the pure line-of-sight limit `ε → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rician {
    Factor(f64),
    PureLos,
}

impl Rician {
    /// `ε/(ε+1)`.
    pub fn los_fraction(&self) -> f64 {
        match *self {
            Rician::Factor(e) => e / (e + 1.0),
            Rician::PureLos => 1.0,
        }
    }

    /// `1/(ε+1)`.
    pub fn nlos_fraction(&self) -> f64 {
        match *self {
            Rician::Factor(e) => 1.0 / (e + 1.0),
            Rician::PureLos => 0.0,
        }
    }

    pub fn factor(&self) -> Option<f64> {
        match *self {
            Rician::Factor(e) => Some(e),
            Rician::PureLos => None,
        }
    }
}

/// Static geometry and physics of one deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub bs: Frame,
    pub ris: Frame,
    pub bs_dims: (usize, usize),
    pub ris_dims: (usize, usize),
    pub carrier_hz: f64,
    pub rice_bs_ris: Rician,
    pub rice_ris_ue: Rician,
    pub pathloss_exponent: f64,
    /// BS sensing power (W).
    pub bs_power: f64,
    /// UE transmit power budget (W).
    pub ue_power: f64,
    /// Noise power spectral density (W/Hz).
    pub noise_psd: f64,
    /// Noise figure as a linear factor.
    pub noise_figure: f64,
    pub bandwidth_hz: f64,
    pub tau_p: f64,
    pub tau_c: f64,
    pub tau_l: f64,
    pub ues: Vec<Vec3>,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SceneConfig {
    /// Default deployment: BS at `[5,5,9]`, RIS at the origin 10 m up, both
    /// 10x10, 28 GHz, 100 kHz, `ε₀ = ε_k = 50`, `b = 2`, 500 mW / 200 mW,
    /// -174 dBm/Hz with an 8 dB noise figure, 1 ms sensing and coherence
    /// slots within a 1 s location interval, four ground-level UEs.
    pub fn table_one() -> Self {
        Self {
            bs: Frame::axis_aligned(Vec3::new(5.0, 5.0, 9.0)),
            ris: Frame::axis_aligned(Vec3::new(0.0, 0.0, 10.0)),
            bs_dims: (10, 10),
            ris_dims: (10, 10),
            carrier_hz: 28e9,
            rice_bs_ris: Rician::Factor(50.0),
            rice_ris_ue: Rician::Factor(50.0),
            pathloss_exponent: 2.0,
            bs_power: 0.5,
            ue_power: 0.2,
            noise_psd: dbm_to_watts(-174.0),
            noise_figure: db_to_linear(8.0),
            bandwidth_hz: 1e5,
            tau_p: 1e-3,
            tau_c: 1e-3,
            tau_l: 1.0,
            ues: vec![
                Vec3::new(-5.0, 6.0, 0.0),
                Vec3::new(-12.0, 9.0, 0.0),
                Vec3::new(-8.0, 15.0, 0.0),
                Vec3::new(-17.0, 18.0, 0.0),
            ],
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn num_ues(&self) -> usize {
        self.ues.len()
    }

    pub fn bs_upa(&self) -> Result<Upa> {
        Upa::half_wavelength(self.bs_dims.0, self.bs_dims.1, self.wavelength())
    }

    pub fn ris_upa(&self) -> Result<Upa> {
        Upa::half_wavelength(self.ris_dims.0, self.ris_dims.1, self.wavelength())
    }

    pub fn m_b(&self) -> usize {
        self.bs_dims.0 * self.bs_dims.1
    }

    pub fn m_r(&self) -> usize {
        self.ris_dims.0 * self.ris_dims.1
    }

    /// AWGN power `N₀ B n_f` (W).
    pub fn noise_power(&self) -> f64 {
        self.noise_psd * self.bandwidth_hz * self.noise_figure
    }

    /// Sensing snapshots per location interval, `τ_P B`.
    pub fn sensing_snapshots(&self) -> usize {
        (self.tau_p * self.bandwidth_hz).round() as usize
    }

    /// Symbols per channel coherence block, `τ_C B`.
    pub fn block_symbols(&self) -> usize {
        (self.tau_c * self.bandwidth_hz).round() as usize
    }

    /// Coherence blocks per location interval, `N_C = (τ_L - τ_P)/τ_C`.
    pub fn coherence_blocks(&self) -> usize {
        ((self.tau_l - self.tau_p) / self.tau_c).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if let Rician::Factor(e) = self.rice_bs_ris {
            if !(e > 0.0) {
                return bad(format!("BS-RIS Rician factor must be > 0, got {e}"));
            }
        }
        if let Rician::Factor(e) = self.rice_ris_ue {
            if !(e > 0.0) {
                return bad(format!("RIS-UE Rician factor must be > 0, got {e}"));
            }
        }
        for (name, v) in [
            ("carrier", self.carrier_hz),
            ("BS power", self.bs_power),
            ("UE power", self.ue_power),
            ("noise PSD", self.noise_psd),
            ("noise figure", self.noise_figure),
            ("bandwidth", self.bandwidth_hz),
            ("tau_p", self.tau_p),
            ("tau_c", self.tau_c),
            ("path-loss exponent", self.pathloss_exponent),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let nc = (self.tau_l - self.tau_p) / self.tau_c;
        if nc < 0.5 || (nc - nc.round()).abs() > 1e-6 {
            return bad(format!(
                "tau_l must equal tau_p + N_C tau_c with integer N_C >= 1 (got N_C = {nc})"
            ));
        }
        if self.ues.is_empty() {
            return bad("at least one UE is required".into());
        }
        if self.m_b() == 0 || self.m_r() == 0 {
            return bad("arrays must have at least one element".into());
        }
        Ok(())
    }
}

/// Complex path gains and derived powers of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub alpha0: C64,
    pub beta0: C64,
    /// Per-entry NLOS variance of the BS–RIS link, `|α₀|²/(ε₀+1)`.
    pub nlos0: f64,
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    /// Per-entry NLOS variance of each RIS–UE link, `|α_k|²/(ε_k+1)`.
    pub nlos: Vec<f64>,
    /// `ρ_{B,k} = |α_k|²|α₀|²/((ε_k+1)(ε₀+1))`.
    pub rho: Vec<f64>,
}

fn path_gain(wavelength: f64, dist: f64, amplitude_exponent: f64) -> C64 {
    let mag = wavelength / (4.0 * std::f64::consts::PI * dist.powf(amplitude_exponent));
    C64::from_polar(mag, -std::f64::consts::TAU * dist / wavelength)
}

pub fn path_gains(scene: &SceneConfig) -> Result<LinkGains> {
    let lambda = scene.wavelength();
    let d0 = (scene.ris.origin - scene.bs.origin).norm();
    if d0 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let alpha0 = path_gain(lambda, d0, 1.0);
    let beta0 = alpha0 * scene.rice_bs_ris.los_fraction().sqrt();
    let nlos0 = alpha0.norm_sqr() * scene.rice_bs_ris.nlos_fraction();
    let mut alpha = Vec::with_capacity(scene.ues.len());
    for ue in &scene.ues {
        let d = (ue - scene.ris.origin).norm();
        if d == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        alpha.push(path_gain(lambda, d, scene.pathloss_exponent / 2.0));
    }
    let beta = alpha
        .iter()
        .map(|a| a * scene.rice_ris_ue.los_fraction().sqrt())
        .collect();
    let nlos: Vec<f64> = alpha
        .iter()
        .map(|a| a.norm_sqr() * scene.rice_ris_ue.nlos_fraction())
        .collect();
    let rho = nlos.iter().map(|v| v * nlos0).collect();
    Ok(LinkGains {
        alpha0,
        beta0,
        nlos0,
        alpha,
        beta,
        nlos,
        rho,
    })
}

/// RIS reflection matrix `Λ`, stored row-major so that entry `(m_x, m_z)`
/// multiplies steering element `m_x * M_z + m_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    m_x: usize,
    m_z: usize,
    values: Vec<C64>,
}

impl PhaseProfile {
    pub fn new(m_x: usize, m_z: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != m_x * m_z {
            return Err(Error::Dimension(format!(
                "phase profile {m_x}x{m_z} needs {} entries, got {}",
                m_x * m_z,
                values.len()
            )));
        }
        for (index, v) in values.iter().enumerate() {
            let modulus = v.norm();
            if (modulus - 1.0).abs() > 1e-12 {
                return Err(Error::NotUnitModulus { index, modulus });
            }
        }
        Ok(Self { m_x, m_z, values })
    }

    pub fn from_phases(m_x: usize, m_z: usize, phases: &[f64]) -> Result<Self> {
        Self::new(
            m_x,
            m_z,
            phases.iter().map(|&p| C64::from_polar(1.0, p)).collect(),
        )
    }

    pub fn constant(m_x: usize, m_z: usize) -> Self {
        Self {
            m_x,
            m_z,
            values: vec![C64::new(1.0, 0.0); m_x * m_z],
        }
    }

    /// IID uniform phases over `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(m_x: usize, m_z: usize, rng: &mut R) -> Self {
        Self {
            m_x,
            m_z,
            values: (0..m_x * m_z)
                .map(|_| C64::from_polar(1.0, uniform_phase(rng)))
                .collect(),
        }
    }

    /// Profile that co-phases every element so that `|f_k| = M_R`.
    pub fn phase_matched(m_x: usize, m_z: usize, a_ris: &[C64], a_ue: &[C64]) -> Self {
        let values = a_ris
            .iter()
            .zip(a_ue)
            .map(|(r, u)| {
                let v = r * u.conj();
                v / v.norm()
            })
            .collect();
        Self { m_x, m_z, values }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m_x, self.m_z)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `vec(Λ)` in steering order.
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn get(&self, m_x: usize, m_z: usize) -> C64 {
        self.values[m_x * self.m_z + m_z]
    }

    pub fn phases(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg()).collect()
    }
}

/// LOS geometry and gains of a scene: everything deterministic about the
/// channel.
#[derive(Debug, Clone)]
pub struct LosModel {
    pub wavelength: f64,
    pub m_b: usize,
    pub m_r: usize,
    pub ris_dims: (usize, usize),
    /// AOD at the BS towards the RIS.
    pub psi_b: Angle,
    /// AOA at the RIS from the BS.
    pub psi_r: Angle,
    /// AOD from the RIS towards each UE.
    pub psi_ue: Vec<Angle>,
    pub a_b: Vec<C64>,
    pub a_r: Vec<C64>,
    pub a_ue: Vec<Vec<C64>>,
    pub gains: LinkGains,
}

impl LosModel {
    pub fn new(scene: &SceneConfig) -> Result<Self> {
        let lambda = scene.wavelength();
        let bs_upa = scene.bs_upa()?;
        let ris_upa = scene.ris_upa()?;
        let psi_b = cart_to_local_spherical(&scene.ris.origin, &scene.bs)?.angle;
        let psi_r = cart_to_local_spherical(&scene.bs.origin, &scene.ris)?.angle;
        let psi_ue = scene
            .ues
            .iter()
            .map(|ue| cart_to_local_spherical(ue, &scene.ris).map(|s| s.angle))
            .collect::<Result<Vec<_>>>()?;
        let a_ue = psi_ue
            .iter()
            .map(|&psi| ris_upa.response(psi, lambda))
            .collect();
        Ok(Self {
            wavelength: lambda,
            m_b: bs_upa.len(),
            m_r: ris_upa.len(),
            ris_dims: scene.ris_dims,
            psi_b,
            psi_r,
            psi_ue,
            a_b: bs_upa.response(psi_b, lambda),
            a_r: ris_upa.response(psi_r, lambda),
            a_ue,
            gains: path_gains(scene)?,
        })
    }

    pub fn num_ues(&self) -> usize {
        self.psi_ue.len()
    }

    /// `f_k = a(ψ_R)ᴴ diag(vec Λ) a(ψ_k)`.
    pub fn f(&self, k: usize, profile: &PhaseProfile) -> C64 {
        f_k(profile, &self.a_r, &self.a_ue[k])
    }

    /// `χ_k`, with `E‖h_{B,k}‖² = M_B χ_k`.
    pub fn chi(&self, k: usize, profile: &PhaseProfile) -> f64 {
        chi_from_f(&self.gains, k, self.f(k, profile), self.m_r)
    }

    /// `(H̄₀, {h̄_k})`.
    pub fn los_components(&self) -> (DMatrix<C64>, Vec<DVector<C64>>) {
        let h0 = DMatrix::from_fn(self.m_r, self.m_b, |r, b| {
            self.gains.beta0 * self.a_r[r] * self.a_b[b]
        });
        let h = self
            .a_ue
            .iter()
            .zip(&self.gains.beta)
            .map(|(a, beta)| DVector::from_iterator(a.len(), a.iter().map(|v| beta * v)))
            .collect();
        (h0, h)
    }

    /// `h̄_{B,k} = H̄₀ᴴ diag(vec Λ) h̄_k`.
    pub fn mean_cascade(&self, k: usize, profile: &PhaseProfile) -> DVector<C64> {
        let (h0, h) = self.los_components();
        cascade(&h0, profile, &h[k])
    }

    /// One draw of `H₀`, `{h_k}` and the cascaded channels. The BS–RIS and
    /// RIS–UE NLOS parts are drawn independently.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        profile: &PhaseProfile,
        rng: &mut R,
    ) -> ChannelRealization {
        let (mut h0, mut h) = self.los_components();
        if self.gains.nlos0 > 0.0 {
            for v in h0.iter_mut() {
                *v += complex_normal(rng, self.gains.nlos0);
            }
        }
        for (hk, &var) in h.iter_mut().zip(&self.gains.nlos) {
            if var > 0.0 {
                for v in hk.iter_mut() {
                    *v += complex_normal(rng, var);
                }
            }
        }
        let cascaded = h.iter().map(|hk| cascade(&h0, profile, hk)).collect();
        ChannelRealization { h0, h, cascaded }
    }
}

/// One realisation of the BS–RIS matrix, RIS–UE vectors and cascades.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `M_R x M_B`.
    pub h0: DMatrix<C64>,
    pub h: Vec<DVector<C64>>,
    /// `h_{B,k}`, length `M_B`.
    pub cascaded: Vec<DVector<C64>>,
}

pub fn cascade(h0: &DMatrix<C64>, profile: &PhaseProfile, hk: &DVector<C64>) -> DVector<C64> {
    let u = DVector::from_iterator(
        hk.len(),
        hk.iter().zip(profile.values()).map(|(h, l)| h * l),
    );
    h0.ad_mul(&u)
}

pub fn los_components(scene: &SceneConfig) -> Result<(DMatrix<C64>, Vec<DVector<C64>>)> {
    Ok(LosModel::new(scene)?.los_components())
}

pub fn sample_channel<R: Rng + ?Sized>(
    scene: &SceneConfig,
    profile: &PhaseProfile,
    rng: &mut R,
) -> Result<ChannelRealization> {
    Ok(LosModel::new(scene)?.sample(profile, rng))
}

pub fn f_k(profile: &PhaseProfile, a_ris: &[C64], a_ue: &[C64]) -> C64 {
    a_ris
        .iter()
        .zip(profile.values())
        .zip(a_ue)
        .map(|((r, l), u)| r.conj() * l * u)
        .sum()
}

/// `χ_k = ρ_{B,k}(ε₀ε_k|f_k|² + (ε₀+ε_k+1)M_R)`, written in the
/// `(|β|², σ²)` form.
pub fn chi_from_f(gains: &LinkGains, k: usize, f: C64, m_r: usize) -> f64 {
    let b0 = gains.beta0.norm_sqr();
    let bk = gains.beta[k].norm_sqr();
    let s0 = gains.nlos0;
    let sk = gains.nlos[k];
    b0 * bk * f.norm_sqr() + (b0 * sk + s0 * bk + s0 * sk) * m_r as f64
}

pub fn chi_k(scene: &SceneConfig, profile: &PhaseProfile, k: usize) -> Result<f64> {
    Ok(LosModel::new(scene)?.chi(k, profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::f64::consts::PI;

    fn small_scene(ris: (usize, usize), bs: (usize, usize)) -> SceneConfig {
        SceneConfig {
            ris_dims: ris,
            bs_dims: bs,
            ues: vec![Vec3::new(-6.0, 8.0, 0.0), Vec3::new(-12.0, 4.0, 0.0)],
            rice_bs_ris: Rician::Factor(3.0),
            rice_ris_ue: Rician::Factor(2.0),
            ..SceneConfig::table_one()
        }
    }

    #[test]
    fn path_gain_magnitudes() {
        let g = path_gain(1.0, 1.0, 1.0);
        assert!((g.norm() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        // b = 2 reduces the UE gain to λ/(4π d).
        let mut scene = SceneConfig::table_one();
        scene.pathloss_exponent = 2.0;
        let gains = path_gains(&scene).unwrap();
        let d = (scene.ues[0] - scene.ris.origin).norm();
        let expect = scene.wavelength() / (4.0 * PI * d);
        assert!((gains.alpha[0].norm() - expect).abs() < 1e-15 * expect.max(1.0));
    }

    #[test]
    fn table_one_bs_ris_gain_uses_sqrt51() {
        let scene = SceneConfig::table_one();
        let gains = path_gains(&scene).unwrap();
        let expect = scene.wavelength() / (4.0 * PI * 51f64.sqrt());
        assert!((gains.alpha0.norm() - expect).abs() < 1e-12 * expect);
        let rho0 = gains.alpha[0].norm_sqr() * gains.alpha0.norm_sqr() / (51.0 * 51.0);
        assert!((gains.rho[0] - rho0).abs() < 1e-12 * rho0);
        assert!(gains.rho.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn coincident_nodes_are_rejected() {
        let mut scene = SceneConfig::table_one();
        scene.ues[1] = scene.ris.origin;
        assert!(matches!(path_gains(&scene), Err(Error::CoincidentPoints)));
    }

    #[test]
    fn los_components_shape_and_norms() {
        let scene = small_scene((3, 2), (2, 2));
        let model = LosModel::new(&scene).unwrap();
        let (h0, h) = model.los_components();
        let svd = h0.clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(sv[1] < 1e-10 * sv[0]);
        let fro = h0.norm();
        let expect = model.gains.beta0.norm() * ((model.m_r * model.m_b) as f64).sqrt();
        assert!((fro - expect).abs() < 1e-12 * expect);
        for (hk, beta) in h.iter().zip(&model.gains.beta) {
            let expect = beta.norm() * (model.m_r as f64).sqrt();
            assert!((hk.norm() - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn pure_los_sample_equals_mean() {
        let mut scene = small_scene((2, 2), (2, 1));
        scene.rice_bs_ris = Rician::PureLos;
        scene.rice_ris_ue = Rician::PureLos;
        let model = LosModel::new(&scene).unwrap();
        let profile = PhaseProfile::random(2, 2, &mut rng::root(1));
        let draw = model.sample(&profile, &mut rng::root(2));
        for k in 0..2 {
            assert_eq!(draw.cascaded[k], model.mean_cascade(k, &profile));
        }
    }

    #[test]
    fn cascade_matches_definition() {
        let scene = small_scene((2, 3), (2, 2));
        let model = LosModel::new(&scene).unwrap();
        let profile = PhaseProfile::random(2, 3, &mut rng::root(5));
        let draw = model.sample(&profile, &mut rng::root(6));
        let diag = DMatrix::from_diagonal(&DVector::from_column_slice(profile.values()));
        for k in 0..2 {
            let expect = draw.h0.adjoint() * &diag * &draw.h[k];
            assert!((expect - &draw.cascaded[k]).camax() < 1e-9 * draw.cascaded[k].camax());
        }
    }

    #[test]
    fn f_k_bounds_and_phase_match() {
        let scene = small_scene((4, 4), (2, 2));
        let model = LosModel::new(&scene).unwrap();
        let matched = PhaseProfile::phase_matched(4, 4, &model.a_r, &model.a_ue[0]);
        assert!((model.f(0, &matched).norm() - 16.0).abs() < 1e-12);
        let mut r = rng::root(9);
        for _ in 0..100 {
            let p = PhaseProfile::random(4, 4, &mut r);
            assert!(model.f(0, &p).norm() <= 16.0 + 1e-12);
        }
        let single = small_scene((1, 1), (2, 2));
        let m1 = LosModel::new(&single).unwrap();
        let p = PhaseProfile::random(1, 1, &mut r);
        assert!((m1.f(0, &p).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_phase_mean_f_squared_is_m_r() {
        let scene = small_scene((3, 3), (1, 1));
        let model = LosModel::new(&scene).unwrap();
        let mut r = rng::root(10);
        let n = 40_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| model.f(1, &PhaseProfile::random(3, 3, &mut r)).norm_sqr())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 9.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn chi_single_element_collapses() {
        let scene = small_scene((1, 1), (2, 2));
        let model = LosModel::new(&scene).unwrap();
        let p = PhaseProfile::constant(1, 1);
        let chi = model.chi(0, &p);
        let g = &model.gains;
        let expect = (g.alpha0 * g.alpha[0]).norm_sqr();
        assert!((chi - expect).abs() < 1e-12 * expect);
        // ρ-ε form
        let (e0, ek) = (3.0, 2.0);
        let f2 = model.f(0, &p).norm_sqr();
        let printed = g.rho[0] * (e0 * ek * f2 + (e0 + ek + 1.0));
        assert!((chi - printed).abs() < 1e-12 * printed);
    }

    #[test]
    fn phase_match_maximises_chi() {
        let scene = small_scene((3, 3), (2, 2));
        let model = LosModel::new(&scene).unwrap();
        let best = model.chi(
            0,
            &PhaseProfile::phase_matched(3, 3, &model.a_r, &model.a_ue[0]),
        );
        let mut r = rng::root(11);
        for _ in 0..10_000 {
            assert!(model.chi(0, &PhaseProfile::random(3, 3, &mut r)) <= best * (1.0 + 1e-12));
        }
    }

    #[test]
    fn phase_profile_validation() {
        assert!(matches!(
            PhaseProfile::new(1, 2, vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0)]),
            Err(Error::NotUnitModulus { index: 1, .. })
        ));
        assert!(matches!(
            PhaseProfile::new(2, 2, vec![C64::new(1.0, 0.0)]),
            Err(Error::Dimension(_))
        ));
        let p = PhaseProfile::from_phases(2, 2, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!((p.get(1, 0).arg() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn scene_validation() {
        let mut s = SceneConfig::table_one();
        assert!(s.validate().is_ok());
        assert_eq!(s.coherence_blocks(), 999);
        assert_eq!(s.sensing_snapshots(), 100);
        assert_eq!(s.block_symbols(), 100);
        s.tau_l = 1.0005;
        assert!(s.validate().is_err());
        let mut s = SceneConfig::table_one();
        s.rice_bs_ris = Rician::Factor(0.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn statistics_are_bitwise_repeatable() {
        let scene = small_scene((3, 3), (2, 2));
        let p = PhaseProfile::random(3, 3, &mut rng::root(4));
        let a = chi_k(&scene, &p, 1).unwrap();
        let b = chi_k(&scene, &p, 1).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
