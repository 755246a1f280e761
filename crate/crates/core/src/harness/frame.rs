//! Frame protocol: every location coherence interval the UEs move, are
//! sensed, the RIS is re-optimised on the estimated positions and the
//! resulting profile is scored on the true channel for the `N_C` coherence
//! blocks that follow.

use rand::Rng;

use super::config::SimConfig;
use super::mobility::{step_mobility, MobilityModel};
use crate::channel::{LosModel, PhaseProfile, SceneConfig};
use crate::geometry::Vec3;
use crate::optimize::{ga_optimize, GaParams};
use crate::rng::substream;
use crate::sensing::{
    estimate, locate, noiseless_ue, simulate_sensing, EstimateOptions, IfftDictionary, NoiseMode,
    SensingContext, SensingSetup,
};
use crate::sp_link::{closed_form_rate, empirical_rate, SpConfig};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingNoise {
    Gaussian,
    /// Noise-free observations, for consistency checks.
    None,
}

/// Per-UE rates from one phase profile on the true channel; `None` where the
/// UE could not be served.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSet {
    pub closed_form: Vec<Option<f64>>,
    pub monte_carlo: Vec<Option<f64>>,
    pub mc_stderr: Vec<Option<f64>>,
}

impl RateSet {
    pub fn sum_closed_form(&self) -> f64 {
        self.closed_form.iter().flatten().sum()
    }

    pub fn sum_monte_carlo(&self) -> f64 {
        self.monte_carlo.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport {
    pub interval: usize,
    pub positions: Vec<Vec3>,
    pub estimates: Vec<Option<Vec3>>,
    /// Optimised on estimated positions.
    pub est_loc: RateSet,
    /// Optimised on the true positions.
    pub acc_loc: RateSet,
    /// Coherence blocks behind each Monte-Carlo rate.
    pub blocks: usize,
    pub sensing_snapshots: usize,
}

impl IntervalReport {
    pub fn position_error(&self, k: usize) -> Option<f64> {
        self.estimates[k].map(|e| (e - self.positions[k]).norm())
    }
}

/// Sense every UE; failures (grazing elevation, degenerate FIM geometry,
/// ...) come back as `None`.
pub fn sense_positions(
    cfg: &SimConfig,
    positions: &[Vec3],
    noise: SensingNoise,
    seed: u64,
    tag: u64,
) -> Result<Vec<Option<Vec3>>> {
    let scene = SceneConfig {
        ris_dims: cfg.sensing_ris,
        ues: positions.to_vec(),
        ..cfg.scene.clone()
    };
    let los = LosModel::new(&scene)?;
    let setup = SensingSetup::random(&scene, &los, &mut substream(seed, &[tag, 0]));
    let ctx = SensingContext::new(&scene, setup)?;
    let dict = IfftDictionary::new(&ctx, cfg.ifft_size.0, cfg.ifft_size.1)?;
    let opts = EstimateOptions::default();
    Ok((0..positions.len())
        .map(|k| {
            let y = match noise {
                SensingNoise::Gaussian => simulate_sensing(
                    &ctx,
                    k,
                    &mut substream(seed, &[tag, 1, k as u64]),
                    NoiseMode::GaussianApprox,
                ),
                SensingNoise::None => noiseless_ue(&ctx, k),
            };
            let est = estimate(&y, &dict, &ctx, &opts).ok()?;
            locate(est.angle, &ctx.ris, positions[k].z).ok()
        })
        .collect())
}

fn score(
    truth: &LosModel,
    sp: &SpConfig,
    profile: &PhaseProfile,
    served: &[bool],
    blocks: usize,
    seed: u64,
) -> Result<RateSet> {
    let cf = closed_form_rate(truth, profile, sp)?;
    let mc = empirical_rate(truth, profile, sp, blocks, seed);
    let mask = |v: Vec<f64>| -> Vec<Option<f64>> {
        v.into_iter()
            .zip(served)
            .map(|(x, &s)| s.then_some(x))
            .collect()
    };
    Ok(RateSet {
        closed_form: mask(cf.bounds.iter().map(|b| b.rate).collect()),
        monte_carlo: mask(mc.rate),
        mc_stderr: mask(mc.rate_se),
    })
}

/// Run `cfg.intervals` location coherence intervals starting from `start`.
pub fn run_frame(
    cfg: &SimConfig,
    start: &[Vec3],
    noise: SensingNoise,
    seed: u64,
) -> Result<Vec<IntervalReport>> {
    let mobility = MobilityModel::isotropic(start.len(), cfg.walk_std)?;
    let blocks = cfg.scene.coherence_blocks();
    let mut positions = start.to_vec();
    let mut out = Vec::with_capacity(cfg.intervals);
    for n in 0..cfg.intervals {
        let tag = n as u64;
        if n > 0 {
            positions = step_mobility(&positions, &mobility, &mut substream(seed, &[tag, 9]))?;
        }
        let estimates = sense_positions(cfg, &positions, noise, seed, tag)?;
        let truth_scene = SceneConfig {
            ues: positions.clone(),
            ..cfg.scene.clone()
        };
        let truth = LosModel::new(&truth_scene)?;
        let sp = SpConfig::uniform(&truth_scene, cfg.eta)?;
        let ga = GaParams {
            seed: substream(seed, &[tag, 2]).random(),
            ..cfg.ga.clone()
        };
        let mc_seed: u64 = substream(seed, &[tag, 3]).random();

        let acc_profile = ga_optimize(&truth, &sp, &ga)?.best;
        let all = vec![true; positions.len()];
        let acc_loc = score(&truth, &sp, &acc_profile, &all, blocks, mc_seed)?;

        // Optimise on the UEs that were located; the others are reported as
        // missing but still interfere on the true channel.
        let served: Vec<bool> = estimates.iter().map(Option::is_some).collect();
        let est_ues: Vec<Vec3> = estimates.iter().flatten().copied().collect();
        let est_loc = if est_ues.is_empty() {
            RateSet {
                closed_form: vec![None; positions.len()],
                monte_carlo: vec![None; positions.len()],
                mc_stderr: vec![None; positions.len()],
            }
        } else {
            let est_scene = SceneConfig {
                ues: est_ues,
                ..cfg.scene.clone()
            };
            let est_los = LosModel::new(&est_scene)?;
            let est_sp = SpConfig::uniform(&est_scene, cfg.eta)?;
            let profile = ga_optimize(&est_los, &est_sp, &ga)?.best;
            score(&truth, &sp, &profile, &served, blocks, mc_seed)?
        };
        out.push(IntervalReport {
            interval: n,
            positions: positions.clone(),
            estimates,
            est_loc,
            acc_loc,
            blocks,
            sensing_snapshots: cfg.scene.sensing_snapshots(),
        });
    }
    Ok(out)
}
