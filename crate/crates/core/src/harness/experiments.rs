//! Figure experiments as seeded sweeps emitting long-format rows.

use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::config::SimConfig;
use super::csv::Row;
use super::frame::{run_frame, SensingNoise};
use crate::channel::{LosModel, PhaseProfile, SceneConfig};
use crate::geometry::Vec3;
use crate::optimize::{ga_optimize, random_baseline, sa_optimize, GaParams, SaParams};
use crate::rng::substream;
use crate::sensing::{
    crb, estimate, locate, mle_baseline, simulate_sensing, EstimateOptions, IfftDictionary,
    NoiseMode, SensingContext, SensingSetup,
};
use crate::sp_link::{closed_form_rate, empirical_rate, SpConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    RmseVsCrb,
    CrbVsMr,
    IfftVsMle,
    RateValidate,
    RateVsMr,
    PowerSweep,
    FrameSim,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::RmseVsCrb,
        Experiment::CrbVsMr,
        Experiment::IfftVsMle,
        Experiment::RateValidate,
        Experiment::RateVsMr,
        Experiment::PowerSweep,
        Experiment::FrameSim,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Experiment::RmseVsCrb => "rmse-vs-crb",
            Experiment::CrbVsMr => "crb-vs-mr",
            Experiment::IfftVsMle => "ifft-vs-mle",
            Experiment::RateValidate => "rate-validate",
            Experiment::RateVsMr => "rate-vs-mr",
            Experiment::PowerSweep => "power-sweep",
            Experiment::FrameSim => "frame-sim",
        }
    }

    fn sweep_var(&self) -> &'static str {
        match self {
            Experiment::RmseVsCrb | Experiment::IfftVsMle => "r_m",
            Experiment::CrbVsMr | Experiment::RateVsMr => "m_r",
            Experiment::RateValidate | Experiment::PowerSweep => "eta",
            Experiment::FrameSim => "interval",
        }
    }

    /// Default grid of the swept variable.
    pub fn default_grid(&self, cfg: &SimConfig) -> Vec<f64> {
        match self {
            Experiment::RmseVsCrb => vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            Experiment::IfftVsMle => vec![5.0, 10.0, 20.0, 30.0, 40.0],
            Experiment::CrbVsMr => [4, 6, 8, 10, 16, 32, 64]
                .iter()
                .map(|s| (s * s) as f64)
                .collect(),
            Experiment::RateVsMr => [2, 4, 6, 8, 10].iter().map(|s| (s * s) as f64).collect(),
            Experiment::RateValidate => vec![0.2, 0.5, 0.8],
            Experiment::PowerSweep => (1..20).map(|i| i as f64 / 20.0).collect(),
            Experiment::FrameSim => (0..cfg.intervals).map(|i| i as f64).collect(),
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, cfg: &SimConfig, seed: u64) -> Self {
        Self {
            experiment,
            grid: experiment.default_grid(cfg),
            trials: cfg.trials,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.trials == 0 {
            return Err(Error::InvalidParameter("empty grid or zero trials".into()));
        }
        Ok(())
    }
}

/// Rows plus side information that must stay out of the CSV (run times).
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub rows: Vec<Row>,
    pub extras: Vec<(String, String)>,
}

/// UEs uniform over `x ∈ [−20, −3]`, `y ∈ [3, 20]` m at ground level.
pub fn place_ues<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            Vec3::new(
                rng.random_range(-20.0..=-3.0),
                rng.random_range(3.0..=20.0),
                0.0,
            )
        })
        .collect()
}

/// Configured UE positions, or `n` seeded random ones.
pub fn ues_for(cfg: &SimConfig, n: usize, seed: u64) -> Vec<Vec3> {
    match &cfg.ue_positions {
        Some(p) => p.clone(),
        None => place_ues(n, &mut substream(seed, &[u64::MAX])),
    }
}

/// UE on the ray `[−r/√2, r/√2, 0]`.
pub fn diagonal_ue(r: f64) -> Vec3 {
    Vec3::new(-r / 2f64.sqrt(), r / 2f64.sqrt(), 0.0)
}

fn side(m_r: f64) -> Result<usize> {
    let s = m_r.sqrt().round() as usize;
    if s == 0 || (s * s) as f64 != m_r {
        return Err(Error::InvalidParameter(format!(
            "M_R = {m_r} is not a square"
        )));
    }
    Ok(s)
}

/// RMSE with a delta-method standard error from per-trial squared errors.
fn rmse(sq: &[f64]) -> (f64, f64) {
    if sq.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = sq.len() as f64;
    let mse = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|v| (v - mse).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let r = mse.sqrt();
    let se = if r > 0.0 {
        (var / n).sqrt() / (2.0 * r)
    } else {
        0.0
    };
    (r, se)
}

fn wrapped(a: f64) -> f64 {
    (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
}

/// Squared position, azimuth and elevation errors of one sensing trial;
/// `None` on an estimator failure.
type TrialErr = Option<(f64, f64, f64)>;

pub(crate) struct SensingPoint {
    pub ctx: SensingContext,
    pub dict: IfftDictionary,
}

pub(crate) fn sensing_point(
    cfg: &SimConfig,
    ris: (usize, usize),
    ues: Vec<Vec3>,
    seed: u64,
    tag: u64,
) -> Result<SensingPoint> {
    let scene = SceneConfig {
        ris_dims: ris,
        ues,
        ..cfg.scene.clone()
    };
    let los = LosModel::new(&scene)?;
    let setup = SensingSetup::random(&scene, &los, &mut substream(seed, &[tag, 0]));
    let ctx = SensingContext::new(&scene, setup)?;
    let dict = IfftDictionary::new(&ctx, cfg.ifft_size.0, cfg.ifft_size.1)?;
    Ok(SensingPoint { ctx, dict })
}

/// Noisy IFFT trials for UE `k`, in trial order.
pub(crate) fn ifft_trials(
    pt: &SensingPoint,
    k: usize,
    trials: usize,
    seed: u64,
    tag: u64,
) -> Vec<TrialErr> {
    let ue = pt.ctx.ues[k];
    let truth = pt.ctx.los.psi_ue[k];
    let opts = EstimateOptions::default();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, &[tag, 1, k as u64, t as u64]);
            let y = simulate_sensing(&pt.ctx, k, &mut rng, NoiseMode::GaussianApprox);
            let e = estimate(&y, &pt.dict, &pt.ctx, &opts).ok()?;
            let p = locate(e.angle, &pt.ctx.ris, ue.z).ok()?;
            Some((
                (p - ue).xy().norm_squared(),
                wrapped(e.angle.azimuth - truth.azimuth).powi(2),
                (e.angle.elevation - truth.elevation).powi(2),
            ))
        })
        .collect()
}

fn push_sensing_rows(
    rows: &mut Vec<Row>,
    exp: &str,
    var: &str,
    x: f64,
    ue: Option<usize>,
    errs: &[TrialErr],
    suffix: &str,
) {
    let ok: Vec<_> = errs.iter().flatten().copied().collect();
    let (p, ps) = rmse(&ok.iter().map(|e| e.0).collect::<Vec<_>>());
    let (a, as_) = rmse(&ok.iter().map(|e| e.1).collect::<Vec<_>>());
    let (el, els) = rmse(&ok.iter().map(|e| e.2).collect::<Vec<_>>());
    rows.push(Row::new(exp, var, x, ue, &format!("rmse_pos{suffix}"), p).with_stderr(ps));
    rows.push(Row::new(exp, var, x, ue, &format!("rmse_azimuth{suffix}"), a).with_stderr(as_));
    rows.push(Row::new(exp, var, x, ue, &format!("rmse_elevation{suffix}"), el).with_stderr(els));
    rows.push(Row::new(
        exp,
        var,
        x,
        ue,
        &format!("failures{suffix}"),
        (errs.len() - ok.len()) as f64,
    ));
}

fn push_crb_rows(
    rows: &mut Vec<Row>,
    exp: &str,
    var: &str,
    x: f64,
    ue: Option<usize>,
    ctx: &SensingContext,
    k: usize,
) {
    match crb(ctx, k) {
        Ok(c) => {
            rows.push(Row::new(exp, var, x, ue, "crb_pos", c.crb_pos));
            rows.push(Row::new(exp, var, x, ue, "crb_azimuth", c.crb_azimuth));
            rows.push(Row::new(exp, var, x, ue, "crb_elevation", c.crb_elevation));
        }
        Err(_) => {
            for m in ["crb_pos", "crb_azimuth", "crb_elevation"] {
                rows.push(Row::new(exp, var, x, ue, m, f64::NAN));
            }
        }
    }
}

fn rate_scene(cfg: &SimConfig, ris: (usize, usize), ues: Vec<Vec3>) -> SceneConfig {
    SceneConfig {
        ris_dims: ris,
        ues,
        ..cfg.scene.clone()
    }
}

fn ga_seeded(cfg: &SimConfig, seed: u64, tag: u64) -> GaParams {
    GaParams {
        seed: substream(seed, &[tag, 2]).random(),
        ..cfg.ga.clone()
    }
}

fn sa_seeded(cfg: &SimConfig, seed: u64, tag: u64) -> SaParams {
    SaParams {
        seed: substream(seed, &[tag, 4]).random(),
        ..cfg.sa.clone()
    }
}

pub fn run_experiment(spec: &ExperimentSpec, cfg: &SimConfig) -> Result<Output> {
    spec.validate()?;
    cfg.validate()?;
    let exp = spec.experiment;
    let id = exp.id();
    let var = exp.sweep_var();
    let seed = spec.seed;
    let mut out = Output::default();
    let started = Instant::now();
    match exp {
        Experiment::RmseVsCrb => {
            for (i, &r) in spec.grid.iter().enumerate() {
                let pt = sensing_point(cfg, cfg.sensing_ris, vec![diagonal_ue(r)], seed, i as u64)?;
                push_crb_rows(&mut out.rows, id, var, r, Some(0), &pt.ctx, 0);
                let errs = ifft_trials(&pt, 0, spec.trials, seed, i as u64);
                push_sensing_rows(&mut out.rows, id, var, r, Some(0), &errs, "");
            }
        }
        Experiment::CrbVsMr => {
            let ranges = [10.0, 20.0, 30.0];
            let ues: Vec<Vec3> = ranges.iter().map(|&r| diagonal_ue(r)).collect();
            for (i, &m) in spec.grid.iter().enumerate() {
                let s = side(m)?;
                let scene = SceneConfig {
                    ris_dims: (s, s),
                    ues: ues.clone(),
                    ..cfg.scene.clone()
                };
                let los = LosModel::new(&scene)?;
                let setup =
                    SensingSetup::random(&scene, &los, &mut substream(seed, &[i as u64, 0]));
                let ctx = SensingContext::new(&scene, setup)?;
                for k in 0..ues.len() {
                    push_crb_rows(&mut out.rows, id, var, m, Some(k), &ctx, k);
                }
            }
            for (k, r) in ranges.iter().enumerate() {
                out.extras.push((format!("ue{k}_range_m"), r.to_string()));
            }
        }
        Experiment::IfftVsMle => {
            let trials = spec.trials.min(50);
            let mut t_ifft = 0.0;
            let mut t_mle = 0.0;
            for (i, &r) in spec.grid.iter().enumerate() {
                let pt = sensing_point(cfg, cfg.sensing_ris, vec![diagonal_ue(r)], seed, i as u64)?;
                let ue = pt.ctx.ues[0];
                let opts = EstimateOptions::default();
                let res: Vec<(TrialErr, TrialErr, f64, f64)> = (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = substream(seed, &[i as u64, 1, 0, t as u64]);
                        let y = simulate_sensing(&pt.ctx, 0, &mut rng, NoiseMode::GaussianApprox);
                        let sq = |a| -> TrialErr {
                            let p = locate(a, &pt.ctx.ris, ue.z).ok()?;
                            Some(((p - ue).xy().norm_squared(), 0.0, 0.0))
                        };
                        let t0 = Instant::now();
                        let a = estimate(&y, &pt.dict, &pt.ctx, &opts)
                            .ok()
                            .and_then(|e| sq(e.angle));
                        let d0 = t0.elapsed().as_secs_f64();
                        let t1 = Instant::now();
                        let b = mle_baseline(&y, &pt.ctx, cfg.mle_density, &opts)
                            .ok()
                            .and_then(|e| sq(e.angle));
                        (a, b, d0, t1.elapsed().as_secs_f64())
                    })
                    .collect();
                let ifft: Vec<_> = res.iter().map(|r| r.0).collect();
                let mle: Vec<_> = res.iter().map(|r| r.1).collect();
                t_ifft += res.iter().map(|r| r.2).sum::<f64>();
                t_mle += res.iter().map(|r| r.3).sum::<f64>();
                for (errs, name) in [(&ifft, "_ifft"), (&mle, "_mle")] {
                    let ok: Vec<f64> = errs.iter().flatten().map(|e| e.0).collect();
                    let (p, ps) = rmse(&ok);
                    out.rows.push(
                        Row::new(id, var, r, Some(0), &format!("rmse_pos{name}"), p)
                            .with_stderr(ps),
                    );
                    out.rows.push(Row::new(
                        id,
                        var,
                        r,
                        Some(0),
                        &format!("failures{name}"),
                        (errs.len() - ok.len()) as f64,
                    ));
                }
            }
            let n = (trials * spec.grid.len()) as f64;
            out.extras
                .push(("mean_runtime_ifft_s".into(), (t_ifft / n).to_string()));
            out.extras
                .push(("mean_runtime_mle_s".into(), (t_mle / n).to_string()));
        }
        Experiment::RateValidate => {
            let ues = ues_for(cfg, cfg.num_ues, seed);
            let scene = rate_scene(cfg, cfg.validate_ris, ues);
            let los = LosModel::new(&scene)?;
            for (i, &eta) in spec.grid.iter().enumerate() {
                let sp = SpConfig::uniform(&scene, eta)?;
                let ga = ga_optimize(&los, &sp, &ga_seeded(cfg, seed, i as u64))?;
                let cf = closed_form_rate(&los, &ga.best, &sp)?;
                let mc = empirical_rate(
                    &los,
                    &ga.best,
                    &sp,
                    cfg.mc_blocks,
                    substream(seed, &[i as u64, 3]).random(),
                );
                for (k, b) in cf.bounds.iter().enumerate() {
                    out.rows
                        .push(Row::new(id, var, eta, Some(k), "rate_cf", b.rate));
                    out.rows.push(Row::new(
                        id,
                        var,
                        eta,
                        Some(k),
                        "rate_cf_exact_residue",
                        b.rate_exact_residue(),
                    ));
                    out.rows.push(
                        Row::new(id, var, eta, Some(k), "rate_mc", mc.rate[k])
                            .with_stderr(mc.rate_se[k]),
                    );
                    out.rows.push(Row::new(
                        id,
                        var,
                        eta,
                        Some(k),
                        "rel_gap",
                        (b.rate - mc.rate[k]) / mc.rate[k],
                    ));
                }
                let mc_sum: f64 = mc.rate.iter().sum();
                out.rows.push(Row::new(
                    id,
                    var,
                    eta,
                    None,
                    "rate_cf",
                    cf.bounds.iter().map(|b| b.rate).sum(),
                ));
                out.rows
                    .push(Row::new(id, var, eta, None, "rate_mc", mc_sum));
            }
        }
        Experiment::RateVsMr => {
            let ues = ues_for(cfg, cfg.num_ues, seed);
            for (i, &m) in spec.grid.iter().enumerate() {
                let s = side(m)?;
                let scene = rate_scene(cfg, (s, s), ues.clone());
                let los = LosModel::new(&scene)?;
                let sp = SpConfig::uniform(&scene, cfg.eta)?;
                let tag = i as u64;
                let ga = ga_optimize(&los, &sp, &ga_seeded(cfg, seed, tag))?;
                let sa = sa_optimize(&los, &sp, &sa_seeded(cfg, seed, tag))?;
                let rnd = random_baseline(
                    &los,
                    &sp,
                    cfg.random_samples,
                    substream(seed, &[tag, 5]).random(),
                )?;
                out.rows
                    .push(Row::new(id, var, m, None, "sum_rate_ga", ga.fitness));
                out.rows
                    .push(Row::new(id, var, m, None, "sum_rate_sa", sa.fitness));
                out.rows.push(
                    Row::new(id, var, m, None, "sum_rate_random_mean", rnd.mean)
                        .with_stderr(rnd.stderr),
                );
                out.rows
                    .push(Row::new(id, var, m, None, "sum_rate_random_max", rnd.max));
            }
        }
        Experiment::PowerSweep => {
            let ues = ues_for(cfg, cfg.power_ues, seed);
            let scene = rate_scene(cfg, cfg.power_ris, ues);
            let los = LosModel::new(&scene)?;
            let rows: Vec<Vec<Row>> = spec
                .grid
                .par_iter()
                .enumerate()
                .map(|(i, &eta)| -> Result<Vec<Row>> {
                    let sp = SpConfig::uniform(&scene, eta)?;
                    let ga = ga_optimize(&los, &sp, &ga_seeded(cfg, seed, i as u64))?;
                    let fixed = PhaseProfile::random(
                        cfg.power_ris.0,
                        cfg.power_ris.1,
                        &mut substream(seed, &[u64::MAX - 1]),
                    );
                    let rnd = closed_form_rate(&los, &fixed, &sp)?;
                    Ok(vec![
                        Row::new(id, var, eta, None, "sum_rate_ga", ga.fitness),
                        Row::new(
                            id,
                            var,
                            eta,
                            None,
                            "sum_rate_fixed_random",
                            rnd.weighted_sum_rate,
                        ),
                    ])
                })
                .collect::<Result<_>>()?;
            out.rows.extend(rows.into_iter().flatten());
        }
        Experiment::FrameSim => {
            let mut c = cfg.clone();
            c.intervals = spec.grid.len();
            let ues = ues_for(cfg, cfg.num_ues, seed);
            let reports = run_frame(&c, &ues, SensingNoise::Gaussian, seed)?;
            out.rows = frame_rows(id, var, &reports);
        }
    }
    out.extras.push((
        "runtime_s".into(),
        started.elapsed().as_secs_f64().to_string(),
    ));
    Ok(out)
}

pub fn frame_rows(id: &str, var: &str, reports: &[super::frame::IntervalReport]) -> Vec<Row> {
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let mut rows = Vec::new();
    for r in reports {
        let x = r.interval as f64;
        for k in 0..r.positions.len() {
            rows.push(Row::new(
                id,
                var,
                x,
                Some(k),
                "pos_error",
                opt(r.position_error(k)),
            ));
            for (set, tag) in [(&r.est_loc, "est"), (&r.acc_loc, "acc")] {
                rows.push(Row::new(
                    id,
                    var,
                    x,
                    Some(k),
                    &format!("rate_cf_{tag}"),
                    opt(set.closed_form[k]),
                ));
                let mut mc = Row::new(
                    id,
                    var,
                    x,
                    Some(k),
                    &format!("rate_mc_{tag}"),
                    opt(set.monte_carlo[k]),
                );
                mc.stderr = set.mc_stderr[k];
                rows.push(mc);
            }
        }
        for (set, tag) in [(&r.est_loc, "est"), (&r.acc_loc, "acc")] {
            rows.push(Row::new(
                id,
                var,
                x,
                None,
                &format!("sum_rate_cf_{tag}"),
                set.sum_closed_form(),
            ));
            rows.push(Row::new(
                id,
                var,
                x,
                None,
                &format!("sum_rate_mc_{tag}"),
                set.sum_monte_carlo(),
            ));
        }
        rows.push(Row::new(id, var, x, None, "blocks", r.blocks as f64));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.id().parse::<Experiment>().unwrap(), e);
        }
        assert!(matches!(
            "fig-10".parse::<Experiment>(),
            Err(Error::UnknownExperiment(_))
        ));
    }

    #[test]
    fn placement_inside_rectangle() {
        let ues = place_ues(500, &mut substream(1, &[]));
        assert!(ues
            .iter()
            .all(|u| (-20.0..=-3.0).contains(&u.x) && (3.0..=20.0).contains(&u.y) && u.z == 0.0));
    }

    #[test]
    fn rmse_with_error() {
        let (r, se) = rmse(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!((r, se), (1.0, 0.0));
        assert!(rmse(&[]).0.is_nan());
    }

    #[test]
    fn crb_sweep_runs_small() {
        let cfg = SimConfig::desk();
        let spec = ExperimentSpec {
            experiment: Experiment::CrbVsMr,
            grid: vec![16.0, 36.0],
            trials: 1,
            seed: 3,
        };
        let out = run_experiment(&spec, &cfg).unwrap();
        assert_eq!(out.rows.len(), 2 * 3 * 3);
        let bad = ExperimentSpec {
            grid: vec![15.0],
            ..spec
        };
        assert!(run_experiment(&bad, &cfg).is_err());
    }
}
