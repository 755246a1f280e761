//! Configuration, mobility, frame simulation and the seeded experiment
//! sweeps driven by the `ris-isac` binary.

mod config;
mod csv;
mod experiments;
mod frame;
mod mobility;

pub use config::SimConfig;
pub use csv::{manifest_path, render, write_outputs, Row, HEADER};
pub use experiments::{
    diagonal_ue, frame_rows, place_ues, run_experiment, ues_for, Experiment, ExperimentSpec, Output,
};
pub use frame::{run_frame, sense_positions, IntervalReport, RateSet, SensingNoise};
pub use mobility::{step_mobility, MobilityModel};

use rand::Rng;

use crate::channel::{LosModel, PhaseProfile, SceneConfig};
use crate::optimize::{ga_optimize, random_baseline, sa_optimize, GaParams, SaParams};
use crate::rng::substream;
use crate::sensing::{crb, SensingContext, SensingSetup};
use crate::sp_link::{closed_form_rate, empirical_rate, SpConfig};
use crate::Result;

/// Single-scene commands; `Sweep` runs one of the figure experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Crb,
    Sense,
    Rate,
    Optimize,
    Frame,
    Sweep(Experiment),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Crb => "crb".into(),
            Command::Sense => "sense".into(),
            Command::Rate => "rate".into(),
            Command::Optimize => "optimize".into(),
            Command::Frame => "frame".into(),
            Command::Sweep(e) => format!("sweep {}", e.id()),
        }
    }
}

/// Run a command. UEs come from the config, or are placed at random from
/// `seed` when none are given.
pub fn run(command: Command, cfg: &SimConfig, seed: u64) -> Result<Output> {
    cfg.validate()?;
    if let Command::Sweep(e) = command {
        return run_experiment(&ExperimentSpec::new(e, cfg, seed), cfg);
    }
    let ues = ues_for(cfg, cfg.num_ues, seed);
    let id = command.name();
    let mut out = Output::default();
    match command {
        Command::Crb => {
            let scene = SceneConfig {
                ris_dims: cfg.sensing_ris,
                ues: ues.clone(),
                ..cfg.scene.clone()
            };
            let los = LosModel::new(&scene)?;
            let setup = SensingSetup::random(&scene, &los, &mut substream(seed, &[0, 0]));
            let ctx = SensingContext::new(&scene, setup)?;
            for k in 0..ues.len() {
                let (p, a, e) = match crb(&ctx, k) {
                    Ok(c) => (c.crb_pos, c.crb_azimuth, c.crb_elevation),
                    Err(_) => (f64::NAN, f64::NAN, f64::NAN),
                };
                for (m, v) in [("crb_pos", p), ("crb_azimuth", a), ("crb_elevation", e)] {
                    out.rows.push(Row::new(&id, "ue", k as f64, Some(k), m, v));
                }
            }
        }
        Command::Sense => {
            let est = sense_positions(cfg, &ues, SensingNoise::Gaussian, seed, 0)?;
            for (k, (u, e)) in ues.iter().zip(&est).enumerate() {
                let (ex, ey, err) = match e {
                    Some(p) => (p.x, p.y, (p - u).norm()),
                    None => (f64::NAN, f64::NAN, f64::NAN),
                };
                for (m, v) in [
                    ("true_x", u.x),
                    ("true_y", u.y),
                    ("est_x", ex),
                    ("est_y", ey),
                    ("pos_error", err),
                ] {
                    out.rows.push(Row::new(&id, "ue", k as f64, Some(k), m, v));
                }
            }
        }
        Command::Rate => {
            let scene = SceneConfig {
                ues,
                ..cfg.scene.clone()
            };
            let los = LosModel::new(&scene)?;
            let sp = SpConfig::uniform(&scene, cfg.eta)?;
            let (mx, mz) = scene.ris_dims;
            let profile = PhaseProfile::random(mx, mz, &mut substream(seed, &[0, 6]));
            let cf = closed_form_rate(&los, &profile, &sp)?;
            let mc = empirical_rate(
                &los,
                &profile,
                &sp,
                cfg.mc_blocks,
                substream(seed, &[0, 3]).random(),
            );
            for (k, b) in cf.bounds.iter().enumerate() {
                out.rows
                    .push(Row::new(&id, "eta", cfg.eta, Some(k), "rate_cf", b.rate));
                out.rows.push(Row::new(
                    &id,
                    "eta",
                    cfg.eta,
                    Some(k),
                    "rate_cf_exact_residue",
                    b.rate_exact_residue(),
                ));
                out.rows.push(
                    Row::new(&id, "eta", cfg.eta, Some(k), "rate_mc", mc.rate[k])
                        .with_stderr(mc.rate_se[k]),
                );
            }
            out.rows.push(Row::new(
                &id,
                "eta",
                cfg.eta,
                None,
                "weighted_sum_rate_cf",
                cf.weighted_sum_rate,
            ));
        }
        Command::Optimize => {
            let scene = SceneConfig {
                ues,
                ..cfg.scene.clone()
            };
            let los = LosModel::new(&scene)?;
            let sp = SpConfig::uniform(&scene, cfg.eta)?;
            let ga = ga_optimize(
                &los,
                &sp,
                &GaParams {
                    seed: substream(seed, &[0, 2]).random(),
                    ..cfg.ga.clone()
                },
            )?;
            let sa = sa_optimize(
                &los,
                &sp,
                &SaParams {
                    seed: substream(seed, &[0, 4]).random(),
                    ..cfg.sa.clone()
                },
            )?;
            let rnd = random_baseline(
                &los,
                &sp,
                cfg.random_samples,
                substream(seed, &[0, 5]).random(),
            )?;
            for (g, v) in ga.trace.iter().enumerate() {
                out.rows
                    .push(Row::new(&id, "generation", g as f64, None, "ga_best", *v));
            }
            let m = scene.m_r() as f64;
            out.rows
                .push(Row::new(&id, "m_r", m, None, "sum_rate_ga", ga.fitness));
            out.rows
                .push(Row::new(&id, "m_r", m, None, "sum_rate_sa", sa.fitness));
            out.rows.push(
                Row::new(&id, "m_r", m, None, "sum_rate_random_mean", rnd.mean)
                    .with_stderr(rnd.stderr),
            );
            out.rows.push(Row::new(
                &id,
                "m_r",
                m,
                None,
                "sum_rate_random_max",
                rnd.max,
            ));
        }
        Command::Frame => {
            let reports = run_frame(cfg, &ues, SensingNoise::Gaussian, seed)?;
            out.rows = frame_rows(&id, "interval", &reports);
        }
        Command::Sweep(_) => unreachable!(),
    }
    Ok(out)
}
