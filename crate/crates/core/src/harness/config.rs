//! Flat `key=value` configuration layered over Table I defaults and a
//! desk or full preset.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{db_to_linear, dbm_to_watts, Rician, SceneConfig};
use crate::geometry::{Frame, Mat3, Vec3};
use crate::optimize::{GaParams, SaParams};
use crate::{Error, Result};

/// Everything an experiment or CLI command needs besides the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scene: SceneConfig,
    /// Data share of the UE power, `η = p/(p+q)`.
    pub eta: f64,
    /// UE count when positions are drawn at random.
    pub num_ues: usize,
    /// Explicit UE positions replace the random placement when set.
    pub ue_positions: Option<Vec<Vec3>>,
    /// RIS used by the sensing experiments.
    pub sensing_ris: (usize, usize),
    pub ifft_size: (usize, usize),
    /// MLE grid points per RIS resolution cell.
    pub mle_density: f64,
    /// RIS of the closed-form vs Monte-Carlo validation.
    pub validate_ris: (usize, usize),
    /// RIS and UE count of the power-allocation sweep.
    pub power_ris: (usize, usize),
    pub power_ues: usize,
    pub ga: GaParams,
    pub sa: SaParams,
    /// Noise realisations per sensing point.
    pub trials: usize,
    /// Monte-Carlo coherence blocks per rate point.
    pub mc_blocks: usize,
    pub random_samples: usize,
    /// Per-axis standard deviation of one random-walk step (m).
    pub walk_std: f64,
    pub intervals: usize,
}

impl SimConfig {
    /// Desk-scale defaults on top of Table I.
    pub fn desk() -> Self {
        let mut scene = SceneConfig::table_one();
        scene.ues.clear();
        Self {
            scene,
            eta: 0.5,
            num_ues: 4,
            ue_positions: None,
            sensing_ris: (64, 64),
            ifft_size: (256, 256),
            mle_density: 1.0,
            validate_ris: (2, 2),
            power_ris: (20, 20),
            power_ues: 8,
            ga: GaParams::default(),
            sa: SaParams::default(),
            trials: 200,
            mc_blocks: 10_000,
            random_samples: 1_000,
            walk_std: 0.5,
            intervals: 5,
        }
    }

    /// Paper-scale trial counts.
    pub fn full() -> Self {
        Self {
            power_ues: 16,
            trials: 1_000,
            random_samples: 10_000,
            ..Self::desk()
        }
    }

    pub fn preset(full: bool) -> Self {
        if full {
            Self::full()
        } else {
            Self::desk()
        }
    }

    pub fn from_file(path: &Path, full: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::preset(full);
        cfg.apply(&text)?;
        Ok(cfg)
    }

    /// Apply `key=value` lines; `#` starts a comment.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            self.set(key.trim(), value.trim()).map_err(err)?;
        }
        self.validate()
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let s = &mut self.scene;
        match key {
            "p_b_mw" => s.bs_power = num(v)? * 1e-3,
            "p_u_mw" => s.ue_power = num(v)? * 1e-3,
            "n0_dbm_hz" => s.noise_psd = dbm_to_watts(num(v)?),
            "noise_figure_db" => s.noise_figure = db_to_linear(num(v)?),
            "bandwidth_hz" => s.bandwidth_hz = num(v)?,
            "carrier_ghz" => s.carrier_hz = num(v)? * 1e9,
            "tau_p_ms" => s.tau_p = num(v)? * 1e-3,
            "tau_c_ms" => s.tau_c = num(v)? * 1e-3,
            "tau_l_s" => s.tau_l = num(v)?,
            "pathloss_exponent" => s.pathloss_exponent = num(v)?,
            "rice_0" => s.rice_bs_ris = rician(v)?,
            "rice_k" => s.rice_ris_ue = rician(v)?,
            "l_b" => s.bs = Frame::new(vec3(v)?, s.bs.rotation).map_err(|e| e.to_string())?,
            "l_r" => s.ris = Frame::new(vec3(v)?, s.ris.rotation).map_err(|e| e.to_string())?,
            "v_b" => s.bs = Frame::new(s.bs.origin, mat3(v)?).map_err(|e| e.to_string())?,
            "v_r" => s.ris = Frame::new(s.ris.origin, mat3(v)?).map_err(|e| e.to_string())?,
            "m_b_x" => s.bs_dims.0 = int(v)?,
            "m_b_z" => s.bs_dims.1 = int(v)?,
            "m_r_x" => s.ris_dims.0 = int(v)?,
            "m_r_z" => s.ris_dims.1 = int(v)?,
            "ue_positions" => {
                let ues = v
                    .split(';')
                    .filter(|p| !p.trim().is_empty())
                    .map(vec3)
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                self.num_ues = ues.len();
                self.ue_positions = Some(ues);
            }
            "num_ues" => self.num_ues = int(v)?,
            "eta" => self.eta = num(v)?,
            "sensing_m_r_x" => self.sensing_ris.0 = int(v)?,
            "sensing_m_r_z" => self.sensing_ris.1 = int(v)?,
            "ifft_x" => self.ifft_size.0 = int(v)?,
            "ifft_z" => self.ifft_size.1 = int(v)?,
            "mle_density" => self.mle_density = num(v)?,
            "validate_m_r_x" => self.validate_ris.0 = int(v)?,
            "validate_m_r_z" => self.validate_ris.1 = int(v)?,
            "power_m_r_x" => self.power_ris.0 = int(v)?,
            "power_m_r_z" => self.power_ris.1 = int(v)?,
            "power_ues" => self.power_ues = int(v)?,
            "ga_population" => self.ga.population = int(v)?,
            "ga_elite" => self.ga.elite = int(v)?,
            "ga_crossover" => self.ga.crossover = int(v)?,
            "ga_mutation" => self.ga.mutation = int(v)?,
            "ga_mutation_prob" => self.ga.mutation_prob = num(v)?,
            "ga_mutation_sigma" => self.ga.mutation_sigma = num(v)?,
            "ga_tournament" => self.ga.tournament = int(v)?,
            "ga_generations" => self.ga.generations = int(v)?,
            "ga_stagnation" => self.ga.stagnation = int(v)?,
            "sa_t0" => self.sa.initial_temperature = num(v)?,
            "sa_cooling" => self.sa.cooling = num(v)?,
            "sa_iterations" => self.sa.iterations = int(v)?,
            "sa_step" => self.sa.step = num(v)?,
            "trials" => self.trials = int(v)?,
            "mc_blocks" => self.mc_blocks = int(v)?,
            "random_samples" => self.random_samples = int(v)?,
            "walk_std_m" => self.walk_std = num(v)?,
            "intervals" => self.intervals = int(v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        let mut probe = self.scene.clone();
        probe.ues = vec![Vec3::new(-5.0, 6.0, 0.0)];
        probe.validate()?;
        if !(0.0..=1.0).contains(&self.eta) {
            return bad("eta must lie in [0, 1]");
        }
        if self.num_ues == 0 || self.power_ues == 0 {
            return bad("UE counts must be positive");
        }
        if self.trials == 0 || self.mc_blocks == 0 || self.random_samples == 0 {
            return bad("trials, mc_blocks and random_samples must be positive");
        }
        if !(self.walk_std >= 0.0) {
            return bad("walk_std_m must be non-negative");
        }
        if !(self.mle_density > 0.0) {
            return bad("mle_density must be positive");
        }
        for d in [
            self.sensing_ris,
            self.ifft_size,
            self.validate_ris,
            self.power_ris,
        ] {
            if d.0 == 0 || d.1 == 0 {
                return bad("array and IFFT sizes must be positive");
            }
        }
        self.ga.validate()
    }

    /// Canonical dump of every key, used in run manifests.
    pub fn to_text(&self) -> String {
        let s = &self.scene;
        let v3 = |v: &Vec3| format!("{},{},{}", v.x, v.y, v.z);
        let m3 = |m: &Mat3| {
            m.transpose()
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let ric = |r: Rician| match r {
            Rician::Factor(e) => e.to_string(),
            Rician::PureLos => "los".into(),
        };
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("p_b_mw", (s.bs_power * 1e3).to_string());
        kv("p_u_mw", (s.ue_power * 1e3).to_string());
        kv(
            "n0_dbm_hz",
            (10.0 * (s.noise_psd * 1e3).log10()).to_string(),
        );
        kv(
            "noise_figure_db",
            (10.0 * s.noise_figure.log10()).to_string(),
        );
        kv("bandwidth_hz", s.bandwidth_hz.to_string());
        kv("carrier_ghz", (s.carrier_hz / 1e9).to_string());
        kv("tau_p_ms", (s.tau_p * 1e3).to_string());
        kv("tau_c_ms", (s.tau_c * 1e3).to_string());
        kv("tau_l_s", s.tau_l.to_string());
        kv("pathloss_exponent", s.pathloss_exponent.to_string());
        kv("rice_0", ric(s.rice_bs_ris));
        kv("rice_k", ric(s.rice_ris_ue));
        kv("l_b", v3(&s.bs.origin));
        kv("l_r", v3(&s.ris.origin));
        kv("v_b", m3(&s.bs.rotation));
        kv("v_r", m3(&s.ris.rotation));
        kv("m_b_x", s.bs_dims.0.to_string());
        kv("m_b_z", s.bs_dims.1.to_string());
        kv("m_r_x", s.ris_dims.0.to_string());
        kv("m_r_z", s.ris_dims.1.to_string());
        if let Some(ues) = &self.ue_positions {
            kv(
                "ue_positions",
                ues.iter().map(v3).collect::<Vec<_>>().join(";"),
            );
        } else {
            kv("num_ues", self.num_ues.to_string());
        }
        kv("eta", self.eta.to_string());
        kv("sensing_m_r_x", self.sensing_ris.0.to_string());
        kv("sensing_m_r_z", self.sensing_ris.1.to_string());
        kv("ifft_x", self.ifft_size.0.to_string());
        kv("ifft_z", self.ifft_size.1.to_string());
        kv("mle_density", self.mle_density.to_string());
        kv("validate_m_r_x", self.validate_ris.0.to_string());
        kv("validate_m_r_z", self.validate_ris.1.to_string());
        kv("power_m_r_x", self.power_ris.0.to_string());
        kv("power_m_r_z", self.power_ris.1.to_string());
        kv("power_ues", self.power_ues.to_string());
        kv("ga_population", self.ga.population.to_string());
        kv("ga_elite", self.ga.elite.to_string());
        kv("ga_crossover", self.ga.crossover.to_string());
        kv("ga_mutation", self.ga.mutation.to_string());
        kv("ga_mutation_prob", self.ga.mutation_prob.to_string());
        kv("ga_mutation_sigma", self.ga.mutation_sigma.to_string());
        kv("ga_tournament", self.ga.tournament.to_string());
        kv("ga_generations", self.ga.generations.to_string());
        kv("ga_stagnation", self.ga.stagnation.to_string());
        kv("sa_t0", self.sa.initial_temperature.to_string());
        kv("sa_cooling", self.sa.cooling.to_string());
        kv("sa_iterations", self.sa.iterations.to_string());
        kv("sa_step", self.sa.step.to_string());
        kv("trials", self.trials.to_string());
        kv("mc_blocks", self.mc_blocks.to_string());
        kv("random_samples", self.random_samples.to_string());
        kv("walk_std_m", self.walk_std.to_string());
        kv("intervals", self.intervals.to_string());
        out
    }
}

fn num(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a number, got `{v}`"))
}

fn int(v: &str) -> std::result::Result<usize, String> {
    v.parse()
        .map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn rician(v: &str) -> std::result::Result<Rician, String> {
    if v.eq_ignore_ascii_case("los") {
        Ok(Rician::PureLos)
    } else {
        num(v).map(Rician::Factor)
    }
}

fn list(v: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let xs = v
        .split(',')
        .map(|x| num(x.trim()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if xs.len() != n {
        return Err(format!(
            "expected {n} comma-separated numbers, got {}",
            xs.len()
        ));
    }
    Ok(xs)
}

fn vec3(v: &str) -> std::result::Result<Vec3, String> {
    let x = list(v, 3)?;
    Ok(Vec3::new(x[0], x[1], x[2]))
}

/// Row-major 3x3.
fn mat3(v: &str) -> std::result::Result<Mat3, String> {
    Ok(Mat3::from_row_slice(&list(v, 9)?))
}
