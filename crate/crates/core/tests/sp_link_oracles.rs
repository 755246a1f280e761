//! Closed-form SINR terms that are exact expectations, checked against block
//! simulation of the detector output.

use ris_isac::channel::{LosModel, PhaseProfile, Rician, SceneConfig};
use ris_isac::geometry::Vec3;
use ris_isac::rng::substream;
use ris_isac::sp_link::{
    closed_form_rate, despread_and_estimate, generate_block, lmmse_scalars, moments, mrc_detect,
    pilots, SpConfig,
};
use ris_isac::C64;

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

struct Mean {
    n: f64,
    s: f64,
    s2: f64,
}

impl Mean {
    fn new() -> Self {
        Self {
            n: 0.0,
            s: 0.0,
            s2: 0.0,
        }
    }
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        self.s += v;
        self.s2 += v * v;
    }
    fn z(&self, expect: f64) -> f64 {
        let m = self.s / self.n;
        let se = ((self.s2 / self.n - m * m) / (self.n - 1.0)).sqrt();
        (m - expect) / se
    }
}

fn scene(rice0: Rician, ue_db_offset: f64) -> SceneConfig {
    let base = SceneConfig::table_one();
    SceneConfig {
        ris_dims: (2, 2),
        bs_dims: (3, 1),
        ues: vec![
            Vec3::new(-6.0, 8.0, 0.0),
            Vec3::new(-12.0, 4.0, 0.0),
            Vec3::new(-9.0, 14.0, 0.0),
        ],
        rice_bs_ris: rice0,
        rice_ris_ue: Rician::Factor(2.0),
        ue_power: base.ue_power * 10f64.powf(ue_db_offset / 10.0),
        tau_c: 5e-5,
        ..base
    }
}

/// `numerator = E‖z₁‖²`, `Π₀ = E‖z₂‖²`, `Π₁₄ = E‖z₃⁽⁴⁾‖²` and the exact pilot
/// residue `E‖z₃⁽³⁾‖²` for every UE.
fn check(s: &SceneConfig, seed: u64) {
    let los = LosModel::new(s).unwrap();
    let profile = PhaseProfile::random(2, 2, &mut substream(seed, &[]));
    let sp = SpConfig::uniform(s, 0.4).unwrap();
    let report = closed_form_rate(&los, &profile, &sp).unwrap();
    let mo = moments(&los, &profile);
    let c = lmmse_scalars(&mo.chi, &sp);
    let phi = pilots(sp.tau, s.ues.len());
    let k_count = s.ues.len();
    let mut acc: Vec<[Mean; 4]> = (0..k_count)
        .map(|_| [Mean::new(), Mean::new(), Mean::new(), Mean::new()])
        .collect();
    for b in 0..200_000u64 {
        let block = generate_block(&los, &profile, &sp, &phi, &mut substream(seed, &[1, b]));
        let gh = despread_and_estimate(&block.y, &phi, &c);
        let det = mrc_detect(&block, &gh, &phi, &sp, &mo.chi, los.m_b);
        for (k, d) in det.iter().enumerate() {
            acc[k][0].push(norm2(&d.z1));
            acc[k][1].push(norm2(&d.z2));
            acc[k][2].push(norm2(&d.z3[2]));
            acc[k][3].push(norm2(&d.z3[3]));
        }
    }
    for (k, b) in report.bounds.iter().enumerate() {
        let t = &b.terms;
        let expect = [b.numerator, t.pi0, t.pi13_exact, t.pi14];
        for (name, (a, e)) in ["numerator", "pi0", "pi13_exact", "pi14"]
            .iter()
            .zip(acc[k].iter().zip(expect))
        {
            let z = a.z(e);
            assert!(
                z.abs() < 4.0,
                "ue {k} {name}: z = {z:.2}, closed form {e:e}"
            );
        }
    }
}

#[test]
fn exact_terms_match_simulation_rich_scattering() {
    check(&scene(Rician::Factor(3.0), 0.0), 21);
}

#[test]
fn exact_terms_match_simulation_strong_bs_ris_los() {
    check(&scene(Rician::Factor(50.0), -10.0), 22);
}

#[test]
fn printed_pilot_residue_term_undershoots_under_strong_los() {
    let s = SceneConfig {
        ris_dims: (2, 2),
        ..SceneConfig::table_one()
    };
    let los = LosModel::new(&s).unwrap();
    let profile = PhaseProfile::random(2, 2, &mut substream(3, &[]));
    let sp = SpConfig::uniform(&s, 0.5).unwrap();
    let report = closed_form_rate(&los, &profile, &sp).unwrap();
    assert!(report
        .bounds
        .iter()
        .any(|b| b.terms.pi13_exact > 2.0 * b.terms.pi13));
    for b in &report.bounds {
        assert!(b.terms.pi13_exact > 0.0 && b.terms.pi13 > 0.0);
    }
}

/// A GA profile on a 10x10 RIS beams at the nearest UE. Its SINR is high
/// and the printed bound lands far above the simulated rate, while the
/// exact-residue variant stays just under it.
#[test]
fn focused_profile_breaks_printed_bound_but_not_exact_residue() {
    use ris_isac::optimize::{ga_optimize, GaParams};
    use ris_isac::sp_link::empirical_rate;

    let s = SceneConfig {
        ues: vec![
            Vec3::new(-13.55, 9.63, 0.0),
            Vec3::new(-13.40, 6.66, 0.0),
            Vec3::new(-17.26, 7.21, 0.0),
            Vec3::new(-7.06, 5.42, 0.0),
        ],
        ..SceneConfig::table_one()
    };
    let los = LosModel::new(&s).unwrap();
    let sp = SpConfig::uniform(&s, 0.5).unwrap();
    let ga = ga_optimize(
        &los,
        &sp,
        &GaParams {
            seed: 3,
            ..GaParams::default()
        },
    )
    .unwrap();
    let cf = closed_form_rate(&los, &ga.best, &sp).unwrap();
    let mc = empirical_rate(&los, &ga.best, &sp, 4_000, 5);
    let k = 3;
    let b = &cf.bounds[k];
    assert!(
        b.rate > mc.rate[k] + 10.0 * mc.rate_se[k],
        "{} vs {}",
        b.rate,
        mc.rate[k]
    );
    assert!(b.terms.pi13_exact > 10.0 * b.terms.pi13);
    let exact = b.rate_exact_residue();
    assert!(
        exact <= mc.rate[k] + 2.0 * mc.rate_se[k],
        "{exact} vs {}",
        mc.rate[k]
    );
    assert!((exact - mc.rate[k]).abs() < 0.03 * mc.rate[k]);
}
