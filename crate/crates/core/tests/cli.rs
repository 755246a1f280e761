use std::process::{Command, Output};

use ris_isac::harness::HEADER;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-isac"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn crb_prints_csv_to_stdout() {
    let out = run(&["crb", "--seed", "2", "--set", "ue_positions=-5,6,0;-12,9,0"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1].starts_with("crb,ue,0,0,crb_pos,"));
}

#[test]
fn out_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(
        &cfg,
        "# two UEs\nue_positions = -5,6,0; -8,15,0\neta = 0.3\nmc_blocks = 500\n",
    )
    .unwrap();
    let csv = dir.path().join("rate.csv");
    let out = run(&[
        "rate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.contains("rate,eta,0.3,1,rate_mc,"));
    let manifest = std::fs::read_to_string(dir.path().join("rate.csv.manifest")).unwrap();
    assert!(manifest.contains("command=rate\n") && manifest.contains("seed=4\n"));
    assert!(manifest.contains("eta=0.3\n") && manifest.contains("mc_blocks=500\n"));
}

#[test]
fn seeds_change_the_draws() {
    let a = run(&[
        "sense",
        "--seed",
        "1",
        "--set",
        "sensing_m_r_x=16",
        "--set",
        "sensing_m_r_z=16",
        "--set",
        "ifft_x=64",
        "--set",
        "ifft_z=64",
    ]);
    let b = run(&[
        "sense",
        "--seed",
        "2",
        "--set",
        "sensing_m_r_x=16",
        "--set",
        "sensing_m_r_z=16",
        "--set",
        "ifft_x=64",
        "--set",
        "ifft_z=64",
    ]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn bad_input_is_reported() {
    let out = run(&["rate", "--set", "warp_factor=9"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key `warp_factor`"));

    let out = run(&["sweep", "--experiment", "fig-99"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig-99"));

    let out = run(&["rate", "--set", "eta=1.5"]);
    assert!(!out.status.success());
}
