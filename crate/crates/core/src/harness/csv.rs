//! Long-format CSV rows and run manifests.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::Result;

pub const HEADER: &str = "experiment,sweep_var,sweep_value,ue,metric,value,stderr";

/// One statistic at one sweep point. `ue = None` means an aggregate over UEs.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub ue: Option<usize>,
    pub metric: String,
    /// `NaN` marks a missing value (for example a failed sensing step).
    pub value: f64,
    pub stderr: Option<f64>,
}

impl Row {
    pub fn new(
        experiment: &str,
        sweep_var: &str,
        sweep_value: f64,
        ue: Option<usize>,
        metric: &str,
        value: f64,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            sweep_var: sweep_var.into(),
            sweep_value,
            ue,
            metric: metric.into(),
            value,
            stderr: None,
        }
    }

    pub fn with_stderr(mut self, se: f64) -> Self {
        self.stderr = Some(se);
        self
    }
}

fn float(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v:e}")
    }
}

/// Render rows with the header. Numbers use Rust's shortest round-trip
/// scientific form, so identical values always print identically.
pub fn render(rows: &[Row]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.experiment,
            r.sweep_var,
            r.sweep_value,
            r.ue.map(|u| u.to_string()).unwrap_or_else(|| "all".into()),
            r.metric,
            float(r.value),
            r.stderr.map(float).unwrap_or_default()
        );
    }
    out
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// Write the CSV and a `<csv>.manifest` next to it holding the config, the
/// seed, the version and any extra (possibly non-deterministic) fields such
/// as run times, which are kept out of the CSV on purpose.
pub fn write_outputs(
    path: &Path,
    rows: &[Row],
    config: &str,
    seed: u64,
    command: &str,
    extras: &[(String, String)],
) -> Result<()> {
    std::fs::write(path, render(rows))?;
    let mut f = std::fs::File::create(manifest_path(path))?;
    writeln!(f, "version=v{}", env!("CARGO_PKG_VERSION"))?;
    writeln!(f, "command={command}")?;
    writeln!(f, "seed={seed}")?;
    for (k, v) in extras {
        writeln!(f, "{k}={v}")?;
    }
    write!(f, "{config}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_missing_and_aggregate() {
        let rows = vec![
            Row::new("x", "r", 5.0, Some(1), "rmse", 0.25).with_stderr(0.01),
            Row::new("x", "r", 0.15, None, "rate", f64::NAN),
        ];
        let s = render(&rows);
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines[1], "x,r,5,1,rmse,2.5e-1,1e-2");
        assert_eq!(lines[2], "x,r,0.15,all,rate,NA,");
    }

    #[test]
    fn writes_manifest_next_to_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_outputs(
            &p,
            &[],
            "eta=0.5\n",
            7,
            "sweep",
            &[("runtime_s".into(), "1".into())],
        )
        .unwrap();
        let m = std::fs::read_to_string(manifest_path(&p)).unwrap();
        assert!(m.contains("seed=7\n") && m.contains("eta=0.5\n") && m.starts_with("version=v"));
        assert_eq!(std::fs::read_to_string(&p).unwrap(), format!("{HEADER}\n"));
    }
}
