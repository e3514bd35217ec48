use std::io::Write;

use super::EpsilonFamily;
use crate::error::Result;
use crate::scalar::Real;

/// CSV `t,noise,X_eps_0..X_eps_J,limit_estimate` with `# key=value` metadata.
pub fn write_family_csv<T: Real, W: Write>(family: &EpsilonFamily<T>, mut out: W) -> Result<()> {
    let s = &family.spec;
    writeln!(out, "# x0={}", s.x0.as_f64())?;
    writeln!(out, "# a={}", s.a.as_f64())?;
    writeln!(out, "# b={}", s.b.as_f64())?;
    writeln!(out, "# sigma={}", s.sigma.as_f64())?;
    writeln!(out, "# hurst={}", s.hurst.value().as_f64())?;
    let levels: Vec<String> = family
        .ladder
        .levels()
        .iter()
        .map(|e| e.as_f64().to_string())
        .collect();
    writeln!(out, "# epsilons={}", levels.join(";"))?;
    writeln!(out, "# master_seed={}", family.noise.seed.master_seed)?;
    writeln!(out, "# path_index={}", family.noise.seed.path_index)?;
    writeln!(out, "# noise={}", family.noise_ref())?;
    writeln!(out, "# cauchy_gap={}", family.cauchy_gap.as_f64())?;

    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "noise".to_string()];
    header.extend((0..family.solutions.len()).map(|j| format!("X_eps_{j}")));
    header.push("limit_estimate".into());
    w.write_record(&header)?;
    let grid = family.grid();
    for k in 0..grid.len() {
        let mut row = Vec::with_capacity(header.len());
        row.push(grid.node(k).as_f64().to_string());
        row.push(family.noise.values[k].as_f64().to_string());
        row.extend(
            family
                .solutions
                .iter()
                .map(|s| s.values[k].as_f64().to_string()),
        );
        row.push(family.limit_estimate[k].as_f64().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
