use std::io::Write;

use super::RegularizedPath;
use crate::error::Result;
use crate::fbm::FbmPath;
use crate::scalar::Real;

/// CSV `t,X_eps,noise_value` preceded by `# key=value` metadata lines.
pub fn write_solution_csv<T: Real, W: Write>(
    path: &RegularizedPath<T>,
    noise: &FbmPath<T>,
    extra: &[(&str, String)],
    mut out: W,
) -> Result<()> {
    let s = &path.spec;
    writeln!(out, "# x0={}", s.x0.as_f64())?;
    writeln!(out, "# a={}", s.a.as_f64())?;
    writeln!(out, "# b={}", s.b.as_f64())?;
    writeln!(out, "# sigma={}", s.sigma.as_f64())?;
    writeln!(out, "# hurst={}", s.hurst.value().as_f64())?;
    writeln!(out, "# epsilon={}", path.epsilon.as_f64())?;
    writeln!(out, "# scheme={:?}", path.scheme)?;
    writeln!(out, "# master_seed={}", noise.seed.master_seed)?;
    writeln!(out, "# path_index={}", noise.seed.path_index)?;
    writeln!(out, "# noise={}", path.noise_ref)?;
    for (k, v) in extra {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "X_eps", "noise_value"])?;
    for (k, (x, b)) in path.values.iter().zip(&noise.values).enumerate() {
        w.write_record([
            path.grid.node(k).as_f64().to_string(),
            x.as_f64().to_string(),
            b.as_f64().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
