//! Plain-text path archive and CSV export.
//!
//! Archive layout: `key=value` header lines prefixed with `#`, then one
//! value per line. Values are written with shortest round-trip formatting,
//! so reading back reproduces the `f64` path exactly.

use std::io::{BufRead, Write};

use super::{FbmPath, GeneratorTag, HurstParam, SeedRecord, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const ARCHIVE_VERSION: u32 = 1;

pub fn write_path_archive<T: Real, W: Write>(path: &FbmPath<T>, mut out: W) -> Result<()> {
    writeln!(out, "# sfbm-path")?;
    writeln!(out, "# format_version={ARCHIVE_VERSION}")?;
    writeln!(out, "# hurst={}", path.hurst.value().as_f64())?;
    writeln!(out, "# horizon={}", path.grid.horizon().as_f64())?;
    writeln!(out, "# steps={}", path.grid.steps())?;
    writeln!(out, "# master_seed={}", path.seed.master_seed)?;
    writeln!(out, "# path_index={}", path.seed.path_index)?;
    writeln!(out, "# generator={}", path.generator)?;
    writeln!(out, "# refinements={}", path.refinements)?;
    for v in &path.values {
        writeln!(out, "{}", v.as_f64())?;
    }
    Ok(())
}

fn header<'a>(fields: &'a [(String, String)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Archive(format!("missing header `{key}`")))
}

fn parse<V: std::str::FromStr>(fields: &[(String, String)], key: &str) -> Result<V> {
    header(fields, key)?
        .parse()
        .map_err(|_| Error::Archive(format!("malformed header `{key}`")))
}

pub fn read_path_archive<T: Real, R: BufRead>(input: R) -> Result<FbmPath<T>> {
    let mut fields = Vec::new();
    let mut values = Vec::new();
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                fields.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::Archive(format!("malformed value `{line}`")))?;
        values.push(T::of(v));
    }
    let version: u32 = parse(&fields, "format_version")?;
    if version != ARCHIVE_VERSION {
        return Err(Error::Archive(format!(
            "unsupported format version {version}"
        )));
    }
    let grid = TimeGrid::new(T::of(parse(&fields, "horizon")?), parse(&fields, "steps")?)?;
    if values.len() != grid.len() {
        return Err(Error::Archive(format!(
            "expected {} values, found {}",
            grid.len(),
            values.len()
        )));
    }
    Ok(FbmPath {
        grid,
        values,
        hurst: HurstParam::new(T::of(parse(&fields, "hurst")?))?,
        seed: SeedRecord::new(
            parse(&fields, "master_seed")?,
            parse(&fields, "path_index")?,
        ),
        generator: header(&fields, "generator")?.parse::<GeneratorTag>()?,
        refinements: parse(&fields, "refinements")?,
    })
}

/// CSV with columns `t,value`, preceded by `# key=value` lines naming the
/// seed and generator.
pub fn write_path_csv<T: Real, W: Write>(path: &FbmPath<T>, mut out: W) -> Result<()> {
    writeln!(out, "# hurst={}", path.hurst.value().as_f64())?;
    writeln!(out, "# master_seed={}", path.seed.master_seed)?;
    writeln!(out, "# path_index={}", path.seed.path_index)?;
    writeln!(out, "# generator={}", path.generator)?;
    writeln!(out, "# refinements={}", path.refinements)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value"])?;
    for (k, v) in path.values.iter().enumerate() {
        w.write_record([
            path.grid.node(k).as_f64().to_string(),
            v.as_f64().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
