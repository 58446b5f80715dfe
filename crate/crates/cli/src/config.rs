//! TOML input files: metrics, vector fields, diffeomorphisms and soliton
//! cases.
//!
//! ```toml
//! # metric
//! name = "sphere2"
//! dim = 2
//! F2 = "4*(y1^2+y2^2)/(1+x1^2+x2^2)^2"
//!
//! # vector field
//! dim = 2
//! v1 = "0.5*x1"
//! v2 = "0.5*x2"
//!
//! # diffeomorphism, inverse optional
//! dim = 2
//! phi1 = "x1 + 0.1*x2^2"
//! phi2 = "x2"
//! psi1 = "x1 - 0.1*x2^2"
//! psi2 = "x2"
//!
//! # soliton case; metric and field are paths relative to this file or
//! # inline tables
//! metric = "../metrics/euclidean2.toml"
//! field = "../fields/gaussian.toml"
//! lambda = 0.5
//! [grid]
//! lo = -1.0
//! hi = 1.0
//! resolution = 3
//! directions = 8
//! [flow]
//! tmax = 0.9
//! times = 10
//! dt = 1e-4
//! steps_per_unit = 200
//! ```

use std::path::{Path, PathBuf};

use finsler_ricci::{FinslerStructure, SampleGrid, SymbolicDiffeo, VectorField};
use toml::{Table, Value};

use crate::error::CliError;

fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    text.parse::<Table>().map_err(|e| CliError::config(path.display(), e.message()))
}

/// Typed access to one table with unknown-key detection.
struct Fields<'a> {
    origin: String,
    table: &'a Table,
    used: Vec<String>,
}

impl<'a> Fields<'a> {
    fn new(origin: String, table: &'a Table) -> Self {
        Fields { origin, table, used: Vec::new() }
    }

    fn err(&self, msg: impl std::fmt::Display) -> CliError {
        CliError::config(&self.origin, msg)
    }

    fn get(&mut self, key: &str) -> Option<&'a Value> {
        self.used.push(key.to_string());
        self.table.get(key)
    }

    fn opt_str(&mut self, key: &str) -> Result<Option<&'a str>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.err(format!("`{key}` must be a string"))),
        }
    }

    fn str(&mut self, key: &str) -> Result<&'a str, CliError> {
        self.opt_str(key)?.ok_or_else(|| self.err(format!("missing `{key}`")))
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(_) => Err(self.err(format!("`{key}` must be a number"))),
        }
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(v)) if *v >= 0 => Ok(Some(*v as usize)),
            Some(_) => Err(self.err(format!("`{key}` must be a non-negative integer"))),
        }
    }

    fn usize(&mut self, key: &str) -> Result<usize, CliError> {
        self.opt_usize(key)?.ok_or_else(|| self.err(format!("missing `{key}`")))
    }

    fn finish(self) -> Result<(), CliError> {
        let mut unknown: Vec<&String> = self.table.keys().filter(|k| !self.used.contains(k)).collect();
        unknown.sort();
        match unknown.first() {
            Some(k) => Err(self.err(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

fn components(fields: &mut Fields, prefix: &str, dim: usize, required: bool) -> Result<Option<Vec<String>>, CliError> {
    let mut out = Vec::with_capacity(dim);
    for i in 1..=dim {
        match fields.opt_str(&format!("{prefix}{i}"))? {
            Some(s) => out.push(s.to_string()),
            None if !required && out.is_empty() => {}
            None => return Err(fields.err(format!("missing `{prefix}{i}`"))),
        }
    }
    Ok(if out.is_empty() { None } else { Some(out) })
}

fn metric_from(table: &Table, origin: String) -> Result<FinslerStructure, CliError> {
    let mut f = Fields::new(origin, table);
    let dim = f.usize("dim")?;
    let f2 = f.str("F2")?;
    let name = f.opt_str("name")?;
    let origin = f.origin.clone();
    f.finish()?;
    let structure = FinslerStructure::parse(dim, f2).map_err(|e| CliError::config(&origin, e))?;
    Ok(match name {
        Some(n) => structure.named(n),
        None => structure,
    })
}

fn field_from(table: &Table, origin: String) -> Result<VectorField, CliError> {
    let mut f = Fields::new(origin, table);
    let dim = f.usize("dim")?;
    let comps = components(&mut f, "v", dim, true)?.expect("required");
    let origin = f.origin.clone();
    f.finish()?;
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    VectorField::parse(&refs).map_err(|e| CliError::config(&origin, e))
}

pub fn load_metric(path: &Path) -> Result<FinslerStructure, CliError> {
    metric_from(&read_table(path)?, path.display().to_string())
}

pub fn load_field(path: &Path) -> Result<VectorField, CliError> {
    field_from(&read_table(path)?, path.display().to_string())
}

pub fn load_diffeo(path: &Path) -> Result<SymbolicDiffeo, CliError> {
    let table = read_table(path)?;
    let mut f = Fields::new(path.display().to_string(), &table);
    let dim = f.usize("dim")?;
    let name = f.opt_str("name")?;
    let phi = components(&mut f, "phi", dim, true)?.expect("required");
    let psi = components(&mut f, "psi", dim, false)?;
    let origin = f.origin.clone();
    f.finish()?;
    let phi: Vec<&str> = phi.iter().map(String::as_str).collect();
    let psi: Option<Vec<&str>> = psi.as_ref().map(|v| v.iter().map(String::as_str).collect());
    let d = SymbolicDiffeo::parse(&phi, psi.as_deref()).map_err(|e| CliError::config(&origin, e))?;
    Ok(match name {
        Some(n) => d.named(n),
        None => d,
    })
}

/// `default` or `lo,hi,resolution,directions`.
pub fn parse_grid(spec: &str) -> Result<SampleGrid, CliError> {
    let grid = if spec == "default" {
        SampleGrid::default()
    } else {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let bad = || CliError::Usage(format!("--grid `{spec}`: expected `default` or `lo,hi,resolution,directions`"));
        if parts.len() != 4 {
            return Err(bad());
        }
        SampleGrid {
            lo: parts[0].parse().map_err(|_| bad())?,
            hi: parts[1].parse().map_err(|_| bad())?,
            resolution: parts[2].parse().map_err(|_| bad())?,
            directions: parts[3].parse().map_err(|_| bad())?,
        }
    };
    grid.validate().map_err(|e| CliError::Usage(format!("--grid `{spec}`: {e}")))?;
    Ok(grid)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowSettings {
    pub tmax: Option<f64>,
    pub times: Option<usize>,
    pub dt: Option<f64>,
    pub steps_per_unit: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Case {
    pub metric: FinslerStructure,
    pub field: VectorField,
    pub lambda: f64,
    pub grid: Option<SampleGrid>,
    pub flow: FlowSettings,
}

fn sub_table<'a>(f: &mut Fields<'a>, key: &str) -> Result<Option<&'a Table>, CliError> {
    match f.get(key) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(f.err(format!("`{key}` must be a table"))),
    }
}

pub fn load_case(path: &Path) -> Result<Case, CliError> {
    let table = read_table(path)?;
    let origin = path.display().to_string();
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut f = Fields::new(origin.clone(), &table);
    let metric = match f.get("metric") {
        Some(Value::String(p)) => load_metric(&base.join(p))?,
        Some(Value::Table(t)) => metric_from(t, format!("{origin} [metric]"))?,
        _ => return Err(f.err("`metric` must be a file path or an inline table")),
    };
    let field = match f.get("field") {
        Some(Value::String(p)) => load_field(&base.join(p))?,
        Some(Value::Table(t)) => field_from(t, format!("{origin} [field]"))?,
        None => VectorField::zero(metric.dim()),
        _ => return Err(f.err("`field` must be a file path or an inline table")),
    };
    let lambda = f.opt_f64("lambda")?.ok_or_else(|| f.err("missing `lambda`"))?;
    let grid = match sub_table(&mut f, "grid")? {
        None => None,
        Some(t) => {
            let mut g = Fields::new(format!("{origin} [grid]"), t);
            let d = SampleGrid::default();
            let grid = SampleGrid {
                lo: g.opt_f64("lo")?.unwrap_or(d.lo),
                hi: g.opt_f64("hi")?.unwrap_or(d.hi),
                resolution: g.opt_usize("resolution")?.unwrap_or(d.resolution),
                directions: g.opt_usize("directions")?.unwrap_or(d.directions),
            };
            let origin = g.origin.clone();
            g.finish()?;
            grid.validate().map_err(|e| CliError::config(&origin, e))?;
            Some(grid)
        }
    };
    let flow = match sub_table(&mut f, "flow")? {
        None => FlowSettings::default(),
        Some(t) => {
            let mut g = Fields::new(format!("{origin} [flow]"), t);
            let s = FlowSettings {
                tmax: g.opt_f64("tmax")?,
                times: g.opt_usize("times")?,
                dt: g.opt_f64("dt")?,
                steps_per_unit: g.opt_usize("steps_per_unit")?,
            };
            g.finish()?;
            s
        }
    };
    f.finish()?;
    if metric.dim() != field.dim() {
        return Err(CliError::config(&origin, format!("metric has dim {}, field has dim {}", metric.dim(), field.dim())));
    }
    Ok(Case { metric, field, lambda, grid, flow })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid("default").unwrap(), SampleGrid::default());
        let g = parse_grid("-2, 2, 4, 6").unwrap();
        assert_eq!((g.lo, g.hi, g.resolution, g.directions), (-2.0, 2.0, 4, 6));
        assert!(matches!(parse_grid("1,2,3"), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid("0,1,0,8"), Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t: Table = "dim = 2\nF2 = \"y1^2+y2^2\"\ncolour = 1".parse().unwrap();
        let err = metric_from(&t, "m.toml".into()).unwrap_err();
        assert!(err.to_string().contains("unknown key `colour`"));
    }

    #[test]
    fn bad_expressions_are_config_errors() {
        let t: Table = "dim = 2\nv1 = \"y1\"\nv2 = \"0\"".parse().unwrap();
        assert_eq!(field_from(&t, "v.toml".into()).unwrap_err().exit_code(), 2);
        let t: Table = "dim = 2\nF2 = \"y1^\"".parse().unwrap();
        assert_eq!(metric_from(&t, "m.toml".into()).unwrap_err().exit_code(), 2);
    }
}
