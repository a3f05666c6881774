//! CSV and manifest emission. All floats go through one formatter so that a
//! given (configuration, seed) pair reproduces its output files byte for
//! byte.

use crate::config::RunConfig;
use crate::error::{HblError, Result};
use crate::functional::FunctionalReport;
use crate::hessian::PositivityReport;
use crate::solver::TraceRow;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Round-trip exact, locale independent.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 && x.is_sign_negative() {
        return "0e0".to_string();
    }
    format!("{x:e}")
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()?;
    Ok(())
}

pub fn write_functional_csv(path: &Path, rows: &[FunctionalReport]) -> Result<()> {
    let mut out = String::from("k,path_kind,quad_order,m0,logdet_term,m,lambda\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k,
            r.path_kind,
            r.quad_order,
            fmt_f64(r.m0),
            fmt_f64(r.logdet_term),
            fmt_f64(r.m),
            fmt_f64(r.lambda),
        ));
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut out = String::from("iter,dt,m,residual_sup,residual_l2,cone_margin\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.iter,
            fmt_f64(r.dt),
            fmt_f64(r.m_value),
            fmt_f64(r.residual_sup),
            fmt_f64(r.residual_l2),
            fmt_f64(r.cone_margin),
        ));
    }
    write_atomic(path, out.as_bytes())
}

pub fn write_positivity_csv(path: &Path, reports: &[PositivityReport]) -> Result<()> {
    let mut out = String::from("cone,point_index,min_eig\n");
    for rep in reports {
        for (i, &v) in rep.per_point_min.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", rep.cone, i, fmt_f64(v)));
        }
    }
    write_atomic(path, out.as_bytes())
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    config_digest: String,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

pub fn write_manifest(path: &Path, cfg: &RunConfig, outputs: &[&Path]) -> Result<()> {
    let m = Manifest {
        schema: "hbl-manifest/1",
        config_digest: cfg.digest(),
        config: cfg,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let text =
        serde_json::to_string_pretty(&m).map_err(|e| HblError::Consistency(e.to_string()))?;
    write_atomic(path, text.as_bytes())
}
