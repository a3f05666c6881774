//! Binary snapshots of grid data. Format HBL1: the ASCII magic "HBL1"
//! followed by seven little-endian u32 header words (version, n, grid, rank,
//! p, q, component count), then the payload as interleaved f64 re/im pairs,
//! components in lexicographic multi-index order, each component row-major
//! over grid points and matrix entries. Metrics carry a JSON sidecar with
//! the bundle data the payload alone cannot express.

use crate::bundle::Metric;
use crate::error::{HblError, Result};
use crate::geometry::background::Background;
use crate::geometry::form::EndForm;
use crate::linalg::C64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub const MAGIC: [u8; 4] = *b"HBL1";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub version: u32,
    pub n: u32,
    pub grid: u32,
    pub rank: u32,
    pub p: u32,
    pub q: u32,
    pub components: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricSidecar {
    pub schema: String,
    pub level: i64,
    /// background curvature convention recorded for auditability: the fixed
    /// part of the curvature is pi * level * omega / i times the identity
    pub background: String,
}

fn snapshot_err(path: &Path, what: &str) -> HblError {
    HblError::Snapshot(format!("{}: {what}", path.display()))
}

pub fn write_form(path: &Path, bg: &Background, f: &EndForm) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + f.comps.len() * f.comps[0].data.len() * 16);
    buf.extend_from_slice(&MAGIC);
    for v in [
        VERSION,
        bg.n as u32,
        bg.grid as u32,
        f.rank as u32,
        f.p as u32,
        f.q as u32,
        f.comps.len() as u32,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for c in &f.comps {
        for z in &c.data {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_form(path: &Path, bg: &Background) -> Result<EndForm> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 32 || bytes[..4] != MAGIC {
        return Err(snapshot_err(path, "bad magic"));
    }
    let word = |i: usize| -> u32 {
        u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap())
    };
    let h = Header {
        version: word(0),
        n: word(1),
        grid: word(2),
        rank: word(3),
        p: word(4),
        q: word(5),
        components: word(6),
    };
    if h.version != VERSION {
        return Err(snapshot_err(path, &format!("unsupported version {}", h.version)));
    }
    if h.n as usize != bg.n || h.grid as usize != bg.grid {
        return Err(snapshot_err(
            path,
            &format!("geometry mismatch: file has n={} grid={}", h.n, h.grid),
        ));
    }
    let mut f = EndForm::zero(
        h.n as usize,
        h.p as usize,
        h.q as usize,
        h.rank as usize,
        bg.points(),
    );
    if f.comps.len() != h.components as usize {
        return Err(snapshot_err(path, "component count does not match degree"));
    }
    let per = bg.points() * (h.rank as usize) * (h.rank as usize);
    let need = 32 + h.components as usize * per * 16;
    if bytes.len() != need {
        return Err(snapshot_err(
            path,
            &format!("payload length {} != expected {need}", bytes.len()),
        ));
    }
    let mut off = 32;
    for c in f.comps.iter_mut() {
        for z in c.data.iter_mut() {
            let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
            if !re.is_finite() || !im.is_finite() {
                return Err(snapshot_err(path, "non-finite payload"));
            }
            *z = C64::new(re, im);
            off += 16;
        }
    }
    Ok(f)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_metric(path: &Path, bg: &Background, m: &Metric) -> Result<()> {
    write_form(path, bg, &EndForm::from_field(bg.n, m.w.clone()))?;
    let sidecar = MetricSidecar {
        schema: "hbl-metric/1".to_string(),
        level: bg.level,
        background: "F0 = pi * level * sum_a dz^a wedge dzbar^a * Id".to_string(),
    };
    let text = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| HblError::Snapshot(e.to_string()))?;
    std::fs::write(sidecar_path(path), text)?;
    Ok(())
}

pub fn read_metric(path: &Path, bg: &Background) -> Result<Metric> {
    let text = std::fs::read_to_string(sidecar_path(path))?;
    let sc: MetricSidecar = serde_json::from_str(&text)
        .map_err(|e| snapshot_err(&sidecar_path(path), &e.to_string()))?;
    if sc.schema != "hbl-metric/1" {
        return Err(snapshot_err(path, &format!("unsupported sidecar schema {:?}", sc.schema)));
    }
    if sc.level != bg.level {
        return Err(snapshot_err(
            path,
            &format!("level mismatch: file has {}, run has {}", sc.level, bg.level),
        ));
    }
    let f = read_form(path, bg)?;
    if f.p != 0 || f.q != 0 || f.rank != bg.rank {
        return Err(snapshot_err(path, "not a metric snapshot"));
    }
    Metric::new(f.as_field().clone())
}
