//! Grid dumps: a JSON header next to a flat little-endian `f64` array file.
//!
//! Arrays are stored in the order `rho, theta, ux, uy, uz, bx, by, bz`, each
//! x-fastest, so a dump can be reloaded bit-exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Array3, CellField, FaceField, FluidState, Grid, Stagger};

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed dump header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("dump inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArrayEntry {
    pub name: String,
    pub stagger: Stagger,
    pub dims: [usize; 3],
    /// Offset in values (not bytes) into the binary file.
    pub offset: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DumpHeader {
    pub format: String,
    pub version: u32,
    pub grid: Grid,
    pub t: f64,
    pub arrays: Vec<ArrayEntry>,
    pub data_file: String,
    #[serde(default)]
    pub note: Option<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DumpError + '_ {
    move |source| DumpError::Io { path: path.to_path_buf(), source }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

/// Write `<stem>.json` and `<stem>.bin`.
pub fn write_dump(stem: &Path, grid: &Grid, state: &FluidState, note: Option<String>) -> Result<(), DumpError> {
    let (hp, bp) = paths(stem);
    let named: Vec<(&str, Stagger, &Array3)> = vec![
        ("rho", Stagger::Cell, &state.rho.0),
        ("theta", Stagger::Cell, &state.theta.0),
        ("ux", Stagger::Face(0), &state.u.c[0]),
        ("uy", Stagger::Face(1), &state.u.c[1]),
        ("uz", Stagger::Face(2), &state.u.c[2]),
        ("bx", Stagger::Face(0), &state.b.c[0]),
        ("by", Stagger::Face(1), &state.b.c[1]),
        ("bz", Stagger::Face(2), &state.b.c[2]),
    ];
    let mut bytes = Vec::new();
    let mut arrays = Vec::new();
    let mut offset = 0;
    for (name, stagger, a) in named {
        arrays.push(ArrayEntry { name: name.into(), stagger, dims: a.dims(), offset });
        offset += a.data().len();
        for v in a.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let header = DumpHeader {
        format: "mhd-dump".into(),
        version: 1,
        grid: grid.clone(),
        t: state.t,
        arrays,
        data_file: bp.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        note,
    };
    if let Some(dir) = hp.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
    }
    fs::write(&bp, bytes).map_err(io_err(&bp))?;
    fs::write(&hp, serde_json::to_string_pretty(&header)?).map_err(io_err(&hp))?;
    Ok(())
}

/// Load a dump written by [`write_dump`]; `stem` may carry either extension.
pub fn read_dump(stem: &Path) -> Result<(Grid, FluidState), DumpError> {
    let (hp, _) = paths(stem);
    let header: DumpHeader = serde_json::from_str(&fs::read_to_string(&hp).map_err(io_err(&hp))?)?;
    if header.format != "mhd-dump" || header.version != 1 {
        return Err(DumpError::Inconsistent(format!("unsupported format {} v{}", header.format, header.version)));
    }
    let bp = hp.with_file_name(&header.data_file);
    let raw = fs::read(&bp).map_err(io_err(&bp))?;
    if raw.len() % 8 != 0 {
        return Err(DumpError::Inconsistent("binary length not a multiple of 8".into()));
    }
    let values: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let grid = header.grid.clone();
    let take = |name: &str| -> Result<Array3, DumpError> {
        let e = header
            .arrays
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| DumpError::Inconsistent(format!("missing array {name}")))?;
        if grid.dims(e.stagger) != e.dims {
            return Err(DumpError::Inconsistent(format!("array {name} has dims {:?}", e.dims)));
        }
        let len = e.dims.iter().product::<usize>();
        let slice = values
            .get(e.offset..e.offset + len)
            .ok_or_else(|| DumpError::Inconsistent(format!("array {name} out of range")))?;
        Ok(Array3::from_vec(e.dims, slice.to_vec()).expect("length checked"))
    };
    let state = FluidState {
        t: header.t,
        rho: CellField(take("rho")?),
        theta: CellField(take("theta")?),
        u: FaceField { c: [take("ux")?, take("uy")?, take("uz")?] },
        b: FaceField { c: [take("bx")?, take("by")?, take("bz")?] },
    };
    Ok((grid, state))
}
