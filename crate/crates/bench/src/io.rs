//! `TNSR` tensor files and model directories.
//!
//! A `TNSR` file is, all integers little-endian:
//!
//! ```text
//! b"TNSR" | version: u32 = 1 | ndims: u32 | extents: ndims × u64 | payload
//! ```
//!
//! where the payload is `∏ extents` IEEE-754 doubles (little-endian) in
//! column-major order. Nothing may follow the payload.
//!
//! A model directory holds `manifest.txt` (one `key = value` per line),
//! `core.tnsr`, and `factor<k>.tnsr` for each mode `k` (1-based), factors
//! stored as 2-way tensors.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hytucker::{DenseTensor, Factor, FactorKind, Matrix, SketchConfig, TuckerModel};

use crate::{BenchError, Result};

pub const MAGIC: &[u8; 4] = b"TNSR";
pub const VERSION: u32 = 1;
const MANIFEST: &str = "manifest.txt";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> BenchError {
    BenchError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn write_tensor(path: &Path, t: &DenseTensor) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut header = Vec::with_capacity(12 + 8 * t.order());
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&(t.order() as u32).to_le_bytes());
    for &n in t.shape() {
        header.extend_from_slice(&(n as u64).to_le_bytes());
    }
    w.write_all(&header).map_err(io_err(path))?;
    for x in t.as_slice() {
        w.write_all(&x.to_le_bytes()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    parse_tensor(&bytes, path)
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, path: &Path, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(format_err(path, format!("truncated {what}")));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

fn parse_tensor(mut bytes: &[u8], path: &Path) -> Result<DenseTensor> {
    let magic = take(&mut bytes, 4, path, "header")?;
    if magic != MAGIC {
        return Err(format_err(path, "bad magic, not a TNSR file"));
    }
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
    let version = u32_at(take(&mut bytes, 4, path, "header")?);
    if version != VERSION {
        return Err(format_err(
            path,
            format!("unsupported TNSR version {version} (expected {VERSION})"),
        ));
    }
    let ndims = u32_at(take(&mut bytes, 4, path, "header")?) as usize;
    if ndims == 0 {
        return Err(format_err(path, "tensor has zero modes"));
    }
    let mut shape = Vec::with_capacity(ndims.min(64));
    for _ in 0..ndims {
        let raw = u64::from_le_bytes(
            take(&mut bytes, 8, path, "extents")?
                .try_into()
                .expect("8 bytes"),
        );
        let n = usize::try_from(raw).map_err(|_| format_err(path, "extent overflows usize"))?;
        shape.push(n);
    }
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .and_then(|n| n.checked_mul(8).map(|_| n))
        .ok_or_else(|| format_err(path, format!("extents {shape:?} overflow")))?;
    if bytes.len() < 8 * len {
        return Err(format_err(
            path,
            format!("truncated payload: {} of {} bytes", bytes.len(), 8 * len),
        ));
    }
    if bytes.len() > 8 * len {
        return Err(format_err(
            path,
            format!(
                "{} unexpected bytes after the payload",
                bytes.len() - 8 * len
            ),
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DenseTensor::new(shape, data).map_err(|e| format_err(path, e.to_string()))
}

fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let t = DenseTensor::new(vec![m.rows(), m.cols()], m.as_slice().to_vec())?;
    write_tensor(path, &t)
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    let t = read_tensor(path)?;
    if t.order() != 2 {
        return Err(format_err(
            path,
            format!("expected a matrix, found order {}", t.order()),
        ));
    }
    let (rows, cols) = (t.shape()[0], t.shape()[1]);
    Ok(Matrix::from_col_major(rows, cols, t.into_vec())?)
}

pub fn join_dims(dims: &[usize]) -> String {
    dims.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

pub fn parse_dims(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split('x')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad extent {p:?} in {s:?}: {e}"))
        })
        .collect()
}

pub fn write_model(dir: &Path, model: &TuckerModel) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let cfg = model.config();
    let mut manifest = String::from("# hytucker model\n");
    manifest += &format!("version = {VERSION}\n");
    manifest += &format!("shape = {}\n", join_dims(&model.shape()));
    manifest += &format!("ranks = {}\n", join_dims(model.ranks()));
    manifest += &format!("t = {}\n", cfg.fiber_modes);
    manifest += &format!("p = {}\n", cfg.oversampling);
    manifest += &format!("seed = {}\n", cfg.seed);
    let kinds: Vec<&str> = model
        .factors()
        .iter()
        .map(|f| {
            if f.is_fiber_sampled() {
                "fiber"
            } else {
                "orthonormal"
            }
        })
        .collect();
    manifest += &format!("kinds = {}\n", kinds.join(","));
    for (k, f) in model.factors().iter().enumerate() {
        if let FactorKind::FiberSampled { columns } = &f.kind {
            let cols: Vec<String> = columns.iter().map(ToString::to_string).collect();
            manifest += &format!("fibers.{} = {}\n", k + 1, cols.join(","));
        }
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest).map_err(io_err(&path))?;
    write_tensor(&dir.join("core.tnsr"), model.core())?;
    for (k, f) in model.factors().iter().enumerate() {
        write_matrix(&dir.join(format!("factor{}.tnsr", k + 1)), &f.matrix)?;
    }
    Ok(())
}

pub fn read_model(dir: &Path) -> Result<TuckerModel> {
    let path: PathBuf = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut entries = BTreeMap::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format_err(&path, format!("malformed line {line:?}")))?;
        entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |key: &str| {
        entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| format_err(&path, format!("missing key {key:?}")))
    };
    let number = |key: &str| -> Result<u64> {
        get(key)?
            .parse::<u64>()
            .map_err(|e| format_err(&path, format!("{key}: {e}")))
    };
    if number("version")? != u64::from(VERSION) {
        return Err(format_err(&path, "unsupported model version"));
    }
    let ranks = parse_dims(get("ranks")?).map_err(|e| format_err(&path, e))?;
    let config = SketchConfig::new(
        ranks.clone(),
        number("t")? as usize,
        number("p")? as usize,
        number("seed")?,
    );
    let kinds: Vec<&str> = get("kinds")?.split(',').map(str::trim).collect();
    if kinds.len() != ranks.len() {
        return Err(format_err(&path, "kinds and ranks disagree in length"));
    }
    let core = read_tensor(&dir.join("core.tnsr"))?;
    let mut factors = Vec::with_capacity(kinds.len());
    for (k, kind) in kinds.iter().enumerate() {
        let matrix = read_matrix(&dir.join(format!("factor{}.tnsr", k + 1)))?;
        let kind = match *kind {
            "orthonormal" => FactorKind::Orthonormal,
            "fiber" => {
                let key = format!("fibers.{}", k + 1);
                let columns = get(&key)?
                    .split(',')
                    .map(|c| c.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| format_err(&path, format!("{key}: {e}")))?;
                FactorKind::FiberSampled { columns }
            }
            other => return Err(format_err(&path, format!("unknown factor kind {other:?}"))),
        };
        factors.push(Factor { matrix, kind });
    }
    Ok(TuckerModel::new(core, factors, config)?)
}
