use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::generators::FunctionKind;
use crate::io::{join_dims, parse_dims};
use crate::{BenchError, Result};

pub const CSV_HEADER: [&str; 10] = [
    "kind",
    "shape",
    "method",
    "ranks",
    "t",
    "p",
    "seed",
    "rel_err",
    "wall_seconds",
    "bound",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Hosvd,
    Hoid,
    Hybrid,
    RHybrid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hosvd => "hosvd",
            Method::Hoid => "hoid",
            Method::Hybrid => "hybrid",
            Method::RHybrid => "rhybrid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hosvd" => Ok(Method::Hosvd),
            "hoid" => Ok(Method::Hoid),
            "hybrid" => Ok(Method::Hybrid),
            "rhybrid" => Ok(Method::RHybrid),
            other => Err(format!(
                "unknown method {other:?} (expected hosvd, hoid, hybrid or rhybrid)"
            )),
        }
    }
}

/// Where the benchmarked tensor came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorKind {
    Function(FunctionKind),
    File,
}

impl fmt::Display for TensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorKind::Function(k) => k.fmt(f),
            TensorKind::File => f.write_str("file"),
        }
    }
}

impl FromStr for TensorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "file" {
            Ok(TensorKind::File)
        } else {
            s.parse().map(TensorKind::Function)
        }
    }
}

/// One timed decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub kind: TensorKind,
    pub shape: Vec<usize>,
    pub method: Method,
    pub ranks: Vec<usize>,
    pub t: usize,
    pub p: usize,
    pub seed: u64,
    pub rel_err: f64,
    pub wall_seconds: f64,
    pub bound: Option<f64>,
}

impl BenchRecord {
    fn fields(&self) -> [String; 10] {
        [
            self.kind.to_string(),
            join_dims(&self.shape),
            self.method.to_string(),
            join_dims(&self.ranks),
            self.t.to_string(),
            self.p.to_string(),
            self.seed.to_string(),
            format!("{:e}", self.rel_err),
            format!("{:e}", self.wall_seconds),
            self.bound.map(|b| format!("{b:e}")).unwrap_or_default(),
        ]
    }

    fn from_fields(row: &csv::StringRecord) -> std::result::Result<Self, String> {
        if row.len() != CSV_HEADER.len() {
            return Err(format!(
                "expected {} fields, found {}",
                CSV_HEADER.len(),
                row.len()
            ));
        }
        let float = |i: usize| {
            row[i]
                .parse::<f64>()
                .map_err(|e| format!("{}: {e}", CSV_HEADER[i]))
        };
        let int = |i: usize| {
            row[i]
                .parse::<u64>()
                .map_err(|e| format!("{}: {e}", CSV_HEADER[i]))
        };
        Ok(Self {
            kind: row[0].parse()?,
            shape: parse_dims(&row[1])?,
            method: row[2].parse()?,
            ranks: parse_dims(&row[3])?,
            t: int(4)? as usize,
            p: int(5)? as usize,
            seed: int(6)?,
            rel_err: float(7)?,
            wall_seconds: float(8)?,
            bound: if row[9].is_empty() {
                None
            } else {
                Some(float(9)?)
            },
        })
    }
}

/// Writes records as CSV (header always present) to any sink.
pub fn write_csv<W: Write>(records: &[BenchRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(records: &[BenchRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(records, file)
}

pub fn parse_csv<R: Read>(source: R, path: &Path) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(source);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(BenchError::Format {
            path: path.to_path_buf(),
            message: format!("unexpected header {header:?}"),
        });
    }
    rdr.records()
        .map(|row| {
            let row = row?;
            BenchRecord::from_fields(&row).map_err(|message| BenchError::Format {
                path: path.to_path_buf(),
                message,
            })
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let file = std::fs::File::open(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> BenchRecord {
        BenchRecord {
            kind: TensorKind::Function(FunctionKind::B),
            shape: vec![50, 50, 50],
            method: Method::RHybrid,
            ranks: vec![5, 5, 5],
            t: 1,
            p: 5,
            seed: 42,
            rel_err: 1.0038e-4,
            wall_seconds: 0.023790000000000001,
            bound: Some(3.5e-2),
        }
    }

    #[test]
    fn header_only_for_no_records() {
        let mut out = Vec::new();
        write_csv(&[], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "kind,shape,method,ranks,t,p,seed,rel_err,wall_seconds,bound\n"
        );
    }

    #[test]
    fn record_roundtrips() {
        let mut out = Vec::new();
        let mut no_bound = record();
        no_bound.bound = None;
        no_bound.kind = TensorKind::File;
        write_csv(&[record(), no_bound.clone()], &mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert!(
            text.contains("B,50x50x50,rhybrid,5x5x5,1,5,42,1.0038e-4,"),
            "{text}"
        );
        let back = parse_csv(out.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, vec![record(), no_bound]);
    }

    #[test]
    fn rejects_foreign_header() {
        let err = parse_csv("a,b\n1,2\n".as_bytes(), Path::new("x.csv")).unwrap_err();
        assert!(err.to_string().contains("unexpected header"));
    }
}
