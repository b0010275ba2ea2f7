//! Data files: Weyl samples and reconstructed potentials as CSV, plus checksums.

use std::fs;
use std::path::{Path, PathBuf};

use mweyl::contour::{Contour, Segment};
use mweyl::inverse::WeylData;
use mweyl::linalg::{c, CMat};
use mweyl::{PotentialGrid, SpectralPoint};
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Segment label of the large-`|rho|` rows used to recover `A`.
pub const TAIL_SEGMENT: &str = "tail";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `data` to `path` and returns its manifest entry.
pub fn write_file(path: &Path, data: &[u8]) -> Result<FileEntry, CliError> {
    fs::write(path, data).map_err(|e| CliError::io(path, e))?;
    Ok(FileEntry { path: path.to_path_buf(), bytes: data.len() as u64, sha256: sha256_hex(data) })
}

fn matrix_header(prefix: &str, n: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            cols.push(format!("{prefix}_{i}_{j}_re"));
            cols.push(format!("{prefix}_{i}_{j}_im"));
        }
    }
    cols
}

fn push_matrix(row: &mut Vec<String>, m: &CMat) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            row.push(m[(i, j)].re.to_string());
            row.push(m[(i, j)].im.to_string());
        }
    }
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Vec<u8> {
    writer.into_inner().expect("in-memory writer")
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Data(format!("csv: {e}"))
}

/// `segment, re_rho, im_rho, weight_re, weight_im` and `M` row-major; contour
/// nodes first, then tail rows with zero weight.
pub fn weyl_csv(weyl: &WeylData) -> Result<Vec<u8>, CliError> {
    let n = weyl.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["segment", "re_rho", "im_rho", "weight_re", "weight_im"].map(String::from).to_vec();
    header.extend(matrix_header("m", n));
    w.write_record(&header).map_err(csv_error)?;
    let rows = weyl
        .contour()
        .nodes()
        .iter()
        .zip(weyl.m_samples())
        .map(|(nd, m)| (nd.segment.name(), nd.point.rho(), nd.weight, m))
        .chain(weyl.tail().iter().map(|(p, m)| (TAIL_SEGMENT, p.rho(), c(0.0, 0.0), m)));
    for (segment, rho, weight, m) in rows {
        let mut row = vec![segment.to_string(), rho.re.to_string(), rho.im.to_string()];
        row.push(weight.re.to_string());
        row.push(weight.im.to_string());
        push_matrix(&mut row, m);
        w.write_record(&row).map_err(csv_error)?;
    }
    Ok(finish(w))
}

struct WeylRow {
    segment: String,
    rho: Complex64,
    weight: Complex64,
    m: CMat,
}

fn parse_f64(s: &str, line: usize) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Data(format!("line {line}: cannot parse {s:?} as a number")))
}

/// Reads a Weyl sample file and attaches it to `contour`, which must carry the
/// same nodes and weights as the file.
pub fn read_weyl_csv(path: &Path, contour: Contour) -> Result<WeylData, CliError> {
    let text = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_slice());
    let width = reader.headers().map_err(csv_error)?.len();
    let n = ((width.saturating_sub(5)) as f64 / 2.0).sqrt().round() as usize;
    if n == 0 || 5 + 2 * n * n != width {
        return Err(CliError::Data(format!(
            "{}: {width} columns do not describe an n x n Weyl matrix",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = k + 2;
        let num = |i: usize| parse_f64(&rec[i], line);
        let m = CMat::from_fn(n, n, |i, j| {
            let at = 5 + 2 * (i * n + j);
            c(num(at).unwrap_or(f64::NAN), num(at + 1).unwrap_or(f64::NAN))
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::Data(format!("line {line}: non-numeric Weyl sample")));
        }
        rows.push(WeylRow { segment: rec[0].to_string(), rho: c(num(1)?, num(2)?), weight: c(num(3)?, num(4)?), m });
    }

    let (nodes, tail): (Vec<WeylRow>, Vec<WeylRow>) = rows.into_iter().partition(|r| r.segment != TAIL_SEGMENT);
    if nodes.len() != contour.len() {
        return Err(CliError::Config(format!(
            "{} holds {} contour rows but the configured contour has {} nodes",
            path.display(),
            nodes.len(),
            contour.len()
        )));
    }
    for (k, (row, nd)) in nodes.iter().zip(contour.nodes()).enumerate() {
        let same = Segment::parse(&row.segment) == Some(nd.segment)
            && close(row.rho, nd.point.rho())
            && close(row.weight, nd.weight);
        if !same {
            return Err(CliError::Config(format!(
                "contour node {k} in {} does not match the configured contour",
                path.display()
            )));
        }
    }
    let tail = tail
        .into_iter()
        .map(|r| SpectralPoint::new(r.rho).map(|p| (p, r.m)).map_err(|e| CliError::Data(format!("tail point: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let m = nodes.into_iter().map(|r| r.m).collect();
    WeylData::new(contour, m, tail).map_err(|e| CliError::Data(e.to_string()))
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * b.norm().max(1.0)
}

/// `x` followed by `Q` row-major.
pub fn potential_csv(q: &PotentialGrid) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string()];
    header.extend(matrix_header("q", q.dim()));
    w.write_record(&header).map_err(csv_error)?;
    let grid = q.grid();
    for i in 0..grid.len() {
        let mut row = vec![grid.x(i).to_string()];
        push_matrix(&mut row, q.at(i));
        w.write_record(&row).map_err(csv_error)?;
    }
    Ok(finish(w))
}

/// `re_rho, im_rho, re_lambda, im_lambda` per zero.
pub fn zeros_csv(zeros: &[SpectralPoint]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["re_rho", "im_rho", "re_lambda", "im_lambda"]).map_err(csv_error)?;
    for z in zeros {
        let (r, l) = (z.rho(), z.lambda());
        w.write_record([r.re, r.im, l.re, l.im].map(|v| v.to_string())).map_err(csv_error)?;
    }
    Ok(finish(w))
}
