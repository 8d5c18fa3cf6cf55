//! On-disk formats: JSON headers and reports, CSV tables, and a raw binary
//! container for eigenvector coefficients.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tbri_core::basis::FockBasis;
use tbri_core::hamiltonian::{OffDiagonal, SparseHamiltonian};
use tbri_core::model::{self, SpMode, TbriModel};
use tbri_core::spectral::{DosHistogram, SpectralDecomposition};
use tbri_core::strength::{EffectiveSpacing, LineShape, ProfileHistogram, ShapeAnalysis};

use crate::error::{AppError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| AppError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| AppError::json(path, e))
}

/// Write serializable rows as CSV with a header line.
pub fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| AppError::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| AppError::csv(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

pub fn read_csv<D: DeserializeOwned>(path: &Path) -> Result<Vec<D>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| AppError::csv(path, e))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| AppError::csv(path, e))
}

/// Header shared by matrix and coefficient exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub format_version: u32,
    pub n_particles: usize,
    pub n_levels: usize,
    pub interaction_strength: f64,
    pub sp_mode: SpMode,
    pub sp_seed: u64,
    pub seed: u64,
    pub sp_energies: Vec<f64>,
    pub dimension: usize,
    /// Stored entries: the diagonal plus the upper triangle.
    pub entries: usize,
}

impl MatrixHeader {
    pub fn new(model: &TbriModel, h: &SparseHamiltonian) -> Self {
        MatrixHeader {
            format_version: FORMAT_VERSION,
            n_particles: model.n_particles(),
            n_levels: model.n_levels(),
            interaction_strength: model.interaction_strength(),
            sp_mode: model.params.sp_mode,
            sp_seed: model.sp_seed,
            seed: model.rng_seed,
            sp_energies: model.sp_energies.clone(),
            dimension: h.dimension(),
            entries: h.dimension() + h.off_diagonal().len(),
        }
    }
}

/// `matrix.json` plus `matrix.csv` with `row,col,value` triplets: every
/// diagonal element and the upper triangle, sorted by `(row, col)`.
pub fn write_matrix(dir: &Path, model: &TbriModel, h: &SparseHamiltonian) -> Result<()> {
    write_json(&dir.join("matrix.json"), &MatrixHeader::new(model, h))?;
    let path = dir.join("matrix.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| AppError::csv(&path, e))?;
    w.write_record(["row", "col", "value"]).map_err(|e| AppError::csv(&path, e))?;
    let off = h.off_diagonal();
    let mut next = 0;
    for (k, &d) in h.diagonal().iter().enumerate() {
        w.write_record([k.to_string(), k.to_string(), fmt_f64(d)])
            .map_err(|e| AppError::csv(&path, e))?;
        while next < off.len() && off[next].row as usize == k {
            let e = off[next];
            w.write_record([e.row.to_string(), e.col.to_string(), fmt_f64(e.value)])
                .map_err(|e| AppError::csv(&path, e))?;
            next += 1;
        }
    }
    w.flush().map_err(|e| AppError::io(&path, e))
}

/// Read a matrix export back. Unperturbed energies are recomputed from the
/// header's single-particle energies.
pub fn read_matrix(dir: &Path) -> Result<(MatrixHeader, SparseHamiltonian)> {
    let header: MatrixHeader = read_json(&dir.join("matrix.json"))?;
    let path = dir.join("matrix.csv");
    let bad = |message: String| AppError::Format {
        path: path.clone(),
        message,
    };
    let basis = FockBasis::enumerate(header.n_particles, header.n_levels)?;
    if basis.len() != header.dimension {
        return Err(bad(format!("header dimension {} does not match the basis", header.dimension)));
    }
    let mut diagonal = vec![f64::NAN; header.dimension];
    let mut off_diagonal = Vec::new();
    let mut r = csv::Reader::from_path(&path).map_err(|e| AppError::csv(&path, e))?;
    for record in r.records() {
        let record = record.map_err(|e| AppError::csv(&path, e))?;
        let field = |i: usize| record.get(i).ok_or_else(|| bad(format!("short record {record:?}")));
        let row: usize = field(0)?.parse().map_err(|e| bad(format!("row: {e}")))?;
        let col: usize = field(1)?.parse().map_err(|e| bad(format!("col: {e}")))?;
        let value: f64 = field(2)?.parse().map_err(|e| bad(format!("value: {e}")))?;
        if row >= header.dimension || col >= header.dimension || col < row {
            return Err(bad(format!("entry ({row}, {col}) outside the upper triangle")));
        }
        if row == col {
            diagonal[row] = value;
        } else {
            off_diagonal.push(OffDiagonal {
                row: row as u32,
                col: col as u32,
                value,
            });
        }
    }
    if diagonal.iter().any(|d| d.is_nan()) {
        return Err(bad("missing diagonal entries".into()));
    }
    let h0: Vec<f64> = basis.iter().map(|s| model::unperturbed_energy(&header.sp_energies, s)).collect();
    Ok((header, SparseHamiltonian::from_parts(diagonal, h0, off_diagonal)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRow {
    pub index: usize,
    pub eigenvalue: f64,
}

pub fn write_eigenvalues(path: &Path, eigenvalues: &[f64]) -> Result<()> {
    write_csv(
        path,
        eigenvalues.iter().enumerate().map(|(index, &eigenvalue)| EigenvalueRow { index, eigenvalue }),
    )
}

pub fn read_eigenvalues(path: &Path) -> Result<Vec<f64>> {
    Ok(read_csv::<EigenvalueRow>(path)?.into_iter().map(|r| r.eigenvalue).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientHeader {
    pub matrix: MatrixHeader,
    pub rows: usize,
    pub cols: usize,
    /// Always `column-major-f64-le`: eigenvector `α` occupies values
    /// `α·rows .. (α+1)·rows`.
    pub layout: String,
}

/// `coefficients.json` plus `coefficients.bin`.
pub fn write_coefficients(dir: &Path, header: &MatrixHeader, spec: &SpectralDecomposition) -> Result<()> {
    let n = spec.dimension();
    write_json(
        &dir.join("coefficients.json"),
        &CoefficientHeader {
            matrix: header.clone(),
            rows: n,
            cols: n,
            layout: "column-major-f64-le".into(),
        },
    )?;
    write_f64_bin(&dir.join("coefficients.bin"), spec.coefficients())
}

/// Raw little-endian `f64` values.
pub fn write_f64_bin(path: &Path, values: &[f64]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for x in values {
        w.write_all(&x.to_le_bytes()).map_err(|e| AppError::io(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Read a file written by [`write_f64_bin`], checking the value count.
pub fn read_f64_bin(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| AppError::io(path, e))?;
    if bytes.len() != expected * 8 {
        return Err(AppError::Format {
            path: path.into(),
            message: format!("expected {expected} values, found {} bytes", bytes.len()),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Read the raw coefficient matrix written by [`write_coefficients`].
pub fn read_coefficients(dir: &Path) -> Result<(CoefficientHeader, Vec<f64>)> {
    let header: CoefficientHeader = read_json(&dir.join("coefficients.json"))?;
    let values = read_f64_bin(&dir.join("coefficients.bin"), header.rows * header.cols)?;
    Ok((header, values))
}

/// One occupation vector per line, space separated.
pub fn write_basis(path: &Path, basis: &FockBasis) -> Result<()> {
    fs::write(path, basis.listing()).map_err(|e| AppError::io(path, e))
}

#[derive(Serialize)]
struct DosRow {
    bin_lo: f64,
    bin_hi: f64,
    count: usize,
    density: f64,
}

pub fn write_dos(path: &Path, dos: &DosHistogram) -> Result<()> {
    write_csv(
        path,
        dos.bin_edges.windows(2).zip(dos.counts.iter().zip(&dos.density)).map(|(w, (&count, &density))| DosRow {
            bin_lo: w[0],
            bin_hi: w[1],
            count,
            density,
        }),
    )
}

#[derive(Serialize)]
struct ProfileRow {
    bin_center: f64,
    weight: f64,
    bw_fit: f64,
    gauss_fit: f64,
}

/// Binned profile next to the bin weights predicted by both fits.
pub fn write_profile(path: &Path, hist: &ProfileHistogram, analysis: &ShapeAnalysis) -> Result<()> {
    let bw = LineShape::BreitWigner.bin_weights(&hist.edges, analysis.breit_wigner.center, analysis.breit_wigner.width);
    let ga = LineShape::Gaussian.bin_weights(&hist.edges, analysis.gaussian.center, analysis.gaussian.width);
    write_csv(
        path,
        hist.centers().into_iter().enumerate().map(|(i, c)| ProfileRow {
            bin_center: c,
            weight: hist.weights[i],
            bw_fit: bw[i],
            gauss_fit: ga[i],
        }),
    )
}

#[derive(Serialize)]
struct SpacingRow {
    e0: f64,
    m_eff: usize,
    d_f: Option<f64>,
}

pub fn write_spacing(path: &Path, spacing: &EffectiveSpacing) -> Result<()> {
    write_csv(
        path,
        spacing.per_state.iter().map(|e| SpacingRow {
            e0: e.energy,
            m_eff: e.m_eff,
            d_f: e.d_f,
        }),
    )
}
