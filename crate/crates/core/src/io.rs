//! File formats used by the command line.
//!
//! Matrices and fitted models are JSON; snapshots and beampatterns are CSV.
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces every value exactly.
//!
//! Matrix file:
//! ```json
//! {"n": 2, "complex": true, "data": [[1.0, 0.0], [0.5, -0.25], [0.5, 0.25], [2.0, 0.0]]}
//! ```
//! `data` is row-major; each cell is `[re, im]`, or `[re]` / a bare number
//! for real matrices.
//!
//! Scene file:
//! ```json
//! {"sensors": 4, "complex": true, "sigma": 1.0, "seed": 7,
//!  "noise": {"n": 4, "complex": false, "data": [...]},
//!  "sources": [{"power": 10.0, "ula": {"spacing": 0.5, "angle_deg": 20.0}},
//!              {"power": 2.0, "direction": [[1, 0], [0, 1], [1, 0], [0, -1]]}]}
//! ```
//! `noise` defaults to the identity and `seed` to 0.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beamform::{BeamPoint, SteeringVector};
use crate::divergence::DivergenceValue;
use crate::error::{Error, Result};
use crate::estimator::{Criterion, FitReport, OrderPoint, StructuredModel};
use crate::linalg::{HermitianMatrix, Matrix, C64};
use crate::simulate::{ula_steering, Scene, SnapshotSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Scalar(f64),
    Parts(Vec<f64>),
}

impl Cell {
    fn from_complex(z: C64, complex: bool) -> Self {
        if complex {
            Cell::Parts(vec![z.re, z.im])
        } else {
            Cell::Parts(vec![z.re])
        }
    }

    fn to_complex(&self) -> Result<C64> {
        match self {
            Cell::Scalar(re) => Ok(C64::new(*re, 0.0)),
            Cell::Parts(p) => match p.as_slice() {
                [re] => Ok(C64::new(*re, 0.0)),
                [re, im] => Ok(C64::new(*re, *im)),
                _ => Err(Error::InvalidInput(format!(
                    "matrix cell must be [re] or [re, im], got {} values",
                    p.len()
                ))),
            },
        }
    }
}

fn cells(values: &[C64], complex: bool) -> Vec<Cell> {
    values
        .iter()
        .map(|&z| Cell::from_complex(z, complex))
        .collect()
}

fn parse_cells(cells: &[Cell]) -> Result<Vec<C64>> {
    cells.iter().map(Cell::to_complex).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    #[serde(default)]
    pub complex: bool,
    pub data: Vec<Cell>,
}

impl MatrixFile {
    pub fn from_hermitian(m: &HermitianMatrix) -> Self {
        let complex = !m.is_real();
        Self {
            n: m.dim(),
            complex,
            data: cells(m.as_matrix().as_slice(), complex),
        }
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        let values = parse_cells(&self.data)?;
        if values.len() != self.n * self.n {
            return Err(Error::InvalidInput(format!(
                "matrix of dimension {} needs {} entries, found {}",
                self.n,
                self.n * self.n,
                values.len()
            )));
        }
        if !self.complex && values.iter().any(|z| z.im != 0.0) {
            return Err(Error::InvalidInput(
                "real matrix file has imaginary parts".into(),
            ));
        }
        let m = Matrix::from_row_major(self.n, self.n, values)?;
        HermitianMatrix::new(m, !self.complex).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Serialized fit: parameters, spectrum, divergence and optional order curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResultFile {
    pub criterion: Criterion,
    pub n: usize,
    pub complex: bool,
    #[serde(rename = "P")]
    pub rank: usize,
    pub sigma2: f64,
    pub lambdas: Vec<f64>,
    pub signal_powers: Vec<f64>,
    /// `N x P`, column-major.
    #[serde(rename = "U")]
    pub u: Vec<Cell>,
    pub divergence_nats: f64,
    pub xi: f64,
    pub unique: bool,
    pub noise: MatrixFile,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub order_curve: Option<Vec<OrderPoint>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selected_rank: Option<usize>,
}

impl FitResultFile {
    pub fn from_report(report: &FitReport) -> Self {
        let model = &report.model;
        let complex = !model.r_theta().is_real();
        let u = model.u();
        let mut col_major = Vec::with_capacity(u.rows() * u.cols());
        for j in 0..u.cols() {
            col_major.extend(u.column(j));
        }
        Self {
            criterion: model.criterion(),
            n: model.dim(),
            complex,
            rank: model.rank(),
            sigma2: model.sigma2(),
            lambdas: report.lambdas.clone(),
            signal_powers: model.signal_powers().to_vec(),
            u: cells(&col_major, complex),
            divergence_nats: report.divergence.value,
            xi: report.divergence.xi,
            unique: model.unique(),
            noise: MatrixFile::from_hermitian(model.noise()),
            order_curve: report.order_curve.as_ref().map(|c| c.points.clone()),
            selected_rank: report.order_curve.as_ref().and_then(|c| c.selected_rank),
        }
    }

    pub fn divergence(&self) -> DivergenceValue {
        DivergenceValue {
            value: self.divergence_nats,
            xi: self.xi,
        }
    }

    /// Rebuilds the structured model (and `R_theta`) from the stored parameters.
    pub fn to_model(&self) -> Result<StructuredModel> {
        let noise = self.noise.to_hermitian()?;
        let values = parse_cells(&self.u)?;
        if values.len() != self.n * self.rank || self.signal_powers.len() != self.rank {
            return Err(Error::InvalidInput(format!(
                "U must hold {}x{} entries with {} powers",
                self.n, self.rank, self.rank
            )));
        }
        let columns: Vec<Vec<C64>> = values.chunks(self.n.max(1)).map(|c| c.to_vec()).collect();
        let u = Matrix::from_columns(self.n, &columns[..self.rank]);
        StructuredModel::from_parts(
            u,
            self.signal_powers.clone(),
            self.sigma2,
            noise,
            self.criterion,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlaSpec {
    pub spacing: f64,
    pub angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub power: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<Vec<Cell>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ula: Option<UlaSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub sensors: usize,
    #[serde(default)]
    pub complex: bool,
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub noise: Option<MatrixFile>,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
}

impl SceneFile {
    pub fn to_scene(&self) -> Result<Scene> {
        let n = self.sensors;
        if n == 0 {
            return Err(Error::InvalidInput(
                "scene needs at least one sensor".into(),
            ));
        }
        let noise = match &self.noise {
            Some(m) => m.to_hermitian()?,
            None => HermitianMatrix::identity(n, true),
        };
        let mut directions = Vec::with_capacity(self.sources.len());
        let mut powers = Vec::with_capacity(self.sources.len());
        for (i, src) in self.sources.iter().enumerate() {
            let d = match (&src.direction, &src.ula) {
                (Some(cells), None) => parse_cells(cells)?,
                (None, Some(ula)) => ula_steering(n, ula.spacing, ula.angle_deg.to_radians())
                    .w0()
                    .to_vec(),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "source {i} needs exactly one of 'direction' or 'ula'"
                    )))
                }
            };
            directions.push(d);
            powers.push(src.power);
        }
        Scene::new(
            directions,
            powers,
            self.sigma,
            noise,
            !self.complex,
            self.seed,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringEntry {
    pub label: String,
    pub w0: Vec<Cell>,
}

pub fn parse_steering_family(entries: &[SteeringEntry]) -> Result<Vec<SteeringVector>> {
    entries
        .iter()
        .map(|e| Ok(SteeringVector::new(parse_cells(&e.w0)?, e.label.clone())))
        .collect()
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn read_matrix(path: &Path) -> Result<HermitianMatrix> {
    read_json::<MatrixFile>(path)?.to_hermitian()
}

fn format_cell(z: C64, complex: bool) -> String {
    if complex {
        format!("{}:{}", z.re, z.im)
    } else {
        format!("{}", z.re)
    }
}

/// One snapshot per row; complex cells are written `re:im`.
pub fn snapshots_csv(set: &SnapshotSet) -> String {
    let complex = !set.scene().is_real();
    let mut out = String::new();
    for x in set.snapshots() {
        let row: Vec<String> = x.iter().map(|&z| format_cell(z, complex)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_snapshots_csv(text: &str) -> Result<Vec<Vec<C64>>> {
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("bad number '{s}': {e}")))
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split(',')
                .map(|cell| match cell.split_once(':') {
                    Some((re, im)) => Ok(C64::new(parse(re)?, parse(im)?)),
                    None => Ok(C64::new(parse(cell)?, 0.0)),
                })
                .collect()
        })
        .collect()
}

pub const BEAMPATTERN_HEADER: &str =
    "label,power_observed,power_structured,mvdr_power_observed,mvdr_power_structured";

pub fn beampattern_csv(observed: &[BeamPoint], structured: &[BeamPoint]) -> String {
    let mut out = String::from(BEAMPATTERN_HEADER);
    out.push('\n');
    for (o, s) in observed.iter().zip(structured) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            o.label, o.classical, s.classical, o.mvdr, s.mvdr
        );
    }
    out
}
