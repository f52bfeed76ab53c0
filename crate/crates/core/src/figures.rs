//! Plottable curve samples for the three reference pictures: the root/coefficient
//! map at `n = 3`, the dominance polyhedron at `n = 3`, and the bent path at `n = 4`.

use serde::{Deserialize, Serialize};

use crate::continuity::signed_two_thirds;
use crate::error::{GiskError, Result};
use crate::stability::{phi, psi_closure, RootTuple};
use crate::symmfunc::GiskCoeffs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    Map21,
    Polyhedron22,
    Path41,
}

impl std::str::FromStr for FigureKind {
    type Err = GiskError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map21" => Ok(FigureKind::Map21),
            "polyhedron22" => Ok(FigureKind::Polyhedron22),
            "path41" => Ok(FigureKind::Path41),
            other => Err(GiskError::InvalidParameter(format!("unknown figure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureParams {
    pub n: usize,
    /// Samples per curve.
    pub points: usize,
    /// Largest abscissa sampled (`x_1` for the map, `c_1` for the polyhedron curve).
    pub extent: f64,
    /// Reference coefficients; `None` picks the pictured default.
    pub d: Option<Vec<f64>>,
    /// Bend parameter of the four-dimensional path.
    pub ell: Option<f64>,
}

impl FigureParams {
    pub fn default_for(kind: FigureKind) -> FigureParams {
        let (n, extent) = match kind {
            FigureKind::Map21 => (3, 9.6),
            FigureKind::Polyhedron22 => (3, 2.0),
            FigureKind::Path41 => (4, 1.0),
        };
        FigureParams {
            n,
            points: 100,
            extent,
            d: None,
            ell: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub series: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub schema: u32,
    pub which: FigureKind,
    /// Column names following the leading `series` column.
    pub columns: Vec<String>,
    pub rows: Vec<FigureRow>,
}

impl FigureData {
    pub fn csv_header(&self) -> Vec<String> {
        std::iter::once("series".to_string()).chain(self.columns.iter().cloned()).collect()
    }
}

/// Ray slopes `x_0/x_1` drawn in the map picture.
pub fn map21_slopes() -> Vec<f64> {
    (4..=12).map(|t| 16.0 / t as f64).collect()
}

fn grid(points: usize, hi: f64) -> Vec<f64> {
    (1..=points).map(|j| hi * j as f64 / points as f64).collect()
}

fn require(params: &FigureParams, n: usize) -> Result<()> {
    if params.n != n {
        return Err(GiskError::DimensionMismatch { expected: n, got: params.n });
    }
    if params.points < 2 || !(params.extent > 0.0) {
        return Err(GiskError::InvalidParameter("need points ≥ 2 and a positive extent".into()));
    }
    Ok(())
}

fn map21(params: &FigureParams) -> Result<FigureData> {
    require(params, 3)?;
    let mut rows = Vec::new();
    let mut push = |series: String, x1: f64, x0: f64| -> Result<()> {
        let c = psi_closure(&RootTuple::from_levels(3, &[x0, x1])?)?;
        rows.push(FigureRow {
            series,
            values: vec![x1, x0, c.coeff(1), c.coeff(0)],
        });
        Ok(())
    };
    for s in map21_slopes() {
        for x1 in grid(params.points, params.extent / s) {
            push(format!("ray_{s:.4}"), x1, s * x1)?;
        }
    }
    for x1 in grid(params.points, params.extent) {
        push("boundary".into(), x1, x1)?;
    }
    for x0 in grid(params.points, params.extent) {
        push("cy".into(), 0.0, x0)?;
    }
    Ok(FigureData {
        schema: 1,
        which: FigureKind::Map21,
        columns: ["x1", "x0", "c1", "c0"].map(String::from).to_vec(),
        rows,
    })
}

fn polyhedron22(params: &FigureParams) -> Result<FigureData> {
    require(params, 3)?;
    let d = GiskCoeffs::new(3, params.d.clone().unwrap_or_else(|| vec![4.0, -4.0]))?;
    let x1 = phi(&d)?.x1();
    let facet = x1 * x1;
    let mut rows = Vec::new();
    for c1 in grid(params.points, params.extent.max(facet)) {
        rows.push(FigureRow {
            series: "boundary_curve".into(),
            values: vec![c1, -2.0 * c1.powf(1.5)],
        });
    }
    let (lo, hi) = (-2.0 * facet.powf(1.5), d.coeff(0).abs().max(4.0));
    for j in 0..params.points {
        let c0 = lo + (hi - lo) * j as f64 / (params.points - 1) as f64;
        rows.push(FigureRow {
            series: "facet".into(),
            values: vec![facet, c0],
        });
    }
    Ok(FigureData {
        schema: 1,
        which: FigureKind::Polyhedron22,
        columns: ["c1", "c0"].map(String::from).to_vec(),
        rows,
    })
}

fn path41(params: &FigureParams) -> Result<FigureData> {
    require(params, 4)?;
    let (d2, d1) = match params.d.as_deref() {
        None => (4.0, -4.0),
        Some([d2, d1, ..]) => (*d2, *d1),
        Some(_) => return Err(GiskError::DimensionMismatch { expected: 3, got: params.d.as_ref().map_or(0, |v| v.len()) }),
    };
    if d2 < 0.0 || d1 >= 0.0 {
        return Err(GiskError::InvalidParameter("the bent path needs d_2 ≥ 0 and d_1 < 0".into()));
    }
    let ell = params.ell.unwrap_or(-2.0 * d2.powf(1.5) / d1 * 0.984375);
    let rows = (0..params.points)
        .map(|j| {
            let t = j as f64 / (params.points - 1) as f64;
            FigureRow {
                series: "path".into(),
                values: vec![t, signed_two_thirds(d2.powf(1.5) + (1.0 - t) * ell * d1 / 2.0), t * d1],
            }
        })
        .collect();
    Ok(FigureData {
        schema: 1,
        which: FigureKind::Path41,
        columns: ["t", "c2", "c1"].map(String::from).to_vec(),
        rows,
    })
}

pub fn figure_data(kind: FigureKind, params: &FigureParams) -> Result<FigureData> {
    let unused = match kind {
        FigureKind::Map21 if params.d.is_some() => Some("d"),
        FigureKind::Map21 | FigureKind::Polyhedron22 if params.ell.is_some() => Some("ell"),
        _ => None,
    };
    if let Some(name) = unused {
        return Err(GiskError::InvalidParameter(format!("{name} does not apply to this figure")));
    }
    match kind {
        FigureKind::Map21 => map21(params),
        FigureKind::Polyhedron22 => polyhedron22(params),
        FigureKind::Path41 => path41(params),
    }
}
