//! JSON records for every file format the tools read or write. All matrices
//! are row-major full square arrays of `f64`; serde's float formatting is
//! shortest-round-trip, so save/load reproduces values bit for bit.

use serde::{Deserialize, Serialize};

use crate::center::CenterRun;
use crate::grid::DirectionGrid;
use crate::horo::{Flat, Horoball, Horofunction, Orientation};
use crate::hull::{BallHull, HullBall, Provenance};
use crate::mat::SqMatrix;
use crate::spd::{SpdPoint, SymMatrix};
use crate::{Error, Result};

fn matrix_to_vec(m: &SqMatrix<f64>) -> Vec<f64> {
    m.as_slice().to_vec()
}

fn matrix_from_vec(n: usize, data: &[f64]) -> Result<SqMatrix<f64>> {
    SqMatrix::from_row_major(n, data.to_vec())
}

/// Dataset file: `{"n": k, "points": [[row-major n*n matrix], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl DatasetRecord {
    pub fn from_points(points: &[SpdPoint<f64>], labels: Option<Vec<String>>) -> Self {
        let n = points.first().map(|p| p.dim()).unwrap_or(0);
        DatasetRecord {
            n,
            points: points
                .iter()
                .map(|p| matrix_to_vec(&p.matrix().to_square()))
                .collect(),
            labels,
        }
    }

    /// Validated points; symmetry is enforced by averaging, and the largest
    /// asymmetry seen is reported for the caller's warning policy.
    pub fn to_points(&self) -> Result<(Vec<SpdPoint<f64>>, f64)> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut worst_asym = 0.0f64;
        for (k, flat_values) in self.points.iter().enumerate() {
            let full = matrix_from_vec(self.n, flat_values)
                .map_err(|_| Error::InvalidParameter(format!(
                    "point {k}: expected {} values, got {}",
                    self.n * self.n,
                    flat_values.len()
                )))?;
            let (sym, asym) = SymMatrix::from_square_symmetrized(&full)?;
            worst_asym = worst_asym.max(asym);
            let p = SpdPoint::new(sym).map_err(|e| match e {
                Error::NotPositiveDefinite { min_eig, max_eig } => Error::InvalidParameter(
                    format!("point {k} is not positive definite (min eigenvalue {min_eig:e}, max {max_eig:e})"),
                ),
                other => other,
            })?;
            out.push(p);
        }
        Ok((out, worst_asym))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub flat: usize,
    pub vertices: Vec<usize>,
    pub perturbed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoroballRecord {
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub a: Vec<f64>,
    pub sign: String,
    pub level: f64,
    pub provenance: ProvenanceRecord,
}

/// Hull file: `{n, epsilon, d_X, origin_shift, horoballs: [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullRecord {
    pub n: usize,
    pub epsilon: f64,
    #[serde(rename = "d_X")]
    pub d_x: f64,
    pub origin_shift: Vec<f64>,
    pub horoballs: Vec<HoroballRecord>,
}

impl HullRecord {
    pub fn from_hull(hull: &BallHull<f64>) -> Self {
        let n = hull.origin_shift.dim();
        HullRecord {
            n,
            epsilon: hull.epsilon,
            d_x: hull.d_x,
            origin_shift: matrix_to_vec(&hull.origin_shift.matrix().to_square()),
            horoballs: hull
                .balls
                .iter()
                .map(|b| HoroballRecord {
                    q: matrix_to_vec(b.ball.horofunction.flat().rotation()),
                    a: b.ball.horofunction.direction().to_vec(),
                    sign: b.ball.horofunction.orientation().sign_str().to_string(),
                    level: b.ball.level,
                    provenance: ProvenanceRecord {
                        flat: b.provenance.flat,
                        vertices: b.provenance.vertices.clone(),
                        perturbed: b.provenance.perturbed,
                    },
                })
                .collect(),
        }
    }

    pub fn to_hull(&self) -> Result<BallHull<f64>> {
        let origin_full = matrix_from_vec(self.n, &self.origin_shift)?;
        let (origin_sym, _) = SymMatrix::from_square_symmetrized(&origin_full)?;
        let origin = SpdPoint::new(origin_sym)?;
        let mut balls = Vec::with_capacity(self.horoballs.len());
        for rec in &self.horoballs {
            let rotation = matrix_from_vec(self.n, &rec.q)?;
            let orientation = Orientation::from_sign_str(&rec.sign)?;
            let horofunction = Horofunction::new(Flat::new(rotation)?, rec.a.clone(), orientation)?;
            balls.push(HullBall {
                ball: Horoball {
                    horofunction,
                    level: rec.level,
                },
                provenance: Provenance {
                    flat: rec.provenance.flat,
                    vertices: rec.provenance.vertices.clone(),
                    perturbed: rec.provenance.perturbed,
                },
            });
        }
        Ok(BallHull {
            origin_shift: origin,
            epsilon: self.epsilon,
            d_x: self.d_x,
            balls,
            grid_len: 0,
        })
    }
}

/// Center result file:
/// `{p_hat, max_violation, objective, constraints_count, grid_size, seed}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CenterRecord {
    pub p_hat: Vec<f64>,
    pub max_violation: f64,
    pub objective: f64,
    pub constraints_count: usize,
    pub grid_size: usize,
    pub seed: u64,
}

impl CenterRecord {
    pub fn from_run(run: &CenterRun<f64>) -> Self {
        CenterRecord {
            p_hat: matrix_to_vec(&run.result.point.matrix().to_square()),
            max_violation: run.result.max_violation,
            objective: run.result.objective,
            constraints_count: run.constraints_count,
            grid_size: run.grid_size,
            seed: run.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GivensRecord {
    pub i: usize,
    pub j: usize,
    pub angle: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFlatRecord {
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub givens: Vec<GivensRecord>,
}

/// Grid dump: the rotation of every flat with its Givens provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRecord {
    pub n: usize,
    pub delta: Option<f64>,
    pub flats: Vec<GridFlatRecord>,
}

impl GridRecord {
    pub fn from_grid(grid: &DirectionGrid<f64>) -> Self {
        GridRecord {
            n: grid.dim(),
            delta: grid.step(),
            flats: grid
                .flats()
                .iter()
                .zip(grid.provenance().iter())
                .map(|(f, prov)| GridFlatRecord {
                    q: matrix_to_vec(f.rotation()),
                    givens: prov
                        .iter()
                        .map(|g| GivensRecord {
                            i: g.i,
                            j: g.j,
                            angle: g.angle,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// One extent evaluation for the `extent` command output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtentRecord {
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub a: Vec<f64>,
    pub ext: f64,
}
