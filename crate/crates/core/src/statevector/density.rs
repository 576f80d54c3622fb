use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{StateError, MAX_EIGEN_DIM, NORM_TOL};

/// A density operator stored as a dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and (for dimensions up to
    /// [`MAX_EIGEN_DIM`]) positivity.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self, StateError> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(StateError::InvalidDensityMatrix("matrix is not square".into()));
        }
        let dim = matrix.nrows();
        for r in 0..dim {
            for c in r..dim {
                if (matrix[(r, c)] - matrix[(c, r)].conj()).norm() > NORM_TOL {
                    return Err(StateError::InvalidDensityMatrix(format!(
                        "not Hermitian at ({r}, {c})"
                    )));
                }
            }
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(StateError::InvalidDensityMatrix(format!("trace {trace} is not 1")));
        }
        let out = Self { matrix };
        if dim <= MAX_EIGEN_DIM {
            let min = out.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
            if min < -NORM_TOL {
                return Err(StateError::InvalidDensityMatrix(format!(
                    "negative eigenvalue {min}"
                )));
            }
        }
        Ok(out)
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(amplitudes: &[C64]) -> Self {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self { matrix: &v * v.adjoint() }
    }

    /// Convex combination `Σ w_i ρ_i`. Weights are normalized to sum to 1.
    pub fn mixture<'a, I>(terms: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (f64, &'a DensityMatrix)>,
    {
        let mut acc: Option<DMatrix<C64>> = None;
        let mut total = 0.0;
        for (w, rho) in terms {
            total += w;
            match &mut acc {
                None => acc = Some(rho.matrix.scale(w)),
                Some(m) => {
                    if m.nrows() != rho.dimension() {
                        return Err(StateError::DimensionMismatch(m.nrows(), rho.dimension()));
                    }
                    *m += rho.matrix.scale(w);
                }
            }
        }
        let m = acc.ok_or(StateError::EmptyRegisterSet)?;
        if total <= 0.0 {
            return Err(StateError::InvalidDensityMatrix("weights sum to zero".into()));
        }
        Ok(Self { matrix: m.unscale(total) })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, StateError> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &DMatrix<C64>) -> Result<Self, StateError> {
        if unitary.nrows() != self.dimension() || unitary.ncols() != self.dimension() {
            return Err(StateError::DimensionMismatch(self.dimension(), unitary.nrows()));
        }
        Ok(Self { matrix: unitary * &self.matrix * unitary.adjoint() })
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64, StateError> {
        trace_distance(self, other)
    }
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>, StateError> {
    if m.nrows() > MAX_EIGEN_DIM {
        return Err(StateError::TooLarge { dim: m.nrows(), max: MAX_EIGEN_DIM });
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `½ Σ |λ_i(a − b)|`, clamped to `[0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, StateError> {
    if a.dimension() != b.dimension() {
        return Err(StateError::DimensionMismatch(a.dimension(), b.dimension()));
    }
    let diff = &a.matrix - &b.matrix;
    let sum: f64 = hermitian_eigenvalues(&diff)?.iter().map(|l| l.abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Row-major `[[re, im], ...]` rows, the on-disk matrix format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixRows(pub Vec<Vec<[f64; 2]>>);

impl From<&DensityMatrix> for MatrixRows {
    fn from(rho: &DensityMatrix) -> Self {
        let n = rho.dimension();
        MatrixRows(
            (0..n)
                .map(|r| (0..n).map(|c| [rho.get(r, c).re, rho.get(r, c).im]).collect())
                .collect(),
        )
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixRows::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = MatrixRows::deserialize(deserializer)?;
        let n = rows.0.len();
        if rows.0.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("density matrix rows are ragged"));
        }
        let m = DMatrix::from_fn(n, n, |r, c| C64::new(rows.0[r][c][0], rows.0[r][c][1]));
        Ok(Self { matrix: m })
    }
}
