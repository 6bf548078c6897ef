//! Symmetric linear algebra sized for moment Gram matrices.
//!
//! Two jobs: apply G⁻¹ (positive-definite solve, with a spectral
//! pseudo-inverse fallback when G lost rank), and solve the generalized
//! symmetric eigenproblem A·ψ = y·B·ψ. Orders here are the basis degree
//! count, typically below 20, so everything is dense and direct: Cholesky
//! for the factorization, cyclic Jacobi rotations for eigenvalues.

// Index loops here mirror the i,j,k of the matrix formulas.
#![allow(clippy::needless_range_loop)]

use crate::{Error, Result};

/// Relative spectral cutoff: eigenvalues (and Cholesky pivots) below this
/// fraction of the largest are treated as exact zeros rather than inverted.
/// Inverting them would amplify pure rounding noise by 1e12 or more.
pub(crate) const RELATIVE_TRUNCATION: f64 = 1e-12;

/// Jacobi sweeps stop once the off-diagonal Frobenius norm drops below this
/// fraction of the matrix norm.
const JACOBI_TOLERANCE: f64 = 1e-12;

/// Cyclic Jacobi converges quadratically; orders in the tens finish in well
/// under ten sweeps. Hitting this budget means the input was not a finite
/// symmetric matrix.
const MAX_JACOBI_SWEEPS: usize = 50;

/// Symmetric matrix stored as its packed lower triangle, so the two mirror
/// entries are one memory cell and symmetry cannot drift.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix order must be positive");
        Self {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// Builds from full rows, insisting on exact symmetry and finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "matrix rows do not form a nonempty square".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                if !rows[i][j].is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "matrix entry ({i}, {j}) is not finite"
                    )));
                }
                if rows[i][j].to_bits() != rows[j][i].to_bits() {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, rows[i][j]);
            }
        }
        Ok(m)
    }

    pub(crate) fn from_packed(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * (n + 1) / 2);
        Self { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        hi * (hi + 1) / 2 + lo
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "vector length must match matrix order");
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.get(i, j) * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let e = self.get(i, j);
                s += e * e;
            }
        }
        s.sqrt()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// One eigenpair of a generalized problem.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Output of [`gen_eig_sym`]: pairs ascending in value, vectors normalized
/// to ψᵀBψ = 1. When B had numerically zero directions they were projected
/// out first; `truncated` reports that, and fewer pairs than the matrix
/// order come back.
#[derive(Clone, Debug)]
pub struct GenEigen {
    pub pairs: Vec<EigenPair>,
    pub truncated: bool,
}

/// Result of a one-shot [`spd_solve`].
#[derive(Clone, Debug)]
pub struct SpdSolution {
    pub solution: Vec<f64>,
    /// True when A was not positive definite and the pseudo-inverse answered.
    pub degenerate: bool,
}

/// Reusable factorization of a symmetric positive (semi-)definite matrix.
///
/// Positive definite input takes the Cholesky route; input with pivots at
/// the truncation floor falls back to a spectral pseudo-inverse that zeroes
/// the dead directions and remembers it did (`is_degenerate`).
#[derive(Clone, Debug)]
pub struct SpdFactor {
    norm: f64,
    kind: FactorKind,
}

#[derive(Clone, Debug)]
enum FactorKind {
    Cholesky {
        lower: Vec<Vec<f64>>,
        matrix: SymMatrix,
    },
    Spectral {
        values: Vec<f64>,
        vectors: Vec<Vec<f64>>,
        order: usize,
    },
}

impl SpdFactor {
    pub fn factor(a: &SymMatrix) -> Result<Self> {
        let norm = a.frobenius_norm();
        if let Some(lower) = cholesky(a) {
            return Ok(Self {
                norm,
                kind: FactorKind::Cholesky {
                    lower,
                    matrix: a.clone(),
                },
            });
        }
        let (values, vectors) = jacobi_eigen(a.to_rows())?;
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::NumericallyZero);
        }
        let smallest = values.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest < -RELATIVE_TRUNCATION * scale {
            return Err(Error::Indefinite {
                eigenvalue: smallest,
            });
        }
        let mut kept_values = Vec::new();
        let mut kept_vectors = Vec::new();
        for (v, vec) in values.iter().zip(vectors) {
            if *v > RELATIVE_TRUNCATION * scale {
                kept_values.push(*v);
                kept_vectors.push(vec);
            }
        }
        if kept_values.is_empty() {
            return Err(Error::NumericallyZero);
        }
        Ok(Self {
            norm,
            kind: FactorKind::Spectral {
                values: kept_values,
                vectors: kept_vectors,
                order: a.order(),
            },
        })
    }

    pub fn order(&self) -> usize {
        match &self.kind {
            FactorKind::Cholesky { matrix, .. } => matrix.order(),
            FactorKind::Spectral { order, .. } => *order,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, FactorKind::Spectral { .. })
    }

    /// Number of directions the inverse actually acts on.
    pub fn retained(&self) -> usize {
        match &self.kind {
            FactorKind::Cholesky { matrix, .. } => matrix.order(),
            FactorKind::Spectral { values, .. } => values.len(),
        }
    }

    /// Frobenius norm of the factored matrix; the scale reference for span
    /// tests on quadratic forms.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Applies A⁻¹ (or the pseudo-inverse) to `b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.order(), "vector length must match order");
        match &self.kind {
            FactorKind::Cholesky { lower, matrix } => {
                // One step of iterative refinement keeps the residual near
                // machine level even at condition numbers around 1e8.
                let z = cholesky_solve(lower, b);
                let az = matrix.mul_vec(&z);
                let r: Vec<f64> = b.iter().zip(&az).map(|(bi, ai)| bi - ai).collect();
                let dz = cholesky_solve(lower, &r);
                z.iter().zip(&dz).map(|(zi, di)| zi + di).collect()
            }
            FactorKind::Spectral {
                values, vectors, ..
            } => {
                let mut out = vec![0.0; b.len()];
                for (value, vector) in values.iter().zip(vectors) {
                    let coef = dot(vector, b) / value;
                    for (o, vi) in out.iter_mut().zip(vector) {
                        *o += coef * vi;
                    }
                }
                out
            }
        }
    }
}

/// Solves A·z = b for symmetric positive (semi-)definite A in one shot.
pub fn spd_solve(a: &SymMatrix, b: &[f64]) -> Result<SpdSolution> {
    let factor = SpdFactor::factor(a)?;
    let degenerate = factor.is_degenerate();
    Ok(SpdSolution {
        solution: factor.solve(b),
        degenerate,
    })
}

/// Solves A·ψ = y·B·ψ for symmetric A and positive semi-definite B.
///
/// Positive definite B is reduced through its Cholesky factor to a standard
/// symmetric problem; rank-deficient B is first projected onto the span of
/// its significant eigendirections (the truncation threshold of
/// [`SpdFactor`]), which is where the `truncated` flag comes from.
pub fn gen_eig_sym(a: &SymMatrix, b: &SymMatrix) -> Result<GenEigen> {
    if a.order() != b.order() {
        return Err(Error::InvalidInput(format!(
            "matrix orders differ: {} vs {}",
            a.order(),
            b.order()
        )));
    }
    let n = a.order();
    let (raw, truncated) = if let Some(lower) = cholesky(b) {
        // C = L⁻¹ A L⁻ᵀ, then ψ = L⁻ᵀ u for each eigenvector u of C.
        let mut x = vec![vec![0.0; n]; n];
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| a.get(i, j)).collect();
            let sol = forward_solve(&lower, &col);
            for i in 0..n {
                x[i][j] = sol[i];
            }
        }
        let mut c = vec![vec![0.0; n]; n];
        for (i, xi) in x.iter().enumerate() {
            c[i] = forward_solve(&lower, xi);
        }
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (c[i][j] + c[j][i]);
                c[i][j] = m;
                c[j][i] = m;
            }
        }
        let (values, vectors) = jacobi_eigen(c)?;
        let pairs = values
            .into_iter()
            .zip(vectors)
            .map(|(value, u)| EigenPair {
                value,
                vector: backward_solve(&lower, &u),
            })
            .collect();
        (pairs, false)
    } else {
        let (b_values, b_vectors) = jacobi_eigen(b.to_rows())?;
        let scale = b_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::NumericallyZero);
        }
        let smallest = b_values.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest < -RELATIVE_TRUNCATION * scale {
            return Err(Error::Indefinite {
                eigenvalue: smallest,
            });
        }
        let mut span: Vec<Vec<f64>> = Vec::new();
        for (value, vector) in b_values.iter().zip(b_vectors) {
            if *value > RELATIVE_TRUNCATION * scale {
                let inv_sqrt = 1.0 / value.sqrt();
                span.push(vector.iter().map(|v| v * inv_sqrt).collect());
            }
        }
        let r = span.len();
        if r == 0 {
            return Err(Error::NumericallyZero);
        }
        let images: Vec<Vec<f64>> = span.iter().map(|w| a.mul_vec(w)).collect();
        let mut reduced = vec![vec![0.0; r]; r];
        for i in 0..r {
            for j in 0..=i {
                let v = dot(&span[i], &images[j]);
                reduced[i][j] = v;
                reduced[j][i] = v;
            }
        }
        let (values, vectors) = jacobi_eigen(reduced)?;
        let pairs = values
            .into_iter()
            .zip(vectors)
            .map(|(value, u)| {
                let mut vector = vec![0.0; n];
                for (coef, w) in u.iter().zip(&span) {
                    for (out, wi) in vector.iter_mut().zip(w) {
                        *out += coef * wi;
                    }
                }
                EigenPair { value, vector }
            })
            .collect();
        (pairs, r < n)
    };

    let mut pairs: Vec<EigenPair> = raw;
    pairs.sort_by(|p, q| p.value.total_cmp(&q.value));
    for pair in &mut pairs {
        orient(&mut pair.vector);
    }
    Ok(GenEigen { pairs, truncated })
}

/// Ratio of the largest to the smallest eigenvalue magnitude; infinite when
/// the matrix is singular to working precision.
pub fn condition_estimate(a: &SymMatrix) -> Result<f64> {
    let (values, _) = jacobi_eigen(a.to_rows())?;
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 || min < RELATIVE_TRUNCATION * max {
        Ok(f64::INFINITY)
    } else {
        Ok(max / min)
    }
}

/// Flips a vector so its first significant component is positive; the
/// deterministic sign convention for reported eigenvectors.
fn orient(vector: &mut [f64]) {
    let max = vector.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return;
    }
    let lead = vector.iter().find(|v| v.abs() > 1e-12 * max);
    if let Some(&lead) = lead {
        if lead < 0.0 {
            for v in vector {
                *v = -*v;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor of A, or None when a pivot falls below
/// the truncation floor (A not positive definite to working precision).
fn cholesky(a: &SymMatrix) -> Option<Vec<Vec<f64>>> {
    let n = a.order();
    let mut max_diag = 0.0f64;
    for i in 0..n {
        max_diag = max_diag.max(a.get(i, i));
    }
    if max_diag <= 0.0 {
        return None;
    }
    let floor = RELATIVE_TRUNCATION * max_diag;
    let mut lower: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; i + 1]).collect();
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= lower[i][k] * lower[j][k];
            }
            if i == j {
                if s <= floor {
                    return None;
                }
                lower[i][i] = s.sqrt();
            } else {
                lower[i][j] = s / lower[j][j];
            }
        }
    }
    Some(lower)
}

fn forward_solve(lower: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= lower[i][k] * y[k];
        }
        y[i] = s / lower[i][i];
    }
    y
}

fn backward_solve(lower: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= lower[k][i] * x[k];
        }
        x[i] = s / lower[i][i];
    }
    x
}

fn cholesky_solve(lower: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    backward_solve(lower, &forward_solve(lower, b))
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..i {
            s += 2.0 * a[i][j] * a[i][j];
        }
    }
    s.sqrt()
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .flat_map(|row| row.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Cyclic Jacobi diagonalization of a dense symmetric matrix. Returns
/// eigenvalues and matching eigenvectors, unordered.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.len();
    let threshold = JACOBI_TOLERANCE * frobenius(&a);
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        // Negated form so NaN falls through to the finiteness check.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(off > threshold) {
            if !off.is_finite() {
                return Err(Error::InvalidInput(
                    "matrix contains non-finite entries".into(),
                ));
            }
            break;
        }
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta.abs() > 1e150 {
                    // theta² would overflow; the rotation is essentially flat.
                    0.5 / theta
                } else {
                    let root = (theta * theta + 1.0).sqrt();
                    if theta >= 0.0 {
                        1.0 / (theta + root)
                    } else {
                        1.0 / (theta - root)
                    }
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let apq = a[p][q];
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r][p];
                    let arq = a[r][q];
                    a[r][p] = arp - s * (arq + tau * arp);
                    a[r][q] = arq + s * (arp - tau * arq);
                    a[p][r] = a[r][p];
                    a[q][r] = a[r][q];
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = vp - s * (vq + tau * vp);
                    row[q] = vq + s * (vp - tau * vq);
                }
            }
        }
        sweeps += 1;
    }
    let values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|i| v[i][k]).collect()).collect();
    Ok((values, vectors))
}
