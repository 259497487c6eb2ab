//! Dense complex and real matrix kernels sized for MIMO link analysis.
//!
//! The exact engine works with q×q matrices (q ≤ 8) and the large-system
//! code with Gram matrices up to a few hundred on a side, so everything here
//! is straightforward row-major storage with O(n³) algorithms.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                actual: format!("{} entries", data.len()),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidConfig("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", self.cols),
                actual: format!("{} rows", rhs.rows),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// `scale · self + shift · I` for a square matrix.
    pub fn scaled_plus_identity(&self, scale: f64, shift: f64) -> Self {
        let mut out = self.scale(scale);
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] += shift;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest |A − Aᴴ| entry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// BᴴB (cols×cols) without forming the transpose.
fn gram_columns(b: &ComplexMatrix) -> ComplexMatrix {
    let n = b.cols;
    let mut out = ComplexMatrix::zeros(n, n);
    for k in 0..b.rows {
        let row = &b.data[k * n..(k + 1) * n];
        for (i, ri) in row.iter().enumerate() {
            let ci = ri.conj();
            for (j, rj) in row.iter().enumerate().skip(i) {
                out.data[i * n + j] += ci * rj;
            }
        }
    }
    for i in 0..n {
        out.data[i * n + i].im = 0.0;
        for j in 0..i {
            out.data[i * n + j] = out.data[j * n + i].conj();
        }
    }
    out
}

/// BBᴴ (rows×rows).
fn gram_rows(b: &ComplexMatrix) -> ComplexMatrix {
    let n = b.rows;
    let c = b.cols;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let ri = &b.data[i * c..(i + 1) * c];
        for j in i..n {
            let rj = &b.data[j * c..(j + 1) * c];
            let s: Complex64 = ri.iter().zip(rj).map(|(x, y)| x * y.conj()).sum();
            out.data[i * n + j] = s;
        }
    }
    for i in 0..n {
        out.data[i * n + i].im = 0.0;
        for j in 0..i {
            out.data[i * n + j] = out.data[j * n + i].conj();
        }
    }
    out
}

/// The smaller Gram matrix of an N_r×N_t channel: HᴴH when N_t < N_r,
/// otherwise HHᴴ. The result is q×q with q = min(N_t, N_r).
pub fn gram(h: &ComplexMatrix, nt: usize, nr: usize) -> Result<ComplexMatrix> {
    if h.rows != nr || h.cols != nt {
        return Err(Error::DimensionMismatch {
            expected: format!("{nr}x{nt}"),
            actual: format!("{}x{}", h.rows, h.cols),
        });
    }
    Ok(smaller_gram(h))
}

/// Gram matrix on the smaller side of `h`.
pub fn smaller_gram(h: &ComplexMatrix) -> ComplexMatrix {
    if h.cols < h.rows {
        gram_columns(h)
    } else {
        gram_rows(h)
    }
}

fn require_square(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            actual: format!("{}x{}", a.rows, a.cols),
        });
    }
    Ok(())
}

/// Lower-triangular L with A = L Lᴴ for Hermitian positive definite A.
pub fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square(a)?;
    let n = a.rows;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// log₂ det A for Hermitian positive definite A.
pub fn log2_det_hermitian(a: &ComplexMatrix) -> Result<f64> {
    let l = cholesky(a)?;
    let ln_det: f64 = (0..l.rows).map(|i| l[(i, i)].re.ln()).sum::<f64>() * 2.0;
    Ok(ln_det / std::f64::consts::LN_2)
}

/// L⁻¹ for lower-triangular L by forward substitution.
fn lower_inverse(l: &ComplexMatrix) -> ComplexMatrix {
    let n = l.rows;
    let mut x = ComplexMatrix::zeros(n, n);
    for col in 0..n {
        x[(col, col)] = Complex64::new(1.0, 0.0) / l[(col, col)];
        for i in col + 1..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in col..i {
                s += l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = -s / l[(i, i)];
        }
    }
    x
}

/// Diagonal of A⁻¹ for Hermitian positive definite A.
pub fn hermitian_inverse_diagonal(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let x = lower_inverse(&cholesky(a)?);
    let n = a.rows;
    // A⁻¹ = L⁻ᴴ L⁻¹, so (A⁻¹)_ii = Σ_k |(L⁻¹)_ki|²
    let mut diag = vec![0.0; n];
    for k in 0..n {
        for (i, d) in diag.iter_mut().enumerate().take(k + 1) {
            *d += x[(k, i)].norm_sqr();
        }
    }
    Ok(diag)
}

/// A⁻¹ for Hermitian positive definite A.
pub fn hermitian_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let x = lower_inverse(&cholesky(a)?);
    x.conj_transpose().matmul(&x)
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// ascending. Off-diagonal mass is driven below `1e-12·‖A‖_F`.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    require_square(a)?;
    let n = a.rows;
    let mut m = a.clone();
    let norm = a.frobenius_norm_sq().sqrt();
    let tol = 1e-12 * norm;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= tol || off == 0.0 {
            let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let e = apq / r;
                let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // columns: A ← A J
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c - akq * e.conj() * s;
                    m[(k, q)] = akp * e * s + akq * c;
                }
                // rows: A ← Jᴴ A
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c - aqk * e * s;
                    m[(q, k)] = apk * e.conj() * s + aqk * c;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Err(Error::NonConvergence {
        what: "Jacobi eigenvalue iteration",
        iterations: JACOBI_MAX_SWEEPS,
    })
}

/// The min(rows, cols) squared singular values of `m`, ascending and
/// clamped at zero.
pub fn squared_singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let ev = hermitian_eigenvalues(&smaller_gram(m))?;
    Ok(ev.into_iter().map(|v| v.max(0.0)).collect())
}

/// Square row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", n * n),
                actual: format!("{} entries", data.len()),
            });
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Determinant by LU with partial pivoting; det of the 0×0 matrix is 1.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .unwrap();
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for i in col + 1..n {
                let f = a[i * n + col] / d;
                if f != 0.0 {
                    for j in col + 1..n {
                        a[i * n + j] -= f * a[col * n + j];
                    }
                }
            }
        }
        det
    }

    /// The matrix with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> RealMatrix {
        let n = self.n;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != r) {
            for j in (0..n).filter(|&j| j != c) {
                data.push(self[(i, j)]);
            }
        }
        RealMatrix { n: n - 1, data }
    }

    /// Signed cofactor (−1)^{r+c}·det(minor) for zero-based indices.
    pub fn cofactor(&self, r: usize, c: usize) -> Result<f64> {
        if r >= self.n || c >= self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("index below {}", self.n),
                actual: format!("({r}, {c})"),
            });
        }
        let sign = if (r + c).is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * self.minor(r, c).det())
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Free-function form of [`RealMatrix::cofactor`].
pub fn cofactor(a: &RealMatrix, r: usize, c: usize) -> Result<f64> {
    a.cofactor(r, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn laplace_det(a: &RealMatrix) -> f64 {
        if a.dim() == 0 {
            return 1.0;
        }
        (0..a.dim())
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[(0, j)] * laplace_det(&a.minor(0, j))
            })
            .sum()
    }

    fn arb_complex(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), rows * cols).prop_map(move |v| {
            ComplexMatrix::new(rows, cols, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
    }

    #[test]
    fn gram_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(gram(&i2, 2, 2).unwrap(), i2);
        let row = ComplexMatrix::new(1, 2, vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let w = gram(&row, 2, 1).unwrap();
        assert_eq!((w.rows(), w.cols()), (1, 1));
        assert!((w[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        assert!(gram(&row, 1, 2).is_err());
    }

    #[test]
    fn gram_matches_triple_loop() {
        let h = ComplexMatrix::from_fn(3, 2, |i, j| c(i as f64 - 0.3 * j as f64, 0.7 * (i * j) as f64 - 0.2));
        let w = gram(&h, 2, 3).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = c(0.0, 0.0);
                for k in 0..3 {
                    s += h[(k, i)].conj() * h[(k, j)];
                }
                assert!((w[(i, j)] - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn log_det_examples() {
        assert_eq!(log2_det_hermitian(&ComplexMatrix::identity(4)).unwrap(), 0.0);
        let d = ComplexMatrix::from_real_diagonal(&[2.0, 4.0]);
        assert!((log2_det_hermitian(&d).unwrap() - 3.0).abs() < 1e-15);
        let bad = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            log2_det_hermitian(&bad),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn singular_value_examples() {
        let d = ComplexMatrix::from_real_diagonal(&[2.0, 1.0]);
        let sv = squared_singular_values(&d).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-14 && (sv[1] - 4.0).abs() < 1e-14);
        let z = ComplexMatrix::zeros(3, 2);
        assert_eq!(squared_singular_values(&z).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn ula_gram_matches_quadratic_formula() {
        // 4 receive angles, 2 transmit elements at half-wavelength spacing
        let angles = [-0.9, -0.2, 0.4, 1.1f64];
        let h = ComplexMatrix::from_fn(4, 2, |n, m| {
            Complex64::from_polar(1.0, -(m as f64) * std::f64::consts::PI * angles[n].sin())
        });
        let w = gram_columns(&h);
        let (a, d, b) = (w[(0, 0)].re, w[(1, 1)].re, w[(0, 1)].norm_sqr());
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b).sqrt();
        let sv = squared_singular_values(&h).unwrap();
        assert!((sv[0] - (mid - rad)).abs() < 1e-12);
        assert!((sv[1] - (mid + rad)).abs() < 1e-12);
    }

    #[test]
    fn cofactor_examples() {
        let one = RealMatrix::new(1, vec![7.0]).unwrap();
        assert_eq!(one.cofactor(0, 0).unwrap(), 1.0);
        let two = RealMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(two.cofactor(0, 0).unwrap(), 4.0);
        assert_eq!(two.cofactor(0, 1).unwrap(), -3.0);
        assert!(two.cofactor(2, 0).is_err());
    }

    #[test]
    fn cofactor_matches_laplace_expansion() {
        let a = RealMatrix::from_fn(4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + 0.1 * (i * j) as f64);
        for r in 0..4 {
            for col in 0..4 {
                let sign = if (r + col) % 2 == 0 { 1.0 } else { -1.0 };
                let want = sign * laplace_det(&a.minor(r, col));
                assert!((a.cofactor(r, col).unwrap() - want).abs() < 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    proptest! {
        #[test]
        fn gram_is_hermitian_and_trace_consistent(h in arb_complex(3, 5)) {
            let w = smaller_gram(&h);
            prop_assert!(w.hermitian_defect() <= 1e-13 * w.max_abs());
            let other = gram_columns(&h);
            let energy = h.frobenius_norm_sq();
            prop_assert!((w.trace().re - energy).abs() <= 1e-12 * energy);
            prop_assert!((other.trace().re - energy).abs() <= 1e-12 * energy);
        }

        #[test]
        fn singular_values_sum_to_trace(h in arb_complex(4, 3)) {
            let sv = squared_singular_values(&h).unwrap();
            prop_assert_eq!(sv.len(), 3);
            prop_assert!(sv.windows(2).all(|w| w[0] <= w[1]));
            let tr = smaller_gram(&h).trace().re;
            prop_assert!((sv.iter().sum::<f64>() - tr).abs() <= 1e-10 * tr.max(1e-300));
        }

        #[test]
        fn log_det_matches_eigenvalues_and_inverse(b in arb_complex(4, 4)) {
            let a = gram_columns(&b).scaled_plus_identity(1.0, 1.0);
            let ld = log2_det_hermitian(&a).unwrap();
            let ev: f64 = hermitian_eigenvalues(&a).unwrap().iter().map(|v| v.log2()).sum();
            prop_assert!((ld - ev).abs() <= 1e-10 * ld.abs().max(1.0));
            let inv = hermitian_inverse(&a).unwrap();
            let back = log2_det_hermitian(&inv).unwrap();
            prop_assert!((ld + back).abs() < 1e-9);
            let diag = hermitian_inverse_diagonal(&a).unwrap();
            for (i, d) in diag.iter().enumerate() {
                prop_assert!((d - inv[(i, i)].re).abs() < 1e-12);
            }
        }

        #[test]
        fn laplace_identity(v in prop::collection::vec(-3.0..3.0f64, 16)) {
            let a = RealMatrix::new(4, v).unwrap();
            let det = a.det();
            prop_assert!((det - laplace_det(&a)).abs() <= 1e-10 * (1.0 + det.abs()));
            for r in 0..4 {
                let s: f64 = (0..4).map(|m| a[(r, m)] * a.cofactor(r, m).unwrap()).sum();
                prop_assert!((s - det).abs() <= 1e-10 * (1.0 + det.abs()));
            }
        }
    }
}
