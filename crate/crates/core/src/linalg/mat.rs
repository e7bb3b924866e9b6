use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar type shared by real and complex matrices. Real matrices keep every
/// imaginary part at exactly zero.
pub type Scalar = Complex64;

#[inline]
pub fn re(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

/// Scalar field a matrix is defined over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// Dense row-major matrix over ℝ or ℂ.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<Scalar>,
}

impl Mat {
    /// Validated constructor: rejects NaN/Inf and complex entries in a real matrix.
    pub fn new(rows: usize, cols: usize, field: Field, data: Vec<Scalar>) -> Result<Mat> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        for (k, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
            }
            if field == Field::Real && z.im != 0.0 {
                return Err(Error::FieldMismatch(format!(
                    "entry ({}, {}) has nonzero imaginary part in a real matrix",
                    k / cols,
                    k % cols
                )));
            }
        }
        Ok(Mat { rows, cols, field, data })
    }

    pub fn zeros(rows: usize, cols: usize, field: Field) -> Mat {
        Mat { rows, cols, field, data: vec![Scalar::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n, Field::Real);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, field: Field, mut f: impl FnMut(usize, usize) -> Scalar) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = f(i, j);
                data.push(if field == Field::Real { re(z.re) } else { z });
            }
        }
        Mat { rows, cols, field, data }
    }

    /// Real matrix from row-major data. Panics on a length mismatch.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Mat {
        assert_eq!(data.len(), rows * cols, "from_real: wrong data length");
        Mat { rows, cols, field: Field::Real, data: data.iter().map(|&x| re(x)).collect() }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "from_real_rows: ragged rows");
            data.extend(row.iter().map(|&x| re(x)));
        }
        Mat { rows: r, cols: c, field: Field::Real, data }
    }

    pub fn from_complex_rows(rows: &[&[Scalar]]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "from_complex_rows: ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, field: Field::Complex, data }
    }

    pub fn diag_real(d: &[f64]) -> Mat {
        let n = d.len();
        let mut m = Mat::zeros(n, n, Field::Real);
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = re(x);
        }
        m
    }

    pub fn diag(d: &[Scalar], field: Field) -> Mat {
        let n = d.len();
        Mat::from_fn(n, n, field, |i, j| if i == j { d[i] } else { re(0.0) })
    }

    pub fn column_vector(v: &[Scalar], field: Field) -> Mat {
        Mat::from_fn(v.len(), 1, field, |i, _| v[i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn ensure_finite(&self) -> Result<()> {
        for (k, z) in self.data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: k / self.cols.max(1), col: k % self.cols.max(1) });
            }
        }
        Ok(())
    }

    /// Re-tag the field. Converting to real drops imaginary parts.
    pub fn with_field(mut self, field: Field) -> Mat {
        if field == Field::Real {
            for z in &mut self.data {
                z.im = 0.0;
            }
        }
        self.field = field;
        self
    }

    /// True when every imaginary part is below `eps` in magnitude.
    pub fn is_real_valued(&self, eps: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= eps)
    }

    pub fn real_part(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, Field::Real, |i, j| re(self[(i, j)].re))
    }

    pub fn imag_part(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, Field::Real, |i, j| re(self[(i, j)].im))
    }

    pub fn conj(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, self.field, |i, j| self[(i, j)].conj())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, self.field, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, self.field, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Scalar) -> Mat {
        let field = if s.im == 0.0 { self.field } else { Field::Complex };
        Mat { rows: self.rows, cols: self.cols, field, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Mat {
        self.scale(re(s))
    }

    /// `self - mu * I`.
    pub fn shift(&self, mu: Scalar) -> Mat {
        let mut m = self.clone();
        if mu.im != 0.0 {
            m.field = Field::Complex;
        }
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= mu;
        }
        m
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Scalar {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[Scalar]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(self.rows, idx.len(), self.field, |i, j| self[(i, idx[j])])
    }

    pub fn cols_range(&self, start: usize, end: usize) -> Mat {
        Mat::from_fn(self.rows, end - start, self.field, |i, j| self[(i, start + j)])
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
        Mat::from_fn(r1 - r0, c1 - c0, self.field, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Mat) {
        if block.field == Field::Complex {
            self.field = Field::Complex;
        }
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Horizontal concatenation; all parts must share the row count.
    pub fn hstack(parts: &[&Mat], rows: usize) -> Mat {
        let cols = parts.iter().map(|p| p.cols).sum();
        let field = parts.iter().fold(Field::Real, |f, p| f.join(p.field));
        let mut out = Mat::zeros(rows, cols, field);
        let mut c0 = 0;
        for p in parts {
            assert_eq!(p.rows, rows, "hstack: row mismatch");
            out.set_block(0, c0, p);
            c0 += p.cols;
        }
        out
    }

    pub fn vstack(parts: &[&Mat], cols: usize) -> Mat {
        let rows = parts.iter().map(|p| p.rows).sum();
        let field = parts.iter().fold(Field::Real, |f, p| f.join(p.field));
        let mut out = Mat::zeros(rows, cols, field);
        let mut r0 = 0;
        for p in parts {
            assert_eq!(p.cols, cols, "vstack: column mismatch");
            out.set_block(r0, 0, p);
            r0 += p.rows;
        }
        out
    }

    pub fn block_diag(parts: &[&Mat]) -> Mat {
        let n: usize = parts.iter().map(|p| p.rows).sum();
        let m: usize = parts.iter().map(|p| p.cols).sum();
        let field = parts.iter().fold(Field::Real, |f, p| f.join(p.field));
        let mut out = Mat::zeros(n, m, field);
        let (mut r0, mut c0) = (0, 0);
        for p in parts {
            out.set_block(r0, c0, p);
            r0 += p.rows;
            c0 += p.cols;
        }
        out
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols, self.field.join(rhs.field));
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        if out.field == Field::Real {
            for z in &mut out.data {
                z.im = 0.0;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len(), "mul_vec: dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn pow(&self, k: usize) -> Mat {
        let mut out = Mat::identity(self.rows).with_field(self.field);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Mat, eps: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= eps
    }

    /// Real matrix as nested `f64` rows (imaginary parts ignored).
    pub fn to_real_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].re).collect()).collect()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Scalar;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.matmul(rhs)
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            field: self.field.join(rhs.field),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            field: self.field.join(rhs.field),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale_real(-1.0)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    if self.field == Field::Real {
                        format!("{}", z.re)
                    } else {
                        format!("{}{:+}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
