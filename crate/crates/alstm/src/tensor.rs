//! Dense row-major matrices of f64, sized for small recurrent models.

use crate::error::{Error, Result};

/// A dense (rows x cols) matrix. Column vectors are (n x 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Tensor {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn zeros_like(other: &Tensor) -> Tensor {
        Tensor::zeros(other.rows, other.cols)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Tensor {
        Tensor {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Tensor> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "from_vec",
                format!("{}x{} needs {} values, got {}", rows, cols, rows * cols, data.len()),
            ));
        }
        Ok(Tensor { rows, cols, data })
    }

    /// Column vector from a slice.
    pub fn column(values: &[f64]) -> Tensor {
        Tensor {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    /// Matrix-vector product: self (m x n) times x (n x 1).
    pub fn matvec(&self, x: &Tensor) -> Result<Tensor> {
        if x.cols != 1 || x.rows != self.cols {
            return Err(Error::shape(
                "matvec",
                format!("{}x{} times {}x{}", self.rows, self.cols, x.rows, x.cols),
            ));
        }
        let mut out = vec![0.0; self.rows];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            *o = row.iter().zip(&x.data).map(|(a, b)| a * b).sum();
        }
        Ok(Tensor {
            rows: self.rows,
            cols: 1,
            data: out,
        })
    }

    /// Transposed matrix-vector product: selfᵀ (n x m) times v (m x 1).
    pub fn matvec_t(&self, v: &Tensor) -> Result<Tensor> {
        if v.cols != 1 || v.rows != self.rows {
            return Err(Error::shape(
                "matvec_t",
                format!("{}x{} transposed times {}x{}", self.rows, self.cols, v.rows, v.cols),
            ));
        }
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let vr = v.data[r];
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vr;
            }
        }
        Ok(Tensor {
            rows: self.cols,
            cols: 1,
            data: out,
        })
    }

    /// Rank-one update: self += scale * u vᵀ, with u (rows x 1) and v (cols x 1).
    pub fn add_outer(&mut self, u: &Tensor, v: &Tensor, scale: f64) -> Result<()> {
        if u.rows != self.rows || v.rows != self.cols || u.cols != 1 || v.cols != 1 {
            return Err(Error::shape(
                "add_outer",
                format!(
                    "{}x{} += ({}x{})({}x{})ᵀ",
                    self.rows, self.cols, u.rows, u.cols, v.rows, v.cols
                ),
            ));
        }
        for r in 0..self.rows {
            let ur = u.data[r] * scale;
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (o, b) in row.iter_mut().zip(&v.data) {
                *o += ur * b;
            }
        }
        Ok(())
    }

    /// self += scale * other (same shape).
    pub fn add_scaled(&mut self, other: &Tensor, scale: f64) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "add_scaled",
                format!("{:?} += {:?}", self.shape(), other.shape()),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        let mut out = self.clone();
        out.add_scaled(other, 1.0)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        let mut out = self.clone();
        out.add_scaled(other, -1.0)?;
        Ok(out)
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "hadamard",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(Tensor {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|v| v * s)
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Stack two column vectors into one.
    pub fn concat_rows(top: &Tensor, bottom: &Tensor) -> Result<Tensor> {
        if top.cols != 1 || bottom.cols != 1 {
            return Err(Error::shape(
                "concat_rows",
                format!("{:?} over {:?}", top.shape(), bottom.shape()),
            ));
        }
        let mut data = Vec::with_capacity(top.rows + bottom.rows);
        data.extend_from_slice(&top.data);
        data.extend_from_slice(&bottom.data);
        Ok(Tensor {
            rows: data.len(),
            cols: 1,
            data,
        })
    }

    /// Split a column vector at `at` rows into (top, bottom).
    pub fn split_rows(&self, at: usize) -> Result<(Tensor, Tensor)> {
        if self.cols != 1 || at > self.rows {
            return Err(Error::shape(
                "split_rows",
                format!("{:?} at {}", self.shape(), at),
            ));
        }
        Ok((
            Tensor::column(&self.data[..at]),
            Tensor::column(&self.data[at..]),
        ))
    }
}
