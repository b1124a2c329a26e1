//! Minimal CSR sparse matrices for the assembled operators.
//!
//! The matrices here are tridiagonal per edge plus vertex-coupling rows, so
//! a full-featured sparse library is not warranted; the solver exploits the
//! structure directly (see `solve`).

use std::io::Write;

use crate::Result;

/// Coordinate-format builder; duplicate entries are summed on conversion.
#[derive(Debug, Clone)]
pub struct Coo {
    pub n: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl Coo {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i as u32, j as u32, v));
    }

    pub fn to_csr(&self) -> Csr {
        let mut entries = self.entries.clone();
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut cur_row = 0usize;
        for &(i, j, v) in &entries {
            let (i, j) = (i as usize, j as usize);
            while cur_row < i {
                cur_row += 1;
                row_ptr[cur_row] = col_idx.len();
            }
            if col_idx.len() > row_ptr[cur_row] && *col_idx.last().unwrap() == j {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                vals.push(v);
            }
        }
        while cur_row < self.n {
            cur_row += 1;
            row_ptr[cur_row] = col_idx.len();
        }
        Csr {
            n: self.n,
            row_ptr,
            col_idx,
            vals,
        }
    }
}

/// Compressed sparse row, square.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    /// `x^T (A y)` without allocating.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let mut row = 0.0;
            for (j, v) in self.row(i) {
                row += v * y[j];
            }
            acc += xi * row;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T|` entry-wise.
    pub fn symmetry_gap(&self) -> f64 {
        let mut gap = 0.0_f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                gap = gap.max((v - self.get(j, i)).abs());
            }
        }
        gap
    }

    /// Entry-wise linear combination `ca * self + cb * b`. The patterns need
    /// not match.
    pub fn linear_combo(&self, ca: f64, b: &Csr, cb: f64) -> Csr {
        assert_eq!(self.n, b.n);
        let mut coo = Coo::new(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                coo.push(i, j, ca * v);
            }
            for (j, v) in b.row(i) {
                coo.push(i, j, cb * v);
            }
        }
        coo.to_csr()
    }

    /// Matrix Market coordinate format: header, dims line, 1-based triplets.
    pub fn write_matrix_market(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coo_accumulates_duplicates() {
        let mut coo = Coo::new(3);
        coo.push(0, 0, 1.0);
        coo.push(0, 0, 2.0);
        coo.push(1, 2, 5.0);
        coo.push(2, 0, -1.0);
        let m = coo.to_csr();
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.get(2, 0), -1.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn matvec_and_symmetry() {
        let mut coo = Coo::new(2);
        coo.push(0, 0, 2.0);
        coo.push(0, 1, 1.0);
        coo.push(1, 0, 1.0);
        coo.push(1, 1, 2.0);
        let m = coo.to_csr();
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![3.0, 3.0]);
        assert_eq!(m.symmetry_gap(), 0.0);
    }

    #[test]
    fn matrix_market_format() {
        let mut coo = Coo::new(2);
        coo.push(0, 1, 1.5);
        let m = coo.to_csr();
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "%%MatrixMarket matrix coordinate real general"
        );
        assert_eq!(lines.next().unwrap(), "2 2 1");
        assert!(lines.next().unwrap().starts_with("1 2 1.5"));
    }
}
