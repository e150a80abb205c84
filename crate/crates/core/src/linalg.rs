//! Small dense complex matrices and a column-pivoted Householder QR, which is
//! all the precoders need.

use crate::{Error, Result, C64};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = C64::new(1.0, 0.0);
        }
        out
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        CMatrix { rows, cols, data }
    }

    /// Stacks row vectors; all must share one length.
    pub fn from_rows<'a>(cols: usize, rows: impl IntoIterator<Item = &'a [C64]>) -> Self {
        let mut data = Vec::new();
        let mut n = 0;
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
            n += 1;
        }
        CMatrix { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(l, j)];
                }
            }
        }
        out
    }

    /// `row_i * v` without conjugation (a row channel applied to a precoder).
    pub fn row_dot(&self, i: usize, v: &[C64]) -> C64 {
        dot(self.row(i), v)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Bilinear product `sum_j a_j b_j`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Column-pivoted Householder QR, `A P = Q R`, with `Q` accumulated in full.
pub struct PivotedQr {
    pub q: CMatrix,
    /// Diagonal of `R` in pivot order (magnitudes are non-increasing up to
    /// rounding).
    pub r_diag: Vec<f64>,
    pub perm: Vec<usize>,
}

pub fn pivoted_qr(a: &CMatrix) -> PivotedQr {
    let (n, r) = (a.rows(), a.cols());
    let mut work = a.clone();
    let mut q = CMatrix::identity(n);
    let mut perm: Vec<usize> = (0..r).collect();
    let mut r_diag = Vec::with_capacity(r.min(n));
    let mut col_norms: Vec<f64> = (0..r)
        .map(|j| (0..n).map(|i| work[(i, j)].norm_sqr()).sum())
        .collect();
    let mut v = vec![C64::new(0.0, 0.0); n];

    for step in 0..r.min(n) {
        let (piv, _) = col_norms[step..]
            .iter()
            .enumerate()
            .fold((step, f64::NEG_INFINITY), |acc, (o, &c)| if c > acc.1 { (step + o, c) } else { acc });
        if piv != step {
            for i in 0..n {
                let tmp = work[(i, step)];
                work[(i, step)] = work[(i, piv)];
                work[(i, piv)] = tmp;
            }
            col_norms.swap(step, piv);
            perm.swap(step, piv);
        }

        let x_norm = (step..n).map(|i| work[(i, step)].norm_sqr()).sum::<f64>().sqrt();
        if x_norm == 0.0 {
            r_diag.push(0.0);
            continue;
        }
        let x0 = work[(step, step)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * x_norm;
        for i in 0..n {
            v[i] = if i < step { C64::new(0.0, 0.0) } else { work[(i, step)] };
        }
        v[step] -= alpha;
        let v_norm_sqr: f64 = v[step..].iter().map(|z| z.norm_sqr()).sum();
        if v_norm_sqr > 0.0 {
            let scale = 2.0 / v_norm_sqr;
            // work <- H work for the trailing columns
            for j in step..r {
                let s: C64 = (step..n).map(|i| v[i].conj() * work[(i, j)]).sum::<C64>() * scale;
                for i in step..n {
                    work[(i, j)] -= v[i] * s;
                }
            }
            // q <- q H
            for i in 0..n {
                let s: C64 = (step..n).map(|l| q[(i, l)] * v[l]).sum::<C64>() * scale;
                for l in step..n {
                    q[(i, l)] -= s * v[l].conj();
                }
            }
        }
        r_diag.push(work[(step, step)].norm());
        for j in step + 1..r {
            col_norms[j] = (step + 1..n).map(|i| work[(i, j)].norm_sqr()).sum();
        }
    }
    PivotedQr { q, r_diag, perm }
}

/// Orthonormal basis of `{v : rows * v = 0}` as the columns of an
/// `n x (n - rank)` matrix.
///
/// The numerical rank counts pivots above `|R_11| * max(r, n) * 1e-14`.
pub fn null_space_basis(rows: &CMatrix) -> Result<CMatrix> {
    let n = rows.cols();
    if rows.rows() == 0 {
        return Ok(CMatrix::identity(n));
    }
    let qr = pivoted_qr(&rows.conj_transpose());
    let lead = qr.r_diag.first().copied().unwrap_or(0.0);
    let tol = lead * (rows.rows().max(n) as f64) * 1e-14;
    let rank = qr.r_diag.iter().filter(|&&d| d > tol).count();
    if rank >= n {
        return Err(Error::EmptyNullSpace);
    }
    let mut basis = CMatrix::zeros(n, n - rank);
    for i in 0..n {
        for (c, j) in (rank..n).enumerate() {
            basis[(i, c)] = qr.q[(i, j)];
        }
    }
    Ok(basis)
}
