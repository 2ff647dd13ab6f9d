//! Dense matrices over GF(q) and the Gaussian-elimination oracle used as
//! ground truth throughout the test suites.
//!
//! Problem sizes are desk scale, so everything is row-major dense and the
//! elimination uses the first nonzero pivot it finds (any nonzero pivot is
//! exact over a finite field).

use crate::error::{Error, Result};
use crate::field::{digit_reverse, Elem, FieldCtx};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    entries: Vec<Elem>,
    ctx: FieldCtx,
}

impl Mat {
    pub fn zeros(ctx: &FieldCtx, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            entries: vec![Elem::ZERO; rows * cols],
            ctx: ctx.clone(),
        }
    }

    pub fn identity(ctx: &FieldCtx, n: usize) -> Mat {
        let mut m = Mat::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = ctx.one();
        }
        m
    }

    pub fn from_rows(ctx: &FieldCtx, rows: &[Vec<u64>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Mat::zeros(ctx, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = ctx.elem(v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn col(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Submatrix of `row_count` rows starting at `row0`, all columns.
    pub fn row_block(&self, row0: usize, row_count: usize) -> Mat {
        let mut out = Mat::zeros(&self.ctx, row_count, self.cols);
        for i in 0..row_count {
            for j in 0..self.cols {
                out[(i, j)] = self[(row0 + i, j)];
            }
        }
        out
    }

    /// Submatrix of `col_count` columns starting at `col0`, all rows.
    pub fn col_block(&self, col0: usize, col_count: usize) -> Mat {
        let mut out = Mat::zeros(&self.ctx, self.rows, col_count);
        for i in 0..self.rows {
            for j in 0..col_count {
                out[(i, j)] = self[(i, col0 + j)];
            }
        }
        out
    }

    /// Vandermonde matrix: entry `(i, j) = points[j]^i`.
    ///
    /// Square (rows = number of points) on distinct points is invertible.
    pub fn vandermonde(ctx: &FieldCtx, points: &[Elem], rows: usize) -> Result<Mat> {
        check_distinct(points)?;
        assert!(rows >= 1, "vandermonde needs at least one row");
        let mut m = Mat::zeros(ctx, rows, points.len());
        for (j, &pt) in points.iter().enumerate() {
            let mut pw = ctx.one();
            for i in 0..rows {
                m[(i, j)] = pw;
                pw = ctx.mul(pw, pt);
            }
        }
        Ok(m)
    }

    /// DFT matrix of size K = radix^levels with its columns permuted by base-P
    /// digit reversal: column `j` of the result is column `reverse(j)` of the
    /// plain DFT matrix `[beta^(ij)]`.
    pub fn permuted_dft(ctx: &FieldCtx, k: usize, radix: u64, levels: u32) -> Result<Mat> {
        if radix.checked_pow(levels) != Some(k as u64) {
            return Err(Error::BadShape(format!("K = {k} is not {radix}^{levels}")));
        }
        let beta = ctx.root_of_unity(k as u64)?;
        let points: Vec<Elem> = (0..k as u64)
            .map(|j| {
                let jr = digit_reverse(j, radix, levels).expect("j < K");
                ctx.pow(beta, jr)
            })
            .collect();
        Mat::vandermonde(ctx, &points, k)
    }

    /// Cauchy-like matrix `A[k][r] = c_k * d_r / (beta_r - alpha_k)` with
    /// `c_k = u_k^-1 / prod_{t != k}(alpha_k - alpha_t)` and
    /// `d_r = v_r * prod_k (beta_r - alpha_k)`.
    pub fn cauchy_like(
        ctx: &FieldCtx,
        alphas: &[Elem],
        betas: &[Elem],
        u: &[Elem],
        v: &[Elem],
    ) -> Result<Mat> {
        check_grs_params(alphas, betas, u, v)?;
        let kk = alphas.len();
        let rr = betas.len();
        let mut c = Vec::with_capacity(kk);
        for k in 0..kk {
            let mut prod = ctx.one();
            for t in 0..kk {
                if t != k {
                    prod = ctx.mul(prod, ctx.sub(alphas[k], alphas[t]));
                }
            }
            c.push(ctx.div(ctx.inv(u[k])?, prod)?);
        }
        let mut d = Vec::with_capacity(rr);
        for r in 0..rr {
            let mut prod = ctx.one();
            for &alpha in alphas {
                prod = ctx.mul(prod, ctx.sub(betas[r], alpha));
            }
            d.push(ctx.mul(v[r], prod));
        }
        let mut m = Mat::zeros(ctx, kk, rr);
        for k in 0..kk {
            for r in 0..rr {
                let denom = ctx.sub(betas[r], alphas[k]);
                m[(k, r)] = ctx.div(ctx.mul(c[k], d[r]), denom)?;
            }
        }
        Ok(m)
    }

    /// Non-systematic block of a systematic GRS generator matrix, computed the
    /// slow way: `A = (V_alpha * diag(u))^-1 * V_beta * diag(v)`.
    ///
    /// Must agree entrywise with [`Mat::cauchy_like`]; the test suites check
    /// the two routes against each other.
    pub fn systematic_grs(
        ctx: &FieldCtx,
        alphas: &[Elem],
        betas: &[Elem],
        u: &[Elem],
        v: &[Elem],
    ) -> Result<Mat> {
        check_grs_params(alphas, betas, u, v)?;
        let kk = alphas.len();
        let va = Mat::vandermonde(ctx, alphas, kk)?;
        let va_u = va.scale_cols(u);
        let vb = Mat::vandermonde(ctx, betas, kk)?;
        let vb_v = vb.scale_cols(v);
        va_u.inverse()?.matmul(&vb_v)
    }

    /// New matrix with column `j` scaled by `diag[j]`.
    pub fn scale_cols(&self, diag: &[Elem]) -> Mat {
        assert_eq!(diag.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self.ctx.mul(self[(i, j)], diag[j]);
            }
        }
        out
    }

    /// New matrix with row `i` scaled by `diag[i]`.
    pub fn scale_rows(&self, diag: &[Elem]) -> Mat {
        assert_eq!(diag.len(), self.rows);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self.ctx.mul(self[(i, j)], diag[i]);
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Mat) -> Result<Mat> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Mat::zeros(&self.ctx, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = self.ctx.add(out[(i, j)], self.ctx.mul(a, rhs[(k, j)]));
                }
            }
        }
        Ok(out)
    }

    /// Row-vector product `x * A`, the product convention used by every
    /// encoding contract in this crate.
    pub fn matvec(&self, x: &[Elem]) -> Result<Vec<Elem>> {
        if x.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "vector of {} against {}x{}",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![Elem::ZERO; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] = self.ctx.add(out[j], self.ctx.mul(xi, self[(i, j)]));
            }
        }
        Ok(out)
    }

    /// Exact inverse by Gauss-Jordan elimination with nonzero-pivot search.
    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "inverse of {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let ctx = self.ctx.clone();
        let mut a = self.clone();
        let mut inv = Mat::identity(&ctx, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or(Error::Singular)?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let pinv = ctx.inv(a[(col, col)])?;
            for j in 0..n {
                a[(col, j)] = ctx.mul(a[(col, j)], pinv);
                inv[(col, j)] = ctx.mul(inv[(col, j)], pinv);
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)];
                for j in 0..n {
                    let s = ctx.mul(f, a[(col, j)]);
                    a[(r, j)] = ctx.sub(a[(r, j)], s);
                    let s = ctx.mul(f, inv[(col, j)]);
                    inv[(r, j)] = ctx.sub(inv[(r, j)], s);
                }
            }
        }
        Ok(inv)
    }

    /// Solves `x * A = b` for a square nonsingular `A`.
    pub fn solve(&self, b: &[Elem]) -> Result<Vec<Elem>> {
        if b.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "rhs of {} against {}x{}",
                b.len(),
                self.rows,
                self.cols
            )));
        }
        self.inverse()?.matvec(b)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Elem;
    fn index(&self, (i, j): (usize, usize)) -> &Elem {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Elem {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

fn check_distinct(points: &[Elem]) -> Result<()> {
    let mut sorted: Vec<Elem> = points.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePoints);
    }
    Ok(())
}

fn check_grs_params(alphas: &[Elem], betas: &[Elem], u: &[Elem], v: &[Elem]) -> Result<()> {
    let mut all: Vec<Elem> = alphas.to_vec();
    all.extend_from_slice(betas);
    check_distinct(&all)?;
    if let Some(i) = u.iter().position(|e| e.is_zero()) {
        return Err(Error::ZeroScalar(i));
    }
    if let Some(i) = v.iter().position(|e| e.is_zero()) {
        return Err(Error::ZeroScalar(i));
    }
    assert_eq!(u.len(), alphas.len());
    assert_eq!(v.len(), betas.len());
    Ok(())
}
