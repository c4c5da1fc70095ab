//! Small dense matrices with log-scaled accumulation.
//!
//! Everything in this crate runs on matrices of dimension at most
//! [`MAX_DIM`]. Products along long orbits overflow `f64` almost
//! immediately (a period-10^6 word with exponents near log 2 has entries
//! around exp(700000)), so products are carried as a unit-norm matrix plus
//! a separate log scale ([`ScaledMat`]). The factored form is exact up to
//! rounding: no information is discarded, only re-based.
//!
//! Exterior powers are the workhorse for singular-value partial sums:
//! `‖∧^i P‖ = σ_1 ⋯ σ_i` and `ρ(∧^i P) = |λ_d ⋯ λ_{d-i+1}|` hold exactly,
//! which turns "sum of the i largest log singular values / eigenvalue
//! moduli" into a dominant-value computation that survives scaling.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Cap on cocycle (base) dimension; keeps stack temporaries cheap on hot paths.
pub const MAX_DIM: usize = 8;

/// Cap on raw matrix dimension. Exterior powers of d <= 8 matrices live in
/// dimension up to C(8,4) = 70, so `Mat` itself must go beyond `MAX_DIM`.
pub const MAX_MAT_DIM: usize = 128;

const STACK: usize = MAX_DIM * MAX_DIM;

/// Row-major dense square matrix of runtime dimension `d <= MAX_DIM`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    d: usize,
    a: Vec<f64>,
}

impl Mat {
    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1 && d <= MAX_MAT_DIM, "dimension {d} out of range");
        Mat { d, a: vec![0.0; d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.a[i * d + i] = 1.0;
        }
        m
    }

    /// Builds from a row-major slice of length `d*d`.
    pub fn from_row_major(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: entries.len() });
        }
        if d < 1 || d > MAX_MAT_DIM {
            return Err(Error::BadParameter(format!(
                "dimension {d} out of range 1..={MAX_MAT_DIM}"
            )));
        }
        Ok(Mat { d, a: entries.to_vec() })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let d = entries.len();
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.a[i * d + i] = entries[i];
        }
        m
    }

    /// Plane rotation by `theta` acting in coordinates `(p, q)` of R^d.
    pub fn plane_rotation(d: usize, p: usize, q: usize, theta: f64) -> Self {
        assert!(p < d && q < d && p != q);
        let (s, c) = theta.sin_cos();
        let mut m = Mat::identity(d);
        m.a[p * d + p] = c;
        m.a[q * d + q] = c;
        m.a[p * d + q] = -s;
        m.a[q * d + p] = s;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.d + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.a[r * self.d + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// `self * rhs`, allocating.
    pub fn mul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.d);
        mul_into(self, rhs, &mut out);
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { d: self.d, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        Mat {
            d: self.d,
            a: self.a.iter().zip(&rhs.a).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn transpose(&self) -> Mat {
        let d = self.d;
        let mut out = Mat::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.a[c * d + r] = self.a[r * d + c];
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d];
        for r in 0..d {
            let mut acc = 0.0;
            for c in 0..d {
                acc += self.a[r * d + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, &self.a)
    }

    pub fn from_na(m: &DMatrix<f64>) -> Mat {
        assert_eq!(m.nrows(), m.ncols());
        let d = m.nrows();
        let mut out = Mat::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.a[r * d + c] = m[(r, c)];
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        det_in_place(&mut self.a.clone(), self.d)
    }

    pub fn inverse(&self) -> Result<Mat> {
        let lu = self.to_na().lu();
        match lu.try_inverse() {
            Some(inv) => Ok(Mat::from_na(&inv)),
            None => Err(Error::SingularGenerator { symbol: usize::MAX, det: self.determinant() }),
        }
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        self.to_na()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(0.0_f64, |m, s| m.max(*s))
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.to_na().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Eigenvalues as complex numbers (unordered as produced by the solver).
    pub fn complex_eigenvalues(&self) -> Vec<Complex64> {
        self.to_na().complex_eigenvalues().iter().copied().collect()
    }

    /// Eigenvalue moduli in ascending order.
    pub fn eigen_moduli(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        m
    }

    pub fn spectral_radius(&self) -> f64 {
        self.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `out = a * b`; stack temporary for d <= MAX_DIM, heap beyond (cold paths).
#[inline]
pub fn mul_into(a: &Mat, b: &Mat, out: &mut Mat) {
    let d = a.d;
    debug_assert_eq!(b.d, d);
    debug_assert_eq!(out.d, d);
    if d <= MAX_DIM {
        let mut tmp = [0.0_f64; STACK];
        mul_kernel(&a.a, &b.a, &mut tmp[..d * d], d);
        out.a.copy_from_slice(&tmp[..d * d]);
    } else {
        let mut tmp = vec![0.0_f64; d * d];
        mul_kernel(&a.a, &b.a, &mut tmp, d);
        out.a.copy_from_slice(&tmp);
    }
}

#[inline]
fn mul_kernel(a: &[f64], b: &[f64], out: &mut [f64], d: usize) {
    for r in 0..d {
        for c in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += a[r * d + k] * b[k * d + c];
            }
            out[r * d + c] = acc;
        }
    }
}

fn det_in_place(a: &mut [f64], d: usize) -> f64 {
    // Plain Gaussian elimination with partial pivoting; d <= 8.
    let mut det = 1.0;
    for col in 0..d {
        let mut piv = col;
        let mut best = a[col * d + col].abs();
        for r in col + 1..d {
            let v = a[r * d + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..d {
                a.swap(col * d + c, piv * d + c);
            }
            det = -det;
        }
        let p = a[col * d + col];
        det *= p;
        for r in col + 1..d {
            let f = a[r * d + col] / p;
            for c in col..d {
                a[r * d + c] -= f * a[col * d + c];
            }
        }
    }
    det
}

/// Binomial coefficient, small arguments only.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut num = 1usize;
    for j in 0..k.min(n - k) {
        num = num * (n - j) / (j + 1);
    }
    num
}

/// Lexicographically ordered k-subsets of {0, .., n-1}.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// i-th exterior power: the C(d,i) x C(d,i) matrix of i x i minors,
/// rows and columns indexed by lexicographic i-subsets.
pub fn exterior_power(m: &Mat, i: usize) -> Mat {
    let d = m.dim();
    assert!(d <= MAX_DIM, "exterior powers only defined for base dimension <= {MAX_DIM}");
    assert!(i >= 1 && i <= d);
    let idx = subsets(d, i);
    let n = idx.len();
    assert!(n <= MAX_MAT_DIM, "exterior dimension C({d},{i}) = {n} too large");
    let mut out = Mat::zeros(n);
    let mut buf = [0.0_f64; STACK];
    for (r, rows) in idx.iter().enumerate() {
        for (c, cols) in idx.iter().enumerate() {
            for (bi, &rr) in rows.iter().enumerate() {
                for (bj, &cc) in cols.iter().enumerate() {
                    buf[bi * i + bj] = m.get(rr, cc);
                }
            }
            out.set(r, c, det_in_place(&mut buf[..i * i], i));
        }
    }
    out
}

/// Matrix carried as `exp(log_scale) * m` with `m` kept near unit Frobenius norm.
#[derive(Debug, Clone)]
pub struct ScaledMat {
    pub log_scale: f64,
    pub m: Mat,
}

impl ScaledMat {
    pub fn identity(d: usize) -> Self {
        ScaledMat { log_scale: 0.0, m: Mat::identity(d) }
    }

    pub fn from_mat(m: Mat) -> Self {
        let mut s = ScaledMat { log_scale: 0.0, m };
        s.renormalize();
        s
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// Rebase so the stored matrix has Frobenius norm 1.
    pub fn renormalize(&mut self) {
        let n = self.m.frobenius();
        if n == 0.0 || !n.is_finite() {
            return; // degenerate; caller checks via is_degenerate()
        }
        let inv = 1.0 / n;
        for v in self.m.a.iter_mut() {
            *v *= inv;
        }
        self.log_scale += n.ln();
    }

    pub fn is_degenerate(&self) -> bool {
        let n = self.m.frobenius();
        n == 0.0 || !n.is_finite() || !self.log_scale.is_finite()
    }

    /// Left-multiplies by plain `g`: `self <- g * self`.
    pub fn apply_left(&mut self, g: &Mat, scratch: &mut Mat) {
        mul_into(g, &self.m, scratch);
        std::mem::swap(&mut self.m, scratch);
        self.renormalize();
    }

    /// `lhs * rhs` in factored form.
    pub fn mul(&self, rhs: &ScaledMat) -> ScaledMat {
        let mut out = ScaledMat {
            log_scale: self.log_scale + rhs.log_scale,
            m: self.m.mul(&rhs.m),
        };
        out.renormalize();
        out
    }

    /// k-th power by binary exponentiation.
    pub fn pow(&self, k: u64) -> ScaledMat {
        let d = self.dim();
        let mut result = ScaledMat::identity(d);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        result
    }

    /// log of the largest singular value of the represented matrix.
    pub fn log_op_norm(&self) -> f64 {
        self.log_scale + self.m.op_norm().ln()
    }

    /// log of the spectral radius of the represented matrix.
    pub fn log_spectral_radius(&self) -> Result<f64> {
        let rho = self.m.spectral_radius();
        if rho <= 0.0 || !rho.is_finite() {
            return Err(Error::DegenerateSpectrum {
                detail: format!("normalized spectral radius {rho:.3e}"),
            });
        }
        Ok(self.log_scale + rho.ln())
    }
}

/// Null vector of `(b - lambda I)` by complex Gaussian elimination.
///
/// Deterministic and adequate for the well-separated eigenvalues the
/// domination machinery feeds it; `b` must be square with `d <= MAX_DIM`.
pub fn complex_kernel_vector(b: &Mat, lambda: Complex64) -> Vec<Complex64> {
    let d = b.dim();
    let mut a = vec![Complex64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            let mut v = Complex64::new(b.get(r, c), 0.0);
            if r == c {
                v -= lambda;
            }
            a[r * d + c] = v;
        }
    }
    // Forward elimination with partial pivoting; track pivot columns.
    let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; d];
    let mut row = 0usize;
    for col in 0..d {
        let mut piv = row;
        let mut best = 0.0;
        for r in row..d {
            let v = a[r * d + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-13 {
            continue; // free column
        }
        if piv != row {
            for c in 0..d {
                a.swap(row * d + c, piv * d + c);
            }
        }
        let p = a[row * d + col];
        for r in row + 1..d {
            let f = a[r * d + col] / p;
            if f.norm() != 0.0 {
                for c in col..d {
                    let sub = f * a[row * d + c];
                    a[r * d + c] -= sub;
                }
            }
        }
        pivot_row_of_col[col] = Some(row);
        row += 1;
        if row == d {
            break;
        }
    }
    // Pick the first free column (guaranteed: lambda is an eigenvalue).
    let free = (0..d).find(|&c| pivot_row_of_col[c].is_none()).unwrap_or(d - 1);
    let mut x = vec![Complex64::new(0.0, 0.0); d];
    x[free] = Complex64::new(1.0, 0.0);
    // Back-substitute pivot columns in reverse.
    for col in (0..d).rev() {
        if let Some(r) = pivot_row_of_col[col] {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in col + 1..d {
                acc += a[r * d + c] * x[c];
            }
            x[col] = -acc / a[r * d + col];
        }
    }
    // Normalize deterministically: unit norm, largest-modulus entry made real positive.
    let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        let mut kmax = 0;
        let mut best = 0.0;
        for (k, z) in x.iter().enumerate() {
            if z.norm() > best {
                best = z.norm();
                kmax = k;
            }
        }
        let phase = x[kmax] / x[kmax].norm();
        for z in x.iter_mut() {
            *z = *z / (phase * norm);
        }
    }
    x
}

/// Near-null right singular vectors of `(b - lambda I)`: the `count`
/// directions least moved, which for an eigenvalue `lambda` of multiplicity
/// `count` span the (numerical) kernel. Robust against the tiny eigenvalue
/// perturbations a dense eigensolver introduces.
pub fn kernel_vectors(b: &Mat, lambda: Complex64, count: usize) -> Vec<Vec<Complex64>> {
    let d = b.dim();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let mut v = Complex64::new(b.get(r, c), 0.0);
            if r == c {
                v -= lambda;
            }
            m[(r, c)] = v;
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("svd requested v_t");
    // The solver does not sort singular values: pick the rows of V^T
    // belonging to the smallest ones explicitly.
    let rows = vt.nrows();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a].partial_cmp(&svd.singular_values[b]).expect("finite singular values")
    });
    let mut out = Vec::with_capacity(count);
    for &row in order.iter().take(count.min(rows)) {
        out.push((0..d).map(|c| vt[(row, c)].conj()).collect());
    }
    out
}

/// Orthonormal basis for the span of `cols`, rank-aware: directions whose
/// singular value falls below `rel_tol` times the largest are dropped.
pub fn orthonormal_span(d: usize, cols: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    if cols.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(d, cols.len(), |r, c| cols[c][r]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("svd requested u");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, s| a.max(*s));
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > rel_tol * smax && *s > 0.0 {
            out.push((0..d).map(|r| u[(r, k)]).collect());
        }
    }
    out
}

/// Orthonormal basis (columns) for the span of the given columns.
pub fn orthonormalize(d: usize, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = cols.len();
    if k == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(d, k, |r, c| cols[c][r]);
    let qr = m.qr();
    let q = qr.q();
    (0..k.min(d)).map(|c| (0..d).map(|r| q[(r, c)]).collect()).collect()
}

/// Spectral norm of `m` restricted to the span of orthonormal columns `basis`.
pub fn restricted_norm(m: &Mat, basis: &[Vec<f64>]) -> f64 {
    let d = m.dim();
    let k = basis.len();
    if k == 0 {
        return 0.0;
    }
    let q = DMatrix::from_fn(d, k, |r, c| basis[c][r]);
    let prod = m.to_na() * q;
    prod.svd(false, false).singular_values.iter().fold(0.0_f64, |a, s| a.max(*s))
}

/// Smallest singular value of `m` viewed as a map from the span of the
/// orthonormal `from` basis to the span of the orthonormal `to` basis (the
/// co-norm of the restriction). Compressing to the arrival coordinates,
/// `Q_to^T m Q_from`, keeps the value well conditioned even when directions
/// outside the spans dominate `m` or its inverse.
pub fn restricted_conorm(m: &Mat, from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    let d = m.dim();
    let k = from.len();
    if k == 0 || to.len() != k {
        return 0.0;
    }
    let qf = DMatrix::from_fn(d, k, |r, c| from[c][r]);
    let qt = DMatrix::from_fn(d, k, |r, c| to[c][r]);
    let r = qt.transpose() * m.to_na() * qf;
    r.svd(false, false).singular_values.iter().fold(f64::INFINITY, |a, s| a.min(*s))
}

/// Largest principal angle distance between two subspaces given by
/// orthonormal column bases: `‖ P_a - P_b ‖` via singular values.
pub fn subspace_gap(d: usize, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let pa = projector(d, a);
    let pb = projector(d, b);
    pa.sub(&pb).op_norm()
}

fn projector(d: usize, basis: &[Vec<f64>]) -> Mat {
    let k = basis.len();
    let q = DMatrix::from_fn(d, k, |r, c| basis[c][r]);
    let p = &q * q.transpose();
    Mat::from_na(&p)
}

/// Applies `m` to each basis vector and re-orthonormalizes.
pub fn push_basis(m: &Mat, basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let pushed: Vec<Vec<f64>> = basis.iter().map(|v| m.apply(v)).collect();
    orthonormalize(m.dim(), &pushed)
}

/// Solves the small least-squares-free linear system `m x = rhs` (cold path).
pub fn solve(m: &Mat, rhs: &[f64]) -> Option<Vec<f64>> {
    let lu = m.to_na().lu();
    lu.solve(&DVector::from_column_slice(rhs)).map(|v| v.iter().copied().collect())
}
