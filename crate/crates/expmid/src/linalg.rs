//! Dense complex linear algebra: matrices, vectors, products, commutators,
//! matrix exponentials, and norms.
//!
//! Matrices are square, row-major, with finite double-precision complex
//! entries; these invariants are checked at construction. Binary operators
//! (`+`, `-`, `*`) panic on dimension mismatch and are meant for internal
//! use where dimensions are structurally equal; the checked entry points
//! (`try_mul`, [`commutator`]) report mismatches as [`Error::Usage`].

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{C64, Error, Result};

/// Scaled 1-norm threshold for the degree-13 Padé approximant of the
/// exponential (Higham's θ₁₃).
const PADE13_THETA: f64 = 5.371920351148152;

/// Truncation for the Taylor action: stop once the appended term falls
/// below this fraction of the accumulated sum.
const TAYLOR_ACTION_CUTOFF: f64 = 1e-16;

/// Dense square complex matrix, row-major semantics: `entry(i, j)` is row
/// `i`, column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Array2<C64>,
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Array1<C64>,
}

impl Matrix {
    /// Wrap a square `ndarray` array, validating squareness, `dim >= 1`,
    /// and entry finiteness.
    pub fn new(data: Array2<C64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(Error::usage(format!("matrix must be square, got {r}x{c}")));
        }
        if r == 0 {
            return Err(Error::usage("matrix dimension must be at least 1"));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::usage("matrix entries must be finite"));
        }
        Ok(Matrix { data })
    }

    /// Build from an entry function.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        Matrix::new(Array2::from_shape_fn((dim, dim), |(i, j)| f(i, j)))
    }

    /// Assembly-path constructor that skips the finiteness scan; callers
    /// guarantee squareness and rely on downstream finiteness checks.
    pub(crate) fn from_array_unchecked(data: Array2<C64>) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        Matrix { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Matrix {
            data: Array2::zeros((dim.max(1), dim.max(1))),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Matrix {
            data: Array2::eye(dim.max(1)),
        }
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::usage("diagonal needs at least one entry"));
        }
        let dim = entries.len();
        Matrix::from_fn(dim, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let n = self.dim();
        Matrix {
            data: Array2::from_shape_fn((n, n), |(i, j)| self.data[(j, i)].conj()),
        }
    }

    pub fn scale(&self, z: C64) -> Matrix {
        Matrix {
            data: self.data.mapv(|w| w * z),
        }
    }

    pub fn scale_re(&self, s: f64) -> Matrix {
        self.scale(C64::new(s, 0.0))
    }

    /// Checked product; dimension mismatch is a usage error.
    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim() != other.dim() {
            return Err(Error::usage(format!(
                "matrix product dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self * other)
    }

    /// Matrix-vector product.
    pub fn mat_vec(&self, x: &Vector) -> Result<Vector> {
        if self.dim() != x.dim() {
            return Err(Error::usage(format!(
                "matrix-vector dimension mismatch: {} vs {}",
                self.dim(),
                x.dim()
            )));
        }
        let n = self.dim();
        let xs = x.data.as_slice().expect("vector storage is contiguous");
        let a = self.data.as_slice().expect("row-major storage");
        let mut out = Vec::with_capacity(n);
        for row in a.chunks(n) {
            let mut re = 0.0f64;
            let mut im = 0.0f64;
            for (a, b) in row.iter().zip(xs) {
                re += a.re * b.re - a.im * b.im;
                im += a.re * b.im + a.im * b.re;
            }
            out.push(C64::new(re, im));
        }
        Ok(Vector {
            data: Array1::from_vec(out),
        })
    }

    /// Maximum column sum of entry moduli.
    pub fn norm_1(&self) -> f64 {
        let mut sums = vec![0.0f64; self.dim()];
        for row in self.data.rows() {
            let rs = row.as_slice().expect("row-major storage");
            for (s, z) in sums.iter_mut().zip(rs) {
                *s += z.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Cheap upper bound on the 1-norm (within sqrt(2)): column sums of
    /// `|re| + |im|`. Used for stage counts and guard pre-screening where
    /// a conservative overestimate is acceptable.
    pub(crate) fn norm_1_upper(&self) -> f64 {
        let mut sums = vec![0.0f64; self.dim()];
        for row in self.data.rows() {
            let rs = row.as_slice().expect("row-major storage");
            for (s, z) in sums.iter_mut().zip(rs) {
                *s += z.re.abs() + z.im.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value) by power iteration on MᴴM.
    ///
    /// Deterministic: fixed internal start vector, up to three fixed
    /// restarts on stagnation, tolerance 1e-10 on the Rayleigh-quotient
    /// change, capped at 5000 iterations per attempt. The Rayleigh
    /// quotient increases monotonically toward the top singular value, so
    /// when every attempt stagnates (clustered leading singular values)
    /// the largest estimate seen is returned; stagnation happens exactly
    /// when the cluster width — and hence the estimate's error — is small.
    pub fn operator_norm(&self) -> Result<f64> {
        if !self.is_finite() {
            return Err(Error::usage("operator_norm: non-finite entries"));
        }
        let n = self.dim();
        let fro = self.norm_frobenius();
        if fro == 0.0 {
            return Ok(0.0);
        }
        // Work with M / ||M||_F to keep the squared iteration well scaled.
        let m = self.scale_re(1.0 / fro);
        let mh = m.adjoint();

        let mut best = 0.0f64;
        for attempt in 0u64..4 {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6f70_5f6e_6f72_6d ^ attempt);
            let mut v: Array1<C64> = Array1::from_shape_fn(n, |_| {
                C64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0)
            });
            let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.mapv_inplace(|z| z / nrm);

            let mut lambda = 0.0f64;
            let mut converged = false;
            for _ in 0..5000 {
                let w = mh.data.dot(&m.data.dot(&v));
                let new_lambda = w
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| (a * b.conj()).re)
                    .sum::<f64>();
                if !new_lambda.is_finite() {
                    return Err(Error::numerical(
                        "operator_norm",
                        "power iteration produced a non-finite Rayleigh quotient",
                    ));
                }
                let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if wn == 0.0 {
                    // v happened to lie in the kernel; restart.
                    break;
                }
                v = w.mapv(|z| z / wn);
                let done = (new_lambda - lambda).abs() <= 1e-10 * new_lambda.max(1e-300);
                lambda = new_lambda;
                if done {
                    converged = true;
                    break;
                }
            }
            best = best.max(lambda);
            if converged {
                break;
            }
        }
        if best <= 0.0 {
            return Err(Error::numerical(
                "operator_norm",
                "power iteration failed to find a positive Rayleigh quotient",
            ));
        }
        Ok(best.sqrt() * fro)
    }

    /// Matrix exponential by scaling-and-squaring with a degree-13 Padé
    /// approximant; the input is scaled so its 1-norm falls below the
    /// standard degree-13 threshold.
    pub fn expm(&self) -> Result<Matrix> {
        if !self.is_finite() {
            return Err(Error::usage("expm: non-finite entries"));
        }
        if self.dim() == 1 {
            return Matrix::diagonal(&[self.data[(0, 0)].exp()]);
        }
        let norm = self.norm_1();
        if norm > 1e15 {
            return Err(Error::numerical(
                "expm",
                format!("1-norm {norm:.3e} too large to scale safely"),
            ));
        }
        let s = if norm > PADE13_THETA {
            (norm / PADE13_THETA).log2().ceil() as u32
        } else {
            0
        };
        let a = self.scale_re(1.0 / 2f64.powi(s as i32));
        let mut r = pade13(&a)?;
        for _ in 0..s {
            r = &r * &r;
        }
        if !r.is_finite() {
            return Err(Error::numerical("expm", "overflow during squaring"));
        }
        Ok(r)
    }

    /// Action of the matrix exponential on a vector, `e^M x`, without
    /// forming `e^M` densely: the matrix is split into `s` stages and each
    /// stage applies a truncated Taylor series to the running vector.
    pub fn expm_action(&self, x: &Vector) -> Result<Vector> {
        if !self.is_finite() {
            return Err(Error::usage("expm_action: non-finite entries"));
        }
        if self.dim() != x.dim() {
            return Err(Error::usage(format!(
                "expm_action dimension mismatch: {} vs {}",
                self.dim(),
                x.dim()
            )));
        }
        let norm = self.norm_1();
        if norm > 1e15 {
            return Err(Error::numerical(
                "expm_action",
                format!("1-norm {norm:.3e} too large to scale safely"),
            ));
        }
        let mut apply = |u: &Vector| self.mat_vec(u);
        scaled_taylor_action(&mut apply, norm, x)
    }
}

/// Shared engine behind exponential actions: `apply` realizes `u -> M u`
/// for some operator `M` with `||M||_1 <= norm1_upper`; the operator is
/// split into stages of 1-norm at most ~3 and each stage runs the Taylor
/// series on the vector, truncating once the appended term drops below
/// 1e-16 of the accumulated sum.
pub(crate) fn scaled_taylor_action(
    apply: &mut dyn FnMut(&Vector) -> Result<Vector>,
    norm1_upper: f64,
    x: &Vector,
) -> Result<Vector> {
    if !norm1_upper.is_finite() {
        return Err(Error::numerical(
            "expm_action",
            "non-finite norm bound for the exponential action",
        ));
    }
    let stages = (norm1_upper / 3.0).ceil().max(1.0) as usize;
    let mut y = x.clone();
    for _ in 0..stages {
        let mut acc = y.clone();
        let mut term = y;
        let mut converged = false;
        for k in 1..200usize {
            term = apply(&term)?.scale_re(1.0 / (stages as f64 * k as f64));
            acc = &acc + &term;
            if term.norm_2() <= TAYLOR_ACTION_CUTOFF * acc.norm_2() {
                converged = true;
                break;
            }
        }
        if !converged && acc.norm_2() > 0.0 {
            return Err(Error::numerical(
                "expm_action",
                "Taylor series did not truncate within 200 terms",
            ));
        }
        y = acc;
    }
    if !y.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::numerical("expm_action", "non-finite result"));
    }
    Ok(y)
}

/// Commutator `uv - vu`; dimension mismatch is a usage error.
pub fn commutator(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    if u.dim() != v.dim() {
        return Err(Error::usage(format!(
            "commutator dimension mismatch: {} vs {}",
            u.dim(),
            v.dim()
        )));
    }
    Ok(&(u * v) - &(v * u))
}

impl Vector {
    pub fn new(data: Array1<C64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::usage("vector dimension must be at least 1"));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::usage("vector entries must be finite"));
        }
        Ok(Vector { data })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize) -> C64) -> Result<Self> {
        Vector::new(Array1::from_shape_fn(dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            data: Array1::zeros(dim.max(1)),
        }
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::usage(format!("basis index {k} out of range for dim {dim}")));
        }
        Vector::from_fn(dim, |i| {
            if i == k {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn entry(&self, i: usize) -> C64 {
        self.data[i]
    }

    pub fn as_array(&self) -> &Array1<C64> {
        &self.data
    }

    pub fn norm_2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, z: C64) -> Vector {
        Vector {
            data: self.data.mapv(|w| w * z),
        }
    }

    pub fn scale_re(&self, s: f64) -> Vector {
        self.scale(C64::new(s, 0.0))
    }

    pub fn normalized(&self) -> Result<Vector> {
        let n = self.norm_2();
        if n == 0.0 {
            return Err(Error::usage("cannot normalize the zero vector"));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:tt, $ty:ident) => {
        impl std::ops::$trait<&$ty> for &$ty {
            type Output = $ty;
            fn $method(self, rhs: &$ty) -> $ty {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                $ty {
                    data: &self.data $op &rhs.data,
                }
            }
        }
    };
}

impl_binop!(Add, add, +, Matrix);
impl_binop!(Sub, sub, -, Matrix);
impl_binop!(Add, add, +, Vector);
impl_binop!(Sub, sub, -, Vector);

impl std::ops::Mul<&Matrix> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Matrix {
            data: self.data.dot(&rhs.data),
        }
    }
}

/// Degree-13 diagonal Padé approximant of `e^a` for `||a||_1` below the
/// scaling threshold.
fn pade13(a: &Matrix) -> Result<Matrix> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.dim();
    let eye = Matrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let w1 = &(&a6.scale_re(B[13]) + &a4.scale_re(B[11])) + &a2.scale_re(B[9]);
    let w2 = &(&(&(&a6 * &w1) + &a6.scale_re(B[7])) + &a4.scale_re(B[5]))
        + &(&a2.scale_re(B[3]) + &eye.scale_re(B[1]));
    let u = a * &w2;

    let z1 = &(&a6.scale_re(B[12]) + &a4.scale_re(B[10])) + &a2.scale_re(B[8]);
    let v = &(&(&(&a6 * &z1) + &a6.scale_re(B[6])) + &a4.scale_re(B[4]))
        + &(&a2.scale_re(B[2]) + &eye.scale_re(B[0]));

    // exp(a) ~ (v - u)^{-1} (v + u)
    solve(&(&v - &u), &(&v + &u))
}

/// Solve `a X = b` by LU decomposition with partial pivoting.
fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.dim();
    let mut lu = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if piv_abs < 1e-300 {
            return Err(Error::numerical("lu_solve", "singular Padé denominator"));
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            perm.swap(col, piv);
        }
        let d = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / d;
            lu[(r, col)] = f;
            for j in col + 1..n {
                let s = lu[(col, j)];
                lu[(r, j)] -= f * s;
            }
        }
    }

    let mut x = Array2::<C64>::zeros((n, n));
    for (dst, &src) in perm.iter().enumerate() {
        for j in 0..n {
            x[(dst, j)] = b.data[(src, j)];
        }
    }
    // Forward substitution (unit lower triangle).
    for col in 0..n {
        for r in col + 1..n {
            let f = lu[(r, col)];
            for j in 0..n {
                let s = x[(col, j)];
                x[(r, j)] -= f * s;
            }
        }
    }
    // Back substitution.
    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for j in 0..n {
            x[(col, j)] /= d;
        }
        for r in 0..col {
            let f = lu[(r, col)];
            for j in 0..n {
                let s = x[(col, j)];
                x[(r, j)] -= f * s;
            }
        }
    }
    Matrix::new(x)
}

/// Deterministic seeded matrix with entries uniform in `[-1, 1)` on both
/// components. `stream` keeps draws for different roles independent.
pub fn seeded_matrix(dim: usize, seed: u64, stream: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Matrix {
        data: Array2::from_shape_fn((dim, dim), |_| {
            C64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0)
        }),
    }
}

/// Deterministic seeded vector with entries uniform in `[-1, 1)`.
pub fn seeded_vector(dim: usize, seed: u64, stream: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Vector {
        data: Array1::from_shape_fn(dim, |_| {
            C64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0)
        }),
    }
}

/// Seeded skew-Hermitian matrix, `(G - Gᴴ)/2`.
pub fn seeded_skew_hermitian(dim: usize, seed: u64, stream: u64) -> Matrix {
    let g = seeded_matrix(dim, seed, stream);
    (&g - &g.adjoint()).scale_re(0.5)
}

/// Seeded Hermitian matrix scaled to unit spectral norm.
pub fn seeded_hermitian_unit(dim: usize, seed: u64, stream: u64) -> Matrix {
    let g = seeded_matrix(dim, seed, stream);
    let h = (&g + &g.adjoint()).scale_re(0.5);
    let norm = h.operator_norm().expect("norm of seeded Hermitian matrix");
    h.scale_re(1.0 / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn mat2(e: [[C64; 2]; 2]) -> Matrix {
        Matrix::from_fn(2, |i, j| e[i][j]).unwrap()
    }

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        let n = a.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (a.entry(i, j) - b.entry(i, j)).norm())
            .fold(0.0, f64::max)
    }

    /// Independent product oracle: naive triple loop.
    fn matmul_oracle(a: &Matrix, b: &Matrix) -> Matrix {
        let n = a.dim();
        Matrix::from_fn(n, |i, j| {
            (0..n).map(|k| a.entry(i, k) * b.entry(k, j)).sum()
        })
        .unwrap()
    }

    #[test]
    fn matmul_identity() {
        let m = seeded_matrix(5, 11, 0);
        let id = Matrix::identity(5);
        assert_eq!(id.try_mul(&m).unwrap(), m);
    }

    #[test]
    fn matmul_hand_computed_2x2() {
        // [[0,1],[1,0]] * [[1,0],[0,-1]] = [[0,-1],[1,0]]
        let a = mat2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]);
        let b = mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]);
        let expect = mat2([[c(0., 0.), c(-1., 0.)], [c(1., 0.), c(0., 0.)]]);
        assert_eq!(a.try_mul(&b).unwrap(), expect);
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let a = seeded_matrix(4, 42, 0);
        let b = seeded_matrix(4, 42, 1);
        let got = a.try_mul(&b).unwrap();
        let want = matmul_oracle(&a, &b);
        let scale = want.norm_frobenius();
        assert!(max_abs_diff(&got, &want) <= 1e-14 * scale);
    }

    #[test]
    fn matmul_dimension_mismatch_is_usage_error() {
        let a = seeded_matrix(3, 1, 0);
        let b = seeded_matrix(4, 1, 0);
        match a.try_mul(&b) {
            Err(Error::Usage(_)) => {}
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn commutator_of_diagonals_is_zero() {
        let d1 = Matrix::diagonal(&[c(1., 2.), c(-3., 0.5)]).unwrap();
        let d2 = Matrix::diagonal(&[c(0., 1.), c(4., -1.)]).unwrap();
        let k = commutator(&d1, &d2).unwrap();
        assert!(k.norm_frobenius() == 0.0);
    }

    #[test]
    fn commutator_hand_computed_2x2() {
        let u = mat2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]);
        let v = mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]);
        let expect = mat2([[c(0., 0.), c(-2., 0.)], [c(2., 0.), c(0., 0.)]]);
        assert_eq!(commutator(&u, &v).unwrap(), expect);
    }

    #[test]
    fn self_commutator_vanishes() {
        let m = seeded_matrix(6, 7, 3);
        let k = commutator(&m, &m).unwrap();
        assert_eq!(k.norm_frobenius(), 0.0);
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = Matrix::zeros(4);
        let e = z.expm().unwrap();
        assert!(max_abs_diff(&e, &Matrix::identity(4)) <= 1e-15);
    }

    #[test]
    fn expm_of_diagonal() {
        let lams = [c(0.3, -1.2), c(-2.0, 0.7), c(0.0, 3.0)];
        let d = Matrix::diagonal(&lams).unwrap();
        let e = d.expm().unwrap();
        for (i, lam) in lams.iter().enumerate() {
            assert!((e.entry(i, i) - lam.exp()).norm() <= 1e-14 * lam.exp().norm());
        }
        assert!((e.entry(0, 1)).norm() <= 1e-15);
    }

    #[test]
    fn expm_of_nilpotent_terminates_series() {
        let m = mat2([[c(0., 0.), c(1., 0.)], [c(0., 0.), c(0., 0.)]]);
        let e = m.expm().unwrap();
        let expect = mat2([[c(1., 0.), c(1., 0.)], [c(0., 0.), c(1., 0.)]]);
        assert!(max_abs_diff(&e, &expect) <= 1e-15);
    }

    #[test]
    fn expm_rotation_matches_eigendecomposition_closed_form() {
        // i*theta*[[0,-i],[i,0]] = [[0,theta],[-theta,0]]; exponential is the
        // plane rotation [[cos,sin],[-sin,cos]] (closed form via the
        // eigenpairs (±i*theta, (1, ±i)/sqrt(2))).
        for &theta in &[0.3, 1.0, 2.5, 10.0] {
            let m = mat2([[c(0., 0.), c(theta, 0.)], [c(-theta, 0.), c(0., 0.)]]);
            let e = m.expm().unwrap();
            let expect = mat2([
                [c(theta.cos(), 0.), c(theta.sin(), 0.)],
                [c(-theta.sin(), 0.), c(theta.cos(), 0.)],
            ]);
            assert!(max_abs_diff(&e, &expect) <= 1e-13, "theta={theta}");
        }
    }

    #[test]
    fn expm_additivity_on_commuting_pair() {
        // Polynomials in a single matrix commute.
        let m = seeded_matrix(4, 3, 0).scale_re(0.6);
        let m1 = &m + &(&m * &m).scale_re(0.2);
        let m2 = &m.scale_re(-0.4) + &(&(&m * &m) * &m).scale_re(0.1);
        assert!(commutator(&m1, &m2).unwrap().norm_frobenius() <= 1e-13);
        let lhs = m1.expm().unwrap().try_mul(&m2.expm().unwrap()).unwrap();
        let rhs = (&m1 + &m2).expm().unwrap();
        assert!(max_abs_diff(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn expm_of_skew_hermitian_is_unitary() {
        let m = seeded_skew_hermitian(6, 19, 0).scale_re(3.0);
        let e = m.expm().unwrap();
        let resid = &e.adjoint().try_mul(&e).unwrap() - &Matrix::identity(6);
        assert!(resid.operator_norm().unwrap() <= 1e-10);
    }

    #[test]
    fn expm_large_norm_within_contract() {
        // ||m|| near 100: backward accuracy target 1e-12 relative.
        let m = seeded_skew_hermitian(5, 23, 0).scale_re(60.0);
        assert!(m.norm_1() <= 100.0 * 2.0);
        let e = m.expm().unwrap();
        // unitary => residual directly measures the error
        let resid = &e.adjoint().try_mul(&e).unwrap() - &Matrix::identity(5);
        assert!(resid.operator_norm().unwrap() <= 1e-11);
    }

    #[test]
    fn expm_rejects_nonfinite() {
        let mut a = Array2::<C64>::zeros((2, 2));
        a[(0, 0)] = c(f64::NAN, 0.0);
        assert!(Matrix::new(a).is_err());
    }

    #[test]
    fn expm_action_of_zero_matrix() {
        let z = Matrix::zeros(5);
        let x = seeded_vector(5, 2, 0);
        let y = z.expm_action(&x).unwrap();
        assert!((&y - &x).norm_2() <= 1e-15);
    }

    #[test]
    fn expm_action_diagonal() {
        let lams = [c(0.2, -0.9), c(-1.0, 0.0), c(0.0, 2.0)];
        let d = Matrix::diagonal(&lams).unwrap();
        let x = seeded_vector(3, 5, 0);
        let y = d.expm_action(&x).unwrap();
        for i in 0..3 {
            let want = lams[i].exp() * x.entry(i);
            assert!((y.entry(i) - want).norm() <= 1e-13 * want.norm().max(1.0));
        }
    }

    #[test]
    fn expm_action_matches_dense_expm() {
        let m = seeded_skew_hermitian(32, 77, 0).scale_re(2.5);
        let x = seeded_vector(32, 77, 9).normalized().unwrap();
        let dense = m.expm().unwrap().mat_vec(&x).unwrap();
        let action = m.expm_action(&x).unwrap();
        assert!((&dense - &action).norm_2() <= 1e-10 * dense.norm_2());
    }

    #[test]
    fn operator_norm_identity() {
        assert!((Matrix::identity(7).operator_norm().unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn operator_norm_diagonal() {
        let d = Matrix::diagonal(&[c(3., 0.), c(0., -4.)]).unwrap();
        assert!((d.operator_norm().unwrap() - 4.0).abs() <= 1e-8 * 4.0);
    }

    #[test]
    fn operator_norm_matches_long_power_iteration_oracle() {
        let m = seeded_matrix(8, 31, 2);
        // Oracle: plain power iteration on MᴴM, no early stopping.
        let mh = m.adjoint();
        let mut v = Vector::from_fn(8, |i| c(1.0 + i as f64, -0.5 * i as f64))
            .unwrap()
            .normalized()
            .unwrap();
        let mut lambda = 0.0;
        for _ in 0..100_000 {
            let w = mh.mat_vec(&m.mat_vec(&v).unwrap()).unwrap();
            lambda = w
                .as_array()
                .iter()
                .zip(v.as_array().iter())
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>();
            v = w.normalized().unwrap();
        }
        let oracle = lambda.sqrt();
        let got = m.operator_norm().unwrap();
        assert!((got - oracle).abs() <= 1e-8 * oracle, "got {got}, oracle {oracle}");
    }

    #[test]
    fn operator_norm_submultiplicative() {
        let a = seeded_matrix(6, 101, 0);
        let b = seeded_matrix(6, 101, 1);
        let nab = a.try_mul(&b).unwrap().operator_norm().unwrap();
        let na = a.operator_norm().unwrap();
        let nb = b.operator_norm().unwrap();
        assert!(nab <= na * nb * (1.0 + 1e-8));
    }

    #[test]
    fn commutator_antisymmetry() {
        let u = seeded_matrix(5, 53, 0);
        let v = seeded_matrix(5, 53, 1);
        let uv = commutator(&u, &v).unwrap();
        let vu = commutator(&v, &u).unwrap();
        assert_eq!((&uv + &vu).norm_frobenius(), 0.0);
    }

    #[test]
    fn seeded_matrices_are_bitwise_deterministic() {
        let a = seeded_matrix(6, 9, 4);
        let b = seeded_matrix(6, 9, 4);
        assert_eq!(a, b);
        let c = seeded_matrix(6, 9, 5);
        assert_ne!(a, c);
    }
}
