//! Time-dependent operator families `A(t) = A0 + V(t)` and the built-in
//! problem families, plus empirical estimation of time-regularity data
//! (Hölder exponent and constant).
//!
//! A family is an immutable value: a dimension, an evaluation map
//! `t -> A(t)`, and optional structure — a constant/bounded split, declared
//! Hölder regularity, a closed-form propagator where one exists, and the
//! seed it was generated from. Families are cheap to clone and safe to
//! share across threads.

use std::sync::Arc;

use crate::linalg::{
    seeded_hermitian_unit, seeded_skew_hermitian, Matrix, Vector,
};
use crate::{C64, Error, Result};

type EvalFn = Arc<dyn Fn(f64) -> Matrix + Send + Sync>;
type PropagatorFn = Arc<dyn Fn(f64, f64) -> Matrix + Send + Sync>;
type ApplierFn = Arc<dyn Fn(f64) -> TimeApplier + Send + Sync>;

/// The action of `A(t)` at one frozen time: a closure computing
/// `u -> A(t) u` together with the exact 1-norm of `A(t)`. Families with
/// structure (banded stencils, diagonal parts) can provide these far more
/// cheaply than a dense evaluation; the result must agree with
/// `eval(t).mat_vec(u)` up to rounding.
pub struct TimeApplier {
    pub norm_1: f64,
    apply: Box<dyn Fn(&Vector) -> Vector + Send + Sync>,
}

impl TimeApplier {
    pub fn new(norm_1: f64, apply: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        TimeApplier {
            norm_1,
            apply: Box::new(apply),
        }
    }

    pub fn apply(&self, u: &Vector) -> Vector {
        (self.apply)(u)
    }
}

/// Declared time regularity: `||A(t) - A(s)|| <= holder_const * |t-s|^alpha`
/// on the given interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    pub alpha: f64,
    pub holder_const: f64,
    pub interval: (f64, f64),
}

/// The map `t -> A(t)` on a fixed finite-dimensional state space.
#[derive(Clone)]
pub struct OperatorFamily {
    dim: usize,
    label: String,
    eval: EvalFn,
    split: Option<(Matrix, EvalFn)>,
    regularity: Option<Regularity>,
    exact: Option<PropagatorFn>,
    applier: Option<ApplierFn>,
    seed: Option<u64>,
}

impl std::fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("regularity", &self.regularity)
            .field("seed", &self.seed)
            .finish()
    }
}

impl OperatorFamily {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        eval: impl Fn(f64) -> Matrix + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("operator family dimension must be at least 1"));
        }
        Ok(OperatorFamily {
            dim,
            label: label.into(),
            eval: Arc::new(eval),
            split: None,
            regularity: None,
            exact: None,
            applier: None,
            seed: None,
        })
    }

    pub fn with_split(
        mut self,
        a0: Matrix,
        v: impl Fn(f64) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(a0.dim(), self.dim, "split constant part has wrong dimension");
        self.split = Some((a0, Arc::new(v)));
        self
    }

    pub fn with_regularity(mut self, reg: Regularity) -> Self {
        self.regularity = Some(reg);
        self
    }

    pub fn with_exact(
        mut self,
        propagator: impl Fn(f64, f64) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(Arc::new(propagator));
        self
    }

    pub fn with_applier(
        mut self,
        factory: impl Fn(f64) -> TimeApplier + Send + Sync + 'static,
    ) -> Self {
        self.applier = Some(Arc::new(factory));
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluate `A(t)`.
    pub fn eval(&self, t: f64) -> Matrix {
        let m = (self.eval)(t);
        assert_eq!(m.dim(), self.dim, "family evaluation has wrong dimension");
        m
    }

    /// Constant part and bounded part, when the family declares the split
    /// `A(t) = A0 + V(t)`.
    pub fn split_parts(&self) -> Option<(&Matrix, impl Fn(f64) -> Matrix + '_)> {
        self.split
            .as_ref()
            .map(|(a0, v)| (a0, move |t: f64| v(t)))
    }

    pub fn regularity(&self) -> Option<Regularity> {
        self.regularity
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn has_exact_propagator(&self) -> bool {
        self.exact.is_some()
    }

    /// Frozen-time fast action `u -> A(t) u`, when the family provides one.
    pub fn applier(&self, t: f64) -> Option<TimeApplier> {
        self.applier.as_ref().map(|f| f(t))
    }

    /// Closed-form propagator `U(t, s)`, for families that carry one.
    pub fn exact_propagator(&self, s: f64, t: f64) -> Option<Matrix> {
        self.exact.as_ref().map(|u| u(t, s))
    }

    /// Largest sampled operator norm of `A(t)` over `[lo, hi]`; an
    /// empirical stand-in for `sup_t ||A(t)||` used as a growth rate.
    pub fn max_norm_on(&self, lo: f64, hi: f64, samples: usize) -> Result<f64> {
        let n = samples.max(2);
        let mut sup: f64 = 0.0;
        for i in 0..n {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            sup = sup.max(self.eval(t).operator_norm()?);
        }
        Ok(sup)
    }
}

/// Number of retained terms of the lacunary cosine series at exponent
/// `alpha`: `ceil(28 / alpha)`, so the discarded tail is below ~1e-8.
pub fn weierstrass_terms(alpha: f64) -> usize {
    (28.0 / alpha).ceil() as usize
}

/// Truncated Weierstrass-type series `w(t) = sum_{k<K} 2^{-alpha k} cos(2^k t)`:
/// alpha-Hölder at every sampled scale, which makes order-alpha error decay
/// observable rather than hidden behind isolated kinks.
pub fn weierstrass_sum(alpha: f64, t: f64) -> f64 {
    let terms = weierstrass_terms(alpha);
    let mut freq = 1.0f64;
    let mut amp = 1.0f64;
    let decay = 2.0f64.powf(-alpha);
    let mut acc = 0.0;
    for _ in 0..terms {
        acc += amp * (freq * t).cos();
        freq *= 2.0;
        amp *= decay;
    }
    acc
}

/// Supremum of `|w|`, attained at `t = 0`: the geometric sum
/// `(1 - 2^{-alpha K}) / (1 - 2^{-alpha})`.
pub fn weierstrass_sup(alpha: f64) -> f64 {
    let terms = weierstrass_terms(alpha) as f64;
    let q = 2.0f64.powf(-alpha);
    (1.0 - q.powf(terms)) / (1.0 - q)
}

/// Documented Hölder constant of the truncated series: splitting the
/// increment at the scale `2^k ~ 1/|t-s|` gives
/// `|w(t)-w(s)| <= [2/(1-2^{-alpha}) + min(K, 2^{1-alpha}/(2^{1-alpha}-1))] |t-s|^alpha`,
/// where the unresolved tail contributes the first summand and the resolved
/// head the second (the `min` covers alpha = 1, where the head sum is flat).
pub fn weierstrass_holder_const(alpha: f64) -> f64 {
    let terms = weierstrass_terms(alpha) as f64;
    let tail = 2.0 / (1.0 - 2.0f64.powf(-alpha));
    let head = if alpha < 1.0 {
        let g = 2.0f64.powf(1.0 - alpha);
        (g / (g - 1.0)).min(terms)
    } else {
        terms
    };
    tail + head
}

/// Autonomous family `A(t) = m` for all `t`; exact propagator
/// `U(t,s) = e^{(t-s)m}`. Used as an exactness oracle for the steppers.
pub fn family_constant(m: Matrix) -> Result<OperatorFamily> {
    if !m.is_finite() {
        return Err(Error::usage("family_constant: non-finite matrix"));
    }
    let dim = m.dim();
    let m_eval = m.clone();
    let m_exact = m.clone();
    let zero = Matrix::zeros(dim);
    Ok(OperatorFamily::new(dim, "constant", move |_t| m_eval.clone())?
        .with_split(m, move |_t| zero.clone())
        .with_regularity(Regularity {
            alpha: 1.0,
            holder_const: 0.0,
            interval: (f64::NEG_INFINITY, f64::INFINITY),
        })
        .with_exact(move |t, s| {
            m_exact
                .scale_re(t - s)
                .expm()
                .expect("exponential of scaled constant generator")
        }))
}

/// The scalar family `A(t) = i (1 + t)` with closed-form propagator
/// `U(t,s) = exp(i (t-s) + i (t^2 - s^2) / 2)`. The midpoint rule
/// integrates affine integrands exactly, so midpoint propagation of this
/// family is exact for every step count.
pub fn family_affine_phase() -> OperatorFamily {
    let eval = |t: f64| {
        Matrix::diagonal(&[C64::new(0.0, 1.0 + t)]).expect("1x1 diagonal")
    };
    OperatorFamily::new(1, "affine_phase", eval)
        .expect("dim 1")
        .with_split(
            Matrix::diagonal(&[C64::new(0.0, 1.0)]).expect("1x1 diagonal"),
            |t| Matrix::diagonal(&[C64::new(0.0, t)]).expect("1x1 diagonal"),
        )
        .with_regularity(Regularity {
            alpha: 1.0,
            holder_const: 1.0,
            interval: (f64::NEG_INFINITY, f64::INFINITY),
        })
        .with_exact(|t, s| {
            let phase = (t - s) + 0.5 * (t * t - s * s);
            Matrix::diagonal(&[C64::new(0.0, phase).exp()]).expect("1x1 diagonal")
        })
}

/// Rough-in-time synthetic family `A(t) = A0 + w_alpha(t) B`: `A0` a seeded
/// skew-Hermitian matrix, `B` a seeded Hermitian matrix of unit spectral
/// norm, and `w_alpha` the truncated Weierstrass-type series. The declared
/// Hölder data is exactly `(alpha, holder_const(alpha))` since `||B|| = 1`.
pub fn family_weierstrass(dim: usize, alpha: f64, seed: u64) -> Result<OperatorFamily> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::usage(format!(
            "family_weierstrass: alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if dim == 0 {
        return Err(Error::usage("family_weierstrass: dim must be at least 1"));
    }
    let a0 = seeded_skew_hermitian(dim, seed, 0);
    let b = seeded_hermitian_unit(dim, seed, 1);
    let a0_eval = a0.clone();
    let b_eval = b.clone();
    let b_split = b.clone();
    Ok(
        OperatorFamily::new(dim, format!("weierstrass(alpha={alpha})"), move |t| {
            &a0_eval + &b_eval.scale_re(weierstrass_sum(alpha, t))
        })?
        .with_split(a0, move |t| {
            b_split.scale_re(weierstrass_sum(alpha, t))
        })
        .with_regularity(Regularity {
            alpha,
            holder_const: weierstrass_holder_const(alpha),
            interval: (f64::NEG_INFINITY, f64::INFINITY),
        })
        .with_seed(seed),
    )
}

/// Lipschitz synthetic family `A(t) = A0 + |sin t| B` with `A0`, `B` seeded
/// skew-Hermitian (`||B|| = 1`), declared regularity `(alpha = 1, L = 1)`.
/// Skew-Hermitian throughout, so every step factor is unitary.
pub fn family_lipschitz_sine(dim: usize, seed: u64) -> Result<OperatorFamily> {
    if dim == 0 {
        return Err(Error::usage("family_lipschitz_sine: dim must be at least 1"));
    }
    let a0 = seeded_skew_hermitian(dim, seed, 0);
    let b = seeded_hermitian_unit(dim, seed, 1).scale(C64::new(0.0, 1.0));
    let a0_eval = a0.clone();
    let b_eval = b.clone();
    let b_split = b.clone();
    Ok(
        OperatorFamily::new(dim, "lipschitz_sine", move |t| {
            &a0_eval + &b_eval.scale_re(t.sin().abs())
        })?
        .with_split(a0, move |t| b_split.scale_re(t.sin().abs()))
        .with_regularity(Regularity {
            alpha: 1.0,
            holder_const: 1.0,
            interval: (f64::NEG_INFINITY, f64::INFINITY),
        })
        .with_seed(seed),
    )
}

/// Smooth noncommuting family `A(t) = A0 + sin(t) B` with `A0`, `B` seeded
/// skew-Hermitian and `[A0, B] != 0`; the classical-order test problem.
pub fn family_smooth_noncommuting(dim: usize, seed: u64) -> Result<OperatorFamily> {
    if dim == 0 {
        return Err(Error::usage(
            "family_smooth_noncommuting: dim must be at least 1",
        ));
    }
    let a0 = seeded_skew_hermitian(dim, seed, 0);
    let b = seeded_hermitian_unit(dim, seed, 1).scale(C64::new(0.0, 1.0));
    let a0_eval = a0.clone();
    let b_eval = b.clone();
    let b_split = b.clone();
    Ok(
        OperatorFamily::new(dim, "smooth_noncommuting", move |t| {
            &a0_eval + &b_eval.scale_re(t.sin())
        })?
        .with_split(a0, move |t| b_split.scale_re(t.sin()))
        .with_regularity(Regularity {
            alpha: 1.0,
            holder_const: 1.0,
            interval: (f64::NEG_INFINITY, f64::INFINITY),
        })
        .with_seed(seed),
    )
}

/// Fourier-spectral discretization of the periodic 1-D problem
/// `A(t) = (i/2) L - i b(., t)` on `[0, 2pi)`, where `L` is diagonal with
/// entries `-k^2` on modes `k = -n/2 .. n/2 - 1` and the multiplication
/// operator by `b` is represented in the same Fourier coordinates. For
/// real-valued `b` the family is skew-Hermitian at every `t`.
pub fn family_schrodinger_1d(
    n_modes: usize,
    potential: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    declared: Option<Regularity>,
) -> Result<OperatorFamily> {
    if n_modes < 4 || n_modes % 2 != 0 {
        return Err(Error::usage(format!(
            "family_schrodinger_1d: n_modes must be even and >= 4, got {n_modes}"
        )));
    }
    if n_modes > 256 {
        return Err(Error::usage(
            "family_schrodinger_1d: n_modes capped at 256 (dense exponentials)",
        ));
    }
    let n = n_modes;
    let half = n as isize / 2;
    let grid: Vec<f64> = (0..n)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64)
        .collect();
    // Unitary DFT onto modes -n/2 .. n/2-1: F[m, j] = exp(-i k_m x_j)/sqrt(n).
    let scale = 1.0 / (n as f64).sqrt();
    let fwd = Matrix::from_fn(n, |m, j| {
        let k = m as isize - half;
        (C64::new(0.0, -(k as f64) * grid[j])).exp() * scale
    })?;
    let inv = fwd.adjoint();
    let laplacian_half: Vec<C64> = (0..n)
        .map(|m| {
            let k = (m as isize - half) as f64;
            C64::new(0.0, -0.5 * k * k)
        })
        .collect();
    let free_part = Matrix::diagonal(&laplacian_half)?;

    let potential = Arc::new(potential);
    let grid = Arc::new(grid);
    let assemble_potential = {
        let fwd = fwd.clone();
        let inv = inv.clone();
        let potential = Arc::clone(&potential);
        let grid = Arc::clone(&grid);
        move |t: f64| -> Matrix {
            // F diag(b(x_j, t)) F^H, scaled by -i.
            let mut cols = fwd.as_array().clone();
            for (j, mut col) in cols.columns_mut().into_iter().enumerate() {
                let b = potential(grid[j], t);
                col.mapv_inplace(|z| z * b);
            }
            let d = Matrix::from_array_unchecked(cols);
            d.try_mul(&inv)
                .expect("same dimension")
                .scale(C64::new(0.0, -1.0))
        }
    };

    let free_eval = free_part.clone();
    let v_eval = assemble_potential.clone();
    let mut family = OperatorFamily::new(n, "schrodinger_1d", move |t| {
        &free_eval + &v_eval(t)
    })?
    .with_split(free_part, assemble_potential);
    if let Some(reg) = declared {
        family = family.with_regularity(reg);
    }
    Ok(family)
}

/// Second-order finite-difference discretization of the periodic 1-D
/// divergence-form problem `A(t) = i D- diag(a(x_{j+1/2}, t)) D+ / dx^2`.
/// For real coefficients the assembled matrix is `i` times a real symmetric
/// matrix, hence skew-Hermitian. Ellipticity `a >= c_min` is checked on a
/// fixed sample grid in `t` spanning `[-1, 2]` at construction.
pub fn family_divergence_form_1d(
    n_grid: usize,
    coefficient: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    c_min: f64,
    declared: Option<Regularity>,
) -> Result<OperatorFamily> {
    if n_grid < 8 {
        return Err(Error::usage(format!(
            "family_divergence_form_1d: n_grid must be >= 8, got {n_grid}"
        )));
    }
    if n_grid > 512 {
        return Err(Error::usage(
            "family_divergence_form_1d: n_grid capped at 512 (dense exponentials)",
        ));
    }
    if !(c_min > 0.0) {
        return Err(Error::usage(
            "family_divergence_form_1d: ellipticity constant must be positive",
        ));
    }
    let n = n_grid;
    let dx = 2.0 * std::f64::consts::PI / n as f64;
    let half_grid: Vec<f64> = (0..n).map(|j| dx * (j as f64 + 0.5)).collect();

    // Build-time ellipticity check on sampled (x, t).
    for i in 0..=60 {
        let t = -1.0 + 3.0 * i as f64 / 60.0;
        for (j, &x) in half_grid.iter().enumerate() {
            let a = coefficient(x, t);
            if !(a >= c_min) {
                return Err(Error::usage(format!(
                    "family_divergence_form_1d: coefficient {a} at (x={x:.6}, t={t:.6}) \
                     below declared bound {c_min} (grid point {j})"
                )));
            }
        }
    }

    let coefficient = Arc::new(coefficient);
    let half_grid = Arc::new(half_grid);
    let assemble = {
        let coefficient = Arc::clone(&coefficient);
        let half_grid = Arc::clone(&half_grid);
        move |t: f64| -> Matrix {
            let inv_dx2 = 1.0 / (dx * dx);
            let a: Vec<f64> = half_grid.iter().map(|&x| coefficient(x, t)).collect();
            let mut m = ndarray::Array2::<C64>::zeros((n, n));
            for j in 0..n {
                let right = a[j];
                let left = a[(j + n - 1) % n];
                m[(j, j)] = C64::new(0.0, -(right + left) * inv_dx2);
                m[(j, (j + 1) % n)] = C64::new(0.0, right * inv_dx2);
                m[(j, (j + n - 1) % n)] = C64::new(0.0, left * inv_dx2);
            }
            Matrix::from_array_unchecked(m)
        }
    };

    // Frozen-time stencil action: one coefficient sweep per time, then
    // O(n) per product. Column sums of the stencil give the exact 1-norm:
    // 2 (a_{j-1/2} + a_{j+1/2}) / dx^2 at column j.
    let applier = {
        let coefficient = Arc::clone(&coefficient);
        let half_grid = Arc::clone(&half_grid);
        move |t: f64| -> TimeApplier {
            let inv_dx2 = 1.0 / (dx * dx);
            let a: Arc<Vec<f64>> =
                Arc::new(half_grid.iter().map(|&x| coefficient(x, t)).collect());
            let norm_1 = (0..n)
                .map(|j| 2.0 * (a[(j + n - 1) % n] + a[j]) * inv_dx2)
                .fold(0.0, f64::max);
            let a_apply = Arc::clone(&a);
            TimeApplier::new(norm_1, move |u: &Vector| {
                Vector::from_fn(n, |j| {
                    let right = a_apply[j];
                    let left = a_apply[(j + n - 1) % n];
                    let contrib = u.entry((j + 1) % n) * right
                        + u.entry((j + n - 1) % n) * left
                        - u.entry(j) * (right + left);
                    C64::new(-contrib.im * inv_dx2, contrib.re * inv_dx2)
                })
                .expect("stencil action")
            })
        }
    };

    let mut family =
        OperatorFamily::new(n, "divergence_form_1d", assemble)?.with_applier(applier);
    if let Some(reg) = declared {
        family = family.with_regularity(reg);
    }
    Ok(family)
}

/// A fitted Hölder exponent and constant for a family's time regularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub alpha_fit: f64,
    pub const_fit: f64,
    pub sample_count: usize,
    pub interval: (f64, f64),
}

/// Estimate the Hölder data of `t -> A(t)` on `[t_lo, t_hi]`: for dyadic
/// separations `delta = span * 2^{-j}` take the largest sampled increment
/// norm `r(delta) = max_t ||A(t+delta) - A(t)||`, then fit
/// `log r` against `log delta` by least squares. Scales whose increments
/// sit below 1e-10 are excluded from the fit (floating floor); a family
/// with all increments below 1e-13 reports `(alpha=1, const=0)`.
pub fn holder_estimate(
    family: &OperatorFamily,
    t_lo: f64,
    t_hi: f64,
    n_pairs: usize,
) -> Result<HolderEstimate> {
    if !(t_lo < t_hi) {
        return Err(Error::usage("holder_estimate: need t_lo < t_hi"));
    }
    if n_pairs < 16 {
        return Err(Error::usage("holder_estimate: need at least 16 pairs"));
    }
    const SCALES: usize = 12;
    let span = t_hi - t_lo;
    let per_scale = (n_pairs / SCALES).max(4);

    let mut deltas = Vec::with_capacity(SCALES);
    let mut increments = Vec::with_capacity(SCALES);
    let mut sample_count = 0usize;
    for j in 1..=SCALES {
        let delta = span * 2.0f64.powi(-(j as i32));
        let mut r: f64 = 0.0;
        for i in 0..per_scale {
            let t = t_lo + (span - delta) * i as f64 / (per_scale - 1).max(1) as f64;
            let diff = &family.eval(t + delta) - &family.eval(t);
            r = r.max(diff.operator_norm()?);
            sample_count += 1;
        }
        deltas.push(delta);
        increments.push(r);
    }

    if increments.iter().all(|&r| r <= 1e-13) {
        return Ok(HolderEstimate {
            alpha_fit: 1.0,
            const_fit: 0.0,
            sample_count,
            interval: (t_lo, t_hi),
        });
    }

    let fit_points = |floor: f64| -> Vec<(f64, f64)> {
        deltas
            .iter()
            .zip(&increments)
            .filter(|&(_, &r)| r > floor)
            .map(|(&d, &r)| (d.ln(), r.ln()))
            .collect()
    };
    let mut pts = fit_points(1e-10);
    if pts.len() < 3 {
        pts = fit_points(1e-13);
    }
    if pts.len() < 3 {
        return Ok(HolderEstimate {
            alpha_fit: 1.0,
            const_fit: 0.0,
            sample_count,
            interval: (t_lo, t_hi),
        });
    }

    let slope = least_squares_slope(&pts);
    let alpha_fit = slope.clamp(1e-9, 1.05);
    let const_fit = deltas
        .iter()
        .zip(&increments)
        .map(|(&d, &r)| r / d.powf(alpha_fit))
        .fold(0.0, f64::max);

    Ok(HolderEstimate {
        alpha_fit,
        const_fit,
        sample_count,
        interval: (t_lo, t_hi),
    })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    sxy / sxx
}

/// Smooth Gaussian bump on the periodic grid of a spatial family,
/// normalized to unit 2-norm.
pub fn gaussian_grid_vector(dim: usize) -> Result<Vector> {
    let center = std::f64::consts::PI;
    let sigma = 0.6;
    Vector::from_fn(dim, |j| {
        let x = 2.0 * std::f64::consts::PI * j as f64 / dim as f64;
        // Periodic distance to the center.
        let mut d = (x - center).abs();
        if d > std::f64::consts::PI {
            d = 2.0 * std::f64::consts::PI - d;
        }
        C64::new((-0.5 * (d / sigma).powi(2)).exp(), 0.0)
    })?
    .normalized()
}

/// The same Gaussian bump expressed in the Fourier coordinates used by
/// `family_schrodinger_1d` (modes `-n/2 .. n/2 - 1`), unit 2-norm.
pub fn gaussian_fourier_vector(n_modes: usize) -> Result<Vector> {
    let grid = gaussian_grid_vector(n_modes)?;
    let half = n_modes as isize / 2;
    let scale = 1.0 / (n_modes as f64).sqrt();
    let fwd = Matrix::from_fn(n_modes, |m, j| {
        let k = (m as isize - half) as f64;
        let x = 2.0 * std::f64::consts::PI * j as f64 / n_modes as f64;
        (C64::new(0.0, -k * x)).exp() * scale
    })?;
    fwd.mat_vec(&grid)?.normalized()
}
