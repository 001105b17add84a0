//! Error measurement and claim checking: global and local error curves
//! with observed-order fits, the explicit a-priori error-bound check for
//! split families, the stability product probe, and the
//! variation-of-constants residual.
//!
//! Every sample is an independent pure computation; results are merged in
//! a deterministic order so serialized output is byte-stable.

use std::sync::Arc;

use crate::integrators::{
    certified_reference, certified_reference_action, midpoint_step, propagate,
    propagate_action, SchemeKind,
};
use crate::linalg::{Matrix, Vector};
use crate::operators::{least_squares_slope, OperatorFamily};
use crate::{Error, Result};

/// Oracle accuracy requested for error curves; samples below 100x this
/// (1e-9) are treated as floor noise and masked out of order fits.
pub const ORACLE_TARGET: f64 = 1e-11;

/// Samples with error below this are excluded from order fits.
pub const ERROR_FLOOR: f64 = 1e-9;

/// Which norm an error curve measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Operator,
    Vector,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Operator => "operator",
            NormKind::Vector => "vector",
        }
    }
}

/// Whether a curve varies the global substep count or the single-step size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// Error of the full-interval propagator vs the substep count `n`;
    /// the fitted order is the negated slope of `log error` vs `log n`.
    Global,
    /// One-step error vs the step size `h`; the fitted order is the slope
    /// of `log error` vs `log h`.
    Local,
}

/// One measured error sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub n: usize,
    pub h: f64,
    pub error: f64,
    /// Excluded from fits: at or below the measurement floor.
    pub masked: bool,
}

/// A sequence of error measurements with its fitted order and constant.
#[derive(Debug, Clone)]
pub struct ErrorCurve {
    pub kind: CurveKind,
    pub samples: Vec<ErrorSample>,
    pub norm_kind: NormKind,
    pub family_label: String,
    pub scheme_kind: SchemeKind,
    pub fitted_order: Option<f64>,
    pub fitted_const: Option<f64>,
    /// Step count accepted by the reference oracle's doubling.
    pub oracle_n: usize,
    /// Achieved doubling certificate of the reference oracle.
    pub oracle_certificate: f64,
}

impl ErrorCurve {
    fn finish(mut self) -> Self {
        match fit_order(&self) {
            Some((order, constant)) => {
                self.fitted_order = Some(order);
                self.fitted_const = Some(constant);
            }
            None => {
                self.fitted_order = None;
                self.fitted_const = None;
            }
        }
        self
    }

    pub fn unmasked_count(&self) -> usize {
        self.samples.iter().filter(|s| !s.masked).count()
    }
}

fn fit_order(curve: &ErrorCurve) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter(|s| !s.masked)
        .map(|s| {
            let x = match curve.kind {
                CurveKind::Global => (s.n as f64).ln(),
                CurveKind::Local => s.h.ln(),
            };
            (x, s.error.ln())
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let slope = least_squares_slope(&pts);
    let order = match curve.kind {
        CurveKind::Global => -slope,
        CurveKind::Local => slope,
    };
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let constant = (my - slope * mx).exp();
    Some((order, constant))
}

/// Fitted order of an existing curve: the least-squares slope over
/// unmasked samples, per the curve's own abscissa convention. Fails as a
/// usage error when fewer than three samples survive the floor mask.
pub fn estimate_order(curve: &ErrorCurve) -> Result<f64> {
    if curve.unmasked_count() < 3 {
        return Err(Error::usage(format!(
            "estimate_order: need at least 3 unmasked samples, have {}",
            curve.unmasked_count()
        )));
    }
    Ok(fit_order(curve).expect("enough samples").0)
}

fn validate_ns(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::usage("ns must be nonempty"));
    }
    if ns[0] == 0 {
        return Err(Error::usage("substep counts must be at least 1"));
    }
    if !ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::usage("ns must be strictly increasing"));
    }
    Ok(())
}

/// Global error curve of a scheme against the certified reference:
/// `error(n) = ||reference - n-step propagator||` in the chosen norm over
/// the given substep counts.
pub fn global_error_curve(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    ns: &[usize],
    norm_kind: NormKind,
    x: Option<&Vector>,
    scheme: SchemeKind,
) -> Result<ErrorCurve> {
    validate_ns(ns)?;
    if !(t > s) {
        return Err(Error::usage(format!("need t > s, got s={s}, t={t}")));
    }
    match norm_kind {
        NormKind::Vector => {
            let x = x.ok_or_else(|| {
                Error::usage("vector-norm curves require an initial vector")
            })?;
            global_curve_vector(family, s, t, ns, x, scheme)
        }
        NormKind::Operator => {
            if x.is_some() {
                return Err(Error::usage(
                    "operator-norm curves take no initial vector",
                ));
            }
            global_curve_operator(family, s, t, ns, scheme)
        }
    }
}

fn global_curve_operator(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    ns: &[usize],
    scheme: SchemeKind,
) -> Result<ErrorCurve> {
    let props: Vec<Matrix> = ns
        .iter()
        .map(|&n| propagate(family, s, t, n, scheme).map(|r| r.w))
        .collect::<Result<_>>()?;

    // Stop refining the oracle once its certificate sits 100x below the
    // smallest error it is about to measure.
    let signal = |r: &Matrix| -> Result<f64> {
        let mut smallest = f64::INFINITY;
        for w in &props {
            smallest = smallest.min((r - w).operator_norm()?);
        }
        Ok(smallest)
    };
    let (reference, cert) = certified_reference(family, s, t, ORACLE_TARGET, Some(&signal))?;

    let mut samples = Vec::with_capacity(ns.len());
    for (&n, w) in ns.iter().zip(&props) {
        let error = (&reference.w - w).operator_norm()?;
        samples.push(ErrorSample {
            n,
            h: (t - s) / n as f64,
            error,
            masked: error < ERROR_FLOOR,
        });
    }
    Ok(ErrorCurve {
        kind: CurveKind::Global,
        samples,
        norm_kind: NormKind::Operator,
        family_label: family.label().to_string(),
        scheme_kind: scheme,
        fitted_order: None,
        fitted_const: None,
        oracle_n: reference.scheme.n,
        oracle_certificate: cert,
    }
    .finish())
}

fn global_curve_vector(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    ns: &[usize],
    x: &Vector,
    scheme: SchemeKind,
) -> Result<ErrorCurve> {
    let states: Vec<Vector> = ns
        .iter()
        .map(|&n| propagate_action(family, s, t, n, x, scheme))
        .collect::<Result<_>>()?;

    let signal = |r: &Vector| -> Result<f64> {
        Ok(states
            .iter()
            .map(|y| (r - y).norm_2())
            .fold(f64::INFINITY, f64::min))
    };
    let (reference, oracle_n, cert) =
        certified_reference_action(family, s, t, x, ORACLE_TARGET, Some(&signal))?;

    let mut samples = Vec::with_capacity(ns.len());
    for (&n, y) in ns.iter().zip(&states) {
        let error = (&reference - y).norm_2();
        samples.push(ErrorSample {
            n,
            h: (t - s) / n as f64,
            error,
            masked: error < ERROR_FLOOR,
        });
    }
    Ok(ErrorCurve {
        kind: CurveKind::Global,
        samples,
        norm_kind: NormKind::Vector,
        family_label: family.label().to_string(),
        scheme_kind: scheme,
        fitted_order: None,
        fitted_const: None,
        oracle_n,
        oracle_certificate: cert,
    }
    .finish())
}

/// One-step (consistency) error curve: for each step size `h`,
/// `error(h) = ||U(s+h, s) - exp(h A(s + h/2))||` with the exact flow
/// replaced by the certified reference on `[s, s+h]`.
pub fn local_error_curve(family: &OperatorFamily, s: f64, hs: &[f64]) -> Result<ErrorCurve> {
    if hs.is_empty() {
        return Err(Error::usage("hs must be nonempty"));
    }
    if !hs.iter().all(|&h| h > 0.0) {
        return Err(Error::usage("step sizes must be positive"));
    }
    if !hs.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::usage("hs must be strictly decreasing"));
    }

    let mut samples = Vec::with_capacity(hs.len());
    let mut oracle_n = 0usize;
    let mut worst_cert = 0.0f64;
    for &h in hs {
        let one_step = midpoint_step(family, s, h)?;
        let signal = |r: &Matrix| (r - &one_step).operator_norm();
        let (reference, cert) =
            certified_reference(family, s, s + h, ORACLE_TARGET, Some(&signal))?;
        let error = (&reference.w - &one_step).operator_norm()?;
        oracle_n = oracle_n.max(reference.scheme.n);
        worst_cert = worst_cert.max(cert);
        samples.push(ErrorSample {
            n: 1,
            h,
            error,
            masked: error < ERROR_FLOOR,
        });
    }
    Ok(ErrorCurve {
        kind: CurveKind::Local,
        samples,
        norm_kind: NormKind::Operator,
        family_label: family.label().to_string(),
        scheme_kind: SchemeKind::Midpoint,
        fitted_order: None,
        fitted_const: None,
        oracle_n,
        oracle_certificate: worst_cert,
    }
    .finish())
}

/// Result of checking measured errors against the explicit a-priori bound.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub pass: bool,
    /// Largest `error / bound` over unmasked samples (0 when all masked).
    pub worst_ratio: f64,
    /// The `n`-free prefactor `L (t-s)^{alpha+1} e^{omega (t-s)}`.
    pub bound_const: f64,
    /// Growth rate used: the sampled supremum of `||A(t)||`.
    pub omega: f64,
    pub curve: ErrorCurve,
}

/// Check the midpoint scheme's measured global errors against the explicit
/// bound `K^3 L M (t-s)^{alpha+1} e^{omega(t-s)} n^{-alpha}` with
/// `K = M = 1` and `omega = sup_t ||A(t)||` — valid instantiations for
/// bounded split families, since `||e^{hA}|| <= e^{h ||A||}`. The `(alpha,
/// L)` data comes from the family's declared regularity.
pub fn apriori_bound_check(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    ns: &[usize],
) -> Result<BoundCheck> {
    if family.split_parts().is_none() {
        return Err(Error::usage(
            "apriori_bound_check: family must declare the split A(t) = A0 + V(t)",
        ));
    }
    let reg = family.regularity().ok_or_else(|| {
        Error::usage("apriori_bound_check: family must declare (alpha, L) regularity")
    })?;
    let omega = family.max_norm_on(s, t, 257)?;
    let bound_const =
        reg.holder_const * (t - s).powf(reg.alpha + 1.0) * (omega * (t - s)).exp();

    let curve = global_error_curve(family, s, t, ns, NormKind::Operator, None, SchemeKind::Midpoint)?;
    let mut worst_ratio = 0.0f64;
    for sample in curve.samples.iter().filter(|s| !s.masked) {
        let bound = bound_const * (sample.n as f64).powf(-reg.alpha);
        let ratio = if bound > 0.0 {
            sample.error / bound
        } else {
            f64::INFINITY
        };
        worst_ratio = worst_ratio.max(ratio);
    }
    Ok(BoundCheck {
        pass: worst_ratio <= 1.0,
        worst_ratio,
        bound_const,
        omega,
        curve,
    })
}

/// One partial product of the stability probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub k: usize,
    pub partial_norm: f64,
    pub discounted: f64,
}

/// The measured stability data: the smallest admissible product bound `M`
/// at this resolution for the given growth rate `omega`.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub max_growth: f64,
    pub omega_used: f64,
    pub n: usize,
    pub rows: Vec<StabilityRow>,
}

/// Probe the product-stability bound: compute every partial product of the
/// midpoint step operators on `[s, t]` with `n` substeps, discount each by
/// `e^{-(k+1) omega h}`, and take the maximum (seeded with the empty
/// product, which is the identity with value 1).
pub fn stability_probe(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    n: usize,
    omega: f64,
) -> Result<StabilityReport> {
    if n == 0 {
        return Err(Error::usage("stability_probe: need n >= 1"));
    }
    if !(t > s) {
        return Err(Error::usage(format!("need t > s, got s={s}, t={t}")));
    }
    let h = (t - s) / n as f64;
    let mut product = Matrix::identity(family.dim());
    let mut rows = Vec::with_capacity(n);
    // Empty product: identity, no discount.
    let mut max_growth = 1.0f64;
    for k in 0..n {
        let step = midpoint_step(family, s + k as f64 * h, h)?;
        product = step.try_mul(&product)?;
        if !product.is_finite() {
            return Err(Error::numerical(
                "stability_probe",
                format!("partial product overflowed at step {k} of {n}"),
            ));
        }
        let partial_norm = product.operator_norm()?;
        let discounted = partial_norm * (-((k + 1) as f64) * omega * h).exp();
        if !discounted.is_finite() {
            return Err(Error::numerical(
                "stability_probe",
                format!("discounted norm overflowed at step {k} of {n}"),
            ));
        }
        max_growth = max_growth.max(discounted);
        rows.push(StabilityRow {
            k,
            partial_norm,
            discounted,
        });
    }
    Ok(StabilityReport {
        max_growth,
        omega_used: omega,
        n,
        rows,
    })
}

/// Residual of the variation-of-constants identity
/// `U_B(t,s) = U(t,s) + ∫_s^t U_B(t,r) B(r) U(r,s) dr` for the perturbed
/// family `A(t) + B(t)`, with both evolution families realized by the
/// certified reference propagator and the integral by composite 4-point
/// Gauss–Legendre quadrature over `quad_nodes` panels.
pub fn voc_residual(
    f_base: &OperatorFamily,
    perturbation: impl Fn(f64) -> Matrix + Send + Sync + 'static,
    s: f64,
    t: f64,
    quad_nodes: usize,
) -> Result<f64> {
    if quad_nodes < 2 {
        return Err(Error::usage("voc_residual: need at least 2 panels"));
    }
    if !(t > s) {
        return Err(Error::usage(format!("need t > s, got s={s}, t={t}")));
    }
    let b = Arc::new(perturbation);
    if b(s).dim() != f_base.dim() {
        return Err(Error::usage(format!(
            "voc_residual: perturbation dimension {} does not match family dimension {}",
            b(s).dim(),
            f_base.dim()
        )));
    }
    let base = f_base.clone();
    let b_eval = Arc::clone(&b);
    let perturbed = OperatorFamily::new(
        f_base.dim(),
        format!("{}+perturbation", f_base.label()),
        move |tau| &base.eval(tau) + &b_eval(tau),
    )?;

    let u_full = certified_reference(f_base, s, t, ORACLE_TARGET, None)?.0.w;
    let ub_full = certified_reference(&perturbed, s, t, ORACLE_TARGET, None)?.0.w;

    // 4-point Gauss–Legendre nodes and weights on [-1, 1].
    const NODES: [f64; 4] = [
        -0.8611363115940526,
        -0.33998104358485626,
        0.33998104358485626,
        0.8611363115940526,
    ];
    const WEIGHTS: [f64; 4] = [
        0.34785484513745385,
        0.6521451548625461,
        0.6521451548625461,
        0.34785484513745385,
    ];

    let panel_width = (t - s) / quad_nodes as f64;
    let mut integral = Matrix::zeros(f_base.dim());
    for panel in 0..quad_nodes {
        let lo = s + panel as f64 * panel_width;
        let mid = lo + 0.5 * panel_width;
        let half = 0.5 * panel_width;
        for (node, weight) in NODES.iter().zip(WEIGHTS) {
            let r = mid + half * node;
            let u_back = certified_reference(&perturbed, r, t, ORACLE_TARGET, None)?.0.w;
            let u_fwd = certified_reference(f_base, s, r, ORACLE_TARGET, None)?.0.w;
            let g = u_back.try_mul(&b(r))?.try_mul(&u_fwd)?;
            integral = &integral + &g.scale_re(weight * half);
        }
    }

    let residual = &(&ub_full - &u_full) - &integral;
    residual.operator_norm()
}
