//! Time steppers and propagators: the exponential-midpoint scheme, a
//! fourth-order two-node Magnus scheme used as the reference oracle,
//! closed-form exact stepping where a family provides it, and time-ordered
//! products of step operators.
//!
//! Product convention: the time-ordered product applies the earliest step
//! first to the state, i.e. `L_{n-1} ... L_1 L_0`.

use crate::linalg::{commutator, Matrix, Vector};
use crate::operators::OperatorFamily;
use crate::{Error, Result};

/// Any single step whose generator exceeds this 1-norm aborts instead of
/// silently losing exponential accuracy.
const STIFFNESS_LIMIT: f64 = 500.0;

/// Hard cap on reference-propagator refinement.
const MAX_REFERENCE_STEPS: usize = 1 << 20;

/// Gauss node offsets for the fourth-order scheme: `1/2 ∓ sqrt(3)/6`.
const GAUSS_C1: f64 = 0.5 - 0.28867513459481287;
const GAUSS_C2: f64 = 0.5 + 0.28867513459481287;

/// Which one-step rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// `exp(h A(t_n + h/2))` — the scheme under study.
    Midpoint,
    /// Two-node Gauss realization of the first two series terms; order 4
    /// on smooth families. Serves as the reference oracle.
    Magnus4,
    /// The family's closed-form propagator, where it has one.
    Exact,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Midpoint => "midpoint",
            SchemeKind::Magnus4 => "magnus4",
            SchemeKind::Exact => "exact",
        }
    }
}

/// A propagation request: scheme kind, interval, and substep count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepScheme {
    pub kind: SchemeKind,
    pub s: f64,
    pub t: f64,
    pub n: usize,
}

impl StepScheme {
    pub fn new(kind: SchemeKind, s: f64, t: f64, n: usize) -> Result<Self> {
        if !(t > s) {
            return Err(Error::usage(format!("need t > s, got s={s}, t={t}")));
        }
        if n == 0 {
            return Err(Error::usage("need at least one step (n >= 1)"));
        }
        Ok(StepScheme { kind, s, t, n })
    }

    pub fn h(&self) -> f64 {
        (self.t - self.s) / self.n as f64
    }
}

/// An approximate propagator `W(t, s)` together with how it was produced.
#[derive(Debug, Clone)]
pub struct PropagatorResult {
    pub w: Matrix,
    pub scheme: StepScheme,
    pub family_label: String,
}

fn guard_step_norm(omega: &Matrix, stage: &'static str) -> Result<()> {
    let norm = omega.norm_1();
    if norm > STIFFNESS_LIMIT {
        return Err(Error::numerical(
            stage,
            format!("step generator 1-norm {norm:.3e} exceeds stiffness guard {STIFFNESS_LIMIT}"),
        ));
    }
    Ok(())
}

/// One exponential-midpoint step operator: `exp(h A(t_n + h/2))`.
pub fn midpoint_step(family: &OperatorFamily, t_n: f64, h: f64) -> Result<Matrix> {
    if !(h > 0.0) {
        return Err(Error::usage(format!("midpoint_step: need h > 0, got {h}")));
    }
    let omega = family.eval(t_n + 0.5 * h).scale_re(h);
    guard_step_norm(&omega, "midpoint_step")?;
    omega.expm()
}

/// One fourth-order step operator:
/// `exp((h/2)(A1 + A2) + (sqrt(3) h^2 / 12) [A2, A1])` with
/// `A_{1,2} = A(t_n + (1/2 ∓ sqrt(3)/6) h)`.
pub fn magnus4_step(family: &OperatorFamily, t_n: f64, h: f64) -> Result<Matrix> {
    if !(h > 0.0) {
        return Err(Error::usage(format!("magnus4_step: need h > 0, got {h}")));
    }
    let omega = magnus4_generator(family, t_n, h)?;
    guard_step_norm(&omega, "magnus4_step")?;
    omega.expm()
}

fn magnus4_generator(family: &OperatorFamily, t_n: f64, h: f64) -> Result<Matrix> {
    let a1 = family.eval(t_n + GAUSS_C1 * h);
    let a2 = family.eval(t_n + GAUSS_C2 * h);
    let sym = (&a1 + &a2).scale_re(0.5 * h);
    let comm = commutator(&a2, &a1)?.scale_re(3.0f64.sqrt() * h * h / 12.0);
    Ok(&sym + &comm)
}

/// The step operator for step `k` of an `n`-step propagation from `s` with
/// step `h`. Midpoint nodes are formed as `s + (2k+1) h/2` so node
/// positions carry no accumulated drift.
fn step_operator(
    family: &OperatorFamily,
    kind: SchemeKind,
    s: f64,
    k: usize,
    h: f64,
) -> Result<Matrix> {
    match kind {
        SchemeKind::Midpoint => {
            let omega = family
                .eval(s + (2 * k + 1) as f64 * 0.5 * h)
                .scale_re(h);
            guard_step_norm(&omega, "midpoint_step")?;
            omega.expm()
        }
        SchemeKind::Magnus4 => {
            let omega = magnus4_generator(family, s + k as f64 * h, h)?;
            guard_step_norm(&omega, "magnus4_step")?;
            omega.expm()
        }
        SchemeKind::Exact => {
            let t_k = s + k as f64 * h;
            family.exact_propagator(t_k, t_k + h).ok_or_else(|| {
                Error::usage(format!(
                    "family '{}' has no closed-form propagator",
                    family.label()
                ))
            })
        }
    }
}

/// Time-ordered `n`-step propagation: the product `L_{n-1} ... L_0` of the
/// chosen scheme's step operators, earliest step applied first.
pub fn propagate(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    n: usize,
    kind: SchemeKind,
) -> Result<PropagatorResult> {
    let scheme = StepScheme::new(kind, s, t, n)?;
    let h = scheme.h();
    let mut w = Matrix::identity(family.dim());
    for k in 0..n {
        let l = step_operator(family, kind, s, k, h)?;
        w = l.try_mul(&w)?;
        if !w.is_finite() {
            return Err(Error::numerical(
                "propagate",
                format!("non-finite product at step {k} of {n}"),
            ));
        }
    }
    Ok(PropagatorResult {
        w,
        scheme,
        family_label: family.label().to_string(),
    })
}

/// Apply the `n`-step propagation to a state vector, stepping with
/// exponential actions instead of dense exponentials.
pub fn propagate_action(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    n: usize,
    x: &Vector,
    kind: SchemeKind,
) -> Result<Vector> {
    let scheme = StepScheme::new(kind, s, t, n)?;
    if x.dim() != family.dim() {
        return Err(Error::usage(format!(
            "propagate_action: state dimension {} does not match family dimension {}",
            x.dim(),
            family.dim()
        )));
    }
    let h = scheme.h();
    let mut y = x.clone();
    for k in 0..n {
        y = match kind {
            SchemeKind::Midpoint => {
                let node = s + (2 * k + 1) as f64 * 0.5 * h;
                if let Some(ap) = family.applier(node) {
                    let bound = h * ap.norm_1;
                    if bound > STIFFNESS_LIMIT {
                        return Err(Error::numerical(
                            "midpoint_step",
                            format!(
                                "step generator 1-norm {bound:.3e} exceeds stiffness \
                                 guard {STIFFNESS_LIMIT}"
                            ),
                        ));
                    }
                    let mut apply = |u: &Vector| Ok(ap.apply(u).scale_re(h));
                    crate::linalg::scaled_taylor_action(&mut apply, bound, &y)?
                } else {
                    let a = family.eval(node);
                    let bound = h * a.norm_1_upper();
                    if bound > STIFFNESS_LIMIT {
                        // The cheap bound overestimates by up to sqrt(2);
                        // let the dense path decide against the true norm.
                        let omega = a.scale_re(h);
                        guard_step_norm(&omega, "midpoint_step")?;
                        omega.expm_action(&y)?
                    } else {
                        let mut apply = |u: &Vector| Ok(a.mat_vec(u)?.scale_re(h));
                        crate::linalg::scaled_taylor_action(&mut apply, bound, &y)?
                    }
                }
            }
            SchemeKind::Magnus4 => magnus4_step_action(family, s + k as f64 * h, h, &y)?,
            SchemeKind::Exact => step_operator(family, kind, s, k, h)?.mat_vec(&y)?,
        };
        if !y.as_array().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::numerical(
                "propagate_action",
                format!("non-finite state at step {k} of {n}"),
            ));
        }
    }
    Ok(y)
}

/// One fourth-order step applied to a state without assembling the
/// commutator densely: `Ω u` costs four products per Taylor term. With
/// family-provided fast appliers the products are `A1 u`, `A2 u`,
/// `A2 (A1 u)`, `A1 (A2 u)`; the dense route rewrites `[A2, A1]` as
/// `[A2 - A1, A1]` so the difference matrix is formed once per step. The
/// generator-norm guard and the Taylor stage count use conservative
/// bounds; when a bound overshoots the guard (large steps) the dense path
/// decides against the true generator norm instead.
fn magnus4_step_action(
    family: &OperatorFamily,
    t_n: f64,
    h: f64,
    y: &Vector,
) -> Result<Vector> {
    let c_sym = 0.5 * h;
    let c_comm = 3.0f64.sqrt() * h * h / 12.0;

    if let (Some(ap1), Some(ap2)) = (
        family.applier(t_n + GAUSS_C1 * h),
        family.applier(t_n + GAUSS_C2 * h),
    ) {
        // The commutator bound uses ||A2 - A1|| <= ||A1|| + ||A2||; crude,
        // but it only sets the Taylor stage count and pre-screens the
        // guard, both of which tolerate overestimates.
        let (n1, n2) = (ap1.norm_1, ap2.norm_1);
        let bound = c_sym * (n1 + n2) + 2.0 * c_comm * (n1 + n2) * n1;
        if bound <= STIFFNESS_LIMIT {
            let mut apply = |u: &Vector| -> Result<Vector> {
                let p = ap1.apply(u);
                let q = ap2.apply(u);
                let r = ap2.apply(&p);
                let l = ap1.apply(&q);
                Ok(&(&p + &q).scale_re(c_sym) + &(&r - &l).scale_re(c_comm))
            };
            return crate::linalg::scaled_taylor_action(&mut apply, bound, y);
        }
    }

    let a1 = family.eval(t_n + GAUSS_C1 * h);
    let a2 = family.eval(t_n + GAUSS_C2 * h);
    let diff = &a2 - &a1;
    let n1 = a1.norm_1_upper();
    let bound = c_sym * (n1 + a2.norm_1_upper()) + 2.0 * c_comm * diff.norm_1_upper() * n1;
    if bound > STIFFNESS_LIMIT {
        let omega = magnus4_generator(family, t_n, h)?;
        guard_step_norm(&omega, "magnus4_step")?;
        return omega.expm_action(y);
    }
    let mut apply = |u: &Vector| -> Result<Vector> {
        let p = a1.mat_vec(u)?;
        let q = a2.mat_vec(u)?;
        let r = diff.mat_vec(&p)?;
        let l = a1.mat_vec(&(&q - &p))?;
        Ok(&(&p + &q).scale_re(c_sym) + &(&r - &l).scale_re(c_comm))
    };
    crate::linalg::scaled_taylor_action(&mut apply, bound, y)
}

/// Starting refinement: the smallest power of two keeping sampled step
/// generators comfortably inside the exponential's sweet spot.
fn initial_refinement(family: &OperatorFamily, s: f64, t: f64) -> usize {
    let mut norm: f64 = 0.0;
    for i in 0..5 {
        let tau = s + (t - s) * (i as f64 + 0.5) / 5.0;
        norm = norm.max(family.eval(tau).norm_1());
    }
    let mut n = 1usize;
    while (t - s) * norm / n as f64 > 2.0 && n < MAX_REFERENCE_STEPS {
        n *= 2;
    }
    n
}

/// Stand-in for the exact propagator `U(t, s)`: fourth-order propagation
/// with the step count doubled until consecutive refinements agree to
/// `target_error / 10` in operator norm. Returns the finer result; the
/// accepted step count is recorded in `scheme.n`.
pub fn reference_propagator(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    target_error: f64,
) -> Result<PropagatorResult> {
    let (result, _cert) = certified_reference(family, s, t, target_error, None)?;
    Ok(result)
}

/// Reference propagator that also reports the achieved doubling
/// certificate `||W_{2n} - W_n||`. The optional `signal` callback maps the
/// current fine iterate to the smallest error the caller is about to
/// measure against it; doubling then also stops once the certificate falls
/// 20x below that signal (successive certificates contract by at least
/// ~2^{-1/2} per doubling here, so the oracle's own error stays within a
/// few percent of the smallest measured signal). On rough families the
/// fourth-order scheme
/// converges only at the rough rate, so an absolute certificate near
/// machine precision may be unreachable while a certificate far below the
/// measured signal is cheap.
pub(crate) fn certified_reference(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    target_error: f64,
    signal: Option<&dyn Fn(&Matrix) -> Result<f64>>,
) -> Result<(PropagatorResult, f64)> {
    if !(target_error >= 1e-12 && target_error <= 1e-4) {
        return Err(Error::usage(format!(
            "reference_propagator: target_error must lie in [1e-12, 1e-4], got {target_error}"
        )));
    }
    if !(t > s) {
        return Err(Error::usage(format!("need t > s, got s={s}, t={t}")));
    }
    let mut n = initial_refinement(family, s, t);
    let mut coarse = propagate(family, s, t, n, SchemeKind::Magnus4)?;
    loop {
        if 2 * n > MAX_REFERENCE_STEPS {
            return Err(Error::numerical(
                "reference_propagator",
                format!(
                    "no convergence within {MAX_REFERENCE_STEPS} steps \
                     (problem too stiff for desk scale)"
                ),
            ));
        }
        n *= 2;
        let fine = propagate(family, s, t, n, SchemeKind::Magnus4)?;
        let cert = (&fine.w - &coarse.w).operator_norm()?;
        let mut threshold = target_error / 10.0;
        if let Some(signal) = signal {
            threshold = threshold.max(signal(&fine.w)? / 20.0);
        }
        if cert <= threshold {
            return Ok((fine, cert));
        }
        coarse = fine;
    }
}

/// Vector-mode counterpart of [`certified_reference`]: fourth-order stepped
/// actions with the certificate measured in the state 2-norm. Returns the
/// reference state, the accepted step count, and the certificate.
pub(crate) fn certified_reference_action(
    family: &OperatorFamily,
    s: f64,
    t: f64,
    x: &Vector,
    target_error: f64,
    signal: Option<&dyn Fn(&Vector) -> Result<f64>>,
) -> Result<(Vector, usize, f64)> {
    if !(target_error >= 1e-12 && target_error <= 1e-4) {
        return Err(Error::usage(format!(
            "reference action: target_error must lie in [1e-12, 1e-4], got {target_error}"
        )));
    }
    let mut n = initial_refinement(family, s, t);
    let mut coarse = propagate_action(family, s, t, n, x, SchemeKind::Magnus4)?;
    loop {
        if 2 * n > MAX_REFERENCE_STEPS {
            return Err(Error::numerical(
                "reference_propagator",
                format!(
                    "no convergence within {MAX_REFERENCE_STEPS} steps \
                     (problem too stiff for desk scale)"
                ),
            ));
        }
        n *= 2;
        let fine = propagate_action(family, s, t, n, x, SchemeKind::Magnus4)?;
        let cert = (&fine - &coarse).norm_2();
        let mut threshold = target_error / 10.0;
        if let Some(signal) = signal {
            threshold = threshold.max(signal(&fine)? / 20.0);
        }
        if cert <= threshold {
            return Ok((fine, n, cert));
        }
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{seeded_skew_hermitian, seeded_vector};
    use crate::operators::{
        family_affine_phase, family_constant, family_smooth_noncommuting,
        family_weierstrass, least_squares_slope,
    };
    use crate::C64;

    fn op_diff(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).operator_norm().unwrap()
    }

    #[test]
    fn midpoint_step_on_constant_family() {
        let m = seeded_skew_hermitian(4, 13, 0);
        let f = family_constant(m.clone()).unwrap();
        let got = midpoint_step(&f, 0.7, 0.25).unwrap();
        let want = m.scale_re(0.25).expm().unwrap();
        assert!(op_diff(&got, &want) <= 1e-14);
    }

    #[test]
    fn midpoint_step_on_affine_phase_is_exact() {
        let f = family_affine_phase();
        // A(1/2) = 1.5i, so one unit step gives exp(1.5 i).
        let got = midpoint_step(&f, 0.0, 1.0).unwrap();
        assert!((got.entry(0, 0) - C64::new(0.0, 1.5).exp()).norm() <= 1e-15);
    }

    #[test]
    fn midpoint_step_unfolds_its_definition_bitwise() {
        let f = family_weierstrass(4, 0.5, 7).unwrap();
        let got = midpoint_step(&f, 0.0, 0.1).unwrap();
        let want = f.eval(0.05).scale_re(0.1).expm().unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn midpoint_step_rejects_nonpositive_h() {
        let f = family_affine_phase();
        assert!(midpoint_step(&f, 0.0, 0.0).is_err());
        assert!(midpoint_step(&f, 0.0, -0.1).is_err());
    }

    #[test]
    fn stiffness_guard_trips() {
        let m = Matrix::diagonal(&[C64::new(0.0, 2000.0)]).unwrap();
        let f = family_constant(m).unwrap();
        match midpoint_step(&f, 0.0, 1.0) {
            Err(Error::Numerical { stage, .. }) => assert_eq!(stage, "midpoint_step"),
            other => panic!("expected stiffness failure, got {other:?}"),
        }
    }

    #[test]
    fn propagate_single_step_reduces_to_step() {
        let f = family_weierstrass(3, 0.5, 11).unwrap();
        let one = propagate(&f, 0.2, 0.9, 1, SchemeKind::Midpoint).unwrap();
        let step = midpoint_step(&f, 0.2, 0.7).unwrap();
        assert!(op_diff(&one.w, &step) == 0.0);
    }

    #[test]
    fn propagate_rejects_zero_steps_and_bad_interval() {
        let f = family_affine_phase();
        assert!(propagate(&f, 0.0, 1.0, 0, SchemeKind::Midpoint).is_err());
        assert!(propagate(&f, 1.0, 1.0, 4, SchemeKind::Midpoint).is_err());
        assert!(propagate(&f, 2.0, 1.0, 4, SchemeKind::Midpoint).is_err());
    }

    #[test]
    fn propagate_constant_family_collapses_to_single_exponential() {
        let m = seeded_skew_hermitian(5, 3, 0);
        let f = family_constant(m.clone()).unwrap();
        let want = m.scale_re(0.8).expm().unwrap();
        for &n in &[1usize, 5, 32] {
            let got = propagate(&f, 0.1, 0.9, n, SchemeKind::Midpoint).unwrap();
            assert!(op_diff(&got.w, &want) <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn propagate_affine_phase_exact_for_every_step_count() {
        // Scalar phases add and the midpoint sum telescopes to the exact
        // integral: sum_k h (1 + s + (2k+1) h/2) = (t-s) + (t^2-s^2)/2,
        // exactly, for every n (midpoint rule is exact on affine
        // integrands; the identity follows from sum_k (2k+1) = n^2).
        let f = family_affine_phase();
        let want = C64::new(0.0, 1.5).exp();
        for &n in &[1usize, 2, 3, 7, 64, 501, 1024] {
            let got = propagate(&f, 0.0, 1.0, n, SchemeKind::Midpoint).unwrap();
            assert!(
                (got.w.entry(0, 0) - want).norm() <= 1e-13,
                "n={n}: {:?}",
                got.w.entry(0, 0)
            );
        }
    }

    #[test]
    fn composition_law_on_aligned_grids() {
        let f = family_weierstrass(4, 0.5, 7).unwrap();
        let (s, t) = (0.0, 1.0);
        let r = 0.5 * (s + t);
        for &m in &[4usize, 16] {
            let whole = propagate(&f, s, t, 2 * m, SchemeKind::Midpoint).unwrap();
            let first = propagate(&f, s, r, m, SchemeKind::Midpoint).unwrap();
            let second = propagate(&f, r, t, m, SchemeKind::Midpoint).unwrap();
            let composed = second.w.try_mul(&first.w).unwrap();
            assert!(op_diff(&whole.w, &composed) <= 1e-13, "m={m}");
        }
    }

    #[test]
    fn unitarity_of_propagators_on_skew_hermitian_families() {
        let f = family_smooth_noncommuting(6, 21).unwrap();
        for &n in &[1usize, 16, 256] {
            let w = propagate(&f, 0.0, 1.0, n, SchemeKind::Midpoint).unwrap().w;
            let resid = &w.adjoint().try_mul(&w).unwrap() - &Matrix::identity(6);
            assert!(
                resid.operator_norm().unwrap() <= n as f64 * 1e-12,
                "n={n}"
            );
        }
    }

    #[test]
    fn magnus4_on_constant_family_is_exact() {
        let m = seeded_skew_hermitian(4, 17, 0);
        let f = family_constant(m.clone()).unwrap();
        let got = magnus4_step(&f, 0.3, 0.5).unwrap();
        let want = m.scale_re(0.5).expm().unwrap();
        assert!(op_diff(&got, &want) <= 1e-13);
    }

    #[test]
    fn magnus4_commuting_family_reduces_to_gauss_quadrature() {
        // A(t) = g(t) B: the commutator term vanishes and the step is
        // exp(B * (h/2)(g(c1) + g(c2))).
        let b = seeded_skew_hermitian(3, 5, 1);
        let b_eval = b.clone();
        let f = crate::operators::OperatorFamily::new(3, "commuting", move |t| {
            b_eval.scale_re((2.0 * t).cos())
        })
        .unwrap();
        let (t_n, h) = (0.2, 0.3);
        let g1 = (2.0 * (t_n + GAUSS_C1 * h)).cos();
        let g2 = (2.0 * (t_n + GAUSS_C2 * h)).cos();
        let want = b.scale_re(0.5 * h * (g1 + g2)).expm().unwrap();
        let got = magnus4_step(&f, t_n, h).unwrap();
        assert!(op_diff(&got, &want) <= 1e-13);
    }

    #[test]
    fn magnus4_one_step_error_scales_as_h5() {
        // Fine-substep oracle: the same scheme at 64 substeps has error
        // ~64^4 times smaller, far below the one-step error.
        let f = family_smooth_noncommuting(4, 29).unwrap();
        let t_n = 0.2;
        let mut pts = Vec::new();
        for j in 3..=9 {
            let h = 2.0f64.powi(-j);
            let oracle = propagate(&f, t_n, t_n + h, 64, SchemeKind::Magnus4)
                .unwrap()
                .w;
            let one = magnus4_step(&f, t_n, h).unwrap();
            let err = op_diff(&one, &oracle);
            // keep points above the floating measurement floor
            if err >= 1e-12 {
                pts.push((h.ln(), err.ln()));
            }
        }
        assert!(pts.len() >= 3, "only {} usable points", pts.len());
        let slope = least_squares_slope(&pts);
        assert!((4.6..=5.4).contains(&slope), "slope = {slope}");
    }

    #[test]
    fn reference_propagator_on_constant_family() {
        let m = seeded_skew_hermitian(4, 31, 0);
        let f = family_constant(m.clone()).unwrap();
        let want = m.scale_re(1.0).expm().unwrap();
        let got = reference_propagator(&f, 0.0, 1.0, 1e-10).unwrap();
        assert!(op_diff(&got.w, &want) <= 1e-10);
        assert_eq!(got.scheme.kind, SchemeKind::Magnus4);
    }

    #[test]
    fn reference_propagator_on_affine_phase() {
        let f = family_affine_phase();
        let got = reference_propagator(&f, 0.0, 1.0, 1e-10).unwrap();
        let want = C64::new(0.0, 1.5).exp();
        assert!((got.w.entry(0, 0) - want).norm() <= 1e-10);
    }

    #[test]
    fn reference_propagator_rejects_out_of_range_target() {
        let f = family_affine_phase();
        assert!(reference_propagator(&f, 0.0, 1.0, 1e-13).is_err());
        assert!(reference_propagator(&f, 0.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn reference_self_consistency_under_target_halving() {
        let f = family_smooth_noncommuting(4, 29).unwrap();
        let loose = reference_propagator(&f, 0.0, 1.0, 1e-6).unwrap();
        let tight = reference_propagator(&f, 0.0, 1.0, 5e-7).unwrap();
        assert!(op_diff(&loose.w, &tight.w) <= 1e-6);
    }

    #[test]
    fn reference_doubling_terminates_on_rough_family() {
        // Rough families limit the oracle's own convergence rate, so the
        // absolute certificate must stay commensurate with the measured
        // signal. Regression-locks the accepted step count at this target.
        let f = family_weierstrass(4, 0.5, 7).unwrap();
        let (result, cert) = certified_reference(&f, 0.0, 1.0, 1e-6, None).unwrap();
        assert!(cert <= 1e-7);
        assert_eq!(result.scheme.n, 65536, "accepted n changed: {}", result.scheme.n);
    }

    #[test]
    fn propagate_action_zero_vector() {
        let f = family_weierstrass(4, 0.5, 7).unwrap();
        let x = Vector::zeros(4);
        let y = propagate_action(&f, 0.0, 1.0, 8, &x, SchemeKind::Midpoint).unwrap();
        assert_eq!(y.norm_2(), 0.0);
    }

    #[test]
    fn propagate_action_constant_family() {
        let m = seeded_skew_hermitian(5, 41, 0);
        let f = family_constant(m.clone()).unwrap();
        let x = seeded_vector(5, 41, 9).normalized().unwrap();
        let want = m.scale_re(1.0).expm().unwrap().mat_vec(&x).unwrap();
        let got = propagate_action(&f, 0.0, 1.0, 16, &x, SchemeKind::Midpoint).unwrap();
        assert!((&want - &got).norm_2() <= 1e-11);
    }

    #[test]
    fn propagate_action_matches_dense_propagation() {
        let f = family_weierstrass(8, 0.5, 5).unwrap();
        let x = seeded_vector(8, 5, 9).normalized().unwrap();
        for kind in [SchemeKind::Midpoint, SchemeKind::Magnus4] {
            let dense = propagate(&f, 0.0, 1.0, 32, kind)
                .unwrap()
                .w
                .mat_vec(&x)
                .unwrap();
            let action = propagate_action(&f, 0.0, 1.0, 32, &x, kind).unwrap();
            assert!(
                (&dense - &action).norm_2() <= 1e-9 * dense.norm_2(),
                "{kind:?}"
            );
        }
    }

    #[test]
    fn propagate_action_dimension_mismatch() {
        let f = family_weierstrass(4, 0.5, 7).unwrap();
        let x = Vector::zeros(5);
        assert!(propagate_action(&f, 0.0, 1.0, 4, &x, SchemeKind::Midpoint).is_err());
    }

    #[test]
    fn exact_scheme_uses_closed_form() {
        let f = family_affine_phase();
        let got = propagate(&f, 0.0, 1.0, 10, SchemeKind::Exact).unwrap();
        assert!((got.w.entry(0, 0) - C64::new(0.0, 1.5).exp()).norm() <= 1e-14);

        let g = family_weierstrass(3, 0.5, 1).unwrap();
        assert!(propagate(&g, 0.0, 1.0, 4, SchemeKind::Exact).is_err());
    }

}
