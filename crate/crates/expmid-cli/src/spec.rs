//! The JSON experiment-specification schema and its resolution into
//! library objects. Validation failures carry the offending field's name.

use serde::{Deserialize, Serialize};

use expmid::linalg::{
    seeded_hermitian_unit, seeded_skew_hermitian, seeded_vector, Matrix, Vector,
};
use expmid::operators::{
    family_affine_phase, family_constant, family_divergence_form_1d,
    family_lipschitz_sine, family_schrodinger_1d, family_smooth_noncommuting,
    family_weierstrass, gaussian_fourier_vector, gaussian_grid_vector,
    weierstrass_holder_const, weierstrass_sum, weierstrass_sup, OperatorFamily,
    Regularity,
};
use expmid::{integrators::SchemeKind, C64};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub family: FamilySpec,
    pub interval: Interval,
    pub scheme: Scheme,
    pub analysis: Analysis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hs: Option<Vec<f64>>,
    pub norm: Norm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_vector: Option<InitialVector>,
    /// Growth rate for the stability discount; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Panel counts for the variation-of-constants quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_nodes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<CoefficientSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Midpoint,
    Magnus4,
}

impl Scheme {
    pub fn kind(self) -> SchemeKind {
        match self {
            Scheme::Midpoint => SchemeKind::Midpoint,
            Scheme::Magnus4 => SchemeKind::Magnus4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    GlobalOrder,
    LocalOrder,
    Stability,
    Voc,
    BoundCheck,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::GlobalOrder => "global_order",
            Analysis::LocalOrder => "local_order",
            Analysis::Stability => "stability",
            Analysis::Voc => "voc",
            Analysis::BoundCheck => "bound_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    Operator,
    Vector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialVector {
    /// Normalized Gaussian bump in the family's own coordinates.
    SmoothGaussian,
    /// Seeded uniform complex entries, normalized.
    Random { seed: u64 },
    /// Standard basis vector.
    Basis { index: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `b = 0`.
    Zero,
    /// `b(x, t) = value`.
    Constant { value: f64 },
    /// `b(x, t) = w_alpha(t) cos(x)`; alpha-Hölder in time.
    WAlphaCos { alpha: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// `a = 1`.
    One,
    /// `a(x, t) = 1 + amplitude * (w_alpha(t) / sup|w_alpha|) cos(x)`,
    /// elliptic with floor `1 - amplitude`.
    OnePlusWCos { alpha: f64, amplitude: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    /// `B(t) = amplitude * cos(frequency t) * iH` with `H` seeded
    /// Hermitian of unit norm.
    Cosine {
        frequency: f64,
        amplitude: f64,
        seed: u64,
    },
    /// Constant seeded skew-Hermitian perturbation scaled by `amplitude`.
    Constant { amplitude: f64, seed: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv_path: String,
    pub json_path: String,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentSpec {
    /// Cross-field validation; each failure names the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.interval.s < self.interval.t) {
            return Err(config_err(format!(
                "interval: need s < t, got s={}, t={}",
                self.interval.s, self.interval.t
            )));
        }
        if self.output.csv_path.is_empty() {
            return Err(config_err("output.csv_path: must be nonempty"));
        }
        if self.output.json_path.is_empty() {
            return Err(config_err("output.json_path: must be nonempty"));
        }

        match self.analysis {
            Analysis::GlobalOrder | Analysis::BoundCheck => {
                let ns = self
                    .ns
                    .as_ref()
                    .ok_or_else(|| {
                        config_err(format!(
                            "ns: required for analysis '{}'",
                            self.analysis.name()
                        ))
                    })?;
                validate_ns(ns)?;
                if self.analysis == Analysis::BoundCheck && self.norm == Norm::Vector {
                    return Err(config_err(
                        "norm: bound_check is defined in the operator norm",
                    ));
                }
                if self.analysis == Analysis::BoundCheck && self.scheme != Scheme::Midpoint {
                    return Err(config_err(
                        "scheme: bound_check is defined for the midpoint scheme",
                    ));
                }
            }
            Analysis::LocalOrder => {
                let hs = self.hs.as_ref().ok_or_else(|| {
                    config_err("hs: required for analysis 'local_order'")
                })?;
                if hs.is_empty() {
                    return Err(config_err("hs: must be nonempty"));
                }
                if !hs.iter().all(|&h| h > 0.0) {
                    return Err(config_err("hs: step sizes must be positive"));
                }
                if !hs.windows(2).all(|w| w[0] > w[1]) {
                    return Err(config_err("hs: must be strictly decreasing"));
                }
                if self.scheme != Scheme::Midpoint {
                    return Err(config_err(
                        "scheme: local_order is defined for the midpoint scheme",
                    ));
                }
            }
            Analysis::Stability => {
                let ns = self.ns.as_ref().ok_or_else(|| {
                    config_err("ns: required for analysis 'stability'")
                })?;
                if ns.len() != 1 {
                    return Err(config_err(
                        "ns: stability takes exactly one substep count",
                    ));
                }
                if ns[0] == 0 {
                    return Err(config_err("ns: substep count must be at least 1"));
                }
            }
            Analysis::Voc => {
                let panels = self.quad_nodes.as_ref().ok_or_else(|| {
                    config_err("quad_nodes: required for analysis 'voc'")
                })?;
                if panels.is_empty() {
                    return Err(config_err("quad_nodes: must be nonempty"));
                }
                if !panels.iter().all(|&q| q >= 2) {
                    return Err(config_err("quad_nodes: each panel count must be >= 2"));
                }
                if !panels.windows(2).all(|w| w[0] < w[1]) {
                    return Err(config_err("quad_nodes: must be strictly increasing"));
                }
                if self.perturbation.is_none() {
                    return Err(config_err("perturbation: required for analysis 'voc'"));
                }
            }
        }

        if self.norm == Norm::Vector && self.initial_vector.is_none() {
            return Err(config_err(
                "initial_vector: required for vector-norm experiments",
            ));
        }
        Ok(())
    }

    /// Seed recorded in the result document.
    pub fn recorded_seed(&self) -> u64 {
        self.family.seed.unwrap_or(0)
    }

    pub fn resolve_family(&self) -> Result<OperatorFamily, CliError> {
        let f = &self.family;
        let need_dim = || {
            f.dim.ok_or_else(|| {
                config_err(format!("family.dim: required for family '{}'", f.label))
            })
        };
        let need_seed = || {
            f.seed.ok_or_else(|| {
                config_err(format!("family.seed: required for family '{}'", f.label))
            })
        };
        let need_alpha = || -> Result<f64, CliError> {
            let alpha = f.alpha.ok_or_else(|| {
                config_err(format!("family.alpha: required for family '{}'", f.label))
            })?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(config_err(format!(
                    "family.alpha: must lie in (0, 1], got {alpha}"
                )));
            }
            Ok(alpha)
        };

        match f.label.as_str() {
            "constant" => {
                let m = seeded_skew_hermitian(need_dim()?, need_seed()?, 0);
                family_constant(m).map_err(CliError::from)
            }
            "affine_phase" => Ok(family_affine_phase()),
            "weierstrass" => family_weierstrass(need_dim()?, need_alpha()?, need_seed()?)
                .map_err(CliError::from),
            "lipschitz_sine" => {
                family_lipschitz_sine(need_dim()?, need_seed()?).map_err(CliError::from)
            }
            "smooth_noncommuting" => family_smooth_noncommuting(need_dim()?, need_seed()?)
                .map_err(CliError::from),
            "schrodinger_1d" => {
                let n_modes = f.n_modes.ok_or_else(|| {
                    config_err("family.n_modes: required for family 'schrodinger_1d'")
                })?;
                let potential = f.potential.as_ref().ok_or_else(|| {
                    config_err("family.potential: required for family 'schrodinger_1d'")
                })?;
                resolve_schrodinger(n_modes, potential)
            }
            "divergence_form_1d" => {
                let n_grid = f.n_grid.ok_or_else(|| {
                    config_err("family.n_grid: required for family 'divergence_form_1d'")
                })?;
                let coefficient = f.coefficient.as_ref().ok_or_else(|| {
                    config_err(
                        "family.coefficient: required for family 'divergence_form_1d'",
                    )
                })?;
                resolve_divergence(n_grid, coefficient)
            }
            other => Err(config_err(format!("family.label: unknown family '{other}'"))),
        }
    }

    pub fn resolve_initial_vector(
        &self,
        family: &OperatorFamily,
    ) -> Result<Option<Vector>, CliError> {
        let Some(spec) = &self.initial_vector else {
            return Ok(None);
        };
        let dim = family.dim();
        let v = match spec {
            InitialVector::SmoothGaussian => {
                if self.family.label == "schrodinger_1d" {
                    gaussian_fourier_vector(dim)?
                } else {
                    gaussian_grid_vector(dim)?
                }
            }
            InitialVector::Random { seed } => {
                seeded_vector(dim, *seed, 100).normalized()?
            }
            InitialVector::Basis { index } => {
                if *index >= dim {
                    return Err(config_err(format!(
                        "initial_vector.index: {index} out of range for dimension {dim}"
                    )));
                }
                Vector::basis(dim, *index)?
            }
        };
        Ok(Some(v))
    }

    pub fn resolve_perturbation(
        &self,
        family: &OperatorFamily,
    ) -> Result<Box<dyn Fn(f64) -> Matrix + Send + Sync>, CliError> {
        let spec = self
            .perturbation
            .as_ref()
            .ok_or_else(|| config_err("perturbation: required for analysis 'voc'"))?;
        let dim = family.dim();
        match spec {
            PerturbationSpec::Cosine {
                frequency,
                amplitude,
                seed,
            } => {
                let base = seeded_hermitian_unit(dim, *seed, 2).scale(C64::new(0.0, 1.0));
                let (freq, amp) = (*frequency, *amplitude);
                Ok(Box::new(move |t| base.scale_re(amp * (freq * t).cos())))
            }
            PerturbationSpec::Constant { amplitude, seed } => {
                let base = seeded_skew_hermitian(dim, *seed, 2).scale_re(*amplitude);
                Ok(Box::new(move |_t| base.clone()))
            }
        }
    }
}

fn validate_ns(ns: &[usize]) -> Result<(), CliError> {
    if ns.is_empty() {
        return Err(config_err("ns: must be nonempty"));
    }
    if ns[0] == 0 {
        return Err(config_err("ns: substep counts must be at least 1"));
    }
    if !ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(config_err("ns: must be strictly increasing"));
    }
    Ok(())
}

fn resolve_schrodinger(
    n_modes: usize,
    potential: &PotentialSpec,
) -> Result<OperatorFamily, CliError> {
    match potential {
        PotentialSpec::Zero => {
            family_schrodinger_1d(n_modes, |_x, _t| 0.0, None).map_err(CliError::from)
        }
        PotentialSpec::Constant { value } => {
            let c = *value;
            family_schrodinger_1d(n_modes, move |_x, _t| c, None).map_err(CliError::from)
        }
        PotentialSpec::WAlphaCos { alpha } => {
            let alpha = *alpha;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(config_err(format!(
                    "family.potential.alpha: must lie in (0, 1], got {alpha}"
                )));
            }
            // The multiplication operator by cos(x) has unit norm, so the
            // potential's Hölder data transfers directly.
            let reg = Regularity {
                alpha,
                holder_const: weierstrass_holder_const(alpha),
                interval: (f64::NEG_INFINITY, f64::INFINITY),
            };
            family_schrodinger_1d(
                n_modes,
                move |x, t| weierstrass_sum(alpha, t) * x.cos(),
                Some(reg),
            )
            .map_err(CliError::from)
        }
    }
}

fn resolve_divergence(
    n_grid: usize,
    coefficient: &CoefficientSpec,
) -> Result<OperatorFamily, CliError> {
    match coefficient {
        CoefficientSpec::One => {
            family_divergence_form_1d(n_grid, |_x, _t| 1.0, 0.9, None)
                .map_err(CliError::from)
        }
        CoefficientSpec::OnePlusWCos { alpha, amplitude } => {
            let (alpha, amplitude) = (*alpha, *amplitude);
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(config_err(format!(
                    "family.coefficient.alpha: must lie in (0, 1], got {alpha}"
                )));
            }
            if !(amplitude > 0.0 && amplitude < 1.0) {
                return Err(config_err(format!(
                    "family.coefficient.amplitude: must lie in (0, 1), got {amplitude}"
                )));
            }
            let sup = weierstrass_sup(alpha);
            let dx = 2.0 * std::f64::consts::PI / n_grid as f64;
            // ||A(t) - A(s)|| <= amplitude |w(t)-w(s)|/sup * ||D- diag(cos) D+||/dx^2,
            // and the difference stencil factors are bounded by 2 each.
            let reg = Regularity {
                alpha,
                holder_const: amplitude * weierstrass_holder_const(alpha) / sup * 4.0
                    / (dx * dx),
                interval: (f64::NEG_INFINITY, f64::INFINITY),
            };
            family_divergence_form_1d(
                n_grid,
                move |x, t| 1.0 + amplitude * (weierstrass_sum(alpha, t) / sup) * x.cos(),
                1.0 - amplitude,
                Some(reg),
            )
            .map_err(CliError::from)
        }
    }
}

/// Byte-stable listing of the built-in families.
pub fn list_families() -> String {
    let mut out = String::new();
    let families = [
        (
            "constant",
            "dim, seed",
            "autonomous A(t) = A with seeded skew-Hermitian A; exactness oracle",
        ),
        (
            "affine_phase",
            "(none)",
            "scalar A(t) = i(1+t); closed-form propagator, midpoint rule exact",
        ),
        (
            "weierstrass",
            "dim, alpha, seed",
            "A(t) = A0 + w_alpha(t) B, lacunary cosine series; alpha-Hölder at every scale",
        ),
        (
            "lipschitz_sine",
            "dim, seed",
            "A(t) = A0 + |sin t| B, skew-Hermitian; Lipschitz (alpha = 1) regularity",
        ),
        (
            "smooth_noncommuting",
            "dim, seed",
            "A(t) = A0 + sin(t) B with [A0, B] != 0; classical-order reference problem",
        ),
        (
            "schrodinger_1d",
            "n_modes, potential",
            "periodic free particle plus bounded real potential, Fourier coordinates; skew-Hermitian",
        ),
        (
            "divergence_form_1d",
            "n_grid, coefficient",
            "periodic divergence-form generator i d/dx a(x,t) d/dx, second-order stencil; skew-Hermitian",
        ),
    ];
    for (label, params, role) in families {
        out.push_str(&format!("{label}\n  parameters: {params}\n  {role}\n"));
    }
    out
}
