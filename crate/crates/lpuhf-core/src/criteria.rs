//! Isomorphism and amenability diagnostics for tensor-product-type stage
//! data: the series of (R_{p,S_n} − 1), its sum/product consistency bounds,
//! flip witnesses in doubled stage algebras, and ρ⊗ρ norms.
//!
//! Convergence of an infinite series is never inferred from a finite
//! prefix. A verdict other than `Undetermined` requires a registered
//! closed-form family; hand-entered stage lists always yield partial data
//! plus `Undetermined`.

use crate::error::{Error, Result};
use crate::matalg::{kron, scaled_flip};
use crate::pnorm::{Mat, NormInterval};
use crate::simsys::SimilaritySystem;
use crate::spaces::Exponent;
use crate::tensor_type::StageSpec;
use crate::MatF;
use num::ToPrimitive;

/// A registered closed-form stage family γ(n), n ≥ 1.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyRecipe {
    /// γ(n) = 1 + c·n^(−a).
    Power {
        /// Amplitude, c ≥ 0.
        c: f64,
        /// Decay exponent.
        a: f64,
    },
    /// γ(n) = 1 + c·qⁿ.
    Geometric {
        /// Amplitude, c ≥ 0.
        c: f64,
        /// Ratio, q > 0.
        q: f64,
    },
    /// γ(n) = 1 + c / (n·ln(n+1)^b).
    Log {
        /// Amplitude, c ≥ 0.
        c: f64,
        /// Logarithmic exponent.
        b: f64,
    },
}

impl FamilyRecipe {
    /// Validate parameter ranges (γ(n) ≥ 1 for all n).
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            FamilyRecipe::Power { c, a } => *c >= 0.0 && c.is_finite() && a.is_finite(),
            FamilyRecipe::Geometric { c, q } => {
                *c >= 0.0 && c.is_finite() && *q > 0.0 && q.is_finite()
            }
            FamilyRecipe::Log { c, b } => *c >= 0.0 && c.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("family parameters out of range: {self:?}")))
        }
    }

    /// γ(n) for a 1-based stage index.
    pub fn gamma(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            FamilyRecipe::Power { c, a } => 1.0 + c * nf.powf(-a),
            FamilyRecipe::Geometric { c, q } => 1.0 + c * q.powf(nf),
            FamilyRecipe::Log { c, b } => 1.0 + c / (nf * (nf + 1.0).ln().powf(*b)),
        }
    }

    /// The symbolic convergence verdict for Σ (γ(n) − 1) and its basis text.
    pub fn verdict(&self) -> (Verdict, String) {
        match self {
            FamilyRecipe::Power { c, .. } | FamilyRecipe::Geometric { c, .. } | FamilyRecipe::Log { c, .. }
                if *c == 0.0 =>
            {
                (
                    Verdict::ConvergentSpatial,
                    "zero amplitude: every term vanishes".into(),
                )
            }
            FamilyRecipe::Power { a, .. } => {
                if *a > 1.0 {
                    (
                        Verdict::ConvergentSpatial,
                        format!("power family: a = {a} > 1, the p-series converges"),
                    )
                } else {
                    (
                        Verdict::DivergentNonamenable,
                        format!("power family: a = {a} <= 1, the p-series diverges"),
                    )
                }
            }
            FamilyRecipe::Geometric { q, .. } => {
                if *q < 1.0 {
                    (
                        Verdict::ConvergentSpatial,
                        format!("geometric family: q = {q} < 1, geometric series converges"),
                    )
                } else {
                    (
                        Verdict::DivergentNonamenable,
                        format!("geometric family: q = {q} >= 1, terms do not vanish summably"),
                    )
                }
            }
            FamilyRecipe::Log { b, .. } => {
                if *b > 1.0 {
                    (
                        Verdict::ConvergentSpatial,
                        format!("log family: b = {b} > 1, the Bertrand series converges"),
                    )
                } else {
                    (
                        Verdict::DivergentNonamenable,
                        format!("log family: b = {b} <= 1, the Bertrand series diverges"),
                    )
                }
            }
        }
    }

    /// Canonical family name.
    pub fn name(&self) -> &'static str {
        match self {
            FamilyRecipe::Power { .. } => "power",
            FamilyRecipe::Geometric { .. } => "geometric",
            FamilyRecipe::Log { .. } => "log",
        }
    }
}

/// Classification verdict for a stage sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Σ (R−1) < ∞: the algebra is spatial (isomorphic to the spatial one).
    ConvergentSpatial,
    /// Σ (R−1) = ∞: the algebra is not amenable.
    DivergentNonamenable,
    /// Finite prefix only; no registered closed form.
    Undetermined,
}

impl Verdict {
    /// Canonical tag string.
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::ConvergentSpatial => "CONVERGENT_SPATIAL",
            Verdict::DivergentNonamenable => "DIVERGENT_NONAMENABLE",
            Verdict::Undetermined => "UNDETERMINED",
        }
    }
}

/// Prefix data of the series Σ (R_{p,S_n} − 1) with a classification verdict.
#[derive(Clone, Debug)]
pub struct SeriesReport {
    terms: Vec<f64>,
    partial_sums: Vec<f64>,
    partial_products: Vec<f64>,
    verdict: Verdict,
    verdict_basis: String,
}

impl SeriesReport {
    fn from_bounds(bounds: &[f64], verdict: Verdict, basis: String) -> Result<Self> {
        let mut terms = Vec::with_capacity(bounds.len());
        let mut partial_sums = Vec::with_capacity(bounds.len());
        let mut partial_products = Vec::with_capacity(bounds.len());
        let mut sum = 0.0;
        let mut product = 1.0;
        for &r in bounds {
            if !(r >= 1.0) {
                return Err(Error::Structure(format!("p-bound {r} is below 1")));
            }
            let term = r - 1.0;
            sum += term;
            product *= r;
            terms.push(term);
            partial_sums.push(sum);
            partial_products.push(product);
        }
        Ok(SeriesReport { terms, partial_sums, partial_products, verdict, verdict_basis: basis })
    }

    /// The terms R_{p,S_n} − 1.
    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    /// Partial sums of the terms.
    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    /// Partial products of the R values.
    pub fn partial_products(&self) -> &[f64] {
        &self.partial_products
    }

    /// The verdict.
    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    /// What the verdict rests on.
    pub fn verdict_basis(&self) -> &str {
        &self.verdict_basis
    }
}

/// Series report for a registered family of corner stages K_{d,γ(n)}:
/// R values are computed from the materialized systems (exact for these
/// diagonal stages), the verdict from the closed form.
pub fn series_report_family(
    family: &FamilyRecipe,
    d: usize,
    p: &Exponent,
    n: usize,
) -> Result<SeriesReport> {
    family.validate()?;
    let mut bounds = Vec::with_capacity(n);
    for k in 1..=n {
        let system = SimilaritySystem::gamma_corners(d, family.gamma(k))?;
        bounds.push(system.p_bound(p)?.lower);
    }
    let (verdict, basis) = family.verdict();
    SeriesReport::from_bounds(&bounds, verdict, basis)
}

/// Series report for hand-entered stages: partial data only, verdict
/// `Undetermined`.
pub fn series_report_stages(spec: &StageSpec) -> Result<SeriesReport> {
    let bounds = spec
        .stages()
        .iter()
        .map(|stage| Ok(stage.system().p_bound(spec.p())?.lower))
        .collect::<Result<Vec<_>>>()?;
    SeriesReport::from_bounds(&bounds, Verdict::Undetermined, "finite prefix only".into())
}

/// Verify the two-sided sum/product comparison for α_n ≥ 1 with
/// β_n = α_n − 1 and M = max β_n: termwise
/// `M⁻¹·log(M+1)·β_n ≤ log(1+β_n) ≤ β_n`, and at every prefix
/// `exp(M⁻¹·log(M+1)·Σβ) ≤ Πα ≤ exp(Σβ)`, within 1e-9.
pub fn sum_product_consistency(alphas: &[f64]) -> Result<bool> {
    for &a in alphas {
        if !(a >= 1.0) || !a.is_finite() {
            return Err(Error::Input(format!("series term {a} is not a real >= 1")));
        }
    }
    let betas: Vec<f64> = alphas.iter().map(|a| a - 1.0).collect();
    let m = betas.iter().copied().fold(0.0, f64::max);
    let factor = if m == 0.0 { 1.0 } else { (m + 1.0).ln() / m };
    let tol = 1e-9;
    for &b in &betas {
        let log_term = (1.0 + b).ln();
        if log_term > b + tol || factor * b > log_term + tol {
            return Ok(false);
        }
    }
    let mut sum = 0.0;
    let mut product = 1.0;
    for (a, b) in alphas.iter().zip(&betas) {
        sum += b;
        product *= a;
        let upper = sum.exp();
        let lower = (factor * sum).exp();
        let scale = product.max(1.0);
        if product > upper + tol * scale || lower > product + tol * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The flip witness `v_n = r_d(n)·y_{r_d(n)}` in the doubled stage algebra,
/// with its doubled-system norm and the exact involution `v·v = 1`.
#[derive(Clone, Debug)]
pub struct FlipWitness {
    n: usize,
    v: MatF,
    norm: NormInterval,
}

impl FlipWitness {
    /// Stage index.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The witness matrix, of dimension r_d(n)².
    pub fn v(&self) -> &MatF {
        &self.v
    }

    /// Its norm in the doubled combined system.
    pub fn norm(&self) -> &NormInterval {
        &self.norm
    }
}

/// The doubled stage system: combined(0,n) tensored with itself.
pub fn doubled_system(spec: &StageSpec, n: usize) -> Result<SimilaritySystem> {
    let combined = spec.combined_system(0, n)?;
    combined.tensor(&combined)
}

/// Compute the flip witness at stage `n` and verify its involution exactly.
pub fn flip_witness(spec: &StageSpec, n: usize) -> Result<FlipWitness> {
    let r = spec
        .r_d(n)?
        .to_usize()
        .ok_or_else(|| Error::Capacity("r_d(n) exceeds addressable size".into()))?;
    crate::check_dim(r.checked_mul(r).ok_or_else(|| {
        Error::Capacity("doubled stage dimension overflows".into())
    })?)?;
    let v: MatF = scaled_flip(r);
    let square = v.mul(&v)?;
    if square != Mat::<crate::C64>::identity(r * r) {
        return Err(Error::Structure("flip witness fails to be an involution".into()));
    }
    let doubled = doubled_system(spec, n)?;
    let norm = doubled.norm_ps(&v, spec.p())?;
    Ok(FlipWitness { n, v, norm })
}

/// `‖v_n·(σ(a)⊗σ(b))·v_n⁻¹ − σ(b)⊗σ(a)‖` in the doubled stage norm.
///
/// The conjugation by the scaled flip relocates entries without arithmetic,
/// so the residual is exactly zero whenever `a` and `b` come from a stage
/// `m ≤ n`; the function still computes the norm rather than assuming it.
pub fn flip_conjugation_residual(
    spec: &StageSpec,
    m: usize,
    n: usize,
    a: &MatF,
    b: &MatF,
) -> Result<f64> {
    let witness = flip_witness(spec, n)?;
    let a_up = spec.sigma_embed(a, m, n)?;
    let b_up = spec.sigma_embed(b, m, n)?;
    let v = witness.v();
    let conjugated = v.mul(&kron(&a_up, &b_up))?.mul(v)?;
    let diff = conjugated.sub(&kron(&b_up, &a_up))?;
    let doubled = doubled_system(spec, n)?;
    Ok(doubled.norm_ps(&diff, spec.p())?.upper)
}

/// The norm of `ρ ⊗ ρ` for a diagonal system: exactly `R_{p,S}²`,
/// cross-checked against the tensored system for d ≤ 3.
pub fn rho_tensor_norm(s: &SimilaritySystem, p: &Exponent) -> Result<NormInterval> {
    if !s.diagonal() {
        return Err(Error::Unsupported(
            "rho tensor norms take the closed form for diagonal systems only".into(),
        ));
    }
    let bound = s.p_bound(p)?;
    let squared = bound.squared();
    if s.d() <= 3 {
        let tensored = s.tensor(s)?;
        let direct = tensored.p_bound(p)?;
        let scale = squared.upper.max(1.0);
        if direct.lower > squared.upper + 1e-9 * scale
            || squared.lower > direct.upper + 1e-9 * scale
        {
            return Err(Error::Structure(format!(
                "tensored p-bound [{}, {}] disagrees with the squared bound [{}, {}]",
                direct.lower, direct.upper, squared.lower, squared.upper
            )));
        }
    }
    Ok(squared)
}
