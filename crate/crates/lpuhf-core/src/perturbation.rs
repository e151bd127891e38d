//! Constructive analytic ingredients: phase/positive splitting and
//! spatialization of diagonal systems, partial-product convergence data,
//! sign selection, projective-norm lower bounds, block compression with
//! off-diagonal decay, and the multiplicative defect of a linear map.

use crate::error::{Error, Result};
use crate::matalg::{diagonal_structure, delta_of_flat, kron, matrix_unit};
use crate::pnorm::{opnorm, Mat};
use crate::simsys::SimilaritySystem;
use crate::spaces::{vector_norm, AtomicMeasure, Exponent, LpVec};
use crate::spatial_check::{is_spatial_rep, SpatialRepCheck};
use crate::tensor_type::StageSpec;
use crate::{C64, MatF, TensorSumF};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sgn(z: C64) -> C64 {
    let m = z.norm();
    if m == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / m
    }
}

/// Split a diagonal invertible matrix as `s = β·w·u` with `β = min |α_j|`,
/// `w ≥ 1` diagonal, and `u` diagonal unimodular. The four norm identities
/// relating `w` to `R = ‖s‖·‖s⁻¹‖` are verified within 1e-12.
pub fn phase_positive_split(s: &MatF) -> Result<(f64, MatF, MatF)> {
    let alphas = s.diagonal_entries().ok_or_else(|| {
        Error::Unsupported("phase/positive splitting needs a diagonal matrix (see polar_split for p = 2)".into())
    })?;
    if alphas.iter().any(|a| a.norm() == 0.0) {
        return Err(Error::Input("diagonal matrix has a zero entry".into()));
    }
    let moduli: Vec<f64> = alphas.iter().map(|a| a.norm()).collect();
    let beta = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    let w = Mat::diag(
        &moduli
            .iter()
            .map(|&m| C64::new(m / beta, 0.0))
            .collect::<Vec<_>>(),
    );
    let u = Mat::diag(&alphas.iter().map(|&a| sgn(a)).collect::<Vec<_>>());

    let p = Exponent::new(2.0)?;
    let r = opnorm(s, &p).upper * opnorm(&s.inverse()?, &p).upper;
    let tol = 1e-12 * r.max(1.0);
    let w_inv = w.inverse()?;
    let identity = Mat::identity(s.rows());
    let checks = [
        (opnorm(&w, &p).upper, r),
        (opnorm(&w.sub(&identity)?, &p).upper, r - 1.0),
        (opnorm(&w_inv, &p).upper, 1.0),
        (opnorm(&w_inv.sub(&identity)?, &p).upper, 1.0 - 1.0 / r),
    ];
    for (got, want) in checks {
        if (got - want).abs() > tol {
            return Err(Error::Structure(format!(
                "split norm identity fails: got {got}, expected {want}"
            )));
        }
    }
    Ok((beta, w, u))
}

/// A spatialized diagonal system: an isometric system `tau` whose
/// representation is spatial, the similarity `w` with `ψ(x) = w·τ(x)·w⁻¹`,
/// and the verified diagnostics.
#[derive(Clone, Debug)]
pub struct Spatialization {
    tau: SimilaritySystem,
    w: MatF,
    r: f64,
    residual_sup: f64,
    w_norms: [f64; 4],
}

impl Spatialization {
    /// The isometric system of phases; its representation is spatial.
    pub fn tau(&self) -> &SimilaritySystem {
        &self.tau
    }

    /// Block-diagonal similarity with `ψ(x) = w·τ(x)·w⁻¹`.
    pub fn w(&self) -> &MatF {
        &self.w
    }

    /// `R_{p,S}` of the input system.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Largest residual `‖ψ(x) − w·τ(x)·w⁻¹‖` over matrix units.
    pub fn residual_sup(&self) -> f64 {
        self.residual_sup
    }

    /// `(‖w‖, ‖w−1‖, ‖w⁻¹‖, ‖w⁻¹−1‖)`.
    pub fn w_norms(&self) -> [f64; 4] {
        self.w_norms
    }
}

fn block_diagonal(blocks: &[MatF], domain: AtomicMeasure, codomain: AtomicMeasure) -> Result<MatF> {
    let n: usize = blocks.iter().map(Mat::rows).sum();
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    let mut offset = 0;
    for b in blocks {
        for r in 0..b.rows() {
            for c in 0..b.cols() {
                entries[(offset + r) * n + offset + c] = *b.get(r, c);
            }
        }
        offset += b.rows();
    }
    Mat::new(n, n, entries, domain, codomain)
}

/// Spatialize a diagonal system: split each `s(i)`, assemble the isometric
/// phase system `τ` and the block-diagonal `w`, and verify the conjugation
/// identity on matrix units together with the four `w`-norm identities.
///
/// The residual vanishes identically; the float evaluation reproduces zero
/// exactly when each entry's moduli are representable and the minimum
/// modulus is a power of two, which covers the corner families.
pub fn spatialize(s: &SimilaritySystem, p: &Exponent) -> Result<Spatialization> {
    if !s.diagonal() {
        return Err(Error::Unsupported(
            "spatialization needs a diagonal system (see polar_split for p = 2)".into(),
        ));
    }
    let d = s.d();
    let mut w_blocks = Vec::with_capacity(s.len());
    let mut tau_entries = Vec::with_capacity(s.len());
    for entry in s.entries() {
        let (_, w_i, u_i) = phase_positive_split(entry.s())?;
        w_blocks.push(w_i);
        tau_entries.push(crate::simsys::SystemEntry::new(entry.label(), entry.f(), u_i));
    }
    let tau = SimilaritySystem::new(d, tau_entries, true)?;

    let psi_id = s.rep_matrix(&Mat::identity(d))?;
    let w = block_diagonal(&w_blocks, psi_id.domain().clone(), psi_id.codomain().clone())?;
    let w_inv = w.inverse()?;

    let mut residual_sup = 0.0f64;
    let mut tau_units = Vec::with_capacity(d * d);
    for j in 1..=d {
        for k in 1..=d {
            let x = matrix_unit(d, j, k)?;
            let psi = s.rep_matrix(&x)?;
            let tau_x = tau.rep_matrix(&x)?;
            tau_units.push(tau_x.clone());
            let diff = psi.sub(&w.mul(&tau_x)?.mul(&w_inv)?)?;
            residual_sup = residual_sup.max(opnorm(&diff, p).upper);
        }
    }
    if residual_sup != 0.0 {
        return Err(Error::Structure(format!(
            "spatialization residual {residual_sup} is not zero"
        )));
    }
    match is_spatial_rep(&tau_units, d, p)? {
        SpatialRepCheck::Spatial { .. } => {}
        SpatialRepCheck::NotSpatial { reason } => {
            return Err(Error::Structure(format!(
                "phase representation fails the spatial test: {reason}"
            )))
        }
    }

    let r = s.p_bound(p)?.upper;
    let identity = Mat::identity(w.rows());
    let w_norms = [
        opnorm(&w, p).upper,
        opnorm(&w.sub(&identity)?, p).upper,
        opnorm(&w_inv, p).upper,
        opnorm(&w_inv.sub(&identity)?, p).upper,
    ];
    let expected = [r, r - 1.0, 1.0, 1.0 - 1.0 / r];
    for (got, want) in w_norms.iter().zip(expected) {
        if (got - want).abs() > 1e-12 * r.max(1.0) {
            return Err(Error::Structure(format!(
                "aggregate w-norm identity fails: got {got}, expected {want}"
            )));
        }
    }
    Ok(Spatialization { tau, w, r, residual_sup, w_norms })
}

fn hermitian_jacobi(h: &MatF) -> Result<(MatF, Vec<f64>)> {
    let n = h.rows();
    let mut a: Vec<Vec<C64>> = (0..n)
        .map(|r| (0..n).map(|c| *h.get(r, c)).collect())
        .collect();
    let mut q: Vec<Vec<C64>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| C64::new(if r == c { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let scale = h.max_abs_entry().max(1e-300);
    for _ in 0..100 {
        let mut off = 0.0f64;
        for r in 0..n {
            for c in (r + 1)..n {
                off = off.max(a[r][c].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for r in 0..n {
            for c in (r + 1)..n {
                let arc = a[r][c];
                if arc.norm() <= 1e-300 {
                    continue;
                }
                let phi = sgn(arc);
                let alpha = a[r][r].re;
                let beta = a[c][c].re;
                let zeta = (beta - alpha) / (2.0 * arc.norm());
                let t = if zeta >= 0.0 {
                    -1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = t * cos;
                for row in 0..n {
                    let x = a[row][r];
                    let y = a[row][c];
                    a[row][r] = x * cos + y * phi.conj() * sin;
                    a[row][c] = y * cos - x * phi * sin;
                }
                for col in 0..n {
                    let x = a[r][col];
                    let y = a[c][col];
                    a[r][col] = x * cos + y * phi * sin;
                    a[c][col] = y * cos - x * phi.conj() * sin;
                }
                for row in 0..n {
                    let x = q[row][r];
                    let y = q[row][c];
                    q[row][r] = x * cos + y * phi.conj() * sin;
                    q[row][c] = y * cos - x * phi * sin;
                }
            }
        }
    }
    let eigs: Vec<f64> = (0..n).map(|j| a[j][j].re).collect();
    let q_mat = Mat::from_fn(n, n, |r, c| q[r][c]);
    Ok((q_mat, eigs))
}

/// Polar decomposition `s = c·u` with `c = (s·s*)^{1/2}` positive definite
/// and `u` unitary. When `‖s⁻¹‖₂ = 1`, the spectral bounds
/// `‖c−1‖₂ ≤ ‖s‖₂−1` and `‖c⁻¹−1‖₂ ≤ ‖s‖₂−1` are asserted within 1e-9.
pub fn polar_split(s: &MatF) -> Result<(MatF, MatF)> {
    let n = s.rows();
    if n != s.cols() {
        return Err(Error::Input("polar decomposition needs a square matrix".into()));
    }
    let h = s.mul(&s.conj_transpose())?;
    let (q, eigs) = hermitian_jacobi(&h)?;
    let top = eigs.iter().copied().fold(0.0, f64::max);
    if eigs.iter().any(|&l| l <= 1e-14 * top.max(1.0)) {
        return Err(Error::Input("matrix is singular or too close to singular".into()));
    }
    let sqrt_diag = Mat::diag(
        &eigs
            .iter()
            .map(|&l| C64::new(l.sqrt(), 0.0))
            .collect::<Vec<_>>(),
    );
    let c = q.mul(&sqrt_diag)?.mul(&q.conj_transpose())?;
    let u = c.inverse()?.mul(s)?;

    let p2 = Exponent::new(2.0)?;
    let unitary_defect = u
        .mul(&u.conj_transpose())?
        .sub(&Mat::identity(n))?
        .max_abs_entry();
    if unitary_defect > 1e-9 {
        return Err(Error::Structure(format!(
            "polar factor is not unitary (defect {unitary_defect})"
        )));
    }
    let s_inv_norm = opnorm(&s.inverse()?, &p2);
    if (s_inv_norm.upper - 1.0).abs() <= 1e-9 {
        let s_norm = opnorm(s, &p2).upper;
        let identity = Mat::identity(n);
        let c_defect = opnorm(&c.sub(&identity)?, &p2).lower;
        let c_inv_defect = opnorm(&c.inverse()?.sub(&identity)?, &p2).lower;
        if c_defect > s_norm - 1.0 + 1e-9 || c_inv_defect > s_norm - 1.0 + 1e-9 {
            return Err(Error::Structure(format!(
                "polar spectral bounds fail: ‖c−1‖ = {c_defect}, ‖c⁻¹−1‖ = {c_inv_defect}, ‖s‖−1 = {}",
                s_norm - 1.0
            )));
        }
    }
    Ok((c, u))
}

/// Diagnostics for the truncated products `y_n = w₁⊗···⊗w_n⊗1`.
#[derive(Clone, Debug)]
pub struct PartialProductReport {
    differences: Vec<f64>,
    step_bounds: Vec<f64>,
    m1: f64,
    m2: f64,
    materialized: bool,
}

impl PartialProductReport {
    /// `‖y_n − y_{n−1}‖` per stage (certified upper bounds).
    pub fn differences(&self) -> &[f64] {
        &self.differences
    }

    /// `M₁·‖w_n − 1‖` per stage.
    pub fn step_bounds(&self) -> &[f64] {
        &self.step_bounds
    }

    /// `max_n Π_{k≤n} ‖w_k‖`.
    pub fn m1(&self) -> f64 {
        self.m1
    }

    /// `max_n Π_{k≤n} ‖w_k⁻¹‖`.
    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Whether the tensor products were materialized (and cross-checked)
    /// rather than taken from the diagonal closed form alone.
    pub fn materialized(&self) -> bool {
        self.materialized
    }
}

/// Compute the partial-product data for per-stage similarities `w_n` and
/// verify `‖y_n − y_{n−1}‖ ≤ M₁·‖w_n − 1‖` at every stage.
///
/// When the full tensor products fit under the dimension cap they are
/// materialized and the norms cross-checked against the monomial closed
/// form; otherwise every `w_n` must be diagonal and the closed form is used.
pub fn partial_products(w_list: &[MatF], spec: &StageSpec) -> Result<PartialProductReport> {
    if w_list.len() > spec.len() {
        return Err(Error::Input(format!(
            "{} similarities but only {} stages",
            w_list.len(),
            spec.len()
        )));
    }
    let p = spec.p();
    for (n, w) in w_list.iter().enumerate() {
        let d = spec.stages()[n].d();
        if w.rows() != d || w.cols() != d {
            return Err(Error::Input(format!(
                "similarity at stage {} is {}x{}, expected {d}x{d}",
                n + 1,
                w.rows(),
                w.cols()
            )));
        }
    }

    let mut w_norms = Vec::with_capacity(w_list.len());
    let mut w_inv_norms = Vec::with_capacity(w_list.len());
    let mut w_defects = Vec::with_capacity(w_list.len());
    for w in w_list {
        w_norms.push(opnorm(w, p).upper);
        w_inv_norms.push(opnorm(&w.inverse()?, p).upper);
        w_defects.push(opnorm(&w.sub(&Mat::identity(w.rows()))?, p).upper);
    }
    let mut m1 = 1.0f64;
    let mut m2 = 1.0f64;
    let mut prod1 = 1.0f64;
    let mut prod2 = 1.0f64;
    for (a, b) in w_norms.iter().zip(&w_inv_norms) {
        prod1 *= a;
        prod2 *= b;
        m1 = m1.max(prod1);
        m2 = m2.max(prod2);
    }

    let total: usize = w_list.iter().map(Mat::rows).product();
    let materialized = total <= crate::max_dim();
    let all_diagonal = w_list.iter().all(Mat::is_diagonal);
    if !materialized && !all_diagonal {
        return Err(Error::Capacity(format!(
            "product dimension {total} exceeds the cap and a similarity is not diagonal"
        )));
    }

    let mut closed_form = Vec::with_capacity(w_list.len());
    let mut prefix = 1.0f64;
    for n in 0..w_list.len() {
        closed_form.push(prefix * w_defects[n]);
        prefix *= w_norms[n];
    }

    let differences = if materialized {
        let mut diffs = Vec::with_capacity(w_list.len());
        let mut y_prev: MatF = Mat::identity(1);
        let mut y_prefix: MatF = Mat::identity(1);
        for (n, w) in w_list.iter().enumerate() {
            let next_prefix = kron(&y_prefix, w);
            let mut y_n = next_prefix.clone();
            let remaining: usize = w_list[n + 1..].iter().map(Mat::rows).product();
            y_n = kron(&y_n, &Mat::identity(remaining));
            let y_prev_full = kron(&y_prev, &Mat::identity(remaining * w.rows()));
            let diff = opnorm(&y_n.sub(&y_prev_full)?, p).upper;
            if all_diagonal && (diff - closed_form[n]).abs() > 1e-9 * closed_form[n].max(1.0) {
                return Err(Error::Structure(format!(
                    "materialized difference {diff} disagrees with the closed form {}",
                    closed_form[n]
                )));
            }
            diffs.push(diff);
            y_prev = next_prefix.clone();
            y_prefix = next_prefix;
        }
        diffs
    } else {
        closed_form
    };

    let step_bounds: Vec<f64> = w_defects.iter().map(|&defect| m1 * defect).collect();
    for (n, (&diff, &bound)) in differences.iter().zip(&step_bounds).enumerate() {
        if diff > bound + 1e-9 * bound.max(1.0) {
            return Err(Error::Structure(format!(
                "stage {} difference {diff} exceeds the bound {bound}",
                n + 1
            )));
        }
    }
    Ok(PartialProductReport { differences, step_bounds, m1, m2, materialized })
}

/// Which of the two candidate inequalities the sign selection achieved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionSide {
    /// `‖Σ (ζ_{j0}α_{j0})(ζ_kα_k)⁻¹ ξ_k‖ ≥ (γ/β)^{1/2}`.
    First,
    /// `‖Σ (ζ_{j0}α_{j0})⁻¹(ζ_kα_k) ξ_k‖ ≥ (γ/β)^{1/2}`.
    Second,
}

/// The unimodular selection achieving the lower bound.
#[derive(Clone, Debug)]
pub struct SignSelection {
    zeta: Vec<C64>,
    j0: usize,
    side: SelectionSide,
    achieved: f64,
    target: f64,
}

impl SignSelection {
    /// The unimodular coefficients.
    pub fn zeta(&self) -> &[C64] {
        &self.zeta
    }

    /// The distinguished index (0-based).
    pub fn j0(&self) -> usize {
        self.j0
    }

    /// Which candidate sum passed.
    pub fn side(&self) -> SelectionSide {
        self.side
    }

    /// The achieved candidate norm.
    pub fn achieved(&self) -> f64 {
        self.achieved
    }

    /// `(γ/β)^{1/2}` for the given coefficients.
    pub fn target(&self) -> f64 {
        self.target
    }
}

/// Select unimodular `ζ_j` and an index `j₀` so that one of the two
/// candidate sums over `ξ` has norm at least `(γ/β)^{1/2}`, where
/// `β = min |α_j|` and `γ = max |α_j|`. The first candidate is preferred
/// on ties.
pub fn sign_selection(
    alphas: &[C64],
    xis: &[LpVec],
    p: &Exponent,
    measure: &AtomicMeasure,
) -> Result<SignSelection> {
    if alphas.is_empty() || alphas.len() != xis.len() {
        return Err(Error::Input("need matching nonempty coefficient and vector lists".into()));
    }
    if alphas.iter().any(|a| a.norm() == 0.0) {
        return Err(Error::Input("zero coefficient in sign selection".into()));
    }
    let dim = xis[0].len();
    if xis.iter().any(|x| x.len() != dim) {
        return Err(Error::Input("vectors differ in dimension".into()));
    }
    let mut sum = LpVec::zeros(dim);
    for xi in xis {
        for (s, x) in sum.coords.iter_mut().zip(&xi.coords) {
            *s += x;
        }
    }
    let sum_norm = vector_norm(&sum, p, measure)?;
    if sum_norm == 0.0 {
        return Err(Error::Input("the vectors sum to zero".into()));
    }
    let xis: Vec<LpVec> = xis
        .iter()
        .map(|x| x.scale(C64::new(1.0 / sum_norm, 0.0)))
        .collect();
    let sum = sum.scale(C64::new(1.0 / sum_norm, 0.0));

    let omega = crate::spaces::norming_functional(&sum, p, measure)?;
    let moduli: Vec<f64> = alphas.iter().map(|a| a.norm()).collect();
    let beta = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    let gamma = moduli.iter().copied().fold(0.0, f64::max);
    let target = (gamma / beta).sqrt();
    let sigmas: Vec<C64> = xis
        .iter()
        .map(|xi| Ok(sgn(crate::spaces::pairing(&omega, xi, measure)?).conj()))
        .collect::<Result<Vec<_>>>()?;

    let j_max = moduli
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap();
    let j_min = moduli
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap();

    let candidate_norm = |coeffs: &[C64]| -> Result<f64> {
        let mut v = LpVec::zeros(dim);
        for (c, xi) in coeffs.iter().zip(&xis) {
            for (t, x) in v.coords.iter_mut().zip(&xi.coords) {
                *t += c * x;
            }
        }
        vector_norm(&v, p, measure)
    };

    let first_coeffs: Vec<C64> = (0..alphas.len())
        .map(|k| C64::new(moduli[j_max] / moduli[k], 0.0) * sigmas[j_max].conj() * sigmas[k])
        .collect();
    let second_coeffs: Vec<C64> = (0..alphas.len())
        .map(|k| C64::new(moduli[k] / moduli[j_min], 0.0) * sigmas[k] * sigmas[j_min].conj())
        .collect();
    let first = candidate_norm(&first_coeffs)?;
    let second = candidate_norm(&second_coeffs)?;

    let tol = 1e-9;
    let (side, j0, achieved) = if first >= target - tol && first >= second {
        (SelectionSide::First, j_max, first)
    } else if second >= target - tol {
        (SelectionSide::Second, j_min, second)
    } else if first >= target - tol {
        (SelectionSide::First, j_max, first)
    } else {
        return Err(Error::Structure(format!(
            "neither candidate reaches the bound: {first}, {second} < {target}"
        )));
    };
    let zeta: Vec<C64> = match side {
        SelectionSide::First => alphas
            .iter()
            .zip(&sigmas)
            .map(|(a, s)| sgn(*a).conj() * s.conj())
            .collect(),
        SelectionSide::Second => alphas
            .iter()
            .zip(&sigmas)
            .map(|(a, s)| sgn(*a).conj() * s)
            .collect(),
    };
    Ok(SignSelection { zeta, j0, side, achieved, target })
}

/// The projective-norm lower bound `sup_i ‖s(i)‖^{1/2}·‖s(i)⁻¹‖^{1/2}`
/// witnessed through the diagonal structure of `z` and sign selection
/// applied to the slices `Δ_A(z_{j,j})` with the trace-average functional.
pub fn diagonal_lower_bound(
    z: &TensorSumF,
    s: &SimilaritySystem,
    p: &Exponent,
) -> Result<f64> {
    if !s.diagonal() {
        return Err(Error::Unsupported("the lower bound needs a diagonal system".into()));
    }
    let structure = diagonal_structure(z, s.d())?;
    let d = structure.d();
    let m = structure.m();
    let slices: Vec<MatF> = (0..d)
        .map(|j| delta_of_flat(structure.block(j, j), m))
        .collect::<Result<Vec<_>>>()?;
    let trace_avg = |a: &MatF| -> C64 {
        (0..a.rows()).map(|k| *a.get(k, k)).sum::<C64>() / a.rows() as f64
    };

    let mut best = 0.0f64;
    for entry in s.entries() {
        let alphas = entry
            .s()
            .diagonal_entries()
            .ok_or_else(|| Error::Structure("diagonal flag on a non-diagonal entry".into()))?;
        let moduli: Vec<f64> = alphas.iter().map(|a| a.norm()).collect();
        let sigmas: Vec<C64> = slices.iter().map(|xi| sgn(trace_avg(xi)).conj()).collect();
        let j_max = moduli
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap();
        let j_min = moduli
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap();
        let combine = |coeffs: &[C64]| -> Result<f64> {
            let mut acc: MatF = Mat::zeros(m, m);
            for (c, xi) in coeffs.iter().zip(&slices) {
                acc = acc.add(&xi.scale(c))?;
            }
            Ok(opnorm(&acc, p).lower)
        };
        let first: Vec<C64> = (0..d)
            .map(|k| C64::new(moduli[j_max] / moduli[k], 0.0) * sigmas[j_max].conj() * sigmas[k])
            .collect();
        let second: Vec<C64> = (0..d)
            .map(|k| C64::new(moduli[k] / moduli[j_min], 0.0) * sigmas[k] * sigmas[j_min].conj())
            .collect();
        best = best.max(combine(&first)?).max(combine(&second)?);
    }
    Ok(best)
}

/// Block compression of a map given on the matrix-unit basis of M_{d₀}:
/// the compressed map `T(x) = Σ_l (e_{l,l}⊗1)·φ(x)·(e_{l,l}⊗1)` and the
/// measured off-diagonal decay against the bound `M·γ₀/γ`.
#[derive(Clone, Debug)]
pub struct BlockCompression {
    t_table: Vec<MatF>,
    offdiag_max: f64,
    offdiag_bound: f64,
}

impl BlockCompression {
    /// Images of the matrix units under the compressed map, row-major.
    pub fn t_table(&self) -> &[MatF] {
        &self.t_table
    }

    /// Largest measured off-diagonal block norm over the test elements.
    pub fn offdiag_max(&self) -> f64 {
        self.offdiag_max
    }

    /// The bound `M·γ₀/γ`.
    pub fn offdiag_bound(&self) -> f64 {
        self.offdiag_bound
    }
}

/// Compress `φ` to its diagonal blocks and verify the off-diagonal decay
/// `‖a_{l,m}‖ ≤ M·γ₀/γ` on the normalized matrix-unit test elements.
/// The caller certifies `M` as an upper bound for `‖φ‖` from the
/// `(p,γ₀)` norm to the `(p,γ)` norm.
pub fn block_compression(
    phi_table: &[MatF],
    d0: usize,
    d: usize,
    gamma: f64,
    gamma0: f64,
    m_cert: f64,
    p: &Exponent,
) -> Result<BlockCompression> {
    if phi_table.len() != d0 * d0 {
        return Err(Error::Input(format!(
            "expected {} basis images, got {}",
            d0 * d0,
            phi_table.len()
        )));
    }
    if gamma < 1.0 || gamma0 < 1.0 || m_cert < 0.0 {
        return Err(Error::Input("need γ, γ₀ ≥ 1 and M ≥ 0".into()));
    }
    let n = phi_table[0].rows();
    if n % d != 0 {
        return Err(Error::Input(format!(
            "image dimension {n} is not a multiple of the block count {d}"
        )));
    }
    let m = n / d;
    for img in phi_table {
        if img.rows() != n || img.cols() != n {
            return Err(Error::Input("basis images differ in shape".into()));
        }
    }

    let mut t_table = Vec::with_capacity(phi_table.len());
    for img in phi_table {
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for l in 0..d {
            for r in 0..m {
                for c in 0..m {
                    let row = l * m + r;
                    let col = l * m + c;
                    entries[row * n + col] = *img.get(row, col);
                }
            }
        }
        t_table.push(Mat::square(n, entries)?);
    }

    let domain_system = SimilaritySystem::gamma_corners(d0, gamma0)?;
    let bound = m_cert * gamma0 / gamma;
    let mut offdiag_max = 0.0f64;
    for j in 1..=d0 {
        for k in 1..=d0 {
            let unit: MatF = matrix_unit(d0, j, k)?;
            let unit_norm = domain_system.norm_ps(&unit, p)?.upper;
            let img = &phi_table[(j - 1) * d0 + (k - 1)];
            for l in 0..d {
                for mm in 0..d {
                    if l == mm {
                        continue;
                    }
                    let block = Mat::from_fn(m, m, |r, c| *img.get(l * m + r, mm * m + c));
                    let norm = opnorm(&block, p).upper / unit_norm;
                    if norm > bound + 1e-9 * bound.max(1.0) {
                        return Err(Error::Structure(format!(
                            "off-diagonal block ({l},{mm}) of the image of e_{{{j},{k}}} has norm {norm}, above {bound}"
                        )));
                    }
                    offdiag_max = offdiag_max.max(norm);
                }
            }
        }
    }
    Ok(BlockCompression { t_table, offdiag_max, offdiag_bound: bound })
}

/// Lower-bound estimate of the multiplicative defect `T^∨` of a linear map
/// on M_{d₀}, with the analytic Johnson bound when a nearby homomorphism
/// is supplied.
#[derive(Clone, Debug)]
pub struct DefectReport {
    defect_lower: f64,
    t_norm_upper: f64,
    distance_upper_bound: Option<f64>,
    johnson_bound: Option<f64>,
}

impl DefectReport {
    /// Certified lower bound for `‖T^∨‖`.
    pub fn defect_lower(&self) -> f64 {
        self.defect_lower
    }

    /// Crude certified upper bound for `‖T‖`.
    pub fn t_norm_upper(&self) -> f64 {
        self.t_norm_upper
    }

    /// `d(T)` upper bound from the exhibited homomorphism, if any.
    pub fn distance_upper_bound(&self) -> Option<f64> {
        self.distance_upper_bound
    }

    /// `(1 + ε + 2‖T‖)·ε` for the exhibited distance ε, if any.
    pub fn johnson_bound(&self) -> Option<f64> {
        self.johnson_bound
    }
}

fn apply_table(table: &[MatF], d0: usize, x: &MatF) -> Result<MatF> {
    let n = table[0].rows();
    let mut acc: MatF = Mat::zeros(n, n);
    for j in 0..d0 {
        for k in 0..d0 {
            let c = x.get(j, k);
            if c.norm() == 0.0 {
                continue;
            }
            acc = acc.add(&table[j * d0 + k].scale(&c))?;
        }
    }
    Ok(acc)
}

/// `T^∨(x, y) = T(xy) − T(x)·T(y)` for `T` given on the matrix units.
pub fn defect_at(t_table: &[MatF], d0: usize, x: &MatF, y: &MatF) -> Result<MatF> {
    let txy = apply_table(t_table, d0, &x.mul(y)?)?;
    let tx = apply_table(t_table, d0, x)?;
    let ty = apply_table(t_table, d0, y)?;
    txy.sub(&tx.mul(&ty)?)
}

/// Estimate `‖T^∨‖` from below over matrix-unit pairs and 100 seeded
/// random unit pairs; with a nearby homomorphism the Johnson bound
/// `‖T^∨‖ ≤ (1 + ε + 2‖T‖)·ε` is also checked.
pub fn multiplicative_defect(
    t_table: &[MatF],
    d0: usize,
    p: &Exponent,
    nearby: Option<&[MatF]>,
) -> Result<DefectReport> {
    if t_table.len() != d0 * d0 {
        return Err(Error::Input(format!(
            "expected {} basis images, got {}",
            d0 * d0,
            t_table.len()
        )));
    }
    let t_norm_upper: f64 = t_table.iter().map(|img| opnorm(img, p).upper).sum();

    let mut defect_lower = 0.0f64;
    let mut consider = |x: &MatF, y: &MatF| -> Result<()> {
        let x_norm = opnorm(x, p).upper;
        let y_norm = opnorm(y, p).upper;
        if x_norm == 0.0 || y_norm == 0.0 {
            return Ok(());
        }
        let value = opnorm(&defect_at(t_table, d0, x, y)?, p).lower;
        defect_lower = defect_lower.max(value / (x_norm * y_norm));
        Ok(())
    };
    for j in 1..=d0 {
        for k in 1..=d0 {
            for l in 1..=d0 {
                for mm in 1..=d0 {
                    consider(&matrix_unit(d0, j, k)?, &matrix_unit(d0, l, mm)?)?;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E1EC7);
    for _ in 0..100 {
        let mut random = || {
            Mat::from_fn(d0, d0, |_, _| {
                C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
            })
        };
        let x = random();
        let y = random();
        consider(&x, &y)?;
    }

    let (distance_upper_bound, johnson_bound) = match nearby {
        None => (None, None),
        Some(phi_table) => {
            if phi_table.len() != t_table.len() {
                return Err(Error::Input("homomorphism table has the wrong size".into()));
            }
            let eps: f64 = t_table
                .iter()
                .zip(phi_table)
                .map(|(t, phi)| Ok(opnorm(&t.sub(phi)?, p).upper))
                .sum::<Result<f64>>()?;
            let bound = (1.0 + eps + 2.0 * t_norm_upper) * eps;
            if defect_lower > bound + 1e-9 * bound.max(1.0) {
                return Err(Error::Structure(format!(
                    "defect estimate {defect_lower} exceeds the analytic bound {bound}"
                )));
            }
            (Some(eps), Some(bound))
        }
    };
    Ok(DefectReport { defect_lower, t_norm_upper, distance_upper_bound, johnson_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::ElementaryTensorSum;
    use crate::simsys::SystemEntry;
    use crate::tensor_type::Stage;

    fn p3() -> Exponent {
        Exponent::new(3.0).unwrap()
    }

    fn diag_system(entries: &[(&str, f64, Vec<f64>)]) -> SimilaritySystem {
        let d = entries[0].2.len();
        SimilaritySystem::new(
            d,
            entries
                .iter()
                .map(|(label, f, diag)| {
                    SystemEntry::new(
                        *label,
                        *f,
                        Mat::diag(&diag.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>()),
                    )
                })
                .collect(),
            true,
        )
        .unwrap()
    }

    #[test]
    fn split_examples() {
        let (beta, w, u) = phase_positive_split(&Mat::diag(&[
            C64::new(2.0, 0.0),
            C64::new(1.0, 0.0),
        ]))
        .unwrap();
        assert_eq!(beta, 1.0);
        assert_eq!(*w.get(0, 0), C64::new(2.0, 0.0));
        assert_eq!(*u.get(0, 0), C64::new(1.0, 0.0));
        assert_eq!(*u.get(1, 1), C64::new(1.0, 0.0));

        let (beta, w, u) = phase_positive_split(&Mat::diag(&[
            C64::new(0.0, 1.0),
            C64::new(0.0, 1.0),
        ]))
        .unwrap();
        assert_eq!(beta, 1.0);
        assert_eq!(*w.get(0, 0), C64::new(1.0, 0.0));
        assert_eq!(*u.get(0, 0), C64::new(0.0, 1.0));

        let (beta, w, u) = phase_positive_split(&Mat::diag(&[
            C64::new(1.0, 0.0),
            C64::new(-3.0, 0.0),
        ]))
        .unwrap();
        assert_eq!(beta, 1.0);
        assert_eq!(*w.get(1, 1), C64::new(3.0, 0.0));
        assert_eq!(*u.get(1, 1), C64::new(-1.0, 0.0));

        assert!(matches!(
            phase_positive_split(&Mat::square(
                2,
                vec![
                    C64::new(1.0, 0.0),
                    C64::new(1.0, 0.0),
                    C64::new(0.0, 0.0),
                    C64::new(1.0, 0.0)
                ]
            )
            .unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn spatialize_basic_is_identity() {
        let s = SimilaritySystem::basic(2).unwrap();
        let sp = spatialize(&s, &p3()).unwrap();
        assert_eq!(sp.residual_sup(), 0.0);
        assert_eq!(sp.r(), 1.0);
        assert_eq!(sp.w_norms(), [1.0, 0.0, 1.0, 0.0]);
        for entry in sp.tau().entries() {
            assert_eq!(entry.s().sub(&Mat::identity(2)).unwrap().max_abs_entry(), 0.0);
        }
    }

    #[test]
    fn spatialize_two_entry_system() {
        let s = diag_system(&[("1", 0.5, vec![1.0, 1.0]), ("s", 0.5, vec![1.0, 2.0])]);
        let sp = spatialize(&s, &p3()).unwrap();
        assert_eq!(sp.residual_sup(), 0.0);
        assert_eq!(sp.r(), 2.0);
        assert_eq!(sp.w_norms()[0], 2.0);
        assert_eq!(sp.w_norms()[1], 1.0);
    }

    #[test]
    fn spatialize_corner_inverse_norm() {
        let gamma = 4.0;
        let s = SimilaritySystem::gamma_corners(2, gamma).unwrap();
        let sp = spatialize(&s, &p3()).unwrap();
        assert_eq!(sp.residual_sup(), 0.0);
        assert!((sp.w_norms()[3] - (1.0 - 1.0 / gamma)).abs() <= 1e-12);
    }

    #[test]
    fn polar_split_examples() {
        let phase = 0.5f64.sqrt();
        let rotation = Mat::square(
            2,
            vec![
                C64::new(phase, 0.0),
                C64::new(-phase, 0.0),
                C64::new(phase, 0.0),
                C64::new(phase, 0.0),
            ],
        )
        .unwrap();
        let (c, u) = polar_split(&rotation).unwrap();
        assert!(c.sub(&Mat::identity(2)).unwrap().max_abs_entry() <= 1e-12);
        assert!(u.sub(&rotation).unwrap().max_abs_entry() <= 1e-12);

        let diag = Mat::diag(&[C64::new(2.0, 0.0), C64::new(1.0, 0.0)]);
        let (c, u) = polar_split(&diag).unwrap();
        assert!(c.sub(&diag).unwrap().max_abs_entry() <= 1e-12);
        assert!(u.sub(&Mat::identity(2)).unwrap().max_abs_entry() <= 1e-12);

        assert!(polar_split(&Mat::zeros(2, 2)).is_err());
    }

    #[test]
    fn polar_split_normalized_random_matrices() {
        let p2 = Exponent::new(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let raw: MatF = Mat::from_fn(3, 3, |_, _| {
                C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
            });
            let inv = match raw.inverse() {
                Ok(inv) => inv,
                Err(_) => continue,
            };
            let inv_norm = opnorm(&inv, &p2).upper;
            let s = raw.scale(&C64::new(inv_norm, 0.0));
            let (c, u) = polar_split(&s).unwrap();
            let defect = u.mul(&u.conj_transpose()).unwrap();
            assert!(defect.sub(&Mat::identity(3)).unwrap().max_abs_entry() <= 1e-8);
            assert!(c.sub(&c.conj_transpose()).unwrap().max_abs_entry() <= 1e-9);
        }
    }

    #[test]
    fn partial_products_identity_and_decay() {
        let stages: Vec<Stage> = (0..4)
            .map(|_| Stage::new(SimilaritySystem::basic(2).unwrap()))
            .collect();
        let spec = StageSpec::new(p3(), stages).unwrap();

        let ids: Vec<MatF> = (0..4).map(|_| Mat::identity(2)).collect();
        let report = partial_products(&ids, &spec).unwrap();
        assert!(report.differences().iter().all(|&x| x == 0.0));
        assert_eq!(report.m1(), 1.0);

        let ws: Vec<MatF> = (1..=4)
            .map(|n| Mat::diag(&[C64::new(1.0 + 0.5f64.powi(n), 0.0), C64::new(1.0, 0.0)]))
            .collect();
        let report = partial_products(&ws, &spec).unwrap();
        assert!(report.materialized());
        for w in report.differences().windows(2) {
            assert!(w[1] <= 0.75 * w[0]);
        }
    }

    #[test]
    fn partial_products_closed_form_matches_materialization() {
        let stages: Vec<Stage> = (0..10)
            .map(|_| Stage::new(SimilaritySystem::basic(2).unwrap()))
            .collect();
        let spec = StageSpec::new(p3(), stages).unwrap();
        let ws: Vec<MatF> = (1..=10)
            .map(|n| Mat::diag(&[C64::new(1.0 + 1.0 / n as f64, 0.0), C64::new(1.0, 0.0)]))
            .collect();
        let report = partial_products(&ws, &spec).unwrap();
        for (diff, bound) in report.differences().iter().zip(report.step_bounds()) {
            assert!(diff <= bound || (diff - bound).abs() <= 1e-9 * bound);
        }
    }

    #[test]
    fn sign_selection_examples() {
        let p = Exponent::new(2.0).unwrap();
        let m = AtomicMeasure::normalized_counting(2);
        let xi = vec![
            LpVec::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            LpVec::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
        ];

        let equal = sign_selection(
            &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            &xi,
            &p,
            &m,
        )
        .unwrap();
        assert!((equal.target() - 1.0).abs() <= 1e-12);
        assert!(equal.achieved() >= 1.0 - 1e-9);

        let split = sign_selection(
            &[C64::new(1.0, 0.0), C64::new(4.0, 0.0)],
            &xi,
            &p,
            &m,
        )
        .unwrap();
        assert_eq!(split.target(), 2.0);
        assert!(split.achieved() >= 2.0 - 1e-9);

        assert!(sign_selection(
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            &xi,
            &p,
            &m
        )
        .is_err());
    }

    #[test]
    fn sign_selection_random_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACE);
        for trial in 0..200 {
            let d = 2 + (trial % 4);
            let dim = 3;
            let p = match trial % 3 {
                0 => Exponent::new(1.0).unwrap(),
                1 => Exponent::new(2.0).unwrap(),
                _ => Exponent::new(3.0).unwrap(),
            };
            let m = AtomicMeasure::normalized_counting(dim);
            let alphas: Vec<C64> = (0..d)
                .map(|_| {
                    let modulus = 0.5 + rng.random::<f64>() * 4.0;
                    let angle = rng.random::<f64>() * std::f64::consts::TAU;
                    C64::new(modulus * angle.cos(), modulus * angle.sin())
                })
                .collect();
            let xis: Vec<LpVec> = (0..d)
                .map(|_| {
                    LpVec::new(
                        (0..dim)
                            .map(|_| {
                                C64::new(
                                    rng.random::<f64>() * 2.0 - 1.0,
                                    rng.random::<f64>() * 2.0 - 1.0,
                                )
                            })
                            .collect(),
                    )
                })
                .collect();
            let mut sum = LpVec::zeros(dim);
            for xi in &xis {
                for (s, x) in sum.coords.iter_mut().zip(&xi.coords) {
                    *s += x;
                }
            }
            if vector_norm(&sum, &p, &m).unwrap() < 1e-3 {
                continue;
            }
            let selection = sign_selection(&alphas, &xis, &p, &m).unwrap();
            assert!(selection.achieved() >= selection.target() - 1e-9);
        }
    }

    #[test]
    fn diagonal_lower_bound_flip_corners() {
        let p = Exponent::new(2.0).unwrap();
        for d in [2usize, 3] {
            for gamma in [1.0, 4.0, 9.0, 100.0] {
                let s = SimilaritySystem::gamma_corners(d, gamma).unwrap();
                let z = ElementaryTensorSum::flip_naive(d).unwrap();
                let bound = diagonal_lower_bound(&z, &s, &p).unwrap();
                assert!(
                    bound >= gamma.sqrt() - 1e-9,
                    "d = {d}, gamma = {gamma}: {bound}"
                );
            }
        }
    }

    #[test]
    fn diagonal_lower_bound_basic_is_trivial() {
        let p = p3();
        let s = SimilaritySystem::basic(2).unwrap();
        let z = ElementaryTensorSum::flip_naive(2).unwrap();
        let bound = diagonal_lower_bound(&z, &s, &p).unwrap();
        assert!(bound >= 1.0 - 1e-9);
    }

    #[test]
    fn block_compression_embedding_has_no_offdiagonal() {
        let d0 = 2;
        let d = 2;
        let p = p3();
        let phi_table: Vec<MatF> = (1..=d0)
            .flat_map(|j| (1..=d0).map(move |k| (j, k)))
            .map(|(j, k)| kron(&Mat::identity(d), &matrix_unit(d0, j, k).unwrap()))
            .collect();
        let result = block_compression(&phi_table, d0, d, 10.0, 1.0, 4.0, &p).unwrap();
        assert_eq!(result.offdiag_max(), 0.0);
        for (t, phi) in result.t_table().iter().zip(&phi_table) {
            assert_eq!(t.sub(phi).unwrap().max_abs_entry(), 0.0);
        }
    }

    fn mixing_conjugate_table(d0: usize, d: usize, angle: f64) -> Vec<MatF> {
        let m = d0;
        let n = d * m;
        let v: MatF = Mat::from_fn(n, n, |r, c| {
            if (r, c) == (m - 1, m - 1) || (r, c) == (m, m) {
                C64::new(angle.cos(), 0.0)
            } else if (r, c) == (m - 1, m) {
                C64::new(-angle.sin(), 0.0)
            } else if (r, c) == (m, m - 1) {
                C64::new(angle.sin(), 0.0)
            } else if r == c {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let v_inv = v.inverse().unwrap();
        (1..=d0)
            .flat_map(|j| (1..=d0).map(move |k| (j, k)))
            .map(|(j, k)| {
                v.mul(&kron(&Mat::identity(d), &matrix_unit(d0, j, k).unwrap()))
                    .unwrap()
                    .mul(&v_inv)
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn block_compression_decay_in_gamma() {
        let d0 = 2;
        let d = 2;
        let p = p3();
        let gamma0 = 1.0;
        let mut measured = Vec::new();
        for gamma in [10.0, 100.0, 1000.0] {
            let phi_table = mixing_conjugate_table(d0, d, 3.0 / gamma);
            let corner = SimilaritySystem::gamma_corners(d, gamma).unwrap();
            let mut m_cert = 0.0f64;
            for img in &phi_table {
                m_cert += corner.norm_ps(img, &p).unwrap().upper;
            }
            let result =
                block_compression(&phi_table, d0, d, gamma, gamma0, m_cert, &p).unwrap();
            assert!(result.offdiag_max() <= result.offdiag_bound() + 1e-9);
            assert!(result.offdiag_max() > 0.0);
            measured.push(result.offdiag_max());
        }
        assert!(measured[1] <= measured[0] * 0.2);
        assert!(measured[2] <= measured[1] * 0.2);
    }

    #[test]
    fn defect_of_homomorphism_vanishes() {
        let d0 = 2;
        let p = p3();
        let table: Vec<MatF> = (1..=d0)
            .flat_map(|j| (1..=d0).map(move |k| (j, k)))
            .map(|(j, k)| kron(&matrix_unit(d0, j, k).unwrap(), &Mat::identity(2)))
            .collect();
        let report = multiplicative_defect(&table, d0, &p, Some(&table)).unwrap();
        assert_eq!(report.defect_lower(), 0.0);
        assert_eq!(report.distance_upper_bound(), Some(0.0));
        assert_eq!(report.johnson_bound(), Some(0.0));
    }

    #[test]
    fn defect_of_perturbed_map_obeys_johnson() {
        let d0 = 2;
        let p = p3();
        let phi_table: Vec<MatF> = (1..=d0)
            .flat_map(|j| (1..=d0).map(move |k| (j, k)))
            .map(|(j, k)| kron(&matrix_unit(d0, j, k).unwrap(), &Mat::identity(2)))
            .collect();
        let mut t_table = phi_table.clone();
        let bump: MatF = Mat::from_fn(4, 4, |r, c| {
            if r == 0 && c == 3 {
                C64::new(0.01, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        t_table[0] = t_table[0].add(&bump).unwrap();
        let report = multiplicative_defect(&t_table, d0, &p, Some(&phi_table)).unwrap();
        assert!(report.defect_lower() > 0.0);
        assert!(report.defect_lower() <= report.johnson_bound().unwrap() + 1e-9);
    }

    #[test]
    fn defect_of_doubled_homomorphism() {
        let d0 = 2;
        let p = p3();
        let phi_table: Vec<MatF> = (1..=d0)
            .flat_map(|j| (1..=d0).map(move |k| (j, k)))
            .map(|(j, k)| kron(&matrix_unit(d0, j, k).unwrap(), &Mat::identity(2)))
            .collect();
        let doubled: Vec<MatF> = phi_table
            .iter()
            .map(|img| img.scale(&C64::new(2.0, 0.0)))
            .collect();
        let id2: MatF = Mat::identity(d0);
        let defect = defect_at(&doubled, d0, &id2, &id2).unwrap();
        let expected = apply_table(&phi_table, d0, &id2).unwrap().scale(&C64::new(-2.0, 0.0));
        assert_eq!(defect.sub(&expected).unwrap().max_abs_entry(), 0.0);

        let report = multiplicative_defect(&doubled, d0, &p, None).unwrap();
        assert!(report.defect_lower() >= 2.0 - 1e-9);
    }
}
