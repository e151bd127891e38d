//! Systems of d-similarities: the p-bound R_{p,S}, the associated
//! representations, matrix-unit norm tables for diagonal systems, tensor
//! products of systems, the corner family for K_{d,γ}, and subsystem
//! restriction.
//!
//! A system is a finite ordered index of invertible matrices with positive
//! weights summing to one. The weights fix the measure of the represented
//! space and never influence a norm value; every norm here is a supremum of
//! per-index conjugation norms, computed blockwise.

use crate::error::{Error, Result};
use crate::matalg::kron;
use crate::pnorm::{opnorm, Mat, NormInterval};
use crate::spaces::{AtomicMeasure, Exponent, NORMALIZED_TOL};
use crate::{C64, MatF};

/// One indexed similarity: a label, a weight, and an invertible matrix.
#[derive(Clone, Debug)]
pub struct SystemEntry {
    label: String,
    f: f64,
    s: MatF,
}

impl SystemEntry {
    /// Entry from label, weight, and matrix.
    pub fn new(label: impl Into<String>, f: f64, s: MatF) -> Self {
        SystemEntry { label: label.into(), f, s }
    }

    /// Index label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Weight.
    pub fn f(&self) -> f64 {
        self.f
    }

    /// Similarity matrix.
    pub fn s(&self) -> &MatF {
        &self.s
    }
}

/// Invariant violation found by [`SimilaritySystem::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `DIM`: dimension below 2.
    DimensionTooSmall(usize),
    /// `ONE`: the identity matrix is not in the range of `s`.
    MissingIdentity,
    /// `INV`: the named similarity is singular.
    NotInvertible(String),
    /// `SUM`: weights do not sum to 1 within 1e-12.
    WeightSum(f64),
    /// `POS`: the named weight is not strictly positive and finite.
    NonpositiveWeight(String),
    /// `DIAG`: the diagonal flag is set but the named similarity is not diagonal.
    NotDiagonal(String),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DimensionTooSmall(d) => write!(fmt, "DIM: dimension {d} is below 2"),
            Violation::MissingIdentity => {
                write!(fmt, "ONE: the identity matrix is not in the range of s")
            }
            Violation::NotInvertible(l) => write!(fmt, "INV: similarity '{l}' is singular"),
            Violation::WeightSum(s) => {
                write!(fmt, "SUM: weights sum to {s}, expected 1 within {NORMALIZED_TOL:e}")
            }
            Violation::NonpositiveWeight(l) => {
                write!(fmt, "POS: weight of '{l}' is not strictly positive")
            }
            Violation::NotDiagonal(l) => {
                write!(fmt, "DIAG: diagonal flag is set but similarity '{l}' is not diagonal")
            }
        }
    }
}

/// Table of matrix-unit norms `r_{j,k} = sup_i |α_{i,j}| / |α_{i,k}|` of a
/// diagonal system, 0-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct RTable {
    d: usize,
    values: Vec<f64>,
}

impl RTable {
    /// Dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The value `r_{j,k}`, 0-based.
    pub fn r(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.d + k]
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest table entry; equals the p-bound of the diagonal system.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// A finite system of d-similarities `(I, s, f)`.
#[derive(Clone, Debug)]
pub struct SimilaritySystem {
    d: usize,
    entries: Vec<SystemEntry>,
    diagonal: bool,
}

impl SimilaritySystem {
    /// System from ordered entries. Shapes are enforced here; the type
    /// invariants are checked by [`validate`](Self::validate).
    ///
    /// Every similarity is restamped onto the normalized counting measure of
    /// its dimension, which is the measure the represented algebra carries.
    pub fn new(d: usize, entries: Vec<SystemEntry>, diagonal: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::Input("dimension must be positive".into()));
        }
        if entries.is_empty() {
            return Err(Error::Input("a system needs at least one similarity".into()));
        }
        crate::check_dim(d)?;
        let atoms = AtomicMeasure::normalized_counting(d);
        let entries = entries
            .into_iter()
            .map(|e| {
                if e.s.rows() != d || e.s.cols() != d {
                    return Err(Error::Input(format!(
                        "similarity '{}' is {}x{}, expected {d}x{d}",
                        e.label,
                        e.s.rows(),
                        e.s.cols()
                    )));
                }
                Ok(SystemEntry {
                    label: e.label,
                    f: e.f,
                    s: e.s.with_measures(atoms.clone(), atoms.clone())?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SimilaritySystem { d, entries, diagonal })
    }

    /// The basic system: the identity alone, with weight 1.
    pub fn basic(d: usize) -> Result<Self> {
        SimilaritySystem::new(d, vec![SystemEntry::new("1", 1.0, Mat::identity(d))], true)
    }

    /// The corner system for K_{d,γ}: all 2^d diagonal matrices with entries
    /// in {1, γ}, uniformly weighted.
    ///
    /// For matrix units and diagonal-block elements its norms coincide with
    /// the full K_{d,γ} norms; for general elements it is a lower bound, and
    /// [`gamma_norm`] supplies the certified sandwich enclosure.
    pub fn gamma_corners(d: usize, gamma: f64) -> Result<Self> {
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::Input(format!("gamma must be a finite real >= 1, got {gamma}")));
        }
        if gamma == 1.0 {
            return SimilaritySystem::basic(d);
        }
        let count = 1usize
            .checked_shl(d as u32)
            .ok_or_else(|| Error::Capacity(format!("corner system of dimension {d} overflows")))?;
        crate::check_dim(count)?;
        let weight = 1.0 / count as f64;
        let entries = (0..count)
            .map(|mask| {
                let diag: Vec<C64> = (0..d)
                    .map(|j| {
                        if mask >> j & 1 == 1 {
                            C64::new(gamma, 0.0)
                        } else {
                            C64::new(1.0, 0.0)
                        }
                    })
                    .collect();
                SystemEntry::new(format!("corner{mask:0w$b}", w = d), weight, Mat::diag(&diag))
            })
            .collect();
        SimilaritySystem::new(d, entries, true)
    }

    /// Dimension `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of indices.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when the index is empty (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Diagonal flag.
    pub fn diagonal(&self) -> bool {
        self.diagonal
    }

    /// Ordered entries.
    pub fn entries(&self) -> &[SystemEntry] {
        &self.entries
    }

    /// Check every type invariant, returning all violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.d < 2 {
            out.push(Violation::DimensionTooSmall(self.d));
        }
        let id: MatF = Mat::identity(self.d);
        if !self.entries.iter().any(|e| e.s == id) {
            out.push(Violation::MissingIdentity);
        }
        for e in &self.entries {
            if e.s.inverse().is_err() || e.s.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                out.push(Violation::NotInvertible(e.label.clone()));
            }
            if !(e.f > 0.0) || !e.f.is_finite() {
                out.push(Violation::NonpositiveWeight(e.label.clone()));
            }
            if self.diagonal && !e.s.is_diagonal() {
                out.push(Violation::NotDiagonal(e.label.clone()));
            }
        }
        let sum: f64 = self.entries.iter().map(|e| e.f).sum();
        if (sum - 1.0).abs() > NORMALIZED_TOL {
            out.push(Violation::WeightSum(sum));
        }
        out
    }

    /// The p-bound `R_{p,S} = sup_i ‖s(i)‖_p · ‖s(i)⁻¹‖_p`.
    ///
    /// Exact (width 0) for diagonal systems, where both factors take the
    /// monomial closed form.
    pub fn p_bound(&self, p: &Exponent) -> Result<NormInterval> {
        let mut sup: Option<NormInterval> = None;
        for e in &self.entries {
            let inv = e
                .s
                .inverse()
                .map_err(|_| Error::Input(format!("similarity '{}' is singular", e.label)))?;
            let bound = opnorm(&e.s, p).mul(&opnorm(&inv, p));
            sup = Some(match sup {
                None => bound,
                Some(acc) => acc.sup(bound),
            });
        }
        Ok(sup.expect("systems are nonempty"))
    }

    /// The representation of `x`: the block-diagonal matrix over the atoms
    /// `{1..d} × I` with weights `f(i)/d`, block `i` equal to `s(i)·x·s(i)⁻¹`.
    ///
    /// The same matrix represents `x` for every exponent; only the norm read
    /// off it depends on p.
    pub fn rep_matrix(&self, x: &MatF) -> Result<MatF> {
        if x.rows() != self.d || x.cols() != self.d {
            return Err(Error::Input(format!(
                "element is {}x{}, expected {}x{}",
                x.rows(),
                x.cols(),
                self.d,
                self.d
            )));
        }
        let n = self.d * self.entries.len();
        let mut labels = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut blocks = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let inv = e
                .s
                .inverse()
                .map_err(|_| Error::Input(format!("similarity '{}' is singular", e.label)))?;
            blocks.push(e.s.mul(x)?.mul(&inv)?);
            for j in 1..=self.d {
                labels.push(format!("{}.{}", e.label, j));
                weights.push(e.f / self.d as f64);
            }
        }
        let measure = AtomicMeasure::new(labels, weights)?;
        let d = self.d;
        let m = Mat::from_fn(n, n, |r, c| {
            let (br, jr) = (r / d, r % d);
            let (bc, jc) = (c / d, c % d);
            if br == bc {
                *blocks[br].get(jr, jc)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        m.with_measures(measure.clone(), measure)
    }

    /// The norm `‖X‖_{p,S} = sup_i ‖(s(i)⊗1_m)·X·(s(i)⁻¹⊗1_m)‖_p` of an
    /// element `X` of M_d ⊗ M_m, as the supremum of per-index intervals.
    ///
    /// Ties in the supremum keep the earliest index, and the weights `f`
    /// are never read, so outputs are reproducible bit for bit across
    /// systems differing only in `f`.
    pub fn norm_ps(&self, x: &MatF, p: &Exponent) -> Result<NormInterval> {
        let m = self.block_multiplicity(x)?;
        let id: MatF = Mat::identity(m);
        let mut sup: Option<NormInterval> = None;
        for e in &self.entries {
            let inv = e
                .s
                .inverse()
                .map_err(|_| Error::Input(format!("similarity '{}' is singular", e.label)))?;
            let conj = kron(&e.s, &id).mul(x)?.mul(&kron(&inv, &id))?;
            let n = opnorm(&conj, p);
            sup = Some(match sup {
                None => n,
                Some(acc) => acc.sup(n),
            });
        }
        Ok(sup.expect("systems are nonempty"))
    }

    fn block_multiplicity(&self, x: &MatF) -> Result<usize> {
        if x.rows() != x.cols() || x.rows() % self.d != 0 || x.rows() == 0 {
            return Err(Error::Input(format!(
                "element is {}x{}, expected square of dimension divisible by {}",
                x.rows(),
                x.cols(),
                self.d
            )));
        }
        Ok(x.rows() / self.d)
    }

    /// The matrix-unit norm table of a diagonal system, with the norm
    /// identity `‖e_{j,k}‖_{p,S} = r_{j,k}` cross-checked at p = 2.
    pub fn r_table(&self) -> Result<RTable> {
        if !self.diagonal {
            return Err(Error::Unsupported(
                "r-table is defined for diagonal systems only".into(),
            ));
        }
        let moduli: Vec<Vec<f64>> = self
            .entries
            .iter()
            .map(|e| {
                e.s.diagonal_entries()
                    .ok_or_else(|| Error::Input(format!("similarity '{}' is not diagonal", e.label)))
                    .map(|diag| diag.iter().map(|z| z.norm()).collect())
            })
            .collect::<Result<_>>()?;
        let mut values = vec![0.0; self.d * self.d];
        for j in 0..self.d {
            for k in 0..self.d {
                let mut best = 0.0f64;
                for row in &moduli {
                    if row[k] == 0.0 {
                        return Err(Error::Input("a similarity has a zero diagonal entry".into()));
                    }
                    best = best.max(row[j] / row[k]);
                }
                values[j * self.d + k] = best;
            }
        }
        let table = RTable { d: self.d, values };
        let p = Exponent::new(2.0).expect("2 is a valid exponent");
        for j in 0..self.d {
            for k in 0..self.d {
                let unit = crate::matalg::matrix_unit::<C64>(self.d, j + 1, k + 1)?;
                let n = self.norm_ps(&unit, &p)?;
                let r = table.r(j, k);
                if (n.lower - r).abs() > 1e-9 * r.max(1.0) {
                    return Err(Error::Structure(format!(
                        "r-table mismatch at ({},{}): table {r}, norm {}",
                        j + 1,
                        k + 1,
                        n.lower
                    )));
                }
            }
        }
        Ok(table)
    }

    /// Tensor product of systems: index I₁×I₂, similarities `s₁ ⊗ s₂`,
    /// weights multiplied; diagonal iff both factors are.
    pub fn tensor(&self, other: &SimilaritySystem) -> Result<SimilaritySystem> {
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for e1 in &self.entries {
            for e2 in &other.entries {
                entries.push(SystemEntry::new(
                    format!("{}.{}", e1.label, e2.label),
                    e1.f * e2.f,
                    kron(&e1.s, &e2.s),
                ));
            }
        }
        SimilaritySystem::new(self.d * other.d, entries, self.diagonal && other.diagonal)
    }

    /// Restriction to the index positions `keep` (0-based), with weights
    /// renormalized. The restricted range must still contain the identity.
    ///
    /// Restriction never increases a norm; [`restriction_is_contractive`]
    /// checks that on supplied test elements.
    pub fn restrict(&self, keep: &[usize]) -> Result<SimilaritySystem> {
        if keep.is_empty() {
            return Err(Error::Input("subsystem index set is empty".into()));
        }
        let mut seen = vec![false; self.entries.len()];
        for &i in keep {
            if i >= self.entries.len() {
                return Err(Error::Input(format!("index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::Input(format!("index {i} repeated")));
            }
            seen[i] = true;
        }
        let id: MatF = Mat::identity(self.d);
        if !keep.iter().any(|&i| self.entries[i].s == id) {
            return Err(Error::Input("subsystem must contain the identity".into()));
        }
        let total: f64 = keep.iter().map(|&i| self.entries[i].f).sum();
        let entries = keep
            .iter()
            .map(|&i| {
                let e = &self.entries[i];
                SystemEntry::new(e.label.clone(), e.f / total, e.s.clone())
            })
            .collect();
        SimilaritySystem::new(self.d, entries, self.diagonal)
    }
}

/// Check on test data that restricting a system did not increase a norm:
/// `‖x‖_{p,sub} ≤ ‖x‖_{p,full} + 1e-9`, compared on interval lower bounds.
pub fn restriction_is_contractive(
    full: &SimilaritySystem,
    sub: &SimilaritySystem,
    x: &MatF,
    p: &Exponent,
) -> Result<bool> {
    let n_sub = sub.norm_ps(x, p)?;
    let n_full = full.norm_ps(x, p)?;
    Ok(n_sub.lower <= n_full.lower + 1e-9)
}

/// Certified enclosure of the K_{d,γ} norm `‖x‖_{p,γ}`.
///
/// Lower bound: the corner-system supremum (which contains the identity
/// corner, so it dominates the spatial norm). Upper bound: the sandwich
/// `‖x‖_{p,γ} ≤ γ·‖x‖_p`.
pub fn gamma_norm(d: usize, gamma: f64, x: &MatF, p: &Exponent) -> Result<NormInterval> {
    let corners = SimilaritySystem::gamma_corners(d, gamma)?;
    let corner_sup = corners.norm_ps(x, p)?;
    let spatial = opnorm(x, p);
    let mut out = NormInterval::from_bounds(
        corner_sup.lower.max(spatial.lower),
        gamma * spatial.upper,
        corner_sup.methods.clone(),
        corner_sup.witness,
    );
    if !out.methods.contains(&crate::pnorm::Method::Sandwich) {
        out.methods.push(crate::pnorm::Method::Sandwich);
    }
    Ok(out)
}

/// Verify corner-norm monotonicity in γ: both interval ends for β stay
/// below the corresponding ends for γ, within 1e-9.
pub fn norm_monotonicity_check(
    d: usize,
    beta: f64,
    gamma: f64,
    x: &MatF,
    p: &Exponent,
) -> Result<bool> {
    if !(1.0 <= beta && beta <= gamma) {
        return Err(Error::Input(format!(
            "need 1 <= beta <= gamma, got beta={beta}, gamma={gamma}"
        )));
    }
    let n_beta = gamma_norm(d, beta, x, p)?;
    let n_gamma = gamma_norm(d, gamma, x, p)?;
    Ok(n_beta.lower <= n_gamma.lower + 1e-9 && n_beta.upper <= n_gamma.upper + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::matrix_unit;
    use crate::pnorm::Structure;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag_system(diags: &[&[f64]]) -> SimilaritySystem {
        let d = diags[0].len();
        let f = 1.0 / diags.len() as f64;
        let entries = diags
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let m = Mat::diag(&row.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
                SystemEntry::new(format!("s{i}"), f, m)
            })
            .collect();
        SimilaritySystem::new(d, entries, true).unwrap()
    }

    fn random_mat(rng: &mut ChaCha8Rng, d: usize) -> MatF {
        Mat::from_fn(d, d, |_, _| {
            c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
        })
    }

    #[test]
    fn validation_reports_each_violation() {
        let basic = SimilaritySystem::basic(2).unwrap();
        assert!(basic.validate().is_empty());

        let bad_sum = SimilaritySystem::new(
            2,
            vec![SystemEntry::new("1", 0.9, Mat::identity(2))],
            true,
        )
        .unwrap();
        assert!(bad_sum
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::WeightSum(_))));

        let no_id = SimilaritySystem::new(
            2,
            vec![SystemEntry::new("s", 1.0, Mat::diag(&[c(1.0, 0.0), c(2.0, 0.0)]))],
            true,
        )
        .unwrap();
        assert!(no_id.validate().contains(&Violation::MissingIdentity));

        let flagged = SimilaritySystem::new(
            2,
            vec![
                SystemEntry::new("1", 0.5, Mat::identity(2)),
                SystemEntry::new(
                    "u",
                    0.5,
                    Mat::square(2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
                        .unwrap(),
                ),
            ],
            true,
        )
        .unwrap();
        assert!(flagged
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::NotDiagonal(_))));

        let singular = SimilaritySystem::new(
            2,
            vec![
                SystemEntry::new("1", 0.5, Mat::identity(2)),
                SystemEntry::new("z", 0.5, Mat::zeros(2, 2)),
            ],
            false,
        )
        .unwrap();
        assert!(singular
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::NotInvertible(_))));
    }

    #[test]
    fn p_bound_examples() {
        let s = diag_system(&[&[1.0, 1.0], &[1.0, 2.0]]);
        for pv in [1.0, 1.7, 2.0, 3.0] {
            let r = s.p_bound(&Exponent::new(pv).unwrap()).unwrap();
            assert_eq!(r.lower, 2.0);
            assert_eq!(r.upper, 2.0);
        }
        let basic = SimilaritySystem::basic(3).unwrap();
        let r = basic.p_bound(&Exponent::new(2.0).unwrap()).unwrap();
        assert_eq!(r.lower, 1.0);
        assert_eq!(r.upper, 1.0);
    }

    #[test]
    fn p_bound_multiplies_under_tensor() {
        let s1 = diag_system(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let s2 = diag_system(&[&[1.0, 1.0, 1.0], &[1.0, 0.5, 4.0]]);
        let t = s1.tensor(&s2).unwrap();
        assert!(t.diagonal());
        assert_eq!(t.d(), 6);
        let p = Exponent::new(2.5).unwrap();
        let r1 = s1.p_bound(&p).unwrap().lower;
        let r2 = s2.p_bound(&p).unwrap().lower;
        let rt = t.p_bound(&p).unwrap();
        assert_eq!(rt.lower, r1 * r2);
        assert_eq!(rt.upper, r1 * r2);
    }

    #[test]
    fn rep_matrix_is_unital_and_multiplicative() {
        let s = diag_system(&[&[1.0, 1.0, 1.0], &[1.0, 2.0, 4.0], &[0.5, 1.0, 8.0]]);
        let id: MatF = Mat::identity(3);
        let rep_id = s.rep_matrix(&id).unwrap();
        assert_eq!(rep_id, Mat::<C64>::identity(9));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let x = random_mat(&mut rng, 3);
            let y = random_mat(&mut rng, 3);
            let lhs = s.rep_matrix(&x.mul(&y).unwrap()).unwrap();
            let rhs = s.rep_matrix(&x).unwrap().mul(&s.rep_matrix(&y).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }

        let basic = SimilaritySystem::basic(3).unwrap();
        let x = random_mat(&mut rng, 3);
        assert_eq!(basic.rep_matrix(&x).unwrap(), x);
    }

    #[test]
    fn rep_matrix_carries_weighted_atoms() {
        let s = diag_system(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let rep = s.rep_matrix(&Mat::identity(2)).unwrap();
        assert_eq!(rep.domain().len(), 4);
        assert!((rep.domain().weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_norms_of_matrix_units() {
        let s = SimilaritySystem::gamma_corners(2, 3.0).unwrap();
        assert_eq!(s.len(), 4);
        let p = Exponent::new(2.0).unwrap();
        let e12: MatF = matrix_unit(2, 1, 2).unwrap();
        let n = s.norm_ps(&e12, &p).unwrap();
        assert_eq!(n.lower, 3.0);
        assert_eq!(n.upper, 3.0);
        let e11: MatF = matrix_unit(2, 1, 1).unwrap();
        let n = s.norm_ps(&e11, &p).unwrap();
        assert_eq!(n.lower, 1.0);
        assert_eq!(n.upper, 1.0);
        let id: MatF = Mat::identity(2);
        let n = s.norm_ps(&id, &p).unwrap();
        assert_eq!(n.lower, 1.0);
        assert_eq!(n.upper, 1.0);
    }

    #[test]
    fn diagonal_blocks_norm_is_max_of_blocks() {
        let s = diag_system(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b1 = random_mat(&mut rng, 2);
        let b2 = random_mat(&mut rng, 2);
        // X = e_{1,1} ⊗ b1 + e_{2,2} ⊗ b2
        let x = Mat::from_fn(4, 4, |r, cc| {
            let (jr, ar) = (r / 2, r % 2);
            let (jc, ac) = (cc / 2, cc % 2);
            if jr != jc {
                c(0.0, 0.0)
            } else if jr == 0 {
                *b1.get(ar, ac)
            } else {
                *b2.get(ar, ac)
            }
        });
        for p in [Exponent::new(1.0).unwrap(), Exponent::new(2.0).unwrap(), Exponent::INF] {
            let expected = opnorm(&b1, &p).lower.max(opnorm(&b2, &p).lower);
            let n = s.norm_ps(&x, &p).unwrap();
            assert!((n.lower - expected).abs() <= 1e-9 * expected.max(1.0));
            assert!((n.upper - expected).abs() <= 1e-9 * expected.max(1.0));
        }
        let p = Exponent::new(2.5).unwrap();
        let expected = opnorm(&b1, &p).lower.max(opnorm(&b2, &p).lower);
        let n = s.norm_ps(&x, &p).unwrap();
        assert!(n.lower <= expected + 1e-9 && expected <= n.upper + 1e-9);
    }

    #[test]
    fn r_table_examples() {
        let s = diag_system(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let t = s.r_table().unwrap();
        assert_eq!(t.r(0, 0), 1.0);
        assert_eq!(t.r(1, 1), 1.0);
        assert_eq!(t.r(0, 1), 1.0);
        assert_eq!(t.r(1, 0), 2.0);

        let basic = SimilaritySystem::basic(3).unwrap();
        let t = basic.r_table().unwrap();
        assert!(t.values().iter().all(|&v| v == 1.0));

        let corners = SimilaritySystem::gamma_corners(2, 4.0).unwrap();
        let t = corners.r_table().unwrap();
        assert_eq!(t.r(0, 1), 4.0);
        assert_eq!(t.r(1, 0), 4.0);
        assert_eq!(t.max(), 4.0);

        let nondiag = SimilaritySystem::new(
            2,
            vec![SystemEntry::new(
                "1",
                1.0,
                Mat::identity(2).with_structure(Structure::General),
            )],
            false,
        )
        .unwrap();
        assert!(matches!(nondiag.r_table(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn unit_tensor_norms_follow_r_table() {
        let s = diag_system(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let t = s.r_table().unwrap();
        let p = Exponent::new(2.0).unwrap();
        let b = Mat::diag(&[c(0.0, 2.0), c(1.0, 0.0)]);
        let nb = opnorm(&b, &p).lower;
        for j in 0..2 {
            for k in 0..2 {
                let unit: MatF = matrix_unit(2, j + 1, k + 1).unwrap();
                let x = kron(&unit, &b);
                let n = s.norm_ps(&x, &p).unwrap();
                let expected = t.r(j, k) * nb;
                assert!(
                    (n.lower - expected).abs() <= 1e-9 * expected.max(1.0),
                    "unit ({j},{k}): {} vs {expected}",
                    n.lower
                );
            }
        }
    }

    #[test]
    fn weights_never_change_norms() {
        let d = 2;
        let mats: Vec<MatF> = vec![
            Mat::identity(d),
            Mat::diag(&[c(1.0, 0.0), c(3.0, 0.0)]),
        ];
        let sys_a = SimilaritySystem::new(
            d,
            mats.iter()
                .enumerate()
                .map(|(i, m)| SystemEntry::new(format!("s{i}"), 0.5, m.clone()))
                .collect(),
            true,
        )
        .unwrap();
        let sys_b = SimilaritySystem::new(
            d,
            mats.iter()
                .enumerate()
                .map(|(i, m)| SystemEntry::new(format!("s{i}"), if i == 0 { 0.25 } else { 0.75 }, m.clone()))
                .collect(),
            true,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for pv in [1.0, 2.0, 2.5] {
            let p = Exponent::new(pv).unwrap();
            for _ in 0..3 {
                let x = random_mat(&mut rng, d);
                let na = sys_a.norm_ps(&x, &p).unwrap();
                let nb = sys_b.norm_ps(&x, &p).unwrap();
                assert_eq!(na.lower.to_bits(), nb.lower.to_bits());
                assert_eq!(na.upper.to_bits(), nb.upper.to_bits());
            }
        }
    }

    #[test]
    fn p_bound_is_max_unit_norm_for_diagonal() {
        let s = diag_system(&[&[1.0, 1.0, 1.0], &[1.0, 2.0, 0.5]]);
        let p = Exponent::new(2.0).unwrap();
        let r = s.p_bound(&p).unwrap().lower;
        let mut best = 0.0f64;
        for j in 1..=3 {
            for k in 1..=3 {
                let unit: MatF = matrix_unit(3, j, k).unwrap();
                best = best.max(s.norm_ps(&unit, &p).unwrap().lower);
            }
        }
        assert!((r - best).abs() <= 1e-12 * r.max(1.0));
    }

    #[test]
    fn gamma_corner_family() {
        let collapsed = SimilaritySystem::gamma_corners(2, 1.0).unwrap();
        assert_eq!(collapsed.len(), 1);
        assert!(SimilaritySystem::gamma_corners(2, 0.5).is_err());
        let s = SimilaritySystem::gamma_corners(2, 3.0).unwrap();
        let r = s.p_bound(&Exponent::new(2.0).unwrap()).unwrap();
        assert_eq!(r.lower, 3.0);
        assert_eq!(r.upper, 3.0);
    }

    #[test]
    fn subsystem_restriction() {
        let s = SimilaritySystem::gamma_corners(2, 5.0).unwrap();
        let full = s.restrict(&[0, 1, 2, 3]).unwrap();
        assert_eq!(full.len(), 4);
        for (a, b) in full.entries().iter().zip(s.entries()) {
            assert_eq!(a.f().to_bits(), b.f().to_bits());
        }

        // corner01 is diag(1, 5) at position 2 (bit order: mask 2 = "10").
        let kept = s.restrict(&[0, 2]).unwrap();
        let p = Exponent::new(2.0).unwrap();
        let e21: MatF = matrix_unit(2, 2, 1).unwrap();
        let n = kept.norm_ps(&e21, &p).unwrap();
        assert_eq!(n.lower, 5.0);

        let basic_again = s.restrict(&[0]).unwrap();
        assert_eq!(basic_again.len(), 1);
        let n = basic_again.norm_ps(&e21, &p).unwrap();
        assert_eq!(n.lower, 1.0);

        assert!(s.restrict(&[]).is_err());
        assert!(s.restrict(&[1, 2, 3]).is_err());
        assert!(s.restrict(&[0, 0]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let x = random_mat(&mut rng, 2);
            assert!(restriction_is_contractive(&s, &kept, &x, &p).unwrap());
        }
    }

    #[test]
    fn gamma_norm_sandwich() {
        let p = Exponent::new(2.0).unwrap();
        let e12: MatF = matrix_unit(2, 1, 2).unwrap();
        let n = gamma_norm(2, 3.0, &e12, &p).unwrap();
        assert_eq!(n.lower, 3.0);
        assert_eq!(n.upper, 3.0);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let x = random_mat(&mut rng, 2);
            let n = gamma_norm(2, 2.0, &x, &p).unwrap();
            let spatial = opnorm(&x, &p);
            assert!(n.lower >= spatial.lower - 1e-12);
            assert!(n.upper <= 2.0 * spatial.upper + 1e-12);
            assert!(n.lower <= n.upper + 1e-12);
        }
    }

    #[test]
    fn monotonicity_check_holds() {
        let p = Exponent::new(2.0).unwrap();
        let e12: MatF = matrix_unit(2, 1, 2).unwrap();
        assert!(norm_monotonicity_check(2, 2.0, 5.0, &e12, &p).unwrap());
        assert!(norm_monotonicity_check(2, 3.0, 3.0, &e12, &p).unwrap());
        assert!(norm_monotonicity_check(2, 0.5, 3.0, &e12, &p).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let x = random_mat(&mut rng, 2);
            let beta = 1.0 + rng.random::<f64>() * 2.0;
            let gamma = beta + rng.random::<f64>() * 3.0;
            assert!(norm_monotonicity_check(2, beta, gamma, &x, &p).unwrap());
        }
    }
}
