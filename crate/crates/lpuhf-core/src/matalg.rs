//! The matrix algebra M_d^p with its distinguished elements: matrix units,
//! signed permutations, the flip element y_d, the multiplication maps Δ and
//! Δᵒᵖ, and projective-norm certificates for explicit tensor decompositions.
//!
//! Exact identities (flip involution, group averaging, diagonal structure)
//! are stated over any [`Scalar`], so they can be verified in exact rational
//! arithmetic and then reused on the numerical path.

use crate::error::{Error, Result};
use crate::pnorm::{Mat, Structure};
use crate::scalar::Scalar;
use crate::spaces::AtomicMeasure;

/// Lexicographic bijection between multi-indices and flat indices.
///
/// Factor order is significant: the last factor varies fastest, matching the
/// Kronecker product convention used by [`kron`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorIndexMap {
    factor_dims: Vec<usize>,
}

impl TensorIndexMap {
    /// Map for the given factor dimensions, all positive.
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.iter().any(|&d| d == 0) {
            return Err(Error::Input("factor dimensions must be positive".into()));
        }
        Ok(TensorIndexMap { factor_dims })
    }

    /// Factor dimensions.
    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    /// Product of all factor dimensions.
    pub fn total(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Flat index of a multi-index.
    pub fn flatten(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.factor_dims.len() {
            return Err(Error::Input("multi-index arity mismatch".into()));
        }
        let mut flat = 0;
        for (i, &m) in multi.iter().enumerate() {
            if m >= self.factor_dims[i] {
                return Err(Error::Input(format!(
                    "index {m} out of range for factor of dimension {}",
                    self.factor_dims[i]
                )));
            }
            flat = flat * self.factor_dims[i] + m;
        }
        Ok(flat)
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, mut flat: usize) -> Result<Vec<usize>> {
        if flat >= self.total() {
            return Err(Error::Input(format!(
                "flat index {flat} out of range for total dimension {}",
                self.total()
            )));
        }
        let mut multi = vec![0; self.factor_dims.len()];
        for i in (0..self.factor_dims.len()).rev() {
            multi[i] = flat % self.factor_dims[i];
            flat /= self.factor_dims[i];
        }
        Ok(multi)
    }
}

/// Matrix unit e_{j,k} on the normalized counting measure, indices 1-based.
pub fn matrix_unit<T: Scalar>(d: usize, j: usize, k: usize) -> Result<Mat<T>> {
    if j == 0 || k == 0 || j > d || k > d {
        return Err(Error::Input(format!(
            "matrix unit indices ({j},{k}) out of range 1..={d}"
        )));
    }
    Ok(
        Mat::from_fn(d, d, |r, c| {
            if r == j - 1 && c == k - 1 {
                T::one()
            } else {
                T::zero()
            }
        })
        .with_structure(Structure::ScaledMonomial),
    )
}

const GROUP_MAX_DIM: usize = 4;

/// The group of signed permutation matrices of size `d`, fully enumerated.
///
/// Deterministic order: permutations lexicographically, sign patterns in
/// binary counting order within each permutation. Size is `2^d · d!`.
pub fn signed_permutation_group<T: Scalar>(d: usize) -> Result<Vec<Mat<T>>> {
    if d == 0 {
        return Err(Error::Input("dimension must be positive".into()));
    }
    if d > GROUP_MAX_DIM {
        return Err(Error::Capacity(format!(
            "signed permutation group is enumerated only for d <= {GROUP_MAX_DIM}, got {d}"
        )));
    }
    let mut perms = Vec::new();
    let mut current = Vec::with_capacity(d);
    let mut used = vec![false; d];
    build_perms(d, &mut current, &mut used, &mut perms);
    let mut group = Vec::with_capacity(perms.len() << d);
    for perm in &perms {
        for mask in 0..(1usize << d) {
            let m = Mat::from_fn(d, d, |r, c| {
                if perm[r] == c {
                    if mask >> r & 1 == 1 {
                        -T::one()
                    } else {
                        T::one()
                    }
                } else {
                    T::zero()
                }
            })
            .with_structure(Structure::ScaledMonomial);
            group.push(m);
        }
    }
    Ok(group)
}

fn build_perms(d: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    if current.len() == d {
        out.push(current.clone());
        return;
    }
    for c in 0..d {
        if !used[c] {
            used[c] = true;
            current.push(c);
            build_perms(d, current, used, out);
            current.pop();
            used[c] = false;
        }
    }
}

/// The permutation part `d · y_d`: the exact 0/1 matrix exchanging tensor
/// factors, `(d·y_d)(ξ ⊗ η) = η ⊗ ξ`.
pub fn scaled_flip<T: Scalar>(d: usize) -> Mat<T> {
    let dd = d * d;
    let atoms = AtomicMeasure::normalized_counting(d);
    let measure = atoms.product(&atoms);
    let m = Mat::from_fn(dd, dd, |row, col| {
        let (r, s) = (row / d, row % d);
        let (s2, r2) = (col / d, col % d);
        if r == r2 && s == s2 {
            T::one()
        } else {
            T::zero()
        }
    })
    .with_structure(Structure::ScaledMonomial);
    m.with_measures(measure.clone(), measure)
        .expect("product measure matches d^2")
}

/// The flip element `y_d = (1/d) Σ_{r,s} e_{r,s} ⊗ e_{s,r}` as a d²×d² matrix.
pub fn flip_element<T: Scalar>(d: usize) -> Mat<T> {
    scaled_flip::<T>(d).scale(&T::from_ratio(1, d as i64))
}

/// `(1/|G|) Σ_{g∈G} g ⊗ g⁻¹` over the signed permutation group, with the
/// equality to [`flip_element`] asserted exactly.
pub fn flip_from_group<T: Scalar>(d: usize) -> Result<Mat<T>> {
    let group = signed_permutation_group::<T>(d)?;
    let dd = d * d;
    let mut sum = Mat::zeros(dd, dd);
    for g in &group {
        sum = sum.add(&kron(g, &g.transpose()))?;
    }
    let averaged = sum.scale(&T::from_ratio(1, group.len() as i64));
    let flip = flip_element::<T>(d);
    if averaged != flip {
        return Err(Error::Structure(
            "group average does not reproduce the flip element".into(),
        ));
    }
    let measure = flip.domain().clone();
    averaged
        .with_measures(measure.clone(), measure)
        .map(|m| m.with_structure(Structure::ScaledMonomial))
}

/// Kronecker product under the lexicographic index map; measures multiply.
pub fn kron<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let m = Mat::from_fn(rows, cols, |r, c| {
        let (ra, rb) = (r / b.rows(), r % b.rows());
        let (ca, cb) = (c / b.cols(), c % b.cols());
        a.get(ra, ca).clone() * b.get(rb, cb).clone()
    });
    let structure = match (a.structure(), b.structure()) {
        (Structure::ScaledMonomial, Structure::ScaledMonomial) => Structure::ScaledMonomial,
        _ => Structure::General,
    };
    m.with_measures(
        a.domain().product(b.domain()),
        a.codomain().product(b.codomain()),
    )
    .expect("product measures match the Kronecker shape")
    .with_structure(structure)
}

/// Relabel tensor factors of a matrix: new factor `i` is old factor `perm[i]`.
///
/// `row_dims` and `col_dims` refine the row and column index spaces; both are
/// permuted by the same `perm`.
pub fn permute_factors<T: Scalar>(
    a: &Mat<T>,
    row_dims: &[usize],
    col_dims: &[usize],
    perm: &[usize],
) -> Result<Mat<T>> {
    let row_map = TensorIndexMap::new(row_dims.to_vec())?;
    let col_map = TensorIndexMap::new(col_dims.to_vec())?;
    if row_map.total() != a.rows() || col_map.total() != a.cols() {
        return Err(Error::Input("factor dimensions do not match the matrix".into()));
    }
    if perm.len() != row_dims.len() || perm.len() != col_dims.len() {
        return Err(Error::Input("permutation arity mismatch".into()));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::Input("not a permutation of the factors".into()));
        }
        seen[p] = true;
    }
    let new_row_map = TensorIndexMap::new(perm.iter().map(|&p| row_dims[p]).collect())?;
    let new_col_map = TensorIndexMap::new(perm.iter().map(|&p| col_dims[p]).collect())?;

    let permute_index = |map: &TensorIndexMap, new_map: &TensorIndexMap, flat: usize| {
        let multi = map.unflatten(flat).expect("index in range");
        let permuted: Vec<usize> = perm.iter().map(|&p| multi[p]).collect();
        new_map.flatten(&permuted).expect("index in range")
    };

    let mut entries = vec![T::zero(); a.rows() * a.cols()];
    for r in 0..a.rows() {
        let nr = permute_index(&row_map, &new_row_map, r);
        for c in 0..a.cols() {
            let nc = permute_index(&col_map, &new_col_map, c);
            entries[nr * a.cols() + nc] = a.get(r, c).clone();
        }
    }
    let permute_measure = |m: &AtomicMeasure, map: &TensorIndexMap, new_map: &TensorIndexMap| {
        let mut labels = vec![String::new(); m.len()];
        let mut weights = vec![0.0; m.len()];
        for j in 0..m.len() {
            let nj = permute_index(map, new_map, j);
            labels[nj] = m.label(j).to_string();
            weights[nj] = m.weight(j);
        }
        AtomicMeasure::new(labels, weights).expect("permuted measure stays valid")
    };
    let domain = permute_measure(a.domain(), &col_map, &new_col_map);
    let codomain = permute_measure(a.codomain(), &row_map, &new_row_map);
    Mat::new(a.rows(), a.cols(), entries, domain, codomain)
        .map(|m| m.with_structure(a.structure()))
}

/// Explicit decomposition `Σ_k a_k ⊗ b_k` of an element of an algebraic
/// tensor product.
#[derive(Clone, Debug)]
pub struct ElementaryTensorSum<T: Scalar> {
    terms: Vec<(Mat<T>, Mat<T>)>,
}

impl<T: Scalar> ElementaryTensorSum<T> {
    /// Sum from explicit terms; nonempty, with consistent shapes per slot.
    pub fn new(terms: Vec<(Mat<T>, Mat<T>)>) -> Result<Self> {
        let (first_a, first_b) = match terms.first() {
            Some(t) => ((t.0.rows(), t.0.cols()), (t.1.rows(), t.1.cols())),
            None => return Err(Error::Input("tensor sum needs at least one term".into())),
        };
        for (a, b) in &terms {
            if (a.rows(), a.cols()) != first_a || (b.rows(), b.cols()) != first_b {
                return Err(Error::Input("tensor sum term shapes are inconsistent".into()));
            }
        }
        Ok(ElementaryTensorSum { terms })
    }

    /// The flip element as its defining decomposition `(1/d) e_{r,s} ⊗ e_{s,r}`.
    pub fn flip_naive(d: usize) -> Result<Self> {
        let scale = T::from_ratio(1, d as i64);
        let mut terms = Vec::with_capacity(d * d);
        for r in 1..=d {
            for s in 1..=d {
                terms.push((
                    matrix_unit::<T>(d, r, s)?.scale(&scale),
                    matrix_unit::<T>(d, s, r)?,
                ));
            }
        }
        ElementaryTensorSum::new(terms)
    }

    /// The flip element as the group average `(1/|G|) Σ g ⊗ g⁻¹`.
    pub fn flip_group(d: usize) -> Result<Self> {
        let group = signed_permutation_group::<T>(d)?;
        let scale = T::from_ratio(1, group.len() as i64);
        let terms = group
            .iter()
            .map(|g| (g.scale(&scale), g.transpose()))
            .collect();
        ElementaryTensorSum::new(terms)
    }

    /// The terms.
    pub fn terms(&self) -> &[(Mat<T>, Mat<T>)] {
        &self.terms
    }

    /// Shape of the first tensor slot.
    pub fn a_shape(&self) -> (usize, usize) {
        (self.terms[0].0.rows(), self.terms[0].0.cols())
    }

    /// Shape of the second tensor slot.
    pub fn b_shape(&self) -> (usize, usize) {
        (self.terms[0].1.rows(), self.terms[0].1.cols())
    }

    /// The represented element as a flat Kronecker-sum matrix.
    pub fn flatten(&self) -> Mat<T> {
        let mut sum = kron(&self.terms[0].0, &self.terms[0].1);
        for (a, b) in &self.terms[1..] {
            sum = sum.add(&kron(a, b)).expect("consistent shapes");
        }
        sum
    }

    /// Scalar multiple, absorbed into the first slot.
    pub fn scale(&self, c: &T) -> Self {
        ElementaryTensorSum {
            terms: self
                .terms
                .iter()
                .map(|(a, b)| (a.scale(c), b.clone()))
                .collect(),
        }
    }

    /// Multiplication map `Δ(Σ a_k ⊗ b_k) = Σ a_k b_k`.
    pub fn delta(&self) -> Result<Mat<T>> {
        let mut sum: Option<Mat<T>> = None;
        for (a, b) in &self.terms {
            let prod = a.mul(b)?;
            sum = Some(match sum {
                None => prod,
                Some(s) => s.add(&prod)?,
            });
        }
        Ok(sum.expect("nonempty"))
    }

    /// Opposite multiplication map `Δᵒᵖ(Σ a_k ⊗ b_k) = Σ b_k a_k`.
    pub fn delta_op(&self) -> Result<Mat<T>> {
        let mut sum: Option<Mat<T>> = None;
        for (a, b) in &self.terms {
            let prod = b.mul(a)?;
            sum = Some(match sum {
                None => prod,
                Some(s) => s.add(&prod)?,
            });
        }
        Ok(sum.expect("nonempty"))
    }

    /// `Σ_k ‖a_k‖·‖b_k‖` for the supplied factor norm: an upper bound on the
    /// projective norm of the represented element.
    pub fn projective_upper(&self, norm_fn: impl Fn(&Mat<T>) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, b)| norm_fn(a) * norm_fn(b))
            .sum()
    }
}

/// Contraction used to certify a projective-norm lower bound.
pub enum Contraction<'a, T: Scalar> {
    /// The multiplication map Δ, contractive for any submultiplicative
    /// algebra norm.
    Delta,
    /// The opposite multiplication map Δᵒᵖ.
    DeltaOp,
    /// A caller-supplied contraction; the caller asserts contractivity.
    Custom(&'a dyn Fn(&ElementaryTensorSum<T>) -> Result<Mat<T>>),
}

/// `‖contraction(z)‖`: a certified lower bound for the projective norm of
/// `z`, provided the contraction is contractive for the factor norm in use.
pub fn projective_lower_via_contraction<T: Scalar>(
    z: &ElementaryTensorSum<T>,
    contraction: Contraction<'_, T>,
    norm_fn: impl Fn(&Mat<T>) -> f64,
) -> Result<f64> {
    let contracted = match contraction {
        Contraction::Delta => z.delta()?,
        Contraction::DeltaOp => z.delta_op()?,
        Contraction::Custom(f) => f(z)?,
    };
    Ok(norm_fn(&contracted))
}

/// Group-average a decomposition into one with `Δ(z) = 1` and exact
/// `(g ⊗ 1) z = z (1 ⊗ g)` covariance for every `g` in the group.
///
/// Builds `z₁ = (Δ(z₀)⁻¹ ⊗ 1) z₀`, then `z = (1/|G|) Σ_h (h ⊗ 1) z₁ (1 ⊗ h⁻¹)`,
/// and verifies both postconditions by exact equality of flattened matrices,
/// so it is intended for exact scalar types.
pub fn symmetrize_diagonal<T: Scalar>(
    z0: &ElementaryTensorSum<T>,
    group: &[Mat<T>],
) -> Result<ElementaryTensorSum<T>> {
    if group.is_empty() {
        return Err(Error::Input("empty group".into()));
    }
    let delta_inv = z0
        .delta()?
        .inverse()
        .map_err(|_| Error::Input("delta of the seed is singular".into()))?;
    let z1_terms: Vec<(Mat<T>, Mat<T>)> = z0
        .terms()
        .iter()
        .map(|(a, b)| Ok((delta_inv.mul(a)?, b.clone())))
        .collect::<Result<_>>()?;
    let z1 = ElementaryTensorSum::new(z1_terms)?;

    let scale = T::from_ratio(1, group.len() as i64);
    let mut terms = Vec::with_capacity(group.len() * z1.terms().len());
    for h in group {
        let h_inv = h.inverse()?;
        for (a, b) in z1.terms() {
            terms.push((h.mul(a)?.scale(&scale), b.mul(&h_inv)?));
        }
    }
    let z = ElementaryTensorSum::new(terms)?;

    let flat = z.flatten();
    let n = z.a_shape().0;
    if z.delta()? != Mat::<T>::identity(n) {
        return Err(Error::Structure("symmetrization failed: delta is not 1".into()));
    }
    let id = Mat::<T>::identity(n);
    for g in group {
        let left = kron(g, &id).mul(&flat)?;
        let right = flat.mul(&kron(&id, g))?;
        if left != right {
            return Err(Error::Structure(
                "symmetrization failed: covariance identity violated".into(),
            ));
        }
    }
    Ok(z)
}

/// Δ of a flattened element of A ⊗ A, A = M_m: `Δ(M)_{α,β} = Σ_ν M_{(α,ν),(ν,β)}`.
pub fn delta_of_flat<T: Scalar>(z: &Mat<T>, m: usize) -> Result<Mat<T>> {
    if z.rows() != m * m || z.cols() != m * m {
        return Err(Error::Input("flat tensor must be m^2 x m^2".into()));
    }
    Ok(Mat::from_fn(m, m, |alpha, beta| {
        let mut acc = T::zero();
        for nu in 0..m {
            acc = acc + z.get(alpha * m + nu, nu * m + beta).clone();
        }
        acc
    }))
}

/// Δᵒᵖ of a flattened element of A ⊗ A: `Δᵒᵖ(M)_{α,β} = Σ_ν M_{(ν,α),(β,ν)}`.
pub fn delta_op_of_flat<T: Scalar>(z: &Mat<T>, m: usize) -> Result<Mat<T>> {
    if z.rows() != m * m || z.cols() != m * m {
        return Err(Error::Input("flat tensor must be m^2 x m^2".into()));
    }
    Ok(Mat::from_fn(m, m, |alpha, beta| {
        let mut acc = T::zero();
        for nu in 0..m {
            acc = acc + z.get(nu * m + alpha, beta * m + nu).clone();
        }
        acc
    }))
}

/// The blocks `z_{l,k} ∈ A ⊗ A` of an element with exact diagonal structure
/// `z = Σ_{j,k,l} e_{j,k} ⊗ e_{l,j} ⊗ z_{l,k}`.
#[derive(Clone, Debug)]
pub struct DiagonalStructure<T: Scalar> {
    d: usize,
    m: usize,
    blocks: Vec<Mat<T>>,
}

impl<T: Scalar> DiagonalStructure<T> {
    /// Matrix-algebra dimension `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Inner algebra dimension `m` (A = M_m).
    pub fn m(&self) -> usize {
        self.m
    }

    /// The block `z_{l,k}` as a flattened m²×m² matrix, indices 0-based.
    pub fn block(&self, l: usize, k: usize) -> &Mat<T> {
        &self.blocks[l * self.d + k]
    }
}

/// Extract the diagonal structure of `z ∈ (M_d ⊗ A) ⊗ (M_d ⊗ A)`, A = M_m.
///
/// Preconditions checked exactly: `(x ⊗ 1_A ⊗ 1) z = z (1 ⊗ x ⊗ 1_A)` for
/// every matrix unit `x` of M_d, and `Δ(z) = 1`. On success the blocks
/// satisfy `z = Σ_{j,k,l} e_{j,k} ⊗ e_{l,j} ⊗ z_{l,k}` and
/// `Σ_j Δ_A(z_{j,j}) = 1_A`, both verified.
pub fn diagonal_structure<T: Scalar>(
    z: &ElementaryTensorSum<T>,
    d: usize,
) -> Result<DiagonalStructure<T>> {
    let (rows, cols) = z.a_shape();
    if rows != cols || z.b_shape() != (rows, cols) {
        return Err(Error::Input("tensor factors must be square and equal".into()));
    }
    if d == 0 || rows % d != 0 {
        return Err(Error::Input(format!(
            "factor dimension {rows} is not a multiple of d = {d}"
        )));
    }
    let m = rows / d;
    let dm = rows;
    let flat = z.flatten();

    let id_a: Mat<T> = Mat::identity(m);
    let id_dm: Mat<T> = Mat::identity(dm);
    for j in 1..=d {
        for k in 1..=d {
            let x = matrix_unit::<T>(d, j, k)?;
            let left = kron(&kron(&x, &id_a), &id_dm).mul(&flat)?;
            let right = flat.mul(&kron(&id_dm, &kron(&x, &id_a)))?;
            if left != right {
                return Err(Error::Structure(format!(
                    "commutation precondition fails at matrix unit e_{{{j},{k}}}"
                )));
            }
        }
    }
    if z.delta()? != Mat::<T>::identity(dm) {
        return Err(Error::Structure("delta of z is not the identity".into()));
    }

    // Row index (j,a,l,b), column index (k,a',j',b') in factor dims (d,m,d,m);
    // the block entry sits at j' = j, read off at j = 0.
    let idx = TensorIndexMap::new(vec![d, m, d, m])?;
    let mut blocks = Vec::with_capacity(d * d);
    for l in 0..d {
        for k in 0..d {
            let block = Mat::from_fn(m * m, m * m, |rab, cab| {
                let (a, b) = (rab / m, rab % m);
                let (a2, b2) = (cab / m, cab % m);
                let r = idx.flatten(&[0, a, l, b]).expect("in range");
                let c = idx.flatten(&[k, a2, 0, b2]).expect("in range");
                flat.get(r, c).clone()
            });
            blocks.push(block);
        }
    }
    let structure = DiagonalStructure { d, m, blocks };

    let mut rebuilt: Mat<T> = Mat::zeros(dm * dm, dm * dm);
    for j in 1..=d {
        for k in 1..=d {
            for l in 1..=d {
                let e_jk = matrix_unit::<T>(d, j, k)?;
                let e_lj = matrix_unit::<T>(d, l, j)?;
                let block = structure.block(l - 1, k - 1);
                // e_{j,k} ⊗ e_{l,j} ⊗ z_{l,k} in the factor order (d, m, d, m)
                // is kron(e_jk, A-part) interleaved; rebuild via the flat block.
                let outer = kron(&e_jk, &e_lj);
                let term = Mat::from_fn(dm * dm, dm * dm, |r, c| {
                    let rm = idx.unflatten(r).expect("in range");
                    let cm = idx.unflatten(c).expect("in range");
                    let outer_r = rm[0] * d + rm[2];
                    let outer_c = cm[0] * d + cm[2];
                    let inner_r = rm[1] * m + rm[3];
                    let inner_c = cm[1] * m + cm[3];
                    outer.get(outer_r, outer_c).clone() * block.get(inner_r, inner_c).clone()
                });
                rebuilt = rebuilt.add(&term)?;
            }
        }
    }
    if rebuilt != flat {
        return Err(Error::Structure(
            "diagonal structure does not reproduce the element".into(),
        ));
    }

    let mut trace_sum: Mat<T> = Mat::zeros(m, m);
    for j in 0..d {
        trace_sum = trace_sum.add(&delta_of_flat(structure.block(j, j), m)?)?;
    }
    if trace_sum != Mat::<T>::identity(m) {
        return Err(Error::Structure(
            "diagonal blocks do not sum to the identity under delta".into(),
        ));
    }
    Ok(structure)
}
