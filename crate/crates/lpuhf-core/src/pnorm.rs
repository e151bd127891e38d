//! Dense matrices on weighted atomic spaces and certified p→p operator norms.
//!
//! Every norm computation returns a [`NormInterval`]: a certified enclosure
//! `[lower, upper]` with method provenance and, where available, a witness
//! that reproduces the lower bound. Exact closed forms (p ∈ {1, 2, ∞},
//! monomial matrices, diagonal conjugations) collapse the interval to width
//! zero; everything else is bracketed by a Boyd-style power iteration from
//! below and Riesz–Thorin interpolation from above.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spaces::{vector_norm, AtomicMeasure, Exponent, LpVec};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Structural knowledge about a matrix that survives algebraic operations.
///
/// `ScaledMonomial` marks a matrix known to have at most one nonzero entry
/// per row and per column (a scalar times a generalized permutation); the
/// tag is preserved by products, Kronecker products, scaling, and
/// transposition, so monomial norm detection survives tensoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// No structural claim.
    General,
    /// At most one nonzero per row and per column.
    ScaledMonomial,
}

/// Dense matrix over a [`Scalar`], acting between weighted atomic spaces.
#[derive(Clone, Debug)]
pub struct Mat<T: Scalar> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
    domain: AtomicMeasure,
    codomain: AtomicMeasure,
    structure: Structure,
}

impl<T: Scalar> PartialEq for Mat<T> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }
}

impl<T: Scalar> Mat<T> {
    /// Matrix from row-major entries and explicit measures.
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<T>,
        domain: AtomicMeasure,
        codomain: AtomicMeasure,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Input(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if domain.len() != cols || codomain.len() != rows {
            return Err(Error::Input(format!(
                "measures ({} domain, {} codomain atoms) do not match a {rows}x{cols} matrix",
                domain.len(),
                codomain.len()
            )));
        }
        Ok(Mat { rows, cols, entries, domain, codomain, structure: Structure::General })
    }

    /// Square matrix on the normalized counting measure.
    pub fn square(d: usize, entries: Vec<T>) -> Result<Self> {
        let m = AtomicMeasure::normalized_counting(d);
        Mat::new(d, d, entries, m.clone(), m)
    }

    /// Matrix built entrywise from `f(row, col)` on the normalized counting measure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Mat {
            rows,
            cols,
            entries,
            domain: AtomicMeasure::normalized_counting(cols),
            codomain: AtomicMeasure::normalized_counting(rows),
            structure: Structure::General,
        }
    }

    /// Zero matrix on the normalized counting measure.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| T::zero())
    }

    /// Identity on `d` atoms with normalized counting measure.
    pub fn identity(d: usize) -> Self {
        Mat::from_fn(d, d, |r, c| if r == c { T::one() } else { T::zero() })
            .with_structure(Structure::ScaledMonomial)
    }

    /// Diagonal matrix from its diagonal entries.
    pub fn diag(entries: &[T]) -> Self {
        let d = entries.len();
        Mat::from_fn(d, d, |r, c| if r == c { entries[r].clone() } else { T::zero() })
            .with_structure(Structure::ScaledMonomial)
    }

    /// Same matrix with the given structure tag.
    pub fn with_structure(mut self, structure: Structure) -> Self {
        self.structure = structure;
        self
    }

    /// Same matrix carried by different measures.
    pub fn with_measures(mut self, domain: AtomicMeasure, codomain: AtomicMeasure) -> Result<Self> {
        if domain.len() != self.cols || codomain.len() != self.rows {
            return Err(Error::Input("measure sizes do not match the matrix".into()));
        }
        self.domain = domain;
        self.codomain = codomain;
        Ok(self)
    }

    /// Row count.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Domain measure.
    pub fn domain(&self) -> &AtomicMeasure {
        &self.domain
    }

    /// Codomain measure.
    pub fn codomain(&self) -> &AtomicMeasure {
        &self.codomain
    }

    /// Structure tag.
    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Entry at `(row, col)`, 0-based.
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.entries[row * self.cols + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Mat<T>) -> Result<Mat<T>> {
        if self.cols != other.rows {
            return Err(Error::Input(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = vec![T::zero(); self.rows * other.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let t = &mut entries[r * other.cols + c];
                    *t = t.clone() + a.clone() * b.clone();
                }
            }
        }
        let structure = match (self.structure, other.structure) {
            (Structure::ScaledMonomial, Structure::ScaledMonomial) => Structure::ScaledMonomial,
            _ => Structure::General,
        };
        Ok(Mat {
            rows: self.rows,
            cols: other.cols,
            entries,
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
            structure,
        })
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Mat<T>) -> Result<Mat<T>> {
        self.zip_entries(other, |a, b| a + b)
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Mat<T>) -> Result<Mat<T>> {
        self.zip_entries(other, |a, b| a - b)
    }

    fn zip_entries(&self, other: &Mat<T>, f: impl Fn(T, T) -> T) -> Result<Mat<T>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Input("shape mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| f(a.clone(), b.clone()))
            .collect();
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            entries,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            structure: Structure::General,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, c: &T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.clone() * c.clone()).collect(),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            structure: self.structure,
        }
    }

    /// Transpose; measures swap.
    pub fn transpose(&self) -> Mat<T> {
        let mut m = Mat::transposed_with(self, |e| e.clone());
        m.structure = self.structure;
        m
    }

    /// Conjugate transpose; measures swap.
    pub fn conj_transpose(&self) -> Mat<T> {
        let mut m = Mat::transposed_with(self, |e| e.conjugate());
        m.structure = self.structure;
        m
    }

    fn transposed_with(src: &Mat<T>, f: impl Fn(&T) -> T) -> Mat<T> {
        let mut entries = Vec::with_capacity(src.entries.len());
        for c in 0..src.cols {
            for r in 0..src.rows {
                entries.push(f(src.get(r, c)));
            }
        }
        Mat {
            rows: src.cols,
            cols: src.rows,
            entries,
            domain: src.codomain.clone(),
            codomain: src.domain.clone(),
            structure: Structure::General,
        }
    }

    /// True when every off-diagonal entry is zero.
    pub fn is_diagonal(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| r == c || self.get(r, c).is_zero())
            })
    }

    /// Diagonal entries when the matrix is diagonal.
    pub fn diagonal_entries(&self) -> Option<Vec<T>> {
        if self.is_diagonal() {
            Some((0..self.rows).map(|r| self.get(r, r).clone()).collect())
        } else {
            None
        }
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Mat<T>> {
        if self.rows != self.cols {
            return Err(Error::Input("only square matrices can be inverted".into()));
        }
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut inv: Vec<T> = Mat::<T>::identity(n).entries;
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| {
                    a[r1 * n + col]
                        .pivot_weight()
                        .partial_cmp(&a[r2 * n + col].pivot_weight())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[pivot_row * n + col].is_zero() {
                return Err(Error::Input("matrix is singular".into()));
            }
            if pivot_row != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot_row * n + k);
                    inv.swap(col * n + k, pivot_row * n + k);
                }
            }
            let pivot = a[col * n + col].clone();
            for k in 0..n {
                a[col * n + k] = a[col * n + k].clone() / pivot.clone();
                inv[col * n + k] = inv[col * n + k].clone() / pivot.clone();
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for k in 0..n {
                    a[r * n + k] = a[r * n + k].clone() - factor.clone() * a[col * n + k].clone();
                    inv[r * n + k] =
                        inv[r * n + k].clone() - factor.clone() * inv[col * n + k].clone();
                }
            }
        }
        Ok(Mat {
            rows: n,
            cols: n,
            entries: inv,
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            structure: self.structure,
        })
    }

    /// Largest entry magnitude (numerical image for exact scalars).
    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.to_c64().norm())
            .fold(0.0, f64::max)
    }

    /// Numerical image of the matrix.
    pub fn to_c64(&self) -> Mat<C64> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.to_c64()).collect(),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            structure: self.structure,
        }
    }
}

impl Mat<C64> {
    /// Image of a vector under the matrix.
    pub fn apply(&self, v: &LpVec) -> Result<LpVec> {
        if v.len() != self.cols {
            return Err(Error::Input(format!(
                "vector of length {} fed to a {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let coords = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.get(r, c) * v.coords[c])
                    .sum::<C64>()
            })
            .collect();
        Ok(LpVec::new(coords))
    }
}

/// Quotient `‖Av‖_p / ‖v‖_p` in the weighted norms of `a`'s measures.
///
/// Any nonzero `v` certifies this value as a lower bound on the operator
/// norm; it is how witnesses reproduce interval lower bounds.
pub fn rayleigh_quotient(a: &Mat<C64>, v: &LpVec, p: &Exponent) -> Result<f64> {
    let denom = vector_norm(v, p, a.domain())?;
    if denom == 0.0 {
        return Err(Error::Input("rayleigh quotient of the zero vector".into()));
    }
    let num = vector_norm(&a.apply(v)?, p, a.codomain())?;
    Ok(num / denom)
}

/// Provenance tag for one side of a certified interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Exact maximal weighted column sum at `p = 1`.
    ExactP1,
    /// Singular value iteration at `p = 2`.
    ExactP2,
    /// Exact maximal row sum at `p = ∞`.
    ExactPinf,
    /// Exact monomial closed form.
    ExactMonomial,
    /// Boyd-style power iteration lower bound.
    Boyd,
    /// Riesz–Thorin interpolation upper bound.
    Interp,
    /// Caller-supplied or sandwich upper bound.
    Sandwich,
}

impl Method {
    /// Canonical tag string.
    pub fn tag(&self) -> &'static str {
        match self {
            Method::ExactP1 => "EXACT_P1",
            Method::ExactP2 => "EXACT_P2",
            Method::ExactPinf => "EXACT_PINF",
            Method::ExactMonomial => "EXACT_MONOMIAL",
            Method::Boyd => "BOYD",
            Method::Interp => "INTERP",
            Method::Sandwich => "SANDWICH",
        }
    }
}

/// Witness reproducing an interval's lower bound.
#[derive(Clone, Debug)]
pub enum Witness {
    /// Vector `v` with `‖Av‖/‖v‖` equal to the lower bound.
    Vector(LpVec),
    /// Matrix argument achieving the lower bound of a map norm.
    Argument(Box<Mat<C64>>),
}

/// Certified enclosure `[lower, upper]` of an operator norm.
#[derive(Clone, Debug)]
pub struct NormInterval {
    /// Certified lower bound.
    pub lower: f64,
    /// Certified upper bound.
    pub upper: f64,
    /// Witness reproducing `lower`, when one exists.
    pub witness: Option<Witness>,
    /// Provenance of the two sides.
    pub methods: Vec<Method>,
}

impl NormInterval {
    /// Width-zero interval at an exactly known value.
    pub fn exact(value: f64, method: Method, witness: Option<Witness>) -> Self {
        NormInterval { lower: value, upper: value, witness, methods: vec![method] }
    }

    /// Interval from certified bounds; the upper bound is clamped to stay valid.
    pub fn from_bounds(
        lower: f64,
        upper: f64,
        methods: Vec<Method>,
        witness: Option<Witness>,
    ) -> Self {
        NormInterval { lower, upper: upper.max(lower), witness, methods }
    }

    /// Interval width.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// True when the interval contains `x`.
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Interval product, valid for norms (both sides nonnegative).
    pub fn mul(&self, other: &NormInterval) -> NormInterval {
        NormInterval {
            lower: self.lower * other.lower,
            upper: (self.upper * other.upper).max(self.lower * other.lower),
            witness: None,
            methods: merge_methods(&self.methods, &other.methods),
        }
    }

    /// Interval square.
    pub fn squared(&self) -> NormInterval {
        self.mul(self)
    }

    /// Scaling by a nonnegative factor.
    pub fn scaled(&self, c: f64) -> NormInterval {
        debug_assert!(c >= 0.0);
        NormInterval {
            lower: self.lower * c,
            upper: self.upper * c,
            witness: None,
            methods: self.methods.clone(),
        }
    }

    /// Supremum of two intervals; on ties the first argument's data wins.
    pub fn sup(self, other: NormInterval) -> NormInterval {
        let (lower, witness) = if other.lower > self.lower {
            (other.lower, other.witness)
        } else {
            (self.lower, self.witness)
        };
        NormInterval {
            lower,
            upper: self.upper.max(other.upper),
            witness,
            methods: merge_methods(&self.methods, &other.methods),
        }
    }
}

fn merge_methods(a: &[Method], b: &[Method]) -> Vec<Method> {
    let mut out = a.to_vec();
    for m in b {
        if !out.contains(m) {
            out.push(*m);
        }
    }
    out
}

/// Weight-reduced entries: `B = D_cod^{1/p} A D_dom^{-1/p}` has the same
/// unweighted p→p norm as `A` has between its weighted spaces.
fn reduced_entries(a: &Mat<C64>, p: &Exponent) -> Vec<C64> {
    let uniform_same = a.domain().is_uniform()
        && a.codomain().is_uniform()
        && (a.domain().is_empty()
            || a.codomain().is_empty()
            || a.domain().weight(0) == a.codomain().weight(0));
    if uniform_same || p.is_inf() {
        return a.entries().to_vec();
    }
    let pv = p.value();
    let wc: Vec<f64> = a.codomain().weights().iter().map(|w| w.powf(1.0 / pv)).collect();
    let wd: Vec<f64> = a.domain().weights().iter().map(|w| w.powf(-1.0 / pv)).collect();
    let mut out = Vec::with_capacity(a.entries().len());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            out.push(a.get(r, c) * C64::new(wc[r] * wd[c], 0.0));
        }
    }
    out
}

/// Monomial check: at most one nonzero per row and per column.
/// Returns the largest entry magnitude and its position.
fn monomial_value(entries: &[C64], rows: usize, cols: usize) -> Option<(f64, Option<(usize, usize)>)> {
    let mut col_used = vec![false; cols];
    let mut best: f64 = 0.0;
    let mut at = None;
    for r in 0..rows {
        let mut seen = false;
        for c in 0..cols {
            let z = entries[r * cols + c];
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            if seen || col_used[c] {
                return None;
            }
            seen = true;
            col_used[c] = true;
            let m = z.norm();
            if m > best {
                best = m;
                at = Some((r, c));
            }
        }
    }
    Some((best, at))
}

fn unweighted_norm(v: &[C64], p: &Exponent) -> f64 {
    match p {
        Exponent::Inf => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
        Exponent::Finite { value, .. } => {
            let pv = *value;
            if pv == 1.0 {
                v.iter().map(|z| z.norm()).sum()
            } else if pv == 2.0 {
                v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            } else {
                v.iter()
                    .map(|z| z.norm().powf(pv))
                    .sum::<f64>()
                    .powf(1.0 / pv)
            }
        }
    }
}

fn mat_vec(entries: &[C64], rows: usize, cols: usize, x: &[C64]) -> Vec<C64> {
    (0..rows)
        .map(|r| (0..cols).map(|c| entries[r * cols + c] * x[c]).sum())
        .collect()
}

fn conj_mat_vec(entries: &[C64], rows: usize, cols: usize, y: &[C64]) -> Vec<C64> {
    (0..cols)
        .map(|c| (0..rows).map(|r| entries[r * cols + c].conj() * y[r]).sum())
        .collect()
}

/// Duality map `ψ_p(y)_j = |y_j|^{p-1} sgn(y_j)`.
fn duality_map(y: &[C64], p: f64) -> Vec<C64> {
    y.iter()
        .map(|z| {
            let m = z.norm();
            if m < 1e-300 {
                C64::new(0.0, 0.0)
            } else if p == 2.0 {
                *z
            } else {
                z * C64::new(m.powf(p - 2.0), 0.0)
            }
        })
        .collect()
}

/// Exact `p = 1` norm of unweighted entries: maximal column sum.
fn p1_norm(entries: &[C64], rows: usize, cols: usize) -> (f64, usize) {
    let mut best = 0.0;
    let mut at = 0;
    for c in 0..cols {
        let s: f64 = (0..rows).map(|r| entries[r * cols + c].norm()).sum();
        if s > best {
            best = s;
            at = c;
        }
    }
    (best, at)
}

/// Exact `p = ∞` norm of unweighted entries: maximal row sum.
fn pinf_norm(entries: &[C64], rows: usize, cols: usize) -> (f64, usize) {
    let mut best = 0.0;
    let mut at = 0;
    for r in 0..rows {
        let s: f64 = (0..cols).map(|c| entries[r * cols + c].norm()).sum();
        if s > best {
            best = s;
            at = r;
        }
    }
    (best, at)
}

const BOYD_TOL: f64 = 1e-12;
const BOYD_MAX_ITERS: usize = 10_000;
const BOYD_RESTARTS: usize = 8;
const BOYD_SEED: u64 = 0xC0FFEE;

/// Boyd-style power iteration on unweighted entries.
/// Returns the best quotient found and the vector achieving it.
fn boyd_lower(
    entries: &[C64],
    rows: usize,
    cols: usize,
    p: f64,
    upper_hint: f64,
) -> (f64, Vec<C64>) {
    let q = p / (p - 1.0);
    let mut best = 0.0;
    let mut best_x = vec![C64::new(1.0, 0.0); cols];

    let consider = |x: &[C64], best: &mut f64, best_x: &mut Vec<C64>| -> f64 {
        let nx = unweighted_norm(x, &Exponent::Finite { value: p, ratio: None });
        if nx == 0.0 {
            return 0.0;
        }
        let y = mat_vec(entries, rows, cols, x);
        let quot = unweighted_norm(&y, &Exponent::Finite { value: p, ratio: None }) / nx;
        if quot > *best {
            *best = quot;
            *best_x = x.to_vec();
        }
        quot
    };

    for c in 0..cols {
        let mut e = vec![C64::new(0.0, 0.0); cols];
        e[c] = C64::new(1.0, 0.0);
        consider(&e, &mut best, &mut best_x);
    }

    let iterate = |start: Vec<C64>, best: &mut f64, best_x: &mut Vec<C64>| {
        let mut x = start;
        let nx = unweighted_norm(&x, &Exponent::Finite { value: p, ratio: None });
        if nx == 0.0 {
            return;
        }
        for z in &mut x {
            *z /= nx;
        }
        let mut prev = -1.0;
        for _ in 0..BOYD_MAX_ITERS {
            let quot = consider(&x, best, best_x);
            if (quot - prev).abs() < BOYD_TOL * quot.max(1.0) {
                break;
            }
            prev = quot;
            let y = mat_vec(entries, rows, cols, &x);
            let z = duality_map(&y, p);
            let w = conj_mat_vec(entries, rows, cols, &z);
            let mut next = duality_map(&w, q);
            let nn = unweighted_norm(&next, &Exponent::Finite { value: p, ratio: None });
            if nn == 0.0 {
                break;
            }
            for t in &mut next {
                *t /= nn;
            }
            x = next;
        }
    };

    iterate(vec![C64::new(1.0, 0.0); cols], &mut best, &mut best_x);

    if best < 0.9 * upper_hint {
        let mut rng = ChaCha8Rng::seed_from_u64(BOYD_SEED);
        for _ in 0..BOYD_RESTARTS {
            let start: Vec<C64> = (0..cols)
                .map(|_| {
                    C64::new(
                        rng.random::<f64>() * 2.0 - 1.0,
                        rng.random::<f64>() * 2.0 - 1.0,
                    )
                })
                .collect();
            iterate(start, &mut best, &mut best_x);
        }
    }

    (best, best_x)
}

const JACOBI_SWEEPS: usize = 60;
const JACOBI_TOL: f64 = 1e-14;

/// One-sided Jacobi on the columns of an `rows x cols` complex matrix.
/// Returns the right singular vector of the largest singular value and a
/// certified upper bound on that value via Gershgorin on the final Gram matrix.
fn jacobi_top_singular(entries: &[C64], rows: usize, cols: usize) -> (Vec<C64>, f64) {
    let mut a: Vec<C64> = entries.to_vec();
    let mut v: Vec<C64> = (0..cols * cols)
        .map(|i| {
            if i / cols == i % cols {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let col = |m: &[C64], width: usize, k: usize, r: usize| m[r * width + k];

    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut g = C64::new(0.0, 0.0);
                for r in 0..rows {
                    let ai = col(&a, cols, i, r);
                    let aj = col(&a, cols, j, r);
                    alpha += ai.norm_sqr();
                    beta += aj.norm_sqr();
                    g += ai.conj() * aj;
                }
                let gm = g.norm();
                if gm <= JACOBI_TOL * (alpha * beta).sqrt() || gm == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = g / gm;
                let zeta = (beta - alpha) / (2.0 * gm);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let rotate = |m: &mut [C64], width: usize, height: usize| {
                    for r in 0..height {
                        let u = m[r * width + i];
                        let w = m[r * width + j] * phase.conj();
                        m[r * width + i] = u * cs - w * sn;
                        m[r * width + j] = u * sn + w * cs;
                    }
                };
                rotate(&mut a, cols, rows);
                rotate(&mut v, cols, cols);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut best = 0.0;
    let mut k_star = 0;
    for k in 0..cols {
        let norm_sq: f64 = (0..rows).map(|r| col(&a, cols, k, r).norm_sqr()).sum();
        if norm_sq > best {
            best = norm_sq;
            k_star = k;
        }
    }

    let mut gersh: f64 = 0.0;
    for i in 0..cols {
        let mut diag = 0.0;
        let mut off = 0.0;
        for j in 0..cols {
            let mut g = C64::new(0.0, 0.0);
            for r in 0..rows {
                g += col(&a, cols, i, r).conj() * col(&a, cols, j, r);
            }
            if i == j {
                diag = g.re;
            } else {
                off += g.norm();
            }
        }
        gersh = gersh.max(diag + off);
    }

    let witness = (0..cols).map(|r| col(&v, cols, k_star, r)).collect();
    (witness, gersh.max(0.0).sqrt())
}

/// Witness vector in the original weighted coordinates from reduced coordinates.
fn witness_to_original(x: &[C64], domain: &AtomicMeasure, p: &Exponent, reduced: bool) -> LpVec {
    if !reduced || p.is_inf() {
        return LpVec::new(x.to_vec());
    }
    let pv = p.value();
    LpVec::new(
        x.iter()
            .enumerate()
            .map(|(k, z)| z * C64::new(domain.weight(k).powf(-1.0 / pv), 0.0))
            .collect(),
    )
}

/// Certified p→p operator norm of a matrix between its weighted spaces.
pub fn opnorm(a: &Mat<C64>, p: &Exponent) -> NormInterval {
    opnorm_with_sandwich(a, p, None)
}

/// [`opnorm`] with an additional caller-supplied certified upper bound.
pub fn opnorm_with_sandwich(a: &Mat<C64>, p: &Exponent, sandwich: Option<f64>) -> NormInterval {
    if a.rows() == 0 || a.cols() == 0 {
        return NormInterval::exact(0.0, Method::ExactMonomial, None);
    }
    let uniform_same = a.domain().is_uniform()
        && a.codomain().is_uniform()
        && a.domain().weight(0) == a.codomain().weight(0);
    let needs_reduction = !(uniform_same || p.is_inf());
    let entries = reduced_entries(a, p);
    debug_assert!(
        a.structure() != Structure::ScaledMonomial
            || monomial_value(&entries, a.rows(), a.cols()).is_some()
    );

    let mut interval = if let Some((value, at)) = monomial_value(&entries, a.rows(), a.cols()) {
        let witness = at.map(|(_, c)| {
            let mut x = vec![C64::new(0.0, 0.0); a.cols()];
            x[c] = C64::new(1.0, 0.0);
            Witness::Vector(witness_to_original(&x, a.domain(), p, needs_reduction))
        });
        let witness = witness.unwrap_or_else(|| {
            Witness::Vector(LpVec::indicator(a.cols(), 0))
        });
        NormInterval::exact(value, Method::ExactMonomial, Some(witness))
    } else if p.is_one() {
        let (value, c) = p1_norm(&entries, a.rows(), a.cols());
        let mut x = vec![C64::new(0.0, 0.0); a.cols()];
        x[c] = C64::new(1.0, 0.0);
        let witness = Witness::Vector(witness_to_original(&x, a.domain(), p, needs_reduction));
        NormInterval::exact(value, Method::ExactP1, Some(witness))
    } else if p.is_inf() {
        let (value, r) = pinf_norm(&entries, a.rows(), a.cols());
        let x: Vec<C64> = (0..a.cols())
            .map(|c| {
                let z = entries[r * a.cols() + c];
                let m = z.norm();
                if m == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    z.conj() / m
                }
            })
            .collect();
        let witness = Witness::Vector(LpVec::new(x));
        NormInterval::exact(value, Method::ExactPinf, Some(witness))
    } else if p.is_two() {
        let (x, upper) = jacobi_top_singular(&entries, a.rows(), a.cols());
        let witness = witness_to_original(&x, a.domain(), p, needs_reduction);
        let lower = rayleigh_quotient(a, &witness, p).unwrap_or(0.0);
        NormInterval::from_bounds(lower, upper, vec![Method::ExactP2], Some(Witness::Vector(witness)))
    } else {
        let (one, _) = p1_norm(&entries, a.rows(), a.cols());
        let (inf, _) = pinf_norm(&entries, a.rows(), a.cols());
        let pv = p.value();
        let upper = if one == 0.0 || inf == 0.0 {
            0.0
        } else {
            one.powf(1.0 / pv) * inf.powf(1.0 - 1.0 / pv)
        };
        let (_, x) = boyd_lower(&entries, a.rows(), a.cols(), pv, upper);
        let witness = witness_to_original(&x, a.domain(), p, needs_reduction);
        let lower = rayleigh_quotient(a, &witness, p).unwrap_or(0.0);
        NormInterval::from_bounds(
            lower,
            upper,
            vec![Method::Boyd, Method::Interp],
            Some(Witness::Vector(witness)),
        )
    };

    if let Some(s) = sandwich {
        if s < interval.upper {
            interval.upper = s.max(interval.lower);
            if !interval.methods.contains(&Method::Sandwich) {
                interval.methods.push(Method::Sandwich);
            }
        }
    }
    interval
}

/// Certified norm of the conjugation map `a ↦ s a s⁻¹` on `L(ℓᵖ)`.
///
/// The value equals `‖s‖_p · ‖s⁻¹‖_p`; the product is exact (width zero)
/// when `s` is diagonal, where a matrix unit attains it.
pub fn conjugation_map_norm(s: &Mat<C64>, p: &Exponent) -> Result<NormInterval> {
    if s.rows() != s.cols() {
        return Err(Error::Input("conjugation needs a square matrix".into()));
    }
    let s_inv = s.inverse().map_err(|_| Error::Input("matrix is singular".into()))?;
    let n_s = opnorm(s, p);
    let n_inv = opnorm(&s_inv, p);
    let mut interval = n_s.mul(&n_inv);

    if let Some(diag) = s.diagonal_entries() {
        let moduli: Vec<f64> = diag.iter().map(|z| z.norm()).collect();
        let j_star = argmax(&moduli);
        let k_star = argmin(&moduli);
        let d = s.rows();
        let unit = Mat::from_fn(d, d, |r, c| {
            if r == j_star && c == k_star {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .with_structure(Structure::ScaledMonomial);
        interval.witness = Some(Witness::Argument(Box::new(unit)));
        interval.methods = vec![Method::ExactMonomial];
        return Ok(interval);
    }

    if p.is_finite() {
        if let (Some(Witness::Vector(v1)), Some(Witness::Vector(v2))) = (&n_s.witness, &n_inv.witness)
        {
            if let Ok(arg) = rank_one_conjugation_witness(s, &s_inv, v1, v2, p) {
                let num = opnorm(&s.mul(&arg).and_then(|m| m.mul(&s_inv))?, p);
                let den = opnorm(&arg, p);
                if den.upper > 0.0 {
                    let achieved = num.lower / den.upper;
                    if achieved > interval.lower {
                        interval.lower = achieved;
                        interval.upper = interval.upper.max(achieved);
                    }
                }
                interval.witness = Some(Witness::Argument(Box::new(arg)));
            }
        }
    }
    Ok(interval)
}

/// Rank-one argument `a = v1 ⊗ ω` built from norm witnesses of `s` and `s⁻¹`;
/// conjugating it reproduces the product `‖s‖‖s⁻¹‖`.
fn rank_one_conjugation_witness(
    s: &Mat<C64>,
    s_inv: &Mat<C64>,
    v1: &LpVec,
    v2: &LpVec,
    p: &Exponent,
) -> Result<Mat<C64>> {
    use crate::spaces::norming_functional;
    let u2 = s_inv.apply(v2)?;
    let n = vector_norm(&u2, p, s.domain())?;
    if n == 0.0 {
        return Err(Error::Input("degenerate witness".into()));
    }
    let u2 = u2.scale(C64::new(1.0 / n, 0.0));
    let omega = norming_functional(&u2, p, s.domain())?;
    let nv1 = vector_norm(v1, p, s.domain())?;
    if nv1 == 0.0 {
        return Err(Error::Input("degenerate witness".into()));
    }
    let d = s.rows();
    let dom = s.domain().clone();
    let mat = Mat::from_fn(d, d, |r, c| {
        v1.coords[r] / C64::new(nv1, 0.0) * omega.coords[c] * C64::new(dom.weight(c), 0.0)
    });
    mat.with_measures(s.domain().clone(), s.codomain().clone())
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}
