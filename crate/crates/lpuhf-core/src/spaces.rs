//! Weighted finite atomic measure spaces, ℓᵖ norms, and norming functionals.

use crate::error::{Error, Result};
use crate::C64;

/// Tolerance under which a weight vector counts as normalized.
pub const NORMALIZED_TOL: f64 = 1e-12;

/// The exponent of an ℓᵖ space: finite `p ≥ 1` or `∞`.
///
/// A finite exponent optionally remembers the exact integer ratio it was
/// supplied as, which keeps duality arithmetic exact (the dual of `3/2` is
/// `3`, not a rounded quotient). `∞` is accepted by bound computations only,
/// never by algebra constructors.
#[derive(Clone, Copy, Debug)]
pub enum Exponent {
    /// Finite exponent with its value and, when supplied, the exact ratio.
    Finite { value: f64, ratio: Option<(i64, i64)> },
    /// The supremum norm.
    Inf,
}

impl Exponent {
    /// The supremum-norm exponent.
    pub const INF: Exponent = Exponent::Inf;

    /// Finite exponent from a float value.
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::Input(format!("exponent must satisfy p >= 1, got {p}")));
        }
        Ok(Exponent::Finite { value: p, ratio: None })
    }

    /// Finite exponent from an exact ratio `num/den`.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den <= 0 || num <= 0 {
            return Err(Error::Input(format!(
                "exponent ratio must be positive, got {num}/{den}"
            )));
        }
        if num < den {
            return Err(Error::Input(format!(
                "exponent must satisfy p >= 1, got {num}/{den}"
            )));
        }
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        Ok(Exponent::Finite {
            value: num as f64 / den as f64,
            ratio: Some((num, den)),
        })
    }

    /// The numerical value; `∞` maps to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite { value, .. } => *value,
            Exponent::Inf => f64::INFINITY,
        }
    }

    /// True for a finite exponent.
    pub fn is_finite(&self) -> bool {
        matches!(self, Exponent::Finite { .. })
    }

    /// True for `p = 1`.
    pub fn is_one(&self) -> bool {
        matches!(self, Exponent::Finite { value, .. } if *value == 1.0)
    }

    /// True for `p = 2`.
    pub fn is_two(&self) -> bool {
        matches!(self, Exponent::Finite { value, .. } if *value == 2.0)
    }

    /// True for `p = ∞`.
    pub fn is_inf(&self) -> bool {
        matches!(self, Exponent::Inf)
    }
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Exponent::Inf, Exponent::Inf) => true,
            (Exponent::Finite { value: a, .. }, Exponent::Finite { value: b, .. }) => a == b,
            _ => false,
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// The dual exponent `q` with `1/p + 1/q = 1`; duals of `1` and `∞` swap.
pub fn dual_exponent(p: &Exponent) -> Exponent {
    match p {
        Exponent::Inf => Exponent::Finite { value: 1.0, ratio: Some((1, 1)) },
        Exponent::Finite { value, ratio } => {
            if *value == 1.0 {
                Exponent::Inf
            } else if let Some((n, d)) = ratio {
                Exponent::Finite {
                    value: *n as f64 / (*n - *d) as f64,
                    ratio: Some((*n, *n - *d)),
                }
            } else {
                Exponent::Finite { value: value / (value - 1.0), ratio: None }
            }
        }
    }
}

/// Finite atomic measure: ordered atom labels with positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl AtomicMeasure {
    /// Measure from explicit labels and weights.
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::Input(format!(
                "{} labels but {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if let Some(j) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Input(format!(
                "weight {} of atom '{}' is not positive",
                weights[j], labels[j]
            )));
        }
        Ok(AtomicMeasure { labels, weights })
    }

    /// Normalized counting measure on `d` atoms: every weight is `1/d`.
    pub fn normalized_counting(d: usize) -> Self {
        let w = 1.0 / d as f64;
        AtomicMeasure {
            labels: (1..=d).map(|j| j.to_string()).collect(),
            weights: vec![w; d],
        }
    }

    /// Counting measure on `d` atoms with unit weights.
    pub fn unit_weights(d: usize) -> Self {
        AtomicMeasure {
            labels: (1..=d).map(|j| j.to_string()).collect(),
            weights: vec![1.0; d],
        }
    }

    /// Product measure: atom pairs in lexicographic order, weights multiply.
    pub fn product(&self, other: &AtomicMeasure) -> AtomicMeasure {
        let mut labels = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (la, wa) in self.labels.iter().zip(&self.weights) {
            for (lb, wb) in other.labels.iter().zip(&other.weights) {
                labels.push(format!("{la}.{lb}"));
                weights.push(wa * wb);
            }
        }
        AtomicMeasure { labels, weights }
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// True when there are no atoms.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight of atom `j` (0-based).
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    /// All weights in atom order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Label of atom `j` (0-based).
    pub fn label(&self, j: usize) -> &str {
        &self.labels[j]
    }

    /// All labels in atom order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// True when the weights sum to 1 within [`NORMALIZED_TOL`].
    pub fn is_normalized(&self) -> bool {
        (self.weights.iter().sum::<f64>() - 1.0).abs() <= NORMALIZED_TOL
    }

    /// True when every weight equals every other exactly.
    pub fn is_uniform(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }
}

/// Vector of complex coordinates indexed by the atoms of a measure.
#[derive(Clone, Debug, PartialEq)]
pub struct LpVec {
    /// Coordinates in atom order.
    pub coords: Vec<C64>,
}

impl LpVec {
    /// Vector from raw coordinates.
    pub fn new(coords: Vec<C64>) -> Self {
        LpVec { coords }
    }

    /// The zero vector on `d` atoms.
    pub fn zeros(d: usize) -> Self {
        LpVec { coords: vec![C64::new(0.0, 0.0); d] }
    }

    /// Indicator of atom `j` (0-based) on `d` atoms.
    pub fn indicator(d: usize, j: usize) -> Self {
        let mut v = Self::zeros(d);
        v.coords[j] = C64::new(1.0, 0.0);
        v
    }

    /// Number of coordinates.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    /// True when there are no coordinates.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Entrywise scaling by a complex scalar.
    pub fn scale(&self, c: C64) -> Self {
        LpVec { coords: self.coords.iter().map(|z| z * c).collect() }
    }
}

impl From<Vec<C64>> for LpVec {
    fn from(coords: Vec<C64>) -> Self {
        LpVec { coords }
    }
}

fn check_indexed(v: &LpVec, m: &AtomicMeasure) -> Result<()> {
    if v.len() != m.len() {
        return Err(Error::Input(format!(
            "vector has {} coordinates but the measure has {} atoms",
            v.len(),
            m.len()
        )));
    }
    Ok(())
}

/// The norm `(Σ_j w_j |v_j|^p)^{1/p}`, or `max_j |v_j|` for `p = ∞`.
pub fn vector_norm(v: &LpVec, p: &Exponent, m: &AtomicMeasure) -> Result<f64> {
    check_indexed(v, m)?;
    match p {
        Exponent::Inf => Ok(v.coords.iter().map(|z| z.norm()).fold(0.0, f64::max)),
        Exponent::Finite { value, .. } => {
            let p = *value;
            if p == 1.0 {
                Ok(v
                    .coords
                    .iter()
                    .zip(m.weights())
                    .map(|(z, w)| w * z.norm())
                    .sum())
            } else if p == 2.0 {
                Ok(v
                    .coords
                    .iter()
                    .zip(m.weights())
                    .map(|(z, w)| w * z.norm_sqr())
                    .sum::<f64>()
                    .sqrt())
            } else {
                let sum: f64 = v
                    .coords
                    .iter()
                    .zip(m.weights())
                    .map(|(z, w)| w * z.norm().powf(p))
                    .sum();
                Ok(sum.powf(1.0 / p))
            }
        }
    }
}

/// Norming functional of a nonzero vector: `ω_j = sgn(conj(v_j)) (|v_j|/‖v‖)^{p−1}`.
///
/// The pairing convention is weighted, `⟨ω, v⟩ = Σ_j w_j ω_j v_j`, so the
/// closed form is weight-free; the pairing returns `‖v‖_p` and the dual norm
/// `‖ω‖_{p'}` is 1.
pub fn norming_functional(v: &LpVec, p: &Exponent, m: &AtomicMeasure) -> Result<LpVec> {
    check_indexed(v, m)?;
    let Exponent::Finite { value, .. } = p else {
        return Err(Error::Input("norming functional requires finite p".into()));
    };
    let norm = vector_norm(v, p, m)?;
    if norm == 0.0 {
        return Err(Error::Input("norming functional of the zero vector".into()));
    }
    let e = value - 1.0;
    let coords = v
        .coords
        .iter()
        .map(|z| {
            let a = z.norm();
            if a == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                let sgn = z.conj() / a;
                if e == 0.0 {
                    sgn
                } else if e == 1.0 {
                    sgn * (a / norm)
                } else {
                    sgn * (a / norm).powf(e)
                }
            }
        })
        .collect();
    Ok(LpVec { coords })
}

/// The weighted dual pairing `Σ_j w_j ω_j v_j`.
pub fn pairing(omega: &LpVec, v: &LpVec, m: &AtomicMeasure) -> Result<C64> {
    check_indexed(omega, m)?;
    check_indexed(v, m)?;
    Ok(omega
        .coords
        .iter()
        .zip(&v.coords)
        .zip(m.weights())
        .map(|((o, z), w)| o * z * C64::new(*w, 0.0))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn norm_on_normalized_counting() {
        let m = AtomicMeasure::normalized_counting(2);
        let v = LpVec::new(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let p = Exponent::new(2.0).unwrap();
        assert_eq!(vector_norm(&v, &p, &m).unwrap(), 1.0);
    }

    #[test]
    fn indicator_norm_scales_with_atom_weight() {
        let d = 5;
        let m = AtomicMeasure::normalized_counting(d);
        let v = LpVec::indicator(d, 0);
        let p = Exponent::new(3.0).unwrap();
        let got = vector_norm(&v, &p, &m).unwrap();
        assert!((got - (d as f64).powf(-1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn euclidean_on_unit_weights() {
        let m = AtomicMeasure::unit_weights(2);
        let v = LpVec::new(vec![c(3.0, 0.0), c(4.0, 0.0)]);
        let p = Exponent::new(2.0).unwrap();
        assert_eq!(vector_norm(&v, &p, &m).unwrap(), 5.0);
    }

    #[test]
    fn dual_exponent_table() {
        assert!(dual_exponent(&Exponent::new(2.0).unwrap()).is_two());
        assert!(dual_exponent(&Exponent::new(1.0).unwrap()).is_inf());
        assert_eq!(dual_exponent(&Exponent::INF).value(), 1.0);
        let d3 = dual_exponent(&Exponent::new(3.0).unwrap());
        assert!((d3.value() - 1.5).abs() < 1e-15);
        let dr = dual_exponent(&Exponent::from_ratio(3, 2).unwrap());
        assert_eq!(dr.value(), 3.0);
    }

    #[test]
    fn norming_functional_identities() {
        let m = AtomicMeasure::normalized_counting(3);
        let v = LpVec::new(vec![c(1.0, 2.0), c(-0.5, 0.25), c(0.0, -3.0)]);
        for p in [1.0, 1.5, 2.0, 2.5, 3.0] {
            let p = Exponent::new(p).unwrap();
            let omega = norming_functional(&v, &p, &m).unwrap();
            let pair = pairing(&omega, &v, &m).unwrap();
            let norm = vector_norm(&v, &p, &m).unwrap();
            assert!((pair.re - norm).abs() <= 1e-12 * norm, "pairing at p={:?}", p);
            assert!(pair.im.abs() <= 1e-12 * norm);
            let q = dual_exponent(&p);
            let dual = vector_norm(&omega, &q, &m).unwrap();
            assert!((dual - 1.0).abs() <= 1e-12, "dual norm at p={:?}: {dual}", p);
        }
    }

    #[test]
    fn simple_norming_cases() {
        let m = AtomicMeasure::unit_weights(2);
        let p2 = Exponent::new(2.0).unwrap();
        let v = LpVec::new(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let omega = norming_functional(&v, &p2, &m).unwrap();
        assert_eq!(omega.coords[0], c(1.0, 0.0));
        assert_eq!(omega.coords[1], c(0.0, 0.0));

        let p1 = Exponent::new(1.0).unwrap();
        let v = LpVec::new(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let omega = norming_functional(&v, &p1, &m).unwrap();
        assert_eq!(omega.coords, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(pairing(&omega, &v, &m).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn zero_vector_is_rejected() {
        let m = AtomicMeasure::normalized_counting(2);
        let v = LpVec::zeros(2);
        let p = Exponent::new(2.0).unwrap();
        assert!(norming_functional(&v, &p, &m).is_err());
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let m = AtomicMeasure::normalized_counting(3);
        let v = LpVec::zeros(2);
        let p = Exponent::new(2.0).unwrap();
        assert!(vector_norm(&v, &p, &m).is_err());
    }

    #[test]
    fn measure_validation() {
        assert!(AtomicMeasure::new(vec!["a".into()], vec![0.0]).is_err());
        assert!(AtomicMeasure::new(vec!["a".into()], vec![1.0, 2.0]).is_err());
        assert!(AtomicMeasure::normalized_counting(4).is_normalized());
        assert!(!AtomicMeasure::unit_weights(4).is_normalized());
    }
}
