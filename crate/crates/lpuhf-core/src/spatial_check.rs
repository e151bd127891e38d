//! Spatial partial isometries on finite atomic measure spaces and the
//! spatiality test for representations of M_d.
//!
//! On an atomic space the measurable machinery collapses: a spatial partial
//! isometry is a partial bijection of atoms together with unimodular phases
//! and the change-of-measure factors `(w_dom/w_cod)^(1/p)`. That collapsed
//! form is the implemented semantics.

use crate::error::{Error, Result};
use crate::pnorm::Mat;
use crate::spaces::{AtomicMeasure, Exponent};
use crate::{C64, MatF};
use std::collections::{BTreeMap, BTreeSet};

/// Relative tolerance for unimodularity and weight-ratio checks.
const SPI_TOL: f64 = 1e-9;

/// A spatial partial isometry between finite atomic measure spaces:
/// a partial bijection of atoms with a unimodular phase per range atom.
#[derive(Clone, Debug)]
pub struct SpatialPartialIsometry {
    domain: AtomicMeasure,
    codomain: AtomicMeasure,
    atom_map: BTreeMap<usize, usize>,
    phase: BTreeMap<usize, C64>,
}

impl SpatialPartialIsometry {
    /// The domain measure.
    pub fn domain(&self) -> &AtomicMeasure {
        &self.domain
    }

    /// The codomain measure.
    pub fn codomain(&self) -> &AtomicMeasure {
        &self.codomain
    }

    /// Range atom → domain atom, a bijection between the supports.
    pub fn atom_map(&self) -> &BTreeMap<usize, usize> {
        &self.atom_map
    }

    /// Range atom → unimodular phase.
    pub fn phase(&self) -> &BTreeMap<usize, C64> {
        &self.phase
    }

    /// Domain atoms in the support.
    pub fn domain_support(&self) -> BTreeSet<usize> {
        self.atom_map.values().copied().collect()
    }

    /// Range atoms in the support.
    pub fn range_support(&self) -> BTreeSet<usize> {
        self.atom_map.keys().copied().collect()
    }

    /// Reassemble the operator matrix on the stored measures.
    pub fn matrix_of(&self, p: &Exponent) -> Result<MatF> {
        if !p.is_finite() {
            return Err(Error::Input("spatial factors need a finite exponent".into()));
        }
        let mut entries = vec![C64::new(0.0, 0.0); self.codomain.len() * self.domain.len()];
        for (&j, &k) in &self.atom_map {
            let factor =
                (self.domain.weight(k) / self.codomain.weight(j)).powf(1.0 / p.value());
            entries[j * self.domain.len() + k] = self.phase[&j] * factor;
        }
        Mat::new(
            self.codomain.len(),
            self.domain.len(),
            entries,
            self.domain.clone(),
            self.codomain.clone(),
        )
    }
}

/// Outcome of [`recognize_spi`]: a decomposition, or the first violation.
#[derive(Clone, Debug)]
pub enum SpiRecognition {
    /// The operator is a spatial partial isometry with this decomposition.
    Recognized(SpatialPartialIsometry),
    /// The operator is not one; the string names the first violation.
    Refused(String),
}

impl SpiRecognition {
    /// The decomposition, if recognized.
    pub fn recognized(&self) -> Option<&SpatialPartialIsometry> {
        match self {
            SpiRecognition::Recognized(spi) => Some(spi),
            SpiRecognition::Refused(_) => None,
        }
    }
}

/// Decide whether `a` is a spatial partial isometry on its atomic measures:
/// monomial, with each nonzero entry of modulus `(w_dom/w_cod)^(1/p)`.
pub fn recognize_spi(a: &MatF, p: &Exponent) -> Result<SpiRecognition> {
    if !p.is_finite() {
        return Err(Error::Input("spatial recognition needs a finite exponent".into()));
    }
    let mut atom_map = BTreeMap::new();
    let mut phase = BTreeMap::new();
    let mut used_cols = BTreeSet::new();
    for j in 0..a.rows() {
        let mut row_hit: Option<usize> = None;
        for k in 0..a.cols() {
            let t = a.get(j, k);
            if t.norm() == 0.0 {
                continue;
            }
            if let Some(prev) = row_hit {
                return Ok(SpiRecognition::Refused(format!(
                    "row {j} has nonzero entries in columns {prev} and {k}"
                )));
            }
            row_hit = Some(k);
            if !used_cols.insert(k) {
                return Ok(SpiRecognition::Refused(format!(
                    "column {k} has more than one nonzero entry"
                )));
            }
            let expected = (a.domain().weight(k) / a.codomain().weight(j)).powf(1.0 / p.value());
            let modulus = t.norm();
            if (modulus - expected).abs() > SPI_TOL * expected.max(1.0) {
                return Ok(SpiRecognition::Refused(format!(
                    "entry ({j}, {k}) has modulus {modulus}, but the weight ratio requires {expected}"
                )));
            }
            atom_map.insert(j, k);
            phase.insert(j, t / modulus);
        }
    }
    Ok(SpiRecognition::Recognized(SpatialPartialIsometry {
        domain: a.domain().clone(),
        codomain: a.codomain().clone(),
        atom_map,
        phase,
    }))
}

/// Outcome of [`is_spatial_rep`]: the spatial partition, or a refusal.
#[derive(Clone, Debug)]
pub enum SpatialRepCheck {
    /// Every matrix-unit image is a spatial partial isometry and the
    /// diagonal supports partition the atoms; `partition[j]` is X_{j+1}.
    Spatial {
        /// Atom sets X_j indexed by 0-based matrix row.
        partition: Vec<BTreeSet<usize>>,
    },
    /// The representation is not spatial for the named reason.
    NotSpatial {
        /// First violation found.
        reason: String,
    },
}

impl SpatialRepCheck {
    /// Whether the representation was accepted as spatial.
    pub fn is_spatial(&self) -> bool {
        matches!(self, SpatialRepCheck::Spatial { .. })
    }
}

fn table_entry(units: &[MatF], d: usize, j: usize, k: usize) -> &MatF {
    &units[(j - 1) * d + (k - 1)]
}

/// Test whether a unital representation of M_d, given by its images on
/// the matrix units in row-major order, is spatial.
pub fn is_spatial_rep(units: &[MatF], d: usize, p: &Exponent) -> Result<SpatialRepCheck> {
    if d == 0 || units.len() != d * d {
        return Err(Error::Input(format!(
            "expected {} matrix-unit images, got {}",
            d * d,
            units.len()
        )));
    }
    let n = units[0].rows();
    for u in units {
        if u.rows() != n || u.cols() != n {
            return Err(Error::Input("matrix-unit images differ in shape".into()));
        }
    }
    let scale = units
        .iter()
        .map(Mat::max_abs_entry)
        .fold(1.0f64, f64::max);
    let tol = SPI_TOL * scale * scale;
    let mut unit_sum: MatF = Mat::zeros(n, n);
    for j in 1..=d {
        unit_sum = unit_sum.add(table_entry(units, d, j, j))?;
    }
    if unit_sum.sub(&Mat::identity(n))?.max_abs_entry() > tol {
        return Err(Error::Input("matrix-unit table is not unital".into()));
    }
    for j in 1..=d {
        for k in 1..=d {
            for l in 1..=d {
                for m in 1..=d {
                    let product = table_entry(units, d, j, k).mul(table_entry(units, d, l, m))?;
                    let expected = if k == l {
                        table_entry(units, d, j, m).clone()
                    } else {
                        Mat::zeros(n, n)
                    };
                    if product.sub(&expected)?.max_abs_entry() > tol {
                        return Err(Error::Input(format!(
                            "matrix-unit table is not multiplicative at e_{{{j},{k}}}·e_{{{l},{m}}}"
                        )));
                    }
                }
            }
        }
    }

    let mut decompositions = Vec::with_capacity(d * d);
    for j in 1..=d {
        for k in 1..=d {
            match recognize_spi(table_entry(units, d, j, k), p)? {
                SpiRecognition::Recognized(spi) => decompositions.push(spi),
                SpiRecognition::Refused(reason) => {
                    return Ok(SpatialRepCheck::NotSpatial {
                        reason: format!("image of e_{{{j},{k}}}: {reason}"),
                    })
                }
            }
        }
    }

    let partition: Vec<BTreeSet<usize>> = (1..=d)
        .map(|j| decompositions[(j - 1) * d + (j - 1)].range_support())
        .collect();
    let mut seen = BTreeSet::new();
    for (j, part) in partition.iter().enumerate() {
        for &atom in part {
            if !seen.insert(atom) {
                return Ok(SpatialRepCheck::NotSpatial {
                    reason: format!("diagonal supports overlap at atom {atom} (row {})", j + 1),
                });
            }
        }
    }
    if seen.len() != n {
        return Ok(SpatialRepCheck::NotSpatial {
            reason: "diagonal supports fail to cover the atom set".into(),
        });
    }
    for j in 1..=d {
        for k in 1..=d {
            let spi = &decompositions[(j - 1) * d + (k - 1)];
            if spi.domain_support() != partition[k - 1] || spi.range_support() != partition[j - 1]
            {
                return Ok(SpatialRepCheck::NotSpatial {
                    reason: format!(
                        "image of e_{{{j},{k}}} maps outside the partition blocks X_{k} → X_{j}"
                    ),
                });
            }
        }
    }
    Ok(SpatialRepCheck::Spatial { partition })
}

/// Disjoint-union of spatial partial isometries on disjoint atom sets.
///
/// Atoms are identified by their labels; a label collision between parts
/// is an input error.
pub fn direct_sum_spi(parts: &[SpatialPartialIsometry]) -> Result<SpatialPartialIsometry> {
    if parts.is_empty() {
        return Err(Error::Input("direct sum needs at least one part".into()));
    }
    let mut dom_labels = Vec::new();
    let mut dom_weights = Vec::new();
    let mut cod_labels = Vec::new();
    let mut cod_weights = Vec::new();
    let mut atom_map = BTreeMap::new();
    let mut phase = BTreeMap::new();
    let mut dom_seen = BTreeSet::new();
    let mut cod_seen = BTreeSet::new();
    let mut dom_offset = 0;
    let mut cod_offset = 0;
    for part in parts {
        for j in 0..part.domain.len() {
            let label = part.domain.label(j).to_string();
            if !dom_seen.insert(label.clone()) {
                return Err(Error::Input(format!("domain atom label {label} repeats")));
            }
            dom_labels.push(label);
            dom_weights.push(part.domain.weight(j));
        }
        for j in 0..part.codomain.len() {
            let label = part.codomain.label(j).to_string();
            if !cod_seen.insert(label.clone()) {
                return Err(Error::Input(format!("codomain atom label {label} repeats")));
            }
            cod_labels.push(label);
            cod_weights.push(part.codomain.weight(j));
        }
        for (&j, &k) in &part.atom_map {
            atom_map.insert(cod_offset + j, dom_offset + k);
            phase.insert(cod_offset + j, part.phase[&j]);
        }
        dom_offset += part.domain.len();
        cod_offset += part.codomain.len();
    }
    Ok(SpatialPartialIsometry {
        domain: AtomicMeasure::new(dom_labels, dom_weights)?,
        codomain: AtomicMeasure::new(cod_labels, cod_weights)?,
        atom_map,
        phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::{matrix_unit, signed_permutation_group};
    use crate::pnorm::opnorm;
    use crate::simsys::{SimilaritySystem, SystemEntry};

    fn p3() -> Exponent {
        Exponent::new(3.0).unwrap()
    }

    fn relabeled(m: AtomicMeasure, prefix: &str) -> AtomicMeasure {
        let labels = m
            .labels()
            .iter()
            .map(|l| format!("{prefix}.{l}"))
            .collect();
        AtomicMeasure::new(labels, m.weights().to_vec()).unwrap()
    }

    #[test]
    fn signed_permutations_are_recognized() {
        for g in signed_permutation_group::<C64>(3).unwrap() {
            let rec = recognize_spi(&g, &p3()).unwrap();
            let spi = rec.recognized().expect("signed permutation");
            assert_eq!(spi.domain_support().len(), 3);
            assert_eq!(spi.range_support().len(), 3);
            for phase in spi.phase().values() {
                assert!((phase.norm() - 1.0).abs() <= 1e-12);
                assert!(phase.im == 0.0);
            }
        }
    }

    #[test]
    fn matrix_unit_supports() {
        let e12: MatF = matrix_unit(2, 1, 2).unwrap();
        let rec = recognize_spi(&e12, &p3()).unwrap();
        let spi = rec.recognized().expect("matrix unit");
        assert_eq!(spi.domain_support(), BTreeSet::from([1]));
        assert_eq!(spi.range_support(), BTreeSet::from([0]));
    }

    #[test]
    fn refusals_name_the_violation() {
        let d = Mat::diag(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        let rec = recognize_spi(&d, &p3()).unwrap();
        match rec {
            SpiRecognition::Refused(reason) => assert!(reason.contains("modulus 2")),
            SpiRecognition::Recognized(_) => panic!("diag(1,2) must be refused"),
        }

        let two = Mat::new(
            1,
            2,
            vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            AtomicMeasure::unit_weights(2),
            AtomicMeasure::unit_weights(1),
        )
        .unwrap();
        let rec = recognize_spi(&two, &p3()).unwrap();
        assert!(matches!(rec, SpiRecognition::Refused(ref r) if r.contains("row 0")));
    }

    #[test]
    fn weighted_change_of_measure() {
        let domain = AtomicMeasure::new(vec!["a".into()], vec![8.0]).unwrap();
        let codomain = AtomicMeasure::new(vec!["b".into()], vec![1.0]).unwrap();
        let factor = 8.0f64.powf(1.0 / 3.0);
        let a = Mat::new(1, 1, vec![C64::new(factor, 0.0)], domain, codomain).unwrap();
        let rec = recognize_spi(&a, &p3()).unwrap();
        let spi = rec.recognized().expect("weighted atom map");
        let back = spi.matrix_of(&p3()).unwrap();
        assert!((back.get(0, 0) - a.get(0, 0)).norm() <= 1e-12);
        let norm = opnorm(&a, &p3());
        assert!((norm.upper - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn round_trip_is_stable() {
        for g in signed_permutation_group::<C64>(2).unwrap() {
            let spi = recognize_spi(&g, &p3()).unwrap().recognized().unwrap().clone();
            let again = recognize_spi(&spi.matrix_of(&p3()).unwrap(), &p3()).unwrap();
            let again = again.recognized().expect("round trip");
            assert_eq!(spi.atom_map(), again.atom_map());
            for (j, phase) in spi.phase() {
                assert!((*phase - again.phase()[j]).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn composition_follows_the_atom_maps() {
        let group = signed_permutation_group::<C64>(3).unwrap();
        let a = &group[5];
        let b = &group[20];
        let product = a.mul(b).unwrap();
        let spi_a = recognize_spi(a, &p3()).unwrap().recognized().unwrap().clone();
        let spi_b = recognize_spi(b, &p3()).unwrap().recognized().unwrap().clone();
        let spi_ab = recognize_spi(&product, &p3())
            .unwrap()
            .recognized()
            .expect("products of signed permutations stay monomial")
            .clone();
        for (&j, &k) in spi_ab.atom_map() {
            assert_eq!(spi_b.atom_map()[&spi_a.atom_map()[&j]], k);
        }
    }

    #[test]
    fn spatial_rep_from_signed_permutations() {
        let d = 2;
        let system = SimilaritySystem::new(
            d,
            vec![
                SystemEntry::new("1", 0.5, Mat::identity(d)),
                SystemEntry::new(
                    "flip",
                    0.5,
                    Mat::square(
                        d,
                        vec![
                            C64::new(0.0, 0.0),
                            C64::new(1.0, 0.0),
                            C64::new(-1.0, 0.0),
                            C64::new(0.0, 0.0),
                        ],
                    )
                    .unwrap(),
                ),
            ],
            false,
        )
        .unwrap();
        let units: Vec<MatF> = (1..=d)
            .flat_map(|j| (1..=d).map(move |k| (j, k)))
            .map(|(j, k)| {
                system
                    .rep_matrix(&matrix_unit(d, j, k).unwrap())
                    .unwrap()
            })
            .collect();
        let check = is_spatial_rep(&units, d, &p3()).unwrap();
        match check {
            SpatialRepCheck::Spatial { ref partition } => {
                assert_eq!(partition.len(), d);
                assert_eq!(partition.iter().map(BTreeSet::len).sum::<usize>(), d * d);
            }
            SpatialRepCheck::NotSpatial { ref reason } => panic!("expected spatial: {reason}"),
        }
        for u in &units {
            let norm = opnorm(u, &p3());
            assert!((norm.lower - 1.0).abs() <= 1e-12);
            assert!((norm.upper - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn similarity_rep_is_not_spatial() {
        let d = 2;
        let system = SimilaritySystem::new(
            d,
            vec![
                SystemEntry::new("1", 0.5, Mat::identity(d)),
                SystemEntry::new(
                    "s",
                    0.5,
                    Mat::diag(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]),
                ),
            ],
            true,
        )
        .unwrap();
        let units: Vec<MatF> = (1..=d)
            .flat_map(|j| (1..=d).map(move |k| (j, k)))
            .map(|(j, k)| {
                system
                    .rep_matrix(&matrix_unit(d, j, k).unwrap())
                    .unwrap()
            })
            .collect();
        let check = is_spatial_rep(&units, d, &p3()).unwrap();
        assert!(!check.is_spatial());
    }

    #[test]
    fn trivial_rep_is_spatial() {
        let units = vec![Mat::identity(1)];
        let check = is_spatial_rep(&units, 1, &Exponent::new(2.5).unwrap()).unwrap();
        assert!(check.is_spatial());
    }

    #[test]
    fn non_multiplicative_table_is_rejected() {
        let units = vec![
            Mat::identity(2),
            Mat::identity(2),
            Mat::identity(2),
            Mat::identity(2),
        ];
        assert!(matches!(
            is_spatial_rep(&units, 2, &p3()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn direct_sum_round_trips() {
        let p = p3();
        let e12: MatF = matrix_unit(2, 1, 2).unwrap();
        let dom = relabeled(e12.domain().clone(), "x");
        let cod = relabeled(e12.codomain().clone(), "x");
        let e12 = e12.with_measures(dom, cod).unwrap();
        let phase: MatF = Mat::new(
            1,
            1,
            vec![C64::new(0.0, 1.0)],
            AtomicMeasure::new(vec!["y.0".into()], vec![1.0]).unwrap(),
            AtomicMeasure::new(vec!["y.0".into()], vec![1.0]).unwrap(),
        )
        .unwrap();
        let part_a = recognize_spi(&e12, &p).unwrap().recognized().unwrap().clone();
        let part_b = recognize_spi(&phase, &p).unwrap().recognized().unwrap().clone();
        let sum = direct_sum_spi(&[part_a.clone(), part_b.clone()]).unwrap();
        assert_eq!(sum.domain_support(), BTreeSet::from([1, 2]));
        assert_eq!(sum.range_support(), BTreeSet::from([0, 2]));
        let reassembled = sum.matrix_of(&p).unwrap();
        let again = recognize_spi(&reassembled, &p).unwrap();
        let again = again.recognized().expect("round trip");
        assert_eq!(again.atom_map(), sum.atom_map());

        assert!(direct_sum_spi(&[part_a.clone(), part_a]).is_err());
    }
}
