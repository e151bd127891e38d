//! The lemma suites behind `lpuhf verify`.
//!
//! Every suite checks finite-stage identities through the library API and
//! returns one record per check. Randomized corpora derive from the run
//! seed and a per-suite tag, so a suite produces the same records whether
//! it runs alone or inside `all`; verdicts do not depend on the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use lpuhf_core::criteria::{
    series_report_family, sum_product_consistency, FamilyRecipe, Verdict,
};
use lpuhf_core::error::{Error, Result};
use lpuhf_core::matalg::{
    kron, matrix_unit, scaled_flip, signed_permutation_group, Contraction, ElementaryTensorSum,
    flip_element, projective_lower_via_contraction,
};
use lpuhf_core::perturbation::{block_compression, diagonal_lower_bound, sign_selection, spatialize};
use lpuhf_core::pnorm::{conjugation_map_norm, opnorm, rayleigh_quotient, Mat};
use lpuhf_core::scalar::Scalar;
use lpuhf_core::simsys::{SimilaritySystem, SystemEntry};
use lpuhf_core::spaces::{vector_norm, AtomicMeasure, Exponent, LpVec};
use lpuhf_core::spatial_check::{is_spatial_rep, SpatialRepCheck};
use lpuhf_core::{C64, CRat, MatF};

use crate::report::{fnv1a64, Check};

/// The named suites, in `all` execution order.
pub const SUITE_NAMES: &[&str] = &[
    "flip",
    "norms",
    "sign-selection",
    "lower-bound",
    "decay",
    "spatialize",
    "spatial-check",
    "series",
];

/// Run the selected suite, or all of them, or none.
pub fn run(selector: &str, seed: u64) -> Result<Vec<Check>> {
    match selector {
        "none" => Ok(Vec::new()),
        "all" => {
            let mut checks = Vec::new();
            for name in SUITE_NAMES {
                checks.extend(run_one(name, seed)?);
            }
            Ok(checks)
        }
        name => run_one(name, seed),
    }
}

fn run_one(name: &str, seed: u64) -> Result<Vec<Check>> {
    match name {
        "flip" => flip_suite(),
        "norms" => norms_suite(seed),
        "sign-selection" => sign_selection_suite(seed),
        "lower-bound" => lower_bound_suite(),
        "decay" => decay_suite(),
        "spatialize" => spatialize_suite(seed),
        "spatial-check" => spatial_check_suite(),
        "series" => series_suite(),
        other => Err(Error::Input(format!(
            "unknown suite \"{other}\"; expected one of {}, all, none",
            SUITE_NAMES.join(", ")
        ))),
    }
}

fn suite_rng(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(name.as_bytes()))
}

fn measured(pairs: &[(&str, Value)]) -> Map<String, Value> {
    let mut map = Map::new();
    for (k, v) in pairs {
        map.insert((*k).to_string(), v.clone());
    }
    map
}

fn p_of(v: f64) -> Exponent {
    Exponent::new(v).expect("fixed exponent")
}

/// Random unimodular fourth root of unity times a power of two: a complex
/// scalar whose modulus, reciprocal, and products stay exact in f64.
fn dyadic_phase_entry(rng: &mut ChaCha8Rng) -> C64 {
    let e: i32 = rng.random_range(-4..=4);
    let modulus = (2.0f64).powi(e);
    match rng.random_range(0..4u8) {
        0 => C64::new(modulus, 0.0),
        1 => C64::new(-modulus, 0.0),
        2 => C64::new(0.0, modulus),
        _ => C64::new(0.0, -modulus),
    }
}

fn random_dyadic_diagonal(rng: &mut ChaCha8Rng, d: usize) -> MatF {
    let entries: Vec<C64> = (0..d).map(|_| dyadic_phase_entry(rng)).collect();
    Mat::diag(&entries)
}

fn random_complex_diagonal(rng: &mut ChaCha8Rng, d: usize) -> MatF {
    let entries: Vec<C64> = (0..d)
        .map(|_| {
            let modulus = 0.5 + rng.random::<f64>() * 2.0;
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            C64::new(modulus * angle.cos(), modulus * angle.sin())
        })
        .collect();
    Mat::diag(&entries)
}

fn random_system(rng: &mut ChaCha8Rng, d: usize, count: usize, dyadic: bool) -> Result<SimilaritySystem> {
    let f = 1.0 / (count + 1) as f64;
    let mut entries = vec![SystemEntry::new("1", f, Mat::identity(d))];
    for i in 0..count {
        let s = if dyadic {
            random_dyadic_diagonal(rng, d)
        } else {
            random_complex_diagonal(rng, d)
        };
        entries.push(SystemEntry::new(format!("s{i}"), f, s));
    }
    SimilaritySystem::new(d, entries, true)
}

fn flip_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in [2usize, 3, 4] {
        for pv in [1.0, 1.5, 2.0, 3.0] {
            let y: MatF = flip_element(d);
            let n = opnorm(&y, &p_of(pv));
            let expected = 1.0 / d as f64;
            checks.push(Check::from_outcome(
                format!("flip.norm.d{d}.p{pv}"),
                "‖y_d‖_p = 1/d",
                n.lower == expected && n.upper == expected,
                measured(&[
                    ("d", json!(d)),
                    ("p", json!(pv)),
                    ("lower", json!(n.lower)),
                    ("upper", json!(n.upper)),
                    ("expected", json!(expected)),
                ]),
                0.0,
            ));
        }
    }
    for d in [2usize, 3] {
        let y: Mat<CRat> = flip_element(d);
        let scaled_id = Mat::<CRat>::identity(d * d)
            .scale(&<CRat as Scalar>::from_ratio(1, (d * d) as i64));
        checks.push(Check::from_outcome(
            format!("flip.square.d{d}"),
            "y_d² = d⁻²·1",
            y.mul(&y)? == scaled_id,
            measured(&[("d", json!(d))]),
            0.0,
        ));

        let z: ElementaryTensorSum<CRat> = ElementaryTensorSum::flip_naive(d)?;
        let id = Mat::<CRat>::identity(d);
        checks.push(Check::from_outcome(
            format!("flip.delta.d{d}"),
            "Δ(y_d) = Δᵒᵖ(y_d) = 1",
            z.delta()? == id && z.delta_op()? == id,
            measured(&[("d", json!(d))]),
            0.0,
        ));

        let v: Mat<CRat> = scaled_flip(d);
        let mut conjugation_ok = true;
        for j in 1..=d {
            for k in 1..=d {
                for l in 1..=d {
                    for mm in 1..=d {
                        let a = matrix_unit::<CRat>(d, j, k)?;
                        let b = matrix_unit::<CRat>(d, l, mm)?;
                        let lhs = v.mul(&kron(&a, &b))?.mul(&v)?;
                        conjugation_ok &= lhs == kron(&b, &a);
                    }
                }
            }
        }
        checks.push(Check::from_outcome(
            format!("flip.conjugation.d{d}"),
            "y_d (a⊗b) y_d⁻¹ = b⊗a",
            conjugation_ok,
            measured(&[("d", json!(d)), ("pairs", json!(d * d * d * d))]),
            0.0,
        ));

        let p2 = p_of(2.0);
        let group: ElementaryTensorSum<C64> = ElementaryTensorSum::flip_group(d)?;
        let upper = group.projective_upper(|m| opnorm(m, &p2).upper);
        let naive: ElementaryTensorSum<C64> = ElementaryTensorSum::flip_naive(d)?;
        let lower =
            projective_lower_via_contraction(&naive, Contraction::Delta, |m| {
                opnorm(m, &p2).lower
            })?;
        checks.push(Check::from_outcome(
            format!("flip.projective.d{d}"),
            "‖Δ(y_d)‖ = 1 ≤ ‖y_d‖_π ≤ Σ_G |G|⁻¹‖g‖‖g⁻¹‖ = 1",
            lower == 1.0 && (upper - 1.0).abs() <= 1e-12,
            measured(&[("lower", json!(lower)), ("upper", json!(upper))]),
            1e-12,
        ));
    }
    Ok(checks)
}

fn norms_suite(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in [2usize, 3, 4] {
        for gamma in [1.0, 2.0, 10.0] {
            for pv in [1.0, 2.0, 3.0] {
                let system = SimilaritySystem::gamma_corners(d, gamma)?;
                let p = p_of(pv);
                let mut worst = 0.0f64;
                for j in 1..=d {
                    for k in 1..=d {
                        let n = system.norm_ps(&matrix_unit(d, j, k)?, &p)?;
                        let expected = if j == k { 1.0 } else { gamma };
                        worst = worst
                            .max((n.lower - expected).abs())
                            .max((n.upper - expected).abs());
                    }
                }
                checks.push(Check::from_outcome(
                    format!("norms.units.d{d}.g{gamma}.p{pv}"),
                    "‖e_{j,k}‖_{p,γ} = γ for j ≠ k and 1 for j = k",
                    worst <= 1e-9,
                    measured(&[
                        ("d", json!(d)),
                        ("gamma", json!(gamma)),
                        ("p", json!(pv)),
                        ("worst_deviation", json!(worst)),
                    ]),
                    1e-9,
                ));
            }
        }
    }

    let mut rng = suite_rng(seed, "norms.conjugation");
    let mut worst = 0.0f64;
    for trial in 0..20usize {
        let d = 2 + trial % 3;
        let p = p_of([1.0, 2.0, 3.0][trial % 3]);
        let s = random_complex_diagonal(&mut rng, d);
        let got = conjugation_map_norm(&s, &p)?;
        let expected = opnorm(&s, &p).upper * opnorm(&s.inverse()?, &p).upper;
        let mut oracle = 0.0f64;
        for j in 1..=d {
            for k in 1..=d {
                let unit: MatF = matrix_unit(d, j, k)?;
                let conj = s.mul(&unit)?.mul(&s.inverse()?)?;
                oracle = oracle.max(opnorm(&conj, &p).upper);
            }
        }
        let scale = expected.max(1.0);
        worst = worst
            .max((got.upper - expected).abs() / scale)
            .max((got.lower - expected).abs() / scale)
            .max((oracle - expected).abs() / scale);
    }
    checks.push(Check::from_outcome(
        "norms.conjugation",
        "‖Ad(s)‖ = ‖s‖·‖s⁻¹‖, attained on a matrix unit",
        worst <= 1e-9,
        measured(&[("trials", json!(20)), ("worst_deviation", json!(worst))]),
        1e-9,
    ));

    let mut rng = suite_rng(seed, "norms.multiplicativity");
    let mut exact = true;
    for trial in 0..20usize {
        let d1 = 2 + trial % 2;
        let d2 = 2 + (trial / 2) % 2;
        let p = p_of([1.0, 1.5, 2.0, 3.0][trial % 4]);
        let s1 = random_system(&mut rng, d1, 2, true)?;
        let s2 = random_system(&mut rng, d2, 2, true)?;
        let product = s1.tensor(&s2)?.p_bound(&p)?;
        let expected = s1.p_bound(&p)?.upper * s2.p_bound(&p)?.upper;
        exact &= product.lower == expected && product.upper == expected;
    }
    checks.push(Check::from_outcome(
        "norms.multiplicativity",
        "R_{p,S⊗T} = R_{p,S}·R_{p,T}",
        exact,
        measured(&[("trials", json!(20))]),
        0.0,
    ));

    let mut rng = suite_rng(seed, "norms.soundness");
    let mut sound = true;
    let mut max_p2_width = 0.0f64;
    for trial in 0..20usize {
        let d = 4;
        let a: MatF = Mat::from_fn(d, d, |_, _| {
            C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
        });
        for pv in [1.5, 2.5] {
            let p = p_of(pv);
            let n = opnorm(&a, &p);
            sound &= n.lower <= n.upper;
            let mut sample_max = 0.0f64;
            for _ in 0..500 {
                let v = LpVec::new(
                    (0..d)
                        .map(|_| {
                            C64::new(
                                rng.random::<f64>() * 2.0 - 1.0,
                                rng.random::<f64>() * 2.0 - 1.0,
                            )
                        })
                        .collect(),
                );
                sample_max = sample_max.max(rayleigh_quotient(&a, &v, &p)?);
            }
            sound &= sample_max <= n.upper + 1e-12;
            sound &= n.lower >= sample_max - 1e-9;
        }
        let n2 = opnorm(&a, &p_of(2.0));
        max_p2_width = max_p2_width.max(n2.width());
        let _ = trial;
    }
    checks.push(Check::from_outcome(
        "norms.soundness",
        "sampled ‖Av‖/‖v‖ ≤ upper, lower ≥ sample max, p=2 width ≤ 1e-8",
        sound && max_p2_width <= 1e-8,
        measured(&[
            ("trials", json!(20)),
            ("samples_per_matrix", json!(500)),
            ("max_p2_width", json!(max_p2_width)),
        ]),
        1e-9,
    ));

    Ok(checks)
}

fn sign_selection_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = suite_rng(seed, "sign-selection");
    let mut ran = 0usize;
    let mut skipped = 0usize;
    let mut worst_margin = f64::INFINITY;
    let mut ok = true;
    for trial in 0..200usize {
        let d = 2 + trial % 4;
        let dim = 3;
        let p = p_of([1.0, 2.0, 3.0][trial % 3]);
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
        if vector_norm(&sum, &p, &m)? < 1e-3 {
            skipped += 1;
            continue;
        }
        ran += 1;
        match sign_selection(&alphas, &xis, &p, &m) {
            Ok(selection) => {
                let margin = selection.achieved() - selection.target();
                worst_margin = worst_margin.min(margin);
                ok &= margin >= -1e-9;
            }
            Err(_) => ok = false,
        }
    }
    Ok(vec![Check::from_outcome(
        "sign-selection.corpus",
        "a unimodular selection reaches ‖Σ (ζ_{j0}α_{j0})^{±1}(ζ_kα_k)^{∓1} ξ_k‖ ≥ (γ/β)^{1/2}",
        ok && ran > 0,
        measured(&[
            ("ran", json!(ran)),
            ("skipped", json!(skipped)),
            ("worst_margin", json!(worst_margin)),
        ]),
        1e-9,
    )])
}

fn lower_bound_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let p = p_of(2.0);
    for d in [2usize, 3] {
        for gamma in [4.0, 9.0, 100.0] {
            let z: ElementaryTensorSum<C64> = ElementaryTensorSum::flip_naive(d)?;
            let system = SimilaritySystem::gamma_corners(d, gamma)?;
            let got = diagonal_lower_bound(&z, &system, &p)?;
            let target = gamma.sqrt();
            checks.push(Check::from_outcome(
                format!("lower-bound.flip.d{d}.g{gamma}"),
                "‖y_d‖_{π,S} ≥ sup_i ‖s(i)‖^{1/2}‖s(i)⁻¹‖^{1/2} = √R",
                got >= target - 1e-9,
                measured(&[
                    ("d", json!(d)),
                    ("gamma", json!(gamma)),
                    ("got", json!(got)),
                    ("target", json!(target)),
                ]),
                1e-9,
            ));
        }
    }
    Ok(checks)
}

fn mixing_conjugate_table(d0: usize, d: usize, angle: f64) -> Result<Vec<MatF>> {
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
    let v_inv = v.inverse()?;
    let mut table = Vec::with_capacity(d0 * d0);
    for j in 1..=d0 {
        for k in 1..=d0 {
            let embedded = kron(&Mat::identity(d), &matrix_unit(d0, j, k)?);
            table.push(v.mul(&embedded)?.mul(&v_inv)?);
        }
    }
    Ok(table)
}

fn decay_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let d0 = 2;
    let d = 2;
    let p = p_of(3.0);
    let gamma0 = 1.0;

    let mut table = Vec::with_capacity(d0 * d0);
    for j in 1..=d0 {
        for k in 1..=d0 {
            table.push(kron(&Mat::identity(d), &matrix_unit::<C64>(d0, j, k)?));
        }
    }
    let embedding = block_compression(&table, d0, d, 10.0, gamma0, 4.0, &p)?;
    checks.push(Check::from_outcome(
        "decay.embedding",
        "the unital embedding x ↦ 1⊗x is block diagonal, T = φ",
        embedding.offdiag_max() == 0.0,
        measured(&[("offdiag_max", json!(embedding.offdiag_max()))]),
        0.0,
    ));

    let mut previous = f64::INFINITY;
    for gamma in [10.0, 100.0, 1000.0] {
        let table = mixing_conjugate_table(d0, d, 3.0 / gamma)?;
        let corner = SimilaritySystem::gamma_corners(d, gamma)?;
        let mut m_cert = 0.0f64;
        for img in &table {
            m_cert += corner.norm_ps(img, &p)?.upper;
        }
        let result = block_compression(&table, d0, d, gamma, gamma0, m_cert, &p)?;
        let pass = result.offdiag_max() <= result.offdiag_bound() + 1e-9
            && result.offdiag_max() > 0.0
            && result.offdiag_max() <= previous;
        checks.push(Check::from_outcome(
            format!("decay.bound.g{gamma}"),
            "off-diagonal blocks of a γ-bounded map obey ‖a_{l,m}‖ ≤ M·γ₀/γ",
            pass,
            measured(&[
                ("gamma", json!(gamma)),
                ("m_cert", json!(m_cert)),
                ("offdiag_max", json!(result.offdiag_max())),
                ("offdiag_bound", json!(result.offdiag_bound())),
            ]),
            1e-9,
        ));
        previous = result.offdiag_max();
    }
    Ok(checks)
}

fn spatialize_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = suite_rng(seed, "spatialize");
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut residual_max = 0.0f64;
    for trial in 0..20usize {
        let d = 2 + trial % 3;
        let p = p_of([1.0, 1.5, 2.0, 3.0][trial % 4]);
        let system = random_system(&mut rng, d, 1 + trial % 2, true)?;
        match spatialize(&system, &p) {
            Ok(result) => {
                residual_max = residual_max.max(result.residual_sup());
                ok &= result.residual_sup() == 0.0;
                let r = result.r();
                let [nw, nw1, nwi, nwi1] = result.w_norms();
                worst = worst
                    .max((nw - r).abs())
                    .max((nw1 - (r - 1.0)).abs())
                    .max((nwi - 1.0).abs())
                    .max((nwi1 - (1.0 - 1.0 / r)).abs());
            }
            Err(_) => ok = false,
        }
    }
    Ok(vec![Check::from_outcome(
        "spatialize.random",
        "ψ = Ad(w)∘τ with τ spatial, residual 0, ‖w‖ = R, ‖w−1‖ = R−1, ‖w⁻¹‖ = 1, ‖w⁻¹−1‖ = 1−1/R",
        ok && worst <= 1e-12,
        measured(&[
            ("trials", json!(20)),
            ("residual_max", json!(residual_max)),
            ("worst_identity_deviation", json!(worst)),
        ]),
        1e-12,
    )])
}

pub fn representation_units(system: &SimilaritySystem) -> Result<Vec<MatF>> {
    let d = system.d();
    let mut units = Vec::with_capacity(d * d);
    for j in 1..=d {
        for k in 1..=d {
            units.push(system.rep_matrix(&matrix_unit(d, j, k)?)?);
        }
    }
    Ok(units)
}

fn spatial_check_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let p = p_of(3.0);

    let group: Vec<MatF> = signed_permutation_group(2)?;
    let f = 1.0 / group.len() as f64;
    let entries: Vec<SystemEntry> = group
        .iter()
        .enumerate()
        .map(|(i, g)| SystemEntry::new(format!("g{i}"), f, g.clone()))
        .collect();
    let accepted = SimilaritySystem::new(2, entries, false)?;
    let verdict = is_spatial_rep(&representation_units(&accepted)?, 2, &p)?;
    checks.push(Check::from_outcome(
        "spatial-check.accept",
        "signed-permutation systems represent spatially",
        matches!(verdict, SpatialRepCheck::Spatial { .. }),
        measured(&[("spatial", json!(verdict.is_spatial()))]),
        0.0,
    ));

    let rejected = SimilaritySystem::new(
        2,
        vec![
            SystemEntry::new("1", 0.5, Mat::identity(2)),
            SystemEntry::new(
                "w",
                0.5,
                Mat::diag(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]),
            ),
        ],
        true,
    )?;
    let verdict = is_spatial_rep(&representation_units(&rejected)?, 2, &p)?;
    let (not_spatial, named) = match &verdict {
        SpatialRepCheck::NotSpatial { reason } => (true, reason.contains("modulus")),
        SpatialRepCheck::Spatial { .. } => (false, false),
    };
    checks.push(Check::from_outcome(
        "spatial-check.reject",
        "images with non-unit modulus are not spatial partial isometries",
        not_spatial && named,
        measured(&[("spatial", json!(!not_spatial)), ("violation_named", json!(named))]),
        0.0,
    ));
    Ok(checks)
}

fn series_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let p = p_of(2.0);

    let convergent = FamilyRecipe::Power { c: 1.0, a: 2.0 };
    let report = series_report_family(&convergent, 2, &p, 50)?;
    checks.push(Check::from_outcome(
        "series.convergent",
        "Σ (R_{p,S_n} − 1) < ∞ for γ(n) = 1 + n⁻²",
        report.verdict() == Verdict::ConvergentSpatial,
        measured(&[
            ("verdict", json!(report.verdict().tag())),
            ("basis", json!(report.verdict_basis())),
        ]),
        0.0,
    ));

    let divergent = FamilyRecipe::Power { c: 1.0, a: 1.0 };
    let report = series_report_family(&divergent, 2, &p, 50)?;
    checks.push(Check::from_outcome(
        "series.divergent",
        "Σ (R_{p,S_n} − 1) = ∞ for γ(n) = 1 + n⁻¹",
        report.verdict() == Verdict::DivergentNonamenable,
        measured(&[
            ("verdict", json!(report.verdict().tag())),
            ("basis", json!(report.verdict_basis())),
        ]),
        0.0,
    ));

    for (id, recipe) in [("series.sumprod.convergent", &convergent), ("series.sumprod.divergent", &divergent)] {
        let alphas: Vec<f64> = (1..=1000).map(|n| recipe.gamma(n)).collect();
        let pass = sum_product_consistency(&alphas)?;
        checks.push(Check::from_outcome(
            id,
            "M⁻¹·log(M+1)·Σβ_n ≤ log Π α_n ≤ Σβ_n at every prefix",
            pass,
            measured(&[("prefix", json!(1000))]),
            1e-9,
        ));
    }
    Ok(checks)
}
