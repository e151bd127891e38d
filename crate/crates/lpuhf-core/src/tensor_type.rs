//! Truncated tensor-product-type data: ordered stage lists with their
//! similarity systems, combined systems over stage ranges, the unital
//! embeddings that fill in identity tensor factors, stage norms, and the
//! supernatural bookkeeping r_d(n).
//!
//! Only finitely many stages are ever materialized; infinite families enter
//! through closed-form stage recipes evaluated to a requested depth.

use crate::error::{Error, Result};
use crate::matalg::kron;
use crate::pnorm::{Mat, NormInterval};
use crate::simsys::SimilaritySystem;
use crate::spaces::Exponent;
use crate::MatF;
use num::{BigUint, ToPrimitive};
use std::collections::BTreeMap;

/// One stage: a dimension and a system of d-similarities on it.
#[derive(Clone, Debug)]
pub struct Stage {
    d: usize,
    system: SimilaritySystem,
}

impl Stage {
    /// Stage from a system; the dimension is the system's.
    pub fn new(system: SimilaritySystem) -> Self {
        Stage { d: system.d(), system }
    }

    /// Stage dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The stage's similarity system.
    pub fn system(&self) -> &SimilaritySystem {
        &self.system
    }
}

/// An ordered list of stages together with the exponent they act on.
#[derive(Clone, Debug)]
pub struct StageSpec {
    p: Exponent,
    stages: Vec<Stage>,
}

impl StageSpec {
    /// Spec from explicit stages; every system must be valid.
    pub fn new(p: Exponent, stages: Vec<Stage>) -> Result<Self> {
        for (k, stage) in stages.iter().enumerate() {
            let violations = stage.system.validate();
            if !violations.is_empty() {
                let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                return Err(Error::Input(format!(
                    "stage {} system is invalid: {}",
                    k + 1,
                    msgs.join("; ")
                )));
            }
        }
        Ok(StageSpec { p, stages })
    }

    /// Spec whose stages are corner systems for K_{d,γ}, from (d, γ) pairs.
    pub fn gamma_stages(p: Exponent, stages: &[(usize, f64)]) -> Result<Self> {
        let stages = stages
            .iter()
            .map(|&(d, gamma)| Ok(Stage::new(SimilaritySystem::gamma_corners(d, gamma)?)))
            .collect::<Result<Vec<_>>>()?;
        StageSpec::new(p, stages)
    }

    /// The exponent.
    pub fn p(&self) -> &Exponent {
        &self.p
    }

    /// The stages in order.
    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Number of stages.
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    /// True when there are no stages.
    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// `r_d(n) = d(1)·d(2)⋯d(n)`, with `r_d(0) = 1`.
    pub fn r_d(&self, n: usize) -> Result<BigUint> {
        if n > self.stages.len() {
            return Err(Error::Input(format!(
                "n = {n} exceeds the stage count {}",
                self.stages.len()
            )));
        }
        Ok(self.stages[..n]
            .iter()
            .fold(BigUint::from(1u32), |acc, s| acc * BigUint::from(s.d as u64)))
    }

    /// Prime factorization exponents of `r_d(n)`, flagged as truncated.
    pub fn supernatural_truncated(&self, n: usize) -> Result<SupernaturalNumber> {
        if n > self.stages.len() {
            return Err(Error::Input(format!(
                "n = {n} exceeds the stage count {}",
                self.stages.len()
            )));
        }
        let mut exponents: BTreeMap<u64, u32> = BTreeMap::new();
        for stage in &self.stages[..n] {
            let mut rem = stage.d as u64;
            let mut p = 2u64;
            while rem > 1 {
                while rem % p == 0 {
                    *exponents.entry(p).or_insert(0) += 1;
                    rem /= p;
                }
                p += 1;
            }
        }
        Ok(SupernaturalNumber { exponents, truncated: true })
    }

    /// Iterated tensor product of the systems of stages `m+1 ..= n`
    /// (0-based range `m..n`); the empty range yields the trivial
    /// one-dimensional basic system.
    ///
    /// The p-bound of the result is checked against the product of per-stage
    /// p-bounds within interval arithmetic.
    pub fn combined_system(&self, m: usize, n: usize) -> Result<SimilaritySystem> {
        if m > n || n > self.stages.len() {
            return Err(Error::Input(format!(
                "invalid stage range ({m}, {n}] with {} stages",
                self.stages.len()
            )));
        }
        let mut combined: Option<SimilaritySystem> = None;
        let mut product: Option<NormInterval> = None;
        for stage in &self.stages[m..n] {
            let bound = stage.system.p_bound(&self.p)?;
            combined = Some(match combined {
                None => stage.system.clone(),
                Some(acc) => acc.tensor(&stage.system)?,
            });
            product = Some(match product {
                None => bound,
                Some(acc) => acc.mul(&bound),
            });
        }
        let combined = match combined {
            None => return SimilaritySystem::basic(1),
            Some(c) => c,
        };
        let product = product.expect("nonempty range");
        let total = combined.p_bound(&self.p)?;
        let scale = product.upper.max(1.0);
        if total.lower > product.upper + 1e-9 * scale || product.lower > total.upper + 1e-9 * scale {
            return Err(Error::Structure(format!(
                "combined p-bound [{}, {}] is inconsistent with the stage product [{}, {}]",
                total.lower, total.upper, product.lower, product.upper
            )));
        }
        Ok(combined)
    }

    /// The unital embedding of `x ∈ M_{r_d(m)}` into `M_{r_d(n)}`:
    /// `x ⊗ 1` over the stages `m+1 ..= n`.
    pub fn sigma_embed(&self, x: &MatF, m: usize, n: usize) -> Result<MatF> {
        if m > n || n > self.stages.len() {
            return Err(Error::Input(format!(
                "invalid embedding range ({m}, {n}] with {} stages",
                self.stages.len()
            )));
        }
        let r_m = self
            .r_d(m)?
            .to_usize()
            .ok_or_else(|| Error::Capacity("r_d(m) exceeds addressable size".into()))?;
        let r_n = self
            .r_d(n)?
            .to_usize()
            .ok_or_else(|| Error::Capacity("r_d(n) exceeds addressable size".into()))?;
        crate::check_dim(r_n)?;
        if x.rows() != r_m || x.cols() != r_m {
            return Err(Error::Input(format!(
                "element is {}x{}, expected {r_m}x{r_m}",
                x.rows(),
                x.cols()
            )));
        }
        if m == n {
            return Ok(x.clone());
        }
        Ok(kron(x, &Mat::identity(r_n / r_m)))
    }

    /// The stage-n norm: `‖x‖` under the combined system of stages `1..=n`.
    pub fn stage_norm(&self, x: &MatF, n: usize) -> Result<NormInterval> {
        let combined = self.combined_system(0, n)?;
        combined.norm_ps(x, &self.p)
    }
}

/// A supernatural number as a prime-to-exponent map; `truncated` records
/// that it was derived from a finite stage prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupernaturalNumber {
    exponents: BTreeMap<u64, u32>,
    truncated: bool,
}

impl SupernaturalNumber {
    /// Exponent of a prime (0 when absent).
    pub fn exponent(&self, prime: u64) -> u32 {
        self.exponents.get(&prime).copied().unwrap_or(0)
    }

    /// The stored prime-exponent pairs in increasing prime order.
    pub fn factors(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.exponents.iter().map(|(&p, &e)| (p, e))
    }

    /// Truncation flag.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// The represented integer.
    pub fn value(&self) -> BigUint {
        self.exponents
            .iter()
            .fold(BigUint::from(1u32), |acc, (&p, &e)| {
                acc * BigUint::from(p).pow(e)
            })
    }
}
