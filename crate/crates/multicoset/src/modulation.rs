//! The modulation matrix tying observed coset spectra to unknown slot
//! spectra, and its conditioning.
//!
//! For a sample pattern `C = {c_1 .. c_p}` and spectral index set
//! `k = {k_1 .. k_q}` at period `L`, the matrix is
//!
//! ```text
//! A(i, l) = (1/(L·T)) · exp(j·2π·c_i·k_l / L)
//! ```
//!
//! with rows in pattern order and columns in index-set order. Every entry has
//! modulus `1/(L·T)`, so `A` is a scaled selection of rows and columns of the
//! inverse-DFT kernel. Reconstruction solves `A·z = y` per frequency bin; the
//! noise amplification of that solve is governed by `cond(A) = σ_max/σ_min`,
//! which is what pattern search minimizes. `T` enters only as a uniform
//! scale, so conditioning is independent of it.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{svd, CMat, Svd};
use crate::spectrum::SpectralIndexSet;

/// Relative threshold below which the smallest singular value is treated as
/// zero: `σ_min ≤ RANK_TOL·σ_max` classifies the matrix as rank deficient.
/// Exactly singular patterns land at `σ_min/σ_max ≈ 1e−16` (double-precision
/// noise), well-conditioned ones stay above `1e−3`; the gap is many decades
/// wide, so the exact threshold is uncritical.
pub const RANK_TOL: f64 = 1e-10;

/// The coset offsets `C = {c_1 .. c_p}`, a `p`-subset of `{0 .. L−1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePattern {
    l: usize,
    offsets: Vec<usize>,
}

impl SamplePattern {
    /// Builds a pattern from offsets; input order is irrelevant but repeated
    /// offsets are rejected (a coset cannot be kept twice).
    pub fn new(l: usize, offsets: &[usize]) -> Result<Self> {
        if l == 0 {
            return Err(Error::invalid("L must be at least 1"));
        }
        if offsets.is_empty() {
            return Err(Error::invalid("sample pattern is empty"));
        }
        let mut sorted = offsets.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("sample pattern {sorted:?} repeats an offset")));
        }
        if let Some(&bad) = sorted.iter().find(|&&c| c >= l) {
            return Err(Error::invalid(format!("offset {bad} out of range for L = {l}")));
        }
        Ok(SamplePattern { l, offsets: sorted })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Coset offsets, strictly increasing.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Number of kept cosets per period.
    pub fn p(&self) -> usize {
        self.offsets.len()
    }
}

impl std::fmt::Display for SamplePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.offsets.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// The `p×q` modulation matrix for a pattern/index-set pair, with lazily
/// computed singular values.
#[derive(Debug)]
pub struct ModulationMatrix {
    pattern: SamplePattern,
    index_set: SpectralIndexSet,
    t: f64,
    entries: CMat,
    decomposition: OnceLock<Svd>,
}

/// Builds `A(i, l) = (1/(L·T))·exp(j·2π·c_i·k_l/L)`.
///
/// The angle is reduced with `(c_i·k_l) mod L` before the division, so
/// entries are exact roots of unity up to one rounding each regardless of how
/// large the products grow.
pub fn build_modulation_matrix(
    pattern: &SamplePattern,
    index_set: &SpectralIndexSet,
    t: f64,
) -> Result<ModulationMatrix> {
    if pattern.l() != index_set.l() {
        return Err(Error::invalid(format!(
            "pattern has L = {} but index set has L = {}",
            pattern.l(),
            index_set.l()
        )));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!("base period T must be positive and finite, got {t}")));
    }
    let l = pattern.l();
    let scale = 1.0 / (l as f64 * t);
    let entries = CMat::from_fn(pattern.p(), index_set.q(), |i, j| {
        let c = pattern.offsets()[i];
        let k = index_set.indices()[j];
        let angle = std::f64::consts::TAU * ((c * k) % l) as f64 / l as f64;
        Complex64::from_polar(scale, angle)
    });
    Ok(ModulationMatrix {
        pattern: pattern.clone(),
        index_set: index_set.clone(),
        t,
        entries,
        decomposition: OnceLock::new(),
    })
}

impl ModulationMatrix {
    pub fn p(&self) -> usize {
        self.pattern.p()
    }

    pub fn q(&self) -> usize {
        self.index_set.q()
    }

    pub fn l(&self) -> usize {
        self.pattern.l()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn pattern(&self) -> &SamplePattern {
        &self.pattern
    }

    pub fn index_set(&self) -> &SpectralIndexSet {
        &self.index_set
    }

    /// Entry `A(i, j)`; row `i` follows pattern order, column `j` index-set
    /// order.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries.get(i, j)
    }

    /// The `min(p, q)` singular values, nonincreasing. Computed on first use
    /// and cached; concurrent first readers all observe the same result.
    pub fn singular_values(&self) -> &[f64] {
        &self.decomposition().sigma
    }

    pub(crate) fn decomposition(&self) -> &Svd {
        self.decomposition.get_or_init(|| svd(&self.entries))
    }

    /// Conditioning summary; see [`condition_number`].
    pub fn condition_report(&self) -> ConditionReport {
        let sigma = self.singular_values();
        let sigma_max = sigma[0];
        let sigma_min = sigma[sigma.len() - 1];
        let rank_deficient = sigma_min <= RANK_TOL * sigma_max;
        let cond = if rank_deficient { f64::INFINITY } else { sigma_max / sigma_min };
        ConditionReport { cond, sigma_max, sigma_min, rank_deficient }
    }
}

impl Serialize for ModulationMatrix {
    /// `{p, q, L, T, entries: [[re, im], ...]}`, entries row-major.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("p", &self.p())?;
        map.serialize_entry("q", &self.q())?;
        map.serialize_entry("L", &self.l())?;
        map.serialize_entry("T", &self.t)?;
        let entries: Vec<[f64; 2]> = (0..self.p())
            .flat_map(|i| (0..self.q()).map(move |j| {
                let z = self.entry(i, j);
                [z.re, z.im]
            }))
            .collect();
        map.serialize_entry("entries", &entries)?;
        map.end()
    }
}

/// Conditioning of a modulation matrix over its `m = min(p, q)` singular
/// values.
///
/// `cond = σ_max/σ_min` when the matrix is numerically full rank; otherwise
/// `cond` is `+∞` so rank-deficient patterns order strictly worse than any
/// finite-cond pattern, and [`ConditionReport::raw_ratio`] retains the
/// literal quotient for display and for breaking ties among deficient
/// patterns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionReport {
    /// `σ_max/σ_min`, or `+∞` when rank deficient.
    pub cond: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub rank_deficient: bool,
}

impl ConditionReport {
    /// The literal `σ_max/σ_min` quotient, regardless of rank classification
    /// (`+∞` only when `σ_min` is exactly zero).
    pub fn raw_ratio(&self) -> f64 {
        if self.sigma_min > 0.0 { self.sigma_max / self.sigma_min } else { f64::INFINITY }
    }
}

/// Computes the condition report of `A`.
///
/// For square and tall matrices this is the usual `‖A‖₂·‖A⁺‖₂ = σ_1/σ_m`;
/// for wide matrices (fewer rows than columns, as in intermediate greedy
/// search states) the same quotient runs over the `m = p` row-limited
/// singular values, which extends the definition continuously.
pub fn condition_number(a: &ModulationMatrix) -> ConditionReport {
    a.condition_report()
}
