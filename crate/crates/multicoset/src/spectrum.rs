//! Band locations, active spectral slots, and sampling-rate figures of merit.
//!
//! A multiband signal occupies a known union of frequency intervals
//! `F = ∪ [a_i, b_i]` inside `[0, f_max]`. Slicing `[0, f_max]` into `L`
//! equal slots of width `f_max/L`, the *spectral index set* `k` collects the
//! slots that intersect `F`; its size `q` lower-bounds the number of coset
//! offsets `p` a sampling pattern must keep. The average sampling rate of a
//! `(p, L)` scheme is `(p/L)·f_max`, to be compared against the Nyquist rate
//! `f_max` and the Landau rate `Σ(b_i − a_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Known spectral support: disjoint bands `[a_i, b_i]` within `[0, f_max]`.
///
/// Construction sorts the bands and merges overlapping or touching ones, so
/// the stored list is always strictly increasing and pairwise disjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct BandSet {
    bands: Vec<(f64, f64)>,
    f_max: f64,
}

/// Raw wire form of [`BandSet`]: `{"bands": [[a, b], ...], "fmax": x}`.
#[derive(Serialize, Deserialize)]
struct BandSetDoc {
    bands: Vec<[f64; 2]>,
    fmax: f64,
}

impl BandSet {
    pub fn new(bands: &[(f64, f64)], f_max: f64) -> Result<Self> {
        if !(f_max.is_finite() && f_max > 0.0) {
            return Err(Error::invalid(format!("f_max must be positive and finite, got {f_max}")));
        }
        if bands.is_empty() {
            return Err(Error::invalid("band list is empty"));
        }
        for &(a, b) in bands {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::invalid(format!("band [{a}, {b}] has a non-finite endpoint")));
            }
            if !(0.0 <= a && a < b && b <= f_max) {
                return Err(Error::invalid(format!(
                    "band [{a}, {b}] violates 0 ≤ a < b ≤ f_max = {f_max}"
                )));
            }
        }
        let mut sorted = bands.to_vec();
        sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite endpoints"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (a, b) in sorted {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(BandSet { bands: merged, f_max })
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Total occupied bandwidth `Σ(b_i − a_i)`, the Landau rate.
    pub fn total_width(&self) -> f64 {
        self.bands.iter().map(|(a, b)| b - a).sum()
    }

    /// Whether frequency `f` lies in the support, with half-open bands
    /// `[a_i, b_i)` so adjacent intervals never double-count a point.
    pub fn contains(&self, f: f64) -> bool {
        self.bands.iter().any(|&(a, b)| a <= f && f < b)
    }

    /// Parses the text form `"a1:b1,a2:b2,...@fmax"` (frequencies in Hz).
    pub fn from_text(s: &str) -> Result<Self> {
        let (band_part, fmax_part) = s
            .rsplit_once('@')
            .ok_or_else(|| Error::invalid(format!("band set {s:?} is missing the '@fmax' suffix")))?;
        let f_max: f64 = fmax_part
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("f_max {fmax_part:?} is not a number")))?;
        let mut bands = Vec::new();
        for piece in band_part.split(',') {
            let piece = piece.trim();
            let (a, b) = piece
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("band {piece:?} is not of the form a:b")))?;
            let lo: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("band edge {a:?} is not a number")))?;
            let hi: f64 = b
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("band edge {b:?} is not a number")))?;
            bands.push((lo, hi));
        }
        BandSet::new(&bands, f_max)
    }

    /// Text form that [`BandSet::from_text`] parses back to an equal value.
    pub fn to_text(&self) -> String {
        let bands: Vec<String> = self.bands.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        format!("{}@{}", bands.join(","), self.f_max)
    }
}

impl Serialize for BandSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        BandSetDoc {
            bands: self.bands.iter().map(|&(a, b)| [a, b]).collect(),
            fmax: self.f_max,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BandSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = BandSetDoc::deserialize(deserializer)?;
        let bands: Vec<(f64, f64)> = doc.bands.iter().map(|&[a, b]| (a, b)).collect();
        BandSet::new(&bands, doc.fmax).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Display for BandSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The active spectral slots `k = {k_1 .. k_q} ⊆ {0 .. L−1}` at resolution `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralIndexSet {
    l: usize,
    indices: Vec<usize>,
}

impl SpectralIndexSet {
    /// Builds an index set from raw slot indices; duplicates collapse (the
    /// indices form a set) and out-of-range values are rejected.
    pub fn new(l: usize, indices: &[usize]) -> Result<Self> {
        if l == 0 {
            return Err(Error::invalid("L must be at least 1"));
        }
        if indices.is_empty() {
            return Err(Error::invalid("index set is empty"));
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&k| k >= l) {
            return Err(Error::invalid(format!("slot index {bad} out of range for L = {l}")));
        }
        Ok(SpectralIndexSet { l, indices: sorted })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Slot indices, strictly increasing.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of active slots.
    pub fn q(&self) -> usize {
        self.indices.len()
    }
}

impl std::fmt::Display for SpectralIndexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Sampling-rate summary for a `(L, p)` choice against a band set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePlan {
    #[serde(rename = "L")]
    pub l: usize,
    pub p: usize,
    pub q: usize,
    /// Average sampling rate `(p/L)·f_max` in Hz.
    pub average_rate: f64,
    /// Total occupied bandwidth in Hz — the information-theoretic floor.
    pub landau_rate: f64,
    /// `f_max` in Hz.
    pub nyquist_rate: f64,
    /// `p/L`, the fraction of Nyquist actually paid.
    pub ratio: f64,
}

/// Slot index of frequency `f`: `floor(f·L/f_max)` with a guard that snaps
/// products within 1e−12 (relative) of an integer onto it, so inexact binary
/// representation of decimal inputs cannot flip a boundary slot.
fn slot_index(f: f64, l: usize, f_max: f64) -> usize {
    let t = f * l as f64 / f_max;
    let r = t.round();
    let snapped = if (t - r).abs() <= 1e-12 * r.abs().max(1.0) { r } else { t.floor() };
    (snapped as usize).min(l - 1)
}

/// Computes the spectral index set: for each band, slots
/// `floor(a_i·L/f_max) ..= floor(b_i·L/f_max)` (upper index clamped to
/// `L−1`), unioned over bands.
///
/// A band endpoint exactly on a slot boundary activates the slot it is the
/// floor of — e.g. `b_i = f_max` activates slot `L−1` through the clamp, and
/// a band ending exactly at a boundary still activates the next slot.
pub fn compute_spectral_index_set(bands: &BandSet, l: usize) -> Result<SpectralIndexSet> {
    if l == 0 {
        return Err(Error::invalid("L must be at least 1"));
    }
    let mut indices = Vec::new();
    for &(a, b) in bands.bands() {
        let lo = slot_index(a, l, bands.f_max());
        let hi = slot_index(b, l, bands.f_max());
        indices.extend(lo..=hi);
    }
    SpectralIndexSet::new(l, &indices)
}

/// Builds the rate plan for sampling `p` of every `L` slots.
pub fn make_rate_plan(bands: &BandSet, l: usize, p: usize) -> Result<RatePlan> {
    let k = compute_spectral_index_set(bands, l)?;
    let q = k.q();
    if p < q {
        return Err(Error::infeasible(format!(
            "p = {p} cosets cannot determine q = {q} active slots (need p ≥ q)"
        )));
    }
    if p > l {
        return Err(Error::infeasible(format!("p = {p} exceeds the L = {l} slots per period")));
    }
    let ratio = p as f64 / l as f64;
    Ok(RatePlan {
        l,
        p,
        q,
        average_rate: ratio * bands.f_max(),
        landau_rate: bands.total_width(),
        nyquist_rate: bands.f_max(),
        ratio,
    })
}

/// Minimal-rate plans (`p = q`) for every `L` in `[l_min, l_max]`, in order.
pub fn sweep_rates(bands: &BandSet, l_min: usize, l_max: usize) -> Result<Vec<RatePlan>> {
    if l_min == 0 || l_min > l_max {
        return Err(Error::invalid(format!("invalid L range [{l_min}, {l_max}]")));
    }
    (l_min..=l_max)
        .map(|l| {
            let q = compute_spectral_index_set(bands, l)?.q();
            make_rate_plan(bands, l, q)
        })
        .collect()
}
