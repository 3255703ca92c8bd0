//! Synthetic multiband signals on a finite grid, coset sampling, and
//! measurement noise.
//!
//! Everything lives on a length-`N` base-rate grid with sample period `T`
//! (`N` a multiple of `L`, so slot boundaries align with transform bins).
//! The fixed transform convention throughout the crate: the forward discrete
//! transform uses the negative exponent with no scaling, the inverse carries
//! the `1/N`. Bin `b` of the spectrum represents frequency `b·f_max/N`.
//!
//! Synthesis is frequency-domain by design: spectrum values are drawn
//! directly on the bins whose center frequency lies inside the band set
//! (half-open `[a_i, b_i)`), everything else stays exactly zero, and the
//! inverse transform yields the time samples. That makes band-limitation
//! exact on the grid, so noiseless reconstruction error measures linear
//! algebra, not synthesis leakage. Noise models post-sampling measurement
//! error: it is added at kept sample positions only, never at the zeros the
//! coset structure dictates.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::SamplePattern;
use crate::rng::{rng_from_seed, standard_complex_gaussian};
use crate::spectrum::BandSet;

/// Forward discrete transform: negative exponent, no scaling.
pub(crate) fn dft_forward(data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse discrete transform: positive exponent, scaled by `1/N`.
pub(crate) fn dft_inverse(data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    for z in &mut buf {
        *z *= scale;
    }
    buf
}

/// Finite sampling grid: `N` base-rate samples at period `T`, sliced into
/// blocks of `L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    n: usize,
    l: usize,
    t: f64,
}

impl GridSpec {
    pub fn new(n: usize, l: usize, t: f64) -> Result<Self> {
        if l == 0 {
            return Err(Error::invalid("L must be at least 1"));
        }
        if n == 0 || n % l != 0 {
            return Err(Error::invalid(format!(
                "grid length N = {n} must be a positive multiple of L = {l}"
            )));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(format!("base period T must be positive and finite, got {t}")));
        }
        Ok(GridSpec { n, l, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Base sample period in seconds (`1/f_max` throughout the pipeline).
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Transform bins per spectral slot, `N/L`.
    pub fn bins_per_slot(&self) -> usize {
        self.n / self.l
    }

    /// Highest representable frequency, `1/T`.
    pub fn f_max(&self) -> f64 {
        1.0 / self.t
    }
}

/// A base-rate signal with its spectrum and occupied-bin mask.
#[derive(Clone, Debug)]
pub struct BasebandSignal {
    grid: GridSpec,
    samples: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    support_mask: Vec<bool>,
}

impl BasebandSignal {
    /// Wraps raw time samples; the spectrum is their forward transform and
    /// the support mask marks bins above `1e−12` of the spectral peak.
    pub fn from_samples(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::invalid(format!(
                "sample count {} does not match grid length {}",
                samples.len(),
                grid.n()
            )));
        }
        let spectrum = dft_forward(&samples);
        let peak = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let support_mask = spectrum.iter().map(|z| z.norm() > 1e-12 * peak).collect();
        Ok(BasebandSignal { grid, samples, spectrum, support_mask })
    }

    /// Builds a signal from an explicit spectrum and support mask.
    pub(crate) fn from_spectrum(grid: GridSpec, spectrum: Vec<Complex64>, support_mask: Vec<bool>) -> Self {
        debug_assert_eq!(spectrum.len(), grid.n());
        debug_assert_eq!(support_mask.len(), grid.n());
        let samples = dft_inverse(&spectrum);
        BasebandSignal { grid, samples, spectrum, support_mask }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Time samples `x[n] = x(nT)`.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Forward transform of the samples.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Which spectrum bins carry energy.
    pub fn support_mask(&self) -> &[bool] {
        &self.support_mask
    }

    /// Total time-domain energy `Σ|x[n]|²`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Draws a random signal whose spectrum occupies exactly the grid bins whose
/// center frequency lies inside the band set, normalized to unit time-domain
/// energy.
///
/// The grid's base period must equal `1/f_max`, and every band must contain
/// at least one bin center (otherwise the grid is too coarse to represent
/// it). Identical `(bands, grid, seed)` inputs produce bit-identical signals.
pub fn synthesize_multiband(bands: &BandSet, grid: &GridSpec, seed: u64) -> Result<BasebandSignal> {
    if (grid.t() * bands.f_max() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "grid base period T = {} must equal 1/f_max = {}",
            grid.t(),
            1.0 / bands.f_max()
        )));
    }
    let n = grid.n();
    let f_max = bands.f_max();
    let mut mask = vec![false; n];
    let mut covered = vec![false; bands.band_count()];
    let mut band_idx = 0;
    let band_list = bands.bands();
    for (b, slot) in mask.iter_mut().enumerate() {
        let f = b as f64 * f_max / n as f64;
        while band_idx < band_list.len() && f >= band_list[band_idx].1 {
            band_idx += 1;
        }
        if band_idx < band_list.len() && f >= band_list[band_idx].0 {
            *slot = true;
            covered[band_idx] = true;
        }
    }
    for (i, &ok) in covered.iter().enumerate() {
        if !ok {
            let (a, b) = band_list[i];
            return Err(Error::invalid(format!(
                "band [{a}, {b}] contains no bin center at N = {n}; increase N"
            )));
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    for (b, z) in spectrum.iter_mut().enumerate() {
        if mask[b] {
            *z = standard_complex_gaussian(&mut rng);
        }
    }
    // Parseval under this convention: Σ|x[n]|² = (1/N)·Σ|X[b]|².
    let time_energy: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    if time_energy <= 0.0 {
        return Err(Error::invalid("synthesized signal has zero energy"));
    }
    let scale = 1.0 / time_energy.sqrt();
    for z in &mut spectrum {
        *z *= scale;
    }
    Ok(BasebandSignal::from_spectrum(*grid, spectrum, mask))
}

/// The `p` zero-padded coset sequences of a signal under a pattern.
#[derive(Clone, Debug)]
pub struct CosetSampleSet {
    grid: GridSpec,
    pattern: SamplePattern,
    sequences: Vec<Vec<Complex64>>,
    kept_count: usize,
}

impl CosetSampleSet {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn pattern(&self) -> &SamplePattern {
        &self.pattern
    }

    /// Sequence `i` is zero except at positions `n ≡ c_i (mod L)`.
    pub fn sequences(&self) -> &[Vec<Complex64>] {
        &self.sequences
    }

    /// Total retained samples, `p·N/L`.
    pub fn kept_count(&self) -> usize {
        self.kept_count
    }

    /// Energy summed over kept positions only.
    pub fn kept_energy(&self) -> f64 {
        let l = self.grid.l();
        self.sequences
            .iter()
            .zip(self.pattern.offsets())
            .map(|(seq, &c)| seq.iter().skip(c).step_by(l).map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }
}

/// Splits a signal into zero-padded coset sequences: sequence `i` keeps
/// `x[n]` at `n = mL + c_i` and is zero elsewhere.
pub fn coset_sample(signal: &BasebandSignal, pattern: &SamplePattern) -> Result<CosetSampleSet> {
    let grid = *signal.grid();
    if pattern.l() != grid.l() {
        return Err(Error::invalid(format!(
            "pattern has L = {} but the grid has L = {}",
            pattern.l(),
            grid.l()
        )));
    }
    let n = grid.n();
    let l = grid.l();
    let sequences = pattern
        .offsets()
        .iter()
        .map(|&c| {
            let mut seq = vec![Complex64::new(0.0, 0.0); n];
            let mut idx = c;
            while idx < n {
                seq[idx] = signal.samples()[idx];
                idx += l;
            }
            seq
        })
        .collect();
    Ok(CosetSampleSet { grid, pattern: pattern.clone(), sequences, kept_count: pattern.p() * (n / l) })
}

/// Adds independent complex Gaussian noise at kept positions only, scaled so
/// the expected kept-signal-to-noise energy ratio is `10^(snr_db/10)`.
///
/// Positions the coset structure zeroes stay exactly zero. A signal with no
/// kept energy is returned unchanged (no finite noise level realizes an SNR
/// against zero signal).
pub fn add_noise(samples: &CosetSampleSet, snr_db: f64, seed: u64) -> Result<CosetSampleSet> {
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("snr_db must be finite, got {snr_db}")));
    }
    let signal_energy = samples.kept_energy();
    if signal_energy == 0.0 {
        return Ok(samples.clone());
    }
    let noise_energy = signal_energy / 10f64.powf(snr_db / 10.0);
    // Each kept position receives a complex sample with per-component
    // standard deviation s, contributing 2s² expected energy.
    let s = (noise_energy / (2.0 * samples.kept_count() as f64)).sqrt();
    let mut noisy = samples.clone();
    let mut rng = rng_from_seed(seed);
    let l = noisy.grid.l();
    let n = noisy.grid.n();
    let offsets: Vec<usize> = noisy.pattern.offsets().to_vec();
    for (seq, c) in noisy.sequences.iter_mut().zip(offsets) {
        let mut idx = c;
        while idx < n {
            seq[idx] += s * standard_complex_gaussian(&mut rng);
            idx += l;
        }
    }
    Ok(noisy)
}

/// Sidecar metadata stored next to a signal file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bands: Option<BandSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

const SIGNAL_FORMAT_VERSION: u32 = 1;

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes a signal to `path` in the binary container format, plus a JSON
/// descriptor sidecar at `path.json`.
///
/// Layout (all little-endian): `N: u64`, `L: u64`, `T: f64`,
/// `format version: u32`, then `N` complex samples as interleaved `re, im`
/// doubles.
pub fn save_signal(path: &Path, signal: &BasebandSignal, descriptor: &SignalDescriptor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let grid = signal.grid();
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&(grid.l() as u64).to_le_bytes())?;
    w.write_all(&grid.t().to_le_bytes())?;
    w.write_all(&SIGNAL_FORMAT_VERSION.to_le_bytes())?;
    for z in signal.samples() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;

    let sidecar = serde_json::json!({
        "format_version": SIGNAL_FORMAT_VERSION,
        "n": grid.n(),
        "L": grid.l(),
        "T": grid.t(),
        "bands": descriptor.bands,
        "seed": descriptor.seed,
    });
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    std::fs::write(sidecar_path(path), text)?;
    Ok(())
}

/// Reads a signal written by [`save_signal`]; a missing sidecar yields an
/// empty descriptor.
pub fn load_signal(path: &Path) -> Result<(BasebandSignal, SignalDescriptor)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf)?;
    let n = u64::from_le_bytes(u64buf) as usize;
    r.read_exact(&mut u64buf)?;
    let l = u64::from_le_bytes(u64buf) as usize;
    r.read_exact(&mut u64buf)?;
    let t = f64::from_le_bytes(u64buf);
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != SIGNAL_FORMAT_VERSION {
        return Err(Error::invalid(format!(
            "signal file format version {version} is not supported (expected {SIGNAL_FORMAT_VERSION})"
        )));
    }
    let grid = GridSpec::new(n, l, t)?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut u64buf)?;
        let re = f64::from_le_bytes(u64buf);
        r.read_exact(&mut u64buf)?;
        let im = f64::from_le_bytes(u64buf);
        samples.push(Complex64::new(re, im));
    }
    let signal = BasebandSignal::from_samples(grid, samples)?;

    let sidecar = sidecar_path(path);
    let descriptor = if sidecar.exists() {
        serde_json::from_str(&std::fs::read_to_string(sidecar)?)?
    } else {
        SignalDescriptor::default()
    };
    Ok((signal, descriptor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_band() -> BandSet {
        BandSet::new(&[(1.2, 1.8), (4.1, 4.8)], 5.0).unwrap()
    }

    fn fig_grid() -> GridSpec {
        GridSpec::new(640, 10, 0.2).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0, 10, 0.2).is_err());
        assert!(GridSpec::new(65, 10, 0.2).is_err());
        assert!(GridSpec::new(640, 0, 0.2).is_err());
        assert!(GridSpec::new(640, 10, 0.0).is_err());
        let g = fig_grid();
        assert_eq!(g.bins_per_slot(), 64);
        assert_eq!(g.f_max(), 5.0);
    }

    #[test]
    fn transform_round_trip_is_identity() {
        let mut rng = crate::rng::rng_from_seed(5);
        let x: Vec<Complex64> = (0..96).map(|_| crate::rng::standard_complex_gaussian(&mut rng)).collect();
        let back = dft_inverse(&dft_forward(&x));
        let peak = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12 * peak);
        }
    }

    #[test]
    fn synthesis_masks_exactly_the_in_band_bins() {
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 42).unwrap();
        let bands = two_band();
        for (b, &masked) in signal.support_mask().iter().enumerate() {
            let f = b as f64 * 5.0 / 640.0;
            assert_eq!(masked, bands.contains(f), "bin {b} at {f} Hz");
            if masked {
                // Active bins sit only in slots {2,3,8,9} of the L = 10 grid.
                let slot = b / 64;
                assert!([2usize, 3, 8, 9].contains(&slot), "bin {b} in slot {slot}");
            } else {
                assert_eq!(signal.spectrum()[b], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn synthesis_normalizes_energy_and_is_deterministic() {
        let a = synthesize_multiband(&two_band(), &fig_grid(), 7).unwrap();
        assert!((a.energy() - 1.0).abs() < 1e-9);
        let b = synthesize_multiband(&two_band(), &fig_grid(), 7).unwrap();
        assert_eq!(a.samples(), b.samples());
        let c = synthesize_multiband(&two_band(), &fig_grid(), 8).unwrap();
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn full_band_synthesis_on_the_minimal_grid() {
        let bands = BandSet::new(&[(0.0, 5.0)], 5.0).unwrap();
        let grid = GridSpec::new(10, 10, 0.2).unwrap();
        let signal = synthesize_multiband(&bands, &grid, 3).unwrap();
        assert!(signal.support_mask().iter().all(|&m| m));
        assert!((signal.energy() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn synthesis_rejects_mismatched_grids() {
        let wrong_t = GridSpec::new(640, 10, 0.25).unwrap();
        assert!(synthesize_multiband(&two_band(), &wrong_t, 0).is_err());
        // A band narrower than the bin spacing with no center inside it.
        let narrow = BandSet::new(&[(0.43, 0.47)], 1.0).unwrap();
        let coarse = GridSpec::new(10, 10, 1.0).unwrap();
        assert!(synthesize_multiband(&narrow, &coarse, 0).is_err());
    }

    #[test]
    fn coset_sequences_keep_only_their_residues() {
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 1).unwrap();
        let pattern = SamplePattern::new(10, &[1, 2, 6, 7]).unwrap();
        let set = coset_sample(&signal, &pattern).unwrap();
        assert_eq!(set.kept_count(), 4 * 64);
        for (seq, &c) in set.sequences().iter().zip(pattern.offsets()) {
            let nonzero = seq.iter().filter(|z| z.norm() > 0.0).count();
            assert!(nonzero <= 64);
            for (idx, z) in seq.iter().enumerate() {
                if idx % 10 == c {
                    assert_eq!(*z, signal.samples()[idx]);
                } else {
                    assert_eq!(*z, Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn full_pattern_cosets_partition_the_signal() {
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 2).unwrap();
        let all: Vec<usize> = (0..10).collect();
        let pattern = SamplePattern::new(10, &all).unwrap();
        let set = coset_sample(&signal, &pattern).unwrap();
        for idx in 0..640 {
            let sum: Complex64 = set.sequences().iter().map(|s| s[idx]).sum();
            assert!((sum - signal.samples()[idx]).norm() < 1e-15);
        }
    }

    #[test]
    fn coset_sampling_rejects_mismatched_periods() {
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 1).unwrap();
        let pattern = SamplePattern::new(8, &[1, 2]).unwrap();
        assert!(coset_sample(&signal, &pattern).is_err());
    }

    #[test]
    fn vanishing_noise_leaves_samples_unchanged() {
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 1).unwrap();
        let pattern = SamplePattern::new(10, &[1, 2, 6, 7]).unwrap();
        let clean = coset_sample(&signal, &pattern).unwrap();
        let noisy = add_noise(&clean, 300.0, 9).unwrap();
        for (a, b) in clean.sequences().iter().zip(noisy.sequences()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn zero_db_noise_has_matching_energy() {
        let bands = two_band();
        let grid = GridSpec::new(6400, 10, 0.2).unwrap();
        let signal = synthesize_multiband(&bands, &grid, 4).unwrap();
        let pattern = SamplePattern::new(10, &[1, 2, 6, 7]).unwrap();
        let clean = coset_sample(&signal, &pattern).unwrap();
        let noisy = add_noise(&clean, 0.0, 11).unwrap();
        let mut noise_energy = 0.0;
        for (a, b) in clean.sequences().iter().zip(noisy.sequences()) {
            for (x, y) in a.iter().zip(b) {
                noise_energy += (y - x).norm_sqr();
            }
        }
        let ratio = noise_energy / clean.kept_energy();
        assert!((0.9..=1.1).contains(&ratio), "noise/signal energy ratio {ratio}");
    }

    #[test]
    fn noise_never_touches_structurally_zero_positions() {
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 1).unwrap();
        let pattern = SamplePattern::new(10, &[0, 5]).unwrap();
        let noisy = add_noise(&coset_sample(&signal, &pattern).unwrap(), -10.0, 3).unwrap();
        for (seq, &c) in noisy.sequences().iter().zip(pattern.offsets()) {
            for (idx, z) in seq.iter().enumerate() {
                if idx % 10 != c {
                    assert_eq!(*z, Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn noise_requires_finite_snr_and_skips_zero_signals() {
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 1).unwrap();
        let pattern = SamplePattern::new(10, &[1, 2, 6, 7]).unwrap();
        let clean = coset_sample(&signal, &pattern).unwrap();
        assert!(add_noise(&clean, f64::NAN, 0).is_err());
        assert!(add_noise(&clean, f64::INFINITY, 0).is_err());
        let zero = BasebandSignal::from_samples(fig_grid(), vec![Complex64::new(0.0, 0.0); 640]).unwrap();
        let zero_set = coset_sample(&zero, &pattern).unwrap();
        let still_zero = add_noise(&zero_set, 20.0, 5).unwrap();
        assert_eq!(still_zero.sequences(), zero_set.sequences());
    }

    #[test]
    fn container_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.bin");
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 21).unwrap();
        let descriptor = SignalDescriptor { bands: Some(two_band()), seed: Some(21) };
        save_signal(&path, &signal, &descriptor).unwrap();
        assert!(path.with_file_name("sig.bin.json").exists());
        let (loaded, desc) = load_signal(&path).unwrap();
        assert_eq!(loaded.grid(), signal.grid());
        assert_eq!(loaded.samples(), signal.samples());
        assert_eq!(desc, descriptor);
    }

    #[test]
    fn loader_rejects_unknown_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.bin");
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 21).unwrap();
        save_signal(&path, &signal, &SignalDescriptor::default()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[24] = 99;
        std::fs::write(&path, bytes).unwrap();
        assert!(load_signal(&path).is_err());
    }

    #[test]
    fn missing_sidecar_yields_empty_descriptor() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.bin");
        let signal = synthesize_multiband(&two_band(), &fig_grid(), 2).unwrap();
        save_signal(&path, &signal, &SignalDescriptor::default()).unwrap();
        std::fs::remove_file(path.with_file_name("sig.bin.json")).unwrap();
        let (_, desc) = load_signal(&path).unwrap();
        assert_eq!(desc, SignalDescriptor::default());
    }
}
