//! Sample-pattern selection by condition-number minimization.
//!
//! Three strategies over the `p`-subsets of `{0 .. L−1}`:
//!
//! - **exhaustive**: every subset, `binomial(L, p)` evaluations, guarded by a
//!   configurable work cap;
//! - **random**: seeded uniform subsets, best-of-`trials`;
//! - **SFS** (sequential forward selection): grow the pattern one offset at a
//!   time, each step keeping the offset whose augmented matrix has minimal
//!   condition number — `p·L − p(p−1)/2` evaluations in total.
//!
//! All strategies rank candidates with one total order — finite condition
//! number first, then the raw `σ_max/σ_min` quotient (relevant among
//! rank-deficient candidates), then the lexicographically smallest offset
//! list — so results are unique and independent of evaluation order.
//! Histogram statistics over random trials ([`random_pattern_trials`],
//! [`sfs_over_random_supports`]) summarize how condition numbers distribute,
//! which is what makes the best-pattern savings visible.

use std::cmp::Ordering;

use serde::ser::SerializeMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulation::{build_modulation_matrix, condition_number, ConditionReport, SamplePattern};
use crate::rng::{derive_seed, random_subset, rng_from_seed, uniform_below};
use crate::spectrum::SpectralIndexSet;

/// Default ceiling on exhaustive-search evaluations.
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Exhaustive,
    Random,
    Sfs,
}

/// Outcome of a pattern search.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub method: SearchMethod,
    pub pattern: SamplePattern,
    pub index_set: SpectralIndexSet,
    /// Condition number of the winning pattern; `+∞` when rank deficient.
    pub cond: f64,
    /// Literal `σ_max/σ_min` of the winner, kept for display even when
    /// `cond` is `+∞`.
    pub raw_ratio: f64,
    pub rank_deficient: bool,
    /// Number of condition-number evaluations actually performed.
    pub evaluations: u64,
}

impl Serialize for SearchResult {
    /// `{method, L, p, k, pattern, cond, raw_ratio, evaluations,
    /// rank_deficient}`; non-finite `cond`/`raw_ratio` serialize as `null`.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(9))?;
        map.serialize_entry("method", &self.method)?;
        map.serialize_entry("L", &self.pattern.l())?;
        map.serialize_entry("p", &self.pattern.p())?;
        map.serialize_entry("k", self.index_set.indices())?;
        map.serialize_entry("pattern", self.pattern.offsets())?;
        map.serialize_entry("cond", &self.cond)?;
        map.serialize_entry("raw_ratio", &self.raw_ratio)?;
        map.serialize_entry("evaluations", &self.evaluations)?;
        map.serialize_entry("rank_deficient", &self.rank_deficient)?;
        map.end()
    }
}

/// Total order over search candidates: `(cond, raw ratio, offsets)`.
///
/// Finite condition numbers rank before infinite ones; among infinite ones a
/// smaller raw ratio is better (largest is worst); exact numeric ties fall
/// through to the lexicographically smallest offset list. `Less` means "a is
/// the better candidate", so reducing many candidates with this comparator
/// yields the same winner in any evaluation order.
pub fn compare_candidates(a: (f64, f64, &[usize]), b: (f64, f64, &[usize])) -> Ordering {
    match (a.0.is_finite(), b.0.is_finite()) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => a.0.total_cmp(&b.0).then_with(|| a.2.cmp(b.2)),
        (false, false) => a.1.total_cmp(&b.1).then_with(|| a.2.cmp(b.2)),
    }
}

/// `binomial(n, k)` saturating at `u128::MAX`.
fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // Multiply before dividing: the running product of i consecutive
        // binomial steps is always divisible by i.
        acc = match acc.checked_mul((n - k + i) as u128) {
            Some(v) => v / i as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// Visits all `k`-subsets of `{0..n−1}` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    debug_assert!(k >= 1 && k <= n);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn validate_instance(l: usize, p: usize, k: &SpectralIndexSet) -> Result<()> {
    if k.l() != l {
        return Err(Error::invalid(format!("index set has L = {} but search was given L = {l}", k.l())));
    }
    if p > l {
        return Err(Error::infeasible(format!("p = {p} exceeds the L = {l} slots per period")));
    }
    Ok(())
}

fn require_determined(p: usize, k: &SpectralIndexSet) -> Result<()> {
    if p < k.q() {
        return Err(Error::infeasible(format!(
            "p = {p} cosets cannot determine q = {} active slots (need p ≥ q)",
            k.q()
        )));
    }
    Ok(())
}

/// Evaluates one candidate pattern, bumping the instrumentation counter.
fn evaluate(l: usize, offsets: &[usize], k: &SpectralIndexSet, evals: &mut u64) -> Result<ConditionReport> {
    let pattern = SamplePattern::new(l, offsets)?;
    // Conditioning is invariant in T, so search always evaluates at T = 1.
    let a = build_modulation_matrix(&pattern, k, 1.0)?;
    *evals += 1;
    Ok(condition_number(&a))
}

fn finish(
    method: SearchMethod,
    l: usize,
    offsets: Vec<usize>,
    report: ConditionReport,
    k: &SpectralIndexSet,
    evaluations: u64,
) -> Result<SearchResult> {
    Ok(SearchResult {
        method,
        pattern: SamplePattern::new(l, &offsets)?,
        index_set: k.clone(),
        cond: report.cond,
        raw_ratio: report.raw_ratio(),
        rank_deficient: report.rank_deficient,
        evaluations,
    })
}

/// Exhaustive minimization over all `p`-subsets with the default work cap.
pub fn exhaustive_search(l: usize, p: usize, k: &SpectralIndexSet) -> Result<SearchResult> {
    exhaustive_search_capped(l, p, k, DEFAULT_EXHAUSTIVE_CAP)
}

/// Exhaustive minimization with an explicit evaluation cap.
///
/// Evaluates every subset (`binomial(L, p)` condition numbers) and returns
/// the total-order minimum, i.e. ties resolve to the lexicographically
/// smallest offset list.
pub fn exhaustive_search_capped(l: usize, p: usize, k: &SpectralIndexSet, cap: u64) -> Result<SearchResult> {
    validate_instance(l, p, k)?;
    require_determined(p, k)?;
    let required = binomial(l, p);
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    let mut evals = 0u64;
    let mut best: Option<(f64, f64, Vec<usize>, ConditionReport)> = None;
    let mut walk_error: Option<Error> = None;
    for_each_combination(l, p, |offsets| {
        if walk_error.is_some() {
            return;
        }
        match evaluate(l, offsets, k, &mut evals) {
            Ok(report) => {
                let key = (report.cond, report.raw_ratio(), offsets);
                let replace = match &best {
                    None => true,
                    Some((c, r, pat, _)) => compare_candidates(key, (*c, *r, pat)) == Ordering::Less,
                };
                if replace {
                    best = Some((report.cond, report.raw_ratio(), offsets.to_vec(), report));
                }
            }
            Err(e) => walk_error = Some(e),
        }
    });
    if let Some(e) = walk_error {
        return Err(e);
    }
    debug_assert_eq!(evals as u128, required);
    let (_, _, offsets, report) = best.expect("at least one subset exists");
    finish(SearchMethod::Exhaustive, l, offsets, report, k, evals)
}

/// Sequential forward selection.
///
/// Starting from the empty pattern, step `i` evaluates every unused offset
/// appended to the current pattern and keeps the total-order best (which
/// breaks exact ties toward the smallest offset). Intermediate matrices have
/// fewer rows than columns; their condition number runs over the row-limited
/// singular values, so the greedy objective is defined at every step. If all
/// candidates at a step are rank deficient, the smallest raw ratio (and then
/// smallest offset) still wins and the final result carries the
/// `rank_deficient` flag.
pub fn sfs_search(l: usize, p: usize, k: &SpectralIndexSet) -> Result<SearchResult> {
    validate_instance(l, p, k)?;
    require_determined(p, k)?;
    let mut evals = 0u64;
    let mut chosen: Vec<usize> = Vec::with_capacity(p);
    let mut last_report: Option<ConditionReport> = None;
    for _ in 0..p {
        let mut best: Option<(f64, f64, Vec<usize>, usize, ConditionReport)> = None;
        for c in 0..l {
            if chosen.contains(&c) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(c);
            trial.sort_unstable();
            let report = evaluate(l, &trial, k, &mut evals)?;
            let replace = match &best {
                None => true,
                Some((bc, br, bpat, _, _)) => {
                    compare_candidates((report.cond, report.raw_ratio(), &trial), (*bc, *br, bpat))
                        == Ordering::Less
                }
            };
            if replace {
                best = Some((report.cond, report.raw_ratio(), trial, c, report));
            }
        }
        let (_, _, _, c, report) = best.expect("p ≤ L leaves an unused offset");
        chosen.push(c);
        chosen.sort_unstable();
        last_report = Some(report);
    }
    let report = last_report.expect("p ≥ 1");
    finish(SearchMethod::Sfs, l, chosen, report, k, evals)
}

/// Best pattern among `trials` seeded uniform `p`-subsets.
///
/// Trial `i` draws from the generator seeded with `derive_seed(seed, i)`, so
/// the sequence of candidates — and hence the winner — is reproducible and
/// independent of evaluation order.
pub fn random_search(l: usize, p: usize, k: &SpectralIndexSet, trials: u64, seed: u64) -> Result<SearchResult> {
    validate_instance(l, p, k)?;
    if p == 0 {
        return Err(Error::invalid("p must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let mut evals = 0u64;
    let mut best: Option<(f64, f64, Vec<usize>, ConditionReport)> = None;
    for trial in 0..trials {
        let mut rng = rng_from_seed(derive_seed(seed, trial));
        let offsets = random_subset(&mut rng, l, p);
        let report = evaluate(l, &offsets, k, &mut evals)?;
        let key = (report.cond, report.raw_ratio(), offsets.as_slice());
        let replace = match &best {
            None => true,
            Some((c, r, pat, _)) => compare_candidates(key, (*c, *r, pat)) == Ordering::Less,
        };
        if replace {
            best = Some((report.cond, report.raw_ratio(), offsets, report));
        }
    }
    let (_, _, offsets, report) = best.expect("trials ≥ 1");
    finish(SearchMethod::Random, l, offsets, report, k, evals)
}

/// Binning and summary-statistic options for condition-number histograms.
#[derive(Clone, Debug)]
pub struct HistogramSpec {
    /// Number of equal-width bins between 1 and the 99th percentile; one
    /// overflow bin is appended above.
    pub bins: usize,
    /// Thresholds for which `fraction_below` is reported.
    pub thresholds: Vec<f64>,
    /// Probabilities at which quantiles are reported.
    pub quantile_probs: Vec<f64>,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            bins: 30,
            thresholds: vec![5.5],
            quantile_probs: vec![0.25, 0.5, 0.75, 0.9, 0.99],
        }
    }
}

/// Distribution of condition numbers over a batch of trials.
///
/// `edges` has one more entry than `counts`; bin `i` covers
/// `[edges[i], edges[i+1])` except the last (overflow) bin, which is closed
/// on the right. Rank-deficient draws are tallied in `infinite_count`, never
/// in a bin, so `Σcounts + infinite_count = trials`. Quantiles use the
/// nearest-rank rule over all trials with rank-deficient draws sorted above
/// every finite value (a quantile that lands there is `+∞`).
#[derive(Clone, Debug, PartialEq)]
pub struct CondHistogram {
    pub trials: u64,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub infinite_count: u64,
    /// `(probability, value)` pairs, ascending in probability.
    pub quantiles: Vec<(f64, f64)>,
    /// `(threshold, fraction of trials with finite cond below it)` pairs.
    pub fraction_below: Vec<(f64, f64)>,
}

impl CondHistogram {
    fn from_conds(conds: &[f64], spec: &HistogramSpec) -> CondHistogram {
        let trials = conds.len() as u64;
        let mut finite: Vec<f64> = conds.iter().copied().filter(|c| c.is_finite()).collect();
        finite.sort_by(f64::total_cmp);
        let infinite_count = trials - finite.len() as u64;

        let (edges, counts) = if finite.is_empty() {
            (vec![1.0, 1.0], vec![0u64])
        } else {
            let p99 = nearest_rank(&finite, finite.len(), 0.99).max(1.0);
            let max_finite = *finite.last().expect("nonempty");
            let width = (p99 - 1.0) / spec.bins as f64;
            let mut edges: Vec<f64> = (0..=spec.bins).map(|i| 1.0 + i as f64 * width).collect();
            edges[spec.bins] = p99;
            edges.push(max_finite.max(p99));
            let mut counts = vec![0u64; spec.bins + 1];
            for &v in &finite {
                let slot = if width > 0.0 && v < p99 {
                    (((v - 1.0) / width) as usize).min(spec.bins - 1)
                } else {
                    spec.bins
                };
                counts[slot] += 1;
            }
            (edges, counts)
        };

        let quantiles = spec
            .quantile_probs
            .iter()
            .map(|&prob| {
                let rank = ((prob * trials as f64).ceil() as usize).clamp(1, trials as usize);
                let value = if rank <= finite.len() { finite[rank - 1] } else { f64::INFINITY };
                (prob, value)
            })
            .collect();
        let fraction_below = spec
            .thresholds
            .iter()
            .map(|&thr| {
                let below = finite.partition_point(|&v| v < thr);
                (thr, below as f64 / trials as f64)
            })
            .collect();

        CondHistogram { trials, edges, counts, infinite_count, quantiles, fraction_below }
    }

    /// Fraction of trials with finite condition number below `threshold`, if
    /// it was requested in the [`HistogramSpec`].
    pub fn fraction_below(&self, threshold: f64) -> Option<f64> {
        self.fraction_below.iter().find(|(t, _)| *t == threshold).map(|(_, f)| *f)
    }

    /// CSV rows `bin_low,bin_high,count` (header included).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,count\n");
        for (i, count) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{count}\n", self.edges[i], self.edges[i + 1]));
        }
        out
    }

    /// JSON document with the bins plus the summary statistics sidecar data.
    pub fn to_json(&self) -> serde_json::Value {
        let mut quantiles = serde_json::Map::new();
        for (prob, value) in &self.quantiles {
            quantiles.insert(prob.to_string(), serde_json::json!(value));
        }
        let mut fraction_below = serde_json::Map::new();
        for (thr, frac) in &self.fraction_below {
            fraction_below.insert(thr.to_string(), serde_json::json!(frac));
        }
        serde_json::json!({
            "trials": self.trials,
            "edges": self.edges,
            "counts": self.counts,
            "infinite_count": self.infinite_count,
            "quantiles": quantiles,
            "fraction_below": fraction_below,
        })
    }
}

/// Nearest-rank value at probability `prob` over `sorted` (ascending) with a
/// notional total of `n` samples; ranks beyond `sorted` would be `+∞`.
fn nearest_rank(sorted: &[f64], n: usize, prob: f64) -> f64 {
    let rank = ((prob * n as f64).ceil() as usize).clamp(1, n);
    if rank <= sorted.len() {
        sorted[rank - 1]
    } else {
        f64::INFINITY
    }
}

/// Condition-number distribution over seeded uniform `p`-subsets.
///
/// Subsets are drawn with replacement across trials; trial `i` uses the
/// generator seeded with `derive_seed(seed, i)`.
pub fn random_pattern_trials(
    l: usize,
    p: usize,
    k: &SpectralIndexSet,
    trials: u64,
    seed: u64,
    spec: &HistogramSpec,
) -> Result<CondHistogram> {
    validate_instance(l, p, k)?;
    if p == 0 {
        return Err(Error::invalid("p must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if spec.bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    let mut evals = 0u64;
    let mut conds = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut rng = rng_from_seed(derive_seed(seed, trial));
        let offsets = random_subset(&mut rng, l, p);
        conds.push(evaluate(l, &offsets, k, &mut evals)?.cond);
    }
    Ok(CondHistogram::from_conds(&conds, spec))
}

/// How `p` is chosen when sweeping random spectral supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PRule {
    /// Use the minimal feasible pattern size, `p = q`.
    PEqualsQ,
    /// Fixed `p`; random supports are drawn with `q ≤ p` so every instance
    /// stays determined.
    Fixed(usize),
}

/// SFS condition numbers over random spectral supports.
///
/// Per trial: draw `q` uniformly (from `1..=L`, or `1..=p` under a fixed-`p`
/// rule), draw a uniform `q`-subset of `{0..L−1}` as the support, run
/// [`sfs_search`], and record the winner's condition number. The support
/// distribution is an artifact choice — uniform size, then uniform subset —
/// documented here rather than inferred from anything.
pub fn sfs_over_random_supports(
    l: usize,
    p_rule: PRule,
    trials: u64,
    seed: u64,
    spec: &HistogramSpec,
) -> Result<CondHistogram> {
    if l == 0 {
        return Err(Error::invalid("L must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if spec.bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    let q_ceiling = match p_rule {
        PRule::PEqualsQ => l,
        PRule::Fixed(p) => {
            if p == 0 || p > l {
                return Err(Error::infeasible(format!("fixed p = {p} must lie in 1..={l}")));
            }
            p
        }
    };
    let mut conds = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut rng = rng_from_seed(derive_seed(seed, trial));
        let q = 1 + uniform_below(&mut rng, q_ceiling as u64) as usize;
        let support = random_subset(&mut rng, l, q);
        let k = SpectralIndexSet::new(l, &support)?;
        let p = match p_rule {
            PRule::PEqualsQ => q,
            PRule::Fixed(p) => p,
        };
        conds.push(sfs_search(l, p, &k)?.cond);
    }
    Ok(CondHistogram::from_conds(&conds, spec))
}
