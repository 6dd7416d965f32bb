//! Entanglement spectrum statistics: adjacent-gap ratios, the Wigner-Dyson
//! surmise, binned empirical distributions and their KL divergence from a
//! reference density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::entanglement::EntanglementSpectrum;
use crate::{Error, Result};

/// Relative tolerance for treating two eigenvalues as equal.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Default retention threshold, relative to the largest eigenvalue.
pub const DEFAULT_RANK_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpacingRatios {
    pub values: Vec<f64>,
    /// Adjacent gaps among retained eigenvalues that fell below tolerance.
    pub degenerate_count: usize,
}

impl SpacingRatios {
    /// Pools another realization's ratios into this one.
    pub fn extend(&mut self, other: &SpacingRatios) {
        self.values.extend_from_slice(&other.values);
        self.degenerate_count += other.degenerate_count;
    }

    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a SpacingRatios>) -> SpacingRatios {
        let mut all = SpacingRatios::default();
        for p in parts {
            all.extend(p);
        }
        all
    }
}

/// Ratios `r_k = (p_{k-1} - p_k) / (p_k - p_{k+1})` of a descending spectrum.
///
/// Eigenvalues below `rank_cutoff * p_max` are dropped. Eigenvalues equal to
/// within `1e-12 * p_max` are merged into one level of multiplicity `m`, and
/// the ratio at that level is emitted `m` times. Every zero gap is counted in
/// `degenerate_count`.
pub fn spacing_ratios(spectrum: &EntanglementSpectrum, rank_cutoff: f64) -> SpacingRatios {
    let p = spectrum.probabilities();
    let Some(&p_max) = p.first() else {
        return SpacingRatios::default();
    };
    if p_max <= 0.0 {
        return SpacingRatios::default();
    }
    let kept: Vec<f64> = p.iter().copied().take_while(|&x| x >= rank_cutoff * p_max).collect();
    if kept.len() < 3 {
        return SpacingRatios::default();
    }
    let tol = DEGENERACY_TOL * p_max;

    // (level, multiplicity)
    let mut levels: Vec<(f64, usize)> = Vec::with_capacity(kept.len());
    let mut degenerate_count = 0;
    for &x in &kept {
        match levels.last_mut() {
            Some((v, m)) if *v - x < tol => {
                *m += 1;
                degenerate_count += 1;
            }
            _ => levels.push((x, 1)),
        }
    }

    let mut values = Vec::with_capacity(kept.len());
    for w in levels.windows(3) {
        let (prev, (cur, mult), next) = (w[0].0, w[1], w[2].0);
        let denom = cur - next;
        if denom < tol {
            degenerate_count += 1;
            continue;
        }
        let r = (prev - cur) / denom;
        values.extend(std::iter::repeat_n(r, mult));
    }
    SpacingRatios { values, degenerate_count }
}

/// Normalisation constant of the surmise for `beta ∈ {1, 2, 4}`.
pub fn wigner_dyson_norm(beta: u32) -> Result<f64> {
    match beta {
        1 => Ok(8.0 / 27.0),
        2 => Ok(4.0 * PI / (81.0 * 3f64.sqrt())),
        4 => Ok(4.0 * PI / (729.0 * 3f64.sqrt())),
        b => Err(Error::Config(format!("unsupported Wigner-Dyson beta {b}; expected 1, 2 or 4"))),
    }
}

/// `P_WD(r) = (r + r²)^β / [Z (1 + r + r²)^{1 + 3β/2}]`.
pub fn wigner_dyson_pdf(r: f64, beta: u32) -> Result<f64> {
    let z = wigner_dyson_norm(beta)?;
    Ok(wd_unchecked(r, beta, z))
}

fn wd_unchecked(r: f64, beta: u32, z: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let b = beta as i32;
    (r + r * r).powi(b) / (z * (1.0 + r + r * r).powf(1.0 + 1.5 * beta as f64))
}

/// A reference density on `[0, ∞)`.
pub trait Density: Sync {
    fn pdf(&self, r: f64) -> f64;

    /// Mass on `[a, b]`; the default integrates `pdf` numerically.
    fn mass(&self, a: f64, b: f64) -> f64 {
        adaptive_simpson(&|x| self.pdf(x), a, b, 1e-13, 40)
    }
}

/// The Wigner-Dyson surmise at fixed β; `WignerDyson::gue()` is β = 2.
#[derive(Clone, Copy, Debug)]
pub struct WignerDyson {
    beta: u32,
    z: f64,
}

impl WignerDyson {
    pub fn new(beta: u32) -> Result<Self> {
        Ok(WignerDyson { beta, z: wigner_dyson_norm(beta)? })
    }

    pub fn gue() -> Self {
        WignerDyson { beta: 2, z: 4.0 * PI / (81.0 * 3f64.sqrt()) }
    }
}

impl Density for WignerDyson {
    fn pdf(&self, r: f64) -> f64 {
        wd_unchecked(r, self.beta, self.z)
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), eps, depth)
}

/// Uniform bin layout over `[0, r_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Binning {
    pub bins: usize,
    pub r_max: f64,
}

impl Default for Binning {
    fn default() -> Self {
        Binning { bins: 50, r_max: 4.0 }
    }
}

impl Binning {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.r_max * i as f64 / self.bins as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 || !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!(
                "binning needs bins >= 1 and a finite r_max > 0, got {} bins on [0, {}]",
                self.bins, self.r_max
            )));
        }
        Ok(())
    }
}

/// Density-normalised histogram of spacing ratios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `count_i / (sample_count * width_i)`; integrates to the in-range fraction.
    pub densities: Vec<f64>,
    pub sample_count: usize,
    pub out_of_range: usize,
}

impl RatioHistogram {
    pub fn in_range(&self) -> usize {
        self.sample_count - self.out_of_range
    }

    pub fn out_of_range_fraction(&self) -> f64 {
        self.out_of_range as f64 / self.sample_count as f64
    }

    /// Empirical bin probabilities among in-range samples.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.in_range() as f64;
        self.counts.iter().map(|&c| if n > 0.0 { c as f64 / n } else { 0.0 }).collect()
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }
}

/// Bins `samples` on `bin_edges` (ascending). Bins are half-open except the
/// last, which includes its upper edge.
pub fn empirical_distribution(samples: &[f64], bin_edges: &[f64]) -> Result<RatioHistogram> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no spacing-ratio samples to bin".into()));
    }
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("bin edges must be strictly ascending with at least one bin".into()));
    }
    let bins = bin_edges.len() - 1;
    let (lo, hi) = (bin_edges[0], bin_edges[bins]);
    let mut counts = vec![0usize; bins];
    let mut out_of_range = 0;
    for &r in samples {
        if !(r >= lo && r <= hi) {
            out_of_range += 1;
            continue;
        }
        // first edge strictly greater than r, minus one
        let idx = bin_edges.partition_point(|&e| e <= r).saturating_sub(1).min(bins - 1);
        counts[idx] += 1;
    }
    let total = samples.len() as f64;
    let densities = counts
        .iter()
        .zip(bin_edges.windows(2))
        .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
        .collect();
    Ok(RatioHistogram {
        bin_edges: bin_edges.to_vec(),
        counts,
        densities,
        sample_count: samples.len(),
        out_of_range,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlDivergence {
    /// Nats; `+∞` when some bin has empirical mass but no reference mass.
    pub value: f64,
    /// Bins with `P_i > 0` and `Q_i = 0`.
    pub unsupported_bins: Vec<usize>,
}

impl KlDivergence {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Reference bin probabilities `Q_i`, renormalised to the histogram's range.
pub fn reference_probabilities(bin_edges: &[f64], reference: &dyn Density) -> Vec<f64> {
    let masses: Vec<f64> = bin_edges.windows(2).map(|w| reference.mass(w[0], w[1])).collect();
    let total: f64 = masses.iter().sum();
    masses.iter().map(|m| if total > 0.0 { m / total } else { 0.0 }).collect()
}

/// `Σ_i P_i ln(P_i / Q_i)` over bins with `P_i > 0`. Undefined (an
/// `InsufficientData` error) when no sample falls inside the binned range.
pub fn kl_divergence(hist: &RatioHistogram, reference: &dyn Density) -> Result<KlDivergence> {
    if hist.in_range() == 0 {
        return Err(Error::InsufficientData(format!(
            "all {} spacing ratios lie outside [{}, {}]",
            hist.sample_count,
            hist.bin_edges[0],
            hist.bin_edges[hist.bins()]
        )));
    }
    let q = reference_probabilities(&hist.bin_edges, reference);
    Ok(kl_from_probabilities(&hist.probabilities(), &q))
}

pub fn kl_from_probabilities(p: &[f64], q: &[f64]) -> KlDivergence {
    let mut value = 0.0;
    let mut unsupported_bins = Vec::new();
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            unsupported_bins.push(i);
            continue;
        }
        value += pi * (pi / qi).ln();
    }
    if !unsupported_bins.is_empty() {
        value = f64::INFINITY;
    }
    // Gibbs: true value is >= 0; clip round-off
    KlDivergence { value: value.max(0.0), unsupported_bins }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> EntanglementSpectrum {
        EntanglementSpectrum::from_values(v.to_vec())
    }

    #[test]
    fn ratio_formula() {
        let r = spacing_ratios(&spec(&[0.5, 0.3, 0.15, 0.05]), DEFAULT_RANK_CUTOFF);
        assert_eq!(r.values.len(), 2);
        assert!((r.values[0] - 0.2 / 0.15).abs() < 1e-12);
        assert!((r.values[1] - 1.5).abs() < 1e-12);
        assert_eq!(r.degenerate_count, 0);
    }

    #[test]
    fn flat_spectrum_is_all_degenerate() {
        let r = spacing_ratios(&spec(&[0.25; 4]), DEFAULT_RANK_CUTOFF);
        assert!(r.values.is_empty());
        assert_eq!(r.degenerate_count, 3);
    }

    #[test]
    fn multiplicity_repeats_ratio() {
        // merged levels (0.4, 1) (0.2, 2) (0.1, 2): one interior level, twice
        let r = spacing_ratios(&spec(&[0.4, 0.2, 0.2, 0.1, 0.1]), DEFAULT_RANK_CUTOFF);
        assert_eq!(r.values.len(), 2);
        assert!(r.values.iter().all(|&x| (x - 2.0).abs() < 1e-12));
        assert_eq!(r.degenerate_count, 2);
    }

    #[test]
    fn short_spectra_are_empty() {
        assert!(spacing_ratios(&spec(&[0.6, 0.4]), DEFAULT_RANK_CUTOFF).values.is_empty());
        // tail below cutoff leaves two levels
        let r = spacing_ratios(&spec(&[0.6, 0.4, 1e-20, 1e-21]), DEFAULT_RANK_CUTOFF);
        assert!(r.values.is_empty());
        assert!(spacing_ratios(&spec(&[]), DEFAULT_RANK_CUTOFF).values.is_empty());
    }

    #[test]
    fn surmise_values() {
        assert_eq!(wigner_dyson_pdf(0.0, 2).unwrap(), 0.0);
        let expected = 3f64.sqrt() / PI;
        assert!((wigner_dyson_pdf(1.0, 2).unwrap() - expected).abs() < 1e-9);
        assert!((wigner_dyson_pdf(1.0, 2).unwrap() - 0.551_329).abs() < 1e-6);
        assert!(matches!(wigner_dyson_pdf(1.0, 3), Err(Error::Config(_))));
    }

    #[test]
    fn surmise_level_repulsion_and_peak() {
        let gue = WignerDyson::gue();
        let c1 = gue.pdf(1e-3) / 1e-6;
        let c2 = gue.pdf(1e-4) / 1e-8;
        assert!((c1 / c2 - 1.0).abs() < 0.05);
        let grid: Vec<f64> = (1..4000).map(|i| i as f64 * 1e-3).collect();
        let peak = grid.iter().copied().max_by(|a, b| gue.pdf(*a).total_cmp(&gue.pdf(*b))).unwrap();
        // d/dr ln P = 0 reduces to r² + r - 1 = 0
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((peak - golden).abs() < 1e-3, "peak at {peak}");
    }

    #[test]
    fn histogram_examples() {
        let h = empirical_distribution(&[0.5], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(h.densities, vec![1.0, 0.0]);
        assert!(matches!(empirical_distribution(&[], &[0.0, 1.0]), Err(Error::InsufficientData(_))));

        let h = empirical_distribution(&[0.5, 1.5, 2.5, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(h.counts, vec![1, 2]);
        assert_eq!(h.out_of_range, 1);
        let integral: f64 = h.densities.iter().sum();
        assert!((integral - 0.75).abs() < 1e-12);
    }

    #[test]
    fn uniform_samples_give_flat_density() {
        let samples: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0 * 4.0).collect();
        let h = empirical_distribution(&samples, &Binning::default().edges()).unwrap();
        for d in &h.densities {
            assert!((d - 0.25).abs() < 1e-9);
        }
    }

    struct TwoBin;
    impl Density for TwoBin {
        fn pdf(&self, _r: f64) -> f64 {
            0.5
        }
    }

    #[test]
    fn kl_closed_forms() {
        let h = empirical_distribution(&[0.5, 0.25], &[0.0, 1.0, 2.0]).unwrap();
        let d = kl_divergence(&h, &TwoBin).unwrap();
        assert!((d.value - std::f64::consts::LN_2).abs() < 1e-12);

        let d = kl_from_probabilities(&[0.5, 0.5], &[1.0, 0.0]);
        assert!(d.value.is_infinite());
        assert_eq!(d.unsupported_bins, vec![1]);
    }

    #[test]
    fn kl_of_reference_against_itself_is_zero() {
        let edges = Binning::default().edges();
        let q = reference_probabilities(&edges, &WignerDyson::gue());
        assert!(kl_from_probabilities(&q, &q).value.abs() < 1e-12);
    }

    #[test]
    fn binning_validation() {
        assert!(Binning { bins: 0, r_max: 4.0 }.validate().is_err());
        assert!(Binning { bins: 5, r_max: -1.0 }.validate().is_err());
        assert_eq!(Binning::default().edges().len(), 51);
    }

    #[test]
    fn kl_is_undefined_without_in_range_samples() {
        let h = empirical_distribution(&[5.8, 6.0], &Binning::default().edges()).unwrap();
        assert_eq!(h.out_of_range_fraction(), 1.0);
        assert!(matches!(kl_divergence(&h, &WignerDyson::gue()), Err(Error::InsufficientData(_))));
    }
}
