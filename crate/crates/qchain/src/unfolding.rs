//! Unfolding against a pooled density and nearest-neighbour spacing statistics.

use crate::error::{Error, Result};
use crate::spectra::{bin_index, histogram_of_values, Histogram, Spectrum};
use crate::stats::compensated_sum;

/// Spacings below this (after rescaling to unit mean) count as exact degeneracies.
pub const ZERO_SPACING: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldingMap {
    pub lo: f64,
    pub hi: f64,
    /// Fraction of all pooled eigenvalues in each bin.
    pub proportions: Vec<f64>,
    /// `Σ_{k<j} p_k`.
    pub offsets: Vec<f64>,
}

impl UnfoldingMap {
    pub fn bins(&self) -> usize {
        self.proportions.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn total(&self) -> f64 {
        self.offsets.last().copied().unwrap_or(0.0) + self.proportions.last().copied().unwrap_or(0.0)
    }

    pub fn edge(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.width()
    }

    /// Piecewise-linear map; `None` outside `[lo, hi]`.
    pub fn apply(&self, x: f64) -> Option<f64> {
        let j = bin_index(x, self.lo, self.hi, self.bins())?;
        Some(self.proportions[j] * (x - self.edge(j)) / self.width() + self.offsets[j])
    }
}

pub fn build_unfolding(spectra: &[Spectrum], bins: usize, range: (f64, f64)) -> Result<UnfoldingMap> {
    let (lo, hi) = range;
    if bins == 0 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidArgument(format!("bad unfolding range [{lo}, {hi}] with {bins} bins")));
    }
    let mut counts = vec![0u64; bins];
    let mut total = 0u64;
    for x in spectra.iter().flat_map(|s| s.values.iter()) {
        total += 1;
        if let Some(j) = bin_index(*x, lo, hi, bins) {
            counts[j] += 1;
        }
    }
    if total == 0 {
        return Err(Error::InvalidArgument("empty eigenvalue pool".into()));
    }
    let proportions: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let mut offsets = Vec::with_capacity(bins);
    let mut running = 0u64;
    for &c in &counts {
        offsets.push(running as f64 / total as f64);
        running += c;
    }
    Ok(UnfoldingMap { lo, hi, proportions, offsets })
}

/// Unfolded in-range eigenvalues, in the order of the (sorted) spectrum.
pub fn unfold(map: &UnfoldingMap, spectrum: &Spectrum) -> Vec<f64> {
    spectrum.values.iter().filter_map(|&x| map.apply(x)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpacingSample {
    /// Unit-mean spacings, zeros included.
    pub spacings: Vec<f64>,
}

impl SpacingSample {
    pub fn zero_fraction(&self) -> f64 {
        self.spacings.iter().filter(|&&s| s < ZERO_SPACING).count() as f64 / self.spacings.len() as f64
    }

    /// Histogram normalised by the full sample size, optionally skipping zero spacings.
    pub fn histogram(&self, bins: usize, hi: f64, drop_zero: bool) -> Result<Histogram> {
        let total = self.spacings.len() as f64;
        let kept: Vec<f64> =
            self.spacings.iter().copied().filter(|&s| !(drop_zero && s < ZERO_SPACING)).collect();
        let mut h = histogram_of_values(kept.iter(), bins, 0.0, hi, false)?;
        let rescale = kept.len() as f64 / total;
        for d in &mut h.density {
            *d *= rescale;
        }
        h.captured_fraction *= rescale;
        Ok(h)
    }
}

/// Consecutive differences within each sample, pooled, then one rescale to unit mean.
pub fn spacing_sample(unfolded: &[Vec<f64>]) -> Result<SpacingSample> {
    if unfolded.is_empty() {
        return Err(Error::InvalidArgument("no unfolded spectra".into()));
    }
    let mut spacings = Vec::new();
    for u in unfolded {
        if u.len() < 2 {
            return Err(Error::InvalidArgument("each unfolded spectrum needs at least two values".into()));
        }
        spacings.extend(u.windows(2).map(|w| w[1] - w[0]));
    }
    let mean = compensated_sum(spacings.iter().copied()) / spacings.len() as f64;
    if mean <= 0.0 {
        return Err(Error::InvalidArgument("all spacings vanish".into()));
    }
    for s in &mut spacings {
        *s /= mean;
    }
    Ok(SpacingSample { spacings })
}

/// Unfold every spectrum against their pooled density and collect spacings.
pub fn spacings_of(spectra: &[Spectrum], bins: usize, range: (f64, f64)) -> Result<SpacingSample> {
    let map = build_unfolding(spectra, bins, range)?;
    let unfolded: Vec<Vec<f64>> = spectra.iter().map(|s| unfold(&map, s)).collect();
    spacing_sample(&unfolded)
}

/// `C s^β e^{-c s²}` (or `e^{-s}` for β = 0), scaled so its total mass is `area`
/// and the mean of the normalised distribution is `mean`.
pub fn surmise(beta: u32, s_grid: &[f64], area: f64, mean: f64) -> Result<Vec<f64>> {
    let unit = surmise_unit(beta)?;
    Ok(s_grid.iter().map(|&s| area / mean * unit(s / mean)).collect())
}

fn surmise_unit(beta: u32) -> Result<Box<dyn Fn(f64) -> f64>> {
    match beta {
        0 => Ok(Box::new(|s: f64| if s < 0.0 { 0.0 } else { (-s).exp() })),
        1 | 2 | 4 => {
            let (c_norm, c_exp) = surmise_constants(beta);
            Ok(Box::new(move |s: f64| if s < 0.0 { 0.0 } else { c_norm * s.powi(beta as i32) * (-c_exp * s * s).exp() }))
        }
        _ => Err(Error::InvalidArgument(format!("surmise exponent must be 0, 1, 2 or 4, got {beta}"))),
    }
}

/// `(C, c)` for unit area and unit mean, from the Gamma-function moments
/// `∫ s^m e^{-cs²} ds = Γ((m+1)/2) / (2 c^{(m+1)/2})`.
pub fn surmise_constants(beta: u32) -> (f64, f64) {
    let b = beta as f64;
    let g1 = libm::tgamma((b + 1.0) / 2.0);
    let g2 = libm::tgamma((b + 2.0) / 2.0);
    let c = (g2 / g1).powi(2);
    let norm = 2.0 * c.powf((b + 1.0) / 2.0) / g1;
    (norm, c)
}

pub const L1_BINS: usize = 120;
pub const L1_RANGE: f64 = 3.0;

/// L¹ distance between the spacing histogram on `[0, 3]` (120 bins) and a surmise.
pub fn surmise_distance(sample: &SpacingSample, beta: u32, area: f64, mean: f64, drop_zero: bool) -> Result<f64> {
    let h = sample.histogram(L1_BINS, L1_RANGE, drop_zero)?;
    let curve = surmise(beta, &h.centers(), area, mean)?;
    let w = h.width();
    Ok(compensated_sum(h.density.iter().zip(&curve).map(|(a, b)| (a - b).abs() * w)))
}

/// GSE comparison for Kramers-paired spectra: zeros removed, curve with area ½ and mean 2.
pub fn gse_paired_distance(sample: &SpacingSample) -> Result<f64> {
    surmise_distance(sample, 4, 0.5, 2.0, true)
}
