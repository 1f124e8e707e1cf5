//! Diagonalisation, spectral histograms, moments and characteristic functions.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::ensembles::{sample, EnsembleSpec, SampledHamiltonian, Term};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::PauliString;
use crate::stats::{compensated_sum, normal_cdf};

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub n: usize,
    pub values: Vec<f64>,
}

impl Spectrum {
    /// Sorts `values`; rejects non-finite entries.
    pub fn new(n: usize, mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite eigenvalue".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Spectrum { n, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub spectrum: Spectrum,
    /// Orthonormal eigenvectors as columns, present when requested.
    pub vectors: Option<Array2<C64>>,
}

fn qubits_of(dim: usize) -> usize {
    dim.trailing_zeros() as usize
}

pub fn diagonalize(h: &Array2<C64>, want_vectors: bool) -> Result<EigenSystem> {
    let n = qubits_of(h.nrows());
    if want_vectors {
        let (w, v) = linalg::eigh(h)?;
        Ok(EigenSystem { spectrum: Spectrum { n, values: w }, vectors: Some(v) })
    } else {
        let w = linalg::eigvalsh(h)?;
        Ok(EigenSystem { spectrum: Spectrum { n, values: w }, vectors: None })
    }
}

pub fn spectrum_of(h: &SampledHamiltonian) -> Result<Spectrum> {
    Ok(diagonalize(&h.to_dense()?, false)?.spectrum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub density: Vec<f64>,
    /// Fraction of pooled values that fell inside `[lo, hi]`.
    pub captured_fraction: f64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.bins()).map(|j| self.lo + (j as f64 + 0.5) * w).collect()
    }

    /// `Σ |density - f(center)|·width`.
    pub fn l1_distance<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let w = self.width();
        compensated_sum(self.centers().iter().zip(&self.density).map(|(&x, &d)| (d - f(x)).abs() * w))
    }
}

/// Bin index of `x` in `[lo, hi]`, the right edge folded into the last bin.
pub fn bin_index(x: f64, lo: f64, hi: f64, bins: usize) -> Option<usize> {
    if !(x >= lo && x <= hi) {
        return None;
    }
    let j = ((x - lo) / (hi - lo) * bins as f64).floor() as usize;
    Some(j.min(bins - 1))
}

/// Pooled normalised histogram of raw values.
pub fn histogram_of_values<'a, I>(values: I, bins: usize, lo: f64, hi: f64, symmetrize: bool) -> Result<Histogram>
where
    I: IntoIterator<Item = &'a f64>,
{
    if bins == 0 || lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidArgument(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
    }
    if symmetrize && (lo + hi).abs() > 1e-12 * hi.abs().max(1.0) {
        return Err(Error::InvalidArgument("symmetrisation needs a range centred on 0".into()));
    }
    let mut counts = vec![0u64; bins];
    let mut total = 0u64;
    for &x in values {
        total += 1;
        if let Some(j) = bin_index(x, lo, hi, bins) {
            counts[j] += 1;
        }
    }
    if total == 0 {
        return Err(Error::InvalidArgument("no values to histogram".into()));
    }
    let captured: u64 = counts.iter().sum();
    let width = (hi - lo) / bins as f64;
    let mut density: Vec<f64> = counts.iter().map(|&c| c as f64 / (total as f64 * width)).collect();
    if symmetrize {
        let mirrored: Vec<f64> = density.iter().rev().copied().collect();
        for (d, m) in density.iter_mut().zip(mirrored) {
            *d = 0.5 * (*d + m);
        }
    }
    Ok(Histogram { lo, hi, density, captured_fraction: captured as f64 / total as f64 })
}

pub fn spectral_histogram(spectra: &[Spectrum], bins: usize, range: (f64, f64), symmetrize: bool) -> Result<Histogram> {
    if spectra.is_empty() {
        return Err(Error::InvalidArgument("no spectra".into()));
    }
    histogram_of_values(spectra.iter().flat_map(|s| s.values.iter()), bins, range.0, range.1, symmetrize)
}

/// `2^-n Tr H^m` as the mean of `λ^m`.
pub fn trace_moment(spectrum: &Spectrum, m: u32) -> f64 {
    compensated_sum(spectrum.values.iter().map(|x| x.powi(m as i32))) / spectrum.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicCurve {
    pub t: Vec<f64>,
    pub values: Vec<C64>,
}

/// Mean of `e^{itλ}` over one spectrum.
pub fn characteristic_value(spectrum: &Spectrum, t: f64) -> C64 {
    let re = compensated_sum(spectrum.values.iter().map(|x| (t * x).cos()));
    let im = compensated_sum(spectrum.values.iter().map(|x| (t * x).sin()));
    C64::new(re, im) / spectrum.len() as f64
}

/// Ensemble-averaged characteristic function.
pub fn characteristic_fn(spectra: &[Spectrum], t_grid: &[f64]) -> Result<CharacteristicCurve> {
    if spectra.is_empty() {
        return Err(Error::InvalidArgument("no spectra".into()));
    }
    let values = t_grid
        .iter()
        .map(|&t| {
            let per: Vec<C64> = spectra.iter().map(|s| characteristic_value(s, t)).collect();
            let re = compensated_sum(per.iter().map(|z| z.re));
            let im = compensated_sum(per.iter().map(|z| z.im));
            C64::new(re, im) / spectra.len() as f64
        })
        .collect();
    Ok(CharacteristicCurve { t: t_grid.to_vec(), values })
}

/// Spectra of samples `0..count`; translation-invariant families go through
/// momentum blocks, which gives the same values at a fraction of the cost.
pub fn ensemble_spectra(spec: &EnsembleSpec, count: usize) -> Result<Vec<Spectrum>> {
    use rayon::prelude::*;
    let invariant = spec.family.translation_invariant(spec.heis_site_dependent);
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let h = sample(spec, i)?;
            if invariant && spec.n > 2 {
                crate::sectors::translation_sector_spectrum(&h)
            } else {
                spectrum_of(&h)
            }
        })
        .collect()
}

/// Per-grid-point standard error of the ensemble characteristic function.
pub fn characteristic_stderr(spectra: &[Spectrum], t_grid: &[f64]) -> Vec<f64> {
    let s = spectra.len() as f64;
    t_grid
        .iter()
        .map(|&t| {
            if spectra.len() < 2 {
                return f64::NAN;
            }
            let per: Vec<C64> = spectra.iter().map(|sp| characteristic_value(sp, t)).collect();
            let mean = per.iter().sum::<C64>() / s;
            let var = per.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (s - 1.0);
            (var / s).sqrt()
        })
        .collect()
}

/// `t²(4√2 + 9)/√n`, the distance allowed between the ensemble characteristic
/// function and `e^{-t²/2}`.
pub fn gaussian_characteristic_bound(t: f64, n: usize) -> f64 {
    t * t * (4.0 * 2f64.sqrt() + 9.0) / (n as f64).sqrt()
}

/// `|F_emp(x⁺) − Φ(x)|` with the right-continuous empirical CDF.
pub fn gaussian_cdf_error(spectrum: &Spectrum, x: f64) -> f64 {
    let below = spectrum.values.partition_point(|&v| v <= x);
    (below as f64 / spectrum.len() as f64 - normal_cdf(x)).abs()
}

/// Rescales to `2^-n Tr H^2 = 1`; returns the scaled Hamiltonian and the factor.
pub fn rescale_unit_variance(h: &SampledHamiltonian) -> Result<(SampledHamiltonian, f64)> {
    let ms = h.mean_square();
    if ms <= 0.0 {
        return Err(Error::InvalidArgument("zero Hamiltonian cannot be rescaled".into()));
    }
    let c = 1.0 / ms.sqrt();
    Ok((h.scaled(c), c))
}

/// Bond index of a nearest-neighbour term: `j` for sites `{j, j+1}`, `n` for `{n, 1}`.
fn bond_index(p: &PauliString) -> Option<usize> {
    let s = p.support();
    let n = p.n();
    match s.as_slice() {
        [a, b] if *b == *a + 1 => Some(*a),
        [1, b] if *b == n => Some(n),
        _ => None,
    }
}

/// A chain cut into blocks of `block_len` qubits plus the link bonds between them.
#[derive(Clone, Debug)]
pub struct BlockSplit {
    /// Each block: first qubit (1-based), qubit count, terms restricted to the block.
    pub blocks: Vec<(usize, usize, Vec<Term>)>,
    pub links: Vec<Term>,
}

/// Bonds `j` with `j ≡ 0 (mod l)` and the ring bond become links; every other
/// bond and all single-site terms stay in the block containing them.
pub fn split_blocks(h: &SampledHamiltonian, block_len: usize) -> Result<BlockSplit> {
    let n = h.n;
    if block_len < 2 || block_len >= n {
        return Err(Error::InvalidArgument(format!("block length {block_len} must satisfy 2 <= l < n = {n}")));
    }
    let count = n.div_ceil(block_len);
    let mut grouped: Vec<Vec<Term>> = vec![Vec::new(); count];
    let mut links = Vec::new();
    for t in &h.terms {
        let owner_site = match t.string.weight() {
            0 => return Err(Error::Unsupported("identity term".into())),
            1 => t.string.support()[0],
            _ => {
                let j = bond_index(&t.string)
                    .ok_or_else(|| Error::Unsupported(format!("{} is not a nearest-neighbour term", t.string)))?;
                if j % block_len == 0 || j == n {
                    links.push(t.clone());
                    continue;
                }
                j
            }
        };
        grouped[(owner_site - 1) / block_len].push(t.clone());
    }
    let mut blocks = Vec::with_capacity(count);
    for (k, terms) in grouped.into_iter().enumerate() {
        let first = k * block_len + 1;
        let len = block_len.min(n - k * block_len);
        let restricted = terms
            .into_iter()
            .map(|t| {
                let mut labels = vec![0u8; len];
                for s in t.string.support() {
                    labels[s - first] = t.string.label(s);
                }
                Term { string: PauliString::from_labels(&labels).expect("block labels"), coeff: t.coeff }
            })
            .collect();
        blocks.push((first, len, restricted));
    }
    Ok(BlockSplit { blocks, links })
}

/// Characteristic function of the block-diagonal part and the bound
/// `|t|·sqrt(Σ link coefficient²)` on its distance to the full one.
pub fn block_split_characteristic(
    h: &SampledHamiltonian,
    block_len: usize,
    t_grid: &[f64],
) -> Result<(CharacteristicCurve, Vec<f64>)> {
    let split = split_blocks(h, block_len)?;
    let mut block_spectra = Vec::with_capacity(split.blocks.len());
    for (_, len, terms) in &split.blocks {
        let bh = SampledHamiltonian::from_terms(*len, terms.clone())?;
        block_spectra.push(spectrum_of(&bh)?);
    }
    let values = t_grid
        .iter()
        .map(|&t| block_spectra.iter().map(|s| characteristic_value(s, t)).product())
        .collect();
    let link_norm = compensated_sum(split.links.iter().map(|l| l.coeff * l.coeff)).sqrt();
    let bound = t_grid.iter().map(|t| t.abs() * link_norm).collect();
    Ok((CharacteristicCurve { t: t_grid.to_vec(), values }, bound))
}

/// Finite-`N` GUE one-point density, rescaled to unit variance.
pub fn gue_reference_density(dim: usize, grid: &[f64]) -> Result<Vec<f64>> {
    if dim == 0 || dim > 64 {
        return Err(Error::InvalidArgument(format!("GUE reference supports 1 <= N <= 64, got {dim}")));
    }
    let scale = (dim as f64).sqrt();
    Ok(grid
        .iter()
        .map(|&y| {
            let x = y * scale;
            // orthonormal Hermite functions for the weight e^{-x²/2}
            let mut prev = 0.0;
            let mut cur = (-x * x / 4.0).exp() / (2.0 * std::f64::consts::PI).powf(0.25);
            let mut acc = cur * cur;
            for k in 1..dim {
                let next = (x * cur - ((k - 1) as f64).sqrt() * prev) / (k as f64).sqrt();
                prev = cur;
                cur = next;
                acc += cur * cur;
            }
            acc / dim as f64 * scale
        })
        .collect())
}

/// Unit-variance semicircle.
pub fn semicircle_density(grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&y| if y.abs() < 2.0 { (4.0 - y * y).sqrt() / (2.0 * std::f64::consts::PI) } else { 0.0 })
        .collect()
}
