//! Degeneracy detection and the Kramers pairing forced by `S = Y⊗…⊗Y`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{sample, EnsembleSpec, Family, SampledHamiltonian};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::spectra::{diagonalize, Spectrum};

pub const DEFAULT_THRESHOLD: f64 = 1e-10;

/// Smallest consecutive difference; infinite for fewer than two values.
pub fn min_gap(spectrum: &Spectrum) -> f64 {
    spectrum.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

pub fn is_simple(spectrum: &Spectrum, threshold: f64) -> bool {
    min_gap(spectrum) > threshold
}

#[derive(Clone, Debug, Serialize)]
pub struct KramersReport {
    pub n: usize,
    /// Largest gap inside a greedy adjacent pair.
    pub max_pair_gap: f64,
    /// Smallest gap between consecutive pairs.
    pub min_between_pairs: f64,
    pub paired: bool,
    /// `max |S H − conj(H) S|`.
    pub symmetry_residual: f64,
}

/// `max |S H − conj(H) S|` for `S = Y^{⊗n}`, which maps `|b⟩` to a multiple of `|¬b⟩`.
pub fn antiunitary_residual(h: &Array2<C64>, n: usize) -> Result<f64> {
    let dim = 1usize << n;
    if h.dim() != (dim, dim) {
        return Err(Error::SizeMismatch(dim, h.nrows()));
    }
    let s = PauliString::from_labels(&vec![2u8; n])?;
    let c: Vec<C64> = (0..dim as u64).map(|b| s.amplitude(b)).collect();
    let flip = dim - 1;
    let mut worst = 0.0f64;
    for r in 0..dim {
        for j in 0..dim {
            // (S H)_{r j} = c_{¬r} H_{¬r j};  (H̄ S)_{r j} = conj(H_{r ¬j}) c_j
            let lhs = c[r ^ flip] * h[[r ^ flip, j]];
            let rhs = h[[r, j ^ flip]].conj() * c[j];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

pub fn kramers_check(h: &SampledHamiltonian, tol: f64) -> Result<KramersReport> {
    let n = h.n;
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("Kramers pairing needs odd n >= 3, got {n}")));
    }
    if h.terms.iter().any(|t| t.coeff != 0.0 && t.string.weight() == 1) {
        return Err(Error::InvalidArgument("Hamiltonian has single-site terms".into()));
    }
    let dense = h.to_dense()?;
    let symmetry_residual = antiunitary_residual(&dense, n)?;
    let spectrum = diagonalize(&dense, false)?.spectrum;
    let v = &spectrum.values;
    let max_pair_gap = v.chunks(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
    let min_between_pairs = v.chunks(2).collect::<Vec<_>>().windows(2).map(|w| w[1][0] - w[0][1]).fold(f64::INFINITY, f64::min);
    Ok(KramersReport { n, max_pair_gap, min_between_pairs, paired: max_pair_gap < tol, symmetry_residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusRow {
    pub family: Family,
    pub n: usize,
    pub samples: usize,
    pub nondegenerate_fraction: f64,
}

pub fn degeneracy_census(spec: &EnsembleSpec, samples: usize, threshold: f64) -> Result<CensusRow> {
    if samples == 0 {
        return Err(Error::InvalidArgument("census needs at least one sample".into()));
    }
    let simple: Vec<bool> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let h = sample(spec, i)?;
            let s = crate::spectra::spectrum_of(&h)?;
            Ok(is_simple(&s, threshold))
        })
        .collect::<Result<_>>()?;
    let good = simple.iter().filter(|&&b| b).count();
    Ok(CensusRow { family: spec.family, n: spec.n, samples, nondegenerate_fraction: good as f64 / samples as f64 })
}
