//! Reduced states of eigenvectors, purity, and the chain translation.
//!
//! Qubit 1 is the most significant bit of a basis index, so "the first `l`
//! qubits" are the top `l` bits.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::degeneracy::{min_gap, DEFAULT_THRESHOLD};
use crate::ensembles::SampledHamiltonian;
use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::PauliString;
use crate::sectors::rotate;
use crate::spectra::diagonalize;

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub l: usize,
    pub entries: Array2<C64>,
}

impl DensityMatrix {
    /// Squared Frobenius norm, equal to `Tr ρ²` for Hermitian `ρ`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn linear_entropy(&self) -> f64 {
        1.0 - self.purity()
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    /// `max |ρ − I/2^l|`.
    pub fn distance_from_maximally_mixed(&self) -> f64 {
        let d = 1.0 / self.entries.nrows() as f64;
        self.entries
            .indexed_iter()
            .map(|((i, j), z)| (if i == j { *z - d } else { *z }).norm())
            .fold(0.0, f64::max)
    }
}

fn qubits(len: usize) -> Result<usize> {
    if !len.is_power_of_two() || len < 2 {
        return Err(Error::InvalidArgument(format!("state length {len} is not 2^n with n >= 1")));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Reduced state of the first `l` qubits.
pub fn partial_trace(state: ArrayView1<C64>, l: usize) -> Result<DensityMatrix> {
    let n = qubits(state.len())?;
    if l == 0 || l >= n {
        return Err(Error::InvalidArgument(format!("block size {l} must lie in 1..{n}")));
    }
    let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("state has squared norm {norm}")));
    }
    Ok(reduce(state, n, l, 0))
}

/// Reduced state of qubits `first+1 ..= first+l` (cyclically), no input checks.
fn reduce(state: ArrayView1<C64>, n: usize, l: usize, first: usize) -> DensityMatrix {
    let da = 1usize << l;
    let db = 1usize << (n - l);
    // bring the block to the top bits by rotating sites left by `first`
    let index = |a: usize, c: usize| -> usize {
        let w = ((a << (n - l)) | c) as u64;
        let mut w = w;
        for _ in 0..first {
            w = rotate(w, n);
        }
        w as usize
    };
    let mut rho = Array2::<C64>::zeros((da, da));
    for a in 0..da {
        for b in a..da {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..db {
                acc += state[index(a, c)] * state[index(b, c)].conj();
            }
            rho[[a, b]] = acc;
            rho[[b, a]] = acc.conj();
        }
    }
    DensityMatrix { l, entries: rho }
}

/// Reduced state of the contiguous block of `l` qubits starting at site `first + 1`.
pub fn block_state(state: ArrayView1<C64>, l: usize, first: usize) -> Result<DensityMatrix> {
    let n = qubits(state.len())?;
    if l == 0 || l >= n || first >= n {
        return Err(Error::InvalidArgument(format!("block {first}+{l} invalid for {n} qubits")));
    }
    Ok(reduce(state, n, l, first))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    rho.linear_entropy()
}

/// `T|x_1…x_n⟩ = |x_n x_1…x_{n-1}⟩` as an index permutation.
#[derive(Clone, Debug)]
pub struct TranslationOp {
    pub n: usize,
    pub image: Vec<usize>,
}

impl TranslationOp {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=crate::pauli::dense_budget()).contains(&n) {
            return Err(Error::DenseBudget { n, max: crate::pauli::dense_budget() });
        }
        let image = (0..1u64 << n).map(|w| rotate(w, n) as usize).collect();
        Ok(TranslationOp { n, image })
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (i, &x) in v.iter().enumerate() {
            out[self.image[i]] = x;
        }
        out
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let dim = self.image.len();
        let mut m = Array2::zeros((dim, dim));
        for (i, &j) in self.image.iter().enumerate() {
            m[[j, i]] = C64::new(1.0, 0.0);
        }
        m
    }

    /// `T P T†`, i.e. every label moved one site to the right.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        p.translate(1)
    }
}

pub fn translation(n: usize) -> Result<TranslationOp> {
    TranslationOp::new(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleQubitReport {
    pub applicable: bool,
    pub reason: Option<String>,
    pub min_gap: f64,
    /// Largest `max |ρ_{1,k} − I/2|` over eigenvectors.
    pub max_deviation: f64,
    pub passed: bool,
}

fn eigenvectors(h: &SampledHamiltonian) -> Result<(Vec<f64>, Array2<C64>)> {
    let es = diagonalize(&h.to_dense()?, true)?;
    Ok((es.spectrum.values, es.vectors.expect("vectors requested")))
}

pub fn check_single_qubit_theorem(h: &SampledHamiltonian, tol: f64) -> Result<SingleQubitReport> {
    let (values, v) = eigenvectors(h)?;
    let gap = min_gap(&crate::spectra::Spectrum { n: h.n, values });
    let has_local = h.terms.iter().any(|t| t.coeff != 0.0 && t.string.weight() == 1);
    let reason = if has_local {
        Some("Hamiltonian has single-site terms".to_string())
    } else if gap <= DEFAULT_THRESHOLD {
        Some(format!("degenerate spectrum (min gap {gap:.3e})"))
    } else {
        None
    };
    let dev: Vec<f64> = (0..v.ncols())
        .into_par_iter()
        .map(|k| reduce(v.column(k), h.n, 1, 0).distance_from_maximally_mixed())
        .collect();
    let max_deviation = dev.into_iter().fold(0.0, f64::max);
    let applicable = reason.is_none();
    Ok(SingleQubitReport { applicable, reason, min_gap: gap, max_deviation, passed: applicable && max_deviation < tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockPurityReport {
    pub applicable: bool,
    pub reason: Option<String>,
    pub l: usize,
    pub n: usize,
    pub average: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
    pub purities: Vec<f64>,
}

impl BlockPurityReport {
    /// Fraction of eigenstates with purity above `2^-l + eps`.
    pub fn proportion_above(&self, eps: f64) -> f64 {
        let cut = self.lower + eps;
        self.purities.iter().filter(|&&p| p > cut).count() as f64 / self.purities.len() as f64
    }

    /// Markov-type ceiling `2^l / (n ε)` on that fraction.
    pub fn proportion_bound(&self, eps: f64) -> f64 {
        (1usize << self.l) as f64 / (self.n as f64 * eps)
    }
}

/// Per-eigenvector purity of the first `l` qubits.
pub fn eigenstate_purities(v: &Array2<C64>, n: usize, l: usize) -> Vec<f64> {
    (0..v.ncols()).into_par_iter().map(|k| reduce(v.column(k), n, l, 0).purity()).collect()
}

pub fn check_block_purity_bound(h: &SampledHamiltonian, l: usize, tol: f64) -> Result<BlockPurityReport> {
    let n = h.n;
    if l == 0 || 2 * l >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= l and 2l < n, got l={l}, n={n}")));
    }
    let lower = 1.0 / (1usize << l) as f64;
    let upper = lower + (1usize << l) as f64 / n as f64;
    let mut report = BlockPurityReport {
        applicable: false,
        reason: None,
        l,
        n,
        average: f64::NAN,
        lower,
        upper,
        within: false,
        purities: Vec::new(),
    };
    if !h.is_translation_invariant(1e-14) {
        report.reason = Some("Hamiltonian is not translation invariant".into());
        return Ok(report);
    }
    let (values, v) = eigenvectors(h)?;
    let gap = min_gap(&crate::spectra::Spectrum { n, values });
    if gap <= DEFAULT_THRESHOLD {
        report.reason = Some(format!("skipped: degenerate spectrum (min gap {gap:.3e})"));
        return Ok(report);
    }
    report.purities = eigenstate_purities(&v, n, l);
    report.average = crate::stats::compensated_sum(report.purities.iter().copied()) / report.purities.len() as f64;
    report.applicable = true;
    report.within = report.average >= lower - tol && report.average <= upper + tol;
    Ok(report)
}

/// `‖V†V − I‖_max`, for checking a set of states is orthonormal.
pub fn gram_defect(v: &Array2<C64>) -> f64 {
    let g = linalg::adjoint(v).dot(v);
    linalg::max_abs(&(g - Array2::<C64>::eye(v.ncols())))
}
