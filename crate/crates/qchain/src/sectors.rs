//! Spectra of translation-invariant ring Hamiltonians, one momentum block at a time.
//!
//! Basis states are cyclic orbits of computational-basis words; the block for
//! momentum `k` only sees orbits whose period `d` satisfies `k·d ≡ 0 (mod n)`.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::ensembles::SampledHamiltonian;
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectra::Spectrum;

/// `T|x_1…x_n⟩ = |x_n x_1…x_{n-1}⟩`: with qubit 1 as the top bit this is a right rotation.
#[inline]
pub fn rotate(word: u64, n: usize) -> u64 {
    ((word >> 1) | ((word & 1) << (n - 1))) & ((1u64 << n) - 1)
}

#[derive(Clone, Debug)]
struct Orbit {
    rep: u64,
    period: usize,
}

/// Representative (smallest word) and the shift `j` with `T^j rep = word`.
fn canonical(word: u64, n: usize) -> (u64, usize) {
    let mut best = word;
    let mut shift_to_best = 0;
    let mut w = word;
    for m in 1..n {
        w = rotate(w, n);
        if w < best {
            best = w;
            shift_to_best = m;
        }
    }
    // T^{shift_to_best} word = best, so word = T^{n - shift_to_best} best
    (best, (n - shift_to_best) % n)
}

fn orbits(n: usize) -> Vec<Orbit> {
    let mut out = Vec::new();
    for word in 0..(1u64 << n) {
        let (rep, _) = canonical(word, n);
        if rep != word {
            continue;
        }
        let mut period = 1;
        let mut w = rotate(word, n);
        while w != word {
            w = rotate(w, n);
            period += 1;
        }
        out.push(Orbit { rep, period });
    }
    out
}

/// Hermitian block of `H` at momentum `k` over the given orbits.
fn block(h: &SampledHamiltonian, orbs: &[Orbit], k: usize) -> Array2<C64> {
    let n = h.n;
    let members: Vec<usize> = (0..orbs.len()).filter(|&i| (k * orbs[i].period).is_multiple_of(n)).collect();
    let index: HashMap<u64, usize> = members.iter().enumerate().map(|(pos, &i)| (orbs[i].rep, pos)).collect();
    let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
    let dim = members.len();
    let mut m = Array2::zeros((dim, dim));
    let mut out = Vec::new();
    for (col, &i) in members.iter().enumerate() {
        let orb = &orbs[i];
        h.apply_basis(orb.rep, &mut out);
        for &(target, amp) in &out {
            let (rep, shift) = canonical(target, n);
            if let Some(&row) = index.get(&rep) {
                let d_row = orbs[members[row]].period as f64;
                let phase = C64::from_polar(1.0, theta * shift as f64);
                m[[row, col]] += amp * phase * (orb.period as f64 / d_row).sqrt();
            }
        }
    }
    m
}

/// Full spectrum assembled from the `n` momentum blocks.
pub fn translation_sector_spectrum(h: &SampledHamiltonian) -> Result<Spectrum> {
    let n = h.n;
    if n > 24 {
        return Err(Error::InvalidArgument(format!("sector enumeration limited to 24 qubits, got {n}")));
    }
    if !h.is_translation_invariant(1e-14) {
        return Err(Error::InvalidArgument("Hamiltonian is not translation invariant".into()));
    }
    let orbs = orbits(n);
    let mut values = Vec::with_capacity(1 << n);
    for k in 0..n {
        let b = block(h, &orbs, k);
        if b.nrows() > 0 {
            values.extend(linalg::eigvalsh(&b)?);
        }
    }
    Spectrum::new(n, values)
}
