//! Conjectured joint eigenvalue density of the two-qubit generic ensemble and
//! its one- and two-point marginals.
//!
//! The density lives on the hyperplane `λ_1 + λ_2 + λ_3 + λ_4 = 0`; marginals
//! parametrise it by `λ_1, λ_2, λ_3` with `λ_4 = −λ_1 − λ_2 − λ_3`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{sample, EnsembleSpec, Family};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::spectra::{histogram_of_values, spectrum_of, Histogram, Spectrum};

/// Number of Pauli coefficients in the two-qubit generic ensemble.
pub const TERMS: f64 = 9.0;
/// Integration cut-off; the Gaussian factor is below `1e-12` beyond it.
pub const CUTOFF: f64 = 6.0;

/// `C·C₅` for `n = 2`, `m = 9`, with the phase factors `i^{2}/i^{8} = −1` resolved.
pub fn prefactor() -> f64 {
    let n = 2.0f64;
    let m = TERMS;
    let dim = 4.0f64; // 2^n
    let c = -(2f64.powf(n * 16.0 / 2.0) * m.powf(m / 2.0) * (2.0 * PI).powf(m / 2.0))
        / (24.0 * 2f64.powf(n * m) * (2.0 * PI).powf(dim / 2.0) * (2.0 * PI).powf(16.0 / 2.0));
    let c5 = -PI.powi(5) / 16.0;
    c * c5
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `Π_{j<k} (λ_k − λ_j)`.
pub fn vandermonde(l: &[f64; 4]) -> f64 {
    let mut d = 1.0;
    for j in 0..4 {
        for k in j + 1..4 {
            d *= l[k] - l[j];
        }
    }
    d
}

/// The three pair-matching sign products that survive the permutation sum.
pub fn sign_sum(l: &[f64; 4]) -> f64 {
    sgn(l[0] - l[1]) * sgn(l[2] - l[3]) + sgn(l[0] - l[2]) * sgn(l[3] - l[1]) + sgn(l[0] - l[3]) * sgn(l[1] - l[2])
}

/// Full `Σ_{τ ∈ S₄} sgn(τ) sgn(λ_{τ2} − λ_{τ3}) sgn(λ_{τ1} − λ_{τ4})`.
pub fn permutation_sum(l: &[f64; 4]) -> f64 {
    permutations4()
        .iter()
        .map(|(t, s)| *s as f64 * sgn(l[t[1]] - l[t[2]]) * sgn(l[t[0]] - l[t[3]]))
        .sum()
}

/// All permutations of `0..4` with their signs.
pub fn permutations4() -> Vec<([usize; 4], i32)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let t = [a, b, c, d];
                    let mut seen = [false; 4];
                    if t.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                        let mut inv = 0;
                        for i in 0..4 {
                            for j in i + 1..4 {
                                if t[i] > t[j] {
                                    inv += 1;
                                }
                            }
                        }
                        out.push((t, if inv % 2 == 0 { 1 } else { -1 }));
                    }
                }
            }
        }
    }
    out
}

pub type Matching = [(usize, usize); 2];

/// Groups the 24 signed summands by the pair matching they reduce to.
/// Returns `(matching, count, net sign)` where the matching is written as
/// `[(p, q), (r, s)]` in the orientation of the group representative.
pub fn summand_groups() -> Vec<(Matching, usize, i32)> {
    let reps: [Matching; 3] = [[(0, 1), (2, 3)], [(0, 2), (3, 1)], [(0, 3), (1, 2)]];
    let mut groups: Vec<(Matching, usize, i32)> = reps.iter().map(|r| (*r, 0, 0)).collect();
    for (t, s) in permutations4() {
        let pairs = [(t[1], t[2]), (t[0], t[3])];
        for g in groups.iter_mut() {
            let orient = |p: (usize, usize)| -> Option<i32> {
                g.0.iter().find_map(|&q| {
                    if q == p {
                        Some(1)
                    } else if (q.1, q.0) == p {
                        Some(-1)
                    } else {
                        None
                    }
                })
            };
            if let (Some(a), Some(b)) = (orient(pairs[0]), orient(pairs[1])) {
                g.1 += 1;
                g.2 += s * a * b;
            }
        }
    }
    groups
}

/// Density at a point of the hyperplane.
pub fn joint_density_n2(l: &[f64; 4]) -> Result<f64> {
    let sum: f64 = l.iter().sum();
    let scale = l.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if sum.abs() > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!("eigenvalues sum to {sum:e}, not 0")));
    }
    Ok(density_unchecked(l))
}

#[inline]
fn density_unchecked(l: &[f64; 4]) -> f64 {
    let sq: f64 = l.iter().map(|x| x * x).sum();
    let k = prefactor();
    k * (-TERMS * sq / 8.0).exp() * vandermonde(l) * 8.0 * sign_sum(l)
}

fn inner_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-11, rel_tol: 1e-10, max_intervals: 400 }
}

fn outer_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-9, rel_tol: 1e-9, max_intervals: 400 }
}

/// `∫ ρ(λ, b, c, −λ−b−c) dc`.
fn one_point_inner(lam: f64, b: f64) -> Result<f64> {
    let cuts = [lam, b, -(lam + b) / 2.0, -2.0 * lam - b, -lam - 2.0 * b];
    let f = |c: f64| density_unchecked(&[lam, b, c, -lam - b - c]);
    Ok(integrate(f, -CUTOFF, CUTOFF, &cuts, inner_opts())?.value)
}

/// `ρ₁(λ) = ∫∫ ρ(λ, b, c, −λ−b−c) db dc`.
pub fn one_point_value(lam: f64) -> Result<f64> {
    let cuts = [lam, -lam, -3.0 * lam, -lam / 3.0];
    let mut err = None;
    let v = integrate(
        |b| match one_point_inner(lam, b) {
            Ok(x) => x,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        -CUTOFF,
        CUTOFF,
        &cuts,
        outer_opts(),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v.value),
    }
}

pub fn one_point_n2(grid: &[f64]) -> Result<Vec<f64>> {
    grid.par_iter().map(|&x| one_point_value(x)).collect()
}

/// `ρ₂(λ, μ) = ∫ ρ(λ, μ, c, −λ−μ−c) dc`.
pub fn two_point_value(lam: f64, pinned: f64) -> Result<f64> {
    let s = lam + pinned;
    let cuts = [lam, pinned, -s / 2.0, -s - lam, -s - pinned];
    let f = |c: f64| density_unchecked(&[lam, pinned, c, -s - c]);
    Ok(integrate(f, -CUTOFF, CUTOFF, &cuts, inner_opts())?.value)
}

pub fn two_point_n2(grid: &[f64], pinned: f64) -> Result<Vec<f64>> {
    grid.par_iter().map(|&x| two_point_value(x, pinned)).collect()
}

/// Total mass of the density over the hyperplane.
pub fn normalization() -> Result<f64> {
    let mut err = None;
    let v = integrate(
        |x| match one_point_value(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        -CUTOFF,
        CUTOFF,
        &[0.0],
        QuadOptions { abs_tol: 1e-7, rel_tol: 1e-7, max_intervals: 200 },
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v.value),
    }
}

/// `∫ ρ₂(λ, pinned) dλ`.
pub fn two_point_mass(pinned: f64) -> Result<f64> {
    let mut err = None;
    let cuts = [pinned, -pinned, -3.0 * pinned, -pinned / 3.0];
    let v = integrate(
        |x| match two_point_value(x, pinned) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        -CUTOFF,
        CUTOFF,
        &cuts,
        outer_opts(),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v.value),
    }
}

/// Spectra of the two-qubit generic ensemble.
pub fn sample_spectra(samples: usize, seed: u64) -> Result<Vec<Spectrum>> {
    let spec = EnsembleSpec::new(Family::Generic, 2, seed);
    (0..samples as u64).into_par_iter().map(|i| spectrum_of(&sample(&spec, i)?)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloComparison {
    pub samples: usize,
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
    pub l1_distance: f64,
    /// Values entering the histogram (conditioned pairs for the two-point case).
    pub pooled: usize,
}

/// Pooled eigenvalue histogram against the one-point curve at bin centres.
pub fn one_point_monte_carlo(spectra: &[Spectrum], bins: usize, range: (f64, f64)) -> Result<(Histogram, Vec<f64>, MonteCarloComparison)> {
    let h = histogram_of_values(spectra.iter().flat_map(|s| s.values.iter()), bins, range.0, range.1, false)?;
    let curve = one_point_n2(&h.centers())?;
    let l1: f64 = h.density.iter().zip(&curve).map(|(a, b)| (a - b).abs()).sum::<f64>() * h.width();
    let pooled = spectra.iter().map(|s| s.len()).sum();
    let cmp = MonteCarloComparison { samples: spectra.len(), bins, lo: range.0, hi: range.1, l1_distance: l1, pooled };
    Ok((h, curve, cmp))
}

/// For each eigenvalue within `window` of zero, pool the other three; compare
/// the unit-mass histogram with `ρ₂(λ, 0)/ρ₁(0)`.
pub fn two_point_monte_carlo(spectra: &[Spectrum], window: f64, bins: usize, range: (f64, f64)) -> Result<(Histogram, Vec<f64>, MonteCarloComparison)> {
    let mut others = Vec::new();
    for s in spectra {
        for (k, &x) in s.values.iter().enumerate() {
            if x.abs() < window {
                others.extend(s.values.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| *v));
            }
        }
    }
    if others.is_empty() {
        return Err(Error::InvalidArgument("no eigenvalue fell inside the conditioning window".into()));
    }
    let h = histogram_of_values(others.iter(), bins, range.0, range.1, false)?;
    let rho0 = one_point_value(0.0)?;
    let curve: Vec<f64> = two_point_n2(&h.centers(), 0.0)?.into_iter().map(|v| v / rho0).collect();
    let l1: f64 = h.density.iter().zip(&curve).map(|(a, b)| (a - b).abs()).sum::<f64>() * h.width();
    let cmp = MonteCarloComparison { samples: spectra.len(), bins, lo: range.0, hi: range.1, l1_distance: l1, pooled: others.len() };
    Ok((h, curve, cmp))
}
