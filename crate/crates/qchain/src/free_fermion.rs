//! Jordan-Wigner fermions: quadratic forms, Bogoliubov modes and the
//! translation-adapted Fermi basis of the transverse-field chain.
//!
//! `a_j = Z_1…Z_{j-1} (X_j + iY_j)/2`, so `a_j` lowers `|1⟩` to `|0⟩` and the
//! vacuum is `|0…0⟩`. Majoranas are `c_{2j-1} = a_j + a_j†` and
//! `c_{2j} = -i(a_j − a_j†)`, i.e. the Jordan-Wigner strings of `X_j` and `Y_j`.
//! A quadratic Hamiltonian is stored as `(a†, a) M (a; a†) + offset`.

use std::collections::HashMap;
use std::f64::consts::PI;

use ndarray::{s, Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::ensembles::SampledHamiltonian;
use crate::entanglement::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{check_dense, i_pow, PauliString};
use crate::spectra::Spectrum;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

pub const MAX_RECONSTRUCT: usize = 26;

/// Dense `(a_j, a_j†)` for `j = 1..=n`.
pub fn jw_dense_operators(n: usize) -> Result<Vec<(Array2<C64>, Array2<C64>)>> {
    check_dense(n)?;
    (1..=n)
        .map(|j| {
            let x = majorana(2 * j - 1, n).to_dense()?;
            let y = majorana(2 * j, n).to_dense()?;
            let a = (&x + &y.mapv(|z| z * I)).mapv(|z| z * 0.5);
            let ad = linalg::adjoint(&a);
            Ok((a, ad))
        })
        .collect()
}

/// Majorana `c_p`, `p = 1..=2n`, as a Pauli string.
pub fn majorana(p: usize, n: usize) -> PauliString {
    let j = p.div_ceil(2);
    let mut labels = vec![0u8; n];
    for l in labels.iter_mut().take(j - 1) {
        *l = 3;
    }
    labels[j - 1] = if p % 2 == 1 { 1 } else { 2 };
    PauliString::from_labels(&labels).expect("valid labels")
}

/// `(x, z) ↦ (p, q, κ)` with `P = κ c_p c_q` for every Majorana bilinear, `p < q`.
fn bilinear_table(n: usize) -> HashMap<(u64, u64), (usize, usize, C64)> {
    let cs: Vec<PauliString> = (1..=2 * n).map(|p| majorana(p, n)).collect();
    let mut table = HashMap::new();
    for p in 0..2 * n {
        for q in p + 1..2 * n {
            let prod = cs[p].mul(&cs[q]).expect("same n");
            let kappa = i_pow((4 - prod.phase() as u32) % 4);
            table.insert((prod.x_mask(), prod.z_mask()), (p, q, kappa));
        }
    }
    table
}

fn parity_string(n: usize) -> PauliString {
    PauliString::from_labels(&vec![3u8; n]).expect("valid labels")
}

#[derive(Clone, Debug)]
pub struct QuadraticForm {
    pub n: usize,
    /// Hermitian `2n × 2n` matrix `M` with `H = (a†, a) M (a; a†) + offset`.
    pub matrix: Array2<C64>,
    pub offset: f64,
}

impl QuadraticForm {
    /// Particle-conserving block (upper left).
    pub fn hopping(&self) -> Array2<C64> {
        self.matrix.slice(s![..self.n, ..self.n]).to_owned()
    }

    /// Pairing block (lower left), antisymmetric.
    pub fn pairing(&self) -> Array2<C64> {
        self.matrix.slice(s![self.n.., ..self.n]).to_owned()
    }

    pub fn check(&self) -> Result<()> {
        let d = linalg::hermiticity_defect(&self.matrix);
        if d > 1e-10 {
            return Err(Error::NotHermitian(d));
        }
        let b = self.pairing();
        let asym = linalg::max_abs(&(&b + &b.t()));
        if asym > 1e-10 {
            return Err(Error::Invariant(format!("pairing block not antisymmetric ({asym:.3e})")));
        }
        Ok(())
    }
}

/// Quadratic form of a Hamiltonian made of Majorana bilinears. Terms that are
/// bilinears only after multiplying by the parity `Π Z_j` (the ring-closing
/// bond) need `parity = Some(±1)` and are projected onto that sector.
pub fn assemble_quadratic_form(h: &SampledHamiltonian, parity: Option<i8>) -> Result<QuadraticForm> {
    let n = h.n;
    if let Some(s) = parity {
        if s != 1 && s != -1 {
            return Err(Error::InvalidArgument(format!("parity must be ±1, got {s}")));
        }
    }
    let table = bilinear_table(n);
    let eta = parity_string(n);
    // H = (i/4) Σ A_pq c_p c_q with A real antisymmetric
    let mut a = Array2::<f64>::zeros((2 * n, 2 * n));
    let mut offset = 0.0;
    for t in &h.terms {
        if t.coeff == 0.0 {
            continue;
        }
        if t.string.is_identity_word() {
            offset += t.coeff;
            continue;
        }
        let key = (t.string.x_mask(), t.string.z_mask());
        let (p, q, kappa, extra) = if let Some(&(p, q, k)) = table.get(&key) {
            (p, q, k, ONE)
        } else {
            let shifted = t.string.mul(&eta)?;
            let found = table.get(&(shifted.x_mask(), shifted.z_mask()));
            match (found, parity) {
                (Some(&(p, q, k)), Some(s)) => (p, q, k, i_pow(shifted.phase() as u32) * s as f64),
                (Some(_), None) => {
                    return Err(Error::Unsupported(format!("term {} needs a parity sector", t.string)))
                }
                (None, _) => return Err(Error::Unsupported(format!("term {} is not quadratic in fermions", t.string))),
            }
        };
        let v = C64::new(0.0, -2.0) * t.coeff * kappa * extra;
        if v.im.abs() > 1e-12 * v.norm().max(1.0) {
            return Err(Error::Invariant(format!("complex Majorana coefficient for {}", t.string)));
        }
        a[[p, q]] += v.re;
        a[[q, p]] -= v.re;
    }
    // c = Ω (a; a†)
    let mut omega = Array2::<C64>::zeros((2 * n, 2 * n));
    for j in 0..n {
        omega[[2 * j, j]] = ONE;
        omega[[2 * j, n + j]] = ONE;
        omega[[2 * j + 1, j]] = -I;
        omega[[2 * j + 1, n + j]] = I;
    }
    let a_c = a.mapv(|x| C64::new(0.0, 0.25 * x));
    let matrix = linalg::adjoint(&omega).dot(&a_c).dot(&omega);
    let form = QuadraticForm { n, matrix, offset };
    form.check()?;
    Ok(form)
}

#[derive(Clone, Debug)]
pub struct BogoliubovModes {
    pub n: usize,
    /// `μ_1..μ_n` (descending) then `μ_{n+j} = −μ_j`.
    pub mu: Vec<f64>,
    /// `[[U, V], [conj V, conj U]]`, `(a; a†) = T (b; b†)`.
    pub transform: Array2<C64>,
    pub offset: f64,
}

impl BogoliubovModes {
    pub fn u(&self) -> Array2<C64> {
        self.transform.slice(s![..self.n, ..self.n]).to_owned()
    }

    pub fn v(&self) -> Array2<C64> {
        self.transform.slice(s![..self.n, self.n..]).to_owned()
    }

    /// Largest deviations of `UU† + VV† − I` and `UVᵀ + VUᵀ`.
    pub fn structure_defects(&self) -> (f64, f64) {
        let u = self.u();
        let v = self.v();
        let uh = linalg::adjoint(&u);
        let vh = linalg::adjoint(&v);
        let first = u.dot(&uh) + v.dot(&vh) - Array2::<C64>::eye(self.n);
        let second = u.dot(&v.t()) + v.dot(&u.t());
        (linalg::max_abs(&first), linalg::max_abs(&second))
    }

    /// `Π Z_j` eigenvalue of the quasiparticle vacuum.
    pub fn vacuum_parity(&self) -> Result<i8> {
        let d = linalg::det(&self.transform)?;
        if (d.norm() - 1.0).abs() > 1e-6 || d.im.abs() > 1e-6 {
            return Err(Error::Invariant(format!("transform determinant {d} is not ±1")));
        }
        Ok(if d.re > 0.0 { 1 } else { -1 })
    }
}

fn partner(v: &Array1<C64>, n: usize) -> Array1<C64> {
    let mut out = Array1::zeros(2 * n);
    for k in 0..n {
        out[k] = v[n + k].conj();
        out[n + k] = v[k].conj();
    }
    out
}

fn upper_weight_basis(w: &Array2<C64>, n: usize) -> Result<(Vec<f64>, Array2<C64>)> {
    let top = w.slice(s![..n, ..]);
    let g = linalg::adjoint(&top.to_owned()).dot(&top);
    let (gv, y) = linalg::eigh(&g)?;
    Ok((gv, w.dot(&y)))
}

fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormal vectors fixed by `v ↦ J conj(v)` spanning the given space.
fn self_partner_basis(m: &[Array1<C64>], n: usize) -> Result<Vec<Array1<C64>>> {
    let mut out: Vec<Array1<C64>> = Vec::new();
    if m.is_empty() {
        return Ok(out);
    }
    for v in m {
        let c = partner(v, n);
        for cand in [v + &c, (v - &c).mapv(|z| z * I)] {
            let mut r = cand;
            for e in &out {
                let proj = inner(e, &r).re;
                r = &r - &e.mapv(|z| z * proj);
            }
            let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                out.push(r.mapv(|z| z / norm));
            }
            if out.len() == m.len() {
                return Ok(out);
            }
        }
    }
    Err(Error::Invariant("zero-mode space lacks a real basis".into()))
}

/// Rotate so the largest component (first among near-ties) is real and positive.
fn fix_phase(v: &mut Array1<C64>) {
    let big = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if let Some(k) = v.iter().position(|z| z.norm() >= big * (1.0 - 1e-9)) {
        let ph = v[k].conj() / v[k].norm();
        v.mapv_inplace(|z| z * ph);
    }
}

pub fn bogoliubov_diagonalize(form: &QuadraticForm) -> Result<BogoliubovModes> {
    form.check()?;
    let n = form.n;
    let (w, vecs) = linalg::eigh(&form.matrix)?;
    let scale = w.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=w.len() {
        if k == w.len() || w[k] - w[k - 1] > tol {
            clusters.push((start, k));
            start = k;
        }
    }
    let mut first: Vec<(f64, Array1<C64>)> = Vec::new();
    for &(lo, hi) in &clusters {
        let mean = w[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        if mean < -tol {
            continue;
        }
        let block = vecs.slice(s![.., lo..hi]).to_owned();
        let (g, z) = upper_weight_basis(&block, n)?;
        if mean > tol {
            for (k, &gk) in g.iter().enumerate() {
                let col = z.column(k).to_owned();
                if gk >= 0.5 - 1e-12 {
                    first.push((mean, col));
                } else {
                    first.push((-mean, partner(&col, n)));
                }
            }
        } else {
            let mut middle = Vec::new();
            for (k, &gk) in g.iter().enumerate() {
                let col = z.column(k).to_owned();
                if gk > 0.5 + 1e-8 {
                    first.push((0.0, col));
                } else if gk >= 0.5 - 1e-8 {
                    middle.push(col);
                }
            }
            if middle.len() % 2 == 1 {
                return Err(Error::Invariant("odd-dimensional balanced zero-mode space".into()));
            }
            let real = self_partner_basis(&middle, n)?;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for pair in real.chunks(2) {
                first.push((0.0, (&pair[0] + &pair[1].mapv(|z| z * I)).mapv(|z| z * r)));
            }
        }
    }
    if first.len() != n {
        return Err(Error::Invariant(format!("found {} modes for {} sites", first.len(), n)));
    }
    first.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut transform = Array2::<C64>::zeros((2 * n, 2 * n));
    let mut mu = vec![0.0; 2 * n];
    for (j, (m, mut col)) in first.into_iter().enumerate() {
        fix_phase(&mut col);
        let p = partner(&col, n);
        transform.column_mut(j).assign(&col);
        transform.column_mut(n + j).assign(&p);
        mu[j] = m;
        mu[n + j] = -m;
    }
    let modes = BogoliubovModes { n, mu, transform, offset: form.offset };
    let (d1, d2) = modes.structure_defects();
    if d1 > 1e-9 || d2 > 1e-9 {
        return Err(Error::Invariant(format!("Bogoliubov structure defects {d1:.2e}, {d2:.2e}")));
    }
    let diag = linalg::adjoint(&modes.transform).dot(&form.matrix).dot(&modes.transform);
    let mut off = 0.0f64;
    for ((r, c), z) in diag.indexed_iter() {
        let target = if r == c { C64::new(modes.mu[r], 0.0) } else { ZERO };
        off = off.max((z - target).norm());
    }
    if off > 1e-8 * scale {
        return Err(Error::Invariant(format!("transform leaves residual {off:.2e}")));
    }
    Ok(modes)
}

fn check_reconstruct(n: usize) -> Result<()> {
    if n > MAX_RECONSTRUCT {
        return Err(Error::InvalidArgument(format!("2^{n} eigenvalues exceed the {MAX_RECONSTRUCT}-mode limit")));
    }
    Ok(())
}

/// `λ_x = offset + Σ_j μ_j (2x_j − 1)` for occupation words `x` whose
/// quasiparticle number has parity `parity` (all words when `None`).
fn occupation_energies(modes: &BogoliubovModes, parity: Option<bool>) -> Result<Vec<f64>> {
    let n = modes.n;
    check_reconstruct(n)?;
    let mu = &modes.mu[..n];
    let base = modes.offset - mu.iter().sum::<f64>();
    let out: Vec<f64> = (0..1u64 << n)
        .into_par_iter()
        .filter(|x| parity.is_none_or(|odd| (x.count_ones() % 2 == 1) == odd))
        .map(|x| {
            let mut e = base;
            for (j, m) in mu.iter().enumerate() {
                if x >> j & 1 == 1 {
                    e += 2.0 * m;
                }
            }
            e
        })
        .collect();
    Ok(out)
}

pub fn reconstruct_spectrum(modes: &BogoliubovModes) -> Result<Spectrum> {
    Spectrum::new(modes.n, occupation_energies(modes, None)?)
}

/// Energies of the states with `Π Z_j = parity`.
pub fn reconstruct_sector(modes: &BogoliubovModes, parity: i8) -> Result<Vec<f64>> {
    let vac = modes.vacuum_parity()?;
    occupation_energies(modes, Some(vac != parity))
}

/// Full spectrum of a fermion-quadratic chain, splitting into parity sectors
/// when a ring-closing bond is present.
pub fn jw_spectrum(h: &SampledHamiltonian) -> Result<Spectrum> {
    match assemble_quadratic_form(h, None) {
        Ok(form) => reconstruct_spectrum(&bogoliubov_diagonalize(&form)?),
        Err(Error::Unsupported(msg)) if msg.contains("parity sector") => {
            let mut values = Vec::with_capacity(1 << h.n);
            for s in [1i8, -1] {
                let modes = bogoliubov_diagonalize(&assemble_quadratic_form(h, Some(s))?)?;
                values.extend(reconstruct_sector(&modes, s)?);
            }
            if values.len() != 1 << h.n {
                return Err(Error::Invariant(format!("sector merge produced {} values", values.len())));
            }
            Spectrum::new(h.n, values)
        }
        Err(e) => Err(e),
    }
}

pub fn is_odd_prime(n: usize) -> bool {
    n >= 3 && n % 2 == 1 && (3..).step_by(2).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Closed-form spectrum of `Σ (ε X_j Y_{j+1} + Z_j)`; the flag reports whether
/// `n` is an odd prime, where the formula is proven rather than extrapolated.
pub fn xy_plus_z_closed_form(n: usize, eps: f64) -> Result<(Spectrum, bool)> {
    check_reconstruct(n)?;
    let chi: Vec<f64> = (1..=n)
        .map(|j| {
            let m = eps * (2.0 * PI * j as f64 / n as f64).sin();
            m - (m * m + 1.0).sqrt()
        })
        .collect();
    let values = signed_sums(&chi);
    Ok((Spectrum::new(n, values)?, is_odd_prime(n)))
}

/// `Σ_j ε^j (−1)^{x_j}` over all words.
pub fn epsj_z_closed_form(n: usize, eps: f64) -> Result<Spectrum> {
    check_reconstruct(n)?;
    let w: Vec<f64> = (1..=n).map(|j| -eps.powi(j as i32)).collect();
    Spectrum::new(n, signed_sums(&w))
}

/// `Σ_j (2x_j − 1) w_j` for every word `x`.
fn signed_sums(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let base: f64 = -w.iter().sum::<f64>();
    (0..1u64 << n)
        .into_par_iter()
        .map(|x| base + w.iter().enumerate().filter(|(j, _)| x >> j & 1 == 1).map(|(_, v)| 2.0 * v).sum::<f64>())
        .collect()
}

/// `v ← Σ_k coeffs[k] a_{k+1}† v`.
fn create(v: &[C64], coeffs: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; v.len()];
    for (b, &amp) in v.iter().enumerate() {
        if amp == ZERO {
            continue;
        }
        for (k, &c) in coeffs.iter().enumerate() {
            let bit = n - 1 - k;
            if b >> bit & 1 == 1 || c == ZERO {
                continue;
            }
            let sign = if (b >> (bit + 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b | 1 << bit] += c * amp * sign;
        }
    }
    out
}

/// Joint eigenstates of `T` and `Σ Z_j`.
#[derive(Clone, Debug)]
pub struct TranslationBasis {
    pub n: usize,
    /// Occupation words, `x_j` at bit `n − j`.
    pub words: Vec<u64>,
    /// States as columns, in the order of `words`.
    pub states: Array2<C64>,
}

/// Mode `j` (1-based) creation coefficients: `b_j† = Σ_k conj(U_jk) a_k†`,
/// `U_jk = ω^k/√n` with `ω = e^{2πi(j − shift)/n}`.
fn mode_coefficients(n: usize, j: usize, shift: f64) -> Vec<C64> {
    let norm = 1.0 / (n as f64).sqrt();
    (1..=n)
        .map(|k| C64::from_polar(norm, -2.0 * PI * (j as f64 - shift) * k as f64 / n as f64))
        .collect()
}

/// `|x⟩ = (b_1†)^{x_1} … (b_n†)^{x_n} |0⟩`, periodic modes for odd `|x|`,
/// half-shifted modes for even `|x|`.
pub fn translation_eigenbasis_z(n: usize) -> Result<TranslationBasis> {
    check_dense(n)?;
    if n > 12 {
        return Err(Error::DenseBudget { n, max: 12 });
    }
    let dim = 1usize << n;
    let periodic: Vec<Vec<C64>> = (1..=n).map(|j| mode_coefficients(n, j, 0.0)).collect();
    let shifted: Vec<Vec<C64>> = (1..=n).map(|j| mode_coefficients(n, j, 0.5)).collect();
    let words: Vec<u64> = (0..dim as u64).collect();
    let columns: Vec<Vec<C64>> = words
        .par_iter()
        .map(|&x| {
            let modes = if x.count_ones() % 2 == 1 { &periodic } else { &shifted };
            let mut v = vec![ZERO; dim];
            v[0] = ONE;
            for j in (1..=n).rev() {
                if x >> (n - j) & 1 == 1 {
                    v = create(&v, &modes[j - 1], n);
                }
            }
            v
        })
        .collect();
    let mut states = Array2::zeros((dim, dim));
    for (c, col) in columns.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            states[[r, c]] = *z;
        }
    }
    Ok(TranslationBasis { n, words, states })
}

/// Mean purity of the first `l` qubits over the joint eigenbasis.
pub fn translation_basis_purity(n: usize, l: usize) -> Result<f64> {
    if l == 0 || 2 * l >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= l and 2l < n, got l={l}, n={n}")));
    }
    let basis = translation_eigenbasis_z(n)?;
    let p: Vec<f64> = (0..basis.states.ncols())
        .into_par_iter()
        .map(|k| crate::entanglement::partial_trace(basis.states.column(k), l).map(|r: DensityMatrix| r.purity()))
        .collect::<Result<_>>()?;
    Ok(crate::stats::compensated_sum(p) / (1usize << n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{fixed_hamiltonian, sample, EnsembleSpec, Family, FixedKind, Term};
    use crate::entanglement::translation;
    use crate::spectra::spectrum_of;

    fn anti(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        a.dot(b) + b.dot(a)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn canonical_relations() {
        let ops = jw_dense_operators(3).unwrap();
        let id = Array2::<C64>::eye(8);
        for (j, (aj, _)) in ops.iter().enumerate() {
            for (k, (ak, akd)) in ops.iter().enumerate() {
                let want = if j == k { id.clone() } else { Array2::zeros((8, 8)) };
                assert!(linalg::max_abs(&(anti(aj, akd) - want)) < 1e-12);
                assert!(linalg::max_abs(&anti(aj, ak)) < 1e-12);
            }
            assert!(aj.column(0).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn field_only_form() {
        let h = fixed_hamiltonian(FixedKind::ZField, 4).unwrap();
        let form = assemble_quadratic_form(&h, None).unwrap();
        assert!(linalg::max_abs(&form.pairing()) < 1e-15);
        let s = reconstruct_spectrum(&bogoliubov_diagonalize(&form).unwrap()).unwrap();
        assert!(close(&s.values, &spectrum_of(&h).unwrap().values, 1e-12));
    }

    #[test]
    fn diagonal_form_identity_transform() {
        let d = [2.0, 0.5, 0.0, -1.0];
        let n = d.len();
        let mut m = Array2::<C64>::zeros((2 * n, 2 * n));
        for (k, &x) in d.iter().enumerate() {
            m[[k, k]] = C64::new(x, 0.0);
            m[[n + k, n + k]] = C64::new(-x, 0.0);
        }
        let modes = bogoliubov_diagonalize(&QuadraticForm { n, matrix: m, offset: 0.0 }).unwrap();
        assert!(linalg::max_abs(&(&modes.transform - &Array2::<C64>::eye(2 * n))) < 1e-12);
        assert!(close(&modes.mu[..n], &d, 1e-12));
    }

    #[test]
    fn unsorted_diagonal_gives_permutation() {
        let d = [-1.0, 2.0, 0.5];
        let n = d.len();
        let mut m = Array2::<C64>::zeros((2 * n, 2 * n));
        for (k, &x) in d.iter().enumerate() {
            m[[k, k]] = C64::new(x, 0.0);
            m[[n + k, n + k]] = C64::new(-x, 0.0);
        }
        let modes = bogoliubov_diagonalize(&QuadraticForm { n, matrix: m, offset: 0.0 }).unwrap();
        assert!(close(&modes.mu[..n], &[2.0, 0.5, -1.0], 1e-12));
        let order = [1usize, 2, 0];
        for (col, &src) in order.iter().enumerate() {
            for row in 0..2 * n {
                let want = if row == src { 1.0 } else { 0.0 };
                assert!((modes.transform[[row, col]] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_mode() {
        let mut m = Array2::<C64>::zeros((2, 2));
        m[[0, 0]] = ONE;
        m[[1, 1]] = -ONE;
        let modes = bogoliubov_diagonalize(&QuadraticForm { n: 1, matrix: m, offset: 0.0 }).unwrap();
        assert_eq!(reconstruct_spectrum(&modes).unwrap().values, vec![-1.0, 1.0]);
    }

    #[test]
    fn momentum_pair_block() {
        for (eps, mu) in [(1.0, 0.7), (0.3, -0.4)] {
            let em: f64 = eps * mu;
            let mut m = Array2::<C64>::zeros((2, 2));
            m[[0, 0]] = C64::new(em - 1.0, 0.0);
            m[[0, 1]] = C64::new(-em, 0.0);
            m[[1, 0]] = C64::new(-em, 0.0);
            m[[1, 1]] = C64::new(em + 1.0, 0.0);
            let (w, _) = linalg::eigh(&m).unwrap();
            let r = (em * em + 1.0).sqrt();
            assert!(close(&w, &[em - r, em + r], 1e-12));
        }
    }

    #[test]
    fn random_jw_matches_dense() {
        for n in [3, 5, 6] {
            let h = sample(&EnsembleSpec::new(Family::Jw, n, 21), 0).unwrap();
            let form = assemble_quadratic_form(&h, None).unwrap();
            assert!(linalg::hermiticity_defect(&form.matrix) < 1e-12);
            let modes = bogoliubov_diagonalize(&form).unwrap();
            let (d1, d2) = modes.structure_defects();
            assert!(d1 < 1e-9 && d2 < 1e-9);
            let s = reconstruct_spectrum(&modes).unwrap();
            assert!(close(&s.values, &spectrum_of(&h).unwrap().values, 1e-9), "n={n}");
        }
    }

    #[test]
    fn ring_sectors_match_dense() {
        for (n, eps) in [(5, 1.0), (4, 0.6), (6, 1.3)] {
            let h = fixed_hamiltonian(FixedKind::EpsXyPlusZ(eps), n).unwrap();
            assert!(matches!(assemble_quadratic_form(&h, None), Err(Error::Unsupported(_))));
            let s = jw_spectrum(&h).unwrap();
            assert!(close(&s.values, &spectrum_of(&h).unwrap().values, 1e-9), "n={n}");
        }
    }

    #[test]
    fn ring_hopping_is_circulant() {
        let n = 5;
        let h = fixed_hamiltonian(FixedKind::EpsXyPlusZ(1.0), n).unwrap();
        let mut sines: Vec<f64> = (0..n).map(|k| (2.0 * PI * k as f64 / n as f64).sin()).collect();
        sines.sort_by(f64::total_cmp);
        let form = assemble_quadratic_form(&h, Some(-1)).unwrap();
        let hop = form.hopping() + Array2::<C64>::eye(n);
        let (w, _) = linalg::eigh(&hop).unwrap();
        let scale = w[n - 1] / sines[n - 1];
        assert!(scale.abs() > 1e-3);
        assert!(close(&w.iter().map(|x| x / scale).collect::<Vec<_>>(), &sines, 1e-12));
    }

    #[test]
    fn unsupported_term_rejected() {
        let zz = PauliString::from_labels(&[3, 3, 0]).unwrap();
        let h = SampledHamiltonian::from_terms(3, vec![Term { string: zz, coeff: 1.0 }]).unwrap();
        assert!(matches!(assemble_quadratic_form(&h, None), Err(Error::Unsupported(_))));
    }

    #[test]
    fn closed_forms() {
        let (s, prime) = xy_plus_z_closed_form(5, 0.0).unwrap();
        assert!(prime);
        let mut want: Vec<f64> = (0..32u32).map(|x| 5.0 - 2.0 * x.count_ones() as f64).collect();
        want.sort_by(f64::total_cmp);
        assert!(close(&s.values, &want, 1e-12));
        for (n, eps) in [(5, 1.0), (7, 0.3)] {
            let h = fixed_hamiltonian(FixedKind::EpsXyPlusZ(eps), n).unwrap();
            let (s, _) = xy_plus_z_closed_form(n, eps).unwrap();
            assert!(close(&s.values, &spectrum_of(&h).unwrap().values, 1e-8), "n={n}");
        }
        assert!(!xy_plus_z_closed_form(6, 1.0).unwrap().1);
        assert_eq!(epsj_z_closed_form(2, 2.0).unwrap().values, vec![-6.0, -2.0, 2.0, 6.0]);
        assert!(epsj_z_closed_form(4, 0.0).unwrap().values.iter().all(|&x| x == 0.0));
        let h = fixed_hamiltonian(FixedKind::EpsJZ(1.3), 6).unwrap();
        assert!(close(&epsj_z_closed_form(6, 1.3).unwrap().values, &spectrum_of(&h).unwrap().values, 1e-10));
    }

    #[test]
    fn closed_form_simple_at_n7() {
        for eps in [0.2, 0.7, 1.1, 1.5] {
            let (s, _) = xy_plus_z_closed_form(7, eps).unwrap();
            assert!(crate::degeneracy::min_gap(&s) > 1e-10, "eps={eps}");
        }
    }

    #[test]
    fn odd_primes() {
        let p: Vec<usize> = (0..20).filter(|&n| is_odd_prime(n)).collect();
        assert_eq!(p, vec![3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn translation_basis_is_joint_eigenbasis() {
        for n in 3..=6 {
            let b = translation_eigenbasis_z(n).unwrap();
            assert!(crate::entanglement::gram_defect(&b.states) < 1e-9, "n={n}");
            let hz = fixed_hamiltonian(FixedKind::ZField, n).unwrap().to_dense().unwrap();
            let t = translation(n).unwrap();
            for (c, &x) in b.words.iter().enumerate() {
                let v = b.states.column(c).to_owned();
                let e = n as f64 - 2.0 * x.count_ones() as f64;
                let hv = hz.dot(&v);
                assert!(hv.iter().zip(v.iter()).all(|(a, b)| (a - b * e).norm() < 1e-9));
                let tv = Array1::from(t.apply(v.as_slice().unwrap()));
                let k = v.iter().position(|z| z.norm() > 1e-3).unwrap();
                let phase = tv[k] / v[k];
                assert!((phase.norm() - 1.0).abs() < 1e-9);
                assert!(tv.iter().zip(v.iter()).all(|(a, b)| (a - b * phase).norm() < 1e-9));
            }
        }
    }

    #[test]
    fn single_qubit_purity_closed_form() {
        for n in [4, 5, 8] {
            let p = translation_basis_purity(n, 1).unwrap();
            assert!((p - (0.5 + 0.5 / n as f64)).abs() < 1e-9, "n={n}");
        }
    }

    /// Two-site correlators from mode sums, independent of the dense states.
    fn two_site_purity_oracle(n: usize) -> f64 {
        let nf = n as f64;
        let mut total = 0.0;
        for x in 0..1u64 << n {
            let s = x.count_ones() as usize;
            let shift = if s % 2 == 1 { 0.0 } else { 0.5 };
            let occ = |j: usize| ((x >> (n - j)) & 1) as f64;
            let w = |j: usize| C64::from_polar(1.0, 2.0 * PI * (j as f64 - shift) / nf);
            let mut xx = ZERO;
            let mut xy = ZERO;
            let mut yx = ZERO;
            let mut yy = ZERO;
            for j in 1..=n {
                let (o, wj) = (occ(j), w(j));
                xx += -(wj * (1.0 - o) - wj.inv() * o) / nf;
                xy += I * (-wj * (1.0 - o) - wj.inv() * o) / nf;
                yx += I * (wj * (1.0 - o) + wj.inv() * o) / nf;
                yy += (-wj * (1.0 - o) + wj.inv() * o) / nf;
            }
            let mut zz = ZERO;
            for j in 1..=n {
                for k in j + 1..=n {
                    let (wj, wk) = (w(j), w(k));
                    zz += (wj.inv() * wk - 2.0 + wj * wk.inv()) * (1.0 - occ(j)) * (1.0 - occ(k));
                }
            }
            let zz = -4.0 / (nf * nf) * zz.re + 4.0 * s as f64 / nf - 3.0;
            let z1 = 1.0 - 2.0 * s as f64 / nf;
            let sum = 1.0 + 2.0 * z1 * z1 + xx.re.powi(2) + xy.re.powi(2) + yx.re.powi(2) + yy.re.powi(2) + zz * zz;
            total += sum / 4.0;
        }
        total / (1u64 << n) as f64
    }

    #[test]
    fn two_site_purity_matches_mode_sums() {
        for n in [5, 7, 9] {
            let dense = translation_basis_purity(n, 2).unwrap();
            let oracle = two_site_purity_oracle(n);
            assert!((dense - oracle).abs() < 1e-8, "n={n}: {dense} vs {oracle}");
        }
    }

    #[test]
    fn two_site_purity_sequence() {
        let data = [(5, 4.34783), (6, 5.33333), (7, 6.32258), (8, 7.31428)];
        for (n, inv) in data {
            let p = two_site_purity_oracle(n);
            assert!((1.0 / (p - 0.25) - inv).abs() < 1e-4, "n={n}");
        }
    }
}
