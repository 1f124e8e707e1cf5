//! Pauli strings stored as X/Z bit masks with a phase exponent.
//!
//! Site `j` (1-based) lives on bit `n - j`, so qubit 1 is the most
//! significant bit of a computational-basis index.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 63;

static DENSE_BUDGET: AtomicUsize = AtomicUsize::new(14);

/// Largest qubit count for which full dense matrices may be built.
pub fn dense_budget() -> usize {
    DENSE_BUDGET.load(Ordering::Relaxed)
}

pub fn set_dense_budget(max_qubits: usize) {
    DENSE_BUDGET.store(max_qubits, Ordering::Relaxed);
}

pub fn check_dense(n: usize) -> Result<()> {
    let max = dense_budget();
    if n > max {
        return Err(Error::DenseBudget { n, max });
    }
    Ok(())
}

/// `i^k` for k taken mod 4.
pub fn i_pow(k: u32) -> C64 {
    match k & 3 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `i^phase · σ^(a_1) ⊗ … ⊗ σ^(a_n)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n), "qubit count {n} unsupported");
        PauliString { n, x: 0, z: 0, phase: 0 }
    }

    pub fn from_labels(labels: &[u8]) -> Result<Self> {
        let n = labels.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("qubit count {n} unsupported")));
        }
        let mut p = PauliString::identity(n);
        for (i, &a) in labels.iter().enumerate() {
            p = p.with_label(i + 1, a)?;
        }
        Ok(p)
    }

    pub fn single_site(site: usize, a: u8, n: usize) -> Result<Self> {
        if site == 0 || site > n {
            return Err(Error::SiteOutOfRange { site, n });
        }
        PauliString::identity(n).with_label(site, a)
    }

    /// Two-site string `σ_j^(a) σ_k^(b)`; sites may wrap past `n`.
    pub fn two_site(j: usize, a: u8, k: usize, b: u8, n: usize) -> Result<Self> {
        let wrap = |s: usize| (s - 1) % n + 1;
        if j == 0 || k == 0 {
            return Err(Error::SiteOutOfRange { site: 0, n });
        }
        let (j, k) = (wrap(j), wrap(k));
        if j == k {
            return Err(Error::InvalidArgument(format!("sites coincide at {j}")));
        }
        PauliString::identity(n).with_label(j, a)?.with_label(k, b)
    }

    /// Replace the label at `site` (phase untouched).
    pub fn with_label(mut self, site: usize, a: u8) -> Result<Self> {
        if site == 0 || site > self.n {
            return Err(Error::SiteOutOfRange { site, n: self.n });
        }
        if a > 3 {
            return Err(Error::InvalidArgument(format!("Pauli label {a}")));
        }
        let bit = 1u64 << (self.n - site);
        self.x &= !bit;
        self.z &= !bit;
        if a == 1 || a == 2 {
            self.x |= bit;
        }
        if a == 2 || a == 3 {
            self.z |= bit;
        }
        Ok(self)
    }

    pub fn from_masks(n: usize, x: u64, z: u64, phase: u8) -> Self {
        let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        PauliString { n, x: x & keep, z: z & keep, phase: phase & 3 }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn x_mask(&self) -> u64 {
        self.x
    }
    pub fn z_mask(&self) -> u64 {
        self.z
    }
    /// Exponent `k` of the prefactor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }
    pub fn coefficient(&self) -> C64 {
        i_pow(self.phase as u32)
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    /// Same word with phase +1.
    pub fn unsigned(self) -> Self {
        self.with_phase(0)
    }

    pub fn label(&self, site: usize) -> u8 {
        let bit = 1u64 << (self.n - site);
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => 0,
            (true, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        }
    }

    pub fn labels(&self) -> Vec<u8> {
        (1..=self.n).map(|s| self.label(s)).collect()
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity_word(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Sites carrying a non-identity label, ascending.
    pub fn support(&self) -> Vec<usize> {
        (1..=self.n).filter(|&s| self.label(s) != 0).collect()
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        // op(x,z) = i^{|x∧z|} X^x Z^z, and Z^z X^x' = (-1)^{|z∧x'|} X^x' Z^z
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let k = self.phase as u32
            + other.phase as u32
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4 * 64
            - (x & z).count_ones();
        Ok(PauliString { n: self.n, x, z, phase: (k & 3) as u8 })
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        let s = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(s.is_multiple_of(2))
    }

    /// Cyclic shift of every label by `k` sites (site j → j+k).
    pub fn translate(&self, k: usize) -> PauliString {
        let n = self.n;
        let k = k % n;
        let rot = |m: u64| {
            if k == 0 {
                m
            } else {
                let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
                ((m >> k) | (m << (n - k))) & keep
            }
        };
        PauliString { n, x: rot(self.x), z: rot(self.z), phase: self.phase }
    }

    /// Matrix element structure: `P|b⟩ = amp(b)·|b ⊕ x⟩`.
    #[inline]
    pub fn amplitude(&self, basis: u64) -> C64 {
        let k = self.phase as u32 + (self.x & self.z).count_ones() + 2 * (self.z & basis).count_ones();
        i_pow(k)
    }

    /// `out += coeff · P · v`.
    pub fn apply_add(&self, coeff: C64, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), 1usize << self.n);
        for (b, &vb) in v.iter().enumerate() {
            if vb == C64::new(0.0, 0.0) {
                continue;
            }
            let t = (b as u64 ^ self.x) as usize;
            out[t] += coeff * self.amplitude(b as u64) * vb;
        }
    }

    pub fn to_dense(&self) -> Result<Array2<C64>> {
        check_dense(self.n)?;
        let dim = 1usize << self.n;
        let mut m = Array2::zeros((dim, dim));
        self.add_to_dense(C64::new(1.0, 0.0), &mut m);
        Ok(m)
    }

    /// `m += coeff · P` for a matrix of matching dimension.
    pub fn add_to_dense(&self, coeff: C64, m: &mut Array2<C64>) {
        let dim = 1usize << self.n;
        assert_eq!(m.dim(), (dim, dim));
        for col in 0..dim {
            let row = col ^ self.x as usize;
            m[[row, col]] += coeff * self.amplitude(col as u64);
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        let word: String = self.labels().iter().map(|&a| ['I', 'X', 'Y', 'Z'][a as usize]).collect();
        write!(f, "{sign}{word}")
    }
}

/// All `4^n` phase-free strings in label order.
pub fn all_strings(n: usize) -> Vec<PauliString> {
    let total = 1usize << (2 * n);
    (0..total)
        .map(|mut code| {
            let mut labels = vec![0u8; n];
            for s in (0..n).rev() {
                labels[s] = (code & 3) as u8;
                code >>= 2;
            }
            PauliString::from_labels(&labels).expect("valid labels")
        })
        .collect()
}

/// Number of cyclic nearest-neighbour strings `σ_j^(a) σ_{j+1}^(b)`, `a,b ∈ {1,2,3}`,
/// that anticommute with `p`, which must itself have that form.
pub fn anticommuting_neighbours(p: &PauliString) -> Result<usize> {
    let n = p.n();
    if n < 3 {
        return Err(Error::InvalidArgument("nearest-neighbour count needs n >= 3".into()));
    }
    let sup = p.support();
    let adjacent = sup.len() == 2 && (sup[1] == sup[0] + 1 || (sup[0] == 1 && sup[1] == n));
    if !adjacent || p.phase() != 0 {
        return Err(Error::InvalidArgument(format!("{p} is not a nearest-neighbour two-site string")));
    }
    let mut count = 0;
    for j in 1..=n {
        for a in 1..=3 {
            for b in 1..=3 {
                let q = PauliString::two_site(j, a, j + 1, b, n)?;
                if !p.commutes(&q)? {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// `Tr(A B†) / dim`.
pub fn hs_inner(a: &Array2<C64>, b: &Array2<C64>) -> Result<C64> {
    if a.dim() != b.dim() || a.nrows() != a.ncols() {
        return Err(Error::SizeMismatch(a.nrows(), b.nrows()));
    }
    let dim = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for ((i, j), &aij) in a.indexed_iter() {
        acc += aij * b[[i, j]].conj();
    }
    Ok(acc / dim as f64)
}
