//! Random nearest-neighbour ring Hamiltonians and a few fixed reference chains.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{check_dense, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Generic,
    Uniform,
    Local,
    Inv,
    InvLocal,
    Jw,
    Heis,
}

impl Family {
    pub const ALL: [Family; 7] =
        [Family::Generic, Family::Uniform, Family::Local, Family::Inv, Family::InvLocal, Family::Jw, Family::Heis];

    pub fn name(self) -> &'static str {
        match self {
            Family::Generic => "generic",
            Family::Uniform => "uniform",
            Family::Local => "local",
            Family::Inv => "inv",
            Family::InvLocal => "inv-local",
            Family::Jw => "jw",
            Family::Heis => "heis",
        }
    }

    /// Whether the coefficient law is invariant under cyclic translation.
    pub fn translation_invariant(self, heis_site_dependent: bool) -> bool {
        matches!(self, Family::Inv | Family::InvLocal) || (self == Family::Heis && !heis_site_dependent)
    }

    pub fn has_local_terms(self) -> bool {
        matches!(self, Family::Local | Family::InvLocal | Family::Jw)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == key || (key == "invlocal" && *f == Family::InvLocal))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    /// Heisenberg chain with an independent coefficient per bond instead of one per axis.
    #[serde(default)]
    pub heis_site_dependent: bool,
}

impl EnsembleSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        EnsembleSpec { family, n, seed, heis_site_dependent: false }
    }

    /// Variance of every independent coefficient.
    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        match self.family {
            Family::Generic | Family::Uniform | Family::Inv => 1.0 / (9.0 * n),
            Family::Local | Family::InvLocal => 1.0 / (12.0 * n),
            Family::Jw => 1.0 / (5.0 * n - 4.0),
            Family::Heis => 1.0 / (3.0 * n),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > crate::pauli::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("chain length {} must be in 2..=63", self.n)));
        }
        Ok(())
    }
}

/// Strings sharing one independent random coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct TermGroup {
    pub members: Vec<PauliString>,
}

fn bond(j: usize, a: u8, b: u8, n: usize) -> PauliString {
    if b == 0 {
        PauliString::single_site(j, a, n).expect("site in range")
    } else {
        PauliString::two_site(j, a, j + 1, b, n).expect("sites in range")
    }
}

/// `(a, b)` label pairs placed on bond `j`, in b-major order.
fn bond_labels(family: Family, j: usize, n: usize) -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    match family {
        Family::Generic | Family::Uniform | Family::Inv => {
            for b in 1..=3 {
                for a in 1..=3 {
                    out.push((a, b));
                }
            }
        }
        Family::Local | Family::InvLocal => {
            for b in 0..=3 {
                for a in 1..=3 {
                    out.push((a, b));
                }
            }
        }
        Family::Jw => {
            out.push((3, 0));
            if j < n {
                for b in 1..=2 {
                    for a in 1..=2 {
                        out.push((a, b));
                    }
                }
            }
        }
        Family::Heis => {
            for a in 1..=3 {
                out.push((a, a));
            }
        }
    }
    out
}

/// Independent-coefficient groups in sampling order: site-major, then b, then a.
/// Translation-invariant families return one group per label pair holding its
/// whole orbit around the ring.
pub fn term_list(spec: &EnsembleSpec) -> Result<Vec<TermGroup>> {
    spec.validate()?;
    let n = spec.n;
    if spec.family.translation_invariant(spec.heis_site_dependent) {
        return Ok(bond_labels(spec.family, 1, n)
            .into_iter()
            .map(|(a, b)| TermGroup { members: (1..=n).map(|j| bond(j, a, b, n)).collect() })
            .collect());
    }
    let mut groups = Vec::new();
    for j in 1..=n {
        for (a, b) in bond_labels(spec.family, j, n) {
            groups.push(TermGroup { members: vec![bond(j, a, b, n)] });
        }
    }
    Ok(groups)
}

/// Exact `E[2^-n Tr H^2]`, counting strings that repeat inside a shared orbit.
pub fn expected_mean_square(spec: &EnsembleSpec) -> Result<f64> {
    let var = spec.variance();
    let mut total = 0.0;
    for g in term_list(spec)? {
        let mut mult: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for p in &g.members {
            *mult.entry((p.x_mask(), p.z_mask())).or_default() += 1.0;
        }
        total += var * mult.values().map(|m| m * m).sum::<f64>();
    }
    Ok(total)
}

/// Independent stream for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub string: PauliString,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledHamiltonian {
    pub n: usize,
    pub spec: Option<EnsembleSpec>,
    pub terms: Vec<Term>,
}

impl SampledHamiltonian {
    pub fn from_terms(n: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.string.n() != n {
                return Err(Error::SizeMismatch(n, t.string.n()));
            }
            if t.string.phase() != 0 {
                return Err(Error::InvalidArgument(format!("term {} is not Hermitian", t.string)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
        }
        Ok(SampledHamiltonian { n, spec: None, terms })
    }

    /// Coefficients merged per distinct string, exact zeros dropped.
    pub fn coefficient_map(&self) -> BTreeMap<(u64, u64), f64> {
        let mut map: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for t in &self.terms {
            *map.entry((t.string.x_mask(), t.string.z_mask())).or_default() += t.coeff;
        }
        map.retain(|_, c| *c != 0.0);
        map
    }

    /// `2^-n Tr H^2` from Pauli orthonormality.
    pub fn mean_square(&self) -> f64 {
        self.coefficient_map().values().map(|c| c * c).sum()
    }

    pub fn scaled(&self, factor: f64) -> SampledHamiltonian {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= factor;
        }
        out
    }

    pub fn translated(&self, k: usize) -> SampledHamiltonian {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.string = t.string.translate(k);
        }
        out
    }

    /// True when the merged coefficient map is unchanged by a one-site shift.
    pub fn is_translation_invariant(&self, tol: f64) -> bool {
        let a = self.coefficient_map();
        let b = self.translated(1).coefficient_map();
        let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).copied().collect();
        keys.iter().all(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs() <= tol)
    }

    pub fn to_dense(&self) -> Result<Array2<C64>> {
        check_dense(self.n)?;
        let dim = 1usize << self.n;
        let mut m = Array2::zeros((dim, dim));
        for t in &self.terms {
            if t.coeff != 0.0 {
                t.string.add_to_dense(C64::new(t.coeff, 0.0), &mut m);
            }
        }
        Ok(m)
    }

    /// `H|basis⟩` as (target, amplitude) pairs, one per term.
    pub fn apply_basis(&self, basis: u64, out: &mut Vec<(u64, C64)>) {
        out.clear();
        for t in &self.terms {
            if t.coeff != 0.0 {
                out.push((basis ^ t.string.x_mask(), t.string.amplitude(basis) * t.coeff));
            }
        }
    }
}

/// Draw sample number `index` of the ensemble.
pub fn sample(spec: &EnsembleSpec, index: u64) -> Result<SampledHamiltonian> {
    let groups = term_list(spec)?;
    let mut rng = sample_rng(spec.seed, index);
    let sd = spec.variance().sqrt();
    let half_width = 3f64.sqrt() * sd;
    let mut terms = Vec::with_capacity(groups.iter().map(|g| g.members.len()).sum());
    for g in &groups {
        let c = match spec.family {
            Family::Uniform => rng.gen_range(-half_width..half_width),
            _ => sd * rng.sample::<f64, _>(StandardNormal),
        };
        terms.extend(g.members.iter().map(|&string| Term { string, coeff: c }));
    }
    Ok(SampledHamiltonian { n: spec.n, spec: Some(*spec), terms })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FixedKind {
    /// `Σ_j (ε X_j Y_{j+1} + Z_j)` on the ring.
    EpsXyPlusZ(f64),
    /// `Σ_j ε^j Z_j`.
    EpsJZ(f64),
    /// `Σ_j Z_j`.
    ZField,
}

pub fn fixed_hamiltonian(kind: FixedKind, n: usize) -> Result<SampledHamiltonian> {
    if !(2..=crate::pauli::MAX_QUBITS).contains(&n) {
        return Err(Error::InvalidArgument(format!("chain length {n} must be in 2..=63")));
    }
    let mut terms = Vec::new();
    for j in 1..=n {
        match kind {
            FixedKind::EpsXyPlusZ(eps) => {
                terms.push(Term { string: bond(j, 1, 2, n), coeff: eps });
                terms.push(Term { string: bond(j, 3, 0, n), coeff: 1.0 });
            }
            FixedKind::EpsJZ(eps) => terms.push(Term { string: bond(j, 3, 0, n), coeff: eps.powi(j as i32) }),
            FixedKind::ZField => terms.push(Term { string: bond(j, 3, 0, n), coeff: 1.0 }),
        }
    }
    SampledHamiltonian::from_terms(n, terms)
}
