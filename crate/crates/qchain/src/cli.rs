//! Command-line front end. Every run writes its tables and summaries into the
//! output directory together with a `manifest.json` that can replay it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::degeneracy;
use crate::ensembles::{fixed_hamiltonian, sample, EnsembleSpec, Family, FixedKind};
use crate::entanglement;
use crate::error::{Error, Result};
use crate::free_fermion;
use crate::hciz;
use crate::pauli;
use crate::spectra::{self, Histogram, Spectrum};
use crate::stats::mean_stderr;
use crate::unfolding;

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "QCHAIN_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Parser, Debug, Clone)]
#[command(name = "qchain", version, about = "Spectral statistics of random qubit-chain Hamiltonians")]
pub struct Cli {
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest qubit count for dense matrices.
    #[arg(long, global = true)]
    pub dense_budget: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Falls back to $QCHAIN_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent coefficient per Heisenberg bond.
    #[arg(long)]
    pub heis_site_dependent: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum JwModel {
    XyPlusZ,
    EpsjZ,
    RandomJw,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum HcizCurve {
    OnePoint,
    TwoPoint,
    Normalization,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Pooled spectral histogram and trace moments.
    Spectra {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, default_value_t = 240)]
        bins: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [-3.0, 3.0], allow_hyphen_values = true)]
        range: Vec<f64>,
        #[arg(long)]
        symmetrize: bool,
    },
    /// Ensemble characteristic function against the Gaussian limit.
    Charfn {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, default_value_t = 3.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.1)]
        t_step: f64,
        /// Also compare sample 0 with its block-diagonal part.
        #[arg(long)]
        block_len: Option<usize>,
    },
    /// Unfolded nearest-neighbour spacings and surmise distances.
    Spacings {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long)]
        drop_zero_spacings: bool,
    },
    /// Reduced-state purity of eigenvectors.
    Purity {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long)]
        l: usize,
    },
    /// Free-fermion spectra against dense diagonalisation.
    Jw {
        #[arg(long, value_enum)]
        model: JwModel,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Point at which the Gaussian CDF error is traced over chain lengths.
        #[arg(long, default_value_t = -0.8, allow_hyphen_values = true)]
        x: f64,
    },
    /// Fraction of samples with a simple spectrum.
    Degeneracy {
        #[arg(long)]
        family: Family,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = degeneracy::DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Marginals of the conjectured two-qubit joint density.
    Hciz {
        #[arg(long, value_enum)]
        curve: HcizCurve,
        /// lo,hi,step
        #[arg(long, value_delimiter = ',', default_values_t = [-4.0, 4.0, 0.1], allow_hyphen_values = true)]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 1 << 15)]
        mc_samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Purity of the joint translation / field eigenbasis.
    Tbasis {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
    },
    /// Re-run the invocation recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectra { .. } => "spectra",
            Command::Charfn { .. } => "charfn",
            Command::Spacings { .. } => "spacings",
            Command::Purity { .. } => "purity",
            Command::Jw { .. } => "jw",
            Command::Degeneracy { .. } => "degeneracy",
            Command::Hciz { .. } => "hciz",
            Command::Tbasis { .. } => "tbasis",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, without `--out` and `--threads`.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub passed: bool,
    pub wall_time_seconds: f64,
}

/// What a subcommand produced: files (name, contents) and whether its checks held.
struct Outcome {
    files: Vec<(String, String)>,
    passed: bool,
    seed: Option<u64>,
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.or_else(|| std::env::var(SEED_ENV).ok().and_then(|s| s.parse().ok())).unwrap_or(0)
}

fn spec_of(e: &EnsembleArgs) -> EnsembleSpec {
    EnsembleSpec { family: e.family, n: e.n, seed: resolve_seed(e.seed), heis_site_dependent: e.heis_site_dependent }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("--samples must be positive".into()));
    }
    Ok(())
}

fn needs_dense(n: usize) -> Result<()> {
    pauli::check_dense(n)
}

fn histogram_tsv(h: &Histogram) -> String {
    let mut s = format!("# lo hi bins captured_fraction\n# {} {} {} {}\n", h.lo, h.hi, h.bins(), h.captured_fraction);
    for (c, d) in h.centers().iter().zip(&h.density) {
        let _ = writeln!(s, "{c}\t{d}");
    }
    s
}

fn curve_tsv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = format!("# {header}\n");
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join("\t"));
        s.push('\n');
    }
    s
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || hi < lo {
        return Err(Error::InvalidArgument(format!("bad grid {lo}..{hi} step {step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| lo + k as f64 * step).collect())
}

fn run_spectra(ens: &EnsembleArgs, bins: usize, range: &[f64], symmetrize: bool) -> Result<Outcome> {
    check_samples(ens.samples)?;
    if range.len() != 2 {
        return Err(Error::InvalidArgument("--range takes lo,hi".into()));
    }
    let spec = spec_of(ens);
    if !spec.family.translation_invariant(spec.heis_site_dependent) {
        needs_dense(spec.n)?;
    }
    let spectra = spectra::ensemble_spectra(&spec, ens.samples)?;
    let h = spectra::spectral_histogram(&spectra, bins, (range[0], range[1]), symmetrize)?;
    let moments: Vec<Value> = (1..=6)
        .map(|m| {
            let per: Vec<f64> = spectra.iter().map(|s| spectra::trace_moment(s, m)).collect();
            let (mean, se) = mean_stderr(&per);
            json!({"m": m, "mean": mean, "stderr": se})
        })
        .collect();
    let summary = json!({
        "spec": spec,
        "samples": ens.samples,
        "captured_fraction": h.captured_fraction,
        "moments": moments,
    });
    Ok(Outcome {
        files: vec![("spectra.tsv".into(), histogram_tsv(&h)), ("spectra.json".into(), pretty(&summary))],
        passed: true,
        seed: Some(spec.seed),
    })
}

fn run_charfn(ens: &EnsembleArgs, t_max: f64, t_step: f64, block_len: Option<usize>) -> Result<Outcome> {
    check_samples(ens.samples)?;
    let spec = spec_of(ens);
    let t = grid(0.0, t_max, t_step)?;
    let spectra = spectra::ensemble_spectra(&spec, ens.samples)?;
    let curve = spectra::characteristic_fn(&spectra, &t)?;
    let se = spectra::characteristic_stderr(&spectra, &t);
    let mut passed = true;
    let mut worst_margin = f64::INFINITY;
    let rows: Vec<Vec<f64>> = t
        .iter()
        .zip(&curve.values)
        .zip(&se)
        .map(|((&t, &z), &se)| {
            let gauss = (-t * t / 2.0).exp();
            let diff = (z - C64::new(gauss, 0.0)).norm();
            let bound = spectra::gaussian_characteristic_bound(t, spec.n);
            let allowed = bound + 3.0 * if se.is_finite() { se } else { 0.0 };
            worst_margin = worst_margin.min(allowed - diff);
            passed &= diff <= allowed;
            vec![t, z.re, z.im, diff, bound, se]
        })
        .collect();
    let mut files = vec![("charfn.tsv".into(), curve_tsv("t\tre\tim\tabs_diff_gaussian\tbound\tstderr", rows))];
    let mut summary = json!({"spec": spec, "samples": ens.samples, "bound_holds": passed, "worst_margin": worst_margin});
    if let Some(l) = block_len {
        let h = sample(&spec, 0)?;
        let (phi, bound) = spectra::block_split_characteristic(&h, l, &t)?;
        let psi = spectra::characteristic_fn(&spectra[..1], &t)?;
        let mut split_ok = true;
        let rows: Vec<Vec<f64>> = t
            .iter()
            .enumerate()
            .map(|(k, &tk)| {
                let d = (psi.values[k] - phi.values[k]).norm();
                split_ok &= d <= bound[k] + 1e-12;
                vec![tk, psi.values[k].re, psi.values[k].im, phi.values[k].re, phi.values[k].im, d, bound[k]]
            })
            .collect();
        files.push(("blocksplit.tsv".into(), curve_tsv("t\tpsi_re\tpsi_im\tphi_re\tphi_im\tabs_diff\tbound", rows)));
        summary["block_len"] = json!(l);
        summary["block_bound_holds"] = json!(split_ok);
        passed &= split_ok;
    }
    files.push(("charfn.json".into(), pretty(&summary)));
    Ok(Outcome { files, passed, seed: Some(spec.seed) })
}

fn run_spacings(ens: &EnsembleArgs, drop_zero: bool) -> Result<Outcome> {
    check_samples(ens.samples)?;
    let spec = spec_of(ens);
    if !spec.family.translation_invariant(spec.heis_site_dependent) {
        needs_dense(spec.n)?;
    }
    let spectra = spectra::ensemble_spectra(&spec, ens.samples)?;
    let sample = unfolding::spacings_of(&spectra, 240, (-3.0, 3.0))?;
    let h = sample.histogram(unfolding::L1_BINS, unfolding::L1_RANGE, drop_zero)?;
    let centers = h.centers();
    let curves: Vec<Vec<f64>> = [(0, 1.0, 1.0), (1, 1.0, 1.0), (2, 1.0, 1.0), (4, 1.0, 1.0), (4, 0.5, 2.0)]
        .iter()
        .map(|&(b, a, m)| unfolding::surmise(b, &centers, a, m))
        .collect::<Result<_>>()?;
    let rows = centers.iter().enumerate().map(|(k, &s)| {
        let mut r = vec![s];
        r.extend(curves.iter().map(|c| c[k]));
        r
    });
    let mut l1 = serde_json::Map::new();
    for (name, beta) in [("poisson", 0), ("goe", 1), ("gue", 2), ("gse", 4)] {
        l1.insert(name.into(), json!(unfolding::surmise_distance(&sample, beta, 1.0, 1.0, drop_zero)?));
    }
    l1.insert("gse_paired".into(), json!(unfolding::gse_paired_distance(&sample)?));
    let summary = json!({
        "spec": spec,
        "samples": ens.samples,
        "spacings": sample.spacings.len(),
        "zero_fraction": sample.zero_fraction(),
        "drop_zero_spacings": drop_zero,
        "l1": l1,
    });
    Ok(Outcome {
        files: vec![
            ("spacings.tsv".into(), histogram_tsv(&h)),
            ("surmises.tsv".into(), curve_tsv("s\tpoisson\tgoe\tgue\tgse\tgse_half_area_mean_2", rows)),
            ("spacings.json".into(), pretty(&summary)),
        ],
        passed: true,
        seed: Some(spec.seed),
    })
}

fn run_purity(ens: &EnsembleArgs, l: usize) -> Result<Outcome> {
    check_samples(ens.samples)?;
    let spec = spec_of(ens);
    needs_dense(spec.n)?;
    let invariant = spec.family.translation_invariant(spec.heis_site_dependent);
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut passed = true;
    for i in 0..ens.samples as u64 {
        let h = sample(&spec, i)?;
        let es = spectra::diagonalize(&h.to_dense()?, true)?;
        let v = es.vectors.as_ref().expect("vectors requested");
        let purities = entanglement::eigenstate_purities(v, spec.n, l);
        for (k, (&e, &p)) in es.spectrum.values.iter().zip(&purities).enumerate() {
            rows.push(vec![k as f64, 1.0 - p, i as f64, e]);
        }
        if invariant && 2 * l < spec.n {
            let r = entanglement::check_block_purity_bound(&h, l, 1e-12)?;
            passed &= !r.applicable || r.within;
            reports.push(json!({"sample": i, "block": {
                "applicable": r.applicable, "reason": r.reason, "average": r.average,
                "lower": r.lower, "upper": r.upper, "within": r.within}}));
        } else if l == 1 {
            let r = entanglement::check_single_qubit_theorem(&h, 1e-8)?;
            passed &= !r.applicable || r.passed;
            reports.push(json!({"sample": i, "single_qubit": r}));
        } else {
            let avg = purities.iter().sum::<f64>() / purities.len() as f64;
            reports.push(json!({"sample": i, "average_purity": avg}));
        }
    }
    let summary = json!({"spec": spec, "samples": ens.samples, "l": l, "reports": reports, "passed": passed});
    Ok(Outcome {
        files: vec![
            ("purity.tsv".into(), curve_tsv("k\tlinear_entropy\tsample\teigenvalue", rows)),
            ("purity.json".into(), pretty(&summary)),
        ],
        passed,
        seed: Some(spec.seed),
    })
}

fn max_diff(a: &Spectrum, b: &Spectrum) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn run_jw(model: JwModel, n: usize, eps: f64, seed: Option<u64>, x: f64) -> Result<Outcome> {
    let seed = resolve_seed(seed);
    let (fast, h, note) = match model {
        JwModel::XyPlusZ => {
            let (s, prime) = free_fermion::xy_plus_z_closed_form(n, eps)?;
            let note = (!prime).then(|| format!("n = {n} is not an odd prime; closed form extrapolated"));
            (s, fixed_hamiltonian(FixedKind::EpsXyPlusZ(eps), n)?, note)
        }
        JwModel::EpsjZ => (free_fermion::epsj_z_closed_form(n, eps)?, fixed_hamiltonian(FixedKind::EpsJZ(eps), n)?, None),
        JwModel::RandomJw => {
            let h = sample(&EnsembleSpec::new(Family::Jw, n, seed), 0)?;
            (free_fermion::jw_spectrum(&h)?, h, None)
        }
    };
    let dense = if n <= pauli::dense_budget() { Some(spectra::spectrum_of(&h)?) } else { None };
    let residual = dense.as_ref().map(|d| max_diff(&fast, d));
    let passed = residual.is_none_or(|r| r < 1e-8);
    let rows = fast.values.iter().enumerate().map(|(k, &v)| {
        let mut r = vec![k as f64, v];
        if let Some(d) = &dense {
            r.push(d.values[k]);
        }
        r
    });
    let header = if dense.is_some() { "k\tfree_fermion\tdense" } else { "k\tfree_fermion" };
    let mut files = vec![("jw.tsv".into(), curve_tsv(header, rows))];
    let mut summary = json!({
        "model": format!("{model:?}"), "n": n, "eps": eps, "seed": seed,
        "max_residual": residual, "passed": passed, "note": note,
    });
    if model == JwModel::XyPlusZ {
        let mut trend = Vec::new();
        for m in 3..=n {
            let (s, _) = free_fermion::xy_plus_z_closed_form(m, eps)?;
            let c = 1.0 / (m as f64 * (eps * eps + 1.0)).sqrt();
            let scaled = Spectrum::new(m, s.values.iter().map(|v| v * c).collect())?;
            let e = spectra::gaussian_cdf_error(&scaled, x);
            trend.push(vec![m as f64, e, 1.0 / e]);
        }
        files.push(("jw_trend.tsv".into(), curve_tsv(&format!("n\tE_n({x})\tinverse"), trend)));
        summary["trend_x"] = json!(x);
    }
    files.push(("jw.json".into(), pretty(&summary)));
    Ok(Outcome { files, passed, seed: Some(seed) })
}

fn run_degeneracy(family: Family, ns: &[usize], samples: usize, seed: Option<u64>, threshold: f64) -> Result<Outcome> {
    check_samples(samples)?;
    let seed = resolve_seed(seed);
    let mut rows = String::from("# family\tn\tsamples\tnondegenerate_fraction\n");
    let mut table = Vec::new();
    for &n in ns {
        needs_dense(n)?;
        let r = degeneracy::degeneracy_census(&EnsembleSpec::new(family, n, seed), samples, threshold)?;
        let _ = writeln!(rows, "{}\t{}\t{}\t{}", family, r.n, r.samples, r.nondegenerate_fraction);
        table.push(r);
    }
    let summary = json!({"threshold": threshold, "seed": seed, "rows": table});
    Ok(Outcome {
        files: vec![("degeneracy.tsv".into(), rows), ("degeneracy.json".into(), pretty(&summary))],
        passed: true,
        seed: Some(seed),
    })
}

fn run_hciz(curve: HcizCurve, g: &[f64], mc_samples: usize, seed: Option<u64>) -> Result<Outcome> {
    let seed = resolve_seed(seed);
    if g.len() != 3 {
        return Err(Error::InvalidArgument("--grid takes lo,hi,step".into()));
    }
    let mut files = Vec::new();
    let summary = match curve {
        HcizCurve::OnePoint => {
            let xs = grid(g[0], g[1], g[2])?;
            let ys = hciz::one_point_n2(&xs)?;
            files.push(("hciz_one_point.tsv".into(), curve_tsv("lambda\trho1", xs.iter().zip(&ys).map(|(a, b)| vec![*a, *b]))));
            let at0 = hciz::one_point_value(0.0)?;
            let mut s = json!({"curve": "one-point", "value_at_0": at0});
            if mc_samples > 0 {
                let spectra = hciz::sample_spectra(mc_samples, seed)?;
                let (h, _, cmp) = hciz::one_point_monte_carlo(&spectra, 80, (-4.0, 4.0))?;
                files.push(("hciz_one_point_mc.tsv".into(), histogram_tsv(&h)));
                s["monte_carlo"] = json!(cmp);
            }
            s
        }
        HcizCurve::TwoPoint => {
            let xs = grid(g[0], g[1], g[2])?;
            let ys = hciz::two_point_n2(&xs, 0.0)?;
            files.push(("hciz_two_point.tsv".into(), curve_tsv("lambda\trho2_at_0", xs.iter().zip(&ys).map(|(a, b)| vec![*a, *b]))));
            let small: Vec<Vec<f64>> = (4..=45)
                .map(|x| {
                    let lam = 1.0 / x as f64;
                    hciz::two_point_value(lam, 0.0).map(|v| vec![lam, v / lam])
                })
                .collect::<Result<_>>()?;
            files.push(("hciz_two_point_small.tsv".into(), curve_tsv("lambda\trho2_over_lambda", small)));
            let mut s = json!({
                "curve": "two-point",
                "mass": hciz::two_point_mass(0.0)?,
                "one_point_at_0": hciz::one_point_value(0.0)?,
            });
            if mc_samples > 0 {
                let spectra = hciz::sample_spectra(mc_samples, seed)?;
                let (h, _, cmp) = hciz::two_point_monte_carlo(&spectra, 0.01, 40, (-4.0, 4.0))?;
                files.push(("hciz_two_point_mc.tsv".into(), histogram_tsv(&h)));
                s["monte_carlo"] = json!(cmp);
            }
            s
        }
        HcizCurve::Normalization => json!({
            "curve": "normalization",
            "hyperplane_mass": hciz::normalization()?,
            "prefactor": hciz::prefactor(),
        }),
    };
    files.push(("hciz.json".into(), pretty(&summary)));
    Ok(Outcome { files, passed: true, seed: Some(seed) })
}

fn run_tbasis(n: usize, l: usize) -> Result<Outcome> {
    let avg = free_fermion::translation_basis_purity(n, l)?;
    let lower = 1.0 / (1usize << l) as f64;
    let closed = (l == 1).then(|| 0.5 + 0.5 / n as f64);
    let passed = closed.is_none_or(|c| (c - avg).abs() < 1e-9);
    let summary = json!({
        "n": n, "l": l, "average_purity": avg, "closed_form": closed,
        "inverse_excess": 1.0 / (avg - lower), "passed": passed,
    });
    Ok(Outcome { files: vec![("tbasis.json".into(), pretty(&summary))], passed, seed: None })
}

fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Spectra { ens, bins, range, symmetrize } => run_spectra(ens, *bins, range, *symmetrize),
        Command::Charfn { ens, t_max, t_step, block_len } => run_charfn(ens, *t_max, *t_step, *block_len),
        Command::Spacings { ens, drop_zero_spacings } => run_spacings(ens, *drop_zero_spacings),
        Command::Purity { ens, l } => run_purity(ens, *l),
        Command::Jw { model, n, eps, seed, x } => run_jw(*model, *n, *eps, *seed, *x),
        Command::Degeneracy { family, n, samples, seed, threshold } => run_degeneracy(*family, n, *samples, *seed, *threshold),
        Command::Hciz { curve, grid, mc_samples, seed } => run_hciz(*curve, grid, *mc_samples, *seed),
        Command::Tbasis { n, l } => run_tbasis(*n, *l),
        Command::Replay { .. } => Err(Error::InvalidArgument("nested replay".into())),
    }
}

/// Arguments worth recording: everything except output location and thread count.
fn replayable_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv.iter().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" || a == "--threads" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") || a.starts_with("--threads=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn execute(cli: &Cli, args: Vec<String>) -> Result<bool> {
    if let Some(b) = cli.dense_budget {
        pauli::set_dense_budget(b);
    }
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| dispatch(&cli.command))?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        args,
        seed: outcome.seed,
        outputs: outcome.files.iter().map(|(n, _)| n.clone()).collect(),
        passed: outcome.passed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let mut files = outcome.files;
    files.push(("manifest.json".into(), pretty(&serde_json::to_value(&manifest).expect("serialisable"))));
    write_outputs(&cli.out, &files)?;
    Ok(outcome.passed)
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (cli, args) = match &cli.command {
        Command::Replay { manifest } => match load_manifest(manifest) {
            Ok(m) => {
                let mut full = vec![argv[0].clone()];
                full.extend(m.args.iter().cloned());
                let mut replayed = match Cli::try_parse_from(&full) {
                    Ok(c) => c,
                    Err(e) => {
                        let _ = e.print();
                        return EXIT_USAGE;
                    }
                };
                replayed.out = cli.out.clone();
                replayed.threads = cli.threads;
                (replayed, m.args)
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        },
        _ => {
            let args = replayable_args(&argv);
            (cli, args)
        }
    };
    match execute(&cli, args) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("check failed; see {}", cli.out.display());
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Bad input maps to the usage code; anything that broke during the computation is a failed check.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::DenseBudget { .. }
        | Error::Unsupported(_)
        | Error::SiteOutOfRange { .. }
        | Error::SizeMismatch(..) => EXIT_USAGE,
        _ => EXIT_CHECK_FAILED,
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("bad manifest: {e}")))?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!("manifest schema {} is not {SCHEMA_VERSION}", m.schema_version)));
    }
    Ok(m)
}
