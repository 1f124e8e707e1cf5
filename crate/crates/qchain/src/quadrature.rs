//! Globally adaptive 15-point Gauss-Kronrod integration on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 2000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Piece { a, b, value: kron * h, error: ((kron - gauss) * h).abs() }
}

/// `∫_a^b f`, with the interval first cut at every breakpoint strictly inside it.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breakpoints: &[f64], opts: QuadOptions) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("infinite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    if a > b {
        let e = integrate(f, b, a, breakpoints, opts)?;
        return Ok(Estimate { value: -e.value, error: e.error });
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b && x.is_finite()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (b - a));
    let mut edges = vec![a];
    edges.extend(cuts);
    edges.push(b);
    let mut pieces: Vec<Piece> = edges.windows(2).filter(|w| w[1] > w[0]).map(|w| kronrod(&mut f, w[0], w[1])).collect();
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Estimate { value, error });
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!("no convergence after {} intervals (error {error:.3e})", pieces.len())));
        }
        let (k, worst) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(k, p)| (k, *p))
            .expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature("interval underflow".into()));
        }
        pieces[k] = kronrod(&mut f, worst.a, mid);
        pieces.push(kronrod(&mut f, mid, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x.powi(20) - 3.0 * x, -1.0, 2.0, &[], QuadOptions::default()).unwrap();
        let want = (2f64.powi(21) + 1.0) / 21.0 - 4.5;
        assert!((e.value - want).abs() < 1e-9 * want.abs());
    }

    #[test]
    fn gaussian() {
        let e = integrate(|x| (-x * x / 2.0).exp(), -10.0, 10.0, &[], QuadOptions::default()).unwrap();
        assert!((e.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let f = |x: f64| if x < 0.3 { 1.0 } else { -2.0 };
        let e = integrate(f, 0.0, 1.0, &[0.3], QuadOptions::default()).unwrap();
        assert!((e.value - (0.3 - 1.4)).abs() < 1e-14);
        assert!(e.error < 1e-12);
    }

    #[test]
    fn reversed_and_empty() {
        let e = integrate(|x| x, 1.0, 0.0, &[], QuadOptions::default()).unwrap();
        assert!((e.value + 0.5).abs() < 1e-15);
        assert_eq!(integrate(|x| x, 1.0, 1.0, &[], QuadOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 0.0, max_intervals: 5 };
        assert!(matches!(integrate(|x| x.abs().sqrt().recip(), -1.0, 1.0, &[], opts), Err(Error::Quadrature(_))));
    }
}
