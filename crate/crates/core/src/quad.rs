//! Numerical integration: globally adaptive Gauss–Kronrod (10/21 point) on
//! finite and semi-infinite ranges, and generalized Gauss–Laguerre rules.

use libm::lgamma as ln_gamma;

use crate::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Requested accuracy: stop once `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, max_intervals: 4000 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-12, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv = [(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[j] = (f1, f2);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let res_asc = res_asc * half.abs();
    let value = res_k * half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let res_abs = res_abs * half.abs();
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, err }
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("finite limits required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0, evaluations: 0 });
    }
    let mut segs = vec![kronrod(&mut f, a, b)];
    let mut evaluations = 21;
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        if !value.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureFailure { estimate: value, error: err });
        }
        if err <= tol.target(value) {
            return Ok(QuadResult { value, abs_err: err, evaluations });
        }
        if segs.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailure { estimate: value, error: err });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.err > acc.1 { (i, s.err) } else { acc });
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a.min(s.b) || mid >= s.a.max(s.b) {
            // interval can no longer be split in floating point
            return Err(Error::QuadratureFailure { estimate: value, error: err });
        }
        segs.push(kronrod(&mut f, s.a, mid));
        segs.push(kronrod(&mut f, mid, s.b));
        evaluations += 42;
    }
}

/// Adaptive integral of `f` over `[a, inf)`, via `x = a + (1 - t) / t`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<QuadResult> {
    if !a.is_finite() {
        return Err(Error::Domain(format!("finite lower limit required, got {a}")));
    }
    integrate(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let x = a + (1.0 - t) / t;
            let v = f(x) / (t * t);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Generalized Gauss–Laguerre rule for `int_0^inf x^alpha e^-x f(x) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLaguerre {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Nodes from the eigenvalues of the Jacobi matrix, polished by Newton
    /// iteration on the three-term recurrence; weights from the derivative
    /// formula.
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 || !(alpha > -1.0) {
            return Err(Error::Domain(format!("Gauss-Laguerre needs n >= 1 and alpha > -1 (n = {n}, alpha = {alpha})")));
        }
        let nf = n as f64;
        let mut diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
        let mut off: Vec<f64> = (0..n).map(|i| if i + 1 < n { ((i + 1) as f64 * (i as f64 + 1.0 + alpha)).sqrt() } else { 0.0 }).collect();
        tridiagonal_eigenvalues(&mut diag, &mut off)?;
        diag.sort_by(f64::total_cmp);

        // ln(Gamma(alpha + n) / Gamma(n)) as a product, which is more accurate
        // than differencing two large log-gammas
        let log_norm = ln_gamma(alpha + 1.0) + (1..n).map(|j| ((j as f64 + alpha) / j as f64).ln()).sum::<f64>();
        let laguerre = |z: f64| {
            // returns (L_n(z), L_{n-1}(z), L_n'(z))
            let (mut p1, mut p2) = (1.0f64, 0.0f64);
            for j in 0..n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                // z kept apart so small nodes are not rounded away against 2j + 1
                p1 = ((2.0 * jf + 1.0 + alpha) * p2 - (jf + alpha) * p3 - z * p2) / (jf + 1.0);
            }
            (p1, p2, (nf * p1 - (nf + alpha) * p2) / z)
        };
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (i, &z0) in diag.iter().enumerate() {
            let mut z = z0;
            for _ in 0..8 {
                let (p1, _, pp) = laguerre(z);
                let step = p1 / pp;
                if !step.is_finite() {
                    break;
                }
                z -= step;
                if step.abs() <= 1e-15 * z.abs() {
                    break;
                }
            }
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::Numerical(format!("Gauss-Laguerre node {i} of {n} is invalid")));
            }
            // w = Gamma(n+alpha+1) / (n! z L_n'(z)^2); L_{n-1} is avoided since
            // it is small and cancellation-prone near the first nodes
            let (_, _, pp) = laguerre(z);
            let w = (log_norm + ((nf + alpha) / nf).ln() - z.ln() - 2.0 * pp.abs().ln()).exp();
            nodes.push(z);
            weights.push(w);
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Numerical("Gauss-Laguerre produced a negative or non-finite weight".into()));
        }
        Ok(GaussLaguerre { alpha, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL. `off[i]`
/// couples rows `i` and `i + 1`; both slices are overwritten.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
