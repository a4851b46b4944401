//! Small numerical building blocks shared by every module: compensated
//! summation, Gauss–Legendre rules, adaptive 1-D quadrature, polynomial
//! extrapolation and log-log slope fits.

use num_complex::Complex64 as C64;
use std::ops::AddAssign;

/// Neumaier (improved Kahan–Babuška) compensated accumulator.
///
/// The running compensation keeps the rounding error independent of the
/// number of terms, which matters for kernel sums whose terms span many
/// orders of magnitude.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated accumulator for complex values (independent real/imag parts).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

impl AddAssign<C64> for ComplexSum {
    fn add_assign(&mut self, z: C64) {
        self.add(z);
    }
}

/// Compensated sum of a slice.
pub fn sum_compensated(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<NeumaierSum>().value()
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| half * v).collect(),
    )
}

/// Globally adaptive Gauss–Legendre quadrature of a real function.
///
/// Each panel is compared against its two halves; the panel with the
/// largest discrepancy is bisected until the summed estimate drops below
/// `tol` (absolute) or `max_panels` is reached. Returns (value, error).
pub fn adaptive_integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> (f64, f64) {
    const ORDER: usize = 10;
    let (gx, gw) = gauss_legendre(ORDER);
    let rule = |lo: f64, hi: f64| -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut s = NeumaierSum::new();
        for (x, w) in gx.iter().zip(&gw) {
            s.add(w * f(mid + half * x));
        }
        half * s.value()
    };
    struct Panel {
        lo: f64,
        hi: f64,
        val: f64,
        err: f64,
    }
    let assess = |lo: f64, hi: f64| -> Panel {
        let whole = rule(lo, hi);
        let mid = 0.5 * (lo + hi);
        let halves = rule(lo, mid) + rule(mid, hi);
        Panel {
            lo,
            hi,
            val: halves,
            err: (whole - halves).abs(),
        }
    };
    let mut panels = vec![assess(a, b)];
    loop {
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if err <= tol || panels.len() >= max_panels {
            let val = panels
                .iter()
                .map(|p| p.val)
                .collect::<NeumaierSum>()
                .value();
            return (val, err);
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty panel list");
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.lo + p.hi);
        panels.push(assess(p.lo, mid));
        panels.push(assess(mid, p.hi));
    }
}

/// Neville extrapolation of samples `(t_i, y_i)` to `t = 0`.
///
/// Returns the value of the highest-order interpolant at zero and the
/// difference to the next-lower order as an error estimate.
pub fn neville_to_zero(t: &[f64], y: &[C64]) -> (C64, f64) {
    assert_eq!(t.len(), y.len());
    assert!(!t.is_empty());
    let n = t.len();
    if n == 1 {
        return (y[0], f64::INFINITY);
    }
    let mut p: Vec<C64> = y.to_vec();
    let mut prev_top = p[n - 1];
    let mut top = p[n - 1];
    for level in 1..n {
        for i in (level..n).rev() {
            let ti = t[i];
            let tj = t[i - level];
            p[i] = (p[i] * (-tj) - p[i - 1] * (-ti)) / (ti - tj);
        }
        prev_top = top;
        top = p[n - 1];
    }
    (top, (top - prev_top).norm())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Natural logarithm of m! via a cached table (exact summation of logs).
pub fn ln_factorial(m: usize) -> f64 {
    (2..=m)
        .map(|j| (j as f64).ln())
        .collect::<NeumaierSum>()
        .value()
}

/// Table of ln(j!) for j = 0..=m.
pub fn ln_factorial_table(m: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(m + 1);
    let mut s = NeumaierSum::new();
    t.push(0.0);
    for j in 1..=m {
        s.add((j as f64).ln());
        t.push(s.value());
    }
    t
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<NeumaierSum>().value() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<NeumaierSum>()
        .value()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 17, 64, 200] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n).min(60) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn neumaier_beats_naive_on_cancellation() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum_compensated(&xs), 2.0);
    }

    #[test]
    fn adaptive_handles_endpoint_layer() {
        let d = 1e-6;
        let (v, e) = adaptive_integrate(|u| u / (u + d), 0.0, 1.0, 1e-12, 4000);
        let exact = 1.0 - d * ((1.0 + d) / d).ln();
        assert!((v - exact).abs() < 1e-11, "{v} {exact} {e}");
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        let t = [0.1, 0.05, 0.025, 0.0125];
        let y: Vec<C64> = t
            .iter()
            .map(|t| C64::new(3.0 + 2.0 * t - t * t * t, 0.0))
            .collect();
        let (v, _) = neville_to_zero(&t, &y);
        assert!((v.re - 3.0).abs() < 1e-12);
    }
}
