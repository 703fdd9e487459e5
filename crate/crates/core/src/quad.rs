//! Shared numerical kernels: compensated summation, log-sum-exp, adaptive
//! Simpson quadrature (plain and exponent-shifted), Gauss-Legendre rules,
//! isotonic regression and golden-section minimization.

use crate::error::{Error, Result};

/// Neumaier compensated sum over a fixed iteration order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// log(Σ exp(x_i)) guarded against overflow; -inf for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Mean and standard error of a sample (unbiased variance), fixed order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = neumaier_sum(values.iter().cloned()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, (ss / ((n - 1) as f64 * n as f64)).sqrt())
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

struct AdaptiveState {
    evals: usize,
    max_evals: usize,
    deepest: u32,
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    st: &mut AdaptiveState,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    st.evals += 2;
    if st.evals > st.max_evals {
        return Err(Error::numerical(format!(
            "adaptive quadrature did not converge: {} evaluations, deepest level {}, interval [{a}, {b}]",
            st.evals, st.deepest
        )));
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol || depth >= 52 {
        return Ok(left + right + err / 15.0);
    }
    st.deepest = st.deepest.max(depth + 1);
    let l = adaptive_step(f, a, fa, m, fm, lm, flm, left, tol * 0.5, depth + 1, st)?;
    let r = adaptive_step(f, m, fm, b, fb, rm, frm, right, tol * 0.5, depth + 1, st)?;
    Ok(l + r)
}

/// Adaptive Simpson integral of `f` over [a, b] with absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    let mut st = AdaptiveState {
        evals: 3,
        max_evals: 2_000_000,
        deepest: 0,
    };
    adaptive_step(&f, a, fa, b, fb, m, fm, whole, tol.abs(), 0, &mut st)
}

/// Integrate over a list of panel breakpoints, summing per-panel results.
/// Tolerance is split evenly across panels.
pub fn adaptive_simpson_panels<F: Fn(f64) -> f64>(f: F, cuts: &[f64], tol: f64) -> Result<f64> {
    if cuts.len() < 2 {
        return Ok(0.0);
    }
    let per = tol / (cuts.len() - 1) as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive_simpson(&f, w[0], w[1], per)?;
    }
    Ok(total)
}

/// log ∫ exp(ln_f(y)) dy over the panels, robust to exponents far below the
/// f64 underflow threshold: the maximum of `ln_f` on a probe grid shifts the
/// integrand before adaptive integration.
pub fn log_integral_shifted<F: Fn(f64) -> f64>(
    ln_f: F,
    cuts: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    if cuts.len() < 2 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut shift = f64::NEG_INFINITY;
    for w in cuts.windows(2) {
        for i in 0..=24 {
            let y = w[0] + (w[1] - w[0]) * i as f64 / 24.0;
            shift = shift.max(ln_f(y));
        }
    }
    if !shift.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    let span: f64 = cuts
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let g = |y: f64| {
        let v = ln_f(y) - shift;
        if v < -745.0 {
            0.0
        } else {
            v.exp()
        }
    };
    // The shifted integrand is ≤ 1, so span bounds the integral from above.
    let integral = adaptive_simpson_panels(g, cuts, rel_tol * span.max(1.0) * 1e-2)?;
    if integral <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(shift + integral.ln())
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Map a [-1, 1] rule onto [a, b].
pub fn scale_rule(nodes: &[f64], weights: &[f64], a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (
        nodes.iter().map(|&x| c + h * x).collect(),
        weights.iter().map(|&w| w * h).collect(),
    )
}

/// Pool-adjacent-violators isotonic regression (nondecreasing output,
/// uniform weights). Preserves the total mean.
pub fn isotonic_nondecreasing(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut level: Vec<f64> = Vec::with_capacity(n);
    let mut count: Vec<usize> = Vec::with_capacity(n);
    for &v in values {
        level.push(v);
        count.push(1);
        while level.len() > 1 {
            let k = level.len();
            if level[k - 2] <= level[k - 1] {
                break;
            }
            let merged =
                (level[k - 2] * count[k - 2] as f64 + level[k - 1] * count[k - 1] as f64)
                    / (count[k - 2] + count[k - 1]) as f64;
            level[k - 2] = merged;
            count[k - 2] += count[k - 1];
            level.pop();
            count.pop();
        }
    }
    let mut out = Vec::with_capacity(n);
    for (lv, ct) in level.iter().zip(&count) {
        out.extend(std::iter::repeat(*lv).take(*ct));
    }
    out
}

/// Golden-section minimization of a unimodal function on [a, b].
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Expand a grid specification into an explicit vector.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Logarithmically spaced grid between positive endpoints.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0, "logspace endpoints must be positive");
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
