//! Shared numerical services: adaptive Gauss–Kronrod quadrature, high-order
//! finite-difference stencils with Richardson refinement, node counting,
//! Gram-matrix assembly, and uniform grids.
//!
//! Everything here is stateless and deterministic; identical inputs produce
//! bit-identical outputs regardless of call order.

use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// Uniform sampling grid on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    /// Builds a grid; requires `x_max > x_min` (finite) and at least 16
    /// points (the widest stencil consumers use).
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(Error::Config(format!(
                "grid window [{x_min}, {x_max}] is not a finite increasing interval"
            )));
        }
        if n_points < 16 {
            return Err(Error::Config(format!(
                "grid needs at least 16 points, got {n_points}"
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// The strictly increasing sample positions.
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points)
            .map(|i| self.x_min + i as f64 * h)
            .collect()
    }
}

/// Sup-norm residual of some identity, with the scale it should be compared
/// against and the grid it was measured on.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub quantity_name: String,
    pub sup_abs: f64,
    pub rel_to: f64,
    pub grid: Grid,
}

impl ResidualReport {
    /// Residual relative to its scale.
    pub fn relative(&self) -> f64 {
        self.sup_abs / self.rel_to.max(f64::MIN_POSITIVE)
    }
}

// ---------------------------------------------------------------------------
// Adaptive quadrature (Gauss 7 / Kronrod 15)
// ---------------------------------------------------------------------------

/// Kronrod-15 abscissae on [0, 1] (positive half; symmetric rule).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
/// Kronrod-15 weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_91,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss-7 weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss7/Kronrod15 panel on `[a, b]`: returns `(kronrod, |kronrod - gauss|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = WGK[7] * f(c);
    let mut gauss = WG[3] * f(c);
    for j in 0..7 {
        let dx = h * XGK[j];
        let fsum = f(c - dx) + f(c + dx);
        kron += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kron * h, (kron - gauss).abs() * h)
}

struct AdaptState<'f> {
    f: &'f dyn Fn(f64) -> f64,
    tol_per_len: f64,
    /// Segments whose error estimate could not be met at maximum depth.
    failed: Vec<(f64, f64)>,
    evals: usize,
}

fn adapt(st: &mut AdaptState, a: f64, b: f64, depth: u32) -> f64 {
    let (val, err) = gk15(&st.f, a, b);
    st.evals += 15;
    if err <= st.tol_per_len * (b - a) || err == 0.0 {
        return val;
    }
    if depth >= 48 || st.evals > 4_000_000 {
        st.failed.push((a, b));
        return val;
    }
    let mid = 0.5 * (a + b);
    // Left before right: keeps the summation order, and hence the result,
    // bit-identical across runs.
    let left = adapt(st, a, mid, depth + 1);
    let right = adapt(st, mid, b, depth + 1);
    left + right
}

/// Adaptive quadrature of `f` over `window` with absolute error target `tol`.
///
/// Returns `Tail` when the unresolved error sits at the window's edges (the
/// integrand has not decayed there), `NonConvergence` when an interior feature
/// exhausts the subdivision budget.
pub fn integrate<F: Fn(f64) -> f64>(f: F, window: (f64, f64), tol: f64) -> Result<f64> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Config(format!(
            "integration window [{a}, {b}] is not a finite increasing interval"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut st = AdaptState {
        f: &f,
        tol_per_len: tol / (b - a),
        failed: Vec::new(),
        evals: 0,
    };
    let val = adapt(&mut st, a, b, 0);
    if st.failed.is_empty() {
        return Ok(val);
    }
    // Once the evaluation budget dies, whole untouched subtrees get marked
    // failed, so membership alone misclassifies. The narrowest failed segment
    // is where subdivision actually fought and lost; use its position.
    let deepest = st
        .failed
        .iter()
        .copied()
        .min_by(|s, t| (s.1 - s.0).partial_cmp(&(t.1 - t.0)).unwrap())
        .unwrap();
    let edge = deepest.0 == a || deepest.1 == b;
    if edge {
        Err(Error::Tail(format!(
            "integrand unresolved at the window edge of [{a}, {b}] \
             ({} failed segments)",
            st.failed.len()
        )))
    } else {
        Err(Error::NonConvergence(format!(
            "adaptive quadrature exhausted its budget on [{a}, {b}] \
             ({} failed segments)",
            st.failed.len()
        )))
    }
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Default step used by the residual suites: `1e-3 (1 + |x|)`.
pub fn default_fd_step(x: f64) -> f64 {
    1e-3 * (1.0 + x.abs())
}

/// Plain 5-point second-derivative stencil, O(h^4).
fn stencil5<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

/// Second derivative by the 5-point stencil plus two Richardson
/// extrapolation levels (O(h^8)); returns `(value, error_estimate)`.
///
/// The step is halved until the internal estimate reaches
/// `1e-8 (1 + |value|)`. When the estimate bottoms out above that target —
/// rounding noise in `f` dominating below some step — the best iterate is
/// returned with its honest estimate, provided that estimate is still below
/// `1e-3 (1 + |value|)`; otherwise (or if `h` collapses below `1e-7`) the
/// input is not smooth enough at `x` and the function gives up with
/// `StepUnderflow`.
pub fn second_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    let mut h = h;
    let mut best: Option<(f64, f64)> = None;
    loop {
        let d0 = stencil5(&f, x, h);
        let d1 = stencil5(&f, x, 0.5 * h);
        let d2 = stencil5(&f, x, 0.25 * h);
        let r1a = (16.0 * d1 - d0) / 15.0;
        let r1b = (16.0 * d2 - d1) / 15.0;
        let r2 = (64.0 * r1b - r1a) / 63.0;
        let est = (r2 - r1b).abs();
        if est <= 1e-8 * (1.0 + r2.abs()) {
            return Ok((r2, est));
        }
        if let Some((bv, be)) = best {
            if est >= be {
                if be <= 1e-3 * (1.0 + bv.abs()) {
                    return Ok((bv, be));
                }
                return Err(Error::StepUnderflow(format!(
                    "finite-difference estimate stopped improving at {be:.3e} \
                     at x = {x}"
                )));
            }
        }
        best = Some((r2, est));
        h *= 0.5;
        if h < 1e-7 {
            return Err(Error::StepUnderflow(format!(
                "finite-difference step collapsed below 1e-7 at x = {x} \
                 (last estimate {est:.3e})"
            )));
        }
    }
}

/// Plain 5-point first-derivative stencil, O(h^4).
fn stencil5_first<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// First derivative by the 5-point stencil plus two Richardson extrapolation
/// levels; same acceptance, noise-floor, and step policy as
/// [`second_derivative`].
pub fn first_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    let mut h = h;
    let mut best: Option<(f64, f64)> = None;
    loop {
        let d0 = stencil5_first(&f, x, h);
        let d1 = stencil5_first(&f, x, 0.5 * h);
        let d2 = stencil5_first(&f, x, 0.25 * h);
        let r1a = (16.0 * d1 - d0) / 15.0;
        let r1b = (16.0 * d2 - d1) / 15.0;
        let r2 = (64.0 * r1b - r1a) / 63.0;
        let est = (r2 - r1b).abs();
        if est <= 1e-8 * (1.0 + r2.abs()) {
            return Ok((r2, est));
        }
        if let Some((bv, be)) = best {
            if est >= be {
                if be <= 1e-3 * (1.0 + bv.abs()) {
                    return Ok((bv, be));
                }
                return Err(Error::StepUnderflow(format!(
                    "finite-difference estimate stopped improving at {be:.3e} \
                     at x = {x}"
                )));
            }
        }
        best = Some((r2, est));
        h *= 0.5;
        if h < 1e-7 {
            return Err(Error::StepUnderflow(format!(
                "finite-difference step collapsed below 1e-7 at x = {x} \
                 (last estimate {est:.3e})"
            )));
        }
    }
}

// ---------------------------------------------------------------------------
// Node counting
// ---------------------------------------------------------------------------

/// Log-space cross-check that `ln_u` is the logarithm of a (positive)
/// solution of `u'' = q(x) u` on `window`.
///
/// Shoots with fixed-step RK4 from the sampled interior minimum of `ln_u`
/// outward to both edges — along the growing solution, so the comparison is
/// well conditioned — starting from `u = 1` with the slope `dln_u0` supplied
/// by the caller, and returns the sup over `n_samples` evenly spaced points
/// of `|ln u_RK4 - ln_u|` (the relative disagreement of the two solutions).
/// The step is chosen so the RK4 truncation stays near 1e-10.
pub fn ode_log_deviation(
    q: impl Fn(f64) -> f64,
    ln_u: impl Fn(f64) -> Result<f64>,
    dln_u0: impl Fn(f64) -> Result<f64>,
    window: (f64, f64),
    n_samples: usize,
) -> Result<f64> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Config(format!(
            "comparison window [{a}, {b}] is not a finite increasing interval"
        )));
    }
    if n_samples < 3 {
        return Err(Error::Config(format!(
            "need at least 3 sample points, got {n_samples}"
        )));
    }
    let xs: Vec<f64> = (0..n_samples)
        .map(|i| a + (b - a) * i as f64 / (n_samples - 1) as f64)
        .collect();
    let lns: Vec<f64> = xs.iter().map(|&x| ln_u(x)).collect::<Result<_>>()?;
    let mut i_star = 0usize;
    for (i, &l) in lns.iter().enumerate() {
        if l < lns[i_star] {
            i_star = i;
        }
    }
    // Global truncation ~ length * lambda^5 h^4 / 120 with lambda^2 = sup q.
    let mut q_sup = 1.0_f64;
    for &x in &xs {
        let v = q(x);
        if !v.is_finite() {
            return Err(Error::Domain(format!("q({x}) is not finite")));
        }
        q_sup = q_sup.max(v.abs());
    }
    let lambda = q_sup.sqrt();
    let h_target = (120.0 * 1e-10 / ((b - a) * lambda.powi(5))).powf(0.25);

    let mut worst = 0.0_f64;
    let slope0 = dln_u0(xs[i_star])?;
    for dir in [-1.0_f64, 1.0] {
        let idx: Vec<usize> = if dir < 0.0 {
            (0..i_star).rev().collect()
        } else {
            (i_star + 1..n_samples).collect()
        };
        let mut x = xs[i_star];
        let mut u = 1.0_f64;
        let mut v = slope0;
        let mut ln_scale = 0.0_f64;
        for j in idx {
            let target = xs[j];
            let len = (target - x).abs();
            let steps = (len / h_target).ceil().max(1.0) as usize;
            let h = (target - x) / steps as f64;
            for _ in 0..steps {
                // RK4 on (u, v)' = (v, q u).
                let k1u = v;
                let k1v = q(x) * u;
                let k2u = v + 0.5 * h * k1v;
                let k2v = q(x + 0.5 * h) * (u + 0.5 * h * k1u);
                let k3u = v + 0.5 * h * k2v;
                let k3v = q(x + 0.5 * h) * (u + 0.5 * h * k2u);
                let k4u = v + h * k3v;
                let k4v = q(x + h) * (u + h * k3u);
                u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                x += h;
                if u.abs() > 1e120 {
                    let s = u.abs();
                    u /= s;
                    v /= s;
                    ln_scale += s.ln();
                }
            }
            x = target;
            if !(u > 0.0) {
                return Err(Error::NonConvergence(format!(
                    "RK4 solution lost positivity at x = {x}; ln_u is not the \
                     logarithm of a nodeless solution"
                )));
            }
            let dev = (u.ln() + ln_scale - (lns[j] - lns[i_star])).abs();
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------

/// Number of sign changes in `samples`, ignoring values below the noise
/// threshold `1e-10 max|samples|`. Invariant under positive rescaling.
pub fn count_nodes(samples: &[f64]) -> usize {
    let peak = samples.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    if peak == 0.0 {
        return 0;
    }
    let thr = 1e-10 * peak;
    let mut count = 0;
    let mut last_sign = 0i8;
    for &v in samples {
        if v.abs() <= thr {
            continue;
        }
        let s = if v > 0.0 { 1i8 } else { -1i8 };
        if last_sign != 0 && s != last_sign {
            count += 1;
        }
        last_sign = s;
    }
    count
}

// ---------------------------------------------------------------------------
// Gram matrix
// ---------------------------------------------------------------------------

/// Symmetric matrix of pairwise `L^2` inner products over `window`.
///
/// Each function must have decayed at the window edges (below `1e-6` of its
/// in-window peak), otherwise `Tail` is returned before any integration.
pub fn gram_matrix(functions: &[&dyn Fn(f64) -> f64], window: (f64, f64)) -> Result<Vec<Vec<f64>>> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Config(format!(
            "gram window [{a}, {b}] is not a finite increasing interval"
        )));
    }
    let n = functions.len();
    // Edge-decay screen on a coarse scan.
    for (i, f) in functions.iter().enumerate() {
        let mut peak = 0.0_f64;
        for k in 0..=200 {
            let x = a + (b - a) * k as f64 / 200.0;
            peak = peak.max(f(x).abs());
        }
        let edge = f(a).abs().max(f(b).abs());
        if peak == 0.0 || edge > 1e-6 * peak {
            return Err(Error::Tail(format!(
                "function {i} has not decayed at the gram window edges \
                 (edge {edge:.3e} vs peak {peak:.3e})"
            )));
        }
    }
    let mut g = vec![vec![0.0_f64; n]; n];
    for i in 0..n {
        for j in i..n {
            let fi = functions[i];
            let fj = functions[j];
            let v = integrate(|x| fi(x) * fj(x), window, 1e-10)?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// Largest absolute deviation of `g` from the identity matrix.
pub fn gram_identity_deviation(g: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, row) in g.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
