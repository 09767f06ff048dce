//! Self-contained special-function kernel.
//!
//! Provides the confluent hypergeometric functions Kummer `M(a,b,z)` (= 1F1)
//! and Tricomi `U(a,b,z)`, physicists' Hermite polynomials, generalized
//! Laguerre polynomials, log-Gamma, and the analytic first derivatives of
//! `M` and `U` via contiguous-parameter identities.
//!
//! Design notes:
//!
//! * `M` uses its power series for moderate arguments (all terms positive when
//!   `a, b > 0` and `z >= 0`, so no cancellation) with dynamic rescaling for
//!   huge partial sums, and switches to the large-`z` asymptotic expansion with
//!   error monitoring when that expansion's own estimate beats `1e-13`.
//! * `U` is computed two ways and the evaluation with the better internal
//!   error estimate wins: (i) the large-`z` asymptotic series
//!   `z^-a 2F0(a, a-b+1;; -1/z)`, summed through its initial all-positive block
//!   (for large `b` the terms grow before they decay, so naive min-term
//!   stopping would truncate absurdly early), and (ii) the two-`M` connection
//!   formula in log space, with a cancellation estimate attached.
//! * Log-space variants `kummer_m_ln` / `tricomi_u_ln` return `(ln|f|, sign)`
//!   so callers can form ratios and products far outside `f64` range.
//! * All functions are pure and deterministic: identical inputs produce
//!   bit-identical outputs.

use crate::{Error, Result};

/// Rescaling threshold for running series accumulators.
const BIG: f64 = 1e280;
const LN_BIG: f64 = 644.7238260383328; // ln(1e280)

/// Parameter triple for the confluent hypergeometric functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KummerParams {
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl KummerParams {
    /// Validates the invariants: `b` must not be a non-positive integer and
    /// `z` must be finite.
    pub fn new(a: f64, b: f64, z: f64) -> Result<Self> {
        if b <= 0.0 && b == b.floor() {
            return Err(Error::Domain(format!(
                "Kummer parameter b = {b} is a non-positive integer"
            )));
        }
        if !a.is_finite() || !b.is_finite() || !z.is_finite() {
            return Err(Error::Domain(format!(
                "Kummer parameters must be finite, got a = {a}, b = {b}, z = {z}"
            )));
        }
        Ok(KummerParams { a, b, z })
    }
}

/// Polynomial order for Hermite/Laguerre families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyOrder {
    pub n: usize,
    /// Laguerre upper index (`> -1` for orthogonality; unused by Hermite).
    pub alpha_param: f64,
}

impl PolyOrder {
    pub fn new(n: usize, alpha_param: f64) -> Self {
        PolyOrder { n, alpha_param }
    }
}

// ---------------------------------------------------------------------------
// log-Gamma
// ---------------------------------------------------------------------------

/// Lanczos coefficients (g = 7, n = 9).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x); sin(pi x) > 0 here.
        return std::f64::consts::PI.ln() - sin_pi(x).ln() - ln_gamma(1.0 - x);
    }
    let xg = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (xg + i as f64);
    }
    let t = xg + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xg + 0.5) * t.ln() - t + acc.ln()
}

/// `sin(pi x)` with exact argument reduction `x -> x - round(x)`, so large
/// arguments (connection-formula Gammas at `b` in the hundreds) keep full
/// relative accuracy.
fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let s = (std::f64::consts::PI * r).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// `(ln|Gamma(x)|, sign(Gamma(x)))` for any non-pole real `x`.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x > 0.0 {
        return Ok((ln_gamma(x), 1.0));
    }
    if x == x.floor() {
        return Err(Error::Domain(format!("Gamma pole at x = {x}")));
    }
    let s = sin_pi(x);
    Ok((
        (std::f64::consts::PI / s.abs()).ln() - ln_gamma(1.0 - x),
        s.signum(),
    ))
}

// ---------------------------------------------------------------------------
// Signed log-space arithmetic
// ---------------------------------------------------------------------------

/// A real number stored as `(ln|v|, sign)`; zero is `(-inf, 0.0)`.
pub type LnSigned = (f64, f64);

/// Adds two signed log-space numbers.
pub fn ln_add(x: LnSigned, y: LnSigned) -> LnSigned {
    let (lx, sx) = x;
    let (ly, sy) = y;
    if sx == 0.0 || lx == f64::NEG_INFINITY {
        return y;
    }
    if sy == 0.0 || ly == f64::NEG_INFINITY {
        return x;
    }
    let m = lx.max(ly);
    let r = sx * (lx - m).exp() + sy * (ly - m).exp();
    if r == 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (m + r.abs().ln(), r.signum())
    }
}

/// Converts a signed log-space value back to `f64`, refusing to overflow.
pub fn ln_to_f64(v: LnSigned) -> Result<f64> {
    let (l, s) = v;
    if s == 0.0 || l == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if l > 709.0 {
        return Err(Error::Convergence(format!(
            "value exp({l:.3}) overflows f64; use the log-space variant"
        )));
    }
    Ok(s * l.exp())
}

// ---------------------------------------------------------------------------
// Kummer M
// ---------------------------------------------------------------------------

/// Power series `sum_k (a)_k / (b)_k z^k / k!` with dynamic rescaling.
///
/// Returns `(mantissa, ln_scale, cancel, ok)`: the value is
/// `mantissa * exp(ln_scale)`, and `cancel = max|term| / |sum|` measures the
/// worst intermediate cancellation (1.0 when all terms are positive).
fn m_series_scaled(a: f64, b: f64, z: f64) -> (f64, f64, f64, bool) {
    let mut term = 1.0_f64;
    let mut acc = 1.0_f64;
    let mut ln_scale = 0.0_f64;
    let mut peak = 1.0_f64;
    for k in 0..60_000 {
        let kf = k as f64;
        term *= (a + kf) * z / ((b + kf) * (kf + 1.0));
        acc += term;
        let at = term.abs();
        if at > peak {
            peak = at;
        }
        if at <= 1e-18 * acc.abs() {
            return (acc, ln_scale, peak / acc.abs().max(1e-300), true);
        }
        if acc.abs() > BIG || at > BIG {
            acc /= BIG;
            term /= BIG;
            peak /= BIG;
            ln_scale += LN_BIG;
        }
    }
    (acc, ln_scale, peak / acc.abs().max(1e-300), false)
}

/// Large-`z` asymptotic expansion of `M` in log space:
/// `M ~ Gamma(b)/Gamma(a) e^z z^(a-b) 2F0(b-a, 1-a;; 1/z)`.
///
/// Returns `Some((ln|M|, sign, err_estimate))`; `None` when the prefactor
/// Gammas hit a pole (e.g. `a` a non-positive integer).
fn m_asymptotic_ln(a: f64, b: f64, z: f64) -> Option<(f64, f64, f64)> {
    let (lgb, sgb) = ln_gamma_signed(b).ok()?;
    let (lga, sga) = ln_gamma_signed(a).ok()?;
    let mut term = 1.0_f64;
    let mut acc = 1.0_f64;
    let mut prev = f64::INFINITY;
    let mut err = 1.0_f64;
    for k in 0..500 {
        let kf = k as f64;
        let nxt = term * (b - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * z);
        if nxt.abs() >= prev {
            err = nxt.abs() / acc.abs().max(1e-300);
            break;
        }
        term = nxt;
        prev = term.abs();
        acc += term;
        err = prev / acc.abs().max(1e-300);
        if prev <= 1e-18 * acc.abs() {
            break;
        }
    }
    if acc == 0.0 {
        return None;
    }
    // Relative size of the neglected second branch of the full expansion,
    // ~ z^-a / Gamma(b-a) against e^z z^(a-b) / Gamma(a).
    let neglected = match ln_gamma_signed(b - a) {
        Ok((lgba, _)) => (-z + (b - 2.0 * a) * z.ln() + lga - lgba).exp(),
        Err(_) => 0.0, // 1/Gamma at a pole: the second branch vanishes
    };
    let ln_val = lgb - lga + z + (a - b) * z.ln() + acc.abs().ln();
    let sign = sgb * sga * acc.signum();
    Some((ln_val, sign, err + neglected))
}

/// `(ln|M(a,b,z)|, sign)` — log-space Kummer function, valid far outside the
/// representable range of `f64`.
pub fn kummer_m_ln(p: KummerParams) -> Result<LnSigned> {
    let KummerParams { a, b, z } = KummerParams::new(p.a, p.b, p.z)?;
    if z < 0.0 {
        // Kummer transformation M(a,b,z) = e^z M(b-a, b, -z); the reflected
        // series has a positive argument and (for our callers) no cancellation.
        let (l, s) = kummer_m_ln(KummerParams { a: b - a, b, z: -z })?;
        return Ok((l + z, s));
    }
    if z > 30.0 {
        if let Some((l, s, est)) = m_asymptotic_ln(a, b, z) {
            if est < 1e-13 {
                return Ok((l, s));
            }
        }
    }
    let (mant, ln_scale, cancel, ok) = m_series_scaled(a, b, z);
    if !ok {
        return Err(Error::Convergence(format!(
            "Kummer series did not converge for a = {a}, b = {b}, z = {z}"
        )));
    }
    if 2.2e-16 * cancel > 1e-9 {
        return Err(Error::Convergence(format!(
            "Kummer series lost too many digits to cancellation \
             (factor {cancel:.3e}) for a = {a}, b = {b}, z = {z}"
        )));
    }
    if mant == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    Ok((mant.abs().ln() + ln_scale, mant.signum()))
}

/// Kummer confluent hypergeometric function `M(a,b,z) = 1F1(a;b;z)`.
pub fn kummer_m(p: KummerParams) -> Result<f64> {
    ln_to_f64(kummer_m_ln(p)?)
}

/// Analytic derivative `dM/dz = (a/b) M(a+1, b+1, z)`.
pub fn kummer_m_deriv(p: KummerParams) -> Result<f64> {
    KummerParams::new(p.a, p.b, p.z)?;
    if p.a == 0.0 {
        return Ok(0.0); // M(0,b,z) = 1
    }
    let shifted = kummer_m(KummerParams {
        a: p.a + 1.0,
        b: p.b + 1.0,
        z: p.z,
    })?;
    Ok(p.a / p.b * shifted)
}

// ---------------------------------------------------------------------------
// Tricomi U
// ---------------------------------------------------------------------------

/// Large-`z` asymptotic series `z^-a 2F0(a, a-b+1;; -1/z)` in log space.
///
/// The terms are all positive while `k < b - a - 1`, and for large `b` they
/// grow to an enormous hump before decaying, so the positive block is summed
/// in full (with rescaling); only past the sign-flip boundary does the
/// classic min-term divergence stop apply. Returns `(ln|U|, sign, estimate)`
/// or `None` when the series never enters a trustworthy regime.
fn u_asymptotic_ln(a: f64, b: f64, z: f64) -> Option<(f64, f64, f64)> {
    let k_flip = b - a - 1.0;
    let mut term = 1.0_f64;
    let mut acc = 1.0_f64;
    let mut ln_scale = 0.0_f64;
    let mut prev = 1.0_f64;
    let mut err = 1.0_f64;
    let mut k = 0u32;
    while k < 30_000 {
        let kf = k as f64;
        let nxt = term * (a + kf) * (a - b + 1.0 + kf) / (-(kf + 1.0) * z);
        if kf + 1.0 >= k_flip && nxt.abs() >= prev {
            err = nxt.abs() / acc.abs().max(1e-300);
            break;
        }
        term = nxt;
        prev = term.abs();
        acc += term;
        k += 1;
        if term.abs() <= 1e-18 * acc.abs() {
            err = term.abs() / acc.abs().max(1e-300);
            break;
        }
        if acc.abs() > BIG {
            acc /= BIG;
            term /= BIG;
            prev /= BIG;
            ln_scale += LN_BIG;
        }
    }
    if k == 30_000 {
        err = term.abs() / acc.abs().max(1e-300);
    }
    if acc <= 0.0 {
        return None;
    }
    let ln_val = -a * z.ln() + acc.ln() + ln_scale;
    Some((ln_val, 1.0, err))
}

/// Two-`M` connection formula in log space:
/// `U = Gamma(1-b)/Gamma(a-b+1) M(a,b,z)
///    + Gamma(b-1)/Gamma(a) z^(1-b) M(a-b+1, 2-b, z)`.
///
/// Returns `(ln|U|, sign, estimate)`; the estimate tracks both series'
/// internal cancellation and the cancellation between the two branches.
/// `None` when `b` is an integer (Gamma poles) or a series fails.
fn u_connection_ln(a: f64, b: f64, z: f64) -> Option<(f64, f64, f64)> {
    let (ln_g1n, s1n) = ln_gamma_signed(1.0 - b).ok()?;
    let (ln_g1d, s1d) = ln_gamma_signed(a - b + 1.0).ok()?;
    let (ln_g2n, s2n) = ln_gamma_signed(b - 1.0).ok()?;
    let (ln_g2d, s2d) = ln_gamma_signed(a).ok()?;
    let (m1, off1, can1, ok1) = m_series_scaled(a, b, z);
    let (m2, off2, can2, ok2) = m_series_scaled(a - b + 1.0, 2.0 - b, z);
    if !(ok1 && ok2) || m1 == 0.0 || m2 == 0.0 {
        return None;
    }
    let lt1 = ln_g1n - ln_g1d + m1.abs().ln() + off1;
    let lt2 = ln_g2n - ln_g2d + (1.0 - b) * z.ln() + m2.abs().ln() + off2;
    let sg1 = s1n * s1d * m1.signum();
    let sg2 = s2n * s2d * m2.signum();
    let (ln_val, sign) = ln_add((lt1, sg1), (lt2, sg2));
    if sign == 0.0 {
        return None;
    }
    let cancel = (lt1 - ln_val).exp() * can1.max(1.0) + (lt2 - ln_val).exp() * can2.max(1.0);
    Some((ln_val, sign, 2.2e-16 * cancel))
}

/// `(ln|U(a,b,z)|, sign)` — log-space Tricomi function.
pub fn tricomi_u_ln(p: KummerParams) -> Result<LnSigned> {
    let KummerParams { a, b, z } = KummerParams::new(p.a, p.b, p.z)?;
    if z <= 0.0 {
        return Err(Error::Domain(format!(
            "Tricomi U requires z > 0, got z = {z}"
        )));
    }
    let asym = u_asymptotic_ln(a, b, z);
    if let Some((l, s, est)) = asym {
        if est < 1e-13 {
            return Ok((l, s));
        }
    }
    let conn = u_connection_ln(a, b, z);
    match (asym, conn) {
        (Some((la, sa, ea)), Some((lc, sc, ec))) => {
            if ec < ea {
                Ok((lc, sc))
            } else {
                Ok((la, sa))
            }
        }
        (None, Some((lc, sc, ec))) if ec < 1e-8 => Ok((lc, sc)),
        (Some((la, sa, ea)), None) if ea < 1e-8 => Ok((la, sa)),
        _ => Err(Error::Convergence(format!(
            "no Tricomi U evaluation met its error estimate for a = {a}, b = {b}, z = {z}"
        ))),
    }
}

/// Tricomi confluent hypergeometric function `U(a,b,z)` for `z > 0`.
pub fn tricomi_u(p: KummerParams) -> Result<f64> {
    ln_to_f64(tricomi_u_ln(p)?)
}

/// Analytic derivative `dU/dz = -a U(a+1, b+1, z)`.
pub fn tricomi_u_deriv(p: KummerParams) -> Result<f64> {
    KummerParams::new(p.a, p.b, p.z)?;
    if p.a == 0.0 {
        return Ok(0.0); // U(0,b,z) = 1
    }
    let shifted = tricomi_u(KummerParams {
        a: p.a + 1.0,
        b: p.b + 1.0,
        z: p.z,
    })?;
    Ok(-p.a * shifted)
}

// ---------------------------------------------------------------------------
// Orthogonal polynomials
// ---------------------------------------------------------------------------

/// Physicists' Hermite polynomial `H_n(x)` via the three-term recurrence
/// `H_{n+1} = 2 x H_n - 2 n H_{n-1}`.
pub fn hermite(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut hkm1 = 1.0_f64; // H_0
    let mut hk = 2.0 * x; // H_1
    for k in 1..n {
        let next = 2.0 * x * hk - 2.0 * (k as f64) * hkm1;
        hkm1 = hk;
        hk = next;
    }
    hk
}

/// Generalized Laguerre polynomial `L_n^a(x)` via the stable recurrence
/// `(k+1) L_{k+1} = (2k+1+a-x) L_k - (k+a) L_{k-1}`.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut lkm1 = 1.0_f64; // L_0
    let mut lk = 1.0 + a - x; // L_1
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * lk - (kf + a) * lkm1) / (kf + 1.0);
        lkm1 = lk;
        lk = next;
    }
    lk
}

/// [`hermite`] through a [`PolyOrder`] (the `alpha_param` field is unused).
pub fn hermite_poly(p: PolyOrder, x: f64) -> f64 {
    hermite(p.n, x)
}

/// [`laguerre`] through a [`PolyOrder`].
pub fn laguerre_poly(p: PolyOrder, x: f64) -> f64 {
    laguerre(p.n, p.alpha_param, x)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
