//! The two analytically solvable seed systems.
//!
//! Both seeds are 1D Pauli-type eigenproblems
//! `(-d^2/dx^2 + V0^sigma) F = k F` with superpartner potentials
//! `V0^sigma = W0^2 - sigma W0'` built from a superpotential `W0` that already
//! absorbs the transverse momentum `p2`:
//!
//! * **Uniform field** `B0(x) = B0`: `W0 = (omega/2) x + p2` with
//!   `omega = 2 e B0` — a shifted harmonic oscillator with spectrum
//!   `k_n^+ = omega n` and Hermite-Gaussian eigenfunctions.
//! * **Exponentially decaying field** `B0(x) = B0 exp(-alpha x)`:
//!   `W0 = p2 - D(exp(-alpha x) - 1)` with `D = e B0 / alpha` — a Morse
//!   system with spectrum `k_n^+ = alpha n (2 q2 - alpha n)`, `q2 = p2 + D`,
//!   holding finitely many bound states (`q2/alpha - n > 0`), with
//!   Laguerre-type eigenfunctions in the variable
//!   `rho = (2D/alpha) exp(-alpha x)`.
//!
//! The `sigma = -1` towers come from the ladder pairing
//! `k_n^- = k_{n+1}^+`: for the uniform seed the lowered state is the *same*
//! Hermite-Gaussian profile at the shifted eigenvalue, and for the Morse seed
//! the ladder produces the closed form `exp(-rho/2) rho^{s_{n+1}}
//! L_n^{2 s_{n+1}}(rho)`.

use crate::specfun::{hermite, laguerre, ln_gamma};
use crate::{numerics, Error, Result};
use std::collections::HashMap;
use std::sync::Mutex;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Which analytically solvable seed field to start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    Uniform,
    Exponential,
}

impl std::fmt::Display for SeedKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeedKind::Uniform => write!(f, "uniform"),
            SeedKind::Exponential => write!(f, "exponential"),
        }
    }
}

/// Spin projection label `sigma = +1 / -1` of the Pauli eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    pub fn sign(self) -> f64 {
        match self {
            Sigma::Plus => 1.0,
            Sigma::Minus => -1.0,
        }
    }
}

/// Physical parameters identifying one seed-plus-transform instance.
///
/// The mass is stored as a magnitude `m >= 0` with its sign tracked
/// separately in `m_sign`, so the `m -> 0` limit keeps a well-defined
/// `sgn(m)` for the charge-density coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub seed_kind: SeedKind,
    /// Field amplitude `B0 > 0`.
    pub b0: f64,
    /// Elementary charge (natural units; default 1).
    pub e_charge: f64,
    /// Inverse decay length of the exponential seed (> 0; ignored by Uniform).
    pub alpha: f64,
    /// Transverse momentum.
    pub p2: f64,
    /// Mass gap magnitude (>= 0).
    pub m: f64,
    /// Sign convention for `sgn(m)`; must be +1 or -1.
    pub m_sign: i8,
    /// Factorization energy (<= 0).
    pub epsilon1: f64,
    /// Deformation parameter of the transform.
    pub nu1: f64,
}

impl FieldConfig {
    /// Uniform-seed config with `e = 1`, mass 1 (positive sign).
    pub fn uniform(b0: f64, p2: f64, epsilon1: f64, nu1: f64) -> Self {
        FieldConfig {
            seed_kind: SeedKind::Uniform,
            b0,
            e_charge: 1.0,
            alpha: 0.0,
            p2,
            m: 1.0,
            m_sign: 1,
            epsilon1,
            nu1,
        }
    }

    /// Exponential-seed config with `e = 1`, mass 1 (positive sign).
    pub fn exponential(b0: f64, alpha: f64, p2: f64, epsilon1: f64, nu1: f64) -> Self {
        FieldConfig {
            seed_kind: SeedKind::Exponential,
            b0,
            e_charge: 1.0,
            alpha,
            p2,
            m: 1.0,
            m_sign: 1,
            epsilon1,
            nu1,
        }
    }

    /// Checks all parameter-range invariants; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if !(self.b0 > 0.0) {
            return Err(Error::Config(format!(
                "field amplitude B0 must be positive, got {}",
                self.b0
            )));
        }
        if !(self.e_charge > 0.0) {
            return Err(Error::Config(format!(
                "charge e must be positive, got {}",
                self.e_charge
            )));
        }
        if !(self.m >= 0.0) {
            return Err(Error::Config(format!(
                "mass magnitude must be non-negative, got {}",
                self.m
            )));
        }
        if self.m_sign != 1 && self.m_sign != -1 {
            return Err(Error::Config(format!(
                "mass sign must be +1 or -1, got {}",
                self.m_sign
            )));
        }
        if !(self.epsilon1 <= 0.0) {
            return Err(Error::Config(format!(
                "factorization energy epsilon1 must be <= 0, got {}",
                self.epsilon1
            )));
        }
        match self.seed_kind {
            SeedKind::Uniform => {
                if !(self.nu1 > -1.0 && self.nu1 < 1.0) {
                    return Err(Error::Config(format!(
                        "uniform seed requires nu1 in (-1, 1), got {}",
                        self.nu1
                    )));
                }
            }
            SeedKind::Exponential => {
                if self.nu1 >= -1.0 && self.nu1 <= 0.0 {
                    return Err(Error::Config(format!(
                        "exponential seed requires nu1 outside [-1, 0], got {}",
                        self.nu1
                    )));
                }
                if !(self.alpha > 0.0) {
                    return Err(Error::Config(format!(
                        "exponential seed requires alpha > 0, got {}",
                        self.alpha
                    )));
                }
                let d = self.e_charge * self.b0 / self.alpha;
                if !(self.p2 + d > 0.0) {
                    return Err(Error::Config(format!(
                        "exponential seed requires q2 = p2 + e B0/alpha > 0 \
                         for bound states, got q2 = {}",
                        self.p2 + d
                    )));
                }
                if self.b0 <= 1.0 {
                    warnings.push(format!(
                        "exponential seed is usually quoted with B0 > 1; \
                         B0 = {} is accepted but outside that range",
                        self.b0
                    ));
                }
            }
        }
        Ok(warnings)
    }
}

// ---------------------------------------------------------------------------
// SeedSystem
// ---------------------------------------------------------------------------

/// Evaluators for one seed system: `W0`, `V0^sigma`, `B0(x)`, eigenvalues
/// `k_n^sigma` and normalized eigenfunctions `F_{n,p2,sigma}`.
///
/// Immutable after construction; all evaluators are reentrant (the
/// normalization cache sits behind a mutex).
#[derive(Debug)]
pub struct SeedSystem {
    config: FieldConfig,
    /// `omega = 2 e B0` (cyclotron scale; also the uniform limit of the
    /// exponential seed at fixed `B0`).
    omega: f64,
    /// Exponential seed: `D = e B0 / alpha` (0 for Uniform).
    d: f64,
    /// Exponential seed: `q2 = p2 + D` (unused for Uniform).
    q2: f64,
    warnings: Vec<String>,
    /// Normalization factors keyed by `(n, sigma sign)`.
    norms: Mutex<HashMap<(usize, i8), f64>>,
}

impl SeedSystem {
    pub fn new(config: FieldConfig) -> Result<Self> {
        let warnings = config.validate()?;
        Ok(Self::from_parts(config, warnings))
    }

    /// Construction that skips parameter validation. Test scaffolding only:
    /// the nodelessness screen can only fire on configurations the validator
    /// refuses, so its tests need a backdoor.
    #[cfg(test)]
    pub(crate) fn new_unchecked(config: FieldConfig) -> Self {
        Self::from_parts(config, Vec::new())
    }

    fn from_parts(config: FieldConfig, warnings: Vec<String>) -> Self {
        let omega = 2.0 * config.e_charge * config.b0;
        let (d, q2) = match config.seed_kind {
            SeedKind::Uniform => (0.0, 0.0),
            SeedKind::Exponential => {
                let d = config.e_charge * config.b0 / config.alpha;
                (d, config.p2 + d)
            }
        };
        SeedSystem {
            config,
            omega,
            d,
            q2,
            warnings,
            norms: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Morse parameter `D = e B0/alpha` (exponential seed only).
    pub fn d_param(&self) -> f64 {
        self.d
    }

    /// Shifted momentum `q2 = p2 + D` (exponential seed only).
    pub fn q2(&self) -> f64 {
        self.q2
    }

    /// Largest bound-state index, or `None` when the tower is unbounded
    /// (uniform seed; callers cap it).
    pub fn n_max(&self) -> Option<usize> {
        match self.config.seed_kind {
            SeedKind::Uniform => None,
            SeedKind::Exponential => {
                // Bound states need s_n = q2/alpha - n > 0.
                let s = self.q2 / self.config.alpha;
                Some((s.ceil() as usize).saturating_sub(1))
            }
        }
    }

    /// Oscillator variable `eta = sqrt(omega/2) (x + 2 p2/omega)` (Uniform).
    pub fn eta(&self, x: f64) -> f64 {
        (self.omega / 2.0).sqrt() * (x + 2.0 * self.config.p2 / self.omega)
    }

    /// Morse variable `rho = (2D/alpha) exp(-alpha x)` (Exponential).
    pub fn rho(&self, x: f64) -> f64 {
        2.0 * self.d / self.config.alpha * (-self.config.alpha * x).exp()
    }

    /// Laguerre lower-index parameter `s_n = q2/alpha - n` (Exponential).
    pub fn s_n(&self, n: usize) -> f64 {
        self.q2 / self.config.alpha - n as f64
    }

    // -- Potentials and field ------------------------------------------------

    /// Superpotential `W0(x)` (includes the `p2` shift).
    pub fn superpotential_w0(&self, x: f64) -> f64 {
        match self.config.seed_kind {
            SeedKind::Uniform => 0.5 * self.omega * x + self.config.p2,
            SeedKind::Exponential => {
                self.config.p2 - self.d * ((-self.config.alpha * x).exp() - 1.0)
            }
        }
    }

    /// `W0'(x)` (analytic).
    pub fn superpotential_w0_deriv(&self, x: f64) -> f64 {
        match self.config.seed_kind {
            SeedKind::Uniform => 0.5 * self.omega,
            SeedKind::Exponential => self.config.alpha * self.d * (-self.config.alpha * x).exp(),
        }
    }

    /// Superpartner potential `V0^sigma = W0^2 - sigma W0'`.
    pub fn partner_potential_v0(&self, sigma: Sigma, x: f64) -> f64 {
        let w = self.superpotential_w0(x);
        w * w - sigma.sign() * self.superpotential_w0_deriv(x)
    }

    /// Seed magnetic-field profile `B0(x) = W0'(x)/e`.
    pub fn seed_field_b0(&self, x: f64) -> f64 {
        self.superpotential_w0_deriv(x) / self.config.e_charge
    }

    // -- Spectrum ------------------------------------------------------------

    fn check_index(&self, n: usize, what: &str) -> Result<()> {
        if let Some(nmax) = self.n_max() {
            if n > nmax {
                return Err(Error::Index(format!(
                    "{what} index n = {n} exceeds the bound-state range \
                     n_max = {nmax} of the exponential seed"
                )));
            }
        }
        Ok(())
    }

    /// Eigenvalue `k_n^sigma`; the two towers are ladder-paired by
    /// `k_n^- = k_{n+1}^+`.
    pub fn seed_eigenvalue(&self, n: usize, sigma: Sigma) -> Result<f64> {
        let np = match sigma {
            Sigma::Plus => n,
            Sigma::Minus => n + 1,
        };
        self.check_index(np, "eigenvalue")?;
        Ok(match self.config.seed_kind {
            SeedKind::Uniform => self.omega * np as f64,
            SeedKind::Exponential => {
                let al = self.config.alpha;
                al * np as f64 * (2.0 * self.q2 - al * np as f64)
            }
        })
    }

    // -- Eigenfunctions ------------------------------------------------------

    /// Closed-form uniform normalization `N_n = sqrt(2^-n/n! sqrt(omega/2pi))`,
    /// evaluated in log space.
    fn uniform_norm(&self, n: usize) -> f64 {
        let ln_n = -0.5 * (n as f64 * std::f64::consts::LN_2 + ln_gamma(n as f64 + 1.0))
            + 0.25 * (self.omega / (2.0 * std::f64::consts::PI)).ln();
        ln_n.exp()
    }

    /// Overflow shift for the Morse profile `rho^s e^{-rho/2}`: its log-peak
    /// value `C = s (ln(2s) - 1)` at `rho = 2s`.
    fn morse_shift(s: f64) -> f64 {
        s * ((2.0 * s).ln() - 1.0)
    }

    /// Shape index of the Morse profile for `(n, sigma)`: the `sigma = -1`
    /// tower uses the `s_{n+1}` shape (ladder closed form).
    fn morse_s(&self, n: usize, sigma: Sigma) -> f64 {
        match sigma {
            Sigma::Plus => self.s_n(n),
            Sigma::Minus => self.s_n(n + 1),
        }
    }

    /// Unnormalized eigenfunction (Morse branch carries the overflow shift).
    fn f_unnorm(&self, n: usize, sigma: Sigma, x: f64) -> f64 {
        match self.config.seed_kind {
            SeedKind::Uniform => {
                // The sigma = -1 state equals the sigma = +1 profile: applying
                // L0^- = d/dx + W0 to F_{n+1,+1} reproduces N_n H_n(eta)
                // e^{-eta^2/2} exactly (Hermite derivative identity).
                let eta = self.eta(x);
                (-eta * eta / 2.0).exp() * hermite(n, eta)
            }
            SeedKind::Exponential => {
                let rho = self.rho(x);
                let s = self.morse_s(n, sigma);
                let c = Self::morse_shift(s);
                (-rho / 2.0 + s * rho.ln() - c).exp() * laguerre(n, 2.0 * s, rho)
            }
        }
    }

    /// `d/dx` of [`Self::f_unnorm`] via the polynomial derivative identities
    /// (`H_n' = 2n H_{n-1}`, `d/drho L_n^a = -L_{n-1}^{a+1}`, and
    /// `d/dx = -alpha rho d/drho` on the Morse branch).
    fn f_unnorm_deriv(&self, n: usize, sigma: Sigma, x: f64) -> f64 {
        match self.config.seed_kind {
            SeedKind::Uniform => {
                let eta = self.eta(x);
                let hp = if n > 0 {
                    2.0 * n as f64 * hermite(n - 1, eta)
                } else {
                    0.0
                };
                (self.omega / 2.0).sqrt() * (-eta * eta / 2.0).exp() * (hp - eta * hermite(n, eta))
            }
            SeedKind::Exponential => {
                let al = self.config.alpha;
                let rho = self.rho(x);
                let s = self.morse_s(n, sigma);
                let c = Self::morse_shift(s);
                let pre = (-rho / 2.0 + s * rho.ln() - c).exp();
                let l = laguerre(n, 2.0 * s, rho);
                let lshift = if n > 0 {
                    laguerre(n - 1, 2.0 * s + 1.0, rho)
                } else {
                    0.0
                };
                pre * ((al * rho / 2.0 - al * s) * l + al * rho * lshift)
            }
        }
    }

    /// Normalization factor for `(n, sigma)`: closed form for the uniform
    /// seed, unit-`L^2` quadrature for the Morse seed (cached).
    fn norm_factor(&self, n: usize, sigma: Sigma) -> Result<f64> {
        match self.config.seed_kind {
            SeedKind::Uniform => Ok(self.uniform_norm(n)),
            SeedKind::Exponential => {
                let key = (n, sigma.sign() as i8);
                if let Some(&v) = self.norms.lock().unwrap().get(&key) {
                    return Ok(v);
                }
                let w = self.window_for_state(n, sigma)?;
                // The profile is O(1) by the C-shift, but the Laguerre factor
                // grows with n, and the ~s-magnitude exponent cancellation
                // leaves ~1e-13 relative noise on every sample; aim the
                // absolute target at the integrand's own scale so the
                // quadrature is not asked to beat that floor.
                let mut sup = 0.0_f64;
                for k in 0..=512 {
                    let x = w.0 + (w.1 - w.0) * k as f64 / 512.0;
                    let f = self.f_unnorm(n, sigma, x);
                    sup = sup.max(f * f);
                }
                if !(sup > 0.0) {
                    return Err(Error::Convergence(format!(
                        "seed state n = {n} vanished on its sampling window"
                    )));
                }
                let sq = numerics::integrate(
                    |x| {
                        let f = self.f_unnorm(n, sigma, x);
                        f * f
                    },
                    w,
                    1e-11 * sup * (w.1 - w.0),
                )?;
                if !(sq > 0.0) {
                    return Err(Error::Convergence(format!(
                        "normalization integral for seed state n = {n} vanished"
                    )));
                }
                let v = 1.0 / sq.sqrt();
                self.norms.lock().unwrap().insert(key, v);
                Ok(v)
            }
        }
    }

    /// Normalized eigenfunction `F_{n,p2,sigma}(x)`.
    pub fn seed_eigenfunction(&self, n: usize, sigma: Sigma, x: f64) -> Result<f64> {
        let np = match sigma {
            Sigma::Plus => n,
            Sigma::Minus => n + 1,
        };
        self.check_index(np, "eigenfunction")?;
        Ok(self.norm_factor(n, sigma)? * self.f_unnorm(n, sigma, x))
    }

    /// Analytic `d/dx` of the normalized eigenfunction.
    pub fn seed_eigenfunction_deriv(&self, n: usize, sigma: Sigma, x: f64) -> Result<f64> {
        let np = match sigma {
            Sigma::Plus => n,
            Sigma::Minus => n + 1,
        };
        self.check_index(np, "eigenfunction")?;
        Ok(self.norm_factor(n, sigma)? * self.f_unnorm_deriv(n, sigma, x))
    }

    // -- Windows -------------------------------------------------------------

    /// Default sampling window for figure-style output:
    /// Uniform `[-2p2/omega - 8/sqrt(omega), -2p2/omega + 8/sqrt(omega)]`;
    /// Exponential `[x_turn^-, x_turn^+ + 10/alpha]` at the level-`n`
    /// turning points of `V0^+`.
    pub fn default_window(&self, n: usize) -> (f64, f64) {
        match self.config.seed_kind {
            SeedKind::Uniform => {
                let c = -2.0 * self.config.p2 / self.omega;
                let w = 8.0 / self.omega.sqrt();
                (c - w, c + w)
            }
            SeedKind::Exponential => {
                let (lo, hi) = self.turning_points(n);
                (lo, hi + 10.0 / self.config.alpha)
            }
        }
    }

    /// Positions where `V0^+(x) = k_n^+` (real for every bound level).
    fn turning_points(&self, n: usize) -> (f64, f64) {
        let al = self.config.alpha;
        let k = al * n as f64 * (2.0 * self.q2 - al * n as f64);
        let a = self.q2 + al / 2.0;
        let disc = (a * a - (self.q2 * self.q2 - k)).sqrt();
        let u_hi = (a + disc) / self.d;
        let u_lo = (a - disc) / self.d;
        (-u_hi.ln() / al, -u_lo.ln() / al)
    }

    /// Integration window on which the `(n, sigma)` eigenfunction has decayed
    /// to machine-negligible tails (squared profile below ~1e-37 of peak).
    pub fn window_for_state(&self, n: usize, sigma: Sigma) -> Result<(f64, f64)> {
        match self.config.seed_kind {
            SeedKind::Uniform => {
                let c = -2.0 * self.config.p2 / self.omega;
                let eta_edge = (2.0 * n as f64 + 1.0).sqrt() + 7.0;
                let w = eta_edge * (2.0 / self.omega).sqrt();
                Ok((c - w, c + w))
            }
            SeedKind::Exponential => {
                let al = self.config.alpha;
                let np = match sigma {
                    Sigma::Plus => n,
                    Sigma::Minus => n + 1,
                };
                self.check_index(np, "window")?;
                let s = self.morse_s(n, sigma);
                let (tlo, thi) = self.turning_points(np.min(self.n_max().unwrap_or(np)));
                // Squared-profile log-magnitude, ignoring the Laguerre factor.
                let ln_f2 = |x: f64| {
                    let rho = self.rho(x);
                    2.0 * (-rho / 2.0 + s * rho.ln() - Self::morse_shift(s))
                };
                let mut lo = tlo - 1.0 / al;
                let mut hi = thi + 1.0 / al;
                let mut guard = 0;
                while ln_f2(lo) > -85.0 && guard < 400 {
                    lo -= 1.0 / al;
                    guard += 1;
                }
                while ln_f2(hi) > -85.0 && guard < 800 {
                    hi += 1.0 / al;
                    guard += 1;
                }
                Ok((lo, hi))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
