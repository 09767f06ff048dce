//! Generalized first-order SUSY transform on top of a seed system.
//!
//! Given a seed Hamiltonian `H0^+ = -d^2/dx^2 + V0^+` and a factorization
//! energy `epsilon1 <= 0`, the transform is built from a nodeless solution
//! `u1` of `-u1'' + (V0^+ - epsilon1) u1 = 0`:
//!
//! * `W1 = u1'/u1` — the new superpotential,
//! * `V1 = Vt0 - 2 W1'` with `Vt0 = V0^+ - epsilon1` — the partner potential,
//! * `B1 = W1'/e` — the generated inhomogeneous magnetic profile,
//! * spectrum `k0^(1) = 0`, `k_{n+1}^(1) = k_n^+ - epsilon1`,
//! * states `F^(1)_0 ~ 1/u1` and
//!   `F^(1)_{n+1} = (-F_n' + W1 F_n)/sqrt(k_n^+ - epsilon1)`.
//!
//! The nodeless `u1` comes from confluent hypergeometric two-parameter
//! families: for the uniform seed
//! `u1 = e^{-eta^2/2} (M(a,1/2,eta^2) + c eta M(a+1/2,3/2,eta^2))` with
//! `a = -epsilon1/(2 omega)` and `c = 2 nu1 Gamma(a+1/2)/Gamma(a)`; for the
//! exponential seed
//! `u1 = e^{-rho/2} (alpha rho/2D)^kappa (M(a,b,rho) + gamma U(a,b,rho))`
//! with `kappa = sqrt(q2^2 - epsilon1)/alpha`, `b = 1 + 2 kappa`,
//! `a = kappa - q2/alpha`, and `gamma = (2 q2/alpha)(1 + 1/nu1)`.
//!
//! For the allowed `nu1` ranges every coefficient in front of the (positive)
//! confluent functions is non-negative, so `u1 > 0` is automatic; a dense
//! sign screen still runs at construction as a hard safety net.
//!
//! `epsilon1 = 0` degenerates to the standard 1-SUSY pairing where `u1` is
//! the seed ground state: the potential and field evaluators reduce to
//! `W1 = -W0`, `V1 = V0^-`, `B1 = -B0`, while the transformed tower
//! (a deleted, not added, level) is rejected with a descriptive error.

use crate::seeds::{FieldConfig, SeedKind, SeedSystem, Sigma};
use crate::specfun::{
    kummer_m, kummer_m_ln, ln_add, ln_gamma, tricomi_u_ln, KummerParams, LnSigned,
};
use crate::{numerics, Error, Result};
use std::sync::Mutex;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Which of the 1-SUSY cases the configuration realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    /// `epsilon1 < 0`: a new ground level at `k = 0` is created.
    LevelAddition,
    /// `epsilon1 = 0`: the seed ground state is factored out; only the
    /// potential/field evaluators are meaningful.
    GroundDeletion,
}

/// Metadata of one transformed bound state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedState {
    pub n: usize,
    /// `k^(1)_n`.
    pub eigenvalue: f64,
    /// `N^(1)_n`: `1/||1/u1||` for `n = 0`, `1/sqrt(k_{n-1}^+ - epsilon1)`
    /// above.
    pub norm_constant: f64,
}

#[derive(Debug, Clone, Copy)]
struct GroundData {
    /// Sampled minimum of `ln u1` (peak of the new ground state).
    lstar: f64,
    /// `1/sqrt` of the shifted norm integral.
    inv_sqrt: f64,
    window: (f64, f64),
}

/// A seed system equipped with the first-order transform.
///
/// Immutable after construction; the constructor runs the nodelessness
/// screen, evaluators are reentrant.
#[derive(Debug)]
pub struct IntertwinedSystem {
    seed: SeedSystem,
    kind: TransformKind,
    screen_window: (f64, f64),
    // Uniform branch: u1 = e^{-z/2} g(eta), z = eta^2.
    a_osc: f64,
    c_osc: f64,
    // Exponential branch: u1 = e^{-rho/2 - alpha kappa x} h(rho).
    kappa: f64,
    a_conf: f64,
    b_conf: f64,
    gamma_coef: f64,
    ground: Mutex<Option<GroundData>>,
}

impl IntertwinedSystem {
    /// Builds the transform, screening `u1` for sign changes on the default
    /// window of the seed.
    pub fn new(config: FieldConfig) -> Result<Self> {
        let seed = SeedSystem::new(config)?;
        Self::finish(seed, None)
    }

    /// Same as [`Self::new`] but screens on (a superset of) the caller's
    /// window, e.g. the requested output grid.
    pub fn with_screen_window(config: FieldConfig, window: (f64, f64)) -> Result<Self> {
        let seed = SeedSystem::new(config)?;
        Self::finish(seed, Some(window))
    }

    /// Bypasses parameter validation but still screens. Test scaffolding for
    /// the screen itself, which cannot fire on validated configurations.
    #[cfg(test)]
    pub(crate) fn new_unvalidated(config: FieldConfig) -> Result<Self> {
        let seed = SeedSystem::new_unchecked(config);
        Self::finish(seed, None)
    }

    fn finish(seed: SeedSystem, window: Option<(f64, f64)>) -> Result<Self> {
        let config = *seed.config();
        let kind = if config.epsilon1 == 0.0 {
            TransformKind::GroundDeletion
        } else {
            TransformKind::LevelAddition
        };
        let omega = seed.omega();
        let (a_osc, c_osc, kappa, a_conf, b_conf, gamma_coef);
        match config.seed_kind {
            SeedKind::Uniform => {
                a_osc = -config.epsilon1 / (2.0 * omega);
                c_osc = if a_osc == 0.0 {
                    // 1/Gamma(0) = 0: the odd branch drops out.
                    0.0
                } else {
                    2.0 * config.nu1 * (ln_gamma(a_osc + 0.5) - ln_gamma(a_osc)).exp()
                };
                kappa = 0.0;
                a_conf = 0.0;
                b_conf = 0.0;
                gamma_coef = 0.0;
            }
            SeedKind::Exponential => {
                let al = config.alpha;
                let q2 = seed.q2();
                kappa = (q2 * q2 - config.epsilon1).sqrt() / al;
                // kappa - q2/alpha without cancellation for small |epsilon1|.
                a_conf = (-config.epsilon1 / (al * al)) / (kappa + q2 / al);
                b_conf = 1.0 + 2.0 * kappa;
                gamma_coef = (2.0 * q2 / al) * (1.0 + 1.0 / config.nu1);
                a_osc = 0.0;
                c_osc = 0.0;
            }
        }
        let default_window = match config.seed_kind {
            SeedKind::Uniform => {
                let c = -2.0 * config.p2 / omega;
                let w = 10.0 * (2.0 / omega).sqrt();
                (c - w, c + w)
            }
            SeedKind::Exponential => {
                let n = seed.n_max().unwrap_or(0);
                let (lo, hi) = seed.default_window(n);
                (lo - 2.0 / config.alpha, hi)
            }
        };
        // An explicit window widens the default; it never narrows it, so the
        // screen always covers at least the region the defaults care about.
        let screen_window = window.map_or(default_window, |(lo, hi)| {
            (lo.min(default_window.0), hi.max(default_window.1))
        });
        let sys = IntertwinedSystem {
            seed,
            kind,
            screen_window,
            a_osc,
            c_osc,
            kappa,
            a_conf,
            b_conf,
            gamma_coef,
            ground: Mutex::new(None),
        };
        sys.screen()?;
        Ok(sys)
    }

    /// Dense sign screen of `u1` (10x the default 1024-point grid density).
    fn screen(&self) -> Result<()> {
        let (lo, hi) = self.screen_window;
        let n = 10_240usize;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            if self.u1_sign(x)? <= 0.0 {
                return Err(Error::SingularTransform(format!(
                    "u1 changes sign near x = {x:.6}; the factorization is \
                     singular for this (epsilon1, nu1)"
                )));
            }
        }
        Ok(())
    }

    /// Sign of `u1(x)` without evaluating any derivative blocks.
    fn u1_sign(&self, x: f64) -> Result<f64> {
        if self.kind == TransformKind::GroundDeletion {
            return Ok(1.0);
        }
        match self.seed.config().seed_kind {
            SeedKind::Uniform => Ok(self.g_value(self.seed.eta(x))?.signum()),
            SeedKind::Exponential => Ok(self.h_value(self.seed.rho(x))?.1),
        }
    }

    /// The oscillator-branch combination `g = M(a,1/2,z) + c eta M(a+1/2,3/2,z)`
    /// alone (no derivatives).
    fn g_value(&self, eta: f64) -> Result<f64> {
        let a = self.a_osc;
        let z = eta * eta;
        let m1 = kummer_m(KummerParams::new(a, 0.5, z)?)?;
        if self.c_osc == 0.0 {
            return Ok(m1);
        }
        let m2 = kummer_m(KummerParams::new(a + 0.5, 1.5, z)?)?;
        Ok(m1 + self.c_osc * eta * m2)
    }

    // -- Accessors -----------------------------------------------------------

    pub fn seed(&self) -> &SeedSystem {
        &self.seed
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn epsilon1(&self) -> f64 {
        self.seed.config().epsilon1
    }

    pub fn nu1(&self) -> f64 {
        self.seed.config().nu1
    }

    /// Oscillator-branch parameter `a = -epsilon1/(2 omega)` (Uniform only).
    pub fn oscillator_a(&self) -> Option<f64> {
        match self.seed.config().seed_kind {
            SeedKind::Uniform => Some(self.a_osc),
            SeedKind::Exponential => None,
        }
    }

    /// Confluent parameters `(a, b)` of the exponential-branch `u1`.
    pub fn confluent_ab(&self) -> Option<(f64, f64)> {
        match self.seed.config().seed_kind {
            SeedKind::Uniform => None,
            SeedKind::Exponential => Some((self.a_conf, self.b_conf)),
        }
    }

    /// Rebuilds the same transform at a different transverse momentum.
    pub fn with_p2(&self, p2: f64) -> Result<Self> {
        let mut config = *self.seed.config();
        config.p2 = p2;
        Self::new(config)
    }

    // -- u1 and its confluent building blocks --------------------------------

    /// `(g, g', g'')` of the oscillator branch, derivatives in `eta`, via
    /// contiguous Kummer identities.
    fn g_parts(&self, eta: f64) -> Result<(f64, f64, f64)> {
        let a = self.a_osc;
        let z = eta * eta;
        let m1 = kummer_m(KummerParams::new(a, 0.5, z)?)?;
        let m1p = 2.0 * a * kummer_m(KummerParams::new(a + 1.0, 1.5, z)?)?;
        let m1pp = (4.0 * a * (a + 1.0) / 3.0) * kummer_m(KummerParams::new(a + 2.0, 2.5, z)?)?;
        if self.c_osc == 0.0 {
            return Ok((m1, 2.0 * eta * m1p, 2.0 * m1p + 4.0 * z * m1pp));
        }
        let c = self.c_osc;
        let m2 = kummer_m(KummerParams::new(a + 0.5, 1.5, z)?)?;
        let m2p = ((2.0 * a + 1.0) / 3.0) * kummer_m(KummerParams::new(a + 1.5, 2.5, z)?)?;
        let m2pp = ((2.0 * a + 1.0) * (2.0 * a + 3.0) / 15.0)
            * kummer_m(KummerParams::new(a + 2.5, 3.5, z)?)?;
        let g = m1 + c * eta * m2;
        let gp = 2.0 * eta * m1p + c * (m2 + 2.0 * z * m2p);
        let gpp = 2.0 * m1p + 4.0 * z * m1pp + c * (6.0 * eta * m2p + 4.0 * eta * z * m2pp);
        Ok((g, gp, gpp))
    }

    /// `h = M(a,b,rho) + gamma U(a,b,rho)` in signed log space.
    fn h_value(&self, rho: f64) -> Result<LnSigned> {
        let p = KummerParams::new(self.a_conf, self.b_conf, rho)?;
        let m = kummer_m_ln(p)?;
        let u = tricomi_u_ln(p)?;
        // gamma_coef < 0 only on forbidden (unvalidated) deformations; keep
        // its sign explicit so the screen sees the node instead of a NaN.
        let g = self.gamma_coef;
        Ok(ln_add(m, (g.abs().ln() + u.0, g.signum() * u.1)))
    }

    /// `(h, h', h'')` in signed log space, derivatives in `rho`, via the
    /// contiguous identities `M' = (a/b) M(a+1,b+1)`, `U' = -a U(a+1,b+1)`.
    fn h_parts(&self, rho: f64) -> Result<(LnSigned, LnSigned, LnSigned)> {
        let (a, b, g) = (self.a_conf, self.b_conf, self.gamma_coef);
        let h = self.h_value(rho)?;
        let p1 = KummerParams::new(a + 1.0, b + 1.0, rho)?;
        let m1 = kummer_m_ln(p1)?;
        let u1 = tricomi_u_ln(p1)?;
        let ga = g * a;
        let hp = ln_add(
            ((a / b).ln() + m1.0, m1.1),
            (ga.abs().ln() + u1.0, -ga.signum() * u1.1),
        );
        let p2 = KummerParams::new(a + 2.0, b + 2.0, rho)?;
        let m2 = kummer_m_ln(p2)?;
        let u2 = tricomi_u_ln(p2)?;
        let c2 = a * (a + 1.0);
        let gc = g * c2;
        let hpp = ln_add(
            ((c2 / (b * (b + 1.0))).ln() + m2.0, m2.1),
            (gc.abs().ln() + u2.0, gc.signum() * u2.1),
        );
        Ok((h, hp, hpp))
    }

    /// `(h'/h, h''/h)` as plain floats; errors if `h` is non-positive.
    fn h_ratios(&self, rho: f64) -> Result<(f64, f64)> {
        let (h, hp, hpp) = self.h_parts(rho)?;
        if h.1 <= 0.0 {
            return Err(Error::SingularTransform(format!(
                "u1 vanishes at rho = {rho:.6e}"
            )));
        }
        let r1 = hp.1 * (hp.0 - h.0).exp();
        let r2 = hpp.1 * (hpp.0 - h.0).exp();
        Ok((r1, r2))
    }

    /// `ln|u1|` with the sign of `u1`.
    fn ln_u1_signed(&self, x: f64) -> Result<LnSigned> {
        let config = self.seed.config();
        match (config.seed_kind, self.kind) {
            (SeedKind::Uniform, TransformKind::GroundDeletion) => {
                let eta = self.seed.eta(x);
                Ok((-eta * eta / 2.0, 1.0))
            }
            (SeedKind::Uniform, TransformKind::LevelAddition) => {
                let eta = self.seed.eta(x);
                let (g, _, _) = self.g_parts(eta)?;
                if g == 0.0 {
                    return Ok((f64::NEG_INFINITY, 0.0));
                }
                Ok((-eta * eta / 2.0 + g.abs().ln(), g.signum()))
            }
            (SeedKind::Exponential, TransformKind::GroundDeletion) => {
                let rho = self.seed.rho(x);
                let base = -rho / 2.0 - config.alpha * self.kappa * x;
                Ok((base + self.gamma_coef.ln_1p(), 1.0))
            }
            (SeedKind::Exponential, TransformKind::LevelAddition) => {
                let rho = self.seed.rho(x);
                let h = self.h_value(rho)?;
                Ok((-rho / 2.0 - config.alpha * self.kappa * x + h.0, h.1))
            }
        }
    }

    /// `ln u1(x)`; errors if `u1` is not strictly positive there.
    pub fn ln_u1(&self, x: f64) -> Result<f64> {
        let (l, s) = self.ln_u1_signed(x)?;
        if s <= 0.0 {
            return Err(Error::SingularTransform(format!(
                "u1 is not positive at x = {x:.6}"
            )));
        }
        Ok(l)
    }

    /// The transformation function `u1(x)` itself.
    pub fn u1(&self, x: f64) -> Result<f64> {
        let (l, s) = self.ln_u1_signed(x)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        if l > 709.0 {
            return Err(Error::Convergence(format!(
                "u1(x = {x:.4}) = exp({l:.1}) overflows f64; use ln_u1"
            )));
        }
        Ok(s * l.exp())
    }

    // -- Potentials and field -------------------------------------------------

    /// `Vt0(x) = V0^+(x) - epsilon1`.
    pub fn shifted_potential(&self, x: f64) -> f64 {
        self.seed.partner_potential_v0(Sigma::Plus, x) - self.epsilon1()
    }

    /// `W1(x) = u1'/u1`, evaluated analytically per branch.
    pub fn superpotential_w1(&self, x: f64) -> Result<f64> {
        if self.kind == TransformKind::GroundDeletion {
            return Ok(-self.seed.superpotential_w0(x));
        }
        match self.seed.config().seed_kind {
            SeedKind::Uniform => {
                let eta = self.seed.eta(x);
                let (g, gp, _) = self.g_parts(eta)?;
                self.guard_g(g, x)?;
                Ok((self.seed.omega() / 2.0).sqrt() * (gp / g - eta))
            }
            SeedKind::Exponential => {
                let al = self.seed.config().alpha;
                let rho = self.seed.rho(x);
                let (r1, _) = self.h_ratios(rho)?;
                Ok(al * rho / 2.0 - al * self.kappa - al * rho * r1)
            }
        }
    }

    fn guard_g(&self, g: f64, x: f64) -> Result<()> {
        if g <= 0.0 {
            return Err(Error::SingularTransform(format!(
                "u1 vanishes at x = {x:.6}"
            )));
        }
        Ok(())
    }

    /// `W1'(x)` via `u1''/u1 - W1^2` with contiguous-identity second
    /// derivatives — no numeric differentiation.
    pub fn superpotential_w1_deriv(&self, x: f64) -> Result<f64> {
        if self.kind == TransformKind::GroundDeletion {
            return Ok(-self.seed.superpotential_w0_deriv(x));
        }
        match self.seed.config().seed_kind {
            SeedKind::Uniform => {
                let eta = self.seed.eta(x);
                let z = eta * eta;
                let (g, gp, gpp) = self.g_parts(eta)?;
                self.guard_g(g, x)?;
                let udd_over_u = (gpp - 2.0 * eta * gp + (z - 1.0) * g) / g;
                let w_over = gp / g - eta;
                Ok(self.seed.omega() / 2.0 * (udd_over_u - w_over * w_over))
            }
            SeedKind::Exponential => {
                let al = self.seed.config().alpha;
                let rho = self.seed.rho(x);
                let (r1, r2) = self.h_ratios(rho)?;
                Ok(
                    -al * al * rho / 2.0
                        + al * al * rho * r1
                        + al * al * rho * rho * (r2 - r1 * r1),
                )
            }
        }
    }

    /// Partner potential `V1(x) = Vt0(x) - 2 W1'(x)`.
    pub fn partner_potential_v1(&self, x: f64) -> Result<f64> {
        Ok(self.shifted_potential(x) - 2.0 * self.superpotential_w1_deriv(x)?)
    }

    /// Generated magnetic field `B1(x) = W1'(x)/e`.
    pub fn field_b1(&self, x: f64) -> Result<f64> {
        Ok(self.superpotential_w1_deriv(x)? / self.seed.config().e_charge)
    }

    /// `F(rho) = -alpha rho h'/h` — the exponential-branch building block of
    /// `W1 = alpha rho/2 - alpha kappa + F(rho)`.
    pub fn f_script(&self, rho: f64) -> Result<f64> {
        let config = self.seed.config();
        if config.seed_kind != SeedKind::Exponential {
            return Err(Error::Domain(
                "F(rho) is defined only for the exponential seed".into(),
            ));
        }
        if self.kind == TransformKind::GroundDeletion {
            // h is constant; the log-derivative term vanishes.
            return Ok(0.0);
        }
        let (r1, _) = self.h_ratios(rho)?;
        Ok(-config.alpha * rho * r1)
    }

    // -- Printed closed forms (a = 1/10 family) -------------------------------

    fn require_printed_family(&self) -> Result<()> {
        let config = self.seed.config();
        if config.seed_kind != SeedKind::Uniform
            || (self.a_osc - 0.1).abs() > 1e-12
            || config.nu1 != 0.0
        {
            return Err(Error::Domain(
                "the printed closed forms are specialized to the uniform \
                 seed with epsilon1 = -omega/5 and nu1 = 0"
                    .into(),
            ));
        }
        Ok(())
    }

    /// The specialized closed form
    /// `W1 = sqrt(omega/2) eta (-1 + (2/5) M(11/10,3/2,eta^2)/M(1/10,1/2,eta^2))`,
    /// valid for `epsilon1 = -omega/5`, `nu1 = 0`.
    pub fn w1_closed_form_printed(&self, x: f64) -> Result<f64> {
        self.require_printed_family()?;
        let eta = self.seed.eta(x);
        let z = eta * eta;
        let num = kummer_m(KummerParams::new(1.1, 1.5, z)?)?;
        let den = kummer_m(KummerParams::new(0.1, 0.5, z)?)?;
        Ok((self.seed.omega() / 2.0).sqrt() * eta * (-1.0 + 0.4 * num / den))
    }

    /// The matching closed form of the generated field,
    /// `B1 = -B0 + (2 B0/5) d/deta [eta M(11/10,3/2,eta^2)/M(1/10,1/2,eta^2)]`.
    pub fn b1_closed_form_printed(&self, x: f64) -> Result<f64> {
        self.require_printed_family()?;
        let b0 = self.seed.config().b0;
        let eta = self.seed.eta(x);
        let z = eta * eta;
        let num = kummer_m(KummerParams::new(1.1, 1.5, z)?)?;
        let den = kummer_m(KummerParams::new(0.1, 0.5, z)?)?;
        let r = num / den;
        // dnum/dz = (11/15) M(21/10,5/2,z); dden/dz = (1/5) M(11/10,3/2,z).
        let nump = (11.0 / 15.0) * kummer_m(KummerParams::new(2.1, 2.5, z)?)?;
        let dr_dz = (nump - 0.2 * num * r) / den;
        let rp = 2.0 * eta * dr_dz;
        Ok(-b0 + 0.4 * b0 * (r + eta * rp))
    }

    // -- Transformed tower -----------------------------------------------------

    fn require_level_addition(&self, what: &str) -> Result<()> {
        if self.kind == TransformKind::GroundDeletion {
            return Err(Error::Domain(format!(
                "{what} is undefined for epsilon1 = 0: the transform deletes \
                 the seed ground level instead of adding one; only the \
                 level-addition case (epsilon1 < 0) carries a transformed tower"
            )));
        }
        Ok(())
    }

    /// `k^(1)_n`: zero for the added ground level, `k_{n-1}^+ - epsilon1`
    /// above it.
    pub fn transformed_spectrum(&self, n: usize) -> Result<f64> {
        self.require_level_addition("the transformed spectrum")?;
        if n == 0 {
            return Ok(0.0);
        }
        Ok(self.seed.seed_eigenvalue(n - 1, Sigma::Plus)? - self.epsilon1())
    }

    fn ground_data(&self) -> Result<GroundData> {
        if let Some(g) = *self.ground.lock().unwrap() {
            return Ok(g);
        }
        let (slo, shi) = self.screen_window;
        // Locate the minimum of ln u1 (the peak of 1/u1).
        let mut xstar = slo;
        let mut lstar = f64::INFINITY;
        for i in 0..=2000 {
            let x = slo + (shi - slo) * i as f64 / 2000.0;
            let l = self.ln_u1(x)?;
            if l < lstar {
                lstar = l;
                xstar = x;
            }
        }
        // March outward until u1 has grown by e^19 (tail of 1/u1^2 below
        // ~1e-16 of its peak).
        let scale = match self.seed.config().seed_kind {
            SeedKind::Uniform => (2.0 / self.seed.omega()).sqrt(),
            SeedKind::Exponential => 1.0 / self.seed.config().alpha,
        };
        let step = 0.25 * scale;
        let mut lo = xstar;
        let mut hi = xstar;
        let mut guard = 0;
        while self.ln_u1(lo)? - lstar < 19.0 {
            lo -= step;
            guard += 1;
            if guard > 4000 {
                return Err(Error::Tail(
                    "1/u1 does not decay on the left; the transform adds no \
                     normalizable level"
                        .into(),
                ));
            }
        }
        while self.ln_u1(hi)? - lstar < 19.0 {
            hi += step;
            guard += 1;
            if guard > 8000 {
                return Err(Error::Tail(
                    "1/u1 does not decay on the right; the transform adds no \
                     normalizable level"
                        .into(),
                ));
            }
        }
        // Shifted norm integral: integrand exp(-2 (ln u1 - lstar)) <= ~1, but
        // each ln u1 sample carries the absolute rounding noise of its large
        // additive terms, so the per-length target must stay above that
        // floor; ~1e-11 per unit length leaves the norm far more accurate
        // than any downstream tolerance.
        let sq = numerics::integrate(
            |x| (-2.0 * (self.ln_u1(x).unwrap() - lstar)).exp(),
            (lo, hi),
            1e-11 * (hi - lo),
        )?;
        let data = GroundData {
            lstar,
            inv_sqrt: 1.0 / sq.sqrt(),
            window: (lo, hi),
        };
        *self.ground.lock().unwrap() = Some(data);
        Ok(data)
    }

    /// Normalized transformed eigenfunction `F^(1)_n(x)`.
    pub fn transformed_eigenfunction(&self, n: usize, x: f64) -> Result<f64> {
        self.require_level_addition("the transformed eigenfunction")?;
        if n == 0 {
            let g = self.ground_data()?;
            return Ok(g.inv_sqrt * (-(self.ln_u1(x)? - g.lstar)).exp());
        }
        let m = n - 1;
        let k = self.seed.seed_eigenvalue(m, Sigma::Plus)?;
        let denom = (k - self.epsilon1()).sqrt();
        let f = self.seed.seed_eigenfunction(m, Sigma::Plus, x)?;
        let fp = self.seed.seed_eigenfunction_deriv(m, Sigma::Plus, x)?;
        Ok((-fp + self.superpotential_w1(x)? * f) / denom)
    }

    /// Eigenvalue plus normalization metadata for level `n`.
    pub fn transformed_state(&self, n: usize) -> Result<TransformedState> {
        let eigenvalue = self.transformed_spectrum(n)?;
        let norm_constant = if n == 0 {
            let g = self.ground_data()?;
            g.inv_sqrt * (-g.lstar).exp()
        } else {
            1.0 / (self.seed.seed_eigenvalue(n - 1, Sigma::Plus)? - self.epsilon1()).sqrt()
        };
        Ok(TransformedState {
            n,
            eigenvalue,
            norm_constant,
        })
    }

    /// Window on which `F^(1)_n` has decayed to machine-negligible tails.
    pub fn window_for_transformed(&self, n: usize) -> Result<(f64, f64)> {
        self.require_level_addition("the transformed window")?;
        if n == 0 {
            return Ok(self.ground_data()?.window);
        }
        let (lo, hi) = self.seed.window_for_state(n - 1, Sigma::Plus)?;
        let pad = match self.seed.config().seed_kind {
            SeedKind::Uniform => 2.0 * (2.0 / self.seed.omega()).sqrt(),
            SeedKind::Exponential => 1.0 / self.seed.config().alpha,
        };
        Ok((lo - pad, hi + pad))
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{count_nodes, first_derivative, integrate, second_derivative};
    use approx::assert_relative_eq;

    /// Uniform reference family: omega = 1, p2 = 1, epsilon1 = -omega/5,
    /// nu1 = 0.
    fn uniform_sys() -> IntertwinedSystem {
        IntertwinedSystem::new(FieldConfig::uniform(0.5, 1.0, -0.2, 0.0)).unwrap()
    }

    /// Exponential reference family: B0 = 1, alpha = 1, p2 = 5 (q2 = 6),
    /// epsilon1 = -k1^+/2 = -11/2, nu1 = -3/2.
    fn exponential_sys() -> IntertwinedSystem {
        IntertwinedSystem::new(FieldConfig::exponential(1.0, 1.0, 5.0, -5.5, -1.5)).unwrap()
    }

    fn both() -> [IntertwinedSystem; 2] {
        [uniform_sys(), exponential_sys()]
    }

    fn probe_window(sys: &IntertwinedSystem) -> (f64, f64) {
        match sys.seed().config().seed_kind {
            SeedKind::Uniform => (-8.0, 4.0),
            SeedKind::Exponential => (-3.0, 6.0),
        }
    }

    // -- Parameters and u1 ----------------------------------------------------

    #[test]
    fn oscillator_branch_parameters() {
        let s = uniform_sys();
        assert_relative_eq!(s.oscillator_a().unwrap(), 0.1, max_relative = 1e-15);
        assert!(s.confluent_ab().is_none());
    }

    #[test]
    fn confluent_branch_parameters_match_radicals() {
        let s = exponential_sys();
        let (a, b) = s.confluent_ab().unwrap();
        let root = 41.5_f64.sqrt();
        assert_relative_eq!(a, -6.0 + root, max_relative = 1e-14);
        assert_relative_eq!(b, 1.0 + 2.0 * root, max_relative = 1e-14);
        assert!(s.oscillator_a().is_none());
    }

    #[test]
    fn u1_is_one_at_the_oscillator_origin() {
        let s = uniform_sys();
        // eta = 0 at x = -2 p2/omega = -2.
        assert_relative_eq!(s.u1(-2.0).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn u1_solves_the_shifted_schroedinger_equation() {
        // FD oracle: |-u1'' + Vt0 u1| < 1e-7 max|Vt0 u1| across the window.
        for sys in both() {
            let (lo, hi) = probe_window(&sys);
            let mut worst = 0.0_f64;
            let mut sup = 0.0_f64;
            for i in 0..60 {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / 60.0;
                let u = sys.u1(x).unwrap();
                let (udd, _) = second_derivative(
                    |t| sys.u1(t).unwrap(),
                    x,
                    crate::numerics::default_fd_step(x),
                )
                .unwrap();
                let vu = sys.shifted_potential(x) * u;
                worst = worst.max((-udd + vu).abs());
                sup = sup.max(vu.abs());
            }
            assert!(
                worst < 1e-7 * sup,
                "ODE residual {worst:.3e} vs sup {sup:.3e} for {:?}",
                sys.seed().config().seed_kind
            );
        }
    }

    // -- W1 -------------------------------------------------------------------

    #[test]
    fn w1_equals_the_log_derivative_of_u1() {
        for sys in both() {
            let (lo, hi) = probe_window(&sys);
            for i in 0..24 {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / 24.0;
                let (ld, _) = first_derivative(
                    |t| sys.ln_u1(t).unwrap(),
                    x,
                    crate::numerics::default_fd_step(x),
                )
                .unwrap();
                let w1 = sys.superpotential_w1(x).unwrap();
                assert_relative_eq!(w1, ld, max_relative = 1e-9, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn w1_matches_the_printed_closed_form() {
        let s = uniform_sys();
        let mut worst = 0.0_f64;
        for i in 0..=60 {
            let x = -8.0 + 12.0 * i as f64 / 60.0;
            let generic = s.superpotential_w1(x).unwrap();
            let printed = s.w1_closed_form_printed(x).unwrap();
            worst = worst.max((generic - printed).abs());
        }
        assert!(worst < 1e-12, "closed-form mismatch {worst:.3e}");
    }

    #[test]
    fn w1_is_odd_about_the_oscillator_origin() {
        let s = uniform_sys();
        assert!(s.superpotential_w1(-2.0).unwrap().abs() < 1e-14);
        let l = s.superpotential_w1(-2.0 - 0.7).unwrap();
        let r = s.superpotential_w1(-2.0 + 0.7).unwrap();
        assert_relative_eq!(l, -r, max_relative = 1e-12);
    }

    #[test]
    fn exponential_w1_limits() {
        let s = exponential_sys();
        let ak = 41.5_f64.sqrt(); // alpha kappa
                                  // rho -> 0 (x -> +infinity): W1 -> -alpha kappa + F(0+) = +alpha kappa.
        let w = s.superpotential_w1(12.0).unwrap();
        assert_relative_eq!(w, ak, max_relative = 1e-4);
        // F(rho -> 0) -> 2 alpha kappa.
        let f = s.f_script(s.seed().rho(12.0)).unwrap();
        assert_relative_eq!(f, 2.0 * ak, max_relative = 1e-4);
        // and W1 = alpha rho/2 - alpha kappa + F(rho) pointwise.
        for &x in &[-2.0, 0.0, 2.0] {
            let rho = s.seed().rho(x);
            let lhs = s.superpotential_w1(x).unwrap();
            let rhs = rho / 2.0 - ak + s.f_script(rho).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn riccati_identity_on_the_grid() {
        // sup_x |W1^2 + W1' - Vt0| < 1e-8 (1 + sup|Vt0|).
        for sys in both() {
            let (lo, hi) = probe_window(&sys);
            let mut worst = 0.0_f64;
            let mut sup = 0.0_f64;
            for i in 0..=256 {
                let x = lo + (hi - lo) * i as f64 / 256.0;
                let w1 = sys.superpotential_w1(x).unwrap();
                let w1d = sys.superpotential_w1_deriv(x).unwrap();
                let vt = sys.shifted_potential(x);
                worst = worst.max((w1 * w1 + w1d - vt).abs());
                sup = sup.max(vt.abs());
            }
            assert!(
                worst < 1e-8 * (1.0 + sup),
                "Riccati residual {worst:.3e} for {:?}",
                sys.seed().config().seed_kind
            );
        }
    }

    #[test]
    fn riccati_identity_at_x_equals_one() {
        let s = uniform_sys();
        let w1 = s.superpotential_w1(1.0).unwrap();
        let w1d = s.superpotential_w1_deriv(1.0).unwrap();
        assert!((w1 * w1 + w1d - s.shifted_potential(1.0)).abs() < 1e-8);
    }

    // -- V1 and B1 -------------------------------------------------------------

    #[test]
    fn v1_matches_the_finite_difference_oracle() {
        for (sys, x) in [(uniform_sys(), 0.0), (exponential_sys(), 1.0)] {
            let (w1d_fd, _) = second_derivative(
                |t| sys.ln_u1(t).unwrap(),
                x,
                crate::numerics::default_fd_step(x),
            )
            .unwrap();
            let v1_fd = sys.shifted_potential(x) - 2.0 * w1d_fd;
            assert_relative_eq!(
                sys.partner_potential_v1(x).unwrap(),
                v1_fd,
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn b1_matches_the_printed_closed_form() {
        let s = uniform_sys();
        let mut worst = 0.0_f64;
        for i in 0..=60 {
            let x = -8.0 + 12.0 * i as f64 / 60.0;
            let direct = s.field_b1(x).unwrap();
            let printed = s.b1_closed_form_printed(x).unwrap();
            worst = worst.max((direct - printed).abs());
        }
        assert!(worst < 1e-8, "B1 cross-oracle mismatch {worst:.3e}");
    }

    #[test]
    fn b1_matches_finite_difference_of_w1() {
        let s = exponential_sys();
        for &x in &[-2.0, 0.5, 3.0] {
            let (fd, _) = first_derivative(
                |t| s.superpotential_w1(t).unwrap(),
                x,
                crate::numerics::default_fd_step(x),
            )
            .unwrap();
            assert_relative_eq!(s.field_b1(x).unwrap(), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn b1_satisfies_the_logarithmic_form() {
        // B1 = -B0(x) - (1/e) d''/dx'' ln(F0/u1).
        for sys in both() {
            for &x in &[-1.0, 0.5, 2.0] {
                let (dd, _) = second_derivative(
                    |t| {
                        let f0 = sys.seed().seed_eigenfunction(0, Sigma::Plus, t).unwrap();
                        f0.ln() - sys.ln_u1(t).unwrap()
                    },
                    x,
                    crate::numerics::default_fd_step(x),
                )
                .unwrap();
                let log_form = -sys.seed().seed_field_b0(x) - dd / sys.seed().config().e_charge;
                assert_relative_eq!(
                    sys.field_b1(x).unwrap(),
                    log_form,
                    max_relative = 1e-6,
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn uniform_v1_merges_with_vt0_in_shape() {
        // The difference V1 - Vt0 flattens to the constant -omega: the two
        // curves become parallel (they merge up to the offset hidden in the
        // figure's scale).
        let s = uniform_sys();
        let diff = |x: f64| s.partner_potential_v1(x).unwrap() - s.shifted_potential(x);
        let omega = s.seed().omega();
        let d6 = diff(-6.0);
        let d9 = diff(-9.0);
        let d12 = diff(-12.0);
        assert!((d12 + omega).abs() < 0.02);
        assert!((d12 - d9).abs() < (d9 - d6).abs());
        // Slope of the difference dies off.
        let (slope, _) = first_derivative(diff, -12.0, 1e-3).unwrap();
        assert!(slope.abs() < 0.01);
    }

    // -- epsilon1 = 0 degeneration ---------------------------------------------

    #[test]
    fn zero_epsilon_reduces_to_standard_susy_pairing() {
        let configs = [
            FieldConfig::uniform(0.5, 1.0, 0.0, 0.0),
            FieldConfig::exponential(1.0, 1.0, 5.0, 0.0, -1.5),
        ];
        for config in configs {
            let sys = IntertwinedSystem::new(config).unwrap();
            assert_eq!(sys.kind(), TransformKind::GroundDeletion);
            for i in 0..40 {
                let x = -3.0 + 6.0 * i as f64 / 39.0;
                // Vt0 = V0^+ pointwise at zero shift.
                assert_eq!(
                    sys.shifted_potential(x),
                    sys.seed().partner_potential_v0(Sigma::Plus, x)
                );
                // V1 = V0^- and B1 = -B0.
                assert_relative_eq!(
                    sys.partner_potential_v1(x).unwrap(),
                    sys.seed().partner_potential_v0(Sigma::Minus, x),
                    max_relative = 1e-12,
                    epsilon = 1e-12
                );
                assert_relative_eq!(
                    sys.field_b1(x).unwrap(),
                    -sys.seed().seed_field_b0(x),
                    max_relative = 1e-12
                );
            }
            // The deleted-level tower is rejected with a descriptive error.
            assert!(matches!(sys.transformed_spectrum(0), Err(Error::Domain(_))));
            assert!(matches!(
                sys.transformed_eigenfunction(1, 0.3),
                Err(Error::Domain(_))
            ));
        }
    }

    // -- Spectrum ----------------------------------------------------------------

    #[test]
    fn transformed_spectrum_reference_values() {
        let u = uniform_sys();
        assert_eq!(u.transformed_spectrum(0).unwrap(), 0.0);
        assert_relative_eq!(u.transformed_spectrum(1).unwrap(), 0.2);
        assert_relative_eq!(u.transformed_spectrum(2).unwrap(), 1.2);
        let e = exponential_sys();
        assert_eq!(e.transformed_spectrum(0).unwrap(), 0.0);
        assert_relative_eq!(e.transformed_spectrum(1).unwrap(), 5.5);
        assert_relative_eq!(e.transformed_spectrum(2).unwrap(), 16.5);
        // Index range follows the seed tower: six seed levels plus the added
        // ground one.
        assert!(e.transformed_spectrum(6).is_ok());
        assert!(matches!(e.transformed_spectrum(7), Err(Error::Index(_))));
    }

    #[test]
    fn spectrum_rule_is_exact() {
        // Bit-identical to the defining subtraction, not merely close.
        for sys in both() {
            for n in 0..5 {
                let lhs = sys.transformed_spectrum(n + 1).unwrap();
                let rhs = sys.seed().seed_eigenvalue(n, Sigma::Plus).unwrap();
                assert_eq!(lhs, rhs - sys.epsilon1());
            }
        }
    }

    #[test]
    fn exactly_one_level_below_the_shifted_seed_ground() {
        for sys in both() {
            let threshold = -sys.epsilon1(); // k0^+ - epsilon1
            let below = (0..5)
                .filter(|&n| sys.transformed_spectrum(n).unwrap() < threshold)
                .count();
            assert_eq!(below, 1);
        }
    }

    // -- Transformed states --------------------------------------------------------

    #[test]
    fn ground_state_is_nodeless_normalized_and_annihilated() {
        for sys in both() {
            let (lo, hi) = sys.window_for_transformed(0).unwrap();
            let samples: Vec<f64> = (0..2000)
                .map(|i| {
                    let x = lo + (hi - lo) * i as f64 / 1999.0;
                    sys.transformed_eigenfunction(0, x).unwrap()
                })
                .collect();
            assert_eq!(count_nodes(&samples), 0);
            let sq = integrate(
                |x| {
                    let f = sys.transformed_eigenfunction(0, x).unwrap();
                    f * f
                },
                (lo, hi),
                1e-11,
            )
            .unwrap();
            assert_relative_eq!(sq, 1.0, max_relative = 1e-8);
            // L1^- F0 = F0' + W1 F0 = 0.
            let sup = samples.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
            let mut worst = 0.0_f64;
            for i in 0..40 {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / 40.0;
                let f = sys.transformed_eigenfunction(0, x).unwrap();
                let (fp, _) = first_derivative(
                    |t| sys.transformed_eigenfunction(0, t).unwrap(),
                    x,
                    crate::numerics::default_fd_step(x),
                )
                .unwrap();
                worst = worst.max((fp + sys.superpotential_w1(x).unwrap() * f).abs());
            }
            assert!(worst < 1e-8 * sup, "annihilation residual {worst:.3e}");
        }
    }

    #[test]
    fn excited_states_come_out_unit_normalized() {
        // The intertwiner is an isometry on the seed tower, so no explicit
        // normalization happens for n >= 1; quadrature must still see 1.
        for sys in both() {
            for n in 1..=3usize {
                let w = sys.window_for_transformed(n).unwrap();
                let sq = integrate(
                    |x| {
                        let f = sys.transformed_eigenfunction(n, x).unwrap();
                        f * f
                    },
                    w,
                    1e-11,
                )
                .unwrap();
                assert_relative_eq!(sq, 1.0, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn transformed_states_are_orthogonal() {
        for sys in both() {
            for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let (lo_i, hi_i) = sys.window_for_transformed(i).unwrap();
                let (lo_j, hi_j) = sys.window_for_transformed(j).unwrap();
                let w = (lo_i.min(lo_j), hi_i.max(hi_j));
                let ip = integrate(
                    |x| {
                        sys.transformed_eigenfunction(i, x).unwrap()
                            * sys.transformed_eigenfunction(j, x).unwrap()
                    },
                    w,
                    1e-10,
                )
                .unwrap();
                assert!(ip.abs() < 1e-6, "<F{i}, F{j}> = {ip:.3e}");
            }
        }
    }

    #[test]
    fn uniform_first_excited_state_matches_printed_proportionality() {
        // F^(1)_1 must be proportional to (2 eta/5) (M(11/10,3/2,eta^2) /
        // M(1/10,1/2,eta^2)) F_{0,+1}.
        let s = uniform_sys();
        let mut ratios = Vec::new();
        for i in 0..=20 {
            let x = -5.0 + 6.0 * i as f64 / 20.0;
            let eta = s.seed().eta(x);
            if eta.abs() < 0.3 {
                continue;
            }
            let z = eta * eta;
            let r = kummer_m(KummerParams::new(1.1, 1.5, z).unwrap()).unwrap()
                / kummer_m(KummerParams::new(0.1, 0.5, z).unwrap()).unwrap();
            let closed = 0.4 * eta * r * s.seed().seed_eigenfunction(0, Sigma::Plus, x).unwrap();
            ratios.push(s.transformed_eigenfunction(1, x).unwrap() / closed);
        }
        let first = ratios[0];
        for r in &ratios {
            assert_relative_eq!(*r, first, max_relative = 1e-9);
        }
    }

    #[test]
    fn transformed_states_satisfy_their_schroedinger_equation() {
        for sys in both() {
            for n in 0..=3usize {
                let k = sys.transformed_spectrum(n).unwrap();
                let (lo, hi) = sys.window_for_transformed(n).unwrap();
                let mut worst = 0.0_f64;
                let mut sup = 0.0_f64;
                for i in 0..60 {
                    let x = lo + (hi - lo) * (i as f64 + 0.5) / 60.0;
                    let f = sys.transformed_eigenfunction(n, x).unwrap();
                    sup = sup.max(f.abs());
                    let (fdd, _) = second_derivative(
                        |t| sys.transformed_eigenfunction(n, t).unwrap(),
                        x,
                        crate::numerics::default_fd_step(x),
                    )
                    .unwrap();
                    let v1 = sys.partner_potential_v1(x).unwrap();
                    worst = worst.max((-fdd + (v1 - k) * f).abs());
                }
                assert!(
                    worst / sup < 1e-5,
                    "transformed residual {:.3e} at n={n} for {:?}",
                    worst / sup,
                    sys.seed().config().seed_kind
                );
            }
        }
    }

    // -- Operator identities ----------------------------------------------------

    #[test]
    fn intertwining_relation_on_seed_states() {
        // (-d2 + V1)(L1+ psi) = (k - epsilon1)(L1+ psi) for seed eigenstates.
        for sys in both() {
            let n = 2usize;
            let k = sys.seed().seed_eigenvalue(n, Sigma::Plus).unwrap();
            let kt = k - sys.epsilon1();
            let (lo, hi) = sys.seed().window_for_state(n, Sigma::Plus).unwrap();
            let phi = |x: f64| {
                -sys.seed()
                    .seed_eigenfunction_deriv(n, Sigma::Plus, x)
                    .unwrap()
                    + sys.superpotential_w1(x).unwrap()
                        * sys.seed().seed_eigenfunction(n, Sigma::Plus, x).unwrap()
            };
            let mut worst = 0.0_f64;
            let mut sup = 0.0_f64;
            for i in 0..50 {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / 50.0;
                let p = phi(x);
                sup = sup.max(p.abs());
                let (pdd, _) =
                    second_derivative(phi, x, crate::numerics::default_fd_step(x)).unwrap();
                worst = worst.max((-pdd + sys.partner_potential_v1(x).unwrap() * p - kt * p).abs());
            }
            assert!(
                worst < 1e-5 * sup,
                "intertwining residual {worst:.3e} vs sup {sup:.3e}"
            );
        }
    }

    #[test]
    fn factorization_identities_hold_pointwise() {
        for sys in both() {
            // L1^- L1^+ psi = (k - epsilon1) psi on a seed state.
            let n = 1usize;
            let k = sys.seed().seed_eigenvalue(n, Sigma::Plus).unwrap();
            let phi = |x: f64| {
                -sys.seed()
                    .seed_eigenfunction_deriv(n, Sigma::Plus, x)
                    .unwrap()
                    + sys.superpotential_w1(x).unwrap()
                        * sys.seed().seed_eigenfunction(n, Sigma::Plus, x).unwrap()
            };
            for &x in &[-1.5, 0.0, 1.0, 2.5] {
                let (phip, _) =
                    first_derivative(phi, x, crate::numerics::default_fd_step(x)).unwrap();
                let lhs = phip + sys.superpotential_w1(x).unwrap() * phi(x);
                let rhs = (k - sys.epsilon1())
                    * sys.seed().seed_eigenfunction(n, Sigma::Plus, x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-5, epsilon = 1e-7);
            }
            // L1^- F^(1)_1 = sqrt(k0 - epsilon1) F_0 (lowering onto the seed).
            let k0 = sys.seed().seed_eigenvalue(0, Sigma::Plus).unwrap();
            for &x in &[-1.0, 0.5, 2.0] {
                let (fp, _) = first_derivative(
                    |t| sys.transformed_eigenfunction(1, t).unwrap(),
                    x,
                    crate::numerics::default_fd_step(x),
                )
                .unwrap();
                let lhs = fp
                    + sys.superpotential_w1(x).unwrap()
                        * sys.transformed_eigenfunction(1, x).unwrap();
                let rhs = (k0 - sys.epsilon1()).sqrt()
                    * sys.seed().seed_eigenfunction(0, Sigma::Plus, x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-5, epsilon = 1e-7);
            }
        }
    }

    // -- Screen -------------------------------------------------------------------

    #[test]
    fn screen_fires_on_forbidden_deformations() {
        // nu1 outside the allowed ranges produces a sign-changing u1; the
        // validator normally refuses these, so go through the unvalidated
        // path to prove the screen is a genuine second line of defense.
        let uniform_bad = FieldConfig::uniform(0.5, 1.0, -0.2, 1.5);
        assert!(matches!(
            IntertwinedSystem::new_unvalidated(uniform_bad),
            Err(Error::SingularTransform(_))
        ));
        let exp_bad = FieldConfig::exponential(1.0, 1.0, 5.0, -5.5, -0.5);
        assert!(matches!(
            IntertwinedSystem::new_unvalidated(exp_bad),
            Err(Error::SingularTransform(_))
        ));
    }

    #[test]
    fn rebuilding_at_other_momenta_works() {
        let s = uniform_sys();
        let t = s.with_p2(1.8).unwrap();
        assert_relative_eq!(t.seed().config().p2, 1.8);
        // The spectrum is p2-independent.
        assert_eq!(
            t.transformed_spectrum(1).unwrap(),
            s.transformed_spectrum(1).unwrap()
        );
    }
}
