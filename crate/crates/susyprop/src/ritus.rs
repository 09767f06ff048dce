//! Ritus eigenfunction matrices, the diagonal momentum-space propagator, the
//! (2+1)-dimensional Dirac algebra, and the per-mode charge/current density
//! profiles built from the transformed states.
//!
//! Conventions: `gamma^0 = sigma_3`, `gamma^1 = i sigma_1`,
//! `gamma^2 = i sigma_2`, metric `g = diag(1,-1,-1)`. A Ritus mode
//! `E_p(z) = diag(E_{p,+1}, E_{p,-1})` carries the plane-wave phase
//! `exp(-i(p0 t - p2 y))` on both entries; the `sigma = +1` component is the
//! transformed state `F^(1)_n(x)` and the `sigma = -1` partner at the same
//! eigenvalue is the seed state `F_{n-1,p2,+1}(x)` (ladder pairing). In the
//! Ritus basis the propagator is diagonal in momentum,
//! `S_F(p) = (gamma.pbar + m)/(pbar^2 - m^2)` with `pbar = (p0, 0, sqrt(k))`.
//!
//! The density series use the analytic `p0` reduction
//! `Int dp0/(p0^2 + b) = pi/sqrt(b)`; overall factors (`-ie`, `pi e`,
//! `-2 i^l e pi`) are carried as symbolic metadata so every profile stays
//! real.

use crate::intertwine::IntertwinedSystem;
use crate::numerics::Grid;
use crate::seeds::{FieldConfig, SeedKind, Sigma};
use crate::{Error, Result};
use num_complex::Complex64;

/// Default pole tolerance of the momentum-space propagator (natural units).
pub const DEFAULT_POLE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// 2x2 complex matrices and the Dirac algebra
// ---------------------------------------------------------------------------

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub e: [[Complex64; 2]; 2],
}

impl Matrix2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Matrix2 {
            e: [[a, b], [c, d]],
        }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn zero() -> Self {
        Self::from_real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn mul(&self, o: &Matrix2) -> Matrix2 {
        let mut r = Matrix2::zero();
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] = self.e[i][0] * o.e[0][j] + self.e[i][1] * o.e[1][j];
            }
        }
        r
    }

    pub fn add(&self, o: &Matrix2) -> Matrix2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] += o.e[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Matrix2) -> Matrix2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] -= o.e[i][j];
            }
        }
        r
    }

    pub fn scale(&self, s: Complex64) -> Matrix2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.e[i][j] *= s;
            }
        }
        r
    }

    pub fn trace(&self) -> Complex64 {
        self.e[0][0] + self.e[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.e[0][0] * self.e[1][1] - self.e[0][1] * self.e[1][0]
    }

    /// Largest entrywise absolute value.
    pub fn sup_norm(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max(self.e[i][j].norm());
            }
        }
        m
    }
}

/// `gamma^mu` for `mu = 0, 1, 2`.
pub fn gamma(mu: usize) -> Matrix2 {
    let i = Complex64::new(0.0, 1.0);
    match mu {
        0 => Matrix2::from_real(1.0, 0.0, 0.0, -1.0),
        1 => Matrix2::new(0.0.into(), i, i, 0.0.into()),
        2 => Matrix2::from_real(0.0, 1.0, -1.0, 0.0),
        _ => panic!("gamma index must be 0, 1, or 2"),
    }
}

/// Metric `g = diag(1, -1, -1)` as entries `g[mu][nu]`.
pub fn metric(mu: usize, nu: usize) -> f64 {
    if mu != nu {
        0.0
    } else if mu == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Energy projectors `P_pm = (I pm gamma^0)/2`.
pub fn projector(sign: f64) -> Matrix2 {
    gamma(0)
        .scale(sign.into())
        .add(&Matrix2::identity())
        .scale(0.5.into())
}

/// Numeric verification of the algebraic identities the density reduction
/// rests on; every field is a sup deviation that should sit at rounding
/// level.
#[derive(Debug, Clone, Copy)]
pub struct DiracAlgebraReport {
    /// `sup |{gamma^mu, gamma^nu} - 2 g^{mu nu} I|`.
    pub clifford: f64,
    /// `sup |Tr(gamma^l gamma^m) + 2 delta^{lm}|` over spatial `l, m`.
    pub trace_spatial: f64,
    /// `sup |Tr(gamma^l gamma^0 gamma^m gamma^0) - 2 delta^{lm}|`.
    pub trace_conjugated: f64,
    /// `sup` over `P_pm P_pm = P_pm` and `P_pm P_mp = 0`.
    pub projectors: f64,
}

impl DiracAlgebraReport {
    pub fn max_deviation(&self) -> f64 {
        self.clifford
            .max(self.trace_spatial)
            .max(self.trace_conjugated)
            .max(self.projectors)
    }
}

/// Evaluates all Dirac-algebra identities numerically.
pub fn dirac_trace_identities() -> DiracAlgebraReport {
    let mut clifford = 0.0_f64;
    for mu in 0..3 {
        for nu in 0..3 {
            let anti = gamma(mu).mul(&gamma(nu)).add(&gamma(nu).mul(&gamma(mu)));
            let expect = Matrix2::identity().scale((2.0 * metric(mu, nu)).into());
            clifford = clifford.max(anti.sub(&expect).sup_norm());
        }
    }
    let mut trace_spatial = 0.0_f64;
    let mut trace_conjugated = 0.0_f64;
    for l in 1..3 {
        for m in 1..3 {
            let delta = if l == m { 1.0 } else { 0.0 };
            let t = gamma(l).mul(&gamma(m)).trace();
            trace_spatial = trace_spatial.max((t + 2.0 * delta).norm());
            let tc = gamma(l)
                .mul(&gamma(0))
                .mul(&gamma(m))
                .mul(&gamma(0))
                .trace();
            trace_conjugated = trace_conjugated.max((tc - 2.0 * delta).norm());
        }
    }
    let mut projectors = 0.0_f64;
    for s in [1.0, -1.0] {
        let p = projector(s);
        let q = projector(-s);
        projectors = projectors.max(p.mul(&p).sub(&p).sup_norm());
        projectors = projectors.max(p.mul(&q).sup_norm());
    }
    DiracAlgebraReport {
        clifford,
        trace_spatial,
        trace_conjugated,
        projectors,
    }
}

// ---------------------------------------------------------------------------
// Momentum-space propagator
// ---------------------------------------------------------------------------

/// `gamma.pbar` for `pbar = (p0, 0, sqrt(k))`.
pub fn gamma_dot_pbar(p0: f64, k: f64) -> Matrix2 {
    let rk = k.sqrt();
    Matrix2::from_real(p0, -rk, rk, -p0)
}

/// Momentum-space Feynman propagator in the Ritus basis,
/// `S_F(p) = (gamma.pbar + m)/(p0^2 - k - m^2)`, with a configurable pole
/// guard.
pub fn propagator_momentum_with_tol(p0: f64, k: f64, m: f64, pole_tol: f64) -> Result<Matrix2> {
    if !(k >= 0.0) {
        return Err(Error::Domain(format!(
            "dynamical eigenvalue k must be non-negative, got {k}"
        )));
    }
    let denom = p0 * p0 - k - m * m;
    if denom.abs() < pole_tol {
        return Err(Error::Pole(format!(
            "p0^2 - k - m^2 = {denom:.3e} sits within {pole_tol:.1e} of the \
             mass shell"
        )));
    }
    let num = gamma_dot_pbar(p0, k).add(&Matrix2::identity().scale(m.into()));
    Ok(num.scale((1.0 / denom).into()))
}

/// [`propagator_momentum_with_tol`] at the default pole tolerance.
pub fn propagator_momentum(p0: f64, k: f64, m: f64) -> Result<Matrix2> {
    propagator_momentum_with_tol(p0, k, m, DEFAULT_POLE_TOL)
}

// ---------------------------------------------------------------------------
// Ritus modes
// ---------------------------------------------------------------------------

/// One diagonal Ritus mode: level `n` of the transformed tower together with
/// its ladder partner, at energy `p0` and transverse momentum `p2`.
#[derive(Debug)]
pub struct RitusMode<'a> {
    sys: &'a IntertwinedSystem,
    pub n: usize,
    pub p0: f64,
    pub p2: f64,
    /// Dynamical eigenvalue `k^(1)_n`.
    pub k: f64,
}

impl<'a> RitusMode<'a> {
    /// Requires `sys` to already sit at the requested `p2` (callers that scan
    /// `p2` rebuild the system once per value).
    pub fn new(sys: &'a IntertwinedSystem, n: usize, p0: f64) -> Result<Self> {
        let k = sys.transformed_spectrum(n)?;
        Ok(RitusMode {
            sys,
            n,
            p0,
            p2: sys.seed().config().p2,
            k,
        })
    }

    /// `pbar = (p0, 0, sqrt(k))`.
    pub fn pbar(&self) -> (f64, f64, f64) {
        (self.p0, 0.0, self.k.sqrt())
    }

    /// Spatial profile of the `sigma = +1` component: `F^(1)_n(x)`.
    pub fn component_plus(&self, x: f64) -> Result<f64> {
        self.sys.transformed_eigenfunction(self.n, x)
    }

    /// Spatial profile of the `sigma = -1` partner: the seed state
    /// `F_{n-1,p2,+1}(x)`, zero for the added ground level.
    pub fn component_minus(&self, x: f64) -> Result<f64> {
        if self.n == 0 {
            return Ok(0.0);
        }
        self.sys
            .seed()
            .seed_eigenfunction(self.n - 1, Sigma::Plus, x)
    }
}

/// The Ritus matrix `E_p(z) = exp(-i(p0 t - p2 y)) diag(F^(1)_n, F_partner)`
/// at the spacetime point `z = (t, x, y)`.
pub fn ritus_matrix(
    sys: &IntertwinedSystem,
    n: usize,
    p0: f64,
    p2: f64,
    z: (f64, f64, f64),
) -> Result<Matrix2> {
    let rebuilt;
    let at_p2 = if p2 == sys.seed().config().p2 {
        sys
    } else {
        rebuilt = sys.with_p2(p2)?;
        &rebuilt
    };
    let mode = RitusMode::new(at_p2, n, p0)?;
    let (t, x, y) = z;
    let phase = Complex64::new(0.0, -(p0 * t - p2 * y)).exp();
    let plus = mode.component_plus(x)?;
    let minus = mode.component_minus(x)?;
    Ok(Matrix2::new(
        phase * plus,
        0.0.into(),
        0.0.into(),
        phase * minus,
    ))
}

// ---------------------------------------------------------------------------
// Density profiles
// ---------------------------------------------------------------------------

/// Which observable a [`DensityProfile`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    ChargeMode,
    CurrentMode,
}

/// A real per-mode density profile on a grid, together with its spectral
/// coefficient and the symbolic overall prefactor that is *not* multiplied
/// into the values (so the samples stay real and match the plotted
/// quantities).
#[derive(Debug, Clone)]
pub struct DensityProfile {
    pub kind: DensityKind,
    pub n: usize,
    pub p2: f64,
    pub m: f64,
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Spectral weight: `sgn(m)` for the ground charge mode,
    /// `m/sqrt(m^2 + k)` for excited charge modes,
    /// `sqrt(k)/sqrt(m^2 + k)` for current modes.
    pub coefficient: f64,
    /// Overall symbolic factor (e.g. `pi e`), documentation only.
    pub prefactor: String,
}

fn sign_of_mass(config: &FieldConfig, m: f64) -> f64 {
    if m > 0.0 {
        1.0
    } else if m < 0.0 {
        -1.0
    } else {
        // sgn(0) is ambiguous; the configuration carries an explicit flag.
        config.m_sign as f64
    }
}

fn system_at_p2(sys: &IntertwinedSystem, p2: f64) -> Result<Option<IntertwinedSystem>> {
    if p2 == sys.seed().config().p2 {
        Ok(None)
    } else {
        Ok(Some(sys.with_p2(p2)?))
    }
}

/// Charge-mode density `rho_n(x, p2)`:
/// `|F^(1)_0|^2` for the added ground level and
/// `|F^(1)_n|^2 + |F_{n-1,p2,+1}|^2` above it, with coefficient `sgn(m)`
/// resp. `m/sqrt(m^2 + k^(1)_n)` and symbolic prefactor `pi e`.
pub fn charge_density_mode(
    sys: &IntertwinedSystem,
    n: usize,
    p2: f64,
    m: f64,
    grid: Grid,
) -> Result<DensityProfile> {
    let owned = system_at_p2(sys, p2)?;
    let s = owned.as_ref().unwrap_or(sys);
    let k = s.transformed_spectrum(n)?;
    let coefficient = if n == 0 {
        sign_of_mass(s.seed().config(), m)
    } else {
        m / (m * m + k).sqrt()
    };
    let mut values = Vec::with_capacity(grid.n_points);
    for x in grid.points() {
        let f1 = s.transformed_eigenfunction(n, x)?;
        let v = if n == 0 {
            f1 * f1
        } else {
            let f0 = s.seed().seed_eigenfunction(n - 1, Sigma::Plus, x)?;
            f1 * f1 + f0 * f0
        };
        values.push(v);
    }
    Ok(DensityProfile {
        kind: DensityKind::ChargeMode,
        n,
        p2,
        m,
        grid,
        values,
        coefficient,
        prefactor: "pi e".into(),
    })
}

/// Current-mode density `j_n(x, p2)`: identically zero for the ground level
/// (`j_0 = 0`), and the component product `F_{n-1,p2,+1}(x) F^(1)_n(x)` above
/// it, with coefficient `sqrt(k)/sqrt(m^2 + k)` and symbolic prefactor
/// `-2 i^l e pi` (the profile itself stays real).
pub fn current_density_mode(
    sys: &IntertwinedSystem,
    n: usize,
    p2: f64,
    m: f64,
    grid: Grid,
    ell: u8,
) -> Result<DensityProfile> {
    if ell != 1 && ell != 2 {
        return Err(Error::Config(format!(
            "current component index ell must be 1 or 2, got {ell}"
        )));
    }
    let owned = system_at_p2(sys, p2)?;
    let s = owned.as_ref().unwrap_or(sys);
    let k = s.transformed_spectrum(n)?;
    let coefficient = if n == 0 {
        0.0
    } else {
        k.sqrt() / (m * m + k).sqrt()
    };
    let mut values = Vec::with_capacity(grid.n_points);
    for x in grid.points() {
        let v = if n == 0 {
            0.0
        } else {
            s.seed().seed_eigenfunction(n - 1, Sigma::Plus, x)?
                * s.transformed_eigenfunction(n, x)?
        };
        values.push(v);
    }
    Ok(DensityProfile {
        kind: DensityKind::CurrentMode,
        n,
        p2,
        m,
        grid,
        values,
        coefficient,
        prefactor: format!("-2 i^{ell} e pi"),
    })
}

// ---------------------------------------------------------------------------
// p2 integral
// ---------------------------------------------------------------------------

/// Quadrature rule for the outer `p2` integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum P2Quadrature {
    Trapezoid {
        nodes: usize,
    },
    GaussLegendre {
        nodes: usize,
    },
    /// Degenerate single-point rule: no integral, evaluate at this `p2`.
    Delta {
        p2: f64,
    },
}

fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    // Newton iteration on Legendre polynomials; standard [-1, 1] rule.
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence.
            let (mut p0, mut p1) = (1.0_f64, x);
            for j in 2..=n {
                let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = pj;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0_f64, x);
        for j in 2..=n {
            let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = pj;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Integrates the weighted charge-mode density over `p2`:
/// `values(x) = Int dp2 coeff(p2) rho_n(x, p2)` (diagnostic; the spectral
/// coefficient is folded into the integrand since `k^(1)_n` may depend on
/// `p2`). The symbolic prefactor `pi e` stays outside. Fails with a tail
/// error when the integrand has not decayed at the `p2` boundary.
pub fn density_p2_integral(
    sys: &IntertwinedSystem,
    n: usize,
    m: f64,
    grid: Grid,
    p2_range: (f64, f64),
    quadrature: P2Quadrature,
) -> Result<DensityProfile> {
    if let P2Quadrature::Delta { p2 } = quadrature {
        let mode = charge_density_mode(sys, n, p2, m, grid)?;
        let values = mode.values.iter().map(|v| v * mode.coefficient).collect();
        return Ok(DensityProfile {
            values,
            coefficient: 1.0,
            ..mode
        });
    }
    let (lo, hi) = p2_range;
    if !(hi > lo) {
        return Err(Error::Config(format!(
            "p2 range must be increasing, got ({lo}, {hi})"
        )));
    }
    // (node, weight) pairs on [lo, hi].
    let pairs: Vec<(f64, f64)> = match quadrature {
        P2Quadrature::Trapezoid { nodes } => {
            if nodes < 2 {
                return Err(Error::Config("trapezoid rule needs >= 2 nodes".into()));
            }
            let h = (hi - lo) / (nodes - 1) as f64;
            (0..nodes)
                .map(|i| {
                    let w = if i == 0 || i == nodes - 1 { 0.5 * h } else { h };
                    (lo + h * i as f64, w)
                })
                .collect()
        }
        P2Quadrature::GaussLegendre { nodes } => {
            if nodes < 2 {
                return Err(Error::Config("Gauss rule needs >= 2 nodes".into()));
            }
            gauss_legendre_nodes(nodes)
                .into_iter()
                .map(|(t, w)| (0.5 * (hi + lo) + 0.5 * (hi - lo) * t, 0.5 * (hi - lo) * w))
                .collect()
        }
        P2Quadrature::Delta { .. } => unreachable!(),
    };
    let mut acc = vec![0.0_f64; grid.n_points];
    let mut total_l1 = 0.0_f64;
    for &(p2, w) in &pairs {
        let mode = charge_density_mode(sys, n, p2, m, grid)?;
        for (a, v) in acc.iter_mut().zip(&mode.values) {
            *a += w * mode.coefficient * v;
        }
        total_l1 += mode
            .values
            .iter()
            .map(|v| (w * mode.coefficient * v).abs())
            .sum::<f64>();
    }
    // Tail screen: the integrand at the range boundary must be negligible.
    let mut boundary_l1 = 0.0_f64;
    let edge_w = (hi - lo) / pairs.len() as f64;
    for p2 in [lo, hi] {
        let mode = charge_density_mode(sys, n, p2, m, grid)?;
        boundary_l1 += mode
            .values
            .iter()
            .map(|v| (edge_w * mode.coefficient * v).abs())
            .sum::<f64>();
    }
    if total_l1 > 0.0 && boundary_l1 > 1e-4 * total_l1 {
        return Err(Error::Tail(format!(
            "p2 integrand has not decayed at the range boundary \
             (boundary/total = {:.3e})",
            boundary_l1 / total_l1
        )));
    }
    Ok(DensityProfile {
        kind: DensityKind::ChargeMode,
        n,
        p2: f64::NAN, // integrated out
        m,
        grid,
        values: acc,
        coefficient: 1.0,
        prefactor: "pi e".into(),
    })
}

// ---------------------------------------------------------------------------
// The alpha -> 0 limit scan
// ---------------------------------------------------------------------------

/// One row of [`LimitScanReport`].
#[derive(Debug, Clone, Copy)]
pub struct LimitScanRow {
    pub alpha: f64,
    /// `max_n |k_n^+(alpha) - omega n|` over `1..=n_max`.
    pub err_k: f64,
    /// `sup_x |W0(alpha, x) - W0_unif(x)|` on the fixed window.
    pub err_w0: f64,
    /// `sup_x |V0^+(alpha, x) - V0^+_unif(x)|` on the fixed window.
    pub err_v0: f64,
    /// `sup_x |rho0_exp(alpha, x) - rho0_unif(x)|`.
    pub rho0_sup_diff: f64,
    /// The same, relative to `sup_x rho0_unif(x)`.
    pub rho0_rel_diff: f64,
}

/// Limit-scan report: seed-level quantities converge to the uniform case as
/// `alpha -> 0` at fixed `omega = 2 e B0` (via `D = omega/(2 alpha)`), while
/// the transformed ground density does not.
#[derive(Debug, Clone)]
pub struct LimitScanReport {
    pub omega: f64,
    pub p2: f64,
    /// Window used for the `W0`/`V0` sups.
    pub seed_window: (f64, f64),
    /// Window used for the `rho0` comparison.
    pub rho_window: (f64, f64),
    pub rows: Vec<LimitScanRow>,
}

/// Runs the scan. `base` must be an exponential-seed configuration; its
/// `alpha` and `epsilon1` are overridden per step (`epsilon1 = -k_1^+/5`,
/// the figure-family rule), and the uniform reference shares `B0` and `p2`
/// with `epsilon1 = -omega/5`, `nu1 = 0`.
pub fn limit_scan_alpha(
    base: FieldConfig,
    alphas: &[f64],
    n_max: usize,
) -> Result<LimitScanReport> {
    if base.seed_kind != SeedKind::Exponential {
        return Err(Error::Config(
            "the limit scan varies the exponential seed; pass an exponential \
             configuration"
                .into(),
        ));
    }
    if alphas.is_empty() {
        return Err(Error::Config("need at least one alpha".into()));
    }
    if !alphas.windows(2).all(|w| w[1] < w[0]) || alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::Config(
            "alphas must be positive and strictly decreasing".into(),
        ));
    }
    let omega = 2.0 * base.e_charge * base.b0;
    let mut uniform_cfg = base;
    uniform_cfg.seed_kind = SeedKind::Uniform;
    uniform_cfg.alpha = 0.0;
    uniform_cfg.epsilon1 = -omega / 5.0;
    uniform_cfg.nu1 = 0.0;
    let uniform = IntertwinedSystem::new(uniform_cfg)?;

    let seed_window = (-6.0, 6.0);
    let rho_window = (-10.0, 4.0);
    let seed_xs: Vec<f64> = (0..=240)
        .map(|i| seed_window.0 + (seed_window.1 - seed_window.0) * i as f64 / 240.0)
        .collect();
    let rho_xs: Vec<f64> = (0..=280)
        .map(|i| rho_window.0 + (rho_window.1 - rho_window.0) * i as f64 / 280.0)
        .collect();
    let rho_unif: Vec<f64> = rho_xs
        .iter()
        .map(|&x| {
            let f = uniform.transformed_eigenfunction(0, x)?;
            Ok(f * f)
        })
        .collect::<Result<_>>()?;
    let sup_rho_unif = rho_unif.iter().fold(0.0_f64, |m, &v| m.max(v));

    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut cfg = base;
        cfg.alpha = alpha;
        // q2 = p2 + e B0/alpha; the figure-family factorization energy rule
        // epsilon1 = -k_1^+/5 keeps the added level a fixed fraction below
        // the first excited one.
        let q2 = cfg.p2 + base.e_charge * base.b0 / alpha;
        let k1 = alpha * (2.0 * q2 - alpha);
        cfg.epsilon1 = -k1 / 5.0;
        let sys = IntertwinedSystem::new(cfg)?;

        let mut err_k = 0.0_f64;
        for n in 1..=n_max {
            let ke = sys.seed().seed_eigenvalue(n, Sigma::Plus)?;
            err_k = err_k.max((ke - omega * n as f64).abs());
        }
        let mut err_w0 = 0.0_f64;
        let mut err_v0 = 0.0_f64;
        for &x in &seed_xs {
            err_w0 = err_w0
                .max((sys.seed().superpotential_w0(x) - uniform.seed().superpotential_w0(x)).abs());
            err_v0 = err_v0.max(
                (sys.seed().partner_potential_v0(Sigma::Plus, x)
                    - uniform.seed().partner_potential_v0(Sigma::Plus, x))
                .abs(),
            );
        }
        let mut rho0_sup_diff = 0.0_f64;
        for (&x, &ru) in rho_xs.iter().zip(&rho_unif) {
            let f = sys.transformed_eigenfunction(0, x)?;
            rho0_sup_diff = rho0_sup_diff.max((f * f - ru).abs());
        }
        rows.push(LimitScanRow {
            alpha,
            err_k,
            err_w0,
            err_v0,
            rho0_sup_diff,
            rho0_rel_diff: rho0_sup_diff / sup_rho_unif,
        });
    }
    Ok(LimitScanReport {
        omega,
        p2: base.p2,
        seed_window,
        rho_window,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
