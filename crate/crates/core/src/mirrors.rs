//! Block propagators and coupled quantum Householder reflections.
//!
//! Given an MS decomposition and Cayley-Klein parameters `(a_n, b_n)` for
//! each channel, the propagator in the original basis is
//!
//! ```text
//! U_N  = Σ a_n |α_n><α_n| + Σ |γ_k><γ_k|
//! U_NM = Σ b_n |α_n><β_n|
//! U_MN = -e^{-iδ} Σ b_n* |β_n><α_n|
//! U_M  = e^{-iδ} Σ a_n* |β_n><β_n|
//! ```
//!
//! When every `b_n` vanishes, `a_n = e^{iφ_n}` and the lower block becomes a
//! product of commuting reflections `M(α_n; φ_n) = I + (e^{iφ_n} - 1)|α_n><α_n|`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, ComplexVector};
use crate::morris_shore::MsDecomposition;
use crate::two_state::CayleyKlein;

/// Default tolerance on `max |b_n|` for analytic constructions.
pub const REFLECTION_TOL_ANALYTIC: f64 = 1e-8;
/// Default tolerance on `max |b_n|` for numerically integrated far-off channels.
pub const REFLECTION_TOL_FAR_OFF: f64 = 0.05;

const DELTA_MATCH_TOL: f64 = 1e-9;

/// The four blocks of the full `(N+M)`-dimensional propagator.
#[derive(Debug, Clone)]
pub struct BlockPropagator {
    pub u_n: ComplexMatrix,
    pub u_nm: ComplexMatrix,
    pub u_mn: ComplexMatrix,
    pub u_m: ComplexMatrix,
    /// Shared detuning phase `δ`, already applied to `u_mn` and `u_m`.
    pub delta: f64,
}

impl BlockPropagator {
    pub fn lower_dim(&self) -> usize {
        self.u_n.rows()
    }

    pub fn upper_dim(&self) -> usize {
        self.u_m.rows()
    }

    /// `[[U_N, U_NM], [U_MN, U_M]]`
    pub fn full(&self) -> ComplexMatrix {
        let (n, m) = (self.lower_dim(), self.upper_dim());
        let mut u = ComplexMatrix::zeros(n + m, n + m);
        u.set_block(0, 0, &self.u_n);
        u.set_block(0, n, &self.u_nm);
        u.set_block(n, 0, &self.u_mn);
        u.set_block(n, n, &self.u_m);
        u
    }

    /// The same propagator in the interaction representation, where the
    /// `e^{-iδ}` factor on the upper rows disappears.
    pub fn interaction_picture(&self) -> Self {
        let undo = C64::from_polar(1.0, self.delta);
        Self {
            u_n: self.u_n.clone(),
            u_nm: self.u_nm.clone(),
            u_mn: self.u_mn.scale(undo),
            u_m: self.u_m.scale(undo),
            delta: 0.0,
        }
    }

    /// `||U_NM||_max²`, the largest lower-to-upper transition probability.
    pub fn max_leakage(&self) -> f64 {
        self.u_nm.max_abs().powi(2).max(self.u_mn.max_abs().powi(2))
    }
}

/// A generalized quantum Householder reflection `M(ν; φ)`.
#[derive(Debug, Clone)]
pub struct HouseholderOp {
    pub nu: ComplexVector,
    pub phi: f64,
}

impl HouseholderOp {
    /// Normalises `nu`; fails for a zero vector.
    pub fn new(nu: &ComplexVector, phi: f64) -> Result<Self> {
        let nu = nu
            .normalized()
            .ok_or_else(|| Error::Validation("Householder vector must be nonzero".into()))?;
        Ok(Self { nu, phi })
    }

    /// `I + (e^{iφ} - 1)|ν><ν|`
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.nu.dim();
        let c = C64::from_polar(1.0, self.phi) - 1.0;
        let mut m = ComplexMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += c * self.nu[i] * self.nu[j].conj();
            }
        }
        m
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        let c = C64::from_polar(1.0, self.phi) - 1.0;
        let mut out = v.clone();
        out.axpy(c * self.nu.dot(v), &self.nu);
        out
    }

    /// `M(ν; φ)⁻¹ = M(ν; -φ)`
    pub fn inverse(&self) -> Self {
        Self {
            nu: self.nu.clone(),
            phi: -self.phi,
        }
    }
}

/// `M(ν; φ) = I + (e^{iφ} - 1)|ν><ν|`, with `ν` normalised internally.
pub fn householder(nu: &ComplexVector, phi: f64) -> Result<ComplexMatrix> {
    Ok(HouseholderOp::new(nu, phi)?.matrix())
}

fn check_channels(ms: &MsDecomposition, count: usize, what: &str) -> Result<()> {
    if count != ms.upper_dim() {
        return Err(Error::Validation(format!(
            "expected {} {what} (one per upper MS state), got {count}",
            ms.upper_dim()
        )));
    }
    Ok(())
}

/// Assembles the block propagator from MS states and per-channel parameters.
///
/// `cks[n]` belongs to channel `n` of `ms`. Channels without a bright partner
/// (zero coupling) only contribute `e^{-iδ} a_n* |β_n><β_n|`.
pub fn assemble_full(ms: &MsDecomposition, cks: &[CayleyKlein], delta: f64) -> Result<BlockPropagator> {
    check_channels(ms, cks.len(), "Cayley-Klein parameter sets")?;
    if let Some(ck) = cks
        .iter()
        .find(|ck| (ck.delta - delta).abs() > DELTA_MATCH_TOL * delta.abs().max(1.0))
    {
        return Err(Error::Validation(format!(
            "channels must share the detuning phase δ = {delta}, found {}",
            ck.delta
        )));
    }
    let (n, m) = (ms.lower_dim(), ms.upper_dim());
    let e = C64::from_polar(1.0, -delta);

    let mut u_n = ComplexMatrix::zeros(n, n);
    let mut u_nm = ComplexMatrix::zeros(n, m);
    let mut u_mn = ComplexMatrix::zeros(m, n);
    let mut u_m = ComplexMatrix::zeros(m, m);

    for (k, ck) in cks.iter().enumerate() {
        let beta = &ms.upper[k];
        u_m = &u_m + &ComplexMatrix::outer(beta, beta).scale(e * ck.a.conj());
        if let Some(alpha) = ms.bright.get(k) {
            u_n = &u_n + &ComplexMatrix::outer(alpha, alpha).scale(ck.a);
            u_nm = &u_nm + &ComplexMatrix::outer(alpha, beta).scale(ck.b);
            u_mn = &u_mn + &ComplexMatrix::outer(beta, alpha).scale(-e * ck.b.conj());
        }
    }
    for gamma in &ms.dark {
        u_n = &u_n + &ComplexMatrix::outer(gamma, gamma);
    }
    Ok(BlockPropagator {
        u_n,
        u_nm,
        u_mn,
        u_m,
        delta,
    })
}

/// The propagator in the MS basis, `Ũ`, ordered like `S = diag(A, B)`: bright
/// states, dark states, then upper MS states. `S† Ũ S` equals
/// [`assemble_full`]'s result.
pub fn ms_basis_propagator(ms: &MsDecomposition, cks: &[CayleyKlein], delta: f64) -> Result<ComplexMatrix> {
    check_channels(ms, cks.len(), "Cayley-Klein parameter sets")?;
    let (n, m) = (ms.lower_dim(), ms.upper_dim());
    let r = ms.rank();
    let e = C64::from_polar(1.0, -delta);
    let mut u = ComplexMatrix::zeros(n + m, n + m);
    for i in r..n {
        u[(i, i)] = C64::new(1.0, 0.0);
    }
    for (k, ck) in cks.iter().enumerate() {
        u[(n + k, n + k)] = ck.a.conj() * e;
        if k < r {
            u[(k, k)] = ck.a;
            u[(k, n + k)] = ck.b;
            u[(n + k, k)] = -ck.b.conj() * e;
        }
    }
    Ok(u)
}

/// True iff every `|b_n| <= tol`.
pub fn reflection_condition(cks: &[CayleyKlein], tol: f64) -> bool {
    cks.iter().all(|ck| ck.b.norm() <= tol)
}

/// Lower and upper propagators under the reflection condition, with their
/// Householder factors (descending coupling order).
#[derive(Debug, Clone)]
pub struct CoupledMirrors {
    /// `Π M(α_n; φ_n)`
    pub u_n: ComplexMatrix,
    /// `e^{-iδ} Π M(β_n; -φ_n)`
    pub u_m: ComplexMatrix,
    pub lower_factors: Vec<HouseholderOp>,
    pub upper_factors: Vec<HouseholderOp>,
    pub delta: f64,
}

impl CoupledMirrors {
    /// As a block propagator with vanishing off-diagonal blocks.
    pub fn to_block(&self) -> BlockPropagator {
        let (n, m) = (self.u_n.rows(), self.u_m.rows());
        BlockPropagator {
            u_n: self.u_n.clone(),
            u_nm: ComplexMatrix::zeros(n, m),
            u_mn: ComplexMatrix::zeros(m, n),
            u_m: self.u_m.clone(),
            delta: self.delta,
        }
    }
}

/// Builds the coupled-mirror propagators from reflection phases `phis`, one
/// per upper MS state. The reflection condition is assumed.
pub fn coupled_mirrors(ms: &MsDecomposition, phis: &[f64], delta: f64) -> Result<CoupledMirrors> {
    check_channels(ms, phis.len(), "phases")?;
    let (n, m) = (ms.lower_dim(), ms.upper_dim());
    let lower_factors: Vec<HouseholderOp> = ms
        .bright
        .iter()
        .zip(phis)
        .map(|(alpha, &phi)| HouseholderOp::new(alpha, phi))
        .collect::<Result<_>>()?;
    let upper_factors: Vec<HouseholderOp> = ms
        .upper
        .iter()
        .zip(phis)
        .map(|(beta, &phi)| HouseholderOp::new(beta, -phi))
        .collect::<Result<_>>()?;

    let u_n = lower_factors
        .iter()
        .fold(ComplexMatrix::identity(n), |acc, f| &acc * &f.matrix());
    let u_m = upper_factors
        .iter()
        .fold(ComplexMatrix::identity(m), |acc, f| &acc * &f.matrix())
        .scale(C64::from_polar(1.0, -delta));
    Ok(CoupledMirrors {
        u_n,
        u_m,
        lower_factors,
        upper_factors,
        delta,
    })
}

/// Sum form `I + Σ (e^{iφ_n} - 1)|α_n><α_n|` of the lower propagator.
pub fn lower_sum_form(ms: &MsDecomposition, phis: &[f64]) -> Result<ComplexMatrix> {
    check_channels(ms, phis.len(), "phases")?;
    let mut u = ComplexMatrix::identity(ms.lower_dim());
    for (alpha, &phi) in ms.bright.iter().zip(phis) {
        u = &u + &ComplexMatrix::outer(alpha, alpha).scale(C64::from_polar(1.0, phi) - 1.0);
    }
    Ok(u)
}

/// Outcome of [`eigenstructure_check`].
#[derive(Debug, Clone)]
pub struct EigenstructureReport {
    /// `||U_N α_n - e^{iφ_n} α_n||` per bright state.
    pub bright_residuals: Vec<f64>,
    /// Largest `||U_N v - v||` over an orthonormal basis of the complement
    /// of the bright states.
    pub fixed_residual: f64,
    /// Dimension of `{v : U_N v = v}`, from the spectrum of `(U_N - I)†(U_N - I)`.
    pub fixed_dim: usize,
    /// For `N = 3`, two bright states: `1 - |<w|γ>|` where `w ∝ (α_1 × α_2)*`
    /// and `γ` is the fixed vector.
    pub cross_product_defect: Option<f64>,
}

impl EigenstructureReport {
    pub fn max_residual(&self) -> f64 {
        self.bright_residuals
            .iter()
            .copied()
            .fold(self.fixed_residual, f64::max)
            .max(self.cross_product_defect.unwrap_or(0.0))
    }
}

/// Verifies that bright states are eigenvectors of `u_n` with eigenvalues
/// `e^{iφ_n}` and that their orthogonal complement is left unchanged.
pub fn eigenstructure_check(u_n: &ComplexMatrix, ms: &MsDecomposition, phis: &[f64]) -> Result<EigenstructureReport> {
    check_channels(ms, phis.len(), "phases")?;
    let n = ms.lower_dim();
    if u_n.rows() != n || u_n.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} lower propagator"),
            found: format!("{}x{}", u_n.rows(), u_n.cols()),
        });
    }
    let bright_residuals = ms
        .bright
        .iter()
        .zip(phis)
        .map(|(alpha, &phi)| (&u_n.mul_vec(alpha) - &alpha.scale(C64::from_polar(1.0, phi))).norm())
        .collect();
    let fixed_residual = ms.dark.iter().map(|g| (&u_n.mul_vec(g) - g).norm()).fold(0.0, f64::max);

    let d = u_n - &ComplexMatrix::identity(n);
    let spectrum = hermitian_eig(&(&d.adjoint() * &d))?;
    let fixed_dim = spectrum.values.iter().filter(|&&x| x < 1e-12).count();

    let cross_product_defect = if n == 3 && ms.rank() == 2 && ms.dark.len() == 1 {
        let (a, b) = (&ms.bright[0], &ms.bright[1]);
        let w = ComplexVector::new(vec![
            (a[1] * b[2] - a[2] * b[1]).conj(),
            (a[2] * b[0] - a[0] * b[2]).conj(),
            (a[0] * b[1] - a[1] * b[0]).conj(),
        ])?;
        let w = w
            .normalized()
            .ok_or_else(|| Error::Consistency("bright states are parallel".into()))?;
        Some(1.0 - w.dot(&ms.dark[0]).norm())
    } else {
        None
    };

    Ok(EigenstructureReport {
        bright_residuals,
        fixed_residual,
        fixed_dim,
        cross_product_defect,
    })
}
