//! Morris-Shore decomposition of a degenerate two-level interaction.
//!
//! The `N x M` interaction matrix `V` couples `N` lower sublevels to `M` upper
//! sublevels. Diagonalising the Gram matrix `V†V` gives the upper MS states
//! `|β_n>` and couplings `λ_n² `; the bright lower states follow as
//! `|α_n> = V|β_n> / λ_n`, which fixes the relative phase of every
//! `(α_n, β_n)` pair so that `A V B†` is real, nonnegative and diagonal. The
//! rest of the lower space is dark.
//!
//! Inputs with `N < M` need no special handling: upper states with zero
//! coupling simply have no bright partner and evolve with the detuning alone.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, orthonormal_complement, ComplexMatrix, ComplexVector};

/// Default rank tolerance, relative to `||V||`.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Coupling constants `V_mn` between `N` lower and `M` upper sublevels, in
/// units of `1/T`. Columns are the interaction vectors `|V_n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    v: ComplexMatrix,
}

impl InteractionMatrix {
    pub fn new(v: ComplexMatrix) -> Result<Self> {
        if v.rows() == 0 || v.cols() == 0 {
            return Err(Error::Validation(format!(
                "interaction matrix needs at least one lower and one upper state, got {}x{}",
                v.rows(),
                v.cols()
            )));
        }
        // Entry finiteness is enforced by ComplexMatrix itself.
        Ok(Self { v })
    }

    /// Builds `V = [|V_1>, ..., |V_M>]` from interaction vectors.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let n = columns.first().map_or(0, ComplexVector::dim);
        if let Some(bad) = columns.iter().position(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: format!("interaction vectors of dimension {n}"),
                found: format!("dimension {} for column {bad}", columns[bad].dim()),
            });
        }
        Self::new(ComplexMatrix::from_columns(n, columns))
    }

    /// Number of lower sublevels `N`.
    pub fn lower_dim(&self) -> usize {
        self.v.rows()
    }

    /// Number of upper sublevels `M`.
    pub fn upper_dim(&self) -> usize {
        self.v.cols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.v
    }

    /// Interaction vector `|V_n>`.
    pub fn column(&self, n: usize) -> ComplexVector {
        self.v.column(n)
    }

    /// Frobenius norm, the scale used for every relative tolerance here.
    pub fn norm(&self) -> f64 {
        self.v.frobenius_norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            v: self.v.scale(C64::new(s, 0.0)),
        }
    }

    /// Restriction to a subset of lower and upper sublevels.
    pub fn select(&self, lower: &[usize], upper: &[usize]) -> Result<Self> {
        Self::new(self.v.select(lower, upper))
    }
}

/// Gram matrices `(V V†, V† V)`.
pub fn gram_matrices(v: &InteractionMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let m = v.matrix();
    let mh = m.adjoint();
    (m * &mh, &mh * m)
}

/// The Morris-Shore basis of a degenerate two-level linkage.
///
/// Channel `n < rank()` pairs `bright[n]` with `upper[n]` at coupling
/// `lambdas[n] > 0`. Upper states at index `>= rank()` have zero coupling.
#[derive(Debug, Clone)]
pub struct MsDecomposition {
    /// MS couplings, descending; one per upper state.
    pub lambdas: Vec<f64>,
    /// Bright lower states `|α_n>`.
    pub bright: Vec<ComplexVector>,
    /// Upper MS states `|β_n>`.
    pub upper: Vec<ComplexVector>,
    /// Dark lower states `|γ_k>`.
    pub dark: Vec<ComplexVector>,
}

impl MsDecomposition {
    pub fn lower_dim(&self) -> usize {
        self.bright.len() + self.dark.len()
    }

    pub fn upper_dim(&self) -> usize {
        self.upper.len()
    }

    /// Number of bright channels.
    pub fn rank(&self) -> usize {
        self.bright.len()
    }

    /// Lower-set transformation `A`: rows `<α_1| ... <α_r|, <γ_1| ... `.
    pub fn a_matrix(&self) -> ComplexMatrix {
        let n = self.lower_dim();
        let rows: Vec<&ComplexVector> = self.bright.iter().chain(&self.dark).collect();
        ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].conj())
    }

    /// Upper-set transformation `B`: rows `<β_n|`.
    pub fn b_matrix(&self) -> ComplexMatrix {
        let m = self.upper_dim();
        ComplexMatrix::from_fn(m, m, |i, j| self.upper[i][j].conj())
    }

    /// Full block-diagonal transformation `S = diag(A, B)`.
    pub fn s_matrix(&self) -> ComplexMatrix {
        let (n, m) = (self.lower_dim(), self.upper_dim());
        let mut s = ComplexMatrix::zeros(n + m, n + m);
        s.set_block(0, 0, &self.a_matrix());
        s.set_block(n, n, &self.b_matrix());
        s
    }

    /// `A V B†`, diagonal-rectangular for a valid decomposition of `v`.
    pub fn transformed_coupling(&self, v: &InteractionMatrix) -> ComplexMatrix {
        &(&self.a_matrix() * v.matrix()) * &self.b_matrix().adjoint()
    }

    /// Max deviations of the completeness relations for the lower and upper
    /// sets from the identity.
    pub fn completeness_residual(&self) -> (f64, f64) {
        let (n, m) = (self.lower_dim(), self.upper_dim());
        let mut lower = ComplexMatrix::zeros(n, n);
        for v in self.bright.iter().chain(&self.dark) {
            lower = &lower + &ComplexMatrix::outer(v, v);
        }
        let mut upper = ComplexMatrix::zeros(m, m);
        for v in &self.upper {
            upper = &upper + &ComplexMatrix::outer(v, v);
        }
        (
            lower.max_abs_diff(&ComplexMatrix::identity(n)),
            upper.max_abs_diff(&ComplexMatrix::identity(m)),
        )
    }

    /// `V = Σ λ_n |α_n><β_n|` over the bright channels, with the given couplings.
    /// Keeps the MS states and replaces the couplings, which is how a phase
    /// design is mapped back to an interaction matrix.
    pub fn synthesize(&self, lambdas: &[f64]) -> Result<InteractionMatrix> {
        if lambdas.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} bright couplings", self.rank()),
                found: format!("{}", lambdas.len()),
            });
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::Validation(format!(
                "couplings must be finite and nonnegative, got {bad}"
            )));
        }
        let mut v = ComplexMatrix::zeros(self.lower_dim(), self.upper_dim());
        for ((alpha, beta), &l) in self.bright.iter().zip(&self.upper).zip(lambdas) {
            v = &v + &ComplexMatrix::outer(alpha, beta).scale(C64::new(l, 0.0));
        }
        InteractionMatrix::new(v)
    }
}

/// Computes the MS decomposition by diagonalising `V†V`.
///
/// `rank_tol` is relative to `||V||`: couplings with `λ_n <= rank_tol ||V||`
/// are treated as exactly zero and contribute to the dark space.
pub fn decompose(v: &InteractionMatrix, rank_tol: f64) -> Result<MsDecomposition> {
    if !(rank_tol > 0.0) {
        return Err(Error::Validation(format!("rank_tol must be positive, got {rank_tol}")));
    }
    let scale = v.norm();
    let (_, vdv) = gram_matrices(v);
    let eig = hermitian_eig(&vdv)?;
    let m = v.upper_dim();

    if let Some(&min) = eig.values.first() {
        if min < -1e-10 * scale * scale {
            return Err(Error::Consistency(format!(
                "Gram matrix has a negative eigenvalue {min:e} (||V||² = {:e})",
                scale * scale
            )));
        }
    }

    let cut = rank_tol * scale;
    let mut lambdas = Vec::with_capacity(m);
    let mut bright = Vec::new();
    let mut upper = Vec::with_capacity(m);
    let mut zero_upper = Vec::new();
    for k in (0..m).rev() {
        let beta = eig.vector(k);
        let image = v.matrix().mul_vec(&beta);
        let lambda = image.norm();
        if eig.values[k] > cut * cut && lambda > cut {
            bright.push(image.scale(C64::new(1.0 / lambda, 0.0)));
            lambdas.push(lambda);
            upper.push(beta);
        } else {
            zero_upper.push(beta);
        }
    }
    // Round-off can reorder nearly equal couplings computed as ||Vβ||.
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&i, &j| lambdas[j].total_cmp(&lambdas[i]));
    let lambdas_sorted: Vec<f64> = order.iter().map(|&i| lambdas[i]).collect();
    let bright: Vec<ComplexVector> = order.iter().map(|&i| bright[i].clone()).collect();
    let mut upper: Vec<ComplexVector> = order.iter().map(|&i| upper[i].clone()).collect();

    let mut lambdas = lambdas_sorted;
    lambdas.resize(m, 0.0);
    upper.extend(zero_upper);
    let dark = orthonormal_complement(&bright, v.lower_dim());
    Ok(MsDecomposition {
        lambdas,
        bright,
        upper,
        dark,
    })
}

/// Mixing angle and phase for two upper states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M2Angles {
    /// `θ ∈ [0, π/2)`, from `tan 2θ = 2|<V'|V''>| / (|V''|² - |V'|²)`.
    pub theta: f64,
    /// `σ = arg <V'|V''>`, in `(-π, π]`.
    pub sigma: f64,
    /// Set when `<V'|V''> = 0` and `|V'| = |V''|`: any MS basis works.
    pub degenerate: bool,
}

fn check_pair(vp: &ComplexVector, vpp: &ComplexVector) -> Result<()> {
    if vp.dim() != vpp.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("interaction vectors of dimension {}", vp.dim()),
            found: format!("dimension {}", vpp.dim()),
        });
    }
    if vp.norm() == 0.0 && vpp.norm() == 0.0 {
        return Err(Error::Validation("both interaction vectors are zero".into()));
    }
    Ok(())
}

/// θ and σ for the pair of interaction vectors `|V'>`, `|V''>`.
pub fn m2_theta_sigma(vp: &ComplexVector, vpp: &ComplexVector) -> Result<M2Angles> {
    check_pair(vp, vpp)?;
    let g = vp.dot(vpp);
    let (a, b) = (vp.norm_sqr(), vpp.norm_sqr());
    if g.norm() <= 1e-15 * (a * b).sqrt() {
        return Ok(M2Angles {
            theta: 0.0,
            sigma: 0.0,
            degenerate: (a - b).abs() <= 1e-15 * (a + b),
        });
    }
    // Equal norms up to round-off mean θ = π/4 exactly.
    let diff = if (b - a).abs() <= 8.0 * f64::EPSILON * (a + b) {
        0.0
    } else {
        b - a
    };
    let theta = 0.5 * (2.0 * g.norm()).atan2(diff);
    let mut sigma = g.arg();
    if sigma <= -PI {
        sigma += 2.0 * PI;
    }
    Ok(M2Angles {
        theta,
        sigma,
        degenerate: false,
    })
}

/// Closed-form MS decomposition for two upper states.
///
/// `|β_1> = (cos θ, -e^{-iσ} sin θ)` belongs to the smaller coupling and
/// `|β_2> = (e^{iσ} sin θ, cos θ)` to the larger; the returned channels are
/// ordered by descending coupling like [`decompose`].
pub fn m2_decompose(vp: &ComplexVector, vpp: &ComplexVector, rank_tol: f64) -> Result<MsDecomposition> {
    check_pair(vp, vpp)?;
    let angles = m2_theta_sigma(vp, vpp)?;
    let (a, b) = (vp.norm_sqr(), vpp.norm_sqr());
    let (c, s) = (angles.theta.cos(), angles.theta.sin());
    let e_sigma = C64::from_polar(1.0, angles.sigma);

    let beta1 = ComplexVector::from_vec_unchecked(vec![C64::new(c, 0.0), -e_sigma.conj() * s]);
    let beta2 = ComplexVector::from_vec_unchecked(vec![e_sigma * s, C64::new(c, 0.0)]);

    // λ_n = ||V β_n||, which stays accurate for nearly parallel vectors where
    // the closed-form λ² = mean ± radius loses the small root to cancellation.
    let image = |beta: &ComplexVector| {
        let mut alpha = vp.scale(beta[0]);
        alpha.axpy(beta[1], vpp);
        alpha
    };
    let mut channels: Vec<(f64, ComplexVector, ComplexVector)> = [beta1, beta2]
        .into_iter()
        .map(|beta| {
            let alpha = image(&beta);
            (alpha.norm(), alpha, beta)
        })
        .collect();
    channels.sort_by(|x, y| y.0.total_cmp(&x.0));

    let cut = rank_tol * (a + b).sqrt();
    let mut lambdas = Vec::with_capacity(2);
    let mut bright = Vec::new();
    let mut upper = Vec::with_capacity(2);
    let mut zero_upper = Vec::new();
    for (lambda, alpha, beta) in channels {
        if lambda > cut {
            bright.push(alpha.scale(C64::new(1.0 / lambda, 0.0)));
            lambdas.push(lambda);
            upper.push(beta);
        } else {
            zero_upper.push(beta);
        }
    }
    lambdas.resize(2, 0.0);
    upper.extend(zero_upper);
    let dark = orthonormal_complement(&bright, vp.dim());
    Ok(MsDecomposition {
        lambdas,
        bright,
        upper,
        dark,
    })
}
