//! Dense Hermitian operators, interpolated Hamiltonian families and their
//! spectral decompositions.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, numeric, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Entrywise tolerance on `H - H†`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Slack on the `‖H₀‖, ‖H₁‖ ≤ 1` normalization.
pub const NORM_TOL: f64 = 1e-9;
/// Relative eigen-residual accepted from the eigensolver.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;
/// Relative scale of the default ground-space degeneracy tolerance.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;

const EIGEN_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Validate and wrap a dense matrix. The stored matrix is symmetrized so
    /// that round-off below [`HERMITIAN_TOL`] never leaks into the spectrum.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(domain(format!("operator must be square, got {r}x{c}")));
        }
        if r < 2 {
            return Err(domain("operator dimension must be at least 2"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain("operator has non-finite entries"));
        }
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in i..r {
                worst = worst.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if worst > HERMITIAN_TOL {
            return Err(domain(format!("operator is not Hermitian (max |H - H†| = {worst:e})")));
        }
        let adj = entries.adjoint();
        let entries = (entries + adj).scale(0.5);
        Ok(Self { entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Build from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im.iter()).any(|row| row.len() != n) {
            return Err(domain("real and imaginary parts must both be n x n"));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(re[i][j], im[i][j])))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.map(|z| z * factor),
        }
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        let ev = eigenvalues(self)?;
        Ok(ev.iter().fold(0.0f64, |m, &l| m.max(libm::fabs(l))))
    }

    /// Rows of real parts and imaginary parts, for serialization.
    pub fn to_parts(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = self.dim();
        let re = (0..n).map(|i| (0..n).map(|j| self.entries[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| self.entries[(i, j)].im).collect()).collect();
        (re, im)
    }
}

/// Endpoints of the interpolation `H(u) = (1 - u) H₀ + u H₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianPair {
    h0: HermitianOperator,
    h1: HermitianOperator,
    diff_norm: f64,
}

impl HamiltonianPair {
    /// Pair with the `‖H₀‖, ‖H₁‖ ≤ 1` normalization enforced.
    pub fn new(h0: HermitianOperator, h1: HermitianOperator) -> Result<Self> {
        Self::with_validation(h0, h1, true)
    }

    pub fn with_validation(h0: HermitianOperator, h1: HermitianOperator, enforce_norm: bool) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(domain(format!("dimension mismatch: {} vs {}", h0.dim(), h1.dim())));
        }
        if enforce_norm {
            for (name, h) in [("H0", &h0), ("H1", &h1)] {
                let norm = h.spectral_norm()?;
                if norm > 1.0 + NORM_TOL {
                    return Err(domain(format!(
                        "{name} has spectral norm {norm} > 1; rescale the pair first"
                    )));
                }
            }
        }
        let diff = HermitianOperator::new(h1.matrix() - h0.matrix())
            .or_else(|_| HermitianOperator::new(CMatrix::zeros(h0.dim(), h0.dim())))?;
        let diff_norm = diff.spectral_norm()?;
        Ok(Self { h0, h1, diff_norm })
    }

    /// Divide both endpoints by the larger of their spectral norms. Returns
    /// the normalized pair and the factor that was divided out.
    pub fn rescaled(h0: HermitianOperator, h1: HermitianOperator) -> Result<(Self, f64)> {
        let scale = h0.spectral_norm()?.max(h1.spectral_norm()?);
        if scale == 0.0 {
            return Err(domain("cannot rescale a pair of zero operators"));
        }
        let pair = Self::new(h0.scaled(1.0 / scale), h1.scaled(1.0 / scale))?;
        Ok((pair, scale))
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn h1(&self) -> &HermitianOperator {
        &self.h1
    }

    /// `A = ‖H₁ − H₀‖₂`.
    pub fn diff_norm(&self) -> f64 {
        self.diff_norm
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// `λ₂(u) − λ₁(u)`.
    pub fn gap_at(&self, u: f64) -> Result<f64> {
        let ev = eigenvalues(&interpolate(self, u)?)?;
        Ok(ev[1] - ev[0])
    }
}

/// `(1 − u)·H₀ + u·H₁`, entrywise.
pub fn interpolate(pair: &HamiltonianPair, u: f64) -> Result<HermitianOperator> {
    if !(0.0..=1.0).contains(&u) {
        return Err(domain(format!("interpolation parameter u = {u} outside [0, 1]")));
    }
    Ok(interpolate_unchecked(pair, u))
}

pub(crate) fn interpolate_unchecked(pair: &HamiltonianPair, u: f64) -> HermitianOperator {
    let a = 1.0 - u;
    let entries = pair.h0.entries.zip_map(&pair.h1.entries, |x, y| x * a + y * u);
    HermitianOperator { entries }
}

/// Adiabatic Grover pair on `N` items: `H₀ = I − |φ⟩⟨φ|` with `φ` the uniform
/// superposition, `H₁ = I − |m⟩⟨m|`.
pub fn build_grover(num_items: usize, marked: usize) -> Result<HamiltonianPair> {
    if num_items < 2 {
        return Err(domain(format!("Grover needs N >= 2, got {num_items}")));
    }
    if marked >= num_items {
        return Err(domain(format!("marked index {marked} out of range for N = {num_items}")));
    }
    let n = num_items;
    let inv_n = 1.0 / n as f64;
    let h0 = CMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id - inv_n, 0.0)
    });
    let h1 = CMatrix::from_fn(n, n, |i, j| {
        let v = if i == j && i != marked { 1.0 } else { 0.0 };
        Complex64::new(v, 0.0)
    });
    HamiltonianPair::new(HermitianOperator::new(h0)?, HermitianOperator::new(h1)?)
}

/// The Grover pair restricted to its invariant subspace
/// `span{|m⟩, |m⊥⟩}`, where `|m⊥⟩` is the normalized component of the uniform
/// state orthogonal to the marked one. The dynamics started in the ground
/// state never leaves this subspace and the gap equals the full-space gap.
pub fn build_grover_reduced(num_items: usize) -> Result<HamiltonianPair> {
    if num_items < 2 {
        return Err(domain(format!("Grover needs N >= 2, got {num_items}")));
    }
    let a = libm::sqrt(1.0 / num_items as f64);
    let b = libm::sqrt(1.0 - 1.0 / num_items as f64);
    let c = |x: f64| Complex64::new(x, 0.0);
    let h0 = CMatrix::from_row_slice(2, 2, &[c(1.0 - a * a), c(-a * b), c(-a * b), c(1.0 - b * b)]);
    let h1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
    HamiltonianPair::new(HermitianOperator::new(h0)?, HermitianOperator::new(h1)?)
}

/// Adiabatic linear-system pair: `H₀ = σx ⊗ Q_b`,
/// `H₁ = σ₊ ⊗ (A Q_b) + σ₋ ⊗ (Q_b A)` with `Q_b = I − |b⟩⟨b|`.
pub fn build_qlsa(matrix_a: &CMatrix, vector_b: &CVector) -> Result<HamiltonianPair> {
    let (r, c) = matrix_a.shape();
    if r != c || r == 0 {
        return Err(domain("A must be a non-empty square matrix"));
    }
    if vector_b.len() != r {
        return Err(domain(format!("b has length {} but A is {r}x{r}", vector_b.len())));
    }
    let b_norm = vector_b.norm();
    if (b_norm - 1.0).abs() > 1e-10 {
        return Err(domain(format!("b must be normalized, |b| = {b_norm}")));
    }
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            worst = worst.max((matrix_a[(i, j)] - matrix_a[(j, i)].conj()).norm());
        }
    }
    if worst > HERMITIAN_TOL {
        return Err(domain(format!("A is not Hermitian (max |A - A†| = {worst:e})")));
    }
    let a_eigs = matrix_a
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or_else(|| numeric("eigensolver failed on A", f64::NAN))?
        .eigenvalues;
    let (lo, hi) = a_eigs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| {
        (lo.min(l), hi.max(libm::fabs(l)))
    });
    if lo <= 1e-12 * hi.max(1.0) {
        return Err(domain(format!("A must be positive definite and nonsingular (min eigenvalue {lo:e})")));
    }
    if hi > 1.0 + NORM_TOL {
        return Err(domain(format!("‖A‖ = {hi} exceeds 1")));
    }

    let qb = CMatrix::identity(r, r) - vector_b * vector_b.adjoint();
    let aq = matrix_a * &qb;
    let qa = &qb * matrix_a;
    let zero = Complex64::new(0.0, 0.0);
    let block = |top_right: &CMatrix, bottom_left: &CMatrix| {
        CMatrix::from_fn(2 * r, 2 * r, |i, j| match (i < r, j < r) {
            (true, false) => top_right[(i, j - r)],
            (false, true) => bottom_left[(i - r, j)],
            _ => zero,
        })
    };
    let h0 = block(&qb, &qb);
    let h1 = block(&aq, &qa);
    HamiltonianPair::new(HermitianOperator::new(h0)?, HermitianOperator::new(h1)?)
}

/// Eigenvalues ascending, eigenvectors as orthonormal columns in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `λ₂ − λ₁`.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    /// Largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(libm::fabs(l)))
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        scaled * v.adjoint()
    }

    /// `1e-8 · ‖H‖`, the default ground-space degeneracy tolerance.
    pub fn default_degeneracy_tol(&self) -> f64 {
        DEGENERACY_REL_TOL * self.norm()
    }

    /// Number of eigenvalues within `tol` of the ground energy.
    pub fn ground_rank(&self, tol: f64) -> usize {
        let e0 = self.eigenvalues[0];
        self.eigenvalues.iter().take_while(|&&l| l - e0 <= tol).count()
    }

    /// `⟨ψ|P₀|ψ⟩` without forming the projector.
    pub fn ground_population(&self, tol: f64, psi: &CVector) -> f64 {
        let rank = self.ground_rank(tol);
        (0..rank)
            .map(|j| self.eigenvectors.column(j).dotc(psi).norm_sqr())
            .sum()
    }

    /// `exp(−i·τ·H)·ψ`.
    pub fn apply_exp(&self, tau: f64, psi: &CVector) -> CVector {
        let v = &self.eigenvectors;
        let mut coeffs = v.adjoint() * psi;
        for (c, &l) in coeffs.iter_mut().zip(&self.eigenvalues) {
            let (s, co) = libm::sincos(-tau * l);
            *c *= Complex64::new(co, s);
        }
        v * coeffs
    }
}

/// Full eigendecomposition, validated against the eigen-residual and
/// orthonormality invariants.
pub fn spectral_decompose(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let eig = h
        .entries
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or_else(|| numeric("Hermitian eigensolver did not converge", f64::NAN))?;
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let dec = SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    };

    let scale = dec.norm().max(f64::MIN_POSITIVE);
    let hv = &h.entries * &dec.eigenvectors;
    let mut worst = 0.0f64;
    for (j, &l) in dec.eigenvalues.iter().enumerate() {
        let r = (hv.column(j) - dec.eigenvectors.column(j) * Complex64::new(l, 0.0)).norm();
        worst = worst.max(r);
    }
    if worst > EIGEN_RESIDUAL_TOL * scale.max(1e-300) && worst > 1e-13 {
        return Err(numeric("eigen-residual above tolerance", worst));
    }
    Ok(dec)
}

/// Eigenvalues only, ascending. Closed form for 2x2.
pub fn eigenvalues(h: &HermitianOperator) -> Result<Vec<f64>> {
    let m = &h.entries;
    if h.dim() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let mean = 0.5 * (a + d);
        let r = libm::hypot(0.5 * (a - d), m[(0, 1)].norm());
        return Ok(alloc::vec![mean - r, mean + r]);
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Projector onto the eigenvectors with `λᵢ − λ₁ ≤ degeneracy_tol`.
pub fn ground_projector(dec: &SpectralDecomposition, degeneracy_tol: f64) -> Result<HermitianOperator> {
    if !(degeneracy_tol > 0.0) {
        return Err(domain("degeneracy tolerance must be positive"));
    }
    let rank = dec.ground_rank(degeneracy_tol);
    let v = dec.eigenvectors.columns(0, rank);
    let p = &v * v.adjoint();
    HermitianOperator::new(p).map_err(|e| match e {
        Error::Domain(m) => numeric(m, f64::NAN),
        other => other,
    })
}
