//! Dense complex operator algebra: states, Hamiltonians, channels and the
//! Hermitian-preserving maps built from them.
//!
//! Tensor products follow the Kronecker convention `(i_a, i_b) -> i_a * dim_b + i_b`.
//! Choi matrices are ordered as (output ⊗ reference):
//! `J = Σ_ij Θ(|i⟩⟨j|) ⊗ |i⟩⟨j|`, so that `Θ(ρ) = Tr_R[(I ⊗ ρᵀ) J]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Entrywise Hermiticity tolerance for states and maps.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a positive semidefinite operator.
pub const PSD_FLOOR: f64 = -1e-9;
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on `ΣK†K = I`.
pub const TP_TOL: f64 = 1e-8;
pub const UNITARY_TOL: f64 = 1e-10;
/// Eigenvalue gap below which two Hamiltonian levels count as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-9;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// One factor of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare(m.nrows(), m.ncols()))
    }
}

/// `max |M - M†|` over entries.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().copied().sum()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    /// Rebuild `Σ f(λ_k) |v_k⟩⟨v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(f(lam));
        }
        from_faer(&(&to_faer(&scaled) * to_faer(&self.vectors).adjoint()))
    }
}

fn to_faer(h: &ComplexMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)])
}

fn from_faer(m: &faer::Mat<C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Matrix product `a b`, through a blocked SIMD kernel.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    from_faer(&(&to_faer(a) * &to_faer(b)))
}

/// `a b a†`.
pub fn congruence(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let fa = to_faer(a);
    from_faer(&(&(&fa * &to_faer(b)) * fa.adjoint()))
}

/// Hermitian eigendecomposition. The input is symmetrized first, so small
/// anti-Hermitian noise is ignored.
pub fn eigh(m: &ComplexMatrix) -> Spectrum {
    let h = hermitian_part(m);
    let n = h.nrows();
    if n == 0 {
        return Spectrum {
            values: Vec::new(),
            vectors: h,
        };
    }
    let eig = to_faer(&h)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("self-adjoint eigensolver converges on finite input");
    let s = eig.S().column_vector();
    let u = eig.U();
    let values = (0..n).map(|k| s[k].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    Spectrum { values, vectors }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &ComplexMatrix) -> Vec<f64> {
    let h = hermitian_part(m);
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut v = to_faer(&h)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("self-adjoint eigensolver converges on finite input");
    v.sort_by(f64::total_cmp);
    v
}

fn is_hermitian_exactish(m: &ComplexMatrix) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    hermitian_defect(m) <= 1e-12 * scale
}

/// Singular values of a (possibly rectangular) matrix via `M†M`.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let gram = if m.ncols() <= m.nrows() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    eigvalsh(&gram)
        .into_iter()
        .map(|x| if x < 1e-14 { 0.0 } else { x.sqrt() })
        .collect()
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Partial trace of an operator on `C^{d1} ⊗ C^{d2}`, keeping one factor.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Factor) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    let n = check_square(m)?;
    if n != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "operator is {n}x{n}, factors are {d1} and {d2}"
        )));
    }
    Ok(match keep {
        Factor::First => ComplexMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum()),
        Factor::Second => ComplexMatrix::from_fn(d2, d2, |i, j| (0..d1).map(|k| m[(k * d2 + i, k * d2 + j)]).sum()),
    })
}

/// Sum of singular values. Hermitian input goes through its eigenvalues.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if is_hermitian_exactish(m) {
        eigvalsh(m).iter().map(|x| x.abs()).sum()
    } else {
        singular_values(m).iter().sum()
    }
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if is_hermitian_exactish(m) {
        eigvalsh(m).iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    } else {
        singular_values(m).into_iter().fold(0.0, f64::max)
    }
}

/// Operator absolute value `|M| = sqrt(M†M)` of a Hermitian matrix.
pub fn hermitian_abs(m: &ComplexMatrix) -> ComplexMatrix {
    eigh(m).map(f64::abs)
}

/// `max |V†V - I|` entrywise.
pub fn unitarity_defect(v: &ComplexMatrix) -> f64 {
    let g = v.adjoint() * v;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Row-major vectorisation of a matrix: entry `(i, j)` goes to `i * ncols + j`.
pub fn vec_row_major(m: &ComplexMatrix) -> ComplexVector {
    let (r, c) = m.shape();
    ComplexVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

/// Inverse of [`vec_row_major`].
pub fn unvec_row_major(v: &[C64], rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// A positive unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix)?;
        if matrix.nrows() == 0 {
            return Err(Error::Domain("empty state".into()));
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let matrix = hermitian_part(&matrix);
        let min = eigvalsh(&matrix)[0];
        if min < PSD_FLOOR {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn from_pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Domain("pure state vector must be nonzero and finite".into()));
        }
        let u = psi / C64::new(norm, 0.0);
        Ok(Self {
            matrix: &u * u.adjoint(),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d, d) / C64::new(d as f64, 0.0),
        }
    }

    /// Projector onto computational basis vector `k`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(k, k)] = ONE;
        Self { matrix: m }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let m = ComplexMatrix::from_diagonal(&DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| C64::new(p, 0.0)),
        ));
        Self::new(m)
    }

    /// Wrap a matrix that is known to be a state up to rounding; it is
    /// symmetrized, clipped to be PSD and renormalized.
    pub fn from_matrix_lossy(m: &ComplexMatrix) -> Self {
        let spec = eigh(m);
        let total: f64 = spec.values.iter().map(|&x| x.max(0.0)).sum();
        let matrix = spec.map(|x| x.max(0.0) / total);
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }
}

/// A positive operator given by its spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    eigenvalues: Vec<f64>,
    eigenbasis: ComplexMatrix,
}

impl Hamiltonian {
    /// Build from eigenvalues and an optional unitary eigenbasis (columns are
    /// eigenvectors; identity by default). Levels are sorted nondecreasing.
    pub fn new(eigenvalues: Vec<f64>, eigenbasis: Option<ComplexMatrix>) -> Result<Self> {
        let d = eigenvalues.len();
        if d == 0 {
            return Err(Error::Domain("Hamiltonian needs at least one level".into()));
        }
        if eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(&neg) = eigenvalues.iter().find(|&&e| e < 0.0) {
            return Err(Error::Domain(format!("Hamiltonian eigenvalue {neg} is negative")));
        }
        let basis = match eigenbasis {
            Some(b) => {
                if b.shape() != (d, d) {
                    return Err(Error::DimensionMismatch(format!(
                        "eigenbasis is {}x{}, expected {d}x{d}",
                        b.nrows(),
                        b.ncols()
                    )));
                }
                check_finite(&b)?;
                let defect = unitarity_defect(&b);
                if defect > UNITARY_TOL {
                    return Err(Error::NotUnitary(defect));
                }
                b
            }
            None => ComplexMatrix::identity(d, d),
        };
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let sorted = order.iter().map(|&k| eigenvalues[k]).collect();
        let eigenbasis = ComplexMatrix::from_fn(d, d, |i, j| basis[(i, order[j])]);
        Ok(Self {
            eigenvalues: sorted,
            eigenbasis,
        })
    }

    pub fn diagonal(eigenvalues: Vec<f64>) -> Result<Self> {
        Self::new(eigenvalues, None)
    }

    /// Diagonalize a Hermitian PSD matrix.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        check_square(m)?;
        check_finite(m)?;
        let defect = hermitian_defect(m);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let spec = eigh(m);
        let values = spec
            .values
            .iter()
            .map(|&x| if x < 0.0 && x > PSD_FLOOR { 0.0 } else { x })
            .collect();
        Self::new(values, Some(spec.vectors))
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &ComplexMatrix {
        &self.eigenbasis
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_energy(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Energy of the maximally mixed state, `Tr H / d`.
    pub fn uniform_mean(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.dim() as f64
    }

    /// Number of levels within [`DEGENERACY_GAP`] of the ground energy.
    pub fn ground_multiplicity(&self) -> usize {
        let e0 = self.ground_energy();
        self.eigenvalues
            .iter()
            .take_while(|&&e| e - e0 <= DEGENERACY_GAP)
            .count()
    }

    /// Energy `E_n` of the first level outside the span of the lowest `n`
    /// eigenvectors; for `n = dim` the top level is returned.
    pub fn level_energy(&self, n: usize) -> f64 {
        self.eigenvalues[n.min(self.dim() - 1)]
    }

    pub fn eigenvector(&self, k: usize) -> ComplexVector {
        self.eigenbasis.column(k).into_owned()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let spec = Spectrum {
            values: self.eigenvalues.clone(),
            vectors: self.eigenbasis.clone(),
        };
        spec.map(|x| x)
    }

    /// Projector onto the span of the lowest `n` eigenvectors.
    pub fn low_projector(&self, n: usize) -> ComplexMatrix {
        let v = self.eigenbasis.columns(0, n.min(self.dim()));
        v * v.adjoint()
    }
}

/// Kraus operators must share one shape; returns `(out_dim, in_dim)`.
fn kraus_shape(kraus: &[ComplexMatrix]) -> Result<(usize, usize)> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::Domain("a channel needs at least one Kraus operator".into()))?;
    let shape = first.shape();
    for k in kraus {
        if k.shape() != shape {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operators of shapes {:?} and {:?}",
                shape,
                k.shape()
            )));
        }
        check_finite(k)?;
    }
    Ok(shape)
}

/// Choi matrix `Σ_k vec(K_k) vec(K_k)†` with output-major ordering.
pub fn choi_of(kraus: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (out_dim, in_dim) = kraus_shape(kraus)?;
    let n = out_dim * in_dim;
    let mut choi = ComplexMatrix::zeros(n, n);
    for k in kraus {
        let v = vec_row_major(k);
        choi.gerc(ONE, &v, &v, ONE);
    }
    Ok(choi)
}

/// `Σ_k w_k K_k ρ K_k†`.
fn apply_terms(terms: &[(f64, ComplexMatrix)], rho: &ComplexMatrix) -> ComplexMatrix {
    let out = terms.first().map_or(0, |(_, k)| k.nrows());
    let mut acc = ComplexMatrix::zeros(out, out);
    for (w, k) in terms {
        let kr = k * rho;
        acc.gemm(C64::new(*w, 0.0), &kr, &k.adjoint(), ONE);
    }
    acc
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct Channel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<ComplexMatrix>,
    choi: ComplexMatrix,
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let (out_dim, in_dim) = kraus_shape(&kraus)?;
        let mut gram = ComplexMatrix::zeros(in_dim, in_dim);
        for k in &kraus {
            gram.gemm(ONE, &k.adjoint(), k, ONE);
        }
        let defect = (gram - ComplexMatrix::identity(in_dim, in_dim))
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        if defect > TP_TOL {
            return Err(Error::NotTracePreserving(defect));
        }
        let choi = choi_of(&kraus)?;
        Ok(Self {
            in_dim,
            out_dim,
            kraus,
            choi,
        })
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// `Σ K ρ K†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {0}x{0}, operator is {1}x{2}",
                self.in_dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            let kr = k * rho;
            acc.gemm(ONE, &kr, &k.adjoint(), ONE);
        }
        Ok(acc)
    }

    pub fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator::from_matrix_lossy(&self.apply(rho.matrix())?))
    }

    /// Heisenberg-picture map `Y ↦ Σ K† Y K`.
    pub fn adjoint_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if y.shape() != (self.out_dim, self.out_dim) {
            return Err(Error::DimensionMismatch(format!(
                "adjoint channel input is {0}x{0}, operator is {1}x{2}",
                self.out_dim,
                y.nrows(),
                y.ncols()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            let ky = k.adjoint() * y;
            acc.gemm(ONE, &ky, k, ONE);
        }
        Ok(acc)
    }

    /// Apply `Φ ⊗ id_R` to a pure state `|ψ⟩` on `A ⊗ R`.
    pub fn apply_extended_pure(&self, psi: &ComplexVector, r_dim: usize) -> Result<ComplexMatrix> {
        if psi.len() != self.in_dim * r_dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} on A⊗R with dims {} and {r_dim}",
                psi.len(),
                self.in_dim
            )));
        }
        let c = unvec_row_major(psi.as_slice(), self.in_dim, r_dim);
        let n = self.out_dim * r_dim;
        let mut acc = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            let v = vec_row_major(&(k * &c));
            acc.gerc(ONE, &v, &v, ONE);
        }
        Ok(acc)
    }
}

/// Apply a channel to an operator.
pub fn apply_channel(channel: &Channel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    channel.apply(rho)
}

/// What a [`HermitianPreservingMap`] is known to be, which fixes cheap
/// a-priori bounds on its norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Channel,
    ChannelDifference,
    General,
}

/// A Hermitian-preserving superoperator stored by its Choi matrix together
/// with a signed Kraus factorization `Θ(ρ) = Σ_k w_k K_k ρ K_k†`.
#[derive(Debug, Clone)]
pub struct HermitianPreservingMap {
    in_dim: usize,
    out_dim: usize,
    choi: ComplexMatrix,
    terms: Vec<(f64, ComplexMatrix)>,
    kind: MapKind,
}

impl HermitianPreservingMap {
    /// Build from a Hermitian Choi matrix; the signed factorization comes from
    /// its eigendecomposition.
    pub fn from_choi(in_dim: usize, out_dim: usize, choi: ComplexMatrix) -> Result<Self> {
        let n = check_square(&choi)?;
        if n != in_dim * out_dim {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {n}x{n} for in_dim {in_dim}, out_dim {out_dim}"
            )));
        }
        check_finite(&choi)?;
        let defect = hermitian_defect(&choi);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let choi = hermitian_part(&choi);
        let spec = eigh(&choi);
        let scale = spec.values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let terms = spec
            .values
            .iter()
            .enumerate()
            .filter(|(_, &lam)| lam.abs() > 1e-13 * scale.max(1e-300))
            .map(|(k, &lam)| {
                let col: Vec<C64> = spec.vectors.column(k).iter().copied().collect();
                (lam, unvec_row_major(&col, out_dim, in_dim))
            })
            .collect();
        Ok(Self {
            in_dim,
            out_dim,
            choi,
            terms,
            kind: MapKind::General,
        })
    }

    pub fn from_channel(channel: &Channel) -> Self {
        Self {
            in_dim: channel.in_dim,
            out_dim: channel.out_dim,
            choi: channel.choi.clone(),
            terms: channel.kraus.iter().map(|k| (1.0, k.clone())).collect(),
            kind: MapKind::Channel,
        }
    }

    /// `Φ - Ψ`.
    pub fn difference(phi: &Channel, psi: &Channel) -> Result<Self> {
        if phi.in_dim != psi.in_dim || phi.out_dim != psi.out_dim {
            return Err(Error::DimensionMismatch(format!(
                "channels {}->{} and {}->{}",
                phi.in_dim, phi.out_dim, psi.in_dim, psi.out_dim
            )));
        }
        let terms = phi
            .kraus
            .iter()
            .map(|k| (1.0, k.clone()))
            .chain(psi.kraus.iter().map(|k| (-1.0, k.clone())))
            .collect();
        Ok(Self {
            in_dim: phi.in_dim,
            out_dim: phi.out_dim,
            choi: &phi.choi - &psi.choi,
            terms,
            kind: MapKind::ChannelDifference,
        })
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            choi: ComplexMatrix::zeros(in_dim * out_dim, in_dim * out_dim),
            terms: Vec::new(),
            kind: MapKind::General,
        }
    }

    /// `c Θ` for real `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            choi: &self.choi * C64::new(c, 0.0),
            terms: self.terms.iter().map(|(w, k)| (w * c, k.clone())).collect(),
            kind: MapKind::General,
        }
    }

    /// `Θ₁ + Θ₂`.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.in_dim != other.in_dim || self.out_dim != other.out_dim {
            return Err(Error::DimensionMismatch("maps of different shapes".into()));
        }
        Ok(Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            choi: &self.choi + &other.choi,
            terms: self.terms.iter().chain(other.terms.iter()).cloned().collect(),
            kind: MapKind::General,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn terms(&self) -> &[(f64, ComplexMatrix)] {
        &self.terms
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// True when every term weight vanishes.
    pub fn is_zero(&self) -> bool {
        self.choi.iter().all(|z| z.norm() == 0.0)
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::DimensionMismatch(format!(
                "map input is {0}x{0}, operator is {1}x{2}",
                self.in_dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        if self.terms.is_empty() {
            return Ok(ComplexMatrix::zeros(self.out_dim, self.out_dim));
        }
        Ok(apply_terms(&self.terms, rho))
    }

    /// `Tr_R[(I ⊗ ρᵀ) J]`, evaluated from the Choi matrix alone.
    pub fn apply_via_choi(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::DimensionMismatch("map input has the wrong shape".into()));
        }
        let lifted = tensor(&ComplexMatrix::identity(self.out_dim, self.out_dim), &rho.transpose());
        partial_trace(&(lifted * &self.choi), (self.out_dim, self.in_dim), Factor::First)
    }

    /// The same map with its input restricted through an isometry `V`
    /// (`ρ ↦ Θ(V ρ V†)`).
    pub fn precompose(&self, v: &ComplexMatrix) -> Result<Self> {
        if v.nrows() != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "isometry has {} rows, map input is {}",
                v.nrows(),
                self.in_dim
            )));
        }
        let terms: Vec<(f64, ComplexMatrix)> = self.terms.iter().map(|(w, k)| (*w, k * v)).collect();
        let n = self.out_dim * v.ncols();
        let mut choi = ComplexMatrix::zeros(n, n);
        for (w, k) in &terms {
            let x = vec_row_major(k);
            choi.gerc(C64::new(*w, 0.0), &x, &x, ONE);
        }
        Ok(Self {
            in_dim: v.ncols(),
            out_dim: self.out_dim,
            choi,
            terms,
            kind: self.kind,
        })
    }
}

/// Mean energy `Tr(Hρ)`.
pub fn energy(rho: &DensityOperator, h: &Hamiltonian) -> Result<f64> {
    energy_of(rho.matrix(), h)
}

pub(crate) fn energy_of(rho: &ComplexMatrix, h: &Hamiltonian) -> Result<f64> {
    if rho.shape() != (h.dim(), h.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, Hamiltonian has {} levels",
            rho.nrows(),
            rho.ncols(),
            h.dim()
        )));
    }
    let v = h.eigenbasis();
    let rotated = v.adjoint() * rho * v;
    let e: C64 = h
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, &ek)| rotated[(k, k)] * ek)
        .sum();
    let scale = 1.0 + h.max_energy();
    if e.im.abs() > 1e-10 * scale {
        return Err(Error::NotHermitian(e.im.abs()));
    }
    Ok(e.re)
}
