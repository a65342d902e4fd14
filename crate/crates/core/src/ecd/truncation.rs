//! Restriction to the lowest `n` energy levels: the seminorms `q_n` and the
//! truncation estimates `‖ρ - ρ_n‖₁ ≤ 4√r_n` and
//! `‖Θ‖⋄^E ≤ q_n(Θ) + 8√(E/E_n)`.

use super::{diamond_norm_estimate, tail_coefficient, EcdEstimate, EcdOptions};
use crate::error::{Error, Result};
use crate::operator::{
    tensor, trace, trace_norm, ComplexMatrix, DensityOperator, Hamiltonian, HermitianPreservingMap, C64,
};

#[derive(Debug, Clone)]
pub struct StateTruncation {
    /// `Tr (I - P_n) ρ_A`.
    pub r_n: f64,
    /// `4 √r_n`.
    pub bound: f64,
    /// `‖ρ - ρ_n‖₁`.
    pub measured: f64,
    /// `ρ_n = (P_n ⊗ I) ρ (P_n ⊗ I) / (1 - r_n)`.
    pub truncated: DensityOperator,
}

/// Truncate a state on `A ⊗ R` to the lowest `n` levels of `h` (acting on
/// `A`, the first factor).
pub fn state_truncation_bound(rho: &DensityOperator, h: &Hamiltonian, n: usize) -> Result<StateTruncation> {
    let d_a = h.dim();
    if !rho.dim().is_multiple_of(d_a) {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} is not on A⊗R with dim A = {d_a}",
            rho.dim()
        )));
    }
    if n == 0 || n > d_a {
        return Err(Error::Domain(format!("level count {n} outside 1..={d_a}")));
    }
    let d_r = rho.dim() / d_a;
    let p = tensor(&h.low_projector(n), &ComplexMatrix::identity(d_r, d_r));
    let kept = &p * rho.matrix() * &p;
    let w = trace(&kept).re;
    if w <= 1e-12 {
        return Err(Error::Domain("state has no weight on the low-energy subspace".into()));
    }
    let r_n = (1.0 - w).max(0.0);
    let kept = kept / C64::new(w, 0.0);
    let measured = trace_norm(&(rho.matrix() - &kept));
    Ok(StateTruncation {
        r_n,
        bound: 4.0 * r_n.sqrt(),
        measured,
        truncated: DensityOperator::from_matrix_lossy(&kept),
    })
}

fn check_levels(map: &HermitianPreservingMap, h: &Hamiltonian, n: usize) -> Result<()> {
    if h.dim() != map.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian has {} levels, map input is {}",
            h.dim(),
            map.in_dim()
        )));
    }
    if n == 0 || n > h.dim() {
        return Err(Error::Domain(format!("level count {n} outside 1..={}", h.dim())));
    }
    Ok(())
}

/// `q_n(Θ)`: the diamond norm of `Θ` restricted to inputs on the span of
/// the lowest `n` eigenvectors of `h`, with an `n`-dimensional reference.
/// The witness is reported on `A ⊗ R` with `dim R = n`.
pub fn q_n(map: &HermitianPreservingMap, h: &Hamiltonian, n: usize, options: &EcdOptions) -> Result<EcdEstimate> {
    check_levels(map, h, n)?;
    let v = h.eigenbasis().columns(0, n).into_owned();
    let restricted = map.precompose(&v)?;
    let mut est = diamond_norm_estimate(&restricted, Some(n), options)?;
    // lift the witness from span(P_n) ⊗ R back to A ⊗ R
    let c = crate::operator::unvec_row_major(est.witness.as_slice(), n, n);
    est.witness = crate::operator::vec_row_major(&(&v * c));
    est.witness_energy = Some(super::marginal_energy(&est.witness, h, n)?);
    Ok(est)
}

#[derive(Debug, Clone)]
pub struct TruncationNormBound {
    pub n: usize,
    /// `E_n`, the lowest level outside the kept subspace (the top level when
    /// `n` is the full dimension).
    pub level_energy: f64,
    pub q_n: EcdEstimate,
    /// `8 √(E/E_n)` for channels and channel differences; for general maps
    /// the factor 8 becomes `4 max(2, ‖Θ‖⋄ bound)`.
    pub tail: f64,
    /// `q_n.lower + tail`.
    pub estimate: f64,
    /// `q_n.upper + tail`, a rigorous upper bound on `‖Θ‖⋄^E`.
    pub bound: f64,
}

pub fn truncation_norm_bound(
    map: &HermitianPreservingMap,
    h: &Hamiltonian,
    e: f64,
    n: usize,
    options: &EcdOptions,
) -> Result<TruncationNormBound> {
    check_levels(map, h, n)?;
    let level_energy = h.level_energy(n);
    if level_energy <= 0.0 {
        return Err(Error::Domain(format!(
            "level energy E_{n} = {level_energy} is not positive"
        )));
    }
    if e <= h.ground_energy() {
        return Err(Error::Infeasible(format!(
            "energy budget {e} is not above the ground energy {}",
            h.ground_energy()
        )));
    }
    let q = q_n(map, h, n, options)?;
    let tail = 4.0 * tail_coefficient(map) * (e / level_energy).sqrt();
    Ok(TruncationNormBound {
        n,
        level_energy,
        estimate: q.lower + tail,
        bound: q.upper + tail,
        q_n: q,
        tail,
    })
}
