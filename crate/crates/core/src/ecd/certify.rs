//! Rigorous upper bounds on the (energy-constrained) diamond norm.
//!
//! Writing the Choi matrix as `J = J₊ - J₋`, every output satisfies
//! `‖(I ⊗ Cᵀ) J (I ⊗ C̄)‖₁ ≤ Tr[(Tr_B |J|) σᵀ]` with `σ = CC†` the input
//! marginal, so maximizing the right-hand side over admissible `σ` bounds
//! the norm from above. Without a constraint this is `‖Tr_B |J|‖_∞`; with
//! the constraint `Tr Hσ ≤ E` it is the value of a linear program over
//! density matrices whose dual is `min_{μ≥0} λ_max(Aᵀ - μH) + μE`.

use crate::error::{Error, Result};
use crate::operator::{
    eigh, eigvalsh, hermitian_abs, operator_norm, partial_trace, trace, ComplexMatrix, DensityOperator, Factor,
    Hamiltonian, HermitianPreservingMap, C64,
};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `Tr_B |J|`, an operator on the reference factor.
pub fn choi_marginal_abs(map: &HermitianPreservingMap) -> ComplexMatrix {
    let (d_a, d_b) = (map.in_dim(), map.out_dim());
    if map.is_zero() {
        return ComplexMatrix::zeros(d_a, d_a);
    }
    partial_trace(&hermitian_abs(map.choi()), (d_b, d_a), Factor::Second)
        .expect("Choi matrix shape is fixed by construction")
}

/// `‖Tr_B |J|‖_∞ ≥ ‖Θ‖⋄`.
pub fn diamond_upper_bound(map: &HermitianPreservingMap) -> f64 {
    operator_norm(&choi_marginal_abs(map))
}

/// Dual certificate for the energy-constrained bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDual {
    pub value: f64,
    pub mu: f64,
}

/// `min_{μ≥0} λ_max(Aᵀ - μH) + μE` with `A = Tr_B |J|`; an upper bound on
/// `‖Θ‖⋄^E`. Every evaluated `μ` gives a valid bound, so the search only
/// affects tightness.
pub fn energy_upper_bound(map: &HermitianPreservingMap, h: &Hamiltonian, e: f64) -> Result<EnergyDual> {
    if h.dim() != map.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian has {} levels, map input is {}",
            h.dim(),
            map.in_dim()
        )));
    }
    if e <= h.ground_energy() {
        return Err(Error::Infeasible(format!(
            "energy budget {e} is not above the ground energy {}",
            h.ground_energy()
        )));
    }
    Ok(energy_dual(&choi_marginal_abs(map), h, e))
}

pub(crate) fn energy_dual(a: &ComplexMatrix, h: &Hamiltonian, e: f64) -> EnergyDual {
    linear_dual(&a.transpose(), h, e)
}

/// `min_{μ≥0} λ_max(A - μH) + μE`, which by LP duality equals
/// `max { Tr Aσ : σ a state, Tr Hσ ≤ E }` for Hermitian `A`.
pub(crate) fn linear_dual(a: &ComplexMatrix, h: &Hamiltonian, e: f64) -> EnergyDual {
    let v = h.eigenbasis();
    let at = v.adjoint() * a * v;
    let levels = h.eigenvalues();
    let dual = |mu: f64| {
        let mut m = at.clone();
        for (k, lvl) in levels.iter().enumerate() {
            m[(k, k)] -= C64::new(mu * lvl, 0.0);
        }
        eigvalsh(&m).last().copied().unwrap_or(0.0) + mu * e
    };
    let mut best = EnergyDual {
        value: dual(0.0),
        mu: 0.0,
    };
    if e >= h.max_energy() || best.value <= 0.0 {
        return best;
    }
    let consider = |mu: f64, value: f64, best: &mut EnergyDual| {
        if value < best.value {
            *best = EnergyDual { value, mu };
        }
    };
    // beyond this μ the dual exceeds its value at μ = 0
    let (mut lo, mut hi) = (0.0, 2.0 * best.value / (e - h.ground_energy()));
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (dual(x1), dual(x2));
    consider(x1, f1, &mut best);
    consider(x2, f2, &mut best);
    while hi - lo > 1e-12 * (1.0 + hi) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = dual(x1);
            consider(x1, f1, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = dual(x2);
            consider(x2, f2, &mut best);
        }
    }
    best
}

/// A feasible state for `max { Tr Aσ : Tr Hσ ≤ E }` read off the dual
/// optimum `mu`: the top eigenspace of `A - μH`, mixed between its lowest
/// and highest energy directions (or with the ground state) so that the
/// energy is at most `E`. Returns `(Tr Aσ, σ)`.
pub(crate) fn linear_primal(a: &ComplexMatrix, h: &Hamiltonian, e: f64, mu: f64) -> (f64, DensityOperator) {
    let m = a - h.matrix() * C64::new(mu, 0.0);
    let spec = eigh(&m);
    let n = spec.values.len();
    let top = spec.values[n - 1];
    let tol = 1e-8 * (1.0 + top.abs());
    let first = spec.values.iter().position(|&x| x >= top - tol).unwrap_or(n - 1);
    let w = spec.vectors.columns(first, n - first).into_owned();
    // energy extremes inside the top eigenspace
    let hw = eigh(&(w.adjoint() * h.matrix() * &w));
    let low = &w * hw.vectors.column(0);
    let high = &w * hw.vectors.column(n - first - 1);
    let (e_low, e_high) = (hw.values[0], hw.values[n - first - 1]);
    let (u, eu, t) = if e_high <= e {
        (high.clone(), e_high, 1.0)
    } else if e_low <= e {
        (high.clone(), e_high, (e - e_low) / (e_high - e_low))
    } else {
        (low.clone(), e_low, 0.0)
    };
    let rho = if e_low <= e {
        &high * high.adjoint() * C64::new(t, 0.0) + &low * low.adjoint() * C64::new(1.0 - t, 0.0)
    } else {
        // the top eigenspace alone is infeasible; mix toward the ground state
        let g = h.eigenvector(0);
        let s = ((e - h.ground_energy()) / (eu - h.ground_energy())).clamp(0.0, 1.0);
        &u * u.adjoint() * C64::new(s, 0.0) + &g * g.adjoint() * C64::new(1.0 - s, 0.0)
    };
    let value = trace(&(a * &rho)).re;
    (value, DensityOperator::from_matrix_lossy(&rho))
}
