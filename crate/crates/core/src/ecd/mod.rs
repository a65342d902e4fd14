//! Energy-constrained diamond norm
//! `‖Θ‖⋄^E = sup { ‖(Θ ⊗ id_R)(|ψ⟩⟨ψ|)‖₁ : Tr H_A ρ_A ≤ E }`,
//! reported as a bracket: a lower value achieved by an explicit witness and a
//! rigorous upper bound.

pub(crate) mod ascent;
pub mod certify;
pub mod objective;
pub mod truncation;

use ascent::{Climb, Landscape};
pub use certify::{choi_marginal_abs, diamond_upper_bound, energy_upper_bound, EnergyDual};
pub use objective::{congruence_output, direct_output};
pub use truncation::{q_n, state_truncation_bound, truncation_norm_bound, StateTruncation, TruncationNormBound};

use crate::error::{Error, Result};
use crate::operator::{
    energy_of, unvec_row_major, vec_row_major, ComplexMatrix, ComplexVector, Hamiltonian, HermitianPreservingMap,
    MapKind,
};
use crate::thermo::gibbs_lambda;

/// Tolerance on `⟨ψ|ψ⟩ = 1` for caller-supplied vectors.
pub const NORM_TOL: f64 = 1e-10;
/// Slack on the energy constraint for caller-supplied vectors.
pub const ENERGY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EcdProblem {
    map: HermitianPreservingMap,
    hamiltonian: Hamiltonian,
    energy: f64,
    r_dim: usize,
}

impl EcdProblem {
    /// Problem with the reference dimension equal to the input dimension.
    pub fn new(map: HermitianPreservingMap, hamiltonian: Hamiltonian, energy: f64) -> Result<Self> {
        let r_dim = map.in_dim();
        Self::with_reference(map, hamiltonian, energy, r_dim)
    }

    pub fn with_reference(
        map: HermitianPreservingMap,
        hamiltonian: Hamiltonian,
        energy: f64,
        r_dim: usize,
    ) -> Result<Self> {
        if hamiltonian.dim() != map.in_dim() {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian has {} levels, map input is {}",
                hamiltonian.dim(),
                map.in_dim()
            )));
        }
        if !energy.is_finite() || energy <= hamiltonian.ground_energy() {
            return Err(Error::Infeasible(format!(
                "energy budget {energy} is not above the ground energy {}",
                hamiltonian.ground_energy()
            )));
        }
        if r_dim == 0 {
            return Err(Error::Domain("reference dimension must be at least 1".into()));
        }
        Ok(Self {
            map,
            hamiltonian,
            energy,
            r_dim,
        })
    }

    pub fn map(&self) -> &HermitianPreservingMap {
        &self.map
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn r_dim(&self) -> usize {
        self.r_dim
    }

    /// The same map and Hamiltonian under another energy budget.
    pub fn at_energy(&self, energy: f64) -> Result<Self> {
        Self::with_reference(self.map.clone(), self.hamiltonian.clone(), energy, self.r_dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EcdOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for EcdOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EcdEstimate {
    /// Objective value at `witness`.
    pub lower: f64,
    /// Rigorous upper bound.
    pub upper: f64,
    /// Unit vector on `A ⊗ R` (row-major, reference index fastest).
    pub witness: ComplexVector,
    pub r_dim: usize,
    /// `Tr H_A ρ_A` at the witness; `None` when no Hamiltonian is involved.
    pub witness_energy: Option<f64>,
}

/// Mean energy of the `A` marginal of a pure state on `A ⊗ R`.
pub fn marginal_energy(psi: &ComplexVector, h: &Hamiltonian, r_dim: usize) -> Result<f64> {
    if psi.len() != h.dim() * r_dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} on A⊗R with dims {} and {r_dim}",
            psi.len(),
            h.dim()
        )));
    }
    let c = unvec_row_major(psi.as_slice(), h.dim(), r_dim);
    energy_of(&(&c * c.adjoint()), h)
}

/// `‖(Θ ⊗ id_R)(|ψ⟩⟨ψ|)‖₁` for a feasible unit vector `ψ`, evaluated through
/// the Choi matrix.
pub fn ecd_objective(problem: &EcdProblem, psi: &ComplexVector) -> Result<f64> {
    let norm = psi.norm();
    if (norm * norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Domain(format!("⟨ψ|ψ⟩ = {} is not 1", norm * norm)));
    }
    let e = marginal_energy(psi, &problem.hamiltonian, problem.r_dim)?;
    if e > problem.energy + ENERGY_SLACK {
        return Err(Error::Infeasible(format!(
            "state energy {e} exceeds the budget {}",
            problem.energy
        )));
    }
    objective::congruence_value(&problem.map, psi, problem.r_dim)
}

/// Input basis the search runs in, the energy of each basis vector, and the
/// energy cap if any.
struct Frame<'a> {
    basis: &'a ComplexMatrix,
    levels: Vec<f64>,
    cap: Option<f64>,
}

/// Multi-start search in `frame`. Returns the best climb with its
/// coefficients rotated back.
fn search(
    map: &HermitianPreservingMap,
    frame: Frame<'_>,
    r_dim: usize,
    start_probs: &[f64],
    warm: &[ComplexMatrix],
    options: &EcdOptions,
) -> Result<Climb> {
    let basis = frame.basis;
    let rotated = map.precompose(basis)?;
    let land = Landscape::new(
        objective::Evaluator::new(&rotated, r_dim),
        r_dim,
        frame.levels,
        frame.cap,
    );
    let warm: Vec<ComplexMatrix> = warm.iter().map(|c| basis.adjoint() * c).collect();
    let first = land.diagonal_start(start_probs);
    let best = land.multi_start(first, &warm, options.restarts, options.seed, options.max_iter);
    Ok(Climb {
        value: best.value,
        coefficients: basis * best.coefficients,
    })
}

/// Level populations of the deterministic first start: Gibbs at `e` when
/// the constraint binds, uniform otherwise.
pub(crate) fn start_distribution(h: &Hamiltonian, e: f64) -> Vec<f64> {
    let d = h.dim();
    if e < h.uniform_mean() {
        if let Ok(sol) = gibbs_lambda(h, e) {
            let lv = h.eigenvalues();
            let w: Vec<f64> = lv.iter().map(|x| (-sol.lambda * (x - lv[0])).exp()).collect();
            let z: f64 = w.iter().sum();
            return w.into_iter().map(|x| x / z).collect();
        }
        let mut p = vec![0.0; d];
        p[0] = 1.0;
        return p;
    }
    vec![1.0 / d as f64; d]
}

/// `4 κ √(E/E_n)` bounds the change of the output trace norm under
/// truncation to the lowest `n` levels, where `κ ≥ ‖Θ‖⋄`.
pub(crate) fn tail_coefficient(map: &HermitianPreservingMap) -> f64 {
    match map.kind() {
        MapKind::Channel | MapKind::ChannelDifference => 2.0,
        MapKind::General => diamond_upper_bound(map).max(2.0),
    }
}

/// Exact norm ceiling of channels (1) and channel differences (2).
fn ceiling(map: &HermitianPreservingMap) -> f64 {
    match map.kind() {
        MapKind::Channel => 1.0,
        MapKind::ChannelDifference => 2.0,
        MapKind::General => f64::INFINITY,
    }
}

/// Best rigorous upper bound available for `‖Θ‖⋄^E`.
fn certified_upper(map: &HermitianPreservingMap, h: &Hamiltonian, e: f64) -> f64 {
    let a = choi_marginal_abs(map);
    let mut upper = certify::energy_dual(&a, h, e).value.min(ceiling(map));
    let kappa = tail_coefficient(map);
    for n in 1..=h.dim() {
        let en = h.level_energy(n);
        if en <= 0.0 {
            continue;
        }
        let tail = 4.0 * kappa * (e / en).sqrt();
        if tail >= upper {
            continue;
        }
        let restricted = map
            .precompose(&h.eigenbasis().columns(0, n).into_owned())
            .expect("eigenbasis rows match the map input");
        let q = diamond_upper_bound(&restricted).min(kappa);
        upper = upper.min(q + tail);
    }
    upper
}

fn finish(
    map: &HermitianPreservingMap,
    best: Climb,
    r_dim: usize,
    upper: f64,
    h: Option<&Hamiltonian>,
) -> Result<EcdEstimate> {
    let witness = vec_row_major(&best.coefficients);
    // rounding can push the trace norm a few ulps past the ceiling
    let lower = objective::congruence_value(map, &witness, r_dim)?.min(ceiling(map));
    let witness_energy = h.map(|h| marginal_energy(&witness, h, r_dim)).transpose()?;
    Ok(EcdEstimate {
        lower,
        upper: upper.max(lower),
        witness,
        r_dim,
        witness_energy,
    })
}

fn estimate_with_warm(problem: &EcdProblem, warm: &[ComplexMatrix], options: &EcdOptions) -> Result<EcdEstimate> {
    let h = &problem.hamiltonian;
    let map = &problem.map;
    let probs = start_distribution(h, problem.energy);
    let frame = Frame {
        basis: h.eigenbasis(),
        levels: h.eigenvalues().to_vec(),
        cap: Some(problem.energy),
    };
    let best = search(map, frame, problem.r_dim, &probs, warm, options)?;
    if map.is_zero() {
        return finish(map, best, problem.r_dim, 0.0, Some(h));
    }
    let upper = certified_upper(map, h, problem.energy);
    finish(map, best, problem.r_dim, upper, Some(h))
}

/// Bracket for `‖Θ‖⋄^E` from multi-start projected gradient ascent and the
/// rigorous bounds of [`certify`] and [`truncation`].
pub fn ecd_norm_estimate(problem: &EcdProblem, options: &EcdOptions) -> Result<EcdEstimate> {
    estimate_with_warm(problem, &[], options)
}

/// Estimates along a list of budgets. Budgets are processed in increasing
/// order and each run is also started from the previous witness, which is
/// feasible for every larger budget, so `lower` is nondecreasing in `E`.
pub fn ecd_norm_ladder(problem: &EcdProblem, energies: &[f64], options: &EcdOptions) -> Result<Vec<EcdEstimate>> {
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&i, &j| energies[i].total_cmp(&energies[j]));
    let mut out: Vec<Option<EcdEstimate>> = vec![None; energies.len()];
    let mut warm: Vec<ComplexMatrix> = Vec::new();
    for i in order {
        let p = problem.at_energy(energies[i])?;
        let est = estimate_with_warm(&p, &warm, options)?;
        warm = vec![unvec_row_major(est.witness.as_slice(), p.map.in_dim(), p.r_dim)];
        out[i] = Some(est);
    }
    Ok(out.into_iter().map(|e| e.expect("every budget visited")).collect())
}

/// Unconstrained diamond norm bracket with reference dimension `r_dim`
/// (default: the input dimension).
pub fn diamond_norm_estimate(
    map: &HermitianPreservingMap,
    r_dim: Option<usize>,
    options: &EcdOptions,
) -> Result<EcdEstimate> {
    let d = map.in_dim();
    let r_dim = r_dim.unwrap_or(d);
    if r_dim == 0 {
        return Err(Error::Domain("reference dimension must be at least 1".into()));
    }
    let probs = vec![1.0 / d as f64; d];
    let identity = ComplexMatrix::identity(d, d);
    let frame = Frame {
        basis: &identity,
        levels: vec![0.0; d],
        cap: None,
    };
    let best = search(map, frame, r_dim, &probs, &[], options)?;
    finish(map, best, r_dim, diamond_upper_bound(map).min(ceiling(map)), None)
}
