//! Named experiment recipes. Each returns a [`Table`] whose rows can be
//! written as CSV.

use crate::bounds::{optimize_t, BoundInputs, BoundKind, BoundValue, Fhat};
use crate::ecd::{
    diamond_norm_estimate, ecd_norm_estimate, ecd_norm_ladder, truncation_norm_bound, EcdOptions, EcdProblem,
};
use crate::error::{Error, Result};
use crate::info::{channel_mi, holevo_capacity_estimate, CapacityOptions};
use crate::operator::{DensityOperator, HermitianPreservingMap};
use crate::thermo::{f_h, gibbs_lambda, FhatOscillator};
use crate::zoo::{attenuator, identity_channel, phase_rotation, vacuum_depolarizer, TruncatedOscillator};

/// Rows of numbers under named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Header line plus one line per row; numbers use the shortest
    /// representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Default rotation angles, largest first.
pub const DEFAULT_THETAS: [f64; 6] = [0.5, 0.25, 0.1, 0.05, 0.01, 0.001];

/// `‖U_θ(·)U_θ† - id‖⋄^E` on a truncated oscillator (`ħω = 1`) for each
/// `θ`. Columns: `theta, ecd_lower, ecd_upper`.
pub fn strong_convergence(d: usize, e: f64, thetas: &[f64], options: &EcdOptions) -> Result<Table> {
    let osc = TruncatedOscillator::new(d, 1.0)?;
    let id = identity_channel(d)?;
    let mut table = Table::new(&["theta", "ecd_lower", "ecd_upper"]);
    for &theta in thetas {
        let map = HermitianPreservingMap::difference(&phase_rotation(d, theta)?, &id)?;
        let est = ecd_norm_estimate(&EcdProblem::new(map, osc.hamiltonian().clone(), e)?, options)?;
        table.push(vec![theta, est.lower, est.upper]);
    }
    Ok(table)
}

/// The same distance at fixed `θ` over a ladder of budgets. Columns:
/// `energy, ecd_lower, ecd_upper`.
pub fn rotation_energy_ladder(d: usize, theta: f64, energies: &[f64], options: &EcdOptions) -> Result<Table> {
    let osc = TruncatedOscillator::new(d, 1.0)?;
    let map = HermitianPreservingMap::difference(&phase_rotation(d, theta)?, &identity_channel(d)?)?;
    let problem = EcdProblem::new(map, osc.hamiltonian().clone(), energies[0])?;
    let mut table = Table::new(&["energy", "ecd_lower", "ecd_upper"]);
    for (&e, est) in energies.iter().zip(ecd_norm_ladder(&problem, energies, options)?) {
        table.push(vec![e, est.lower, est.upper]);
    }
    Ok(table)
}

/// Attenuators `η₁, η₂` truncated to each `d`. Columns:
/// `d, diamond_lower, diamond_upper, ecd_lower, ecd_upper`.
pub fn attenuator_pair(eta1: f64, eta2: f64, dims: &[usize], e: f64, options: &EcdOptions) -> Result<Table> {
    let mut table = Table::new(&["d", "diamond_lower", "diamond_upper", "ecd_lower", "ecd_upper"]);
    for &d in dims {
        let osc = TruncatedOscillator::new(d, 1.0)?;
        let map = HermitianPreservingMap::difference(&attenuator(d, eta1)?, &attenuator(d, eta2)?)?;
        let diamond = diamond_norm_estimate(&map, None, options)?;
        let ecd = ecd_norm_estimate(&EcdProblem::new(map, osc.hamiltonian().clone(), e)?, options)?;
        table.push(vec![d as f64, diamond.lower, diamond.upper, ecd.lower, ecd.upper]);
    }
    Ok(table)
}

fn check_budgets(osc: &TruncatedOscillator, energies: &[f64]) -> Result<()> {
    let e0 = osc.hamiltonian().ground_energy();
    if let Some(e) = energies.iter().find(|&&e| e <= e0) {
        return Err(Error::Infeasible(format!(
            "energy budget {e} is not above the ground energy {e0}"
        )));
    }
    Ok(())
}

/// Bound with `ε = 1` (any two channels are within ECD distance 2) and an
/// oscillator `F̂`, minimized over `t`.
fn unit_eps_bound(kind: BoundKind, e: f64, fhat: &FhatOscillator) -> Result<BoundValue> {
    optimize_t(kind, &BoundInputs::new(1.0, e, 1.0, Fhat::Oscillator(fhat.clone())))
}

/// Identity versus the vacuum depolarizer on a `d`-level oscillator: the
/// Holevo capacities differ by `F_H(E)`. Columns: `energy, cchi_identity,
/// cchi_depolarizer, difference, f_h, bound_total, t_star`, where the bound
/// uses `ε = 1` and `k = 1`.
pub fn tightness_cchi(d: usize, hbar_omega: f64, energies: &[f64], options: &CapacityOptions) -> Result<Table> {
    let osc = TruncatedOscillator::new(d, hbar_omega)?;
    check_budgets(&osc, energies)?;
    let h = osc.hamiltonian();
    let (id, dep) = (identity_channel(d)?, vacuum_depolarizer(d)?);
    let mut table = Table::new(&[
        "energy",
        "cchi_identity",
        "cchi_depolarizer",
        "difference",
        "f_h",
        "bound_total",
        "t_star",
    ]);
    for &e in energies {
        let a = holevo_capacity_estimate(&id, h, e, options)?.value;
        let b = holevo_capacity_estimate(&dep, h, e, options)?.value;
        let bound = unit_eps_bound(BoundKind::Cchi, e, &osc.fhat())?;
        table.push(vec![e, a, b, (a - b).abs(), f_h(h, e)?, bound.total, bound.t_used]);
    }
    Ok(table)
}

/// Gibbs state at budget `e`, or the maximally mixed state once the
/// constraint is inactive.
fn max_entropy_state(h: &crate::operator::Hamiltonian, e: f64) -> Result<DensityOperator> {
    if e >= h.uniform_mean() {
        return Ok(DensityOperator::maximally_mixed(h.dim()));
    }
    Ok(gibbs_lambda(h, e)?.state)
}

/// Entanglement-assisted capacities of the same pair, through the channel
/// mutual information at the maximum-entropy input. Columns: `energy,
/// cea_identity, two_f_h, cea_depolarizer, bound_total, t_star`.
pub fn tightness_ea(d: usize, hbar_omega: f64, energies: &[f64]) -> Result<Table> {
    let osc = TruncatedOscillator::new(d, hbar_omega)?;
    check_budgets(&osc, energies)?;
    let h = osc.hamiltonian();
    let (id, dep) = (identity_channel(d)?, vacuum_depolarizer(d)?);
    let mut table = Table::new(&[
        "energy",
        "cea_identity",
        "two_f_h",
        "cea_depolarizer",
        "bound_total",
        "t_star",
    ]);
    for &e in energies {
        let rho = max_entropy_state(h, e)?;
        let bound = unit_eps_bound(BoundKind::EacapIn, e, &osc.fhat())?;
        table.push(vec![
            e,
            channel_mi(&id, &rho)?,
            2.0 * f_h(h, e)?,
            channel_mi(&dep, &rho)?,
            bound.total,
            bound.t_used,
        ]);
    }
    Ok(table)
}

/// `q_n + 8√(E/E_n)` for each `n` against the ECD estimate, for an
/// attenuator pair on `d` levels. Columns: `n, level_energy, qn_lower,
/// qn_upper, tail, estimate, bound, ecd_lower, ecd_upper`.
pub fn truncation_ladder(eta1: f64, eta2: f64, d: usize, e: f64, ns: &[usize], options: &EcdOptions) -> Result<Table> {
    let osc = TruncatedOscillator::new(d, 1.0)?;
    let h = osc.hamiltonian();
    let map = HermitianPreservingMap::difference(&attenuator(d, eta1)?, &attenuator(d, eta2)?)?;
    let ecd = ecd_norm_estimate(&EcdProblem::new(map.clone(), h.clone(), e)?, options)?;
    let mut table = Table::new(&[
        "n",
        "level_energy",
        "qn_lower",
        "qn_upper",
        "tail",
        "estimate",
        "bound",
        "ecd_lower",
        "ecd_upper",
    ]);
    for &n in ns {
        let b = truncation_norm_bound(&map, h, e, n, options)?;
        table.push(vec![
            n as f64,
            b.level_energy,
            b.q_n.lower,
            b.q_n.upper,
            b.tail,
            b.estimate,
            b.bound,
            ecd.lower,
            ecd.upper,
        ]);
    }
    Ok(table)
}

/// `main_term / (ε F̂_{ℓ,ω}(E))` at the optimal `t` of the given bound.
pub fn main_term_ratio(kind: BoundKind, eps: f64, e: f64, fhat: &FhatOscillator) -> Result<(BoundValue, f64)> {
    let best = optimize_t(kind, &BoundInputs::new(eps, e, 1.0, Fhat::Oscillator(fhat.clone())))?;
    let (a, _, _) = kind.coefficients(1);
    Ok((best, best.main_term / (a * eps * fhat.eval(e)?)))
}
