//! Continuity bounds for channel information characteristics under a
//! bound `½‖Φ - Ψ‖⋄^E ≤ ε` on the energy-constrained distance.
//!
//! Every bound has the shape
//! `a ε (2t + r_ε(t)) F̂(x) + b g(ε r_ε(t)) + c h₂(εt)` with
//! `r_ε(t) = (1 + t/2)/(1 - εt)`, `x = E'/(εt)` and `t ∈ (0, 1/(2ε)]`; the
//! kinds differ only in the coefficients `(a, b, c)`, in the energy `E'`
//! (`E` or `kE`) and in which Hamiltonian `F̂` refers to.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::operator::Hamiltonian;
use crate::thermo::{fhat_shifted, g, h2, FhatOscillator};

const GOLDEN: f64 = 0.618_033_988_749_894_9;
/// Points of the logarithmic `t` grid searched before refinement.
pub const GRID_POINTS: usize = 200;
/// Relative width at which the golden-section refinement stops.
pub const REFINE_TOL: f64 = 1e-6;
/// The `t` grid starts at this fraction of `1/(2ε)`.
pub const GRID_FLOOR: f64 = 1e-9;

/// Which quantity is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Holevo quantity of output ensembles.
    Chi,
    /// Mutual information `I(B^n : C)` after `n` parallel uses.
    Qmi,
    /// Constrained Holevo capacity `C_χ`.
    Cchi,
    /// Constrained classical capacity `C`.
    Ccap,
    /// Entanglement-assisted capacity, `F̂` over the input Hamiltonian.
    EacapIn,
    /// Entanglement-assisted capacity, `F̂` over the output Hamiltonian.
    EacapOut,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::Chi,
        BoundKind::Qmi,
        BoundKind::Cchi,
        BoundKind::Ccap,
        BoundKind::EacapIn,
        BoundKind::EacapOut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Chi => "chi",
            BoundKind::Qmi => "qmi",
            BoundKind::Cchi => "cchi",
            BoundKind::Ccap => "ccap",
            BoundKind::EacapIn => "eacap-in",
            BoundKind::EacapOut => "eacap-out",
        }
    }

    /// `(a, b, c)` for `n` copies (`n` only matters for [`BoundKind::Qmi`]).
    pub fn coefficients(self, n: usize) -> (f64, f64, f64) {
        let n = n as f64;
        match self {
            BoundKind::Chi | BoundKind::Cchi => (1.0, 2.0, 2.0),
            BoundKind::Qmi => (2.0 * n, 2.0 * n, 4.0 * n),
            BoundKind::Ccap | BoundKind::EacapIn | BoundKind::EacapOut => (2.0, 2.0, 4.0),
        }
    }

    /// Whether the energy argument is `kE` rather than `E`.
    pub fn uses_gain(self) -> bool {
        matches!(self, BoundKind::Cchi | BoundKind::Ccap | BoundKind::EacapOut)
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown bound kind {s:?}")))
    }
}

/// Piecewise-linear `F̂` through user-supplied nodes, extended linearly past
/// both ends. The nodes must be increasing and concave and the left
/// extension must stay nonnegative down to `E = 0`, which makes the
/// function positive, nondecreasing and concave on `(0, ∞)`. Whether it
/// really bounds `F_H` is the caller's responsibility.
#[derive(Debug, Clone, PartialEq)]
pub struct FhatTable {
    energies: Vec<f64>,
    values: Vec<f64>,
}

impl FhatTable {
    pub fn new(energies: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if energies.len() < 2 || energies.len() != values.len() {
            return Err(Error::Domain("F̂ table needs at least two (E, F) nodes".into()));
        }
        if energies.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if energies[0] <= 0.0 || energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("F̂ table energies must be positive and increasing".into()));
        }
        let slopes: Vec<f64> = (1..energies.len())
            .map(|i| (values[i] - values[i - 1]) / (energies[i] - energies[i - 1]))
            .collect();
        if slopes.iter().any(|&s| s < 0.0) || slopes.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            return Err(Error::Domain("F̂ table must be nondecreasing and concave".into()));
        }
        if values[0] - slopes[0] * energies[0] < 0.0 {
            return Err(Error::Domain("F̂ table extends below zero before its first node".into()));
        }
        Ok(Self { energies, values })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, e: f64) -> f64 {
        let n = self.energies.len();
        let i = self.energies.partition_point(|&x| x < e).clamp(1, n - 1);
        let (x0, x1) = (self.energies[i - 1], self.energies[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (e - x0) / (x1 - x0)
    }
}

/// The upper bound `F̂` on the maximal output entropy used by a bound.
#[derive(Debug, Clone)]
pub enum Fhat {
    /// `F̂_{ℓ,ω}` of an `ℓ`-mode oscillator.
    Oscillator(FhatOscillator),
    /// `F_H(E + E₀)` of a finite Hamiltonian.
    Shifted(Hamiltonian),
    Table(FhatTable),
}

impl Fhat {
    /// `F̂(e)` and, for the shifted form, the argument beyond which it has
    /// saturated at `ln d`.
    pub fn eval(&self, e: f64) -> Result<(f64, Option<f64>)> {
        match self {
            Fhat::Oscillator(osc) => Ok((osc.eval(e)?, None)),
            Fhat::Shifted(h) => {
                let s = fhat_shifted(h, e)?;
                Ok((s.value, Some(s.valid_below)))
            }
            Fhat::Table(t) => {
                if e.is_nan() || e <= 0.0 {
                    return Err(Error::Domain(format!("F̂ needs E > 0, got {e}")));
                }
                Ok((t.eval(e), None))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundInputs {
    /// Half the energy-constrained distance, in `(0, 1]`.
    pub epsilon: f64,
    /// Energy `E` (average output energy for [`BoundKind::Qmi`]).
    pub energy: f64,
    /// Energy amplification factor; only used by kinds whose argument is `kE`.
    pub k: f64,
    /// Free parameter in `(0, 1/(2ε)]`.
    pub t: f64,
    /// Number of channel uses ([`BoundKind::Qmi`] only).
    pub n: usize,
    pub fhat: Fhat,
    /// For an oscillator `F̂`, use `F̂(E') - ℓ ln(εt)` in place of
    /// `F̂(E'/(εt))`.
    pub specialized: bool,
}

impl BoundInputs {
    pub fn new(epsilon: f64, energy: f64, t: f64, fhat: Fhat) -> Self {
        Self {
            epsilon,
            energy,
            k: 1.0,
            t,
            n: 1,
            fhat,
            specialized: false,
        }
    }

    pub fn t_max(&self) -> f64 {
        0.5 / self.epsilon
    }

    fn validate_without_t(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Domain(format!("ε must lie in (0, 1], got {}", self.epsilon)));
        }
        if !(self.energy.is_finite() && self.energy > 0.0) {
            return Err(Error::Domain(format!("energy must be positive, got {}", self.energy)));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::Domain(format!("k must be positive, got {}", self.k)));
        }
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if self.specialized && !matches!(self.fhat, Fhat::Oscillator(_)) {
            return Err(Error::Domain("the specialized form needs an oscillator F̂".into()));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.validate_without_t()?;
        if !(self.t > 0.0 && self.t <= self.t_max() * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "t must lie in (0, 1/(2ε)] = (0, {}], got {}",
                self.t_max(),
                self.t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub total: f64,
    pub main_term: f64,
    pub g_term: f64,
    pub h2_term: f64,
    pub t_used: f64,
    /// Energy at which `F̂` (or, specialized, `F̂_{ℓ,ω}`) was evaluated.
    pub fhat_arg: f64,
    /// For the shifted `F̂`: arguments at or above this have saturated.
    pub fhat_valid_below: Option<f64>,
}

/// `r_ε(t) = (1 + t/2)/(1 - εt)`.
pub fn r_eps(epsilon: f64, t: f64) -> Result<f64> {
    if epsilon * t >= 1.0 {
        return Err(Error::Domain(format!("r_ε(t) needs εt < 1, got {}", epsilon * t)));
    }
    Ok((1.0 + 0.5 * t) / (1.0 - epsilon * t))
}

/// Evaluate the bound of the given kind.
pub fn bound(kind: BoundKind, inputs: &BoundInputs) -> Result<BoundValue> {
    inputs.validate()?;
    let (eps, t) = (inputs.epsilon, inputs.t);
    let r = r_eps(eps, t)?;
    let e_arg = if kind.uses_gain() {
        inputs.k * inputs.energy
    } else {
        inputs.energy
    };
    let (a, b, c) = kind.coefficients(inputs.n);
    let (fhat, fhat_arg, fhat_valid_below) = match (&inputs.fhat, inputs.specialized) {
        (Fhat::Oscillator(osc), true) => (osc.eval(e_arg)? - osc.modes() as f64 * (eps * t).ln(), e_arg, None),
        (f, _) => {
            let x = e_arg / (eps * t);
            let (v, valid) = f.eval(x)?;
            (v, x, valid)
        }
    };
    let main_term = a * eps * (2.0 * t + r) * fhat;
    let g_term = b * g(eps * r)?;
    let h2_term = c * h2(eps * t)?;
    Ok(BoundValue {
        total: main_term + g_term + h2_term,
        main_term,
        g_term,
        h2_term,
        t_used: t,
        fhat_arg,
        fhat_valid_below,
    })
}

pub fn bound_chi(inputs: &BoundInputs) -> Result<BoundValue> {
    bound(BoundKind::Chi, inputs)
}

pub fn bound_qmi_n(inputs: &BoundInputs) -> Result<BoundValue> {
    bound(BoundKind::Qmi, inputs)
}

pub fn bound_holevo_cap(inputs: &BoundInputs) -> Result<BoundValue> {
    bound(BoundKind::Cchi, inputs)
}

pub fn bound_classical_cap(inputs: &BoundInputs) -> Result<BoundValue> {
    bound(BoundKind::Ccap, inputs)
}

pub fn bound_ea_cap_input_side(inputs: &BoundInputs) -> Result<BoundValue> {
    bound(BoundKind::EacapIn, inputs)
}

pub fn bound_ea_cap_output_side(inputs: &BoundInputs) -> Result<BoundValue> {
    bound(BoundKind::EacapOut, inputs)
}

/// `count` points spaced evenly in `ln t` from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// The bound at each `t` in `ts` (the `t` field of `inputs` is ignored).
pub fn sweep(kind: BoundKind, inputs: &BoundInputs, ts: &[f64]) -> Result<Vec<BoundValue>> {
    let mut at = inputs.clone();
    ts.iter()
        .map(|&t| {
            at.t = t;
            bound(kind, &at)
        })
        .collect()
}

/// Minimize the bound over `t ∈ (0, 1/(2ε)]`: a logarithmic grid of
/// [`GRID_POINTS`] points from `GRID_FLOOR/(2ε)` to `1/(2ε)`, then golden
/// section in `ln t` around the best grid point until the bracket's relative
/// width is below [`REFINE_TOL`]. The result is never worse than any grid
/// point.
pub fn optimize_t(kind: BoundKind, inputs: &BoundInputs) -> Result<BoundValue> {
    inputs.validate_without_t()?;
    let t_max = inputs.t_max();
    let grid = log_grid(GRID_FLOOR * t_max, t_max, GRID_POINTS);
    let values = sweep(kind, inputs, &grid)?;
    let mut best = values[0];
    let mut best_i = 0;
    for (i, v) in values.iter().enumerate() {
        if v.total < best.total {
            best = *v;
            best_i = i;
        }
    }
    let mut at = inputs.clone();
    let mut eval = |log_t: f64| -> Result<BoundValue> {
        at.t = log_t.exp().min(t_max);
        bound(kind, &at)
    };
    let mut lo = grid[best_i.saturating_sub(1)].ln();
    let mut hi = grid[(best_i + 1).min(grid.len() - 1)].ln();
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
    for v in [f1, f2] {
        if v.total < best.total {
            best = v;
        }
    }
    // bracket width in ln t equals the relative width in t
    while hi - lo > REFINE_TOL {
        if f1.total <= f2.total {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = eval(x1)?;
            if f1.total < best.total {
                best = f1;
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = eval(x2)?;
            if f2.total < best.total {
                best = f2;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn osc() -> Fhat {
        Fhat::Oscillator(FhatOscillator::uniform(1, 1.0).unwrap())
    }

    #[test]
    fn r_eps_values() {
        assert_abs_diff_eq!(r_eps(0.1, 1e-12).unwrap(), 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(r_eps(0.1, 1.0).unwrap(), 5.0 / 3.0, epsilon = 1e-15);
        let eps = 0.2;
        assert_abs_diff_eq!(
            r_eps(eps, 0.5 / eps).unwrap(),
            (1.0 + 0.25 / eps) / 0.5,
            epsilon = 1e-14
        );
        assert!(r_eps(0.5, 2.0).is_err());
    }

    #[test]
    fn chi_term_by_term() {
        let v = bound_chi(&BoundInputs::new(0.1, 1.0, 1.0, osc())).unwrap();
        let fhat10 = (10.5f64).ln() + 1.0;
        let main = 0.1 * (2.0 + 5.0 / 3.0) * fhat10;
        let x: f64 = 1.0 / 6.0;
        let g_direct = (1.0 + x) * (1.0 + x).ln() - x * x.ln();
        let h2_direct = -0.1 * 0.1f64.ln() - 0.9 * 0.9f64.ln();
        assert_abs_diff_eq!(v.main_term, main, epsilon = 1e-14);
        assert_abs_diff_eq!(v.g_term, 2.0 * g_direct, epsilon = 1e-14);
        assert_abs_diff_eq!(v.h2_term, 2.0 * h2_direct, epsilon = 1e-14);
        assert_abs_diff_eq!(v.total, v.main_term + v.g_term + v.h2_term, epsilon = 1e-12);
        assert_eq!(v.fhat_arg, 10.0);
    }

    #[test]
    fn t_outside_range_is_rejected() {
        assert!(bound_chi(&BoundInputs::new(0.1, 1.0, 5.1, osc())).is_err());
        assert!(bound_chi(&BoundInputs::new(0.1, 1.0, 0.0, osc())).is_err());
        assert!(bound_chi(&BoundInputs::new(0.1, 1.0, 5.0, osc())).is_ok());
        assert!(bound_chi(&BoundInputs::new(0.0, 1.0, 1.0, osc())).is_err());
        let mut spec = BoundInputs::new(
            0.1,
            1.0,
            1.0,
            Fhat::Shifted(Hamiltonian::diagonal(vec![0.0, 1.0]).unwrap()),
        );
        spec.specialized = true;
        assert!(bound_chi(&spec).is_err());
    }

    #[test]
    fn qmi_scales_with_copies() {
        let mut inp = BoundInputs::new(
            0.05,
            0.4,
            2.0,
            Fhat::Shifted(Hamiltonian::diagonal(vec![0.0, 1.0]).unwrap()),
        );
        let one = bound_qmi_n(&inp).unwrap();
        let chi = bound_chi(&inp).unwrap();
        assert_abs_diff_eq!(one.main_term, 2.0 * chi.main_term, epsilon = 1e-15);
        assert_abs_diff_eq!(one.g_term, chi.g_term, epsilon = 1e-15);
        assert_abs_diff_eq!(one.h2_term, 2.0 * chi.h2_term, epsilon = 1e-15);
        inp.n = 3;
        let three = bound_qmi_n(&inp).unwrap();
        assert_abs_diff_eq!(three.total, 3.0 * one.total, epsilon = 1e-13);
        // F_H(E/(εt) + E₀) on a qubit saturates at ln 2 here
        let x = 0.4 / 0.1;
        assert_eq!(one.fhat_arg, x);
        assert_abs_diff_eq!(
            one.main_term,
            2.0 * 0.05 * (4.0 + r_eps(0.05, 2.0).unwrap()) * 2f64.ln(),
            epsilon = 1e-14
        );
        assert_eq!(one.fhat_valid_below, Some(0.5));
    }

    #[test]
    fn gain_enters_only_where_stated() {
        let mut inp = BoundInputs::new(0.1, 1.0, 1.0, osc());
        let chi = bound_chi(&inp).unwrap();
        assert_eq!(bound_holevo_cap(&inp).unwrap(), chi);
        inp.k = 2.0;
        assert_eq!(bound_chi(&inp).unwrap(), chi);
        let cap = bound_holevo_cap(&inp).unwrap();
        assert_eq!(cap.fhat_arg, 20.0);
        assert_abs_diff_eq!(
            cap.main_term,
            0.1 * (2.0 + 5.0 / 3.0) * (20.5f64.ln() + 1.0),
            epsilon = 1e-14
        );
        assert_eq!(bound_ea_cap_input_side(&inp).unwrap().fhat_arg, 10.0);
        assert_eq!(bound_ea_cap_output_side(&inp).unwrap().fhat_arg, 20.0);
    }

    #[test]
    fn specialized_dominates_generic() {
        for &eps in &[0.01, 0.1, 0.5] {
            for &e in &[0.1, 1.0, 100.0] {
                for t in log_grid(1e-4, 0.5 / eps, 15) {
                    let mut inp = BoundInputs::new(eps, e, t, osc());
                    let generic = bound_chi(&inp).unwrap();
                    inp.specialized = true;
                    let spec = bound_chi(&inp).unwrap();
                    assert!(spec.total >= generic.total - 1e-12);
                }
            }
        }
    }

    #[test]
    fn table_interpolates_and_validates() {
        let t = FhatTable::new(vec![1.0, 2.0, 4.0], vec![1.0, 1.5, 2.0]).unwrap();
        assert_abs_diff_eq!(t.eval(1.5), 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(t.eval(8.0), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.eval(0.5), 0.75, epsilon = 1e-15);
        assert!(FhatTable::new(vec![1.0, 2.0, 4.0], vec![1.0, 1.2, 2.0]).is_err());
        assert!(FhatTable::new(vec![1.0, 2.0], vec![1.0, 0.5]).is_err());
        assert!(FhatTable::new(vec![1.0, 2.0], vec![0.1, 1.0]).is_err());
        let v = bound_chi(&BoundInputs::new(0.1, 1.0, 1.0, Fhat::Table(t))).unwrap();
        assert_abs_diff_eq!(v.main_term, 0.1 * (2.0 + 5.0 / 3.0) * 3.5, epsilon = 1e-14);
    }

    #[test]
    fn optimum_beats_endpoints() {
        for kind in BoundKind::ALL {
            for &eps in &[1e-3, 0.05, 0.3, 1.0] {
                let inp = BoundInputs::new(eps, 1.0, 1.0, osc());
                let best = optimize_t(kind, &inp).unwrap();
                for t in [0.25 / eps, 1e-6 / eps, 0.5 / eps] {
                    let at = bound(kind, &BoundInputs { t, ..inp.clone() }).unwrap();
                    assert!(best.total <= at.total, "{kind} ε={eps} t={t}");
                }
                assert!(best.t_used > 0.0 && best.t_used <= 0.5 / eps);
            }
        }
    }

    #[test]
    fn optimum_is_below_every_grid_point() {
        let inp = BoundInputs::new(0.02, 3.0, 1.0, osc());
        let best = optimize_t(BoundKind::Ccap, &inp).unwrap();
        let grid = log_grid(GRID_FLOOR * inp.t_max(), inp.t_max(), GRID_POINTS);
        for v in sweep(BoundKind::Ccap, &inp, &grid).unwrap() {
            assert!(best.total <= v.total);
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in BoundKind::ALL {
            assert_eq!(kind.name().parse::<BoundKind>().unwrap(), kind);
        }
        assert!("nope".parse::<BoundKind>().is_err());
    }
}
