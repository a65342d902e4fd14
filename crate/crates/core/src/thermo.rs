//! Entropy maximization under a mean-energy constraint.
//!
//! All logarithms are natural. In a finite truncation the maximal entropy
//! saturates at `ln d` once the budget reaches the uniform-state energy
//! `Tr H / d`; past that point the Gibbs parameter `λ` would have to be
//! negative, which [`gibbs_lambda`] permits but [`f_h`] never needs.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityOperator, Hamiltonian, C64};

/// `-x ln x`, with `η(0) = 0`.
pub fn eta(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Binary entropy.
pub fn h2(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("h2 needs 0 <= x <= 1, got {x}")));
    }
    Ok(eta(x) + eta(1.0 - x))
}

/// `g(x) = (x+1) ln(x+1) - x ln x`, the entropy of a thermal mode with mean
/// occupation `x`.
pub fn g(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("g needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * x.ln_1p() - x * x.ln())
}

/// Solution of the mean-energy equation `Tr H e^{-λH} = E Tr e^{-λH}`.
#[derive(Debug, Clone)]
pub struct GibbsSolution {
    pub lambda: f64,
    pub state: DensityOperator,
    pub mean_energy: f64,
    /// Von Neumann entropy of `state`, `λE + ln Tr e^{-λH}`.
    pub entropy: f64,
}

/// Boltzmann weights at inverse temperature `lambda`, shifted to avoid
/// overflow. Returns the normalized populations, `ln Tr e^{-λH}` and the mean
/// energy.
fn boltzmann(levels: &[f64], lambda: f64) -> (Vec<f64>, f64, f64) {
    let shift = if lambda >= 0.0 {
        levels[0]
    } else {
        levels[levels.len() - 1]
    };
    let weights: Vec<f64> = levels.iter().map(|&e| (-lambda * (e - shift)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let mean = probs.iter().zip(levels).map(|(p, e)| p * e).sum();
    (probs, -lambda * shift + z.ln(), mean)
}

/// The Gibbs state `e^{-λH} / Tr e^{-λH}`.
pub fn gibbs_state(h: &Hamiltonian, lambda: f64) -> DensityOperator {
    solution_at(h, lambda).state
}

fn solution_at(h: &Hamiltonian, lambda: f64) -> GibbsSolution {
    let (probs, log_z, mean) = boltzmann(h.eigenvalues(), lambda);
    let diag = DVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0)));
    let v = h.eigenbasis();
    let m: ComplexMatrix = v * ComplexMatrix::from_diagonal(&diag) * v.adjoint();
    GibbsSolution {
        lambda,
        state: DensityOperator::from_matrix_lossy(&m),
        mean_energy: mean,
        entropy: lambda * mean + log_z,
    }
}

/// Solve for `λ(E)` by bisection. `E` must lie strictly between the ground
/// and top energies of `h`.
pub fn gibbs_lambda(h: &Hamiltonian, e: f64) -> Result<GibbsSolution> {
    let levels = h.eigenvalues();
    let (e0, emax) = (h.ground_energy(), h.max_energy());
    if !(e > e0 && e < emax) {
        return Err(Error::Infeasible(format!(
            "mean energy {e} outside the open interval ({e0}, {emax})"
        )));
    }
    let tol = 1e-9 * e.abs().max(1.0);
    let mean_at = |lambda: f64| boltzmann(levels, lambda).2;

    let span = emax - e0;
    let mut lo = -50.0 / span;
    let mut hi = 50.0 / span;
    // mean energy is decreasing in λ: want mean(lo) >= E >= mean(hi)
    let mut expansions = 0;
    while mean_at(lo) < e {
        lo *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::NoConvergence("could not bracket λ from below".into()));
        }
    }
    while mean_at(hi) > e {
        hi *= 2.0;
        expansions += 1;
        if expansions > 400 {
            return Err(Error::NoConvergence("could not bracket λ from above".into()));
        }
    }

    // bisect the bracket down to rounding: dλ = dE / Var(H) is large when the
    // variance is small, so a residual test on the energy would stop early
    let mut best = (f64::INFINITY, 0.5 * (lo + hi));
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        let m = mean_at(mid);
        let err = (m - e).abs();
        if err < best.0 {
            best = (err, mid);
        }
        if m > e {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    if best.0 > tol {
        return Err(Error::NoConvergence(format!(
            "bisection for λ stalled with energy error {:e}",
            best.0
        )));
    }
    Ok(solution_at(h, best.1))
}

/// `F_H(E) = sup { H(ρ) : Tr Hρ <= E }`.
pub fn f_h(h: &Hamiltonian, e: f64) -> Result<f64> {
    let e0 = h.ground_energy();
    if e.is_nan() || e < e0 {
        return Err(Error::Infeasible(format!("energy {e} is below the ground energy {e0}")));
    }
    if e >= h.uniform_mean() {
        return Ok((h.dim() as f64).ln());
    }
    if e - e0 <= 1e-12 * e0.abs().max(1.0) {
        return Ok((h.ground_multiplicity() as f64).ln());
    }
    let sol = gibbs_lambda(h, e)?;
    // clamp for budgets so close to E₀ that λ overflows the weights
    Ok(sol.entropy.max((h.ground_multiplicity() as f64).ln()))
}

/// `F̂_{ℓ,ω}(E) = ℓ ln((E + E₀)/(ℓ E_*)) + ℓ`, an upper bound on the maximal
/// entropy of an `ℓ`-mode oscillator with frequencies `ħω_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FhatOscillator {
    frequencies: Vec<f64>,
}

impl FhatOscillator {
    pub fn new(frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::Domain("oscillator needs at least one mode".into()));
        }
        if frequencies.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Domain("mode frequencies must be positive".into()));
        }
        Ok(Self { frequencies })
    }

    /// `ℓ` identical modes of frequency `hbar_omega`.
    pub fn uniform(modes: usize, hbar_omega: f64) -> Result<Self> {
        Self::new(vec![hbar_omega; modes])
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// `E₀ = ½ Σ ħω_i`.
    pub fn ground_energy(&self) -> f64 {
        0.5 * self.frequencies.iter().sum::<f64>()
    }

    /// `E_* = (Π ħω_i)^{1/ℓ}`.
    pub fn geometric_mean(&self) -> f64 {
        let l = self.modes() as f64;
        (self.frequencies.iter().map(|w| w.ln()).sum::<f64>() / l).exp()
    }

    pub fn eval(&self, e: f64) -> Result<f64> {
        if e.is_nan() || e <= 0.0 {
            return Err(Error::Domain(format!("F̂ needs E > 0, got {e}")));
        }
        let l = self.modes() as f64;
        Ok(l * ((e + self.ground_energy()) / (l * self.geometric_mean())).ln() + l)
    }
}

/// `F_H(E + E₀)` together with the largest argument for which it is still
/// strictly increasing (beyond it the truncation saturates at `ln d`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedFhat {
    pub value: f64,
    pub valid_below: f64,
}

pub fn fhat_shifted(h: &Hamiltonian, e: f64) -> Result<ShiftedFhat> {
    if e.is_nan() || e <= 0.0 {
        return Err(Error::Domain(format!("F̂ needs E > 0, got {e}")));
    }
    let e0 = h.ground_energy();
    Ok(ShiftedFhat {
        value: f_h(h, e + e0)?,
        valid_below: h.uniform_mean() - e0,
    })
}
