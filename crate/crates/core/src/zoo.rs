//! Channels and Hamiltonians on Fock-space truncations.

use crate::error::{Error, Result};
use crate::operator::{Channel, ComplexMatrix, DensityOperator, Hamiltonian, C64};
use crate::thermo::FhatOscillator;

/// Single bosonic mode truncated to `levels` Fock states, with levels
/// `ħω (k + ½)`.
#[derive(Debug, Clone)]
pub struct TruncatedOscillator {
    levels: usize,
    hbar_omega: f64,
    hamiltonian: Hamiltonian,
}

impl TruncatedOscillator {
    pub fn new(levels: usize, hbar_omega: f64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Domain("oscillator needs at least one level".into()));
        }
        if !(hbar_omega.is_finite() && hbar_omega > 0.0) {
            return Err(Error::Domain(format!("ħω must be positive, got {hbar_omega}")));
        }
        let hamiltonian = Hamiltonian::diagonal((0..levels).map(|k| hbar_omega * (k as f64 + 0.5)).collect())?;
        Ok(Self {
            levels,
            hbar_omega,
            hamiltonian,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn hbar_omega(&self) -> f64 {
        self.hbar_omega
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// The analytic entropy bound for the untruncated mode.
    pub fn fhat(&self) -> FhatOscillator {
        FhatOscillator::uniform(1, self.hbar_omega).expect("positive frequency")
    }
}

pub fn identity_channel(d: usize) -> Result<Channel> {
    Channel::new(vec![ComplexMatrix::identity(d, d)])
}

/// `ρ ↦ (1-p) ρ + p σ Tr ρ`.
pub fn depolarize_to(sigma: &DensityOperator, p: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("depolarizing weight must be in [0, 1], got {p}")));
    }
    let d = sigma.dim();
    let root = crate::operator::eigh(sigma.matrix()).map(|x| x.max(0.0).sqrt());
    let mut kraus = Vec::new();
    if p < 1.0 {
        kraus.push(ComplexMatrix::identity(d, d) * C64::new((1.0 - p).sqrt(), 0.0));
    }
    if p > 0.0 {
        let sp = C64::new(p.sqrt(), 0.0);
        for j in 0..d {
            let col = root.column(j);
            if col.norm() < 1e-15 {
                continue;
            }
            for i in 0..d {
                let mut k = ComplexMatrix::zeros(d, d);
                k.set_column(i, &(col * sp));
                kraus.push(k);
            }
        }
    }
    Channel::new(kraus)
}

/// Completely depolarizing channel onto the ground (vacuum) state `|0⟩⟨0|`.
pub fn vacuum_depolarizer(d: usize) -> Result<Channel> {
    depolarize_to(&DensityOperator::basis(d, 0), 1.0)
}

/// `ρ ↦ (1-p) ρ + p Σ_k |k⟩⟨k| ρ |k⟩⟨k|`.
pub fn dephasing(d: usize, p: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("dephasing weight must be in [0, 1], got {p}")));
    }
    let mut kraus = vec![ComplexMatrix::identity(d, d) * C64::new((1.0 - p).sqrt(), 0.0)];
    for k in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(k, k)] = C64::new(p.sqrt(), 0.0);
        kraus.push(m);
    }
    Channel::new(kraus)
}

/// Unitary channel with `U = diag(e^{iθk})`.
pub fn phase_rotation(d: usize, theta: f64) -> Result<Channel> {
    let u = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::from_polar(1.0, theta * i as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Channel::unitary(u)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Pure-loss (quantum-limited attenuator) channel on `d` Fock levels with
/// transmissivity `eta`. Photon loss never leaves the truncation, so the
/// Kraus set `K_j|n⟩ = √C(n,j) η^{(n-j)/2} (1-η)^{j/2} |n-j⟩` is exactly
/// trace preserving.
pub fn attenuator(d: usize, eta: f64) -> Result<Channel> {
    if d == 0 {
        return Err(Error::Domain("attenuator needs at least one level".into()));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("transmissivity must be in [0, 1], got {eta}")));
    }
    let kraus = (0..d)
        .map(|j| {
            let mut k = ComplexMatrix::zeros(d, d);
            for n in j..d {
                let amp = binomial(n, j).sqrt() * eta.powf((n - j) as f64 / 2.0) * (1.0 - eta).powf(j as f64 / 2.0);
                k[(n - j, n)] = C64::new(amp, 0.0);
            }
            k
        })
        .collect();
    Channel::new(kraus)
}
