//! Entropic functionals: von Neumann and relative entropy, the Holevo
//! quantity of discrete ensembles, mutual informations, a Holevo-capacity
//! estimator and the energy amplification factor.

use crate::ecd::ascent::{Landscape, Objective};
use crate::ecd::certify::{linear_dual, linear_primal};
use crate::ecd::start_distribution;
use crate::error::{Error, Result};
use crate::operator::{
    eigh, partial_trace, tensor, Channel, ComplexMatrix, ComplexVector, DensityOperator, Factor, Hamiltonian, C64,
    TRACE_TOL,
};
use crate::thermo::eta;

/// Eigenvalues at or below this are treated as zero for support and
/// logarithm purposes.
pub const EIG_FLOOR: f64 = 1e-12;

/// `-Tr A ln A` for a positive semidefinite `A` (not necessarily unit trace).
pub(crate) fn entropy_of(a: &ComplexMatrix) -> f64 {
    eigh(a).values.into_iter().filter(|&x| x > EIG_FLOOR).map(eta).sum()
}

/// Von Neumann entropy `H(ρ) = -Tr ρ ln ρ`.
pub fn entropy(rho: &DensityOperator) -> f64 {
    entropy_of(rho.matrix()).max(0.0)
}

/// `H(ρ‖σ) = Tr ρ ln ρ - Tr ρ ln σ`, `+∞` when the support of `ρ` is not
/// contained in the support of `σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let s = eigh(sigma.matrix());
    let mut cross = 0.0;
    for (k, &lam) in s.values.iter().enumerate() {
        let v = s.vectors.column(k);
        let w = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        if lam > EIG_FLOOR {
            cross -= w * lam.ln();
        } else if w > EIG_FLOOR {
            return Ok(f64::INFINITY);
        }
    }
    Ok((cross - entropy(rho)).max(0.0))
}

/// A finite ensemble `{p_i, ρ_i}` of states on a common space.
#[derive(Debug, Clone)]
pub struct Ensemble {
    probs: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        if probs.is_empty() || probs.len() != states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Domain("ensemble probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::Domain(format!("ensemble probabilities sum to {total}")));
        }
        let d = states[0].dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch("ensemble states differ in dimension".into()));
        }
        Ok(Self { probs, states })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `ρ̄ = Σ p_i ρ_i`.
    pub fn average(&self) -> DensityOperator {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (p, s) in self.probs.iter().zip(&self.states) {
            acc += s.matrix() * C64::new(*p, 0.0);
        }
        DensityOperator::from_matrix_lossy(&acc)
    }

    /// The image ensemble `{p_i, Φ(ρ_i)}`.
    pub fn through(&self, channel: &Channel) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| channel.apply_state(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            probs: self.probs.clone(),
            states,
        })
    }
}

/// `χ(μ) = H(ρ̄) - Σ p_i H(ρ_i)`.
pub fn holevo_chi(ensemble: &Ensemble) -> f64 {
    let mixed: f64 = ensemble
        .probs
        .iter()
        .zip(&ensemble.states)
        .map(|(p, s)| p * entropy(s))
        .sum();
    (entropy(&ensemble.average()) - mixed).max(0.0)
}

/// `χ(μ) = Σ p_i H(ρ_i‖ρ̄)`.
pub fn holevo_chi_divergence(ensemble: &Ensemble) -> f64 {
    let avg = ensemble.average();
    ensemble
        .probs
        .iter()
        .zip(&ensemble.states)
        .map(|(p, s)| p * relative_entropy(s, &avg).expect("members share the average's dimension"))
        .sum()
}

fn bipartite_marginals(rho: &ComplexMatrix, dims: (usize, usize)) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if rho.nrows() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} on a {}x{} bipartition",
            rho.nrows(),
            dims.0,
            dims.1
        )));
    }
    Ok((
        partial_trace(rho, dims, Factor::First)?,
        partial_trace(rho, dims, Factor::Second)?,
    ))
}

/// `I(A:B) = H(ρ_A) + H(ρ_B) - H(ρ_AB)`.
pub fn qmi(rho: &DensityOperator, dims: (usize, usize)) -> Result<f64> {
    let (a, b) = bipartite_marginals(rho.matrix(), dims)?;
    Ok((entropy_of(&a) + entropy_of(&b) - entropy(rho)).max(0.0))
}

/// `I(A:B) = H(ρ_AB ‖ ρ_A ⊗ ρ_B)`.
pub fn qmi_divergence(rho: &DensityOperator, dims: (usize, usize)) -> Result<f64> {
    let (a, b) = bipartite_marginals(rho.matrix(), dims)?;
    relative_entropy(rho, &DensityOperator::from_matrix_lossy(&tensor(&a, &b)))
}

/// Purification `Σ_k √λ_k |v_k⟩|k⟩` on `A ⊗ R` with `dim R = rank ρ`.
/// Returns the vector (reference index fastest) and the reference dimension.
pub fn purify(rho: &DensityOperator) -> (ComplexVector, usize) {
    let s = eigh(rho.matrix());
    let kept: Vec<usize> = (0..s.values.len()).filter(|&k| s.values[k] > EIG_FLOOR).collect();
    let r = kept.len().max(1);
    let d = rho.dim();
    let norm: f64 = kept.iter().map(|&k| s.values[k]).sum();
    let mut psi = ComplexVector::zeros(d * r);
    for (j, &k) in kept.iter().enumerate() {
        let amp = (s.values[k] / norm).sqrt();
        for a in 0..d {
            psi[a * r + j] = s.vectors[(a, k)] * amp;
        }
    }
    if kept.is_empty() {
        psi[0] = C64::new(1.0, 0.0);
    }
    (psi, r)
}

/// `I(Φ, ρ) = I(B:R)` of `(Φ ⊗ id_R)(|ψ⟩⟨ψ|)` for a purification `ψ` of `ρ`.
pub fn channel_mi(channel: &Channel, rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != channel.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel input is {}, state is {}",
            channel.in_dim(),
            rho.dim()
        )));
    }
    let (psi, r) = purify(rho);
    let out = channel.apply_extended_pure(&psi, r)?;
    qmi(&DensityOperator::from_matrix_lossy(&out), (channel.out_dim(), r))
}

/// Holevo quantity of the output ensemble of a channel, as a function of a
/// coefficient matrix whose columns are `√p_i |ψ_i⟩` (so `CC† = ρ̄`).
#[derive(Debug, Clone)]
struct ChiObjective {
    kraus: Vec<ComplexMatrix>,
}

impl ChiObjective {
    /// `ln A` on the support of `A`, zero on its kernel.
    fn log_on_support(a: &ComplexMatrix) -> (f64, ComplexMatrix) {
        let s = eigh(a);
        let s_val = s.values.iter().filter(|&&x| x > EIG_FLOOR).map(|&x| eta(x)).sum();
        let log = s.map(|x| if x > EIG_FLOOR { x.ln() } else { 0.0 });
        (s_val, log)
    }

    fn output(&self, c: &ComplexMatrix) -> ComplexMatrix {
        let d_b = self.kraus[0].nrows();
        let mut acc = ComplexMatrix::zeros(d_b, d_b);
        for k in &self.kraus {
            let kc = k * c;
            acc += &kc * kc.adjoint();
        }
        acc
    }

    fn adjoint_on(&self, y: &ComplexMatrix, c: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(c.nrows(), c.ncols());
        for k in &self.kraus {
            acc += k.adjoint() * (y * (k * c));
        }
        acc
    }
}

impl Objective for ChiObjective {
    // χ = S(Φ(CC†)) - Σ_i [S(Φ(c_i c_i†)) + p_i ln p_i] with S(A) = -Tr A ln A
    fn evaluate(&self, c: &ComplexMatrix, want_grad: bool) -> (f64, Option<ComplexMatrix>) {
        let (s_avg, log_avg) = Self::log_on_support(&self.output(c));
        let mut value = s_avg;
        let mut grad = want_grad.then(|| ComplexMatrix::zeros(c.nrows(), c.ncols()));
        for i in 0..c.ncols() {
            let ci = c.column(i).into_owned();
            let p = ci.norm_squared();
            if p <= EIG_FLOOR {
                continue;
            }
            let ci = ComplexMatrix::from_column_slice(c.nrows(), 1, ci.as_slice());
            let (s_i, log_i) = Self::log_on_support(&self.output(&ci));
            value -= s_i - eta(p);
            if let Some(g) = grad.as_mut() {
                let gi = self.adjoint_on(&(&log_i - &log_avg), &ci) * C64::new(2.0, 0.0)
                    - &ci * C64::new(2.0 * (p.ln() + 1.0), 0.0);
                g.set_column(i, &gi.column(0));
            }
        }
        (value, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacityOptions {
    /// Maximal number of pure states in the ensemble.
    pub ensemble_size: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl CapacityOptions {
    /// `d²` states, enough for any extreme point of the ensemble set.
    pub fn for_input_dim(d: usize) -> Self {
        Self {
            ensemble_size: d * d,
            restarts: 8,
            seed: 0,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CapacityEstimate {
    /// `χ` of the output ensemble of `ensemble`, a lower bound on `C_χ`.
    pub value: f64,
    /// Input ensemble of pure states (members with weight at or below
    /// [`EIG_FLOOR`] dropped).
    pub ensemble: Ensemble,
    pub average_energy: f64,
}

/// Lower estimate of the energy-constrained Holevo capacity
/// `C_χ(Φ, H, E) = sup { χ(Φ(μ)) : Tr H ρ̄(μ) ≤ E }` by multi-start
/// projected ascent over pure-state ensembles.
pub fn holevo_capacity_estimate(
    channel: &Channel,
    h: &Hamiltonian,
    e: f64,
    options: &CapacityOptions,
) -> Result<CapacityEstimate> {
    if h.dim() != channel.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian has {} levels, channel input is {}",
            h.dim(),
            channel.in_dim()
        )));
    }
    if !e.is_finite() || e <= h.ground_energy() {
        return Err(Error::Infeasible(format!(
            "energy budget {e} is not above the ground energy {}",
            h.ground_energy()
        )));
    }
    if options.ensemble_size == 0 {
        return Err(Error::Domain("ensemble size must be at least 1".into()));
    }
    let basis = h.eigenbasis();
    let objective = ChiObjective {
        kraus: channel.kraus().iter().map(|k| k * basis).collect(),
    };
    let land = Landscape::new(objective, options.ensemble_size, h.eigenvalues().to_vec(), Some(e));
    let first = land.diagonal_start(&start_distribution(h, e));
    let best = land.multi_start(first, &[], options.restarts, options.seed, options.max_iter);
    let c = basis * best.coefficients;
    let mut probs = Vec::new();
    let mut states = Vec::new();
    for col in c.column_iter() {
        let p = col.norm_squared();
        if p > EIG_FLOOR {
            probs.push(p);
            states.push(DensityOperator::from_pure(
                &(col.into_owned() / C64::new(p.sqrt(), 0.0)),
            )?);
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let ensemble = Ensemble::new(probs, states)?;
    let average_energy = crate::operator::energy(&ensemble.average(), h)?;
    Ok(CapacityEstimate {
        value: holevo_chi(&ensemble.through(channel)?),
        ensemble,
        average_energy,
    })
}

#[derive(Debug, Clone)]
pub struct EnergyGain {
    /// `k` with `sup { Tr H_out Φ(ρ) : Tr H_in ρ ≤ E } = kE`.
    pub k: f64,
    /// The supremum itself, `kE`.
    pub max_output_energy: f64,
    /// Dual minimizer `μ`.
    pub mu: f64,
    /// Output energy of `witness`, a feasible input; a lower bound on
    /// `max_output_energy`.
    pub primal: f64,
    pub witness: DensityOperator,
}

/// Energy amplification factor of `Φ` at input energy `E`, from the dual
/// `min_{μ≥0} λ_max(Φ*(H_out) - μH_in) + μE`.
pub fn energy_gain(channel: &Channel, h_in: &Hamiltonian, h_out: &Hamiltonian, e: f64) -> Result<EnergyGain> {
    if h_in.dim() != channel.in_dim() || h_out.dim() != channel.out_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}->{}, Hamiltonians have {} and {} levels",
            channel.in_dim(),
            channel.out_dim(),
            h_in.dim(),
            h_out.dim()
        )));
    }
    if !e.is_finite() || e <= h_in.ground_energy() {
        return Err(Error::Infeasible(format!(
            "energy budget {e} is not above the ground energy {}",
            h_in.ground_energy()
        )));
    }
    if e <= 0.0 {
        return Err(Error::Domain("energy budget must be positive".into()));
    }
    let a = channel.adjoint_apply(&h_out.matrix())?;
    let dual = linear_dual(&a, h_in, e);
    let (primal, witness) = linear_primal(&a, h_in, e, dual.mu);
    Ok(EnergyGain {
        k: dual.value / e,
        max_output_energy: dual.value,
        mu: dual.mu,
        primal,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{ginibre, random_channel, random_density, random_hamiltonian, random_pure_state, rng_for};
    use crate::thermo::{f_h, h2};
    use crate::zoo;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_values() {
        let mut rng = rng_for(71, 0);
        let pure = DensityOperator::from_pure(&random_pure_state(4, &mut rng)).unwrap();
        assert!(entropy(&pure) < 1e-10);
        assert_abs_diff_eq!(
            entropy(&DensityOperator::maximally_mixed(5)),
            5f64.ln(),
            epsilon = 1e-12
        );
        let q = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(entropy(&q), h2(0.25).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn relative_entropy_cases() {
        let mut rng = rng_for(72, 0);
        let rho = random_density(3, 3, &mut rng);
        assert!(relative_entropy(&rho, &rho).unwrap() < 1e-10);
        let sigma = DensityOperator::diagonal(&[0.5, 0.5, 0.0]).unwrap();
        let outside = DensityOperator::basis(3, 2);
        assert_eq!(relative_entropy(&outside, &sigma).unwrap(), f64::INFINITY);
        let p = DensityOperator::diagonal(&[0.5, 0.5]).unwrap();
        let q = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let kl = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert_abs_diff_eq!(relative_entropy(&p, &q).unwrap(), kl, epsilon = 1e-14);
    }

    #[test]
    fn ensemble_validation() {
        let s = vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)];
        assert!(Ensemble::new(vec![0.5, 0.4], s.clone()).is_err());
        assert!(Ensemble::new(vec![1.0, 0.0], s.clone()).is_err());
        assert!(Ensemble::new(vec![1.0], s).is_err());
    }

    #[test]
    fn chi_of_orthogonal_bit_and_identical_states() {
        let s = vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)];
        let bit = Ensemble::new(vec![0.5, 0.5], s).unwrap();
        assert_abs_diff_eq!(holevo_chi(&bit), 2f64.ln(), epsilon = 1e-12);
        let rho = random_density(3, 2, &mut rng_for(73, 0));
        let same = Ensemble::new(vec![0.2, 0.8], vec![rho.clone(), rho]).unwrap();
        assert!(holevo_chi(&same) < 1e-10);
    }

    #[test]
    fn chi_formulas_agree() {
        let mut rng = rng_for(74, 0);
        for _ in 0..20 {
            let states = (0..3).map(|_| random_density(2, 2, &mut rng)).collect();
            let ens = Ensemble::new(vec![0.2, 0.3, 0.5], states).unwrap();
            assert_abs_diff_eq!(holevo_chi(&ens), holevo_chi_divergence(&ens), epsilon = 1e-9);
        }
    }

    #[test]
    fn qmi_cases() {
        let mut rng = rng_for(75, 0);
        let a = random_density(2, 2, &mut rng);
        let b = random_density(3, 2, &mut rng);
        let prod = DensityOperator::from_matrix_lossy(&tensor(a.matrix(), b.matrix()));
        assert!(qmi(&prod, (2, 3)).unwrap() < 1e-10);
        let bell = ComplexVector::from_vec(vec![
            C64::new(0.5f64.sqrt(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.5f64.sqrt(), 0.0),
        ]);
        let bell = DensityOperator::from_pure(&bell).unwrap();
        assert_abs_diff_eq!(qmi(&bell, (2, 2)).unwrap(), 2.0 * 2f64.ln(), epsilon = 1e-12);
        for _ in 0..10 {
            let rho = random_density(6, 4, &mut rng);
            assert_abs_diff_eq!(
                qmi(&rho, (2, 3)).unwrap(),
                qmi_divergence(&rho, (2, 3)).unwrap(),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn channel_mi_cases() {
        let id = zoo::identity_channel(2).unwrap();
        let mixed = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(channel_mi(&id, &mixed).unwrap(), 2.0 * 2f64.ln(), epsilon = 1e-12);
        let dep = zoo::vacuum_depolarizer(3).unwrap();
        let rho = random_density(3, 3, &mut rng_for(76, 0));
        assert!(channel_mi(&dep, &rho).unwrap() < 1e-10);
    }

    #[test]
    fn channel_mi_ignores_the_purification() {
        let mut rng = rng_for(77, 0);
        let ch = random_channel(2, 2, 3, &mut rng).unwrap();
        let rho = random_density(2, 2, &mut rng);
        let (psi, r) = purify(&rho);
        // a second purification on a larger reference, rotated by an isometry
        let v = crate::random::random_isometry(3, r, &mut rng);
        let c = crate::operator::unvec_row_major(psi.as_slice(), 2, r) * v.transpose();
        let other = crate::operator::vec_row_major(&c);
        let out = ch.apply_extended_pure(&other, 3).unwrap();
        let alt = qmi(&DensityOperator::from_matrix_lossy(&out), (2, 3)).unwrap();
        assert_abs_diff_eq!(channel_mi(&ch, &rho).unwrap(), alt, epsilon = 1e-9);
    }

    #[test]
    fn chi_gradient_matches_finite_differences() {
        let mut rng = rng_for(78, 0);
        let ch = random_channel(3, 2, 2, &mut rng).unwrap();
        let obj = ChiObjective {
            kraus: ch.kraus().to_vec(),
        };
        let c = ginibre(3, 4, &mut rng);
        let c = &c / C64::new(c.norm(), 0.0);
        let (f0, g) = obj.evaluate(&c, true);
        let g = g.unwrap();
        let dir = ginibre(3, 4, &mut rng);
        let step = 1e-6;
        let fp = obj.evaluate(&(&c + &dir * C64::new(step, 0.0)), false).0;
        let fm = obj.evaluate(&(&c - &dir * C64::new(step, 0.0)), false).0;
        let fd = (fp - fm) / (2.0 * step);
        let analytic: f64 = g.iter().zip(dir.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        assert!((fd - analytic).abs() < 1e-6 * (1.0 + fd.abs()), "{fd} vs {analytic}");
        // the value is the Holevo quantity of the output ensemble
        let probs: Vec<f64> = c.column_iter().map(|x| x.norm_squared()).collect();
        let states = c
            .column_iter()
            .map(|x| DensityOperator::from_pure(&(x.into_owned() / C64::new(x.norm(), 0.0))).unwrap())
            .collect();
        let ens = Ensemble::new(probs, states).unwrap().through(&ch).unwrap();
        assert_abs_diff_eq!(f0, holevo_chi(&ens), epsilon = 1e-10);
    }

    fn quick(d: usize) -> CapacityOptions {
        CapacityOptions {
            restarts: 3,
            ..CapacityOptions::for_input_dim(d)
        }
    }

    #[test]
    fn capacity_of_identity_and_depolarizer() {
        let h = zoo::TruncatedOscillator::new(4, 1.0).unwrap().hamiltonian().clone();
        let id = zoo::identity_channel(4).unwrap();
        let unc = holevo_capacity_estimate(&id, &h, 3.0, &quick(4)).unwrap();
        assert!((unc.value - 4f64.ln()).abs() < 0.02);
        let con = holevo_capacity_estimate(&id, &h, 1.0, &quick(4)).unwrap();
        assert!((con.value - f_h(&h, 1.0).unwrap()).abs() < 0.02);
        assert!(con.average_energy <= 1.0 + 1e-9);
        let dep = zoo::vacuum_depolarizer(4).unwrap();
        assert!(holevo_capacity_estimate(&dep, &h, 1.0, &quick(4)).unwrap().value < 1e-9);
    }

    #[test]
    fn capacity_from_random_starts_only() {
        // without the diagonal start the ascent still finds the identity capacity
        let h = Hamiltonian::diagonal(vec![0.0, 1.0, 2.0]).unwrap();
        let id = zoo::identity_channel(3).unwrap();
        let basis = h.eigenbasis();
        let land = Landscape::new(
            ChiObjective {
                kraus: id.kraus().iter().map(|k| k * basis).collect(),
            },
            9,
            h.eigenvalues().to_vec(),
            Some(0.6),
        );
        let mut rng = rng_for(79, 0);
        let best = (0..4)
            .map(|_| land.climb(ginibre(3, 9, &mut rng), 5000).value)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - f_h(&h, 0.6).unwrap()).abs() < 0.02, "{best}");
    }

    #[test]
    fn energy_gain_cases() {
        let h = zoo::TruncatedOscillator::new(5, 1.0).unwrap().hamiltonian().clone();
        let id = zoo::identity_channel(5).unwrap();
        let gain = energy_gain(&id, &h, &h, 2.0).unwrap();
        assert_abs_diff_eq!(gain.k, 1.0, epsilon = 1e-9);
        let dep = zoo::vacuum_depolarizer(5).unwrap();
        let gain = energy_gain(&dep, &h, &h, 2.0).unwrap();
        assert_abs_diff_eq!(gain.k, 0.5 / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn energy_gain_primal_closes_the_gap() {
        let mut rng = rng_for(80, 0);
        for _ in 0..10 {
            let ch = random_channel(4, 3, 2, &mut rng).unwrap();
            let h_in = random_hamiltonian(4, 3.0, &mut rng).unwrap();
            let h_out = random_hamiltonian(3, 2.0, &mut rng).unwrap();
            let e = h_in.ground_energy() + 0.4 * (h_in.max_energy() - h_in.ground_energy());
            let gain = energy_gain(&ch, &h_in, &h_out, e).unwrap();
            let we = crate::operator::energy(&gain.witness, &h_in).unwrap();
            assert!(we <= e + 1e-9);
            assert!(gain.primal <= gain.max_output_energy + 1e-9);
            assert!(gain.max_output_energy - gain.primal < 1e-6);
        }
    }
}
