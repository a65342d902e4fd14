//! Multi-start projected gradient ascent on the unit sphere of `A ⊗ R`,
//! carried out in the eigenbasis of `H_A` so that `H_A ⊗ I` is diagonal.

use rayon::prelude::*;

use crate::operator::{ComplexMatrix, C64, DEGENERACY_GAP};
use crate::random::{gaussian, rng_for};

/// Relative improvement below which a run counts as stalled.
const STALL_TOL: f64 = 1e-9;
/// Window (in accepted iterations) over which stalling is measured.
const STALL_WINDOW: usize = 20;
const MAX_HALVINGS: usize = 40;
const MAX_STEP: f64 = 2.0;
const INITIAL_STEP: f64 = 0.3;

/// A smooth (or subdifferentiable) function of a `d_A × d_R` coefficient
/// matrix. `evaluate` returns the value and, when requested, the gradient
/// `G` with `df = Re Tr(G† dC)`.
pub(crate) trait Objective: Sync {
    fn evaluate(&self, c: &ComplexMatrix, want_grad: bool) -> (f64, Option<ComplexMatrix>);
}

/// A constrained maximization problem in energy-eigenbasis coordinates:
/// unit vectors on `A ⊗ R` whose `A` marginal has energy at most the cap.
#[derive(Debug, Clone)]
pub(crate) struct Landscape<O> {
    objective: O,
    d_a: usize,
    d_r: usize,
    /// Energy of each row of `C`, nondecreasing.
    levels: Vec<f64>,
    /// Number of leading rows in the ground cluster.
    ground: usize,
    cap: Option<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Climb {
    pub value: f64,
    pub coefficients: ComplexMatrix,
}

impl<O: Objective> Landscape<O> {
    /// `objective` must already be expressed in the eigenbasis whose
    /// energies are `levels`. A cap of `None` means no energy constraint.
    pub(crate) fn new(objective: O, d_r: usize, levels: Vec<f64>, cap: Option<f64>) -> Self {
        let e0 = levels.first().copied().unwrap_or(0.0);
        let ground = levels.iter().take_while(|&&e| e <= e0 + DEGENERACY_GAP).count().max(1);
        let cap = cap.filter(|&e| e < *levels.last().unwrap_or(&0.0));
        Self {
            objective,
            d_a: levels.len(),
            d_r,
            levels,
            ground,
            cap,
        }
    }

    pub(crate) fn energy(&self, c: &ComplexMatrix) -> f64 {
        (0..self.d_a).map(|a| self.levels[a] * c.row(a).norm_squared()).sum()
    }

    /// Nearest feasible unit vector to `c`. Stationarity of the distance
    /// under both constraints gives rows scaled by `1/(1 + μ(E_a - E₀))`, and
    /// the energy after renormalization falls monotonically in `μ ≥ 0`, so `μ`
    /// is found by bisection. Without any ground-level weight the limit
    /// `μ → ∞` is not feasible; then `c` is instead rotated toward a ground
    /// vector until the constraint is active.
    pub(crate) fn project(&self, c: &mut ComplexMatrix) {
        let n = c.norm();
        if n > 0.0 {
            c.unscale_mut(n);
        } else {
            c[(0, 0)] = C64::new(1.0, 0.0);
        }
        let Some(cap) = self.cap else { return };
        if self.energy(c) <= cap {
            return;
        }
        let weights: Vec<f64> = (0..self.d_a).map(|a| c.row(a).norm_squared()).collect();
        let ground_weight: f64 = weights[..self.ground].iter().sum();
        let e0 = self.levels[0];
        let shifted = |mu: f64| {
            let (mut num, mut den) = (0.0, 0.0);
            for (a, w) in weights.iter().enumerate() {
                let s = 1.0 / (1.0 + mu * (self.levels[a] - e0));
                num += self.levels[a] * w * s * s;
                den += w * s * s;
            }
            num / den
        };
        let mut hi = 1.0 / (self.levels[self.d_a - 1] - e0);
        let mut found = false;
        if ground_weight > 1e-24 {
            for _ in 0..200 {
                if shifted(hi) <= cap {
                    found = true;
                    break;
                }
                hi *= 4.0;
            }
        }
        if !found {
            self.rotate_to_ground(c, cap);
            return;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if shifted(mid) <= cap {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        for a in 0..self.d_a {
            let s = 1.0 / (1.0 + hi * (self.levels[a] - e0));
            c.row_mut(a).scale_mut(s);
        }
        let n = c.norm();
        c.unscale_mut(n);
    }

    /// Rotate a unit vector with no ground-level weight toward `|0⟩|r⟩`,
    /// `r` the reference index carrying the most weight, until the
    /// constraint is active. The two parts have orthogonal support, so the
    /// angle is available in closed form.
    fn rotate_to_ground(&self, c: &mut ComplexMatrix, cap: f64) {
        let e = self.energy(c);
        let e0 = self.levels[0];
        let r = (0..self.d_r)
            .max_by(|&i, &j| c.column(i).norm().total_cmp(&c.column(j).norm()))
            .unwrap_or(0);
        let mut low = ComplexMatrix::zeros(self.d_a, self.d_r);
        low[(0, r)] = C64::new(1.0, 0.0);
        let g = self.ground;
        let mut high = c.clone();
        high.rows_mut(0, g).fill(C64::new(0.0, 0.0));
        let hn = high.norm();
        let e_high = if hn > 0.0 { e / (hn * hn) } else { e };
        high.unscale_mut(hn.max(1e-300));
        let cos2 = ((cap - e0) / (e_high - e0)).clamp(0.0, 1.0);
        *c = high * C64::new(cos2.sqrt(), 0.0) + low * C64::new((1.0 - cos2).sqrt(), 0.0);
    }

    #[cfg(test)]
    pub(crate) fn value(&self, c: &ComplexMatrix) -> f64 {
        self.objective.evaluate(c, false).0
    }

    /// Riemannian gradient on the sphere; when the energy constraint is
    /// active, the component that would raise the energy is removed.
    fn direction(&self, c: &ComplexMatrix, grad: &ComplexMatrix) -> ComplexMatrix {
        let mut dir = grad - c * C64::new(re_inner(c, grad), 0.0);
        if let Some(cap) = self.cap {
            if self.energy(c) >= cap * (1.0 - 1e-12) - 1e-15 {
                let mut h = c.clone();
                for a in 0..self.d_a {
                    h.row_mut(a).scale_mut(2.0 * self.levels[a]);
                }
                let h = &h - c * C64::new(re_inner(c, &h), 0.0);
                let hh = h.norm_squared();
                let up = re_inner(&dir, &h);
                if up > 0.0 && hh > 0.0 {
                    dir -= h * C64::new(up / hh, 0.0);
                }
            }
        }
        dir
    }

    /// Projected gradient ascent from `start`. Trial steps use the
    /// Barzilai-Borwein length from the previous pair of iterates and are
    /// halved until the objective increases.
    pub(crate) fn climb(&self, start: ComplexMatrix, max_iter: usize) -> Climb {
        let mut c = start;
        self.project(&mut c);
        let (mut f, g) = self.objective.evaluate(&c, true);
        let mut dir = self.direction(&c, &g.expect("gradient requested"));
        let mut alpha = INITIAL_STEP / dir.norm().max(1e-300);
        let mut history = vec![f];
        for _ in 0..max_iter {
            if dir.norm() < 1e-14 {
                break;
            }
            let mut accepted = None;
            let mut trial_alpha = alpha;
            for _ in 0..MAX_HALVINGS {
                let mut trial = &c + &dir * C64::new(trial_alpha, 0.0);
                self.project(&mut trial);
                let (ft, gt) = self.objective.evaluate(&trial, true);
                if ft > f {
                    accepted = Some((trial, ft, gt.expect("gradient requested")));
                    break;
                }
                trial_alpha *= 0.5;
            }
            let Some((next, f_next, g_next)) = accepted else { break };
            let dir_next = self.direction(&next, &g_next);
            let s = &next - &c;
            let y = &dir_next - &dir;
            let sy = re_inner(&s, &y);
            let ss = s.norm_squared();
            alpha = if sy < 0.0 {
                (ss / -sy).min(MAX_STEP / dir_next.norm().max(1e-300))
            } else {
                2.0 * trial_alpha
            };
            c = next;
            f = f_next;
            dir = dir_next;
            history.push(f);
            let k = history.len();
            if k > STALL_WINDOW && f - history[k - 1 - STALL_WINDOW] <= STALL_TOL * f.abs() {
                break;
            }
        }
        Climb {
            value: f,
            coefficients: c,
        }
    }

    /// Deterministic start: `Σ_a √p_a |a⟩|a⟩` for a distribution `p` over the
    /// lowest `min(d_A, d_R)` levels.
    pub(crate) fn diagonal_start(&self, probs: &[f64]) -> ComplexMatrix {
        let mut c = ComplexMatrix::zeros(self.d_a, self.d_r);
        for (a, p) in probs.iter().enumerate().take(self.d_a.min(self.d_r)) {
            c[(a, a)] = C64::new(p.max(0.0).sqrt(), 0.0);
        }
        c
    }

    /// Best of `restarts` climbs (start 0 is `first`, the rest Haar random)
    /// plus one climb from each warm start. Ties keep the earliest run.
    pub(crate) fn multi_start(
        &self,
        first: ComplexMatrix,
        warm: &[ComplexMatrix],
        restarts: usize,
        seed: u64,
        max_iter: usize,
    ) -> Climb {
        let n = restarts.max(1);
        let runs: Vec<Climb> = (0..n + warm.len())
            .into_par_iter()
            .map(|i| {
                let start = if i == 0 {
                    first.clone()
                } else if i < n {
                    let mut rng = rng_for(seed, i as u64);
                    ComplexMatrix::from_fn(self.d_a, self.d_r, |_, _| gaussian(&mut rng))
                } else {
                    warm[i - n].clone()
                };
                self.climb(start, max_iter)
            })
            .collect();
        runs.into_iter()
            .reduce(|best, run| if run.value > best.value { run } else { best })
            .expect("at least one run")
    }
}

fn re_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecd::objective::Evaluator;
    use crate::operator::HermitianPreservingMap;
    use crate::random::{ginibre, random_channel};

    fn landscape(cap: Option<f64>) -> Landscape<Evaluator> {
        let mut rng = rng_for(31, 0);
        let phi = random_channel(4, 3, 2, &mut rng).unwrap();
        let psi = random_channel(4, 3, 2, &mut rng).unwrap();
        let map = HermitianPreservingMap::difference(&phi, &psi).unwrap();
        Landscape::new(Evaluator::new(&map, 4), 4, vec![0.5, 1.5, 2.5, 3.5], cap)
    }

    #[test]
    fn projection_lands_on_the_cap() {
        let l = landscape(Some(1.0));
        let mut rng = rng_for(32, 0);
        for _ in 0..50 {
            let mut c = ginibre(4, 4, &mut rng);
            l.project(&mut c);
            assert!((c.norm() - 1.0).abs() < 1e-12);
            assert!(l.energy(&c) <= 1.0 + 1e-12);
        }
        // no ground component at all
        let mut c = ComplexMatrix::zeros(4, 4);
        c[(3, 1)] = C64::new(1.0, 0.0);
        l.project(&mut c);
        assert!((l.energy(&c) - 1.0).abs() < 1e-12);
        assert!((c[(0, 1)].norm_sqr() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn projection_is_nearest_feasible_point() {
        let l = landscape(Some(1.3));
        let mut rng = rng_for(34, 0);
        for _ in 0..20 {
            let mut target = ginibre(4, 4, &mut rng);
            target.unscale_mut(target.norm());
            let mut p = target.clone();
            l.project(&mut p);
            let best = (&p - &target).norm();
            let mut checked = 0;
            for _ in 0..400 {
                let mut q = &p + ginibre(4, 4, &mut rng) * C64::new(0.05, 0.0);
                q.unscale_mut(q.norm());
                if l.energy(&q) <= 1.3 {
                    checked += 1;
                    assert!((&q - &target).norm() >= best - 1e-12);
                }
            }
            assert!(checked > 0);
        }
    }

    #[test]
    fn feasible_points_are_untouched() {
        let l = landscape(Some(3.0));
        let mut c = ComplexMatrix::zeros(4, 4);
        c[(0, 0)] = C64::new(0.6, 0.0);
        c[(2, 3)] = C64::new(0.0, 0.8);
        let before = c.clone();
        l.project(&mut c);
        assert!((c - before).norm() < 1e-15);
    }

    #[test]
    fn climbing_never_decreases_and_stays_feasible() {
        let l = landscape(Some(1.2));
        let mut rng = rng_for(33, 0);
        let mut start = ginibre(4, 4, &mut rng);
        l.project(&mut start);
        let f0 = l.value(&start);
        let out = l.climb(start, 500);
        assert!(out.value >= f0);
        assert!(l.energy(&out.coefficients) <= 1.2 + 1e-12);
        assert!((l.value(&out.coefficients) - out.value).abs() < 1e-12);
    }

    #[test]
    fn cap_above_spectrum_is_dropped() {
        let l = landscape(Some(10.0));
        assert!(l.cap.is_none());
    }
}
