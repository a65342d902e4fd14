//! Output trace norm of `(Θ ⊗ id_R)(|ψ⟩⟨ψ|)` and its gradient.
//!
//! A pure state on `A ⊗ R` is held as its coefficient matrix `C`
//! (`d_A × d_R`, `ψ = vec_row_major(C)`). With the signed factorization
//! `Θ(ρ) = Σ_k w_k K_k ρ K_k†`, the output is `Y W Y†` where the columns of
//! `Y` are `vec(K_k C)`, so its nonzero spectrum lives on the column space of
//! `Y` and can be read off a thin QR factorization.

use faer::Mat;

use super::ascent::Objective;
use crate::error::{Error, Result};
use crate::operator::{
    trace_norm, unvec_row_major, vec_row_major, ComplexMatrix, ComplexVector, HermitianPreservingMap, C64,
};

/// `(Θ ⊗ id_R)(|ψ⟩⟨ψ|) = (I ⊗ Cᵀ) J (I ⊗ C̄)`, evaluated from the Choi matrix.
pub fn congruence_output(map: &HermitianPreservingMap, psi: &ComplexVector, r_dim: usize) -> Result<ComplexMatrix> {
    let (d_a, d_b) = (map.in_dim(), map.out_dim());
    if psi.len() != d_a * r_dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} on A⊗R with dims {d_a} and {r_dim}",
            psi.len()
        )));
    }
    let c = unvec_row_major(psi.as_slice(), d_a, r_dim);
    let ct = c.transpose();
    let lift = crate::operator::tensor(&ComplexMatrix::identity(d_b, d_b), &ct);
    Ok(crate::operator::congruence(&lift, map.choi()))
}

/// `(Θ ⊗ id_R)(|ψ⟩⟨ψ|)` from the signed Kraus terms.
pub fn direct_output(map: &HermitianPreservingMap, psi: &ComplexVector, r_dim: usize) -> Result<ComplexMatrix> {
    let (d_a, d_b) = (map.in_dim(), map.out_dim());
    if psi.len() != d_a * r_dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} on A⊗R with dims {d_a} and {r_dim}",
            psi.len()
        )));
    }
    let c = unvec_row_major(psi.as_slice(), d_a, r_dim);
    let n = d_b * r_dim;
    let mut acc = ComplexMatrix::zeros(n, n);
    for (w, k) in map.terms() {
        let v = vec_row_major(&(k * &c));
        acc.gerc(C64::new(*w, 0.0), &v, &v, C64::new(1.0, 0.0));
    }
    Ok(acc)
}

/// Objective evaluator specialised to one map and reference dimension. The
/// Kraus operators are stacked into one `(m d_B) × d_A` block so that all
/// products `K_k C` come from a single matrix multiplication.
#[derive(Debug, Clone)]
pub(crate) struct Evaluator {
    d_a: usize,
    d_b: usize,
    d_r: usize,
    weights: Vec<f64>,
    stack: Mat<C64>,
    stack_adj: Mat<C64>,
}

impl Evaluator {
    pub(crate) fn new(map: &HermitianPreservingMap, d_r: usize) -> Self {
        let (d_a, d_b) = (map.in_dim(), map.out_dim());
        let terms = map.terms();
        let weights = terms.iter().map(|(w, _)| *w).collect();
        let stack = Mat::from_fn(terms.len() * d_b, d_a, |i, j| terms[i / d_b].1[(i % d_b, j)]);
        let stack_adj = stack.adjoint().to_owned();
        Self {
            d_a,
            d_b,
            d_r,
            weights,
            stack,
            stack_adj,
        }
    }
}

impl Objective for Evaluator {
    /// Value of `‖(Θ ⊗ id)(|ψ⟩⟨ψ|)‖₁` at coefficient matrix `c`, and when
    /// requested the gradient `G` with `df = Re Tr(G† dC)`.
    fn evaluate(&self, c: &ComplexMatrix, want_grad: bool) -> (f64, Option<ComplexMatrix>) {
        let m = self.weights.len();
        if m == 0 {
            return (0.0, want_grad.then(|| ComplexMatrix::zeros(c.nrows(), c.ncols())));
        }
        let (d_b, d_r) = (self.d_b, self.d_r);
        let n = d_b * d_r;
        let cf = Mat::from_fn(self.d_a, d_r, |i, j| c[(i, j)]);
        let kc = &self.stack * &cf;
        // column k is the row-major vec of the d_B × d_R block K_k C
        let y = Mat::from_fn(n, m, |i, k| kc[(k * d_b + i / d_r, i % d_r)]);

        let (value, sy) = if m >= n {
            let yw = Mat::from_fn(n, m, |i, k| y[(i, k)] * self.weights[k]);
            let x = &yw * y.adjoint();
            let (vals, vecs) = hermitian_eigen(&x);
            let value = vals.iter().map(|v| v.abs()).sum();
            let sy = want_grad.then(|| &signed_projector(&vals, &vecs) * &y);
            (value, sy)
        } else {
            let qr = y.qr();
            let q = qr.compute_thin_Q();
            let r = qr.thin_R().to_owned();
            let rw = Mat::from_fn(m, m, |i, k| r[(i, k)] * self.weights[k]);
            let mid = &rw * r.adjoint();
            let (vals, vecs) = hermitian_eigen(&mid);
            let value = vals.iter().map(|v| v.abs()).sum();
            let sy = want_grad.then(|| &q * (&signed_projector(&vals, &vecs) * &r));
            (value, sy)
        };

        let grad = sy.map(|sy| {
            let z = Mat::from_fn(m * d_b, d_r, |i, r| {
                let k = i / d_b;
                sy[((i % d_b) * d_r + r, k)] * (2.0 * self.weights[k])
            });
            let g = &self.stack_adj * &z;
            ComplexMatrix::from_fn(self.d_a, d_r, |i, j| g[(i, j)])
        });
        (value, grad)
    }
}

fn hermitian_eigen(x: &Mat<C64>) -> (Vec<f64>, Mat<C64>) {
    let h = Mat::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] + x[(j, i)].conj()) * 0.5);
    let eig = h
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("self-adjoint eigensolver converges on finite input");
    let s = eig.S().column_vector();
    let vals = (0..h.nrows()).map(|k| s[k].re).collect();
    (vals, eig.U().to_owned())
}

/// `Σ_k sign(λ_k) |v_k⟩⟨v_k|`, with zero eigenvalues counted as positive.
fn signed_projector(vals: &[f64], vecs: &Mat<C64>) -> Mat<C64> {
    let scaled = Mat::from_fn(vecs.nrows(), vecs.ncols(), |i, k| {
        if vals[k] >= 0.0 {
            vecs[(i, k)]
        } else {
            -vecs[(i, k)]
        }
    });
    &scaled * vecs.adjoint()
}

/// Trace norm of the output computed by the Choi-congruence route.
pub(crate) fn congruence_value(map: &HermitianPreservingMap, psi: &ComplexVector, r_dim: usize) -> Result<f64> {
    if map.is_zero() {
        return Ok(0.0);
    }
    Ok(trace_norm(&congruence_output(map, psi, r_dim)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{tensor, Channel};
    use crate::random::{ginibre, random_channel, random_pure_state, rng_for};
    use crate::zoo;

    const ZERO: C64 = C64::new(0.0, 0.0);

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    /// `(Θ ⊗ id)(|ψ⟩⟨ψ|)` by expanding `|ψ⟩⟨ψ|` into `|a⟩⟨b| ⊗ |r⟩⟨s|` blocks.
    fn blockwise_output(map: &HermitianPreservingMap, psi: &ComplexVector, r: usize) -> ComplexMatrix {
        let (d_a, d_b) = (map.in_dim(), map.out_dim());
        let mut out = ComplexMatrix::zeros(d_b * r, d_b * r);
        for a in 0..d_a {
            for b in 0..d_a {
                let mut eab = ComplexMatrix::zeros(d_a, d_a);
                eab[(a, b)] = C64::new(1.0, 0.0);
                let img = map.apply(&eab).unwrap();
                let mut ref_block = ComplexMatrix::zeros(r, r);
                for s in 0..r {
                    for t in 0..r {
                        ref_block[(s, t)] = psi[a * r + s] * psi[b * r + t].conj();
                    }
                }
                out += tensor(&img, &ref_block);
            }
        }
        out
    }

    #[test]
    fn congruence_matches_blockwise_and_direct() {
        let mut rng = rng_for(21, 0);
        for d in [2usize, 3] {
            for r in [1usize, d] {
                let phi = random_channel(d, 2, 2, &mut rng).unwrap();
                let psi_ch = random_channel(d, 2, 3, &mut rng).unwrap();
                let map = HermitianPreservingMap::difference(&phi, &psi_ch).unwrap();
                let v = random_pure_state(d * r, &mut rng);
                let a = congruence_output(&map, &v, r).unwrap();
                let b = blockwise_output(&map, &v, r);
                let c = direct_output(&map, &v, r).unwrap();
                assert!(max_abs(&(&a - &b)) < 1e-12);
                assert!(max_abs(&(&a - &c)) < 1e-12);
            }
        }
    }

    #[test]
    fn evaluator_matches_congruence_both_branches() {
        let mut rng = rng_for(22, 0);
        // few terms (QR branch) and many terms (dense branch)
        for (d, k, r) in [(3usize, 1usize, 3usize), (2, 4, 1), (4, 2, 4)] {
            let phi = random_channel(d, d, k, &mut rng).unwrap();
            let psi_ch = random_channel(d, d, k, &mut rng).unwrap();
            let map = HermitianPreservingMap::difference(&phi, &psi_ch).unwrap();
            let ev = Evaluator::new(&map, r);
            let v = random_pure_state(d * r, &mut rng);
            let c = unvec_row_major(v.as_slice(), d, r);
            let (f, _) = ev.evaluate(&c, false);
            let g = congruence_value(&map, &v, r).unwrap();
            assert!((f - g).abs() < 1e-10, "{f} vs {g}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_for(23, 0);
        for (d, k) in [(3usize, 2usize), (2, 5)] {
            let phi = random_channel(d, d, k, &mut rng).unwrap();
            let psi_ch = random_channel(d, d, k, &mut rng).unwrap();
            let map = HermitianPreservingMap::difference(&phi, &psi_ch).unwrap();
            let ev = Evaluator::new(&map, d);
            let c = ginibre(d, d, &mut rng);
            let (f0, g) = ev.evaluate(&c, true);
            let g = g.unwrap();
            let dir = ginibre(d, d, &mut rng);
            let h = 1e-6;
            let (fp, _) = ev.evaluate(&(&c + &dir * C64::new(h, 0.0)), false);
            let (fm, _) = ev.evaluate(&(&c - &dir * C64::new(h, 0.0)), false);
            let fd = (fp - fm) / (2.0 * h);
            let an: f64 = g.iter().zip(dir.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            assert!(
                (fd - an).abs() < 1e-5 * (1.0 + an.abs()),
                "fd {fd} analytic {an} at f {f0}"
            );
        }
    }

    #[test]
    fn zero_and_single_channel_values() {
        let mut rng = rng_for(24, 0);
        let v = random_pure_state(9, &mut rng);
        let zero = HermitianPreservingMap::zero(3, 2);
        assert_eq!(congruence_value(&zero, &v, 3).unwrap(), 0.0);
        let ch: Channel = random_channel(3, 2, 2, &mut rng).unwrap();
        let single = HermitianPreservingMap::from_channel(&ch);
        assert!((congruence_value(&single, &v, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_minus_dephasing_on_maximally_entangled() {
        let map =
            HermitianPreservingMap::difference(&zoo::identity_channel(2).unwrap(), &zoo::dephasing(2, 1.0).unwrap())
                .unwrap();
        let s = 1.0 / 2f64.sqrt();
        let psi = ComplexVector::from_vec(vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]);
        // output is ½(|00⟩⟨11| + |11⟩⟨00|), eigenvalues ±½
        let x = congruence_output(&map, &psi, 2).unwrap();
        let spec = crate::operator::eigvalsh(&x);
        assert!((spec[0] + 0.5).abs() < 1e-12 && (spec[3] - 0.5).abs() < 1e-12);
        assert!((congruence_value(&map, &psi, 2).unwrap() - 1.0).abs() < 1e-12);
    }
}
