//! Random states, unitaries and channels for sampling-based checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::operator::{Channel, ComplexMatrix, ComplexVector, DensityOperator, Hamiltonian, C64};

/// Deterministic generator for stream `stream` under `seed`. Independent
/// workers use distinct streams so results do not depend on scheduling.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with standard normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexVector {
    let v = ComplexVector::from_fn(d, |_, _| gaussian(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Hilbert-Schmidt random mixed state of rank `min(rank, d)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = crate::operator::trace(&m).re;
    DensityOperator::from_matrix_lossy(&(m / C64::new(tr, 0.0)))
}

/// Matrix with orthonormal columns, from the QR factorization of a Ginibre
/// matrix with the phase ambiguity of `R` removed.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rows, cols, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(d, d, rng)
}

/// Channel with `kraus_count` Kraus operators cut from a random Stinespring
/// isometry.
pub fn random_channel<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    kraus_count: usize,
    rng: &mut R,
) -> Result<Channel> {
    let env = kraus_count.max(in_dim.div_ceil(out_dim));
    let v = random_isometry(env * out_dim, in_dim, rng);
    let kraus = (0..env).map(|j| v.rows(j * out_dim, out_dim).into_owned()).collect();
    Channel::new(kraus)
}

/// Hamiltonian with random levels in `[0, scale)` and a Haar-random eigenbasis.
pub fn random_hamiltonian<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Result<Hamiltonian> {
    let levels = (0..d).map(|_| rng.random::<f64>() * scale).collect();
    Hamiltonian::new(levels, Some(random_unitary(d, rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::unitarity_defect;

    #[test]
    fn isometries_are_isometric() {
        let mut rng = rng_for(7, 0);
        for (r, c) in [(3, 3), (6, 2), (8, 5)] {
            let v = random_isometry(r, c, &mut rng);
            assert!(unitarity_defect(&v) < 1e-12);
        }
    }

    #[test]
    fn random_channels_validate() {
        let mut rng = rng_for(11, 3);
        for (i, o, k) in [(2, 2, 1), (3, 2, 2), (2, 4, 3), (4, 4, 4)] {
            let ch = random_channel(i, o, k, &mut rng).unwrap();
            assert_eq!((ch.in_dim(), ch.out_dim()), (i, o));
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a = random_pure_state(4, &mut rng_for(1, 2));
        let b = random_pure_state(4, &mut rng_for(1, 2));
        let c = random_pure_state(4, &mut rng_for(1, 3));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
