//! Seeded random instances: Haar unitaries and vectors, Ginibre states,
//! random channels.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::opcore::{DensityOperator, Operator};
use crate::qchannel::Channel;
use crate::scalar::{c, Real, C};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(T::lit(re), T::lit(im))
}

fn ginibre<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Operator<T> {
    Operator::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Modified Gram–Schmidt on the columns; returns an isometry.
fn orthonormalize_columns<T: Real>(m: &Operator<T>) -> Operator<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q: Vec<Vec<C<T>>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = m.column(j);
        for _ in 0..2 {
            for u in &q {
                let proj: C<T> = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for vi in &mut v {
            *vi = *vi / norm;
        }
        q.push(v);
    }
    Operator::from_fn(rows, cols, |i, j| q[j][i])
}

/// Normalized Haar-random vector.
pub fn haar_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C<T>> {
    let v: Vec<C<T>> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-random unitary via Gram–Schmidt of a Ginibre matrix.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator<T> {
    orthonormalize_columns(&ginibre(n, n, rng))
}

pub fn random_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator<T> {
    ginibre::<T, R>(n, n, rng).hermitize()
}

/// Full-rank Hilbert–Schmidt random state.
pub fn random_state<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityOperator<T> {
    random_state_with_rank(n, n, rng)
}

/// Random state `GG†/Tr(GG†)` with `G` an `n × rank` Ginibre matrix.
pub fn random_state_with_rank<T: Real, R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> DensityOperator<T> {
    let g = ginibre::<T, R>(n, rank.max(1), rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityOperator::from_trusted(m.scale(T::one() / tr))
}

pub fn random_pure<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityOperator<T> {
    DensityOperator::pure(&haar_vector::<T, R>(n, rng)).expect("non-zero vector")
}

/// Random channel from a Haar isometry, with `n_kraus` Kraus operators or
/// the fewest that can make it trace preserving, whichever is larger.
pub fn random_channel<T: Real, R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    n_kraus: usize,
    rng: &mut R,
) -> Channel<T> {
    let n_kraus = n_kraus.max(in_dim.div_ceil(out_dim.max(1))).max(1);
    let iso = orthonormalize_columns(&ginibre::<T, R>(n_kraus * out_dim, in_dim, rng));
    let kraus = (0..n_kraus)
        .map(|k| Operator::from_fn(out_dim, in_dim, |i, j| iso.get(k * out_dim + i, j)))
        .filter(|op| !op.max_abs().is_zero())
        .collect();
    Channel::new(in_dim, out_dim, kraus, "random").expect("isometry blocks are trace preserving")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn too_few_kraus_operators_are_raised() {
        let e = random_channel::<f64, _>(4, 2, 1, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(e.kraus().len(), 2);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = haar_unitary::<f64, _>(6, &mut rng);
        assert!(u.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn random_state_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rho = random_state_with_rank::<f64, _>(5, 2, &mut rng);
        let rank = crate::opcore::support_rank(rho.eigenvalues());
        assert_eq!(rank, 2);
    }
}
