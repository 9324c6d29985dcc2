use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, Operator};
use crate::qchannel::Channel;
use crate::scalar::{Real, C};
use crate::symrep::{Subsystem, SymmetryAction};

/// Default clustering tolerance, relative to the spectral range.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;

/// Orthogonal projectors onto the eigenspaces of a Hermitian operator (or any
/// complete set of orthogonal projectors).
#[derive(Clone, Debug)]
pub struct EigenBlocks<T: Real> {
    projectors: Vec<Operator<T>>,
    labels: Vec<T>,
    /// Eigenbasis and per-column block index, when built from a spectrum.
    basis: Option<(Operator<T>, Vec<usize>)>,
}

impl<T: Real> EigenBlocks<T> {
    /// Builds blocks from explicit projectors, checking completeness and
    /// orthogonality to 1e-9.
    pub fn from_projectors(projectors: Vec<Operator<T>>, labels: Vec<T>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::Shape("no projectors".into()))?;
        let n = first.dim()?;
        if labels.len() != projectors.len() {
            return Err(Error::Shape("one label per projector required".into()));
        }
        let tol = T::tol(1e-9);
        let mut sum = Operator::zeros(n, n);
        for (a, p) in projectors.iter().enumerate() {
            if p.rows() != n || p.cols() != n {
                return Err(Error::DimMismatch {
                    expected: n,
                    got: p.rows(),
                });
            }
            sum = &sum + p;
            for (b, q) in projectors.iter().enumerate() {
                let pq = p.matmul(q);
                let dev = if a == b { (&pq - p).max_abs() } else { pq.max_abs() };
                if dev > tol {
                    return Err(Error::OutOfRange(format!(
                        "projectors {a},{b} violate P_a P_b = δ_ab P_a by {dev}"
                    )));
                }
            }
        }
        let dev = (&sum - &Operator::identity(n)).max_abs();
        if dev > tol {
            return Err(Error::OutOfRange(format!("projectors do not sum to identity ({dev})")));
        }
        Ok(Self {
            projectors,
            labels,
            basis: None,
        })
    }

    /// Computational-basis blocks of the given sizes, in order.
    pub fn from_block_sizes(sizes: &[usize]) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        let mut start = 0;
        let mut projectors = Vec::with_capacity(sizes.len());
        for &s in sizes {
            let p = Operator::from_fn(n, n, |i, j| {
                if i == j && i >= start && i < start + s {
                    C::one()
                } else {
                    C::zero()
                }
            });
            projectors.push(p);
            start += s;
        }
        let labels = (0..sizes.len()).map(T::from_count).collect();
        Self::from_projectors(projectors, labels)
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[Operator<T>] {
        &self.projectors
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projectors
            .iter()
            .map(|p| p.trace().re.round().to_usize().unwrap_or(0))
            .collect()
    }

    /// `Σ_n Π_n X Π_n`.
    pub fn dephase(&self, x: &Operator<T>) -> Operator<T> {
        if let Some((v, cluster)) = &self.basis {
            let y = v.adjoint().matmul(x).matmul(v);
            let masked = Operator::from_fn(y.rows(), y.cols(), |i, j| {
                if cluster[i] == cluster[j] {
                    y.get(i, j)
                } else {
                    C::zero()
                }
            });
            return v.matmul(&masked).matmul(&v.adjoint());
        }
        let n = x.rows();
        self.projectors
            .iter()
            .fold(Operator::zeros(n, n), |acc, p| &acc + &p.sandwich(x))
    }

    /// `Σ_n e^{-iλ_n t} Π_n`.
    pub fn evolution(&self, t: T) -> Operator<T> {
        let n = self.dim();
        self.projectors
            .iter()
            .zip(&self.labels)
            .fold(Operator::zeros(n, n), |acc, (p, &l)| {
                &acc + &p.scale_c(C::from_polar(T::one(), -l * t))
            })
    }

    /// The dephasing map `D(·) = Σ_j Π_j (·) Π_j` as a channel.
    pub fn dephasing_map(&self) -> Channel<T> {
        let n = self.dim();
        Channel::new(n, n, self.projectors.clone(), "dephasing")
            .expect("complete projector set is trace preserving")
    }

    /// Finite group `{Σ_j s_j Π_j : s ∈ {±1}^m}` whose twirl equals the
    /// dephasing map. Covariance under it is equivalent to commuting with `D`.
    pub fn sign_group(&self, label: &str) -> Result<SymmetryAction<T>> {
        let m = self.len();
        if m > 12 {
            return Err(Error::SizeGuard(format!("2^{m} sign-group elements")));
        }
        let n = self.dim();
        let elements = (0..(1usize << m))
            .map(|bits| {
                let u = self
                    .projectors
                    .iter()
                    .enumerate()
                    .fold(Operator::zeros(n, n), |acc, (j, p)| {
                        let s = if bits >> j & 1 == 1 { -T::one() } else { T::one() };
                        &acc + &p.scale(s)
                    });
                vec![u]
            })
            .collect();
        SymmetryAction::finite_group(vec![Subsystem::new(label, n)], elements)
    }
}

/// Clusters the spectrum of `h` into eigenspaces. Consecutive sorted
/// eigenvalues closer than `tol` share a block; `None` uses
/// [`DEGENERACY_REL_TOL`] times the spectral range.
pub fn eigenblocks<T: Real>(h: &Operator<T>, tol: Option<T>) -> Result<EigenBlocks<T>> {
    let spec = hermitian_eig(h)?;
    let vals = &spec.eigenvalues;
    let n = vals.len();
    let range = spec.max_eigenvalue() - spec.min_eigenvalue();
    let tol = tol.unwrap_or_else(|| T::lit(DEGENERACY_REL_TOL) * range);

    let mut cluster = vec![0usize; n];
    let mut members: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..n {
        if vals[i] - vals[i - 1] > tol {
            members.push(Vec::new());
        }
        let id = members.len() - 1;
        members[id].push(i);
        cluster[i] = id;
    }
    let labels = members
        .iter()
        .map(|m| m.iter().map(|&i| vals[i]).sum::<T>() / T::from_count(m.len()))
        .collect();
    let projectors = members
        .iter()
        .map(|m| spec.projector(|i, _| m.contains(&i)))
        .collect();
    Ok(EigenBlocks {
        projectors,
        labels,
        basis: Some((spec.eigenvectors, cluster)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{embed, DensityOperator};
    use crate::scalar::cr;

    #[test]
    fn explicit_degeneracy() {
        let h = Operator::<f64>::real_diag(&[0.0, 1.0, 1.0]);
        let b = eigenblocks(&h, None).unwrap();
        assert_eq!(b.ranks(), vec![1, 2]);
    }

    #[test]
    fn within_tolerance_merges() {
        let h = Operator::<f64>::real_diag(&[0.0, 1e-14]);
        let b = eigenblocks(&h, Some(1e-9)).unwrap();
        assert_eq!(b.ranks(), vec![2]);
    }

    #[test]
    fn clock_generator_blocks() {
        // Oracle: enumerate basis pairs (n_R, n_S) and count by n_R + n_S.
        let (dr, ds) = (3usize, 2usize);
        let mut counts = vec![0usize; dr + ds - 1];
        for nr in 0..dr {
            for ns in 0..ds {
                counts[nr + ns] += 1;
            }
        }
        assert_eq!(counts, vec![1, 2, 2, 1]);

        let nr = Operator::<f64>::real_diag(&[0.0, 1.0, 2.0]);
        let ns = Operator::<f64>::real_diag(&[0.0, 1.0]);
        let h = &embed(&nr, &[dr, ds], 0) + &embed(&ns, &[dr, ds], 1);
        let b = eigenblocks(&h, None).unwrap();
        assert_eq!(b.ranks(), counts);
        for (l, want) in b.labels().iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((l - want).abs() < 1e-12);
        }
    }

    #[test]
    fn blocks_are_complete_and_orthogonal() {
        let h = Operator::<f64>::real_diag(&[2.0, 0.0, 2.0, 1.0, 0.0]);
        let b = eigenblocks(&h, None).unwrap();
        let checked = EigenBlocks::from_projectors(b.projectors().to_vec(), b.labels().to_vec());
        assert!(checked.is_ok());
    }

    #[test]
    fn dephasing_map_examples() {
        let full = EigenBlocks::<f64>::from_block_sizes(&[3]).unwrap();
        let d = full.dephasing_map();
        let rho = crate::random::random_state::<f64, _>(3, &mut rand::thread_rng());
        assert!((d.apply(&rho).unwrap().matrix() - rho.matrix()).max_abs() < 1e-14);

        let qubit = EigenBlocks::<f64>::from_block_sizes(&[1, 1]).unwrap();
        let out = qubit.dephasing_map().apply(&crate::opcore::plus_state()).unwrap();
        assert!((out.matrix() - &Operator::real_diag(&[0.5, 0.5])).max_abs() < 1e-15);

        // Uniform pure state on dim 3, blocks {1,2}: the projected state is
        // diag(1/3) ⊕ (rank-one 2/3 block), eigenvalues {1/3, 2/3}.
        let blocks = EigenBlocks::<f64>::from_block_sizes(&[1, 2]).unwrap();
        let psi = DensityOperator::pure(&[cr(1.0), cr(1.0), cr(1.0)]).unwrap();
        let out = blocks.dephasing_map().apply(&psi).unwrap();
        let ev = out.eigenvalues();
        assert!(ev[0].abs() < 1e-12);
        assert!((ev[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((ev[2] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sign_group_twirl_is_dephasing() {
        let blocks = EigenBlocks::<f64>::from_block_sizes(&[1, 2, 1]).unwrap();
        let g = blocks.sign_group("X").unwrap();
        let rho = crate::random::random_state::<f64, _>(4, &mut rand::thread_rng());
        let a = g.twirl(&rho).unwrap();
        let b = blocks.dephase(rho.matrix());
        assert!((a.matrix() - &b).max_abs() < 1e-14);
    }
}
