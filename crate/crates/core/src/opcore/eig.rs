//! Hermitian eigendecomposition backed by faer.

use faer::{c64, Mat, Side};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::opcore::Operator;
use crate::scalar::{cr, Real, C};

/// `M = V diag(λ) V†` with `λ` ascending and `V` unitary.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Operator<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    /// `Σ_k w_k |v_k⟩⟨v_k|` for per-eigenvalue complex weights.
    pub fn compose_with(&self, weights: &[C<T>]) -> Operator<T> {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = Operator::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for i in 0..n {
                let vi = v.get(i, k) * w;
                if vi.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vi * v.get(j, k).conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Operator<T> {
        let w: Vec<C<T>> = self.eigenvalues.iter().map(|&x| cr(x)).collect();
        self.compose_with(&w)
    }

    /// Projector onto the span of eigenvectors whose index satisfies `keep`.
    pub fn projector(&self, keep: impl Fn(usize, T) -> bool) -> Operator<T> {
        let w: Vec<C<T>> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &x)| if keep(i, x) { C::one() } else { C::zero() })
            .collect();
        self.compose_with(&w)
    }
}

fn check_hermitian<T: Real>(m: &Operator<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    let dev = m.hermiticity_deviation();
    let scale = m.max_abs().max(T::one());
    if !(dev <= T::tol(1e-8) * scale) {
        return Err(Error::NotHermitian(dev.as_f64()));
    }
    Ok(())
}

fn to_faer<T: Real>(m: &Operator<T>) -> Mat<c64> {
    Mat::from_fn(m.rows(), m.cols(), |i, j| {
        let z = m.get(i, j);
        c64::new(z.re.as_f64(), z.im.as_f64())
    })
}

fn eig_failed(e: impl std::fmt::Debug) -> Error {
    Error::OutOfRange(format!("eigendecomposition did not converge: {e:?}"))
}

/// Full eigendecomposition of a Hermitian matrix (symmetrized internally).
///
/// The factorization runs in `f64` for every scalar type.
pub fn hermitian_eig<T: Real>(m: &Operator<T>) -> Result<SpectralDecomposition<T>> {
    check_hermitian(m)?;
    let n = m.rows();
    let eig = to_faer(&m.hermitize()).self_adjoint_eigen(Side::Lower).map_err(eig_failed)?;
    let (s, u) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let eigenvalues = order.iter().map(|&k| T::lit(s[k].re)).collect();
    let eigenvectors = Operator::from_fn(n, n, |i, j| {
        let z = u[(i, order[j])];
        C::new(T::lit(z.re), T::lit(z.im))
    });
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &Operator<T>) -> Result<Vec<T>> {
    check_hermitian(m)?;
    let mut vals = to_faer(&m.hermitize())
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(eig_failed)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals.into_iter().map(T::lit).collect())
}
