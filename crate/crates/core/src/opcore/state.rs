use std::sync::OnceLock;

use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, Operator, SpectralDecomposition};
use crate::scalar::{Real, C};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace operator.
///
/// The spectral decomposition is computed at most once and cached.
#[derive(Clone, Debug)]
pub struct DensityOperator<T: Real> {
    matrix: Operator<T>,
    spectrum: OnceLock<SpectralDecomposition<T>>,
}

impl<T: Real> DensityOperator<T> {
    /// Validates all three density-operator invariants.
    pub fn new(matrix: Operator<T>) -> Result<Self> {
        let dim = matrix.dim()?;
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let dev = matrix.hermiticity_deviation();
        if !(dev <= T::tol(HERMITIAN_TOL)) {
            return Err(Error::NotHermitian(dev.as_f64()));
        }
        let tr = matrix.trace().re;
        if !((tr - T::one()).abs() <= T::tol(TRACE_TOL)) {
            return Err(Error::InvalidTrace(tr.as_f64()));
        }
        let matrix = matrix.hermitize();
        let spec = hermitian_eig(&matrix)?;
        let min = spec.min_eigenvalue();
        if min < -T::tol(PSD_TOL) {
            return Err(Error::NotPsd(min.as_f64()));
        }
        debug_assert_eq!(spec.dim(), dim);
        let spectrum = OnceLock::new();
        let _ = spectrum.set(spec);
        Ok(Self { matrix, spectrum })
    }

    /// Wraps an operator produced by a construction that preserves the
    /// invariants. Hermiticity is enforced exactly; the remaining invariants
    /// are asserted in debug builds.
    pub(crate) fn from_trusted(matrix: Operator<T>) -> Self {
        let matrix = matrix.hermitize();
        if cfg!(debug_assertions) {
            match Self::new(matrix.clone()) {
                Ok(s) => return s,
                Err(e) => panic!("construction produced an invalid state: {e}"),
            }
        }
        Self {
            matrix,
            spectrum: OnceLock::new(),
        }
    }

    /// Normalizes `psi` and returns `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &[C<T>]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if psi.is_empty() || !(norm > T::zero()) {
            return Err(Error::OutOfRange("zero state vector".into()));
        }
        let v: Vec<C<T>> = psi.iter().map(|&z| z / norm).collect();
        Ok(Self::from_trusted(Operator::outer(&v, &v)))
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        Self::from_trusted(Operator::outer(
            &Operator::<T>::basis_vector(dim, i),
            &Operator::<T>::basis_vector(dim, i),
        ))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(Operator::identity(dim).scale(T::one() / T::from_count(dim)))
    }

    /// `P / Tr P` for a projector `P`.
    pub fn normalized_projector(p: &Operator<T>) -> Result<Self> {
        let tr = p.trace().re;
        if !(tr > T::zero()) {
            return Err(Error::OutOfRange("projector has zero trace".into()));
        }
        Self::new(p.scale(T::one() / tr))
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probs: &[T]) -> Result<Self> {
        Self::new(Operator::real_diag(probs))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &Operator<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Operator<T> {
        self.matrix
    }

    pub fn spectrum(&self) -> &SpectralDecomposition<T> {
        self.spectrum.get_or_init(|| {
            hermitian_eig(&self.matrix).expect("density operator is Hermitian by construction")
        })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.spectrum().eigenvalues
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, p: T, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if !(T::zero()..=T::one()).contains(&p) {
            return Err(Error::OutOfRange(format!("mixing weight {p}")));
        }
        Ok(Self::from_trusted(
            &self.matrix.scale(p) + &other.matrix.scale(T::one() - p),
        ))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_trusted(self.matrix.kron(&other.matrix))
    }

    /// `⟨ψ|ρ|ψ⟩` for a (not necessarily normalized) vector.
    pub fn expectation(&self, psi: &[C<T>]) -> T {
        let rv = self.matrix.apply_to(psi);
        psi.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<C<T>>().re
    }

    /// Population of the kernel of `support` (a projector).
    pub fn weight_outside(&self, support: &Operator<T>) -> T {
        let inside = support.matmul(&self.matrix).trace().re;
        (T::one() - inside).max(T::zero())
    }

    pub fn cast<U: Real>(&self) -> DensityOperator<U> {
        DensityOperator::from_trusted(self.matrix.cast())
    }
}

impl<T: Real> PartialEq for DensityOperator<T> {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl<T: Real> Serialize for DensityOperator<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for DensityOperator<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let m = Operator::deserialize(d)?;
        Self::new(m).map_err(D::Error::custom)
    }
}

/// `|+⟩ = (|0⟩ + |1⟩)/√2`.
pub fn plus_state<T: Real>() -> DensityOperator<T> {
    DensityOperator::pure(&[C::one(), C::one()]).expect("non-zero vector")
}

#[cfg(test)]
pub(crate) fn uniform_vector<T: Real>(n: usize) -> Vec<C<T>> {
    let a = T::one() / T::from_count(n).sqrt();
    vec![crate::scalar::cr(a); n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cr;
    use crate::scalar::c;

    #[test]
    fn validation_paths() {
        let not_herm = Operator::<f64>::from_fn(2, 2, |i, j| if i < j { cr(0.3) } else if i == j { cr(0.5) } else { cr(0.0) });
        assert!(matches!(DensityOperator::new(not_herm), Err(Error::NotHermitian(_))));
        let bad_trace = Operator::<f64>::real_diag(&[0.5, 0.6]);
        assert!(matches!(DensityOperator::new(bad_trace), Err(Error::InvalidTrace(_))));
        let not_psd = Operator::<f64>::real_diag(&[1.5, -0.5]);
        assert!(matches!(DensityOperator::new(not_psd), Err(Error::NotPsd(_))));
        assert!(DensityOperator::new(Operator::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn pure_state_normalizes() {
        let rho = DensityOperator::<f64>::pure(&[c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
        assert!((rho.matrix()[(0, 0)].re - 0.36).abs() < 1e-15);
    }

    #[test]
    fn json_rejects_invalid_state() {
        let s = r#"{"rows":2,"cols":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<DensityOperator<f64>>(s).is_err());
        let s = r#"{"rows":2,"cols":2,"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<DensityOperator<f64>>(s).is_ok());
    }
}
