//! Entropies, fidelity, norms and matrix functions restricted to supports.
//!
//! All logarithms are base 2; entropies are in bits.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, hermitian_eigenvalues, DensityOperator, Operator, SpectralDecomposition};
use crate::scalar::{cr, Real, C};

/// Relative cutoff below which eigenvalues count as zero.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Weight of `ρ` outside `supp(σ)` above which `S(ρ‖σ)` is declared infinite.
pub const SUPPORT_LEAK_TOL: f64 = 1e-10;

/// Absolute threshold for "zero" given the largest eigenvalue.
#[inline]
pub fn support_threshold<T: Real>(max_eigenvalue: T, cutoff: T) -> T {
    cutoff * max_eigenvalue.max(T::one())
}

/// Applies `f` to the eigenvalues above the support threshold; the rest map to 0.
pub fn func_on_support<T: Real>(
    spec: &SpectralDecomposition<T>,
    f: impl Fn(T) -> C<T>,
    cutoff: T,
) -> Operator<T> {
    let thr = support_threshold(spec.max_eigenvalue(), cutoff);
    let w: Vec<C<T>> = spec
        .eigenvalues
        .iter()
        .map(|&x| if x > thr { f(x) } else { C::zero() })
        .collect();
    spec.compose_with(&w)
}

pub fn matrix_func_on_support<T: Real>(
    m: &Operator<T>,
    f: impl Fn(T) -> C<T>,
    cutoff: T,
) -> Result<Operator<T>> {
    let spec = hermitian_eig(m)?;
    let min = spec.min_eigenvalue();
    if min < -T::tol(1e-10) {
        return Err(Error::NotPsd(min.as_f64()));
    }
    let thr = support_threshold(spec.max_eigenvalue(), cutoff);
    for &x in spec.eigenvalues.iter().filter(|&&x| x > thr) {
        let y = f(x);
        if !y.re.is_finite() || !y.im.is_finite() {
            return Err(Error::OutOfRange(format!("function undefined at retained eigenvalue {x}")));
        }
    }
    Ok(func_on_support(&spec, f, cutoff))
}

/// Projector onto the support (eigenvalues above the default cutoff).
pub fn support_projector<T: Real>(spec: &SpectralDecomposition<T>) -> Operator<T> {
    func_on_support(spec, |_| C::one(), T::lit(SUPPORT_CUTOFF))
}

pub fn support_rank<T: Real>(eigenvalues: &[T]) -> usize {
    let max = eigenvalues.iter().copied().fold(T::zero(), T::max);
    let thr = support_threshold(max, T::lit(SUPPORT_CUTOFF));
    eigenvalues.iter().filter(|&&x| x > thr).count()
}

/// `ρ^{p}` on the support, for real `p` (negative powers are pseudo-inverses).
pub fn power_on_support<T: Real>(spec: &SpectralDecomposition<T>, p: T) -> Operator<T> {
    func_on_support(spec, |x| cr(x.powf(p)), T::lit(SUPPORT_CUTOFF))
}

/// Unitary `ρ^{it}` on the support, extended by the identity on the kernel.
pub fn imaginary_power<T: Real>(spec: &SpectralDecomposition<T>, t: T) -> Operator<T> {
    let thr = support_threshold(spec.max_eigenvalue(), T::lit(SUPPORT_CUTOFF));
    let w: Vec<C<T>> = spec
        .eigenvalues
        .iter()
        .map(|&x| {
            if x > thr {
                C::from_polar(T::one(), t * x.ln())
            } else {
                C::one()
            }
        })
        .collect();
    spec.compose_with(&w)
}

#[inline]
fn xlog2x<T: Real>(x: T) -> T {
    if x > T::zero() {
        x * x.log2()
    } else {
        T::zero()
    }
}

/// `−Σ λ log₂ λ` over a spectrum, with `0 log 0 = 0`.
pub fn entropy_of_spectrum<T: Real>(eigenvalues: &[T]) -> T {
    let max = eigenvalues.iter().copied().fold(T::zero(), T::max);
    let thr = support_threshold(max, T::lit(SUPPORT_CUTOFF));
    -eigenvalues
        .iter()
        .filter(|&&x| x > thr)
        .map(|&x| xlog2x(x))
        .sum::<T>()
}

pub fn von_neumann_entropy<T: Real>(rho: &DensityOperator<T>) -> T {
    let s = entropy_of_spectrum(rho.eigenvalues());
    s.max(T::zero()).min(T::from_count(rho.dim()).log2())
}

/// Shannon entropy of a probability vector in bits.
pub fn shannon_entropy<T: Real>(p: &[T]) -> T {
    -p.iter().map(|&x| xlog2x(x)).sum::<T>()
}

/// Quantum relative entropy value; `Infinite` when `supp(ρ) ⊄ supp(σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelEntropy<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> RelEntropy<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            RelEntropy::Finite(x) => Some(x),
            RelEntropy::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, RelEntropy::Infinite)
    }
}

/// `S(ρ‖σ) = Tr ρ(log₂ρ − log₂σ)`.
pub fn relative_entropy<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<RelEntropy<T>> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let ss = sigma.spectrum();
    let thr = support_threshold(ss.max_eigenvalue(), T::lit(SUPPORT_CUTOFF));
    let n = rho.dim();
    let v = &ss.eigenvectors;
    // Diagonal of ρ in σ's eigenbasis.
    let mut leak = T::zero();
    let mut cross = T::zero();
    for k in 0..n {
        let col = v.column(k);
        let w = rho.expectation(&col);
        let mu = ss.eigenvalues[k];
        if mu > thr {
            cross += w * mu.log2();
        } else {
            leak += w.max(T::zero());
        }
    }
    if leak > T::tol(SUPPORT_LEAK_TOL) {
        return Ok(RelEntropy::Infinite);
    }
    let neg_s = -entropy_of_spectrum(rho.eigenvalues());
    Ok(RelEntropy::Finite(neg_s - cross))
}

/// `F(ρ₁, ρ₂) = ‖√ρ₁ √ρ₂‖₁`, evaluated as `Σ √eig(√ρ₁ ρ₂ √ρ₁)`.
pub fn fidelity<T: Real>(a: &DensityOperator<T>, b: &DensityOperator<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    // The pure-state form avoids square roots of eigenvalues at rounding level.
    for (p, q) in [(a, b), (b, a)] {
        if support_rank(p.eigenvalues()) == 1 {
            let spec = p.spectrum();
            let top = spec.eigenvalues.len() - 1;
            let f = (spec.eigenvalues[top] * q.expectation(&spec.eigenvectors.column(top))).max(T::zero()).sqrt();
            return Ok(f.min(T::one()));
        }
    }
    let sa = power_on_support(a.spectrum(), T::lit(0.5));
    let m = sa.matmul(b.matrix()).matmul(&sa);
    let f: T = hermitian_eigenvalues(&m.hermitize())?
        .into_iter()
        .map(|x| x.max(T::zero()).sqrt())
        .sum();
    Ok(f.max(T::zero()).min(T::one()))
}

/// Sum of singular values.
pub fn trace_norm<T: Real>(m: &Operator<T>) -> T {
    let scale = m.max_abs();
    if scale.is_zero() {
        return T::zero();
    }
    if m.is_square() && m.hermiticity_deviation() <= T::tol(1e-13) * scale {
        return hermitian_eigenvalues(m)
            .expect("Hermitian input")
            .into_iter()
            .map(T::abs)
            .sum();
    }
    let g = m.adjoint().matmul(m);
    hermitian_eigenvalues(&g.hermitize())
        .expect("Gram matrix is Hermitian")
        .into_iter()
        .map(|x| x.max(T::zero()).sqrt())
        .sum()
}

/// `‖ρ − σ‖₁` (no factor 1/2).
pub fn trace_distance<T: Real>(a: &DensityOperator<T>, b: &DensityOperator<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(trace_norm(&(a.matrix() - b.matrix())))
}

/// `H(x) = −x log₂x − (1−x) log₂(1−x)`.
pub fn binary_entropy<T: Real>(x: T) -> Result<T> {
    if !(T::zero()..=T::one()).contains(&x) {
        return Err(Error::OutOfRange(format!("binary entropy argument {x}")));
    }
    Ok(-xlog2x(x) - xlog2x(T::one() - x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::plus_state;
    use crate::scalar::c;

    const CUT: f64 = SUPPORT_CUTOFF;

    #[test]
    fn inverse_sqrt_is_pseudo_inverse() {
        let m = Operator::<f64>::real_diag(&[4.0, 0.0]);
        let r = matrix_func_on_support(&m, |x| cr(1.0 / x.sqrt()), CUT).unwrap();
        assert!((&r - &Operator::real_diag(&[0.5, 0.0])).max_abs() < 1e-15);
    }

    #[test]
    fn imaginary_power_at_zero_is_identity() {
        let m = Operator::<f64>::identity(1);
        let t = 0.0;
        let r = matrix_func_on_support(&m, |x| C::from_polar(1.0, t * x.ln()), CUT).unwrap();
        assert_eq!(r, Operator::identity(1));
    }

    #[test]
    fn log2_of_half() {
        let m = Operator::<f64>::real_diag(&[0.5, 0.5]);
        let r = matrix_func_on_support(&m, |x| cr(x.log2()), CUT).unwrap();
        assert!((&r - &Operator::real_diag(&[-1.0, -1.0])).max_abs() < 1e-15);
    }

    #[test]
    fn matrix_func_rejects_negative_input() {
        let m = Operator::<f64>::real_diag(&[1.0, -0.1]);
        assert!(matches!(
            matrix_func_on_support(&m, |x| cr(x), CUT),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn entropies() {
        let pure = DensityOperator::<f64>::basis(3, 1);
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        let mixed = DensityOperator::<f64>::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed) - 1.0).abs() < 1e-12);
        let d = DensityOperator::<f64>::diagonal(&[0.75, 0.25]).unwrap();
        // Oracle: −Σ p log₂ p evaluated directly.
        let direct = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((von_neumann_entropy(&d) - direct).abs() < 1e-12);
        assert!((von_neumann_entropy(&d) - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_cases() {
        let rho = plus_state::<f64>();
        assert!(relative_entropy(&rho, &rho).unwrap().finite().unwrap().abs() < 1e-10);
        let zero = DensityOperator::<f64>::basis(2, 0);
        let one = DensityOperator::<f64>::basis(2, 1);
        let mm = DensityOperator::<f64>::maximally_mixed(2);
        let v = relative_entropy(&zero, &mm).unwrap().finite().unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(relative_entropy(&zero, &one).unwrap(), RelEntropy::Infinite);
        assert!(relative_entropy(&zero, &DensityOperator::maximally_mixed(3)).is_err());
    }

    #[test]
    fn fidelity_cases() {
        let p = plus_state::<f64>();
        assert!((fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        let z0 = DensityOperator::<f64>::basis(2, 0);
        let z1 = DensityOperator::<f64>::basis(2, 1);
        assert!(fidelity(&z0, &z1).unwrap().abs() < 1e-12);
        let oracle = 1.0 / 2f64.sqrt();
        assert!((fidelity(&z0, &p).unwrap() - oracle).abs() < 1e-9);
        assert!((fidelity(&p, &z0).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn trace_norm_cases() {
        let x = Operator::<f64>::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((trace_norm(&x) - 2.0).abs() < 1e-12);
        let z = Operator::<f64>::real_diag(&[1.0, -1.0]);
        assert!((trace_norm(&z) - 2.0).abs() < 1e-12);
        let r = plus_state::<f64>();
        assert_eq!(trace_norm(&(r.matrix() - r.matrix())), 0.0);
        // Non-Hermitian: |0⟩⟨1| has a single singular value 1.
        let e01 = Operator::<f64>::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(0.0, 1.0) } else { C::zero() });
        assert!((trace_norm(&e01) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_cases() {
        assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0f64).unwrap(), 0.0);
        assert!((binary_entropy(0.5f64).unwrap() - 1.0).abs() < 1e-15);
        let direct = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((binary_entropy(0.25f64).unwrap() - direct).abs() < 1e-12);
        assert!((binary_entropy(0.25f64).unwrap() - 0.811278).abs() < 1e-6);
        assert!(binary_entropy(1.5f64).is_err());
        assert!(binary_entropy(-0.1f64).is_err());
    }
}
