use crate::error::{Error, Result};
use crate::opcore::{partial_trace, tensor_all, von_neumann_entropy, DensityOperator, Operator};
use crate::scalar::Real;
use crate::symrep::{ActionKind, SymmetryAction};

pub const MAX_SIGMA_DIM: usize = 10_000;

/// `(1/|G|) Σ_g |g⟩⟨g| ⊗ U_g τ U_g† ⊗ V_g σ V_g†` on `C ⊗ R ⊗ S`, where the
/// action's two subsystems are `R` and `S`.
pub fn build_sigma_crs<T: Real>(
    action: &SymmetryAction<T>,
    tau: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
) -> Result<DensityOperator<T>> {
    let ActionKind::FiniteGroup { elements } = action.kind() else {
        return Err(Error::UnsupportedAction(format!(
            "the classical register needs a finite group, got {}",
            action.kind_name()
        )));
    };
    let dims = action.dims();
    if dims.len() != 2 {
        return Err(Error::Shape(format!("expected subsystems (R, S), got {}", dims.len())));
    }
    if tau.dim() != dims[0] || sigma.dim() != dims[1] {
        return Err(Error::DimMismatch {
            expected: dims[0] * dims[1],
            got: tau.dim() * sigma.dim(),
        });
    }
    let order = elements.len();
    let total = order * dims[0] * dims[1];
    if total > MAX_SIGMA_DIM {
        return Err(Error::SizeGuard(format!("|G|·d_R·d_S = {total} exceeds {MAX_SIGMA_DIM}")));
    }
    let w = T::one() / T::from_count(order);
    let mut out = Operator::zeros(total, total);
    let block = dims[0] * dims[1];
    for (g, e) in elements.iter().enumerate() {
        let rs = tensor_all(&[e[0].sandwich(tau.matrix()), e[1].sandwich(sigma.matrix())]);
        for i in 0..block {
            for j in 0..block {
                out[(g * block + i, g * block + j)] = rs.get(i, j) * w;
            }
        }
    }
    Ok(DensityOperator::from_trusted(out))
}

fn marginal_entropy<T: Real>(rho: &DensityOperator<T>, dims: &[usize], keep: &[usize]) -> Result<T> {
    Ok(von_neumann_entropy(&partial_trace(rho, dims, keep)?))
}

/// `I(C:S|R) = S(CR) + S(RS) − S(CRS) − S(R)` with `dims = [C, R, S]`.
pub fn conditional_mutual_information<T: Real>(sigma: &DensityOperator<T>, dims: [usize; 3]) -> Result<T> {
    if dims.iter().product::<usize>() != sigma.dim() {
        return Err(Error::DimMismatch {
            expected: sigma.dim(),
            got: dims.iter().product(),
        });
    }
    let s_cr = marginal_entropy(sigma, &dims, &[0, 1])?;
    let s_rs = marginal_entropy(sigma, &dims, &[1, 2])?;
    let s_r = marginal_entropy(sigma, &dims, &[1])?;
    Ok(s_cr + s_rs - von_neumann_entropy(sigma) - s_r)
}

/// `I(A:B) = S(A) + S(B) − S(AB)` for disjoint subsystem sets.
pub fn mutual_information<T: Real>(rho: &DensityOperator<T>, dims: &[usize], a: &[usize], b: &[usize]) -> Result<T> {
    if dims.iter().product::<usize>() != rho.dim() {
        return Err(Error::DimMismatch {
            expected: rho.dim(),
            got: dims.iter().product(),
        });
    }
    if a.iter().any(|x| b.contains(x)) {
        return Err(Error::Shape("subsystem sets overlap".into()));
    }
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(marginal_entropy(rho, dims, a)? + marginal_entropy(rho, dims, b)? - marginal_entropy(rho, dims, &ab)?)
}
