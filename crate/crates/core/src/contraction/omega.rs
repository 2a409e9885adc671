use crate::divergences::{chi2_weights, StandardMonotoneFn};
use crate::error::Result;
use crate::linalg::{hs_inner, vectorize, CMatrix, DensityMatrix, Superoperator, C64};

/// The quantum inversion `Ω_σ^g`, diagonal on the matrix units of the σ eigenbasis with
/// weights `g(μ_i/μ_j)/μ_j`, together with its inverse and square roots.
#[derive(Debug, Clone)]
pub struct OmegaOperator {
    sigma: DensityMatrix,
    g: StandardMonotoneFn,
    weights: Vec<f64>,
    forward: Superoperator,
    inverse: Superoperator,
    sqrt: Superoperator,
    inv_sqrt: Superoperator,
}

pub fn omega(sigma: &DensityMatrix, g: &StandardMonotoneFn) -> Result<OmegaOperator> {
    let weights = chi2_weights(sigma, g)?;
    let v = &sigma.spectrum().vectors;
    // vec(V E_ij V†) = (conj(V) ⊗ V) vec(E_ij)
    let u = v.conjugate().kronecker(v);
    let d = sigma.dim();
    let build = |phi: &dyn Fn(f64) -> f64| -> Result<Superoperator> {
        let mut scaled = u.clone();
        for (k, &w) in weights.iter().enumerate() {
            let s = phi(w);
            scaled.column_mut(k).scale_mut(s);
        }
        Superoperator::from_matrix(d, scaled * u.adjoint())
    };
    Ok(OmegaOperator {
        sigma: sigma.clone(),
        g: g.clone(),
        forward: build(&|w| w)?,
        inverse: build(&|w| 1.0 / w)?,
        sqrt: build(&f64::sqrt)?,
        inv_sqrt: build(&|w| 1.0 / w.sqrt())?,
        weights,
    })
}

impl OmegaOperator {
    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn g(&self) -> &StandardMonotoneFn {
        &self.g
    }

    /// Weights in column-stacked order of the σ eigenbasis matrix units.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn forward(&self) -> &Superoperator {
        &self.forward
    }

    pub fn inverse(&self) -> &Superoperator {
        &self.inverse
    }

    pub fn sqrt(&self) -> &Superoperator {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &Superoperator {
        &self.inv_sqrt
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.forward.apply(x)
    }

    /// `⟨X, Ω(Y)⟩` in the Hilbert–Schmidt inner product.
    pub fn inner(&self, x: &CMatrix, y: &CMatrix) -> Result<C64> {
        Ok(hs_inner(x, &self.forward.apply(y)?))
    }

    /// `χ²_g(ρ‖σ) = ⟨ρ−σ, Ω(ρ−σ)⟩`.
    pub fn chi2(&self, rho: &DensityMatrix) -> Result<f64> {
        let x = rho.matrix() - self.sigma.matrix();
        let v = vectorize(&x);
        Ok((v.adjoint() * self.forward.matrix() * &v)[(0, 0)].re)
    }
}
