use super::maximal::Maximal;
use super::OperatorError;
use crate::dyadic::{block_diff, Cube, DyadicGrid, ProductFunction};

/// `M²f(x) = M(f(x₁, ·))(x₂)`.
pub fn m2(f: &ProductFunction, maximal: &Maximal) -> Result<ProductFunction, OperatorError> {
    let shape = f.shape();
    if maximal.family().shape() != shape.second {
        return Err(OperatorError::Shape("maximal operator does not live on the second factor".into()));
    }
    let slices: Vec<_> = f.slices().map(|s| maximal.apply(&s)).collect();
    Ok(ProductFunction::from_slices(shape.first, &slices)?)
}

/// `Δ²_{V,v₁} f(x) = Σ_{J^{(v₁)} = V} Δ_J(f(x₁, ·))(x₂)`.
pub fn delta2(f: &ProductFunction, grid2: &DyadicGrid, v: &Cube, v1: u32) -> Result<ProductFunction, OperatorError> {
    let shape = f.shape();
    if grid2.shape != shape.second {
        return Err(OperatorError::Shape("lattice does not live on the second factor".into()));
    }
    let slices = f
        .slices()
        .map(|s| block_diff(&s, grid2, v, v1))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProductFunction::from_slices(shape.first, &slices)?)
}
