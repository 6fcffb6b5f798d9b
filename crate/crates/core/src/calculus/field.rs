//! Scalar and vector nodal fields on a [`Grid`].

use std::sync::Arc;

use super::grid::{Grid, Region};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn new(grid: &Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn(&[T]) -> T) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.node(i)[..dim])).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Samples `f` on Ω and sets every other node to zero.
    pub fn dirichlet_from_fn(grid: &Arc<Grid<T>>, f: impl Fn(&[T]) -> T) -> Self {
        let mut out = Self::zeros(grid);
        let dim = grid.dim();
        for &i in grid.dofs() {
            out.values[i] = f(&grid.node(i)[..dim]);
        }
        out
    }

    /// Field that takes the given values on the nodes of Ω and zero elsewhere.
    pub fn from_dofs(grid: &Arc<Grid<T>>, dofs: &[T]) -> Result<Self> {
        if dofs.len() != grid.dofs().len() {
            return Err(Error::Shape(format!(
                "{} values for {} degrees of freedom",
                dofs.len(),
                grid.dofs().len()
            )));
        }
        let mut out = Self::zeros(grid);
        for (&i, &v) in grid.dofs().iter().zip(dofs) {
            out.values[i] = v;
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Values on the nodes of Ω.
    pub fn dofs(&self) -> Vec<T> {
        self.grid.dofs().iter().map(|&i| self.values[i]).collect()
    }

    /// True when the field vanishes exactly outside Ω.
    pub fn is_dirichlet_admissible(&self) -> bool {
        self.values
            .iter()
            .zip(self.grid.regions())
            .all(|(v, r)| *r == Region::Domain || *v == T::zero())
    }

    /// Largest magnitude on the padding ring.
    pub fn max_on_padding(&self) -> T {
        self.values
            .iter()
            .zip(self.grid.regions())
            .filter(|(_, r)| **r == Region::Exterior)
            .fold(T::zero(), |m, (v, _)| m.max(v.abs()))
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| *v * c).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn linear_combination(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * *x + b * *y).collect(),
        })
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::Shape("fields live on different grids".into()))
        }
    }

    /// `hⁿ Σ u` over every node.
    pub fn integral(&self) -> T {
        self.grid.cell_volume() * self.values.iter().copied().sum::<T>()
    }

    /// `(hⁿ Σ_{Ω} |u|^p)^{1/p}`.
    pub fn lp_norm_domain(&self, p: T) -> T {
        let s: T = self.grid.dofs().iter().map(|&i| self.values[i].abs().powf(p)).sum();
        (self.grid.cell_volume() * s).powf(p.recip())
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Vector field stored component by component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: Arc<Grid<T>>,
    components: Vec<Vec<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: &Arc<Grid<T>>) -> Self {
        Self {
            grid: grid.clone(),
            components: vec![vec![T::zero(); grid.len()]; grid.dim()],
        }
    }

    pub fn new(grid: &Arc<Grid<T>>, components: Vec<Vec<T>>) -> Result<Self> {
        if components.len() != grid.dim() || components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Shape("vector field components do not match the grid".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            components,
        })
    }

    pub fn from_fn(grid: &Arc<Grid<T>>, f: impl Fn(&[T]) -> [T; 2]) -> Self {
        let dim = grid.dim();
        let mut components = vec![Vec::with_capacity(grid.len()); dim];
        for i in 0..grid.len() {
            let v = f(&grid.node(i)[..dim]);
            for (c, comp) in components.iter_mut().enumerate() {
                comp.push(v[c]);
            }
        }
        Self {
            grid: grid.clone(),
            components,
        }
    }

    /// The scalar field viewed as a vector field (one dimension only).
    pub fn from_scalar(u: &Field<T>) -> Result<Self> {
        if u.grid().dim() != 1 {
            return Err(Error::Shape("scalar-as-vector needs a one-dimensional grid".into()));
        }
        Ok(Self {
            grid: u.grid().clone(),
            components: vec![u.values().to_vec()],
        })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[T] {
        &self.components[c]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<T>> {
        self.components
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            grid: self.grid.clone(),
            components: self
                .components
                .iter()
                .map(|comp| comp.iter().map(|v| *v * c).collect())
                .collect(),
        }
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> Vec<T> {
        (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c[i] * c[i]).sum::<T>().sqrt())
            .collect()
    }

    /// Largest componentwise magnitude.
    pub fn sup_norm(&self) -> T {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `hⁿ Σ |v|^p` over every node.
    pub fn lp_norm_pow(&self, p: T) -> T {
        self.grid.cell_volume() * self.magnitude().iter().map(|m| m.powf(p)).sum::<T>()
    }

    /// `hⁿ Σ v·w`.
    pub fn dot(&self, other: &Self) -> T {
        let s: T = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x * *y).sum::<T>())
            .sum();
        self.grid.cell_volume() * s
    }

    pub fn max_on_padding(&self) -> T {
        let regions = self.grid.regions();
        self.components
            .iter()
            .flat_map(|c| c.iter().zip(regions))
            .filter(|(_, r)| **r == Region::Exterior)
            .fold(T::zero(), |m, (v, _)| m.max(v.abs()))
    }
}
