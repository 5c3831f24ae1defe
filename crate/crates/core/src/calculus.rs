//! Sampled bicomplex fields and the discrete Cauchy–Riemann operators.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bicomplex::{hat_power, Bicomplex};
use crate::domain::{Grid, EAST, NORTH, SOUTH, WEST};
use crate::error::{Error, Result};

/// A bicomplex value per grid node.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<Bicomplex>,
}

impl GridFunction {
    pub fn new(grid: &Arc<Grid>, values: Vec<Bicomplex>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(Complex64) -> Bicomplex + Sync) -> Self {
        let values = grid.nodes().par_iter().map(|&z| f(z)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    /// Scalar field u + j·0 from a complex function.
    pub fn from_scalar_fn(grid: &Arc<Grid>, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        Self::from_fn(grid, |z| Bicomplex::scalar(f(z)))
    }

    pub fn from_scalars(grid: &Arc<Grid>, values: &[Complex64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&c| Bicomplex::scalar(c)).collect())
    }

    pub fn constant(grid: &Arc<Grid>, w: Bicomplex) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![w; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, Bicomplex::ZERO)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Bicomplex] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Bicomplex] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Bicomplex> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(Bicomplex) -> Bicomplex + Sync) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.par_iter().map(|&w| f(w)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Bicomplex, Bicomplex) -> Bicomplex + Sync,
    ) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .par_iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise bicomplex product.
    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|w| w.scale(c))
    }

    /// Left multiplication by a constant bicomplex number.
    pub fn mul_const(&self, v: Bicomplex) -> Self {
        self.map(|w| v * w)
    }

    pub fn conj_bar(&self) -> Self {
        self.map(Bicomplex::conj_bar)
    }

    pub fn conj_dagger(&self) -> Self {
        self.map(Bicomplex::conj_dagger)
    }

    pub fn conj_star(&self) -> Self {
        self.map(Bicomplex::conj_star)
    }

    pub fn exp(&self) -> Self {
        self.map(Bicomplex::exp)
    }

    pub fn sc(&self) -> Vec<Complex64> {
        self.values.iter().map(|w| w.sc).collect()
    }

    pub fn vec_part(&self) -> Vec<Complex64> {
        self.values.iter().map(|w| w.vec).collect()
    }

    /// max |W|_𝔹 over all nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// max |W|_𝔹 over the safe interior nodes.
    pub fn safe_sup_norm(&self) -> f64 {
        self.grid
            .safe_nodes()
            .map(|k| self.values[k].norm())
            .fold(0.0, f64::max)
    }

    /// True when every vector part is below `tol·max(1, ‖W‖∞)`.
    pub fn is_scalar(&self, tol: f64) -> bool {
        let bound = tol * self.sup_norm().max(1.0);
        self.values.iter().all(|w| w.vec.norm() <= bound)
    }
}

pub fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Midpoint quadrature Σ F(node)·h².
pub fn integrate(f: &GridFunction) -> Bicomplex {
    let s: Bicomplex = f.values.iter().sum();
    s * f.grid.cell_area()
}

/// ∂ₓ and ∂ᵧ of node values of any linear type: central differences where
/// both neighbours exist, one-sided first order otherwise, zero on isolated lines.
pub(crate) fn partials<T>(grid: &Grid, values: &[T]) -> (Vec<T>, Vec<T>)
where
    T: Copy + Send + Sync + Default + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let h = grid.h();
    let diff = |k: usize, plus: usize, minus: usize| -> T {
        match (grid.neighbor(k, plus), grid.neighbor(k, minus)) {
            (Some(p), Some(m)) => (values[p] - values[m]) * (0.5 / h),
            (Some(p), None) => (values[p] - values[k]) * (1.0 / h),
            (None, Some(m)) => (values[k] - values[m]) * (1.0 / h),
            (None, None) => T::default(),
        }
    };
    (0..grid.len())
        .into_par_iter()
        .map(|k| (diff(k, EAST, WEST), diff(k, NORTH, SOUTH)))
        .unzip()
}

/// ∂̄F = ½(∂ₓ + j∂ᵧ)F.
pub fn d_bar(f: &GridFunction) -> GridFunction {
    cauchy_riemann(f, 1.0)
}

/// ∂F = ½(∂ₓ − j∂ᵧ)F.
pub fn d(f: &GridFunction) -> GridFunction {
    cauchy_riemann(f, -1.0)
}

fn cauchy_riemann(f: &GridFunction, sign: f64) -> GridFunction {
    let (fx, fy) = partials(&f.grid, &f.values);
    let values = fx
        .par_iter()
        .zip(&fy)
        .map(|(&dx, &dy)| (dx + dy.mul_j() * sign) * 0.5)
        .collect();
    GridFunction {
        grid: Arc::clone(&f.grid),
        values,
    }
}

/// L_p(Ω;𝔹) norm by midpoint quadrature; `p = f64::INFINITY` gives the sup norm.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("L_p exponent {p} is below 1")));
    }
    if p.is_infinite() {
        return Ok(f.sup_norm());
    }
    let s: f64 = f.values.iter().map(|w| w.norm().powf(p)).sum();
    Ok((s * f.grid.cell_area()).powf(1.0 / p))
}

/// ⟨F, G⟩ = ∬ ⟨F(z), G(z)⟩_𝔹 dA.
pub fn inner_l2(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    check_same_grid(&f.grid, &g.grid)?;
    let s: Complex64 = f.values.iter().zip(&g.values).map(|(a, b)| a.inner(*b)).sum();
    Ok(s * f.grid.cell_area())
}

pub fn l2_norm(f: &GridFunction) -> f64 {
    let s: f64 = f.values.iter().map(|w| w.norm_sqr()).sum();
    (s * f.grid.cell_area()).sqrt()
}

/// (ẑ − ẑ₀)ⁿ sampled at the nodes.
pub fn analytic_power(grid: &Arc<Grid>, z0: Complex64, n: i32) -> Result<GridFunction> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!("negative power {n}")));
    }
    Ok(GridFunction::from_fn(grid, |z| {
        hat_power(z, z0, n).expect("non-negative powers are total")
    }))
}

/// ∂̄W − aW − bW̄ at stencil-interior nodes, zero elsewhere.
pub fn vekua_residual(w: &GridFunction, a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    check_same_grid(&w.grid, &a.grid)?;
    check_same_grid(&w.grid, &b.grid)?;
    let dw = d_bar(w);
    let grid = &w.grid;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.is_stencil_interior(k) {
                dw.values[k] - a.values[k] * w.values[k] - b.values[k] * w.values[k].conj_bar()
            } else {
                Bicomplex::ZERO
            }
        })
        .collect();
    Ok(GridFunction {
        grid: Arc::clone(grid),
        values,
    })
}

/// max over safe interior nodes of |∂̄W − aW − bW̄|, divided by ‖W‖∞.
pub fn relative_vekua_residual(w: &GridFunction, a: &GridFunction, b: &GridFunction) -> Result<f64> {
    let r = vekua_residual(w, a, b)?;
    Ok(r.safe_sup_norm() / w.sup_norm().max(f64::MIN_POSITIVE))
}
