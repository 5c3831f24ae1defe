//! The main Vekua equation ∂̄W = (∂̄f/f) W̄ for a non-vanishing scalar f and its
//! link to the conductivity equations div(f²∇(u/f)) = 0 and div(f⁻²∇(fv)) = 0.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bicomplex::Bicomplex;
use crate::calculus::{check_same_grid, d_bar, partials, GridFunction};
use crate::domain::{Domain, Grid, EAST, NORTH, SOUTH, WEST};
use crate::error::{Error, Result};
use crate::linsolve;
use crate::vekua::Coefficients;

/// Built-in conductivities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConductivityProfile {
    /// f = 1
    One,
    /// f = eˣ
    ExpX,
    /// f = 1 + (x² + y²)/2
    Quadratic,
}

impl ConductivityProfile {
    pub const ALL: [Self; 3] = [Self::One, Self::ExpX, Self::Quadratic];

    pub fn id(self) -> &'static str {
        match self {
            Self::One => "one",
            Self::ExpX => "exp_x",
            Self::Quadratic => "quadratic",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.id() == id)
    }

    pub fn formula(self) -> &'static str {
        match self {
            Self::One => "f = 1",
            Self::ExpX => "f = e^x",
            Self::Quadratic => "f = 1 + (x^2 + y^2)/2",
        }
    }

    pub fn value(self, z: Complex64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::ExpX => z.re.exp(),
            Self::Quadratic => 1.0 + 0.5 * z.norm_sqr(),
        }
    }

    /// (f_x, f_y).
    pub fn gradient(self, z: Complex64) -> (f64, f64) {
        match self {
            Self::One => (0.0, 0.0),
            Self::ExpX => (z.re.exp(), 0.0),
            Self::Quadratic => (z.re, z.im),
        }
    }
}

/// A proper conductivity: scalar, non-vanishing, with gradient samples.
#[derive(Clone, Debug)]
pub struct Conductivity {
    f: GridFunction,
    grad_x: GridFunction,
    grad_y: GridFunction,
    inv_bound: f64,
    profile: Option<ConductivityProfile>,
}

impl Conductivity {
    pub fn new(f: GridFunction, grad_x: GridFunction, grad_y: GridFunction) -> Result<Self> {
        check_same_grid(f.grid(), grad_x.grid())?;
        check_same_grid(f.grid(), grad_y.grid())?;
        if f.values().iter().any(|w| w.vec != Complex64::new(0.0, 0.0)) {
            return Err(Error::NotProper("f has a nonzero vector part".into()));
        }
        let mut inv_bound: f64 = 0.0;
        for w in f.values() {
            if !w.sc.is_finite() || w.is_zero_divisor() {
                return Err(Error::NotProper(format!("f = {} is not invertible", w.sc)));
            }
            inv_bound = inv_bound.max(1.0 / w.sc.norm());
        }
        Ok(Self {
            f,
            grad_x,
            grad_y,
            inv_bound,
            profile: None,
        })
    }

    /// Samples a catalogue profile together with its exact gradient.
    pub fn from_profile(grid: &Arc<Grid>, profile: ConductivityProfile) -> Self {
        let f = GridFunction::from_scalar_fn(grid, |z| Complex64::new(profile.value(z), 0.0));
        let gx = GridFunction::from_scalar_fn(grid, |z| Complex64::new(profile.gradient(z).0, 0.0));
        let gy = GridFunction::from_scalar_fn(grid, |z| Complex64::new(profile.gradient(z).1, 0.0));
        let mut c = Self::new(f, gx, gy).expect("catalogue profiles are positive");
        c.profile = Some(profile);
        c
    }

    /// Uses finite differences of the samples for the gradient.
    pub fn from_samples(f: GridFunction) -> Result<Self> {
        let (fx, fy) = partials(f.grid(), &f.sc());
        let gx = GridFunction::from_scalars(f.grid(), &fx)?;
        let gy = GridFunction::from_scalars(f.grid(), &fy)?;
        Self::new(f, gx, gy)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.f.grid()
    }

    pub fn f(&self) -> &GridFunction {
        &self.f
    }

    pub fn grad_x(&self) -> &GridFunction {
        &self.grad_x
    }

    pub fn grad_y(&self) -> &GridFunction {
        &self.grad_y
    }

    /// sup 1/|f|.
    pub fn inv_bound(&self) -> f64 {
        self.inv_bound
    }

    pub fn profile(&self) -> Option<ConductivityProfile> {
        self.profile
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.f.sc()
    }

    /// 1/f as a scalar field.
    pub fn reciprocal(&self) -> GridFunction {
        self.f.map(|w| Bicomplex::scalar(w.sc.inv()))
    }
}

/// a = 0, b = ∂̄f·f⁻¹ with the discrete ∂̄, so that W = f solves the discrete
/// equation exactly.
pub fn b_from_f(c: &Conductivity) -> Result<Coefficients> {
    let grid = c.grid();
    let db = d_bar(&c.f);
    let values = db
        .values()
        .iter()
        .zip(c.f.values())
        .map(|(&d, &f)| Ok(d * f.inverse().map_err(|e| Error::NotProper(e.to_string()))?))
        .collect::<Result<Vec<_>>>()?;
    Coefficients::new(GridFunction::zeros(grid), GridFunction::new(grid, values)?)
}

fn harmonic_mean(a: Complex64, b: Complex64) -> Complex64 {
    let s = a + b;
    if s.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        a * b * 2.0 / s
    }
}

/// Conservative five-point div(σ∇X) at node `k` (full stencil required).
fn divergence_form(grid: &Grid, sigma: &[Complex64], x: &[Complex64], k: usize) -> Complex64 {
    let h2 = grid.cell_area();
    [EAST, WEST, NORTH, SOUTH]
        .iter()
        .map(|&dir| {
            let m = grid.neighbor(k, dir).expect("stencil interior");
            harmonic_mean(sigma[k], sigma[m]) * (x[m] - x[k])
        })
        .sum::<Complex64>()
        / h2
}

fn five_point_laplacian(grid: &Grid, x: &[Complex64], k: usize) -> Complex64 {
    let s: Complex64 = [EAST, WEST, NORTH, SOUTH]
        .iter()
        .map(|&dir| x[grid.neighbor(k, dir).expect("stencil interior")])
        .sum();
    (s - x[k] * 4.0) / grid.cell_area()
}

fn normalised_max(grid: &Grid, w: &GridFunction, r: impl Fn(usize) -> Complex64) -> f64 {
    let scale = w.sup_norm().max(f64::MIN_POSITIVE) / grid.h();
    grid.safe_nodes().map(|k| r(k).norm()).fold(0.0, f64::max) / scale
}

/// Maximum safe-interior residuals of div(f²∇(u/f)) and div(f⁻²∇(fv)) for
/// u = Sc W, v = Vec W, divided by ‖W‖∞/h.
pub fn conductivity_residuals(c: &Conductivity, w: &GridFunction) -> Result<(f64, f64)> {
    check_same_grid(c.grid(), w.grid())?;
    let grid = c.grid();
    let f = c.values();
    let uu: Vec<Complex64> = w.values().iter().zip(&f).map(|(w, f)| w.sc / f).collect();
    let vv: Vec<Complex64> = w.values().iter().zip(&f).map(|(w, f)| w.vec * f).collect();
    let s1: Vec<Complex64> = f.iter().map(|f| f * f).collect();
    let s2: Vec<Complex64> = f.iter().map(|f| (f * f).inv()).collect();
    Ok((
        normalised_max(grid, w, |k| divergence_form(grid, &s1, &uu, k)),
        normalised_max(grid, w, |k| divergence_form(grid, &s2, &vv, k)),
    ))
}

/// Maximum safe-interior residuals of −Δu + q_f u and −Δv + q_{1/f} v with
/// q_f = Δf/f and q_{1/f} = fΔ(1/f) (five-point Laplacians), divided by ‖W‖∞/h.
pub fn schrodinger_residuals(c: &Conductivity, w: &GridFunction) -> Result<(f64, f64)> {
    check_same_grid(c.grid(), w.grid())?;
    let grid = c.grid();
    let f = c.values();
    let finv: Vec<Complex64> = f.iter().map(|f| f.inv()).collect();
    let u = w.sc();
    let v = w.vec_part();
    let r1 = |k: usize| {
        let q = five_point_laplacian(grid, &f, k) / f[k];
        -five_point_laplacian(grid, &u, k) + q * u[k]
    };
    let r2 = |k: usize| {
        let q = f[k] * five_point_laplacian(grid, &finv, k);
        -five_point_laplacian(grid, &v, k) + q * v[k]
    };
    Ok((normalised_max(grid, w, r1), normalised_max(grid, w, r2)))
}

fn require_star_shaped(grid: &Grid) -> Result<()> {
    if grid.domain().star_shaped_at_origin() {
        Ok(())
    } else {
        Err(Error::NotStarShaped)
    }
}

fn require_scalar(w: &GridFunction) -> Result<()> {
    if w.is_scalar(1e-12) {
        Ok(())
    } else {
        Err(Error::NotScalar)
    }
}

fn simpson_panels(r: f64) -> usize {
    let m = ((32.0 * r).ceil() as usize).max(32);
    m + m % 2
}

/// ∫₀¹ g²(tz)(y X_x(tz) − x X_y(tz)) dt with X = w/g at every node.
fn radial_operator(grid: &Grid, g: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
    let x: Vec<Complex64> = w.iter().zip(g).map(|(w, g)| w / g).collect();
    let (xx, xy) = partials(grid, &x);
    let p: Vec<Complex64> = g.iter().zip(&xx).map(|(g, d)| g * g * d).collect();
    let q: Vec<Complex64> = g.iter().zip(&xy).map(|(g, d)| g * g * d).collect();
    grid.nodes()
        .par_iter()
        .map(|&z| {
            let m = simpson_panels(z.norm());
            let dt = 1.0 / m as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..=m {
                let t = i as f64 * dt;
                let weight = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let pt = z * t;
                let integrand = grid.interpolate(&p, pt) * z.im - grid.interpolate(&q, pt) * z.re;
                acc += integrand * weight;
            }
            acc * (dt / 3.0)
        })
        .collect()
}

/// The operator I_f: I_f u(z) = ∫₀¹ f²(tz)(y U_x(tz) − x U_y(tz)) dt, U = u/f.
pub fn radial_conjugation(c: &Conductivity, u: &GridFunction) -> Result<GridFunction> {
    check_same_grid(c.grid(), u.grid())?;
    require_star_shaped(c.grid())?;
    require_scalar(u)?;
    let out = radial_operator(c.grid(), &c.values(), &u.sc());
    GridFunction::from_scalars(c.grid(), &out)
}

/// v = (1/f)·I_f u + const_c/f.
pub fn metaharmonic_conjugate(c: &Conductivity, u: &GridFunction, const_c: Complex64) -> Result<GridFunction> {
    let i = radial_conjugation(c, u)?;
    let f = c.values();
    let v: Vec<Complex64> = i.sc().iter().zip(&f).map(|(i, f)| (i + const_c) / f).collect();
    GridFunction::from_scalars(c.grid(), &v)
}

/// u = −f·I_{1/f} v + const_c·f, where I_{1/f} integrates (fv) against f⁻².
pub fn anti_conjugate(c: &Conductivity, v: &GridFunction, const_c: Complex64) -> Result<GridFunction> {
    check_same_grid(c.grid(), v.grid())?;
    require_star_shaped(c.grid())?;
    require_scalar(v)?;
    let f = c.values();
    let finv: Vec<Complex64> = f.iter().map(|f| f.inv()).collect();
    let i = radial_operator(c.grid(), &finv, &v.sc());
    let u: Vec<Complex64> = i.iter().zip(&f).map(|(i, f)| -f * i + const_c * f).collect();
    GridFunction::from_scalars(c.grid(), &u)
}

/// W = u + jv from two scalar fields.
pub fn conjugate_pair(u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
    u.zip_with(v, |u, v| Bicomplex::new(u.sc, v.sc))
}

/// Scalar samples on the boundary, keyed by the boundary parameter
/// (angle for disks, arc length for rectangles).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub params: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl BoundaryData {
    pub fn new(params: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if params.len() != values.len() || params.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} parameters for {} boundary values",
                params.len(),
                values.len()
            )));
        }
        if !params.iter().all(|p| p.is_finite()) || !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite boundary data".into()));
        }
        Ok(Self { params, values })
    }

    /// Samples `f` at `count` equally spaced boundary parameters.
    pub fn from_fn(domain: &Domain, count: usize, f: impl Fn(Complex64) -> Complex64) -> Self {
        let period = domain.param_period();
        let params: Vec<f64> = (0..count).map(|k| k as f64 * period / count as f64).collect();
        let values = params.iter().map(|&s| f(domain.boundary_at(s).0)).collect();
        Self { params, values }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// Periodic piecewise-linear interpolation in the boundary parameter.
    pub fn value_at(&self, s: f64, period: f64) -> Complex64 {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.params[a].rem_euclid(period).total_cmp(&self.params[b].rem_euclid(period)));
        self.interpolate_sorted(&order, s, period)
    }

    fn interpolate_sorted(&self, order: &[usize], s: f64, period: f64) -> Complex64 {
        let n = order.len();
        if n == 1 {
            return self.values[order[0]];
        }
        let key = |i: usize| self.params[order[i]].rem_euclid(period);
        let s = s.rem_euclid(period);
        // First sorted sample strictly after s.
        let hi = order.partition_point(|&i| self.params[i].rem_euclid(period) <= s);
        let (a, b, sa, sb) = if hi == 0 {
            (n - 1, 0, key(n - 1) - period, key(0))
        } else if hi == n {
            (n - 1, 0, key(n - 1), key(0) + period)
        } else {
            (hi - 1, hi, key(hi - 1), key(hi))
        };
        let t = if sb > sa { (s - sa) / (sb - sa) } else { 0.0 };
        self.values[order[a]] * (1.0 - t) + self.values[order[b]] * t
    }

    fn sampler(&self, period: f64) -> impl Fn(f64) -> Complex64 + '_ {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.params[a].rem_euclid(period).total_cmp(&self.params[b].rem_euclid(period)));
        move |s| self.interpolate_sorted(&order, s, period)
    }
}

const DIRECTIONS: [(usize, Complex64); 4] = [
    (EAST, Complex64::new(1.0, 0.0)),
    (WEST, Complex64::new(-1.0, 0.0)),
    (NORTH, Complex64::new(0.0, 1.0)),
    (SOUTH, Complex64::new(0.0, -1.0)),
];

/// Finite-volume system for div(σ∇U) = 0 with Dirichlet data: each missing
/// neighbour is replaced by the boundary crossing at distance θh along the
/// lattice direction. Returns (neighbour couplings, diagonal, right-hand side).
#[allow(clippy::type_complexity)]
fn dirichlet_system(
    grid: &Grid,
    sigma: &[Complex64],
    phi: &BoundaryData,
) -> (Vec<Vec<(usize, Complex64)>>, Vec<Complex64>, Vec<Complex64>) {
    let h = grid.h();
    let h2 = grid.cell_area();
    let domain = grid.domain();
    let sample = phi.sampler(domain.param_period());
    let mut off = vec![Vec::with_capacity(4); grid.len()];
    let mut diag = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut rhs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for k in 0..grid.len() {
        let z = grid.node(k);
        for &(dir, unit) in &DIRECTIONS {
            match grid.neighbor(k, dir) {
                Some(m) => {
                    let w = harmonic_mean(sigma[k], sigma[m]) / h2;
                    diag[k] += w;
                    off[k].push((m, w));
                }
                None => {
                    let dist = domain.ray_exit(z, unit).clamp(0.05 * h, h);
                    let value = sample(domain.param_of(z + unit * dist));
                    let w = sigma[k] / (h * dist);
                    diag[k] += w;
                    rhs[k] += w * value;
                }
            }
        }
    }
    (off, diag, rhs)
}

const CG_TOLERANCE: f64 = 1e-10;

/// Solves div(f²∇U) = 0 with U = φ on the boundary and returns u = f·U.
/// Real conductivities use conjugate gradients; complex ones a dense LU solve.
pub fn dirichlet_solve(c: &Conductivity, phi: &BoundaryData) -> Result<GridFunction> {
    let grid = c.grid();
    let f = c.values();
    let sigma: Vec<Complex64> = f.iter().map(|f| f * f).collect();
    let (off, diag, rhs) = dirichlet_system(grid, &sigma, phi);
    let real = f.iter().all(|f| f.im == 0.0);
    let u: Vec<Complex64> = if real {
        let d: Vec<f64> = diag.iter().map(|d| d.re).collect();
        let op = |x: &[f64], y: &mut [f64]| {
            y.par_iter_mut().enumerate().for_each(|(k, yk)| {
                *yk = d[k] * x[k] - off[k].iter().map(|(m, w)| w.re * x[*m]).sum::<f64>();
            });
        };
        let max_it = 20 * grid.len();
        let re: Vec<f64> = rhs.iter().map(|r| r.re).collect();
        let im: Vec<f64> = rhs.iter().map(|r| r.im).collect();
        let xr = linsolve::conjugate_gradient(op, &d, &re, CG_TOLERANCE, max_it)?.x;
        let xi = linsolve::conjugate_gradient(op, &d, &im, CG_TOLERANCE, max_it)?.x;
        xr.into_iter().zip(xi).map(|(a, b)| Complex64::new(a, b)).collect()
    } else {
        let n = grid.len();
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            a[(k, k)] = diag[k];
            for &(m, w) in &off[k] {
                a[(k, m)] -= w;
            }
        }
        let x = a
            .lu()
            .solve(&DVector::from_vec(rhs))
            .ok_or(Error::SolverDivergence {
                solver: "dense LU",
                iterations: 0,
                residual: f64::INFINITY,
            })?;
        x.iter().cloned().collect()
    };
    let out: Vec<Complex64> = u.iter().zip(&f).map(|(u, f)| u * f).collect();
    GridFunction::from_scalars(grid, &out)
}

/// Value at a boundary point from a least-squares plane through the nodes
/// within about 3h.
fn boundary_value(grid: &Grid, values: &[Complex64], p: Complex64) -> Complex64 {
    let h = grid.h();
    let q = (p - grid.corner()) / h;
    let (cx, cy) = (q.re.floor() as i64, q.im.floor() as i64);
    for radius in 3..=8 {
        let mut ata = Matrix3::<f64>::zeros();
        let mut atb = Vector3::<Complex64>::zeros();
        let mut count = 0;
        let r = radius as f64 * h;
        for iy in cy - radius..=cy + radius {
            for ix in cx - radius..=cx + radius {
                if let Some(k) = grid.node_at(ix, iy) {
                    let d = grid.node(k) - p;
                    if d.norm() <= r {
                        let row = Vector3::new(1.0, d.re / h, d.im / h);
                        ata += row * row.transpose();
                        atb += row.map(|v| Complex64::new(v, 0.0)) * values[k];
                        count += 1;
                    }
                }
            }
        }
        if count >= 3 {
            if let Some(inv) = ata.try_inverse() {
                let inv = inv.map(|v| Complex64::new(v, 0.0));
                return (inv * atb)[0];
            }
        }
    }
    values[grid.nearest_node(p)]
}

/// H_f φ: the boundary trace of (1/f)·I_f u where u solves the conductivity
/// Dirichlet problem with u/f = φ on the boundary (additive constant c = 0).
pub fn hilbert_transform(c: &Conductivity, phi: &BoundaryData) -> Result<BoundaryData> {
    require_star_shaped(c.grid())?;
    let u = dirichlet_solve(c, phi)?;
    let v = metaharmonic_conjugate(c, &u, Complex64::new(0.0, 0.0))?.sc();
    let grid = c.grid();
    let values = phi
        .params
        .iter()
        .map(|&s| boundary_value(grid, &v, grid.domain().boundary_at(s).0))
        .collect();
    BoundaryData::new(phi.params.clone(), values)
}
