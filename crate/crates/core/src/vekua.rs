//! The Vekua operators Q = aW + bW̄ and S = I − T Q, solution generation from
//! 𝔹-analytic seeds, the similarity exponential Φ_a and Hodge complement elements.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bicomplex::Bicomplex;
use crate::calculus::{analytic_power, check_same_grid, d, l2_norm, relative_vekua_residual, GridFunction};
use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::integral::theodorescu;
use crate::linsolve;

/// Coefficients (a, b) of ∂̄W = aW + bW̄ sampled on a grid.
#[derive(Clone, Debug)]
pub struct Coefficients {
    a: GridFunction,
    b: GridFunction,
    sup_a: f64,
    sup_b: f64,
}

impl Coefficients {
    pub fn new(a: GridFunction, b: GridFunction) -> Result<Self> {
        check_same_grid(a.grid(), b.grid())?;
        if !a.values().iter().chain(b.values()).all(|w| w.is_finite()) {
            return Err(Error::WrongCoefficients("non-finite coefficient values".into()));
        }
        let (sup_a, sup_b) = (a.sup_norm(), b.sup_norm());
        Ok(Self { a, b, sup_a, sup_b })
    }

    pub fn zero(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, Bicomplex::ZERO, Bicomplex::ZERO)
    }

    pub fn constant(grid: &Arc<Grid>, a: Bicomplex, b: Bicomplex) -> Self {
        Self::new(GridFunction::constant(grid, a), GridFunction::constant(grid, b))
            .expect("constant coefficients share a grid")
    }

    pub fn a(&self) -> &GridFunction {
        &self.a
    }

    pub fn b(&self) -> &GridFunction {
        &self.b
    }

    pub fn sup_a(&self) -> f64 {
        self.sup_a
    }

    pub fn sup_b(&self) -> f64 {
        self.sup_b
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.a.grid()
    }

    pub fn is_b_zero(&self) -> bool {
        self.sup_b == 0.0
    }

    /// q = 2√2·diam(Ω)·max(‖a‖∞, ‖b‖∞); the Neumann series for S converges when q < 1.
    pub fn contraction_factor(&self) -> f64 {
        2.0 * 2f64.sqrt() * self.grid().domain().diameter() * self.sup_a.max(self.sup_b)
    }
}

/// Q W = aW + bW̄.
pub fn q_apply(c: &Coefficients, w: &GridFunction) -> Result<GridFunction> {
    check_same_grid(c.grid(), w.grid())?;
    let values = w
        .values()
        .iter()
        .zip(c.a.values().iter().zip(c.b.values()))
        .map(|(&w, (&a, &b))| a * w + b * w.conj_bar())
        .collect();
    GridFunction::new(w.grid(), values)
}

/// S W = W − T[Q W].
pub fn s_apply(c: &Coefficients, w: &GridFunction) -> Result<GridFunction> {
    let tq = theodorescu(&q_apply(c, w)?);
    w.sub(&tq)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Neumann,
    Gmres,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub method: SolveMethod,
    pub iterations: usize,
    /// ‖S W − G‖₂ / ‖G‖₂ recomputed from the returned W.
    pub residual: f64,
    /// Exact for direct solves; for GMRES the smallest singular value of the
    /// final Hessenberg matrix.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub smallest_singular_value: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Contraction factor below which the Neumann series is tried first.
    pub neumann_threshold: f64,
    /// Largest number of complex unknowns (2 per node) for the dense solver.
    pub direct_limit: usize,
    pub restart: usize,
    pub method: Option<SolveMethod>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1000,
            neumann_threshold: 0.9,
            direct_limit: 800,
            restart: 60,
            method: None,
        }
    }
}

const SINGULAR_RTOL: f64 = 1e-10;

fn flatten(w: &GridFunction) -> Vec<Complex64> {
    w.values().iter().flat_map(|v| [v.sc, v.vec]).collect()
}

fn unflatten(grid: &Arc<Grid>, x: &[Complex64]) -> GridFunction {
    let values = x.chunks_exact(2).map(|p| Bicomplex::new(p[0], p[1])).collect();
    GridFunction::new(grid, values).expect("length matches grid")
}

fn relative_misfit(c: &Coefficients, w: &GridFunction, g: &GridFunction) -> Result<f64> {
    let r = s_apply(c, w)?.sub(g)?;
    let gn = l2_norm(g);
    Ok(if gn == 0.0 { l2_norm(&r) } else { l2_norm(&r) / gn })
}

/// Solves S W = G with the default options.
pub fn solve_s(c: &Coefficients, g: &GridFunction) -> Result<(GridFunction, SolverReport)> {
    solve_s_with(c, g, &SolveOptions::default())
}

/// Solves S W = G. Without a forced method the Neumann series is used when the
/// contraction factor is below the threshold; otherwise small systems are
/// solved densely and large ones by restarted GMRES.
pub fn solve_s_with(c: &Coefficients, g: &GridFunction, opts: &SolveOptions) -> Result<(GridFunction, SolverReport)> {
    check_same_grid(c.grid(), g.grid())?;
    let unknowns = 2 * g.len();
    let method = opts.method.unwrap_or_else(|| {
        if c.contraction_factor() < opts.neumann_threshold {
            SolveMethod::Neumann
        } else if unknowns <= opts.direct_limit {
            SolveMethod::Direct
        } else {
            SolveMethod::Gmres
        }
    });
    match method {
        SolveMethod::Neumann => match neumann(c, g, opts) {
            Err(Error::SolverDivergence { .. }) if opts.method.is_none() => gmres(c, g, opts),
            other => other,
        },
        SolveMethod::Gmres => gmres(c, g, opts),
        SolveMethod::Direct => direct(c, g),
    }
}

fn neumann(c: &Coefficients, g: &GridFunction, opts: &SolveOptions) -> Result<(GridFunction, SolverReport)> {
    let gn = l2_norm(g);
    let mut w = g.clone();
    if gn == 0.0 || (c.sup_a == 0.0 && c.sup_b == 0.0) {
        let residual = relative_misfit(c, &w, g)?;
        return Ok((w, SolverReport { method: SolveMethod::Neumann, iterations: 0, residual, smallest_singular_value: None }));
    }
    for it in 1..=opts.max_iterations {
        let next = g.add(&theodorescu(&q_apply(c, &w)?))?;
        // ‖W_{k+1} − W_k‖ equals the residual ‖S W_k − G‖.
        let step = l2_norm(&next.sub(&w)?) / gn;
        w = next;
        if !step.is_finite() {
            break;
        }
        if step <= opts.tolerance {
            let residual = relative_misfit(c, &w, g)?;
            return Ok((w, SolverReport { method: SolveMethod::Neumann, iterations: it, residual, smallest_singular_value: None }));
        }
    }
    Err(Error::SolverDivergence {
        solver: "Neumann series",
        iterations: opts.max_iterations,
        residual: relative_misfit(c, &w, g)?,
    })
}

fn gmres(c: &Coefficients, g: &GridFunction, opts: &SolveOptions) -> Result<(GridFunction, SolverReport)> {
    let grid = g.grid();
    let op = |x: &[Complex64]| -> Vec<Complex64> {
        let w = unflatten(grid, x);
        flatten(&s_apply(c, &w).expect("same grid"))
    };
    let b = flatten(g);
    let out = linsolve::gmres(op, &b, b.clone(), opts.tolerance, opts.restart, opts.max_iterations)?;
    let w = unflatten(grid, &out.x);
    let residual = relative_misfit(c, &w, g)?;
    Ok((
        w,
        SolverReport {
            method: SolveMethod::Gmres,
            iterations: out.iterations,
            residual,
            smallest_singular_value: out.sigma.map(|s| s.0),
        },
    ))
}

/// Assembles the 2N×2N matrix of S over (Sc, Vec) pairs column by column.
fn assemble(c: &Coefficients) -> DMatrix<Complex64> {
    let grid = c.grid();
    let m = 2 * grid.len();
    let mut a = DMatrix::zeros(m, m);
    let mut e = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..m {
        e[j] = Complex64::new(1.0, 0.0);
        let col = flatten(&s_apply(c, &unflatten(grid, &e)).expect("same grid"));
        a.set_column(j, &nalgebra::DVector::from_vec(col));
        e[j] = Complex64::new(0.0, 0.0);
    }
    a
}

fn direct(c: &Coefficients, g: &GridFunction) -> Result<(GridFunction, SolverReport)> {
    let out = linsolve::dense_solve(assemble(c), &flatten(g), SINGULAR_RTOL)?;
    let w = unflatten(g.grid(), &out.x);
    let residual = relative_misfit(c, &w, g)?;
    Ok((
        w,
        SolverReport {
            method: SolveMethod::Direct,
            iterations: 1,
            residual,
            smallest_singular_value: Some(out.smallest),
        },
    ))
}

/// Discrete Vekua solutions obtained from 𝔹-analytic seeds through S⁻¹.
#[derive(Clone, Debug)]
pub struct VekuaSolutionSet {
    pub coefficients: Coefficients,
    pub seeds: Vec<GridFunction>,
    pub solutions: Vec<GridFunction>,
    pub reports: Vec<SolverReport>,
    /// max safe-interior |∂̄W − aW − bW̄| / ‖W‖∞ per solution.
    pub residuals: Vec<f64>,
}

impl VekuaSolutionSet {
    /// Wraps externally produced solutions; the seeds become S W.
    pub fn from_solutions(coefficients: Coefficients, solutions: Vec<GridFunction>) -> Result<Self> {
        let mut seeds = Vec::with_capacity(solutions.len());
        let mut reports = Vec::with_capacity(solutions.len());
        let mut residuals = Vec::with_capacity(solutions.len());
        for w in &solutions {
            seeds.push(s_apply(&coefficients, w)?);
            reports.push(SolverReport { method: SolveMethod::Direct, iterations: 0, residual: 0.0, smallest_singular_value: None });
            residuals.push(relative_vekua_residual(w, coefficients.a(), coefficients.b())?);
        }
        Ok(Self { coefficients, seeds, solutions, reports, residuals })
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Solves S W = G for the seeds ẑⁿ and j·ẑⁿ, n = 0..N−1 (2N solutions).
pub fn make_solution_set(c: &Coefficients, n: usize) -> Result<VekuaSolutionSet> {
    make_solution_set_with(c, n, &SolveOptions::default())
}

pub fn make_solution_set_with(c: &Coefficients, n: usize, opts: &SolveOptions) -> Result<VekuaSolutionSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("solution set order must be at least 1".into()));
    }
    let grid = c.grid();
    let mut seeds = Vec::with_capacity(2 * n);
    for k in 0..n {
        let p = analytic_power(grid, Complex64::new(0.0, 0.0), k as i32)?;
        let jp = p.mul_const(Bicomplex::J);
        seeds.push(p);
        seeds.push(jp);
    }
    let mut solutions = Vec::with_capacity(seeds.len());
    let mut reports = Vec::with_capacity(seeds.len());
    let mut residuals = Vec::with_capacity(seeds.len());
    for seed in &seeds {
        let (w, report) = solve_s_with(c, seed, opts)?;
        residuals.push(relative_vekua_residual(&w, c.a(), c.b())?);
        solutions.push(w);
        reports.push(report);
    }
    Ok(VekuaSolutionSet {
        coefficients: c.clone(),
        seeds,
        solutions,
        reports,
        residuals,
    })
}

/// Φ_a = exp(T a), a particular solution of ∂̄Φ = aΦ.
pub fn phi_a(a: &GridFunction) -> GridFunction {
    theodorescu(a).exp()
}

/// V = ∂φ + a†φ + b*φ̄ for φ vanishing within 3h of the boundary.
pub fn hodge_complement_element(c: &Coefficients, phi: &GridFunction) -> Result<GridFunction> {
    check_same_grid(c.grid(), phi.grid())?;
    let grid = phi.grid();
    let margin = 3.0 * grid.h();
    let violates = (0..grid.len())
        .any(|k| grid.distance_to_boundary(k) < margin && phi.values()[k] != Bicomplex::ZERO);
    if violates {
        return Err(Error::SupportViolation { margin });
    }
    let dphi = d(phi);
    let values = (0..grid.len())
        .map(|k| {
            let p = phi.values()[k];
            dphi.values()[k] + c.a.values()[k].conj_dagger() * p + c.b.values()[k].conj_star() * p.conj_bar()
        })
        .collect();
    GridFunction::new(grid, values)
}

/// Smooth bump `amplitude·exp(1 − 1/(1 − r²/R²))` supported in the disk of radius R.
pub fn bump(grid: &Arc<Grid>, center: Complex64, radius: f64, amplitude: Bicomplex) -> GridFunction {
    GridFunction::from_fn(grid, |z| {
        let s = (z - center).norm_sqr() / (radius * radius);
        if s < 1.0 {
            amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
        } else {
            Bicomplex::ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{d_bar, inner_l2, vekua_residual};
    use crate::domain::Domain;

    fn disk(n: usize, r: f64) -> Arc<Grid> {
        Arc::new(Grid::build(Domain::disk(0.0, 0.0, r), n).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn smooth(g: &Arc<Grid>) -> GridFunction {
        GridFunction::from_fn(g, |z| Bicomplex::new(z.re.cos() * z * 0.5, c(z.im.sin(), 0.3 * z.re)))
    }

    #[test]
    fn q_examples() {
        let g = disk(16, 1.0);
        let w = smooth(&g);
        assert_eq!(q_apply(&Coefficients::zero(&g), &w).unwrap().sup_norm(), 0.0);
        let id = q_apply(&Coefficients::constant(&g, Bicomplex::ONE, Bicomplex::ZERO), &w).unwrap();
        assert!(id.sub(&w).unwrap().sup_norm() < 1e-15);
        let j = GridFunction::constant(&g, Bicomplex::J);
        let out = q_apply(&Coefficients::constant(&g, Bicomplex::ZERO, Bicomplex::ONE), &j).unwrap();
        assert!(out.values().iter().all(|&v| v == -Bicomplex::J));
    }

    #[test]
    fn q_norm_bound() {
        let g = disk(16, 1.0);
        let co = Coefficients::constant(&g, Bicomplex::new(c(0.3, 0.1), c(-0.2, 0.4)), Bicomplex::new(c(0.1, 0.0), c(0.5, -0.3)));
        let w = smooth(&g);
        // |aW|_𝔹 ≤ √2|a|_𝔹|W|_𝔹 applied to both terms.
        let bound = 2.0 * 2f64.sqrt() * co.sup_a().max(co.sup_b()) * l2_norm(&w);
        assert!(l2_norm(&q_apply(&co, &w).unwrap()) <= bound);
    }

    #[test]
    fn s_identity_and_relation() {
        let g = disk(32, 1.0);
        let w = smooth(&g);
        let zero = Coefficients::zero(&g);
        assert!(s_apply(&zero, &w).unwrap().sub(&w).unwrap().sup_norm() == 0.0);
        let co = Coefficients::constant(&g, Bicomplex::new(c(0.3, 0.1), c(-0.2, 0.4)), Bicomplex::new(c(0.1, 0.0), c(0.5, -0.3)));
        let lhs = d_bar(&s_apply(&co, &w).unwrap());
        let rhs = d_bar(&w).sub(&q_apply(&co, &w).unwrap()).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for k in g.safe_nodes() {
            num += (lhs.values()[k] - rhs.values()[k]).norm_sqr();
            den += rhs.values()[k].norm_sqr();
        }
        assert!((num / den).sqrt() <= 5e-2, "{}", (num / den).sqrt());
    }

    #[test]
    fn zero_coefficients_reproduce_seeds() {
        let g = disk(16, 1.0);
        let set = make_solution_set(&Coefficients::zero(&g), 3).unwrap();
        assert_eq!(set.len(), 6);
        for (w, s) in set.solutions.iter().zip(&set.seeds) {
            assert_eq!(w.values(), s.values());
        }
        let one = make_solution_set(&Coefficients::zero(&g), 1).unwrap();
        assert!(one.solutions[0].values().iter().all(|&v| v == Bicomplex::ONE));
        assert!(one.solutions[1].values().iter().all(|&v| v == Bicomplex::J));
        assert!(make_solution_set(&Coefficients::zero(&g), 0).is_err());
    }

    #[test]
    fn neumann_iteration_count_and_agreement() {
        let g = disk(14, 1.0);
        let co = Coefficients::constant(&g, Bicomplex::real(0.05), Bicomplex::new(c(0.0, 0.05), c(0.02, 0.0)));
        let q = co.contraction_factor();
        assert!(q < 0.9);
        let rhs = smooth(&g);
        let (wn, rn) = solve_s(&co, &rhs).unwrap();
        assert_eq!(rn.method, SolveMethod::Neumann);
        assert!(rn.residual <= 1e-8);
        let bound = (1e-10f64.ln() / q.ln()).ceil() as usize + 1;
        assert!(rn.iterations <= bound, "{} > {bound}", rn.iterations);
        let force = |m| SolveOptions { method: Some(m), ..Default::default() };
        let (wd, rd) = solve_s_with(&co, &rhs, &force(SolveMethod::Direct)).unwrap();
        let (wg, rg) = solve_s_with(&co, &rhs, &force(SolveMethod::Gmres)).unwrap();
        assert!(rd.smallest_singular_value.unwrap() > 0.0);
        assert!(rg.residual <= 1e-8);
        let scale = l2_norm(&wn);
        assert!(l2_norm(&wn.sub(&wd).unwrap()) <= 1e-6 * scale);
        assert!(l2_norm(&wn.sub(&wg).unwrap()) <= 1e-6 * scale);
    }

    #[test]
    fn singular_direct_system_is_reported() {
        let g = disk(8, 1.0);
        // Zeroing one column of the assembled operator makes it rank deficient.
        let co = Coefficients::zero(&g);
        let a = assemble(&co);
        let mut sing = a.clone();
        sing.set_column(0, &nalgebra::DVector::zeros(a.nrows()));
        let rhs = vec![Complex64::new(1.0, 0.0); a.nrows()];
        assert!(matches!(linsolve::dense_solve(sing, &rhs, SINGULAR_RTOL), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn solution_of_main_vekua_seed_has_small_residual() {
        let g = disk(32, 0.8);
        let f = GridFunction::from_scalar_fn(&g, |z| c(z.re.exp(), 0.0));
        let b = d_bar(&f).zip_with(&f, |db, f| db * f.inverse().unwrap()).unwrap();
        let co = Coefficients::new(GridFunction::zeros(&g), b).unwrap();
        let (w, rep) = solve_s(&co, &GridFunction::constant(&g, Bicomplex::ONE)).unwrap();
        assert!(rep.residual <= 1e-8);
        let r = relative_vekua_residual(&w, co.a(), co.b()).unwrap();
        assert!(r <= 5e-2, "{r}");
    }

    #[test]
    fn phi_a_examples() {
        let g = disk(64, 1.0);
        let zero = GridFunction::zeros(&g);
        assert!(phi_a(&zero).values().iter().all(|&v| v == Bicomplex::ONE));
        let one = GridFunction::constant(&g, Bicomplex::ONE);
        let phi = phi_a(&one);
        let r = vekua_residual(&phi, &one, &zero).unwrap();
        let worst = g.safe_nodes().map(|k| r.values()[k].norm()).fold(0.0, f64::max);
        assert!(worst <= 5e-2 * phi.sup_norm(), "{worst}");
        for k in g.safe_nodes() {
            let z = g.node(k);
            let exact = Bicomplex::from_parts(z.re, 0.0, -z.im, 0.0).exp();
            assert!((phi.values()[k] - exact).norm() <= 5e-2 * exact.norm());
        }
    }

    #[test]
    fn similarity_with_phi_minus_a() {
        let g = disk(32, 1.0);
        let a_const = Bicomplex::new(c(0.4, 0.1), c(0.2, -0.3));
        let co = Coefficients::constant(&g, a_const, Bicomplex::ZERO);
        let set = make_solution_set(&co, 3).unwrap();
        let minus_a = GridFunction::constant(&g, -a_const);
        let psi_factor = phi_a(&minus_a);
        let seed_level = set
            .seeds
            .iter()
            .map(|s| relative_vekua_residual(s, &GridFunction::zeros(&g), &GridFunction::zeros(&g)).unwrap())
            .fold(0.0, f64::max);
        for w in &set.solutions {
            let psi = w.mul(&psi_factor).unwrap();
            let zero = GridFunction::zeros(&g);
            let r = relative_vekua_residual(&psi, &zero, &zero).unwrap();
            assert!(r <= 5e-2 && r <= 50.0 * seed_level.max(g.h() * g.h()), "{r} vs {seed_level}");
        }
    }

    #[test]
    fn hodge_elements_are_orthogonal_to_analytic_monomials() {
        let g = disk(64, 1.0);
        let co = Coefficients::zero(&g);
        let phi = bump(&g, c(0.1, -0.2), 0.5, Bicomplex::new(c(1.0, 0.5), c(-0.3, 0.8)));
        let v = hodge_complement_element(&co, &phi).unwrap();
        let vd = d(&phi);
        assert!(v.sub(&vd).unwrap().sup_norm() == 0.0);
        for n in 0..5 {
            let gm = analytic_power(&g, c(0.0, 0.0), n).unwrap();
            for seed in [gm.clone(), gm.mul_const(Bicomplex::J)] {
                let ip = inner_l2(&seed, &v).unwrap().norm();
                assert!(ip <= 5e-2 * l2_norm(&seed) * l2_norm(&v), "n={n}: {ip}");
            }
        }
        assert_eq!(hodge_complement_element(&co, &GridFunction::zeros(&g)).unwrap().sup_norm(), 0.0);
        let wide = bump(&g, c(0.0, 0.0), 0.99, Bicomplex::ONE);
        assert!(matches!(hodge_complement_element(&co, &wide), Err(Error::SupportViolation { .. })));
    }

    #[test]
    fn discrete_adjoint_consistency() {
        let g = disk(48, 1.0);
        let co = Coefficients::new(
            GridFunction::from_fn(&g, |z| Bicomplex::new(c(0.3, z.re), c(0.1, -0.2))),
            GridFunction::from_fn(&g, |z| Bicomplex::new(c(0.2, 0.0), z * 0.3)),
        )
        .unwrap();
        let w = smooth(&g);
        let phi = bump(&g, c(-0.1, 0.1), 0.6, Bicomplex::new(c(0.7, 0.2), c(0.1, -0.5)));
        let lhs = inner_l2(&d_bar(&w).sub(&q_apply(&co, &w).unwrap()).unwrap(), &phi).unwrap();
        let v = hodge_complement_element(&co, &phi).unwrap();
        let rhs = -inner_l2(&w, &v).unwrap();
        assert!((lhs - rhs).norm() <= 5e-2 * lhs.norm().max(1e-12), "{lhs} vs {rhs}");
    }
}
