//! Orthonormal bases of discrete Vekua–Bergman spaces, the truncated
//! reproducing kernel 𝒦(A; z, ζ) = Σ ⟨A, Φₙ(ζ)⟩ Φₙ(z) and the projection onto the span.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bicomplex::Bicomplex;
use crate::calculus::{check_same_grid, inner_l2, l2_norm, relative_vekua_residual, GridFunction};
use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::vekua::VekuaSolutionSet;

/// Candidates whose norm falls below this fraction of the original after
/// orthogonalisation are treated as linearly dependent.
pub const DROP_RTOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct OrthoBasis {
    pub members: Vec<GridFunction>,
    pub source: VekuaSolutionSet,
    /// Indices into `source.solutions` that survived orthogonalisation.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// max |⟨Φₘ, Φₙ⟩ − δₘₙ|.
    pub gram_residual: f64,
    /// Relative Vekua residual of each member.
    pub member_residuals: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub z: Complex64,
    pub zeta: Complex64,
    #[serde(rename = "K")]
    pub k: Bicomplex,
    #[serde(rename = "L")]
    pub l: Bicomplex,
}

/// Modified Gram–Schmidt with one reorthogonalisation pass.
pub fn gram_schmidt(set: &VekuaSolutionSet) -> Result<OrthoBasis> {
    let mut members: Vec<GridFunction> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (idx, cand) in set.solutions.iter().enumerate() {
        let original = l2_norm(cand);
        let mut v = cand.clone();
        for _pass in 0..2 {
            for q in &members {
                let coef = inner_l2(&v, q)?;
                for (vi, qi) in v.values_mut().iter_mut().zip(q.values()) {
                    *vi -= qi.scale(coef);
                }
            }
        }
        let remaining = l2_norm(&v);
        if original == 0.0 || remaining < DROP_RTOL * original {
            dropped.push(idx);
            continue;
        }
        members.push(v.scale(Complex64::new(1.0 / remaining, 0.0)));
        kept.push(idx);
    }
    if members.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let gram_residual = gram_defect(&members)?;
    let c = &set.coefficients;
    let member_residuals = members
        .iter()
        .map(|m| relative_vekua_residual(m, c.a(), c.b()))
        .collect::<Result<_>>()?;
    Ok(OrthoBasis {
        members,
        source: set.clone(),
        kept,
        dropped,
        gram_residual,
        member_residuals,
    })
}

fn gram_defect(members: &[GridFunction]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (m, a) in members.iter().enumerate() {
        for (n, b) in members.iter().enumerate() {
            let target = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((inner_l2(a, b)? - target).norm());
        }
    }
    Ok(worst)
}

impl OrthoBasis {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn grid(&self) -> &std::sync::Arc<Grid> {
        self.members[0].grid()
    }

    /// 𝒦(A; zᵢ, ζⱼ) for node indices.
    pub fn kernel_at(&self, a: Bicomplex, zi: usize, zj: usize) -> Bicomplex {
        self.members
            .iter()
            .map(|phi| phi.values()[zi].scale(a.inner(phi.values()[zj])))
            .sum()
    }

    /// K = 𝒦(1; ·) and L = 𝒦(j; ·) at a node pair.
    pub fn kernel_pair(&self, zi: usize, zj: usize) -> (Bicomplex, Bicomplex) {
        (self.kernel_at(Bicomplex::ONE, zi, zj), self.kernel_at(Bicomplex::J, zi, zj))
    }

    pub fn sample(&self, zi: usize, zj: usize) -> KernelSample {
        let grid = self.grid();
        let (k, l) = self.kernel_pair(zi, zj);
        KernelSample {
            z: grid.node(zi),
            zeta: grid.node(zj),
            k,
            l,
        }
    }
}

/// 𝒦(A; z, ζ) at the nodes whose cells contain `z` and `ζ`.
pub fn kernel_eval(basis: &OrthoBasis, a: Bicomplex, z: Complex64, zeta: Complex64) -> Result<Bicomplex> {
    let grid = basis.grid();
    Ok(basis.kernel_at(a, grid.locate(z)?, grid.locate(zeta)?))
}

/// Kernel samples over the cartesian product `zs × zetas` (z outer).
pub fn kernel_samples(basis: &OrthoBasis, zs: &[Complex64], zetas: &[Complex64]) -> Result<Vec<KernelSample>> {
    let grid = basis.grid();
    let zi: Vec<usize> = zs.iter().map(|&z| grid.locate(z)).collect::<Result<_>>()?;
    let zj: Vec<usize> = zetas.iter().map(|&z| grid.locate(z)).collect::<Result<_>>()?;
    Ok(zi
        .iter()
        .flat_map(|&i| zj.iter().map(move |&j| (i, j)))
        .map(|(i, j)| basis.sample(i, j))
        .collect())
}

/// ∬ 𝒦(W(ζ); z, ζ) dA_ζ by midpoint quadrature over ζ.
pub fn reproduce(basis: &OrthoBasis, w: &GridFunction, z: Complex64) -> Result<Bicomplex> {
    let grid = basis.grid();
    check_same_grid(grid, w.grid())?;
    let zi = grid.locate(z)?;
    let total: Bicomplex = (0..grid.len())
        .into_par_iter()
        .map(|j| basis.kernel_at(w.values()[j], zi, j))
        .reduce(|| Bicomplex::ZERO, |a, b| a + b);
    Ok(total * grid.cell_area())
}

/// P Ψ = Σ ⟨Ψ, Φₙ⟩ Φₙ.
pub fn project(basis: &OrthoBasis, psi: &GridFunction) -> Result<GridFunction> {
    check_same_grid(basis.grid(), psi.grid())?;
    let mut out = GridFunction::zeros(psi.grid());
    for phi in &basis.members {
        let c = inner_l2(psi, phi)?;
        for (o, p) in out.values_mut().iter_mut().zip(phi.values()) {
            *o += p.scale(c);
        }
    }
    Ok(out)
}

/// Up to `count` safe-interior nodes spread evenly through the node list.
pub fn sample_nodes(grid: &Grid, count: usize) -> Vec<usize> {
    let safe: Vec<usize> = grid.safe_nodes().collect();
    if safe.len() <= count {
        return safe;
    }
    (0..count)
        .map(|i| safe[(i * (safe.len() - 1)) / (count - 1).max(1)])
        .collect()
}

/// max over sampled node pairs of |L(z,ζ) − jK(z,ζ)|_𝔹; requires b ≡ 0.
pub fn b_zero_reduction_check(basis: &OrthoBasis) -> Result<f64> {
    if !basis.source.coefficients.is_b_zero() {
        return Err(Error::WrongCoefficients(format!(
            "the L = jK reduction needs b = 0, got sup|b| = {:.3e}",
            basis.source.coefficients.sup_b()
        )));
    }
    let nodes = sample_nodes(basis.grid(), 10);
    let mut worst: f64 = 0.0;
    for &i in &nodes {
        for &j in &nodes {
            let (k, l) = basis.kernel_pair(i, j);
            worst = worst.max((l - k.mul_j()).norm());
        }
    }
    Ok(worst)
}

/// Largest defect of the three kernel symmetry relations
/// Sc K(z,ζ) = (Sc K(ζ,z))*, Vec L(z,ζ) = (Vec L(ζ,z))*, Sc L(z,ζ) = (Vec K(ζ,z))*
/// over all pairs of the given nodes.
pub fn kernel_symmetry_defect(basis: &OrthoBasis, nodes: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for &i in nodes {
        for &j in nodes {
            let (k, l) = basis.kernel_pair(i, j);
            let (kt, lt) = basis.kernel_pair(j, i);
            worst = worst
                .max((k.sc - kt.sc.conj()).norm())
                .max((l.vec - lt.vec.conj()).norm())
                .max((l.sc - kt.vec.conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::analytic_power;
    use crate::domain::Domain;
    use crate::vekua::{make_solution_set, Coefficients};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn disk(n: usize) -> Arc<Grid> {
        Arc::new(Grid::build(Domain::unit_disk(), n).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(g: &Arc<Grid>, rng: &mut ChaCha8Rng) -> GridFunction {
        let v = (0..g.len())
            .map(|_| Bicomplex::from_parts(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        GridFunction::new(g, v).unwrap()
    }

    fn analytic_basis(g: &Arc<Grid>, n: usize) -> OrthoBasis {
        gram_schmidt(&make_solution_set(&Coefficients::zero(g), n).unwrap()).unwrap()
    }

    #[test]
    fn first_members_on_unit_disk() {
        let g = disk(64);
        let co = Coefficients::zero(&g);
        let one = GridFunction::constant(&g, Bicomplex::ONE);
        let zh = analytic_power(&g, c(0.0, 0.0), 1).unwrap();
        let set = VekuaSolutionSet::from_solutions(co, vec![one, zh.clone()]).unwrap();
        let basis = gram_schmidt(&set).unwrap();
        assert_eq!(basis.len(), 2);
        let p0 = basis.members[0].values()[0];
        assert!((p0.sc.re - 1.0 / PI.sqrt()).abs() <= 0.02 / PI.sqrt());
        // Φ₁ should be ẑ·√(2/π) up to the quadrature error of ∬|z|² = π/2.
        let k = g.locate(c(0.4, -0.3)).unwrap();
        let expect = zh.values()[k] * (2.0 / PI).sqrt();
        assert!((basis.members[1].values()[k] - expect).norm() <= 0.02 * expect.norm());
        assert!(basis.gram_residual <= 1e-10);
    }

    #[test]
    fn duplicate_candidates_are_dropped() {
        let g = disk(16);
        let one = GridFunction::constant(&g, Bicomplex::ONE);
        let set = VekuaSolutionSet::from_solutions(Coefficients::zero(&g), vec![one.clone(), one]).unwrap();
        let basis = gram_schmidt(&set).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis.dropped, vec![1]);
        let zero = VekuaSolutionSet::from_solutions(Coefficients::zero(&g), vec![GridFunction::zeros(&g)]).unwrap();
        assert!(matches!(gram_schmidt(&zero), Err(Error::EmptyBasis)));
    }

    #[test]
    fn kernel_is_linear_in_coefficient() {
        let g = disk(24);
        let basis = analytic_basis(&g, 4);
        let a = Bicomplex::new(c(0.3, -1.1), c(0.7, 0.2));
        let (i, j) = (17, 140);
        let (k, l) = basis.kernel_pair(i, j);
        let direct = basis.kernel_at(a, i, j);
        let combo = k.scale(a.sc) + l.scale(a.vec);
        assert!((direct - combo).norm() < 1e-12);
        assert_eq!(basis.kernel_at(Bicomplex::ZERO, i, j), Bicomplex::ZERO);
    }

    #[test]
    fn classical_disk_kernel() {
        let g = disk(64);
        let basis = analytic_basis(&g, 16);
        let (z, zeta) = (c(0.3, 0.0), c(0.2, 0.0));
        let k = kernel_eval(&basis, Bicomplex::ONE, z, zeta).unwrap();
        let exact = (c(PI, 0.0) * (c(1.0, 0.0) - z * zeta.conj()).powi(2)).inv();
        assert!((k.idempotent().minus - exact).norm() <= 1e-2);
        assert!(matches!(
            kernel_eval(&basis, Bicomplex::ONE, c(2.0, 0.0), zeta),
            Err(Error::NodeNotOnGrid(_))
        ));
    }

    #[test]
    fn reproducing_property() {
        let g = disk(64);
        let basis = analytic_basis(&g, 8);
        for p in [c(0.1, 0.2), c(-0.35, 0.3)] {
            let k = g.locate(p).unwrap();
            let v = reproduce(&basis, &basis.members[0], p).unwrap();
            assert!((v - basis.members[0].values()[k]).norm() <= 1e-8);
            let combo = basis.members[1].scale(c(0.5, -2.0)).add(&basis.members[3].mul_const(Bicomplex::ONE)).unwrap();
            assert!((reproduce(&basis, &combo, p).unwrap() - combo.values()[k]).norm() <= 1e-8);
        }
        let w = analytic_power(&g, c(0.0, 0.0), 2).unwrap();
        for p in [c(0.3, 0.2), c(-0.4, -0.1), c(0.0, 0.45)] {
            let k = g.locate(p).unwrap();
            let got = reproduce(&basis, &w, p).unwrap();
            assert!((got - w.values()[k]).norm() <= 0.02 * w.values()[k].norm());
        }
    }

    #[test]
    fn projection_laws() {
        let g = disk(32);
        let basis = analytic_basis(&g, 5);
        let p1 = project(&basis, &basis.members[1]).unwrap();
        assert!(p1.sub(&basis.members[1]).unwrap().sup_norm() <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let psi = random_field(&g, &mut rng);
            let phi = random_field(&g, &mut rng);
            let pp = project(&basis, &psi).unwrap();
            let ppp = project(&basis, &pp).unwrap();
            assert!(l2_norm(&ppp.sub(&pp).unwrap()) <= 1e-10 * l2_norm(&psi));
            let lhs = inner_l2(&pp, &phi).unwrap();
            let rhs = inner_l2(&psi, &project(&basis, &phi).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * l2_norm(&psi) * l2_norm(&phi));
            // Coefficient projection equals the kernel quadrature of the reproducing formula.
            let k = g.safe_nodes().next().unwrap();
            let via_kernel = reproduce(&basis, &psi, g.node(k)).unwrap();
            assert!((via_kernel - pp.values()[k]).norm() <= 1e-10 * l2_norm(&psi));
        }
    }

    #[test]
    fn kernel_symmetry_and_reduction() {
        let g = disk(32);
        let basis = analytic_basis(&g, 6);
        let nodes = sample_nodes(&g, 10);
        assert_eq!(nodes.len(), 10);
        assert!(kernel_symmetry_defect(&basis, &nodes) <= 1e-8);
        assert!(b_zero_reduction_check(&basis).unwrap() <= 1e-8);
        let co = Coefficients::constant(&g, Bicomplex::ZERO, Bicomplex::real(0.1));
        let nonzero_b = gram_schmidt(&make_solution_set(&co, 2).unwrap()).unwrap();
        assert!(matches!(b_zero_reduction_check(&nonzero_b), Err(Error::WrongCoefficients(_))));
        assert!(kernel_symmetry_defect(&nonzero_b, &nodes) <= 1e-8);
    }

    #[test]
    fn pointwise_evaluation_stays_bounded() {
        let g = disk(48);
        let z0 = g.locate(c(0.2, -0.1)).unwrap();
        let sup = |basis: &OrthoBasis| basis.members.iter().map(|m| m.values()[z0].norm()).fold(0.0, f64::max);
        let small = sup(&analytic_basis(&g, 6));
        let large = sup(&analytic_basis(&g, 12));
        assert!(large <= 2.0 * small, "{large} vs {small}");
    }

    #[test]
    fn members_remain_solutions() {
        let g = disk(32);
        let co = Coefficients::constant(&g, Bicomplex::new(c(0.2, 0.1), c(0.0, 0.1)), Bicomplex::new(c(0.1, 0.0), c(0.0, -0.1)));
        let set = make_solution_set(&co, 3).unwrap();
        let basis = gram_schmidt(&set).unwrap();
        assert!(basis.gram_residual <= 1e-10);
        let src = set.max_residual();
        for r in &basis.member_residuals {
            assert!(*r <= 2.0 * src.max(1e-12), "{r} vs {src}");
        }
    }
}
