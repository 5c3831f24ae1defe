//! Theodorescu transform, its L² adjoint and the bicomplex Cauchy integral.
//!
//! On the uniform lattice the weight between target `z` and source `ζ` depends
//! only on the lattice offset, so one table of `(h/π)/(Δx + iΔy)` serves every
//! pair. The self cell contributes the exact integral of `1/(z − ζ)` over a
//! centred square, which vanishes by odd symmetry.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bicomplex::{Bicomplex, IdempotentPair};
use crate::calculus::{d_bar, GridFunction};
use crate::domain::{DomainSpec, Grid};
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct KernelWeights {
    table: Vec<Complex64>,
    base: Vec<usize>,
    source: Vec<usize>,
    self_cell: Vec<Bicomplex>,
}

impl KernelWeights {
    pub(crate) fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let span = 2 * n - 1;
        let scale = grid.h() / PI;
        let mut table = vec![Complex64::new(0.0, 0.0); span * span];
        for a in 0..span {
            for b in 0..span {
                let d = Complex64::new(a as f64 - (n - 1) as f64, b as f64 - (n - 1) as f64);
                if d.norm_sqr() > 0.0 {
                    table[a * span + b] = d.inv() * scale;
                }
            }
        }
        let base = grid
            .lattice()
            .iter()
            .map(|&[ix, iy]| (ix as usize + n - 1) * span + iy as usize + n - 1)
            .collect();
        let source = grid
            .lattice()
            .iter()
            .map(|&[ix, iy]| ix as usize * span + iy as usize)
            .collect();
        Self {
            table,
            base,
            source,
            self_cell: vec![Bicomplex::ZERO; grid.len()],
        }
    }

    /// Contribution of the singular cell at each node (zero for centred squares).
    pub fn self_cell(&self) -> &[Bicomplex] {
        &self.self_cell
    }

    /// Weight `(h²/π)/(zᵢ − ζⱼ)` of the complex transform A.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.table[self.base[i] - self.source[j]]
    }

    /// Simultaneously evaluates Σⱼ plusⱼ·conj(wᵢⱼ) and Σⱼ minusⱼ·wᵢⱼ.
    fn apply(&self, plus: &[Complex64], minus: &[Complex64]) -> Vec<(Complex64, Complex64)> {
        self.base
            .par_iter()
            .map(|&b| {
                let mut sp = Complex64::new(0.0, 0.0);
                let mut sm = Complex64::new(0.0, 0.0);
                for ((&s, p), m) in self.source.iter().zip(plus).zip(minus) {
                    let w = self.table[b - s];
                    sp += p * w.conj();
                    sm += m * w;
                }
                (sp, sm)
            })
            .collect()
    }

    /// A g(z) = (1/π)∬ g(ζ)/(z − ζ) dA.
    pub fn transform_a(&self, g: &[Complex64]) -> Vec<Complex64> {
        let zero = vec![Complex64::new(0.0, 0.0); g.len()];
        self.apply(&zero, g).into_iter().map(|p| p.1).collect()
    }

    /// B g(z) = (1/π)∬ g(ζ)/(z* − ζ*) dA.
    pub fn transform_b(&self, g: &[Complex64]) -> Vec<Complex64> {
        let zero = vec![Complex64::new(0.0, 0.0); g.len()];
        self.apply(g, &zero).into_iter().map(|p| p.0).collect()
    }

    /// Writes the dense N×N matrix of A-weights, row-major, as little-endian
    /// (re, im) f64 pairs, with a JSON sidecar at `<path>.json`.
    pub fn write_cache(&self, grid: &Grid, path: &Path) -> Result<()> {
        let len = grid.len();
        let mut out = BufWriter::new(File::create(path)?);
        for i in 0..len {
            for j in 0..len {
                let w = self.entry(i, j);
                out.write_all(&w.re.to_le_bytes())?;
                out.write_all(&w.im.to_le_bytes())?;
            }
        }
        out.flush()?;
        let meta = CacheSidecar {
            domain: grid.spec().clone(),
            nodes: len,
            layout: "row-major".into(),
            entry: "complex128 little-endian (re, im)".into(),
        };
        std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheSidecar {
    domain: DomainSpec,
    nodes: usize,
    layout: String,
    entry: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// A kernel matrix loaded from the binary cache.
#[derive(Debug)]
pub struct DenseKernel {
    nodes: usize,
    data: Vec<Complex64>,
}

impl DenseKernel {
    pub fn read(grid: &Grid, path: &Path) -> Result<Self> {
        let meta: CacheSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        if meta.domain != *grid.spec() || meta.nodes != grid.len() {
            return Err(Error::GridMismatch);
        }
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        if bytes.len() != meta.nodes * meta.nodes * 16 {
            return Err(Error::Parse(format!(
                "kernel cache holds {} bytes, expected {}",
                bytes.len(),
                meta.nodes * meta.nodes * 16
            )));
        }
        let data = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self {
            nodes: meta.nodes,
            data,
        })
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.nodes + j]
    }

    pub fn transform_a(&self, g: &[Complex64]) -> Vec<Complex64> {
        self.data
            .par_chunks(self.nodes)
            .map(|row| row.iter().zip(g).map(|(w, v)| w * v).sum())
            .collect()
    }
}

fn split(f: &GridFunction) -> (Vec<Complex64>, Vec<Complex64>) {
    f.values()
        .iter()
        .map(|w| {
            let p = w.idempotent();
            (p.plus, p.minus)
        })
        .unzip()
}

fn recompose(grid: &Arc<Grid>, pairs: Vec<(Complex64, Complex64)>) -> GridFunction {
    let values = pairs
        .into_iter()
        .map(|(p, m)| Bicomplex::from_idempotent(IdempotentPair::new(p, m)))
        .collect();
    GridFunction::new(grid, values).expect("length preserved")
}

/// T F = p⁺ B F⁺ + p⁻ A F⁻.
pub fn theodorescu(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let weights = grid.kernel_weights();
    let (plus, minus) = split(f);
    let out = weights.apply(&plus, &minus);
    let corr = weights.self_cell();
    let mut t = recompose(grid, out);
    for (v, c) in t.values_mut().iter_mut().zip(corr) {
        *v += *c;
    }
    t
}

/// T* F = −p⁺ A F⁺ − p⁻ B F⁻, the exact transpose of the discrete T in L².
pub fn theodorescu_adjoint(f: &GridFunction) -> GridFunction {
    let grid = f.grid();
    let weights = grid.kernel_weights();
    let (plus, minus) = split(f);
    // apply(x, y) returns (Σ x·conj w, Σ y·w); feed minus through the conjugated slot.
    let out = weights
        .apply(&minus, &plus)
        .into_iter()
        .map(|(bm, ap)| (-ap, -bm))
        .collect();
    recompose(grid, out)
}

/// Samples a function on the grid's boundary nodes.
pub fn boundary_trace(grid: &Grid, f: impl Fn(Complex64) -> Bicomplex) -> Vec<Bicomplex> {
    grid.boundary().iter().map(|b| f(b.point)).collect()
}

/// Boundary trace taken from the nearest grid node.
pub fn nearest_node_trace(w: &GridFunction) -> Vec<Bicomplex> {
    let grid = w.grid();
    grid.boundary()
        .iter()
        .map(|b| w.values()[grid.nearest_node(b.point)])
        .collect()
}

/// C_Γφ(z) = (1/2πj)∮ φ(ζ)/(ζ̂ − ẑ) dζ̂ by the trapezoid rule on the grid's
/// boundary samples. Points must lie at least `2h` inside the domain.
pub fn cauchy_boundary(grid: &Grid, phi: &[Bicomplex], points: &[Complex64]) -> Result<Vec<Bicomplex>> {
    if phi.len() != grid.boundary().len() {
        return Err(Error::InvalidArgument(format!(
            "{} boundary values for {} boundary samples",
            phi.len(),
            grid.boundary().len()
        )));
    }
    let minimum = 2.0 * grid.h();
    for &z in points {
        let distance = grid.domain().distance_to_boundary(z);
        if distance < minimum {
            return Err(Error::PointTooCloseToBoundary {
                point: z,
                distance,
                minimum,
            });
        }
    }
    let weighted: Vec<(Complex64, Complex64, Complex64)> = grid
        .boundary()
        .iter()
        .zip(phi)
        .map(|(b, w)| {
            let p = w.idempotent();
            let dz = b.tangent * b.weight;
            (b.point, p.plus.conj() * dz, p.minus * dz)
        })
        .collect();
    let factor = Complex64::new(0.0, -0.5 / PI);
    Ok(points
        .par_iter()
        .map(|&z| {
            let mut sp = Complex64::new(0.0, 0.0);
            let mut sm = Complex64::new(0.0, 0.0);
            for &(zeta, wp, wm) in &weighted {
                let k = (zeta - z).inv();
                sp += wp * k;
                sm += wm * k;
            }
            Bicomplex::from_idempotent(IdempotentPair::new((sp * factor).conj(), sm * factor))
        })
        .collect())
}

/// C_Γφ at every node at least `2h` from the boundary; other nodes hold zero.
pub fn cauchy_field(grid: &Arc<Grid>, phi: &[Bicomplex]) -> Result<GridFunction> {
    let minimum = 2.0 * grid.h();
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&k| grid.distance_to_boundary(k) >= minimum)
        .collect();
    let pts: Vec<Complex64> = idx.iter().map(|&k| grid.node(k)).collect();
    let vals = cauchy_boundary(grid, phi, &pts)?;
    let mut out = GridFunction::zeros(grid);
    for (k, v) in idx.into_iter().zip(vals) {
        out.values_mut()[k] = v;
    }
    Ok(out)
}

/// max over safe interior nodes of |C_Γ[tr W] + T[∂̄W] − W|_𝔹.
pub fn borel_pompeiu_residual(w: &GridFunction, trace: &[Bicomplex]) -> Result<f64> {
    let grid = w.grid();
    let c = cauchy_field(grid, trace)?;
    let t = theodorescu(&d_bar(w));
    Ok(grid
        .safe_nodes()
        .map(|k| (c.values()[k] + t.values()[k] - w.values()[k]).norm())
        .fold(0.0, f64::max))
}
