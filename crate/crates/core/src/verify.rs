//! Quantitative acceptance checks. Each criterion compares computed values
//! against closed-form oracles or exact discrete identities and records the
//! measured values next to their tolerances.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bergman::{b_zero_reduction_check, gram_schmidt, kernel_symmetry_defect, project, reproduce, sample_nodes, OrthoBasis};
use crate::bicomplex::{hat, Bicomplex};
use crate::calculus::{d_bar, inner_l2, l2_norm, relative_vekua_residual, GridFunction};
use crate::domain::{Domain, Grid};
use crate::error::{Error, Result};
use crate::integral::{borel_pompeiu_residual, boundary_trace, theodorescu, theodorescu_adjoint};
use crate::main_vekua::{
    anti_conjugate, b_from_f, conductivity_residuals, conjugate_pair, hilbert_transform, metaharmonic_conjugate,
    BoundaryData, Conductivity, ConductivityProfile,
};
use crate::vekua::{bump, hodge_complement_element, make_solution_set, Coefficients, VekuaSolutionSet};

/// Below this resolution the kernel oracle is not meaningful.
pub const MIN_KERNEL_N: usize = 64;

/// Default tolerances, overridable by key.
pub const TOLERANCES: &[(&str, f64)] = &[
    ("algebra", 1e-12),
    ("algebra_seconds", 1.0),
    ("theodorescu", 5e-2),
    ("theodorescu_ratio", 1.5),
    ("theodorescu_seconds", 30.0),
    ("inversion", 5e-2),
    ("adjoint", 1e-10),
    ("borel_pompeiu", 5e-2),
    ("kernel", 1e-2),
    ("kernel_seconds", 120.0),
    ("projection", 1e-10),
    ("hodge", 5e-2),
    ("residual", 5e-2),
    ("trivial_exact", 1e-10),
    ("conductivity", 5e-2),
    ("conjugate_linear", 1e-3),
    ("conjugate_quadratic", 5e-3),
    ("conjugate_residual", 5e-2),
    ("round_trip", 5e-2),
    ("hilbert", 5e-2),
    ("symmetry", 1e-8),
    ("reproduction", 5e-2),
];

/// The twelve criteria by number.
pub const CRITERIA: [(u32, &str); 12] = [
    (1, "bicomplex algebra"),
    (2, "Theodorescu oracle"),
    (3, "inversion identity"),
    (4, "adjoint identity"),
    (5, "Borel-Pompeiu formula"),
    (6, "classical disk Bergman kernel"),
    (7, "projection laws"),
    (8, "Vekua solution generation"),
    (9, "conductivity link"),
    (10, "metaharmonic conjugates"),
    (11, "Hilbert transform"),
    (12, "kernel symmetry and reduction"),
];

#[derive(Clone, Debug)]
pub struct Settings {
    /// Domain and resolution for the operator checks (2-5, 10, 11).
    pub domain: Domain,
    pub n: usize,
    /// Resolution and order of the a = b = 0 basis (6, 7, 12).
    pub kernel_n: usize,
    pub basis_order: usize,
    /// Main Vekua problem (7-10).
    pub main_domain: Domain,
    pub main_n: usize,
    pub main_order: usize,
    pub profile: ConductivityProfile,
    pub algebra_samples: usize,
    pub random_fields: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            domain: Domain::unit_disk(),
            n: 64,
            kernel_n: 96,
            basis_order: 16,
            main_domain: Domain::disk(0.0, 0.0, 0.8),
            main_n: 64,
            main_order: 8,
            profile: ConductivityProfile::ExpX,
            algebra_samples: 10_000,
            random_fields: 20,
            seed: 20_240_917,
            tolerances: BTreeMap::new(),
        }
    }
}

impl Settings {
    pub fn tolerance(&self, key: &str) -> f64 {
        if let Some(v) = self.tolerances.get(key) {
            return *v;
        }
        TOLERANCES
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("unknown tolerance key {key}"))
    }

    /// Rejects unknown or non-positive overrides.
    pub fn set_tolerance(&mut self, key: &str, value: f64) -> Result<()> {
        if !TOLERANCES.iter().any(|(k, _)| *k == key) {
            let known: Vec<&str> = TOLERANCES.iter().map(|(k, _)| *k).collect();
            return Err(Error::InvalidArgument(format!("unknown tolerance {key:?}; known keys: {}", known.join(", "))));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {key} must be positive, got {value}")));
        }
        self.tolerances.insert(key.to_string(), value);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// A numerical routine failed before the check could be evaluated.
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub quantity: String,
    pub value: f64,
    /// `<=` or `>=`.
    pub relation: &'static str,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: u32,
    pub name: String,
    pub status: Status,
    pub measurements: Vec<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub seconds: f64,
}

impl Check {
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::Error => "ERROR",
        };
        let mut s = format!("{tag} {:>2} {} ({:.2} s)", self.id, self.name, self.seconds);
        for m in &self.measurements {
            s.push_str(&format!("; {} = {:.3e} {} {:.1e}", m.quantity, m.value, m.relation, m.tolerance));
        }
        if let Some(note) = &self.note {
            s.push_str(&format!("; {note}"));
        }
        s
    }
}

struct Recorder<'a> {
    settings: &'a Settings,
    measurements: Vec<Measurement>,
    skipped: Option<String>,
}

impl Recorder<'_> {
    fn at_most(&mut self, quantity: impl Into<String>, value: f64, key: &str) {
        let tolerance = self.settings.tolerance(key);
        self.measurements.push(Measurement {
            quantity: quantity.into(),
            value,
            relation: "<=",
            tolerance,
            passed: value <= tolerance,
        });
    }

    fn at_least(&mut self, quantity: impl Into<String>, value: f64, key: &str) {
        let tolerance = self.settings.tolerance(key);
        self.measurements.push(Measurement {
            quantity: quantity.into(),
            value,
            relation: ">=",
            tolerance,
            passed: value >= tolerance,
        });
    }

    fn exact(&mut self, quantity: impl Into<String>, value: f64, bound: f64) {
        self.measurements.push(Measurement {
            quantity: quantity.into(),
            value,
            relation: "<=",
            tolerance: bound,
            passed: value <= bound,
        });
    }

    fn skip(&mut self, reason: impl Into<String>) {
        self.skipped = Some(reason.into());
    }
}

struct MainProblem {
    conductivity: Conductivity,
    set: VekuaSolutionSet,
    basis: OrthoBasis,
}

type Shared<T> = OnceLock<std::result::Result<Arc<T>, String>>;

/// Runs criteria, sharing the expensive bases between them.
pub struct Suite {
    settings: Settings,
    analytic: Shared<OrthoBasis>,
    main: Shared<MainProblem>,
}

fn shared<T>(cell: &Shared<T>, build: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
    cell.get_or_init(|| build().map(Arc::new).map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::InvalidArgument)
}

fn grid(domain: &Domain, n: usize) -> Result<Arc<Grid>> {
    Ok(Arc::new(Grid::build(domain.clone(), n)?))
}

/// Radius of an origin-centred disk.
fn centred_disk(domain: &Domain) -> Option<f64> {
    match domain {
        Domain::Disk { center, radius } if center[0] == 0.0 && center[1] == 0.0 => Some(*radius),
        _ => None,
    }
}

fn random_bicomplex(rng: &mut ChaCha8Rng) -> Bicomplex {
    Bicomplex::from_parts(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> GridFunction {
    let values = (0..grid.len()).map(|_| random_bicomplex(rng)).collect();
    GridFunction::new(grid, values).expect("matching length")
}

fn safe_max(grid: &Grid, f: impl Fn(usize) -> f64) -> f64 {
    grid.safe_nodes().map(f).fold(0.0, f64::max)
}

impl Suite {
    pub fn new(settings: Settings) -> Self {
        Self {
            settings,
            analytic: OnceLock::new(),
            main: OnceLock::new(),
        }
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    fn analytic_basis(&self) -> Result<Arc<OrthoBasis>> {
        shared(&self.analytic, || {
            let g = grid(&self.settings.domain, self.settings.kernel_n)?;
            gram_schmidt(&make_solution_set(&Coefficients::zero(&g), self.settings.basis_order)?)
        })
    }

    fn main_problem(&self) -> Result<Arc<MainProblem>> {
        shared(&self.main, || {
            let g = grid(&self.settings.main_domain, self.settings.main_n)?;
            let conductivity = Conductivity::from_profile(&g, self.settings.profile);
            let set = make_solution_set(&b_from_f(&conductivity)?, self.settings.main_order)?;
            let basis = gram_schmidt(&set)?;
            Ok(MainProblem { conductivity, set, basis })
        })
    }

    pub fn run_all(&self) -> Vec<Check> {
        CRITERIA.iter().map(|&(id, _)| self.run(id)).collect()
    }

    pub fn run(&self, id: u32) -> Check {
        let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
        let mut rec = Recorder {
            settings: &self.settings,
            measurements: Vec::new(),
            skipped: None,
        };
        let start = Instant::now();
        let outcome = match id {
            1 => self.algebra(&mut rec),
            2 => self.theodorescu_oracle(&mut rec),
            3 => self.inversion(&mut rec),
            4 => self.adjoint(&mut rec),
            5 => self.borel_pompeiu(&mut rec),
            6 => self.disk_kernel(&mut rec),
            7 => self.projection(&mut rec),
            8 => self.generation(&mut rec),
            9 => self.conductivity(&mut rec),
            10 => self.conjugates(&mut rec),
            11 => self.hilbert(&mut rec),
            12 => self.symmetry(&mut rec),
            _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
        };
        let seconds = start.elapsed().as_secs_f64();
        let (status, note) = match outcome {
            Err(e) => (Status::Error, Some(e.to_string())),
            Ok(()) => match rec.skipped.take() {
                Some(reason) => (Status::Skipped, Some(format!("skipped: {reason}"))),
                None if rec.measurements.iter().all(|m| m.passed) => (Status::Pass, None),
                None => (Status::Fail, None),
            },
        };
        Check {
            id,
            name: name.to_string(),
            status,
            measurements: rec.measurements,
            note,
            seconds,
        }
    }

    fn algebra(&self, rec: &mut Recorder) -> Result<()> {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (mut ring, mut invol, mut norms, mut expo) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..self.settings.algebra_samples {
            let (w, v, u) = (random_bicomplex(&mut rng), random_bicomplex(&mut rng), random_bicomplex(&mut rng));
            let componentwise = Bicomplex::new(w.sc * v.sc - w.vec * v.vec, w.sc * v.vec + w.vec * v.sc);
            ring = ring
                .max((w * v - v * w).norm())
                .max(((w * v) * u - w * (v * u)).norm())
                .max((w * (v + u) - (w * v + w * u)).norm())
                .max((w * v - componentwise).norm())
                .max((Bicomplex::from_idempotent(w.idempotent()) - w).norm())
                .max((w * w.conj_bar() - Bicomplex::scalar(w.sc * w.sc + w.vec * w.vec)).norm());
            let p = w.idempotent();
            if p.plus.norm() > 0.1 && p.minus.norm() > 0.1 {
                ring = ring.max((w * w.inverse()? - Bicomplex::ONE).norm());
            }
            let d = w.conj_dagger().idempotent();
            invol = invol
                .max((w.conj_bar().conj_bar() - w).norm())
                .max((w.conj_dagger().conj_dagger() - w).norm())
                .max((w.conj_star().conj_star() - w).norm())
                .max(((w * v).conj_bar() - w.conj_bar() * v.conj_bar()).norm())
                .max(((w * v).conj_dagger() - w.conj_dagger() * v.conj_dagger()).norm())
                .max(((w * v).conj_star() - w.conj_star() * v.conj_star()).norm())
                .max((d.plus - p.plus.conj()).norm())
                .max((d.minus - p.minus.conj()).norm());
            norms = norms
                .max((w.inner(w) - w.norm_sqr()).norm())
                .max((w * v).norm() - 2f64.sqrt() * w.norm() * v.norm())
                .max(r * p.plus.norm() - w.norm())
                .max(r * p.minus.norm() - w.norm())
                .max(w.norm() - r * (p.plus.norm() + p.minus.norm()))
                .max((w.inner(v.mul_j()) + w.mul_j().inner(v)).norm());
            expo = expo
                .max(((w + v).exp() - w.exp() * v.exp()).norm())
                .max((w.exp() * (-w).exp() - Bicomplex::ONE).norm());
        }
        rec.at_most("ring and product identities", ring, "algebra");
        rec.at_most("involutions", invol, "algebra");
        rec.at_most("norm inequalities and inner product", norms, "algebra");
        rec.at_most("exponential homomorphism", expo, "algebra");
        rec.at_most("seconds", start.elapsed().as_secs_f64(), "algebra_seconds");
        Ok(())
    }

    fn theodorescu_oracle(&self, rec: &mut Recorder) -> Result<()> {
        if centred_disk(&self.settings.domain).is_none() {
            rec.skip("the T[1] oracle needs an origin-centred disk");
            return Ok(());
        }
        let start = Instant::now();
        let error = |n: usize| -> Result<f64> {
            let g = grid(&self.settings.domain, n)?;
            let t = theodorescu(&GridFunction::constant(&g, Bicomplex::ONE));
            Ok(safe_max(&g, |k| (t.values()[k] - hat(g.node(k).conj())).norm()))
        };
        let n = self.settings.n;
        let (coarse, fine) = (error(n)?, error(2 * n)?);
        rec.at_most(format!("max |T[1] - (x - jy)| at n = {n}"), coarse, "theodorescu");
        rec.at_least(format!("error ratio n = {n} / {}", 2 * n), coarse / fine, "theodorescu_ratio");
        rec.at_most("seconds", start.elapsed().as_secs_f64(), "theodorescu_seconds");
        Ok(())
    }

    fn inversion(&self, rec: &mut Recorder) -> Result<()> {
        let g = grid(&self.settings.domain, self.settings.n)?;
        let f = GridFunction::from_fn(&g, |z| {
            let zh = hat(z);
            zh * zh + Bicomplex::J * z.re.sin()
        });
        let back = d_bar(&theodorescu(&f));
        let (mut num, mut den) = (0.0, 0.0);
        for k in g.safe_nodes() {
            num += (back.values()[k] - f.values()[k]).norm_sqr();
            den += f.values()[k].norm_sqr();
        }
        rec.at_most("relative L2 error of d_bar(T F) - F", (num / den).sqrt(), "inversion");
        Ok(())
    }

    fn adjoint(&self, rec: &mut Recorder) -> Result<()> {
        let g = grid(&self.settings.domain, self.settings.n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed ^ 4);
        let mut worst: f64 = 0.0;
        for _ in 0..3 {
            let f = random_field(&g, &mut rng);
            let h = random_field(&g, &mut rng);
            let lhs = inner_l2(&theodorescu(&f), &h)?;
            let rhs = inner_l2(&f, &theodorescu_adjoint(&h))?;
            worst = worst.max((lhs - rhs).norm() / (l2_norm(&f) * l2_norm(&h)));
        }
        rec.at_most("|<TF,G> - <F,T*G>| / (|F||G|)", worst, "adjoint");
        Ok(())
    }

    fn borel_pompeiu(&self, rec: &mut Recorder) -> Result<()> {
        let g = grid(&self.settings.domain, self.settings.n)?;
        let square = |z: Complex64| hat(z) * hat(z);
        let conj_hat = |z: Complex64| hat(z.conj());
        let w1 = GridFunction::from_fn(&g, square);
        let w2 = GridFunction::from_fn(&g, conj_hat);
        rec.at_most("residual for z^2", borel_pompeiu_residual(&w1, &boundary_trace(&g, square))?, "borel_pompeiu");
        rec.at_most("residual for x - jy", borel_pompeiu_residual(&w2, &boundary_trace(&g, conj_hat))?, "borel_pompeiu");
        Ok(())
    }

    fn disk_kernel(&self, rec: &mut Recorder) -> Result<()> {
        let Some(radius) = centred_disk(&self.settings.domain) else {
            rec.skip("the closed-form kernel needs an origin-centred disk");
            return Ok(());
        };
        if self.settings.kernel_n < MIN_KERNEL_N {
            rec.skip(format!("below minimum n ({} < {MIN_KERNEL_N})", self.settings.kernel_n));
            return Ok(());
        }
        let start = Instant::now();
        let basis = self.analytic_basis()?;
        let g = Arc::clone(basis.grid());
        let inner: Vec<usize> = (0..g.len()).filter(|&k| g.node(k).norm() <= 0.5 * radius).collect();
        let r2 = radius * radius;
        let error = |basis: &OrthoBasis| -> f64 {
            inner
                .par_iter()
                .map(|&i| {
                    let z = g.node(i);
                    inner
                        .iter()
                        .map(|&j| {
                            let zeta = g.node(j);
                            let exact = r2 / (PI * (r2 - z * zeta.conj()).powi(2));
                            let got = basis.kernel_at(Bicomplex::ONE, i, j).idempotent().minus;
                            (got - exact).norm() / exact.norm()
                        })
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max)
        };
        let full = error(&basis);
        rec.at_most(format!("max relative error, N = {}, n = {}", self.settings.basis_order, g.n()), full, "kernel");
        let order = self.settings.basis_order;
        if order >= 4 {
            let mut errors = Vec::new();
            for m in [order / 4, order / 2] {
                let b = gram_schmidt(&make_solution_set(&Coefficients::zero(&g), m)?)?;
                errors.push(error(&b));
            }
            errors.push(full);
            let growth = errors.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            rec.exact(format!("error growth over N = {}, {}, {}", order / 4, order / 2, order), growth, 1.0);
        }
        rec.at_most("seconds", start.elapsed().as_secs_f64(), "kernel_seconds");
        Ok(())
    }

    fn projection_laws(&self, rec: &mut Recorder, label: &str, basis: &OrthoBasis, seed: u64) -> Result<()> {
        let g = Arc::clone(basis.grid());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut idem, mut adj) = (0.0f64, 0.0f64);
        for _ in 0..self.settings.random_fields {
            let psi = random_field(&g, &mut rng);
            let phi = random_field(&g, &mut rng);
            let pp = project(basis, &psi)?;
            idem = idem.max(l2_norm(&project(basis, &pp)?.sub(&pp)?) / l2_norm(&psi));
            let lhs = inner_l2(&pp, &phi)?;
            let rhs = inner_l2(&psi, &project(basis, &phi)?)?;
            adj = adj.max((lhs - rhs).norm() / (l2_norm(&psi) * l2_norm(&phi)));
        }
        rec.at_most(format!("{label}: |P^2 - P| relative"), idem, "projection");
        rec.at_most(format!("{label}: self-adjointness defect"), adj, "projection");
        // Test field supported in a disk around the domain centre.
        let domain = g.domain();
        let center = domain.center();
        let reach = domain.distance_to_boundary(center);
        let radius = (0.5 * reach).min(reach - 4.0 * g.h());
        if radius < 2.0 * g.h() {
            rec.skip("grid too coarse for a test field 3h inside the boundary".to_string());
            return Ok(());
        }
        let phi = bump(&g, center, radius, Bicomplex::from_parts(1.0, 0.5, 0.3, 0.0));
        let v = hodge_complement_element(&basis.source.coefficients, &phi)?;
        rec.at_most(format!("{label}: |P V| / |V| for a complement element"), l2_norm(&project(basis, &v)?) / l2_norm(&v), "hodge");
        Ok(())
    }

    fn projection(&self, rec: &mut Recorder) -> Result<()> {
        let analytic = self.analytic_basis()?;
        self.projection_laws(rec, "a = b = 0", &analytic, self.settings.seed ^ 7)?;
        let main = self.main_problem()?;
        self.projection_laws(rec, "main Vekua", &main.basis, self.settings.seed ^ 8)
    }

    fn generation(&self, rec: &mut Recorder) -> Result<()> {
        let main = self.main_problem()?;
        let c = &main.set.coefficients;
        rec.exact(
            "missing solutions",
            (2 * self.settings.main_order - main.set.solutions.len()) as f64,
            0.0,
        );
        rec.at_most("max relative Vekua residual of generated solutions", main.set.max_residual(), "residual");
        let f = main.conductivity.f();
        rec.at_most("relative residual of W = f", relative_vekua_residual(f, c.a(), c.b())?, "trivial_exact");
        let j_over_f = main.conductivity.reciprocal().mul_const(Bicomplex::J);
        rec.at_most("relative residual of W = j/f", relative_vekua_residual(&j_over_f, c.a(), c.b())?, "residual");
        Ok(())
    }

    fn conductivity(&self, rec: &mut Recorder) -> Result<()> {
        let main = self.main_problem()?;
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        for w in &main.set.solutions {
            let (a, b) = conductivity_residuals(&main.conductivity, w)?;
            r1 = r1.max(a);
            r2 = r2.max(b);
        }
        rec.at_most("div(f^2 grad(Sc W / f)) residual", r1, "conductivity");
        rec.at_most("div(f^-2 grad(f Vec W)) residual", r2, "conductivity");
        Ok(())
    }

    fn conjugates(&self, rec: &mut Recorder) -> Result<()> {
        if !self.settings.domain.star_shaped_at_origin() || !self.settings.main_domain.star_shaped_at_origin() {
            rec.skip("conjugates need a domain star-shaped about the origin");
            return Ok(());
        }
        let g = grid(&self.settings.domain, self.settings.n)?;
        let one = Conductivity::from_profile(&g, ConductivityProfile::One);
        let zero = Complex64::new(0.0, 0.0);
        let scalar = |f: &(dyn Fn(Complex64) -> f64 + Sync)| GridFunction::from_scalar_fn(&g, |z| Complex64::new(f(z), 0.0));
        let v = metaharmonic_conjugate(&one, &scalar(&|z| z.re), zero)?;
        rec.at_most("f = 1, u = x: max |v - y|", safe_max(&g, |k| (v.values()[k].sc - g.node(k).im).norm()), "conjugate_linear");
        let v = metaharmonic_conjugate(&one, &scalar(&|z| z.re * z.re - z.im * z.im), zero)?;
        let err = safe_max(&g, |k| (v.values()[k].sc - 2.0 * g.node(k).re * g.node(k).im).norm());
        rec.at_most("f = 1, u = x^2 - y^2: max |v - 2xy|", err, "conjugate_quadratic");

        // u = Sc W for a generated main Vekua solution W built from ẑ.
        let main = self.main_problem()?;
        let c = &main.set.coefficients;
        let cond = &main.conductivity;
        let mg = Arc::clone(cond.grid());
        let u = GridFunction::from_scalars(&mg, &main.set.solutions[2].sc())?;
        let v = metaharmonic_conjugate(cond, &u, zero)?;
        let w = conjugate_pair(&u, &v)?;
        rec.at_most(
            format!("{}: relative Vekua residual of u + jv", self.settings.profile.formula()),
            relative_vekua_residual(&w, c.a(), c.b())?,
            "conjugate_residual",
        );
        let back = anti_conjugate(cond, &v, zero)?;
        // Remove the best multiple of f over the safe interior.
        let f = cond.values();
        let (mut num, mut den) = (zero, 0.0);
        for k in mg.safe_nodes() {
            num += (back.values()[k].sc - u.values()[k].sc) * f[k].conj();
            den += f[k].norm_sqr();
        }
        let shift = num / den;
        let (mut err, mut size) = (0.0, 0.0);
        for k in mg.safe_nodes() {
            err += (back.values()[k].sc - u.values()[k].sc - shift * f[k]).norm_sqr();
            size += u.values()[k].sc.norm_sqr();
        }
        rec.at_most("round trip anti_conjugate(metaharmonic_conjugate(u)) relative", (err / size).sqrt(), "round_trip");
        Ok(())
    }

    fn hilbert(&self, rec: &mut Recorder) -> Result<()> {
        let Some(radius) = centred_disk(&self.settings.domain) else {
            rec.skip("the Hilbert transform oracle needs an origin-centred disk");
            return Ok(());
        };
        let g = grid(&self.settings.domain, self.settings.n)?;
        let one = Conductivity::from_profile(&g, ConductivityProfile::One);
        let count = 128;
        let cos = BoundaryData::from_fn(g.domain(), count, |z| Complex64::new(z.re / radius, 0.0));
        let h = hilbert_transform(&one, &cos)?;
        let err = h
            .params
            .iter()
            .zip(&h.values)
            .map(|(s, v)| (v - s.sin()).norm())
            .fold(0.0, f64::max);
        rec.at_most("f = 1: sup |H cos - sin|", err, "hilbert");
        let phi = BoundaryData::from_fn(g.domain(), count, |z| Complex64::new(0.3 + (z.re + -0.5 * z.im) / radius, 0.0));
        let hh = hilbert_transform(&one, &hilbert_transform(&one, &phi)?)?;
        let mean = phi.mean();
        let err = hh
            .values
            .iter()
            .zip(&phi.values)
            .map(|(a, p)| (a + p - mean).norm())
            .fold(0.0, f64::max);
        rec.at_most("f = 1: sup |H(H phi) + phi - mean|", err, "hilbert");
        let cond = Conductivity::from_profile(&g, self.settings.profile);
        let ones = BoundaryData::from_fn(g.domain(), count, |_| Complex64::new(1.0, 0.0));
        let hf = hilbert_transform(&cond, &ones)?;
        let err = hf.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        rec.at_most(format!("{}: sup |H_f 1|", self.settings.profile.formula()), err, "hilbert");
        Ok(())
    }

    fn symmetry(&self, rec: &mut Recorder) -> Result<()> {
        let analytic = self.analytic_basis()?;
        let nodes = sample_nodes(analytic.grid(), 10);
        rec.at_most("a = b = 0: kernel symmetry defect", kernel_symmetry_defect(&analytic, &nodes), "symmetry");
        rec.at_most("a = b = 0: |L - jK|", b_zero_reduction_check(&analytic)?, "symmetry");
        let main = self.main_problem()?;
        let nodes = sample_nodes(main.basis.grid(), 10);
        rec.at_most("main Vekua: kernel symmetry defect", kernel_symmetry_defect(&main.basis, &nodes), "symmetry");
        // Reproduction of a function in the span is exact up to rounding; z^2 only up to quadrature.
        let g = Arc::clone(analytic.grid());
        let first = &analytic.members[0];
        let square = GridFunction::from_fn(&g, |z| hat(z) * hat(z));
        let (mut exact, mut approx) = (0.0f64, 0.0f64);
        let center = g.domain().center();
        let reach = g.domain().distance_to_boundary(center);
        for t in [0.0, 0.25, 0.5] {
            let p = center + Complex64::from_polar(t * reach, 1.0 + 2.0 * t);
            let k = g.locate(p)?;
            exact = exact.max((reproduce(&analytic, first, p)? - first.values()[k]).norm());
            let target = square.values()[k];
            let got = reproduce(&analytic, &square, p)?;
            approx = approx.max((got - target).norm() / target.norm().max(1.0));
        }
        rec.at_most("reproduction of a basis member", exact, "symmetry");
        rec.at_most("reproduction of z^2 (relative)", approx, "reproduction");
        Ok(())
    }
}
