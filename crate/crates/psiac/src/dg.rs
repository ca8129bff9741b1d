//! Discontinuous Galerkin solver for the canonical advection test problem
//! (unit transport speed, zero source): upwind flux, Bernstein-Bezier
//! cells, classical RK4 time stepping, L2 projection of initial data, and
//! pointwise/L2 error metrics.
//!
//! Solver arithmetic is double precision; the mesh geometry stays rational
//! so the filtering machinery can work exactly against it.

use crate::exact::{RatMatrix, RatPoly, Rational};
use crate::legacy::QuadratureRule;
use crate::spline::{bernstein_mass_matrix, bernstein_poly, PiecewisePoly};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeshError {
    #[error("mesh needs at least one cell")]
    Empty,
    #[error("domain endpoints must satisfy a < b")]
    EmptyDomain,
    #[error("a/h = {0} is not an integer; prototype break points must be consecutive integers")]
    NonIntegerPrototype(String),
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("time step produced a non-finite coefficient at tau = {0}")]
    UnstableStep(f64),
}

/// Uniform mesh on `[a, b]` with `n` cells. The prototype break points
/// `s_0..s_n` are the consecutive integers `a/h .. b/h`, and the physical
/// break points are `h·s_i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mesh {
    a: Rational,
    b: Rational,
    n_cells: usize,
    h: Rational,
    s_first: Rational,
}

impl Mesh {
    pub fn new(a: Rational, b: Rational, n_cells: usize) -> Result<Self, MeshError> {
        if n_cells == 0 {
            return Err(MeshError::Empty);
        }
        if a >= b {
            return Err(MeshError::EmptyDomain);
        }
        let h = (&b - &a) / Rational::from(n_cells as i64);
        let s_first = &a / &h;
        if !s_first.is_integer() {
            return Err(MeshError::NonIntegerPrototype(s_first.to_string()));
        }
        Ok(Mesh {
            a,
            b,
            n_cells,
            h,
            s_first,
        })
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> &Rational {
        &self.h
    }

    /// First prototype break point `a/h`.
    pub fn s_first(&self) -> &Rational {
        &self.s_first
    }

    /// Last prototype break point `b/h`.
    pub fn s_last(&self) -> Rational {
        &self.s_first + &Rational::from(self.n_cells as i64)
    }

    /// Prototype break points `s_0..s_n` as rationals (integer-valued).
    pub fn prototype_breakpoints(&self) -> Vec<Rational> {
        (0..=self.n_cells)
            .map(|i| &self.s_first + &Rational::from(i as i64))
            .collect()
    }

    /// Physical left edge of cell `i`.
    pub fn cell_lo(&self, i: usize) -> Rational {
        &self.a + &(&self.h * &Rational::from(i as i64))
    }

    pub fn h_f64(&self) -> f64 {
        self.h.to_f64()
    }

    pub fn a_f64(&self) -> f64 {
        self.a.to_f64()
    }

    pub fn b_f64(&self) -> f64 {
        self.b.to_f64()
    }

    /// Evaluation grid with `ppc` points per cell plus the right endpoint.
    pub fn grid_points_f64(&self, ppc: usize) -> Vec<f64> {
        let h = self.h_f64();
        let a = self.a_f64();
        let mut xs = Vec::with_capacity(self.n_cells * ppc + 1);
        for c in 0..self.n_cells {
            for j in 0..ppc {
                xs.push(a + h * (c as f64 + j as f64 / ppc as f64));
            }
        }
        xs.push(self.b_f64());
        xs
    }
}

/// Per-cell Bernstein-Bezier coefficients of the DG approximation.
#[derive(Clone, Debug)]
pub struct DgField {
    mesh: Mesh,
    degree: usize,
    coeffs: Vec<f64>,
    time: f64,
}

impl DgField {
    pub fn new(mesh: Mesh, degree: usize, coeffs: Vec<f64>, time: f64) -> Self {
        assert_eq!(coeffs.len(), mesh.n_cells() * (degree + 1));
        DgField {
            mesh,
            degree,
            coeffs,
            time,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, cell: usize, l: usize) -> f64 {
        self.coeffs[cell * (self.degree + 1) + l]
    }

    fn cell_coeffs(&self, cell: usize) -> &[f64] {
        &self.coeffs[cell * (self.degree + 1)..(cell + 1) * (self.degree + 1)]
    }

    /// Value at local coordinate `u` in `[0,1]` of a cell (de Casteljau).
    fn eval_local(&self, cell: usize, u: f64) -> f64 {
        let mut work: Vec<f64> = self.cell_coeffs(cell).to_vec();
        for round in (1..work.len()).rev() {
            for i in 0..round {
                work[i] = work[i] * (1.0 - u) + work[i + 1] * u;
            }
        }
        work[0]
    }

    /// Pointwise value; the right domain endpoint takes the last cell's
    /// trace.
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.mesh.h_f64();
        let rel = (x - self.mesh.a_f64()) / h;
        let cell = (rel.floor() as isize).clamp(0, self.mesh.n_cells() as isize - 1) as usize;
        let u = (rel - cell as f64).clamp(0.0, 1.0);
        self.eval_local(cell, u)
    }

    /// Values on the standard evaluation grid (`ppc` per cell plus `b`).
    pub fn sample_grid(&self, ppc: usize) -> Vec<f64> {
        let mut vals = Vec::with_capacity(self.mesh.n_cells() * ppc + 1);
        for c in 0..self.mesh.n_cells() {
            for j in 0..ppc {
                vals.push(self.eval_local(c, j as f64 / ppc as f64));
            }
        }
        vals.push(self.eval_local(self.mesh.n_cells() - 1, 1.0));
        vals
    }

    /// Exact rational copies of the double-precision coefficients.
    pub fn exact_coeffs(&self) -> Vec<Rational> {
        self.coeffs
            .iter()
            .map(|&c| Rational::from_f64(c).expect("finite coefficient"))
            .collect()
    }

    /// Sum of cell integrals, `sum_i ∫_cell u`; conserved under periodic
    /// upwind DG.
    pub fn total_integral(&self) -> f64 {
        let h = self.mesh.h_f64();
        let d1 = (self.degree + 1) as f64;
        self.coeffs.iter().sum::<f64>() * h / d1
    }

    /// Snapshot rows `(cell, l, coefficient)` for CSV export.
    pub fn snapshot_rows(&self) -> Vec<(usize, usize, f64)> {
        let d1 = self.degree + 1;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (i / d1, i % d1, c))
            .collect()
    }
}

/// Unit-interval Bernstein operators shared by projection and the RHS.
pub struct DgOperators {
    degree: usize,
    mass_inv: Vec<Vec<f64>>,
    /// `stiffness[l][m] = ∫_0^1 B_l'(u)·B_m(u) du`
    stiffness: Vec<Vec<f64>>,
}

impl DgOperators {
    pub fn new(degree: usize) -> Self {
        let mass_inv = bernstein_mass_matrix(degree)
            .inverse()
            .expect("mass matrix is SPD")
            .to_f64();
        let zero = Rational::zero();
        let one = Rational::one();
        let basis: Vec<RatPoly> = (0..=degree)
            .map(|l| bernstein_poly(degree, l, &zero, &one))
            .collect();
        let stiffness = (0..=degree)
            .map(|l| {
                let dl = basis[l].derivative();
                (0..=degree)
                    .map(|m| (&dl * &basis[m]).integrate_on(&zero, &one).to_f64())
                    .collect()
            })
            .collect();
        DgOperators {
            degree,
            mass_inv,
            stiffness,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn apply_mass_inv(&self, v: &[f64]) -> Vec<f64> {
        self.mass_inv
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Boundary treatment for the advection solve. The Dirichlet variant
/// carries the exact inflow trace (the outflow side needs no condition
/// under upwinding).
pub enum BoundaryCondition {
    Periodic,
    DirichletInflow(Box<dyn Fn(f64) -> f64 + Sync>),
}

/// L2 projection of `f`, cell by cell: solve `M·c = ∫ f·B_l` with
/// Gauss-Legendre quadrature using `degree + 5` nodes per cell.
pub fn l2_project(f: impl Fn(f64) -> f64, mesh: &Mesh, degree: usize) -> DgField {
    let ops = DgOperators::new(degree);
    let quad = QuadratureRule::gauss_legendre(degree + 5);
    // nodes mapped to [0,1]
    let nodes: Vec<f64> = quad.nodes().iter().map(|t| 0.5 * (t + 1.0)).collect();
    let weights: Vec<f64> = quad.weights().iter().map(|w| 0.5 * w).collect();
    let basis_at_nodes: Vec<Vec<f64>> = (0..=degree)
        .map(|l| {
            let b = bernstein_poly(degree, l, &Rational::zero(), &Rational::one());
            nodes.iter().map(|&u| b.eval_f64(u)).collect()
        })
        .collect();
    let h = mesh.h_f64();
    let a = mesh.a_f64();
    let mut coeffs = Vec::with_capacity(mesh.n_cells() * (degree + 1));
    for cell in 0..mesh.n_cells() {
        let lo = a + h * cell as f64;
        let rhs: Vec<f64> = (0..=degree)
            .map(|l| {
                nodes
                    .iter()
                    .zip(&weights)
                    .enumerate()
                    .map(|(q, (&u, &w))| w * f(lo + h * u) * basis_at_nodes[l][q])
                    .sum()
            })
            .collect();
        coeffs.extend(ops.apply_mass_inv(&rhs));
    }
    DgField::new(mesh.clone(), degree, coeffs, 0.0)
}

/// Semi-discrete right-hand side of the advection weak form with upwind
/// interface fluxes: `h·M·dc_i/dtau = K·c_i - u*_right·e_d + u*_left·e_0`.
pub fn advection_rhs(
    u: &DgField,
    ops: &DgOperators,
    bc: &BoundaryCondition,
    tau: f64,
) -> Vec<f64> {
    assert_eq!(ops.degree(), u.degree());
    let d = u.degree();
    let n = u.mesh().n_cells();
    let h = u.mesh().h_f64();
    let mut out = Vec::with_capacity(u.coeffs().len());
    for cell in 0..n {
        let c = u.cell_coeffs(cell);
        // upwind traces: left interface takes the neighbor's right trace
        let inflow = if cell > 0 {
            u.coeff(cell - 1, d)
        } else {
            match bc {
                BoundaryCondition::Periodic => u.coeff(n - 1, d),
                BoundaryCondition::DirichletInflow(g) => g(tau),
            }
        };
        let outflow = c[d];
        let mut rhs: Vec<f64> = (0..=d)
            .map(|l| {
                ops.stiffness[l]
                    .iter()
                    .zip(c)
                    .map(|(k, cm)| k * cm)
                    .sum::<f64>()
            })
            .collect();
        rhs[d] -= outflow;
        rhs[0] += inflow;
        out.extend(ops.apply_mass_inv(&rhs).into_iter().map(|v| v / h));
    }
    out
}

/// Classical four-stage RK4 up to `t_end` with `dtau = cfl·h`; the final
/// step is shortened to land exactly on `t_end`.
pub fn integrate(
    u0: &DgField,
    t_end: f64,
    cfl: f64,
    bc: &BoundaryCondition,
) -> Result<DgField, IntegrateError> {
    assert!(t_end >= 0.0 && cfl > 0.0);
    let ops = DgOperators::new(u0.degree());
    let mut coeffs = u0.coeffs().to_vec();
    let mut tau = u0.time();
    let dt_nominal = cfl * u0.mesh().h_f64();
    let field = |c: Vec<f64>, t: f64| DgField::new(u0.mesh().clone(), u0.degree(), c, t);
    while tau < t_end - 1e-14 {
        let dt = dt_nominal.min(t_end - tau);
        let k1 = advection_rhs(&field(coeffs.clone(), tau), &ops, bc, tau);
        let s2: Vec<f64> = coeffs.iter().zip(&k1).map(|(c, k)| c + 0.5 * dt * k).collect();
        let k2 = advection_rhs(&field(s2, tau), &ops, bc, tau + 0.5 * dt);
        let s3: Vec<f64> = coeffs.iter().zip(&k2).map(|(c, k)| c + 0.5 * dt * k).collect();
        let k3 = advection_rhs(&field(s3, tau), &ops, bc, tau + 0.5 * dt);
        let s4: Vec<f64> = coeffs.iter().zip(&k3).map(|(c, k)| c + dt * k).collect();
        let k4 = advection_rhs(&field(s4, tau), &ops, bc, tau + dt);
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        tau += dt;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(IntegrateError::UnstableStep(tau));
        }
    }
    Ok(field(coeffs, t_end.max(tau)))
}

/// Pointwise samples `(x, |err|)`, composite-quadrature L2, and max-norm
/// error of sampled values against an exact solution. `values` must come
/// from the standard grid of `ppc` points per cell plus the right endpoint.
#[derive(Clone, Debug)]
pub struct ErrorMetrics {
    pub samples: Vec<(f64, f64)>,
    pub l2: f64,
    pub linf: f64,
}

pub fn error_metrics(
    xs: &[f64],
    values: &[f64],
    exact: impl Fn(f64) -> f64,
    mesh: &Mesh,
    ppc: usize,
) -> ErrorMetrics {
    assert_eq!(xs.len(), values.len());
    assert_eq!(xs.len(), mesh.n_cells() * ppc + 1);
    let errs: Vec<f64> = xs
        .iter()
        .zip(values)
        .map(|(&x, &v)| (v - exact(x)).abs())
        .collect();
    let samples: Vec<(f64, f64)> = xs.iter().copied().zip(errs.iter().copied()).collect();
    let linf = errs.iter().cloned().fold(0.0, f64::max);
    let l2 = l2_on_cells(&errs, mesh, ppc, 0, mesh.n_cells());
    ErrorMetrics { samples, l2, linf }
}

/// Composite-quadrature L2 norm of the sampled error restricted to cells
/// `cell_lo..cell_hi` (Simpson when `ppc` is even, trapezoid otherwise).
pub fn l2_on_cells(
    errs: &[f64],
    mesh: &Mesh,
    ppc: usize,
    cell_lo: usize,
    cell_hi: usize,
) -> f64 {
    let h_sub = mesh.h_f64() / ppc as f64;
    let mut acc = 0.0;
    for cell in cell_lo..cell_hi {
        let base = cell * ppc;
        if ppc.is_multiple_of(2) {
            for pair in 0..ppc / 2 {
                let i = base + 2 * pair;
                let (f0, f1, f2) = (
                    errs[i] * errs[i],
                    errs[i + 1] * errs[i + 1],
                    errs[i + 2] * errs[i + 2],
                );
                acc += h_sub / 3.0 * (f0 + 4.0 * f1 + f2);
            }
        } else {
            for i in base..base + ppc {
                acc += 0.5 * h_sub * (errs[i] * errs[i] + errs[i + 1] * errs[i + 1]);
            }
        }
    }
    acc.sqrt()
}

/// Least-squares slope of `log(err)` against `log(h)`: the observed
/// convergence order.
pub fn fit_order(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, err) in pairs {
        let (x, y) = (h.ln(), err.max(1e-300).ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Exact L2 projection of a rational-coefficient polynomial; the result
/// reproduces `p` exactly whenever `deg p <= degree`.
pub fn l2_project_poly_exact(p: &RatPoly, mesh: &Mesh, degree: usize) -> Vec<Rational> {
    let mass_inv = bernstein_mass_matrix(degree)
        .inverse()
        .expect("mass matrix is SPD");
    let zero = Rational::zero();
    let one = Rational::one();
    let basis: Vec<RatPoly> = (0..=degree)
        .map(|l| bernstein_poly(degree, l, &zero, &one))
        .collect();
    let mut coeffs = Vec::with_capacity(mesh.n_cells() * (degree + 1));
    for cell in 0..mesh.n_cells() {
        let lo = mesh.cell_lo(cell);
        let local = p.compose_affine(mesh.h(), &lo);
        let rhs = RatMatrix::from_fn(degree + 1, 1, |l, _| {
            (&local * &basis[l]).integrate_on(&zero, &one)
        });
        coeffs.extend(mass_inv.matmul(&rhs).column(0));
    }
    coeffs
}

/// The exact piecewise-polynomial form of a field given by rational
/// Bernstein coefficients on the mesh.
pub fn bernstein_field_pieces(
    coeffs: &[Rational],
    mesh: &Mesh,
    degree: usize,
) -> PiecewisePoly {
    assert_eq!(coeffs.len(), mesh.n_cells() * (degree + 1));
    let mut breakpoints = Vec::with_capacity(mesh.n_cells() + 1);
    let mut pieces = Vec::with_capacity(mesh.n_cells());
    for cell in 0..=mesh.n_cells() {
        breakpoints.push(mesh.cell_lo(cell));
    }
    for cell in 0..mesh.n_cells() {
        let (lo, hi) = (&breakpoints[cell], &breakpoints[cell + 1]);
        let mut piece = RatPoly::zero();
        for l in 0..=degree {
            let b = bernstein_poly(degree, l, lo, hi);
            piece = &piece + &b.scale(&coeffs[cell * (degree + 1) + l]);
        }
        pieces.push(piece);
    }
    PiecewisePoly::new(breakpoints, pieces)
}
