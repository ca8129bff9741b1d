//! Position-dependent filtering as one dot product: build the
//! position-invariant integral matrix `T` and the convolution matrix
//! `Q = T·A·M^{-1}·diag((-1)^l C(l+k+1,l))`, contract DG coefficients into
//! a boundary polynomial, apply the symmetric filter in the interior, and
//! assemble the full filtered field.
//!
//! All matrices are exact rationals; floating point appears only in the
//! final contractions against double-precision data.

use crate::dg::{bernstein_field_pieces, DgField, Mesh};
use crate::exact::{binom, rat, RatMatrix, Rational, SingularMatrix};
use crate::kernel::{
    filter_catalog, kernel_coefficients, symmetric_half_width, FilterName, FilterSpec, Side,
};
use crate::spline::{
    bernstein_basis, bspline_pieces, integrate_piecewise_product, PiecewisePoly,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("evaluation point {0} is outside the filter's validity region")]
    OutOfRegion(String),
    #[error("filter window of width {width} does not fit a mesh of {cells} cells")]
    MeshTooCoarse { width: String, cells: usize },
    #[error("operation needs a one-sided filter, got side {0}")]
    NotOneSided(Side),
    #[error(transparent)]
    Singular(#[from] SingularMatrix),
}

/// DG basis description in prototype coordinates: rational break points
/// with degree-`degree` Bernstein polynomials on each cell. Break points
/// may be non-uniform rationals; the uniform fast path requires them to be
/// consecutive integers.
#[derive(Clone, Debug)]
pub struct DgBasis {
    breakpoints: Vec<Rational>,
    degree: usize,
}

impl DgBasis {
    pub fn new(breakpoints: Vec<Rational>, degree: usize) -> Self {
        assert!(
            breakpoints.len() >= 2 && breakpoints.windows(2).all(|w| w[0] < w[1]),
            "break points must be strictly increasing"
        );
        DgBasis { breakpoints, degree }
    }

    pub fn from_mesh(mesh: &Mesh, degree: usize) -> Self {
        DgBasis::new(mesh.prototype_breakpoints(), degree)
    }

    /// Unit cells `0..=n0`.
    pub fn unit_cells(n0: usize, degree: usize) -> Self {
        DgBasis::new((0..=n0 as i64).map(rat).collect(), degree)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_cells(&self) -> usize {
        self.breakpoints.len() - 1
    }
}

/// Knots of the reflected kernel B-spline serving column `m` of `T`:
/// `lambda - reverse(window of the (r-m)-th kept B-spline)`. Column order
/// pairs with the reversal matrix `A` inside `Q`.
fn reflected_column_knots(spec: &FilterSpec, lambda: &Rational, m: usize) -> crate::spline::KnotVector {
    let r = spec.repro_degree();
    spec.window(r - m).affine(&rat(-1), lambda)
}

/// The position-invariant integral matrix
/// `T(i, m) = ∫ N_i(s)·B(s | lambda - t_reversed) ds` over the filter
/// window `[lambda - t_n, lambda - t_0]`, restricted to basis functions
/// whose support meets the window. Returns the matrix and the global
/// coefficient indices (`cell·(d+1) + l`) of its rows.
pub fn build_t_general(
    spec: &FilterSpec,
    lambda: &Rational,
    basis: &DgBasis,
) -> Result<(RatMatrix, Vec<usize>), FilterError> {
    let r = spec.repro_degree();
    let d = basis.degree();
    let window_lo = lambda - spec.knots().last();
    let window_hi = lambda - spec.knots().first();
    let bp = &basis.breakpoints;
    if &window_lo < bp.first().unwrap() || &window_hi > bp.last().unwrap() {
        return Err(FilterError::MeshTooCoarse {
            width: spec.support_width().to_string(),
            cells: basis.n_cells(),
        });
    }
    let cells: Vec<usize> = (0..basis.n_cells())
        .filter(|&c| bp[c] < window_hi && bp[c + 1] > window_lo)
        .collect();
    let row_index_set: Vec<usize> = cells
        .iter()
        .flat_map(|&c| (0..=d).map(move |l| c * (d + 1) + l))
        .collect();
    let mut t = RatMatrix::zeros(cells.len() * (d + 1), r + 1);
    for m in 0..=r {
        let col = bspline_pieces(&reflected_column_knots(spec, lambda, m));
        for (ci, &c) in cells.iter().enumerate() {
            let (lo, hi) = (&bp[c], &bp[c + 1]);
            for l in 0..=d {
                let bern = bernstein_basis(d, l, lo, hi);
                let val = integrate_piecewise_product(&bern, &col, lo, hi);
                t.set(ci * (d + 1) + l, m, val);
            }
        }
    }
    Ok((t, row_index_set))
}

/// Fast path for uniform integer DG break points: the window is pinned to
/// `[0, t_n - t_0]` with Bernstein cells on `[i, i+1]`,
/// `T((d+1)i + l, m) = ∫_i^{i+1} B_l^{(i)}(t)·B(t | t_n - t_reversed) dt`.
/// Agrees with [`build_t_general`] at the one-sided shift constants.
pub fn build_t_uniform(spec: &FilterSpec, dg_degree: usize) -> RatMatrix {
    let width = spec.support_width();
    let n0 = usize::try_from(width.ceil()).expect("small window");
    let basis = DgBasis::unit_cells(n0, dg_degree);
    let lambda = spec.knots().last().clone();
    let (t, _) = build_t_general(spec, &lambda, &basis).expect("window fits by construction");
    t
}

/// Closed form of the left `T` for the wide-support high-reproduction
/// filter (k = d, r = 4d): column `m` stacks the blocks `M_d·b_rho`,
/// `rho = 0..=d`, starting at block row `m`, where `b_rho` are the
/// Bernstein coefficients of the uniform B-spline pieces.
pub fn closed_form_t_srv(d: usize) -> RatMatrix {
    let mass = crate::spline::bernstein_mass_matrix(d);
    let bb = crate::spline::uniform_bspline_bb_coeffs(d);
    let blocks = mass.matmul(&bb); // column rho = M_d·b_rho
    let n0 = 5 * d + 1;
    let cols = 4 * d + 1;
    let mut t = RatMatrix::zeros((d + 1) * n0, cols);
    for m in 0..cols {
        for rho in 0..=d {
            for l in 0..=d {
                t.set((m + rho) * (d + 1) + l, m, blocks.get(l, rho).clone());
            }
        }
    }
    t
}

/// Closed form of the left `T` for the augmented boundary filter
/// (k = d, r = 2d+1): first column `(d+1)·M_d^{(1)}` in the top block,
/// remaining columns as consecutive `M_d·b_rho` stacks.
pub fn closed_form_t_rlkv(d: usize) -> RatMatrix {
    let mass = crate::spline::bernstein_mass_matrix(d);
    let bb = crate::spline::uniform_bspline_bb_coeffs(d);
    let blocks = mass.matmul(&bb);
    let n0 = 3 * d + 1;
    let cols = 2 * d + 2;
    let mut t = RatMatrix::zeros((d + 1) * n0, cols);
    for l in 0..=d {
        let v = mass.get(l, 0) * &rat(d as i64 + 1);
        t.set(l, 0, v);
    }
    for m in 1..cols {
        for rho in 0..=d {
            for l in 0..=d {
                t.set((m - 1 + rho) * (d + 1) + l, m, blocks.get(l, rho).clone());
            }
        }
    }
    t
}

/// Precomputed convolution matrix `Q = T·A·M^{-1}·diag((-1)^l C(l+k+1,l))`
/// for one boundary, together with the row index set, shift constant, mesh
/// scale, and the validity region of the filtered polynomial.
#[derive(Clone, Debug)]
pub struct ConvolutionMatrix {
    q: RatMatrix,
    q_f64: Vec<f64>,
    row_index_set: Vec<usize>,
    lambda: Rational,
    h: Rational,
    side: Side,
    x_lo: Rational,
    x_hi: Rational,
}

/// The convolution matrix contraction
/// `Q = T·A·M^{-1}·diag((-1)^l C(l+k+1,l))`, exact.
pub fn q_matrix(spec: &FilterSpec, t: &RatMatrix) -> Result<RatMatrix, SingularMatrix> {
    let r = spec.repro_degree();
    let k = spec.degree();
    assert_eq!(t.cols(), r + 1);
    let system = kernel_coefficients(spec)?;
    let mut q = t.reverse_columns().matmul(&system.inverse);
    for delta in 0..=r {
        let sign = if delta % 2 == 0 { rat(1) } else { rat(-1) };
        let scale = sign * binom((delta + k + 1) as i64, delta as i64);
        for i in 0..q.rows() {
            let v = q.get(i, delta) * &scale;
            q.set(i, delta, v);
        }
    }
    Ok(q)
}

/// Assemble `Q` from a prebuilt `T`. The region `[x_lo, x_hi]` is where
/// the resulting boundary polynomial is served (half-open at the seam).
pub fn build_q(
    spec: &FilterSpec,
    t: &RatMatrix,
    row_index_set: Vec<usize>,
    lambda: Rational,
    h: Rational,
    x_lo: Rational,
    x_hi: Rational,
) -> Result<ConvolutionMatrix, SingularMatrix> {
    assert_eq!(t.rows(), row_index_set.len());
    let q = q_matrix(spec, t)?;
    let q_f64 = q.entries().iter().map(Rational::to_f64).collect();
    Ok(ConvolutionMatrix {
        q,
        q_f64,
        row_index_set,
        lambda,
        h,
        side: spec.side(),
        x_lo,
        x_hi,
    })
}

/// Build the convolution matrix for one boundary of a mesh: the shift
/// constant comes from the one-sided convention (the kernel's outer knot
/// meets the domain endpoint), `T` from the general builder on the mesh
/// prototype, and the validity region is the boundary strip of width
/// `h·(3d+1)/2`.
pub fn boundary_convolution(
    spec: &FilterSpec,
    mesh: &Mesh,
    dg_degree: usize,
) -> Result<ConvolutionMatrix, FilterError> {
    let lambda = spec
        .lambda_for(mesh.s_first(), &mesh.s_last())
        .ok_or(FilterError::NotOneSided(spec.side()))?;
    let basis = DgBasis::from_mesh(mesh, dg_degree);
    let (t, rows) = build_t_general(spec, &lambda, &basis)?;
    let mu = symmetric_half_width(dg_degree);
    let strip = mesh.h() * &mu;
    let (x_lo, x_hi) = match spec.side() {
        Side::Left => (mesh.a().clone(), mesh.a() + &strip),
        Side::Right => (mesh.b() - &strip, mesh.b().clone()),
        Side::Symmetric => unreachable!("lambda_for returned Some"),
    };
    build_q(spec, &t, rows, lambda, mesh.h().clone(), x_lo, x_hi).map_err(FilterError::from)
}

impl ConvolutionMatrix {
    pub fn q(&self) -> &RatMatrix {
        &self.q
    }

    pub fn row_index_set(&self) -> &[usize] {
        &self.row_index_set
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn repro_degree(&self) -> usize {
        self.q.cols() - 1
    }

    fn in_region(&self, x: &Rational) -> bool {
        match self.side {
            Side::Left => &self.x_lo <= x && x < &self.x_hi,
            _ => &self.x_lo < x && x <= &self.x_hi,
        }
    }

    /// Exact contraction `u_I·Q·diag(h^-(0..r))`: the coefficients of the
    /// filtered boundary polynomial in powers of `x - h·lambda`.
    pub fn contract_exact(&self, u_full: &[Rational]) -> FilteredBoundaryPoly {
        let r = self.repro_degree();
        let u_i: Vec<Rational> = self
            .row_index_set
            .iter()
            .map(|&i| u_full[i].clone())
            .collect();
        let raw = self.q.row_vec_mul(&u_i);
        let coefficients: Vec<Rational> = raw
            .into_iter()
            .enumerate()
            .map(|(delta, v)| v * self.h.pow(-(delta as i32)))
            .collect();
        debug_assert_eq!(coefficients.len(), r + 1);
        FilteredBoundaryPoly {
            coefficients,
            h_lambda: &self.h * &self.lambda,
            side: self.side,
            x_lo: self.x_lo.clone(),
            x_hi: self.x_hi.clone(),
        }
    }

    /// Double-precision contraction against double data; `Q` itself stays
    /// rational and is cast entrywise once.
    pub fn contract_f64(&self, u_full: &[f64]) -> BoundaryPolyF64 {
        let r = self.repro_degree();
        let cols = r + 1;
        let h = self.h.to_f64();
        let mut raw = vec![0.0; cols];
        for (row, &gi) in self.row_index_set.iter().enumerate() {
            let u = u_full[gi];
            if u == 0.0 {
                continue;
            }
            for (delta, acc) in raw.iter_mut().enumerate() {
                *acc += u * self.q_f64[row * cols + delta];
            }
        }
        let mut scale = 1.0;
        let coefficients = raw
            .into_iter()
            .map(|v| {
                let c = v * scale;
                scale /= h;
                c
            })
            .collect();
        BoundaryPolyF64 {
            coefficients,
            h_lambda: (&self.h * &self.lambda).to_f64(),
        }
    }

    /// Filtered value at a rational point, exact:
    /// `u_I·Q·diag(h^-(0..r))·((x - h·lambda)^(0..r))^t`.
    pub fn eval_exact(&self, u_full: &[Rational], x: &Rational) -> Result<Rational, FilterError> {
        if !self.in_region(x) {
            return Err(FilterError::OutOfRegion(x.to_string()));
        }
        Ok(self.contract_exact(u_full).eval_poly(x))
    }

    /// Derivative of the filtered polynomial at a rational point, exact;
    /// orders beyond `r` are zero.
    pub fn deriv_exact(
        &self,
        u_full: &[Rational],
        x: &Rational,
        order: usize,
    ) -> Result<Rational, FilterError> {
        if !self.in_region(x) {
            return Err(FilterError::OutOfRegion(x.to_string()));
        }
        Ok(self.contract_exact(u_full).deriv_poly(x, order))
    }
}

/// Filtered boundary output: a single polynomial of degree <= r in
/// `x - h·lambda`, valid on the boundary strip.
#[derive(Clone, Debug)]
pub struct FilteredBoundaryPoly {
    coefficients: Vec<Rational>,
    h_lambda: Rational,
    side: Side,
    x_lo: Rational,
    x_hi: Rational,
}

impl FilteredBoundaryPoly {
    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn h_lambda(&self) -> &Rational {
        &self.h_lambda
    }

    pub fn region(&self) -> (&Rational, &Rational) {
        (&self.x_lo, &self.x_hi)
    }

    pub fn in_region(&self, x: &Rational) -> bool {
        match self.side {
            Side::Left => &self.x_lo <= x && x < &self.x_hi,
            _ => &self.x_lo < x && x <= &self.x_hi,
        }
    }

    /// Polynomial value, ignoring the region gate.
    pub fn eval_poly(&self, x: &Rational) -> Rational {
        let dx = x - &self.h_lambda;
        let mut acc = Rational::zero();
        for c in self.coefficients.iter().rev() {
            acc = acc * &dx + c;
        }
        acc
    }

    /// Region-gated value.
    pub fn eval(&self, x: &Rational) -> Result<Rational, FilterError> {
        if !self.in_region(x) {
            return Err(FilterError::OutOfRegion(x.to_string()));
        }
        Ok(self.eval_poly(x))
    }

    /// `order`-th derivative, exact; zero beyond the polynomial degree.
    pub fn deriv_poly(&self, x: &Rational, order: usize) -> Rational {
        let dx = x - &self.h_lambda;
        let mut acc = Rational::zero();
        for delta in (order..self.coefficients.len()).rev() {
            // falling factorial delta·(delta-1)···(delta-order+1)
            let mut fall = Rational::one();
            for i in 0..order {
                fall = fall * rat((delta - i) as i64);
            }
            acc = acc * &dx + &self.coefficients[delta] * &fall;
        }
        acc
    }

    pub fn to_f64(&self) -> BoundaryPolyF64 {
        BoundaryPolyF64 {
            coefficients: self.coefficients.iter().map(Rational::to_f64).collect(),
            h_lambda: self.h_lambda.to_f64(),
        }
    }
}

/// Double-precision view of a filtered boundary polynomial; the caller is
/// responsible for region classification.
#[derive(Clone, Debug)]
pub struct BoundaryPolyF64 {
    coefficients: Vec<f64>,
    h_lambda: f64,
}

impl BoundaryPolyF64 {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        let dx = x - self.h_lambda;
        let mut acc = 0.0;
        for c in self.coefficients.iter().rev() {
            acc = acc * dx + c;
        }
        acc
    }

    pub fn deriv(&self, x: f64, order: usize) -> f64 {
        let dx = x - self.h_lambda;
        let mut acc = 0.0;
        for delta in (order..self.coefficients.len()).rev() {
            let mut fall = 1.0;
            for i in 0..order {
                fall *= (delta - i) as f64;
            }
            acc = acc * dx + self.coefficients[delta] * fall;
        }
        acc
    }
}

/// Direct convolution oracle: kernel coefficients from a fresh exact solve
/// on the shifted/scaled knots, kernel assembled as piecewise polynomials,
/// reflected, multiplied against the exact field, and integrated. Fully
/// independent of the factored `Q` path.
pub fn direct_convolution_exact(
    spec: &FilterSpec,
    mesh: &Mesh,
    field: &PiecewisePoly,
    x: &Rational,
) -> Result<Rational, FilterError> {
    let lambda = match spec.side() {
        Side::Symmetric => Rational::zero(),
        _ => spec
            .lambda_for(mesh.s_first(), &mesh.s_last())
            .expect("one-sided"),
    };
    let xi = x - &(mesh.h() * &lambda);
    let transformed = spec.with_transformed_knots(mesh.h(), &xi);
    let coefficients = kernel_coefficients(&transformed)?.coefficients;
    let windows: Vec<PiecewisePoly> = (0..coefficients.len())
        .map(|m| bspline_pieces(&transformed.window(m)))
        .collect();
    let terms: Vec<(Rational, &PiecewisePoly)> = coefficients
        .iter()
        .cloned()
        .zip(windows.iter())
        .collect();
    let kernel = PiecewisePoly::linear_combination(&terms);
    // value = ∫ u(t)·f_xi(x - t) dt
    let reflected = kernel.precompose_affine(&rat(-1), x);
    let (lo, hi) = reflected.support().expect("nonempty kernel");
    let (lo, hi) = (lo.clone(), hi.clone());
    Ok(integrate_piecewise_product(field, &reflected, &lo, &hi))
}

/// The symmetric interior filter at prototype scale: kernel pieces and
/// coefficients are built once and reused.
pub struct SymmetricFilter {
    spec: FilterSpec,
    kernel: PiecewisePoly,
    half_width: Rational,
}

impl SymmetricFilter {
    pub fn new(dg_degree: usize) -> Self {
        let spec = filter_catalog(FilterName::Symmetric, dg_degree, Side::Symmetric)
            .expect("catalog degree >= 1");
        let system = kernel_coefficients(&spec).expect("symmetric system is regular");
        let windows: Vec<PiecewisePoly> = (0..=spec.repro_degree())
            .map(|m| bspline_pieces(&spec.window(m)))
            .collect();
        let terms: Vec<(Rational, &PiecewisePoly)> = system
            .coefficients
            .iter()
            .cloned()
            .zip(windows.iter())
            .collect();
        let kernel = PiecewisePoly::linear_combination(&terms);
        let half_width = symmetric_half_width(dg_degree);
        SymmetricFilter {
            spec,
            kernel,
            half_width,
        }
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    /// Prototype kernel pieces on `[-mu, mu]`.
    pub fn kernel(&self) -> &PiecewisePoly {
        &self.kernel
    }

    pub fn half_width(&self) -> &Rational {
        &self.half_width
    }

    /// Exact convolution of the `h`-scaled kernel with an exact field at
    /// a rational interior point.
    pub fn eval_exact(
        &self,
        field: &PiecewisePoly,
        mesh: &Mesh,
        x: &Rational,
    ) -> Result<Rational, FilterError> {
        let strip = mesh.h() * &self.half_width;
        let (lo, hi) = (mesh.a() + &strip, mesh.b() - &strip);
        if x < &lo || x > &hi {
            return Err(FilterError::OutOfRegion(x.to_string()));
        }
        // kernel_x(t) = (1/h)·K((x - t)/h)
        let h_inv = mesh.h().recip();
        let kernel_x = self
            .kernel
            .precompose_affine(&(-&h_inv), &(x * &h_inv))
            .scale_values(&h_inv);
        let (klo, khi) = kernel_x.support().expect("nonempty kernel");
        let (klo, khi) = (klo.clone(), khi.clone());
        Ok(integrate_piecewise_product(field, &kernel_x, &klo, &khi))
    }
}

/// Exact symmetric-filter convolution of a double-precision DG field
/// (coefficients are lifted to exact rationals) at a rational point.
pub fn symmetric_filter_eval(u: &DgField, x: &Rational) -> Result<Rational, FilterError> {
    let filter = SymmetricFilter::new(u.degree());
    let field = bernstein_field_pieces(&u.exact_coeffs(), u.mesh(), u.degree());
    filter.eval_exact(&field, u.mesh(), x)
}

/// Which evaluator serves an evaluation point.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Region {
    LeftBoundary,
    Interior,
    RightBoundary,
}

/// Classify the grid point `x = a + h·(cell + offset)` against the
/// boundary strips of width `h·mu_sym`, exactly: left strip is
/// `[a, a + h·mu)`, right strip `(b - h·mu, b]`.
pub fn classify_point(mesh: &Mesh, dg_degree: usize, cell: usize, offset: &Rational) -> Region {
    let mu = symmetric_half_width(dg_degree);
    let pos = rat(cell as i64) + offset;
    if pos < mu {
        Region::LeftBoundary
    } else if pos > rat(mesh.n_cells() as i64) - &mu {
        Region::RightBoundary
    } else {
        Region::Interior
    }
}

/// Fast interior sampling: for every sub-cell offset in the evaluation
/// grid, the contraction weights of the symmetric filter against the
/// Bernstein coefficients of nearby cells are precomputed exactly and
/// cast to doubles once.
pub struct InteriorSampler {
    dg_degree: usize,
    rel_lo: i64,
    n_rel: usize,
    /// `weights[offset][(rel - rel_lo)·(d+1) + l]`
    weights: Vec<Vec<f64>>,
}

impl InteriorSampler {
    pub fn new(filter: &SymmetricFilter, dg_degree: usize, offsets: &[Rational]) -> Self {
        let mu = filter.half_width();
        let rel_lo = i64::try_from((-mu).floor()).expect("small half width");
        let rel_hi = i64::try_from((Rational::one() + mu).ceil()).expect("small") - 1;
        let n_rel = (rel_hi - rel_lo + 1) as usize;
        let weights = offsets
            .iter()
            .map(|q| {
                // g_q(s) = K(q - s), supported on [q - mu, q + mu]
                let g = filter.kernel().precompose_affine(&rat(-1), q);
                let mut w = vec![0.0; n_rel * (dg_degree + 1)];
                for rel in rel_lo..=rel_hi {
                    let (lo, hi) = (rat(rel), rat(rel + 1));
                    for l in 0..=dg_degree {
                        let bern = bernstein_basis(dg_degree, l, &lo, &hi);
                        let v = integrate_piecewise_product(&bern, &g, &lo, &hi);
                        w[(rel - rel_lo) as usize * (dg_degree + 1) + l] = v.to_f64();
                    }
                }
                w
            })
            .collect();
        InteriorSampler {
            dg_degree,
            rel_lo,
            n_rel,
            weights,
        }
    }

    /// Filtered value at `x = a + h·(cell + offsets[offset_idx])`; the
    /// caller guarantees the point is interior.
    pub fn eval(&self, u: &DgField, cell: usize, offset_idx: usize) -> f64 {
        let d1 = self.dg_degree + 1;
        let w = &self.weights[offset_idx];
        let n = u.mesh().n_cells() as i64;
        let mut acc = 0.0;
        for rel in 0..self.n_rel as i64 {
            let c = cell as i64 + self.rel_lo + rel;
            if c < 0 || c >= n {
                debug_assert!(w[rel as usize * d1..(rel as usize + 1) * d1]
                    .iter()
                    .all(|&v| v == 0.0));
                continue;
            }
            for l in 0..d1 {
                acc += w[rel as usize * d1 + l] * u.coeff(c as usize, l);
            }
        }
        acc
    }
}

/// The fully assembled filtered field: one polynomial per boundary strip
/// and the symmetric filter on the interior, sampled on the standard
/// evaluation grid.
pub struct FilteredField {
    mesh: Mesh,
    dg_degree: usize,
    ppc: usize,
    offsets: Vec<Rational>,
    left: FilteredBoundaryPoly,
    left_f64: BoundaryPolyF64,
    right: FilteredBoundaryPoly,
    right_f64: BoundaryPolyF64,
    interior: InteriorSampler,
    field_coeffs: DgField,
    seam_left: Rational,
    seam_right: Rational,
    symmetric: SymmetricFilter,
}

/// Assemble the filtered field from a DG solution and left/right filter
/// specs; the interior uses the symmetric catalog filter of the field's
/// degree. Boundary coefficients are contracted exactly (the data lifts
/// exactly to rationals) and evaluation is double precision.
pub fn filter_field(
    u: &DgField,
    left_spec: &FilterSpec,
    right_spec: &FilterSpec,
    ppc: usize,
) -> Result<FilteredField, FilterError> {
    assert!(ppc >= 1);
    assert_eq!(left_spec.side(), Side::Left, "left spec must be left-sided");
    assert_eq!(
        right_spec.side(),
        Side::Right,
        "right spec must be right-sided"
    );
    let mesh = u.mesh();
    let d = u.degree();
    let n = mesh.n_cells();
    let mu = symmetric_half_width(d);
    // the symmetric window must also fit: interior region nonempty
    if &mu + &mu > rat(n as i64) {
        return Err(FilterError::MeshTooCoarse {
            width: (&mu + &mu).to_string(),
            cells: n,
        });
    }
    let left_q = boundary_convolution(left_spec, mesh, d)?;
    let right_q = boundary_convolution(right_spec, mesh, d)?;
    let exact = u.exact_coeffs();
    let left = left_q.contract_exact(&exact);
    let right = right_q.contract_exact(&exact);
    let offsets: Vec<Rational> = (0..ppc)
        .map(|j| Rational::ratio(j as i64, ppc as i64))
        .collect();
    let symmetric = SymmetricFilter::new(d);
    let interior = InteriorSampler::new(&symmetric, d, &offsets);
    let strip = mesh.h() * &mu;
    Ok(FilteredField {
        mesh: mesh.clone(),
        dg_degree: d,
        ppc,
        offsets,
        left_f64: left.to_f64(),
        right_f64: right.to_f64(),
        left,
        right,
        interior,
        field_coeffs: u.clone(),
        seam_left: mesh.a() + &strip,
        seam_right: mesh.b() - &strip,
        symmetric,
    })
}

impl FilteredField {
    pub fn left(&self) -> &FilteredBoundaryPoly {
        &self.left
    }

    pub fn right(&self) -> &FilteredBoundaryPoly {
        &self.right
    }

    pub fn seams(&self) -> (&Rational, &Rational) {
        (&self.seam_left, &self.seam_right)
    }

    pub fn region_of(&self, cell: usize, offset_idx: usize) -> Region {
        classify_point(
            &self.mesh,
            self.dg_degree,
            cell,
            &self.offsets[offset_idx],
        )
    }

    /// Value at grid point `(cell, offset_idx)`.
    pub fn eval_grid_point(&self, cell: usize, offset_idx: usize) -> f64 {
        let x = self.mesh.a_f64()
            + self.mesh.h_f64() * (cell as f64 + self.offsets[offset_idx].to_f64());
        match self.region_of(cell, offset_idx) {
            Region::LeftBoundary => self.left_f64.eval(x),
            Region::RightBoundary => self.right_f64.eval(x),
            Region::Interior => self.interior.eval(&self.field_coeffs, cell, offset_idx),
        }
    }

    /// Values on the standard grid (`ppc` per cell plus the right domain
    /// endpoint, which belongs to the right boundary strip).
    pub fn sample_grid(&self) -> Vec<f64> {
        let n = self.mesh.n_cells();
        let mut vals = Vec::with_capacity(n * self.ppc + 1);
        for cell in 0..n {
            for j in 0..self.ppc {
                vals.push(self.eval_grid_point(cell, j));
            }
        }
        vals.push(self.right_f64.eval(self.mesh.b_f64()));
        vals
    }

    /// Both candidate values at the two region seams; no continuity is
    /// implied between the boundary polynomial and the interior filter.
    pub fn seam_values(&self) -> [(Rational, f64, f64); 2] {
        let seam_interior = |x: &Rational| -> f64 {
            let pos = (x - self.mesh.a()) / self.mesh.h();
            let cell_int = pos.floor();
            let mut cell = i64::try_from(cell_int).expect("small mesh index");
            let mut q = &pos - &Rational::from(cell);
            // the right domain seam of a minimal mesh may land on a cell edge
            if cell == self.mesh.n_cells() as i64 {
                cell -= 1;
                q = Rational::one();
            }
            let sampler =
                InteriorSampler::new(&self.symmetric, self.dg_degree, &[q]);
            sampler.eval(&self.field_coeffs, cell as usize, 0)
        };
        let left_val = self.left_f64.eval(self.seam_left.to_f64());
        let right_val = self.right_f64.eval(self.seam_right.to_f64());
        [
            (
                self.seam_left.clone(),
                left_val,
                seam_interior(&self.seam_left),
            ),
            (
                self.seam_right.clone(),
                right_val,
                seam_interior(&self.seam_right),
            ),
        ]
    }

    pub fn to_json(&self) -> FilteredFieldJson {
        let poly_json = |p: &FilteredBoundaryPoly| BoundaryPolyJson {
            side: p.side.to_string(),
            h_lambda: p.h_lambda.to_fraction_string(),
            coefficients: p
                .coefficients
                .iter()
                .map(Rational::to_fraction_string)
                .collect(),
            x_range: [p.x_lo.to_fraction_string(), p.x_hi.to_fraction_string()],
        };
        let xs = self.mesh.grid_points_f64(self.ppc);
        let vals = self.sample_grid();
        let interior_samples = xs
            .iter()
            .zip(&vals)
            .enumerate()
            .filter(|(i, _)| {
                let (cell, j) = (i / self.ppc, i % self.ppc);
                *i < self.mesh.n_cells() * self.ppc
                    && self.region_of(cell, j) == Region::Interior
            })
            .map(|(_, (&x, &v))| [x, v])
            .collect();
        FilteredFieldJson {
            h: self.mesh.h().to_fraction_string(),
            region_breakpoints: [
                self.seam_left.to_fraction_string(),
                self.seam_right.to_fraction_string(),
            ],
            left: poly_json(&self.left),
            right: poly_json(&self.right),
            seams: self
                .seam_values()
                .into_iter()
                .map(|(x, boundary_value, interior_value)| SeamJson {
                    x: x.to_fraction_string(),
                    boundary_value,
                    interior_value,
                })
                .collect(),
            interior_samples,
        }
    }
}

#[derive(Serialize, Debug)]
pub struct BoundaryPolyJson {
    pub side: String,
    pub h_lambda: String,
    pub coefficients: Vec<String>,
    pub x_range: [String; 2],
}

#[derive(Serialize, Debug)]
pub struct SeamJson {
    pub x: String,
    pub boundary_value: f64,
    pub interior_value: f64,
}

#[derive(Serialize, Debug)]
pub struct FilteredFieldJson {
    pub h: String,
    pub region_breakpoints: [String; 2],
    pub left: BoundaryPolyJson,
    pub right: BoundaryPolyJson,
    pub seams: Vec<SeamJson>,
    pub interior_samples: Vec<[f64; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::l2_project_poly_exact;
    use crate::exact::RatPoly;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn unit_mesh(n: usize) -> Mesh {
        Mesh::new(rat(0), rat(1), n).unwrap()
    }

    /// Deterministic small rationals for test fields.
    fn pseudo_random_coeffs(count: usize) -> Vec<Rational> {
        let mut state: u64 = 0x243F6A8885A308D3;
        (0..count)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let n = ((state >> 33) % 17) as i64 - 8;
                let d = ((state >> 13) % 5) as i64 + 1;
                r(n, d)
            })
            .collect()
    }

    #[test]
    fn t_column_sums_are_one() {
        for (name, d) in [(FilterName::Rlkv, 2usize), (FilterName::Srv, 1), (FilterName::Multiknot, 2)] {
            let spec = filter_catalog(name, d, Side::Left).unwrap();
            let t = build_t_uniform(&spec, d);
            for m in 0..t.cols() {
                let sum: Rational = t.column(m).into_iter().sum();
                assert_eq!(sum, rat(1), "{name} d={d} column {m}");
            }
        }
    }

    #[test]
    fn closed_form_srv_d1_first_column() {
        let t = closed_form_t_srv(1);
        assert_eq!(t.rows(), 12);
        assert_eq!(t.cols(), 5);
        assert_eq!(t.get(0, 0), &r(1, 6));
        assert_eq!(t.get(1, 0), &r(1, 3));
        assert_eq!(t.get(2, 0), &r(1, 3));
        assert_eq!(t.get(3, 0), &r(1, 6));
        assert_eq!(t.get(4, 0), &rat(0));
    }

    #[test]
    fn closed_form_rlkv_d1_first_column() {
        let t = closed_form_t_rlkv(1);
        assert_eq!(t.rows(), 8);
        assert_eq!(t.cols(), 4);
        assert_eq!(t.get(0, 0), &r(2, 3));
        assert_eq!(t.get(1, 0), &r(1, 3));
        for i in 2..8 {
            assert_eq!(t.get(i, 0), &rat(0), "row {i}");
        }
    }

    #[test]
    fn uniform_builder_matches_closed_forms_d1() {
        let srv = filter_catalog(FilterName::Srv, 1, Side::Left).unwrap();
        assert_eq!(build_t_uniform(&srv, 1), closed_form_t_srv(1));
        let rlkv = filter_catalog(FilterName::Rlkv, 1, Side::Left).unwrap();
        assert_eq!(build_t_uniform(&rlkv, 1), closed_form_t_rlkv(1));
    }

    #[test]
    fn right_matrix_is_row_and_column_reversal_of_left() {
        for name in [FilterName::Srv, FilterName::Rlkv] {
            let left = filter_catalog(name, 1, Side::Left).unwrap();
            let right = filter_catalog(name, 1, Side::Right).unwrap();
            let tl = build_t_uniform(&left, 1);
            let tr = build_t_uniform(&right, 1);
            assert_eq!(tr, tl.reverse_rows().reverse_columns(), "{name}");
        }
    }

    #[test]
    fn scale_invariance_of_t() {
        // T built from physically scaled knots, break points and shift
        // equals the prototype matrix.
        let spec = filter_catalog(FilterName::Rlkv, 1, Side::Left).unwrap();
        let mesh = Mesh::new(rat(0), rat(1), 8).unwrap();
        let lambda = spec
            .lambda_for(mesh.s_first(), &mesh.s_last())
            .unwrap();
        let proto = build_t_general(&spec, &lambda, &DgBasis::from_mesh(&mesh, 1)).unwrap();
        for h in [r(1, 2), r(1, 4)] {
            let scaled_spec = spec.with_transformed_knots(&h, &rat(0));
            let scaled_bp: Vec<Rational> = mesh
                .prototype_breakpoints()
                .iter()
                .map(|s| s * &h)
                .collect();
            let scaled =
                build_t_general(&scaled_spec, &(&lambda * &h), &DgBasis::new(scaled_bp, 1))
                    .unwrap();
            assert_eq!(proto.0, scaled.0, "h = {h}");
        }
    }

    #[test]
    fn constant_data_gives_constant_one_polynomial() {
        let mesh = unit_mesh(12);
        for (name, d) in [
            (FilterName::Rs, 1usize),
            (FilterName::Srv, 1),
            (FilterName::Rlkv, 2),
            (FilterName::Multiknot, 2),
        ] {
            let spec = filter_catalog(name, d, Side::Left).unwrap();
            let conv = boundary_convolution(&spec, &mesh, d).unwrap();
            assert_eq!(conv.q().cols(), spec.repro_degree() + 1);
            let u = vec![rat(1); mesh.n_cells() * (d + 1)];
            let poly = conv.contract_exact(&u);
            assert_eq!(poly.coefficients()[0], rat(1), "{name}");
            for c in &poly.coefficients()[1..] {
                assert_eq!(c, &rat(0), "{name}");
            }
        }
    }

    #[test]
    fn zero_data_filters_to_zero() {
        let mesh = unit_mesh(10);
        let spec = filter_catalog(FilterName::Rs, 1, Side::Right).unwrap();
        let conv = boundary_convolution(&spec, &mesh, 1).unwrap();
        let u = vec![rat(0); 20];
        let v = conv.eval_exact(&u, &r(99, 100)).unwrap();
        assert_eq!(v, rat(0));
    }

    #[test]
    fn out_of_region_rejected() {
        let mesh = unit_mesh(10);
        let spec = filter_catalog(FilterName::Rs, 1, Side::Left).unwrap();
        let conv = boundary_convolution(&spec, &mesh, 1).unwrap();
        let u = vec![rat(0); 20];
        // left region is [0, 2/10); x = 1/2 is interior
        assert!(matches!(
            conv.eval_exact(&u, &r(1, 2)),
            Err(FilterError::OutOfRegion(_))
        ));
        assert!(conv.eval_exact(&u, &rat(0)).is_ok());
    }

    #[test]
    fn mesh_too_coarse_detected() {
        let mesh = unit_mesh(3);
        let spec = filter_catalog(FilterName::Srv, 1, Side::Left).unwrap();
        assert!(matches!(
            boundary_convolution(&spec, &mesh, 1),
            Err(FilterError::MeshTooCoarse { .. })
        ));
    }

    #[test]
    fn polynomial_data_reproduced_through_factored_path() {
        // degree-1 global polynomial, exactly projected, passes through
        // every filter unchanged (min(d, r) = d = 1) at boundary points.
        let mesh = unit_mesh(12);
        let p = RatPoly::from_coeffs(vec![r(1, 3), r(5, 7)]);
        let coeffs = l2_project_poly_exact(&p, &mesh, 1);
        for name in [FilterName::Rs, FilterName::Srv, FilterName::Rlkv, FilterName::Multiknot] {
            let spec = filter_catalog(name, 1, Side::Left).unwrap();
            let conv = boundary_convolution(&spec, &mesh, 1).unwrap();
            for x in [rat(0), r(1, 20), r(3, 20)] {
                let got = conv.eval_exact(&coeffs, &x).unwrap();
                assert_eq!(got, p.eval(&x), "{name} at {x}");
            }
        }
    }

    #[test]
    fn factored_path_matches_direct_convolution() {
        let mesh = unit_mesh(9);
        let d = 1usize;
        let coeffs = pseudo_random_coeffs(mesh.n_cells() * (d + 1));
        let field = bernstein_field_pieces(&coeffs, &mesh, d);
        for name in [FilterName::Rs, FilterName::Multiknot] {
            for side in [Side::Left, Side::Right] {
                let spec = filter_catalog(name, d, side).unwrap();
                let conv = boundary_convolution(&spec, &mesh, d).unwrap();
                let xs = match side {
                    Side::Left => [rat(0), r(1, 9), r(1, 5)],
                    _ => [rat(1), r(8, 9), r(79, 90)],
                };
                for x in xs {
                    let fast = conv.eval_exact(&coeffs, &x).unwrap();
                    let direct = direct_convolution_exact(&spec, &mesh, &field, &x).unwrap();
                    assert_eq!(fast, direct, "{name} {side} at {x}");
                }
            }
        }
    }

    #[test]
    fn derivative_order_zero_is_eval_and_high_orders_vanish() {
        let mesh = unit_mesh(10);
        let d = 1usize;
        let coeffs = pseudo_random_coeffs(20);
        let spec = filter_catalog(FilterName::Rs, d, Side::Left).unwrap();
        let conv = boundary_convolution(&spec, &mesh, d).unwrap();
        let x = r(1, 10);
        let poly = conv.contract_exact(&coeffs);
        assert_eq!(poly.deriv_poly(&x, 0), poly.eval_poly(&x));
        let r_deg = spec.repro_degree();
        assert_eq!(poly.deriv_poly(&x, r_deg + 1), rat(0));
        assert_eq!(conv.deriv_exact(&coeffs, &x, r_deg + 2).unwrap(), rat(0));
    }

    #[test]
    fn projection_plus_symmetric_filter_is_exact_to_twice_the_degree() {
        // the composition of cellwise L2 projection and the symmetric
        // filter reproduces polynomials up to degree 2d (and 2d+1, by the
        // kernel's symmetry) even though the projection alone cannot
        for d in [1usize, 2] {
            let mesh = unit_mesh(8);
            let filter = SymmetricFilter::new(d);
            let x = r(39, 80);
            for deg in 0..=(2 * d + 1) {
                let p = RatPoly::monomial(rat(1), deg);
                let coeffs = l2_project_poly_exact(&p, &mesh, d);
                let field = bernstein_field_pieces(&coeffs, &mesh, d);
                let got = filter.eval_exact(&field, &mesh, &x).unwrap();
                assert_eq!(got, p.eval(&x), "d={d} deg={deg}");
            }
        }
    }

    #[test]
    fn skipped_index_filter_works_through_the_factored_path() {
        // degree-one kernel on knots 0..=6 keeping B-splines {0, 3, 4}:
        // an asymmetric index set, so the column reversal inside Q is
        // exercised beyond the catalog's near-symmetric patterns
        use crate::kernel::{FilterSpec, kernel_monomial_convolution, kernel_coefficients};
        let spec = FilterSpec::new(
            FilterName::Rs,
            1,
            vec![0, 3, 4],
            crate::spline::KnotVector::from_i64(&[0, 1, 2, 3, 4, 5, 6]),
            Side::Left,
        )
        .unwrap();
        assert_eq!(spec.repro_degree(), 2);
        let system = kernel_coefficients(&spec).unwrap();
        for delta in 0..=2 {
            assert_eq!(
                kernel_monomial_convolution(&spec, &system.coefficients, delta),
                RatPoly::monomial(rat(1), delta),
                "delta {delta}"
            );
        }
        // factored evaluation equals the direct convolution oracle
        let mesh = unit_mesh(10);
        let coeffs = pseudo_random_coeffs(20);
        let field = bernstein_field_pieces(&coeffs, &mesh, 1);
        let conv = boundary_convolution(&spec, &mesh, 1).unwrap();
        for x in [rat(0), r(1, 10), r(17, 100)] {
            let fast = conv.eval_exact(&coeffs, &x).unwrap();
            let direct = direct_convolution_exact(&spec, &mesh, &field, &x).unwrap();
            assert_eq!(fast, direct, "x = {x}");
        }
        // and its mirror covers the right boundary
        let mirrored = spec.mirrored();
        assert_eq!(mirrored.index_set(), &[0, 1, 4]);
        let conv = boundary_convolution(&mirrored, &mesh, 1).unwrap();
        for x in [rat(1), r(9, 10), r(83, 100)] {
            let fast = conv.eval_exact(&coeffs, &x).unwrap();
            let direct = direct_convolution_exact(&mirrored, &mesh, &field, &x).unwrap();
            assert_eq!(fast, direct, "x = {x}");
        }
    }

    #[test]
    fn symmetric_filter_reproduces_constants_and_linears() {
        let mesh = unit_mesh(10);
        let filter = SymmetricFilter::new(1);
        // u = c
        let ones = vec![r(5, 2); 20];
        let field = bernstein_field_pieces(&ones, &mesh, 1);
        let v = filter.eval_exact(&field, &mesh, &r(1, 2)).unwrap();
        assert_eq!(v, r(5, 2));
        // u = projection of x reproduces x at interior points
        let p = RatPoly::x();
        let coeffs = l2_project_poly_exact(&p, &mesh, 1);
        let field = bernstein_field_pieces(&coeffs, &mesh, 1);
        for x in [r(1, 2), r(3, 10), r(7, 10)] {
            assert_eq!(filter.eval_exact(&field, &mesh, &x).unwrap(), x);
        }
        // outside the interior strip
        assert!(filter.eval_exact(&field, &mesh, &r(1, 10)).is_err());
    }

    #[test]
    fn interior_sampler_matches_exact_convolution() {
        let mesh = unit_mesh(8);
        let d = 2usize;
        let coeffs = pseudo_random_coeffs(mesh.n_cells() * (d + 1));
        let u = DgField::new(
            mesh.clone(),
            d,
            coeffs.iter().map(Rational::to_f64).collect(),
            0.0,
        );
        let filter = SymmetricFilter::new(d);
        let offsets = [rat(0), r(1, 4), r(1, 2)];
        let sampler = InteriorSampler::new(&filter, d, &offsets);
        let exact_coeffs = u.exact_coeffs();
        let field = bernstein_field_pieces(&exact_coeffs, &mesh, d);
        for cell in 4..=4usize {
            for (qi, q) in offsets.iter().enumerate() {
                let x = (rat(cell as i64) + q) * mesh.h();
                let want = filter.eval_exact(&field, &mesh, &x).unwrap().to_f64();
                let got = sampler.eval(&u, cell, qi);
                assert!((want - got).abs() < 1e-12, "cell {cell} q {q}");
            }
        }
    }

    #[test]
    fn filtered_field_regions_and_seams() {
        let mesh = unit_mesh(12);
        let d = 1usize;
        let u = crate::dg::l2_project(|x| x * x, &mesh, d);
        let left = filter_catalog(FilterName::Rlkv, d, Side::Left).unwrap();
        let right = filter_catalog(FilterName::Rlkv, d, Side::Right).unwrap();
        let ff = filter_field(&u, &left, &right, 4).unwrap();
        // mu = 2, so cells 0 and 1 are left boundary, 10 and 11 right
        assert_eq!(ff.region_of(0, 0), Region::LeftBoundary);
        assert_eq!(ff.region_of(1, 3), Region::LeftBoundary);
        assert_eq!(ff.region_of(2, 0), Region::Interior);
        assert_eq!(ff.region_of(9, 3), Region::Interior);
        assert_eq!(ff.region_of(10, 1), Region::RightBoundary);
        let vals = ff.sample_grid();
        assert_eq!(vals.len(), 12 * 4 + 1);
        assert!(vals.iter().all(|v| v.is_finite()));
        let seams = ff.seam_values();
        assert_eq!(seams[0].0, r(1, 6));
        assert_eq!(seams[1].0, r(5, 6));
        // no continuity is asserted, but for smooth data the values are close
        for (x, bv, iv) in seams {
            assert!((bv - iv).abs() < 1e-2, "seam {x}: {bv} vs {iv}");
        }
        let json = ff.to_json();
        assert_eq!(json.seams.len(), 2);
        assert!(!json.interior_samples.is_empty());
        assert!(serde_json::to_string(&json).is_ok());
    }

    #[test]
    fn boundary_poly_is_single_polynomial_across_region() {
        // (r+1)-th divided difference over r+2 points annihilates it.
        let mesh = unit_mesh(10);
        let d = 1usize;
        let coeffs = pseudo_random_coeffs(20);
        let spec = filter_catalog(FilterName::Multiknot, d, Side::Left).unwrap();
        let conv = boundary_convolution(&spec, &mesh, d).unwrap();
        let poly = conv.contract_exact(&coeffs);
        let r_deg = spec.repro_degree();
        let points: Vec<Rational> = (0..=r_deg as i64 + 1)
            .map(|i| Rational::ratio(i, 10 * (r_deg as i64 + 2)))
            .collect();
        let dd = crate::spline::divided_difference(&points, &mut |i, nu| {
            assert_eq!(nu, 0, "points are distinct");
            poly.eval_poly(&points[i])
        });
        assert_eq!(dd, rat(0));
    }
}
