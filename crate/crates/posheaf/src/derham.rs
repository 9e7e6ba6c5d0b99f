//! Floating-point verification layer: grid models of rapidly decaying
//! functions on families of intervals, the fiberwise derivative, fiber
//! integration, the explicit integration homotopy, vertical convex hulls of
//! sections, and a numeric Betti cross-check against the combinatorial side.
//!
//! The geometry is a rectangle of grid nodes over a base (an interval or a
//! single point) with a symmetric fiber window `[-L, L]`, together with a
//! boolean mask selecting an open subset whose fiber slices are unions of
//! runs. Functions live on masked nodes only and must be numerically flat at
//! the ends of every run: that is the grid stand-in for rapid decay at
//! infinity and flatness at the boundary of the open set. All thresholds are
//! named constants; reports quote them rather than treating them as exact.
//!
//! Everything fiberwise is row-parallel under the `parallel` feature and
//! falls back to a sequential loop without it; results are identical because
//! rows never interact.

use std::sync::Arc;

use crate::{Error, Result};

/// Grid stand-in for rapid decay: functions may not exceed this at the first
/// and last node of any mask run.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// How close the fiber integral must be to zero before the integration
/// homotopy accepts its input.
pub const KERNEL_TOL: f64 = 1e-8;
/// Relative singular-value threshold for numeric rank decisions.
pub const SVD_TOL: f64 = 1e-8;

pub const DEFAULT_WINDOW: f64 = 10.0;
/// Fiber step 5e-3 over `[-10, 10]`.
pub const DEFAULT_FIBER_NODES: usize = 4001;
/// Base step 1e-2 over a unit base interval.
pub const DEFAULT_BASE_NODES: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridBase {
    Point,
    Interval { a: f64, b: f64 },
}

/// A masked grid over `base x [-window, window]`. Row `i` is a base node,
/// column `j` a fiber node; the mask marks the nodes of an open subset, so
/// every fiber slice is a union of runs of consecutive nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRegion {
    base: GridBase,
    base_nodes: usize,
    window: f64,
    fiber_nodes: usize,
    mask: Vec<bool>,
}

impl GridRegion {
    pub fn new(
        base: GridBase,
        base_nodes: usize,
        window: f64,
        fiber_nodes: usize,
        mask: Vec<bool>,
    ) -> Result<Self> {
        match base {
            GridBase::Point => {
                if base_nodes != 1 {
                    return Err(Error::invalid("a point base has exactly one node"));
                }
            }
            GridBase::Interval { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::invalid("base interval must be finite and nondegenerate"));
                }
                if base_nodes < 2 {
                    return Err(Error::invalid("an interval base needs at least two nodes"));
                }
            }
        }
        if !(window > 0.0) || !window.is_finite() {
            return Err(Error::invalid("fiber window must be positive"));
        }
        if fiber_nodes < 2 {
            return Err(Error::invalid("the fiber needs at least two nodes"));
        }
        if mask.len() != base_nodes * fiber_nodes {
            return Err(Error::invalid(format!(
                "mask has {} entries for a {}x{} grid",
                mask.len(),
                base_nodes,
                fiber_nodes
            )));
        }
        Ok(GridRegion { base, base_nodes, window, fiber_nodes, mask })
    }

    pub fn from_predicate(
        base: GridBase,
        base_nodes: usize,
        window: f64,
        fiber_nodes: usize,
        pred: impl Fn(f64, f64) -> bool,
    ) -> Result<Self> {
        let mut region = GridRegion::new(
            base,
            base_nodes,
            window,
            fiber_nodes,
            vec![false; base_nodes * fiber_nodes],
        )?;
        for i in 0..base_nodes {
            for j in 0..fiber_nodes {
                region.mask[i * fiber_nodes + j] = pred(region.y(i), region.t(j));
            }
        }
        Ok(region)
    }

    /// Full-line model over a point: every node masked.
    pub fn full_line(window: f64, fiber_nodes: usize) -> Self {
        GridRegion::new(
            GridBase::Point,
            1,
            window,
            fiber_nodes,
            vec![true; fiber_nodes],
        )
        .expect("full point-base region is valid")
    }

    pub fn base(&self) -> GridBase {
        self.base
    }

    pub fn rows(&self) -> usize {
        self.base_nodes
    }

    pub fn cols(&self) -> usize {
        self.fiber_nodes
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn fiber_step(&self) -> f64 {
        2.0 * self.window / (self.fiber_nodes - 1) as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        match self.base {
            GridBase::Point => 0.0,
            GridBase::Interval { a, b } => {
                a + (b - a) * i as f64 / (self.base_nodes - 1) as f64
            }
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        -self.window + self.fiber_step() * j as f64
    }

    pub fn masked(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.fiber_nodes + j]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn node_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Maximal runs of masked nodes in row `i`, as inclusive `(start, end)`
    /// column pairs.
    pub fn runs(&self, i: usize) -> Vec<(usize, usize)> {
        let row = &self.mask[i * self.fiber_nodes..(i + 1) * self.fiber_nodes];
        let mut out = Vec::new();
        let mut j = 0;
        while j < row.len() {
            if row[j] {
                let start = j;
                while j + 1 < row.len() && row[j + 1] {
                    j += 1;
                }
                out.push((start, j));
            }
            j += 1;
        }
        out
    }

    /// The point-base region over base node `i`, keeping its fiber mask.
    pub fn slice(&self, i: usize) -> GridRegion {
        let row = self.mask[i * self.fiber_nodes..(i + 1) * self.fiber_nodes].to_vec();
        GridRegion::new(GridBase::Point, 1, self.window, self.fiber_nodes, row)
            .expect("a row of a valid region is a valid region")
    }
}

#[cfg(feature = "parallel")]
fn rowwise<T: Send>(rows: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..rows).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn rowwise<T: Send>(rows: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..rows).map(f).collect()
}

/// Values on the masked nodes of a region, identically zero elsewhere, flat
/// at run ends up to [`BOUNDARY_TOL`]. A constant on a mask bounded away from
/// the window fails that check; a Gaussian on the full window passes it.
#[derive(Clone, Debug)]
pub struct GridFunction {
    region: Arc<GridRegion>,
    values: Vec<f64>,
}

fn check_decay(region: &GridRegion, values: &[f64]) -> Result<()> {
    for i in 0..region.rows() {
        for (s, e) in region.runs(i) {
            for j in [s, e] {
                let v = values[i * region.cols() + j];
                if v.abs() > BOUNDARY_TOL {
                    return Err(Error::invalid(format!(
                        "decay proxy fails at row {i}, column {j}: |{v:e}| > {BOUNDARY_TOL:e}"
                    )));
                }
            }
        }
    }
    Ok(())
}

impl GridFunction {
    /// Off-mask entries are zeroed; run-end entries must already satisfy the
    /// decay proxy.
    pub fn new(region: Arc<GridRegion>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != region.rows() * region.cols() {
            return Err(Error::invalid("value array does not match the grid"));
        }
        for (v, &m) in values.iter_mut().zip(region.mask()) {
            if !m {
                *v = 0.0;
            }
        }
        check_decay(&region, &values)?;
        Ok(GridFunction { region, values })
    }

    pub fn from_fn(region: Arc<GridRegion>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..region.rows() * region.cols())
            .map(|idx| {
                let (i, j) = (idx / region.cols(), idx % region.cols());
                if region.masked(i, j) {
                    f(region.y(i), region.t(j))
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(region, values)
    }

    pub fn zero(region: Arc<GridRegion>) -> Self {
        let n = region.rows() * region.cols();
        GridFunction { region, values: vec![0.0; n] }
    }

    /// Masked values produced by our own operators; skips the decay check
    /// (a derivative or homotopy of flat data stays small at run ends, but
    /// the homotopy's upper-end residue is only bounded by [`KERNEL_TOL`]).
    fn raw(region: Arc<GridRegion>, values: Vec<f64>) -> Self {
        GridFunction { region, values }
    }

    pub fn region(&self) -> &Arc<GridRegion> {
        &self.region
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.region.cols() + j]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest masked-node difference against a reference function.
    pub fn sup_distance(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let r = &self.region;
        let mut worst: f64 = 0.0;
        for i in 0..r.rows() {
            for j in 0..r.cols() {
                if r.masked(i, j) {
                    worst = worst.max((self.at(i, j) - f(r.y(i), r.t(j))).abs());
                }
            }
        }
        worst
    }
}

/// Values on the base nodes alone, remembering the region they came from.
#[derive(Clone, Debug)]
pub struct BaseFunction {
    region: Arc<GridRegion>,
    values: Vec<f64>,
}

impl BaseFunction {
    pub fn new(region: Arc<GridRegion>, values: Vec<f64>) -> Result<Self> {
        if values.len() != region.rows() {
            return Err(Error::invalid("base value array does not match the base grid"));
        }
        Ok(BaseFunction { region, values })
    }

    pub fn region(&self) -> &Arc<GridRegion> {
        &self.region
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Derivative stencil along one run of `row`, written into `out`.
///
/// Fourth-order central differences on deep interior nodes, second-order
/// central next to the run ends, one-sided at the ends themselves. A
/// length-one run has derivative zero.
fn differentiate_run(row: &[f64], (s, e): (usize, usize), h: f64, out: &mut [f64]) {
    if s == e {
        out[s] = 0.0;
        return;
    }
    out[s] = (row[s + 1] - row[s]) / h;
    out[e] = (row[e] - row[e - 1]) / h;
    for j in s + 1..e {
        if j >= s + 2 && j + 2 <= e {
            out[j] = (row[j - 2] - 8.0 * row[j - 1] + 8.0 * row[j + 1] - row[j + 2]) / (12.0 * h);
        } else {
            out[j] = (row[j + 1] - row[j - 1]) / (2.0 * h);
        }
    }
}

/// Fiberwise derivative: stencils act within each mask run and never cross
/// gaps; output is masked like the input.
pub fn fiber_derivative(f: &GridFunction) -> GridFunction {
    let region = f.region().clone();
    let cols = region.cols();
    let h = region.fiber_step();
    let rows = rowwise(region.rows(), |i| {
        let row = &f.values()[i * cols..(i + 1) * cols];
        let mut out = vec![0.0; cols];
        for run in region.runs(i) {
            differentiate_run(row, run, h, &mut out);
        }
        out
    });
    GridFunction::raw(region, rows.concat())
}

fn trapezoid_run(row: &[f64], (s, e): (usize, usize), h: f64) -> f64 {
    if s == e {
        return 0.0;
    }
    let interior: f64 = row[s + 1..e].iter().sum();
    h * (interior + 0.5 * (row[s] + row[e]))
}

/// Integrate along each fiber: trapezoid quadrature over every mask run,
/// summed, one number per base node.
pub fn fiber_integrate(f: &GridFunction) -> BaseFunction {
    let region = f.region().clone();
    let cols = region.cols();
    let h = region.fiber_step();
    let values = rowwise(region.rows(), |i| {
        let row = &f.values()[i * cols..(i + 1) * cols];
        region.runs(i).into_iter().map(|run| trapezoid_run(row, run, h)).sum()
    });
    BaseFunction { region, values }
}

/// Cumulative trapezoid from the lower end of each mask run: the explicit
/// homotopy `H(f)(y, t) = integral of f over the fiber up to t`. Requires the
/// fiber integral of `f` to vanish within [`KERNEL_TOL`] on every fiber; the
/// residue of that integral is exactly the value left at the upper run end,
/// so the output is flat there only up to the same tolerance.
pub fn poincare_homotopy(f: &GridFunction) -> Result<GridFunction> {
    let totals = fiber_integrate(f);
    for (i, v) in totals.values().iter().enumerate() {
        if v.abs() > KERNEL_TOL {
            return Err(Error::invalid(format!(
                "homotopy needs a fiber integral below {KERNEL_TOL:e}; row {i} integrates to {v:e}"
            )));
        }
    }
    let region = f.region().clone();
    let cols = region.cols();
    let h = region.fiber_step();
    let rows = rowwise(region.rows(), |i| {
        let row = &f.values()[i * cols..(i + 1) * cols];
        let mut out = vec![0.0; cols];
        for (s, e) in region.runs(i) {
            let mut acc = 0.0;
            out[s] = 0.0;
            for j in s + 1..=e {
                acc += 0.5 * h * (row[j - 1] + row[j]);
                out[j] = acc;
            }
        }
        out
    });
    Ok(GridFunction::raw(region, rows.concat()))
}

/// The fixed unit-integral bump profile used by [`integration_section`]:
/// `exp(-1/(1-s^2))` on `(-1, 1)`, zero outside, before normalization.
fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Spread a base function over the fibers with a fixed bump profile of unit
/// quadrature mass, so that [`fiber_integrate`] recovers the input exactly up
/// to rounding. The profile sits on the longest mask run of each fiber; a
/// base node carrying a nonzero value must have a run of at least two nodes.
pub fn integration_section(g: &BaseFunction) -> Result<GridFunction> {
    let region = g.region().clone();
    let cols = region.cols();
    let h = region.fiber_step();
    let rows: Vec<Result<Vec<f64>>> = rowwise(region.rows(), |i| {
        let mut out = vec![0.0; cols];
        let gv = g.values()[i];
        if gv == 0.0 {
            return Ok(out);
        }
        let run = region
            .runs(i)
            .into_iter()
            .max_by_key(|&(s, e)| e - s)
            .filter(|&(s, e)| e > s)
            .ok_or_else(|| {
                Error::invalid(format!("base node {i} carries a value but has no fiber to hold it"))
            })?;
        let (s, e) = run;
        let (lo, hi) = (region.t(s), region.t(e));
        for j in s..=e {
            let u = (2.0 * region.t(j) - lo - hi) / (hi - lo);
            out[j] = bump(u);
        }
        let mass = trapezoid_run(&out, run, h);
        if mass <= 0.0 {
            return Err(Error::invalid(format!("degenerate bump mass on base node {i}")));
        }
        for v in &mut out[s..=e] {
            *v *= gv / mass;
        }
        Ok(out)
    });
    let mut values = Vec::with_capacity(region.rows() * cols);
    for row in rows {
        values.extend(row?);
    }
    Ok(GridFunction::raw(region, values))
}

/// Nodes whose vertical segment up (or down) to the section stays inside `u`:
/// the mask of `{(y, a) : {y} x [a, nu(y)] inside U}`, checked on the grid
/// nodes between `a` and `nu(y)`. The section must run inside `u` (its
/// nearest grid node on each fiber is masked) and inside the window.
pub fn convex_hull_of_section(u: &GridRegion, nu: &[f64]) -> Result<GridRegion> {
    if nu.len() != u.rows() {
        return Err(Error::invalid("section needs one value per base node"));
    }
    let h = u.fiber_step();
    let col_of = |t: f64| -> f64 { (t + u.window()) / h };
    for (i, &a) in nu.iter().enumerate() {
        if a.abs() > u.window() {
            return Err(Error::invalid(format!("section leaves the window at base node {i}")));
        }
        let nearest = col_of(a).round() as usize;
        if !u.masked(i, nearest.min(u.cols() - 1)) {
            return Err(Error::invalid(format!("section leaves the region at base node {i}")));
        }
    }
    let mut mask = vec![false; u.rows() * u.cols()];
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            let (lo, hi) = (u.t(j).min(nu[i]), u.t(j).max(nu[i]));
            // Nodes with lo <= t <= hi; the half-step slack keeps rounding
            // from dropping an endpoint node.
            let first = (col_of(lo) - 0.25).ceil().max(0.0) as usize;
            let last = ((col_of(hi) + 0.25).floor() as usize).min(u.cols() - 1);
            mask[i * u.cols() + j] = (first..=last).all(|k| u.masked(i, k));
        }
    }
    let out = GridRegion::new(u.base(), u.rows(), u.window(), u.cols(), mask)?;
    for (i, &a) in nu.iter().enumerate() {
        let nearest = (col_of(a).round() as usize).min(u.cols() - 1);
        debug_assert!(out.masked(i, nearest), "section node fell outside its own hull");
    }
    Ok(out)
}

/// Singular values by one-sided Jacobi: rotate column pairs until mutually
/// orthogonal, then read off the column norms. Descending order.
fn singular_values(mut cols: Vec<Vec<f64>>) -> Vec<f64> {
    let n = cols.len();
    let tol = 1e-14;
    for _ in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let mut aa = 0.0;
                let mut bb = 0.0;
                let mut ab = 0.0;
                for k in 0..cols[i].len() {
                    aa += cols[i][k] * cols[i][k];
                    bb += cols[j][k] * cols[j][k];
                    ab += cols[i][k] * cols[j][k];
                }
                if ab.abs() <= tol * (aa * bb).sqrt() || ab == 0.0 {
                    continue;
                }
                let zeta = (bb - aa) / (2.0 * ab);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..cols[i].len() {
                    let (x, y) = (cols[i][k], cols[j][k]);
                    cols[i][k] = c * x - s * y;
                    cols[j][k] = s * x + c * y;
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> =
        cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sigma
}

/// Numeric corank of the fiber derivative on the masked nodes of a point-base
/// region: assemble the stencil matrix over the masked nodes, symmetrize by
/// the trapezoid quadrature weights, and count singular values at or below
/// [`SVD_TOL`] relative to the largest. Expected to equal the number of mask
/// runs, which is the zeroth Betti number of the fiber.
pub fn betti_crosscheck(region: &GridRegion) -> Result<usize> {
    if region.base() != GridBase::Point {
        return Err(Error::invalid("betti cross-check runs over a point base"));
    }
    let h = region.fiber_step();
    let nodes: Vec<usize> = (0..region.cols()).filter(|&j| region.masked(0, j)).collect();
    let n = nodes.len();
    if n == 0 {
        return Ok(0);
    }
    let index_of = |j: usize| nodes.binary_search(&j).expect("masked node");
    let mut rows = vec![vec![0.0; n]; n];
    let mut weights = vec![h; n];
    for (s, e) in region.runs(0) {
        weights[index_of(s)] = 0.5 * h;
        weights[index_of(e)] = 0.5 * h;
        // Column k of the derivative matrix is the stencil applied to the
        // k-th basis vector of the run.
        let mut basis = vec![0.0; region.cols()];
        let mut out = vec![0.0; region.cols()];
        for k in s..=e {
            basis[k] = 1.0;
            differentiate_run(&basis, (s, e), h, &mut out);
            for j in s..=e {
                rows[index_of(j)][index_of(k)] = out[j];
            }
            basis[k] = 0.0;
        }
    }
    for r in 0..n {
        for c in 0..n {
            rows[r][c] *= (weights[r] / weights[c]).sqrt();
        }
    }
    let sigma = singular_values(rows);
    let top = sigma.first().copied().unwrap_or(0.0).max(1.0);
    Ok(sigma.iter().filter(|&&s| s <= SVD_TOL * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.7724538509055159;

    fn line(window: f64, n: usize) -> Arc<GridRegion> {
        Arc::new(GridRegion::full_line(window, n))
    }

    fn default_line() -> Arc<GridRegion> {
        line(DEFAULT_WINDOW, DEFAULT_FIBER_NODES)
    }

    fn fine_line() -> Arc<GridRegion> {
        line(DEFAULT_WINDOW, 10001)
    }

    #[test]
    fn derivative_of_a_gaussian_is_accurate() {
        let f =
            GridFunction::from_fn(default_line(), |_, t| (-t * t).exp()).unwrap();
        let d = fiber_derivative(&f);
        let err = d.sup_distance(|_, t| -2.0 * t * (-t * t).exp());
        assert!(err <= 1e-6, "derivative error {err:e}");
    }

    #[test]
    fn derivative_of_zero_is_zero() {
        let z = GridFunction::zero(default_line());
        assert_eq!(fiber_derivative(&z).sup_norm(), 0.0);
    }

    #[test]
    fn gaussian_integrates_to_sqrt_pi() {
        let f =
            GridFunction::from_fn(default_line(), |_, t| (-t * t).exp()).unwrap();
        let total = fiber_integrate(&f).values()[0];
        assert!((total - SQRT_PI).abs() <= 1e-8, "integral {total}");
    }

    #[test]
    fn integral_of_a_derivative_vanishes() {
        let g =
            GridFunction::from_fn(default_line(), |_, t| (-t * t).exp()).unwrap();
        let total = fiber_integrate(&fiber_derivative(&g)).values()[0];
        assert!(total.abs() <= 1e-8, "Stokes residue {total:e}");
    }

    #[test]
    fn homotopy_recovers_the_closed_form_antiderivative() {
        let f =
            GridFunction::from_fn(fine_line(), |_, t| t * (-t * t).exp()).unwrap();
        let h = poincare_homotopy(&f).unwrap();
        let err = h.sup_distance(|_, t| -0.5 * (-t * t).exp());
        assert!(err <= 1e-6, "homotopy error {err:e}");
    }

    #[test]
    fn homotopy_then_derivative_is_the_identity_on_the_kernel() {
        let f = GridFunction::from_fn(default_line(), |_, t| {
            0.1 * t * (-t * t / 2.0).exp()
        })
        .unwrap();
        let back = fiber_derivative(&poincare_homotopy(&f).unwrap());
        let mut worst: f64 = 0.0;
        for (a, b) in back.values().iter().zip(f.values()) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst <= 1e-6, "identity error {worst:e}");
    }

    #[test]
    fn derivative_then_homotopy_recovers_flat_functions() {
        let g =
            GridFunction::from_fn(fine_line(), |_, t| (-t * t).exp()).unwrap();
        let h = poincare_homotopy(&fiber_derivative(&g)).unwrap();
        let err = h.sup_distance(|_, t| (-t * t).exp());
        assert!(err <= 1e-6, "Newton-Leibniz error {err:e}");
    }

    #[test]
    fn homotopy_rejects_inputs_with_nonzero_fiber_integral() {
        let f =
            GridFunction::from_fn(default_line(), |_, t| (-t * t).exp()).unwrap();
        assert!(poincare_homotopy(&f).is_err());
    }

    #[test]
    fn constants_on_bounded_masks_fail_the_decay_proxy() {
        let region = Arc::new(
            GridRegion::from_predicate(GridBase::Point, 1, 2.0, 129, |_, t| t.abs() < 1.0)
                .unwrap(),
        );
        let err = GridFunction::from_fn(region, |_, _| 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn section_roundtrips_through_fiber_integration() {
        let region = Arc::new(
            GridRegion::from_predicate(GridBase::Point, 1, 2.0, 513, |_, t| t.abs() < 1.0)
                .unwrap(),
        );
        let g = BaseFunction::new(region.clone(), vec![1.0]).unwrap();
        let spread = integration_section(&g).unwrap();
        let back = fiber_integrate(&spread).values()[0];
        assert!((back - 1.0).abs() <= 1e-8, "section integral {back}");

        let base = Arc::new(
            GridRegion::from_predicate(
                GridBase::Interval { a: -1.0, b: 1.0 },
                5,
                2.0,
                257,
                |_, t| t.abs() < 1.5,
            )
            .unwrap(),
        );
        let g = BaseFunction::new(base.clone(), vec![0.0, 0.5, -1.0, 2.0, 0.25]).unwrap();
        let spread = integration_section(&g).unwrap();
        let back = fiber_integrate(&spread);
        for (a, b) in back.values().iter().zip(g.values()) {
            assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn section_needs_a_fiber_under_its_support() {
        let region = Arc::new(
            GridRegion::from_predicate(GridBase::Point, 1, 2.0, 129, |_, _| false).unwrap(),
        );
        let g = BaseFunction::new(region, vec![1.0]).unwrap();
        assert!(integration_section(&g).is_err());
    }

    /// 129 nodes over [-2, 2] puts nodes exactly on t = 0 and t = +/-1.
    fn splitting_region() -> GridRegion {
        GridRegion::from_predicate(
            GridBase::Interval { a: -1.0, b: 1.0 },
            5,
            2.0,
            129,
            |y, t| t.abs() < 1.0 && !(y > 0.0 && t == 0.0),
        )
        .unwrap()
    }

    #[test]
    fn convex_hull_cuts_below_the_puncture() {
        let u = GridRegion::from_predicate(
            GridBase::Interval { a: -1.0, b: 1.0 },
            5,
            2.0,
            129,
            |y, t| !(y > 0.0 && t == 0.0),
        )
        .unwrap();
        let hull = convex_hull_of_section(&u, &[1.0; 5]).unwrap();
        // Rows 0..=2 sit at y <= 0: everything survives.
        for i in 0..3 {
            assert_eq!(hull.runs(i), vec![(0, 128)]);
        }
        // Rows at y > 0: only nodes strictly above the puncture at t = 0.
        for i in 3..5 {
            assert_eq!(hull.runs(i), vec![(65, 128)]);
        }
    }

    #[test]
    fn convex_hull_of_a_vertically_convex_region_is_the_region() {
        let u = GridRegion::from_predicate(GridBase::Point, 1, 2.0, 129, |_, t| t.abs() < 1.5)
            .unwrap();
        let hull = convex_hull_of_section(&u, &[0.0]).unwrap();
        assert_eq!(hull.mask(), u.mask());
    }

    #[test]
    fn convex_hull_rejects_sections_outside_the_region() {
        let u = GridRegion::from_predicate(GridBase::Point, 1, 2.0, 129, |_, t| t.abs() < 1.0)
            .unwrap();
        assert!(convex_hull_of_section(&u, &[1.5]).is_err());
    }

    #[test]
    fn corank_counts_fiber_components() {
        let one = GridRegion::from_predicate(GridBase::Point, 1, 2.0, 129, |_, t| t.abs() < 1.0)
            .unwrap();
        assert_eq!(betti_crosscheck(&one).unwrap(), 1);

        let two = GridRegion::from_predicate(GridBase::Point, 1, 2.0, 129, |_, t| {
            (t + 1.25).abs() < 0.5 || (t - 1.25).abs() < 0.5
        })
        .unwrap();
        assert_eq!(betti_crosscheck(&two).unwrap(), 2);

        let empty =
            GridRegion::from_predicate(GridBase::Point, 1, 2.0, 129, |_, _| false).unwrap();
        assert_eq!(betti_crosscheck(&empty).unwrap(), 0);
    }

    #[test]
    fn corank_tracks_the_fiber_splitting_family() {
        let region = splitting_region();
        for i in 0..region.rows() {
            let expected = if region.y(i) > 0.0 { 2 } else { 1 };
            assert_eq!(
                betti_crosscheck(&region.slice(i)).unwrap(),
                expected,
                "row {i} at y = {}",
                region.y(i)
            );
        }
    }

    #[test]
    fn betti_crosscheck_requires_a_point_base() {
        assert!(betti_crosscheck(&splitting_region()).is_err());
    }
}
