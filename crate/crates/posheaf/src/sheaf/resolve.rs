//! Pseudo-free resolutions: complexes built from star indicator sheaves
//! `ℝ_{p⋆}`, presented by generator lists and matrices over them.
//!
//! A module (single-degree representation) is resolved by iterated minimal
//! projective covers: at each element the radical, the span of everything
//! arriving from strictly below, is completed to a full basis by standard
//! basis vectors in echelon position. A complex is resolved by peeling its
//! top degree: the complex is the cone of its top differential against the
//! rest, both pieces are resolved, and the connecting map is lifted through
//! the augmentation, which stays degreewise surjective throughout.

use super::{DegreeMaps, PosetRep, RepMap};
use crate::chain::BddChainComplex;
use crate::linalg::{rat, RatMatrix};
use crate::poset::{FinPoset, MonotoneMap};
use crate::{Error, Result};
use num::Zero;
use std::collections::BTreeMap;

/// A complex of pseudo-free sheaves. `terms[i]` lists the generators in
/// degree `lo + i` by the poset element carrying them; `diffs[i]` is the
/// matrix of the differential `terms[i+1] → terms[i]` over the generators.
/// An entry at `(a, b)` may be nonzero only when `elem(a) ≤ elem(b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoFreeComplex {
    base: FinPoset,
    lo: i64,
    terms: Vec<Vec<usize>>,
    diffs: Vec<RatMatrix>,
}

impl PseudoFreeComplex {
    pub fn new(
        base: FinPoset,
        lo: i64,
        terms: Vec<Vec<usize>>,
        diffs: Vec<RatMatrix>,
    ) -> Result<Self> {
        if diffs.len() != terms.len().saturating_sub(1) {
            return Err(Error::invalid(format!(
                "{} generator degrees need {} differentials, got {}",
                terms.len(),
                terms.len().saturating_sub(1),
                diffs.len()
            )));
        }
        for t in &terms {
            if t.iter().any(|&e| e >= base.len()) {
                return Err(Error::invalid("generator attached to an unknown element"));
            }
        }
        for (i, d) in diffs.iter().enumerate() {
            if (d.rows(), d.cols()) != (terms[i].len(), terms[i + 1].len()) {
                return Err(Error::invalid(format!(
                    "differential into degree {} must be {}x{}, got {}x{}",
                    lo + i as i64,
                    terms[i].len(),
                    terms[i + 1].len(),
                    d.rows(),
                    d.cols()
                )));
            }
            for r in 0..d.rows() {
                for c in 0..d.cols() {
                    if !d[(r, c)].is_zero() && !base.leq(terms[i][r], terms[i + 1][c]) {
                        return Err(Error::invalid(format!(
                            "differential into degree {} links generator {} below {}: \
                             support condition violated",
                            lo + i as i64,
                            base.label(terms[i][r]),
                            base.label(terms[i + 1][c])
                        )));
                    }
                }
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            if !diffs[i].matmul(&diffs[i + 1]).is_zero() {
                return Err(Error::invalid(format!(
                    "d∘d ≠ 0 between generator degrees {} and {}",
                    lo + i as i64 + 2,
                    lo + i as i64
                )));
            }
        }
        Ok(PseudoFreeComplex { base, lo, terms, diffs })
    }

    pub fn base(&self) -> &FinPoset {
        &self.base
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn terms(&self) -> &[Vec<usize>] {
        &self.terms
    }

    pub fn diff(&self, i: usize) -> &RatMatrix {
        &self.diffs[i]
    }

    pub fn total_generators(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_generators() == 0
    }

    /// Generators in degree `lo + i` at or below `p`, as positions into
    /// `terms[i]`. These index the stalk coordinates of the realization.
    fn visible(&self, i: usize, p: usize) -> Vec<usize> {
        self.terms[i]
            .iter()
            .enumerate()
            .filter(|&(_, &e)| self.base.leq(e, p))
            .map(|(j, _)| j)
            .collect()
    }

    /// Rename the base along a monotone map; generator matrices are kept,
    /// and the support condition transports along monotonicity.
    pub fn relabel(&self, f: &MonotoneMap) -> Result<Self> {
        if f.source() != &self.base {
            return Err(Error::invalid("relabeling map starts from a different poset"));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| t.iter().map(|&e| f.apply(e)).collect())
            .collect();
        Self::new(f.target().clone(), self.lo, terms, self.diffs.clone())
    }
}

/// Generator list of `q` in absolute degree `n` (empty outside the range).
fn gens_at(q: &PseudoFreeComplex, n: i64) -> &[usize] {
    let i = n - q.lo;
    if i >= 0 && (i as usize) < q.terms.len() {
        &q.terms[i as usize]
    } else {
        &[]
    }
}

/// The differential of `q` leaving absolute degree `n`.
fn diff_leaving(q: &PseudoFreeComplex, n: i64) -> RatMatrix {
    let i = n - 1 - q.lo;
    if i >= 0 && (i as usize) + 1 < q.terms.len() {
        q.diffs[i as usize].clone()
    } else {
        RatMatrix::zeros(gens_at(q, n - 1).len(), gens_at(q, n).len())
    }
}

/// The representation a pseudo-free complex presents: the stalk at `p` is
/// spanned by the generators at or below `p`, differentials restrict, and
/// transitions are coordinate inclusions.
pub fn realize(c: &PseudoFreeComplex) -> PosetRep {
    let base = c.base.clone();
    let n = base.len();
    let width = c.terms.len();
    let mut stalks = Vec::with_capacity(n);
    let mut visible: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    for p in 0..n {
        let vis: Vec<Vec<usize>> = (0..width).map(|i| c.visible(i, p)).collect();
        let dims: Vec<usize> = vis.iter().map(Vec::len).collect();
        let diffs: Vec<RatMatrix> = (0..width.saturating_sub(1))
            .map(|i| c.diffs[i].select_rows(&vis[i]).select_cols(&vis[i + 1]))
            .collect();
        stalks.push(
            BddChainComplex::new(c.lo, dims, diffs)
                .expect("support condition keeps restricted squares zero"),
        );
        visible.push(vis);
    }
    let mut cover_maps = BTreeMap::new();
    for (p, q) in base.covers() {
        let mut per = DegreeMaps::new();
        for i in 0..width {
            let mut m = RatMatrix::zeros(visible[q][i].len(), visible[p][i].len());
            for (col, gen) in visible[p][i].iter().enumerate() {
                let row = visible[q][i]
                    .binary_search(gen)
                    .expect("generators below p stay below q ≥ p");
                m[(row, col)] = rat(1);
            }
            per.insert(c.lo + i as i64, m);
        }
        cover_maps.insert((p, q), per);
    }
    PosetRep::new(base, stalks, &cover_maps).expect("coordinate inclusions are functorial")
}

/// Which covers to take while resolving a module.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CoverStyle {
    /// Complete the radical at each element to a basis: minimal covers.
    Minimal,
    /// Take a full standard basis at every element regardless of the
    /// radical: a larger, bar-style resolution for cross-checking.
    Full,
}

/// Resolution of a representation concentrated in degree `deg`: iterated
/// covers by sums of star sheaves, recorded with the augmentation onto the
/// input. Aborts with an internal error if the kernel recursion outlives
/// `2·|P| + 2` layers, which no functorial input can reach.
fn resolve_module(
    m: &PosetRep,
    deg: i64,
    style: CoverStyle,
) -> Result<(PseudoFreeComplex, RepMap)> {
    let base = m.base().clone();
    let n = base.len();
    let cap = 2 * n + 2;

    // processing order: repeatedly the lowest-indexed element whose strict
    // predecessors are all placed (minimal elements first, index tiebreak)
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let next = (0..n)
            .find(|&p| !placed[p] && (0..n).all(|q| placed[q] || !base.lt(q, p)))
            .expect("finite posets admit a linear extension");
        placed[next] = true;
        order.push(next);
    }

    let mut terms: Vec<Vec<usize>> = Vec::new();
    let mut diffs: Vec<RatMatrix> = Vec::new();
    let mut eps_mats: Vec<RatMatrix> = Vec::new();
    // the module still to be covered; its stalk coordinates are the kernel
    // basis of the previous augmentation, recorded in `basis_in_prev`
    let mut layer = m.clone();
    let mut basis_in_prev: Vec<RatMatrix> = Vec::new();
    let mut steps = 0;
    while !layer.is_zero() {
        steps += 1;
        if steps > cap {
            return Err(Error::internal(format!(
                "module resolution did not terminate within {cap} layers"
            )));
        }

        // choose generators element by element
        let mut gens: Vec<(usize, RatMatrix)> = Vec::new();
        for &p in &order {
            let dim = layer.stalk(p).dim_at(deg);
            if dim == 0 {
                continue;
            }
            let mut radical = RatMatrix::zeros(dim, 0);
            if style == CoverStyle::Minimal {
                for q in 0..n {
                    if base.lt(q, p) {
                        radical = radical.hstack(&layer.transition_at(q, p, deg));
                    }
                }
            }
            // echelon completion: standard basis vectors whose pivots land
            // beyond the radical columns
            let (_, pivots) = radical.hstack(&RatMatrix::identity(dim)).rref();
            for &piv in &pivots {
                if piv >= radical.cols() {
                    let mut v = RatMatrix::zeros(dim, 1);
                    v[(piv - radical.cols(), 0)] = rat(1);
                    gens.push((p, v));
                }
            }
        }
        let elems: Vec<usize> = gens.iter().map(|&(e, _)| e).collect();
        let visible: Vec<Vec<usize>> = (0..n)
            .map(|p| {
                elems
                    .iter()
                    .enumerate()
                    .filter(|&(_, &e)| base.leq(e, p))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();

        // augmentation of the new free layer onto `layer`
        let eps: Vec<RatMatrix> = (0..n)
            .map(|p| {
                let dim = layer.stalk(p).dim_at(deg);
                let mut cols = RatMatrix::zeros(dim, 0);
                for (e, v) in &gens {
                    if base.leq(*e, p) {
                        cols = cols.hstack(&layer.transition_at(*e, p, deg).matmul(v));
                    }
                }
                cols
            })
            .collect();
        for p in 0..n {
            if eps[p].rank() != layer.stalk(p).dim_at(deg) {
                return Err(Error::internal(
                    "projective cover misses part of a stalk".to_string(),
                ));
            }
        }

        // wire the differential into the previous layer's generators
        if let Some(prev_elems) = terms.last() {
            let mut d = RatMatrix::zeros(prev_elems.len(), gens.len());
            for (col, (e, v)) in gens.iter().enumerate() {
                let expanded = basis_in_prev[*e].matmul(v);
                let prev_vis: Vec<usize> = prev_elems
                    .iter()
                    .enumerate()
                    .filter(|&(_, &pe)| base.leq(pe, *e))
                    .map(|(j, _)| j)
                    .collect();
                for (local, &row) in prev_vis.iter().enumerate() {
                    d[(row, col)] = expanded[(local, 0)].clone();
                }
            }
            diffs.push(d);
        } else {
            eps_mats = eps.clone();
        }
        terms.push(elems);

        // the kernel of the augmentation is the next layer
        let kernels: Vec<RatMatrix> = (0..n).map(|p| eps[p].kernel_basis()).collect();
        let kernel_stalks: Vec<BddChainComplex> = kernels
            .iter()
            .map(|k| BddChainComplex::concentrated(deg, k.cols()))
            .collect();
        let mut kernel_covers = BTreeMap::new();
        for (p, q) in base.covers() {
            // include the p-kernel into q-coordinates, then express it in
            // the q-kernel basis (unique: the basis has full column rank)
            let mut incl = RatMatrix::zeros(visible[q].len(), visible[p].len());
            for (col, gen) in visible[p].iter().enumerate() {
                let row = visible[q].binary_search(gen).expect("visibility grows upward");
                incl[(row, col)] = rat(1);
            }
            let lifted = incl.matmul(&kernels[p]);
            let t = kernels[q].solve_matrix(&lifted).ok_or_else(|| {
                Error::internal("kernel is not preserved by transitions".to_string())
            })?;
            kernel_covers.insert((p, q), DegreeMaps::from([(deg, t)]));
        }
        layer = PosetRep::new(base.clone(), kernel_stalks, &kernel_covers)
            .map_err(|e| Error::internal(format!("kernel module is not functorial: {e}")))?;
        basis_in_prev = kernels;
    }

    let complex = PseudoFreeComplex::new(base.clone(), deg, terms, diffs)?;
    let realized = realize(&complex);
    if complex.is_empty() {
        let eps = RepMap::zero(realized, m.clone())?;
        return Ok((complex, eps));
    }
    let mats: Vec<Vec<RatMatrix>> = (0..n).map(|p| vec![eps_mats[p].clone()]).collect();
    let eps = RepMap::new(realized, m.clone(), deg, mats)
        .map_err(|e| Error::internal(format!("augmentation is not natural: {e}")))?;
    Ok((complex, eps))
}

/// The degree-`at` stalks of `f` as a module concentrated in degree `deg`.
fn slice_module(f: &PosetRep, at: i64, deg: i64) -> Result<PosetRep> {
    let base = f.base().clone();
    let stalks: Vec<BddChainComplex> = (0..base.len())
        .map(|p| BddChainComplex::concentrated(deg, f.stalk(p).dim_at(at)))
        .collect();
    let mut cover_maps = BTreeMap::new();
    for (p, q) in base.covers() {
        cover_maps.insert((p, q), DegreeMaps::from([(deg, f.transition_at(p, q, at))]));
    }
    PosetRep::new(base, stalks, &cover_maps)
}

/// Degrees `lo..=hi` of `f` with the differential entering `hi` from above
/// dropped: a stupid truncation.
fn truncate_above(f: &PosetRep, lo: i64, hi: i64) -> Result<PosetRep> {
    let base = f.base().clone();
    let stalks: Vec<BddChainComplex> = (0..base.len())
        .map(|p| {
            let dims: Vec<usize> = (lo..=hi).map(|k| f.stalk(p).dim_at(k)).collect();
            let diffs: Vec<RatMatrix> = (lo..hi).map(|k| f.stalk(p).diff_at(k + 1)).collect();
            BddChainComplex::new(lo, dims, diffs).expect("truncation keeps d∘d = 0")
        })
        .collect();
    let mut cover_maps = BTreeMap::new();
    for (p, q) in base.covers() {
        let per: DegreeMaps = (lo..=hi).map(|k| (k, f.transition_at(p, q, k))).collect();
        cover_maps.insert((p, q), per);
    }
    PosetRep::new(base, stalks, &cover_maps)
}

/// Lift `conn ∘ eps_top` through the degreewise surjective quasi-isomorphism
/// `eps_rest`, generator by generator in ascending degree. Each generator is
/// solved at its own element against the stacked constraint
/// `[augmentation; differential]`; solvability is exactly acyclicity of the
/// augmentation's kernel. Returns one matrix per `q_top` degree, mapping
/// `q_top` generators to `q_rest` generators of the same degree.
fn lift_through_augmentation(
    q_top: &PseudoFreeComplex,
    eps_top: &RepMap,
    conn: &RepMap,
    q_rest: &PseudoFreeComplex,
    eps_rest: &RepMap,
) -> Result<Vec<RatMatrix>> {
    let real_rest = realize(q_rest);
    let mut g: Vec<RatMatrix> = Vec::new();
    for (i, gens) in q_top.terms.iter().enumerate() {
        let top_deg = q_top.lo + i as i64;
        let mut gi = RatMatrix::zeros(gens_at(q_rest, top_deg).len(), gens.len());
        for (col, &e) in gens.iter().enumerate() {
            let top_vis = q_top.visible(i, e);
            let pos = top_vis
                .binary_search(&col)
                .expect("a generator is visible at its own element");
            let mut unit = RatMatrix::zeros(top_vis.len(), 1);
            unit[(pos, 0)] = rat(1);

            let r = conn
                .component(e, top_deg)
                .matmul(&eps_top.component(e, top_deg))
                .matmul(&unit);
            let vis_n = visible_at(q_rest, top_deg, e);
            let vis_nm1 = visible_at(q_rest, top_deg - 1, e);
            let z = if i == 0 {
                RatMatrix::zeros(vis_nm1.len(), 1)
            } else {
                // already-lifted image of the incoming differential; rows
                // away from `e` vanish by the support condition
                let d_col = q_top.diffs[i - 1].select_cols(&[col]);
                g[i - 1].matmul(&d_col).select_rows(&vis_nm1)
            };
            let stacked = eps_rest
                .component(e, top_deg)
                .vstack(&real_rest.stalk(e).diff_at(top_deg));
            let v = stacked.solve_matrix(&r.vstack(&z)).ok_or_else(|| {
                Error::internal("lifting through the augmentation failed".to_string())
            })?;
            for (local, &row) in vis_n.iter().enumerate() {
                gi[(row, col)] = v[(local, 0)].clone();
            }
        }
        g.push(gi);
    }
    Ok(g)
}

fn visible_at(q: &PseudoFreeComplex, n: i64, e: usize) -> Vec<usize> {
    let i = n - q.lo;
    if i < 0 || (i as usize) >= q.terms.len() {
        Vec::new()
    } else {
        q.visible(i as usize, e)
    }
}

/// Cone of `g: q_top → q_rest` at the generator level: degree-`n`
/// generators are `top_{n−1} ⊔ rest_n`, with differential
/// `[−d_top, 0; g, d_rest]`. Empty generator degrees at either end are
/// trimmed.
fn pseudo_free_cone(
    q_top: &PseudoFreeComplex,
    q_rest: &PseudoFreeComplex,
    g: &[RatMatrix],
) -> Result<PseudoFreeComplex> {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    if !q_top.terms.is_empty() {
        lo = lo.min(q_top.lo + 1);
        hi = hi.max(q_top.lo + q_top.terms.len() as i64);
    }
    if !q_rest.terms.is_empty() {
        lo = lo.min(q_rest.lo);
        hi = hi.max(q_rest.lo + q_rest.terms.len() as i64 - 1);
    }
    if lo > hi {
        return PseudoFreeComplex::new(q_top.base.clone(), 0, Vec::new(), Vec::new());
    }
    let g_at = |n: i64| -> RatMatrix {
        let i = n - q_top.lo;
        if i >= 0 && (i as usize) < g.len() {
            g[i as usize].clone()
        } else {
            RatMatrix::zeros(gens_at(q_rest, n).len(), gens_at(q_top, n).len())
        }
    };

    let mut terms: Vec<Vec<usize>> = Vec::new();
    for n in lo..=hi {
        let mut t = gens_at(q_top, n - 1).to_vec();
        t.extend_from_slice(gens_at(q_rest, n));
        terms.push(t);
    }
    let mut diffs = Vec::new();
    for n in lo..hi {
        // map entering degree n from n+1
        let top = diff_leaving(q_top, n).neg().hstack(&RatMatrix::zeros(
            gens_at(q_top, n - 1).len(),
            gens_at(q_rest, n + 1).len(),
        ));
        let bot = g_at(n).hstack(&diff_leaving(q_rest, n + 1));
        diffs.push(top.vstack(&bot));
    }
    while terms.last().is_some_and(Vec::is_empty) {
        terms.pop();
        diffs.pop();
    }
    let mut lo = lo;
    while terms.len() > 1 && terms[0].is_empty() {
        terms.remove(0);
        diffs.remove(0);
        lo += 1;
    }
    if terms.len() == 1 && terms[0].is_empty() {
        terms.clear();
    }
    PseudoFreeComplex::new(q_top.base.clone(), lo, terms, diffs)
}

/// Resolution of an arbitrary representation, with augmentation: a
/// stalkwise quasi-isomorphism that is surjective in every degree, which is
/// what lets the next level's connecting map lift strictly.
fn resolve_rep(f: &PosetRep, style: CoverStyle) -> Result<(PseudoFreeComplex, RepMap)> {
    let base = f.base().clone();
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for p in 0..base.len() {
        if let Some((a, b)) = f.stalk(p).trimmed().range() {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    if lo > hi {
        let c = PseudoFreeComplex::new(base, 0, Vec::new(), Vec::new())?;
        let eps = RepMap::zero(realize(&c), f.clone())?;
        return Ok((c, eps));
    }
    if lo == hi {
        let m = slice_module(f, lo, lo)?;
        let (q, eps_m) = resolve_module(&m, lo, style)?;
        // retarget the augmentation at f itself (same dims, padded range)
        let mats: Vec<Vec<RatMatrix>> = (0..base.len())
            .map(|p| vec![eps_m.component(p, lo)])
            .collect();
        let eps = RepMap::new(realize(&q), f.clone(), lo, mats)
            .map_err(|e| Error::internal(format!("augmentation is not natural: {e}")))?;
        return Ok((q, eps));
    }

    // peel the top degree: f is the cone of its top differential, viewed
    // from the top slice shifted one down into the rest
    let top = slice_module(f, hi, hi - 1)?;
    let rest = truncate_above(f, lo, hi - 1)?;
    let (q_top, eps_top) = resolve_module(&top, hi - 1, style)?;
    let (q_rest, eps_rest) = resolve_rep(&rest, style)?;

    let conn_mats: Vec<Vec<RatMatrix>> = (0..base.len())
        .map(|p| vec![f.stalk(p).diff_at(hi)])
        .collect();
    let conn = RepMap::new(top.clone(), rest.clone(), hi - 1, conn_mats)
        .map_err(|e| Error::internal(format!("top differential is not natural: {e}")))?;

    let g = lift_through_augmentation(&q_top, &eps_top, &conn, &q_rest, &eps_rest)?;
    let cone = pseudo_free_cone(&q_top, &q_rest, &g)?;
    let realized = realize(&cone);
    let (rlo, rhi) = realized.degree_range();

    // blockwise augmentation: the top block lands in degree hi of f, the
    // rest block below; exactly one of them is nonzero in each degree
    let mats: Vec<Vec<RatMatrix>> = (0..base.len())
        .map(|p| {
            (rlo..=rhi)
                .map(|n| {
                    let a = eps_top.component(p, n - 1);
                    let b = eps_rest.component(p, n);
                    let rows = f.stalk(p).dim_at(n);
                    if n == hi {
                        a.hstack(&RatMatrix::zeros(rows, b.cols()))
                    } else {
                        RatMatrix::zeros(rows, a.cols()).hstack(&b)
                    }
                })
                .collect()
        })
        .collect();
    let eps = RepMap::new(realized, f.clone(), rlo, mats)
        .map_err(|e| Error::internal(format!("cone augmentation is not natural: {e}")))?;
    Ok((cone, eps))
}

/// Minimal pseudo-free resolution of `f`: a complex of star sheaves whose
/// realization is stalkwise quasi-isomorphic to `f`.
pub fn pseudo_free_resolve(f: &PosetRep) -> Result<PseudoFreeComplex> {
    Ok(resolve_rep(f, CoverStyle::Minimal)?.0)
}

/// Like [`pseudo_free_resolve`] but also returns the augmentation
/// `realize(result) → f`, a stalkwise quasi-isomorphism.
pub fn pseudo_free_resolve_with_augmentation(
    f: &PosetRep,
) -> Result<(PseudoFreeComplex, RepMap)> {
    resolve_rep(f, CoverStyle::Minimal)
}

/// Non-minimal comparison resolution taking a full generator basis at every
/// element (bar-style). Independence tests pit it against the minimal one.
pub fn bar_resolve(f: &PosetRep) -> Result<PseudoFreeComplex> {
    Ok(resolve_rep(f, CoverStyle::Full)?.0)
}

/// Derived pushforward along a monotone map: resolve, transport generators,
/// realize over the target.
pub fn derived_pushforward(f: &MonotoneMap, rep: &PosetRep) -> Result<PosetRep> {
    if f.source() != rep.base() {
        return Err(Error::invalid("pushforward map starts from a different poset"));
    }
    let q = pseudo_free_resolve(rep)?;
    Ok(realize(&q.relabel(f)?))
}
