//! Constructible sheaves on finite posets, modeled as functors from the
//! poset to bounded chain complexes: a stalk per element and a transition
//! chain map per cover relation, functorial along all paths.
//!
//! Functoriality is checked completely at construction: the map `p → q` is
//! defined by composing along one cover path and every alternative last step
//! is compared against it, which by induction pins down all path composites.

mod nerve;
mod recollement;
mod resolve;

pub use nerve::{closed_pushforward, evaluate, open_pushforward, NerveEval};
pub use recollement::{recollement_triangle, StalkwiseTriangle};
pub use resolve::{
    bar_resolve, derived_pushforward, pseudo_free_resolve,
    pseudo_free_resolve_with_augmentation, realize, PseudoFreeComplex,
};

use crate::chain::{BddChainComplex, ChainMap};
use crate::linalg::RatMatrix;
use crate::poset::{FinPoset, MonotoneMap};
use crate::stratify::Stratification;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// A representation of a poset in chain complexes: the combinatorial model
/// of a constructible sheaf, with `stalk(p)` playing the sections over the
/// open star of `p`.
///
/// All stalks are padded to one shared degree range; transition data is
/// stored per Hasse cover, with the full composite table derived and checked
/// at construction.
#[derive(Clone, Debug)]
pub struct PosetRep {
    base: FinPoset,
    lo: i64,
    hi: i64,
    stalks: Vec<BddChainComplex>,
    maps: BTreeMap<(usize, usize), Vec<RatMatrix>>,
}

/// Transition matrices keyed by actual degree; absent degrees are zero maps.
pub type DegreeMaps = BTreeMap<i64, RatMatrix>;

impl PosetRep {
    /// `cover_maps` must provide the transition for every Hasse cover of the
    /// base (entries for non-covers are rejected). Checks that transitions
    /// are chain maps and that all cover-path composites agree.
    pub fn new(
        base: FinPoset,
        stalks: Vec<BddChainComplex>,
        cover_maps: &BTreeMap<(usize, usize), DegreeMaps>,
    ) -> Result<Self> {
        if stalks.len() != base.len() {
            return Err(Error::invalid(format!(
                "representation needs {} stalks, got {}",
                base.len(),
                stalks.len()
            )));
        }
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for s in &stalks {
            if let Some((a, b)) = s.range() {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        if lo > hi {
            lo = 0;
            hi = -1;
        }
        let stalks: Vec<BddChainComplex> = stalks
            .iter()
            .map(|s| if hi < lo { s.clone() } else { s.padded(lo, hi) })
            .collect();

        let covers: Vec<(usize, usize)> = base.covers();
        for k in cover_maps.keys() {
            if !covers.contains(k) {
                return Err(Error::invalid(format!(
                    "transition given for non-cover pair ({}, {})",
                    base.label(k.0),
                    base.label(k.1)
                )));
            }
        }
        let width = (hi - lo + 1).max(0) as usize;
        let mut cover_table: BTreeMap<(usize, usize), Vec<RatMatrix>> = BTreeMap::new();
        for &(p, q) in &covers {
            let given = cover_maps.get(&(p, q));
            let mut mats = Vec::with_capacity(width);
            for off in 0..width {
                let k = lo + off as i64;
                let rows = stalks[q].dim_at(k);
                let cols = stalks[p].dim_at(k);
                let m = match given.and_then(|g| g.get(&k)) {
                    Some(m) => {
                        if (m.rows(), m.cols()) != (rows, cols) {
                            return Err(Error::invalid(format!(
                                "transition {}->{} at degree {k} must be {rows}x{cols}, got {}x{}",
                                base.label(p),
                                base.label(q),
                                m.rows(),
                                m.cols()
                            )));
                        }
                        m.clone()
                    }
                    None => RatMatrix::zeros(rows, cols),
                };
                mats.push(m);
            }
            // reject stray degrees outside the padded range
            if let Some(g) = given {
                for (&k, m) in g {
                    if (k < lo || k > hi) && !m.is_zero() {
                        return Err(Error::invalid(format!(
                            "transition {}->{} given at degree {k} outside the stalk range",
                            base.label(p),
                            base.label(q)
                        )));
                    }
                }
            }
            // chain-map condition against the padded stalk differentials
            for k in lo..=hi {
                let f_km1 = cover_table_mat(&mats, lo, k - 1, &stalks[p], &stalks[q]);
                let f_k = cover_table_mat(&mats, lo, k, &stalks[p], &stalks[q]);
                if f_km1.matmul(&stalks[p].diff_at(k)) != stalks[q].diff_at(k).matmul(&f_k) {
                    return Err(Error::invalid(format!(
                        "transition {}->{} does not commute with differentials at degree {k}",
                        base.label(p),
                        base.label(q)
                    )));
                }
            }
            cover_table.insert((p, q), mats);
        }

        let mut rep = PosetRep { base, lo, hi, stalks, maps: BTreeMap::new() };
        rep.maps = rep.derive_full_maps(&cover_table)?;
        Ok(rep)
    }

    /// Composite table for all `p ≤ q`, verifying that every choice of last
    /// cover step agrees.
    fn derive_full_maps(
        &self,
        cover_table: &BTreeMap<(usize, usize), Vec<RatMatrix>>,
    ) -> Result<BTreeMap<(usize, usize), Vec<RatMatrix>>> {
        let n = self.base.len();
        let width = self.width();
        let mut maps: BTreeMap<(usize, usize), Vec<RatMatrix>> = BTreeMap::new();
        for p in 0..n {
            let id: Vec<RatMatrix> = (0..width)
                .map(|off| RatMatrix::identity(self.stalks[p].dim_at(self.lo + off as i64)))
                .collect();
            maps.insert((p, p), id);
        }
        // process targets in an order where all intermediate points are done:
        // by increasing chain height of q
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&q| self.base.down_closure(&[q]).len());
        for &q in &order {
            for p in 0..n {
                if !self.base.lt(p, q) {
                    continue;
                }
                let mut agreed: Option<Vec<RatMatrix>> = None;
                for (&(r, q2), last) in cover_table {
                    if q2 != q || !self.base.leq(p, r) {
                        continue;
                    }
                    let lower = maps
                        .get(&(p, r))
                        .expect("smaller intervals processed first")
                        .clone();
                    let composed: Vec<RatMatrix> = (0..width)
                        .map(|off| last[off].matmul(&lower[off]))
                        .collect();
                    match &agreed {
                        None => agreed = Some(composed),
                        Some(prev) => {
                            if *prev != composed {
                                return Err(Error::invalid(format!(
                                    "transitions are not functorial between {} and {}: \
                                     cover paths disagree",
                                    self.base.label(p),
                                    self.base.label(q)
                                )));
                            }
                        }
                    }
                }
                maps.insert((p, q), agreed.expect("p < q has a cover path"));
            }
        }
        Ok(maps)
    }

    fn width(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn base(&self) -> &FinPoset {
        &self.base
    }

    /// Shared degree range of the padded stalks (`lo > hi` means zero).
    pub fn degree_range(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn stalk(&self, p: usize) -> &BddChainComplex {
        &self.stalks[p]
    }

    /// Transition matrix `stalk(p) → stalk(q)` at one degree, for any `p ≤ q`.
    pub fn transition_at(&self, p: usize, q: usize, k: i64) -> RatMatrix {
        assert!(self.base.leq(p, q), "transition requested against the order");
        let mats = &self.maps[&(p, q)];
        cover_table_mat(mats, self.lo, k, &self.stalks[p], &self.stalks[q])
    }

    /// The transition as a checked chain map.
    pub fn transition_map(&self, p: usize, q: usize) -> ChainMap {
        let mats = (self.lo..=self.hi).map(|k| self.transition_at(p, q, k)).collect();
        ChainMap::new(self.stalks[p].clone(), self.stalks[q].clone(), self.lo, mats)
            .expect("stored transitions are chain maps")
    }

    /// Constant sheaf with stalk `c` and identity transitions.
    pub fn constant(base: FinPoset, c: &BddChainComplex) -> Self {
        let stalks = vec![c.clone(); base.len()];
        let mut cover_maps = BTreeMap::new();
        if let Some((lo, hi)) = c.range() {
            for (p, q) in base.covers() {
                let per: DegreeMaps =
                    (lo..=hi).map(|k| (k, RatMatrix::identity(c.dim_at(k)))).collect();
                cover_maps.insert((p, q), per);
            }
        }
        Self::new(base, stalks, &cover_maps).expect("constant sheaf is functorial")
    }

    /// The constant sheaf ℚ in degree 0, the tensor unit.
    pub fn constant_unit(base: FinPoset) -> Self {
        Self::constant(base, &BddChainComplex::unit())
    }

    /// `ℚ_U` for an up-set `U`: stalk ℚ on `U`, zero outside, identity
    /// transitions inside. This is `j_! ℚ` for the open inclusion of `U`.
    pub fn indicator(base: FinPoset, u: &[usize]) -> Result<Self> {
        if !base.is_up_set(u) {
            return Err(Error::invalid("indicator support must be an up-set"));
        }
        let mut su = u.to_vec();
        su.sort_unstable();
        let stalks: Vec<BddChainComplex> = (0..base.len())
            .map(|p| {
                if su.binary_search(&p).is_ok() {
                    BddChainComplex::unit()
                } else {
                    BddChainComplex::zero()
                }
            })
            .collect();
        let mut cover_maps = BTreeMap::new();
        for (p, q) in base.covers() {
            if su.binary_search(&p).is_ok() {
                cover_maps.insert((p, q), DegreeMaps::from([(0, RatMatrix::identity(1))]));
            }
        }
        Self::new(base, stalks, &cover_maps)
    }

    /// Skyscraper: stalk `c` at `p`, zero elsewhere.
    pub fn skyscraper(base: FinPoset, p: usize, c: &BddChainComplex) -> Self {
        let stalks: Vec<BddChainComplex> = (0..base.len())
            .map(|q| if q == p { c.clone() } else { BddChainComplex::zero() })
            .collect();
        Self::new(base, stalks, &BTreeMap::new()).expect("skyscraper transitions are zero")
    }

    pub fn zero(base: FinPoset) -> Self {
        let stalks = vec![BddChainComplex::zero(); base.len()];
        Self::new(base, stalks, &BTreeMap::new()).expect("zero sheaf is functorial")
    }

    pub fn is_zero(&self) -> bool {
        self.stalks.iter().all(BddChainComplex::is_empty)
    }

    pub fn stalkwise_homology(&self) -> Vec<Vec<usize>> {
        self.stalks.iter().map(BddChainComplex::homology_dims).collect()
    }

    /// Restriction to the induced subposet on `sub` (any subset). Covers of
    /// the subposet pull their maps from the full composite table.
    pub fn restrict(&self, sub: &[usize]) -> Self {
        let (ind, back) = self.base.induced(sub);
        let stalks: Vec<BddChainComplex> = back.iter().map(|&i| self.stalks[i].clone()).collect();
        let mut cover_maps = BTreeMap::new();
        for (a, b) in ind.covers() {
            let per: DegreeMaps = (self.lo..=self.hi)
                .map(|k| (k, self.transition_at(back[a], back[b], k)))
                .collect();
            cover_maps.insert((a, b), per);
        }
        Self::new(ind, stalks, &cover_maps).expect("restriction stays functorial")
    }

    /// Precomposition with a monotone map: `stalk(p) = stalk_G(f(p))`.
    pub fn pullback(f: &MonotoneMap, g: &PosetRep) -> Result<Self> {
        if f.target() != g.base() {
            return Err(Error::invalid("pullback: map target differs from sheaf base"));
        }
        let p = f.source().clone();
        let stalks: Vec<BddChainComplex> =
            (0..p.len()).map(|i| g.stalk(f.apply(i)).clone()).collect();
        let mut cover_maps = BTreeMap::new();
        for (a, b) in p.covers() {
            let per: DegreeMaps = (g.lo..=g.hi)
                .map(|k| (k, g.transition_at(f.apply(a), f.apply(b), k)))
                .collect();
            cover_maps.insert((a, b), per);
        }
        Self::new(p, stalks, &cover_maps)
    }

    /// `j_!`: keep the stalks on the up-set `U` (where `f` lives), extend by
    /// zero complexes outside.
    pub fn extend_by_zero(base: &FinPoset, u: &[usize], f: &PosetRep) -> Result<Self> {
        if !base.is_up_set(u) {
            return Err(Error::invalid("extension by zero needs an up-set"));
        }
        let mut su = u.to_vec();
        su.sort_unstable();
        su.dedup();
        let (ind, _) = base.induced(&su);
        if f.base() != &ind {
            return Err(Error::invalid("sheaf is not defined on the given up-set"));
        }
        let pos_of = |p: usize| su.binary_search(&p).ok();
        let stalks: Vec<BddChainComplex> = (0..base.len())
            .map(|p| pos_of(p).map_or_else(BddChainComplex::zero, |i| f.stalk(i).clone()))
            .collect();
        let mut cover_maps = BTreeMap::new();
        for (p, q) in base.covers() {
            if let (Some(a), Some(b)) = (pos_of(p), pos_of(q)) {
                let per: DegreeMaps =
                    (f.lo..=f.hi).map(|k| (k, f.transition_at(a, b, k))).collect();
                cover_maps.insert((p, q), per);
            }
        }
        Self::new(base.clone(), stalks, &cover_maps)
    }

    /// Stalkwise tensor product with induced transitions.
    pub fn tensor(&self, other: &PosetRep) -> Result<Self> {
        if self.base != other.base {
            return Err(Error::invalid("tensor: representations live on different posets"));
        }
        let stalks: Vec<BddChainComplex> = (0..self.base.len())
            .map(|p| self.stalks[p].tensor(&other.stalks[p]))
            .collect();
        let mut cover_maps = BTreeMap::new();
        for (p, q) in self.base.covers() {
            let mut per = DegreeMaps::new();
            for t in (self.lo + other.lo)..=(self.hi + other.hi) {
                per.insert(t, self.tensor_transition(other, p, q, t));
            }
            cover_maps.insert((p, q), per);
        }
        Self::new(self.base.clone(), stalks, &cover_maps)
    }

    /// Block-diagonal Kronecker transition of the tensor stalk at total
    /// degree `t`. Summands run over `(i, t−i)` with ascending first-factor
    /// degree, matching [`BddChainComplex::tensor`].
    fn tensor_transition(&self, other: &PosetRep, p: usize, q: usize, t: i64) -> RatMatrix {
        let layout = |sp: &PosetRep, so: &PosetRep, e: usize| -> Vec<(i64, i64, usize)> {
            (sp.lo..=sp.hi)
                .map(|i| {
                    let j = t - i;
                    let d = sp.stalks[e].dim_at(i) * so.stalks[e].dim_at(j);
                    (i, j, if (so.lo..=so.hi).contains(&j) { d } else { 0 })
                })
                .collect()
        };
        let src = layout(self, other, p);
        let tgt = layout(self, other, q);
        let rows: usize = tgt.iter().map(|&(_, _, d)| d).sum();
        let cols: usize = src.iter().map(|&(_, _, d)| d).sum();
        let mut m = RatMatrix::zeros(rows, cols);
        let mut c0 = 0;
        for (idx, &(i, j, sd)) in src.iter().enumerate() {
            if sd > 0 {
                let r0: usize = tgt[..idx].iter().map(|&(_, _, d)| d).sum();
                let block =
                    self.transition_at(p, q, i).kron(&other.transition_at(p, q, j));
                for r in 0..block.rows() {
                    for c in 0..block.cols() {
                        m[(r0 + r, c0 + c)] = block[(r, c)].clone();
                    }
                }
            }
            c0 += sd;
        }
        m
    }

    /// All stalks and transitions shifted by `s` degrees.
    pub fn shift(&self, s: i64) -> Self {
        let stalks: Vec<BddChainComplex> = self.stalks.iter().map(|c| c.shift(s)).collect();
        let mut cover_maps = BTreeMap::new();
        for (p, q) in self.base.covers() {
            let per: DegreeMaps = (self.lo..=self.hi)
                .map(|k| (k + s, self.transition_at(p, q, k)))
                .collect();
            cover_maps.insert((p, q), per);
        }
        Self::new(self.base.clone(), stalks, &cover_maps).expect("shift stays functorial")
    }

    /// Tensor with a rank-one degree-0 local system and shift by `n`.
    pub fn twist_by_dualizing(&self, n: i64, orientation: &PosetRep) -> Result<Self> {
        if orientation.base() != self.base() {
            return Err(Error::invalid("orientation lives on a different poset"));
        }
        for p in 0..self.base.len() {
            let s = orientation.stalk(p).trimmed();
            if s.range() != Some((0, 0)) || s.dim_at(0) != 1 {
                return Err(Error::invalid(
                    "orientation stalks must be one-dimensional in degree 0".to_string(),
                ));
            }
        }
        for (p, q) in self.base.covers() {
            if orientation.transition_at(p, q, 0).rank() != 1 {
                return Err(Error::invalid(format!(
                    "orientation transition {}->{} is not invertible",
                    self.base.label(p),
                    self.base.label(q)
                )));
            }
        }
        Ok(self.tensor(orientation)?.shift(n))
    }

    /// Local constancy along a stratification: on every stratum, every
    /// transition of the restricted representation is a quasi-isomorphism.
    pub fn check_locally_constant(&self, s: &Stratification) -> Result<bool> {
        if s.space() != self.base() {
            return Err(Error::invalid("stratification is for a different space"));
        }
        for t in 0..s.strata_poset().len() {
            let r = self.restrict(&s.stratum(t));
            for (a, b) in r.base().covers() {
                if !r.transition_map(a, b).is_quasi_iso() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn cover_table_mat(
    mats: &[RatMatrix],
    lo: i64,
    k: i64,
    src: &BddChainComplex,
    tgt: &BddChainComplex,
) -> RatMatrix {
    let off = k - lo;
    if off >= 0 && (off as usize) < mats.len() {
        mats[off as usize].clone()
    } else {
        RatMatrix::zeros(tgt.dim_at(k), src.dim_at(k))
    }
}

/// A degreewise map of representations: a chain map per stalk, natural with
/// respect to all transitions (checked on covers, which generate).
#[derive(Clone, Debug)]
pub struct RepMap {
    source: PosetRep,
    target: PosetRep,
    lo: i64,
    mats: Vec<Vec<RatMatrix>>,
}

impl RepMap {
    /// `mats[p]` lists the components of the map at element `p` for degrees
    /// `lo, lo+1, …`; missing degrees are zero.
    pub fn new(source: PosetRep, target: PosetRep, lo: i64, mats: Vec<Vec<RatMatrix>>) -> Result<Self> {
        if source.base() != target.base() {
            return Err(Error::invalid("representation map needs a common base"));
        }
        if mats.len() != source.base().len() {
            return Err(Error::invalid("one component list per element required"));
        }
        let f = RepMap { source, target, lo, mats };
        for p in 0..f.source.base().len() {
            f.stalk_map(p)?;
        }
        for (p, q) in f.source.base().covers() {
            let range = f.degree_span();
            for k in range.0..=range.1 {
                let via_target = f.target.transition_at(p, q, k).matmul(&f.component(p, k));
                let via_source = f.component(q, k).matmul(&f.source.transition_at(p, q, k));
                if via_target != via_source {
                    return Err(Error::invalid(format!(
                        "map is not natural across {} -> {} at degree {k}",
                        f.source.base().label(p),
                        f.source.base().label(q)
                    )));
                }
            }
        }
        Ok(f)
    }

    fn degree_span(&self) -> (i64, i64) {
        (
            self.source.lo.min(self.target.lo),
            self.source.hi.max(self.target.hi),
        )
    }

    pub fn source(&self) -> &PosetRep {
        &self.source
    }

    pub fn target(&self) -> &PosetRep {
        &self.target
    }

    /// Component at element `p`, degree `k` (zero when unspecified).
    pub fn component(&self, p: usize, k: i64) -> RatMatrix {
        let off = k - self.lo;
        if off >= 0 && (off as usize) < self.mats[p].len() {
            self.mats[p][off as usize].clone()
        } else {
            RatMatrix::zeros(self.target.stalk(p).dim_at(k), self.source.stalk(p).dim_at(k))
        }
    }

    /// The stalk component as a checked chain map.
    pub fn stalk_map(&self, p: usize) -> Result<ChainMap> {
        let (a, b) = self.degree_span();
        let mats = (a..=b).map(|k| self.component(p, k)).collect();
        ChainMap::new(self.source.stalk(p).clone(), self.target.stalk(p).clone(), a, mats)
    }

    pub fn zero(source: PosetRep, target: PosetRep) -> Result<Self> {
        let n = source.base().len();
        Self::new(source, target, 0, vec![Vec::new(); n])
    }

    /// Stalkwise mapping fiber with block-diagonal transitions; naturality
    /// of `self` is exactly what makes the blocks commute with the fiber
    /// differential.
    pub fn rep_mapping_fiber(&self) -> Result<PosetRep> {
        let base = self.source.base().clone();
        let mut fiber_stalks = Vec::new();
        for p in 0..base.len() {
            fiber_stalks.push(self.stalk_map(p)?.mapping_fiber());
        }
        let lo = fiber_stalks
            .iter()
            .filter_map(|c| c.range().map(|r| r.0))
            .min()
            .unwrap_or(0);
        let hi = fiber_stalks
            .iter()
            .filter_map(|c| c.range().map(|r| r.1))
            .max()
            .unwrap_or(-1);
        let mut cover_maps = BTreeMap::new();
        for (p, q) in base.covers() {
            let mut per = DegreeMaps::new();
            for n in lo..=hi {
                // fiber_n = source_n ⊕ target_{n+1}
                let a = self.source.transition_at(p, q, n);
                let b = self.target.transition_at(p, q, n + 1);
                per.insert(n, RatMatrix::block_diag(&[a, b]));
            }
            cover_maps.insert((p, q), per);
        }
        PosetRep::new(base, fiber_stalks, &cover_maps)
    }
}
