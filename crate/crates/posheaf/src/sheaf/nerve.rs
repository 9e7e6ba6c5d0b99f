//! Derived sections over open sets as a homotopy limit over the nerve.
//!
//! Sections of `F` over an up-set `U` are modeled by the total complex of
//! nerve cochains: cochain level `k` holds one copy of `stalk(top(c))` per
//! strict chain `c = p₀ < … < p_k` in `U`, stored at total degree
//! `stalk degree − k`. The total differential is the stalk differential plus
//! the alternating face sum, twisted by `(−1)^{stalk degree}`; the last face
//! applies the transition `top(∂c) → top(c)`.

use super::PosetRep;
use crate::chain::{BddChainComplex, ChainMap};
use crate::linalg::RatMatrix;
use crate::poset::FinPoset;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// One summand of the nerve total complex at a fixed total degree.
#[derive(Clone, Debug)]
struct Block {
    k: usize,
    chain_idx: usize,
    stalk_deg: i64,
    dim: usize,
    offset: usize,
}

/// The evaluated complex together with its block layout, which the
/// structural maps (restriction, evaluation at a point, units) are built
/// against.
#[derive(Clone, Debug)]
pub struct NerveEval {
    u: Vec<usize>,
    chains: Vec<Vec<Vec<usize>>>,
    lo_total: i64,
    blocks: Vec<Vec<Block>>,
    complex: BddChainComplex,
}

impl NerveEval {
    /// Build the section complex of `rep` over the up-set `u` (base indices).
    pub fn over(rep: &PosetRep, u: &[usize]) -> Result<Self> {
        let base = rep.base();
        if u.iter().any(|&p| p >= base.len()) {
            return Err(Error::invalid("section set contains an unknown element"));
        }
        if !base.is_up_set(u) {
            return Err(Error::invalid(
                "sections are evaluated over open sets (up-sets)".to_string(),
            ));
        }
        let mut su = u.to_vec();
        su.sort_unstable();
        su.dedup();

        let chains = enumerate_chains(base, &su);
        let (lo, hi) = rep.degree_range();
        if chains.is_empty() || hi < lo {
            return Ok(NerveEval {
                u: su,
                chains,
                lo_total: 0,
                blocks: Vec::new(),
                complex: BddChainComplex::zero(),
            });
        }
        let max_k = chains.len() as i64 - 1;
        let lo_total = lo - max_k;
        let hi_total = hi;

        let mut blocks: Vec<Vec<Block>> = Vec::new();
        for n in lo_total..=hi_total {
            let mut level = Vec::new();
            let mut offset = 0;
            for (k, at_k) in chains.iter().enumerate() {
                let m = n + k as i64;
                if m < lo || m > hi {
                    continue;
                }
                for (chain_idx, c) in at_k.iter().enumerate() {
                    let dim = rep.stalk(*c.last().unwrap()).dim_at(m);
                    level.push(Block { k, chain_idx, stalk_deg: m, dim, offset });
                    offset += dim;
                }
            }
            blocks.push(level);
        }

        let dims: Vec<usize> = blocks.iter().map(|l| l.iter().map(|b| b.dim).sum()).collect();
        let mut diffs = Vec::new();
        for i in 0..dims.len().saturating_sub(1) {
            // map leaving total degree lo_total + i + 1 into lo_total + i
            let rows_layout = &blocks[i];
            let cols_layout = &blocks[i + 1];
            let mut d = RatMatrix::zeros(dims[i], dims[i + 1]);
            let col_of: BTreeMap<(usize, usize), &Block> =
                cols_layout.iter().map(|b| ((b.k, b.chain_idx), b)).collect();
            for row in rows_layout {
                let c_row = &chains[row.k][row.chain_idx];
                // stalk differential: same chain, one stalk degree up
                if let Some(col) = col_of.get(&(row.k, row.chain_idx)) {
                    debug_assert_eq!(col.stalk_deg, row.stalk_deg + 1);
                    let m = rep.stalk(*c_row.last().unwrap()).diff_at(col.stalk_deg);
                    place(&mut d, row.offset, col.offset, &m);
                }
                // face sum: row chain of length k ≥ 1, faces at the same
                // stalk degree, twisted by (−1)^{stalk degree}
                if row.k >= 1 {
                    let twist = if row.stalk_deg.rem_euclid(2) == 0 { 1 } else { -1 };
                    for i_face in 0..=row.k {
                        let mut face = c_row.clone();
                        face.remove(i_face);
                        let face_idx = chains[row.k - 1]
                            .binary_search(&face)
                            .expect("faces of chains in U stay in U");
                        let Some(col) = col_of.get(&(row.k - 1, face_idx)) else {
                            continue;
                        };
                        debug_assert_eq!(col.stalk_deg, row.stalk_deg);
                        let sign = if i_face % 2 == 0 { twist } else { -twist };
                        let m = if i_face < row.k {
                            RatMatrix::identity(row.dim)
                        } else {
                            rep.transition_at(c_row[row.k - 1], c_row[row.k], row.stalk_deg)
                        };
                        place_scaled(&mut d, row.offset, col.offset, &m, sign);
                    }
                }
            }
            diffs.push(d);
        }
        let complex = BddChainComplex::new(lo_total, dims, diffs)?;
        Ok(NerveEval { u: su, chains, lo_total, blocks, complex })
    }

    pub fn complex(&self) -> &BddChainComplex {
        &self.complex
    }

    fn find_block(&self, n: i64, k: usize, chain: &[usize]) -> Option<&Block> {
        let i = n - self.lo_total;
        if i < 0 || i as usize >= self.blocks.len() {
            return None;
        }
        let chain_idx = self.chains.get(k)?.binary_search(&chain.to_vec()).ok()?;
        self.blocks[i as usize]
            .iter()
            .find(|b| b.k == k && b.chain_idx == chain_idx)
    }

    /// Projection onto the singleton-chain component of `p`: the evaluation
    /// `Γ(U, F) → stalk(p)` for `p ∈ U`. A quasi-isomorphism when `p` is the
    /// minimum of `U`.
    pub fn ev(&self, rep: &PosetRep, p: usize) -> Result<ChainMap> {
        if self.chains.is_empty() || self.chains[0].binary_search(&vec![p]).is_err() {
            return Err(Error::invalid("evaluation point is not in the section set"));
        }
        let stalk = rep.stalk(p).clone();
        let (lo, hi) = rep.degree_range();
        let mats = (lo..=hi)
            .map(|m| {
                let mut mat = RatMatrix::zeros(stalk.dim_at(m), self.complex.dim_at(m));
                if let Some(b) = self.find_block(m, 0, &[p]) {
                    place(&mut mat, 0, b.offset, &RatMatrix::identity(b.dim));
                }
                mat
            })
            .collect();
        ChainMap::new(self.complex.clone(), stalk, lo, mats)
    }

    /// The unit `stalk(p) → Γ(U, F)` for `p` below every element of `U`:
    /// transition into each singleton component, zero on longer chains.
    /// A quasi-isomorphism when `p ∈ U` (so `p = min U`).
    pub fn unit(&self, rep: &PosetRep, p: usize) -> Result<ChainMap> {
        if self.u.iter().any(|&q| !rep.base().leq(p, q)) {
            return Err(Error::invalid(
                "unit needs the point below the whole section set".to_string(),
            ));
        }
        self.unit_via(rep.stalk(p), |q, m| rep.transition_at(p, q, m))
    }

    /// Unit map with caller-supplied components: `t(q, m)` is the map from
    /// the source at degree `m` into the stalk over `q ∈ U` (indices in the
    /// coordinate system this evaluation was built over). Functoriality of
    /// the components is what makes this a chain map; construction fails
    /// otherwise.
    pub(crate) fn unit_via(
        &self,
        source: &BddChainComplex,
        t: impl Fn(usize, i64) -> RatMatrix,
    ) -> Result<ChainMap> {
        let Some((lo, hi)) = source.range() else {
            return Ok(ChainMap::zero(source.clone(), self.complex.clone()));
        };
        let mats = (lo..=hi)
            .map(|m| {
                let mut mat = RatMatrix::zeros(self.complex.dim_at(m), source.dim_at(m));
                for &q in &self.u {
                    if let Some(b) = self.find_block(m, 0, &[q]) {
                        place(&mut mat, b.offset, 0, &t(q, m));
                    }
                }
                mat
            })
            .collect();
        ChainMap::new(source.clone(), self.complex.clone(), lo, mats)
    }

    /// Restriction of sections along `other.u ⊆ self.u`: projection onto the
    /// chains that survive.
    pub fn projection(&self, other: &NerveEval) -> Result<ChainMap> {
        if other.u.iter().any(|q| self.u.binary_search(q).is_err()) {
            return Err(Error::invalid("restriction target is not a subset"));
        }
        let lo = other.lo_total.min(self.lo_total);
        let hi_self = self.lo_total + self.blocks.len() as i64 - 1;
        let hi_other = other.lo_total + other.blocks.len() as i64 - 1;
        let mats = (lo..=hi_self.max(hi_other))
            .map(|n| {
                let mut mat =
                    RatMatrix::zeros(other.complex.dim_at(n), self.complex.dim_at(n));
                let i = n - other.lo_total;
                if i >= 0 && (i as usize) < other.blocks.len() {
                    for tb in &other.blocks[i as usize] {
                        let chain = &other.chains[tb.k][tb.chain_idx];
                        let sb = self
                            .find_block(n, tb.k, chain)
                            .expect("chains of a subset appear in the superset");
                        place(&mut mat, tb.offset, sb.offset, &RatMatrix::identity(tb.dim));
                    }
                }
                mat
            })
            .collect();
        ChainMap::new(self.complex.clone(), other.complex.clone(), lo, mats)
    }
}

/// All strict chains within `su` (sorted base indices), grouped by length:
/// `chains[k]` lists the `(k+1)`-element chains in lexicographic order.
fn enumerate_chains(base: &FinPoset, su: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if su.is_empty() {
        return Vec::new();
    }
    let mut chains = vec![su.iter().map(|&p| vec![p]).collect::<Vec<_>>()];
    loop {
        let last = chains.last().unwrap();
        let mut next = Vec::new();
        for c in last {
            let top = *c.last().unwrap();
            for &q in su {
                if base.lt(top, q) {
                    let mut e = c.clone();
                    e.push(q);
                    next.push(e);
                }
            }
        }
        if next.is_empty() {
            return chains;
        }
        chains.push(next);
    }
}

fn place(m: &mut RatMatrix, r0: usize, c0: usize, block: &RatMatrix) {
    for r in 0..block.rows() {
        for c in 0..block.cols() {
            m[(r0 + r, c0 + c)] = block[(r, c)].clone();
        }
    }
}

fn place_scaled(m: &mut RatMatrix, r0: usize, c0: usize, block: &RatMatrix, sign: i64) {
    let s = crate::linalg::rat(sign);
    for r in 0..block.rows() {
        for c in 0..block.cols() {
            m[(r0 + r, c0 + c)] = &block[(r, c)] * &s;
        }
    }
}

/// Derived sections of `f` over the up-set `u`.
pub fn evaluate(f: &PosetRep, u: &[usize]) -> Result<BddChainComplex> {
    Ok(NerveEval::over(f, u)?.complex().clone())
}

/// `i_*`: pushforward along the inclusion of the down-set `z`. The stalk at
/// `p` is the section complex of `g` over `p⋆ ∩ Z`; transitions restrict.
pub fn closed_pushforward(base: &FinPoset, z: &[usize], g: &PosetRep) -> Result<PosetRep> {
    if !base.is_down_set(z) {
        return Err(Error::invalid("closed pushforward needs a down-set"));
    }
    pushforward_from_subspace(base, z, g)
}

/// `j_*`: pushforward along the inclusion of the up-set `u`. The stalk at
/// `p` is the section complex of `f` over `p⋆ ∩ U`.
pub fn open_pushforward(base: &FinPoset, u: &[usize], f: &PosetRep) -> Result<PosetRep> {
    if !base.is_up_set(u) {
        return Err(Error::invalid("open pushforward needs an up-set"));
    }
    pushforward_from_subspace(base, u, f)
}

fn pushforward_from_subspace(base: &FinPoset, s: &[usize], g: &PosetRep) -> Result<PosetRep> {
    Ok(pushforward_with_layouts(base, s, g)?.0)
}

/// The pushforward together with the per-element section layouts, which the
/// recollement maps are assembled against.
pub(crate) fn pushforward_with_layouts(
    base: &FinPoset,
    s: &[usize],
    g: &PosetRep,
) -> Result<(PosetRep, Vec<NerveEval>)> {
    let (ind, back) = base.induced(s);
    if g.base() != &ind {
        return Err(Error::invalid(
            "pushforward source is not defined on the given subspace".to_string(),
        ));
    }
    let mut evals = Vec::with_capacity(base.len());
    for p in 0..base.len() {
        let up: Vec<usize> =
            (0..ind.len()).filter(|&i| base.leq(p, back[i])).collect();
        evals.push(NerveEval::over(g, &up)?);
    }
    let stalks: Vec<BddChainComplex> =
        evals.iter().map(|e| e.complex().clone()).collect();
    let mut cover_maps = BTreeMap::new();
    for (p, q) in base.covers() {
        let proj = evals[p].projection(&evals[q])?;
        let mut per = super::DegreeMaps::new();
        if let Some((a, b)) = evals[p].complex().range() {
            for n in a..=b {
                per.insert(n, proj.at(n));
            }
        }
        cover_maps.insert((p, q), per);
    }
    let rep = PosetRep::new(base.clone(), stalks, &cover_maps)?;
    Ok((rep, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::AlmostSimplicialComplex;

    fn triangle_boundary_poset() -> FinPoset {
        AlmostSimplicialComplex::from_named(
            &["a", "b", "c"],
            &[&["a", "b"], &["b", "c"], &["a", "c"]],
        )
        .unwrap()
        .simplicial_closure()
        .face_poset()
        .unwrap()
    }

    fn solid_triangle_poset() -> FinPoset {
        AlmostSimplicialComplex::from_named(&["a", "b", "c"], &[&["a", "b", "c"]])
            .unwrap()
            .simplicial_closure()
            .face_poset()
            .unwrap()
    }

    #[test]
    fn circle_sections_have_two_cohomologies() {
        let p = triangle_boundary_poset();
        let all: Vec<usize> = (0..p.len()).collect();
        let f = PosetRep::constant_unit(p);
        let c = evaluate(&f, &all).unwrap();
        assert_eq!(c.homology_at(0), 1);
        assert_eq!(c.homology_at(-1), 1);
        assert_eq!(c.homology_dims().iter().sum::<usize>(), 2);
    }

    #[test]
    fn disk_sections_are_one_dimensional() {
        let p = solid_triangle_poset();
        let all: Vec<usize> = (0..p.len()).collect();
        let f = PosetRep::constant_unit(p);
        let c = evaluate(&f, &all).unwrap();
        assert_eq!(c.homology_at(0), 1);
        assert_eq!(c.homology_dims().iter().sum::<usize>(), 1);
    }

    #[test]
    fn star_sections_recover_the_stalk() {
        let p = triangle_boundary_poset();
        let a = p.index_of("a").unwrap();
        let f = PosetRep::constant_unit(p.clone());
        let eval = NerveEval::over(&f, &p.open_star(a)).unwrap();
        assert!(eval.ev(&f, a).unwrap().is_quasi_iso());
        assert!(eval.unit(&f, a).unwrap().is_quasi_iso());
        assert_eq!(eval.complex().homology_at(0), 1);
        assert_eq!(eval.complex().homology_dims().iter().sum::<usize>(), 1);
    }

    #[test]
    fn sections_over_empty_set_vanish() {
        let p = FinPoset::chain(2);
        let f = PosetRep::constant_unit(p);
        assert!(evaluate(&f, &[]).unwrap().is_empty());
    }

    #[test]
    fn non_open_section_sets_are_rejected() {
        let p = FinPoset::chain(2);
        let f = PosetRep::constant_unit(p);
        assert!(evaluate(&f, &[0]).is_err());
    }

    #[test]
    fn whole_space_with_minimum_gives_bottom_stalk() {
        // extension by zero of the open point of {0 < 1} has no sections:
        // the whole space is the star of 0, where the stalk vanishes
        let p = FinPoset::chain(2);
        let f = PosetRep::indicator(p.clone(), &[1]).unwrap();
        let c = evaluate(&f, &[0, 1]).unwrap();
        assert_eq!(c.homology_dims().iter().sum::<usize>(), 0);
    }

    #[test]
    fn restriction_of_sections_is_a_chain_map() {
        let p = triangle_boundary_poset();
        let f = PosetRep::constant_unit(p.clone());
        let all: Vec<usize> = (0..p.len()).collect();
        let big = NerveEval::over(&f, &all).unwrap();
        let a = p.index_of("a").unwrap();
        let small = NerveEval::over(&f, &p.open_star(a)).unwrap();
        let r = big.projection(&small).unwrap();
        // restriction from the circle to a contractible star is onto in H⁰
        assert_eq!(r.induced_map(0).rank(), 1);
    }

    #[test]
    fn closed_pushforward_places_section_complexes() {
        let p = FinPoset::chain(2);
        let (z, _) = p.induced(&[0]);
        let g = PosetRep::constant_unit(z);
        let i = closed_pushforward(&p, &[0], &g).unwrap();
        assert_eq!(i.stalk(0).homology_at(0), 1);
        assert!(i.stalk(1).is_empty());
        assert!(closed_pushforward(&p, &[1], &g).is_err());
    }

    #[test]
    fn open_pushforward_of_constant_on_open_point() {
        let p = FinPoset::chain(2);
        let (u, _) = p.induced(&[1]);
        let f = PosetRep::constant_unit(u);
        let j = open_pushforward(&p, &[1], &f).unwrap();
        assert_eq!(j.stalk(0).homology_at(0), 1);
        assert_eq!(j.stalk(1).homology_at(0), 1);
        assert_eq!(j.transition_map(0, 1).induced_map(0).rank(), 1);
    }

    #[test]
    fn two_term_stalks_evaluate_consistently() {
        // constant sheaf with a two-term acyclic stalk has no sections
        let p = triangle_boundary_poset();
        let all: Vec<usize> = (0..p.len()).collect();
        let acyclic = crate::chain::BddChainComplex::new(
            0,
            vec![1, 1],
            vec![RatMatrix::identity(1)],
        )
        .unwrap();
        let f = PosetRep::constant(p, &acyclic);
        let c = evaluate(&f, &all).unwrap();
        assert!(c.homology_dims().iter().all(|&d| d == 0));
    }
}
