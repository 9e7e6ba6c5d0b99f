//! The two gluing sequences attached to an open/closed decomposition.
//!
//! For an up-set `U` with closed complement `Z`, every representation `F`
//! sits in `j_!j*F → F → i_*i*F` and `i_*i^!F → F → j_*j*F`. Both are built
//! with explicit stalkwise maps and null-homotopies and certified exact by
//! comparing against the mapping fiber in every stalk.

use super::nerve::pushforward_with_layouts;
use super::{PosetRep, RepMap};
use crate::chain::{fiber_comparison, ChainMap, Homotopy};
use crate::linalg::RatMatrix;
use crate::{Error, Result};

/// A candidate exact sequence of representations whose maps are recorded
/// per stalk: `first →α middle →β third` with `h_p` witnessing
/// `β_p ∘ α_p ≃ 0`.
#[derive(Clone, Debug)]
pub struct StalkwiseTriangle {
    first: PosetRep,
    middle: PosetRep,
    third: PosetRep,
    alphas: Vec<ChainMap>,
    betas: Vec<ChainMap>,
    homotopies: Vec<Homotopy>,
}

impl StalkwiseTriangle {
    pub fn first(&self) -> &PosetRep {
        &self.first
    }

    pub fn middle(&self) -> &PosetRep {
        &self.middle
    }

    pub fn third(&self) -> &PosetRep {
        &self.third
    }

    pub fn stalk_maps(&self, p: usize) -> (&ChainMap, &ChainMap, &Homotopy) {
        (&self.alphas[p], &self.betas[p], &self.homotopies[p])
    }

    /// Exactness at every element: the comparison into the mapping fiber of
    /// `β_p` must be a quasi-isomorphism.
    pub fn verify(&self) -> Result<()> {
        for p in 0..self.middle.base().len() {
            let cmp = fiber_comparison(&self.alphas[p], &self.betas[p], &self.homotopies[p])?;
            if !cmp.is_quasi_iso() {
                return Err(Error::verification(format!(
                    "sequence is not exact at element {}",
                    self.middle.base().label(p)
                )));
            }
        }
        Ok(())
    }
}

/// Builds and certifies both gluing sequences of `f` along the up-set `u`.
pub fn recollement_triangle(
    f: &PosetRep,
    u: &[usize],
) -> Result<(StalkwiseTriangle, StalkwiseTriangle)> {
    let base = f.base().clone();
    if !base.is_up_set(u) {
        return Err(Error::invalid("recollement needs an up-set"));
    }
    let mut su = u.to_vec();
    su.sort_unstable();
    su.dedup();
    let z: Vec<usize> = (0..base.len()).filter(|p| su.binary_search(p).is_err()).collect();
    let in_u = |p: usize| su.binary_search(&p).is_ok();
    let (lo_f, hi_f) = f.degree_range();

    let jstar = f.restrict(&su);
    let istar = f.restrict(&z);

    // extension sequence: j_!j*F → F → i_*i*F
    let first_a = PosetRep::extend_by_zero(&base, &su, &jstar)?;
    let (third_a, layouts_a) = pushforward_with_layouts(&base, &z, &istar)?;
    let mut alphas_a = Vec::new();
    let mut betas_a = Vec::new();
    let mut homotopies_a = Vec::new();
    for p in 0..base.len() {
        let mats = (lo_f..=hi_f)
            .map(|k| {
                if in_u(p) {
                    RatMatrix::identity(f.stalk(p).dim_at(k))
                } else {
                    RatMatrix::zeros(f.stalk(p).dim_at(k), 0)
                }
            })
            .collect();
        alphas_a.push(ChainMap::new(
            first_a.stalk(p).clone(),
            f.stalk(p).clone(),
            lo_f,
            mats,
        )?);
        // unit into the sections of F over p⋆ ∩ Z; empty (hence zero) on U
        let beta = layouts_a[p].unit_via(f.stalk(p), |q_local, m| {
            f.transition_at(p, z[q_local], m)
        })?;
        betas_a.push(beta);
        homotopies_a.push(Homotopy { lo: 0, mats: Vec::new() });
    }
    let seq_a = StalkwiseTriangle {
        first: first_a,
        middle: f.clone(),
        third: third_a,
        alphas: alphas_a,
        betas: betas_a,
        homotopies: homotopies_a,
    };
    seq_a.verify()?;

    // sections sequence: i_*i^!F → F → j_*j*F
    let (jpush, layouts_u) = pushforward_with_layouts(&base, &su, &jstar)?;
    let mut psis = Vec::new();
    for p in 0..base.len() {
        psis.push(layouts_u[p].unit_via(f.stalk(p), |q_local, m| {
            f.transition_at(p, su[q_local], m)
        })?);
    }
    let psi_rep = {
        let span_lo = lo_f.min(jpush.degree_range().0);
        let span_hi = hi_f.max(jpush.degree_range().1);
        let mats: Vec<Vec<RatMatrix>> = (0..base.len())
            .map(|p| (span_lo..=span_hi).map(|k| psis[p].at(k)).collect())
            .collect();
        RepMap::new(f.clone(), jpush.clone(), span_lo, mats)
            .map_err(|e| Error::internal(format!("unit is not natural: {e}")))?
    };
    let g = psi_rep.rep_mapping_fiber()?;
    let i_shriek = g.restrict(&z);
    let (first_b, layouts_b) = pushforward_with_layouts(&base, &z, &i_shriek)?;

    let mut alphas_b = Vec::new();
    let mut homotopies_b = Vec::new();
    for p in 0..base.len() {
        if let Ok(z_local) = z.binary_search(&p) {
            let ev = layouts_b[p].ev(&i_shriek, z_local)?;
            // the fiber stalk at p is F_n ⊕ (j_*j*F)_{n+1}: project out either leg
            let fib = i_shriek.stalk(z_local).clone();
            let (flo, fhi) = fib.range().unwrap_or((0, -1));
            let pi_mats: Vec<RatMatrix> = (flo..=fhi)
                .map(|n| {
                    let fd = f.stalk(p).dim_at(n);
                    let jd = jpush.stalk(p).dim_at(n + 1);
                    RatMatrix::identity(fd).hstack(&RatMatrix::zeros(fd, jd))
                })
                .collect();
            let pi = ChainMap::new(fib.clone(), f.stalk(p).clone(), flo, pi_mats)?;
            alphas_b.push(pi.compose(&ev)?);
            let h_mats: Vec<RatMatrix> = (flo..=fhi)
                .map(|n| {
                    let fd = f.stalk(p).dim_at(n);
                    let jd = jpush.stalk(p).dim_at(n + 1);
                    let proj2 = RatMatrix::zeros(jd, fd).hstack(&RatMatrix::identity(jd));
                    proj2.matmul(&ev.at(n))
                })
                .collect();
            homotopies_b.push(Homotopy { lo: flo, mats: h_mats });
        } else {
            alphas_b.push(ChainMap::zero(first_b.stalk(p).clone(), f.stalk(p).clone()));
            homotopies_b.push(Homotopy { lo: 0, mats: Vec::new() });
        }
    }
    let seq_b = StalkwiseTriangle {
        first: first_b,
        middle: f.clone(),
        third: jpush,
        alphas: alphas_b,
        betas: psis,
        homotopies: homotopies_b,
    };
    seq_b.verify()?;

    Ok((seq_a, seq_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::BddChainComplex;
    use crate::poset::FinPoset;
    use std::collections::BTreeMap;

    #[test]
    fn constant_on_the_interval_splits_as_expected() {
        let p = FinPoset::chain(2);
        let f = PosetRep::constant_unit(p);
        let (a, b) = recollement_triangle(&f, &[1]).unwrap();
        // j_!j*F has stalks (0, ℚ); i_*i*F has stalks (ℚ, 0)
        assert!(a.first().stalk(0).is_empty());
        assert_eq!(a.first().stalk(1).homology_at(0), 1);
        assert_eq!(a.third().stalk(0).homology_at(0), 1);
        assert!(a.third().stalk(1).is_empty());
        // j_*j*F is constant here; i_*i^!F is stalkwise acyclic
        assert_eq!(b.third().stalk(0).homology_at(0), 1);
        assert_eq!(b.third().stalk(1).homology_at(0), 1);
        for p in 0..2 {
            assert!(b.first().stalk(p).homology_dims().iter().all(|&d| d == 0));
        }
    }

    #[test]
    fn skyscraper_at_closed_point_pushes_through() {
        let p = FinPoset::chain(2);
        let f = PosetRep::skyscraper(p, 0, &BddChainComplex::unit());
        let (a, b) = recollement_triangle(&f, &[1]).unwrap();
        assert!(a.first().is_zero());
        assert_eq!(a.third().stalk(0).homology_at(0), 1);
        assert!(b.third().stalk(0).is_empty());
        assert_eq!(b.first().stalk(0).homology_at(0), 1);
    }

    #[test]
    fn skyscraper_at_open_point_shifts_the_costalk() {
        let p = FinPoset::chain(2);
        let f = PosetRep::skyscraper(p, 1, &BddChainComplex::unit());
        let (a, b) = recollement_triangle(&f, &[1]).unwrap();
        assert_eq!(a.first().stalk(1).homology_at(0), 1);
        assert!(a.third().is_zero());
        // j_*j* of the open skyscraper is constant; i^! records the
        // difference one degree down
        assert_eq!(b.third().stalk(0).homology_at(0), 1);
        assert_eq!(b.first().stalk(0).homology_at(-1), 1);
    }

    #[test]
    fn degenerate_open_sets_still_verify() {
        let p = FinPoset::chain(3);
        let f = PosetRep::constant_unit(p.clone());
        recollement_triangle(&f, &[0, 1, 2]).unwrap();
        recollement_triangle(&f, &[]).unwrap();
        assert!(recollement_triangle(&f, &[0]).is_err());
    }

    #[test]
    fn two_degree_stalks_glue_on_the_square() {
        let base = FinPoset::from_covers(
            vec!["b".into(), "m1".into(), "m2".into(), "t".into()],
            &[
                ("b".into(), "m1".into()),
                ("b".into(), "m2".into()),
                ("m1".into(), "t".into()),
                ("m2".into(), "t".into()),
            ],
        )
        .unwrap();
        let two = BddChainComplex::new(0, vec![1, 1], vec![RatMatrix::zeros(1, 1)]).unwrap();
        let f = PosetRep::constant(base.clone(), &two);
        let u: Vec<usize> = vec![1, 2, 3];
        let (a, b) = recollement_triangle(&f, &u).unwrap();
        a.verify().unwrap();
        b.verify().unwrap();
        // the closed complement is the bottom point; its costalk sees the
        // punctured-square cohomology one degree down
        assert_eq!(a.third().stalk(0).homology_at(0), 1);
        let sky = PosetRep::new(
            base,
            vec![
                BddChainComplex::unit(),
                BddChainComplex::zero(),
                BddChainComplex::zero(),
                BddChainComplex::zero(),
            ],
            &BTreeMap::new(),
        )
        .unwrap();
        let (sa, sb) = recollement_triangle(&sky, &u).unwrap();
        sa.verify().unwrap();
        sb.verify().unwrap();
    }
}
