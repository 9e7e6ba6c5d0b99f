//! Combinatorial maps between formal sums of open sets, presentations of
//! global section complexes by such maps, and closed-image certificates.
//!
//! A combinatorial map sends a row of abstract coefficient spaces `Sc(U_t)`,
//! one per source open set, into a row of spaces `Sc(V_s)`, one per target
//! open set, through a scalar matrix whose entry `(s, t)` may be nonzero only
//! when `U_t ⊆ V_s`. Nothing about the spaces `Sc(U)` is fixed here beyond
//! that containment discipline; a pseudo-free resolution of a representation
//! turns directly into a complex of such maps (one slot per generator, the
//! open set being the generator's star), and any concrete coefficient model
//! can be substituted into the slots afterwards.
//!
//! The certificate machinery witnesses that a combinatorial map has closed
//! image in any such model: peel a closed stratum `Z` of the common cover
//! stratification, restrict to the rows and columns whose sets contain `Z`,
//! record an exact right pseudo-inverse of that submatrix, then recurse on the
//! complement. A certificate replays independently of the code that produced
//! it; every identity in it is exact rational arithmetic.

use std::collections::BTreeSet;

use crate::linalg::RatMatrix;
use crate::poset::FinPoset;
use crate::sheaf::PseudoFreeComplex;
use crate::stratify::{cover_stratification, in_good_position};
use crate::{Error, Result};
use num::Zero;

fn normalize(s: &[usize]) -> Vec<usize> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Both arguments sorted.
fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

/// Both arguments sorted.
fn set_minus(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_err()).collect()
}

/// A scalar matrix between formal sums of open sets. Rows are indexed by the
/// target sets `V_s`, columns by the source sets `U_t`; entry `(s, t)` may be
/// nonzero only when `U_t ⊆ V_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinatorialMap {
    space: FinPoset,
    sources: Vec<Vec<usize>>,
    targets: Vec<Vec<usize>>,
    matrix: RatMatrix,
}

impl CombinatorialMap {
    pub fn new(
        space: FinPoset,
        sources: Vec<Vec<usize>>,
        targets: Vec<Vec<usize>>,
        matrix: RatMatrix,
    ) -> Result<Self> {
        let sources: Vec<Vec<usize>> = sources.iter().map(|s| normalize(s)).collect();
        let targets: Vec<Vec<usize>> = targets.iter().map(|s| normalize(s)).collect();
        for (name, family) in [("source", &sources), ("target", &targets)] {
            for (i, u) in family.iter().enumerate() {
                if u.iter().any(|&p| p >= space.len()) {
                    return Err(Error::invalid(format!(
                        "{name} set {i} has an element outside the space"
                    )));
                }
                if !space.is_up_set(u) {
                    return Err(Error::invalid(format!("{name} set {i} is not an up-set")));
                }
            }
        }
        if matrix.rows() != targets.len() || matrix.cols() != sources.len() {
            return Err(Error::invalid(format!(
                "matrix is {}x{} but there are {} target and {} source sets",
                matrix.rows(),
                matrix.cols(),
                targets.len(),
                sources.len()
            )));
        }
        for s in 0..targets.len() {
            for t in 0..sources.len() {
                if !matrix[(s, t)].is_zero() && !is_subset(&sources[t], &targets[s]) {
                    return Err(Error::invalid(format!(
                        "support condition fails at entry ({s}, {t}): \
                         source set {t} is not contained in target set {s}"
                    )));
                }
            }
        }
        Ok(CombinatorialMap { space, sources, targets, matrix })
    }

    pub fn zero(space: FinPoset, sources: Vec<Vec<usize>>, targets: Vec<Vec<usize>>) -> Result<Self> {
        let m = RatMatrix::zeros(targets.len(), sources.len());
        Self::new(space, sources, targets, m)
    }

    pub fn space(&self) -> &FinPoset {
        &self.space
    }

    pub fn sources(&self) -> &[Vec<usize>] {
        &self.sources
    }

    pub fn targets(&self) -> &[Vec<usize>] {
        &self.targets
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.matrix
    }
}

/// One peeling step of a closed-image certificate. `stratum` is the closed
/// stratum removed at this step, in original element indices; `t1` and `s1`
/// are the source and target sets still containing it; `mbar` is the submatrix
/// over those index sets and `nbar` an exact right pseudo-inverse of it.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateStep {
    pub stratum: Vec<usize>,
    pub t1: Vec<usize>,
    pub s1: Vec<usize>,
    pub mbar: RatMatrix,
    pub nbar: RatMatrix,
}

/// An ordered list of peeling steps that exhausts the space. Validity is
/// defined by [`verify_certificate`], which replays every step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClosedImageCertificate {
    pub steps: Vec<CertificateStep>,
}

/// Membership pattern of one point across a family of sorted sets.
fn membership(family: &[Vec<usize>], p: usize) -> Vec<bool> {
    family.iter().map(|s| s.binary_search(&p).is_ok()).collect()
}

/// Produce a closed-image certificate for `m`.
///
/// Each step stratifies the remaining subspace by the membership pattern of
/// the restricted source and target sets, peels a closed stratum (a minimal
/// nonempty pattern; ties broken by the lexicographically least stratum
/// label), and records the submatrix over the sets that contain the stratum
/// together with an exact right pseudo-inverse. The complement of a closed
/// stratum is automatically in good position relative to the restricted sets;
/// that check failing is an internal error, not an input error.
pub fn certify_closed_image(m: &CombinatorialMap) -> Result<ClosedImageCertificate> {
    let x = m.space();
    let ns = m.sources().len();
    let mut cur: Vec<usize> = (0..x.len()).collect();
    let mut fam: Vec<Vec<usize>> =
        m.sources().iter().chain(m.targets().iter()).cloned().collect();
    let mut steps = Vec::new();
    while !cur.is_empty() {
        if steps.len() > x.len() {
            return Err(Error::internal("closed-image peeling failed to terminate"));
        }
        let (sub, back) = x.induced(&cur);
        let fam_local: Vec<Vec<usize>> = fam
            .iter()
            .map(|s| s.iter().map(|g| back.binary_search(g).unwrap()).collect())
            .collect();
        // Duplicate sets produce the same membership partition, so stratify
        // by the distinct ones; presentations repeat the same open star once
        // per generator, which would otherwise overflow the powerset guard.
        let mut fam_distinct = fam_local.clone();
        fam_distinct.sort();
        fam_distinct.dedup();
        let strat = cover_stratification(&sub, &fam_distinct)?;
        let occupied: BTreeSet<usize> =
            (0..sub.len()).map(|p| strat.map().apply(p)).collect();
        // Masks are subsets of the family index set; `a ⊆ b` is `a & b == a`
        // on the bitmask indices of the stratum poset.
        let label = strat
            .strata_poset()
            .labels()
            .iter()
            .enumerate()
            .filter(|(mask, _)| {
                occupied.contains(mask)
                    && !occupied.iter().any(|&o| o != *mask && o & *mask == o)
            })
            .min_by(|(_, a), (_, b)| a.cmp(b))
            .map(|(mask, _)| mask)
            .expect("a nonempty poset has a minimal occupied stratum");
        let z_local = strat.stratum(label);
        if !sub.is_down_set(&z_local) {
            return Err(Error::internal("minimal stratum is not closed"));
        }
        let v_local: Vec<usize> =
            (0..sub.len()).filter(|p| z_local.binary_search(p).is_err()).collect();
        if !in_good_position(&sub, &v_local, &fam_local)? {
            return Err(Error::internal(
                "peeling a closed stratum left the cover out of good position",
            ));
        }
        let z: Vec<usize> = z_local.iter().map(|&p| back[p]).collect();
        let t1: Vec<usize> = (0..ns).filter(|&t| is_subset(&z, &fam[t])).collect();
        let s1: Vec<usize> =
            (0..m.targets().len()).filter(|&s| is_subset(&z, &fam[ns + s])).collect();
        let mbar = m.matrix().select_rows(&s1).select_cols(&t1);
        let nbar = mbar.right_pseudo_inverse();
        if mbar.matmul(&nbar).matmul(&mbar) != mbar {
            return Err(Error::internal("right pseudo-inverse identity fails"));
        }
        steps.push(CertificateStep { stratum: z.clone(), t1, s1, mbar, nbar });
        cur = set_minus(&cur, &z);
        for s in fam.iter_mut() {
            s.retain(|p| cur.binary_search(p).is_ok());
        }
    }
    Ok(ClosedImageCertificate { steps })
}

/// Replay a certificate against `m`. `None` means every step checks out and
/// the steps exhaust the space; otherwise the index of the first failing step
/// (or `steps.len()` when the space is left nonempty) plus a reason.
///
/// The replay recomputes everything from the map alone: that the stratum is a
/// single nonempty stratum of the cover stratification of the remaining
/// subspace, that it is down-closed there, that its complement is in good
/// position, that the index sets and submatrix match extraction, and that
/// `mbar * nbar * mbar == mbar` exactly.
pub fn certificate_failure(
    m: &CombinatorialMap,
    cert: &ClosedImageCertificate,
) -> Option<(usize, String)> {
    let x = m.space();
    let ns = m.sources().len();
    let mut cur: Vec<usize> = (0..x.len()).collect();
    let mut fam: Vec<Vec<usize>> =
        m.sources().iter().chain(m.targets().iter()).cloned().collect();
    for (i, step) in cert.steps.iter().enumerate() {
        let z = normalize(&step.stratum);
        if z.is_empty() {
            return Some((i, "empty stratum".to_string()));
        }
        if !is_subset(&z, &cur) {
            return Some((i, "stratum is not inside the remaining subspace".to_string()));
        }
        let (sub, back) = x.induced(&cur);
        let z_local: Vec<usize> =
            z.iter().map(|g| back.binary_search(g).unwrap()).collect();
        if !sub.is_down_set(&z_local) {
            return Some((i, "stratum is not closed in the remaining subspace".to_string()));
        }
        let pattern = membership(&fam, z[0]);
        if z.iter().any(|&p| membership(&fam, p) != pattern) {
            return Some((i, "stratum spans several membership patterns".to_string()));
        }
        if set_minus(&cur, &z).iter().any(|&p| membership(&fam, p) == pattern) {
            return Some((i, "stratum does not exhaust its membership pattern".to_string()));
        }
        let v_local: Vec<usize> =
            (0..sub.len()).filter(|p| z_local.binary_search(p).is_err()).collect();
        let fam_local: Vec<Vec<usize>> = fam
            .iter()
            .map(|s| s.iter().map(|g| back.binary_search(g).unwrap()).collect())
            .collect();
        match in_good_position(&sub, &v_local, &fam_local) {
            Ok(true) => {}
            _ => return Some((i, "complement is not in good position".to_string())),
        }
        let t1: Vec<usize> = (0..ns).filter(|&t| is_subset(&z, &fam[t])).collect();
        let s1: Vec<usize> =
            (0..m.targets().len()).filter(|&s| is_subset(&z, &fam[ns + s])).collect();
        if normalize(&step.t1) != t1 {
            return Some((i, "recorded source index set does not match extraction".to_string()));
        }
        if normalize(&step.s1) != s1 {
            return Some((i, "recorded target index set does not match extraction".to_string()));
        }
        let mbar = m.matrix().select_rows(&s1).select_cols(&t1);
        if step.mbar != mbar {
            return Some((i, "recorded submatrix does not match extraction".to_string()));
        }
        if step.nbar.rows() != mbar.cols() || step.nbar.cols() != mbar.rows() {
            return Some((i, "pseudo-inverse has the wrong shape".to_string()));
        }
        if mbar.matmul(&step.nbar).matmul(&mbar) != mbar {
            return Some((i, "pseudo-inverse identity fails".to_string()));
        }
        cur = set_minus(&cur, &z);
        for s in fam.iter_mut() {
            s.retain(|p| cur.binary_search(p).is_ok());
        }
    }
    if !cur.is_empty() {
        return Some((cert.steps.len(), "steps end before the space is exhausted".to_string()));
    }
    None
}

pub fn verify_certificate(m: &CombinatorialMap, cert: &ClosedImageCertificate) -> bool {
    certificate_failure(m, cert).is_none()
}

/// A bounded complex of combinatorial maps. `slots[i]` lists the open sets at
/// degree `lo + i`; `maps[i]` is the differential from degree `lo + i + 1`
/// into degree `lo + i`, so `maps[i].sources() == slots[i + 1]` and
/// `maps[i].targets() == slots[i]`. Consecutive differentials compose to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinatorialComplex {
    space: FinPoset,
    lo: i64,
    slots: Vec<Vec<Vec<usize>>>,
    maps: Vec<CombinatorialMap>,
}

impl CombinatorialComplex {
    pub fn new(
        space: FinPoset,
        lo: i64,
        slots: Vec<Vec<Vec<usize>>>,
        maps: Vec<CombinatorialMap>,
    ) -> Result<Self> {
        let slots: Vec<Vec<Vec<usize>>> =
            slots.iter().map(|d| d.iter().map(|s| normalize(s)).collect()).collect();
        for (i, degree) in slots.iter().enumerate() {
            for (t, u) in degree.iter().enumerate() {
                if u.iter().any(|&p| p >= space.len()) || !space.is_up_set(u) {
                    return Err(Error::invalid(format!(
                        "slot {t} at degree {} is not an up-set of the space",
                        lo + i as i64
                    )));
                }
            }
        }
        if maps.len() != slots.len().saturating_sub(1) {
            return Err(Error::invalid(format!(
                "complex with {} degrees needs {} differentials, got {}",
                slots.len(),
                slots.len().saturating_sub(1),
                maps.len()
            )));
        }
        for (i, d) in maps.iter().enumerate() {
            if d.space() != &space {
                return Err(Error::invalid(format!("differential {i} lives on a different space")));
            }
            if d.sources() != slots[i + 1] || d.targets() != slots[i] {
                return Err(Error::invalid(format!(
                    "differential {i} does not connect the slots at degrees {} and {}",
                    lo + i as i64 + 1,
                    lo + i as i64
                )));
            }
        }
        for i in 0..maps.len().saturating_sub(1) {
            if !maps[i].matrix().matmul(maps[i + 1].matrix()).is_zero() {
                return Err(Error::invalid(format!(
                    "differentials {} and {} do not compose to zero",
                    i + 1,
                    i
                )));
            }
        }
        Ok(CombinatorialComplex { space, lo, slots, maps })
    }

    pub fn space(&self) -> &FinPoset {
        &self.space
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn degrees(&self) -> usize {
        self.slots.len()
    }

    pub fn slots_at(&self, i: usize) -> &[Vec<usize>] {
        &self.slots[i]
    }

    pub fn maps(&self) -> &[CombinatorialMap] {
        &self.maps
    }
}

/// Present a pseudo-free complex combinatorially: each generator at element
/// `p` becomes a slot for the open star `p⋆`, and the differential matrices
/// carry over verbatim. The pseudo-free support condition (entries only from
/// generators at larger elements to generators at smaller ones) is exactly the
/// containment condition on the stars, so the construction cannot fail.
pub fn presentation_from_resolution(c: &PseudoFreeComplex) -> CombinatorialComplex {
    let base = c.base();
    let slots: Vec<Vec<Vec<usize>>> = c
        .terms()
        .iter()
        .map(|gens| gens.iter().map(|&p| base.open_star(p)).collect())
        .collect();
    let maps: Vec<CombinatorialMap> = (0..c.terms().len().saturating_sub(1))
        .map(|i| {
            CombinatorialMap::new(
                base.clone(),
                slots[i + 1].clone(),
                slots[i].clone(),
                c.diff(i).clone(),
            )
            .expect("pseudo-free support carries over to open stars")
        })
        .collect();
    CombinatorialComplex::new(base.clone(), c.lo(), slots, maps)
        .expect("pseudo-free differentials square to zero")
}

/// Substitute the pointwise coefficient model into a presentation: the slot
/// for an open set `U` becomes a space with one coordinate per point of `U`
/// (the sections of the sheaf of pointwise functions, whose structure maps
/// are coordinate projections), and a scalar entry into a slot for `V ⊇ U`
/// acts by extending coordinates by zero. The result is an ordinary bounded
/// complex whose homology can be compared against section computations done
/// entirely on the representation side.
pub fn substitute_pointwise(c: &CombinatorialComplex) -> crate::chain::BddChainComplex {
    let dims: Vec<usize> =
        (0..c.degrees()).map(|i| c.slots_at(i).iter().map(Vec::len).sum()).collect();
    let offsets = |sets: &[Vec<usize>]| -> Vec<usize> {
        let mut off = Vec::with_capacity(sets.len());
        let mut acc = 0;
        for s in sets {
            off.push(acc);
            acc += s.len();
        }
        off
    };
    let diffs: Vec<RatMatrix> = c
        .maps()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let tgt = d.targets();
            let src = d.sources();
            let toff = offsets(tgt);
            let soff = offsets(src);
            let mut m = RatMatrix::zeros(dims[i], dims[i + 1]);
            for s in 0..tgt.len() {
                for t in 0..src.len() {
                    let entry = &d.matrix()[(s, t)];
                    if entry.is_zero() {
                        continue;
                    }
                    for (col, p) in src[t].iter().enumerate() {
                        let row = tgt[s].binary_search(p).expect("support condition");
                        m[(toff[s] + row, soff[t] + col)] = entry.clone();
                    }
                }
            }
            m
        })
        .collect();
    crate::chain::BddChainComplex::new(c.lo(), dims, diffs)
        .expect("substitution preserves composing to zero")
}

/// Resolve a representation and present the result combinatorially. The
/// returned complex stands in for the global section complex of the
/// representation with abstract coefficient slots; substitute a concrete
/// model to get numbers.
pub fn global_sections_homology_presentation(
    f: &crate::sheaf::PosetRep,
) -> Result<CombinatorialComplex> {
    let resolution = crate::sheaf::pseudo_free_resolve(f)?;
    Ok(presentation_from_resolution(&resolution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::BddChainComplex;
    use crate::linalg::{rat, ratio};
    use crate::sheaf::{evaluate, pseudo_free_resolve, PosetRep};
    use std::collections::BTreeMap;

    fn edge_poset() -> FinPoset {
        FinPoset::from_covers(
            vec!["a".into(), "b".into(), "ab".into()],
            &[("a".into(), "ab".into()), ("b".into(), "ab".into())],
        )
        .unwrap()
    }

    #[test]
    fn support_condition_is_enforced() {
        let x = FinPoset::chain(2);
        let err = CombinatorialMap::new(
            x,
            vec![vec![0, 1]],
            vec![vec![1]],
            RatMatrix::from_ints(&[&[1]]),
        );
        assert!(err.is_err());
    }

    #[test]
    fn scaling_map_certificate_is_one_step_with_exact_inverse() {
        let x = FinPoset::singleton("pt");
        let m = CombinatorialMap::new(
            x,
            vec![vec![0]],
            vec![vec![0]],
            RatMatrix::from_ints(&[&[2]]),
        )
        .unwrap();
        let cert = certify_closed_image(&m).unwrap();
        assert_eq!(cert.steps.len(), 1);
        let step = &cert.steps[0];
        assert_eq!(step.stratum, vec![0]);
        assert_eq!(step.t1, vec![0]);
        assert_eq!(step.s1, vec![0]);
        assert_eq!(step.mbar, RatMatrix::from_ints(&[&[2]]));
        assert_eq!(step.nbar[(0, 0)], ratio(1, 2));
        assert!(verify_certificate(&m, &cert));
    }

    #[test]
    fn zero_map_certificate_has_zero_inverses() {
        let x = FinPoset::chain(2);
        let m = CombinatorialMap::new(
            x,
            vec![vec![1]],
            vec![vec![0, 1]],
            RatMatrix::zeros(1, 1),
        )
        .unwrap();
        let cert = certify_closed_image(&m).unwrap();
        assert_eq!(cert.steps.len(), 2);
        for step in &cert.steps {
            assert!(step.mbar.is_zero());
            assert!(step.nbar.is_zero());
        }
        assert!(verify_certificate(&m, &cert));
    }

    #[test]
    fn skyscraper_presentation_matches_the_interval_resolution() {
        let x = FinPoset::chain(2);
        let f = PosetRep::skyscraper(x, 0, &BddChainComplex::unit());
        let pres = global_sections_homology_presentation(&f).unwrap();
        assert_eq!(pres.lo(), 0);
        assert_eq!(pres.degrees(), 2);
        assert_eq!(pres.slots_at(0), &[vec![0, 1]]);
        assert_eq!(pres.slots_at(1), &[vec![1]]);
        assert_eq!(*pres.maps()[0].matrix(), RatMatrix::from_ints(&[&[1]]));
    }

    #[test]
    fn edge_presentation_has_the_documented_sign_convention() {
        let x = edge_poset();
        let f = PosetRep::constant_unit(x);
        let pres = global_sections_homology_presentation(&f).unwrap();
        assert_eq!(pres.degrees(), 2);
        assert_eq!(pres.slots_at(0), &[vec![0, 2], vec![1, 2]]);
        assert_eq!(pres.slots_at(1), &[vec![2]]);
        assert_eq!(*pres.maps()[0].matrix(), RatMatrix::from_ints(&[&[1], &[-1]]));
    }

    #[test]
    fn edge_certificate_peels_vertices_before_the_interior() {
        let x = edge_poset();
        let f = PosetRep::constant_unit(x);
        let pres = global_sections_homology_presentation(&f).unwrap();
        let m = &pres.maps()[0];
        let cert = certify_closed_image(m).unwrap();
        assert_eq!(cert.steps.len(), 3);
        assert_eq!(cert.steps[0].stratum, vec![0]);
        assert_eq!(cert.steps[1].stratum, vec![1]);
        assert_eq!(cert.steps[2].stratum, vec![2]);
        assert!(cert.steps[0].t1.is_empty());
        assert_eq!(cert.steps[0].s1, vec![0]);
        assert!(cert.steps[1].t1.is_empty());
        assert_eq!(cert.steps[1].s1, vec![1]);
        assert_eq!(cert.steps[2].t1, vec![0]);
        assert_eq!(cert.steps[2].s1, vec![0, 1]);
        assert_eq!(cert.steps[2].mbar, RatMatrix::from_ints(&[&[1], &[-1]]));
        assert!(verify_certificate(m, &cert));
    }

    #[test]
    fn tampered_certificates_are_rejected_with_a_located_step() {
        let x = edge_poset();
        let f = PosetRep::constant_unit(x);
        let pres = global_sections_homology_presentation(&f).unwrap();
        let m = &pres.maps()[0];
        let good = certify_closed_image(m).unwrap();

        let mut corrupted = good.clone();
        corrupted.steps[2].nbar[(0, 0)] = rat(5);
        corrupted.steps[2].nbar[(0, 1)] = rat(7);
        let fail = certificate_failure(m, &corrupted).unwrap();
        assert_eq!(fail.0, 2);

        let mut swapped = good.clone();
        swapped.steps.swap(0, 2);
        let fail = certificate_failure(m, &swapped).unwrap();
        assert_eq!(fail.0, 0);

        let mut wrong_t1 = good.clone();
        wrong_t1.steps[2].t1 = vec![];
        assert!(certificate_failure(m, &wrong_t1).is_some());

        let mut truncated = good.clone();
        truncated.steps.pop();
        let fail = certificate_failure(m, &truncated).unwrap();
        assert_eq!(fail.0, 2);

        assert!(verify_certificate(m, &good));
    }

    #[test]
    fn indicator_presents_as_a_single_slot() {
        let x = FinPoset::chain(3);
        let f = PosetRep::indicator(x, &[1, 2]).unwrap();
        let pres = global_sections_homology_presentation(&f).unwrap();
        assert_eq!(pres.degrees(), 1);
        assert_eq!(pres.slots_at(0), &[vec![1, 2]]);
        assert!(pres.maps().is_empty());
    }

    #[test]
    fn complexes_must_compose_to_zero() {
        let x = FinPoset::chain(2);
        let star0 = vec![0, 1];
        let star1 = vec![1];
        let d0 = CombinatorialMap::new(
            x.clone(),
            vec![star1.clone()],
            vec![star0.clone()],
            RatMatrix::from_ints(&[&[1]]),
        )
        .unwrap();
        let d1 = CombinatorialMap::new(
            x.clone(),
            vec![star1.clone()],
            vec![star1.clone()],
            RatMatrix::from_ints(&[&[1]]),
        )
        .unwrap();
        let err = CombinatorialComplex::new(
            x,
            0,
            vec![vec![star0], vec![star1.clone()], vec![star1]],
            vec![d0, d1],
        );
        assert!(err.is_err());
    }

    /// The pointwise model substituted into a presentation of `F` computes
    /// the sections of `F` with one fiber per point; the representation side
    /// computes the same thing as the derived sections over each open star.
    #[test]
    fn substitution_agrees_with_starwise_section_computations() {
        let edge = edge_poset();
        let samples: Vec<PosetRep> = vec![
            PosetRep::constant_unit(edge.clone()),
            PosetRep::skyscraper(FinPoset::chain(2), 0, &BddChainComplex::unit()),
            PosetRep::indicator(FinPoset::chain(3), &[2]).unwrap(),
            PosetRep::constant(
                FinPoset::chain(2),
                &BddChainComplex::new(
                    0,
                    vec![1, 1],
                    vec![RatMatrix::from_ints(&[&[0]])],
                )
                .unwrap(),
            ),
        ];
        for f in &samples {
            let pres = global_sections_homology_presentation(f).unwrap();
            let model = substitute_pointwise(&pres);
            let mut starwise: BTreeMap<i64, usize> = BTreeMap::new();
            for p in 0..f.base().len() {
                let c = evaluate(f, &f.base().open_star(p)).unwrap();
                if let Some((lo, hi)) = c.range() {
                    for k in lo..=hi {
                        *starwise.entry(k).or_default() += c.homology_at(k);
                    }
                }
            }
            for k in -4..6 {
                assert_eq!(
                    model.homology_at(k),
                    starwise.get(&k).copied().unwrap_or(0),
                    "degree {k} mismatch"
                );
            }
        }
    }

    #[test]
    fn substituted_edge_presentation_has_three_independent_sections() {
        let f = PosetRep::constant_unit(edge_poset());
        let pres = global_sections_homology_presentation(&f).unwrap();
        let model = substitute_pointwise(&pres);
        assert_eq!(model.homology_at(0), 3);
        assert_eq!(model.homology_at(1), 0);
    }

    #[test]
    fn certificates_cover_every_differential_of_a_presentation() {
        let square = FinPoset::chain(2).product(&FinPoset::chain(2));
        let samples: Vec<PosetRep> = vec![
            PosetRep::constant_unit(FinPoset::chain(3)),
            PosetRep::constant_unit(square),
            PosetRep::skyscraper(FinPoset::chain(3), 1, &BddChainComplex::unit()),
        ];
        for f in &samples {
            let pres = global_sections_homology_presentation(f).unwrap();
            for m in pres.maps() {
                let cert = certify_closed_image(m).unwrap();
                assert!(verify_certificate(m, &cert));
                let strata: BTreeSet<Vec<bool>> = (0..f.base().len())
                    .map(|p| {
                        membership(
                            &m.sources()
                                .iter()
                                .chain(m.targets().iter())
                                .cloned()
                                .collect::<Vec<_>>(),
                            p,
                        )
                    })
                    .collect();
                assert!(cert.steps.len() <= strata.len());
            }
        }
    }

    #[test]
    fn resolve_then_certify_roundtrip_on_a_disconnected_space() {
        let x = FinPoset::antichain(3);
        let f = PosetRep::constant_unit(x);
        let q = pseudo_free_resolve(&f).unwrap();
        let pres = presentation_from_resolution(&q);
        for m in pres.maps() {
            let cert = certify_closed_image(m).unwrap();
            assert!(verify_certificate(m, &cert));
        }
        let model = substitute_pointwise(&pres);
        assert_eq!(model.homology_at(0), 3);
    }
}
