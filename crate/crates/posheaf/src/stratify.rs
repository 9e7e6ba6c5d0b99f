//! Stratifications of finite posets: monotone maps into stratum posets,
//! the cover stratification, properness checking, and recursive proper
//! refinement of a family of locally closed subsets.

use crate::poset::{FinPoset, MonotoneMap};
use crate::{Error, Result};

/// A stratification is a monotone map from the space to a stratum poset.
/// Strata are the fibers; they may be empty unless the stratification is
/// proper.
#[derive(Clone, Debug)]
pub struct Stratification {
    map: MonotoneMap,
}

fn inter(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

fn diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_err()).collect()
}

impl Stratification {
    pub fn new(map: MonotoneMap) -> Self {
        Stratification { map }
    }

    pub fn space(&self) -> &FinPoset {
        self.map.source()
    }

    pub fn strata_poset(&self) -> &FinPoset {
        self.map.target()
    }

    pub fn map(&self) -> &MonotoneMap {
        &self.map
    }

    /// The fiber over stratum `p`, sorted.
    pub fn stratum(&self, p: usize) -> Vec<usize> {
        self.map.fiber(p)
    }

    pub fn strata(&self) -> Vec<Vec<usize>> {
        (0..self.strata_poset().len()).map(|p| self.stratum(p)).collect()
    }

    /// `None` when proper; otherwise the first stratum that is empty or whose
    /// closure differs from the union of the strata below it.
    pub fn properness_witness(&self) -> Option<usize> {
        let x = self.space();
        let p = self.strata_poset();
        for t in 0..p.len() {
            let fiber = self.stratum(t);
            if fiber.is_empty() {
                return Some(t);
            }
            let closure = x.down_closure(&fiber);
            let mut below: Vec<usize> = (0..p.len())
                .filter(|&q| p.leq(q, t))
                .flat_map(|q| self.stratum(q))
                .collect();
            below.sort_unstable();
            if closure != below {
                return Some(t);
            }
        }
        None
    }

    pub fn is_proper(&self) -> bool {
        self.properness_witness().is_none()
    }
}

/// `α(x) = {i : x ∈ U_i}` into the full powerset of the index set, ordered
/// by inclusion. Subset `{i, j}` is labeled `"{i,j}"`; indices are 0-based.
/// Uncovered points land on `"{}"`. Each cover member must be an up-set.
pub fn cover_stratification(x: &FinPoset, cover: &[Vec<usize>]) -> Result<Stratification> {
    let n = cover.len();
    if n > 12 {
        return Err(Error::invalid(
            "cover stratification with more than 12 sets is not supported".to_string(),
        ));
    }
    for (i, u) in cover.iter().enumerate() {
        if u.iter().any(|&p| p >= x.len()) {
            return Err(Error::invalid(format!("cover set {i} has an element outside the space")));
        }
        if !x.is_up_set(u) {
            return Err(Error::invalid(format!("cover set {i} is not an up-set")));
        }
    }
    let labels: Vec<String> = (0u32..1 << n)
        .map(|mask| {
            let parts: Vec<String> =
                (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| i.to_string()).collect();
            format!("{{{}}}", parts.join(","))
        })
        .collect();
    let size = 1usize << n;
    let mut leq = vec![false; size * size];
    for a in 0..size {
        for b in 0..size {
            leq[a * size + b] = a & b == a;
        }
    }
    let strata = FinPoset::from_leq(labels, leq)?;
    let sorted_cover: Vec<Vec<usize>> = cover.iter().map(|u| {
        let mut v = u.clone();
        v.sort_unstable();
        v.dedup();
        v
    }).collect();
    let assignment: Vec<usize> = (0..x.len())
        .map(|p| {
            (0..n).fold(0usize, |mask, i| {
                if sorted_cover[i].binary_search(&p).is_ok() { mask | 1 << i } else { mask }
            })
        })
        .collect();
    Ok(Stratification::new(MonotoneMap::new(x.clone(), strata, assignment)?))
}

/// `true` iff every member of `sets` is contained in `V` or covers its
/// complement (`U ∪ V = X`); equivalently `X∖V` is contained in or disjoint
/// from each member. All sets must be up-sets.
pub fn in_good_position(x: &FinPoset, v: &[usize], sets: &[Vec<usize>]) -> Result<bool> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    if !x.is_up_set(&v) {
        return Err(Error::invalid("good-position test: V is not an up-set"));
    }
    let all: Vec<usize> = (0..x.len()).collect();
    let z = diff(&all, &v);
    for (i, u) in sets.iter().enumerate() {
        let mut u = u.clone();
        u.sort_unstable();
        u.dedup();
        if !x.is_up_set(&u) {
            return Err(Error::invalid(format!("good-position test: set {i} is not an up-set")));
        }
        let met = inter(&z, &u);
        if !met.is_empty() && met != z {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Drops empty members, normalizes, and deduplicates while preserving the
/// order of first occurrence.
fn normalize_family(theta: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in theta {
        let mut v = s.clone();
        v.sort_unstable();
        v.dedup();
        if !v.is_empty() && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// The recursive refinement worker. `sub` is the current subspace (parent
/// indices, sorted); `theta` members are subsets of `sub`. Returns labeled
/// strata partitioning `sub`; labels record the recursion path.
///
/// Closure inside the subspace is closure in the parent intersected with
/// `sub`, because `sub` always carries the induced order.
fn refine_rec(
    x: &FinPoset,
    sub: &[usize],
    theta: &[Vec<usize>],
    path: &str,
    out: &mut Vec<(String, Vec<usize>)>,
) {
    if sub.is_empty() {
        return;
    }
    let theta = normalize_family(theta);
    if theta.is_empty() {
        for (i, comp) in x.components_within(sub).into_iter().enumerate() {
            out.push((format!("{path}c{i}"), comp));
        }
        return;
    }
    let cl = |s: &[usize]| inter(&x.down_closure(s), sub);
    let s0 = &theta[0];
    let rest = &theta[1..];
    let u = diff(sub, &cl(s0));

    if u.is_empty() {
        // cl(S₀) = sub, so S₀ is open and dense: split into M = S₀ and the
        // lower-dimensional closed complement Z = ∂S₀.
        let m = s0.clone();
        let z = diff(sub, &m);
        let theta_m: Vec<Vec<usize>> = rest.iter().map(|s| inter(s, &m)).collect();
        let mut m_strata = Vec::new();
        refine_rec(x, &m, &theta_m, &format!("{path}U."), &mut m_strata);
        let mut theta_z: Vec<Vec<usize>> =
            m_strata.iter().map(|(_, r)| inter(&cl(r), &z)).collect();
        theta_z.push(inter(&cl(&m), &z));
        theta_z.extend(theta.iter().map(|s| inter(s, &z)));
        out.append(&mut m_strata);
        refine_rec(x, &z, &theta_z, &format!("{path}Z."), out);
        return;
    }

    let v = diff(sub, &cl(&u));
    let z = diff(&cl(&u), &u);

    let theta_u: Vec<Vec<usize>> = rest.iter().map(|s| inter(s, &u)).collect();
    let mut u_strata = Vec::new();
    refine_rec(x, &u, &theta_u, &format!("{path}U."), &mut u_strata);

    // S₀'s trace on V joins the collection so S₀ stays a union of strata.
    let mut theta_v: Vec<Vec<usize>> = rest.iter().map(|s| inter(s, &v)).collect();
    theta_v.push(inter(s0, &v));
    let mut v_strata = Vec::new();
    refine_rec(x, &v, &theta_v, &format!("{path}V."), &mut v_strata);

    // Z must refine the closure traces of every stratum already produced,
    // of S₀ itself, and of all of Θ.
    let mut theta_z: Vec<Vec<usize>> = u_strata
        .iter()
        .chain(v_strata.iter())
        .map(|(_, r)| inter(&cl(r), &z))
        .collect();
    theta_z.push(inter(&cl(s0), &z));
    theta_z.extend(theta.iter().map(|s| inter(s, &z)));

    out.append(&mut u_strata);
    out.append(&mut v_strata);
    refine_rec(x, &z, &theta_z, &format!("{path}Z."), out);
}

/// Builds a proper stratification of `X` such that every member of `theta`
/// is a union of strata. Members must be locally closed. The stratum poset
/// carries the frontier order `S ≤ S′ iff S ⊆ cl(S′)`.
pub fn proper_refine(x: &FinPoset, theta: &[Vec<usize>]) -> Result<Stratification> {
    for (i, s) in theta.iter().enumerate() {
        if s.iter().any(|&p| p >= x.len()) {
            return Err(Error::invalid(format!("set {i} has an element outside the space")));
        }
        if !x.is_locally_closed(s) {
            return Err(Error::invalid(format!("set {i} is not locally closed")));
        }
    }
    let all: Vec<usize> = (0..x.len()).collect();
    let mut pieces = Vec::new();
    refine_rec(x, &all, theta, "", &mut pieces);

    let n = pieces.len();
    let labels: Vec<String> = pieces.iter().map(|(l, _)| l.clone()).collect();
    let closures: Vec<Vec<usize>> = pieces.iter().map(|(_, s)| x.down_closure(s)).collect();
    let mut leq = vec![false; n * n];
    for a in 0..n {
        for b in 0..n {
            leq[a * n + b] =
                a == b || pieces[a].1.iter().all(|p| closures[b].binary_search(p).is_ok());
        }
    }
    let strata = FinPoset::from_leq(labels, leq)
        .map_err(|e| Error::internal(format!("frontier order is not a partial order: {e}")))?;

    let mut assignment = vec![usize::MAX; x.len()];
    for (t, (_, s)) in pieces.iter().enumerate() {
        for &p in s {
            assert!(assignment[p] == usize::MAX, "strata overlap");
            assignment[p] = t;
        }
    }
    assert!(assignment.iter().all(|&t| t != usize::MAX), "strata do not cover the space");
    let map = MonotoneMap::new(x.clone(), strata, assignment)
        .map_err(|e| Error::internal(format!("refinement map is not monotone: {e}")))?;
    Ok(Stratification::new(map))
}

/// Properly refines an arbitrary stratification and returns the refinement
/// together with the factoring map `ψ` (old stratum of each new stratum), so
/// that `old = ψ ∘ new`.
pub fn refine_stratification(s: &Stratification) -> Result<(Stratification, MonotoneMap)> {
    let theta: Vec<Vec<usize>> = s.strata();
    let refined = proper_refine(s.space(), &theta)?;
    let psi: Vec<usize> = (0..refined.strata_poset().len())
        .map(|q| {
            let fiber = refined.stratum(q);
            let old = s.map().apply(fiber[0]);
            assert!(
                fiber.iter().all(|&p| s.map().apply(p) == old),
                "refined stratum crosses an input stratum"
            );
            old
        })
        .collect();
    let psi = MonotoneMap::new(refined.strata_poset().clone(), s.strata_poset().clone(), psi)
        .map_err(|e| Error::internal(format!("factoring map is not monotone: {e}")))?;
    Ok((refined, psi))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// z < u⁻ and z < u⁺: the three-point model of the line stratified by
    /// the sign of the coordinate.
    fn line_model() -> FinPoset {
        FinPoset::from_covers(
            vec!["z".into(), "u-".into(), "u+".into()],
            &[("z".into(), "u-".into()), ("z".into(), "u+".into())],
        )
        .unwrap()
    }

    fn strata_sets(s: &Stratification) -> Vec<Vec<usize>> {
        let mut sets = s.strata();
        sets.sort();
        sets
    }

    #[test]
    fn cover_stratification_on_line_model() {
        let x = line_model();
        let up = x.index_of("u+").unwrap();
        let s = cover_stratification(&x, &[vec![up]]).unwrap();
        let lbl = |p: usize| s.strata_poset().label(s.map().apply(p)).to_string();
        assert_eq!(lbl(x.index_of("z").unwrap()), "{}");
        assert_eq!(lbl(x.index_of("u-").unwrap()), "{}");
        assert_eq!(lbl(up), "{0}");
    }

    #[test]
    fn empty_cover_is_constant() {
        let x = FinPoset::chain(3);
        let s = cover_stratification(&x, &[]).unwrap();
        assert_eq!(s.strata_poset().len(), 1);
        assert_eq!(s.strata_poset().label(0), "{}");
    }

    #[test]
    fn cover_stratification_on_chain() {
        let x = FinPoset::chain(3);
        let s = cover_stratification(&x, &[vec![1, 2], vec![2]]).unwrap();
        let lbl = |p: usize| s.strata_poset().label(s.map().apply(p)).to_string();
        assert_eq!(lbl(0), "{}");
        assert_eq!(lbl(1), "{0}");
        assert_eq!(lbl(2), "{0,1}");
    }

    #[test]
    fn cover_members_are_unions_of_strata() {
        let x = line_model();
        let u0 = x.up_closure(&[0]);
        let u1 = vec![2];
        let s = cover_stratification(&x, &[u0.clone(), u1.clone()]).unwrap();
        for u in [u0, u1] {
            let mut union: Vec<usize> = (0..s.strata_poset().len())
                .filter(|&t| {
                    let f = s.stratum(t);
                    !f.is_empty() && f.iter().all(|p| u.binary_search(p).is_ok())
                })
                .flat_map(|t| s.stratum(t))
                .collect();
            union.sort_unstable();
            assert_eq!(union, u);
        }
    }

    #[test]
    fn sign_stratification_is_not_proper() {
        let x = line_model();
        let p = FinPoset::chain(2);
        let s = Stratification::new(MonotoneMap::new(x, p, vec![0, 0, 1]).unwrap());
        assert_eq!(s.properness_witness(), Some(1));
    }

    #[test]
    fn identity_stratification_is_proper() {
        let x = line_model();
        let s = Stratification::new(MonotoneMap::identity(&x));
        assert!(s.is_proper());
    }

    #[test]
    fn empty_stratum_is_improper() {
        let x = FinPoset::chain(2);
        let p = FinPoset::chain(3);
        let s = Stratification::new(MonotoneMap::new(x, p, vec![0, 1]).unwrap());
        assert!(!s.is_proper());
        assert_eq!(s.properness_witness(), Some(2));
    }

    #[test]
    fn refine_with_empty_family_gives_components() {
        let two = FinPoset::from_covers(
            vec!["x".into(), "s".into(), "w".into(), "u".into()],
            &[("x".into(), "s".into()), ("w".into(), "u".into())],
        )
        .unwrap();
        let s = proper_refine(&two, &[]).unwrap();
        assert!(s.is_proper());
        assert_eq!(strata_sets(&s), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn refine_line_model_by_positive_ray() {
        let x = line_model();
        let up = x.index_of("u+").unwrap();
        let s = proper_refine(&x, &[vec![up]]).unwrap();
        assert!(s.is_proper());
        assert_eq!(strata_sets(&s), vec![vec![0], vec![1], vec![2]]);
        // z sits below both open rays
        let t_z = s.map().apply(0);
        let t_minus = s.map().apply(1);
        let t_plus = s.map().apply(2);
        let sp = s.strata_poset();
        assert!(sp.lt(t_z, t_minus) && sp.lt(t_z, t_plus));
        assert!(!sp.comparable(t_minus, t_plus));
    }

    #[test]
    fn refine_with_whole_space_matches_empty_family() {
        let x = line_model();
        let with_x = proper_refine(&x, &[(0..3).collect()]).unwrap();
        let with_none = proper_refine(&x, &[]).unwrap();
        assert_eq!(strata_sets(&with_x), strata_sets(&with_none));
        assert!(with_x.is_proper());
    }

    #[test]
    fn refine_keeps_members_unions_of_strata() {
        // S₀ dense open, and a second chain to force the V branch.
        let x = FinPoset::from_covers(
            vec!["x".into(), "s".into(), "w".into(), "u".into()],
            &[("x".into(), "s".into()), ("w".into(), "u".into())],
        )
        .unwrap();
        let theta = vec![vec![x.index_of("s").unwrap()]];
        let s = proper_refine(&x, &theta).unwrap();
        assert!(s.is_proper());
        for member in &theta {
            let mut union: Vec<usize> = (0..s.strata_poset().len())
                .map(|t| s.stratum(t))
                .filter(|f| !f.is_empty() && f.iter().all(|p| member.binary_search(p).is_ok()))
                .flatten()
                .collect();
            union.sort_unstable();
            assert_eq!(&union, member);
        }
    }

    #[test]
    fn refine_rejects_non_locally_closed_member() {
        let x = FinPoset::chain(3);
        let err = proper_refine(&x, &[vec![0, 2]]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn refinement_factors_through_psi() {
        let x = line_model();
        let p = FinPoset::chain(2);
        let s = Stratification::new(MonotoneMap::new(x, p, vec![0, 0, 1]).unwrap());
        let (refined, psi) = refine_stratification(&s).unwrap();
        assert!(refined.is_proper());
        for i in 0..s.space().len() {
            assert_eq!(psi.apply(refined.map().apply(i)), s.map().apply(i));
        }
    }

    #[test]
    fn refining_a_proper_stratification_preserves_strata() {
        let x = line_model();
        let s = proper_refine(&x, &[vec![2]]).unwrap();
        let (refined, _) = refine_stratification(&s).unwrap();
        assert_eq!(strata_sets(&refined), strata_sets(&s));
    }

    #[test]
    fn constant_stratification_refines_to_components() {
        let x = FinPoset::antichain(3);
        let p = FinPoset::singleton("pt");
        let s = Stratification::new(MonotoneMap::constant(x, p, 0).unwrap());
        let (refined, _) = refine_stratification(&s).unwrap();
        assert!(refined.is_proper());
        assert_eq!(strata_sets(&refined), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn good_position_cases() {
        let x = FinPoset::chain(2);
        let all: Vec<usize> = (0..2).collect();
        assert!(in_good_position(&x, &all, &[vec![1]]).unwrap());
        assert!(in_good_position(&x, &[1], &[vec![1]]).unwrap());
        let c3 = FinPoset::chain(3);
        assert!(!in_good_position(&c3, &[2], &[vec![1, 2]]).unwrap());
    }

    #[test]
    fn good_position_rejects_non_open_sets() {
        let x = FinPoset::chain(2);
        assert!(in_good_position(&x, &[0], &[]).is_err());
        assert!(in_good_position(&x, &[1], &[vec![0]]).is_err());
    }
}
