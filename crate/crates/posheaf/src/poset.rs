//! Finite posets as combinatorial topological spaces.
//!
//! A finite poset carries the topology whose opens are the up-sets; closure
//! is down-closure. All operations work on element indices; labels exist for
//! construction and serialization only. Subsets are passed and returned as
//! sorted, deduplicated index vectors.

use crate::{Error, Result};
use std::collections::{BTreeMap, HashMap};

/// Finite poset with the order stored as a dense boolean matrix, closed under
/// reflexivity and transitivity at construction.
#[derive(Clone, PartialEq, Eq)]
pub struct FinPoset {
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
    leq: Vec<bool>,
}

fn normalize(s: &[usize]) -> Vec<usize> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

impl FinPoset {
    /// Builds from cover relations; `leq` is their reflexive-transitive
    /// closure. Rejects duplicate labels, unknown labels, and cycles.
    pub fn from_covers(labels: Vec<String>, covers: &[(String, String)]) -> Result<Self> {
        let n = labels.len();
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate element label {l:?}")));
            }
        }
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (a, b) in covers {
            let ia = *index
                .get(a)
                .ok_or_else(|| Error::invalid(format!("unknown element label {a:?}")))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| Error::invalid(format!("unknown element label {b:?}")))?;
            leq[ia * n + ib] = true;
        }
        // Floyd-Warshall boolean closure
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i * n + j] && leq[j * n + i] {
                    return Err(Error::invalid(format!(
                        "cover relations contain a cycle through {:?} and {:?}",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(FinPoset { labels, index, leq })
    }

    /// Builds from an explicit relation matrix (row-major, `n*n`), which must
    /// already be reflexive, antisymmetric and transitive.
    pub fn from_leq(labels: Vec<String>, leq: Vec<bool>) -> Result<Self> {
        let n = labels.len();
        if leq.len() != n * n {
            return Err(Error::invalid("relation matrix has wrong size"));
        }
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate element label {l:?}")));
            }
        }
        for i in 0..n {
            if !leq[i * n + i] {
                return Err(Error::invalid("relation is not reflexive"));
            }
            for j in 0..n {
                if i != j && leq[i * n + j] && leq[j * n + i] {
                    return Err(Error::invalid("relation is not antisymmetric"));
                }
                for k in 0..n {
                    if leq[i * n + j] && leq[j * n + k] && !leq[i * n + k] {
                        return Err(Error::invalid("relation is not transitive"));
                    }
                }
            }
        }
        Ok(FinPoset { labels, index, leq })
    }

    pub fn empty() -> Self {
        FinPoset { labels: Vec::new(), index: BTreeMap::new(), leq: Vec::new() }
    }

    /// Chain `0 < 1 < … < n−1`.
    pub fn chain(n: usize) -> Self {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let covers: Vec<(String, String)> =
            (1..n).map(|i| ((i - 1).to_string(), i.to_string())).collect();
        Self::from_covers(labels, &covers).expect("chain is a poset")
    }

    pub fn antichain(n: usize) -> Self {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        Self::from_covers(labels, &[]).expect("antichain is a poset")
    }

    pub fn singleton(label: &str) -> Self {
        Self::from_covers(vec![label.to_string()], &[]).expect("singleton is a poset")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::invalid(format!("unknown element label {label:?}")))
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.len() + j]
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq(i, j) || self.leq(j, i)
    }

    /// Hasse covers `(lower, upper)`: `lower < upper` with nothing between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.lt(i, j) && !(0..n).any(|k| self.lt(i, k) && self.lt(k, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `p⋆ = {q : q ≥ p}`, the smallest open set containing `p`.
    pub fn open_star(&self, p: usize) -> Vec<usize> {
        (0..self.len()).filter(|&q| self.leq(p, q)).collect()
    }

    /// `{q : q ≤ p}`, the closure of the point.
    pub fn point_closure(&self, p: usize) -> Vec<usize> {
        (0..self.len()).filter(|&q| self.leq(q, p)).collect()
    }

    pub fn up_closure(&self, s: &[usize]) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| s.iter().any(|&p| self.leq(p, q)))
            .collect()
    }

    pub fn down_closure(&self, s: &[usize]) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| s.iter().any(|&p| self.leq(q, p)))
            .collect()
    }

    /// `∂S = down_closure(S) ∖ S`.
    pub fn boundary(&self, s: &[usize]) -> Vec<usize> {
        let s = normalize(s);
        self.down_closure(&s)
            .into_iter()
            .filter(|q| s.binary_search(q).is_err())
            .collect()
    }

    pub fn is_up_set(&self, s: &[usize]) -> bool {
        let s = normalize(s);
        s.iter()
            .all(|&p| (0..self.len()).all(|q| !self.leq(p, q) || s.binary_search(&q).is_ok()))
    }

    pub fn is_down_set(&self, s: &[usize]) -> bool {
        let s = normalize(s);
        s.iter()
            .all(|&p| (0..self.len()).all(|q| !self.leq(q, p) || s.binary_search(&q).is_ok()))
    }

    /// Locally closed = open ∩ closed = order-convex.
    pub fn is_locally_closed(&self, s: &[usize]) -> bool {
        let s = normalize(s);
        for &x in &s {
            for &z in &s {
                for y in 0..self.len() {
                    if self.leq(x, y) && self.leq(y, z) && s.binary_search(&y).is_err() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// All up-sets, as sorted index vectors, in ascending bitmask order.
    /// Exponential; intended for small posets and test oracles.
    pub fn up_sets(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        assert!(n < 26, "up-set enumeration is exponential; poset too large");
        let mut out = Vec::new();
        for mask in 0u64..(1 << n) {
            let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if self.is_up_set(&s) {
                out.push(s);
            }
        }
        out
    }

    /// Induced subposet plus the map from new indices to original ones.
    pub fn induced(&self, sub: &[usize]) -> (FinPoset, Vec<usize>) {
        let sub = normalize(sub);
        let m = sub.len();
        let labels: Vec<String> = sub.iter().map(|&i| self.labels[i].clone()).collect();
        let mut leq = vec![false; m * m];
        for a in 0..m {
            for b in 0..m {
                leq[a * m + b] = self.leq(sub[a], sub[b]);
            }
        }
        let index = labels.iter().cloned().zip(0..).collect();
        (FinPoset { labels, index, leq }, sub)
    }

    /// Connected components of the comparability graph restricted to `sub`,
    /// ordered by their smallest element index.
    pub fn components_within(&self, sub: &[usize]) -> Vec<Vec<usize>> {
        let sub = normalize(sub);
        let mut seen = vec![false; sub.len()];
        let mut out = Vec::new();
        for start in 0..sub.len() {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(a) = stack.pop() {
                comp.push(sub[a]);
                for b in 0..sub.len() {
                    if !seen[b] && self.comparable(sub[a], sub[b]) {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Length of the longest chain inside `sub` (−1 when empty). Agrees with
    /// [`FinPoset::inductive_dimension`]; see the tests for the cross-check.
    pub fn dimension_of(&self, sub: &[usize]) -> i64 {
        let sub = normalize(sub);
        let mut memo: Vec<Option<i64>> = vec![None; sub.len()];
        fn height(p: &FinPoset, sub: &[usize], memo: &mut Vec<Option<i64>>, a: usize) -> i64 {
            if let Some(h) = memo[a] {
                return h;
            }
            let h = (0..sub.len())
                .filter(|&b| p.lt(sub[b], sub[a]))
                .map(|b| height(p, sub, memo, b) + 1)
                .max()
                .unwrap_or(0);
            memo[a] = Some(h);
            h
        }
        let mut best = -1;
        for a in 0..sub.len() {
            best = best.max(height(self, &sub, &mut memo, a));
        }
        best
    }

    pub fn dimension(&self) -> i64 {
        self.dimension_of(&(0..self.len()).collect::<Vec<_>>())
    }

    /// The inductive dimension, computed from its recursive definition:
    /// `dim ∅ = −1`, and `dim X ≤ d` iff every up-set of `X` has boundary of
    /// dimension `≤ d−1`. Memoized on subsets; exponential, used as the
    /// oracle for [`FinPoset::dimension`].
    pub fn inductive_dimension(&self) -> i64 {
        fn go(p: &FinPoset, sub: &[usize], memo: &mut HashMap<Vec<usize>, i64>) -> i64 {
            if sub.is_empty() {
                return -1;
            }
            if let Some(&d) = memo.get(sub) {
                return d;
            }
            let (ind, back) = p.induced(sub);
            let mut worst = -1;
            for u in ind.up_sets() {
                let b: Vec<usize> = ind.boundary(&u).into_iter().map(|i| back[i]).collect();
                worst = worst.max(go(p, &b, memo));
            }
            let d = worst + 1;
            memo.insert(sub.to_vec(), d);
            d
        }
        let all: Vec<usize> = (0..self.len()).collect();
        go(self, &all, &mut HashMap::new())
    }

    /// Componentwise order on pairs; element `(p, q)` is labeled
    /// `"(lp,lq)"` and listed with the first factor major.
    pub fn product(&self, other: &FinPoset) -> FinPoset {
        let labels: Vec<String> = self
            .labels
            .iter()
            .flat_map(|lp| other.labels.iter().map(move |lq| format!("({lp},{lq})")))
            .collect();
        let n = labels.len();
        let m = other.len();
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = self.leq(a / m, b / m) && other.leq(a % m, b % m);
            }
        }
        let index = labels.iter().cloned().zip(0..).collect();
        FinPoset { labels, index, leq }
    }
}

impl std::fmt::Debug for FinPoset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let covers: Vec<String> = self
            .covers()
            .iter()
            .map(|&(a, b)| format!("{}<{}", self.labels[a], self.labels[b]))
            .collect();
        write!(f, "FinPoset {{ {:?}, covers: [{}] }}", self.labels, covers.join(", "))
    }
}

/// Monotone (= continuous) map between finite posets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneMap {
    source: FinPoset,
    target: FinPoset,
    assignment: Vec<usize>,
}

impl MonotoneMap {
    pub fn new(source: FinPoset, target: FinPoset, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != source.len() {
            return Err(Error::invalid("assignment length differs from source size"));
        }
        if assignment.iter().any(|&t| t >= target.len()) {
            return Err(Error::invalid("assignment hits an index outside the target"));
        }
        for i in 0..source.len() {
            for j in 0..source.len() {
                if source.leq(i, j) && !target.leq(assignment[i], assignment[j]) {
                    return Err(Error::invalid(format!(
                        "map is not monotone: {} ≤ {} but images are unordered",
                        source.label(i),
                        source.label(j)
                    )));
                }
            }
        }
        Ok(MonotoneMap { source, target, assignment })
    }

    pub fn identity(p: &FinPoset) -> Self {
        MonotoneMap {
            source: p.clone(),
            target: p.clone(),
            assignment: (0..p.len()).collect(),
        }
    }

    /// Constant map to `t`; source may be empty.
    pub fn constant(source: FinPoset, target: FinPoset, t: usize) -> Result<Self> {
        let n = source.len();
        Self::new(source, target, vec![t; n])
    }

    pub fn source(&self) -> &FinPoset {
        &self.source
    }

    pub fn target(&self) -> &FinPoset {
        &self.target
    }

    pub fn apply(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn fiber(&self, t: usize) -> Vec<usize> {
        (0..self.source.len()).filter(|&i| self.assignment[i] == t).collect()
    }
}

/// Grothendieck-style amalgamation `∫_P Q_p`, ordered by
/// `(p,q) ≤ (p′,q′) iff p < p′, or p = p′ and q ≤ q′`.
///
/// `betas` must be indexed by exactly the target elements with non-empty
/// fiber; each `β_p` maps the induced subposet on the fiber into `Q_p`. The
/// returned map sends `x ↦ (α(x), β_{α(x)}(x))` and is verified monotone.
pub fn amalgamate(
    alpha: &MonotoneMap,
    betas: &BTreeMap<usize, MonotoneMap>,
) -> Result<(FinPoset, MonotoneMap)> {
    let x = alpha.source();
    let p = alpha.target();
    let mut fibers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..x.len() {
        fibers.entry(alpha.apply(i)).or_default().push(i);
    }
    for &t in fibers.keys() {
        if !betas.contains_key(&t) {
            return Err(Error::invalid(format!(
                "missing stratum map for non-empty fiber over {:?}",
                p.label(t)
            )));
        }
    }
    for (&t, beta) in betas {
        let fiber = fibers.get(&t).cloned().unwrap_or_default();
        let (ind, _) = x.induced(&fiber);
        if beta.source() != &ind {
            return Err(Error::invalid(format!(
                "stratum map over {:?} is not defined on the fiber",
                p.label(t)
            )));
        }
    }

    // elements (p, q), p-major in P's index order, then Q_p's order
    let mut labels = Vec::new();
    let mut elems: Vec<(usize, usize)> = Vec::new();
    for (&t, beta) in betas {
        for q in 0..beta.target().len() {
            labels.push(format!("({},{})", p.label(t), beta.target().label(q)));
            elems.push((t, q));
        }
    }
    let n = labels.len();
    let mut leq = vec![false; n * n];
    for a in 0..n {
        for b in 0..n {
            let (pa, qa) = elems[a];
            let (pb, qb) = elems[b];
            leq[a * n + b] =
                p.lt(pa, pb) || (pa == pb && betas[&pa].target().leq(qa, qb));
        }
    }
    let amalgam = FinPoset::from_leq(labels, leq)
        .map_err(|e| Error::internal(format!("amalgamation order is not a poset: {e}")))?;

    let assignment: Vec<usize> = (0..x.len())
        .map(|i| {
            let t = alpha.apply(i);
            let beta = &betas[&t];
            let fiber = fibers[&t].clone();
            let pos = fiber.binary_search(&i).expect("element lies in its own fiber");
            let q = beta.apply(pos);
            elems
                .iter()
                .position(|&e| e == (t, q))
                .expect("amalgam contains every (p, q)")
        })
        .collect();
    let map = MonotoneMap::new(x.clone(), amalgam.clone(), assignment)
        .map_err(|e| Error::internal(format!("amalgamated map is not monotone: {e}")))?;
    Ok((amalgam, map))
}
