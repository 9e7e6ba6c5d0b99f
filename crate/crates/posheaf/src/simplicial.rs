//! Almost simplicial complexes: arbitrary sets of non-empty vertex subsets,
//! with no closure condition. Locally closed ones (no gaps between nested
//! members) support a Borel–Moore homology oracle: the boundary operator
//! keeps only faces that lie in the complex, which squares to zero exactly
//! because both or neither of the two intermediate faces between nested
//! simplices of codimension two are present.

use crate::chain::BddChainComplex;
use crate::linalg::{rat, RatMatrix};
use crate::poset::FinPoset;
use crate::{Error, Result};
use std::collections::BTreeSet;

/// Vertices are kept sorted lexicographically; simplices are stored as
/// sorted index vectors, deduplicated, ordered by cardinality then
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlmostSimplicialComplex {
    vertices: Vec<String>,
    simplices: Vec<Vec<usize>>,
}

impl AlmostSimplicialComplex {
    pub fn new(vertices: Vec<String>, simplices: Vec<Vec<String>>) -> Result<Self> {
        let mut vs = vertices;
        vs.sort();
        for w in vs.windows(2) {
            if w[0] == w[1] {
                return Err(Error::invalid(format!("duplicate vertex {:?}", w[0])));
            }
        }
        let find = |v: &String| -> Result<usize> {
            vs.binary_search(v)
                .map_err(|_| Error::invalid(format!("simplex uses unknown vertex {v:?}")))
        };
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in simplices {
            if s.is_empty() {
                return Err(Error::invalid("empty simplex"));
            }
            let mut idx = s.iter().map(find).collect::<Result<Vec<usize>>>()?;
            idx.sort_unstable();
            idx.dedup();
            set.insert(idx);
        }
        let mut simplices: Vec<Vec<usize>> = set.into_iter().collect();
        simplices.sort_by_key(|s| (s.len(), s.clone()));
        Ok(AlmostSimplicialComplex { vertices: vs, simplices })
    }

    /// Test-friendly constructor from string slices.
    pub fn from_named(vertices: &[&str], simplices: &[&[&str]]) -> Result<Self> {
        Self::new(
            vertices.iter().map(|s| s.to_string()).collect(),
            simplices
                .iter()
                .map(|s| s.iter().map(|v| v.to_string()).collect())
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// Simplices as sorted vertex-index vectors, in canonical order
    /// (cardinality, then lexicographic).
    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn simplex_labels(&self, i: usize) -> Vec<&str> {
        self.simplices[i].iter().map(|&v| self.vertices[v].as_str()).collect()
    }

    fn contains(&self, s: &[usize]) -> bool {
        self.simplices
            .binary_search_by_key(&(s.len(), s.to_vec()), |t| (t.len(), t.clone()))
            .is_ok()
    }

    /// Largest simplex cardinality minus one; −1 for the empty complex.
    pub fn dimension(&self) -> i64 {
        self.simplices.last().map_or(-1, |s| s.len() as i64 - 1)
    }

    /// The minimal genuine simplicial complex containing `self`: every
    /// non-empty subset of a member is added.
    pub fn simplicial_closure(&self) -> Self {
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in &self.simplices {
            assert!(s.len() <= 20, "simplex too large to enumerate subsets");
            for mask in 1u32..(1 << s.len()) {
                let sub: Vec<usize> = (0..s.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| s[i])
                    .collect();
                set.insert(sub);
            }
        }
        let mut simplices: Vec<Vec<usize>> = set.into_iter().collect();
        simplices.sort_by_key(|s| (s.len(), s.clone()));
        AlmostSimplicialComplex { vertices: self.vertices.clone(), simplices }
    }

    /// True iff `σ₀ ⊆ σ₁ ⊆ σ₂` with `σ₀, σ₂ ∈ K` forces `σ₁ ∈ K`;
    /// equivalently, `K` is open in its simplicial closure.
    pub fn is_locally_closed(&self) -> bool {
        for s2 in &self.simplices {
            for s0 in &self.simplices {
                if s0.len() >= s2.len() || !is_subset(s0, s2) {
                    continue;
                }
                let extra: Vec<usize> =
                    s2.iter().copied().filter(|v| !s0.contains(v)).collect();
                for mask in 1u32..(1 << extra.len()) {
                    if mask == (1 << extra.len()) - 1 {
                        continue;
                    }
                    let mut mid = s0.clone();
                    mid.extend((0..extra.len()).filter(|&i| mask >> i & 1 == 1).map(|i| extra[i]));
                    mid.sort_unstable();
                    if !self.contains(&mid) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The simplices ordered by inclusion. Element labels join the vertex
    /// labels with `-`; element order matches [`Self::simplices`].
    pub fn face_poset(&self) -> Result<FinPoset> {
        let labels: Vec<String> = (0..self.simplices.len())
            .map(|i| self.simplex_labels(i).join("-"))
            .collect();
        let n = labels.len();
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = is_subset(&self.simplices[a], &self.simplices[b]);
            }
        }
        FinPoset::from_leq(labels, leq)
    }

    /// The rational chain complex with one degree-`(|σ|−1)` generator per
    /// simplex and the alternating-sign boundary restricted to faces inside
    /// the complex (Borel–Moore convention). Requires local closedness, which
    /// is exactly what makes the restricted boundary square to zero.
    pub fn chain_complex(&self) -> Result<BddChainComplex> {
        if !self.is_locally_closed() {
            return Err(Error::invalid(
                "Betti oracle needs a locally closed complex".to_string(),
            ));
        }
        if self.simplices.is_empty() {
            return Ok(BddChainComplex::zero());
        }
        let top = self.dimension() as usize;
        // by_degree[k] lists indices of simplices with |σ| = k+1
        let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
        for (i, s) in self.simplices.iter().enumerate() {
            by_degree[s.len() - 1].push(i);
        }
        let dims: Vec<usize> = by_degree.iter().map(Vec::len).collect();
        let mut diffs = Vec::new();
        for k in 1..=top {
            let mut d = RatMatrix::zeros(dims[k - 1], dims[k]);
            for (col, &si) in by_degree[k].iter().enumerate() {
                let s = &self.simplices[si];
                for drop in 0..s.len() {
                    let face: Vec<usize> = s
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    if let Ok(pos) = by_degree[k - 1].binary_search_by(|&fi| {
                        self.simplices[fi].cmp(&face)
                    }) {
                        let sign = if drop % 2 == 0 { 1 } else { -1 };
                        d[(pos, col)] = rat(sign);
                    }
                }
            }
            diffs.push(d);
        }
        BddChainComplex::new(0, dims, diffs)
            .map_err(|e| Error::internal(format!("restricted boundary failed to square to zero: {e}")))
    }

    /// Borel–Moore Betti numbers, listed from degree 0. Equals ordinary
    /// simplicial homology when the complex is closed.
    pub fn simplicial_betti(&self) -> Result<Vec<usize>> {
        Ok(self.chain_complex()?.homology_dims())
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_boundary() -> AlmostSimplicialComplex {
        AlmostSimplicialComplex::from_named(
            &["a", "b", "c"],
            &[&["a"], &["b"], &["c"], &["a", "b"], &["a", "c"], &["b", "c"]],
        )
        .unwrap()
    }

    fn solid_triangle() -> AlmostSimplicialComplex {
        AlmostSimplicialComplex::from_named(&["a", "b", "c"], &[&["a", "b", "c"]])
            .unwrap()
            .simplicial_closure()
    }

    #[test]
    fn closure_of_single_edge() {
        let k = AlmostSimplicialComplex::from_named(&["a", "b"], &[&["a", "b"]]).unwrap();
        let c = k.simplicial_closure();
        assert_eq!(c.simplices().len(), 3);
        assert!(c.is_locally_closed());
    }

    #[test]
    fn closure_is_idempotent() {
        let c = solid_triangle();
        assert_eq!(c.simplicial_closure(), c);
        assert_eq!(c.simplices().len(), 7);
    }

    #[test]
    fn local_closedness_examples() {
        let chain = AlmostSimplicialComplex::from_named(&["a", "b"], &[&["a"], &["a", "b"]])
            .unwrap();
        assert!(chain.is_locally_closed());
        let gap = AlmostSimplicialComplex::from_named(&["a", "b", "c"], &[&["a"], &["a", "b", "c"]])
            .unwrap();
        assert!(!gap.is_locally_closed());
        assert!(triangle_boundary().is_locally_closed());
    }

    #[test]
    fn face_poset_of_triangle_boundary() {
        let p = triangle_boundary().face_poset().unwrap();
        assert_eq!(p.len(), 6);
        let ab = p.index_of("a-b").unwrap();
        let a = p.index_of("a").unwrap();
        let b = p.index_of("b").unwrap();
        let c = p.index_of("c").unwrap();
        assert!(p.lt(a, ab) && p.lt(b, ab) && !p.comparable(c, ab));
    }

    #[test]
    fn face_poset_of_vertex_and_chain() {
        let v = AlmostSimplicialComplex::from_named(&["a"], &[&["a"]]).unwrap();
        assert_eq!(v.face_poset().unwrap().len(), 1);
        let chain = AlmostSimplicialComplex::from_named(&["a", "b"], &[&["a"], &["a", "b"]])
            .unwrap();
        let p = chain.face_poset().unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.dimension(), 1);
    }

    #[test]
    fn face_poset_dimension_is_top_simplex_dimension() {
        for k in [triangle_boundary(), solid_triangle()] {
            assert_eq!(k.face_poset().unwrap().inductive_dimension(), k.dimension());
        }
    }

    #[test]
    fn betti_of_triangle_boundary() {
        assert_eq!(triangle_boundary().simplicial_betti().unwrap(), vec![1, 1]);
    }

    #[test]
    fn betti_of_solid_triangle() {
        assert_eq!(solid_triangle().simplicial_betti().unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn betti_of_tetrahedron_boundary() {
        let solid = AlmostSimplicialComplex::from_named(&["a", "b", "c", "d"], &[&["a", "b", "c", "d"]])
            .unwrap()
            .simplicial_closure();
        let faces: Vec<Vec<String>> = solid
            .simplices()
            .iter()
            .filter(|s| s.len() < 4)
            .map(|s| s.iter().map(|&v| solid.vertices()[v].clone()).collect())
            .collect();
        let sphere = AlmostSimplicialComplex::new(solid.vertices().to_vec(), faces).unwrap();
        assert_eq!(sphere.simplicial_betti().unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn betti_oracle_rejects_gapped_complex() {
        let gap = AlmostSimplicialComplex::from_named(&["a", "b", "c"], &[&["a"], &["a", "b", "c"]])
            .unwrap();
        assert!(matches!(gap.simplicial_betti(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn borel_moore_betti_of_open_cells() {
        // open interval: one 1-simplex, no faces
        let open_edge = AlmostSimplicialComplex::from_named(&["a", "b"], &[&["a", "b"]]).unwrap();
        assert_eq!(open_edge.simplicial_betti().unwrap(), vec![0, 1]);
        // half-open interval: contractible but not compact; all groups vanish
        let half = AlmostSimplicialComplex::from_named(&["a", "b"], &[&["a"], &["a", "b"]])
            .unwrap();
        assert_eq!(half.simplicial_betti().unwrap(), vec![0, 0]);
    }

    #[test]
    fn two_disjoint_edges_have_betti_two() {
        let k = AlmostSimplicialComplex::from_named(
            &["a", "b", "c", "d"],
            &[&["a", "b"], &["c", "d"]],
        )
        .unwrap()
        .simplicial_closure();
        assert_eq!(k.simplicial_betti().unwrap(), vec![2, 0]);
    }
}
