//! Bounded chain complexes of finite-dimensional ℚ-vector spaces.
//!
//! Differentials lower degree by one. Cohomological objects (nerve cochains)
//! are stored along negated degrees, so a single convention serves both.

use crate::linalg::RatMatrix;
use crate::{Error, Result};

/// A bounded complex: `dims[i]` is the dimension in degree `lo + i`, and
/// `diffs[i]` is the differential from degree `lo + i + 1` down to `lo + i`.
/// `d ∘ d = 0` holds exactly; construction fails otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BddChainComplex {
    lo: i64,
    dims: Vec<usize>,
    diffs: Vec<RatMatrix>,
}

impl BddChainComplex {
    pub fn new(lo: i64, dims: Vec<usize>, diffs: Vec<RatMatrix>) -> Result<Self> {
        if diffs.len() != dims.len().saturating_sub(1) {
            return Err(Error::invalid(format!(
                "complex with {} degrees needs {} differentials, got {}",
                dims.len(),
                dims.len().saturating_sub(1),
                diffs.len()
            )));
        }
        for (i, d) in diffs.iter().enumerate() {
            if (d.rows(), d.cols()) != (dims[i], dims[i + 1]) {
                return Err(Error::invalid(format!(
                    "differential into degree {} must be {}x{}, got {}x{}",
                    lo + i as i64,
                    dims[i],
                    dims[i + 1],
                    d.rows(),
                    d.cols()
                )));
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            if !diffs[i].matmul(&diffs[i + 1]).is_zero() {
                return Err(Error::invalid(format!(
                    "d∘d ≠ 0 between degrees {} and {}",
                    lo + i as i64 + 2,
                    lo + i as i64
                )));
            }
        }
        Ok(BddChainComplex { lo, dims, diffs })
    }

    /// The zero complex.
    pub fn zero() -> Self {
        BddChainComplex { lo: 0, dims: Vec::new(), diffs: Vec::new() }
    }

    /// ℚ^dim concentrated in one degree.
    pub fn concentrated(degree: i64, dim: usize) -> Self {
        BddChainComplex { lo: degree, dims: vec![dim], diffs: Vec::new() }
    }

    /// ℚ in degree 0, the tensor unit.
    pub fn unit() -> Self {
        Self::concentrated(0, 1)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }

    /// Stored degree range, `None` for an empty complex.
    pub fn range(&self) -> Option<(i64, i64)> {
        if self.dims.is_empty() { None } else { Some((self.lo, self.hi())) }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim_at(&self, k: i64) -> usize {
        if k < self.lo || k > self.hi() {
            0
        } else {
            self.dims[(k - self.lo) as usize]
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_dim() == 0
    }

    /// The differential leaving degree `k`, as a `dim(k−1) × dim(k)` matrix
    /// (zero when either side is outside the stored range).
    pub fn diff_at(&self, k: i64) -> RatMatrix {
        let i = k - 1 - self.lo;
        if i >= 0 && (i as usize) + 1 < self.dims.len() {
            self.diffs[i as usize].clone()
        } else {
            RatMatrix::zeros(self.dim_at(k - 1), self.dim_at(k))
        }
    }

    /// Same complex re-indexed over a larger range, padding with zeros.
    pub fn padded(&self, lo: i64, hi: i64) -> Self {
        if let Some((slo, shi)) = self.range() {
            assert!(lo <= slo && hi >= shi, "padding range must contain the support");
        }
        let dims: Vec<usize> = (lo..=hi).map(|k| self.dim_at(k)).collect();
        let diffs: Vec<RatMatrix> = (lo..hi).map(|k| self.diff_at(k + 1)).collect();
        BddChainComplex { lo, dims, diffs }
    }

    /// Canonical form: leading and trailing zero-dimensional degrees removed.
    pub fn trimmed(&self) -> Self {
        let Some(first) = self.dims.iter().position(|&d| d > 0) else {
            return Self::zero();
        };
        let last = self.dims.iter().rposition(|&d| d > 0).unwrap();
        BddChainComplex {
            lo: self.lo + first as i64,
            dims: self.dims[first..=last].to_vec(),
            diffs: self.diffs[first..last].to_vec(),
        }
    }

    /// Degree-wise equality regardless of stored padding.
    pub fn same_as(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }

    /// `dim H_k = dim ker d_k − rank d_{k+1}`, listed from degree `lo` up.
    pub fn homology_dims(&self) -> Vec<usize> {
        let n = self.dims.len();
        let ranks: Vec<usize> = self.diffs.iter().map(|d| d.rank()).collect();
        (0..n)
            .map(|i| {
                let ker = self.dims[i] - if i > 0 { ranks[i - 1] } else { 0 };
                let im = if i + 1 < n { ranks[i] } else { 0 };
                ker - im
            })
            .collect()
    }

    pub fn homology_at(&self, k: i64) -> usize {
        if k < self.lo || k > self.hi() {
            return 0;
        }
        self.homology_dims()[(k - self.lo) as usize]
    }

    pub fn is_acyclic(&self) -> bool {
        self.homology_dims().iter().all(|&h| h == 0)
    }

    pub fn euler_char(&self) -> i64 {
        (0..self.dims.len())
            .map(|i| {
                let s = if (self.lo + i as i64).rem_euclid(2) == 0 { 1 } else { -1 };
                s * self.dims[i] as i64
            })
            .sum()
    }

    /// `X[s]`: degree `n` of the result is degree `n − s` of `X`; the
    /// differential picks up the sign `(−1)^s`.
    pub fn shift(&self, s: i64) -> Self {
        let diffs = if s.rem_euclid(2) == 0 {
            self.diffs.clone()
        } else {
            self.diffs.iter().map(RatMatrix::neg).collect()
        };
        BddChainComplex { lo: self.lo + s, dims: self.dims.clone(), diffs }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        match (self.range(), other.range()) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some((alo, ahi)), Some((blo, bhi))) => {
                let lo = alo.min(blo);
                let hi = ahi.max(bhi);
                let a = self.padded(lo, hi);
                let b = other.padded(lo, hi);
                let dims = (0..a.dims.len()).map(|i| a.dims[i] + b.dims[i]).collect();
                let diffs = (0..a.diffs.len())
                    .map(|i| RatMatrix::block_diag(&[a.diffs[i].clone(), b.diffs[i].clone()]))
                    .collect();
                BddChainComplex { lo, dims, diffs }
            }
        }
    }

    /// Total complex of the double complex `X_i ⊗ Y_j`. Summands of a total
    /// degree are ordered by ascending `i`; within a summand the index pairing
    /// is row-major. The second differential carries the Koszul sign
    /// `(−1)^i` of the actual degree of the first factor.
    pub fn tensor(&self, other: &Self) -> Self {
        if self.dims.is_empty() || other.dims.is_empty() {
            return Self::zero();
        }
        let lo = self.lo + other.lo;
        let n = self.dims.len() + other.dims.len() - 1;
        let summands = |t: usize| -> Vec<(usize, usize)> {
            (0..self.dims.len())
                .filter(|&i| t >= i && t - i < other.dims.len())
                .map(|i| (i, t - i))
                .collect()
        };
        let dim_of = |s: &[(usize, usize)]| -> usize {
            s.iter().map(|&(i, j)| self.dims[i] * other.dims[j]).sum()
        };
        let offsets = |s: &[(usize, usize)]| -> Vec<usize> {
            let mut off = Vec::with_capacity(s.len());
            let mut acc = 0;
            for &(i, j) in s {
                off.push(acc);
                acc += self.dims[i] * other.dims[j];
            }
            off
        };
        let mut dims = Vec::with_capacity(n);
        let mut diffs = Vec::with_capacity(n - 1);
        for t in 0..n {
            dims.push(dim_of(&summands(t)));
        }
        for t in 1..n {
            let src = summands(t);
            let tgt = summands(t - 1);
            let src_off = offsets(&src);
            let tgt_off = offsets(&tgt);
            let mut d = RatMatrix::zeros(dims[t - 1], dims[t]);
            let place = |d: &mut RatMatrix, r0: usize, c0: usize, b: &RatMatrix| {
                for r in 0..b.rows() {
                    for c in 0..b.cols() {
                        d[(r0 + r, c0 + c)] = b[(r, c)].clone();
                    }
                }
            };
            for (s_idx, &(i, j)) in src.iter().enumerate() {
                if i > 0 {
                    let block = self.diffs[i - 1].kron(&RatMatrix::identity(other.dims[j]));
                    let t_idx = tgt.iter().position(|&p| p == (i - 1, j)).unwrap();
                    place(&mut d, tgt_off[t_idx], src_off[s_idx], &block);
                }
                if j > 0 {
                    let mut block = RatMatrix::identity(self.dims[i]).kron(&other.diffs[j - 1]);
                    if (self.lo + i as i64).rem_euclid(2) == 1 {
                        block = block.neg();
                    }
                    let t_idx = tgt.iter().position(|&p| p == (i, j - 1)).unwrap();
                    place(&mut d, tgt_off[t_idx], src_off[s_idx], &block);
                }
            }
            diffs.push(d);
        }
        Self::new(lo, dims, diffs).expect("total complex differential squares to zero")
    }
}

/// A degreewise map of complexes; commutation with the differentials is
/// checked at construction.
#[derive(Clone, Debug)]
pub struct ChainMap {
    source: BddChainComplex,
    target: BddChainComplex,
    lo: i64,
    mats: Vec<RatMatrix>,
}

impl ChainMap {
    /// `mats[i]` maps degree `lo + i` of `source` into `target`; degrees not
    /// listed carry the zero map, which must be consistent with the shapes.
    pub fn new(
        source: BddChainComplex,
        target: BddChainComplex,
        lo: i64,
        mats: Vec<RatMatrix>,
    ) -> Result<Self> {
        for (i, m) in mats.iter().enumerate() {
            let k = lo + i as i64;
            if (m.rows(), m.cols()) != (target.dim_at(k), source.dim_at(k)) {
                return Err(Error::invalid(format!(
                    "chain map component at degree {k} must be {}x{}, got {}x{}",
                    target.dim_at(k),
                    source.dim_at(k),
                    m.rows(),
                    m.cols()
                )));
            }
        }
        let f = ChainMap { source, target, lo, mats };
        let (a, b) = f.combined_range();
        for k in a..=b + 1 {
            let lhs = f.at(k - 1).matmul(&f.source.diff_at(k));
            let rhs = f.target.diff_at(k).matmul(&f.at(k));
            if lhs != rhs {
                return Err(Error::invalid(format!(
                    "not a chain map: square at degree {k} does not commute"
                )));
            }
        }
        Ok(f)
    }

    pub fn zero(source: BddChainComplex, target: BddChainComplex) -> Self {
        ChainMap { source, target, lo: 0, mats: Vec::new() }
    }

    pub fn identity(x: &BddChainComplex) -> Self {
        let lo = x.lo();
        let mats = x.dims().iter().map(|&d| RatMatrix::identity(d)).collect();
        ChainMap { source: x.clone(), target: x.clone(), lo, mats }
    }

    pub fn source(&self) -> &BddChainComplex {
        &self.source
    }

    pub fn target(&self) -> &BddChainComplex {
        &self.target
    }

    fn combined_range(&self) -> (i64, i64) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for r in [self.source.range(), self.target.range()] {
            if let Some((a, b)) = r {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        if lo > hi { (0, -1) } else { (lo, hi) }
    }

    /// Component at degree `k` (zero map outside the stored list).
    pub fn at(&self, k: i64) -> RatMatrix {
        let i = k - self.lo;
        if i >= 0 && (i as usize) < self.mats.len() {
            self.mats[i as usize].clone()
        } else {
            RatMatrix::zeros(self.target.dim_at(k), self.source.dim_at(k))
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ChainMap) -> Result<ChainMap> {
        if !inner.target.same_as(&self.source) {
            return Err(Error::invalid("compose: inner target differs from outer source"));
        }
        let (a, b) = (
            inner.combined_range().0.min(self.combined_range().0),
            inner.combined_range().1.max(self.combined_range().1),
        );
        let mats = (a..=b).map(|k| self.at(k).matmul(&inner.at(k))).collect();
        ChainMap::new(inner.source.clone(), self.target.clone(), a, mats)
    }

    /// Cone: `C_n = X_{n−1} ⊕ Y_n`, `d(x, y) = (−dx, f(x) + dy)`.
    pub fn mapping_cone(&self) -> BddChainComplex {
        let (a, b) = self.combined_range();
        let lo = a;
        let hi = b + 1;
        let dims: Vec<usize> = (lo..=hi)
            .map(|n| self.source.dim_at(n - 1) + self.target.dim_at(n))
            .collect();
        let diffs: Vec<RatMatrix> = (lo..hi)
            .map(|n| {
                // target degree n, source degree n+1
                let top = self
                    .source
                    .diff_at(n)
                    .neg()
                    .hstack(&RatMatrix::zeros(self.source.dim_at(n - 1), self.target.dim_at(n + 1)));
                let bot = self.at(n).hstack(&self.target.diff_at(n + 1));
                top.vstack(&bot)
            })
            .collect();
        BddChainComplex::new(lo, dims, diffs).expect("cone differential squares to zero")
    }

    /// Fiber: `F_n = X_n ⊕ Y_{n+1}`, `d(x, y) = (dx, f(x) − dy)`.
    pub fn mapping_fiber(&self) -> BddChainComplex {
        let (a, b) = self.combined_range();
        let lo = a - 1;
        let hi = b;
        let dims: Vec<usize> = (lo..=hi)
            .map(|n| self.source.dim_at(n) + self.target.dim_at(n + 1))
            .collect();
        let diffs: Vec<RatMatrix> = (lo..hi)
            .map(|n| {
                // target degree n, source degree n+1
                let top = self
                    .source
                    .diff_at(n + 1)
                    .hstack(&RatMatrix::zeros(self.source.dim_at(n), self.target.dim_at(n + 2)));
                let bot = self.at(n + 1).hstack(&self.target.diff_at(n + 2).neg());
                top.vstack(&bot)
            })
            .collect();
        BddChainComplex::new(lo, dims, diffs).expect("fiber differential squares to zero")
    }

    /// Matrix of the induced map `H_k(source) → H_k(target)` in the bases
    /// chosen by [`homology_reps`].
    pub fn induced_map(&self, k: i64) -> RatMatrix {
        let (_, reps_s) = homology_reps(&self.source, k);
        let (b_t, reps_t) = homology_reps(&self.target, k);
        let img = self.at(k).matmul(&reps_s);
        let basis = b_t.hstack(&reps_t);
        let x = basis
            .solve_matrix(&img)
            .expect("a chain map sends cycles to cycles");
        x.select_rows(&(b_t.cols()..b_t.cols() + reps_t.cols()).collect::<Vec<_>>())
    }

    /// True when the induced map is an isomorphism in every degree.
    pub fn is_quasi_iso(&self) -> bool {
        let (a, b) = self.combined_range();
        (a..=b).all(|k| {
            let hs = self.source.homology_at(k);
            let ht = self.target.homology_at(k);
            hs == ht && self.induced_map(k).rank() == hs
        })
    }
}

/// For degree `k`: a full-column-rank matrix whose columns span the
/// boundaries, and cycle representatives completing it to a basis of the
/// cycles. The representatives present `H_k`.
pub fn homology_reps(x: &BddChainComplex, k: i64) -> (RatMatrix, RatMatrix) {
    let z = x.diff_at(k).kernel_basis();
    let (bc, _) = x.diff_at(k + 1).rank_factorize();
    let (_, pivots) = bc.hstack(&z).rref();
    let rep_cols: Vec<usize> = pivots
        .iter()
        .filter(|&&p| p >= bc.cols())
        .map(|&p| p - bc.cols())
        .collect();
    (bc, z.select_cols(&rep_cols))
}

/// Degreewise maps `h_n : X_n → Y_{n+1}`; `mats[i]` starts at degree `lo+i`.
#[derive(Clone, Debug)]
pub struct Homotopy {
    pub lo: i64,
    pub mats: Vec<RatMatrix>,
}

impl Homotopy {
    pub fn at(&self, k: i64, source: &BddChainComplex, target: &BddChainComplex) -> RatMatrix {
        let i = k - self.lo;
        if i >= 0 && (i as usize) < self.mats.len() {
            self.mats[i as usize].clone()
        } else {
            RatMatrix::zeros(target.dim_at(k + 1), source.dim_at(k))
        }
    }

    /// Checks `f_n = d h_n + h_{n−1} d` for all degrees, i.e. that `h`
    /// witnesses `f ≃ 0`.
    pub fn witnesses_null_homotopy(&self, f: &ChainMap) -> bool {
        let (a, b) = (
            f.source.range().map_or(0, |r| r.0).min(f.target.range().map_or(0, |r| r.0)) - 1,
            f.source.range().map_or(-1, |r| r.1).max(f.target.range().map_or(-1, |r| r.1)) + 1,
        );
        (a..=b).all(|n| {
            let dh = f.target.diff_at(n + 1).matmul(&self.at(n, &f.source, &f.target));
            let hd = self.at(n - 1, &f.source, &f.target).matmul(&f.source.diff_at(n));
            dh.add(&hd) == f.at(n)
        })
    }
}

/// The comparison `X → fiber(β)`, `x ↦ (α(x), h(x))`, for a candidate
/// triangle `X →α Y →β Z` with a null-homotopy `h` of `β∘α`. The triangle is
/// exact precisely when this comparison is a quasi-isomorphism.
pub fn fiber_comparison(alpha: &ChainMap, beta: &ChainMap, h: &Homotopy) -> Result<ChainMap> {
    if !alpha.target.same_as(&beta.source) {
        return Err(Error::invalid("fiber comparison: α target differs from β source"));
    }
    let composite = beta.compose(alpha)?;
    if !h.witnesses_null_homotopy(&composite) {
        return Err(Error::verification(
            "homotopy does not witness β∘α ≃ 0".to_string(),
        ));
    }
    let fib = beta.mapping_fiber();
    let (a, b) = (
        alpha.source.range().map_or(0, |r| r.0).min(fib.range().map_or(0, |r| r.0)),
        alpha.source.range().map_or(-1, |r| r.1).max(fib.range().map_or(-1, |r| r.1)),
    );
    let mats: Vec<RatMatrix> = (a..=b)
        .map(|n| alpha.at(n).vstack(&h.at(n, &alpha.source, &beta.target)))
        .collect();
    ChainMap::new(alpha.source.clone(), fib, a, mats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval() -> BddChainComplex {
        // 0 → ℚ →id ℚ → 0
        BddChainComplex::new(0, vec![1, 1], vec![RatMatrix::identity(1)]).unwrap()
    }

    #[test]
    fn zero_complex_has_zero_homology() {
        let x = BddChainComplex::new(0, vec![0, 0, 0], vec![RatMatrix::zeros(0, 0); 2]).unwrap();
        assert_eq!(x.homology_dims(), vec![0, 0, 0]);
        assert!(x.is_acyclic());
    }

    #[test]
    fn interval_is_acyclic() {
        assert_eq!(interval().homology_dims(), vec![0, 0]);
    }

    #[test]
    fn triangle_boundary_matrix_has_betti_one_one() {
        let d1 = RatMatrix::from_ints(&[&[-1, 0, 1], &[1, -1, 0], &[0, 1, -1]]);
        let x = BddChainComplex::new(0, vec![3, 3], vec![d1]).unwrap();
        assert_eq!(x.homology_dims(), vec![1, 1]);
    }

    #[test]
    fn non_squaring_differentials_are_rejected() {
        let d = RatMatrix::identity(1);
        let err = BddChainComplex::new(0, vec![1, 1, 1], vec![d.clone(), d]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn tensor_with_unit_is_identity() {
        let x = BddChainComplex::new(
            -1,
            vec![2, 3, 1],
            vec![
                RatMatrix::from_ints(&[&[1, 0, 0], &[0, 0, 0]]),
                RatMatrix::from_ints(&[&[0], &[0], &[1]]),
            ],
        )
        .unwrap();
        let y = BddChainComplex::new(
            -1,
            vec![2, 2],
            vec![RatMatrix::from_ints(&[&[0, 1], &[0, 0]])],
        )
        .unwrap();
        for c in [x, y] {
            assert_eq!(c.tensor(&BddChainComplex::unit()), c);
            assert_eq!(BddChainComplex::unit().tensor(&c), c);
        }
    }

    #[test]
    fn tensor_of_concentrated_lines_adds_degrees() {
        let a = BddChainComplex::concentrated(0, 1);
        let b = BddChainComplex::concentrated(1, 1);
        let t = a.tensor(&b);
        assert_eq!(t.range(), Some((1, 1)));
        assert_eq!(t.dims(), &[1]);
    }

    #[test]
    fn kunneth_for_two_circles() {
        // [ℚ →0 ℚ] models a circle; the square has homology (1, 2, 1).
        let c = BddChainComplex::new(0, vec![1, 1], vec![RatMatrix::zeros(1, 1)]).unwrap();
        let t = c.tensor(&c);
        assert_eq!(t.homology_dims(), vec![1, 2, 1]);
    }

    #[test]
    fn kunneth_with_nontrivial_differentials() {
        // (circle ⊕ interval) ⊗ circle: homology (1,2,1) again, but the
        // total differential is genuinely nonzero.
        let circle = BddChainComplex::new(0, vec![1, 1], vec![RatMatrix::zeros(1, 1)]).unwrap();
        let x = circle.direct_sum(&interval());
        let t = x.tensor(&circle);
        assert_eq!(t.homology_dims(), vec![1, 2, 1]);
        assert!(!t.diff_at(1).is_zero() || !t.diff_at(2).is_zero());
    }

    #[test]
    fn euler_characteristic_matches_homology() {
        let d1 = RatMatrix::from_ints(&[&[-1, 0, 1], &[1, -1, 0], &[0, 1, -1]]);
        let x = BddChainComplex::new(0, vec![3, 3], vec![d1]).unwrap();
        let from_h: i64 = x
            .homology_dims()
            .iter()
            .enumerate()
            .map(|(i, &h)| if (x.lo() + i as i64).rem_euclid(2) == 0 { h as i64 } else { -(h as i64) })
            .sum();
        assert_eq!(x.euler_char(), from_h);
    }

    #[test]
    fn shift_twice_restores_differential_sign() {
        let x = interval();
        let y = x.shift(1);
        assert_eq!(y.range(), Some((1, 2)));
        assert_eq!(y.diff_at(2), RatMatrix::identity(1).neg());
        assert_eq!(x.shift(2).diff_at(3), RatMatrix::identity(1));
    }

    #[test]
    fn padding_and_trimming_are_inverse() {
        let x = interval();
        let p = x.padded(-2, 3);
        assert_eq!(p.dims(), &[0, 0, 1, 1, 0, 0]);
        assert_eq!(p.trimmed(), x);
        assert!(p.same_as(&x));
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let x = BddChainComplex::new(0, vec![1, 1], vec![RatMatrix::zeros(1, 1)]).unwrap();
        assert!(ChainMap::identity(&x).mapping_cone().is_acyclic());
        assert!(ChainMap::identity(&x).mapping_fiber().is_acyclic());
    }

    #[test]
    fn cone_of_zero_map_is_shifted_sum() {
        let x = interval();
        let y = BddChainComplex::concentrated(0, 2);
        let cone = ChainMap::zero(x.clone(), y.clone()).mapping_cone();
        assert_eq!(cone.homology_dims(), x.shift(1).direct_sum(&y).homology_dims());
    }

    #[test]
    fn quasi_isomorphism_detection() {
        // ℚ --(1,0)--> [ℚ² ←(0,1)ᵗ ℚ] is a quasi-isomorphism in degree 0.
        let x = BddChainComplex::unit();
        let y = BddChainComplex::new(0, vec![2, 1], vec![RatMatrix::from_ints(&[&[0], &[1]])])
            .unwrap();
        let f = ChainMap::new(x.clone(), y.clone(), 0, vec![RatMatrix::from_ints(&[&[1], &[0]])])
            .unwrap();
        assert!(f.is_quasi_iso());
        let zero = ChainMap::zero(x.clone(), x.clone());
        assert!(!zero.is_quasi_iso());
        assert!(ChainMap::identity(&x).is_quasi_iso());
    }

    #[test]
    fn chain_map_validation_rejects_non_commuting_squares() {
        let x = interval();
        let bad = ChainMap::new(
            x.clone(),
            x.clone(),
            0,
            vec![RatMatrix::identity(1), RatMatrix::zeros(1, 1)],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn split_triangle_is_exact() {
        // A → A⊕B → B with the evident maps and zero homotopy.
        let a = BddChainComplex::unit();
        let b = BddChainComplex::concentrated(0, 1);
        let sum = a.direct_sum(&b);
        let inc = ChainMap::new(a.clone(), sum.clone(), 0, vec![RatMatrix::from_ints(&[&[1], &[0]])])
            .unwrap();
        let proj = ChainMap::new(sum.clone(), b.clone(), 0, vec![RatMatrix::from_ints(&[&[0, 1]])])
            .unwrap();
        let h = Homotopy { lo: 0, mats: Vec::new() };
        let cmp = fiber_comparison(&inc, &proj, &h).unwrap();
        assert!(cmp.is_quasi_iso());
    }

    #[test]
    fn non_exact_candidate_triangle_is_detected() {
        // A →0 A →0 A with zero homotopy composes to zero but is not exact.
        let a = BddChainComplex::unit();
        let z = ChainMap::zero(a.clone(), a.clone());
        let h = Homotopy { lo: 0, mats: Vec::new() };
        let cmp = fiber_comparison(&z, &z, &h).unwrap();
        assert!(!cmp.is_quasi_iso());
    }

    #[test]
    fn induced_map_of_identity_is_identity() {
        let d1 = RatMatrix::from_ints(&[&[-1, 0, 1], &[1, -1, 0], &[0, 1, -1]]);
        let x = BddChainComplex::new(0, vec![3, 3], vec![d1]).unwrap();
        let id = ChainMap::identity(&x);
        assert_eq!(id.induced_map(0), RatMatrix::identity(1));
        assert_eq!(id.induced_map(1), RatMatrix::identity(1));
    }

    #[test]
    fn homotopy_witness_check() {
        // id ≃ 0 on the acyclic interval via h = (0 1; 0 0) pattern.
        let x = interval();
        let id = ChainMap::identity(&x);
        let h = Homotopy { lo: 0, mats: vec![RatMatrix::identity(1), RatMatrix::zeros(0, 1)] };
        assert!(h.witnesses_null_homotopy(&id));
        let h0 = Homotopy { lo: 0, mats: Vec::new() };
        assert!(!h0.witnesses_null_homotopy(&id));
    }
}
