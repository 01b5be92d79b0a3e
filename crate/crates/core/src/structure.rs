//! Partition of a coefficient sequence into `D`-periodic blocks, the geometric
//! series form `Σ A_j(z)(z^{r_j} − z^{r_{j−1}})/(z^D − 1) + E(z)`, and the
//! identical-pattern form with deviation blocks.

use crate::polycore::IntPoly;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("decomposition is not aligned to multiples of D")]
    NotAligned,
    #[error("pattern has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("period must be positive and the sequence nonempty")]
    InvalidInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    /// `pattern[r]` is the coefficient at positions `≡ r (mod D)`; residues absent
    /// from a short block are 0.
    pub pattern: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub period: usize,
    pub aligned: bool,
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks tile `[0, n)` and each block matches its pattern.
    pub fn is_valid_for(&self, coeffs: &[i64]) -> bool {
        let d = self.period;
        let mut pos = 0;
        for b in &self.blocks {
            if b.start != pos || b.end <= b.start || b.pattern.len() != d {
                return false;
            }
            if (b.start..b.end).any(|n| coeffs[n] != b.pattern[n % d]) {
                return false;
            }
            if self.aligned && (b.start % d != 0) {
                return false;
            }
            pos = b.end;
        }
        pos == coeffs.len()
    }
}

/// Furthest end `e` such that `[s, e)` is `D`-periodic.
fn reach(coeffs: &[i64], d: usize, s: usize) -> usize {
    let mut e = (s + d).min(coeffs.len());
    while e < coeffs.len() && coeffs[e] == coeffs[e - d] {
        e += 1;
    }
    e
}

fn pattern_of(coeffs: &[i64], d: usize, s: usize, e: usize) -> Vec<i64> {
    let mut p = vec![0; d];
    for n in s..e {
        p[n % d] = coeffs[n];
    }
    p
}

/// Greedy maximal-extension partition. Periodicity on an interval is inherited
/// by subintervals, so taking the furthest reach each time minimises the block
/// count. Aligned mode cuts blocks at multiples of `D` (or the sequence end).
pub fn decompose(
    coeffs: &[i64],
    d: usize,
    aligned: bool,
) -> Result<BlockDecomposition, StructureError> {
    if d == 0 || coeffs.is_empty() {
        return Err(StructureError::InvalidInput);
    }
    let n = coeffs.len();
    let mut blocks = Vec::new();
    let mut s = 0;
    while s < n {
        let mut e = reach(coeffs, d, s);
        if aligned && e < n {
            e -= e % d;
        }
        blocks.push(Block {
            start: s,
            end: e,
            pattern: pattern_of(coeffs, d, s, e),
        });
        s = e;
    }
    Ok(BlockDecomposition {
        period: d,
        aligned,
        blocks,
    })
}

/// Minimum number of blocks by dynamic programming over all cut points.
pub fn min_blocks_dp(coeffs: &[i64], d: usize, aligned: bool) -> usize {
    let n = coeffs.len();
    let periodic = |s: usize, e: usize| (s + d..e).all(|k| coeffs[k] == coeffs[k - d]);
    let mut best = vec![usize::MAX; n + 1];
    best[0] = 0;
    for e in 1..=n {
        if aligned && e < n && e % d != 0 {
            continue;
        }
        for s in 0..e {
            if best[s] != usize::MAX && periodic(s, e) {
                best[e] = best[e].min(best[s] + 1);
            }
        }
    }
    best[n]
}

/// `L(D)` for `D = 1..=d_max`, aligned.
pub fn period_profile(coeffs: &[i64], d_max: usize) -> Result<Vec<(usize, usize)>, StructureError> {
    (1..=d_max)
        .map(|d| decompose(coeffs, d, true).map(|b| (d, b.len())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricForm {
    pub period: usize,
    /// `r_0 = 0 < r_1 < … < r_l`, all multiples of `D`.
    pub breakpoints: Vec<usize>,
    /// `A_j(z) = Σ_{m<D} ε^{(j)}_m z^m`.
    pub patterns: Vec<Vec<i64>>,
    /// Sparse residual `(exponent, coefficient)`.
    pub residual: Vec<(usize, i64)>,
}

impl GeometricForm {
    pub fn residual_poly(&self) -> IntPoly {
        let n = self.residual.iter().map(|&(e, _)| e + 1).max().unwrap_or(0);
        let mut c = vec![0i64; n];
        for &(e, v) in &self.residual {
            c[e] += v;
        }
        IntPoly::from_i64s(&c)
    }

    /// Exact check of `Q(z)(z^D − 1) = Σ A_j(z)(z^{r_j} − z^{r_{j−1}}) + E(z)(z^D − 1)`.
    pub fn verify(&self, coeffs: &[i64]) -> bool {
        let zd1 = monomial(self.period).sub(&IntPoly::from_i64s(&[1]));
        let lhs = IntPoly::from_i64s(coeffs).mul(&zd1);
        let mut rhs = self.residual_poly().mul(&zd1);
        for (j, a) in self.patterns.iter().enumerate() {
            let diff = monomial(self.breakpoints[j + 1]).sub(&monomial(self.breakpoints[j]));
            rhs = rhs.add(&IntPoly::from_i64s(a).mul(&diff));
        }
        lhs == rhs
    }
}

fn monomial(k: usize) -> IntPoly {
    IntPoly::new(vec![BigInt::from(1)]).shift(k)
}

/// Sums each aligned block as a geometric series; the part of the final block
/// past the last multiple of `D` goes to the residual.
pub fn to_geometric(
    dec: &BlockDecomposition,
    coeffs: &[i64],
) -> Result<GeometricForm, StructureError> {
    if !dec.aligned {
        return Err(StructureError::NotAligned);
    }
    let d = dec.period;
    let mut breakpoints = vec![0];
    let mut patterns = Vec::new();
    let mut residual = Vec::new();
    for b in &dec.blocks {
        if b.start % d != 0 {
            return Err(StructureError::NotAligned);
        }
        let r = b.end - b.end % d;
        if r > b.start {
            breakpoints.push(r);
            patterns.push(b.pattern.clone());
        }
        residual.extend(
            (r.max(b.start)..b.end)
                .filter(|&n| coeffs[n] != 0)
                .map(|n| (n, coeffs[n])),
        );
    }
    Ok(GeometricForm {
        period: d,
        breakpoints,
        patterns,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaBlock {
    pub start: usize,
    pub end: usize,
    pub delta: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryForm {
    pub period: usize,
    pub epsilon: Vec<i64>,
    /// Length of the sequence (`N + 1`).
    pub len: usize,
    pub delta_blocks: Vec<DeltaBlock>,
    /// Every deviation at a position `n ≤ N` is `0` or `−2ε_{n mod D}`.
    pub deltas_in_flip_set: bool,
}

impl CorollaryForm {
    /// Exact check of `Q(z)(z^D − 1) = A(z)(z^K − 1) + (z^D − 1)Σ_j Σ_{m∈J_j} δ_m z^m`,
    /// where `K` is `N + 1` rounded up to a multiple of `D`; when `D | N + 1` this is
    /// the form `Q = A(z)(z^{N+1} − 1)/(z^D − 1) + Σ δ-blocks`.
    pub fn verify(&self, coeffs: &[i64]) -> bool {
        let d = self.period;
        let k = padded_len(self.len, d);
        let zd1 = monomial(d).sub(&IntPoly::from_i64s(&[1]));
        let lhs = IntPoly::from_i64s(coeffs).mul(&zd1);
        let a = IntPoly::from_i64s(&self.epsilon);
        let mut dev = vec![0i64; k];
        for b in &self.delta_blocks {
            for (m, v) in dev.iter_mut().enumerate().take(b.end).skip(b.start) {
                *v += b.delta[m % d];
            }
        }
        let rhs = a
            .mul(&monomial(k).sub(&IntPoly::from_i64s(&[1])))
            .add(&IntPoly::from_i64s(&dev).mul(&zd1));
        lhs == rhs
    }
}

fn padded_len(n: usize, d: usize) -> usize {
    n.div_ceil(d) * d
}

/// Per-residue majority sign. Ties give +1; residues with no nonzero entry give 0.
pub fn majority_pattern(coeffs: &[i64], d: usize) -> Vec<i64> {
    let mut score = vec![0i64; d];
    let mut seen = vec![false; d];
    for (n, &c) in coeffs.iter().enumerate() {
        score[n % d] += c.signum();
        seen[n % d] |= c != 0;
    }
    (0..d)
        .map(|r| match (seen[r], score[r].signum()) {
            (false, _) => 0,
            (true, 0) => 1,
            (true, s) => s,
        })
        .collect()
}

/// Deviations from the `ε`-periodic extension, grouped into maximal runs of
/// aligned `D`-chunks with identical deviation vectors.
pub fn to_corollary_form(
    coeffs: &[i64],
    d: usize,
    epsilon: &[i64],
) -> Result<CorollaryForm, StructureError> {
    if d == 0 || coeffs.is_empty() {
        return Err(StructureError::InvalidInput);
    }
    if epsilon.len() != d {
        return Err(StructureError::LengthMismatch {
            expected: d,
            got: epsilon.len(),
        });
    }
    let n = coeffs.len();
    let k = padded_len(n, d);
    let dev: Vec<i64> = (0..k)
        .map(|m| coeffs.get(m).copied().unwrap_or(0) - epsilon[m % d])
        .collect();
    let mut blocks: Vec<DeltaBlock> = Vec::new();
    for c in 0..k / d {
        let chunk = &dev[c * d..(c + 1) * d];
        if chunk.iter().all(|&v| v == 0) {
            continue;
        }
        let delta: Vec<i64> = (0..d).map(|r| chunk[r]).collect();
        match blocks.last_mut() {
            Some(b) if b.end == c * d && b.delta == delta => b.end += d,
            _ => blocks.push(DeltaBlock {
                start: c * d,
                end: (c + 1) * d,
                delta,
            }),
        }
    }
    let deltas_in_flip_set = (0..n).all(|m| dev[m] == 0 || dev[m] == -2 * epsilon[m % d]);
    Ok(CorollaryForm {
        period: d,
        epsilon: epsilon.to_vec(),
        len: n,
        delta_blocks: blocks,
        deltas_in_flip_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::{build_q, family_h, LittlewoodPoly};
    use proptest::prelude::*;

    fn ends(d: &BlockDecomposition) -> Vec<(usize, usize)> {
        d.blocks.iter().map(|b| (b.start, b.end)).collect()
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&[1, 1, 1, 1], 1, false).unwrap();
        assert_eq!((d.len(), d.blocks[0].pattern.clone()), (1, vec![1]));
        let d = decompose(&[1, 1, 1, -1, -1], 1, false).unwrap();
        assert_eq!(ends(&d), vec![(0, 3), (3, 5)]);
        let d = decompose(&[1, -1, 1, -1, 1, 1, -1], 2, false).unwrap();
        assert_eq!(ends(&d), vec![(0, 5), (5, 7)]);
        let d = decompose(&[1, -1, 1, -1, 1, 1, -1], 2, true).unwrap();
        assert_eq!(ends(&d), vec![(0, 4), (4, 6), (6, 7)]);
        assert_eq!(min_blocks_dp(&[1, -1, 1, -1, 1, 1, -1], 2, true), 3);
    }

    #[test]
    fn profile_examples() {
        let alt: Vec<i64> = (0..16).map(|n| if n % 2 == 0 { 1 } else { -1 }).collect();
        let p = period_profile(&alt, 2).unwrap();
        assert_eq!(p, vec![(1, 16), (2, 1)]);
        let ones = vec![1i64; 16];
        assert!(period_profile(&ones, 6)
            .unwrap()
            .iter()
            .all(|&(_, l)| l == 1));
        // Q of the polynomial whose cosine form is h_m has 4-periodic odd support.
        for m in 1..6 {
            let h = family_h(m);
            let n = h.degree();
            let half: Vec<i8> = h
                .coeffs()
                .iter()
                .skip(1)
                .step_by(2)
                .map(|&c| c as i8)
                .collect();
            let mut c: Vec<i8> = half.iter().rev().copied().collect();
            c.extend(half.iter());
            let p = LittlewoodPoly::new(c).unwrap();
            assert_eq!(p.degree(), n);
            let q = build_q(&p).unwrap();
            let qc: Vec<i64> = q.coeffs().iter().map(|&x| x as i64).collect();
            assert_eq!(decompose(&qc, 4, true).unwrap().len(), 1);
        }
    }

    #[test]
    fn geometric_examples() {
        let ones = vec![1i64; 8];
        let g = to_geometric(&decompose(&ones, 1, true).unwrap(), &ones).unwrap();
        assert_eq!(
            (g.breakpoints.clone(), g.patterns.clone()),
            (vec![0, 8], vec![vec![1]])
        );
        assert!(g.verify(&ones));
        let alt: Vec<i64> = (0..8).map(|n| if n % 2 == 0 { 1 } else { -1 }).collect();
        let g = to_geometric(&decompose(&alt, 2, true).unwrap(), &alt).unwrap();
        assert_eq!(g.patterns, vec![vec![1, -1]]);
        assert!(g.residual.is_empty() && g.verify(&alt));
        let two = [1, 1, 1, 1, -1, 1, -1, 1, -1];
        let g = to_geometric(&decompose(&two, 2, true).unwrap(), &two).unwrap();
        assert_eq!(g.patterns.len(), 2);
        assert!(g.verify(&two));
        assert_eq!(
            to_geometric(&decompose(&two, 2, false).unwrap(), &two),
            Err(StructureError::NotAligned)
        );
    }

    #[test]
    fn corollary_examples() {
        let eps = vec![1, -1, 1];
        let periodic: Vec<i64> = (0..12).map(|n| eps[n % 3]).collect();
        let f = to_corollary_form(&periodic, 3, &eps).unwrap();
        assert!(f.delta_blocks.is_empty() && f.verify(&periodic));
        let mut flipped = periodic.clone();
        flipped[7] = -flipped[7];
        let f = to_corollary_form(&flipped, 3, &eps).unwrap();
        assert_eq!(
            f.delta_blocks,
            vec![DeltaBlock {
                start: 6,
                end: 9,
                delta: vec![0, 2, 0]
            }]
        );
        assert!(f.deltas_in_flip_set && f.verify(&flipped));
        assert_eq!(
            to_corollary_form(&flipped, 3, &[1, 1]),
            Err(StructureError::LengthMismatch {
                expected: 3,
                got: 2
            })
        );
    }

    fn seq() -> impl Strategy<Value = (Vec<i64>, usize)> {
        (1usize..=6, 1usize..=256).prop_flat_map(|(d, n)| {
            // Few distinct runs keep block counts interesting.
            (
                prop::collection::vec(prop::sample::select(vec![-1i64, 1]), n),
                Just(d),
            )
        })
    }

    fn piecewise() -> impl Strategy<Value = (Vec<i64>, usize)> {
        (
            1usize..=6,
            prop::collection::vec(
                (
                    prop::collection::vec(prop::sample::select(vec![-1i64, 0, 1]), 1..=6),
                    1usize..=40,
                ),
                1..=8,
            ),
        )
            .prop_map(|(d, pieces)| {
                let mut v = Vec::new();
                for (pat, len) in pieces {
                    for k in 0..len {
                        v.push(pat[k % pat.len()]);
                    }
                }
                v.truncate(256);
                (v, d)
            })
    }

    proptest! {
        #[test]
        fn greedy_is_optimal((c, d) in prop_oneof![seq(), piecewise()], aligned in any::<bool>()) {
            let dec = decompose(&c, d, aligned).unwrap();
            prop_assert!(dec.is_valid_for(&c));
            prop_assert_eq!(dec.len(), min_blocks_dp(&c, d, aligned));
        }

        #[test]
        fn periodic_sequences_have_one_block(pat in prop::collection::vec(-2i64..=2, 1..=6), len in 1usize..300) {
            let d = pat.len();
            let c: Vec<i64> = (0..len).map(|n| pat[n % d]).collect();
            prop_assert_eq!(decompose(&c, d, true).unwrap().len(), 1);
            prop_assert_eq!(decompose(&c, d, false).unwrap().len(), 1);
        }

        #[test]
        fn reconstructions_are_exact((c, d) in piecewise()) {
            let dec = decompose(&c, d, true).unwrap();
            let g = to_geometric(&dec, &c).unwrap();
            prop_assert!(g.verify(&c));
            let mx = c.iter().map(|v| v.abs()).max().unwrap_or(0);
            prop_assert!(g.residual.iter().all(|&(_, v)| v.abs() <= 2 * mx));
            let eps = majority_pattern(&c, d);
            prop_assert!(to_corollary_form(&c, d, &eps).unwrap().verify(&c));
        }

        #[test]
        fn odd_littlewood_deltas_are_flips(half in prop::collection::vec(any::<bool>(), 1..40), dh in 1usize..=4) {
            let upper: Vec<i8> = half.iter().map(|&b| if b { 1 } else { -1 }).collect();
            let mut c: Vec<i8> = upper.iter().rev().copied().collect();
            c.extend(upper.iter());
            let p = LittlewoodPoly::new(c).unwrap();
            prop_assert!(p.degree() % 2 == 1);
            let q: Vec<i64> = build_q(&p).unwrap().coeffs().iter().map(|&x| x as i64).collect();
            let d = 2 * dh;
            let eps = majority_pattern(&q, d);
            let f = to_corollary_form(&q, d, &eps).unwrap();
            prop_assert!(f.deltas_in_flip_set);
            prop_assert!(f.verify(&q));
            prop_assert!(f.delta_blocks.iter().all(|b| b.start % d == 0 && (b.end - b.start) % d == 0));
        }
    }
}
