//! Certified counting of unimodular roots of reciprocal integer polynomials and
//! of the roots of cosine polynomials on a period, plus a grid oracle.

mod sturm;

use crate::polycore::{CosinePoly, IntPoly, LittlewoodPoly};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sturm::{Basis, Chebyshev, LevelChains, Monomial};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial is not reciprocal")]
    NotReciprocal,
    #[error("empty interval: lower endpoint exceeds upper endpoint")]
    InvalidInterval,
}

/// Root census on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ZCount {
    pub distinct: usize,
    pub with_multiplicity: usize,
    pub at_plus_one: usize,
    pub at_minus_one: usize,
    /// Distinct roots of odd multiplicity: sign changes of the cosine form.
    pub odd_multiplicity_count: usize,
}

/// Census record `{"degree","signs","distinct","mult","z1","zm1","odd"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub degree: usize,
    pub signs: String,
    pub distinct: usize,
    pub mult: usize,
    pub z1: usize,
    pub zm1: usize,
    pub odd: usize,
}

impl CensusRecord {
    pub fn new(p: &LittlewoodPoly, z: &ZCount) -> Self {
        Self {
            degree: p.degree(),
            signs: p.to_signs(),
            distinct: z.distinct,
            mult: z.with_multiplicity,
            z1: z.at_plus_one,
            zm1: z.at_minus_one,
            odd: z.odd_multiplicity_count,
        }
    }
}

/// `F` with `F(cos θ) = f(θ)`, in the monomial basis.
pub fn chebyshev_transform(f: &CosinePoly) -> IntPoly {
    let a = f.coeffs();
    let n = a.len();
    let mut out = vec![BigInt::zero(); n];
    // T_0 = 1, T_1 = x, T_{k+1} = 2x T_k − T_{k−1}
    let mut prev: Vec<BigInt> = vec![BigInt::one()];
    let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for (k, &ak) in a.iter().enumerate() {
        let t = match k {
            0 => &prev,
            _ => &cur,
        };
        if ak != 0 {
            for (i, c) in t.iter().enumerate() {
                out[i] += c * ak;
            }
        }
        if k >= 1 {
            let mut next = vec![BigInt::zero(); cur.len() + 1];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += c * 2;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= c;
            }
            prev = std::mem::replace(&mut cur, next);
        }
    }
    IntPoly::new(out)
}

/// A real root with a rational isolating interval `[lo, hi]` (`lo == hi` for
/// roots located exactly) and its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealRoot {
    pub lo: BigRational,
    pub hi: BigRational,
    pub multiplicity: usize,
}

impl RealRoot {
    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn midpoint_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        ((&self.lo + &self.hi) / BigInt::from(2))
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

/// Monomial-basis Sturm chain of a polynomial and its derivative.
#[derive(Debug, Clone)]
pub struct SturmChain {
    polys: Vec<IntPoly>,
}

impl SturmChain {
    pub fn new(f: &IntPoly) -> Result<Self, RootError> {
        if f.is_zero() {
            return Err(RootError::ZeroPolynomial);
        }
        let polys = sturm::chain::<Monomial>(f.coeffs())
            .into_iter()
            .map(IntPoly::new)
            .collect();
        Ok(Self { polys })
    }

    pub fn polys(&self) -> &[IntPoly] {
        &self.polys
    }

    pub fn variations_at(&self, x: &BigRational) -> usize {
        let chain: Vec<Vec<BigInt>> = self.polys.iter().map(|p| p.coeffs().to_vec()).collect();
        sturm::variations::<Monomial>(&chain, x.numer(), x.denom())
    }

    /// Distinct roots in `(a, b]`; `a` must not be a root.
    pub fn count_distinct(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }
}

fn is_root(f: &[BigInt], x: &BigRational) -> bool {
    Monomial::sign_at(f, x.numer(), x.denom()) == 0
}

/// Every distinct real root of `F` in `[a, b]` with its exact multiplicity.
pub fn count_real_roots(
    f: &IntPoly,
    a: &BigRational,
    b: &BigRational,
) -> Result<Vec<RealRoot>, RootError> {
    if f.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    if a > b {
        return Err(RootError::InvalidInterval);
    }
    let mut roots = Vec::new();
    let mut rest = f.clone();
    let (ka, r) = rest.deflate_linear(a.numer(), a.denom());
    rest = r;
    if ka > 0 {
        roots.push(RealRoot {
            lo: a.clone(),
            hi: a.clone(),
            multiplicity: ka,
        });
    }
    if a == b {
        return Ok(roots);
    }
    let (kb, r) = rest.deflate_linear(b.numer(), b.denom());
    rest = r;
    let mut tail = None;
    if kb > 0 {
        tail = Some(RealRoot {
            lo: b.clone(),
            hi: b.clone(),
            multiplicity: kb,
        });
    }
    if rest.degree().unwrap_or(0) > 0 {
        let lc = LevelChains::<Monomial>::new(rest.coeffs());
        isolate(&lc, a.clone(), b.clone(), &mut roots);
    }
    roots.extend(tail);
    Ok(roots)
}

fn level_counts(lc: &LevelChains<Monomial>, lo: &BigRational, hi: &BigRational) -> Vec<usize> {
    lc.counts((lo.numer(), lo.denom()), (hi.numer(), hi.denom()))
}

/// Bisection on `(lo, hi)` with non-root endpoints; split points avoid roots.
fn isolate(lc: &LevelChains<Monomial>, lo: BigRational, hi: BigRational, out: &mut Vec<RealRoot>) {
    let base = lc.base().expect("nonconstant").clone();
    let mut stack = vec![(lo, hi)];
    let mut found = Vec::new();
    while let Some((l, h)) = stack.pop() {
        let counts = level_counts(lc, &l, &h);
        match counts[0] {
            0 => {}
            1 => {
                let multiplicity = 1 + counts[1..].iter().filter(|&&c| c > 0).count();
                found.push(RealRoot {
                    lo: l,
                    hi: h,
                    multiplicity,
                });
            }
            _ => {
                let width = &h - &l;
                let mut split = None;
                for k in 1u32.. {
                    // t = 1/2, 1/3, 2/3, 1/4, ... until a non-root appears
                    let den = BigInt::from(k + 1);
                    for num in 1..=k {
                        let t = BigRational::new(BigInt::from(num), den.clone());
                        let x = &l + &width * &t;
                        if !is_root(&base, &x) {
                            split = Some(x);
                            break;
                        }
                    }
                    if split.is_some() {
                        break;
                    }
                }
                let x = split.unwrap();
                stack.push((x.clone(), h));
                stack.push((l, x));
            }
        }
    }
    found.sort_by(|p, q| p.lo.cmp(&q.lo));
    out.extend(found);
}

/// Per-level counts of distinct roots in the open interval (−1, 1) of a
/// Chebyshev-basis polynomial that does not vanish at ±1.
fn chebyshev_interior_levels(t_coeffs: &[BigInt]) -> Vec<usize> {
    let lc = LevelChains::<Chebyshev>::new(t_coeffs);
    let one = BigInt::one();
    let m1 = -BigInt::one();
    lc.counts((&m1, &one), (&one, &one))
}

/// Exact census of the unimodular roots of a reciprocal integer polynomial.
///
/// The roots at `z = ±1` are divided out first; the cofactor is reciprocal of
/// even degree `2K` and its cosine form is counted on `x = cos θ ∈ (−1, 1)`.
pub fn count_unimodular(p: &IntPoly) -> Result<ZCount, RootError> {
    if p.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    if !p.is_reciprocal() {
        return Err(RootError::NotReciprocal);
    }
    let one = BigInt::one();
    let (m1, r) = p.deflate_linear(&one, &one);
    let (m2, r) = r.deflate_linear(&-&one, &one);
    debug_assert!(m1 % 2 == 0 && r.is_reciprocal());
    let deg = r.degree().unwrap_or(0);
    debug_assert!(deg % 2 == 0);
    let k = deg / 2;
    let levels = if k == 0 {
        Vec::new()
    } else {
        let rc = r.coeffs();
        let mut t = Vec::with_capacity(k + 1);
        t.push(rc[k].clone());
        t.extend((1..=k).map(|n| &rc[k + n] * 2));
        chebyshev_interior_levels(&t)
    };
    Ok(census_from_levels(&levels, m1, m2))
}

fn census_from_levels(levels: &[usize], m1: usize, m2: usize) -> ZCount {
    let d0 = levels.first().copied().unwrap_or(0);
    let total: usize = levels.iter().sum();
    let odd_interior: isize = levels
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if i % 2 == 0 {
                d as isize
            } else {
                -(d as isize)
            }
        })
        .sum();
    ZCount {
        distinct: 2 * d0 + usize::from(m1 > 0) + usize::from(m2 > 0),
        with_multiplicity: 2 * total + m1 + m2,
        at_plus_one: m1,
        at_minus_one: m2,
        odd_multiplicity_count: 2 * odd_interior as usize + m1 % 2 + m2 % 2,
    }
}

/// Census of a reciprocal Littlewood polynomial.
pub fn count_littlewood(p: &LittlewoodPoly) -> ZCount {
    count_unimodular(&p.to_int_poly())
        .expect("Littlewood input is nonzero; caller checks reciprocity")
}

/// `2 z^M f(θ)` at `z = e^{iθ}` as a reciprocal integer polynomial of degree `2M`.
pub fn lift_cosine(f: &CosinePoly) -> IntPoly {
    let a = f.coeffs();
    let m = a.len() - 1;
    let mut c = vec![BigInt::zero(); 2 * m + 1];
    c[m] = BigInt::from(2 * a[0]);
    for (n, &an) in a.iter().enumerate().skip(1) {
        c[m + n] += an;
        c[m - n] += an;
    }
    IntPoly::new(c)
}

/// Roots of a cosine polynomial in `θ ∈ [0, 2π)`; the endpoint fields refer to
/// `θ = 0` and `θ = π`.
pub fn count_cosine_roots(f: &CosinePoly) -> Result<ZCount, RootError> {
    let lifted = lift_cosine(f);
    if lifted.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    // Strip the power of z that a trailing zero block would leave; the lift is
    // reciprocal around its centre, so trimming happens symmetrically.
    let c = lifted.coeffs();
    let low = c.iter().take_while(|v| v.is_zero()).count();
    count_unimodular(&IntPoly::new(c[low..].to_vec()))
}

/// Sign changes of `f` over `resolution` equally spaced points on `[0, 2π)`,
/// cyclically. Values within `1e−12·Σ|A_n|` of zero are skipped.
pub fn grid_sign_change_oracle(f: &CosinePoly, resolution: usize) -> usize {
    let tol = 1e-12 * f.l1_norm().max(1.0);
    let step = std::f64::consts::TAU / resolution as f64;
    let signs: Vec<i8> = (0..resolution)
        .filter_map(|k| {
            let v = f.eval(k as f64 * step);
            if v.abs() <= tol {
                None
            } else if v > 0.0 {
                Some(1)
            } else {
                Some(-1)
            }
        })
        .collect();
    if signs.is_empty() {
        return 0;
    }
    let n = signs.len();
    (0..n).filter(|&i| signs[i] != signs[(i + 1) % n]).count()
}

/// Grid sign changes of the unimodular restriction of a reciprocal Littlewood
/// polynomial. Odd degrees use `z = e^{2iθ}`, which covers the circle twice, so
/// the cosine-form count is halved.
pub fn grid_unimodular_sign_changes(
    p: &LittlewoodPoly,
    resolution: usize,
) -> Result<usize, RootError> {
    let f = crate::polycore::to_cosine(p).map_err(|_| RootError::NotReciprocal)?;
    let c = grid_sign_change_oracle(&f, resolution);
    Ok(if p.degree() % 2 == 1 { c / 2 } else { c })
}

/// Exact sign of a cosine polynomial at `θ` where `cos θ = x` is rational.
pub fn cosine_sign_at(f: &CosinePoly, x: &BigRational) -> i8 {
    let t: Vec<BigInt> = f.coeffs().iter().map(|&a| BigInt::from(a)).collect();
    let v = Chebyshev::homogeneous_value(&t, x.numer(), x.denom());
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::{family_g, parse_signs, to_cosine, CosineParity};
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn census(s: &str) -> ZCount {
        count_unimodular(&parse_signs(s).unwrap().to_int_poly()).unwrap()
    }

    #[test]
    fn chebyshev_examples() {
        let f = CosinePoly::new(vec![1, 2], CosineParity::All).unwrap();
        assert_eq!(chebyshev_transform(&f), IntPoly::from_i64s(&[1, 2]));
        let f = CosinePoly::new(vec![0, 0, 2], CosineParity::All).unwrap();
        assert_eq!(chebyshev_transform(&f), IntPoly::from_i64s(&[-2, 0, 4]));
        let f = CosinePoly::new(vec![0, 2, 0, -1], CosineParity::OddOnly).unwrap();
        assert_eq!(chebyshev_transform(&f), IntPoly::from_i64s(&[0, 5, 0, -4]));
    }

    #[test]
    fn real_root_examples() {
        let (m1, p1) = (rat(-1, 1), rat(1, 1));
        let r = count_real_roots(&IntPoly::from_i64s(&[1, 2]), &m1, &p1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 1);
        assert!(r[0].contains(&rat(-1, 2)));

        let r = count_real_roots(&IntPoly::from_i64s(&[1, -2, 1]), &m1, &p1).unwrap();
        assert_eq!(
            r,
            vec![RealRoot {
                lo: p1.clone(),
                hi: p1.clone(),
                multiplicity: 2
            }]
        );

        let r = count_real_roots(&IntPoly::from_i64s(&[-2, 0, 4]), &m1, &p1).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.multiplicity == 1));
        assert!((r[0].midpoint_f64() + 0.5f64.sqrt()).abs() < 0.5);

        assert_eq!(
            count_real_roots(&IntPoly::zero(), &m1, &p1),
            Err(RootError::ZeroPolynomial)
        );
    }

    #[test]
    fn exact_rational_interior_root_with_multiplicity() {
        // (2x − 1)^2 (x + 1/3)·3 = (4x² − 4x + 1)(3x + 1)
        let f = IntPoly::from_i64s(&[1, -4, 4]).mul(&IntPoly::from_i64s(&[1, 3]));
        let r = count_real_roots(&f, &rat(-1, 1), &rat(1, 1)).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].multiplicity, 1);
        assert!(r[0].contains(&rat(-1, 3)));
        assert_eq!(r[1].multiplicity, 2);
        assert!(r[1].contains(&rat(1, 2)));
    }

    #[test]
    fn unimodular_examples() {
        let z = census("++");
        assert_eq!((z.distinct, z.with_multiplicity, z.at_minus_one), (1, 1, 1));
        let z = census("++++");
        assert_eq!((z.distinct, z.with_multiplicity), (3, 3));
        let z = census("+--+");
        assert_eq!(
            (
                z.distinct,
                z.with_multiplicity,
                z.at_plus_one,
                z.at_minus_one
            ),
            (2, 3, 2, 1)
        );
        let z = census("+++");
        assert_eq!((z.distinct, z.with_multiplicity), (2, 2));
        assert_eq!(
            count_unimodular(&IntPoly::from_i64s(&[1, 1, -1])),
            Err(RootError::NotReciprocal)
        );
    }

    #[test]
    fn cyclotomic_products() {
        // (1+z)(1+z²)(1+z⁴) = 1 + z + ... + z⁷: roots are the 8th roots of unity except 1.
        let z = census("++++++++");
        assert_eq!(
            (
                z.distinct,
                z.with_multiplicity,
                z.at_minus_one,
                z.at_plus_one
            ),
            (7, 7, 1, 0)
        );
        // (1 − z)²(1 + z)…: 1 − z − z² + z³ times (1 + z³) = 1 − z − z² + 2z³ ... not Littlewood;
        // use (1 + z^3)(1 - z - z^2 + z^3)? Instead check Φ_6 = 1 − z + z².
        let z = census("+-+");
        assert_eq!((z.distinct, z.with_multiplicity), (2, 2));
        // (1+z)(1+z^2)... nonreciprocal pieces aside, a repeated unimodular pair:
        // (1 + z²)² = 1 + 2z² + z⁴ has ±i double.
        let z = count_unimodular(&IntPoly::from_i64s(&[1, 0, 2, 0, 1])).unwrap();
        assert_eq!(
            (z.distinct, z.with_multiplicity, z.odd_multiplicity_count),
            (2, 4, 0)
        );
    }

    #[test]
    fn oracle_examples() {
        let f = CosinePoly::new(vec![0, 2], CosineParity::OddOnly).unwrap();
        assert_eq!(grid_sign_change_oracle(&f, 64), 2);
        let f = CosinePoly::new(vec![1], CosineParity::All).unwrap();
        assert_eq!(grid_sign_change_oracle(&f, 100), 0);
        assert_eq!(grid_sign_change_oracle(&family_g(5), 4096), 2);
    }

    #[test]
    fn cosine_census_of_g_small() {
        for n in 0..30 {
            let z = count_cosine_roots(&family_g(n)).unwrap();
            assert_eq!(z.distinct, 2, "g_{n}");
        }
    }

    fn reciprocal_strategy(max_deg: usize) -> impl Strategy<Value = LittlewoodPoly> {
        (1..=max_deg).prop_flat_map(|n| {
            prop::collection::vec(prop::bool::ANY, n / 2 + 1).prop_map(move |half| {
                let mut c = vec![0i8; n + 1];
                for (j, &b) in half.iter().enumerate() {
                    let v = if b { 1 } else { -1 };
                    c[j] = v;
                    c[n - j] = v;
                }
                LittlewoodPoly::new(c).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn census_invariants(p in reciprocal_strategy(40)) {
            let z = count_littlewood(&p);
            prop_assert!(z.distinct <= z.with_multiplicity);
            prop_assert!(z.odd_multiplicity_count <= z.distinct);
            prop_assert!(z.with_multiplicity <= p.degree());
            prop_assert_eq!(z.with_multiplicity % 2, (z.at_plus_one + z.at_minus_one) % 2);
            let ind = usize::from(z.at_plus_one > 0) + usize::from(z.at_minus_one > 0);
            prop_assert_eq!((z.distinct - ind) % 2, 0);
            prop_assert_eq!(count_littlewood(&p.negate()), z);
        }

        #[test]
        fn census_matches_grid(p in reciprocal_strategy(24)) {
            let z = count_littlewood(&p);
            prop_assert_eq!(grid_unimodular_sign_changes(&p, 1 << 14).unwrap(), z.odd_multiplicity_count);
        }

        #[test]
        fn chebyshev_and_monomial_routes_agree(p in reciprocal_strategy(30)) {
            // Interior roots of the monomial transform, doubled, plus endpoint
            // roots, recover the distinct count.
            let z = count_littlewood(&p);
            let f = to_cosine(&p).unwrap();
            let big_f = chebyshev_transform(&f);
            let roots = count_real_roots(&big_f, &rat(-1, 1), &rat(1, 1)).unwrap();
            if p.degree() % 2 == 0 {
                let interior: usize = roots.iter().filter(|r| r.lo != rat(1,1) && r.hi != rat(-1,1)).map(|r| r.multiplicity).sum();
                prop_assert_eq!(2 * interior + z.at_plus_one + z.at_minus_one, z.with_multiplicity);
            } else {
                // z = e^{2iθ}: an interior conjugate pair gives x = ±cos(φ/2), z = −1 gives
                // x = 0 with the same order, z = 1 gives x = ±1 with half the order each.
                let total: usize = roots.iter().map(|r| r.multiplicity).sum();
                prop_assert_eq!(total, z.with_multiplicity);
                prop_assert_eq!(roots.len(), z.distinct + usize::from(z.at_plus_one > 0));
            }
        }

        #[test]
        fn cosine_sign_agrees_with_float(p in reciprocal_strategy(30), num in -99i64..100) {
            let f = to_cosine(&p).unwrap();
            let x = rat(num, 100);
            let v = f.eval((num as f64 / 100.0).acos());
            let s = cosine_sign_at(&f, &x);
            if v.abs() > 1e-9 {
                prop_assert_eq!(s, if v > 0.0 { 1 } else { -1 });
            }
        }
    }
}
