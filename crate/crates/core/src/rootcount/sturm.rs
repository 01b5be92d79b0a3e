//! Sturm chains over `Z[x]` with primitive pseudo-remainders, generic over the
//! coefficient basis. The Chebyshev basis keeps coefficients of cosine
//! polynomials small, which the monomial basis does not.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub(crate) type Coeffs = Vec<BigInt>;

pub(crate) fn trim(v: &mut Coeffs) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

fn sign(v: &BigInt) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Divides by the positive content. Leaves the zero polynomial alone.
pub(crate) fn primitive(mut v: Coeffs) -> Coeffs {
    let mut g = BigInt::zero();
    for c in &v {
        g = g.gcd(c);
        if g.is_one() {
            return v;
        }
    }
    if g.is_zero() || g.is_one() {
        return v;
    }
    for c in v.iter_mut() {
        *c = &*c / &g;
    }
    v
}

pub(crate) trait Basis {
    /// Subtracts `beta · X_m(b)` from `r`, where `X_m(b)` has degree `deg b + m`.
    fn sub_raised(r: &mut Coeffs, beta: &BigInt, b: &[BigInt], m: usize);
    /// Leading coefficient of `X_m(b)`.
    fn raised_leading(b: &[BigInt], m: usize) -> BigInt;
    /// A positive multiple of the derivative.
    fn derivative(a: &[BigInt]) -> Coeffs;
    /// Value at `p/q` (q > 0) scaled by `q^deg`, whose sign is the sign of the value.
    fn homogeneous_value(a: &[BigInt], p: &BigInt, q: &BigInt) -> BigInt;

    fn sign_at(a: &[BigInt], p: &BigInt, q: &BigInt) -> i8 {
        if q.is_one() && p.abs().is_one() {
            // Both bases take the values 1 and (−1)^k at ±1.
            let neg = p.is_negative();
            let s: BigInt = a
                .iter()
                .enumerate()
                .map(|(k, c)| if neg && k % 2 == 1 { -c } else { c.clone() })
                .sum();
            return sign(&s);
        }
        sign(&Self::homogeneous_value(a, p, q))
    }
}

pub(crate) struct Monomial;
pub(crate) struct Chebyshev;

impl Basis for Monomial {
    fn sub_raised(r: &mut Coeffs, beta: &BigInt, b: &[BigInt], m: usize) {
        for (j, bj) in b.iter().enumerate() {
            r[j + m] -= beta * bj;
        }
    }

    fn raised_leading(b: &[BigInt], _m: usize) -> BigInt {
        b.last().cloned().unwrap_or_default()
    }

    fn derivative(a: &[BigInt]) -> Coeffs {
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect()
    }

    fn homogeneous_value(a: &[BigInt], p: &BigInt, q: &BigInt) -> BigInt {
        // Σ a_k p^k q^{n-k} by Horner on the homogenized form.
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for c in a.iter().rev() {
            acc = acc * p + c * &qpow;
            qpow *= q;
        }
        acc
    }
}

impl Basis for Chebyshev {
    fn sub_raised(r: &mut Coeffs, beta: &BigInt, b: &[BigInt], m: usize) {
        if m == 0 {
            for (j, bj) in b.iter().enumerate() {
                r[j] -= beta * bj;
            }
            return;
        }
        // 2·T_m·T_j = T_{m+j} + T_{|m−j|}
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            let t = beta * bj;
            r[m + j] -= &t;
            r[m.abs_diff(j)] -= t;
        }
    }

    fn raised_leading(b: &[BigInt], m: usize) -> BigInt {
        let lc = b.last().cloned().unwrap_or_default();
        if m >= 1 && b.len() == 1 {
            lc * 2
        } else {
            lc
        }
    }

    fn derivative(a: &[BigInt]) -> Coeffs {
        // d_{k-1} = d_{k+1} + 2k·a_k gives f' = d_0/2 + Σ_{k≥1} d_k T_k; return 2f'.
        let n = a.len();
        if n <= 1 {
            return Vec::new();
        }
        let mut d = vec![BigInt::zero(); n + 1];
        for k in (1..n).rev() {
            d[k - 1] = &d[k + 1] + &a[k] * BigInt::from(2 * k);
        }
        d.truncate(n - 1);
        for c in d.iter_mut().skip(1) {
            *c *= 2;
        }
        d
    }

    fn homogeneous_value(a: &[BigInt], p: &BigInt, q: &BigInt) -> BigInt {
        // H_k = q^k T_k(p/q): H_0 = 1, H_1 = p, H_{k+1} = 2p·H_k − q²·H_{k−1}.
        let n = a.len();
        if n == 0 {
            return BigInt::zero();
        }
        let q2 = q * q;
        let two_p = p * 2;
        let mut hs = Vec::with_capacity(n);
        hs.push(BigInt::one());
        if n > 1 {
            hs.push(p.clone());
        }
        for k in 2..n {
            let next = &two_p * &hs[k - 1] - &q2 * &hs[k - 2];
            hs.push(next);
        }
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for k in (0..n).rev() {
            // term a_k H_k q^{deg-k}
            if !a[k].is_zero() {
                acc += &a[k] * &hs[k] * &qpow;
            }
            if k > 0 {
                qpow *= q;
            }
        }
        acc
    }
}

/// Positive multiple of `a mod b`.
pub(crate) fn prem_pos<B: Basis>(a: &[BigInt], b: &[BigInt]) -> Coeffs {
    let db = b.len() - 1;
    let mut r: Coeffs = a.to_vec();
    trim(&mut r);
    while r.len() > db && !r.is_empty() {
        let m = r.len() - 1 - db;
        let ls = B::raised_leading(b, m);
        let lr = r.last().unwrap().clone();
        let g = ls.gcd(&lr);
        let alpha = (&ls / &g).abs();
        let beta = if ls.is_negative() {
            -(&lr / &g)
        } else {
            &lr / &g
        };
        if !alpha.is_one() {
            for c in r.iter_mut() {
                *c *= &alpha;
            }
        }
        B::sub_raised(&mut r, &beta, b, m);
        debug_assert!(r.last().unwrap().is_zero());
        trim(&mut r);
    }
    primitive(r)
}

/// `S_0 = f`, `S_1 = f'`, `S_{k+1} = −prem(S_{k−1}, S_k)`, each made primitive.
/// The last element is a gcd of `f` and `f'`.
pub(crate) fn chain<B: Basis>(f: &[BigInt]) -> Vec<Coeffs> {
    let mut f = f.to_vec();
    trim(&mut f);
    let s0 = primitive(f);
    let mut out = vec![s0];
    if out[0].len() <= 1 {
        return out;
    }
    out.push(primitive(B::derivative(&out[0])));
    loop {
        let k = out.len();
        let r = prem_pos::<B>(&out[k - 2], &out[k - 1]);
        if r.is_empty() {
            break;
        }
        out.push(r.into_iter().map(|c| -c).collect());
    }
    out
}

pub(crate) fn variations<B: Basis>(chain: &[Coeffs], p: &BigInt, q: &BigInt) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in chain {
        let v = B::sign_at(s, p, q);
        if v != 0 {
            if last != 0 && v != last {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// Sturm chains of `f`, `gcd(f, f')`, `gcd` of that with its derivative, and so on.
/// Level `i` counts the distinct roots of multiplicity greater than `i`.
pub(crate) struct LevelChains<B: Basis> {
    pub(crate) levels: Vec<Vec<Coeffs>>,
    _basis: std::marker::PhantomData<B>,
}

impl<B: Basis> LevelChains<B> {
    pub(crate) fn new(f: &[BigInt]) -> Self {
        let mut levels = Vec::new();
        let mut cur = f.to_vec();
        trim(&mut cur);
        while cur.len() > 1 {
            let c = chain::<B>(&cur);
            let g = c.last().unwrap().clone();
            levels.push(c);
            cur = g;
        }
        Self {
            levels,
            _basis: std::marker::PhantomData,
        }
    }

    /// Per-level distinct-root counts on `(a, b]`; `a` must not be a root.
    pub(crate) fn counts(&self, a: (&BigInt, &BigInt), b: (&BigInt, &BigInt)) -> Vec<usize> {
        self.levels
            .iter()
            .map(|c| {
                let va = variations::<B>(c, a.0, a.1);
                let vb = variations::<B>(c, b.0, b.1);
                va.saturating_sub(vb)
            })
            .collect()
    }

    pub(crate) fn base(&self) -> Option<&Coeffs> {
        self.levels.first().map(|c| &c[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: &[i64]) -> Coeffs {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn chebyshev_derivative_matches_monomial() {
        // 2cosθ − cos3θ ↔ T-basis [0,2,0,-1]; power basis −4x³+5x; derivative −12x²+5.
        let d = Chebyshev::derivative(&bi(&[0, 2, 0, -1]));
        // 2f' = −24x² + 10 = −12(T_2+1) + 10 = −2 − 12 T_2
        assert_eq!(d, bi(&[-2, 0, -12]));
    }

    #[test]
    fn chebyshev_evaluation() {
        // T_3(1/2) = 4/8 − 3/2 = −1; homogenized by q^3 = 8 → −8
        let v =
            Chebyshev::homogeneous_value(&bi(&[0, 0, 0, 1]), &BigInt::from(1), &BigInt::from(2));
        assert_eq!(v, BigInt::from(-8));
        // 1 + 2T_1 at −1/2 is 0
        let v = Chebyshev::homogeneous_value(&bi(&[1, 2]), &BigInt::from(-1), &BigInt::from(2));
        assert!(v.is_zero());
    }

    #[test]
    fn counts_simple() {
        // (x−1/2)(x+1/3)(x−2) = x³ − 13/6 x² + 1/3 x + 1/3 → 6x³ − 13x² + 2x + 2
        let f = bi(&[2, 2, -13, 6]);
        let lc = LevelChains::<Monomial>::new(&f);
        let m1 = BigInt::from(-1);
        let one = BigInt::one();
        assert_eq!(lc.counts((&m1, &one), (&one, &one)), vec![2]);
        let three = BigInt::from(3);
        assert_eq!(lc.counts((&m1, &one), (&three, &one)), vec![3]);
    }

    #[test]
    fn multiplicity_levels() {
        // (x−1/2)^3 (x+1/2) scaled: (2x−1)^3 (2x+1)
        let a = bi(&[-1, 2]);
        let b = bi(&[1, 2]);
        let mul = |x: &Coeffs, y: &Coeffs| {
            let mut o = vec![BigInt::zero(); x.len() + y.len() - 1];
            for (i, u) in x.iter().enumerate() {
                for (j, v) in y.iter().enumerate() {
                    o[i + j] += u * v;
                }
            }
            o
        };
        let f = mul(&mul(&mul(&a, &a), &a), &b);
        let lc = LevelChains::<Monomial>::new(&f);
        let m1 = BigInt::from(-1);
        let one = BigInt::one();
        assert_eq!(lc.counts((&m1, &one), (&one, &one)), vec![2, 1, 1]);
    }
}
