//! Polynomial value types, sign-string parsing, reciprocal to cosine
//! conversions, the half-polynomial `Q`, and the explicit families `g_N`, `h_m`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("invalid character at position {0}")]
    InvalidCharacter(usize),
    #[error("empty sign string")]
    Empty,
    #[error("polynomial is not reciprocal")]
    NotReciprocal,
    #[error("coefficient {index} is {value}, expected -1 or +1")]
    NotLittlewood { index: usize, value: i64 },
    #[error("odd-frequency cosine polynomial has nonzero even coefficient at {0}")]
    ParityViolation(usize),
    #[error("malformed polynomial record: {0}")]
    Malformed(String),
}

/// Polynomial with every coefficient in {-1, +1}; `coeffs[n]` multiplies `z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LittlewoodPoly {
    coeffs: Vec<i8>,
}

impl LittlewoodPoly {
    pub fn new(coeffs: Vec<i8>) -> Result<Self, PolyError> {
        if coeffs.is_empty() {
            return Err(PolyError::Empty);
        }
        if let Some((index, &v)) = coeffs.iter().enumerate().find(|(_, &c)| c != 1 && c != -1) {
            return Err(PolyError::NotLittlewood {
                index,
                value: v as i64,
            });
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[i8] {
        &self.coeffs
    }

    pub fn is_reciprocal(&self) -> bool {
        let n = self.coeffs.len();
        (0..n / 2).all(|j| self.coeffs[j] == self.coeffs[n - 1 - j])
    }

    pub fn negate(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn to_signs(&self) -> String {
        self.coeffs
            .iter()
            .map(|&c| if c > 0 { '+' } else { '-' })
            .collect()
    }

    pub fn to_int_poly(&self) -> IntPoly {
        IntPoly::from_i64s(&self.coeffs.iter().map(|&c| c as i64).collect::<Vec<_>>())
    }
}

/// Parses an ASCII sign string, `'+'` for +1 and `'-'` for -1.
pub fn parse_signs(s: &str) -> Result<LittlewoodPoly, PolyError> {
    if s.is_empty() {
        return Err(PolyError::Empty);
    }
    let coeffs = s
        .chars()
        .enumerate()
        .map(|(i, ch)| match ch {
            '+' => Ok(1),
            '-' => Ok(-1),
            _ => Err(PolyError::InvalidCharacter(i)),
        })
        .collect::<Result<Vec<i8>, _>>()?;
    LittlewoodPoly::new(coeffs)
}

/// Dense integer polynomial with arbitrary-precision coefficients, ascending
/// order, trailing zeros trimmed. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64s(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_reciprocal(&self) -> bool {
        let n = self.coeffs.len();
        (0..n / 2).all(|j| self.coeffs[j] == self.coeffs[n - 1 - j])
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: usize) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut c = vec![BigInt::zero(); k];
        c.extend(self.coeffs.iter().cloned());
        IntPoly::new(c)
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Exact quotient by `(q·x − p)` when it divides; `None` otherwise.
    pub fn div_linear(&self, p: &BigInt, q: &BigInt) -> Option<IntPoly> {
        let n = self.coeffs.len();
        if n < 2 {
            return None;
        }
        // Solve self = (q x - p)·b from the top down.
        let mut b = vec![BigInt::zero(); n - 1];
        let mut carry = BigInt::zero();
        for k in (1..n).rev() {
            // coefficient of x^k: q·b_{k-1} − p·b_k
            let target = &self.coeffs[k] + &carry;
            if !(&target % q).is_zero() {
                return None;
            }
            b[k - 1] = &target / q;
            carry = p * &b[k - 1];
        }
        // constant term: −p·b_0 must equal coeffs[0]
        if &self.coeffs[0] + &carry != BigInt::zero() {
            return None;
        }
        Some(IntPoly::new(b))
    }

    /// Multiplicity of `x = p/q` as a root, dividing it out; returns the cofactor.
    pub fn deflate_linear(&self, p: &BigInt, q: &BigInt) -> (usize, IntPoly) {
        let mut cur = self.clone();
        let mut k = 0;
        while let Some(next) = cur.div_linear(p, q) {
            cur = next;
            k += 1;
        }
        (k, cur)
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn max_abs(&self) -> BigInt {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_default()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }
}

/// `Σ coeffs[n]·e^{inθ}` in double precision.
pub fn eval_circle(p: &IntPoly, theta: f64) -> Complex64 {
    let z = Complex64::from_polar(1.0, theta);
    p.to_f64s()
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CosineParity {
    All,
    OddOnly,
}

/// `A_0 + Σ_{n≥1} A_n cos nθ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosinePoly {
    coeffs: Vec<i64>,
    parity: CosineParity,
}

impl CosinePoly {
    pub fn new(mut coeffs: Vec<i64>, parity: CosineParity) -> Result<Self, PolyError> {
        while coeffs.len() > 1 && coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        if parity == CosineParity::OddOnly {
            if let Some(i) = (0..coeffs.len()).step_by(2).find(|&i| coeffs[i] != 0) {
                return Err(PolyError::ParityViolation(i));
            }
        }
        Ok(Self { coeffs, parity })
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn parity(&self) -> CosineParity {
        self.parity
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, &a)| {
                if a == 0 {
                    0.0
                } else {
                    a as f64 * (n as f64 * theta).cos()
                }
            })
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|a| a.abs() as f64).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QParity {
    /// Built from an even-degree input; every coefficient is ±1.
    Even,
    /// Built from an odd-degree input; support on odd exponents only.
    Odd,
}

/// Half polynomial read off the upper half of a reciprocal Littlewood polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<i8>,
    parity: QParity,
}

impl QPoly {
    pub fn coeffs(&self) -> &[i8] {
        &self.coeffs
    }

    pub fn parity(&self) -> QParity {
        self.parity
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval_circle(&self, theta: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, theta);
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c as f64)
    }

    /// Value of the originating polynomial `P(e^{iθ})`, rebuilt from `Q` alone.
    pub fn littlewood_on_circle(&self, theta: f64) -> Complex64 {
        match self.parity {
            QParity::Even => {
                let n = 2 * self.degree();
                let middle = self.coeffs[0] as f64;
                let re = 2.0 * self.eval_circle(theta).re - middle;
                Complex64::from_polar(1.0, theta * n as f64 / 2.0) * re
            }
            QParity::Odd => {
                let n = self.degree();
                let re = 2.0 * self.eval_circle(theta / 2.0).re;
                Complex64::from_polar(1.0, theta * n as f64 / 2.0) * re
            }
        }
    }

    /// Inverse of [`build_q`].
    pub fn to_littlewood(&self) -> LittlewoodPoly {
        let upper: Vec<i8> = match self.parity {
            QParity::Even => self.coeffs.clone(),
            QParity::Odd => self.coeffs.iter().skip(1).step_by(2).copied().collect(),
        };
        let mut coeffs: Vec<i8> = upper.iter().rev().copied().collect();
        let skip = if self.parity == QParity::Even { 1 } else { 0 };
        coeffs.extend(upper.iter().skip(skip));
        LittlewoodPoly { coeffs }
    }
}

/// Cosine form of a reciprocal Littlewood polynomial on the circle.
///
/// Even `N`: `e^{-iNθ/2} P(e^{iθ})`. Odd `N`: `e^{-iNθ} P(e^{2iθ})`, odd frequencies only.
pub fn to_cosine(p: &LittlewoodPoly) -> Result<CosinePoly, PolyError> {
    if !p.is_reciprocal() {
        return Err(PolyError::NotReciprocal);
    }
    let n = p.degree();
    let a = p.coeffs();
    if n.is_multiple_of(2) {
        let h = n / 2;
        let mut c = vec![a[h] as i64];
        c.extend((1..=h).map(|k| 2 * a[h + k] as i64));
        CosinePoly::new(c, CosineParity::All)
    } else {
        let h = (n - 1) / 2;
        let mut c = vec![0i64; n + 1];
        for k in 1..=n.div_ceil(2) {
            c[2 * k - 1] = 2 * a[h + k] as i64;
        }
        CosinePoly::new(c, CosineParity::OddOnly)
    }
}

pub fn build_q(p: &LittlewoodPoly) -> Result<QPoly, PolyError> {
    if !p.is_reciprocal() {
        return Err(PolyError::NotReciprocal);
    }
    let n = p.degree();
    let a = p.coeffs();
    if n.is_multiple_of(2) {
        Ok(QPoly {
            coeffs: a[n / 2..].to_vec(),
            parity: QParity::Even,
        })
    } else {
        let h = (n - 1) / 2;
        let mut q = vec![0i8; n + 1];
        for k in 1..=n.div_ceil(2) {
            q[2 * k - 1] = a[h + k];
        }
        Ok(QPoly {
            coeffs: q,
            parity: QParity::Odd,
        })
    }
}

/// `cos θ + Σ_{j=0}^{N} (−1)^j cos((2j+1)θ)`.
pub fn family_g(n: usize) -> CosinePoly {
    let mut c = vec![0i64; 2 * n + 2];
    c[1] += 1;
    for j in 0..=n {
        c[2 * j + 1] += if j % 2 == 0 { 1 } else { -1 };
    }
    CosinePoly::new(c, CosineParity::OddOnly).expect("odd support by construction")
}

/// `Σ_{n=0}^{2m} (−1)^n cos((2n+1)θ)`.
pub fn family_h(m: usize) -> CosinePoly {
    let mut c = vec![0i64; 4 * m + 2];
    for n in 0..=2 * m {
        c[2 * n + 1] = if n % 2 == 0 { 1 } else { -1 };
    }
    CosinePoly::new(c, CosineParity::OddOnly).expect("odd support by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyKind {
    Littlewood,
    Cosine,
    Q,
}

/// Wire format `{"kind":..,"coeffs":[..],"parity":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyRecord {
    pub kind: PolyKind,
    pub coeffs: Vec<i64>,
    pub parity: Option<String>,
}

impl From<&LittlewoodPoly> for PolyRecord {
    fn from(p: &LittlewoodPoly) -> Self {
        Self {
            kind: PolyKind::Littlewood,
            coeffs: p.coeffs.iter().map(|&c| c as i64).collect(),
            parity: None,
        }
    }
}

impl From<&CosinePoly> for PolyRecord {
    fn from(p: &CosinePoly) -> Self {
        let parity = match p.parity {
            CosineParity::All => "all",
            CosineParity::OddOnly => "odd",
        };
        Self {
            kind: PolyKind::Cosine,
            coeffs: p.coeffs.clone(),
            parity: Some(parity.into()),
        }
    }
}

impl From<&QPoly> for PolyRecord {
    fn from(p: &QPoly) -> Self {
        let parity = match p.parity {
            QParity::Even => "even",
            QParity::Odd => "odd",
        };
        Self {
            kind: PolyKind::Q,
            coeffs: p.coeffs.iter().map(|&c| c as i64).collect(),
            parity: Some(parity.into()),
        }
    }
}

impl TryFrom<&PolyRecord> for LittlewoodPoly {
    type Error = PolyError;
    fn try_from(r: &PolyRecord) -> Result<Self, PolyError> {
        if r.kind != PolyKind::Littlewood {
            return Err(PolyError::Malformed("expected kind littlewood".into()));
        }
        let mut c = Vec::with_capacity(r.coeffs.len());
        for (index, &v) in r.coeffs.iter().enumerate() {
            if v != 1 && v != -1 {
                return Err(PolyError::NotLittlewood { index, value: v });
            }
            c.push(v as i8);
        }
        LittlewoodPoly::new(c)
    }
}

impl TryFrom<&PolyRecord> for CosinePoly {
    type Error = PolyError;
    fn try_from(r: &PolyRecord) -> Result<Self, PolyError> {
        if r.kind != PolyKind::Cosine {
            return Err(PolyError::Malformed("expected kind cosine".into()));
        }
        let parity = match r.parity.as_deref() {
            None | Some("all") => CosineParity::All,
            Some("odd") => CosineParity::OddOnly,
            Some(other) => return Err(PolyError::Malformed(format!("unknown parity {other}"))),
        };
        CosinePoly::new(r.coeffs.clone(), parity)
    }
}
