//! Finite-`N` diagnostics for trigonometric sums with real frequencies: sign-change
//! criteria, Weyl second moments, local rescaling of block families, oscillation
//! counts, the cancellation case, and Parseval checks on sign patterns.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

/// `e(x) = exp(2πix)`.
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymError {
    #[error("not in normalized form: {0}")]
    NotNormalized(String),
    #[error("term {0} has an untagged frequency")]
    UntaggedFrequency(usize),
    #[error("pairing declared with unknown label {0}")]
    UnknownPair(String),
    #[error("declared pair {0}/{1} does not sum to 1")]
    InconsistentPair(String, String),
    #[error("resolution {got} below the required {required}")]
    ResolutionTooLow { got: usize, required: usize },
    #[error("invalid window")]
    InvalidWindow,
    #[error("hypothesis fails for every m")]
    HypothesisFails(Vec<HypothesisRow>),
    #[error("blocks are not in the cancellation configuration")]
    NotCancellation,
    #[error("bad support: {0}")]
    BadSupport(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
}

/// A real frequency with an explicit arithmetic tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequency {
    Rational {
        num: i64,
        den: u64,
    },
    /// `pair` names another irrational frequency with `ρ + ρ′ = 1`.
    Irrational {
        value: f64,
        label: String,
        #[serde(default)]
        pair: Option<String>,
    },
    Untagged(f64),
}

impl Frequency {
    pub fn value(&self) -> f64 {
        match self {
            Frequency::Rational { num, den } => *num as f64 / *den as f64,
            Frequency::Irrational { value, .. } => *value,
            Frequency::Untagged(v) => *v,
        }
    }

    fn is_one(&self) -> bool {
        matches!(self, Frequency::Rational { num, den } if *num > 0 && *num as u64 == *den)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub amp: Complex64,
    pub freq: Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SumForm {
    /// `a_0 + Σ (a_j e(ρ_j u) + conj(a_j) e(−ρ_j u))`
    Symmetric,
    /// `a_0 + Im Σ b_j e(ρ_j u)`
    Im,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedTrigSum {
    pub form: SumForm,
    #[serde(default)]
    pub a0: f64,
    pub terms: Vec<Term>,
}

impl GeneralizedTrigSum {
    pub fn symmetric(a0: f64, terms: Vec<Term>) -> Self {
        Self {
            form: SumForm::Symmetric,
            a0,
            terms,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let s: Complex64 = self
            .terms
            .iter()
            .map(|t| t.amp * e(t.freq.value() * u))
            .sum();
        match self.form {
            SumForm::Symmetric => self.a0 + 2.0 * s.re,
            SumForm::Im => self.a0 + s.im,
        }
    }

    /// Symmetric form of the same function; zero-frequency terms fold into `a_0`.
    pub fn to_symmetric(&self) -> Self {
        match self.form {
            SumForm::Symmetric => self.clone(),
            SumForm::Im => {
                let mut a0 = self.a0;
                let mut terms = Vec::new();
                for t in &self.terms {
                    if t.freq.value() == 0.0 {
                        a0 += t.amp.im;
                    } else {
                        terms.push(Term {
                            amp: t.amp / Complex64::new(0.0, 2.0),
                            freq: t.freq.clone(),
                        });
                    }
                }
                Self {
                    form: SumForm::Symmetric,
                    a0,
                    terms,
                }
            }
        }
    }

    fn scale(&self) -> f64 {
        self.a0.abs() + 2.0 * self.terms.iter().map(|t| t.amp.norm()).sum::<f64>()
    }

    fn max_freq(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.freq.value().abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    InfinitelyMany,
    Inconclusive,
}

/// Requires `0 < ρ_1 < … < ρ_l = 1` (the last tagged rational 1) and `a_l ≠ 0`.
pub fn signchange_criterion(h: &GeneralizedTrigSum) -> Result<Criterion, AsymError> {
    let h = h.to_symmetric();
    let l = h.terms.len();
    if l == 0 {
        return Err(AsymError::NotNormalized("no terms".into()));
    }
    let vals: Vec<f64> = h.terms.iter().map(|t| t.freq.value()).collect();
    if vals[0] <= 0.0 || vals.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AsymError::NotNormalized(
            "frequencies must be positive and strictly increasing".into(),
        ));
    }
    if !h.terms[l - 1].freq.is_one() {
        return Err(AsymError::NotNormalized(
            "largest frequency must be the rational 1".into(),
        ));
    }
    let al = h.terms[l - 1].amp.norm();
    if al == 0.0 {
        return Err(AsymError::NotNormalized("a_l is zero".into()));
    }
    let a0 = h.a0.abs();
    let middle = h.terms[..l - 1].iter().any(|t| t.amp.norm() != 0.0);
    let tol = 1e-12 * a0.max(1.0);
    Ok(if 2.0 * al > a0 + tol || (2.0 * al >= a0 - tol && middle) {
        Criterion::InfinitelyMany
    } else {
        Criterion::Inconclusive
    })
}

/// Sign changes on the grid `u_0 − h, u_0, u_0 + h, …, u_1 − h` with `h = (u_1 − u_0)/res`.
/// Samples within `1e−12` of zero (relative to the coefficient mass) are skipped, so a
/// root at `u_0` counts and one at `u_1` does not.
pub fn count_changes(
    h: &GeneralizedTrigSum,
    u0: f64,
    u1: f64,
    res: usize,
) -> Result<usize, AsymError> {
    if u1.partial_cmp(&u0) != Some(std::cmp::Ordering::Greater) {
        return Err(AsymError::InvalidWindow);
    }
    let required = (64.0 * (u1 - u0) * h.max_freq()).ceil() as usize;
    if res < required || res == 0 {
        return Err(AsymError::ResolutionTooLow {
            got: res,
            required: required.max(1),
        });
    }
    let step = (u1 - u0) / res as f64;
    let floor = 1e-12 * h.scale().max(1.0);
    let mut last = 0i8;
    let mut count = 0;
    for k in -1..res as i64 {
        let v = h.eval(u0 + k as f64 * step);
        if v.abs() <= floor {
            continue;
        }
        let s = if v > 0.0 { 1 } else { -1 };
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylMoments {
    pub mean: f64,
    pub mean_square: f64,
    /// `2(Σ_{Λ2} |a_j|² + Σ_{Λ1} |a_j e(θ/2) + conj(a_j′) e(−θ/2)|²)`.
    pub predicted_irrational: f64,
    /// Adds the average of `w_1(θ + m)²` over one period of the rational part.
    pub predicted_total: f64,
    pub lambda1: Vec<(usize, usize)>,
    pub lambda2: Vec<usize>,
    pub rational_period: u64,
}

fn lcm_of_dens(h: &GeneralizedTrigSum) -> u64 {
    h.terms
        .iter()
        .filter_map(|t| match t.freq {
            Frequency::Rational { num, den } => {
                let g = (num.unsigned_abs()).gcd(&den);
                Some(den / g.max(1))
            }
            _ => None,
        })
        .fold(1u64, |acc, d| acc.lcm(&d))
}

/// Period of the rational part in `u`: the lcm of reduced denominators.
pub fn rational_period(h: &GeneralizedTrigSum) -> u64 {
    lcm_of_dens(h)
}

/// The rational-frequency part `w_1`, as a sum of the same form.
pub fn rational_part(h: &GeneralizedTrigSum) -> GeneralizedTrigSum {
    GeneralizedTrigSum {
        form: h.form,
        a0: h.a0,
        terms: h
            .terms
            .iter()
            .filter(|t| matches!(t.freq, Frequency::Rational { .. }))
            .cloned()
            .collect(),
    }
}

/// `Σ_{m=1}^n H(θ + p·m)`.
pub fn partial_sum(h: &GeneralizedTrigSum, theta: f64, p: u64, n: u64) -> f64 {
    (1..=n).map(|m| h.eval(theta + (p * m) as f64)).sum()
}

/// Empirical means of `H(θ + m)` and `H(θ + m)²` over `m = 1..n` and the predicted
/// limit of the second. Pairings `ρ_j + ρ_j′ = 1` come only from declared tags.
pub fn weyl_moments(h: &GeneralizedTrigSum, theta: f64, n: u64) -> Result<WeylMoments, AsymError> {
    for (i, t) in h.terms.iter().enumerate() {
        if matches!(t.freq, Frequency::Untagged(_)) {
            return Err(AsymError::UntaggedFrequency(i));
        }
    }
    let sym = h.to_symmetric();
    let labels: BTreeMap<&str, usize> = sym
        .terms
        .iter()
        .enumerate()
        .filter_map(|(i, t)| match &t.freq {
            Frequency::Irrational { label, .. } => Some((label.as_str(), i)),
            _ => None,
        })
        .collect();
    let mut partner: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, t) in sym.terms.iter().enumerate() {
        if let Frequency::Irrational {
            pair: Some(p),
            label,
            value,
        } = &t.freq
        {
            let &j = labels
                .get(p.as_str())
                .ok_or_else(|| AsymError::UnknownPair(p.clone()))?;
            if (value + sym.terms[j].freq.value() - 1.0).abs() > 1e-9 || i == j {
                return Err(AsymError::InconsistentPair(label.clone(), p.clone()));
            }
            partner.insert(i, j);
            partner.insert(j, i);
        }
    }
    let mut lambda1 = Vec::new();
    let mut lambda2 = Vec::new();
    let mut predicted_irrational = 0.0;
    for (i, t) in sym.terms.iter().enumerate() {
        if !matches!(t.freq, Frequency::Irrational { .. }) {
            continue;
        }
        match partner.get(&i) {
            Some(&j) if i < j => {
                lambda1.push((i, j));
                let v = t.amp * e(theta / 2.0) + sym.terms[j].amp.conj() * e(-theta / 2.0);
                predicted_irrational += 2.0 * v.norm_sqr();
            }
            Some(_) => {}
            None => {
                lambda2.push(i);
                predicted_irrational += 2.0 * t.amp.norm_sqr();
            }
        }
    }
    let w1 = rational_part(&sym);
    let period = lcm_of_dens(&sym);
    let rational_sq = (0..period)
        .map(|m| w1.eval(theta + m as f64).powi(2))
        .sum::<f64>()
        / period as f64;

    let (mut s1, mut s2) = (0.0, 0.0);
    for m in 1..=n {
        let v = sym.eval(theta + m as f64);
        s1 += v;
        s2 += v * v;
    }
    let nn = n.max(1) as f64;
    Ok(WeylMoments {
        mean: s1 / nn,
        mean_square: s2 / nn,
        predicted_irrational,
        predicted_total: predicted_irrational + rational_sq,
        lambda1,
        lambda2,
        rational_period: period,
    })
}

/// `Σ c_k e(kθ)` with integer `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrigSeries {
    pub terms: Vec<(i64, Complex64)>,
}

impl TrigSeries {
    pub fn new(terms: Vec<(i64, Complex64)>) -> Self {
        Self { terms }
    }

    /// `Σ_m ε_m e(mθ)`, the boundary values of `Σ ε_m z^m`.
    pub fn from_pattern(eps: &[i64]) -> Self {
        Self::new(
            eps.iter()
                .enumerate()
                .map(|(m, &x)| (m as i64, Complex64::new(x as f64, 0.0)))
                .collect(),
        )
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| c * e(*k as f64 * theta))
            .sum()
    }

    pub fn degree(&self) -> u64 {
        self.terms
            .iter()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(k, _)| k.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Like terms merged and zero coefficients dropped.
    pub fn canonical(&self) -> BTreeMap<i64, Complex64> {
        let mut m: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (k, c) in &self.terms {
            *m.entry(*k).or_default() += c;
        }
        m.retain(|_, c| c.norm() != 0.0);
        m
    }

    pub fn neg(&self) -> Self {
        Self::new(self.terms.iter().map(|(k, c)| (*k, -c)).collect())
    }
}

/// `⌊N^{num/den}⌋` computed exactly, or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Const(i64),
    Pow { num: u32, den: u32 },
}

fn iroot(x: u128, k: u32) -> u128 {
    if k == 1 || x < 2 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / k as f64) as u128;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}

impl Growth {
    pub fn at(&self, n: u64) -> i64 {
        match *self {
            Growth::Const(k) => k,
            Growth::Pow { num, den } => iroot((n as u128).pow(num), den) as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRule {
    /// `(coefficient, exponent rule)`
    pub terms: Vec<(Complex64, Growth)>,
}

/// `H_N(θ) = Σ_j B_j^{(N)}(θ) e(r_j^{(N)} θ)` with `r_j^{(N)} = ρ_j N + offset_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub rhos: Vec<f64>,
    pub blocks: Vec<BlockRule>,
    pub offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyInstance {
    pub n: u64,
    pub blocks: Vec<TrigSeries>,
    pub anchors: Vec<f64>,
    pub degree_bound: u64,
}

impl FamilyInstance {
    pub fn eval(&self, theta: f64) -> Complex64 {
        self.blocks
            .iter()
            .zip(&self.anchors)
            .map(|(b, &r)| b.eval(theta) * e(r * theta))
            .sum()
    }
}

impl FamilySpec {
    pub fn validate(&self) -> Result<(), AsymError> {
        if self.blocks.len() != self.rhos.len()
            || self.offsets.len() != self.rhos.len()
            || self.rhos.is_empty()
        {
            return Err(AsymError::InvalidFamily(
                "rhos, blocks and offsets must have equal nonzero length".into(),
            ));
        }
        if self.rhos.windows(2).any(|w| w[0] >= w[1])
            || self.rhos[0] < 0.0
            || *self.rhos.last().unwrap() > 1.0
        {
            return Err(AsymError::InvalidFamily(
                "need 0 ≤ ρ_0 < … < ρ_l ≤ 1".into(),
            ));
        }
        Ok(())
    }

    pub fn instance(&self, n: u64) -> FamilyInstance {
        let blocks: Vec<TrigSeries> = self
            .blocks
            .iter()
            .map(|b| TrigSeries::new(b.terms.iter().map(|(c, g)| (g.at(n), *c)).collect()))
            .collect();
        let degree_bound = blocks.iter().map(TrigSeries::degree).max().unwrap_or(0);
        let anchors = self
            .rhos
            .iter()
            .zip(&self.offsets)
            .map(|(r, o)| r * n as f64 + o)
            .collect();
        FamilyInstance {
            n,
            blocks,
            anchors,
            degree_bound,
        }
    }

    /// Random family: `1..=3` blocks, up to four terms each with coefficients in
    /// `{±1, ±i}`, every block of exact degree `growth(N)`, small anchor offsets.
    pub fn random<R: Rng>(rng: &mut R, growth: Growth) -> Self {
        let l = rng.gen_range(1..=2usize);
        let mut rhos = vec![0.0];
        let mut mids: Vec<f64> = (0..l - 1).map(|_| rng.gen_range(0.1..0.9)).collect();
        mids.sort_by(f64::total_cmp);
        rhos.extend(mids);
        rhos.push(1.0);
        let units = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ];
        let blocks = (0..=l)
            .map(|_| {
                let mut terms = vec![(units[rng.gen_range(0..4)], growth)];
                for _ in 0..rng.gen_range(0..=3) {
                    let g = if rng.gen_bool(0.5) {
                        Growth::Const(rng.gen_range(0..=3))
                    } else {
                        growth
                    };
                    terms.push((units[rng.gen_range(0..4)], g));
                }
                BlockRule { terms }
            })
            .collect();
        let offsets = (0..=l).map(|_| rng.gen_range(-3..=3) as f64).collect();
        Self {
            rhos,
            blocks,
            offsets,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalProfile {
    pub b: Vec<Complex64>,
    pub sup_error: f64,
    pub degree_bound: u64,
}

/// `b_j = B_j(γ) e(r_j γ)` and the sup over `u ∈ (−C, C)` of
/// `|H_N(γ + u/N) − Σ b_j e(ρ_j u)|` (imaginary parts only when `im_only`).
pub fn local_profile(
    f: &FamilySpec,
    n: u64,
    gamma: f64,
    c: f64,
    grid: usize,
    im_only: bool,
) -> LocalProfile {
    let inst = f.instance(n);
    let b: Vec<Complex64> = inst
        .blocks
        .iter()
        .zip(&inst.anchors)
        .map(|(bl, &r)| bl.eval(gamma) * e(r * gamma))
        .collect();
    let nf = n as f64;
    let mut sup: f64 = 0.0;
    for i in 0..grid {
        let u = -c + 2.0 * c * (i as f64 + 0.5) / grid as f64;
        let lhs = inst.eval(gamma + u / nf);
        let rhs: Complex64 = b
            .iter()
            .zip(&f.rhos)
            .map(|(bj, &rho)| bj * e(rho * u))
            .sum();
        let err = if im_only {
            (lhs.im - rhs.im).abs()
        } else {
            (lhs - rhs).norm()
        };
        sup = sup.max(err);
    }
    LocalProfile {
        b,
        sup_error: sup,
        degree_bound: inst.degree_bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRow {
    pub m: usize,
    pub abs_last: f64,
    pub abs_im_first: f64,
    pub holds: bool,
}

/// Blocks `B_1..B_l`, breakpoints `ρ_0 = 0 < … < ρ_l = 1`, period `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationSpec {
    pub d: u64,
    pub rhos: Vec<f64>,
    pub blocks: Vec<TrigSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub m: usize,
    pub oscillations: usize,
    pub level_hits: usize,
    pub window: (f64, f64),
    pub anchors: Vec<i64>,
    pub hypothesis: Vec<HypothesisRow>,
}

impl OscillationSpec {
    /// `r_j` is the largest multiple of `D` in `(ρ_{j−1}N, ρ_j N)`, `r_0 = 0`.
    pub fn anchors(&self, n: u64) -> Result<Vec<i64>, AsymError> {
        let d = self.d as f64;
        let mut r = vec![0i64];
        for j in 1..self.rhos.len() {
            let lo = self.rhos[j - 1] * n as f64;
            let hi = self.rhos[j] * n as f64;
            let k = ((hi / d).ceil() - 1.0) as i64;
            let v = k * self.d as i64;
            if (v as f64) <= lo {
                return Err(AsymError::InvalidFamily(format!(
                    "no multiple of D in ({lo}, {hi})"
                )));
            }
            r.push(v);
        }
        Ok(r)
    }

    pub fn hypothesis(&self) -> Vec<HypothesisRow> {
        let l = self.blocks.len();
        (0..self.d as usize)
            .map(|m| {
                let th = m as f64 / self.d as f64;
                let vals: Vec<Complex64> = self.blocks.iter().map(|b| b.eval(th)).collect();
                let abs_last = vals[l - 1].norm();
                let abs_im_first = vals[0].im.abs();
                let tol = 1e-12 * abs_last.max(abs_im_first).max(1.0);
                let holds = if abs_last > abs_im_first + tol {
                    true
                } else if (abs_last - abs_im_first).abs() <= tol {
                    vals.windows(2).any(|w| (w[1] - w[0]).norm() > tol)
                } else {
                    false
                };
                HypothesisRow {
                    m,
                    abs_last,
                    abs_im_first,
                    holds,
                }
            })
            .collect()
    }

    /// `f_N(θ) = Re(Σ_j B_j(θ)(e(θr_j) − e(θr_{j−1}))/(e(θD) − 1))`, using the
    /// Dirichlet-kernel form so that it stays finite at `θ ∈ Z/D`.
    pub fn f_n(&self, anchors: &[i64], theta: f64) -> f64 {
        let d = self.d as f64;
        let k = (theta * d).round();
        let delta = theta - k / d;
        let ki = k as i64;
        let mut s = Complex64::new(0.0, 0.0);
        for (j, b) in self.blocks.iter().enumerate() {
            let (ra, rb) = (anchors[j + 1], anchors[j]);
            let span = ra - rb;
            let q = span / self.d as i64;
            let ratio = if delta == 0.0 || (PI * d * delta).sin() == 0.0 {
                q as f64
            } else {
                (PI * span as f64 * delta).sin() / (PI * d * delta).sin()
            };
            let sign = if (ki * (q + 1)).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            let phase = e(theta * (ra + rb - self.d as i64) as f64 / 2.0);
            s += b.eval(theta) * phase * (sign * ratio);
        }
        s.re
    }
}

/// Counts alternating strict crossings of `±cN` by `f_N` on `(m/D − C/N, m/D + C/N)`
/// for the `m` with the largest hypothesis margin.
pub fn prop1_oscillation(
    spec: &OscillationSpec,
    n: u64,
    c: f64,
    window: f64,
) -> Result<Oscillation, AsymError> {
    if spec.blocks.is_empty() || spec.rhos.len() != spec.blocks.len() + 1 || spec.d == 0 {
        return Err(AsymError::InvalidFamily(
            "need l blocks and l+1 breakpoints".into(),
        ));
    }
    let hyp = spec.hypothesis();
    let best = hyp
        .iter()
        .filter(|r| r.holds)
        .max_by(|a, b| (a.abs_last - a.abs_im_first).total_cmp(&(b.abs_last - b.abs_im_first)))
        .map(|r| r.m);
    let Some(m) = best else {
        return Err(AsymError::HypothesisFails(hyp));
    };
    let anchors = spec.anchors(n)?;
    let nf = n as f64;
    let centre = m as f64 / spec.d as f64;
    let (lo, hi) = (centre - window / nf, centre + window / nf);
    let samples = ((512.0 * window).ceil() as usize).max(1024);
    let level = c * nf;
    let mut hits: Vec<i8> = Vec::new();
    for i in 0..samples {
        let th = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
        let v = spec.f_n(&anchors, th);
        let s = if v > level {
            1
        } else if v < -level {
            -1
        } else {
            0
        };
        if s != 0 && hits.last() != Some(&s) {
            hits.push(s);
        }
    }
    let level_hits = hits.len();
    let start = hits.iter().position(|&s| s == -1).unwrap_or(hits.len());
    let oscillations = (hits.len() - start) / 2;
    Ok(Oscillation {
        m,
        oscillations,
        level_hits,
        window: (lo, hi),
        anchors,
        hypothesis: hyp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub n: u64,
    pub max_residual: f64,
}

/// With `B_l = −B_0` and zero middle blocks, `G_N(θ) = Im Σ_j B_j(θ) e(r_j θ)` vanishes
/// at every `θ = n/N` when `r_l − r_0 ≡ 0 (mod N)`; checks this for `n = 1..N`.
pub fn cancellation_roots(inst: &FamilyInstance) -> Result<CancellationReport, AsymError> {
    let l = inst.blocks.len();
    if l < 2 || inst.blocks[l - 1].canonical() != inst.blocks[0].neg().canonical() {
        return Err(AsymError::NotCancellation);
    }
    if inst.blocks[1..l - 1]
        .iter()
        .any(|b| !b.canonical().is_empty())
    {
        return Err(AsymError::NotCancellation);
    }
    let n = inst.n;
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        let th = k as f64 / n as f64;
        worst = worst.max(inst.eval(th).im.abs());
    }
    if worst > 1e-9 {
        return Err(AsymError::NotCancellation);
    }
    Ok(CancellationReport {
        n,
        max_residual: worst,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternCase {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub d: usize,
    /// `Σ_m |A(ζ^m)|²`
    pub total: i64,
    pub expected: i64,
    /// `Σ_m (Im A(ζ^m))²`
    pub im_sum: Ratio<i64>,
    pub im_bound: i64,
    pub holds: bool,
}

/// Exact `Σ_m |A(ζ^m)|² = D Σ ε_m²` and `Σ_m (Im A(ζ^m))² = (D/2)(Σ ε_m² − Σ ε_m ε_{−m})`
/// for `A(z) = Σ_{m<D} ε_m z^m`, `ζ = e(1/D)`.
pub fn parseval_pattern_checks(
    eps: &[i64],
    case: PatternCase,
) -> Result<ParsevalReport, AsymError> {
    let d = eps.len();
    if d == 0 {
        return Err(AsymError::BadSupport("empty pattern".into()));
    }
    match case {
        PatternCase::Even => {
            if let Some(m) = eps.iter().position(|x| x.abs() != 1) {
                return Err(AsymError::BadSupport(format!("ε_{m} must be ±1")));
            }
        }
        PatternCase::Odd => {
            if d % 2 == 1 {
                return Err(AsymError::BadSupport("D must be even".into()));
            }
            for (m, x) in eps.iter().enumerate() {
                let ok = if m % 2 == 1 { x.abs() == 1 } else { *x == 0 };
                if !ok {
                    return Err(AsymError::BadSupport(format!(
                        "ε_{m} = {x} violates the odd support"
                    )));
                }
            }
        }
    }
    let di = d as i64;
    let sq: i64 = eps.iter().map(|x| x * x).sum();
    let cross: i64 = (0..d).map(|m| eps[m] * eps[(d - m) % d]).sum();
    let total = di * sq;
    let im_sum = Ratio::new(di * (sq - cross), 2);
    let (expected, im_bound) = match case {
        PatternCase::Even => (di * di, di * (di - 1)),
        PatternCase::Odd => (di * di / 2, di * di / 2),
    };
    let holds = total == expected && im_sum <= Ratio::from_integer(im_bound);
    Ok(ParsevalReport {
        d,
        total,
        expected,
        im_sum,
        im_bound,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(num: i64, den: u64) -> Frequency {
        Frequency::Rational { num, den }
    }

    fn irr(value: f64, label: &str, pair: Option<&str>) -> Frequency {
        Frequency::Irrational {
            value,
            label: label.into(),
            pair: pair.map(String::from),
        }
    }

    fn term(re: f64, im: f64, freq: Frequency) -> Term {
        Term {
            amp: Complex64::new(re, im),
            freq,
        }
    }

    fn sin2pi() -> GeneralizedTrigSum {
        GeneralizedTrigSum {
            form: SumForm::Im,
            a0: 0.0,
            terms: vec![term(1.0, 0.0, rat(1, 1))],
        }
    }

    fn equality_case() -> GeneralizedTrigSum {
        let phi = 2f64.sqrt() - 1.0;
        GeneralizedTrigSum::symmetric(
            2.0,
            vec![
                term(1.0, 0.0, irr(phi, "phi", None)),
                term(1.0, 0.0, rat(1, 1)),
            ],
        )
    }

    #[test]
    fn eval_examples() {
        assert!((sin2pi().eval(0.25) - 1.0).abs() < 1e-15);
        let h = GeneralizedTrigSum::symmetric(2.0, vec![term(1.0, 0.0, rat(1, 1))]);
        assert!(h.eval(0.5).abs() < 1e-15);
        assert!((equality_case().eval(0.0) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn im_form_conversion() {
        let h = GeneralizedTrigSum {
            form: SumForm::Im,
            a0: 0.5,
            terms: vec![
                term(0.3, -1.2, rat(0, 1)),
                term(0.7, 0.4, irr(0.3, "x", None)),
                term(-1.0, 2.0, rat(1, 1)),
            ],
        };
        let s = h.to_symmetric();
        for k in 0..40 {
            let u = k as f64 * 0.37 - 5.0;
            assert!((h.eval(u) - s.eval(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn criterion_examples() {
        let h = GeneralizedTrigSum::symmetric(0.0, vec![term(0.5, 0.0, rat(1, 1))]);
        assert_eq!(signchange_criterion(&h).unwrap(), Criterion::InfinitelyMany);
        let h = GeneralizedTrigSum::symmetric(2.0, vec![term(1.0, 0.0, rat(1, 1))]);
        assert_eq!(signchange_criterion(&h).unwrap(), Criterion::Inconclusive);
        assert_eq!(
            signchange_criterion(&equality_case()).unwrap(),
            Criterion::InfinitelyMany
        );
        let h = GeneralizedTrigSum::symmetric(2.0, vec![term(1.0, 0.0, rat(1, 2))]);
        assert!(matches!(
            signchange_criterion(&h),
            Err(AsymError::NotNormalized(_))
        ));
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_changes(&sin2pi(), 0.0, 3.0, 1024).unwrap(), 6);
        let h = GeneralizedTrigSum::symmetric(2.0, vec![term(1.0, 0.0, rat(1, 1))]);
        assert_eq!(count_changes(&h, 0.0, 3.0, 1024).unwrap(), 0);
        assert!(count_changes(&equality_case(), 0.0, 200.0, 100_000).unwrap() >= 4);
        assert!(matches!(
            count_changes(&sin2pi(), 0.0, 3.0, 10),
            Err(AsymError::ResolutionTooLow { .. })
        ));
    }

    #[test]
    fn count_is_monotone_in_resolution_on_simple_sums() {
        let h = equality_case();
        let a = count_changes(&h, 0.0, 50.0, 1 << 13).unwrap();
        let b = count_changes(&h, 0.0, 50.0, 1 << 15).unwrap();
        assert!(b >= a);
    }

    #[test]
    fn weyl_examples() {
        let h = GeneralizedTrigSum::symmetric(
            0.0,
            vec![term(1.0, 0.0, irr(2f64.sqrt() / 2.0, "r", None))],
        );
        let w = weyl_moments(&h, 0.0, 100_000).unwrap();
        assert!((w.predicted_irrational - 2.0).abs() < 1e-12);
        assert!((w.mean_square - 2.0).abs() < 0.05, "{}", w.mean_square);

        let w = weyl_moments(&sin2pi(), 0.3, 1000).unwrap();
        assert_eq!(w.predicted_irrational, 0.0);
        assert!(w.lambda1.is_empty() && w.lambda2.is_empty());

        // Paired ρ, 1 − ρ with a_j′ = −conj(a_j) e(θ): the pair term vanishes.
        let rho = 2f64.sqrt() - 1.0;
        let theta = 0.3;
        let a = Complex64::new(0.4, 0.7);
        let b = -(a * e(theta)).conj();
        let h = GeneralizedTrigSum::symmetric(
            0.0,
            vec![
                Term {
                    amp: a,
                    freq: irr(rho, "p", Some("q")),
                },
                Term {
                    amp: b,
                    freq: irr(1.0 - rho, "q", None),
                },
            ],
        );
        let w = weyl_moments(&h, theta, 20_000).unwrap();
        assert_eq!(w.lambda1, vec![(0, 1)]);
        assert!(w.predicted_irrational < 1e-20);
        assert!(w.mean_square < 0.01, "{}", w.mean_square);

        let h = GeneralizedTrigSum::symmetric(0.0, vec![term(1.0, 0.0, Frequency::Untagged(0.3))]);
        assert_eq!(
            weyl_moments(&h, 0.0, 10),
            Err(AsymError::UntaggedFrequency(0))
        );
    }

    #[test]
    fn weyl_matches_prediction_with_rational_part() {
        let h = GeneralizedTrigSum::symmetric(
            0.5,
            vec![
                term(0.3, 0.2, irr(0.5f64.sqrt(), "a", None)),
                term(1.0, 0.0, rat(1, 3)),
                term(0.25, 0.0, rat(1, 1)),
            ],
        );
        let w = weyl_moments(&h, 0.1, 200_000).unwrap();
        assert_eq!(w.rational_period, 3);
        assert!((w.mean_square - w.predicted_total).abs() < 0.02 * w.predicted_total);
    }

    #[test]
    fn rational_part_drives_partial_sums() {
        // w_1 = 0.5 + 2cos(2πu/3) changes sign; the irrational part averages out.
        let h = GeneralizedTrigSum::symmetric(
            0.5,
            vec![
                term(1.0, 0.0, rat(1, 3)),
                term(0.4, -0.3, irr(3f64.sqrt() - 1.0, "a", None)),
            ],
        );
        let w1 = rational_part(&h);
        let p = rational_period(&h);
        for theta in [0.0, 1.5] {
            let kappa = w1.eval(theta);
            let n = 20_000;
            let slope = partial_sum(&h, theta, p, n) / n as f64;
            assert!(
                (slope - kappa).abs() <= 0.1 * kappa.abs(),
                "{slope} vs {kappa}"
            );
        }
        assert!(w1.eval(0.0) > 0.0 && w1.eval(1.5) < 0.0);
    }

    #[test]
    fn local_profile_examples() {
        let single = FamilySpec {
            rhos: vec![1.0],
            blocks: vec![BlockRule {
                terms: vec![(Complex64::new(1.0, 0.0), Growth::Const(0))],
            }],
            offsets: vec![0.0],
        };
        for n in [16u64, 1000, 1 << 14] {
            let p = local_profile(&single, n, 0.0, 10.0, 4001, true);
            assert!(p.sup_error <= 1e-10);
        }
        // Constant blocks with a fixed anchor offset: error ∝ 1/N.
        let shifted = FamilySpec {
            rhos: vec![0.0, 0.5, 1.0],
            blocks: vec![
                BlockRule {
                    terms: vec![(Complex64::new(1.0, 0.0), Growth::Const(0))],
                },
                BlockRule {
                    terms: vec![(Complex64::new(0.0, 1.0), Growth::Const(0))],
                },
                BlockRule {
                    terms: vec![(Complex64::new(-1.0, 0.0), Growth::Const(0))],
                },
            ],
            offsets: vec![0.0, 2.0, 3.0],
        };
        let a = local_profile(&shifted, 1 << 10, 0.3, 10.0, 4001, false).sup_error;
        let b = local_profile(&shifted, 1 << 11, 0.3, 10.0, 4001, false).sup_error;
        assert!(b / a <= 0.6, "{a} {b}");
    }

    #[test]
    fn growth_is_exact() {
        assert_eq!(Growth::Pow { num: 1, den: 2 }.at(1 << 14), 128);
        assert_eq!(Growth::Pow { num: 1, den: 2 }.at(1023), 31);
        assert_eq!(Growth::Pow { num: 2, den: 3 }.at(1000), 100);
        assert_eq!(Growth::Pow { num: 2, den: 3 }.at(999), 99);
        assert_eq!(Growth::Pow { num: 2, den: 3 }.at(1 << 12), 256);
    }

    fn littlewood_spec() -> OscillationSpec {
        OscillationSpec {
            d: 2,
            rhos: vec![0.0, 1.0],
            blocks: vec![TrigSeries::from_pattern(&[1, 1])],
        }
    }

    #[test]
    fn f_n_matches_direct_sum() {
        let spec = OscillationSpec {
            d: 4,
            rhos: vec![0.0, 0.4, 1.0],
            blocks: vec![
                TrigSeries::from_pattern(&[1, -1, 1, 1]),
                TrigSeries::from_pattern(&[-1, 1, 1, -1]),
            ],
        };
        let n = 200;
        let r = spec.anchors(n).unwrap();
        assert_eq!(r, vec![0, 76, 196]);
        for k in 0..300 {
            let th = 0.0137 + k as f64 * 0.00331;
            // Direct geometric series: Σ_{n ∈ [r_{j−1}, r_j)} ε^{(j)}_{n mod D} e(nθ).
            let mut direct = Complex64::new(0.0, 0.0);
            for (j, b) in spec.blocks.iter().enumerate() {
                for idx in r[j]..r[j + 1] {
                    direct += b.terms[(idx % 4) as usize].1 * e(idx as f64 * th);
                }
            }
            assert!((spec.f_n(&r, th) - direct.re).abs() < 1e-9, "{th}");
        }
        // At θ = m/D the kernel degenerates but stays finite.
        let v = spec.f_n(&r, 0.25);
        assert!(v.is_finite());
    }

    #[test]
    fn prop1_examples() {
        let spec = littlewood_spec();
        let mut prev = 0;
        for k in 10..=14 {
            let o = prop1_oscillation(&spec, 1 << k, 0.05, 40.0).unwrap();
            assert!(o.oscillations >= 2, "{o:?}");
            assert!(o.oscillations >= prev);
            prev = o.oscillations;
        }
        let zero = OscillationSpec {
            d: 2,
            rhos: vec![0.0, 1.0],
            blocks: vec![TrigSeries::default()],
        };
        assert!(matches!(
            prop1_oscillation(&zero, 1024, 0.05, 10.0),
            Err(AsymError::HypothesisFails(_))
        ));
    }

    #[test]
    fn littlewood_patterns_satisfy_hypothesis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = rng.gen_range(1..=12usize);
            let l = rng.gen_range(1..=3usize);
            let blocks = (0..l)
                .map(|_| {
                    TrigSeries::from_pattern(
                        &(0..d)
                            .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            let mut rhos: Vec<f64> = (0..l - 1).map(|_| rng.gen_range(0.05..0.95)).collect();
            rhos.sort_by(f64::total_cmp);
            rhos.insert(0, 0.0);
            rhos.push(1.0);
            let spec = OscillationSpec {
                d: d as u64,
                rhos,
                blocks,
            };
            assert!(spec
                .hypothesis()
                .iter()
                .any(|r| r.holds && r.abs_last > r.abs_im_first));
        }
    }

    #[test]
    fn cancellation_examples() {
        let n = 64;
        let one = TrigSeries::new(vec![(0, Complex64::new(1.0, 0.0))]);
        let inst = FamilyInstance {
            n,
            blocks: vec![one.clone(), one.neg()],
            anchors: vec![0.0, n as f64],
            degree_bound: 0,
        };
        let rep = cancellation_roots(&inst).unwrap();
        assert!(rep.max_residual <= 1e-9);
        for k in 0..100 {
            let th = k as f64 * 0.0123;
            assert!((inst.eval(th).im + (2.0 * PI * n as f64 * th).sin()).abs() < 1e-9);
        }

        let b0 = TrigSeries::new(vec![
            (0, Complex64::new(1.0, 0.0)),
            (1, Complex64::new(1.0, 0.0)),
        ]);
        let inst = FamilyInstance {
            n: 500,
            blocks: vec![b0.clone(), TrigSeries::default(), b0.neg()],
            anchors: vec![0.0, 123.0, 500.0],
            degree_bound: 1,
        };
        assert!(cancellation_roots(&inst).is_ok());

        let inst = FamilyInstance {
            n,
            blocks: vec![one.clone(), one.clone()],
            anchors: vec![0.0, n as f64],
            degree_bound: 0,
        };
        assert_eq!(cancellation_roots(&inst), Err(AsymError::NotCancellation));
    }

    /// Numeric evaluation at roots of unity, rounded; independent of the closed forms.
    fn numeric_sums(eps: &[i64]) -> (f64, f64) {
        let d = eps.len();
        let mut tot = 0.0;
        let mut im = 0.0;
        for m in 0..d {
            let a: Complex64 = eps
                .iter()
                .enumerate()
                .map(|(k, &x)| x as f64 * e((m * k) as f64 / d as f64))
                .sum();
            tot += a.norm_sqr();
            im += a.im * a.im;
        }
        (tot, im)
    }

    #[test]
    fn parseval_examples() {
        let r = parseval_pattern_checks(&[1, 1], PatternCase::Even).unwrap();
        assert_eq!((r.total, r.expected), (4, 4));
        let r = parseval_pattern_checks(&[0, 1], PatternCase::Odd).unwrap();
        assert_eq!((r.total, r.expected), (2, 2));
        let r = parseval_pattern_checks(&[0, 1, 0, -1], PatternCase::Odd).unwrap();
        assert_eq!(r.total, 8);
        assert!(r.im_sum <= Ratio::from_integer(8));
        assert!(r.holds);
        assert!(parseval_pattern_checks(&[1, 0], PatternCase::Even).is_err());
        assert!(parseval_pattern_checks(&[1, 1], PatternCase::Odd).is_err());
    }

    proptest! {
        #[test]
        fn parseval_matches_numeric(bits in prop::collection::vec(any::<bool>(), 1..=32), odd in any::<bool>()) {
            let d = bits.len();
            let (eps, case) = if odd && d % 2 == 0 {
                (bits.iter().enumerate().map(|(m, &b)| if m % 2 == 0 { 0 } else if b { 1 } else { -1 }).collect::<Vec<i64>>(), PatternCase::Odd)
            } else {
                (bits.iter().map(|&b| if b { 1 } else { -1 }).collect(), PatternCase::Even)
            };
            let r = parseval_pattern_checks(&eps, case).unwrap();
            prop_assert!(r.holds);
            let (tot, im) = numeric_sums(&eps);
            prop_assert_eq!(tot.round() as i64, r.total);
            prop_assert!((im - *r.im_sum.numer() as f64 / *r.im_sum.denom() as f64).abs() < 1e-6);
        }

        #[test]
        fn criterion_implies_growth(a0 in 0.1f64..2.0, slack in 0.0f64..1.0, mid in 0.0f64..1.0, rho in 0.15f64..0.85, rational_mid in any::<bool>()) {
            // |a_l| from a_0/2 (equality, needs a middle term) up to a_0/2 + slack.
            let al = a0 / 2.0 + slack;
            let mid_freq = if rational_mid { rat((rho * 10.0).round().clamp(1.0, 9.0) as i64, 10) } else { irr(rho * 0.999 + 2f64.sqrt() * 1e-3, "x", None) };
            let h = GeneralizedTrigSum::symmetric(a0, vec![term(0.2 + mid, 0.0, mid_freq), term(al, 0.0, rat(1, 1))]);
            prop_assert_eq!(signchange_criterion(&h).unwrap(), Criterion::InfinitelyMany);
            let c50 = count_changes(&h, 0.0, 50.0, 256 * 50).unwrap();
            let c100 = count_changes(&h, 0.0, 100.0, 256 * 100).unwrap();
            let c200 = count_changes(&h, 0.0, 200.0, 256 * 200).unwrap();
            prop_assert!(c100 > c50 && c200 > c100, "{} {} {}", c50, c100, c200);
        }
    }
}
