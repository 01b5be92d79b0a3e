//! Odd-degree machinery: the sine polynomial `a(t)`, difference sine polynomials and
//! their `C_j` decomposition, the exact second-derivative identity at `γ_r = 2πr/D`,
//! κ-gap searches, truncation and moment checks, and a brute-force probe for the
//! uniform κ question on short sine polynomials.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OddError {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("δ_{m} = {got}, expected {expected}")]
    DeltaMismatch { m: i64, got: i64, expected: i64 },
    #[error("s1 and s2 are both zero")]
    BothZero,
    #[error("search space exceeds the budget (k ≤ 3, M ≤ 30)")]
    BudgetExceeded,
}

/// `D` even, `ε_m = −ε_{D−m}`, `ε_m ∈ {±1}` for odd `m ≠ D/2`, zero otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OddPattern {
    d: usize,
    eps: Vec<i64>,
}

impl OddPattern {
    pub fn new(eps: Vec<i64>) -> Result<Self, OddError> {
        let d = eps.len();
        if d < 4 || d % 2 == 1 {
            return Err(OddError::InvalidPattern(format!(
                "D = {d} must be even and at least 4"
            )));
        }
        for m in 0..d {
            if eps[m] != -eps[(d - m) % d] {
                return Err(OddError::InvalidPattern(format!(
                    "ε_{m} ≠ −ε_{}",
                    (d - m) % d
                )));
            }
            let ok = if m % 2 == 0 || m == d / 2 {
                eps[m] == 0
            } else {
                eps[m].abs() == 1
            };
            if !ok {
                return Err(OddError::InvalidPattern(format!(
                    "ε_{m} = {} has the wrong support",
                    eps[m]
                )));
            }
        }
        if eps.iter().all(|&x| x == 0) {
            return Err(OddError::InvalidPattern(
                "pattern is identically zero".into(),
            ));
        }
        Ok(Self { d, eps })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn eps(&self) -> &[i64] {
        &self.eps
    }

    pub fn eps_at(&self, m: i64) -> i64 {
        self.eps[m.rem_euclid(self.d as i64) as usize]
    }

    /// `δ_m = −2ε_{m mod D}`.
    pub fn delta(&self, m: i64) -> i64 {
        -2 * self.eps_at(m)
    }
}

/// `Σ c_k sin(k t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SinePoly {
    pub terms: Vec<(i64, f64)>,
}

impl SinePoly {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, c)| c * (k as f64 * t).sin())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }
}

/// `a(t) = 2Σ_{m=0}^{D/2} ε_m sin(mt)`.
pub fn build_a(p: &OddPattern) -> SinePoly {
    SinePoly {
        terms: (0..=p.d / 2)
            .filter(|&m| p.eps[m] != 0)
            .map(|m| (m as i64, 2.0 * p.eps[m] as f64))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffTerm {
    pub m: i64,
    pub p: i64,
    pub delta: i64,
}

/// `Σ δ_m (sin(mt) − sin((m − p_m D)t))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceSinePoly {
    pub d: i64,
    pub terms: Vec<DiffTerm>,
}

impl DifferenceSinePoly {
    pub fn new(d: i64, mut terms: Vec<DiffTerm>) -> Result<Self, OddError> {
        if d <= 0 {
            return Err(OddError::InvalidTerm("D must be positive".into()));
        }
        for t in &terms {
            if t.m < 1 || t.p < 1 || t.m.abs() < (t.m - t.p * d).abs() {
                return Err(OddError::InvalidTerm(format!(
                    "m = {}, p = {} violates |m| ≥ |m − pD|",
                    t.m, t.p
                )));
            }
        }
        terms.sort_by_key(|t| (t.m, t.p));
        Ok(Self { d, terms })
    }

    /// Terms `(m, p_m)` with `δ_m = −2ε_{m mod D}`; terms with `δ_m = 0` are dropped.
    pub fn from_pattern(pattern: &OddPattern, mp: &[(i64, i64)]) -> Result<Self, OddError> {
        let terms = mp
            .iter()
            .map(|&(m, p)| DiffTerm {
                m,
                p,
                delta: pattern.delta(m),
            })
            .filter(|t| t.delta != 0)
            .collect();
        Self::new(pattern.d as i64, terms)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|x| {
                x.delta as f64 * ((x.m as f64 * t).sin() - ((x.m - x.p * self.d) as f64 * t).sin())
            })
            .sum()
    }

    /// `p = max_m p_m`.
    pub fn p_max(&self) -> i64 {
        self.terms.iter().map(|t| t.p).max().unwrap_or(1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        terms.sort_by_key(|t| (t.m, t.p));
        Self { d: self.d, terms }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CjGroup {
    /// Largest multiple of `D` below `m*_j − pD`, `m*_j` the smallest `m` in the group.
    pub anchor: i64,
    pub terms: Vec<DiffTerm>,
}

impl CjGroup {
    /// `C_j(t) = e^{−i n_j t} Σ δ_m (e^{imt} − e^{i(m − p_m D)t})`.
    pub fn eval(&self, d: i64, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|x| {
                let f1 = (x.m - self.anchor) as f64;
                let f2 = (x.m - x.p * d - self.anchor) as f64;
                x.delta as f64
                    * (Complex64::from_polar(1.0, f1 * t) - Complex64::from_polar(1.0, f2 * t))
            })
            .sum()
    }

    /// `Im(C_j)''(t)`.
    pub fn im_second_derivative(&self, d: i64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|x| {
                let f1 = (x.m - self.anchor) as f64;
                let f2 = (x.m - x.p * d - self.anchor) as f64;
                x.delta as f64 * (-f1 * f1 * (f1 * t).sin() + f2 * f2 * (f2 * t).sin())
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CjDecomposition {
    pub d: i64,
    pub p: i64,
    pub threshold: i64,
    pub groups: Vec<CjGroup>,
    /// Max of `|s(t) − Im Σ C_j(t) e^{i n_j t}|` over 256 sample points.
    pub reconstruction_error: f64,
}

impl CjDecomposition {
    pub fn eval(&self, t: f64) -> f64 {
        self.groups
            .iter()
            .map(|g| (g.eval(self.d, t) * Complex64::from_polar(1.0, g.anchor as f64 * t)).im)
            .sum()
    }

    /// Geometric means of adjacent scales `p, n_2 − n_1, …`.
    pub fn omega(&self) -> Vec<f64> {
        let mut scales = vec![self.p as f64];
        scales.extend(
            self.groups
                .windows(2)
                .map(|w| (w[1].anchor - w[0].anchor) as f64),
        );
        scales.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect()
    }
}

/// Consecutive `m` share a group iff their gap is at most `T·p`.
pub fn group_and_decompose(s: &DifferenceSinePoly, p: i64, t_factor: i64) -> CjDecomposition {
    let d = s.d;
    let mut groups: Vec<CjGroup> = Vec::new();
    let mut prev_m: Option<i64> = None;
    for t in &s.terms {
        let new_group = prev_m.is_none_or(|pm| t.m - pm > t_factor * p);
        if new_group {
            let x = t.m - p * d;
            let anchor = d * (x - 1).div_euclid(d);
            groups.push(CjGroup {
                anchor,
                terms: vec![*t],
            });
        } else {
            groups.last_mut().expect("group exists").terms.push(*t);
        }
        prev_m = Some(t.m);
    }
    let mut dec = CjDecomposition {
        d,
        p,
        threshold: t_factor,
        groups,
        reconstruction_error: 0.0,
    };
    dec.reconstruction_error = (0..256)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 256.0 + 0.001;
            (s.eval(t) - dec.eval(t)).abs()
        })
        .fold(0.0, f64::max);
    dec
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsevalIdentity {
    pub lhs: i128,
    pub rhs: i128,
}

/// `Σ_r a(γ_r) Im(C_j)''(γ_r)` evaluated exactly through
/// `Σ_r sin(2πkr/D) sin(2πmr/D) = (D/2)([D | k−m] − [D | k+m])`, against
/// `2D² Σ_m p_m (2m − 2n_j − p_m D)`.
pub fn derivative_parseval(
    pattern: &OddPattern,
    group: &CjGroup,
) -> Result<ParsevalIdentity, OddError> {
    let d = pattern.d as i64;
    for t in &group.terms {
        let expected = pattern.delta(t.m);
        if t.delta != expected {
            return Err(OddError::DeltaMismatch {
                m: t.m,
                got: t.delta,
                expected,
            });
        }
    }
    let n = group.anchor;
    let mut lhs: i128 = 0;
    for t in &group.terms {
        // Im(C_j)''(γ_r) = Σ w_m sin(2πmr/D) with w_m = −δ_m p_m D (2m − 2n − p_m D).
        let w =
            -(t.delta as i128) * (t.p as i128) * (d as i128) * (2 * (t.m - n) - t.p * d) as i128;
        for k in 0..=d / 2 {
            let ek = pattern.eps[k as usize] as i128;
            if ek == 0 {
                continue;
            }
            let same = i128::from((k - t.m).rem_euclid(d) == 0);
            let opp = i128::from((k + t.m).rem_euclid(d) == 0);
            // a(γ_r) carries a factor 2.
            lhs += 2 * ek * w * (d as i128 / 2) * (same - opp);
        }
    }
    let rhs: i128 = group
        .terms
        .iter()
        .map(|t| 2 * (d as i128).pow(2) * t.p as i128 * (2 * (t.m - n) - t.p * d) as i128)
        .sum();
    Ok(ParsevalIdentity { lhs, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GapRegion {
    FullPeriod,
    /// `(γ_r − c/p, γ_r + c/p)` around the selected `r`.
    AroundGammaR {
        c: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSelection {
    pub r: usize,
    pub a_value: f64,
    pub c2_value: f64,
    /// `a(γ_r) · Im(C_1)''(γ_r) / p²`
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaGap {
    pub gamma: f64,
    pub gap: f64,
    pub selection: Option<RSelection>,
}

/// The `r` maximizing `a(γ_r) · Im(C_1)''(γ_r)` for the decomposition of `s_1 + s_2`.
pub fn select_r(a: &SinePoly, s: &DifferenceSinePoly) -> Option<RSelection> {
    if s.is_zero() {
        return None;
    }
    let p = s.p_max();
    let dec = group_and_decompose(s, p, 8);
    let g = dec.groups.first()?;
    (0..s.d as usize)
        .map(|r| {
            let t = 2.0 * PI * r as f64 / s.d as f64;
            let a_value = a.eval(t);
            let c2_value = g.im_second_derivative(s.d, t);
            RSelection {
                r,
                a_value,
                c2_value,
                score: a_value * c2_value / (p * p) as f64,
            }
        })
        .max_by(|x, y| x.score.total_cmp(&y.score))
}

/// Maximizes `|a + s_1| − |a − s_2|` on a grid over the region.
pub fn kappa_gap_search(
    a: &SinePoly,
    s1: &DifferenceSinePoly,
    s2: &DifferenceSinePoly,
    region: GapRegion,
    resolution: usize,
) -> Result<KappaGap, OddError> {
    if s1.is_zero() && s2.is_zero() {
        return Err(OddError::BothZero);
    }
    let selection = select_r(a, &s1.union(s2));
    let (lo, hi) = match (region, &selection) {
        (GapRegion::AroundGammaR { c }, Some(sel)) => {
            let g = 2.0 * PI * sel.r as f64 / s1.d as f64;
            let p = s1.union(s2).p_max() as f64;
            (g - c / p, g + c / p)
        }
        _ => (0.0, 2.0 * PI),
    };
    let res = resolution.max(2);
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..res {
        let t = lo + (hi - lo) * k as f64 / res as f64;
        let av = a.eval(t);
        let gap = (av + s1.eval(t)).abs() - (av - s2.eval(t)).abs();
        if gap > best.1 {
            best = (t, gap);
        }
    }
    Ok(KappaGap {
        gamma: best.0,
        gap: best.1,
        selection,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationCheck {
    pub sup: f64,
    /// `2|Λ| D c`
    pub bound: f64,
    /// `Σ |δ_m| · 2 sin(min(p_m D c/(2p), π/2))`
    pub tight_bound: f64,
}

/// Dense-grid sup of `|s|` on `(γ_r − c/p, γ_r + c/p)` with both analytic bounds.
pub fn truncation_bound_check(s: &DifferenceSinePoly, c: f64, p: i64, r: i64) -> TruncationCheck {
    let d = s.d as f64;
    let g = 2.0 * PI * r as f64 / d;
    let pf = p as f64;
    let n = 4096;
    let sup = (0..=n)
        .map(|k| {
            let u = -c + 2.0 * c * k as f64 / n as f64;
            s.eval(g + u / pf).abs()
        })
        .fold(0.0, f64::max);
    let tight_bound = s
        .terms
        .iter()
        .map(|t| t.delta.abs() as f64 * 2.0 * (t.p as f64 * d * c / (2.0 * pf)).min(PI / 2.0).sin())
        .sum();
    TruncationCheck {
        sup,
        bound: 2.0 * s.terms.len() as f64 * d * c,
        tight_bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMoments {
    pub first: f64,
    pub second: f64,
    /// `|I| · ½ Σ_j |C_j(γ)|²` at the centre `γ`.
    pub predicted_second: f64,
}

/// Composite Simpson with at least 64 panels per shortest oscillation.
pub fn interval_moments(dec: &CjDecomposition, lo: f64, hi: f64) -> IntervalMoments {
    let len = hi - lo;
    let max_freq = dec
        .groups
        .iter()
        .flat_map(|g| {
            g.terms
                .iter()
                .map(|t| t.m.abs().max((t.m - t.p * dec.d).abs()))
        })
        .max()
        .unwrap_or(0) as f64;
    let periods = (len * max_freq / (2.0 * PI)).ceil().max(1.0);
    let mut panels = (64.0 * periods) as usize;
    panels += panels % 2;
    let h = len / panels as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    for k in 0..=panels {
        let w = if k == 0 || k == panels {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let v = dec.eval(lo + k as f64 * h);
        s1 += w * v;
        s2 += w * v * v;
    }
    let gamma = (lo + hi) / 2.0;
    let predicted_second = len
        * 0.5
        * dec
            .groups
            .iter()
            .map(|g| g.eval(dec.d, gamma).norm_sqr())
            .sum::<f64>();
    IntervalMoments {
        first: s1 * h / 3.0,
        second: s2 * h / 3.0,
        predicted_second,
    }
}

/// `Σ_{n∈Λ} ε_n sin(nt)` with `ε_n = ±1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedSine {
    pub terms: Vec<(u32, i8)>,
}

impl SignedSine {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(n, e)| e as f64 * (n as f64 * t).sin())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub k: usize,
    pub freq_bound: u32,
    pub resolution: usize,
    pub polynomials: usize,
    /// `min over pairs of max_γ (|s_1(γ)| − |s_2(γ)|)` on the grid.
    pub kappa: f64,
    pub gamma: f64,
    pub s1: SignedSine,
    pub s2: SignedSine,
}

/// Sine polynomials with `1..=k` terms, frequencies in `1..=M`, first coefficient `+1`.
fn canonical_sines(k: usize, m: u32) -> Vec<SignedSine> {
    fn rec(start: u32, m: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for n in start..=m {
            cur.push(n);
            rec(n + 1, m, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut supports = Vec::new();
    rec(1, m, k, &mut Vec::new(), &mut supports);
    let mut out = Vec::new();
    for sup in supports {
        let free = sup.len() - 1;
        for bits in 0..1u32 << free {
            let terms = sup
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    (
                        n,
                        if i > 0 && bits >> (i - 1) & 1 == 1 {
                            -1
                        } else {
                            1
                        },
                    )
                })
                .collect();
            out.push(SignedSine { terms });
        }
    }
    out
}

/// Brute force over ordered pairs of distinct sine polynomials, up to the global sign
/// (`s_2 = −s_1` makes the gap vanish identically). The grid covers `[0, π]`, which
/// suffices because `|s|` is even and `2π`-periodic. Pairs are pruned once their
/// running maximum exceeds the best found; ties break on pair index.
pub fn problem2_probe(
    k: usize,
    m: u32,
    resolution: usize,
    parallelism: usize,
) -> Result<ProbeResult, OddError> {
    if k == 0 || k > 3 || m == 0 || m > 30 || resolution == 0 {
        return Err(OddError::BudgetExceeded);
    }
    let sines = canonical_sines(k, m);
    if sines.len() > u16::MAX as usize || sines.len() < 2 {
        return Err(OddError::BudgetExceeded);
    }
    let pts = resolution + 1;
    let table: Vec<Vec<f32>> = (0..=m)
        .map(|n| {
            (0..pts)
                .map(|i| (n as f64 * PI * i as f64 / resolution as f64).sin() as f32)
                .collect()
        })
        .collect();
    let values: Vec<Vec<f32>> = sines
        .iter()
        .map(|s| {
            (0..pts)
                .map(|i| {
                    s.terms
                        .iter()
                        .map(|&(n, e)| e as f32 * table[n as usize][i])
                        .sum::<f32>()
                        .abs()
                })
                .collect()
        })
        .collect();
    // Check each s_1 first at the points where |s_1| is largest.
    let hot: Vec<Vec<usize>> = values
        .iter()
        .map(|v| {
            let mut idx: Vec<usize> = (0..pts).collect();
            idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
            idx.truncate(16);
            idx
        })
        .collect();

    let best = AtomicU64::new(u64::MAX);
    let key = |val: f32, i: usize, j: usize| {
        ((val.max(0.0).to_bits() as u64) << 32) | ((i as u64) << 16) | j as u64
    };
    let work = |i: usize| {
        let v1 = &values[i];
        for (j, v2) in values.iter().enumerate() {
            if j == i {
                continue;
            }
            let bound = f32::from_bits((best.load(Ordering::Relaxed) >> 32) as u32);
            let mut mx = f32::NEG_INFINITY;
            let mut pruned = false;
            for &t in &hot[i] {
                mx = mx.max(v1[t] - v2[t]);
            }
            if mx > bound {
                continue;
            }
            for t in 0..pts {
                mx = mx.max(v1[t] - v2[t]);
                if mx > bound {
                    pruned = true;
                    break;
                }
            }
            if !pruned {
                best.fetch_min(key(mx, i, j), Ordering::Relaxed);
            }
        }
    };
    if parallelism > 1 {
        (0..sines.len()).into_par_iter().for_each(work);
    } else {
        (0..sines.len()).for_each(work);
    }
    let b = best.load(Ordering::Relaxed);
    let (i, j) = (((b >> 16) & 0xffff) as usize, (b & 0xffff) as usize);
    let (s1, s2) = (sines[i].clone(), sines[j].clone());
    let (mut kappa, mut gamma) = (f64::NEG_INFINITY, 0.0);
    for idx in 0..pts {
        let t = PI * idx as f64 / resolution as f64;
        let g = s1.eval(t).abs() - s2.eval(t).abs();
        if g > kappa {
            kappa = g;
            gamma = t;
        }
    }
    Ok(ProbeResult {
        k,
        freq_bound: m,
        resolution,
        polynomials: sines.len(),
        kappa,
        gamma,
        s1,
        s2,
    })
}
