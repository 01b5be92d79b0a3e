//! Nonnegative trigonometric polynomials: autocorrelation, Fejér–Riesz
//! factorization, and the coefficient test for a sign change.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

const UNIT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("polynomial is negative at t = {t} (value {value})")]
    NotNonnegative { t: f64, value: f64 },
    #[error("unit-circle root near {re} + {im}i has odd multiplicity {count}")]
    OddUnitCircleMultiplicity { re: f64, im: f64, count: usize },
    #[error("top coefficient is zero")]
    ZeroLeading,
    #[error("coefficients are not conjugate-symmetric")]
    NotRealValued,
    #[error("empty coefficient vector")]
    Empty,
    #[error("root finder failed: {0}")]
    RootFinding(String),
    #[error("reconstruction error {residual} exceeds tolerance {tol}")]
    ToleranceExceeded { residual: f64, tol: f64 },
}

/// `w(t) = Σ_{|n|≤N} c_n e^{int}` with `c_{−n} = conj(c_n)`; stores `c_0..c_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.is_empty() {
            return Err(SpectralError::Empty);
        }
        if coeffs[0].im.abs() > 1e-12 * coeffs[0].re.abs().max(1.0) {
            return Err(SpectralError::NotRealValued);
        }
        coeffs[0].im = 0.0;
        Ok(Self { coeffs })
    }

    pub fn from_real(c: &[f64]) -> Result<Self, SpectralError> {
        Self::new(c.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// From `c_{−N}..c_N`; fails unless conjugate-symmetric.
    pub fn from_full(full: &[Complex64]) -> Result<Self, SpectralError> {
        if full.len().is_multiple_of(2) {
            return Err(SpectralError::NotRealValued);
        }
        let n = full.len() / 2;
        let scale = full.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for k in 0..=n {
            if (full[n + k] - full[n - k].conj()).norm() > 1e-12 * scale {
                return Err(SpectralError::NotRealValued);
            }
        }
        Self::new(full[n..].to_vec())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        match self.coeffs.get(k) {
            Some(c) if n >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut s = self.coeffs[0].re;
        for (n, c) in self.coeffs.iter().enumerate().skip(1) {
            s += 2.0 * (c * Complex64::from_polar(1.0, n as f64 * t)).re;
        }
        s
    }

    fn integral(&self) -> Option<Vec<(i128, i128)>> {
        let int = |x: f64| (x.fract() == 0.0 && x.abs() < 9.0e15).then_some(x as i128);
        self.coeffs
            .iter()
            .map(|c| Some((int(c.re)?, int(c.im)?)))
            .collect()
    }

    fn trimmed(&self) -> Self {
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().is_some_and(|x| x.norm() == 0.0) {
            c.pop();
        }
        Self { coeffs: c }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFactor {
    pub d: Vec<Complex64>,
    /// Max coefficient error of `autocorrelation(d)` against the input.
    pub residual: f64,
}

/// `c_n = Σ_j d_j conj(d_{n+j})` for `n ≥ 0`.
pub fn autocorrelation(d: &[Complex64]) -> TrigPoly {
    assert!(!d.is_empty(), "autocorrelation of an empty vector");
    let n = d.len() - 1;
    let coeffs = (0..=n)
        .map(|k| {
            (0..=n - k)
                .map(|j| d[j] * d[j + k].conj())
                .sum::<Complex64>()
        })
        .collect();
    TrigPoly::new(coeffs).expect("autocorrelation has real c_0")
}

pub fn max_coeff_error(a: &TrigPoly, b: &TrigPoly) -> f64 {
    let n = a.coeffs.len().max(b.coeffs.len()) as i64;
    (0..n)
        .map(|k| (a.coeff(k) - b.coeff(k)).norm())
        .fold(0.0, f64::max)
}

/// Aberth–Ehrlich simultaneous root iteration. `coeffs` is in ascending order
/// with a nonzero leading coefficient.
pub fn aberth_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let dmonic: Vec<Complex64> = (1..=n).map(|k| monic[k] * k as f64).collect();

    // Initial radius from the geometric mean of the root moduli.
    let r0 = monic[0].norm().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r0, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    // Stop on a tiny step, or once steps stop shrinking (multiple roots stall at
    // the noise floor).
    let mut best_step = f64::INFINITY;
    let mut stale = 0;
    for _ in 0..2000 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let p = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let dp = horner(&dmonic, z[i]);
            let ratio = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if !w.is_finite() {
                continue;
            }
            z[i] -= w;
            max_step = max_step.max(w.norm() / z[i].norm().max(1.0));
        }
        if max_step < 4.0 * f64::EPSILON {
            break;
        }
        if max_step < 0.5 * best_step {
            best_step = max_step;
            stale = 0;
        } else {
            stale += 1;
            if stale >= 30 {
                break;
            }
        }
    }
    if z.iter().any(|r| !r.is_finite()) {
        return Err(SpectralError::RootFinding("non-finite iterate".into()));
    }
    Ok(z)
}

fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        p = next;
    }
    p
}

/// Grid check of `w ≥ −tol`, combined with the coefficient test.
fn check_nonnegative(w: &TrigPoly, tol: f64) -> Result<(), SpectralError> {
    let n = w.degree().max(1);
    let res = (16 * n).max(64);
    let mut worst = (0.0, f64::INFINITY);
    for k in 0..res {
        let t = 2.0 * PI * k as f64 / res as f64;
        let v = w.eval(t);
        if v < worst.1 {
            worst = (t, v);
        }
    }
    if worst.1 < -tol {
        return Err(SpectralError::NotNonnegative {
            t: worst.0,
            value: worst.1,
        });
    }
    if w.degree() > 0 && coefficient_sign_change_test(w) == Ok(SignChangeVerdict::HasSignChange) {
        let res = (64 * n).max(1 << 12);
        if let SignChangeSearch::Found(cert) = find_sign_change(w, res) {
            if cert.value_minus < -tol {
                return Err(SpectralError::NotNonnegative {
                    t: cert.t_minus,
                    value: cert.value_minus,
                });
            }
        }
    }
    Ok(())
}

/// Outer factor `d` with `autocorrelation(d) ≈ c`: the roots of `z^N w(z)` inside the
/// closed disc are selected, unit-circle clusters contributing half their size.
pub fn fejer_riesz_factor(c: &TrigPoly, tol: f64) -> Result<SpectralFactor, SpectralError> {
    let w = c.trimmed();
    check_nonnegative(&w, tol)?;
    let n = w.degree();
    if n == 0 {
        let c0 = w.coeffs[0].re.max(0.0);
        let d = vec![Complex64::new(c0.sqrt(), 0.0)];
        let residual = max_coeff_error(&autocorrelation(&d), &w);
        return finish(d, residual, tol);
    }
    let lifted: Vec<Complex64> = (0..=2 * n as i64).map(|k| w.coeff(k - n as i64)).collect();
    let roots = aberth_roots(&lifted)?;

    let selected = select_disc_roots(&roots, &lifted)?;
    if selected.len() != n {
        return Err(SpectralError::RootFinding(format!(
            "selected {} roots, expected {n}",
            selected.len()
        )));
    }
    // d has roots conj(σ): autocorrelation with c_n = Σ d_j conj(d_{n+j}).
    let conj_roots: Vec<Complex64> = selected.iter().map(|r| r.conj()).collect();
    let q = poly_from_roots(&conj_roots);
    let cq = autocorrelation(&q);
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..=n as i64 {
        let a = cq.coeff(k);
        let b = w.coeff(k);
        let weight = if k == 0 { 1.0 } else { 2.0 };
        num += weight * (a.conj() * b).re;
        den += weight * a.norm_sqr();
    }
    let scale = (num / den).max(0.0).sqrt();
    let d: Vec<Complex64> = q.iter().map(|x| x * scale).collect();
    let residual = max_coeff_error(&autocorrelation(&d), &w);
    finish(d, residual, tol)
}

/// Roots near the circle are clustered first. A cluster of size `m` whose spread is
/// within the perturbation expected for an `m`-fold root and whose centroid lies on
/// the circle is one unit root of multiplicity `m`; it contributes `m/2` copies.
/// The centroid is refined by Newton on the `(m−1)`-th derivative, where the root is
/// simple. Every other root is kept iff it lies strictly inside the disc.
fn select_disc_roots(
    roots: &[Complex64],
    poly: &[Complex64],
) -> Result<Vec<Complex64>, SpectralError> {
    const NEAR: f64 = 1e-3;
    let mut selected = Vec::with_capacity(roots.len() / 2);
    let near: Vec<Complex64> = roots
        .iter()
        .copied()
        .filter(|r| (r.norm() - 1.0).abs() <= NEAR)
        .collect();
    selected.extend(
        roots
            .iter()
            .copied()
            .filter(|r| (r.norm() - 1.0).abs() > NEAR && r.norm() < 1.0),
    );

    let mut used = vec![false; near.len()];
    for i in 0..near.len() {
        if used[i] {
            continue;
        }
        let mut cluster = vec![near[i]];
        used[i] = true;
        let mut k = 0;
        while k < cluster.len() {
            let a = cluster[k];
            for j in 0..near.len() {
                if !used[j] && (near[j] - a).norm() <= NEAR {
                    used[j] = true;
                    cluster.push(near[j]);
                }
            }
            k += 1;
        }
        let m = cluster.len();
        let mut centre: Complex64 = cluster.iter().sum::<Complex64>() / m as f64;
        if m >= 2 {
            centre = refine_multiple_root(poly, centre, m);
        }
        let spread = cluster
            .iter()
            .map(|r| (r - centre).norm())
            .fold(0.0, f64::max);
        let allowed = 100.0 * f64::EPSILON.powf(1.0 / m as f64);
        let on_circle = (centre.norm() - 1.0).abs() <= UNIT_TOL;
        if m >= 2 && on_circle && spread <= allowed {
            if m % 2 == 1 {
                return Err(SpectralError::OddUnitCircleMultiplicity {
                    re: centre.re,
                    im: centre.im,
                    count: m,
                });
            }
            selected.extend(std::iter::repeat_n(centre / centre.norm(), m / 2));
        } else if m == 1 && (centre.norm() - 1.0).abs() <= UNIT_TOL {
            return Err(SpectralError::OddUnitCircleMultiplicity {
                re: centre.re,
                im: centre.im,
                count: 1,
            });
        } else {
            selected.extend(cluster.into_iter().filter(|r| r.norm() < 1.0));
        }
    }
    Ok(selected)
}

fn derivative(p: &[Complex64]) -> Vec<Complex64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn refine_multiple_root(poly: &[Complex64], z0: Complex64, m: usize) -> Complex64 {
    let mut d = poly.to_vec();
    for _ in 0..m - 1 {
        d = derivative(&d);
    }
    let dd = derivative(&d);
    let mut z = z0;
    for _ in 0..50 {
        let step = horner(&d, z) / horner(&dd, z);
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    if (z - z0).norm() <= 1e-3 {
        z
    } else {
        z0
    }
}

fn finish(d: Vec<Complex64>, residual: f64, tol: f64) -> Result<SpectralFactor, SpectralError> {
    if residual > tol {
        return Err(SpectralError::ToleranceExceeded { residual, tol });
    }
    Ok(SpectralFactor { d, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignChangeVerdict {
    HasSignChange,
    Inconclusive,
}

/// Sign change if `2|c_N| > |c_0|`, or `2|c_N| = |c_0|` with a nonzero middle coefficient.
pub fn coefficient_sign_change_test(c: &TrigPoly) -> Result<SignChangeVerdict, SpectralError> {
    let n = c.degree();
    let cn = c.coeffs[n];
    if cn.norm() == 0.0 || n == 0 {
        return Err(SpectralError::ZeroLeading);
    }
    let middle = c.coeffs[1..n].iter().any(|x| x.norm() != 0.0);
    let (gt, eq) = match c.integral() {
        Some(ints) => {
            let (re, im) = ints[n];
            let lhs = 4 * (re * re + im * im);
            let rhs = ints[0].0 * ints[0].0;
            (lhs > rhs, lhs == rhs)
        }
        None => {
            let a = 2.0 * cn.norm();
            let b = c.coeffs[0].re.abs();
            let tol = 1e-12 * b.max(1.0);
            (a > b + tol, (a - b).abs() <= tol)
        }
    };
    Ok(if gt || (eq && middle) {
        SignChangeVerdict::HasSignChange
    } else {
        SignChangeVerdict::Inconclusive
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChangeCertificate {
    pub t_plus: f64,
    pub value_plus: f64,
    pub t_minus: f64,
    pub value_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SignChangeSearch {
    Found(SignChangeCertificate),
    NotFound,
}

/// Grid search on `t_k = 2πk/res` for a positive and a negative value.
pub fn find_sign_change(w: &TrigPoly, resolution: usize) -> SignChangeSearch {
    let res = resolution.max(8 * w.degree()).max(1);
    let mut best_plus = (0.0, f64::NEG_INFINITY);
    let mut best_minus = (0.0, f64::INFINITY);
    for k in 0..res {
        let t = 2.0 * PI * k as f64 / res as f64;
        let v = w.eval(t);
        if v > best_plus.1 {
            best_plus = (t, v);
        }
        if v < best_minus.1 {
            best_minus = (t, v);
        }
    }
    if best_plus.1 > 0.0 && best_minus.1 < 0.0 {
        SignChangeSearch::Found(SignChangeCertificate {
            t_plus: best_plus.0,
            value_plus: best_plus.1,
            t_minus: best_minus.0,
            value_minus: best_minus.1,
        })
    } else {
        SignChangeSearch::NotFound
    }
}
