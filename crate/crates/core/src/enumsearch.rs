//! Exhaustive and sampled enumeration of reciprocal Littlewood polynomials:
//! minimum root counts, histograms, averages and persisted tables.

use crate::polycore::LittlewoodPoly;
use crate::rootcount::{count_littlewood, ZCount};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};
use thiserror::Error;

pub const DEFAULT_BUDGET: usize = 40;
/// Witness lists are truncated to this many entries; `witness_count` keeps the total.
pub const MAX_WITNESSES: usize = 32;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("degree {degree} exceeds the enumeration budget {budget}")]
    BudgetExceeded { degree: usize, budget: usize },
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("storage error: {0}")]
    StorageError(String),
    #[error("stored table disagrees with recomputation at N={degree}: stored {stored}, computed {computed}")]
    VerificationMismatch {
        degree: usize,
        stored: usize,
        computed: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Distinct,
    WithMultiplicity,
}

impl Convention {
    pub fn pick(self, z: &ZCount) -> usize {
        match self {
            Convention::Distinct => z.distinct,
            Convention::WithMultiplicity => z.with_multiplicity,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Convention::Distinct => "distinct",
            Convention::WithMultiplicity => "mult",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub degree: usize,
    pub convention: Convention,
    pub minimum: usize,
    pub witnesses: Vec<String>,
    pub witness_count: u64,
    pub histogram: BTreeMap<usize, u64>,
    pub enumerated: u64,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::time::Duration;
    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        d.as_secs_f64().serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

/// Number of free bits below the fixed leading coefficient.
fn free_bits(n: usize) -> usize {
    n / 2
}

/// The canonical representative with free-half index `idx`: bit `k` (from the
/// most significant) gives `a_{k+1}`, set meaning −1. `a_0 = a_N = +1`.
pub fn representative(n: usize, idx: u64) -> LittlewoodPoly {
    let bits = free_bits(n);
    let mut c = vec![1i8; n + 1];
    for k in 0..bits {
        let bit = (idx >> (bits - 1 - k)) & 1;
        let v = if bit == 1 { -1 } else { 1 };
        c[k + 1] = v;
        c[n - 1 - k] = v;
    }
    LittlewoodPoly::new(c).expect("entries are ±1")
}

/// Canonical representatives of degree `n`, one per `{P, −P}` orbit, in
/// lexicographic order of their sign strings with `'+'` first.
pub fn enumerate_reciprocal(n: usize) -> impl Iterator<Item = LittlewoodPoly> {
    let count = if n == 0 { 0 } else { 1u64 << free_bits(n) };
    (0..count).map(move |i| representative(n, i))
}

/// Both conventions from one pass.
#[derive(Debug, Clone, Default)]
struct Partial {
    hist: [BTreeMap<usize, u64>; 2],
    witnesses: [Vec<u64>; 2],
    witness_count: [u64; 2],
    enumerated: u64,
    sum_mult: u128,
}

impl Partial {
    fn add(&mut self, idx: u64, z: &ZCount) {
        for (slot, conv) in [Convention::Distinct, Convention::WithMultiplicity]
            .into_iter()
            .enumerate()
        {
            let v = conv.pick(z);
            *self.hist[slot].entry(v).or_insert(0) += 1;
            let min = *self.hist[slot].keys().next().unwrap();
            if v == min {
                if self.hist[slot][&v] == 1 {
                    self.witnesses[slot].clear();
                    self.witness_count[slot] = 0;
                }
                self.witness_count[slot] += 1;
                if self.witnesses[slot].len() < MAX_WITNESSES {
                    self.witnesses[slot].push(idx);
                }
            }
        }
        self.enumerated += 1;
        self.sum_mult += z.with_multiplicity as u128;
    }

    /// Associative, commutative merge; witnesses kept in index order.
    fn merge(mut self, other: Partial) -> Partial {
        for slot in 0..2 {
            let mine = self.hist[slot].keys().next().copied();
            let theirs = other.hist[slot].keys().next().copied();
            let (w, c) = match (mine, theirs) {
                (None, _) => (other.witnesses[slot].clone(), other.witness_count[slot]),
                (_, None) => (self.witnesses[slot].clone(), self.witness_count[slot]),
                (Some(a), Some(b)) if a < b => {
                    (self.witnesses[slot].clone(), self.witness_count[slot])
                }
                (Some(a), Some(b)) if a > b => {
                    (other.witnesses[slot].clone(), other.witness_count[slot])
                }
                _ => {
                    let mut w = self.witnesses[slot].clone();
                    w.extend(other.witnesses[slot].iter().copied());
                    w.sort_unstable();
                    w.truncate(MAX_WITNESSES);
                    (w, self.witness_count[slot] + other.witness_count[slot])
                }
            };
            self.witnesses[slot] = w;
            self.witness_count[slot] = c;
            for (&k, &v) in &other.hist[slot] {
                *self.hist[slot].entry(k).or_insert(0) += v;
            }
        }
        self.enumerated += other.enumerated;
        self.sum_mult += other.sum_mult;
        self
    }
}

fn check_budget(n: usize, budget: usize) -> Result<(), SearchError> {
    if n == 0 {
        return Err(SearchError::ZeroDegree);
    }
    if n > budget {
        return Err(SearchError::BudgetExceeded { degree: n, budget });
    }
    Ok(())
}

/// Shards fixed by a prefix of the free half: `2^⌈log2 parallelism⌉` shards.
fn scan(n: usize, parallelism: usize) -> Partial {
    let bits = free_bits(n);
    let prefix = (parallelism.max(1).next_power_of_two().trailing_zeros() as usize).min(bits);
    let shards = 1u64 << prefix;
    let per = 1u64 << (bits - prefix);
    let run = |s: u64| {
        let mut part = Partial::default();
        for idx in s * per..(s + 1) * per {
            part.add(idx, &count_littlewood(&representative(n, idx)));
        }
        part
    };
    if parallelism <= 1 {
        return (0..shards)
            .map(run)
            .fold(Partial::default(), Partial::merge);
    }
    let parts: Vec<Partial> = (0..shards).into_par_iter().map(run).collect();
    parts.into_iter().fold(Partial::default(), Partial::merge)
}

/// Census summary of degree `n` under both conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualResult {
    pub distinct: SearchResult,
    pub with_multiplicity: SearchResult,
    /// Σ of with-multiplicity counts over representatives.
    pub total_mult: u64,
}

impl DualResult {
    pub fn get(&self, c: Convention) -> &SearchResult {
        match c {
            Convention::Distinct => &self.distinct,
            Convention::WithMultiplicity => &self.with_multiplicity,
        }
    }
}

pub fn min_roots_dual(
    n: usize,
    parallelism: usize,
    budget: usize,
) -> Result<DualResult, SearchError> {
    check_budget(n, budget)?;
    let start = Instant::now();
    let part = scan(n, parallelism);
    let wall_time = start.elapsed();
    let build = |slot: usize, convention: Convention| SearchResult {
        degree: n,
        convention,
        minimum: *part.hist[slot]
            .keys()
            .next()
            .expect("at least one representative"),
        witnesses: part.witnesses[slot]
            .iter()
            .map(|&i| representative(n, i).to_signs())
            .collect(),
        witness_count: part.witness_count[slot],
        histogram: part.hist[slot].clone(),
        enumerated: part.enumerated,
        wall_time,
    };
    Ok(DualResult {
        distinct: build(0, Convention::Distinct),
        with_multiplicity: build(1, Convention::WithMultiplicity),
        total_mult: part.sum_mult as u64,
    })
}

pub fn min_roots(
    n: usize,
    convention: Convention,
    parallelism: usize,
) -> Result<SearchResult, SearchError> {
    Ok(min_roots_dual(n, parallelism, DEFAULT_BUDGET)?
        .get(convention)
        .clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMode {
    Exhaustive,
    Sample { k: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Average {
    Exact {
        numer: u64,
        denom: u64,
    },
    Sampled {
        mean: f64,
        std_err: f64,
        k: usize,
        seed: u64,
    },
}

impl Average {
    pub fn as_f64(&self) -> f64 {
        match self {
            Average::Exact { numer, denom } => *numer as f64 / *denom as f64,
            Average::Sampled { mean, .. } => *mean,
        }
    }

    pub fn exact(&self) -> Option<Ratio<u64>> {
        match self {
            Average::Exact { numer, denom } => Some(Ratio::new(*numer, *denom)),
            Average::Sampled { .. } => None,
        }
    }
}

/// Mean with-multiplicity root count over canonical representatives.
pub fn average_roots(
    n: usize,
    mode: AverageMode,
    parallelism: usize,
) -> Result<Average, SearchError> {
    match mode {
        AverageMode::Exhaustive => {
            let r = min_roots_dual(n, parallelism, DEFAULT_BUDGET)?;
            let q = Ratio::new(r.total_mult, r.with_multiplicity.enumerated);
            Ok(Average::Exact {
                numer: *q.numer(),
                denom: *q.denom(),
            })
        }
        AverageMode::Sample { k, seed } => {
            if n == 0 {
                return Err(SearchError::ZeroDegree);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bits = free_bits(n);
            let idxs: Vec<u64> = (0..k)
                .map(|_| {
                    if bits == 0 {
                        0
                    } else {
                        rng.gen_range(0..(1u64 << bits))
                    }
                })
                .collect();
            let vals: Vec<f64> = idxs
                .par_iter()
                .map(|&i| count_littlewood(&representative(n, i)).with_multiplicity as f64)
                .collect();
            let kf = k as f64;
            let mean = vals.iter().sum::<f64>() / kf;
            let var = if k > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (kf - 1.0)
            } else {
                0.0
            };
            Ok(Average::Sampled {
                mean,
                std_err: (var / kf).sqrt(),
                k,
                seed,
            })
        }
    }
}

/// One row of the persisted table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub convention: Convention,
    pub min: usize,
    pub enumerated: u64,
    pub witness: String,
    pub histogram_json: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZlTable {
    pub convention: Convention,
    pub rows: Vec<TableRow>,
    pub results: Vec<SearchResult>,
}

pub fn table_rows(
    n_max: usize,
    convention: Convention,
    parallelism: usize,
) -> Result<ZlTable, SearchError> {
    check_budget(n_max.max(1), DEFAULT_BUDGET)?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for n in 1..=n_max {
        let r = min_roots_dual(n, parallelism, DEFAULT_BUDGET)?
            .get(convention)
            .clone();
        rows.push(TableRow {
            n,
            convention,
            min: r.minimum,
            enumerated: r.enumerated,
            witness: r.witnesses.first().cloned().unwrap_or_default(),
            histogram_json: serde_json::to_string(&r.histogram).expect("map of integers"),
        });
        results.push(r);
    }
    Ok(ZlTable {
        convention,
        rows,
        results,
    })
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), SearchError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)
        .map_err(|e| SearchError::StorageError(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| SearchError::StorageError(format!("{}: {e}", path.display())))
}

pub fn table_csv(table: &ZlTable) -> String {
    let mut out = String::from("N,convention,min,enumerated,witness,histogram_json\n");
    for r in &table.rows {
        let hist = format!("\"{}\"", r.histogram_json.replace('"', "\"\""));
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            r.convention.label(),
            r.min,
            r.enumerated,
            r.witness,
            hist
        ));
    }
    out
}

/// Computes the table and writes `zl_<conv>.csv` / `.json` into `dir`. When a
/// JSON table already exists its minima are checked against the recomputation.
pub fn table_zl(
    n_max: usize,
    convention: Convention,
    parallelism: usize,
    dir: &Path,
) -> Result<ZlTable, SearchError> {
    let table = table_rows(n_max, convention, parallelism)?;
    std::fs::create_dir_all(dir).map_err(|e| SearchError::StorageError(e.to_string()))?;
    let stem = format!("zl_{}", convention.label());
    let json_path = dir.join(format!("{stem}.json"));
    if json_path.exists() {
        let text = std::fs::read_to_string(&json_path)
            .map_err(|e| SearchError::StorageError(e.to_string()))?;
        let stored: ZlTable =
            serde_json::from_str(&text).map_err(|e| SearchError::StorageError(e.to_string()))?;
        for old in &stored.rows {
            if let Some(new) = table.rows.iter().find(|r| r.n == old.n) {
                if new.min != old.min || new.histogram_json != old.histogram_json {
                    return Err(SearchError::VerificationMismatch {
                        degree: old.n,
                        stored: old.min,
                        computed: new.min,
                    });
                }
            }
        }
    }
    let mut persisted = table.clone();
    for r in persisted.results.iter_mut() {
        r.wall_time = Duration::ZERO;
    }
    let json = serde_json::to_string_pretty(&persisted).expect("serializable");
    atomic_write(&json_path, json.as_bytes())?;
    atomic_write(
        &dir.join(format!("{stem}.csv")),
        table_csv(&table).as_bytes(),
    )?;
    Ok(table)
}
