//! Exact and numerical tools for the unimodular zeros of reciprocal Littlewood
//! polynomials.

pub mod polycore;
pub mod rootcount;

pub use polycore::{
    build_q, eval_circle, family_g, family_h, parse_signs, to_cosine, CosineParity, CosinePoly,
    IntPoly, LittlewoodPoly, PolyError, PolyKind, PolyRecord, QParity, QPoly,
};
pub use rootcount::{
    chebyshev_transform, count_cosine_roots, count_littlewood, count_real_roots, count_unimodular,
    grid_sign_change_oracle, CensusRecord, RealRoot, RootError, SturmChain, ZCount,
};
pub mod enumsearch;
pub use enumsearch::{
    average_roots, enumerate_reciprocal, min_roots, table_zl, Average, AverageMode, Convention,
    SearchError, SearchResult,
};
pub mod structure;
pub use structure::{
    decompose, period_profile, to_corollary_form, to_geometric, BlockDecomposition, CorollaryForm,
    GeometricForm, StructureError,
};
pub mod spectral;
pub use spectral::{
    autocorrelation, coefficient_sign_change_test, fejer_riesz_factor, find_sign_change,
    SignChangeCertificate, SignChangeSearch, SignChangeVerdict, SpectralError, SpectralFactor,
    TrigPoly,
};
pub mod asymptotics;
pub use asymptotics::{
    cancellation_roots, count_changes, local_profile, parseval_pattern_checks, prop1_oscillation,
    signchange_criterion, weyl_moments, AsymError, Criterion, FamilySpec, Frequency,
    GeneralizedTrigSum, Growth, LocalProfile, OscillationSpec, ParsevalReport, PatternCase,
    TrigSeries, WeylMoments,
};
pub mod oddcase;
pub use oddcase::{
    build_a, derivative_parseval, group_and_decompose, interval_moments, kappa_gap_search,
    problem2_probe, truncation_bound_check, CjDecomposition, CjGroup, DiffTerm, DifferenceSinePoly,
    GapRegion, IntervalMoments, KappaGap, OddError, OddPattern, ParsevalIdentity, ProbeResult,
    SignedSine, SinePoly, TruncationCheck,
};
pub mod selftest;
pub use selftest::{selftest, selftest_with, Check, SelfTestReport};
