use num_complex::Complex64;

use super::corpus::{item_rng, item_seed, Corpus, CorpusItem, GeneratorClass, TimeProfile};
use super::{assemble, evaluate, BracketReport, Level, VerifyConfig};
use crate::dyadic::{block_cap, build_smoothed_variant, build_standard_family, DyadicFamily};
use crate::error::Result;
use crate::operators::{
    bessel_potential_spectral, extend_even_reflection, time_derivative, time_fractional_power, TimeSignal,
};
use crate::rearrangement::lorentz_quasinorm;
use crate::spectral::{dealiased_product, two_thirds_cutoff, SpectralField};
use crate::tll::{
    bessel_shift_norm, derivative_equiv_norm, laplacian_power_norm, tll_norm, tll_norm_spectral, BlockDecomposition,
    TllParams,
};

fn spatial_levels(config: &VerifyConfig) -> Vec<Level> {
    config
        .resolutions
        .iter()
        .map(|&resolution| Level { resolution, time: None })
        .collect()
}

fn space_time_levels(config: &VerifyConfig) -> Vec<Level> {
    config
        .resolutions
        .iter()
        .flat_map(|&resolution| config.times.iter().map(move |&t| Level { resolution, time: Some(t) }))
        .collect()
}

/// One standard family per resolution, built up front so blocks are cached.
fn standard_families(config: &VerifyConfig) -> Result<Vec<(usize, DyadicFamily)>> {
    config
        .resolutions
        .iter()
        .map(|&m| Ok((m, build_standard_family(config.dim, block_cap(m))?)))
        .collect()
}

fn family_for(families: &[(usize, DyadicFamily)], resolution: usize) -> &DyadicFamily {
    &families.iter().find(|(m, _)| *m == resolution).expect("family per level").1
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Derivative, Laplacian-power and Bessel-shift norms against the plain norm
/// at the matching smoothness (all two-sided).
pub fn suite_norm_equivalences(config: &VerifyConfig, params: &TllParams) -> Result<BracketReport> {
    let spec = config.corpus(GeneratorClass::RandomBandLimited);
    let corpus = Corpus::generate(spec.clone())?;
    let families = standard_families(config)?;
    let checks = [("derivative-order-1", true), ("laplacian-power-1", true), ("bessel-shift-2", true)];
    let reports = evaluate(config.seed, config.count, &spatial_levels(config), &checks, config.limit, |i, level| {
        let family = family_for(&families, level.resolution);
        let u = corpus.items[i].field(level.resolution)?;
        let s = params.s;
        Ok(vec![
            ratio(
                derivative_equiv_norm(&u, params, 1, family)?,
                tll_norm(&u, &params.with_s(s + 1.0), family)?,
            ),
            ratio(
                laplacian_power_norm(&u, params, 1, family)?,
                tll_norm(&u, &params.with_s(s + 2.0), family)?,
            ),
            ratio(bessel_shift_norm(&u, params, 2.0, family)?, tll_norm(&u, params, family)?),
        ])
    })?;
    Ok(assemble("norm-equivalences", Some(spec), reports, config.limit))
}

/// Standard against overlapping family on Gaussian-bump fields.
pub fn suite_decomposition_independence(config: &VerifyConfig, params: &TllParams) -> Result<BracketReport> {
    let spec = config.corpus(GeneratorClass::GaussianBumps);
    let corpus = Corpus::generate(spec.clone())?;
    let families = standard_families(config)?;
    let smoothed: Vec<(usize, DyadicFamily)> = config
        .resolutions
        .iter()
        .map(|&m| Ok((m, build_smoothed_variant(config.dim, block_cap(m), 1.0)?)))
        .collect::<Result<_>>()?;
    let checks = [("standard-over-smoothed", true)];
    let reports = evaluate(config.seed, config.count, &spatial_levels(config), &checks, config.limit, |i, level| {
        let u = corpus.items[i].field(level.resolution)?;
        let a = tll_norm(&u, params, family_for(&families, level.resolution))?;
        let b = tll_norm(&u, params, family_for(&smoothed, level.resolution))?;
        Ok(vec![ratio(a, b)])
    })?;
    Ok(assemble("decomposition-independence", Some(spec), reports, config.limit))
}

/// `F^{s+2−δ}_{p} ⊂ F^{s+1}_{2p}` (needs `n/(2p) + δ < 1`), together with
/// `F^{σ}_{p} ⊂ L_{p,r}` for `σ > 0` and the monotonicity in `s`.
pub fn suite_embedding_tll(config: &VerifyConfig, params: &TllParams, delta: f64) -> Result<BracketReport> {
    let constraint = config.dim as f64 / (2.0 * params.p) + delta;
    if constraint >= 1.0 {
        return Ok(BracketReport::skipped(
            "embedding-tll",
            format!("n/(2p) + δ = {constraint:.4} is not below 1"),
            config.limit,
        ));
    }
    let spec = config.corpus(GeneratorClass::RandomBandLimited);
    let corpus = Corpus::generate(spec.clone())?;
    let families = standard_families(config)?;
    let s = params.s;
    let sigma = if s > 0.0 { s } else { 0.5 };
    let checks = [("tll-embedding", false), ("lorentz-embedding", false), ("monotone-in-s", false)];
    let reports = evaluate(config.seed, config.count, &spatial_levels(config), &checks, config.limit, |i, level| {
        let family = family_for(&families, level.resolution);
        let u = corpus.items[i].field(level.resolution)?;
        let target = params.with_s(s + 1.0).with_p(2.0 * params.p);
        let source = params.with_s(s + 2.0 - delta);
        Ok(vec![
            ratio(tll_norm(&u, &target, family)?, tll_norm(&u, &source, family)?),
            ratio(
                lorentz_quasinorm(&u, params.lorentz()),
                tll_norm(&u, &params.with_s(sigma), family)?,
            ),
            ratio(tll_norm(&u, params, family)?, tll_norm(&u, &params.with_s(s + 1.0), family)?),
        ])
    })?;
    Ok(assemble("embedding-tll", Some(spec), reports, config.limit))
}

/// `‖uv‖_{F^s_p} / (‖u‖_{F^s_{2p}}‖v‖_{F^s_{2p}})` for `s > 0`, with
/// dealiased products of neighbouring corpus items.
pub fn suite_product(config: &VerifyConfig, params: &TllParams) -> Result<BracketReport> {
    if params.s <= 0.0 {
        return Ok(BracketReport::skipped("product", "needs s > 0", config.limit));
    }
    let spec = config.corpus(GeneratorClass::RandomBandLimited);
    let corpus = Corpus::generate(spec.clone())?;
    let families = standard_families(config)?;
    let doubled = params.with_p(2.0 * params.p);
    let checks = [("product", false)];
    let reports = evaluate(config.seed, config.count, &spatial_levels(config), &checks, config.limit, |i, level| {
        let family = family_for(&families, level.resolution);
        let u = corpus.items[i].spectrum(level.resolution)?;
        let v = corpus.items[(i + 1) % config.count].spectrum(level.resolution)?;
        let uv = dealiased_product(&u, &v)?;
        let num = tll_norm_spectral(&uv, params, family)?;
        let den = tll_norm_spectral(&u, &doubled, family)? * tll_norm_spectral(&v, &doubled, family)?;
        Ok(vec![ratio(num, den)])
    })?;
    Ok(assemble("product", Some(spec), reports, config.limit))
}

/// Exponents of time regularity probed by the mixed-derivative suite.
pub const MIXED_ALPHAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Separable trajectory `u(t) = Σ_j g_j(t/T) v_j` with zero-trace profiles.
pub struct SeparableTrajectory {
    pub profiles: Vec<TimeProfile>,
    pub spatial: Vec<SpectralField>,
}

impl SeparableTrajectory {
    /// Profiles are seeded from the items, with mode numbers up to `max_mode`.
    pub fn from_corpus(seed: u64, items: &[&CorpusItem], resolution: usize, max_mode: u32) -> Result<Self> {
        let profiles = items
            .iter()
            .map(|it| TimeProfile::random_with_modes(&mut item_rng(item_seed(seed, it.index), 1), max_mode))
            .collect();
        let spatial = items.iter().map(|it| it.spectrum(resolution)).collect::<Result<_>>()?;
        Ok(SeparableTrajectory { profiles, spatial })
    }

    /// Time-direction signals of the profiles on `[0, T]`, `n + 1` samples each.
    pub fn signals(&self, period: f64, n: usize) -> Result<Vec<TimeSignal>> {
        self.profiles
            .iter()
            .map(|g| TimeSignal::from_scalars(period / n as f64, &g.samples(n)))
            .collect()
    }
}

/// `(Σ_{i<n} ‖Σ_j h_j(t_i) w_j‖^η dt)^{1/η}` over pre-decomposed `w_j`.
fn space_time_norm(
    time_parts: &[Vec<Complex64>],
    spatial: &[BlockDecomposition],
    params: &TllParams,
    dt: f64,
    eta: f64,
    n: usize,
) -> Result<f64> {
    let mut sum = 0.0;
    for i in 0..n {
        let parts: Vec<(Complex64, &BlockDecomposition)> =
            time_parts.iter().map(|h| h[i]).zip(spatial.iter()).collect();
        sum += BlockDecomposition::combine(&parts)?.norm(params)?.powf(eta) * dt;
    }
    Ok(sum.powf(1.0 / eta))
}

/// Ratios `‖B_t^α u‖_{L_η F^{s+2(1−α)}} / (‖u'‖_{L_η F^s} + ‖u‖_{L_η F^{s+2}})`
/// for each `α` in [`MIXED_ALPHAS`], all on `[0, T]`.
///
/// Time operators act on the even-reflection extension; spatial smoothness
/// `F^{s+σ}` is measured as `‖B^σ ·‖_{F^s}`, and `u'` is taken by the same
/// spectral route `(B_t − 1)E u`, so the endpoints `α ∈ {0, 1}` are bounded
/// by one whenever the spatial norm is a norm monotone under `B^σ` (e.g.
/// `p = q = r = 2`).
pub fn mixed_derivative_ratios(
    traj: &SeparableTrajectory,
    params: &TllParams,
    eta: f64,
    family: &DyadicFamily,
    period: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let dt = period / n as f64;
    let shifted = |sigma: f64| -> Result<Vec<BlockDecomposition>> {
        traj.spatial
            .iter()
            .map(|v| BlockDecomposition::new(&bessel_potential_spectral(v, sigma), family))
            .collect()
    };
    let extended: Vec<TimeSignal> = traj.signals(period, n)?.iter().map(extend_even_reflection).collect();
    let plain: Vec<Vec<Complex64>> = extended.iter().map(|e| e.scalars()).collect();
    let deriv: Vec<Vec<Complex64>> = extended.iter().map(|e| time_derivative(e).scalars()).collect();
    let smooth = shifted(2.0)?;
    let du = space_time_norm(&deriv, &shifted(0.0)?, params, dt, eta, n)?;
    let u2 = space_time_norm(&plain, &smooth, params, dt, eta, n)?;
    let rhs = du + u2;
    MIXED_ALPHAS
        .iter()
        .map(|&alpha| {
            let parts: Vec<Vec<Complex64>> = extended
                .iter()
                .map(|e| Ok(time_fractional_power(e, alpha)?.scalars()))
                .collect::<Result<_>>()?;
            let lhs = space_time_norm(&parts, &shifted(2.0 * (1.0 - alpha))?, params, dt, eta, n)?;
            Ok(lhs / rhs)
        })
        .collect()
}

/// Time-mode cap of the temporally oscillating half of the mixed corpus.
pub const MIXED_FAST_MODES: u32 = 8;

/// Two trajectory classes alternate by index, since the sup of the ratio sits
/// at opposite corners for the two endpoints: even items pair spatially
/// oscillating fields (band of the coarsest dealiased grid) with slow
/// profiles, approaching the sup at `α = 0`; odd items pair the lowest
/// spatial band with fast profiles, approaching it at `α = 1`. Each
/// trajectory combines items `i` and `i + 2` of its class.
pub fn suite_mixed_derivative(config: &VerifyConfig, params: &TllParams, eta: f64) -> Result<BracketReport> {
    let mut rough = config.corpus(GeneratorClass::RandomBandLimited);
    let coarsest = config.resolutions.iter().copied().min().unwrap_or(32);
    rough.band = rough.band.max(two_thirds_cutoff(coarsest));
    let mut smooth = rough.clone();
    smooth.band = 1;
    let rough_corpus = Corpus::generate(rough.clone())?;
    let smooth_corpus = Corpus::generate(smooth)?;
    let families = standard_families(config)?;
    let names: Vec<String> = MIXED_ALPHAS.iter().map(|a| format!("alpha-{a}")).collect();
    let checks: Vec<(&str, bool)> = names.iter().map(|n| (n.as_str(), false)).collect();
    let n = config.time_samples;
    let reports = evaluate(config.seed, config.count, &space_time_levels(config), &checks, config.limit, |i, level| {
        let (corpus, max_mode) = if i % 2 == 0 { (&rough_corpus, 4) } else { (&smooth_corpus, MIXED_FAST_MODES) };
        let items = [&corpus.items[i], &corpus.items[(i + 2) % config.count]];
        if items.iter().all(|it| it.is_zero()) {
            return Ok(vec![None; MIXED_ALPHAS.len()]);
        }
        let traj = SeparableTrajectory::from_corpus(config.seed, &items, level.resolution, max_mode)?;
        let period = level.time.expect("space-time level");
        let family = family_for(&families, level.resolution);
        Ok(mixed_derivative_ratios(&traj, params, eta, family, period, n)?
            .into_iter()
            .map(|r| Some(if r.is_finite() { r } else { f64::INFINITY }))
            .collect())
    })?;
    Ok(assemble("mixed-derivative", Some(rough), reports, config.limit))
}

/// `‖u‖_{L_{2η}(0,T)} / ‖B^s E u‖_{L_η(0,4T)}` for a zero-trace scalar signal
/// sampled at `n + 1` points on `[0, T]`.
pub fn sobolev_time_ratio(samples: &[f64], period: f64, s: f64, eta: f64) -> Result<Option<f64>> {
    let n = samples.len() - 1;
    let dt = period / n as f64;
    let signal = TimeSignal::from_scalars(dt, samples)?;
    let ext = extend_even_reflection(&signal);
    let smooth = time_fractional_power(&ext, s)?;
    let h = smooth.lebesgue_norm(eta, 0..smooth.len(), |f| f[0].norm());
    let l = signal.lebesgue_norm(2.0 * eta, 0..n, |f| f[0].norm());
    Ok(ratio(l, h))
}

/// `₀H^s_η(0,T) ⊂ L_{2η}(0,T)` for `s > 1/(2η)`, levels over the number of
/// time samples (the configured resolutions) and the interval length.
pub fn suite_sobolev_time(config: &VerifyConfig, s: f64, eta: f64) -> Result<BracketReport> {
    if s <= 1.0 / (2.0 * eta) {
        return Ok(BracketReport::skipped(
            "sobolev-time",
            format!("s = {s} must exceed 1/(2η) = {}", 1.0 / (2.0 * eta)),
            config.limit,
        ));
    }
    let profiles: Vec<TimeProfile> = (0..config.count)
        .map(|i| TimeProfile::random(&mut item_rng(config.seed, i)))
        .collect();
    let checks = [("embedding", false)];
    let reports = evaluate(config.seed, config.count, &space_time_levels(config), &checks, config.limit, |i, level| {
        let samples = profiles[i].samples(level.resolution);
        Ok(vec![sobolev_time_ratio(&samples, level.time.expect("time level"), s, eta)?])
    })?;
    Ok(assemble("sobolev-time", None, reports, config.limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrangement::{indicator_lorentz, LorentzParams};
    use crate::spectral::{inverse_transform, GridField, Shape};
    use crate::tll::sequence_norm_lsq;
    use crate::verify::CorpusSpec;
    use std::f64::consts::PI;

    fn small_config() -> VerifyConfig {
        VerifyConfig {
            count: 4,
            resolutions: vec![32, 64],
            times: vec![0.5, 1.0],
            time_samples: 16,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn pure_mode_ratios_match_closed_forms() {
        let params = TllParams::new(0.5, 3.0, 2.0, 2.0).unwrap();
        let corpus = Corpus::generate(CorpusSpec::new(11, 8, GeneratorClass::PureModes, 2)).unwrap();
        let m = 32;
        let family = build_standard_family(2, block_cap(m)).unwrap();
        for item in &corpus.items {
            let u = item.field(m).unwrap();
            let xi = &item.modes[0].0;
            let r = xi.iter().map(|x| x.abs()).max().unwrap() as f64;
            let k = (r.log2().round()) as i32;
            let s = params.s;
            let w = |s: f64| 2f64.powf(k as f64 * s);
            let d = derivative_equiv_norm(&u, &params, 1, &family).unwrap() / tll_norm(&u, &params.with_s(s + 1.0), &family).unwrap();
            assert!((d - (1.0 + r) * w(s) / w(s + 1.0)).abs() < 1e-10 * d);
            let l = laplacian_power_norm(&u, &params, 1, &family).unwrap() / tll_norm(&u, &params.with_s(s + 2.0), &family).unwrap();
            assert!((l - (1.0 + r * r) * w(s) / w(s + 2.0)).abs() < 1e-10 * l);
            let b = bessel_shift_norm(&u, &params, 2.0, &family).unwrap() / tll_norm(&u, &params, &family).unwrap();
            assert!((b - (1.0 + r * r) * w(s - 2.0) / w(s)).abs() < 1e-10 * b);
        }
    }

    #[test]
    fn pure_mode_family_ratio_is_sequence_quotient() {
        let params = TllParams::new(0.5, 2.5, 2.0, 2.0).unwrap();
        let m = 32;
        let std = build_standard_family(2, block_cap(m)).unwrap();
        let sm = build_smoothed_variant(2, block_cap(m), 1.0).unwrap();
        let shape = Shape::scalar(2, m).unwrap();
        for xi in [[3i64, 0], [1, 2], [5, -4]] {
            let u = inverse_transform(&SpectralField::pure_mode(shape, &xi, 0, Complex64::new(1.0, 0.0)).unwrap());
            let x = [xi[0] as f64, xi[1] as f64];
            let seq = |f: &DyadicFamily| -> Vec<f64> { (0..=f.max_block()).map(|k| f.eval(k, &x)).collect() };
            let want = sequence_norm_lsq(&seq(&std), params.s, params.q) / sequence_norm_lsq(&seq(&sm), params.s, params.q);
            let got = tll_norm(&u, &params, &std).unwrap() / tll_norm(&u, &params, &sm).unwrap();
            assert!((got - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn constant_field_closed_forms() {
        // a constant lives in block 0 only
        let (p, r, n) = (3.0, 2.0, 2.0);
        let params = TllParams::new(0.0, p, 2.0, r).unwrap();
        let m = 16;
        let family = build_standard_family(2, block_cap(m)).unwrap();
        let one = GridField::constant(Shape::scalar(2, m).unwrap(), 1.0);
        let measure = (2.0 * PI).powf(n);
        let norm_at = |pp: f64| indicator_lorentz(1.0, measure, LorentzParams { p: pp, r });
        let emb = tll_norm(&one, &params.with_s(1.0).with_p(2.0 * p), &family).unwrap()
            / tll_norm(&one, &params.with_s(1.5), &family).unwrap();
        assert!((emb - norm_at(2.0 * p) / norm_at(p)).abs() < 1e-12);
        let spec = crate::spectral::forward_transform(&one);
        let uv = dealiased_product(&spec, &spec).unwrap();
        let prod = tll_norm_spectral(&uv, &params, &family).unwrap()
            / tll_norm_spectral(&spec, &params.with_p(2.0 * p), &family).unwrap().powi(2);
        assert!((prod - norm_at(p) / norm_at(2.0 * p).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn mixed_endpoints_are_bounded_by_one() {
        let params = TllParams::new(0.0, 2.0, 2.0, 2.0).unwrap();
        let corpus = Corpus::generate(CorpusSpec::new(5, 4, GeneratorClass::RandomBandLimited, 2)).unwrap();
        let family = build_standard_family(2, block_cap(16)).unwrap();
        for i in 0..3 {
            let items = [&corpus.items[i], &corpus.items[i + 1]];
            let traj = SeparableTrajectory::from_corpus(5, &items, 16, 4).unwrap();
            for period in [0.1, 1.0] {
                let r = mixed_derivative_ratios(&traj, &params, 2.0, &family, period, 16).unwrap();
                assert!(r[0] <= 1.0 + 1e-10 && r[4] <= 1.0 + 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn separable_closed_form() {
        // u = g(t/T)·v: the space-time norms factor into a time part and a space part
        let params = TllParams::new(0.0, 2.0, 2.0, 2.0).unwrap();
        let corpus = Corpus::generate(CorpusSpec::new(9, 1, GeneratorClass::RandomBandLimited, 2)).unwrap();
        let family = build_standard_family(2, block_cap(16)).unwrap();
        let traj = SeparableTrajectory::from_corpus(9, &[&corpus.items[0]], 16, 8).unwrap();
        let (period, n, eta) = (0.5, 16, 2.0);
        let got = mixed_derivative_ratios(&traj, &params, eta, &family, period, n).unwrap();
        let dt = period / n as f64;
        let e = extend_even_reflection(&traj.signals(period, n).unwrap()[0]);
        let tnorm = |s: &TimeSignal| s.lebesgue_norm(eta, 0..n, |f| f[0].norm());
        let xnorm = |sigma: f64| tll_norm_spectral(&bessel_potential_spectral(&traj.spatial[0], sigma), &params, &family).unwrap();
        let rhs = tnorm(&time_derivative(&e)) * xnorm(0.0) + tnorm(&e) * xnorm(2.0);
        for (a, g) in MIXED_ALPHAS.iter().zip(&got) {
            let lhs = tnorm(&time_fractional_power(&e, *a).unwrap()) * xnorm(2.0 * (1.0 - a));
            assert!((g - lhs / rhs).abs() < 1e-10 * g, "α = {a}");
        }
        let _ = dt;
    }

    #[test]
    fn constant_and_zero_signals() {
        // natively periodic constant: B^s c = c
        let (s, eta, period) = (0.3, 2.0, 0.5);
        let n = 16;
        let c = TimeSignal::from_scalars(period / n as f64, &vec![2.0; n]).unwrap();
        let h = time_fractional_power(&c, s).unwrap().lebesgue_norm(eta, 0..n, |f| f[0].norm());
        let l = c.lebesgue_norm(2.0 * eta, 0..n, |f| f[0].norm());
        assert!((h - 2.0 * period.powf(1.0 / eta)).abs() < 1e-12);
        assert!((l - 2.0 * period.powf(1.0 / (2.0 * eta))).abs() < 1e-12);
        assert_eq!(sobolev_time_ratio(&[0.0; 9], 1.0, s, eta).unwrap(), None);
    }

    #[test]
    fn suites_run_and_are_deterministic() {
        let cfg = small_config();
        let a = super::super::run_all(&cfg).unwrap();
        let b = super::super::run_all(&cfg).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.skipped.is_some() || !r.checks.is_empty(), "{}", r.suite);
            for c in &r.checks {
                for l in &c.levels {
                    assert!(l.min_ratio <= l.max_ratio);
                }
            }
        }
        let mono = a.iter().find(|r| r.suite == "embedding-tll").unwrap();
        let check = mono.checks.iter().find(|c| c.name == "monotone-in-s").unwrap();
        assert!(check.levels.iter().all(|l| l.max_ratio <= 1.0));
    }

    #[test]
    fn constraint_violations_skip() {
        let cfg = small_config();
        let params = TllParams::new(0.0, 1.2, 2.0, 2.0).unwrap();
        assert!(suite_embedding_tll(&cfg, &params, 0.5).unwrap().skipped.is_some());
        assert!(suite_product(&cfg, &params).unwrap().skipped.is_some());
        assert!(suite_sobolev_time(&cfg, 0.2, 2.0).unwrap().skipped.is_some());
    }
}
