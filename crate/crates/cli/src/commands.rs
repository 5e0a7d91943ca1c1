use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::json;

use tll_core::dyadic::{block_cap, FamilyKind};
use tll_core::helmholtz::{divergence_max, helmholtz_split, relative_divergence, stokes_resolvent, stokes_semigroup};
use tll_core::nse::checkpoint::{load_checkpoint, save_checkpoint};
use tll_core::nse::monitor::Verdict;
use tll_core::nse::{parse_key_values, taylor_green, Forcing, Solver, SolverConfig};
use tll_core::operators::heat_semigroup;
use tll_core::rearrangement::decreasing_rearrangement;
use tll_core::spectral::io::{load_field, save_field, Dtype};
use tll_core::spectral::{
    forward_transform, mikhlin_constants, GridField, MikhlinSampling, MultiplierSymbol, Sector, Shape,
};
use tll_core::tll::{norm_report, TllParams};
use tll_core::verify::corpus::solenoidal_field;
use tll_core::verify::{Corpus, CorpusSpec, GeneratorClass, SuiteName, VerifyConfig};

use crate::output::{flat_csv, CliError, Run};
use crate::{ExponentArgs, GlobalArgs};

type CmdResult = Result<(), CliError>;

fn read_config(global: &GlobalArgs) -> Result<BTreeMap<String, String>, CliError> {
    match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            Ok(parse_key_values(&text)?)
        }
        None => Ok(BTreeMap::new()),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn reject_unknown(kv: &BTreeMap<String, String>) -> CmdResult {
    if kv.is_empty() {
        Ok(())
    } else {
        let keys: Vec<&str> = kv.keys().map(String::as_str).collect();
        Err(CliError::Usage(format!("unknown config keys: {}", keys.join(", "))))
    }
}

fn load(run: &mut Run, path: &Path) -> Result<GridField, CliError> {
    run.input(path);
    Ok(load_field(path)?.0)
}

fn save(run: &mut Run, name: &str, field: &GridField) -> CmdResult {
    let path = run.path(name);
    save_field(&path, field, Dtype::infer(field))?;
    run.record(path);
    Ok(())
}

pub fn norm(global: &GlobalArgs, field: &Path, e: &ExponentArgs) -> CmdResult {
    let mut run = Run::start(global, "norm")?;
    let mut kv = read_config(global)?;
    let mut get = |key: &str, default: f64| -> Result<f64, CliError> {
        kv.remove(key).map_or(Ok(default), |v| parse(key, &v))
    };
    let (s, p, q, r) = (get("s", e.s)?, get("p", e.p)?, get("q", e.q)?, get("r", e.r)?);
    let family_name = kv.remove("family").unwrap_or_else(|| e.family.clone());
    reject_unknown(&kv)?;
    let params = TllParams::new(s, p, q, r)?;
    let kind = FamilyKind::from_str(&family_name)?;
    let u = load(&mut run, field)?;
    let family = kind.build(u.dim(), block_cap(u.resolution()))?;
    let report = norm_report(&u, &params, &family)?;
    // reference value: the grid L_p norm, equal to the TLL norm at (0, 2, 2, 2)
    let lp = u.lp_norm(p);
    let json = json!({
        "report": report,
        "lp_grid_norm": lp,
        "ratio_to_lp": if lp > 0.0 { report.value / lp } else { f64::NAN },
    });
    run.emit("norm", &json, || {
        format!(
            "s,p,q,r,family,resolution,value,lp_grid_norm\n{s},{p},{q},{r},{},{},{:e},{lp:e}\n",
            report.family_id, report.resolution, report.value
        )
    })?;
    run.finish(json!({"s": s, "p": p, "q": q, "r": r, "family": family_name}))
}

pub fn rearrange(global: &GlobalArgs, field: &Path) -> CmdResult {
    let mut run = Run::start(global, "rearrange")?;
    let u = load(&mut run, field)?;
    let steps = decreasing_rearrangement(&u).steps();
    let json = json!({
        "columns": ["t_start", "t_end", "value"],
        "steps": steps.iter().map(|(a, b, v)| [*a, *b, *v]).collect::<Vec<_>>(),
    });
    run.emit("rearrangement", &json, || {
        let mut s = String::from("t_start,t_end,value\n");
        for (a, b, v) in &steps {
            s.push_str(&format!("{a:e},{b:e},{v:e}\n"));
        }
        s
    })?;
    run.finish(json!({}))
}

fn named_symbol(name: &str, param: Option<f64>, dim: usize) -> Result<MultiplierSymbol, CliError> {
    let p = |default: f64| param.unwrap_or(default);
    Ok(match name {
        "identity" => MultiplierSymbol::identity(),
        "resolvent" => MultiplierSymbol::resolvent(Complex64::new(p(1.0), 0.0)),
        "scaled-resolvent" => MultiplierSymbol::scaled_resolvent(Complex64::new(p(1.0), 0.0)),
        "bessel" => MultiplierSymbol::bessel(p(1.0)),
        "shifted-power" => MultiplierSymbol::shifted_power(p(0.5)),
        "heat" => MultiplierSymbol::heat(p(1.0)),
        "laplacian" => MultiplierSymbol::laplacian(),
        "coordinate" => {
            let axis = p(0.0) as usize;
            if axis >= dim {
                return Err(CliError::Usage(format!("axis {axis} out of range for dim {dim}")));
            }
            MultiplierSymbol::coordinate(axis)
        }
        "helmholtz-entry" => MultiplierSymbol::helmholtz_entry(0, if dim > 1 { 1 } else { 0 }),
        other => return Err(CliError::Usage(format!("unknown symbol `{other}`"))),
    })
}

pub fn multiplier_check(
    global: &GlobalArgs,
    symbol: &str,
    param: Option<f64>,
    sector: Option<f64>,
    dim: usize,
    min_exp: i32,
    max_exp: i32,
) -> CmdResult {
    let mut run = Run::start(global, "multiplier-check")?;
    if min_exp >= max_exp {
        return Err(CliError::Usage("need min-exp < max-exp".into()));
    }
    let symbols = match (symbol, sector) {
        ("scaled-resolvent", Some(angle)) => Sector::new(angle)?
            .samples(-6, 6)
            .into_iter()
            .map(MultiplierSymbol::scaled_resolvent)
            .collect(),
        _ => vec![named_symbol(symbol, param, dim)?],
    };
    let sampling = MikhlinSampling {
        min_exp,
        max_exp,
        ..MikhlinSampling::default()
    };
    let report = mikhlin_constants(&symbols, dim, &sampling)?;
    let json = serde_json::to_value(&report)?;
    run.emit("mikhlin", &json, || {
        let mut s = String::from("alpha,estimate,estimate_doubled,sample_count\n");
        for e in &report.entries {
            let alpha: Vec<String> = e.alpha.iter().map(|a| a.to_string()).collect();
            s.push_str(&format!("{},{:e},{:e},{}\n", alpha.join(""), e.estimate, e.estimate_doubled, e.sample_count));
        }
        s
    })?;
    run.finish(json!({"symbol": symbol, "param": param, "sector": sector, "dim": dim}))
}

pub fn helmholtz(global: &GlobalArgs, field: &Path) -> CmdResult {
    let mut run = Run::start(global, "helmholtz")?;
    let u = load(&mut run, field)?;
    let split = helmholtz_split(&u)?;
    save(&mut run, "solenoidal.tllf", &split.solenoidal)?;
    save(&mut run, "gradient.tllf", &split.gradient)?;
    let reassembly = split.solenoidal.add(&split.gradient)?.sub(&u)?.l2_norm() / u.l2_norm().max(f64::MIN_POSITIVE);
    let json = json!({
        "input_l2": u.l2_norm(),
        "input_relative_divergence": relative_divergence(&u)?,
        "solenoidal_l2": split.solenoidal.l2_norm(),
        "gradient_l2": split.gradient.l2_norm(),
        "solenoidal_relative_divergence": relative_divergence(&split.solenoidal)?,
        "solenoidal_divergence_max": divergence_max(&split.solenoidal)?,
        "reassembly_error": reassembly,
    });
    run.emit("helmholtz", &json, || flat_csv(&json))?;
    run.finish(json!({}))
}

/// `max_ξ |ŵ(ξ) − m(|ξ|²) û(ξ)| / max_ξ |û(ξ)|`, recomputed from the fields.
fn eigen_residual(u: &GridField, w: &GridField, m: impl Fn(f64) -> Complex64) -> f64 {
    let (uh, wh) = (forward_transform(u), forward_transform(w));
    let shape = u.shape();
    let r2 = shape.wavenumber_squares();
    let n = shape.points();
    let mut worst: f64 = 0.0;
    for c in 0..shape.components {
        for j in 0..n {
            let expect = m(r2[j]) * uh.data()[c * n + j];
            worst = worst.max((wh.data()[c * n + j] - expect).norm());
        }
    }
    worst / uh.max_abs().max(f64::MIN_POSITIVE)
}

pub fn heat(global: &GlobalArgs, field: &Path, t: f64) -> CmdResult {
    let mut run = Run::start(global, "heat")?;
    let u = load(&mut run, field)?;
    let w = heat_semigroup(&u, t)?;
    save(&mut run, "heat.tllf", &w)?;
    let json = json!({
        "t": t,
        "input_l2": u.l2_norm(),
        "output_l2": w.l2_norm(),
        "eigen_residual": eigen_residual(&u, &w, |r2| Complex64::new((-t * r2).exp(), 0.0)),
    });
    run.emit("heat", &json, || flat_csv(&json))?;
    run.finish(json!({"t": t}))
}

pub fn stokes(global: &GlobalArgs, field: &Path, t: Option<f64>, lambda: Option<Complex64>) -> CmdResult {
    let mut run = Run::start(global, "stokes")?;
    let u = load(&mut run, field)?;
    let (w, residual, label) = match (t, lambda) {
        (Some(t), None) => {
            let w = stokes_semigroup(&u, t)?;
            let res = eigen_residual(&u, &w, |r2| Complex64::new((-t * r2).exp(), 0.0));
            (w, res, json!({"t": t}))
        }
        (None, Some(l)) => {
            let w = stokes_resolvent(&u, l)?;
            let res = eigen_residual(&u, &w, |r2| (l + r2).inv());
            (w, res, json!({"lambda": [l.re, l.im]}))
        }
        _ => return Err(CliError::Usage("give exactly one of --t or --lambda".into())),
    };
    save(&mut run, "stokes.tllf", &w)?;
    let json = json!({
        "operator": label,
        "input_l2": u.l2_norm(),
        "output_l2": w.l2_norm(),
        "output_divergence_max": divergence_max(&w)?,
        "eigen_residual": residual,
    });
    run.emit("stokes", &json, || flat_csv(&json))?;
    run.finish(label)
}

fn initial_field(run: &mut Run, spec: &str, config: &SolverConfig, amplitude: f64, seed: u64) -> Result<GridField, CliError> {
    let (dim, m) = (config.dim, config.resolution);
    let u = match spec {
        "taylor-green" => taylor_green(dim, m)?,
        "zero" => GridField::zeros(Shape::vector(dim, m)?),
        "solenoidal" => solenoidal_field(seed, 0, dim, 4, m)?,
        path => load(run, Path::new(path))?,
    };
    Ok(u.scale(amplitude))
}

pub fn nse(global: &GlobalArgs, field: Option<&Path>) -> CmdResult {
    let mut run = Run::start(global, "nse")?;
    let kv = read_config(global)?;
    if let Some(path) = &global.config {
        run.input(path);
    }
    let (config, mut rest) = SolverConfig::from_key_values(&kv)?;
    let initial = rest.remove("initial").unwrap_or_else(|| "taylor-green".into());
    let amplitude: f64 = rest.remove("amplitude").map_or(Ok(1.0), |v| parse("amplitude", &v))?;
    let forcing_path = rest.remove("forcing");
    let resume = rest.remove("resume");
    reject_unknown(&rest)?;

    let solver = Solver::new(config.clone())?;
    let constraints = config.validate()?;
    let state = match &resume {
        Some(dir) => {
            let (state, manifest) = load_checkpoint(Path::new(dir))?;
            if manifest.config_hash != config.hash() {
                log::warn!("checkpoint config hash {} differs from the current config", manifest.config_hash);
            }
            run.input(Path::new(dir));
            state
        }
        None => {
            let u0 = match field {
                Some(path) => load(&mut run, path)?.scale(amplitude),
                None => initial_field(&mut run, &initial, &config, amplitude, global.seed.unwrap_or(0))?,
            };
            solver.initial_state(&u0)?
        }
    };
    let forcing = match &forcing_path {
        Some(path) => Forcing::steady(&load(&mut run, Path::new(path))?)?,
        None => Forcing::None,
    };
    let checkpoints = run.path("checkpoints");
    let out = solver.run(state, &forcing, config.total_steps(), Some(&checkpoints))?;
    if config.checkpoint_every > 0 && checkpoints.exists() {
        run.record(checkpoints);
    }
    let final_dir = run.path("final");
    save_checkpoint(&final_dir, &out.final_state, &config)?;
    run.record(final_dir);
    let mut csv = Vec::new();
    out.trajectory.write_csv(&mut csv)?;
    run.write("trajectory.csv", &String::from_utf8_lossy(&csv))?;
    let json = json!({
        "report": out.report,
        "constraints": constraints,
        "final_t": out.final_state.t(),
        "final_l2": out.final_state.grid().l2_norm(),
        "samples": out.trajectory.samples.len(),
    });
    run.emit("blowup_report", &json, || flat_csv(&json))?;
    run.finish(json!({"solver": config, "initial": initial, "amplitude": amplitude, "forcing": forcing.label(), "resume": resume}))?;
    if out.report.verdict == Verdict::StepRejected {
        return Err(CliError::Numerical(format!(
            "step rejected at t = {:?}",
            out.report.t_halt
        )));
    }
    Ok(())
}

fn verify_config(global: &GlobalArgs, kv: &mut BTreeMap<String, String>) -> Result<VerifyConfig, CliError> {
    let mut c = VerifyConfig::default();
    if let Some(v) = kv.remove("seed") {
        c.seed = parse("seed", &v)?;
    }
    if let Some(v) = kv.remove("count") {
        c.count = parse("count", &v)?;
    }
    if let Some(v) = kv.remove("dim") {
        c.dim = parse("dim", &v)?;
    }
    if let Some(v) = kv.remove("band") {
        c.band = parse("band", &v)?;
    }
    if let Some(v) = kv.remove("resolutions") {
        c.resolutions = parse_list("resolutions", &v)?;
    }
    if let Some(v) = kv.remove("times") {
        c.times = parse_list("times", &v)?;
    }
    if let Some(v) = kv.remove("time_samples") {
        c.time_samples = parse("time_samples", &v)?;
    }
    if let Some(v) = kv.remove("limit") {
        c.limit = parse("limit", &v)?;
    }
    if let Some(seed) = global.seed {
        c.seed = seed;
    }
    Ok(c)
}

pub fn verify(
    global: &GlobalArgs,
    suites: &[String],
    count: Option<usize>,
    resolutions: Option<Vec<usize>>,
    times: Option<Vec<f64>>,
) -> CmdResult {
    let mut run = Run::start(global, "verify")?;
    let mut kv = read_config(global)?;
    let mut config = verify_config(global, &mut kv)?;
    reject_unknown(&kv)?;
    if let Some(c) = count {
        config.count = c;
    }
    if let Some(r) = resolutions {
        config.resolutions = r;
    }
    if let Some(t) = times {
        config.times = t;
    }
    if config.count == 0 || config.resolutions.is_empty() || config.times.is_empty() {
        return Err(CliError::Usage("count, resolutions and times must be nonempty".into()));
    }
    let names: Vec<SuiteName> = if suites.iter().any(|s| s == "all") {
        SuiteName::ALL.to_vec()
    } else {
        suites.iter().map(|s| SuiteName::from_str(s)).collect::<Result<_, _>>()?
    };
    let mut reports = Vec::new();
    for name in &names {
        let report = name.run(&config)?;
        eprintln!("{}", report.summary());
        reports.push(report);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    let json = json!({"passed": failed == 0, "reports": reports});
    run.emit("verify", &json, || {
        let mut s = String::from("suite,check,resolution,time,count,min_ratio,max_ratio,stability_factor,passed\n");
        for r in &reports {
            for c in &r.checks {
                for l in &c.levels {
                    s.push_str(&format!(
                        "{},{},{},{},{},{:e},{:e},{:e},{}\n",
                        r.suite,
                        c.name,
                        l.resolution,
                        l.time.map(|t| t.to_string()).unwrap_or_default(),
                        l.count,
                        l.min_ratio,
                        l.max_ratio,
                        c.stability_factor,
                        c.passed
                    ));
                }
            }
        }
        s
    })?;
    run.finish(serde_json::to_value(&config)?)?;
    if failed > 0 {
        return Err(CliError::SuiteFailed(failed));
    }
    Ok(())
}

pub fn sample(global: &GlobalArgs, kind: &str, dim: usize, resolution: usize, index: usize, name: &str) -> CmdResult {
    let mut run = Run::start(global, "sample")?;
    let seed = global.seed.unwrap_or(0);
    let field = match kind {
        "taylor-green" => taylor_green(dim, resolution)?,
        "zero" => GridField::zeros(Shape::vector(dim, resolution)?),
        "solenoidal" => solenoidal_field(seed, index, dim, 4, resolution)?,
        other => {
            let class = GeneratorClass::from_str(other)?;
            let corpus = Corpus::generate(CorpusSpec::new(seed, index + 1, class, dim))?;
            corpus.items[index].field(resolution)?
        }
    };
    save(&mut run, name, &field)?;
    let json = json!({"kind": kind, "dim": dim, "resolution": resolution, "l2": field.l2_norm()});
    run.emit("sample", &json, || flat_csv(&json))?;
    run.finish(json!({"kind": kind, "dim": dim, "resolution": resolution, "index": index}))
}
