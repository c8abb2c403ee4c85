use std::io::Write;
use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use serde_json::{json, Value};

use quadvar::counting::{
    analyze_shift, config10_meets_density_bound, cube_completion_probability, intersection_variance,
    pattern_census, pattern_census_naive, quadruple_count, quadruple_count_spectral,
};
use quadvar::forms::approx_variety_verdict;
use quadvar::fourier::{fourier_set, u2_norm4, FourierPlan, RealTable};
use quadvar::generators::{coset_probability_sandwich, random_coset_probability, random_coset_probability_mc};
use quadvar::recovery;
use quadvar::GSubset;

use crate::config::ExperimentConfig;
use crate::report::{to_json, write_csv, write_text, Envelope, Report};
use crate::CliError;

pub struct Outputs {
    pub metrics: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn emit(report: &Report, env: &Envelope, out: &Outputs) -> Result<(), CliError> {
    // a closed pipe on stdout is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{}", to_json(&json!({ "report": report, "envelope": env })));
    if let Some(path) = &out.metrics {
        write_text(path, &(to_json(report) + "\n"))?;
    }
    if let Some(path) = &out.csv {
        write_csv(path, &report.metrics)?;
    }
    Ok(())
}

fn load(path: &Path) -> Result<GSubset, CliError> {
    GSubset::load(path).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn set_summary(set: &GSubset) -> Value {
    let ctx = set.ctx();
    json!({ "p": ctx.p(), "n": ctx.n(), "size": set.len(), "delta": set.density_f64() })
}

pub fn gen(cfg: ExperimentConfig, out: &Outputs) -> Result<(), CliError> {
    let path = cfg.out.clone().ok_or_else(|| CliError::args("gen needs --out"))?;
    let spec = cfg.generator();
    let mut env = Envelope::default();
    let generated = env.time("generate", || spec.generate())?;
    env.time("write", || generated.set.save(&path))?;
    let mut report = Report::new("gen", &cfg);
    let mut metrics = set_summary(&generated.set);
    metrics["generator"] = serde_json::to_value(&spec).expect("spec serializes");
    if let Some(truth) = &generated.truth {
        metrics["truth_min_direction_rank"] = json!(truth.gamma.min_direction_rank());
        metrics["truth_lambda_dim"] = json!(truth.lambda.dim());
    }
    report.metrics = metrics;
    emit(&report, &env, out)
}

fn variety_metrics(set: &GSubset, env: &mut Envelope) -> Result<Value, CliError> {
    let r = env.time("analyze", || approx_variety_verdict(set))?;
    Ok(serde_json::to_value(r).expect("report serializes"))
}

pub fn analyze(file: &Path, cfg: ExperimentConfig, out: &Outputs) -> Result<(), CliError> {
    let set = load(file)?;
    let mut env = Envelope::default();
    let mut report = Report::new("analyze", &cfg);
    report.metrics = variety_metrics(&set, &mut env)?;
    emit(&report, &env, out)
}

pub fn recover(file: &Path, cfg: ExperimentConfig, out: &Outputs) -> Result<(), CliError> {
    let set = load(file)?;
    let rcfg = cfg.recovery();
    let mut env = Envelope::default();
    let mut report = Report::new("recover", &cfg);
    report.recovery_config = Some(serde_json::to_value(&rcfg).expect("config serializes"));
    report.metrics = variety_metrics(&set, &mut env)?;
    match env.time("recover", || recovery::recover(&set, &rcfg)) {
        Ok(r) => {
            let mut value = serde_json::to_value(r.report()).expect("report serializes");
            value["status"] = json!(if r.low_confidence { "low_confidence" } else { "ok" });
            report.recovery = Some(value);
            if let Some(path) = &cfg.variety_out {
                r.q_set.save(path)?;
            }
            emit(&report, &env, out)
        }
        Err(quadvar::Error::Stage { stage, reason }) => {
            report.recovery = Some(json!({ "status": "refused", "stage": stage, "reason": reason }));
            emit(&report, &env, out)?;
            Err(CliError::stage(format!("recovery refused at {stage}: {reason}")))
        }
        Err(e) => Err(e.into()),
    }
}

/// Direct enumeration costs about δ|V|⁴ steps.
const ORACLE_BUDGET: f64 = 4e9;

pub fn census(file: &Path, cfg: ExperimentConfig, out: &Outputs) -> Result<(), CliError> {
    let set = load(file)?;
    let with10 = cfg.config10.unwrap_or(false);
    let mut env = Envelope::default();
    let fast = env.time("fast", || pattern_census(&set, with10));
    let mut report = Report::new("census", &cfg);
    let mut metrics = set_summary(&set);
    metrics["fast"] = serde_json::to_value(&fast).expect("census serializes");
    if with10 {
        metrics["config10_density_bound"] = json!(config10_meets_density_bound(&set, fast.config10.unwrap()));
    }
    let mut agree = true;
    if cfg.oracle.unwrap_or(false) {
        let cost = set.density_f64() * (set.len() as f64).powi(4);
        if cost > ORACLE_BUDGET {
            return Err(CliError::args(format!("set too large for the enumeration oracle ({} elements)", set.len())));
        }
        let naive = env.time("oracle", || pattern_census_naive(&set, with10));
        agree = naive == fast;
        metrics["oracle"] = serde_json::to_value(&naive).expect("census serializes");
        metrics["agree"] = json!(agree);
    }
    report.metrics = metrics;
    emit(&report, &env, out)?;
    if agree {
        Ok(())
    } else {
        Err(CliError::stage("census: fast counts disagree with the oracle"))
    }
}

fn check(name: &str, pass: bool, detail: Value) -> Value {
    json!({ "name": name, "pass": pass, "detail": detail })
}

pub fn verify(file: &Path, cfg: ExperimentConfig, out: &Outputs) -> Result<(), CliError> {
    let set = load(file)?;
    let ctx = set.ctx();
    let g = ctx.size() as f64;
    let mut env = Envelope::default();
    let checks = env.time("checks", || -> Result<Vec<Value>, CliError> {
        let mut checks = Vec::new();
        let q = quadruple_count(&set);
        let spectral = quadruple_count_spectral(&set);
        checks.push(check(
            "quadruples_spectral",
            (q as f64 - spectral).abs() <= 1e-6 * spectral.max(1.0),
            json!({ "count": q.to_string(), "spectral": spectral }),
        ));
        let f = RealTable::indicator(&set);
        let hat = fourier_set(&set);
        let parseval: f64 = hat.values().iter().map(|c| c.norm_sqr()).sum();
        checks.push(check(
            "parseval",
            (parseval - set.density_f64()).abs() <= 1e-9,
            json!({ "sum_sq": parseval, "density": set.density_f64() }),
        ));
        let u2 = u2_norm4(&f) * g.powi(3);
        checks.push(check(
            "u2_quadruples",
            (u2 - q as f64).abs() <= 1e-6 * u2.max(1.0),
            json!({ "u2_times_g3": u2 }),
        ));
        // duality of shifted self-convolutions on a seeded sample of elements
        let elems = recovery::candidate_elements(ctx.size(), 48, cfg.seed());
        let plan = FourierPlan::new(ctx);
        let counts: Vec<Vec<u64>> = elems.iter().map(|&a| analyze_shift(&plan, &set, a).counts).collect();
        let mut bad = 0usize;
        for (i, &a) in elems.iter().enumerate() {
            for (j, &b) in elems.iter().enumerate() {
                bad += (counts[i][b] != counts[j][a]) as usize;
            }
        }
        checks.push(check("convolution_duality", bad == 0, json!({ "elements": elems.len(), "mismatches": bad })));
        if !set.is_empty() {
            let census = pattern_census(&set, false);
            let completion = cube_completion_probability(&set)?;
            checks.push(check(
                "cube_completion",
                census.cubes <= census.seven_point && completion <= num_rational::Ratio::from_integer(1),
                json!({ "cubes": census.cubes.to_string(), "seven_point": census.seven_point.to_string() }),
            ));
        }
        let var = intersection_variance(&set, 2);
        checks.push(check(
            "intersection_variance",
            var >= num_rational::BigRational::from_integer(0.into()),
            json!(var.to_f64()),
        ));
        Ok(checks)
    })?;
    let all = checks.iter().all(|c| c["pass"] == json!(true));
    let mut report = Report::new("verify", &cfg);
    let mut metrics = set_summary(&set);
    metrics["checks"] = Value::Array(checks);
    metrics["all_pass"] = json!(all);
    report.metrics = metrics;
    emit(&report, &env, out)?;
    if all {
        Ok(())
    } else {
        Err(CliError::stage("verify: at least one identity failed"))
    }
}

pub fn prob(cfg: ExperimentConfig, out: &Outputs) -> Result<(), CliError> {
    let p = cfg.p.unwrap_or(3);
    let n_max = cfg.n_max.or(cfg.n).unwrap_or(8);
    let m_max = cfg.m_max.unwrap_or(3);
    let samples = cfg.samples.unwrap_or(0);
    let ds: Vec<u32> = match cfg.d {
        Some(d) => vec![d as u32],
        None => vec![1, 2],
    };
    if p < 3 || !quadvar::field::is_prime(p as u64) {
        return Err(CliError::args(format!("p = {p} is not an odd prime")));
    }
    let mut env = Envelope::default();
    let rows = env.time("table", || -> Result<Vec<Value>, CliError> {
        let mut rows = Vec::new();
        for n in 1..=n_max {
            for &d in &ds {
                for m in 1..=m_max {
                    if m + d > n {
                        continue;
                    }
                    let exact = random_coset_probability(p, n, d, m)?;
                    let (lower, upper) = coset_probability_sandwich(p, n, d, m);
                    let x = exact.to_f64().unwrap_or(f64::NAN);
                    let mut row = json!({
                        "p": p, "n": n, "d": d, "m": m,
                        "exact": exact.to_string(),
                        "value": x,
                        "lower": lower.to_f64(),
                        "upper": upper.to_f64(),
                        "sandwich": lower <= exact && exact <= upper,
                    });
                    if samples > 0 {
                        let seed = cfg.seed() ^ ((n as u64) << 32 | (d as u64) << 16 | m as u64);
                        let mc = random_coset_probability_mc(p, n, d, m, samples, seed)?;
                        let sigma = (x * (1.0 - x) / samples as f64).sqrt();
                        row["mc"] = json!(mc);
                        row["within_3_sigma"] = json!((mc - x).abs() <= 3.0 * sigma.max(1.0 / samples as f64));
                    }
                    rows.push(row);
                }
            }
        }
        Ok(rows)
    })?;
    let all = rows.iter().all(|r| r["sandwich"] == json!(true));
    let mut report = Report::new("prob", &cfg);
    report.metrics = json!({ "rows": rows, "sandwich_holds": all });
    emit(&report, &env, out)
}
