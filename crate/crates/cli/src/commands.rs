use std::io::Write;
use std::path::PathBuf;

use anyhow::anyhow;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use rbmq_core::asymptotics::{self, BranchConstants};
use rbmq_core::oracle::{self, Scheme, Side};
use rbmq_core::uniformization::{self, DEFAULT_QMAX};
use rbmq_core::{kernel, AsymptoticReport, ModelConfig, ModelParams, Regime, TransformBundle};

use crate::{
    sink, AsymptArgs, CheckArgs, Common, EvalArgs, Failure, Function, InvertArgs, Output, SchemeArg,
    SideArg, SimulateArgs,
};

type Res = Result<(), Failure>;

fn load(path: &PathBuf) -> Result<(ModelConfig, ModelParams), Failure> {
    let cfg = ModelConfig::load(path).map_err(|e| Failure::InvalidConfig(e.into()))?;
    let p = cfg.params().map_err(|e| Failure::InvalidConfig(e.into()))?;
    Ok((cfg, p))
}

fn bundle(p: &ModelParams) -> Result<TransformBundle, Failure> {
    TransformBundle::new(p).map_err(|e| Failure::Refused(e.into()))
}

fn refuse<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Refused(e.into())
}

fn io<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Io(e.into())
}

fn emit_json(out: &Option<PathBuf>, v: &impl Serialize) -> Res {
    let mut w = sink(out).map_err(io)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(io)?;
    writeln!(w).map_err(io)?;
    w.flush().map_err(io)
}

/// Flat `key,value` rows for nested JSON objects, keys joined with dots.
fn emit_key_value_csv(out: &Option<PathBuf>, v: &Value) -> Res {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, rows);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), x, rows);
                }
            }
            Value::String(s) => rows.push((prefix.to_string(), s.clone())),
            Value::Null => rows.push((prefix.to_string(), String::new())),
            other => rows.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let mut w = csv::Writer::from_writer(sink(out).map_err(io)?);
    w.write_record(["key", "value"]).map_err(io)?;
    for (k, x) in rows {
        w.write_record([k, x]).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn emit(c: &Common, default: Output, v: &Value) -> Res {
    match c.output.unwrap_or(default) {
        Output::Json => emit_json(&c.out, v),
        Output::Csv => emit_key_value_csv(&c.out, v),
    }
}

fn complex(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn analyze(c: Common) -> Res {
    let (cfg, p) = load(&c.config)?;
    let d = p.derived();
    let group = uniformization::group_order(&p, DEFAULT_QMAX);
    let t1b = kernel::theta1_at_branch_point(&p);
    let mut m = Map::new();
    m.insert("sigma".into(), json!(cfg.sigma));
    m.insert("mu".into(), json!(cfg.mu));
    m.insert("r".into(), json!(cfg.r));
    m.insert("identity_reflection".into(), json!(p.has_identity_reflection()));
    m.insert("derived".into(), json!(d));
    m.insert("chebyshev_exponent".into(), json!(d.chebyshev_exponent()));
    m.insert("hyperbola".into(), json!(kernel::hyperbola(&p)));
    m.insert("theta1_at_branch_point".into(), json!(t1b));
    m.insert("group".into(), json!(group));
    m.insert("nature".into(), json!(uniformization::classify_solution_nature(&group)));
    let regime = match TransformBundle::new(&p) {
        Ok(b) => {
            let (r, _) = asymptotics::regime_of(&b);
            let sign = match r {
                Regime::SaddleNeg => -1,
                Regime::BoundaryZero => 0,
                Regime::PoleDominant => 1,
            };
            m.insert("theta1_at_branch_point_sign".into(), json!(sign));
            json!(r)
        }
        Err(_) => Value::Null,
    };
    m.insert("regime".into(), regime);
    emit(&c, Output::Json, &Value::Object(m))
}

fn point(re: Option<f64>, im: f64, name: &str) -> Result<C64, Failure> {
    re.map(|r| C64::new(r, im))
        .ok_or_else(|| Failure::InvalidConfig(anyhow!("missing --{name}")))
}

pub fn eval(a: EvalArgs) -> Res {
    let (_, p) = load(&a.common.config)?;
    let b = bundle(&p)?;
    let value = match a.function {
        Function::Phi => {
            let t1 = point(a.re1, a.im1, "re1")?;
            let t2 = point(a.re2, a.im2, "re2")?;
            let v = b.phi_eval(t1, t2).map_err(refuse)?;
            json!({ "fn": "phi", "theta1": complex(t1), "theta2": complex(t2), "value": complex(v) })
        }
        f => {
            let t = point(a.re, a.im, "re")?;
            let (name, v) = match f {
                Function::Phi1 => ("phi1", b.phi1_eval(t)),
                Function::Phi2 => ("phi2", b.phi2_eval(t)),
                Function::W => ("w", b.w_eval(t)),
                Function::Psi1 => ("psi1", b.psi1_eval(t)),
                Function::Psi2 => ("psi2", b.psi2_eval(t)),
                Function::Phi => unreachable!(),
            };
            let v = v.map_err(refuse)?;
            json!({ "fn": name, "theta": complex(t), "value": complex(v) })
        }
    };
    emit(&a.common, Output::Json, &value)
}

pub fn asympt(a: AsymptArgs) -> Res {
    let (_, p) = load(&a.common.config)?;
    let p = match a.side {
        SideArg::Nu1 => p,
        SideArg::Nu2 => p.swapped(),
    };
    let b = bundle(&p)?;
    let report: AsymptoticReport = asymptotics::classify_regime(&b).map_err(refuse)?;
    let constants: Option<BranchConstants> = asymptotics::constants_c1_c2(&b).ok();
    let tails = a
        .x
        .iter()
        .map(|&x| report.tail(x).map(|v| json!({ "x": x, "tail": v })).map_err(refuse))
        .collect::<Result<Vec<_>, _>>()?;
    let v = json!({
        "side": match a.side { SideArg::Nu1 => "nu1", SideArg::Nu2 => "nu2" },
        "regime": report.regime,
        "decay_rate": report.decay_rate,
        "power": report.power,
        "constant": report.constant,
        "pole_location": report.pole_location,
        "theta1_at_branch_point": report.theta1_at_branch,
        "branch_constants": constants,
        "tail": tails,
    });
    emit(&a.common, Output::Json, &v)
}

pub fn simulate(a: SimulateArgs) -> Res {
    let (cfg, p) = load(&a.common.config)?;
    let mut s = cfg.simulation();
    if let Some(v) = a.seed {
        s.seed = v;
    }
    if let Some(v) = a.step {
        s.step = v;
    }
    if let Some(v) = a.horizon {
        s.horizon = v;
    }
    if let Some(v) = a.burn_in {
        s.burn_in = v;
    }
    if let Some(v) = a.batches {
        s.batches = v;
    }
    if let Some(v) = a.chains {
        s.chains = v;
    }
    if let Some(v) = a.scheme {
        s.scheme = match v {
            SchemeArg::BridgeMinimum => Scheme::BridgeMinimum,
            SchemeArg::Projection => Scheme::Projection,
        };
    }
    s.validate().map_err(|e| Failure::InvalidConfig(e.into()))?;
    let r = oracle::simulate(&p, &s).map_err(refuse)?;
    match a.common.output.unwrap_or(Output::Csv) {
        Output::Csv => {
            let w = sink(&a.common.out).map_err(io)?;
            r.write_csv(w).map_err(io)
        }
        Output::Json => emit_json(&a.common.out, &r),
    }
}

pub fn invert(a: InvertArgs) -> Res {
    let (_, p) = load(&a.common.config)?;
    let b = bundle(&p)?;
    if a.points == 0 || !(a.min > 0.0 && a.max > a.min) {
        return Err(Failure::InvalidConfig(anyhow!("grid needs 0 < min < max and points > 0")));
    }
    let n = a.points;
    let grid: Vec<f64> = (0..n)
        .map(|k| {
            let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
            if a.log {
                a.min * (a.max / a.min).powf(t)
            } else {
                a.min + (a.max - a.min) * t
            }
        })
        .collect();
    let side = match a.side {
        SideArg::Nu1 => Side::Nu1,
        SideArg::Nu2 => Side::Nu2,
    };
    let t = oracle::invert_transform(&b, side, &grid).map_err(refuse)?;
    match a.common.output.unwrap_or(Output::Csv) {
        Output::Csv => {
            let w = sink(&a.common.out).map_err(io)?;
            t.write_csv(w).map_err(io)
        }
        Output::Json => emit_json(&a.common.out, &t),
    }
}

pub fn check(a: CheckArgs) -> Res {
    let p = match &a.config {
        Some(path) => load(path)?.1,
        None => random_model(a.seed),
    };
    let outcomes = rbmq_core::checks::run_suite(&p, a.seed).map_err(refuse)?;
    let failed = outcomes.iter().any(|o| !o.passed);
    match a.output {
        Some(Output::Json) => emit_json(&a.out, &json!({ "sigma": p.sigma(), "mu": p.mu(), "checks": outcomes }))?,
        Some(Output::Csv) => {
            let mut w = csv::Writer::from_writer(sink(&a.out).map_err(io)?);
            w.write_record(["name", "passed", "max_error", "tolerance", "samples", "note"]).map_err(io)?;
            for o in &outcomes {
                w.write_record([
                    o.name.to_string(),
                    o.passed.to_string(),
                    o.max_error.to_string(),
                    o.tolerance.to_string(),
                    o.samples.to_string(),
                    o.note.clone().unwrap_or_default(),
                ])
                .map_err(io)?;
            }
            w.flush().map_err(io)?;
        }
        None => {
            let mut w = sink(&a.out).map_err(io)?;
            for o in &outcomes {
                let status = if o.passed { "PASS" } else { "FAIL" };
                let note = o.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
                writeln!(
                    w,
                    "{status} {:<24} max_error={:.3e} tolerance={:.1e} samples={}{note}",
                    o.name, o.max_error, o.tolerance, o.samples
                )
                .map_err(io)?;
            }
            w.flush().map_err(io)?;
        }
    }
    if failed {
        Err(Failure::CheckFailed)
    } else {
        Ok(())
    }
}

/// An ergodic model with identity reflection drawn from `seed`.
fn random_model(seed: u64) -> ModelParams {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s11: f64 = rng.gen_range(0.3..3.0);
    let s22: f64 = rng.gen_range(0.3..3.0);
    let rho: f64 = rng.gen_range(-0.9..0.9);
    let s12 = rho * (s11 * s22).sqrt();
    let mu = [rng.gen_range(-2.5..-0.1), rng.gen_range(-2.5..-0.1)];
    ModelParams::orthogonal([[s11, s12], [s12, s22]], mu).expect("sampled parameters are ergodic")
}
