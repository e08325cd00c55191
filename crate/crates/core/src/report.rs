//! Command dispatch and report emission. Reports are deterministic: the
//! JSON form is canonical (sorted keys, rationals as `p/q` strings,
//! polynomials in the shared grammar) and byte-identical across runs of
//! the same scene, seed, and version.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::blowup::{build_chart, BlowupChart};
use crate::dominate::{lift_dominability, smooth_locus_dominability, Certificate};
use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::parse::{canonical, VarTable};
use crate::rat::{rat_str, Rat};
use crate::sample::SeedCtx;
use crate::scene::Scene;
use crate::spray1::{kernel_spanning_family, KernelFamily};
use crate::spray2::{
    hypersurface_retract, section_identity, type2_context, type2_spray, Type2Context,
    Type2Spray,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Chart,
    Spray1,
    Spray2,
    Embed,
    Certify,
    DominateLift,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        match s {
            "chart" => Some(Command::Chart),
            "spray1" => Some(Command::Spray1),
            "spray2" => Some(Command::Spray2),
            "embed" => Some(Command::Embed),
            "certify" => Some(Command::Certify),
            "dominate-lift" => Some(Command::DominateLift),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Chart => "chart",
            Command::Spray1 => "spray1",
            Command::Spray2 => "spray2",
            Command::Embed => "embed",
            Command::Certify => "certify",
            Command::DominateLift => "dominate-lift",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: Command,
    pub scene: Scene,
    pub stages: Vec<String>,
    pub result: Value,
    pub certificate: Option<Certificate>,
    pub verdict: String,
    pub failed_stage: Option<String>,
    /// Wall-clock time; printed in the text format only, never in the
    /// canonical JSON, which must be byte-identical across runs.
    pub elapsed: std::time::Duration,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.verdict.as_str() {
            "success" | "dominating" => 0,
            _ => 2,
        }
    }
}

fn obj(entries: Vec<(&str, Value)>) -> Value {
    let map: BTreeMap<String, Value> = entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    Value::Object(map.into_iter().collect())
}

fn rats(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(|r| json!(rat_str(r))).collect())
}

fn polys(ps: &[MPoly], table: &VarTable) -> Value {
    Value::Array(ps.iter().map(|p| json!(canonical(p, table))).collect())
}

fn zvars(m: usize) -> VarTable {
    VarTable::custom((1..=m).map(|i| format!("z{i}")).collect())
}

pub fn certificate_value(cert: &Certificate) -> Value {
    let mut entries = vec![
        ("base", rats(&cert.base)),
        ("rank", json!(cert.rank)),
        ("target_dim", json!(cert.target_dim)),
        ("verdict", json!(cert.verdict())),
        (
            "vectors",
            Value::Array(
                cert.vectors
                    .iter()
                    .map(|v| {
                        obj(vec![
                            ("provenance", json!(v.provenance)),
                            ("seed", json!(v.seed)),
                            ("vector", rats(&v.vector)),
                        ])
                    })
                    .collect(),
            ),
        ),
        (
            "checks",
            Value::Array(
                cert.checks
                    .iter()
                    .map(|c| {
                        let mut e = vec![
                            ("name", json!(c.name)),
                            ("status", json!(c.status.as_str())),
                        ];
                        if let Some(d) = &c.detail {
                            e.push(("detail", json!(d)));
                        }
                        obj(e)
                    })
                    .collect(),
            ),
        ),
        (
            "seeds",
            Value::Array(cert.seeds.iter().map(|s| json!(s)).collect()),
        ),
    ];
    if let Some(d) = &cert.direction {
        entries.push(("direction", rats(d)));
    }
    if let Some(j) = cert.chart_index {
        entries.push(("chart_index", json!(j)));
    }
    if let Some(s) = &cert.failed_stage {
        entries.push(("failed_stage", json!(s)));
    }
    obj(entries)
}

fn chart_value(chart: &BlowupChart) -> Value {
    let table = chart.table();
    let names: Vec<Value> = (0..chart.nvars())
        .map(|i| json!(table.name(i)))
        .collect();
    obj(vec![
        ("ambient", json!(chart.ambient())),
        ("chart_index", json!(chart.dist)),
        ("variables", Value::Array(names)),
        ("relations", polys(chart.relations(), &table)),
        (
            "exceptional",
            json!(canonical(chart.exceptional_fn(), &table)),
        ),
        ("fiber_dimension", json!(chart.fiber_dim())),
        ("trivial", json!(chart.center.r() == 1)),
    ])
}

fn spray1_value(fam: &KernelFamily, chart: &BlowupChart) -> Value {
    let stable = chart.spray_table();
    let flow_table = VarTable::spray(chart.ambient(), 0);
    let sprays: Vec<Value> = fam
        .sprays
        .iter()
        .zip(&fam.derivatives)
        .map(|(s, d)| {
            obj(vec![
                ("flow", polys(s.flow.map(), &flow_table)),
                ("zeta", rats(&s.flow.zeta)),
                ("map", polys(&s.fx, &stable)),
                ("lambda", polys(&s.lambda, &stable)),
                ("xi", rats(&s.xi)),
                (
                    "derivative",
                    obj(vec![
                        ("scale", json!(rat_str(&d.c))),
                        ("homogeneous", rats(&d.homogeneous)),
                        ("affine", rats(&d.affine)),
                        ("chart_vector", rats(&d.chart_vector)),
                    ]),
                ),
            ])
        })
        .collect();
    obj(vec![
        ("sprays", Value::Array(sprays)),
        ("rank", json!(fam.rank)),
        ("fiber_dimension", json!(chart.fiber_dim())),
        ("attempts", json!(fam.attempts)),
        (
            "trace",
            Value::Array(fam.trace.iter().map(|t| json!(t)).collect()),
        ),
    ])
}

fn embedding_value(ctx: &Type2Context) -> Value {
    let m = ctx.embed.m;
    let zt = zvars(m);
    let chart_table = ctx.chart.table();
    let front = VarTable::custom((1..m).map(|i| format!("z{i}")).collect());
    obj(vec![
        ("m", json!(m)),
        ("shear", rats(&ctx.embed.shear)),
        ("translation", rats(&ctx.embed.translation)),
        ("t_monic", json!(canonical(&ctx.embed.t_monic, &chart_table))),
        ("h", json!(canonical(&ctx.embed.h, &front))),
        ("f_map", polys(&ctx.embed.f_map, &zt)),
        ("sigma", polys(&ctx.embed.sigma, &zt)),
        ("image_gen", json!(canonical(&ctx.embed.image_gen, &zt))),
        ("base_embedded", rats(&ctx.embed.b_emb)),
        ("base_image", rats(&ctx.embed.b_gamma)),
        ("hypersurface_piece", polys(ctx.k_v.gens(), &zt)),
        ("chart_piece", polys(ctx.k_y.gens(), &zt)),
    ])
}

fn spray2_value(ctx: &Type2Context, spray: &Type2Spray, section_ok: bool) -> Value {
    let m = ctx.embed.m;
    let zt = zvars(m);
    let mut entries = vec![
        ("phi", polys(&ctx.phi, &zt)),
        ("p", json!(canonical(&ctx.witness.p, &zt))),
        ("q", polys(&ctx.witness.q, &zt)),
        ("q_at_base", rats(&ctx.witness.q_at)),
        ("zeta", rats(&spray.zeta)),
        (
            "derivative",
            obj(vec![
                ("ambient", rats(&spray.ambient_derivative)),
                ("fiber_homogeneous", rats(&spray.fiber_homogeneous)),
                ("fiber_affine", rats(&spray.fiber_affine)),
                ("chart_vector", rats(&spray.chart_vector)),
            ]),
        ),
        ("section_identity", json!(section_ok)),
        ("fiberward_degenerate", json!(spray.fiberward_degenerate)),
        ("line_samples", rats(&spray.line_samples)),
        ("partial", json!(spray.partial)),
    ];
    if let Some(arc) = &spray.arc {
        entries.push(("arc", rats(arc)));
    }
    obj(entries)
}

fn recoverable(e: &Error) -> bool {
    e.exit_code() == 2
}

struct Type2Stage {
    ctx: Type2Context,
    spray: Type2Spray,
    section_ok: bool,
}

fn run_type2(scene: &Scene, chart: &BlowupChart, stages: &mut Vec<String>) -> Result<Type2Stage> {
    let center = &chart.center;
    let b = scene.epoint();
    let seed = SeedCtx::new(scene.seed);
    let retract = hypersurface_retract(
        center,
        &b.base,
        chart.dist,
        &seed.child("retract"),
        scene.retries,
        &scene.budget,
    )?;
    stages.push(if retract.linear {
        "retract: linear".to_string()
    } else {
        "retract: graph inverse".to_string()
    });
    let ctx = type2_context(
        chart,
        &b,
        &retract,
        &seed.child("type2"),
        scene.retries,
        &scene.budget,
    )?;
    stages.push("embedding and gluing done".to_string());
    let section_ok = section_identity(&ctx, &scene.budget).is_ok();
    let spray = type2_spray(
        &ctx,
        &seed.child("type2").attempt("spray", 0),
        scene.retries,
        &scene.budget,
    )?;
    stages.push("spray direction chosen".to_string());
    Ok(Type2Stage {
        ctx,
        spray,
        section_ok,
    })
}

pub fn execute(scene: &Scene, command: Command) -> Result<Report> {
    let t0 = std::time::Instant::now();
    let mut report = run_command(scene, command)?;
    report.elapsed = t0.elapsed();
    Ok(report)
}

fn run_command(scene: &Scene, command: Command) -> Result<Report> {
    let mut stages: Vec<String> = Vec::new();
    let center = scene.center()?;
    let zero = std::time::Duration::ZERO;
    let partial =
        |stages: Vec<String>, stage: &str, e: &Error, result: Value| -> Report {
            Report {
                command,
                scene: scene.clone(),
                stages,
                result,
                certificate: None,
                verdict: "partial".to_string(),
                failed_stage: Some(format!("{stage}: {e}")),
                elapsed: zero,
            }
        };
    match command {
        Command::Chart => {
            let dist = scene.chart_index.unwrap_or_else(|| center.r());
            let chart = build_chart(&center, dist)?;
            stages.push(format!("built chart {dist}"));
            if center.r() == 1 {
                stages.push("single generator: the blow-up is trivial".to_string());
            }
            Ok(Report {
                command,
                scene: scene.clone(),
                stages,
                result: obj(vec![("chart", chart_value(&chart))]),
                certificate: None,
                verdict: "success".to_string(),
                failed_stage: None,
                elapsed: zero,
            })
        }
        Command::Spray1 => {
            let dist = scene.chart_index.unwrap_or_else(|| center.r());
            let chart = build_chart(&center, dist)?;
            stages.push(format!("built chart {dist}"));
            let b = scene.epoint();
            let seed = SeedCtx::new(scene.seed);
            match kernel_spanning_family(
                &chart,
                &b,
                &seed.child("type1"),
                scene.retries,
                &scene.budget,
            ) {
                Ok(fam) => {
                    stages.push(format!(
                        "kernel family: {} sprays, rank {}",
                        fam.sprays.len(),
                        fam.rank
                    ));
                    let ok = fam.rank == chart.fiber_dim();
                    Ok(Report {
                        command,
                        scene: scene.clone(),
                        stages,
                        result: obj(vec![
                            ("chart", chart_value(&chart)),
                            ("family", spray1_value(&fam, &chart)),
                        ]),
                        certificate: None,
                        verdict: if ok { "success" } else { "partial" }.to_string(),
                        failed_stage: if ok {
                            None
                        } else {
                            Some("kernel flow family".to_string())
                        },
                        elapsed: zero,
                    })
                }
                Err(e) if recoverable(&e) => Ok(partial(
                    stages,
                    "kernel flow family",
                    &e,
                    obj(vec![("chart", chart_value(&chart))]),
                )),
                Err(e) => Err(e),
            }
        }
        Command::Spray2 | Command::Embed => {
            let dist = scene.chart_index.unwrap_or_else(|| center.r());
            let chart = build_chart(&center, dist)?;
            stages.push(format!("built chart {dist}"));
            match run_type2(scene, &chart, &mut stages) {
                Ok(t2) => {
                    let result = if command == Command::Embed {
                        obj(vec![
                            ("chart", chart_value(&chart)),
                            ("embedding", embedding_value(&t2.ctx)),
                        ])
                    } else {
                        obj(vec![
                            ("chart", chart_value(&chart)),
                            ("embedding", embedding_value(&t2.ctx)),
                            ("spray", spray2_value(&t2.ctx, &t2.spray, t2.section_ok)),
                        ])
                    };
                    let ok = t2.section_ok && !t2.spray.partial;
                    Ok(Report {
                        command,
                        scene: scene.clone(),
                        stages,
                        result,
                        certificate: None,
                        verdict: if ok { "success" } else { "partial" }.to_string(),
                        failed_stage: if ok {
                            None
                        } else {
                            Some("image spray family".to_string())
                        },
                        elapsed: zero,
                    })
                }
                Err(e) if recoverable(&e) => Ok(partial(
                    stages,
                    "image spray family",
                    &e,
                    obj(vec![("chart", chart_value(&chart))]),
                )),
                Err(e) => Err(e),
            }
        }
        Command::Certify => {
            let b = scene.epoint();
            let seed = SeedCtx::new(scene.seed);
            match smooth_locus_dominability(
                &scene.generators,
                &b,
                scene.chart_index,
                &seed,
                scene.retries,
                &scene.budget,
            ) {
                Ok((chart, cert)) => {
                    stages.push(format!("built chart {}", chart.dist));
                    stages.push(format!("rank {} of {}", cert.rank, cert.target_dim));
                    let verdict = cert.verdict().to_string();
                    let failed = cert.failed_stage.clone();
                    Ok(Report {
                        command,
                        scene: scene.clone(),
                        stages,
                        result: obj(vec![
                            ("chart", chart_value(&chart)),
                            ("certificate", certificate_value(&cert)),
                        ]),
                        certificate: Some(cert),
                        verdict,
                        failed_stage: failed,
                        elapsed: zero,
                    })
                }
                Err(e) if recoverable(&e) => {
                    Ok(partial(stages, "domination certificate", &e, obj(vec![])))
                }
                Err(e) => Err(e),
            }
        }
        Command::DominateLift => {
            let map = scene.map.as_ref().ok_or_else(|| Error::Scene {
                pointer: "/map".to_string(),
                msg: "dominate-lift requires the map".to_string(),
            })?;
            let y = scene.epoint();
            let seed = SeedCtx::new(scene.seed);
            match lift_dominability(map, &center, &y, &seed, scene.retries, &scene.budget) {
                Ok(cert) => {
                    stages.push(format!("rank {} of {}", cert.rank, cert.target_dim));
                    let verdict = cert.verdict().to_string();
                    let failed = cert.failed_stage.clone();
                    Ok(Report {
                        command,
                        scene: scene.clone(),
                        stages,
                        result: obj(vec![("certificate", certificate_value(&cert))]),
                        certificate: Some(cert),
                        verdict,
                        failed_stage: failed,
                        elapsed: zero,
                    })
                }
                Err(e) if recoverable(&e) => {
                    Ok(partial(stages, "lift certificate", &e, obj(vec![])))
                }
                Err(e) => Err(e),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Text,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "json" => Some(OutputFormat::Json),
            "text" => Some(OutputFormat::Text),
            _ => None,
        }
    }
}

pub fn report_value(report: &Report) -> Value {
    let mut entries = vec![
        ("command", json!(report.command.as_str())),
        ("version", json!(env!("CARGO_PKG_VERSION"))),
        ("scene", report.scene.echo()),
        (
            "stages",
            Value::Array(report.stages.iter().map(|s| json!(s)).collect()),
        ),
        ("result", report.result.clone()),
        ("verdict", json!(report.verdict)),
    ];
    if let Some(s) = &report.failed_stage {
        entries.push(("failed_stage", json!(s)));
    }
    obj(entries)
}

pub fn emit_report(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report_value(report))
                .expect("report serialization cannot fail");
            s.push('\n');
            s
        }
        OutputFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!("command: {}\n", report.command.as_str()));
            out.push_str(&format!("verdict: {}\n", report.verdict));
            out.push_str(&format!("elapsed: {:?}\n", report.elapsed));
            if let Some(s) = &report.failed_stage {
                out.push_str(&format!("failed stage: {s}\n"));
            }
            for s in &report.stages {
                out.push_str(&format!("stage: {s}\n"));
            }
            if let Some(cert) = &report.certificate {
                out.push_str(&format!(
                    "rank: {} of {}\n",
                    cert.rank, cert.target_dim
                ));
                for c in &cert.checks {
                    out.push_str(&format!(
                        "check [{}] {}{}\n",
                        c.status.as_str(),
                        c.name,
                        c.detail
                            .as_ref()
                            .map(|d| format!(" ({d})"))
                            .unwrap_or_default()
                    ));
                }
                for v in &cert.vectors {
                    let body: Vec<String> = v.vector.iter().map(rat_str).collect();
                    out.push_str(&format!(
                        "vector {} = ({})\n",
                        v.provenance,
                        body.join(", ")
                    ));
                }
            } else {
                let pretty = serde_json::to_string_pretty(&report.result)
                    .expect("result serialization cannot fail");
                out.push_str(&pretty);
                out.push('\n');
            }
            out
        }
    }
}
