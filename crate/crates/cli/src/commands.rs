//! Subcommand arguments and their mapping onto library operations.

use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Value};

use rpw_core::critical::{find_critical_points, CriticalKind, DEFAULT_GRID_STEP, DEFAULT_NEWTON_TOL};
use rpw_core::field::sample_field;
use rpw_core::kacrice::expansions::default_grid;
use rpw_core::kacrice::moment::second_factorial_leading;
use rpw_core::kacrice::{
    expected_counts, k1_density, k2, k2_all_types, k2_typed, second_factorial_moment, verify_series,
    K2Estimate, SeriesQuantity, TypePair,
};
use rpw_core::point_process::moments::FIELD_PADDING;
use rpw_core::point_process::{compare_processes_with, mc_moments, scatter_sample, CompareConfig};
use rpw_core::special_math::rng::derive_seed;

use crate::output::{fmt_f64, Artifact, Format};
use crate::{Command, RunError};

const CURVE_TAG: u64 = 0x4355_5256;

pub struct Context {
    pub command: &'static str,
    pub seed: u64,
    pub format: Format,
    pub out: PathBuf,
}

impl Context {
    fn artifact(&self) -> Artifact {
        Artifact::new(self.command, Some(self.seed))
    }

    fn finish(&self, artifact: Artifact, mut summary: Value) -> Result<String, RunError> {
        artifact.write(&self.out, self.format)?;
        summary["command"] = json!(self.command);
        summary["output"] = json!(self.out.display().to_string());
        Ok(summary.to_string())
    }
}

fn validation(msg: impl Into<String>) -> RunError {
    RunError::Validation(msg.into())
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SampleFieldArgs {
    /// Radius of the disc on which the truncation is certified.
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FindCriticalArgs {
    /// Radius of the disc searched.
    #[arg(long, default_value_t = 5.0)]
    pub rho: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long, default_value_t = DEFAULT_NEWTON_TOL)]
    pub newton_tol: f64,
}

#[derive(Debug, Args)]
pub struct K1Args {}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct K2Args {
    /// Separation of the two points.
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct K2TypedArgs {
    #[arg(long)]
    pub r: f64,
    /// all, min_min, max_max, min_max, saddle_saddle, extremum_saddle or
    /// extremum_extremum; every pair when omitted.
    #[arg(long)]
    pub pair: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct K2CurveArgs {
    #[arg(long, default_value_t = 0.01)]
    pub r_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value = "all")]
    pub pair: String,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct Moment2Args {
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = rpw_core::kacrice::moment::DEFAULT_NODES)]
    pub nodes: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples_per_node: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct McMomentsArgs {
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CompareArgs {
    /// Comma-separated disc radii in (0, 1].
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.5")]
    pub rho_grid: Vec<f64>,
    /// Simulated fields per radius.
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub poisson_windows: usize,
    #[arg(long, default_value_t = 12)]
    pub ginibre_matrices: usize,
    #[arg(long, default_value_t = 256)]
    pub ginibre_n: usize,
    /// Also write a labelled scatter of the three processes to this CSV.
    #[arg(long)]
    pub scatter: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub scatter_radius: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct VerifySeriesArgs {
    /// a, lambda, sqrt_lambda, q, det_a or b_c_coeffs; every quantity when omitted.
    #[arg(long)]
    pub quantity: Option<String>,
    /// Comma-separated separations in (0, 0.3].
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
}

pub fn dispatch(command: &Command, ctx: &Context) -> Result<String, RunError> {
    match command {
        Command::SampleField(a) => sample_field_cmd(a, ctx),
        Command::FindCritical(a) => find_critical_cmd(a, ctx),
        Command::K1(_) => k1_cmd(ctx),
        Command::K2(a) => k2_cmd(a, ctx),
        Command::K2Typed(a) => k2_typed_cmd(a, ctx),
        Command::K2Curve(a) => k2_curve_cmd(a, ctx),
        Command::Moment2(a) => moment2_cmd(a, ctx),
        Command::McMoments(a) => mc_moments_cmd(a, ctx),
        Command::CompareProcesses(a) => compare_cmd(a, ctx),
        Command::VerifySeries(a) => verify_series_cmd(a, ctx),
    }
}

fn sample_field_cmd(a: &SampleFieldArgs, ctx: &Context) -> Result<String, RunError> {
    let f = sample_field(ctx.seed, a.radius)?;
    let order = f.truncation_order as i64;
    let mut art = ctx
        .artifact()
        .param("radius", fmt_f64(a.radius))
        .param("truncation_order", order)
        .columns(&["n", "re", "im"]);
    let mut coeffs = Vec::new();
    for n in -order..=order {
        let c = f.a(n);
        art.row(vec![n.to_string(), fmt_f64(c.re), fmt_f64(c.im)]);
        coeffs.push(json!({ "n": n, "re": c.re, "im": c.im }));
    }
    let art = art.data(json!({ "field": f.record(), "coefficients": coeffs }));
    ctx.finish(
        art,
        json!({ "seed": ctx.seed, "truncation_order": order, "coefficients": 2 * order + 1 }),
    )
}

fn find_critical_cmd(a: &FindCriticalArgs, ctx: &Context) -> Result<String, RunError> {
    if !(a.rho > 0.0 && a.rho.is_finite()) {
        return Err(validation(format!("--rho must be finite and > 0, got {}", a.rho)));
    }
    let f = sample_field(ctx.seed, a.rho + FIELD_PADDING)?;
    let rep = find_critical_points(&f, a.rho, a.grid_step, a.newton_tol)?;
    let mut art = ctx
        .artifact()
        .param("rho", fmt_f64(a.rho))
        .param("grid_step", fmt_f64(a.grid_step))
        .param("newton_tol", fmt_f64(a.newton_tol))
        .param("field_radius", fmt_f64(f.domain_radius))
        .columns(&["x", "y", "value", "kind", "det_hessian", "trace_hessian"]);
    let mut rows = Vec::new();
    for p in &rep.points {
        let r = p.row();
        art.row(vec![
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.value),
            r.kind.to_string(),
            fmt_f64(r.det_hessian),
            fmt_f64(r.trace_hessian),
        ]);
        rows.push(r);
    }
    let counts = json!({
        "total": rep.points.len(),
        "min": rep.count(CriticalKind::Min),
        "max": rep.count(CriticalKind::Max),
        "saddle": rep.count(CriticalKind::Saddle),
        "unresolved_cells": rep.unresolved_cells,
        "degenerate": rep.degenerate,
    });
    let art = art.data(json!({ "field": f.record(), "counts": counts, "points": rows }));
    ctx.finish(art, counts)
}

fn k1_cmd(ctx: &Context) -> Result<String, RunError> {
    let k1 = k1_density();
    let e = expected_counts(1.0)?;
    let mut art = Artifact::new(ctx.command, None).columns(&["quantity", "value"]);
    let rows = [
        ("k1", k1),
        ("expected_count_rho1", e.total),
        ("expected_min_rho1", e.min),
        ("expected_max_rho1", e.max),
        ("expected_saddle_rho1", e.saddle),
        ("expected_extrema_rho1", e.extrema),
    ];
    for (k, v) in rows {
        art.row(vec![k.into(), fmt_f64(v)]);
    }
    let data: serde_json::Map<String, Value> = rows.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let art = art.data(Value::Object(data));
    ctx.finish(art, json!({ "k1": k1 }))
}

const K2_COLUMNS: [&str; 5] = ["r", "k2", "se", "samples", "type_pair"];

fn k2_row(e: &K2Estimate) -> Vec<String> {
    vec![
        fmt_f64(e.r),
        fmt_f64(e.value),
        fmt_f64(e.std_error),
        e.samples.to_string(),
        e.type_pair.to_string(),
    ]
}

fn k2_table(estimates: &[K2Estimate], art: Artifact) -> Artifact {
    let mut art = art.columns(&K2_COLUMNS);
    for e in estimates {
        art.row(k2_row(e));
    }
    art.data(json!(estimates))
}

fn k2_summary(e: &K2Estimate) -> Value {
    json!({ "r": e.r, "type_pair": e.type_pair, "value": e.value, "se": e.std_error, "samples": e.samples })
}

fn k2_cmd(a: &K2Args, ctx: &Context) -> Result<String, RunError> {
    let e = k2(a.r, a.samples, ctx.seed)?;
    let art = ctx.artifact().param("r", fmt_f64(a.r)).param("samples", a.samples);
    let art = k2_table(&[e], art);
    ctx.finish(art, k2_summary(&e))
}

fn parse_pair(s: &str) -> Result<TypePair, RunError> {
    s.parse::<TypePair>().map_err(RunError::from)
}

fn k2_typed_cmd(a: &K2TypedArgs, ctx: &Context) -> Result<String, RunError> {
    let art = ctx.artifact().param("r", fmt_f64(a.r)).param("samples", a.samples);
    match &a.pair {
        Some(p) => {
            let pair = parse_pair(p)?;
            let e = k2_typed(a.r, pair, a.samples, ctx.seed)?;
            let art = k2_table(&[e], art.param("pair", pair));
            ctx.finish(art, k2_summary(&e))
        }
        None => {
            let all = k2_all_types(a.r, a.samples, ctx.seed)?;
            let values: serde_json::Map<String, Value> = all
                .iter()
                .map(|e| (e.type_pair.to_string(), json!({ "value": e.value, "se": e.std_error })))
                .collect();
            let art = k2_table(&all, art.param("pair", "every"));
            ctx.finish(art, json!({ "r": a.r, "samples": a.samples, "pairs": values }))
        }
    }
}

fn k2_curve_cmd(a: &K2CurveArgs, ctx: &Context) -> Result<String, RunError> {
    if !(a.r_min > 0.0 && a.r_max >= a.r_min && a.r_max.is_finite()) {
        return Err(validation("need 0 < --r-min <= --r-max"));
    }
    if a.points < 2 {
        return Err(validation("--points must be >= 2"));
    }
    let pair = parse_pair(&a.pair)?;
    let (lo, hi) = (a.r_min.ln(), a.r_max.ln());
    let mut out = Vec::with_capacity(a.points);
    for i in 0..a.points {
        let r = (lo + (hi - lo) * i as f64 / (a.points - 1) as f64).exp();
        out.push(k2_typed(r, pair, a.samples, derive_seed(ctx.seed, CURVE_TAG, i as u64))?);
    }
    let art = ctx
        .artifact()
        .param("r_min", fmt_f64(a.r_min))
        .param("r_max", fmt_f64(a.r_max))
        .param("points", a.points)
        .param("samples", a.samples)
        .param("pair", pair);
    let art = k2_table(&out, art);
    ctx.finish(art, json!({ "points": out.len(), "type_pair": pair }))
}

fn moment2_cmd(a: &Moment2Args, ctx: &Context) -> Result<String, RunError> {
    let m = second_factorial_moment(a.rho, a.nodes, a.samples_per_node, ctx.seed)?;
    let leading = second_factorial_leading(a.rho);
    let mut art = ctx
        .artifact()
        .param("rho", fmt_f64(a.rho))
        .param("nodes", a.nodes)
        .param("samples_per_node", a.samples_per_node)
        .param("value", fmt_f64(m.value))
        .param("se", fmt_f64(m.std_error))
        .param("leading_order", fmt_f64(leading))
        .columns(&["r", "weight", "k2", "se"]);
    for n in &m.nodes {
        art.row(vec![fmt_f64(n.r), fmt_f64(n.weight), fmt_f64(n.k2), fmt_f64(n.k2_std_error)]);
    }
    let art = art.data(json!({ "estimate": m, "leading_order": leading }));
    ctx.finish(
        art,
        json!({
            "rho": a.rho,
            "value": m.value,
            "se": m.std_error,
            "leading_order": leading,
            "quadrature_check": m.quadrature_check,
        }),
    )
}

fn mc_moments_cmd(a: &McMomentsArgs, ctx: &Context) -> Result<String, RunError> {
    let m = mc_moments(a.rho, a.trials, ctx.seed)?;
    let mut art = ctx
        .artifact()
        .param("rho", fmt_f64(a.rho))
        .param("trials", a.trials)
        .columns(&["quantity", "value", "se"]);
    let t = &m.typed_means;
    let p = &m.prob_table;
    let rows = [
        ("mean_count", m.mean_count.value, m.mean_count.std_error),
        ("second_factorial", m.second_factorial.value, m.second_factorial.std_error),
        ("mean_min", t.min.value, t.min.std_error),
        ("mean_max", t.max.value, t.max.std_error),
        ("mean_saddle", t.saddle.value, t.saddle.std_error),
        ("mean_extrema", t.extrema.value, t.extrema.std_error),
        ("extremum_saddle", m.typed_pairs.extremum_saddle.value, m.typed_pairs.extremum_saddle.std_error),
        ("min_max", m.typed_pairs.min_max.value, m.typed_pairs.min_max.std_error),
        ("p0", p.p0.value, p.p0.std_error),
        ("p1", p.p1.value, p.p1.std_error),
        ("p_ge2", p.p_ge2.value, p.p_ge2.std_error),
        ("p_ge3", p.p_ge3.value, p.p_ge3.std_error),
    ];
    for (k, v, se) in rows {
        art.row(vec![k.into(), fmt_f64(v), fmt_f64(se)]);
    }
    for (k, count) in m.histogram.iter().enumerate() {
        art.row(vec![format!("trials_with_{k}"), count.to_string(), String::new()]);
    }
    let art = art.data(json!(m));
    ctx.finish(
        art,
        json!({
            "rho": a.rho,
            "trials": m.trials,
            "mean_count": m.mean_count.value,
            "mean_count_se": m.mean_count.std_error,
            "failures": m.failures.len(),
        }),
    )
}

fn compare_cmd(a: &CompareArgs, ctx: &Context) -> Result<String, RunError> {
    let config = CompareConfig {
        field_trials: a.trials,
        poisson_windows: a.poisson_windows,
        ginibre_matrices: a.ginibre_matrices,
        ginibre_n: a.ginibre_n,
    };
    let table = compare_processes_with(&a.rho_grid, &config, ctx.seed)?;
    let grid: Vec<String> = a.rho_grid.iter().map(|r| fmt_f64(*r)).collect();
    let mut art = ctx
        .artifact()
        .param("rho_grid", grid.join(";"))
        .param("trials", a.trials)
        .param("poisson_windows", a.poisson_windows)
        .param("ginibre_matrices", a.ginibre_matrices)
        .param("ginibre_n", a.ginibre_n)
        .param("ginibre_density", fmt_f64(table.ginibre_density))
        .columns(&["rho", "process", "p_ge2", "se", "wilson_low", "wilson_high", "windows", "exact"]);
    for r in &table.rows {
        art.row(vec![
            fmt_f64(r.rho),
            r.process.to_string(),
            fmt_f64(r.p_ge2.value),
            fmt_f64(r.p_ge2.std_error),
            fmt_f64(r.p_ge2.wilson_low),
            fmt_f64(r.p_ge2.wilson_high),
            r.p_ge2.trials.to_string(),
            r.exact.map(fmt_f64).unwrap_or_default(),
        ]);
    }
    let art = art.data(json!(table));
    if let Some(path) = &a.scatter {
        let points = scatter_sample(a.scatter_radius, ctx.seed)?;
        let mut sc = ctx
            .artifact()
            .param("scatter_radius", fmt_f64(a.scatter_radius))
            .columns(&["x", "y", "label"]);
        for p in &points {
            sc.row(vec![fmt_f64(p.x), fmt_f64(p.y), p.label.clone()]);
        }
        sc.data(json!(points)).write(path, Format::Csv)?;
    }
    ctx.finish(
        art,
        json!({ "rows": table.rows.len(), "ginibre_density": table.ginibre_density }),
    )
}

fn verify_series_cmd(a: &VerifySeriesArgs, ctx: &Context) -> Result<String, RunError> {
    let quantities = match &a.quantity {
        Some(q) => vec![q.parse::<SeriesQuantity>()?],
        None => SeriesQuantity::EVERY.to_vec(),
    };
    let grid = a.r_grid.clone().unwrap_or_else(|| default_grid(8));
    let mut reports = Vec::new();
    for q in quantities {
        reports.push(verify_series(q, &grid)?);
    }
    let text: Vec<String> = grid.iter().map(|r| fmt_f64(*r)).collect();
    let mut art = Artifact::new(ctx.command, None)
        .param("r_grid", text.join(";"))
        .columns(&["quantity", "name", "expected", "fitted", "check", "pass"]);
    let mut all_pass = true;
    for rep in &reports {
        for row in &rep.rows {
            all_pass &= row.pass;
            art.row(vec![
                rep.quantity.to_string(),
                row.name.clone(),
                fmt_f64(row.expected),
                fmt_f64(row.fitted),
                serde_json::to_value(row.check)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                row.pass.to_string(),
            ]);
        }
    }
    let art = art.data(json!(reports));
    ctx.finish(art, json!({ "all_pass": all_pass, "quantities": reports.len() }))
}
