//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Every target below is a closed form or an independent
//! estimate; nothing is tuned to the seeds.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::Matrix6;
use rpw_core::field::sample_field;
use rpw_core::kacrice::conditional::{conditional_covariance, delta_from_a};
use rpw_core::kacrice::expansions::{default_grid, loglog_slope, SlopeCheck};
use rpw_core::kacrice::moment::second_factorial_leading;
use rpw_core::kacrice::onepoint::abs_det_hessian_mc;
use rpw_core::kacrice::blocks::det_a_closed;
use rpw_core::kacrice::{
    expected_counts, k2, k2_all_types, k2_limit, k2_limit_deviation, k2_spherical_crosscheck,
    second_factorial_moment, verify_series, EigenSource, SeriesQuantity, TypePair,
};
use rpw_core::point_process::moments::MomentEstimate;
use rpw_core::point_process::reference::poisson_window_counts;
use rpw_core::point_process::{
    compare_processes_with, mc_moments, poisson_pmf, CompareConfig, Probability, Process, Window,
    INTENSITY,
};
use rpw_core::special_math::jacobi::jacobi_eigen_sym;
use rpw_core::special_math::gaussian_radial_moment;

/// Outcome of one criterion: pass flag and a one-line account.
struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: String) -> Self {
        Check { pass, detail }
    }
}

/// Collects sub-checks of one criterion into a single verdict.
#[derive(Default)]
struct Verdict {
    pass: bool,
    parts: Vec<String>,
    started: bool,
}

impl Verdict {
    fn add(&mut self, ok: bool, text: String) {
        if !self.started {
            self.pass = true;
            self.started = true;
        }
        self.pass &= ok;
        let tag = if ok { "" } else { " [x]" };
        self.parts.push(format!("{text}{tag}"));
    }

    fn finish(self) -> Check {
        Check::new(self.started && self.pass, self.parts.join("; "))
    }
}

type Outcome = rpw_core::Result<Check>;

/// Difference of two estimates in units of their combined standard error.
fn z_score(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    (a - b).abs() / (sa * sa + sb * sb).sqrt()
}

fn one_point_constant() -> Outcome {
    let target = 1.0 / (2.0 * 3f64.sqrt());
    let e = abs_det_hessian_mc(1_000_000, 101)?;
    let rel = (e.value / target - 1.0).abs();
    Ok(Check::new(
        rel <= 0.01,
        format!(
            "E|det H| = {:.6} +- {:.1e}, target {target:.6}, rel dev {rel:.2e} (tol 1e-2)",
            e.value, e.std_error
        ),
    ))
}

fn mean_count_unit_disc() -> Outcome {
    let rho = 1.0;
    let m = mc_moments(rho, 4000, 202)?;
    let target = expected_counts(rho)?.total;
    let z = (m.mean_count.value - target).abs() / m.mean_count.std_error;
    Ok(Check::new(
        z <= 3.0,
        format!(
            "E N(1) = {:.5} +- {:.5} over {} fields, target {target:.7}, {z:.2} SE",
            m.mean_count.value, m.mean_count.std_error, m.trials
        ),
    ))
}

fn typed_ratio() -> Outcome {
    let rho = 2.0;
    let m = mc_moments(rho, 2000, 303)?;
    let e = expected_counts(rho)?;
    let t = &m.typed_means;
    let mut v = Verdict::default();
    for (name, est, target) in [
        ("min", t.min, e.min),
        ("max", t.max, e.max),
        ("saddle", t.saddle, e.saddle),
        ("min-max", t.min_minus_max, 0.0),
        ("saddle-extrema", t.saddle_minus_extrema, 0.0),
    ] {
        let z = (est.value - target).abs() / est.std_error;
        v.add(
            z <= 3.0,
            format!("{name} {:.4} vs {target:.4} ({z:.2} SE)", est.value),
        );
    }
    Ok(v.finish())
}

fn helmholtz() -> Outcome {
    let radius = 10.0;
    let mut worst: f64 = 0.0;
    let fields = 5;
    for k in 0..fields {
        let f = sample_field(404 + k, radius)?;
        // Golden-angle spiral: 100 points spread evenly over the disc.
        let golden = PI * (3.0 - 5f64.sqrt());
        for i in 0..100 {
            let r = radius * ((i as f64 + 0.5) / 100.0).sqrt();
            let t = golden * i as f64;
            let jet = f.eval_jet([r * t.cos(), r * t.sin()])?;
            worst = worst.max(jet.helmholtz_residual().abs());
        }
    }
    Ok(Check::new(
        worst <= 1e-8,
        format!("max |lap f + f| = {worst:.2e} over {fields} fields x 100 points (tol 1e-8)"),
    ))
}

fn det_a_expansion() -> Outcome {
    let rs = [0.05f64, 0.1, 0.2];
    let mut dev = Vec::new();
    for &r in &rs {
        let lead = 3.0 * r.powi(4) / 256.0;
        dev.push((det_a_closed(r)? / lead - 1.0).abs());
    }
    let slope = loglog_slope(&rs, &dev);
    Ok(Check::new(
        (slope - 2.0).abs() <= 0.3,
        format!(
            "relative deviation from 3r^4/256 = {:.2e}, {:.2e}, {:.2e}; slope {slope:.3} (2 +- 0.3)",
            dev[0], dev[1], dev[2]
        ),
    ))
}

fn closed_form_eigen() -> Outcome {
    let n = 50;
    let (lo, hi) = (1e-3f64.ln(), 10f64.ln());
    let mut value_err: f64 = 0.0;
    let mut vector_err: f64 = 0.0;
    let mut ortho_err: f64 = 0.0;
    let mut fallbacks = 0;
    for i in 0..n {
        let r = (lo + (hi - lo) * (i as f64 + 1.0) / n as f64).exp();
        let c = conditional_covariance(r)?;
        let delta = delta_from_a(&c.a);
        let jac = jacobi_eigen_sym(&delta, 1e-14)?;
        let mut closed = c.lambdas;
        closed.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in closed.iter().zip(jac.values.iter()) {
            value_err = value_err.max((a - b).abs());
        }
        for j in 0..6 {
            let q = c.q.column(j);
            vector_err = vector_err.max((delta * q - q * c.lambdas[j]).norm());
        }
        ortho_err = ortho_err.max((c.q.transpose() * c.q - Matrix6::identity()).abs().max());
        if c.source == EigenSource::JacobiFallback {
            fallbacks += 1;
        }
    }
    Ok(Check::new(
        value_err <= 1e-10 && vector_err <= 1e-10 && ortho_err <= 1e-12,
        format!(
            "{n} radii in (1e-3, 10]: max eigenvalue gap to Jacobi {value_err:.1e}, \
             max |delta q - lambda q| {vector_err:.1e}, max |Q^T Q - I| {ortho_err:.1e}, \
             {fallbacks} Jacobi fallbacks"
        ),
    ))
}

fn series_slopes() -> Outcome {
    let grid = default_grid(8);
    let mut v = Verdict::default();
    for q in [SeriesQuantity::A, SeriesQuantity::Lambda, SeriesQuantity::Q] {
        let rep = verify_series(q, &grid)?;
        let worst = rep
            .rows
            .iter()
            .filter(|row| row.check == SlopeCheck::Equal)
            .map(|row| (row.fitted - row.expected).abs())
            .fold(0.0, f64::max);
        let failed: Vec<&str> = rep.rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        v.add(
            rep.all_pass(),
            format!(
                "{q}: {} rows, max |slope - expected| {worst:.3} on exact-order rows{}",
                rep.rows.len(),
                if failed.is_empty() { String::new() } else { format!(", failed {failed:?}") }
            ),
        );
    }
    Ok(v.finish())
}

fn k2_small_r() -> Outcome {
    let limit = k2_limit();
    let mut v = Verdict::default();
    let e = k2(0.01, 1_000_000, 808)?;
    let tol = (0.05 * limit).max(3.0 * e.std_error);
    v.add(
        (e.value - limit).abs() <= tol,
        format!("K2(0.01) = {:.5e} +- {:.1e} vs {limit:.5e}", e.value, e.std_error),
    );
    let rs = [0.02f64, 0.05, 0.1];
    let mut dev = Vec::new();
    let mut resolved = true;
    for (i, &r) in rs.iter().enumerate() {
        let d = k2_limit_deviation(r, 1_000_000, 809 + i as u64)?;
        resolved &= d.value.abs() > 3.0 * d.std_error;
        dev.push(d);
    }
    let same_sign = dev.iter().all(|d| d.value.signum() == dev[0].value.signum());
    let mags: Vec<f64> = dev.iter().map(|d| d.value.abs()).collect();
    let slope = loglog_slope(&rs, &mags);
    v.add(
        resolved && same_sign && (slope - 2.0).abs() <= 0.4,
        format!(
            "K2 - K2(0+) = {:.2e}, {:.2e}, {:.2e} at r = 0.02, 0.05, 0.1; slope {slope:.3} (2 +- 0.4)",
            dev[0].value, dev[1].value, dev[2].value
        ),
    );
    Ok(v.finish())
}

fn k2_two_estimators() -> Outcome {
    let mut v = Verdict::default();
    for (i, r) in [0.5, 2.0].into_iter().enumerate() {
        let a = k2(r, 1_000_000, 901 + i as u64)?;
        let b = k2_spherical_crosscheck(r, 1_000_000, 911 + i as u64)?;
        let z = z_score(a.value, a.std_error, b.value, b.std_error);
        v.add(
            z <= 3.0,
            format!("r = {r}: {:.5e} vs {:.5e} ({z:.2} SE)", a.value, b.value),
        );
    }
    let m9 = gaussian_radial_moment(9);
    v.add((m9 - 384.0).abs() <= 1e-9, format!("radial moment E|xi|^9 = {m9}"));
    Ok(v.finish())
}

fn typed_k2() -> Outcome {
    let mut v = Verdict::default();
    let small = k2_all_types(0.01, 1_000_000, 1001)?;
    let get = |t: &[rpw_core::kacrice::K2Estimate], p: TypePair| {
        *t.iter().find(|e| e.type_pair == p).expect("all types present")
    };
    let all = get(&small, TypePair::All);
    let es = get(&small, TypePair::ExtremumSaddle);
    let ratio = es.value / all.value;
    // Delta-method error of the ratio, ignoring the positive correlation.
    let se = ratio * ((es.std_error / es.value).powi(2) + (all.std_error / all.value).powi(2)).sqrt();
    v.add(
        (ratio - 0.5).abs() <= 0.05 * 0.5 + 3.0 * se,
        format!("extremum_saddle/all at r = 0.01: {ratio:.4} +- {se:.1e}"),
    );
    let mid = k2_all_types(0.1, 1_000_000, 1002)?;
    let all = get(&mid, TypePair::All);
    let mm = get(&mid, TypePair::MinMax);
    v.add(
        mm.value <= 1e-3 * all.value,
        format!("min_max/all at r = 0.1: {:.2e}", mm.value / all.value),
    );
    let mut worst: f64 = 0.0;
    for t in [&small, &mid] {
        let s = get(t, TypePair::MinMin).value
            + get(t, TypePair::MaxMax).value
            + 2.0 * get(t, TypePair::MinMax).value
            + get(t, TypePair::SaddleSaddle).value
            + 2.0 * get(t, TypePair::ExtremumSaddle).value;
        let all = get(t, TypePair::All).value;
        worst = worst.max((s / all - 1.0).abs());
    }
    v.add(worst <= 1e-12, format!("partition identity rel err {worst:.1e}"));
    Ok(v.finish())
}

/// Field simulation at `rho = 0.3`, shared by two criteria.
fn moments_03() -> &'static rpw_core::Result<MomentEstimate> {
    static CELL: OnceLock<rpw_core::Result<MomentEstimate>> = OnceLock::new();
    CELL.get_or_init(|| mc_moments(0.3, 400_000, 1111))
}

fn owned<T: Clone>(r: &rpw_core::Result<T>) -> rpw_core::Result<T> {
    match r {
        Ok(v) => Ok(v.clone()),
        Err(e) => Err(rpw_core::Error::Precondition(e.to_string())),
    }
}

fn second_moment() -> Outcome {
    let mut v = Verdict::default();
    let rho = 0.2;
    let q = second_factorial_moment(rho, 64, 100_000, 1101)?;
    let lead = second_factorial_leading(rho);
    v.add(
        (q.value / lead - 1.0).abs() <= 0.1,
        format!(
            "E N(N-1) at rho = 0.2 by quadrature {:.4e} +- {:.1e} vs rho^4/(2^5 3 sqrt 3) = {lead:.4e}",
            q.value, q.std_error
        ),
    );
    let q3 = second_factorial_moment(0.3, 64, 100_000, 1102)?;
    let m = owned(moments_03())?;
    let f2 = m.second_factorial;
    let z = z_score(f2.value, f2.std_error, q3.value, q3.std_error);
    v.add(
        z <= 3.0,
        format!(
            "rho = 0.3: simulated {:.2e} +- {:.1e} over {} fields vs quadrature {:.3e} ({z:.2} SE)",
            f2.value, f2.std_error, m.trials, q3.value
        ),
    );
    Ok(v.finish())
}

fn small_disc_probabilities() -> Outcome {
    let mut v = Verdict::default();
    let rho = 0.3;
    let m = owned(moments_03())?;
    let p1 = m.prob_table.p1;
    let mean = expected_counts(rho)?.total;
    // 0 <= E N - P(N = 1) <= E N(N - 1); twice the leading term covers
    // the higher orders at this radius.
    let allowance = 2.0 * second_factorial_leading(rho);
    let dev = (p1.value - mean).abs();
    v.add(
        dev <= 3.0 * p1.std_error + allowance,
        format!(
            "P(N=1) at rho = 0.3: {:.5} +- {:.1e} vs rho^2/(2 sqrt 3) = {mean:.5} (allowance {allowance:.1e})",
            p1.value, p1.std_error
        ),
    );
    let m4 = mc_moments(0.4, 100_000, 1202)?;
    let t = &m4.prob_table;
    v.add(
        t.p_ge3.value <= t.p_ge2.value
            && t.p_ge2.value <= t.p1.value / 10.0
            && t.p_ge3.value <= t.p1.value / 10.0,
        format!(
            "rho = 0.4: P(1) = {:.4}, P(>=2) = {:.1e}, P(>=3) = {:.1e}",
            t.p1.value, t.p_ge2.value, t.p_ge3.value
        ),
    );
    Ok(v.finish())
}

fn reference_processes() -> Outcome {
    let mut v = Verdict::default();
    let rho = 0.5;
    let window = Window::Disc { radius: rho };
    let windows = 1_000_000;
    let counts = poisson_window_counts(window, INTENSITY, windows, 1301)?;
    let hits = counts.iter().filter(|&&c| c == 2).count() as u64;
    let p2 = Probability::from_counts(hits, windows as u64);
    let exact = poisson_pmf(INTENSITY * window.area(), 2);
    let se = (exact * (1.0 - exact) / windows as f64).sqrt();
    v.add(
        (p2.value - exact).abs() <= 3.0 * se,
        format!("Poisson P(N=2) at rho = 0.5: {:.4e} vs {exact:.4e}", p2.value),
    );

    let config = CompareConfig {
        field_trials: 500,
        ..CompareConfig::default()
    };
    let t = compare_processes_with(&[0.3], &config, 1302)?;
    let rel = (t.ginibre_density / INTENSITY - 1.0).abs();
    v.add(
        rel <= 0.05,
        format!(
            "Ginibre bulk density {:.5} vs {INTENSITY:.5} (n = {}, {} matrices)",
            t.ginibre_density, config.ginibre_n, config.ginibre_matrices
        ),
    );
    let g = t.row(0.3, Process::Ginibre).expect("ginibre row").p_ge2;
    let p = t.row(0.3, Process::Poisson).expect("poisson row");
    let exact = p.exact.expect("poisson closed form");
    v.add(
        g.wilson_high < p.p_ge2.wilson_low && g.wilson_high < exact,
        format!(
            "P(N>=2) at rho = 0.3: Ginibre {}/{} (upper {:.2e}) vs Poisson {:.2e} (lower {:.2e}, exact {exact:.2e})",
            g.successes, g.trials, g.wilson_high, p.p_ge2.value, p.p_ge2.wilson_low
        ),
    );
    Ok(v.finish())
}

fn run_cli(dir: &Path, tag: &str, args: &[&str], threads: &str, format: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let out = dir.join(format!("{tag}.{format}"));
    let res = Command::new(env!("CARGO_BIN_EXE_rpw"))
        .args(args)
        .args(["--seed", "1401", "--threads", threads, "--format", format])
        .arg("--out")
        .arg(&out)
        .env_remove("RPW_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if !res.status.success() {
        return Err(format!(
            "`{}` exited with {}: {}",
            args.join(" "),
            res.status,
            String::from_utf8_lossy(&res.stderr).trim()
        ));
    }
    let file = std::fs::read(&out).map_err(|e| e.to_string())?;
    Ok((file, res.stdout))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| rpw_core::Error::Precondition(e.to_string()))?;
    let cases: [&[&str]; 10] = [
        &["sample-field", "--radius", "5"],
        &["find-critical", "--rho", "3"],
        &["k1"],
        &["k2", "--r", "0.5", "--samples", "50000"],
        &["k2-typed", "--r", "0.3", "--samples", "50000"],
        &["k2-curve", "--points", "4", "--samples", "20000"],
        &["moment2", "--rho", "0.3", "--nodes", "8", "--samples-per-node", "20000"],
        &["mc-moments", "--rho", "0.5", "--trials", "600"],
        &[
            "compare-processes", "--rho-grid", "0.3,0.5", "--trials", "500",
            "--poisson-windows", "50000", "--ginibre-matrices", "2", "--ginibre-n", "64",
        ],
        &["verify-series"],
    ];
    let mut v = Verdict::default();
    let mut mismatched = Vec::new();
    let mut errors = Vec::new();
    let mut runs = 0;
    for args in cases {
        for format in ["csv", "json"] {
            let tag = format!("{}-{format}", args[0]);
            // Same output path each time, so the summaries are comparable too.
            let go = |threads: &str| run_cli(dir.path(), &tag, args, threads, format);
            match (go("1"), go("1"), go("3")) {
                (Ok(a), Ok(b), Ok(c)) => {
                    runs += 3;
                    if a != b || a != c {
                        mismatched.push(tag);
                    }
                }
                (a, b, c) => {
                    for r in [a, b, c] {
                        if let Err(e) = r {
                            errors.push(e);
                        }
                    }
                }
            }
        }
    }
    v.add(
        mismatched.is_empty() && errors.is_empty(),
        format!(
            "{runs} runs of 10 commands x 2 formats at 1, 1 and 3 threads byte-identical{}{}",
            if mismatched.is_empty() { String::new() } else { format!(", differing: {mismatched:?}") },
            if errors.is_empty() { String::new() } else { format!(", errors: {errors:?}") }
        ),
    );
    Ok(v.finish())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("one-point constant E|det H|", one_point_constant),
        ("mean count in the unit disc", mean_count_unit_disc),
        ("min:max:saddle = 1:1:2", typed_ratio),
        ("Helmholtz equation of sampled fields", helmholtz),
        ("det A small-r expansion", det_a_expansion),
        ("closed-form eigen-decomposition", closed_form_eigen),
        ("series residual slopes", series_slopes),
        ("K2 small-r limit and deviation order", k2_small_r),
        ("K2 Cartesian vs spherical estimators", k2_two_estimators),
        ("type-restricted K2", typed_k2),
        ("second factorial moment", second_moment),
        ("small-disc count probabilities", small_disc_probabilities),
        ("Poisson and Ginibre references", reference_processes),
        ("CLI determinism across runs and threads", determinism),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match check() {
            Ok(c) => (c.pass, c.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:02} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
