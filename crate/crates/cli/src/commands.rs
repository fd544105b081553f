use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use heatlab::criteria::{uniqueness_growth_check, volume_growth_integral};
use heatlab::heat::{
    check_caccioppoli, check_grigoryan, check_main_estimate, check_omori_yau_witness, completeness_probe,
    dirichlet_restriction, grigoryan_constants, lift_certificate, HeatField, HeatSource, InequalityReport,
    MainEstimateParams, ProbeOptions, Provenance, SemigroupSource, WitnessCertificate, DEFAULT_RTOL, DEFAULT_TIMES,
};
use heatlab::io::{self, fmt_f64};
use heatlab::metric::{ball, check_gl, jump_size_outside, GrowthFunction, DEFAULT_BUDGET};
use heatlab::refinement::{choose_n, refine, verify_refinement};
use heatlab::zoo::{
    by_name, calibrate_derivative_constant, calibrate_growth_constant, huang_residual, huang_solution, zoo_names,
    Family, DEFAULT_PRECISION,
};
use heatlab::{Error, Field, FiniteGraph, Graph, Vertex};

use crate::source::{GraphArgs, Source};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mass deficits of the Dirichlet exhaustion.
    Probe(ProbeArgs),
    /// Subdivide edges and verify the refinement.
    Refine(RefineArgs),
    /// Run one of the inequality or growth checks.
    Check(Box<CheckArgs>),
    /// Residual and growth tables for the explicit nonzero solution.
    Counterexample(CounterexampleArgs),
    /// Built-in graphs.
    #[command(subcommand)]
    Zoo(ZooCommand),
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Probe(a) => probe(a),
        Command::Refine(a) => refine_cmd(a),
        Command::Check(a) => check(*a),
        Command::Counterexample(a) => counterexample(a),
        Command::Zoo(z) => zoo(z),
    }
}

fn emit(out: Option<&Path>, csv: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, csv).map_err(Error::from).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn write_file(path: PathBuf, content: &str) -> Result<()> {
    std::fs::write(&path, content).map_err(Error::from).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn growth(spec: &str) -> Result<GrowthFunction> {
    Ok(GrowthFunction::parse(spec)?)
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 || hi <= lo {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Increasing ball radii; defaults to the graph's registered radii.
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_RTOL)]
    rtol: f64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn probe(a: ProbeArgs) -> Result<()> {
    let src = a.graph.load()?;
    let radii = if a.radii.is_empty() { src.probe_radii.clone() } else { a.radii };
    let times = if a.times.is_empty() { DEFAULT_TIMES.to_vec() } else { a.times };
    let opts = ProbeOptions { rtol: a.rtol, budget: a.budget, oracle: src.oracle };
    let rep = completeness_probe(src.graph.as_ref(), &src.probe_metric, &radii, &times, &opts)?;
    emit(a.out.as_deref(), &io::probe_csv(&rep))?;
    for d in &rep.diagnostics {
        eprintln!("note: {d}");
    }
    println!("verdict: {}", rep.verdict);
    Ok(())
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Bound on chain steps, e.g. `const:0.3` or `power:1,0.5`.
    #[arg(long)]
    g_bound: String,
    #[arg(long)]
    out_prefix: PathBuf,
    /// Radii for the volume sandwich; defaults to ten radii up to the diameter.
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
}

fn refine_cmd(a: RefineArgs) -> Result<()> {
    let src = a.graph.load()?;
    let Some(g) = &src.finite else {
        bail!(Error::InvalidArgument("refine needs a graph given by files".into()));
    };
    let d = &src.metric;
    let plan = choose_n(g, d, &growth(&a.g_bound)?)?;
    let res = refine(g, d, &plan)?;
    let radii = if a.radii.is_empty() {
        let diameter = src.probe_radii[0];
        (1..=10).map(|i| diameter * i as f64 / 10.0).collect()
    } else {
        a.radii
    };
    let rep = verify_refinement(&res, g, d, &radii)?;
    write_file(with_suffix(&a.out_prefix, ".edges"), &io::write_edges(&res.graph))?;
    write_file(with_suffix(&a.out_prefix, ".measure"), &io::write_measure(&res.graph))?;
    write_file(with_suffix(&a.out_prefix, ".metric"), &io::write_metric(&res.graph, &res.metric)?)?;
    write_file(with_suffix(&a.out_prefix, ".chains"), &io::write_chain_map(&res))?;
    let mut csv = String::from("r,volume,refined_volume,ok\n");
    for row in &rep.sandwich {
        let _ = writeln!(csv, "{},{},{},{}", fmt_f64(row.r), fmt_f64(row.volume), fmt_f64(row.refined_volume), row.ok);
    }
    write_file(with_suffix(&a.out_prefix, "_report.csv"), &csv)?;
    let inserted: usize = res.chains.iter().map(|c| c.n()).sum();
    println!("chains: {} inserted vertices: {inserted}", res.chains.len());
    println!("inserted_slack: {}", fmt_f64(rep.inserted_slack));
    println!("distance_discrepancy: {}", fmt_f64(rep.distance_discrepancy));
    for row in rep.sandwich.iter().filter(|r| !r.ok) {
        println!(
            "sandwich violated at r = {}: m = {}, m' = {}",
            fmt_f64(row.r),
            fmt_f64(row.volume),
            fmt_f64(row.refined_volume)
        );
    }
    println!("verification: {}", if rep.passed() { "pass" } else { "fail" });
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Gl,
    Volume,
    Gc,
    Caccioppoli,
    MainEstimate,
    Grigoryan,
    Witness,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    check: CheckKind,
    /// Growth function, e.g. `power:2`, `power_log:2`, `const:1`.
    #[arg(long, default_value = "power:2")]
    f: String,
    /// Constant `A` of the globally-local condition.
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    /// Largest radius of the grid (gl) or of the volume integral (volume).
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    r_min: f64,
    #[arg(long, default_value_t = 60)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Radius of the ball on which a zoo graph is cut off for solution checks.
    #[arg(long, default_value_t = 12.0)]
    domain_radius: f64,
    /// Time of evaluation.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Inner radius `r`.
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    /// Outer radius `R` (main estimate).
    #[arg(long, default_value_t = 4.0)]
    big_r: f64,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Main-estimate constant; defaults to the smallest admissible value.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Time grid for the growth condition.
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    /// Radii for the growth condition.
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    /// `B` in `s_r <= B r / f(A r)`; defaults to the observed supremum.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    r_gl: f64,
    #[arg(long, default_value_t = 1.6)]
    e: f64,
    #[arg(long, default_value_t = 1.3)]
    e_prime: f64,
    /// Size of the witness region `{0..n}`.
    #[arg(long, default_value_t = 50)]
    n_max: i64,
    /// Also lift the witness to the refinement built from this bound.
    #[arg(long)]
    lift_g: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `e^{-tL} delta_o` on the finite domain.
struct Solution {
    graph: FiniteGraph,
    metric: heatlab::metric::EdgeLengthMetric,
    sys: heatlab::heat::DirichletSystem,
    initial: Field,
}

impl Solution {
    fn new(src: &Source, a: &CheckArgs) -> Result<Self> {
        let (graph, metric) = src.finite_domain(a.domain_radius, a.budget)?;
        let b = ball(&graph, &metric, f64::INFINITY, a.budget)?;
        let sys = dirichlet_restriction(&graph, &b)?;
        let initial = Field::finite([(metric.root(), 1.0)]);
        Ok(Self { graph, metric, sys, initial })
    }

    fn source(&self, rtol: f64) -> Result<SemigroupSource<'_>> {
        Ok(SemigroupSource::new(&self.sys, &self.initial, rtol)?)
    }
}

fn check(a: CheckArgs) -> Result<()> {
    let src = a.graph.load()?;
    let f = growth(&a.f)?;
    let default_r_max = if src.finite.is_some() { src.probe_radii[0] } else { 1e4 };
    match a.check {
        CheckKind::Gl => {
            let grid = log_grid(a.r_min, a.r_max.unwrap_or(default_r_max), a.points);
            let rep = check_gl(src.graph.as_ref(), &src.metric, &f, a.a, &grid)?;
            emit(a.out.as_deref(), &io::gl_csv(&rep))?;
            println!("sup_ratio: {}", fmt_f64(rep.sup_ratio()));
            println!("verdict: {}", gl_verdict(&rep.verdict));
        }
        CheckKind::Volume => {
            let r_max = a.r_max.unwrap_or(if src.finite.is_some() { default_r_max.max(2.0) } else { 256.0 });
            let rep = volume_growth_integral(src.graph.as_ref(), &src.metric, r_max, a.budget)?;
            emit(a.out.as_deref(), &io::integral_csv(&rep))?;
            println!("verdict: {}", rep.diagnostic);
        }
        CheckKind::Gc => {
            let sol = Solution::new(&src, &a)?;
            let times = if a.times.is_empty() { (1..=20).map(|i| i as f64 * 0.05).collect() } else { a.times.clone() };
            let radii = if a.radii.is_empty() { vec![1.0, 2.0, 4.0, 8.0] } else { a.radii.clone() };
            let field = HeatField::tabulate(&sol.source(a.rtol)?, &times, sol.initial.clone(), Provenance::Semigroup)?;
            let t_max = *times.last().unwrap();
            let rep = uniqueness_growth_check(&sol.graph, &sol.metric, &field, &f, t_max, &radii, a.budget)?;
            emit(a.out.as_deref(), &io::gc_csv(&rep))?;
            println!("verdict: {}", if rep.pass { "pass" } else { "fail" });
        }
        CheckKind::Caccioppoli => {
            let sol = Solution::new(&src, &a)?;
            let u = sol.source(a.rtol)?.at(a.t)?;
            let cut = ball(&sol.graph, &sol.metric, a.r, a.budget)?;
            let dist = sol.metric.distances(&sol.graph, a.r, a.budget)?;
            let phi = Field::finite(cut.vertices.iter().map(|&x| (x, 1.0 - dist.distance(x).unwrap_or(a.r) / a.r)));
            let rep = check_caccioppoli(&sol.graph, &u, &phi)?;
            inequality_out(&a, &[rep])?;
        }
        CheckKind::MainEstimate => {
            let sol = Solution::new(&src, &a)?;
            let s = jump_size_outside(&sol.graph, &sol.metric, 0.0, a.budget)?;
            let s_inner = jump_size_outside(&sol.graph, &sol.metric, a.r - 2.0 * s, a.budget)?;
            let mut p = MainEstimateParams {
                r: a.r,
                big_r: a.big_r,
                lambda: a.lambda,
                delta: a.delta,
                t: a.t,
                c: 0.0,
                eps: 0.0,
                s,
                s_inner,
            };
            p.c = a.c.unwrap_or_else(|| p.minimal_c());
            p.eps = a.eps.unwrap_or(2.0 * s_inner * s_inner / p.c);
            let rep = check_main_estimate(&sol.graph, &sol.metric, &sol.source(a.rtol)?, &p, &f)?;
            inequality_out(&a, &[rep])?;
        }
        CheckKind::Grigoryan => {
            let sol = Solution::new(&src, &a)?;
            let s = jump_size_outside(&sol.graph, &sol.metric, 0.0, a.budget)?;
            let b = match a.b {
                Some(b) => b,
                None => {
                    let grid = log_grid(a.r_gl.max(a.r_min), a.domain_radius, a.points);
                    check_gl(&sol.graph, &sol.metric, &f, a.a, &grid)?.sup_ratio().max(f64::MIN_POSITIVE)
                }
            };
            let recipe = grigoryan_constants(s, a.a, b, a.r_gl, a.e, a.e_prime, &f)?;
            println!(
                "r0: {} D: {} F: {} G: {}",
                recipe.constants.r0, recipe.constants.d, recipe.constants.f, recipe.constants.g
            );
            let rep = check_grigoryan(
                &sol.graph,
                &sol.metric,
                &sol.source(a.rtol)?,
                &recipe.constants,
                a.r,
                a.delta,
                a.t,
                &f,
            )?;
            inequality_out(&a, &[rep])?;
        }
        CheckKind::Witness => witness(&src, &a)?,
    }
    Ok(())
}

fn gl_verdict(v: &heatlab::metric::GlVerdict) -> &'static str {
    match v {
        heatlab::metric::GlVerdict::Bounded => "bounded",
        heatlab::metric::GlVerdict::UnboundedTrend => "unbounded-trend",
        heatlab::metric::GlVerdict::InfiniteJumpSize => "infinite-jump-size",
    }
}

fn inequality_out(a: &CheckArgs, reports: &[InequalityReport]) -> Result<()> {
    emit(a.out.as_deref(), &io::inequality_csv(reports))?;
    let ok = reports.iter().all(|r| r.slack >= 0.0);
    println!("verdict: {}", if ok { "holds" } else { "violated" });
    Ok(())
}

fn witness_row(name: &str, g: &dyn Graph, w: &WitnessCertificate, budget: usize) -> Result<(InequalityReport, bool)> {
    let v = check_omori_yau_witness(g, w, budget)?;
    let mut rep = InequalityReport::new(name, v.max_laplacian, -w.c);
    rep.preconditions_ok = v.sup.is_finite();
    Ok((rep, v.accepted))
}

fn witness(src: &Source, a: &CheckArgs) -> Result<()> {
    let Some(z) = &src.zoo else {
        bail!(Error::InvalidArgument("witness check needs a zoo graph with a registered certificate".into()));
    };
    let Some(w) = z.witness(a.n_max) else {
        bail!(Error::WitnessConstructionFailed(format!("{} has no incompleteness certificate", z.name)));
    };
    let w = w?;
    let (row, mut accepted) = witness_row("omori-yau", src.graph.as_ref(), &w, a.budget)?;
    let mut rows = vec![row];
    if let Some(spec) = &a.lift_g {
        let keep = w.u.region();
        let g = z.graph.restrict(&keep)?;
        let d = src.metric.clone().without_closed_form();
        let res = refine(&g, &d, &choose_n(&g, &d, &growth(spec)?)?)?;
        let lifted = lift_certificate(&res, &w);
        let (row, ok) = witness_row("omori-yau-lifted", &res.graph, &lifted, a.budget.max(res.graph.len()))?;
        rows.push(row);
        accepted &= ok;
    }
    emit(a.out.as_deref(), &io::inequality_csv(&rows))?;
    println!("verdict: {}", if accepted { "accepted" } else { "rejected" });
    Ok(())
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 20)]
    n_max: i64,
    #[arg(long, value_delimiter = ',')]
    t_grid: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision_bits: usize,
    /// Prefix for `_residual.csv`, `_growth.csv` and `_initial.csv`.
    #[arg(long, default_value = "counterexample")]
    out: PathBuf,
}

fn counterexample(a: CounterexampleArgs) -> Result<()> {
    if a.n_max < 0 {
        bail!(Error::InvalidArgument("--n-max must be nonnegative".into()));
    }
    let times = if a.t_grid.is_empty() { (1..=8).map(|i| 0.25 * i as f64).collect() } else { a.t_grid };
    let bits = a.precision_bits;
    let rows = huang_residual(a.n_max, &times, bits)?;
    let mut csv = String::from("n,t,u,residual,relative\n");
    for r in &rows {
        let _ =
            writeln!(csv, "{},{},{},{},{}", r.n, fmt_f64(r.t), fmt_f64(r.u), fmt_f64(r.residual), fmt_f64(r.relative));
    }
    write_file(with_suffix(&a.out, "_residual.csv"), &csv)?;

    let big_c = calibrate_growth_constant(a.n_max, &times, bits)?;
    let c_star = calibrate_derivative_constant((a.n_max + 1) as usize, &times, bits)?;
    let mut csv = String::from("n,t,abs_u,bound\n");
    for &t in &times {
        for n in 0..=a.n_max {
            let u = huang_solution(n, t, bits)?.to_f64().value().abs();
            let nl = if n > 1 { n as f64 * (n as f64).ln() } else { 0.0 };
            let _ = writeln!(csv, "{n},{},{},{}", fmt_f64(t), fmt_f64(u), fmt_f64(big_c * (big_c * nl).exp()));
        }
    }
    write_file(with_suffix(&a.out, "_growth.csv"), &csv)?;

    let mut csv = String::from("n,t,u\n");
    for n in 0..=a.n_max.min(5) {
        for t in [1e-1, 1e-2, 1e-3] {
            let u = huang_solution(n, t, bits)?.to_f64().value();
            let _ = writeln!(csv, "{n},{},{}", fmt_f64(t), fmt_f64(u));
        }
    }
    write_file(with_suffix(&a.out, "_initial.csv"), &csv)?;

    let worst = rows.iter().map(|r| r.relative).fold(0.0, f64::max);
    println!("max_relative_residual: {}", fmt_f64(worst));
    println!("growth_constant: {}", fmt_f64(big_c));
    println!("derivative_constant: {}", fmt_f64(c_star));
    Ok(())
}

#[derive(Debug, Subcommand)]
pub enum ZooCommand {
    /// List the built-in graphs.
    List,
    /// Write a window of a built-in graph in the standard file formats,
    /// plus a JSON sidecar of its closed forms.
    Export {
        name: String,
        #[arg(long)]
        out_prefix: PathBuf,
    },
}

fn zoo(cmd: ZooCommand) -> Result<()> {
    match cmd {
        ZooCommand::List => {
            for name in zoo_names() {
                println!("{name}");
            }
        }
        ZooCommand::Export { name, out_prefix } => {
            let z = by_name(&name)?;
            let (lo, hi) = z.export_window;
            let keep = (lo..=hi).map(Vertex).collect();
            let g = z.graph.restrict(&keep)?;
            write_file(with_suffix(&out_prefix, ".edges"), &io::write_edges(&g))?;
            write_file(with_suffix(&out_prefix, ".measure"), &io::write_measure(&g))?;
            write_file(with_suffix(&out_prefix, ".metric"), &io::write_metric(&g, &z.metric)?)?;
            let family = match z.family {
                Family::Line => "line".to_string(),
                Family::Huang => "huang".to_string(),
                Family::BirthDeath(b) => format!("birth_death(beta = {b})"),
            };
            let sidecar = serde_json::json!({
                "name": z.name,
                "family": family,
                "window": [lo, hi],
                "oracle": z.oracle,
                "closed_forms": z.closed_forms,
            });
            write_file(with_suffix(&out_prefix, ".json"), &serde_json::to_string_pretty(&sidecar)?)?;
            println!("exported {} vertices of {}", g.len(), z.name);
        }
    }
    Ok(())
}
