use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use grc::adversarial::{adversarial_trials, af_with_extra_helpers_baseline, ConcatCode, TrialLog};
use grc::bounds::{
    adversarial_cut_bound, cutset_bound, delta_r, functional_ip_lower_bound, ip_lower_bound, msr_mbr_points, omega_r,
    CodeParams,
};
use grc::codes::{random_file, Generators, GpmCode, LinearRegeneratingCode, PmCode};
use grc::degreeopt::{mc_random_graph_experiment, optimal_degree_af, optimal_tree_search, ProbabilityRule, SearchMode};
use grc::gf::Field;
use grc::graphrepair::{
    build_repair_tree, lambda_af_nonuniform, lambda_af_uniform, lambda_ip_nonuniform, lambda_ip_uniform,
    nearest_helpers, simulate_code_repair, BandwidthReport, NonuniformPlan, Scheme, StorageGraph,
};
use grc::stacking::StackedCode;
use grc::{selftest, Execution};

use crate::output::{emit, Format};
use crate::Failure;

type Outcome = Result<(), Failure>;

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Write results here instead of stdout; a `.meta.json` sidecar is written next to it.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Run trials one at a time instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn emit<R: Serialize, C: Serialize>(&self, rows: &[R], command: &str, seed: bool, config: &C) -> Outcome {
        let seed = seed.then_some(self.seed);
        Ok(emit(rows, self.format, self.out.as_deref(), command, seed, config)?)
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: grc::Error| e.to_string())
}

/// A named family (`petersen`, `cycle:8`, `er:n=50,p=0.1,seed=3`, ...) or a
/// JSON file `{"n": .., "edges": [[u, v], ..]}`.
fn load_graph(spec: &str) -> anyhow::Result<StorageGraph> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return Ok(StorageGraph::from_json(&text)?);
    }
    Ok(StorageGraph::from_name(spec)?)
}

fn gf256() -> Field {
    Field::gf256()
}

// ---------------------------------------------------------------- bounds

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    /// Number of nodes; defaults to d + 1.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub d: usize,
    /// Node size; defaults to the minimum-storage point.
    #[arg(long)]
    pub l: Option<u64>,
    /// Symbols sent by each helper; defaults to one each.
    #[arg(long, value_delimiter = ',')]
    pub beta_list: Vec<u64>,
    /// File size; defaults to k·l.
    #[arg(long)]
    pub m: Option<u64>,
    /// Number of altered helpers for the adversarial bound.
    #[arg(long)]
    pub t_adversary: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct BoundRow {
    quantity: String,
    value: String,
}

pub fn bounds(a: BoundsArgs) -> Outcome {
    let (k, d) = (a.k, a.d);
    if k == 0 || k > d {
        return Err(anyhow!("need 1 <= k <= d, got k = {k}, d = {d}").into());
    }
    let betas = if a.beta_list.is_empty() { vec![1; d] } else { a.beta_list.clone() };
    if betas.len() != d {
        return Err(anyhow!("--beta-list has {} entries, d = {d}", betas.len()).into());
    }
    let r = d - k + 1;
    let n = a.n.unwrap_or(d + 1);
    let l = match a.l {
        Some(l) => l,
        None => delta_r(&betas, r)?,
    };
    let p = CodeParams::new(n, k, d, l, betas.clone(), a.m.unwrap_or(k as u64 * l))?;
    let (l_msr, l_mbr) = msr_mbr_points(n, k, d, &betas)?;
    let cut = cutset_bound(&p);

    let mut rows = Vec::new();
    let mut put = |q: String, v: String| rows.push(BoundRow { quantity: q, value: v });
    let list = |b: &[u64]| b.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    put("n".into(), n.to_string());
    put("k".into(), k.to_string());
    put("d".into(), d.to_string());
    put("l".into(), l.to_string());
    put("M".into(), p.m.to_string());
    put("B".into(), list(&betas));
    put(format!("delta_{r}"), delta_r(&betas, r)?.to_string());
    put("l_msr".into(), l_msr.to_string());
    put("l_mbr".into(), l_mbr.to_string());
    put("is_msr".into(), p.is_msr().to_string());
    put("cutset_rhs".into(), cut.rhs.to_string());
    put("cutset_satisfied".into(), cut.satisfied.to_string());
    put("ip_lower_bound".into(), ip_lower_bound(&p, false)?.to_string());
    put("functional_ip_lower_bound".into(), functional_ip_lower_bound(&p).to_string());
    if let Some(t) = a.t_adversary {
        put(format!("omega_{t}"), omega_r(&betas, t)?.to_string());
        put("adversarial_helpers".into(), (r + 2 * t).to_string());
        put("adversarial_bound".into(), adversarial_cut_bound(&p, t)?.to_string());
    }
    a.common.emit(&rows, "bounds", false, &a)
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Fig3,
    Fig4,
    Fig5,
    Petersen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Pm,
    Gpm,
    Stacked,
    Concat,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    /// A built-in network with its code; failed node is vertex 0.
    #[arg(long, value_enum, conflicts_with_all = ["graph", "code"])]
    pub example: Option<Example>,
    #[arg(long, required_unless_present = "example")]
    pub graph: Option<String>,
    #[arg(long, value_enum)]
    pub code: Option<CodeKind>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Node size, for --accounting-only.
    #[arg(long)]
    pub l: Option<u64>,
    /// Helper downloads for `stacked`, or per-layer downloads (`a/b` allowed)
    /// for nonuniform accounting.
    #[arg(long, value_delimiter = ',')]
    pub beta_list: Vec<String>,
    /// Failed node.
    #[arg(long)]
    pub f: Option<usize>,
    #[arg(long, value_parser = parse_scheme, default_value = "ip-u")]
    pub scheme: Scheme,
    /// Random files (or adversarial trials for `concat`).
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Also report the amplify-and-forward comparison.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long, default_value_t = 1)]
    pub t_adversary: usize,
    /// Bandwidth only, from the repair tree; no code is run.
    #[arg(long)]
    pub accounting_only: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct SimRow {
    graph: String,
    f: usize,
    d: usize,
    scheme: Scheme,
    total: String,
    verified: Option<bool>,
}

fn expected_total(ex: Example, scheme: Scheme, t: usize) -> Option<&'static str> {
    match (ex, scheme) {
        (Example::Fig3, Scheme::AfUniform) => Some("9"),
        (Example::Fig3, Scheme::IpUniform) => Some("8"),
        (Example::Fig4, Scheme::AfUniform) => Some("30"),
        (Example::Fig4, Scheme::IpUniform) => Some("24"),
        (Example::Fig5, Scheme::AfUniform) if t == 1 => Some("95"),
        (Example::Fig5, Scheme::IpUniform) => Some("85"),
        _ => None,
    }
}

pub fn simulate(a: SimulateArgs) -> Outcome {
    if a.trials == 0 {
        return Err(anyhow!("--trials must be at least 1").into());
    }
    let rows = match a.example {
        Some(ex) => simulate_example(&a, ex)?,
        None => simulate_custom(&a)?,
    };
    a.common.emit(&rows, "simulate", true, &a)?;
    let mut bad = Vec::new();
    for r in &rows {
        if r.verified == Some(false) {
            bad.push(format!("{} repair of node {} did not reproduce its content", r.scheme, r.f));
        }
        if let Some(want) = a.example.and_then(|ex| expected_total(ex, r.scheme, a.t_adversary)) {
            if r.total != want {
                bad.push(format!("{} total {} (expected {want})", r.scheme, r.total));
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(bad.join("; ")))
    }
}

fn schemes(a: &SimulateArgs) -> Vec<Scheme> {
    if a.baseline && a.scheme != Scheme::AfUniform {
        vec![Scheme::AfUniform, a.scheme]
    } else {
        vec![a.scheme]
    }
}

fn simulate_example(a: &SimulateArgs, ex: Example) -> anyhow::Result<Vec<SimRow>> {
    if ex != Example::Petersen && a.f.is_some_and(|f| f != 0) {
        bail!("the {} example repairs vertex 0", format!("{ex:?}").to_lowercase());
    }
    let f = a.f.unwrap_or(0);
    let seed = a.common.seed;
    match ex {
        Example::Fig3 => {
            let code = PmCode::new(&gf256(), 7, 4)?;
            code_rows("fig3", &StorageGraph::fig3(), &code, f, &schemes(a), a.trials, seed)
        }
        Example::Fig4 => {
            let code = GpmCode::example_7_5_3()?;
            code_rows("fig4", &StorageGraph::fig4(), &code, f, &schemes(a), a.trials, seed)
        }
        Example::Petersen => {
            let code = StackedCode::build(&gf256(), 10, 3, 9, &[1; 9])?;
            code_rows("petersen", &StorageGraph::petersen(), &code, f, &schemes(a), a.trials, seed)
        }
        Example::Fig5 => {
            if a.scheme != Scheme::IpUniform {
                bail!("the fig5 construction repairs with ip-u");
            }
            let g = StorageGraph::fig5();
            let mut rows = Vec::new();
            if a.baseline {
                let rep = af_with_extra_helpers_baseline(&g, 0, 5, 7, 15, a.t_adversary)?;
                rows.push(report_row("fig5", 0, &rep, None));
            }
            rows.push(concat_row("fig5", &g, 0, a)?);
            Ok(rows)
        }
    }
}

fn report_row(graph: &str, f: usize, rep: &BandwidthReport, verified: Option<bool>) -> SimRow {
    SimRow {
        graph: graph.into(),
        f,
        d: rep.edges.len(),
        scheme: rep.scheme,
        total: rep.total.to_string(),
        verified,
    }
}

fn concat_row(name: &str, g: &StorageGraph, f: usize, a: &SimulateArgs) -> anyhow::Result<SimRow> {
    let code = ConcatCode::fig5()?;
    let helpers = nearest_helpers(g, f, code.inner().d())?;
    let setup = code.repair_setup(g, f, &helpers)?;
    let logs = adversarial_trials(&code, &setup, a.t_adversary, a.scheme, a.trials, a.common.seed, a.common.exec())?;
    let total = logs.first().map(|l| l.total.clone()).unwrap_or_default();
    if logs.iter().any(|l| l.total != total) {
        bail!("repair traffic changed between trials");
    }
    Ok(SimRow {
        graph: name.into(),
        f,
        d: helpers.len(),
        scheme: a.scheme,
        total,
        verified: Some(logs.iter().all(|l| l.success)),
    })
}

/// Repairs `f` for each scheme on `files` random files; the traffic does not
/// depend on the file, the verification flag covers all of them.
fn code_rows(
    name: &str,
    g: &StorageGraph,
    code: &dyn LinearRegeneratingCode,
    f: usize,
    schemes: &[Scheme],
    files: usize,
    seed: u64,
) -> anyhow::Result<Vec<SimRow>> {
    if f >= g.n() {
        bail!("failed node {f} is not a vertex of a {}-vertex graph", g.n());
    }
    let gens = Generators::of(code)?;
    let helpers = nearest_helpers(g, f, code.d())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cws = (0..files).map(|_| code.encode(&random_file(code, &mut rng))).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &s in schemes {
        let mut report = None;
        let mut ok = true;
        for cw in &cws {
            let rep = simulate_code_repair(g, code, &gens, cw, f, &helpers, s)?;
            ok &= rep.content == cw[f];
            report = Some(rep.report);
        }
        let report = report.expect("at least one file");
        rows.push(report_row(name, f, &report, Some(ok)));
    }
    Ok(rows)
}

fn simulate_custom(a: &SimulateArgs) -> anyhow::Result<Vec<SimRow>> {
    let spec = a.graph.as_deref().expect("clap requires --graph");
    let g = load_graph(spec)?;
    let f = a.f.unwrap_or(0);
    if a.accounting_only {
        return accounting_rows(spec, &g, f, a);
    }
    let Some(kind) = a.code else { bail!("--code is required unless --accounting-only is given") };
    let fld = gf256();
    let code: Box<dyn LinearRegeneratingCode> = match kind {
        CodeKind::Pm => {
            let k = a.k.ok_or_else(|| anyhow!("pm needs --k"))?;
            Box::new(PmCode::new(&fld, g.n(), k)?)
        }
        CodeKind::Gpm => Box::new(GpmCode::example_7_5_3()?),
        CodeKind::Stacked => {
            let (Some(k), Some(d)) = (a.k, a.d) else { bail!("stacked needs --k and --d") };
            let betas = if a.beta_list.is_empty() {
                vec![1; d]
            } else {
                a.beta_list
                    .iter()
                    .map(|s| s.parse::<u64>().with_context(|| format!("bad download '{s}'")))
                    .collect::<anyhow::Result<_>>()?
            };
            Box::new(StackedCode::build(&fld, g.n(), k, d, &betas)?)
        }
        CodeKind::Concat => return Ok(vec![concat_row(spec, &g, f, a)?]),
    };
    for (flag, want, have) in [("--k", a.k, code.k()), ("--d", a.d, code.d())] {
        if want.is_some_and(|w| w != have) {
            bail!("{flag} {} does not match the code's {have}", want.unwrap_or_default());
        }
    }
    code_rows(spec, &g, code.as_ref(), f, &schemes(a), a.trials, a.common.seed)
}

fn accounting_rows(spec: &str, g: &StorageGraph, f: usize, a: &SimulateArgs) -> anyhow::Result<Vec<SimRow>> {
    let (Some(k), Some(d), Some(l)) = (a.k, a.d, a.l) else { bail!("--accounting-only needs --k, --d and --l") };
    let helpers = nearest_helpers(g, f, d)?;
    let tree = build_repair_tree(g, f, &helpers)?;
    let plan = || -> anyhow::Result<NonuniformPlan> {
        if a.beta_list.is_empty() {
            return Ok(NonuniformPlan::uniform(tree.layer_sizes(), l, k)?);
        }
        let betas = a
            .beta_list
            .iter()
            .map(|s| s.parse::<Rational64>().map_err(|_| anyhow!("bad download '{s}'")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(NonuniformPlan::new(tree.layer_sizes(), l, k, betas)?)
    };
    schemes(a)
        .into_iter()
        .map(|s| {
            let rep = match s {
                Scheme::AfUniform => lambda_af_uniform(&tree, l, d, k)?,
                Scheme::IpUniform => lambda_ip_uniform(&tree, l, d, k)?,
                Scheme::AfNonuniform => lambda_af_nonuniform(&tree, &plan()?)?,
                Scheme::IpNonuniform => lambda_ip_nonuniform(&tree, &plan()?, false)?,
            };
            Ok(report_row(spec, f, &rep, None))
        })
        .collect()
}

// ---------------------------------------------------------------- optimize

#[derive(Args, Debug, Serialize)]
pub struct OptimizeArgs {
    /// A graph, or `er`, `er:c=C`, `er:p=P` together with --trials for the
    /// random-graph experiment.
    #[arg(long)]
    pub graph: String,
    #[arg(long, required_unless_present = "trials")]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    /// Only this failed node; default is every node.
    #[arg(long)]
    pub f: Option<usize>,
    #[arg(long, value_parser = parse_scheme, default_value = "af-u")]
    pub scheme: Scheme,
    /// Search every repair tree (ip-u, at most 9 vertices).
    #[arg(long)]
    pub exhaustive: bool,
    /// Random-graph experiment: samples per graph size.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200])]
    pub n_list: Vec<usize>,
    /// `k = ⌊fraction · n⌋` in the random-graph experiment.
    #[arg(long, default_value_t = 0.5)]
    pub k_fraction: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct OptRow {
    graph: String,
    f: usize,
    k: usize,
    l: u64,
    d_star: usize,
    lambda: String,
    scheme: Scheme,
}

fn er_rule(spec: &str) -> anyhow::Result<ProbabilityRule> {
    let args = match spec.split_once(':') {
        None if spec == "er" => return Ok(ProbabilityRule::LogFactor(3.0)),
        Some(("er", args)) => args,
        _ => bail!("the random-graph experiment takes --graph er, er:c=C or er:p=P"),
    };
    let (key, value) = args.split_once('=').ok_or_else(|| anyhow!("expected key=value in '{spec}'"))?;
    let v: f64 = value.trim().parse().with_context(|| format!("bad number in '{spec}'"))?;
    match key.trim() {
        "c" => Ok(ProbabilityRule::LogFactor(v)),
        "p" => Ok(ProbabilityRule::Constant(v)),
        other => bail!("unknown key '{other}' in '{spec}'"),
    }
}

pub fn optimize(a: OptimizeArgs) -> Outcome {
    let exec = a.common.exec();
    if let Some(trials) = a.trials {
        let rule = er_rule(&a.graph)?;
        let rows = mc_random_graph_experiment(&a.n_list, rule, a.k_fraction, trials, a.common.seed, exec)?;
        return a.common.emit(&rows, "optimize", true, &a);
    }
    let k = a.k.expect("clap requires --k");
    let g = load_graph(&a.graph)?;
    let nodes: Vec<usize> = match a.f {
        Some(f) if f >= g.n() => return Err(anyhow!("failed node {f} is not a vertex").into()),
        Some(f) => vec![f],
        None => (0..g.n()).collect(),
    };
    let mode = if a.exhaustive { SearchMode::Exhaustive } else { SearchMode::Heuristic };
    let scheme = a.scheme;
    if !scheme.is_uniform() {
        return Err(anyhow!("degree optimization covers af-u and ip-u").into());
    }
    let rows = exec
        .map(nodes.len(), |i| -> grc::Result<OptRow> {
            let f = nodes[i];
            let (d, value) = match scheme {
                Scheme::AfUniform => {
                    let r = optimal_degree_af(&g, f, k, a.l)?;
                    (r.d, r.value)
                }
                _ => {
                    let r = optimal_tree_search(&g, f, k, a.l, mode)?;
                    (r.d, r.value)
                }
            };
            Ok(OptRow { graph: a.graph.clone(), f, k, l: a.l, d_star: d, lambda: value.to_string(), scheme })
        })
        .into_iter()
        .collect::<grc::Result<Vec<_>>>()?;
    a.common.emit(&rows, "optimize", false, &a)
}

// ---------------------------------------------------------------- adversarial-demo

#[derive(Args, Debug, Serialize)]
pub struct AdversarialArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub t_adversary: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    seed: u64,
    corrupted: String,
    error_rank: usize,
    rank_budget: usize,
    success: bool,
    total: String,
}

impl From<&TrialLog> for TrialRow {
    fn from(l: &TrialLog) -> Self {
        TrialRow {
            trial: l.trial,
            seed: l.seed,
            corrupted: l.corrupted.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            error_rank: l.error_rank,
            rank_budget: l.rank_budget,
            success: l.success,
            total: l.total.clone(),
        }
    }
}

pub fn adversarial(a: AdversarialArgs) -> Outcome {
    let g = StorageGraph::fig5();
    let code = ConcatCode::fig5()?;
    let setup = code.repair_setup(&g, 0, &(1..10).collect::<Vec<_>>())?;
    let logs = adversarial_trials(&code, &setup, a.t_adversary, Scheme::IpUniform, a.trials, a.common.seed, a.common.exec())?;
    match a.common.format {
        Format::Json => a.common.emit(&logs, "adversarial-demo", true, &a)?,
        Format::Csv => {
            let rows: Vec<TrialRow> = logs.iter().map(TrialRow::from).collect();
            a.common.emit(&rows, "adversarial-demo", true, &a)?
        }
    }
    let failed: Vec<usize> = logs.iter().filter(|l| !l.success).map(|l| l.trial).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{} of {} trials decoded wrongly: {failed:?}", failed.len(), logs.len())))
    }
}

// ---------------------------------------------------------------- selftest

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Run only these criteria (comma-separated ids).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn selftest(a: SelftestArgs) -> Outcome {
    let exec = a.common.exec();
    if let Some(id) = a.only.iter().find(|&&id| !selftest::CRITERIA.iter().any(|c| c.id == id)) {
        return Err(anyhow!("no criterion {id}").into());
    }
    let mut outcomes = Vec::new();
    for c in selftest::CRITERIA.iter().filter(|c| a.only.is_empty() || a.only.contains(&c.id)) {
        let o = selftest::run(c, exec);
        if !a.json {
            println!("{}", o.line());
        }
        outcomes.push(o);
    }
    if a.json {
        emit(&outcomes, Format::Json, None, "selftest", None, &a)?;
    }
    if let Some(path) = &a.common.out {
        emit(&outcomes, a.common.format, Some(path), "selftest", None, &a)?;
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| format!("{} {}", o.id, o.name)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("failed: {}", failed.join(", "))))
    }
}
