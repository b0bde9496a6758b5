//! Command-line front end: flat `key = value` configuration, subcommand
//! dispatch and CSV output.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::boundary_layer::{bl_decay_rate, duhamel_profile, solve_bl};
use crate::error::{Error, Result};
use crate::euler::{bernoulli_defect, euler_state, solve_euler};
use crate::gas::{FlowConfig, GasLaw, Regime};
use crate::limit_lab::{
    composite_profile, decay_study, inflow_limit_study, outflow_limit_study, RateReport, StudySettings, DEFAULT_ALPHA,
    DEFAULT_R_MAX,
};
use crate::ns::{reconstruct_state, solve_ns};
use crate::numerics::{RadialGrid, ToleranceSet, DEFAULT_POINTS_PER_DECADE};
use crate::profile::FlowState;

pub const SUBCOMMANDS: [&str; 7] = [
    "solve-ns",
    "solve-euler",
    "solve-bl",
    "outflow-limit",
    "inflow-limit",
    "decay",
    "verify",
];

const OUTFLOW_MU_LIST: [f64; 5] = [0.1, 0.05, 0.02, 0.01, 0.005];
const INFLOW_MU_LIST: [f64; 4] = [0.1, 0.05, 0.02, 0.01];
const DECAY_R_MIN: f64 = 10.0;
const DEFAULT_MU: f64 = 0.05;

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub flow: FlowConfig,
    pub r_max: f64,
    pub points_per_decade: usize,
    pub tol: ToleranceSet,
    pub mu_list: Vec<f64>,
    pub alpha: f64,
    pub decay_window: (f64, f64),
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn settings(&self, workers: Option<usize>) -> StudySettings {
        StudySettings {
            r_max: self.r_max,
            points_per_decade: self.points_per_decade,
            tol: self.tol,
            workers,
        }
    }

    /// Every setting as `(key, value)`, defaults included, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = &self.flow;
        let list = self.mu_list.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ");
        vec![
            ("n", f.n.to_string()),
            ("gamma", f.gas.gamma().to_string()),
            ("A", f.gas.a().to_string()),
            ("v_plus", f.v_plus.to_string()),
            ("u_minus", f.u_minus.to_string()),
            ("v_minus", f.v_minus.to_string()),
            ("mu", f.mu.to_string()),
            ("R_max", self.r_max.to_string()),
            ("points_per_decade", self.points_per_decade.to_string()),
            ("ode_rel_tol", self.tol.ode_rel_tol.to_string()),
            ("ode_abs_tol", self.tol.ode_abs_tol.to_string()),
            ("picard_tol", self.tol.picard_tol.to_string()),
            ("max_picard_iters", self.tol.max_picard_iters.to_string()),
            ("quad_tol", self.tol.quad_tol.to_string()),
            ("mu_list", list),
            ("alpha", self.alpha.to_string()),
            ("decay_r_min", self.decay_window.0.to_string()),
            ("decay_r_max", self.decay_window.1.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
        ]
    }
}

const KEYS: [&str; 19] = [
    "n",
    "gamma",
    "A",
    "v_plus",
    "u_minus",
    "v_minus",
    "mu",
    "R_max",
    "points_per_decade",
    "ode_rel_tol",
    "ode_abs_tol",
    "picard_tol",
    "max_picard_iters",
    "quad_tol",
    "mu_list",
    "alpha",
    "decay_r_min",
    "decay_r_max",
    "out_dir",
];

struct Entry {
    line: usize,
    value: String,
}

struct Document {
    entries: Vec<(String, Entry)>,
}

impl Document {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<(T, usize)>>
    where
        T::Err: Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(|v| Some((v, e.line)))
                .map_err(|err| config_error(e.line, key, format!("cannot parse `{}`: {err}", e.value))),
        }
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<(T, usize)>
    where
        T::Err: Display,
    {
        self.parsed(key)?
            .ok_or_else(|| config_error(0, key, "required key is missing"))
    }
}

fn config_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn check(ok: bool, line: usize, key: &str, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_error(line, key, message()))
    }
}

fn tokenize(text: &str) -> Result<Document> {
    let mut entries: Vec<(String, Entry)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line, content, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(config_error(line, key, "unknown key"));
        }
        if entries.iter().any(|(k, _)| k == key) {
            return Err(config_error(line, key, "key given twice"));
        }
        entries.push((
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        ));
    }
    Ok(Document { entries })
}

/// Parses a flat `key = value` document. `#` starts a comment. Missing
/// optional keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc = tokenize(text)?;

    let (n, line) = doc.required::<u32>("n")?;
    check(n >= 2, line, "n", || format!("dimension must be at least 2, got {n}"))?;
    let (gamma, line) = doc.required::<f64>("gamma")?;
    check(gamma.is_finite() && gamma >= 1.0, line, "gamma", || {
        format!("must be at least 1, got {gamma}")
    })?;
    let (a, line) = doc.required::<f64>("A")?;
    check(a.is_finite() && a > 0.0, line, "A", || format!("must be positive, got {a}"))?;
    let (v_plus, line) = doc.required::<f64>("v_plus")?;
    check(v_plus.is_finite() && v_plus > 0.0, line, "v_plus", || {
        format!("must be positive, got {v_plus}")
    })?;
    let (u_minus, line) = doc.required::<f64>("u_minus")?;
    check(u_minus.is_finite(), line, "u_minus", || "must be finite".into())?;
    let v_minus = match doc.parsed::<f64>("v_minus")? {
        Some((v, line)) => {
            check(v.is_finite() && v > 0.0, line, "v_minus", || format!("must be positive, got {v}"))?;
            v
        }
        None if u_minus > 0.0 => return Err(config_error(0, "v_minus", "inflow data (u_minus > 0) needs v_minus")),
        None => v_plus,
    };
    let mu = match doc.parsed::<f64>("mu")? {
        Some((m, line)) => {
            check(m > 0.0 && m <= 1.0, line, "mu", || format!("must lie in (0, 1], got {m}"))?;
            m
        }
        None => DEFAULT_MU,
    };
    let r_max = match doc.parsed::<f64>("R_max")? {
        Some((r, line)) => {
            check(r.is_finite() && r >= 100.0, line, "R_max", || {
                format!("must be finite and at least 100, got {r}")
            })?;
            r
        }
        None => DEFAULT_R_MAX,
    };
    let points_per_decade = match doc.parsed::<usize>("points_per_decade")? {
        Some((p, line)) => {
            check(p >= 16, line, "points_per_decade", || format!("must be at least 16, got {p}"))?;
            p
        }
        None => DEFAULT_POINTS_PER_DECADE,
    };

    let mut tol = ToleranceSet::default();
    for (key, slot) in [
        ("ode_rel_tol", &mut tol.ode_rel_tol),
        ("ode_abs_tol", &mut tol.ode_abs_tol),
        ("picard_tol", &mut tol.picard_tol),
        ("quad_tol", &mut tol.quad_tol),
    ] {
        if let Some((v, line)) = doc.parsed::<f64>(key)? {
            check(v.is_finite() && v > 0.0, line, key, || format!("must be positive, got {v}"))?;
            *slot = v;
        }
    }
    if let Some((k, line)) = doc.parsed::<usize>("max_picard_iters")? {
        check(k >= 1, line, "max_picard_iters", || "must be at least 1".into())?;
        tol.max_picard_iters = k;
    }

    let mu_list = match doc.get("mu_list") {
        Some(e) => {
            let list = e
                .value
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|err| config_error(e.line, "mu_list", format!("cannot parse `{}`: {err}", e.value)))?;
            check(list.iter().all(|m| *m > 0.0 && *m <= 1.0), e.line, "mu_list", || {
                "every viscosity must lie in (0, 1]".into()
            })?;
            check(list.windows(2).all(|w| w[1] < w[0]), e.line, "mu_list", || {
                "viscosities must be strictly decreasing".into()
            })?;
            list
        }
        None if u_minus > 0.0 => INFLOW_MU_LIST.to_vec(),
        None => OUTFLOW_MU_LIST.to_vec(),
    };
    let alpha = match doc.parsed::<f64>("alpha")? {
        Some((al, line)) => {
            check(al > 0.0 && al < 1.0, line, "alpha", || format!("must lie in (0, 1), got {al}"))?;
            al
        }
        None => DEFAULT_ALPHA,
    };
    let lo = doc.parsed::<f64>("decay_r_min")?;
    let hi = doc.parsed::<f64>("decay_r_max")?;
    let decay_window = (lo.map_or(DECAY_R_MIN, |x| x.0), hi.map_or(r_max, |x| x.0));
    let line = hi.or(lo).map_or(0, |x| x.1);
    check(
        decay_window.0 >= 1.0 && decay_window.0 < decay_window.1 && decay_window.1 <= r_max,
        line,
        "decay_r_max",
        || format!("decay window [{}, {}] must satisfy 1 <= min < max <= R_max", decay_window.0, decay_window.1),
    )?;
    let out_dir = PathBuf::from(doc.get("out_dir").map_or("out", |e| e.value.as_str()));

    let gas = GasLaw::new(a, gamma).map_err(|e| config_error(0, "gas", e.to_string()))?;
    let flow = FlowConfig::new(n, v_plus, u_minus, v_minus, mu, gas).map_err(|e| config_error(0, "flow", e.to_string()))?;
    Ok(RunConfig {
        flow,
        r_max,
        points_per_decade,
        tol,
        mu_list,
        alpha,
        decay_window,
        out_dir,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&fs::read_to_string(path)?)
}

/// Outcome of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// A fitted rate or invariant fell outside its acceptance window.
    WindowFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::WindowFailed => 1,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::WindowFailed
        }
    }
}

/// Exit status for a dispatch result: 0 pass, 1 failed window, 2 error.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(_) => 2,
    }
}

fn header(cfg: &RunConfig, subcommand: &str) -> String {
    let mut s = format!("# subcommand = {subcommand}\n");
    for (k, v) in cfg.entries().into_iter().filter(|(k, _)| *k != "out_dir") {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s
}

fn write_table(path: &Path, preamble: &str, columns: &[&str], rows: impl Iterator<Item = Vec<f64>>, footer: Option<String>) -> Result<()> {
    let mut buf: Vec<u8> = preamble.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(columns).map_err(csv_error)?;
        for row in rows {
            w.write_record(row.iter().map(|x| x.to_string())).map_err(csv_error)?;
        }
        w.flush()?;
    }
    if let Some(f) = footer {
        buf.extend_from_slice(f.as_bytes());
        buf.push(b'\n');
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidState(format!("csv: {e}"))
}

/// A CSV table written by this module: column names and numeric rows.
/// Comment lines starting with `#` are skipped.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(csv_error)?;
    let columns = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::InvalidState(format!("bad number `{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((columns, rows))
}

fn write_profile(path: &Path, preamble: &str, nodes: &[f64], eta: &[f64], state: &FlowState) -> Result<()> {
    let rows = (0..nodes.len()).map(|i| vec![nodes[i], eta[i], state.rho[i], state.u[i]]);
    write_table(path, preamble, &["r", "eta", "rho", "u"], rows, None)
}

fn write_report(path: &Path, preamble: &str, report: &RateReport) -> Result<()> {
    let rows = report.parameter_values.iter().zip(&report.errors).map(|(p, e)| vec![*p, *e]);
    let footer = format!(
        "# slope={} intercept={} pass={}",
        report.fit.slope, report.fit.intercept, report.pass
    );
    write_table(path, preamble, &["param", "error"], rows, Some(footer))
}

fn announce(report: &RateReport) {
    println!(
        "{}: slope {:.4} (accepted [{}, {}]) -> {}",
        report.claim,
        report.fit.slope,
        report.window.0,
        report.window.1,
        if report.pass { "pass" } else { "FAIL" }
    );
}

fn grid_for(cfg: &RunConfig, mu: Option<f64>) -> Result<RadialGrid> {
    RadialGrid::build(cfg.r_max, mu, cfg.points_per_decade)
}

/// Runs `subcommand`, writing its CSV output under `cfg.out_dir`.
pub fn dispatch(subcommand: &str, cfg: &RunConfig, workers: Option<usize>) -> Result<Outcome> {
    let flow = &cfg.flow;
    let out = &cfg.out_dir;
    let pre = header(cfg, subcommand);
    match subcommand {
        "solve-ns" => {
            let grid = grid_for(cfg, Some(flow.mu))?;
            let sol = solve_ns(flow, &grid, &cfg.tol)?;
            let state = reconstruct_state(&sol, flow)?;
            write_profile(&out.join("ns_profile.csv"), &pre, grid.nodes(), &sol.eta, &state)?;
            println!(
                "{} solution: eps = {}, eta(1) = {}, conserved defect {:e}",
                sol.regime, sol.epsilon, sol.eta[0], sol.conserved_defect_max
            );
            Ok(Outcome::Pass)
        }
        "solve-euler" => {
            let grid = grid_for(cfg, None)?;
            let sol = solve_euler(flow, &grid, &cfg.tol)?;
            let state = euler_state(&sol, flow)?;
            write_profile(&out.join("euler_profile.csv"), &pre, grid.nodes(), &sol.eta, &state)?;
            println!(
                "{} solution: eps = {}, eta(1) = {}, {} sweeps",
                sol.regime, sol.epsilon, sol.eta[0], sol.iterations
            );
            Ok(Outcome::Pass)
        }
        "solve-bl" => {
            let euler = solve_euler(flow, &grid_for(cfg, None)?, &cfg.tol)?;
            let layer = solve_bl(flow, euler.eta[0], &cfg.tol)?;
            let rows = layer.y_nodes.iter().zip(&layer.eta_hat).map(|(y, e)| vec![*y, *e]);
            write_table(&out.join("bl_profile.csv"), &pre, &["y", "eta_hat"], rows, None)?;
            println!("layer rate a_eps = {}, eta_hat(0) = {}", layer.a_eps, layer.eta_hat_0());
            Ok(Outcome::Pass)
        }
        "outflow-limit" => {
            let study = outflow_limit_study(flow, &cfg.mu_list, &cfg.settings(workers))?;
            write_report(&out.join("outflow_eta.csv"), &pre, &study.eta)?;
            write_report(&out.join("outflow_u.csv"), &pre, &study.velocity)?;
            announce(&study.eta);
            announce(&study.velocity);
            Ok(Outcome::from_pass(study.pass()))
        }
        "inflow-limit" => {
            let study = inflow_limit_study(flow, &cfg.mu_list, cfg.alpha, &cfg.settings(workers))?;
            write_report(&out.join("inflow_far_field.csv"), &pre, &study.far_field)?;
            write_report(&out.join("inflow_layer.csv"), &pre, &study.layer)?;
            write_report(&out.join("inflow_global.csv"), &pre, &study.global)?;
            announce(&study.far_field);
            announce(&study.layer);
            announce(&study.global);
            Ok(Outcome::from_pass(study.pass()))
        }
        "decay" => {
            let expected = -2.0 * (flow.n as f64 - 1.0);
            let euler = solve_euler(flow, &grid_for(cfg, None)?, &cfg.tol)?;
            let e_rep = decay_study(euler.grid.nodes(), &euler.eta, expected, cfg.decay_window)?;
            write_report(&out.join("decay_euler.csv"), &pre, &e_rep)?;
            announce(&e_rep);
            let ns = solve_ns(flow, &grid_for(cfg, Some(flow.mu))?, &cfg.tol)?;
            let ns_rep = match flow.regime() {
                Regime::Inflow => {
                    let u = reconstruct_state(&ns, flow)?.u;
                    decay_study(ns.grid.nodes(), &u, -(flow.n as f64 - 1.0), cfg.decay_window)?
                }
                _ => decay_study(ns.grid.nodes(), &ns.eta, expected, cfg.decay_window)?,
            };
            write_report(&out.join("decay_ns.csv"), &pre, &ns_rep)?;
            announce(&ns_rep);
            Ok(Outcome::from_pass(e_rep.pass && ns_rep.pass))
        }
        "verify" => verify(cfg),
        other => Err(Error::invalid(format!(
            "unknown subcommand `{other}`; expected one of {}",
            SUBCOMMANDS.join(", ")
        ))),
    }
}

struct Checklist {
    all_pass: bool,
}

impl Checklist {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        self.all_pass &= pass;
        println!("{} {name}: {detail}", if pass { "pass" } else { "FAIL" });
    }
}

/// Invariant checks of every solver on the configured data.
fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let flow = &cfg.flow;
    let mut list = Checklist { all_pass: true };

    let euler = solve_euler(flow, &grid_for(cfg, None)?, &cfg.tol)?;
    let bern = bernoulli_defect(&euler, flow)?;
    list.record("euler bernoulli", bern < 1e-8, format!("max defect {bern:e}"));
    let ratios = euler.contraction_ratios();
    let worst = ratios.iter().skip(1).copied().fold(0.0, f64::max);
    list.record("euler contraction", worst <= 0.5, format!("worst ratio after sweep 2: {worst:e}"));

    let grid = grid_for(cfg, Some(flow.mu))?;
    let ns = solve_ns(flow, &grid, &cfg.tol)?;
    list.record(
        "ns conserved quantity",
        ns.conserved_defect_max < 1e-7,
        format!("max defect {:e}", ns.conserved_defect_max),
    );

    if flow.regime() == Regime::Trivial {
        let state = reconstruct_state(&ns, flow)?;
        let exact = ns.eta.iter().chain(&euler.eta).all(|&e| e == 0.0) && state.u.iter().all(|&u| u == 0.0);
        list.record("trivial state", exact, "eta and u vanish identically".into());
    }

    if flow.regime() == Regime::Inflow {
        let layer = solve_bl(flow, euler.eta[0], &cfg.tol)?;
        let rate = bl_decay_rate(&layer)?;
        let rel = (rate - layer.a_eps).abs() / layer.a_eps;
        list.record("layer decay rate", rel <= 0.05, format!("{rate} vs a_eps {}", layer.a_eps));
        let duhamel = duhamel_profile(flow, euler.eta[0], &layer.y_nodes, 32, &cfg.tol)?;
        let gap = crate::profile::sup_abs_diff(&duhamel, &layer.eta_hat);
        list.record("layer duhamel cross-check", gap < 1e-9, format!("sup gap {gap:e}"));
        let fine = RadialGrid::union([&grid, &euler.grid])?;
        let euler_fine = solve_euler(flow, &fine, &cfg.tol)?;
        let comp = composite_profile(&euler_fine, &solve_bl(flow, euler_fine.eta[0], &cfg.tol)?, &grid, flow.mu)?;
        list.record(
            "composite boundary value",
            comp.eta_comp[0] == flow.eta_minus(),
            format!("eta_comp(1) = {}", comp.eta_comp[0]),
        );
    }
    Ok(Outcome::from_pass(list.all_pass))
}
