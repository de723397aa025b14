//! Command execution. Every command returns its tables and a run report;
//! nothing touches the filesystem until all work is done.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use morreycex_core::bumptrain::{verify_layout, OffsetSchedule, Profile1D, SigmaTrain};
use morreycex_core::cex::{normalize, norm_table, sharpness_report, sharpness_table, CexFamily};
use morreycex_core::export::{self, fmt_f64, Table};
use morreycex_core::maxops::{
    hl_maximal, poincare_ratio, random_field, sharp_maximal, verify_holder_chain, verify_lemma1, verify_sobolev,
    GridField, SummandKind, TestFunctionSpec, WindowLattice,
};
use morreycex_core::paramlab::{validate, Mode, ParamSet};
use morreycex_core::Error;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Command, Format, RunConfig, DEFAULT_SEED};
use crate::error::CliError;
use crate::output::{encode_table, table_json, to_pretty, write_outputs};

pub const DEFAULT_COUNT: usize = 4;
pub const DEFAULT_CELLS: usize = 256;
pub const DEFAULT_PADDING: usize = 32;
pub const DEFAULT_HALF_WIDTH: f64 = 1.0;
pub const DEFAULT_S: f64 = 2.0;
pub const DEFAULT_CEX_N: (u32, u32) = (30, 44);
pub const DEFAULT_SIGMA_N: (u32, u32) = (20, 30);
pub const DEFAULT_SIGMA_R: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
/// Above this many bumps `sigma` skips the quadrature cross-check.
pub const SIGMA_QUADRATURE_LIMIT: u128 = 20_000;
/// Name of the aggregate written by `report`.
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: Command,
    /// Canonical text of the configuration.
    pub config: String,
    pub seeds: Vec<u64>,
    pub checks: Vec<Check>,
    /// Wall time per stage; printed, never written to files.
    pub stages: Vec<(String, Duration)>,
}

impl RunReport {
    fn new(cfg: &RunConfig, command: Command) -> Self {
        Self {
            command,
            config: cfg.to_text(),
            seeds: Vec::new(),
            checks: Vec::new(),
            stages: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        assert!(self.checks.iter().all(|c| c.name != name), "check {name} recorded twice");
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((name.to_string(), start.elapsed()));
        out
    }

    pub fn to_json(&self, outputs: &[String]) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
            .collect();
        json!({
            "command": self.command.name(),
            "config": self.config,
            "seeds": self.seeds,
            "checks": checks,
            "pass": self.passed(),
            "outputs": outputs,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    /// `(file name, contents)`, the run report included.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            0
        } else {
            1
        }
    }
}

fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::MissingRequired(key.to_string()))
}

fn params(cfg: &RunConfig, default_mode: Mode) -> Result<ParamSet, CliError> {
    let d = require(cfg.d, "d")?;
    let p = require(cfg.p, "p")?;
    let q = require(cfg.q, "q")?;
    let q1 = require(cfg.q1, "q1")?;
    validate(d, p, q, q1, cfg.mode.unwrap_or(default_mode)).map_err(|e| CliError::Invalid(e.into()))
}

fn seeds(cfg: &RunConfig) -> Vec<u64> {
    cfg.seeds.as_ref().map_or(vec![DEFAULT_SEED], |s| s.values())
}

fn n_list(range: (u32, u32)) -> Vec<u32> {
    (range.0..=range.1).collect()
}

fn worst(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// Random field settings shared by the grid commands.
#[derive(Debug, Clone, Copy)]
struct FieldSpec {
    dim: usize,
    count: usize,
    kind: SummandKind,
    cells: usize,
    padding: usize,
    half_width: f64,
}

impl FieldSpec {
    fn from_config(cfg: &RunConfig, dim: u32) -> Self {
        Self {
            dim: dim as usize,
            count: cfg.count.unwrap_or(DEFAULT_COUNT),
            kind: cfg.kind.unwrap_or(SummandKind::Gaussian),
            cells: cfg.cells.unwrap_or(DEFAULT_CELLS),
            padding: cfg.padding.unwrap_or(DEFAULT_PADDING),
            half_width: cfg.half_width.unwrap_or(DEFAULT_HALF_WIDTH),
        }
    }

    /// Same physical field at `factor` times the resolution.
    fn refined(self, factor: usize) -> Self {
        Self {
            cells: self.cells * factor,
            padding: self.padding * factor,
            ..self
        }
    }

    fn field(&self, seed: u64) -> Result<GridField, Error> {
        let spec = TestFunctionSpec {
            padding: self.padding,
            ..TestFunctionSpec::new(seed, self.count, self.kind)
        };
        let bounds = vec![(-self.half_width, self.half_width); self.dim];
        random_field(&spec, self.dim, &bounds, &vec![self.cells; self.dim])
    }
}

/// Runs `cfg`. `dir` is only read, and only by `report`.
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let command = require(cfg.command, "command")?;
    let mut report = RunReport::new(cfg, command);
    let format = cfg.format.unwrap_or(Format::Csv);
    let tables = match command {
        Command::Validate => run_validate(cfg)?,
        Command::Sigma => run_sigma(cfg, &mut report)?,
        Command::VerifyLemma1 => run_lemma1(cfg, &mut report)?,
        Command::VerifySobolev => run_sobolev(cfg, &mut report)?,
        Command::VerifyHolder => run_holder(cfg, &mut report)?,
        Command::VerifyMaximal => run_maximal(cfg, &mut report)?,
        Command::VerifyPoincare => run_poincare(cfg, &mut report)?,
        Command::CexNorms => run_cex_norms(cfg, &mut report)?,
        Command::CexFit => run_cex_fit(cfg, &mut report)?,
        Command::Report => return run_report(dir, report),
    };
    let mut files: Vec<(String, String)> = tables.iter().map(|(stem, t)| encode_table(stem, t, format)).collect();
    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    files.push((
        format!("{}_report.json", command.name().replace('-', "_")),
        to_pretty(&report.to_json(&names)),
    ));
    Ok(Outcome { report, files })
}

/// Runs `cfg` and writes its outputs to the configured directory. Returns
/// the process exit code.
pub fn execute(cfg: &RunConfig) -> i32 {
    let dir = cfg.output_dir();
    let outcome = match run(cfg, &dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = write_outputs(&dir, &outcome.files) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    for (stage, t) in &outcome.report.stages {
        eprintln!("stage {stage}: {:.3} s", t.as_secs_f64());
    }
    for c in &outcome.report.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for (name, _) in &outcome.files {
        println!("wrote {}", dir.join(name).display());
    }
    outcome.exit_code()
}

type Tables = Vec<(&'static str, Table)>;

fn run_validate(cfg: &RunConfig) -> Result<Tables, CliError> {
    let ps = params(cfg, Mode::Verification)?;
    let range = ps.admissible_range();
    let ext = ps.extended_range();
    let mut t = Table::new([
        "d", "p", "q", "q1", "mode", "theta", "alpha", "p_star", "r_low", "range_lo", "range_hi", "ext_lo", "ext_hi",
    ]);
    t.push(vec![
        ps.d().to_string(),
        fmt_f64(ps.p()),
        fmt_f64(ps.q()),
        fmt_f64(ps.q1()),
        ps.mode().to_string(),
        fmt_f64(ps.theta()),
        fmt_f64(ps.alpha()),
        fmt_f64(ps.sobolev_exp()),
        fmt_f64(ps.r_low()),
        fmt_f64(range.lo),
        fmt_f64(range.hi),
        ext.map_or(String::new(), |e| fmt_f64(e.lo)),
        ext.map_or(String::new(), |e| fmt_f64(e.hi)),
    ]);
    Ok(vec![("validate", t)])
}

fn sigma_theta(cfg: &RunConfig) -> Result<f64, CliError> {
    if let Some(theta) = cfg.theta {
        return Ok(theta);
    }
    if cfg.d.is_some() || cfg.p.is_some() || cfg.q.is_some() || cfg.q1.is_some() {
        return Ok(params(cfg, Mode::Counterexample)?.theta());
    }
    Err(CliError::MissingRequired("theta".into()))
}

fn run_sigma(cfg: &RunConfig, report: &mut RunReport) -> Result<Tables, CliError> {
    let theta = sigma_theta(cfg)?;
    let (n_lo, n_hi) = cfg.n_range.unwrap_or(DEFAULT_SIGMA_N);
    let rs = cfg.r_list.clone().unwrap_or_else(|| DEFAULT_SIGMA_R.to_vec());
    let top = OffsetSchedule::new(theta, n_hi, cfg.k0)?;
    let ns = n_list((n_lo, n_hi));
    let trains: Vec<SigmaTrain> = ns
        .iter()
        .map(|&n| Ok(SigmaTrain::new(top.with_n(n)?, Profile1D::trapezoid())))
        .collect::<Result<_, Error>>()?;

    let rows = report.stage("closed norms", || {
        trains
            .iter()
            .map(|t| t.norm_rows(&rs))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rows: Vec<_> = rows.into_iter().flatten().collect();

    let layout = report.stage("layout", || verify_layout(theta, n_hi))?;
    report.check(
        "layout",
        layout.containment && layout.disjoint(),
        format!(
            "k0={} containment={} min_gap={}",
            layout.k0,
            layout.containment,
            fmt_f64(layout.min_within_gap.min(layout.min_cross_gap))
        ),
    );

    let small: Vec<&SigmaTrain> = trains.iter().filter(|t| t.bump_count() <= SIGMA_QUADRATURE_LIMIT).collect();
    if !small.is_empty() {
        let errs = report.stage("quadrature", || {
            small
                .par_iter()
                .flat_map_iter(|t| rs.iter().map(move |&r| (t, r)))
                .map(|(t, r)| {
                    let closed = t.lr_norm_closed(r)?;
                    Ok((closed - t.lr_norm_quadrature(r, 1e-9)?).abs() / closed)
                })
                .collect::<Result<Vec<f64>, Error>>()
        })?;
        let e = worst(errs);
        report.check("closed_matches_quadrature", e <= 1e-6, format!("max relative error {}", fmt_f64(e)));
    }

    let incr: Vec<f64> = trains
        .windows(2)
        .filter(|w| w[0].schedule().n() >= 30)
        .map(|w| {
            let a = w[0].schedule().total_count() as f64;
            let b = w[1].schedule().total_count() as f64;
            ((b / a).log2() - theta).abs()
        })
        .collect();
    if !incr.is_empty() {
        let e = worst(incr);
        report.check("count_increments", e <= 0.02, format!("max |log2 increment - theta| {}", fmt_f64(e)));
    }
    Ok(vec![
        ("sigma_schedule", export::schedule_table(&top.rows())),
        ("sigma_norms", export::norm_table(&rows)),
    ])
}

fn grid_fields(cfg: &RunConfig, ps: &ParamSet, report: &mut RunReport) -> Result<Vec<(u64, GridField)>, CliError> {
    let spec = FieldSpec::from_config(cfg, ps.d());
    report.seeds = seeds(cfg);
    let seeds = report.seeds.clone();
    let fields = report.stage("fields", || {
        seeds
            .par_iter()
            .map(|&s| spec.field(s).map(|f| (s, f)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(fields)
}

fn run_lemma1(cfg: &RunConfig, report: &mut RunReport) -> Result<Tables, CliError> {
    let ps = params(cfg, Mode::Verification)?;
    let fields = grid_fields(cfg, &ps, report)?;
    let rows = report.stage("lemma1", || {
        fields
            .par_iter()
            .map(|(s, f)| Ok((*s, verify_lemma1(f, &ps)?, verify_lemma1(&f.scale(2.0), &ps)?.ratio)))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut t = Table::new(["seed", "lhs", "rhs_grad", "rhs_morrey", "ratio", "ratio_doubled"]);
    for (s, rep, doubled) in &rows {
        t.push(vec![
            s.to_string(),
            fmt_f64(rep.lhs),
            fmt_f64(rep.rhs_grad),
            fmt_f64(rep.rhs_morrey),
            fmt_f64(rep.ratio),
            fmt_f64(*doubled),
        ]);
    }
    let ok = rows.iter().all(|(_, r, _)| r.ratio.is_finite() && r.ratio > 0.0);
    let max = worst(rows.iter().map(|(_, r, _)| r.ratio));
    report.check("ratio_finite", ok, format!("max ratio {}", fmt_f64(max)));
    let drift = worst(rows.iter().map(|(_, r, d)| (d / r.ratio - 1.0).abs()));
    report.check("amplitude_invariant", drift <= 1e-10, format!("max drift {}", fmt_f64(drift)));
    Ok(vec![("lemma1", t)])
}

fn run_sobolev(cfg: &RunConfig, report: &mut RunReport) -> Result<Tables, CliError> {
    let ps = params(cfg, Mode::Verification)?;
    let fields = grid_fields(cfg, &ps, report)?;
    let rows = report.stage("sobolev", || {
        fields
            .par_iter()
            .map(|(s, f)| Ok((*s, verify_sobolev(f, &ps)?, verify_sobolev(&f.scale(2.0), &ps)?)))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut t = Table::new(["seed", "ratio", "ratio_doubled"]);
    for (s, r, d) in &rows {
        t.push(vec![s.to_string(), fmt_f64(*r), fmt_f64(*d)]);
    }
    let ok = rows.iter().all(|(_, r, _)| r.is_finite() && *r > 0.0);
    report.check("ratio_finite", ok, format!("max ratio {}", fmt_f64(worst(rows.iter().map(|x| x.1)))));
    let drift = worst(rows.iter().map(|(_, r, d)| (d / r - 1.0).abs()));
    report.check("amplitude_invariant", drift <= 1e-10, format!("max drift {}", fmt_f64(drift)));
    Ok(vec![("sobolev", t)])
}

fn run_holder(cfg: &RunConfig, report: &mut RunReport) -> Result<Tables, CliError> {
    let ps = params(cfg, Mode::Verification)?;
    let range = ps.admissible_range();
    let rs = cfg.r_list.clone().unwrap_or_else(|| range.sample(5));
    if let Some(&r) = rs.iter().find(|&&r| !range.contains(r)) {
        return Err(CliError::Invalid(Error::ROutOfRange {
            r,
            lo: range.lo,
            hi: range.hi,
        }));
    }
    let fields = grid_fields(cfg, &ps, report)?;
    let rows = report.stage("holder", || {
        fields
            .par_iter()
            .flat_map_iter(|(s, f)| rs.iter().map(move |&r| (*s, f, r)))
            .map(|(s, f, r)| Ok((s, verify_holder_chain(f, &ps, r)?)))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut t = Table::new(["seed", "r", "theta_interp", "lhs", "bound", "slack"]);
    for (s, h) in &rows {
        t.push(vec![
            s.to_string(),
            fmt_f64(h.r),
            fmt_f64(h.theta_interp),
            fmt_f64(h.lhs),
            fmt_f64(h.bound),
            fmt_f64(h.slack),
        ]);
    }
    let bad = rows.iter().filter(|(_, h)| !(h.slack >= -1e-12 * h.bound)).count();
    report.check("slack_nonnegative", bad == 0, format!("{bad} of {} rows below -1e-12 bound", rows.len()));
    let ends: Vec<f64> = rows
        .iter()
        .filter(|(_, h)| h.r == range.lo || h.r == range.hi)
        .map(|(_, h)| h.slack)
        .collect();
    if !ends.is_empty() {
        let ok = ends.iter().all(|&s| s == 0.0);
        report.check("endpoint_slack_zero", ok, format!("{} endpoint rows", ends.len()));
    }
    Ok(vec![("holder", t)])
}

#[derive(Debug, Clone, Copy)]
struct MaximalRow {
    seed: u64,
    ratios: [f64; 4],
    /// `min (M f - |f|)`.
    dominance: f64,
    /// `max (M# f - 2 M f)`.
    sharp_excess: f64,
    scale: f64,
}

fn maximal_row(seed: u64, f: &GridField, s: f64, lattice: &WindowLattice) -> Result<MaximalRow, Error> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::SOutOfRange(s));
    }
    if f.is_zero() {
        return Err(Error::ZeroField);
    }
    let m = hl_maximal(f, lattice)?;
    let sharp = sharp_maximal(f, lattice)?;
    let (nf, nm, ns) = (f.lp_norm(s)?, m.lp_norm(s)?, sharp.lp_norm(s)?);
    let mut dominance = f64::INFINITY;
    let mut sharp_excess = f64::NEG_INFINITY;
    for i in 0..f.len() {
        dominance = dominance.min(m.values()[i] - f.values()[i].abs());
        sharp_excess = sharp_excess.max(sharp.values()[i] - 2.0 * m.values()[i]);
    }
    Ok(MaximalRow {
        seed,
        ratios: [nf / ns, ns / nf, nf / nm, nm / nf],
        dominance,
        sharp_excess,
        scale: worst(m.values().iter().copied()),
    })
}

fn run_maximal(cfg: &RunConfig, report: &mut RunReport) -> Result<Tables, CliError> {
    let ps = params(cfg, Mode::Verification)?;
    let s = cfg.s.unwrap_or(DEFAULT_S);
    let fields = grid_fields(cfg, &ps, report)?;
    let lattice = WindowLattice::dyadic(FieldSpec::from_config(cfg, ps.d()).padding);
    let rows = report.stage("maximal", || {
        fields
            .par_iter()
            .map(|(seed, f)| maximal_row(*seed, f, s, &lattice))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut t = Table::new(["seed", "s", "r1", "r2", "r3", "r4"]);
    for row in &rows {
        let mut cells = vec![row.seed.to_string(), fmt_f64(s)];
        cells.extend(row.ratios.iter().map(|&x| fmt_f64(x)));
        t.push(cells);
    }
    let finite = rows.iter().all(|r| r.ratios.iter().all(|x| x.is_finite() && *x > 0.0));
    report.check("ratios_finite", finite, format!("{} fields", rows.len()));
    let dom = rows.iter().all(|r| r.dominance >= -1e-12 * r.scale);
    report.check("maximal_dominates_field", dom, "M f >= |f| at every cell");
    let sh = rows.iter().all(|r| r.sharp_excess <= 1e-12 * r.scale);
    report.check("sharp_below_twice_maximal", sh, "M# f <= 2 M f at every cell");
    let r3 = worst(rows.iter().map(|r| r.ratios[2]));
    report.check("r3_at_most_one", r3 <= 1.0 + 1e-12, format!("max r3 {}", fmt_f64(r3)));
    Ok(vec![("maximal", t)])
}

/// Lattice points per axis over the middle half of the box.
pub const POINCARE_LATTICE: usize = 16;
/// Sample centers need `|u| >= POINCARE_LEVEL · max |u|` on the coarse grid;
/// far tails vary below the cell size and are not resolved at either level.
pub const POINCARE_LEVEL: f64 = 1e-2;

/// `POINCARE_LATTICE^d` points evenly spread over the middle half of the box.
fn poincare_lattice(dim: usize, half_width: f64) -> Vec<Vec<f64>> {
    let k = POINCARE_LATTICE;
    let axis: Vec<f64> = (0..k).map(|i| -half_width / 2.0 + half_width * (i as f64 + 0.5) / k as f64).collect();
    let mut pts = vec![Vec::new()];
    for _ in 0..dim {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    pts
}

fn poincare_centers(field: &GridField, lattice: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let top = worst(field.values().iter().map(|v| v.abs()));
    lattice
        .iter()
        .filter(|x| field.get(field.locate(x)).abs() >= POINCARE_LEVEL * top)
        .cloned()
        .collect()
}

pub const POINCARE_COARSE_RADII: [usize; 3] = [2, 4, 8];

fn run_poincare(cfg: &RunConfig, report: &mut RunReport) -> Result<Tables, CliError> {
    let ps = params(cfg, Mode::Verification)?;
    let coarse = FieldSpec::from_config(cfg, ps.d());
    let fine = coarse.refined(2);
    report.seeds = seeds(cfg);
    let lattice = poincare_lattice(coarse.dim, coarse.half_width);
    let coarse_lattice = WindowLattice::with_radii(&POINCARE_COARSE_RADII);
    let fine_radii: Vec<usize> = POINCARE_COARSE_RADII.iter().map(|r| 2 * r).collect();
    let fine_lattice = WindowLattice::with_radii(&fine_radii);
    let seeds = report.seeds.clone();
    let rows = report.stage("poincare", || {
        seeds
            .par_iter()
            .map(|&s| {
                let f = coarse.field(s)?;
                let centers = poincare_centers(&f, &lattice);
                let a = poincare_ratio(&f, &coarse_lattice, &centers);
                let b = poincare_ratio(&fine.field(s)?, &fine_lattice, &centers);
                Ok((s, a, b))
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut t = Table::new(["seed", "coarse", "fine", "change"]);
    for (s, a, b) in &rows {
        t.push(vec![s.to_string(), fmt_f64(*a), fmt_f64(*b), fmt_f64(b / a - 1.0)]);
    }
    let change = worst(rows.iter().map(|(_, a, b)| (b / a - 1.0).abs()));
    let ok = rows.iter().all(|(_, a, b)| a.is_finite() && *a > 0.0 && b.is_finite()) && change <= 0.1;
    report.check("refinement_stable", ok, format!("max |fine/coarse - 1| {}", fmt_f64(change)));
    Ok(vec![("poincare", t)])
}

fn cex_family(cfg: &RunConfig) -> Result<CexFamily, CliError> {
    let ps = params(cfg, Mode::Counterexample)?;
    Ok(CexFamily::with_profiles(ps, Profile1D::trapezoid(), Profile1D::trapezoid(), cfg.k0)?)
}

/// `r_low - 1/2, r_low, r_low + 1, p*`.
fn cex_exponents(cfg: &RunConfig, ps: &ParamSet) -> Vec<f64> {
    cfg.r_list.clone().unwrap_or_else(|| {
        let r = ps.r_low();
        vec![r - 0.5, r, r + 1.0, ps.sobolev_exp()]
    })
}

fn run_cex_norms(cfg: &RunConfig, report: &mut RunReport) -> Result<Tables, CliError> {
    let family = cex_family(cfg)?;
    let rs = cex_exponents(cfg, family.params());
    let ns = n_list(cfg.n_range.unwrap_or(DEFAULT_CEX_N));
    let family = report.stage("normalize", || normalize(&family, &ns))?;
    let reps = report.stage("norms", || family.norm_reports(&ns, &rs))?;
    let s = fmt_f64(family.normalization());

    let g = worst(reps.iter().map(|r| r.grad_lp));
    report.check("grad_at_most_one", g <= 1.0, format!("max {} with s = {s}", fmt_f64(g)));
    let m = worst(reps.iter().map(|r| r.morrey.sup));
    report.check("morrey_at_most_one", m <= 1.0, format!("max {} with s = {s}", fmt_f64(m)));
    let m_min = reps.iter().map(|r| r.morrey.sup).fold(f64::INFINITY, f64::min);
    let spread = m / m_min;
    report.check("morrey_spread", spread <= 4.0, format!("max/min {}", fmt_f64(spread)));
    let incr: Vec<f64> = reps
        .windows(2)
        .filter(|w| w[0].n >= 30)
        .map(|w| (w[1].grad_lp / w[0].grad_lp).log2().abs())
        .collect();
    if !incr.is_empty() {
        let e = worst(incr);
        report.check("grad_increments_flat", e <= 0.02, format!("max |log2 increment| {}", fmt_f64(e)));
    }
    Ok(vec![("cex_norms", norm_table(&reps))])
}

fn run_cex_fit(cfg: &RunConfig, report: &mut RunReport) -> Result<Tables, CliError> {
    let family = cex_family(cfg)?;
    let rs = cex_exponents(cfg, family.params());
    let (n_lo, n_hi) = cfg.n_range.unwrap_or(DEFAULT_CEX_N);
    let rows = report.stage("fit", || sharpness_report(&family, &rs, n_lo, n_hi))?;
    let disagree = rows.iter().filter(|r| !r.agrees).count();
    report.check(
        "verdict_matches_threshold",
        disagree == 0,
        format!("{disagree} of {} exponents disagree with r >= r_low", rows.len()),
    );
    let dev = worst(rows.iter().map(|r| {
        let tol = if r.predicted == 0.0 { 0.02 } else { 0.05 };
        (r.slope - r.predicted).abs() / tol
    }));
    report.check(
        "slope_matches_exponent",
        dev <= 1.0,
        format!("worst deviation {} of tolerance", fmt_f64(dev)),
    );
    Ok(vec![("cex_fit", sharpness_table(&rows))])
}

/// Collects every table (CSV or JSON) and run report in `dir` into one JSON
/// document. A table written in both formats appears once, from the CSV.
fn run_report(dir: &Path, mut report: RunReport) -> Result<Outcome, CliError> {
    let io = |source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut names = BTreeSet::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        if let Some(name) = entry.file_name().to_str() {
            names.insert(name.to_string());
        }
    }
    let mut tables = Map::new();
    let mut reports = Map::new();
    let mut unreadable = Vec::new();
    for name in &names {
        let path = dir.join(name);
        let read = || {
            std::fs::read_to_string(&path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })
        };
        if let Some(stem) = name.strip_suffix("_report.json") {
            match serde_json::from_str::<Value>(&read()?) {
                Ok(v) => {
                    reports.insert(stem.to_string(), v);
                }
                Err(_) => unreadable.push(name.clone()),
            }
        } else if let Some(stem) = name.strip_suffix(".json").filter(|_| name != SUMMARY_FILE) {
            match serde_json::from_str::<Value>(&read()?) {
                // Names are sorted, so a CSV twin was already taken.
                Ok(v) if v.get("columns").is_some() && v.get("rows").is_some() => {
                    tables.entry(stem.to_string()).or_insert(v);
                }
                _ => unreadable.push(name.clone()),
            }
        } else if let Some(stem) = name.strip_suffix(".csv") {
            match Table::from_csv(&read()?) {
                Some(t) => {
                    tables.insert(stem.to_string(), table_json(&t));
                }
                None => unreadable.push(name.clone()),
            }
        }
    }
    report.check(
        "inputs_readable",
        unreadable.is_empty() && !tables.is_empty(),
        format!("{} tables, {} reports, unreadable: {:?}", tables.len(), reports.len(), unreadable),
    );
    let failing: Vec<&String> = reports
        .iter()
        .filter(|(_, v)| v.get("pass") != Some(&Value::Bool(true)))
        .map(|(k, _)| k)
        .collect();
    report.check("all_reports_pass", failing.is_empty(), format!("failing: {failing:?}"));
    let mut summary = match report.to_json(&[SUMMARY_FILE.to_string()]) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    summary.insert("tables".into(), Value::Object(tables));
    summary.insert("reports".into(), Value::Object(reports));
    let files = vec![(SUMMARY_FILE.to_string(), to_pretty(&Value::Object(summary)))];
    Ok(Outcome { report, files })
}
