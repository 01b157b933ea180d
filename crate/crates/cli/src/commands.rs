//! The `analytic`, `simulate` and `compare` subcommands.

use crate::config::{CurveSpec, ScenarioConfig};
use crate::output::{fingerprint, fmt_num, partial_path, read_partial, write_atomic, write_partial, Progress, Table};
use crate::CliError;
use noma_core::{AnalyticPoint, CurvePoint, Engine, SignVariant};
use std::io::Write;
use std::path::PathBuf;

/// Points outside `|z| <= Z_LIMIT` fail the comparison.
pub const Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analytic,
    Simulate,
    Compare,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
        }
    }

    pub fn header(&self) -> Vec<&'static str> {
        match self {
            Command::Analytic => ANALYTIC_HEADER.to_vec(),
            Command::Simulate => SIMULATE_HEADER.to_vec(),
            Command::Compare => COMPARE_HEADER.to_vec(),
        }
    }
}

pub const ANALYTIC_HEADER: [&str; 3] = ["axis_value", "ber_far_analytic", "ber_near_analytic"];

pub const SIMULATE_HEADER: [&str; 9] = [
    "axis_value",
    "ber_far_mc",
    "stderr_far",
    "ber_near_mc",
    "stderr_near",
    "trials",
    "errors_far",
    "errors_near",
    "errors_near_sic_wrong",
];

/// `ber_far_analytic` and `z_far` use the selected sign variant; the
/// per-variant columns let one run judge both.
pub const COMPARE_HEADER: [&str; 19] = [
    "axis_value",
    "ber_far_analytic",
    "ber_near_analytic",
    "ber_far_mc",
    "stderr_far",
    "ber_near_mc",
    "stderr_near",
    "trials",
    "errors_far",
    "errors_near",
    "errors_near_sic_wrong",
    "z_far",
    "z_near",
    "ber_far_derived_plus",
    "ber_far_paper_minus",
    "z_far_derived_plus",
    "z_far_paper_minus",
    "checked_far",
    "checked_near",
];

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub resume: bool,
    pub quiet: bool,
}

/// `(mc - analytic) / stderr`.
///
/// When the estimate has zero variance (no errors, or every bit wrong) the
/// binomial standard error at the analytic value is used instead.
pub fn z_score(mc: f64, stderr: f64, analytic: f64, bits: u64) -> f64 {
    let diff = mc - analytic;
    let sigma = if stderr > 0.0 {
        stderr
    } else {
        (analytic * (1.0 - analytic) / bits as f64).sqrt()
    };
    if diff == 0.0 {
        0.0
    } else {
        diff / sigma
    }
}

fn analytic_row(v: f64, a: &AnalyticPoint, variant: SignVariant) -> Vec<String> {
    vec![fmt_num(v), fmt_num(a.far(variant)), fmt_num(a.near)]
}

fn simulate_row(p: &CurvePoint) -> Vec<String> {
    let mc = &p.mc;
    vec![
        fmt_num(p.axis_value),
        fmt_num(mc.far.ber()),
        fmt_num(mc.far.stderr()),
        fmt_num(mc.near.ber()),
        fmt_num(mc.near.stderr()),
        mc.trials().to_string(),
        mc.far.bit_errors.to_string(),
        mc.near.bit_errors.to_string(),
        mc.near_errors_sic_wrong.to_string(),
    ]
}

/// Far-user points are gated on the larger of the two variants' values, so a
/// variant that collapses to 0 cannot exempt itself from the check.
fn far_checked(a: &AnalyticPoint, min_analytic_ber: f64) -> bool {
    a.far_derived_plus.max(a.far_paper_minus) >= min_analytic_ber
}

fn compare_row(p: &CurvePoint, variant: SignVariant, min_analytic_ber: f64) -> Vec<String> {
    let mc = &p.mc;
    let a = &p.analytic;
    let z_far_of = |v: SignVariant| z_score(mc.far.ber(), mc.far.stderr(), a.far(v), mc.far.bits());
    let z_near = z_score(mc.near.ber(), mc.near.stderr(), a.near, mc.near.bits());
    let flag = |b: bool| if b { "1" } else { "0" }.to_string();
    vec![
        fmt_num(p.axis_value),
        fmt_num(a.far(variant)),
        fmt_num(a.near),
        fmt_num(mc.far.ber()),
        fmt_num(mc.far.stderr()),
        fmt_num(mc.near.ber()),
        fmt_num(mc.near.stderr()),
        mc.trials().to_string(),
        mc.far.bit_errors.to_string(),
        mc.near.bit_errors.to_string(),
        mc.near_errors_sic_wrong.to_string(),
        fmt_num(z_far_of(variant)),
        fmt_num(z_near),
        fmt_num(a.far_derived_plus),
        fmt_num(a.far_paper_minus),
        fmt_num(z_far_of(SignVariant::DerivedPlus)),
        fmt_num(z_far_of(SignVariant::PaperMinus)),
        flag(far_checked(a, min_analytic_ber)),
        flag(a.near >= min_analytic_ber),
    ]
}

/// Statistics over the rows of one or more compare tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareSummary {
    pub points: usize,
    /// Points where at least one user was checked.
    pub checked_points: usize,
    pub max_abs_z_far: f64,
    pub max_abs_z_near: f64,
    pub failures: usize,
    /// Checked far-user points, over which both sign variants are scored.
    pub variant_points: usize,
    pub max_abs_z_derived_plus: f64,
    pub max_abs_z_paper_minus: f64,
}

impl Default for CompareSummary {
    fn default() -> Self {
        Self {
            points: 0,
            checked_points: 0,
            max_abs_z_far: 0.0,
            max_abs_z_near: 0.0,
            failures: 0,
            variant_points: 0,
            max_abs_z_derived_plus: 0.0,
            max_abs_z_paper_minus: 0.0,
        }
    }
}

impl CompareSummary {
    pub fn from_table(t: &Table) -> Result<Self, CliError> {
        let col = |name: &str| t.column(name).ok_or_else(|| CliError::Io(format!("compare table lacks {name}")));
        let idx = [
            col("z_far")?,
            col("z_near")?,
            col("checked_far")?,
            col("checked_near")?,
            col("z_far_derived_plus")?,
            col("z_far_paper_minus")?,
        ];
        let mut s = CompareSummary::default();
        for row in &t.rows {
            let num = |k: usize| -> Result<f64, CliError> {
                row[idx[k]].parse::<f64>().map_err(|e| CliError::Io(format!("bad number {:?}: {e}", row[idx[k]])))
            };
            let (z_far, z_near) = (num(0)?.abs(), num(1)?.abs());
            let (cf, cn) = (row[idx[2]] == "1", row[idx[3]] == "1");
            s.points += 1;
            if cf || cn {
                s.checked_points += 1;
            }
            let mut failed = false;
            if cf {
                s.max_abs_z_far = s.max_abs_z_far.max(z_far);
                failed |= z_far.is_nan() || z_far > Z_LIMIT;
            }
            if cn {
                s.max_abs_z_near = s.max_abs_z_near.max(z_near);
                failed |= z_near.is_nan() || z_near > Z_LIMIT;
            }
            s.failures += usize::from(failed);
            if cf {
                s.variant_points += 1;
                s.max_abs_z_derived_plus = s.max_abs_z_derived_plus.max(num(4)?.abs());
                s.max_abs_z_paper_minus = s.max_abs_z_paper_minus.max(num(5)?.abs());
            }
        }
        Ok(s)
    }

    pub fn merge(&mut self, o: &CompareSummary) {
        self.points += o.points;
        self.checked_points += o.checked_points;
        self.max_abs_z_far = self.max_abs_z_far.max(o.max_abs_z_far);
        self.max_abs_z_near = self.max_abs_z_near.max(o.max_abs_z_near);
        self.failures += o.failures;
        self.variant_points += o.variant_points;
        self.max_abs_z_derived_plus = self.max_abs_z_derived_plus.max(o.max_abs_z_derived_plus);
        self.max_abs_z_paper_minus = self.max_abs_z_paper_minus.max(o.max_abs_z_paper_minus);
    }

    pub fn max_abs_z(&self) -> f64 {
        self.max_abs_z_far.max(self.max_abs_z_near)
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Which far-user sign variant the Monte Carlo data supports.
    pub fn confirmed_variant(&self) -> &'static str {
        if self.variant_points == 0 {
            return "undetermined";
        }
        match (self.max_abs_z_derived_plus <= Z_LIMIT, self.max_abs_z_paper_minus <= Z_LIMIT) {
            (true, false) => SignVariant::DerivedPlus.as_str(),
            (false, true) => SignVariant::PaperMinus.as_str(),
            (true, true) => "both",
            (false, false) => "neither",
        }
    }

    fn verdict(&self) -> &'static str {
        if self.passed() {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn curve_line(&self, name: &str) -> String {
        format!(
            "compare {name}: checked {}/{} points, max |z| = {:.3} (far {:.3}, near {:.3}), {} at 3 sigma; \
             far-user max |z| by sign variant: derived-plus {:.3}, paper-minus {:.3}",
            self.checked_points,
            self.points,
            self.max_abs_z(),
            self.max_abs_z_far,
            self.max_abs_z_near,
            self.verdict(),
            self.max_abs_z_derived_plus,
            self.max_abs_z_paper_minus,
        )
    }

    pub fn summary_line(&self) -> String {
        format!(
            "summary: max |z| = {:.3} over {} checked points, {} at 3 sigma ({} failing); MC confirms sign variant: {}",
            self.max_abs_z(),
            self.checked_points,
            self.verdict(),
            self.failures,
            self.confirmed_variant(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Target {
    Stdout,
    File(PathBuf),
}

fn targets(s: &ScenarioConfig) -> Result<Vec<Target>, CliError> {
    if s.curves.len() == 1 {
        return Ok(vec![s.out.clone().map_or(Target::Stdout, Target::File)]);
    }
    let dir = s.out.as_ref().ok_or_else(|| {
        CliError::Config(format!(
            "preset {} writes {} curve files; pass --out DIR",
            s.name,
            s.curves.len()
        ))
    })?;
    if dir.is_file() {
        return Err(CliError::Config(format!(
            "--out {} is a file, but preset {} needs a directory",
            dir.display(),
            s.name
        )));
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    Ok(s.curves
        .iter()
        .map(|c| Target::File(dir.join(format!("{}_{}.csv", s.name, c.label))))
        .collect())
}

fn core_err(e: noma_core::Error) -> CliError {
    match e {
        noma_core::Error::Config(m) => CliError::Config(m),
        other => CliError::Numeric(other.to_string()),
    }
}

fn curve_name(s: &ScenarioConfig, c: &CurveSpec) -> String {
    if c.label.is_empty() {
        s.name.clone()
    } else {
        format!("{}/{}", s.name, c.label)
    }
}

struct Ctx<'a> {
    scenario: &'a ScenarioConfig,
    opts: RunOptions,
    stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn note(&mut self, msg: &str) {
        if !self.opts.quiet {
            let _ = writeln!(self.stderr, "{msg}");
        }
    }
}

fn analytic_table(s: &ScenarioConfig, c: &CurveSpec) -> Result<Table, CliError> {
    let mut t = Table::new(Command::Analytic.header());
    for (v, a) in c.sweep.analytic_curve().map_err(core_err)? {
        t.rows.push(analytic_row(v, &a, s.sign_variant));
    }
    Ok(t)
}

fn mc_table(cmd: Command, ctx: &mut Ctx, engine: &Engine, c: &CurveSpec, target: &Target) -> Result<Table, CliError> {
    let s = ctx.scenario;
    let name = curve_name(s, c);
    let header = cmd.header();
    let mut table = Table::new(header.clone());
    let fp = fingerprint(&format!(
        "{}|{:?}|{}|{}|{}",
        cmd.as_str(),
        c.sweep,
        s.sign_variant,
        s.min_analytic_ber,
        engine.batch_trials()
    ));
    let partial = match target {
        Target::File(p) => Some(partial_path(p)),
        Target::Stdout => None,
    };
    if let (Some(pp), true) = (&partial, ctx.opts.resume) {
        match read_partial(pp, &header, &fp)? {
            Some(rows) => {
                table.rows = rows;
                ctx.note(&format!("[{name}] resuming from {} after {} points", pp.display(), table.rows.len()));
            }
            None => ctx.note(&format!("[{name}] no partial file at {}; starting fresh", pp.display())),
        }
    }

    let total = c.sweep.points.len();
    let axis = c.sweep.axis;
    for i in table.rows.len()..total {
        let p = engine.run_sweep_point(&c.sweep, i).map_err(core_err)?;
        ctx.note(&format!(
            "[{name}] {}/{total} {axis}={}: trials={} far {}/{} near {}/{} (analytic far {}, near {})",
            i + 1,
            fmt_num(p.axis_value),
            p.mc.trials(),
            p.mc.far.bit_errors,
            fmt_num(p.mc.far.ber()),
            p.mc.near.bit_errors,
            fmt_num(p.mc.near.ber()),
            fmt_num(p.analytic.far(s.sign_variant)),
            fmt_num(p.analytic.near),
        ));
        table.rows.push(match cmd {
            Command::Compare => compare_row(&p, s.sign_variant, s.min_analytic_ber),
            _ => simulate_row(&p),
        });
        if let Some(pp) = &partial {
            let progress = Progress { done: i + 1, total, seed: c.sweep.master_seed, fingerprint: fp.clone() };
            write_partial(pp, &table, &progress)?;
        }
    }
    Ok(table)
}

fn emit(target: &Target, table: &Table, stdout: &mut dyn Write) -> Result<(), CliError> {
    let bytes = table.to_csv();
    match target {
        Target::Stdout => stdout
            .write_all(&bytes)
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
        Target::File(p) => {
            write_atomic(p, &bytes)?;
            let pp = partial_path(p);
            if pp.exists() {
                std::fs::remove_file(&pp).map_err(|e| CliError::Io(format!("cannot remove {}: {e}", pp.display())))?;
            }
            Ok(())
        }
    }
}

/// Runs `cmd` for every curve of the scenario. Returns the process exit code
/// (0, or 1 when `compare` finds a point outside 3 sigma).
pub fn execute(
    cmd: Command,
    scenario: &ScenarioConfig,
    opts: RunOptions,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    for w in &scenario.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let targets = targets(scenario)?;
    let engine = match cmd {
        Command::Analytic => None,
        _ => Some(
            Engine::new(scenario.workers)
                .and_then(|e| e.with_batch_trials(scenario.batch_trials))
                .map_err(core_err)?,
        ),
    };
    let mut ctx = Ctx { scenario, opts, stderr };
    let mut summary_lines = Vec::new();
    let mut total = CompareSummary::default();

    for (c, target) in scenario.curves.iter().zip(&targets) {
        let table = match &engine {
            None => analytic_table(scenario, c)?,
            Some(engine) => mc_table(cmd, &mut ctx, engine, c, target)?,
        };
        emit(target, &table, stdout)?;
        if let Target::File(p) = target {
            ctx.note(&format!("[{}] wrote {}", curve_name(scenario, c), p.display()));
        }
        if cmd == Command::Compare {
            let s = CompareSummary::from_table(&table)?;
            summary_lines.push(s.curve_line(&curve_name(scenario, c)));
            total.merge(&s);
        }
    }

    if cmd != Command::Compare {
        return Ok(0);
    }
    summary_lines.push(total.summary_line());
    // The summary must not interleave with CSV on stdout.
    let to_stdout = !targets.contains(&Target::Stdout);
    for line in &summary_lines {
        let res = if to_stdout { writeln!(stdout, "{line}") } else { writeln!(ctx.stderr, "{line}") };
        res.map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(if total.passed() { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_score_cases() {
        assert_eq!(z_score(0.1, 0.01, 0.1, 100), 0.0);
        assert!((z_score(0.13, 0.01, 0.1, 100) - 3.0).abs() < 1e-12);
        // No errors observed: falls back to the binomial stderr at the analytic value.
        let z = z_score(0.0, 0.0, 1e-4, 1_000_000);
        assert!((z + 1e-4 / (1e-4 * (1.0 - 1e-4) / 1e6f64).sqrt()).abs() < 1e-9);
        assert_eq!(z_score(0.0, 0.0, 0.0, 10), 0.0);
    }

    fn table(rows: &[[&str; 19]]) -> Table {
        let mut t = Table::new(COMPARE_HEADER.to_vec());
        t.rows = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        t
    }

    #[test]
    fn summary_statistics() {
        let mut r1 = ["0"; 19];
        r1[11] = "1.5";
        r1[12] = "-2.5";
        r1[13] = "0.1";
        r1[15] = "1.5";
        r1[16] = "40";
        r1[17] = "1";
        r1[18] = "1";
        let mut r2 = r1;
        r2[12] = "-3.5";
        r2[18] = "0";
        let s = CompareSummary::from_table(&table(&[r1, r2])).unwrap();
        assert_eq!(s.points, 2);
        assert_eq!(s.checked_points, 2);
        assert_eq!(s.max_abs_z_near, 2.5);
        assert!(s.passed());
        assert_eq!(s.confirmed_variant(), "derived-plus");

        r2[18] = "1";
        let s = CompareSummary::from_table(&table(&[r1, r2])).unwrap();
        assert_eq!(s.failures, 1);
        assert!(s.summary_line().contains("FAIL"));

        let empty = CompareSummary::default();
        assert!(empty.passed());
        assert_eq!(empty.confirmed_variant(), "undetermined");
    }
}
