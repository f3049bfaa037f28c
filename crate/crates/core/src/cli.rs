//! The `replicability` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 applicability error, 4 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::adjust::{build_adjusted_table, AdjustFlavor};
use crate::error::{ReplError, Result};
use crate::io::{
    format_shortest, format_significant, parse_dependence, parse_grid, parse_pvalue_csv,
    parse_scenario_file, parse_selection_spec, write_adjusted_csv, write_discoveries_csv,
    write_sim_csv, write_summary, Precision,
};
use crate::numeric::solve_oracle_qprime;
use crate::procedures::{
    baseline_fisher_meta, baseline_naive_bh_bh, baseline_partial_conjunction, fdr_symmetric,
    fdr_two_stage, fwer_two_stage, oracle_calibrated_run, FwerMethod, Study,
};
use crate::selection::{probe_validity, SelectionSpec};
use crate::sim::{analytic_power_bonf_max, analytic_power_two_stage, run_scenario, sweep};
use crate::types::{DiscoveryReport, StudyPairData};

#[derive(Debug, Parser)]
#[command(name = "replicability", version, about = "Two-stage replicability analysis")]
struct Cli {
    /// Print only data on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Fdr,
    Fwer,
    Symmetric,
    Oracle,
    PartialConjunction,
    Naive,
    Fisher,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Bonferroni,
    Holm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Flavor {
    Bonferroni,
    Fdr,
}

#[derive(Debug, clap::Args)]
struct DataArgs {
    /// CSV with header id,p1,p2.
    #[arg(long)]
    input: PathBuf,
    /// Override the family size m.
    #[arg(long)]
    m: Option<usize>,
    /// Override the follow-up set size R1.
    #[arg(long)]
    r1: Option<usize>,
}

impl DataArgs {
    fn load(&self) -> Result<StudyPairData> {
        let d = parse_pvalue_csv(&self.input)?;
        if self.m.is_none() && self.r1.is_none() {
            return Ok(d);
        }
        StudyPairData::try_new(
            d.records().to_vec(),
            self.m.or(d.m_declared()),
            self.r1.or(d.r1_declared()),
        )
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a procedure and write discoveries.csv and summary.txt.
    Analyze {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value = "fdr")]
        mode: Mode,
        /// Primary-study level (default q/2).
        #[arg(long)]
        q1: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        q: f64,
        /// FWER primary level (default alpha/2).
        #[arg(long)]
        alpha1: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Weight of the run with study one as primary.
        #[arg(long, default_value_t = 0.5)]
        w1: f64,
        /// independent, prds, item1, item2 or both.
        #[arg(long, default_value = "independent")]
        dependence: String,
        /// Primary threshold for the item2 and both modifications.
        #[arg(long)]
        t: Option<f64>,
        /// followed, bh:x, bonferroni:x, top:k, threshold:t or ids:a,b.
        #[arg(long, default_value = "followed")]
        selection: String,
        /// Selection for the reversed direction (default: same as --selection).
        #[arg(long)]
        selection2: Option<String>,
        #[arg(long, value_enum, default_value = "bonferroni")]
        method: Method,
        /// Oracle null fractions.
        #[arg(long)]
        f00: Option<f64>,
        #[arg(long)]
        f01: Option<f64>,
        /// Which study is primary for the naive baseline.
        #[arg(long, default_value_t = 1)]
        primary: u8,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Shortest round-trip numbers instead of 4 significant digits.
        #[arg(long)]
        full_precision: bool,
    },
    /// Ranked adjusted p-values at ratio c.
    Adjust {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        c: f64,
        #[arg(long, value_enum, default_value = "fdr")]
        flavor: Flavor,
        #[arg(long, default_value = "independent")]
        dependence: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        full_precision: bool,
    },
    /// Monte-Carlo run of a scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic power of the Bonferroni-on-maximum and two-stage procedures.
    Power {
        #[arg(long, allow_negative_numbers = true)]
        mu11: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu21: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Primary level of the two-stage procedure; enables pi2.
        #[arg(long)]
        alpha1: Option<f64>,
        /// Grid of c = alpha1/alpha; writes CSV c,pi1,pi2.
        #[arg(long)]
        c_grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Level q' of the oracle-calibrated run, optionally applied to data.
    CalibrateOracle {
        #[arg(long)]
        f00: f64,
        #[arg(long)]
        f01: f64,
        #[arg(long, default_value_t = 0.05)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        w1: f64,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "followed")]
        selection: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Empirical check that a selection rule is valid on a dataset.
    ProbeSelection {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        selection: String,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    quiet: bool,
}

impl Io<'_> {
    fn data(&mut self, s: &str) -> Result<()> {
        self.out.write_all(s.as_bytes())?;
        Ok(())
    }

    fn info(&mut self, s: &str) -> Result<()> {
        if !self.quiet {
            self.out.write_all(s.as_bytes())?;
        }
        Ok(())
    }
}

fn write_or_print(io: &mut Io, path: Option<&PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, content)?;
            io.info(&format!("wrote {}\n", p.display()))
        }
        None => io.data(content),
    }
}

fn selection(s: &str) -> Result<SelectionSpec> {
    parse_selection_spec(s)
}

fn emit_report(
    io: &mut Io,
    data: &StudyPairData,
    report: &DiscoveryReport,
    params: &[(&str, String)],
    out_dir: &PathBuf,
    precision: Precision,
    echo_ids: bool,
) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("discoveries.csv"), write_discoveries_csv(data, report, precision))?;
    let summary = write_summary(report, params);
    fs::write(out_dir.join("summary.txt"), &summary)?;
    if io.quiet {
        if !echo_ids {
            return Ok(());
        }
        let ids: String = report.rejected_ids.iter().map(|id| format!("{id}\n")).collect();
        io.data(&ids)
    } else {
        io.info(&summary)
    }
}

fn analyze(io: &mut Io, cmd: Command) -> Result<()> {
    let Command::Analyze {
        data,
        mode,
        q1,
        q,
        alpha1,
        alpha,
        w1,
        dependence,
        t,
        selection: sel,
        selection2,
        method,
        f00,
        f01,
        primary,
        out_dir,
        full_precision,
    } = cmd
    else {
        unreachable!()
    };
    let d = data.load()?;
    let q1 = q1.unwrap_or(q / 2.0);
    let alpha1 = alpha1.unwrap_or(alpha / 2.0);
    let dep = parse_dependence(&dependence, t)?;
    let rule = selection(&sel)?;
    let mut params = vec![("input", data.input.display().to_string()), ("m", d.m().to_string())];
    let report = match mode {
        Mode::Fdr => {
            params.extend([("q1", format_shortest(q1)), ("q", format_shortest(q)), ("dependence", dependence.clone())]);
            params.push(("selection", rule.label()));
            fdr_two_stage(&d, &rule, q1, q, dep)?
        }
        Mode::Fwer => {
            params.extend([("alpha1", format_shortest(alpha1)), ("alpha", format_shortest(alpha))]);
            params.push(("selection", rule.label()));
            let m = match method {
                Method::Bonferroni => FwerMethod::Bonferroni,
                Method::Holm => FwerMethod::Holm,
            };
            fwer_two_stage(&d, &rule, alpha1, alpha, m)?
        }
        Mode::Symmetric => {
            let rule2 = match &selection2 {
                Some(s) => selection(s)?,
                None => rule.clone(),
            };
            params.extend([
                ("w1", format_shortest(w1)),
                ("q1", format_shortest(q1)),
                ("q", format_shortest(q)),
                ("dependence", dependence.clone()),
                ("selection", rule.label()),
                ("selection2", rule2.label()),
            ]);
            fdr_symmetric(&d, &rule, &rule2, w1, q1, q, dep)?
        }
        Mode::Oracle => {
            let (Some(f00), Some(f01)) = (f00, f01) else {
                return Err(ReplError::Config("oracle mode needs --f00 and --f01".into()));
            };
            params.extend([("f00", format_shortest(f00)), ("f01", format_shortest(f01)), ("q", format_shortest(q))]);
            params.push(("w1", format_shortest(w1)));
            oracle_calibrated_run(&d, &rule, f00, f01, q, w1)?
        }
        Mode::PartialConjunction => {
            params.push(("q", format_shortest(q)));
            baseline_partial_conjunction(&d, q)?
        }
        Mode::Naive => {
            let p = match primary {
                1 => Study::One,
                2 => Study::Two,
                other => return Err(ReplError::Config(format!("--primary must be 1 or 2, got {other}"))),
            };
            params.extend([("q", format_shortest(q)), ("primary", primary.to_string())]);
            baseline_naive_bh_bh(&d, q, p)?
        }
        Mode::Fisher => {
            params.push(("q", format_shortest(q)));
            baseline_fisher_meta(&d, q)?
        }
    };
    let precision = if full_precision { Precision::Full } else { Precision::Table };
    emit_report(io, &d, &report, &params, &out_dir, precision, true)
}

fn run_command(io: &mut Io, cmd: Command) -> Result<()> {
    match cmd {
        cmd @ Command::Analyze { .. } => analyze(io, cmd),
        Command::Adjust { data, c, flavor, dependence, out, full_precision } => {
            let d = data.load()?;
            let flavor = match flavor {
                Flavor::Bonferroni => AdjustFlavor::Bonferroni,
                Flavor::Fdr => AdjustFlavor::Fdr,
            };
            let table = build_adjusted_table(&d, c, flavor, parse_dependence(&dependence, None)?)?;
            let precision = if full_precision { Precision::Full } else { Precision::Table };
            write_or_print(io, out.as_ref(), &write_adjusted_csv(&table, precision))
        }
        Command::Simulate { scenario, reps, seed, threads, out } => {
            let mut file = parse_scenario_file(&scenario)?;
            if let Some(r) = reps {
                file.scenario.reps = r;
            }
            if let Some(s) = seed {
                file.scenario.seed = s;
            }
            file.scenario.validate()?;
            let work = || -> Result<String> {
                Ok(match &file.sweep {
                    Some((axis, grid)) => write_sim_csv(&sweep(&file.scenario, *axis, grid)?, None),
                    None => write_sim_csv(&[], Some(&run_scenario(&file.scenario)?)),
                })
            };
            let csv = match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| ReplError::Config(format!("cannot start {n} threads: {e}")))?
                    .install(work)?,
                None => work()?,
            };
            write_or_print(io, out.as_ref(), &csv)
        }
        Command::Power { mu11, mu21, m, alpha, alpha1, c_grid, out } => {
            let fmt = |x: f64| format_significant(x, 6, false);
            let pi1 = analytic_power_bonf_max(mu11, mu21, m, alpha)?;
            if let Some(grid) = c_grid {
                let mut csv = String::from("c,pi1,pi2\n");
                for c in parse_grid(&grid)? {
                    let pi2 = analytic_power_two_stage(mu11, mu21, m, c * alpha, alpha)?;
                    csv.push_str(&format!("{},{},{}\n", format_shortest(c), fmt(pi1), fmt(pi2)));
                }
                return write_or_print(io, out.as_ref(), &csv);
            }
            let mut text = if io.quiet { format!("{}\n", fmt(pi1)) } else { format!("pi1 = {}\n", fmt(pi1)) };
            if let Some(a1) = alpha1 {
                let pi2 = analytic_power_two_stage(mu11, mu21, m, a1, alpha)?;
                text += &if io.quiet { format!("{}\n", fmt(pi2)) } else { format!("pi2 = {}\n", fmt(pi2)) };
            }
            write_or_print(io, out.as_ref(), &text)
        }
        Command::CalibrateOracle { f00, f01, q, w1, input, selection: sel, out_dir } => {
            let qp = solve_oracle_qprime(f00, f01, q, w1)?;
            let line = format_significant(qp, 6, false);
            if io.quiet {
                io.data(&format!("{line}\n"))?;
            } else {
                io.info(&format!("q' = {line}\n"))?;
            }
            if let Some(path) = input {
                let d = parse_pvalue_csv(&path)?;
                let rule = selection(&sel)?;
                let report = oracle_calibrated_run(&d, &rule, f00, f01, q, w1)?;
                let params = [
                    ("input", path.display().to_string()),
                    ("f00", format_shortest(f00)),
                    ("f01", format_shortest(f01)),
                    ("q", format_shortest(q)),
                    ("w1", format_shortest(w1)),
                    ("selection", rule.label()),
                ];
                emit_report(io, &d, &report, &params, &out_dir, Precision::Table, false)?;
            }
            Ok(())
        }
        Command::ProbeSelection { data, selection: sel, grid, seed } => {
            let d = data.load()?;
            let rule = selection(&sel)?;
            let report = probe_validity(&rule, &d, grid, seed)?;
            let mut text = if io.quiet {
                String::new()
            } else {
                format!(
                    "perturbations checked: {}\ncounterexamples: {}\n",
                    report.perturbations_checked,
                    report.counterexamples.len()
                )
            };
            for c in &report.counterexamples {
                text += &format!(
                    "{}: p1 {} -> {} changed |R1| from {} to {}\n",
                    c.id,
                    format_shortest(c.original_p1),
                    format_shortest(c.perturbed_p1),
                    c.original_size,
                    c.perturbed_size
                );
            }
            io.data(&text)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Diagnostics go to
/// `err`; the return value is the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { out, quiet: cli.quiet };
    match run_command(&mut io, cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
