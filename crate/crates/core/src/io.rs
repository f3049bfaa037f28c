//! File formats: p-value CSV input, discoveries and adjusted-table output,
//! simulation result tables, and the key = value scenario format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::adjust::AdjustedTable;
use crate::error::{ReplError, Result};
use crate::procedures::{DependenceMode, FwerMethod, Study};
use crate::selection::{SelectionRule, SelectionSpec};
use crate::sim::{Allocation, SimEstimate, SimProcedure, SimScenario, SimSelection, SweepAxis, SweepPoint};
use crate::types::{DiscoveryReport, HypothesisRecord, StudyPairData};

/// Shortest decimal that parses back to the same double. Plain notation for
/// magnitudes in [1e-4, 1e15), exponent notation otherwise.
pub fn format_shortest(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// C-style `%.{digits}g`; `keep_zeros` mirrors the `#` flag (trailing zeros
/// kept, e.g. "1.000" at 4 digits).
pub fn format_significant(x: f64, digits: usize, keep_zeros: bool) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return if keep_zeros && digits > 1 {
            format!("{:.*}", digits - 1, 0.0)
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // exponent after rounding to the requested digits
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let trim = |s: String| -> String {
        if keep_zeros || !s.contains('.') {
            s
        } else {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    }
}

fn parse_prob(field: &str, what: &str, line: u64) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| ReplError::Parse {
        line,
        msg: format!("{what} is not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(ReplError::Parse { line, msg: format!("{what} is not finite: {field:?}") });
    }
    Ok(v)
}

fn directive(line: &str, key: &str) -> Option<String> {
    let rest = line.trim().strip_prefix('#')?.trim();
    let (k, v) = rest.split_once('=')?;
    (k.trim() == key).then(|| v.trim().to_string())
}

/// Parses the `id,p1,p2` format; an empty p2 field means not followed up.
/// `# m=<int>` and `# r1=<int>` comment lines set the declared sizes.
pub fn parse_pvalue_str(text: &str) -> Result<StudyPairData> {
    let mut m_declared = None;
    let mut r1_declared = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        for (key, slot) in [("m", &mut m_declared), ("r1", &mut r1_declared)] {
            if let Some(v) = directive(line, key) {
                let n: usize = v.parse().map_err(|_| ReplError::Parse {
                    line: line_no,
                    msg: format!("directive {key}= needs a positive integer, got {v:?}"),
                })?;
                if n == 0 {
                    return Err(ReplError::Parse {
                        line: line_no,
                        msg: format!("directive {key}= must be positive"),
                    });
                }
                *slot = Some(n);
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["id", "p1", "p2"] {
        if names.is_empty() || names == [""] {
            return Err(ReplError::Format("missing header line `id,p1,p2`".into()));
        }
        return Err(ReplError::Format(format!("expected header `id,p1,p2`, found `{}`", names.join(","))));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let p1 = parse_prob(&row[1], "p1", line)?;
        let p2 = if row[2].is_empty() { None } else { Some(parse_prob(&row[2], "p2", line)?) };
        records.push(HypothesisRecord::new(&row[0], p1, p2));
    }
    StudyPairData::try_new(records, m_declared, r1_declared)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| ReplError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn parse_pvalue_csv(path: impl AsRef<Path>) -> Result<StudyPairData> {
    parse_pvalue_str(&read_text(path.as_ref())?)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with('#') || s != s.trim() {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes a dataset in the input format; parsing the output gives back the
/// same dataset.
pub fn write_pvalue_csv(data: &StudyPairData) -> String {
    let mut out = String::new();
    if let Some(m) = data.m_declared() {
        let _ = writeln!(out, "# m={m}");
    }
    if let Some(r1) = data.r1_declared() {
        let _ = writeln!(out, "# r1={r1}");
    }
    out.push_str("id,p1,p2\n");
    for r in data.records() {
        let p2 = r.p2.map(format_shortest).unwrap_or_default();
        let _ = writeln!(out, "{},{},{p2}", csv_field(&r.id), format_shortest(r.p1));
    }
    out
}

/// Number rendering for output tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Four significant digits, trailing zeros kept.
    Table,
    /// Shortest round-trip representation.
    Full,
}

impl Precision {
    pub fn render(self, x: f64) -> String {
        match self {
            Precision::Table => format_significant(x, 4, true),
            Precision::Full => format_shortest(x),
        }
    }
}

pub const DISCOVERIES_HEADER: &str = "id,p1,p2,z,adjusted_p,rejected";

/// One line per input row in input order; z and adjusted_p are empty for
/// rows the procedure did not score.
pub fn write_discoveries_csv(data: &StudyPairData, report: &DiscoveryReport, precision: Precision) -> String {
    let mut scores = vec![None; data.len()];
    for s in &report.per_hypothesis {
        scores[s.index] = Some((s.z, s.adjusted_p));
    }
    let mut out = String::from(DISCOVERIES_HEADER);
    out.push('\n');
    for (j, r) in data.records().iter().enumerate() {
        let (z, adj) = scores[j].map_or((String::new(), String::new()), |(z, a)| {
            (precision.render(z), precision.render(a))
        });
        let _ = writeln!(
            out,
            "{},{},{},{z},{adj},{}",
            csv_field(&r.id),
            format_shortest(r.p1),
            r.p2.map(format_shortest).unwrap_or_default(),
            u8::from(report.is_rejected(j)),
        );
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(format_shortest).unwrap_or_else(|| "-".into())
}

/// Plain-text run summary, one `key: value` per line.
pub fn write_summary(report: &DiscoveryReport, params: &[(&str, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "procedure: {}", report.procedure);
    for (k, v) in params {
        let _ = writeln!(out, "{k}: {v}");
    }
    let _ = writeln!(out, "R1: {}", report.r1);
    let _ = writeln!(out, "R2: {}", report.r2);
    let _ = writeln!(out, "primary_threshold: {}", opt(report.primary_threshold));
    let _ = writeln!(out, "followup_threshold: {}", opt(report.followup_threshold));
    let _ = writeln!(out, "effective_q1: {}", opt(report.effective_q1));
    let _ = writeln!(out, "effective_q2: {}", opt(report.effective_q2));
    let _ = writeln!(out, "partial: {}", report.partial);
    for c in &report.components {
        let _ = writeln!(
            out,
            "component: {} R1={} R2={} primary_threshold={} followup_threshold={}",
            c.procedure,
            c.r1,
            c.r2,
            opt(c.primary_threshold),
            opt(c.followup_threshold)
        );
    }
    let _ = writeln!(out, "rejected: {}", report.rejected_ids.join(" "));
    out
}

/// Adjusted table as CSV, rows in table order. The modified column appears
/// only when the table has one.
pub fn write_adjusted_csv(table: &AdjustedTable, precision: Precision) -> String {
    let modified = table.rows.iter().any(|r| r.adjusted_p_modified.is_some());
    let mut out = String::from("id,p1,p2,z,adjusted_p");
    if modified {
        out.push_str(",adjusted_p_modified");
    }
    out.push('\n');
    for r in &table.rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.id),
            format_shortest(r.p1),
            format_shortest(r.p2),
            precision.render(r.z),
            precision.render(r.adjusted_p)
        );
        if modified {
            let _ = write!(out, ",{}", r.adjusted_p_modified.map(|v| precision.render(v)).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

pub const SIM_HEADER: &str = "point,avg_fdp,fdp_se,avg_power,power_se,avg_rejections";

fn sim_row(point: &str, e: &SimEstimate) -> String {
    let o = |x: Option<f64>| x.map(format_shortest).unwrap_or_default();
    format!(
        "{point},{},{},{},{},{}\n",
        format_shortest(e.avg_fdp),
        o(e.fdp_se),
        o(e.avg_power),
        o(e.power_se),
        format_shortest(e.avg_rejections)
    )
}

/// Simulation table; `point` is the sweep value, or "base" for a single run.
pub fn write_sim_csv(points: &[SweepPoint], single: Option<&SimEstimate>) -> String {
    let mut out = String::from(SIM_HEADER);
    out.push('\n');
    if let Some(e) = single {
        out.push_str(&sim_row("base", e));
    }
    for p in points {
        out.push_str(&sim_row(&format_shortest(p.value), &p.estimate));
    }
    out
}

/// `bh:x`, `bonferroni:x`, `top:k`, `threshold:t`, `ids:a,b,...`, or
/// `followed` (also `all`) for the recorded follow-up set.
pub fn parse_selection_spec(s: &str) -> Result<SelectionSpec> {
    let s = s.trim();
    if s == "followed" || s == "all" {
        return Ok(SelectionSpec::Followed);
    }
    let (kind, arg) = s
        .split_once(':')
        .ok_or_else(|| ReplError::Config(format!("selection {s:?} is not of the form kind:value")))?;
    let num = |what: &str| -> Result<f64> {
        arg.trim()
            .parse()
            .map_err(|_| ReplError::Config(format!("selection {what} needs a number, got {arg:?}")))
    };
    let rule = match kind.trim() {
        "bh" => SelectionRule::BhAtLevel(num("bh")?),
        "bonferroni" => SelectionRule::BonferroniThreshold(num("bonferroni")?),
        "threshold" => SelectionRule::FixedThreshold(num("threshold")?),
        "top" => SelectionRule::TopK(
            arg.trim()
                .parse()
                .map_err(|_| ReplError::Config(format!("selection top needs an integer, got {arg:?}")))?,
        ),
        "ids" => SelectionRule::Explicit(
            arg.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
        ),
        other => return Err(ReplError::Config(format!("unknown selection kind {other:?}"))),
    };
    rule.check().map_err(|e| ReplError::Config(e.to_string()))?;
    Ok(SelectionSpec::Rule(rule))
}

/// `independent`, `prds`, `item1`, `item2` (needs t), `both` (t optional).
pub fn parse_dependence(name: &str, t: Option<f64>) -> Result<DependenceMode> {
    Ok(match name.trim() {
        "independent" => DependenceMode::Independent,
        "prds" => DependenceMode::PrdsFollowup,
        "item1" => DependenceMode::ArbitraryPrimaryItem1,
        "item2" => DependenceMode::ArbitraryPrimaryItem2 {
            t: t.ok_or_else(|| ReplError::Config("dependence item2 needs a threshold t".into()))?,
        },
        "both" => DependenceMode::ArbitraryBoth { t },
        other => {
            return Err(ReplError::Config(format!(
                "unknown dependence mode {other:?} (independent, prds, item1, item2, both)"
            )))
        }
    })
}

/// Grid values: a comma list, or `start:step:end` inclusive.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || ReplError::Config(format!("cannot parse grid {s:?}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let [a, step, b] = [parts[0], parts[1], parts[2]].map(|x| x.parse::<f64>());
        let (a, step, b) = (a.map_err(|_| bad())?, step.map_err(|_| bad())?, b.map_err(|_| bad())?);
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        // rounded to 12 decimals so 0.1 steps print cleanly
        return Ok((0..=n).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect());
    }
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(bad());
    }
    Ok(v)
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub scenario: SimScenario,
    pub sweep: Option<(SweepAxis, Vec<f64>)>,
}

const SCENARIO_KEYS: &[&str] = &[
    "m", "f00", "f01", "f10", "f11", "mu", "mu1", "mu2", "sigma1", "sigma2", "sigma", "zeta", "N",
    "procedure", "q1", "q", "c", "w1", "alpha1", "alpha", "selection", "reps", "seed", "sweep", "grid",
    "dependence", "t", "method", "primary", "trace",
];

/// Flat `key = value` lines, `#` comments. Required: m, the four fractions,
/// and mu (or mu1 and mu2). Sigmas come from sigma1/sigma2 or from
/// sigma/zeta/N.
pub fn parse_scenario_str(text: &str) -> Result<ScenarioFile> {
    let mut kv: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ReplError::Config(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !SCENARIO_KEYS.contains(&k) {
            return Err(ReplError::Config(format!("line {}: unknown key {k:?}", i + 1)));
        }
        if kv.iter().any(|(a, _)| a == k) {
            return Err(ReplError::Config(format!("line {}: duplicate key {k:?}", i + 1)));
        }
        kv.push((k.to_string(), v.to_string()));
    }
    let get = |k: &str| kv.iter().find(|(a, _)| a == k).map(|(_, v)| v.as_str());
    let num = |k: &str| -> Result<Option<f64>> {
        get(k)
            .map(|v| v.parse::<f64>().map_err(|_| ReplError::Config(format!("{k} needs a number, got {v:?}"))))
            .transpose()
    };
    let int = |k: &str| -> Result<Option<u64>> {
        get(k)
            .map(|v| v.parse::<u64>().map_err(|_| ReplError::Config(format!("{k} needs an integer, got {v:?}"))))
            .transpose()
    };
    let need = |k: &str| -> Result<f64> { num(k)?.ok_or_else(|| ReplError::Config(format!("missing key {k:?}"))) };

    let m = int("m")?.ok_or_else(|| ReplError::Config("missing key \"m\"".into()))? as usize;
    let fractions = [need("f00")?, need("f01")?, need("f10")?, need("f11")?];
    let (mu1, mu2) = match (num("mu")?, num("mu1")?, num("mu2")?) {
        (Some(mu), None, None) => (mu, mu),
        (None, Some(a), Some(b)) => (a, b),
        _ => return Err(ReplError::Config("give either mu, or both mu1 and mu2".into())),
    };
    let allocation = match (num("sigma")?, num("zeta")?, num("N")?) {
        (None, None, None) => None,
        (Some(sigma), Some(zeta), Some(n)) => Some(Allocation { sigma, zeta, n }),
        _ => return Err(ReplError::Config("allocation needs all of sigma, zeta and N".into())),
    };
    let (sigma1, sigma2) = match (num("sigma1")?, num("sigma2")?) {
        (Some(a), Some(b)) if allocation.is_none() => (a, b),
        (None, None) if allocation.is_some() => (f64::NAN, f64::NAN),
        (None, None) => (1.0, 1.0),
        _ => {
            return Err(ReplError::Config(
                "give both sigma1 and sigma2, or sigma/zeta/N, not a mix".into(),
            ))
        }
    };

    let q = num("q")?.unwrap_or(0.05);
    let q1 = match (num("q1")?, num("c")?) {
        (Some(_), Some(_)) => return Err(ReplError::Config("give q1 or c, not both".into())),
        (Some(q1), None) => q1,
        (None, Some(c)) => c * q,
        (None, None) => q / 2.0,
    };
    let alpha = num("alpha")?.unwrap_or(0.05);
    let alpha1 = num("alpha1")?.unwrap_or(alpha / 2.0);
    let w1 = num("w1")?.unwrap_or(1.0);
    let selection = match get("selection") {
        None | Some("natural") | Some("bh") => SimSelection::Natural,
        Some(s) => match parse_selection_spec(s)? {
            SelectionSpec::Rule(r) => SimSelection::Rule(r),
            SelectionSpec::Followed => {
                return Err(ReplError::Config("selection 'followed' has no meaning in a simulation".into()))
            }
        },
    };
    let procedure = match get("procedure").unwrap_or("fdr") {
        "fdr" => SimProcedure::TwoStageFdr {
            q1,
            q,
            mode: parse_dependence(get("dependence").unwrap_or("independent"), num("t")?)?,
            selection,
        },
        "symmetric" => SimProcedure::Symmetric { w1, q1, q, selection },
        "fwer" => SimProcedure::TwoStageFwer {
            alpha1,
            alpha,
            method: match get("method").unwrap_or("bonferroni") {
                "bonferroni" => FwerMethod::Bonferroni,
                "holm" => FwerMethod::Holm,
                other => return Err(ReplError::Config(format!("unknown FWER method {other:?}"))),
            },
            selection,
        },
        "partial-conjunction" => SimProcedure::PartialConjunction { q },
        "naive" => SimProcedure::NaiveBhBh {
            q,
            primary: match get("primary").unwrap_or("1") {
                "1" => Study::One,
                "2" => Study::Two,
                other => return Err(ReplError::Config(format!("primary must be 1 or 2, got {other:?}"))),
            },
        },
        "oracle" => SimProcedure::Oracle { q, w1 },
        "fisher" => SimProcedure::FisherMeta { q },
        other => {
            return Err(ReplError::Config(format!(
                "unknown procedure {other:?} (fdr, symmetric, fwer, partial-conjunction, naive, oracle, fisher)"
            )))
        }
    };
    let trace = match get("trace") {
        None | Some("false") | Some("0") => false,
        Some("true") | Some("1") => true,
        Some(v) => return Err(ReplError::Config(format!("trace must be true or false, got {v:?}"))),
    };
    let scenario = SimScenario {
        m,
        fractions,
        mu1,
        mu2,
        sigma1,
        sigma2,
        allocation,
        procedure,
        reps: int("reps")?.unwrap_or(1000) as usize,
        seed: int("seed")?.unwrap_or(1),
        keep_trace: trace,
    };
    scenario.validate()?;
    let sweep = match (get("sweep"), get("grid")) {
        (None, None) => None,
        (Some(axis), Some(grid)) => {
            let axis = SweepAxis::parse(axis)
                .ok_or_else(|| ReplError::Config(format!("unknown sweep axis {axis:?} (mu, c, w1, zeta, k_selected)")))?;
            Some((axis, parse_grid(grid)?))
        }
        _ => return Err(ReplError::Config("sweep and grid must be given together".into())),
    };
    Ok(ScenarioFile { scenario, sweep })
}

pub fn parse_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    parse_scenario_str(&read_text(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(2.5e-7, 6, false), "2.5e-07");
        assert_eq!(format_significant(1.0, 4, true), "1.000");
        assert_eq!(format_significant(0.06875, 4, true), "0.06875");
        assert_eq!(format_significant(0.275, 4, true), "0.2750");
        assert_eq!(format_significant(3.53e-27, 4, true), "3.530e-27");
        assert_eq!(format_significant(0.0477, 6, false), "0.0477");
        assert_eq!(format_significant(123456.0, 4, false), "1.235e+05");
        assert_eq!(format_significant(0.0, 4, false), "0");
        assert_eq!(format_significant(0.99996, 4, true), "1.000");
    }

    #[test]
    fn shortest_round_trips() {
        for x in [5.2e-8, 0.1, 1.0, 0.7, 1e-36, 2.5e6, 0.30000000000000004, 1e-300, 5e-324] {
            let s = format_shortest(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_shortest(5.2e-8), "5.2e-8");
        assert_eq!(format_shortest(0.002), "0.002");
    }

    #[test]
    fn parses_directives_and_absent_values() {
        let text = "# a comment\n# m=100\n# r1 = 3\nid,p1,p2\nrs1,1e-5,0.01\nrs2, 0.002 ,\n";
        let d = parse_pvalue_str(text).unwrap();
        assert_eq!(d.m_declared(), Some(100));
        assert_eq!(d.r1_declared(), Some(3));
        assert_eq!(d.records()[1].p2, None);
        assert_eq!(d.records()[1].p1, 0.002);
    }

    #[test]
    fn header_only_is_empty() {
        let d = parse_pvalue_str("id,p1,p2\n").unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn parse_errors_carry_lines() {
        match parse_pvalue_str("id,p1,p2\na,0.1,0.2\nb,zero,0.1\n") {
            Err(ReplError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_pvalue_str("id,p,p2\n"), Err(ReplError::Format(_))));
        assert!(matches!(parse_pvalue_str(""), Err(ReplError::Format(_))));
        assert!(matches!(parse_pvalue_str("id,p1,p2\na,0.1\n"), Err(ReplError::Parse { .. })));
        assert!(matches!(parse_pvalue_str("id,p1,p2\na,1.5,0.1\n"), Err(ReplError::Data(_))));
        assert!(matches!(parse_pvalue_str("id,p1,p2\na,NaN,0.1\n"), Err(ReplError::Parse { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let d = StudyPairData::new(
            vec![
                HypothesisRecord::new("a,b", 5.2e-8, Some(0.7)),
                HypothesisRecord::new("c", 0.30000000000000004, None),
                HypothesisRecord::new("q\"x", 0.0, Some(1.0)),
            ],
            Some(10),
            Some(4),
        );
        assert_eq!(parse_pvalue_str(&write_pvalue_csv(&d)).unwrap(), d);
    }

    #[test]
    fn selection_specs() {
        assert_eq!(parse_selection_spec("all").unwrap(), SelectionSpec::Followed);
        assert_eq!(
            parse_selection_spec("bh:0.025").unwrap(),
            SelectionSpec::Rule(SelectionRule::BhAtLevel(0.025))
        );
        assert_eq!(parse_selection_spec("top:5").unwrap(), SelectionSpec::Rule(SelectionRule::TopK(5)));
        assert_eq!(
            parse_selection_spec("ids:a, b").unwrap(),
            SelectionSpec::Rule(SelectionRule::Explicit(vec!["a".into(), "b".into()]))
        );
        assert!(parse_selection_spec("bh:2").is_err());
        assert!(parse_selection_spec("median:1").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1:0.1:0.5").unwrap(), vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(parse_grid("25:5:40").unwrap(), vec![25.0, 30.0, 35.0, 40.0]);
        assert_eq!(parse_grid("1.5, 2").unwrap(), vec![1.5, 2.0]);
        assert!(parse_grid("1:0:2").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn scenario_parsing() {
        let text = "m = 1000\nf00 = 0.9\nf01=0.025\nf10=0.025\nf11=0.05 # signal\nmu=2\nsigma1=0.5\nsigma2=0.5\n\
                    c=0.5\nreps=10\nseed=3\nsweep=mu\ngrid=1.5,2.0\n";
        let s = parse_scenario_str(text).unwrap();
        assert_eq!(s.scenario.m, 1000);
        assert_eq!(s.scenario.reps, 10);
        match s.scenario.procedure {
            SimProcedure::TwoStageFdr { q1, q, selection, .. } => {
                assert_eq!((q1, q), (0.025, 0.05));
                assert_eq!(selection, SimSelection::Natural);
            }
            ref p => panic!("{p:?}"),
        }
        assert_eq!(s.sweep, Some((SweepAxis::Mu, vec![1.5, 2.0])));
    }

    #[test]
    fn scenario_errors() {
        let base = "m=10\nf00=0.9\nf01=0.05\nf10=0.05\nf11=0\nmu=1\n";
        assert!(parse_scenario_str(base).is_ok());
        let unknown = format!("{base}color=red\n");
        assert!(matches!(parse_scenario_str(&unknown), Err(ReplError::Config(_))));
        let bad_sum = base.replace("f11=0", "f11=0.1");
        assert!(matches!(parse_scenario_str(&bad_sum), Err(ReplError::Config(_))));
        let mixed = format!("{base}sigma1=1\nsigma=10\nzeta=0.5\nN=100\n");
        assert!(parse_scenario_str(&mixed).is_err());
        let alloc = format!("{base}sigma=10\nzeta=0.5\nN=1000\n");
        let s = parse_scenario_str(&alloc).unwrap().scenario;
        let (s1, s2) = s.sigmas();
        assert!((s1 - 10.0 / 500f64.sqrt()).abs() < 1e-12 && (s1 - s2).abs() < 1e-12);
    }
}
