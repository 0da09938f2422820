//! Implementations of the CLI subcommands.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use cantor_spectra::expansion::{expand, FrequencySet};
use cantor_spectra::numeric::{grid_to_csv, mu_hat_grid, mu_hat_truncated};
use cantor_spectra::orthogonality::{
    branching_profile, enumerate_hadamard_label_sets_capped, first_non_orthogonal_pair,
    max_ratio_closed_subset_size, mu_hat_is_zero,
};
use cantor_spectra::trees::{canonical_labeling, labeling_at_index, lambda_of_labeling};
use cantor_spectra::{CantorSystem, SpectralLabeling};

use crate::{emit, CliError, OutputFormat, EXIT_VERIFICATION};

struct AnalyzeReport<'a> {
    system: &'a CantorSystem,
    hadamard_set_count: usize,
    hadamard_count_truncated: bool,
    hadamard_diagnostic: Option<String>,
}

impl Serialize for AnalyzeReport<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("AnalyzeReport", 11)?;
        s.serialize_field("p", &self.system.p())?;
        s.serialize_field("alpha", &self.system.alpha())?;
        s.serialize_field("N", &self.system.base())?;
        s.serialize_field("D", &self.system.digits())?;
        s.serialize_field("T", &self.system.t_exponents())?;
        s.serialize_field(
            "is_cyclotomic_product",
            &self.system.is_cyclotomic_product(),
        )?;
        s.serialize_field("circle_hypothesis", &self.system.circle_hypothesis())?;
        s.serialize_field("branching_bound", &self.system.branching_bound())?;
        s.serialize_field("hadamard_set_count", &self.hadamard_set_count)?;
        if self.hadamard_count_truncated {
            s.serialize_field("hadamard_count_truncated", &true)?;
        }
        if let Some(diag) = &self.hadamard_diagnostic {
            s.serialize_field("hadamard_diagnostic", diag)?;
        }
        s.end()
    }
}

pub fn analyze(
    system: &CantorSystem,
    limit: usize,
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<u8, CliError> {
    let enumeration = enumerate_hadamard_label_sets_capped(system, limit);
    let report = AnalyzeReport {
        system,
        hadamard_set_count: enumeration.sets.len(),
        hadamard_count_truncated: enumeration.truncated,
        hadamard_diagnostic: enumeration.diagnostic,
    };
    let content = match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string(&report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Text => {
            let mut s = format!(
                "system: p={} alpha={} N={} D={:?}\n",
                system.p(),
                system.alpha(),
                system.base(),
                system.digits()
            );
            s.push_str(&format!(
                "T: {:?}  (branching bound p^|T| = {})\n",
                system.t_exponents(),
                system.branching_bound()
            ));
            s.push_str(&format!("digit polynomial: {}\n", system.digit_poly()));
            s.push_str(&format!(
                "cyclotomic product: {}\ncircle hypothesis: {}\n",
                system.is_cyclotomic_product(),
                system.circle_hypothesis()
            ));
            match &report.hadamard_diagnostic {
                Some(diag) => s.push_str(&format!("hadamard label sets: none ({diag})\n")),
                None if report.hadamard_count_truncated => s.push_str(&format!(
                    "hadamard label sets: {} or more (enumeration capped)\n",
                    report.hadamard_set_count
                )),
                None => s.push_str(&format!(
                    "hadamard label sets: {}\n",
                    report.hadamard_set_count
                )),
            }
            s
        }
        _ => {
            return Err(CliError::validation(
                "analyze supports --format json or text",
            ))
        }
    };
    emit(out, &content)?;
    Ok(0)
}

fn build_labeling(
    system: &CantorSystem,
    depth: u32,
    index: Option<u64>,
) -> Result<SpectralLabeling, CliError> {
    Ok(match index {
        None => canonical_labeling(system, depth)?,
        Some(i) => labeling_at_index(system, depth, i)?,
    })
}

pub fn tree(
    system: &CantorSystem,
    depth: u32,
    index: Option<u64>,
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<u8, CliError> {
    let labeling = build_labeling(system, depth, index)?;
    let content = match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string(&labeling).expect("labeling serializes");
            s.push('\n');
            s
        }
        OutputFormat::Dot => labeling.to_dot(),
        _ => return Err(CliError::validation("tree supports --format json or dot")),
    };
    emit(out, &content)?;
    Ok(0)
}

pub fn spectrum(
    system: &CantorSystem,
    depth: u32,
    index: Option<u64>,
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<u8, CliError> {
    let labeling = build_labeling(system, depth, index)?;
    let lambda = lambda_of_labeling(&labeling, depth)?;
    let rendered: Vec<(String, String)> = lambda
        .iter()
        .map(|k| {
            let e = expand(k, system.base()).expect("valid base");
            (k.to_string(), e.render())
        })
        .collect();
    let content = match format {
        OutputFormat::Json => {
            // values are rendered as raw JSON integers, which keeps arbitrary
            // magnitudes exact
            let elements: Vec<String> = rendered
                .iter()
                .map(|(value, expansion)| {
                    format!("{{\"value\":{value},\"expansion\":\"{expansion}\"}}")
                })
                .collect();
            format!(
                "{{\"N\":{},\"depth\":{},\"count\":{},\"elements\":[{}]}}\n",
                system.base(),
                depth,
                rendered.len(),
                elements.join(",")
            )
        }
        OutputFormat::Text => {
            let mut s = String::new();
            for (value, expansion) in &rendered {
                s.push_str(&format!("{value}\t{expansion}\n"));
            }
            s
        }
        _ => {
            return Err(CliError::validation(
                "spectrum supports --format json or text",
            ))
        }
    };
    emit(out, &content)?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifyRecord {
    prefix: Vec<u32>,
    digits: Vec<u32>,
    count: usize,
    within_bound: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    orthogonal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violating_pair: Option<[String; 2]>,
    branching_bound: u64,
    max_branching_count: usize,
    within_bound: bool,
    records: Vec<VerifyRecord>,
}

pub fn verify(
    system: &CantorSystem,
    depth: u32,
    frequencies: &[String],
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<u8, CliError> {
    let parsed: Vec<BigInt> = frequencies
        .iter()
        .map(|s| {
            BigInt::from_str(s)
                .map_err(|_| CliError::validation(format!("not an integer frequency: {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    let set = FrequencySet::new(system.base(), parsed).expect("valid base");
    let violating = first_non_orthogonal_pair(system, &set)?;
    let profile = branching_profile(system, &set, depth)?;
    let report = VerifyReport {
        orthogonal: violating.is_none(),
        violating_pair: violating.map(|(a, b)| [a.to_string(), b.to_string()]),
        branching_bound: profile.bound(),
        max_branching_count: profile.max_count(),
        within_bound: profile.all_within_bound(),
        records: profile
            .records()
            .iter()
            .map(|r| VerifyRecord {
                prefix: r.prefix.clone(),
                digits: r.digits.iter().copied().collect(),
                count: r.count(),
                within_bound: r.within_bound,
            })
            .collect(),
    };
    let content = match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string(&report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Text => {
            let mut s = String::new();
            match &report.violating_pair {
                None => s.push_str("orthogonal: yes\n"),
                Some([a, b]) => s.push_str(&format!("orthogonal: no, pair ({a}, {b})\n")),
            }
            s.push_str(&format!(
                "branching: max count {} of bound {} ({})\n",
                report.max_branching_count,
                report.branching_bound,
                if report.within_bound {
                    "ok"
                } else {
                    "exceeded"
                }
            ));
            for r in &report.records {
                s.push_str(&format!(
                    "  prefix {:?}: digits {:?} count {}\n",
                    r.prefix, r.digits, r.count
                ));
            }
            s
        }
        _ => {
            return Err(CliError::validation(
                "verify supports --format json or text",
            ))
        }
    };
    emit(out, &content)?;
    Ok(if report.orthogonal && report.within_bound {
        0
    } else {
        EXIT_VERIFICATION
    })
}

pub fn muhat(
    system: &CantorSystem,
    grid: &str,
    truncation: u32,
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<u8, CliError> {
    if format != OutputFormat::Csv {
        return Err(CliError::validation("muhat supports --format csv only"));
    }
    let parts: Vec<&str> = grid.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(CliError::validation(format!(
            "grid must be lo:hi:step, got {grid:?}"
        )));
    };
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::validation(format!("not a number in grid spec: {s:?}")))
    };
    let rows = mu_hat_grid(system, parse(lo)?, parse(hi)?, parse(step)?, truncation)?;
    emit(out, &grid_to_csv(&rows))?;
    Ok(0)
}

/// One pass/fail line per sweep; exit 0 only if every sweep passes.
pub fn oracle(
    system: Option<CantorSystem>,
    bound: u64,
    betas: Option<&str>,
    jobs: usize,
    out: &Option<PathBuf>,
) -> Result<u8, CliError> {
    let systems = match system {
        Some(s) => vec![s],
        None => vec![
            CantorSystem::new(2, 2, &[0, 2]).expect("reference system"),
            CantorSystem::new(2, 3, &[0, 2, 4, 6]).expect("reference system"),
        ],
    };
    let mut lines: Vec<String> = Vec::new();
    let mut all_pass = true;

    for system in &systems {
        let name = format!(
            "(p={}, alpha={}, D={:?})",
            system.p(),
            system.alpha(),
            system.digits()
        );

        let failures = transform_sweep(system, bound, jobs);
        match failures.first() {
            None => lines.push(format!(
                "PASS transform zero test vs truncated product on {name}, |k| <= {bound}"
            )),
            Some(&k) => {
                all_pass = false;
                let t = mu_hat_truncated(system, k as f64, 60).expect("positive truncation");
                lines.push(format!(
                    "FAIL transform zero test vs truncated product on {name}: k = {k}, \
                     exact = {}, |truncated| = {:e}, tail = {:e}",
                    mu_hat_is_zero(system, &BigInt::from(k)),
                    t.value.norm(),
                    t.tail_bound
                ));
            }
        }

        match mask_sweep(system) {
            None => lines.push(format!(
                "PASS admissible differences vs numeric mask zeros on {name}"
            )),
            Some(delta) => {
                all_pass = false;
                lines.push(format!(
                    "FAIL admissible differences vs numeric mask zeros on {name}: delta = {delta}"
                ));
            }
        }
    }

    let beta_sets: Vec<Vec<u32>> = match betas {
        Some("") => return Err(CliError::validation("empty beta list in oracle sweep")),
        Some(csv) => {
            let parsed: Result<BTreeSet<u32>, _> = csv
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u32>()
                        .map_err(|_| CliError::validation(format!("not a beta exponent: {s:?}")))
                })
                .collect();
            vec![parsed?.into_iter().collect()]
        }
        None => {
            // all subsets of {1, 2, 3} of size at most 2
            let mut sets = vec![vec![]];
            for b in 1..=3u32 {
                sets.push(vec![b]);
                for c in b + 1..=3 {
                    sets.push(vec![b, c]);
                }
            }
            sets
        }
    };
    for p in [2u64, 3] {
        for betas in &beta_sets {
            let size = max_ratio_closed_subset_size(p, betas)?;
            let bound = (p as usize).pow(betas.len() as u32);
            // with all exponents 1..m present, the full group of p^m-th roots
            // of unity is ratio-closed, so the bound is attained
            let contiguous = betas.iter().copied().eq(1..=betas.len() as u32);
            let ok = size <= bound && (!contiguous || size == bound);
            if !ok {
                all_pass = false;
            }
            lines.push(format!(
                "{} ratio-closed root sets p = {p}, betas = {betas:?}: max {size}, bound {bound}",
                if ok { "PASS" } else { "FAIL" }
            ));
        }
    }

    emit(out, &(lines.join("\n") + "\n"))?;
    Ok(if all_pass { 0 } else { EXIT_VERIFICATION })
}

/// Exact zero test versus truncated product over `|k| <= bound`; returns the
/// disagreeing frequencies.
fn transform_sweep(system: &CantorSystem, bound: u64, jobs: usize) -> Vec<i64> {
    // truncation deep enough for a tail bound below 1e-10 at the window edge
    let mut truncation = 1;
    while mu_hat_truncated(system, bound as f64, truncation)
        .expect("positive truncation")
        .tail_bound
        >= 1e-10
    {
        truncation += 1;
    }
    let bound = bound as i64;
    let jobs = jobs.max(1);
    let mut failures: Vec<i64> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|worker| {
                scope.spawn(move || {
                    let mut bad = Vec::new();
                    let mut k = -bound + worker as i64;
                    while k <= bound {
                        let exact = mu_hat_is_zero(system, &BigInt::from(k));
                        let t = mu_hat_truncated(system, k as f64, truncation)
                            .expect("positive truncation");
                        let numeric_zero = t.value.norm() < 1e-9;
                        let separated = numeric_zero || t.value.norm() > 2.0 * t.tail_bound;
                        if exact != numeric_zero || t.tail_bound >= 1e-10 || !separated {
                            bad.push(k);
                        }
                        k += jobs as i64;
                    }
                    bad
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker"))
            .collect()
    });
    failures.sort_unstable();
    failures
}

/// Exact admissibility versus numeric mask zeros over all label differences.
fn mask_sweep(system: &CantorSystem) -> Option<i64> {
    (1..system.base() as i64).find(|&delta| {
        let exact = system
            .admissible_label_difference(delta)
            .expect("delta in range");
        let numeric =
            cantor_spectra::numeric::mask_eval(system, delta as f64 / system.base() as f64).norm()
                < 1e-10;
        exact != numeric
    })
}
