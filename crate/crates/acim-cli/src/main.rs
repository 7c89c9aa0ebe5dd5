//! Command-line runner. Every invocation performs one verification or
//! computation, writes a JSON summary plus CSV data files into the
//! output directory, and encodes the outcome in the exit status:
//! 0 pass, 2 verification failed, 3 configuration error (with a
//! machine-readable JSON line on stderr), 4 non-convergence.
//!
//! A run is a pure function of its flags and the ACIM_THREADS cap:
//! identical configurations produce byte-identical output files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use acim::density::GridDensity;
use acim::ergodic::{ergodic_average_decay, exactness_decay, two_letter_mean_zero_seed};
use acim::error::AcimError;
use acim::interval::engel::{dissipativity_witness, invariant_density_series};
use acim::interval::euclid::{euclid_invariance_defect, euclid_rect_measure, PlanarRectangle};
use acim::io::fmt_f64;
use acim::markov::{
    invariance_check, series_identity, simulate_trajectory, weighted_cylinder_measure,
    zd_walk_return_estimate, CylinderWord, JumpParameter,
};
use acim::rational;
use acim::series::TruncationPolicy;
use acim::wandering::{
    annihilating_density, certify_wandering_cylinder, has_positive_mass,
    non_proportionality_witness, verify_annihilation_and_invariance,
};

/// Letter window for exhaustive cylinder enumeration. The transition
/// kernel is local, so measures inside the window are exact regardless
/// of the cutoff.
const LETTER_LO: i64 = -3;
const LETTER_HI: i64 = 3;

/// Pass threshold for the relative invariance defect of the plane map.
const PLANE_RELATIVE_TARGET: f64 = 1e-6;

/// Per-step relative mass-conservation requirement for grid transfers.
const MASS_DRIFT_TARGET: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(
    name = "acim",
    version,
    about = "Verification and computation runs for three dissipative systems: \
             the monotone shift (exact rationals), the unit-interval expansion \
             map (grids), and the subtractive plane map (quadrature)."
)]
struct Cli {
    /// One of: markov-verify, markov-remark1, markov-annihilate,
    /// engel-density, engel-witness, euclid-invariance, decay, simulate.
    #[arg(long)]
    command: String,

    /// Jump probability as an exact fraction "num/den" strictly
    /// between 0 and 1. Default 1/2.
    #[arg(long)]
    q: Option<String>,

    /// Grid resolution for the interval commands. Default 4096.
    #[arg(long)]
    cells: Option<usize>,

    /// Tolerance: series tail target, witness drain threshold, or
    /// quadrature target depending on the command.
    #[arg(long)]
    tol: Option<f64>,

    /// Iteration or series horizon.
    #[arg(long = "max-terms")]
    max_terms: Option<usize>,

    /// Maximum cylinder word length for exhaustive checks.
    #[arg(long = "max-len")]
    max_len: Option<usize>,

    /// RNG seed for the simulation command. Default 0.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory. Default "acim-out".
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed function for the interval commands: "indicator:a,b" or
    /// "constant:v". Default "indicator:0.5,1".
    #[arg(long)]
    f: Option<String>,

    /// Starting letter for the simulated walk. Default 0.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<i64>,

    /// Length of the simulated walk. Default 64.
    #[arg(long)]
    length: Option<usize>,

    /// Cylinder word as comma-separated letters, e.g. "-1,0,1".
    #[arg(long, allow_hyphen_values = true)]
    pattern: Option<String>,

    /// Lattice dimension for the return-count estimate; providing it
    /// adds the estimate to the simulate summary.
    #[arg(long)]
    d: Option<usize>,

    /// Steps per walk for the return-count estimate. Default 1000.
    #[arg(long)]
    steps: Option<usize>,

    /// Number of walks for the return-count estimate. Default 200.
    #[arg(long)]
    samples: Option<usize>,

    /// Rectangle "x_lo,x_hi,y_lo,y_hi" for the plane command. May be
    /// given several times; defaults to three reference rectangles.
    #[arg(long)]
    rect: Vec<String>,
}

struct Failure {
    code: u8,
    message: String,
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        message: message.into(),
    }
}

fn from_acim(e: AcimError) -> Failure {
    let code = match e {
        AcimError::Quadrature(_) => 4,
        _ => 3,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            emit_error(3, &e.to_string());
            return ExitCode::from(3);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            emit_error(f.code, &f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit_error(code: u8, message: &str) {
    let kind = match code {
        3 => "config-error",
        4 => "non-convergence",
        _ => "verification-failed",
    };
    eprintln!("{}", json!({ "kind": kind, "message": message }));
}

fn init_threads() {
    if let Ok(raw) = std::env::var("ACIM_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match cli.command.as_str() {
        "markov-verify" => markov_verify(cli),
        "markov-remark1" => markov_remark1(cli),
        "markov-annihilate" => markov_annihilate(cli),
        "engel-density" => engel_density(cli),
        "engel-witness" => engel_witness(cli),
        "euclid-invariance" => euclid_invariance(cli),
        "decay" => decay(cli),
        "simulate" => simulate(cli),
        other => Err(config_error(format!(
            "unknown command {other:?}; expected one of markov-verify, markov-remark1, \
             markov-annihilate, engel-density, engel-witness, euclid-invariance, decay, simulate"
        ))),
    }
}

// ------------------------------------------------------------------
// Shared parsing and output plumbing.
// ------------------------------------------------------------------

fn parse_q(cli: &Cli) -> Result<JumpParameter, Failure> {
    let raw = cli.q.as_deref().unwrap_or("1/2");
    JumpParameter::parse(raw).map_err(|e| config_error(e.to_string()))
}

fn parse_pattern(cli: &Cli, default: &[i64]) -> Result<CylinderWord, Failure> {
    let letters: Vec<i64> = match &cli.pattern {
        None => default.to_vec(),
        Some(raw) => raw
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<i64>()
                    .map_err(|_| config_error(format!("pattern letter {part:?} is not an integer")))
            })
            .collect::<Result<_, _>>()?,
    };
    if letters.is_empty() {
        return Err(config_error("pattern must contain at least one letter"));
    }
    Ok(CylinderWord::of(&letters))
}

fn engel_seed(cli: &Cli, cells: usize) -> Result<GridDensity, Failure> {
    let eps = 1.0 / (cells as f64 + 1.0);
    let spec = cli.f.as_deref().unwrap_or("indicator:0.5,1");
    let built = if let Some(rest) = spec.strip_prefix("indicator:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(config_error(format!(
                "indicator takes two endpoints, got {spec:?}"
            )));
        }
        let a = parse_float(parts[0])?;
        let b = parse_float(parts[1])?;
        GridDensity::indicator(eps, 1.0, cells, a, b)
    } else if let Some(rest) = spec.strip_prefix("constant:") {
        GridDensity::constant(eps, 1.0, cells, parse_float(rest)?)
    } else {
        return Err(config_error(format!(
            "seed function {spec:?} not recognized; use \"indicator:a,b\" or \"constant:v\""
        )));
    };
    built.map_err(|e| config_error(e.to_string()))
}

fn parse_float(raw: &str) -> Result<f64, Failure> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| config_error(format!("{raw:?} is not a number")))
}

fn out_dir(cli: &Cli) -> Result<PathBuf, Failure> {
    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("acim-out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| config_error(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(dir: &std::path::Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| config_error(format!("cannot write {}: {e}", path.display())))
}

fn write_summary(dir: &std::path::Path, summary: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    write_file(dir, "summary.json", &text)?;
    println!("wrote {}", dir.join("summary.json").display());
    Ok(())
}

fn word_cell(word: &CylinderWord) -> String {
    let parts: Vec<String> = word.letters().iter().map(|a| a.to_string()).collect();
    parts.join(" ")
}

// ------------------------------------------------------------------
// Commands.
// ------------------------------------------------------------------

fn markov_verify(cli: &Cli) -> Result<u8, Failure> {
    let q = parse_q(cli)?;
    let max_len = cli.max_len.unwrap_or(6);
    let dir = out_dir(cli)?;
    let outcome = invariance_check(&q, max_len, LETTER_LO, LETTER_HI);
    let summary = json!({
        "config": {
            "command": "markov-verify",
            "q": rational::format(&q.jump()),
            "max_len": max_len,
            "letters": [LETTER_LO, LETTER_HI],
        },
        "checked": outcome.checked,
        "exact": outcome.exact,
        "result": if outcome.exact { "all exact" } else { "defects found" },
        "defects": outcome.defects,
    });
    write_summary(&dir, &summary)?;
    Ok(if outcome.exact { 0 } else { 2 })
}

fn markov_remark1(cli: &Cli) -> Result<u8, Failure> {
    let q = parse_q(cli)?;
    let max_len = cli.max_len.unwrap_or(5);
    let dir = out_dir(cli)?;
    let words = CylinderWord::enumerate_valid_up_to(max_len, LETTER_LO, LETTER_HI);
    let mut csv = String::from("word,lhs,rhs,equal\n");
    let mut failures: Vec<Value> = Vec::new();
    for word in &words {
        let identity = series_identity(word, &q).map_err(from_acim)?;
        let holds = identity.holds();
        csv.push_str(&format!(
            "\"{}\",{},{},{}\n",
            word_cell(word),
            rational::format(&identity.series_sum),
            rational::format(&identity.density),
            holds
        ));
        if !holds {
            failures.push(json!({
                "word": word,
                "lhs": rational::format(&identity.series_sum),
                "rhs": rational::format(&identity.density),
            }));
        }
    }
    write_file(&dir, "identities.csv", &csv)?;
    let all_hold = failures.is_empty();
    let summary = json!({
        "config": {
            "command": "markov-remark1",
            "q": rational::format(&q.jump()),
            "max_len": max_len,
            "letters": [LETTER_LO, LETTER_HI],
        },
        "words": words.len(),
        "all_hold": all_hold,
        "failures": failures,
    });
    write_summary(&dir, &summary)?;
    Ok(if all_hold { 0 } else { 2 })
}

fn markov_annihilate(cli: &Cli) -> Result<u8, Failure> {
    let q = parse_q(cli)?;
    let word = parse_pattern(cli, &[-1, 0, 1])?;
    let max_len = cli.max_len.unwrap_or(5);
    let dir = out_dir(cli)?;
    let config = json!({
        "command": "markov-annihilate",
        "q": rational::format(&q.jump()),
        "pattern": word,
        "max_len": max_len,
    });
    let certificate = certify_wandering_cylinder(&word, &q);
    if !certificate.verified {
        let summary = json!({
            "config": config,
            "certificate": certificate.to_json(),
            "verified": false,
        });
        write_summary(&dir, &summary)?;
        return Ok(2);
    }
    let density = annihilating_density(&word, &q).map_err(from_acim)?;
    let vanishes = density.weighted_measure(&word) == rational::zero();
    let invariant = verify_annihilation_and_invariance(&density, max_len);
    let positive = has_positive_mass(&density, max_len);
    let witness = non_proportionality_witness(&density, max_len);

    let (lo, hi) = density.letter_window();
    let mut csv = String::from("word,reference_measure,annihilating_measure\n");
    for u in CylinderWord::enumerate_valid_up_to(max_len, lo, hi) {
        csv.push_str(&format!(
            "\"{}\",{},{}\n",
            word_cell(&u),
            rational::format(&weighted_cylinder_measure(&u, &q)),
            rational::format(&density.weighted_measure(&u)),
        ));
    }
    write_file(&dir, "measures.csv", &csv)?;

    let witness_json = witness.as_ref().map(|(a, b)| {
        json!({
            "pair": [a, b],
            "reference": [
                rational::format(&weighted_cylinder_measure(a, &q)),
                rational::format(&weighted_cylinder_measure(b, &q)),
            ],
            "annihilating": [
                rational::format(&density.weighted_measure(a)),
                rational::format(&density.weighted_measure(b)),
            ],
        })
    });
    let passed = vanishes && invariant && positive && witness.is_some();
    let summary = json!({
        "config": config,
        "certificate": certificate.to_json(),
        "vanishes_on_word": vanishes,
        "invariant": invariant,
        "positive_mass": positive,
        "non_proportionality": witness_json,
        "pass": passed,
    });
    write_summary(&dir, &summary)?;
    Ok(if passed { 0 } else { 2 })
}

fn engel_density(cli: &Cli) -> Result<u8, Failure> {
    let cells = cli.cells.unwrap_or(4096);
    let tol = cli.tol.unwrap_or(1e-6);
    let max_terms = cli.max_terms.unwrap_or(200);
    let dir = out_dir(cli)?;
    let seed = engel_seed(cli, cells)?;
    let policy = TruncationPolicy::new(max_terms, tol).map_err(|e| config_error(e.to_string()))?;
    let report = invariant_density_series(&seed, &policy).map_err(|e| config_error(e.to_string()))?;

    let mut csv = String::from("cell,x_lo,x_hi,value\n");
    let (lo, _) = report.density.domain();
    let h = report.density.cell_width();
    for (i, v) in report.density.values().iter().enumerate() {
        csv.push_str(&format!(
            "{i},{},{},{}\n",
            fmt_f64(lo + i as f64 * h),
            fmt_f64(lo + (i + 1) as f64 * h),
            fmt_f64(*v)
        ));
    }
    write_file(&dir, "density.csv", &csv)?;

    let summary = json!({
        "config": {
            "command": "engel-density",
            "f": cli.f.as_deref().unwrap_or("indicator:0.5,1"),
            "cells": cells,
            "tol": fmt_f64(tol),
            "max_terms": max_terms,
        },
        "series": report.summary_json(),
    });
    write_summary(&dir, &summary)?;
    Ok(if report.tail.converged { 0 } else { 4 })
}

fn engel_witness(cli: &Cli) -> Result<u8, Failure> {
    let cells = cli.cells.unwrap_or(4096);
    let tol = cli.tol.unwrap_or(1e-6);
    let max_terms = cli.max_terms.unwrap_or(200);
    let dir = out_dir(cli)?;
    let seed = engel_seed(cli, cells)?;
    let policy = TruncationPolicy::new(max_terms, tol).map_err(|e| config_error(e.to_string()))?;
    let report = dissipativity_witness(&seed, &policy).map_err(|e| config_error(e.to_string()))?;
    write_file(&dir, "norms.csv", &report.norms_csv())?;
    let summary = json!({
        "config": {
            "command": "engel-witness",
            "f": cli.f.as_deref().unwrap_or("indicator:0.5,1"),
            "cells": cells,
            "tol": fmt_f64(tol),
            "max_terms": max_terms,
        },
        "witness": report.summary_json(),
    });
    write_summary(&dir, &summary)?;
    if report.max_mass_drift > MASS_DRIFT_TARGET {
        return Ok(2);
    }
    Ok(if report.steps_to_tolerance.is_some() {
        0
    } else {
        4
    })
}

fn euclid_invariance(cli: &Cli) -> Result<u8, Failure> {
    let quad_tol = cli.tol.unwrap_or(1e-9);
    let dir = out_dir(cli)?;
    let e = std::f64::consts::E;
    let rects: Vec<PlanarRectangle> = if cli.rect.is_empty() {
        vec![
            PlanarRectangle::new(1.0, e, 1.0, e),
            PlanarRectangle::new(0.1, 0.2, 5.0, 10.0),
            PlanarRectangle::new(0.5, 2.0, 0.25, 4.0),
        ]
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|err| config_error(err.to_string()))?
    } else {
        let mut built = Vec::new();
        for raw in &cli.rect {
            let parts: Vec<&str> = raw.split(',').collect();
            if parts.len() != 4 {
                return Err(config_error(format!(
                    "rectangle {raw:?} must be \"x_lo,x_hi,y_lo,y_hi\""
                )));
            }
            let vals: Vec<f64> = parts
                .iter()
                .map(|p| parse_float(p))
                .collect::<Result<_, _>>()?;
            built.push(
                PlanarRectangle::new(vals[0], vals[1], vals[2], vals[3])
                    .map_err(|err| config_error(err.to_string()))?,
            );
        }
        built
    };

    let mut csv = String::from("x_lo,x_hi,y_lo,y_hi,measure,defect,relative\n");
    let mut rows: Vec<Value> = Vec::new();
    let mut pass = true;
    for rect in &rects {
        let measure = euclid_rect_measure(rect);
        let defect = euclid_invariance_defect(rect, quad_tol).map_err(from_acim)?;
        let relative = defect / measure;
        pass &= relative <= PLANE_RELATIVE_TARGET;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(rect.x_lo),
            fmt_f64(rect.x_hi),
            fmt_f64(rect.y_lo),
            fmt_f64(rect.y_hi),
            fmt_f64(measure),
            fmt_f64(defect),
            fmt_f64(relative)
        ));
        rows.push(json!({
            "rect": [rect.x_lo, rect.x_hi, rect.y_lo, rect.y_hi],
            "measure": measure,
            "defect": defect,
            "relative": relative,
        }));
    }
    write_file(&dir, "rects.csv", &csv)?;
    let summary = json!({
        "config": {
            "command": "euclid-invariance",
            "tol": fmt_f64(quad_tol),
            "relative_target": fmt_f64(PLANE_RELATIVE_TARGET),
        },
        "rects": rows,
        "pass": pass,
    });
    write_summary(&dir, &summary)?;
    Ok(if pass { 0 } else { 2 })
}

fn decay(cli: &Cli) -> Result<u8, Failure> {
    let q = parse_q(cli)?;
    let horizon = cli.max_terms.unwrap_or(64);
    if horizon == 0 {
        return Err(config_error("decay horizon must be at least 1"));
    }
    let dir = out_dir(cli)?;
    let seed = two_letter_mean_zero_seed(&q);
    let plain = exactness_decay(&seed, &q, horizon).map_err(from_acim)?;
    let cesaro = ergodic_average_decay(&seed, &q, horizon).map_err(from_acim)?;
    write_file(&dir, "decay.csv", &plain.to_csv_string())?;
    write_file(&dir, "cesaro.csv", &cesaro.to_csv_string())?;
    let b0 = plain.norm(0).expect("horizon >= 1").clone();
    let b_last = plain.norm(horizon).expect("horizon norm").clone();
    let halved = rational::int(2) * &b_last <= b0;
    let summary = json!({
        "config": {
            "command": "decay",
            "q": rational::format(&q.jump()),
            "horizon": horizon,
        },
        "plain": plain.summary_json(),
        "cesaro": cesaro.summary_json(),
        "halved_by_horizon": halved,
    });
    write_summary(&dir, &summary)?;
    Ok(if halved { 0 } else { 2 })
}

fn simulate(cli: &Cli) -> Result<u8, Failure> {
    let q = parse_q(cli)?;
    let start = cli.start.unwrap_or(0);
    let length = cli.length.unwrap_or(64);
    let seed = cli.seed.unwrap_or(0);
    let dir = out_dir(cli)?;
    let trajectory =
        simulate_trajectory(&q, start, length, seed).map_err(|e| config_error(e.to_string()))?;
    let mut csv = String::from("n,letter\n");
    for (n, letter) in trajectory.letters().iter().enumerate() {
        csv.push_str(&format!("{},{letter}\n", n + 1));
    }
    write_file(&dir, "trajectory.csv", &csv)?;

    let mut config = json!({
        "command": "simulate",
        "q": rational::format(&q.jump()),
        "start": start,
        "length": length,
        "seed": seed,
    });
    let mut summary = json!({
        "trajectory": trajectory,
        "final_letter": trajectory.last(),
    });
    if let Some(d) = cli.d {
        let steps = cli.steps.unwrap_or(1000);
        let samples = cli.samples.unwrap_or(200);
        let estimate = zd_walk_return_estimate(d, steps, samples, seed)
            .map_err(|e| config_error(e.to_string()))?;
        config["d"] = json!(d);
        config["steps"] = json!(steps);
        config["samples"] = json!(samples);
        summary["mean_returns_to_origin"] = json!(estimate);
    }
    summary["config"] = config;
    write_summary(&dir, &summary)?;
    Ok(0)
}
