use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use paircorr::asymptotics::{default_fit_grid, uniform_grid};
use paircorr::generators::{self, DEFAULT_POINT_BUDGET};
use paircorr::graph::{GraphJson, DEFAULT_CLASS_BUDGET};
use paircorr::{fit_growth, g_limit, pair_correlation, verify, Error, Graph, Params, Scaling, Spectrum, SyntheticSpec};

use crate::{Cli, Command, FitArgs, GenerateArgs, PaircorrArgs, Source, VerifyArgs};

pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

const BUDGET_ENV: &str = "PAIRCORR_BUDGET";
const COMMENSURABLE_TOL: f64 = 1e-9;

pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
        _ => EXIT_INVALID,
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Generate(args) => generate(args, cli.verbose),
        Command::Paircorr(args) => paircorr(args, cli.verbose),
        Command::Fit(args) => fit(args),
        Command::Verify(args) => verify_cmd(args),
    }
}

fn budget(default: u64) -> Result<u64> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{BUDGET_ENV} must be a positive integer, got {v:?}")),
        Err(_) => Ok(default),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn read_spectrum(path: &Path, l_max: Option<f64>) -> Result<Spectrum> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let tag = path.display().to_string();
    Ok(Spectrum::read_csv(BufReader::new(file), l_max, tag)?)
}

fn graph_for(args: &GenerateArgs) -> Result<Graph> {
    match args.source {
        Source::Rose => {
            let petals = args
                .petals
                .or((!args.lengths.is_empty()).then_some(args.lengths.len()))
                .ok_or_else(|| anyhow!("rose needs --petals or --lengths"))?;
            let lengths = if args.lengths.is_empty() {
                vec![1.0; petals]
            } else if args.lengths.len() == petals {
                args.lengths.clone()
            } else {
                bail!("--lengths has {} values but --petals is {petals}", args.lengths.len());
            };
            Ok(Graph::rose(&lengths)?)
        }
        Source::Graph => {
            let path = args
                .graph
                .as_ref()
                .ok_or_else(|| anyhow!("graph source needs --graph"))?;
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let json: GraphJson = serde_json::from_reader(BufReader::new(file))
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            Ok(Graph::from_json(&json)?)
        }
        _ => unreachable!("not a graph source"),
    }
}

fn generate(args: &GenerateArgs, verbose: bool) -> Result<u8> {
    let spectrum = match args.source {
        Source::LogIntegers => generators::log_integers_budgeted(args.lmax, budget(DEFAULT_POINT_BUDGET)?)?,
        Source::Synthetic => {
            let params = Params::new(args.c, args.alpha, args.delta, 0.0)?;
            let spec = match args.jitter {
                Some(amp) => SyntheticSpec::jittered(params, args.lmax, args.seed, amp),
                None => SyntheticSpec::inverse_counting(params, args.lmax),
            };
            generators::generate(&spec, budget(DEFAULT_POINT_BUDGET)?)?
        }
        Source::Rose | Source::Graph => {
            let graph = graph_for(args)?;
            if graph.lengths_commensurable(COMMENSURABLE_TOL) {
                eprintln!(
                    "warning: all edge lengths are commensurable; the length spectrum is lattice-like \
                     and pair correlation limits are not expected"
                );
            }
            let limit = budget(DEFAULT_CLASS_BUDGET)?;
            if args.orbits {
                paircorr::enumerate_orbit_distances(&graph, args.base, args.lmax, limit)?
            } else {
                paircorr::enumerate_closed_geodesics(&graph, args.lmax, limit)?
            }
        }
    };
    let mut out = open_output(args.out.as_deref())?;
    spectrum.write_csv(&mut out)?;
    out.flush()?;
    let summary = format!(
        "size={} l_max={} growth={}",
        spectrum.len(),
        spectrum.l_max(),
        spectrum.growth(spectrum.l_max())?
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if verbose {
        eprintln!("source: {}", spectrum.source_tag());
    }
    Ok(0)
}

fn overlay(args: &PaircorrArgs, spectrum: &Spectrum) -> Result<(String, Option<Params>)> {
    let fitted = || -> Result<Params> {
        let grid = default_fit_grid(spectrum.l_max());
        Ok(fit_growth(spectrum, &grid)?.params)
    };
    match args.overlay_params.as_deref() {
        None => match fitted() {
            Ok(p) => Ok(("fit".into(), Some(p))),
            Err(e) => {
                eprintln!("warning: no overlay, growth fit failed: {e:#}");
                Ok(("none".into(), None))
            }
        },
        Some("fit") => Ok(("fit".into(), Some(fitted()?))),
        Some(text) => {
            let raw = if text.trim_start().starts_with('{') {
                text.to_string()
            } else {
                std::fs::read_to_string(text).with_context(|| format!("cannot read {text}"))?
            };
            let params: Params =
                serde_json::from_str(&raw).map_err(|e| Error::Parse(format!("overlay params: {e}")))?;
            params.validate()?;
            Ok(("supplied".into(), Some(params)))
        }
    }
}

/// Spectrum files do not record their truncation bound. Without `--lmax`
/// it is taken as the largest of the last length and `bound`.
fn read_spectrum_covering(path: &Path, l_max: Option<f64>, bound: Option<f64>) -> Result<Spectrum> {
    let spectrum = read_spectrum(path, l_max)?;
    match bound {
        Some(b) if l_max.is_none() && spectrum.l_max() < b => Ok(Spectrum::from_sorted(
            spectrum.lengths().to_vec(),
            spectrum.weights().to_vec(),
            b,
            spectrum.source_tag().to_string(),
        )?),
        _ => Ok(spectrum),
    }
}

fn paircorr(args: &PaircorrArgs, verbose: bool) -> Result<u8> {
    let spectrum = read_spectrum_covering(&args.input, args.lmax, Some(args.ncut))?;
    let scaling = Scaling::parse(&args.psi)?;
    let hist = pair_correlation(
        &spectrum,
        args.ncut,
        &scaling,
        args.window,
        args.bin,
        !args.exclude_diagonal,
    )?;
    let (source, params) = overlay(args, &spectrum)?;

    let mut doc = serde_json::to_value(hist.to_json())?;
    doc["overlay"] = json!({ "source": source, "params": params });
    write_json(args.out.as_deref(), &doc)?;

    if let Some(path) = &args.table {
        write_table(path, &hist, params.as_ref(), scaling.is_unit())?;
    }
    if verbose {
        eprintln!("n_cut={} psi={} renorm={}", hist.n_cut, hist.psi_at_n, hist.renorm);
    }
    Ok(0)
}

/// The limit overlay is `g` at unit scaling and the constant `δ/2`
/// once differences are magnified.
fn write_table(path: &Path, hist: &paircorr::Histogram, params: Option<&Params>, unit: bool) -> Result<()> {
    let mut out = open_output(Some(path))?;
    writeln!(out, "center,density,limit")?;
    for (center, density) in hist.renormalized_density() {
        let limit = match params {
            Some(p) if unit => g_limit(p, center).to_string(),
            Some(p) => (p.delta / 2.0).to_string(),
            None => String::new(),
        };
        writeln!(out, "{center},{density},{limit}")?;
    }
    out.flush()?;
    Ok(())
}

fn fit(args: &FitArgs) -> Result<u8> {
    let spectrum = read_spectrum_covering(&args.input, args.lmax, args.tmax)?;
    let l_max = spectrum.l_max();
    let grid = match (args.tmin, args.tmax) {
        (None, None) if args.samples == paircorr::asymptotics::DEFAULT_FIT_SAMPLES => default_fit_grid(l_max),
        (lo, hi) => uniform_grid(
            lo.unwrap_or(paircorr::asymptotics::DEFAULT_FIT_LOWER_FRACTION * l_max),
            hi.unwrap_or(l_max),
            args.samples,
        ),
    };
    let report = fit_growth(&spectrum, &grid)?;
    write_json(args.out.as_deref(), &report.to_json())?;
    Ok(0)
}

fn verify_cmd(args: &VerifyArgs) -> Result<u8> {
    let report = match &args.suite {
        Some(name) => {
            let suite = verify::run_suite(name, args.seed)?.ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown suite {name:?}; expected one of {}",
                    verify::SUITE_NAMES.join(", ")
                ))
            })?;
            verify::VerifyReport::new(vec![suite])
        }
        None => verify::run_all(args.seed)?,
    };
    let value: Value = serde_json::to_value(&report)?;
    write_json(args.out.as_deref(), &value)?;
    for suite in &report.suites {
        eprintln!("{}: {}", suite.name, if suite.passed { "pass" } else { "FAIL" });
    }
    Ok(if report.passed { 0 } else { EXIT_VERIFY_FAILED })
}
