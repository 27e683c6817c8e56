use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use p2d_ident::estimation::{fit, multistart_fit, synth_data, Bounds, FitOptions};
use p2d_ident::identifiability::{fisher_information, rank_analysis, sensitivity_matrix_with, SensitivityOptions};
use p2d_ident::impedance::{
    boundary_overpotential_impedance, electrolyte_impedance, solid_diffusion_impedance, total_impedance,
    total_impedance_boundary, ComplexFrequency, ImpedanceSpectrum,
};
use p2d_ident::io::{
    read_full_parameters, read_grouped_parameters, read_json, read_spectrum, to_document, write_plot_to,
    write_spectrum_to, write_step_to, GridSpec,
};
use p2d_ident::oracle::{default_time_step, discretize, discretize_cell, frequency_response_hz, step_response, Mesh};
use p2d_ident::params::{group_parameters, FullCellParameters, GroupId, Submodel};

#[derive(Parser)]
#[command(
    name = "p2d-ident",
    version,
    about = "Grouped impedance model of a linearized pseudo-2D cell"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Physical parameter record to grouped parameters.
    Group {
        full: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model spectrum from grouped parameters, optionally with noise.
    Synth {
        grouped: PathBuf,
        #[arg(long, default_value = "1e-4,1e5,60")]
        grid: GridSpec,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write Nyquist/Bode columns here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Discretized PDE oracle: frequency response or current-step trace.
    Simulate {
        full: PathBuf,
        #[arg(long, default_value = "1e-3,1e2,40")]
        grid: GridSpec,
        #[arg(long, default_value = "800,800,800,2000")]
        mesh: Mesh,
        #[arg(long, value_enum, default_value_t = Part::Cell)]
        part: Part,
        /// Rerun on a mesh refined twice and report the error ratio.
        #[arg(long)]
        refine: bool,
        /// Current-step trace instead of a spectrum.
        #[arg(long)]
        step: bool,
        /// Time step in seconds; defaults to a fraction of the fastest
        /// double-layer time constant.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Step height in amperes.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Analytic-vs-oracle comparison as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Export (A, B, C, D) as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Sensitivity rank, collinearity and Cramér–Rao report.
    Identify {
        grouped: PathBuf,
        #[arg(long, default_value = "1e-4,1e5,60")]
        grid: GridSpec,
        /// Noise standard deviation (relative) for the bounds.
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Append a copy of this column before the analysis.
        #[arg(long, value_name = "GROUP")]
        duplicate: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Least-squares fit of grouped parameters to a spectrum.
    Fit {
        spectrum: PathBuf,
        init: PathBuf,
        /// FitOptions as JSON; flags below override it.
        #[arg(long)]
        options: Option<PathBuf>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Groups held at their initial value, comma separated.
        #[arg(long, value_delimiter = ',')]
        fix: Vec<String>,
        /// Random starts drawn within ±`decades` of the initial values.
        #[arg(long, default_value_t = 1)]
        starts: usize,
        #[arg(long, default_value_t = 0.5)]
        decades: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Part {
    Cell,
    Solid,
    Electrolyte,
    Overpotential,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(out: &Option<PathBuf>, doc: &Value) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn document<T: Serialize>(value: &T) -> Result<Value> {
    Ok(to_document(value)?)
}

fn context(path: &Path) -> String {
    format!("reading {}", path.display())
}

fn group(full: &Path, out: &Option<PathBuf>) -> Result<()> {
    let p = read_full_parameters(full).with_context(|| context(full))?;
    emit_json(out, &document(&group_parameters(&p)?)?)
}

fn synth(
    grouped: &Path,
    grid: GridSpec,
    noise: f64,
    seed: u64,
    out: &Option<PathBuf>,
    plot: &Option<PathBuf>,
) -> Result<()> {
    let g = read_grouped_parameters(grouped).with_context(|| context(grouped))?;
    let data = synth_data(&g, &grid.frequencies()?, noise, seed)?;
    let mut w = sink(out)?;
    write_spectrum_to(&mut w, &data)?;
    w.flush()?;
    if let Some(path) = plot {
        write_plot_to(File::create(path)?, &data)?;
    }
    Ok(())
}

fn analytic(full: &FullCellParameters, part: Part, s: ComplexFrequency) -> Result<Complex64> {
    let g = group_parameters(full)?;
    Ok(match part {
        Part::Cell => total_impedance_boundary(full, s)?,
        Part::Solid => solid_diffusion_impedance(&g, s)?,
        Part::Electrolyte => electrolyte_impedance(&g, s)?,
        Part::Overpotential => boundary_overpotential_impedance(full, s),
    })
}

fn realize(full: &FullCellParameters, mesh: &Mesh, part: Part) -> Result<p2d_ident::oracle::StateSpaceRealization> {
    Ok(match part {
        Part::Cell => discretize_cell(full, mesh)?,
        Part::Solid => discretize(full, mesh, Submodel::Solid)?,
        Part::Electrolyte => discretize(full, mesh, Submodel::Electrolyte)?,
        Part::Overpotential => discretize(full, mesh, Submodel::Overpotential)?,
    })
}

fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / y.norm())
        .fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    full: &Path,
    grid: GridSpec,
    mesh: Mesh,
    part: Part,
    refine: bool,
    step: Option<(Option<f64>, usize, f64)>,
    out: &Option<PathBuf>,
    report: &Option<PathBuf>,
    export: &Option<PathBuf>,
) -> Result<()> {
    let p = read_full_parameters(full).with_context(|| context(full))?;
    let ss = realize(&p, &mesh, part)?;
    if let Some(path) = export {
        emit_json(&Some(path.clone()), &ss.to_json())?;
    }
    if let Some((dt, n, amplitude)) = step {
        let dt = match dt {
            Some(dt) => dt,
            None => default_time_step(&p)?,
        };
        let trace = step_response(&ss, dt, n, amplitude)?;
        let mut w = sink(out)?;
        write_step_to(&mut w, &trace)?;
        w.flush()?;
        return Ok(());
    }
    let freqs = grid.frequencies()?;
    let z = frequency_response_hz(&ss, &freqs)?;
    let exact = freqs
        .iter()
        .map(|&f| analytic(&p, part, ComplexFrequency::from_hz(f)))
        .collect::<Result<Vec<_>>>()?;
    let err = max_rel(&z, &exact);
    let mut rep = json!({
        "schema_version": p2d_ident::io::SCHEMA_VERSION,
        "mesh": mesh,
        "grid": grid,
        "max_rel_error": err,
    });
    if matches!(part, Part::Cell) {
        let g = group_parameters(&p)?;
        let compact = freqs
            .iter()
            .map(|&f| total_impedance(&g, ComplexFrequency::from_hz(f)))
            .collect::<p2d_ident::Result<Vec<_>>>()?;
        rep["compact_max_rel_deviation"] = json!(max_rel(&compact, &z));
    }
    if refine {
        let fine = mesh.refined(2);
        let zf = frequency_response_hz(&realize(&p, &fine, part)?, &freqs)?;
        let ef = max_rel(&zf, &exact);
        rep["refined_mesh"] = json!(fine);
        rep["refined_max_rel_error"] = json!(ef);
        rep["error_ratio"] = json!(err / ef);
    }
    eprintln!("oracle vs analytic: max relative error {err:.3e}");
    let spec = ImpedanceSpectrum::new(freqs, z, None)?;
    let mut w = sink(out)?;
    write_spectrum_to(&mut w, &spec)?;
    w.flush()?;
    if report.is_some() {
        emit_json(report, &rep)?;
    }
    Ok(())
}

fn identify(
    grouped: &Path,
    grid: GridSpec,
    noise: f64,
    tol: f64,
    duplicate: &Option<String>,
    out: &Option<PathBuf>,
) -> Result<()> {
    let g = read_grouped_parameters(grouped).with_context(|| context(grouped))?;
    let freqs = grid.frequencies()?;
    let mut s = sensitivity_matrix_with(&g, &freqs, &SensitivityOptions::default())?;
    if let Some(name) = duplicate {
        s = s.with_duplicate(name)?;
    }
    let rank = rank_analysis(&s, tol)?;
    let fisher = fisher_information(&s, noise)?;
    let crlb: Vec<Value> = fisher
        .param_labels
        .iter()
        .zip(&fisher.crlb_sd)
        .map(|(l, sd)| json!({"parameter": l, "crlb_sd": sd}))
        .collect();
    emit_json(
        out,
        &json!({
            "schema_version": p2d_ident::io::SCHEMA_VERSION,
            "grid": grid,
            "frequencies_hz": freqs,
            "duplicate": duplicate,
            "columns": s.param_labels,
            "rank": rank.rank,
            "deficiency": rank.deficiency(),
            "tol_ratio": rank.tol_ratio,
            "singular_values": rank.singular_values,
            "condition_number": rank.condition_number,
            "near_collinear_pairs": rank.near_collinear_pairs,
            "null_directions": rank.null_directions,
            "noise_sd": noise,
            "crlb": crlb,
            "unbounded": fisher.unbounded,
        }),
    )
}

#[allow(clippy::too_many_arguments)]
fn fit_cmd(
    spectrum: &Path,
    init: &Path,
    options: &Option<PathBuf>,
    max_iter: Option<usize>,
    fix: &[String],
    starts: usize,
    decades: f64,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<()> {
    let data = read_spectrum(spectrum).with_context(|| context(spectrum))?;
    let g0 = read_grouped_parameters(init).with_context(|| context(init))?;
    let mut opts: FitOptions = match options {
        Some(p) => read_json(p).with_context(|| context(p))?,
        None => FitOptions::default(),
    };
    if let Some(m) = max_iter {
        opts.max_iter = m;
    }
    for name in fix {
        let id = GroupId::from_name(name).with_context(|| format!("unknown group {name:?}"))?;
        if !opts.fixed.contains(&id) {
            opts.fixed.push(id);
        }
    }
    let doc = if starts > 1 {
        let bounds = opts.bounds.clone().unwrap_or_else(|| Bounds::around(&g0, decades));
        let ms = multistart_fit(&data, &g0, &bounds, starts, seed, &opts)?;
        let mut doc = document(&ms.best)?;
        doc["best_start"] = json!(ms.best_index);
        doc["starts"] = serde_json::to_value(&ms.starts)?;
        doc
    } else {
        document(&fit(&data, &g0, &opts)?)?
    };
    if doc["converged"] == json!(false) {
        eprintln!("fit did not converge: {}", doc["termination"]);
    }
    emit_json(out, &doc)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Group { full, out } => group(&full, &out),
        Command::Synth {
            grouped,
            grid,
            noise,
            seed,
            out,
            plot,
        } => synth(&grouped, grid, noise, seed, &out, &plot),
        Command::Simulate {
            full,
            grid,
            mesh,
            part,
            refine,
            step,
            dt,
            steps,
            amplitude,
            out,
            report,
            export,
        } => simulate(
            &full,
            grid,
            mesh,
            part,
            refine,
            step.then_some((dt, steps, amplitude)),
            &out,
            &report,
            &export,
        ),
        Command::Identify {
            grouped,
            grid,
            noise,
            tol,
            duplicate,
            out,
        } => identify(&grouped, grid, noise, tol, &duplicate, &out),
        Command::Fit {
            spectrum,
            init,
            options,
            max_iter,
            fix,
            starts,
            decades,
            seed,
            out,
        } => fit_cmd(&spectrum, &init, &options, max_iter, &fix, starts, decades, seed, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
