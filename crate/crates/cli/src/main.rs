//! Configuration-driven front end for the coupled-mode strip solver.
//!
//! The run is described by a flat key-value config file (see
//! `docs/config.md`); the command line only points at the config and the
//! output directory. Exit codes: 0 success, 1 usage/config error,
//! 2 numerical failure.

mod config;
mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use log::info;

use ccmt_core::benchmarks::{
    convergence_study, BenchmarkCase, PhiKappa, SurfaceFamily,
};
use ccmt_core::ccms::{solve_ccms, CcmsCoefficients};
use ccmt_core::dtn::{dtn_exact_benchmark, dtn_from_solution};
use ccmt_core::eigensystem::ReferenceParams;
use ccmt_core::error::CcmtError;
use ccmt_core::geometry::{Profile, StripGeometry};
use ccmt_core::oracle::sigma_fd_solve;

use config::Config;

#[derive(Parser)]
#[command(name = "ccmt", about = "Coupled-mode solver for wavy periodic strips")]
struct Cli {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV (and optional SVG) artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write SVG plots of the main diagnostics.
    #[arg(long)]
    plots: bool,
    /// Size of the worker thread pool (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CCMT_LOG")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.chain().any(|c| c.is::<CcmtError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool setup")?;
    }
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create output directory {}", cli.out.display()))?;
    let cfg = Config::load(&cli.config)?;
    let run = RunSetup::from_config(&cfg)?;
    match cfg.require("run.command")? {
        "solve" => cmd_solve(cli, &run),
        "convergence" => cmd_convergence(cli, &cfg, &run),
        "decay" => cmd_decay(cli, &run),
        "dtn" => cmd_dtn(cli, &run),
        "oracle-check" => cmd_oracle_check(cli, &cfg, &run),
        other => bail!("unknown run.command {other:?} (expected solve, convergence, decay, dtn or oracle-check)"),
    }
}

/// Everything shared by the commands: geometry, reference parameters and the
/// surface Dirichlet data.
struct RunSetup {
    geometry: StripGeometry,
    params: ReferenceParams,
    family: SurfaceFamily,
    epsilon: f64,
    kappa: f64,
    h0: f64,
    nx: usize,
    n_tot: usize,
    quad_nodes: Option<usize>,
    /// `Some` when the surface data is the benchmark trace (flat bottom),
    /// giving access to exact references.
    benchmark: Option<PhiKappa>,
    psi: Vec<f64>,
    record_timings: bool,
}

impl RunSetup {
    fn from_config(cfg: &Config) -> Result<RunSetup> {
        let h0: f64 = cfg.get("geometry.h0", 1.0)?;
        let epsilon: f64 = cfg.get("geometry.epsilon", 0.5)?;
        let family = match cfg.get("geometry.family", "smooth".to_string())?.as_str() {
            "smooth" => SurfaceFamily::Smooth,
            "rough" => SurfaceFamily::Rough,
            other => bail!("geometry.family {other:?} (expected smooth or rough)"),
        };
        let surface = match family {
            SurfaceFamily::Smooth => Profile::Cosine {
                mean: 0.0,
                amplitude: epsilon * h0,
                wavenumber: cfg.get("geometry.surface_wavenumber", 1u32)? as f64,
                phase: cfg.get("geometry.surface_phase", 0.0)?,
            },
            SurfaceFamily::Rough => Profile::Rough {
                amplitude: epsilon * h0,
            },
        };
        let bottom_amplitude: f64 = cfg.get("geometry.bottom_amplitude", 0.0)?;
        let bottom = if bottom_amplitude == 0.0 {
            Profile::Constant(h0)
        } else {
            Profile::Cosine {
                mean: h0,
                amplitude: bottom_amplitude,
                wavenumber: cfg.get("geometry.bottom_wavenumber", 1u32)? as f64,
                phase: cfg.get("geometry.bottom_phase", 0.0)?,
            }
        };
        let geometry = StripGeometry::new(surface, bottom, h0, 2.0 * std::f64::consts::PI)?;

        let kappa: f64 = cfg.get("params.kappa", 1.0)?;
        let params = match cfg.get("params.mu0", "auto".to_string())?.as_str() {
            "auto" => ReferenceParams::from_wavenumber(kappa, h0)?,
            s => ReferenceParams::new(s.parse::<f64>().context("params.mu0")?, h0)?,
        };

        let nx: usize = cfg.get("run.nx", 256)?;
        let n_tot: usize = cfg.get("run.n_tot", 7)?;
        if n_tot < 3 {
            bail!("run.n_tot must be at least 3 (the non-evanescent modes)");
        }
        let quad_nodes = match cfg.raw("run.quad_nodes") {
            None => None,
            Some(s) => Some(s.parse::<usize>().context("run.quad_nodes")?),
        };

        let default_psi = if geometry.has_flat_bottom() {
            "benchmark"
        } else {
            "cosine"
        };
        let grid = geometry.grid(nx);
        let (benchmark, psi) = match cfg.get("run.psi", default_psi.to_string())?.as_str() {
            "benchmark" => {
                if !geometry.has_flat_bottom() {
                    bail!("run.psi = benchmark needs a flat bottom; use run.psi = cosine");
                }
                let field = PhiKappa::new(kappa, h0);
                let psi = grid.iter().map(|&x| field.surface_data(&geometry, x)).collect();
                (Some(field), psi)
            }
            "cosine" => (None, grid.iter().map(|&x| (kappa * x).cos()).collect()),
            other => bail!("run.psi {other:?} (expected benchmark or cosine)"),
        };

        let record_timings = match cfg.get("output.timings", "none".to_string())?.as_str() {
            "none" => false,
            "wall" => true,
            other => bail!("output.timings {other:?} (expected none or wall)"),
        };

        Ok(RunSetup {
            geometry,
            params,
            family,
            epsilon,
            kappa,
            h0,
            nx,
            n_tot,
            quad_nodes,
            benchmark,
            psi,
            record_timings,
        })
    }

    fn solve(&self) -> Result<ccmt_core::ModalField> {
        let m = self.n_tot - 3;
        let co = CcmsCoefficients::assemble(&self.params, &self.geometry, self.nx, m, self.quad_nodes)?;
        Ok(solve_ccms(&co, m, &self.psi)?)
    }
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 24 + header.len());
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.12e}").unwrap();
        }
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn cmd_solve(cli: &Cli, run: &RunSetup) -> Result<()> {
    let mf = run.solve()?;
    let mut header = "x".to_string();
    for n in -2..=(run.n_tot as i32 - 3) {
        write!(header, ",phi[{n}]").unwrap();
    }
    let rows: Vec<Vec<f64>> = (0..run.nx)
        .map(|j| {
            let mut row = vec![mf.stations[j].x];
            for n in -2..=(run.n_tot as i32 - 3) {
                row.push(mf.amplitude(j, n));
            }
            row
        })
        .collect();
    write_csv(&cli.out.join("solution.csv"), &header, &rows)?;
    println!(
        "solved {} stations x {} modes ({:?} surface, deformation {})",
        run.nx, run.n_tot, run.family, run.epsilon
    );
    Ok(())
}

fn cmd_decay(cli: &Cli, run: &RunSetup) -> Result<()> {
    let mf = run.solve()?;
    let diag = mf.decay_diagnostics();
    let rows: Vec<Vec<f64>> = diag
        .iter()
        .map(|&(n, sup, c2)| vec![n as f64, sup, c2])
        .collect();
    write_csv(&cli.out.join("decay.csv"), "n,sup_norm,c2_norm", &rows)?;
    let hi = (run.n_tot as f64 - 10.0).max(20.0);
    match mf.c2_decay_slope(15.0, hi) {
        Ok(slope) => println!("C2-norm decay slope over [15, {hi:.0}]: {slope:.3}"),
        Err(e) => println!("C2-norm decay slope unavailable: {e}"),
    }
    if cli.plots {
        let series = [
            svg::Series {
                label: "sup",
                points: diag.iter().map(|&(n, s, _)| (n as f64, s)).collect(),
            },
            svg::Series {
                label: "C2",
                points: diag.iter().map(|&(n, _, c)| (n as f64, c)).collect(),
            },
        ];
        svg::write_loglog(&cli.out.join("decay.svg"), "modal amplitude decay", &series)?;
    }
    Ok(())
}

fn cmd_dtn(cli: &Cli, run: &RunSetup) -> Result<()> {
    let mf = run.solve()?;
    let g = dtn_from_solution(&mf, &run.psi, None)?;
    let (header, rows): (&str, Vec<Vec<f64>>) = match &run.benchmark {
        Some(field) => {
            let exact = dtn_exact_benchmark(&run.geometry, field, run.nx)?;
            let rows: Vec<Vec<f64>> = (0..run.nx)
                .map(|j| {
                    vec![
                        g.x[j],
                        g.values[j],
                        exact.values[j],
                        (g.values[j] - exact.values[j]).abs(),
                    ]
                })
                .collect();
            let err = ccmt_core::benchmarks::relative_trace_error(&g.values, &exact.values);
            println!("relative trace error vs exact flux: {err:.3e}");
            ("x,g,g_exact,abs_err", rows)
        }
        None => (
            "x,g",
            (0..run.nx).map(|j| vec![g.x[j], g.values[j]]).collect(),
        ),
    };
    write_csv(&cli.out.join("dtn.csv"), header, &rows)
}

fn cmd_convergence(cli: &Cli, cfg: &Config, run: &RunSetup) -> Result<()> {
    if run.benchmark.is_none() {
        bail!("run.command = convergence needs the benchmark surface data (flat bottom)");
    }
    let default: Vec<usize> = (3..=30).collect();
    let mut case = BenchmarkCase::new(run.family, run.epsilon);
    case.kappa = run.kappa;
    case.h0 = run.h0;
    case.nx = run.nx;
    case.n_tot = cfg.get_list("run.n_tot_list", &default)?;
    case.plateau_threshold = cfg.get("run.plateau_threshold", 0.05)?;
    let report = convergence_study(&case)?;
    for (nt, msg) in &report.failures {
        eprintln!("truncation {nt} failed: {msg}");
    }
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n_tot as f64,
                r.er_field,
                r.er_dtn,
                r.e_phi_minus2,
                r.e_phi_0,
                r.e_phi_last,
                if run.record_timings { r.wall_ms } else { 0.0 },
            ]
        })
        .collect();
    write_csv(
        &cli.out.join("convergence.csv"),
        "n_tot,er_field,er_dtn,e_phi_minus2,e_phi_0,e_phi_last,wall_ms",
        &rows,
    )?;
    if let Ok(s) = report.slope(|r| r.er_field, 5, 25) {
        println!("field-error slope over [5, 25]: {s:.3}");
    }
    if let Ok(s) = report.pre_plateau_slope(|r| r.er_dtn, 6, 30) {
        println!("pre-plateau trace-error slope: {s:.3}");
    }
    match report.plateau {
        Some(p) => println!("trace-error plateau at {p} modes"),
        None => println!("no trace-error plateau inside the sweep"),
    }
    if cli.plots {
        let series = [
            svg::Series {
                label: "ER[field]",
                points: report.rows.iter().map(|r| (r.n_tot as f64, r.er_field)).collect(),
            },
            svg::Series {
                label: "ER[G]",
                points: report.rows.iter().map(|r| (r.n_tot as f64, r.er_dtn)).collect(),
            },
            svg::Series {
                label: "E[phi-2]",
                points: report
                    .rows
                    .iter()
                    .map(|r| (r.n_tot as f64, r.e_phi_minus2))
                    .collect(),
            },
        ];
        svg::write_loglog(
            &cli.out.join("convergence.svg"),
            "truncation convergence",
            &series,
        )?;
    }
    Ok(())
}

fn cmd_oracle_check(cli: &Cli, cfg: &Config, run: &RunSetup) -> Result<()> {
    let mf = run.solve()?;
    let g = dtn_from_solution(&mf, &run.psi, None)?;
    let nz: usize = cfg.get("run.nz", 256)?;
    let oracle = sigma_fd_solve(&run.geometry, &run.psi, nz)?;
    let rows: Vec<Vec<f64>> = (0..run.nx)
        .map(|j| {
            vec![
                g.x[j],
                g.values[j],
                oracle.dtn[j],
                (g.values[j] - oracle.dtn[j]).abs(),
            ]
        })
        .collect();
    write_csv(&cli.out.join("oracle.csv"), "x,g_modal,g_oracle,abs_diff", &rows)?;
    let err = ccmt_core::benchmarks::relative_trace_error(&g.values, &oracle.dtn);
    println!(
        "modal ({} modes) vs direct grid ({}x{}) trace discrepancy: {err:.3e}",
        run.n_tot, run.nx, nz
    );
    Ok(())
}
