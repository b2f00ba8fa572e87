//! Command-line interface for zero-or-one inflated beta regression:
//! `fit`, `diagnose`, and `simulate`.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 data error,
//! 4 estimation failure (non-convergence, separation, collinearity).

use clap::{Parser, Subcommand};
use infbeta::diagnostics::{self, Envelope};
use infbeta::error::{Error, Result};
use infbeta::harness::{self, report, svg};
use infbeta::numerics::rng::RngStream;
use infbeta::regression::{self, FittedModel};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "infbeta",
    version,
    about = "Zero-or-one inflated beta regression: fitting, diagnostics, and Monte Carlo studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model described by a JSON config to a CSV dataset
    Fit {
        /// Model configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Dataset (CSV with header row)
        #[arg(long)]
        data: PathBuf,
        /// Output directory for model.json, coefficients.csv, fit_report.json
        #[arg(long)]
        out: PathBuf,
        /// Saved model file to warm-start from
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Residual, influence, and envelope diagnostics for a saved fit
    Diagnose {
        /// Saved model file from `fit`
        #[arg(long)]
        model: PathBuf,
        /// The dataset the model was fitted on
        #[arg(long)]
        data: PathBuf,
        /// Seed for randomized residuals and envelope simulations
        /// (defaults to the seed recorded in the model's config)
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for the plot-ready tables
        #[arg(long)]
        out: PathBuf,
        /// Number of envelope simulations
        #[arg(long, default_value_t = 100)]
        simulations: usize,
        /// Envelope band level
        #[arg(long, default_value_t = 0.95)]
        band: f64,
        /// Also emit minimal SVG scatter plots per panel
        #[arg(long)]
        svg: bool,
    },
    /// Run a Monte Carlo estimator study from a JSON experiment config
    Simulate {
        /// Experiment configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Output directory for simulation.csv
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Fit {
            config,
            data,
            out,
            init,
        } => cmd_fit(&config, &data, &out, init.as_deref()),
        Command::Diagnose {
            model,
            data,
            seed,
            out,
            simulations,
            band,
            svg,
        } => cmd_diagnose(&model, &data, seed, &out, simulations, band, svg),
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[derive(Serialize)]
struct FitReport<'a> {
    n: usize,
    n_inflated: usize,
    converged: bool,
    loglik: f64,
    loglik_discrete: f64,
    loglik_continuous: f64,
    convergence: harness::model_io::ConvergenceFile,
    pseudo_r2: diagnostics::PseudoR2,
    criteria: diagnostics::InformationCriteria,
    confidence: f64,
    data_hash: &'a str,
}

fn cmd_fit(config: &Path, data: &Path, out: &Path, init: Option<&Path>) -> Result<ExitCode> {
    let config = harness::parse_model_config(&read_to_string(config)?)?;
    let loaded = harness::load_csv_dataset(data, &config)?;
    ensure_dir(out)?;

    let fitted = match init {
        Some(init_path) => {
            let init_file = harness::load_model(init_path)?;
            let theta = regression::ParameterVector::new(
                nalgebra::DVector::from_vec(init_file.theta.rho.clone()),
                nalgebra::DVector::from_vec(init_file.theta.beta.clone()),
                nalgebra::DVector::from_vec(init_file.theta.gamma.clone()),
            );
            regression::fit_with_init(&loaded.spec, &loaded.dataset, &theta)
        }
        None => match regression::fit_partial(&loaded.spec, &loaded.dataset) {
            Ok(fitted) => Ok(fitted),
            Err((e, partial)) => {
                let text = serde_json::to_string_pretty(&partial)
                    .map_err(|se| Error::Usage(format!("cannot serialize partial fit: {se}")))?;
                report::write_text(&out.join("partial_fit.json"), &(text + "\n"))?;
                eprintln!(
                    "partial results written to {}",
                    out.join("partial_fit.json").display()
                );
                Err(e)
            }
        },
    }?;

    let model_file = harness::model_file_from_fit(&fitted, &config, &loaded.data_hash);
    harness::save_model(&model_file, &out.join("model.json"))?;

    let fit_report = FitReport {
        n: fitted.data().n(),
        n_inflated: fitted.data().n_inflated(),
        converged: fitted.converged(),
        loglik: fitted.loglik(),
        loglik_discrete: fitted.loglik_discrete(),
        loglik_continuous: fitted.loglik_continuous(),
        convergence: model_file.convergence.clone(),
        pseudo_r2: diagnostics::pseudo_r2(&fitted),
        criteria: diagnostics::information_criteria(&fitted, None),
        confidence: config.confidence,
        data_hash: &loaded.data_hash,
    };
    let text = serde_json::to_string_pretty(&fit_report)
        .map_err(|e| Error::Usage(format!("cannot serialize fit report: {e}")))?;
    report::write_text(&out.join("fit_report.json"), &(text + "\n"))?;

    if fitted.converged() {
        let rows = regression::inference_summary(&fitted, config.varsigma())?;
        report::write_text(
            &out.join("coefficients.csv"),
            &report::coefficient_table_csv(&rows),
        )?;
        println!(
            "log-likelihood {:.6} on n = {} (observations at c: {})",
            fitted.loglik(),
            fitted.data().n(),
            fitted.data().n_inflated()
        );
        print!("{}", report::coefficient_table_text(&rows));
        let r2 = diagnostics::pseudo_r2(&fitted);
        println!(
            "pseudo-R2: corr {:.4}, mcfadden {}, cox_snell {}",
            r2.corr,
            r2.mcfadden.map_or("n/a".into(), |v| format!("{v:.4}")),
            r2.cox_snell.map_or("n/a".into(), |v| format!("{v:.4}")),
        );
        let ic = diagnostics::information_criteria(&fitted, None);
        println!("AIC {:.3}  SBC {:.3}  CAIC {:.3}", ic.aic, ic.sbc, ic.caic);
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "fit did not converge (discrete score {:.3e} after {} iterations, continuous score {:.3e} after {}); artifacts written",
            fitted.discrete_record().final_score_norm,
            fitted.discrete_record().iterations,
            fitted.continuous_record().final_score_norm,
            fitted.continuous_record().iterations,
        );
        Ok(ExitCode::from(4))
    }
}

fn cmd_diagnose(
    model: &Path,
    data: &Path,
    seed: Option<u64>,
    out: &Path,
    simulations: usize,
    band: f64,
    emit_svg: bool,
) -> Result<ExitCode> {
    let model_file = harness::load_model(model)?;
    let loaded = harness::load_csv_dataset(data, &model_file.config)?;
    let fitted = harness::rehydrate(&model_file, loaded)?;
    if !fitted.converged() {
        return Err(Error::Usage(
            "diagnostics refused: the saved model did not converge".into(),
        ));
    }
    ensure_dir(out)?;
    let seed = seed.unwrap_or(model_file.config.seed);

    // Residual realizations use streams 1..=4; envelope simulations use
    // streams 1001.. so no draw sequence is shared between panels.
    let base = RngStream::new(seed, 1);
    let dreport = diagnostics::diagnostics_report(&fitted, &base, 4)?;
    let mut observed = dreport.r_q[0].clone();
    observed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let env_base = RngStream::new(seed, 1000);
    let envelope =
        diagnostics::simulated_envelope(&fitted, &observed, &env_base, simulations, band)?;

    write_diagnostics_tables(out, &fitted, &dreport, &envelope)?;
    if emit_svg {
        write_diagnostics_svgs(out, &fitted, &dreport, &envelope)?;
    }
    println!(
        "diagnostics written to {} (envelope: {} simulations, {} failed refits, coverage {:.3})",
        out.display(),
        envelope.n_sim,
        envelope.failures,
        envelope.coverage()
    );
    println!("note: {}", dreport.note);
    Ok(ExitCode::SUCCESS)
}

fn write_diagnostics_tables(
    out: &Path,
    fitted: &FittedModel,
    dreport: &diagnostics::DiagnosticsReport,
    envelope: &Envelope,
) -> Result<()> {
    let y: Vec<f64> = fitted.data().y().iter().cloned().collect();
    report::write_text(
        &out.join("quantile_residuals.csv"),
        &report::quantile_residuals_csv(&y, &dreport.r_q),
    )?;
    report::write_text(&out.join("envelope.csv"), &report::envelope_csv(envelope))?;
    let alpha: Vec<f64> = fitted.alpha_hat().iter().cloned().collect();
    report::write_text(
        &out.join("discrete_residuals.csv"),
        &report::discrete_residuals_csv(&alpha, &dreport.h_tt, &dreport.r_pd),
    )?;
    let mu: Vec<f64> = fitted.mu_hat().iter().cloned().collect();
    report::write_text(
        &out.join("continuous_residuals.csv"),
        &report::continuous_residuals_csv(
            &dreport.interior_indices,
            &mu,
            &dreport.p_tt,
            &dreport.r_pc,
        ),
    )?;
    report::write_text(
        &out.join("influence_discrete.csv"),
        &report::influence_csv(None, &dreport.c_d, "c_d"),
    )?;
    report::write_text(
        &out.join("influence_continuous.csv"),
        &report::influence_csv(Some(&dreport.interior_indices), &dreport.c_c, "c_c"),
    )?;
    let text = serde_json::to_string_pretty(dreport)
        .map_err(|e| Error::Usage(format!("cannot serialize diagnostics: {e}")))?;
    report::write_text(&out.join("diagnostics_report.json"), &(text + "\n"))?;
    Ok(())
}

fn write_diagnostics_svgs(
    out: &Path,
    fitted: &FittedModel,
    dreport: &diagnostics::DiagnosticsReport,
    envelope: &Envelope,
) -> Result<()> {
    let index_points = |values: &[f64]| -> Vec<(f64, f64)> {
        values
            .iter()
            .enumerate()
            .map(|(t, &v)| ((t + 1) as f64, v))
            .collect()
    };
    let opt_points = |values: &[Option<f64>], xs: Option<&[usize]>| -> Vec<(f64, f64)> {
        values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (xs.map_or((i + 1) as f64, |ix| (ix[i] + 1) as f64), v)))
            .collect()
    };
    let write = |name: &str, content: String| report::write_text(&out.join(name), &content);

    let rq1 = index_points(&dreport.r_q[0]);
    write(
        "rq_vs_index.svg",
        svg::scatter_svg(
            "randomized quantile residuals (realization 1)",
            "index",
            "r_q",
            &[svg::Series {
                points: &rq1,
                color: "black",
                line: false,
            }],
        ),
    )?;

    let n = envelope.observed.len();
    let qpos: Vec<f64> = (0..n)
        .map(|r| infbeta::numerics::normal_quantile((r as f64 + 0.5) / n as f64).unwrap())
        .collect();
    let pair =
        |ys: &[f64]| -> Vec<(f64, f64)> { qpos.iter().cloned().zip(ys.iter().cloned()).collect() };
    let obs = pair(&envelope.observed);
    let lo = pair(&envelope.lower);
    let md = pair(&envelope.median);
    let hi = pair(&envelope.upper);
    write(
        "envelope.svg",
        svg::scatter_svg(
            "sorted residuals with simulated envelope",
            "normal quantile",
            "sorted r_q",
            &[
                svg::Series {
                    points: &lo,
                    color: "steelblue",
                    line: true,
                },
                svg::Series {
                    points: &md,
                    color: "gray",
                    line: true,
                },
                svg::Series {
                    points: &hi,
                    color: "steelblue",
                    line: true,
                },
                svg::Series {
                    points: &obs,
                    color: "black",
                    line: false,
                },
            ],
        ),
    )?;

    let rpd_idx = opt_points(&dreport.r_pd, None);
    write(
        "rpd_vs_index.svg",
        svg::scatter_svg(
            "discrete Pearson residuals",
            "index",
            "r_pD",
            &[svg::Series {
                points: &rpd_idx,
                color: "black",
                line: false,
            }],
        ),
    )?;
    let alpha = fitted.alpha_hat();
    let rpd_alpha: Vec<(f64, f64)> = dreport
        .r_pd
        .iter()
        .enumerate()
        .filter_map(|(t, v)| v.map(|v| (alpha[t], v)))
        .collect();
    write(
        "rpd_vs_alpha.svg",
        svg::scatter_svg(
            "discrete Pearson residuals vs fitted alpha",
            "alpha_hat",
            "r_pD",
            &[svg::Series {
                points: &rpd_alpha,
                color: "black",
                line: false,
            }],
        ),
    )?;

    let rpc_idx = opt_points(&dreport.r_pc, Some(&dreport.interior_indices));
    write(
        "rpc_vs_index.svg",
        svg::scatter_svg(
            "continuous Pearson residuals",
            "index",
            "r_pC",
            &[svg::Series {
                points: &rpc_idx,
                color: "black",
                line: false,
            }],
        ),
    )?;
    let mu = fitted.mu_hat();
    let rpc_mu: Vec<(f64, f64)> = dreport
        .r_pc
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (mu[dreport.interior_indices[i]], v)))
        .collect();
    write(
        "rpc_vs_mu.svg",
        svg::scatter_svg(
            "continuous Pearson residuals vs fitted mu",
            "mu_hat",
            "r_pC",
            &[svg::Series {
                points: &rpc_mu,
                color: "black",
                line: false,
            }],
        ),
    )?;

    let cd = opt_points(&dreport.c_d, None);
    write(
        "cd_vs_index.svg",
        svg::scatter_svg(
            "discrete influence",
            "index",
            "c_D",
            &[svg::Series {
                points: &cd,
                color: "black",
                line: false,
            }],
        ),
    )?;
    let cc = opt_points(&dreport.c_c, Some(&dreport.interior_indices));
    write(
        "cc_vs_index.svg",
        svg::scatter_svg(
            "continuous influence",
            "index",
            "c_C",
            &[svg::Series {
                points: &cc,
                color: "black",
                line: false,
            }],
        ),
    )?;
    Ok(())
}

fn cmd_simulate(config: &Path, out: &Path) -> Result<ExitCode> {
    let config = harness::parse_experiment_config(&read_to_string(config)?)?;
    ensure_dir(out)?;
    let results = harness::run_experiment(&config)?;
    report::write_text(
        &out.join("simulation.csv"),
        &report::simulation_csv(&results),
    )?;
    print!("{}", report::simulation_text(&results));
    Ok(ExitCode::SUCCESS)
}
