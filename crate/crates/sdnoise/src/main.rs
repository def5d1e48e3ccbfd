use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use sdnoise::core::estimation::{estimate_prior, Branch};
use sdnoise::core::NoiseModel;
use sdnoise::experiment::{Classifier, Experiment, RunReport};
use sdnoise::loader::DatasetManifest;
use sdnoise::model_io;
use sdnoise::report::{render_report, render_sweep, write_output, Format, OUTPUT_DIR_VAR};
use sdnoise::spec::{ExperimentSpec, Method, NoiseTag};

#[derive(Parser)]
#[command(name = "sdnoise", version, about = "Learning from noisy similar/dissimilar pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    JsonLines,
    PlotData,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::JsonLines => Format::JsonLines,
            FormatArg::PlotData => Format::PlotData,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Km,
    KmCop,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Low,
    High,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Pairing,
    Labeling,
}

#[derive(clap::Args)]
struct Output {
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    /// Destination file, relative to $SDNOISE_OUTPUT_DIR when that is set.
    /// Defaults to the config's `output`, else standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every repeat of an experiment and report test accuracy.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Write the noisy training pairs of one repeat as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        repeat: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train one repeat and save the predictor.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        repeat: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Accuracy of a saved predictor on a repeat's clean test split or on a
    /// whole dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        repeat: usize,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// One run per symmetric noise rate.
    SweepNoise {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// One run per pair count.
    SweepSamples {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "n-pairs", value_delimiter = ',', required = true)]
        n_pairs: Vec<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Run a clustering baseline on an experiment's noisy pairs.
    Baseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "km")]
        method: BaselineArg,
        #[command(flatten)]
        out: Output,
    },
    /// Class prior from Similar/Dissimilar counts at known noise rates.
    EstimatePrior {
        #[arg(long, required_unless_present = "pairs")]
        n_s: Option<u64>,
        #[arg(long, required_unless_present = "pairs")]
        n_d: Option<u64>,
        /// Pair CSV written by `simulate`; counts are read from its `q` column.
        #[arg(long, conflicts_with_all = ["n_s", "n_d"])]
        pairs: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "pairing")]
        model: NoiseArg,
        /// Two comma-separated rates: rho_S,rho_D or rho_plus,rho_minus.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0])]
        rates: Vec<f64>,
        #[arg(long, value_enum, default_value = "low")]
        branch: BranchArg,
    },
}

fn emit(text: &str, out: &Output, fallback: Option<&Path>) -> anyhow::Result<()> {
    match out.output.as_deref().or(fallback) {
        Some(p) => {
            let written = write_output(p, text)?;
            eprintln!("wrote {}", written.display());
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Prints failed repeats and turns them into a nonzero exit.
fn check_complete(reports: &[&RunReport]) -> anyhow::Result<()> {
    let mut failed = 0;
    for r in reports {
        for f in &r.failures {
            eprintln!("{}: {f}", r.name);
            failed += 1;
        }
    }
    if failed > 0 {
        bail!("{failed} repeat(s) failed; reports are partial");
    }
    Ok(())
}

fn load_spec(path: &Path) -> anyhow::Result<ExperimentSpec> {
    ExperimentSpec::from_file(path).with_context(|| format!("loading experiment {}", path.display()))
}

fn write_pairs_csv(path: &Path, pairs: &[sdnoise::core::PairPoint]) -> anyhow::Result<PathBuf> {
    let path = sdnoise::report::output_path(path);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    let d = pairs.first().map_or(0, |p| p.x.len());
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    header.extend((0..d).map(|i| format!("xp{i}")));
    header.push("q".into());
    w.write_record(&header)?;
    for p in pairs {
        let mut row: Vec<String> = p.x.iter().chain(&p.x_prime).map(|v| format!("{v:?}")).collect();
        row.push(if p.q.is_plus() { "1" } else { "-1" }.into());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path)
}

fn count_pairs_csv(path: &Path) -> anyhow::Result<(u64, u64)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let q = r.headers()?.iter().position(|h| h == "q").context("pair file has no `q` column")?;
    let (mut n_s, mut n_d) = (0, 0);
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        match &rec[q] {
            "1" => n_s += 1,
            "-1" => n_d += 1,
            other => bail!("{}: row {}: bad q value {other:?}", path.display(), i + 2),
        }
    }
    Ok((n_s, n_d))
}

fn run_command(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let spec = load_spec(&config)?;
            let fallback = spec.output.clone();
            let report = sdnoise::run(spec)?;
            emit(&render_report(&report, out.format.into()), &out, fallback.as_deref())?;
            check_complete(&[&report])
        }
        Command::Simulate { config, repeat, output } => {
            let spec = load_spec(&config)?;
            if repeat >= spec.repeats {
                bail!("repeat {repeat} out of range (spec has {})", spec.repeats);
            }
            let exp = Experiment::new(spec)?;
            let data = exp.repeat_data(repeat).map_err(anyhow::Error::msg)?;
            if data.pairs.is_empty() {
                bail!("method {} uses no pairs", exp.spec().method.name());
            }
            let path = write_pairs_csv(&output, &data.pairs)?;
            eprintln!("wrote {} pairs to {}", data.pairs.len(), path.display());
            Ok(())
        }
        Command::Train { config, repeat, output } => {
            let spec = load_spec(&config)?;
            if spec.method.is_clustering() {
                bail!("method {} is a clustering baseline; use `baseline`", spec.method.name());
            }
            let exp = Experiment::new(spec)?;
            let data = exp.repeat_data(repeat).map_err(anyhow::Error::msg)?;
            let fitted = exp.fit(&data).map_err(anyhow::Error::msg)?;
            let Classifier::Model(model) = &fitted.classifier else {
                unreachable!("non-clustering methods train a predictor");
            };
            let path = sdnoise::report::output_path(&output);
            model_io::save(model, &path)?;
            let acc = fitted.classifier.accuracy(&data.test)?;
            eprintln!(
                "wrote {} (prior {:?}, alpha {:?}, selected {:?}); test accuracy {:.4}",
                path.display(),
                fitted.prior,
                fitted.alpha,
                fitted.selected,
                acc
            );
            Ok(())
        }
        Command::Evaluate { model, config, repeat, manifest } => {
            let saved = model_io::load(&model)?;
            let test = match (config, manifest) {
                (Some(c), _) => {
                    let exp = Experiment::new(load_spec(&c)?)?;
                    exp.repeat_data(repeat).map_err(anyhow::Error::msg)?.test
                }
                (None, Some(m)) => DatasetManifest::from_file(&m)?.load()?.dataset,
                (None, None) => unreachable!("clap requires one source"),
            };
            let acc = Classifier::Model(saved).accuracy(&test)?;
            println!("{acc}");
            Ok(())
        }
        Command::SweepNoise { config, rates, out } => {
            let spec = load_spec(&config)?;
            let table = sdnoise::sweep_noise(&spec, &rates)?;
            emit(&render_sweep(&table, out.format.into()), &out, None)?;
            check_complete(&table.rows.iter().map(|(_, r)| r).collect::<Vec<_>>())
        }
        Command::SweepSamples { config, n_pairs, out } => {
            let spec = load_spec(&config)?;
            let table = sdnoise::sweep_samples(&spec, &n_pairs)?;
            emit(&render_sweep(&table, out.format.into()), &out, None)?;
            check_complete(&table.rows.iter().map(|(_, r)| r).collect::<Vec<_>>())
        }
        Command::Baseline { config, method, out } => {
            let mut spec = load_spec(&config)?;
            spec.method = match method {
                BaselineArg::Km => Method::Km,
                BaselineArg::KmCop => Method::KmCop,
            };
            spec.cv = None;
            let report = sdnoise::run(spec)?;
            emit(&render_report(&report, out.format.into()), &out, None)?;
            check_complete(&[&report])
        }
        Command::EstimatePrior { n_s, n_d, pairs, model, rates, branch } => {
            let (n_s, n_d) = match pairs {
                Some(p) => count_pairs_csv(&p)?,
                None => (n_s.expect("clap requires counts"), n_d.expect("clap requires counts")),
            };
            let tag = match model {
                NoiseArg::Pairing => NoiseTag::Pairing,
                NoiseArg::Labeling => NoiseTag::Labeling,
            };
            let [r1, r2] = rates[..] else {
                bail!("--rates takes exactly two values, got {}", rates.len());
            };
            let noise = NoiseModel::new(tag.into(), r1, r2)?;
            let branch = match branch {
                BranchArg::Low => Branch::Low,
                BranchArg::High => Branch::High,
            };
            let est = estimate_prior(n_s, n_d, &noise, branch)?;
            println!(
                "{}",
                serde_json::json!({
                    "pi": est.pi,
                    "branch": if branch == Branch::Low { "low" } else { "high" },
                    "residual": est.residual,
                    "roots": est.roots,
                    "n_s": n_s,
                    "n_d": n_d,
                })
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if std::env::var_os(OUTPUT_DIR_VAR).is_none() {
                eprintln!("(relative outputs go to the working directory; set {OUTPUT_DIR_VAR} to redirect)");
            }
            ExitCode::FAILURE
        }
    }
}
