use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use scatterec::harness::{
    self, generate_condition, load_datasets, load_recognizer, run_pipeline, simulate_link, train_model,
    write_channels, write_condition, write_figures, Condition, Config, EvalReport,
};
use scatterec::recognizer::write_training_log;
use scatterec::scenegen::{StreetLayout, Vtd};
use scatterec::Error;

#[derive(Parser)]
#[command(name = "scatterec", version, about = "LiDAR scatterer recognition and vehicular channel synthesis")]
struct Cli {
    /// Log level filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "info")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one condition's dataset.
    Gen {
        #[arg(long)]
        layout: StreetLayout,
        #[arg(long)]
        vtd: Vtd,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        snapshots: u64,
        #[arg(long)]
        out: PathBuf,
        /// Base configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the raw Tx and Rx LiDAR scans.
        #[arg(long)]
        clouds: bool,
    },
    /// Train the count regressor on every condition under DIR.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Training log CSV; defaults to train_log.csv next to the checkpoint.
        #[arg(long)]
        log_csv: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on the test split of every condition under DIR.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Synthesize ground-truth and recognized channels for one link.
    Simulate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        link: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write plot-data CSVs from DIR/report.json.
    Report {
        #[arg(long = "in")]
        dir: PathBuf,
    },
    /// Generate, train, evaluate and simulate in one run.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the default configuration as TOML.
    Defaults {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> scatterec::Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn print_summary(report: &EvalReport) {
    println!("{:<11} {:<7} {:>9} {:>9} {:>9} {:>7}", "layout", "vtd", "P", "P_base", "binary", "vr_out");
    for c in &report.conditions {
        println!(
            "{:<11} {:<7} {:>9.4} {:>9.4} {:>9.4} {:>7}",
            c.layout.as_str(),
            c.vtd.as_str(),
            c.accuracy,
            c.baseline_accuracy,
            c.binary_accuracy,
            c.vr_violations
        );
    }
    println!("pooled P = {:.4}, baseline {:.4}", report.pooled_accuracy, report.pooled_baseline_accuracy);
    if let Some(f) = &report.fidelity {
        println!(
            "fidelity {}/{} link {}: PDP RMSE {:.2} dB over {} bins, LoS-bin mismatches {}, drift violations {}/{}",
            f.layout, f.vtd, f.link, f.pdp_rmse_db, f.compared_bins, f.los_bin_mismatches, f.drift_violations, f.drift_pairs_checked
        );
    }
}

fn run(cmd: Command) -> scatterec::Result<()> {
    match cmd {
        Command::Gen { layout, vtd, seed, snapshots, out, config, clouds } => {
            let mut cfg = load_config(config.as_deref())?;
            cfg.seed = seed;
            cfg.dataset.snapshots = snapshots;
            cfg.dataset.layouts = vec![layout];
            cfg.dataset.vtds = vec![vtd];
            cfg.validate()?;
            let data = generate_condition(&cfg, Condition { layout, vtd })?;
            let index = write_condition(&out, &cfg, &data, clouds)?;
            let clusters: usize = data.records.iter().map(|r| r.cuboids.len()).sum();
            println!("{}: {} link-snapshots, {clusters} clusters -> {}", data.condition.name(), index.entries.len(), out.display());
        }
        Command::Train { data, config, out, log_csv } => {
            let cfg = Config::load(&config)?;
            let (_, sets) = load_datasets(&data)?;
            let outcome = train_model(&cfg, &sets)?;
            outcome.model.save(&out)?;
            let log_path = log_csv.unwrap_or_else(|| out.with_file_name("train_log.csv"));
            write_training_log(&outcome.log, &log_path)?;
            let best = &outcome.log[outcome.best_epoch];
            println!(
                "best epoch {} (train mse {:.5}, val mse {:.5}) -> {}",
                outcome.best_epoch, best.train_mse, best.val_mse, out.display()
            );
        }
        Command::Eval { data, ckpt, report } => {
            let (cfg, sets) = load_datasets(&data)?;
            let recognizer = load_recognizer(&cfg, &sets, &ckpt)?;
            let r = harness::evaluate(&cfg, &sets, &recognizer)?;
            r.write(&report)?;
            print_summary(&r);
        }
        Command::Simulate { data, ckpt, link, out } => {
            let (cfg, sets) = load_datasets(&data)?;
            let recognizer = load_recognizer(&cfg, &sets, &ckpt)?;
            let target = if sets.len() == 1 {
                &sets[0]
            } else {
                let fid = Condition { layout: cfg.dataset.fidelity_layout, vtd: cfg.dataset.fidelity_vtd };
                sets.iter()
                    .find(|d| d.condition == fid)
                    .ok_or_else(|| Error::Data(format!("{} holds several conditions and not {}", data.display(), fid.name())))?
            };
            let ch = simulate_link(&cfg, target, &recognizer, link)?;
            write_channels(&out, &cfg, &ch)?;
            let f = &ch.report;
            println!(
                "{} link {link}: {} snapshots, PDP RMSE {:.2} dB, LoS-bin mismatches {}, drift violations {}/{} -> {}",
                target.condition.name(),
                f.snapshots,
                f.pdp_rmse_db,
                f.los_bin_mismatches,
                f.drift_violations,
                f.drift_pairs_checked,
                out.display()
            );
        }
        Command::Report { dir } => {
            let r = EvalReport::read(&dir.join("report.json"))?;
            for name in write_figures(&dir, &r)? {
                println!("{}", dir.join(name).display());
            }
        }
        Command::Pipeline { config, out } => {
            let cfg = load_config(config.as_deref())?;
            let start = Instant::now();
            let r = run_pipeline(&cfg, &out)?;
            print_summary(&r);
            println!("done in {:.1} s -> {}", start.elapsed().as_secs_f64(), out.display());
        }
        Command::Defaults { out } => {
            let text = Config::default().to_toml();
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| Error::Io { path: p.clone(), source: e })?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
