use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lowcorr::fractal::ThresholdPolicy;
use lowcorr::image_io::{save_png, synth_image, SynthKind};
use lowcorr::pipeline::config::{parse_q_grid, parse_usize_list, FeatureSettings};
use lowcorr::pipeline::{analyze, extract_features, report, run_experiment, AnalysisReport, Label};
use lowcorr::{Error, Result};

#[derive(Parser)]
#[command(name = "lowcorr", version, about = "Fractal features of PCA residual images and real-vs-fake KS analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract features for every image in a directory.
    Extract {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        label: String,
        /// Comma-separated removed-component counts; 0 is the raw image.
        #[arg(long, default_value = "0,24,26,28,30,32")]
        components: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        side: usize,
        #[arg(long, default_value_t = 256)]
        levels: usize,
        /// mean, positive or fixed:LEVEL
        #[arg(long, default_value = "mean")]
        threshold: String,
        /// start:stop:step or a comma-separated list
        #[arg(long, default_value = "-5:5:0.5")]
        q_grid: String,
        /// Comma-separated box sizes, or `auto` for powers of two.
        #[arg(long, default_value = "auto")]
        scales: String,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        max_images: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write min-max normalized residual PNGs here.
        #[arg(long)]
        dump_residuals: Option<PathBuf>,
    },
    /// Compare real and fake feature files.
    Analyze {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        fake: PathBuf,
        /// One or more comma-separated component counts.
        #[arg(long)]
        components: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render tables and figures from an analysis file.
    Report {
        #[arg(long)]
        analysis: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run extract, analyze and report from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic test image (constant:V, noise:SEED, carpet:DEPTH, checkerboard:CELL).
    Synth {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        side: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn arg<T>(r: std::result::Result<T, String>) -> Result<T> {
    r.map_err(Error::Argument)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Extract {
            dir,
            label,
            components,
            out,
            side,
            levels,
            threshold,
            q_grid,
            scales,
            workers,
            max_images,
            seed,
            dump_residuals,
        } => {
            let label: Label = label.parse()?;
            let n_list = arg(parse_usize_list(&components))?;
            let settings = FeatureSettings {
                side,
                levels,
                threshold: threshold.parse::<ThresholdPolicy>()?,
                q_grid: arg(parse_q_grid(&q_grid))?,
                scales: if scales == "auto" { None } else { Some(arg(parse_usize_list(&scales))?) },
                workers,
                max_images,
                seed,
                dump_dir: dump_residuals.clone(),
                ..FeatureSettings::default()
            };
            if let Some(d) = &dump_residuals {
                std::fs::create_dir_all(d).map_err(|e| Error::Io { path: d.clone(), source: e })?;
            }
            let summary = extract_features(&dir, label, &n_list, &settings, &out)?;
            println!(
                "{}: {} rows ({} new) from {} images, {} skipped",
                summary.output.display(),
                summary.rows_total,
                summary.rows_new,
                summary.images_selected,
                summary.skipped.len()
            );
            for s in &summary.skipped {
                println!("  skipped {}: {}", s.path.display(), s.reason);
            }
        }
        Command::Analyze { real, fake, components, out } => {
            let n_list = arg(parse_usize_list(&components))?;
            let analysis = analyze(&real, &fake, &n_list)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            let path = out.join("analysis.json");
            analysis.save(&path)?;
            print_summary(&analysis);
            println!("wrote {}", path.display());
        }
        Command::Report { analysis, out } => {
            let analysis = AnalysisReport::load(&analysis)?;
            let files = report(&analysis, &out)?;
            println!("wrote {} tables and {} figures to {}", files.csv.len(), files.svg.len(), out.display());
        }
        Command::Run { config } => {
            let manifest = run_experiment(&config)?;
            println!(
                "real {} rows, fake {} rows; report in {}",
                manifest.real.rows_total,
                manifest.fake.rows_total,
                manifest.analysis.parent().map(|p| p.display().to_string()).unwrap_or_default()
            );
        }
        Command::Synth { kind, side, out } => {
            let img = synth_image(kind.parse::<SynthKind>()?, side)?;
            save_png(&img, &out)?;
        }
    }
    Ok(())
}

fn print_summary(a: &AnalysisReport) {
    println!("{:<14} {:<8} {:>10} {:>10}", "residual", "feature", "D", "p");
    for s in &a.sections {
        for f in &s.scalar {
            if let Some(k) = &f.real_vs_fake {
                println!("{:<14} {:<8} {:>10.6} {:>10.6}", s.n, f.feature, k.statistic_d, k.p_value);
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
