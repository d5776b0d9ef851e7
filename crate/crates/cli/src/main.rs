use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fakemix_cli::aspp_demo::{run_demo, AsppFixture};
use fakemix_cli::augment::cmd_augment;
use fakemix_cli::config::{ConfigLayer, Method, RunConfig};
use fakemix_cli::eval::cmd_eval;
use fakemix_cli::fsutil::atomic_bytes;
use fakemix_cli::gen_boundary::cmd_gen_boundary;
use fakemix_cli::ingest::cmd_ingest;
use fakemix_cli::selfcheck::{render_table, run_all};
use fakemix_cli::synth::cmd_synth;
use fakemix_core::augment::{ContentMode, DonorPolicy};

/// FakeMix dataset pipeline.
///
/// Every flag can also be set through an environment variable named
/// FAKEMIX_<FLAG> (for example FAKEMIX_SEED, FAKEMIX_WORKERS). Precedence:
/// flag, then environment, then --config file, then built-in default.
#[derive(Parser)]
#[command(name = "fakemix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair images and masks by file stem and write a manifest.
    Ingest {
        #[arg(long, env = "FAKEMIX_IMAGES")]
        images: PathBuf,
        #[arg(long, env = "FAKEMIX_MASKS")]
        masks: PathBuf,
        /// Manifest path to write.
        #[arg(long, env = "FAKEMIX_OUT")]
        out: PathBuf,
        #[arg(long, default_value = "train")]
        split: String,
    },
    /// Generate boundary band labels for every manifest entry.
    GenBoundary {
        manifest: PathBuf,
        /// Band half-width in pixels; default scales 4 px at 512 with image size.
        #[arg(long, env = "FAKEMIX_THICKNESS")]
        thickness: Option<usize>,
    },
    /// Augment every manifest entry and write images, labels and provenance.
    Augment {
        manifest: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Score predictions against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, env = "FAKEMIX_CLASSES", default_value_t = 2)]
        classes: usize,
        /// Report JSON path.
        #[arg(long, env = "FAKEMIX_OUT")]
        out: PathBuf,
    },
    /// Run the adaptive pyramid on a fixture and check its invariants.
    AsppDemo {
        /// Fixture JSON; generated from --seed when absent.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, env = "FAKEMIX_SEED", default_value_t = 0)]
        seed: u64,
        /// Use all-zero transforms in the generated fixture.
        #[arg(long)]
        zero_transforms: bool,
        /// Also write the fixture used.
        #[arg(long)]
        write_fixture: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long, env = "FAKEMIX_OUT")]
        out: Option<PathBuf>,
    },
    /// Write a deterministic synthetic dataset with a manifest.
    Synth {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, env = "FAKEMIX_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "FAKEMIX_OUT")]
        out: PathBuf,
    },
    /// Run all oracle suites and print a table.
    Selfcheck {
        #[arg(long, env = "FAKEMIX_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Flat JSON file with any of the settings below.
    #[arg(long, env = "FAKEMIX_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "FAKEMIX_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "FAKEMIX_WORKERS")]
    workers: Option<usize>,
    #[arg(long, env = "FAKEMIX_METHOD", value_enum)]
    method: Option<Method>,
    /// Translation range as a fraction of image size.
    #[arg(long, env = "FAKEMIX_LAMBDA")]
    lambda: Option<f64>,
    /// Probability of keeping the original image.
    #[arg(long, env = "FAKEMIX_PROB")]
    prob: Option<f64>,
    /// Pastes per augmented sample.
    #[arg(long, env = "FAKEMIX_REPS")]
    reps: Option<usize>,
    #[arg(long, env = "FAKEMIX_CONTENT", value_parser = parse_content)]
    content: Option<ContentMode>,
    #[arg(long, env = "FAKEMIX_DONOR_POLICY", value_parser = parse_policy)]
    donor_policy: Option<DonorPolicy>,
    /// Mixup Beta(α, α) parameter.
    #[arg(long, env = "FAKEMIX_ALPHA")]
    alpha: Option<f64>,
    /// Cutout hole side in pixels.
    #[arg(long, env = "FAKEMIX_HOLE_SIZE")]
    hole_size: Option<usize>,
    /// Boundary thickness for entries without a boundary file.
    #[arg(long, env = "FAKEMIX_THICKNESS")]
    thickness: Option<usize>,
    #[arg(long, env = "FAKEMIX_OUT")]
    out: Option<PathBuf>,
}

fn parse_json_str<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_content(s: &str) -> Result<ContentMode, String> {
    parse_json_str(s)
}

fn parse_policy(s: &str) -> Result<DonorPolicy, String> {
    parse_json_str(s)
}

impl RunFlags {
    fn resolve(self) -> Result<RunConfig> {
        let layer = ConfigLayer {
            seed: self.seed,
            workers: self.workers,
            method: self.method,
            lambda: self.lambda,
            prob: self.prob,
            reps: self.reps,
            content: self.content,
            donor_policy: self.donor_policy,
            alpha: self.alpha,
            hole_size: self.hole_size,
            thickness: self.thickness,
            out: self.out,
        };
        RunConfig::resolve(self.config.as_deref(), layer)
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Ingest {
            images,
            masks,
            out,
            split,
        } => {
            let m = cmd_ingest(&images, &masks, &out, &split)?;
            eprintln!("wrote {} entries to {}", m.len(), out.display());
        }
        Command::GenBoundary { manifest, thickness } => {
            let m = cmd_gen_boundary(&manifest, thickness)?;
            eprintln!("wrote {} boundary labels", m.len());
        }
        Command::Augment { manifest, run } => {
            let cfg = run.resolve()?;
            let records = cmd_augment(&manifest, &cfg)?;
            eprintln!("augmented {} entries into {}", records.len(), cfg.out.display());
        }
        Command::Eval {
            pred,
            gt,
            classes,
            out,
        } => {
            let report = cmd_eval(&pred, &gt, classes, &out)?;
            eprintln!(
                "mIoU {:.3}  Acc {:.3}  MAE {:.4}  mBER {}",
                report.miou,
                report.acc,
                report.mae,
                report.mber.map_or("n/a".into(), |b| format!("{b:.3}"))
            );
        }
        Command::AsppDemo {
            fixture,
            seed,
            zero_transforms,
            write_fixture,
            out,
        } => {
            let fx = match fixture {
                Some(p) => AsppFixture::load(&p)?,
                None if zero_transforms => AsppFixture::zero_transforms(seed)?,
                None => AsppFixture::generate(seed)?,
            };
            if let Some(p) = write_fixture {
                atomic_bytes(&p, serde_json::to_string_pretty(&fx)?.as_bytes())?;
            }
            let report = run_demo(&fx)?;
            match out {
                Some(p) => atomic_bytes(&p, serde_json::to_string_pretty(&report)?.as_bytes())?,
                None => print_json(&report)?,
            }
            return Ok(report.all_passed());
        }
        Command::Synth { count, size, seed, out } => {
            cmd_synth(count, size, seed, &out).context("synth")?;
            eprintln!("wrote {count} samples to {}", out.display());
        }
        Command::Selfcheck { seed } => {
            let results = run_all(seed);
            print!("{}", render_table(&results));
            return Ok(results.iter().all(|r| r.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
