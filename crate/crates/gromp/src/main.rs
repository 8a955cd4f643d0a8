use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use gromp::io::{
    load_manifold, load_results, save_manifold, DemonstrationDataset, ExperimentConfig,
};
use gromp::manifold::fit_task_manifold;
use gromp::report::write_report;
use gromp::sim::{
    generate_demonstrations, make_task, rollout, run_experiment_with_jobs, surrogate_policy,
    RolloutParams, TaskOverrides,
};

#[derive(Parser)]
#[command(
    name = "gromp",
    version,
    about = "Task-manifold projection for imitation rollouts, with a synthetic assembly benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct TaskFlags {
    /// Override the preset's slip gain.
    #[arg(long)]
    slip_gain: Option<f64>,
    /// Override the preset's per-step slip noise.
    #[arg(long)]
    slip_noise: Option<f64>,
    /// Override the preset's initial in-grasp translational offset spread.
    #[arg(long)]
    grasp_offset_sigma: Option<f64>,
    /// Override the preset's initial in-grasp yaw offset spread.
    #[arg(long)]
    grasp_yaw_sigma: Option<f64>,
    /// Override the preset's policy horizon.
    #[arg(long)]
    horizon: Option<usize>,
}

impl TaskFlags {
    fn overrides(&self) -> TaskOverrides {
        TaskOverrides {
            slip_gain: self.slip_gain,
            slip_noise_sigma: self.slip_noise,
            grasp_offset_sigma: self.grasp_offset_sigma,
            grasp_yaw_sigma: self.grasp_yaw_sigma,
            horizon: self.horizon,
            ..TaskOverrides::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate expert demonstrations for a task preset.
    DemoGen {
        /// Task preset: peg, nut, usb, or cover.
        #[arg(long)]
        task: String,
        /// Number of episodes to generate.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        episodes: u64,
        /// On-manifold coordinate noise.
        #[arg(long, default_value_t = 0.002)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output dataset path.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        task_flags: TaskFlags,
    },
    /// Fit a task manifold from a dataset and print the seven losses.
    Fit {
        /// Input dataset path.
        #[arg(long)]
        data: PathBuf,
        /// Output manifold descriptor path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a single trial and print its outcome.
    Rollout {
        #[arg(long)]
        task: String,
        /// Dataset the surrogate policy is built from.
        #[arg(long)]
        data: PathBuf,
        /// Manifold descriptor to project with (fit from the dataset when
        /// absent).
        #[arg(long)]
        manifold: Option<PathBuf>,
        /// Projection dimensionality.
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=6))]
        dim: Option<u64>,
        /// Skip projection entirely.
        #[arg(long, conflicts_with_all = ["manifold", "dim"])]
        baseline: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0012)]
        action_noise: f64,
        #[arg(long, default_value_t = 0.0003)]
        obs_noise: f64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        knn: u64,
        #[command(flatten)]
        task_flags: TaskFlags,
    },
    /// Run the full interactive experiment and write the results CSV.
    Experiment {
        /// Config file; defaults apply when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (falls back to GROMP_OUT_DIR, then `.`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Replications run in parallel.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
    },
    /// Summarize a results CSV into tables and plots.
    Report {
        #[arg(long)]
        csv: PathBuf,
        /// Output directory (falls back to GROMP_OUT_DIR, then `.`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn resolve_out_dir(flag: Option<PathBuf>, config_dir: Option<&str>) -> PathBuf {
    flag.or_else(|| config_dir.map(PathBuf::from))
        .or_else(|| std::env::var_os("GROMP_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DemoGen {
            task,
            episodes,
            noise,
            seed,
            out,
            task_flags,
        } => {
            let task = make_task(&task, &task_flags.overrides())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dataset = generate_demonstrations(&task, episodes as usize, noise, &mut rng)?;
            dataset
                .save(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "wrote {} episodes ({} records) to {}",
                dataset.episodes.len(),
                dataset.num_records(),
                out.display()
            );
        }
        Command::Fit { data, out } => {
            let dataset = DemonstrationDataset::load(&data)
                .with_context(|| format!("loading {}", data.display()))?;
            let (manifold, losses) = fit_task_manifold(&dataset)?;
            save_manifold(&manifold, &out).with_context(|| format!("writing {}", out.display()))?;
            for (i, loss) in losses.iter().enumerate() {
                println!("{i} {loss:.16e}");
            }
        }
        Command::Rollout {
            task,
            data,
            manifold,
            dim,
            baseline,
            seed,
            action_noise,
            obs_noise,
            knn,
            task_flags,
        } => {
            let task = make_task(&task, &task_flags.overrides())?;
            let dataset = DemonstrationDataset::load(&data)
                .with_context(|| format!("loading {}", data.display()))?;
            let policy = surrogate_policy(&dataset, knn as usize, action_noise)?;

            let projection = if baseline {
                None
            } else {
                let loaded = match &manifold {
                    Some(path) => load_manifold(path)
                        .with_context(|| format!("loading {}", path.display()))?,
                    None => fit_task_manifold(&dataset)?.0,
                };
                let with_dim = match dim {
                    Some(d) => loaded.with_dim(d as usize)?,
                    None if loaded.dim().is_some() => loaded,
                    None => {
                        bail!("either --baseline, --dim, or a manifold with a set dim is required")
                    }
                };
                Some(with_dim)
            };

            let params = RolloutParams {
                execute_per_prediction: 4,
                obs_noise_sigma: obs_noise,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let record = rollout(&task, &policy, projection.as_ref(), &params, &mut rng)?;

            let mut hasher = Sha256::new();
            for step in &record.steps {
                for pose in [
                    &step.commanded_a_st,
                    &step.realized_a_st,
                    &step.a_to,
                    &step.a_so,
                ] {
                    for row in 0..3 {
                        for col in 0..3 {
                            hasher.update(pose.rotation()[(row, col)].to_le_bytes());
                        }
                        hasher.update(pose.translation()[row].to_le_bytes());
                    }
                }
            }
            let digest = hasher.finalize();
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();

            println!("success {}", u8::from(record.success));
            println!("steps {}", record.steps.len());
            println!("trajectory_hash {hex}");
        }
        Command::Experiment {
            config,
            out_dir,
            jobs,
        } => {
            let config = match config {
                Some(path) => ExperimentConfig::load(&path)
                    .with_context(|| format!("loading {}", path.display()))?,
                None => ExperimentConfig::default(),
            };
            let out_dir = resolve_out_dir(out_dir, config.out_dir.as_deref());
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            let table = run_experiment_with_jobs(&config, jobs as usize)?;
            let csv_path = out_dir.join("results.csv");
            table.write_csv(&csv_path)?;
            println!(
                "wrote {} trial rows to {}",
                table.rows.len(),
                csv_path.display()
            );
        }
        Command::Report { csv, out_dir } => {
            let table = load_results(&csv).with_context(|| format!("loading {}", csv.display()))?;
            let out_dir = resolve_out_dir(out_dir, None);
            write_report(&table, &out_dir)?;
            println!(
                "wrote success_by_stage and q_history tables and plots to {}",
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
