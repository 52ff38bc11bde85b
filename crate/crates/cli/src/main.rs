use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pairsim::output::OutputDir;
use pairsim::{presets, Axis, CliError, Document, Tier};

#[derive(Parser)]
#[command(version, about = "Driven binary waveguide superlattice simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario
    Run(Common),
    /// Run a scenario over the cross product of parameter axes
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Axis `key=start:stop:step` or `key=v1,v2,...`; replaces `[sweep]` axes
        #[arg(long = "axis")]
        axes: Vec<String>,
    },
    /// Band diagram and tight-binding fit of the continuum profile
    Bands(Common),
    /// Calibrate the channel geometry to target coupling constants
    Calibrate(Common),
    /// Shipped scenarios
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset's TOML
    Show { name: String },
}

#[derive(Args)]
struct Common {
    /// Scenario file
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped scenario by name
    #[arg(long)]
    preset: Option<String>,
    /// Override `section.key=value` (repeatable)
    #[arg(long = "set")]
    overrides: Vec<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Record that the run drew no random numbers
    #[arg(long)]
    seedless: bool,
}

impl Common {
    fn document(&self, fallback: Option<&str>) -> Result<(Document, String), CliError> {
        let (mut doc, label) = match (&self.config, &self.preset, fallback) {
            (Some(p), _, _) => (
                Document::load(p)?,
                p.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()),
            ),
            (None, Some(n), _) => (presets::document(n)?, n.clone()),
            (None, None, Some(n)) => (presets::document(n)?, n.to_string()),
            (None, None, None) => return Err(CliError::Usage("give --config FILE or --preset NAME".into())),
        };
        for o in &self.overrides {
            doc.set(o)?;
        }
        Ok((doc, label))
    }

    fn out_dir(&self, label: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out").join(label))
    }

    fn init_pool(&self) -> Result<(), CliError> {
        if let Some(n) = self.jobs {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(())
    }
}

fn run_one(c: &Common, fallback: Option<&str>, forced: Option<Tier>) -> Result<(), CliError> {
    c.init_pool()?;
    let (mut doc, label) = c.document(fallback)?;
    if let Some(t) = forced {
        let name = serde_json::to_value(t).expect("tier serialises");
        doc.set_value("tier", toml::Value::String(name.as_str().unwrap().to_string()))?;
    }
    let scenario = doc.scenario()?;
    let out = c.out_dir(&label);
    let (report, manifest) = pairsim::run(&scenario, &out, c.seedless)?;
    for (k, v) in &report.metrics {
        println!("{k} = {v:.10}");
    }
    println!("wrote {} files to {}", manifest.files.len() + 1, out.display());
    Ok(())
}

fn run_sweep(c: &Common, axes: &[String]) -> Result<(), CliError> {
    let (doc, label) = c.document(None)?;
    let scenario = doc.scenario()?;
    let axes: Vec<Axis> = if axes.is_empty() {
        scenario.sweep.clone().map(|s| s.axes).unwrap_or_default()
    } else {
        axes.iter().map(|a| Axis::parse(a)).collect::<Result<_, _>>()?
    };
    let result = pairsim::sweep(&doc, &axes, c.jobs)?;
    let out = c.out_dir(&format!("{label}_sweep"));
    let mut dir = OutputDir::create(&out)?;
    dir.table(&result.table)?;
    dir.finish("sweep".into(), &scenario.to_toml(), c.seedless)?;
    println!("{} points written to {}", result.table.rows.len(), out.display());
    if result.failed > 0 {
        return Err(CliError::SweepFailures {
            failed: result.failed,
            total: result.table.rows.len(),
        });
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(c) => run_one(&c, None, None),
        Command::Sweep { common, axes } => run_sweep(&common, &axes),
        Command::Bands(c) => run_one(&c, Some("bands"), Some(Tier::Bands)),
        Command::Calibrate(c) => run_one(&c, Some("calibrate"), Some(Tier::Calibrate)),
        Command::Presets { action } => {
            match action {
                PresetAction::List => {
                    for (name, text) in presets::PRESETS {
                        println!("{name:<10} {}", presets::description(text));
                    }
                }
                PresetAction::Show { name } => print!("{}", presets::text(&name)?),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
