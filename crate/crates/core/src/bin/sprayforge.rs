use std::path::PathBuf;

use clap::Parser;

use sprayforge::report::{emit_report, execute, Command, OutputFormat};
use sprayforge::scene::parse_scene;

/// Blow-up charts, algebraic sprays, and domination certificates over Q.
#[derive(Parser)]
#[command(name = "sprayforge", version, disable_help_subcommand = true)]
struct Cli {
    /// chart | spray1 | spray2 | embed | certify | dominate-lift
    command: String,

    /// Scene description (JSON)
    #[arg(long)]
    scene: PathBuf,

    /// Override the scene seed
    #[arg(long)]
    seed: Option<u64>,

    /// Override the retry budget
    #[arg(long)]
    retries: Option<u32>,

    /// Force a chart index instead of the default choice
    #[arg(long = "chart-index")]
    chart_index: Option<usize>,

    /// Report format
    #[arg(long, default_value = "json")]
    output: String,

    /// Override the reduction step budget
    #[arg(long = "budget-steps")]
    budget_steps: Option<u64>,
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let Some(command) = Command::parse(&cli.command) else {
        eprintln!(
            "unknown command `{}`; expected chart, spray1, spray2, embed, certify, or dominate-lift",
            cli.command
        );
        return 1;
    };
    let Some(format) = OutputFormat::parse(&cli.output) else {
        eprintln!("unknown output format `{}`; expected json or text", cli.output);
        return 1;
    };
    let mut scene = match parse_scene(&cli.scene) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(s) = cli.seed {
        scene.seed = s;
    }
    if let Some(r) = cli.retries {
        if r == 0 || r > 10_000 {
            eprintln!("error: --retries must be between 1 and 10000");
            return 1;
        }
        scene.retries = r;
    }
    if let Some(j) = cli.chart_index {
        // range is checked against the center when the chart is built
        scene.chart_index = Some(j);
    }
    if let Some(b) = cli.budget_steps {
        if b == 0 {
            eprintln!("error: --budget-steps must be positive");
            return 1;
        }
        scene.budget.groebner_steps = b;
    }
    match execute(&scene, command) {
        Ok(report) => {
            print!("{}", emit_report(&report, format));
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn main() {
    std::process::exit(run());
}
