use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hvd::io::{run, InputModel, OutputFormat, OutputModel, RunConfig};

/// Build order-k hyperbolic Voronoi diagrams in the Klein disk.
#[derive(Debug, Parser)]
#[command(name = "hvd", version)]
struct Args {
    /// Site file: JSON `[[x, y], ...]` or one `x y` pair per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "klein")]
    input_model: InputModel,
    /// Diagram order k.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Radius of the clipping disk, 0 < l <= 1.
    #[arg(long = "clip-l", default_value_t = 1.0)]
    clip_l: f64,
    #[arg(long, value_enum, default_value = "klein")]
    output_model: OutputModel,
    #[arg(long, value_enum, default_value = "svg")]
    format: OutputFormat,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of oracle samples; 0 skips verification.
    #[arg(long, default_value_t = 0)]
    verify_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Segment sampling step for Poincaré rendering.
    #[arg(long, default_value_t = 0.01)]
    arc_step: f64,
}

fn main() -> ExitCode {
    env_logger::init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let config = RunConfig {
        input: args.input,
        input_model: args.input_model,
        order: args.order,
        clip_l: args.clip_l,
        output_model: args.output_model,
        format: args.format,
        out: args.out,
        verify_samples: args.verify_samples,
        seed: args.seed,
        arc_step: args.arc_step,
    };
    match run(&config) {
        Ok(summary) => {
            if let Some(r) = &summary.verification {
                let ratio = r.agreement_ratio.map_or("undefined".to_string(), |v| v.to_string());
                eprintln!(
                    "verification: samples={} agreements={} skipped={} ratio={} seed={}",
                    r.samples, r.agreements, r.margin_skipped, ratio, r.seed
                );
            }
            ExitCode::from(summary.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
