use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use aqs_core::ingest::EdgeColumns;
use aqs_core::{ingest_csv, ColumnKind, IngestConfig, Session};
use aqs_service::api::{self, ServiceConfig};
use aqs_service::script::{write_outputs, Runner};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aqs", version, about = "Aggregate query sculpting engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP session API.
    Serve(ServeArgs),
    /// Run a sculpting script against CSV files and write the results.
    Run(Box<RunArgs>),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "AQS_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory of static UI assets served at `/`.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    max_sessions: usize,
    /// Upload limit in bytes.
    #[arg(long, default_value_t = 1 << 30)]
    max_upload: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Node CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Edge CSV file.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long, default_value = "source")]
    source_column: String,
    #[arg(long, default_value = "target")]
    target_column: String,
    #[arg(long)]
    weight_column: Option<String>,
    /// Column holding node identifiers referenced by edges.
    #[arg(long)]
    key: Option<String>,
    /// Treat these columns as nominal.
    #[arg(long, value_delimiter = ',')]
    nominal: Vec<String>,
    /// Treat these columns as quantitative.
    #[arg(long, value_delimiter = ',')]
    quantitative: Vec<String>,
    /// Script file; omitted means no operations.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Sample this many node rows.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1200.0)]
    width: f64,
    #[arg(long, default_value_t = 800.0)]
    height: f64,
}

fn run(args: RunArgs) -> Result<(), String> {
    let mut config = IngestConfig::nodes(&args.data);
    config.edge_file = args.edges.clone();
    config.options.edge_columns = EdgeColumns {
        source: args.source_column,
        target: args.target_column,
        weight: args.weight_column,
    };
    config.options.key_column = args.key;
    for name in args.nominal {
        config.options.type_overrides.insert(name, ColumnKind::Nominal);
    }
    for name in args.quantitative {
        config.options.type_overrides.insert(name, ColumnKind::Quantitative);
    }
    config.options.sample = args.sample;
    config.options.sample_seed = args.seed;
    let dataset = ingest_csv(&config).map_err(|e| e.to_string())?;
    let mut runner = Runner::new(Session::new(Arc::new(dataset)));
    if let Some(path) = &args.script {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        runner.run(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    write_outputs(&runner.session, &args.out, args.width, args.height).map_err(|e| e.to_string())
}

async fn serve(args: ServeArgs) -> Result<(), String> {
    let config = ServiceConfig {
        max_sessions: args.max_sessions,
        max_upload_bytes: args.max_upload,
        static_dir: args.static_dir,
    };
    let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
        .await
        .map_err(|e| format!("bind {}:{}: {e}", args.host, args.port))?;
    eprintln!("listening on http://{}", listener.local_addr().map_err(|e| e.to_string())?);
    axum::serve(listener, api::app(&config)).await.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(*args),
        Command::Serve(args) => tokio::runtime::Runtime::new()
            .map_err(|e| e.to_string())
            .and_then(|rt| rt.block_on(serve(args))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
