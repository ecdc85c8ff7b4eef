use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use semtraj::etl::{self, EtlConfig, EtlError};
use semtraj::olap::{self, CannedParams, CannedQuery, QueryError, QuerySpec, ResultTable};
use semtraj::warehouse::{open_dir, SchemaDescriptor, Warehouse, WarehouseError};

const EXIT_VALIDATION: u8 = 1;
const EXIT_QUERY: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "semtraj", version, about = "Semantic trajectory warehouse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read and validate all inputs named by a config, without loading.
    Ingest {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the full pipeline into a warehouse directory.
    RunEtl {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a JSON query document or a canned query and print the result.
    Query(QueryArgs),
    /// Print the schema descriptor as JSON.
    ExportSchema {
        /// Validate this warehouse directory before printing.
        #[arg(long)]
        warehouse: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct QueryArgs {
    #[arg(long)]
    warehouse: PathBuf,
    #[arg(long, conflicts_with = "canned", required_unless_present = "canned")]
    spec: Option<PathBuf>,
    #[arg(long, value_parser = parse_canned)]
    canned: Option<CannedQuery>,
    #[arg(long)]
    season: Option<String>,
    #[arg(long)]
    polygon_wkt: Option<String>,
    #[arg(long)]
    speed_kmh: Option<f64>,
    #[arg(long)]
    from: Option<i64>,
    #[arg(long)]
    to: Option<i64>,
    /// Landmark name of the start place (Q3).
    #[arg(long)]
    stop_a: Option<String>,
    /// Landmark name of the end place (Q3).
    #[arg(long)]
    stop_b: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

fn parse_canned(s: &str) -> Result<CannedQuery, String> {
    s.parse().map_err(|e: QueryError| e.to_string())
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

fn warehouse_failure(e: WarehouseError) -> Failure {
    Failure::new(EXIT_INTERNAL, e)
}

fn etl_failure(e: EtlError) -> Failure {
    let code = match &e {
        EtlError::Io { .. }
        | EtlError::Warehouse(WarehouseError::Io(_))
        | EtlError::Warehouse(WarehouseError::Csv(_)) => EXIT_INTERNAL,
        _ => EXIT_VALIDATION,
    };
    Failure::new(code, e)
}

fn query_failure(e: QueryError) -> Failure {
    let code = match &e {
        QueryError::DanglingKey { .. } | QueryError::InvalidGeometry(_) => EXIT_INTERNAL,
        _ => EXIT_QUERY,
    };
    Failure::new(code, e)
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::new(EXIT_INTERNAL, format!("stdout: {e}")))
}

fn cmd_ingest(config: &Path) -> Result<(), Failure> {
    let config = EtlConfig::from_file(config).map_err(etl_failure)?;
    let staged = etl::extract(&config).map_err(etl_failure)?;
    emit(&format!(
        "trajectories: {}\npoints: {}\npois: {}\nevents: {}\nposts: {}\ngoal_rules: {}\n",
        staged.trajectories.len(),
        staged.point_rows,
        staged.pois.len(),
        staged.events.len(),
        staged.posts.len(),
        staged.goal_rules.len(),
    ))
}

fn cmd_run_etl(config: &Path, out: &Path) -> Result<(), Failure> {
    let config = EtlConfig::from_file(config).map_err(etl_failure)?;
    let report = etl::run_pipeline(&config, out).map_err(etl_failure)?;
    emit(&report.to_json())
}

fn open_clean(dir: &Path) -> Result<Warehouse, Failure> {
    if !dir.is_dir() {
        return Err(Failure::new(
            EXIT_VALIDATION,
            format!("warehouse directory not found: {}", dir.display()),
        ));
    }
    let wh = open_dir(dir).map_err(warehouse_failure)?;
    let report = wh.integrity_check();
    if !report.is_clean() {
        return Err(Failure::new(
            EXIT_INTERNAL,
            format!("{}: {} integrity violations", dir.display(), report.len()),
        ));
    }
    Ok(wh)
}

fn cmd_query(args: &QueryArgs) -> Result<(), Failure> {
    let spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", path.display())))?;
            Some(
                QuerySpec::from_json(&text).map_err(|e| {
                    Failure::new(EXIT_VALIDATION, format!("{}: {e}", path.display()))
                })?,
            )
        }
        None => None,
    };
    let wh = open_clean(&args.warehouse)?;
    let table: ResultTable = match (spec, args.canned) {
        (Some(spec), _) => olap::execute(&wh, &spec),
        (None, Some(id)) => {
            let params = CannedParams {
                season: args.season.clone(),
                polygon_wkt: args.polygon_wkt.clone(),
                speed_kmh: args.speed_kmh,
                year_from: args.from,
                year_to: args.to,
                stop_a: args.stop_a.clone(),
                stop_b: args.stop_b.clone(),
            };
            olap::canned_query(&wh, id, &params)
        }
        (None, None) => unreachable!("clap requires --spec or --canned"),
    }
    .map_err(query_failure)?;
    emit(&match args.format {
        Format::Csv => table.to_csv(),
        Format::Text => table.to_text(),
    })
}

fn cmd_export_schema(warehouse: Option<&Path>) -> Result<(), Failure> {
    if let Some(dir) = warehouse {
        open_clean(dir)?;
    }
    emit(&SchemaDescriptor::current().to_json())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Ingest { config } => cmd_ingest(config),
        Command::RunEtl { config, out } => cmd_run_etl(config, out),
        Command::Query(args) => cmd_query(args),
        Command::ExportSchema { warehouse } => cmd_export_schema(warehouse.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
