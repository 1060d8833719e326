use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geo_oracle_core::abi_codec::{decode, AbiValue};
use geo_oracle_core::geo_model::{unscale_to_decimal, ScaledCoord};
use geo_oracle_core::oracle::{parse_request, GasParams, Oracle, OracleConfig};
use geo_oracle_core::osm_ingest::write_fixture;
use geo_oracle_core::query_engine::{QueryEngine, Strategy};
use geo_oracle_core::snapshot::{load_store, write_snapshot};
use geo_oracle_core::spatial_index::build_index;
use geo_oracle_service::{serve, ServiceConfig};

#[derive(Parser)]
#[command(name = "geo-oracle", version, about = "OpenStreetMap query oracle tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an OSM XML extract or fixture, then write a store.
    Ingest {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = StoreFormat::Snapshot)]
        format: StoreFormat,
    },
    /// Run one request document against a store.
    Query {
        store: PathBuf,
        request: PathBuf,
        #[command(flatten)]
        opts: OracleOpts,
    },
    /// Serve POST /query and GET /health.
    Serve {
        store: PathBuf,
        #[arg(long, env = "GEO_ORACLE_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
        #[command(flatten)]
        opts: OracleOpts,
    },
    /// Count-first gas simulation for a request.
    Estimate {
        store: PathBuf,
        request: PathBuf,
        #[command(flatten)]
        opts: OracleOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StoreFormat {
    Snapshot,
    Fixture,
}

#[derive(Args)]
struct OracleOpts {
    /// Gas per zero payload byte.
    #[arg(long, env = "GEO_ORACLE_GAS_ZERO", default_value_t = 4)]
    gas_zero: u64,
    /// Gas per nonzero payload byte.
    #[arg(long, env = "GEO_ORACLE_GAS_NONZERO", default_value_t = 16)]
    gas_nonzero: u64,
    /// Largest accepted search limit.
    #[arg(long, env = "GEO_ORACLE_MAX_RESULTS")]
    max_results: Option<u64>,
    /// Answer searches by linear scan instead of the spatial index.
    #[arg(long)]
    brute_force: bool,
}

impl OracleOpts {
    fn config(&self) -> Result<OracleConfig> {
        Ok(OracleConfig { gas: GasParams::new(self.gas_zero, self.gas_nonzero)?, max_results: self.max_results })
    }

    fn load(&self, store: &Path) -> Result<Oracle> {
        let index = build_index(load_store(store)?)?;
        let strategy = if self.brute_force { Strategy::BruteForce } else { Strategy::Indexed };
        Ok(Oracle::from_engine(QueryEngine::with_strategy(index, strategy), self.config()?))
    }
}

fn read_request(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading request {}", path.display()))
}

fn degrees(c: &ScaledCoord) -> String {
    let d = |v| unscale_to_decimal(v).unwrap_or_else(|_| v.to_string());
    format!("{}, {}", d(c.lat), d(c.lon))
}

fn render(value: &AbiValue) -> String {
    match value {
        AbiValue::Int64(v) => v.to_string(),
        AbiValue::Int64Array(vs) => {
            vs.iter().map(i64::to_string).collect::<Vec<_>>().join("\n")
        }
        AbiValue::StringArray(ss) => ss.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join("\n"),
        AbiValue::CoordPairs(cs) => cs.iter().map(degrees).collect::<Vec<_>>().join("\n"),
        AbiValue::Geocode(r) => format!("{} {} at {}", r.object_type, r.id, degrees(&r.coord)),
        AbiValue::Reverse(r) => format!("{} {}: {}", r.object_type, r.id, r.description),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { input, output, format } => {
            let store = load_store(&input)?;
            let bytes = match format {
                StoreFormat::Snapshot => write_snapshot(&store),
                StoreFormat::Fixture => write_fixture(&store).into_bytes(),
            };
            std::fs::write(&output, bytes).with_context(|| format!("writing {}", output.display()))?;
            println!("{} nodes, {} ways, {} areas", store.node_count(), store.way_count(), store.areas().count());
        }
        Command::Query { store, request, opts } => {
            let doc = read_request(&request)?;
            let oracle = opts.load(&store)?;
            let resp = oracle.handle(&doc)?;
            println!("payload: {}", resp.payload.to_hex());
            println!("result:");
            let shown = render(&decode(&resp.payload)?);
            if !shown.is_empty() {
                println!("{shown}");
            }
            if let Some(n) = resp.match_count {
                println!("match_count: {n}");
            }
            println!("estimated_gas: {}", resp.estimated_gas);
        }
        Command::Serve { store, bind, opts } => {
            let config = ServiceConfig { bind, store, oracle: opts.config()? };
            tokio::runtime::Runtime::new()?.block_on(serve(config))?;
        }
        Command::Estimate { store, request, opts } => {
            let req = parse_request(&read_request(&request)?)?;
            let report = opts.load(&store)?.simulate_gas(&req)?;
            println!("function: {}", report.function);
            if let Some(n) = report.count {
                println!("count: {n}");
            }
            if let Some(g) = report.count_gas {
                println!("count_gas: {g}");
            }
            println!("full_gas: {}", report.full_gas);
            for (limit, gas) in report.by_limit {
                println!("limit {limit}: {gas}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let core = e.chain().find_map(|c| c.downcast_ref::<geo_oracle_core::Error>()).or_else(|| {
                e.chain()
                    .find_map(|c| c.downcast_ref::<geo_oracle_service::ServiceError>())
                    .and_then(|s| match s {
                        geo_oracle_service::ServiceError::Load(inner) => Some(inner),
                        _ => None,
                    })
            });
            match core {
                Some(c) => eprintln!("error[{}]: {e:#}", c.code()),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
