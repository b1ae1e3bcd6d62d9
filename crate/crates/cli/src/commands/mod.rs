mod bilinear;
mod divisor;
mod geometry;
mod report;
mod sumprod;
mod tables;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::Value;

use klab::kloosterman::{read_cache, write_cache};
use klab::sum_product::SumProductContext;
use klab::{build_extension, kloosterman_table, make_prime_field, ExtField, KloostermanTable, SignConvention};

use crate::args::{Cli, Command, Format};
use crate::config::ConfigFile;
use crate::output;

pub const CACHE_ENV: &str = "KLAB_CACHE_DIR";

/// Runs one subcommand; `Ok(false)` means violations were reported.
pub fn run(cli: Cli) -> Result<bool> {
    let cfg = ConfigFile::load(cli.global.config.as_deref())?;
    let global = cfg.resolve("global", &cli.global)?;
    if let Some(w) = global.workers {
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }
    let name = cli.command.name();
    let (config, outcome) = match cli.command {
        Command::KlTable(a) => tables::kl_table(&cfg.resolve(name, &a)?)?,
        Command::KlCheck(a) => tables::kl_check(&cfg.resolve(name, &a)?)?,
        Command::SumprodScan(a) => sumprod::scan(&cfg.resolve(name, &a)?)?,
        Command::Moments(a) => sumprod::moments(&cfg.resolve(name, &a)?)?,
        Command::BilinearSweep(a) => bilinear::sweep(&cfg.resolve(name, &a)?)?,
        Command::Opnorm(a) => bilinear::opnorm(&cfg.resolve(name, &a)?)?,
        Command::ShiftCheck(a) => bilinear::shift_check(&cfg.resolve(name, &a)?)?,
        Command::Sk(a) => geometry::sk(&cfg.resolve(name, &a)?)?,
        Command::Progression(a) => divisor::progression(&cfg.resolve(name, &a)?)?,
        Command::ExponentLp(a) => divisor::exponent_lp(&cfg.resolve(name, &a)?)?,
        Command::Report => report::report(&cfg)?,
    };
    let format = global.format.unwrap_or(Format::Json);
    output::emit(name, &config, &outcome, format, global.out.as_deref())?;
    Ok(outcome.violations.is_empty())
}

fn echo<T: Serialize>(settings: &T) -> Result<Value> {
    Ok(serde_json::to_value(settings)?)
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| anyhow!("sampled runs need --seed (or `seed` in the config section)"))
}

fn parse_sign(sign: Option<&str>) -> Result<SignConvention> {
    sign.unwrap_or("intro").parse().map_err(|e: String| anyhow!(e))
}

fn field(q: u64, d: usize) -> Result<Arc<ExtField>> {
    Ok(Arc::new(build_extension(&make_prime_field(q)?, d)?))
}

fn cache_path(k: usize, f: &ExtField, sign: SignConvention) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    Some(PathBuf::from(dir).join(format!("kl_k{k}_q{}_d{}_{}.bin", f.q(), f.degree(), sign.name())))
}

/// Table for `(k, field, sign)`, read from or written to `$KLAB_CACHE_DIR` when set.
fn load_table(k: usize, f: Arc<ExtField>, sign: SignConvention) -> Result<KloostermanTable> {
    let path = cache_path(k, &f, sign);
    if let Some(p) = path.as_ref().filter(|p| p.exists()) {
        let cached = File::open(p).map_err(anyhow::Error::from).and_then(|file| {
            read_cache(BufReader::new(file)).map_err(anyhow::Error::from)
        });
        // a stale or foreign file is rebuilt below
        if let Ok(t) = cached {
            if t.k() == k && t.convention() == sign && t.field().degree() == f.degree() {
                return Ok(t);
            }
        }
    }
    let table = kloosterman_table(k, f, sign)?;
    if let Some(p) = path {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let file = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        write_cache(&table, BufWriter::new(file))?;
    }
    Ok(table)
}

fn context(k: usize, q: u64, d: usize, c: u64) -> Result<SumProductContext> {
    let f = field(q, d)?;
    let c = f.embed(c);
    let table = load_table(k, f, SignConvention::Intro)?;
    Ok(SumProductContext::new(table, c)?)
}
