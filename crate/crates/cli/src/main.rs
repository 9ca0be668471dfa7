use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cofibered::certify::{reverify, run_dihedral, run_quaternionic, run_sl2z, Bundle, HSpec, Recheck, RunConfig};
use cofibered::commens::{local_intersection, Conjugator};
use cofibered::exact::{format_rational, parse_rational, prime_divisors};
use cofibered::quatalg::{hilbert_symbol, split_2adic, Place, QuaternionAlgebra};
use cofibered::units::{enumerate_units, reduce_quaternion, splitting_precision, IntegralOrder};
use cofibered::{Error, Result};

#[derive(Parser)]
#[command(name = "cofibered", version, about = "Exact certificates for the co-fibered product counterexamples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PipelineArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set d=17`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the bundle here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Standard,
    HalfIntegral,
    Preferred,
}

#[derive(Subcommand)]
enum Command {
    /// Involutions x -> 1/x and x -> a/x.
    Dihedral(PipelineArgs),
    /// The quaternion algebra example, stages 1 to 6.
    Quaternionic(PipelineArgs),
    /// SL2(Z) with a rational conjugator.
    Sl2z(PipelineArgs),
    /// Hilbert symbols (a, b)_v.
    Hilbert {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// A prime or `inf`; all relevant places when omitted.
        #[arg(long)]
        place: Option<String>,
    },
    /// Dump the norm-one units of bounded height.
    Units {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long, default_value_t = 5)]
        height: u64,
        #[arg(long, value_enum, default_value = "preferred")]
        order: OrderArg,
        /// Also print each reduction mod 2^k.
        #[arg(long)]
        level: Option<u32>,
    },
    /// Local index of Gamma ∩ h Gamma h^-1 at one prime.
    Intersect {
        /// `matrix:a,b,c,d` or `quaternion:x0,x1,x2,x3` (needs --d and --b).
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, allow_hyphen_values = true)]
        d: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<i64>,
    },
    /// Re-check every verified certificate of a bundle.
    Verify { bundle: PathBuf },
}

fn load_config(args: &PipelineArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for o in &args.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Config(format!("override {o:?} is not KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_pipeline(args: &PipelineArgs, run: fn(&RunConfig) -> Result<Bundle>) -> Result<ExitCode> {
    let cfg = load_config(args)?;
    let bundle = run(&cfg)?;
    let text = bundle.to_canonical_json();
    match &cfg.out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        // a closed pipe downstream is not an error of the run
        None => drop(io::stdout().write_all(text.as_bytes())),
    }
    eprint!("{}", bundle.summary());
    Ok(ExitCode::from(bundle.exit_code() as u8))
}

fn hilbert(a: &str, b: &str, place: Option<&str>) -> Result<ExitCode> {
    let (a, b) = (parse_rational(a)?, parse_rational(b)?);
    let places = match place {
        Some(p) => vec![p.parse::<Place>()?],
        None => {
            let n = (a.numer() * a.denom()) * (b.numer() * b.denom()) * 2u32;
            let mut ps: Vec<Place> = prime_divisors(&n)?.into_iter().map(Place::Prime).collect();
            ps.push(Place::Infinity);
            ps
        }
    };
    let mut product = 1;
    for v in &places {
        let s = hilbert_symbol(&a, &b, *v)?;
        product *= s;
        println!("({}, {})_{} = {}", format_rational(&a), format_rational(&b), v, s);
    }
    if place.is_none() {
        println!("product = {product}");
    }
    Ok(ExitCode::SUCCESS)
}

fn units(d: i64, b: i64, height: u64, order: OrderArg, level: Option<u32>) -> Result<ExitCode> {
    let alg = QuaternionAlgebra::from_ints(d, b)?;
    let order = match order {
        OrderArg::Standard => IntegralOrder::Standard,
        OrderArg::HalfIntegral => IntegralOrder::HalfIntegral,
        OrderArg::Preferred => IntegralOrder::preferred(&alg)?,
    };
    let slice = enumerate_units(&alg, height, order)?;
    let split = match level {
        Some(k) => Some((k, split_2adic(&alg, splitting_precision(k))?)),
        None => None,
    };
    let mut rows = Vec::new();
    for q in &slice.elements {
        let coords: Vec<String> = q.coords().iter().map(format_rational).collect();
        let mut row = json!({ "unit": coords });
        if let Some((k, s)) = &split {
            let [w, x, y, z] = reduce_quaternion(s, q, *k)?.entries();
            row["reduction"] = json!([[w, x], [y, z]]);
        }
        rows.push(row);
    }
    let doc =
        json!({ "algebra": alg.to_string(), "order": order, "height": height, "count": slice.len(), "units": rows });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    Ok(ExitCode::SUCCESS)
}

fn intersect(h: &str, p: u64, k: u32, d: Option<i64>, b: Option<i64>) -> Result<ExitCode> {
    let conj = match HSpec::parse(h)? {
        HSpec::Matrix(m) => Conjugator::matrix(m)?,
        HSpec::Quaternion(c) => {
            let (Some(d), Some(b)) = (d, b) else {
                return Err(Error::Config("a quaternion h needs --d and --b".into()));
            };
            Conjugator::quaternion(QuaternionAlgebra::from_ints(d, b)?.element(c))?
        }
        HSpec::Default => return Err(Error::Config("give h explicitly".into())),
    };
    let r = local_intersection(&conj, p, k)?;
    let doc = json!({
        "h": conj.describe(),
        "p": p,
        "k": k,
        "level_exponent": r.level_exponent,
        "modulus": r.modulus,
        "ambient_order": r.ambient_order,
        "index_in_gamma": r.index_in_gamma,
        "index_in_gamma_h": r.index_in_gamma_h,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    Ok(ExitCode::SUCCESS)
}

fn verify(path: &PathBuf) -> Result<ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let bundle = Bundle::from_json(&text).map_err(|e| Error::Config(e.to_string()))?;
    let mut failed = false;
    for (claim, r) in reverify(&bundle) {
        match r {
            Recheck::Passed => println!("{claim}: passed"),
            Recheck::Skipped => println!("{claim}: skipped"),
            Recheck::Failed(why) => {
                failed = true;
                println!("{claim}: FAILED ({why})");
            }
        }
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::Dihedral(a) => run_pipeline(a, run_dihedral),
        Command::Quaternionic(a) => run_pipeline(a, run_quaternionic),
        Command::Sl2z(a) => run_pipeline(a, run_sl2z),
        Command::Hilbert { a, b, place } => hilbert(a, b, place.as_deref()),
        Command::Units { d, b, height, order, level } => units(*d, *b, *height, *order, *level),
        Command::Intersect { h, p, k, d, b } => intersect(h, *p, *k, *d, *b),
        Command::Verify { bundle } => verify(bundle),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
