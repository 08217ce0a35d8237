//! `doublepole`: list, verify and sweep the identity registry, or run the
//! brute-force self-test.

mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use doublepole::identities::{self, Fault, IdentityError, ParamRanges, Params, Range};
use doublepole::nahm::WMode;

use report::Output;

#[derive(Parser, Debug)]
#[command(
    name = "doublepole",
    version,
    about = "Verify double-pole q-series identities by exact truncated expansion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the registered identity families.
    List(ListArgs),
    /// Verify one identity at one parameter tuple.
    Verify(VerifyArgs),
    /// Verify every tuple of a Cartesian parameter sweep.
    Sweep(SweepArgs),
    /// Run the brute-force oracle suite.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Leave elapsed times out of the output.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct ListArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    id: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// 0, 1, half or w
    #[arg(long, value_parser = parse_w)]
    w: Option<WMode>,
    /// Truncation order in units of q^(1/grain).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    order: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    id: String,
    /// Values as `n`, `a..b` (inclusive) or `all`.
    #[arg(long, value_parser = parse_range)]
    k: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    i: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    t: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    s: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    m: Option<Range>,
    /// Comma-separated w modes.
    #[arg(long, value_delimiter = ',', value_parser = parse_w)]
    w: Option<Vec<WMode>>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    order: Option<u32>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InjectedFault {
    CorruptDp,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<InjectedFault>,
}

fn parse_w(s: &str) -> Result<WMode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_range(s: &str) -> Result<Range, String> {
    Range::parse(s).map_err(|e| format!("{e}"))
}

fn usage_error(e: IdentityError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn verdict(all_equal: bool) -> ExitCode {
    if all_equal {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List(args) => {
            report::list(args.format);
            ExitCode::SUCCESS
        }
        Command::Verify(args) => {
            let mut p = Params::new();
            p.k = args.k;
            p.i = args.i;
            p.t = args.t;
            p.s = args.s;
            p.m = args.m;
            p.w = args.w;
            match identities::verify(&args.id, &p, args.order.map(|o| o as usize)) {
                Ok(r) => {
                    let out = Output::new(args.common.format, !args.common.no_timing);
                    out.single(&r);
                    verdict(r.status.is_equal())
                }
                Err(e) => usage_error(e),
            }
        }
        Command::Sweep(args) => {
            let ranges = ParamRanges {
                k: args.k,
                i: args.i,
                t: args.t,
                s: args.s,
                m: args.m,
                w: args.w,
            };
            match identities::sweep(
                &args.id,
                &ranges,
                args.order.map(|o| o as usize),
                args.jobs as usize,
            ) {
                Ok(reports) => {
                    let out = Output::new(args.common.format, !args.common.no_timing);
                    out.many(&reports);
                    verdict(reports.iter().all(|r| r.status.is_equal()))
                }
                Err(e) => usage_error(e),
            }
        }
        Command::Selftest(args) => {
            let fault = args
                .inject_fault
                .map(|InjectedFault::CorruptDp| Fault::CorruptDp);
            let summary = identities::selftest(fault);
            report::selftest(args.format, &summary);
            verdict(summary.ok())
        }
    }
}
