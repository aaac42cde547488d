use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use tseq_core::experiment::{
    run, write_atomic, ExperimentConfig, ExperimentId, Format, Outcome, OutputSpec, EXIT_ERROR,
};
use tseq_core::{Error, Result};

#[derive(Parser)]
#[command(name = "tseq", version, about = "Exact witnesses for sequences converging in group topologies on Z")]
struct Cli {
    /// Experiment config (JSON); its values override command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Default)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv; defaults to the --out extension, else json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Track a growth function inside a neighborhood base (CSV table).
    Track {
        /// Base description: inline JSON or a path to a JSON file.
        #[arg(long)]
        base: String,
        #[arg(long, default_value = "n^2")]
        f: String,
        #[arg(long, default_value = "default")]
        eps: String,
        #[arg(long = "N")]
        n: String,
        #[arg(long)]
        level_cap: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Block minima of consecutive gaps of a sequence or a tracked run.
    Gaps {
        #[arg(long, conflicts_with = "base")]
        seq: Option<String>,
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long = "N")]
        n: String,
        /// `dyadic` or a window width.
        #[arg(long, default_value = "dyadic")]
        blocks: String,
        #[command(flatten)]
        output: Output,
    },
    /// Ring-obstruction certificate for the ratio-r sequence.
    Ringseq {
        #[arg(long)]
        r: String,
        #[arg(long = "N")]
        n: String,
        #[arg(long)]
        kmax: Option<String>,
        #[arg(long)]
        ratio_from: Option<String>,
        #[arg(long)]
        ratio_to: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Membership of x in the tail-sum neighborhood given by slots.
    NbhdMember {
        /// A sequence preset, or `e` for the generators of the free group.
        #[arg(long)]
        seq: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        slots: String,
        #[arg(long)]
        depth: Option<String>,
        /// Largest sequence index a summand may use.
        #[arg(long)]
        terms: Option<String>,
        #[arg(long)]
        budget: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Pairs (n, m) with b_m - a_n = g, and the diagonal-escape report.
    SupWitness {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long = "N")]
        n: String,
        #[command(flatten)]
        output: Output,
    },
    /// The free abelian group on countably many generators.
    Freeab {
        #[command(subcommand)]
        command: FreeabCommand,
    },
    /// The amalgamated sum Z (+)_{cZ} Z.
    Amalgam {
        #[command(subcommand)]
        command: AmalgamCommand,
    },
}

#[derive(Subcommand)]
enum FreeabCommand {
    /// Only 0 survives in U_{n0} among vectors of norm at most n0.
    BallCap {
        #[arg(long)]
        n0: String,
        #[arg(long, default_value = "8")]
        window: String,
        #[command(flatten)]
        output: Output,
    },
    /// Elements 2^n e_i inside a slot neighborhood.
    Witness {
        #[arg(long)]
        n: String,
        #[arg(long)]
        slots: String,
        #[arg(long, default_value = "5")]
        count: String,
        #[command(flatten)]
        output: Output,
    },
    /// The compact set {0} and (n0+1) e_i with f(i) = n0+1 inside H.
    Compact {
        #[arg(long)]
        n0: String,
        #[arg(long, default_value = "10")]
        count: String,
        #[arg(long, default_value = "dyadic")]
        fiber: String,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum AmalgamCommand {
    /// Checks e(H) = e1(Z) ∩ e2(Z) on a window.
    Check {
        #[arg(long)]
        c: String,
        #[arg(long, default_value = "1000")]
        bound: String,
        #[command(flatten)]
        output: Output,
    },
    /// Normal forms of e1(a_n) and e2(a_n).
    Push {
        #[arg(long)]
        a: String,
        #[arg(long)]
        c: String,
        #[arg(long = "N")]
        n: String,
        #[command(flatten)]
        output: Output,
    },
}

fn base_value(text: &str) -> Result<Value> {
    let raw = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        std::fs::read_to_string(text)?
    };
    serde_json::from_str(&raw).map_err(|e| Error::Config {
        field: "base".into(),
        msg: e.to_string(),
    })
}

struct Builder {
    cfg: ExperimentConfig,
    output: Output,
}

impl Builder {
    fn new(id: ExperimentId, output: Output) -> Self {
        Builder {
            cfg: ExperimentConfig::new(id),
            output,
        }
    }

    fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.cfg.set(key, value);
        self
    }

    fn opt(self, key: &str, value: Option<String>) -> Self {
        match value {
            Some(v) => self.set(key, v),
            None => self,
        }
    }
}

fn parse_format(text: &str) -> Result<Format> {
    match text {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
    }
}

fn build(cmd: Command) -> Result<Builder> {
    use ExperimentId as E;
    Ok(match cmd {
        Command::Track {
            base,
            f,
            eps,
            n,
            level_cap,
            output,
        } => Builder::new(E::Track, output)
            .set("base", base_value(&base)?)
            .set("f", f)
            .set("eps", eps)
            .set("N", n)
            .opt("level_cap", level_cap),
        Command::Gaps {
            seq,
            base,
            f,
            eps,
            n,
            blocks,
            output,
        } => {
            let mut b = Builder::new(E::Gaps, output)
                .opt("seq", seq)
                .opt("f", f)
                .opt("eps", eps)
                .set("N", n)
                .set("blocks", blocks);
            if let Some(base) = base {
                b = b.set("base", base_value(&base)?);
            }
            b
        }
        Command::Ringseq {
            r,
            n,
            kmax,
            ratio_from,
            ratio_to,
            output,
        } => Builder::new(E::Ring, output)
            .set("r", r)
            .set("N", n)
            .opt("kmax", kmax)
            .opt("ratio_from", ratio_from)
            .opt("ratio_to", ratio_to),
        Command::NbhdMember {
            seq,
            x,
            slots,
            depth,
            terms,
            budget,
            output,
        } => Builder::new(E::NbhdMember, output)
            .set("seq", seq)
            .set("x", x)
            .set("slots", slots)
            .opt("depth", depth)
            .opt("terms", terms)
            .opt("budget", budget),
        Command::SupWitness { a, b, g, n, output } => Builder::new(E::Sup, output)
            .set("a", a)
            .set("b", b)
            .set("g", g)
            .set("N", n),
        Command::Freeab { command } => match command {
            FreeabCommand::BallCap { n0, window, output } => Builder::new(E::Tau, output)
                .set("mode", "ball-cap")
                .set("n0", n0)
                .set("window", window),
            FreeabCommand::Witness {
                n,
                slots,
                count,
                output,
            } => Builder::new(E::Tau, output)
                .set("mode", "witness")
                .set("n", n)
                .set("slots", slots)
                .set("count", count),
            FreeabCommand::Compact {
                n0,
                count,
                fiber,
                output,
            } => Builder::new(E::Subgroup, output)
                .set("n0", n0)
                .set("count", count)
                .set("fiber", fiber),
        },
        Command::Amalgam { command } => match command {
            AmalgamCommand::Check { c, bound, output } => Builder::new(E::Amalgam, output)
                .set("mode", "check")
                .set("c", c)
                .set("bound", bound),
            AmalgamCommand::Push { a, c, n, output } => Builder::new(E::Amalgam, output)
                .set("mode", "push")
                .set("a", a)
                .set("c", c)
                .set("N", n),
        },
    })
}

fn resolve_output(cfg: &ExperimentConfig, flags: &Output) -> Result<Option<OutputSpec>> {
    let explicit = flags.format.as_deref().map(parse_format).transpose()?;
    if let Some(out) = &cfg.output {
        return Ok(Some(OutputSpec {
            path: out.path.clone(),
            format: out.format,
        }));
    }
    Ok(flags.out.as_ref().map(|path| OutputSpec {
        path: path.clone(),
        format: explicit.unwrap_or_else(|| infer_format(path)),
    }))
}

fn infer_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        _ => Format::Json,
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let file = cli.config.as_deref().map(ExperimentConfig::load).transpose()?;
    let (cfg, flags) = match (cli.command, file) {
        (Some(cmd), file) => {
            let mut b = build(cmd)?;
            if let Some(file) = file {
                b.cfg.merge(file)?;
            }
            (b.cfg, b.output)
        }
        (None, Some(file)) => (file, Output::default()),
        (None, None) => {
            return Err(Error::InvalidArgument(
                "nothing to run: give a subcommand or --config".into(),
            ))
        }
    };
    let outcome = run(&cfg)?;
    let target = resolve_output(&cfg, &flags)?;
    let stdout_format = flags
        .format
        .as_deref()
        .map(parse_format)
        .transpose()?
        .unwrap_or(match outcome {
            Outcome::Table { .. } => Format::Csv,
            Outcome::Report(_) => Format::Json,
        });
    match target {
        Some(spec) => {
            write_atomic(&spec.path, &outcome.render(spec.format)?)?;
            match &outcome {
                Outcome::Report(r) => println!("{}: {} -> {}", r.claim, r.verdict, spec.path.display()),
                Outcome::Table { rows, .. } => println!("{} rows -> {}", rows.len(), spec.path.display()),
            }
        }
        None => print!("{}", outcome.render(stdout_format)?),
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
