use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmoments::{BaseSpec, DEFAULT_PRECISION};

#[derive(Parser, Debug)]
#[command(
    name = "qmoments",
    version,
    about = "Moment-matching coefficients, quadrature nodes and certified checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Coefficients a_j, r_j = a_j^-2 and b_j = a_j^2.
    Coeffs(CommonArgs),
    /// All values of sum a_j X_j with their outcomes and common weight.
    Nodes(CommonArgs),
    /// Runs every certified check and exits 1 if one fails.
    Verify(VerifyArgs),
    /// Ruler figure of the nodes.
    Figure(CommonArgs),
    /// Tensor-product cubature grid in `dim` dimensions.
    Cubature(CubatureArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// Common base p of every summand.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..), requires = "n", conflicts_with = "bases")]
    pub p: Option<u32>,

    /// Number of summands.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), requires = "p")]
    pub n: Option<u64>,

    /// Comma-separated bases, one per summand.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(2..))]
    pub bases: Option<Vec<u32>>,
}

impl SpecArgs {
    pub fn is_empty(&self) -> bool {
        self.p.is_none() && self.bases.is_none()
    }

    pub fn to_spec(&self) -> qmoments::Result<BaseSpec> {
        match (self.p, self.n, &self.bases) {
            (Some(p), Some(n), None) => BaseSpec::uniform(p, n as usize),
            (None, None, Some(b)) => BaseSpec::new(b.clone()),
            _ => Err(qmoments::Error::InvalidSpec(
                "give either --p with --n, or --bases".into(),
            )),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Significant decimal digits printed for each value.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(10..=10_000))]
    pub digits: u32,

    /// Output format; each command has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// Print a column header line in CSV output.
    #[arg(long)]
    pub csv_header: bool,

    /// Minimum working precision in bits.
    #[arg(long, env = "QMOMENTS_PRECISION", default_value_t = DEFAULT_PRECISION,
          value_parser = clap::value_parser!(u32).range(64..=1 << 16))]
    pub precision: u32,
}

impl OutputArgs {
    /// Working precision: enough bits for `digits` decimals plus guard bits.
    pub fn working_precision(&self) -> u32 {
        let needed = (self.digits as u64 * 3322).div_ceil(1000) as u32 + 32;
        self.precision.max(needed)
    }
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub out: OutputArgs,

    /// Check a node list written by `nodes --format json` instead of
    /// recomputing it.
    #[arg(long, conflicts_with_all = ["p", "n", "bases"])]
    pub from_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CubatureArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub out: OutputArgs,

    /// Dimension of the product grid.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub dim: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
            Format::Svg => "svg",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("qmoments").chain(args.iter().copied()))
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn uniform_and_mixed_specs() {
        let Command::Coeffs(c) = parse(&["coeffs", "--p", "2", "--n", "3"]).unwrap().command else {
            panic!("wrong command");
        };
        assert_eq!(c.spec.to_spec().unwrap().bases(), &[2, 2, 2]);
        let Command::Nodes(c) = parse(&["nodes", "--bases", "3,2"]).unwrap().command else {
            panic!("wrong command");
        };
        assert_eq!(c.spec.to_spec().unwrap().bases(), &[3, 2]);
    }

    #[test]
    fn rejects_bad_flags() {
        assert!(parse(&["coeffs", "--p", "2"]).is_err());
        assert!(parse(&["coeffs", "--p", "1", "--n", "2"]).is_err());
        assert!(parse(&["coeffs", "--p", "2", "--n", "2", "--bases", "2,3"]).is_err());
        assert!(parse(&["coeffs", "--p", "2", "--n", "2", "--digits", "9"]).is_err());
        assert!(parse(&["cubature", "--p", "2", "--n", "2"]).is_err());
        assert!(parse(&["verify", "--p", "2", "--n", "2", "--from-file", "x.json"]).is_err());
    }

    #[test]
    fn precision_follows_digits() {
        let Command::Coeffs(c) = parse(&["coeffs", "--p", "2", "--n", "1", "--digits", "100", "--precision", "64"])
            .unwrap()
            .command
        else {
            panic!("wrong command");
        };
        assert_eq!(c.out.working_precision(), 333 + 32);
    }
}
