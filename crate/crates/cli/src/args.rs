use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linflow::equiv::Relation;
use linflow::ratclass::DEFAULT_QMAX;
use linflow::{Field, Tolerance};

#[derive(Debug, Parser)]
#[command(name = "linflow", version, about = "Classify linear flows e^{tA} up to topological and smooth equivalence")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Relative threshold for rank decisions
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_rank: f64,

    /// Relative eigenvalue clustering radius
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_cluster: f64,

    /// Residual bound for certificate checks
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_residual: f64,

    /// Largest denominator accepted for frequency ratios
    #[arg(long, global = true, default_value_t = DEFAULT_QMAX)]
    pub qmax: u64,

    /// Field of the input matrices; inferred from the entries when omitted
    #[arg(long, global = true, value_enum)]
    pub field: Option<FieldArg>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl GlobalOpts {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance { rank_rel: self.tol_rank, eig_cluster_rel: self.tol_cluster, residual_abs: self.tol_residual }
    }

    pub fn field(&self) -> Option<Field> {
        self.field.map(Field::from)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants of one generator: S/C/U split, Jordan structure, class descriptors, cores, rational classes
    Classify {
        /// Matrix file, or an inline literal such as "[0 -1; 1 0]"
        input: String,
    },
    /// Decide whether two generators give equivalent flows
    Compare(CompareArgs),
    /// The 2x2 catalog with its pairwise verdict matrix
    Enum2 {
        #[arg(long, value_enum, default_value_t = RelationArg::Topological)]
        relation: RelationArg,
    },
    /// Check the special-matrix identities on a fixed grid
    Selftest,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    pub a: Option<String>,

    #[arg(required_unless_present = "batch")]
    pub b: Option<String>,

    #[arg(long, value_enum, default_value_t = RelationArg::Topological)]
    pub relation: RelationArg,

    /// Write the conjugating matrix to this path (JSON matrix document)
    #[arg(long)]
    pub certificate_out: Option<PathBuf>,

    /// Compare realifications, allowing a real and a complex input
    #[arg(long)]
    pub realify: bool,

    /// File with one comparison "A | B" per line
    #[arg(long)]
    pub batch: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelationArg {
    Topological,
    Smooth,
}

impl From<RelationArg> for Relation {
    fn from(r: RelationArg) -> Relation {
        match r {
            RelationArg::Topological => Relation::Topological,
            RelationArg::Smooth => Relation::Smooth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn compare_needs_two_inputs_or_batch() {
        assert!(Cli::try_parse_from(["linflow", "compare", "[1]"]).is_err());
        assert!(Cli::try_parse_from(["linflow", "compare", "[1]", "[2]"]).is_ok());
        assert!(Cli::try_parse_from(["linflow", "compare", "--batch", "pairs.txt"]).is_ok());
        assert!(Cli::try_parse_from(["linflow", "compare", "[1]", "[2]", "--batch", "p"]).is_err());
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["linflow", "classify", "[1]", "--tol-cluster", "1e-6", "--format", "json"]).unwrap();
        assert_eq!(cli.global.tol_cluster, 1e-6);
        assert_eq!(cli.global.format, Format::Json);
        assert_eq!(cli.global.field(), None);
    }
}
