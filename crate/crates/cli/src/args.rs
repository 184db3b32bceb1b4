use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qks", version, about = "Exact spectra, eigenstates and thermodynamics of the (q-deformed) Kittel-Shore model")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, env = "QKS_THREADS", global = true)]
    pub threads: Option<usize>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write the table here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    Raw,
    Thermodynamic,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Number of sites.
    #[arg(long = "N", alias = "n")]
    pub n: Option<u64>,

    /// Spin on every site, e.g. 1/2, 1, 3/2.
    #[arg(long, default_value = "1/2")]
    pub j: String,

    /// Per-site spins, comma separated; replaces --N and --j.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n", "j"])]
    pub spins: Option<Vec<String>>,

    /// Deformation parameter, q = e^eta.
    #[arg(long, conflicts_with = "q", allow_hyphen_values = true)]
    pub eta: Option<f64>,

    /// Deformation parameter q > 0.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,

    /// Exchange coupling; positive is ferromagnetic.
    #[arg(long = "I", default_value_t = 1.0, allow_hyphen_values = true)]
    pub coupling: f64,

    /// Magnetic field.
    #[arg(long = "h", default_value_t = 0.0, allow_hyphen_values = true)]
    pub field: f64,

    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,

    /// Boltzmann constant.
    #[arg(long = "kB", default_value_t = 1.0)]
    pub k_b: f64,

    /// raw, or thermodynamic (I -> I/N, eta -> eta/N).
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingArg>,

    /// Largest Hilbert-space dimension allowed for matrix work.
    #[arg(long, env = "QKS_SIZE_CAP")]
    pub size_cap: Option<usize>,

    /// Required to raise the size cap above its default.
    #[arg(long)]
    pub confirm: bool,
}

#[derive(Args, Debug, Clone)]
pub struct TemperatureArgs {
    /// Explicit temperatures, comma separated.
    #[arg(long = "T", value_delimiter = ',', conflicts_with_all = ["t_min", "t_max"])]
    pub temperatures: Option<Vec<f64>>,

    #[arg(long, default_value_t = 0.05)]
    pub t_min: f64,

    #[arg(long, default_value_t = 2.0)]
    pub t_max: f64,

    /// Number of grid points between --t-min and --t-max, inclusive.
    #[arg(long, default_value_t = 40)]
    pub t_steps: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DumpFormatArg {
    Text,
    Binary,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurieMethodArg {
    Susceptibility,
    EqualMaxima,
    Analytic,
    Limit,
    Fit,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analytic spectrum, one line per block (and Zeeman level when h != 0).
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Diagonalize the assembled matrix and report the deviation on stderr.
        #[arg(long)]
        verify: bool,
        /// Dump the assembled Hamiltonian to this file.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DumpFormatArg::Text)]
        dump_format: DumpFormatArg,
    },
    /// Density of states over the corrected energies.
    Dos {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 50)]
        bins: usize,
    },
    /// Coupled-basis eigenstates as product-basis amplitudes.
    States {
        #[command(flatten)]
        model: ModelArgs,
        /// Keep only blocks with this total spin.
        #[arg(long = "J")]
        total_spin: Option<String>,
        /// Keep only this projection.
        #[arg(long, allow_hyphen_values = true)]
        m: Option<String>,
    },
    /// Free energy, specific heat, susceptibility and magnetization over temperature.
    Thermo {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        temps: TemperatureArgs,
    },
    /// Normalized weight of each energy level in the partition function.
    Weights {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "T")]
        temperature: f64,
    },
    /// Curie-temperature estimates.
    Curie {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = CurieMethodArg::Susceptibility)]
        method: CurieMethodArg,
        /// Several deformations at once, comma separated; replaces --eta.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["eta", "q"])]
        etas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.05)]
        t_min: f64,
        #[arg(long, default_value_t = 3.0)]
        t_max: f64,
    },
    /// Cross-check assembly routes, symmetries and the analytic spectrum.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
    },
}
