use std::path::PathBuf;

use affine_core::rational::parse_rational;
use affine_core::Rational;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Debug, Parser)]
#[command(name = "affine", version, about = "Affine jump processes on finite lattice state spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check intensities, support and affine span of a model.
    Validate {
        model: PathBuf,
        /// Read a hybrid (layer plus drift) model.
        #[arg(long)]
        hybrid: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Normalized jump counters, their pairwise relations and the counter transform.
    Counters {
        model: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Kernel decomposition and Riccati system in counter coordinates.
    TransformStructure {
        model: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classify a one- or two-dimensional model.
    Classify {
        model: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write a built-in example model.
    Make {
        #[command(subcommand)]
        example: MakeCommand,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate E_x[exp(<u, X_t>)] for every state x.
    Transform {
        model: PathBuf,
        /// Comma-separated complex components, e.g. "0.7i" or "1-2i,0.5i".
        #[arg(long, value_parser = parse_complex_list)]
        u: ComplexList,
        /// Comma-separated times.
        #[arg(long, value_parser = parse_f64_list)]
        t: F64List,
        #[arg(long, value_enum, default_value_t = Method::Riccati)]
        method: Method,
        /// Absolute and relative ODE tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate paths exactly; prints events or endpoint samples.
    Simulate {
        model: PathBuf,
        /// Start state; for hybrid models "y,z".
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        paths: usize,
        #[arg(long)]
        seed: u64,
        /// Read a hybrid (layer plus drift) model.
        #[arg(long)]
        hybrid: bool,
        /// Only report the state at the horizon.
        #[arg(long)]
        endpoints: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare Riccati, uniformization oracle, closed form and Monte Carlo.
    Verify {
        model: PathBuf,
        #[arg(long, value_parser = parse_complex_list)]
        u: ComplexList,
        #[arg(long, value_parser = parse_f64_list)]
        t: F64List,
        /// Monte Carlo paths; 0 skips the simulation check.
        #[arg(long, default_value_t = 0)]
        paths: usize,
        /// Required when --paths is positive.
        #[arg(long)]
        seed: Option<u64>,
        /// Start state for the Monte Carlo check; defaults to the first state.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_i64_list)]
        x0: Option<I64List>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Locate a zero of u -> Psi(u, t) for a one-dimensional model.
    Zeros {
        model: PathBuf,
        #[arg(long)]
        t: f64,
        /// Real range "lo,hi" of the search rectangle.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_f64_list)]
        re: F64List,
        /// Imaginary range "lo,hi" of the search rectangle.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_f64_list)]
        im: F64List,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum MakeCommand {
    /// Rates x*alpha down and (N - x)*beta up on {0, ..., N}.
    BirthDeath {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = parse_rational_arg)]
        alpha: Rational,
        #[arg(long, value_parser = parse_rational_arg)]
        beta: Rational,
    },
    /// Lattice simplex {x >= 0, sum x <= N} with mass moving between coordinates.
    Simplex {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u32,
        /// One rate for every ordered pair.
        #[arg(long, value_parser = parse_rational_arg, conflicts_with = "rates")]
        rate: Option<Rational>,
        /// Six planar rates "l1,...,l6" (d = 2 only).
        #[arg(long, value_parser = parse_rational_list)]
        rates: Option<RationalList>,
    },
    /// Two-dimensional model with a layer structure.
    LayerExample,
    /// Two independent birth-death processes.
    IndependentProduct {
        #[arg(long)]
        n1: u32,
        #[arg(long, value_parser = parse_rational_arg)]
        alpha1: Rational,
        #[arg(long, value_parser = parse_rational_arg)]
        beta1: Rational,
        #[arg(long)]
        n2: u32,
        #[arg(long, value_parser = parse_rational_arg)]
        alpha2: Rational,
        #[arg(long, value_parser = parse_rational_arg)]
        beta2: Rational,
    },
    /// Embedding of a finite Markov chain given its rate matrix, rows separated by ';'.
    Markov {
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Hybrid model: pure-death layer, Z decays and jumps uniformly at each death.
    HybridUniformJump {
        #[arg(long)]
        n: u32,
    },
    /// Hybrid model: birth-death layer, Z relaxes continuously towards Y/N.
    HybridDriftCoupled {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Riccati,
    Oracle,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

// Newtypes so clap does not treat the values as repeated arguments.
#[derive(Debug, Clone)]
pub struct ComplexList(pub Vec<Complex64>);
#[derive(Debug, Clone)]
pub struct F64List(pub Vec<f64>);
#[derive(Debug, Clone)]
pub struct I64List(pub Vec<i64>);
#[derive(Debug, Clone)]
pub struct RationalList(pub Vec<Rational>);

fn parse_real(text: &str) -> Result<f64, String> {
    let value: f64 = text.trim().parse().map_err(|_| format!("not a number: {text:?}"))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("not a finite number: {text:?}"))
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`; a bare `i` means `1i`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real(&s)?, 0.0));
    };
    // The sign separating the parts is the last one not opening an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (parse_real(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other).map_err(|_| format!("not a complex number: {text:?}"))?,
    };
    Ok(Complex64::new(re, im))
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim)
}

pub fn parse_complex_list(text: &str) -> Result<ComplexList, String> {
    split_list(text).map(parse_complex).collect::<Result<_, _>>().map(ComplexList)
}

pub fn parse_f64_list(text: &str) -> Result<F64List, String> {
    split_list(text).map(parse_real).collect::<Result<_, _>>().map(F64List)
}

pub fn parse_i64_list(text: &str) -> Result<I64List, String> {
    split_list(text)
        .map(|s| s.parse::<i64>().map_err(|_| format!("not an integer: {s:?}")))
        .collect::<Result<_, _>>()
        .map(I64List)
}

pub fn parse_rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

pub fn parse_rational_list(text: &str) -> Result<RationalList, String> {
    split_list(text).map(parse_rational_arg).collect::<Result<_, _>>().map(RationalList)
}
