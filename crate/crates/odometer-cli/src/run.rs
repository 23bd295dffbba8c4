//! Subcommand dispatch and report emission.

use clap::{Subcommand, ValueEnum};
use num::{BigRational, BigUint};
use num_traits::{One, Signed, Zero};
use odometer_core::exec::ExecPolicy;
use odometer_core::measure::{condition_star, nonatomic_check, MeasureSeq};
use odometer_core::operator::{
    conservativity_witness, hc_witness, orbit_norms, periodic_period, sc_gap_checker,
    SimpleFunction,
};
use odometer_core::pattern::Direction;
use odometer_core::{example_d, BaseSeq, ClaimReport, Cylinder, PatternSet, Prefix, Verdict};
use std::io::Write;

use crate::config::{parse_rational, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(std::io::Error),
    Core(odometer_core::Error),
}

impl From<odometer_core::Error> for CliError {
    fn from(e: odometer_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemName {
    /// The dyadic marker system.
    ExampleD,
    /// Uniform dyadic coordinate measures.
    Uniform,
}

impl SystemName {
    fn measure_seq(&self) -> MeasureSeq {
        match self {
            SystemName::ExampleD => MeasureSeq::example_d(),
            SystemName::Uniform => MeasureSeq::uniform(BaseSeq::dyadic()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Preimage,
    Image,
}

impl DirectionArg {
    fn dir(&self) -> Direction {
        match self {
            DirectionArg::Preimage => Direction::Preimage,
            DirectionArg::Image => Direction::Image,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Statement,
    Proof,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run a named verifier and report its verdict.
    Verify {
        #[command(subcommand)]
        claim: Claim,
    },
    /// Certified measure of a set or of its translate.
    Measure {
        /// `B<k>` or comma-separated cylinder digits, e.g. `1,0,1`.
        #[arg(long)]
        set: String,
        /// Translation amount; 0 measures the set itself.
        #[arg(long, default_value = "0")]
        n: String,
        #[arg(long, value_enum, default_value = "preimage")]
        direction: DirectionArg,
    },
    /// Exact orbit norms of a cylinder indicator.
    Orbit {
        /// Comma-separated cylinder digits.
        #[arg(long)]
        indicator: String,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 16)]
        steps: u64,
        /// Count orbit entries at or below this rational.
        #[arg(long)]
        threshold: Option<String>,
    },
    /// Construct and certify a hypercyclicity witness pair.
    Witness {
        #[arg(long)]
        epsilon: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum Claim {
    /// Continuity condition: positive infimum of the ratio products.
    Star {
        #[arg(long, default_value_t = 64)]
        horizon: u64,
        #[arg(long, value_enum, default_value = "example-d")]
        system: SystemName,
    },
    /// Divergence test for non-atomicity of the product measure.
    Nonatomic {
        #[arg(long, default_value_t = 64)]
        horizon: u64,
        #[arg(long, value_enum, default_value = "example-d")]
        system: SystemName,
    },
    /// Block count |I_k| against the closed form.
    Claim1 {
        #[arg(long)]
        k: u32,
    },
    /// Density ratio of I in the k-th window against the bound.
    Claim2 {
        #[arg(long)]
        k: u32,
    },
    /// Sampled preimage-measure decay over I_l, plus mu(B_k) -> 0.
    Dc1 {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long, default_value_t = 10)]
        smallest: u64,
        /// Highest index for the mu(B_k) < 1/k chain.
        #[arg(long, default_value_t = 6)]
        chain: u32,
    },
    /// Fraction of translates with certified preimage measure > 1/16.
    Dc2 {
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum)]
        window: WindowArg,
    },
    /// Periodicity of a cylinder indicator under the operator.
    Periodic {
        #[arg(long)]
        indicator: String,
    },
    /// Conservativity witness for a cylinder.
    Conservative {
        #[arg(long)]
        prefix: String,
    },
    /// Hypercyclicity witness pair (same as the top-level command).
    Witness {
        #[arg(long)]
        epsilon: String,
    },
    /// Supercyclicity-gap checker on the synthetic two-coordinate set.
    ScGap {
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 64)]
        k: u64,
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        #[arg(long, default_value_t = 1)]
        p: u32,
    },
}

pub fn run(cli: crate::Cli) -> Result<u8, CliError> {
    let cfg = RunConfig::resolve(&cli)?;
    let mut csv: Vec<String> = Vec::new();
    let reports = match &cli.cmd {
        Cmd::Verify { claim } => run_verify(claim, &cfg)?,
        Cmd::Measure { set, n, direction } => run_measure(set, n, *direction, &cfg)?,
        Cmd::Orbit { indicator, p, steps, threshold } => {
            run_orbit(indicator, *p, *steps, threshold.as_deref(), &cfg, &mut csv)?
        }
        Cmd::Witness { epsilon } => run_witness(epsilon, &cfg)?,
    };
    emit(&cfg, &reports, &csv)?;
    Ok(exit_code(&reports))
}

fn exit_code(reports: &[ClaimReport]) -> u8 {
    if reports.iter().any(|r| r.verdict == Verdict::Refuted) {
        1
    } else if reports.iter().all(|r| r.verdict == Verdict::Verified) {
        0
    } else {
        2
    }
}

fn emit(cfg: &RunConfig, reports: &[ClaimReport], csv: &[String]) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let mut file = match &cfg.output {
        Some(p) => Some(
            std::fs::OpenOptions::new().create(true).append(true).open(p)?,
        ),
        None => None,
    };
    for rep in reports {
        let rec = rep.to_record();
        stdout.write_all(rec.as_bytes())?;
        if let Some(f) = &mut file {
            f.write_all(rec.as_bytes())?;
        }
    }
    if let (Some(p), false) = (&cfg.csv, csv.is_empty()) {
        std::fs::write(p, csv.join("\n") + "\n")?;
    }
    Ok(())
}

fn run_verify(claim: &Claim, cfg: &RunConfig) -> Result<Vec<ClaimReport>, CliError> {
    let policy = ExecPolicy::with_degree(cfg.threads);
    match claim {
        Claim::Star { horizon, system } => {
            Ok(vec![condition_star(&system.measure_seq(), *horizon)])
        }
        Claim::Nonatomic { horizon, system } => {
            Ok(vec![nonatomic_check(&system.measure_seq(), *horizon)])
        }
        Claim::Claim1 { k } => {
            require_k(*k)?;
            Ok(vec![example_d::claim1_verify(*k)])
        }
        Claim::Claim2 { k } => {
            require_k(*k)?;
            Ok(vec![example_d::claim2_density(*k)])
        }
        Claim::Dc1 { k, l, samples, smallest, chain } => {
            require_k(*k)?;
            if l <= k {
                return Err(usage("dc1 requires l > k"));
            }
            let opts = example_d::Dc1Options {
                samples: *samples,
                seed: cfg.seed,
                smallest: *smallest,
                tol: cfg.tol.clone(),
                cap: cfg.depth_cap,
            };
            let scan = example_d::dc1_scan(*k, *l, &opts, policy)?;
            let chain = example_d::b_measure_chain((*chain).max(*k), &cfg.tol, cfg.depth_cap)?;
            Ok(vec![scan, chain])
        }
        Claim::Dc2 { k, window } => {
            require_k(*k)?;
            let w = match window {
                WindowArg::Statement => example_d::Dc2Window::Statement,
                WindowArg::Proof => example_d::Dc2Window::Proof,
            };
            Ok(vec![example_d::dc2_count(*k, w, &cfg.tol, cfg.depth_cap, policy)?])
        }
        Claim::Periodic { indicator } => {
            let phi = SimpleFunction::indicator(&parse_cylinder(indicator)?);
            let rep = periodic_period(&phi);
            let verdict = if rep.beta_verified { Verdict::Verified } else { Verdict::Refuted };
            Ok(vec![ClaimReport::new("periodic", verdict)
                .param("indicator", indicator)
                .value_str("beta_period", &rep.beta_period)
                .value_str("minimal_period", &rep.minimal)])
        }
        Claim::Conservative { prefix } => {
            let c = parse_cylinder(prefix)?;
            let ms = MeasureSeq::example_d();
            let (n, overlap) = conservativity_witness(&ms, &c);
            let verdict =
                if overlap.is_positive() { Verdict::Verified } else { Verdict::Refuted };
            Ok(vec![ClaimReport::new("conservative", verdict)
                .param("prefix", prefix)
                .value_str("n", &n)
                .value_rat("overlap", &overlap)])
        }
        Claim::Witness { epsilon } => run_witness(epsilon, cfg),
        Claim::ScGap { depth, k, lambda, epsilon, p } => {
            run_sc_gap(*depth, *k, lambda, epsilon, *p, cfg)
        }
    }
}

fn require_k(k: u32) -> Result<(), CliError> {
    if k < 1 {
        return Err(usage("k must be at least 1"));
    }
    Ok(())
}

fn parse_digits(s: &str) -> Result<Vec<u32>, CliError> {
    let digits: Result<Vec<u32>, _> = s.split(',').map(|d| d.trim().parse::<u32>()).collect();
    let digits = digits.map_err(|_| usage(format!("not a digit list: {s}")))?;
    if digits.is_empty() || digits.iter().any(|&d| d > 1) {
        return Err(usage(format!("digits must be 0 or 1 in the dyadic base: {s}")));
    }
    Ok(digits)
}

fn parse_cylinder(s: &str) -> Result<Cylinder, CliError> {
    let digits = parse_digits(s)?;
    Ok(Cylinder::new(Prefix::from_digits(digits, &BaseSeq::dyadic())))
}

fn parse_biguint(s: &str) -> Result<BigUint, CliError> {
    s.parse().map_err(|_| usage(format!("not a nonnegative integer: {s}")))
}

fn parse_set(s: &str) -> Result<PatternSet, CliError> {
    if let Some(k) = s.strip_prefix('B').or_else(|| s.strip_prefix('b')) {
        let k: u32 = k.parse().map_err(|_| usage(format!("bad set name: {s}")))?;
        require_k(k)?;
        return Ok(example_d::b_set(k));
    }
    Ok(PatternSet::from_cylinder(&parse_cylinder(s)?))
}

fn run_measure(
    set: &str,
    n: &str,
    direction: DirectionArg,
    cfg: &RunConfig,
) -> Result<Vec<ClaimReport>, CliError> {
    let ms = MeasureSeq::example_d();
    let pat = parse_set(set)?;
    let n = parse_biguint(n)?;
    let tp = if n.is_zero() {
        pat.measure(&ms, &cfg.tol, cfg.depth_cap)?
    } else {
        pat.translate_measure(&ms, &n, direction.dir(), &cfg.tol, cfg.depth_cap)?
    };
    let verdict = if tp.converged { Verdict::Verified } else { Verdict::Inconclusive };
    let mut rep = ClaimReport::new("measure", verdict)
        .param("set", set)
        .param("n", &n)
        .value_interval("measure", &tp.interval);
    if !n.is_zero() {
        rep = rep.param(
            "direction",
            match direction {
                DirectionArg::Preimage => "preimage",
                DirectionArg::Image => "image",
            },
        );
    }
    Ok(vec![rep])
}

fn run_orbit(
    indicator: &str,
    p: u32,
    steps: u64,
    threshold: Option<&str>,
    _cfg: &RunConfig,
    csv: &mut Vec<String>,
) -> Result<Vec<ClaimReport>, CliError> {
    if p < 1 || steps < 1 {
        return Err(usage("orbit requires p >= 1 and steps >= 1"));
    }
    let ms = MeasureSeq::example_d();
    let phi = SimpleFunction::indicator(&parse_cylinder(indicator)?);
    let threshold = threshold.map(parse_rational).transpose()?;
    let scan = orbit_norms(&ms, &phi, p, steps, threshold.as_ref());
    let mut rep = ClaimReport::new("orbit", Verdict::Verified)
        .param("indicator", indicator)
        .param("p", p)
        .param("steps", steps)
        .value_rat("min", &scan.min)
        .value_str("argmin", scan.argmin)
        .value_rat("max", &scan.max)
        .value_str("argmax", scan.argmax);
    if let Some(c) = scan.below_threshold {
        rep = rep.value_str("below_threshold", c);
    }
    csv.push("n,norm_pp".to_string());
    for (i, v) in scan.norms.iter().enumerate() {
        let key = format!("norm_{:06}", i + 1);
        csv.push(format!("{},{}/{}", i + 1, v.numer(), v.denom()));
        if steps <= 64 {
            rep = rep.value_rat(&key, v);
        }
    }
    Ok(vec![rep])
}

fn run_witness(epsilon: &str, cfg: &RunConfig) -> Result<Vec<ClaimReport>, CliError> {
    let eps = parse_rational(epsilon)?;
    if !eps.is_positive() || eps >= BigRational::one() {
        return Err(usage("epsilon must lie strictly in (0, 1)"));
    }
    let ms = MeasureSeq::example_d();
    let provider = example_d::MarkerWitnessProvider::default();
    match hc_witness(&ms, &eps, &provider, &cfg.tol, cfg.depth_cap) {
        Ok(w) => Ok(vec![ClaimReport::new("witness", Verdict::Verified)
            .param("epsilon", epsilon)
            .param("carry_case", w.carry_case)
            .param("depth_N", w.n_depth)
            .value_str("j", &w.j)
            .value_interval("mu_A", &w.mu_a)
            .value_interval("mu_fj_A", &w.mu_fj_a)
            .note("certified: mu(A) > 1 - epsilon and mu(f^j(A)) < epsilon")]),
        Err(odometer_core::Error::CertificationFailure(msg)) => {
            Ok(vec![ClaimReport::new("witness", Verdict::Refuted)
                .param("epsilon", epsilon)
                .note(msg)])
        }
        Err(odometer_core::Error::ProviderFailure) => {
            Ok(vec![ClaimReport::new("witness", Verdict::Inconclusive)
                .param("epsilon", epsilon)
                .note("no admissible translate within the provider's budget")])
        }
        Err(e) => Err(e.into()),
    }
}

fn run_sc_gap(
    depth: usize,
    k: u64,
    lambda: &str,
    epsilon: &str,
    p: u32,
    _cfg: &RunConfig,
) -> Result<Vec<ClaimReport>, CliError> {
    if depth < 2 || depth > 16 {
        return Err(usage("sc-gap depth must be in 2..=16"));
    }
    let lambda = parse_rational(lambda)?;
    if !lambda.is_positive() {
        return Err(usage("lambda must be positive"));
    }
    let eps = parse_rational(epsilon)?;
    if !eps.is_positive() {
        return Err(usage("epsilon must be positive"));
    }
    let ms = MeasureSeq::example_d();
    let base = BaseSeq::dyadic();
    // A = {x(depth-1) = 0, x(depth) = 0}; phi is 2 on A \ f^k(A), -2 elsewhere
    let beta: u64 = 1 << depth;
    let mask: u64 = 0b11 << (depth - 2);
    let a_vals: Vec<u64> = (0..beta).filter(|v| v & mask == 0).collect();
    let a = odometer_core::CylinderUnion::from_values(a_vals, depth, &base);
    let fka = a.translate(&num::BigInt::from(k), Direction::Image);
    let on = a.difference(&fka).map_err(CliError::Core)?;
    let terms = (0..beta).map(|v| {
        let c = if on.contains_value(&BigUint::from(v)) {
            BigRational::from_integer(2.into())
        } else {
            BigRational::from_integer((-2).into())
        };
        (BigUint::from(v), c)
    });
    let phi = SimpleFunction::new(depth, &base, terms);
    let (rep, _) = sc_gap_checker(&ms, &phi, &lambda, k, &eps, p);
    Ok(vec![rep])
}
