//! Command dispatch for the `weyl` binary. [`run`] returns the exit code and
//! the text to print, so every command can be driven from tests.

use std::fmt::Write as _;
use std::fs;

use clap::{Args, Parser, Subcommand};
use weyl_algebra::algebra::{act_on_a, Sig, WeylElement};
use weyl_algebra::gamma::{decide_equivalence, BlockMatrix, EquivalenceVerdict, GammaError};
use weyl_algebra::iso::{apply_sigma, build_sigma, decide_isomorphism, verify_sigma, IsoError, IsoVerdict};
use weyl_algebra::matrix::FMatrix;
use weyl_algebra::numberfield::{Irreducibility, NumberField};
use weyl_algebra::random::{self, RandomSpec};
use weyl_algebra::sigfile::{load_signature, SigFileError};
use weyl_algebra::structure::{
    ad_growth, ad_power, classify_local, is_in_e_of_f, is_in_n_of_n, simplicity_probe, AdGrowth,
    ProbeCaps, ProbeResult,
};
use weyl_algebra::syntax::{parse_element, parse_field_element};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID_SIGNATURE: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "weyl", about = "Exact arithmetic in Weyl-type algebras W(l1,l2,l3,Gamma)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SigArg {
    /// Signature file.
    #[arg(short = 's', long = "signature")]
    signature: String,
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Seed for randomized checks, in hex.
    #[arg(long, value_parser = parse_seed, default_value = "0xC0FFEE")]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Product of the expressions, left to right.
    Mul {
        #[command(flatten)]
        sig: SigArg,
        #[arg(required = true)]
        exprs: Vec<String>,
    },
    /// Lie bracket [u, v].
    Bracket {
        #[command(flatten)]
        sig: SigArg,
        u: String,
        v: String,
    },
    /// (ad u)^steps v and the growth of span{(ad u)^s v}.
    Ad {
        #[command(flatten)]
        sig: SigArg,
        u: String,
        v: String,
        #[arg(long, default_value_t = 1)]
        steps: u32,
    },
    /// Local finiteness class, eigenvector/centralizer tests and the
    /// simplicity probe for one element.
    Analyze {
        #[command(flatten)]
        sig: SigArg,
        u: String,
        /// Saturation rounds for the simplicity probe.
        #[arg(long, default_value_t = 6)]
        steps: u32,
        /// Total t/d degree cap for the probe.
        #[arg(long = "degree-cap", default_value_t = 8)]
        degree_cap: u32,
    },
    /// Decide whether two signature files give isomorphic algebras.
    Classify {
        a: String,
        b: String,
        #[arg(long, default_value_t = 2)]
        radius: u32,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Apply the isomorphism built from a witness g (found by search when
    /// omitted) to an expression.
    IsoApply {
        a: String,
        b: String,
        expr: String,
        /// Witness as [[..],[..]], entries are field literals.
        #[arg(short = 'g', long)]
        witness: Option<String>,
        #[arg(long, default_value_t = 2)]
        radius: u32,
    },
    /// Orbit invariants of Gamma and field data.
    Invariants {
        #[command(flatten)]
        sig: SigArg,
    },
    /// Run the randomized invariant suite.
    Selfcheck {
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long = "degree-cap", default_value_t = 3)]
        degree_cap: u32,
        /// Trials per check.
        #[arg(long, default_value_t = 20)]
        steps: u32,
    },
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| format!("bad hex seed '{s}': {e}"))
}

/// A failed command: exit code and message.
struct Failure(i32, String);

impl From<SigFileError> for Failure {
    fn from(e: SigFileError) -> Self {
        let code = if e.is_invalid_signature() {
            EXIT_INVALID_SIGNATURE
        } else {
            EXIT_USAGE
        };
        Failure(code, e.to_string())
    }
}

fn usage(msg: impl ToString) -> Failure {
    Failure(EXIT_USAGE, msg.to_string())
}

fn load(path: &str) -> Result<Sig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
    load_signature(&text).map_err(|e| {
        let f = Failure::from(e);
        Failure(f.0, format!("{path}: {}", f.1))
    })
}

fn parse(sig: &Sig, text: &str) -> Result<WeylElement, Failure> {
    parse_element(sig, text).map_err(|e| usage(format!("'{text}': {e}")))
}

fn iso_failure(e: IsoError) -> Failure {
    match e {
        IsoError::GeneratorCheckFailed(m) => Failure(EXIT_INVARIANT, m),
        IsoError::Gamma(GammaError::FieldMismatch) => usage("signatures are over different fields"),
        other => usage(other),
    }
}

fn sig_name(sig: &Sig) -> String {
    format!("W({},{},{})", sig.l1(), sig.l2(), sig.l3())
}

/// Parses `[[a,b],[c,d]]`.
fn parse_matrix(field: &NumberField, text: &str) -> Result<FMatrix, Failure> {
    let bad = || usage(format!("bad matrix '{text}'"));
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(bad)?;
    let mut rows = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('[').ok_or_else(bad)?;
        let end = body.find(']').ok_or_else(bad)?;
        let row = body[..end]
            .split(',')
            .map(|s| parse_field_element(field, s.trim()).map_err(usage))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
        rest = body[end + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(bad());
    }
    Ok(FMatrix::from_rows(field, cols, rows))
}

fn growth_line(g: &AdGrowth) -> String {
    match g {
        AdGrowth::NilpotentAt(k) => format!("NilpotentAt({k})"),
        AdGrowth::SpanDim(d) => {
            let parts: Vec<String> = d.iter().map(ToString::to_string).collect();
            format!("SpanDim([{}])", parts.join(","))
        }
    }
}

fn dispatch(cli: Cli) -> Result<(i32, String), Failure> {
    let mut out = String::new();
    match cli.command {
        Command::Mul { sig, exprs } => {
            let s = load(&sig.signature)?;
            let mut acc = WeylElement::one(&s);
            for e in &exprs {
                acc = &acc * &parse(&s, e)?;
            }
            writeln!(out, "{acc}").unwrap();
        }
        Command::Bracket { sig, u, v } => {
            let s = load(&sig.signature)?;
            let b = parse(&s, &u)?.bracket(&parse(&s, &v)?).expect("same signature");
            writeln!(out, "{b}").unwrap();
        }
        Command::Ad { sig, u, v, steps } => {
            let s = load(&sig.signature)?;
            let (u, v) = (parse(&s, &u)?, parse(&s, &v)?);
            let p = ad_power(&u, &v, steps).expect("same signature");
            writeln!(out, "(ad u)^{steps} v = {p}").unwrap();
            let g = ad_growth(&u, &v, steps).expect("same signature");
            writeln!(out, "growth: {}", growth_line(&g)).unwrap();
        }
        Command::Analyze {
            sig,
            u,
            steps,
            degree_cap,
        } => {
            let s = load(&sig.signature)?;
            let u = parse(&s, &u)?;
            if u.is_zero() {
                return Err(usage("element is zero"));
            }
            let class = classify_local(&u).map_err(usage)?;
            writeln!(out, "local: {class}").unwrap();
            writeln!(out, "E(F): {}", is_in_e_of_f(&u).map_err(usage)?).unwrap();
            writeln!(out, "N(N): {}", is_in_n_of_n(&u).map_err(usage)?).unwrap();
            if u.is_scalar() {
                writeln!(out, "simplicity: skipped (scalar)").unwrap();
            } else {
                let caps = ProbeCaps {
                    degree: degree_cap,
                    ..ProbeCaps::default()
                };
                match simplicity_probe(&u, steps, &caps).map_err(usage)? {
                    ProbeResult::ReachedOne { rounds, trace } => {
                        writeln!(out, "simplicity: REACHED_ONE rounds={rounds}").unwrap();
                        for line in trace {
                            writeln!(out, "  {line}").unwrap();
                        }
                    }
                    ProbeResult::Exhausted { rounds, span_dim } => {
                        writeln!(out, "simplicity: EXHAUSTED rounds={rounds} span_dim={span_dim}").unwrap();
                    }
                }
            }
        }
        Command::Classify { a, b, radius, seed } => {
            let (sa, sb) = (load(&a)?, load(&b)?);
            writeln!(out, "# seed 0x{:X}", seed.seed).unwrap();
            if sa.tuple() == sb.tuple() && sa.field() != sb.field() {
                return Err(usage("signatures are over different fields"));
            }
            match decide_isomorphism(&sa, &sb, radius).map_err(iso_failure)? {
                IsoVerdict::Isomorphic(sigma) => {
                    writeln!(out, "EQUIVALENT g={}", sigma.witness()).unwrap();
                    let report = verify_sigma(&sigma, 20, seed.seed).expect("same signature");
                    writeln!(out, "sigma: {report}").unwrap();
                    if !report.passed() {
                        return Ok((EXIT_INVARIANT, out));
                    }
                }
                IsoVerdict::NotIsomorphic(cert) => writeln!(out, "INEQUIVALENT {cert}").unwrap(),
                IsoVerdict::Undecided { radius } => {
                    writeln!(out, "UNDECIDED radius={radius}").unwrap();
                    return Ok((EXIT_UNDECIDED, out));
                }
            }
        }
        Command::IsoApply {
            a,
            b,
            expr,
            witness,
            radius,
        } => {
            let (sa, sb) = (load(&a)?, load(&b)?);
            if sa.field() != sb.field() {
                return Err(usage("signatures are over different fields"));
            }
            let g = match witness {
                Some(w) => {
                    let m = parse_matrix(sa.field(), &w)?;
                    BlockMatrix::from_full(&m, sa.l2(), sa.l3()).map_err(usage)?
                }
                None => {
                    if sa.tuple() != sb.tuple() {
                        return Err(iso_failure(IsoError::TupleMismatch(sa.tuple(), sb.tuple())));
                    }
                    match decide_equivalence(sa.gamma(), sb.gamma(), sa.l2(), radius).map_err(usage)? {
                        EquivalenceVerdict::Equivalent(g) => g,
                        other => {
                            writeln!(out, "{other}").unwrap();
                            let code = match other {
                                EquivalenceVerdict::Undecided { .. } => EXIT_UNDECIDED,
                                _ => EXIT_OK,
                            };
                            return Ok((code, out));
                        }
                    }
                }
            };
            let sigma = build_sigma(&g, &sa, &sb).map_err(iso_failure)?;
            let u = parse(&sa, &expr)?;
            let image = apply_sigma(&sigma, &u).expect("source signature");
            writeln!(out, "g={g}").unwrap();
            writeln!(out, "{image}").unwrap();
        }
        Command::Invariants { sig } => {
            let s = load(&sig.signature)?;
            let field = s.field();
            let irr = match field.irreducibility() {
                Irreducibility::Rational => "rational",
                Irreducibility::Checked => "checked",
                Irreducibility::Unchecked => "unchecked",
            };
            writeln!(out, "algebra: {}", sig_name(&s)).unwrap();
            writeln!(out, "field: {field} (irreducibility {irr})").unwrap();
            let basis: Vec<String> = s
                .gamma()
                .basis()
                .iter()
                .map(|b| weyl_algebra::gamma::fmt_vector(b))
                .collect();
            writeln!(out, "gamma basis: [{}]", basis.join(", ")).unwrap();
            writeln!(out, "{}", s.gamma().invariants(s.l2())).unwrap();
        }
        Command::Selfcheck {
            seed,
            degree_cap,
            steps,
        } => {
            writeln!(out, "# seed 0x{:X}", seed.seed).unwrap();
            let ok = selfcheck(&mut out, seed.seed, degree_cap, steps as usize);
            if !ok {
                return Ok((EXIT_INVARIANT, out));
            }
        }
    }
    Ok((EXIT_OK, out))
}

fn selfcheck_signatures() -> Vec<Sig> {
    let sigs = [
        "l1 = 1\nl2 = 0\nl3 = 0\nminpoly = [0, 1]\n",
        "l1 = 0\nl2 = 1\nl3 = 0\nminpoly = [0, 1]\ngen = [1]\n",
        "l1 = 1\nl2 = 1\nl3 = 1\nminpoly = [0, 1]\ngen = [1, 0]\ngen = [0, 1]\n",
        "l1 = 0\nl2 = 1\nl3 = 1\nminpoly = [-2, 0, 1]\ngen = [1, 1]\ngen = [th, -th]\n",
    ];
    sigs.iter()
        .map(|t| load_signature(t).expect("built-in signature"))
        .collect()
}

fn selfcheck(out: &mut String, seed: u64, cap: u32, trials: usize) -> bool {
    let mut all_ok = true;
    let spec = RandomSpec::with_degree(cap);
    let mut report = |out: &mut String, name: &str, sig: &Sig, failures: usize| {
        let status = if failures == 0 { "ok" } else { "FAILED" };
        writeln!(out, "{name} {}: {status} ({failures} failures in {trials} trials)", sig_name(sig)).unwrap();
        all_ok &= failures == 0;
    };
    for (k, sig) in selfcheck_signatures().iter().enumerate() {
        let mut rng = random::rng(seed.wrapping_add(k as u64));
        let (mut assoc, mut jacobi, mut leibniz, mut oracle, mut round_trip) = (0, 0, 0, 0, 0);
        for _ in 0..trials {
            let u = random::random_element(sig, &spec, &mut rng);
            let v = random::random_element(sig, &spec, &mut rng);
            let w = random::random_element(sig, &spec, &mut rng);
            if &(&u * &v) * &w != &u * &(&v * &w) {
                assoc += 1;
            }
            let j = &(&u.bracket(&v.bracket(&w).unwrap()).unwrap()
                + &v.bracket(&w.bracket(&u).unwrap()).unwrap())
                + &w.bracket(&u.bracket(&v).unwrap()).unwrap();
            if !j.is_zero() {
                jacobi += 1;
            }
            let lhs = u.bracket(&(&v * &w)).unwrap();
            let rhs = &(&u.bracket(&v).unwrap() * &w) + &(&v * &u.bracket(&w).unwrap());
            if lhs != rhs {
                leibniz += 1;
            }
            let a = random::random_a_element(sig, &spec, &mut rng);
            let composed = act_on_a(&(&u * &v), &a).unwrap();
            let stepwise = act_on_a(&u, &act_on_a(&v, &a).unwrap()).unwrap();
            if composed != stepwise {
                oracle += 1;
            }
            if parse_element(sig, &u.to_string()).ok().as_ref() != Some(&u) {
                round_trip += 1;
            }
        }
        report(out, "associativity", sig, assoc);
        report(out, "jacobi", sig, jacobi);
        report(out, "leibniz", sig, leibniz);
        report(out, "operator-action", sig, oracle);
        report(out, "print-parse", sig, round_trip);
        let g = random::random_block_matrix(sig.field(), sig.l2(), sig.l3(), &mut rng);
        let image = weyl_algebra::algebra::Signature::new(
            sig.l1(),
            sig.l2(),
            sig.l3(),
            sig.gamma().apply(&g).expect("valid action"),
        )
        .expect("valid image");
        let failures = match build_sigma(&g, sig, &image) {
            Ok(sigma) => {
                let r = verify_sigma(&sigma, trials, seed).expect("source signature");
                r.multiplicative_failures + r.bracket_failures + r.extension_failures
            }
            Err(_) => trials,
        };
        report(out, "sigma", sig, failures);
    }
    all_ok
}

/// Runs one command line (including the program name) and returns the exit
/// code with the text to print.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    match dispatch(cli) {
        Ok(r) => r,
        Err(Failure(code, msg)) => (code, format!("error: {msg}\n")),
    }
}
