//! Command-line front end. Output is JSON or DOT on stdout; diagnostics go
//! to stderr.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::cert;
use crate::example1::{self, Ex1Error};
use crate::example2::{self, Ex2Error, Ex2Params};
use crate::quotients::{FiniteQuotient, QuotientError, QuotientRepr, DEFAULT_CAP};
use crate::report::Report;
use crate::separation::{
    separate_from_identity_seeded, separate_from_subgroup, SeparationError, StallingsGraph,
};
use crate::words::{Alphabet, FactorPartition};
use crate::Word;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "profree",
    version,
    about = "Free-group words, finite quotients and closedness certificates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Number of generators of the first free factor K.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Number of generators of the second free factor L.
    #[arg(long, global = true)]
    l: Option<usize>,
    /// Generator names, e.g. "a c | b d" (K names, then L names).
    #[arg(long, global = true)]
    alphabet: Option<String>,
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest number of group elements any enumeration may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Emit a DOT graph instead of JSON where one is available.
    #[arg(long, global = true)]
    dot: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum WitnessChoice {
    Discreteness,
    Intersection,
    NotClosed,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the reduced form of a word.
    Reduce { word: String },
    /// Image of a word in a finite quotient.
    Image {
        word: String,
        /// Quotient JSON, inline or as a file path.
        #[arg(long)]
        quotient: String,
    },
    /// Cayley distance of a word's image from the identity.
    Distance {
        word: String,
        #[arg(long)]
        quotient: String,
    },
    /// Folded subgroup graph of `--gens`.
    Stallings {
        /// Semicolon-separated generators.
        #[arg(long)]
        gens: String,
        /// Also test membership of this word.
        #[arg(long)]
        member: Option<String>,
    },
    /// Certificate that `--word` lies outside the subgroup `--gens`
    /// (outside the trivial subgroup when `--gens` is omitted).
    Separate {
        #[arg(long)]
        word: String,
        #[arg(long)]
        gens: Option<String>,
    },
    /// Re-check a separation certificate.
    SeparateVerify { file: String },
    /// Terms `a^(j!)`, `m_j` and `s_j` of the first example.
    Ex1Elem { j: u64 },
    /// Certificate that `--word` is not in the closure of S.
    Ex1Separate {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 0)]
        margin: u64,
    },
    /// Re-check a tail certificate.
    Ex1Verify { file: String },
    /// Point of S<b> in the kernel of `--quotient`.
    Ex1Witness {
        #[arg(long)]
        quotient: String,
    },
    /// Run the inductive construction of the second example.
    Ex2Construct {
        #[arg(long, default_value_t = 4)]
        steps: usize,
        /// Comma-separated f(1), ..., f(N); defaults to f(n) = n + 1.
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = example2::DEFAULT_MAX_CANDIDATES)]
        max_candidates: usize,
    },
    /// Re-check a certificate of the second example.
    Ex2Verify { file: String },
    /// Witnesses at step `--n`; with `--dot`, the Cayley ball of `Q_n`.
    Ex2Witness {
        file: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = WitnessChoice::NotClosed)]
        kind: WitnessChoice,
        /// The point `x` for the intersection witness.
        #[arg(long)]
        word: Option<String>,
    },
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn engine(message: impl ToString, cap: bool) -> Self {
        Failure {
            code: if cap { EXIT_CAP } else { EXIT_VERIFY_FAILED },
            message: message.to_string(),
        }
    }
}

impl From<QuotientError> for Failure {
    fn from(e: QuotientError) -> Self {
        let cap = matches!(e, QuotientError::CapExceeded(_));
        Failure::engine(e, cap)
    }
}

impl From<SeparationError> for Failure {
    fn from(e: SeparationError) -> Self {
        let cap = matches!(e, SeparationError::Quotient(QuotientError::CapExceeded(_)));
        Failure::engine(e, cap)
    }
}

impl From<Ex1Error> for Failure {
    fn from(e: Ex1Error) -> Self {
        let cap = matches!(
            e,
            Ex1Error::Quotient(QuotientError::CapExceeded(_))
                | Ex1Error::Separation(SeparationError::Quotient(QuotientError::CapExceeded(_)))
        );
        Failure::engine(e, cap)
    }
}

impl From<Ex2Error> for Failure {
    fn from(e: Ex2Error) -> Self {
        match e {
            Ex2Error::Params(_) | Ex2Error::StepOutOfRange(_) => Failure::usage(e),
            Ex2Error::RadiusTooLarge { .. } | Ex2Error::Quotient(QuotientError::CapExceeded(_)) => {
                Failure::engine(e, true)
            }
            _ => Failure::engine(e, false),
        }
    }
}

impl From<cert::CertError> for Failure {
    fn from(e: cert::CertError) -> Self {
        Failure::usage(e)
    }
}

fn alphabet_for(cli: &Cli, default: (usize, usize)) -> Result<Alphabet, Failure> {
    if let Some(spec) = &cli.alphabet {
        let al = Alphabet::parse_spec(spec).map_err(Failure::usage)?;
        let p = al.partition();
        if cli.k.is_some_and(|k| k != p.k_size()) || cli.l.is_some_and(|l| l != p.l_size()) {
            return Err(Failure::usage("--alphabet disagrees with --k/--l"));
        }
        return Ok(al);
    }
    let p = FactorPartition::new(cli.k.unwrap_or(default.0), cli.l.unwrap_or(default.1))
        .map_err(Failure::usage)?;
    Ok(Alphabet::default_for(p))
}

fn ex1_alphabet(cli: &Cli) -> Result<Alphabet, Failure> {
    let al = alphabet_for(cli, (1, 1))?;
    if al.partition() != example1::partition() {
        return Err(Failure::usage(
            "the first example lives in F = <a> * <b>; use --k 1 --l 1",
        ));
    }
    Ok(al)
}

fn parse_word(al: &Alphabet, text: &str) -> Result<Word, Failure> {
    al.parse(text).map_err(Failure::usage)
}

fn read_input(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::usage(format!("{arg}: {e}")))
    }
}

fn load_quotient(al: &Alphabet, arg: &str, cap: usize) -> Result<FiniteQuotient, Failure> {
    let repr: QuotientRepr = cert::parse_doc(&read_input(arg)?)?;
    FiniteQuotient::from_repr(&repr, al, cap).map_err(|e| Failure::usage(format!("quotient: {e}")))
}

fn emit_report(out: &mut dyn Write, r: &Report) -> Result<i32, Failure> {
    write_out(out, &cert::emit_report(r))?;
    Ok(if r.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::engine(format!("write failed: {e}"), false))
}

fn element_json(q: &FiniteQuotient, x: &crate::quotients::QuotientElement) -> serde_json::Value {
    let perms: Vec<Vec<u32>> = (0..q.perm_factors().len())
        .map(|i| q.factor_map(x, i))
        .collect();
    json!({
        "identity": q.is_identity(x),
        "residues": q.residues(x).map(|r| r.to_vec()).unwrap_or_default(),
        "perms": perms,
    })
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let cap = cli.cap;
    match &cli.cmd {
        Cmd::Reduce { word } => {
            let al = alphabet_for(cli, (1, 1))?;
            let w = parse_word(&al, word)?;
            write_out(out, &format!("{}\n", al.format(&w)))?;
        }
        Cmd::Image { word, quotient } => {
            let al = alphabet_for(cli, (1, 1))?;
            let w = parse_word(&al, word)?;
            let q = load_quotient(&al, quotient, cap)?;
            let x = q.image(&w)?;
            let doc = json!({ "word": al.format(&w), "image": element_json(&q, &x) });
            write_out(out, &cert::to_canonical_json(&doc))?;
        }
        Cmd::Distance { word, quotient } => {
            let al = alphabet_for(cli, (1, 1))?;
            let w = parse_word(&al, word)?;
            let q = load_quotient(&al, quotient, cap)?;
            let d = q.cayley_distance(&w)?;
            let doc = json!({ "word": al.format(&w), "distance": d });
            write_out(out, &cert::to_canonical_json(&doc))?;
        }
        Cmd::Stallings { gens, member } => {
            let al = alphabet_for(cli, (1, 1))?;
            let gens: Vec<Word> = al.parse_list(gens).map_err(Failure::usage)?;
            let g = StallingsGraph::build(&gens)?;
            if cli.dot {
                write_out(out, &g.to_dot(&al))?;
            } else {
                let edges: Vec<_> = g
                    .edges()
                    .map(|&(u, x, v)| json!([u, al.name(x), v]))
                    .collect();
                let mut doc = json!({
                    "gens": gens.iter().map(|w| al.format(w)).collect::<Vec<_>>(),
                    "vertices": g.vertex_count(),
                    "edges": edges,
                });
                if let Some(m) = member {
                    let w = parse_word(&al, m)?;
                    doc["member"] =
                        json!({ "word": al.format(&w), "in_subgroup": g.membership(&w) });
                }
                write_out(out, &cert::to_canonical_json(&doc))?;
            }
        }
        Cmd::Separate { word, gens } => {
            let al = alphabet_for(cli, (1, 1))?;
            let w = parse_word(&al, word)?;
            let c = match gens {
                Some(g) => {
                    let gens: Vec<Word> = al.parse_list(g).map_err(Failure::usage)?;
                    separate_from_subgroup(al.partition(), &gens, &w)?
                }
                None => separate_from_identity_seeded(al.partition(), &w, cli.seed)?,
            };
            write_out(out, &cert::emit_separation(&c, &al))?;
        }
        Cmd::SeparateVerify { file } => {
            let r = cert::verify_separation_json(&read_input(file)?, cap);
            return emit_report(out, &r);
        }
        Cmd::Ex1Elem { j } => {
            if *j == 0 {
                return Err(Failure::usage("j must be at least 1"));
            }
            let al = ex1_alphabet(cli)?;
            let doc = json!({
                "j": j,
                "factorial": example1::factorial(*j).to_string(),
                "m": example1::m_sequence(*j).to_string(),
                "a_element": al.format(&example1::a_element(*j)),
                "s_element": al.format(&example1::s_element(*j)),
            });
            write_out(out, &cert::to_canonical_json(&doc))?;
        }
        Cmd::Ex1Separate { word, margin } => {
            let al = ex1_alphabet(cli)?;
            let w = parse_word(&al, word)?;
            let c = example1::separate_from_s(&w, *margin)?;
            write_out(out, &cert::emit_ex1_tail(&c, &al))?;
        }
        Cmd::Ex1Verify { file } => {
            let (_, c) = cert::load_ex1_tail(&read_input(file)?, cap)?;
            return emit_report(out, &example1::verify_ex1(&c));
        }
        Cmd::Ex1Witness { quotient } => {
            let al = ex1_alphabet(cli)?;
            let q = load_quotient(&al, quotient, cap)?;
            let w = example1::not_closed_witness(&q)?;
            write_out(out, &cert::emit_ex1_witness(&w, &al))?;
        }
        Cmd::Ex2Construct {
            steps,
            f,
            max_candidates,
        } => {
            let al = alphabet_for(cli, (2, 2))?;
            let mut p = Ex2Params::new(al.partition(), *steps, cli.seed);
            if let Some(f) = f {
                p.f_values = f
                    .split(',')
                    .map(|t| t.trim().parse::<u64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| Failure::usage(format!("--f: {e}")))?;
            }
            p.cap = cap;
            p.max_candidates = *max_candidates;
            let c = example2::construct_ex2(&p)?;
            write_out(out, &cert::emit_ex2(&c, &al))?;
        }
        Cmd::Ex2Verify { file } => {
            let (_, c) = cert::load_ex2(&read_input(file)?, cap)?;
            return emit_report(out, &example2::verify_ex2(&c));
        }
        Cmd::Ex2Witness {
            file,
            n,
            kind,
            word,
        } => {
            let (al, c) = cert::load_ex2(&read_input(file)?, cap)?;
            if cli.dot {
                write_out(out, &example2::cayley_ball_dot(&c, *n, &al)?)?;
                return Ok(EXIT_OK);
            }
            let doc = match kind {
                WitnessChoice::Discreteness => {
                    let d = example2::discreteness_witness(&c, *n)?;
                    let doc = json!({
                        "n": d.n,
                        "members": d.members,
                        "flagged": d.flagged,
                    });
                    write_out(out, &cert::to_canonical_json(&doc))?;
                    return Ok(if d.flagged {
                        EXIT_VERIFY_FAILED
                    } else {
                        EXIT_OK
                    });
                }
                WitnessChoice::Intersection => {
                    let x = match word {
                        Some(w) => parse_word(&al, w)?,
                        None => return Err(Failure::usage("--word is required for this witness")),
                    };
                    let w = example2::finite_intersection_witness(&c, &x, *n)?;
                    let members: Vec<_> = w
                        .members
                        .iter()
                        .map(|m| {
                            json!({
                                "m": m.m,
                                "f_value": m.f_value,
                                "f_below_length": m.f_below_length,
                            })
                        })
                        .collect();
                    json!({
                        "n": w.n,
                        "x": al.format(&w.x),
                        "distance": w.distance,
                        "word_length": w.word_length.to_string(),
                        "distance_bounded": w.distance_bounded,
                        "members": members,
                    })
                }
                WitnessChoice::NotClosed => {
                    let (u, v) = example2::not_closed_witness2(&c, *n)?;
                    json!({
                        "n": n,
                        "u": al.format(&u),
                        "v": al.format(&v),
                        "product": al.format(&u.multiply(&v)),
                    })
                }
            };
            write_out(out, &cert::to_canonical_json(&doc))?;
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs one subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
