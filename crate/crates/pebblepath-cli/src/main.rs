//! `pebblepath` — command-line front end for the pebblepath library.
//!
//! Subcommands:
//!
//! * `build-pr`     materialize the bounded pebble-relation lifting of a structure
//! * `pathwidth`    exact pathwidth with an optional path-decomposition certificate
//! * `decide`       decide a two-structure pebble game and write a replayable certificate
//! * `verify-cert`  re-check a certificate against two structure files
//! * `model-check`  evaluate a formula file on a structure under an assignment
//! * `lovasz`       compare homomorphism counts from all pathwidth-bounded probes
//!
//! Structures travel as the JSON documents of the library's text format;
//! everything else (decompositions, certificates, formulas, vectors) is
//! line-oriented text.

mod cert;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pebblepath::comonad::{PebbleRelation, DEFAULT_CARRIER_BUDGET};
use pebblepath::error::{Error, Result};
use pebblepath::games::{
    decide_all_in_one, decide_bijective_all_in_one, decide_set_valued, Winner,
};
use pebblepath::homcount::{canonical_key, enumerate_pw_structures, hom_vector, HomEquivalence};
use pebblepath::io::{names_are_encodable, pd_to_string, structure_from_str, structure_to_string};
use pebblepath::logic::{formula_from_str, model_check, Assignment};
use pebblepath::structure::{HomMode, Structure};
use pebblepath::{hom_equivalence, pathwidth_exact};

use cert::{certificate_text, parse_certificate, verify_certificate, Game};

#[derive(Parser)]
#[command(name = "pebblepath", version)]
#[command(about = "Pebble-relation liftings, pathwidth, pebble games, counting logics, and homomorphism-count comparison on finite relational structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize the lifting PR[k, n] of a structure as a structure file.
    ///
    /// Carrier points are indexed plays; their element names use the play
    /// encoding `pebble:element;...@index`, e.g. "1:0;2:1@2".
    BuildPr {
        /// Number of pebbles (at least 1).
        #[arg(long)]
        k: usize,
        /// Maximum play length (at least 1).
        #[arg(long)]
        n: usize,
        /// Input structure file.
        #[arg(long = "in", value_name = "A.struct")]
        input: PathBuf,
        /// Output file for the lifted structure.
        #[arg(long, value_name = "PR.struct")]
        out: PathBuf,
        /// Carrier budget in points; the build refuses cleanly above it.
        #[arg(long, default_value_t = DEFAULT_CARRIER_BUDGET)]
        budget: usize,
    },
    /// Compute the exact pathwidth of a structure's Gaifman graph.
    Pathwidth {
        /// Input structure file.
        #[arg(long = "in", value_name = "A.struct")]
        input: PathBuf,
        /// Also write an optimal path decomposition to this file.
        #[arg(long, value_name = "pd.out")]
        certificate: Option<PathBuf>,
    },
    /// Decide a pebble game between two structures and write a certificate.
    Decide {
        /// Which game to play.
        #[arg(long, value_enum)]
        game: GameArg,
        /// Number of pebbles (at least 1).
        #[arg(long)]
        k: usize,
        /// Length bound: optional for aio, required for bij-aio,
        /// meaningless for dalmau.
        #[arg(long = "max-len", value_name = "N")]
        max_len: Option<usize>,
        /// Partial-map discipline for the aio game.
        #[arg(long, value_enum, default_value_t = ModeArg::Function)]
        mode: ModeArg,
        /// First structure file (Spoiler's side).
        #[arg(long, value_name = "A.struct")]
        a: PathBuf,
        /// Second structure file (Duplicator's side).
        #[arg(long, value_name = "B.struct")]
        b: PathBuf,
        /// Output certificate file.
        #[arg(long, value_name = "out.cert")]
        cert: PathBuf,
    },
    /// Re-check a certificate written by `decide`.
    VerifyCert {
        /// Certificate file.
        #[arg(long, value_name = "file.cert")]
        cert: PathBuf,
        /// First structure file.
        #[arg(long, value_name = "A.struct")]
        a: PathBuf,
        /// Second structure file.
        #[arg(long, value_name = "B.struct")]
        b: PathBuf,
    },
    /// Evaluate a formula on a structure; prints `true` or `false`.
    ModelCheck {
        /// Input structure file.
        #[arg(long = "in", value_name = "A.struct")]
        input: PathBuf,
        /// Formula file (s-expression text).
        #[arg(long, value_name = "f.fml")]
        formula: PathBuf,
        /// Bind a free variable, e.g. `x1=a` (repeatable).
        #[arg(long = "assign", value_name = "xN=elem")]
        assigns: Vec<String>,
    },
    /// Compare homomorphism counts into two structures from every probe
    /// of pathwidth less than k and size at most M.
    Lovasz {
        /// Number of pebbles; probes have pathwidth < k.
        #[arg(long)]
        k: usize,
        /// Largest probe size.
        #[arg(long = "max-size", value_name = "M")]
        max_size: usize,
        /// First structure file.
        #[arg(long, value_name = "A.struct")]
        a: PathBuf,
        /// Second structure file.
        #[arg(long, value_name = "B.struct")]
        b: PathBuf,
        /// Also write the two count vectors as tab-separated text:
        /// canonical probe id, count in A, count in B.
        #[arg(long = "emit-vector", value_name = "vec.tsv")]
        emit_vector: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GameArg {
    /// All-in-one pebble game (Spoiler commits to a whole word).
    Aio,
    /// Set-valued pebble-relation game (Spoiler restricts domains).
    Dalmau,
    /// Bijective all-in-one game (length bound required).
    BijAio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Responses must be single-valued partial homomorphisms.
    Function,
    /// Responses may relate one element to several.
    Relation,
}

impl From<ModeArg> for HomMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Function => HomMode::Function,
            ModeArg::Relation => HomMode::Relation,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::ParseError(format!("reading {}: {e}", path.display())))
}

fn write_string(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::ParseError(format!("writing {}: {e}", path.display())))
}

fn load_structure(path: &Path) -> Result<Structure> {
    structure_from_str(&read_to_string(path)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildPr {
            k,
            n,
            input,
            out,
            budget,
        } => {
            let a = load_structure(&input)?;
            names_are_encodable(&a)?;
            let pr = PebbleRelation::build_with_budget(&a, k, n, budget)?;
            let lifted = pr.as_structure();
            write_string(&out, &structure_to_string(lifted))?;
            println!(
                "PR[{k}, {n}] of {}: {} carrier points, written to {}",
                input.display(),
                lifted.size(),
                out.display()
            );
            Ok(())
        }
        Command::Pathwidth { input, certificate } => {
            let a = load_structure(&input)?;
            let (width, pd) = pathwidth_exact(&a)?;
            println!("pathwidth {width}");
            if let Some(path) = certificate {
                write_string(&path, &pd_to_string(&a, &pd)?)?;
                println!("decomposition written to {}", path.display());
            }
            Ok(())
        }
        Command::Decide {
            game,
            k,
            max_len,
            mode,
            a,
            b,
            cert,
        } => {
            let sa = load_structure(&a)?;
            let sb = load_structure(&b)?;
            let mode = HomMode::from(mode);
            let (game, verdict) = match game {
                GameArg::Aio => (
                    Game::AllInOne,
                    decide_all_in_one(&sa, &sb, k, mode, max_len)?,
                ),
                GameArg::Dalmau => {
                    if max_len.is_some() {
                        return Err(Error::Precondition(
                            "the set-valued game has no length bound; drop --max-len".into(),
                        ));
                    }
                    (Game::Dalmau, decide_set_valued(&sa, &sb, k)?)
                }
                GameArg::BijAio => {
                    let n = max_len.ok_or_else(|| {
                        Error::Precondition(
                            "the bijective game is decided up to a bound; pass --max-len".into(),
                        )
                    })?;
                    (
                        Game::BijectiveAllInOne,
                        decide_bijective_all_in_one(&sa, &sb, k, n)?,
                    )
                }
            };
            let text = certificate_text(game, mode, k, max_len, &sa, &sb, &verdict)?;
            write_string(&cert, &text)?;
            let winner = match verdict.winner {
                Winner::Spoiler => "spoiler",
                Winner::Duplicator => "duplicator",
            };
            println!("winner: {winner}");
            println!("certificate written to {}", cert.display());
            Ok(())
        }
        Command::VerifyCert { cert, a, b } => {
            let parsed = parse_certificate(&read_to_string(&cert)?)?;
            let sa = load_structure(&a)?;
            let sb = load_structure(&b)?;
            verify_certificate(&parsed, &sa, &sb)?;
            let winner = match parsed.winner {
                Winner::Spoiler => "spoiler",
                Winner::Duplicator => "duplicator",
            };
            println!(
                "certificate valid: {winner} wins the {} game with k={}{}",
                match parsed.game {
                    Game::AllInOne => "aio",
                    Game::Dalmau => "dalmau",
                    Game::BijectiveAllInOne => "bij-aio",
                },
                parsed.k,
                match parsed.max_len {
                    Some(n) => format!(", max-len={n}"),
                    None => String::new(),
                }
            );
            Ok(())
        }
        Command::ModelCheck {
            input,
            formula,
            assigns,
        } => {
            let a = load_structure(&input)?;
            let f = formula_from_str(&read_to_string(&formula)?)?;
            let asg = parse_assignment(&a, &assigns)?;
            let holds = model_check(&a, &asg, &f)?;
            println!("{holds}");
            Ok(())
        }
        Command::Lovasz {
            k,
            max_size,
            a,
            b,
            emit_vector,
        } => {
            let sa = load_structure(&a)?;
            let sb = load_structure(&b)?;
            if let Some(path) = emit_vector {
                if sa.signature() != sb.signature() {
                    return Err(Error::Precondition(
                        "structures have different signatures".into(),
                    ));
                }
                let probes = enumerate_pw_structures(sa.signature(), k, max_size)?;
                let in_a = hom_vector(&probes, &sa)?;
                let in_b = hom_vector(&probes, &sb)?;
                let mut lines = Vec::with_capacity(probes.len());
                let mut verdict = None;
                for (((c, pd), ca), cb) in probes.iter().zip(&in_a).zip(&in_b) {
                    lines.push(format!("{}\t{ca}\t{cb}", canonical_key(c)));
                    if verdict.is_none() && ca != cb {
                        verdict = Some(HomEquivalence::Distinguished {
                            witness: c.clone(),
                            witness_pd: pd.clone(),
                            count_a: ca.clone(),
                            count_b: cb.clone(),
                        });
                    }
                }
                lines.push(String::new());
                write_string(&path, &lines.join("\n"))?;
                println!(
                    "{} probe counts written to {}",
                    probes.len(),
                    path.display()
                );
                report_equivalence(
                    k,
                    max_size,
                    &verdict.unwrap_or(HomEquivalence::EquivalentUpTo { k, max_size }),
                );
            } else {
                report_equivalence(k, max_size, &hom_equivalence(&sa, &sb, k, max_size)?);
            }
            Ok(())
        }
    }
}

fn report_equivalence(k: usize, max_size: usize, verdict: &HomEquivalence) {
    match verdict {
        HomEquivalence::EquivalentUpTo { .. } => {
            println!(
                "equivalent: all probes of pathwidth < {k} and size <= {max_size} count alike"
            );
        }
        HomEquivalence::Distinguished {
            witness,
            count_a,
            count_b,
            ..
        } => {
            println!("distinguished by probe {}", canonical_key(witness));
            println!("count in A: {count_a}");
            println!("count in B: {count_b}");
        }
    }
}

/// Parses repeated `xN=element-name` bindings against a structure.
fn parse_assignment(a: &Structure, assigns: &[String]) -> Result<Assignment> {
    let mut asg: Assignment = BTreeMap::new();
    for raw in assigns {
        let (var, name) = raw.split_once('=').ok_or_else(|| {
            Error::ParseError(format!("assignment {raw:?} is not of the form xN=element"))
        })?;
        let index: usize = var
            .strip_prefix('x')
            .and_then(|digits| digits.parse().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| {
                Error::ParseError(format!(
                    "assignment variable {var:?} is not of the form xN with N >= 1"
                ))
            })?;
        let element = a.element_by_name(name).ok_or_else(|| {
            Error::ParseError(format!(
                "assignment names element {name:?}, which the structure does not have"
            ))
        })?;
        if asg.insert(index, element).is_some() {
            return Err(Error::ParseError(format!("variable {var} is bound twice")));
        }
    }
    Ok(asg)
}
