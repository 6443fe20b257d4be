//! Replayable game certificates.
//!
//! A certificate is a line-oriented text document with a fixed header and
//! a body whose shape depends on the recorded winner:
//!
//! ```text
//! pebblepath-cert v1
//! game aio            # aio | dalmau | bij-aio
//! mode function       # aio only: function | relation
//! k 2
//! max-len 3           # omitted for unbounded aio and for dalmau
//! winner spoiler      # spoiler | duplicator
//!
//! move 1 u0           # one move per line (see below)
//! ```
//!
//! Body lines by game and winner:
//!
//! * Spoiler, `aio`: `move <pebble> <element-of-A>` per placement.
//! * Spoiler, `bij-aio`: `move <pebble> <element-of-A>` or `hide <pebble>`
//!   for the (at most one) hidden placement.
//! * Spoiler, `dalmau`: `domain <element-of-A>...` per round (a bare
//!   `domain` is the empty restriction).
//! * Duplicator, bounded `aio`: the full graph of the strategy's coKleisli
//!   map, `entry <play-encoding> <element-of-B>` per indexed play; the
//!   verifier rebuilds the map and re-checks it as a homomorphism of the
//!   lifted structures.
//! * Duplicator, any other game: the single line `strategy recompute`; the
//!   verifier re-runs the decision procedure and compares winners.
//!
//! Verification replays the body against the two structure files given on
//! the command line, so a certificate is only as good as the inputs it is
//! checked against.

use std::collections::{BTreeMap, BTreeSet};

use pebblepath::comonad::{encode_play, parse_play, CoKleisliMap, IndexedPlay, PebbleRelation};
use pebblepath::error::{Error, Result};
use pebblepath::games::{
    decide_all_in_one, decide_bijective_all_in_one, decide_set_valued, replay_all_in_one,
    replay_bijective, replay_set_valued, strategy_to_cokleisli, Certificate, GameVerdict, Winner,
};
use pebblepath::io::{names_are_encodable, names_are_plain};
use pebblepath::structure::{Element, HomMode, Structure};
use pebblepath::Pebble;

const HEADER: &str = "pebblepath-cert v1";

/// The game a certificate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Game {
    AllInOne,
    Dalmau,
    BijectiveAllInOne,
}

impl Game {
    fn token(self) -> &'static str {
        match self {
            Game::AllInOne => "aio",
            Game::Dalmau => "dalmau",
            Game::BijectiveAllInOne => "bij-aio",
        }
    }

    fn from_token(token: &str) -> Result<Self> {
        match token {
            "aio" => Ok(Game::AllInOne),
            "dalmau" => Ok(Game::Dalmau),
            "bij-aio" => Ok(Game::BijectiveAllInOne),
            other => Err(Error::ParseError(format!(
                "unknown game {other:?} (expected aio, dalmau, or bij-aio)"
            ))),
        }
    }
}

/// A parsed certificate: the header fields plus the untyped body lines
/// (element names are resolved only at verification time, against the
/// structures the caller supplies).
#[derive(Debug, Clone)]
pub struct CertFile {
    pub game: Game,
    pub mode: HomMode,
    pub k: usize,
    pub max_len: Option<usize>,
    pub winner: Winner,
    pub body: CertBody,
}

#[derive(Debug, Clone)]
pub enum CertBody {
    /// Spoiler placements; `None` is a hidden position (bij-aio only).
    Moves(Vec<(Pebble, Option<String>)>),
    /// Spoiler domain restrictions (dalmau), as element names per round.
    Domains(Vec<Vec<String>>),
    /// A Duplicator coKleisli graph for the bounded all-in-one game.
    Entries(Vec<(String, String)>),
    /// A Duplicator marker: re-run the decision procedure to check.
    Recompute,
}

fn mode_token(mode: HomMode) -> &'static str {
    match mode {
        HomMode::Function => "function",
        HomMode::Relation => "relation",
    }
}

fn mode_from_token(token: &str) -> Result<HomMode> {
    match token {
        "function" => Ok(HomMode::Function),
        "relation" => Ok(HomMode::Relation),
        other => Err(Error::ParseError(format!(
            "unknown mode {other:?} (expected function or relation)"
        ))),
    }
}

/// The pair of structures the mode's morphisms live over: function mode
/// adjoins the identity relation on both sides.
fn mode_pair(a: &Structure, b: &Structure, mode: HomMode) -> Result<(Structure, Structure)> {
    match mode {
        HomMode::Function => Ok((a.j_expand()?, b.j_expand()?)),
        HomMode::Relation => Ok((a.clone(), b.clone())),
    }
}

/// Renders a freshly decided verdict as certificate text.
pub fn certificate_text(
    game: Game,
    mode: HomMode,
    k: usize,
    max_len: Option<usize>,
    a: &Structure,
    b: &Structure,
    verdict: &GameVerdict,
) -> Result<String> {
    let mut lines = vec![HEADER.to_string(), format!("game {}", game.token())];
    if game == Game::AllInOne {
        lines.push(format!("mode {}", mode_token(mode)));
    }
    lines.push(format!("k {k}"));
    if let Some(n) = max_len {
        lines.push(format!("max-len {n}"));
    }
    let winner = match verdict.winner {
        Winner::Spoiler => "spoiler",
        Winner::Duplicator => "duplicator",
    };
    lines.push(format!("winner {winner}"));
    lines.push(String::new());

    match &verdict.certificate {
        Certificate::SpoilerWord { moves } => {
            names_are_plain(a)?;
            for &(p, e) in moves {
                match e {
                    Some(e) => lines.push(format!("move {p} {}", a.element_name(e))),
                    None => lines.push(format!("hide {p}")),
                }
            }
        }
        Certificate::SpoilerDomains { domains } => {
            names_are_plain(a)?;
            for domain in domains {
                let mut line = String::from("domain");
                for &e in domain {
                    line.push(' ');
                    line.push_str(a.element_name(e));
                }
                lines.push(line);
            }
        }
        Certificate::Duplicator(_) => match (game, max_len) {
            (Game::AllInOne, Some(n)) => {
                names_are_encodable(a)?;
                names_are_plain(b)?;
                let map = strategy_to_cokleisli(a, b, k, n, mode, verdict)?;
                for (play, value) in map.entries() {
                    lines.push(format!(
                        "entry {} {}",
                        encode_play(play, a),
                        b.element_name(value)
                    ));
                }
            }
            _ => lines.push("strategy recompute".to_string()),
        },
    }

    lines.push(String::new());
    Ok(lines.join("\n"))
}

/// Parses certificate text. Header order is fixed; blank lines around the
/// body are ignored.
pub fn parse_certificate(text: &str) -> Result<CertFile> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let err = |msg: String| Error::ParseError(format!("certificate: {msg}"));

    let first = lines.next().ok_or_else(|| err("empty file".into()))?;
    if first != HEADER {
        return Err(err(format!("expected header {HEADER:?}, found {first:?}")));
    }

    let mut game: Option<Game> = None;
    let mut mode = HomMode::Function;
    let mut k: Option<usize> = None;
    let mut max_len: Option<usize> = None;
    let mut winner: Option<Winner> = None;
    let mut body_lines: Vec<Vec<String>> = Vec::new();

    for line in lines {
        let fields: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if winner.is_some() {
            body_lines.push(fields);
            continue;
        }
        let (key, rest) = fields.split_first().expect("non-empty line");
        match key.as_str() {
            "game" => {
                let [token] = rest else {
                    return Err(err(format!("malformed game line {line:?}")));
                };
                game = Some(Game::from_token(token)?);
            }
            "mode" => {
                let [token] = rest else {
                    return Err(err(format!("malformed mode line {line:?}")));
                };
                mode = mode_from_token(token)?;
            }
            "k" => {
                let [token] = rest else {
                    return Err(err(format!("malformed k line {line:?}")));
                };
                k = Some(parse_count(token, "k")?);
            }
            "max-len" => {
                let [token] = rest else {
                    return Err(err(format!("malformed max-len line {line:?}")));
                };
                max_len = Some(parse_count(token, "max-len")?);
            }
            "winner" => {
                let [token] = rest else {
                    return Err(err(format!("malformed winner line {line:?}")));
                };
                winner = Some(match token.as_str() {
                    "spoiler" => Winner::Spoiler,
                    "duplicator" => Winner::Duplicator,
                    other => {
                        return Err(err(format!(
                            "unknown winner {other:?} (expected spoiler or duplicator)"
                        )))
                    }
                });
            }
            other => {
                return Err(err(format!(
                    "unexpected header line starting with {other:?} (winner not yet declared)"
                )))
            }
        }
    }

    let game = game.ok_or_else(|| err("missing game line".into()))?;
    let k = k.ok_or_else(|| err("missing k line".into()))?;
    let winner = winner.ok_or_else(|| err("missing winner line".into()))?;
    let body = parse_body(game, winner, &body_lines)?;
    Ok(CertFile {
        game,
        mode,
        k,
        max_len,
        winner,
        body,
    })
}

fn parse_count(token: &str, what: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::ParseError(format!("certificate: {what} value {token:?} is not a number")))
}

fn parse_body(game: Game, winner: Winner, lines: &[Vec<String>]) -> Result<CertBody> {
    let err = |msg: String| Error::ParseError(format!("certificate: {msg}"));
    match winner {
        Winner::Spoiler => match game {
            Game::AllInOne | Game::BijectiveAllInOne => {
                let mut moves = Vec::new();
                for fields in lines {
                    match (fields[0].as_str(), &fields[1..]) {
                        ("move", [p, name]) => {
                            moves.push((parse_count(p, "pebble")?, Some(name.clone())));
                        }
                        ("hide", [p]) if game == Game::BijectiveAllInOne => {
                            moves.push((parse_count(p, "pebble")?, None));
                        }
                        _ => {
                            return Err(err(format!(
                                "unexpected body line {:?} in a Spoiler word",
                                fields.join(" ")
                            )))
                        }
                    }
                }
                Ok(CertBody::Moves(moves))
            }
            Game::Dalmau => {
                let mut domains = Vec::new();
                for fields in lines {
                    if fields[0] != "domain" {
                        return Err(err(format!(
                            "unexpected body line {:?} in a domain sequence",
                            fields.join(" ")
                        )));
                    }
                    domains.push(fields[1..].to_vec());
                }
                Ok(CertBody::Domains(domains))
            }
        },
        Winner::Duplicator => {
            if lines.len() == 1 && lines[0] == ["strategy", "recompute"] {
                return Ok(CertBody::Recompute);
            }
            let mut entries = Vec::new();
            for fields in lines {
                match (fields[0].as_str(), &fields[1..]) {
                    ("entry", [encoding, name]) => {
                        entries.push((encoding.clone(), name.clone()));
                    }
                    _ => {
                        return Err(err(format!(
                            "unexpected body line {:?} in a Duplicator certificate",
                            fields.join(" ")
                        )))
                    }
                }
            }
            if entries.is_empty() {
                return Err(err(
                    "a Duplicator certificate needs entry lines or `strategy recompute`".into(),
                ));
            }
            Ok(CertBody::Entries(entries))
        }
    }
}

fn resolve(a: &Structure, name: &str, side: &str) -> Result<Element> {
    a.element_by_name(name).ok_or_else(|| {
        Error::ParseError(format!(
            "certificate names element {name:?}, which structure {side} does not have"
        ))
    })
}

/// Replays a certificate against the given structures. `Ok(())` means the
/// recorded winner genuinely wins the recorded game on these inputs.
pub fn verify_certificate(cert: &CertFile, a: &Structure, b: &Structure) -> Result<()> {
    let fail = |msg: String| Error::Precondition(format!("certificate check failed: {msg}"));
    match (&cert.body, cert.game) {
        (CertBody::Moves(moves), Game::AllInOne) => {
            let mut word: Vec<(Pebble, Element)> = Vec::with_capacity(moves.len());
            for (p, name) in moves {
                let name = name.as_ref().ok_or_else(|| {
                    fail("the all-in-one game has no hidden positions".into())
                })?;
                word.push((*p, resolve(a, name, "A")?));
            }
            if replay_all_in_one(a, b, cert.k, cert.mode, cert.max_len, &word)? {
                Ok(())
            } else {
                Err(fail("the recorded word does not defeat every response".into()))
            }
        }
        (CertBody::Moves(moves), Game::BijectiveAllInOne) => {
            let n = cert
                .max_len
                .ok_or_else(|| fail("bij-aio certificates need a max-len header".into()))?;
            if moves.len() > n {
                return Err(fail(format!(
                    "the recorded word has {} moves, over the bound {n}",
                    moves.len()
                )));
            }
            let mut word: Vec<(Pebble, Option<Element>)> = Vec::with_capacity(moves.len());
            for (p, name) in moves {
                let e = match name {
                    Some(name) => Some(resolve(a, name, "A")?),
                    None => None,
                };
                word.push((*p, e));
            }
            if replay_bijective(a, b, cert.k, &word)? {
                Ok(())
            } else {
                Err(fail("the recorded word does not defeat every response".into()))
            }
        }
        (CertBody::Domains(domains), Game::Dalmau) => {
            let mut rounds: Vec<BTreeSet<Element>> = Vec::with_capacity(domains.len());
            for domain in domains {
                let mut set = BTreeSet::new();
                for name in domain {
                    set.insert(resolve(a, name, "A")?);
                }
                rounds.push(set);
            }
            if replay_set_valued(a, b, cert.k, &rounds)? {
                Ok(())
            } else {
                Err(fail(
                    "the recorded domain sequence does not defeat every response".into(),
                ))
            }
        }
        (CertBody::Entries(raw), Game::AllInOne) => {
            let n = cert.max_len.ok_or_else(|| {
                fail("entry certificates exist only for the bounded game; max-len is missing".into())
            })?;
            let (base_a, base_b) = mode_pair(a, b, cert.mode)?;
            let pr = PebbleRelation::build(&base_a, cert.k, n)?;
            let mut entries: BTreeMap<IndexedPlay<Element>, Element> = BTreeMap::new();
            for (encoding, name) in raw {
                let play = parse_play(encoding, a, cert.k)?;
                let value = resolve(b, name, "B")?;
                if entries.insert(play, value).is_some() {
                    return Err(fail(format!("duplicate entry for play {encoding:?}")));
                }
            }
            let map = CoKleisliMap::from_entries(&pr, entries)?;
            if map.is_morphism(&pr, &base_b) {
                Ok(())
            } else {
                Err(fail(
                    "the recorded map is not a homomorphism of the lifted structures".into(),
                ))
            }
        }
        (CertBody::Entries(_), _) => Err(fail(
            "entry certificates exist only for the all-in-one game".into(),
        )),
        (CertBody::Moves(_), Game::Dalmau) | (CertBody::Domains(_), _) => Err(fail(
            "the body lines do not belong to the recorded game".into(),
        )),
        (CertBody::Recompute, game) => {
            let verdict = match game {
                Game::AllInOne => decide_all_in_one(a, b, cert.k, cert.mode, cert.max_len)?,
                Game::Dalmau => decide_set_valued(a, b, cert.k)?,
                Game::BijectiveAllInOne => {
                    let n = cert.max_len.ok_or_else(|| {
                        fail("bij-aio certificates need a max-len header".into())
                    })?;
                    decide_bijective_all_in_one(a, b, cert.k, n)?
                }
            };
            if verdict.winner == Winner::Duplicator {
                Ok(())
            } else {
                Err(fail(
                    "re-deciding the game gives the win to the Spoiler".into(),
                ))
            }
        }
    }
}
