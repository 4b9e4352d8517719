//! Game files: a JSON document with `actions`, `states`, `sender_utility`,
//! `receiver_utility` and `prior`. Numbers are integers or `"p/q"` strings;
//! floating-point literals are rejected so nothing is rounded on the way in.

use expost_core::model::{Belief, Game, ModelError};
use expost_core::rational::{format_rational, parse_rational, Rational};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid game: {0}")]
    Invariant(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGameFile {
    actions: Vec<String>,
    states: Vec<String>,
    sender_utility: Vec<Vec<Value>>,
    receiver_utility: Vec<Vec<Value>>,
    prior: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameFile {
    pub game: Game,
    pub prior: Belief,
}

fn number(value: &Value, key: &str) -> Result<Rational, LoadError> {
    match value {
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string())
            .map_err(|e| LoadError::Parse(format!("{key}: {e}"))),
        Value::Number(n) => Err(LoadError::Parse(format!(
            "{key}: floating-point number {n} is not accepted, write it as a \"p/q\" string"
        ))),
        Value::String(s) => parse_rational(s).map_err(|e| LoadError::Parse(format!("{key}: {e}"))),
        other => Err(LoadError::Parse(format!("{key}: expected a number, found {other}"))),
    }
}

fn matrix(rows: &[Vec<Value>], key: &str) -> Result<Vec<Vec<Rational>>, LoadError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(k, x)| number(x, &format!("{key}[{i}][{k}]")))
                .collect()
        })
        .collect()
}

fn invariant(err: ModelError) -> LoadError {
    let key = match &err {
        ModelError::NoActions => "actions",
        ModelError::NoStates => "states",
        ModelError::RowCount { matrix, .. } | ModelError::RowLength { matrix, .. } => {
            if matrix.starts_with("sender") {
                "sender_utility"
            } else {
                "receiver_utility"
            }
        }
        _ => "prior",
    };
    LoadError::Invariant(format!("{key}: {err}"))
}

pub fn parse_game_file(text: &str) -> Result<GameFile, LoadError> {
    let raw: RawGameFile = serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
    let sender = matrix(&raw.sender_utility, "sender_utility")?;
    let receiver = matrix(&raw.receiver_utility, "receiver_utility")?;
    let prior: Vec<Rational> = raw
        .prior
        .iter()
        .enumerate()
        .map(|(k, x)| number(x, &format!("prior[{k}]")))
        .collect::<Result<_, _>>()?;
    let game = Game::new(raw.actions, raw.states, sender, receiver).map_err(invariant)?;
    let prior = Belief::for_game(prior, &game).map_err(invariant)?;
    Ok(GameFile { game, prior })
}

pub fn read_game_file(path: &std::path::Path) -> Result<GameFile, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_game_file(&text)
}

/// Integers that fit in 64 bits stay JSON numbers; everything else is a
/// `"p/q"` string.
pub fn rational_value(x: &Rational) -> Value {
    match x.is_integer().then(|| x.numer().to_i64()).flatten() {
        Some(n) => Value::from(n),
        None => Value::from(format_rational(x)),
    }
}

pub fn serialize_game_file(file: &GameFile) -> String {
    let rows = |m: &[Vec<Rational>]| m.iter().map(|r| r.iter().map(rational_value).collect()).collect();
    let raw = RawGameFile {
        actions: file.game.actions().to_vec(),
        states: file.game.states().to_vec(),
        sender_utility: rows(file.game.sender()),
        receiver_utility: rows(file.game.receiver()),
        prior: file.prior.probabilities().iter().map(rational_value).collect(),
    };
    serde_json::to_string_pretty(&raw).expect("game files always serialize")
}
