//! Command-line front end for `expost-core`: reads game files, runs the
//! solvers and prints exact results.

pub mod commands;
pub mod gamefile;

pub use commands::{run, Cli, Command, Mode};
pub use gamefile::{parse_game_file, read_game_file, serialize_game_file, GameFile, LoadError};
