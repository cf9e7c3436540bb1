//! File formats: games CSV, parameter and report JSON, logs, run
//! configuration and human-facing tables.

pub mod config;
pub mod files;
pub mod games;
pub mod table;

pub use config::RunConfig;
pub use files::{
    history_to_csv, log_to_csv, read_json, read_params, to_json, write_atomic, write_json,
    write_params, ParamsFile,
};
pub use games::{games_to_csv, load_games, read_games, LoadOptions};
pub use table::{markdown_table, sig6};
