//! Games CSV ingestion and export.

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use log::info;

use crate::error::{MovdaError, Result};
use crate::replay::GameRecord;

const REQUIRED: [&str; 7] = [
    "game_id",
    "date",
    "season",
    "home_team",
    "away_team",
    "home_score",
    "away_score",
];
const NEUTRAL: &str = "neutral_site";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Accept level scores. Off for basketball, where games cannot tie.
    pub allow_ties: bool,
}

/// Read, validate and date-sort a games CSV. Games on the same date keep
/// their file order.
pub fn load_games(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Vec<GameRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| MovdaError::io(path, e))?;
    let games = read_games(file, opts)?;
    info!("loaded {} games from {}", games.len(), path.display());
    Ok(games)
}

pub fn read_games(reader: impl Read, opts: &LoadOptions) -> Result<Vec<GameRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = col(name).ok_or_else(|| MovdaError::Schema {
            row: 1,
            column: name.to_string(),
            reason: "required column missing from header".into(),
        })?;
    }
    let neutral_idx = col(NEUTRAL);

    let mut games = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        // line 1 is the header
        let row = i + 2;
        let rec = rec?;
        let field = |c: usize, name: &str| -> Result<&str> {
            match rec.get(c) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(MovdaError::Schema {
                    row,
                    column: name.to_string(),
                    reason: "empty value".into(),
                }),
            }
        };
        let score = |c: usize, name: &str| -> Result<u32> {
            field(c, name)?
                .parse::<u32>()
                .map_err(|_| MovdaError::Schema {
                    row,
                    column: name.to_string(),
                    reason: "not a non-negative integer".into(),
                })
        };
        let date_text = field(idx[1], "date")?;
        let date =
            NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|_| MovdaError::Schema {
                row,
                column: "date".into(),
                reason: format!("`{date_text}` is not a yyyy-mm-dd date"),
            })?;
        let neutral_site = match neutral_idx.map(|c| rec.get(c).unwrap_or("")) {
            None | Some("") | Some("0") => false,
            Some("1") => true,
            Some(other) => {
                return Err(MovdaError::Schema {
                    row,
                    column: NEUTRAL.into(),
                    reason: format!("expected 0 or 1, got `{other}`"),
                })
            }
        };
        let game = GameRecord {
            game_id: field(idx[0], "game_id")?.to_string(),
            date,
            season: field(idx[2], "season")?.to_string(),
            home_team: field(idx[3], "home_team")?.to_string(),
            away_team: field(idx[4], "away_team")?.to_string(),
            home_score: score(idx[5], "home_score")?,
            away_score: score(idx[6], "away_score")?,
            neutral_site,
        };
        game.validate(opts.allow_ties).map_err(|e| match e {
            MovdaError::DataIntegrity { game_id, reason } => MovdaError::DataIntegrity {
                game_id,
                reason: format!("row {row}: {reason}"),
            },
            other => other,
        })?;
        if !seen.insert(game.game_id.clone()) {
            return Err(MovdaError::DataIntegrity {
                game_id: game.game_id,
                reason: format!("row {row}: duplicate game id"),
            });
        }
        games.push(game);
    }

    if games.windows(2).any(|w| w[1].date < w[0].date) {
        info!("input is not in date order; sorting by date and keeping file order within a day");
        games.sort_by_key(|g| g.date);
    }
    Ok(games)
}

/// Games as CSV text in the ingestion schema, `neutral_site` included.
pub fn games_to_csv(games: &[GameRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = REQUIRED.to_vec();
    header.push(NEUTRAL);
    w.write_record(&header)?;
    for g in games {
        w.write_record([
            g.game_id.as_str(),
            &g.date.format("%Y-%m-%d").to_string(),
            &g.season,
            &g.home_team,
            &g.away_team,
            &g.home_score.to_string(),
            &g.away_score.to_string(),
            if g.neutral_site { "1" } else { "0" },
        ])?;
    }
    w.into_inner()
        .map_err(|e| MovdaError::Numerical(e.to_string()))
}
