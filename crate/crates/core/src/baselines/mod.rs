//! Comparison rating systems: margin-scaled Elo, Glicko-2 and two-player
//! TrueSkill.

pub mod glicko2;
pub mod linear_mov;
pub mod trueskill;

pub use glicko2::{
    glicko2_update, glicko2_win_probability, Glicko2Config, Glicko2State, GLICKO2_SCALE,
};
pub use linear_mov::{linear_mov_update, LinearMovConfig};
pub use trueskill::{
    trueskill_two_team_update, trueskill_win_probability, TrueSkillConfig, TrueSkillState, Winner,
};
