//! Game records, one JSON object per line.

use serde::{Deserialize, Serialize};

use super::{from_notation, to_notation, Action, GameState, HexError, Player};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub board_size: usize,
    pub moves: Vec<String>,
    /// +1 if Black won, -1 if White won.
    pub result: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_policies: Option<Vec<Vec<f32>>>,
    /// Root value estimate before each move, from the mover's perspective.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_values: Option<Vec<f32>>,
    /// Set when the game ended by resignation rather than a connection.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub resigned: bool,
    /// Whether resignation was permitted in this game.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resign_enabled: Option<bool>,
}

impl GameRecord {
    pub fn new(board_size: usize, moves: &[Action], winner: Player) -> GameRecord {
        GameRecord {
            board_size,
            moves: moves.iter().map(|&a| to_notation(a, board_size)).collect(),
            result: winner.reward(),
            search_policies: None,
            root_values: None,
            resigned: false,
            resign_enabled: None,
        }
    }

    pub fn winner(&self) -> Result<Player, HexError> {
        Player::from_reward(self.result).ok_or(HexError::Record(format!("result {}", self.result)))
    }

    pub fn actions(&self) -> Result<Vec<Action>, HexError> {
        self.moves
            .iter()
            .map(|m| from_notation(m, self.board_size))
            .collect()
    }

    /// Replays the move list and checks that it reaches the recorded result:
    /// a connection for the winner, or a live position for resigned games.
    pub fn replay(&self) -> Result<GameState, HexError> {
        let mut state = GameState::new(self.board_size)?;
        for action in self.actions()? {
            state.play(action)?;
        }
        let winner = self.winner()?;
        match (self.resigned, state.winner()) {
            (false, Some(w)) if w == winner => Ok(state),
            (true, None) if state.to_move() != winner => Ok(state),
            _ => Err(HexError::Record(format!(
                "replay ends with winner {:?}, record says {} (resigned: {})",
                state.winner(),
                winner,
                self.resigned
            ))),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_line(line: &str) -> Result<GameRecord, HexError> {
        serde_json::from_str(line).map_err(|e| HexError::Record(e.to_string()))
    }
}

pub fn read_records(text: &str) -> Result<Vec<GameRecord>, HexError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(GameRecord::from_line)
        .collect()
}
