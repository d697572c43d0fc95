use rand::Rng;

use crate::hex::{GameRecord, GameState};
use crate::search::{search_with, select_action, Evaluator, SelectMode};
use crate::Net;

use super::config::ExitConfig;
use super::resign::ResignConfig;
use super::ExitError;

/// Plays one self-play game with the configured expert. Every searched state
/// contributes its visit distribution and root value to the record.
pub fn self_play_game(
    net: &Net,
    config: &ExitConfig,
    resign: &ResignConfig,
    resign_enabled: bool,
    rng: &mut impl Rng,
) -> Result<GameRecord, ExitError> {
    let mut eval = Evaluator::new(net);
    let mut state = GameState::new(config.board_size)?;
    let sampling_moves = config.sampling_moves() as usize;
    let mut moves = Vec::new();
    let mut policies = Vec::new();
    let mut values = Vec::new();
    let mut resigned = false;
    let winner = loop {
        if let Some(w) = state.winner() {
            break w;
        }
        let search = config.move_search(rng.random());
        let result = search_with(config.expert, &state, &mut eval, &search)?;
        policies.push(result.policy_f32());
        values.push(result.root_value as f32);
        if resign_enabled && result.root_value < resign.threshold {
            resigned = true;
            break state.to_move().opponent();
        }
        let mode = if moves.len() < sampling_moves {
            SelectMode::Proportional
        } else {
            SelectMode::Greedy
        };
        let action = select_action(&result, mode, rng);
        state.play(action)?;
        moves.push(action);
    };
    let mut record = GameRecord::new(config.board_size, &moves, winner);
    record.search_policies = Some(policies);
    record.root_values = Some(values);
    record.resigned = resigned;
    record.resign_enabled = Some(resign_enabled);
    Ok(record)
}
