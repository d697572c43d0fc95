//! Cell notation: column letter followed by 1-based row number ("a1" is row 0,
//! column 0).

use super::{Action, HexError, MAX_SIZE};

pub fn to_notation(action: Action, size: usize) -> String {
    let (row, col) = action.coords(size);
    format!("{}{}", (b'a' + col as u8) as char, row + 1)
}

pub fn from_notation(token: &str, size: usize) -> Result<Action, HexError> {
    let malformed = || HexError::Notation(token.to_string());
    let token = token.trim();
    let mut chars = token.chars();
    let letter = chars.next().ok_or_else(malformed)?.to_ascii_lowercase();
    if !letter.is_ascii_lowercase() {
        return Err(malformed());
    }
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.len() > 2 {
        return Err(malformed());
    }
    let col = (letter as u8 - b'a') as usize;
    let row: usize = digits.parse().map_err(|_| malformed())?;
    if size > MAX_SIZE || col >= size || row == 0 || row > size {
        return Err(HexError::NotationRange(token.to_string(), size));
    }
    Ok(Action::from_coords(row - 1, col, size))
}

/// Parses a whitespace- or comma-separated move list.
pub fn parse_moves(text: &str, size: usize) -> Result<Vec<Action>, HexError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| from_notation(t, size))
        .collect()
}
