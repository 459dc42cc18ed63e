//! SGF FF[4] subset: root `FF`, `GM`, `SZ`, `KM`, `RE` and a main line of
//! `B`/`W` moves. Variations are parsed but only the first is followed.

use thiserror::Error;

use super::{Color, Move, MAX_SIZE};

#[derive(Debug, Clone, PartialEq)]
pub struct GameRecord {
    pub size: usize,
    pub komi: f64,
    /// Plays and passes in order. Resignation is carried by `result`.
    pub moves: Vec<(Color, Move)>,
    pub result: Option<String>,
}

impl GameRecord {
    pub fn new(size: usize, komi: f64) -> Self {
        Self { size, komi, moves: Vec::new(), result: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SGF parse error at byte {offset}: {reason}")]
pub struct SgfError {
    pub offset: usize,
    pub reason: String,
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace(']', "\\]")
}

/// Serialises a record. `Resign` entries are not SGF moves and are skipped.
pub fn to_sgf(record: &GameRecord) -> String {
    let mut out = format!("(;FF[4]GM[1]SZ[{}]KM[{}]", record.size, record.komi);
    if let Some(result) = &record.result {
        out.push_str(&format!("RE[{}]", escape(result)));
    }
    for &(color, mv) in &record.moves {
        let value = match mv {
            Move::Play { x, y } => format!("{}{}", (b'a' + x as u8) as char, (b'a' + y as u8) as char),
            Move::Pass => String::new(),
            Move::Resign => continue,
        };
        out.push_str(&format!(";{}[{}]", color.sgf_letter(), value));
    }
    out.push_str(")\n");
    out
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

type Node = Vec<(String, Vec<String>, usize)>;

impl<'a> Parser<'a> {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T, SgfError> {
        Err(SgfError { offset: self.pos, reason: reason.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<(), SgfError> {
        match self.peek() {
            Some(c) if c == b => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => self.err(format!("expected `{}`, found `{}`", b as char, c as char)),
            None => self.err(format!("expected `{}`, found end of input", b as char)),
        }
    }

    fn value(&mut self) -> Result<String, SgfError> {
        self.expect(b'[')?;
        let mut out = Vec::new();
        loop {
            match self.src.get(self.pos) {
                None => return self.err("unterminated property value"),
                Some(b'\\') => {
                    self.pos += 1;
                    match self.src.get(self.pos) {
                        Some(&c) => out.push(c),
                        None => return self.err("dangling escape"),
                    }
                    self.pos += 1;
                }
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                Some(&c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).or_else(|_| self.err("property value is not UTF-8"))
    }

    fn node(&mut self) -> Result<Node, SgfError> {
        self.expect(b';')?;
        let mut props = Vec::new();
        while let Some(c) = self.peek() {
            if !c.is_ascii_uppercase() {
                if c.is_ascii_lowercase() {
                    return self.err("lowercase property identifiers are not supported");
                }
                break;
            }
            let start = self.pos;
            while self.src.get(self.pos).is_some_and(u8::is_ascii_uppercase) {
                self.pos += 1;
            }
            let ident = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
            let mut values = Vec::new();
            while self.peek() == Some(b'[') {
                values.push(self.value()?);
            }
            if values.is_empty() {
                return self.err(format!("property {ident} has no value"));
            }
            props.push((ident, values, start));
        }
        Ok(props)
    }

    /// Returns the main line of the tree starting here.
    fn tree(&mut self) -> Result<Vec<Node>, SgfError> {
        self.expect(b'(')?;
        let mut line = Vec::new();
        while self.peek() == Some(b';') {
            line.push(self.node()?);
        }
        if line.is_empty() {
            return self.err("game tree has no nodes");
        }
        let mut first = true;
        while self.peek() == Some(b'(') {
            let sub = self.tree()?;
            if first {
                line.extend(sub);
                first = false;
            }
        }
        self.expect(b')')?;
        Ok(line)
    }
}

fn parse_point(value: &str, size: usize, offset: usize) -> Result<Move, SgfError> {
    let bytes = value.as_bytes();
    if bytes.is_empty() || (value == "tt" && size <= 19) {
        return Ok(Move::Pass);
    }
    let err = |reason: String| Err(SgfError { offset, reason });
    if bytes.len() != 2 || !bytes.iter().all(u8::is_ascii_lowercase) {
        return err(format!("bad point `{value}`"));
    }
    let (x, y) = ((bytes[0] - b'a') as usize, (bytes[1] - b'a') as usize);
    if x >= size || y >= size {
        return err(format!("point `{value}` is off the {size}x{size} board"));
    }
    Ok(Move::Play { x, y })
}

pub fn from_sgf(text: &str) -> Result<GameRecord, SgfError> {
    let mut parser = Parser { src: text.as_bytes(), pos: 0 };
    let nodes = parser.tree()?;
    if parser.peek().is_some() {
        // Only the first game of a collection is read.
        if parser.peek() != Some(b'(') {
            return parser.err("trailing data after game tree");
        }
    }

    let mut record = GameRecord::new(19, 7.5);
    let root = &nodes[0];
    for (ident, values, offset) in root {
        let v = values[0].trim();
        let bad = |reason: String| Err(SgfError { offset: *offset, reason });
        match ident.as_str() {
            "SZ" => match v.parse::<usize>() {
                Ok(s) if (1..=MAX_SIZE).contains(&s) => record.size = s,
                _ => return bad(format!("unsupported board size `{v}`")),
            },
            "KM" => match v.parse::<f64>() {
                Ok(k) if k.is_finite() => record.komi = k,
                _ => return bad(format!("bad komi `{v}`")),
            },
            "GM" if v != "1" => return bad(format!("game type {v} is not Go")),
            "FF" if v.parse::<u32>().map_or(true, |f| !(1..=4).contains(&f)) => {
                return bad(format!("unsupported file format `{v}`"))
            }
            "RE" => record.result = Some(values[0].clone()),
            _ => {}
        }
    }

    for node in &nodes {
        for (ident, values, offset) in node {
            let color = match ident.as_str() {
                "B" => Color::Black,
                "W" => Color::White,
                "AB" | "AW" | "AE" => {
                    return Err(SgfError { offset: *offset, reason: "setup properties are not supported".into() })
                }
                _ => continue,
            };
            let expected = record.moves.last().map_or(Color::Black, |(c, _)| c.opponent());
            if color != expected {
                return Err(SgfError { offset: *offset, reason: "moves do not alternate starting with Black".into() });
            }
            let mv = parse_point(values[0].trim(), record.size, *offset)?;
            record.moves.push((color, mv));
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_size_komi_and_coordinates() {
        let mut r = GameRecord::new(19, 7.5);
        r.moves.push((Color::Black, Move::play(3, 3)));
        let sgf = to_sgf(&r);
        assert!(sgf.contains("SZ[19]"));
        assert!(sgf.contains("KM[7.5]"));
        assert!(sgf.contains(";B[dd]"));
    }

    #[test]
    fn reads_pass_as_empty_value() {
        let r = from_sgf("(;FF[4]SZ[9];B[ee];W[])").unwrap();
        assert_eq!(r.size, 9);
        assert_eq!(r.moves, vec![(Color::Black, Move::play(4, 4)), (Color::White, Move::Pass)]);
        let tt = from_sgf("(;FF[4]SZ[19];B[tt])").unwrap();
        assert_eq!(tt.moves, vec![(Color::Black, Move::Pass)]);
    }

    #[test]
    fn follows_first_variation_and_unescapes() {
        let r = from_sgf("(;FF[4]SZ[9]RE[W+R \\] x]C[hi];B[aa](;W[bb];B[cc])(;W[ii]))").unwrap();
        assert_eq!(r.moves.len(), 3);
        assert_eq!(r.moves[2], (Color::Black, Move::play(2, 2)));
        assert_eq!(r.result.as_deref(), Some("W+R ] x"));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let e = from_sgf("(;FF[4]SZ[9];B[zz])").unwrap_err();
        assert_eq!(e.offset, 13);
        let e = from_sgf("(;FF[4]SZ[9];B[aa]").unwrap_err();
        assert_eq!(e.offset, 18);
        assert!(from_sgf("(;FF[4]SZ[9];W[aa])").is_err());
        assert!(from_sgf("(;FF[4]SZ[9]AB[aa])").is_err());
        assert!(from_sgf("(;SZ[9];B[aa];B[bb])").is_err());
        assert!(from_sgf("").is_err());
        assert!(from_sgf("(;GM[2])").is_err());
    }

    fn arb_record() -> impl Strategy<Value = GameRecord> {
        (1usize..=25, -20i32..40, proptest::collection::vec((0usize..25, 0usize..25, prop::bool::weighted(0.1)), 0..60), proptest::option::of("[A-Za-z0-9+.\\]\\\\ ]{0,12}"))
            .prop_map(|(size, half_komi, raw, result)| {
                let moves = raw
                    .into_iter()
                    .enumerate()
                    .map(|(i, (x, y, pass))| {
                        let color = if i % 2 == 0 { Color::Black } else { Color::White };
                        let mv = if pass { Move::Pass } else { Move::play(x % size, y % size) };
                        (color, mv)
                    })
                    .collect();
                GameRecord { size, komi: half_komi as f64 / 2.0, moves, result }
            })
    }

    proptest! {
        #[test]
        fn round_trip_identity(record in arb_record()) {
            prop_assert_eq!(from_sgf(&to_sgf(&record)).unwrap(), record);
        }
    }
}
