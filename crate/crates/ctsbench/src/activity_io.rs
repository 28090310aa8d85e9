// SPDX-License-Identifier: Apache-2.0

//! Toggle-count readers and writers.
//!
//! Two encodings map onto the same [`ActivityMap`]:
//!
//! * A SAIF subset. Only the `TC` attribute of `NET` entries is kept; `T0`,
//!   `T1`, `TX`, `TZ`, `IG` and `TB` are checked to be numbers and dropped.
//!   One `INSTANCE` level is supported and each net name is read as a cell id.
//!
//!   ```text
//!   (SAIFILE
//!     (SAIFVERSION "2.0")
//!     (DURATION 1000000)
//!     (INSTANCE top
//!       (NET
//!         (g0 (T0 500000) (T1 500000) (TC 42))
//!       )
//!     )
//!   )
//!   ```
//!
//! * A two-column CSV with header `cell_id,toggle_count`.

use std::fmt;
use std::path::Path;

use ctsbench_core::activity::{ActivityMap, DuplicateName};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ActivityError {
    #[error("{position}: {reason}")]
    Syntax { position: Position, reason: String },
    #[error("duplicate activity entry for '{0}'")]
    DuplicateName(String),
    #[error("line {line}: cell '{cell}' has negative toggle count {value}")]
    NegativeToggle { line: usize, cell: String, value: i64 },
    #[error("unsupported activity file extension: {0}")]
    UnknownFormat(String),
}

impl ActivityError {
    pub fn name(&self) -> &'static str {
        match self {
            ActivityError::Syntax { .. } => "SyntaxError",
            ActivityError::DuplicateName(_) => "DuplicateNameError",
            ActivityError::NegativeToggle { .. } => "NegativeToggleError",
            ActivityError::UnknownFormat(_) => "SyntaxError",
        }
    }
}

impl From<DuplicateName> for ActivityError {
    fn from(d: DuplicateName) -> Self {
        ActivityError::DuplicateName(d.0)
    }
}

fn syntax(position: Position, reason: impl Into<String>) -> ActivityError {
    ActivityError::Syntax { position, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
    Str(String),
}

struct Lexer<'a> {
    bytes: &'a [u8],
    at: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, at: 0, line: 1, column: 1 }
    }

    fn position(&self) -> Position {
        Position { line: self.line, column: self.column }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.bytes.get(self.at)?;
        self.at += 1;
        if b == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.at).copied()
    }

    fn next_token(&mut self) -> Result<Option<(Token, Position)>, ActivityError> {
        loop {
            match self.peek() {
                None => return Ok(None),
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.bytes.get(self.at + 1) == Some(&b'/') => {
                    while !matches!(self.peek(), None | Some(b'\n')) {
                        self.bump();
                    }
                }
                Some(_) => break,
            }
        }
        let start = self.position();
        let b = self.bump().expect("peeked");
        let token = match b {
            b'(' => Token::Open,
            b')' => Token::Close,
            b'"' => {
                let mut s = Vec::new();
                loop {
                    match self.bump() {
                        None => return Err(syntax(start, "unterminated string")),
                        Some(b'"') => break,
                        Some(c) => s.push(c),
                    }
                }
                Token::Str(utf8(s, start)?)
            }
            _ => {
                let mut s = Vec::new();
                let mut c = b;
                loop {
                    if c == b'\\' {
                        match self.bump() {
                            Some(escaped) => s.push(escaped),
                            None => return Err(syntax(start, "dangling escape")),
                        }
                    } else {
                        s.push(c);
                    }
                    match self.peek() {
                        Some(n) if !(n.is_ascii_whitespace() || n == b'(' || n == b')' || n == b'"') => {
                            c = self.bump().expect("peeked");
                        }
                        _ => break,
                    }
                }
                Token::Atom(utf8(s, start)?)
            }
        };
        Ok(Some((token, start)))
    }
}

fn utf8(bytes: Vec<u8>, at: Position) -> Result<String, ActivityError> {
    String::from_utf8(bytes).map_err(|_| syntax(at, "invalid UTF-8"))
}

#[derive(Debug)]
enum Sexp {
    List(Vec<Sexp>, Position),
    Atom(String, Position),
    Str(String, Position),
}

impl Sexp {
    fn position(&self) -> Position {
        match self {
            Sexp::List(_, p) | Sexp::Atom(_, p) | Sexp::Str(_, p) => *p,
        }
    }

    /// Head keyword and tail of a list like `(KEY ...)`.
    fn keyword(&self) -> Result<(&str, &[Sexp]), ActivityError> {
        match self {
            Sexp::List(items, p) => match items.first() {
                Some(Sexp::Atom(k, _)) => Ok((k.as_str(), &items[1..])),
                _ => Err(syntax(*p, "expected a keyword list")),
            },
            other => Err(syntax(other.position(), "expected a list")),
        }
    }

    fn name(&self) -> Result<&str, ActivityError> {
        match self {
            Sexp::Atom(s, _) | Sexp::Str(s, _) => Ok(s),
            Sexp::List(_, p) => Err(syntax(*p, "expected a name")),
        }
    }

    fn number(&self) -> Result<u64, ActivityError> {
        match self {
            Sexp::Atom(s, p) => s.parse().map_err(|_| syntax(*p, format!("expected a non-negative integer, got '{s}'"))),
            other => Err(syntax(other.position(), "expected a number")),
        }
    }
}

fn read_sexp(lexer: &mut Lexer<'_>) -> Result<Sexp, ActivityError> {
    let mut stack: Vec<(Vec<Sexp>, Position)> = Vec::new();
    loop {
        let Some((token, at)) = lexer.next_token()? else {
            return Err(syntax(lexer.position(), "unexpected end of input"));
        };
        let item = match token {
            Token::Open => {
                stack.push((Vec::new(), at));
                continue;
            }
            Token::Close => match stack.pop() {
                Some((items, start)) => Sexp::List(items, start),
                None => return Err(syntax(at, "unbalanced ')'")),
            },
            Token::Atom(s) => Sexp::Atom(s, at),
            Token::Str(s) => Sexp::Str(s, at),
        };
        match stack.last_mut() {
            Some((items, _)) => items.push(item),
            None => return Ok(item),
        }
    }
}

const HEADER_KEYS: [&str; 9] = [
    "SAIFVERSION",
    "DIRECTION",
    "DESIGN",
    "DATE",
    "VENDOR",
    "PROGRAM_NAME",
    "VERSION",
    "DIVIDER",
    "TIMESCALE",
];
const STATE_KEYS: [&str; 7] = ["T0", "T1", "TX", "TZ", "TC", "IG", "TB"];

pub fn parse_saif(bytes: &[u8]) -> Result<ActivityMap, ActivityError> {
    let mut lexer = Lexer::new(bytes);
    let root = read_sexp(&mut lexer)?;
    if let Some((_, at)) = lexer.next_token()? {
        return Err(syntax(at, "trailing content after SAIFILE"));
    }
    let (key, body) = root.keyword()?;
    if key != "SAIFILE" {
        return Err(syntax(root.position(), format!("expected SAIFILE, found {key}")));
    }

    let mut map = ActivityMap::new();
    for entry in body {
        let (key, rest) = entry.keyword()?;
        match key {
            "DURATION" => {
                let [value] = rest else {
                    return Err(syntax(entry.position(), "DURATION takes one value"));
                };
                value.number()?;
            }
            "INSTANCE" => read_instance(rest, entry.position(), &mut map)?,
            k if HEADER_KEYS.contains(&k) => {}
            k => return Err(syntax(entry.position(), format!("unsupported SAIFILE entry {k}"))),
        }
    }
    Ok(map)
}

fn read_instance(rest: &[Sexp], at: Position, map: &mut ActivityMap) -> Result<(), ActivityError> {
    let Some((name, blocks)) = rest.split_first() else {
        return Err(syntax(at, "INSTANCE needs a name"));
    };
    name.name()?;
    for block in blocks {
        let (key, entries) = block.keyword()?;
        match key {
            "NET" => {
                for net in entries {
                    let (cell, toggles) = read_net(net)?;
                    map.insert(cell, toggles)?;
                }
            }
            "INSTANCE" => return Err(syntax(block.position(), "nested INSTANCE blocks are not supported")),
            k => return Err(syntax(block.position(), format!("unsupported INSTANCE entry {k}"))),
        }
    }
    Ok(())
}

fn read_net(net: &Sexp) -> Result<(String, u64), ActivityError> {
    let Sexp::List(items, at) = net else {
        return Err(syntax(net.position(), "expected a net entry"));
    };
    let Some((name, states)) = items.split_first() else {
        return Err(syntax(*at, "empty net entry"));
    };
    let name = name.name()?.to_owned();
    let mut tc = None;
    for state in states {
        let (key, rest) = state.keyword()?;
        if !STATE_KEYS.contains(&key) {
            return Err(syntax(state.position(), format!("unknown state attribute {key}")));
        }
        let [value] = rest else {
            return Err(syntax(state.position(), format!("{key} takes one value")));
        };
        let v = value.number()?;
        if key == "TC" {
            tc = Some(v);
        }
    }
    let tc = tc.ok_or_else(|| syntax(*at, format!("net '{name}' has no TC")))?;
    Ok((name, tc))
}

fn escape_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_whitespace() || matches!(c, '(' | ')' | '\\' | '"' | '/') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Writes `a` as a SAIF document over `duration` time units.
///
/// `T1` is half the duration and `T0` the rest; they carry no information.
pub fn write_saif(a: &ActivityMap, duration: u64) -> Vec<u8> {
    use std::fmt::Write;
    let t1 = duration / 2;
    let t0 = duration - t1;
    let mut s = String::new();
    s.push_str("(SAIFILE\n  (SAIFVERSION \"2.0\")\n");
    writeln!(s, "  (DURATION {duration})").unwrap();
    s.push_str("  (INSTANCE top\n    (NET\n");
    for (name, tc) in a.iter() {
        writeln!(s, "      ({} (T0 {t0}) (T1 {t1}) (TC {tc}))", escape_name(name)).unwrap();
    }
    s.push_str("    )\n  )\n)\n");
    s.into_bytes()
}

pub const CSV_HEADER: [&str; 2] = ["cell_id", "toggle_count"];

pub fn parse_activity_csv(bytes: &[u8]) -> Result<ActivityMap, ActivityError> {
    let line_only = |line: u64| Position { line: line as usize, column: 1 };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| syntax(line_only(1), e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(syntax(line_only(1), "header must be 'cell_id,toggle_count'"));
    }
    let mut map = ActivityMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            syntax(line_only(line), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line()) as usize;
        let cell = &record[0];
        let raw = record[1].trim();
        if cell.is_empty() {
            return Err(syntax(Position { line, column: 1 }, "empty cell id"));
        }
        let toggles = match raw.parse::<u64>() {
            Ok(t) => t,
            Err(_) => match raw.parse::<i64>() {
                Ok(v) if v < 0 => {
                    return Err(ActivityError::NegativeToggle { line, cell: cell.to_owned(), value: v })
                }
                _ => {
                    return Err(syntax(
                        Position { line, column: 1 },
                        format!("toggle count '{raw}' is not an integer"),
                    ))
                }
            },
        };
        map.insert(cell, toggles)?;
    }
    Ok(map)
}

pub fn write_activity_csv(a: &ActivityMap) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for (cell, tc) in a.iter() {
        w.write_record([cell, tc.to_string().as_str()]).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads an activity file, choosing the parser by extension (`.saif`/`.csv`).
pub fn read_activity(path: &Path) -> crate::Result<ActivityMap> {
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path, e))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    let parsed = match ext {
        "saif" => parse_saif(&bytes),
        "csv" => parse_activity_csv(&bytes),
        other => Err(ActivityError::UnknownFormat(other.to_owned())),
    };
    Ok(parsed?)
}
