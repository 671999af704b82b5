//! Cyclic configuration words around 3-vertices, 3-faces and 5-faces.
//!
//! Face words of a d-face have length 2d. Slot `2i` is the corner slot of the
//! i-th boundary vertex (either `V3`, or the degree of the face opposite the
//! face at that 4-vertex); slot `2i + 1` holds the degree of the face across
//! the boundary edge following that corner. A 3-vertex word lists the degrees
//! of its three incident faces.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotValue {
    V3,
    F3,
    F4,
    F5,
    F6P,
}

impl SlotValue {
    pub const ALL: [SlotValue; 5] = [
        SlotValue::V3,
        SlotValue::F3,
        SlotValue::F4,
        SlotValue::F5,
        SlotValue::F6P,
    ];
    pub const FACES: [SlotValue; 4] = [SlotValue::F3, SlotValue::F4, SlotValue::F5, SlotValue::F6P];

    pub fn as_str(self) -> &'static str {
        match self {
            SlotValue::V3 => "v3",
            SlotValue::F3 => "3",
            SlotValue::F4 => "4",
            SlotValue::F5 => "5",
            SlotValue::F6P => "6p",
        }
    }

    pub fn is_face(self) -> bool {
        self != SlotValue::V3
    }

    pub(crate) fn bit(self) -> u8 {
        1 << (self as u8)
    }

    /// Maps a face degree to its trimmed class.
    pub fn from_degree(d: usize) -> Option<SlotValue> {
        match d {
            3 => Some(SlotValue::F3),
            4 => Some(SlotValue::F4),
            5 => Some(SlotValue::F5),
            d if d >= 6 => Some(SlotValue::F6P),
            _ => None,
        }
    }
}

impl fmt::Display for SlotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SlotValue {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, WordError> {
        match s.trim() {
            "v3" | "3v" => Ok(SlotValue::V3),
            "3" => Ok(SlotValue::F3),
            "4" => Ok(SlotValue::F4),
            "5" => Ok(SlotValue::F5),
            "6p" | "6+" => Ok(SlotValue::F6P),
            other => Err(WordError::Parse(format!("unknown slot `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordKind {
    Vertex3,
    Face3,
    Face5,
}

impl WordKind {
    pub const ALL: [WordKind; 3] = [WordKind::Vertex3, WordKind::Face3, WordKind::Face5];

    pub fn len(self) -> usize {
        match self {
            WordKind::Vertex3 => 3,
            WordKind::Face3 => 6,
            WordKind::Face5 => 10,
        }
    }

    pub fn prefix(self) -> &'static str {
        match self {
            WordKind::Vertex3 => "V3",
            WordKind::Face3 => "F3",
            WordKind::Face5 => "F5",
        }
    }

    pub fn from_prefix(p: &str) -> Option<WordKind> {
        WordKind::ALL.into_iter().find(|k| k.prefix() == p)
    }

    pub fn is_face(self) -> bool {
        self != WordKind::Vertex3
    }

    /// Degree of the centre element (3 or 5).
    pub fn degree(self) -> u32 {
        match self {
            WordKind::Vertex3 | WordKind::Face3 => 3,
            WordKind::Face5 => 5,
        }
    }

    /// Values legal at slot `i`.
    pub fn legal(self, i: usize) -> &'static [SlotValue] {
        if self.is_face() && i % 2 == 0 {
            &SlotValue::ALL
        } else {
            &SlotValue::FACES
        }
    }

    pub(crate) fn legal_mask(self, i: usize) -> u8 {
        self.legal(i).iter().fold(0, |m, v| m | v.bit())
    }

    /// Size of the raw (pre-canonical) word space.
    pub fn raw_count(self) -> u64 {
        (0..self.len()).map(|i| self.legal(i).len() as u64).product()
    }

    /// Index maps of every symmetry: image[i] = word[map[i]].
    pub fn symmetries(self) -> Vec<Vec<usize>> {
        let n = self.len();
        let step = if self.is_face() { 2 } else { 1 };
        let mut out = Vec::new();
        for k in (0..n).step_by(step) {
            out.push((0..n).map(|i| (i + k) % n).collect());
            out.push((0..n).map(|i| (k + n - i) % n).collect());
        }
        out
    }
}

impl fmt::Display for WordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("illegal slot value {value} at position {index} of a {kind} word")]
    IllegalSlot {
        kind: WordKind,
        index: usize,
        value: SlotValue,
    },
    #[error("{kind} word needs {expected} slots, got {got}")]
    WrongLength {
        kind: WordKind,
        expected: usize,
        got: usize,
    },
    #[error("pattern kind {pattern} does not match word kind {word}")]
    KindMismatch { word: WordKind, pattern: WordKind },
    #[error("parse error: {0}")]
    Parse(String),
}

const MAX_LEN: usize = 10;

/// A canonical configuration word.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigWord {
    kind: WordKind,
    slots: [SlotValue; MAX_LEN],
}

fn check_slots(kind: WordKind, raw: &[SlotValue]) -> Result<(), WordError> {
    if raw.len() != kind.len() {
        return Err(WordError::WrongLength {
            kind,
            expected: kind.len(),
            got: raw.len(),
        });
    }
    for (i, &v) in raw.iter().enumerate() {
        if !kind.legal(i).contains(&v) {
            return Err(WordError::IllegalSlot { kind, index: i, value: v });
        }
    }
    Ok(())
}

fn min_image(kind: WordKind, raw: &[SlotValue]) -> [SlotValue; MAX_LEN] {
    let n = raw.len();
    let mut best = [SlotValue::F6P; MAX_LEN];
    best[..n].copy_from_slice(raw);
    let mut cand = best;
    let step = if kind.is_face() { 2 } else { 1 };
    for k in (0..n).step_by(step) {
        for i in 0..n {
            cand[i] = raw[(i + k) % n];
        }
        if cand[..n] < best[..n] {
            best = cand;
        }
        for i in 0..n {
            cand[i] = raw[(k + n - i) % n];
        }
        if cand[..n] < best[..n] {
            best = cand;
        }
    }
    best
}

/// True iff no symmetry image of `raw` is lexicographically smaller.
fn is_minimal(kind: WordKind, raw: &[SlotValue]) -> bool {
    let n = raw.len();
    let step = if kind.is_face() { 2 } else { 1 };
    let cmp = |f: &dyn Fn(usize) -> usize| -> bool {
        for i in 0..n {
            let a = raw[f(i)];
            if a != raw[i] {
                return a > raw[i];
            }
        }
        true
    };
    (0..n).step_by(step).all(|k| {
        (k == 0 || cmp(&|i| (i + k) % n)) && cmp(&|i| (k + n - i) % n)
    })
}

/// Returns the canonical representative of `raw` under the kind's symmetry group.
pub fn canonicalize(kind: WordKind, raw: &[SlotValue]) -> Result<ConfigWord, WordError> {
    check_slots(kind, raw)?;
    Ok(ConfigWord {
        kind,
        slots: min_image(kind, raw),
    })
}

impl ConfigWord {
    pub fn kind(&self) -> WordKind {
        self.kind
    }

    pub fn slots(&self) -> &[SlotValue] {
        &self.slots[..self.kind.len()]
    }

    /// Slot at a cyclic index (negative indices wrap).
    pub fn at(&self, i: isize) -> SlotValue {
        let n = self.kind.len() as isize;
        self.slots[i.rem_euclid(n) as usize]
    }

    /// All symmetry images, including the identity, possibly repeated.
    pub fn images(&self) -> Vec<Vec<SlotValue>> {
        let s = self.slots();
        self.kind
            .symmetries()
            .into_iter()
            .map(|m| m.iter().map(|&j| s[j]).collect())
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConfigWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.kind)?;
        for (i, v) in self.slots().iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            f.write_str(v.as_str())?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for ConfigWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn split_text(s: &str) -> Result<(WordKind, Vec<&str>), WordError> {
    let bad = || WordError::Parse(format!("malformed word `{s}`"));
    let (prefix, rest) = s.trim().split_once(':').ok_or_else(bad)?;
    let kind = WordKind::from_prefix(prefix.trim()).ok_or_else(bad)?;
    let body = rest
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(bad)?;
    Ok((kind, body.split('/').map(str::trim).collect()))
}

/// Parses the text form and canonicalizes it.
impl FromStr for ConfigWord {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, WordError> {
        let (kind, parts) = split_text(s)?;
        let raw = parts
            .into_iter()
            .map(str::parse)
            .collect::<Result<Vec<SlotValue>, _>>()?;
        canonicalize(kind, &raw)
    }
}

/// Streams the canonical words of a kind in lexicographic order.
pub struct WordIter {
    kind: WordKind,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for WordIter {
    type Item = ConfigWord;

    fn next(&mut self) -> Option<ConfigWord> {
        let n = self.kind.len();
        let mut raw = [SlotValue::F6P; MAX_LEN];
        while !self.done {
            for i in 0..n {
                raw[i] = self.kind.legal(i)[self.digits[i]];
            }
            self.advance();
            if is_minimal(self.kind, &raw[..n]) {
                return Some(ConfigWord {
                    kind: self.kind,
                    slots: raw,
                });
            }
        }
        None
    }
}

impl WordIter {
    fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.kind.legal(i).len() {
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }
}

pub fn enumerate_words(kind: WordKind) -> WordIter {
    WordIter {
        kind,
        digits: vec![0; kind.len()],
        done: false,
    }
}

/// Canonical words whose first slot is `first`; the union over all legal
/// first values is `enumerate_words(kind)`, so shards can be generated
/// independently and concatenated in slot order.
pub fn enumerate_shard(kind: WordKind, first: SlotValue) -> impl Iterator<Item = ConfigWord> {
    let idx = kind.legal(0).iter().position(|&v| v == first);
    let mut it = WordIter {
        kind,
        digits: vec![0; kind.len()],
        done: idx.is_none(),
    };
    if let Some(i) = idx {
        it.digits[0] = i;
    }
    it.take_while(move |w| w.slots()[0] == first)
}

/// Cyclic slot-subset pattern.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub id: String,
    pub provenance: String,
    kind: WordKind,
    atoms: Vec<u8>,
}

impl Pattern {
    pub fn new(
        id: impl Into<String>,
        provenance: impl Into<String>,
        kind: WordKind,
        atoms: Vec<Vec<SlotValue>>,
    ) -> Result<Pattern, WordError> {
        if atoms.len() != kind.len() {
            return Err(WordError::WrongLength {
                kind,
                expected: kind.len(),
                got: atoms.len(),
            });
        }
        let mut masks = Vec::with_capacity(atoms.len());
        for (i, atom) in atoms.iter().enumerate() {
            let mut m = 0u8;
            for &v in atom {
                if !kind.legal(i).contains(&v) {
                    return Err(WordError::IllegalSlot { kind, index: i, value: v });
                }
                m |= v.bit();
            }
            if m == 0 {
                return Err(WordError::Parse(format!("empty atom at position {i}")));
            }
            masks.push(m);
        }
        Ok(Pattern {
            id: id.into(),
            provenance: provenance.into(),
            kind,
            atoms: masks,
        })
    }

    pub fn wildcard(kind: WordKind, id: impl Into<String>) -> Pattern {
        Pattern {
            id: id.into(),
            provenance: String::new(),
            kind,
            atoms: (0..kind.len()).map(|i| kind.legal_mask(i)).collect(),
        }
    }

    pub fn kind(&self) -> WordKind {
        self.kind
    }

    pub fn atom(&self, i: usize) -> Vec<SlotValue> {
        SlotValue::ALL
            .into_iter()
            .filter(|v| self.atoms[i] & v.bit() != 0)
            .collect()
    }

    /// Pattern body in text form, without id or provenance.
    pub fn body(&self) -> String {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                if m == self.kind.legal_mask(i) {
                    "*".to_string()
                } else {
                    let vals: Vec<&str> = self.atom(i).iter().map(|v| v.as_str()).collect();
                    format!("{{{}}}", vals.join(","))
                }
            })
            .collect();
        format!("{}:[{}]", self.kind, parts.join("/"))
    }

    pub fn parse_body(
        id: impl Into<String>,
        provenance: impl Into<String>,
        text: &str,
    ) -> Result<Pattern, WordError> {
        let (kind, parts) = split_text(text)?;
        if parts.len() != kind.len() {
            return Err(WordError::WrongLength {
                kind,
                expected: kind.len(),
                got: parts.len(),
            });
        }
        let mut atoms = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            if *p == "*" {
                atoms.push(kind.legal(i).to_vec());
            } else {
                let inner = p
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .unwrap_or(p);
                atoms.push(
                    inner
                        .split(',')
                        .map(str::parse)
                        .collect::<Result<Vec<SlotValue>, _>>()?,
                );
            }
        }
        Pattern::new(id, provenance, kind, atoms)
    }

    /// Parses a pattern-file line `<id> <body> [-- <provenance>]`.
    pub fn parse_line(line: &str) -> Result<Pattern, WordError> {
        let (main, prov) = match line.split_once("--") {
            Some((m, p)) => (m, p.trim()),
            None => (line, ""),
        };
        let (id, body) = main
            .trim()
            .split_once(char::is_whitespace)
            .ok_or_else(|| WordError::Parse(format!("malformed pattern line `{line}`")))?;
        Pattern::parse_body(id, prov, body.trim())
    }

    pub fn to_line(&self) -> String {
        if self.provenance.is_empty() {
            format!("{} {}", self.id, self.body())
        } else {
            format!("{} {} -- {}", self.id, self.body(), self.provenance)
        }
    }

    /// True iff the raw sequence itself satisfies every atom (no symmetry).
    pub fn accepts_raw(&self, raw: &[SlotValue]) -> bool {
        raw.len() == self.atoms.len() && (slot_code(raw) & self.code()).count_ones() as usize == raw.len()
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Parses a pattern file, skipping blank lines and `#` comments.
pub fn parse_patterns(text: &str) -> Result<Vec<Pattern>, WordError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(Pattern::parse_line)
        .collect()
}

pub fn matches(word: &ConfigWord, pattern: &Pattern) -> Result<bool, WordError> {
    if word.kind != pattern.kind {
        return Err(WordError::KindMismatch {
            word: word.kind,
            pattern: pattern.kind,
        });
    }
    Ok(matches_same_kind(word, pattern))
}

/// One-hot encoding, five bits per position.
fn slot_code(raw: &[SlotValue]) -> u64 {
    raw.iter()
        .enumerate()
        .fold(0, |acc, (i, v)| acc | (v.bit() as u64) << (5 * i))
}

/// Codes of all symmetry images of a word.
fn image_codes(word: &ConfigWord) -> Vec<u64> {
    let s = word.slots();
    let n = s.len();
    let step = if word.kind.is_face() { 2 } else { 1 };
    let mut img = [SlotValue::F6P; MAX_LEN];
    let mut out = Vec::with_capacity(2 * n);
    for k in (0..n).step_by(step) {
        for i in 0..n {
            img[i] = s[(i + k) % n];
        }
        out.push(slot_code(&img[..n]));
        for i in 0..n {
            img[i] = s[(k + n - i) % n];
        }
        out.push(slot_code(&img[..n]));
    }
    out.sort_unstable();
    out.dedup();
    out
}

impl Pattern {
    fn code(&self) -> u64 {
        self.atoms
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &m)| acc | (m as u64) << (5 * i))
    }
}

fn code_accepts(pattern: u64, len: usize, images: &[u64]) -> bool {
    images
        .iter()
        .any(|&c| (c & pattern).count_ones() as usize == len)
}

fn matches_same_kind(word: &ConfigWord, pattern: &Pattern) -> bool {
    code_accepts(pattern.code(), word.kind.len(), &image_codes(word))
}

/// Returns the words matching no pattern; patterns of other kinds are ignored.
pub fn filter_forbidden(d: &[ConfigWord], c: &[Pattern]) -> Vec<ConfigWord> {
    let codes: Vec<(WordKind, u64)> = c.iter().map(|p| (p.kind, p.code())).collect();
    d.iter()
        .filter(|w| {
            let images = image_codes(w);
            let n = w.kind.len();
            !codes
                .iter()
                .any(|&(k, p)| k == w.kind && code_accepts(p, n, &images))
        })
        .copied()
        .collect()
}
