//! Labelled permutation pairs: the vertices of Rauzy diagrams.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a letter in a fixed alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(pub u8);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Display names for the letters `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::Parse("duplicate letter names".into()));
        }
        if names.len() > u8::MAX as usize {
            return Err(Error::Parse("alphabet too large".into()));
        }
        Ok(Alphabet { names })
    }

    /// `1, 2, ..., d`.
    pub fn numeric(d: usize) -> Self {
        Alphabet {
            names: (1..=d).map(|i| i.to_string()).collect(),
        }
    }

    /// `A, B, C, ...` (falls back to numbers past 26 letters).
    pub fn latin(d: usize) -> Self {
        if d > 26 {
            return Self::numeric(d);
        }
        Alphabet {
            names: (0..d)
                .map(|i| ((b'A' + i as u8) as char).to_string())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, l: Letter) -> &str {
        &self.names[l.index()]
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Letter(i as u8))
    }

    /// Alphabet with `name` appended as letter `d`.
    pub fn with_letter(&self, name: &str) -> Result<Self> {
        if self.letter(name).is_some() {
            return Err(Error::Precondition(format!(
                "letter {name} already in alphabet"
            )));
        }
        let mut names = self.names.clone();
        names.push(name.to_string());
        Alphabet::new(names)
    }

    /// Alphabet with letter `l` removed; later letters shift down by one.
    pub fn without(&self, l: Letter) -> Self {
        let mut names = self.names.clone();
        names.remove(l.index());
        Alphabet { names }
    }

    pub fn format_row(&self, row: &[Letter]) -> String {
        row.iter()
            .map(|&l| self.name(l))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    Top,
    Bottom,
}

impl MoveKind {
    pub const BOTH: [MoveKind; 2] = [MoveKind::Top, MoveKind::Bottom];
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveKind::Top => f.write_str("top"),
            MoveKind::Bottom => f.write_str("bottom"),
        }
    }
}

/// Result of a Rauzy move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub target: PermutationPair,
    pub winner: Letter,
    pub loser: Letter,
}

/// A pair of orderings `(top / bottom)` of the alphabet `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PermutationPair {
    top: Vec<Letter>,
    bottom: Vec<Letter>,
}

impl PermutationPair {
    pub fn new(top: Vec<Letter>, bottom: Vec<Letter>) -> Result<Self> {
        let d = top.len();
        if d < 3 {
            return Err(Error::InvalidPermutation(format!("alphabet size {d} < 3")));
        }
        if bottom.len() != d {
            return Err(Error::InvalidPermutation(
                "rows have different lengths".into(),
            ));
        }
        for row in [&top, &bottom] {
            let mut seen = vec![false; d];
            for l in row {
                if l.index() >= d || seen[l.index()] {
                    return Err(Error::InvalidPermutation(
                        "rows must each be a permutation of the alphabet".into(),
                    ));
                }
                seen[l.index()] = true;
            }
        }
        Ok(PermutationPair { top, bottom })
    }

    /// Build from rows of indices.
    pub fn from_indices(top: &[u8], bottom: &[u8]) -> Result<Self> {
        Self::new(
            top.iter().map(|&i| Letter(i)).collect(),
            bottom.iter().map(|&i| Letter(i)).collect(),
        )
    }

    /// Parse two lines of whitespace-separated letter names. Letters are
    /// numbered in sorted order of their names (numerically when every name
    /// is an integer).
    pub fn parse(text: &str) -> Result<(Alphabet, Self)> {
        let rows: Vec<Vec<&str>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.split_whitespace().collect())
            .collect();
        if rows.len() != 2 {
            return Err(Error::Parse(format!(
                "expected two non-empty rows, found {}",
                rows.len()
            )));
        }
        let mut names: Vec<String> = rows[0].iter().map(|s| s.to_string()).collect();
        if names.iter().all(|n| n.parse::<i64>().is_ok()) {
            names.sort_by_key(|n| n.parse::<i64>().unwrap());
        } else {
            names.sort();
        }
        let alphabet = Alphabet::new(names)?;
        let lookup = |row: &[&str]| -> Result<Vec<Letter>> {
            row.iter()
                .map(|n| {
                    alphabet
                        .letter(n)
                        .ok_or_else(|| Error::Parse(format!("letter {n} missing from top row")))
                })
                .collect()
        };
        let top = lookup(&rows[0])?;
        let bottom = lookup(&rows[1])?;
        let pair = Self::new(top, bottom)?;
        Ok((alphabet, pair))
    }

    pub fn format(&self, alphabet: &Alphabet) -> String {
        format!(
            "{}\n{}\n",
            alphabet.format_row(&self.top),
            alphabet.format_row(&self.bottom)
        )
    }

    pub fn d(&self) -> usize {
        self.top.len()
    }

    pub fn top(&self) -> &[Letter] {
        &self.top
    }

    pub fn bottom(&self) -> &[Letter] {
        &self.bottom
    }

    /// 1-based position of every letter in the top row.
    pub fn top_positions(&self) -> Vec<usize> {
        positions(&self.top)
    }

    /// 1-based position of every letter in the bottom row.
    pub fn bottom_positions(&self) -> Vec<usize> {
        positions(&self.bottom)
    }

    pub fn is_irreducible(&self) -> bool {
        let d = self.d();
        let mut seen = vec![0u8; d];
        let mut balanced = 0usize;
        // count letters seen in both prefixes
        for j in 0..d - 1 {
            for l in [self.top[j], self.bottom[j]] {
                seen[l.index()] += 1;
                if seen[l.index()] == 2 {
                    balanced += 1;
                }
            }
            if balanced == j + 1 {
                return false;
            }
        }
        true
    }

    pub fn is_degenerate(&self) -> bool {
        let d = self.d();
        let pb = self.bottom_positions();
        let b_first = self.bottom[0];
        let b_last = self.bottom[d - 1];
        let t1 = self.top[0];
        let td = self.top[d - 1];
        let follows = |x: Letter, y: Letter| pb[x.index()] == pb[y.index()] + 1;
        (0..d - 1).any(|j| {
            let aj = self.top[j];
            let aj1 = self.top[j + 1];
            (aj == b_last && aj1 == b_first && follows(t1, td))
                || (aj1 == b_first && follows(t1, aj))
                || (aj == b_last && follows(aj1, td))
        })
    }

    /// Apply a top or bottom Rauzy move. The winner is the last letter of the
    /// row that is left unchanged; the loser (last letter of the other row)
    /// is moved to the immediate right of the winner in its own row.
    pub fn apply_move(&self, kind: MoveKind) -> Move {
        let d = self.d();
        let (mut moved, fixed) = match kind {
            MoveKind::Top => (self.bottom.clone(), &self.top),
            MoveKind::Bottom => (self.top.clone(), &self.bottom),
        };
        let winner = fixed[d - 1];
        let loser = moved[d - 1];
        moved.pop();
        let at = moved
            .iter()
            .position(|&l| l == winner)
            .expect("winner in row");
        moved.insert(at + 1, loser);
        let target = match kind {
            MoveKind::Top => PermutationPair {
                top: self.top.clone(),
                bottom: moved,
            },
            MoveKind::Bottom => PermutationPair {
                top: moved,
                bottom: self.bottom.clone(),
            },
        };
        Move {
            target,
            winner,
            loser,
        }
    }

    /// Insert a new letter (index `d`) just before `before_top` in the top
    /// row and just before `before_bottom` in the bottom row.
    pub fn simple_extension(&self, before_top: Letter, before_bottom: Letter) -> Result<Self> {
        let d = self.d();
        if before_top.index() >= d || before_bottom.index() >= d {
            return Err(Error::Precondition(
                "insertion anchor not in alphabet".into(),
            ));
        }
        if (self.top[0], self.bottom[0]) == (before_top, before_bottom) {
            return Err(Error::Precondition(
                "cannot insert before both first letters".into(),
            ));
        }
        let new = Letter(d as u8);
        let insert = |row: &[Letter], anchor: Letter| {
            let mut out = row.to_vec();
            let at = out.iter().position(|&l| l == anchor).unwrap();
            out.insert(at, new);
            out
        };
        Self::new(
            insert(&self.top, before_top),
            insert(&self.bottom, before_bottom),
        )
    }

    /// Erase `letter` (higher letters shift down). `None` when the result is
    /// reducible or too small.
    pub fn simple_reduction(&self, letter: Letter) -> Option<Self> {
        if letter.index() >= self.d() || self.d() <= 3 {
            return None;
        }
        let erase = |row: &[Letter]| -> Vec<Letter> {
            row.iter()
                .filter(|&&l| l != letter)
                .map(|&l| if l > letter { Letter(l.0 - 1) } else { l })
                .collect()
        };
        let out = Self::new(erase(&self.top), erase(&self.bottom)).ok()?;
        out.is_irreducible().then_some(out)
    }

    /// `(1 2 ... d / d d-1 ... 1)`.
    pub fn rotation(d: usize) -> Result<Self> {
        let top: Vec<u8> = (0..d as u8).collect();
        let bottom: Vec<u8> = (0..d as u8).rev().collect();
        Self::from_indices(&top, &bottom)
    }

    /// `τ_d = (1 2 ... d / d d-1 ... 6 3 2 5 4 1)`, `d ≥ 6`, on letters `1..d`.
    pub fn tau(d: usize) -> Result<(Alphabet, Self)> {
        if d < 6 {
            return Err(Error::Precondition(format!("tau needs d >= 6, got {d}")));
        }
        let mut bottom: Vec<usize> = (6..=d).rev().collect();
        bottom.extend([3, 2, 5, 4, 1]);
        Ok((Alphabet::numeric(d), numbered(d, &bottom)?))
    }

    /// `σ_d = (1 2 ... d / d d-1 ... 8 3 2 7 6 5 4 1)`, `d ≥ 8`, on letters `1..d`.
    pub fn sigma(d: usize) -> Result<(Alphabet, Self)> {
        if d < 8 {
            return Err(Error::Precondition(format!("sigma needs d >= 8, got {d}")));
        }
        let mut bottom: Vec<usize> = (8..=d).rev().collect();
        bottom.extend([3, 2, 7, 6, 5, 4, 1]);
        Ok((Alphabet::numeric(d), numbered(d, &bottom)?))
    }

    /// The hyperelliptic two-zero permutation obtained from the rotation on
    /// `2g` letters by inserting letter `2g+1` after `1` on top and before
    /// the final `1` on the bottom.
    pub fn hyperelliptic_two_zeros(g: usize) -> Result<(Alphabet, Self)> {
        let base = Self::rotation(2 * g)?;
        let ext = base.simple_extension(Letter(1), Letter(0))?;
        Ok((Alphabet::numeric(2 * g + 1), ext))
    }
}

fn positions(row: &[Letter]) -> Vec<usize> {
    let mut p = vec![0; row.len()];
    for (i, l) in row.iter().enumerate() {
        p[l.index()] = i + 1;
    }
    p
}

fn numbered(d: usize, bottom_one_based: &[usize]) -> Result<PermutationPair> {
    let top: Vec<u8> = (0..d as u8).collect();
    let bottom: Vec<u8> = bottom_one_based.iter().map(|&x| (x - 1) as u8).collect();
    PermutationPair::from_indices(&top, &bottom)
}
