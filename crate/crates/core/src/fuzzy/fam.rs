use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ops::{and, or};
use super::FuzzyError;

pub const DEFAULT_FAM: &str = include_str!("../../../../fuzzy/default.fam");

/// Output labels, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Consequent {
    #[serde(rename = "Non-Intrusive")]
    NonIntrusive,
    #[serde(rename = "LP")]
    Lp,
    #[serde(rename = "HP")]
    Hp,
    #[serde(rename = "Intrusive")]
    Intrusive,
}

impl Consequent {
    pub const ALL: [Consequent; 4] = [
        Consequent::NonIntrusive,
        Consequent::Lp,
        Consequent::Hp,
        Consequent::Intrusive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Consequent::NonIntrusive => "Non-Intrusive",
            Consequent::Lp => "LP",
            Consequent::Hp => "HP",
            Consequent::Intrusive => "Intrusive",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Consequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Consequent {
    type Err = FuzzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Consequent::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| FuzzyError::Config(format!("unknown consequent `{s}`")))
    }
}

/// Firing strength per consequent label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LabelStrengths(pub [f64; 4]);

impl LabelStrengths {
    pub fn get(&self, c: Consequent) -> f64 {
        self.0[c.index()]
    }

    pub fn set(&mut self, c: Consequent, v: f64) {
        self.0[c.index()] = v;
    }

    /// Keeps the stronger of the existing and new strength.
    pub fn raise(&mut self, c: Consequent, v: f64) {
        let slot = &mut self.0[c.index()];
        *slot = or(*slot, v);
    }

    pub fn merge(&mut self, other: &LabelStrengths) {
        for c in Consequent::ALL {
            self.raise(c, other.get(c));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v <= 0.0)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (Consequent, f64)> + '_ {
        Consequent::ALL
            .into_iter()
            .map(|c| (c, self.get(c)))
            .filter(|(_, v)| *v > 0.0)
    }
}

/// 5x5 consequent grid. `row_var`/`col_var` name the inputs bound to each axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamMatrix {
    pub corner: String,
    pub row_labels: [String; 5],
    pub col_labels: [String; 5],
    pub cells: [[Consequent; 5]; 5],
    pub row_var: String,
    pub col_var: String,
}

fn split_cells(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).filter(|s| !s.is_empty()).collect()
    } else {
        line.split("  ").map(str::trim).filter(|s| !s.is_empty()).collect()
    }
}

impl FamMatrix {
    /// Parses a grid: a header line (corner cell + 5 column labels) and five
    /// rows (row label + 5 consequents), cells separated by tabs or by two
    /// or more spaces. `#` lines are comments.
    pub fn parse(text: &str, row_var: &str, col_var: &str) -> Result<Self, FuzzyError> {
        let mut lines = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let err = |m: String| FuzzyError::Config(format!("FAM grid: {m}"));
        let header = split_cells(lines.next().ok_or_else(|| err("empty".into()))?);
        if header.len() != 6 {
            return Err(err(format!(
                "header needs a corner cell and 5 labels, got {} cells",
                header.len()
            )));
        }
        let col_labels: [String; 5] = [1, 2, 3, 4, 5].map(|i| header[i].to_string());
        let mut row_labels: Vec<String> = Vec::with_capacity(5);
        let mut cells = [[Consequent::NonIntrusive; 5]; 5];
        for (r, line) in lines.by_ref().take(5).enumerate() {
            let row = split_cells(line);
            if row.len() != 6 {
                return Err(err(format!(
                    "row {} needs a label and 5 cells, got {} cells",
                    r + 1,
                    row.len()
                )));
            }
            row_labels.push(row[0].to_string());
            for c in 0..5 {
                cells[r][c] = row[c + 1].parse()?;
            }
        }
        if row_labels.len() != 5 {
            return Err(err(format!("expected 5 rows, got {}", row_labels.len())));
        }
        if lines.next().is_some() {
            return Err(err("more than 5 rows".into()));
        }
        Ok(Self {
            corner: header[0].to_string(),
            row_labels: row_labels.try_into().expect("five rows"),
            col_labels,
            cells,
            row_var: row_var.to_string(),
            col_var: col_var.to_string(),
        })
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_FAM, "x", "t").expect("bundled FAM parses")
    }

    pub fn lookup(&self, row_label: &str, col_label: &str) -> Option<Consequent> {
        let r = self.row_labels.iter().position(|l| l.eq_ignore_ascii_case(row_label))?;
        let c = self.col_labels.iter().position(|l| l.eq_ignore_ascii_case(col_label))?;
        Some(self.cells[r][c])
    }

    /// Evaluates with memberships keyed by input name instead of axis.
    pub fn evaluate_named(&self, var_a: &str, mu_a: &[f64; 5], mu_b: &[f64; 5]) -> LabelStrengths {
        if self.row_var == var_a {
            evaluate_fam(mu_a, mu_b, self)
        } else {
            evaluate_fam(mu_b, mu_a, self)
        }
    }
}

/// Fires every cell with strength AND(row membership, column membership)
/// and keeps the strongest firing per consequent.
pub fn evaluate_fam(mu_row: &[f64; 5], mu_col: &[f64; 5], fam: &FamMatrix) -> LabelStrengths {
    let mut out = LabelStrengths::default();
    for (r, &mr) in mu_row.iter().enumerate() {
        for (c, &mc) in mu_col.iter().enumerate() {
            let s = and(mr, mc);
            if s > 0.0 {
                out.raise(fam.cells[r][c], s);
            }
        }
    }
    out
}
