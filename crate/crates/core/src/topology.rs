//! Topology files (TOML) and the built-in presets.
//!
//! ```toml
//! name = "G1(3)"
//! N = 3
//! d = 2          # optional, default 2
//! budget = 1.0   # optional, default 1
//!
//! [[generators]]
//! cycles = [[1, 2, 3]]
//! weight = "w123"    # named symbol: free, supplied via --weights
//!
//! [[generators]]
//! cycles = [[1, 2]]
//! weight = 0.1       # fixed real
//! label = "w12"      # optional for fixed weights, default "g<index>"
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::optimize::BudgetConstraint;
use crate::permgroup::{Generator, GeneratorSet, Permutation};
use crate::report::fmt_num;

pub const PRESET_NAMES: [&str; 4] = ["g1-3", "g2-3", "g3-3", "g1-4"];

const PRESET_G1_3: &str = r#"name = "G1(3)"
N = 3

[[generators]]
cycles = [[1, 2, 3]]
weight = "w123"

[[generators]]
cycles = [[1, 2]]
weight = "w12"
"#;

const PRESET_G2_3: &str = r#"name = "G2(3)"
N = 3

[[generators]]
cycles = [[1, 2, 3]]
weight = "w123"

[[generators]]
cycles = [[3, 2, 1]]
weight = "w321"

[[generators]]
cycles = [[1, 2]]
weight = "w12"
"#;

const PRESET_G3_3: &str = r#"name = "G3(3)"
N = 3

[[generators]]
cycles = [[1, 2]]
weight = "w12"

[[generators]]
cycles = [[2, 3]]
weight = "w23"
"#;

const PRESET_G1_4: &str = r#"name = "G1(4)"
N = 4

[[generators]]
cycles = [[1, 2, 3, 4]]
weight = "w1234"

[[generators]]
cycles = [[1, 2]]
weight = "w12"

[[generators]]
cycles = [[3, 4]]
weight = "w34"
"#;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    name: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(default = "default_d")]
    d: usize,
    #[serde(default = "default_budget")]
    budget: f64,
    generators: Vec<Spanned<RawGenerator>>,
}

fn default_d() -> usize {
    2
}

fn default_budget() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    cycles: Vec<Vec<usize>>,
    weight: RawWeight,
    label: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawWeight {
    Fixed(f64),
    Symbol(String),
}

/// A generator set with per-generator weights that are either free symbols
/// or fixed values, plus the qudit dimension and budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub name: String,
    pub gens: GeneratorSet,
    pub d: usize,
    pub budget: f64,
    /// `Some(w)` for fixed weights, `None` for named symbols.
    pub fixed: Vec<Option<f64>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Topology {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawTopology = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| format!("line {}: ", line_of(text, s.start))).unwrap_or_default();
            Error::Parse(format!("{line}{}", e.message()))
        })?;
        if raw.n < 2 {
            return Err(Error::Parse(format!("N must be at least 2, got {}", raw.n)));
        }
        if raw.d < 2 {
            return Err(Error::Parse(format!("d must be at least 2, got {}", raw.d)));
        }
        if !(raw.budget.is_finite() && raw.budget > 0.0) {
            return Err(Error::Parse(format!("budget must be positive, got {}", raw.budget)));
        }
        if raw.generators.is_empty() {
            return Err(Error::Parse("at least one [[generators]] entry is required".into()));
        }
        let mut generators = Vec::new();
        let mut fixed = Vec::new();
        for (i, g) in raw.generators.iter().enumerate() {
            let line = line_of(text, g.span().start);
            let at = |msg: String| Error::Parse(format!("line {line}: generator {}: {msg}", i + 1));
            let g = g.get_ref();
            let perm = Permutation::from_cycles(raw.n, &g.cycles).map_err(|e| at(e.to_string()))?;
            let (label, w) = match (&g.weight, &g.label) {
                (RawWeight::Symbol(_), Some(_)) => {
                    return Err(at("'label' is only allowed with a fixed weight".into()));
                }
                (RawWeight::Symbol(s), None) => (s.clone(), None),
                (RawWeight::Fixed(w), label) => {
                    if !(w.is_finite() && *w >= 0.0) {
                        return Err(at(format!("fixed weight must be non-negative, got {w}")));
                    }
                    (label.clone().unwrap_or_else(|| format!("g{}", i + 1)), Some(*w))
                }
            };
            if label.is_empty() || label.contains(|c: char| c.is_whitespace() || c == ',') {
                return Err(at(format!("invalid weight name '{label}'")));
            }
            generators.push(Generator { perm, label });
            fixed.push(w);
        }
        let gens = GeneratorSet::new(raw.n, generators).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self {
            name: raw.name,
            gens,
            d: raw.d,
            budget: raw.budget,
            fixed,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn preset(name: &str) -> Option<Self> {
        let text = match name {
            "g1-3" => PRESET_G1_3,
            "g2-3" => PRESET_G2_3,
            "g3-3" => PRESET_G3_3,
            "g1-4" => PRESET_G1_4,
            _ => return None,
        };
        Some(Self::parse(text).expect("preset parses"))
    }

    pub fn preset_source(name: &str) -> Option<&'static str> {
        match name {
            "g1-3" => Some(PRESET_G1_3),
            "g2-3" => Some(PRESET_G2_3),
            "g3-3" => Some(PRESET_G3_3),
            "g1-4" => Some(PRESET_G1_4),
            _ => None,
        }
    }

    /// A preset name, or else a path to a topology file.
    pub fn resolve(spec: &str) -> Result<Self> {
        if let Some(t) = Self::preset(spec) {
            return Ok(t);
        }
        let path = Path::new(spec);
        if !path.exists() {
            return Err(Error::Parse(format!(
                "'{spec}' is neither a preset ({}) nor an existing file",
                PRESET_NAMES.join(", ")
            )));
        }
        Self::load(path)
    }

    pub fn n(&self) -> usize {
        self.gens.degree()
    }

    /// Names of the free weights, in generator order.
    pub fn symbols(&self) -> Vec<&str> {
        self.gens
            .generators()
            .iter()
            .zip(&self.fixed)
            .filter(|(_, f)| f.is_none())
            .map(|(g, _)| g.label.as_str())
            .collect()
    }

    /// Full weight vector from values for the free symbols.
    pub fn weights(&self, free: &[f64]) -> Result<Vec<f64>> {
        let symbols = self.symbols();
        if free.len() != symbols.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights ({}), got {}",
                symbols.len(),
                symbols.join(","),
                free.len()
            )));
        }
        let mut it = free.iter();
        let w: Vec<f64> = self
            .fixed
            .iter()
            .map(|f| f.unwrap_or_else(|| *it.next().expect("counted")))
            .collect();
        self.gens.check_weights(&w)?;
        Ok(w)
    }

    pub fn constraint(&self) -> Result<BudgetConstraint> {
        BudgetConstraint::for_generators(&self.gens, self.budget)?.with_fixed(self.fixed.clone())
    }

    /// One line per setting, for report headers.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "topology: {}", self.name);
        let _ = writeln!(out, "N: {}", self.n());
        let _ = writeln!(out, "d: {}", self.d);
        let _ = writeln!(out, "budget: {}", fmt_num(self.budget));
        for (g, f) in self.gens.generators().iter().zip(&self.fixed) {
            let kind = match f {
                Some(w) => format!("fixed {}", fmt_num(*w)),
                None => "free".to_string(),
            };
            let _ = writeln!(
                out,
                "generator {}: {} (cost {}, {kind})",
                g.label,
                g.perm,
                g.perm.effective_cycle_length()
            );
        }
        out
    }
}
