use std::collections::BTreeMap;
use std::path::Path;

use levysig::calculus::{SigModelParams, SigPayoff};
use levysig::levy::{primary_process_triplet, LevyAtom, LevyTriplet};
use levysig::market::SimulationGrid;
use levysig::tensor::{Alphabet, Word, WordCombination};
use serde::Deserialize;

use crate::CliError;

/// Whole run configuration as read from TOML.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<ModelSection>,
    pub market: Option<MarketSection>,
    pub triplet: Option<TripletSection>,
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub task: TaskSection,
}

/// Loadings are tables from word text (`"@"`, `"-1"`, `"0.1"`) to coefficient.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub s0: f64,
    #[serde(default)]
    pub ell_w: BTreeMap<String, f64>,
    #[serde(default)]
    pub ell_nu: BTreeMap<String, f64>,
    pub max_len: Option<usize>,
    pub max_letter: Option<i32>,
    pub level: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    /// `[jump size, intensity]` pairs.
    pub atoms: Vec<[f64; 2]>,
    pub moment_count: i32,
    #[serde(default = "default_level")]
    pub trunc_level: usize,
}

fn default_level() -> usize {
    3
}

/// A general Lévy triplet on explicit letters, used by `expected-sig` instead of the primary process.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletSection {
    pub letters: Vec<i32>,
    pub drift: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    #[serde(default)]
    pub atoms: Vec<AtomEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub jump: Vec<f64>,
    pub intensity: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub horizon: f64,
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub paths: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    /// Payoffs as word-combination text over letters -1 and 1, e.g. `"1*1.1 + 0.5*@"`.
    #[serde(default)]
    pub payoffs: Vec<String>,
    /// Simulated path whose hedge is written out.
    #[serde(default)]
    pub hedge_path: u64,
    /// Number of paths written by `simulate`; defaults to `min(paths, 10)`.
    pub simulate_paths: Option<usize>,
    pub fit_level: Option<usize>,
    /// `"running_max"`, `"terminal_price"` or a word combination on the time-extended price signature.
    pub fit_target: Option<String>,
    /// Fail on a degenerate hedge denominator (default) or hold no position there.
    #[serde(default = "default_strict")]
    pub strict_hedge: bool,
}

fn default_strict() -> bool {
    true
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }

    pub fn market(&self) -> Result<&MarketSection, CliError> {
        Self::require(&self.market, "market")
    }

    pub fn simulation(&self) -> Result<&SimulationSection, CliError> {
        Self::require(&self.simulation, "simulation")
    }

    pub fn primary_triplet(&self) -> Result<LevyTriplet, CliError> {
        let m = self.market()?;
        let atoms: Vec<(f64, f64)> = m.atoms.iter().map(|a| (a[0], a[1])).collect();
        Ok(primary_process_triplet(&atoms, m.moment_count)?)
    }

    /// The `[triplet]` block if present, else the primary process of `[market]`.
    pub fn triplet_for_expectation(&self) -> Result<LevyTriplet, CliError> {
        match &self.triplet {
            Some(t) => {
                let atoms = t.atoms.iter().map(|a| LevyAtom { jump: a.jump.clone(), intensity: a.intensity }).collect();
                let alphabet = Alphabet::new(t.letters.iter().copied())?;
                Ok(LevyTriplet::new(alphabet, t.drift.clone(), t.covariance.clone(), atoms)?)
            }
            None => self.primary_triplet(),
        }
    }

    pub fn model(&self) -> Result<SigModelParams, CliError> {
        let m = Self::require(&self.model, "model")?;
        let moment_count = self.market()?.moment_count;
        let ell_w = parse_loadings(&m.ell_w)?;
        let ell_nu = parse_loadings(&m.ell_nu)?;
        let max_len = m.max_len.unwrap_or_else(|| ell_w.max_word_len().max(ell_nu.max_word_len()));
        let max_letter = m.max_letter.unwrap_or_else(|| {
            ell_w.max_letter().into_iter().chain(ell_nu.max_letter()).max().unwrap_or(0).max(0)
        });
        let level = m.level.unwrap_or(max_len + 1);
        Ok(SigModelParams::new(m.s0, ell_w, ell_nu, max_len, max_letter, moment_count, level)?)
    }

    pub fn grid(&self, seed_override: Option<u64>) -> Result<SimulationGrid, CliError> {
        let s = self.simulation()?;
        Ok(SimulationGrid::new(s.horizon, s.steps, seed_override.unwrap_or(s.seed))?)
    }

    pub fn payoffs(&self) -> Result<Vec<SigPayoff>, CliError> {
        if self.task.payoffs.is_empty() {
            return Err(CliError::Config("[task] payoffs is empty".into()));
        }
        self.task
            .payoffs
            .iter()
            .map(|text| Ok(SigPayoff::new(text.parse::<WordCombination>()?)?))
            .collect()
    }
}

fn parse_loadings(table: &BTreeMap<String, f64>) -> Result<WordCombination, CliError> {
    let mut out = WordCombination::new();
    for (word, coeff) in table {
        out.add_term(word.parse::<Word>()?, *coeff);
    }
    Ok(out)
}
