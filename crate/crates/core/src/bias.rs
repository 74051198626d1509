//! Bias evaluation over a normalized activation matrix.
//!
//! Three readings of the same matrix are supported:
//!
//! * **stereotypes**: matched prime pairs and two target sets. For each
//!   pair `(p1, p2)` the difference `AL_p1(t) - AL_p2(t)` is taken over the
//!   first target set and `AL_p2(t) - AL_p1(t)` over the second, so positive
//!   values always mean the stereotype-consistent prime is closer.
//! * **valence**: three or more category primes. Valence ratings of all
//!   rated nodes are regressed on each prime's column (one slope per prime),
//!   and a joint fit feeds a Wald test that all slopes are equal.
//! * **emotions**: one prime pair. For each of the eight emotions the
//!   difference `AL_p1(t) - AL_p2(t)` is taken over that emotion's words.
//!
//! Every difference set goes through the Wilcoxon signed-rank test.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::activation::{ActivationMatrix, Normalization};
use crate::error::{Error, Result};
use crate::lexicon::{Emotion, Lexicon};
use crate::stats::{ols_fit, wald_equal_coefficients, wilcoxon_signed_rank, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    Stereotypes,
    Valence,
    Emotions,
}

impl Approach {
    pub fn as_str(self) -> &'static str {
        match self {
            Approach::Stereotypes => "stereotypes",
            Approach::Valence => "valence",
            Approach::Emotions => "emotions",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "stereotypes" => Some(Approach::Stereotypes),
            "valence" => Some(Approach::Valence),
            "emotions" => Some(Approach::Emotions),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primes {
    /// Ordered `(first, second)` pairs; the first element is matched with
    /// the first target set.
    Pairs(Vec<(String, String)>),
    /// Flat list of category words.
    Categories(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub name: String,
    pub words: Vec<String>,
}

/// Social-identity primes and, for stereotypes, the two target sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeSpec {
    pub identity: String,
    pub approach: Approach,
    pub primes: Primes,
    pub targets: Vec<TargetSet>,
}

impl PrimeSpec {
    pub fn new(identity: impl Into<String>, approach: Approach, primes: Primes, targets: Vec<TargetSet>) -> Result<Self> {
        let spec = PrimeSpec {
            identity: identity.into(),
            approach,
            primes,
            targets,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let id = &self.identity;
        if id.is_empty() {
            return Err(Error::validation("prime spec needs an identity name"));
        }
        let words = self.prime_words();
        if words.iter().any(|w| w.is_empty()) {
            return Err(Error::validation(format!("{id}: empty prime word")));
        }
        match (self.approach, &self.primes) {
            (Approach::Stereotypes, Primes::Pairs(pairs)) => {
                if pairs.is_empty() {
                    return Err(Error::validation(format!("{id}: stereotypes need at least one prime pair")));
                }
                if self.targets.len() != 2 {
                    return Err(Error::validation(format!(
                        "{id}: stereotypes need exactly two target sets, got {}",
                        self.targets.len()
                    )));
                }
                if let Some(empty) = self.targets.iter().find(|t| t.words.is_empty()) {
                    return Err(Error::validation(format!("{id}: target set '{}' is empty", empty.name)));
                }
                if self.targets[0].name == self.targets[1].name {
                    return Err(Error::validation(format!("{id}: target sets need distinct names")));
                }
            }
            (Approach::Valence, Primes::Categories(cats)) => {
                if cats.len() < 3 {
                    return Err(Error::validation(format!(
                        "{id}: valence needs at least three primes, got {}",
                        cats.len()
                    )));
                }
                if let Some((_, dup)) = cats.iter().enumerate().find(|(i, c)| cats[..*i].contains(c)) {
                    return Err(Error::validation(format!("{id}: prime '{dup}' listed twice")));
                }
                if !self.targets.is_empty() {
                    return Err(Error::validation(format!("{id}: valence takes no target sets")));
                }
            }
            (Approach::Emotions, Primes::Pairs(pairs)) => {
                if pairs.len() != 1 {
                    return Err(Error::validation(format!(
                        "{id}: emotions need exactly one prime pair, got {}",
                        pairs.len()
                    )));
                }
                if !self.targets.is_empty() {
                    return Err(Error::validation(format!("{id}: emotions take targets from the lexicon")));
                }
            }
            (Approach::Valence, Primes::Pairs(_)) => {
                return Err(Error::validation(format!("{id}: valence primes must be a flat list")));
            }
            (_, Primes::Categories(_)) => {
                return Err(Error::validation(format!(
                    "{id}: {} primes must be pairs",
                    self.approach.as_str()
                )));
            }
        }
        Ok(())
    }

    /// Prime words in matrix column order (pairs flattened first, second).
    pub fn prime_words(&self) -> Vec<String> {
        match &self.primes {
            Primes::Pairs(pairs) => pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect(),
            Primes::Categories(cats) => cats.clone(),
        }
    }

    fn pairs(&self) -> &[(String, String)] {
        match &self.primes {
            Primes::Pairs(p) => p,
            Primes::Categories(_) => &[],
        }
    }
}

/// Signed differences with the `(prime pair, target)` each came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDifferenceSet {
    pub label: String,
    pub differences: Vec<f64>,
    pub pair_provenance: Vec<((String, String), String)>,
    /// Targets dropped because they are not nodes of the network.
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledResult {
    pub label: String,
    pub result: TestResult,
    pub significance: String,
    /// Targets (or rated nodes) that entered the test.
    pub used: usize,
    /// Targets (or nodes) left out because they were absent or unrated.
    pub excluded: usize,
    /// Names of excluded targets, when the list is short enough to matter.
    pub excluded_words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeCoefficient {
    pub prime: String,
    /// Slope of the univariate fit of valence on this prime's column.
    pub coefficient: f64,
    pub std_error: f64,
    pub intercept: f64,
    /// Slope of this prime in the joint fit used by the Wald test.
    pub joint_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub target: String,
    pub prime: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub identity: String,
    pub approach: Approach,
    pub normalization: Normalization,
    pub results: Vec<LabeledResult>,
    pub coefficients: Option<Vec<PrimeCoefficient>>,
    pub matrix_slice: Option<Vec<HeatmapCell>>,
}

/// Significance stars for a p-value.
pub fn significance(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn require_normalized(m: &ActivationMatrix, what: &str) -> Result<()> {
    if m.normalization() == Normalization::Raw {
        return Err(Error::Normalization(format!("{what} needs a normalized matrix")));
    }
    Ok(())
}

fn require_approach(spec: &PrimeSpec, approach: Approach) -> Result<()> {
    spec.validate()?;
    if spec.approach != approach {
        return Err(Error::validation(format!(
            "{}: spec is for {}, not {}",
            spec.identity,
            spec.approach.as_str(),
            approach.as_str()
        )));
    }
    Ok(())
}

fn prime_columns(m: &ActivationMatrix, primes: &[String]) -> Result<Vec<usize>> {
    let mut cols = Vec::with_capacity(primes.len());
    let mut missing = Vec::new();
    for p in primes {
        match m.col_of(p) {
            Some(c) => cols.push(c),
            None => missing.push(p.clone()),
        }
    }
    if missing.is_empty() {
        Ok(cols)
    } else {
        Err(Error::MissingPrime(missing))
    }
}

fn test_differences(set: &PairedDifferenceSet) -> Result<LabeledResult> {
    let result = match wilcoxon_signed_rank(&set.differences) {
        Ok(r) => r,
        Err(Error::DegenerateSample) => TestResult::null_difference(set.differences.len()),
        Err(e) => return Err(e),
    };
    let targets_used = {
        let mut t: Vec<&str> = set.pair_provenance.iter().map(|(_, t)| t.as_str()).collect();
        t.sort_unstable();
        t.dedup();
        t.len()
    };
    Ok(LabeledResult {
        label: set.label.clone(),
        significance: String::from(significance(result.p_value)),
        result,
        used: targets_used,
        excluded: set.excluded.len(),
        excluded_words: set.excluded.clone(),
    })
}

/// The two stereotype difference sets (first-set targets, second-set targets).
pub fn stereotype_difference_sets(m: &ActivationMatrix, spec: &PrimeSpec) -> Result<[PairedDifferenceSet; 2]> {
    require_approach(spec, Approach::Stereotypes)?;
    prime_columns(m, &spec.prime_words())?;
    let build = |set_index: usize| -> Result<PairedDifferenceSet> {
        let set = &spec.targets[set_index];
        let (present, excluded): (Vec<&String>, Vec<&String>) = set.words.iter().partition(|t| m.row_of(t).is_some());
        if present.is_empty() {
            return Err(Error::NoTargets(set.name.clone()));
        }
        if !excluded.is_empty() {
            log::warn!(
                "{}: {} of {} '{}' targets are not in the network",
                spec.identity,
                excluded.len(),
                set.words.len(),
                set.name
            );
        }
        let mut differences = Vec::new();
        let mut pair_provenance = Vec::new();
        for (first, second) in spec.pairs() {
            let (c1, c2) = (m.col_of(first).unwrap(), m.col_of(second).unwrap());
            // Consistent prime is the one matching the set's position.
            let (consistent, other) = if set_index == 0 { (c1, c2) } else { (c2, c1) };
            for t in &present {
                let row = m.row_of(t).unwrap();
                differences.push(m.get(row, consistent) - m.get(row, other));
                pair_provenance.push(((first.clone(), second.clone()), (*t).clone()));
            }
        }
        Ok(PairedDifferenceSet {
            label: format!("{}-targets", set.name),
            differences,
            pair_provenance,
            excluded: excluded.into_iter().cloned().collect(),
        })
    };
    Ok([build(0)?, build(1)?])
}

/// Stereotype bias: one Wilcoxon result per target set plus the
/// primes x targets slice of the matrix for heatmaps.
pub fn stereotype_bias(m: &ActivationMatrix, spec: &PrimeSpec) -> Result<BiasReport> {
    require_normalized(m, "stereotype analysis")?;
    if m.normalization() == Normalization::L1ColRow {
        log::warn!("{}: stereotype analysis on an L1-normalized matrix", spec.identity);
    }
    let sets = stereotype_difference_sets(m, spec)?;
    let results = sets.iter().map(test_differences).collect::<Result<Vec<_>>>()?;

    let mut primes: Vec<String> = Vec::new();
    for p in spec.prime_words() {
        if !primes.contains(&p) {
            primes.push(p);
        }
    }
    let mut slice = Vec::new();
    for set in &spec.targets {
        for t in &set.words {
            let Some(row) = m.row_of(t) else { continue };
            for p in &primes {
                slice.push(HeatmapCell {
                    target: t.clone(),
                    prime: p.clone(),
                    value: m.get(row, m.col_of(p).unwrap()),
                });
            }
        }
    }

    Ok(BiasReport {
        identity: spec.identity.clone(),
        approach: Approach::Stereotypes,
        normalization: m.normalization(),
        results,
        coefficients: None,
        matrix_slice: Some(slice),
    })
}

/// Valence bias: univariate slopes per prime and a Wald test of equal
/// slopes in the joint fit. Nodes without a valence rating are skipped.
pub fn valence_bias(m: &ActivationMatrix, spec: &PrimeSpec, lex: &Lexicon) -> Result<BiasReport> {
    require_normalized(m, "valence analysis")?;
    require_approach(spec, Approach::Valence)?;
    let primes = spec.prime_words();
    let cols = prime_columns(m, &primes)?;

    let rated: Vec<(usize, f64)> = m
        .node_labels()
        .iter()
        .enumerate()
        .filter_map(|(row, w)| lex.valence(w).map(|v| (row, v)))
        .collect();
    let needed = primes.len() + 1;
    if rated.len() <= needed {
        return Err(Error::TooFewObservations {
            needed,
            got: rated.len(),
        });
    }
    let response: Vec<f64> = rated.iter().map(|&(_, v)| v).collect();
    let columns: Vec<Vec<f64>> = cols
        .iter()
        .map(|&c| rated.iter().map(|&(row, _)| m.get(row, c)).collect())
        .collect();

    let joint = ols_fit(&response, &columns, &primes)?;
    let slopes: Vec<usize> = (1..=primes.len()).collect();
    let wald = wald_equal_coefficients(&joint, &slopes)?;

    let mut coefficients = Vec::with_capacity(primes.len());
    for (k, prime) in primes.iter().enumerate() {
        let fit = ols_fit(&response, core::slice::from_ref(&columns[k]), core::slice::from_ref(prime))?;
        coefficients.push(PrimeCoefficient {
            prime: prime.clone(),
            coefficient: fit.coefficients[1],
            std_error: fit.std_error(1),
            intercept: fit.coefficients[0],
            joint_coefficient: joint.coefficients[k + 1],
        });
    }

    Ok(BiasReport {
        identity: spec.identity.clone(),
        approach: Approach::Valence,
        normalization: m.normalization(),
        results: alloc::vec![LabeledResult {
            label: String::from("wald-equal-coefficients"),
            significance: String::from(significance(wald.p_value)),
            result: wald,
            used: rated.len(),
            excluded: m.rows() - rated.len(),
            excluded_words: Vec::new(),
        }],
        coefficients: Some(coefficients),
        matrix_slice: None,
    })
}

/// One difference set per emotion, `AL_first(t) - AL_second(t)`.
pub fn emotion_difference_sets(m: &ActivationMatrix, spec: &PrimeSpec, lex: &Lexicon) -> Result<Vec<PairedDifferenceSet>> {
    require_approach(spec, Approach::Emotions)?;
    prime_columns(m, &spec.prime_words())?;
    let (first, second) = spec.pairs()[0].clone();
    let (c1, c2) = (m.col_of(&first).unwrap(), m.col_of(&second).unwrap());
    Emotion::ALL
        .iter()
        .map(|&emotion| {
            let mut differences = Vec::new();
            let mut pair_provenance = Vec::new();
            let mut excluded = Vec::new();
            for word in lex.emotion_words(emotion) {
                match m.row_of(word) {
                    Some(row) => {
                        differences.push(m.get(row, c1) - m.get(row, c2));
                        pair_provenance.push(((first.clone(), second.clone()), String::from(word)));
                    }
                    None => excluded.push(String::from(word)),
                }
            }
            if differences.is_empty() {
                return Err(Error::NoTargets(String::from(emotion.name())));
            }
            Ok(PairedDifferenceSet {
                label: String::from(emotion.name()),
                differences,
                pair_provenance,
                excluded,
            })
        })
        .collect()
}

/// Emotion bias: eight signed Wilcoxon results, positive when the first
/// prime of the pair is closer to the emotion's words.
pub fn emotion_bias(m: &ActivationMatrix, spec: &PrimeSpec, lex: &Lexicon) -> Result<BiasReport> {
    require_normalized(m, "emotion analysis")?;
    let sets = emotion_difference_sets(m, spec, lex)?;
    let mut results = Vec::with_capacity(sets.len());
    for set in &sets {
        let mut r = test_differences(set)?;
        // Emotion sets run to thousands of words; the report keeps the count.
        r.excluded_words.clear();
        results.push(r);
    }
    Ok(BiasReport {
        identity: spec.identity.clone(),
        approach: Approach::Emotions,
        normalization: m.normalization(),
        results,
        coefficients: None,
        matrix_slice: None,
    })
}
