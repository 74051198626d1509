//! Parsers for association norms, lexicons, vocabularies and prime specs.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::str::FromStr;

use wordassoc_core::{Approach, Emotion, Lexicon, NormRecord, PrimeSpec, Primes, TargetSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormFormat {
    /// `cue R1 R2 R3`, one row per participant, `NA` for missing responses.
    Trial,
    /// `cue response count`.
    Aggregated,
}

impl NormFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            NormFormat::Trial => "trial",
            NormFormat::Aggregated => "aggregated",
        }
    }
}

impl FromStr for NormFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "trial" => Ok(NormFormat::Trial),
            "aggregated" => Ok(NormFormat::Aggregated),
            other => Err(format!("unknown norm format '{other}' (expected trial or aggregated)")),
        }
    }
}

pub fn normalize_token(raw: &str) -> String {
    raw.trim().to_lowercase()
}

/// Reads lines with 1-based numbers, skipping blank ones.
fn numbered_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| {
            line.map(|l| (i + 1, l.trim_end_matches('\r').to_owned()))
                .map_err(|e| Error::parse(i + 1, e.to_string()))
        })
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

fn token(line: usize, raw: &str, what: &str) -> Result<String> {
    let t = normalize_token(raw);
    if t.is_empty() {
        return Err(Error::parse(line, format!("empty {what}")));
    }
    Ok(t)
}

/// Parses a norms file into aggregated records sorted by (cue, response).
pub fn parse_trials(reader: impl BufRead, format: NormFormat) -> Result<Vec<NormRecord>> {
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut first = true;
    for item in numbered_lines(reader) {
        let (no, line) = item?;
        let cells: Vec<&str> = line.split('\t').collect();
        match format {
            NormFormat::Trial => {
                if std::mem::take(&mut first) && cells[0] == "cue" {
                    continue;
                }
                if cells.len() != 4 {
                    return Err(Error::parse(no, format!("expected 4 columns, found {}", cells.len())));
                }
                let cue = token(no, cells[0], "cue")?;
                for raw in &cells[1..] {
                    // "NA" is matched before trimming or lowercasing.
                    if *raw == "NA" || raw.trim().is_empty() {
                        continue;
                    }
                    *counts.entry((cue.clone(), normalize_token(raw))).or_insert(0) += 1;
                }
            }
            NormFormat::Aggregated => {
                if cells.len() != 3 {
                    return Err(Error::parse(no, format!("expected 3 columns, found {}", cells.len())));
                }
                let cue = token(no, cells[0], "cue")?;
                let response = token(no, cells[1], "response")?;
                let count: i64 = cells[2]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(no, format!("count '{}' is not an integer", cells[2])))?;
                if count <= 0 {
                    return Err(Error::parse(no, format!("count must be positive, got {count}")));
                }
                let slot = counts.entry((cue, response)).or_insert(0);
                *slot = slot
                    .checked_add(count as u64)
                    .ok_or_else(|| Error::parse(no, "count overflow"))?;
            }
        }
    }
    counts
        .into_iter()
        .map(|((cue, response), count)| NormRecord::new(cue, response, count).map_err(Error::from))
        .collect()
}

/// One word per line; blank lines ignored.
pub fn load_vocabulary(reader: impl BufRead) -> Result<BTreeSet<String>> {
    numbered_lines(reader)
        .map(|item| item.map(|(_, line)| normalize_token(&line)))
        .collect()
}

/// `word<TAB>valence`, extra columns (arousal, dominance) ignored. A first
/// line whose value column is not numeric is taken as a header.
pub fn load_valence(reader: impl BufRead, lex: &mut Lexicon) -> Result<()> {
    let mut first = true;
    for item in numbered_lines(reader) {
        let (no, line) = item?;
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() < 2 {
            return Err(Error::parse(no, "expected word<TAB>valence"));
        }
        let parsed = cells[1].trim().parse::<f64>();
        if std::mem::take(&mut first) && parsed.is_err() {
            continue;
        }
        let value = parsed.map_err(|_| Error::parse(no, format!("valence '{}' is not a number", cells[1])))?;
        let word = token(no, cells[0], "word")?;
        lex.insert_valence(word, value)
            .map_err(|e| Error::parse(no, e.to_string()))?;
    }
    Ok(())
}

/// NRC rows `word<TAB>emotion<TAB>flag`. The NRC sentiment categories
/// `positive` and `negative` share the file and are skipped.
pub fn load_emotions(reader: impl BufRead, lex: &mut Lexicon) -> Result<()> {
    for item in numbered_lines(reader) {
        let (no, line) = item?;
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != 3 {
            return Err(Error::parse(no, format!("expected 3 columns, found {}", cells.len())));
        }
        let name = cells[1].trim();
        if name == "positive" || name == "negative" {
            continue;
        }
        let emotion = Emotion::from_str(name).map_err(|_| Error::parse(no, format!("unknown emotion '{name}'")))?;
        match cells[2].trim() {
            "1" => lex.insert_emotion(emotion, token(no, cells[0], "word")?),
            "0" => {}
            other => return Err(Error::parse(no, format!("flag must be 0 or 1, got '{other}'"))),
        }
    }
    Ok(())
}

pub fn load_lexicons(valence: impl BufRead, emotions: impl BufRead) -> Result<Lexicon> {
    let mut lex = Lexicon::new();
    load_valence(valence, &mut lex)?;
    load_emotions(emotions, &mut lex)?;
    Ok(lex)
}

fn spec_error(msg: impl Into<String>) -> Error {
    Error::Config(format!("prime spec: {}", msg.into()))
}

fn word_list(value: &toml::Value, what: &str) -> Result<Vec<String>> {
    let items = value
        .as_array()
        .ok_or_else(|| spec_error(format!("{what} must be a list of words")))?;
    items
        .iter()
        .map(|v| {
            v.as_str()
                .map(normalize_token)
                .ok_or_else(|| spec_error(format!("{what} must contain only strings")))
        })
        .collect()
}

/// Reads a TOML prime spec:
///
/// ```toml
/// identity = "gender"
/// approach = "stereotypes"
/// prime_pairs = [["woman", "man"]]
/// [targets]
/// female = ["gentle"]
/// male = ["forceful"]
/// ```
///
/// Valence specs use `primes = [...]`. Target sets keep file order.
pub fn load_prime_spec(text: &str) -> Result<PrimeSpec> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| spec_error(e.to_string()))?;
    for key in doc.keys() {
        if !matches!(key.as_str(), "identity" | "approach" | "prime_pairs" | "primes" | "targets") {
            return Err(spec_error(format!("unknown key '{key}'")));
        }
    }
    let identity = doc
        .get("identity")
        .and_then(toml::Value::as_str)
        .ok_or_else(|| spec_error("missing string field 'identity'"))?;
    let approach_name = doc
        .get("approach")
        .and_then(toml::Value::as_str)
        .ok_or_else(|| spec_error("missing string field 'approach'"))?;
    let approach = Approach::parse(approach_name).ok_or_else(|| spec_error(format!("unknown approach '{approach_name}'")))?;

    let primes = match (doc.get("prime_pairs"), doc.get("primes")) {
        (Some(_), Some(_)) => return Err(spec_error("give either 'prime_pairs' or 'primes', not both")),
        (Some(pairs), None) => {
            let pairs = pairs
                .as_array()
                .ok_or_else(|| spec_error("prime_pairs must be a list of pairs"))?
                .iter()
                .map(|p| {
                    let words = word_list(p, "each prime pair")?;
                    match <[String; 2]>::try_from(words) {
                        Ok([a, b]) => Ok((a, b)),
                        Err(_) => Err(spec_error("each prime pair must have exactly two words")),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Primes::Pairs(pairs)
        }
        (None, Some(list)) => Primes::Categories(word_list(list, "primes")?),
        (None, None) => return Err(spec_error("missing 'prime_pairs' or 'primes'")),
    };

    let targets = match doc.get("targets") {
        None => Vec::new(),
        Some(t) => t
            .as_table()
            .ok_or_else(|| spec_error("targets must be a table of named word lists"))?
            .iter()
            .map(|(name, words)| {
                Ok(TargetSet {
                    name: name.clone(),
                    words: word_list(words, &format!("targets.{name}"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };

    PrimeSpec::new(identity, approach, primes, targets).map_err(|e| spec_error(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trials(text: &str) -> Result<Vec<NormRecord>> {
        parse_trials(text.as_bytes(), NormFormat::Trial)
    }

    fn rec(c: &str, r: &str, n: u64) -> NormRecord {
        NormRecord::new(c, r, n).unwrap()
    }

    #[test]
    fn trial_rows_expand_and_sum() {
        assert_eq!(trials("dog\tcat\tbone\tNA\n").unwrap(), vec![rec("dog", "bone", 1), rec("dog", "cat", 1)]);
        assert_eq!(trials("dog\tcat\tNA\tNA\ndog\tcat\tNA\tNA\n").unwrap(), vec![rec("dog", "cat", 2)]);
    }

    #[test]
    fn trial_header_and_normalization() {
        let out = trials("cue\tR1\tR2\tR3\n  Dog \t Cat\tna\tNA\n").unwrap();
        // Lowercase "na" is a real token; only the exact "NA" is missing.
        assert_eq!(out, vec![rec("dog", "cat", 1), rec("dog", "na", 1)]);
    }

    #[test]
    fn multi_word_responses_stay_whole() {
        let out = trials("ice\tIce Cream\tNA\tNA\n").unwrap();
        assert_eq!(out, vec![rec("ice", "ice cream", 1)]);
    }

    #[test]
    fn wrong_column_count_names_the_line() {
        let err = trials("dog\tcat\tbone\tNA\ndog\tcat\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn aggregated_rows() {
        let agg = |t: &str| parse_trials(t.as_bytes(), NormFormat::Aggregated);
        assert_eq!(agg("dog\tcat\t20\n").unwrap(), vec![rec("dog", "cat", 20)]);
        assert!(matches!(agg("dog\tcat\t0\n").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(agg("dog\tcat\t-3\n").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(agg("a\tb\t1\ndog\tcat\tx\n").unwrap_err(), Error::Parse { line: 2, .. }));
    }

    #[test]
    fn lexicons() {
        let lex = load_lexicons("joyful\t0.95\n".as_bytes(), "rage\tanger\t1\nrage\tjoy\t0\n".as_bytes()).unwrap();
        assert_eq!(lex.valence("joyful"), Some(0.95));
        assert!(lex.has_emotion(Emotion::Anger, "rage"));
        assert!(!lex.has_emotion(Emotion::Joy, "rage"));

        let err = load_lexicons("ok\t0.5\nbad\t1.3\n".as_bytes(), "".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(load_lexicons("".as_bytes(), "rage\tfury\t1\n".as_bytes()).is_err());
        assert!(load_lexicons("a\t0.1\na\t0.2\n".as_bytes(), "".as_bytes()).is_err());
    }

    #[test]
    fn valence_header_and_extra_columns() {
        let mut lex = Lexicon::new();
        load_valence("Word\tValence\tArousal\tDominance\nkind\t0.875\t0.3\t0.6\n".as_bytes(), &mut lex).unwrap();
        assert_eq!(lex.valence("kind"), Some(0.875));
    }

    #[test]
    fn nrc_sentiment_rows_skipped() {
        let mut lex = Lexicon::new();
        load_emotions("abandon\tnegative\t1\nabandon\tfear\t1\n".as_bytes(), &mut lex).unwrap();
        assert!(lex.has_emotion(Emotion::Fear, "abandon"));
    }

    #[test]
    fn prime_specs() {
        let gender = load_prime_spec(
            r#"
identity = "gender"
approach = "stereotypes"
prime_pairs = [["woman", "man"], ["Female", "male"]]
[targets]
male = ["forceful"]
female = ["gentle"]
"#,
        )
        .unwrap();
        assert_eq!(gender.prime_words(), vec!["woman", "man", "female", "male"]);
        // File order, not alphabetical.
        assert_eq!(gender.targets[0].name, "male");

        let religion = load_prime_spec(
            "identity = \"religion\"\napproach = \"valence\"\nprimes = [\"christian\", \"muslim\", \"buddhist\", \"jewish\", \"athiest\"]\n",
        )
        .unwrap();
        assert_eq!(religion.prime_words().len(), 5);

        let politics =
            load_prime_spec("identity = \"politics\"\napproach = \"emotions\"\nprime_pairs = [[\"democrat\", \"republican\"]]\n").unwrap();
        assert_eq!(politics.approach, Approach::Emotions);

        let one_set = "identity = \"g\"\napproach = \"stereotypes\"\nprime_pairs = [[\"a\", \"b\"]]\n[targets]\nf = [\"x\"]\n";
        assert!(load_prime_spec(one_set).is_err());
        let two_primes = "identity = \"r\"\napproach = \"valence\"\nprimes = [\"a\", \"b\"]\n";
        assert!(load_prime_spec(two_primes).is_err());
        assert!(load_prime_spec("identity = \"r\"\napproach = \"valence\"\nprimes = [\"a\", \"b\", \"c\"]\ntypo = 1\n").is_err());
    }
}
