//! Word-level valence ratings and emotion memberships.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight basic emotions of Plutchik's wheel, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Anticipation,
    Disgust,
    Fear,
    Joy,
    Sadness,
    Surprise,
    Trust,
}

impl Emotion {
    pub const ALL: [Emotion; 8] = [
        Emotion::Anger,
        Emotion::Anticipation,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Surprise,
        Emotion::Trust,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Anticipation => "anticipation",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
            Emotion::Trust => "trust",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown emotion name '{s}'")))
    }
}

/// Valence ratings in `[0, 1]` and emotion-to-word sets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    valence: BTreeMap<String, f64>,
    emotions: BTreeMap<Emotion, BTreeSet<String>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a valence rating. Duplicates and values outside `[0, 1]` are rejected.
    pub fn insert_valence(&mut self, word: impl Into<String>, value: f64) -> Result<()> {
        let word = word.into();
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::validation(format!(
                "valence for '{word}' is {value}, outside [0, 1]"
            )));
        }
        if self.valence.contains_key(&word) {
            return Err(Error::validation(format!("duplicate valence entry for '{word}'")));
        }
        self.valence.insert(word, value);
        Ok(())
    }

    /// Marks `word` as eliciting `emotion`. Set semantics: repeats are no-ops.
    pub fn insert_emotion(&mut self, emotion: Emotion, word: impl Into<String>) {
        self.emotions.entry(emotion).or_default().insert(word.into());
    }

    pub fn valence(&self, word: &str) -> Option<f64> {
        self.valence.get(word).copied()
    }

    pub fn valence_map(&self) -> &BTreeMap<String, f64> {
        &self.valence
    }

    /// Words associated with `emotion`; empty when none were loaded.
    pub fn emotion_words(&self, emotion: Emotion) -> impl Iterator<Item = &str> {
        self.emotions
            .get(&emotion)
            .into_iter()
            .flat_map(|set| set.iter().map(String::as_str))
    }

    pub fn has_emotion(&self, emotion: Emotion, word: &str) -> bool {
        self.emotions.get(&emotion).is_some_and(|s| s.contains(word))
    }
}
