//! The ten-language set used throughout the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the ten languages of the corpus.
///
/// The variant order is the canonical column order used by every report
/// table and by deterministic dataset builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Lang {
    En,
    Sw,
    Zh,
    Bn,
    De,
    Es,
    Fr,
    Ja,
    Ru,
    Th,
}

impl Lang {
    /// All languages in canonical column order.
    pub const ALL: [Lang; 10] = [
        Lang::En,
        Lang::Sw,
        Lang::Zh,
        Lang::Bn,
        Lang::De,
        Lang::Es,
        Lang::Fr,
        Lang::Ja,
        Lang::Ru,
        Lang::Th,
    ];

    /// Lowercase ISO 639-1 code.
    pub fn code(self) -> &'static str {
        match self {
            Lang::En => "en",
            Lang::Sw => "sw",
            Lang::Zh => "zh",
            Lang::Bn => "bn",
            Lang::De => "de",
            Lang::Es => "es",
            Lang::Fr => "fr",
            Lang::Ja => "ja",
            Lang::Ru => "ru",
            Lang::Th => "th",
        }
    }

    /// English display name, used when a prompt names the answer language.
    pub fn display_name(self) -> &'static str {
        match self {
            Lang::En => "English",
            Lang::Sw => "Swahili",
            Lang::Zh => "Chinese",
            Lang::Bn => "Bengali",
            Lang::De => "German",
            Lang::Es => "Spanish",
            Lang::Fr => "French",
            Lang::Ja => "Japanese",
            Lang::Ru => "Russian",
            Lang::Th => "Thai",
        }
    }

    /// Short table header label (`En`, `Sw`, ...).
    pub fn label(self) -> &'static str {
        match self {
            Lang::En => "En",
            Lang::Sw => "Sw",
            Lang::Zh => "Zh",
            Lang::Bn => "Bn",
            Lang::De => "De",
            Lang::Es => "Es",
            Lang::Fr => "Fr",
            Lang::Ja => "Ja",
            Lang::Ru => "Ru",
            Lang::Th => "Th",
        }
    }
}

/// A language code outside the configured ten-language set.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language code: {0:?}")]
pub struct UnknownLanguage(pub String);

impl FromStr for Lang {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Lang::ALL
            .into_iter()
            .find(|l| l.code() == lower)
            .ok_or_else(|| UnknownLanguage(s.to_string()))
    }
}

impl TryFrom<String> for Lang {
    type Error = UnknownLanguage;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Lang> for String {
    fn from(l: Lang) -> String {
        l.code().to_string()
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Parse a comma- or space-separated language list; `all` expands to the
/// full ten-language set.
pub fn parse_lang_list(spec: &str) -> Result<Vec<Lang>, UnknownLanguage> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(Lang::ALL.to_vec());
    }
    spec.split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_codes() {
        for lang in Lang::ALL {
            assert_eq!(lang.code().parse::<Lang>().unwrap(), lang);
        }
    }

    #[test]
    fn unknown_code_rejected() {
        assert!("tlh".parse::<Lang>().is_err());
    }

    #[test]
    fn lang_list_all() {
        assert_eq!(parse_lang_list("all").unwrap().len(), 10);
        assert_eq!(
            parse_lang_list("en,sw,th").unwrap(),
            vec![Lang::En, Lang::Sw, Lang::Th]
        );
    }
}
