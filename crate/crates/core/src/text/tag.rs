use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

macro_rules! penn_tags {
    ($($variant:ident => $text:literal),* $(,)?) => {
        /// Penn Treebank part-of-speech tags.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum PosTag {
            $($variant),*
        }

        impl PosTag {
            pub const ALL: &'static [PosTag] = &[$(PosTag::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(PosTag::$variant => $text),*
                }
            }
        }

        impl FromStr for PosTag {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Error> {
                match s {
                    $($text => Ok(PosTag::$variant),)*
                    "-LRB-" => Ok(PosTag::LParen),
                    "-RRB-" => Ok(PosTag::RParen),
                    other => Err(Error::invalid(format!("unknown POS tag `{other}`"))),
                }
            }
        }
    };
}

penn_tags! {
    CC => "CC", CD => "CD", DT => "DT", EX => "EX", FW => "FW", IN => "IN",
    JJ => "JJ", JJR => "JJR", JJS => "JJS", LS => "LS", MD => "MD",
    NN => "NN", NNS => "NNS", NNP => "NNP", NNPS => "NNPS", PDT => "PDT",
    POS => "POS", PRP => "PRP", PRPS => "PRP$", RB => "RB", RBR => "RBR",
    RBS => "RBS", RP => "RP", SYM => "SYM", TO => "TO", UH => "UH",
    VB => "VB", VBD => "VBD", VBG => "VBG", VBN => "VBN", VBP => "VBP",
    VBZ => "VBZ", WDT => "WDT", WP => "WP", WPS => "WP$", WRB => "WRB",
    Period => ".", Comma => ",", Colon => ":", LParen => "(", RParen => ")",
    OpenQuote => "``", CloseQuote => "''", Hash => "#", Dollar => "$",
}

impl PosTag {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_noun(self) -> bool {
        matches!(self, PosTag::NN | PosTag::NNS | PosTag::NNP | PosTag::NNPS)
    }

    pub fn is_verb(self) -> bool {
        matches!(
            self,
            PosTag::VB | PosTag::VBD | PosTag::VBG | PosTag::VBN | PosTag::VBP | PosTag::VBZ
        )
    }

    pub fn is_adjective(self) -> bool {
        matches!(self, PosTag::JJ | PosTag::JJR | PosTag::JJS)
    }

    pub fn is_adverb(self) -> bool {
        matches!(self, PosTag::RB | PosTag::RBR | PosTag::RBS)
    }

    pub fn is_pronoun(self) -> bool {
        matches!(self, PosTag::PRP | PosTag::PRPS | PosTag::WP | PosTag::WPS)
    }

    pub fn is_punct(self) -> bool {
        matches!(
            self,
            PosTag::Period
                | PosTag::Comma
                | PosTag::Colon
                | PosTag::LParen
                | PosTag::RParen
                | PosTag::OpenQuote
                | PosTag::CloseQuote
                | PosTag::Hash
                | PosTag::Dollar
        )
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
