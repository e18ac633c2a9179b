use serde::{Deserialize, Serialize};

use crate::lang::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Mlm,
    Aer,
    Dae,
    Bt,
    /// Supervised translation on paired data.
    Finetune,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Mlm => "mlm",
            Objective::Aer => "aer",
            Objective::Dae => "dae",
            Objective::Bt => "bt",
            Objective::Finetune => "finetune",
        }
    }
}

/// One serialized training unit, emitted as a JSON line.
///
/// For MLM the target is aligned with the input and holds the pad id
/// everywhere except masked positions. For AER the target is the label
/// sequence. For DAE and BT it is the clean token sequence and the input
/// starts with a `<LANG>` token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub objective: Objective,
    pub src_lang: Language,
    pub tgt_lang: Language,
    pub input: Vec<u32>,
    pub target: Vec<u32>,
    pub epoch: u32,
}

impl TrainingExample {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("training examples always serialize")
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
