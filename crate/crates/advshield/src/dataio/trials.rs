//! Trial lists: `<label> <enroll_id> <test_id> [provenance]` per line,
//! label 1 = target, 0 = nontarget, optional provenance `gen`/`adv`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Target,
    Nontarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Genuine,
    Adversarial,
}

/// An enrollment/test utterance pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub enroll_id: String,
    pub test_id: String,
    pub label: Label,
    pub provenance: Provenance,
}

impl Trial {
    pub fn genuine(enroll_id: impl Into<String>, test_id: impl Into<String>, label: Label) -> Self {
        Self {
            enroll_id: enroll_id.into(),
            test_id: test_id.into(),
            label,
            provenance: Provenance::Genuine,
        }
    }
}

pub fn load_trials(path: &Path) -> Result<Vec<Trial>> {
    let text = fs::read_to_string(path)?;
    let mut trials = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 3 or 4 space-separated fields, got {}", fields.len()),
            });
        }
        let label = match fields[0] {
            "1" => Label::Target,
            "0" => Label::Nontarget,
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("label must be 0 or 1, got `{other}`"),
                })
            }
        };
        let provenance = match fields.get(3) {
            None | Some(&"gen") => Provenance::Genuine,
            Some(&"adv") => Provenance::Adversarial,
            Some(other) => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("provenance must be gen or adv, got `{other}`"),
                })
            }
        };
        trials.push(Trial {
            enroll_id: fields[1].to_string(),
            test_id: fields[2].to_string(),
            label,
            provenance,
        });
    }
    Ok(trials)
}

pub fn save_trials(path: &Path, trials: &[Trial]) -> Result<()> {
    let mut out = String::new();
    for t in trials {
        let label = match t.label {
            Label::Target => "1",
            Label::Nontarget => "0",
        };
        let prov = match t.provenance {
            Provenance::Genuine => "gen",
            Provenance::Adversarial => "adv",
        };
        out.push_str(&format!("{label} {} {} {prov}\n", t.enroll_id, t.test_id));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> std::path::PathBuf {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trials.txt");
        std::fs::write(&p, content).unwrap();
        std::mem::forget(dir);
        p
    }

    #[test]
    fn parses_target_and_nontarget() {
        let p = write_tmp("1 spk1_u1 spk1_u2\n0 spk1_u1 spk2_u1\n");
        let trials = load_trials(&p).unwrap();
        assert_eq!(trials.len(), 2);
        assert_eq!(trials[0].label, Label::Target);
        assert_eq!(trials[0].enroll_id, "spk1_u1");
        assert_eq!(trials[1].label, Label::Nontarget);
        assert_eq!(trials[1].provenance, Provenance::Genuine);
    }

    #[test]
    fn bad_label_reports_line_number() {
        let p = write_tmp("2 a b\n");
        match load_trials(&p) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error at line 1, got {other:?}"),
        }
    }

    #[test]
    fn preserves_file_order_and_round_trips() {
        let p = write_tmp("0 a b\n1 c d adv\n1 e f gen\n");
        let trials = load_trials(&p).unwrap();
        assert_eq!(trials[1].provenance, Provenance::Adversarial);
        let p2 = write_tmp("");
        save_trials(&p2, &trials).unwrap();
        assert_eq!(load_trials(&p2).unwrap(), trials);
    }
}
