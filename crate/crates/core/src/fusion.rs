//! Rules turning raw model outputs into one decision per (frame, hand).

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{ContactState, Mode, Side};
use crate::error::{Error, Result};

/// Probabilities at or above this value are positive.
pub const THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Forest,
    WindowModel,
    ContactDetector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandPrediction {
    pub task_id: String,
    pub frame_index: usize,
    pub hand_side: Side,
    /// Absent when no detection was available; the decision is then negative.
    pub probability: Option<f64>,
    pub decision: bool,
    pub source: Source,
}

impl HandPrediction {
    pub fn from_probability(task_id: &str, frame_index: usize, hand_side: Side, p: f64, source: Source) -> Self {
        HandPrediction {
            task_id: task_id.to_string(),
            frame_index,
            hand_side,
            probability: Some(p),
            decision: decide(p),
            source,
        }
    }

    /// A hand without a box: no interaction and no role.
    pub fn missing_box(task_id: &str, frame_index: usize, hand_side: Side, source: Source) -> Self {
        HandPrediction {
            task_id: task_id.to_string(),
            frame_index,
            hand_side,
            probability: None,
            decision: false,
            source,
        }
    }

    pub fn is_consistent(&self) -> bool {
        match self.probability {
            Some(p) => self.decision == decide(p),
            None => !self.decision,
        }
    }
}

pub fn decide(probability: f64) -> bool {
    probability >= THRESHOLD
}

/// Arithmetic mean of the predictions available for one hand.
pub fn average_duplicates(probabilities: &[f64]) -> Result<f64> {
    if probabilities.is_empty() {
        return Err(Error::invalid("no probabilities to average"));
    }
    if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    let mean = probabilities.iter().sum::<f64>() / probabilities.len() as f64;
    // Rounding can push the mean of equal values a hair outside their range.
    let lo = probabilities.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = probabilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(mean.clamp(lo, hi))
}

pub fn contact_to_interaction(state: ContactState) -> bool {
    state == ContactState::PortableObject
}

/// Parses a contact-state string and maps it to an interaction decision.
pub fn contact_str_to_interaction(state: &str) -> Result<bool> {
    state
        .parse::<ContactState>()
        .map(contact_to_interaction)
        .map_err(Error::invalid)
}

/// One decision of a window-level model over `[start, start + len)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDecision {
    pub start: usize,
    pub len: usize,
    pub decision: bool,
}

/// Spreads window decisions over frames. A frame is positive when any
/// covering window is positive; in role mode positive means manipulation,
/// so manipulation wins over stabilization. Frames no window covers are
/// negative.
pub fn windows_to_frames(windows: &[WindowDecision], task_len: usize) -> Result<Vec<bool>> {
    let mut sorted: Vec<WindowDecision> = windows.to_vec();
    sorted.sort_by_key(|w| (w.start, w.len, w.decision));
    for w in &sorted {
        if w.len == 0 {
            return Err(Error::invalid(format!("window at {} has zero length", w.start)));
        }
    }
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b.start < a.start + a.len && a.len != b.len {
            return Err(Error::invalid(format!(
                "overlapping windows of different lengths: [{}, {}) and [{}, {})",
                a.start,
                a.start + a.len,
                b.start,
                b.start + b.len
            )));
        }
    }
    let mut frames = vec![false; task_len];
    let mut covered = vec![false; task_len];
    for w in &sorted {
        let end = (w.start + w.len).min(task_len);
        for f in w.start.min(end)..end {
            covered[f] = true;
            frames[f] |= w.decision;
        }
    }
    let uncovered = covered.iter().filter(|c| !**c).count();
    if uncovered > 0 {
        log::debug!("{uncovered} of {task_len} frames covered by no window; decided negative");
    }
    Ok(frames)
}

/// Record of an external window-model predictions file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowRecord {
    pub task: String,
    pub side: Side,
    pub start: usize,
    pub len: usize,
    pub mode: Mode,
    pub decision: bool,
}

pub type WindowKey = (String, Side);

/// Reads window predictions for `mode`, grouped by (task, side). Records of
/// other modes are skipped.
pub fn parse_windows(text: &str, location: &str, mode: Mode) -> Result<BTreeMap<WindowKey, Vec<WindowDecision>>> {
    let mut out: BTreeMap<WindowKey, Vec<WindowDecision>> = BTreeMap::new();
    for (i, line) in text.as_bytes().lines().enumerate() {
        let line = line.map_err(|e| Error::parse(format!("{location}:{}", i + 1), e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: WindowRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(format!("{location}:{}", i + 1), e.to_string()))?;
        if r.mode != mode {
            continue;
        }
        out.entry((r.task, r.side)).or_default().push(WindowDecision {
            start: r.start,
            len: r.len,
            decision: r.decision,
        });
    }
    Ok(out)
}

pub fn load_windows(path: &Path, mode: Mode) -> Result<BTreeMap<WindowKey, Vec<WindowDecision>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_windows(&text, &path.display().to_string(), mode)
}

pub fn windows_to_jsonl(records: &[WindowRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("window record serializes"));
        s.push('\n');
    }
    s
}

/// Standard window length of a mode; windows advance by half their length.
pub fn window_len(mode: Mode) -> usize {
    match mode {
        Mode::Interaction => 32,
        Mode::Role => 16,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(start: usize, len: usize, decision: bool) -> WindowDecision {
        WindowDecision { start, len, decision }
    }

    #[test]
    fn averaging_examples() {
        let p = average_duplicates(&[0.6, 0.3]).unwrap();
        assert!((p - 0.45).abs() < 1e-15);
        assert!(!decide(p));
        assert_eq!(average_duplicates(&[0.5]).unwrap(), 0.5);
        assert!(decide(0.5));
        assert_eq!(average_duplicates(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(average_duplicates(&[]).is_err());
        assert!(average_duplicates(&[1.2]).is_err());
    }

    #[test]
    fn missing_box_is_negative() {
        let p = HandPrediction::missing_box("T", 3, Side::Left, Source::Forest);
        assert!(!p.decision);
        assert!(p.probability.is_none());
        assert!(p.is_consistent());
    }

    #[test]
    fn overlap_or_rule() {
        let f = windows_to_frames(&[w(0, 32, false), w(16, 32, true)], 48).unwrap();
        assert!(f[..16].iter().all(|&d| !d));
        assert!(f[16..].iter().all(|&d| d));
        let f = windows_to_frames(&[w(0, 32, false), w(16, 32, false)], 60).unwrap();
        assert_eq!(f.len(), 60);
        assert!(f.iter().all(|&d| !d));
    }

    #[test]
    fn mismatched_overlap_rejected() {
        assert!(windows_to_frames(&[w(0, 32, false), w(16, 16, true)], 48).is_err());
        // disjoint windows of different length are fine
        assert!(windows_to_frames(&[w(0, 16, false), w(16, 32, true)], 48).is_ok());
    }

    #[test]
    fn contact_mapping() {
        assert!(contact_to_interaction(ContactState::PortableObject));
        for s in [
            ContactState::NoContact,
            ContactState::SelfContact,
            ContactState::OtherPerson,
            ContactState::NonPortableObject,
        ] {
            assert!(!contact_to_interaction(s));
        }
        assert!(contact_str_to_interaction("teleport").is_err());
    }

    #[test]
    fn windows_file_round_trip() {
        let recs = vec![
            WindowRecord {
                task: "T1".into(),
                side: Side::Left,
                start: 0,
                len: 32,
                mode: Mode::Interaction,
                decision: true,
            },
            WindowRecord {
                task: "T1".into(),
                side: Side::Left,
                start: 0,
                len: 16,
                mode: Mode::Role,
                decision: false,
            },
        ];
        let text = windows_to_jsonl(&recs);
        let m = parse_windows(&text, "w", Mode::Interaction).unwrap();
        assert_eq!(m[&("T1".to_string(), Side::Left)], vec![w(0, 32, true)]);
        assert!(parse_windows("{\"task\":1}", "w", Mode::Role).is_err());
    }
}
