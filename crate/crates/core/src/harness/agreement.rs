use std::collections::BTreeMap;

use crate::corpus::{LabelRow, Mode, Role, Side};
use crate::error::{Error, Result};
use crate::metrics::{agreement_summary, AgreementSummary, AgreementTable};

type Key = (Option<String>, usize, Side);

fn keyed(rows: &[LabelRow]) -> BTreeMap<Key, &LabelRow> {
    rows.iter()
        .map(|r| ((r.task.clone(), r.label.frame_index, r.label.hand_side), r))
        .collect()
}

/// Agreement of two raters over the (task, frame, side) keys they share.
///
/// Interaction mode compares the binary interaction flag. Role mode compares
/// manipulator against stabilizer and only counts observations both raters
/// gave a role.
pub fn rater_agreement(a: &[LabelRow], b: &[LabelRow], mode: Mode) -> Result<AgreementSummary> {
    let kb = keyed(b);
    let mut pairs = Vec::new();
    for (key, ra) in keyed(a) {
        let Some(rb) = kb.get(&key) else { continue };
        match mode {
            Mode::Interaction => pairs.push((usize::from(ra.label.interaction), usize::from(rb.label.interaction))),
            Mode::Role => {
                if ra.label.role != Role::None && rb.label.role != Role::None {
                    pairs.push((
                        usize::from(ra.label.role == Role::Manipulator),
                        usize::from(rb.label.role == Role::Manipulator),
                    ));
                }
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::invalid("the two annotation files share no observations"));
    }
    Ok(agreement_summary(&AgreementTable::from_pairs(2, &pairs)?))
}
