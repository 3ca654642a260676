use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::Condition;
use crate::corpus::{Corpus, Dataset, Mode, TaskKind};
use crate::error::{Error, Result};

/// Task split of one leave-one-subject-out fold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub test_participant: String,
    pub condition: Condition,
    pub mode: Mode,
    pub train_tasks: Vec<String>,
    pub validation_tasks: Vec<String>,
    pub test_tasks: Vec<String>,
}

/// One fold per participant with Home tasks, in participant-id order.
///
/// The test set is every Home task of the held-out participant. Every other
/// participant with Home tasks gives up its lexicographically smallest
/// bimanual Home task for validation; the rest of their tasks train, minus
/// HomeLab tasks under `HomeOnly`.
pub fn make_folds(corpus: &Corpus, condition: Condition, mode: Mode) -> Result<Vec<FoldSpec>> {
    let mut ids: Vec<&str> = corpus.participants.iter().map(|p| p.id.as_str()).collect();
    ids.sort_unstable();
    let home_ids: Vec<&str> = ids
        .iter()
        .copied()
        .filter(|id| corpus.tasks_of(id).any(|t| t.dataset == Dataset::Home))
        .collect();

    let mut validation_of = std::collections::BTreeMap::new();
    for id in &home_ids {
        let task = corpus
            .tasks_of(id)
            .filter(|t| t.dataset == Dataset::Home && t.kind == TaskKind::Bimanual)
            .map(|t| t.id.as_str())
            .min()
            .ok_or_else(|| Error::invalid(format!("participant {id} has no bimanual Home task for validation")))?;
        validation_of.insert(*id, task.to_string());
    }

    let mut folds = Vec::with_capacity(home_ids.len());
    for test in &home_ids {
        let mut train = Vec::new();
        let mut validation = Vec::new();
        for id in &ids {
            if id == test {
                continue;
            }
            let val = validation_of.get(id);
            if let Some(v) = val {
                validation.push(v.clone());
            }
            for t in corpus.tasks_of(id) {
                if Some(&t.id) == val {
                    continue;
                }
                if condition == Condition::HomeOnly && t.dataset == Dataset::HomeLab {
                    continue;
                }
                train.push(t.id.clone());
            }
        }
        let mut test_tasks: Vec<String> = corpus
            .tasks_of(test)
            .filter(|t| t.dataset == Dataset::Home)
            .map(|t| t.id.clone())
            .collect();
        train.sort();
        validation.sort();
        test_tasks.sort();
        let fold = FoldSpec {
            test_participant: test.to_string(),
            condition,
            mode,
            train_tasks: train,
            validation_tasks: validation,
            test_tasks,
        };
        verify_fold(corpus, &fold)?;
        folds.push(fold);
    }
    Ok(folds)
}

/// Checks the split invariants of one fold against the corpus.
pub fn verify_fold(corpus: &Corpus, fold: &FoldSpec) -> Result<()> {
    let fail = |m: String| Err(Error::invalid(format!("fold {}: {m}", fold.test_participant)));
    let owner = |id: &str| corpus.task(id).map(|t| t.participant_id.as_str());
    for id in fold.train_tasks.iter().chain(&fold.validation_tasks) {
        match owner(id) {
            None => return fail(format!("unknown task {id}")),
            Some(p) if p == fold.test_participant => return fail(format!("task {id} of the test participant leaks")),
            _ => {}
        }
    }
    let train: BTreeSet<&str> = fold.train_tasks.iter().map(String::as_str).collect();
    for v in &fold.validation_tasks {
        if train.contains(v.as_str()) {
            return fail(format!("task {v} is in both train and validation"));
        }
        let t = corpus.task(v).expect("checked above");
        if t.dataset != Dataset::Home || t.kind != TaskKind::Bimanual {
            return fail(format!("validation task {v} is not a bimanual Home task"));
        }
    }
    let mut per_participant = std::collections::BTreeMap::new();
    for v in &fold.validation_tasks {
        *per_participant.entry(owner(v).unwrap()).or_insert(0) += 1;
    }
    for p in &corpus.participants {
        let has_home = corpus.tasks_of(&p.id).any(|t| t.dataset == Dataset::Home);
        let count = per_participant.get(p.id.as_str()).copied().unwrap_or(0);
        let expected = usize::from(has_home && p.id != fold.test_participant);
        if count != expected {
            return fail(format!(
                "participant {} has {count} validation tasks, expected {expected}",
                p.id
            ));
        }
    }
    if fold.condition == Condition::HomeOnly {
        if let Some(t) = fold
            .train_tasks
            .iter()
            .find(|id| corpus.task(id).map(|t| t.dataset) == Some(Dataset::HomeLab))
        {
            return fail(format!("HomeLab task {t} in a home-only train set"));
        }
    }
    let expected_test: BTreeSet<&str> = corpus
        .tasks_of(&fold.test_participant)
        .filter(|t| t.dataset == Dataset::Home)
        .map(|t| t.id.as_str())
        .collect();
    let test: BTreeSet<&str> = fold.test_tasks.iter().map(String::as_str).collect();
    if test != expected_test {
        return fail("test set differs from the participant's Home tasks".into());
    }
    Ok(())
}
