//! Relation tags and the two classification tasks.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    True,
    False,
    Syn,
    Ant,
    Hyper,
    PartOf,
    Random,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::True => "TRUE",
            Label::False => "FALSE",
            Label::Syn => "SYN",
            Label::Ant => "ANT",
            Label::Hyper => "HYPER",
            Label::PartOf => "PART_OF",
            Label::Random => "RANDOM",
        }
    }

    /// The task-1 tag of a task-2 relation (`RANDOM` is the only unrelated one).
    pub fn relatedness(self) -> Label {
        match self {
            Label::True | Label::False => self,
            Label::Random => Label::False,
            _ => Label::True,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "TRUE" => Label::True,
            "FALSE" => Label::False,
            "SYN" => Label::Syn,
            "ANT" => Label::Ant,
            "HYPER" => Label::Hyper,
            "PART_OF" => Label::PartOf,
            "RANDOM" => Label::Random,
            other => return Err(format!("unknown relation tag `{other}`")),
        })
    }
}

/// Task 1 separates related from random pairs; task 2 names the relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Task1,
    Task2,
}

const TASK1_LABELS: [Label; 2] = [Label::True, Label::False];
const TASK2_LABELS: [Label; 5] = [
    Label::Syn,
    Label::Ant,
    Label::Hyper,
    Label::PartOf,
    Label::Random,
];

impl Task {
    /// Tags in report order: positive class first for task 1, and the
    /// relations followed by `RANDOM` for task 2.
    pub fn labels(self) -> &'static [Label] {
        match self {
            Task::Task1 => &TASK1_LABELS,
            Task::Task2 => &TASK2_LABELS,
        }
    }

    pub fn accepts(self, label: Label) -> bool {
        self.labels().contains(&label)
    }

    /// The task whose tag set contains every label, if any.
    pub fn infer<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Option<Task> {
        let mut t1 = true;
        let mut t2 = true;
        let mut any = false;
        for &l in labels {
            any = true;
            t1 &= Task::Task1.accepts(l);
            t2 &= Task::Task2.accepts(l);
        }
        match (any, t1, t2) {
            (true, true, false) => Some(Task::Task1),
            (true, false, true) => Some(Task::Task2),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Task1 => "task1",
            Task::Task2 => "task2",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "task1" | "1" => Ok(Task::Task1),
            "task2" | "2" => Ok(Task::Task2),
            other => Err(format!("unknown task `{other}` (expected task1 or task2)")),
        }
    }
}
