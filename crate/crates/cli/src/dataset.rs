use std::fs;
use std::path::Path;
use std::str::FromStr;

use irony_core::{Error, Result};

/// Subtask A is binary (ironic or not); subtask B has four classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    A,
    B,
}

impl Task {
    pub fn num_classes(self) -> usize {
        match self {
            Task::A => 2,
            Task::B => 4,
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Task::A),
            "b" => Ok(Task::B),
            other => Err(Error::Config(format!("unknown task {other:?} (expected a|b)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub id: String,
    pub label: Option<usize>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub task: Task,
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn labels(&self) -> Option<Vec<usize>> {
        self.records.iter().map(|r| r.label).collect()
    }
}

pub fn load_dataset(path: &Path, task: Task) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        line: 0,
        source: e,
    })?;
    parse_dataset(&text, path, task)
}

fn is_header(label: &str) -> bool {
    label.trim().eq_ignore_ascii_case("label")
}

/// Lines are `id<TAB>label<TAB>text` or `id<TAB>text`; blank lines are
/// skipped, CR before LF is ignored and a first line whose label column
/// reads `label` is taken as a header.
pub fn parse_dataset(text: &str, path: &Path, task: Task) -> Result<Dataset> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let c = task.num_classes();
    let mut records = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(3, '\t').collect();
        let record = match fields[..] {
            [id, label, text] => {
                if i == 0 && is_header(label) {
                    continue;
                }
                let value: usize = label
                    .trim()
                    .parse()
                    .map_err(|_| err(i + 1, format!("bad label {label:?}")))?;
                if value >= c {
                    return Err(err(i + 1, format!("label {value} out of range for {c} classes")));
                }
                Record {
                    id: id.to_string(),
                    label: Some(value),
                    text: text.to_string(),
                }
            }
            [id, text] => Record {
                id: id.to_string(),
                label: None,
                text: text.to_string(),
            },
            _ => return Err(err(i + 1, "expected id<TAB>[label<TAB>]text".into())),
        };
        records.push(record);
    }
    Ok(Dataset { task, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str, task: Task) -> Result<Dataset> {
        parse_dataset(s, Path::new("d.tsv"), task)
    }

    #[test]
    fn three_lines() {
        let d = parse("1\t0\thello\n2\t1\tworld\n3\t1\tfoo\tbar\n", Task::A).unwrap();
        assert_eq!(d.records.len(), 3);
        assert_eq!(d.records[2].text, "foo\tbar");
        assert_eq!(d.labels(), Some(vec![0, 1, 1]));
    }

    #[test]
    fn out_of_range_label_names_value_and_line() {
        let msg = parse("1\t0\tok\n2\t5\tbad\n", Task::A).unwrap_err().to_string();
        assert!(msg.starts_with("d.tsv:2:") && msg.contains('5'), "{msg}");
        assert!(parse("1\t3\tok\n", Task::B).is_ok());
    }

    #[test]
    fn non_numeric_label() {
        let msg = parse("1\t0\tok\n2\tx\tbad\n", Task::A).unwrap_err().to_string();
        assert!(msg.contains("\"x\""), "{msg}");
    }

    #[test]
    fn crlf_matches_lf() {
        let lf = "1\t0\thello there\n2\t1\tbye\n";
        assert_eq!(parse(&lf.replace('\n', "\r\n"), Task::A).unwrap(), parse(lf, Task::A).unwrap());
    }

    #[test]
    fn header_and_unlabeled() {
        let d = parse("Tweet index\tLabel\tTweet text\n1\t1\tyes\n", Task::A).unwrap();
        assert_eq!(d.records.len(), 1);
        let u = parse("7\tjust text\n", Task::A).unwrap();
        assert_eq!(u.records[0].label, None);
        assert_eq!(u.labels(), None);
        assert!(parse("lonely\n", Task::A).is_err());
    }
}
