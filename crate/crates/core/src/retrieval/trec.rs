//! TREC run files: `query_id Q0 doc_id rank score tag`, tab-separated.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::rank::{RankedEntry, RankedList, RunFile};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("run line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

pub fn encode_run(run: &RunFile, tag: &str) -> String {
    let mut out = String::new();
    for list in &run.lists {
        for (i, e) in list.entries.iter().enumerate() {
            writeln!(
                out,
                "{}\tQ0\t{}\t{}\t{:.6}\t{}",
                list.query_id,
                e.doc_id,
                i + 1,
                e.score,
                tag
            )
            .expect("writing to a String");
        }
    }
    out
}

/// Parses a run; lists keep first-appearance query order and are sorted by
/// the rank column. `k` is set to the longest list.
pub fn parse_run(text: &str) -> Result<RunFile, RunError> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(usize, RankedEntry)>> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(RunError::Malformed {
                line: line_no,
                msg: format!("expected 6 columns, found {}", cols.len()),
            });
        }
        let rank: usize = cols[3].parse().map_err(|_| RunError::Malformed {
            line: line_no,
            msg: format!("rank {:?} is not a positive integer", cols[3]),
        })?;
        let score: f64 = cols[4]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| RunError::Malformed {
                line: line_no,
                msg: format!("score {:?} is not a finite number", cols[4]),
            })?;
        let qid = cols[0].to_owned();
        if !rows.contains_key(&qid) {
            order.push(qid.clone());
        }
        rows.entry(qid).or_default().push((
            rank,
            RankedEntry {
                doc_id: cols[2].to_owned(),
                score,
            },
        ));
    }
    let mut lists = Vec::with_capacity(order.len());
    let mut k = 0;
    for qid in order {
        let mut entries = rows.remove(&qid).unwrap_or_default();
        entries.sort_by_key(|(r, _)| *r);
        let mut seen = HashSet::new();
        for (i, (rank, e)) in entries.iter().enumerate() {
            if *rank != i + 1 {
                return Err(RunError::Malformed {
                    line: 0,
                    msg: format!("query {qid:?}: ranks are not 1..n (found {rank} at position {})", i + 1),
                });
            }
            if !seen.insert(e.doc_id.as_str()) {
                return Err(RunError::Malformed {
                    line: 0,
                    msg: format!("query {qid:?}: doc {:?} appears twice", e.doc_id),
                });
            }
        }
        k = k.max(entries.len());
        lists.push(RankedList::new(qid, entries.into_iter().map(|(_, e)| e).collect()));
    }
    Ok(RunFile::new(lists, k))
}

pub fn load_run(path: impl AsRef<Path>) -> Result<RunFile, RunError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_run(&text)
}

pub fn write_run(run: &RunFile, tag: &str, path: impl AsRef<Path>) -> Result<(), RunError> {
    let path = path.as_ref();
    fs::write(path, encode_run(run, tag)).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_six_columns() {
        let run = RunFile::new(
            vec![RankedList::new(
                "img1",
                vec![
                    RankedEntry {
                        doc_id: "cap_en".into(),
                        score: 0.5,
                    },
                    RankedEntry {
                        doc_id: "cap_th".into(),
                        score: -0.1234567,
                    },
                ],
            )],
            2,
        );
        assert_eq!(
            encode_run(&run, "clip"),
            "img1\tQ0\tcap_en\t1\t0.500000\tclip\nimg1\tQ0\tcap_th\t2\t-0.123457\tclip\n"
        );
    }

    #[test]
    fn parse_reorders_by_rank_and_keeps_query_order() {
        let text = "q2 Q0 b 2 0.1 t\nq2 Q0 a 1 0.9 t\nq1 Q0 c 1 0.3 t\n";
        let run = parse_run(text).unwrap();
        assert_eq!(run.lists[0].query_id, "q2");
        assert_eq!(run.lists[0].top(2).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(run.lists[1].query_id, "q1");
        assert_eq!(run.k, 2);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_run("q Q0 a 1 0.5\n"), Err(RunError::Malformed { line: 1, .. })));
        assert!(matches!(parse_run("q Q0 a x 0.5 t\n"), Err(RunError::Malformed { line: 1, .. })));
        assert!(parse_run("q Q0 a 1 0.5 t\nq Q0 a 2 0.4 t\n").is_err());
        assert!(parse_run("q Q0 a 1 0.5 t\nq Q0 b 3 0.4 t\n").is_err());
    }
}
