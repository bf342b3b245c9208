//! File formats: filter JSON, cover and zipper text, DOT export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{PFilter, PFilterBuilder, StateSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: String,
    pub to: String,
    pub obs: Vec<String>,
}

/// Serialized shape of a filter file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterFile {
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub alphabet: Vec<String>,
    pub transitions: Vec<TransitionRecord>,
    pub outputs: BTreeMap<String, Vec<String>>,
}

impl FilterFile {
    pub fn from_filter(f: &PFilter) -> Self {
        let states = f.state_names().to_vec();
        let initial = f
            .initial()
            .iter()
            .map(|&v| f.state_name(v).to_string())
            .collect();
        let transitions = f
            .edges()
            .iter()
            .map(|(&(v, w), ys)| TransitionRecord {
                from: f.state_name(v).to_string(),
                to: f.state_name(w).to_string(),
                obs: ys.iter().map(|&y| f.obs_name(y).to_string()).collect(),
            })
            .collect();
        let outputs = f
            .states()
            .map(|v| {
                (
                    f.state_name(v).to_string(),
                    f.output_names(v).into_iter().collect(),
                )
            })
            .collect();
        FilterFile {
            states,
            initial,
            alphabet: f.alphabet().to_vec(),
            transitions,
            outputs,
        }
    }

    /// Builds the filter exactly as written, without pruning.
    pub fn to_filter(&self) -> Result<PFilter> {
        let mut b = PFilterBuilder::new();
        let declared: BTreeSet<&str> = self.states.iter().map(String::as_str).collect();
        if let Some(extra) = self.outputs.keys().find(|k| !declared.contains(k.as_str())) {
            return Err(Error::UnknownState(extra.clone()));
        }
        for s in &self.states {
            let outs = self.outputs.get(s).cloned().unwrap_or_default();
            b.add_state(s, outs);
        }
        for s in &self.initial {
            b.add_initial(s);
        }
        for y in &self.alphabet {
            b.add_observation(y);
        }
        let alphabet: BTreeSet<&str> = self.alphabet.iter().map(String::as_str).collect();
        for t in &self.transitions {
            for y in &t.obs {
                if !alphabet.contains(y.as_str()) {
                    return Err(Error::UnknownObservation(y.clone()));
                }
                b.add_transition(&t.from, &t.to, y);
            }
        }
        b.build()
    }
}

/// Parses a filter from JSON text. Unreachable states are dropped with a
/// warning.
pub fn filter_from_json(text: &str) -> Result<PFilter> {
    let file: FilterFile = serde_json::from_str(text)?;
    let f = file.to_filter()?;
    let (pruned, removed) = f.prune_unreachable();
    if !removed.is_empty() {
        log::warn!("dropping unreachable states: {}", removed.join(", "));
    }
    Ok(pruned)
}

pub fn filter_to_json(f: &PFilter) -> String {
    serde_json::to_string_pretty(&FilterFile::from_filter(f)).expect("filter file serializes")
}

pub fn load_filter(path: &Path) -> Result<PFilter> {
    filter_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_filter(f: &PFilter, path: &Path) -> Result<()> {
    let mut text = filter_to_json(f);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Space-separated member names of a state set, in name order.
pub fn set_line(f: &PFilter, set: &StateSet) -> String {
    let mut names: Vec<&str> = set.iter().map(|&v| f.state_name(v)).collect();
    names.sort_unstable();
    names.join(" ")
}

/// One set per line, lines sorted.
pub fn sets_to_text(f: &PFilter, sets: &[StateSet]) -> String {
    let mut lines: Vec<String> = sets.iter().map(|s| set_line(f, s)).collect();
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Parses one set per line; blank lines and `#` comments are skipped.
pub fn sets_from_text(f: &PFilter, text: &str) -> Result<Vec<StateSet>> {
    let mut sets = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let set = line
            .split_whitespace()
            .map(|n| f.state_id(n))
            .collect::<Result<StateSet>>()?;
        sets.push(set);
    }
    Ok(sets)
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering of a filter; initial states are drawn double-circled.
pub fn filter_to_dot(f: &PFilter) -> String {
    let mut out = String::from("digraph filter {\n  rankdir=LR;\n");
    for v in f.states() {
        let outs: Vec<String> = f.output_names(v).into_iter().collect();
        let shape = if f.initial().contains(&v) {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(
            out,
            "  {} [shape={shape}, label={}];",
            dot_id(f.state_name(v)),
            dot_id(&format!("{}\n{{{}}}", f.state_name(v), outs.join(",")))
        );
    }
    for (&(v, w), ys) in f.edges() {
        let label: Vec<&str> = ys.iter().map(|&y| f.obs_name(y)).collect();
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            dot_id(f.state_name(v)),
            dot_id(f.state_name(w)),
            dot_id(&label.join(","))
        );
    }
    out.push_str("}\n");
    out
}

/// Graphviz rendering of an undirected graph over the filter's states.
pub fn graph_to_dot(f: &PFilter, edges: &BTreeSet<(usize, usize)>) -> String {
    let mut out = String::from("graph compatibility {\n");
    for v in f.states() {
        let _ = writeln!(out, "  {};", dot_id(f.state_name(v)));
    }
    for &(a, b) in edges {
        let _ = writeln!(
            out,
            "  {} -- {};",
            dot_id(f.state_name(a)),
            dot_id(f.state_name(b))
        );
    }
    out.push_str("}\n");
    out
}
