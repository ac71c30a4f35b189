//! Text form of a warning tree: one `IF .. THEN ..` line per leaf,
//! left branches first.

use super::tree::{Node, PoolTerm, WarningTree};
use crate::error::{IplError, Result};
use crate::polycore::MultiIndex;

fn label_word(label: i8) -> &'static str {
    if label > 0 {
        "abnormal"
    } else {
        "normal"
    }
}

/// Shortest text that parses back to exactly `t`. Thresholds chosen by the
/// tree builder have at most 6 significant digits whenever possible.
fn fmt_threshold(t: f64) -> String {
    format!("{t:?}")
}

pub fn render_rules(tree: &WarningTree) -> String {
    fn walk(node: &Node, pool: &[PoolTerm], path: &mut Vec<String>, out: &mut String) {
        match node {
            Node::Leaf { label } => {
                if !path.is_empty() {
                    out.push_str("IF ");
                    out.push_str(&path.join(" AND "));
                    out.push(' ');
                }
                out.push_str("THEN ");
                out.push_str(label_word(*label));
                out.push('\n');
            }
            Node::Split {
                term,
                threshold,
                left,
                right,
            } => {
                let name = &pool[*term].name;
                let t = fmt_threshold(*threshold);
                path.push(format!("{name} <= {t}"));
                walk(left, pool, path, out);
                path.pop();
                path.push(format!("{name} > {t}"));
                walk(right, pool, path, out);
                path.pop();
            }
        }
    }
    let mut out = String::new();
    walk(&tree.root, &tree.pool, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
struct Cond {
    term: String,
    le: bool,
    threshold: f64,
}

fn parse_line(line: &str, no: usize) -> Result<(Vec<Cond>, i8)> {
    let err = |m: &str| IplError::Parse(format!("rule line {no}: {m}"));
    let (conds, label) = line.rsplit_once("THEN ").ok_or_else(|| err("missing THEN"))?;
    let label = match label.trim() {
        "abnormal" => 1,
        "normal" => -1,
        other => return Err(err(&format!("unknown label '{other}'"))),
    };
    let conds = conds.trim();
    if conds.is_empty() {
        return Ok((Vec::new(), label));
    }
    let conds = conds.strip_prefix("IF ").ok_or_else(|| err("missing IF"))?;
    let parsed = conds
        .split(" AND ")
        .map(|c| {
            let (term, le, t) = if let Some((a, b)) = c.split_once(" <= ") {
                (a, true, b)
            } else if let Some((a, b)) = c.split_once(" > ") {
                (a, false, b)
            } else {
                return Err(err(&format!("bad condition '{c}'")));
            };
            let threshold: f64 = t.trim().parse().map_err(|_| err(&format!("bad threshold '{t}'")))?;
            Ok(Cond {
                term: term.trim().to_string(),
                le,
                threshold,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((parsed, label))
}

/// Rebuilds a tree from [`render_rules`] output. Term names are resolved
/// against `feature_names`; the pool lists terms in order of first use and
/// the depth bound is the longest rule.
pub fn parse_rules(text: &str, feature_names: &[String]) -> Result<WarningTree> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rules.push(parse_line(line, i + 1)?);
    }
    if rules.is_empty() {
        return Err(IplError::Parse("no rules found".into()));
    }
    let mut pool: Vec<PoolTerm> = Vec::new();
    for (conds, _) in &rules {
        for c in conds {
            if !pool.iter().any(|p| p.name == c.term) {
                pool.push(PoolTerm {
                    name: c.term.clone(),
                    alpha: MultiIndex::parse_name(&c.term, feature_names)?,
                });
            }
        }
    }

    fn build(rules: &[(Vec<Cond>, i8)], level: usize, pool: &[PoolTerm]) -> Result<Node> {
        let bad = || IplError::Parse("rules do not form a binary tree".into());
        if let [(conds, label)] = rules {
            if conds.len() == level {
                return Ok(Node::Leaf { label: *label });
            }
        }
        let first = rules[0].0.get(level).ok_or_else(bad)?;
        let split = rules.iter().position(|(c, _)| c.get(level).is_some_and(|c| !c.le));
        let split = split.ok_or_else(bad)?;
        let (left, right) = rules.split_at(split);
        if left.is_empty() {
            return Err(bad());
        }
        for (i, (c, _)) in rules.iter().enumerate() {
            let c = c.get(level).ok_or_else(bad)?;
            if c.term != first.term || c.threshold != first.threshold || c.le != (i < split) {
                return Err(bad());
            }
        }
        let term = pool.iter().position(|p| p.name == first.term).ok_or_else(bad)?;
        Ok(Node::Split {
            term,
            threshold: first.threshold,
            left: Box::new(build(left, level + 1, pool)?),
            right: Box::new(build(right, level + 1, pool)?),
        })
    }

    let root = build(&rules, 0, &pool)?;
    let depth = rules.iter().map(|(c, _)| c.len()).max().unwrap_or(0);
    WarningTree::new(root, depth, pool)
}
