use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{IplError, Result};
use crate::polycore::{expand_to_monomials, KernelModel, MultiIndex, SparsePolynomial};
use crate::solver::LossKind;
use crate::timeseries::LagSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    /// 1-based position in the ranking.
    pub rank: usize,
    pub name: String,
    pub alpha: MultiIndex,
    pub coefficient: f64,
}

/// Monomials sorted by `|coefficient|` descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub entries: Vec<ImportanceEntry>,
    pub threshold: f64,
    pub degree: u32,
    pub lag_spec: LagSpec,
    pub loss: LossKind,
    pub feature_names: Vec<String>,
    /// Constant term of the predictor (kept even when it is not ranked).
    pub constant: f64,
}

/// Expands `model`, keeps terms with `|w| >= threshold` and ranks them.
pub fn rank_features(model: &KernelModel, threshold: f64, exclude_constant: bool) -> Result<ImportanceReport> {
    let poly = expand_to_monomials(model)?;
    rank_polynomial(&poly, threshold, exclude_constant, model.lag_spec, model.loss)
}

/// Ranks the terms of an already expanded polynomial. Terms whose
/// coefficient is exactly zero carry no importance and are never listed.
pub fn rank_polynomial(
    poly: &SparsePolynomial,
    threshold: f64,
    exclude_constant: bool,
    lag_spec: LagSpec,
    loss: LossKind,
) -> Result<ImportanceReport> {
    if !(threshold >= 0.0) {
        return Err(IplError::InvalidParameter(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    let names = poly.feature_names();
    let constant = poly
        .terms()
        .iter()
        .find(|(a, _)| a.is_constant())
        .map_or(0.0, |(_, c)| *c);
    let mut kept: Vec<&(MultiIndex, f64)> = poly
        .terms()
        .iter()
        .filter(|(a, c)| *c != 0.0 && c.abs() >= threshold && !(exclude_constant && a.is_constant()))
        .collect();
    kept.sort_by(|(a1, c1), (a2, c2)| {
        c2.abs()
            .partial_cmp(&c1.abs())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a1.graded_cmp(a2))
    });
    let entries = kept
        .into_iter()
        .enumerate()
        .map(|(i, (a, c))| ImportanceEntry {
            rank: i + 1,
            name: a.name(names),
            alpha: a.clone(),
            coefficient: *c,
        })
        .collect();
    Ok(ImportanceReport {
        entries,
        threshold,
        degree: poly.degree(),
        lag_spec,
        loss,
        feature_names: names.to_vec(),
        constant,
    })
}

impl ImportanceReport {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn top_k(&self, k: usize) -> &[ImportanceEntry] {
        &self.entries[..k.min(self.entries.len())]
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    /// The variable carrying the most importance inside the top-ranked
    /// term: among that term's variables, the one with the largest summed
    /// `|w|` over all listed terms; ties go to the lower index.
    pub fn top_feature(&self) -> Option<usize> {
        let first = self.entries.first()?;
        let weight = |k: usize| -> f64 {
            self.entries
                .iter()
                .filter(|e| e.alpha.exponents()[k] > 0)
                .map(|e| e.coefficient.abs())
                .sum()
        };
        let mut best: Option<(usize, f64)> = None;
        for k in first.alpha.variables() {
            let w = weight(k);
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((k, w));
            }
        }
        best.map(|(k, _)| k)
    }

    /// Tab-separated table: a `#` header with provenance, then one row per
    /// term with rank, name, exponents (`:`-joined) and coefficient.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# degree={} loss={} lag_x={} lag_y={} threshold={} constant={}",
            self.degree, self.loss, self.lag_spec.lag_x, self.lag_spec.lag_y, self.threshold, self.constant
        );
        let _ = writeln!(out, "# features={}", self.feature_names.join(";"));
        out.push_str("rank\tterm\texponents\tcoefficient\n");
        for e in &self.entries {
            let exps: Vec<String> = e.alpha.exponents().iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}\t{}\t{}\t{}", e.rank, e.name, exps.join(":"), e.coefficient);
        }
        out
    }

    /// Inverse of [`ImportanceReport::to_table`].
    pub fn parse_table(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| IplError::Parse(format!("importance table line {line}: {msg}"));
        let mut lines = text.lines().enumerate();
        let (_, head) = lines.next().ok_or_else(|| bad(1, "missing provenance header"))?;
        let head = head.strip_prefix("# ").ok_or_else(|| bad(1, "missing provenance header"))?;
        let mut degree = None;
        let mut loss = None;
        let mut lag = LagSpec::default();
        let mut threshold = None;
        let mut constant = None;
        for kv in head.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(1, "malformed key=value"))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad(1, "bad number"));
            let int = |v: &str| v.parse::<usize>().map_err(|_| bad(1, "bad integer"));
            match k {
                "degree" => degree = Some(v.parse::<u32>().map_err(|_| bad(1, "bad degree"))?),
                "loss" => loss = Some(v.parse::<LossKind>()?),
                "lag_x" => lag.lag_x = int(v)?,
                "lag_y" => lag.lag_y = int(v)?,
                "threshold" => threshold = Some(num(v)?),
                "constant" => constant = Some(num(v)?),
                other => return Err(bad(1, &format!("unknown key {other}"))),
            }
        }
        let (_, feats) = lines.next().ok_or_else(|| bad(2, "missing feature header"))?;
        let feats = feats
            .strip_prefix("# features=")
            .ok_or_else(|| bad(2, "missing feature header"))?;
        let feature_names: Vec<String> = feats.split(';').map(str::to_string).collect();
        match lines.next() {
            Some((_, "rank\tterm\texponents\tcoefficient")) => {}
            _ => return Err(bad(3, "missing column header")),
        }
        let mut entries = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(bad(i + 1, "expected 4 fields"));
            }
            let exps = f[2]
                .split(':')
                .map(|x| x.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(i + 1, "bad exponent"))?;
            let alpha = MultiIndex::new(exps);
            if alpha.dim() != feature_names.len() {
                return Err(bad(i + 1, "exponent count does not match features"));
            }
            entries.push(ImportanceEntry {
                rank: f[0].parse().map_err(|_| bad(i + 1, "bad rank"))?,
                name: f[1].to_string(),
                alpha,
                coefficient: f[3].parse().map_err(|_| bad(i + 1, "bad coefficient"))?,
            });
        }
        Ok(Self {
            entries,
            threshold: threshold.ok_or_else(|| bad(1, "missing threshold"))?,
            degree: degree.ok_or_else(|| bad(1, "missing degree"))?,
            lag_spec: lag,
            loss: loss.ok_or_else(|| bad(1, "missing loss"))?,
            feature_names,
            constant: constant.ok_or_else(|| bad(1, "missing constant"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (1..=d).map(|k| format!("x{k}")).collect()
    }

    fn poly() -> SparsePolynomial {
        let n = names(2);
        SparsePolynomial::new(
            vec![
                (MultiIndex::constant(2), 0.3),
                (MultiIndex::linear(2, 0), -0.5),
                (MultiIndex::linear(2, 1), 0.5),
                (MultiIndex::pair(2, 0, 1), 0.9),
                (MultiIndex::new(vec![2, 0]), 0.01),
            ],
            0.0,
            2,
            n,
        )
        .unwrap()
    }

    #[test]
    fn sorted_with_graded_tie_break() {
        let r = rank_polynomial(&poly(), 0.0, true, LagSpec::default(), LossKind::Squared).unwrap();
        let got: Vec<&str> = r.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(got, ["x1*x2", "x1", "x2", "x1^2"]);
        assert_eq!(r.entries.iter().map(|e| e.rank).collect::<Vec<_>>(), [1, 2, 3, 4]);
        assert_eq!(r.constant, 0.3);
    }

    #[test]
    fn constant_optional() {
        let r = rank_polynomial(&poly(), 0.2, false, LagSpec::default(), LossKind::Squared).unwrap();
        assert!(r.entries.iter().any(|e| e.alpha.is_constant()));
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn infinite_threshold_empties_ranking() {
        let r = rank_polynomial(&poly(), f64::INFINITY, true, LagSpec::default(), LossKind::Squared).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.constant, 0.3);
        assert_eq!(r.top_feature(), None);
    }

    #[test]
    fn top_feature_uses_aggregate_weight() {
        let n = names(2);
        let p = SparsePolynomial::new(
            vec![
                (MultiIndex::pair(2, 0, 1), 1.0),
                (MultiIndex::linear(2, 1), 0.4),
                (MultiIndex::linear(2, 0), 0.1),
            ],
            0.0,
            2,
            n,
        )
        .unwrap();
        let r = rank_polynomial(&p, 0.0, true, LagSpec::default(), LossKind::Squared).unwrap();
        assert_eq!(r.top_feature(), Some(1));
    }

    #[test]
    fn table_round_trip() {
        let r = rank_polynomial(&poly(), 0.0, true, LagSpec::new(1, 2), LossKind::Hinge).unwrap();
        let back = ImportanceReport::parse_table(&r.to_table()).unwrap();
        assert_eq!(back, r);
        let empty = rank_polynomial(&poly(), f64::INFINITY, true, LagSpec::default(), LossKind::Squared).unwrap();
        assert_eq!(ImportanceReport::parse_table(&empty.to_table()).unwrap(), empty);
    }
}
