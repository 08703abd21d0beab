//! Ranking sequences by complexity and comparing rankings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How values order sequences from simple to complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Complexity metrics: low value is simple.
    AscendingIsSimple,
    /// Performance scores: high value is simple.
    DescendingIsSimple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSequences {
    entries: Vec<(String, f64)>,
    pub direction: Direction,
}

impl ScoredSequences {
    pub fn new(entries: Vec<(String, f64)>, direction: Direction) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (name, value) in &entries {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate sequence {name:?}")));
            }
            if !value.is_finite() {
                return Err(Error::InvalidInput(format!("{name}: non-finite value {value}")));
            }
        }
        Ok(Self { entries, direction })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Keeps only the entries whose names are in `names`.
    pub fn restricted_to(&self, names: &BTreeSet<&str>) -> ScoredSequences {
        ScoredSequences {
            entries: self
                .entries
                .iter()
                .filter(|(n, _)| names.contains(n.as_str()))
                .cloned()
                .collect(),
            direction: self.direction,
        }
    }
}

pub type Ranking = BTreeMap<String, usize>;

/// 1-based ranks from simple to complex; exact ties broken by sequence name.
pub fn rank(seqs: &ScoredSequences) -> Result<Ranking> {
    if seqs.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "ranking needs at least 2 sequences, got {}",
            seqs.len()
        )));
    }
    let mut order: Vec<&(String, f64)> = seqs.entries.iter().collect();
    order.sort_by(|a, b| {
        let by_value = match seqs.direction {
            Direction::AscendingIsSimple => a.1.total_cmp(&b.1),
            Direction::DescendingIsSimple => b.1.total_cmp(&a.1),
        };
        by_value.then_with(|| a.0.cmp(&b.0))
    });
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, (name, _))| (name.clone(), i + 1))
        .collect())
}

/// Spearman's footrule: sum of absolute rank differences.
pub fn footrule_distance(a: &Ranking, b: &Ranking) -> Result<u64> {
    let only_a: Vec<&String> = a.keys().filter(|k| !b.contains_key(*k)).collect();
    let only_b: Vec<&String> = b.keys().filter(|k| !a.contains_key(*k)).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(Error::InvalidInput(format!(
            "rankings cover different sequences: only in first {only_a:?}, only in second {only_b:?}"
        )));
    }
    Ok(a.iter().map(|(k, &ra)| ra.abs_diff(b[k]) as u64).sum())
}

/// Largest footrule distance between two permutations of `n` items.
pub fn footrule_max(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("footrule maximum needs n >= 2, got {n}")));
    }
    let n = n as u64;
    let sum = n * (n + 1) / 2;
    Ok(if n.is_multiple_of(2) { sum - n / 2 } else { sum - n.div_ceil(2) })
}

pub fn normalized_fd(fd: u64, fd_max: u64) -> Result<f64> {
    if fd_max == 0 {
        return Err(Error::InvalidInput("maximum footrule distance is zero".into()));
    }
    Ok(fd as f64 / fd_max as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub sequence: String,
    pub metric_rank: usize,
    pub reference_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankComparison {
    pub fd: u64,
    pub fd_max: u64,
    pub nfd: f64,
    /// `fd / n`
    pub mean_fd: f64,
    pub n: usize,
    pub rank_table: Vec<RankRow>,
}

impl RankComparison {
    /// `mean (NFD)` with two decimals.
    pub fn display(&self) -> String {
        format!("{:.2} ({:.2})", self.mean_fd, self.nfd)
    }
}

/// Ranks both inputs and compares them. The inputs must cover the same sequences.
pub fn compare(metric: &ScoredSequences, reference: &ScoredSequences) -> Result<RankComparison> {
    let a = rank(metric)?;
    let b = rank(reference)?;
    let fd = footrule_distance(&a, &b)?;
    let n = a.len();
    let fd_max = footrule_max(n)?;
    let rank_table = a
        .iter()
        .map(|(name, &metric_rank)| RankRow {
            sequence: name.clone(),
            metric_rank,
            reference_rank: b[name],
        })
        .collect();
    Ok(RankComparison {
        fd,
        fd_max,
        nfd: normalized_fd(fd, fd_max)?,
        mean_fd: fd as f64 / n as f64,
        n,
        rank_table,
    })
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Spearman's rank correlation: Pearson correlation of the average ranks.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "correlation needs at least 3 pairs, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value".into()));
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input column".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Per-sequence tracker scores, averaged over trackers for long-form input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub columns: Vec<String>,
    pub values: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ScoreTable {
    /// Performance column as a ranking input (high is simple).
    pub fn column(&self, name: &str) -> Result<ScoredSequences> {
        let key = name.trim().to_ascii_lowercase();
        if !self.columns.contains(&key) {
            return Err(Error::InvalidInput(format!(
                "unknown score column {name:?}; available: {}",
                self.columns.join(", ")
            )));
        }
        let entries = self
            .values
            .iter()
            .filter_map(|(seq, cols)| cols.get(&key).map(|v| (seq.clone(), *v)))
            .collect();
        ScoredSequences::new(entries, Direction::DescendingIsSimple)
    }
}

/// Reads a tracker-score CSV.
///
/// Wide form: `sequence,<score>,...`, one row per sequence. Long form adds a
/// `tracker` column, one row per (tracker, sequence); every score column is
/// averaged over trackers. Header names are case-insensitive, blank cells are
/// missing values.
pub fn load_score_table(path: impl AsRef<Path>) -> Result<ScoreTable> {
    let path = path.as_ref();
    let source = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    let format_err = |message: String| Error::Format {
        path: source.clone(),
        message,
    };
    let seq_col = headers
        .iter()
        .position(|h| h == "sequence")
        .ok_or_else(|| format_err("missing 'sequence' column".into()))?;
    let tracker_col = headers.iter().position(|h| h == "tracker");
    let score_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != seq_col && Some(*i) != tracker_col)
        .map(|(i, h)| (i, h.clone()))
        .collect();

    let mut seen = BTreeSet::new();
    // sequence -> column -> (sum, count)
    let mut sums: BTreeMap<String, BTreeMap<String, (f64, usize)>> = BTreeMap::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = row_idx + 2;
        let sequence = record.get(seq_col).unwrap_or("").to_string();
        if sequence.is_empty() {
            return Err(format_err(format!("line {line}: empty sequence name")));
        }
        let tracker = tracker_col.map(|c| record.get(c).unwrap_or("").to_string());
        if !seen.insert((tracker.clone(), sequence.clone())) {
            return Err(format_err(match tracker {
                Some(t) => format!("line {line}: duplicate row for tracker {t:?}, sequence {sequence:?}"),
                None => format!("line {line}: duplicate row for sequence {sequence:?}"),
            }));
        }
        let cols = sums.entry(sequence).or_default();
        for (i, name) in &score_cols {
            let cell = record.get(*i).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| format_err(format!("line {line}: {name}: not a number: {cell:?}")))?;
            let e = cols.entry(name.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    Ok(ScoreTable {
        columns: score_cols.into_iter().map(|(_, n)| n).collect(),
        values: sums
            .into_iter()
            .map(|(seq, cols)| {
                let means = cols
                    .into_iter()
                    .map(|(c, (s, n))| (c, s / n as f64))
                    .collect();
                (seq, means)
            })
            .collect(),
    })
}

/// One score column of a tracker-score CSV.
pub fn load_tracker_scores(path: impl AsRef<Path>, column: &str) -> Result<ScoredSequences> {
    load_score_table(path)?.column(column)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(values: &[(&str, f64)], direction: Direction) -> ScoredSequences {
        ScoredSequences::new(
            values.iter().map(|(n, v)| (n.to_string(), *v)).collect(),
            direction,
        )
        .unwrap()
    }

    fn ranks_of(r: &Ranking, names: &[&str]) -> Vec<usize> {
        names.iter().map(|n| r[*n]).collect()
    }

    #[test]
    fn ascending_and_descending() {
        let names = ["a", "b", "c"];
        let asc = scored(&[("a", 0.1), ("b", 0.5), ("c", 0.3)], Direction::AscendingIsSimple);
        assert_eq!(ranks_of(&rank(&asc).unwrap(), &names), vec![1, 3, 2]);
        let desc = scored(&[("a", 70.0), ("b", 50.0), ("c", 60.0)], Direction::DescendingIsSimple);
        assert_eq!(ranks_of(&rank(&desc).unwrap(), &names), vec![1, 3, 2]);
    }

    #[test]
    fn ties_break_by_name() {
        let s = scored(&[("B", 0.4), ("A", 0.4)], Direction::AscendingIsSimple);
        let r = rank(&s).unwrap();
        assert_eq!((r["A"], r["B"]), (1, 2));
        let s = scored(&[("B", 0.4), ("A", 0.4)], Direction::DescendingIsSimple);
        assert_eq!(rank(&s).unwrap()["A"], 1);
    }

    #[test]
    fn too_few_entries() {
        assert!(rank(&scored(&[("a", 1.0)], Direction::AscendingIsSimple)).is_err());
    }

    #[test]
    fn scored_sequences_validation() {
        let dup = vec![("a".to_string(), 1.0), ("a".to_string(), 2.0)];
        assert!(ScoredSequences::new(dup, Direction::AscendingIsSimple).is_err());
        let nan = vec![("a".to_string(), f64::NAN)];
        assert!(ScoredSequences::new(nan, Direction::AscendingIsSimple).is_err());
    }

    #[test]
    fn footrule_examples() {
        let r = |v: &[usize]| -> Ranking {
            v.iter().enumerate().map(|(i, &x)| (format!("s{i}"), x)).collect()
        };
        assert_eq!(footrule_distance(&r(&[1, 2, 3]), &r(&[1, 2, 3])).unwrap(), 0);
        assert_eq!(footrule_distance(&r(&[1, 2, 3]), &r(&[2, 1, 3])).unwrap(), 2);
        assert_eq!(
            footrule_distance(&r(&[1, 2, 3, 4, 5, 6, 7]), &r(&[7, 6, 5, 4, 3, 2, 1])).unwrap(),
            24
        );
        let mut other = r(&[1, 2]);
        other.insert("zz".into(), 3);
        assert!(footrule_distance(&r(&[1, 2, 3]), &other).is_err());
    }

    #[test]
    fn footrule_max_branches() {
        assert_eq!(footrule_max(4).unwrap(), 8);
        assert_eq!(footrule_max(7).unwrap(), 24);
        assert_eq!(footrule_max(2).unwrap(), 2);
        assert!(footrule_max(1).is_err());
    }

    #[test]
    fn nfd_values() {
        assert_eq!(normalized_fd(0, 24).unwrap(), 0.0);
        assert_eq!(normalized_fd(24, 24).unwrap(), 1.0);
        assert_eq!(normalized_fd(6, 24).unwrap(), 0.25);
        assert!(normalized_fd(0, 0).is_err());
    }

    #[test]
    fn comparison_display() {
        let metric = scored(
            &[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 4.0), ("e", 5.0), ("f", 6.0), ("g", 7.0)],
            Direction::AscendingIsSimple,
        );
        // reference swaps three adjacent pairs: FD 6
        let reference = scored(
            &[("a", 60.0), ("b", 70.0), ("c", 40.0), ("d", 50.0), ("e", 20.0), ("f", 30.0), ("g", 10.0)],
            Direction::DescendingIsSimple,
        );
        let cmp = compare(&metric, &reference).unwrap();
        assert_eq!((cmp.fd, cmp.fd_max, cmp.n), (6, 24, 7));
        assert_eq!(cmp.display(), "0.86 (0.25)");
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn spearman_extremes() {
        let xs = [1.0, 2.0, 5.0, 9.0];
        let up: Vec<f64> = xs.iter().map(|x: &f64| x.exp()).collect();
        let down: Vec<f64> = xs.iter().map(|x| -x * x).collect();
        assert_eq!(spearman_rho(&xs, &up).unwrap(), 1.0);
        assert_eq!(spearman_rho(&xs, &down).unwrap(), -1.0);
        assert!(matches!(
            spearman_rho(&xs, &[3.0; 4]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(spearman_rho(&xs[..2], &up[..2]).is_err());
    }

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn wide_scores() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "w.csv", "sequence,HOTA,mota\nMOT17-01,45.5,50\nMOT17-03,60,\n");
        let hota = load_tracker_scores(&p, "hota").unwrap();
        assert_eq!(hota.get("MOT17-01"), Some(45.5));
        assert_eq!(hota.direction, Direction::DescendingIsSimple);
        assert_eq!(load_tracker_scores(&p, "mota").unwrap().len(), 1);
        assert!(load_tracker_scores(&p, "idf1").is_err());
        let p = write(&dir, "d.csv", "sequence,hota\na,1\na,2\n");
        assert!(load_score_table(&p).is_err());
    }

    #[test]
    fn long_scores_are_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "l.csv", "tracker,sequence,hota\nt1,s,40\nt2,s,60\nt1,u,10\n");
        let hota = load_tracker_scores(&p, "HOTA").unwrap();
        assert_eq!(hota.get("s"), Some(50.0));
        assert_eq!(hota.get("u"), Some(10.0));
        let p = write(&dir, "dup.csv", "tracker,sequence,hota\nt1,s,40\nt1,s,60\n");
        assert!(load_score_table(&p).is_err());
    }
}
