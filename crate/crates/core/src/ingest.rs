//! Loading of MOTChallenge-style ground truth (`gt/gt.txt`, `seqinfo.ini`, `img1/`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

pub const DEFAULT_FRAME_RATE: f64 = 30.0;

/// One annotated object in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub frame: u32,
    pub track_id: u32,
    /// Top-left corner and size, exactly as stored on disk.
    pub bbox: BoundingBox,
    pub confidence: f64,
    pub class_id: i32,
    /// Fraction of the box that is visible; a negative value on disk means absent.
    pub visibility: Option<f64>,
    /// Counted as a member of the target set K.
    pub is_target: bool,
    /// May hide objects further from the camera.
    pub is_occluder: bool,
}

impl ObjectState {
    pub fn center_x(&self) -> f64 {
        self.bbox.left + self.bbox.width / 2.0
    }

    pub fn center_y(&self) -> f64 {
        self.bbox.top + self.bbox.height / 2.0
    }

    pub fn center(&self) -> (f64, f64) {
        (self.center_x(), self.center_y())
    }

    /// Geometric mean of width and height.
    pub fn size(&self) -> f64 {
        (self.bbox.width * self.bbox.height).sqrt()
    }

    /// Ignore regions carry confidence 0 in MOTChallenge ground truth.
    pub fn is_ignore_region(&self) -> bool {
        self.confidence == 0.0
    }
}

/// Which annotation rows are targets, which only occlude, and which are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetFilter {
    pub included_class_ids: BTreeSet<i32>,
    /// `None` admits every class as an occluder.
    pub occluder_class_ids: Option<BTreeSet<i32>>,
    /// Rows with confidence 0 count as targets when set.
    pub zero_confidence_is_target: bool,
    /// Rows with confidence 0 may occlude other objects when set.
    pub zero_confidence_occludes: bool,
    /// Rows below this visibility are dropped at parse time. Unset by default.
    pub min_visibility_for_parse: Option<f64>,
}

impl Default for TargetFilter {
    fn default() -> Self {
        Self {
            included_class_ids: BTreeSet::from([1]),
            occluder_class_ids: None,
            zero_confidence_is_target: false,
            zero_confidence_occludes: true,
            min_visibility_for_parse: None,
        }
    }
}

impl TargetFilter {
    fn retains(&self, class_id: i32, visibility: Option<f64>) -> bool {
        let class_ok = self.included_class_ids.contains(&class_id)
            || self
                .occluder_class_ids
                .as_ref()
                .is_none_or(|ids| ids.contains(&class_id));
        let visible_enough = match (self.min_visibility_for_parse, visibility) {
            (Some(min), Some(v)) => v >= min,
            _ => true,
        };
        class_ok && visible_enough
    }

    fn is_target(&self, class_id: i32, confidence: f64) -> bool {
        self.included_class_ids.contains(&class_id)
            && (confidence != 0.0 || self.zero_confidence_is_target)
    }

    fn is_occluder(&self, confidence: f64) -> bool {
        confidence != 0.0 || self.zero_confidence_occludes
    }
}

/// Contents of the `[Sequence]` section of `seqinfo.ini`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeqInfo {
    pub name: Option<String>,
    pub frame_rate: f64,
    pub seq_length: Option<u32>,
    pub img_width: Option<u32>,
    pub img_height: Option<u32>,
    pub img_dir: Option<String>,
    pub img_ext: Option<String>,
}

/// Every annotated state of one sequence, viewable per track and per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceGT {
    name: String,
    states: Vec<ObjectState>,
    tracks: BTreeMap<u32, Vec<usize>>,
    per_frame: BTreeMap<u32, Vec<usize>>,
    pub frame_rate: f64,
    pub img_width: Option<u32>,
    pub img_height: Option<u32>,
    pub seq_length: Option<u32>,
    pub img_dir: Option<PathBuf>,
}

impl SequenceGT {
    /// Builds the indexed views. States may arrive in any order.
    pub fn from_states(name: impl Into<String>, mut states: Vec<ObjectState>) -> Result<Self> {
        let name = name.into();
        states.sort_by_key(|s| (s.frame, s.track_id));
        let mut problems = Vec::new();
        for pair in states.windows(2) {
            if pair[0].frame == pair[1].frame && pair[0].track_id == pair[1].track_id {
                problems.push(format!(
                    "duplicate (frame {}, id {})",
                    pair[1].frame, pair[1].track_id
                ));
            }
        }
        for s in &states {
            if s.bbox.is_degenerate() {
                problems.push(format!(
                    "frame {} id {}: non-positive size {}x{}",
                    s.frame, s.track_id, s.bbox.width, s.bbox.height
                ));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation {
                path: name,
                message: problems.join("; "),
            });
        }

        let mut tracks: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        let mut per_frame: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            tracks.entry(s.track_id).or_default().push(i);
            per_frame.entry(s.frame).or_default().push(i);
        }
        Ok(Self {
            name,
            states,
            tracks,
            per_frame,
            frame_rate: DEFAULT_FRAME_RATE,
            img_width: None,
            img_height: None,
            seq_length: None,
            img_dir: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// All states ordered by (frame, track id).
    pub fn states(&self) -> &[ObjectState] {
        &self.states
    }

    /// Frames holding at least one annotation, ascending.
    pub fn frames(&self) -> impl Iterator<Item = u32> + '_ {
        self.per_frame.keys().copied()
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.per_frame.keys().next_back().copied()
    }

    /// Number of frames in the sequence: the declared length, or the last
    /// annotated frame when the annotations run longer.
    pub fn frame_count(&self) -> u32 {
        self.seq_length
            .unwrap_or(0)
            .max(self.last_frame().unwrap_or(0))
    }

    pub fn frame_states(&self, frame: u32) -> impl Iterator<Item = &ObjectState> + '_ {
        self.per_frame
            .get(&frame)
            .into_iter()
            .flatten()
            .map(|&i| &self.states[i])
    }

    /// K^t: targets present in `frame`, ordered by track id.
    pub fn frame_targets(&self, frame: u32) -> impl Iterator<Item = &ObjectState> + '_ {
        self.frame_states(frame).filter(|s| s.is_target)
    }

    pub fn track_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.tracks.keys().copied()
    }

    pub fn track(&self, track_id: u32) -> impl Iterator<Item = &ObjectState> + '_ {
        self.tracks
            .get(&track_id)
            .into_iter()
            .flatten()
            .map(|&i| &self.states[i])
    }

    /// Target tracks (the set K), each with its target states in frame order (F^k).
    pub fn target_tracks(&self) -> Vec<(u32, Vec<&ObjectState>)> {
        self.tracks
            .iter()
            .filter_map(|(&id, idx)| {
                let states: Vec<&ObjectState> = idx
                    .iter()
                    .map(|&i| &self.states[i])
                    .filter(|s| s.is_target)
                    .collect();
                (!states.is_empty()).then_some((id, states))
            })
            .collect()
    }

    /// |K|
    pub fn target_count(&self) -> usize {
        self.tracks
            .values()
            .filter(|idx| idx.iter().any(|&i| self.states[i].is_target))
            .count()
    }

    pub fn target_state_count(&self) -> usize {
        self.states.iter().filter(|s| s.is_target).count()
    }

    /// Mean number of targets per frame over every frame of the sequence.
    pub fn density(&self) -> f64 {
        match self.frame_count() {
            0 => 0.0,
            n => self.target_state_count() as f64 / f64::from(n),
        }
    }

    /// Serializes the retained states back to `gt.txt` rows.
    pub fn to_gt_rows(&self) -> String {
        let mut out = String::new();
        for s in &self.states {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.frame,
                s.track_id,
                s.bbox.left,
                s.bbox.top,
                s.bbox.width,
                s.bbox.height,
                s.confidence,
                s.class_id,
                s.visibility.unwrap_or(-1.0)
            );
        }
        out
    }

    fn apply_seqinfo(&mut self, info: &SeqInfo) {
        if let Some(name) = &info.name {
            self.name = name.clone();
        }
        self.frame_rate = info.frame_rate;
        self.img_width = info.img_width;
        self.img_height = info.img_height;
        self.seq_length = info.seq_length;
        if let (Some(declared), Some(last)) = (self.seq_length, self.last_frame()) {
            if last > declared {
                log::warn!(
                    "{}: seqLength {declared} is shorter than the last annotated frame {last}; using {last}",
                    self.name
                );
                self.seq_length = Some(last);
            }
        }
    }
}

/// Parses a `gt.txt` file.
pub fn parse_gt_file(path: impl AsRef<Path>, filter: &TargetFilter) -> Result<SequenceGT> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path
        .parent()
        .and_then(Path::parent)
        .and_then(Path::file_name)
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_gt_str(&text, &path.display().to_string(), filter).map(|mut seq| {
        seq.name = name;
        seq
    })
}

/// Parses `gt.txt` content. `source` names the input in error messages.
pub fn parse_gt_str(text: &str, source: &str, filter: &TargetFilter) -> Result<SequenceGT> {
    let mut states = Vec::new();
    let mut problems = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.to_string(),
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(9..=10).contains(&fields.len()) {
            return Err(parse_err(format!(
                "expected 9 or 10 comma-separated fields, found {}",
                fields.len()
            )));
        }
        let int = |idx: usize, what: &str| -> Result<i64> {
            fields[idx]
                .parse::<i64>()
                .map_err(|_| parse_err(format!("{what}: not an integer: {:?}", fields[idx])))
        };
        let real = |idx: usize, what: &str| -> Result<f64> {
            fields[idx]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(format!("{what}: not a finite number: {:?}", fields[idx])))
        };

        let frame = int(0, "frame")?;
        let track_id = int(1, "id")?;
        if frame < 1 || track_id < 1 || frame > i64::from(u32::MAX) || track_id > i64::from(u32::MAX)
        {
            return Err(parse_err("frame and id must be positive integers".into()));
        }
        let bbox = BoundingBox::new(
            real(2, "bb_left")?,
            real(3, "bb_top")?,
            real(4, "bb_width")?,
            real(5, "bb_height")?,
        );
        let confidence = real(6, "conf")?;
        let class_id = i32::try_from(int(7, "class")?)
            .map_err(|_| parse_err("class out of range".into()))?;
        let vis = real(8, "visibility")?;
        let visibility = (vis >= 0.0).then_some(vis);

        if bbox.is_degenerate() {
            problems.push(format!(
                "line {line_no}: non-positive size {}x{}",
                bbox.width, bbox.height
            ));
            continue;
        }
        if vis > 1.0 {
            problems.push(format!("line {line_no}: visibility {vis} above 1"));
            continue;
        }
        if !filter.retains(class_id, visibility) {
            continue;
        }
        states.push(ObjectState {
            frame: frame as u32,
            track_id: track_id as u32,
            bbox,
            confidence,
            class_id,
            visibility,
            is_target: filter.is_target(class_id, confidence),
            is_occluder: filter.is_occluder(confidence),
        });
    }
    if !problems.is_empty() {
        return Err(Error::Validation {
            path: source.to_string(),
            message: problems.join("; "),
        });
    }
    SequenceGT::from_states(source, states).map_err(|e| match e {
        Error::Validation { message, .. } => Error::Validation {
            path: source.to_string(),
            message,
        },
        other => other,
    })
}

/// Parses the `[Sequence]` section of a `seqinfo.ini` file.
pub fn parse_seqinfo(path: impl AsRef<Path>) -> Result<SeqInfo> {
    let path = path.as_ref();
    parse_seqinfo_str(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn parse_seqinfo_str(text: &str, source: &str) -> Result<SeqInfo> {
    let mut section: Option<String> = None;
    let mut keys: BTreeMap<String, String> = BTreeMap::new();
    let mut found = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') || line.starts_with('#') {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = Some(inner.trim().to_ascii_lowercase());
            found |= section.as_deref() == Some("sequence");
            continue;
        }
        if section.as_deref() != Some("sequence") {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            keys.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
    }
    if !found {
        return Err(Error::Format {
            path: source.to_string(),
            message: "missing [Sequence] section".into(),
        });
    }

    let number = |key: &str| -> Result<Option<u32>> {
        keys.get(key)
            .map(|v| {
                v.parse::<u32>().map_err(|_| Error::Format {
                    path: source.to_string(),
                    message: format!("{key}: not a non-negative integer: {v:?}"),
                })
            })
            .transpose()
    };
    let frame_rate = match keys.get("framerate") {
        Some(v) => v
            .parse::<f64>()
            .ok()
            .filter(|r| *r > 0.0)
            .ok_or_else(|| Error::Format {
                path: source.to_string(),
                message: format!("frameRate: not a positive number: {v:?}"),
            })?,
        None => DEFAULT_FRAME_RATE,
    };
    Ok(SeqInfo {
        name: keys.get("name").cloned(),
        frame_rate,
        seq_length: number("seqlength")?,
        img_width: number("imwidth")?,
        img_height: number("imheight")?,
        img_dir: keys.get("imdir").cloned(),
        img_ext: keys.get("imext").cloned(),
    })
}

/// Loads a sequence directory laid out as `<dir>/gt/gt.txt`, `<dir>/seqinfo.ini`
/// (optional) and `<dir>/<imDir>` (optional, `img1` by default).
pub fn load_sequence(dir: impl AsRef<Path>, filter: &TargetFilter) -> Result<SequenceGT> {
    let dir = dir.as_ref();
    let mut seq = parse_gt_file(dir.join("gt").join("gt.txt"), filter)?;
    seq.name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    let ini = dir.join("seqinfo.ini");
    let img_dir_name = if ini.is_file() {
        let info = parse_seqinfo(&ini)?;
        seq.apply_seqinfo(&info);
        info.img_dir.unwrap_or_else(|| "img1".to_string())
    } else {
        "img1".to_string()
    };
    let img_dir = dir.join(img_dir_name);
    if img_dir.is_dir() {
        seq.img_dir = Some(img_dir);
    }
    Ok(seq)
}

/// Image file of `frame`: six-digit zero-padded name, `.jpg` probed before `.png`.
pub fn frame_image_path(seq: &SequenceGT, frame: u32) -> Result<PathBuf> {
    let dir = seq
        .img_dir
        .as_ref()
        .ok_or_else(|| Error::NoImageDir(seq.name.clone()))?;
    ["jpg", "png"]
        .iter()
        .map(|ext| dir.join(format!("{frame:06}.{ext}")))
        .find(|p| p.is_file())
        .ok_or_else(|| Error::MissingFrame {
            frame,
            dir: dir.clone(),
        })
}
