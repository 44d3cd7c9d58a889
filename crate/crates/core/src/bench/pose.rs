//! Pose-grid labels, the dataset manifest and ground-truth cases.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const YAWS: [i32; 5] = [-30, -15, 0, 15, 30];
pub const YAW_STEP: i32 = 15;
pub const HEIGHT_LEVELS: u8 = 3;
/// The height level of template views.
pub const MIDDLE_HEIGHT: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PoseLabel {
    pub point_id: u32,
    pub height_level: u8,
    /// Degrees, a multiple of 15 in `[-30, 30]`.
    pub yaw: i32,
}

impl PoseLabel {
    pub fn new(point_id: u32, height_level: u8, yaw: i32) -> Result<Self> {
        if height_level >= HEIGHT_LEVELS {
            return Err(Error::Manifest(format!(
                "height level {height_level} outside 0..{HEIGHT_LEVELS}"
            )));
        }
        if !YAWS.contains(&yaw) {
            return Err(Error::Manifest(format!("yaw {yaw} is not one of {YAWS:?}")));
        }
        Ok(PoseLabel {
            point_id,
            height_level,
            yaw,
        })
    }

    /// All 15 cells of one capture point, heights outermost.
    pub fn grid(point_id: u32) -> impl Iterator<Item = PoseLabel> {
        (0..HEIGHT_LEVELS).flat_map(move |h| {
            YAWS.into_iter().map(move |yaw| PoseLabel {
                point_id,
                height_level: h,
                yaw,
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateEntry {
    pub path: PathBuf,
    pub pose: PoseLabel,
    pub object: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryEntry {
    pub path: PathBuf,
    pub pose: PoseLabel,
}

/// Template and query images with their pose labels.
///
/// The text form is one record per line, tab separated, with `#` comments:
///
/// ```text
/// template<TAB>path<TAB>point_id<TAB>height_level<TAB>yaw<TAB>object name
/// query<TAB>path<TAB>point_id<TAB>height_level<TAB>yaw
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub templates: Vec<TemplateEntry>,
    pub queries: Vec<QueryEntry>,
}

fn field<'a>(fields: &[&'a str], i: usize, line_no: usize) -> Result<&'a str> {
    fields
        .get(i)
        .copied()
        .ok_or_else(|| Error::Manifest(format!("line {line_no}: missing field {}", i + 1)))
}

fn number<T: std::str::FromStr>(s: &str, what: &str, line_no: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Manifest(format!("line {line_no}: bad {what} {s:?}")))
}

impl DatasetManifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut m = DatasetManifest::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let path = base_dir.join(field(&fields, 1, line_no)?);
            let pose = PoseLabel::new(
                number(field(&fields, 2, line_no)?, "point id", line_no)?,
                number(field(&fields, 3, line_no)?, "height level", line_no)?,
                number(field(&fields, 4, line_no)?, "yaw", line_no)?,
            )
            .map_err(|e| Error::Manifest(format!("line {line_no}: {e}")))?;
            match fields[0] {
                "template" => {
                    let object = fields.get(5).map(|s| s.trim().to_string()).unwrap_or_default();
                    m.templates.push(TemplateEntry { path, pose, object });
                }
                "query" => m.queries.push(QueryEntry { path, pose }),
                other => {
                    return Err(Error::Manifest(format!("line {line_no}: unknown record kind {other:?}")))
                }
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Text form with paths written relative to `base_dir` where possible.
    pub fn to_text(&self, base_dir: &Path) -> String {
        let rel = |p: &Path| p.strip_prefix(base_dir).unwrap_or(p).to_string_lossy().into_owned();
        let mut s = String::from("# kind\tpath\tpoint_id\theight_level\tyaw\tobject\n");
        for t in &self.templates {
            let _ = writeln!(
                s,
                "template\t{}\t{}\t{}\t{}\t{}",
                rel(&t.path),
                t.pose.point_id,
                t.pose.height_level,
                t.pose.yaw,
                t.object
            );
        }
        for q in &self.queries {
            let _ = writeln!(
                s,
                "query\t{}\t{}\t{}\t{}",
                rel(&q.path),
                q.pose.point_id,
                q.pose.height_level,
                q.pose.yaw
            );
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        std::fs::write(path, self.to_text(base)).map_err(|e| Error::io(path, e))
    }

    /// Paths must be distinct within the template list and within the
    /// query list. A path may appear in both (templates drawn from queries).
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for t in &self.templates {
            if !seen.insert(&t.path) {
                return Err(Error::Manifest(format!("duplicate template path {}", t.path.display())));
            }
        }
        seen.clear();
        for q in &self.queries {
            if !seen.insert(&q.path) {
                return Err(Error::Manifest(format!("duplicate query path {}", q.path.display())));
            }
        }
        Ok(())
    }

    /// One case per (template, query of the same capture point), templates
    /// outermost. On a full grid that is `templates x 3 x 5` cases.
    pub fn ground_truth_cases(&self, policy: PositivePolicy) -> Vec<Case> {
        let mut cases = Vec::new();
        for (ti, t) in self.templates.iter().enumerate() {
            for (qi, q) in self.queries.iter().enumerate() {
                if q.pose.point_id == t.pose.point_id {
                    cases.push(Case {
                        template: ti,
                        query: qi,
                        positive: policy.is_positive(&t.pose, &q.pose),
                    });
                }
            }
        }
        cases
    }
}

/// Which (template pose, query pose) pairs count as the same location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositivePolicy {
    /// Same point, any height, yaw within `max_yaw_diff` degrees.
    PoseTolerant { max_yaw_diff: i32 },
    /// Same point and height, yaw within `max_yaw_diff` degrees.
    SameHeight { max_yaw_diff: i32 },
    /// Identical pose only.
    Exact,
}

impl Default for PositivePolicy {
    fn default() -> Self {
        PositivePolicy::PoseTolerant { max_yaw_diff: 30 }
    }
}

impl PositivePolicy {
    pub fn is_positive(self, template: &PoseLabel, query: &PoseLabel) -> bool {
        if template.point_id != query.point_id {
            return false;
        }
        let dyaw = (template.yaw - query.yaw).abs();
        match self {
            PositivePolicy::PoseTolerant { max_yaw_diff } => dyaw <= max_yaw_diff,
            PositivePolicy::SameHeight { max_yaw_diff } => {
                dyaw <= max_yaw_diff && template.height_level == query.height_level
            }
            PositivePolicy::Exact => template == query,
        }
    }
}

/// A ground-truth case: was `query` localized to `template`, and should it be?
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub template: usize,
    pub query: usize,
    pub positive: bool,
}
