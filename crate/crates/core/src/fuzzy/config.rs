use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use regex::Regex;
use serde::Deserialize;

use super::defuzz::{ConsequentScale, DEFAULT_RESOLUTION};
use super::fam::{Consequent, FamMatrix, DEFAULT_FAM};
use super::fcm::{EventNode, FcmEdge, FcmGraph, FuzzyModel, FuzzyRule, Relation};
use super::membership::LinguisticVariable;
use super::window::MetricSpec;
use super::FuzzyError;

pub const DEFAULT_FUZZY_CONFIG: &str = include_str!("../../../../fuzzy/default.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_resolution")]
    resolution: usize,
    #[serde(default = "default_threshold")]
    alert_threshold: String,
    variables: RawVariables,
    scale: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    fam: BTreeMap<String, RawFam>,
    metrics: Vec<RawMetric>,
    events: Vec<RawEvent>,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

fn default_threshold() -> String {
    "HP".into()
}

#[derive(Debug, Deserialize)]
struct RawVariables {
    x: RawVariable,
    t: RawVariable,
}

#[derive(Debug, Deserialize)]
struct RawVariable {
    labels: [String; 5],
    breakpoints: [[f64; 4]; 5],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFam {
    file: PathBuf,
    #[serde(default = "x")]
    rows: String,
    #[serde(default = "t")]
    columns: String,
}

fn x() -> String {
    "x".into()
}

fn t() -> String {
    "t".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    name: String,
    pattern: String,
    x_bounds: [f64; 2],
    t_bounds: [f64; 2],
    window: f64,
}

#[derive(Debug, Deserialize)]
struct RawEvent {
    name: String,
    edges: Vec<RawEdge>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: String,
    fam: Option<String>,
    rules: Option<Vec<String>>,
}

/// Everything the fuzzy stage needs, validated.
#[derive(Debug, Clone)]
pub struct FuzzyEngine {
    pub model: FuzzyModel,
    pub graph: FcmGraph,
    pub metrics: Vec<MetricSpec>,
    pub alert_threshold: Consequent,
}

impl Default for FuzzyEngine {
    fn default() -> Self {
        Self::from_toml(DEFAULT_FUZZY_CONFIG, None).expect("bundled fuzzy config is valid")
    }
}

fn labels_ref(labels: &[String; 5]) -> [&str; 5] {
    [0, 1, 2, 3, 4].map(|i| labels[i].as_str())
}

impl FuzzyEngine {
    pub fn load(path: &Path) -> Result<Self, FuzzyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FuzzyError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent())
    }

    /// Parses a config. FAM files resolve against `base_dir`; without one,
    /// only the bundled `default.fam` is available.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self, FuzzyError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| FuzzyError::Config(e.to_string()))?;
        let err = |m: String| FuzzyError::Config(m);

        let x = LinguisticVariable::new("x", labels_ref(&raw.variables.x.labels), raw.variables.x.breakpoints)?;
        let t = LinguisticVariable::new("t", labels_ref(&raw.variables.t.labels), raw.variables.t.breakpoints)?;

        let mut anchors = [(0.0, 0.0); 4];
        for c in Consequent::ALL {
            let [lo, hi] = raw
                .scale
                .iter()
                .find(|(k, _)| k.parse::<Consequent>().ok() == Some(c))
                .map(|(_, v)| *v)
                .ok_or_else(|| err(format!("scale is missing `{c}`")))?;
            anchors[c.index()] = (lo, hi);
        }
        if raw.scale.len() != 4 {
            return Err(err("scale must list exactly the four consequents".into()));
        }
        let scale = ConsequentScale::new(anchors)?;
        if raw.resolution < 2 {
            return Err(err("resolution must be at least 2".into()));
        }
        let model = FuzzyModel {
            x,
            t,
            scale,
            resolution: raw.resolution,
        };

        let mut fams = BTreeMap::new();
        for (name, spec) in &raw.fam {
            let text = match base_dir {
                Some(dir) => {
                    let path = dir.join(&spec.file);
                    std::fs::read_to_string(&path)
                        .map_err(|e| err(format!("cannot read FAM {}: {e}", path.display())))?
                }
                None if spec.file == Path::new("default.fam") => DEFAULT_FAM.to_string(),
                None => return Err(err(format!("FAM `{name}` needs a config directory to resolve"))),
            };
            let fam = FamMatrix::parse(&text, &spec.rows, &spec.columns)?;
            check_axes(&fam, &model)?;
            fams.insert(name.clone(), Arc::new(fam));
        }

        let mut metrics = Vec::new();
        for m in raw.metrics {
            let pattern = Regex::new(&m.pattern).map_err(|e| err(format!("metric `{}`: {e}", m.name)))?;
            let ordered = |[lo, hi]: [f64; 2]| lo < hi;
            if !(m.window.is_finite() && m.window > 0.0 && ordered(m.x_bounds) && ordered(m.t_bounds)) {
                return Err(err(format!(
                    "metric `{}`: bounds need min < max and window > 0",
                    m.name
                )));
            }
            metrics.push(MetricSpec {
                name: m.name,
                pattern,
                x_bounds: (m.x_bounds[0], m.x_bounds[1]),
                t_bounds: (m.t_bounds[0], m.t_bounds[1]),
                window: m.window,
            });
        }

        let mut events = Vec::new();
        for e in raw.events {
            let mut edges = Vec::new();
            for edge in e.edges {
                let relation = match (edge.fam, edge.rules) {
                    (Some(f), None) => Relation::Fam(
                        fams.get(&f)
                            .cloned()
                            .ok_or_else(|| err(format!("event `{}` names unknown FAM `{f}`", e.name)))?,
                    ),
                    (None, Some(rules)) => Relation::Rules(
                        rules
                            .iter()
                            .map(|r| FuzzyRule::parse(r, &model))
                            .collect::<Result<_, _>>()?,
                    ),
                    _ => return Err(err(format!("edge into `{}` needs exactly one of fam or rules", e.name))),
                };
                edges.push(FcmEdge {
                    from: edge.from,
                    relation,
                });
            }
            events.push(EventNode { name: e.name, edges });
        }
        let graph = FcmGraph::new(metrics.iter().map(|m| m.name.clone()).collect(), events)?;

        Ok(Self {
            model,
            graph,
            metrics,
            alert_threshold: raw.alert_threshold.parse()?,
        })
    }
}

fn check_axes(fam: &FamMatrix, model: &FuzzyModel) -> Result<(), FuzzyError> {
    let var = |name: &str| match name {
        "x" => Ok(&model.x),
        "t" => Ok(&model.t),
        other => Err(FuzzyError::Config(format!("FAM axis bound to unknown input `{other}`"))),
    };
    let (rows, cols) = (var(&fam.row_var)?, var(&fam.col_var)?);
    if fam.row_var == fam.col_var {
        return Err(FuzzyError::Config(
            "FAM rows and columns must bind different inputs".into(),
        ));
    }
    let same = |axis: &[String; 5], v: &LinguisticVariable| {
        axis.iter().zip(v.labels()).all(|(a, b)| a.eq_ignore_ascii_case(b))
    };
    if !same(&fam.row_labels, rows) || !same(&fam.col_labels, cols) {
        return Err(FuzzyError::Config(format!(
            "FAM labels do not match variables (rows={}, columns={})",
            fam.row_var, fam.col_var
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_loads() {
        let engine = FuzzyEngine::default();
        assert_eq!(engine.metrics.len(), 2);
        assert_eq!(engine.graph.events().len(), 2);
        assert_eq!(engine.alert_threshold, Consequent::Hp);
    }

    #[test]
    fn swapped_axes_rejected_by_label_check() {
        let text = DEFAULT_FUZZY_CONFIG.replace("rows = \"x\"\ncolumns = \"t\"", "rows = \"t\"\ncolumns = \"x\"");
        assert!(FuzzyEngine::from_toml(&text, None).is_err());
    }

    #[test]
    fn rule_edges() {
        let text = DEFAULT_FUZZY_CONFIG.replace(
            "edges = [{ from = \"request_rate\", fam = \"default\" }]",
            "edges = [{ from = \"request_rate\", rules = [\"IF x is High AND t is Very Small THEN Intrusion is HP\", \"IF (x is Very high) AND NOT t is Very high THEN Intrusive\"] }]",
        );
        let engine = FuzzyEngine::from_toml(&text, None).unwrap();
        assert_eq!(engine.graph.events()[1].name, "dos");
    }

    #[test]
    fn bad_configs() {
        let edgeless =
            DEFAULT_FUZZY_CONFIG.replace("edges = [{ from = \"request_rate\", fam = \"default\" }]", "edges = []");
        assert!(FuzzyEngine::from_toml(&edgeless, None).is_err());
        let dangling = DEFAULT_FUZZY_CONFIG.replace("from = \"request_rate\"", "from = \"nope\"");
        assert!(FuzzyEngine::from_toml(&dangling, None).is_err());
        let bad_bounds = DEFAULT_FUZZY_CONFIG.replace("x_bounds = [0.0, 50.0]", "x_bounds = [50.0, 50.0]");
        assert!(FuzzyEngine::from_toml(&bad_bounds, None).is_err());
        assert!(FuzzyEngine::from_toml("resolution = 3", None).is_err());
    }
}
