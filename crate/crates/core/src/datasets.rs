//! Bundled datasets, failure-time binning and stress normalization.
//!
//! Dataset files are plain text. Header lines start with `#` and hold
//! `key: value` pairs; every other non-empty line is one value (a failure
//! time, or a count for pre-binned data where the last count is the number
//! of survivors).
//!
//! Recognised header keys:
//!
//! | key | meaning |
//! |---|---|
//! | `name`, `description` | free text |
//! | `time_unit`, `stress_unit` | free text |
//! | `kind` | `failure_times` or `counts` |
//! | `n_total` | devices on test (required for `failure_times`) |
//! | `stress_levels` | physical stress levels, comma separated |
//! | `change_times` | stress change times, last = termination |
//! | `inspection_times` | inspection times |
//! | `x0` | default operating stress (physical units) |
//! | `mission_time` | default mission time for reliability |
//! | `correct` | `printed -> used`, replaces one printed value on ingestion |
//! | `normalization` | `lo, hi` anchors of the stress map (default: lowest and highest level) |
//! | `survivors` | `keep` (default) or `drop`: remove right-censored survivors before analysis |

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{IntervalData, StressPlan};

const SOLAR: &str = include_str!("../data/solar.txt");
const TRANSISTOR: &str = include_str!("../data/transistor.txt");
const LED: &str = include_str!("../data/led.txt");

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["solar", "transistor", "led"];

/// Exact failure times before binning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawLifetimeData {
    /// Sorted ascending.
    pub failure_times: Vec<f64>,
    pub n_total: u64,
    /// Plan in physical stress units.
    pub plan_raw: StressPlan,
    pub censored_note: String,
}

impl RawLifetimeData {
    pub fn new(
        mut failure_times: Vec<f64>,
        n_total: u64,
        plan_raw: StressPlan,
        censored_note: impl Into<String>,
    ) -> Result<Self> {
        if failure_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Data("failure times must be finite and non-negative".into()));
        }
        if failure_times.len() as u64 > n_total {
            return Err(Error::Data(format!(
                "{} failure times exceed the {} devices on test",
                failure_times.len(),
                n_total
            )));
        }
        failure_times.sort_by(f64::total_cmp);
        Ok(Self { failure_times, n_total, plan_raw, censored_note: censored_note.into() })
    }
}

/// Affine map of physical stress, `x ↦ (x − x_min)/(x_max − x_min)`; by
/// default the anchors are the lowest and highest tested levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMap {
    pub x_min: f64,
    pub x_max: f64,
}

impl NormalizationMap {
    pub fn new(x_min: f64, x_max: f64) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::invalid(format!("normalization needs x_max > x_min, got [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max })
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.x_min) / (self.x_max - self.x_min)
    }

    pub fn invert(&self, z: f64) -> f64 {
        self.x_min + z * (self.x_max - self.x_min)
    }
}

/// Counts failures per interval `(t_{j-1}, t_j]`; devices not failed by
/// `t_L` are survivors.
pub fn bin_failures(raw: &RawLifetimeData, inspection_times: &[f64]) -> Result<IntervalData> {
    if inspection_times.is_empty() || !inspection_times.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("inspection times must be non-empty and strictly increasing"));
    }
    let l = inspection_times.len();
    let mut counts = vec![0u64; l + 1];
    let mut failed = 0u64;
    for &t in &raw.failure_times {
        match inspection_times.iter().position(|&it| t <= it) {
            Some(j) => {
                counts[j] += 1;
                failed += 1;
            }
            None => warn!("failure time {t} is beyond the last inspection, counted as survivor"),
        }
    }
    counts[l] = raw.n_total - failed;
    IntervalData::new(counts)
}

/// Min–max normalizes the stress levels of `plan_raw` and maps `x0` with
/// the same affine transform (it may fall outside `[0, 1]`).
pub fn normalize_stress(plan_raw: &StressPlan, x0_physical: f64) -> Result<(StressPlan, f64)> {
    let map = normalization_map(plan_raw)?;
    let x0 = map.apply(x0_physical);
    if !(0.0..=1.0).contains(&x0) {
        warn!("operating stress {x0_physical} lies outside the tested range (normalized {x0:.3})");
    }
    Ok((normalized_plan(plan_raw, &map)?, x0))
}

pub fn normalization_map(plan_raw: &StressPlan) -> Result<NormalizationMap> {
    let x = plan_raw.stress_levels();
    if x.len() < 2 {
        return Err(Error::invalid("normalization needs at least two stress levels"));
    }
    NormalizationMap::new(x[0], x[x.len() - 1])
}

fn normalized_plan(plan_raw: &StressPlan, map: &NormalizationMap) -> Result<StressPlan> {
    StressPlan::new(
        plan_raw.stress_levels().iter().map(|&x| map.apply(x)).collect(),
        plan_raw.change_times().to_vec(),
        plan_raw.inspection_times().to_vec(),
    )
}

/// A loaded dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub description: String,
    pub time_unit: String,
    pub stress_unit: String,
    /// Plan in physical stress units.
    pub plan_raw: StressPlan,
    /// Data used for fitting (survivors removed when `survivors: drop`).
    pub data: IntervalData,
    /// Survivors removed from `data`.
    pub dropped_survivors: u64,
    /// Stress map anchors; `None` means min–max over the tested levels.
    pub anchors: Option<NormalizationMap>,
    /// Present when the file lists failure times.
    pub raw: Option<RawLifetimeData>,
    pub x0: Option<f64>,
    pub mission_time: Option<f64>,
    /// Human-readable list of applied corrections.
    pub corrections: Vec<String>,
    /// SHA-256 of the file contents, hex encoded.
    pub sha256: String,
}

impl Dataset {
    pub fn normalization(&self) -> Result<NormalizationMap> {
        match self.anchors {
            Some(m) => Ok(m),
            None => normalization_map(&self.plan_raw),
        }
    }

    /// Counts including any survivors removed for the analysis.
    pub fn full_data(&self) -> Result<IntervalData> {
        let mut c = self.data.counts().to_vec();
        *c.last_mut().expect("non-empty") += self.dropped_survivors;
        IntervalData::new(c)
    }

    /// Copy of the dataset with dropped survivors restored.
    pub fn with_survivors(&self) -> Result<Self> {
        Ok(Self { data: self.full_data()?, dropped_survivors: 0, ..self.clone() })
    }

    /// Plan on the normalized stress scale.
    pub fn plan(&self) -> Result<StressPlan> {
        normalized_plan(&self.plan_raw, &self.normalization()?)
    }

    /// Operating stress on the normalized scale.
    pub fn normalized_x0(&self, x0_physical: f64) -> Result<f64> {
        Ok(self.normalization()?.apply(x0_physical))
    }
}

/// Loads one of [`BUILTIN_NAMES`].
pub fn builtin(name: &str) -> Result<Dataset> {
    let text = match name.to_ascii_lowercase().as_str() {
        "solar" => SOLAR,
        "transistor" => TRANSISTOR,
        "led" => LED,
        other => {
            return Err(Error::Data(format!("unknown builtin dataset '{other}' (expected one of {BUILTIN_NAMES:?})")))
        }
    };
    parse_dataset(text)
}

/// Loads a builtin by name, otherwise reads the file at `spec`.
pub fn load(spec: &str) -> Result<Dataset> {
    if BUILTIN_NAMES.contains(&spec.to_ascii_lowercase().as_str()) && !Path::new(spec).exists() {
        return builtin(spec);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Error::Data(format!("cannot read {spec}: {e}")))?;
    parse_dataset(&text)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Data(format!("{key}: bad number '{}': {e}", s.trim()))))
        .collect()
}

/// Parses the text format described in the module docs.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect::<String>();
    let mut name = String::from("unnamed");
    let mut description = String::new();
    let mut time_unit = String::new();
    let mut stress_unit = String::new();
    let mut kind = String::from("failure_times");
    let mut n_total: Option<u64> = None;
    let mut levels = None;
    let mut changes = None;
    let mut inspections = None;
    let mut x0 = None;
    let mut mission_time = None;
    let mut corrections: Vec<(String, String)> = Vec::new();
    let mut anchors = None;
    let mut drop_survivors = false;
    let mut values: Vec<&str> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let Some((k, v)) = h.split_once(':') else { continue };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "name" => name = v.to_string(),
                "description" => description = v.to_string(),
                "time_unit" => time_unit = v.to_string(),
                "stress_unit" => stress_unit = v.to_string(),
                "kind" => kind = v.to_string(),
                "n_total" => {
                    n_total = Some(v.parse().map_err(|e| Error::Data(format!("line {}: n_total: {e}", lineno + 1)))?)
                }
                "stress_levels" => levels = Some(parse_list(k, v)?),
                "change_times" => changes = Some(parse_list(k, v)?),
                "inspection_times" => inspections = Some(parse_list(k, v)?),
                "x0" => x0 = Some(parse_list(k, v)?[0]),
                "mission_time" => mission_time = Some(parse_list(k, v)?[0]),
                "correct" => {
                    let (from, to) = v
                        .split_once("->")
                        .ok_or_else(|| Error::Data(format!("line {}: correct needs 'printed -> used'", lineno + 1)))?;
                    corrections.push((from.trim().to_string(), to.trim().to_string()));
                }
                "normalization" => {
                    let v = parse_list(k, v)?;
                    if v.len() != 2 {
                        return Err(Error::Data(format!("line {}: normalization needs 'lo, hi'", lineno + 1)));
                    }
                    anchors = Some(NormalizationMap::new(v[0], v[1]).map_err(|e| Error::Data(e.to_string()))?);
                }
                "survivors" => {
                    drop_survivors = match v {
                        "drop" => true,
                        "keep" => false,
                        _ => return Err(Error::Data(format!("line {}: survivors must be keep or drop", lineno + 1))),
                    }
                }
                _ => warn!("line {}: ignoring unknown header key '{k}'", lineno + 1),
            }
        } else {
            values.push(line);
        }
    }
    let missing = |what: &str| Error::Data(format!("dataset header is missing '{what}'"));
    let plan_raw = StressPlan::new(
        levels.ok_or_else(|| missing("stress_levels"))?,
        changes.ok_or_else(|| missing("change_times"))?,
        inspections.ok_or_else(|| missing("inspection_times"))?,
    )
    .map_err(|e| Error::Data(format!("invalid plan: {e}")))?;

    let mut applied = Vec::new();
    let mut owned: Vec<String> = values.iter().map(|s| s.to_string()).collect();
    for (from, to) in corrections {
        let pos = owned
            .iter()
            .position(|v| *v == from)
            .ok_or_else(|| Error::Data(format!("correction target '{from}' not found")))?;
        owned[pos] = to.clone();
        applied.push(format!("{from} read as {to}"));
    }

    let (data, raw) = match kind.as_str() {
        "failure_times" => {
            let times = owned
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Data(format!("bad failure time '{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let n = n_total.ok_or_else(|| missing("n_total"))?;
            let raw = RawLifetimeData::new(times, n, plan_raw.clone(), "survivors are right censored at termination")?;
            (bin_failures(&raw, plan_raw.inspection_times())?, Some(raw))
        }
        "counts" => {
            let counts = owned
                .iter()
                .map(|s| s.parse::<u64>().map_err(|e| Error::Data(format!("bad count '{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let d = IntervalData::for_plan(counts, &plan_raw)?;
            if let Some(n) = n_total {
                if n != d.total() {
                    return Err(Error::Data(format!("counts sum to {} but n_total is {n}", d.total())));
                }
            }
            (d, None)
        }
        other => return Err(Error::Data(format!("unknown dataset kind '{other}'"))),
    };
    data.check_plan(&plan_raw)?;
    let (data, dropped_survivors) = if drop_survivors {
        let mut c = data.counts().to_vec();
        let s = std::mem::take(c.last_mut().expect("non-empty"));
        (IntervalData::new(c)?, s)
    } else {
        (data, 0)
    };
    Ok(Dataset {
        name,
        description,
        time_unit,
        stress_unit,
        plan_raw,
        data,
        dropped_survivors,
        anchors,
        raw,
        x0,
        mission_time,
        corrections: applied,
        sha256,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solar_binning() {
        let d = builtin("solar").unwrap();
        assert_eq!(d.full_data().unwrap().counts(), &[3, 8, 5, 5, 5, 5, 4]);
        assert_eq!(d.full_data().unwrap().total(), 35);
        assert_eq!(d.data.counts(), &[3, 8, 5, 5, 5, 5, 0]);
        assert_eq!(d.dropped_survivors, 4);
        assert_eq!(d.corrections.len(), 1);
        let raw = d.raw.as_ref().unwrap();
        assert_eq!(raw.failure_times.len(), 31);
        assert_eq!(raw.failure_times[0], 0.140);
    }

    #[test]
    fn led_binning() {
        let d = builtin("led").unwrap();
        assert_eq!(d.full_data().unwrap().counts(), &[0, 4, 5, 14, 4]);
    }

    #[test]
    fn transistor_counts_and_map() {
        let d = builtin("transistor").unwrap();
        assert_eq!(d.data.counts(), &[0, 0, 0, 2, 5, 5, 3, 3, 0, 9, 0]);
        assert_eq!(d.data.total(), 27);
        assert_eq!(d.dropped_survivors, 4);
        assert_eq!(d.normalized_x0(25.0).unwrap(), 0.0);
        assert_eq!(d.plan().unwrap().stress_levels()[0], 1.0);
    }

    #[test]
    fn normalization_examples() {
        let solar = builtin("solar").unwrap();
        let (plan, x0) = normalize_stress(&solar.plan_raw, 293.0).unwrap();
        assert_eq!(plan.stress_levels(), &[0.0, 1.0]);
        assert_eq!(x0, 0.0);
        let led = builtin("led").unwrap();
        let (plan, x0) = normalize_stress(&led.plan_raw, 448.0).unwrap();
        let want = [0.0, 50.0 / 85.0, 70.0 / 85.0, 1.0];
        for (a, b) in plan.stress_levels().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((plan.stress_levels()[1] - 0.588).abs() < 1e-3);
        assert!((plan.stress_levels()[2] - 0.824).abs() < 1e-3);
        assert_eq!(x0, 1.0);
        let single = StressPlan::new(vec![1.0], vec![2.0], vec![2.0]).unwrap();
        assert!(normalize_stress(&single, 1.0).is_err());
    }

    #[test]
    fn late_failure_becomes_survivor() {
        let plan = StressPlan::new(vec![0.0, 1.0], vec![1.0, 2.0], vec![1.0, 2.0]).unwrap();
        let raw = RawLifetimeData::new(vec![1.5, 0.5, 3.0], 4, plan.clone(), "").unwrap();
        let d = bin_failures(&raw, plan.inspection_times()).unwrap();
        assert_eq!(d.counts(), &[1, 1, 2]);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_dataset("1\n2\n").is_err());
        let bad = "# stress_levels: 1, 2\n# change_times: 1, 2\n# inspection_times: 1, 2\n# kind: counts\n1\n2\n";
        assert!(parse_dataset(bad).is_err());
        let ok = "# stress_levels: 1, 2\n# change_times: 1, 2\n# inspection_times: 1, 2\n# kind: counts\n1\n2\n3\n";
        assert_eq!(parse_dataset(ok).unwrap().data.total(), 6);
        assert!(builtin("nope").is_err());
    }
}
