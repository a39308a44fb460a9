//! JSON and CSV formats.
//!
//! Floats are written with 17 significant digits so every value round-trips.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::distributions::GreenDistribution;
use crate::error::{Error, Result};
use crate::euler_lagrange::ElCurve;
use crate::kinematics::{ProblemSpec, SegmentKind, Trajectory};
use crate::solver::{Diagnostics, ExpSolverState, SolveReport, Transition};

/// Problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub alpha: f64,
    pub beta: f64,
    pub v_max: f64,
    pub v0: f64,
    pub d: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub distribution: DistributionFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionFile {
    Uniform {
        q: f64,
    },
    Exponential {
        lambda: f64,
    },
    /// Excess time of a renewal process given its interarrival CDF knots `[t, Θ(t)]`.
    Excess {
        interarrival_cdf: Vec<[f64; 2]>,
        mean: f64,
    },
}

impl DistributionFile {
    pub fn build(&self) -> Result<GreenDistribution> {
        match self {
            DistributionFile::Uniform { q } => GreenDistribution::uniform(*q),
            DistributionFile::Exponential { lambda } => GreenDistribution::exponential(*lambda),
            DistributionFile::Excess { interarrival_cdf, mean } => {
                GreenDistribution::excess_from_interarrival(interarrival_cdf, *mean)
            }
        }
    }
}

impl ProblemFile {
    /// Builds the instance without checking the kinematic parameters; see [`crate::validate_problem`].
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        Ok(ProblemSpec {
            alpha: self.alpha,
            beta: self.beta,
            v_max: self.v_max,
            v0: self.v0,
            d: self.d,
            l: self.l,
            dist: self.distribution.build()?,
        })
    }

    pub fn from_spec(p: &ProblemSpec) -> Result<Self> {
        let distribution = match &p.dist {
            GreenDistribution::Uniform { q } => DistributionFile::Uniform { q: *q },
            GreenDistribution::Exponential { lambda } => DistributionFile::Exponential { lambda: *lambda },
            GreenDistribution::Excess(t) => {
                let origin =
                    t.origin().ok_or_else(|| Error::InvalidTable("density has no interarrival origin".into()))?;
                DistributionFile::Excess { interarrival_cdf: origin.cdf_knots.clone(), mean: origin.mean }
            }
        };
        Ok(Self { alpha: p.alpha, beta: p.beta, v_max: p.v_max, v0: p.v0, d: p.d, l: p.l, distribution })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKindFile {
    Alpha,
    Beta,
    Vmax,
    Zero,
    El,
}

/// One segment; `duration` is null for an endless hold and `B` is the isobar offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub kind: SegmentKindFile,
    pub t_start: f64,
    pub duration: Option<f64>,
    pub v_start: f64,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFile {
    pub segments: Vec<SegmentFile>,
}

impl TrajectoryFile {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let segments = traj
            .segments()
            .iter()
            .map(|s| {
                let (kind, offset) = match s.kind() {
                    SegmentKind::Alpha => (SegmentKindFile::Alpha, None),
                    SegmentKind::Beta => (SegmentKindFile::Beta, None),
                    SegmentKind::VMaxHold => (SegmentKindFile::Vmax, None),
                    SegmentKind::ZeroHold => (SegmentKindFile::Zero, None),
                    SegmentKind::EulerLagrange(c) => (SegmentKindFile::El, Some(c.offset())),
                };
                let duration = s.duration().is_finite().then_some(s.duration());
                SegmentFile { kind, t_start: s.t_start(), duration, v_start: s.v_start(), offset }
            })
            .collect();
        Self { segments }
    }

    pub fn to_trajectory(&self, p: &ProblemSpec) -> Result<Trajectory> {
        let mut parts = Vec::with_capacity(self.segments.len());
        for (i, s) in self.segments.iter().enumerate() {
            let kind = match (s.kind, s.offset) {
                (SegmentKindFile::Alpha, None) => SegmentKind::Alpha,
                (SegmentKindFile::Beta, None) => SegmentKind::Beta,
                (SegmentKindFile::Vmax, None) => SegmentKind::VMaxHold,
                (SegmentKindFile::Zero, None) => SegmentKind::ZeroHold,
                (SegmentKindFile::El, Some(b)) => {
                    SegmentKind::EulerLagrange(ElCurve::with_offset(&p.dist, p.alpha, p.v_max, b))
                }
                (SegmentKindFile::El, None) => {
                    return Err(Error::Schema {
                        path: format!("segments[{i}].B"),
                        message: "missing isobar offset".into(),
                    })
                }
                (_, Some(_)) => {
                    return Err(Error::Schema {
                        path: format!("segments[{i}].B"),
                        message: "only isobar segments carry an offset".into(),
                    })
                }
            };
            parts.push((kind, s.t_start, s.duration.unwrap_or(f64::INFINITY), s.v_start));
        }
        Trajectory::from_parts(p, parts)
    }
}

/// Solver output as written to disk.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile<'a> {
    pub pattern: String,
    pub expected_arrival: f64,
    pub v_c_star: Option<f64>,
    pub level: Option<f64>,
    pub transitions: &'a [Transition],
    pub exponential: Option<&'a ExpSolverState>,
    pub diagnostics: Diagnostics,
    pub trajectory: TrajectoryFile,
}

impl<'a> ReportFile<'a> {
    pub fn new(r: &'a SolveReport) -> Self {
        Self {
            pattern: r.pattern.to_string(),
            expected_arrival: r.expected_arrival,
            v_c_star: r.exponential.as_ref().and_then(|e| e.v_c_star.value()),
            level: r.level,
            transitions: &r.transitions,
            exponential: r.exponential.as_ref(),
            diagnostics: r.diagnostics,
            trajectory: TrajectoryFile::from_trajectory(&r.trajectory),
        }
    }
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Schema { path: e.path().to_string(), message: e.inner().to_string() })
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    from_json(text)
}

/// Reads a trajectory file, or the `trajectory` member of a solver report.
pub fn parse_trajectory(text: &str) -> Result<TrajectoryFile> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Schema { path: ".".into(), message: e.to_string() })?;
    match value.get("trajectory") {
        Some(inner) if value.get("pattern").is_some() => from_json(&inner.to_string()).map_err(|e| match e {
            Error::Schema { path, message } => Error::Schema { path: format!("trajectory.{path}"), message },
            other => other,
        }),
        _ => from_json(text),
    }
}

/// `serde_json` formatter printing floats with 17 significant digits.
struct Precise(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17 significant digits; non-finite floats become null.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Schema { path: ".".into(), message: e.to_string() })?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Formats a float for CSV: 17 significant digits, empty when not finite.
pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// Writes a header and rows of preformatted cells.
pub fn write_csv<W: Write, R: IntoIterator<Item = Vec<String>>>(out: W, header: &[&str], rows: R) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema { path: "csv".into(), message: format!("{other:?}") },
    };
    w.write_record(header).map_err(map)?;
    for row in rows {
        w.write_record(&row).map_err(map)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::expected_arrival;
    use crate::solve;

    const FIGURE: &str = r#"{"alpha": 6, "beta": 20, "v_max": 200, "v0": 200, "d": 4000, "L": 4000,
        "distribution": {"kind": "exponential", "lambda": 0.1}}"#;

    #[test]
    fn unknown_fields_are_rejected_with_a_path() {
        let bad = FIGURE.replace("\"lambda\"", "\"lambda\": 0.1, \"rate\"");
        match parse_problem(&bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "distribution"),
            other => panic!("{other:?}"),
        }
        let bad = FIGURE.replace("\"v0\": 200", "\"v0\": \"fast\"");
        match parse_problem(&bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "v0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn problem_round_trip() {
        let f = parse_problem(FIGURE).unwrap();
        let p = f.to_spec().unwrap();
        let back = ProblemFile::from_spec(&p).unwrap();
        assert_eq!(parse_problem(&to_json(&back).unwrap()).unwrap(), f);
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json(&[0.1f64, 1.0 / 3.0, f64::NAN]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("null"));
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[1], Some(1.0 / 3.0));
    }

    #[test]
    fn report_trajectory_round_trip() {
        let p = parse_problem(FIGURE).unwrap().to_spec().unwrap();
        let r = solve(&p).unwrap();
        let text = to_json(&ReportFile::new(&r)).unwrap();
        let traj = parse_trajectory(&text).unwrap().to_trajectory(&p).unwrap();
        let s = expected_arrival(&traj, &p).unwrap();
        assert!((s - r.expected_arrival).abs() <= 1e-12 * s);
    }

    #[test]
    fn csv_cells() {
        let mut out = Vec::new();
        write_csv(&mut out, &["v_c", "cost"], [vec![csv_float(1.5), csv_float(f64::NAN)]]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "v_c,cost\n1.5000000000000000e0,\n");
    }
}
