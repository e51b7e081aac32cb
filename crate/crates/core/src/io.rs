//! JSON, CSV and SVG formats.
//!
//! Reals are written with 17 significant digits so that files round-trip.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;

use crate::chaos::ChaosPoints;
use crate::error::{FracError, Result};
use crate::grid::SampleSet;
use crate::histo::{HistoSolution, Histogram};
use crate::poly::{PiecewisePolynomial, Polynomial};
use crate::system::{DataSet, FractalSystem, Partition, ScaleFactors};

/// `f64` written as `d.dddddddddddddddde±x`; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(fmt_real(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Option::<f64>::deserialize(d).map(|v| Real(v.unwrap_or(f64::NAN)))
    }
}

pub fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().map(|&x| Real(x)).collect()
}

pub fn unreal(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDoc {
    pub breakpoints: Vec<Real>,
    pub pieces: Vec<Vec<Real>>,
}

impl PiecewiseDoc {
    pub fn from_poly(p: &PiecewisePolynomial) -> Self {
        Self {
            breakpoints: reals(p.breakpoints()),
            pieces: p.pieces().iter().map(|q| reals(q.coeffs())).collect(),
        }
    }

    pub fn to_poly(&self) -> Result<PiecewisePolynomial> {
        PiecewisePolynomial::from_coeffs(
            unreal(&self.breakpoints),
            self.pieces.iter().map(|c| unreal(c)).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDoc {
    #[serde(default)]
    pub variant: String,
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Vec<[Real; 2]>>,
    /// Provenance: options that produced the file.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
}

/// System descriptor: `{knots, alpha, q, meta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub knots: Vec<Real>,
    pub alpha: Vec<Real>,
    pub q: Vec<PiecewiseDoc>,
    #[serde(default = "empty_meta")]
    pub meta: MetaDoc,
}

fn empty_meta() -> MetaDoc {
    MetaDoc {
        variant: String::new(),
        source: String::new(),
        data: None,
        params: BTreeMap::new(),
    }
}

impl SystemDoc {
    pub fn from_system(sys: &FractalSystem, params: BTreeMap<String, Value>) -> Self {
        Self {
            knots: reals(sys.partition().knots()),
            alpha: reals(sys.alpha()),
            q: sys.q().iter().map(PiecewiseDoc::from_poly).collect(),
            meta: MetaDoc {
                variant: sys.variant().name().to_string(),
                source: sys.source().to_string(),
                data: sys
                    .data()
                    .map(|d| d.points().iter().map(|&(x, y)| [Real(x), Real(y)]).collect()),
                params,
            },
        }
    }

    /// Rebuild and re-validate; the stored variant is informational only.
    pub fn to_system(&self) -> Result<FractalSystem> {
        let partition = Partition::new(unreal(&self.knots))?;
        let scales = ScaleFactors::new(unreal(&self.alpha))?;
        let q = self
            .q
            .iter()
            .map(PiecewiseDoc::to_poly)
            .collect::<Result<Vec<_>>>()?;
        let data = match &self.meta.data {
            Some(pts) => Some(DataSet::new(pts.iter().map(|p| (p[0].0, p[1].0)).collect())?),
            None => None,
        };
        let source = if self.meta.source.is_empty() {
            "file"
        } else {
            self.meta.source.as_str()
        };
        FractalSystem::new(partition, scales, q, data, source)
    }
}

/// Histogram file: `{knots, frequencies}` plus optional solver settings that
/// command-line flags override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramDoc {
    pub knots: Vec<Real>,
    pub frequencies: Vec<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<QSpec>>,
}

impl HistogramDoc {
    pub fn from_histogram(h: &Histogram) -> Self {
        Self {
            knots: reals(h.partition().knots()),
            frequencies: reals(h.frequencies()),
            mode: None,
            alpha: None,
            slopes: None,
            y0: None,
            q: None,
        }
    }

    pub fn to_histogram(&self) -> Result<Histogram> {
        Histogram::new(Partition::new(unreal(&self.knots))?, unreal(&self.frequencies))
    }
}

/// A map `q_i`: either a full piecewise polynomial or bare ascending
/// coefficients of one polynomial on the whole interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSpec {
    Piecewise(PiecewiseDoc),
    Coeffs(Vec<Real>),
}

impl QSpec {
    pub fn to_poly(&self, partition: &Partition) -> Result<PiecewisePolynomial> {
        match self {
            QSpec::Piecewise(d) => d.to_poly(),
            QSpec::Coeffs(c) => PiecewisePolynomial::single(
                Polynomial::new(unreal(c)),
                partition.lo(),
                partition.hi(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsDoc {
    pub solver: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_pivot: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_n: Option<Real>,
}

/// Solution report: the system descriptor (or `null`) plus area checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionDoc {
    pub system: Option<SystemDoc>,
    pub alpha: Vec<Real>,
    pub areas: Vec<Real>,
    pub targets: Vec<Real>,
    pub residuals: Vec<Real>,
    pub feasible: bool,
    pub diagnostics: DiagnosticsDoc,
    pub meta: BTreeMap<String, Value>,
}

impl SolutionDoc {
    pub fn from_solution(s: &HistoSolution, params: BTreeMap<String, Value>) -> Self {
        let d = &s.diagnostics;
        Self {
            system: s
                .system
                .as_ref()
                .map(|sys| SystemDoc::from_system(sys, params.clone())),
            alpha: reals(&s.alpha),
            areas: reals(&s.areas),
            targets: reals(&s.targets),
            residuals: reals(&s.area_residuals),
            feasible: s.feasible,
            diagnostics: DiagnosticsDoc {
                solver: d.solver.to_string(),
                condition: d.condition.map(Real),
                min_pivot: d.min_pivot.map(Real),
                y0: d.y0.map(Real),
                y_n: d.y_n.map(Real),
            },
            meta: params,
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| FracError::BadData(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| FracError::BadData(format!("invalid JSON: {e}")))
}

pub fn system_to_json(sys: &FractalSystem) -> Result<String> {
    to_json(&SystemDoc::from_system(sys, BTreeMap::new()))
}

pub fn system_from_json(text: &str) -> Result<FractalSystem> {
    from_json::<SystemDoc>(text)?.to_system()
}

/// `x,value,code`, one row per sample; a left limit precedes the right value.
pub fn sample_csv(set: &SampleSet, n: usize) -> String {
    let mut out = String::from("x,value,code\n");
    for r in set.rows() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_real(r.x),
            fmt_real(r.value),
            r.address.code_string(n)
        );
    }
    out
}

/// `x,y`
pub fn chaos_csv(points: &ChaosPoints) -> String {
    let mut out = String::from("x,y\n");
    for &(x, y) in &points.points {
        let _ = writeln!(out, "{},{}", fmt_real(x), fmt_real(y));
    }
    out
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 500.0;
const SVG_PAD: f64 = 20.0;

fn frame(points: impl Iterator<Item = (f64, f64)> + Clone) -> impl Fn(f64, f64) -> (f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let dx = if x1 > x0 { x1 - x0 } else { 1.0 };
    let dy = if y1 > y0 { y1 - y0 } else { 1.0 };
    move |x, y| {
        (
            SVG_PAD + (x - x0) / dx * (SVG_W - 2.0 * SVG_PAD),
            SVG_H - SVG_PAD - (y - y0) / dy * (SVG_H - 2.0 * SVG_PAD),
        )
    }
}

fn svg_open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Polyline through the grid in row order; jumps show up as vertical
/// segments between a left limit and the right value.
pub fn sample_svg(set: &SampleSet) -> String {
    let pts: Vec<(f64, f64)> = set.rows().iter().map(|r| (r.x, r.value)).collect();
    let to_px = frame(pts.iter().copied());
    let mut out = svg_open();
    out.push_str("<polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.6\" points=\"");
    for (i, &(x, y)) in pts.iter().enumerate() {
        let (px, py) = to_px(x, y);
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{px:.3},{py:.3}");
    }
    out.push_str("\"/>\n</svg>\n");
    out
}

pub fn chaos_svg(points: &ChaosPoints) -> String {
    let to_px = frame(points.points.iter().copied());
    let mut out = svg_open();
    for &(x, y) in &points.points {
        let (px, py) = to_px(x, y);
        let _ = writeln!(out, "<circle cx=\"{px:.3}\" cy=\"{py:.3}\" r=\"0.7\"/>");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_grid;
    use crate::system::*;

    fn histopolant() -> FractalSystem {
        let p = make_partition(&[0.0, 0.5, 1.0]).unwrap();
        let q = vec![
            PiecewisePolynomial::single(Polynomial::linear(1.0, 0.25), 0.0, 1.0).unwrap(),
            PiecewisePolynomial::single(Polynomial::linear(2.0, 0.75), 0.0, 1.0).unwrap(),
        ];
        FractalSystem::new(p, ScaleFactors::uniform(0.5, 2).unwrap(), q, None, "t").unwrap()
    }

    #[test]
    fn reals_have_17_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(f64::NAN), "null");
        let s = serde_json::to_string(&vec![Real(2.5)]).unwrap();
        assert_eq!(s, "[2.5000000000000000e0]");
    }

    #[test]
    fn system_round_trip() {
        let d = DataSet::new(vec![(0.0, 0.0), (0.3, 0.7), (1.0, 0.2)]).unwrap();
        let sys = build_affine_fif(&d, &ScaleFactors::new(vec![0.3, -0.6]).unwrap()).unwrap();
        let text = system_to_json(&sys).unwrap();
        let back = system_from_json(&text).unwrap();
        assert_eq!(back, sys);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["meta"]["variant"], "continuous_interpolatory");
    }

    #[test]
    fn histogram_doc_accepts_coefficient_lists() {
        let text = r#"{"knots":[0,0.5,1],"frequencies":[2,3],"q":[[0.25,1],[0.75,2]]}"#;
        let doc: HistogramDoc = from_json(text).unwrap();
        let h = doc.to_histogram().unwrap();
        let q = doc.q.unwrap()[1].to_poly(h.partition()).unwrap();
        assert_eq!(q.eval(1.0), 2.75);
    }

    #[test]
    fn csv_lists_left_limits_first() {
        let set = sample_grid(&histopolant(), 1).unwrap();
        let csv = sample_csv(&set, 2);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,value,code");
        // jump at 1/2: left value 0.5*5.5 + 1.25 = 4, right value 1
        let at_half: Vec<&&str> = lines.iter().filter(|l| l.starts_with("5.0000000000000000e-1")).collect();
        assert_eq!(at_half.len(), 2);
        assert!(at_half[0].contains(",4.0000000000000000e0,"));
        assert!(at_half[1].contains(",1.0000000000000000e0,"));
    }

    #[test]
    fn malformed_input_is_bad_data() {
        assert!(matches!(system_from_json("{"), Err(FracError::BadData(_))));
    }
}
