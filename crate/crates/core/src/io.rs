//! Site files, the structured diagram document, SVG rendering and the
//! end-to-end run used by the `hvd` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lifting::SubsetGenerator;
use crate::model::{ambient_to_klein, klein_to_poincare_closed, poincare_to_klein, AmbientPoint, KleinPoint};
use crate::oracle::{verify_diagram, VerificationReport};
use crate::power::{build_hvd, validate_sites, ClippedDiagram, Edge};

/// Tie margin (on the equivalent Klein distance) used by `run` verification.
pub const VERIFY_MARGIN: f64 = 1e-7;

const FORMAT_TAG: &str = "hvd-diagram";
const SVG_SIZE: u32 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputModel {
    Klein,
    Poincare,
    Ambient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputModel {
    Klein,
    Poincare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Svg,
    Structured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub input_model: InputModel,
    pub order: usize,
    pub clip_l: f64,
    pub output_model: OutputModel,
    pub format: OutputFormat,
    /// Destination file; `None` writes to stdout.
    pub out: Option<PathBuf>,
    pub verify_samples: usize,
    pub seed: u64,
    /// Sampling step for drawing Klein segments in the Poincaré disk.
    pub arc_step: f64,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            input_model: InputModel::Klein,
            order: 1,
            clip_l: 1.0,
            output_model: OutputModel::Klein,
            format: OutputFormat::Structured,
            out: None,
            verify_samples: 0,
            seed: 0,
            arc_step: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::Config("order must be at least 1".into()));
        }
        if !(self.clip_l > 0.0 && self.clip_l <= 1.0) {
            return Err(Error::InvalidClipRadius(self.clip_l));
        }
        if !(self.arc_step > 0.0 && self.arc_step.is_finite()) {
            return Err(Error::Config(format!("arc step must be positive, got {}", self.arc_step)));
        }
        Ok(())
    }
}

fn convert_site(raw: [f64; 2], model: InputModel) -> Result<KleinPoint> {
    match model {
        InputModel::Klein => KleinPoint::new(raw),
        InputModel::Poincare => poincare_to_klein(&raw),
        InputModel::Ambient => ambient_to_klein(&AmbientPoint::new(raw)?),
    }
}

fn json_points(value: &Value) -> Option<&Vec<Value>> {
    match value {
        Value::Array(items) => Some(items),
        Value::Object(map) => map
            .get("sites")
            .or_else(|| map.get("diagram").and_then(|d| d.get("sites")))
            .and_then(Value::as_array),
        _ => None,
    }
}

fn parse_json_sites(text: &str, path: &str) -> Result<Vec<[f64; 2]>> {
    let parse_err = |line, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let value: Value = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let items = json_points(&value)
        .ok_or_else(|| parse_err(1, "expected an array of [x, y] points or an object with \"sites\"".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            serde_json::from_value::<[f64; 2]>(item.clone())
                .map_err(|e| parse_err(1, format!("site {i}: {e}")))
        })
        .collect()
}

fn parse_text_sites(text: &str, path: &str) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed.as_deref() {
            Some(&[x, y]) => out.push([x, y]),
            _ => {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line: lineno + 1,
                    message: format!("expected two numbers, got {line:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// Parses sites from either JSON (`[[x, y], ...]`, `{"sites": ...}` or a
/// structured diagram document) or whitespace/comma separated lines, and
/// normalizes them to Klein coordinates.
pub fn parse_sites(text: &str, path: &str, model: InputModel) -> Result<Vec<KleinPoint>> {
    let trimmed = text.trim_start();
    let raw = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        parse_json_sites(text, path)?
    } else {
        parse_text_sites(text, path)?
    };
    let sites = raw
        .into_iter()
        .enumerate()
        .map(|(index, p)| {
            convert_site(p, model).map_err(|e| Error::Site {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    validate_sites(&sites)?;
    Ok(sites)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_sites(path: &Path, model: InputModel) -> Result<Vec<KleinPoint>> {
    parse_sites(&read(path)?, &path.display().to_string(), model)
}

/// The structured output document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDocument {
    pub format: String,
    /// Coordinates in the document are always Klein coordinates.
    pub model: String,
    pub diagram: ClippedDiagram,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

impl DiagramDocument {
    pub fn new(diagram: ClippedDiagram, verification: Option<VerificationReport>) -> Self {
        Self {
            format: FORMAT_TAG.into(),
            model: "klein".into(),
            diagram,
            verification,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("diagram serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if doc.format != FORMAT_TAG {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                message: format!("unknown format tag {:?}", doc.format),
            });
        }
        Ok(doc)
    }
}

pub fn load_diagram(path: &Path) -> Result<DiagramDocument> {
    DiagramDocument::from_json(&read(path)?, &path.display().to_string())
}

struct Canvas {
    model: OutputModel,
    step: f64,
}

impl Canvas {
    fn map(&self, p: [f64; 2]) -> [f64; 2] {
        match self.model {
            OutputModel::Klein => p,
            OutputModel::Poincare => klein_to_poincare_closed(&p),
        }
    }

    fn radius(&self, r: f64) -> f64 {
        self.map([r, 0.0])[0]
    }

    /// Image of a Klein segment: its two endpoints in the Klein model, a
    /// sampled polyline otherwise.
    fn segment(&self, from: [f64; 2], to: [f64; 2]) -> Vec<[f64; 2]> {
        match self.model {
            OutputModel::Klein => vec![from, to],
            OutputModel::Poincare => {
                let len = ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt();
                let n = ((len / self.step).ceil() as usize).max(1);
                (0..=n)
                    .map(|i| {
                        let t = i as f64 / n as f64;
                        self.map([from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])])
                    })
                    .collect()
            }
        }
    }

    fn cell_path(&self, edges: &[Edge]) -> String {
        let mut d = String::new();
        for (i, e) in edges.iter().enumerate() {
            if i == 0 {
                let p = self.map(e.start_point());
                let _ = write!(d, "M {} {}", p[0], p[1]);
            }
            match *e {
                Edge::Segment { from, to, .. } => {
                    for p in self.segment(from, to).into_iter().skip(1) {
                        let _ = write!(d, " L {} {}", p[0], p[1]);
                    }
                }
                Edge::Arc { radius, start, end } => {
                    let r = self.radius(radius);
                    // full circles are split in two so both arc commands are well defined
                    let pieces = if end - start > std::f64::consts::PI * 1.5 { 2 } else { 1 };
                    for k in 1..=pieces {
                        let a = start + (end - start) * k as f64 / pieces as f64;
                        let large = ((end - start) / pieces as f64 > std::f64::consts::PI) as u8;
                        let _ = write!(d, " A {r} {r} 0 {large} 1 {} {}", r * a.cos(), r * a.sin());
                    }
                }
            }
        }
        d.push_str(" Z");
        d
    }
}

fn cell_fill(generator: &SubsetGenerator) -> String {
    let h = generator
        .indices()
        .iter()
        .fold(17u64, |acc, &i| acc.wrapping_mul(31).wrapping_add(i as u64 + 1));
    format!("hsl({}, 60%, 82%)", (h.wrapping_mul(2654435761) >> 8) % 360)
}

/// Renders the diagram in the requested model. Klein segments stay straight;
/// in the Poincaré disk each segment is sampled every `step` (Klein length)
/// and mapped radially.
pub fn render_svg(diagram: &ClippedDiagram, model: OutputModel, step: f64) -> String {
    let canvas = Canvas { model, step };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="-1.05 -1.05 2.1 2.1">"#
    );
    let model_name = match model {
        OutputModel::Klein => "klein",
        OutputModel::Poincare => "poincare",
    };
    let _ = writeln!(
        svg,
        "<!-- hyperbolic Voronoi diagram, order {}, {model_name} model; y axis flipped to mathematical orientation -->",
        diagram.order
    );
    svg.push_str("<g transform=\"scale(1,-1)\">\n");
    svg.push_str("<circle class=\"boundary\" cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.004\"/>\n");
    for cell in &diagram.cells {
        let _ = writeln!(
            svg,
            "<path class=\"cell\" data-generator=\"{}\" d=\"{}\" fill=\"{}\" stroke=\"none\"/>",
            cell.generator.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
            canvas.cell_path(&cell.edges),
            cell_fill(&cell.generator)
        );
    }
    if diagram.clip_radius < 1.0 {
        let _ = writeln!(
            svg,
            "<circle class=\"clip\" cx=\"0\" cy=\"0\" r=\"{}\" fill=\"none\" stroke=\"gray\" stroke-width=\"0.003\"/>",
            canvas.radius(diagram.clip_radius)
        );
    }
    for cell in &diagram.cells {
        for e in &cell.edges {
            let Edge::Segment { from, to, neighbor, .. } = e else {
                continue;
            };
            // shared edges are drawn once, from the smaller generator
            if !neighbor.as_ref().is_some_and(|n| cell.generator < *n) {
                continue;
            }
            match model {
                OutputModel::Klein => {
                    let _ = writeln!(
                        svg,
                        "<line class=\"edge\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"0.004\"/>",
                        from[0], from[1], to[0], to[1]
                    );
                }
                OutputModel::Poincare => {
                    let pts: Vec<String> = canvas
                        .segment(*from, *to)
                        .iter()
                        .map(|p| format!("{},{}", p[0], p[1]))
                        .collect();
                    let _ = writeln!(
                        svg,
                        "<polyline class=\"edge\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.004\"/>",
                        pts.join(" ")
                    );
                }
            }
        }
    }
    for site in &diagram.sites {
        let p = canvas.map(*site.coords());
        let _ = writeln!(svg, "<circle class=\"site\" cx=\"{}\" cy=\"{}\" r=\"0.012\" fill=\"black\"/>", p[0], p[1]);
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub cells: usize,
    pub verification: Option<VerificationReport>,
    /// The rendered output (also written to the configured destination).
    pub output: String,
}

impl RunSummary {
    /// 0 on success, 2 when verification ran and did not agree everywhere.
    pub fn exit_code(&self) -> u8 {
        match &self.verification {
            Some(r) if !r.is_perfect() => 2,
            _ => 0,
        }
    }
}

/// Loads sites, builds the diagram, optionally verifies it, and writes the
/// requested output. Returns the rendered output for inspection.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let sites = load_sites(&config.input, config.input_model)?;
    let diagram = build_hvd(&sites, config.order, config.clip_l)?;
    let verification = (config.verify_samples > 0)
        .then(|| verify_diagram(&diagram, config.verify_samples, config.seed, VERIFY_MARGIN));
    let cells = diagram.cells.len();
    let output = match config.format {
        OutputFormat::Svg => render_svg(&diagram, config.output_model, config.arc_step),
        OutputFormat::Structured => DiagramDocument::new(diagram, verification.clone()).to_json(),
    };
    match &config.out {
        Some(path) => std::fs::write(path, &output).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?,
        None => print!("{output}"),
    }
    Ok(RunSummary {
        cells,
        verification,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn k(x: f64, y: f64) -> KleinPoint {
        KleinPoint::new([x, y]).unwrap()
    }

    #[test]
    fn klein_json_sites() {
        let s = parse_sites("[[0.6, 0], [0, 0]]", "t", InputModel::Klein).unwrap();
        assert_eq!(s, vec![k(0.6, 0.0), k(0.0, 0.0)]);
        let s = parse_sites(r#"{"sites": [[0.1, 0.2]]}"#, "t", InputModel::Klein).unwrap();
        assert_eq!(s, vec![k(0.1, 0.2)]);
    }

    #[test]
    fn text_sites_with_comments() {
        let s = parse_sites("# sites\n0.6 0\n\n0,0  # origin\n", "t", InputModel::Klein).unwrap();
        assert_eq!(s, vec![k(0.6, 0.0), k(0.0, 0.0)]);
    }

    #[test]
    fn poincare_and_ambient_inputs_normalize_to_klein() {
        let s = parse_sites("[[0.333333333, 0]]", "t", InputModel::Poincare).unwrap();
        assert_abs_diff_eq!(s[0].coords()[0], 0.6, epsilon = 1e-8);
        let s = parse_sites("[[0.75, 0]]", "t", InputModel::Ambient).unwrap();
        assert_abs_diff_eq!(s[0].coords()[0], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_sites("0.1 0.2\n0.3 zz\n", "f.txt", InputModel::Klein) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_sites("[[0.1, 0.2],\n [0.3, ]]", "f.json", InputModel::Klein) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_domain_site_reports_index() {
        match parse_sites("[[0.1, 0.2], [1.0, 0.0]]", "t", InputModel::Klein) {
            Err(Error::Site { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_sites_rejected() {
        assert_eq!(
            parse_sites("[[0.1, 0.2], [0.3, 0.0], [0.1, 0.2]]", "t", InputModel::Klein),
            Err(Error::DuplicateSite { first: 0, second: 2 })
        );
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new("x");
        assert!(c.validate().is_ok());
        c.arc_step = 0.0;
        assert!(c.validate().is_err());
        c.arc_step = 0.1;
        c.clip_l = 0.0;
        assert!(c.validate().is_err());
        c.clip_l = 1.0;
        c.order = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn svg_single_site() {
        let d = build_hvd(&[k(0.2, 0.1)], 1, 1.0).unwrap();
        let svg = render_svg(&d, OutputModel::Klein, 0.01);
        assert_eq!(svg.matches("<line").count(), 0);
        assert_eq!(svg.matches("class=\"site\"").count(), 1);
        assert_eq!(svg.matches("class=\"boundary\"").count(), 1);
    }

    #[test]
    fn svg_symmetric_pair_has_one_chord() {
        let d = build_hvd(&[k(0.5, 0.0), k(-0.5, 0.0)], 1, 1.0).unwrap();
        let svg = render_svg(&d, OutputModel::Klein, 0.01);
        assert_eq!(svg.matches("<line").count(), 1);
        assert_eq!(svg.matches("class=\"cell\"").count(), 2);
    }

    #[test]
    fn poincare_rendering_keeps_the_diameter() {
        let d = build_hvd(&[k(0.5, 0.0), k(-0.5, 0.0)], 1, 1.0).unwrap();
        let svg = render_svg(&d, OutputModel::Poincare, 0.05);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let points = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        let mut count = 0;
        for pair in points.split(' ') {
            let (x, y) = pair.split_once(',').unwrap();
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!(x.abs() < 1e-15, "{x}");
            assert!(y.abs() <= 1.0 + 1e-12);
            count += 1;
        }
        assert!(count > 10);
    }
}
