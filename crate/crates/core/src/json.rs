//! JSON exchange formats for shapes and functional coefficients.
//!
//! Shapes:
//!
//! ```text
//! {"type":"segment","alpha":r}
//! {"type":"polygon","normals":[..],"lengths":[..]}          (optional "offset":[x,y])
//! {"type":"fourier","c0":r,"terms":[[k,a_k,b_k],..]}
//! {"type":"grid","n":int,"samples":[..]}
//! ```
//!
//! Coefficients: `{"a":spec,"b":spec,"c":spec,"d":spec}` with `spec` one of
//! `{"const":r}`, `{"grid":[..]}`,
//! `{"bumps":[{"center":r,"width":r,"inside":r,"outside":r},..]}` or
//! `{"fourier":{"c0":r,"terms":[[k,a,b],..]}}`.
//!
//! Floats are written with 17 significant digits so that every value
//! round-trips exactly.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

use crate::error::GeomError;
use crate::functional::{Bump, CoeffFn, QuadCoeffs};
use crate::grid::{wrap_angle, AngleGrid};
use crate::support::{FourierSeries, GridSamples, Polygon, SupportFn};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON at line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("invalid shape: {0}")]
    Shape(GeomError),
    #[error("{0}")]
    Coeffs(GeomError),
}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        JsonError::Syntax {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeDto {
    Segment {
        alpha: f64,
    },
    Polygon {
        normals: Vec<f64>,
        lengths: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<[f64; 2]>,
    },
    Fourier {
        c0: f64,
        #[serde(default)]
        terms: Vec<(u32, f64, f64)>,
    },
    Grid {
        n: usize,
        samples: Vec<f64>,
    },
}

impl From<&SupportFn> for ShapeDto {
    fn from(h: &SupportFn) -> Self {
        match h {
            SupportFn::Segment { alpha } => ShapeDto::Segment { alpha: *alpha },
            SupportFn::Polygon(p) => {
                let o = p.offset();
                ShapeDto::Polygon {
                    normals: p.normals(),
                    lengths: p.lengths(),
                    offset: (o != [0.0, 0.0]).then_some(o),
                }
            }
            SupportFn::Triangle(t) => {
                let mut pairs: Vec<(f64, f64)> = t
                    .angles()
                    .iter()
                    .zip(t.lengths())
                    .map(|(a, l)| (wrap_angle(*a), l))
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                ShapeDto::Polygon {
                    normals: pairs.iter().map(|p| p.0).collect(),
                    lengths: pairs.iter().map(|p| p.1).collect(),
                    offset: None,
                }
            }
            SupportFn::Fourier(f) => ShapeDto::Fourier {
                c0: f.c0,
                terms: f.terms.iter().map(|t| (t.k, t.a, t.b)).collect(),
            },
            SupportFn::Grid(g) => ShapeDto::Grid {
                n: g.grid().len(),
                samples: g.samples().to_vec(),
            },
        }
    }
}

impl TryFrom<ShapeDto> for SupportFn {
    type Error = GeomError;

    fn try_from(dto: ShapeDto) -> Result<Self, GeomError> {
        Ok(match dto {
            ShapeDto::Segment { alpha } => SupportFn::segment(alpha),
            ShapeDto::Polygon {
                normals,
                lengths,
                offset,
            } => {
                let p = Polygon::new(&normals, &lengths)?;
                match offset {
                    Some(o) if o != [0.0, 0.0] => SupportFn::Polygon(p.with_offset(o)),
                    _ => SupportFn::from_polygon(p),
                }
            }
            ShapeDto::Fourier { c0, terms } => SupportFn::Fourier(FourierSeries::new(c0, terms)),
            ShapeDto::Grid { n, samples } => {
                SupportFn::Grid(GridSamples::new(AngleGrid::new(n)?, samples)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpDto {
    pub center: f64,
    pub width: f64,
    pub inside: f64,
    pub outside: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierDto {
    pub c0: f64,
    #[serde(default)]
    pub terms: Vec<(u32, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CoeffDto {
    Const(f64),
    Grid(Vec<f64>),
    Bumps(Vec<BumpDto>),
    Fourier(FourierDto),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsDto {
    pub a: CoeffDto,
    pub b: CoeffDto,
    pub c: CoeffDto,
    pub d: CoeffDto,
}

impl From<&CoeffFn> for CoeffDto {
    fn from(f: &CoeffFn) -> Self {
        match f {
            CoeffFn::Const(v) => CoeffDto::Const(*v),
            CoeffFn::Grid(s) => CoeffDto::Grid(s.clone()),
            CoeffFn::Bumps(b) => CoeffDto::Bumps(
                b.iter()
                    .map(|b| BumpDto {
                        center: b.center,
                        width: b.width,
                        inside: b.inside,
                        outside: b.outside,
                    })
                    .collect(),
            ),
            CoeffFn::Fourier(f) => CoeffDto::Fourier(FourierDto {
                c0: f.c0,
                terms: f.terms.iter().map(|t| (t.k, t.a, t.b)).collect(),
            }),
        }
    }
}

impl From<CoeffDto> for CoeffFn {
    fn from(d: CoeffDto) -> Self {
        match d {
            CoeffDto::Const(v) => CoeffFn::Const(v),
            CoeffDto::Grid(s) => CoeffFn::Grid(s),
            CoeffDto::Bumps(b) => CoeffFn::Bumps(
                b.into_iter()
                    .map(|b| Bump {
                        center: b.center,
                        width: b.width,
                        inside: b.inside,
                        outside: b.outside,
                    })
                    .collect(),
            ),
            CoeffDto::Fourier(f) => CoeffFn::Fourier(FourierSeries::new(f.c0, f.terms)),
        }
    }
}

impl From<&QuadCoeffs> for CoeffsDto {
    fn from(q: &QuadCoeffs) -> Self {
        Self {
            a: (&q.a).into(),
            b: (&q.b).into(),
            c: (&q.c).into(),
            d: (&q.d).into(),
        }
    }
}

pub fn parse_shape(text: &str) -> Result<SupportFn, JsonError> {
    let dto: ShapeDto = serde_json::from_str(text)?;
    SupportFn::try_from(dto).map_err(JsonError::Shape)
}

/// Parse and validate coefficients.
pub fn parse_coeffs(text: &str) -> Result<QuadCoeffs, JsonError> {
    let dto: CoeffsDto = serde_json::from_str(text)?;
    QuadCoeffs::new(dto.a.into(), dto.b.into(), dto.c.into(), dto.d.into()).map_err(JsonError::Coeffs)
}

pub fn shape_to_json(h: &SupportFn) -> String {
    to_json(&ShapeDto::from(h))
}

pub fn coeffs_to_json(q: &QuadCoeffs) -> String {
    to_json(&CoeffsDto::from(q))
}

/// Pretty JSON with floats at 17 significant digits.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17::default());
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// Pretty-printing formatter that writes every `f64` as `d.dddddddddddddddde±x`.
#[derive(Default)]
pub struct Sig17 {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weingarten::TriangleSpec;

    #[test]
    fn parses_each_shape_type() {
        let s = parse_shape(r#"{"type":"segment","alpha":0.5}"#).unwrap();
        assert_eq!(s, SupportFn::segment(0.5));
        let f = parse_shape(r#"{"type":"fourier","c0":1,"terms":[[2,-0.1,0],[3,0.05,0]]}"#).unwrap();
        assert!((f.eval(0.0) - 0.95).abs() < 1e-15);
        let g = parse_shape(r#"{"type":"grid","n":8,"samples":[1,1,1,1,1,1,1,1]}"#).unwrap();
        assert_eq!(g.grid_len(), 8);
        let p = parse_shape(
            r#"{"type":"polygon","normals":[0,1.5707963267948966,3.141592653589793,4.71238898038469],"lengths":[1,1,1,1]}"#,
        )
        .unwrap();
        assert!((p.perimeter() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_shape("{\"type\":\"segment\",\n\"alpha\": }") {
            Err(JsonError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_shape(r#"{"type":"segment","beta":1}"#),
            Err(JsonError::Syntax { .. })
        ));
        assert!(matches!(
            parse_shape(r#"{"type":"grid","n":8,"samples":[1,1]}"#),
            Err(JsonError::Shape(_))
        ));
    }

    #[test]
    fn floats_keep_17_digits() {
        let s = to_json(&[std::f64::consts::PI]);
        assert!(s.contains("3.1415926535897931e0"), "{s}");
    }

    #[test]
    fn shapes_round_trip() {
        let shapes = [
            SupportFn::segment(1.25),
            SupportFn::fourier(1.0, [(2, 0.1, -0.03)]),
            SupportFn::Grid(GridSamples::from_fn(AngleGrid::new(16).unwrap(), |t| 1.0 + 0.1 * (2.0 * t).cos())),
        ];
        for h in shapes {
            assert_eq!(parse_shape(&shape_to_json(&h)).unwrap(), h);
        }
        let t = TriangleSpec::new(5.0, 6.5, 9.0).unwrap();
        let back = parse_shape(&shape_to_json(&SupportFn::Triangle(t))).unwrap();
        for i in 0..50 {
            let x = i as f64 * 0.13;
            assert!((back.eval(x) - t.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficients_round_trip() {
        let q = QuadCoeffs::three_bumps(0.05);
        let back = parse_coeffs(&coeffs_to_json(&q)).unwrap();
        assert_eq!(back, q);
        let bad = r#"{"a":{"const":1},"b":{"const":-1},"c":{"const":0},"d":{"const":0}}"#;
        assert!(matches!(parse_coeffs(bad), Err(JsonError::Coeffs(_))));
    }
}
