//! JSON encodings. Exact values are strings `"p/q"` so that no fixture goes
//! through a float; floats print with 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

use crate::isotropic::{CosetReps, IsotropicDecomposition};
use crate::masks::TrigPoly;
use crate::polyops::{MultiPoly, PolynomialSpace};
use crate::ratcore::{format_rational, GaussianRational, RatMatrix, Rational};

pub fn rational(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn gaussian(z: &GaussianRational) -> Value {
    json!({ "re": format_rational(&z.re), "im": format_rational(&z.im) })
}

/// Real matrices as nested `"p/q"` strings, complex ones as `{re, im}`.
pub fn matrix(m: &RatMatrix) -> Value {
    let real = m.is_real();
    Value::Array(
        m.rows()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|z| if real { rational(&z.re) } else { gaussian(z) })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// `[{"exp": [...], "coef": {"re", "im"}}]` in graded order.
pub fn polynomial(p: &MultiPoly) -> Value {
    Value::Array(
        p.terms()
            .map(|(alpha, c)| json!({ "exp": alpha, "coef": gaussian(c) }))
            .collect(),
    )
}

pub fn space(s: &PolynomialSpace) -> Value {
    Value::Array(s.basis.iter().map(polynomial).collect())
}

/// Coefficients on the doubled lattice, in lexicographic order of `k`.
pub fn mask(t: &TrigPoly) -> Value {
    let coeffs: Vec<Value> = t
        .coeffs()
        .iter()
        .map(|(k, c)| json!({ "k": k, "re": format_rational(&c.re), "im": format_rational(&c.im) }))
        .collect();
    json!({
        "coefficients": coeffs,
        "periodic": t.is_periodic(),
        "form": t.render(),
    })
}

pub fn cosets(c: &CosetReps) -> Value {
    json!(c.to_strings())
}

pub fn decomposition(dec: &IsotropicDecomposition) -> Value {
    let u: Vec<Vec<f64>> = dec.u.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut m = Map::new();
    m.insert("q".into(), json!(dec.q));
    m.insert("Q2".into(), matrix(&dec.q2));
    m.insert("U".into(), json!(u));
    m.insert("eigen_modulus".into(), json!(dec.eigen_modulus));
    m.insert("solution_dim".into(), json!(dec.solution_dim));
    Value::Object(m)
}

/// Pretty printer that writes every float as `d.dddddddddddddddde±x`.
struct Fixed17(PrettyFormatter<'static>);

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Deterministic pretty JSON: keys sorted, floats at full precision.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    // go through Value so that map keys come out sorted
    let value = serde_json::to_value(value).expect("serializable");
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("writing to a Vec");
    String::from_utf8(buf).expect("JSON is UTF-8")
}
