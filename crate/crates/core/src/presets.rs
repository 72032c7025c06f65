//! The dilation matrices and constructions used throughout the examples.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::isotropic::DilationMatrix;
use crate::masks::{NonstationaryKind, TrigPoly};
use crate::polyops::MultiPoly;
use crate::ratcore::{int, rat, real};

pub const QUINCUNX: &str = "1,1;1,-1";
pub const SECOND: &str = "1,-2;1,0";
pub const DIAGONAL: &str = "2,0;0,2";

pub fn quincunx() -> DilationMatrix {
    DilationMatrix::parse(QUINCUNX).expect("valid fixture")
}

pub fn second() -> DilationMatrix {
    DilationMatrix::parse(SECOND).expect("valid fixture")
}

pub fn diagonal() -> DilationMatrix {
    DilationMatrix::parse(DIAGONAL).expect("valid fixture")
}

pub fn all_matrices() -> Vec<(&'static str, DilationMatrix)> {
    vec![("quincunx", quincunx()), ("second", second()), ("diagonal", diagonal())]
}

fn sin_half_pow_sum(e: u32, c: crate::ratcore::Rational) -> TrigPoly {
    let s1 = TrigPoly::sin_half(2, 0).pow(e);
    let s2 = TrigPoly::sin_half(2, 1).pow(e);
    s1.add(&s2).scale(&real(c))
}

/// `4/3 (sin⁴(ξ₁/2) + sin⁴(ξ₂/2))`, giving `G = W + R₆` for `W = ξ₁² + ξ₂²`.
pub fn quincunx_r6_correction() -> TrigPoly {
    sin_half_pow_sum(4, rat(4, 3))
}

/// `4/3 sin⁴(ξ/2) + 32/45 sin⁶(ξ/2)` per axis, giving `G = W + R₈`.
pub fn quincunx_r8_correction() -> TrigPoly {
    sin_half_pow_sum(4, rat(4, 3)).add(&sin_half_pow_sum(6, rat(32, 45)))
}

/// `X = 2iξ₁`, `m = 1`.
pub fn quincunx_nonstationary() -> Result<NonstationaryKind> {
    Ok(NonstationaryKind::XPlusWm {
        x: MultiPoly::parse(2, "2i*x")?,
        m: 1,
    })
}

/// `X = i(ξ₁³ + ξ₂³)`, `m = 1`.
pub fn diagonal_nonstationary() -> Result<NonstationaryKind> {
    Ok(NonstationaryKind::XPlusWm {
        x: MultiPoly::parse(2, "1i*x^3 + 1i*y^3")?,
        m: 1,
    })
}

/// `W + W²`.
pub fn sum_of_powers_1_2() -> NonstationaryKind {
    NonstationaryKind::SumOfPowers {
        coeffs: BTreeMap::from([(1, int(1)), (2, int(1))]),
    }
}
