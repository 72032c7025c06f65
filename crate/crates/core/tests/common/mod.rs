#![allow(dead_code)]

use std::io::Write;

use ellipsf::multiindex::MultiIndex;
use ellipsf::presets::{self, quincunx};
use ellipsf::scalingfn::{ScalingFunctionSpec, DEFAULT_TRUNC};
use ellipsf::strangfix::SFResult;
use ellipsf::{MultiPoly, PolynomialSpace};

pub struct Fixture {
    pub name: &'static str,
    pub spec: ScalingFunctionSpec,
}

impl Fixture {
    pub fn analyze(&self) -> SFResult {
        self.spec
            .analyze(&self.spec.analysis_config(), DEFAULT_TRUNC)
            .unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }
}

pub fn quincunx_m1() -> Fixture {
    Fixture {
        name: "quincunx",
        spec: ScalingFunctionSpec::stationary(&quincunx(), 1).unwrap(),
    }
}

pub fn second_m1() -> Fixture {
    Fixture {
        name: "second",
        spec: ScalingFunctionSpec::stationary(&presets::second(), 1).unwrap(),
    }
}

pub fn diagonal_m1() -> Fixture {
    Fixture {
        name: "diagonal",
        spec: ScalingFunctionSpec::stationary(&presets::diagonal(), 1).unwrap(),
    }
}

pub fn quincunx_r6() -> Fixture {
    let c = presets::quincunx_r6_correction();
    Fixture {
        name: "quincunx r=6",
        spec: ScalingFunctionSpec::higher(&quincunx(), 6, Some(&c), 1).unwrap(),
    }
}

pub fn quincunx_r8() -> Fixture {
    let c = presets::quincunx_r8_correction();
    Fixture {
        name: "quincunx r=8",
        spec: ScalingFunctionSpec::higher(&quincunx(), 8, Some(&c), 1).unwrap(),
    }
}

pub fn quincunx_m2() -> Fixture {
    Fixture {
        name: "quincunx m=2",
        spec: ScalingFunctionSpec::stationary(&quincunx(), 2).unwrap(),
    }
}

pub fn quincunx_nonstat() -> Fixture {
    let kind = presets::quincunx_nonstationary().unwrap();
    Fixture {
        name: "quincunx X=2iξ₁",
        spec: ScalingFunctionSpec::nonstationary(&quincunx(), &kind, DEFAULT_TRUNC).unwrap(),
    }
}

pub fn diagonal_nonstat() -> Fixture {
    let kind = presets::diagonal_nonstationary().unwrap();
    Fixture {
        name: "diagonal X=i(ξ₁³+ξ₂³)",
        spec: ScalingFunctionSpec::nonstationary(&presets::diagonal(), &kind, DEFAULT_TRUNC).unwrap(),
    }
}

pub fn sum_of_powers() -> Fixture {
    Fixture {
        name: "quincunx W+W²",
        spec: ScalingFunctionSpec::nonstationary(&quincunx(), &presets::sum_of_powers_1_2(), DEFAULT_TRUNC)
            .unwrap(),
    }
}

pub fn all_fixtures() -> Vec<Fixture> {
    vec![
        quincunx_m1(),
        second_m1(),
        diagonal_m1(),
        quincunx_r6(),
        quincunx_r8(),
        quincunx_m2(),
        quincunx_nonstat(),
        diagonal_nonstat(),
        sum_of_powers(),
    ]
}

pub fn poly(s: &str) -> MultiPoly {
    MultiPoly::parse(2, s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn space(polys: &[&str]) -> PolynomialSpace {
    PolynomialSpace::new(2, polys.iter().map(|s| poly(s)).collect())
}

/// `∂^(a,b) p`, computed term by term with falling factorials.
pub fn partial(p: &MultiPoly, a: u32, b: u32) -> MultiPoly {
    p.diff(&MultiIndex::new(vec![a, b]))
}

pub fn laplacian(p: &MultiPoly) -> MultiPoly {
    partial(p, 2, 0).add(&partial(p, 0, 2))
}

pub fn texts(s: &PolynomialSpace) -> Vec<String> {
    s.basis.iter().map(ToString::to_string).collect()
}

/// Collects named checks for one acceptance criterion and prints a single
/// PASS/FAIL line on stderr, outside the test harness capture.
pub struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<(String, bool, String)>,
}

impl Criterion {
    pub fn new(id: u32, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            checks: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl std::fmt::Display) {
        self.checks.push((name.into(), ok, detail.to_string()));
    }

    pub fn finish(self) {
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.1)
            .map(|c| c.0.as_str())
            .collect();
        let mut out = String::new();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{verdict} criterion {:>2}: {}\n", self.id, self.title));
        for (name, ok, detail) in &self.checks {
            let mark = if *ok { "ok " } else { "BAD" };
            out.push_str(&format!("    [{mark}] {name}: {detail}\n"));
        }
        let _ = std::io::stderr().write_all(out.as_bytes());
        assert!(failed.is_empty(), "criterion {} failed checks: {failed:?}", self.id);
    }
}
