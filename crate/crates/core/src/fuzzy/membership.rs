use serde::Serialize;

use super::FuzzyError;

/// Trapezoid over [0, 1]: 0 outside [a, d], 1 on [b, c], linear between.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzySet {
    pub label: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl FuzzySet {
    pub fn new(label: impl Into<String>, [a, b, c, d]: [f64; 4]) -> Result<Self, FuzzyError> {
        let label = label.into();
        let ordered = 0.0 <= a && a <= b && b <= c && c <= d && d <= 1.0;
        if !ordered {
            return Err(FuzzyError::Config(format!(
                "set `{label}` breakpoints must satisfy 0 <= a <= b <= c <= d <= 1"
            )));
        }
        Ok(Self { label, a, b, c, d })
    }

    pub fn membership(&self, u: f64) -> f64 {
        if u < self.a || u > self.d {
            0.0
        } else if u >= self.b && u <= self.c {
            1.0
        } else if u < self.b {
            (u - self.a) / (self.b - self.a)
        } else {
            (self.d - u) / (self.d - self.c)
        }
    }
}

/// Five ordered trapezoids forming a Ruspini partition of [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinguisticVariable {
    pub name: String,
    pub sets: [FuzzySet; 5],
}

/// Default breakpoints, shared by both inputs.
pub const DEFAULT_BREAKPOINTS: [[f64; 4]; 5] = [
    [0.0, 0.0, 0.1, 0.25],
    [0.1, 0.25, 0.35, 0.5],
    [0.35, 0.5, 0.6, 0.75],
    [0.6, 0.75, 0.85, 0.95],
    [0.85, 0.95, 1.0, 1.0],
];

pub const COUNT_LABELS: [&str; 5] = ["Very low", "Low", "Medium", "High", "Very high"];
pub const INTERVAL_LABELS: [&str; 5] = ["Very Small", "Small", "Medium", "High", "Very high"];

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, labels: [&str; 5], breakpoints: [[f64; 4]; 5]) -> Result<Self, FuzzyError> {
        let name = name.into();
        let mut sets = Vec::with_capacity(5);
        for (label, bp) in labels.iter().zip(breakpoints) {
            sets.push(FuzzySet::new(*label, bp)?);
        }
        let sets: [FuzzySet; 5] = sets.try_into().expect("five sets");
        let partition = sets[0].a == 0.0
            && sets[0].b == 0.0
            && sets[4].c == 1.0
            && sets[4].d == 1.0
            && sets.windows(2).all(|w| w[0].c == w[1].a && w[0].d == w[1].b);
        if !partition {
            return Err(FuzzyError::Config(format!(
                "variable `{name}`: adjacent ramps must be complementary (c_i = a_i+1, d_i = b_i+1) \
                 and the outer sets must be shoulders at 0 and 1"
            )));
        }
        Ok(Self { name, sets })
    }

    pub fn labels(&self) -> [&str; 5] {
        [0, 1, 2, 3, 4].map(|i| self.sets[i].label.as_str())
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.sets.iter().position(|s| s.label.eq_ignore_ascii_case(label))
    }
}

/// Membership vector of `u` (clamped to [0, 1]) across the variable's sets.
pub fn fuzzify(u: f64, var: &LinguisticVariable) -> [f64; 5] {
    let u = u.clamp(0.0, 1.0);
    [0, 1, 2, 3, 4].map(|i| var.sets[i].membership(u))
}
