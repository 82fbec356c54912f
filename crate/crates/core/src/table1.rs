//! The three-label worked example: 20 A's, 30 B's and 50 C's scored with
//! one minus the empirical frequency.
//!
//! Every exact quantity is recomputed from the raw data and compared with a
//! fixed fixture.

use serde::Serialize;

use crate::credal::{extreme_points, in_credal_set, lower_entropy, sample_credal, ternary_coords, ProbabilityVector};
use crate::error::{Error, Result};
use crate::outcome::{Event, FiniteOutcomeSpace};
use crate::possibility::{mass_from_belief, UpperLowerPair};
use crate::transducer::{transduce_finite, Contour, OneMinusEmpirical};
use crate::value::{Rational, Value};

pub const LABELS: [&str; 3] = ["A", "B", "C"];
pub const COUNTS: [usize; 3] = [20, 30, 50];

/// Table rows in publication order, as `(labels, lower, upper)`.
const ROWS: [(&[&str], (u64, u64), (u64, u64)); 6] = [
    (&["A"], (0, 1), (21, 101)),
    (&["B"], (0, 1), (51, 101)),
    (&["C"], (50, 101), (1, 1)),
    (&["A", "B"], (0, 1), (51, 101)),
    (&["B", "C"], (80, 101), (1, 1)),
    (&["A", "C"], (50, 101), (1, 1)),
];
const CONTOUR: [(u64, u64); 3] = [(21, 101), (51, 101), (1, 1)];
const MASS: [(&[&str], (u64, u64)); 3] = [(&["C"], (50, 101)), (&["B", "C"], (30, 101)), (&["A", "B", "C"], (21, 101))];

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub event: Vec<String>,
    pub lower: Rational,
    pub upper: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TernaryPoint {
    pub x: f64,
    pub y: f64,
    /// `member`, `vertex` or `p-emp`.
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct Table1Report {
    pub space: FiniteOutcomeSpace,
    pub data: Vec<usize>,
    pub contour: Contour<Rational>,
    pub rows: Vec<Table1Row>,
    pub mass: Vec<(Event, Rational)>,
    pub focal_chain: bool,
    pub ternary: Vec<TernaryPoint>,
    pub p_emp_member: bool,
    pub lower_entropy: f64,
    /// Human-readable description of every value that differs from the fixture.
    pub mismatches: Vec<String>,
}

impl Table1Report {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn verify(&self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::FixtureMismatch(self.mismatches.join("; ")))
        }
    }
}

pub fn data() -> Vec<usize> {
    COUNTS.iter().enumerate().flat_map(|(label, &count)| std::iter::repeat_n(label, count)).collect()
}

fn ratio((n, d): (u64, u64)) -> Rational {
    Rational::from_ratio(n, d)
}

/// Runs the example end to end. `samples` credal members drawn with `seed`
/// go into the ternary export alongside the vertices and the empirical pmf.
pub fn table1(samples: usize, seed: u64) -> Result<Table1Report> {
    let space = FiniteOutcomeSpace::new(LABELS)?;
    let data = data();
    let contour = transduce_finite(&data, &space, &OneMinusEmpirical)?.contour;
    let mut mismatches = Vec::new();

    let expected: Vec<Rational> = CONTOUR.iter().copied().map(ratio).collect();
    if contour.values() != expected.as_slice() {
        let got: Vec<String> = contour.values().iter().map(Value::render).collect();
        mismatches.push(format!("contour is ({}), expected (21/101, 51/101, 1)", got.join(", ")));
    }

    let pair = UpperLowerPair::new(&contour)?;
    let mut rows = Vec::with_capacity(ROWS.len());
    for (labels, lower, upper) in ROWS {
        let event = space.event_from_labels(labels)?;
        let row =
            Table1Row { event: space.event_labels(&event), lower: pair.lower(&event)?, upper: pair.upper(&event)? };
        if row.lower != ratio(lower) || row.upper != ratio(upper) {
            mismatches.push(format!(
                "row {{{}}} is ({}, {}), expected ({}, {})",
                labels.join(","),
                row.lower.render(),
                row.upper.render(),
                ratio(lower).render(),
                ratio(upper).render()
            ));
        }
        rows.push(row);
    }

    let m = mass_from_belief(|e| pair.lower(e).expect("event from this space"), space.size())?;
    let mass = m.entries();
    let expected_mass: Vec<(Event, Rational)> =
        MASS.iter().map(|(labels, v)| Ok((space.event_from_labels(labels)?, ratio(*v)))).collect::<Result<_>>()?;
    if mass != expected_mass {
        mismatches.push("mass function differs from {C}: 50/101, {B,C}: 30/101, {A,B,C}: 21/101".into());
    }
    let focal_chain = crate::possibility::focal_elements(&m).nested;
    if !focal_chain {
        mismatches.push("focal elements are not nested".into());
    }

    let entropy = lower_entropy(&contour)?;
    if entropy.nats != 0.0 {
        mismatches.push(format!("lower entropy is {}, expected 0", entropy.nats));
    }

    let p_emp =
        ProbabilityVector::new(COUNTS.iter().map(|&c| Rational::from_ratio(c as u64, data.len() as u64)).collect())?;
    let p_emp_member = in_credal_set(&p_emp, &contour)?;

    let mut ternary = Vec::new();
    for v in extreme_points(&contour)? {
        let (x, y) = ternary_coords(&v)?;
        ternary.push(TernaryPoint { x, y, label: "vertex".into() });
    }
    for p in sample_credal(&contour, samples, seed)? {
        let (x, y) = ternary_coords(&p)?;
        ternary.push(TernaryPoint { x, y, label: "member".into() });
    }
    let (x, y) = ternary_coords(&p_emp)?;
    ternary.push(TernaryPoint { x, y, label: "p-emp".into() });

    Ok(Table1Report {
        space,
        data,
        contour,
        rows,
        mass,
        focal_chain,
        ternary,
        p_emp_member,
        lower_entropy: entropy.nats,
        mismatches,
    })
}
