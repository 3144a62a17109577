//! Machine-readable check reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::numlin::Tolerances;

/// Tag and the statement a record with that tag certifies.
pub const TAGS: &[(&str, &str)] = &[
    ("axioms.semigroupoid", "composition table, involution and units satisfy the *-semigroupoid axioms"),
    ("axioms.action", "anchor is onto and the partial action is defined exactly on d(α) = a(x) and is compatible with products"),
    ("bundle.orbit-trivial", "fiber dimension is constant along every orbit"),
    ("kernel.hermitian", "K(y, x) = K(x, y)* on every part"),
    ("kernel.psd", "every part Gram matrix is positive semidefinite"),
    ("kernel.invariant", "K(α·x, y) = K(x, α*·y) whenever both sides are defined"),
    ("kernel.bounded-shift", "Ψ(α) maps the kernel of G_d(α) into the kernel of G_c(α), giving a finite shift constant M_α"),
    ("hilbert.linearisation", "K(x, y) = V_x* V_y with minimal feature spaces of dimension rank G_s"),
    ("hilbert.rkhs", "kernel columns lie in the reproducing kernel space and reproduce point evaluations"),
    ("hilbert.uniqueness", "two minimal linearisations are related by a unitary intertwining the feature maps"),
    ("hilbert.representation", "invariant positive kernels induce a *-representation with Φ(α)V_x = V_{α·x}"),
    ("hilbert.bounded-shift", "‖Φ(α)‖² equals the shift constant M_α"),
    ("hilbert.partial-isometry", "for inverse semigroupoids every Φ(α) is a partial isometry"),
    ("krein.jordan-split", "K = K₊ − K₋ with K± positive and disjoint"),
    ("krein.gram-operator", "a dominating positive L turns K into a selfadjoint contraction on the L-quotient"),
    ("krein.linearisation", "K(x, y) = V_x* J V_y with minimal Krein feature spaces"),
    ("krein.rkks", "kernel columns lie in the reproducing kernel Krein space and reproduce point evaluations"),
    ("krein.route-equivalence", "the direct and dominant-based linearisations are related by a J-unitary"),
    ("krein.uniqueness", "the Gram operator has a spectral gap at zero on at least one side"),
    ("krein.lift", "BT = S*A lifts to Krein-adjoint operators between induced Krein spaces"),
    ("krein.representation", "invariant Hermitian kernels induce a representation with Ψ̃(α*) = Ψ̃(α)^♯ and Ψ̃(α)V_x = V_{α·x}"),
    ("krein.reducibility", "with an invariant dominant, the fundamental symmetries commute with the representation"),
];

pub fn tag_known(tag: &str) -> bool {
    TAGS.iter().any(|(t, _)| *t == tag)
}

/// One line per tag, tab separated.
pub fn list_checks() -> String {
    TAGS.iter().map(|(t, d)| format!("{t}\t{d}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub tag: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Record {
    /// Passes when `residual ≤ tolerance`.
    pub fn bound(
        name: impl Into<String>,
        tag: &'static str,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        debug_assert!(tag_known(tag), "unknown tag {tag}");
        let residual = if residual.is_finite() {
            residual
        } else {
            f64::MAX
        };
        Self {
            name: name.into(),
            tag,
            residual,
            tolerance,
            pass: residual <= tolerance,
            witness: None,
        }
    }

    pub fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }

    pub fn witness_if_failed(self, w: impl FnOnce() -> String) -> Self {
        if self.pass {
            self
        } else {
            self.with_witness(w())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub digest: String,
    pub tolerances: Tolerances,
    pub pass: bool,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        digest: impl Into<String>,
        tolerances: Tolerances,
    ) -> Self {
        Self {
            command: command.into(),
            digest: digest.into(),
            tolerances,
            pass: true,
            records: Vec::new(),
            info: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, r: Record) -> bool {
        let pass = r.pass;
        self.pass &= pass;
        self.records.push(r);
        pass
    }

    pub fn info(&mut self, key: impl Into<String>, value: impl Serialize) {
        self.info.insert(
            key.into(),
            serde_json::to_value(value).expect("info serialises"),
        );
    }

    pub fn note(&mut self, n: impl Into<String>) {
        let n = n.into();
        if !self.notes.contains(&n) {
            self.notes.push(n);
        }
    }

    pub fn extend(&mut self, other: Report) {
        for r in other.records {
            self.push(r);
        }
        self.info.extend(other.info);
        for n in other.notes {
            self.note(n);
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        crate::io::to_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_pass_tracks_records() {
        let mut r = Report::new("check", "abc", Tolerances::default());
        assert!(r.push(Record::bound("a", "kernel.psd", 0.0, 1e-9)));
        assert!(r.pass);
        assert!(!r.push(Record::bound("b", "kernel.psd", 1.0, 1e-9).with_witness("p0")));
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn serialisation_is_deterministic() {
        let mut r = Report::new("check", "abc", Tolerances::default());
        r.push(Record::bound("a", "kernel.psd", 1e-12, 1e-9));
        r.info("z", 1);
        r.info("a", [1, 2]);
        r.note("n");
        r.note("n");
        assert_eq!(r.to_json(), r.clone().to_json());
        assert_eq!(r.notes.len(), 1);
        assert!(r.to_json().find("\"a\"").unwrap() < r.to_json().find("\"z\"").unwrap());
    }

    #[test]
    fn tags_are_unique() {
        let mut seen = std::collections::BTreeSet::new();
        for (t, _) in TAGS {
            assert!(seen.insert(*t));
        }
        assert_eq!(list_checks().lines().count(), TAGS.len());
    }

    #[test]
    fn non_finite_residual_fails() {
        let r = Record::bound("x", "kernel.psd", f64::NAN, 1.0);
        assert!(!r.pass && r.residual.is_finite());
    }
}
