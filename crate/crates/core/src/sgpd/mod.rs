//! Finite *-semigroupoids given by explicit tables, their axioms, and left
//! actions on finite sets.

pub mod action;
pub mod families;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub use action::{ActionTables, LeftAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub usize);

/// Label-level description of a *-semigroupoid, as read from or written to
/// a document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SemigroupoidTables {
    pub symbols: Vec<String>,
    /// `(id, d, c)`.
    pub elements: Vec<(String, String, String)>,
    /// `(a, b, ab)`.
    pub compose: Vec<(String, String, String)>,
    /// `(a, a*)`.
    pub star: Vec<(String, String)>,
    /// `(s, ε_s)`.
    pub units: Option<Vec<(String, String)>>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Violation {
    pub axiom: String,
    pub witness: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, axiom: &str) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }

    fn push(&mut self, axiom: &str, witness: Vec<String>, detail: impl Into<String>) {
        self.violations.push(Violation {
            axiom: axiom.to_string(),
            witness,
            detail: detail.into(),
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub has_unit: bool,
    pub is_transitive: bool,
    pub is_inverse: bool,
    pub is_groupoid: bool,
    /// The unique pseudo-inverse of each element, when it exists.
    pub inverse_map: Option<Vec<Elem>>,
    /// Units found by search or declared, indexed by symbol.
    pub units: Option<Vec<Elem>>,
    /// Whether the declared involution agrees with `inverse_map`.
    pub star_is_inverse: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarSemigroupoid {
    symbols: Vec<String>,
    symbol_lookup: HashMap<String, Symbol>,
    elements: Vec<String>,
    element_lookup: HashMap<String, Elem>,
    d: Vec<Symbol>,
    c: Vec<Symbol>,
    compose: Vec<Option<Elem>>,
    star: Vec<Elem>,
    units: Option<Vec<Elem>>,
}

fn index_labels<T: Copy>(
    labels: &[String],
    wrap: impl Fn(usize) -> T,
) -> Result<HashMap<String, T>> {
    let mut map = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if map.insert(l.clone(), wrap(i)).is_some() {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(map)
}

impl StarSemigroupoid {
    pub fn from_tables(t: &SemigroupoidTables) -> Result<Self> {
        let symbol_lookup = index_labels(&t.symbols, Symbol)?;
        let elements: Vec<String> = t.elements.iter().map(|(e, _, _)| e.clone()).collect();
        let element_lookup = index_labels(&elements, Elem)?;
        let sym = |s: &str| {
            symbol_lookup
                .get(s)
                .copied()
                .ok_or_else(|| Error::MalformedTable(format!("unknown symbol `{s}`")))
        };
        let el = |e: &str| {
            element_lookup
                .get(e)
                .copied()
                .ok_or_else(|| Error::MalformedTable(format!("unknown element `{e}`")))
        };
        let mut d = Vec::with_capacity(elements.len());
        let mut c = Vec::with_capacity(elements.len());
        for (_, ds, cs) in &t.elements {
            d.push(sym(ds)?);
            c.push(sym(cs)?);
        }
        let n = elements.len();
        let mut compose = vec![None; n * n];
        for (a, b, ab) in &t.compose {
            let (a, b, ab) = (el(a)?, el(b)?, el(ab)?);
            let slot = &mut compose[a.0 * n + b.0];
            match slot {
                Some(prev) if *prev != ab => {
                    return Err(Error::MalformedTable(format!(
                        "conflicting products for ({}, {})",
                        elements[a.0], elements[b.0]
                    )))
                }
                _ => *slot = Some(ab),
            }
        }
        let mut star = vec![None; n];
        for (a, s) in &t.star {
            let (a, s) = (el(a)?, el(s)?);
            if star[a.0].replace(s).is_some_and(|prev| prev != s) {
                return Err(Error::MalformedTable(format!(
                    "conflicting involution entries for `{}`",
                    elements[a.0]
                )));
            }
        }
        let star = star
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| {
                    Error::MalformedTable(format!("involution undefined at `{}`", elements[i]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let units = match &t.units {
            None => None,
            Some(list) => {
                let mut u = vec![None; t.symbols.len()];
                for (s, e) in list {
                    u[sym(s)?.0] = Some(el(e)?);
                }
                Some(
                    u.into_iter()
                        .enumerate()
                        .map(|(i, e)| {
                            e.ok_or_else(|| {
                                Error::MalformedTable(format!(
                                    "no unit given for symbol `{}`",
                                    t.symbols[i]
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };
        Ok(Self {
            symbols: t.symbols.clone(),
            symbol_lookup,
            elements,
            element_lookup,
            d,
            c,
            compose,
            star,
            units,
        })
    }

    pub fn to_tables(&self) -> SemigroupoidTables {
        let mut compose = Vec::new();
        for a in self.elems() {
            for b in self.elems() {
                if let Some(ab) = self.compose(a, b) {
                    compose.push((
                        self.label(a).into(),
                        self.label(b).into(),
                        self.label(ab).into(),
                    ));
                }
            }
        }
        SemigroupoidTables {
            symbols: self.symbols.clone(),
            elements: self
                .elems()
                .map(|e| {
                    (
                        self.label(e).into(),
                        self.symbol_label(self.d(e)).into(),
                        self.symbol_label(self.c(e)).into(),
                    )
                })
                .collect(),
            compose,
            star: self
                .elems()
                .map(|e| (self.label(e).into(), self.label(self.star(e)).into()))
                .collect(),
            units: self.units.as_ref().map(|u| {
                u.iter()
                    .enumerate()
                    .map(|(s, e)| (self.symbols[s].clone(), self.label(*e).into()))
                    .collect()
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> {
        (0..self.elements.len()).map(Elem)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.symbols.len()).map(Symbol)
    }

    pub fn label(&self, e: Elem) -> &str {
        &self.elements[e.0]
    }

    pub fn symbol_label(&self, s: Symbol) -> &str {
        &self.symbols[s.0]
    }

    pub fn elem(&self, label: &str) -> Option<Elem> {
        self.element_lookup.get(label).copied()
    }

    pub fn symbol(&self, label: &str) -> Option<Symbol> {
        self.symbol_lookup.get(label).copied()
    }

    pub fn d(&self, e: Elem) -> Symbol {
        self.d[e.0]
    }

    pub fn c(&self, e: Elem) -> Symbol {
        self.c[e.0]
    }

    pub fn star(&self, e: Elem) -> Elem {
        self.star[e.0]
    }

    pub fn declared_units(&self) -> Option<&[Elem]> {
        self.units.as_deref()
    }

    /// Table lookup; `None` when no product is recorded.
    pub fn compose(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.compose[a.0 * self.len() + b.0]
    }

    /// Product of a composable pair. Pairs outside `Γ⁽²⁾` are an error.
    pub fn mul(&self, a: Elem, b: Elem) -> Result<Elem> {
        if self.d(a) != self.c(b) {
            return Err(Error::InvalidSemigroupoid(format!(
                "({}, {}) is not composable",
                self.label(a),
                self.label(b)
            )));
        }
        self.compose(a, b).ok_or_else(|| {
            Error::InvalidSemigroupoid(format!(
                "product ({}, {}) missing",
                self.label(a),
                self.label(b)
            ))
        })
    }

    /// Composable pairs `(α, β)` with `d(α) = c(β)`.
    pub fn composable_pairs(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        self.elems()
            .flat_map(move |a| self.elems().map(move |b| (a, b)))
            .filter(move |&(a, b)| self.d(a) == self.c(b))
    }

    fn names(&self, es: &[Elem]) -> Vec<String> {
        es.iter().map(|&e| self.label(e).to_string()).collect()
    }

    /// Exhaustive check of the semigroupoid, involution and unit axioms.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        if self.symbols.is_empty() || self.elements.is_empty() {
            rep.push(
                "nonempty",
                vec![],
                "symbol and element sets must be nonempty",
            );
        }
        for s in self.symbols() {
            if !self.elems().any(|e| self.d(e) == s || self.c(e) == s) {
                rep.push(
                    "isolated-symbol",
                    vec![self.symbol_label(s).to_string()],
                    "symbol is neither a domain nor a codomain; remove it explicitly",
                );
            }
        }
        for a in self.elems() {
            for b in self.elems() {
                let composable = self.d(a) == self.c(b);
                match (composable, self.compose(a, b)) {
                    (true, None) => rep.push(
                        "composition",
                        self.names(&[a, b]),
                        "composable pair without a product",
                    ),
                    (false, Some(_)) => rep.push(
                        "composition",
                        self.names(&[a, b]),
                        "product recorded for a non-composable pair",
                    ),
                    (true, Some(ab)) => {
                        if self.d(ab) != self.d(b) || self.c(ab) != self.c(a) {
                            rep.push(
                                "composition",
                                self.names(&[a, b, ab]),
                                "product has wrong domain or codomain",
                            );
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        if !rep.has("composition") {
            for (a, b) in self.composable_pairs() {
                let ab = self.compose(a, b).expect("checked above");
                for g in self.elems().filter(|&g| self.d(b) == self.c(g)) {
                    let bg = self.compose(b, g).expect("checked above");
                    if self.compose(a, bg) != self.compose(ab, g) {
                        rep.push("associativity", self.names(&[a, b, g]), "α(βγ) ≠ (αβ)γ");
                    }
                }
            }
        }
        for a in self.elems() {
            let s = self.star(a);
            if self.d(s) != self.c(a) || self.c(s) != self.d(a) {
                rep.push(
                    "star-domain",
                    self.names(&[a, s]),
                    "d(α*) ≠ c(α) or c(α*) ≠ d(α)",
                );
            }
            if self.star(s) != a {
                rep.push("star-involutive", self.names(&[a, s]), "α** ≠ α");
            }
        }
        if !rep.has("composition") && !rep.has("star-domain") {
            for (a, b) in self.composable_pairs() {
                let ab = self.compose(a, b).expect("checked above");
                let rhs = self.compose(self.star(b), self.star(a));
                if rhs != Some(self.star(ab)) {
                    rep.push(
                        "star-antimultiplicative",
                        self.names(&[a, b]),
                        "(αβ)* ≠ β*α*",
                    );
                }
            }
        }
        if let Some(units) = &self.units {
            let mut seen = HashMap::new();
            for s in self.symbols() {
                let e = units[s.0];
                if let Some(prev) = seen.insert(e, s) {
                    rep.push(
                        "unit-injective",
                        vec![self.symbol_label(prev).into(), self.symbol_label(s).into()],
                        "two symbols share a unit",
                    );
                }
                if self.d(e) != s || self.c(e) != s {
                    rep.push(
                        "unit-domain",
                        vec![self.symbol_label(s).into(), self.label(e).into()],
                        "d(ε_s) or c(ε_s) differs from s",
                    );
                    continue;
                }
                for a in self.elems() {
                    if self.c(a) == s && self.compose(e, a) != Some(a) {
                        rep.push("left-unit", self.names(&[e, a]), "ε_s α ≠ α");
                    }
                    if self.d(a) == s && self.compose(a, e) != Some(a) {
                        rep.push("right-unit", self.names(&[a, e]), "α ε_s ≠ α");
                    }
                }
                if self.star(e) != e {
                    rep.push("unit-star", self.names(&[e]), "ε_s* ≠ ε_s");
                }
            }
        }
        rep
    }

    /// Unit found by exhaustive search: `ε_s` with `d = c = s` acting as a
    /// two-sided identity on the fibers at `s`.
    fn find_unit(&self, s: Symbol) -> Option<Elem> {
        self.elems().find(|&e| {
            self.d(e) == s
                && self.c(e) == s
                && self.elems().all(|a| {
                    (self.c(a) != s || self.compose(e, a) == Some(a))
                        && (self.d(a) != s || self.compose(a, e) == Some(a))
                })
        })
    }

    pub fn find_units(&self) -> Option<Vec<Elem>> {
        if let Some(u) = &self.units {
            return Some(u.clone());
        }
        self.symbols().map(|s| self.find_unit(s)).collect()
    }

    pub fn classify(&self) -> Result<Classification> {
        let rep = self.validate();
        if let Some(v) = rep.violations.first() {
            return Err(Error::InvalidSemigroupoid(format!(
                "{} violated at {:?}: {}",
                v.axiom, v.witness, v.detail
            )));
        }
        let units = self.find_units();
        let is_transitive = self.symbols().all(|s| {
            self.symbols()
                .all(|t| self.elems().any(|e| self.d(e) == s && self.c(e) == t))
        });

        let mut inverse = Vec::with_capacity(self.len());
        for a in self.elems() {
            let mut found = None;
            let mut count = 0;
            for b in self.elems() {
                if self.d(b) != self.c(a) || self.c(b) != self.d(a) {
                    continue;
                }
                let aba = self.compose(a, b).and_then(|ab| self.compose(ab, a));
                let bab = self.compose(b, a).and_then(|ba| self.compose(ba, b));
                if aba == Some(a) && bab == Some(b) {
                    count += 1;
                    found = Some(b);
                }
            }
            if count == 1 {
                inverse.push(found.expect("count is one"));
            } else {
                break;
            }
        }
        let inverse_map = (inverse.len() == self.len()).then_some(inverse);
        let is_groupoid = match &units {
            Some(u) => self.elems().all(|a| {
                self.elems().any(|b| {
                    self.d(b) == self.c(a)
                        && self.c(b) == self.d(a)
                        && self.compose(a, b) == Some(u[self.c(a).0])
                        && self.compose(b, a) == Some(u[self.d(a).0])
                })
            }),
            None => false,
        };
        let star_is_inverse = inverse_map
            .as_ref()
            .map(|inv| self.elems().all(|a| self.star(a) == inv[a.0]));
        Ok(Classification {
            has_unit: units.is_some(),
            is_transitive,
            is_inverse: inverse_map.is_some(),
            is_groupoid,
            inverse_map,
            units,
            star_is_inverse,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tables(
        symbols: &[&str],
        elements: &[(&str, &str, &str)],
        compose: &[(&str, &str, &str)],
        star: &[(&str, &str)],
    ) -> SemigroupoidTables {
        let s = |v: &str| v.to_string();
        SemigroupoidTables {
            symbols: symbols.iter().map(|v| s(v)).collect(),
            elements: elements
                .iter()
                .map(|(a, b, c)| (s(a), s(b), s(c)))
                .collect(),
            compose: compose.iter().map(|(a, b, c)| (s(a), s(b), s(c))).collect(),
            star: star.iter().map(|(a, b)| (s(a), s(b))).collect(),
            units: None,
        }
    }

    fn pair_groupoid_st() -> SemigroupoidTables {
        families::pair_groupoid_tables(&["s".into(), "t".into()])
    }

    #[test]
    fn pair_groupoid_is_valid_groupoid() {
        let sg = StarSemigroupoid::from_tables(&pair_groupoid_st()).unwrap();
        assert_eq!(sg.len(), 4);
        assert!(sg.validate().is_valid());
        let c = sg.classify().unwrap();
        assert!(c.has_unit && c.is_transitive && c.is_inverse && c.is_groupoid);
        assert_eq!(c.star_is_inverse, Some(true));
        let inv = c.inverse_map.unwrap();
        let units = c.units.unwrap();
        for a in sg.elems() {
            assert_eq!(sg.compose(a, inv[a.0]), Some(units[sg.c(a).0]));
            assert_eq!(sg.compose(inv[a.0], a), Some(units[sg.d(a).0]));
        }
    }

    #[test]
    fn broken_star_reports_i1() {
        let mut t = pair_groupoid_st();
        for entry in t.star.iter_mut() {
            if entry.0 == "(s,t)" {
                entry.1 = "(s,t)".into();
            }
        }
        let sg = StarSemigroupoid::from_tables(&t).unwrap();
        let rep = sg.validate();
        let v = rep
            .violations
            .iter()
            .find(|v| v.axiom == "star-domain")
            .unwrap();
        assert_eq!(v.witness[0], "(s,t)");
        assert!(matches!(sg.classify(), Err(Error::InvalidSemigroupoid(_))));
    }

    #[test]
    fn trivial_group() {
        let t = tables(
            &["*"],
            &[("e", "*", "*")],
            &[("e", "e", "e")],
            &[("e", "e")],
        );
        let sg = StarSemigroupoid::from_tables(&t).unwrap();
        assert!(sg.validate().is_valid());
        let c = sg.classify().unwrap();
        assert!(c.is_groupoid && c.is_inverse && c.has_unit);
    }

    #[test]
    fn truncated_free_semigroup_is_not_inverse() {
        let t = tables(
            &["*"],
            &[("a", "*", "*"), ("a2", "*", "*")],
            &[
                ("a", "a", "a2"),
                ("a2", "a", "a2"),
                ("a", "a2", "a2"),
                ("a2", "a2", "a2"),
            ],
            &[("a", "a"), ("a2", "a2")],
        );
        let sg = StarSemigroupoid::from_tables(&t).unwrap();
        assert!(sg.validate().is_valid());
        let c = sg.classify().unwrap();
        assert!(!c.is_inverse);
        assert!(!c.is_groupoid);
        assert!(c.inverse_map.is_none());
    }

    #[test]
    fn dangling_labels_are_malformed() {
        let t = tables(
            &["*"],
            &[("e", "*", "*")],
            &[("e", "f", "e")],
            &[("e", "e")],
        );
        assert!(matches!(
            StarSemigroupoid::from_tables(&t),
            Err(Error::MalformedTable(_))
        ));
        let t = tables(&["*"], &[("e", "*", "q")], &[], &[("e", "e")]);
        assert!(matches!(
            StarSemigroupoid::from_tables(&t),
            Err(Error::MalformedTable(_))
        ));
        let t = tables(&["*"], &[("e", "*", "*")], &[("e", "e", "e")], &[]);
        assert!(matches!(
            StarSemigroupoid::from_tables(&t),
            Err(Error::MalformedTable(_))
        ));
    }

    #[test]
    fn missing_product_and_associativity() {
        let t = tables(&["*"], &[("e", "*", "*")], &[], &[("e", "e")]);
        let sg = StarSemigroupoid::from_tables(&t).unwrap();
        assert!(sg.validate().has("composition"));

        // x·y = x on two elements is associative; a twisted table is not.
        let t = tables(
            &["*"],
            &[("p", "*", "*"), ("q", "*", "*")],
            &[
                ("p", "p", "q"),
                ("p", "q", "p"),
                ("q", "p", "p"),
                ("q", "q", "p"),
            ],
            &[("p", "p"), ("q", "q")],
        );
        let sg = StarSemigroupoid::from_tables(&t).unwrap();
        assert!(sg.validate().has("associativity"));
    }

    #[test]
    fn isolated_symbols_are_rejected() {
        let t = tables(
            &["*", "lonely"],
            &[("e", "*", "*")],
            &[("e", "e", "e")],
            &[("e", "e")],
        );
        let sg = StarSemigroupoid::from_tables(&t).unwrap();
        let rep = sg.validate();
        assert!(rep.has("isolated-symbol"));
    }

    #[test]
    fn declared_units_are_checked() {
        let mut t = tables(
            &["*"],
            &[("e", "*", "*"), ("z", "*", "*")],
            &[
                ("e", "e", "e"),
                ("e", "z", "z"),
                ("z", "e", "z"),
                ("z", "z", "z"),
            ],
            &[("e", "e"), ("z", "z")],
        );
        t.units = Some(vec![("*".into(), "z".into())]);
        let sg = StarSemigroupoid::from_tables(&t).unwrap();
        assert!(sg.validate().has("left-unit"));
        t.units = Some(vec![("*".into(), "e".into())]);
        let sg = StarSemigroupoid::from_tables(&t).unwrap();
        assert!(sg.validate().is_valid());
        // {e, z} with z absorbing: not a groupoid, but inverse (e' = e, z' = z).
        let c = sg.classify().unwrap();
        assert!(c.is_inverse && !c.is_groupoid);
    }

    #[test]
    fn round_trip_tables() {
        let sg = StarSemigroupoid::from_tables(&pair_groupoid_st()).unwrap();
        let again = StarSemigroupoid::from_tables(&sg.to_tables()).unwrap();
        assert_eq!(sg, again);
    }
}
