//! Statistical constraints and their concrete syntax.
//!
//! A constraint states that variable sets X and Y are independent or
//! dependent given a (possibly empty) conditioning set Z:
//!
//! ```text
//! indep(Model; Color)
//! dep(Price; Fuel | Model)
//! ```
//!
//! Constraints are kept in canonical form: each side sorted, X not greater
//! than Y lexicographically, so `indep(B; A)` and `indep(A; B)` are the same
//! constraint. A constraint file is one constraint per line with `#` comments;
//! duplicates after canonicalization collapse with a warning.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable sets must be disjoint (shared: '{0}')")]
    NotDisjoint(String),
    #[error("both sides of a constraint need at least one variable")]
    EmptySide,
    #[error("line {line}: {source}")]
    InFile { line: usize, source: Box<ConstraintError> },
    #[error("cannot read constraint file: {0}")]
    Read(String),
    #[error("variable '{0}' is outside the given universe")]
    OutsideUniverse(String),
}

/// A sorted, duplicate-free set of variable names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarSet(Vec<String>);

impl VarSet {
    pub fn new(vars: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let mut v: Vec<String> = vars.into_iter().map(Into::into).collect();
        v.sort();
        v.dedup();
        VarSet(v)
    }

    pub fn empty() -> Self {
        VarSet(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.binary_search_by(|v| v.as_str().cmp(var)).is_ok()
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet::new(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        VarSet::new(self.iter().filter(|v| !other.contains(v)))
    }

    pub fn single(&self) -> Option<&str> {
        match self.0.as_slice() {
            [v] => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Independence,
    Dependence,
}

/// Table-driven classification against a variable universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintClass {
    Marginal,
    Elementary,
    Saturated,
    General,
}

/// A canonical (in)dependence statement X ⟂ Y | Z or X ⊥̸ Y | Z.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatConstraint {
    x: VarSet,
    y: VarSet,
    z: VarSet,
    polarity: Polarity,
}

impl StatConstraint {
    /// Builds a canonical constraint. X, Y, Z must be pairwise disjoint and
    /// X, Y non-empty; X and Y are swapped if needed so that X ≤ Y.
    pub fn new(x: VarSet, y: VarSet, z: VarSet, polarity: Polarity) -> Result<Self, ConstraintError> {
        if x.is_empty() || y.is_empty() {
            return Err(ConstraintError::EmptySide);
        }
        for (a, b) in [(&x, &y), (&x, &z), (&y, &z)] {
            if let Some(shared) = a.iter().find(|v| b.contains(v)) {
                return Err(ConstraintError::NotDisjoint(shared.to_string()));
            }
        }
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        Ok(StatConstraint { x, y, z, polarity })
    }

    pub fn independence(x: VarSet, y: VarSet, z: VarSet) -> Result<Self, ConstraintError> {
        Self::new(x, y, z, Polarity::Independence)
    }

    pub fn dependence(x: VarSet, y: VarSet, z: VarSet) -> Result<Self, ConstraintError> {
        Self::new(x, y, z, Polarity::Dependence)
    }

    pub fn x(&self) -> &VarSet {
        &self.x
    }

    pub fn y(&self) -> &VarSet {
        &self.y
    }

    pub fn z(&self) -> &VarSet {
        &self.z
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn is_independence(&self) -> bool {
        self.polarity == Polarity::Independence
    }

    /// The same triple with the opposite polarity.
    pub fn negated(&self) -> StatConstraint {
        StatConstraint {
            x: self.x.clone(),
            y: self.y.clone(),
            z: self.z.clone(),
            polarity: match self.polarity {
                Polarity::Independence => Polarity::Dependence,
                Polarity::Dependence => Polarity::Independence,
            },
        }
    }

    pub fn with_polarity(&self, polarity: Polarity) -> StatConstraint {
        StatConstraint { polarity, ..self.clone() }
    }

    /// All variables mentioned by the constraint.
    pub fn variables(&self) -> VarSet {
        self.x.union(&self.y).union(&self.z)
    }

    pub fn is_elementary(&self) -> bool {
        self.x.len() == 1 && self.y.len() == 1
    }

    pub fn is_marginal(&self) -> bool {
        self.is_elementary() && self.z.is_empty()
    }

    pub fn is_saturated(&self, universe: &VarSet) -> bool {
        universe.is_subset(&self.variables())
    }

    /// The most specific matching class from the constraint taxonomy.
    pub fn classify(&self, universe: &VarSet) -> Result<ConstraintClass, ConstraintError> {
        let vars = self.variables();
        if let Some(out) = vars.iter().find(|v| !universe.contains(v)) {
            return Err(ConstraintError::OutsideUniverse(out.to_string()));
        }
        Ok(if self.is_saturated(universe) {
            ConstraintClass::Saturated
        } else if self.is_marginal() {
            ConstraintClass::Marginal
        } else if self.is_elementary() {
            ConstraintClass::Elementary
        } else {
            ConstraintClass::General
        })
    }
}

impl fmt::Display for StatConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self.polarity {
            Polarity::Independence => "indep",
            Polarity::Dependence => "dep",
        };
        write!(f, "{kw}({}; {}", self.x, self.y)?;
        if !self.z.is_empty() {
            write!(f, " | {}", self.z)?;
        }
        write!(f, ")")
    }
}

impl Serialize for StatConstraint {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StatConstraint {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_constraint(&s).map_err(serde::de::Error::custom)
    }
}

/// Σ = I ∪ D: the declared independencies and dependencies, canonical and
/// deduplicated, in input order.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    pub independencies: Vec<StatConstraint>,
    pub dependencies: Vec<StatConstraint>,
}

impl ConstraintSet {
    pub fn from_constraints(constraints: impl IntoIterator<Item = StatConstraint>) -> (Self, Vec<String>) {
        let mut set = ConstraintSet::default();
        let mut seen = HashSet::new();
        let mut warnings = Vec::new();
        for sc in constraints {
            if !seen.insert(sc.clone()) {
                warnings.push(format!("duplicate constraint collapsed: {sc}"));
                continue;
            }
            match sc.polarity {
                Polarity::Independence => set.independencies.push(sc),
                Polarity::Dependence => set.dependencies.push(sc),
            }
        }
        (set, warnings)
    }

    pub fn len(&self) -> usize {
        self.independencies.len() + self.dependencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &StatConstraint> {
        self.independencies.iter().chain(self.dependencies.iter())
    }

    pub fn contains(&self, sc: &StatConstraint) -> bool {
        self.iter().any(|c| c == sc)
    }

    /// Everything mentioned anywhere in Σ.
    pub fn universe(&self) -> VarSet {
        VarSet::new(self.iter().flat_map(|sc| sc.variables().0))
    }

    pub fn without(&self, sc: &StatConstraint) -> ConstraintSet {
        ConstraintSet {
            independencies: self.independencies.iter().filter(|c| *c != sc).cloned().collect(),
            dependencies: self.dependencies.iter().filter(|c| *c != sc).cloned().collect(),
        }
    }

    /// Renders the set in file format, one constraint per line.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for sc in self.iter() {
            out.push_str(&sc.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parses one constraint: `("indep"|"dep") "(" varlist ";" varlist ["|" varlist] ")"`.
pub fn parse_constraint(line: &str) -> Result<StatConstraint, ConstraintError> {
    Parser::new(line).parse()
}

/// Parses a constraint file. Any line's parse error aborts with its line
/// number; the second return value lists collapsed duplicates.
pub fn parse_file(path: impl AsRef<Path>) -> Result<(ConstraintSet, Vec<String>), ConstraintError> {
    let text = fs::read_to_string(path.as_ref())
        .map_err(|e| ConstraintError::Read(format!("{}: {e}", path.as_ref().display())))?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<(ConstraintSet, Vec<String>), ConstraintError> {
    let mut constraints = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let sc = parse_constraint(line)
            .map_err(|e| ConstraintError::InFile { line: i + 1, source: Box::new(e) })?;
        constraints.push(sc);
    }
    Ok(ConstraintSet::from_constraints(constraints))
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser { input, pos: 0 }
    }

    fn parse(mut self) -> Result<StatConstraint, ConstraintError> {
        self.skip_ws();
        let polarity = if self.eat_keyword("indep") {
            Polarity::Independence
        } else if self.eat_keyword("dep") {
            Polarity::Dependence
        } else {
            return Err(self.err("expected 'indep' or 'dep'"));
        };
        self.expect('(')?;
        let x = self.varlist()?;
        self.expect(';')?;
        let y = self.varlist()?;
        self.skip_ws();
        let z = if self.peek() == Some('|') {
            self.pos += 1;
            self.varlist()?
        } else {
            VarSet::empty()
        };
        self.expect(')')?;
        self.skip_ws();
        if self.pos != self.input.len() {
            return Err(self.err("trailing input after ')'"));
        }
        StatConstraint::new(x, y, z, polarity)
    }

    fn varlist(&mut self) -> Result<VarSet, ConstraintError> {
        let mut vars = Vec::new();
        loop {
            vars.push(self.identifier()?);
            self.skip_ws();
            if self.peek() == Some(',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(VarSet::new(vars))
    }

    fn identifier(&mut self) -> Result<String, ConstraintError> {
        self.skip_ws();
        let start = self.pos;
        let mut chars = self.input[self.pos..].char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.err("expected identifier")),
        }
        let mut end = self.input.len();
        for (i, c) in chars {
            if !(c.is_ascii_alphanumeric() || c == '_') {
                end = self.pos + i;
                break;
            }
        }
        if end == self.input.len() {
            // identifier runs to the end only if the first char was consumed
            end = self.input.len();
        }
        self.pos = end;
        Ok(self.input[start..end].to_string())
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let rest = &self.input[self.pos..];
        if rest.starts_with(kw) {
            // keyword must not continue as an identifier
            let after = rest[kw.len()..].chars().next();
            if !matches!(after, Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                self.pos += kw.len();
                return true;
            }
        }
        false
    }

    fn expect(&mut self, c: char) -> Result<(), ConstraintError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn peek(&self) -> Option<char> {
        self.input[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> ConstraintError {
        ConstraintError::Syntax { pos: self.pos, msg: msg.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(vars: &[&str]) -> VarSet {
        VarSet::new(vars.iter().copied())
    }

    #[test]
    fn parses_marginal() {
        let sc = parse_constraint("indep(Model; Color)").unwrap();
        assert_eq!(sc.x(), &vs(&["Color"]));
        assert_eq!(sc.y(), &vs(&["Model"]));
        assert!(sc.z().is_empty());
        assert_eq!(sc.polarity(), Polarity::Independence);
    }

    #[test]
    fn canonicalizes_side_order() {
        let sc = parse_constraint("dep(Price; Fuel | Model)").unwrap();
        assert_eq!(sc.x(), &vs(&["Fuel"]));
        assert_eq!(sc.y(), &vs(&["Price"]));
        assert_eq!(sc.z(), &vs(&["Model"]));
        assert_eq!(sc.polarity(), Polarity::Dependence);
    }

    #[test]
    fn rejects_overlapping_sides() {
        assert!(matches!(parse_constraint("indep(A; A)"), Err(ConstraintError::NotDisjoint(_))));
        assert!(matches!(parse_constraint("indep(A; B | A)"), Err(ConstraintError::NotDisjoint(_))));
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_constraint("indep(A B)") {
            Err(ConstraintError::Syntax { pos, .. }) => assert!(pos >= 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetry_is_the_same_constraint() {
        let a = parse_constraint("indep(A; B)").unwrap();
        let b = parse_constraint("indep(B; A)").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonicalization_idempotent() {
        let sc = parse_constraint("indep(D,C; B,A | E)").unwrap();
        let again = StatConstraint::new(sc.x().clone(), sc.y().clone(), sc.z().clone(), sc.polarity()).unwrap();
        assert_eq!(sc, again);
    }

    #[test]
    fn display_round_trips() {
        for text in ["indep(A; B)", "dep(A,B; C | D,E)", "indep(A; B,C | Z_1)"] {
            let sc = parse_constraint(text).unwrap();
            let rendered = sc.to_string();
            assert_eq!(parse_constraint(&rendered).unwrap(), sc, "{text} -> {rendered}");
        }
    }

    #[test]
    fn file_collapses_symmetric_duplicates() {
        let (set, warnings) = parse_str("indep(A;B)\nindep(B;A)\n").unwrap();
        assert_eq!(set.independencies.len(), 1);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn file_keeps_both_polarities() {
        let (set, warnings) = parse_str("indep(A;B)\ndep(A;B)\n").unwrap();
        assert_eq!(set.independencies.len(), 1);
        assert_eq!(set.dependencies.len(), 1);
        assert!(warnings.is_empty());
    }

    #[test]
    fn empty_file_is_empty_set() {
        let (set, _) = parse_str("# nothing here\n\n").unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn file_error_names_line() {
        match parse_str("indep(A;B)\nbogus line\n") {
            Err(ConstraintError::InFile { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn classify_follows_taxonomy() {
        let universe = vs(&["Price", "Fuel", "Model", "Color"]);
        let marginal = parse_constraint("indep(Price; Fuel)").unwrap();
        assert_eq!(marginal.classify(&universe).unwrap(), ConstraintClass::Marginal);

        let saturated = parse_constraint("indep(Price; Fuel | Model,Color)").unwrap();
        assert_eq!(saturated.classify(&universe).unwrap(), ConstraintClass::Saturated);

        let universe2 = vs(&["A", "B", "C", "D"]);
        let general = parse_constraint("indep(A,B; C)").unwrap();
        assert_eq!(general.classify(&universe2).unwrap(), ConstraintClass::General);

        let elementary = parse_constraint("indep(A; B | C)").unwrap();
        assert_eq!(elementary.classify(&universe2).unwrap(), ConstraintClass::Elementary);
    }

    #[test]
    fn classify_rejects_foreign_variable() {
        let sc = parse_constraint("indep(A; B)").unwrap();
        assert!(matches!(
            sc.classify(&vs(&["A"])),
            Err(ConstraintError::OutsideUniverse(_))
        ));
    }
}
