//! Graphoid inference: closures, implication queries, and consistency.
//!
//! Independence statements are closed under three inference rules
//! (symmetry is implicit in the canonical constraint form):
//!
//! - decomposition: X ⟂ Y∪W | Z implies X ⟂ Y | Z for every non-empty
//!   proper subset Y of the second set
//! - weak union:    X ⟂ Y∪W | Z implies X ⟂ Y | Z∪W for every such split
//! - contraction:   (X ⟂ Y | Z) and (X ⟂ W | Y∪Z) imply X ⟂ Y∪W | Z
//!
//! A contraction match is attempted on both orientations of each member.
//! The union-form conclusion is materialized only when the shared side X
//! stays the canonical first side; a symmetric match contributes the
//! decomposition and weak-union consequences of its conclusion directly.
//! This keeps the closure free of mirror-image union constraints while
//! still deriving every elementary consequence, and on elementary inputs
//! of at most three variables it coincides on elementary members with the
//! dedicated three-variable engine ([`closure_3var`]).
//!
//! Consistency follows the divide-and-check scheme: close the independencies
//! once, then report the first declared dependence whose negation was
//! derived, together with its derivation. Inconsistent verdicts are
//! definitive; consistent verdicts are sound-but-incomplete.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::{ConstraintSet, Polarity, StatConstraint, VarSet};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("closure inputs must be independence constraints, got: {0}")]
    NotIndependence(StatConstraint),
    #[error("three-variable engine requires singleton sides and at most 3 variables, got: {0}")]
    ThreeVarPrecondition(StatConstraint),
}

/// Inference rules that can appear in a derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    Symmetry,
    Decomposition,
    WeakUnion,
    Contraction,
    /// Contraction-weak-union-decomposition; only the three-variable engine
    /// uses this composite rule.
    Cwd,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RuleId::Symmetry => "symmetry",
            RuleId::Decomposition => "decomposition",
            RuleId::WeakUnion => "weak-union",
            RuleId::Contraction => "contraction",
            RuleId::Cwd => "contraction-weak-union-decomposition",
        };
        write!(f, "{name}")
    }
}

/// How one derivation node produced its conclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivationStep {
    /// Leaf: the conclusion is input constraint number `index` (0-based, in
    /// closure input order).
    Axiom { index: usize },
    Rule(RuleId),
}

/// A proof tree. Leaves are axioms referencing input constraints; every
/// internal node's conclusion follows from its premises under its rule,
/// checkable by re-applying the rule (see [`Derivation::validate`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derivation {
    pub conclusion: StatConstraint,
    pub step: DerivationStep,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    /// Re-checks the whole tree against the closure inputs.
    pub fn validate(&self, inputs: &[StatConstraint]) -> bool {
        match &self.step {
            DerivationStep::Axiom { index } => {
                self.premises.is_empty() && inputs.get(*index) == Some(&self.conclusion)
            }
            DerivationStep::Rule(rule) => {
                let premise_constraints: Vec<StatConstraint> =
                    self.premises.iter().map(|p| p.conclusion.clone()).collect();
                apply_rule(*rule, &premise_constraints).contains(&self.conclusion)
                    && self.premises.iter().all(|p| p.validate(inputs))
            }
        }
    }

    /// Indented multi-line rendering for conflict reports.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let indent = "  ".repeat(depth);
        match &self.step {
            DerivationStep::Axiom { index } => {
                out.push_str(&format!("{indent}{}   [input #{}]\n", self.conclusion, index + 1));
            }
            DerivationStep::Rule(rule) => {
                out.push_str(&format!("{indent}{}   [by {rule}]\n", self.conclusion));
                for p in &self.premises {
                    p.render_into(out, depth + 1);
                }
            }
        }
    }

    /// The input constraints this derivation ultimately rests on.
    pub fn axiom_leaves(&self) -> Vec<&Derivation> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Derivation>) {
        if matches!(self.step, DerivationStep::Axiom { .. }) {
            out.push(self);
        }
        for p in &self.premises {
            p.collect_leaves(out);
        }
    }
}

/// Every conclusion a rule can produce from the given premises, canonical.
/// Symmetric orientations of each premise are considered.
pub fn apply_rule(rule: RuleId, premises: &[StatConstraint]) -> Vec<StatConstraint> {
    let mut out = Vec::new();
    match (rule, premises) {
        (RuleId::Symmetry, [p]) => out.push(p.clone()),
        (RuleId::Decomposition, [p]) => {
            for (first, second, cond) in orientations(p) {
                for (part, _rest) in proper_splits(&second) {
                    if let Ok(c) = StatConstraint::independence(first.clone(), part, cond.clone()) {
                        out.push(c);
                    }
                }
            }
        }
        (RuleId::WeakUnion, [p]) => {
            for (first, second, cond) in orientations(p) {
                for (part, rest) in proper_splits(&second) {
                    if let Ok(c) = StatConstraint::independence(first.clone(), part, cond.union(&rest)) {
                        out.push(c);
                    }
                }
            }
        }
        (RuleId::Contraction, [left, right]) => {
            for (lf, ly, lz) in orientations(left) {
                for (rf, rw, rz) in orientations(right) {
                    if lf == rf && rz == ly.union(&lz) {
                        if let Ok(c) = StatConstraint::independence(lf.clone(), ly.union(&rw), lz.clone()) {
                            out.push(c);
                        }
                    }
                }
            }
        }
        (RuleId::Cwd, [marginal, conditional]) => {
            for (mf, ms, mz) in orientations(marginal) {
                if !mz.is_empty() {
                    continue;
                }
                for (cf, cs, cz) in orientations(conditional) {
                    if mf == cf && cz == ms {
                        // (A ⟂ B) & (A ⟂ C | B)  =>  A ⟂ C  and  A ⟂ B | C
                        if let Ok(c) = StatConstraint::independence(mf.clone(), cs.clone(), VarSet::empty()) {
                            out.push(c);
                        }
                        if let Ok(c) = StatConstraint::independence(mf.clone(), ms.clone(), cs.clone()) {
                            out.push(c);
                        }
                    }
                }
            }
        }
        _ => {}
    }
    out.sort();
    out.dedup();
    out
}

fn orientations(sc: &StatConstraint) -> [(VarSet, VarSet, VarSet); 2] {
    [
        (sc.x().clone(), sc.y().clone(), sc.z().clone()),
        (sc.y().clone(), sc.x().clone(), sc.z().clone()),
    ]
}

/// All (non-empty proper subset, complement) splits of a variable set.
fn proper_splits(set: &VarSet) -> Vec<(VarSet, VarSet)> {
    let vars: Vec<&str> = set.iter().collect();
    let n = vars.len();
    if n < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for mask in 1..((1u64 << n) - 1) {
        let mut part = Vec::new();
        let mut rest = Vec::new();
        for (i, v) in vars.iter().enumerate() {
            if mask & (1 << i) != 0 {
                part.push(*v);
            } else {
                rest.push(*v);
            }
        }
        out.push((VarSet::new(part), VarSet::new(rest)));
    }
    out
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ClosureStats {
    /// Members taken off the worklist.
    pub iterations: u64,
    /// Rule firings, including ones that re-derived an existing member.
    pub decomposition: u64,
    pub weak_union: u64,
    pub contraction: u64,
    pub cwd: u64,
}

#[derive(Debug, Clone)]
pub struct ClosureOptions {
    /// Hard cap on closure size; exceeding it yields a truncated closure.
    pub member_limit: usize,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions { member_limit: 1_000_000 }
    }
}

#[derive(Debug)]
struct Node {
    conclusion: StatConstraint,
    step: DerivationStep,
    premises: Vec<usize>,
}

/// The inferred fixed point I* with one derivation per member.
pub struct Closure {
    inputs: Vec<StatConstraint>,
    order: Vec<StatConstraint>,
    member_nodes: HashMap<StatConstraint, usize>,
    nodes: Vec<Node>,
    pub stats: ClosureStats,
    /// True when the member cap stopped the computation early; membership
    /// answers are then not definitive.
    pub truncated: bool,
}

impl Closure {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Members in first-derived order.
    pub fn members(&self) -> impl Iterator<Item = &StatConstraint> {
        self.order.iter()
    }

    pub fn contains(&self, sc: &StatConstraint) -> bool {
        self.member_nodes.contains_key(sc)
    }

    pub fn inputs(&self) -> &[StatConstraint] {
        &self.inputs
    }

    pub fn derivation_of(&self, sc: &StatConstraint) -> Option<Derivation> {
        let &node = self.member_nodes.get(sc)?;
        Some(self.build_tree(node))
    }

    fn build_tree(&self, id: usize) -> Derivation {
        let node = &self.nodes[id];
        Derivation {
            conclusion: node.conclusion.clone(),
            step: node.step.clone(),
            premises: node.premises.iter().map(|&p| self.build_tree(p)).collect(),
        }
    }
}

struct Engine {
    nodes: Vec<Node>,
    member_nodes: HashMap<StatConstraint, usize>,
    order: Vec<StatConstraint>,
    queue: VecDeque<StatConstraint>,
    /// Oriented views keyed by (first side, conditioning set): candidates for
    /// the right premise of a contraction.
    by_first_cond: HashMap<(VarSet, VarSet), Vec<(usize, VarSet)>>,
    /// Oriented views keyed by (first side, second ∪ conditioning):
    /// candidates for the left premise of a contraction.
    by_first_span: HashMap<(VarSet, VarSet), Vec<(usize, VarSet, VarSet)>>,
    stats: ClosureStats,
    limit: usize,
    truncated: bool,
}

impl Engine {
    fn new(limit: usize) -> Self {
        Engine {
            nodes: Vec::new(),
            member_nodes: HashMap::new(),
            order: Vec::new(),
            queue: VecDeque::new(),
            by_first_cond: HashMap::new(),
            by_first_span: HashMap::new(),
            stats: ClosureStats::default(),
            limit,
            truncated: false,
        }
    }

    fn push_node(&mut self, conclusion: StatConstraint, step: DerivationStep, premises: Vec<usize>) -> usize {
        self.nodes.push(Node { conclusion, step, premises });
        self.nodes.len() - 1
    }

    /// Adds a canonical constraint as a member unless already known.
    fn add_member(&mut self, sc: StatConstraint, step: DerivationStep, premises: Vec<usize>) {
        if self.member_nodes.contains_key(&sc) {
            return;
        }
        if self.order.len() >= self.limit {
            self.truncated = true;
            return;
        }
        let id = self.push_node(sc.clone(), step, premises);
        self.member_nodes.insert(sc.clone(), id);
        self.order.push(sc.clone());
        self.queue.push_back(sc);
    }

    fn run(&mut self) {
        while let Some(sc) = self.queue.pop_front() {
            if self.truncated {
                break;
            }
            self.stats.iterations += 1;
            self.split_rules(&sc);
            self.contractions(&sc);
            self.index(&sc);
        }
    }

    /// Decomposition and weak union on both orientations of a member.
    fn split_rules(&mut self, sc: &StatConstraint) {
        let node = self.member_nodes[sc];
        for (first, second, cond) in orientations(sc) {
            if second.len() < 2 {
                continue;
            }
            for (part, rest) in proper_splits(&second) {
                if self.truncated {
                    return;
                }
                self.stats.decomposition += 1;
                if let Ok(c) = StatConstraint::independence(first.clone(), part.clone(), cond.clone()) {
                    self.add_member(c, DerivationStep::Rule(RuleId::Decomposition), vec![node]);
                }
                self.stats.weak_union += 1;
                if let Ok(c) = StatConstraint::independence(first.clone(), part, cond.union(&rest)) {
                    self.add_member(c, DerivationStep::Rule(RuleId::WeakUnion), vec![node]);
                }
            }
        }
    }

    /// Contraction with the new member as either premise.
    fn contractions(&mut self, sc: &StatConstraint) {
        let node = self.member_nodes[sc];
        for (first, second, cond) in orientations(sc) {
            // New member as left premise (X ⟂ Y | Z): partners are members
            // oriented (X ⟂ W | Y∪Z).
            let span = second.union(&cond);
            if let Some(partners) = self.by_first_cond.get(&(first.clone(), span)) {
                for (partner_node, w) in partners.clone() {
                    self.fire_contraction(&first, &second, &w, &cond, node, partner_node);
                }
            }
            // New member as right premise (X ⟂ W | Z'): partners are members
            // oriented (X ⟂ Y | Z) with Y∪Z = Z'.
            if let Some(partners) = self.by_first_span.get(&(first.clone(), cond.clone())) {
                for (partner_node, y, z) in partners.clone() {
                    self.fire_contraction(&first, &y, &second, &z, partner_node, node);
                }
            }
        }
    }

    fn fire_contraction(
        &mut self,
        shared: &VarSet,
        y: &VarSet,
        w: &VarSet,
        z: &VarSet,
        left_node: usize,
        right_node: usize,
    ) {
        if self.truncated {
            return;
        }
        self.stats.contraction += 1;
        let union = y.union(w);
        let Ok(conclusion) = StatConstraint::independence(shared.clone(), union.clone(), z.clone()) else {
            return;
        };
        if conclusion.x() == shared {
            self.add_member(conclusion, DerivationStep::Rule(RuleId::Contraction), vec![left_node, right_node]);
            return;
        }
        // Symmetric match: the mirror-image union form is not kept as a
        // member, but its decomposition and weak-union consequences are.
        if self.member_nodes.contains_key(&conclusion) {
            return;
        }
        let mid = self.push_node(
            conclusion,
            DerivationStep::Rule(RuleId::Contraction),
            vec![left_node, right_node],
        );
        for (part, rest) in proper_splits(&union) {
            if self.truncated {
                return;
            }
            self.stats.decomposition += 1;
            if let Ok(c) = StatConstraint::independence(shared.clone(), part.clone(), z.clone()) {
                self.add_member(c, DerivationStep::Rule(RuleId::Decomposition), vec![mid]);
            }
            self.stats.weak_union += 1;
            if let Ok(c) = StatConstraint::independence(shared.clone(), part, z.union(&rest)) {
                self.add_member(c, DerivationStep::Rule(RuleId::WeakUnion), vec![mid]);
            }
        }
    }

    fn index(&mut self, sc: &StatConstraint) {
        let node = self.member_nodes[sc];
        for (first, second, cond) in orientations(sc) {
            self.by_first_cond
                .entry((first.clone(), cond.clone()))
                .or_default()
                .push((node, second.clone()));
            self.by_first_span
                .entry((first, second.union(&cond)))
                .or_default()
                .push((node, second, cond));
        }
    }
}

/// Fixed point of the inference rules over independence constraints.
pub fn closure(inputs: &[StatConstraint], opts: &ClosureOptions) -> Result<Closure, InferenceError> {
    for sc in inputs {
        if !sc.is_independence() {
            return Err(InferenceError::NotIndependence(sc.clone()));
        }
    }
    let mut engine = Engine::new(opts.member_limit);
    for (i, sc) in inputs.iter().enumerate() {
        engine.add_member(sc.clone(), DerivationStep::Axiom { index: i }, Vec::new());
    }
    engine.run();

    debug_assert!(
        engine.truncated || engine.order.len() <= closure_size_cap(inputs).max(inputs.len()),
        "closure exceeded its size cap"
    );

    Ok(Closure {
        inputs: inputs.to_vec(),
        order: engine.order,
        member_nodes: engine.member_nodes,
        nodes: engine.nodes,
        stats: engine.stats,
        truncated: engine.truncated,
    })
}

/// Over-approximation of the reachable member count: for each input with
/// `l` variables, the sum over m = 2..=l of C(l, m) * 3^m.
pub fn closure_size_cap(inputs: &[StatConstraint]) -> usize {
    let mut cap = 0usize;
    for sc in inputs {
        let l = sc.variables().len() as u64;
        let mut per_input = 0u64;
        for m in 2..=l {
            per_input = per_input.saturating_add(binomial(l, m).saturating_mul(3u64.saturating_pow(m as u32)));
        }
        cap = cap.saturating_add(per_input.min(usize::MAX as u64) as usize);
    }
    cap
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result = 1u64;
    for i in 0..k {
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}

/// Whether `gamma` follows from the inputs, with a derivation when it does.
pub fn implies(
    inputs: &[StatConstraint],
    gamma: &StatConstraint,
    opts: &ClosureOptions,
) -> Result<(bool, Option<Derivation>), InferenceError> {
    if !gamma.is_independence() {
        return Err(InferenceError::NotIndependence(gamma.clone()));
    }
    let closure = closure(inputs, opts)?;
    let derivation = closure.derivation_of(gamma);
    Ok((derivation.is_some(), derivation))
}

/// Outcome of a consistency check.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConsistencyVerdict {
    /// No declared dependence is contradicted by the closure. `definitive`
    /// is false when the closure was truncated by the member cap.
    Consistent { definitive: bool },
    /// Fast-path outcome for all-elementary-saturated constraint sets.
    FastPathConsistent,
    Inconsistent {
        conflicting_dependence: StatConstraint,
        derivation: Derivation,
    },
}

impl ConsistencyVerdict {
    pub fn is_consistent(&self) -> bool {
        !matches!(self, ConsistencyVerdict::Inconsistent { .. })
    }
}

/// Closes the independencies once and reports the first declared dependence
/// (in input order) whose negation was derived.
pub fn check_consistency(sigma: &ConstraintSet, opts: &ClosureOptions) -> Result<ConsistencyVerdict, InferenceError> {
    let closure = closure(&sigma.independencies, opts)?;
    for lambda in &sigma.dependencies {
        let negated = lambda.with_polarity(Polarity::Independence);
        if let Some(derivation) = closure.derivation_of(&negated) {
            return Ok(ConsistencyVerdict::Inconsistent {
                conflicting_dependence: lambda.clone(),
                derivation,
            });
        }
    }
    Ok(ConsistencyVerdict::Consistent { definitive: !closure.truncated })
}

/// Like [`check_consistency`] but collects every conflicting dependence.
pub fn all_conflicts(
    sigma: &ConstraintSet,
    opts: &ClosureOptions,
) -> Result<Vec<(StatConstraint, Derivation)>, InferenceError> {
    let closure = closure(&sigma.independencies, opts)?;
    let mut out = Vec::new();
    for lambda in &sigma.dependencies {
        let negated = lambda.with_polarity(Polarity::Independence);
        if let Some(derivation) = closure.derivation_of(&negated) {
            out.push((lambda.clone(), derivation));
        }
    }
    Ok(out)
}

/// Shortcut for sets where every constraint is elementary and saturated:
/// such a set is consistent iff no triple carries both polarities. Returns
/// `None` when the guard does not hold.
pub fn saturated_fast_path(sigma: &ConstraintSet, universe: &VarSet) -> Option<ConsistencyVerdict> {
    if sigma.is_empty() {
        return None;
    }
    let applicable = sigma
        .iter()
        .all(|sc| sc.is_elementary() && sc.is_saturated(universe));
    if !applicable {
        return None;
    }
    for lambda in &sigma.dependencies {
        let negated = lambda.with_polarity(Polarity::Independence);
        if let Some(index) = sigma.independencies.iter().position(|sc| *sc == negated) {
            return Some(ConsistencyVerdict::Inconsistent {
                conflicting_dependence: lambda.clone(),
                derivation: Derivation {
                    conclusion: negated,
                    step: DerivationStep::Axiom { index },
                    premises: Vec::new(),
                },
            });
        }
    }
    Some(ConsistencyVerdict::FastPathConsistent)
}

/// Fixed point of the composite three-variable rule
/// `(A ⟂ B) & (A ⟂ C | B)  =>  A ⟂ C  and  A ⟂ B | C`
/// over elementary inputs that mention at most three variables.
pub fn closure_3var(inputs: &[StatConstraint], opts: &ClosureOptions) -> Result<Closure, InferenceError> {
    for sc in inputs {
        if !sc.is_independence() {
            return Err(InferenceError::NotIndependence(sc.clone()));
        }
        if !sc.is_elementary() || sc.variables().len() > 3 {
            return Err(InferenceError::ThreeVarPrecondition(sc.clone()));
        }
    }

    let mut engine = ThreeVarEngine {
        nodes: Vec::new(),
        member_nodes: HashMap::new(),
        order: Vec::new(),
        queue: VecDeque::new(),
        marginals: HashMap::new(),
        conditionals: HashMap::new(),
        stats: ClosureStats::default(),
        limit: opts.member_limit,
        truncated: false,
    };
    for (i, sc) in inputs.iter().enumerate() {
        engine.add(sc.clone(), DerivationStep::Axiom { index: i }, Vec::new());
    }
    engine.run();

    Ok(Closure {
        inputs: inputs.to_vec(),
        order: engine.order,
        member_nodes: engine.member_nodes,
        nodes: engine.nodes,
        stats: engine.stats,
        truncated: engine.truncated,
    })
}

struct ThreeVarEngine {
    nodes: Vec<Node>,
    member_nodes: HashMap<StatConstraint, usize>,
    order: Vec<StatConstraint>,
    queue: VecDeque<StatConstraint>,
    /// Marginal members keyed by their variable pair.
    marginals: HashMap<VarSet, usize>,
    /// Conditional members keyed by (one side, conditioning variable).
    conditionals: HashMap<(String, String), Vec<usize>>,
    stats: ClosureStats,
    limit: usize,
    truncated: bool,
}

impl ThreeVarEngine {
    fn add(&mut self, sc: StatConstraint, step: DerivationStep, premises: Vec<usize>) {
        if self.member_nodes.contains_key(&sc) {
            return;
        }
        if self.order.len() >= self.limit {
            self.truncated = true;
            return;
        }
        self.nodes.push(Node { conclusion: sc.clone(), step, premises });
        self.member_nodes.insert(sc.clone(), self.nodes.len() - 1);
        self.order.push(sc.clone());
        self.queue.push_back(sc);
    }

    /// CWD conclusions for marginal (P ⟂ B) with conditional (P ⟂ C | B).
    fn fire(&mut self, marginal_node: usize, conditional_node: usize, p: &str, b: &str, c: &str) {
        self.stats.cwd += 1;
        let premises = vec![marginal_node, conditional_node];
        let mut pending = Vec::new();
        if let Ok(sc) = StatConstraint::independence(VarSet::new([p]), VarSet::new([c]), VarSet::empty()) {
            pending.push(sc);
        }
        if let Ok(sc) = StatConstraint::independence(VarSet::new([p]), VarSet::new([b]), VarSet::new([c])) {
            pending.push(sc);
        }
        for sc in pending {
            self.add(sc, DerivationStep::Rule(RuleId::Cwd), premises.clone());
        }
    }

    fn run(&mut self) {
        while let Some(sc) = self.queue.pop_front() {
            if self.truncated {
                break;
            }
            self.stats.iterations += 1;
            let node = self.member_nodes[&sc];
            let x = sc.x().single().expect("elementary").to_string();
            let y = sc.y().single().expect("elementary").to_string();

            if sc.z().is_empty() {
                // New marginal P ⟂ B: fire against conditionals (P ⟂ * | B).
                for (p, b) in [(x.as_str(), y.as_str()), (y.as_str(), x.as_str())] {
                    let key = (p.to_string(), b.to_string());
                    if let Some(conds) = self.conditionals.get(&key).cloned() {
                        for cond_node in conds {
                            let cond = self.nodes[cond_node].conclusion.clone();
                            let c = if cond.x().single() == Some(p) {
                                cond.y().single().unwrap().to_string()
                            } else {
                                cond.x().single().unwrap().to_string()
                            };
                            self.fire(node, cond_node, p, b, &c);
                        }
                    }
                }
                self.marginals.insert(sc.x().union(sc.y()), node);
            } else {
                // New conditional P ⟂ C | B: fire against marginals {P, B}.
                let b = sc.z().single().expect("single conditioning variable").to_string();
                for (p, c) in [(x.as_str(), y.as_str()), (y.as_str(), x.as_str())] {
                    let pair = VarSet::new([p, b.as_str()]);
                    if let Some(&marg_node) = self.marginals.get(&pair) {
                        self.fire(marg_node, node, p, &b, c);
                    }
                    self.conditionals.entry((p.to_string(), b.clone())).or_default().push(node);
                }
            }
        }
    }
}
