//! Lifted numeric planning domains, grounded states, actions, plans and trajectories.

mod ops;

pub use ops::{applicable, apply, ground, ground_schema, satisfies, validate_plan, PlanValidation, PlanFailure};

use crate::num::{format_num, Num, SerNum};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },
    #[error("arity mismatch for `{name}`: expected {expected}, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("action `{0}` is not applicable in the given state")]
    NotApplicable(String),
    #[error("invalid declaration: {0}")]
    Declaration(String),
}

/// Argument of a lifted literal: a schema parameter (`?x`) or a constant object.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Param(usize),
    Const(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateSignature {
    pub name: String,
    pub param_types: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FluentSignature {
    pub name: String,
    pub param_types: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
    pub positive: bool,
}

impl Literal {
    pub fn pos(predicate: &str, args: Vec<Term>) -> Self {
        Literal { predicate: predicate.to_string(), args, positive: true }
    }

    pub fn neg(predicate: &str, args: Vec<Term>) -> Self {
        Literal { predicate: predicate.to_string(), args, positive: false }
    }

    pub fn ground(&self, binding: &[String]) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Param(i) => binding[*i].clone(),
                    Term::Const(c) => c.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparator {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub fn holds(self, lhs: Num, rhs: Num) -> bool {
        match self {
            Comparator::Le => lhs <= rhs,
            Comparator::Lt => lhs < rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Lt => "<",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }
}

/// `Σ coeff·fluent  cmp  constant`
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearCondition {
    pub coeffs: BTreeMap<String, Num>,
    pub cmp: Comparator,
    pub constant: Num,
}

impl LinearCondition {
    pub fn new(coeffs: impl IntoIterator<Item = (String, Num)>, cmp: Comparator, constant: Num) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LinearCondition { coeffs, cmp, constant }
    }

    /// Single-fluent condition `fluent cmp constant`.
    pub fn on(fluent: &str, cmp: Comparator, constant: Num) -> Self {
        Self::new([(fluent.to_string(), crate::num::one())], cmp, constant)
    }

    pub fn lhs(&self, fluents: &BTreeMap<String, Num>) -> Option<Num> {
        let mut acc = Num::zero();
        for (f, c) in &self.coeffs {
            acc += *c * *fluents.get(f)?;
        }
        Some(acc)
    }

    pub fn holds(&self, fluents: &BTreeMap<String, Num>) -> bool {
        match self.lhs(fluents) {
            Some(l) => self.cmp.holds(l, self.constant),
            None => false,
        }
    }
}

impl fmt::Display for LinearCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> =
            self.coeffs.iter().map(|(n, c)| format!("{}*{}", format_num(c), n)).collect();
        write!(f, "{} {} {}", terms.join(" + "), self.cmp.symbol(), format_num(&self.constant))
    }
}

/// `target' = Σ coeff·fluent + constant`, evaluated on pre-state values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearAssignment {
    pub target: String,
    pub coeffs: BTreeMap<String, Num>,
    pub constant: Num,
}

impl LinearAssignment {
    pub fn new(target: &str, coeffs: impl IntoIterator<Item = (String, Num)>, constant: Num) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LinearAssignment { target: target.to_string(), coeffs, constant }
    }

    /// `target' = target + delta`
    pub fn delta(target: &str, delta: Num) -> Self {
        Self::new(target, [(target.to_string(), crate::num::one())], delta)
    }

    /// Returns the constant increment when the assignment is `target += c`.
    pub fn as_delta(&self) -> Option<Num> {
        if self.coeffs.len() == 1 && self.coeffs.get(&self.target) == Some(&crate::num::one()) {
            Some(self.constant)
        } else {
            None
        }
    }

    pub fn eval(&self, fluents: &BTreeMap<String, Num>) -> Option<Num> {
        let mut acc = self.constant;
        for (f, c) in &self.coeffs {
            acc += *c * *fluents.get(f)?;
        }
        Some(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Parameter {
    pub name: String,
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<Parameter>,
    /// Pairs of parameter indices that must bind different objects.
    pub distinct: Vec<(usize, usize)>,
    pub preconditions: Vec<Literal>,
    pub numeric_preconditions: Vec<LinearCondition>,
    pub add_effects: Vec<Literal>,
    pub del_effects: Vec<Literal>,
    pub numeric_effects: Vec<LinearAssignment>,
}

impl ActionSchema {
    pub fn new(name: &str, params: &[(&str, &str)]) -> Self {
        ActionSchema {
            name: name.to_string(),
            params: params
                .iter()
                .map(|(n, t)| Parameter { name: n.to_string(), ty: t.to_string() })
                .collect(),
            ..Default::default()
        }
    }

    /// Sorts and deduplicates every component so structurally equal schemas compare equal.
    pub fn canonicalize(&mut self) {
        for (a, b) in self.distinct.iter_mut() {
            if *a > *b {
                std::mem::swap(a, b);
            }
        }
        for v in [&mut self.preconditions, &mut self.add_effects, &mut self.del_effects] {
            v.sort();
            v.dedup();
        }
        self.distinct.sort();
        self.distinct.dedup();
        self.numeric_preconditions.sort();
        self.numeric_preconditions.dedup();
        self.numeric_effects.sort_by(|a, b| a.target.cmp(&b.target));
    }

    pub fn all_distinct(mut self) -> Self {
        for i in 0..self.params.len() {
            for j in i + 1..self.params.len() {
                self.distinct.push((i, j));
            }
        }
        self
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DomainModel {
    pub name: String,
    pub types: Vec<String>,
    pub predicates: Vec<PredicateSignature>,
    pub fluents: Vec<FluentSignature>,
    pub schemas: Vec<ActionSchema>,
}

impl DomainModel {
    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateSignature> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn fluent_names(&self) -> Vec<String> {
        self.fluents.iter().map(|f| f.name.clone()).collect()
    }

    /// Same signatures, no action schemas.
    pub fn skeleton(&self) -> DomainModel {
        DomainModel { schemas: Vec::new(), ..self.clone() }
    }

    /// Checks that every symbol a schema references is declared with the right arity.
    pub fn validate(&self) -> Result<(), ModelError> {
        let has_type = |t: &str| self.types.iter().any(|x| x == t);
        for p in &self.predicates {
            for t in &p.param_types {
                if !has_type(t) {
                    return Err(ModelError::Undeclared { kind: "type", name: t.clone() });
                }
            }
        }
        for f in &self.fluents {
            if !f.param_types.is_empty() {
                return Err(ModelError::Declaration(format!(
                    "fluent `{}` has parameters; only 0-ary fluents are supported",
                    f.name
                )));
            }
        }
        let fluent_declared = |n: &str| self.fluents.iter().any(|f| f.name == n);
        for s in &self.schemas {
            for p in &s.params {
                if !has_type(&p.ty) {
                    return Err(ModelError::Undeclared { kind: "type", name: p.ty.clone() });
                }
            }
            for (a, b) in &s.distinct {
                if *a >= s.params.len() || *b >= s.params.len() {
                    return Err(ModelError::Declaration(format!(
                        "`{}` inequality references a missing parameter",
                        s.name
                    )));
                }
            }
            for lit in s.preconditions.iter().chain(&s.add_effects).chain(&s.del_effects) {
                let sig = self
                    .predicate(&lit.predicate)
                    .ok_or_else(|| ModelError::Undeclared { kind: "predicate", name: lit.predicate.clone() })?;
                if sig.param_types.len() != lit.args.len() {
                    return Err(ModelError::Arity {
                        name: lit.predicate.clone(),
                        expected: sig.param_types.len(),
                        got: lit.args.len(),
                    });
                }
                for t in &lit.args {
                    if let Term::Param(i) = t {
                        if *i >= s.params.len() {
                            return Err(ModelError::Declaration(format!(
                                "`{}` literal references missing parameter {i}",
                                s.name
                            )));
                        }
                    }
                }
            }
            for lit in &s.add_effects {
                if s.del_effects.contains(lit) {
                    return Err(ModelError::Declaration(format!(
                        "`{}` both adds and deletes {}",
                        s.name, lit.predicate
                    )));
                }
            }
            let mut targets = BTreeSet::new();
            for e in &s.numeric_effects {
                if !targets.insert(e.target.as_str()) {
                    return Err(ModelError::Declaration(format!(
                        "`{}` assigns `{}` twice",
                        s.name, e.target
                    )));
                }
                for f in std::iter::once(&e.target).chain(e.coeffs.keys()) {
                    if !fluent_declared(f) {
                        return Err(ModelError::Undeclared { kind: "fluent", name: f.clone() });
                    }
                }
            }
            for c in &s.numeric_preconditions {
                for f in c.coeffs.keys() {
                    if !fluent_declared(f) {
                        return Err(ModelError::Undeclared { kind: "fluent", name: f.clone() });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A grounded predicate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: &str, args: &[&str]) -> Self {
        Atom { predicate: predicate.to_string(), args: args.iter().map(|a| a.to_string()).collect() }
    }

    /// Parses `(pred a b)` or `pred a b`.
    pub fn parse(s: &str) -> Option<Atom> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = inner.split_whitespace();
        let predicate = parts.next()?.to_string();
        Some(Atom { predicate, args: parts.map(str::to_string).collect() })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Atom::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad atom {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SymbolicState {
    #[serde(rename = "predicates")]
    pub atoms: BTreeSet<Atom>,
    #[serde(with = "fluent_map")]
    pub fluents: BTreeMap<String, Num>,
}

mod fluent_map {
    use super::*;

    pub fn serialize<S: serde::Serializer>(m: &BTreeMap<String, Num>, s: S) -> Result<S::Ok, S::Error> {
        let conv: BTreeMap<&String, SerNum> = m.iter().map(|(k, v)| (k, SerNum(*v))).collect();
        conv.serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Num>, D::Error> {
        let raw: BTreeMap<String, SerNum> = BTreeMap::deserialize(d)?;
        Ok(raw.into_iter().map(|(k, v)| (k, v.0)).collect())
    }
}

impl SymbolicState {
    pub fn holds(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn fluent(&self, name: &str) -> Option<Num> {
        self.fluents.get(name).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundedAction {
    pub name: String,
    #[serde(rename = "params")]
    pub args: Vec<String>,
}

impl GroundedAction {
    pub fn new(name: &str, args: &[&str]) -> Self {
        GroundedAction { name: name.to_string(), args: args.iter().map(|a| a.to_string()).collect() }
    }
}

impl fmt::Display for GroundedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Goal {
    pub atoms: Vec<Atom>,
    pub conditions: Vec<LinearCondition>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct InstanceMeta {
    pub task: String,
    pub size: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProblemInstance {
    pub name: String,
    /// `(object, type)` pairs, sorted by object name.
    pub objects: Vec<(String, String)>,
    pub init: SymbolicState,
    pub goal: Goal,
    pub meta: InstanceMeta,
}

impl ProblemInstance {
    pub fn objects_of<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.objects.iter().filter(move |(_, t)| t == ty).map(|(o, _)| o.as_str())
    }

    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects
            .binary_search_by(|(o, _)| o.as_str().cmp(name))
            .ok()
            .map(|i| self.objects[i].1.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Applied,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub pre: SymbolicState,
    pub action: GroundedAction,
    pub post: Option<SymbolicState>,
    pub outcome: Outcome,
    pub reward: u8,
}

impl TransitionRecord {
    pub fn applied(pre: SymbolicState, action: GroundedAction, post: SymbolicState, reward: u8) -> Self {
        TransitionRecord { pre, action, post: Some(post), outcome: Outcome::Applied, reward }
    }

    pub fn rejected(pre: SymbolicState, action: GroundedAction) -> Self {
        TransitionRecord { pre, action, post: None, outcome: Outcome::Rejected, reward: 0 }
    }

    pub fn is_consistent(&self) -> bool {
        (self.outcome == Outcome::Applied) == self.post.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Producer {
    #[default]
    Expert,
    Rl,
    Planner,
    Shortcut,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Trajectory {
    pub episode_id: u64,
    pub instance_id: String,
    pub seed: u64,
    pub producer: Producer,
    /// Applied transitions only, chained.
    pub records: Vec<TransitionRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `s0, s1, …, sn`; empty for an empty trajectory.
    pub fn states(&self) -> Vec<&SymbolicState> {
        let mut out = Vec::with_capacity(self.records.len() + 1);
        if let Some(first) = self.records.first() {
            out.push(&first.pre);
        }
        for r in &self.records {
            if let Some(p) = &r.post {
                out.push(p);
            }
        }
        out
    }

    pub fn actions(&self) -> Vec<&GroundedAction> {
        self.records.iter().map(|r| &r.action).collect()
    }

    pub fn plan(&self) -> Plan {
        Plan(self.records.iter().map(|r| r.action.clone()).collect())
    }

    pub fn reached_goal(&self) -> bool {
        self.records.last().map(|r| r.reward > 0).unwrap_or(false)
    }

    /// Every record applied and post-state of `k` equals pre-state of `k+1`.
    pub fn is_chained(&self) -> bool {
        self.records.iter().all(|r| r.outcome == Outcome::Applied && r.is_consistent())
            && self.records.windows(2).all(|w| w[0].post.as_ref() == Some(&w[1].pre))
    }

    /// Builds a chained trajectory from `states` and the actions between them.
    pub fn from_states(
        states: Vec<SymbolicState>,
        actions: Vec<GroundedAction>,
        final_reward: u8,
    ) -> Trajectory {
        assert_eq!(states.len(), actions.len() + 1, "need one more state than actions");
        let n = actions.len();
        let mut records = Vec::with_capacity(n);
        let mut it = states.into_iter();
        let mut prev = it.next();
        for (k, (a, post)) in actions.into_iter().zip(it).enumerate() {
            let pre = prev.take().expect("state");
            let reward = if k + 1 == n { final_reward } else { 0 };
            records.push(TransitionRecord::applied(pre, a, post.clone(), reward));
            prev = Some(post);
        }
        Trajectory { records, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Plan(pub Vec<GroundedAction>);

impl Plan {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
