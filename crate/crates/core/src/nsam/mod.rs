//! Safe numeric action-model learning from fully observed trajectories.
//!
//! Discrete part: lifted preconditions are the intersection of the literals true in every
//! observed pre-state, effects the union of observed changes. Numeric part: preconditions
//! are the convex hull of observed pre-state fluent vectors, effects exact linear fits.

pub mod hull;
pub mod linalg;

pub use hull::{learn_hull, HullConfig, HullError, HullRegion};

use crate::model::{
    ActionSchema, Comparator, DomainModel, LinearAssignment, LinearCondition, Literal, Parameter,
    SymbolicState, Term, Trajectory, TransitionRecord,
};
use crate::num::{int, Num};
use linalg::{rank, solve, Matrix};
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NsamError {
    #[error("inconsistent observations for `{schema}`: {detail}")]
    Inconsistent { schema: String, detail: String },
    #[error("effect on `{fluent}` of `{schema}` is not linearly expressible")]
    NotLinear { schema: String, fluent: String },
    #[error("hull for `{schema}`: {source}")]
    Hull { schema: String, source: HullError },
    #[error("action `{0}` binds the same object twice; cannot lift")]
    NonInjective(String),
    #[error("cannot infer the type of object `{0}`")]
    Untyped(String),
    #[error("undeclared predicate `{0}` in an observed state")]
    Undeclared(String),
}

/// One lifted observation of a schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiftedObservation {
    /// Lifted literals true in the pre-state (over bound objects only).
    pub pre: BTreeSet<Literal>,
    pub post: BTreeSet<Literal>,
    pub pre_fluents: Vec<Num>,
    pub post_fluents: Vec<Num>,
}

/// All observations of one schema, deduplicated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SchemaObservations {
    pub name: String,
    pub param_types: Vec<String>,
    pub observations: BTreeSet<LiftedObservation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NsamConfig {
    pub hull: HullConfig,
}

impl Default for NsamConfig {
    fn default() -> Self {
        NsamConfig { hull: HullConfig::default() }
    }
}

/// Numeric precondition region over named fluents.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericPreconditionRegion {
    pub fluents: Vec<String>,
    pub hull: HullRegion,
}

impl NumericPreconditionRegion {
    pub fn conditions(&self) -> Vec<LinearCondition> {
        let named = |a: &[Num]| -> Vec<(String, Num)> { self.fluents.iter().cloned().zip(a.iter().copied()).collect() };
        let mut out = Vec::new();
        for (a, b) in &self.hull.equalities {
            out.push(LinearCondition::new(named(a), Comparator::Eq, *b));
        }
        for (a, b) in &self.hull.inequalities {
            // -x ≤ -c reads better as x ≥ c.
            if a.iter().all(|v| !v.is_positive()) {
                let neg: Vec<Num> = a.iter().map(|v| -*v).collect();
                out.push(LinearCondition::new(named(&neg), Comparator::Ge, -*b));
            } else {
                out.push(LinearCondition::new(named(a), Comparator::Le, *b));
            }
        }
        out
    }

    pub fn contains(&self, fluents: &BTreeMap<String, Num>) -> bool {
        let x: Option<Vec<Num>> = self.fluents.iter().map(|f| fluents.get(f).copied()).collect();
        x.is_some_and(|x| self.hull.contains(&x))
    }
}

pub fn learn_region(
    fluents: &[String],
    samples: &[Vec<Num>],
    config: &HullConfig,
) -> Result<NumericPreconditionRegion, HullError> {
    Ok(NumericPreconditionRegion { fluents: fluents.to_vec(), hull: learn_hull(samples, config)? })
}

/// A fitted numeric effect and whether it is pinned down on the whole precondition region.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedEffect {
    pub assignment: LinearAssignment,
    pub determined: bool,
}

/// Fits `post_j = w·pre + b` for every fluent that changes in some observation.
///
/// `span_constrained` says the precondition region lies in the affine hull of the samples,
/// in which case any exact fit is unique on the region.
pub fn solve_effects(
    schema: &str,
    fluents: &[String],
    pairs: &[(Vec<Num>, Vec<Num>)],
    span_constrained: bool,
) -> Result<Vec<FittedEffect>, NsamError> {
    let d = fluents.len();
    let mut by_pre: HashMap<&Vec<Num>, &Vec<Num>> = HashMap::new();
    for (x, y) in pairs {
        if let Some(prev) = by_pre.insert(x, y) {
            if prev != y {
                return Err(NsamError::Inconsistent {
                    schema: schema.to_string(),
                    detail: "same numeric pre-state, different post-states".into(),
                });
            }
        }
    }
    let mut out = Vec::new();
    for j in 0..d {
        if pairs.iter().all(|(x, y)| x[j] == y[j]) {
            continue;
        }
        let delta = pairs[0].1[j] - pairs[0].0[j];
        if pairs.iter().all(|(x, y)| y[j] - x[j] == delta) {
            out.push(FittedEffect { assignment: LinearAssignment::delta(&fluents[j], delta), determined: true });
            continue;
        }
        // Columns: bias, self, then the other fluents; free variables end up 0.
        let cols: Vec<usize> = std::iter::once(j).chain((0..d).filter(|&k| k != j)).collect();
        let a: Matrix =
            pairs.iter().map(|(x, _)| std::iter::once(int(1)).chain(cols.iter().map(|&k| x[k])).collect()).collect();
        let y: Vec<Num> = pairs.iter().map(|(_, y)| y[j]).collect();
        let w = solve(&a, &y)
            .ok_or_else(|| NsamError::NotLinear { schema: schema.to_string(), fluent: fluents[j].clone() })?;
        let coeffs = cols.iter().enumerate().map(|(i, &k)| (fluents[k].clone(), w[i + 1]));
        let determined = span_constrained || rank(&a) == d + 1;
        out.push(FittedEffect { assignment: LinearAssignment::new(&fluents[j], coeffs, w[0]), determined });
    }
    Ok(out)
}

/// Incremental learner; `update` is equivalent to relearning over all data seen so far.
#[derive(Clone, Debug)]
pub struct Learner {
    signatures: DomainModel,
    config: NsamConfig,
    data: BTreeMap<String, SchemaObservations>,
    learned: BTreeMap<String, Option<ActionSchema>>,
    model: DomainModel,
}

impl Learner {
    pub fn new(signatures: &DomainModel, config: NsamConfig) -> Self {
        let skeleton = signatures.skeleton();
        Learner {
            signatures: skeleton.clone(),
            config,
            data: BTreeMap::new(),
            learned: BTreeMap::new(),
            model: DomainModel { name: format!("{}_learned", skeleton.name), ..skeleton },
        }
    }

    pub fn model(&self) -> &DomainModel {
        &self.model
    }

    pub fn observations(&self) -> &BTreeMap<String, SchemaObservations> {
        &self.data
    }

    /// Adds the applied transitions of `trajectory`; returns whether the model changed.
    pub fn update(&mut self, trajectory: &Trajectory) -> Result<bool, NsamError> {
        self.update_records(trajectory.records.iter())
    }

    pub fn update_all<'a>(&mut self, trajectories: impl IntoIterator<Item = &'a Trajectory>) -> Result<bool, NsamError> {
        self.update_records(trajectories.into_iter().flat_map(|t| t.records.iter()))
    }

    fn update_records<'a>(&mut self, records: impl Iterator<Item = &'a TransitionRecord>) -> Result<bool, NsamError> {
        let fluents = self.signatures.fluent_names();
        let mut touched = BTreeSet::new();
        for r in records {
            let Some(post) = &r.post else { continue };
            let (types, obs) = lift(&self.signatures, &fluents, &r.pre, &r.action, post)?;
            let entry = self.data.entry(r.action.name.clone()).or_insert_with(|| SchemaObservations {
                name: r.action.name.clone(),
                param_types: types.clone(),
                observations: BTreeSet::new(),
            });
            if entry.param_types != types {
                return Err(NsamError::Inconsistent {
                    schema: r.action.name.clone(),
                    detail: format!("parameter types {:?} vs {:?}", entry.param_types, types),
                });
            }
            if entry.observations.insert(obs) {
                touched.insert(r.action.name.clone());
            }
        }
        if touched.is_empty() {
            return Ok(false);
        }
        for name in touched {
            let schema = learn_schema(&self.signatures, &self.data[&name], &self.config)?;
            self.learned.insert(name, schema);
        }
        let schemas: Vec<ActionSchema> = self.learned.values().flatten().cloned().collect();
        let changed = schemas != self.model.schemas;
        self.model.schemas = schemas;
        Ok(changed)
    }
}

/// Batch learning; the result has one schema per observed, fully determined action.
pub fn learn(
    trajectories: &[Trajectory],
    signatures: &DomainModel,
    config: &NsamConfig,
) -> Result<DomainModel, NsamError> {
    let mut l = Learner::new(signatures, config.clone());
    l.update_all(trajectories)?;
    Ok(l.model)
}

fn object_types(signatures: &DomainModel, state: &SymbolicState) -> Result<HashMap<String, String>, NsamError> {
    let mut out = HashMap::new();
    for a in &state.atoms {
        let sig = signatures.predicate(&a.predicate).ok_or_else(|| NsamError::Undeclared(a.predicate.clone()))?;
        for (o, t) in a.args.iter().zip(&sig.param_types) {
            out.entry(o.clone()).or_insert_with(|| t.clone());
        }
    }
    Ok(out)
}

fn lift_atoms(state: &SymbolicState, index: &HashMap<&str, usize>) -> BTreeSet<Literal> {
    state
        .atoms
        .iter()
        .filter_map(|a| {
            let args: Option<Vec<Term>> = a.args.iter().map(|o| index.get(o.as_str()).map(|i| Term::Param(*i))).collect();
            args.map(|args| Literal { predicate: a.predicate.clone(), args, positive: true })
        })
        .collect()
}

fn lift(
    signatures: &DomainModel,
    fluents: &[String],
    pre: &SymbolicState,
    action: &crate::model::GroundedAction,
    post: &SymbolicState,
) -> Result<(Vec<String>, LiftedObservation), NsamError> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, o) in action.args.iter().enumerate() {
        if index.insert(o.as_str(), i).is_some() {
            return Err(NsamError::NonInjective(action.to_string()));
        }
    }
    let types_of = object_types(signatures, pre)?;
    let types = action
        .args
        .iter()
        .map(|o| types_of.get(o).cloned().ok_or_else(|| NsamError::Untyped(o.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let vec_of = |s: &SymbolicState| fluents.iter().map(|f| s.fluent(f).unwrap_or_default()).collect::<Vec<Num>>();
    Ok((
        types,
        LiftedObservation {
            pre: lift_atoms(pre, &index),
            post: lift_atoms(post, &index),
            pre_fluents: vec_of(pre),
            post_fluents: vec_of(post),
        },
    ))
}

/// All lifted literals over the schema's parameters that are type-compatible with a signature.
fn candidate_literals(signatures: &DomainModel, param_types: &[String]) -> Vec<Literal> {
    let mut out = Vec::new();
    for sig in &signatures.predicates {
        let mut tuples: Vec<Vec<usize>> = vec![vec![]];
        for t in &sig.param_types {
            let choices: Vec<usize> = (0..param_types.len()).filter(|&i| &param_types[i] == t).collect();
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |&c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        for tup in tuples {
            out.push(Literal::pos(&sig.name, tup.into_iter().map(Term::Param).collect()));
        }
    }
    out
}

/// Learns one schema; `None` when some numeric effect is undetermined (never planned with).
pub fn learn_schema(
    signatures: &DomainModel,
    obs: &SchemaObservations,
    config: &NsamConfig,
) -> Result<Option<ActionSchema>, NsamError> {
    let name = &obs.name;
    let fluents = signatures.fluent_names();
    let candidates = candidate_literals(signatures, &obs.param_types);

    // Preconditions: literals with the same polarity in every observed pre-state.
    let mut preconditions: BTreeSet<Literal> = BTreeSet::new();
    for c in &candidates {
        let truth: BTreeSet<bool> = obs.observations.iter().map(|o| o.pre.contains(c)).collect();
        if truth.len() == 1 {
            let positive = *truth.iter().next().unwrap();
            preconditions.insert(Literal { positive, ..c.clone() });
        }
    }
    let mut add = BTreeSet::new();
    let mut del = BTreeSet::new();
    for o in &obs.observations {
        add.extend(o.post.difference(&o.pre).cloned());
        del.extend(o.pre.difference(&o.post).cloned());
    }
    if let Some(l) = add.intersection(&del).next() {
        return Err(NsamError::Inconsistent {
            schema: name.clone(),
            detail: format!("{} is both added and deleted", l.predicate),
        });
    }
    // Deterministic STRIPS check: effects reproduce every observed post-state.
    for o in &obs.observations {
        let predicted: BTreeSet<Literal> = o.pre.difference(&del).cloned().chain(add.iter().cloned()).collect();
        if predicted != o.post {
            return Err(NsamError::Inconsistent {
                schema: name.clone(),
                detail: "discrete effects differ between observations".into(),
            });
        }
    }

    let samples: Vec<Vec<Num>> = obs.observations.iter().map(|o| o.pre_fluents.clone()).collect();
    let region = learn_region(&fluents, &samples, &config.hull)
        .map_err(|source| NsamError::Hull { schema: name.clone(), source })?;
    let pairs: Vec<(Vec<Num>, Vec<Num>)> =
        obs.observations.iter().map(|o| (o.pre_fluents.clone(), o.post_fluents.clone())).collect();
    let effects = solve_effects(name, &fluents, &pairs, !region.hull.is_box)?;
    if effects.iter().any(|e| !e.determined) {
        log::debug!("dropping `{name}`: undetermined numeric effect");
        return Ok(None);
    }

    let params: Vec<(String, String)> = obs.param_types.iter().enumerate().map(|(i, t)| (format!("?p{i}"), t.clone())).collect();
    let mut schema = ActionSchema {
        name: name.clone(),
        params: params.into_iter().map(|(name, ty)| Parameter { name, ty }).collect(),
        ..Default::default()
    };
    schema = schema.all_distinct();
    schema.preconditions = preconditions.into_iter().collect();
    schema.numeric_preconditions = region.conditions();
    schema.add_effects = add.into_iter().collect();
    schema.del_effects = del.into_iter().collect();
    schema.numeric_effects = effects.into_iter().map(|e| e.assignment).collect();
    schema.canonicalize();
    Ok(Some(schema))
}

/// Lifts an arbitrary atom set through `binding` (exposed for tests).
pub fn lift_state(state: &SymbolicState, binding: &[String]) -> BTreeSet<Literal> {
    let index: HashMap<&str, usize> = binding.iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect();
    lift_atoms(state, &index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn v(x: &[i64]) -> Vec<Num> {
        x.iter().map(|a| int(*a)).collect()
    }

    #[test]
    fn constant_delta_fast_path() {
        let f = names(&["log", "planks"]);
        let e = solve_effects("CRAFT_PLANK", &f, &[(v(&[3, 0]), v(&[2, 4]))], true).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].assignment, LinearAssignment::delta("log", int(-1)));
        assert_eq!(e[1].assignment, LinearAssignment::delta("planks", int(4)));
    }

    #[test]
    fn recovers_general_linear_effect() {
        let f = names(&["x", "y"]);
        let obs: Vec<_> = [[1, 0], [0, 1], [2, 3]].iter().map(|p| (v(p), v(&[2 * p[0] + p[1], p[1]]))).collect();
        let e = solve_effects("A", &f, &obs, true).unwrap();
        assert_eq!(e.len(), 1);
        let a = &e[0].assignment;
        assert_eq!(a.coeffs.get("x"), Some(&int(2)));
        assert_eq!(a.coeffs.get("y"), Some(&int(1)));
        assert_eq!(a.constant, int(0));
        assert!(e[0].determined);
    }

    #[test]
    fn contradictory_pair_is_error() {
        let f = names(&["x"]);
        let r = solve_effects("A", &f, &[(v(&[1]), v(&[2])), (v(&[1]), v(&[3]))], true);
        assert!(matches!(r, Err(NsamError::Inconsistent { .. })));
        let r = solve_effects("A", &f, &[(v(&[0]), v(&[0])), (v(&[1]), v(&[1])), (v(&[2]), v(&[5]))], true);
        assert!(matches!(r, Err(NsamError::NotLinear { .. })));
    }

    #[test]
    fn undetermined_without_span_constraint() {
        let f = names(&["x", "y"]);
        let obs = vec![(v(&[1, 1]), v(&[3, 1])), (v(&[2, 2]), v(&[5, 2]))];
        let e = solve_effects("A", &f, &obs, false).unwrap();
        assert!(!e[0].determined);
        let e = solve_effects("A", &f, &obs, true).unwrap();
        assert!(e[0].determined);
    }
}
