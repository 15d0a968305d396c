use super::*;

/// All type-correct bindings of every schema, ordered by schema name and then
/// lexicographically by binding.
pub fn ground(model: &DomainModel, objects: &[(String, String)]) -> Result<Vec<GroundedAction>, ModelError> {
    for (o, t) in objects {
        if !model.types.iter().any(|x| x == t) {
            return Err(ModelError::Undeclared { kind: "type", name: format!("{t} (object {o})") });
        }
    }
    let mut schemas: Vec<&ActionSchema> = model.schemas.iter().collect();
    schemas.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = Vec::new();
    for s in schemas {
        out.extend(ground_schema(s, objects));
    }
    Ok(out)
}

/// Bindings of one schema respecting parameter types and declared inequalities.
pub fn ground_schema(schema: &ActionSchema, objects: &[(String, String)]) -> Vec<GroundedAction> {
    let mut domains: Vec<Vec<&str>> = schema
        .params
        .iter()
        .map(|p| objects.iter().filter(|(_, t)| *t == p.ty).map(|(o, _)| o.as_str()).collect())
        .collect();
    for d in &mut domains {
        d.sort_unstable();
    }
    let mut out = Vec::new();
    let mut binding: Vec<&str> = Vec::with_capacity(schema.params.len());
    fn rec<'a>(
        schema: &ActionSchema,
        domains: &[Vec<&'a str>],
        binding: &mut Vec<&'a str>,
        out: &mut Vec<GroundedAction>,
    ) {
        let k = binding.len();
        if k == domains.len() {
            out.push(GroundedAction {
                name: schema.name.clone(),
                args: binding.iter().map(|s| s.to_string()).collect(),
            });
            return;
        }
        for &o in &domains[k] {
            let clash = schema
                .distinct
                .iter()
                .any(|&(a, b)| (b == k && a < k && binding[a] == o) || (a == k && b < k && binding[b] == o));
            if clash {
                continue;
            }
            binding.push(o);
            rec(schema, domains, binding, out);
            binding.pop();
        }
    }
    rec(schema, &domains, &mut binding, &mut out);
    out
}

fn bound_schema<'m>(model: &'m DomainModel, action: &GroundedAction) -> Result<&'m ActionSchema, ModelError> {
    let schema = model
        .schema(&action.name)
        .ok_or_else(|| ModelError::Undeclared { kind: "action", name: action.name.clone() })?;
    if schema.params.len() != action.args.len() {
        return Err(ModelError::Arity {
            name: action.name.clone(),
            expected: schema.params.len(),
            got: action.args.len(),
        });
    }
    Ok(schema)
}

pub fn applicable(state: &SymbolicState, action: &GroundedAction, model: &DomainModel) -> Result<bool, ModelError> {
    let schema = bound_schema(model, action)?;
    Ok(schema_applicable(schema, state, &action.args))
}

pub(crate) fn schema_applicable(schema: &ActionSchema, state: &SymbolicState, binding: &[String]) -> bool {
    if schema.distinct.iter().any(|&(a, b)| binding[a] == binding[b]) {
        return false;
    }
    schema.preconditions.iter().all(|l| state.holds(&l.ground(binding)) == l.positive)
        && schema.numeric_preconditions.iter().all(|c| c.holds(&state.fluents))
}

pub fn apply(state: &SymbolicState, action: &GroundedAction, model: &DomainModel) -> Result<SymbolicState, ModelError> {
    let schema = bound_schema(model, action)?;
    if !schema_applicable(schema, state, &action.args) {
        return Err(ModelError::NotApplicable(action.to_string()));
    }
    Ok(schema_apply(schema, state, &action.args))
}

pub(crate) fn schema_apply(schema: &ActionSchema, state: &SymbolicState, binding: &[String]) -> SymbolicState {
    let mut next = state.clone();
    for l in &schema.del_effects {
        next.atoms.remove(&l.ground(binding));
    }
    for l in &schema.add_effects {
        next.atoms.insert(l.ground(binding));
    }
    // Simultaneous update: every right-hand side reads the pre-state.
    for e in &schema.numeric_effects {
        if let Some(v) = e.eval(&state.fluents) {
            next.fluents.insert(e.target.clone(), v);
        }
    }
    next
}

pub fn satisfies(state: &SymbolicState, goal: &Goal) -> bool {
    goal.atoms.iter().all(|a| state.holds(a)) && goal.conditions.iter().all(|c| c.holds(&state.fluents))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanFailure {
    /// Unknown action, wrong arity or a binding that violates parameter types.
    BadAction,
    Applicability,
    Goal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanValidation {
    Valid,
    Invalid { index: usize, reason: PlanFailure },
}

impl PlanValidation {
    pub fn is_valid(&self) -> bool {
        matches!(self, PlanValidation::Valid)
    }
}

/// Executes `plan` from the initial state; for the goal failure the index is the plan length.
pub fn validate_plan(model: &DomainModel, problem: &ProblemInstance, plan: &Plan) -> PlanValidation {
    let mut state = problem.init.clone();
    for (i, a) in plan.0.iter().enumerate() {
        let schema = match bound_schema(model, a) {
            Ok(s) => s,
            Err(_) => return PlanValidation::Invalid { index: i, reason: PlanFailure::BadAction },
        };
        let typed = schema
            .params
            .iter()
            .zip(&a.args)
            .all(|(p, o)| problem.object_type(o) == Some(p.ty.as_str()));
        if !typed {
            return PlanValidation::Invalid { index: i, reason: PlanFailure::BadAction };
        }
        if !schema_applicable(schema, &state, &a.args) {
            return PlanValidation::Invalid { index: i, reason: PlanFailure::Applicability };
        }
        state = schema_apply(schema, &state, &a.args);
    }
    if satisfies(&state, &problem.goal) {
        PlanValidation::Valid
    } else {
        PlanValidation::Invalid { index: plan.len(), reason: PlanFailure::Goal }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    fn swap_model() -> DomainModel {
        let mut swap = ActionSchema::new("swap", &[]);
        swap.numeric_effects = vec![
            LinearAssignment::new("x", [("y".to_string(), int(1))], int(0)),
            LinearAssignment::new("y", [("x".to_string(), int(1))], int(0)),
        ];
        let mut noop = ActionSchema::new("noop", &[]);
        noop.numeric_preconditions = vec![];
        DomainModel {
            name: "swap".into(),
            types: vec!["obj".into()],
            predicates: vec![],
            fluents: vec![
                FluentSignature { name: "x".into(), param_types: vec![] },
                FluentSignature { name: "y".into(), param_types: vec![] },
            ],
            schemas: vec![swap, noop],
        }
    }

    fn xy(x: i64, y: i64) -> SymbolicState {
        SymbolicState {
            atoms: Default::default(),
            fluents: [("x".to_string(), int(x)), ("y".to_string(), int(y))].into_iter().collect(),
        }
    }

    #[test]
    fn numeric_effects_are_simultaneous() {
        let m = swap_model();
        let s = apply(&xy(1, 2), &GroundedAction::new("swap", &[]), &m).unwrap();
        assert_eq!(s, xy(2, 1));
    }

    #[test]
    fn empty_schema_is_identity_and_always_applicable() {
        let m = swap_model();
        let a = GroundedAction::new("noop", &[]);
        assert!(applicable(&xy(5, -3), &a, &m).unwrap());
        assert_eq!(apply(&xy(5, -3), &a, &m).unwrap(), xy(5, -3));
    }

    #[test]
    fn zero_parameter_schema_grounds_once() {
        let m = swap_model();
        let g = ground(&m, &[("o1".into(), "obj".into())]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].name, "noop");
    }

    #[test]
    fn missing_objects_yield_no_groundings() {
        let mut m = swap_model();
        m.schemas.push(ActionSchema::new("pick", &[("?o", "obj")]));
        assert_eq!(ground(&m, &[]).unwrap().len(), 2);
        assert!(matches!(
            ground(&m, &[("b".into(), "block".into())]),
            Err(ModelError::Undeclared { .. })
        ));
    }

    #[test]
    fn empty_goal_and_unknown_action() {
        let m = swap_model();
        assert!(satisfies(&xy(0, 0), &Goal::default()));
        assert!(applicable(&xy(0, 0), &GroundedAction::new("fly", &[]), &m).is_err());
        let p = ProblemInstance { init: xy(0, 0), ..Default::default() };
        assert_eq!(validate_plan(&m, &p, &Plan::default()), PlanValidation::Valid);
    }

    #[test]
    fn inequality_prunes_self_binding() {
        let s = ActionSchema::new("mv", &[("?a", "obj"), ("?b", "obj")]).all_distinct();
        let objs: Vec<(String, String)> = ["o1", "o2", "o3"].iter().map(|o| (o.to_string(), "obj".into())).collect();
        assert_eq!(ground_schema(&s, &objs).len(), 6);
        let s2 = ActionSchema::new("mv", &[("?a", "obj"), ("?b", "obj")]);
        assert_eq!(ground_schema(&s2, &objs).len(), 9);
    }
}
