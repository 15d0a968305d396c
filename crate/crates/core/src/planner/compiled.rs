//! Grounded, indexed form of a (model, problem) pair for fast successor generation.

use crate::model::{ActionSchema, Atom, Comparator, DomainModel, GroundedAction, ProblemInstance, SymbolicState, Term};
use crate::num::Num;
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct PackedState {
    pub bits: Vec<u64>,
    pub fluents: Vec<Num>,
}

impl PackedState {
    #[inline]
    pub fn has(&self, atom: u32) -> bool {
        self.bits[(atom / 64) as usize] >> (atom % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, atom: u32, on: bool) {
        let w = &mut self.bits[(atom / 64) as usize];
        if on {
            *w |= 1 << (atom % 64);
        } else {
            *w &= !(1 << (atom % 64));
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct NumCond {
    terms: Vec<(usize, Num)>,
    cmp: Comparator,
    constant: Num,
}

impl NumCond {
    fn holds(&self, f: &[Num]) -> bool {
        let lhs = self.terms.iter().fold(Num::from_integer(0), |acc, (i, c)| acc + *c * f[*i]);
        self.cmp.holds(lhs, self.constant)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct NumEffect {
    target: usize,
    terms: Vec<(usize, Num)>,
    constant: Num,
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledSchema {
    pub name: String,
    /// `None` when the schema references fluents the problem does not define.
    pre: Option<Vec<NumCond>>,
    effects: Vec<NumEffect>,
    pub has_numeric_effects: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Op {
    pub schema: usize,
    pub args: Vec<String>,
    pre_pos: Vec<u32>,
    pre_neg: Vec<u32>,
    add: Vec<u32>,
    del: Vec<u32>,
}

pub(crate) struct CompiledTask {
    pub schemas: Vec<CompiledSchema>,
    pub ops: Vec<Op>,
    /// Ops indexed by one positive dynamic precondition atom.
    keyed: Vec<Vec<u32>>,
    unkeyed: Vec<u32>,
    atoms: Vec<Atom>,
    static_atoms: BTreeSet<Atom>,
    fluent_names: Vec<String>,
    pub init: PackedState,
    goal_atoms: Vec<Option<u32>>,
    pub goal_conds: Vec<NumCond>,
    /// Per goal condition: best per-action progress towards satisfying it.
    goal_progress: Vec<Option<Num>>,
}

fn compile_terms(coeffs: &BTreeMap<String, Num>, index: &HashMap<&str, usize>) -> Option<Vec<(usize, Num)>> {
    coeffs.iter().map(|(f, c)| index.get(f.as_str()).map(|i| (*i, *c))).collect()
}

impl CompiledTask {
    pub fn new(model: &DomainModel, problem: &ProblemInstance) -> CompiledTask {
        let dynamic: HashSet<&str> = model
            .schemas
            .iter()
            .flat_map(|s| s.add_effects.iter().chain(&s.del_effects))
            .map(|l| l.predicate.as_str())
            .collect();
        let static_atoms: BTreeSet<Atom> =
            problem.init.atoms.iter().filter(|a| !dynamic.contains(a.predicate.as_str())).cloned().collect();

        let mut fluent_names: Vec<String> = problem.init.fluents.keys().cloned().collect();
        fluent_names.sort();
        let findex: HashMap<&str, usize> = fluent_names.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();

        let mut schemas_sorted: Vec<&ActionSchema> = model.schemas.iter().collect();
        schemas_sorted.sort_by(|a, b| a.name.cmp(&b.name));

        let schemas: Vec<CompiledSchema> = schemas_sorted
            .iter()
            .map(|s| {
                let pre: Option<Vec<NumCond>> = s
                    .numeric_preconditions
                    .iter()
                    .map(|c| {
                        Some(NumCond { terms: compile_terms(&c.coeffs, &findex)?, cmp: c.cmp, constant: c.constant })
                    })
                    .collect();
                let effects: Option<Vec<NumEffect>> = s
                    .numeric_effects
                    .iter()
                    .map(|e| {
                        Some(NumEffect {
                            target: *findex.get(e.target.as_str())?,
                            terms: compile_terms(&e.coeffs, &findex)?,
                            constant: e.constant,
                        })
                    })
                    .collect();
                let ok = pre.is_some() && effects.is_some();
                CompiledSchema {
                    name: s.name.clone(),
                    pre: if ok { pre } else { None },
                    effects: effects.unwrap_or_default(),
                    has_numeric_effects: !s.numeric_effects.is_empty(),
                }
            })
            .collect();

        // Count of true init atoms per predicate, used to pick selective index keys.
        let mut pred_count: HashMap<&str, usize> = HashMap::new();
        for a in &problem.init.atoms {
            *pred_count.entry(a.predicate.as_str()).or_default() += 1;
        }

        let mut atom_ids: HashMap<Atom, u32> = HashMap::new();
        let mut atoms: Vec<Atom> = Vec::new();
        let mut intern = |a: Atom, atoms: &mut Vec<Atom>| -> u32 {
            *atom_ids.entry(a).or_insert_with_key(|k| {
                atoms.push(k.clone());
                (atoms.len() - 1) as u32
            })
        };
        for a in &problem.init.atoms {
            if dynamic.contains(a.predicate.as_str()) {
                intern(a.clone(), &mut atoms);
            }
        }

        let mut ops = Vec::new();
        let mut key_of: Vec<Option<u32>> = Vec::new();
        for (si, s) in schemas_sorted.iter().enumerate() {
            if schemas[si].pre.is_none() {
                continue;
            }
            for args in bind_static(s, problem, &dynamic, &static_atoms) {
                let mut op = Op { schema: si, args, pre_pos: vec![], pre_neg: vec![], add: vec![], del: vec![] };
                let mut key: Option<(usize, u32)> = None;
                for l in &s.preconditions {
                    if !dynamic.contains(l.predicate.as_str()) {
                        continue;
                    }
                    let id = intern(l.ground(&op.args), &mut atoms);
                    if l.positive {
                        op.pre_pos.push(id);
                        let c = pred_count.get(l.predicate.as_str()).copied().unwrap_or(0);
                        if key.map_or(true, |(kc, _)| c < kc) {
                            key = Some((c, id));
                        }
                    } else {
                        op.pre_neg.push(id);
                    }
                }
                op.add = s.add_effects.iter().map(|l| intern(l.ground(&op.args), &mut atoms)).collect();
                op.del = s.del_effects.iter().map(|l| intern(l.ground(&op.args), &mut atoms)).collect();
                key_of.push(key.map(|k| k.1));
                ops.push(op);
            }
        }
        // Crafting/numeric ops come before purely propositional ones within each bucket.
        let rank = |o: &Op| u8::from(!schemas[o.schema].has_numeric_effects);
        let mut order: Vec<u32> = (0..ops.len() as u32).collect();
        order.sort_by_key(|&i| (rank(&ops[i as usize]), i));
        let mut keyed = vec![Vec::new(); atoms.len()];
        let mut unkeyed = Vec::new();
        for i in order {
            match key_of[i as usize] {
                Some(k) => keyed[k as usize].push(i),
                None => unkeyed.push(i),
            }
        }

        let words = atoms.len().div_ceil(64).max(1);
        let mut init = PackedState {
            bits: vec![0; words],
            fluents: fluent_names.iter().map(|f| problem.init.fluents[f]).collect(),
        };
        for a in &problem.init.atoms {
            if let Some(&id) = atom_ids.get(a) {
                init.set(id, true);
            }
        }
        let goal_atoms = problem
            .goal
            .atoms
            .iter()
            .map(|a| if static_atoms.contains(a) { None } else { atom_ids.get(a).copied().or(Some(u32::MAX)) })
            .collect();
        let goal_conds: Vec<NumCond> = problem
            .goal
            .conditions
            .iter()
            .map(|c| match compile_terms(&c.coeffs, &findex) {
                Some(terms) => NumCond { terms, cmp: c.cmp, constant: c.constant },
                // Unknown fluent: unsatisfiable condition.
                None => NumCond { terms: vec![], cmp: Comparator::Lt, constant: Num::from_integer(-1) },
            })
            .collect();
        let goal_progress = goal_conds.iter().map(|g| best_progress(g, &schemas)).collect();
        CompiledTask {
            schemas,
            ops,
            keyed,
            unkeyed,
            atoms,
            static_atoms,
            fluent_names,
            init,
            goal_atoms,
            goal_conds,
            goal_progress,
        }
    }

    pub fn is_goal(&self, s: &PackedState) -> bool {
        self.goal_atoms.iter().all(|g| match g {
            None => true,
            Some(id) => *id != u32::MAX && s.has(*id),
        }) && self.goal_conds.iter().all(|c| c.holds(&s.fluents))
    }

    /// Unsatisfied goal atoms plus, per unsatisfied numeric goal, the number of best-case
    /// actions needed to close its gap (1 when no action makes constant progress).
    pub fn heuristic(&self, s: &PackedState) -> u64 {
        let mut h = self
            .goal_atoms
            .iter()
            .filter(|g| matches!(g, Some(id) if *id == u32::MAX || !s.has(*id)))
            .count() as u64;
        for (c, p) in self.goal_conds.iter().zip(&self.goal_progress) {
            if c.holds(&s.fluents) {
                continue;
            }
            let lhs = c.terms.iter().fold(Num::from_integer(0), |acc, (i, k)| acc + *k * s.fluents[*i]);
            let gap = (c.constant - lhs).abs();
            h += match p {
                Some(p) if c.cmp != Comparator::Eq => {
                    let steps = (gap / *p).ceil().to_integer().max(1);
                    steps.min(1 << 20) as u64
                }
                _ => 1,
            };
        }
        h
    }

    /// Applicable ops in deterministic order: keyed buckets by atom id, then unkeyed.
    pub fn applicable_ops(&self, s: &PackedState, out: &mut Vec<u32>) {
        out.clear();
        let num_ok: Vec<bool> = self
            .schemas
            .iter()
            .map(|sc| sc.pre.as_ref().is_some_and(|p| p.iter().all(|c| c.holds(&s.fluents))))
            .collect();
        let check = |i: u32| {
            let op = &self.ops[i as usize];
            num_ok[op.schema] && op.pre_pos.iter().all(|a| s.has(*a)) && op.pre_neg.iter().all(|a| !s.has(*a))
        };
        let mut numeric = Vec::new();
        let mut plain = Vec::new();
        for (w, word) in s.bits.iter().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                let atom = w * 64 + b as usize;
                if atom >= self.keyed.len() {
                    break;
                }
                for &i in &self.keyed[atom] {
                    if check(i) {
                        if self.schemas[self.ops[i as usize].schema].has_numeric_effects {
                            numeric.push(i);
                        } else {
                            plain.push(i);
                        }
                    }
                }
            }
        }
        for &i in &self.unkeyed {
            if check(i) {
                if self.schemas[self.ops[i as usize].schema].has_numeric_effects {
                    numeric.push(i);
                } else {
                    plain.push(i);
                }
            }
        }
        out.extend(numeric);
        out.extend(plain);
    }

    pub fn apply(&self, s: &PackedState, op: u32) -> PackedState {
        let op = &self.ops[op as usize];
        let mut next = s.clone();
        for a in &op.del {
            next.set(*a, false);
        }
        for a in &op.add {
            next.set(*a, true);
        }
        for e in &self.schemas[op.schema].effects {
            let v = e.terms.iter().fold(e.constant, |acc, (i, c)| acc + *c * s.fluents[*i]);
            next.fluents[e.target] = v;
        }
        next
    }

    pub fn grounded(&self, op: u32) -> GroundedAction {
        let op = &self.ops[op as usize];
        GroundedAction { name: self.schemas[op.schema].name.clone(), args: op.args.clone() }
    }

    pub fn unpack(&self, s: &PackedState) -> SymbolicState {
        let mut atoms = self.static_atoms.clone();
        for (i, a) in self.atoms.iter().enumerate() {
            if s.has(i as u32) {
                atoms.insert(a.clone());
            }
        }
        SymbolicState {
            atoms,
            fluents: self.fluent_names.iter().cloned().zip(s.fluents.iter().copied()).collect(),
        }
    }

    /// Packs a symbolic state; `None` when it holds dynamic atoms unknown to the task.
    pub fn pack(&self, s: &SymbolicState) -> Option<PackedState> {
        let mut p = PackedState { bits: vec![0; self.init.bits.len()], fluents: Vec::new() };
        let ids: HashMap<&Atom, u32> = self.atoms.iter().enumerate().map(|(i, a)| (a, i as u32)).collect();
        for a in &s.atoms {
            match ids.get(a) {
                Some(&i) => p.set(i, true),
                None if self.static_atoms.contains(a) => {}
                None => return None,
            }
        }
        if s.atoms.iter().filter(|a| self.static_atoms.contains(*a)).count() != self.static_atoms.len() {
            return None;
        }
        if s.fluents.len() != self.fluent_names.len() {
            return None;
        }
        p.fluents = self.fluent_names.iter().map(|f| s.fluents.get(f).copied()).collect::<Option<_>>()?;
        Some(p)
    }
}

fn best_progress(goal: &NumCond, schemas: &[CompiledSchema]) -> Option<Num> {
    let sign = match goal.cmp {
        Comparator::Ge | Comparator::Gt => Num::from_integer(1),
        Comparator::Le | Comparator::Lt => Num::from_integer(-1),
        Comparator::Eq => return None,
    };
    let mut best: Option<Num> = None;
    for s in schemas.iter().filter(|s| s.pre.is_some()) {
        let mut progress = Num::from_integer(0);
        for (f, c) in &goal.terms {
            let Some(e) = s.effects.iter().find(|e| e.target == *f) else { continue };
            // Only constant increments have a state-independent progress.
            match e.terms.as_slice() {
                [(t, one)] if *t == *f && *one == Num::from_integer(1) => progress += *c * e.constant,
                _ => return None,
            }
        }
        let p = progress * sign;
        if p > Num::from_integer(0) && best.map_or(true, |b| p > b) {
            best = Some(p);
        }
    }
    best
}

/// Type-correct bindings consistent with declared inequalities and static preconditions.
fn bind_static(
    s: &ActionSchema,
    problem: &ProblemInstance,
    dynamic: &HashSet<&str>,
    static_atoms: &BTreeSet<Atom>,
) -> Vec<Vec<String>> {
    let domains: Vec<Vec<&str>> = s
        .params
        .iter()
        .map(|p| {
            let mut d: Vec<&str> = problem.objects_of(&p.ty).collect();
            d.sort_unstable();
            d
        })
        .collect();
    // Static literals checked as soon as their last parameter is bound.
    let mut checks: Vec<Vec<&crate::model::Literal>> = vec![Vec::new(); s.params.len().max(1)];
    let mut ground_static = Vec::new();
    for l in &s.preconditions {
        if dynamic.contains(l.predicate.as_str()) {
            continue;
        }
        let last = l.args.iter().filter_map(|t| if let Term::Param(i) = t { Some(*i) } else { None }).max();
        match last {
            Some(k) => checks[k].push(l),
            None => ground_static.push(l),
        }
    }
    if ground_static.iter().any(|l| static_atoms.contains(&l.ground(&[])) != l.positive) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut binding: Vec<String> = Vec::with_capacity(s.params.len());
    fn rec(
        s: &ActionSchema,
        domains: &[Vec<&str>],
        checks: &[Vec<&crate::model::Literal>],
        static_atoms: &BTreeSet<Atom>,
        binding: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
    ) {
        let k = binding.len();
        if k == domains.len() {
            out.push(binding.clone());
            return;
        }
        for &o in &domains[k] {
            if s.distinct.iter().any(|&(a, b)| (b == k && a < k && binding[a] == o) || (a == k && b < k && binding[b] == o))
            {
                continue;
            }
            binding.push(o.to_string());
            if checks[k].iter().all(|l| static_atoms.contains(&l.ground(binding)) == l.positive) {
                rec(s, domains, checks, static_atoms, binding, out);
            }
            binding.pop();
        }
    }
    rec(s, &domains, &checks, static_atoms, &mut binding, &mut out);
    out
}
