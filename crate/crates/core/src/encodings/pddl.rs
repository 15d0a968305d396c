//! PDDL2.1 subset: typed STRIPS with negative preconditions, inequality and 0-ary linear fluents.

use super::EncodingError;
use crate::model::{
    ActionSchema, Atom, Comparator, DomainModel, FluentSignature, Goal, InstanceMeta, LinearAssignment,
    LinearCondition, Literal, Parameter, PredicateSignature, ProblemInstance, SymbolicState, Term,
};
use crate::num::{format_num, one, parse_num, zero, Num};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

fn num_text(v: &Num) -> String {
    let s = format_num(v);
    if s.contains('/') {
        format!("(/ {} {})", v.numer(), v.denom())
    } else {
        s
    }
}

fn linear_text(coeffs: &BTreeMap<String, Num>, constant: &Num) -> String {
    let mut parts: Vec<String> = coeffs
        .iter()
        .map(|(f, c)| if *c == one() { format!("({f})") } else { format!("(* {} ({f}))", num_text(c)) })
        .collect();
    if !constant.is_zero() || parts.is_empty() {
        parts.push(num_text(constant));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn condition_text(c: &LinearCondition) -> String {
    format!("({} {} {})", c.cmp.symbol(), linear_text(&c.coeffs, &zero()), num_text(&c.constant))
}

fn term_text(schema: &ActionSchema, t: &Term) -> String {
    match t {
        Term::Param(i) => schema.params[*i].name.clone(),
        Term::Const(c) => c.clone(),
    }
}

fn literal_text(schema: &ActionSchema, l: &Literal) -> String {
    let mut s = format!("({}", l.predicate);
    for a in &l.args {
        s.push(' ');
        s.push_str(&term_text(schema, a));
    }
    s.push(')');
    if l.positive {
        s
    } else {
        format!("(not {s})")
    }
}

fn effect_text(e: &LinearAssignment) -> String {
    match e.as_delta() {
        Some(d) if d.is_negative() => format!("(decrease ({}) {})", e.target, num_text(&-d)),
        Some(d) => format!("(increase ({}) {})", e.target, num_text(&d)),
        None => format!("(assign ({}) {})", e.target, linear_text(&e.coeffs, &e.constant)),
    }
}

fn typed_list(names: impl Iterator<Item = (String, String)>) -> String {
    names.map(|(n, t)| format!("{n} - {t}")).collect::<Vec<_>>().join(" ")
}

pub fn emit_pddl_domain(model: &DomainModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", model.name);
    let _ = writeln!(out, "  (:requirements :typing :fluents :negative-preconditions :equality)");
    let _ = writeln!(out, "  (:types {})", model.types.join(" "));
    let _ = writeln!(out, "  (:predicates");
    for p in &model.predicates {
        let params = typed_list(p.param_types.iter().enumerate().map(|(i, t)| (format!("?x{i}"), t.clone())));
        let sep = if params.is_empty() { "" } else { " " };
        let _ = writeln!(out, "    ({}{sep}{params})", p.name);
    }
    let _ = writeln!(out, "  )");
    let _ = writeln!(out, "  (:functions");
    for f in &model.fluents {
        let _ = writeln!(out, "    ({})", f.name);
    }
    let _ = writeln!(out, "  )");
    for s in &model.schemas {
        let _ = writeln!(out, "  (:action {}", s.name);
        let params = typed_list(s.params.iter().map(|p| (p.name.clone(), p.ty.clone())));
        let _ = writeln!(out, "    :parameters ({params})");
        let mut pre: Vec<String> = s.preconditions.iter().map(|l| literal_text(s, l)).collect();
        pre.extend(s.distinct.iter().map(|(a, b)| format!("(not (= {} {}))", s.params[*a].name, s.params[*b].name)));
        pre.extend(s.numeric_preconditions.iter().map(condition_text));
        let _ = writeln!(out, "    :precondition (and{})", prefixed(&pre));
        let mut eff: Vec<String> = s.del_effects.iter().map(|l| format!("(not {})", literal_text(s, l))).collect();
        eff.extend(s.add_effects.iter().map(|l| literal_text(s, l)));
        eff.extend(s.numeric_effects.iter().map(effect_text));
        let _ = writeln!(out, "    :effect (and{})", prefixed(&eff));
        let _ = writeln!(out, "  )");
    }
    out.push_str(")\n");
    out
}

fn prefixed(items: &[String]) -> String {
    items.iter().map(|s| format!(" {s}")).collect()
}

pub fn emit_pddl_problem(problem: &ProblemInstance, domain_name: &str) -> String {
    let mut out = String::new();
    let m = &problem.meta;
    let _ = writeln!(out, "; meta task={} size={} seed={}", m.task, m.size, m.seed);
    let _ = writeln!(out, "(define (problem {})", problem.name);
    let _ = writeln!(out, "  (:domain {domain_name})");
    let mut by_type: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (o, t) in &problem.objects {
        by_type.entry(t).or_default().push(o);
    }
    let _ = write!(out, "  (:objects");
    for (t, objs) in by_type {
        let _ = write!(out, " {} - {t}", objs.join(" "));
    }
    let _ = writeln!(out, ")");
    let _ = writeln!(out, "  (:init");
    for a in &problem.init.atoms {
        let _ = writeln!(out, "    {a}");
    }
    for (f, v) in &problem.init.fluents {
        let _ = writeln!(out, "    (= ({f}) {})", num_text(v));
    }
    let _ = writeln!(out, "  )");
    let mut goal: Vec<String> = problem.goal.atoms.iter().map(|a| a.to_string()).collect();
    goal.extend(problem.goal.conditions.iter().map(condition_text));
    let _ = writeln!(out, "  (:goal (and{}))", prefixed(&goal));
    out.push_str(")\n");
    out
}

#[derive(Clone, Debug)]
enum Sexp {
    Atom { text: String, line: usize, col: usize },
    List { items: Vec<Sexp>, line: usize, col: usize },
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom { line, col, .. } | Sexp::List { line, col, .. } => (*line, *col),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, EncodingError> {
        let (line, col) = self.pos();
        Err(EncodingError::Syntax { line, col, msg: msg.into() })
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            _ => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            _ => None,
        }
    }

    fn expect_list(&self, what: &str) -> Result<&[Sexp], EncodingError> {
        match self.list() {
            Some(l) => Ok(l),
            None => self.err(format!("expected {what}")),
        }
    }

    fn expect_atom(&self, what: &str) -> Result<&str, EncodingError> {
        match self.atom() {
            Some(a) => Ok(a),
            None => self.err(format!("expected {what}")),
        }
    }

    /// Head symbol of a list, lowercased.
    fn head(&self) -> Option<String> {
        self.list()?.first()?.atom().map(|s| s.to_ascii_lowercase())
    }
}

fn tokenize_and_parse(text: &str) -> Result<(Sexp, Vec<String>), EncodingError> {
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = Vec::new();
    let mut top: Option<Sexp> = None;
    let mut comments = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, msg: &str| EncodingError::Syntax { line, col, msg: msg.to_string() };
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ';' => {
                let start = i;
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                comments.push(chars[start + 1..i].iter().collect::<String>().trim().to_string());
                continue;
            }
            c if c.is_whitespace() => {}
            '(' => {
                if top.is_some() && stack.is_empty() {
                    return Err(syntax(line, col, "trailing content after top-level form"));
                }
                stack.push((Vec::new(), line, col));
            }
            ')' => {
                let (items, l, cc) = stack.pop().ok_or_else(|| syntax(line, col, "unbalanced `)`"))?;
                let node = Sexp::List { items, line: l, col: cc };
                match stack.last_mut() {
                    Some(parent) => parent.0.push(node),
                    None => top = Some(node),
                }
            }
            _ => {
                let (sl, sc) = (line, col);
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '(' | ')' | ';') {
                    i += 1;
                    col += 1;
                }
                let text: String = chars[start..i].iter().collect();
                match stack.last_mut() {
                    Some(parent) => parent.0.push(Sexp::Atom { text, line: sl, col: sc }),
                    None => return Err(syntax(sl, sc, "symbol outside of any form")),
                }
                continue;
            }
        }
        i += 1;
        col += 1;
    }
    if let Some((_, l, c)) = stack.last() {
        return Err(syntax(*l, *c, "unclosed `(`"));
    }
    top.map(|t| (t, comments)).ok_or_else(|| syntax(line, col, "empty input"))
}

/// Linear expression over 0-ary fluents.
#[derive(Default)]
struct Lin {
    coeffs: BTreeMap<String, Num>,
    constant: Num,
}

impl Lin {
    fn constant_only(&self) -> Option<Num> {
        self.coeffs.values().all(|c| c.is_zero()).then_some(self.constant)
    }

    fn scale(mut self, k: Num) -> Lin {
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }

    fn add(mut self, other: Lin) -> Lin {
        for (f, c) in other.coeffs {
            *self.coeffs.entry(f).or_insert_with(zero) += c;
        }
        self.constant += other.constant;
        self
    }

    fn nonzero(self) -> (BTreeMap<String, Num>, Num) {
        (self.coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect(), self.constant)
    }
}

fn parse_lin(e: &Sexp, fluents: &BTreeSet<String>) -> Result<Lin, EncodingError> {
    if let Some(t) = e.atom() {
        return match parse_num(t) {
            Some(v) => Ok(Lin { coeffs: BTreeMap::new(), constant: v }),
            None => e.err(format!("expected a number, found `{t}`")),
        };
    }
    let items = e.list().unwrap();
    let head = e.head().ok_or_else(|| EncodingError::Syntax { line: e.pos().0, col: e.pos().1, msg: "empty expression".into() })?;
    let args = &items[1..];
    match head.as_str() {
        "+" => args.iter().try_fold(Lin::default(), |acc, a| Ok(acc.add(parse_lin(a, fluents)?))),
        "-" => match args {
            [a] => Ok(parse_lin(a, fluents)?.scale(-one())),
            [a, b] => Ok(parse_lin(a, fluents)?.add(parse_lin(b, fluents)?.scale(-one()))),
            _ => e.err("`-` takes one or two arguments"),
        },
        "*" => {
            let [a, b] = args else { return e.err("`*` takes two arguments") };
            let (la, lb) = (parse_lin(a, fluents)?, parse_lin(b, fluents)?);
            match (la.constant_only(), lb.constant_only()) {
                (Some(k), _) => Ok(lb.scale(k)),
                (_, Some(k)) => Ok(la.scale(k)),
                _ => e.err("non-linear product of fluents is not supported"),
            }
        }
        "/" => {
            let [a, b] = args else { return e.err("`/` takes two arguments") };
            let la = parse_lin(a, fluents)?;
            match parse_lin(b, fluents)?.constant_only() {
                Some(k) if !k.is_zero() => Ok(la.scale(one() / k)),
                _ => e.err("division must be by a nonzero constant"),
            }
        }
        _ if args.is_empty() => {
            let name = items[0].atom().unwrap();
            if !fluents.is_empty() && !fluents.contains(name) {
                return e.err(format!("undeclared function `{name}`"));
            }
            Ok(Lin { coeffs: [(name.to_string(), one())].into_iter().collect(), constant: zero() })
        }
        _ => e.err(format!("unsupported numeric expression `{head}` (only 0-ary functions)")),
    }
}

fn comparator(s: &str) -> Option<Comparator> {
    Some(match s {
        "<=" => Comparator::Le,
        "<" => Comparator::Lt,
        "=" => Comparator::Eq,
        ">=" => Comparator::Ge,
        ">" => Comparator::Gt,
        _ => return None,
    })
}

fn parse_condition(e: &Sexp, cmp: Comparator, fluents: &BTreeSet<String>) -> Result<LinearCondition, EncodingError> {
    let items = e.list().unwrap();
    let [_, l, r] = items else { return e.err("comparison takes two arguments") };
    let diff = parse_lin(l, fluents)?.add(parse_lin(r, fluents)?.scale(-one()));
    let (coeffs, c) = diff.nonzero();
    Ok(LinearCondition { coeffs, cmp, constant: -c })
}

/// Splits `(and a b ...)` into its conjuncts; a single non-`and` form is one conjunct.
fn conjuncts(e: &Sexp) -> Result<&[Sexp], EncodingError> {
    let items = e.expect_list("a formula")?;
    if e.head().as_deref() == Some("and") {
        Ok(&items[1..])
    } else {
        Ok(std::slice::from_ref(e))
    }
}

fn parse_typed_list(items: &[Sexp]) -> Result<Vec<(String, String)>, EncodingError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let t = items[i].expect_atom("a name")?;
        if t == "-" {
            let ty = items.get(i + 1).ok_or_else(|| EncodingError::Syntax {
                line: items[i].pos().0,
                col: items[i].pos().1,
                msg: "`-` without a type".into(),
            })?;
            let ty = ty.expect_atom("a type name")?.to_string();
            out.extend(pending.drain(..).map(|n| (n, ty.clone())));
            i += 2;
        } else {
            pending.push(t.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|n| (n, "object".to_string())));
    Ok(out)
}

fn parse_term(e: &Sexp, params: &[Parameter]) -> Result<Term, EncodingError> {
    let t = e.expect_atom("a term")?;
    if t.starts_with('?') {
        match params.iter().position(|p| p.name == t) {
            Some(i) => Ok(Term::Param(i)),
            None => e.err(format!("unknown parameter `{t}`")),
        }
    } else {
        Ok(Term::Const(t.to_string()))
    }
}

fn parse_literal(e: &Sexp, params: &[Parameter], positive: bool) -> Result<Literal, EncodingError> {
    let items = e.expect_list("a literal")?;
    let pred = items.first().map(|h| h.expect_atom("a predicate")).transpose()?.unwrap_or_default();
    let args = items[1..].iter().map(|a| parse_term(a, params)).collect::<Result<_, _>>()?;
    Ok(Literal { predicate: pred.to_string(), args, positive })
}

fn parse_action(items: &[Sexp], fluents: &BTreeSet<String>, at: &Sexp) -> Result<ActionSchema, EncodingError> {
    let name = items.get(1).map(|n| n.expect_atom("an action name")).transpose()?;
    let Some(name) = name else { return at.err("action without a name") };
    let mut schema = ActionSchema { name: name.to_string(), ..Default::default() };
    let mut i = 2;
    while i < items.len() {
        let key = items[i].expect_atom("an action keyword")?.to_ascii_lowercase();
        let Some(val) = items.get(i + 1) else { return items[i].err("keyword without a value") };
        match key.as_str() {
            ":parameters" => {
                schema.params = parse_typed_list(val.expect_list("a parameter list")?)?
                    .into_iter()
                    .map(|(name, ty)| Parameter { name, ty })
                    .collect();
            }
            ":precondition" => {
                for c in conjuncts(val)? {
                    let head = c.head().unwrap_or_default();
                    if let Some(cmp) = comparator(&head).filter(|_| head != "=") {
                        schema.numeric_preconditions.push(parse_condition(c, cmp, fluents)?);
                        continue;
                    }
                    if head == "=" {
                        // `(= (f) k)` is numeric; `(= ?a ?b)` equality of objects is unsupported positively.
                        let l = c.list().unwrap();
                        if l.len() == 3 && l[1].atom().is_some() && l[2].atom().is_some() {
                            return c.err("positive object equality is not supported");
                        }
                        schema.numeric_preconditions.push(parse_condition(c, Comparator::Eq, fluents)?);
                        continue;
                    }
                    if head == "not" {
                        let inner = c.list().unwrap().get(1).ok_or_else(|| EncodingError::Syntax {
                            line: c.pos().0,
                            col: c.pos().1,
                            msg: "empty `not`".into(),
                        })?;
                        if inner.head().as_deref() == Some("=") {
                            let l = inner.list().unwrap();
                            let (Some(Term::Param(a)), Some(Term::Param(b))) = (
                                l.get(1).map(|x| parse_term(x, &schema.params)).transpose()?,
                                l.get(2).map(|x| parse_term(x, &schema.params)).transpose()?,
                            ) else {
                                return inner.err("inequality must relate two parameters");
                            };
                            schema.distinct.push((a, b));
                        } else {
                            schema.preconditions.push(parse_literal(inner, &schema.params, false)?);
                        }
                        continue;
                    }
                    schema.preconditions.push(parse_literal(c, &schema.params, true)?);
                }
            }
            ":effect" => {
                for c in conjuncts(val)? {
                    let head = c.head().unwrap_or_default();
                    let l = c.list().unwrap();
                    match head.as_str() {
                        "not" => {
                            let Some(inner) = l.get(1) else { return c.err("empty `not`") };
                            schema.del_effects.push(parse_literal(inner, &schema.params, true)?);
                        }
                        "increase" | "decrease" | "assign" => {
                            let [_, target, expr] = l else { return c.err("numeric effect takes two arguments") };
                            let t = target.expect_list("a function term")?;
                            let [tn] = t else { return target.err("only 0-ary functions are supported") };
                            let tname = tn.expect_atom("a function name")?.to_string();
                            if !fluents.is_empty() && !fluents.contains(&tname) {
                                return target.err(format!("undeclared function `{tname}`"));
                            }
                            let rhs = parse_lin(expr, fluents)?;
                            let e = match head.as_str() {
                                "assign" => {
                                    let (coeffs, k) = rhs.nonzero();
                                    LinearAssignment { target: tname, coeffs, constant: k }
                                }
                                op => {
                                    let Some(k) = rhs.constant_only() else {
                                        return expr.err("increase/decrease amount must be constant");
                                    };
                                    LinearAssignment::delta(&tname, if op == "increase" { k } else { -k })
                                }
                            };
                            schema.numeric_effects.push(e);
                        }
                        "when" | "forall" => return c.err(format!("unsupported effect `{head}`")),
                        _ => schema.add_effects.push(parse_literal(c, &schema.params, true)?),
                    }
                }
            }
            other => return items[i].err(format!("unsupported action keyword `{other}`")),
        }
        i += 2;
    }
    Ok(schema)
}

pub fn parse_pddl_domain(text: &str) -> Result<DomainModel, EncodingError> {
    let (top, _) = tokenize_and_parse(text)?;
    let items = top.expect_list("(define ...)")?;
    if top.head().as_deref() != Some("define") {
        return top.err("expected (define ...)");
    }
    let mut model = DomainModel::default();
    let mut fluents = BTreeSet::new();
    for sec in &items[1..] {
        let s = sec.expect_list("a domain section")?;
        let head = sec.head().unwrap_or_default();
        match head.as_str() {
            "domain" => model.name = s.get(1).map(|x| x.expect_atom("a name")).transpose()?.unwrap_or("").to_string(),
            ":requirements" => {
                for r in &s[1..] {
                    let r = r.expect_atom("a requirement")?;
                    let ok = [":typing", ":fluents", ":numeric-fluents", ":negative-preconditions", ":equality", ":strips"];
                    if !ok.contains(&r.to_ascii_lowercase().as_str()) {
                        return sec.err(format!("unsupported requirement `{r}`"));
                    }
                }
            }
            ":types" => {
                for (n, _) in parse_typed_list(&s[1..])? {
                    model.types.push(n);
                }
            }
            ":predicates" => {
                for p in &s[1..] {
                    let pl = p.expect_list("a predicate declaration")?;
                    let name = pl.first().map(|x| x.expect_atom("a predicate name")).transpose()?;
                    let Some(name) = name else { return p.err("empty predicate declaration") };
                    let param_types = parse_typed_list(&pl[1..])?.into_iter().map(|(_, t)| t).collect();
                    model.predicates.push(PredicateSignature { name: name.to_string(), param_types });
                }
            }
            ":functions" => {
                for f in &s[1..] {
                    if f.atom() == Some("-") || f.atom() == Some("number") {
                        continue;
                    }
                    let fl = f.expect_list("a function declaration")?;
                    let name = fl.first().map(|x| x.expect_atom("a function name")).transpose()?;
                    let Some(name) = name else { return f.err("empty function declaration") };
                    if fl.len() > 1 {
                        return f.err("only 0-ary functions are supported");
                    }
                    fluents.insert(name.to_string());
                    model.fluents.push(FluentSignature { name: name.to_string(), param_types: vec![] });
                }
            }
            ":action" => model.schemas.push(parse_action(s, &fluents, sec)?),
            other => return sec.err(format!("unsupported domain section `{other}`")),
        }
    }
    Ok(model)
}

pub fn parse_pddl_problem(text: &str) -> Result<ProblemInstance, EncodingError> {
    let (top, comments) = tokenize_and_parse(text)?;
    let items = top.expect_list("(define ...)")?;
    if top.head().as_deref() != Some("define") {
        return top.err("expected (define ...)");
    }
    let mut p = ProblemInstance::default();
    for c in comments {
        if let Some(rest) = c.strip_prefix("meta") {
            let mut meta = InstanceMeta::default();
            for kv in rest.split_whitespace() {
                match kv.split_once('=') {
                    Some(("task", v)) => meta.task = v.to_string(),
                    Some(("size", v)) => meta.size = v.parse().unwrap_or(0),
                    Some(("seed", v)) => meta.seed = v.parse().unwrap_or(0),
                    _ => {}
                }
            }
            p.meta = meta;
        }
    }
    let none = BTreeSet::new();
    let mut state = SymbolicState::default();
    for sec in &items[1..] {
        let s = sec.expect_list("a problem section")?;
        match sec.head().unwrap_or_default().as_str() {
            "problem" => p.name = s.get(1).map(|x| x.expect_atom("a name")).transpose()?.unwrap_or("").to_string(),
            ":domain" => {}
            ":objects" => p.objects = parse_typed_list(&s[1..])?,
            ":init" => {
                for f in &s[1..] {
                    let fl = f.expect_list("an init fact")?;
                    if f.head().as_deref() == Some("=") {
                        let [_, target, value] = fl else { return f.err("`=` takes two arguments") };
                        let t = target.expect_list("a function term")?;
                        let [tn] = t else { return target.err("only 0-ary functions are supported") };
                        let v = parse_lin(value, &none)?.constant_only();
                        let Some(v) = v else { return value.err("initial value must be a constant") };
                        state.fluents.insert(tn.expect_atom("a function name")?.to_string(), v);
                    } else {
                        let args: Vec<&str> = fl.iter().map(|x| x.expect_atom("a symbol")).collect::<Result<_, _>>()?;
                        let Some((pred, rest)) = args.split_first() else { return f.err("empty fact") };
                        state.atoms.insert(Atom::new(pred, rest));
                    }
                }
            }
            ":goal" => {
                let goal_expr = s.get(1).ok_or_else(|| EncodingError::Syntax {
                    line: sec.pos().0,
                    col: sec.pos().1,
                    msg: "empty goal".into(),
                })?;
                let mut goal = Goal::default();
                for c in conjuncts(goal_expr)? {
                    let head = c.head().unwrap_or_default();
                    match comparator(&head) {
                        Some(cmp) => goal.conditions.push(parse_condition(c, cmp, &none)?),
                        None if head == "not" => return c.err("negative goals are not supported"),
                        None => {
                            let fl = c.list().unwrap();
                            let args: Vec<&str> =
                                fl.iter().map(|x| x.expect_atom("a symbol")).collect::<Result<_, _>>()?;
                            goal.atoms.push(Atom::new(args[0], &args[1..]));
                        }
                    }
                }
                p.goal = goal;
            }
            other => return sec.err(format!("unsupported problem section `{other}`")),
        }
    }
    p.objects.sort();
    p.init = state;
    Ok(p)
}
