use crate::encodings::{emit_pddl_domain, emit_pddl_problem};
use crate::model::{validate_plan, DomainModel, GroundedAction, Plan, PlanValidation, ProblemInstance};
use std::io::Read;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExternalError {
    #[error("could not start planner: {0}")]
    Spawn(String),
    #[error("planner exceeded {0:?}")]
    Timeout(Duration),
    #[error("planner exited with status {code:?}: {stderr}")]
    Exit { code: Option<i32>, stderr: String },
    #[error("could not parse planner output: {0}")]
    Unparsable(String),
    #[error("planner returned an invalid plan: {0:?}")]
    Invalid(PlanValidation),
}

/// Reads `step: (ACTION arg ...)` lines; names are matched case-insensitively against
/// the model's schemas and the problem's objects.
pub fn parse_plan_output(text: &str, model: &DomainModel, problem: &ProblemInstance) -> Result<Plan, ExternalError> {
    let mut actions = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        let Some((head, rest)) = line.split_once(':') else { continue };
        let head = head.trim().trim_start_matches(|c: char| c.is_alphabetic() || c.is_whitespace());
        if head.is_empty() || !head.chars().all(|c| c.is_ascii_digit() || c == '.') {
            continue;
        }
        let rest = rest.trim();
        let Some(inner) = rest.strip_prefix('(').and_then(|r| r.split_once(')')).map(|(i, _)| i) else {
            return Err(ExternalError::Unparsable(line.to_string()));
        };
        let mut parts = inner.split_whitespace();
        let name = parts.next().ok_or_else(|| ExternalError::Unparsable(line.to_string()))?;
        let schema = model
            .schemas
            .iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| ExternalError::Unparsable(format!("unknown action `{name}`")))?;
        let args = parts
            .map(|a| {
                problem
                    .objects
                    .iter()
                    .find(|(o, _)| o.eq_ignore_ascii_case(a))
                    .map(|(o, _)| o.clone())
                    .ok_or_else(|| ExternalError::Unparsable(format!("unknown object `{a}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        actions.push(GroundedAction { name: schema.name.clone(), args });
    }
    Ok(Plan(actions))
}

/// Runs `template` (with `{domain}` and `{problem}` substituted) through `sh -c`, then
/// parses and validates its plan. Output is never trusted without validation.
pub fn external_plan(
    template: &str,
    model: &DomainModel,
    problem: &ProblemInstance,
    timeout: Duration,
) -> Result<Plan, ExternalError> {
    let dir = tempfile::tempdir().map_err(|e| ExternalError::Spawn(e.to_string()))?;
    let domain_path = dir.path().join("domain.pddl");
    let problem_path = dir.path().join("problem.pddl");
    let write = |p: &std::path::Path, text: String| std::fs::write(p, text).map_err(|e| ExternalError::Spawn(e.to_string()));
    write(&domain_path, emit_pddl_domain(model))?;
    write(&problem_path, emit_pddl_problem(problem, &model.name))?;
    let cmd = template
        .replace("{domain}", &domain_path.display().to_string())
        .replace("{problem}", &problem_path.display().to_string());
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| ExternalError::Spawn(e.to_string()))?;
    let mut stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let out_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(st)) => break st,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(ExternalError::Timeout(timeout));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(ExternalError::Spawn(e.to_string())),
        }
    };
    let out = out_reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(ExternalError::Exit { code: status.code(), stderr: err });
    }
    let plan = parse_plan_output(&out, model, problem)?;
    match validate_plan(model, problem, &plan) {
        PlanValidation::Valid => Ok(plan),
        v => Err(ExternalError::Invalid(v)),
    }
}
