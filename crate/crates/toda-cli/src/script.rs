//! The derivation-script layer: a line-oriented language that replays
//! bracket computations step by step.
//!
//! Grammar (one statement per line, `#` comments, no control flow):
//!
//! ```text
//! let NAME = term CHAIN-SUM
//! let NAME = matrix [ ... ]
//! let NAME = spec { [row] ; [matrix] ; [column] }_n
//! let NAME = reduce SPEC [expect SPEC-LITERAL extras 0]
//! assert-zero CHAIN-SUM
//! assert-equal CHAIN-SUM = CHAIN-SUM
//! compute wellformed SPEC [expect pass]
//! compute ind SPEC [EXPECT]
//! compute ind-full SPEC [EXPECT]
//! compute compare SPEC [expect strict]
//! compute hformula SPEC [expect coset CHAIN ind 0]
//! compute hvia SPEC from SPEC [expect coset CHAIN ind 0]
//! compute corner SPEC case K [expect ind-preserved]
//! echo TEXT
//! ```
//!
//! where `EXPECT` is `expect order K`, `expect 0`, or
//! `expect span CHAIN[, CHAIN...]`. Names are single-assignment and must be
//! bound before use.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use toda::bracket::{
    check_well_defined, compare_indeterminacy_routes, corner_rewrite, indeterminacy,
    indeterminacy_full_traced, parse_spec, reduce_to_plain, BracketSpec, CornerCase, Coset,
    Subgroup,
};
use toda::db::Database;
use toda::ehp::{h_formula, h_via_member};
use toda::error::{Error, Result};
use toda::normalize::{Normalizer, Trace};
use toda::term::{parse_sum, Term};
use toda::wedge::parse_matrix_grid;

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    LetTerm {
        name: String,
        expr: String,
    },
    LetMatrix {
        name: String,
        expr: String,
    },
    LetSpec {
        name: String,
        expr: String,
    },
    LetReduce {
        name: String,
        spec: String,
        expect: Option<(String, bool)>,
    },
    AssertZero {
        expr: String,
    },
    AssertEqual {
        lhs: String,
        rhs: String,
    },
    Compute {
        kind: ComputeKind,
        expect: Option<Expectation>,
    },
    Echo {
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComputeKind {
    WellFormed { spec: String },
    Ind { spec: String },
    IndFull { spec: String },
    CompareRoutes { spec: String },
    HFormula { spec: String },
    HVia { spec: String, from: String },
    Corner { spec: String, case: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    Pass,
    Zero,
    Order(String),
    Span(Vec<String>),
    Strict,
    Coset { rep: String, ind_zero: bool },
    IndPreserved,
}

#[derive(Debug, Clone)]
pub struct Script {
    pub steps: Vec<(usize, Step)>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col: 0,
        msg: msg.into(),
    }
}

pub fn parse_script(source: &str) -> Result<Script> {
    let mut steps = Vec::new();
    for (ln, raw) in source.lines().enumerate() {
        let line = ln + 1;
        let text = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let step = parse_step(text, line)?;
        steps.push((line, step));
    }
    let script = Script { steps };
    check_resolution(&script)?;
    Ok(script)
}

/// Names are single-assignment and every spec-position reference must be
/// bound by an earlier statement; this runs before execution.
fn check_resolution(script: &Script) -> Result<()> {
    let mut bound: Vec<&str> = Vec::new();
    for (line, step) in &script.steps {
        let need: Vec<&str> = match step {
            Step::LetReduce { spec, .. } => vec![spec],
            Step::Compute { kind, .. } => match kind {
                ComputeKind::WellFormed { spec }
                | ComputeKind::Ind { spec }
                | ComputeKind::IndFull { spec }
                | ComputeKind::CompareRoutes { spec }
                | ComputeKind::HFormula { spec }
                | ComputeKind::Corner { spec, .. } => vec![spec],
                ComputeKind::HVia { spec, from } => vec![spec, from],
            },
            _ => Vec::new(),
        };
        for n in need {
            if !bound.contains(&n) {
                return Err(perr(*line, format!("`{n}` is not bound before use")));
            }
        }
        if let Step::LetTerm { name, .. }
        | Step::LetMatrix { name, .. }
        | Step::LetSpec { name, .. }
        | Step::LetReduce { name, .. } = step
        {
            if bound.contains(&name.as_str()) {
                return Err(perr(
                    *line,
                    format!("`{name}` is already bound (names are single-assignment)"),
                ));
            }
            bound.push(name);
        }
    }
    Ok(())
}

fn split_expect(text: &str) -> (&str, Option<&str>) {
    match text.find(" expect ") {
        Some(i) => (&text[..i], Some(text[i + 8..].trim())),
        None => (text.trim(), None),
    }
}

fn parse_expectation(s: &str, line: usize) -> Result<Expectation> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    match toks.as_slice() {
        ["pass"] => Ok(Expectation::Pass),
        ["0"] => Ok(Expectation::Zero),
        ["order", k] => Ok(Expectation::Order(k.to_string())),
        ["strict"] => Ok(Expectation::Strict),
        ["ind-preserved"] => Ok(Expectation::IndPreserved),
        ["coset", rep, "ind", "0"] => Ok(Expectation::Coset {
            rep: rep.to_string(),
            ind_zero: true,
        }),
        _ => {
            if let Some(rest) = s.strip_prefix("span ") {
                let chains: Vec<String> = rest.split(',').map(|c| c.trim().to_string()).collect();
                if chains.iter().any(String::is_empty) {
                    return Err(perr(line, "empty chain in span expectation"));
                }
                return Ok(Expectation::Span(chains));
            }
            Err(perr(line, format!("unknown expectation `{s}`")))
        }
    }
}

fn parse_step(text: &str, line: usize) -> Result<Step> {
    if let Some(rest) = text.strip_prefix("echo ") {
        return Ok(Step::Echo {
            text: rest.trim().to_string(),
        });
    }
    if let Some(rest) = text.strip_prefix("let ") {
        let (name, body) = rest
            .split_once('=')
            .ok_or_else(|| perr(line, "let needs `= <value>`"))?;
        let name = name.trim().to_string();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(perr(line, "let name must be a single identifier"));
        }
        let body = body.trim();
        if let Some(expr) = body.strip_prefix("term ") {
            return Ok(Step::LetTerm {
                name,
                expr: expr.trim().to_string(),
            });
        }
        if let Some(expr) = body.strip_prefix("matrix ") {
            return Ok(Step::LetMatrix {
                name,
                expr: expr.trim().to_string(),
            });
        }
        if let Some(expr) = body.strip_prefix("spec ") {
            return Ok(Step::LetSpec {
                name,
                expr: expr.trim().to_string(),
            });
        }
        if let Some(expr) = body.strip_prefix("reduce ") {
            let (head, expect) = split_expect(expr);
            let expect = match expect {
                None => None,
                Some(e) => {
                    let e = e.trim();
                    let e = e
                        .strip_suffix("extras 0")
                        .ok_or_else(|| perr(line, "reduce expectation must end `extras 0`"))?;
                    Some((e.trim().to_string(), true))
                }
            };
            return Ok(Step::LetReduce {
                name,
                spec: head.trim().to_string(),
                expect,
            });
        }
        return Err(perr(
            line,
            "let value must start with term/matrix/spec/reduce",
        ));
    }
    if let Some(rest) = text.strip_prefix("assert-zero ") {
        return Ok(Step::AssertZero {
            expr: rest.trim().to_string(),
        });
    }
    if let Some(rest) = text.strip_prefix("assert-equal ") {
        let (lhs, rhs) = rest
            .split_once(" = ")
            .ok_or_else(|| perr(line, "assert-equal needs ` = ` between the sides"))?;
        return Ok(Step::AssertEqual {
            lhs: lhs.trim().to_string(),
            rhs: rhs.trim().to_string(),
        });
    }
    if let Some(rest) = text.strip_prefix("compute ") {
        let (body, expect_raw) = split_expect(rest);
        let expect = match expect_raw {
            Some(e) => Some(parse_expectation(e, line)?),
            None => None,
        };
        let toks: Vec<&str> = body.split_whitespace().collect();
        let kind = match toks.as_slice() {
            ["wellformed", spec] => ComputeKind::WellFormed {
                spec: spec.to_string(),
            },
            ["ind", spec] => ComputeKind::Ind {
                spec: spec.to_string(),
            },
            ["ind-full", spec] => ComputeKind::IndFull {
                spec: spec.to_string(),
            },
            ["compare", spec] => ComputeKind::CompareRoutes {
                spec: spec.to_string(),
            },
            ["hformula", spec] => ComputeKind::HFormula {
                spec: spec.to_string(),
            },
            ["hvia", spec, "from", from] => ComputeKind::HVia {
                spec: spec.to_string(),
                from: from.to_string(),
            },
            ["corner", spec, "case", k] => ComputeKind::Corner {
                spec: spec.to_string(),
                case: k
                    .parse()
                    .map_err(|_| perr(line, format!("bad corner case `{k}`")))?,
            },
            _ => return Err(perr(line, format!("unknown compute form `{body}`"))),
        };
        return Ok(Step::Compute { kind, expect });
    }
    Err(perr(line, format!("unknown statement `{text}`")))
}

/// Canonical text of one step (the grammar round-trips through this).
pub fn render_step(step: &Step) -> String {
    match step {
        Step::LetTerm { name, expr } => format!("let {name} = term {expr}"),
        Step::LetMatrix { name, expr } => format!("let {name} = matrix {expr}"),
        Step::LetSpec { name, expr } => format!("let {name} = spec {expr}"),
        Step::LetReduce { name, spec, expect } => match expect {
            Some((lit, _)) => format!("let {name} = reduce {spec} expect {lit} extras 0"),
            None => format!("let {name} = reduce {spec}"),
        },
        Step::AssertZero { expr } => format!("assert-zero {expr}"),
        Step::AssertEqual { lhs, rhs } => format!("assert-equal {lhs} = {rhs}"),
        Step::Compute { kind, expect } => {
            let body = match kind {
                ComputeKind::WellFormed { spec } => format!("wellformed {spec}"),
                ComputeKind::Ind { spec } => format!("ind {spec}"),
                ComputeKind::IndFull { spec } => format!("ind-full {spec}"),
                ComputeKind::CompareRoutes { spec } => format!("compare {spec}"),
                ComputeKind::HFormula { spec } => format!("hformula {spec}"),
                ComputeKind::HVia { spec, from } => format!("hvia {spec} from {from}"),
                ComputeKind::Corner { spec, case } => format!("corner {spec} case {case}"),
            };
            let expect = match expect {
                None => String::new(),
                Some(Expectation::Pass) => " expect pass".into(),
                Some(Expectation::Zero) => " expect 0".into(),
                Some(Expectation::Order(k)) => format!(" expect order {k}"),
                Some(Expectation::Span(chains)) => format!(" expect span {}", chains.join(", ")),
                Some(Expectation::Strict) => " expect strict".into(),
                Some(Expectation::Coset { rep, ind_zero: _ }) => {
                    format!(" expect coset {rep} ind 0")
                }
                Some(Expectation::IndPreserved) => " expect ind-preserved".into(),
            };
            format!("compute {body}{expect}")
        }
        Step::Echo { text } => format!("echo {text}"),
    }
}

pub fn render_script(script: &Script) -> String {
    let mut out = String::new();
    for (_, step) in &script.steps {
        let _ = writeln!(out, "{}", render_step(step));
    }
    out
}

#[allow(dead_code)]
enum Value {
    Terms(Vec<Term>),
    Matrix(toda::wedge::MatrixGrid),
    Spec(BracketSpec),
}

pub struct StepOutcome {
    pub line: usize,
    pub text: String,
    pub passed: bool,
}

pub struct RunReport {
    pub outcomes: Vec<StepOutcome>,
    pub total: usize,
}

impl RunReport {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.passed).count()
    }
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
    pub fn summary(&self) -> String {
        match self.outcomes.iter().find(|o| !o.passed) {
            Some(first) => format!(
                "FAIL at step {} ({}/{} passed)",
                first.line,
                self.passed(),
                self.total
            ),
            None => format!("PASS {}/{}", self.passed(), self.total),
        }
    }
}

pub struct Runner<'a> {
    db: &'a Database,
    env: BTreeMap<String, Value>,
}

impl<'a> Runner<'a> {
    pub fn new(db: &'a Database) -> Runner<'a> {
        Runner { db, env: BTreeMap::new() }
    }

    fn bind(&mut self, line: usize, name: &str, v: Value) -> Result<()> {
        if self.env.contains_key(name) {
            return Err(perr(
                line,
                format!("`{name}` is already bound (names are single-assignment)"),
            ));
        }
        self.env.insert(name.to_string(), v);
        Ok(())
    }

    fn spec(&self, line: usize, name: &str) -> Result<&BracketSpec> {
        match self.env.get(name) {
            Some(Value::Spec(s)) => Ok(s),
            Some(_) => Err(perr(line, format!("`{name}` is not a spec"))),
            None => Err(perr(line, format!("`{name}` is not bound"))),
        }
    }

    fn terms(&self, line: usize, expr: &str) -> Result<Vec<Term>> {
        if let Some(Value::Terms(t)) = self.env.get(expr.trim()) {
            return Ok(t.clone());
        }
        parse_sum(expr, self.db).map_err(|e| match e {
            Error::Parse { col, msg, .. } => Error::Parse { line, col, msg },
            other => other,
        })
    }

    /// Execute the script; on a failed step, stop unless `keep_going`.
    pub fn run(&mut self, script: &Script, keep_going: bool) -> RunReport {
        let mut outcomes = Vec::new();
        for (line, step) in &script.steps {
            let result = self.run_step(*line, step);
            let (text, passed) = match result {
                Ok(text) => (text, true),
                Err(e) => (format!("{}: error: {e}", render_step(step)), false),
            };
            outcomes.push(StepOutcome {
                line: *line,
                text,
                passed,
            });
            if !keep_going && !outcomes.last().unwrap().passed {
                break;
            }
        }
        RunReport {
            outcomes,
            total: script.steps.len(),
        }
    }

    fn run_step(&mut self, line: usize, step: &Step) -> Result<String> {
        match step {
            Step::Echo { text } => Ok(format!("echo: {text}")),
            Step::LetTerm { name, expr } => {
                let t = self.terms(line, expr)?;
                self.bind(line, name, Value::Terms(t))?;
                Ok(format!("let {name} = term {expr}"))
            }
            Step::LetMatrix { name, expr } => {
                let grid = parse_matrix_grid(expr, self.db)?;
                let shape = format!("{} x {}", grid.rows, grid.cols);
                self.bind(line, name, Value::Matrix(grid))?;
                Ok(format!("let {name} = matrix {expr} ({shape})"))
            }
            Step::LetSpec { name, expr } => {
                let spec = parse_spec(expr, self.db)?;
                self.bind(line, name, Value::Spec(spec))?;
                Ok(format!("let {name} = spec {expr}"))
            }
            Step::LetReduce { name, spec, expect } => {
                let src = self.spec(line, spec)?.clone();
                let r = reduce_to_plain(&src, self.db)?;
                let rendered = r.reduced.render();
                if let Some((lit, extras_zero)) = expect {
                    let want = parse_spec(lit, self.db)?;
                    if want != r.reduced {
                        return Err(perr(
                            line,
                            format!("reduced spec is {rendered}, expected {}", want.render()),
                        ));
                    }
                    if *extras_zero && !r.extras.iter().all(|(_, s)| s.is_trivial()) {
                        return Err(perr(line, "reduction extras are not all zero"));
                    }
                }
                let extras: Vec<String> = r
                    .extras
                    .iter()
                    .map(|(label, s)| format!("{label} = {}", s.render()))
                    .collect();
                self.bind(line, name, Value::Spec(r.reduced))?;
                Ok(format!(
                    "let {name} = reduce {spec}: {rendered}{}",
                    if extras.is_empty() {
                        String::new()
                    } else {
                        format!("  [extras: {}]", extras.join("; "))
                    }
                ))
            }
            Step::AssertZero { expr } => {
                let terms = self.terms(line, expr)?;
                let mut norm = Normalizer::new(self.db);
                if norm.reduces_to_zero(terms, &mut Trace::default())? {
                    Ok(format!("assert-zero {expr}: ok"))
                } else {
                    Err(perr(line, format!("`{expr}` does not reduce to zero")))
                }
            }
            Step::AssertEqual { lhs, rhs } => {
                let l = self.terms(line, lhs)?;
                let r = self.terms(line, rhs)?;
                let mut diff = l;
                diff.extend(r.into_iter().map(|t| t.scalar_mul(-1)));
                diff.retain(|t| !t.is_zero_syntactic());
                let mut norm = Normalizer::new(self.db);
                if norm.reduces_to_zero(diff, &mut Trace::default())? {
                    Ok(format!("assert-equal {lhs} = {rhs}: ok"))
                } else {
                    Err(perr(
                        line,
                        format!("`{lhs}` and `{rhs}` normalize differently"),
                    ))
                }
            }
            Step::Compute { kind, expect } => self.run_compute(line, kind, expect),
        }
    }

    fn expect_subgroup(
        &self,
        line: usize,
        sub: &Subgroup,
        expect: &Option<Expectation>,
    ) -> Result<String> {
        let rendered = format!(
            "{} of order {}",
            sub.render(),
            toda::bracket::render_order(sub.order())
        );
        match expect {
            None => Ok(rendered),
            Some(Expectation::Zero) => {
                if sub.is_trivial() {
                    Ok(format!("{rendered} (= 0 as expected)"))
                } else {
                    Err(perr(
                        line,
                        format!("expected the trivial subgroup, got {rendered}"),
                    ))
                }
            }
            Some(Expectation::Order(k)) => {
                let got = toda::bracket::render_order(sub.order());
                if &got == k {
                    Ok(rendered)
                } else {
                    Err(perr(line, format!("expected order {k}, got {got}")))
                }
            }
            Some(Expectation::Span(chains)) => {
                let mut gens = Vec::new();
                for c in chains {
                    let t = parse_sum(c, self.db)?;
                    gens.push(Normalizer::new(self.db).normalize_sum(t, &mut Trace::default())?);
                }
                let want = Subgroup::span(sub.ambient.clone(), gens)?;
                if want.equal(sub) {
                    Ok(rendered)
                } else {
                    Err(perr(
                        line,
                        format!("expected span{{ {} }}, got {rendered}", chains.join(", ")),
                    ))
                }
            }
            Some(other) => Err(perr(
                line,
                format!("expectation {other:?} does not apply here"),
            )),
        }
    }

    fn expect_coset(
        &self,
        line: usize,
        coset: &Coset,
        expect: &Option<Expectation>,
    ) -> Result<String> {
        let rendered = coset.render();
        match expect {
            None => Ok(rendered),
            Some(Expectation::Coset { rep, ind_zero }) => {
                let want_terms = parse_sum(rep, self.db)?;
                let want =
                    Normalizer::new(self.db).normalize_sum(want_terms, &mut Trace::default())?;
                let got = coset
                    .representative
                    .as_ref()
                    .ok_or_else(|| perr(line, "coset has no representative"))?;
                let diff = got.add(&want.neg())?;
                if !coset.indeterminacy.member(&diff)? {
                    return Err(perr(
                        line,
                        format!("expected representative {rep}, got {got}"),
                    ));
                }
                if *ind_zero && !coset.indeterminacy.is_trivial() {
                    return Err(perr(
                        line,
                        format!(
                            "expected zero indeterminacy, got {}",
                            coset.indeterminacy.render()
                        ),
                    ));
                }
                Ok(rendered)
            }
            Some(other) => Err(perr(
                line,
                format!("expectation {other:?} does not apply here"),
            )),
        }
    }

    fn run_compute(
        &mut self,
        line: usize,
        kind: &ComputeKind,
        expect: &Option<Expectation>,
    ) -> Result<String> {
        match kind {
            ComputeKind::WellFormed { spec } => {
                let s = self.spec(line, spec)?;
                let report = check_well_defined(s, self.db)?;
                let ok = report.is_well_defined();
                if matches!(expect, Some(Expectation::Pass)) && !ok {
                    let bad: Vec<&str> = report
                        .ab_entries
                        .iter()
                        .chain(&report.bc_entries)
                        .filter(|(_, z)| !*z)
                        .map(|(l, _)| l.as_str())
                        .collect();
                    return Err(perr(line, format!("not well-defined: {}", bad.join("; "))));
                }
                let cites: Vec<String> = report
                    .trace
                    .relations_used()
                    .iter()
                    .map(|s| format!("{} [{}]", s.rule, s.citation))
                    .collect();
                Ok(format!(
                    "wellformed {spec}: {}{}",
                    if ok {
                        "well-defined"
                    } else {
                        "NOT well-defined"
                    },
                    if cites.is_empty() {
                        String::new()
                    } else {
                        format!("  using {}", cites.join("; "))
                    }
                ))
            }
            ComputeKind::Ind { spec } => {
                let s = self.spec(line, spec)?;
                let sub = indeterminacy(s, self.db)?;
                let txt = self.expect_subgroup(line, &sub, expect)?;
                Ok(format!("ind {spec}: {txt}"))
            }
            ComputeKind::IndFull { spec } => {
                let s = self.spec(line, spec)?;
                let mut trace = Trace::default();
                let sub = indeterminacy_full_traced(s, self.db, &mut trace)?;
                let txt = self.expect_subgroup(line, &sub, expect)?;
                Ok(format!(
                    "ind-full {spec} (full computation at n = {}): {txt}",
                    s.n
                ))
            }
            ComputeKind::CompareRoutes { spec } => {
                let s = self.spec(line, spec)?;
                let cmp = compare_indeterminacy_routes(s, self.db)?;
                let verdict = if cmp.equal {
                    "formula agrees with the full computation"
                } else if cmp.formula_is_proper_subgroup {
                    "formula value is a proper subgroup: the bracket is not a coset of it"
                } else {
                    "formula value differs from the full computation"
                };
                if matches!(expect, Some(Expectation::Strict)) && !cmp.formula_is_proper_subgroup {
                    return Err(perr(
                        line,
                        format!("expected strict containment; {verdict}"),
                    ));
                }
                Ok(format!(
                    "compare {spec}: full {} (order {}), formula {} (order {}); {verdict}",
                    cmp.full.render(),
                    toda::bracket::render_order(cmp.full.order()),
                    cmp.formula.render(),
                    toda::bracket::render_order(cmp.formula.order()),
                ))
            }
            ComputeKind::HFormula { spec } => {
                let s = self.spec(line, spec)?;
                let result = h_formula(self.db, s)?;
                let txt = self.expect_coset(line, &result.value, expect)?;
                Ok(format!("hformula {spec}: {txt}"))
            }
            ComputeKind::HVia { spec, from } => {
                let b = self.spec(line, spec)?.clone();
                let t = self.spec(line, from)?;
                let ht = h_formula(self.db, t)?.value;
                let concluded = h_via_member(self.db, &b, &ht)?;
                let txt = self.expect_coset(line, &concluded, expect)?;
                Ok(format!("hvia {spec} from {from}: {txt}"))
            }
            ComputeKind::Corner { spec, case } => {
                let s = self.spec(line, spec)?;
                let case_e = CornerCase::from_index(*case)
                    .ok_or_else(|| perr(line, format!("case must be 1..4, got {case}")))?;
                let original = indeterminacy(s, self.db)?;
                let rewritten = corner_rewrite(s, case_e, self.db)?;
                let mut total = indeterminacy(&rewritten.reduced, self.db)?;
                if let Some(extra) = &rewritten.extra {
                    total = total.sum(extra)?;
                }
                let preserved = original.equal(&total);
                if matches!(expect, Some(Expectation::IndPreserved)) && !preserved {
                    return Err(perr(
                        line,
                        format!(
                            "indeterminacy not preserved: original {}, rewritten-plus-extra {}",
                            original.render(),
                            total.render()
                        ),
                    ));
                }
                Ok(format!(
                    "corner {spec} case {case}: reduced to {}; indeterminacy {}",
                    rewritten.reduced.render(),
                    if preserved {
                        "preserved"
                    } else {
                        "NOT preserved"
                    }
                ))
            }
        }
    }
}
