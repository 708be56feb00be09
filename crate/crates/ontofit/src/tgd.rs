//! TGD representation, classification, model checking, bounded chase, and
//! bounded entailment.
//!
//! A TGD `∀x̄ȳ (φ(x̄,ȳ) → ∃z̄ ψ(x̄,z̄))` is stored as a body and a head atom
//! list over shared variable names; the *frontier* x̄ (variables occurring on
//! both sides) is derived, not stored. Entailment is decided by chasing the
//! body's canonical instance under a bounded oblivious chase, so the answer
//! is a trichotomy: `Yes`, `No` (chase saturated without a match), or
//! `Unknown` (budget exhausted).

use crate::error::{Error, Result};
use crate::relational::{
    canonical_instance, homomorphisms, ConjunctiveQuery, Fact, Instance, QueryAtom, Schema, Value,
};
use crate::Limits;
use indexmap::IndexSet;
use itertools::Itertools;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A tuple-generating dependency.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tgd {
    schema: Schema,
    body: Vec<QueryAtom>,
    head: Vec<QueryAtom>,
}

/// Classification flags of a TGD (derived, not stored).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TgdFlags {
    /// No head existentials.
    pub full: bool,
    /// Some body atom mentions every body variable.
    pub guarded: bool,
    /// Some body atom mentions every frontier variable.
    pub frontier_guarded: bool,
    /// At most one frontier variable.
    pub frontier_one: bool,
    /// Exactly one body atom and one head atom.
    pub ind: bool,
}

/// The TGD classes handled by fitting and basis construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TgdClass {
    Guarded,
    FrontierGuarded,
    FrontierOne,
    Full,
    Ind,
    Unrestricted,
}

impl TgdClass {
    pub fn name(self) -> &'static str {
        match self {
            TgdClass::Guarded => "GTGD",
            TgdClass::FrontierGuarded => "FGTGD",
            TgdClass::FrontierOne => "F1TGD",
            TgdClass::Full => "FULL",
            TgdClass::Ind => "IND",
            TgdClass::Unrestricted => "TGD",
        }
    }

    pub fn parse(s: &str) -> Option<TgdClass> {
        match s {
            "GTGD" => Some(TgdClass::Guarded),
            "FGTGD" => Some(TgdClass::FrontierGuarded),
            "F1TGD" => Some(TgdClass::FrontierOne),
            "FULL" => Some(TgdClass::Full),
            "IND" => Some(TgdClass::Ind),
            "TGD" => Some(TgdClass::Unrestricted),
            _ => None,
        }
    }

    /// Does a TGD with the given flags belong to the class?
    pub fn admits(self, flags: TgdFlags) -> bool {
        match self {
            TgdClass::Guarded => flags.guarded,
            TgdClass::FrontierGuarded => flags.frontier_guarded,
            TgdClass::FrontierOne => flags.frontier_one,
            TgdClass::Full => flags.full,
            TgdClass::Ind => flags.ind,
            TgdClass::Unrestricted => true,
        }
    }
}

impl fmt::Display for TgdClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn atom_vars(atoms: &[QueryAtom]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for atom in atoms {
        for v in &atom.vars {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
    }
    out
}

impl Tgd {
    /// Builds a TGD; body and head must be non-empty and match the schema.
    pub fn new(schema: Schema, body: Vec<QueryAtom>, head: Vec<QueryAtom>) -> Result<Self> {
        if body.is_empty() {
            return Err(Error::Usage("TGD body must be non-empty".into()));
        }
        if head.is_empty() {
            return Err(Error::Usage("TGD head must be non-empty".into()));
        }
        for atom in body.iter().chain(head.iter()) {
            match schema.arity(&atom.symbol) {
                None => {
                    return Err(Error::Usage(format!(
                        "atom {atom} uses symbol {} not in the schema",
                        atom.symbol
                    )))
                }
                Some(a) if a != atom.vars.len() => {
                    return Err(Error::Usage(format!(
                        "atom {atom} has {} variables but {} has arity {a}",
                        atom.vars.len(),
                        atom.symbol
                    )))
                }
                _ => {}
            }
        }
        let dedup = |atoms: Vec<QueryAtom>| -> Vec<QueryAtom> {
            let set: IndexSet<QueryAtom> = atoms.into_iter().collect();
            set.into_iter().collect()
        };
        Ok(Tgd {
            schema,
            body: dedup(body),
            head: dedup(head),
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn body(&self) -> &[QueryAtom] {
        &self.body
    }

    pub fn head(&self) -> &[QueryAtom] {
        &self.head
    }

    /// Frontier variables (occur on both sides), in body-occurrence order.
    pub fn frontier(&self) -> Vec<String> {
        let head_vars = atom_vars(&self.head);
        atom_vars(&self.body)
            .into_iter()
            .filter(|v| head_vars.contains(v))
            .collect()
    }

    /// Head variables that are not frontier variables (the existentials).
    pub fn head_existentials(&self) -> Vec<String> {
        let body_vars = atom_vars(&self.body);
        atom_vars(&self.head)
            .into_iter()
            .filter(|v| !body_vars.contains(v))
            .collect()
    }

    /// The body as a CQ with the frontier as answer tuple.
    pub fn body_cq(&self) -> ConjunctiveQuery {
        ConjunctiveQuery::new(self.schema.clone(), self.frontier(), self.body.clone())
            .expect("body validated at construction")
    }

    /// The head as a CQ with the frontier as answer tuple.
    pub fn head_cq(&self) -> ConjunctiveQuery {
        ConjunctiveQuery::new(self.schema.clone(), self.frontier(), self.head.clone())
            .expect("head validated at construction")
    }

    /// Computes the five classification flags.
    pub fn classify(&self) -> TgdFlags {
        let body_vars = atom_vars(&self.body);
        let frontier = self.frontier();
        let covers = |atom: &QueryAtom, vars: &[String]| vars.iter().all(|v| atom.vars.contains(v));
        TgdFlags {
            full: self.head_existentials().is_empty(),
            guarded: self.body.iter().any(|a| covers(a, &body_vars)),
            frontier_guarded: self.body.iter().any(|a| covers(a, &frontier)),
            frontier_one: frontier.len() <= 1,
            ind: self.body.len() == 1 && self.head.len() == 1,
        }
    }

    /// Renders the TGD in the text format
    /// (`R(x,y), S(y,z) -> exists w. T(x,w)`).
    pub fn to_text(&self) -> String {
        let body = self.body.iter().map(|a| a.to_string()).join(", ");
        let existentials = self.head_existentials();
        let prefix = if existentials.is_empty() {
            String::new()
        } else {
            format!("exists {}. ", existentials.join(" "))
        };
        let head = self.head.iter().map(|a| a.to_string()).join(", ");
        format!("{body} -> {prefix}{head}")
    }
}

impl fmt::Display for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A finite set of TGDs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TgdOntology {
    tgds: Vec<Tgd>,
}

impl TgdOntology {
    pub fn new(tgds: impl IntoIterator<Item = Tgd>) -> Self {
        let set: IndexSet<Tgd> = tgds.into_iter().collect();
        TgdOntology {
            tgds: set.into_iter().collect(),
        }
    }

    pub fn tgds(&self) -> &[Tgd] {
        &self.tgds
    }

    pub fn len(&self) -> usize {
        self.tgds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tgds.is_empty()
    }

    /// True iff every member belongs to the class.
    pub fn is_homogeneous(&self, class: TgdClass) -> bool {
        self.tgds.iter().all(|t| class.admits(t.classify()))
    }

    /// Union of the members' schemas.
    pub fn schema(&self) -> Result<Schema> {
        Schema::union_all(self.tgds.iter().map(|t| t.schema()))
    }

    /// Renders the ontology as one TGD per line, sorted canonically for
    /// diff-stable output.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self.tgds.iter().map(|t| t.to_text()).collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// Does the instance satisfy the TGD? Body answers (projected to the
/// frontier) must all extend to head matches.
pub fn model_check(instance: &Instance, tgd: &Tgd, limits: &Limits) -> Result<bool> {
    let body = canonical_instance(&tgd.body_cq());
    let homs = homomorphisms(&body.instance, instance, &BTreeMap::new(), false, limits)?;
    let frontier = tgd.frontier();
    let mut bindings: IndexSet<Vec<Value>> = IndexSet::new();
    for h in homs {
        bindings.insert(
            frontier
                .iter()
                .map(|v| h[&Value::atom(v.clone())].clone())
                .collect(),
        );
    }
    let head = canonical_instance(&tgd.head_cq());
    for binding in bindings {
        let fixed: BTreeMap<Value, Value> = frontier
            .iter()
            .zip(binding.iter())
            .map(|(v, w)| (Value::atom(v.clone()), w.clone()))
            .collect();
        let found = homomorphisms(&head.instance, instance, &fixed, true, limits)?;
        if found.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Does the instance satisfy every TGD of the ontology?
pub fn model_check_ontology(instance: &Instance, o: &TgdOntology, limits: &Limits) -> Result<bool> {
    for tgd in o.tgds() {
        if !model_check(instance, tgd, limits)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of a bounded chase.
#[derive(Debug, Clone)]
pub struct ChaseResult {
    pub instance: Instance,
    /// True iff a full round fired no applicable trigger.
    pub saturated: bool,
    pub rounds_used: usize,
    pub nulls_created: u64,
}

/// Bounded oblivious chase with fair round-robin scheduling.
///
/// Each round enumerates all triggers (rule + body homomorphism) against the
/// round-start instance and fires every trigger not fired before, inventing
/// fresh nulls for head existentials. Saturation means a round fired
/// nothing; hitting the round or fact budget returns the partial result with
/// `saturated = false`.
pub fn chase(instance: &Instance, o: &TgdOntology, limits: &Limits) -> Result<ChaseResult> {
    let schema = instance.schema().union(&o.schema()?)?;
    let mut facts: IndexSet<Fact> = instance.facts().cloned().collect();
    let mut fired: BTreeSet<(usize, Vec<(Value, Value)>)> = BTreeSet::new();
    let mut null_counter: u64 = 0;
    let mut rounds_used = 0;
    let mut saturated = false;
    let mut truncated = false;

    let bodies: Vec<_> = o
        .tgds()
        .iter()
        .map(|t| canonical_instance(&t.body_cq()))
        .collect();

    'rounds: for _ in 0..limits.max_chase_rounds {
        let snapshot = Instance::from_facts(schema.clone(), facts.iter().cloned())?;
        let mut fired_this_round = false;
        for (idx, tgd) in o.tgds().iter().enumerate() {
            // A blown search budget truncates the chase (result unknown)
            // rather than failing the whole computation.
            let homs = match homomorphisms(
                &bodies[idx].instance,
                &snapshot,
                &BTreeMap::new(),
                false,
                limits,
            ) {
                Ok(homs) => homs,
                Err(Error::ResourceLimit(_)) => {
                    truncated = true;
                    rounds_used += 1;
                    break 'rounds;
                }
                Err(e) => return Err(e),
            };
            for h in homs {
                let key: Vec<(Value, Value)> =
                    h.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                if !fired.insert((idx, key)) {
                    continue;
                }
                fired_this_round = true;
                let mut assignment: BTreeMap<String, Value> = h
                    .iter()
                    .map(|(k, v)| {
                        let Value::Atom(name) = k else {
                            unreachable!("canonical instance values are atoms")
                        };
                        (name.clone(), v.clone())
                    })
                    .collect();
                for v in tgd.head_existentials() {
                    assignment.insert(v, Value::Null(null_counter));
                    null_counter += 1;
                }
                for atom in tgd.head() {
                    let fact = Fact::new(
                        atom.symbol.clone(),
                        atom.vars.iter().map(|v| assignment[v].clone()).collect(),
                    );
                    facts.insert(fact);
                    if facts.len() > limits.max_chase_facts {
                        truncated = true;
                        rounds_used += 1;
                        break 'rounds;
                    }
                }
            }
        }
        rounds_used += 1;
        if !fired_this_round {
            saturated = true;
            rounds_used -= 1; // the empty round did no work
            break;
        }
    }
    let _ = truncated;
    Ok(ChaseResult {
        instance: Instance::from_facts(schema, facts)?,
        saturated,
        rounds_used,
        nulls_created: null_counter,
    })
}

/// Bounded-entailment trichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entailment {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Entailment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entailment::Yes => "yes",
            Entailment::No => "no",
            Entailment::Unknown => "unknown",
        })
    }
}

/// Does the ontology entail the TGD, decided by chasing the canonical
/// instance of the TGD's body and checking the head with the frontier fixed?
pub fn entails(o: &TgdOntology, tgd: &Tgd, limits: &Limits) -> Result<Entailment> {
    let body = canonical_instance(&tgd.body_cq());
    let schema = body.instance.schema().union(&o.schema()?)?;
    let start = body.instance.with_schema(schema)?;
    let result = chase(&start, o, limits)?;
    let head = canonical_instance(&tgd.head_cq());
    let fixed: BTreeMap<Value, Value> = tgd
        .frontier()
        .iter()
        .map(|v| (Value::atom(v.clone()), Value::atom(v.clone())))
        .collect();
    let found = match homomorphisms(&head.instance, &result.instance, &fixed, true, limits) {
        Ok(found) => found,
        Err(Error::ResourceLimit(_)) => return Ok(Entailment::Unknown),
        Err(e) => return Err(e),
    };
    if !found.is_empty() {
        Ok(Entailment::Yes)
    } else if result.saturated {
        Ok(Entailment::No)
    } else {
        Ok(Entailment::Unknown)
    }
}

/// Rewrites an empty-frontier TGD into a satisfaction-equivalent
/// frontier-one TGD: pick the first body atom `R(x̄)` and its first variable
/// `x`; the head gains a copy of `R(x̄)` with every variable except `x`
/// replaced by a fresh existential.
pub fn frontier_one_rewrite(tgd: &Tgd) -> Result<Tgd> {
    if !tgd.frontier().is_empty() {
        return Err(Error::Precondition(
            "frontier_one_rewrite requires an empty frontier".into(),
        ));
    }
    let anchor_atom = &tgd.body()[0];
    let x = &anchor_atom.vars[0];
    let used: BTreeSet<String> = atom_vars(tgd.body())
        .into_iter()
        .chain(atom_vars(tgd.head()))
        .collect();
    let mut counter = 0;
    let mut fresh = || loop {
        let name = format!("w{counter}");
        counter += 1;
        if !used.contains(&name) {
            return name;
        }
    };
    let mut renamed = Vec::with_capacity(anchor_atom.vars.len());
    let mut seen: BTreeMap<&String, String> = BTreeMap::new();
    for (i, v) in anchor_atom.vars.iter().enumerate() {
        if i == 0 {
            renamed.push(x.clone());
        } else {
            let name = seen.entry(v).or_insert_with(&mut fresh);
            renamed.push(name.clone());
        }
    }
    let mut head = tgd.head().to_vec();
    head.push(QueryAtom {
        symbol: anchor_atom.symbol.clone(),
        vars: renamed,
    });
    Tgd::new(tgd.schema().clone(), tgd.body().to_vec(), head)
}

/// Parses an atom list `R(x,y), S(y,z)`; returns the atoms and the rest of
/// the input after the list.
fn parse_atoms(input: &str) -> Result<Vec<QueryAtom>> {
    let mut atoms = Vec::new();
    let mut rest = input.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| Error::Parse(format!("expected '(' in atom list near {rest:?}")))?;
        let close = rest[open..]
            .find(')')
            .map(|i| i + open)
            .ok_or_else(|| Error::Parse(format!("unclosed '(' near {rest:?}")))?;
        let symbol = rest[..open].trim();
        if symbol.is_empty() || !symbol.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Parse(format!("invalid symbol {symbol:?}")));
        }
        let vars: Vec<String> = rest[open + 1..close]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                if s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    Ok(s.to_string())
                } else {
                    Err(Error::Parse(format!("invalid variable {s:?}")))
                }
            })
            .collect::<Result<_>>()?;
        if vars.is_empty() {
            return Err(Error::Parse("atoms must have at least one variable".into()));
        }
        atoms.push(QueryAtom {
            symbol: symbol.to_string(),
            vars,
        });
        rest = rest[close + 1..].trim();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim();
            if rest.is_empty() {
                return Err(Error::Parse("trailing comma in atom list".into()));
            }
        } else if !rest.is_empty() {
            return Err(Error::Parse(format!("unexpected input {rest:?}")));
        }
    }
    if atoms.is_empty() {
        return Err(Error::Parse("empty atom list".into()));
    }
    Ok(atoms)
}

/// Parses the TGD text format `R(x,y), S(y,z) -> exists w. T(x,w)`. The
/// schema is inferred from the atoms.
pub fn parse_tgd(input: &str) -> Result<Tgd> {
    let (body_text, head_text) = input
        .split_once("->")
        .ok_or_else(|| Error::Parse("expected '->' in TGD".into()))?;
    let body = parse_atoms(body_text)?;
    let mut head_text = head_text.trim();
    let mut declared: Vec<String> = Vec::new();
    if let Some(rest) = head_text.strip_prefix("exists") {
        let dot = rest
            .find('.')
            .ok_or_else(|| Error::Parse("expected '.' after exists prefix".into()))?;
        declared = rest[..dot]
            .split_whitespace()
            .map(|s| s.to_string())
            .collect();
        if declared.is_empty() {
            return Err(Error::Parse("empty exists prefix".into()));
        }
        head_text = rest[dot + 1..].trim();
    }
    let head = parse_atoms(head_text)?;
    let mut schema = Schema::new();
    for atom in body.iter().chain(head.iter()) {
        schema.add(atom.symbol.clone(), atom.vars.len()).map_err(|e| {
            Error::Parse(e.to_string())
        })?;
    }
    let tgd = Tgd::new(schema, body, head)?;
    let body_vars = atom_vars(tgd.body());
    for v in &declared {
        if body_vars.contains(v) {
            return Err(Error::Parse(format!(
                "existential variable {v} also occurs in the body"
            )));
        }
    }
    Ok(tgd)
}

/// Parses an ontology file: one TGD per line, `#` comments.
pub fn parse_tgd_file(text: &str) -> Result<TgdOntology> {
    let mut tgds = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        tgds.push(
            parse_tgd(line).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?,
        );
    }
    Ok(TgdOntology::new(tgds))
}
