//! Schemas, instances, pointed instances, homomorphisms, conjunctive
//! queries, and the product/union/diversification/guardedness machinery the
//! rest of the library consumes.
//!
//! An [`Instance`] is a finite set of facts over a [`Schema`]; a
//! [`PointedInstance`] additionally distinguishes a tuple of values (which
//! may lie outside the active domain). All types are immutable after
//! construction and all operations are pure.
//!
//! Determinism: every instance carries a fixed total order on its active
//! domain — first occurrence in fact-insertion order — and all enumeration
//! (homomorphism search, CQ answers, guarded sets) follows that order.

use crate::error::{Error, Result};
use crate::Limits;
use indexmap::IndexSet;
use itertools::Itertools;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A value occurring in facts.
///
/// Atomic values are names; composite (tuple) values are produced by direct
/// products; clone values are produced by diversification; null values are
/// invented by the chase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// A named value, e.g. from a parsed fact file.
    Atom(String),
    /// A value tagged with its source index by a disjoint union.
    Tagged(usize, Box<Value>),
    /// A width-k tuple value created by a k-ary direct product.
    Tuple(Vec<Value>),
    /// A clone of a distinguished value, created by diversification; the
    /// index is the point position the clone stands for.
    CloneOf(Box<Value>, usize),
    /// A labelled null invented by the chase.
    Null(u64),
}

impl Value {
    pub fn atom(name: impl Into<String>) -> Self {
        Value::Atom(name.into())
    }

    /// The `i`-th component of a tuple value (projection out of a product).
    pub fn component(&self, i: usize) -> Result<&Value> {
        match self {
            Value::Tuple(parts) => parts.get(i).ok_or_else(|| {
                Error::Usage(format!("tuple value has no component {i}"))
            }),
            _ => Err(Error::Usage(format!(
                "component projection applied to non-tuple value {self}"
            ))),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(name) => write!(f, "{name}"),
            Value::Tagged(i, v) => write!(f, "{v}@{i}"),
            Value::Tuple(parts) => {
                write!(f, "(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            Value::CloneOf(v, i) => write!(f, "{v}*{i}"),
            Value::Null(k) => write!(f, "_n{k}"),
        }
    }
}

/// A relational schema: a finite set of relation symbols with arities ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Schema {
    arities: BTreeMap<String, usize>,
}

impl Schema {
    pub fn new() -> Self {
        Schema::default()
    }

    pub fn with_symbols<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut schema = Schema::new();
        for (name, arity) in symbols {
            schema.add(name, arity)?;
        }
        Ok(schema)
    }

    pub fn add(&mut self, name: impl Into<String>, arity: usize) -> Result<()> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::Usage(format!("symbol {name} must have arity ≥ 1")));
        }
        match self.arities.get(&name) {
            Some(&a) if a != arity => Err(Error::Usage(format!(
                "symbol {name} declared with conflicting arities {a} and {arity}"
            ))),
            _ => {
                self.arities.insert(name, arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.arities.contains_key(name)
    }

    /// Symbols in sorted name order.
    pub fn symbols(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arities.iter().map(|(n, &a)| (n.as_str(), a))
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.arities.values().copied().max().unwrap_or(0)
    }

    /// Union of two schemas; errors on an arity conflict.
    pub fn union(&self, other: &Schema) -> Result<Schema> {
        let mut out = self.clone();
        for (name, arity) in other.symbols() {
            out.add(name, arity)?;
        }
        Ok(out)
    }

    /// Union of many schemas.
    pub fn union_all<'a>(schemas: impl IntoIterator<Item = &'a Schema>) -> Result<Schema> {
        let mut out = Schema::new();
        for s in schemas {
            out = out.union(s)?;
        }
        Ok(out)
    }

    /// True iff every symbol is unary or binary (DL-compatible).
    pub fn is_dl_compatible(&self) -> bool {
        self.arities.values().all(|&a| a <= 2)
    }

    pub fn unary_symbols(&self) -> impl Iterator<Item = &str> {
        self.arities
            .iter()
            .filter(|(_, &a)| a == 1)
            .map(|(n, _)| n.as_str())
    }

    pub fn binary_symbols(&self) -> impl Iterator<Item = &str> {
        self.arities
            .iter()
            .filter(|(_, &a)| a == 2)
            .map(|(n, _)| n.as_str())
    }
}

/// A single fact `R(v1, ..., vk)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub symbol: String,
    pub args: Vec<Value>,
}

impl Fact {
    pub fn new(symbol: impl Into<String>, args: Vec<Value>) -> Self {
        Fact {
            symbol: symbol.into(),
            args,
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.symbol)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A finite set of facts over a schema.
///
/// Immutable after construction. The active domain is ordered by first
/// occurrence in fact-insertion order; fact iteration preserves insertion
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    schema: Schema,
    facts: IndexSet<Fact>,
    adom: Vec<Value>,
    adom_index: BTreeMap<Value, usize>,
    by_symbol: BTreeMap<String, Vec<usize>>,
    by_value: BTreeMap<Value, Vec<usize>>,
}

impl Instance {
    /// Empty instance over a schema.
    pub fn empty(schema: Schema) -> Self {
        Instance {
            schema,
            facts: IndexSet::new(),
            adom: Vec::new(),
            adom_index: BTreeMap::new(),
            by_symbol: BTreeMap::new(),
            by_value: BTreeMap::new(),
        }
    }

    /// Build an instance from facts; every fact must match the schema.
    pub fn from_facts(schema: Schema, facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let mut set = IndexSet::new();
        for fact in facts {
            match schema.arity(&fact.symbol) {
                None => {
                    return Err(Error::Usage(format!(
                        "fact {fact} uses symbol {} not in the schema",
                        fact.symbol
                    )))
                }
                Some(a) if a != fact.args.len() => {
                    return Err(Error::Usage(format!(
                        "fact {fact} has {} arguments but {} has arity {a}",
                        fact.args.len(),
                        fact.symbol
                    )))
                }
                _ => {
                    set.insert(fact);
                }
            }
        }
        let mut inst = Instance {
            schema,
            facts: set,
            adom: Vec::new(),
            adom_index: BTreeMap::new(),
            by_symbol: BTreeMap::new(),
            by_value: BTreeMap::new(),
        };
        inst.rebuild_indexes();
        Ok(inst)
    }

    fn rebuild_indexes(&mut self) {
        self.adom.clear();
        self.adom_index.clear();
        self.by_symbol.clear();
        self.by_value.clear();
        for (i, fact) in self.facts.iter().enumerate() {
            self.by_symbol
                .entry(fact.symbol.clone())
                .or_default()
                .push(i);
            for arg in &fact.args {
                if !self.adom_index.contains_key(arg) {
                    self.adom_index.insert(arg.clone(), self.adom.len());
                    self.adom.push(arg.clone());
                }
                let occ = self.by_value.entry(arg.clone()).or_default();
                if occ.last() != Some(&i) {
                    occ.push(i);
                }
            }
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Replace the schema by a (usually larger) compatible one.
    pub fn with_schema(&self, schema: Schema) -> Result<Instance> {
        Instance::from_facts(schema, self.facts.iter().cloned())
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Active domain in the fixed order (first occurrence in fact order).
    pub fn adom(&self) -> &[Value] {
        &self.adom
    }

    pub fn adom_contains(&self, v: &Value) -> bool {
        self.adom_index.contains_key(v)
    }

    pub fn adom_position(&self, v: &Value) -> Option<usize> {
        self.adom_index.get(v).copied()
    }

    /// Facts with the given symbol, in insertion order.
    pub fn facts_of(&self, symbol: &str) -> impl Iterator<Item = &Fact> {
        self.by_symbol
            .get(symbol)
            .into_iter()
            .flatten()
            .map(move |&i| self.facts.get_index(i).expect("index valid"))
    }

    /// Facts mentioning the given value, in insertion order.
    pub fn facts_with(&self, v: &Value) -> impl Iterator<Item = &Fact> {
        self.by_value
            .get(v)
            .into_iter()
            .flatten()
            .map(move |&i| self.facts.get_index(i).expect("index valid"))
    }

    /// Number of fact occurrences of a value (its constraint degree).
    pub fn degree(&self, v: &Value) -> usize {
        self.by_value.get(v).map_or(0, |occ| occ.len())
    }

    /// The subinstance `I|_M`: exactly the facts using only values from `M`.
    pub fn restrict(&self, m: &BTreeSet<Value>) -> Instance {
        let facts = self
            .facts
            .iter()
            .filter(|f| f.args.iter().all(|a| m.contains(a)))
            .cloned();
        Instance::from_facts(self.schema.clone(), facts).expect("restriction preserves schema")
    }

    /// All ⊆-maximal guarded sets: value sets covered by a single fact with
    /// no strictly larger such set. Deterministic (first-fact order).
    pub fn maximally_guarded_sets(&self) -> Vec<BTreeSet<Value>> {
        let mut sets: Vec<BTreeSet<Value>> = Vec::new();
        for fact in self.facts.iter() {
            let s: BTreeSet<Value> = fact.args.iter().cloned().collect();
            if !sets.contains(&s) {
                sets.push(s);
            }
        }
        let maximal: Vec<BTreeSet<Value>> = sets
            .iter()
            .filter(|s| !sets.iter().any(|t| *s != t && s.is_subset(t)))
            .cloned()
            .collect();
        maximal
    }

    /// Orders a set of values by the instance's fixed adom order.
    ///
    /// Values outside the active domain sort after all domain values, by
    /// structural order.
    pub fn order_values(&self, m: &BTreeSet<Value>) -> Vec<Value> {
        let mut vals: Vec<Value> = m.iter().cloned().collect();
        vals.sort_by_key(|v| (self.adom_position(v).unwrap_or(usize::MAX), v.clone()));
        vals
    }

    /// True iff every fact over the schema with values drawn from `tuple` is
    /// present (the tuple is *total* in the instance).
    pub fn is_total_tuple(&self, tuple: &[Value]) -> Result<bool> {
        for v in tuple {
            if !self.adom_contains(v) {
                return Err(Error::Precondition(format!(
                    "is_total_tuple: value {v} not in the active domain"
                )));
            }
        }
        let mut vals: Vec<&Value> = Vec::new();
        for v in tuple {
            if !vals.contains(&v) {
                vals.push(v);
            }
        }
        for (symbol, arity) in self.schema.symbols() {
            let mut count: usize = 1;
            for _ in 0..arity {
                count = count.saturating_mul(vals.len());
                if count > 10_000_000 {
                    return Err(Error::ResourceLimit(
                        "is_total_tuple: too many candidate facts".into(),
                    ));
                }
            }
            for combo in (0..arity).map(|_| vals.iter()).multi_cartesian_product() {
                let fact = Fact::new(symbol, combo.into_iter().map(|v| (*v).clone()).collect());
                if !self.contains(&fact) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Renders the instance in the fact file format.
    pub fn to_fact_text(&self) -> String {
        let mut out = String::new();
        for fact in self.facts.iter() {
            out.push_str(&fact.to_string());
            out.push_str(".\n");
        }
        out
    }
}

/// An instance with a distinguished value tuple.
///
/// Distinguished values may lie outside the active domain (the paper's
/// convention); operations that cannot cope with that report a precondition
/// error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedInstance {
    pub instance: Instance,
    pub point: Vec<Value>,
}

impl PointedInstance {
    pub fn new(instance: Instance, point: Vec<Value>) -> Self {
        PointedInstance { instance, point }
    }

    /// An instance with the empty distinguished tuple.
    pub fn unpointed(instance: Instance) -> Self {
        PointedInstance {
            instance,
            point: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.point.len()
    }

    /// Renders the pointed instance in the fact file format.
    pub fn to_fact_text(&self) -> String {
        let mut out = String::new();
        if !self.point.is_empty() {
            out.push_str("@point ");
            out.push_str(&self.point.iter().map(|v| v.to_string()).join(", "));
            out.push('\n');
        }
        out.push_str(&self.instance.to_fact_text());
        out
    }
}

/// A conjunctive query: answer variables plus a set of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConjunctiveQuery {
    schema: Schema,
    answer_vars: Vec<String>,
    atoms: Vec<QueryAtom>,
}

/// A query atom `R(x1, ..., xk)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QueryAtom {
    pub symbol: String,
    pub vars: Vec<String>,
}

impl QueryAtom {
    pub fn new(symbol: impl Into<String>, vars: Vec<impl Into<String>>) -> Self {
        QueryAtom {
            symbol: symbol.into(),
            vars: vars.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for QueryAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.symbol, self.vars.join(","))
    }
}

impl ConjunctiveQuery {
    /// Builds a CQ, checking safety (every answer variable occurs in some
    /// atom) and arity agreement with the schema.
    pub fn new(
        schema: Schema,
        answer_vars: Vec<impl Into<String>>,
        atoms: Vec<QueryAtom>,
    ) -> Result<Self> {
        let answer_vars: Vec<String> = answer_vars.into_iter().map(Into::into).collect();
        let mut seen: IndexSet<QueryAtom> = IndexSet::new();
        for atom in atoms {
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
                _ => {
                    seen.insert(atom);
                }
            }
        }
        let atoms: Vec<QueryAtom> = seen.into_iter().collect();
        for v in &answer_vars {
            if !atoms.iter().any(|a| a.vars.contains(v)) {
                return Err(Error::Usage(format!(
                    "unsafe CQ: answer variable {v} occurs in no atom"
                )));
            }
        }
        Ok(ConjunctiveQuery {
            schema,
            answer_vars,
            atoms,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn answer_vars(&self) -> &[String] {
        &self.answer_vars
    }

    pub fn atoms(&self) -> &[QueryAtom] {
        &self.atoms
    }

    /// All variables in first-occurrence order (atom order, then position).
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for atom in &self.atoms {
            for v in &atom.vars {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// True iff some atom mentions every variable of the query.
    pub fn is_guarded(&self) -> bool {
        let all = self.vars();
        self.atoms
            .iter()
            .any(|a| all.iter().all(|v| a.vars.contains(v)))
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q({}) :- {}",
            self.answer_vars.join(","),
            self.atoms.iter().map(|a| a.to_string()).join(", ")
        )
    }
}

/// Disjoint union `⊎`: union after tagging each value with its source index,
/// so active domains are pairwise disjoint in the result.
pub fn disjoint_union(instances: &[Instance]) -> Result<Instance> {
    if instances.is_empty() {
        return Err(Error::Usage("disjoint_union of an empty list".into()));
    }
    let schema = Schema::union_all(instances.iter().map(|i| i.schema()))?;
    let mut facts = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for fact in inst.facts() {
            let args = fact
                .args
                .iter()
                .map(|a| Value::Tagged(i, Box::new(a.clone())))
                .collect();
            facts.push(Fact::new(fact.symbol.clone(), args));
        }
    }
    Instance::from_facts(schema, facts)
}

/// Direct product `∏` of pointed instances, computed in one pass with
/// composite values of width = number of operands (also for a single
/// operand).
///
/// Facts are component-wise combinations of same-symbol facts; the
/// distinguished tuple is the component-wise tuple of distinguished values.
pub fn direct_product(operands: &[PointedInstance], limits: &Limits) -> Result<PointedInstance> {
    if operands.is_empty() {
        return Err(Error::Usage("direct_product of an empty list".into()));
    }
    let point_arity = operands[0].arity();
    if operands.iter().any(|p| p.arity() != point_arity) {
        return Err(Error::Usage(
            "direct_product: distinguished tuples have mismatched arities".into(),
        ));
    }
    let schema = Schema::union_all(operands.iter().map(|p| p.instance.schema()))?;

    // Up-front size guard: the product has Σ_R Π_i |R^{I_i}| facts.
    let mut predicted: u128 = 0;
    for (symbol, _) in schema.symbols() {
        let mut per_symbol: u128 = 1;
        for op in operands {
            per_symbol *= op.instance.facts_of(symbol).count() as u128;
        }
        predicted += per_symbol;
    }
    if predicted > limits.max_product_facts as u128 {
        return Err(Error::ResourceLimit(format!(
            "direct_product would create {predicted} facts (cap {})",
            limits.max_product_facts
        )));
    }

    let mut facts = Vec::new();
    let mut values: BTreeSet<Value> = BTreeSet::new();
    for (symbol, arity) in schema.symbols() {
        let lists: Vec<Vec<&Fact>> = operands
            .iter()
            .map(|op| op.instance.facts_of(symbol).collect())
            .collect();
        if lists.iter().any(|l| l.is_empty()) {
            continue;
        }
        for combo in lists.iter().map(|l| l.iter()).multi_cartesian_product() {
            let args: Vec<Value> = (0..arity)
                .map(|j| Value::Tuple(combo.iter().map(|f| f.args[j].clone()).collect()))
                .collect();
            for a in &args {
                values.insert(a.clone());
            }
            if values.len() > limits.max_product_values {
                return Err(Error::ResourceLimit(format!(
                    "direct_product exceeds the value cap {}",
                    limits.max_product_values
                )));
            }
            facts.push(Fact::new(symbol, args));
        }
    }
    let point: Vec<Value> = (0..point_arity)
        .map(|j| Value::Tuple(operands.iter().map(|op| op.point[j].clone()).collect()))
        .collect();
    Ok(PointedInstance::new(
        Instance::from_facts(schema, facts)?,
        point,
    ))
}

/// Direct product of plain instances (empty distinguished tuples).
pub fn product_of_instances(instances: &[Instance], limits: &Limits) -> Result<Instance> {
    let pointed: Vec<PointedInstance> = instances
        .iter()
        .map(|i| PointedInstance::unpointed(i.clone()))
        .collect();
    Ok(direct_product(&pointed, limits)?.instance)
}

/// Diversification `(I*, ā*)`: adds a fresh clone `a_i*` per distinguished
/// position and every fact obtainable by replacing zero or more occurrences
/// of each `a_i` by `a_i*`; the new distinguished tuple is the (repeat-free)
/// clone tuple.
pub fn diversify(p: &PointedInstance) -> Result<PointedInstance> {
    for v in &p.point {
        if !p.instance.adom_contains(v) {
            return Err(Error::Precondition(format!(
                "diversify: distinguished value {v} not in the active domain"
            )));
        }
    }
    if p.point.is_empty() {
        return Ok(p.clone());
    }
    let clones: Vec<Value> = p
        .point
        .iter()
        .enumerate()
        .map(|(i, v)| Value::CloneOf(Box::new(v.clone()), i))
        .collect();
    let mut facts = Vec::new();
    for fact in p.instance.facts() {
        let options: Vec<Vec<Value>> = fact
            .args
            .iter()
            .map(|arg| {
                let mut opts = vec![arg.clone()];
                for (i, orig) in p.point.iter().enumerate() {
                    if orig == arg {
                        opts.push(clones[i].clone());
                    }
                }
                opts
            })
            .collect();
        for combo in options.iter().map(|o| o.iter()).multi_cartesian_product() {
            facts.push(Fact::new(
                fact.symbol.clone(),
                combo.into_iter().cloned().collect(),
            ));
        }
    }
    Ok(PointedInstance::new(
        Instance::from_facts(p.instance.schema().clone(), facts)?,
        clones,
    ))
}

/// Enumerates homomorphisms from `src` to `dst` that extend `fixed`
/// (a partial map on `adom(src)`).
///
/// Backtracking over `adom(src)` in order of decreasing constraint degree,
/// with per-symbol fact indexes on `dst`; candidate targets are tried in
/// `dst`'s fixed adom order, so enumeration order is deterministic. If
/// `first_only`, stops after the first homomorphism.
pub fn homomorphisms(
    src: &Instance,
    dst: &Instance,
    fixed: &BTreeMap<Value, Value>,
    first_only: bool,
    limits: &Limits,
) -> Result<Vec<BTreeMap<Value, Value>>> {
    // Order the source domain: fixed values first, then decreasing degree,
    // ties broken by adom order.
    let mut order: Vec<&Value> = src.adom().iter().collect();
    order.sort_by_key(|v| {
        (
            if fixed.contains_key(*v) { 0 } else { 1 },
            usize::MAX - src.degree(v),
            src.adom_position(v).expect("adom value"),
        )
    });

    // Candidate targets per source value: only dst values occurring in every
    // (symbol, position) slot the source value occupies can be images.
    let mut slot_values: BTreeMap<(&str, usize), BTreeSet<&Value>> = BTreeMap::new();
    for fact in dst.facts() {
        for (pos, v) in fact.args.iter().enumerate() {
            slot_values.entry((fact.symbol.as_str(), pos)).or_default().insert(v);
        }
    }
    let mut candidates: BTreeMap<&Value, Vec<&Value>> = BTreeMap::new();
    for v in src.adom() {
        let mut allowed: Option<BTreeSet<&Value>> = None;
        for fact in src.facts_with(v) {
            for (pos, arg) in fact.args.iter().enumerate() {
                if arg == v {
                    let here = slot_values.get(&(fact.symbol.as_str(), pos)).cloned().unwrap_or_default();
                    allowed = Some(match allowed {
                        None => here,
                        Some(prev) => prev.intersection(&here).copied().collect(),
                    });
                }
            }
        }
        let list: Vec<&Value> = match allowed {
            Some(set) => dst.adom().iter().filter(|w| set.contains(w)).collect(),
            None => dst.adom().iter().collect(),
        };
        candidates.insert(v, list);
    }

    let mut assignment: BTreeMap<&Value, &Value> = BTreeMap::new();
    let mut results = Vec::new();
    let mut nodes: u64 = 0;

    // Checks every src fact whose arguments are now all assigned and which
    // mentions `v`.
    fn consistent(
        src: &Instance,
        dst: &Instance,
        assignment: &BTreeMap<&Value, &Value>,
        v: &Value,
    ) -> bool {
        'facts: for fact in src.facts_with(v) {
            let mut mapped = Vec::with_capacity(fact.args.len());
            for arg in &fact.args {
                match assignment.get(arg) {
                    Some(&w) => mapped.push(w.clone()),
                    None => continue 'facts,
                }
            }
            if !dst.contains(&Fact::new(fact.symbol.clone(), mapped)) {
                return false;
            }
        }
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<'a>(
        src: &'a Instance,
        dst: &'a Instance,
        order: &[&'a Value],
        depth: usize,
        fixed: &'a BTreeMap<Value, Value>,
        candidates: &BTreeMap<&'a Value, Vec<&'a Value>>,
        assignment: &mut BTreeMap<&'a Value, &'a Value>,
        results: &mut Vec<BTreeMap<Value, Value>>,
        first_only: bool,
        nodes: &mut u64,
        limits: &Limits,
    ) -> Result<()> {
        if depth == order.len() {
            results.push(
                assignment
                    .iter()
                    .map(|(k, v)| ((*k).clone(), (*v).clone()))
                    .collect(),
            );
            return Ok(());
        }
        let v = order[depth];
        let pool: Vec<&Value> = match fixed.get(v) {
            Some(w) => vec![w],
            None => candidates[v].clone(),
        };
        for w in pool {
            *nodes += 1;
            if *nodes > limits.max_search_nodes {
                return Err(Error::ResourceLimit(
                    "homomorphism search exceeded the node cap".into(),
                ));
            }
            assignment.insert(v, w);
            if consistent(src, dst, assignment, v) {
                recurse(
                    src, dst, order, depth + 1, fixed, candidates, assignment, results,
                    first_only, nodes, limits,
                )?;
                if first_only && !results.is_empty() {
                    assignment.remove(v);
                    return Ok(());
                }
            }
            assignment.remove(v);
        }
        Ok(())
    }

    recurse(
        src,
        dst,
        &order,
        0,
        fixed,
        &candidates,
        &mut assignment,
        &mut results,
        first_only,
        &mut nodes,
        limits,
    )?;
    Ok(results)
}

/// Finds a homomorphism between pointed instances: a total map on
/// `adom(src)` preserving all facts and sending the distinguished tuple to
/// `dst`'s distinguished tuple. Deterministic (first map in search order).
///
/// Distinguished values of `src` outside its active domain impose no mapping
/// obligation unless the same value is forced to two different targets, which
/// is an unsatisfiable point constraint.
pub fn find_homomorphism(
    src: &PointedInstance,
    dst: &PointedInstance,
    limits: &Limits,
) -> Result<Option<BTreeMap<Value, Value>>> {
    if src.arity() != dst.arity() {
        return Err(Error::Usage(
            "find_homomorphism: distinguished tuples have mismatched arities".into(),
        ));
    }
    let mut fixed: BTreeMap<Value, Value> = BTreeMap::new();
    let mut outside: BTreeMap<&Value, &Value> = BTreeMap::new();
    for (a, b) in src.point.iter().zip(dst.point.iter()) {
        if src.instance.adom_contains(a) {
            match fixed.get(a) {
                Some(prev) if prev != b => return Ok(None),
                _ => {
                    fixed.insert(a.clone(), b.clone());
                }
            }
        } else {
            match outside.get(a) {
                Some(&prev) if prev != b => {
                    return Err(Error::PointConstraint(format!(
                        "distinguished value {a} lies outside adom(src) and is required to \
                         map to both {prev} and {b}"
                    )))
                }
                _ => {
                    outside.insert(a, b);
                }
            }
        }
    }
    // In-domain distinguished values must map inside dst's active domain
    // (facts mention them, so any preserved image lies in adom(dst) anyway,
    // but a point target outside adom(dst) is simply unmatchable).
    for (a, b) in &fixed {
        if !dst.instance.adom_contains(b) && src.instance.degree(a) > 0 {
            return Ok(None);
        }
    }
    let homs = homomorphisms(&src.instance, &dst.instance, &fixed, true, limits)?;
    Ok(homs.into_iter().next())
}

/// The canonical instance of a CQ: variables become values, atoms become
/// facts, the distinguished tuple is the answer tuple.
pub fn canonical_instance(q: &ConjunctiveQuery) -> PointedInstance {
    let facts = q.atoms().iter().map(|a| {
        Fact::new(
            a.symbol.clone(),
            a.vars.iter().map(|v| Value::atom(v.clone())).collect(),
        )
    });
    let instance =
        Instance::from_facts(q.schema().clone(), facts).expect("CQ validated against its schema");
    let point = q.answer_vars().iter().map(|v| Value::atom(v.clone())).collect();
    PointedInstance::new(instance, point)
}

/// The canonical CQ of a pointed instance: one variable per value, one atom
/// per fact, answer variables for the distinguished tuple.
///
/// Requires a non-empty active domain containing the (repeat-free)
/// distinguished tuple; diversify first if the tuple has repeats.
pub fn canonical_cq(p: &PointedInstance) -> Result<ConjunctiveQuery> {
    if p.instance.adom().is_empty() {
        return Err(Error::Precondition(
            "canonical_cq: empty active domain".into(),
        ));
    }
    let mut seen: BTreeSet<&Value> = BTreeSet::new();
    for v in &p.point {
        if !p.instance.adom_contains(v) {
            return Err(Error::Precondition(format!(
                "canonical_cq: distinguished value {v} not in the active domain"
            )));
        }
        if !seen.insert(v) {
            return Err(Error::Precondition(format!(
                "canonical_cq: repeated distinguished value {v} (diversify first)"
            )));
        }
    }
    let var_of = |v: &Value| -> String {
        format!("v{}", p.instance.adom_position(v).expect("checked above"))
    };
    let atoms = p
        .instance
        .facts()
        .map(|f| QueryAtom {
            symbol: f.symbol.clone(),
            vars: f.args.iter().map(var_of).collect(),
        })
        .collect();
    let answer_vars: Vec<String> = p.point.iter().map(var_of).collect();
    ConjunctiveQuery::new(p.instance.schema().clone(), answer_vars, atoms)
}

/// Evaluates a CQ: the set of answer tuples `q(I)`, obtained by enumerating
/// all homomorphisms from the canonical instance and projecting to the
/// answer variables. Deterministic order.
pub fn evaluate_cq(
    q: &ConjunctiveQuery,
    instance: &Instance,
    limits: &Limits,
) -> Result<IndexSet<Vec<Value>>> {
    let canon = canonical_instance(q);
    let homs = homomorphisms(&canon.instance, instance, &BTreeMap::new(), false, limits)?;
    let mut answers = IndexSet::new();
    for h in homs {
        let tuple: Vec<Value> = q
            .answer_vars()
            .iter()
            .map(|v| h[&Value::atom(v.clone())].clone())
            .collect();
        answers.insert(tuple);
    }
    Ok(answers)
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the fact file format: one `R(a,b).` per line, `#` comments, and an
/// optional `@point a, b` header. The schema is inferred from the facts;
/// inconsistent arities for a symbol are a parse error.
pub fn parse_fact_file(text: &str) -> Result<PointedInstance> {
    let mut schema = Schema::new();
    let mut facts: Vec<Fact> = Vec::new();
    let mut point: Option<Vec<Value>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix("@point") {
            if point.is_some() {
                return Err(err("duplicate @point header".into()));
            }
            let values: Vec<Value> = rest
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    if is_identifier(s) {
                        Ok(Value::atom(s))
                    } else {
                        Err(err(format!("invalid value token {s:?}")))
                    }
                })
                .collect::<Result<_>>()?;
            point = Some(values);
            continue;
        }
        let body = line
            .strip_suffix('.')
            .ok_or_else(|| err("fact line must end with '.'".into()))?
            .trim();
        let open = body
            .find('(')
            .ok_or_else(|| err("expected '(' in fact".into()))?;
        let close = body
            .rfind(')')
            .ok_or_else(|| err("expected ')' in fact".into()))?;
        if close != body.len() - 1 || close < open {
            return Err(err("malformed fact".into()));
        }
        let symbol = body[..open].trim();
        if !is_identifier(symbol) {
            return Err(err(format!("invalid symbol {symbol:?}")));
        }
        let args: Vec<Value> = body[open + 1..close]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                if is_identifier(s) {
                    Ok(Value::atom(s))
                } else {
                    Err(err(format!("invalid value token {s:?}")))
                }
            })
            .collect::<Result<_>>()?;
        if args.is_empty() {
            return Err(err("facts must have at least one argument".into()));
        }
        if let Some(a) = schema.arity(symbol) {
            if a != args.len() {
                return Err(err(format!(
                    "symbol {symbol} used with arities {a} and {}",
                    args.len()
                )));
            }
        } else {
            schema.add(symbol, args.len()).map_err(|e| err(e.to_string()))?;
        }
        facts.push(Fact::new(symbol, args));
    }
    let instance = Instance::from_facts(schema, facts)?;
    Ok(PointedInstance::new(instance, point.unwrap_or_default()))
}
