//! EL/ELI/EL⊥/ELI⊥ concepts as a hash-consed DAG, extensions, simulations
//! with distinguishing-concept extraction, characteristic concepts,
//! definability, and L-totality.
//!
//! Concepts live in a process-global intern table: structurally identical
//! subtrees share one node, so the *succinct* size of a concept (distinct
//! reachable nodes) can be exponentially smaller than its tree size.
//! Conjunctions are canonicalized (flattened, deduplicated, sorted, ⊤
//! dropped), which makes concept equality a pointer comparison.

use crate::error::{Error, Result};
use crate::relational::{Fact, Instance, PointedInstance, Schema, Value};
use crate::Limits;
use itertools::Itertools;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// The four supported DL dialects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dialect {
    El,
    Eli,
    ElBot,
    EliBot,
}

impl Dialect {
    /// Inverse roles admitted?
    pub fn inverses(self) -> bool {
        matches!(self, Dialect::Eli | Dialect::EliBot)
    }

    /// ⊥ admitted?
    pub fn bottom(self) -> bool {
        matches!(self, Dialect::ElBot | Dialect::EliBot)
    }

    pub const ALL: [Dialect; 4] = [Dialect::El, Dialect::Eli, Dialect::ElBot, Dialect::EliBot];

    pub fn name(self) -> &'static str {
        match self {
            Dialect::El => "EL",
            Dialect::Eli => "ELI",
            Dialect::ElBot => "ELbot",
            Dialect::EliBot => "ELIbot",
        }
    }

    pub fn parse(s: &str) -> Option<Dialect> {
        match s {
            "EL" => Some(Dialect::El),
            "ELI" => Some(Dialect::Eli),
            "ELbot" => Some(Dialect::ElBot),
            "ELIbot" => Some(Dialect::EliBot),
            _ => None,
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A role: a role name or its inverse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Fwd(String),
    Inv(String),
}

impl Role {
    pub fn name(&self) -> &str {
        match self {
            Role::Fwd(n) | Role::Inv(n) => n,
        }
    }

    pub fn is_inverse(&self) -> bool {
        matches!(self, Role::Inv(_))
    }

    /// The role's edge relation in an instance: pairs (d, e) with an R-edge
    /// from d to e (reversed facts for inverse roles).
    pub fn edges<'a>(&'a self, instance: &'a Instance) -> impl Iterator<Item = (&'a Value, &'a Value)> {
        let inverse = self.is_inverse();
        instance.facts_of(self.name()).map(move |f| {
            if inverse {
                (&f.args[1], &f.args[0])
            } else {
                (&f.args[0], &f.args[1])
            }
        })
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Fwd(n) => write!(f, "{n}"),
            Role::Inv(n) => write!(f, "{n}-"),
        }
    }
}

/// The node payload of a concept.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConceptNode {
    Top,
    Bottom,
    Name(String),
    /// ≥ 2 children, sorted by node id, deduplicated, never nested.
    And(Vec<Concept>),
    Exists(Role, Concept),
}

/// A handle into the global hash-consed concept store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Concept(u32);

struct Store {
    nodes: Vec<ConceptNode>,
    index: HashMap<ConceptNode, u32>,
}

fn store() -> &'static Mutex<Store> {
    static STORE: OnceLock<Mutex<Store>> = OnceLock::new();
    STORE.get_or_init(|| {
        Mutex::new(Store {
            nodes: Vec::new(),
            index: HashMap::new(),
        })
    })
}

fn intern(node: ConceptNode) -> Concept {
    let mut s = store().lock().expect("concept store poisoned");
    if let Some(&id) = s.index.get(&node) {
        return Concept(id);
    }
    let id = u32::try_from(s.nodes.len()).expect("concept store full");
    s.nodes.push(node.clone());
    s.index.insert(node, id);
    Concept(id)
}

impl Concept {
    pub fn top() -> Concept {
        intern(ConceptNode::Top)
    }

    pub fn bottom() -> Concept {
        intern(ConceptNode::Bottom)
    }

    pub fn name(n: impl Into<String>) -> Concept {
        intern(ConceptNode::Name(n.into()))
    }

    pub fn exists(role: Role, child: Concept) -> Concept {
        intern(ConceptNode::Exists(role, child))
    }

    /// Canonicalized conjunction: flattens nested conjunctions, drops ⊤,
    /// deduplicates and sorts children; the empty conjunction is ⊤ and a
    /// singleton collapses to its child.
    pub fn and(children: impl IntoIterator<Item = Concept>) -> Concept {
        let mut flat: Vec<Concept> = Vec::new();
        let mut stack: Vec<Concept> = children.into_iter().collect();
        stack.reverse();
        while let Some(c) = stack.pop() {
            match c.node() {
                ConceptNode::Top => {}
                ConceptNode::And(inner) => {
                    for i in inner.into_iter().rev() {
                        stack.push(i);
                    }
                }
                _ => flat.push(c),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Concept::top(),
            1 => flat[0],
            _ => intern(ConceptNode::And(flat)),
        }
    }

    /// The node payload (children cloned; cheap for inspection).
    pub fn node(self) -> ConceptNode {
        store().lock().expect("concept store poisoned").nodes[self.0 as usize].clone()
    }

    fn children(self) -> Vec<Concept> {
        match self.node() {
            ConceptNode::And(cs) => cs,
            ConceptNode::Exists(_, c) => vec![c],
            _ => Vec::new(),
        }
    }

    /// All distinct nodes reachable from this concept, children before
    /// parents (node ids are topologically ordered by construction).
    pub fn reachable(self) -> Vec<Concept> {
        let mut seen: BTreeSet<Concept> = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(c) = stack.pop() {
            if seen.insert(c) {
                stack.extend(c.children());
            }
        }
        seen.into_iter().collect()
    }

    /// Number of distinct reachable nodes (structure-shared size).
    pub fn succinct_size(self) -> usize {
        self.reachable().len()
    }

    /// Fully expanded syntax-tree size (saturating; can be astronomically
    /// larger than the succinct size).
    pub fn tree_size(self) -> u128 {
        let mut memo: BTreeMap<Concept, u128> = BTreeMap::new();
        for c in self.reachable() {
            let size = match c.node() {
                ConceptNode::Top | ConceptNode::Bottom | ConceptNode::Name(_) => 1,
                ConceptNode::And(cs) => cs
                    .iter()
                    .map(|x| memo[x])
                    .fold(0u128, |a, b| a.saturating_add(b)),
                ConceptNode::Exists(_, c) => memo[&c].saturating_add(1),
            };
            memo.insert(c, size);
        }
        memo[&self]
    }

    /// Maximum nesting depth of existential restrictions.
    pub fn role_depth(self) -> usize {
        let mut memo: BTreeMap<Concept, usize> = BTreeMap::new();
        for c in self.reachable() {
            let depth = match c.node() {
                ConceptNode::Top | ConceptNode::Bottom | ConceptNode::Name(_) => 0,
                ConceptNode::And(cs) => cs.iter().map(|x| memo[x]).max().unwrap_or(0),
                ConceptNode::Exists(_, c) => memo[&c] + 1,
            };
            memo.insert(c, depth);
        }
        memo[&self]
    }

    /// Maximum number of existential restrictions in any conjunction
    /// (a bare ∃R.C counts as a singleton conjunction).
    pub fn outdegree(self) -> usize {
        let mut memo: BTreeMap<Concept, usize> = BTreeMap::new();
        for c in self.reachable() {
            let deg = match c.node() {
                ConceptNode::Top | ConceptNode::Bottom | ConceptNode::Name(_) => 0,
                ConceptNode::And(cs) => {
                    let own = cs
                        .iter()
                        .filter(|x| matches!(x.node(), ConceptNode::Exists(..)))
                        .count();
                    cs.iter().map(|x| memo[x]).max().unwrap_or(0).max(own)
                }
                ConceptNode::Exists(_, c) => memo[&c].max(1),
            };
            memo.insert(c, deg);
        }
        memo[&self]
    }

    /// True iff the concept stays inside the dialect (no inverse roles / ⊥
    /// unless admitted).
    pub fn in_dialect(self, dialect: Dialect) -> bool {
        self.reachable().iter().all(|c| match c.node() {
            ConceptNode::Bottom => dialect.bottom(),
            ConceptNode::Exists(r, _) => !r.is_inverse() || dialect.inverses(),
            _ => true,
        })
    }

    /// Renders the concept in the text syntax (`TOP`, `BOT`, `A`,
    /// `(C AND D)`, `EX R. C`, `EX R-. C`).
    pub fn to_text(self) -> String {
        match self.node() {
            ConceptNode::Top => "TOP".to_string(),
            ConceptNode::Bottom => "BOT".to_string(),
            ConceptNode::Name(n) => n,
            ConceptNode::And(cs) => {
                format!("({})", cs.iter().map(|c| c.to_text()).join(" AND "))
            }
            ConceptNode::Exists(r, c) => format!("EX {r}. {}", c.to_text()),
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses the concept text syntax.
pub fn parse_concept(input: &str) -> Result<Concept> {
    let mut tokens = tokenize(input)?;
    tokens.reverse(); // pop from the back
    let c = parse_term(&mut tokens)?;
    if let Some(t) = tokens.pop() {
        return Err(Error::Parse(format!("unexpected trailing token {t:?}")));
    }
    Ok(c)
}

fn tokenize(input: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                chars.next();
            }
            '(' | ')' | '.' => {
                tokens.push(c.to_string());
                chars.next();
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                // A role token may be suffixed with '-' for the inverse.
                if chars.peek() == Some(&'-') {
                    word.push('-');
                    chars.next();
                }
                tokens.push(word);
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
        }
    }
    Ok(tokens)
}

fn parse_term(tokens: &mut Vec<String>) -> Result<Concept> {
    let tok = tokens
        .pop()
        .ok_or_else(|| Error::Parse("unexpected end of concept".into()))?;
    match tok.as_str() {
        "TOP" => Ok(Concept::top()),
        "BOT" => Ok(Concept::bottom()),
        "EX" => {
            let role_tok = tokens
                .pop()
                .ok_or_else(|| Error::Parse("expected role after EX".into()))?;
            let role = if let Some(base) = role_tok.strip_suffix('-') {
                Role::Inv(base.to_string())
            } else {
                Role::Fwd(role_tok.clone())
            };
            if role.name().is_empty() {
                return Err(Error::Parse("empty role name".into()));
            }
            match tokens.pop() {
                Some(t) if t == "." => {}
                other => return Err(Error::Parse(format!("expected '.' after role, got {other:?}"))),
            }
            Ok(Concept::exists(role, parse_term(tokens)?))
        }
        "(" => {
            let mut children = vec![parse_term(tokens)?];
            loop {
                match tokens.pop() {
                    Some(t) if t == "AND" => children.push(parse_term(tokens)?),
                    Some(t) if t == ")" => break,
                    other => {
                        return Err(Error::Parse(format!(
                            "expected AND or ')' in conjunction, got {other:?}"
                        )))
                    }
                }
            }
            Ok(Concept::and(children))
        }
        name if !name.is_empty()
            && !name.ends_with('-')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') =>
        {
            Ok(Concept::name(name))
        }
        other => Err(Error::Parse(format!("unexpected token {other:?}"))),
    }
}

pub(crate) fn require_dl_schema(schema: &Schema) -> Result<()> {
    if !schema.is_dl_compatible() {
        return Err(Error::Dialect(
            "DL operations require a schema with only unary and binary symbols".into(),
        ));
    }
    Ok(())
}

/// The extension `C^I`, computed bottom-up over the shared DAG (each node
/// once). On the empty instance every extension is empty.
pub fn extension(c: Concept, instance: &Instance) -> Result<BTreeSet<Value>> {
    require_dl_schema(instance.schema())?;
    let adom: BTreeSet<Value> = instance.adom().iter().cloned().collect();
    let mut memo: BTreeMap<Concept, BTreeSet<Value>> = BTreeMap::new();
    for node in c.reachable() {
        let ext = match node.node() {
            ConceptNode::Top => adom.clone(),
            ConceptNode::Bottom => BTreeSet::new(),
            ConceptNode::Name(n) => instance
                .facts_of(&n)
                .filter(|f| f.args.len() == 1)
                .map(|f| f.args[0].clone())
                .collect(),
            ConceptNode::And(cs) => {
                let mut iter = cs.iter().map(|x| memo[x].clone());
                let first = iter.next().unwrap_or_default();
                iter.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
            }
            ConceptNode::Exists(role, child) => {
                let child_ext = &memo[&child];
                role.edges(instance)
                    .filter(|(_, e)| child_ext.contains(e))
                    .map(|(d, _)| d.clone())
                    .collect()
            }
        };
        memo.insert(node, ext);
    }
    Ok(memo.remove(&c).expect("root evaluated"))
}

/// Result of the maximal-simulation computation: the maximal L-simulation as
/// a relation, plus a separator concept for every excluded pair.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub relation: BTreeSet<(Value, Value)>,
    pub separators: BTreeMap<(Value, Value), Concept>,
    pub rounds: usize,
}

impl SimulationResult {
    pub fn contains(&self, d: &Value, e: &Value) -> bool {
        self.relation.contains(&(d.clone(), e.clone()))
    }
}

pub(crate) fn dialect_roles(schema: &Schema, dialect: Dialect) -> Vec<Role> {
    let mut roles: Vec<Role> = schema
        .binary_symbols()
        .map(|n| Role::Fwd(n.to_string()))
        .collect();
    if dialect.inverses() {
        roles.extend(schema.binary_symbols().map(|n| Role::Inv(n.to_string())));
    }
    roles
}

fn concept_names_of(instance: &Instance, d: &Value) -> BTreeSet<String> {
    instance
        .facts_with(d)
        .filter(|f| f.args.len() == 1)
        .map(|f| f.symbol.clone())
        .collect()
}

/// Computes the maximal L-simulation between two instances by the
/// elimination procedure: start from the concept-name-compatible pairs and
/// repeatedly delete pairs whose role obligations fail, reaching a fixpoint
/// in at most `|Δ^I| · |Δ^J|` rounds.
///
/// Every excluded pair (d, e) receives a *separator* concept `C_{d,e}` with
/// `d ∈ C^I` and `e ∉ C^J`: a concept name for round-0 exclusions, and
/// `∃R.⨅ C_{d',e'}` for deletions (the empty conjunction is ⊤). Separators
/// are hash-consed, with role depth ≤ `|Δ^I|·|Δ^J|` and outdegree ≤ `|Δ^J|`.
pub fn max_simulation(src: &Instance, dst: &Instance, dialect: Dialect) -> Result<SimulationResult> {
    require_dl_schema(src.schema())?;
    require_dl_schema(dst.schema())?;
    let schema = src.schema().union(dst.schema())?;
    let roles = dialect_roles(&schema, dialect);

    // Successor maps per role for both instances.
    let succ = |inst: &Instance| -> BTreeMap<Role, BTreeMap<Value, Vec<Value>>> {
        roles
            .iter()
            .map(|r| {
                let mut map: BTreeMap<Value, Vec<Value>> = BTreeMap::new();
                for (d, e) in r.edges(inst) {
                    map.entry(d.clone()).or_default().push(e.clone());
                }
                (r.clone(), map)
            })
            .collect()
    };
    let src_succ = succ(src);
    let dst_succ = succ(dst);

    let mut relation: BTreeSet<(Value, Value)> = BTreeSet::new();
    let mut separators: BTreeMap<(Value, Value), Concept> = BTreeMap::new();

    for d in src.adom() {
        let d_names = concept_names_of(src, d);
        for e in dst.adom() {
            let e_names = concept_names_of(dst, e);
            match d_names.difference(&e_names).next() {
                None => {
                    relation.insert((d.clone(), e.clone()));
                }
                Some(a) => {
                    separators.insert((d.clone(), e.clone()), Concept::name(a.clone()));
                }
            }
        }
    }

    let mut rounds = 0;
    loop {
        let mut deletions: Vec<((Value, Value), Concept)> = Vec::new();
        'pairs: for (d, e) in relation.iter() {
            for role in &roles {
                let d_succs = src_succ[role].get(d).map(Vec::as_slice).unwrap_or(&[]);
                for d2 in d_succs {
                    let e_succs = dst_succ[role].get(e).map(Vec::as_slice).unwrap_or(&[]);
                    let obligation_met = e_succs
                        .iter()
                        .any(|e2| relation.contains(&(d2.clone(), e2.clone())));
                    if !obligation_met {
                        // All pairs (d2, e2) were excluded in earlier rounds,
                        // so their separators exist.
                        let conj = Concept::and(e_succs.iter().map(|e2| {
                            separators[&(d2.clone(), e2.clone())]
                        }));
                        deletions.push(((d.clone(), e.clone()), Concept::exists(role.clone(), conj)));
                        continue 'pairs;
                    }
                }
            }
        }
        if deletions.is_empty() {
            break;
        }
        rounds += 1;
        for (pair, sep) in deletions {
            relation.remove(&pair);
            separators.insert(pair, sep);
        }
    }

    Ok(SimulationResult {
        relation,
        separators,
        rounds,
    })
}

/// `(I, d) ⪯_L (J, e)` for arity-1 pointed instances.
///
/// Vacuously true when the source point lies outside its active domain (the
/// paper's special case); false when only the target point does.
pub fn simulates(p: &PointedInstance, q: &PointedInstance, dialect: Dialect) -> Result<bool> {
    if p.arity() != 1 || q.arity() != 1 {
        return Err(Error::Usage("simulates requires arity-1 points".into()));
    }
    let d = &p.point[0];
    if !p.instance.adom_contains(d) {
        return Ok(true);
    }
    let e = &q.point[0];
    if !q.instance.adom_contains(e) {
        return Ok(false);
    }
    Ok(max_simulation(&p.instance, &q.instance, dialect)?.contains(d, e))
}

/// The characteristic concept `C^I_{L,i}(d)`:
/// level 0 is `⊤ ⊓ ⨅{A | d ∈ A^I}`, level i+1 adds `∃R.C^I_{L,i}(e)` for
/// every dialect role R and R-successor e of d. Memoized per (value, level),
/// so the DAG has at most `|Δ^I| · (depth+1)` distinct nodes.
pub fn characteristic_concept(
    instance: &Instance,
    d: &Value,
    depth: usize,
    dialect: Dialect,
) -> Result<Concept> {
    require_dl_schema(instance.schema())?;
    if !instance.adom_contains(d) {
        return Err(Error::Precondition(format!(
            "characteristic_concept: {d} not in the active domain"
        )));
    }
    let roles = dialect_roles(instance.schema(), dialect);
    let mut succ: BTreeMap<(Role, Value), Vec<Value>> = BTreeMap::new();
    for r in &roles {
        for (a, b) in r.edges(instance) {
            succ.entry((r.clone(), a.clone())).or_default().push(b.clone());
        }
    }

    let mut memo: BTreeMap<(Value, usize), Concept> = BTreeMap::new();
    // Level 0 for all values.
    for v in instance.adom() {
        let names = concept_names_of(instance, v);
        memo.insert(
            (v.clone(), 0),
            Concept::and(names.into_iter().map(Concept::name)),
        );
    }
    for level in 1..=depth {
        for v in instance.adom() {
            let mut conjuncts = vec![memo[&(v.clone(), 0)]];
            for r in &roles {
                if let Some(targets) = succ.get(&(r.clone(), v.clone())) {
                    for e in targets {
                        conjuncts.push(Concept::exists(
                            r.clone(),
                            memo[&(e.clone(), level - 1)],
                        ));
                    }
                }
            }
            memo.insert((v.clone(), level), Concept::and(conjuncts));
        }
    }
    Ok(memo[&(d.clone(), depth)])
}

/// The universal one-point instance `I_⊥` over a schema: a single value
/// carrying every concept name and a reflexive loop for every role name.
pub fn universal_instance(schema: &Schema) -> Result<PointedInstance> {
    require_dl_schema(schema)?;
    let u = Value::atom("u");
    let mut facts = Vec::new();
    for (symbol, arity) in schema.symbols() {
        facts.push(Fact::new(symbol, vec![u.clone(); arity]));
    }
    Ok(PointedInstance::new(
        Instance::from_facts(schema.clone(), facts)?,
        vec![u],
    ))
}

/// L-totality of a value: `d` satisfies every L-concept iff the universal
/// one-point instance simulates into `(I, d)`.
pub fn is_l_total(instance: &Instance, d: &Value, dialect: Dialect) -> Result<bool> {
    if !instance.adom_contains(d) {
        return Err(Error::Precondition(format!(
            "is_l_total: {d} not in the active domain"
        )));
    }
    let universal = universal_instance(instance.schema())?;
    simulates(
        &universal,
        &PointedInstance::new(instance.clone(), vec![d.clone()]),
        dialect,
    )
}

/// Outcome of a definability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Definability {
    Definable(Concept),
    Undefinable,
}

/// Decides whether a value set `X` is L-definable in `I` and, if so, returns
/// a concept `C` with `C^I = X` (verified before returning).
///
/// Construction: `X = ∅` with ⊥ allowed is `⊥`; otherwise form the product
/// `(P, d̄) = ∏_{d∈X}(I, d)` — for `X = ∅` without ⊥ the empty product is
/// taken to be the universal one-point instance `I_⊥` — and test
/// `(P, d̄) ⪯ (I, e)` for every `e ∉ X`: any hit means undefinable, else the
/// conjunction of the separators `C_{d̄,e}` defines `X`.
pub fn definable_concept(
    instance: &Instance,
    x: &BTreeSet<Value>,
    dialect: Dialect,
    limits: &Limits,
) -> Result<Definability> {
    require_dl_schema(instance.schema())?;
    for v in x {
        if !instance.adom_contains(v) {
            return Err(Error::Precondition(format!(
                "definable_concept: {v} not in the active domain"
            )));
        }
    }
    if x.is_empty() && dialect.bottom() {
        return Ok(Definability::Definable(Concept::bottom()));
    }

    let outside: Vec<&Value> = instance.adom().iter().filter(|e| !x.contains(e)).collect();
    if outside.is_empty() {
        // X is the whole active domain: ⊤ defines it.
        return Ok(Definability::Definable(Concept::top()));
    }

    let product = if x.is_empty() {
        universal_instance(instance.schema())?
    } else {
        // The product point satisfies exactly the concepts common to all
        // operand points, so an operand that some other kept operand
        // simulates into is redundant: reduce X to a ⪯-antichain first.
        // The reduced product is ⪯-equivalent to the full one, and both the
        // simulation test and the separator concepts below only depend on
        // the ⪯-class.
        let sim_ii = max_simulation(instance, instance, dialect)?;
        let mut x_min: Vec<Value> = Vec::new();
        'cand: for d in instance.order_values(x) {
            for kept in &x_min {
                if sim_ii.contains(kept, &d) {
                    continue 'cand;
                }
            }
            x_min.retain(|kept| !sim_ii.contains(&d, kept));
            x_min.push(d);
        }
        let operands: Vec<PointedInstance> = x_min
            .into_iter()
            .map(|d| PointedInstance::new(instance.clone(), vec![d]))
            .collect();
        crate::relational::direct_product(&operands, limits)?
    };

    let point = product.point[0].clone();
    if !product.instance.adom_contains(&point) {
        // The product point has no facts: it simulates into everything, so
        // no concept separates X from the rest.
        return Ok(Definability::Undefinable);
    }
    let sim = max_simulation(&product.instance, instance, dialect)?;
    let mut separators = Vec::new();
    for e in outside {
        if sim.contains(&point, e) {
            return Ok(Definability::Undefinable);
        }
        separators.push(sim.separators[&(point.clone(), e.clone())]);
    }
    let concept = Concept::and(separators);
    let ext = extension(concept, instance)?;
    if &ext != x {
        return Err(Error::Invariant(format!(
            "definable_concept: constructed concept has extension {{{}}}, expected {{{}}}",
            ext.iter().join(","),
            x.iter().join(",")
        )));
    }
    Ok(Definability::Definable(concept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{Instance, Schema};

    fn inst(facts: &[(&str, &[&str])]) -> Instance {
        let mut schema = Schema::new();
        for (sym, args) in facts {
            schema.add(*sym, args.len()).unwrap();
        }
        Instance::from_facts(
            schema,
            facts.iter().map(|(sym, args)| {
                Fact::new(*sym, args.iter().map(|a| Value::atom(*a)).collect())
            }),
        )
        .unwrap()
    }

    fn ex(role: &str, c: Concept) -> Concept {
        Concept::exists(Role::Fwd(role.to_string()), c)
    }

    #[test]
    fn extension_examples() {
        let i = inst(&[("A", &["a"])]);
        assert_eq!(
            extension(Concept::top(), &i).unwrap(),
            [Value::atom("a")].into_iter().collect()
        );

        let edge = inst(&[("R", &["a", "b"])]);
        let rr = ex("R", ex("R", Concept::top()));
        assert!(extension(rr, &edge).unwrap().is_empty());

        let inv = Concept::exists(Role::Inv("R".into()), Concept::top());
        assert_eq!(
            extension(inv, &edge).unwrap(),
            [Value::atom("b")].into_iter().collect()
        );

        // Empty instance: everything empty, even ⊤.
        let empty = Instance::empty(Schema::with_symbols([("A", 1)]).unwrap());
        assert!(extension(Concept::top(), &empty).unwrap().is_empty());

        // Arity-3 schema is rejected.
        let tern = inst(&[("T", &["a", "b", "c"])]);
        assert!(matches!(
            extension(Concept::top(), &tern),
            Err(Error::Dialect(_))
        ));
    }

    #[test]
    fn concept_canonicalization_and_sizes() {
        let a = Concept::name("A");
        let b = Concept::name("B");
        assert_eq!(Concept::and([a, b]), Concept::and([b, a, a, Concept::top()]));
        assert_eq!(Concept::and([a]), a);
        assert_eq!(Concept::and(Vec::<Concept>::new()), Concept::top());
        // Nested conjunctions flatten.
        assert_eq!(
            Concept::and([a, Concept::and([b, Concept::name("C")])]),
            Concept::and([a, b, Concept::name("C")])
        );

        // Structure sharing: a deep doubling tower has linear succinct size
        // but exponential tree size.
        let mut c = Concept::name("A");
        for _ in 0..20 {
            c = Concept::and([ex("R", c), ex("S", c)]);
        }
        assert!(c.succinct_size() <= 90);
        assert!(c.tree_size() > 1_000_000);
        assert_eq!(c.role_depth(), 20);
        assert_eq!(c.outdegree(), 2);
    }

    #[test]
    fn concept_text_roundtrip() {
        for text in [
            "TOP",
            "BOT",
            "A",
            "(A AND B)",
            "EX R. TOP",
            "EX R-. (A AND EX S. B)",
        ] {
            let c = parse_concept(text).unwrap();
            let printed = c.to_text();
            assert_eq!(parse_concept(&printed).unwrap(), c);
        }
        assert!(parse_concept("EX . TOP").is_err());
        assert!(parse_concept("(A AND)").is_err());
        assert!(parse_concept("A B").is_err());
    }

    #[test]
    fn simulation_examples() {
        // Diagonal on any instance.
        let c = inst(&[("R", &["a", "b"]), ("R", &["b", "c"]), ("R", &["c", "a"])]);
        let sim = max_simulation(&c, &c, Dialect::Eli).unwrap();
        for v in c.adom() {
            assert!(sim.contains(v, v));
        }

        // Bidirected pair ⪯_ELI 3-cycle at (a, a).
        let pair = inst(&[("R", &["a", "b"]), ("R", &["b", "a"])]);
        let sim = max_simulation(&pair, &c, Dialect::Eli).unwrap();
        assert!(sim.contains(&Value::atom("a"), &Value::atom("a")));

        // ({R(c,c)}, c) ⪯̸_EL ({R(a,b)}, a); separator semantically
        // ∃R.∃R.⊤.
        let loopy = inst(&[("R", &["c", "c"])]);
        let edge = inst(&[("R", &["a", "b"])]);
        let sim = max_simulation(&loopy, &edge, Dialect::El).unwrap();
        assert!(!sim.contains(&Value::atom("c"), &Value::atom("a")));
        let sep = sim.separators[&(Value::atom("c"), Value::atom("a"))];
        assert!(extension(sep, &loopy).unwrap().contains(&Value::atom("c")));
        assert!(!extension(sep, &edge).unwrap().contains(&Value::atom("a")));
    }

    #[test]
    fn simulates_examples() {
        let edge = inst(&[("R", &["a", "b"])]);
        let loopy = inst(&[("R", &["c", "c"])]);
        let p = PointedInstance::new(edge.clone(), vec![Value::atom("a")]);
        assert!(simulates(&p, &p, Dialect::El).unwrap());

        // Out-of-domain source point: vacuously true.
        let out = PointedInstance::new(edge.clone(), vec![Value::atom("zzz")]);
        assert!(simulates(&out, &p, Dialect::Eli).unwrap());

        // ({R(a,b)}, a) ⪯_EL ({R(c,c)}, c).
        let q = PointedInstance::new(loopy, vec![Value::atom("c")]);
        assert!(simulates(&p, &q, Dialect::El).unwrap());
        assert!(!simulates(&q, &p, Dialect::El).unwrap());
    }

    #[test]
    fn characteristic_examples() {
        // Depth 0, no names: ⊤.
        let edge = inst(&[("R", &["a", "b"])]);
        let c0 = characteristic_concept(&edge, &Value::atom("b"), 0, Dialect::El).unwrap();
        assert_eq!(c0, Concept::top());

        // Depth 1 at a: semantically ⊤ ⊓ ∃R.⊤ (canonicalized to ∃R.⊤).
        let c1 = characteristic_concept(&edge, &Value::atom("a"), 1, Dialect::El).unwrap();
        assert_eq!(c1, ex("R", Concept::top()));

        // Self-satisfaction at all depths.
        let c = inst(&[("R", &["a", "b"]), ("R", &["b", "c"]), ("R", &["c", "a"]), ("A", &["a"])]);
        for d in c.adom() {
            if d.component(0).is_ok() {
                continue;
            }
            for k in 0..=4 {
                for dialect in Dialect::ALL {
                    let ck = characteristic_concept(&c, d, k, dialect).unwrap();
                    assert!(extension(ck, &c).unwrap().contains(d));
                }
            }
        }
    }

    #[test]
    fn totality_examples() {
        let total = inst(&[("A", &["d"]), ("R", &["d", "d"])]);
        assert!(is_l_total(&total, &Value::atom("d"), Dialect::El).unwrap());
        assert!(is_l_total(&total, &Value::atom("d"), Dialect::Eli).unwrap());

        let edge = inst(&[("R", &["a", "b"])]);
        assert!(!is_l_total(&edge, &Value::atom("a"), Dialect::El).unwrap());
        assert!(!is_l_total(&edge, &Value::atom("b"), Dialect::El).unwrap());
    }

    #[test]
    fn definability_examples() {
        let limits = Limits::default();
        // ∅ is EL-definable in {R(a,b)} (e.g. by ∃R.∃R.⊤).
        let edge = inst(&[("R", &["a", "b"])]);
        match definable_concept(&edge, &BTreeSet::new(), Dialect::El, &limits).unwrap() {
            Definability::Definable(c) => {
                assert!(extension(c, &edge).unwrap().is_empty());
            }
            Definability::Undefinable => panic!("∅ should be EL-definable in an edge"),
        }

        // ∅ is not ELI-definable in {R(a,b), R(c,c)} (c is ELI-total).
        let two = inst(&[("R", &["a", "b"]), ("R", &["c", "c"])]);
        assert_eq!(
            definable_concept(&two, &BTreeSet::new(), Dialect::Eli, &limits).unwrap(),
            Definability::Undefinable
        );

        // ... but trivially EL⊥-definable by ⊥.
        assert_eq!(
            definable_concept(&two, &BTreeSet::new(), Dialect::ElBot, &limits).unwrap(),
            Definability::Definable(Concept::bottom())
        );

        // Non-empty definable set: {a} in {A(a), B(b)}.
        let ab = inst(&[("A", &["a"]), ("B", &["b"])]);
        let x: BTreeSet<Value> = [Value::atom("a")].into_iter().collect();
        match definable_concept(&ab, &x, Dialect::El, &limits).unwrap() {
            Definability::Definable(c) => assert_eq!(extension(c, &ab).unwrap(), x),
            Definability::Undefinable => panic!("{{a}} should be definable"),
        }

        // Whole domain: ⊤.
        let all: BTreeSet<Value> = edge.adom().iter().cloned().collect();
        assert_eq!(
            definable_concept(&edge, &all, Dialect::El, &limits).unwrap(),
            Definability::Definable(Concept::top())
        );
    }
}
