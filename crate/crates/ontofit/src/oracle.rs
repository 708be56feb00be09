//! Brute-force reference implementations and named instance families, for
//! property testing and regression fixtures.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;

use crate::concepts::{Concept, Dialect};
use crate::dl_fitting::{satisfies_ci, ConceptInclusion};
use crate::relational::{Fact, Instance, QueryAtom, Schema, Value};
use crate::tgd::{model_check, parse_tgd, Tgd, TgdClass, TgdOntology};
use crate::{Error, Limits, Result};

/// All class-TGDs over the schema within `(max body atoms, max head atoms,
/// max vars)`, up to canonical variable renaming, in deterministic order:
/// by (body atoms, head atoms, var count), then lexicographically.
pub fn enumerate_tgds(
    schema: &Schema,
    class: TgdClass,
    budget: (usize, usize, usize),
) -> Result<Vec<Tgd>> {
    let (max_body, max_head, max_vars) = budget;
    if max_body == 0 || max_head == 0 || max_vars == 0 || schema.is_empty() {
        return Ok(Vec::new());
    }
    let vars: Vec<String> = (1..=max_vars).map(|i| format!("v{i}")).collect();
    let mut pool: Vec<QueryAtom> = Vec::new();
    for (sym, ar) in schema.symbols() {
        for args in (0..ar).map(|_| vars.iter()).multi_cartesian_product() {
            pool.push(QueryAtom::new(sym, args.into_iter().cloned().collect::<Vec<_>>()));
        }
    }

    let mut seen: HashSet<String> = HashSet::new();
    let mut out: Vec<Tgd> = Vec::new();
    for body_size in 1..=max_body.min(pool.len()) {
        for body in pool.iter().combinations(body_size) {
            let body: Vec<QueryAtom> = body.into_iter().cloned().collect();
            for head_size in 1..=max_head.min(pool.len()) {
                for head in pool.iter().combinations(head_size) {
                    let head: Vec<QueryAtom> = head.into_iter().cloned().collect();
                    let tgd = Tgd::new(schema.clone(), body.clone(), head)?;
                    if !class.admits(tgd.classify()) {
                        continue;
                    }
                    if seen.insert(tgd_key(&tgd)) {
                        out.push(tgd);
                    }
                }
            }
        }
    }
    out.sort_by_key(|t| {
        (
            t.body().len(),
            t.head().len(),
            var_count(t),
            t.to_text(),
        )
    });
    Ok(out)
}

fn var_count(t: &Tgd) -> usize {
    let mut vars: HashSet<&str> = HashSet::new();
    for atom in t.body().iter().chain(t.head()) {
        vars.extend(atom.vars.iter().map(String::as_str));
    }
    vars.len()
}

/// Canonical key of a TGD up to bijective variable renaming.
pub(crate) fn tgd_key(t: &Tgd) -> String {
    let mut vars: Vec<&str> = Vec::new();
    for atom in t.body().iter().chain(t.head()) {
        for v in &atom.vars {
            if !vars.contains(&v.as_str()) {
                vars.push(v);
            }
        }
    }
    let index: BTreeMap<&str, usize> =
        vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = vars.len();
    let mut best: Option<String> = None;
    for perm in (0..n).permutations(n) {
        let rename = |v: &str| format!("v{}", perm[index[v]]);
        let side = |atoms: &[QueryAtom]| {
            let mut xs: Vec<String> = atoms
                .iter()
                .map(|a| format!("{}({})", a.symbol, a.vars.iter().map(|v| rename(v)).join(",")))
                .collect();
            xs.sort();
            xs.join(";")
        };
        let key = format!("{}=>{}", side(t.body()), side(t.head()));
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap_or_default()
}

/// The first enumerated class-TGD (smallest under the enumeration order)
/// that fits `(P, N)`: true in every positive, false in every negative.
pub fn brute_force_fit(
    p: &[Instance],
    n: &[Instance],
    class: TgdClass,
    budget: (usize, usize, usize),
    limits: &Limits,
) -> Result<Option<Tgd>> {
    let schema = Schema::union_all(p.iter().chain(n.iter()).map(|i| i.schema()))?;
    'cand: for tgd in enumerate_tgds(&schema, class, budget)? {
        for i in p {
            if !model_check(i, &tgd, limits)? {
                continue 'cand;
            }
        }
        for j in n {
            if model_check(j, &tgd, limits)? {
                continue 'cand;
            }
        }
        return Ok(Some(tgd));
    }
    Ok(None)
}

/// All dialect concepts over the schema of role depth ≤ `depth` built from
/// conjunctions of at most `width` atoms/existentials per level, in
/// deterministic order. `⊤` is always included; `⊥` when the dialect has it.
pub fn enumerate_concepts(
    schema: &Schema,
    dialect: Dialect,
    depth: usize,
    width: usize,
) -> Vec<Concept> {
    let roles = crate::concepts::dialect_roles(schema, dialect);
    let mut base: Vec<Concept> = vec![Concept::top()];
    if dialect.bottom() {
        base.push(Concept::bottom());
    }
    let mut names: Vec<&str> = schema.unary_symbols().collect();
    names.sort_unstable();
    base.extend(names.into_iter().map(Concept::name));

    // `level` holds all concepts of role depth ≤ current; each step wraps
    // the previous level in existentials and closes under ≤ width-ary
    // conjunction of the building blocks.
    let mut level = base.clone();
    for _ in 0..depth {
        let mut blocks: indexmap::IndexSet<Concept> = base.iter().copied().collect();
        for role in &roles {
            for &c in &level {
                blocks.insert(Concept::exists(role.clone(), c));
            }
        }
        let mut next: indexmap::IndexSet<Concept> = indexmap::IndexSet::new();
        for k in 1..=width.min(blocks.len()) {
            for combo in blocks.iter().combinations(k) {
                next.insert(Concept::and(combo.into_iter().copied()));
            }
        }
        level = next.into_iter().collect();
    }
    level
}

/// The first concept inclusion (in enumeration order) that fits `(P, N)`.
/// Only inclusions with non-`⊤` left-hand side are candidates: an inclusion
/// with tautological left-hand side has an empty TGD body and falls outside
/// the dependency languages this oracle backs.
pub fn brute_force_dl_fit(
    p: &[Instance],
    n: &[Instance],
    dialect: Dialect,
    budget: (usize, usize),
) -> Result<Option<ConceptInclusion>> {
    let schema = Schema::union_all(p.iter().chain(n.iter()).map(|i| i.schema()))?;
    let (depth, width) = budget;
    let concepts = enumerate_concepts(&schema, dialect, depth, width);
    // Precompute every concept's extension on every instance once;
    // `lhs ⊑ rhs` then holds in an instance iff ext(lhs) ⊆ ext(rhs).
    let exts = |instances: &[Instance]| -> Result<Vec<BTreeMap<Concept, std::collections::BTreeSet<Value>>>> {
        instances
            .iter()
            .map(|i| {
                let aligned = i.with_schema(schema.clone())?;
                concepts
                    .iter()
                    .map(|&c| Ok((c, crate::concepts::extension(c, &aligned)?)))
                    .collect()
            })
            .collect()
    };
    let p_exts = exts(p)?;
    let n_exts = exts(n)?;
    for &lhs in &concepts {
        if lhs == Concept::top() {
            continue;
        }
        for &rhs in &concepts {
            let sat = |e: &BTreeMap<Concept, std::collections::BTreeSet<Value>>| {
                e[&lhs].is_subset(&e[&rhs])
            };
            if p_exts.iter().all(&sat) && !n_exts.iter().any(&sat) {
                let ci = ConceptInclusion::new(lhs, rhs);
                debug_assert!(p.iter().all(|i| satisfies_ci(i, &ci).unwrap_or(false)));
                return Ok(Some(ci));
            }
        }
    }
    Ok(None)
}

/// The lasso instance `L_m`: values `a0..a{2m-1}`, an `R`-path from `a0`
/// that closes into a cycle at `a_m`, and `P(a_m)`. Value names carry the
/// `m` suffix so lassos of different sizes stay disjoint.
fn lasso(m: usize) -> Result<Instance> {
    let v = |i: usize| Value::atom(format!("a{i}_{m}"));
    let mut schema = Schema::new();
    schema.add("R", 2)?;
    schema.add("P", 1)?;
    let mut facts = Vec::new();
    for i in 0..(2 * m - 1) {
        facts.push(Fact::new("R", vec![v(i), v(i + 1)]));
    }
    facts.push(Fact::new("R", vec![v(2 * m - 1), v(m)]));
    facts.push(Fact::new("P", vec![v(m)]));
    Instance::from_facts(schema, facts)
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// The GTGD lower-bound instance `I_n`: the union over the first `n` primes
/// `p` of `L_p ∪ {A(a0_p)}`.
pub fn gen_lasso(n: usize) -> Result<Instance> {
    if n == 0 || n > PRIMES.len() {
        return Err(Error::Usage(format!(
            "gen_lasso: n must be between 1 and {}",
            PRIMES.len()
        )));
    }
    let mut parts = Vec::new();
    let mut schema = Schema::new();
    schema.add("A", 1)?;
    for &p in &PRIMES[..n] {
        let l = lasso(p)?;
        let mut facts: Vec<Fact> = l.facts().cloned().collect();
        facts.push(Fact::new("A", vec![Value::atom(format!("a0_{p}"))]));
        parts.push(Instance::from_facts(l.schema().union(&schema)?, facts)?);
    }
    let schema = Schema::union_all(parts.iter().map(|i| i.schema()))?;
    let mut facts = Vec::new();
    for part in &parts {
        facts.extend(part.facts().cloned());
    }
    Instance::from_facts(schema, facts)
}

/// The IND lower-bound instance `I_n` over `S/2n` and `R/2n`: per group
/// `i ∈ [1, n]`, facts `S(ā_i)`, `R(b̄_i)`, `R(c̄_i)` where `ā_i` is a
/// tuple of `2n` fresh pairwise distinct values and `b̄_i` / `c̄_i` replace
/// position `2i-1` / `2i` with one further fresh value.
pub fn gen_ind_family(n: usize) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Usage("gen_ind_family: n must be ≥ 1".into()));
    }
    let mut schema = Schema::new();
    schema.add("S", 2 * n)?;
    schema.add("R", 2 * n)?;
    let mut facts = Vec::new();
    for i in 1..=n {
        let base: Vec<Value> = (1..=2 * n).map(|j| Value::atom(format!("a{i}_{j}"))).collect();
        let mut b = base.clone();
        b[2 * i - 2] = Value::atom(format!("b{i}"));
        let mut c = base.clone();
        c[2 * i - 1] = Value::atom(format!("c{i}"));
        facts.push(Fact::new("S", base));
        facts.push(Fact::new("R", b));
        facts.push(Fact::new("R", c));
    }
    Instance::from_facts(schema, facts)
}

/// A named artifact from the catalog of paper examples.
#[derive(Debug, Clone)]
pub enum Generated {
    Instance(Instance),
    /// A fitting instance: positive and negative examples.
    Fitting {
        pos: Vec<Instance>,
        neg: Vec<Instance>,
    },
    Ontology(TgdOntology),
    Tgd(Tgd),
}

fn binary_instance(pairs: &[(&str, &str)]) -> Result<Instance> {
    let mut schema = Schema::new();
    schema.add("R", 2)?;
    Instance::from_facts(
        schema,
        pairs
            .iter()
            .map(|(a, b)| Fact::new("R", vec![Value::atom(*a), Value::atom(*b)])),
    )
}

/// The catalog of named generators. `n` is required by `rho`, `lasso` and
/// `ind-family` and ignored otherwise.
pub fn gen_named(name: &str, n: Option<usize>) -> Result<Generated> {
    let need_n = || n.ok_or_else(|| Error::Usage(format!("generator {name} requires a size argument")));
    match name {
        // §2 example: P = {R(a,b), R(b,a)}, N a 3-cycle, N′ the bidirected
        // 3-cycle.
        "example1-P" => Ok(Generated::Instance(binary_instance(&[("a", "b"), ("b", "a")])?)),
        "example1-N" => Ok(Generated::Instance(binary_instance(&[
            ("a", "b"),
            ("b", "c"),
            ("c", "a"),
        ])?)),
        "example1-Nprime" => Ok(Generated::Instance(binary_instance(&[
            ("a", "b"),
            ("b", "c"),
            ("c", "a"),
            ("b", "a"),
            ("c", "b"),
            ("a", "c"),
        ])?)),
        "example1" => {
            let (Generated::Instance(p), Generated::Instance(n)) =
                (gen_named("example1-P", None)?, gen_named("example1-N", None)?)
            else {
                unreachable!()
            };
            Ok(Generated::Fitting { pos: vec![p], neg: vec![n] })
        }
        "example1-prime" => {
            let (Generated::Instance(p), Generated::Instance(n)) = (
                gen_named("example1-P", None)?,
                gen_named("example1-Nprime", None)?,
            ) else {
                unreachable!()
            };
            Ok(Generated::Fitting { pos: vec![p], neg: vec![n] })
        }
        // §4: P = {R(a,b)}, N = {R(a,a)} — fit in EL⊥ but not ELI.
        "bottom-example" => Ok(Generated::Fitting {
            pos: vec![binary_instance(&[("a", "b")])?],
            neg: vec![binary_instance(&[("a", "a")])?],
        }),
        // Full TGDs need conjunctive heads with several negative examples.
        "fullhead-example" => {
            let mut schema = Schema::new();
            schema.add("A", 1)?;
            schema.add("B1", 1)?;
            schema.add("B2", 1)?;
            let unary = |syms: &[&str]| -> Result<Instance> {
                Instance::from_facts(
                    schema.clone(),
                    syms.iter().map(|s| Fact::new(*s, vec![Value::atom("a")])),
                )
            };
            Ok(Generated::Fitting {
                pos: vec![unary(&["A", "B1", "B2"])?],
                neg: vec![unary(&["A", "B1"])?, unary(&["A", "B2"])?],
            })
        }
        // The bidirected pair I = {R(a,b), R(b,a)} and its FullTGD basis.
        "bidirected-pair" => Ok(Generated::Instance(binary_instance(&[("a", "b"), ("b", "a")])?)),
        "omega_I" => {
            let mut tgds = vec![
                parse_tgd("R(x,y) -> R(y,x)")?,
                parse_tgd("R(x,y), R(y,z), R(z,u) -> R(x,u)")?,
            ];
            // R(x,x) ∧ true(y) ∧ true(z) → R(y,z) with true(v) one of
            // R(u,v), R(v,u), u fresh per placeholder.
            for ty in ["R(u1,y)", "R(y,u1)"] {
                for tz in ["R(u2,z)", "R(z,u2)"] {
                    tgds.push(parse_tgd(&format!("R(x,x), {ty}, {tz} -> R(y,z)"))?);
                }
            }
            Ok(Generated::Ontology(TgdOntology::new(tgds)))
        }
        // ρ_n: a cycle of length n forces a loop.
        "rho" => {
            let n = need_n()?;
            if n == 0 {
                return Err(Error::Usage("rho: n must be ≥ 1".into()));
            }
            let mut body: Vec<String> = (1..n).map(|i| format!("R(x{i},x{})", i + 1)).collect();
            body.push(format!("R(x{n},x1)"));
            Ok(Generated::Tgd(parse_tgd(&format!(
                "{} -> R(x1,x1)",
                body.join(", ")
            ))?))
        }
        // J: the bidirected 3-clique (3-colorability template).
        "bidirected-3-clique" => {
            let mut pairs = Vec::new();
            for u in ["a", "b", "c"] {
                for v in ["a", "b", "c"] {
                    if u != v {
                        pairs.push((u, v));
                    }
                }
            }
            Ok(Generated::Instance(binary_instance(&pairs)?))
        }
        "lasso" => Ok(Generated::Instance(gen_lasso(need_n()?)?)),
        "ind-family" => Ok(Generated::Instance(gen_ind_family(need_n()?)?)),
        _ => Err(Error::Usage(format!("unknown generator name: {name}"))),
    }
}

/// Names accepted by `gen_named`, for help output.
pub const CATALOG: [&str; 13] = [
    "example1",
    "example1-P",
    "example1-N",
    "example1-Nprime",
    "example1-prime",
    "bottom-example",
    "fullhead-example",
    "bidirected-pair",
    "omega_I",
    "rho",
    "bidirected-3-clique",
    "lasso",
    "ind-family",
];
