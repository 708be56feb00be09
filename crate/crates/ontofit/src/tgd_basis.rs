//! Finite GTGD bases (with the pruned single-exponential variant) and IND
//! bases, plus a basis verification harness.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;

use crate::relational::{
    diversify, evaluate_cq, ConjunctiveQuery, Instance, PointedInstance, QueryAtom, Schema, Value,
};
use crate::tgd::{entails, model_check, Entailment, Tgd, TgdClass, TgdOntology};
use crate::{Error, Limits, Result};

/// Maximum arity for guarded-CQ enumeration: the canonical pool has ℓ
/// variables and bodies are deduped over ℓ! permutations.
const MAX_GTGD_ARITY: usize = 4;
/// Unpruned bodies range over all subsets of the atom pool; cap its size.
const MAX_ATOM_POOL: usize = 16;

/// Restricted growth strings of length `len`: canonical variable patterns
/// where the first occurrence order is 0, 1, 2, ...
pub(crate) fn growth_strings(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(len: usize, next: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for c in 0..=next {
            cur.push(c);
            rec(len, next.max(c + 1), cur, out);
            cur.pop();
        }
    }
    rec(len, 0, &mut cur, &mut out);
    out
}

/// Canonical key of a (body, answer-tuple) pair up to renaming of the
/// variable pool: minimum over pool permutations of the sorted atom list
/// plus the renamed answer tuple.
fn body_key(vars: &[String], body: &[QueryAtom], answers: &[String]) -> String {
    let m = vars.len();
    let index: BTreeMap<&str, usize> = vars.iter().map(|v| v.as_str()).enumerate().map(|(i, v)| (v, i)).collect();
    let mut best: Option<String> = None;
    for perm in (0..m).permutations(m) {
        let rename = |v: &str| format!("x{}", perm[index[v]] + 1);
        let mut atoms: Vec<String> = body
            .iter()
            .map(|a| format!("{}({})", a.symbol, a.vars.iter().map(|v| rename(v)).join(",")))
            .collect();
        atoms.sort();
        let key = format!(
            "{}|{}",
            atoms.join(";"),
            answers.iter().map(|v| rename(v)).join(",")
        );
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap_or_default()
}

/// The GTGD basis `Ω_H` of a non-empty set of instances: one guarded TGD
/// per guarded CQ `q(x̄)` over the schema (variables drawn from a pool of
/// size = maximum arity, bodies deduped up to renaming). If `q` is empty on
/// all of `H`, the head is the conjunction of all atoms over `x̄`; otherwise
/// the head is the canonical CQ of the diversified product of all answers
/// `{(I, ā) | I ∈ H, ā ∈ q(I)}`, with answer variables renamed to `x̄`.
///
/// With `pruned`, only bodies with at most `||H||+1` atoms are kept, where
/// `||H||` is the total fact count of `H`; the pruned set is still a basis.
pub fn gtgd_basis(h: &[Instance], pruned: bool, limits: &Limits) -> Result<TgdOntology> {
    if h.is_empty() {
        return Err(Error::Usage("gtgd_basis: empty instance list".into()));
    }
    let schema = Schema::union_all(h.iter().map(|i| i.schema()))?;
    let aligned: Vec<Instance> = h
        .iter()
        .map(|i| i.with_schema(schema.clone()))
        .collect::<Result<_>>()?;
    let ell = schema.max_arity();
    if ell == 0 {
        return Ok(TgdOntology::new([]));
    }
    if ell > MAX_GTGD_ARITY {
        return Err(Error::ResourceLimit(format!(
            "gtgd_basis: maximum arity {ell} exceeds the enumeration cap {MAX_GTGD_ARITY}"
        )));
    }
    let body_cap = h.iter().map(|i| i.fact_count()).sum::<usize>() + 1;

    let mut seen: HashSet<String> = HashSet::new();
    let mut out: Vec<Tgd> = Vec::new();
    for (guard_sym, guard_ar) in schema.symbols() {
        for pattern in growth_strings(guard_ar) {
            let m = pattern.iter().max().map_or(0, |c| c + 1);
            let vars: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
            let guard = QueryAtom::new(
                guard_sym,
                pattern.iter().map(|&c| vars[c].clone()).collect::<Vec<_>>(),
            );
            // Every atom over the pool; non-guard atoms are any subset.
            let mut pool: Vec<QueryAtom> = Vec::new();
            for (sym, ar) in schema.symbols() {
                for args in (0..ar).map(|_| vars.iter()).multi_cartesian_product() {
                    let atom = QueryAtom::new(sym, args.into_iter().cloned().collect::<Vec<_>>());
                    if atom != guard {
                        pool.push(atom);
                    }
                }
            }
            if !pruned && pool.len() > MAX_ATOM_POOL {
                return Err(Error::ResourceLimit(format!(
                    "gtgd_basis: unpruned enumeration over {} pool atoms exceeds the cap {MAX_ATOM_POOL}",
                    pool.len()
                )));
            }
            let max_extra = if pruned {
                (body_cap - 1).min(pool.len())
            } else {
                pool.len()
            };
            for extra in 0..=max_extra {
                for combo in pool.iter().combinations(extra) {
                    let mut body = vec![guard.clone()];
                    body.extend(combo.into_iter().cloned());
                    for answers in answer_tuples(&vars) {
                        if !seen.insert(body_key(&vars, &body, &answers)) {
                            continue;
                        }
                        if let Some(tgd) =
                            basis_rule(&schema, &aligned, &body, &answers, limits)?
                        {
                            if pruned {
                                debug_assert!(tgd.body().len() <= body_cap);
                            }
                            out.push(tgd);
                        }
                    }
                }
            }
        }
    }
    Ok(TgdOntology::new(out))
}

/// All repeat-free ordered answer tuples over the pool, including the empty
/// tuple (Boolean guarded CQs).
fn answer_tuples(vars: &[String]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for k in 1..=vars.len() {
        out.extend(vars.iter().cloned().permutations(k));
    }
    out
}

/// Builds the basis TGD for one guarded CQ, or `None` when the construction
/// degenerates to a trivially entailed rule (empty head).
fn basis_rule(
    schema: &Schema,
    h: &[Instance],
    body: &[QueryAtom],
    answers: &[String],
    limits: &Limits,
) -> Result<Option<Tgd>> {
    let q = ConjunctiveQuery::new(schema.clone(), answers.to_vec(), body.to_vec())?;
    let mut pointed: Vec<PointedInstance> = Vec::new();
    for inst in h {
        for tuple in evaluate_cq(&q, inst, limits)? {
            pointed.push(PointedInstance::new(inst.clone(), tuple));
        }
    }
    let head: Vec<QueryAtom> = if pointed.is_empty() {
        // Case 1: q is empty on all of H; head = every atom over the answer
        // variables. Unrepresentable when there are none.
        if answers.is_empty() {
            return Ok(None);
        }
        let mut atoms = Vec::new();
        for (sym, ar) in schema.symbols() {
            for args in (0..ar).map(|_| answers.iter()).multi_cartesian_product() {
                atoms.push(QueryAtom::new(sym, args.into_iter().cloned().collect::<Vec<_>>()));
            }
        }
        atoms
    } else {
        // Case 2: head = canonical CQ of the diversified product of all
        // answers, with the (repeat-free) diversified points renamed to x̄.
        let product = crate::relational::direct_product(&pointed, limits)?;
        let div = diversify(&product)?;
        let mut name_of: BTreeMap<Value, String> = BTreeMap::new();
        for (i, b) in div.point.iter().enumerate() {
            name_of.insert(b.clone(), answers[i].clone());
        }
        let mut fresh = 0usize;
        for v in div.instance.adom() {
            name_of.entry(v.clone()).or_insert_with(|| {
                fresh += 1;
                format!("z{fresh}")
            });
        }
        div.instance
            .facts()
            .map(|f| {
                QueryAtom::new(
                    f.symbol.clone(),
                    f.args.iter().map(|v| name_of[v].clone()).collect::<Vec<_>>(),
                )
            })
            .collect()
    };
    if head.is_empty() {
        return Ok(None);
    }
    let tgd = Tgd::new(schema.clone(), body.to_vec(), head)?;
    debug_assert!(tgd.classify().guarded);
    Ok(Some(tgd))
}

/// The set of all inclusion dependencies true in every instance of `H`:
/// bodies are single atoms with canonical variable patterns (set partitions
/// of the positions), heads fill each position with a body variable or a
/// canonically-named existential. At most `|S|²(2k)^{2k}` members.
pub fn ind_basis(h: &[Instance], limits: &Limits) -> Result<TgdOntology> {
    if h.is_empty() {
        return Err(Error::Usage("ind_basis: empty instance list".into()));
    }
    let schema = Schema::union_all(h.iter().map(|i| i.schema()))?;
    let aligned: Vec<Instance> = h
        .iter()
        .map(|i| i.with_schema(schema.clone()))
        .collect::<Result<_>>()?;
    let k = schema.max_arity();
    if k > limits.max_ind_arity {
        return Err(Error::ResourceLimit(format!(
            "ind_basis: maximum arity {k} exceeds the cap {}",
            limits.max_ind_arity
        )));
    }
    let mut out: Vec<Tgd> = Vec::new();
    for shape in enumerate_ind_shapes(&schema) {
        if aligned.iter().all(|inst| shape.holds_in(inst)) {
            out.push(shape.to_tgd(&schema));
        }
    }
    // The paper's counting bound on INDs over the schema.
    let s = schema.symbols().count() as u128;
    let bound = s * s * (2 * k as u128).pow(2 * k as u32);
    assert!(
        (out.len() as u128) <= bound.max(1),
        "IND basis size {} exceeds the bound {bound}",
        out.len()
    );
    Ok(TgdOntology::new(out))
}

/// Structural form of a candidate IND: body atom `body_sym` with the
/// canonical variable `pattern` (a restricted growth string over its
/// positions), head atom `head_sym` with each position a body variable or a
/// canonically-named existential.
pub(crate) struct IndShape {
    body_sym: String,
    pattern: Vec<usize>,
    head_sym: String,
    head: Vec<HeadPos>,
}

impl IndShape {
    pub(crate) fn to_tgd(&self, schema: &Schema) -> Tgd {
        let body = vec![QueryAtom::new(
            self.body_sym.clone(),
            self.pattern.iter().map(|&c| format!("x{}", c + 1)).collect::<Vec<_>>(),
        )];
        let head = vec![QueryAtom::new(
            self.head_sym.clone(),
            self.head
                .iter()
                .map(|pos| match pos {
                    HeadPos::Var(i) => format!("x{}", i + 1),
                    HeadPos::Ex(j) => format!("z{}", j + 1),
                })
                .collect::<Vec<_>>(),
        )];
        let tgd = Tgd::new(schema.clone(), body, head).expect("IND shape is always valid");
        debug_assert!(tgd.classify().ind);
        tgd
    }

    /// Direct satisfaction test, equivalent to `model_check` on `to_tgd`
    /// but without the generic homomorphism machinery: every fact matching
    /// the body pattern must have some head fact agreeing on the variable
    /// positions, with repeated existentials bound consistently.
    pub(crate) fn holds_in(&self, inst: &Instance) -> bool {
        let m = self.pattern.iter().max().map_or(0, |c| c + 1);
        let head_facts: Vec<_> = inst.facts_of(&self.head_sym).collect();
        'facts: for f in inst.facts_of(&self.body_sym) {
            let mut bind: Vec<Option<&Value>> = vec![None; m];
            for (pos, &c) in self.pattern.iter().enumerate() {
                match bind[c] {
                    None => bind[c] = Some(&f.args[pos]),
                    Some(v) if *v == f.args[pos] => {}
                    _ => continue 'facts,
                }
            }
            let matched = head_facts.iter().any(|g| {
                let mut ex: Vec<Option<&Value>> = vec![None; self.head.len()];
                self.head.iter().zip(&g.args).all(|(hp, a)| match hp {
                    HeadPos::Var(i) => bind[*i] == Some(a),
                    HeadPos::Ex(j) => match ex[*j] {
                        None => {
                            ex[*j] = Some(a);
                            true
                        }
                        Some(v) => v == a,
                    },
                })
            });
            if !matched {
                return false;
            }
        }
        true
    }
}

pub(crate) fn enumerate_ind_shapes(schema: &Schema) -> Vec<IndShape> {
    let mut out = Vec::new();
    for (body_sym, body_ar) in schema.symbols() {
        for pattern in growth_strings(body_ar) {
            let m = pattern.iter().max().map_or(0, |c| c + 1);
            for (head_sym, head_ar) in schema.symbols() {
                for assignment in head_assignments(m, head_ar) {
                    out.push(IndShape {
                        body_sym: body_sym.to_string(),
                        pattern: pattern.clone(),
                        head_sym: head_sym.to_string(),
                        head: assignment,
                    });
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
enum HeadPos {
    Var(usize),
    Ex(usize),
}

/// Head position assignments: each position is one of the `m` body
/// variables or an existential, existentials named in first-use order.
fn head_assignments(m: usize, len: usize) -> Vec<Vec<HeadPos>> {
    let mut out = Vec::new();
    let mut cur: Vec<HeadPos> = Vec::with_capacity(len);
    fn rec(m: usize, len: usize, next_ex: usize, cur: &mut Vec<HeadPos>, out: &mut Vec<Vec<HeadPos>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in 0..m {
            cur.push(HeadPos::Var(i));
            rec(m, len, next_ex, cur, out);
            cur.pop();
        }
        for j in 0..=next_ex {
            cur.push(HeadPos::Ex(j));
            rec(m, len, next_ex.max(j + 1), cur, out);
            cur.pop();
        }
    }
    rec(m, len, 0, &mut cur, &mut out);
    out
}

/// Report of a basis verification run.
#[derive(Debug, Clone)]
pub struct BasisReport {
    /// Every instance of `H` satisfies every member of the basis.
    pub sound: bool,
    /// (instance index, violated member) pairs when unsound.
    pub violations: Vec<(usize, Tgd)>,
    /// Number of sampled class-TGDs true in all of `H`.
    pub sampled: usize,
    /// Sampled TGDs certainly entailed by the basis.
    pub entailed_yes: usize,
    /// Sampled TGDs whose entailment the bounded chase could not settle.
    pub entailed_unknown: usize,
    /// Sampled TGDs the basis provably does not entail (completeness
    /// failures).
    pub missed: Vec<Tgd>,
}

impl BasisReport {
    pub fn complete_on_sample(&self) -> bool {
        self.missed.is_empty()
    }
}

/// Checks (a) soundness — each instance of `H` satisfies the basis — and
/// (b) sampled completeness — every class-TGD within the enumeration budget
/// that holds in all of `H` is entailed by the basis (Yes or Unknown; a
/// definite No is a completeness failure).
pub fn verify_basis(
    o: &TgdOntology,
    h: &[Instance],
    class: TgdClass,
    budget: (usize, usize, usize),
    limits: &Limits,
) -> Result<BasisReport> {
    let mut report = BasisReport {
        sound: true,
        violations: Vec::new(),
        sampled: 0,
        entailed_yes: 0,
        entailed_unknown: 0,
        missed: Vec::new(),
    };
    for (idx, inst) in h.iter().enumerate() {
        for tgd in o.tgds() {
            if !model_check(inst, tgd, limits)? {
                report.sound = false;
                report.violations.push((idx, tgd.clone()));
            }
        }
    }
    let mut schema = o.schema()?;
    for inst in h {
        schema = schema.union(inst.schema())?;
    }
    for rho in crate::oracle::enumerate_tgds(&schema, class, budget)? {
        let mut holds = true;
        for inst in h {
            if !model_check(inst, &rho, limits)? {
                holds = false;
                break;
            }
        }
        if !holds {
            continue;
        }
        report.sampled += 1;
        match entails(o, &rho, limits)? {
            Entailment::Yes => report.entailed_yes += 1,
            Entailment::Unknown => report.entailed_unknown += 1,
            Entailment::No => report.missed.push(rho),
        }
    }
    Ok(report)
}
