use std::collections::HashSet;
use std::fmt;

use crate::algebra::{AggSpec, ExprType, ScalarExpr};
use crate::columnar::{Attribute, Relation, Schema, Value};
use crate::rma::{check_call, ArgSchema, OpCode, DEFAULT_CONTEXT};

use super::ast::{Expr, FromItem, JoinKind, Query, RmaCallAst, SelectItem};
use super::exec::execute;
use super::{Catalog, Phase, Pos, SqlError};

/// A node of the physical plan. Every node knows its output schema.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode {
    pub op: PlanOp,
    pub schema: Schema,
    pub pos: Option<Pos>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOp {
    Scan {
        table: String,
    },
    /// Sets the relation name seen by operations that report it.
    Named {
        input: Box<PlanNode>,
        name: String,
    },
    Rename {
        input: Box<PlanNode>,
        mapping: Vec<(String, String)>,
    },
    Select {
        input: Box<PlanNode>,
        predicate: ScalarExpr,
    },
    Project {
        input: Box<PlanNode>,
        exprs: Vec<(ScalarExpr, String)>,
    },
    Join {
        left: Box<PlanNode>,
        right: Box<PlanNode>,
        predicate: Option<ScalarExpr>,
    },
    Aggregate {
        input: Box<PlanNode>,
        group_by: Vec<String>,
        aggs: Vec<AggSpec>,
    },
    Sort {
        input: Box<PlanNode>,
        keys: Vec<(String, bool)>,
    },
    Rma {
        op: OpCode,
        args: Vec<(PlanNode, Vec<String>)>,
        context: String,
        avoid_sort: bool,
        /// Result computed while planning, when the output attribute names
        /// depend on the data.
        cached: Option<Relation>,
    },
}

impl PlanNode {
    /// Name of the relation this node produces, if it has one.
    pub fn relation_name(&self) -> Option<&str> {
        match &self.op {
            PlanOp::Scan { table } => Some(table),
            PlanOp::Named { name, .. } => Some(name),
            _ => None,
        }
    }

    fn fmt_tree(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        write!(f, "{:width$}", "", width = depth * 2)?;
        let names = |v: &[String]| v.join(", ");
        let children: Vec<&PlanNode> = match &self.op {
            PlanOp::Scan { table } => {
                writeln!(f, "Scan {table}")?;
                vec![]
            }
            PlanOp::Named { input, name } => {
                writeln!(f, "Named {name}")?;
                vec![input]
            }
            PlanOp::Rename { input, mapping } => {
                let m: Vec<String> = mapping.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
                writeln!(f, "Rename {}", m.join(", "))?;
                vec![input]
            }
            PlanOp::Select { input, predicate } => {
                writeln!(f, "Select {predicate}")?;
                vec![input]
            }
            PlanOp::Project { input, exprs } => {
                let e: Vec<String> = exprs.iter().map(|(e, n)| format!("{e} AS {n}")).collect();
                writeln!(f, "Project {}", e.join(", "))?;
                vec![input]
            }
            PlanOp::Join {
                left,
                right,
                predicate,
            } => {
                match predicate {
                    Some(p) => writeln!(f, "Join {p}")?,
                    None => writeln!(f, "Cross")?,
                }
                vec![left, right]
            }
            PlanOp::Aggregate {
                input,
                group_by,
                aggs,
            } => {
                let a: Vec<String> = aggs
                    .iter()
                    .map(|a| match &a.arg {
                        Some(e) => format!("{}({e}) AS {}", a.func.name(), a.name),
                        None => format!("{}(*) AS {}", a.func.name(), a.name),
                    })
                    .collect();
                writeln!(f, "Aggregate [{}] {}", names(group_by), a.join(", "))?;
                vec![input]
            }
            PlanOp::Sort { input, keys } => {
                let k: Vec<String> = keys
                    .iter()
                    .map(|(n, d)| format!("{n}{}", if *d { " DESC" } else { "" }))
                    .collect();
                writeln!(f, "Sort {}", k.join(", "))?;
                vec![input]
            }
            PlanOp::Rma {
                op,
                args,
                context,
                avoid_sort,
                ..
            } => {
                let by: Vec<String> = args
                    .iter()
                    .map(|(_, o)| format!("BY ({})", names(o)))
                    .collect();
                write!(f, "Rma {op} {} NAMED {context}", by.join(" "))?;
                if *avoid_sort {
                    f.write_str(" [sort avoidance]")?;
                }
                writeln!(f)?;
                args.iter().map(|(n, _)| n).collect()
            }
        };
        for c in children {
            c.fmt_tree(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for PlanNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_tree(f, 0)
    }
}

pub fn plan(q: &Query, catalog: &dyn Catalog) -> Result<PlanNode, SqlError> {
    Planner { catalog }.query(q)
}

#[derive(Debug, Clone)]
struct Entry {
    qualifier: String,
    name: String,
    internal: String,
    /// Right-hand column of a USING join: reachable only when qualified.
    hidden: bool,
}

type Scope = Vec<Entry>;

fn plan_error(message: impl Into<String>, pos: Pos) -> SqlError {
    SqlError::new(Phase::Plan, message, Some(pos))
}

fn first_pos(e: &Expr) -> Option<Pos> {
    match e {
        Expr::Column { span, .. } | Expr::Agg { span, .. } => Some(span.0),
        Expr::Binary { left, right, .. } => first_pos(left).or_else(|| first_pos(right)),
        Expr::Not(e) | Expr::Neg(e) => first_pos(e),
        _ => None,
    }
}

fn node(op: PlanOp, schema: Schema, pos: Pos) -> PlanNode {
    PlanNode {
        op,
        schema,
        pos: Some(pos),
    }
}

/// Collects aggregate calls while resolving a select list over a grouped
/// input.
struct Aggregates<'s> {
    input: &'s Scope,
    specs: Vec<AggSpec>,
    rendered: Vec<String>,
}

struct Planner<'a> {
    catalog: &'a dyn Catalog,
}

impl Planner<'_> {
    fn query(&self, q: &Query) -> Result<PlanNode, SqlError> {
        let qpos = q.span.0;
        let (mut input, scope) = self.from(&q.from)?;

        if let Some(w) = &q.filter {
            let pos = first_pos(w).unwrap_or(qpos);
            if w.contains_aggregate() {
                return Err(plan_error(
                    "aggregate functions are not allowed in WHERE",
                    pos,
                ));
            }
            let predicate = self.resolve(w, &scope, None)?;
            match predicate.type_in(&input.schema) {
                Ok(ExprType::Bool) => {}
                Ok(t) => {
                    return Err(plan_error(
                        format!("WHERE clause must be boolean, got {t}"),
                        pos,
                    ))
                }
                Err(e) => return Err(plan_error(e.to_string(), pos)),
            }
            let schema = input.schema.clone();
            input = node(
                PlanOp::Select {
                    input: Box::new(input),
                    predicate,
                },
                schema,
                pos,
            );
        }

        let grouped = !q.group_by.is_empty()
            || q.select
                .iter()
                .any(|s| matches!(s, SelectItem::Expr { expr, .. } if expr.contains_aggregate()));

        let mut exprs: Vec<(ScalarExpr, String, Pos)> = Vec::new();
        if grouped {
            let mut group_scope = Scope::new();
            let mut group_by = Vec::new();
            for g in &q.group_by {
                let Expr::Column { span, .. } = g else {
                    unreachable!("parser only yields column references here")
                };
                let ScalarExpr::Column(internal) = self.resolve(g, &scope, None)? else {
                    unreachable!()
                };
                let entry = scope
                    .iter()
                    .find(|e| e.internal == internal)
                    .expect("resolved");
                if !group_by.contains(&internal) {
                    group_by.push(internal);
                    group_scope.push(Entry {
                        hidden: false,
                        ..entry.clone()
                    });
                }
                let _ = span;
            }
            let mut aggs = Aggregates {
                input: &scope,
                specs: Vec::new(),
                rendered: Vec::new(),
            };
            for item in &q.select {
                match item {
                    SelectItem::Expr { expr, alias } => {
                        let pos = first_pos(expr).unwrap_or(qpos);
                        let e = self.resolve(expr, &group_scope, Some(&mut aggs))?;
                        exprs.push((e, output_name(expr, alias), pos));
                    }
                    SelectItem::Star(span) | SelectItem::QualifiedStar(_, span) => {
                        return Err(plan_error("* cannot be combined with aggregation", span.0));
                    }
                }
            }
            let mut attrs: Vec<Attribute> = group_by
                .iter()
                .map(|g| input.schema.attrs()[input.schema.index_of(g).expect("resolved")].clone())
                .collect();
            for spec in &aggs.specs {
                let kind = spec
                    .output_kind(&input.schema)
                    .map_err(|e| plan_error(e.to_string(), qpos))?;
                attrs.push(Attribute::new(spec.name.clone(), kind));
            }
            let schema = Schema::new(attrs).map_err(|e| plan_error(e.to_string(), qpos))?;
            input = node(
                PlanOp::Aggregate {
                    input: Box::new(input),
                    group_by,
                    aggs: aggs.specs,
                },
                schema,
                qpos,
            );
        } else {
            for item in &q.select {
                match item {
                    SelectItem::Star(span) => {
                        let visible: Vec<&Entry> = scope.iter().filter(|e| !e.hidden).collect();
                        if visible.is_empty() {
                            return Err(plan_error("* matches no columns", span.0));
                        }
                        for e in visible {
                            exprs.push((ScalarExpr::col(&e.internal), e.name.clone(), span.0));
                        }
                    }
                    SelectItem::QualifiedStar(q, span) => {
                        let of: Vec<&Entry> = scope.iter().filter(|e| &e.qualifier == q).collect();
                        if of.is_empty() {
                            return Err(plan_error(
                                format!("unknown table or alias '{q}'"),
                                span.0,
                            ));
                        }
                        for e in of {
                            exprs.push((ScalarExpr::col(&e.internal), e.name.clone(), span.0));
                        }
                    }
                    SelectItem::Expr { expr, alias } => {
                        let pos = first_pos(expr).unwrap_or(qpos);
                        let e = self.resolve(expr, &scope, None)?;
                        exprs.push((e, output_name(expr, alias), pos));
                    }
                }
            }
        }

        let mut attrs = Vec::with_capacity(exprs.len());
        let mut seen = HashSet::new();
        for (e, name, pos) in &exprs {
            let kind = match e.type_in(&input.schema) {
                Ok(ExprType::Value(k)) => k,
                Ok(ExprType::Bool) => {
                    return Err(plan_error(
                        format!("boolean expression '{name}' cannot be selected"),
                        *pos,
                    ))
                }
                Err(err) => return Err(plan_error(err.to_string(), *pos)),
            };
            if !seen.insert(name.clone()) {
                return Err(plan_error(
                    format!("output column '{name}' appears twice; add an alias"),
                    *pos,
                ));
            }
            attrs.push(Attribute::new(name.clone(), kind));
        }
        let schema = Schema::new(attrs).map_err(|e| plan_error(e.to_string(), qpos))?;
        let mut out = node(
            PlanOp::Project {
                input: Box::new(input),
                exprs: exprs.into_iter().map(|(e, n, _)| (e, n)).collect(),
            },
            schema,
            qpos,
        );

        if !q.order_by.is_empty() {
            let mut keys = Vec::new();
            for o in &q.order_by {
                if out.schema.index_of(&o.name).is_none() {
                    return Err(plan_error(
                        format!(
                            "ORDER BY refers to '{}', which is not an output column",
                            o.name
                        ),
                        o.span.0,
                    ));
                }
                keys.push((o.name.clone(), o.descending));
            }
            let schema = out.schema.clone();
            out = node(
                PlanOp::Sort {
                    input: Box::new(out),
                    keys,
                },
                schema,
                qpos,
            );
        }
        Ok(out)
    }

    fn resolve(
        &self,
        e: &Expr,
        scope: &Scope,
        mut aggs: Option<&mut Aggregates<'_>>,
    ) -> Result<ScalarExpr, SqlError> {
        Ok(match e {
            Expr::Column {
                qualifier,
                name,
                span,
            } => {
                let matches: Vec<&Entry> = scope
                    .iter()
                    .filter(|en| {
                        en.name == *name
                            && match qualifier {
                                Some(q) => en.qualifier == *q,
                                None => !en.hidden,
                            }
                    })
                    .collect();
                let shown = match qualifier {
                    Some(q) => format!("{q}.{name}"),
                    None => name.clone(),
                };
                match matches.as_slice() {
                    [one] => ScalarExpr::col(&one.internal),
                    [] if aggs.is_some()
                        && aggs
                            .as_ref()
                            .is_some_and(|a| a.input.iter().any(|en| en.name == *name)) =>
                    {
                        return Err(plan_error(
                            format!(
                                "column '{shown}' must appear in GROUP BY or inside an aggregate"
                            ),
                            span.0,
                        ))
                    }
                    [] => return Err(plan_error(format!("unknown column '{shown}'"), span.0)),
                    _ => {
                        return Err(plan_error(
                            format!("column reference '{shown}' is ambiguous"),
                            span.0,
                        ))
                    }
                }
            }
            Expr::Int(i) => ScalarExpr::lit(Value::Int(*i)),
            Expr::Float(x) => ScalarExpr::lit(Value::Float(*x)),
            Expr::Str(s) => ScalarExpr::lit(Value::Text(s.clone())),
            Expr::Bool(b) => ScalarExpr::Bool(*b),
            Expr::Binary { op, left, right } => {
                let l = self.resolve(left, scope, aggs.as_deref_mut())?;
                let r = self.resolve(right, scope, aggs)?;
                ScalarExpr::binary(*op, l, r)
            }
            Expr::Not(x) => ScalarExpr::Not(Box::new(self.resolve(x, scope, aggs)?)),
            Expr::Neg(x) => ScalarExpr::Neg(Box::new(self.resolve(x, scope, aggs)?)),
            Expr::Agg { func, arg, span } => {
                let Some(aggs) = aggs else {
                    return Err(plan_error(
                        "aggregate functions are not allowed here",
                        span.0,
                    ));
                };
                if arg.as_ref().is_some_and(|a| a.contains_aggregate()) {
                    return Err(plan_error("aggregate calls cannot be nested", span.0));
                }
                let key = e.to_string();
                if let Some(i) = aggs.rendered.iter().position(|k| *k == key) {
                    return Ok(ScalarExpr::col(&aggs.specs[i].name));
                }
                let arg = arg
                    .as_ref()
                    .map(|a| self.resolve(a, aggs.input, None))
                    .transpose()?;
                let name = format!("__agg{}", aggs.specs.len());
                aggs.specs.push(AggSpec::new(*func, arg, name.clone()));
                aggs.rendered.push(key);
                ScalarExpr::col(name)
            }
        })
    }

    /// Plans a FROM clause; output columns carry internal names
    /// `qualifier.name` so that both sides of a join stay distinct.
    fn from(&self, item: &FromItem) -> Result<(PlanNode, Scope), SqlError> {
        if let FromItem::Join {
            left,
            right,
            kind,
            span,
        } = item
        {
            let (l, ls) = self.from(left)?;
            let (r, mut rs) = self.from(right)?;
            if let Some(dup) = rs
                .iter()
                .find(|e| ls.iter().any(|x| x.qualifier == e.qualifier))
            {
                return Err(plan_error(
                    format!("table name or alias '{}' is used twice", dup.qualifier),
                    right.span().0,
                ));
            }
            let predicate = match kind {
                JoinKind::Comma | JoinKind::Cross => None,
                JoinKind::Using(cols) => {
                    let mut pred: Option<ScalarExpr> = None;
                    for c in cols {
                        let find = |s: &Scope| -> Result<usize, SqlError> {
                            let hits: Vec<usize> = s
                                .iter()
                                .enumerate()
                                .filter(|(_, e)| e.name == *c && !e.hidden)
                                .map(|(i, _)| i)
                                .collect();
                            match hits.as_slice() {
                                [i] => Ok(*i),
                                [] => Err(plan_error(
                                    format!("USING column '{c}' is missing on one side"),
                                    span.0,
                                )),
                                _ => Err(plan_error(
                                    format!("USING column '{c}' is ambiguous"),
                                    span.0,
                                )),
                            }
                        };
                        let li = find(&ls)?;
                        let ri = find(&rs)?;
                        let eq = ScalarExpr::eq(
                            ScalarExpr::col(&ls[li].internal),
                            ScalarExpr::col(&rs[ri].internal),
                        );
                        rs[ri].hidden = true;
                        pred = Some(match pred {
                            None => eq,
                            Some(p) => ScalarExpr::and(p, eq),
                        });
                    }
                    pred
                }
                JoinKind::On(e) => {
                    let mut all = ls.clone();
                    all.extend(rs.iter().cloned());
                    let p = self.resolve(e, &all, None)?;
                    Some(p)
                }
            };
            let attrs: Vec<Attribute> = l
                .schema
                .attrs()
                .iter()
                .chain(r.schema.attrs())
                .cloned()
                .collect();
            let schema = Schema::new(attrs).map_err(|e| plan_error(e.to_string(), span.0))?;
            if let Some(p) = &predicate {
                let pos = match kind {
                    JoinKind::On(e) => first_pos(e).unwrap_or(span.0),
                    _ => span.0,
                };
                match p.type_in(&schema) {
                    Ok(ExprType::Bool) => {}
                    Ok(t) => {
                        return Err(plan_error(
                            format!("join condition must be boolean, got {t}"),
                            pos,
                        ))
                    }
                    Err(e) => return Err(plan_error(e.to_string(), pos)),
                }
            }
            let mut scope = ls;
            scope.extend(rs);
            return Ok((
                node(
                    PlanOp::Join {
                        left: Box::new(l),
                        right: Box::new(r),
                        predicate,
                    },
                    schema,
                    span.0,
                ),
                scope,
            ));
        }

        let (base, qualifier) = self.base(item)?;
        let pos = item.span().0;
        let mut scope = Vec::new();
        let mut mapping = Vec::new();
        let mut attrs = Vec::new();
        for a in base.schema.attrs() {
            let internal = format!("{qualifier}.{}", a.name);
            scope.push(Entry {
                qualifier: qualifier.clone(),
                name: a.name.clone(),
                internal: internal.clone(),
                hidden: false,
            });
            mapping.push((a.name.clone(), internal.clone()));
            attrs.push(Attribute::new(internal, a.kind));
        }
        let schema = Schema::new(attrs).map_err(|e| plan_error(e.to_string(), pos))?;
        Ok((
            node(
                PlanOp::Rename {
                    input: Box::new(base),
                    mapping,
                },
                schema,
                pos,
            ),
            scope,
        ))
    }

    /// Plans a single FROM item with its own attribute names, returning the
    /// qualifier its columns are known by.
    fn base(&self, item: &FromItem) -> Result<(PlanNode, String), SqlError> {
        let named = |n: PlanNode, alias: &Option<String>, pos: Pos| match alias {
            Some(a) => {
                let schema = n.schema.clone();
                node(
                    PlanOp::Named {
                        input: Box::new(n),
                        name: a.clone(),
                    },
                    schema,
                    pos,
                )
            }
            None => n,
        };
        match item {
            FromItem::Table { name, alias, span } => {
                let Some(t) = self.catalog.table(name) else {
                    return Err(plan_error(format!("unknown table '{name}'"), span.0));
                };
                let scan = node(
                    PlanOp::Scan {
                        table: name.clone(),
                    },
                    t.schema().clone(),
                    span.0,
                );
                Ok((
                    named(scan, alias, span.0),
                    alias.clone().unwrap_or_else(|| name.clone()),
                ))
            }
            FromItem::Subquery { query, alias, span } => {
                let q = self.query(query)?;
                Ok((named(q, &Some(alias.clone()), span.0), alias.clone()))
            }
            FromItem::Rma { call, alias } => {
                let n = self.rma(call)?;
                let qual = alias.clone().unwrap_or_else(|| call.op.name().to_string());
                Ok((named(n, alias, call.span.0), qual))
            }
            FromItem::Join { span, .. } => Err(plan_error(
                "a join cannot be used directly here; wrap it in a subquery",
                span.0,
            )),
        }
    }

    fn rma(&self, call: &RmaCallAst) -> Result<PlanNode, SqlError> {
        let pos = call.span.0;
        let mut args = Vec::with_capacity(call.args.len());
        for a in &call.args {
            let (n, _) = self.base(&a.item)?;
            args.push((n, a.order.clone()));
        }
        let context = call
            .context
            .clone()
            .unwrap_or_else(|| DEFAULT_CONTEXT.to_string());
        let shape = check_call(call.op, view(&args[0]), args.get(1).map(view), &context)
            .map_err(|e| plan_error(e.to_string(), pos))?;
        if args.len() > 2 {
            return Err(plan_error(
                format!("{} takes at most two arguments", call.op),
                pos,
            ));
        }
        let avoid_sort = call.op.supports_sort_avoidance();
        let mut n = PlanNode {
            op: PlanOp::Rma {
                op: call.op,
                args,
                context,
                avoid_sort,
                cached: None,
            },
            schema: Schema::new(vec![]).expect("empty schema"),
            pos: Some(pos),
        };
        match shape.schema() {
            Some(s) => n.schema = s,
            None => {
                // attribute names come from a column cast: evaluate now
                let r = execute(&n, self.catalog)?;
                n.schema = r.schema().clone();
                if let PlanOp::Rma { cached, .. } = &mut n.op {
                    *cached = Some(r);
                }
            }
        }
        Ok(n)
    }
}

fn view((n, order): &(PlanNode, Vec<String>)) -> ArgSchema<'_> {
    ArgSchema {
        schema: &n.schema,
        order: order.as_slice(),
        name: n.relation_name(),
    }
}

fn output_name(expr: &Expr, alias: &Option<String>) -> String {
    match (alias, expr) {
        (Some(a), _) => a.clone(),
        (None, Expr::Column { name, .. }) => name.clone(),
        (None, e) => e.to_string(),
    }
}
