use crate::algebra;
use crate::columnar::Relation;
use crate::rma::{apply_rma, RmaArg, RmaCall};

use super::plan::{PlanNode, PlanOp};
use super::{Catalog, Phase, SqlError};

/// Evaluates a plan bottom-up against the tables of `catalog`.
pub fn execute(node: &PlanNode, catalog: &dyn Catalog) -> Result<Relation, SqlError> {
    let fail = |e: &dyn std::fmt::Display| SqlError::new(Phase::Execute, e.to_string(), node.pos);
    match &node.op {
        PlanOp::Scan { table } => catalog
            .table(table)
            .cloned()
            .ok_or_else(|| fail(&format!("table '{table}' no longer exists"))),
        PlanOp::Named { input, name } => Ok(execute(input, catalog)?.named(name.clone())),
        PlanOp::Rename { input, mapping } => {
            let r = execute(input, catalog)?;
            algebra::rename(&r, mapping).map_err(|e| fail(&e))
        }
        PlanOp::Select { input, predicate } => {
            let r = execute(input, catalog)?;
            algebra::select(&r, predicate).map_err(|e| fail(&e))
        }
        PlanOp::Project { input, exprs } => {
            let r = execute(input, catalog)?;
            algebra::project(&r, exprs).map_err(|e| fail(&e))
        }
        PlanOp::Join {
            left,
            right,
            predicate,
        } => {
            let l = execute(left, catalog)?;
            let r = execute(right, catalog)?;
            match predicate {
                Some(p) => algebra::join(&l, &r, p),
                None => algebra::cross(&l, &r),
            }
            .map_err(|e| fail(&e))
        }
        PlanOp::Aggregate {
            input,
            group_by,
            aggs,
        } => {
            let r = execute(input, catalog)?;
            algebra::aggregate(&r, group_by, aggs).map_err(|e| fail(&e))
        }
        PlanOp::Sort { input, keys } => {
            let r = execute(input, catalog)?;
            let cols: Vec<(usize, bool)> = keys
                .iter()
                .map(|(k, desc)| r.schema().require(k).map(|i| (i, *desc)))
                .collect::<Result<_, _>>()
                .map_err(|e| fail(&e))?;
            let mut idx: Vec<usize> = (0..r.row_count()).collect();
            idx.sort_by(|&a, &b| {
                cols.iter()
                    .map(|&(c, desc)| {
                        let o = r.column(c).cmp_rows(a, b);
                        if desc {
                            o.reverse()
                        } else {
                            o
                        }
                    })
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            Ok(r.gather(&idx))
        }
        PlanOp::Rma {
            op,
            args,
            context,
            avoid_sort,
            cached,
        } => {
            if let Some(r) = cached {
                return Ok(r.clone());
            }
            let mut evaluated = Vec::with_capacity(args.len());
            for (n, order) in args {
                evaluated.push(RmaArg::new(execute(n, catalog)?, order.iter().cloned()));
            }
            let mut it = evaluated.into_iter();
            let call = RmaCall {
                op: *op,
                first: it.next().expect("at least one argument"),
                second: it.next(),
                context: context.clone(),
                avoid_sort: *avoid_sort,
            };
            apply_rma(&call).map_err(|e| fail(&e))
        }
    }
}
