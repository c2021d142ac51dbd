use std::collections::HashSet;

use crate::columnar::{Attribute, Column, Kind, Relation, Schema, SortPermutation, Value};
use crate::kernels::{
    determinant, eigen_sym, elementwise, inverse, product, qr, rank, solve, svd, transpose,
    Elementwise, KernelError, Matrix, Product,
};

use super::construct::{
    aligned, cast_names, check_key_unsorted, float_attrs, order_part, relation_constructor,
    schema_cast, sort_by_key, split_schema, to_matrix,
};
use super::{Dim, OpCode, RmaError};

pub const DEFAULT_CONTEXT: &str = "C";

/// An argument relation together with its order schema.
#[derive(Debug, Clone, PartialEq)]
pub struct RmaArg {
    pub relation: Relation,
    pub order: Vec<String>,
}

impl RmaArg {
    pub fn new<S: Into<String>>(relation: Relation, order: impl IntoIterator<Item = S>) -> Self {
        RmaArg {
            relation,
            order: order.into_iter().map(Into::into).collect(),
        }
    }

    fn view(&self) -> ArgSchema<'_> {
        ArgSchema {
            schema: self.relation.schema(),
            order: &self.order,
            name: self.relation.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmaCall {
    pub op: OpCode,
    pub first: RmaArg,
    pub second: Option<RmaArg>,
    /// Name of the attribute that holds schema-cast or relation-name context.
    pub context: String,
    /// Skip sorting where the operation allows it.
    pub avoid_sort: bool,
}

impl RmaCall {
    pub fn unary<S: Into<String>>(
        op: OpCode,
        r: Relation,
        order: impl IntoIterator<Item = S>,
    ) -> Self {
        RmaCall {
            op,
            first: RmaArg::new(r, order),
            second: None,
            context: DEFAULT_CONTEXT.to_string(),
            avoid_sort: false,
        }
    }

    pub fn binary<S: Into<String>, T: Into<String>>(
        op: OpCode,
        r: Relation,
        u: impl IntoIterator<Item = S>,
        s: Relation,
        v: impl IntoIterator<Item = T>,
    ) -> Self {
        RmaCall {
            second: Some(RmaArg::new(s, v)),
            ..RmaCall::unary(op, r, u)
        }
    }

    pub fn with_context(mut self, name: impl Into<String>) -> Self {
        self.context = name.into();
        self
    }

    pub fn with_sort_avoidance(mut self, on: bool) -> Self {
        self.avoid_sort = on;
        self
    }
}

/// Schema-level view of an argument, enough to check a call before any
/// data is available.
#[derive(Debug, Clone, Copy)]
pub struct ArgSchema<'a> {
    pub schema: &'a Schema,
    pub order: &'a [String],
    pub name: Option<&'a str>,
}

/// Result schema known before execution. `trailing` is `None` when the
/// application attribute names come from a column cast and therefore depend
/// on the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultShape {
    pub leading: Vec<Attribute>,
    pub trailing: Option<Vec<Attribute>>,
    first_app: Vec<String>,
    second_app: Option<Vec<String>>,
}

impl ResultShape {
    pub fn schema(&self) -> Option<Schema> {
        let trailing = self.trailing.as_ref()?;
        Schema::new(self.leading.iter().chain(trailing).cloned().collect()).ok()
    }
}

fn order_attrs(a: &ArgSchema<'_>) -> Vec<Attribute> {
    a.order
        .iter()
        .map(|n| a.schema.attrs()[a.schema.index_of(n).expect("validated")].clone())
        .collect()
}

fn ensure_distinct<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<(), RmaError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(RmaError::NameCollision(n.to_string()));
        }
    }
    Ok(())
}

/// Every check that does not need the data: arity, order schemas, numeric
/// application schemas, cardinality and compatibility rules, and name
/// collisions among result attributes.
pub fn check_call(
    op: OpCode,
    first: ArgSchema<'_>,
    second: Option<ArgSchema<'_>>,
    context: &str,
) -> Result<ResultShape, RmaError> {
    let actual = 1 + usize::from(second.is_some());
    if actual != op.arity() {
        return Err(RmaError::Arity {
            op,
            expected: op.arity(),
            actual,
        });
    }
    let first_app = split_schema(first.schema, first.order)?;
    let second_app = second
        .as_ref()
        .map(|s| split_schema(s.schema, s.order))
        .transpose()?;

    match (op, &second) {
        (OpCode::Tra | OpCode::Usv, _) if first.order.len() != 1 => {
            return Err(RmaError::OrderCardinality {
                op,
                arg: "U",
                actual: first.order.len(),
            })
        }
        (OpCode::Opd, Some(s)) if s.order.len() != 1 => {
            return Err(RmaError::OrderCardinality {
                op,
                arg: "V",
                actual: s.order.len(),
            })
        }
        (OpCode::Add | OpCode::Sub | OpCode::Emu, Some(s)) => {
            let right = second_app.as_ref().map_or(0, Vec::len);
            if first_app.len() != right {
                return Err(RmaError::NotUnionCompatible {
                    op,
                    left: first_app.len(),
                    right,
                });
            }
            if let Some(a) = first.order.iter().find(|a| s.order.contains(a)) {
                return Err(RmaError::OverlappingOrderSchemas {
                    op,
                    attribute: a.clone(),
                });
            }
        }
        _ => {}
    }

    let shape = op.shape_type();
    let context_attr = || vec![Attribute::new(context, Kind::Text)];
    let second_ref = || second.as_ref().expect("binary");
    let leading = match shape.rows {
        Dim::R1 => order_attrs(&first),
        Dim::R2 => order_attrs(second_ref()),
        Dim::RStar => {
            let mut v = order_attrs(&first);
            v.extend(order_attrs(second_ref()));
            v
        }
        Dim::One => {
            if first.name.is_none() {
                return Err(RmaError::UnnamedRelation { op });
            }
            context_attr()
        }
        Dim::C1 | Dim::C2 | Dim::CStar => context_attr(),
    };
    let trailing = match shape.cols {
        Dim::R1 | Dim::R2 | Dim::RStar => None,
        Dim::C1 | Dim::CStar => Some(float_attrs(&first_app)),
        Dim::C2 => Some(float_attrs(second_app.as_ref().expect("binary"))),
        Dim::One => Some(float_attrs(&[op.name().to_string()])),
    };
    if context.is_empty() && leading.iter().any(|a| a.name.is_empty()) {
        return Err(crate::columnar::ColumnarError::EmptyAttributeName.into());
    }
    ensure_distinct(
        leading
            .iter()
            .chain(trailing.iter().flatten())
            .map(|a| a.name.as_str()),
    )?;
    Ok(ResultShape {
        leading,
        trailing,
        first_app,
        second_app,
    })
}

/// The matrix operation behind `op`, applied to already constructed
/// matrices.
pub fn base_result(op: OpCode, a: &Matrix, b: Option<&Matrix>) -> Result<Matrix, KernelError> {
    let b = || b.expect("binary operation needs a second matrix");
    Ok(match op {
        OpCode::Emu => elementwise(Elementwise::Emu, a, b())?,
        OpCode::Add => elementwise(Elementwise::Add, a, b())?,
        OpCode::Sub => elementwise(Elementwise::Sub, a, b())?,
        OpCode::Mmu => product(Product::Mmu, a, b())?,
        OpCode::Cpd => product(Product::Cpd, a, b())?,
        OpCode::Opd => product(Product::Opd, a, b())?,
        OpCode::Sol => solve(a, b())?,
        OpCode::Tra => transpose(a),
        OpCode::Inv => inverse(a)?,
        OpCode::Evc => eigen_sym(a)?.vectors,
        OpCode::Evl => eigen_sym(a)?.values,
        OpCode::Qqr => qr(a)?.q,
        OpCode::Rqr => qr(a)?.r,
        OpCode::Dsv => svd(a)?.d,
        OpCode::Usv => svd(a)?.u,
        OpCode::Vsv => svd(a)?.v,
        OpCode::Det => Matrix::new(1, 1, vec![determinant(a)?])?,
        OpCode::Rnk => Matrix::new(1, 1, vec![rank(a)? as f64])?,
        OpCode::Chf => crate::kernels::cholesky(a)?,
    })
}

struct Prepared {
    order: Vec<Column>,
    matrix: Matrix,
}

fn prepare(
    arg: &RmaArg,
    app: &[String],
    perm: Option<&SortPermutation>,
) -> Result<Prepared, RmaError> {
    Ok(Prepared {
        order: aligned(&arg.relation, &arg.order, perm)?,
        matrix: to_matrix(&aligned(&arg.relation, app, perm)?)?,
    })
}

/// Runs a relational matrix operation: split each argument into order and
/// application part, sort by the order schema, compute the base result,
/// build the row context the shape type calls for and merge it with the
/// base result under the result schema.
pub fn apply_rma(call: &RmaCall) -> Result<Relation, RmaError> {
    let op = call.op;
    let shape = check_call(
        op,
        call.first.view(),
        call.second.as_ref().map(RmaArg::view),
        &call.context,
    )?;
    let args = std::iter::once(&call.first).chain(call.second.as_ref());
    if args.into_iter().any(|a| a.relation.row_count() == 0) {
        return Err(RmaError::EmptyRelation { op });
    }

    let avoid = call.avoid_sort && op.supports_sort_avoidance();
    let (first, second) = match (&call.second, avoid) {
        (None, true) => {
            check_key_unsorted(&call.first.relation, &call.first.order)?;
            (prepare(&call.first, &shape.first_app, None)?, None)
        }
        (Some(s), true) => {
            let (m, n) = (call.first.relation.row_count(), s.relation.row_count());
            if m != n {
                return Err(KernelError::DimensionMismatch {
                    op: op.name(),
                    left: (m, shape.first_app.len()),
                    right: (n, shape.second_app.as_ref().map_or(0, Vec::len)),
                }
                .into());
            }
            let p = sort_by_key(&call.first.relation, &call.first.order)?;
            let q = sort_by_key(&s.relation, &s.order)?;
            // row i of the first argument pairs with the second argument's
            // row of the same rank
            let composite = p
                .inverse()
                .indices()
                .iter()
                .map(|&k| q.indices()[k])
                .collect();
            let composite =
                SortPermutation::from_indices(composite).expect("composition of permutations");
            let second_app = shape.second_app.as_deref().expect("binary");
            (
                prepare(&call.first, &shape.first_app, None)?,
                Some(prepare(s, second_app, Some(&composite))?),
            )
        }
        (second, false) => {
            let p = sort_by_key(&call.first.relation, &call.first.order)?;
            let first = prepare(&call.first, &shape.first_app, Some(&p))?;
            let second = second
                .as_ref()
                .map(|s| {
                    let q = sort_by_key(&s.relation, &s.order)?;
                    prepare(s, shape.second_app.as_deref().expect("binary"), Some(&q))
                })
                .transpose()?;
            (first, second)
        }
    };

    let f = base_result(op, &first.matrix, second.as_ref().map(|s| &s.matrix))?;

    let kind = op.shape_type();
    let context_rows = f.rows();
    let leading_cols: Vec<Column> = match kind.rows {
        Dim::R1 => first.order.clone(),
        Dim::R2 => second.as_ref().expect("binary").order.clone(),
        Dim::RStar => first
            .order
            .iter()
            .chain(&second.as_ref().expect("binary").order)
            .cloned()
            .collect(),
        Dim::C1 => vec![schema_cast(&shape.first_app)?],
        Dim::C2 | Dim::CStar => vec![schema_cast(shape.second_app.as_deref().expect("binary"))?],
        Dim::One => vec![Column::text([call.first.relation.name().expect("checked")])],
    };
    let trailing = match shape.trailing {
        Some(t) => t,
        None => {
            let (col, attr) = match kind.cols {
                Dim::R1 => (&first.order[0], &call.first.order[0]),
                _ => (
                    &second.as_ref().expect("binary").order[0],
                    &call.second.as_ref().expect("binary").order[0],
                ),
            };
            float_attrs(&cast_names(col, attr)?)
        }
    };
    debug_assert_eq!(trailing.len(), f.cols());
    debug_assert!(leading_cols.iter().all(|c| c.len() == context_rows));

    ensure_distinct(
        shape
            .leading
            .iter()
            .chain(&trailing)
            .map(|a| a.name.as_str()),
    )?;
    let schema = Schema::new(shape.leading.into_iter().chain(trailing).collect())?;
    let base: Vec<Column> = f.columns().map(|c| Column::float(c.to_vec())).collect();
    relation_constructor(vec![leading_cols, base], schema)
}

/// Attributes of a result that locate each row: the order schema for
/// row-shaped results, the context attribute otherwise.
pub fn result_order_schema(call: &RmaCall) -> Vec<String> {
    let second = || &call.second.as_ref().expect("binary").order;
    match call.op.shape_type().rows {
        Dim::R1 => call.first.order.clone(),
        Dim::R2 => second().clone(),
        Dim::RStar => call.first.order.iter().chain(second()).cloned().collect(),
        Dim::C1 | Dim::C2 | Dim::CStar | Dim::One => vec![call.context.clone()],
    }
}

/// Row and column origins of a result: the sorted set of row-locating
/// tuples and the application attribute names.
#[derive(Debug, Clone, PartialEq)]
pub struct Origins {
    pub rows: Vec<Vec<Value>>,
    pub columns: Vec<String>,
}

fn cmp_tuples(a: &[Value], b: &[Value]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.cmp_same_kind(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

pub fn origins_of(call: &RmaCall) -> Result<Origins, RmaError> {
    let shape = check_call(
        call.op,
        call.first.view(),
        call.second.as_ref().map(RmaArg::view),
        &call.context,
    )?;
    let first = order_part(&call.first.relation, &call.first.order)?;
    let second = call
        .second
        .as_ref()
        .map(|s| order_part(&s.relation, &s.order))
        .transpose()?;
    let second_ref = || second.as_ref().expect("binary");
    let names = |v: &[String]| v.iter().map(|n| vec![Value::Text(n.clone())]).collect();
    let second_app = || shape.second_app.as_deref().expect("binary");

    let kind = call.op.shape_type();
    let mut rows: Vec<Vec<Value>> = match kind.rows {
        Dim::R1 => first.rows().collect(),
        Dim::R2 => second_ref().rows().collect(),
        Dim::RStar => first
            .rows()
            .zip(second_ref().rows())
            .map(|(mut a, b)| {
                a.extend(b);
                a
            })
            .collect(),
        Dim::C1 => names(&shape.first_app),
        Dim::C2 | Dim::CStar => names(second_app()),
        Dim::One => vec![vec![Value::Text(
            call.first.relation.name().expect("checked").to_string(),
        )]],
    };
    rows.sort_by(|a, b| cmp_tuples(a, b));
    let columns = match kind.cols {
        Dim::R1 => cast_names(first.column(0), &call.first.order[0])?,
        Dim::R2 | Dim::RStar => cast_names(
            second_ref().column(0),
            &call.second.as_ref().expect("binary").order[0],
        )?,
        Dim::C1 | Dim::CStar => shape.first_app.clone(),
        Dim::C2 => second_app().to_vec(),
        Dim::One => vec![call.op.name().to_string()],
    };
    Ok(Origins { rows, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columnar::{project_columns, sort_operations};
    use crate::rma::reduce;

    fn weather() -> Relation {
        Relation::from_columns([
            ("T", Column::text(["5am", "8am", "7am", "6am"])),
            ("H", Column::int(vec![1, 8, 6, 1])),
            ("W", Column::int(vec![3, 5, 7, 4])),
        ])
        .unwrap()
        .named("r")
    }

    fn text(s: &str) -> Value {
        Value::Text(s.into())
    }

    fn float_cells(r: &Relation, row: usize) -> Vec<f64> {
        r.row(row)
            .iter()
            .filter_map(|v| match v {
                Value::Float(x) => Some(*x),
                _ => None,
            })
            .collect()
    }

    fn names(r: &Relation) -> Vec<&str> {
        r.schema().names().collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn inverse_of_selection() {
        let r = weather().gather(&[1, 2]);
        let v = apply_rma(&RmaCall::unary(OpCode::Inv, r, ["T"])).unwrap();
        assert_eq!(names(&v), ["T", "H", "W"]);
        assert_eq!(v.column(0), &Column::text(["7am", "8am"]));
        assert!(close(&float_cells(&v, 0), &[-0.19, 0.27], 0.005));
        assert!(close(&float_cells(&v, 1), &[0.31, -0.23], 0.005));
    }

    #[test]
    fn transpose_and_back() {
        let t = apply_rma(&RmaCall::unary(OpCode::Tra, weather(), ["T"])).unwrap();
        assert_eq!(names(&t), ["C", "5am", "6am", "7am", "8am"]);
        assert_eq!(t.row(0)[0], text("H"));
        assert_eq!(float_cells(&t, 0), [1.0, 1.0, 6.0, 8.0]);
        assert_eq!(float_cells(&t, 1), [3.0, 4.0, 7.0, 5.0]);

        let back = apply_rma(&RmaCall::unary(OpCode::Tra, t, ["C"])).unwrap();
        assert_eq!(names(&back), ["C", "H", "W"]);
        let mut got: Vec<_> = back.rows().collect();
        got.sort_by(|a, b| cmp_tuples(a, b));
        let expected: Vec<Vec<Value>> =
            [("5am", 1, 3), ("6am", 1, 4), ("7am", 6, 7), ("8am", 8, 5)]
                .iter()
                .map(|&(t, h, w)| vec![text(t), Value::Float(h as f64), Value::Float(w as f64)])
                .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn rqr_of_weather() {
        let r = apply_rma(&RmaCall::unary(OpCode::Rqr, weather(), ["T"])).unwrap();
        assert_eq!(names(&r), ["C", "H", "W"]);
        assert_eq!(r.column(0), &Column::text(["H", "W"]));
        assert!(close(&float_cells(&r, 0), &[-10.1, -8.8], 0.05));
        assert!(close(&float_cells(&r, 1), &[0.0, -4.6], 0.05));
        let m = reduce(&r, &["C".to_string()]).unwrap();
        assert!((m.get(0, 0) + 102f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn usv_schema_and_origins() {
        let call = RmaCall::unary(OpCode::Usv, weather(), ["T"]);
        let u = apply_rma(&call).unwrap();
        assert_eq!(names(&u), ["T", "5am", "6am", "7am", "8am"]);
        assert_eq!(u.column(0), &Column::text(["5am", "6am", "7am", "8am"]));
        let o = origins_of(&call).unwrap();
        assert_eq!(o.columns, ["5am", "6am", "7am", "8am"]);
        assert_eq!(o.rows.len(), 4);
    }

    #[test]
    fn qqr_origins_with_two_order_attributes() {
        let r = weather();
        let r = project_columns(&r, &["T", "H", "W"]).unwrap();
        let call = RmaCall::unary(OpCode::Qqr, r, ["W", "T"]);
        let o = origins_of(&call).unwrap();
        let expected: Vec<Vec<Value>> = [(3, "5am"), (4, "6am"), (5, "8am"), (7, "7am")]
            .iter()
            .map(|&(w, t)| vec![Value::Int(w), text(t)])
            .collect();
        assert_eq!(o.rows, expected);
        assert_eq!(o.columns, ["H"]);
        assert_eq!(result_order_schema(&call), ["W", "T"]);
    }

    #[test]
    fn rank_and_determinant_use_relation_name() {
        let r = project_columns(&weather(), &["T", "H"]).unwrap().named("r");
        let call = RmaCall::unary(OpCode::Rnk, r.clone(), ["T"]);
        let out = apply_rma(&call).unwrap();
        assert_eq!(names(&out), ["C", "rnk"]);
        assert_eq!(out.row(0), vec![text("r"), Value::Float(1.0)]);
        let o = origins_of(&call).unwrap();
        assert_eq!(o.rows, vec![vec![text("r")]]);
        assert_eq!(o.columns, ["rnk"]);

        assert_eq!(
            apply_rma(&RmaCall::unary(OpCode::Rnk, r.unnamed(), ["T"])),
            Err(RmaError::UnnamedRelation { op: OpCode::Rnk })
        );

        let sq = weather().gather(&[1, 2]);
        let d = apply_rma(&RmaCall::unary(OpCode::Det, sq, ["T"])).unwrap();
        assert_eq!(d.row(0), vec![text("r"), Value::Float(-26.0)]);
    }

    fn pair() -> (Relation, Relation) {
        let a = Relation::from_columns([
            ("U", Column::int(vec![3, 1, 2])),
            ("x", Column::float(vec![30.0, 10.0, 20.0])),
            ("y", Column::float(vec![3.0, 1.0, 2.0])),
        ])
        .unwrap();
        let b = Relation::from_columns([
            ("V", Column::text(["b", "c", "a"])),
            ("p", Column::float(vec![2.0, 3.0, 1.0])),
            ("q", Column::float(vec![0.2, 0.3, 0.1])),
        ])
        .unwrap();
        (a, b)
    }

    #[test]
    fn add_pairs_rows_by_rank() {
        let (a, b) = pair();
        let call = RmaCall::binary(OpCode::Add, a, ["U"], b, ["V"]);
        let out = apply_rma(&call).unwrap();
        assert_eq!(names(&out), ["U", "V", "x", "y"]);
        assert_eq!(
            out.row(0),
            vec![
                Value::Int(1),
                text("a"),
                Value::Float(11.0),
                Value::Float(1.1)
            ]
        );
        assert_eq!(
            out.row(2),
            vec![
                Value::Int(3),
                text("c"),
                Value::Float(33.0),
                Value::Float(3.3)
            ]
        );

        let fast = apply_rma(&call.clone().with_sort_avoidance(true)).unwrap();
        let mut x: Vec<_> = out.rows().collect();
        let mut y: Vec<_> = fast.rows().collect();
        x.sort_by(|a, b| cmp_tuples(a, b));
        y.sort_by(|a, b| cmp_tuples(a, b));
        assert_eq!(x, y);
        assert_eq!(fast.row(0)[0], Value::Int(3));
    }

    #[test]
    fn qqr_without_sorting() {
        let before = sort_operations();
        let out =
            apply_rma(&RmaCall::unary(OpCode::Qqr, weather(), ["T"]).with_sort_avoidance(true))
                .unwrap();
        assert_eq!(sort_operations(), before);
        assert_eq!(out.column(0), weather().column(0));
        let sorted = apply_rma(&RmaCall::unary(OpCode::Qqr, weather(), ["T"])).unwrap();
        assert_eq!(sort_operations(), before + 1);
        // 5am, 8am, 7am, 6am sit at sorted positions 0, 3, 2, 1
        for (i, k) in [0, 3, 2, 1].into_iter().enumerate() {
            assert!(close(
                &float_cells(&out, i),
                &float_cells(&sorted, k),
                1e-12
            ));
        }
    }

    #[test]
    fn binary_products() {
        let (a, b) = pair();
        let b2 = project_columns(&b, &["V", "p"]).unwrap();
        let mmu = apply_rma(&RmaCall::binary(
            OpCode::Mmu,
            a.clone(),
            ["U"],
            b2.clone().gather(&[0, 2]),
            ["V"],
        ));
        // 3x2 times 2x1
        let mmu = mmu.unwrap();
        assert_eq!(names(&mmu), ["U", "p"]);
        assert_eq!(float_cells(&mmu, 0), [10.0 * 1.0 + 1.0 * 2.0]);

        let cpd = apply_rma(&RmaCall::binary(
            OpCode::Cpd,
            a.clone(),
            ["U"],
            b.clone(),
            ["V"],
        ))
        .unwrap();
        assert_eq!(names(&cpd), ["C", "p", "q"]);
        assert_eq!(cpd.column(0), &Column::text(["x", "y"]));
        assert_eq!(float_cells(&cpd, 0)[0], 10.0 + 40.0 + 90.0);

        let opd = apply_rma(&RmaCall::binary(
            OpCode::Opd,
            a.clone(),
            ["U"],
            b.clone(),
            ["V"],
        ))
        .unwrap();
        assert_eq!(names(&opd), ["U", "a", "b", "c"]);

        let sq = Relation::from_columns([
            ("K", Column::text(["a", "b"])),
            ("c1", Column::float(vec![6.0, 8.0])),
            ("c2", Column::float(vec![7.0, 5.0])),
        ])
        .unwrap();
        let rhs = Relation::from_columns([
            ("J", Column::text(["a", "b"])),
            ("v", Column::float(vec![13.0, 13.0])),
        ])
        .unwrap();
        let sol = apply_rma(&RmaCall::binary(OpCode::Sol, sq, ["K"], rhs, ["J"])).unwrap();
        assert_eq!(names(&sol), ["C", "v"]);
        assert!(close(&float_cells(&sol, 0), &[1.0], 1e-12));
        assert!(close(&float_cells(&sol, 1), &[1.0], 1e-12));
    }

    #[test]
    fn named_errors() {
        let w = weather();
        assert_eq!(
            apply_rma(&RmaCall::unary(OpCode::Rqr, w.clone(), ["T"]).with_context("H")),
            Err(RmaError::NameCollision("H".into()))
        );
        assert!(matches!(
            apply_rma(&RmaCall::unary(
                OpCode::Inv,
                project_columns(&w, &["H", "W"]).unwrap(),
                ["H"]
            )),
            Err(RmaError::KeyViolation { .. })
        ));
        assert!(matches!(
            apply_rma(&RmaCall::unary(OpCode::Inv, w.clone(), ["H"])),
            Err(RmaError::NonNumericApplication { .. })
        ));
        assert_eq!(
            apply_rma(&RmaCall::unary(OpCode::Tra, w.clone(), ["T", "H"])),
            Err(RmaError::OrderCardinality {
                op: OpCode::Tra,
                arg: "U",
                actual: 2
            })
        );
        assert_eq!(
            RmaError::OrderCardinality {
                op: OpCode::Tra,
                arg: "U",
                actual: 2
            }
            .to_string(),
            "the order schema U of tra must have exactly one attribute, got 2"
        );
        assert!(matches!(
            apply_rma(&RmaCall::unary(OpCode::Mmu, w.clone(), ["T"])),
            Err(RmaError::Arity { .. })
        ));
        assert!(matches!(
            apply_rma(&RmaCall::unary(OpCode::Inv, w.clone(), ["T"])),
            Err(RmaError::Kernel(KernelError::NotSquare { .. }))
        ));
        assert_eq!(
            apply_rma(&RmaCall::unary(OpCode::Inv, w.gather(&[]), ["T"])),
            Err(RmaError::EmptyRelation { op: OpCode::Inv })
        );
        let (a, b) = pair();
        assert!(matches!(
            apply_rma(&RmaCall::binary(
                OpCode::Add,
                a.clone(),
                ["U"],
                project_columns(&b, &["V", "p"]).unwrap(),
                ["V"]
            )),
            Err(RmaError::NotUnionCompatible { .. })
        ));
        assert!(matches!(
            apply_rma(&RmaCall::binary(
                OpCode::Add,
                a.clone(),
                ["U"],
                a.clone(),
                ["U"]
            )),
            Err(RmaError::OverlappingOrderSchemas { .. })
        ));
        let evl_clash = Relation::from_columns([
            ("evl", Column::int(vec![1])),
            ("x", Column::float(vec![2.0])),
        ])
        .unwrap();
        assert_eq!(
            apply_rma(&RmaCall::unary(OpCode::Evl, evl_clash, ["evl"])),
            Err(RmaError::NameCollision("evl".into()))
        );
    }
}
